//! Closed-form outage and sum-rate bounds.
//!
//! With `γ_i = min(P₁h²_{1i}, P₂h²_{2i})` exponential of rate
//! `λ_i = 1/(P₁σ²_{1i}) + 1/(P₂σ²_{2i})`, the best relay's computation rate is
//! at most `log₂(1 + γ_max)`, so `P(γ_max < 2^{R_t} − 1)` lower-bounds outage
//! and `E[2 log₂(1 + γ_max)]` upper-bounds the average sum rate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special;

/// Parameters shared by every bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundInput {
    /// Target rate `R_t` in bits.
    pub target_rate: f64,
    /// `[P₁, P₂]`.
    pub powers: [f64; 2],
    /// `variances[i] = [σ²_{1i}, σ²_{2i}]`, one entry per relay.
    pub variances: Vec<[f64; 2]>,
}

impl BoundInput {
    pub fn uniform(num_relays: usize, power: f64, target_rate: f64) -> Self {
        BoundInput {
            target_rate,
            powers: [power, power],
            variances: vec![[1.0, 1.0]; num_relays],
        }
    }

    pub fn num_relays(&self) -> usize {
        self.variances.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.target_rate.is_finite() && self.target_rate > 0.0) {
            return Err(Error::config(format!(
                "target rate must be positive, got {}",
                self.target_rate
            )));
        }
        if self.powers.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::config(format!("powers must be positive, got {:?}", self.powers)));
        }
        if self.variances.is_empty() {
            return Err(Error::config("at least one relay is required"));
        }
        if self.variances.iter().flatten().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::config("channel variances must be positive"));
        }
        Ok(())
    }

    /// Rate parameters of the per-relay bottleneck gains.
    pub fn gamma_max(&self) -> Result<GammaMaxDist> {
        self.validate()?;
        let [p1, p2] = self.powers;
        Ok(GammaMaxDist {
            rates: self
                .variances
                .iter()
                .map(|[s1, s2]| 1.0 / (p1 * s1) + 1.0 / (p2 * s2))
                .collect(),
        })
    }

    /// `2^{R_t} − 1`.
    pub fn threshold(&self) -> f64 {
        self.target_rate.exp2() - 1.0
    }
}

/// Distribution of `γ_max = max_i γ_i` for independent exponential `γ_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaMaxDist {
    pub rates: Vec<f64>,
}

impl GammaMaxDist {
    /// `Π_i (1 − e^{−λ_i γ})`.
    pub fn cdf(&self, gamma: f64) -> f64 {
        self.rates.iter().map(|l| -(-l * gamma).exp_m1()).product()
    }

    /// `Σ_i λ_i e^{−λ_i γ} Π_{k≠i} (1 − e^{−λ_k γ})`.
    pub fn pdf(&self, gamma: f64) -> f64 {
        (0..self.rates.len())
            .map(|i| {
                let li = self.rates[i];
                let others: f64 = self
                    .rates
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != i)
                    .map(|(_, l)| -(-l * gamma).exp_m1())
                    .product();
                li * (-li * gamma).exp() * others
            })
            .sum()
    }
}

/// Outage lower bound `Π_i (1 − e^{−λ_i(2^{R_t} − 1)})`.
pub fn outage_lower_bound(input: &BoundInput) -> Result<f64> {
    let dist = input.gamma_max()?;
    Ok(dist.cdf(input.threshold()))
}

/// High-SNR form `((2^{R_t}−1)/P)^M Π_i (1/σ²_{1i} + 1/σ²_{2i})`, which
/// requires `P₁ = P₂ = P`.
pub fn outage_highsnr(input: &BoundInput) -> Result<f64> {
    input.validate()?;
    let [p1, p2] = input.powers;
    if p1 != p2 {
        return Err(Error::config(format!(
            "high-SNR outage needs equal user powers, got {p1} and {p2}"
        )));
    }
    let t = input.threshold() / p1;
    Ok(input
        .variances
        .iter()
        .map(|[s1, s2]| t * (1.0 / s1 + 1.0 / s2))
        .product())
}

/// Least-squares slope of `−log₁₀(outage)` against `SNR_dB/10` over points
/// with `lo ≤ SNR ≤ hi`.
pub fn diversity_fit(curve: &[(f64, f64)], window: (f64, f64)) -> Result<f64> {
    let pts: Vec<(f64, f64)> = curve
        .iter()
        .filter(|(snr, _)| *snr >= window.0 && *snr <= window.1)
        .map(|&(snr, p)| {
            if p > 0.0 {
                Ok((snr / 10.0, -p.log10()))
            } else {
                Err(Error::Domain(format!("outage at {snr} dB must be positive, got {p}")))
            }
        })
        .collect::<Result<_>>()?;
    if pts.len() < 2 {
        return Err(Error::InsufficientPoints { needed: 2, got: pts.len() });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientPoints { needed: 2, got: 1 });
    }
    Ok(sxy / sxx)
}

/// `2 log₂(1 + γ_max)` for one realization's bottleneck gains.
pub fn sum_rate_bound_conditional(gamma_max: f64) -> f64 {
    2.0 * gamma_max.ln_1p() / std::f64::consts::LN_2
}

/// Largest relay count accepted by [`sum_rate_upper_bound`].
pub const MAX_SUBSET_RELAYS: usize = 20;

/// `E[2 log₂(1 + γ_max)]` by inclusion–exclusion over nonempty relay sets `S`:
/// `(2/ln 2) Σ_S (−1)^{|S|+1} λ_S I₁(λ_S)`, `λ_S = Σ_{i∈S} λ_i`.
pub fn sum_rate_upper_bound(input: &BoundInput) -> Result<f64> {
    let dist = input.gamma_max()?;
    let m = dist.rates.len();
    if m > MAX_SUBSET_RELAYS {
        return Err(Error::config(format!(
            "subset expansion supports at most {MAX_SUBSET_RELAYS} relays, got {m}"
        )));
    }
    let mut total = 0.0;
    for mask in 1u32..(1 << m) {
        let lambda: f64 = (0..m)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| dist.rates[i])
            .sum();
        let sign = if mask.count_ones() % 2 == 1 { 1.0 } else { -1.0 };
        total += sign * lambda * special::i1(lambda)?;
    }
    Ok(2.0 * total / std::f64::consts::LN_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_relay_outage_bound() {
        let b = outage_lower_bound(&BoundInput::uniform(1, 10.0, 1.0)).unwrap();
        assert!((b - (1.0 - (-0.2f64).exp())).abs() < 1e-15);
        assert!((b - 0.18127).abs() < 1e-5);
    }

    #[test]
    fn outage_bound_vanishes_at_zero_target() {
        let mut input = BoundInput::uniform(2, 10.0, 1e-12);
        assert!(outage_lower_bound(&input).unwrap() < 1e-20);
        input.target_rate = 0.0;
        assert!(outage_lower_bound(&input).is_err());
    }

    #[test]
    fn outage_bound_product_over_relays() {
        let one = outage_lower_bound(&BoundInput::uniform(1, 7.0, 1.0)).unwrap();
        let two = outage_lower_bound(&BoundInput::uniform(2, 7.0, 1.0)).unwrap();
        assert!((two - one * one).abs() < 1e-16);
    }

    #[test]
    fn highsnr_examples() {
        let input = BoundInput::uniform(1, 100.0, 1.0);
        let approx = outage_highsnr(&input).unwrap();
        assert!((approx - 0.02).abs() < 1e-15);
        let exact = outage_lower_bound(&input).unwrap();
        assert!((exact - 0.019801).abs() < 1e-6);

        let three = outage_highsnr(&BoundInput::uniform(3, 100.0, 1.0)).unwrap();
        assert!((three - 0.02f64.powi(3)).abs() < 1e-18);

        let mut uneven = BoundInput::uniform(1, 100.0, 1.0);
        uneven.powers = [100.0, 50.0];
        assert!(outage_highsnr(&uneven).is_err());
    }

    #[test]
    fn highsnr_slope_is_relay_count() {
        for m in 1..=3 {
            let a = outage_highsnr(&BoundInput::uniform(m, 1e3, 1.0)).unwrap();
            let b = outage_highsnr(&BoundInput::uniform(m, 1e4, 1.0)).unwrap();
            assert!((a.log10() - b.log10() - m as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn diversity_fit_examples() {
        let curve = |m: usize, exact: bool| -> Vec<(f64, f64)> {
            (0..=8)
                .map(|k| {
                    let snr = 30.0 + 1.25 * k as f64;
                    let input = BoundInput::uniform(m, 10f64.powf(snr / 10.0), 1.0);
                    let p = if exact {
                        outage_lower_bound(&input).unwrap()
                    } else {
                        outage_highsnr(&input).unwrap()
                    };
                    (snr, p)
                })
                .collect()
        };
        let s = diversity_fit(&curve(2, false), (30.0, 40.0)).unwrap();
        assert!((s - 2.0).abs() < 1e-6);
        let s = diversity_fit(&curve(2, true), (30.0, 40.0)).unwrap();
        assert!((1.95..=2.0).contains(&s), "slope {s}");

        let flat = [(0.0, 0.1), (10.0, 0.1), (20.0, 0.1)];
        assert!(diversity_fit(&flat, (0.0, 20.0)).unwrap().abs() < 1e-15);

        assert!(matches!(
            diversity_fit(&flat, (5.0, 15.0)),
            Err(Error::InsufficientPoints { .. })
        ));
    }

    #[test]
    fn sum_rate_single_relay() {
        let lambda = 0.2;
        let got = sum_rate_upper_bound(&BoundInput::uniform(1, 10.0, 1.0)).unwrap();
        let want = 2.0 / std::f64::consts::LN_2 * lambda * special::i1(lambda).unwrap();
        assert!((got - want).abs() < 1e-15);
    }

    #[test]
    fn sum_rate_two_relays_subset_algebra() {
        // 2·T(λ) − T(2λ) with T(x) = (2/ln2)·x·I₁(x)
        let t = |x: f64| 2.0 / std::f64::consts::LN_2 * x * special::i1(x).unwrap();
        let got = sum_rate_upper_bound(&BoundInput::uniform(2, 10.0, 1.0)).unwrap();
        assert!((got - (2.0 * t(0.2) - t(0.4))).abs() < 1e-14);
    }
}
