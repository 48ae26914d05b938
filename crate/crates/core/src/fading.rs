//! Block-fading channel model.
//!
//! One [`ChannelRealization`] holds the user→relay coefficient `h[j][i]` for
//! both users and every relay. Links are reciprocal, so the same coefficient
//! is used for the relay→user broadcast. A realization stays fixed for both
//! the multiple-access and the broadcast slot.
//!
//! "Rayleigh with variance σ²" means `E[h²] = σ²`, so `h²` is exponential with
//! mean σ². Complex links are `h = √(σ²/2)·(x + iy)` with standard normal `x`,
//! `y`, which keeps `|h|²` exponential with the same mean.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cmf::EcvLattice;
use crate::error::{Error, Result};

/// Statistical model of the user↔relay links.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ChannelModel {
    /// Real, nonnegative Rayleigh amplitudes (phase compensated at the relay).
    #[default]
    RealRayleigh,
    /// Circularly symmetric complex Gaussian coefficients.
    ComplexGaussian,
}

impl ChannelModel {
    /// Integer lattice the relays search for equation coefficients.
    pub fn ecv_lattice(self) -> EcvLattice {
        match self {
            ChannelModel::RealRayleigh => EcvLattice::Integer,
            ChannelModel::ComplexGaussian => EcvLattice::GaussianInteger,
        }
    }

    pub fn is_complex(self) -> bool {
        matches!(self, ChannelModel::ComplexGaussian)
    }
}

/// Fading parameters for one network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FadingConfig {
    /// `variances[i] = [σ²_{1i}, σ²_{2i}]`; its length is the number of relays.
    pub variances: Vec<[f64; 2]>,
    #[serde(default)]
    pub model: ChannelModel,
}

impl FadingConfig {
    /// `num_relays` relays with every link at variance `variance`.
    pub fn uniform(num_relays: usize, variance: f64, model: ChannelModel) -> Self {
        Self::asymmetric(num_relays, variance, variance, model)
    }

    /// Per-user variances shared by all relays.
    pub fn asymmetric(num_relays: usize, user1: f64, user2: f64, model: ChannelModel) -> Self {
        FadingConfig {
            variances: vec![[user1, user2]; num_relays],
            model,
        }
    }

    pub fn num_relays(&self) -> usize {
        self.variances.len()
    }

    /// True when every relay sees identically distributed links.
    pub fn is_homogeneous(&self) -> bool {
        self.variances.windows(2).all(|w| w[0] == w[1])
    }

    pub fn validate(&self) -> Result<()> {
        if self.variances.is_empty() {
            return Err(Error::config("at least one relay is required"));
        }
        for (i, v) in self.variances.iter().enumerate() {
            for (j, s) in v.iter().enumerate() {
                if !(s.is_finite() && *s > 0.0) {
                    return Err(Error::config(format!(
                        "variance of link user{} -> relay{} must be positive, got {s}",
                        j + 1,
                        i + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Transmit power budgets with unit noise variance everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerConfig {
    pub p1: f64,
    pub p2: f64,
    pub pr: f64,
}

impl PowerConfig {
    /// Users and relays at the same power `p`.
    pub fn equal(p: f64) -> Self {
        PowerConfig { p1: p, p2: p, pr: p }
    }

    /// `equal` with `p = 10^(snr_db/10)`.
    pub fn from_snr_db(snr_db: f64) -> Self {
        Self::equal(db_to_linear(snr_db))
    }

    pub fn user_caps(&self) -> [f64; 2] {
        [self.p1, self.p2]
    }

    /// Whether the relay power dominates both users, which makes the
    /// broadcast links never the bottleneck.
    pub fn relay_dominates(&self) -> bool {
        self.pr >= self.p1.max(self.p2)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p1", self.p1), ("p2", self.p2), ("pr", self.pr)] {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::config(format!("{name} must be positive, got {p}")));
            }
        }
        if !self.relay_dominates() {
            return Err(Error::config(format!(
                "relay power {} is below max(p1, p2) = {}",
                self.pr,
                self.p1.max(self.p2)
            )));
        }
        Ok(())
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// One block-fading draw.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// `links[i] = [h_{1i}, h_{2i}]`.
    links: Vec<[Complex64; 2]>,
    model: ChannelModel,
}

impl ChannelRealization {
    pub fn new(links: Vec<[Complex64; 2]>, model: ChannelModel) -> Self {
        ChannelRealization { links, model }
    }

    /// Realization from real amplitudes, `links[i] = [h_{1i}, h_{2i}]`.
    pub fn from_real(links: &[[f64; 2]]) -> Self {
        let links = links
            .iter()
            .map(|&[a, b]| [Complex64::new(a, 0.0), Complex64::new(b, 0.0)])
            .collect();
        ChannelRealization {
            links,
            model: ChannelModel::RealRayleigh,
        }
    }

    pub fn num_relays(&self) -> usize {
        self.links.len()
    }

    pub fn model(&self) -> ChannelModel {
        self.model
    }

    /// Coefficient pair `[h_{1i}, h_{2i}]` of relay `i` (0-based).
    pub fn relay(&self, i: usize) -> [Complex64; 2] {
        self.links[i]
    }

    /// Coefficient between user `j ∈ {0, 1}` and relay `i`, either direction.
    pub fn coefficient(&self, user: usize, relay: usize) -> Complex64 {
        self.links[relay][user]
    }

    /// Power gain `|h_{ji}|²`.
    pub fn gain(&self, user: usize, relay: usize) -> f64 {
        self.links[relay][user].norm_sqr()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[Complex64; 2]> {
        self.links.iter()
    }
}

/// Draws a real Rayleigh amplitude with `E[r²] = variance`.
pub fn sample_rayleigh<R: Rng + ?Sized>(variance: f64, rng: &mut R) -> Result<f64> {
    if !(variance.is_finite() && variance > 0.0) {
        return Err(Error::config(format!(
            "Rayleigh variance must be positive, got {variance}"
        )));
    }
    let e: f64 = Exp1.sample(rng);
    Ok((variance * e).sqrt())
}

/// Draws a circularly symmetric complex Gaussian with `E[|h|²] = variance`.
pub fn sample_complex_gaussian<R: Rng + ?Sized>(variance: f64, rng: &mut R) -> Result<Complex64> {
    if !(variance.is_finite() && variance > 0.0) {
        return Err(Error::config(format!(
            "complex Gaussian variance must be positive, got {variance}"
        )));
    }
    let s = (variance / 2.0).sqrt();
    let x: f64 = StandardNormal.sample(rng);
    let y: f64 = StandardNormal.sample(rng);
    Ok(Complex64::new(s * x, s * y))
}

/// Draws one realization. Links are drawn relay-major, user 1 before user 2.
pub fn sample_block<R: Rng + ?Sized>(cfg: &FadingConfig, rng: &mut R) -> Result<ChannelRealization> {
    cfg.validate()?;
    let mut links = Vec::with_capacity(cfg.num_relays());
    for v in &cfg.variances {
        let mut pair = [Complex64::new(0.0, 0.0); 2];
        for (slot, &var) in pair.iter_mut().zip(v) {
            *slot = match cfg.model {
                ChannelModel::RealRayleigh => Complex64::new(sample_rayleigh(var, rng)?, 0.0),
                ChannelModel::ComplexGaussian => sample_complex_gaussian(var, rng)?,
            };
        }
        links.push(pair);
    }
    Ok(ChannelRealization {
        links,
        model: cfg.model,
    })
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent generator for the stream addressed by `path` under `seed`.
///
/// Distinct paths give statistically independent ChaCha8 streams, so work can
/// be split across threads in any order without changing outputs.
pub fn substream(seed: u64, path: &[u64]) -> ChaCha8Rng {
    let mut state = seed;
    splitmix64(&mut state);
    for &p in path {
        let mut p = p;
        state ^= splitmix64(&mut p);
        splitmix64(&mut state);
    }
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean<I: Iterator<Item = f64>>(it: I) -> f64 {
        let (s, n) = it.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
        s / n as f64
    }

    #[test]
    fn rayleigh_second_moment_unit_variance() {
        let mut rng = substream(1, &[0]);
        let m = mean((0..1_000_000).map(|_| sample_rayleigh(1.0, &mut rng).unwrap().powi(2)));
        assert!((m - 1.0).abs() < 0.01, "E[r²] = {m}");
    }

    #[test]
    fn rayleigh_second_moment_quarter_variance() {
        let mut rng = substream(2, &[0]);
        let m = mean((0..1_000_000).map(|_| sample_rayleigh(0.25, &mut rng).unwrap().powi(2)));
        assert!((m - 0.25).abs() < 0.005, "E[r²] = {m}");
    }

    #[test]
    fn rayleigh_power_cdf_at_half() {
        let mut rng = substream(3, &[0]);
        let n = 1_000_000;
        let below = (0..n)
            .filter(|_| sample_rayleigh(1.0, &mut rng).unwrap().powi(2) < 0.5)
            .count();
        let p = below as f64 / n as f64;
        let expected = 1.0 - (-0.5f64).exp();
        assert!((p - expected).abs() < 0.005, "{p} vs {expected}");
    }

    #[test]
    fn complex_second_moment() {
        let mut rng = substream(4, &[0]);
        let m = mean((0..1_000_000).map(|_| sample_complex_gaussian(1.0, &mut rng).unwrap().norm_sqr()));
        assert!((m - 1.0).abs() < 0.01, "E[|h|²] = {m}");
    }

    #[test]
    fn non_positive_variance_rejected() {
        let mut rng = substream(0, &[]);
        assert!(sample_rayleigh(0.0, &mut rng).is_err());
        assert!(sample_rayleigh(-1.0, &mut rng).is_err());
        assert!(sample_complex_gaussian(f64::NAN, &mut rng).is_err());
        let cfg = FadingConfig::uniform(2, 0.0, ChannelModel::RealRayleigh);
        assert!(sample_block(&cfg, &mut rng).is_err());
        assert!(FadingConfig::uniform(0, 1.0, ChannelModel::RealRayleigh).validate().is_err());
    }

    #[test]
    fn block_is_deterministic_and_shaped() {
        let cfg = FadingConfig::uniform(3, 1.0, ChannelModel::RealRayleigh);
        let a = sample_block(&cfg, &mut substream(42, &[7])).unwrap();
        let b = sample_block(&cfg, &mut substream(42, &[7])).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.num_relays(), 3);
        assert!(a.iter().flatten().all(|h| h.im == 0.0 && h.re >= 0.0));
        let c = sample_block(&cfg, &mut substream(42, &[8])).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn power_config_requires_dominant_relay() {
        assert!(PowerConfig::equal(10.0).validate().is_ok());
        let p = PowerConfig { p1: 10.0, p2: 1.0, pr: 5.0 };
        assert!(p.validate().is_err());
        assert!(PowerConfig { p1: 0.0, p2: 1.0, pr: 5.0 }.validate().is_err());
    }

    #[test]
    fn substreams_differ_by_path() {
        let mut a = substream(5, &[1, 2]);
        let mut b = substream(5, &[2, 1]);
        let mut c = substream(5, &[1, 2]);
        let (x, y, z): (u64, u64, u64) = (a.random(), b.random(), c.random());
        assert_ne!(x, y);
        assert_eq!(x, z);
    }
}
