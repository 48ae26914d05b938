//! Slow, independent reference implementations used to check the fast paths.
//!
//! Nothing here is called by the simulator itself.

use num_complex::{Complex, Complex64};

use crate::cmf::{Ecv, EcvLattice, TIE_TOLERANCE};
use crate::error::{Error, Result};

/// `‖a‖² − |gᴴa|²/(1+‖g‖²)`, the textbook form of the effective noise.
pub fn noise_direct(g: [Complex64; 2], a: [Complex64; 2]) -> f64 {
    let k = 1.0 + g[0].norm_sqr() + g[1].norm_sqr();
    let proj = g[0].conj() * a[0] + g[1].conj() * a[1];
    a[0].norm_sqr() + a[1].norm_sqr() - proj.norm_sqr() / k
}

fn to_c(a: [Complex<i64>; 2]) -> [Complex64; 2] {
    a.map(|z| Complex64::new(z.re as f64, z.im as f64))
}

/// First nonzero entry rotated into `re > 0, im ≥ 0`.
fn canonical(a: [Complex<i64>; 2]) -> [Complex<i64>; 2] {
    let lead = if a[0] != Complex::new(0, 0) { a[0] } else { a[1] };
    let units = [
        Complex::new(1, 0),
        Complex::new(0, 1),
        Complex::new(-1, 0),
        Complex::new(0, -1),
    ];
    for u in units {
        let z = lead * u;
        if z.re > 0 && z.im >= 0 {
            return [a[0] * u, a[1] * u];
        }
    }
    a
}

/// Exhaustive search over the box `|Re a_k|, |Im a_k| ≤ ⌈√(1 + ‖g‖²)⌉`.
///
/// The box is generous: a vector beating the better unit vector already
/// satisfies `‖a‖² ≤ (1+‖g‖²)·aᴴHa ≤ 1 + min_k |g_k|²`. Ties within
/// the shared tolerance prefer vectors with both entries nonzero, then smaller
/// `‖a‖²`, then the lexicographically smallest `(Re a₁, Im a₁, Re a₂, Im a₂)`.
pub fn brute_force_ecv(g: [Complex64; 2], lattice: EcvLattice) -> (Ecv, f64) {
    let k = (1.0 + g[0].norm_sqr() + g[1].norm_sqr()).sqrt().ceil() as i64;
    let ki = match lattice {
        EcvLattice::Integer => 0,
        EcvLattice::GaussianInteger => k,
    };
    let mut all: Vec<([Complex<i64>; 2], f64)> = Vec::new();
    let mut best = f64::INFINITY;
    for r1 in -k..=k {
        for i1 in -ki..=ki {
            for r2 in -k..=k {
                for i2 in -ki..=ki {
                    let a = [Complex::new(r1, i1), Complex::new(r2, i2)];
                    if r1 == 0 && i1 == 0 && r2 == 0 && i2 == 0 {
                        continue;
                    }
                    let v = noise_direct(g, to_c(a));
                    if v <= best + 4.0 * TIE_TOLERANCE {
                        best = best.min(v);
                        all.push((a, v));
                    }
                }
            }
        }
    }
    let winner = all
        .into_iter()
        .filter(|(_, v)| *v <= best + TIE_TOLERANCE)
        .map(|(a, v)| (canonical(a), v))
        .min_by_key(|(a, _)| {
            let zero = a[0] == Complex::new(0, 0) || a[1] == Complex::new(0, 0);
            let norm = a[0].norm_sqr() + a[1].norm_sqr();
            (zero, norm, [a[0].re, a[0].im, a[1].re, a[1].im])
        })
        .expect("box contains the unit vectors");
    (Ecv::gaussian(winner.0[0], winner.0[1]), winner.1)
}

// Gauss–Kronrod 7/15 abscissae and weights on [-1, 1] (non-negative half).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Quadrature settings.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            rel_tol: 1e-13,
            abs_tol: 1e-300,
            max_intervals: 5000,
        }
    }
}

impl Quadrature {
    /// Globally adaptive bisection of the interval with the largest error
    /// estimate until the total estimate meets the tolerance.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<f64> {
        let mut parts = vec![(a, b, gk15(&f, a, b))];
        loop {
            let total: f64 = parts.iter().map(|p| p.2 .0).sum();
            let err: f64 = parts.iter().map(|p| p.2 .1).sum();
            if err <= self.abs_tol.max(self.rel_tol * total.abs()) {
                return Ok(total);
            }
            if parts.len() >= self.max_intervals {
                return Err(Error::Numerical {
                    routine: "quadrature",
                    detail: format!("error estimate {err:e} on {total:e} after {} intervals", parts.len()),
                });
            }
            let worst = parts
                .iter()
                .enumerate()
                .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
                .map(|(i, _)| i)
                .unwrap_or(0);
            let (lo, hi, _) = parts.swap_remove(worst);
            let mid = 0.5 * (lo + hi);
            if !(mid > lo && mid < hi) {
                return Err(Error::Numerical {
                    routine: "quadrature",
                    detail: "interval collapsed to machine resolution".into(),
                });
            }
            parts.push((lo, mid, gk15(&f, lo, mid)));
            parts.push((mid, hi, gk15(&f, mid, hi)));
        }
    }

    /// `∫₀^∞ f`, mapped onto `[0, 1)` by `x = s·t/(1−t)`; `scale` should
    /// match the decay length of `f`.
    pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(&self, f: F, scale: f64) -> Result<f64> {
        let g = |t: f64| {
            if t >= 1.0 {
                return 0.0;
            }
            let u = 1.0 - t;
            let v = f(scale * t / u) * scale / (u * u);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        };
        self.integrate(g, 0.0, 1.0)
    }
}

/// `I₁(μ) = ∫₀^∞ ln(1+t) e^{−μt} dt` by quadrature.
pub fn i1_quadrature(mu: f64) -> Result<f64> {
    Quadrature::default().integrate_semi_infinite(|t| t.ln_1p() * (-mu * t).exp(), 1.0 / mu)
}

/// `E[2 log₂(1 + γ_max)]` by quadrature of `2 log₂(1+γ) f_{γ_max}(γ)`.
pub fn sum_rate_quadrature(input: &crate::analysis::BoundInput) -> Result<f64> {
    let dist = input.gamma_max()?;
    let scale = 1.0 / dist.rates.iter().cloned().fold(f64::INFINITY, f64::min);
    Quadrature::default()
        .integrate_semi_infinite(|x| 2.0 * x.ln_1p() / std::f64::consts::LN_2 * dist.pdf(x), scale)
}

/// Kolmogorov–Smirnov statistic `sup |F_n − F|` of a sample against `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic p-value of the KS statistic `d` for `n` samples.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmf::{best_ecv, EffectiveChannel};

    #[test]
    fn quadrature_polynomials_and_exp() {
        let q = Quadrature::default();
        let v = q.integrate(|x| x.powi(5) - 2.0 * x, 0.0, 2.0).unwrap();
        assert!((v - (64.0 / 6.0 - 4.0)).abs() < 1e-13);
        let v = q.integrate_semi_infinite(|x| (-x).exp(), 1.0).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let v = q.integrate_semi_infinite(|x| x * (-3.0 * x).exp(), 1.0 / 3.0).unwrap();
        assert!((v - 1.0 / 9.0).abs() < 1e-13);
    }

    #[test]
    fn quadrature_sqrt_singularity() {
        let v = Quadrature::default().integrate(f64::sqrt, 0.0, 1.0).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn i1_quadrature_at_one() {
        let v = i1_quadrature(1.0).unwrap();
        assert!((v - 0.596_347_362_323_194_1).abs() < 1e-12);
    }

    #[test]
    fn brute_force_known_channels() {
        let g = |a: f64, b: f64| [Complex64::new(a, 0.0), Complex64::new(b, 0.0)];
        assert_eq!(brute_force_ecv(g(1.0, 1.0), EcvLattice::Integer).0, Ecv::new(1, 1));
        assert_eq!(brute_force_ecv(g(6.0, 3.0), EcvLattice::Integer).0, Ecv::new(2, 1));
        assert_eq!(brute_force_ecv(g(5.0, 0.1), EcvLattice::Integer).0, Ecv::new(1, 0));
    }

    #[test]
    fn brute_force_agrees_with_fast_search_on_a_grid() {
        for i in 0..40 {
            for j in 0..40 {
                let g = [Complex64::new(0.37 * i as f64, 0.0), Complex64::new(0.29 * j as f64, 0.0)];
                let fast = best_ecv(&EffectiveChannel::new(g, EcvLattice::Integer));
                let (a, v) = brute_force_ecv(g, EcvLattice::Integer);
                assert_eq!(fast.ecv, a, "g = {g:?}");
                assert!((fast.noise - v).abs() <= 1e-12 * v.max(1.0));
            }
        }
    }

    #[test]
    fn ks_accepts_uniform_and_rejects_shift() {
        let mut xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let d = ks_statistic(&mut xs, |x| x.clamp(0.0, 1.0));
        assert!(d <= 0.0005 + 1e-12);
        assert!(ks_p_value(d, 1000) > 0.99);
        let d = ks_statistic(&mut xs, |x| (x - 0.1).clamp(0.0, 1.0));
        assert!(ks_p_value(d, 1000) < 1e-6);
    }
}
