//! Exponential integral and integer-order upper incomplete gamma.
//!
//! Functions that grow like `e^x` are also exposed in scaled form
//! (`e^x · f(x)`) so that the bounds stay finite for large rate parameters.

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const EPS: f64 = 1e-16;
const MAX_TERMS: usize = 500;

fn check_positive(x: f64, what: &str) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} requires a positive finite argument, got {x}")))
    }
}

/// Power series `E₁(x) = −γ − ln x − Σ_{k≥1} (−x)^k/(k·k!)`, for `x < 1`.
fn e1_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..MAX_TERMS {
        term *= -x / k as f64;
        let contrib = term / k as f64;
        sum += contrib;
        if contrib.abs() < EPS * sum.abs() {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

/// Modified Lentz evaluation of the continued fraction for `e^x E₁(x)`,
/// for `x ≥ 1`.
fn exp_e1_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_TERMS {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Exponential integral `E₁(x) = Γ(0, x)`.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    check_positive(x, "E1")?;
    Ok(if x < 1.0 {
        e1_series(x)
    } else {
        (-x).exp() * exp_e1_fraction(x)
    })
}

/// `e^x E₁(x)`, finite for arbitrarily large `x`.
pub fn exp_e1_scaled(x: f64) -> Result<f64> {
    check_positive(x, "E1")?;
    Ok(if x < 1.0 {
        x.exp() * e1_series(x)
    } else {
        exp_e1_fraction(x)
    })
}

/// `e^x Γ(s, x)` for integer `s`.
///
/// `s > 0` uses the finite sum `(s−1)! Σ_{k<s} x^k/k!`; `s ≤ 0` recurses down
/// from `E₁` through `Γ(s, x) = (Γ(s+1, x) − x^s e^{−x})/s`.
pub fn upper_incomplete_gamma_scaled(s: i32, x: f64) -> Result<f64> {
    check_positive(x, "upper incomplete gamma")?;
    if s > 0 {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..s {
            term *= x / k as f64;
            sum += term;
        }
        let fact: f64 = (1..s).map(|k| k as f64).product();
        return Ok(fact * sum);
    }
    let mut g = exp_e1_scaled(x)?;
    for t in (s..0).rev() {
        // g holds the scaled value at t + 1
        g = (g - x.powi(t)) / t as f64;
    }
    Ok(g)
}

/// Upper incomplete gamma `Γ(s, x)` for integer `s`.
pub fn upper_incomplete_gamma(s: i32, x: f64) -> Result<f64> {
    Ok((-x).exp() * upper_incomplete_gamma_scaled(s, x)?)
}

/// `I_n(μ) = ∫₀^∞ t^{n−1} ln(1+t) e^{−μt} dt
///        = (n−1)! e^μ Σ_{l=1}^{n} Γ(l−n, μ)/μ^l`.
pub fn log_moment(n: u32, mu: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("log_moment order must be at least 1".into()));
    }
    check_positive(mu, "log_moment")?;
    let n = n as i32;
    let fact: f64 = (1..n).map(|k| k as f64).product();
    let mut sum = 0.0;
    for l in 1..=n {
        sum += upper_incomplete_gamma_scaled(l - n, mu)? / mu.powi(l);
    }
    Ok(fact * sum)
}

/// `I₁(μ) = e^μ E₁(μ)/μ`.
pub fn i1(mu: f64) -> Result<f64> {
    Ok(exp_e1_scaled(mu)? / mu)
}
