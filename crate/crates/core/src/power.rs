//! Power adaptation for aligned compute-and-forward.
//!
//! The relay alternates between choosing the best equation and scaling factor
//! for the current powers, and choosing the powers that minimize the
//! quantization noise `Σ_k |βα_k h_k − a_k|²` for that equation. Either each
//! user's power is capped separately, or only the sum of both powers is.
//!
//! With `c_k = Re(conj(βh_k)a_k)` and `d_k = |βh_k|²` the per-coordinate
//! minimizer is `c_k/(d_k + μ)` for the KKT multiplier `μ`. Real Rayleigh
//! links keep `c_k > 0`; a nonpositive `c_k` projects the amplitude to zero.

use num_complex::{Complex, Complex64};
use serde::{Deserialize, Serialize};

use crate::cmf::{self, EcvLattice, Ecv, RelayDecision};
use crate::error::{Error, Result};

/// Default convergence tolerance on successive amplitudes.
pub const DEFAULT_DELTA: f64 = 1e-3;
pub const DEFAULT_MAX_ITERS: usize = 100;

const BISECTION_MAX_ITERS: usize = 200;
const BISECTION_REL_TOL: f64 = 1e-9;

/// Which constraint the user powers obey.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PowerMode {
    /// `α₁² ≤ P₁` and `α₂² ≤ P₂`.
    #[default]
    PerUser,
    /// `α₁² + α₂² ≤ P₁ + P₂`.
    Total,
}

/// Power adaptation vector `[α₁², α₂²]` with the constraint it satisfies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pav {
    pub powers: [f64; 2],
    pub mode: PowerMode,
    pub caps: [f64; 2],
}

impl Pav {
    /// Both users at their individual caps.
    pub fn max_power(caps: [f64; 2], mode: PowerMode) -> Self {
        Pav { powers: caps, mode, caps }
    }

    pub fn from_amplitudes(amplitudes: [f64; 2], mode: PowerMode, caps: [f64; 2]) -> Self {
        Pav {
            powers: amplitudes.map(|a| a * a),
            mode,
            caps,
        }
    }

    pub fn amplitudes(&self) -> [f64; 2] {
        self.powers.map(f64::sqrt)
    }

    /// Whether the powers satisfy the mode's constraint within `tol`.
    pub fn is_feasible(&self, tol: f64) -> bool {
        let nonneg = self.powers.iter().all(|&p| p >= -tol);
        nonneg
            && match self.mode {
                PowerMode::PerUser => (0..2).all(|k| self.powers[k] <= self.caps[k] * (1.0 + tol)),
                PowerMode::Total => {
                    let cap = self.caps[0] + self.caps[1];
                    self.powers[0] + self.powers[1] <= cap * (1.0 + tol)
                }
            }
    }
}

/// Quantization noise `Σ_k |βα_k h_k − a_k|²`.
pub fn quantization_noise(amplitudes: [f64; 2], beta: Complex64, h: [Complex64; 2], a: &Ecv) -> f64 {
    let a = a.to_complex();
    (0..2)
        .map(|k| (beta * h[k] * amplitudes[k] - a[k]).norm_sqr())
        .sum()
}

/// Bisection diagnostics for the total-power step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bisection {
    pub mu: f64,
    /// `P_tot − Σ α_k²` at the returned multiplier, always `≥ 0`.
    pub residual: f64,
    pub iterations: usize,
}

/// Result of one power update at fixed `(a, β)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PavStep {
    pub amplitudes: [f64; 2],
    /// KKT multipliers: per user in per-user mode, the shared `μ` twice in
    /// total mode. Zero for interior coordinates.
    pub multipliers: [f64; 2],
    pub clamped: [bool; 2],
    /// A coordinate had `βh_k = 0` with `a_k ≠ 0`.
    pub degenerate: bool,
    pub bisection: Option<Bisection>,
}

fn step_terms(a: &Ecv, beta: Complex64, h: [Complex64; 2]) -> ([f64; 2], [f64; 2]) {
    let a = a.to_complex();
    let mut c = [0.0; 2];
    let mut d = [0.0; 2];
    for k in 0..2 {
        let b = beta * h[k];
        c[k] = (b.conj() * a[k]).re;
        d[k] = b.norm_sqr();
    }
    (c, d)
}

fn is_zero(z: Complex<i64>) -> bool {
    z.re == 0 && z.im == 0
}

/// Per-user power update.
///
/// Coordinate `k` takes the aligning amplitude `a_k/(βh_k)` when it is below
/// `√P_k`, otherwise `√P_k` with multiplier `βh_k a_k/√P_k − β²h_k²`.
pub fn pav_step_per_user(a: &Ecv, beta: Complex64, h: [Complex64; 2], caps: [f64; 2]) -> PavStep {
    let (c, d) = step_terms(a, beta, h);
    let comps = a.components();
    let mut step = PavStep {
        amplitudes: [0.0; 2],
        multipliers: [0.0; 2],
        clamped: [false; 2],
        degenerate: false,
        bisection: None,
    };
    for k in 0..2 {
        let cap = caps[k].sqrt();
        if d[k] == 0.0 {
            if !is_zero(comps[k]) {
                step.degenerate = true;
            }
            step.amplitudes[k] = cap;
            step.clamped[k] = true;
            continue;
        }
        let unconstrained = c[k] / d[k];
        if unconstrained <= 0.0 {
            step.amplitudes[k] = 0.0;
        } else if unconstrained < cap {
            step.amplitudes[k] = unconstrained;
        } else {
            step.amplitudes[k] = cap;
            step.clamped[k] = true;
            step.multipliers[k] = c[k] / cap - d[k];
        }
    }
    step
}

/// Total-power update.
///
/// Uses the aligning amplitudes when their powers sum below `P_tot`,
/// otherwise solves `Σ_k (c_k/(d_k + μ))² = P_tot` for `μ ≥ 0` by bisection.
/// The returned amplitudes always satisfy the constraint.
pub fn pav_step_total(a: &Ecv, beta: Complex64, h: [Complex64; 2], p_tot: f64) -> Result<PavStep> {
    let (c, d) = step_terms(a, beta, h);
    let comps = a.components();
    let mut step = PavStep {
        amplitudes: [0.0; 2],
        multipliers: [0.0; 2],
        clamped: [false; 2],
        degenerate: false,
        bisection: None,
    };
    let mut num = [0.0; 2];
    for k in 0..2 {
        if d[k] == 0.0 {
            step.degenerate |= !is_zero(comps[k]);
        } else {
            num[k] = c[k].max(0.0);
        }
    }
    let amps_at = |mu: f64| -> [f64; 2] {
        let mut out = [0.0; 2];
        for k in 0..2 {
            if num[k] > 0.0 {
                out[k] = num[k] / (d[k] + mu);
            }
        }
        out
    };
    let power = |amps: [f64; 2]| amps[0] * amps[0] + amps[1] * amps[1];

    let interior = amps_at(0.0);
    if power(interior) < p_tot {
        step.amplitudes = interior;
        return Ok(step);
    }

    let mut lo = 0.0;
    let mut hi = num[0].max(num[1]) * (2.0 / p_tot).sqrt();
    if power(amps_at(hi)) > p_tot {
        return Err(Error::Numerical {
            routine: "pav_step_total",
            detail: format!(
                "bracket [0, {hi}] does not contain the multiplier: c = {c:?}, d = {d:?}, P_tot = {p_tot}"
            ),
        });
    }
    // Run the bracket down to machine resolution so the step is the exact
    // constrained minimizer; the tolerance is only a failure threshold.
    let mut iterations = 0;
    while iterations < BISECTION_MAX_ITERS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if power(amps_at(mid)) > p_tot {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let slack = p_tot - power(amps_at(hi));
    if slack > BISECTION_REL_TOL * p_tot {
        return Err(Error::Numerical {
            routine: "pav_step_total",
            detail: format!("bisection stalled with residual {slack} after {iterations} steps"),
        });
    }
    step.amplitudes = amps_at(hi);
    step.multipliers = [hi, hi];
    step.clamped = [true, true];
    step.bisection = Some(Bisection {
        mu: hi,
        residual: p_tot - power(step.amplitudes),
        iterations,
    });
    Ok(step)
}

/// Parameters of the alternating optimization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptParams {
    #[serde(default)]
    pub mode: PowerMode,
    /// Stop once `|α_k^{(j+1)} − α_k^{(j)}|² ≤ delta` for both users.
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

fn default_max_iters() -> usize {
    DEFAULT_MAX_ITERS
}

impl Default for AdaptParams {
    fn default() -> Self {
        AdaptParams {
            mode: PowerMode::PerUser,
            delta: DEFAULT_DELTA,
            max_iters: DEFAULT_MAX_ITERS,
        }
    }
}

impl AdaptParams {
    pub fn with_mode(mode: PowerMode) -> Self {
        AdaptParams { mode, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::config(format!("delta must be positive, got {}", self.delta)));
        }
        if self.max_iters == 0 {
            return Err(Error::config("max_iters must be at least 1"));
        }
        Ok(())
    }
}

/// One pass of the alternating optimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationTrace {
    pub ecv: Ecv,
    pub beta: Complex64,
    /// Quantization noise after the equation step, at the old powers.
    pub quantization_before: f64,
    /// Quantization noise after the power step.
    pub quantization_after: f64,
    /// `|β|² + quantization noise` after the equation step (`= aᴴHa`).
    pub noise_before: f64,
    /// `|β|² + quantization noise` after the power step.
    pub noise_after: f64,
    pub step: PavStep,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptResult {
    pub pav: Pav,
    pub decision: RelayDecision,
    /// Quantization noise of the final decision at the final powers.
    pub eps: f64,
    /// Power updates performed.
    pub iterations: usize,
    pub converged: bool,
    /// The search hit a unit-vector equation, so both users stay at full power.
    pub unit_vector_exit: bool,
    pub trace: Vec<IterationTrace>,
}

/// Runs the alternating equation/power optimization at one relay.
///
/// Starts from full power. A unit-vector equation at any stage ends the
/// search with both users at full power and the fallback decision.
pub fn adapt(
    h: [Complex64; 2],
    caps: [f64; 2],
    lattice: EcvLattice,
    params: &AdaptParams,
) -> Result<AdaptResult> {
    adapt_inner(h, caps, lattice, params, false)
}

/// [`adapt`] that also records every iteration.
pub fn adapt_traced(
    h: [Complex64; 2],
    caps: [f64; 2],
    lattice: EcvLattice,
    params: &AdaptParams,
) -> Result<AdaptResult> {
    adapt_inner(h, caps, lattice, params, true)
}

fn adapt_inner(
    h: [Complex64; 2],
    caps: [f64; 2],
    lattice: EcvLattice,
    params: &AdaptParams,
    record: bool,
) -> Result<AdaptResult> {
    params.validate()?;
    let full = caps.map(f64::sqrt);
    let full_power = |trace: Vec<IterationTrace>, iterations: usize, converged: bool| {
        let decision = cmf::relay_rate(full, h, lattice);
        AdaptResult {
            pav: Pav::max_power(caps, params.mode),
            eps: quantization_noise(full, decision.beta, h, &decision.raw_ecv),
            decision,
            iterations,
            converged,
            unit_vector_exit: true,
            trace,
        }
    };

    let mut amps = full;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < params.max_iters {
        let ch = cmf::effective_channel(amps, h, lattice);
        let choice = cmf::best_ecv(&ch);
        if choice.ecv.has_zero_component() {
            return Ok(full_power(trace, iterations, true));
        }
        let beta = cmf::scaling_factor(&ch, &choice.ecv);
        let step = match params.mode {
            PowerMode::PerUser => pav_step_per_user(&choice.ecv, beta, h, caps),
            PowerMode::Total => pav_step_total(&choice.ecv, beta, h, caps[0] + caps[1])?,
        };
        let next = step.amplitudes;
        if record {
            let q_before = quantization_noise(amps, beta, h, &choice.ecv);
            let q_after = quantization_noise(next, beta, h, &choice.ecv);
            trace.push(IterationTrace {
                ecv: choice.ecv,
                beta,
                quantization_before: q_before,
                quantization_after: q_after,
                noise_before: beta.norm_sqr() + q_before,
                noise_after: beta.norm_sqr() + q_after,
                step,
            });
        }
        iterations += 1;
        let settled = (0..2).all(|k| (next[k] - amps[k]).powi(2) <= params.delta);
        amps = next;
        if settled {
            converged = true;
            break;
        }
    }

    let decision = cmf::relay_rate(amps, h, lattice);
    if decision.is_fallback() {
        return Ok(full_power(trace, iterations, converged));
    }
    Ok(AdaptResult {
        pav: Pav::from_amplitudes(amps, params.mode, caps),
        eps: quantization_noise(amps, decision.beta, h, &decision.raw_ecv),
        decision,
        iterations,
        converged,
        unit_vector_exit: false,
        trace,
    })
}
