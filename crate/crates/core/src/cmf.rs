//! Per-relay compute-and-forward arithmetic.
//!
//! A relay that sees `y = g₁x₁ + g₂x₂ + z` (with `g_k = α_k h_k` and unit
//! noise) decodes the integer combination `a₁x₁ + a₂x₂` whose effective noise
//! `aᴴHa`, with `H = I − ggᴴ/(1 + ‖g‖²)`, is smallest. Everything here is
//! written over `Complex64` so that real Rayleigh links (zero imaginary part,
//! integer ECVs) and complex Gaussian links (Gaussian-integer ECVs) share one
//! code path.

use std::fmt;

use num_complex::{Complex, Complex64};
use serde::{Deserialize, Serialize};

/// Two candidates whose quadratic values differ by at most this much are tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Coefficient ring the equation search runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EcvLattice {
    /// `a ∈ ℤ²`.
    #[default]
    Integer,
    /// `a ∈ ℤ[i]²`.
    GaussianInteger,
}

/// Equation coefficient vector `a = [a₁, a₂]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ecv([Complex<i64>; 2]);

const fn gi(re: i64) -> Complex<i64> {
    Complex::new(re, 0)
}

impl Ecv {
    pub const E1: Ecv = Ecv([gi(1), gi(0)]);
    pub const E2: Ecv = Ecv([gi(0), gi(1)]);
    /// The all-ones equation `x₁ + x₂`.
    pub const ONES: Ecv = Ecv([gi(1), gi(1)]);

    pub const fn new(a1: i64, a2: i64) -> Self {
        Ecv([gi(a1), gi(a2)])
    }

    pub const fn gaussian(a1: Complex<i64>, a2: Complex<i64>) -> Self {
        Ecv([a1, a2])
    }

    pub fn components(&self) -> [Complex<i64>; 2] {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.re == 0 && c.im == 0)
    }

    pub fn has_zero_component(&self) -> bool {
        self.0.iter().any(|c| c.re == 0 && c.im == 0)
    }

    pub fn is_real(&self) -> bool {
        self.0.iter().all(|c| c.im == 0)
    }

    pub fn norm_sqr(&self) -> i64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Real parts, for integer-lattice ECVs.
    pub fn real_parts(&self) -> [i64; 2] {
        [self.0[0].re, self.0[1].re]
    }

    pub fn to_complex(&self) -> [Complex64; 2] {
        self.0.map(|c| Complex64::new(c.re as f64, c.im as f64))
    }

    /// Representative of `{u·a : u a unit}` whose first nonzero entry has a
    /// positive real part and nonnegative imaginary part. For real vectors
    /// this is the sign normalization `a ~ −a`.
    pub fn canonical(self) -> Self {
        let Some(lead) = self.0.iter().copied().find(|c| c.re != 0 || c.im != 0) else {
            return self;
        };
        let mut rotated = self;
        let mut l = lead;
        while !(l.re > 0 && l.im >= 0) {
            // multiply by i
            l = Complex::new(-l.im, l.re);
            rotated = Ecv(rotated.0.map(|c| Complex::new(-c.im, c.re)));
        }
        rotated
    }

    /// Ordering key among tied minimizers: all-nonzero first, then shortest,
    /// then lexicographic.
    fn tie_key(&self) -> (bool, i64, [i64; 4]) {
        let [a, b] = self.0;
        (
            self.has_zero_component(),
            self.norm_sqr(),
            [a.re, a.im, b.re, b.im],
        )
    }
}

impl fmt::Display for Ecv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_real() {
            write!(f, "[{}, {}]", self.0[0].re, self.0[1].re)
        } else {
            write!(f, "[{}, {}]", self.0[0], self.0[1])
        }
    }
}

/// Amplitude-weighted channel `g = [α₁h₁, α₂h₂]` seen by one relay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveChannel {
    g: [Complex64; 2],
    norm_sqr: f64,
    lattice: EcvLattice,
}

impl EffectiveChannel {
    pub fn new(g: [Complex64; 2], lattice: EcvLattice) -> Self {
        EffectiveChannel {
            g,
            norm_sqr: g[0].norm_sqr() + g[1].norm_sqr(),
            lattice,
        }
    }

    /// Real channel with integer ECVs.
    pub fn real(g1: f64, g2: f64) -> Self {
        Self::new(
            [Complex64::new(g1, 0.0), Complex64::new(g2, 0.0)],
            EcvLattice::Integer,
        )
    }

    pub fn coefficients(&self) -> [Complex64; 2] {
        self.g
    }

    /// `[|g₁|², |g₂|²]`.
    pub fn gains(&self) -> [f64; 2] {
        [self.g[0].norm_sqr(), self.g[1].norm_sqr()]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.norm_sqr
    }

    pub fn lattice(&self) -> EcvLattice {
        self.lattice
    }

    pub fn gram(&self) -> GramMatrix {
        GramMatrix::new(self)
    }
}

/// `g_j = α_j h_j`.
pub fn effective_channel(
    amplitudes: [f64; 2],
    h: [Complex64; 2],
    lattice: EcvLattice,
) -> EffectiveChannel {
    EffectiveChannel::new([h[0] * amplitudes[0], h[1] * amplitudes[1]], lattice)
}

/// `H = I − ggᴴ/(1 + ‖g‖²)`, Hermitian positive definite with determinant
/// `1/(1 + ‖g‖²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GramMatrix {
    pub m: [[Complex64; 2]; 2],
}

impl GramMatrix {
    pub fn new(ch: &EffectiveChannel) -> Self {
        let s = 1.0 + ch.norm_sqr;
        let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, e) in row.iter_mut().enumerate() {
                let id = if r == c { 1.0 } else { 0.0 };
                *e = Complex64::new(id, 0.0) - ch.g[r] * ch.g[c].conj() / s;
            }
        }
        GramMatrix { m }
    }

    /// `aᴴHa`.
    pub fn quadratic_form(&self, a: &Ecv) -> f64 {
        let a = a.to_complex();
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..2 {
            for c in 0..2 {
                acc += a[r].conj() * self.m[r][c] * a[c];
            }
        }
        acc.re
    }

    pub fn determinant(&self) -> f64 {
        (self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]).re
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (self.m[0][1] - self.m[1][0].conj()).norm() <= tol
            && self.m[0][0].im.abs() <= tol
            && self.m[1][1].im.abs() <= tol
    }
}

/// Effective noise `aᴴHa`, evaluated as `(‖a‖² + |g₁a₂ − g₂a₁|²)/(1 + ‖g‖²)`
/// which avoids the cancellation of the `‖a‖² − |gᴴa|²/(1+‖g‖²)` form.
pub fn effective_noise(ch: &EffectiveChannel, a: &Ecv) -> f64 {
    let [a1, a2] = a.to_complex();
    let cross = ch.g[0] * a2 - ch.g[1] * a1;
    (a.norm_sqr() as f64 + cross.norm_sqr()) / (1.0 + ch.norm_sqr)
}

/// MMSE scaling `β = gᴴa/(1 + ‖g‖²)`.
pub fn scaling_factor(ch: &EffectiveChannel, a: &Ecv) -> Complex64 {
    let a = a.to_complex();
    (ch.g[0].conj() * a[0] + ch.g[1].conj() * a[1]) / (1.0 + ch.norm_sqr)
}

/// `|β|² + ‖βg − a‖²`: self-noise plus quantization noise after scaling.
/// Equals [`effective_noise`] when `β` is the MMSE factor.
pub fn residual_noise(ch: &EffectiveChannel, a: &Ecv, beta: Complex64) -> f64 {
    let a = a.to_complex();
    let mismatch: f64 = (0..2).map(|k| (beta * ch.g[k] - a[k]).norm_sqr()).sum();
    beta.norm_sqr() + mismatch
}

pub(crate) fn log2_plus(x: f64) -> f64 {
    x.log2().max(0.0)
}

/// Computation rate in bits, `log₂⁺(1/aᴴHa)`.
pub fn computation_rate(ch: &EffectiveChannel, a: &Ecv) -> f64 {
    log2_plus(1.0 / effective_noise(ch, a))
}

/// Minimizer of `aᴴHa` together with its value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EcvChoice {
    pub ecv: Ecv,
    pub noise: f64,
}

struct Candidates {
    best: f64,
    items: Vec<(f64, Ecv)>,
}

impl Candidates {
    fn new() -> Self {
        Candidates {
            best: f64::INFINITY,
            items: Vec::with_capacity(4),
        }
    }

    fn offer(&mut self, ch: &EffectiveChannel, a: Ecv) {
        let a = a.canonical();
        let v = effective_noise(ch, &a);
        if v > self.best + TIE_TOLERANCE {
            return;
        }
        if v < self.best {
            self.best = v;
            let cut = v + TIE_TOLERANCE;
            self.items.retain(|(x, _)| *x <= cut);
        }
        self.items.push((v, a));
    }

    fn finish(self) -> EcvChoice {
        let cut = self.best + TIE_TOLERANCE;
        let (noise, ecv) = self
            .items
            .into_iter()
            .filter(|(v, _)| *v <= cut)
            .min_by_key(|(_, a)| a.tie_key())
            .expect("unit vectors are always offered");
        EcvChoice { ecv, noise }
    }
}

/// Exact minimizer of `aᴴHa` over nonzero lattice vectors, with the
/// documented tie-break.
///
/// Fixing the entry `a_p` on the weaker coordinate, the objective is an
/// isotropic convex quadratic in `a_q` centred at `conj(g_p)g_q a_p/(1+|g_p|²)`,
/// so only the lattice points around that centre can win the row, and the
/// row's value is at least `|a_p|²/(1+|g_p|²)`. Rows are scanned until that
/// bound exceeds the incumbent. Agrees with [`best_ecv_ball`] exactly.
pub fn best_ecv(ch: &EffectiveChannel) -> EcvChoice {
    let mut cands = Candidates::new();
    cands.offer(ch, Ecv::E1);
    cands.offer(ch, Ecv::E2);

    let (p, q) = if ch.g[0].norm_sqr() <= ch.g[1].norm_sqr() {
        (0, 1)
    } else {
        (1, 0)
    };
    let kp = 1.0 + ch.g[p].norm_sqr();
    let coupling = ch.g[p].conj() * ch.g[q] / kp;
    let place = |ap: Complex<i64>, aq: Complex<i64>| {
        let mut c = [Complex::new(0, 0); 2];
        c[p] = ap;
        c[q] = aq;
        Ecv(c)
    };

    match ch.lattice {
        EcvLattice::Integer => {
            let mut ap = 1i64;
            while ((ap * ap) as f64) <= (cands.best + TIE_TOLERANCE) * kp {
                let centre = (coupling * ap as f64).re;
                let lo = centre.floor() as i64;
                cands.offer(ch, place(gi(ap), gi(lo)));
                cands.offer(ch, place(gi(ap), gi(lo + 1)));
                ap += 1;
            }
        }
        EcvLattice::GaussianInteger => {
            let mut re = 1i64;
            while ((re * re) as f64) <= (cands.best + TIE_TOLERANCE) * kp {
                let mut im = 0i64;
                while ((re * re + im * im) as f64) <= (cands.best + TIE_TOLERANCE) * kp {
                    let centre = coupling * Complex64::new(re as f64, im as f64);
                    let (lr, li) = (centre.re.floor() as i64, centre.im.floor() as i64);
                    for dr in 0..2 {
                        for di in 0..2 {
                            cands.offer(
                                ch,
                                place(Complex::new(re, im), Complex::new(lr + dr, li + di)),
                            );
                        }
                    }
                    im += 1;
                }
                re += 1;
            }
        }
    }
    cands.finish()
}

/// Reference search: every lattice vector in the ball `‖a‖² ≤ 1 + ‖g‖²`.
///
/// Any minimizer lies in that ball because `aᴴHa ≥ ‖a‖²/(1+‖g‖²)` while
/// `e₁ᴴHe₁ ≤ 1`. Cost grows like `‖g‖²` (real) or `‖g‖⁴` (complex).
pub fn best_ecv_ball(ch: &EffectiveChannel) -> EcvChoice {
    let r2 = 1.0 + ch.norm_sqr;
    let r = r2.sqrt().floor() as i64;
    let mut cands = Candidates::new();
    let inside = |n: i64| (n as f64) <= r2;
    match ch.lattice {
        EcvLattice::Integer => {
            for a1 in -r..=r {
                for a2 in -r..=r {
                    if (a1, a2) != (0, 0) && inside(a1 * a1 + a2 * a2) {
                        cands.offer(ch, Ecv::new(a1, a2));
                    }
                }
            }
        }
        EcvLattice::GaussianInteger => {
            for r1 in -r..=r {
                for i1 in -r..=r {
                    let n1 = r1 * r1 + i1 * i1;
                    if !inside(n1) {
                        continue;
                    }
                    for r2_ in -r..=r {
                        for i2 in -r..=r {
                            let n = n1 + r2_ * r2_ + i2 * i2;
                            if n != 0 && inside(n) {
                                cands.offer(
                                    ch,
                                    Ecv::gaussian(Complex::new(r1, i1), Complex::new(r2_, i2)),
                                );
                            }
                        }
                    }
                }
            }
        }
    }
    cands.finish()
}

/// Rates of the two-stage `x₁ + x₂` construction used when the best
/// equation is a unit vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FallbackRates {
    /// Rate of decoding the stronger message with the weaker as noise.
    pub first: f64,
    /// Rate of decoding the weaker message after cancelling the stronger.
    pub second: f64,
    /// `min(first, second)`.
    pub rate: f64,
}

pub fn unit_vector_fallback_rate(ch: &EffectiveChannel) -> FallbackRates {
    let [s1, s2] = ch.gains();
    let (hi, lo) = (s1.max(s2), s1.min(s2));
    let first = (1.0 + hi / (1.0 + lo)).log2();
    let second = (1.0 + lo).log2();
    FallbackRates {
        first,
        second,
        rate: first.min(second),
    }
}

/// Outcome of the equation search at one relay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayDecision {
    /// Equation forwarded to the users; `[1, 1]` on the fallback path.
    pub ecv: Ecv,
    /// Minimizer returned by the search itself.
    pub raw_ecv: Ecv,
    /// Scaling factor for `raw_ecv`.
    pub beta: Complex64,
    /// `aᴴHa` of `raw_ecv`.
    pub noise: f64,
    /// Computation rate in bits.
    pub rate: f64,
    /// Present when `raw_ecv` was a unit vector.
    pub fallback: Option<FallbackRates>,
}

impl RelayDecision {
    pub fn is_fallback(&self) -> bool {
        self.fallback.is_some()
    }
}

/// Equation choice and computation rate for an effective channel.
pub fn decide(ch: &EffectiveChannel) -> RelayDecision {
    let choice = best_ecv(ch);
    let beta = scaling_factor(ch, &choice.ecv);
    if choice.ecv.has_zero_component() {
        let fb = unit_vector_fallback_rate(ch);
        RelayDecision {
            ecv: Ecv::ONES,
            raw_ecv: choice.ecv,
            beta,
            noise: choice.noise,
            rate: fb.rate,
            fallback: Some(fb),
        }
    } else {
        RelayDecision {
            ecv: choice.ecv,
            raw_ecv: choice.ecv,
            beta,
            noise: choice.noise,
            rate: log2_plus(1.0 / choice.noise),
            fallback: None,
        }
    }
}

/// [`decide`] on `g = α∘h`.
pub fn relay_rate(amplitudes: [f64; 2], h: [Complex64; 2], lattice: EcvLattice) -> RelayDecision {
    decide(&effective_channel(amplitudes, h, lattice))
}

/// `log₂(1 + min(|α₁h₁|², |α₂h₂|²))`, an upper bound on [`relay_rate`].
pub fn rate_upper_bound(amplitudes: [f64; 2], h: [Complex64; 2]) -> f64 {
    let s1 = (h[0] * amplitudes[0]).norm_sqr();
    let s2 = (h[1] * amplitudes[1]).norm_sqr();
    (1.0 + s1.min(s2)).log2()
}
