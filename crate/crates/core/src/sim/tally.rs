//! Mergeable per-scheme counters.
//!
//! Rates are accumulated in fixed point so that merging is exactly
//! associative and commutative; the result never depends on how trials were
//! split across workers.

/// Rates are stored in units of `2^-32` bit.
const SCALE: f64 = 4_294_967_296.0;

pub fn to_fixed(x: f64) -> i128 {
    (x * SCALE).round() as i128
}

pub fn from_fixed(x: i128) -> f64 {
    x as f64 / SCALE
}

/// Counts and sums of one scheme at one grid point.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Tally {
    pub trials: u64,
    /// Trials in which the selected relay was in outage.
    pub outages: u64,
    /// Per-relay outage counts.
    pub relay_outages: Vec<u64>,
    /// Sum of sum rates, fixed point.
    pub rate_sum: i128,
    /// Sum of squared sum rates, fixed point of the square.
    pub rate_sq: i128,
    pub errors: u64,
    pub symbols: u64,
    /// Relay adaptations that hit the iteration cap.
    pub nonconverged: u64,
    pub adaptations: u64,
}

impl Tally {
    pub fn merge(&mut self, other: &Tally) {
        self.trials += other.trials;
        self.outages += other.outages;
        if self.relay_outages.len() < other.relay_outages.len() {
            self.relay_outages.resize(other.relay_outages.len(), 0);
        }
        for (a, b) in self.relay_outages.iter_mut().zip(&other.relay_outages) {
            *a += b;
        }
        self.rate_sum += other.rate_sum;
        self.rate_sq += other.rate_sq;
        self.errors += other.errors;
        self.symbols += other.symbols;
        self.nonconverged += other.nonconverged;
        self.adaptations += other.adaptations;
    }

    pub fn add_rate(&mut self, sum_rate: f64) {
        self.rate_sum += to_fixed(sum_rate);
        self.rate_sq += to_fixed(sum_rate * sum_rate);
    }

    /// Sample mean and its standard error.
    pub fn mean_rate(&self) -> (f64, f64) {
        if self.trials == 0 {
            return (f64::NAN, f64::NAN);
        }
        let n = self.trials as f64;
        let mean = from_fixed(self.rate_sum) / n;
        if self.trials < 2 {
            return (mean, f64::NAN);
        }
        let var = ((from_fixed(self.rate_sq) - n * mean * mean) / (n - 1.0)).max(0.0);
        (mean, (var / n).sqrt())
    }

    /// `√(p(1−p)/N)` binomial estimate.
    pub fn direct_outage(&self) -> (f64, f64) {
        binomial(self.outages, self.trials)
    }

    /// Product of per-relay outage fractions with a delta-method error;
    /// `pooled` treats all relays as identically distributed.
    pub fn relay_product_outage(&self, pooled: bool) -> (f64, f64) {
        let m = self.relay_outages.len();
        if self.trials == 0 || m == 0 {
            return (f64::NAN, f64::NAN);
        }
        if pooled {
            let total: u64 = self.relay_outages.iter().sum();
            let (p, _) = binomial(total, self.trials * m as u64);
            let n = (self.trials * m as u64) as f64;
            let value = p.powi(m as i32);
            let se = m as f64 * p.powi(m as i32 - 1) * (p * (1.0 - p) / n).sqrt();
            return (value, se);
        }
        let n = self.trials as f64;
        let ps: Vec<f64> = self.relay_outages.iter().map(|&k| k as f64 / n).collect();
        let value: f64 = ps.iter().product();
        if value == 0.0 {
            return (0.0, 0.0);
        }
        let rel: f64 = ps.iter().map(|p| (1.0 - p) / (p * n)).sum();
        (value, value * rel.sqrt())
    }

    pub fn ser(&self) -> (f64, f64) {
        binomial(self.errors, self.symbols)
    }
}

fn binomial(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let p = k as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

/// Merges fragments in the order given; any order gives the same result.
pub fn aggregate<'a>(parts: impl IntoIterator<Item = &'a Tally>) -> Tally {
    let mut out = Tally::default();
    for p in parts {
        out.merge(p);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tally(trials: u64, outs: u64, rates: &[f64]) -> Tally {
        let mut t = Tally {
            trials,
            outages: outs,
            relay_outages: vec![outs, outs / 2],
            ..Tally::default()
        };
        for &r in rates {
            t.add_rate(r);
        }
        t
    }

    #[test]
    fn empty_is_identity() {
        let a = tally(10, 3, &[1.5, 2.25]);
        let mut b = a.clone();
        b.merge(&Tally::default());
        assert_eq!(a, b);
        assert_eq!(aggregate([&Tally::default(), &a]), a);
    }

    #[test]
    fn binomial_and_product_estimates() {
        let t = Tally {
            trials: 100,
            outages: 4,
            relay_outages: vec![20, 20],
            ..Tally::default()
        };
        let (p, se) = t.direct_outage();
        assert_eq!(p, 0.04);
        assert!((se - (0.04f64 * 0.96 / 100.0).sqrt()).abs() < 1e-15);
        let (p, _) = t.relay_product_outage(true);
        assert!((p - 0.04).abs() < 1e-15);
        let (p, _) = t.relay_product_outage(false);
        assert!((p - 0.04).abs() < 1e-15);
    }

    #[test]
    fn mean_rate_matches_float_mean() {
        let mut t = Tally {
            trials: 4,
            ..Tally::default()
        };
        for r in [1.0, 2.0, 3.0, 4.0] {
            t.add_rate(r);
        }
        let (m, se) = t.mean_rate();
        assert_eq!(m, 2.5);
        assert!((se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn merge_commutes_and_associates(
            a in proptest::collection::vec(0.0f64..40.0, 0..20),
            b in proptest::collection::vec(0.0f64..40.0, 0..20),
            c in proptest::collection::vec(0.0f64..40.0, 0..20),
        ) {
            let (ta, tb, tc) = (
                tally(a.len() as u64, 1, &a),
                tally(b.len() as u64, 2, &b),
                tally(c.len() as u64, 3, &c),
            );
            let mut ab = ta.clone();
            ab.merge(&tb);
            let mut ba = tb.clone();
            ba.merge(&ta);
            prop_assert_eq!(&ab, &ba);
            let mut ab_c = ab.clone();
            ab_c.merge(&tc);
            let mut bc = tb.clone();
            bc.merge(&tc);
            let mut a_bc = ta.clone();
            a_bc.merge(&bc);
            prop_assert_eq!(ab_c, a_bc);
        }
    }
}
