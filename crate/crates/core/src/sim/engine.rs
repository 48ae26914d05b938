use rayon::prelude::*;

use super::output::{Curve, CurvePoint, RunOutput};
use super::{Experiment, Metric, OutageEstimator, Tally};
use crate::analysis::{self, BoundInput};
use crate::error::Result;
use crate::fading::{sample_block, substream};
use crate::schemes::{self, Scheme, SchemeOutcome, SelectionRule, TrialContext};

/// Trials per batch; tallies are produced and merged per batch.
pub const BATCH_SIZE: u64 = 4096;

const CHANNEL_STREAM: u64 = 0;
const SYMBOL_STREAM: u64 = 1;

fn scheme_code(s: Scheme) -> u64 {
    Scheme::ALL.iter().position(|x| *x == s).unwrap_or(usize::MAX) as u64
}

fn record_rates(t: &mut Tally, out: &SchemeOutcome, ctx: &TrialContext) {
    t.trials += 1;
    t.outages += u64::from(out.outage);
    if t.relay_outages.len() < out.relays.len() {
        t.relay_outages.resize(out.relays.len(), 0);
    }
    let factor = if ctx.normalize_outage { out.slot_factor } else { 1.0 };
    for (i, r) in out.relays.iter().enumerate() {
        t.relay_outages[i] += u64::from(r.end_to_end() * factor < ctx.target_rate);
    }
    t.add_rate(out.sum_rate());
}

fn run_batch(exp: &Experiment, variant: usize, snr_db: f64, batch: u64) -> Result<Vec<Tally>> {
    let fading = &exp.variants[variant].fading;
    let ctx = exp.context(snr_db);
    let start = batch * BATCH_SIZE;
    let end = (start + BATCH_SIZE).min(exp.policy.max_trials);
    let mut tallies = vec![Tally::default(); exp.schemes.len()];
    for trial in start..end {
        let mut rng = substream(exp.seed, &[CHANNEL_STREAM, trial]);
        let draw = sample_block(fading, &mut rng)?;
        for (k, &scheme) in exp.schemes.iter().enumerate() {
            let t = &mut tallies[k];
            if exp.metric == Metric::Ser {
                let mut sym = substream(exp.seed, &[SYMBOL_STREAM, trial, scheme_code(scheme)]);
                let e = schemes::ser_trial(&draw, &ctx, scheme, exp.noise_var, &mut sym)?;
                t.trials += 1;
                t.errors += u64::from(e.errors);
                t.symbols += u64::from(e.symbols);
                continue;
            }
            let out = match scheme {
                Scheme::Acmf(mode) => {
                    let (out, adapted) = schemes::acmf_trial_detailed(&draw, &ctx, mode)?;
                    t.adaptations += adapted.len() as u64;
                    t.nonconverged += adapted.iter().filter(|a| !a.converged).count() as u64;
                    out
                }
                s => schemes::run_scheme(s, &draw, &ctx)?,
            };
            record_rates(t, &out, &ctx);
        }
    }
    Ok(tallies)
}

struct Point {
    variant: usize,
    snr: usize,
    tallies: Vec<Tally>,
    batches: u64,
    done: bool,
}

/// Whether system outage of this experiment may use the per-relay product.
fn uses_relay_product(exp: &Experiment) -> bool {
    exp.estimator == OutageEstimator::RelayProduct && exp.selection == SelectionRule::MinRate
}

/// Outage or error events collected by the slowest scheme.
fn min_events(exp: &Experiment, tallies: &[Tally]) -> u64 {
    tallies
        .iter()
        .map(|t| match exp.metric {
            Metric::Outage if uses_relay_product(exp) => t.relay_outages.iter().sum(),
            Metric::Outage => t.outages,
            Metric::Ser => t.errors,
            Metric::AvgSumRate => u64::MAX,
        })
        .min()
        .unwrap_or(0)
}

fn total_batches(exp: &Experiment) -> u64 {
    exp.policy.max_trials.div_ceil(BATCH_SIZE)
}

/// Batches for the next round; a pure function of the point's tallies, so
/// the schedule is independent of thread count.
fn next_round(exp: &Experiment, p: &Point) -> u64 {
    let limit = total_batches(exp) - p.batches;
    if p.batches == 0 {
        return exp.policy.min_trials.div_ceil(BATCH_SIZE).min(limit);
    }
    let cap = (2 * p.batches).max(16);
    let have = min_events(exp, &p.tallies);
    let want = if have == 0 {
        cap
    } else {
        let per_batch = have as f64 / p.batches as f64;
        let missing = exp.policy.min_events.saturating_sub(have) as f64;
        ((1.2 * missing / per_batch).ceil() as u64).clamp(1, cap)
    };
    want.min(limit)
}

fn finished(exp: &Experiment, p: &Point) -> bool {
    let trials = p.tallies.first().map_or(0, |t| t.trials);
    if p.batches >= total_batches(exp) {
        return true;
    }
    trials >= exp.policy.min_trials && min_events(exp, &p.tallies) >= exp.policy.min_events
}

/// Tallies of every scheme at one grid point.
pub fn run_point(exp: &Experiment, variant: usize, snr_db: f64) -> Result<Vec<Tally>> {
    let mut single = exp.clone();
    single.snr_db = vec![snr_db];
    let mut points = vec![new_point(&single, variant, 0)];
    drive(&single, &mut points)?;
    Ok(points.pop().map(|p| p.tallies).unwrap_or_default())
}

fn new_point(exp: &Experiment, variant: usize, snr: usize) -> Point {
    Point {
        variant,
        snr,
        tallies: vec![Tally::default(); exp.schemes.len()],
        batches: 0,
        done: false,
    }
}

fn drive(exp: &Experiment, points: &mut [Point]) -> Result<()> {
    loop {
        let jobs: Vec<(usize, u64)> = points
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.done)
            .flat_map(|(i, p)| {
                let n = next_round(exp, p);
                (p.batches..p.batches + n).map(move |b| (i, b))
            })
            .collect();
        if jobs.is_empty() {
            return Ok(());
        }
        let results: Vec<Vec<Tally>> = jobs
            .par_iter()
            .map(|&(i, b)| run_batch(exp, points[i].variant, exp.snr_db[points[i].snr], b))
            .collect::<Result<_>>()?;
        for (&(i, _), tallies) in jobs.iter().zip(&results) {
            let p = &mut points[i];
            for (acc, t) in p.tallies.iter_mut().zip(tallies) {
                acc.merge(t);
            }
            p.batches += 1;
        }
        for p in points.iter_mut().filter(|p| !p.done) {
            p.done = finished(exp, p);
        }
    }
}

/// Runs every variant, scheme and grid point of an experiment.
pub fn run(exp: &Experiment) -> Result<RunOutput> {
    exp.validate()?;
    let mut points: Vec<Point> = (0..exp.variants.len())
        .flat_map(|v| (0..exp.snr_db.len()).map(move |s| (v, s)))
        .map(|(v, s)| new_point(exp, v, s))
        .collect();
    drive(exp, &mut points)?;

    let mut curves = Vec::new();
    for (vi, variant) in exp.variants.iter().enumerate() {
        let mine: Vec<&Point> = points.iter().filter(|p| p.variant == vi).collect();
        let pooled = variant.fading.is_homogeneous();
        for (k, scheme) in exp.schemes.iter().enumerate() {
            let series = exp.series(scheme.name(), variant);
            let pts = mine
                .iter()
                .map(|p| {
                    let t = &p.tallies[k];
                    let (value, stderr) = match exp.metric {
                        Metric::Outage if uses_relay_product(exp) => t.relay_product_outage(pooled),
                        Metric::Outage => t.direct_outage(),
                        Metric::AvgSumRate => t.mean_rate(),
                        Metric::Ser => t.ser(),
                    };
                    CurvePoint {
                        snr_db: exp.snr_db[p.snr],
                        value,
                        stderr,
                        n_trials: t.trials,
                    }
                })
                .collect();
            curves.push(Curve {
                series: series.clone(),
                metric: exp.metric.name().to_string(),
                points: pts,
            });
            if matches!(scheme, Scheme::Acmf(_)) && exp.metric != Metric::Ser {
                let pts = mine
                    .iter()
                    .map(|p| {
                        let t = &p.tallies[k];
                        let n = t.adaptations.max(1) as f64;
                        let frac = t.nonconverged as f64 / n;
                        CurvePoint {
                            snr_db: exp.snr_db[p.snr],
                            value: frac,
                            stderr: (frac * (1.0 - frac) / n).sqrt(),
                            n_trials: t.trials,
                        }
                    })
                    .collect();
                curves.push(Curve {
                    series,
                    metric: "nonconverged".to_string(),
                    points: pts,
                });
            }
        }
        if let Some(c) = overlay(exp, vi)? {
            curves.push(c);
        }
    }
    Ok(RunOutput {
        experiment: exp.clone(),
        curves,
    })
}

/// Closed-form bound matching the experiment's metric, if there is one.
fn overlay(exp: &Experiment, variant: usize) -> Result<Option<Curve>> {
    let v = &exp.variants[variant];
    let metric = match exp.metric {
        Metric::Outage => "outage_lower_bound",
        Metric::AvgSumRate => "sum_rate_upper_bound",
        Metric::Ser => return Ok(None),
    };
    let points = exp
        .snr_db
        .iter()
        .map(|&snr| {
            let p = exp.powers(snr);
            let input = BoundInput {
                target_rate: exp.target_rate,
                powers: [p.p1, p.p2],
                variances: v.fading.variances.clone(),
            };
            let value = match exp.metric {
                Metric::Outage => analysis::outage_lower_bound(&input)?,
                _ => analysis::sum_rate_upper_bound(&input)?,
            };
            Ok(CurvePoint {
                snr_db: snr,
                value,
                stderr: 0.0,
                n_trials: 0,
            })
        })
        .collect::<Result<_>>()?;
    Ok(Some(Curve {
        series: exp.series("bound", v),
        metric: metric.to_string(),
        points,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fading::{ChannelModel, FadingConfig};
    use crate::sim::{TrialPolicy, Variant};

    fn small(metric: Metric, trials: u64) -> Experiment {
        Experiment {
            id: "t".into(),
            metric,
            snr_db: vec![5.0, 15.0],
            schemes: vec![Scheme::Mcmf, Scheme::Df2],
            variants: vec![Variant {
                label: "M=2".into(),
                fading: FadingConfig::uniform(2, 1.0, ChannelModel::RealRayleigh),
            }],
            target_rate: 1.0,
            seed: 5,
            selection: SelectionRule::MinRate,
            adapt: Default::default(),
            normalize_outage: true,
            policy: TrialPolicy::fixed(trials),
            estimator: OutageEstimator::Direct,
            relay_power_ratio: 1.0,
            noise_var: 1.0,
        }
    }

    #[test]
    fn batches_partition_the_trials() {
        let exp = small(Metric::Outage, 3 * BATCH_SIZE + 17);
        let parts: Vec<Vec<Tally>> = (0..4).map(|b| run_batch(&exp, 0, 5.0, b).unwrap()).collect();
        assert_eq!(parts[3][0].trials, 17);
        let whole = super::super::aggregate(parts.iter().map(|p| &p[0]));
        let again = super::super::aggregate(parts.iter().rev().map(|p| &p[0]));
        assert_eq!(whole, again);
        let point = run_point(&exp, 0, 5.0).unwrap();
        assert_eq!(point[0], whole);
    }

    #[test]
    fn adaptive_policy_stops_on_events() {
        let mut exp = small(Metric::Outage, 0);
        exp.policy = TrialPolicy {
            min_trials: 1000,
            max_trials: 10_000_000,
            min_events: 50,
        };
        let t = run_point(&exp, 0, 5.0).unwrap();
        assert_eq!(t[0].trials, BATCH_SIZE);
        let t = run_point(&exp, 0, 25.0).unwrap();
        assert!(t.iter().all(|x| x.outages >= 50), "{t:?}");
        assert_eq!(t[0].trials % BATCH_SIZE, 0);
    }

    #[test]
    fn relay_product_agrees_with_direct() {
        let mut exp = small(Metric::Outage, 40_000);
        let direct = run(&exp).unwrap();
        exp.estimator = OutageEstimator::RelayProduct;
        let product = run(&exp).unwrap();
        for (a, b) in direct.curves.iter().zip(&product.curves) {
            for (p, q) in a.points.iter().zip(&b.points) {
                let tol = 4.0 * (p.stderr.powi(2) + q.stderr.powi(2)).sqrt() + 1e-12;
                assert!((p.value - q.value).abs() <= tol, "{} {p:?} vs {q:?}", a.series);
            }
        }
    }
}
