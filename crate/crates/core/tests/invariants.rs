use cmf_relay::cmf::{self, Ecv, EcvLattice, EffectiveChannel};
use cmf_relay::fading::{self, ChannelModel, ChannelRealization, FadingConfig, PowerConfig};
use cmf_relay::oracle;
use cmf_relay::power::PowerMode;
use cmf_relay::schemes::{self, Scheme, TrialContext};
use cmf_relay::sim::{self, Experiment, TrialPolicy};
use cmf_relay::{verify, Error};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::RngCore;

const SEED: u64 = 99;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn noise_forms_agree(g1 in -30.0f64..30.0, g2 in -30.0f64..30.0, a1 in -6i64..=6, a2 in -6i64..=6) {
        prop_assume!(a1 != 0 || a2 != 0);
        let ch = EffectiveChannel::real(g1, g2);
        let a = Ecv::new(a1, a2);
        let j = cmf::effective_noise(&ch, &a);
        let r = cmf::residual_noise(&ch, &a, cmf::scaling_factor(&ch, &a));
        prop_assert!((j - r).abs() <= 1e-12 * j.max(1.0), "{j} vs {r}");
        prop_assert!((j - ch.gram().quadratic_form(&a)).abs() <= 1e-12 * j.max(1.0));
    }

    #[test]
    fn search_matches_box(g1 in -40.0f64..40.0, g2 in -40.0f64..40.0) {
        let g = [c(g1), c(g2)];
        let fast = cmf::best_ecv(&EffectiveChannel::new(g, EcvLattice::Integer));
        let (a, v) = oracle::brute_force_ecv(g, EcvLattice::Integer);
        prop_assert_eq!(fast.ecv, a);
        prop_assert!((fast.noise - v).abs() <= 1e-12 * v.max(1.0));
    }

    #[test]
    fn rates_are_nonnegative_and_bounded(
        h in proptest::collection::vec((0.0f64..3.0, 0.0f64..3.0), 1..4),
        snr in 0.0f64..40.0,
    ) {
        let links: Vec<[f64; 2]> = h.iter().map(|&(a, b)| [a, b]).collect();
        let d = ChannelRealization::from_real(&links);
        let ctx = TrialContext::new(PowerConfig::from_snr_db(snr), 1.0);
        for s in Scheme::ALL {
            let o = schemes::run_scheme(s, &d, &ctx).unwrap();
            prop_assert!(o.rate >= 0.0 && o.rate.is_finite(), "{s}: {}", o.rate);
            prop_assert!(o.outage == (o.first_hop() < 1.0) || s == Scheme::Df3 || s == Scheme::Af);
        }
    }

    #[test]
    fn a_dead_link_kills_every_scheme(g in 0.01f64..5.0, snr in 0.0f64..40.0, which in 0usize..2) {
        let mut link = [g, g];
        link[which] = 0.0;
        let d = ChannelRealization::from_real(&[link]);
        let ctx = TrialContext::new(PowerConfig::from_snr_db(snr), 1.0);
        for s in Scheme::ALL {
            prop_assert_eq!(schemes::run_scheme(s, &d, &ctx).unwrap().rate, 0.0);
        }
    }

    #[test]
    fn relay_rate_never_beats_bound(p1 in 0.0f64..40.0, p2 in 0.0f64..40.0, h1 in 0.0f64..4.0, h2 in 0.0f64..4.0) {
        let amps = [fading::db_to_linear(p1).sqrt(), fading::db_to_linear(p2).sqrt()];
        let h = [c(h1), c(h2)];
        let r = cmf::relay_rate(amps, h, EcvLattice::Integer).rate;
        prop_assert!(r <= cmf::rate_upper_bound(amps, h) + 1e-12);
    }
}

#[test]
fn substreams_are_reproducible() {
    let draw = |seed| {
        let mut r = fading::substream(seed, &[3, 14]);
        (0..8).map(|_| r.next_u64()).collect::<Vec<_>>()
    };
    assert_eq!(draw(5), draw(5));
    assert_ne!(draw(5), draw(6));
    let cfg = FadingConfig::uniform(3, 1.0, ChannelModel::ComplexGaussian);
    let a = fading::sample_block(&cfg, &mut fading::substream(5, &[0])).unwrap();
    let b = fading::sample_block(&cfg, &mut fading::substream(5, &[0])).unwrap();
    assert_eq!(a, b);
}

#[test]
fn squared_rayleigh_passes_ks() {
    let r = verify::rayleigh_ks(100_000, SEED);
    assert!(r.passed, "{r}");
}

#[test]
fn oracle_equivalence_on_random_draws() {
    let r = verify::ecv_oracle(100_000, SEED, ChannelModel::RealRayleigh, 40.0);
    assert!(r.passed, "{r}");
    let r = verify::ecv_oracle(1_000, SEED, ChannelModel::ComplexGaussian, 20.0);
    assert!(r.passed, "{r}");
}

#[test]
fn low_snr_rate_meets_bound() {
    let (r, _) = verify::low_snr_tightness(100_000, SEED);
    assert!(r.passed, "{r}");
}

#[test]
fn adaptation_kkt_feasibility_and_termination() {
    for mode in [PowerMode::PerUser, PowerMode::Total] {
        let stats = verify::adapt_stats(100_000, SEED, mode).unwrap();
        for r in verify::adapt_reports(&stats, mode) {
            assert!(r.passed, "{r}");
        }
    }
}

#[test]
fn adapted_rate_never_below_max_power() {
    let r = verify::acmf_dominates_mcmf(100_000, SEED).unwrap();
    assert!(r.passed, "{r}");
}

#[test]
fn total_power_rate_never_below_per_user() {
    let s = verify::paired_rates(100_000, SEED, 2, Scheme::Acmf(PowerMode::Total), Scheme::Acmf(PowerMode::PerUser))
        .unwrap();
    assert_eq!(
        s.violations, 0,
        "{} of {} draws with total-power rate below per-user, worst shortfall {:.3e}",
        s.violations, s.draws, s.worst
    );
}

#[test]
fn total_power_noise_never_above_per_user_on_same_equation() {
    let s = verify::relaxation_stats(100_000, SEED).unwrap();
    assert_eq!(
        s.eps_violations, 0,
        "{} of {} same-equation draws ({} total) with larger total-power quantization noise, worst {:.3e}",
        s.eps_violations, s.same_final_ecv, s.draws, s.worst_eps_excess
    );
}

#[test]
fn selection_rules_and_outage_flag_agree() {
    let r = verify::selection_and_outage(100_000, SEED);
    assert!(r.passed, "{r}");
}

#[test]
fn closed_forms_match_quadrature() {
    for r in [verify::i1_vs_quadrature(61).unwrap(), verify::sum_rate_vs_quadrature().unwrap(), verify::highsnr_ratio().unwrap()] {
        assert!(r.passed, "{r}");
    }
}

fn small(id: &str, grid: &str) -> Experiment {
    let mut e = sim::preset(id).unwrap();
    e.snr_db = sim::parse_grid(grid).unwrap();
    e.seed = SEED;
    e.policy = TrialPolicy {
        min_trials: 20_000,
        max_trials: 200_000,
        min_events: 100,
    };
    e
}

#[test]
fn simulated_outage_respects_bound_and_decreases() {
    let out = sim::run(&small("fig2", "0:5:30")).unwrap();
    for m in 1..=3 {
        let bound = out.curve(&format!("bound@M={m}"), "outage_lower_bound").unwrap();
        for s in ["mcmf", "acmf"] {
            let c = out.curve(&format!("{s}@M={m}"), "outage").unwrap();
            for (p, b) in c.points.iter().zip(&bound.points) {
                assert!(p.value >= b.value - 3.0 * p.stderr, "{s} M={m} at {} dB", p.snr_db);
            }
            for w in c.points.windows(2) {
                let slack = 3.0 * w[0].stderr.hypot(w[1].stderr);
                assert!(w[1].value <= w[0].value + slack, "{s} M={m} rises at {} dB", w[1].snr_db);
            }
        }
    }
}

#[test]
fn simulated_sum_rate_respects_bound() {
    let out = sim::run(&small("fig3", "0:5:30")).unwrap();
    for m in 1..=2 {
        let bound = out.curve(&format!("bound@M={m}"), "sum_rate_upper_bound").unwrap();
        for s in ["mcmf", "acmf"] {
            let c = out.curve(&format!("{s}@M={m}"), "avg_sum_rate").unwrap();
            for (p, b) in c.points.iter().zip(&bound.points) {
                assert!(p.value <= b.value + 3.0 * p.stderr, "{s} M={m} at {} dB", p.snr_db);
            }
        }
    }
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let mut e = small("fig8", "0:10:20");
    e.policy = TrialPolicy::fixed(3 * sim::BATCH_SIZE + 17);
    let r = verify::thread_independence(&e).unwrap();
    assert!(r.passed, "{r}");
}

#[test]
fn seed_and_config_fix_every_csv_byte() {
    let e = small("fig5", "0:10:20");
    assert_eq!(sim::run(&e).unwrap().to_csv(), sim::run(&e).unwrap().to_csv());
    let mut f = e.clone();
    f.seed += 1;
    assert_ne!(sim::run(&e).unwrap().to_csv(), sim::run(&f).unwrap().to_csv());
}

#[test]
fn config_files_reject_unknown_keys() {
    let text = r#"
        id = "custom"
        metric = "outage"
        snr_db = "0:5:10"
        schemes = ["mcmf", "df2"]
        seed = 3
        [[variants]]
        label = "M=2"
        fading = { variances = [[1.0, 1.0], [1.0, 1.0]], model = "real_rayleigh" }
    "#;
    let e = Experiment::from_toml(text).unwrap();
    assert_eq!(e.snr_db, vec![0.0, 5.0, 10.0]);
    e.validate().unwrap();
    let bad = format!("{text}\nbogus = 1\n");
    assert!(matches!(Experiment::from_toml(&bad), Err(Error::Parse(_))));
}
