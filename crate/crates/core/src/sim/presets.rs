//! Figure presets for the reference experiments.
//!
//! | id   | metric        | relays | links               | schemes                         | grid (dB) |
//! |------|---------------|--------|---------------------|---------------------------------|-----------|
//! | fig2 | outage        | 1,2,3  | real, σ² = 1        | mcmf, acmf                      | 0:2.5:40  |
//! | fig3 | avg_sum_rate  | 1,2    | real, σ² = 1        | mcmf, acmf                      | 0:2.5:30  |
//! | fig4 | ser           | 1      | real, σ² = 1        | mcmf, acmf, af, df2             | 0:2:30    |
//! | fig5 | outage        | 2      | real, σ² = 1        | mcmf, acmf, af, df2, df3        | 0:2.5:30  |
//! | fig6 | avg_sum_rate  | 2      | real, σ² = 1        | mcmf, acmf, af, df2, df3        | 0:2.5:30  |
//! | fig7 | avg_sum_rate  | 1,2    | real, σ² = 1        | acmf, acmf_total                | 0:2.5:30  |
//! | fig8 | outage        | 2      | complex, σ² = 1     | mcmf, acmf, af, df2, df3        | 0:2.5:30  |
//! | fig9 | outage        | 2      | real, σ²₁+σ²₂ = 2   | mcmf, acmf, df2 per delta       | 0:2.5:35  |
//!
//! All use `R_t = 1`, equal user and relay powers `P = 10^(SNR/10)` and the
//! default adaptation tolerance. In fig9 `σ²₁ = 1 + δ/2`, `σ²₂ = 1 − δ/2`
//! for `δ ∈ {0, 0.5, 1}`.

use super::{parse_grid, Experiment, Metric, OutageEstimator, TrialPolicy, Variant};
use crate::error::{Error, Result};
use crate::fading::{ChannelModel, FadingConfig};
use crate::power::{AdaptParams, PowerMode};
use crate::schemes::{Scheme, SelectionRule};

/// Preset ids with one-line descriptions.
pub const PRESETS: [(&str, &str); 8] = [
    ("fig2", "outage of M-CMF and A-CMF with the outage lower bound, M = 1, 2, 3"),
    ("fig3", "average sum rate of M-CMF and A-CMF with the sum-rate upper bound, M = 1, 2"),
    ("fig4", "symbol error rate with BPSK against AF and two-step DF, M = 1"),
    ("fig5", "outage against AF, two-step and three-step DF, M = 2"),
    ("fig6", "average sum rate against AF, two-step and three-step DF, M = 2"),
    ("fig7", "A-CMF with per-user against total power constraint, M = 1, 2"),
    ("fig8", "outage over complex Gaussian links, M = 2"),
    ("fig9", "outage with unequal user variances delta = 0, 0.5, 1, M = 2"),
];

pub fn preset_ids() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(id, _)| *id)
}

const CMF: [Scheme; 2] = [Scheme::Mcmf, Scheme::Acmf(PowerMode::PerUser)];
const ALL_RATE: [Scheme; 5] = [
    Scheme::Mcmf,
    Scheme::Acmf(PowerMode::PerUser),
    Scheme::Af,
    Scheme::Df2,
    Scheme::Df3,
];

fn relays(ms: &[usize], model: ChannelModel) -> Vec<Variant> {
    ms.iter()
        .map(|&m| Variant {
            label: format!("M={m}"),
            fading: FadingConfig::uniform(m, 1.0, model),
        })
        .collect()
}

fn base(id: &str, metric: Metric, grid: &str, schemes: &[Scheme], variants: Vec<Variant>) -> Experiment {
    Experiment {
        id: id.to_string(),
        metric,
        snr_db: parse_grid(grid).expect("preset grids parse"),
        schemes: schemes.to_vec(),
        variants,
        target_rate: 1.0,
        seed: 1,
        selection: SelectionRule::MinRate,
        adapt: AdaptParams::default(),
        normalize_outage: true,
        policy: TrialPolicy::default(),
        estimator: OutageEstimator::RelayProduct,
        relay_power_ratio: 1.0,
        noise_var: 1.0,
    }
}

pub fn preset(id: &str) -> Result<Experiment> {
    let real = ChannelModel::RealRayleigh;
    Ok(match id {
        "fig2" => base(id, Metric::Outage, "0:2.5:40", &CMF, relays(&[1, 2, 3], real)),
        "fig3" => base(id, Metric::AvgSumRate, "0:2.5:30", &CMF, relays(&[1, 2], real)),
        "fig4" => {
            let mut e = base(
                id,
                Metric::Ser,
                "0:2:30",
                &[Scheme::Mcmf, Scheme::Acmf(PowerMode::PerUser), Scheme::Af, Scheme::Df2],
                relays(&[1], real),
            );
            e.policy = TrialPolicy {
                min_trials: 200_000,
                max_trials: 10_000_000,
                min_events: 1000,
            };
            e
        }
        "fig5" => base(id, Metric::Outage, "0:2.5:30", &ALL_RATE, relays(&[2], real)),
        "fig6" => base(id, Metric::AvgSumRate, "0:2.5:30", &ALL_RATE, relays(&[2], real)),
        "fig7" => base(
            id,
            Metric::AvgSumRate,
            "0:2.5:30",
            &[Scheme::Acmf(PowerMode::PerUser), Scheme::Acmf(PowerMode::Total)],
            relays(&[1, 2], real),
        ),
        "fig8" => base(
            id,
            Metric::Outage,
            "0:2.5:30",
            &ALL_RATE,
            relays(&[2], ChannelModel::ComplexGaussian),
        ),
        "fig9" => {
            let variants = [0.0, 0.5, 1.0]
                .iter()
                .map(|&d: &f64| Variant {
                    label: format!("delta={d}"),
                    fading: FadingConfig::asymmetric(2, 1.0 + d / 2.0, 1.0 - d / 2.0, real),
                })
                .collect();
            base(
                id,
                Metric::Outage,
                "0:2.5:35",
                &[Scheme::Mcmf, Scheme::Acmf(PowerMode::PerUser), Scheme::Df2],
                variants,
            )
        }
        other => return Err(Error::UnknownPreset(other.to_string())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for id in preset_ids() {
            let e = preset(id).unwrap();
            e.validate().unwrap();
            assert_eq!(e.id, id);
        }
        assert!(matches!(preset("fig1"), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn fig9_variances_sum_to_two() {
        let e = preset("fig9").unwrap();
        for v in &e.variants {
            for [a, b] in &v.fading.variances {
                assert!((a + b - 2.0).abs() < 1e-15);
            }
        }
        assert_eq!(e.variants[2].fading.variances[0], [1.5, 0.5]);
    }
}
