//! Parallel coverage estimation.

use rayon::prelude::*;

use crate::config::ScenarioConfig;
use crate::error::{invalid, Result};

use super::trial::{run_trial, PreparedScenario};
use super::types::{CoverageEstimate, FailureReason, OutageBreakdown, TrialOutcome};

/// Which part of a trial counts as success.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinkSelector {
    EndToEnd,
    /// Ground-to-satellite hop only.
    Uplink,
    /// Satellite-to-ground hop only.
    Downlink,
}

impl LinkSelector {
    fn reason(&self, outcome: &TrialOutcome, gamma_db: f64) -> FailureReason {
        if !outcome.geometric_ok {
            return outcome.failure_reason;
        }
        let snr = match self {
            LinkSelector::EndToEnd => return outcome.failure_reason,
            LinkSelector::Uplink => outcome.per_link_snr_db.first(),
            LinkSelector::Downlink => outcome.per_link_snr_db.last(),
        };
        match snr {
            Some(&s) if s >= gamma_db => FailureReason::Ok,
            _ => FailureReason::SnrBelowThreshold,
        }
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| invalid(format!("cannot start {workers} worker threads: {e}")))
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// All trial outcomes in trial order.
pub fn run_trials(cfg: &ScenarioConfig, workers: usize) -> Result<Vec<TrialOutcome>> {
    let scn = PreparedScenario::new(cfg)?;
    pool(workers)?.install(|| (0..cfg.n_trials).into_par_iter().map(|i| run_trial(&scn, i)).collect())
}

/// Coverage of `selector` over `cfg.n_trials` trials. The result depends
/// only on the configuration, never on `workers`.
pub fn estimate_link_coverage(cfg: &ScenarioConfig, selector: LinkSelector, workers: usize) -> Result<CoverageEstimate> {
    let scn = PreparedScenario::new(cfg)?;
    let gamma = cfg.gamma_db;
    let breakdown = pool(workers)?.install(|| {
        (0..cfg.n_trials)
            .into_par_iter()
            .try_fold(OutageBreakdown::default, |mut acc, i| {
                let outcome = run_trial(&scn, i)?;
                acc.add(selector.reason(&outcome, gamma));
                Ok::<_, crate::Error>(acc)
            })
            .try_reduce(OutageBreakdown::default, |a, b| Ok(a.merge(b)))
    })?;
    Ok(CoverageEstimate::from_breakdown(breakdown))
}

pub fn estimate_coverage_with_workers(cfg: &ScenarioConfig, workers: usize) -> Result<CoverageEstimate> {
    estimate_link_coverage(cfg, LinkSelector::EndToEnd, workers)
}

/// End-to-end coverage using every available core.
pub fn estimate_coverage(cfg: &ScenarioConfig) -> Result<CoverageEstimate> {
    estimate_coverage_with_workers(cfg, default_workers())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Mode;

    fn small(mode: Mode) -> ScenarioConfig {
        ScenarioConfig {
            ns: 2000,
            n_trials: 400,
            mode,
            seed: 7,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn worker_count_does_not_change_result() {
        for mode in Mode::ALL {
            let cfg = small(mode);
            let a = estimate_coverage_with_workers(&cfg, 1).unwrap();
            let b = estimate_coverage_with_workers(&cfg, 3).unwrap();
            assert_eq!(a, b, "{mode:?}");
        }
    }

    #[test]
    fn seed_changes_result() {
        let cfg = small(Mode::TsrConditioned);
        let other = ScenarioConfig { seed: 8, ..cfg.clone() };
        let a = run_trials(&cfg, 1).unwrap();
        let b = run_trials(&other, 1).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn no_satellites_no_coverage() {
        for mode in Mode::ALL {
            let cfg = ScenarioConfig { ns: 0, ..small(mode) };
            let e = estimate_coverage_with_workers(&cfg, 1).unwrap();
            assert_eq!(e.successes(), 0);
            assert_eq!(e.outage_breakdown.no_overlap_satellite, cfg.n_trials);
        }
    }

    #[test]
    fn vacuous_threshold_gives_geometric_coverage() {
        let cfg = ScenarioConfig {
            gamma_db: f64::NEG_INFINITY,
            ..small(Mode::TsrConditioned)
        };
        let outcomes = run_trials(&cfg, 1).unwrap();
        for o in &outcomes {
            assert_eq!(o.snr_ok, o.geometric_ok);
        }
    }

    #[test]
    fn outcome_invariants() {
        for mode in Mode::ALL {
            let cfg = ScenarioConfig { n_trials: 100, ..small(mode) };
            for o in run_trials(&cfg, 1).unwrap() {
                if o.snr_ok {
                    assert!(o.geometric_ok);
                    assert_eq!(o.failure_reason, FailureReason::Ok);
                }
                if o.geometric_ok {
                    assert_eq!(o.per_link_snr_db.len(), o.hop_count + 1);
                    assert!(o.hop_count >= 1 && o.hop_count <= cfg.max_hops + 1);
                } else {
                    assert!(o.per_link_snr_db.is_empty());
                }
                if matches!(mode, Mode::TsrConditioned | Mode::TsrAnyPair) {
                    assert_ne!(o.failure_reason, FailureReason::NoRoute);
                }
            }
        }
    }

    #[test]
    fn end_to_end_below_each_link() {
        let cfg = ScenarioConfig { n_trials: 2000, ..small(Mode::TsrConditioned) };
        let e2e = estimate_link_coverage(&cfg, LinkSelector::EndToEnd, 1).unwrap();
        let up = estimate_link_coverage(&cfg, LinkSelector::Uplink, 1).unwrap();
        let down = estimate_link_coverage(&cfg, LinkSelector::Downlink, 1).unwrap();
        assert!(e2e.successes() <= up.successes());
        assert!(e2e.successes() <= down.successes());
    }

    #[test]
    fn interval_width_shrinks_with_root_n() {
        let widths: Vec<f64> = [1_000u64, 10_000, 100_000]
            .iter()
            .map(|&n| {
                let cfg = ScenarioConfig { n_trials: n, ..small(Mode::TsrConditioned) };
                let e = estimate_coverage_with_workers(&cfg, 1).unwrap();
                e.ci_high - e.ci_low
            })
            .collect();
        for w in widths.windows(2) {
            let ratio = w[0] / w[1];
            assert!((ratio - 10f64.sqrt()).abs() < 0.5, "width ratio {ratio}");
        }
    }
}
