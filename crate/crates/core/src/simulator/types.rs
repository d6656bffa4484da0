use serde::Serialize;

use crate::stats::{wilson_interval, Z_95};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    NoOverlapSatellite,
    NoRoute,
    SnrBelowThreshold,
    Ok,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialOutcome {
    /// A relay (or a complete route) was found.
    pub geometric_ok: bool,
    pub snr_ok: bool,
    /// SNR of each hop in path order, ground uplink first.
    pub per_link_snr_db: Vec<f64>,
    /// Satellites on the path.
    pub hop_count: usize,
    pub failure_reason: FailureReason,
}

impl TrialOutcome {
    pub fn geometric_failure(reason: FailureReason) -> Self {
        Self {
            geometric_ok: false,
            snr_ok: false,
            per_link_snr_db: Vec::new(),
            hop_count: 0,
            failure_reason: reason,
        }
    }

    pub fn success(&self) -> bool {
        self.snr_ok
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OutageBreakdown {
    pub ok: u64,
    pub no_overlap_satellite: u64,
    pub no_route: u64,
    pub snr_below_threshold: u64,
}

impl OutageBreakdown {
    pub fn add(&mut self, reason: FailureReason) {
        match reason {
            FailureReason::Ok => self.ok += 1,
            FailureReason::NoOverlapSatellite => self.no_overlap_satellite += 1,
            FailureReason::NoRoute => self.no_route += 1,
            FailureReason::SnrBelowThreshold => self.snr_below_threshold += 1,
        }
    }

    pub fn merge(mut self, other: Self) -> Self {
        self.ok += other.ok;
        self.no_overlap_satellite += other.no_overlap_satellite;
        self.no_route += other.no_route;
        self.snr_below_threshold += other.snr_below_threshold;
        self
    }

    pub fn total(&self) -> u64 {
        self.ok + self.no_overlap_satellite + self.no_route + self.snr_below_threshold
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoverageEstimate {
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_trials: u64,
    pub outage_breakdown: OutageBreakdown,
}

impl CoverageEstimate {
    pub fn from_breakdown(outage_breakdown: OutageBreakdown) -> Self {
        let n = outage_breakdown.total();
        let k = outage_breakdown.ok;
        let (ci_low, ci_high) = wilson_interval(k, n, Z_95);
        let p_hat = if n == 0 { 0.0 } else { k as f64 / n as f64 };
        Self {
            p_hat,
            ci_low: ci_low.min(p_hat),
            ci_high: ci_high.max(p_hat),
            n_trials: n,
            outage_breakdown,
        }
    }

    pub fn successes(&self) -> u64 {
        self.outage_breakdown.ok
    }

    pub fn standard_error(&self) -> f64 {
        crate::stats::binomial_standard_error(self.p_hat, self.n_trials)
    }

    /// This estimate lies above `other` with disjoint confidence intervals.
    pub fn exceeds(&self, other: &CoverageEstimate) -> bool {
        self.ci_low > other.ci_high
    }

    pub fn overlaps(&self, other: &CoverageEstimate) -> bool {
        self.ci_low <= other.ci_high && other.ci_low <= self.ci_high
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_forced_success() {
        let mut b = OutageBreakdown::default();
        b.add(FailureReason::Ok);
        let e = CoverageEstimate::from_breakdown(b);
        assert_eq!(e.p_hat, 1.0);
        assert_eq!(e.ci_high, 1.0);
        assert!((e.ci_low - 0.2065).abs() < 1e-4);
    }

    #[test]
    fn counts_sum_to_trials() {
        let mut b = OutageBreakdown::default();
        for r in [
            FailureReason::Ok,
            FailureReason::NoRoute,
            FailureReason::NoOverlapSatellite,
            FailureReason::SnrBelowThreshold,
            FailureReason::Ok,
        ] {
            b.add(r);
        }
        let e = CoverageEstimate::from_breakdown(b);
        assert_eq!(e.n_trials, 5);
        assert!(e.ci_low <= e.p_hat && e.p_hat <= e.ci_high);
        assert_eq!(b.merge(b).total(), 10);
    }
}
