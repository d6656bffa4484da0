//! Parameter sweeps over a base scenario, and the named figure presets.

use serde::Serialize;

use crate::analytic::{tsr_coverage, AnalyticForm};
use crate::config::{Mode, ScenarioConfig, SweepFile};
use crate::error::{invalid, Result};
use crate::simulator::{estimate_link_coverage, CoverageEstimate, LinkSelector};

/// Scenario parameter a sweep can vary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SweepAxis {
    Ns,
    Ds,
    GammaDb,
    LambdaGw,
    /// Full lobe angle in degrees.
    ThetaM,
    /// Carrier frequency in Hz.
    CarrierFreq,
    /// Rain attenuation in dB (non-positive).
    RainDb,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 7] = [
        SweepAxis::Ns,
        SweepAxis::Ds,
        SweepAxis::GammaDb,
        SweepAxis::LambdaGw,
        SweepAxis::ThetaM,
        SweepAxis::CarrierFreq,
        SweepAxis::RainDb,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Ns => "Ns",
            SweepAxis::Ds => "ds",
            SweepAxis::GammaDb => "gamma_db",
            SweepAxis::LambdaGw => "lambda_gw",
            SweepAxis::ThetaM => "theta_m",
            SweepAxis::CarrierFreq => "carrier_freq",
            SweepAxis::RainDb => "rain_db",
        }
    }

    pub fn parse(s: &str) -> Option<SweepAxis> {
        Self::ALL.into_iter().find(|a| a.name().eq_ignore_ascii_case(s))
    }

    pub fn apply(&self, cfg: &mut ScenarioConfig, value: f64) -> Result<()> {
        match self {
            SweepAxis::Ns => {
                if !(value >= 0.0 && value.fract() == 0.0 && value <= u32::MAX as f64) {
                    return Err(invalid(format!("Ns must be a non-negative integer, got {value}")));
                }
                cfg.ns = value as u64;
            }
            SweepAxis::Ds => cfg.ds = value,
            SweepAxis::GammaDb => cfg.gamma_db = value,
            SweepAxis::LambdaGw => cfg.lambda_gw = value,
            SweepAxis::ThetaM => cfg.theta_m = value.to_radians(),
            SweepAxis::CarrierFreq => cfg.channel.carrier_freq_hz = value,
            SweepAxis::RainDb => cfg.channel.rain_attenuation_db = value,
        }
        Ok(())
    }
}

/// Second dimension of a sweep: one curve per value.
#[derive(Clone, Debug, PartialEq)]
pub enum Series {
    Param { axis: SweepAxis, values: Vec<f64> },
    Mode(Vec<Mode>),
}

impl Series {
    pub fn name(&self) -> &'static str {
        match self {
            Series::Param { axis, .. } => axis.name(),
            Series::Mode(_) => "mode",
        }
    }

    fn len(&self) -> usize {
        match self {
            Series::Param { values, .. } => values.len(),
            Series::Mode(modes) => modes.len(),
        }
    }

    /// Applies the `i`-th value and returns its label.
    fn apply(&self, i: usize, cfg: &mut ScenarioConfig) -> Result<String> {
        match self {
            Series::Param { axis, values } => {
                axis.apply(cfg, values[i])?;
                Ok(values[i].to_string())
            }
            Series::Mode(modes) => {
                cfg.mode = modes[i];
                Ok(modes[i].name().to_string())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Metric {
    /// End-to-end Monte Carlo coverage.
    Coverage,
    UplinkCoverage,
    DownlinkCoverage,
    /// Direct-relay integral with both links at the same relay.
    AnalyticRelay,
    /// Product of the two per-link integrals.
    AnalyticProduct,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Coverage,
        Metric::UplinkCoverage,
        Metric::DownlinkCoverage,
        Metric::AnalyticRelay,
        Metric::AnalyticProduct,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Metric::Coverage => "coverage",
            Metric::UplinkCoverage => "uplink_coverage",
            Metric::DownlinkCoverage => "downlink_coverage",
            Metric::AnalyticRelay => "analytic_relay",
            Metric::AnalyticProduct => "analytic_product",
        }
    }

    pub fn parse(s: &str) -> Option<Metric> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self, Metric::AnalyticRelay | Metric::AnalyticProduct)
    }

    /// Whether the metric is defined for a scenario in `mode`.
    pub fn applies_to(&self, mode: Mode) -> bool {
        !self.is_analytic() || mode == Mode::TsrConditioned
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub name: String,
    pub base: ScenarioConfig,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub series: Option<Series>,
    pub outputs: Vec<Metric>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(invalid(format!("sweep over {} has no values", self.axis.name())));
        }
        let increasing = self.values.windows(2).all(|w| w[0] < w[1]);
        let decreasing = self.values.windows(2).all(|w| w[0] > w[1]);
        if !(increasing || decreasing) {
            return Err(invalid(format!(
                "sweep values for {} must be strictly monotone",
                self.axis.name()
            )));
        }
        if let Some(series) = &self.series {
            if series.len() == 0 {
                return Err(invalid(format!("series over {} has no values", series.name())));
            }
            if let Series::Param { axis, .. } = series {
                if *axis == self.axis {
                    return Err(invalid(format!("series and sweep both vary {}", axis.name())));
                }
            }
        }
        if self.outputs.is_empty() {
            return Err(invalid("sweep requests no outputs"));
        }
        Ok(())
    }

    /// Sweep described in a config file, over `base`.
    pub fn from_file(name: &str, base: ScenarioConfig, file: &SweepFile) -> Result<Self> {
        let axis = SweepAxis::parse(&file.axis)
            .ok_or_else(|| invalid(format!("unknown sweep axis {:?}", file.axis)))?;
        let series = match &file.series {
            None => None,
            Some(s) if s.axis == "mode" => {
                let modes = s
                    .values
                    .iter()
                    .map(|v| {
                        v.as_str()
                            .and_then(Mode::parse)
                            .ok_or_else(|| invalid(format!("unknown mode {v} in series")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Some(Series::Mode(modes))
            }
            Some(s) => {
                let axis = SweepAxis::parse(&s.axis)
                    .ok_or_else(|| invalid(format!("unknown series axis {:?}", s.axis)))?;
                let values = s
                    .values
                    .iter()
                    .map(|v| v.as_f64().ok_or_else(|| invalid(format!("series value {v} is not a number"))))
                    .collect::<Result<Vec<_>>>()?;
                Some(Series::Param { axis, values })
            }
        };
        let outputs = match &file.outputs {
            None => vec![Metric::Coverage],
            Some(names) => names
                .iter()
                .map(|n| Metric::parse(n).ok_or_else(|| invalid(format!("unknown output metric {n:?}"))))
                .collect::<Result<Vec<_>>>()?,
        };
        let spec = Self {
            name: name.to_string(),
            base,
            axis,
            values: file.values.clone(),
            series,
            outputs,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Configurations in row order, with their series label.
    pub fn points(&self) -> Vec<(Option<String>, f64, Result<ScenarioConfig>)> {
        let series_count = self.series.as_ref().map_or(1, Series::len);
        let mut out = Vec::with_capacity(series_count * self.values.len());
        for s in 0..series_count {
            for &v in &self.values {
                let mut cfg = self.base.clone();
                let label = match &self.series {
                    Some(series) => match series.apply(s, &mut cfg) {
                        Ok(l) => Some(l),
                        Err(e) => {
                            out.push((None, v, Err(e)));
                            continue;
                        }
                    },
                    None => None,
                };
                let applied = self.axis.apply(&mut cfg, v).and_then(|_| cfg.validate()).map(|_| cfg);
                out.push((label, v, applied));
            }
        }
        out
    }
}

/// One (series value, axis value, metric) result. Failed points carry the
/// error text and no numbers.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub series: Option<String>,
    pub value: f64,
    pub metric: Metric,
    pub estimate: Option<CoverageEstimate>,
    pub analytic: Option<f64>,
    pub error: Option<String>,
}

impl SweepRow {
    /// The coverage figure of the row, simulated or analytic.
    pub fn p_hat(&self) -> Option<f64> {
        self.estimate.map(|e| e.p_hat).or(self.analytic)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub name: String,
    pub axis: SweepAxis,
    pub series_axis: Option<&'static str>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Rows of one metric and series value, in sweep order.
    pub fn curve(&self, metric: Metric, series: Option<&str>) -> Vec<&SweepRow> {
        self.rows
            .iter()
            .filter(|r| r.metric == metric && r.series.as_deref() == series)
            .collect()
    }

    /// Distinct (series, metric) pairs in first-appearance order.
    pub fn curves(&self) -> Vec<(Option<String>, Metric)> {
        let mut out: Vec<(Option<String>, Metric)> = Vec::new();
        for r in &self.rows {
            if !out.iter().any(|(s, m)| *s == r.series && *m == r.metric) {
                out.push((r.series.clone(), r.metric));
            }
        }
        out
    }

    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }
}

fn evaluate(cfg: &ScenarioConfig, metric: Metric, workers: usize) -> Result<(Option<CoverageEstimate>, Option<f64>)> {
    let selector = match metric {
        Metric::Coverage => LinkSelector::EndToEnd,
        Metric::UplinkCoverage => LinkSelector::Uplink,
        Metric::DownlinkCoverage => LinkSelector::Downlink,
        Metric::AnalyticRelay => return Ok((None, Some(tsr_coverage(cfg, AnalyticForm::RelayConditioned)?))),
        Metric::AnalyticProduct => return Ok((None, Some(tsr_coverage(cfg, AnalyticForm::Product)?))),
    };
    Ok((Some(estimate_link_coverage(cfg, selector, workers)?), None))
}

/// Runs every point of `spec`. A point that fails becomes a row with its
/// error message; the sweep itself only fails on an invalid spec.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<SweepTable> {
    spec.validate()?;
    let mut rows = Vec::new();
    for (series, value, cfg) in spec.points() {
        for &metric in &spec.outputs {
            let row = |estimate, analytic, error| SweepRow {
                series: series.clone(),
                value,
                metric,
                estimate,
                analytic,
                error,
            };
            match &cfg {
                Err(e) => rows.push(row(None, None, Some(e.to_string()))),
                Ok(cfg) if !metric.applies_to(cfg.mode) => {}
                Ok(cfg) => match evaluate(cfg, metric, workers) {
                    Ok((estimate, analytic)) => rows.push(row(estimate, analytic, None)),
                    Err(e) => rows.push(row(None, None, Some(e.to_string()))),
                },
            }
        }
    }
    Ok(SweepTable {
        name: spec.name.clone(),
        axis: spec.axis,
        series_axis: spec.series.as_ref().map(Series::name),
        rows,
    })
}

pub const PRESET_NAMES: [&str; 6] = ["fig7", "fig8", "fig9-11", "fig12", "fig13", "fig14"];

/// Named sweeps reproducing the published figure studies at desk scale.
/// Approximate single-core runtimes at the default 10⁵ trials per point:
/// fig7 30 s, fig8 15 s, fig9-11 10 min, fig12 70 s, fig13 130 s, fig14 20 s.
pub fn preset(name: &str) -> Option<SweepSpec> {
    let base = ScenarioConfig::default();
    let ns_values = vec![100.0, 1000.0, 10_000.0, 100_000.0];
    let lambdas = vec![1.96e-8, 1.96e-7, 1.96e-6];
    let spec = match name {
        "fig7" => SweepSpec {
            name: name.into(),
            base: ScenarioConfig { ds: 550.0, ..base },
            axis: SweepAxis::Ns,
            values: ns_values,
            series: Some(Series::Param {
                axis: SweepAxis::GammaDb,
                values: vec![6.0, 12.0, 18.0],
            }),
            outputs: vec![Metric::Coverage, Metric::AnalyticRelay, Metric::AnalyticProduct],
        },
        "fig8" => SweepSpec {
            name: name.into(),
            base,
            axis: SweepAxis::Ns,
            values: ns_values,
            series: Some(Series::Param {
                axis: SweepAxis::Ds,
                values: vec![550.0, 1000.0, 1500.0],
            }),
            outputs: vec![Metric::Coverage, Metric::AnalyticRelay],
        },
        "fig9-11" => SweepSpec {
            name: name.into(),
            base,
            axis: SweepAxis::Ns,
            values: vec![100.0, 1000.0, 10_000.0],
            series: Some(Series::Mode(vec![Mode::TsrAnyPair, Mode::TssrAnyPair, Mode::Combined])),
            outputs: vec![Metric::Coverage],
        },
        "fig12" => SweepSpec {
            name: name.into(),
            base,
            axis: SweepAxis::ThetaM,
            values: vec![30.0, 45.0, 65.0, 90.0, 120.0],
            series: Some(Series::Param {
                axis: SweepAxis::LambdaGw,
                values: lambdas,
            }),
            outputs: vec![Metric::Coverage, Metric::AnalyticRelay],
        },
        "fig13" => SweepSpec {
            name: name.into(),
            base,
            axis: SweepAxis::GammaDb,
            values: vec![0.0, 4.0, 8.0, 12.0, 16.0, 20.0, 24.0],
            series: Some(Series::Param {
                axis: SweepAxis::LambdaGw,
                values: lambdas,
            }),
            outputs: vec![Metric::Coverage, Metric::AnalyticRelay],
        },
        "fig14" => SweepSpec {
            name: name.into(),
            base: ScenarioConfig { ns: 100, ..base },
            axis: SweepAxis::CarrierFreq,
            values: vec![100e6, 200e6, 300e6, 500e6, 800e6],
            series: Some(Series::Param {
                axis: SweepAxis::RainDb,
                values: vec![0.0, -2.0, -5.0],
            }),
            outputs: vec![Metric::Coverage, Metric::AnalyticRelay],
        },
        _ => return None,
    };
    Some(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(spec: SweepSpec) -> SweepSpec {
        SweepSpec {
            base: ScenarioConfig {
                n_trials: 300,
                ..spec.base
            },
            ..spec
        }
    }

    #[test]
    fn presets_are_valid() {
        for name in PRESET_NAMES {
            let spec = preset(name).unwrap();
            spec.validate().unwrap();
            for (_, _, cfg) in spec.points() {
                cfg.unwrap();
            }
        }
        assert!(preset("fig99").is_none());
    }

    #[test]
    fn rejects_non_monotone_values() {
        let mut spec = preset("fig7").unwrap();
        spec.values = vec![100.0, 1000.0, 500.0];
        assert!(spec.validate().is_err());
        spec.values.clear();
        assert!(spec.validate().is_err());
    }

    #[test]
    fn bad_point_becomes_flagged_row() {
        let spec = quick(SweepSpec {
            name: "t".into(),
            base: ScenarioConfig {
                ns: 500,
                ..ScenarioConfig::default()
            },
            axis: SweepAxis::Ds,
            values: vec![-1.0, 550.0],
            series: None,
            outputs: vec![Metric::Coverage],
        });
        let table = run_sweep(&spec, 1).unwrap();
        assert_eq!(table.rows.len(), 2);
        assert!(table.rows[0].error.as_deref().unwrap().contains("altitude"));
        assert!(table.rows[1].estimate.is_some());
        assert_eq!(table.failed_rows(), 1);
    }

    #[test]
    fn coverage_nonincreasing_in_threshold() {
        let spec = SweepSpec {
            name: "gamma".into(),
            base: ScenarioConfig {
                ns: 2000,
                n_trials: 3000,
                ..ScenarioConfig::default()
            },
            axis: SweepAxis::GammaDb,
            values: vec![0.0, 10.0, 20.0, 30.0],
            series: None,
            outputs: vec![Metric::Coverage, Metric::AnalyticRelay],
        };
        let table = run_sweep(&spec, 1).unwrap();
        for metric in [Metric::Coverage, Metric::AnalyticRelay] {
            let p: Vec<f64> = table.curve(metric, None).iter().map(|r| r.p_hat().unwrap()).collect();
            // Common random numbers make the simulated curve monotone trial by trial.
            assert!(p.windows(2).all(|w| w[1] <= w[0]), "{metric:?}: {p:?}");
        }
    }

    #[test]
    fn analytic_rows_only_for_conditioned_mode() {
        let spec = quick(SweepSpec {
            name: "m".into(),
            base: ScenarioConfig {
                ns: 300,
                ..ScenarioConfig::default()
            },
            axis: SweepAxis::Ds,
            values: vec![550.0],
            series: Some(Series::Mode(vec![Mode::TsrConditioned, Mode::TsrAnyPair])),
            outputs: vec![Metric::Coverage, Metric::AnalyticRelay],
        });
        let table = run_sweep(&spec, 1).unwrap();
        assert_eq!(table.rows.len(), 3);
        assert_eq!(table.curves().len(), 3);
    }
}
