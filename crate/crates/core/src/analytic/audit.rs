//! Term-by-term audit of the published overlap contact density against the
//! exact geometry and a Monte Carlo histogram.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt;

use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::geometry::{offset_direction, SphericalCap, Vec3, EARTH_RADIUS_KM};
use crate::point_process::sample_in_cap;
use crate::quadrature::{try_integrate_with_breakpoints, Tolerance};
use crate::rng::RngStream;
use crate::stats::{chi_square, chi_square_critical, chi_square_p_value};

use super::contact::{ContactLaw, ContactLawConfig, ContactPdfVariant, OverlapContactLaw, OverlapGeometry};
use super::sigma::{literal_terms, sigma_terms};

#[derive(Clone, Copy, Debug)]
pub struct AuditOptions {
    pub draws: u64,
    pub bins: usize,
    pub alpha: f64,
    pub seed: u64,
    /// Distances probed by the term checks.
    pub grid_points: usize,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self {
            draws: 1_000_000,
            bins: 50,
            alpha: 0.01,
            seed: 0x5eed,
            grid_points: 25,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// No probed distance produced the quantities the check needs.
    NotEvaluable,
}

#[derive(Clone, Debug)]
pub struct TermCheck {
    /// σ indices the check bears on.
    pub sigmas: Vec<u8>,
    pub name: &'static str,
    pub status: CheckStatus,
    pub evaluated: usize,
    pub failures: usize,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct HistogramFit {
    pub variant: ContactPdfVariant,
    pub statistic: Option<f64>,
    pub degrees_of_freedom: usize,
    pub critical_value: f64,
    pub p_value: Option<f64>,
    pub passed: bool,
    pub note: Option<String>,
}

#[derive(Clone, Debug)]
pub struct TranscriptionAudit {
    pub config: ContactLawConfig,
    pub options: AuditOptions,
    pub support: (f64, f64),
    pub overlap_mass: f64,
    pub checks: Vec<TermCheck>,
    pub literal: HistogramFit,
    pub geometric: HistogramFit,
}

impl TranscriptionAudit {
    /// σ indices implicated by at least one failed check.
    pub fn failing_sigmas(&self) -> Vec<u8> {
        let set: BTreeSet<u8> = self
            .checks
            .iter()
            .filter(|c| c.status == CheckStatus::Fail)
            .flat_map(|c| c.sigmas.iter().copied())
            .collect();
        set.into_iter().collect()
    }

    /// The literal form is accepted by the histogram test, or the report
    /// names the terms responsible for its failure.
    pub fn is_conclusive(&self) -> bool {
        self.literal.passed || !self.failing_sigmas().is_empty()
    }
}

fn sigma_list(s: &[u8]) -> String {
    s.iter().map(|i| format!("σ{i}")).collect::<Vec<_>>().join(", ")
}

impl fmt::Display for HistogramFit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.variant {
            ContactPdfVariant::Literal => "literal",
            ContactPdfVariant::Geometric => "geometric",
        };
        match self.statistic {
            Some(x) => write!(
                f,
                "{name:9} chi2 = {x:.2} (df {}, critical {:.2}, p = {:.4}) -> {}",
                self.degrees_of_freedom,
                self.critical_value,
                self.p_value.unwrap_or(f64::NAN),
                if self.passed { "not rejected" } else { "rejected" }
            )?,
            None => write!(f, "{name:9} chi2 not computable -> rejected")?,
        }
        if let Some(note) = &self.note {
            write!(f, " [{note}]")?;
        }
        Ok(())
    }
}

impl fmt::Display for TranscriptionAudit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.config;
        writeln!(
            f,
            "overlap contact density audit: Ns = {}, ds = {} km, theta_m1 = {:.4}, theta_m2 = {:.4}, d = {} km",
            c.ns, c.ds, c.theta_m1, c.theta_m2, c.ground_separation
        )?;
        writeln!(
            f,
            "support [{:.3}, {:.3}] km, overlap mass {:.6}",
            self.support.0, self.support.1, self.overlap_mass
        )?;
        for check in &self.checks {
            let status = match check.status {
                CheckStatus::Pass => "pass",
                CheckStatus::Fail => "FAIL",
                CheckStatus::NotEvaluable => "n/a ",
            };
            writeln!(
                f,
                "  [{status}] {:<28} ({}) {}/{} failing: {}",
                check.name,
                sigma_list(&check.sigmas),
                check.failures,
                check.evaluated,
                check.detail
            )?;
        }
        writeln!(f, "  {}", self.literal)?;
        writeln!(f, "  {}", self.geometric)?;
        let failing = self.failing_sigmas();
        if failing.is_empty() {
            write!(f, "failing sigma terms: none")
        } else {
            write!(f, "failing sigma terms: {}", sigma_list(&failing))
        }
    }
}

struct Tally {
    evaluated: usize,
    failures: usize,
    first: Option<String>,
}

impl Tally {
    fn new() -> Self {
        Self {
            evaluated: 0,
            failures: 0,
            first: None,
        }
    }

    fn record(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.evaluated += 1;
        if !ok {
            self.failures += 1;
            if self.first.is_none() {
                self.first = Some(detail());
            }
        }
    }

    fn finish(self, name: &'static str, sigmas: Vec<u8>) -> TermCheck {
        let status = if self.evaluated == 0 {
            CheckStatus::NotEvaluable
        } else if self.failures > 0 {
            CheckStatus::Fail
        } else {
            CheckStatus::Pass
        };
        let detail = match (&status, self.first) {
            (CheckStatus::NotEvaluable, _) => "no probed distance gives the quantities this check needs".into(),
            (_, Some(d)) => d,
            _ => "consistent".into(),
        };
        TermCheck {
            sigmas,
            name,
            status,
            evaluated: self.evaluated,
            failures: self.failures,
            detail,
        }
    }
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

/// Satellite central angle at slant range `d`, found by bisection on the
/// Euclidean distance between explicit position vectors.
fn angle_by_bisection(d: f64, r: f64, re: f64) -> f64 {
    let ground = Vec3::new(0.0, 0.0, re);
    let dist = |psi: f64| (Vec3::new(r * psi.sin(), 0.0, r * psi.cos()) - ground).norm();
    let (mut lo, mut hi) = (0.0, PI);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dist(mid) < d {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn term_checks(cfg: &ContactLawConfig, geometry: &OverlapGeometry, grid: &[f64]) -> Vec<TermCheck> {
    let (r, re) = (cfg.orbit_radius(), cfg.earth_radius);
    let half2 = cfg.theta_m2 / 2.0;
    let mut finite = std::collections::BTreeMap::<u8, Tally>::new();
    let mut self_contained: Vec<(u8, &'static str, Tally)> = vec![
        (1, "σ1 = R·sin(θm2/2)", Tally::new()),
        (2, "σ2 = 4πR²", Tally::new()),
        (13, "σ13 = (R·sinψ)²", Tally::new()),
        (16, "σ16 = half separation angle", Tally::new()),
        (17, "σ17 = cosψ", Tally::new()),
        (18, "σ18 = cos²(θm2/2)", Tally::new()),
    ];
    let mut lim_1 = Tally::new();
    let mut lim_5 = Tally::new();
    let mut lim_8 = Tally::new();
    let mut area = Tally::new();
    let mut bracket = Tally::new();
    // Independent separation angle from the chord: cos δ = 1 − d²/(2Re²).
    let delta = (1.0 - cfg.ground_separation.powi(2) / (2.0 * re * re)).clamp(-1.0, 1.0).acos();

    for &d in grid {
        let s = match sigma_terms(d, cfg) {
            Ok(s) => s,
            Err(Error::Singularity { index, detail, .. }) => {
                finite.entry(index).or_insert_with(Tally::new).record(false, || {
                    format!("D = {d:.1} km: {detail}")
                });
                continue;
            }
            Err(_) => continue,
        };
        for (index, _) in s.scalars().iter().filter(|(_, v)| v.is_some()) {
            finite.entry(*index).or_insert_with(Tally::new).record(true, String::new);
        }
        let psi = angle_by_bisection(d, r, re);
        let wants = [
            r * half2.sin(),
            4.0 * PI * r * r,
            (r * psi.sin()).powi(2),
            delta / 2.0,
            psi.cos(),
            half2.cos().powi(2),
        ];
        let gots = [s.sigma_1, s.sigma_2, s.sigma_13, s.sigma_16, s.sigma_17, s.sigma_18];
        for ((_, _, tally), (want, got)) in self_contained.iter_mut().zip(wants.iter().zip(gots)) {
            let ok = close(*want, got, 1e-9) || (want - got).abs() < 1e-12;
            tally.record(ok, || format!("D = {d:.1} km: {got} vs {want}"));
        }

        let upper = s.upper_limit();
        let inside = |l: f64| l.abs() <= upper * (1.0 + 1e-9);
        lim_1.record(inside(s.sigma_1), || {
            format!("D = {d:.1} km: σ1 = {:.1} km lies outside ±R·sin(σ17) = ±{upper:.1} km", s.sigma_1)
        });
        lim_5.record(inside(s.sigma_5), || {
            format!("D = {d:.1} km: σ5 = {:.1} km (σ9 = {:.4}) outside ±{upper:.1} km", s.sigma_5, s.sigma_9)
        });
        lim_8.record(inside(s.sigma_8), || {
            format!("D = {d:.1} km: σ8 = {:.1} km (σ11 = {:.4}) outside ±{upper:.1} km", s.sigma_8, s.sigma_11)
        });

        let Ok(terms) = literal_terms(d, cfg) else {
            continue;
        };
        if let Ok(exact) = geometry.area_within(psi) {
            area.record(close(terms.area, exact, 1e-3), || {
                format!("D = {d:.1} km: area term {:.6e} km² vs overlap area {exact:.6e} km²", terms.area)
            });
        }
        // The bracket should be the derivative of the area term.
        let h = 1e-4 * d;
        if let (Ok(up), Ok(down)) = (literal_terms(d + h, cfg), literal_terms(d - h, cfg)) {
            let slope = (up.area - down.area) / (2.0 * h);
            bracket.record(close(terms.bracket, slope, 1e-3), || {
                format!("D = {d:.1} km: bracket {:.6e} vs d(area)/dD {slope:.6e}", terms.bracket)
            });
        }
    }

    let mut checks: Vec<TermCheck> = finite
        .into_iter()
        .map(|(index, tally)| tally.finish("finite and in domain", vec![index]))
        .collect();
    checks.extend(
        self_contained
            .into_iter()
            .map(|(index, name, tally)| tally.finish(name, vec![index])),
    );
    checks.push(lim_1.finish("σ1 as an l-limit", vec![1, 10]));
    checks.push(lim_5.finish("σ5 as an l-limit", vec![5, 9]));
    checks.push(lim_8.finish("σ8 as an l-limit", vec![8, 11]));
    checks.push(area.finish("∫σ6 equals overlap area", vec![6]));
    checks.push(bracket.finish("bracket equals d(∫σ6)/dD", vec![3, 4, 7, 12, 14]));
    checks
}

/// Nearest-in-overlap distances from the transmitter; `None` when the overlap
/// holds no satellite. Only satellites in the transmitter cap are drawn,
/// their count being binomial.
pub fn sample_overlap_contacts(cfg: &ContactLawConfig, draws: u64, seed: u64) -> Result<Vec<Option<f64>>> {
    cfg.validate()?;
    let g = OverlapGeometry::from_config(cfg);
    let tx_dir = Vec3::z();
    let rx_dir = offset_direction(&tx_dir, g.delta, 0.0);
    let cap_t = SphericalCap::new(tx_dir, g.beta1)?;
    let cap_r = SphericalCap::new(rx_dir, g.beta2)?;
    let tx = tx_dir * EARTH_RADIUS_KM.min(cfg.earth_radius);
    let p_cap = (1.0 - g.beta1.cos()) / 2.0;
    let binomial = Binomial::new(cfg.ns, p_cap).map_err(|e| domain(e.to_string()))?;
    const CHUNK: u64 = 4096;
    let chunks = draws.div_ceil(CHUNK);
    let out: Vec<Vec<Option<f64>>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = RngStream::new(seed, chunk).rng();
            let n = CHUNK.min(draws - chunk * CHUNK);
            (0..n)
                .map(|_| {
                    let k = binomial.sample(&mut rng);
                    let mut best = f64::INFINITY;
                    for _ in 0..k {
                        let s = sample_in_cap(&mut rng, &cap_t, g.r);
                        if cap_r.contains_direction(s.direction()) {
                            best = best.min((s.position() - tx).norm());
                        }
                    }
                    best.is_finite().then_some(best)
                })
                .collect()
        })
        .collect();
    Ok(out.into_iter().flatten().collect())
}

fn histogram_fit(
    law: &OverlapContactLaw,
    edges: &[f64],
    observed: &[u64],
    draws: u64,
    alpha: f64,
) -> HistogramFit {
    let variant = law.variant;
    let bins = edges.len() - 1;
    let mut expected = Vec::with_capacity(bins + 1);
    let tol = Tolerance::default();
    let breaks = law.breakpoints();
    for w in edges.windows(2) {
        let mut pts = vec![w[0], w[1]];
        pts.extend(breaks.iter().copied().filter(|&b| b > w[0] && b < w[1]));
        pts.sort_by(f64::total_cmp);
        match try_integrate_with_breakpoints(|d| law.density(d), &pts, &tol) {
            Ok(v) => expected.push(v.value * draws as f64),
            Err(e) => {
                return HistogramFit {
                    variant,
                    statistic: None,
                    degrees_of_freedom: bins,
                    critical_value: chi_square_critical(bins, alpha),
                    p_value: None,
                    passed: false,
                    note: Some(format!("density could not be integrated on [{:.1}, {:.1}] km: {e}", w[0], w[1])),
                };
            }
        }
    }
    let found: f64 = expected.iter().sum();
    expected.push(draws as f64 - found);

    // Pool cells with small expectation into their neighbour.
    let mut obs = Vec::new();
    let mut exp = Vec::new();
    let (mut o_acc, mut e_acc) = (0u64, 0.0);
    for (o, e) in observed.iter().zip(&expected) {
        o_acc += o;
        e_acc += e;
        if e_acc >= 5.0 {
            obs.push(o_acc);
            exp.push(e_acc);
            o_acc = 0;
            e_acc = 0.0;
        }
    }
    if let (Some(lo), Some(le)) = (obs.last_mut(), exp.last_mut()) {
        *lo += o_acc;
        *le += e_acc;
    }
    let note = (exp.iter().any(|&e| e < 0.0)).then(|| "negative expected count".to_string());
    let dof = exp.len().saturating_sub(1).max(1);
    let stat = chi_square(&obs, &exp.iter().map(|e| e.max(1e-300)).collect::<Vec<_>>());
    let critical = chi_square_critical(dof, alpha);
    HistogramFit {
        variant,
        statistic: Some(stat),
        degrees_of_freedom: dof,
        critical_value: critical,
        p_value: Some(chi_square_p_value(stat, dof)),
        passed: note.is_none() && stat <= critical,
        note,
    }
}

pub fn audit_transcription(cfg: &ContactLawConfig, options: &AuditOptions) -> Result<TranscriptionAudit> {
    let geometric = OverlapContactLaw::new(*cfg, ContactPdfVariant::Geometric)?;
    let literal = OverlapContactLaw::new(*cfg, ContactPdfVariant::Literal)?;
    let (lo, hi) = geometric.support();
    let mass = geometric.mass()?;
    if !(hi > lo) || mass <= 0.0 {
        return Err(domain("the two caps do not overlap"));
    }
    let n = options.grid_points.max(1);
    let grid: Vec<f64> = (1..=n).map(|i| lo + (hi - lo) * i as f64 / (n + 1) as f64).collect();
    let checks = term_checks(cfg, geometric.geometry(), &grid);

    // Bin edges at equal-probability points of the geometric law, fixed
    // before the sample is drawn.
    let bins = options.bins.max(1);
    let mut edges = vec![lo];
    for k in 1..bins {
        let target = mass * k as f64 / bins as f64;
        let (mut a, mut b) = (*edges.last().unwrap(), hi);
        for _ in 0..100 {
            let mid = 0.5 * (a + b);
            if geometric.cdf(mid)? < target {
                a = mid;
            } else {
                b = mid;
            }
        }
        edges.push(0.5 * (a + b));
    }
    edges.push(hi);

    let samples = sample_overlap_contacts(cfg, options.draws, options.seed)?;
    let mut observed = vec![0u64; bins + 1];
    for s in &samples {
        match s {
            Some(d) => {
                let i = edges.partition_point(|&e| e <= *d).clamp(1, bins) - 1;
                observed[i] += 1;
            }
            None => observed[bins] += 1,
        }
    }

    Ok(TranscriptionAudit {
        config: *cfg,
        options: *options,
        support: (lo, hi),
        overlap_mass: mass,
        checks,
        literal: histogram_fit(&literal, &edges, &observed, options.draws, options.alpha),
        geometric: histogram_fit(&geometric, &edges, &observed, options.draws, options.alpha),
    })
}
