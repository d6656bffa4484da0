//! Command-line driver: runs a configured scenario, a config-file sweep or a
//! named figure preset, and writes CSV and SVG results.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use leosg::config::{config_to_json, read_config_file, Mode, ScenarioConfig};
use leosg::report::{emit_csv, emit_plot};
use leosg::sweep::{preset, run_sweep, Metric, SweepAxis, SweepSpec, SweepTable, PRESET_NAMES};

const OUT_DIR_VAR: &str = "LEOSG_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "leosg", version, about = "Coverage of satellite-relayed links between ground gateways")]
struct Args {
    /// Scenario file (JSON). Absent fields take the built-in defaults; an
    /// optional "sweep" object turns the run into a sweep.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Named sweep: fig7, fig8, fig9-11, fig12, fig13 or fig14. With
    /// --config, the file supplies the base scenario.
    #[arg(long)]
    preset: Option<String>,

    /// Monte Carlo trials per point.
    #[arg(long)]
    trials: Option<u64>,

    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads; results do not depend on this.
    #[arg(long)]
    workers: Option<usize>,

    /// Output directory. Defaults to $LEOSG_OUT_DIR, then ./out.
    #[arg(long)]
    out: Option<PathBuf>,

    /// tsr, tssr, combined, analytic, or a full mode name such as
    /// tsr_any_pair.
    #[arg(long)]
    mode: Option<String>,

    /// Print the default scenario as JSON and exit.
    #[arg(long)]
    print_defaults: bool,

    /// List preset names and exit.
    #[arg(long)]
    list_presets: bool,
}

fn out_dir(args: &Args) -> PathBuf {
    args.out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_VAR).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn build_spec(args: &Args) -> Result<SweepSpec, String> {
    let file = match &args.config {
        Some(path) => Some(read_config_file(path).map_err(|e| e.to_string())?),
        None => None,
    };
    let sweep_file = file.as_ref().and_then(|f| f.sweep.clone());
    let base_from_file = file.map(|f| f.into_scenario());

    let mut spec = match (&args.preset, sweep_file) {
        (Some(name), _) => {
            let mut spec = preset(name)
                .ok_or_else(|| format!("unknown preset {name:?}; available: {}", PRESET_NAMES.join(", ")))?;
            if let Some(base) = base_from_file {
                spec.base = base;
            }
            spec
        }
        (None, Some(sweep)) => {
            let name = stem(args.config.as_deref());
            SweepSpec::from_file(&name, base_from_file.unwrap_or_default(), &sweep).map_err(|e| e.to_string())?
        }
        (None, None) => {
            let base = base_from_file.unwrap_or_default();
            SweepSpec {
                name: stem(args.config.as_deref()),
                axis: SweepAxis::Ns,
                values: vec![base.ns as f64],
                base,
                series: None,
                outputs: vec![Metric::Coverage],
            }
        }
    };

    if let Some(t) = args.trials {
        spec.base.n_trials = t;
    }
    if let Some(s) = args.seed {
        spec.base.seed = s;
    }
    if let Some(m) = &args.mode {
        if m == "analytic" {
            spec.base.mode = Mode::TsrConditioned;
            spec.outputs = vec![Metric::AnalyticRelay, Metric::AnalyticProduct];
        } else {
            spec.base.mode = Mode::parse(m).ok_or_else(|| {
                format!("unknown mode {m:?}; expected tsr, tssr, combined, analytic or a full mode name")
            })?;
            spec.outputs.retain(|o| o.applies_to(spec.base.mode));
            if spec.outputs.is_empty() {
                spec.outputs.push(Metric::Coverage);
            }
        }
    }
    spec.base.validate().map_err(|e| e.to_string())?;
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

fn stem(path: Option<&Path>) -> String {
    path.and_then(|p| p.file_stem())
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".to_string())
}

fn print_summary(table: &SweepTable) {
    println!("{:<14} {:<14} {:<18} {:>9} {:>19}", "series", table.axis.name(), "metric", "p", "95% CI");
    for r in &table.rows {
        let series = r.series.as_deref().unwrap_or("-");
        match (&r.error, r.estimate, r.analytic) {
            (Some(e), _, _) => println!("{series:<14} {:<14} {:<18} error: {e}", r.value, r.metric.name()),
            (None, Some(e), _) => println!(
                "{series:<14} {:<14} {:<18} {:>9.4} [{:.4}, {:.4}]",
                r.value,
                r.metric.name(),
                e.p_hat,
                e.ci_low,
                e.ci_high
            ),
            (None, None, Some(a)) => println!("{series:<14} {:<14} {:<18} {a:>9.4}", r.value, r.metric.name()),
            (None, None, None) => {}
        }
    }
}

fn run(args: &Args) -> Result<(), String> {
    if args.print_defaults {
        println!("{}", config_to_json(&ScenarioConfig::default()));
        return Ok(());
    }
    if args.list_presets {
        for name in PRESET_NAMES {
            println!("{name}");
        }
        return Ok(());
    }
    let spec = build_spec(args)?;
    let workers = args
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    if workers == 0 {
        return Err("--workers must be at least 1".into());
    }
    let table = run_sweep(&spec, workers).map_err(|e| e.to_string())?;
    let dir = out_dir(args);
    std::fs::create_dir_all(&dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    let csv_path = dir.join(format!("{}.csv", spec.name));
    emit_csv(&table, &csv_path).map_err(|e| e.to_string())?;
    print_summary(&table);
    println!("wrote {}", csv_path.display());
    if table.rows.iter().any(|r| r.error.is_none()) {
        let svg_path = dir.join(format!("{}.svg", spec.name));
        emit_plot(&table, &svg_path).map_err(|e| e.to_string())?;
        println!("wrote {}", svg_path.display());
    }
    if table.failed_rows() > 0 {
        eprintln!("{} of {} rows failed", table.failed_rows(), table.rows.len());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
