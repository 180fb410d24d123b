use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{ArgAction, Args, Parser, Subcommand};
use ratapprox::bounds::{bound_or_nan, BoundKind};
use ratapprox::dataset::PartitionScheme;
use ratapprox::experiments::{
    csv_num, reproduce_table, run_fit, run_iterate, run_sweep, write_error_curve, write_sweep_csv,
    ExperimentConfig, Method,
};
use ratapprox::sampling::PointFamily;

/// Points on the error curve written by `fit`.
const CURVE_POINTS: usize = 100_000;

#[derive(Parser)]
#[command(
    name = "ratapprox",
    version,
    about = "Rational approximation experiments for |x|"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write sample points of one family to points.csv.
    GenPoints(Overrides),
    /// Fit one approximant; writes model.json, report.json and error_curve.csv.
    Fit(Overrides),
    /// Max error of every method over an order range; writes sweep.csv.
    Sweep(Overrides),
    /// Rerun a published table (2, 3, 4 or 5); writes table<ID>.csv.
    ReproduceTable {
        id: u8,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Iterative Loewner refinement; writes trace.csv and model.json.
    Iterate(Overrides),
    /// Classical error bounds over an order range; writes bounds.csv.
    Bounds(Overrides),
}

/// Every config field, overriding the JSON file when given.
#[derive(Args, Default)]
struct Overrides {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    points: Option<PointFamily>,
    #[arg(long)]
    partition: Option<PartitionScheme>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    /// Points per half-interval.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true", action = ArgAction::Set)]
    add_zero: Option<bool>,
    #[arg(long)]
    method: Option<Method>,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    order_min: Option<usize>,
    #[arg(long)]
    order_max: Option<usize>,
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true", action = ArgAction::Set)]
    symmetric: Option<bool>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

macro_rules! apply {
    ($cfg:ident, $o:ident; $($f:ident),*) => {
        $(if let Some(v) = $o.$f.clone() { $cfg.$f = v; })*
    };
}

impl Overrides {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                ExperimentConfig::from_json(&text)
                    .with_context(|| format!("parsing config {}", p.display()))?
            }
            None => ExperimentConfig::default(),
        };
        let o = self;
        apply!(cfg, o; points, partition, a, b, n, add_zero, method, order_min, order_max,
            xi, max_steps, symmetric, out);
        if o.order.is_some() {
            cfg.order = o.order;
        }
        if o.delta.is_some() {
            cfg.delta = o.delta;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn finish(mut w: BufWriter<File>) -> Result<()> {
    w.flush()?;
    Ok(())
}

fn gen_points(cfg: &ExperimentConfig) -> Result<()> {
    let pts = cfg.generated_points()?;
    let mut w = create(&cfg.out, "points.csv")?;
    writeln!(w, "x")?;
    for p in &pts {
        writeln!(w, "{}", csv_num(*p))?;
    }
    finish(w)?;
    println!(
        "wrote {} points to {}",
        pts.len(),
        cfg.out.join("points.csv").display()
    );
    Ok(())
}

fn fit(cfg: &ExperimentConfig) -> Result<()> {
    let out = run_fit(cfg).context("fit failed")?;
    let mut w = create(&cfg.out, "model.json")?;
    w.write_all(out.model.to_json()?.as_bytes())?;
    writeln!(w)?;
    finish(w)?;
    let mut w = create(&cfg.out, "report.json")?;
    serde_json::to_writer_pretty(&mut w, &out.report)?;
    writeln!(w)?;
    finish(w)?;
    let mut w = create(&cfg.out, "error_curve.csv")?;
    write_error_curve(&out.model, CURVE_POINTS, &mut w)?;
    finish(w)?;
    let rep = &out.report;
    println!(
        "{} order {}: eps_total = {:.4e} (x = {:.6e}), eps(0) = {:.4e}{}",
        cfg.method,
        out.order,
        rep.eps_total,
        rep.argmax_total,
        rep.eps_at_zero,
        if rep.valid {
            ""
        } else {
            ", real poles in [-1, 1]"
        }
    );
    Ok(())
}

fn sweep(cfg: &ExperimentConfig) -> Result<()> {
    let rows = run_sweep(cfg)?;
    let mut w = create(&cfg.out, "sweep.csv")?;
    write_sweep_csv(&rows, &mut w)?;
    finish(w)?;
    println!(
        "wrote {} rows to {}",
        rows.len(),
        cfg.out.join("sweep.csv").display()
    );
    Ok(())
}

fn table(id: u8, cfg: &ExperimentConfig) -> Result<()> {
    let report = reproduce_table(id)?;
    print!("{}", report.render());
    let mut w = create(&cfg.out, &format!("table{id}.csv"))?;
    report.write_csv(&mut w)?;
    finish(w)
}

fn iterate(cfg: &ExperimentConfig) -> Result<()> {
    let (model, trace) = run_iterate(cfg).context("iteration failed")?;
    let mut w = create(&cfg.out, "trace.csv")?;
    trace.write_csv(&mut w)?;
    finish(w)?;
    let mut w = create(&cfg.out, "model.json")?;
    w.write_all(model.to_json()?.as_bytes())?;
    writeln!(w)?;
    finish(w)?;
    for msg in &trace.warnings {
        eprintln!("warning: {msg}");
    }
    let last = trace.records.last().expect("trace has step 0");
    println!(
        "{} after step {}: eps_total = {:.4e}",
        if trace.converged {
            "converged"
        } else {
            "stopped"
        },
        last.step,
        last.eps_total
    );
    Ok(())
}

fn bounds(cfg: &ExperimentConfig) -> Result<()> {
    let mut w = create(&cfg.out, "bounds.csv")?;
    let names: Vec<&str> = BoundKind::ALL.iter().map(|k| k.name()).collect();
    writeln!(w, "order,{}", names.join(","))?;
    for n in cfg.order_min..=cfg.order_max {
        let vals: Vec<String> = BoundKind::ALL
            .iter()
            .map(|k| csv_num(bound_or_nan(*k, n)))
            .collect();
        writeln!(w, "{n},{}", vals.join(","))?;
    }
    finish(w)
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("RATAPPROX_THREADS") {
        let n: usize =
            v.parse().ok().filter(|&n| n > 0).with_context(|| {
                format!("RATAPPROX_THREADS must be a positive integer, got '{v}'")
            })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    init_threads()?;
    match cli.command {
        Command::GenPoints(o) => gen_points(&o.resolve()?),
        Command::Fit(o) => fit(&o.resolve()?),
        Command::Sweep(o) => sweep(&o.resolve()?),
        Command::ReproduceTable { id, overrides } => {
            if !(2..=5).contains(&id) {
                bail!("no table {id}; choose 2, 3, 4 or 5");
            }
            table(id, &overrides.resolve()?)
        }
        Command::Iterate(o) => iterate(&o.resolve()?),
        Command::Bounds(o) => bounds(&o.resolve()?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
