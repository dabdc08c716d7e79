//! `sympred` command line: snapshots, bases and the generalization sweep.
//!
//! Exit codes: 0 ok, 2 configuration or usage error, 3 numerical failure,
//! 4 I/O or format error, 5 missing singular value gap.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::basis::{pod_loss, psd_loss, BasisMethod, PreparedBasis};
use crate::config::{Experiment, RunConfig};
use crate::integrator::{snapshot_collect, SnapshotMatrix};
use crate::io::{self, Manifest};
use crate::report;
use crate::rom::run_generalization_experiment;
use crate::spectral::singular_values;
use crate::symplectic::BasisKind;
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_GAP: i32 = 5;

pub const SNAPSHOT_FILE: &str = "snapshots.smor";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const RESOLVED_CONFIG_FILE: &str = "config.resolved.toml";
pub const REPORT_FILE: &str = "report.csv";
pub const TIMINGS_FILE: &str = "timings.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const FIGURE_DIR: &str = "figures";

#[derive(Debug, Parser)]
#[command(name = "sympred", version, about = "Symplectic model order reduction experiments")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML configuration; defaults apply to missing keys.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (overrides the configuration).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads, 0 for all cores.
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    /// Seed of the test parameter draw.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Restrict to one basis method.
    #[arg(long, global = true, value_name = "NAME")]
    pub method: Option<BasisMethod>,
    /// Basis size 2k; for `evaluate` restricts the sweep to this size.
    #[arg(long, global = true, value_name = "2K")]
    pub size: Option<usize>,
    /// Read snapshots from this container instead of the output directory.
    #[arg(long, global = true, value_name = "PATH")]
    pub snapshots: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Solve the training trajectories and write the snapshot container.
    Snapshots,
    /// Build one reduced basis from the snapshots.
    Basis,
    /// Run the generalization sweep and write the report and figure data.
    Evaluate,
    /// `snapshots` followed by `evaluate`.
    All,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Parameter { .. } | Error::Size(_) => EXIT_CONFIG,
        Error::Io(_) | Error::Format(_) => EXIT_IO,
        Error::NoSpectralGap { .. } => EXIT_GAP,
        Error::Dimension(_)
        | Error::NotSymplectic { .. }
        | Error::NotOrthonormal { .. }
        | Error::DecompositionFailure { .. }
        | Error::EmptyExtension { .. }
        | Error::Integration { .. }
        | Error::Mode(_) => EXIT_NUMERICAL,
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn resolve_config(global: &GlobalArgs) -> Result<RunConfig> {
    let mut cfg = match &global.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &global.out {
        cfg.output = out.clone();
    }
    if let Some(j) = global.jobs {
        cfg.jobs = j;
    }
    if let Some(s) = global.seed {
        cfg.design.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<()> {
    let cfg = resolve_config(&cli.global)?;
    std::fs::create_dir_all(&cfg.output)?;
    std::fs::write(cfg.output.join(RESOLVED_CONFIG_FILE), cfg.resolved()?.to_toml())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| match cli.command {
        Command::Snapshots => cmd_snapshots(&cfg).map(|_| ()),
        Command::Basis => cmd_basis(&cfg, &cli.global),
        Command::Evaluate => cmd_evaluate(&cfg, &cli.global),
        Command::All => {
            cmd_snapshots(&cfg)?;
            cmd_evaluate(&cfg, &cli.global)
        }
    })
}

/// Solves the training trajectories and writes the container and manifest.
pub fn cmd_snapshots(cfg: &RunConfig) -> Result<SnapshotMatrix> {
    let exp = cfg.experiment()?;
    let t = Instant::now();
    let snaps = snapshot_collect(&exp.design, &exp.model, exp.profile)?;
    let path = cfg.output.join(SNAPSHOT_FILE);
    let sha = io::write_snapshots(&path, &snaps)?;
    let manifest = Manifest::for_snapshots(SNAPSHOT_FILE, sha, &snaps, cfg.design.seed);
    io::write_json(&cfg.output.join(MANIFEST_FILE), &manifest)?;
    eprintln!(
        "snapshots: {} x {} in {:.2} s -> {}",
        snaps.data.nrows(),
        snaps.data.ncols(),
        t.elapsed().as_secs_f64(),
        path.display()
    );
    Ok(snaps)
}

/// Snapshots from `--snapshots`, else from the output directory when they
/// match the configuration, else freshly collected.
fn load_snapshots(cfg: &RunConfig, exp: &Experiment, explicit: Option<&Path>) -> Result<SnapshotMatrix> {
    if let Some(p) = explicit {
        return io::read_snapshots(p);
    }
    let path = cfg.output.join(SNAPSHOT_FILE);
    if path.exists() {
        let s = io::read_snapshots(&path)?;
        if s.params == exp.design.training && s.nt == exp.design.grid.nt && s.data.nrows() == 2 * exp.model.n() {
            return Ok(s);
        }
        eprintln!(
            "snapshots: {} does not match the configuration, regenerating",
            path.display()
        );
    }
    cmd_snapshots(cfg)
}

#[derive(Debug, Serialize)]
struct BasisStats {
    method: BasisMethod,
    kind: BasisKind,
    requested_size: usize,
    size: usize,
    o_v: f64,
    s_v: f64,
    pod_loss: f64,
    psd_loss: f64,
    snapshot_norm_sq: f64,
    sha256: String,
    warnings: Vec<String>,
}

pub fn cmd_basis(cfg: &RunConfig, global: &GlobalArgs) -> Result<()> {
    let method = global
        .method
        .ok_or_else(|| Error::Config("basis needs --method".into()))?;
    let size = match global.size {
        Some(s) => s,
        None => cfg
            .design
            .sweep
            .iter()
            .copied()
            .max()
            .ok_or_else(|| Error::Config("basis needs --size or a sweep".into()))?,
    };
    let exp = cfg.experiment()?;
    let snaps = load_snapshots(cfg, &exp, global.snapshots.as_deref())?;
    let x = &snaps.data;
    let prepared = PreparedBasis::new(method, x, size)?;
    let outcome = prepared.basis(size)?;
    let v = &outcome.basis;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }

    let stem = format!("basis_{method}_{size}");
    let sha = io::write_basis(&cfg.output.join(format!("{stem}.smor")), v)?;
    let stats = BasisStats {
        method,
        kind: v.kind(),
        requested_size: size,
        size: v.size(),
        o_v: v.orthonormality(),
        s_v: v.symplecticity(),
        pod_loss: pod_loss(v, x)?,
        psd_loss: psd_loss(v, x)?,
        snapshot_norm_sq: x.norm_squared(),
        sha256: sha,
        warnings: outcome.warnings.clone(),
    };
    io::write_json(&cfg.output.join(format!("{stem}.json")), &stats)?;

    let spectra = cfg.output.join(format!("spectra_{method}.csv"));
    let mut w = csv::Writer::from_path(&spectra).map_err(io::csv_error)?;
    if let Some((factors, weights)) = prepared.svd_like() {
        w.write_record(["index", "symplectic_singular_value", "weight"])
            .map_err(io::csv_error)?;
        for (i, (s, wt)) in factors.sigma().iter().zip(&weights.weights).enumerate() {
            w.write_record([(i + 1).to_string(), io::format_f64(*s), io::format_f64(*wt)])
                .map_err(io::csv_error)?;
        }
    } else {
        w.write_record(["index", "singular_value"]).map_err(io::csv_error)?;
        for (i, s) in singular_values(x).iter().enumerate() {
            w.write_record([(i + 1).to_string(), io::format_f64(*s)])
                .map_err(io::csv_error)?;
        }
    }
    w.flush()?;
    eprintln!(
        "basis: {method} 2k={} o_V={:.3e} s_V={:.3e} -> {}",
        v.size(),
        stats.o_v,
        stats.s_v,
        cfg.output.join(format!("{stem}.smor")).display()
    );
    Ok(())
}

pub fn cmd_evaluate(cfg: &RunConfig, global: &GlobalArgs) -> Result<()> {
    let mut cfg = cfg.clone();
    if let Some(m) = global.method {
        cfg.methods = vec![m];
    }
    if let Some(s) = global.size {
        cfg.design.sweep = vec![s];
    }
    cfg.validate()?;
    let exp = cfg.experiment()?;
    let snaps = load_snapshots(&cfg, &exp, global.snapshots.as_deref())?;
    let t = Instant::now();
    let mut rep = run_generalization_experiment(&exp.model, &exp.design, exp.profile, &snaps, &cfg.methods)?;
    rep.apply_drift_tolerance(cfg.tolerances.drift);
    let out = &cfg.output;
    report::write_report_csv(&out.join(REPORT_FILE), &rep)?;
    report::write_timings_csv(&out.join(TIMINGS_FILE), &rep)?;
    report::write_figures(&out.join(FIGURE_DIR), &rep, cfg.tolerances.error_clamp)?;
    report::write_summary(&out.join(SUMMARY_FILE), &rep)?;
    for m in &cfg.methods {
        let (p, n) = rep.preservation(*m);
        eprintln!("evaluate: {m:<20} preserved {p}/{n}");
    }
    eprintln!(
        "evaluate: {} cells in {:.2} s -> {}",
        rep.cells.len(),
        t.elapsed().as_secs_f64(),
        out.join(REPORT_FILE).display()
    );
    Ok(())
}
