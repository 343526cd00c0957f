//! The `ghz-lab` command line.
//!
//! Every command writes one table, as CSV (header row, LF line endings) or as
//! JSON lines, followed by a footer that echoes the full [`RunConfig`] and the
//! crate version. For CSV the footer is a block of `#` lines; for JSON it is a
//! final `{"footer": ...}` object. Nothing else goes into the output, so the
//! same config and version always give the same bytes.
//!
//! Exit status: [`EXIT_OK`], [`EXIT_FAILURE`] when a check fails,
//! [`EXIT_USAGE`] for bad arguments or an unwritable output path.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::angle::Angle;
use crate::experiment::{
    compare_with_oracle, cube_grid, estimate_correlators, ghz_paradox_report, quadrature_triple_correlation,
    run_trials, run_trials_with, uniform_grid, JointProbe, ScheduleSpec, SettingTriple,
};
use crate::lhv::Model;
use crate::oracle;
use crate::stations::{composition_check, run_distributed, DistributedOptions, Transport};
use crate::verify::{self, CheckResult, VerifyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Largest `|quad − oracle|` a compare run may show before it counts as a
/// failure.
const COMPARE_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "ghz-lab", version, about = "Local hidden-variable model of GHZ correlations")]
#[command(allow_negative_numbers = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct Common {
    /// Monte Carlo trials per setting.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    pub trials: u64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// State phase.
    #[arg(long, global = true, default_value_t = 0.0)]
    pub phi: f64,
    #[arg(long, global = true, default_value_t = 0.0)]
    pub alpha: f64,
    #[arg(long, global = true, default_value_t = 0.0)]
    pub beta: f64,
    #[arg(long, global = true, default_value_t = 0.0)]
    pub gamma: f64,
    /// `N` for N points on [-π, π), or `start:end:count` (endpoints included).
    #[arg(long, global = true)]
    pub delta_grid: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = MethodArg::Mc)]
    pub method: MethodArg,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write the table here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = TransportArg::Channels)]
    pub transport: TransportArg,
    /// Read every angle (including the grid) in degrees.
    #[arg(long, global = true)]
    pub degrees: bool,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "name")]
pub enum Command {
    /// Run the invariant battery.
    Verify {
        /// Only spot-check the triple product at this Δ (plus Φ).
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Triple correlator over a grid of Δ.
    Sweep,
    /// The four GHZ setting triples and the Mermin combination.
    Paradox,
    /// Model against the state-vector oracle on a cube of settings.
    Compare {
        /// Points per axis.
        #[arg(long, default_value_t = 5)]
        grid: usize,
    },
    /// Distributed run with traffic audit and composition report.
    Stations {
        /// Write every frame sent during the run to this file.
        #[arg(long)]
        traffic_dump: Option<PathBuf>,
        #[arg(long, default_value_t = 100_000)]
        composition_samples: u64,
    },
    /// Raw trial records.
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodArg {
    Mc,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportArg {
    Channels,
    Sockets,
}

impl From<TransportArg> for Transport {
    fn from(t: TransportArg) -> Self {
        match t {
            TransportArg::Channels => Transport::Channels,
            TransportArg::Sockets => Transport::Sockets,
        }
    }
}

/// Everything needed to reproduce a run; echoed in every footer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(flatten)]
    pub common: Common,
}

impl From<Cli> for RunConfig {
    fn from(c: Cli) -> Self {
        RunConfig {
            command: c.command,
            common: c.common,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Run(String),
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn run_err(e: impl std::fmt::Display) -> CliError {
    CliError::Run(e.to_string())
}

impl Common {
    fn angle(&self, x: f64, what: &str) -> Result<Angle, CliError> {
        let rad = if self.degrees { x.to_radians() } else { x };
        Angle::new(rad).map_err(|e| usage(format!("--{what}: {e}")))
    }

    fn phi(&self) -> Result<Angle, CliError> {
        self.angle(self.phi, "phi")
    }

    fn settings(&self) -> Result<[Angle; 3], CliError> {
        Ok([
            self.angle(self.alpha, "alpha")?,
            self.angle(self.beta, "beta")?,
            self.angle(self.gamma, "gamma")?,
        ])
    }

    fn trials(&self) -> Result<u64, CliError> {
        if self.trials == 0 {
            return Err(usage("--trials must be at least 1"));
        }
        Ok(self.trials)
    }

    /// Δ values in radians, not canonicalized (so `π` stays `π`).
    fn delta_grid(&self, default_points: usize) -> Result<Vec<f64>, CliError> {
        let scale = if self.degrees { PI / 180.0 } else { 1.0 };
        let Some(spec) = self.delta_grid.as_deref() else {
            return Ok(uniform_grid(default_points).into_iter().map(Angle::value).collect());
        };
        let bad = || usage(format!("--delta-grid {spec:?}: expected N or start:end:count"));
        let parts: Vec<&str> = spec.split(':').collect();
        match parts.as_slice() {
            [n] => {
                let n: usize = n.trim().parse().map_err(|_| bad())?;
                if n == 0 {
                    return Err(bad());
                }
                Ok(uniform_grid(n).into_iter().map(Angle::value).collect())
            }
            [a, b, n] => {
                let a: f64 = a.trim().parse().map_err(|_| bad())?;
                let b: f64 = b.trim().parse().map_err(|_| bad())?;
                let n: usize = n.trim().parse().map_err(|_| bad())?;
                if n == 0 || !a.is_finite() || !b.is_finite() {
                    return Err(bad());
                }
                Ok((0..n)
                    .map(|k| {
                        let t = if n == 1 { 0.0 } else { k as f64 / (n - 1) as f64 };
                        (a + (b - a) * t) * scale
                    })
                    .collect())
            }
            _ => Err(bad()),
        }
    }
}

/// A finished command: rows, footer summary and exit status.
struct Table<R> {
    rows: Vec<R>,
    summary: BTreeMap<String, Value>,
    status: i32,
}

fn emit<R: Serialize>(cfg: &RunConfig, table: &Table<R>, out: &mut dyn Write) -> Result<(), CliError> {
    let io = |e: io::Error| run_err(format!("writing output: {e}"));
    let footer = json!({
        "tool": "ghz-lab",
        "version": VERSION,
        "config": cfg,
        "summary": table.summary,
    });
    match cfg.common.format {
        Format::Csv => {
            {
                let mut w = csv::WriterBuilder::new()
                    .terminator(csv::Terminator::Any(b'\n'))
                    .from_writer(&mut *out);
                for r in &table.rows {
                    w.serialize(r).map_err(run_err)?;
                }
                w.flush().map_err(io)?;
            }
            writeln!(out, "# ghz-lab {VERSION}").map_err(io)?;
            writeln!(out, "# config {}", footer["config"]).map_err(io)?;
            for (k, v) in &table.summary {
                writeln!(out, "# {k} {v}").map_err(io)?;
            }
        }
        Format::Json => {
            for r in &table.rows {
                let line = serde_json::to_string(r).map_err(run_err)?;
                writeln!(out, "{line}").map_err(io)?;
            }
            writeln!(out, "{}", json!({ "footer": footer })).map_err(io)?;
        }
    }
    out.flush().map_err(io)
}

#[derive(Debug, Serialize)]
struct VerifyRow {
    name: String,
    passed: bool,
    value: f64,
    threshold: f64,
    detail: String,
}

impl From<CheckResult> for VerifyRow {
    fn from(c: CheckResult) -> Self {
        VerifyRow {
            name: c.name,
            passed: c.passed,
            value: c.value,
            threshold: c.threshold,
            detail: c.detail,
        }
    }
}

fn cmd_verify(model: &Model, cfg: &RunConfig, delta: Option<f64>) -> Result<Table<VerifyRow>, CliError> {
    let c = &cfg.common;
    let trials = c.trials()?;
    let checks = match delta {
        Some(d) => vec![spot_check(model, c.angle(d, "delta")?, c.phi()?, trials, c.seed)?],
        None => verify::run_suite(
            model,
            // --trials sizes the Monte Carlo checks only; the KS limit is
            // pinned at the default sample count.
            &VerifyConfig {
                trials,
                star_trials: trials.min(VerifyConfig::default().star_trials),
                seed: c.seed,
                ..VerifyConfig::default()
            },
        ),
    };
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
    let mut summary = BTreeMap::new();
    summary.insert("checks".into(), json!(checks.len()));
    summary.insert("failed".into(), json!(failed));
    summary.insert("model".into(), json!(model.name));
    Ok(Table {
        status: if failed.is_empty() { EXIT_OK } else { EXIT_FAILURE },
        rows: checks.into_iter().map(VerifyRow::from).collect(),
        summary,
    })
}

/// Triple product at one setting. At `Δ_eff ∈ {0, π}` every trial must give
/// `cos Δ_eff`; elsewhere the mean must sit within five standard errors.
fn spot_check(model: &Model, delta: Angle, phi: Angle, trials: u64, seed: u64) -> Result<CheckResult, CliError> {
    let schedule = ScheduleSpec::fixed(delta, Angle::ZERO, Angle::ZERO);
    let eff = SettingTriple::new(delta, Angle::ZERO, Angle::ZERO, phi).effective_delta().value();
    let records = run_trials_with(model, &schedule, trials, phi, seed).map_err(run_err)?;
    let report = estimate_correlators(&records).map_err(run_err)?;
    let expected = eff.cos();
    let exact = eff == 0.0 || eff.abs() == PI;
    let (value, threshold, passed, detail) = if exact {
        let want = expected.round() as i8;
        let bad = records.iter().filter(|r| r.product() != want).count();
        (
            bad as f64,
            0.0,
            bad == 0,
            format!("triple {} over {trials} trials, every product must be {want}", report.triple),
        )
    } else {
        let gap = (report.triple - expected).abs();
        let bound = 5.0 * report.triple_stderr.max(1.0 / (trials as f64).sqrt());
        (
            gap,
            bound,
            gap < bound,
            format!("triple {} vs cos(delta_eff) {expected}", report.triple),
        )
    };
    Ok(CheckResult {
        name: "spot_check".into(),
        passed,
        value,
        threshold,
        detail,
    })
}

#[derive(Debug, Serialize)]
pub struct SweepRow {
    pub delta: f64,
    pub mc: Option<f64>,
    pub quad: f64,
    pub oracle: f64,
    pub stderr: Option<f64>,
    pub n: u64,
}

fn cmd_sweep(cfg: &RunConfig) -> Result<Table<SweepRow>, CliError> {
    let c = &cfg.common;
    let phi = c.phi()?;
    let grid = c.delta_grid(verify::LAW_GRID)?;
    let trials = c.trials()?;
    let mut rows = Vec::with_capacity(grid.len());
    for &d in &grid {
        let delta = Angle::wrap(d);
        let eff = SettingTriple::new(delta, Angle::ZERO, Angle::ZERO, phi).effective_delta();
        let quad = quadrature_triple_correlation(eff).map_err(run_err)?;
        let oracle = oracle::ghz_triple(delta, Angle::ZERO, Angle::ZERO, phi).map_err(run_err)?;
        let (mc, stderr, n) = match c.method {
            MethodArg::Mc => {
                let recs = run_trials(&ScheduleSpec::fixed(delta, Angle::ZERO, Angle::ZERO), trials, phi, c.seed)
                    .map_err(run_err)?;
                let r = estimate_correlators(&recs).map_err(run_err)?;
                (Some(r.triple), Some(r.triple_stderr), trials)
            }
            MethodArg::Quadrature => (None, None, 0),
        };
        rows.push(SweepRow {
            delta: d,
            mc,
            quad,
            oracle,
            stderr,
            n,
        });
    }
    let max_quad_err = rows
        .iter()
        .map(|r| (r.quad - (r.delta + phi.value()).cos()).abs())
        .fold(0.0, f64::max);
    let max_oracle_gap = rows.iter().map(|r| (r.quad - r.oracle).abs()).fold(0.0, f64::max);
    let mut summary = BTreeMap::new();
    summary.insert("points".into(), json!(rows.len()));
    summary.insert("max_abs_quad_minus_cos".into(), json!(max_quad_err));
    summary.insert("max_abs_quad_minus_oracle".into(), json!(max_oracle_gap));
    if c.method == MethodArg::Mc {
        let max_z = rows
            .iter()
            .filter_map(|r| Some(((r.mc? - r.quad).abs(), r.stderr?)))
            // Rows with every product equal have zero stderr; use 1/√N there.
            .map(|(gap, se)| gap / se.max(1.0 / (trials as f64).sqrt()))
            .fold(0.0, f64::max);
        summary.insert("max_mc_z_score".into(), json!(max_z));
    }
    Ok(Table {
        rows,
        summary,
        status: EXIT_OK,
    })
}

#[derive(Debug, Serialize)]
struct ParadoxCsvRow {
    label: String,
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta_eff: f64,
    product_mean: f64,
    stderr: f64,
    constant_product: Option<i8>,
    oracle: f64,
    n: u64,
}

fn cmd_paradox(cfg: &RunConfig) -> Result<Table<ParadoxCsvRow>, CliError> {
    let c = &cfg.common;
    let report = ghz_paradox_report(c.phi()?, c.trials()?, c.seed).map_err(run_err)?;
    let rows = report
        .rows
        .iter()
        .map(|r| ParadoxCsvRow {
            label: r.label.clone(),
            alpha: r.settings.alpha.value(),
            beta: r.settings.beta.value(),
            gamma: r.settings.gamma.value(),
            delta_eff: r.delta_eff,
            product_mean: r.product_mean,
            stderr: r.stderr,
            constant_product: r.constant_product,
            oracle: r.oracle,
            n: r.n_trials,
        })
        .collect();
    let mut summary = BTreeMap::new();
    summary.insert("mermin_model".into(), json!(report.mermin_model));
    summary.insert("mermin_oracle".into(), json!(report.mermin_oracle));
    summary.insert("classical_bound".into(), json!(report.classical_bound));
    summary.insert("weak_products".into(), json!(report.weak_products));
    summary.insert("narrative".into(), json!(report.narrative));
    Ok(Table {
        rows,
        summary,
        status: EXIT_OK,
    })
}

fn cmd_compare(cfg: &RunConfig, grid: usize) -> Result<Table<crate::experiment::ComparisonRow>, CliError> {
    let c = &cfg.common;
    if grid == 0 {
        return Err(usage("--grid must be at least 1"));
    }
    let probe = JointProbe {
        angles: c.settings()?,
        n_trials: c.trials()?,
        seed: c.seed,
    };
    let table = compare_with_oracle(&cube_grid(grid), c.phi()?, Some(probe)).map_err(run_err)?;
    let mut summary = BTreeMap::new();
    summary.insert("max_discrepancy".into(), json!(table.max_discrepancy));
    summary.insert("tolerance".into(), json!(COMPARE_TOL));
    if let Some(j) = &table.joint {
        summary.insert(
            "joint".into(),
            json!({
                "settings": [j.settings.alpha.value(), j.settings.beta.value(), j.settings.gamma.value()],
                "outcomes": j.outcomes,
                "model": j.model,
                "oracle": j.oracle,
                "total_variation": j.total_variation,
                "n": j.n_trials,
            }),
        );
    }
    Ok(Table {
        status: if table.max_discrepancy < COMPARE_TOL { EXIT_OK } else { EXIT_FAILURE },
        rows: table.rows,
        summary,
    })
}

#[derive(Debug, Serialize)]
pub struct StationsRow {
    pub transport: String,
    pub n: u64,
    pub delta_a: f64,
    pub delta_b: f64,
    pub delta_c: f64,
    pub single_a: f64,
    pub single_b: f64,
    pub single_c: f64,
    pub pair_ab: f64,
    pub pair_bc: f64,
    pub pair_ca: f64,
    pub triple: f64,
    pub triple_stderr: f64,
    pub matches_reference: bool,
    pub audit_passed: bool,
    pub audit_frames: u64,
    pub composition_delta1: f64,
    pub composition_delta2: f64,
    pub composition_agreement: f64,
    pub composition_max_gap: f64,
    pub composition_triple: f64,
    pub composition_reference: f64,
    pub composition_gap: f64,
}

/// Two-chart layout: A at the fiducial chart, B at `Δ_eff`, C on `sign(η)`
/// (its setting `γ` is delivered and ignored). The composition report then
/// asks what happens if A used `α` and B the rest of `Δ_eff` instead.
fn cmd_stations(
    cfg: &RunConfig,
    traffic_dump: Option<&PathBuf>,
    composition_samples: u64,
) -> Result<Table<StationsRow>, CliError> {
    let c = &cfg.common;
    let [alpha, beta, gamma] = c.settings()?;
    let phi = c.phi()?;
    let trials = c.trials()?;
    let eff = SettingTriple::new(alpha, beta, gamma, phi).effective_delta().angle();
    let settings = [Angle::ZERO, eff, gamma];
    let transport = Transport::from(c.transport);
    let run = run_distributed(
        settings,
        trials,
        c.seed,
        transport,
        &DistributedOptions {
            audit: true,
            keep_frames: traffic_dump.is_some(),
            fault: None,
        },
    )
    .map_err(run_err)?;
    let log = run.traffic.as_ref().expect("audit was requested");
    let audit = log.audit(settings);
    if let Some(path) = traffic_dump {
        log.dump(path)
            .map_err(|e| usage(format!("--traffic-dump {}: {e}", path.display())))?;
    }
    let reference = run_trials(&ScheduleSpec::fixed(alpha, beta, gamma), trials, phi, c.seed).map_err(run_err)?;
    let matches_reference = reference.len() == run.outcomes.len()
        && reference.iter().zip(&run.outcomes).all(|(r, o)| r.outcomes == *o);
    let rest = beta + gamma + phi;
    let comp = composition_check(alpha, rest, composition_samples.max(1), c.seed).map_err(run_err)?;
    let r = &run.report;
    let row = StationsRow {
        transport: transport.to_string(),
        n: r.n_trials,
        delta_a: settings[0].value(),
        delta_b: settings[1].value(),
        delta_c: settings[2].value(),
        single_a: r.singles[0],
        single_b: r.singles[1],
        single_c: r.singles[2],
        pair_ab: r.pairs[0],
        pair_bc: r.pairs[1],
        pair_ca: r.pairs[2],
        triple: r.triple,
        triple_stderr: r.triple_stderr,
        matches_reference,
        audit_passed: audit.passed,
        audit_frames: audit.frames,
        composition_delta1: comp.delta1,
        composition_delta2: comp.delta2,
        composition_agreement: comp.pointwise_agreement,
        composition_max_gap: comp.max_pointwise_gap,
        composition_triple: comp.station_triple,
        composition_reference: comp.reference_triple,
        composition_gap: comp.correlator_gap,
    };
    let mut summary = BTreeMap::new();
    summary.insert("audit_violations".into(), json!(audit.violations));
    summary.insert(
        "station_c".into(),
        json!("station C answers sign(eta) and never reads its setting"),
    );
    summary.insert("composition_samples".into(), json!(comp.n_samples));
    Ok(Table {
        status: if audit.passed && matches_reference { EXIT_OK } else { EXIT_FAILURE },
        rows: vec![row],
        summary,
    })
}

#[derive(Debug, Serialize)]
pub struct SampleRow {
    pub index: u64,
    pub omega: f64,
    pub eta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub phi: f64,
    pub delta_eff: f64,
    pub s_a: i8,
    pub s_b: i8,
    pub s_c: i8,
    pub region: String,
}

fn cmd_sample(cfg: &RunConfig) -> Result<Table<SampleRow>, CliError> {
    let c = &cfg.common;
    let [a, b, g] = c.settings()?;
    let records = run_trials(&ScheduleSpec::fixed(a, b, g), c.trials()?, c.phi()?, c.seed).map_err(run_err)?;
    let rows = records
        .into_iter()
        .map(|r| SampleRow {
            index: r.index,
            omega: r.hidden.omega.value(),
            eta: r.hidden.eta.value(),
            alpha: r.settings.alpha.value(),
            beta: r.settings.beta.value(),
            gamma: r.settings.gamma.value(),
            phi: r.settings.phi.value(),
            delta_eff: r.settings.effective_delta().value(),
            s_a: r.outcomes[0],
            s_b: r.outcomes[1],
            s_c: r.outcomes[2],
            region: r.region.to_string(),
        })
        .collect::<Vec<_>>();
    let mut summary = BTreeMap::new();
    summary.insert("records".into(), json!(rows.len()));
    Ok(Table {
        rows,
        summary,
        status: EXIT_OK,
    })
}

fn execute(model: &Model, cfg: &RunConfig, out: &mut dyn Write) -> Result<i32, CliError> {
    macro_rules! done {
        ($t:expr) => {{
            let t = $t;
            emit(cfg, &t, out)?;
            Ok(t.status)
        }};
    }
    match &cfg.command {
        Command::Verify { delta } => done!(cmd_verify(model, cfg, *delta)?),
        Command::Sweep => done!(cmd_sweep(cfg)?),
        Command::Paradox => done!(cmd_paradox(cfg)?),
        Command::Compare { grid } => done!(cmd_compare(cfg, *grid)?),
        Command::Stations {
            traffic_dump,
            composition_samples,
        } => done!(cmd_stations(cfg, traffic_dump.as_ref(), *composition_samples)?),
        Command::Sample => done!(cmd_sample(cfg)?),
    }
}

/// Runs one invocation against `model` and returns the exit status.
/// `verify` is the only command that uses `model`; the rest always run the
/// reference construction.
pub fn run_with_model<I, T>(model: &Model, args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let cfg = RunConfig::from(cli);
    let result = match &cfg.common.out {
        Some(path) => match File::create(path) {
            Ok(f) => {
                let mut w = BufWriter::new(f);
                execute(model, &cfg, &mut w)
            }
            Err(e) => Err(usage(format!("--out {}: {e}", path.display()))),
        },
        None => execute(model, &cfg, stdout),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Usage(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            EXIT_USAGE
        }
        Err(CliError::Run(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            EXIT_FAILURE
        }
    }
}

pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with_model(&Model::REFERENCE, args, stdout, stderr)
}

/// Δ values a `--delta-grid` spec expands to, in radians.
pub fn grid_values(spec: Option<&str>, degrees: bool) -> Result<Vec<f64>, String> {
    let common = Common {
        trials: 1,
        seed: 0,
        phi: 0.0,
        alpha: 0.0,
        beta: 0.0,
        gamma: 0.0,
        delta_grid: spec.map(str::to_string),
        method: MethodArg::Mc,
        format: Format::Csv,
        out: None,
        transport: TransportArg::Channels,
        degrees,
    };
    common.delta_grid(verify::LAW_GRID).map_err(|e| e.to_string())
}
