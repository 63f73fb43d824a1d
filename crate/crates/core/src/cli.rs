//! Command-line front end.
//!
//! Scans and verification runs emit CSV (default) or JSON; single-unitary
//! reports emit JSON. With `--out`, the output is written to that path and
//! a run manifest is appended to `manifest.jsonl` beside it.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::estimators::{
    concentration_probe, first_moment_y, mc_haar_mean_igp, mc_igp, mc_moment_y, mc_orthogonal_fourth_moments,
    mc_variance_normalized_igp, orthogonal_fourth_moment_closed, second_moment_y_asymptotic,
    spectrum_independence_check, variance_normalized_analytic, EstimatorRecord, MCEstimate, McConfig, MomentIndices,
};
use crate::igp::{
    haar_mean_igp, igp_at_purity, igp_avg_hs, igp_avg_uniform, igp_max, igp_normalized, igp_pure,
    make_pauli_z_unitary, trace_sq, PhaseProfile,
};
use crate::matrix::{MatrixFile, Tolerances, UnitaryMatrix};
use crate::protocol::{protocol_at_purity, run_fidelity_protocol, PROTOCOL_RESIDUAL_BOUND};
use crate::sampling::{haar_orthogonal, haar_unitary, RngStream, SpectrumMode};
use crate::state::check_purity;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Second moments below this dimension are reported without a target.
pub const SECOND_MOMENT_MIN_DIM: usize = 32;

#[derive(Debug, Clone, Parser)]
#[command(name = "igplab", version, about = "Imaginarity-generating power of unitaries: closed forms and Monte Carlo checks")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Master seed for every random draw.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Number of worker streams [default: available parallelism].
    #[arg(long, global = true)]
    pub streams: Option<u32>,
    /// Largest tolerated |z| before a check counts as failed.
    #[arg(long = "z-gate", global = true, default_value_t = 4.0)]
    pub z_gate: f64,
    /// Write output here and append a manifest to manifest.jsonl beside it.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Output format [default: csv for scans and verify, json otherwise].
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Closed-form report for one unitary.
    Analyze(AnalyzeArgs),
    /// Monte Carlo verification of a closed form over a grid.
    Verify(VerifyArgs),
    /// Variance of the normalized IGP against 4/d^4 + 64/d^6.
    VarianceScan(VarianceScanArgs),
    /// Fraction of Haar unitaries with normalized IGP above 1 - 3/d^(2/3).
    ConcentrationScan(ConcentrationScanArgs),
    /// Simulate the fidelity protocol for one unitary.
    Protocol(ProtocolArgs),
}

/// Exactly one unitary source.
#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct SourceArgs {
    /// JSON matrix file {"dim", "re", "im"}.
    #[arg(long, value_name = "FILE")]
    pub matrix: Option<PathBuf>,
    /// Generalized Pauli-Z diag(exp(i pi j m / d)).
    #[arg(long = "pauli-z", num_args = 2, value_names = ["D", "M"], allow_negative_numbers = true)]
    pub pauli_z: Option<Vec<i64>>,
    /// Haar-random unitary of dimension D drawn from --seed.
    #[arg(long, value_name = "D")]
    pub haar: Option<usize>,
    /// Haar-random orthogonal matrix of dimension D drawn from --seed.
    #[arg(long, value_name = "D")]
    pub orthogonal: Option<usize>,
    /// JSON phase list [theta_1, ...] or {"thetas": [...]}; builds diag(exp(i theta)).
    #[arg(long = "phase-profile", value_name = "FILE")]
    pub phase_profile: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Purity of the real input states.
    #[arg(long)]
    pub purity: Option<f64>,
    /// Matrix file with a unitary V; also report the IGP relative to the basis V|i>.
    #[arg(long, value_name = "FILE")]
    pub basis: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ProtocolArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Also rescale the inferred IGP to this purity.
    #[arg(long)]
    pub purity: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Check {
    /// Purity-constrained IGP against direct state sampling.
    Thm1,
    /// Haar mean of the IGP.
    Thm3,
    /// Moments of |Tr(U^dag U*)|^2.
    Moments,
    /// Orthogonal fourth moment.
    #[value(name = "appendixA")]
    AppendixA,
    /// Fidelity protocol identity.
    Protocol,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub check: Check,
    /// Dimension grid, e.g. 2,4 or 2..16
    /// [default: 2,3,4,8; moments 2,8,32,64; appendixA 3,5,8; protocol 2,4,8,16].
    #[arg(long)]
    pub d: Option<String>,
    /// Purity grid; `min` is 1/d and `mid` is (1 + 1/d)/2.
    #[arg(long, default_value = "min,mid,1")]
    pub purity: String,
    /// Samples per grid point (unitaries per d for protocol).
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    /// thm1: Haar unitaries per (d, purity) point.
    #[arg(long, default_value_t = 5)]
    pub unitaries: usize,
    /// moments: orders to estimate.
    #[arg(long, default_value = "1,2")]
    pub order: String,
    /// appendixA: random index tuples per d, on top of two fixed cases.
    #[arg(long, default_value_t = 20)]
    pub tuples: usize,
}

#[derive(Debug, Clone, Args)]
pub struct VarianceScanArgs {
    /// Dimension grid, each d >= 4.
    #[arg(long, default_value = "8,16,32,64")]
    pub d: String,
    /// Haar unitaries per d.
    #[arg(long, default_value_t = 5000)]
    pub n: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ConcentrationScanArgs {
    /// Dimension grid, each d >= 2.
    #[arg(long, default_value = "8,16,32,64")]
    pub d: String,
    /// Haar unitaries per d.
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
}

/// Rendered output of one command and whether all of its gates passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub passed: bool,
}

/// One verification result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyRow {
    pub op: String,
    pub d: usize,
    pub purity: Option<f64>,
    pub label: String,
    pub oracle: Option<f64>,
    pub estimate: f64,
    pub stderr: f64,
    pub z: Option<f64>,
    pub n: usize,
    pub seed: u64,
    pub streams: usize,
    pub pass: bool,
}

impl VerifyRow {
    fn from_estimate(op: &str, d: usize, purity: Option<f64>, label: String, est: &MCEstimate, oracle: Option<f64>, gate: f64) -> Self {
        let z = oracle.map(|o| est.z(o));
        Self {
            op: op.to_string(),
            d,
            purity,
            label,
            oracle,
            estimate: est.mean,
            stderr: est.stderr,
            z,
            n: est.n,
            seed: est.seed,
            streams: est.streams,
            pass: z.is_none_or(|z| z.abs() <= gate),
        }
    }

    fn to_record(&self) -> EstimatorRecord {
        let est = MCEstimate { mean: self.estimate, stderr: self.stderr, n: self.n, seed: self.seed, streams: self.streams };
        let mut r = EstimatorRecord::new(
            &self.op,
            json!({ "d": self.d, "purity": self.purity, "label": self.label }),
            &est,
            self.oracle,
        );
        r.z = self.z;
        r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceRow {
    pub d: usize,
    pub var_mc: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub var_analytic: f64,
    pub n: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationRow {
    pub d: usize,
    pub threshold: f64,
    pub fraction: f64,
    pub levy_bound: f64,
    pub n: usize,
    pub seed: u64,
}

/// Parse `2,4`, `2..16` (inclusive) or a mix such as `2,4..6`.
pub fn parse_dim_grid(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for token in text.split(',').map(str::trim) {
        if token.is_empty() {
            return Err(grid_err(text, "empty entry"));
        }
        if let Some((lo, hi)) = token.split_once("..") {
            let lo: usize = lo.trim().parse().map_err(|_| grid_err(text, token))?;
            let hi: usize = hi.trim().parse().map_err(|_| grid_err(text, token))?;
            if lo > hi {
                return Err(grid_err(text, token));
            }
            out.extend(lo..=hi);
        } else {
            out.push(token.parse().map_err(|_| grid_err(text, token))?);
        }
    }
    Ok(out)
}

fn grid_err(text: &str, token: &str) -> Error {
    Error::Parse { field: "grid".into(), line: None, message: format!("cannot parse `{token}` in `{text}`") }
}

/// A purity grid entry, resolved per dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PurityPoint {
    Min,
    Mid,
    Value(f64),
}

impl PurityPoint {
    pub fn resolve(&self, d: usize) -> f64 {
        let inv = 1.0 / d as f64;
        match *self {
            PurityPoint::Min => inv,
            PurityPoint::Mid => (1.0 + inv) / 2.0,
            PurityPoint::Value(p) => p,
        }
    }
}

pub fn parse_purity_grid(text: &str) -> Result<Vec<PurityPoint>> {
    text.split(',')
        .map(str::trim)
        .map(|t| match t {
            "min" => Ok(PurityPoint::Min),
            "mid" => Ok(PurityPoint::Mid),
            _ => t.parse::<f64>().map(PurityPoint::Value).map_err(|_| grid_err(text, t)),
        })
        .collect()
}

fn parse_orders(text: &str) -> Result<Vec<u32>> {
    text.split(',').map(str::trim).map(|t| t.parse().map_err(|_| grid_err(text, t))).collect()
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn read_unitary_file(path: &Path) -> Result<UnitaryMatrix> {
    let m = MatrixFile::from_json(&read_file(path)?)?.to_matrix()?;
    UnitaryMatrix::new(m, &Tolerances::default())
}

fn read_phase_profile(path: &Path) -> Result<PhaseProfile> {
    #[derive(serde::Deserialize)]
    #[serde(untagged)]
    enum Wire {
        List(Vec<f64>),
        Object { thetas: Vec<f64> },
    }
    let wire: Wire = serde_json::from_str(&read_file(path)?)
        .map_err(|e| Error::Parse { field: "thetas".into(), line: Some(e.line()), message: e.to_string() })?;
    PhaseProfile::new(match wire {
        Wire::List(t) | Wire::Object { thetas: t } => t,
    })
}

/// Build the selected unitary and a short description of its origin.
pub fn resolve_source(src: &SourceArgs, seed: u64) -> Result<(UnitaryMatrix, serde_json::Value)> {
    if let Some(path) = &src.matrix {
        return Ok((read_unitary_file(path)?, json!({ "matrix": path.display().to_string() })));
    }
    if let Some(dm) = &src.pauli_z {
        let d = usize::try_from(dm[0]).map_err(|_| Error::InvalidArgument(format!("dimension {} is negative", dm[0])))?;
        return Ok((make_pauli_z_unitary(d, dm[1])?.unitary, json!({ "pauli_z": { "d": d, "m": dm[1] } })));
    }
    let mut rng = RngStream::new(seed, 0).rng();
    if let Some(d) = src.haar {
        return Ok((haar_unitary(d, &mut rng)?, json!({ "haar": { "d": d, "seed": seed } })));
    }
    if let Some(d) = src.orthogonal {
        return Ok((haar_orthogonal(d, &mut rng)?.to_unitary(), json!({ "orthogonal": { "d": d, "seed": seed } })));
    }
    if let Some(path) = &src.phase_profile {
        let profile = read_phase_profile(path)?;
        let u = UnitaryMatrix::diagonal_phases(profile.thetas())?;
        return Ok((
            u,
            json!({ "phase_profile": path.display().to_string(), "constraint_residual": profile.constraint_residual() }),
        ));
    }
    Err(Error::InvalidArgument("no unitary source given".into()))
}

fn analyze(args: &AnalyzeArgs, g: &GlobalArgs) -> Result<serde_json::Value> {
    let (u, source) = resolve_source(&args.source, g.seed)?;
    let d = u.dim();
    let pure = igp_pure(&u).value;
    let max = if d >= 1 { igp_max(d)? } else { 0.0 };
    let at_purity = args.purity.map(|p| igp_at_purity(&u, p)).transpose()?.map(|v| v.value);
    let protocol = if d >= 2 {
        let r = run_fidelity_protocol(&u)?;
        json!({ "fidelity": r.fidelity, "trace_sq": r.trace_sq, "igp_pure_inferred": r.igp_pure_inferred, "residual": r.residual })
    } else {
        serde_json::Value::Null
    };
    let basis = match &args.basis {
        Some(path) => {
            let v = read_unitary_file(path)?;
            let rotated = v.adjoint().compose(&u)?.compose(&v)?;
            json!({
                "file": path.display().to_string(),
                "trace_sq": trace_sq(&rotated),
                "igp_pure": igp_pure(&rotated).value,
                "igp_normalized": igp_normalized(&rotated),
                "igp_at_purity": args.purity.map(|p| igp_at_purity(&rotated, p)).transpose()?.map(|v| v.value),
            })
        }
        None => serde_json::Value::Null,
    };
    Ok(json!({
        "tool_version": TOOL_VERSION,
        "seed": g.seed,
        "source": source,
        "dim": d,
        "trace_sq": trace_sq(&u),
        "igp_pure": pure,
        "purity": args.purity,
        "igp_at_purity": at_purity,
        "igp_avg_uniform": igp_avg_uniform(&u).value,
        "igp_avg_hs": igp_avg_hs(&u).value,
        "igp_normalized": igp_normalized(&u),
        "igp_max": max,
        "igp_max_ratio": if max > 0.0 { pure / max } else { 0.0 },
        "protocol": protocol,
        "basis": basis,
    }))
}

fn protocol_report(args: &ProtocolArgs, g: &GlobalArgs) -> Result<serde_json::Value> {
    let (u, source) = resolve_source(&args.source, g.seed)?;
    let r = run_fidelity_protocol(&u)?;
    let at_purity = args.purity.map(|p| protocol_at_purity(&u, p)).transpose()?;
    Ok(json!({
        "tool_version": TOOL_VERSION,
        "seed": g.seed,
        "source": source,
        "result": r,
        "purity": args.purity,
        "igp_at_purity_inferred": at_purity,
    }))
}

/// Grid-point tag so that each point's streams do not depend on which
/// other points are present.
fn tag(d: usize, a: usize, b: usize) -> u64 {
    ((d as u64) << 40) | ((a as u64) << 20) | b as u64
}

fn default_dims(check: Check) -> &'static str {
    match check {
        Check::Thm1 | Check::Thm3 => "2,3,4,8",
        Check::Moments => "2,8,32,64",
        Check::AppendixA => "3,5,8",
        Check::Protocol => "2,4,8,16",
    }
}

pub fn verify_rows(args: &VerifyArgs, cfg: &McConfig, gate: f64) -> Result<Vec<VerifyRow>> {
    let dims = parse_dim_grid(args.d.as_deref().unwrap_or(default_dims(args.check)))?;
    let mut rows = Vec::new();
    match args.check {
        Check::Thm1 => {
            let purities = parse_purity_grid(&args.purity)?;
            for &d in &dims {
                for (pi, pp) in purities.iter().enumerate() {
                    let p = pp.resolve(d);
                    check_purity(d, p)?;
                    for k in 0..args.unitaries {
                        let point = cfg.fork(tag(d, pi, k));
                        let u = haar_unitary(d, &mut point.aux_rng(0))?;
                        let oracle = igp_at_purity(&u, p)?.value;
                        if *pp == PurityPoint::Min || d as f64 * p - 1.0 <= 1e-14 {
                            let e = mc_igp(&u, p, args.n, SpectrumMode::Random, &point)?;
                            rows.push(VerifyRow::from_estimate("thm1", d, Some(p), format!("u{k}/random"), &e, Some(oracle), gate));
                            continue;
                        }
                        let s = spectrum_independence_check(&u, p, args.n, &point)?;
                        for (name, e) in [("two-level", &s.two_level), ("random", &s.random)] {
                            rows.push(VerifyRow::from_estimate("thm1", d, Some(p), format!("u{k}/{name}"), e, Some(oracle), gate));
                        }
                        let diff = MCEstimate {
                            mean: s.two_level.mean - s.random.mean,
                            stderr: s.two_level.stderr.hypot(s.random.stderr),
                            n: s.two_level.n,
                            seed: cfg.seed,
                            streams: cfg.streams,
                        };
                        let mut row = VerifyRow::from_estimate("spectra", d, Some(p), format!("u{k}"), &diff, Some(0.0), gate);
                        row.z = Some(s.z);
                        row.pass = s.z.abs() <= gate;
                        rows.push(row);
                    }
                }
            }
        }
        Check::Thm3 => {
            let purities = parse_purity_grid(&args.purity)?;
            for &d in &dims {
                for (pi, pp) in purities.iter().enumerate() {
                    let p = pp.resolve(d);
                    let e = mc_haar_mean_igp(d, p, args.n, &cfg.fork(tag(d, pi, 0)))?;
                    let oracle = haar_mean_igp(d, p)?.value;
                    rows.push(VerifyRow::from_estimate("thm3", d, Some(p), "haar-mean".into(), &e, Some(oracle), gate));
                }
            }
        }
        Check::Moments => {
            let orders = parse_orders(&args.order)?;
            for &d in &dims {
                for &order in &orders {
                    let e = mc_moment_y(d, order, args.n, &cfg.fork(tag(d, order as usize, 0)))?;
                    let oracle = match order {
                        1 => Some(first_moment_y(d)),
                        _ if d >= SECOND_MOMENT_MIN_DIM => Some(second_moment_y_asymptotic(d)),
                        _ => None,
                    };
                    rows.push(VerifyRow::from_estimate("moments", d, None, format!("order{order}"), &e, oracle, gate));
                }
            }
        }
        Check::AppendixA => {
            for &d in &dims {
                let point = cfg.fork(tag(d, 0, 0));
                let mut idx = vec![MomentIndices::new(0, 0, 0, 0)];
                if d >= 2 {
                    idx.push(MomentIndices::new(0, 0, 0, 1));
                }
                let mut rng = point.aux_rng(0);
                for _ in 0..args.tuples {
                    idx.push(MomentIndices::new(rng.index(d), rng.index(d), rng.index(d), rng.index(d)));
                }
                let ests = mc_orthogonal_fourth_moments(d, &idx, args.n, &point)?;
                for (i, e) in idx.iter().zip(&ests) {
                    let oracle = orthogonal_fourth_moment_closed(d, *i)?;
                    let label = format!("{}-{}-{}-{}", i.k, i.i, i.p, i.m);
                    rows.push(VerifyRow::from_estimate("appendixA", d, None, label, e, Some(oracle), gate));
                }
            }
        }
        Check::Protocol => {
            for &d in &dims {
                let mut rng = cfg.fork(tag(d, 0, 0)).aux_rng(0);
                let mut worst = 0.0f64;
                for _ in 0..args.n {
                    let r = run_fidelity_protocol(&haar_unitary(d, &mut rng)?)?;
                    worst = worst.max(r.residual);
                }
                rows.push(VerifyRow {
                    op: "protocol".into(),
                    d,
                    purity: None,
                    label: "max-residual".into(),
                    oracle: Some(0.0),
                    estimate: worst,
                    stderr: 0.0,
                    z: None,
                    n: args.n,
                    seed: cfg.seed,
                    streams: cfg.streams,
                    pass: worst <= PROTOCOL_RESIDUAL_BOUND,
                });
            }
        }
    }
    Ok(rows)
}

pub fn variance_rows(args: &VarianceScanArgs, cfg: &McConfig) -> Result<Vec<VarianceRow>> {
    parse_dim_grid(&args.d)?
        .into_iter()
        .map(|d| {
            if d < 4 {
                return Err(Error::DimensionTooSmall { dim: d, min: 4 });
            }
            let v = mc_variance_normalized_igp(d, args.n, &cfg.fork(d as u64))?;
            Ok(VarianceRow {
                d,
                var_mc: v.variance,
                ci_lo: v.ci_lo,
                ci_hi: v.ci_hi,
                var_analytic: variance_normalized_analytic(d),
                n: args.n,
                seed: cfg.seed,
            })
        })
        .collect()
}

pub fn concentration_rows(args: &ConcentrationScanArgs, cfg: &McConfig) -> Result<Vec<ConcentrationRow>> {
    parse_dim_grid(&args.d)?
        .into_iter()
        .map(|d| {
            let r = concentration_probe(d, args.n, &cfg.fork(d as u64))?;
            Ok(ConcentrationRow {
                d,
                threshold: r.threshold,
                fraction: r.fraction_above,
                levy_bound: r.levy_bound,
                n: r.n,
                seed: r.seed,
            })
        })
        .collect()
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn table_json<T: Serialize>(rows: &[T], cfg: &McConfig) -> String {
    pretty(&json!({ "tool_version": TOOL_VERSION, "seed": cfg.seed, "streams": cfg.streams, "rows": rows }))
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

/// Key/value CSV of a flat JSON report; nested objects use dotted keys.
fn report_csv(v: &serde_json::Value) -> Result<String> {
    fn walk(prefix: &str, v: &serde_json::Value, out: &mut Vec<(String, String)>) {
        match v {
            serde_json::Value::Object(map) => {
                for (k, x) in map {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&key, x, out);
                }
            }
            serde_json::Value::Null => {}
            serde_json::Value::String(s) => out.push((prefix.to_string(), s.clone())),
            other => out.push((prefix.to_string(), other.to_string())),
        }
    }
    #[derive(Serialize)]
    struct Kv {
        field: String,
        value: String,
    }
    let mut pairs = Vec::new();
    walk("", v, &mut pairs);
    to_csv(&pairs.into_iter().map(|(field, value)| Kv { field, value }).collect::<Vec<_>>())
}

pub fn default_streams() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Run a parsed command and render its output.
pub fn execute(cli: &Cli) -> Result<Outcome> {
    let g = &cli.global;
    let cfg = McConfig::new(g.seed, g.streams.map_or_else(default_streams, |s| s as usize));
    if g.z_gate.is_nan() || g.z_gate <= 0.0 {
        return Err(Error::InvalidArgument(format!("z-gate must be positive, got {}", g.z_gate)));
    }
    let table_format = g.format.unwrap_or(Format::Csv);
    let report_format = g.format.unwrap_or(Format::Json);
    let render_report = |v: serde_json::Value| -> Result<String> {
        match report_format {
            Format::Json => Ok(pretty(&v)),
            Format::Csv => report_csv(&v),
        }
    };
    match &cli.command {
        Command::Analyze(a) => Ok(Outcome { text: render_report(analyze(a, g)?)?, passed: true }),
        Command::Protocol(a) => Ok(Outcome { text: render_report(protocol_report(a, g)?)?, passed: true }),
        Command::Verify(a) => {
            let rows = verify_rows(a, &cfg, g.z_gate)?;
            let passed = rows.iter().all(|r| r.pass);
            let text = match table_format {
                Format::Csv => to_csv(&rows)?,
                Format::Json => {
                    let records: Vec<EstimatorRecord> = rows.iter().map(VerifyRow::to_record).collect();
                    pretty(&json!({
                        "tool_version": TOOL_VERSION,
                        "seed": cfg.seed,
                        "streams": cfg.streams,
                        "z_gate": g.z_gate,
                        "passed": passed,
                        "records": records,
                    }))
                }
            };
            Ok(Outcome { text, passed })
        }
        Command::VarianceScan(a) => {
            let rows = variance_rows(a, &cfg)?;
            let text = match table_format {
                Format::Csv => to_csv(&rows)?,
                Format::Json => table_json(&rows, &cfg),
            };
            Ok(Outcome { text, passed: true })
        }
        Command::ConcentrationScan(a) => {
            let rows = concentration_rows(a, &cfg)?;
            let text = match table_format {
                Format::Csv => to_csv(&rows)?,
                Format::Json => table_json(&rows, &cfg),
            };
            Ok(Outcome { text, passed: true })
        }
    }
}

#[derive(Debug, Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    parameters: &'a [String],
    seed: u64,
    streams: usize,
    tool_version: &'a str,
    wall_time_s: f64,
    output_paths: Vec<String>,
    passed: bool,
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Analyze(_) => "analyze",
        Command::Verify(_) => "verify",
        Command::VarianceScan(_) => "variance-scan",
        Command::ConcentrationScan(_) => "concentration-scan",
        Command::Protocol(_) => "protocol",
    }
}

fn write_output(cli: &Cli, argv: &[String], outcome: &Outcome, wall_time_s: f64) -> Result<()> {
    let Some(path) = &cli.global.out else {
        print!("{}", outcome.text);
        return Ok(());
    };
    fs::write(path, &outcome.text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let manifest_path = dir.join("manifest.jsonl");
    let manifest = RunManifest {
        command: command_name(&cli.command),
        parameters: argv,
        seed: cli.global.seed,
        streams: cli.global.streams.map_or_else(default_streams, |s| s as usize),
        tool_version: TOOL_VERSION,
        wall_time_s,
        output_paths: vec![path.display().to_string()],
        passed: outcome.passed,
    };
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&manifest_path)
        .map_err(|e| Error::Io(format!("{}: {e}", manifest_path.display())))?;
    writeln!(f, "{}", serde_json::to_string(&manifest).expect("manifest serializes"))?;
    Ok(())
}

/// Entry point for the binary. Exit codes: 0 all gates passed, 1 a gate
/// failed, 2 invalid input or runtime error.
pub fn run(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let start = Instant::now();
    let result = execute(&cli).and_then(|o| {
        write_output(&cli, &argv[1..], &o, start.elapsed().as_secs_f64())?;
        Ok(o)
    });
    match result {
        Ok(o) if o.passed => 0,
        Ok(_) => {
            eprintln!("igplab: at least one check exceeded the gate");
            1
        }
        Err(e) => {
            eprintln!("igplab: {e}");
            2
        }
    }
}
