//! `jacobi-mimo`: command-line front end.
//!
//! SNRs on the command line are in dB and converted to linear scale here;
//! rates are in bits per channel use.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use jacobi_mimo::analytic;
use jacobi_mimo::feedback::{self, ChannelMode, Modulation, RelayPower, SchemeConfig};
use jacobi_mimo::simulate::{self, ErrorEstimator, Rate};
use jacobi_mimo::{ChannelDims, Error, McConfig};

#[derive(Parser, Debug)]
#[command(name = "jacobi-mimo", version, about = "Jacobi (truncated-Haar) MIMO channel analyses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ergodic capacity in bits per channel use versus SNR (dB).
    Ergodic(ErgodicArgs),
    /// Outage probability versus multiplexing ratio or rate (bits) at one SNR (dB).
    Outage(OutageArgs),
    /// Normalized SNR rho_norm (dB) of the single-input channel versus m_r/m.
    RhoNorm(RhoNormArgs),
    /// Optimal diversity-multiplexing tradeoff curve (CSV vertices, JSON curve).
    Dmt(DmtArgs),
    /// QPSK symbol error of the repetition scheme versus SNR (dB).
    Repetition(RepetitionArgs),
    /// Outage of the Alamouti code on (2, 2, m) versus SNR (dB).
    Alamouti(AlamoutiArgs),
    /// Delayed-feedback zero-outage scheme; per-stream SNR (linear and dB), rates in bits.
    Feedback(FeedbackArgs),
    /// Jacobi versus i.i.d. Rayleigh at common average receive SNR rho_bar (dB).
    Rayleigh(RayleighArgs),
    /// Re-run a manifest and check that the output checksum matches.
    Replay(ReplayArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Master seed of the Monte-Carlo streams.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (results do not depend on this).
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Output CSV path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a JSON run manifest to this path.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct DimsArgs {
    /// Transmit modes m_t.
    #[arg(long)]
    mt: usize,
    /// Receive modes m_r.
    #[arg(long)]
    mr: usize,
    /// Total modes m.
    #[arg(long)]
    m: usize,
}

impl DimsArgs {
    fn dims(&self) -> Result<ChannelDims, Error> {
        ChannelDims::new(self.mt, self.mr, self.m)
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Method {
    Analytic,
    Mc,
}

#[derive(Args, Debug)]
struct ErgodicArgs {
    #[command(flatten)]
    dims: DimsArgs,
    /// Per-mode SNR grid in dB: `start:stop:step` or a comma list.
    #[arg(long = "rho-db", allow_hyphen_values = true)]
    rho_db: String,
    #[arg(long, value_enum, default_value_t = Method::Analytic)]
    method: Method,
    /// Monte-Carlo trials per grid point (method mc).
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct OutageArgs {
    #[command(flatten)]
    dims: DimsArgs,
    /// Per-mode SNR in dB.
    #[arg(long = "rho-db", allow_hyphen_values = true)]
    rho_db: f64,
    /// Multiplexing-ratio grid r (rate r*log2(1+rho) bits).
    #[arg(long = "r", conflicts_with = "rate_bits")]
    r: Option<String>,
    /// Absolute rate grid in bits per channel use.
    #[arg(long = "rate-bits")]
    rate_bits: Option<String>,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct RhoNormArgs {
    /// Total modes m (grid or list).
    #[arg(long)]
    m: String,
    /// Receive modes m_r (grid or list); all 1..=m when omitted.
    #[arg(long)]
    mr: Option<String>,
    /// Target outage probabilities (list).
    #[arg(long, default_value = "1e-3,1e-5")]
    epsilon: String,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct DmtArgs {
    #[command(flatten)]
    dims: DimsArgs,
    /// Write the curve (vertices and threshold) as JSON to this path.
    #[arg(long)]
    json: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum EstimatorArg {
    Conditional,
    Counting,
}

#[derive(Args, Debug)]
struct RepetitionArgs {
    #[command(flatten)]
    dims: DimsArgs,
    /// Per-mode SNR grid in dB.
    #[arg(long = "rho-db", allow_hyphen_values = true)]
    rho_db: String,
    #[arg(long, value_enum, default_value_t = EstimatorArg::Conditional)]
    estimator: EstimatorArg,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct AlamoutiArgs {
    /// Total modes m (m_t = m_r = 2).
    #[arg(long)]
    m: usize,
    /// Per-mode SNR grid in dB.
    #[arg(long = "rho-db", allow_hyphen_values = true)]
    rho_db: String,
    /// Multiplexing ratio r (outage event log2(1+||H||^2 rho) < r log2 rho).
    #[arg(long = "r")]
    r: f64,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum ModulationArg {
    Qpsk,
    Gaussian,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum ChannelArg {
    Fresh,
    Hold,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum RelayArg {
    Unit,
    Literal,
}

#[derive(Args, Debug)]
struct FeedbackArgs {
    #[command(flatten)]
    dims: DimsArgs,
    /// Data channel uses per frame.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Feedback delay l in channel uses.
    #[arg(long, default_value_t = 1)]
    delay: usize,
    /// Per-mode SNR in dB.
    #[arg(long = "rho-db", allow_hyphen_values = true)]
    rho_db: f64,
    #[arg(long, value_enum, default_value_t = ModulationArg::Qpsk)]
    modulation: ModulationArg,
    /// Independent frames pooled into the report.
    #[arg(long, default_value_t = 1)]
    frames: u64,
    #[arg(long, value_enum, default_value_t = ChannelArg::Fresh)]
    channel: ChannelArg,
    #[arg(long, value_enum, default_value_t = RelayArg::Unit)]
    relay: RelayArg,
    /// Send extra symbols in the relay slots of the first l uses.
    #[arg(long)]
    reuse_zero_rows: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct RayleighArgs {
    /// Transmit modes m_t.
    #[arg(long)]
    mt: usize,
    /// Receive modes m_r.
    #[arg(long)]
    mr: usize,
    /// Total modes m (grid or list), each >= m_t + m_r.
    #[arg(long)]
    m: String,
    /// Average receive SNR grid rho_bar in dB.
    #[arg(long = "rho-bar-db", allow_hyphen_values = true)]
    rho_bar_db: String,
    /// Multiplexing ratio for the outage columns (rate r*log2(1+rho_bar) bits).
    #[arg(long = "r", default_value_t = 0.5)]
    r: f64,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct ReplayArgs {
    /// Manifest written by an earlier run.
    manifest: PathBuf,
}

#[derive(Serialize, Deserialize, Debug)]
struct RunManifest {
    subcommand: String,
    /// Arguments reproducing the output, without `--out` and `--manifest`.
    args: Vec<String>,
    master_seed: u64,
    tool_version: String,
    timestamp_unix: u64,
    output_sha256: String,
    output_path: Option<String>,
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_usage() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(Failure::Usage(msg.into()))
}

fn io_fail(e: impl std::fmt::Display) -> Failure {
    Failure::Numerical(format!("i/o error: {e}"))
}

/// `start:stop:step` (inclusive when the step divides the range), a comma
/// list, or a single value.
fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let num = |s: &str| -> CliResult<f64> {
        let v: f64 = s.trim().parse().map_err(|_| Failure::Usage(format!("not a number: '{s}'")))?;
        if v.is_finite() {
            Ok(v)
        } else {
            usage(format!("not a finite number: '{s}'"))
        }
    };
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.len() {
        1 => spec.split(',').map(num).collect(),
        3 => {
            let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
            if step == 0.0 || (stop - start) * step < 0.0 {
                return usage(format!("grid '{spec}': step must be nonzero and point from start to stop"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as u64 + 1;
            if count > 1_000_000 {
                return usage(format!("grid '{spec}' has too many points"));
            }
            Ok((0..count).map(|i| start + i as f64 * step).collect())
        }
        _ => usage(format!("grid '{spec}': expected start:stop:step or a comma list")),
    }
}

fn parse_int_grid(spec: &str) -> CliResult<Vec<usize>> {
    parse_grid(spec)?
        .into_iter()
        .map(|v| {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                usage(format!("expected a nonnegative integer, got {v}"))
            }
        })
        .collect()
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn mc(common: &Common, trials: u64) -> McConfig {
    McConfig { trials, master_seed: common.seed, workers: common.workers }
}

/// CSV built in memory; every numeric cell must be finite.
struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    fn new(header: &[&str]) -> CliResult<Self> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).map_err(io_fail)?;
        Ok(Self { writer })
    }

    fn row(&mut self, cells: &[Cell]) -> CliResult<()> {
        let mut rec = Vec::with_capacity(cells.len());
        for c in cells {
            rec.push(match c {
                Cell::Num(v) if !v.is_finite() => {
                    return Err(Failure::Numerical(format!("refusing to write non-finite value {v}")))
                }
                Cell::Num(v) => format!("{v}"),
                Cell::Int(v) => v.to_string(),
                Cell::Text(s) => s.clone(),
                Cell::Blank => String::new(),
            });
        }
        self.writer.write_record(&rec).map_err(io_fail)
    }

    fn finish(self) -> CliResult<Vec<u8>> {
        self.writer.into_inner().map_err(io_fail)
    }
}

enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Blank,
}

use Cell::{Blank, Int, Num};

fn cmd_ergodic(a: &ErgodicArgs) -> CliResult<Vec<u8>> {
    let dims = a.dims.dims()?;
    let mut t = Table::new(&["rho_db", "capacity_bits", "capacity_normalized", "stderr"])?;
    for db in parse_grid(&a.rho_db)? {
        let rho = db_to_linear(db);
        let (c, se) = match a.method {
            Method::Analytic => (analytic::ergodic_capacity(dims, rho)?, None),
            Method::Mc => {
                let e = simulate::mc_ergodic_capacity(dims, rho, &mc(&a.common, a.trials))?;
                (e.value, Some(e.stderr))
            }
        };
        let norm = c / (rho.ln_1p() / std::f64::consts::LN_2);
        t.row(&[Num(db), Num(c), Num(norm), se.map_or(Blank, Num)])?;
    }
    t.finish()
}

fn cmd_outage(a: &OutageArgs) -> CliResult<Vec<u8>> {
    let dims = a.dims.dims()?;
    let rho = db_to_linear(a.rho_db);
    let (col, grid, as_ratio) = match (&a.r, &a.rate_bits) {
        (Some(g), None) => ("r", parse_grid(g)?, true),
        (None, Some(g)) => ("rate_bits", parse_grid(g)?, false),
        _ => return usage("give exactly one of --r or --rate-bits"),
    };
    let cfg = mc(&a.common, a.trials);
    let mut t = Table::new(&[col, "outage", "stderr"])?;
    for v in grid {
        if v.is_nan() || v < 0.0 {
            return usage(format!("{col} must be >= 0, got {v}"));
        }
        let rate = if as_ratio { Rate::Ratio(v) } else { Rate::Bits(v) };
        let e = simulate::mc_outage(dims, rho, rate, &cfg)?;
        t.row(&[Num(v), Num(e.value), Num(e.stderr)])?;
    }
    t.finish()
}

fn cmd_rho_norm(a: &RhoNormArgs) -> CliResult<Vec<u8>> {
    let eps = parse_grid(&a.epsilon)?;
    let mut t = Table::new(&["m", "mr", "mr_over_m", "epsilon", "rho_norm_db"])?;
    for m in parse_int_grid(&a.m)? {
        let mrs = match &a.mr {
            Some(g) => parse_int_grid(g)?,
            None => (1..=m).collect(),
        };
        for &mr in &mrs {
            for &e in &eps {
                let v = analytic::rho_norm(mr, m, e)?;
                t.row(&[Int(m as u64), Int(mr as u64), Num(mr as f64 / m as f64), Num(e), Num(10.0 * v.log10())])?;
            }
        }
    }
    t.finish()
}

fn cmd_dmt(a: &DmtArgs) -> CliResult<Vec<u8>> {
    let curve = analytic::dmt_optimal_curve(a.dims.dims()?);
    if let Some(p) = &a.json {
        let json = serde_json::to_string_pretty(&curve).map_err(io_fail)?;
        std::fs::write(p, json + "\n").map_err(io_fail)?;
    }
    let mut t = Table::new(&["r", "d"])?;
    for &(r, d) in &curve.vertices {
        t.row(&[Num(r), Num(d)])?;
    }
    t.finish()
}

fn cmd_repetition(a: &RepetitionArgs) -> CliResult<Vec<u8>> {
    let dims = a.dims.dims()?;
    let est = match a.estimator {
        EstimatorArg::Conditional => ErrorEstimator::Conditional,
        EstimatorArg::Counting => ErrorEstimator::Counting,
    };
    let cfg = mc(&a.common, a.trials);
    let mut t = Table::new(&["rho_db", "symbol_error", "stderr"])?;
    for db in parse_grid(&a.rho_db)? {
        let e = simulate::mc_repetition_error(dims, db_to_linear(db), est, &cfg)?;
        t.row(&[Num(db), Num(e.value), Num(e.stderr)])?;
    }
    t.finish()
}

fn cmd_alamouti(a: &AlamoutiArgs) -> CliResult<Vec<u8>> {
    let cfg = mc(&a.common, a.trials);
    let mut t = Table::new(&["rho_db", "outage", "stderr"])?;
    for db in parse_grid(&a.rho_db)? {
        let e = simulate::mc_alamouti_outage(a.m, db_to_linear(db), a.r, &cfg)?;
        t.row(&[Num(db), Num(e.value), Num(e.stderr)])?;
    }
    t.finish()
}

fn cmd_feedback(a: &FeedbackArgs) -> CliResult<Vec<u8>> {
    let dims = a.dims.dims()?;
    if dims.k() == 0 {
        return usage(format!(
            "the feedback scheme needs m_t + m_r > m so that unfaded modes exist; got m_t={}, m_r={}, m={}",
            dims.m_t(),
            dims.m_r(),
            dims.m()
        ));
    }
    let mut cfg = SchemeConfig::new(dims, a.n, a.delay, db_to_linear(a.rho_db));
    cfg.seed = a.common.seed;
    cfg.modulation = match a.modulation {
        ModulationArg::Qpsk => Modulation::Qpsk,
        ModulationArg::Gaussian => Modulation::Gaussian,
    };
    cfg.channel_mode = match a.channel {
        ChannelArg::Fresh => ChannelMode::Fresh,
        ChannelArg::Hold => ChannelMode::Hold,
    };
    cfg.relay_power = match a.relay {
        RelayArg::Unit => RelayPower::Unit,
        RelayArg::Literal => RelayPower::Literal,
    };
    cfg.reuse_zero_rows = a.reuse_zero_rows;
    let rep = feedback::run_feedback_frames(&cfg, a.frames, a.common.workers)?;

    let mut t = Table::new(&["quantity", "index", "value"])?;
    let mut put = |q: &str, i: Option<usize>, v: Cell| t.row(&[Cell::Text(q.into()), i.map_or(Blank, |i| Int(i as u64)), v]);
    for (i, &s) in rep.per_stream_snr.iter().enumerate() {
        put("stream_snr", Some(i), Num(s))?;
        put("stream_snr_db", Some(i), Num(10.0 * s.log10()))?;
    }
    for (i, &p) in rep.mode_power.iter().enumerate() {
        put("mode_power", Some(i), Num(p))?;
    }
    put("noise_cov_error", None, Num(rep.noise_cov_error))?;
    put("stream_cross_corr", None, Num(rep.stream_cross_corr))?;
    put("achieved_rate_bits", None, Num(rep.achieved_rate))?;
    put("target_rate_bits", None, Num(rep.target_rate))?;
    let min_mi = rep.frame_mutual_information.iter().copied().fold(f64::INFINITY, f64::min);
    put("min_frame_mutual_information_bits", None, Num(min_mi))?;
    put("overhead_uses", None, Int(rep.overhead_uses as u64))?;
    put("extra_symbols", None, Int(rep.extra_symbols))?;
    put("frames", None, Int(rep.frames))?;
    put("combining_defect", None, Num(rep.combining_defect))?;
    put("min_side_snr_ratio", None, Num(rep.min_side_snr_ratio))?;
    if let Some(b) = rep.ber {
        put("ber", None, Num(b))?;
        put("ber_awgn", None, Num(rep.ber_awgn))?;
        put("bit_errors", None, Int(rep.bit_errors))?;
        put("bits", None, Int(rep.bits))?;
    }
    t.finish()
}

fn cmd_rayleigh(a: &RayleighArgs) -> CliResult<Vec<u8>> {
    let ms = parse_int_grid(&a.m)?;
    let dbs = parse_grid(&a.rho_bar_db)?;
    let rho_bars: Vec<f64> = dbs.iter().map(|&d| db_to_linear(d)).collect();
    let rows = simulate::rayleigh_compare(a.mt, a.mr, &ms, &rho_bars, a.r, &mc(&a.common, a.trials))?;
    let mut t = Table::new(&[
        "m",
        "rho_bar_db",
        "rho_mode_db",
        "capacity_jacobi_bits",
        "capacity_rayleigh_bits",
        "capacity_rayleigh_stderr",
        "gap_db",
        "outage_jacobi",
        "outage_jacobi_stderr",
        "outage_rayleigh",
        "outage_rayleigh_stderr",
        "ks_distance",
    ])?;
    for (row, db) in rows.iter().zip(dbs.iter().cycle()) {
        t.row(&[
            Int(row.m as u64),
            Num(*db),
            Num(10.0 * row.rho_mode.log10()),
            Num(row.capacity_jacobi),
            Num(row.capacity_rayleigh.value),
            Num(row.capacity_rayleigh.stderr),
            Num(row.gap_db),
            Num(row.outage_jacobi.value),
            Num(row.outage_jacobi.stderr),
            Num(row.outage_rayleigh.value),
            Num(row.outage_rayleigh.stderr),
            Num(row.ks_distance),
        ])?;
    }
    t.finish()
}

fn common_of(cmd: &Command) -> Option<&Common> {
    Some(match cmd {
        Command::Ergodic(a) => &a.common,
        Command::Outage(a) => &a.common,
        Command::RhoNorm(a) => &a.common,
        Command::Dmt(a) => &a.common,
        Command::Repetition(a) => &a.common,
        Command::Alamouti(a) => &a.common,
        Command::Feedback(a) => &a.common,
        Command::Rayleigh(a) => &a.common,
        Command::Replay(_) => return None,
    })
}

fn execute(cmd: &Command) -> CliResult<Vec<u8>> {
    match cmd {
        Command::Ergodic(a) => cmd_ergodic(a),
        Command::Outage(a) => cmd_outage(a),
        Command::RhoNorm(a) => cmd_rho_norm(a),
        Command::Dmt(a) => cmd_dmt(a),
        Command::Repetition(a) => cmd_repetition(a),
        Command::Alamouti(a) => cmd_alamouti(a),
        Command::Feedback(a) => cmd_feedback(a),
        Command::Rayleigh(a) => cmd_rayleigh(a),
        Command::Replay(_) => unreachable!("replay is dispatched separately"),
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Arguments after the program name, minus `--out` / `--manifest` and their values.
fn reproducible_args(argv: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in argv.iter().skip(1) {
        if skip {
            skip = false;
            continue;
        }
        if a == "--out" || a == "--manifest" {
            skip = true;
            continue;
        }
        if a.starts_with("--out=") || a.starts_with("--manifest=") {
            continue;
        }
        out.push(a.clone());
    }
    out
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(io_fail),
        None => std::io::stdout().write_all(bytes).map_err(io_fail),
    }
}

fn run(argv: Vec<String>) -> CliResult<()> {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            if code == 0 {
                return Ok(());
            }
            return Err(Failure::Usage(String::new()));
        }
    };
    if let Command::Replay(r) = &cli.command {
        return replay(&r.manifest);
    }
    let common = common_of(&cli.command).expect("non-replay command");
    if common.workers == 0 {
        return usage("--workers must be at least 1");
    }
    let bytes = execute(&cli.command)?;
    write_output(common.out.as_deref(), &bytes)?;
    if let Some(mpath) = &common.manifest {
        let args = reproducible_args(&argv);
        let manifest = RunManifest {
            subcommand: args.first().cloned().unwrap_or_default(),
            args,
            master_seed: common.seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp_unix: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            output_sha256: sha256_hex(&bytes),
            output_path: common.out.as_ref().map(|p| p.display().to_string()),
        };
        let json = serde_json::to_string_pretty(&manifest).map_err(io_fail)?;
        std::fs::write(mpath, json + "\n").map_err(io_fail)?;
    }
    Ok(())
}

fn replay(path: &Path) -> CliResult<()> {
    let text = std::fs::read_to_string(path).map_err(io_fail)?;
    let manifest: RunManifest =
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("unreadable manifest: {e}")))?;
    let mut argv = vec!["jacobi-mimo".to_string()];
    argv.extend(manifest.args.iter().cloned());
    let cli = Cli::try_parse_from(&argv).map_err(|e| Failure::Usage(format!("manifest arguments rejected: {e}")))?;
    if matches!(cli.command, Command::Replay(_)) {
        return usage("a manifest cannot replay another manifest");
    }
    let bytes = execute(&cli.command)?;
    let sum = sha256_hex(&bytes);
    if sum == manifest.output_sha256 {
        println!("replay ok: {sum}");
        Ok(())
    } else {
        Err(Failure::Numerical(format!(
            "replay mismatch: manifest {} vs recomputed {sum}",
            manifest.output_sha256
        )))
    }
}

fn main() -> ExitCode {
    match run(std::env::args().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            if !msg.is_empty() {
                eprintln!("error: {msg}");
            }
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
