//! Command-line front end: `gen | eval | synth | modes | fit`.
//!
//! All arithmetic is delegated to the library. Exit codes: 0 success,
//! 1 a requested bound check failed, 2 input or domain error, 3 infeasible
//! synthesis, 4 internal invariant failure.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use evalexpr::{ContextWithMutableFunctions, ContextWithMutableVariables, DefaultNumericTypes, Function, HashMapContext, Node, Value};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{beta_max_from_env, substitute_picture, PhaseList, Picture, Signal, SignalKind, Substitution};
use crate::approx::{fit_target, FitDomain};
use crate::error::{Error, ErrorKind};
use crate::modes::{
    commutator_defect, composite_mode_map_with_cutoff, controlled_squeeze_branches_with_cutoff, low_gain_effective,
    staged_amplitude_exact, BogoliubovMap, StagedInterferometer,
};
use crate::polyring::{protocol_to_pair, Parity, ParityPoly};
use crate::protocols::{
    bound, gen_constant, gen_monotone_amplify, gen_trivial, BoundKind, Convention, Protocol, POLE_GUARD, WEAK_STEP_TOL,
};
use crate::synthesis::{synthesize_with, Precision, SynthesisOptions};

pub const SCHEMA_VERSION: u32 = 1;
const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug)]
struct CliError {
    code: i32,
    msg: String,
}

impl CliError {
    fn input(msg: impl Into<String>) -> Self {
        CliError { code: EXIT_INPUT, msg: msg.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e.kind() {
            ErrorKind::Input => EXIT_INPUT,
            ErrorKind::Infeasible => EXIT_INFEASIBLE,
            ErrorKind::Internal => EXIT_INTERNAL,
        };
        CliError { code, msg: e.to_string() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.msg)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "hyperqsp", version, about = "Phase protocols for SU(2) and SU(1,1) signal processing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a protocol file.
    Gen(GenArgs),
    /// Evaluate a protocol over a grid of x values.
    Eval(EvalArgs),
    /// Find phases whose Re P matches a target polynomial.
    Synth(SynthArgs),
    /// Two-mode Bogoliubov map of a protocol at a given gain.
    Modes(ModesArgs),
    /// Least-squares polynomial fit on [1, X].
    Fit(FitArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GenKind {
    Explicit,
    Trivial,
    Monotone,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConventionArg {
    PhasedBoost,
    Iterate,
    Interleaved,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::PhasedBoost => Convention::PhasedBoost,
            ConventionArg::Iterate => Convention::Iterate,
            ConventionArg::Interleaved => Convention::Interleaved,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PictureArg {
    Su2,
    Su11,
}

impl From<PictureArg> for Picture {
    fn from(p: PictureArg) -> Self {
        match p {
            PictureArg::Su2 => Picture::Su2,
            PictureArg::Su11 => Picture::Su11,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SignalArg {
    Circular,
    Hyperbolic,
}

impl From<SignalArg> for SignalKind {
    fn from(s: SignalArg) -> Self {
        match s {
            SignalArg::Circular => SignalKind::Circular,
            SignalArg::Hyperbolic => SignalKind::Hyperbolic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PrecisionArg {
    Auto,
    Double,
    Extended,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ParityArg {
    Even,
    Odd,
    Mixed,
}

impl From<ParityArg> for Parity {
    fn from(p: ParityArg) -> Self {
        match p {
            ParityArg::Even => Parity::Even,
            ParityArg::Odd => Parity::Odd,
            ParityArg::Mixed => Parity::Mixed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BoundArg {
    Secant,
    Simple,
    #[value(alias = "chebyshev_lower")]
    ChebyshevLower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Basis {
    Chebyshev,
    Monomial,
}

#[derive(Args, Debug)]
struct GenArgs {
    kind: GenKind,
    /// Number of boosts (trivial, constant).
    #[arg(long)]
    n: Option<usize>,
    /// Recursion depth (monotone).
    #[arg(long)]
    level: Option<usize>,
    /// Constant phase, radians or a multiple of pi such as "pi/3".
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<String>,
    /// Comma-separated phases (explicit).
    #[arg(long, allow_hyphen_values = true)]
    phases: Option<String>,
    #[arg(long, value_enum, default_value = "phased-boost")]
    convention: ConventionArg,
    /// Picture the explicit phases are written in.
    #[arg(long, value_enum, default_value = "su11")]
    picture: PictureArg,
    #[arg(long, value_enum, default_value = "hyperbolic")]
    signal_kind: SignalArg,
    #[arg(long)]
    name: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    protocol: PathBuf,
    /// `x_min:x_max:points`.
    #[arg(long, conflicts_with = "x")]
    grid: Option<String>,
    /// A single x value.
    #[arg(long, allow_hyphen_values = true)]
    x: Option<f64>,
    /// Bound columns to add and check (constant-phase protocols only).
    /// `secant` caps |P|², `simple` caps |P|, `chebyshev-lower` bounds |P|²
    /// from below.
    #[arg(long, value_enum, value_delimiter = ',')]
    bounds: Vec<BoundArg>,
    /// Override the signal kind stored in the file.
    #[arg(long, value_enum)]
    signal_kind: Option<SignalArg>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Comma-separated coefficients of the target.
    #[arg(long, allow_hyphen_values = true)]
    coeffs: String,
    #[arg(long, value_enum, default_value = "chebyshev")]
    basis: Basis,
    #[arg(long, value_enum)]
    parity: Option<ParityArg>,
    /// Picture of the phases written to the protocol file.
    #[arg(long, value_enum, default_value = "su11")]
    picture: PictureArg,
    #[arg(long, value_enum, default_value = "auto")]
    precision: PrecisionArg,
    /// Protocol file to write; the report goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ModesArgs {
    protocol: PathBuf,
    #[arg(long)]
    beta: f64,
    /// Inter-stage phase for the low-gain comparison.
    #[arg(long, requires = "stages", allow_hyphen_values = true)]
    theta: Option<String>,
    /// Number of stages for the low-gain comparison.
    #[arg(long, requires = "theta")]
    stages: Option<usize>,
    /// Phase of the first stage.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    stage_phi: String,
    /// Second gain for the controlled-squeeze branches.
    #[arg(long)]
    beta1: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Target expression in `x`, e.g. "exp(x)" or "x^3 - 2*x".
    #[arg(long, allow_hyphen_values = true)]
    target: String,
    #[arg(long, default_value_t = 2.0)]
    x_max: f64,
    #[arg(long)]
    degree: usize,
    #[arg(long, value_enum, default_value = "mixed")]
    parity: ParityArg,
    /// Quadrature order (default `2·degree + 8`).
    #[arg(long)]
    order: Option<usize>,
    /// Also report residuals for every admissible degree up to `--degree`.
    #[arg(long)]
    table: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// How a protocol file describes its phases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
pub enum ProtocolSpec {
    Explicit { phases: Vec<f64>, convention: Convention, picture: Picture },
    Trivial { n: usize },
    Monotone { level: usize },
    Constant { n: usize, phi: f64 },
}

/// On-disk protocol description.
///
/// `convention` and `phases` echo the materialized protocol. On load, the spec
/// is authoritative and the echo must match it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolFile {
    pub schema_version: u32,
    pub name: String,
    #[serde(flatten)]
    pub spec: ProtocolSpec,
    pub signal_kind: SignalKind,
    pub convention: Convention,
    pub phases: Vec<f64>,
}

impl ProtocolFile {
    pub fn new(name: String, spec: ProtocolSpec, signal_kind: SignalKind) -> crate::Result<Self> {
        let protocol = spec_protocol(&spec)?;
        Ok(ProtocolFile {
            schema_version: SCHEMA_VERSION,
            name,
            spec,
            signal_kind,
            convention: protocol.convention,
            phases: protocol.phases.to_vec(),
        })
    }

    /// The protocol in the SU(1,1) picture.
    pub fn protocol(&self) -> crate::Result<Protocol> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let p = spec_protocol(&self.spec)?;
        let echo_ok = p.convention == self.convention
            && p.phases.len() == self.phases.len()
            && p.phases.iter().zip(&self.phases).all(|(a, b)| (a - b).abs() <= 1e-12);
        if !echo_ok {
            return Err(Error::InvalidArgument("phases/convention do not match the protocol spec".into()));
        }
        match &self.spec {
            ProtocolSpec::Explicit { picture: Picture::Su2, .. } => Ok(Protocol {
                phases: substitute_picture(&p.phases, Substitution::Su2ToSu11),
                convention: p.convention,
            }),
            _ => Ok(p),
        }
    }

    /// `(n, φ)` when the protocol is a constant-phase iterate power.
    pub fn constant_params(&self) -> Option<(usize, f64)> {
        match &self.spec {
            ProtocolSpec::Constant { n, phi } => Some((*n, *phi)),
            ProtocolSpec::Explicit { phases, convention: Convention::Iterate, picture: Picture::Su11 } => {
                let phi = phases[0];
                phases.iter().all(|&p| p == phi).then_some((phases.len(), phi))
            }
            _ => None,
        }
    }
}

/// Phases as written in the file; for an SU(2)-picture explicit list these
/// are still SU(2) phases.
fn spec_protocol(spec: &ProtocolSpec) -> crate::Result<Protocol> {
    match spec {
        ProtocolSpec::Explicit { phases, convention, .. } => Protocol::new(PhaseList::new(phases.clone())?, *convention),
        ProtocolSpec::Trivial { n } => Ok(Protocol::phased_boost(gen_trivial(*n)?)),
        ProtocolSpec::Monotone { level } => gen_monotone_amplify(*level),
        ProtocolSpec::Constant { n, phi } => gen_constant(*n, *phi),
    }
}

/// Parses radians, or rational multiples of pi: `pi`, `-pi/4`, `2pi/3`, `3*pi/8`.
pub fn parse_angle(s: &str) -> std::result::Result<f64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
    if let Ok(v) = t.parse::<f64>() {
        return if v.is_finite() { Ok(v) } else { Err(format!("angle {s:?} is not finite")) };
    }
    let bad = || format!("cannot parse angle {s:?}");
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a, b.parse::<f64>().map_err(|_| bad())?),
        None => (t.as_str(), 1.0),
    };
    let mult = num.strip_suffix("pi").ok_or_else(bad)?;
    let mult = mult.strip_suffix('*').unwrap_or(mult);
    let k = match mult {
        "" | "+" => 1.0,
        "-" => -1.0,
        m => m.parse::<f64>().map_err(|_| bad())?,
    };
    let v = k * std::f64::consts::PI / den;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

fn angle(s: &str) -> CliResult<f64> {
    parse_angle(s).map_err(CliError::input)
}

fn angle_list(s: &str) -> CliResult<Vec<f64>> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(angle).collect()
}

fn number_list(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<f64>().map_err(|_| CliError::input(format!("cannot parse number {p:?}"))))
        .collect()
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError { code: EXIT_INTERNAL, msg: format!("writing {}: {e}", p.display()) }),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| CliError { code: EXIT_INTERNAL, msg: format!("writing output: {e}") }),
    }
}

fn to_json<T: Serialize>(v: &T) -> CliResult<String> {
    serde_json::to_string_pretty(v)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| CliError { code: EXIT_INTERNAL, msg: e.to_string() })
}

pub fn read_protocol_file(path: &Path) -> crate::Result<ProtocolFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("reading {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidArgument(format!("parsing {}: {e}", path.display())))
}

fn cmd_gen(a: GenArgs, out: &mut dyn Write) -> CliResult<()> {
    let need = |v: Option<usize>, flag: &str| v.ok_or_else(|| CliError::input(format!("--{flag} is required")));
    let spec = match a.kind {
        GenKind::Trivial => ProtocolSpec::Trivial { n: need(a.n, "n")? },
        GenKind::Monotone => ProtocolSpec::Monotone { level: need(a.level, "level")? },
        GenKind::Constant => {
            let phi = a.phi.as_deref().ok_or_else(|| CliError::input("--phi is required"))?;
            ProtocolSpec::Constant { n: need(a.n, "n")?, phi: angle(phi)? }
        }
        GenKind::Explicit => {
            let raw = a.phases.as_deref().ok_or_else(|| CliError::input("--phases is required"))?;
            ProtocolSpec::Explicit { phases: angle_list(raw)?, convention: a.convention.into(), picture: a.picture.into() }
        }
    };
    let name = a.name.unwrap_or_else(|| format!("{:?}", a.kind).to_lowercase());
    let file = ProtocolFile::new(name, spec, a.signal_kind.into())?;
    emit(out, a.out.as_deref(), &to_json(&file)?)
}

#[derive(Debug, Clone, Serialize)]
struct GridSpec {
    x_min: f64,
    x_max: f64,
    points: usize,
}

fn parse_grid(s: &str) -> CliResult<GridSpec> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::input(format!("grid {s:?} must look like x_min:x_max:points")));
    }
    let num = |p: &str| p.trim().parse::<f64>().map_err(|_| CliError::input(format!("bad grid value {p:?}")));
    let points: usize =
        parts[2].trim().parse().map_err(|_| CliError::input(format!("bad point count {:?}", parts[2])))?;
    let g = GridSpec { x_min: num(parts[0])?, x_max: num(parts[1])?, points };
    if g.points < 2 || !(g.x_min < g.x_max) {
        return Err(CliError::input("grid needs x_min < x_max and at least 2 points"));
    }
    Ok(g)
}

fn grid_points(g: &GridSpec) -> Vec<f64> {
    let h = (g.x_max - g.x_min) / (g.points - 1) as f64;
    (0..g.points).map(|i| if i + 1 == g.points { g.x_max } else { g.x_min + h * i as f64 }).collect()
}

impl BoundArg {
    fn kind(self) -> BoundKind {
        match self {
            BoundArg::Secant => BoundKind::Secant,
            BoundArg::Simple => BoundKind::Simple,
            BoundArg::ChebyshevLower => BoundKind::ChebyshevLower,
        }
    }

    fn name(self) -> &'static str {
        match self {
            BoundArg::Secant => "secant",
            BoundArg::Simple => "simple",
            BoundArg::ChebyshevLower => "chebyshev_lower",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    x: f64,
    re_p: f64,
    im_p: f64,
    abs_p2: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    bounds: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Serialize)]
struct SweepMeta<'a> {
    tool: &'static str,
    version: &'static str,
    protocol: &'a ProtocolFile,
    signal_kind: SignalKind,
    grid: GridSpec,
    bounds: Vec<&'static str>,
    beta_max: f64,
}

fn cmd_eval(a: EvalArgs, out: &mut dyn Write, err: &mut dyn Write, beta_max: f64) -> CliResult<i32> {
    let file = read_protocol_file(&a.protocol)?;
    let protocol = file.protocol()?;
    let kind: SignalKind = a.signal_kind.map(Into::into).unwrap_or(file.signal_kind);
    let grid = match (&a.grid, a.x) {
        (Some(g), _) => parse_grid(g)?,
        (None, Some(x)) => GridSpec { x_min: x, x_max: x, points: 1 },
        (None, None) => return Err(CliError::input("one of --grid or --x is required")),
    };
    let xs = if grid.points == 1 { vec![grid.x_min] } else { grid_points(&grid) };
    let signals = xs.iter().map(|&x| Signal::from_x(kind, x, beta_max)).collect::<crate::Result<Vec<_>>>()?;

    let constant = if a.bounds.is_empty() {
        None
    } else {
        if kind != SignalKind::Hyperbolic {
            return Err(CliError::input("bounds apply to hyperbolic sweeps only"));
        }
        Some(file.constant_params().ok_or_else(|| {
            CliError::input("bounds need a constant-phase protocol (kind constant, or explicit iterate with equal phases)")
        })?)
    };

    let mut rows = Vec::with_capacity(xs.len());
    let mut violations = Vec::new();
    for sig in signals {
        let p = protocol.eval(sig).a11;
        let abs_p2 = p.norm_sqr();
        let mut bounds = Vec::with_capacity(a.bounds.len());
        if let Some((n, phi)) = constant {
            let sec = 1.0 / phi.cos();
            for &b in &a.bounds {
                // Out-of-domain points get an empty cell and no check.
                let v = bound(b.kind(), n, phi, sig.x()).ok();
                if let Some(v) = v {
                    let tol = WEAK_STEP_TOL * v.abs().max(1.0);
                    // The simple bound caps |P|; the other two bound |P|².
                    let (value, ok) = match b {
                        BoundArg::ChebyshevLower => (abs_p2, sig.x() < sec - POLE_GUARD || abs_p2 >= v - tol),
                        BoundArg::Secant => (abs_p2, abs_p2 <= v + tol),
                        BoundArg::Simple => (abs_p2.sqrt(), abs_p2.sqrt() <= v + tol),
                    };
                    if !ok {
                        violations.push((sig.x(), b.name(), value, v));
                    }
                }
                bounds.push(v.filter(|v| v.is_finite()));
            }
        }
        rows.push(SweepRow { x: sig.x(), re_p: p.re, im_p: p.im, abs_p2, bounds });
    }

    let meta = SweepMeta {
        tool: "hyperqsp",
        version: TOOL_VERSION,
        protocol: &file,
        signal_kind: kind,
        grid,
        bounds: a.bounds.iter().map(|b| b.name()).collect(),
        beta_max,
    };
    let text = match a.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Sweep<'a> {
                metadata: SweepMeta<'a>,
                rows: Vec<SweepRow>,
            }
            to_json(&Sweep { metadata: meta, rows })?
        }
        Format::Csv => {
            let mut s = String::new();
            let header = serde_json::to_string(&meta).map_err(|e| CliError { code: EXIT_INTERNAL, msg: e.to_string() })?;
            s.push_str(&format!("# {header}\n"));
            s.push_str("x,re_p,im_p,abs_p2");
            for b in &a.bounds {
                s.push(',');
                s.push_str(b.name());
            }
            s.push('\n');
            for r in &rows {
                s.push_str(&format!("{},{},{},{}", r.x, r.re_p, r.im_p, r.abs_p2));
                for v in &r.bounds {
                    s.push(',');
                    if let Some(v) = v {
                        s.push_str(&v.to_string());
                    }
                }
                s.push('\n');
            }
            s
        }
    };
    emit(out, a.out.as_deref(), &text)?;

    if constant.is_some() {
        if let Some(&(x, name, value, b)) = violations.first() {
            let _ = writeln!(
                err,
                "bound check failed at {} point(s); first: x = {x}, compared value {value}, {name} = {b}",
                violations.len()
            );
            return Ok(EXIT_CHECK_FAILED);
        }
        let _ = writeln!(err, "bound check passed ({} points)", xs.len());
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct SynthReport {
    degree: usize,
    parity: Parity,
    /// Largest Chebyshev coefficient difference between Re P and the target.
    max_coeff_deviation: f64,
    /// Largest |Re P(x) − target(x)| over the verification grid on [−1, 1].
    max_grid_deviation: f64,
    grid_points: usize,
    protocol: ProtocolFile,
}

fn cmd_synth(a: SynthArgs, out: &mut dyn Write) -> CliResult<()> {
    let coeffs: Vec<Complex64> = number_list(&a.coeffs)?.into_iter().map(|c| Complex64::new(c, 0.0)).collect();
    if coeffs.is_empty() {
        return Err(CliError::input("--coeffs is empty"));
    }
    let target = match (a.basis, a.parity) {
        (Basis::Chebyshev, Some(p)) => ParityPoly::new(coeffs, p.into())?,
        (Basis::Chebyshev, None) => ParityPoly::infer(coeffs)?,
        (Basis::Monomial, p) => {
            let inferred = ParityPoly::infer(ParityPoly::from_monomial(&coeffs, Parity::Mixed)?.coeffs().to_vec())?;
            match p {
                Some(p) => ParityPoly::new(inferred.coeffs().to_vec(), p.into())?,
                None => inferred,
            }
        }
    };
    let precision = match a.precision {
        PrecisionArg::Auto => Precision::Auto,
        PrecisionArg::Double => Precision::Double,
        PrecisionArg::Extended => Precision::Extended,
    };
    let opts = SynthesisOptions { precision, ..SynthesisOptions::default() };
    let syn = synthesize_with(&target, &opts)?;

    let achieved = protocol_to_pair(&syn.phases).p;
    let grid_points = 201;
    let max_grid_deviation = (0..grid_points)
        .map(|i| -1.0 + 2.0 * i as f64 / (grid_points - 1) as f64)
        .map(|x| (achieved.eval_real(x).re - target.eval_real(x).re).abs())
        .fold(0.0, f64::max);

    let picture: Picture = a.picture.into();
    let phases = match picture {
        Picture::Su11 => syn.phases.to_vec(),
        Picture::Su2 => syn.su2_phases.to_vec(),
    };
    let spec = ProtocolSpec::Explicit { phases, convention: Convention::PhasedBoost, picture };
    let file = ProtocolFile::new("synthesized".into(), spec, SignalKind::Hyperbolic)?;
    if let Some(path) = &a.out {
        emit(out, Some(path), &to_json(&file)?)?;
    }
    let report = SynthReport {
        degree: target.degree(),
        parity: target.parity(),
        max_coeff_deviation: syn.max_deviation,
        max_grid_deviation,
        grid_points,
        protocol: file,
    };
    emit(out, None, &to_json(&report)?)
}

#[derive(Debug, Serialize)]
struct LowGainReport {
    theta: f64,
    stages: usize,
    stage_phi: f64,
    low_gain: Complex64,
    exact: Complex64,
    difference: f64,
    tolerance: f64,
    within_tolerance: bool,
    out_of_regime: bool,
}

#[derive(Debug, Serialize)]
struct ModesReport {
    beta: f64,
    u: Complex64,
    v: Complex64,
    commutator_defect: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    low_gain: Option<LowGainReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    controlled: Option<[BogoliubovMap; 2]>,
}

fn protocol_mode_map(protocol: &Protocol, beta: f64, beta_max: f64) -> crate::Result<BogoliubovMap> {
    let bf = protocol.boost_form();
    let frame = BogoliubovMap { u: Complex64::from_polar(1.0, bf.frame), v: Complex64::new(0.0, 0.0) };
    Ok(composite_mode_map_with_cutoff(&bf.boosts, beta, beta_max)? * frame)
}

fn cmd_modes(a: ModesArgs, out: &mut dyn Write, beta_max: f64) -> CliResult<()> {
    let file = read_protocol_file(&a.protocol)?;
    let protocol = file.protocol()?;
    let map = protocol_mode_map(&protocol, a.beta, beta_max)?;

    let low_gain = match (&a.theta, a.stages) {
        (Some(theta), Some(stages)) => {
            let theta = angle(theta)?;
            let stage_phi = angle(&a.stage_phi)?;
            if stages == 0 {
                return Err(CliError::input("--stages must be at least 1"));
            }
            let st = StagedInterferometer::with_cutoff(
                (0..stages).map(|k| (a.beta, stage_phi - k as f64 * theta)).collect(),
                beta_max,
            )?;
            let exact = staged_amplitude_exact(&st).v;
            let lg = low_gain_effective(a.beta, theta, stage_phi, stages);
            let difference = (exact - lg.amplitude).norm();
            let tolerance = 10.0 * a.beta.sinh().powi(2);
            Some(LowGainReport {
                theta,
                stages,
                stage_phi,
                low_gain: lg.amplitude,
                exact,
                difference,
                tolerance,
                within_tolerance: difference <= tolerance,
                out_of_regime: lg.out_of_regime,
            })
        }
        _ => None,
    };

    let controlled = match a.beta1 {
        Some(b1) => {
            let bf = protocol.boost_form();
            let (m0, m1) = controlled_squeeze_branches_with_cutoff(a.beta, b1, &bf.boosts, beta_max)?;
            let frame = BogoliubovMap { u: Complex64::from_polar(1.0, bf.frame), v: Complex64::new(0.0, 0.0) };
            Some([m0 * frame, m1 * frame])
        }
        None => None,
    };

    let report = ModesReport {
        beta: a.beta,
        u: map.u,
        v: map.v,
        commutator_defect: commutator_defect(&map),
        low_gain,
        controlled,
    };
    emit(out, a.out.as_deref(), &to_json(&report)?)
}

type NamedFn = (&'static str, fn(f64) -> f64);

/// Compiles an expression in `x`. Short names such as `exp`, `sqrt` and
/// `cosh` resolve to their `math::` builtins, and `pi`, `e` are predefined.
pub fn compile_target(expr: &str) -> crate::Result<impl Fn(f64) -> f64> {
    let tree: Node<DefaultNumericTypes> = evalexpr::build_operator_tree(expr)
        .map_err(|e| Error::InvalidTarget(format!("cannot parse {expr:?}: {e}")))?;
    let mut base = HashMapContext::<DefaultNumericTypes>::new();
    let unary: [NamedFn; 18] = [
        ("exp", f64::exp),
        ("ln", f64::ln),
        ("sqrt", f64::sqrt),
        ("abs", f64::abs),
        ("sin", f64::sin),
        ("cos", f64::cos),
        ("tan", f64::tan),
        ("sinh", f64::sinh),
        ("cosh", f64::cosh),
        ("tanh", f64::tanh),
        ("asin", f64::asin),
        ("acos", f64::acos),
        ("atan", f64::atan),
        ("asinh", f64::asinh),
        ("acosh", f64::acosh),
        ("atanh", f64::atanh),
        ("log10", f64::log10),
        ("cbrt", f64::cbrt),
    ];
    for (name, f) in unary {
        base.set_function(
            name.to_string(),
            Function::new(move |arg: &Value<DefaultNumericTypes>| Ok(Value::Float(f(arg.as_number()?)))),
        )
        .map_err(|e| Error::Internal(e.to_string()))?;
    }
    for (name, v) in [("pi", std::f64::consts::PI), ("e", std::f64::consts::E)] {
        base.set_value(name.to_string(), Value::Float(v)).map_err(|e| Error::Internal(e.to_string()))?;
    }
    let eval = move |x: f64| -> std::result::Result<f64, String> {
        let mut ctx = base.clone();
        ctx.set_value("x".to_string(), Value::Float(x)).map_err(|e| e.to_string())?;
        tree.eval_number_with_context(&ctx).map_err(|e| e.to_string())
    };
    // Probe once so that unknown identifiers fail up front.
    eval(1.5).map_err(|e| Error::InvalidTarget(format!("cannot evaluate {expr:?}: {e}")))?;
    Ok(move |x: f64| eval(x).unwrap_or(f64::NAN))
}

#[derive(Debug, Serialize)]
struct FitRow {
    degree: usize,
    l2_residual: f64,
    sup_residual: f64,
    min_pivot: f64,
}

#[derive(Debug, Serialize)]
struct FitReport {
    target: String,
    x_max: f64,
    quadrature_order: usize,
    degree: usize,
    parity: Parity,
    /// Real Chebyshev-T coefficients of the fit.
    chebyshev_coeffs: Vec<f64>,
    l2_residual: f64,
    sup_residual: f64,
    min_pivot: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    table: Vec<FitRow>,
}

fn cmd_fit(a: FitArgs, out: &mut dyn Write, beta_max: f64) -> CliResult<()> {
    let f = compile_target(&a.target)?;
    let order = a.order.unwrap_or(2 * a.degree + 8);
    let dom = FitDomain::with_cutoff(a.x_max, order, beta_max)?;
    let parity: Parity = a.parity.into();
    let fit = fit_target(&f, a.degree, parity, &dom)?;
    let mut table = Vec::new();
    if a.table {
        let start = if parity == Parity::Odd { 1 } else { 0 };
        let step = if parity == Parity::Mixed { 1 } else { 2 };
        for d in (start..=a.degree).step_by(step) {
            let r = fit_target(&f, d, parity, &dom)?;
            table.push(FitRow { degree: d, l2_residual: r.l2_residual, sup_residual: r.sup_residual, min_pivot: r.min_pivot });
        }
    }
    let report = FitReport {
        target: a.target.clone(),
        x_max: a.x_max,
        quadrature_order: dom.order(),
        degree: a.degree,
        parity,
        chebyshev_coeffs: fit.poly.coeffs().iter().map(|z| z.re).collect(),
        l2_residual: fit.l2_residual,
        sup_residual: fit.sup_residual,
        min_pivot: fit.min_pivot,
        table,
    };
    emit(out, a.out.as_deref(), &to_json(&report)?)
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = beta_max_from_env().map_err(CliError::from).and_then(|beta_max| match cli.command {
        Command::Gen(a) => cmd_gen(a, out).map(|_| EXIT_OK),
        Command::Eval(a) => cmd_eval(a, out, err, beta_max),
        Command::Synth(a) => cmd_synth(a, out).map(|_| EXIT_OK),
        Command::Modes(a) => cmd_modes(a, out, beta_max).map(|_| EXIT_OK),
        Command::Fit(a) => cmd_fit(a, out, beta_max).map(|_| EXIT_OK),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code
        }
    }
}

pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
