//! The `zeta` command-line front end.

mod output;
pub mod verify;

use crate::graphzeta::{GraphError, WeightedGraph};
use crate::intermediate::{IntermediateError, IntermediateZeta};
use crate::laurent::SeriesError;
use crate::schottky::{
    builtin_from_json, builtin_funneled_torus, builtin_three_funnel, builtin_two_generator, check_schottky_figure,
    check_star_condition, ford_discs, SchottkyError, SchottkyFamily,
};
use crate::selberg::{Method, SelbergError, SelbergEvaluator, TransferConfig};
use crate::zeros::{find_zeros, first_real_zero, Region, ZeroError, ZeroSet};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;

pub use output::{format_f64, to_json};

#[derive(Parser, Debug)]
#[command(
    name = "zeta",
    version,
    about = "Selberg, Ihara and intermediate zeta functions of Schottky families"
)]
pub struct Cli {
    /// Worker threads for parallel evaluation (default: available cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output format of grid evaluations (default: csv, or json for a single ihara value).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Inspect or validate a family.
    Family {
        #[command(subcommand)]
        action: FamilyAction,
    },
    /// Ihara zeta function of a graph file.
    Ihara(IharaArgs),
    /// Selberg zeta function on a grid of s values, as CSV.
    Selberg(SelbergArgs),
    /// Intermediate zeta function Z_M on a grid of s values, or symbolically.
    Intermediate(IntermediateArgs),
    /// Hausdorff dimension of the limit set.
    Dim(DimArgs),
    /// Zeros of a zeta function in a rectangle, as JSON.
    Zeros(ZerosArgs),
    /// Zeros in consecutive vertical strips of one period each.
    Resonances(ResonanceArgs),
    /// Any zeta function on a 2D grid of s values, as CSV.
    Scan(ScanArgs),
    /// Runs the acceptance suite and prints a pass/fail table.
    Verify(VerifyArgs),
}

#[derive(Subcommand, Debug)]
pub enum FamilyAction {
    /// Checks condition (star) and, given a point, the Schottky figure.
    Validate {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        point: OptionalPoint,
    },
    /// Prints the canonical JSON document of the family.
    Show {
        #[command(flatten)]
        family: FamilyArgs,
    },
}

#[derive(Args, Debug, Clone)]
pub struct FamilyArgs {
    /// Built-in name (three-funnel, torus, two-generator) or path to a family JSON file.
    #[arg(long)]
    pub family: String,
    /// Angle between the shortest geodesics of the torus.
    #[arg(long, default_value_t = FRAC_PI_2)]
    pub phi: f64,
    /// Leading coefficients A,B,C of the two-generator family.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [1.0, 1.0, 1.0])]
    pub lead: Vec<f64>,
    /// Orders n1,n2,n3 of the two-generator family.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [1, 1, 4])]
    pub orders: Vec<i64>,
    /// Series truncation for built-in families.
    #[arg(long, default_value_t = 32)]
    pub truncation: usize,
}

#[derive(Args, Debug, Clone)]
pub struct Point {
    /// Degeneration parameter z (real).
    #[arg(long, conflicts_with = "ell")]
    pub z: Option<f64>,
    /// Geodesic length parameter; needs a family with a length scale.
    #[arg(long)]
    pub ell: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct OptionalPoint {
    #[arg(long, conflicts_with = "ell")]
    pub z: Option<f64>,
    #[arg(long)]
    pub ell: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct SGrid {
    /// Single s value such as `0.5`, `1-2i` or `3i`; repeatable.
    #[arg(long = "s", allow_hyphen_values = true)]
    pub s: Vec<String>,
    /// Grid `RE_MIN:RE_MAX:N_RE,IM_MIN:IM_MAX:N_IM`.
    #[arg(long, allow_hyphen_values = true)]
    pub s_grid: Option<String>,
}

#[derive(Args, Debug)]
pub struct IharaArgs {
    /// Graph JSON: {"vertices": n, "edges": [{"from", "to", "a", "b"}]}.
    #[arg(long)]
    pub graph: PathBuf,
    /// Value of L for lengths a + b/L; omitted means b is ignored.
    #[arg(long)]
    pub l: Option<f64>,
    #[command(flatten)]
    pub grid: SGrid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Det,
    Euler,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Det => Method::Det,
            MethodArg::Euler => Method::Euler,
        }
    }
}

#[derive(Args, Debug)]
pub struct SelbergArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[command(flatten)]
    pub point: Point,
    #[command(flatten)]
    pub grid: SGrid,
    #[arg(long, value_enum, default_value_t = MethodArg::Det)]
    pub method: MethodArg,
    /// Taylor coefficients per disc for the determinant method.
    #[arg(long, default_value_t = 20)]
    pub k: usize,
    /// Word length of the discs for the determinant method.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Output CSV file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct IntermediateArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Truncation order M of the length expansion.
    #[arg(long = "M", default_value_t = 0)]
    pub m: usize,
    /// Horizon override (word length of the cocycle keys).
    #[arg(long)]
    pub horizon: Option<usize>,
    #[command(flatten)]
    pub point: OptionalPoint,
    #[command(flatten)]
    pub grid: SGrid,
    /// Prints the polynomial in exponential monomials instead of values.
    #[arg(long)]
    pub symbolic: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DimMethod {
    Det,
    Euler,
    Intermediate,
}

#[derive(Args, Debug)]
pub struct DimArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[command(flatten)]
    pub point: Point,
    #[arg(long, value_enum, default_value_t = DimMethod::Det)]
    pub method: DimMethod,
    /// Truncation order for the intermediate method.
    #[arg(long = "M", default_value_t = 0)]
    pub m: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ZetaKind {
    Selberg,
    Intermediate,
    Ihara,
}

#[derive(Args, Debug, Clone)]
pub struct Target {
    /// Which zeta function to use.
    #[arg(long, value_enum, default_value_t = ZetaKind::Intermediate)]
    pub zeta: ZetaKind,
    /// Family for the selberg and intermediate targets.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long, default_value_t = FRAC_PI_2)]
    pub phi: f64,
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [1.0, 1.0, 1.0])]
    pub lead: Vec<f64>,
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [1, 1, 4])]
    pub orders: Vec<i64>,
    #[arg(long, default_value_t = 32)]
    pub truncation: usize,
    /// Graph file for the ihara target.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long, conflicts_with = "ell")]
    pub z: Option<f64>,
    #[arg(long)]
    pub ell: Option<f64>,
    #[arg(long = "M", default_value_t = 0)]
    pub m: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Det)]
    pub method: MethodArg,
    /// Rescale s by log(1/|z|) for the selberg target, matching Z_M.
    #[arg(long)]
    pub rescaled: bool,
}

#[derive(Args, Debug)]
pub struct ZerosArgs {
    #[command(flatten)]
    pub target: Target,
    /// Rectangle `RE_MIN:RE_MAX,IM_MIN:IM_MAX`.
    #[arg(long, allow_hyphen_values = true)]
    pub region: String,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct ResonanceArgs {
    #[command(flatten)]
    pub target: Target,
    /// Number of strips.
    #[arg(long, default_value_t = 2)]
    pub strips: usize,
    /// Real range `RE_MIN:RE_MAX`.
    #[arg(long, allow_hyphen_values = true, default_value = "-3:3")]
    pub re: String,
    /// Strip height; default is the period of the target, else 2 pi.
    #[arg(long)]
    pub period: Option<f64>,
    /// Imaginary part where the first strip starts.
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub start: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[command(flatten)]
    pub target: Target,
    #[command(flatten)]
    pub grid: SGrid,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Runs only the listed criteria.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorKind {
    Validation,
    Certification,
    Internal,
}

#[derive(Clone, Debug, Serialize)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Validation,
            message: message.into(),
        }
    }

    pub fn certification(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Certification,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Internal,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Validation => 2,
            ErrorKind::Certification => 3,
            ErrorKind::Internal => 4,
        }
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Body<'a> {
            error: &'a ErrorKind,
            message: &'a str,
            exit_code: i32,
        }
        to_json(&Body {
            error: &self.kind,
            message: &self.message,
            exit_code: self.exit_code(),
        })
    }
}

impl From<SchottkyError> for CliError {
    fn from(e: SchottkyError) -> Self {
        Self::validation(e.to_string())
    }
}

impl From<SeriesError> for CliError {
    fn from(e: SeriesError) -> Self {
        Self::validation(e.to_string())
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        Self::validation(e.to_string())
    }
}

impl From<ZeroError> for CliError {
    fn from(e: ZeroError) -> Self {
        match e {
            ZeroError::InvalidRegion => Self::validation(e.to_string()),
            _ => Self::certification(e.to_string()),
        }
    }
}

impl From<SelbergError> for CliError {
    fn from(e: SelbergError) -> Self {
        match e {
            SelbergError::Zeros(z) => z.into(),
            SelbergError::BranchAmbiguity { .. } => Self::certification(e.to_string()),
            _ => Self::validation(e.to_string()),
        }
    }
}

impl From<IntermediateError> for CliError {
    fn from(e: IntermediateError) -> Self {
        match e {
            IntermediateError::HorizonNotFound { .. }
            | IntermediateError::ExpansionTooLarge(_)
            | IntermediateError::IncommensurableExponent { .. } => Self::certification(e.to_string()),
            _ => Self::validation(e.to_string()),
        }
    }
}

/// Resolves a family by built-in name or JSON path.
pub fn load_family(
    name: &str,
    phi: f64,
    lead: &[f64],
    orders: &[i64],
    truncation: usize,
) -> Result<SchottkyFamily, CliError> {
    match name {
        "three-funnel" => Ok(builtin_three_funnel(truncation)),
        "torus" | "funneled-torus" => Ok(builtin_funneled_torus(phi, truncation)),
        "two-generator" => {
            let lead = [lead[0], lead[1], lead[2]];
            if lead.iter().any(|x| *x == 0.0 || !x.is_finite()) {
                return Err(CliError::validation("leading coefficients must be finite and nonzero"));
            }
            let orders = [orders[0], orders[1], orders[2]];
            if orders[0] < 1 || orders[1] < 1 || (orders[0] - orders[1]).abs() >= orders[2] {
                return Err(CliError::validation(
                    "orders must satisfy n1, n2 >= 1 and |n1 - n2| < n3",
                ));
            }
            // 1 - alpha = (A B / C) t^{n3 - n1 - n2} must not be 1, or gamma_2 fixes 0
            if orders[2] == orders[0] + orders[1] && (lead[0] * lead[1] / lead[2] - 1.0).abs() < 1e-12 {
                return Err(CliError::validation(
                    "A B / C = 1 with n3 = n1 + n2 gives a common fixed point",
                ));
            }
            Ok(builtin_two_generator(lead, orders, truncation))
        }
        path => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::validation(format!("unknown family `{path}` ({e})")))?;
            Ok(builtin_from_json(&text)?)
        }
    }
}

impl FamilyArgs {
    pub fn load(&self) -> Result<SchottkyFamily, CliError> {
        load_family(&self.family, self.phi, &self.lead, &self.orders, self.truncation)
    }
}

fn resolve_z(fam: &SchottkyFamily, z: Option<f64>, ell: Option<f64>) -> Result<Option<f64>, CliError> {
    let z = match (z, ell) {
        (Some(z), None) => z,
        (None, Some(ell)) => fam
            .z_for_length(ell)
            .ok_or_else(|| CliError::validation(format!("family `{}` has no length scale; pass --z", fam.name)))?,
        (None, None) => return Ok(None),
        (Some(_), Some(_)) => return Err(CliError::validation("pass exactly one of --z and --ell")),
    };
    if !(z > 0.0 && z < 1.0) {
        return Err(CliError::validation(format!("z = {z} must lie in (0, 1)")));
    }
    Ok(Some(z))
}

fn require_z(fam: &SchottkyFamily, z: Option<f64>, ell: Option<f64>) -> Result<f64, CliError> {
    resolve_z(fam, z, ell)?.ok_or_else(|| CliError::validation("pass one of --z and --ell"))
}

/// Parses `a`, `a+bi`, `a-bi`, `bi`.
pub fn parse_complex(text: &str) -> Result<C64, CliError> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || CliError::validation(format!("cannot parse complex number `{text}`"));
    if let Some(body) = t.strip_suffix('i') {
        // split at the last sign that is not part of an exponent
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
        let (re, im) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => 1.0,
            "-" => -1.0,
            x => x.parse::<f64>().map_err(|_| bad())?,
        };
        Ok(C64::new(re.parse::<f64>().map_err(|_| bad())?, im))
    } else {
        Ok(C64::new(t.parse::<f64>().map_err(|_| bad())?, 0.0))
    }
}

fn parse_range(text: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::validation(format!("cannot parse range `{text}`, expected MIN:MAX"));
    let (a, b) = text.split_once(':').ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    Ok((a, b))
}

fn parse_axis(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::validation(format!("cannot parse grid axis `{text}`, expected MIN:MAX:N"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    match n {
        0 => Err(CliError::validation("grid axes need at least one point")),
        1 => Ok(vec![a]),
        _ => Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()),
    }
}

/// Grid points in row-major order: real part outer, imaginary part inner.
pub fn parse_grid(text: &str) -> Result<Vec<C64>, CliError> {
    let (re, im) = text
        .split_once(',')
        .ok_or_else(|| CliError::validation(format!("grid `{text}` needs a real and an imaginary axis")))?;
    let (re, im) = (parse_axis(re)?, parse_axis(im)?);
    Ok(re
        .iter()
        .flat_map(|&x| im.iter().map(move |&y| C64::new(x, y)))
        .collect())
}

pub fn parse_region(text: &str) -> Result<Region, CliError> {
    let (re, im) = text
        .split_once(',')
        .ok_or_else(|| CliError::validation(format!("region `{text}` must be RE_MIN:RE_MAX,IM_MIN:IM_MAX")))?;
    let (a, b) = parse_range(re)?;
    let (c, d) = parse_range(im)?;
    Ok(Region::new(a, b, c, d)?)
}

impl SGrid {
    fn points(&self) -> Result<Vec<C64>, CliError> {
        let mut pts = self.s.iter().map(|s| parse_complex(s)).collect::<Result<Vec<_>, _>>()?;
        if let Some(g) = &self.s_grid {
            pts.extend(parse_grid(g)?);
        }
        if pts.is_empty() {
            return Err(CliError::validation("pass --s or --s-grid"));
        }
        Ok(pts)
    }
}

fn read_graph(path: &PathBuf) -> Result<WeightedGraph, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
    let g: WeightedGraph =
        serde_json::from_str(&text).map_err(|e| CliError::validation(format!("invalid graph JSON: {e}")))?;
    Ok(WeightedGraph::new(g.vertices, g.edges)?)
}

/// A zeta function of one complex variable built from a [`Target`].
pub struct Evaluator {
    f: Box<dyn Fn(C64) -> (C64, f64) + Sync>,
    pub period: Option<f64>,
    pub description: String,
}

impl Evaluator {
    pub fn eval(&self, s: C64) -> (C64, f64) {
        (self.f)(s)
    }
}

impl Target {
    pub fn evaluator(&self) -> Result<Evaluator, CliError> {
        if self.zeta == ZetaKind::Ihara {
            let path = self
                .graph
                .as_ref()
                .ok_or_else(|| CliError::validation("the ihara target needs --graph"))?;
            let g = read_graph(path)?;
            let period = g.strip_period(None);
            return Ok(Evaluator {
                description: format!("ihara({})", path.display()),
                f: Box::new(move |s| (g.ihara_det(s, None), 0.0)),
                period,
            });
        }
        let name = self
            .family
            .as_deref()
            .ok_or_else(|| CliError::validation("pass --family (or --graph with --zeta ihara)"))?;
        let fam = load_family(name, self.phi, &self.lead, &self.orders, self.truncation)?;
        let z = require_z(&fam, self.z, self.ell)?;
        let zc = C64::new(z, 0.0);
        let l = (1.0 / z).ln();
        match self.zeta {
            ZetaKind::Intermediate => {
                let iz = IntermediateZeta::new(&fam, self.m)?;
                let period = iz.symbolic().ok().and_then(|p| ihara_period(&p));
                Ok(Evaluator {
                    description: format!("Z_{}({}, z={})", self.m, fam.name, format_f64(z)),
                    f: Box::new(move |s| (iz.eval(zc, s), 0.0)),
                    period,
                })
            }
            ZetaKind::Selberg => {
                let ev = SelbergEvaluator::new(&fam, zc, self.method.into())?;
                let scale = if self.rescaled { 1.0 / l } else { 1.0 };
                Ok(Evaluator {
                    description: format!(
                        "Z({}, z={}, s{})",
                        fam.name,
                        format_f64(z),
                        if self.rescaled { "/L" } else { "" }
                    ),
                    f: Box::new(move |s| ev.eval(s * scale)),
                    period: None,
                })
            }
            ZetaKind::Ihara => unreachable!(),
        }
    }
}

/// Imaginary period of a symbolic `Z_M` whose atoms are all pure exponentials
/// in `s` with a common integer lattice, i.e. `Z_0`.
fn ihara_period(p: &crate::intermediate::SymbolicZetaM) -> Option<f64> {
    if p.atoms.len() != 1 {
        return None;
    }
    let mut g = 0i64;
    for (e, _) in &p.terms {
        g = gcd(g, e[0] as i64);
    }
    (g != 0).then(|| 2.0 * std::f64::consts::PI / g.abs() as f64)
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

#[derive(Serialize)]
struct FamilyReport {
    name: String,
    g: usize,
    star: crate::schottky::StarReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    z: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    figure: Option<crate::schottky::FigureReport>,
    valid: bool,
}

#[derive(Serialize)]
struct DimReport {
    dim: f64,
    main_term: f64,
    method: &'static str,
}

#[derive(Serialize)]
struct StripReport {
    index: usize,
    region: Region,
    zeros: ZeroSet,
}

#[derive(Serialize)]
struct ResonanceReport {
    target: String,
    period: f64,
    strips: Vec<StripReport>,
}

/// Sink for the primary output: a file or stdout.
fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| CliError::internal(format!("cannot write {}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Evaluates `f` on every point in parallel; results keep the input order.
fn eval_points<F: Fn(C64) -> (C64, f64) + Sync>(f: &F, pts: &[C64]) -> Vec<(C64, C64, f64)> {
    use rayon::prelude::*;
    pts.par_iter()
        .map(|&s| {
            let (v, e) = f(s);
            (s, v, e)
        })
        .collect()
}

/// Main term of the dimension: first real zero of the Ihara zeta of the
/// skeleton, divided by `log(1/z)`.
fn main_term(fam: &SchottkyFamily, z: f64) -> Result<f64, CliError> {
    let ihara = IntermediateZeta::new(fam, 0)?.symbolic()?.ihara_from();
    let f = |s: f64| {
        ihara
            .iter()
            .map(|&(n, c)| c as f64 * (-n as f64 * s).exp())
            .sum::<f64>()
    };
    let s0 = first_real_zero(&f, 1e-4, 20.0, 1e-14)?;
    Ok(s0 / (1.0 / z).ln())
}

/// Grid rows as CSV (`s_re,s_im,value_re,value_im[,tail_bound]`) or as a
/// JSON array of `{"s", "value"[, "tail_bound"]}` objects.
fn grid_output(format: Option<Format>, rows: &[(C64, C64, f64)], with_err: bool) -> String {
    #[derive(Serialize)]
    struct Row {
        s: C64,
        value: C64,
        #[serde(skip_serializing_if = "Option::is_none")]
        tail_bound: Option<f64>,
    }
    match format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let header: &[&str] = if with_err {
                &["s_re", "s_im", "value_re", "value_im", "tail_bound"]
            } else {
                &["s_re", "s_im", "value_re", "value_im"]
            };
            output::csv(header, rows, with_err)
        }
        Format::Json => {
            let rows: Vec<Row> = rows
                .iter()
                .map(|&(s, value, e)| Row {
                    s,
                    value,
                    tail_bound: with_err.then_some(e),
                })
                .collect();
            format!("{}\n", to_json(&rows))
        }
    }
}

/// Runs one parsed command; the caller maps errors to exit codes.
pub fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::internal(e.to_string()))?;
    }
    match cli.command {
        Command::Family { action } => match action {
            FamilyAction::Show { family } => {
                let fam = family.load()?;
                emit(None, &format!("{}\n", to_json(&fam.to_document())))
            }
            FamilyAction::Validate { family, point } => {
                let fam = family.load()?;
                let star = check_star_condition(&fam)?;
                let z = resolve_z(&fam, point.z, point.ell)?;
                let figure = match z {
                    Some(z) => {
                        let zc = C64::new(z, 0.0);
                        let discs = ford_discs(&fam, zc)?;
                        Some(check_schottky_figure(&discs, &fam.letter_maps(zc)?, fam.g))
                    }
                    None => None,
                };
                let valid = star.pass && figure.as_ref().is_none_or(|f| f.pass);
                let report = FamilyReport {
                    name: fam.name.clone(),
                    g: fam.g,
                    star,
                    z,
                    figure,
                    valid,
                };
                emit(None, &format!("{}\n", to_json(&report)))?;
                if valid {
                    Ok(())
                } else {
                    Err(CliError::validation(format!(
                        "family `{}` is not a valid Schottky family",
                        fam.name
                    )))
                }
            }
        },
        Command::Ihara(a) => {
            let g = read_graph(&a.graph)?;
            let pts = a.grid.points()?;
            let rows = eval_points(&|s| (g.ihara_det(s, a.l), 0.0), &pts);
            if rows.len() == 1 && cli.format != Some(Format::Csv) {
                #[derive(Serialize)]
                struct One {
                    s: C64,
                    value: C64,
                }
                emit(
                    None,
                    &format!(
                        "{}\n",
                        to_json(&One {
                            s: rows[0].0,
                            value: rows[0].1
                        })
                    ),
                )
            } else {
                emit(None, &grid_output(cli.format, &rows, false))
            }
        }
        Command::Selberg(a) => {
            let fam = a.family.load()?;
            let z = C64::new(require_z(&fam, a.point.z, a.point.ell)?, 0.0);
            let ev = match a.method {
                MethodArg::Det => SelbergEvaluator::det_with(
                    &fam,
                    z,
                    TransferConfig {
                        k: a.k,
                        q: 4 * a.k,
                        n: a.n,
                    },
                )?,
                MethodArg::Euler => SelbergEvaluator::new(&fam, z, Method::Euler)?,
            };
            let rows = eval_points(&|s| ev.eval(s), &a.grid.points()?);
            emit(a.out.as_ref(), &grid_output(cli.format, &rows, true))
        }
        Command::Intermediate(a) => {
            let fam = a.family.load()?;
            let iz = match a.horizon {
                Some(n) => IntermediateZeta::with_horizon(&fam, a.m, n)?,
                None => IntermediateZeta::new(&fam, a.m)?,
            };
            if a.symbolic {
                let p = iz.symbolic()?;
                return emit(a.out.as_ref(), &format!("N = {}\n{p}\n", iz.table.n));
            }
            let z = C64::new(require_z(&fam, a.point.z, a.point.ell)?, 0.0);
            let rows = eval_points(&|s| (iz.eval(z, s), 0.0), &a.grid.points()?);
            emit(a.out.as_ref(), &grid_output(cli.format, &rows, false))
        }
        Command::Dim(a) => {
            let fam = a.family.load()?;
            let z = require_z(&fam, a.point.z, a.point.ell)?;
            let zc = C64::new(z, 0.0);
            let (dim, method) = match a.method {
                DimMethod::Det => (crate::selberg::hausdorff_dim(&fam, zc, Method::Det)?, "det"),
                DimMethod::Euler => (crate::selberg::hausdorff_dim(&fam, zc, Method::Euler)?, "euler"),
                DimMethod::Intermediate => {
                    let iz = IntermediateZeta::new(&fam, a.m)?;
                    let f = |s: f64| iz.eval(zc, C64::new(s, 0.0)).re;
                    let s0 = first_real_zero(&f, 1e-4, 20.0, 1e-13)?;
                    (s0 / (1.0 / z).ln(), "intermediate")
                }
            };
            let report = DimReport {
                dim,
                main_term: main_term(&fam, z)?,
                method,
            };
            emit(None, &format!("{}\n", to_json(&report)))
        }
        Command::Zeros(a) => {
            let ev = a.target.evaluator()?;
            let region = parse_region(&a.region)?;
            let mut set = find_zeros(&|s| ev.eval(s).0, &region, a.tol)?;
            set.provenance = format!("{}; {}", ev.description, set.provenance);
            emit(None, &format!("{}\n", to_json(&set)))
        }
        Command::Resonances(a) => {
            let ev = a.target.evaluator()?;
            let (re0, re1) = parse_range(&a.re)?;
            let period = a.period.or(ev.period).unwrap_or(2.0 * std::f64::consts::PI);
            if a.strips == 0 {
                return Err(CliError::validation("--strips must be positive"));
            }
            let mut strips = Vec::with_capacity(a.strips);
            for k in 0..a.strips {
                let lo = a.start + k as f64 * period;
                let region = Region::new(re0, re1, lo, lo + period)?;
                let zeros = find_zeros(&|s| ev.eval(s).0, &region, a.tol)?;
                strips.push(StripReport {
                    index: k,
                    region,
                    zeros,
                });
            }
            let report = ResonanceReport {
                target: ev.description.clone(),
                period,
                strips,
            };
            emit(None, &format!("{}\n", to_json(&report)))
        }
        Command::Scan(a) => {
            let ev = a.target.evaluator()?;
            let rows = eval_points(&|s| ev.eval(s), &a.grid.points()?);
            emit(a.out.as_ref(), &grid_output(cli.format, &rows, true))
        }
        Command::Verify(a) => {
            let results = verify::run(&a.only);
            print!("{}", verify::table(&results));
            let failed: Vec<usize> = results.iter().filter(|r| !r.pass).map(|r| r.id).collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::certification(format!("criteria {failed:?} failed")))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("0.5").unwrap(), C64::new(0.5, 0.0));
        assert_eq!(parse_complex("1-2i").unwrap(), C64::new(1.0, -2.0));
        assert_eq!(parse_complex("-1.5e-3+4i").unwrap(), C64::new(-1.5e-3, 4.0));
        assert_eq!(parse_complex("3i").unwrap(), C64::new(0.0, 3.0));
        assert_eq!(parse_complex("-i").unwrap(), C64::new(0.0, -1.0));
        assert_eq!(parse_complex("2e+1-i").unwrap(), C64::new(20.0, -1.0));
        assert!(parse_complex("x").is_err());
    }

    #[test]
    fn grids_are_row_major() {
        let g = parse_grid("0:1:2,-1:1:3").unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(g[0], C64::new(0.0, -1.0));
        assert_eq!(g[1], C64::new(0.0, 0.0));
        assert_eq!(g[3], C64::new(1.0, -1.0));
        assert!(parse_grid("0:1:0,0:1:1").is_err());
        assert!(parse_grid("0:1").is_err());
    }

    #[test]
    fn regions_parse() {
        let r = parse_region("-1:2,-3:3").unwrap();
        assert_eq!((r.re_min, r.re_max, r.im_min, r.im_max), (-1.0, 2.0, -3.0, 3.0));
        assert!(matches!(
            parse_region("1:0,0:1"),
            Err(CliError {
                kind: ErrorKind::Validation,
                ..
            })
        ));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::validation("x").exit_code(), 2);
        assert_eq!(
            CliError::from(ZeroError::NoSignChange { a: 0.0, b: 1.0 }).exit_code(),
            3
        );
        assert_eq!(CliError::internal("x").exit_code(), 4);
        let j: serde_json::Value = serde_json::from_str(&CliError::validation("bad").to_json()).unwrap();
        assert_eq!(j["error"], "validation");
        assert_eq!(j["exit_code"], 2);
    }

    #[test]
    fn unknown_family_is_a_validation_error() {
        let e = load_family("no-such-family", 1.0, &[1.0; 3], &[1, 1, 4], 16).unwrap_err();
        assert_eq!(e.kind, ErrorKind::Validation);
        let e = load_family("two-generator", 1.0, &[1.0; 3], &[1, 1, 2], 16).unwrap_err();
        assert_eq!(e.kind, ErrorKind::Validation);
    }

    #[test]
    fn main_terms() {
        let tf = builtin_three_funnel(32);
        let z = tf.z_for_length(16.0).unwrap();
        assert!((main_term(&tf, z).unwrap() - 4f64.ln() / 16.0).abs() < 1e-12);
        let torus = builtin_funneled_torus(FRAC_PI_2, 32);
        let z = torus.z_for_length(10.0).unwrap();
        assert!((main_term(&torus, z).unwrap() - 3f64.ln() / 10.0).abs() < 1e-12);
    }
}
