//! Experiment configuration: a flat key=value file overlaid by command-line
//! flags (flags win), resolved against per-command defaults into a fully
//! typed [`ExperimentConfig`].
//!
//! Every resolution error names the offending field with the same spelling
//! the flag uses, so a `--n-start` problem is reported as `n-start` whether
//! it came from the file or the command line.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::Parser;
use thiserror::Error;

/// Keys accepted in config files; identical to the flag names without the
/// leading dashes.
const KNOWN_KEYS: [&str; 18] = [
    "command",
    "n-start",
    "n-end",
    "n-step",
    "r",
    "alpha-rule",
    "q-rule",
    "scheme",
    "matrix",
    "pn",
    "g",
    "grid-points",
    "tail-tol",
    "eps",
    "eps-prime",
    "n-cap",
    "u-grid",
    "out",
];

/// A configuration problem; rendering always names the field so the caller
/// can exit with a status-2 diagnostic.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("configuration error in field `{field}`: {detail}")]
    Invalid { field: String, detail: String },

    #[error("unknown configuration key `{key}` (known keys: {})", KNOWN_KEYS.join(", "))]
    UnknownKey { key: String },

    #[error("cannot read config file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn invalid(field: &str, detail: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.to_string(), detail: detail.into() }
}

/// The experiment selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Moments,
    Normalization,
    DwaKorovkin,
    PsumKorovkin,
    Counterexample,
    Regularity,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Moments => "moments",
            Command::Normalization => "normalization",
            Command::DwaKorovkin => "dwa-korovkin",
            Command::PsumKorovkin => "psum-korovkin",
            Command::Counterexample => "counterexample",
            Command::Regularity => "regularity",
        }
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "moments" => Ok(Command::Moments),
            "normalization" => Ok(Command::Normalization),
            "dwa-korovkin" => Ok(Command::DwaKorovkin),
            "psum-korovkin" => Ok(Command::PsumKorovkin),
            "counterexample" => Ok(Command::Counterexample),
            "regularity" => Ok(Command::Regularity),
            other => Err(format!(
                "unknown command `{other}` (expected moments, normalization, dwa-korovkin, \
                 psum-korovkin, counterexample or regularity)"
            )),
        }
    }
}

/// Weight rule α_n^{(k)}; the default drives every weight to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaRule {
    /// α = n/(n+1) for every k.
    NOverNPlus1,
    /// The same constant for every n and k; must lie in (0, 1).
    Const(f64),
}

impl AlphaRule {
    fn parse(s: &str) -> Result<Self, String> {
        if s == "n/(n+1)" {
            return Ok(AlphaRule::NOverNPlus1);
        }
        if let Some(v) = s.strip_prefix("const:") {
            let v: f64 = v.parse().map_err(|_| format!("`{v}` is not a number"))?;
            if !(v > 0.0 && v < 1.0) {
                return Err(format!("constant weight {v} outside (0, 1)"));
            }
            return Ok(AlphaRule::Const(v));
        }
        Err(format!("unknown weight rule `{s}` (expected `n/(n+1)` or `const:<v>`)"))
    }
}

impl fmt::Display for AlphaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaRule::NOverNPlus1 => write!(f, "n/(n+1)"),
            AlphaRule::Const(v) => write!(f, "const:{v}"),
        }
    }
}

/// Base rule q_n; the default approaches 1 so the operators gain resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QRule {
    /// q = 1 − 1/n, with q_1 = 1/2 so the first member stays inside (0, 1).
    OneMinusInvN,
    /// The same base for every n; must lie in (0, 1).
    Const(f64),
}

impl QRule {
    fn parse(s: &str) -> Result<Self, String> {
        if s == "1-1/n" {
            return Ok(QRule::OneMinusInvN);
        }
        if let Some(v) = s.strip_prefix("const:") {
            let v: f64 = v.parse().map_err(|_| format!("`{v}` is not a number"))?;
            if !(v > 0.0 && v < 1.0) {
                return Err(format!("constant base {v} outside (0, 1)"));
            }
            return Ok(QRule::Const(v));
        }
        Err(format!("unknown base rule `{s}` (expected `1-1/n` or `const:<v>`)"))
    }
}

impl fmt::Display for QRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QRule::OneMinusInvN => write!(f, "1-1/n"),
            QRule::Const(v) => write!(f, "const:{v}"),
        }
    }
}

/// Deferred-window preset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemePreset {
    /// Window (0, n], unit weights.
    Full,
    /// Window (⌊n/2⌋, n], unit weights.
    HalfDeferred,
}

impl SchemePreset {
    fn parse(s: &str) -> Result<Self, String> {
        match s {
            "full" => Ok(SchemePreset::Full),
            "half-deferred:n/2" => Ok(SchemePreset::HalfDeferred),
            other => Err(format!(
                "unknown scheme `{other}` (expected `full` or `half-deferred:n/2`)"
            )),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SchemePreset::Full => "full",
            SchemePreset::HalfDeferred => "half-deferred:n/2",
        }
    }
}

/// Summability-matrix preset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixPreset {
    Identity,
    Cesaro,
}

impl MatrixPreset {
    fn parse(s: &str) -> Result<Self, String> {
        match s {
            "identity" => Ok(MatrixPreset::Identity),
            "cesaro" => Ok(MatrixPreset::Cesaro),
            other => Err(format!("unknown matrix `{other}` (expected `identity` or `cesaro`)")),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MatrixPreset::Identity => "identity",
            MatrixPreset::Cesaro => "cesaro",
        }
    }
}

/// Power-series weight preset; the geometric ratio fixes the radius at
/// 1/ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PnPreset {
    Ones,
    Geometric(f64),
}

impl PnPreset {
    fn parse(s: &str) -> Result<Self, String> {
        if s == "ones" {
            return Ok(PnPreset::Ones);
        }
        if let Some(v) = s.strip_prefix("geometric:") {
            let v: f64 = v.parse().map_err(|_| format!("`{v}` is not a number"))?;
            if !(v > 0.0) {
                return Err(format!("geometric ratio {v} is not positive"));
            }
            return Ok(PnPreset::Geometric(v));
        }
        Err(format!("unknown weight preset `{s}` (expected `ones` or `geometric:<ratio>`)"))
    }
}

impl fmt::Display for PnPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PnPreset::Ones => write!(f, "ones"),
            PnPreset::Geometric(v) => write!(f, "geometric:{v}"),
        }
    }
}

/// Target function preset for the convergence commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GChoice {
    E0,
    E1,
    E2,
    Smooth,
}

impl GChoice {
    fn parse(s: &str) -> Result<Self, String> {
        match s {
            "e0" => Ok(GChoice::E0),
            "e1" => Ok(GChoice::E1),
            "e2" => Ok(GChoice::E2),
            "smooth" => Ok(GChoice::Smooth),
            other => Err(format!(
                "unknown target function `{other}` (expected e0, e1, e2 or smooth)"
            )),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GChoice::E0 => "e0",
            GChoice::E1 => "e1",
            GChoice::E2 => "e2",
            GChoice::Smooth => "smooth",
        }
    }
}

/// Evaluation points for the power-series transforms.
#[derive(Debug, Clone, PartialEq)]
pub enum UGridSpec {
    /// u_j = 1 − 2^{−j} for j = j_min..=j_max.
    Dyadic(u32, u32),
    /// Explicit comma-separated points, taken in the given order.
    List(Vec<f64>),
}

impl UGridSpec {
    fn parse(s: &str) -> Result<Self, String> {
        if let Some(rest) = s.strip_prefix("dyadic:") {
            let (lo, hi) = rest
                .split_once(':')
                .ok_or_else(|| format!("`{s}` is not of the form dyadic:<jmin>:<jmax>"))?;
            let lo: u32 = lo.parse().map_err(|_| format!("`{lo}` is not an integer"))?;
            let hi: u32 = hi.parse().map_err(|_| format!("`{hi}` is not an integer"))?;
            if lo > hi {
                return Err(format!("empty dyadic range {lo}:{hi}"));
            }
            if hi > 52 {
                return Err(format!("dyadic exponent {hi} exceeds 52, 1-2^-j rounds to 1"));
            }
            return Ok(UGridSpec::Dyadic(lo, hi));
        }
        if let Some(rest) = s.strip_prefix("list:") {
            let mut points = Vec::new();
            for piece in rest.split(',') {
                let v: f64 = piece
                    .trim()
                    .parse()
                    .map_err(|_| format!("`{piece}` is not a number"))?;
                if !v.is_finite() {
                    return Err(format!("point {v} is not finite"));
                }
                points.push(v);
            }
            if points.is_empty() {
                return Err("empty point list".to_string());
            }
            return Ok(UGridSpec::List(points));
        }
        Err(format!(
            "unknown grid spec `{s}` (expected `dyadic:<jmin>:<jmax>` or `list:<u1>,<u2>,...`)"
        ))
    }
}

impl fmt::Display for UGridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UGridSpec::Dyadic(lo, hi) => write!(f, "dyadic:{lo}:{hi}"),
            UGridSpec::List(points) => {
                write!(f, "list:")?;
                for (i, p) in points.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
        }
    }
}

/// Raw command line. Every value is optional and arrives as text; typing
/// and validation happen in one place so diagnostics are uniform across
/// config file and flags.
#[derive(Debug, Parser)]
#[command(name = "qlho", about = "Convergence experiments for q-weighted sampling operators")]
pub struct CliArgs {
    /// Experiment: moments | normalization | dwa-korovkin | psum-korovkin |
    /// counterexample | regularity.
    #[arg(long)]
    pub command: Option<String>,

    /// Flat key=value config file; flags given alongside override it.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// First operator index sampled.
    #[arg(long)]
    pub n_start: Option<String>,

    /// Last operator index sampled (inclusive).
    #[arg(long)]
    pub n_end: Option<String>,

    /// Stride through the index range (report rows only; verdicts always
    /// scan every index).
    #[arg(long)]
    pub n_step: Option<String>,

    /// Number of weight sequences r.
    #[arg(long)]
    pub r: Option<String>,

    /// Weight rule: n/(n+1) | const:<v>.
    #[arg(long)]
    pub alpha_rule: Option<String>,

    /// Base rule: 1-1/n | const:<v>.
    #[arg(long)]
    pub q_rule: Option<String>,

    /// Deferred window: full | half-deferred:n/2.
    #[arg(long)]
    pub scheme: Option<String>,

    /// Summability matrix: identity | cesaro.
    #[arg(long)]
    pub matrix: Option<String>,

    /// Power-series weights: ones | geometric:<ratio>.
    #[arg(long)]
    pub pn: Option<String>,

    /// Target function: e0 | e1 | e2 | smooth.
    #[arg(long)]
    pub g: Option<String>,

    /// Uniform evaluation points on [0, 1].
    #[arg(long)]
    pub grid_points: Option<String>,

    /// Certified truncation tolerance per operator evaluation.
    #[arg(long)]
    pub tail_tol: Option<String>,

    /// Density threshold for the membership sets.
    #[arg(long)]
    pub eps: Option<String>,

    /// Target threshold; must exceed eps.
    #[arg(long)]
    pub eps_prime: Option<String>,

    /// Truncation of the transform series over n.
    #[arg(long)]
    pub n_cap: Option<String>,

    /// Transform points: dyadic:<jmin>:<jmax> | list:<u1>,<u2>,...
    #[arg(long)]
    pub u_grid: Option<String>,

    /// Output stem; writes <out>.csv and <out>.report.txt.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Fully resolved experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub command: Command,
    pub n_start: u64,
    pub n_end: u64,
    pub n_step: u64,
    pub r: usize,
    pub alpha_rule: AlphaRule,
    pub q_rule: QRule,
    pub scheme: SchemePreset,
    pub matrix: MatrixPreset,
    pub pn: PnPreset,
    pub g: GChoice,
    pub grid_points: usize,
    pub tail_tol: f64,
    pub eps: f64,
    pub eps_prime: f64,
    pub n_cap: u64,
    pub u_grid: UGridSpec,
    pub out: PathBuf,
}

impl ExperimentConfig {
    /// Per-command defaults. The convergence commands mirror the ranges
    /// and grids used in the acceptance experiments; moments defaults to
    /// the single index n = 10.
    fn defaults(command: Command) -> Self {
        let mut cfg = ExperimentConfig {
            command,
            n_start: 1,
            n_end: 1,
            n_step: 1,
            r: 1,
            alpha_rule: AlphaRule::NOverNPlus1,
            q_rule: QRule::OneMinusInvN,
            scheme: SchemePreset::Full,
            matrix: MatrixPreset::Identity,
            pn: PnPreset::Ones,
            g: GChoice::E2,
            grid_points: 101,
            tail_tol: 1e-10,
            eps: 0.03,
            eps_prime: 0.09,
            n_cap: 400,
            u_grid: UGridSpec::Dyadic(4, 17),
            out: PathBuf::from(format!("qlho-{}", command.name())),
        };
        match command {
            Command::Moments => {
                cfg.n_start = 10;
                cfg.n_end = 10;
            }
            Command::Normalization => {
                cfg.n_end = 50;
            }
            Command::DwaKorovkin => {
                cfg.n_end = 200;
                cfg.grid_points = 1001;
            }
            Command::PsumKorovkin => {}
            Command::Counterexample => {
                cfg.g = GChoice::E1;
            }
            Command::Regularity => {
                cfg.n_start = 100;
                cfg.n_end = 1000;
                cfg.n_step = 100;
            }
        }
        cfg
    }

    /// Resolve the command line: read the config file if any, overlay the
    /// flags, then type-check the merged map.
    pub fn from_cli(args: &CliArgs) -> Result<Self, ConfigError> {
        let mut map: BTreeMap<String, String> = BTreeMap::new();
        if let Some(path) = &args.config {
            for (key, value) in read_config_file(path)? {
                map.insert(key, value);
            }
        }
        let overlay: [(&str, &Option<String>); 17] = [
            ("command", &args.command),
            ("n-start", &args.n_start),
            ("n-end", &args.n_end),
            ("n-step", &args.n_step),
            ("r", &args.r),
            ("alpha-rule", &args.alpha_rule),
            ("q-rule", &args.q_rule),
            ("scheme", &args.scheme),
            ("matrix", &args.matrix),
            ("pn", &args.pn),
            ("g", &args.g),
            ("grid-points", &args.grid_points),
            ("tail-tol", &args.tail_tol),
            ("eps", &args.eps),
            ("eps-prime", &args.eps_prime),
            ("n-cap", &args.n_cap),
            ("u-grid", &args.u_grid),
        ];
        for (key, value) in overlay {
            if let Some(v) = value {
                map.insert(key.to_string(), v.clone());
            }
        }
        if let Some(out) = &args.out {
            map.insert("out".to_string(), out.display().to_string());
        }
        Self::from_map(&map)
    }

    /// Type-check a merged key=value map against the per-command defaults.
    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self, ConfigError> {
        for key in map.keys() {
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(ConfigError::UnknownKey { key: key.clone() });
            }
        }
        let command_text = map
            .get("command")
            .ok_or_else(|| invalid("command", "no command given"))?;
        let command: Command =
            command_text.parse().map_err(|detail| invalid("command", detail))?;

        let mut cfg = Self::defaults(command);
        for (key, value) in map {
            match key.as_str() {
                "command" | "out" => {}
                "n-start" => cfg.n_start = parse_u64(key, value)?,
                "n-end" => cfg.n_end = parse_u64(key, value)?,
                "n-step" => cfg.n_step = parse_u64(key, value)?,
                "r" => cfg.r = parse_u64(key, value)? as usize,
                "alpha-rule" => {
                    cfg.alpha_rule =
                        AlphaRule::parse(value).map_err(|d| invalid(key, d))?
                }
                "q-rule" => cfg.q_rule = QRule::parse(value).map_err(|d| invalid(key, d))?,
                "scheme" => {
                    cfg.scheme = SchemePreset::parse(value).map_err(|d| invalid(key, d))?
                }
                "matrix" => {
                    cfg.matrix = MatrixPreset::parse(value).map_err(|d| invalid(key, d))?
                }
                "pn" => cfg.pn = PnPreset::parse(value).map_err(|d| invalid(key, d))?,
                "g" => cfg.g = GChoice::parse(value).map_err(|d| invalid(key, d))?,
                "grid-points" => cfg.grid_points = parse_u64(key, value)? as usize,
                "tail-tol" => cfg.tail_tol = parse_f64(key, value)?,
                "eps" => cfg.eps = parse_f64(key, value)?,
                "eps-prime" => cfg.eps_prime = parse_f64(key, value)?,
                "n-cap" => cfg.n_cap = parse_u64(key, value)?,
                "u-grid" => {
                    cfg.u_grid = UGridSpec::parse(value).map_err(|d| invalid(key, d))?
                }
                _ => unreachable!("key set checked above"),
            }
        }
        if let Some(out) = map.get("out") {
            cfg.out = PathBuf::from(out);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Cross-field checks that the per-key parsers cannot see.
    fn validate(&self) -> Result<(), ConfigError> {
        if self.n_start == 0 {
            return Err(invalid("n-start", "operator indices start at 1"));
        }
        if self.n_end < self.n_start {
            return Err(invalid(
                "n-end",
                format!("range {}..={} is empty", self.n_start, self.n_end),
            ));
        }
        if self.n_step == 0 {
            return Err(invalid("n-step", "stride must be at least 1"));
        }
        if self.r == 0 {
            return Err(invalid("r", "at least one weight sequence is required"));
        }
        if self.grid_points < 2 {
            return Err(invalid("grid-points", "need at least the two endpoints"));
        }
        if !(self.tail_tol > 0.0 && self.tail_tol < 1.0) {
            return Err(invalid("tail-tol", format!("{} outside (0, 1)", self.tail_tol)));
        }
        if !(self.eps > 0.0) {
            return Err(invalid("eps", format!("{} is not positive", self.eps)));
        }
        if !(self.eps_prime > self.eps) {
            return Err(invalid(
                "eps-prime",
                format!("{} does not exceed eps = {}", self.eps_prime, self.eps),
            ));
        }
        if self.n_cap == 0 {
            return Err(invalid("n-cap", "transform truncation must be at least 1"));
        }
        Ok(())
    }

    /// Sampled operator indices: n-start, stepping by n-step, with n-end
    /// always included so the range endpoint is reported.
    pub fn sampled_indices(&self) -> Vec<u64> {
        let mut out: Vec<u64> =
            (self.n_start..=self.n_end).step_by(self.n_step as usize).collect();
        if out.last() != Some(&self.n_end) {
            out.push(self.n_end);
        }
        out
    }
}

fn parse_u64(field: &str, value: &str) -> Result<u64, ConfigError> {
    value
        .parse()
        .map_err(|_| invalid(field, format!("`{value}` is not a non-negative integer")))
}

fn parse_f64(field: &str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = value
        .parse()
        .map_err(|_| invalid(field, format!("`{value}` is not a number")))?;
    if !v.is_finite() {
        return Err(invalid(field, format!("{v} is not finite")));
    }
    Ok(v)
}

/// Parse a flat key=value file. Blank lines and `#` comments are skipped;
/// a later duplicate key overwrites an earlier one.
fn read_config_file(path: &PathBuf) -> Result<Vec<(String, String)>, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.clone(), source })?;
    let mut pairs = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            invalid("config", format!("line `{line}` is not of the form key=value"))
        })?;
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn defaults_per_command() {
        let cfg = ExperimentConfig::from_map(&map(&[("command", "dwa-korovkin")])).unwrap();
        assert_eq!(cfg.n_start, 1);
        assert_eq!(cfg.n_end, 200);
        assert_eq!(cfg.grid_points, 1001);
        assert_eq!(cfg.g, GChoice::E2);

        let cfg = ExperimentConfig::from_map(&map(&[("command", "counterexample")])).unwrap();
        assert_eq!(cfg.g, GChoice::E1);
        assert_eq!(cfg.u_grid, UGridSpec::Dyadic(4, 17));

        let cfg = ExperimentConfig::from_map(&map(&[("command", "moments")])).unwrap();
        assert_eq!((cfg.n_start, cfg.n_end), (10, 10));
    }

    #[test]
    fn preset_spellings_round_trip() {
        assert_eq!(AlphaRule::parse("n/(n+1)").unwrap(), AlphaRule::NOverNPlus1);
        assert_eq!(AlphaRule::parse("const:0.8").unwrap(), AlphaRule::Const(0.8));
        assert_eq!(QRule::parse("1-1/n").unwrap(), QRule::OneMinusInvN);
        assert_eq!(SchemePreset::parse("half-deferred:n/2").unwrap(), SchemePreset::HalfDeferred);
        assert_eq!(PnPreset::parse("geometric:0.5").unwrap(), PnPreset::Geometric(0.5));
        assert_eq!(UGridSpec::parse("dyadic:4:17").unwrap(), UGridSpec::Dyadic(4, 17));
        assert_eq!(
            UGridSpec::parse("list:0.5, 0.75").unwrap(),
            UGridSpec::List(vec![0.5, 0.75])
        );
    }

    #[test]
    fn out_of_domain_values_name_their_field() {
        let err = ExperimentConfig::from_map(&map(&[
            ("command", "moments"),
            ("alpha-rule", "const:1.5"),
        ]))
        .unwrap_err();
        assert!(err.to_string().contains("alpha-rule"), "{err}");

        let err = ExperimentConfig::from_map(&map(&[
            ("command", "moments"),
            ("q-rule", "const:1"),
        ]))
        .unwrap_err();
        assert!(err.to_string().contains("q-rule"), "{err}");

        let err = ExperimentConfig::from_map(&map(&[
            ("command", "psum-korovkin"),
            ("u-grid", "dyadic:9:4"),
        ]))
        .unwrap_err();
        assert!(err.to_string().contains("u-grid"), "{err}");

        let err = ExperimentConfig::from_map(&map(&[
            ("command", "dwa-korovkin"),
            ("eps", "0.1"),
            ("eps-prime", "0.05"),
        ]))
        .unwrap_err();
        assert!(err.to_string().contains("eps-prime"), "{err}");

        let err = ExperimentConfig::from_map(&map(&[
            ("command", "regularity"),
            ("n-start", "7"),
            ("n-end", "3"),
        ]))
        .unwrap_err();
        assert!(err.to_string().contains("n-end"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err =
            ExperimentConfig::from_map(&map(&[("command", "moments"), ("wibble", "3")]))
                .unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey { ref key } if key == "wibble"), "{err}");
    }

    #[test]
    fn sampled_indices_always_include_the_endpoint() {
        let mut cfg = ExperimentConfig::from_map(&map(&[("command", "dwa-korovkin")])).unwrap();
        cfg.n_start = 1;
        cfg.n_end = 30;
        cfg.n_step = 7;
        assert_eq!(cfg.sampled_indices(), vec![1, 8, 15, 22, 29, 30]);
    }
}
