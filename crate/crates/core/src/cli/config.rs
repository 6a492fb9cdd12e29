//! Layered configuration: flags over config file over `KNOTQM_*`
//! environment variables over built-in defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::CliError;
use crate::geometry::{KnotWinding, TorusGeometry};
use crate::spectral::Parity;

/// Aspect ratio used by `--eta0-large`.
pub const LARGE_ASPECT: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Geometry,
    Classical,
    Spectrum,
    Modes,
    Sweep,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Geometry => "geometry",
            Command::Classical => "classical",
            Command::Spectrum => "spectrum",
            Command::Modes => "modes",
            Command::Sweep => "sweep",
        }
    }

    fn parse(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "geometry" => Command::Geometry,
            "classical" => Command::Classical,
            "spectrum" => Command::Spectrum,
            "modes" => Command::Modes,
            "sweep" => Command::Sweep,
            other => return Err(CliError::Usage(format!("unknown command '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// Solution method; which ones are valid depends on the command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodChoice {
    Closed,
    Rk4,
    Both,
    Hill,
    Mathieu,
}

impl fmt::Display for MethodChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MethodChoice::Closed => "closed",
            MethodChoice::Rk4 => "rk4",
            MethodChoice::Both => "both",
            MethodChoice::Hill => "hill",
            MethodChoice::Mathieu => "mathieu",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub major_radius: f64,
    pub minor_radius: f64,
    pub p: i64,
    pub q: i64,
    pub mass: f64,
    pub hbar: f64,
    pub truncation: usize,
    pub levels: usize,
    pub samples: usize,
    pub t_max: f64,
    pub speed: f64,
    pub tol: f64,
    pub method: MethodChoice,
    pub n: i64,
    pub parity: Parity,
    pub phi_s: f64,
    pub phi_t: f64,
    pub flux_min: f64,
    pub flux_max: f64,
    pub flux_steps: usize,
    pub format: OutputFormat,
    pub eta0_large: bool,
    pub out: Option<PathBuf>,
}

/// Keys accepted in config files and `KNOTQM_<KEY>` variables, and echoed
/// into output metadata.
pub const KEYS: &[&str] = &[
    "R",
    "d",
    "p",
    "q",
    "mass",
    "hbar",
    "truncation",
    "levels",
    "samples",
    "t_max",
    "speed",
    "tol",
    "method",
    "n",
    "sigma",
    "phi_s",
    "phi_t",
    "flux_min",
    "flux_max",
    "flux_steps",
    "format",
    "eta0_large",
];

fn default_value(key: &str) -> &'static str {
    match key {
        "R" => "2",
        "d" => "1",
        "p" => "2",
        "q" => "3",
        "mass" | "hbar" => "1",
        "truncation" => "64",
        "levels" => "4",
        "samples" => "512",
        "t_max" | "method" => "auto",
        "speed" => "1",
        "tol" => "1e-10",
        "n" => "1",
        "sigma" => "cos",
        "phi_s" | "phi_t" | "flux_min" => "0",
        "flux_max" => "6.283185307179586",
        "flux_steps" => "64",
        "format" => "csv",
        "eta0_large" => "false",
        _ => "",
    }
}

#[derive(Debug, Parser)]
#[command(name = "knotqm", version, about = "Particle on a torus knot: geometry, trajectories, spectra")]
struct Cli {
    #[command(subcommand)]
    command: CommandArg,
}

#[derive(Debug, Subcommand)]
enum CommandArg {
    /// Sample the knot curve: phi, x, y, z
    Geometry(Options),
    /// Classical trajectory with conserved-quantity drift
    Classical(Options),
    /// Energy levels by the Hill, thin-torus and Hill-Whittaker methods
    Spectrum(Options),
    /// Sampled eigenfunction of level n
    Modes(Options),
    /// Energy levels over a grid of enclosed flux
    Sweep(Options),
}

#[derive(Debug, Args)]
struct Options {
    /// Major radius of the torus
    #[arg(long = "R", allow_negative_numbers = true)]
    major: Option<String>,
    /// Minor radius of the torus
    #[arg(long = "d", allow_negative_numbers = true)]
    minor: Option<String>,
    /// Turns around the symmetry axis
    #[arg(long, allow_negative_numbers = true)]
    p: Option<String>,
    /// Turns around the tube
    #[arg(long, allow_negative_numbers = true)]
    q: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    mass: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    hbar: Option<String>,
    /// Fourier truncation K (harmonics −K..K)
    #[arg(long, allow_negative_numbers = true)]
    truncation: Option<String>,
    /// Number of levels (spectrum) or half-width of the level window (sweep)
    #[arg(long, allow_negative_numbers = true)]
    levels: Option<String>,
    /// Output points (geometry, classical, modes)
    #[arg(long, allow_negative_numbers = true)]
    samples: Option<String>,
    /// Trajectory horizon; defaults to three knot circuits
    #[arg(long = "t-max", allow_negative_numbers = true)]
    t_max: Option<String>,
    /// Speed constant √f·φ̇ of the classical motion
    #[arg(long, allow_negative_numbers = true)]
    speed: Option<String>,
    /// Adaptive integrator tolerance
    #[arg(long, allow_negative_numbers = true)]
    tol: Option<String>,
    /// closed|rk4|both (classical), hill|mathieu (modes)
    #[arg(long)]
    method: Option<String>,
    /// Level index (modes)
    #[arg(long, allow_negative_numbers = true)]
    n: Option<String>,
    /// Branch of the analytic formulas: cos (σ = π/2) or sin (σ = 0)
    #[arg(long)]
    sigma: Option<String>,
    /// Solenoidal flux phase
    #[arg(long = "phi-s", allow_negative_numbers = true)]
    phi_s: Option<String>,
    /// Toroidal flux phase
    #[arg(long = "phi-t", allow_negative_numbers = true)]
    phi_t: Option<String>,
    #[arg(long = "flux-min", allow_negative_numbers = true)]
    flux_min: Option<String>,
    #[arg(long = "flux-max", allow_negative_numbers = true)]
    flux_max: Option<String>,
    #[arg(long = "flux-steps", allow_negative_numbers = true)]
    flux_steps: Option<String>,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
    /// Output file; relative paths resolve against KNOTQM_OUT_DIR
    #[arg(long)]
    out: Option<PathBuf>,
    /// Config file of key=value lines
    #[arg(long)]
    config: Option<PathBuf>,
    /// Replace the aspect ratio by 10⁴, keeping the focal scale a
    #[arg(long = "eta0-large")]
    eta0_large: bool,
}

impl Options {
    fn flag_layer(&self) -> BTreeMap<String, String> {
        let pairs = [
            ("R", &self.major),
            ("d", &self.minor),
            ("p", &self.p),
            ("q", &self.q),
            ("mass", &self.mass),
            ("hbar", &self.hbar),
            ("truncation", &self.truncation),
            ("levels", &self.levels),
            ("samples", &self.samples),
            ("t_max", &self.t_max),
            ("speed", &self.speed),
            ("tol", &self.tol),
            ("method", &self.method),
            ("n", &self.n),
            ("sigma", &self.sigma),
            ("phi_s", &self.phi_s),
            ("phi_t", &self.phi_t),
            ("flux_min", &self.flux_min),
            ("flux_max", &self.flux_max),
            ("flux_steps", &self.flux_steps),
            ("format", &self.format),
        ];
        let mut out: BTreeMap<String, String> = pairs
            .into_iter()
            .filter_map(|(k, v)| v.clone().map(|v| (k.to_string(), v)))
            .collect();
        if self.eta0_large {
            out.insert("eta0_large".into(), "true".into());
        }
        if let Some(path) = &self.out {
            out.insert("out".into(), path.display().to_string());
        }
        out
    }
}

/// Parse `key=value` lines; `#` starts a comment line.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", lineno + 1)))?;
        let key = key.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) && key != "out" {
            return Err(CliError::Usage(format!("config line {}: unknown key '{key}'", lineno + 1)));
        }
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}

/// Resolve a configuration from command-line arguments (including the
/// program name) and the process environment.
pub fn parse_config(args: &[String], env: &BTreeMap<String, String>) -> Result<RunConfig, CliError> {
    let cli = Cli::try_parse_from(args).map_err(CliError::Clap)?;
    let (command, opts) = match &cli.command {
        CommandArg::Geometry(o) => (Command::Geometry, o),
        CommandArg::Classical(o) => (Command::Classical, o),
        CommandArg::Spectrum(o) => (Command::Spectrum, o),
        CommandArg::Modes(o) => (Command::Modes, o),
        CommandArg::Sweep(o) => (Command::Sweep, o),
    };

    let mut layers: BTreeMap<String, String> = BTreeMap::new();
    for key in KEYS.iter().chain(["out"].iter()) {
        let var = format!("KNOTQM_{}", key.to_uppercase());
        if let Some(v) = env.get(&var) {
            layers.insert(key.to_string(), v.clone());
        }
    }
    let config_path = opts
        .config
        .clone()
        .or_else(|| env.get("KNOTQM_CONFIG").map(PathBuf::from));
    if let Some(path) = config_path {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Usage(format!("cannot read config file {}: {e}", path.display())))?;
        layers.extend(parse_config_text(&text)?);
    }
    layers.extend(opts.flag_layer());

    let mut cfg = resolve(command, &layers)?;
    if cfg.eta0_large {
        apply_large_aspect(&mut cfg)?;
    }
    Ok(cfg)
}

/// Rebuild a configuration from output metadata.
pub fn from_meta(meta: &BTreeMap<String, String>) -> Result<RunConfig, CliError> {
    let command = Command::parse(meta.get("command").map(String::as_str).unwrap_or(""))?;
    let mut layers: BTreeMap<String, String> = meta
        .iter()
        .filter(|(k, _)| KEYS.contains(&k.as_str()))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    // Radii in metadata are already the transformed ones.
    layers.insert("eta0_large".into(), "false".into());
    let mut cfg = resolve(command, &layers)?;
    cfg.eta0_large = meta.get("eta0_large").is_some_and(|v| v == "true");
    Ok(cfg)
}

fn apply_large_aspect(cfg: &mut RunConfig) -> Result<(), CliError> {
    let geom = TorusGeometry::new(cfg.major_radius, cfg.minor_radius).map_err(CliError::from_geometry)?;
    let large = TorusGeometry::from_scale_and_aspect(geom.scale(), LARGE_ASPECT).map_err(CliError::from_geometry)?;
    cfg.major_radius = large.major_radius();
    cfg.minor_radius = large.minor_radius();
    Ok(())
}

fn lookup<'a>(layers: &'a BTreeMap<String, String>, key: &str) -> &'a str {
    layers.get(key).map(String::as_str).unwrap_or_else(|| default_value(key))
}

fn number<T: std::str::FromStr>(layers: &BTreeMap<String, String>, key: &str) -> Result<T, CliError> {
    let raw = lookup(layers, key);
    raw.parse()
        .map_err(|_| CliError::Usage(format!("invalid value '{raw}' for {key}")))
}

fn positive(layers: &BTreeMap<String, String>, key: &str) -> Result<f64, CliError> {
    let v: f64 = number(layers, key)?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("{key} must be positive and finite, got {v}")))
    }
}

fn finite(layers: &BTreeMap<String, String>, key: &str) -> Result<f64, CliError> {
    let v: f64 = number(layers, key)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("{key} must be finite")))
    }
}

fn resolve(command: Command, layers: &BTreeMap<String, String>) -> Result<RunConfig, CliError> {
    let major_radius: f64 = number(layers, "R")?;
    let minor_radius: f64 = number(layers, "d")?;
    let p: i64 = number(layers, "p")?;
    let q: i64 = number(layers, "q")?;
    let geometry = TorusGeometry::new(major_radius, minor_radius).map_err(CliError::from_geometry)?;
    let winding = KnotWinding::new(p, q).map_err(CliError::from_geometry)?;

    let mass = positive(layers, "mass")?;
    let hbar = positive(layers, "hbar")?;
    let truncation: usize = number(layers, "truncation")?;
    if !(16..=crate::spectral::hill::MAX_TRUNCATION).contains(&truncation) {
        return Err(CliError::Usage(format!(
            "truncation must lie in 16..={}, got {truncation}",
            crate::spectral::hill::MAX_TRUNCATION
        )));
    }
    let levels: usize = number(layers, "levels")?;
    if levels == 0 || levels > truncation {
        return Err(CliError::Usage(format!("levels must lie in 1..={truncation}, got {levels}")));
    }
    let samples: usize = number(layers, "samples")?;
    if samples == 0 {
        return Err(CliError::Usage("samples must be positive".into()));
    }
    if command == Command::Modes && samples < crate::spectral::modes::MIN_GRID {
        return Err(CliError::Usage(format!(
            "modes needs at least {} samples, got {samples}",
            crate::spectral::modes::MIN_GRID
        )));
    }
    let speed = positive(layers, "speed")?;
    let tol = positive(layers, "tol")?;
    let t_max = match lookup(layers, "t_max") {
        "auto" => {
            // Three knot circuits, each |q| periods of the speed profile.
            let period = 2.0 * std::f64::consts::PI * geometry.scale()
                / (speed * geometry.beta() * winding.alpha().abs());
            3.0 * q.unsigned_abs() as f64 * period
        }
        _ => positive(layers, "t_max")?,
    };
    let method = match (command, lookup(layers, "method")) {
        (Command::Classical, "auto") => MethodChoice::Both,
        (Command::Classical, "closed") => MethodChoice::Closed,
        (Command::Classical, "rk4") => MethodChoice::Rk4,
        (Command::Classical, "both") => MethodChoice::Both,
        (Command::Modes, "mathieu") => MethodChoice::Mathieu,
        (_, "auto") => MethodChoice::Hill,
        (c, "hill") if c != Command::Classical => MethodChoice::Hill,
        (_, other) => {
            return Err(CliError::Usage(format!(
                "method '{other}' is not available for {}",
                command.name()
            )))
        }
    };
    let n: i64 = number(layers, "n")?;
    let parity = match lookup(layers, "sigma") {
        "cos" | "pi/2" => Parity::Cosine,
        "sin" | "0" => Parity::Sine,
        other => return Err(CliError::Usage(format!("invalid value '{other}' for sigma (cos|sin)"))),
    };
    let phi_s = finite(layers, "phi_s")?;
    let phi_t = finite(layers, "phi_t")?;
    let flux_min = finite(layers, "flux_min")?;
    let flux_max = finite(layers, "flux_max")?;
    let flux_steps: usize = number(layers, "flux_steps")?;
    if flux_steps == 0 {
        return Err(CliError::Usage("flux_steps must be positive".into()));
    }
    let format = match lookup(layers, "format") {
        "csv" => OutputFormat::Csv,
        "json" => OutputFormat::Json,
        other => return Err(CliError::Usage(format!("invalid value '{other}' for format (csv|json)"))),
    };
    let eta0_large = match lookup(layers, "eta0_large") {
        "true" | "1" => true,
        "false" | "0" => false,
        other => return Err(CliError::Usage(format!("invalid value '{other}' for eta0_large"))),
    };
    Ok(RunConfig {
        command,
        major_radius,
        minor_radius,
        p,
        q,
        mass,
        hbar,
        truncation,
        levels,
        samples,
        t_max,
        speed,
        tol,
        method,
        n,
        parity,
        phi_s,
        phi_t,
        flux_min,
        flux_max,
        flux_steps,
        format,
        eta0_large,
        out: layers.get("out").map(PathBuf::from),
    })
}

impl RunConfig {
    pub fn geometry(&self) -> TorusGeometry {
        TorusGeometry::new(self.major_radius, self.minor_radius).expect("validated on resolve")
    }

    pub fn winding(&self) -> KnotWinding {
        KnotWinding::new(self.p, self.q).expect("validated on resolve")
    }

    /// Every resolved setting as `key → value`, in a form [`from_meta`]
    /// reads back exactly.
    pub fn to_meta(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("command", self.command.name().into());
        put("R", self.major_radius.to_string());
        put("d", self.minor_radius.to_string());
        put("p", self.p.to_string());
        put("q", self.q.to_string());
        put("mass", self.mass.to_string());
        put("hbar", self.hbar.to_string());
        put("truncation", self.truncation.to_string());
        put("levels", self.levels.to_string());
        put("samples", self.samples.to_string());
        put("t_max", self.t_max.to_string());
        put("speed", self.speed.to_string());
        put("tol", self.tol.to_string());
        put("method", self.method.to_string());
        put("n", self.n.to_string());
        put("sigma", self.parity.tag().into());
        put("phi_s", self.phi_s.to_string());
        put("phi_t", self.phi_t.to_string());
        put("flux_min", self.flux_min.to_string());
        put("flux_max", self.flux_max.to_string());
        put("flux_steps", self.flux_steps.to_string());
        put("format", self.format.extension().into());
        put("eta0_large", self.eta0_large.to_string());
        m
    }
}
