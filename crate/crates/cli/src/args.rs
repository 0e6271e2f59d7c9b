use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

/// A closed interval `min:max`; a single number means `min = max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    pub fn is_point(&self) -> bool {
        self.min == self.max
    }
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("{t:?} is not a number"))
        };
        let (min, max) = match s.split_once(':') {
            Some((a, b)) => (num(a)?, num(b)?),
            None => {
                let v = num(s)?;
                (v, v)
            }
        };
        if !(min.is_finite() && max.is_finite()) {
            return Err(format!("range {s:?} must be finite"));
        }
        if min > max {
            return Err(format!("range {s:?} has min > max"));
        }
        Ok(Range { min, max })
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.min, self.max)
    }
}

/// Comma-separated resolutions, each at least 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resolution(pub Vec<usize>);

impl FromStr for Resolution {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| format!("{t:?} is not a resolution"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if parts.contains(&0) {
            return Err(format!("resolutions in {s:?} must be at least 1"));
        }
        Ok(Resolution(parts))
    }
}

/// Four comma-separated numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State(pub [f64; 4]);

impl FromStr for State {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v = s
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| format!("{t:?} is not a number")))
            .collect::<Result<Vec<_>, _>>()?;
        let arr: [f64; 4] = v
            .try_into()
            .map_err(|_| format!("state {s:?} needs exactly four components"))?;
        Ok(State(arr))
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "bykov",
    version,
    about = "Resonance wedges, bifurcations and chaos near a perturbed Bykov attractor",
    args_override_self = true
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Output file (JSON defaults to stdout; grid CSVs require it).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for scans [default: available parallelism].
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for jittered initial conditions.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Print a gnuplot recipe for the output on stderr.
    #[arg(long = "gnuplot-hint", global = true)]
    pub gnuplot_hint: bool,
    /// File of `key=value` lines mirroring the flags; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct MapArgs {
    /// Saddle-value product delta, must exceed 1.
    #[arg(long, default_value_t = 3.0)]
    pub delta: f64,
    /// Constant K of the return map.
    #[arg(long = "K", default_value_t = 1.0)]
    pub k: f64,
    /// Rotation of the (1, l)-fixed points.
    #[arg(long, default_value_t = 1)]
    pub ell: u32,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct PointArgs {
    /// Offset A of the return map.
    #[arg(long = "A")]
    pub a: Option<f64>,
    /// Amplitude of the sin x perturbation.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Frequency at the saddle-foci.
    #[arg(long)]
    pub omega: Option<f64>,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct RangeArgs {
    /// `min:max` or a single value.
    #[arg(long = "A")]
    pub a: Option<Range>,
    /// `min:max` or a single value.
    #[arg(long)]
    pub lambda: Option<Range>,
    /// `min:max` or a single value.
    #[arg(long)]
    pub omega: Option<Range>,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct OdeArgs {
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = -0.1, allow_hyphen_values = true)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct SpectrumArgs {
    /// Integration time.
    #[arg(long = "t-final", default_value_t = 1000.0)]
    pub t_final: f64,
    /// Time between renormalisations.
    #[arg(long = "renorm-dt", default_value_t = 0.5)]
    pub renorm_dt: f64,
    /// Discarded time [default: 10% of t-final].
    #[arg(long)]
    pub transient: Option<f64>,
    /// Relative and absolute step tolerance.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Initial state `x1,x2,x3,x4`.
    #[arg(long, default_value = "0.1,0.1,0,-0.99", allow_hyphen_values = true)]
    pub x0: State,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Map constants delta, K, M and the Hopf frequencies.
    Constants {
        #[command(flatten)]
        map: MapArgs,
        /// Saddle values; when all five are given they replace --delta/--K.
        #[arg(long)]
        c1: Option<f64>,
        #[arg(long)]
        e1: Option<f64>,
        #[arg(long)]
        c2: Option<f64>,
        #[arg(long)]
        e2: Option<f64>,
        #[arg(long = "omega-spin")]
        omega_spin: Option<f64>,
    },
    /// The (1, l)-fixed points with their stability.
    FixedPoints {
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        point: PointArgs,
    },
    /// Both Bogdanov-Takens points for a given lambda.
    Bt {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Labelled samples of the SN1, SN2, HOPF, PD and NF surfaces (CSV).
    Surfaces {
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        ranges: RangeArgs,
        /// Nodes along A, lambda and omega.
        #[arg(long, default_value = "64,32,128")]
        grid: Resolution,
    },
    /// Membership of a parameter point in the (1, l) wedge.
    Wedge {
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        point: PointArgs,
    },
    /// Iterate the return map from one point.
    Iterate {
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        point: PointArgs,
        /// Start angle.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        x0: f64,
        /// Start height [default: the seed line].
        #[arg(long)]
        y0: Option<f64>,
        /// Iterates per orbit.
        #[arg(long, default_value_t = 4000)]
        n: usize,
        /// Iterates discarded before measuring.
        #[arg(long, default_value_t = 1000)]
        transient: usize,
    },
    /// Invariant manifolds of the saddle; an omega range sweeps for homoclinic crossings.
    Manifolds {
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        ranges: RangeArgs,
        /// Sweep points when omega is a range.
        #[arg(long, default_value = "41")]
        grid: Resolution,
        /// Fundamental domains grown per branch.
        #[arg(long, default_value_t = 40)]
        steps: usize,
        /// Largest gap between consecutive manifold points.
        #[arg(long = "step-cap", default_value_t = 1e-2)]
        step_cap: f64,
        /// Crossings closer than this to the saddle are ignored.
        #[arg(long, default_value_t = 1e-3)]
        exclude: f64,
    },
    /// Attractor classes over a two-parameter grid (CSV).
    ScanMap {
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        ranges: RangeArgs,
        /// Rows and columns.
        #[arg(long, default_value = "200,200")]
        grid: Resolution,
        /// Iterates per orbit.
        #[arg(long, default_value_t = 4000)]
        n: usize,
        /// Iterates discarded before measuring.
        #[arg(long, default_value_t = 1000)]
        transient: usize,
        /// Initial conditions per cell.
        #[arg(long, default_value_t = 8)]
        seeds: usize,
        /// Exponents within this distance of zero count as zero.
        #[arg(long, default_value_t = 5e-4)]
        threshold: f64,
    },
    /// Lyapunov spectrum of the vector field.
    OdeSpectrum {
        #[command(flatten)]
        ode: OdeArgs,
        #[arg(long, default_value_t = 0.0)]
        tau1: f64,
        #[arg(long, default_value_t = 0.0)]
        tau2: f64,
        #[command(flatten)]
        spectrum: SpectrumArgs,
    },
    /// Number of non-negative exponents over a (tau1, tau2) grid (CSV).
    OdeScan {
        #[command(flatten)]
        ode: OdeArgs,
        /// `min:max` within [0, 1].
        #[arg(long)]
        tau1: Option<Range>,
        /// `min:max` within [0, 1].
        #[arg(long)]
        tau2: Option<Range>,
        /// Rows (tau1) and columns (tau2).
        #[arg(long, default_value = "50,50")]
        grid: Resolution,
        #[command(flatten)]
        spectrum: SpectrumArgs,
    },
    /// Equilibria residuals, spectra and derived map constants.
    OdeCheck {
        #[command(flatten)]
        ode: OdeArgs,
        #[arg(long, default_value_t = 0.0)]
        tau1: f64,
        #[arg(long, default_value_t = 0.0)]
        tau2: f64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Constants { .. } => "constants",
            Command::FixedPoints { .. } => "fixed-points",
            Command::Bt { .. } => "bt",
            Command::Surfaces { .. } => "surfaces",
            Command::Wedge { .. } => "wedge",
            Command::Iterate { .. } => "iterate",
            Command::Manifolds { .. } => "manifolds",
            Command::ScanMap { .. } => "scan-map",
            Command::OdeSpectrum { .. } => "ode-spectrum",
            Command::OdeScan { .. } => "ode-scan",
            Command::OdeCheck { .. } => "ode-check",
        }
    }
}

pub const SUBCOMMANDS: [&str; 11] = [
    "constants",
    "fixed-points",
    "bt",
    "surfaces",
    "wedge",
    "iterate",
    "manifolds",
    "scan-map",
    "ode-spectrum",
    "ode-scan",
    "ode-check",
];

/// Reads `key=value` lines into `--key value` arguments.
pub fn config_args(text: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("config line {}: expected key=value, got {line:?}", no + 1));
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || key.starts_with('-') || key == "config" {
            return Err(format!("config line {}: invalid key {key:?}", no + 1));
        }
        if key == "gnuplot-hint" {
            match value {
                "true" => out.push("--gnuplot-hint".into()),
                "false" => {}
                _ => return Err(format!("config line {}: gnuplot-hint must be true or false", no + 1)),
            }
            continue;
        }
        out.push(format!("--{key}={value}"));
    }
    Ok(out)
}

/// Splices the config file named by `--config` into `argv` right after the
/// subcommand, so explicit flags later on the line override it.
pub fn expand_config(argv: Vec<String>) -> Result<Vec<String>, String> {
    let mut path = None;
    for (i, a) in argv.iter().enumerate() {
        if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else if a == "--config" {
            path = argv.get(i + 1).cloned();
        }
    }
    let Some(path) = path else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("cannot read config {path:?}: {e}"))?;
    let extra = config_args(&text)?;
    let at = argv
        .iter()
        .position(|a| SUBCOMMANDS.contains(&a.as_str()))
        .map(|i| i + 1)
        .ok_or("config file given without a subcommand")?;
    let mut out = argv[..at].to_vec();
    out.extend(extra);
    out.extend_from_slice(&argv[at..]);
    Ok(out)
}
