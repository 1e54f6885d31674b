use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "ductwarp", version, about = "Surface-duct normal modes, pulse synthesis and warping-based mode separation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit c(z) = c0 (1 + a z) to the top of a sound-speed profile.
    FitDuct(FitDuctArgs),
    /// Solve the normal modes of a profile at one frequency.
    Modes(ModesArgs),
    /// Compare closed-form WKB wavenumbers with the numerical solver.
    WkbTable(WkbTableArgs),
    /// Transmission-loss map at one frequency.
    Tl(TlArgs),
    /// Synthesize the received pressure of a broadband pulse.
    Synth(SynthArgs),
    /// Warp a recording onto the u = (t_r - t)^(-1/2) axis.
    Warp(WarpArgs),
    /// Separate modes by band-pass filtering in the warped domain.
    Separate(SeparateArgs),
    /// Spectrogram and ridge of a recording.
    Dispersion(DispersionArgs),
    /// Run a scenario file end to end.
    #[command(subcommand)]
    Scenario(ScenarioCommand),
}

#[derive(Debug, Subcommand)]
pub enum ScenarioCommand {
    /// Synthesize, warp, separate and extract dispersion as configured.
    Run(ScenarioRunArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct OutArgs {
    /// Output directory (created if missing).
    #[arg(long, default_value = "ductwarp-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SolverArgs {
    /// Depth of the solver grid in meters; defaults to the deepest profile sample.
    #[arg(long)]
    pub depth: Option<f64>,
    /// Grid spacing in meters.
    #[arg(long, default_value_t = 0.5)]
    pub dz: f64,
    /// Keep only modes with phase speed below this value (m/s).
    #[arg(long)]
    pub max_phase_speed: Option<f64>,
    /// Water density in kg/m^3.
    #[arg(long, default_value_t = 1000.0)]
    pub density: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct FitDuctArgs {
    /// Sound-speed profile CSV (depth_m,speed_mps).
    #[arg(long)]
    pub ssp: PathBuf,
    /// Only samples at or above this depth enter the fit.
    #[arg(long, default_value_t = 400.0)]
    pub depth_limit: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ModesArgs {
    #[arg(long)]
    pub ssp: PathBuf,
    /// Frequency in Hz.
    #[arg(long)]
    pub freq: f64,
    /// Maximum number of modes to keep.
    #[arg(long)]
    pub modes: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct WkbTableArgs {
    /// Surface sound speed in m/s.
    #[arg(long, default_value_t = 1434.0)]
    pub c0: f64,
    /// Fractional gradient in 1/m.
    #[arg(long, default_value_t = 4.359e-5)]
    pub a: f64,
    /// Depth over which the linear law holds (m).
    #[arg(long, default_value_t = 400.0)]
    pub duct_depth: f64,
    #[arg(long, default_value_t = 10)]
    pub modes: usize,
    #[arg(long, default_value_t = 100.0)]
    pub freq: f64,
    /// Depth of the linear profile handed to the solver (m).
    #[arg(long, default_value_t = 2000.0)]
    pub depth: f64,
    #[arg(long, default_value_t = 0.5)]
    pub dz: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct TlArgs {
    #[arg(long)]
    pub ssp: PathBuf,
    #[arg(long)]
    pub freq: f64,
    /// Source depth (m).
    #[arg(long)]
    pub zs: f64,
    #[arg(long, default_value_t = 1000.0)]
    pub r_min: f64,
    #[arg(long, default_value_t = 100_000.0)]
    pub r_max: f64,
    #[arg(long, default_value_t = 300)]
    pub nr: usize,
    #[arg(long, default_value_t = 5.0)]
    pub z_min: f64,
    #[arg(long, default_value_t = 995.0)]
    pub z_max: f64,
    #[arg(long, default_value_t = 100)]
    pub nz: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, serde::Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    Flat,
    #[default]
    RaisedCosine,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, serde::Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PropagationArg {
    #[default]
    RangeIndependent,
    Adiabatic,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, serde::Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InterpArg {
    #[default]
    PiecewiseConstant,
    LinearBlend,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, serde::Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "kebab-case")]
pub enum WarpInterpArg {
    Linear,
    #[default]
    Cubic,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    /// Profile CSV; repeat once per station for range-dependent runs.
    #[arg(long, required = true)]
    pub ssp: Vec<PathBuf>,
    /// Station ranges in meters, one per --ssp (comma separated); the first must be 0.
    #[arg(long, value_delimiter = ',')]
    pub station_ranges: Vec<f64>,
    /// Bathymetry CSV (range_m,depth_m).
    #[arg(long)]
    pub bathymetry: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = InterpArg::PiecewiseConstant)]
    pub interpolation: InterpArg,
    #[arg(long, value_enum, default_value_t = PropagationArg::RangeIndependent)]
    pub propagation: PropagationArg,
    #[arg(long)]
    pub zs: f64,
    #[arg(long)]
    pub zr: f64,
    /// Source-receiver range (m).
    #[arg(long)]
    pub range: f64,
    #[arg(long, default_value_t = 10.0)]
    pub f_lo: f64,
    #[arg(long, default_value_t = 100.0)]
    pub f_hi: f64,
    #[arg(long, value_enum, default_value_t = Shape::RaisedCosine)]
    pub shape: Shape,
    /// Sample rate (Hz).
    #[arg(long, default_value_t = 400.0)]
    pub fs: f64,
    /// Window length (s).
    #[arg(long, default_value_t = 8.0)]
    pub duration: f64,
    /// Window start (s); defaults to a window centred on t_r.
    #[arg(long)]
    pub t0: Option<f64>,
    /// Synthesize only these modes (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub modes: Vec<usize>,
    /// Also write a 32-bit float WAV copy.
    #[arg(long)]
    pub wav: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct InputArgs {
    /// Raw f32 waveform (with .json sidecar) or WAV file.
    #[arg(long)]
    pub input: PathBuf,
    /// Time of the first sample (s); WAV files carry none and default to 0.
    #[arg(long, allow_hyphen_values = true)]
    pub input_t0: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct TrArgs {
    /// Arrival time t_r (s); otherwise derived from --range and --c0.
    #[arg(long)]
    pub t_r: Option<f64>,
    #[arg(long)]
    pub range: Option<f64>,
    #[arg(long, default_value_t = 1434.0)]
    pub c0: f64,
    /// Refine t_r by scanning ±1% for the sharpest warped spectrum.
    #[arg(long)]
    pub refine: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct WarpArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub tr: TrArgs,
    #[arg(long, default_value_t = 4.0)]
    pub oversample: f64,
    #[arg(long, value_enum, default_value_t = WarpInterpArg::Cubic)]
    pub interp: WarpInterpArg,
    /// Crop start relative to t_r (s).
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    pub start: f64,
    /// Crop end relative to t_r (s); must be negative.
    #[arg(long, default_value_t = -0.03, allow_hyphen_values = true)]
    pub end: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct SeparateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub tr: TrArgs,
    /// Modes to separate (comma separated); bands follow the duct law.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    pub modes: Vec<usize>,
    /// Duct gradient used to place the default bands (1/m).
    #[arg(long, default_value_t = 4.359e-5)]
    pub a: f64,
    /// Explicit band `mode:center:halfwidth` in warped Hz; repeatable, replaces --modes.
    #[arg(long = "band")]
    pub bands: Vec<String>,
    #[arg(long, default_value_t = 4.0)]
    pub oversample: f64,
    #[arg(long, default_value_t = -1.5, allow_hyphen_values = true)]
    pub start: f64,
    #[arg(long, default_value_t = -0.05, allow_hyphen_values = true)]
    pub end: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub stft: StftArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct StftArgs {
    /// STFT window length in samples.
    #[arg(long, default_value_t = 128)]
    pub window: usize,
    /// STFT hop in samples.
    #[arg(long, default_value_t = 8)]
    pub hop: usize,
    /// Ridge threshold relative to the spectrogram maximum.
    #[arg(long, default_value_t = 0.1)]
    pub threshold: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct DispersionArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub stft: StftArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ScenarioRunArgs {
    /// Scenario file.
    pub file: PathBuf,
    /// Overrides the output directory named in the scenario.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
