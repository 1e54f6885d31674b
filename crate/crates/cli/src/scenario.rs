//! Scenario files: TOML with one table per pipeline stage.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cli::{InterpArg, PropagationArg, Shape, WarpInterpArg};
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub environment: Environment,
    pub geometry: GeometrySection,
    #[serde(default)]
    pub pulse: Pulse,
    #[serde(default)]
    pub solver: Solver,
    #[serde(default)]
    pub synthesis: Synthesis,
    #[serde(default)]
    pub warp: Warp,
    #[serde(default)]
    pub output: Output,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Environment {
    /// Profile files, one per station, relative to the scenario file.
    pub ssp: Vec<PathBuf>,
    #[serde(default)]
    pub station_ranges: Vec<f64>,
    pub bathymetry: Option<PathBuf>,
    #[serde(default)]
    pub interpolation: InterpArg,
    #[serde(default = "default_density")]
    pub density: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub source_depth: f64,
    pub receiver_depth: f64,
    pub range: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Pulse {
    pub f_lo: f64,
    pub f_hi: f64,
    pub shape: Shape,
}

impl Default for Pulse {
    fn default() -> Self {
        Self {
            f_lo: 10.0,
            f_hi: 100.0,
            shape: Shape::RaisedCosine,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Solver {
    pub depth: Option<f64>,
    pub dz: f64,
    pub max_phase_speed: Option<f64>,
    /// Modes kept in the synthesis; empty keeps all.
    pub modes: Vec<usize>,
}

impl Default for Solver {
    fn default() -> Self {
        Self {
            depth: None,
            dz: 0.5,
            max_phase_speed: None,
            modes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Synthesis {
    pub sample_rate: f64,
    pub duration: f64,
    pub t0: Option<f64>,
    pub propagation: PropagationArg,
}

impl Default for Synthesis {
    fn default() -> Self {
        Self {
            sample_rate: 400.0,
            duration: 8.0,
            t0: None,
            propagation: PropagationArg::RangeIndependent,
        }
    }
}

/// Where the warping origin t_r comes from.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum TrSource {
    Fixed(f64),
    Named(TrMode),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrMode {
    /// range / c0
    Nominal,
    /// ±1% scan around range / c0
    Refine,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Band {
    pub mode: usize,
    pub center: f64,
    pub halfwidth: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Warp {
    pub t_r: TrSource,
    /// Surface speed for t_r; defaults to c(0) of the receiver-side profile.
    pub c0: Option<f64>,
    pub oversample: f64,
    pub interpolation: WarpInterpArg,
    /// Crop relative to t_r (s).
    pub window_start: f64,
    pub window_end: f64,
    pub modes: Vec<usize>,
    /// Depth limit of the linear fit that places the default bands.
    pub duct_depth: f64,
    /// Explicit bands; replace the ones derived from `modes`.
    pub bands: Vec<Band>,
    pub stft_window: usize,
    pub stft_hop: usize,
    pub ridge_threshold: f64,
    pub absence_fraction: f64,
}

impl Default for Warp {
    fn default() -> Self {
        Self {
            t_r: TrSource::Named(TrMode::Nominal),
            c0: None,
            oversample: 4.0,
            interpolation: WarpInterpArg::Cubic,
            window_start: -1.5,
            window_end: -0.05,
            modes: vec![1, 2, 3],
            duct_depth: 400.0,
            bands: Vec::new(),
            stft_window: 128,
            stft_hop: 8,
            ridge_threshold: 0.1,
            absence_fraction: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Artifact {
    Waveform,
    Spectrogram,
    Warped,
    Modes,
    Dispersion,
    Skeleton,
}

impl Artifact {
    pub const ALL: [Artifact; 6] = [
        Artifact::Waveform,
        Artifact::Spectrogram,
        Artifact::Warped,
        Artifact::Modes,
        Artifact::Dispersion,
        Artifact::Skeleton,
    ];
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Output {
    /// Relative to the working directory.
    pub directory: Option<PathBuf>,
    pub artifacts: Vec<Artifact>,
}

impl Default for Output {
    fn default() -> Self {
        Self {
            directory: None,
            artifacts: Artifact::ALL.to_vec(),
        }
    }
}

fn default_density() -> f64 {
    1000.0
}

impl Scenario {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut s: Scenario = toml::from_str(text).map_err(|e| CliError::Scenario {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = origin.parent().unwrap_or(Path::new(""));
        s.environment.ssp = s.environment.ssp.iter().map(|p| base.join(p)).collect();
        s.environment.bathymetry = s.environment.bathymetry.as_ref().map(|p| base.join(p));
        s.validate(origin)?;
        Ok(s)
    }

    fn validate(&self, origin: &Path) -> Result<()> {
        let fail = |message: String| {
            Err(CliError::Scenario {
                path: origin.to_path_buf(),
                message,
            })
        };
        let env = &self.environment;
        if env.ssp.is_empty() {
            return fail("environment.ssp lists no profile".into());
        }
        if env.ssp.len() > 1 && env.station_ranges.len() != env.ssp.len() {
            return fail(format!(
                "environment.station_ranges has {} entries for {} profiles",
                env.station_ranges.len(),
                env.ssp.len()
            ));
        }
        for p in env.ssp.iter().chain(&env.bathymetry) {
            if !p.is_file() {
                return fail(format!("referenced file {} does not exist", p.display()));
            }
        }
        if self.warp.window_end >= 0.0 || self.warp.window_start >= self.warp.window_end {
            return fail("warp window must satisfy window_start < window_end < 0".into());
        }
        if self.warp.modes.is_empty() && self.warp.bands.is_empty() {
            return fail("warp needs modes or bands".into());
        }
        if let TrSource::Fixed(t) = self.warp.t_r {
            if !(t > 0.0) {
                return fail(format!("warp.t_r = {t} must be positive"));
            }
        }
        Ok(())
    }

    pub fn wants(&self, a: Artifact) -> bool {
        self.output.artifacts.contains(&a)
    }
}
