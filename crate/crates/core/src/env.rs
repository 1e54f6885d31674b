//! Environment inputs: sound-speed profiles, bathymetry tracks, the linear
//! surface-duct idealization and range-dependent station sets.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::num::{interp_clamped, Real};

/// Lowest sound speed accepted by the profile parser, m/s.
pub const MIN_SOUND_SPEED: f64 = 1300.0;
/// Highest sound speed accepted by the profile parser, m/s.
pub const MAX_SOUND_SPEED: f64 = 1700.0;
/// Water density used when none is given, kg/m³.
pub const DEFAULT_DENSITY: f64 = 1000.0;

/// Sampled sound speed c(z).
///
/// Depths are strictly increasing from a non-negative first depth and every
/// speed lies within [`MIN_SOUND_SPEED`, `MAX_SOUND_SPEED`]. Between samples
/// the profile is piecewise linear; below the deepest sample it continues
/// with the gradient of the last segment, and above the first sample it is
/// held constant.
#[derive(Debug, Clone, PartialEq)]
pub struct SoundSpeedProfile<T = f64> {
    name: String,
    depths: Vec<T>,
    speeds: Vec<T>,
}

impl<T: Real> SoundSpeedProfile<T> {
    pub fn new(name: impl Into<String>, samples: Vec<(T, T)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::invalid(format!(
                "a profile needs at least 2 samples, got {}",
                samples.len()
            )));
        }
        for (i, &(z, c)) in samples.iter().enumerate() {
            check_sample(z, c, i).map_err(|m| Error::invalid(m))?;
        }
        let (depths, speeds) = samples.into_iter().unzip();
        Ok(Self {
            name: name.into(),
            depths,
            speeds,
        })
    }

    /// Samples `speed(z)` at the given depths.
    pub fn from_fn(name: impl Into<String>, depths: &[T], speed: impl Fn(T) -> T) -> Result<Self> {
        Self::new(name, depths.iter().map(|&z| (z, speed(z))).collect())
    }

    /// Parses the two-column `depth_m,speed_mps` text format.
    pub fn parse_csv(name: impl Into<String>, text: &str) -> Result<Self> {
        let rows = parse_two_columns(text, "depth_m,speed_mps")?;
        if rows.len() < 2 {
            return Err(Error::Parse {
                line: rows.last().map_or(1, |r| r.0),
                message: format!("a profile needs at least 2 samples, got {}", rows.len()),
            });
        }
        let mut samples = Vec::with_capacity(rows.len());
        for (i, &(line, z, c)) in rows.iter().enumerate() {
            let (z, c) = (T::lit(z), T::lit(c));
            if let Err(message) = check_sample(z, c, i) {
                return Err(Error::Parse { line, message });
            }
            if i > 0 && z <= samples.last().map(|s: &(T, T)| s.0).unwrap() {
                return Err(Error::Parse {
                    line,
                    message: format!("non-monotone depth {z}: depths must be strictly increasing"),
                });
            }
            samples.push((z, c));
        }
        Self::new(name, samples)
    }

    /// Serializes to the CSV format read by [`Self::parse_csv`].
    ///
    /// Values use the shortest decimal text that round-trips exactly.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("depth_m,speed_mps\n");
        for (z, c) in self.samples() {
            let _ = writeln!(out, "{z},{c}");
        }
        out
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn depths(&self) -> &[T] {
        &self.depths
    }

    pub fn speeds(&self) -> &[T] {
        &self.speeds
    }

    pub fn samples(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.depths.iter().copied().zip(self.speeds.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.depths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.depths.is_empty()
    }

    pub fn deepest(&self) -> T {
        *self.depths.last().unwrap()
    }

    /// Sound speed at depth `z` (m/s).
    pub fn speed_at(&self, z: T) -> T {
        let n = self.depths.len();
        let last = self.depths[n - 1];
        if z > last {
            let g = (self.speeds[n - 1] - self.speeds[n - 2]) / (last - self.depths[n - 2]);
            return self.speeds[n - 1] + g * (z - last);
        }
        interp_clamped(&self.depths, &self.speeds, z)
    }

    /// Smallest sound speed over the samples and the extension down to `depth`.
    pub fn min_speed_to(&self, depth: T) -> T {
        let sampled = self
            .samples()
            .filter(|&(z, _)| z <= depth)
            .map(|(_, c)| c)
            .fold(T::infinity(), T::min);
        sampled.min(self.speed_at(depth)).min(self.speed_at(T::zero()))
    }

    /// Largest sound speed over the samples and the extension down to `depth`.
    pub fn max_speed_to(&self, depth: T) -> T {
        let sampled = self
            .samples()
            .filter(|&(z, _)| z <= depth)
            .map(|(_, c)| c)
            .fold(T::neg_infinity(), T::max);
        sampled.max(self.speed_at(depth)).max(self.speed_at(T::zero()))
    }

    /// Evaluates the profile on a new depth grid.
    pub fn resample(&self, depths: &[T]) -> Result<Self> {
        Self::from_fn(self.name.clone(), depths, |z| self.speed_at(z))
    }
}

fn check_sample<T: Real>(z: T, c: T, index: usize) -> std::result::Result<(), String> {
    if !z.is_finite() || !c.is_finite() {
        return Err(format!("sample {index} is not finite"));
    }
    if index == 0 && z < T::zero() {
        return Err(format!("first depth {z} is negative"));
    }
    if c < T::lit(MIN_SOUND_SPEED) || c > T::lit(MAX_SOUND_SPEED) {
        return Err(format!(
            "speed {c} m/s out of range [{MIN_SOUND_SPEED}, {MAX_SOUND_SPEED}]"
        ));
    }
    Ok(())
}

/// Reads newline-delimited two-column numeric rows.
///
/// An optional header is accepted on the first non-blank line. Returns
/// (1-based line number, first, second) for every data row.
fn parse_two_columns(text: &str, header: &str) -> Result<Vec<(usize, f64, f64)>> {
    let mut rows = Vec::new();
    let mut seen_content = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim().trim_start_matches('\u{feff}');
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        let first_is_number = fields[0].parse::<f64>().is_ok();
        if !seen_content && !first_is_number {
            seen_content = true;
            if fields.len() != 2 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected header `{header}`, got `{trimmed}`"),
                });
            }
            continue;
        }
        seen_content = true;
        if fields.len() != 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected 2 columns, found {}", fields.len()),
            });
        }
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("`{s}` is not a number"),
            })
        };
        rows.push((line, parse(fields[0])?, parse(fields[1])?));
    }
    Ok(rows)
}

/// The surface-duct idealization c(z) = c0·(1 + a·z), valid down to `depth`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearDuct<T = f64> {
    /// Surface sound speed, m/s.
    pub c0: T,
    /// Fractional speed gradient, 1/m.
    pub gradient: T,
    /// Depth of validity of the linear law, m.
    pub depth: T,
}

impl<T: Real> LinearDuct<T> {
    pub fn new(c0: T, gradient: T, depth: T) -> Result<Self> {
        let pos = |v: T| v > T::zero() && v.is_finite();
        if !pos(c0) {
            return Err(Error::out_of_range("c0", c0.to_f64_lossy(), "(0, inf)"));
        }
        if !pos(gradient) {
            return Err(Error::out_of_range("a", gradient.to_f64_lossy(), "(0, inf)"));
        }
        if !pos(depth) {
            return Err(Error::out_of_range("duct depth", depth.to_f64_lossy(), "(0, inf)"));
        }
        Ok(Self { c0, gradient, depth })
    }

    pub fn speed_at(&self, z: T) -> T {
        self.c0 * (T::one() + self.gradient * z)
    }

    /// Two-sample profile that reproduces the linear law at every depth
    /// through the constant-gradient extension.
    pub fn to_profile(&self) -> SoundSpeedProfile<T> {
        SoundSpeedProfile {
            name: format!("linear duct c0={} a={:e}", self.c0, self.gradient),
            depths: vec![T::zero(), self.depth],
            speeds: vec![self.c0, self.speed_at(self.depth)],
        }
    }
}

/// Least-squares fit of c(z) = c0(1 + a z) to the samples with depth ≤ `depth_limit`.
///
/// The fit is an unweighted straight line c = c0 + (c0 a) z; `a` is the
/// slope divided by the intercept. The returned duct depth is `depth_limit`.
pub fn fit_linear_duct<T: Real>(profile: &SoundSpeedProfile<T>, depth_limit: T) -> Result<LinearDuct<T>> {
    if !(depth_limit > T::zero()) {
        return Err(Error::out_of_range(
            "depth limit",
            depth_limit.to_f64_lossy(),
            "(0, inf)",
        ));
    }
    let pts: Vec<(T, T)> = profile.samples().filter(|&(z, _)| z <= depth_limit).collect();
    if pts.len() < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 samples above {depth_limit} m to fit a duct, found {}",
            pts.len()
        )));
    }
    let n = T::from_usize_lossy(pts.len());
    let mean_z = pts.iter().fold(T::zero(), |s, p| s + p.0) / n;
    let mean_c = pts.iter().fold(T::zero(), |s, p| s + p.1) / n;
    let (mut szz, mut szc) = (T::zero(), T::zero());
    for &(z, c) in &pts {
        szz = szz + (z - mean_z) * (z - mean_z);
        szc = szc + (z - mean_z) * (c - mean_c);
    }
    let slope = szc / szz;
    let c0 = mean_c - slope * mean_z;
    let gradient = slope / c0;
    if !(gradient > T::zero()) {
        return Err(Error::NotSurfaceDuct {
            gradient: gradient.to_f64_lossy(),
        });
    }
    LinearDuct::new(c0, gradient, depth_limit)
}

/// Water depth along the propagation track.
#[derive(Debug, Clone, PartialEq)]
pub struct BathymetryTrack<T = f64> {
    ranges: Vec<T>,
    depths: Vec<T>,
}

impl<T: Real> BathymetryTrack<T> {
    pub fn new(points: Vec<(T, T)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("bathymetry track is empty"));
        }
        if points[0].0 != T::zero() {
            return Err(Error::invalid("bathymetry track must start at range 0"));
        }
        for (i, w) in points.windows(2).enumerate() {
            if w[1].0 <= w[0].0 {
                return Err(Error::invalid(format!(
                    "bathymetry ranges must be strictly increasing (point {})",
                    i + 1
                )));
            }
        }
        if let Some(p) = points.iter().find(|p| !(p.1 > T::zero())) {
            return Err(Error::invalid(format!("bathymetry depth {} must be positive", p.1)));
        }
        let (ranges, depths) = points.into_iter().unzip();
        Ok(Self { ranges, depths })
    }

    /// Parses the two-column `range_m,depth_m` text format.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let rows = parse_two_columns(text, "range_m,depth_m")?;
        for (i, &(line, r, d)) in rows.iter().enumerate() {
            let bad = if i == 0 && r != 0.0 {
                Some("track must start at range 0".to_string())
            } else if i > 0 && r <= rows[i - 1].1 {
                Some(format!("non-monotone range {r}"))
            } else if !(d > 0.0) {
                Some(format!("depth {d} must be positive"))
            } else {
                None
            };
            if let Some(message) = bad {
                return Err(Error::Parse { line, message });
            }
        }
        if rows.is_empty() {
            return Err(Error::Parse {
                line: 1,
                message: "bathymetry track is empty".into(),
            });
        }
        Self::new(rows.into_iter().map(|(_, r, d)| (T::lit(r), T::lit(d))).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("range_m,depth_m\n");
        for (r, d) in self.points() {
            let _ = writeln!(out, "{r},{d}");
        }
        out
    }

    pub fn points(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.ranges.iter().copied().zip(self.depths.iter().copied())
    }

    pub fn extent(&self) -> T {
        *self.ranges.last().unwrap()
    }

    /// Water depth at range `r`, linear between points and held at the ends.
    pub fn depth_at(&self, r: T) -> T {
        interp_clamped(&self.ranges, &self.depths, r)
    }
}

/// How profiles between stations are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RangeInterpolation {
    /// The nearest station at or before the range.
    #[default]
    PiecewiseConstant,
    /// Depth-wise linear blend of the bracketing stations.
    LinearBlend,
}

/// A profile measured at a given range from the source.
#[derive(Debug, Clone, PartialEq)]
pub struct Station<T = f64> {
    pub range: T,
    pub profile: SoundSpeedProfile<T>,
}

/// Range-dependent environment built from profile stations.
///
/// The first station sits at the source (range 0). With a single station
/// the environment is range independent and valid at every range;
/// otherwise it is valid up to the last station.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeDependentEnv<T = f64> {
    stations: Vec<Station<T>>,
    bathymetry: Option<BathymetryTrack<T>>,
    density: T,
    interpolation: RangeInterpolation,
}

impl<T: Real> RangeDependentEnv<T> {
    pub fn new(
        stations: Vec<Station<T>>,
        bathymetry: Option<BathymetryTrack<T>>,
        density: T,
        interpolation: RangeInterpolation,
    ) -> Result<Self> {
        if stations.is_empty() {
            return Err(Error::invalid("environment needs at least one station"));
        }
        if stations[0].range != T::zero() {
            return Err(Error::invalid("the first station must be at range 0"));
        }
        if stations.windows(2).any(|w| w[1].range <= w[0].range) {
            return Err(Error::invalid("station ranges must be strictly increasing"));
        }
        if !(density > T::zero()) {
            return Err(Error::out_of_range("density", density.to_f64_lossy(), "(0, inf)"));
        }
        Ok(Self {
            stations,
            bathymetry,
            density,
            interpolation,
        })
    }

    /// Single-station environment with the default density.
    pub fn range_independent(profile: SoundSpeedProfile<T>) -> Self {
        Self {
            stations: vec![Station {
                range: T::zero(),
                profile,
            }],
            bathymetry: None,
            density: T::lit(DEFAULT_DENSITY),
            interpolation: RangeInterpolation::PiecewiseConstant,
        }
    }

    pub fn stations(&self) -> &[Station<T>] {
        &self.stations
    }

    pub fn bathymetry(&self) -> Option<&BathymetryTrack<T>> {
        self.bathymetry.as_ref()
    }

    pub fn density(&self) -> T {
        self.density
    }

    pub fn interpolation(&self) -> RangeInterpolation {
        self.interpolation
    }

    pub fn is_range_independent(&self) -> bool {
        self.stations.len() == 1
    }

    /// Largest valid range (infinite for a single station).
    pub fn extent(&self) -> T {
        if self.is_range_independent() {
            T::infinity()
        } else {
            self.stations.last().unwrap().range
        }
    }

    /// Water depth at `r` if a bathymetry track is attached.
    pub fn water_depth_at(&self, r: T) -> Option<T> {
        self.bathymetry.as_ref().map(|b| b.depth_at(r))
    }

    /// Sound-speed profile at range `r`.
    pub fn profile_at(&self, r: T) -> Result<SoundSpeedProfile<T>> {
        if !(r >= T::zero()) || r > self.extent() {
            return Err(Error::out_of_range(
                "range",
                r.to_f64_lossy(),
                format!("[0, {}]", self.extent()),
            ));
        }
        // index of the last station at or before r
        let j = self.stations.partition_point(|s| s.range <= r) - 1;
        let before = &self.stations[j];
        let after = match self.stations.get(j + 1) {
            Some(s) if self.interpolation == RangeInterpolation::LinearBlend && r > before.range => s,
            _ => return Ok(before.profile.clone()),
        };
        let w = (r - before.range) / (after.range - before.range);
        blend_profiles(&before.profile, &after.profile, w)
            .map(|p| p.with_name(format!("blend@{r}")))
    }
}

/// Depth-wise blend `(1-w)·a + w·b` on the union of both depth grids.
pub fn blend_profiles<T: Real>(
    a: &SoundSpeedProfile<T>,
    b: &SoundSpeedProfile<T>,
    w: T,
) -> Result<SoundSpeedProfile<T>> {
    let mut depths: Vec<T> = a.depths().iter().chain(b.depths()).copied().collect();
    depths.sort_by(|x, y| x.partial_cmp(y).unwrap());
    depths.dedup();
    let samples = depths
        .into_iter()
        .map(|z| (z, (T::one() - w) * a.speed_at(z) + w * b.speed_at(z)))
        .collect();
    SoundSpeedProfile::new(format!("{}+{}", a.name(), b.name()), samples)
}

/// Parses the SSP CSV format into an `f64` profile named "ssp".
pub fn parse_ssp(text: &str) -> Result<SoundSpeedProfile<f64>> {
    SoundSpeedProfile::parse_csv("ssp", text)
}
