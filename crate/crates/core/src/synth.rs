//! Broadband synthesis from the normal-mode sum.
//!
//! The frequency-domain field of a unit point source is
//!
//! ```text
//! P(ω, r, z) = S(ω) · j e^{−jπ/4} / (ρ √(8π r)) · Σ_m ψ_m(z_s) ψ_m(z) e^{−α_m r} e^{j k_m r} / √k_m
//! ```
//!
//! with time dependence e^{−jωt}. Waveforms are the real inverse transform
//! of P sampled on the DFT grid of the requested window; the adiabatic
//! variant replaces k_m r by ∫ k_m dr over the station profiles.

use std::fmt::Write as _;

use num_complex::Complex;
use rayon::prelude::*;

use crate::dsp::fft_forward;
use crate::env::{LinearDuct, RangeDependentEnv, RangeInterpolation, SoundSpeedProfile};
use crate::error::{Error, Result};
use crate::modes::{ModeSolution, ModeSolver};
use crate::num::Real;
use crate::waveform::Waveform;
use crate::wkb;

/// Spectral shape of the source over its band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PulseShape {
    /// Unit amplitude on [f_lo, f_hi].
    Flat,
    /// Unit amplitude with raised-cosine tapers over the outer 10 % of the band.
    #[default]
    RaisedCosine,
}

/// Band-limited source spectrum S(ω).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourcePulse<T = f64> {
    pub f_lo: T,
    pub f_hi: T,
    pub shape: PulseShape,
}

/// Fraction of the bandwidth tapered at each edge of a raised-cosine pulse.
pub const TAPER_FRACTION: f64 = 0.1;

impl<T: Real> SourcePulse<T> {
    pub fn new(f_lo: T, f_hi: T, shape: PulseShape) -> Result<Self> {
        if !(f_lo > T::zero() && f_hi > f_lo && f_hi.is_finite()) {
            return Err(Error::invalid(format!(
                "pulse band must satisfy 0 < f_lo < f_hi, got [{f_lo}, {f_hi}]"
            )));
        }
        Ok(Self { f_lo, f_hi, shape })
    }

    /// Real amplitude of the source spectrum at `f` Hz.
    pub fn spectrum(&self, f: T) -> T {
        if f < self.f_lo || f > self.f_hi {
            return T::zero();
        }
        match self.shape {
            PulseShape::Flat => T::one(),
            PulseShape::RaisedCosine => {
                let w = T::lit(TAPER_FRACTION) * (self.f_hi - self.f_lo);
                let edge = (f - self.f_lo).min(self.f_hi - f);
                if edge >= w {
                    T::one()
                } else {
                    T::lit(0.5) * (T::one() - (T::PI() * edge / w).cos())
                }
            }
        }
    }
}

/// Source depth, receiver depth and horizontal range, all in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry<T = f64> {
    pub source_depth: T,
    pub receiver_depth: T,
    pub range: T,
}

impl<T: Real> Geometry<T> {
    pub fn new(source_depth: T, receiver_depth: T, range: T) -> Result<Self> {
        for (what, v) in [
            ("source depth", source_depth),
            ("receiver depth", receiver_depth),
            ("range", range),
        ] {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::out_of_range(what, v.to_f64_lossy(), "(0, inf)"));
            }
        }
        Ok(Self {
            source_depth,
            receiver_depth,
            range,
        })
    }

    pub fn at_range(&self, range: T) -> Result<Self> {
        Self::new(self.source_depth, self.receiver_depth, range)
    }
}

/// Which modes enter the sum.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum ModeSelection {
    #[default]
    All,
    /// Only these 1-based mode numbers.
    Only(Vec<usize>),
}

impl ModeSelection {
    pub fn single(m: usize) -> Self {
        ModeSelection::Only(vec![m])
    }

    pub fn includes(&self, m: usize) -> bool {
        match self {
            ModeSelection::All => true,
            ModeSelection::Only(list) => list.contains(&m),
        }
    }

    fn highest(&self) -> Option<usize> {
        match self {
            ModeSelection::All => None,
            ModeSelection::Only(list) => list.iter().copied().max(),
        }
    }
}

/// The values of one mode that the field sum needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSample<T = f64> {
    pub index: usize,
    pub k: T,
    pub alpha: T,
    pub psi_source: T,
    pub psi_receiver: T,
}

/// Mode samples on a frequency grid, for one profile and one pair of depths.
///
/// Frequencies without propagating modes hold an empty list.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalTable<T = f64> {
    pub frequencies: Vec<T>,
    pub modes: Vec<Vec<ModeSample<T>>>,
    pub density: T,
}

impl<T: Real> ModalTable<T> {
    /// Extracts the samples from full mode solutions.
    pub fn from_solutions(solutions: &[ModeSolution<T>], source_depth: T, receiver_depth: T) -> Self {
        let density = solutions.first().map_or(T::lit(crate::env::DEFAULT_DENSITY), |s| s.density);
        let modes = solutions
            .iter()
            .map(|s| sample_solution(s, source_depth, receiver_depth, &ModeSelection::All))
            .collect();
        Self {
            frequencies: solutions.iter().map(|s| s.frequency).collect(),
            modes,
            density,
        }
    }

    /// Solves `profile` at every frequency (in parallel).
    pub fn solve(
        profile: &SoundSpeedProfile<T>,
        solver: &ModeSolver<T>,
        frequencies: &[T],
        source_depth: T,
        receiver_depth: T,
        selection: &ModeSelection,
    ) -> Result<Self> {
        let mut solver = *solver;
        if let Some(top) = selection.highest() {
            solver.mode_limit = Some(solver.mode_limit.map_or(top, |l| l.min(top)));
        }
        let depth = solver.grid.depth_max();
        for (what, z) in [("source depth", source_depth), ("receiver depth", receiver_depth)] {
            if !(z > T::zero() && z < depth) {
                return Err(Error::out_of_range(what, z.to_f64_lossy(), format!("(0, {depth})")));
            }
        }
        let modes = frequencies
            .par_iter()
            .map(|&f| match solver.solve(profile, f) {
                Ok(s) => Ok(sample_solution(&s, source_depth, receiver_depth, selection)),
                Err(Error::NoPropagatingModes { .. }) => Ok(Vec::new()),
                Err(e) => Err(e),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            frequencies: frequencies.to_vec(),
            modes,
            density: solver.density,
        })
    }

    /// Sets α for every mode number `m` to `alpha[m − 1]`.
    pub fn set_attenuation(&mut self, alpha: &[T]) -> Result<()> {
        if let Some(a) = alpha.iter().find(|a| !(**a >= T::zero())) {
            return Err(Error::invalid(format!("attenuation {a} must be >= 0")));
        }
        for list in &mut self.modes {
            for m in list.iter_mut() {
                if let Some(&a) = alpha.get(m.index - 1) {
                    m.alpha = a;
                }
            }
        }
        Ok(())
    }

    fn is_empty(&self) -> bool {
        self.modes.iter().all(|m| m.is_empty())
    }
}

fn sample_solution<T: Real>(
    s: &ModeSolution<T>,
    source_depth: T,
    receiver_depth: T,
    selection: &ModeSelection,
) -> Vec<ModeSample<T>> {
    s.modes
        .iter()
        .filter(|m| selection.includes(m.index))
        .map(|m| ModeSample {
            index: m.index,
            k: m.k,
            alpha: m.alpha,
            psi_source: s.psi_at(m, source_depth),
            psi_receiver: s.psi_at(m, receiver_depth),
        })
        .collect()
}

/// Range-integrated quantities of one mode between source and receiver.
#[derive(Debug, Clone, Copy)]
struct ModalTerm<T> {
    amplitude: T,
    phase: T,
    attenuation: T,
    k_mean: T,
}

fn term_sum<T: Real>(terms: impl Iterator<Item = ModalTerm<T>>, r: T, density: T) -> Complex<T> {
    // j e^{−jπ/4} = e^{jπ/4}
    let pre = Complex::from_polar(
        (density * (T::lit(8.0) * T::PI() * r).sqrt()).recip(),
        T::FRAC_PI_4(),
    );
    let sum = terms.fold(Complex::new(T::zero(), T::zero()), |acc, t| {
        let mag = t.amplitude * (-t.attenuation).exp() / t.k_mean.sqrt();
        acc + Complex::from_polar(mag, t.phase)
    });
    pre * sum
}

fn range_independent_terms<T: Real>(modes: &[ModeSample<T>], r: T) -> impl Iterator<Item = ModalTerm<T>> + '_ {
    modes.iter().map(move |m| ModalTerm {
        amplitude: m.psi_source * m.psi_receiver,
        phase: m.k * r,
        attenuation: m.alpha * r,
        k_mean: m.k,
    })
}

/// Mode sum at one frequency without the source spectrum (S = 1).
pub fn mode_sum<T: Real>(modes: &[ModeSample<T>], range: T, density: T) -> Complex<T> {
    term_sum(range_independent_terms(modes, range), range, density)
}

/// P(ω) at every frequency of `table` for the given geometry and source.
pub fn synthesize_pressure_spectrum<T: Real>(
    table: &ModalTable<T>,
    geometry: &Geometry<T>,
    pulse: &SourcePulse<T>,
) -> Result<Vec<Complex<T>>> {
    if table.is_empty() {
        return Err(Error::NoPropagatingModes {
            frequency: table.frequencies.first().map_or(0.0, |f| f.to_f64_lossy()),
        });
    }
    let r = geometry.range;
    Ok(table
        .frequencies
        .iter()
        .zip(&table.modes)
        .map(|(&f, modes)| mode_sum(modes, r, table.density) * pulse.spectrum(f))
        .collect())
}

/// How range dependence is handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Propagation {
    /// Uses the profile at the source for the whole track.
    #[default]
    RangeIndependent,
    /// Adiabatic modes over the station profiles.
    Adiabatic,
}

/// Parameters of a waveform synthesis.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthOptions<T = f64> {
    pub sample_rate: T,
    /// Window length; the frequency grid spacing is its reciprocal.
    pub duration: T,
    /// Start time of the window; `None` centres it on t_r.
    pub t0: Option<T>,
    pub selection: ModeSelection,
    pub propagation: Propagation,
    /// α for mode m at index m − 1, nepers/m; missing modes get 0.
    pub attenuation: Vec<T>,
}

impl<T: Real> SynthOptions<T> {
    pub fn new(sample_rate: T, duration: T) -> Self {
        Self {
            sample_rate,
            duration,
            t0: None,
            selection: ModeSelection::All,
            propagation: Propagation::RangeIndependent,
            attenuation: Vec::new(),
        }
    }

    pub fn t0(mut self, t0: T) -> Self {
        self.t0 = Some(t0);
        self
    }

    pub fn selection(mut self, selection: ModeSelection) -> Self {
        self.selection = selection;
        self
    }

    pub fn propagation(mut self, propagation: Propagation) -> Self {
        self.propagation = propagation;
        self
    }

    pub fn attenuation(mut self, alpha: Vec<T>) -> Self {
        self.attenuation = alpha;
        self
    }
}

/// Result of [`synthesize_waveform`].
#[derive(Debug, Clone, PartialEq)]
pub struct Synthesis<T = f64> {
    pub waveform: Waveform<T>,
    /// Reference arrival r / c(0) of the receiver-side profile.
    pub t_r: T,
    /// (frequency, mode) pairs dropped because the mode was missing at some station.
    pub dropped_modes: usize,
    /// X_q = P(ω_q) e^{−jω_q t0} on the DFT bins `bins`.
    pub spectrum: Vec<Complex<T>>,
    pub bins: Vec<usize>,
}

impl<T: Real> Synthesis<T> {
    /// Time-domain energy Σ p_n² predicted from the spectrum.
    pub fn spectral_energy(&self) -> T {
        let n = T::from_usize_lossy(self.waveform.len());
        let domega = T::TAU() * self.waveform.sample_rate() / n;
        let scale = domega / T::PI();
        let sum = self.spectrum.iter().fold(T::zero(), |s, x| s + x.norm_sqr());
        scale * scale * n * T::lit(0.5) * sum
    }
}

/// DFT bins q (frequency q·fs/N) where the pulse spectrum is non-zero.
pub fn band_bins<T: Real>(pulse: &SourcePulse<T>, sample_rate: T, n: usize) -> Vec<usize> {
    let df = sample_rate / T::from_usize_lossy(n);
    (1..n.div_ceil(2))
        .filter(|&q| pulse.spectrum(T::from_usize_lossy(q) * df) > T::zero())
        .collect()
}

/// Synthesizes the received waveform of a broadband pulse.
///
/// The frequency grid is the DFT grid of the window (spacing 1/duration);
/// energy arriving outside the window wraps around circularly.
pub fn synthesize_waveform<T: Real>(
    env: &RangeDependentEnv<T>,
    solver: &ModeSolver<T>,
    geometry: &Geometry<T>,
    pulse: &SourcePulse<T>,
    opts: &SynthOptions<T>,
) -> Result<Synthesis<T>> {
    let fs = opts.sample_rate;
    if !(fs >= T::lit(4.0) * pulse.f_hi) {
        return Err(Error::invalid(format!(
            "sample rate {fs} Hz is below 4 x f_hi = {} Hz",
            T::lit(4.0) * pulse.f_hi
        )));
    }
    if !(opts.duration > T::zero() && opts.duration.is_finite()) {
        return Err(Error::out_of_range("duration", opts.duration.to_f64_lossy(), "(0, inf)"));
    }
    let n = (opts.duration * fs).round().to_usize().unwrap_or(0);
    if n < 4 {
        return Err(Error::invalid("window holds fewer than 4 samples"));
    }
    let r = geometry.range;
    if r > env.extent() {
        return Err(Error::out_of_range("range", r.to_f64_lossy(), format!("[0, {}]", env.extent())));
    }
    let solver = solver.density(env.density());
    let bins = band_bins(pulse, fs, n);
    let df = fs / T::from_usize_lossy(n);
    let freqs: Vec<T> = bins.iter().map(|&q| T::from_usize_lossy(q) * df).collect();

    let receiver_profile = env.profile_at(r)?;
    let t_r = r / receiver_profile.speed_at(T::zero());
    let t0 = opts.t0.unwrap_or(t_r - T::from_usize_lossy(n) / fs * T::lit(0.5));

    let (pressure, dropped) = match opts.propagation {
        Propagation::RangeIndependent => {
            let profile = env.profile_at(T::zero())?;
            let grid_solver = solver_for_range(&solver, env, T::zero())?;
            let mut table = ModalTable::solve(
                &profile,
                &grid_solver,
                &freqs,
                geometry.source_depth,
                geometry.receiver_depth,
                &opts.selection,
            )?;
            table.set_attenuation(&opts.attenuation)?;
            (synthesize_pressure_spectrum(&table, geometry, pulse)?, 0)
        }
        Propagation::Adiabatic => adiabatic_spectrum(env, &solver, geometry, pulse, &freqs, opts)?,
    };

    // X_q = P(ω_q) e^{−jω_q t0}; p_n = (Δω/π) Re Σ_q X_q e^{−2πi q n / N}
    let spectrum: Vec<Complex<T>> = pressure
        .iter()
        .zip(&freqs)
        .map(|(&p, &f)| p * Complex::from_polar(T::one(), -T::TAU() * f * t0))
        .collect();
    let mut buf = vec![Complex::new(T::zero(), T::zero()); n];
    for (&q, &x) in bins.iter().zip(&spectrum) {
        buf[q] = x;
    }
    fft_forward(&mut buf);
    let scale = T::TAU() * df / T::PI();
    let samples = buf.iter().map(|c| c.re * scale).collect();
    Ok(Synthesis {
        waveform: Waveform::new(fs, t0, samples)?,
        t_r,
        dropped_modes: dropped,
        spectrum,
        bins,
    })
}

/// Solver whose truncation depth follows the bathymetry at range `r`.
fn solver_for_range<T: Real>(solver: &ModeSolver<T>, env: &RangeDependentEnv<T>, r: T) -> Result<ModeSolver<T>> {
    match env.water_depth_at(r) {
        Some(depth) if depth < solver.grid.depth_max() => Ok(ModeSolver {
            grid: solver.grid.with_depth(depth)?,
            ..*solver
        }),
        _ => Ok(*solver),
    }
}

fn adiabatic_spectrum<T: Real>(
    env: &RangeDependentEnv<T>,
    solver: &ModeSolver<T>,
    geometry: &Geometry<T>,
    pulse: &SourcePulse<T>,
    freqs: &[T],
    opts: &SynthOptions<T>,
) -> Result<(Vec<Complex<T>>, usize)> {
    let r = geometry.range;
    let mut nodes: Vec<T> = env.stations().iter().map(|s| s.range).filter(|&x| x < r).collect();
    nodes.push(r);
    let tables = nodes
        .iter()
        .map(|&x| {
            let mut t = ModalTable::solve(
                &env.profile_at(x)?,
                &solver_for_range(solver, env, x)?,
                freqs,
                geometry.source_depth,
                geometry.receiver_depth,
                &opts.selection,
            )?;
            t.set_attenuation(&opts.attenuation)?;
            Ok(t)
        })
        .collect::<Result<Vec<_>>>()?;

    let stepwise = env.interpolation() == RangeInterpolation::PiecewiseConstant;
    let mut dropped = 0;
    let mut any = false;
    let mut out = Vec::with_capacity(freqs.len());
    for (q, &f) in freqs.iter().enumerate() {
        let source = &tables[0].modes[q];
        let mut terms = Vec::with_capacity(source.len());
        for ms in source {
            let at_nodes: Option<Vec<&ModeSample<T>>> = tables
                .iter()
                .map(|t| t.modes[q].iter().find(|x| x.index == ms.index))
                .collect();
            let Some(at_nodes) = at_nodes else {
                dropped += 1;
                continue;
            };
            let mr = at_nodes[nodes.len() - 1];
            let (mut phase, mut atten) = (T::zero(), T::zero());
            for j in 0..nodes.len() - 1 {
                let dr = nodes[j + 1] - nodes[j];
                let (a, b) = (at_nodes[j], at_nodes[j + 1]);
                if stepwise {
                    phase = phase + a.k * dr;
                    atten = atten + a.alpha * dr;
                } else {
                    phase = phase + T::lit(0.5) * (a.k + b.k) * dr;
                    atten = atten + T::lit(0.5) * (a.alpha + b.alpha) * dr;
                }
            }
            if nodes.len() == 1 {
                phase = ms.k * r;
                atten = ms.alpha * r;
            }
            terms.push(ModalTerm {
                amplitude: ms.psi_source * mr.psi_receiver,
                phase,
                attenuation: atten,
                k_mean: phase / r,
            });
        }
        any |= !terms.is_empty();
        out.push(term_sum(terms.into_iter(), r, env.density()) * pulse.spectrum(f));
    }
    if !any {
        return Err(Error::NoPropagatingModes {
            frequency: freqs.first().map_or(0.0, |f| f.to_f64_lossy()),
        });
    }
    Ok((out, dropped))
}

/// Transmission loss on a range × depth grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TlMap<T = f64> {
    pub frequency: T,
    pub ranges: Vec<T>,
    pub depths: Vec<T>,
    /// `tl[i][j]` at `depths[i]`, `ranges[j]`, dB re 1 m.
    pub tl: Vec<Vec<T>>,
}

/// Largest loss reported where the field vanishes, dB.
pub const TL_CEILING: f64 = 300.0;

impl<T: Real> TlMap<T> {
    /// CSV: first row holds the ranges, first column the depths.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("depth_m\\range_m");
        for r in &self.ranges {
            let _ = write!(out, ",{r}");
        }
        out.push('\n');
        for (z, row) in self.depths.iter().zip(&self.tl) {
            let _ = write!(out, "{z}");
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    /// Mean TL over cells whose depth satisfies `pred`.
    pub fn mean_where(&self, pred: impl Fn(T) -> bool) -> Option<T> {
        let (mut s, mut n) = (T::zero(), 0usize);
        for (z, row) in self.depths.iter().zip(&self.tl) {
            if pred(*z) {
                for &v in row {
                    s = s + v;
                    n += 1;
                }
            }
        }
        (n > 0).then(|| s / T::from_usize_lossy(n))
    }
}

/// Converts a unit-source pressure to TL re the free-field level 1/(4π) at 1 m.
pub fn transmission_loss<T: Real>(p: Complex<T>) -> T {
    let rel = (T::lit(4.0) * T::PI() * p.norm()).max(T::lit(10f64.powf(-TL_CEILING / 20.0)));
    -T::lit(20.0) * rel.log10()
}

/// TL(r, z) = −20 log10(4π |P|) with S = 1 at one frequency.
pub fn transmission_loss_map<T: Real>(
    profile: &SoundSpeedProfile<T>,
    solver: &ModeSolver<T>,
    frequency: T,
    source_depth: T,
    ranges: &[T],
    depths: &[T],
    attenuation: &[T],
) -> Result<TlMap<T>> {
    if let Some(r) = ranges.iter().find(|r| !(**r > T::zero())) {
        return Err(Error::out_of_range("range", r.to_f64_lossy(), "(0, inf)"));
    }
    let mut solution = solver.solve(profile, frequency)?;
    solution.set_attenuation(attenuation)?;
    let psi_s: Vec<T> = solution.modes.iter().map(|m| solution.psi_at(m, source_depth)).collect();
    let tl = depths
        .par_iter()
        .map(|&z| {
            let samples: Vec<ModeSample<T>> = solution
                .modes
                .iter()
                .zip(&psi_s)
                .map(|(m, &ps)| ModeSample {
                    index: m.index,
                    k: m.k,
                    alpha: m.alpha,
                    psi_source: ps,
                    psi_receiver: solution.psi_at(m, z),
                })
                .collect();
            ranges
                .iter()
                .map(|&r| transmission_loss(mode_sum(&samples, r, solution.density)))
                .collect()
        })
        .collect();
    Ok(TlMap {
        frequency,
        ranges: ranges.to_vec(),
        depths: depths.to_vec(),
        tl,
    })
}

/// One point of a modal arrival-time curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkeletonPoint<T = f64> {
    pub mode: usize,
    pub frequency: T,
    pub time: T,
}

/// Group-delay curves t_m(f) of the linear duct on `n_freq` frequencies
/// spanning [f_lo, f_hi]; frequencies below a mode's cutoff are left out.
pub fn dispersion_skeleton<T: Real>(
    duct: &LinearDuct<T>,
    range: T,
    modes: &[usize],
    f_lo: T,
    f_hi: T,
    n_freq: usize,
) -> Result<Vec<SkeletonPoint<T>>> {
    if !(range > T::zero()) {
        return Err(Error::out_of_range("range", range.to_f64_lossy(), "(0, inf)"));
    }
    if !(f_hi > f_lo) || n_freq == 0 {
        return Ok(Vec::new());
    }
    let step = if n_freq > 1 {
        (f_hi - f_lo) / T::from_usize_lossy(n_freq - 1)
    } else {
        T::zero()
    };
    let mut out = Vec::new();
    for &m in modes {
        for i in 0..n_freq {
            let f = f_lo + step * T::from_usize_lossy(i);
            if let Ok(t) = wkb::modal_group_delay(duct, m, T::TAU() * f, range) {
                out.push(SkeletonPoint {
                    mode: m,
                    frequency: f,
                    time: t,
                });
            }
        }
    }
    Ok(out)
}

/// CSV `m,f_hz,t_s`.
pub fn skeleton_csv<T: Real>(points: &[SkeletonPoint<T>]) -> String {
    let mut out = String::from("m,f_hz,t_s\n");
    for p in points {
        let _ = writeln!(out, "{},{},{}", p.mode, p.frequency, p.time);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::Station;
    use crate::modes::DepthGrid;
    use crate::reference::{linear_duct_profile, reference_duct};

    fn solver() -> ModeSolver<f64> {
        ModeSolver::new(DepthGrid::new(1000.0, 0.5).unwrap()).max_phase_speed(1459.0)
    }

    fn one_mode(k: f64, ps: f64, pr: f64) -> ModeSample<f64> {
        ModeSample {
            index: 1,
            k,
            alpha: 0.0,
            psi_source: ps,
            psi_receiver: pr,
        }
    }

    #[test]
    fn pulse_shapes() {
        let flat = SourcePulse::new(10.0, 100.0, PulseShape::Flat).unwrap();
        assert_eq!(flat.spectrum(10.0), 1.0);
        assert_eq!(flat.spectrum(9.99), 0.0);
        let rc = SourcePulse::<f64>::new(10.0, 100.0, PulseShape::RaisedCosine).unwrap();
        assert_eq!(rc.spectrum(10.0), 0.0);
        assert!((rc.spectrum(14.5) - 0.5).abs() < 1e-12);
        assert_eq!(rc.spectrum(50.0), 1.0);
        assert!((rc.spectrum(95.5) - 0.5).abs() < 1e-12);
        assert!(SourcePulse::new(0.0, 1.0, PulseShape::Flat).is_err());
        assert!(SourcePulse::new(5.0, 5.0, PulseShape::Flat).is_err());
    }

    #[test]
    fn geometry_validation() {
        assert!(Geometry::new(300.0, 372.0, 105e3).is_ok());
        assert!(Geometry::new(300.0, 372.0, 0.0).is_err());
        assert!(Geometry::new(-1.0, 372.0, 1.0).is_err());
    }

    #[test]
    fn single_mode_spreading() {
        let m = [one_mode(0.2, 30.0, 25.0)];
        let a = mode_sum(&m, 10e3, 1000.0).norm();
        let b = mode_sum(&m, 20e3, 1000.0).norm();
        assert!((a / b - 2f64.sqrt()).abs() < 1e-12);
        // explicit evaluation of the prefactor
        let expect = 30.0 * 25.0 / (1000.0 * (8.0 * std::f64::consts::PI * 10e3).sqrt() * 0.2f64.sqrt());
        assert!((a - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn mode_sum_is_linear() {
        let a = one_mode(0.2, 30.0, 25.0);
        let mut b = one_mode(0.19, -12.0, 40.0);
        b.index = 2;
        let both = mode_sum(&[a, b], 5e3, 1000.0);
        let sep = mode_sum(&[a], 5e3, 1000.0) + mode_sum(&[b], 5e3, 1000.0);
        assert!((both - sep).norm() < 1e-15 * both.norm().max(1e-300));
    }

    #[test]
    fn tl_spreading_and_attenuation() {
        let m = [one_mode(0.2, 30.0, 25.0)];
        let tl1 = transmission_loss(mode_sum(&m, 10e3, 1000.0));
        let tl2 = transmission_loss(mode_sum(&m, 20e3, 1000.0));
        assert!((tl2 - tl1 - 10.0 * 2f64.log10()).abs() < 1e-9);
        let mut att = m;
        att[0].alpha = 0.001;
        let tl3 = transmission_loss(mode_sum(&att, 10e3, 1000.0));
        let expect = 20.0 * std::f64::consts::E.log10() * 0.001 * 10e3;
        assert!((tl3 - tl1 - expect).abs() < 1e-9);
        assert_eq!(transmission_loss(Complex::new(0.0, 0.0)), TL_CEILING);
    }

    #[test]
    fn receiver_on_node_gives_no_field() {
        // isospeed: mode 1 has no interior node, mode 2 has one at H/2
        let iso = SoundSpeedProfile::new("iso", vec![(0.0, 1500.0), (1000.0, 1500.0)]).unwrap();
        let s = ModeSolver::new(DepthGrid::new(1000.0, 0.5).unwrap())
            .max_phase_speed(f64::INFINITY)
            .solve(&iso, 50.0)
            .unwrap();
        let t = ModalTable::from_solutions(&[s], 300.0, 500.0);
        let m2: Vec<_> = t.modes[0].iter().filter(|m| m.index == 2).copied().collect();
        let peak = t.modes[0].iter().map(|m| m.psi_source.abs()).fold(0.0, f64::max);
        assert!(mode_sum(&m2, 1e3, 1000.0).norm() <= 1e-10 * peak * peak);
    }

    #[test]
    fn tl_map_shape_and_csv() {
        let map = transmission_loss_map(
            &linear_duct_profile(1000.0),
            &solver(),
            50.0,
            100.0,
            &[1e3, 2e3, 4e3],
            &[10.0, 50.0],
            &[],
        )
        .unwrap();
        assert_eq!(map.tl.len(), 2);
        assert!(map.tl.iter().flatten().all(|v| v.is_finite()));
        let csv = map.to_csv();
        assert!(csv.starts_with("depth_m\\range_m,1000,2000,4000\n10,"));
        assert!(map.mean_where(|z| z < 20.0).is_some());
        assert!(map.mean_where(|z| z > 1e4).is_none());
    }

    #[test]
    fn skeleton_curves() {
        let pts = dispersion_skeleton(&reference_duct(), 105e3, &[1, 2], 10.0, 100.0, 91).unwrap();
        assert_eq!(pts.len(), 182);
        let m1: Vec<_> = pts.iter().filter(|p| p.mode == 1).collect();
        assert!(m1.windows(2).all(|w| w[1].time > w[0].time));
        let tr = 105e3 / 1434.0;
        assert!(m1.iter().all(|p| p.time < tr));
        for (a, b) in m1.iter().zip(pts.iter().filter(|p| p.mode == 2)) {
            assert!(a.time > b.time);
        }
        assert!(dispersion_skeleton(&reference_duct(), 105e3, &[1], 50.0, 50.0, 10).unwrap().is_empty());
        assert!(dispersion_skeleton(&reference_duct(), 0.0, &[1], 10.0, 50.0, 10).is_err());
        // a cutoff below the band edge removes the lowest frequencies
        let low = dispersion_skeleton(&reference_duct(), 105e3, &[6], 0.1, 1.0, 10).unwrap();
        assert!(low.len() < 10);
        assert!(skeleton_csv(&pts[..1]).starts_with("m,f_hz,t_s\n1,10,"));
    }

    fn synth_setup() -> (Geometry<f64>, SourcePulse<f64>, SynthOptions<f64>) {
        let g = Geometry::new(60.0, 60.0, 20e3).unwrap();
        let p = SourcePulse::new(20.0, 60.0, PulseShape::RaisedCosine).unwrap();
        let o = SynthOptions::new(250.0, 4.0).selection(ModeSelection::Only(vec![1, 2]));
        (g, p, o)
    }

    #[test]
    fn waveform_parseval_and_window() {
        let env = RangeDependentEnv::range_independent(linear_duct_profile(1000.0));
        let (g, p, o) = synth_setup();
        let s = synthesize_waveform(&env, &solver(), &g, &p, &o).unwrap();
        assert_eq!(s.waveform.len(), 1000);
        assert!((s.t_r - 20e3 / 1434.0).abs() < 1e-12);
        assert!((s.waveform.t0() - (s.t_r - 2.0)).abs() < 1e-12);
        let e = s.waveform.energy();
        assert!(((e - s.spectral_energy()) / e).abs() < 1e-9);
        assert_eq!(s.dropped_modes, 0);
    }

    #[test]
    fn aliasing_guard() {
        let env = RangeDependentEnv::range_independent(linear_duct_profile(1000.0));
        let (g, p, o) = synth_setup();
        let o = SynthOptions { sample_rate: 200.0, ..o };
        assert!(matches!(
            synthesize_waveform(&env, &solver(), &g, &p, &o),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn adiabatic_identical_stations_match() {
        let prof = linear_duct_profile(1000.0);
        let single = RangeDependentEnv::range_independent(prof.clone());
        let multi = RangeDependentEnv::new(
            [0.0, 5e3, 12e3, 30e3]
                .iter()
                .map(|&r| Station {
                    range: r,
                    profile: prof.clone(),
                })
                .collect(),
            None,
            1000.0,
            RangeInterpolation::LinearBlend,
        )
        .unwrap();
        let (g, p, o) = synth_setup();
        let a = synthesize_waveform(&single, &solver(), &g, &p, &o).unwrap();
        let b = synthesize_waveform(&multi, &solver(), &g, &p, &o.clone().propagation(Propagation::Adiabatic))
            .unwrap();
        let peak = a.waveform.samples().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (x, y) in a.waveform.samples().iter().zip(b.waveform.samples()) {
            assert!((x - y).abs() <= 1e-10 * peak);
        }
    }
}
