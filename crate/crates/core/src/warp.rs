//! Single-receiver processing: spectrograms, the warping operator and its
//! inverse, modal band-pass separation and dispersion-curve extraction.
//!
//! The warping map h(u) = t_r − u^(−2) sends the warped variable u to
//! physical time. A duct mode with phase linear in u = (t_r − t)^(−1/2)
//! becomes a pure tone, so modes separate by ordinary band-pass filtering
//! in the warped domain. Resampling carries the weight |dh/du|^(1/2) so the
//! transform preserves energy.

use std::fmt::Write as _;

use num_complex::Complex;
use rayon::prelude::*;

use crate::dsp::{self, CubicSpline, LinearInterp, UniformInterp};
use crate::env::LinearDuct;
use crate::error::{Error, Result};
use crate::num::Real;
use crate::waveform::Waveform;
use crate::wkb;

/// Magnitude short-time Fourier transform.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram<T = f64> {
    /// Frame centre times, s.
    pub times: Vec<T>,
    /// Bin frequencies k · fs / window_len, Hz.
    pub freqs: Vec<T>,
    /// `mag[i][k]` for frame i and bin k.
    pub mag: Vec<Vec<T>>,
    pub window_len: usize,
    pub hop: usize,
}

impl<T: Real> Spectrogram<T> {
    /// CSV: first row holds the frequencies, first column the times.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_s\\f_hz");
        for f in &self.freqs {
            let _ = write!(out, ",{f}");
        }
        out.push('\n');
        for (t, row) in self.times.iter().zip(&self.mag) {
            let _ = write!(out, "{t}");
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    /// Time between frames, s.
    pub fn time_step(&self) -> T {
        match self.times.as_slice() {
            [a, b, ..] => *b - *a,
            _ => T::zero(),
        }
    }

    /// Copy with every magnitude multiplied by `k`.
    pub fn scaled(&self, k: T) -> Self {
        let mut out = self.clone();
        out.mag.iter_mut().flatten().for_each(|v| *v = *v * k);
        out
    }
}

/// Hann-windowed STFT with frames centred every `hop` samples, starting at
/// the first sample; frames overhanging either end are zero-padded.
pub fn stft<T: Real>(w: &Waveform<T>, window_len: usize, hop: usize) -> Result<Spectrogram<T>> {
    let n = w.len();
    if window_len == 0 || window_len > n {
        return Err(Error::invalid(format!(
            "window of {window_len} samples does not fit a signal of {n} samples"
        )));
    }
    if hop == 0 {
        return Err(Error::invalid("hop must be at least 1 sample"));
    }
    let win: Vec<T> = dsp::hann(window_len);
    let half = window_len / 2;
    let frames = (n - 1) / hop + 1;
    let bins = window_len / 2 + 1;
    let x = w.samples();
    let mag: Vec<Vec<T>> = (0..frames)
        .into_par_iter()
        .map(|j| {
            let centre = j * hop;
            let mut buf = vec![Complex::new(T::zero(), T::zero()); window_len];
            for (i, b) in buf.iter_mut().enumerate() {
                // sample index centre - half + i, if inside the signal
                if let Some(s) = (centre + i).checked_sub(half).filter(|&s| s < n) {
                    b.re = x[s] * win[i];
                }
            }
            dsp::fft_forward(&mut buf);
            buf[..bins].iter().map(|c| c.norm()).collect()
        })
        .collect();
    let fs = w.sample_rate();
    Ok(Spectrogram {
        times: (0..frames).map(|j| w.time(j * hop)).collect(),
        freqs: (0..bins)
            .map(|k| T::from_usize_lossy(k) * fs / T::from_usize_lossy(window_len))
            .collect(),
        mag,
        window_len,
        hop,
    })
}

/// One point of an extracted dispersion curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionPoint<T = f64> {
    pub frequency: T,
    pub time: T,
}

/// Per-frequency ridge: for each frequency bin whose largest magnitude
/// reaches `threshold_fraction` of the global maximum, the time of that
/// largest magnitude (earliest on ties).
pub fn extract_dispersion<T: Real>(sg: &Spectrogram<T>, threshold_fraction: T) -> Vec<DispersionPoint<T>> {
    let global = sg.mag.iter().flatten().fold(T::zero(), |m, &v| m.max(v));
    if !(global > T::zero()) {
        return Vec::new();
    }
    let threshold = threshold_fraction * global;
    let mut out = Vec::new();
    for (k, &f) in sg.freqs.iter().enumerate() {
        let mut best: Option<(usize, T)> = None;
        for (i, row) in sg.mag.iter().enumerate() {
            if best.map_or(true, |(_, b)| row[k] > b) {
                best = Some((i, row[k]));
            }
        }
        if let Some((i, v)) = best {
            if v >= threshold {
                out.push(DispersionPoint {
                    frequency: f,
                    time: sg.times[i],
                });
            }
        }
    }
    out
}

/// CSV `m,f_hz,t_s` for several modes' curves.
pub fn dispersion_csv<T: Real>(curves: &[(usize, Vec<DispersionPoint<T>>)]) -> String {
    let mut out = String::from("m,f_hz,t_s\n");
    for (m, pts) in curves {
        for p in pts {
            let _ = writeln!(out, "{m},{},{}", p.frequency, p.time);
        }
    }
    out
}

/// Interpolation used when resampling between the time axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    Linear,
    /// Natural cubic spline through the samples.
    #[default]
    Cubic,
}

/// Parameters of the warping operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpPlan<T = f64> {
    /// Reference arrival time, the singular point of the map, s.
    pub t_r: T,
    /// Warped-axis sampling relative to the input rate at its densest point.
    pub oversample: T,
    pub interp: Interpolation,
}

/// Largest warped signal the operator will build, in samples.
pub const MAX_WARPED_LEN: usize = 1 << 25;

impl<T: Real> WarpPlan<T> {
    pub fn new(t_r: T, oversample: T, interp: Interpolation) -> Result<Self> {
        if !(t_r > T::zero() && t_r.is_finite()) {
            return Err(Error::out_of_range("t_r", t_r.to_f64_lossy(), "(0, inf)"));
        }
        if !(oversample >= T::one() && oversample.is_finite()) {
            return Err(Error::out_of_range("oversample", oversample.to_f64_lossy(), "[1, inf)"));
        }
        Ok(Self { t_r, oversample, interp })
    }

    pub fn with_t_r(&self, t_r: T) -> Result<Self> {
        Self::new(t_r, self.oversample, self.interp)
    }
}

/// A warped signal together with the physical time grid it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpedSignal<T = f64> {
    /// Samples on a uniform grid of the warped variable u (its `t0` is the
    /// first u and its sample rate 1/du).
    pub warped: Waveform<T>,
    pub source_t0: T,
    pub source_rate: T,
    pub source_len: usize,
}

fn interpolate<T: Real>(kind: Interpolation, x0: T, dx: T, y: &[T], at: impl Iterator<Item = T>) -> Vec<T> {
    match kind {
        Interpolation::Linear => {
            let it = LinearInterp::new(x0, dx, y);
            at.map(|x| it.eval(x)).collect()
        }
        Interpolation::Cubic => {
            let it = CubicSpline::new(x0, dx, y);
            at.map(|x| it.eval(x)).collect()
        }
    }
}

/// y(u) = |dh/du|^(1/2) s(h(u)) with h(u) = t_r − u^(−2), on a uniform u grid
/// covering the image of the input support.
pub fn warp_signal<T: Real>(w: &Waveform<T>, plan: &WarpPlan<T>) -> Result<WarpedSignal<T>> {
    if w.len() < 2 {
        return Err(Error::invalid("warping needs at least 2 samples"));
    }
    let t_r = plan.t_r;
    let (t_first, t_last) = (w.t0(), w.end_time());
    if !(t_last < t_r) {
        return Err(Error::SingularWarp {
            t_r: t_r.to_f64_lossy(),
            t_last: t_last.to_f64_lossy(),
        });
    }
    let u_a = wkb::unwarp_time(t_r, t_first);
    let u_b = wkb::unwarp_time(t_r, t_last);
    // dt = 2 u^-3 du is largest at u_a; sample there at oversample · fs
    let du = u_a.powi(3) / (T::lit(2.0) * plan.oversample * w.sample_rate());
    let count = ((u_b - u_a) / du).floor().to_usize().unwrap_or(usize::MAX).saturating_add(1);
    if count > MAX_WARPED_LEN {
        return Err(Error::invalid(format!(
            "warped signal would need {count} samples; shorten the support or move it away from t_r"
        )));
    }
    let us = (0..count).map(|j| u_a + du * T::from_usize_lossy(j));
    let resampled = interpolate(
        plan.interp,
        t_first,
        w.dt(),
        w.samples(),
        us.clone().map(|u| wkb::warp_time(t_r, u)),
    );
    let samples = us
        .zip(resampled)
        .map(|(u, s)| (T::lit(2.0) / u.powi(3)).sqrt() * s)
        .collect();
    Ok(WarpedSignal {
        warped: Waveform::new(du.recip(), u_a, samples)?,
        source_t0: w.t0(),
        source_rate: w.sample_rate(),
        source_len: w.len(),
    })
}

/// Inverse operator s(t) = |dh/du|^(−1/2) y(h⁻¹(t)) on an explicit time grid.
/// Times whose image falls outside the warped span give zero.
pub fn unwarp_to_grid<T: Real>(
    warped: &Waveform<T>,
    plan: &WarpPlan<T>,
    t0: T,
    sample_rate: T,
    len: usize,
) -> Result<Waveform<T>> {
    let t_r = plan.t_r;
    let t_last = t0 + T::from_usize_lossy(len.saturating_sub(1)) / sample_rate;
    if len > 0 && !(t_last < t_r) {
        return Err(Error::SingularWarp {
            t_r: t_r.to_f64_lossy(),
            t_last: t_last.to_f64_lossy(),
        });
    }
    let us: Vec<T> = (0..len)
        .map(|i| wkb::unwarp_time(t_r, t0 + T::from_usize_lossy(i) / sample_rate))
        .collect();
    let y = interpolate(plan.interp, warped.t0(), warped.dt(), warped.samples(), us.iter().copied());
    let samples = us
        .iter()
        .zip(y)
        .map(|(&u, v)| (u.powi(3) * T::lit(0.5)).sqrt() * v)
        .collect();
    Waveform::new(sample_rate, t0, samples)
}

/// Inverse of [`warp_signal`] back onto the original time grid.
pub fn unwarp_signal<T: Real>(w: &WarpedSignal<T>, plan: &WarpPlan<T>) -> Result<Waveform<T>> {
    unwarp_to_grid(&w.warped, plan, w.source_t0, w.source_rate, w.source_len)
}

/// Power spectrum |∫ y e^{−2πiνu} du|² of a warped signal.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum<T = f64> {
    pub freqs: Vec<T>,
    pub power: Vec<T>,
}

impl<T: Real> PowerSpectrum<T> {
    /// Spectrum of `w`, zero-padded only when the record is too short for
    /// bins of at most `resolution`.
    pub fn of(w: &Waveform<T>, resolution: T) -> Self {
        let fs = w.sample_rate();
        let need = (fs / resolution).ceil().to_usize().unwrap_or(0);
        let n = need.max(w.len());
        let mut buf = vec![Complex::new(T::zero(), T::zero()); n];
        for (b, &v) in buf.iter_mut().zip(w.samples()) {
            b.re = v;
        }
        dsp::fft_forward(&mut buf);
        let dt = w.dt();
        let bins = n / 2 + 1;
        Self {
            freqs: (0..bins)
                .map(|k| T::from_usize_lossy(k) * fs / T::from_usize_lossy(n))
                .collect(),
            power: buf[..bins].iter().map(|c| (*c * dt).norm_sqr()).collect(),
        }
    }

    pub fn bin_width(&self) -> T {
        self.freqs.get(1).copied().unwrap_or(T::zero())
    }

    /// Frequency of the largest bin at or above `f_min`.
    pub fn peak_above(&self, f_min: T) -> Option<T> {
        self.freqs
            .iter()
            .zip(&self.power)
            .filter(|(&f, _)| f >= f_min)
            .fold(None, |best: Option<(T, T)>, (&f, &p)| match best {
                Some((_, bp)) if bp >= p => best,
                _ => Some((f, p)),
            })
            .map(|(f, _)| f)
    }

    /// Share of the total power within [lo, hi].
    pub fn fraction_within(&self, lo: T, hi: T) -> T {
        let total = self.power.iter().fold(T::zero(), |s, &p| s + p);
        if !(total > T::zero()) {
            return T::zero();
        }
        let inside = self
            .freqs
            .iter()
            .zip(&self.power)
            .filter(|(&f, _)| f >= lo && f <= hi)
            .fold(T::zero(), |s, (_, &p)| s + p);
        inside / total
    }

    /// Largest bin.
    pub fn peak_power(&self) -> T {
        self.power.iter().fold(T::zero(), |m, &p| m.max(p))
    }

    /// Largest bin divided by the total power.
    pub fn concentration(&self) -> T {
        let total = self.power.iter().fold(T::zero(), |s, &p| s + p);
        let peak = self.power.iter().fold(T::zero(), |m, &p| m.max(p));
        if total > T::zero() {
            peak / total
        } else {
            T::zero()
        }
    }
}

/// Warped-domain pass band of one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeBand<T = f64> {
    pub mode: usize,
    pub center: T,
    pub halfwidth: T,
}

/// Default half-width as a fraction of the spacing between mode bands.
pub const DEFAULT_HALFWIDTH_FRACTION: f64 = 0.4;

impl<T: Real> ModeBand<T> {
    pub fn new(mode: usize, center: T, halfwidth: T) -> Result<Self> {
        if !(halfwidth > T::zero() && center > halfwidth) {
            return Err(Error::invalid(format!(
                "band for mode {mode} needs center > halfwidth > 0, got {center} and {halfwidth}"
            )));
        }
        Ok(Self { mode, center, halfwidth })
    }

    pub fn lo(&self) -> T {
        self.center - self.halfwidth
    }

    pub fn hi(&self) -> T {
        self.center + self.halfwidth
    }
}

/// Bands centred on the warped mode frequencies of `duct` at range `r`, with
/// half-width 40 % of the band spacing.
pub fn default_bands<T: Real>(duct: &LinearDuct<T>, r: T, modes: &[usize]) -> Result<Vec<ModeBand<T>>> {
    let spacing = wkb::warped_mode_frequency(duct, 2, r) - wkb::warped_mode_frequency(duct, 1, r);
    let hw = T::lit(DEFAULT_HALFWIDTH_FRACTION) * spacing;
    modes
        .iter()
        .map(|&m| ModeBand::new(m, wkb::warped_mode_frequency(duct, m, r), hw))
        .collect()
}

fn check_bands<T: Real>(bands: &[ModeBand<T>]) -> Result<Vec<ModeBand<T>>> {
    let mut sorted = bands.to_vec();
    sorted.sort_by(|a, b| a.center.partial_cmp(&b.center).unwrap());
    for w in sorted.windows(2) {
        if w[1].lo() <= w[0].hi() {
            return Err(Error::OverlappingBands {
                first: w[0].mode,
                second: w[1].mode,
            });
        }
    }
    Ok(sorted)
}

/// Transition width of the band filters: half the narrowest gap between
/// bands, or half the half-width for a lone band.
fn transition_width<T: Real>(sorted: &[ModeBand<T>]) -> T {
    let mut gap = sorted.iter().fold(T::infinity(), |g, b| g.min(b.halfwidth));
    for w in sorted.windows(2) {
        gap = gap.min(w[1].lo() - w[0].hi());
    }
    T::lit(0.5) * gap
}

/// Stopband attenuation of the band filters, dB.
pub const BAND_STOPBAND_DB: f64 = 60.0;

/// Zero-phase band-pass of a warped signal: flat over the band, at least
/// 60 dB down `transition` beyond each edge.
pub fn bandpass<T: Real>(w: &Waveform<T>, band: &ModeBand<T>, transition: T) -> Result<Waveform<T>> {
    let fs = w.sample_rate().to_f64_lossy();
    let tr = transition.to_f64_lossy();
    let lo = (band.lo().to_f64_lossy() - 0.5 * tr).max(0.0);
    let hi = band.hi().to_f64_lossy() + 0.5 * tr;
    if hi >= 0.5 * fs {
        return Err(Error::invalid(format!(
            "band for mode {} reaches the warped Nyquist frequency {} Hz",
            band.mode,
            0.5 * fs
        )));
    }
    let taps = dsp::bandpass_taps(lo, hi, tr, fs, BAND_STOPBAND_DB);
    Waveform::new(w.sample_rate(), w.t0(), dsp::filter_zero_phase(w.samples(), &taps))
}

/// STFT and ridge settings used by [`separate_modes`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationOptions<T = f64> {
    pub stft_window: usize,
    pub stft_hop: usize,
    pub ridge_threshold: T,
    /// A band is reported absent when its energy is below this fraction of
    /// the strongest band's energy.
    pub absence_fraction: T,
}

impl<T: Real> Default for SeparationOptions<T> {
    fn default() -> Self {
        Self {
            stft_window: 128,
            stft_hop: 8,
            ridge_threshold: T::lit(0.1),
            absence_fraction: T::lit(0.01),
        }
    }
}

/// One mode recovered by [`separate_modes`].
#[derive(Debug, Clone, PartialEq)]
pub struct SeparatedMode<T = f64> {
    pub mode: usize,
    /// Time series on the input grid; `None` when the band holds no energy.
    pub waveform: Option<Waveform<T>>,
    pub dispersion: Vec<DispersionPoint<T>>,
    /// Band energy relative to the strongest band.
    pub relative_energy: T,
}

impl<T: Real> SeparatedMode<T> {
    pub fn is_present(&self) -> bool {
        self.waveform.is_some()
    }
}

/// Warp → per-band zero-phase band-pass → unwarp → STFT → ridge.
pub fn separate_modes<T: Real>(
    w: &Waveform<T>,
    plan: &WarpPlan<T>,
    bands: &[ModeBand<T>],
    opts: &SeparationOptions<T>,
) -> Result<Vec<SeparatedMode<T>>> {
    let sorted = check_bands(bands)?;
    let transition = transition_width(&sorted);
    let warped = warp_signal(w, plan)?;
    let filtered = bands
        .par_iter()
        .map(|b| bandpass(&warped.warped, b, transition))
        .collect::<Result<Vec<_>>>()?;
    let energies: Vec<T> = filtered.iter().map(|f| f.energy()).collect();
    let strongest = energies.iter().fold(T::zero(), |m, &e| m.max(e));
    bands
        .par_iter()
        .zip(filtered)
        .zip(energies)
        .map(|((band, f), e)| {
            let relative = if strongest > T::zero() { e / strongest } else { T::zero() };
            if !(strongest > T::zero()) || relative < opts.absence_fraction {
                return Ok(SeparatedMode {
                    mode: band.mode,
                    waveform: None,
                    dispersion: Vec::new(),
                    relative_energy: relative,
                });
            }
            let part = WarpedSignal {
                warped: f,
                ..warped.clone()
            };
            let back = unwarp_signal(&part, plan)?;
            let sg = stft(&back, opts.stft_window, opts.stft_hop)?;
            Ok(SeparatedMode {
                mode: band.mode,
                dispersion: extract_dispersion(&sg, opts.ridge_threshold),
                waveform: Some(back),
                relative_energy: relative,
            })
        })
        .collect()
}

/// Reference arrival time r / c0.
pub fn estimate_tr<T: Real>(r: T, c0: T) -> Result<T> {
    if !(r > T::zero() && r.is_finite()) {
        return Err(Error::out_of_range("range", r.to_f64_lossy(), "(0, inf)"));
    }
    if !(c0 > T::zero() && c0.is_finite()) {
        return Err(Error::out_of_range("c0", c0.to_f64_lossy(), "(0, inf)"));
    }
    Ok(r / c0)
}

/// Settings of the t_r refinement scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrScan<T = f64> {
    /// Half-width of the scan as a fraction of the nominal t_r.
    pub span: T,
    pub points: usize,
    /// Each candidate warps the signal over [t_c − lookback, t_c − guard].
    pub lookback: T,
    pub guard: T,
    pub oversample: T,
    /// Frequency resolution of the warped power spectrum.
    pub resolution: T,
}

impl<T: Real> Default for TrScan<T> {
    fn default() -> Self {
        Self {
            span: T::lit(0.01),
            points: 201,
            lookback: T::lit(2.0),
            guard: T::lit(0.03),
            oversample: T::one(),
            resolution: T::lit(0.25),
        }
    }
}

/// Outcome of [`refine_tr`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrEstimate<T = f64> {
    pub t_r: T,
    /// True when the scan had no interior maximum and `t_r` is the nominal value.
    pub fallback: bool,
    /// (candidate t_r, warped spectral peak) for every scan point.
    pub scan: Vec<(T, T)>,
}

/// Refines t_r = r/c0 by maximizing the largest bin of the warped power
/// spectrum across a scan of candidates.
pub fn refine_tr<T: Real>(w: &Waveform<T>, r: T, c0: T, scan: &TrScan<T>) -> Result<TrEstimate<T>> {
    let nominal = estimate_tr(r, c0)?;
    if scan.points < 3 {
        return Err(Error::invalid("the t_r scan needs at least 3 points"));
    }
    let step = T::lit(2.0) * scan.span * nominal / T::from_usize_lossy(scan.points - 1);
    let candidates: Vec<T> = (0..scan.points)
        .map(|i| nominal * (T::one() - scan.span) + step * T::from_usize_lossy(i))
        .collect();
    let plan = WarpPlan::new(nominal, scan.oversample, Interpolation::Cubic)?;
    let values = candidates
        .par_iter()
        .map(|&tc| {
            let crop = w.crop(tc - scan.lookback, tc - scan.guard);
            if crop.len() < 2 || crop.energy() == T::zero() {
                return Ok(T::zero());
            }
            let warped = warp_signal(&crop, &plan.with_t_r(tc)?)?;
            Ok(PowerSpectrum::of(&warped.warped, scan.resolution).peak_power())
        })
        .collect::<Result<Vec<T>>>()?;
    let best = values
        .iter()
        .enumerate()
        .fold(0, |b, (i, &v)| if v > values[b] { i } else { b });
    let interior = best > 0 && best + 1 < values.len();
    Ok(TrEstimate {
        t_r: if interior { candidates[best] } else { nominal },
        fallback: !interior,
        scan: candidates.into_iter().zip(values).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    type Wf = Waveform<f64>;

    fn tone(f: f64, fs: f64, n: usize) -> Wf {
        Waveform::new(fs, 0.0, (0..n).map(|i| (2.0 * PI * f * i as f64 / fs).sin()).collect()).unwrap()
    }

    #[test]
    fn stft_tone_ridge() {
        let w = tone(25.0, 200.0, 800);
        let sg = stft(&w, 64, 16).unwrap();
        assert_eq!(sg.freqs.len(), 33);
        assert_eq!(sg.times.len(), 50);
        let bin = (25.0f64 / (200.0 / 64.0)).round() as usize;
        for row in &sg.mag[2..48] {
            let k = row.iter().enumerate().fold(0, |b, (i, &v)| if v > row[b] { i } else { b });
            assert_eq!(k, bin);
        }
        assert!(stft(&w, 801, 1).is_err());
        assert!(stft(&w, 64, 0).is_err());
    }

    #[test]
    fn stft_impulse_is_local() {
        let mut s = vec![0.0; 400];
        s[200] = 1.0;
        let w = Waveform::new(100.0, 0.0, s).unwrap();
        let sg = stft(&w, 32, 4).unwrap();
        for (t, row) in sg.times.iter().zip(&sg.mag) {
            let e: f64 = row.iter().sum();
            if (t - 2.0).abs() >= 0.16 {
                assert_eq!(e, 0.0, "t={t}");
            }
        }
    }

    #[test]
    fn ridge_rules() {
        let sg = Spectrogram {
            times: vec![0.0, 1.0, 2.0],
            freqs: vec![10.0, 20.0, 30.0],
            mag: vec![vec![0.0, 5.0, 0.01], vec![1.0, 5.0, 0.0], vec![2.0, 1.0, 0.0]],
            window_len: 4,
            hop: 1,
        };
        let pts = extract_dispersion(&sg, 0.1);
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0], DispersionPoint { frequency: 10.0, time: 2.0 });
        // tie resolved toward the earlier frame
        assert_eq!(pts[1], DispersionPoint { frequency: 20.0, time: 0.0 });
        assert_eq!(extract_dispersion(&sg.scaled(7.5), 0.1), pts);
        assert!(extract_dispersion(&sg.scaled(0.0), 0.1).is_empty());
        assert!(dispersion_csv(&[(1, pts)]).starts_with("m,f_hz,t_s\n1,10,2\n"));
    }

    #[test]
    fn plan_validation() {
        assert!(WarpPlan::new(0.0, 4.0, Interpolation::Cubic).is_err());
        assert!(WarpPlan::new(f64::INFINITY, 4.0, Interpolation::Cubic).is_err());
        assert!(WarpPlan::new(10.0, 0.5, Interpolation::Cubic).is_err());
    }

    #[test]
    fn singular_support_is_rejected() {
        let w = Waveform::new(10.0, 9.0, vec![1.0; 11]).unwrap();
        let plan = WarpPlan::new(10.0, 2.0, Interpolation::Linear).unwrap();
        assert!(matches!(warp_signal(&w, &plan), Err(Error::SingularWarp { .. })));
    }

    fn bandlimited(t_r: f64, fs: f64) -> Wf {
        // sum of windowed tones supported on [0.5 t_r, 0.99 t_r]
        let (a, b) = (0.5 * t_r, 0.99 * t_r);
        let n = ((b - a) * fs) as usize;
        let s = (0..n)
            .map(|i| {
                let t = i as f64 / fs;
                let win = (PI * t / (b - a)).sin().powi(2);
                win * ((2.0 * PI * 3.0 * t).sin() + 0.5 * (2.0 * PI * 11.3 * t + 0.4).cos())
            })
            .collect();
        Waveform::new(fs, a, s).unwrap()
    }

    #[test]
    fn round_trip_preserves_signal_and_energy() {
        let t_r = 20.0;
        let w = bandlimited(t_r, 100.0);
        for interp in [Interpolation::Cubic, Interpolation::Linear] {
            let plan = WarpPlan::new(t_r, 4.0, interp).unwrap();
            let warped = warp_signal(&w, &plan).unwrap();
            let e_w = warped.warped.energy() * warped.warped.dt();
            let e = w.energy() * w.dt();
            let tol = if interp == Interpolation::Cubic { 1e-3 } else { 5e-2 };
            assert!(((e_w - e) / e).abs() < tol, "{interp:?} {e_w} vs {e}");
            let back = unwarp_signal(&warped, &plan).unwrap();
            assert_eq!(back.len(), w.len());
            let c = back.correlation(&w).unwrap();
            assert!(c > 0.99, "{interp:?} {c}");
        }
    }

    #[test]
    fn zero_signal_stays_zero() {
        let w = Waveform::new(50.0, 1.0, vec![0.0; 100]).unwrap();
        let plan = WarpPlan::new(5.0, 2.0, Interpolation::Cubic).unwrap();
        let back = unwarp_signal(&warp_signal(&w, &plan).unwrap(), &plan).unwrap();
        assert!(back.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn warped_chirp_becomes_tone() {
        // s(t) = cos(2π ν (t_r − t)^(−1/2)) is exactly a tone of ν in u
        let (t_r, nu, fs) = (30.0, 6.0, 200.0);
        let (a, b) = (t_r - 2.0, t_r - 0.2);
        let n = ((b - a) * fs) as usize;
        let s = (0..n)
            .map(|i| {
                let t = a + i as f64 / fs;
                let u = (t_r - t).powf(-0.5);
                (2.0 * PI * nu * u).cos() * u.powf(1.5)
            })
            .collect();
        let w = Waveform::new(fs, a, s).unwrap();
        let plan = WarpPlan::new(t_r, 2.0, Interpolation::Cubic).unwrap();
        let warped = warp_signal(&w, &plan).unwrap();
        let ps = PowerSpectrum::of(&warped.warped, 0.05);
        assert!(ps.bin_width() <= 0.05);
        let peak = ps.peak_above(0.5).unwrap();
        assert!((peak - nu).abs() <= ps.bin_width(), "{peak}");
        assert!(ps.fraction_within(nu - 1.0, nu + 1.0) > 0.8);
    }

    #[test]
    fn band_checks() {
        assert!(ModeBand::new(1, 2.0, 3.0).is_err());
        let a = ModeBand::<f64>::new(1, 6.0, 3.2).unwrap();
        let b = ModeBand::new(2, 14.0, 3.2).unwrap();
        let c = ModeBand::new(3, 12.0, 3.2).unwrap();
        assert!(check_bands(&[a, b]).is_ok());
        assert!(matches!(
            check_bands(&[a, b, c]),
            Err(Error::OverlappingBands { first: 1, second: 3 })
        ));
        assert!((transition_width(&[a, b]) - 0.8).abs() < 1e-12);
        assert!((transition_width(&[a]) - 1.6).abs() < 1e-12);
    }

    #[test]
    fn default_bands_follow_warped_frequencies() {
        let bands = default_bands(&crate::reference::reference_duct(), 105e3, &[1, 2, 3]).unwrap();
        assert!((bands[0].center - 6.0).abs() < 0.05);
        assert!((bands[2].center - 22.0).abs() < 0.1);
        assert!((bands[0].halfwidth - 3.2).abs() < 0.02);
    }

    #[test]
    fn bandpass_separates_tones() {
        let fs = 200.0;
        let n = 4000;
        let w = Waveform::new(
            fs,
            0.0,
            (0..n)
                .map(|i| {
                    let t = i as f64 / fs;
                    (2.0 * PI * 6.0 * t).sin() + (2.0 * PI * 14.0 * t).sin()
                })
                .collect(),
        )
        .unwrap();
        let band = ModeBand::new(1, 6.0, 3.2).unwrap();
        let out = bandpass(&w, &band, 0.8).unwrap();
        let want = tone(6.0, fs, n);
        let mid = 1000..3000;
        let err = out.samples()[mid.clone()]
            .iter()
            .zip(&want.samples()[mid])
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 5e-3, "{err}");
        let nyq = ModeBand::new(1, 99.0, 3.0).unwrap();
        assert!(bandpass(&w, &nyq, 0.8).is_err());
    }

    #[test]
    fn estimate_tr_arithmetic() {
        assert!((estimate_tr(105e3f64, 1434.0).unwrap() - 73.2218).abs() < 1e-4);
        assert!(estimate_tr(0.0, 1434.0).is_err());
        assert!(estimate_tr(1.0, -1.0).is_err());
    }
}
