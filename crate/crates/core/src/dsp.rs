//! Signal-processing building blocks shared by synthesis and warping.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::num::Real;

pub(crate) fn fft_forward<T: Real>(buf: &mut [Complex<T>]) {
    if buf.len() > 1 {
        FftPlanner::new().plan_fft_forward(buf.len()).process(buf);
    }
}

pub(crate) fn fft_inverse<T: Real>(buf: &mut [Complex<T>]) {
    if buf.len() > 1 {
        FftPlanner::new().plan_fft_inverse(buf.len()).process(buf);
    }
}

/// Smallest power of two ≥ n (and ≥ 1).
pub(crate) fn next_pow2(n: usize) -> usize {
    n.max(1).next_power_of_two()
}

/// Interpolator over uniformly spaced samples `y[i]` at `x0 + i dx`.
/// Outside the sample span the value is zero.
pub(crate) trait UniformInterp<T> {
    fn eval(&self, x: T) -> T;
}

pub(crate) struct LinearInterp<'a, T> {
    x0: T,
    dx: T,
    y: &'a [T],
}

impl<'a, T: Real> LinearInterp<'a, T> {
    pub(crate) fn new(x0: T, dx: T, y: &'a [T]) -> Self {
        Self { x0, dx, y }
    }
}

impl<T: Real> UniformInterp<T> for LinearInterp<'_, T> {
    fn eval(&self, x: T) -> T {
        let n = self.y.len();
        let s = (x - self.x0) / self.dx;
        if !(s >= T::zero()) || s > T::from_usize_lossy(n - 1) {
            return T::zero();
        }
        let i = s.floor().to_usize().unwrap_or(0).min(n.saturating_sub(2));
        if n == 1 {
            return self.y[0];
        }
        let w = s - T::from_usize_lossy(i);
        self.y[i] + w * (self.y[i + 1] - self.y[i])
    }
}

/// Natural cubic spline through uniformly spaced samples.
pub(crate) struct CubicSpline<'a, T> {
    x0: T,
    dx: T,
    y: &'a [T],
    // second derivatives times dx²
    m: Vec<T>,
}

impl<'a, T: Real> CubicSpline<'a, T> {
    pub(crate) fn new(x0: T, dx: T, y: &'a [T]) -> Self {
        let n = y.len();
        let mut m = vec![T::zero(); n];
        if n > 2 {
            // m[i-1] + 4 m[i] + m[i+1] = 6 (y[i+1] - 2 y[i] + y[i-1]), m[0] = m[n-1] = 0
            let inner = n - 2;
            let mut c = vec![T::zero(); inner];
            let mut d = vec![T::zero(); inner];
            let four = T::lit(4.0);
            for j in 0..inner {
                let i = j + 1;
                let rhs = T::lit(6.0) * (y[i + 1] - T::lit(2.0) * y[i] + y[i - 1]);
                if j == 0 {
                    c[j] = four.recip();
                    d[j] = rhs / four;
                } else {
                    let den = four - c[j - 1];
                    c[j] = den.recip();
                    d[j] = (rhs - d[j - 1]) / den;
                }
            }
            for j in (0..inner).rev() {
                let next = if j + 1 < inner { m[j + 2] } else { T::zero() };
                m[j + 1] = d[j] - c[j] * next;
            }
        }
        Self { x0, dx, y, m }
    }
}

impl<T: Real> UniformInterp<T> for CubicSpline<'_, T> {
    fn eval(&self, x: T) -> T {
        let n = self.y.len();
        let s = (x - self.x0) / self.dx;
        if !(s >= T::zero()) || s > T::from_usize_lossy(n - 1) {
            return T::zero();
        }
        if n < 2 {
            return self.y[0];
        }
        let i = s.floor().to_usize().unwrap_or(0).min(n - 2);
        let b = s - T::from_usize_lossy(i);
        let a = T::one() - b;
        let six = T::lit(6.0);
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) / six
    }
}

/// Modified Bessel function of the first kind, order zero (power series).
pub(crate) fn bessel_i0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..500 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// Kaiser-window parameters for a given stopband attenuation in dB.
fn kaiser_beta(atten_db: f64) -> f64 {
    if atten_db > 50.0 {
        0.1102 * (atten_db - 8.7)
    } else if atten_db >= 21.0 {
        0.5842 * (atten_db - 21.0).powf(0.4) + 0.07886 * (atten_db - 21.0)
    } else {
        0.0
    }
}

/// Odd tap count for a Kaiser design with `transition_hz` at `sample_rate`.
fn kaiser_taps(atten_db: f64, transition_hz: f64, sample_rate: f64) -> usize {
    let dw = 2.0 * std::f64::consts::PI * transition_hz / sample_rate;
    let n = ((atten_db - 7.95) / (2.285 * dw)).ceil() as usize + 1;
    n | 1
}

/// Linear-phase band-pass FIR (Kaiser windowed sinc), stopband ≥ `atten_db`.
/// Cutoffs are the −6 dB points; `f_lo = 0` gives a low-pass.
pub(crate) fn bandpass_taps(f_lo: f64, f_hi: f64, transition_hz: f64, sample_rate: f64, atten_db: f64) -> Vec<f64> {
    let n = kaiser_taps(atten_db, transition_hz, sample_rate);
    let beta = kaiser_beta(atten_db);
    let half = (n / 2) as f64;
    let i0b = bessel_i0(beta);
    let (wl, wh) = (f_lo / sample_rate, f_hi / sample_rate);
    let sinc_lp = |fc: f64, x: f64| {
        if x == 0.0 {
            2.0 * fc
        } else {
            (2.0 * std::f64::consts::PI * fc * x).sin() / (std::f64::consts::PI * x)
        }
    };
    (0..n)
        .map(|i| {
            let x = i as f64 - half;
            let r = x / half;
            let w = bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / i0b;
            w * (sinc_lp(wh, x) - sinc_lp(wl, x))
        })
        .collect()
}

/// Zero-phase filtering: linear convolution with a symmetric odd-length
/// kernel, re-centred so output sample i aligns with input sample i.
pub(crate) fn filter_zero_phase<T: Real>(x: &[T], taps: &[f64]) -> Vec<T> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let len = next_pow2(n + taps.len() - 1);
    let mut a: Vec<Complex<T>> = vec![Complex::new(T::zero(), T::zero()); len];
    let mut b = a.clone();
    for (dst, &v) in a.iter_mut().zip(x) {
        dst.re = v;
    }
    for (dst, &v) in b.iter_mut().zip(taps) {
        dst.re = T::lit(v);
    }
    fft_forward(&mut a);
    fft_forward(&mut b);
    for (p, q) in a.iter_mut().zip(&b) {
        *p = *p * *q;
    }
    fft_inverse(&mut a);
    let scale = T::from_usize_lossy(len).recip();
    let delay = taps.len() / 2;
    (0..n).map(|i| a[i + delay].re * scale).collect()
}

/// Hann window of length n (periodic = false).
pub(crate) fn hann<T: Real>(n: usize) -> Vec<T> {
    if n == 1 {
        return vec![T::one()];
    }
    (0..n)
        .map(|i| {
            let x = T::TAU() * T::from_usize_lossy(i) / T::from_usize_lossy(n - 1);
            T::lit(0.5) * (T::one() - x.cos())
        })
        .collect()
}

/// Normalized correlation ⟨a, b⟩ / (|a| |b|); zero if either is all zeros.
pub(crate) fn normalized_correlation<T: Real>(a: &[T], b: &[T]) -> T {
    let (mut ab, mut aa, mut bb) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in a.iter().zip(b) {
        ab = ab + x * y;
        aa = aa + x * x;
        bb = bb + y * y;
    }
    if aa == T::zero() || bb == T::zero() {
        T::zero()
    } else {
        ab / (aa.sqrt() * bb.sqrt())
    }
}
