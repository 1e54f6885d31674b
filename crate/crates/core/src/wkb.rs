//! Closed-form model of the linear surface duct.
//!
//! For c(z) = c0(1 + a z) the WKB quantization with an ideal pressure-release
//! surface and a refracting turning point gives
//!
//! ```text
//! b_m   = [3 a π (m - 1/4) c0]^(2/3)
//! k_m   = (ω/c0) sqrt(1 - b_m ω^(-2/3))            (exact form)
//! k_m  ≈ ω/c0 - (b_m / 2 c0) ω^(1/3)               (linearized form)
//! ```
//!
//! The linearized form has the phase k_m r = ω t_r − ½ t_r b_m ω^(1/3) with
//! t_r = r/c0, which gives the stationary-phase group delay, the
//! instantaneous phase as a function of time, the warping map
//! h(u) = t_r − u^(−2) and the tone frequency each mode takes after warping.
//!
//! [`solve_wkb_wavenumber`] solves the quantization condition numerically
//! on an arbitrary profile and is the independent check on the closed forms.

use crate::env::{LinearDuct, SoundSpeedProfile};
use crate::error::{Error, Result};
use crate::num::Real;

/// Phase shifts at the surface reflection and at the lower turning point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizationCondition<T = f64> {
    pub surface_phase_shift: T,
    pub turning_phase_shift: T,
}

impl<T: Real> Default for QuantizationCondition<T> {
    /// Ideal pressure-release surface (−π) and caustic turning point (−π/2).
    fn default() -> Self {
        Self {
            surface_phase_shift: -T::PI(),
            turning_phase_shift: -T::FRAC_PI_2(),
        }
    }
}

impl<T: Real> QuantizationCondition<T> {
    pub fn new(surface_phase_shift: T, turning_phase_shift: T) -> Result<Self> {
        let ok = |p: T| p <= T::zero() && p > -T::TAU();
        if !ok(surface_phase_shift) {
            return Err(Error::out_of_range(
                "surface phase shift",
                surface_phase_shift.to_f64_lossy(),
                "(-2pi, 0]",
            ));
        }
        if !ok(turning_phase_shift) {
            return Err(Error::out_of_range(
                "turning phase shift",
                turning_phase_shift.to_f64_lossy(),
                "(-2pi, 0]",
            ));
        }
        Ok(Self {
            surface_phase_shift,
            turning_phase_shift,
        })
    }

    /// Required value of the one-way vertical phase integral for mode `m`.
    pub fn target_phase(&self, m: usize) -> T {
        let two_pi_m = T::TAU() * T::from_usize_lossy(m - 1);
        (two_pi_m - self.surface_phase_shift - self.turning_phase_shift) * T::lit(0.5)
    }
}

/// Dispersion coefficient b_m, (rad/s)^(2/3).
///
/// # Panics
/// If `m` is 0 (modes are numbered from 1).
pub fn b1<T: Real>(duct: &LinearDuct<T>, m: usize) -> T {
    assert!(m >= 1, "mode numbers start at 1");
    let mq = T::from_usize_lossy(m) - T::lit(0.25);
    (T::lit(3.0) * duct.gradient * T::PI() * mq * duct.c0).powf(T::lit(2.0 / 3.0))
}

fn radicand<T: Real>(duct: &LinearDuct<T>, m: usize, omega: T) -> T {
    T::one() - b1(duct, m) * omega.powf(T::lit(-2.0 / 3.0))
}

fn check_trapped<T: Real>(duct: &LinearDuct<T>, m: usize, omega: T) -> Result<()> {
    if omega > T::zero() && radicand(duct, m, omega) > T::zero() {
        Ok(())
    } else {
        Err(Error::Cutoff {
            mode: m,
            omega: omega.to_f64_lossy(),
        })
    }
}

/// Lowest angular frequency at which mode `m` is trapped (radicand = 0).
pub fn cutoff_omega<T: Real>(duct: &LinearDuct<T>, m: usize) -> T {
    b1(duct, m).powf(T::lit(1.5))
}

/// Horizontal wavenumber from the square-root form, rad/m.
pub fn k_exact_form<T: Real>(duct: &LinearDuct<T>, m: usize, omega: T) -> Result<T> {
    check_trapped(duct, m, omega)?;
    Ok(omega / duct.c0 * radicand(duct, m, omega).sqrt())
}

/// Horizontal wavenumber from the linearized form, rad/m. Defined for all ω > 0.
pub fn k_linearized<T: Real>(duct: &LinearDuct<T>, m: usize, omega: T) -> T {
    omega / duct.c0 - b1(duct, m) / (T::lit(2.0) * duct.c0) * omega.cbrt()
}

/// Turning depth ε where k0²(1 − 2aε) = k_m², m.
pub fn turning_depth<T: Real>(duct: &LinearDuct<T>, m: usize, omega: T) -> Result<T> {
    check_trapped(duct, m, omega)?;
    Ok(b1(duct, m) * omega.powf(T::lit(-2.0 / 3.0)) / (T::lit(2.0) * duct.gradient))
}

/// True when mode `m` is trapped and turns within the duct depth, i.e. the
/// regime where the closed forms are meant to hold.
pub fn is_within_duct<T: Real>(duct: &LinearDuct<T>, m: usize, omega: T) -> bool {
    turning_depth(duct, m, omega).map_or(false, |eps| eps <= duct.depth)
}

/// Geometric reference arrival time t_r = r / c0, s.
pub fn reference_arrival<T: Real>(duct: &LinearDuct<T>, r: T) -> T {
    r / duct.c0
}

fn check_range<T: Real>(r: T) -> Result<()> {
    if r > T::zero() && r.is_finite() {
        Ok(())
    } else {
        Err(Error::out_of_range("range", r.to_f64_lossy(), "(0, inf)"))
    }
}

/// Arrival time of frequency ω in mode `m` at range `r`:
/// t = t_r − (t_r b_m / 6) ω^(−2/3).
pub fn modal_group_delay<T: Real>(duct: &LinearDuct<T>, m: usize, omega: T, r: T) -> Result<T> {
    check_range(r)?;
    check_trapped(duct, m, omega)?;
    let tr = reference_arrival(duct, r);
    Ok(tr - tr * b1(duct, m) / T::lit(6.0) * omega.powf(T::lit(-2.0 / 3.0)))
}

fn check_before_tr<T: Real>(t: T, tr: T) -> Result<()> {
    if t < tr {
        Ok(())
    } else {
        Err(Error::out_of_range("t", t.to_f64_lossy(), format!("(-inf, t_r = {tr})")))
    }
}

/// Stationary-phase angular frequency at time t < t_r:
/// ω_ms = (6 (t_r − t) / (t_r b_m))^(−3/2).
pub fn stationary_frequency<T: Real>(duct: &LinearDuct<T>, m: usize, r: T, t: T) -> Result<T> {
    check_range(r)?;
    let tr = reference_arrival(duct, r);
    check_before_tr(t, tr)?;
    Ok((T::lit(6.0) * (tr - t) / (tr * b1(duct, m))).powf(T::lit(-1.5)))
}

/// Modal phase φ_m(ω, t) = ω (t − t_r) + ½ t_r b_m ω^(1/3).
pub fn phase_function<T: Real>(duct: &LinearDuct<T>, m: usize, r: T, omega: T, t: T) -> T {
    let tr = reference_arrival(duct, r);
    omega * (t - tr) + T::lit(0.5) * tr * b1(duct, m) * omega.cbrt()
}

/// Instantaneous modal phase at the stationary point, closed form:
/// φ = (t_r − t)^(−1/2) (t_r b_m)^(3/2) 2^(−1/2) 3^(−3/2).
pub fn stationary_phase_value<T: Real>(duct: &LinearDuct<T>, m: usize, r: T, t: T) -> Result<T> {
    check_range(r)?;
    let tr = reference_arrival(duct, r);
    check_before_tr(t, tr)?;
    Ok((tr - t).powf(T::lit(-0.5)) * (tr * b1(duct, m)).powf(T::lit(1.5)) * phase_constant())
}

fn phase_constant<T: Real>() -> T {
    // 2^(-1/2) 3^(-3/2)
    T::lit(2.0).powf(T::lit(-0.5)) * T::lit(3.0).powf(T::lit(-1.5))
}

/// Tone frequency of mode `m` after warping:
/// f_m = r^(3/2) c0^(−1/2) 2^(−3/2) 3^(−1/2) a (m − 1/4).
pub fn warped_mode_frequency<T: Real>(duct: &LinearDuct<T>, m: usize, r: T) -> T {
    let mq = T::from_usize_lossy(m) - T::lit(0.25);
    r.powf(T::lit(1.5))
        * duct.c0.powf(T::lit(-0.5))
        * T::lit(2.0).powf(T::lit(-1.5))
        * T::lit(3.0).powf(T::lit(-0.5))
        * duct.gradient
        * mq
}

/// Same frequency from the phase slope in the warped variable:
/// (t_r b_m)^(3/2) 2^(−1/2) 3^(−3/2) / 2π.
pub fn warped_mode_frequency_from_phase<T: Real>(duct: &LinearDuct<T>, m: usize, r: T) -> T {
    let tr = reference_arrival(duct, r);
    (tr * b1(duct, m)).powf(T::lit(1.5)) * phase_constant::<T>() / T::TAU()
}

/// Warping map h(u) = t_r − u^(−2): warped variable to physical time.
pub fn warp_time<T: Real>(t_r: T, u: T) -> T {
    t_r - (u * u).recip()
}

/// Inverse map h⁻¹(t) = (t_r − t)^(−1/2): physical time to warped variable.
pub fn unwarp_time<T: Real>(t_r: T, t: T) -> T {
    (t_r - t).sqrt().recip()
}

/// Per-duct cache of the dispersion coefficients for modes 1..=n.
#[derive(Debug, Clone, PartialEq)]
pub struct DuctDispersion<T = f64> {
    pub duct: LinearDuct<T>,
    b1: Vec<T>,
}

impl<T: Real> DuctDispersion<T> {
    pub fn new(duct: LinearDuct<T>, modes: usize) -> Self {
        let b1 = (1..=modes).map(|m| b1(&duct, m)).collect();
        Self { duct, b1 }
    }

    pub fn modes(&self) -> usize {
        self.b1.len()
    }

    /// b_m for 1-based `m`.
    pub fn b1(&self, m: usize) -> Option<T> {
        m.checked_sub(1).and_then(|i| self.b1.get(i)).copied()
    }

    pub fn coefficients(&self) -> &[T] {
        &self.b1
    }

    /// Tone spacing f_{m+1} − f_m after warping at range `r` (constant in m).
    pub fn warped_spacing(&self, r: T) -> T {
        warped_mode_frequency(&self.duct, 2, r) - warped_mode_frequency(&self.duct, 1, r)
    }
}

/// Solves the WKB quantization condition for mode `m` on `profile`.
///
/// The vertical phase integral ∫₀^z_t sqrt((ω/c)² − k²) dz runs from the
/// surface to the first depth where c(z) = ω/k and is evaluated by
/// adaptive quadrature; `k` is found by bisection.
pub fn solve_wkb_wavenumber<T: Real>(
    profile: &SoundSpeedProfile<T>,
    m: usize,
    omega: T,
    qc: &QuantizationCondition<T>,
) -> Result<T> {
    assert!(m >= 1, "mode numbers start at 1");
    if !(omega > T::zero()) {
        return Err(Error::out_of_range("omega", omega.to_f64_lossy(), "(0, inf)"));
    }
    let target = qc.target_phase(m);
    let integral = PhaseIntegral::new(profile, omega);

    let c_surface = profile.speed_at(T::zero());
    let k_hi = omega / c_surface;
    let grows = profile.speeds().iter().any(|&c| c > c_surface) || integral.tail_gradient > T::zero();
    if !grows {
        return Err(Error::NotTrapped { mode: m });
    }

    // walk the lower bracket down until the integral exceeds the target
    let mut k_lo = omega / profile.max_speed_to(profile.deepest());
    let mut phase_lo = integral.eval(k_lo);
    let mut steps = 0;
    while !matches!(phase_lo, Some(p) if p >= target) {
        if phase_lo.is_none() || steps > 200 {
            return Err(Error::TurningBeyondProfile {
                mode: m,
                depth: profile.deepest().to_f64_lossy(),
            });
        }
        k_lo = k_lo * T::lit(0.98);
        phase_lo = integral.eval(k_lo);
        steps += 1;
    }

    let tol = T::lit(1e-10).max(T::epsilon() * k_hi * T::lit(4.0));
    let (mut lo, mut hi) = (k_lo, k_hi);
    while hi - lo > tol {
        let mid = T::lit(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match integral.eval(mid) {
            Some(p) if p >= target => lo = mid,
            _ => hi = mid,
        }
    }
    Ok(T::lit(0.5) * (lo + hi))
}

/// Piecewise-linear view of a profile for the phase integral.
struct PhaseIntegral<T> {
    omega: T,
    // nodes from the surface down to the deepest sample
    z: Vec<T>,
    c: Vec<T>,
    tail_gradient: T,
}

impl<T: Real> PhaseIntegral<T> {
    fn new(profile: &SoundSpeedProfile<T>, omega: T) -> Self {
        let mut z = vec![T::zero()];
        let mut c = vec![profile.speed_at(T::zero())];
        for (zi, ci) in profile.samples().filter(|&(zi, _)| zi > T::zero()) {
            z.push(zi);
            c.push(ci);
        }
        let n = profile.len();
        let (zd, cd) = (profile.depths(), profile.speeds());
        let tail_gradient = (cd[n - 1] - cd[n - 2]) / (zd[n - 1] - zd[n - 2]);
        Self {
            omega,
            z,
            c,
            tail_gradient,
        }
    }

    /// One-way phase integral at wavenumber `k`, or `None` without a turning point.
    fn eval(&self, k: T) -> Option<T> {
        let ck = self.omega / k;
        if self.c[0] >= ck {
            return Some(T::zero());
        }
        let rel = T::lit(1e-10);
        let mut total = T::zero();
        for i in 0..self.z.len() {
            let (za, ca) = (self.z[i], self.c[i]);
            let (zb, cb, last) = match (self.z.get(i + 1), self.c.get(i + 1)) {
                (Some(&zb), Some(&cb)) => (zb, cb, false),
                _ => {
                    if self.tail_gradient <= T::zero() {
                        return None;
                    }
                    let zt = za + (ck - ca) / self.tail_gradient;
                    (zt, ck, true)
                }
            };
            let g = (cb - ca) / (zb - za);
            let speed = move |zz: T| ca + g * (zz - za);
            if cb >= ck || last {
                // turning point inside [za, zb]; substitute z = zt − (zt − za) s²
                let zt = if last { zb } else { za + (ck - ca) / g };
                let span = zt - za;
                let f = |s: T| {
                    let zz = zt - span * s * s;
                    kz(self.omega, speed(zz), k) * T::lit(2.0) * span * s
                };
                return Some(total + adaptive_simpson(&f, T::zero(), T::one(), rel));
            }
            let f = |zz: T| kz(self.omega, speed(zz), k);
            total = total + adaptive_simpson(&f, za, zb, rel);
        }
        None
    }
}

#[inline]
fn kz<T: Real>(omega: T, c: T, k: T) -> T {
    let q = omega / c;
    (q * q - k * k).max(T::zero()).sqrt()
}

/// Adaptive Simpson quadrature with Richardson correction.
fn adaptive_simpson<T: Real>(f: &impl Fn(T) -> T, a: T, b: T, rel_tol: T) -> T {
    let m = T::lit(0.5) * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb);
    let scale = whole.abs().max(T::min_positive_value());
    simpson_step(f, a, b, fa, fm, fb, whole, rel_tol * scale, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<T: Real>(
    f: &impl Fn(T) -> T,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: u32,
) -> T {
    let m = T::lit(0.5) * (a + b);
    let (lm, rm) = (T::lit(0.5) * (a + m), T::lit(0.5) * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / T::lit(6.0) * (fa + T::lit(4.0) * flm + fm);
    let right = (b - m) / T::lit(6.0) * (fm + T::lit(4.0) * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= T::lit(15.0) * tol {
        return left + right + delta / T::lit(15.0);
    }
    let half = T::lit(0.5) * tol;
    simpson_step(f, a, m, fa, flm, fm, left, half, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, half, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn duct() -> LinearDuct {
        LinearDuct::new(1434.0, 4.359e-5, 400.0).unwrap()
    }

    fn w(f: f64) -> f64 {
        2.0 * PI * f
    }

    #[test]
    fn b1_values() {
        // direct evaluation: [3·4.359e-5·π·0.75·1434]^(2/3) = 0.57999...
        assert!((b1(&duct(), 1) - 0.580).abs() < 5e-4);
        assert!((b1(&duct(), 2) - 1.021).abs() < 5e-4);
        let flat = LinearDuct::new(1434.0, 1e-300, 400.0).unwrap();
        assert!(b1(&flat, 1) < 1e-150);
    }

    #[test]
    #[should_panic]
    fn mode_zero_panics() {
        b1(&duct(), 0);
    }

    #[test]
    fn exact_and_linearized_at_50hz() {
        let ke = k_exact_form(&duct(), 1, w(50.0)).unwrap();
        let kl = k_linearized(&duct(), 1, w(50.0));
        // quoted to four significant digits: 0.21771 and 0.21772
        assert!((ke - 0.21771).abs() < 2e-5, "{ke}");
        assert!((kl - 0.21772).abs() < 2e-5, "{kl}");
        assert!(((kl - ke) / ke).abs() < 1e-4);
    }

    #[test]
    fn linearization_gap_grows_with_mode() {
        let gaps: Vec<f64> = (1..=8)
            .map(|m| (k_linearized(&duct(), m, w(100.0)) - k_exact_form(&duct(), m, w(100.0)).unwrap()).abs())
            .collect();
        assert!(gaps.windows(2).all(|g| g[1] > g[0]), "{gaps:?}");
    }

    #[test]
    fn plane_wave_limit() {
        let flat = LinearDuct::new(1434.0, 1e-300, 400.0).unwrap();
        let om = w(50.0);
        assert!((k_exact_form(&flat, 1, om).unwrap() - om / 1434.0).abs() < 1e-15);
        assert!((k_linearized(&flat, 1, om) - om / 1434.0).abs() < 1e-15);
    }

    #[test]
    fn cutoff_is_reported() {
        let om = cutoff_omega(&duct(), 1);
        assert!(matches!(k_exact_form(&duct(), 1, om), Err(Error::Cutoff { mode: 1, .. })));
        assert!(matches!(k_exact_form(&duct(), 1, om * 0.5), Err(Error::Cutoff { .. })));
        assert!(k_exact_form(&duct(), 1, om * 1.001).is_ok());
        // the linearized form stays defined past cutoff
        assert!(k_linearized(&duct(), 1, om * 0.5).is_finite());
    }

    #[test]
    fn turning_depths() {
        let e = turning_depth(&duct(), 1, w(50.0)).unwrap();
        assert!((e - 144.0).abs() < 0.5, "{e}");
        // c(ε) equals the phase speed under the expanded profile k0²(1−2aε) = k²
        let k = k_exact_form(&duct(), 1, w(50.0)).unwrap();
        let k0 = w(50.0) / 1434.0;
        assert!((k0 * k0 * (1.0 - 2.0 * 4.359e-5 * e) - k * k).abs() < 1e-15);
        assert!((turning_depth(&duct(), 7, w(100.0)).unwrap() - 392.0).abs() < 1.0);
        assert!((turning_depth(&duct(), 8, w(100.0)).unwrap() - 431.0).abs() < 1.0);
        assert!(is_within_duct(&duct(), 7, w(100.0)));
        assert!(!is_within_duct(&duct(), 8, w(100.0)));
    }

    #[test]
    fn group_delay_at_105km() {
        let r = 105e3;
        let t = modal_group_delay(&duct(), 1, w(50.0), r).unwrap();
        let tr = reference_arrival(&duct(), r);
        assert!((tr - 73.22).abs() < 0.005, "{tr}");
        assert!((tr - t - 0.153).abs() < 5e-4, "{}", tr - t);
        // oracle: r·dk/dω of the linearized wavenumber by central differences
        let h = 1e-3;
        let dk = (k_linearized(&duct(), 1, w(50.0) + h) - k_linearized(&duct(), 1, w(50.0) - h)) / (2.0 * h);
        assert!((r * dk - t).abs() < 1e-6);
        assert!(modal_group_delay(&duct(), 1, w(50.0), 0.0).is_err());
    }

    #[test]
    fn group_delay_increases_toward_tr() {
        let r = 105e3;
        let tr = reference_arrival(&duct(), r);
        let mut prev = f64::NEG_INFINITY;
        for f in (10..=400).map(|i| i as f64) {
            let t = modal_group_delay(&duct(), 1, w(f), r).unwrap();
            assert!(t > prev && t < tr);
            prev = t;
        }
        let far = modal_group_delay(&duct(), 1, 1e12, r).unwrap();
        assert!((tr - far) < 1e-6);
    }

    #[test]
    fn stationary_frequency_inverts_group_delay() {
        let r = 105e3;
        let tr = reference_arrival(&duct(), r);
        let om = stationary_frequency(&duct(), 1, r, tr - 0.153).unwrap();
        assert!((om - 314.0).abs() < 2.0, "{om}");
        for m in 1..=5 {
            for f in [12.0, 33.0, 50.0, 97.0] {
                let t = modal_group_delay(&duct(), m, w(f), r).unwrap();
                let back = stationary_frequency(&duct(), m, r, t).unwrap();
                assert!(((back - w(f)) / w(f)).abs() < 1e-10);
            }
        }
        assert!(stationary_frequency(&duct(), 1, r, tr).is_err());
        assert!(stationary_frequency(&duct(), 1, r, tr - 1e-9).unwrap() > 1e9);
    }

    #[test]
    fn stationary_phase_matches_direct_phase() {
        let r = 105e3;
        let tr = reference_arrival(&duct(), r);
        let t = tr - 0.153;
        let closed = stationary_phase_value(&duct(), 1, r, t).unwrap();
        assert!((closed - 96.2).abs() < 0.2, "{closed}");
        let om = stationary_frequency(&duct(), 1, r, t).unwrap();
        let direct = phase_function(&duct(), 1, r, om, t);
        assert!(((closed - direct) / closed).abs() < 1e-12);
        // the stationary point is an extremum of φ(·, t)
        let h = 1e-3 * om;
        let d = (phase_function(&duct(), 1, r, om + h, t) - phase_function(&duct(), 1, r, om - h, t)) / (2.0 * h);
        assert!(d.abs() < 1e-6, "{d}");
    }

    #[test]
    fn stationary_phase_scaling() {
        // at fixed (t_r - t)/t_r the closed form scales as t_r^(3/2) · t_r^(-1/2) = t_r
        let d = duct();
        let phi = |r: f64| {
            let tr = r / d.c0;
            stationary_phase_value(&d, 2, r, tr * (1.0 - 1e-3)).unwrap()
        };
        let ratio = phi(400e3) / phi(100e3);
        assert!((ratio - 4.0).abs() < 1e-9, "{ratio}");
    }

    #[test]
    fn warped_frequencies() {
        let r = 105e3;
        let f1 = warped_mode_frequency(&duct(), 1, r);
        let f2 = warped_mode_frequency(&duct(), 2, r);
        assert!((f1 - 6.0).abs() < 0.05, "{f1}");
        assert!((f2 - 14.0).abs() < 0.05, "{f2}");
        let disp = DuctDispersion::new(duct(), 6);
        assert!((disp.warped_spacing(r) - 8.0).abs() < 0.05);
        for m in 1..=10 {
            let a = warped_mode_frequency(&duct(), m, r);
            let b = warped_mode_frequency_from_phase(&duct(), m, r);
            assert!(((a - b) / a).abs() < 1e-12, "m={m}");
        }
    }

    #[test]
    fn warping_maps_compose_to_identity() {
        let tr: f64 = 73.2217;
        for t in [0.0, 10.0, 36.6, 72.0, 73.2] {
            let back = warp_time(tr, unwarp_time(tr, t));
            assert!((back - t).abs() < 1e-9 * tr, "{t} -> {back}");
        }
        for u in [0.12f64, 0.5, 1.0, 4.0] {
            let back = unwarp_time(tr, warp_time(tr, u));
            assert!((back - u).abs() < 1e-12 * u.max(1.0));
        }
    }

    #[test]
    fn quantization_condition_validation() {
        assert!(QuantizationCondition::new(-PI, -PI / 2.0).is_ok());
        assert!(QuantizationCondition::new(0.1, -PI / 2.0).is_err());
        assert!(QuantizationCondition::new(-PI, -7.0).is_err());
        let qc = QuantizationCondition::<f64>::default();
        assert!((qc.target_phase(1) - 0.75 * PI).abs() < 1e-15);
        assert!((qc.target_phase(3) - 2.75 * PI).abs() < 1e-15);
    }

    #[test]
    fn numeric_quantization_on_linear_profile() {
        let p = LinearDuct::new(1434.0, 4.359e-5, 2000.0).unwrap().to_profile();
        let qc = QuantizationCondition::default();
        let k = solve_wkb_wavenumber(&p, 1, w(50.0), &qc).unwrap();
        let ke = k_exact_form(&duct(), 1, w(50.0)).unwrap();
        // independent scipy quad + brentq oracle: 3.184e-5 relative gap
        let gap = ((k - ke) / ke).abs();
        assert!((gap - 3.184e-5).abs() < 1e-7, "{gap}");
    }

    #[test]
    fn isospeed_has_no_turning_point() {
        let p = SoundSpeedProfile::new("iso", vec![(0.0, 1500.0), (1000.0, 1500.0)]).unwrap();
        let r = solve_wkb_wavenumber(&p, 1, w(50.0), &QuantizationCondition::default());
        assert!(matches!(r, Err(Error::NotTrapped { mode: 1 })));
    }

    #[test]
    fn profile_without_deep_turning_is_reported() {
        // speed rises then falls; the extension never reaches deep-mode phase speeds
        let p = SoundSpeedProfile::new("bump", vec![(0.0, 1434.0), (50.0, 1436.0), (100.0, 1430.0)]).unwrap();
        let r = solve_wkb_wavenumber(&p, 5, w(50.0), &QuantizationCondition::default());
        assert!(matches!(r, Err(Error::TurningBeyondProfile { mode: 5, .. })), "{r:?}");
    }

    #[test]
    fn simpson_integrates_polynomials_and_sqrt() {
        let v = adaptive_simpson(&|x: f64| x * x * x, 0.0, 2.0, 1e-12);
        assert!((v - 4.0).abs() < 1e-12);
        let q = adaptive_simpson(&|x: f64| (1.0 - x * x).max(0.0).sqrt(), -1.0, 1.0, 1e-10);
        assert!((q - PI / 2.0).abs() < 1e-7);
    }

    #[test]
    fn closed_forms_in_single_precision() {
        let d = LinearDuct::<f32>::new(1434.0, 4.359e-5, 400.0).unwrap();
        let f = warped_mode_frequency(&d, 1, 105e3f32);
        assert!((f - 5.996).abs() < 1e-2);
        let k = k_exact_form(&d, 1, 314.159_27f32).unwrap();
        assert!((k - 0.21770).abs() < 1e-4);
    }
}
