//! Finite-difference normal-mode solver.
//!
//! The depth equation ψ'' + (ω²/c(z)² − k²) ψ = 0 with ψ(0) = ψ(H) = 0 is
//! discretized with second differences on a uniform grid. Multiplying by dz²
//! gives the symmetric tridiagonal matrix `tridiag(1, -2 + dz²ω²/c², 1)`
//! whose eigenvalues are dz²·k². Only the largest few are wanted, so they
//! are isolated one at a time by Sturm-sequence bisection and the vectors
//! follow from inverse iteration.

mod tridiag;

use std::fmt::Write as _;

use crate::env::{SoundSpeedProfile, DEFAULT_DENSITY};
use crate::error::{Error, Result};
use crate::num::Real;

/// Minimum number of grid intervals over the water column.
pub const MIN_INTERVALS: usize = 100;

/// Points per wavelength (at the slowest speed) the grid must resolve.
pub const MIN_POINTS_PER_WAVELENGTH: f64 = 20.0;

/// Uniform depth grid from the surface to the truncation depth.
///
/// The spacing is adjusted so that an integer number of intervals spans
/// the column exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthGrid<T = f64> {
    depth_max: T,
    spacing: T,
    intervals: usize,
}

impl<T: Real> DepthGrid<T> {
    pub fn new(depth_max: T, spacing: T) -> Result<Self> {
        if !(depth_max > T::zero()) || !depth_max.is_finite() {
            return Err(Error::out_of_range("depth_max", depth_max.to_f64_lossy(), "(0, inf)"));
        }
        if !(spacing > T::zero()) {
            return Err(Error::out_of_range("dz", spacing.to_f64_lossy(), "(0, inf)"));
        }
        let ratio = depth_max / spacing;
        if ratio < T::from_usize_lossy(MIN_INTERVALS) {
            return Err(Error::invalid(format!(
                "grid too short: H/dz = {ratio} < {MIN_INTERVALS}"
            )));
        }
        let intervals = ratio.round().to_usize().unwrap();
        Ok(Self {
            depth_max,
            spacing: depth_max / T::from_usize_lossy(intervals),
            intervals,
        })
    }

    pub fn depth_max(&self) -> T {
        self.depth_max
    }

    pub fn spacing(&self) -> T {
        self.spacing
    }

    /// Number of intervals; the grid has `intervals + 1` points.
    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn depth(&self, i: usize) -> T {
        T::from_usize_lossy(i) * self.spacing
    }

    pub fn depths(&self) -> Vec<T> {
        (0..=self.intervals).map(|i| self.depth(i)).collect()
    }

    /// Same spacing, different truncation depth.
    pub fn with_depth(&self, depth_max: T) -> Result<Self> {
        Self::new(depth_max, self.spacing)
    }
}

/// One normal mode at a single frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode<T = f64> {
    /// 1-based mode number, ordered by decreasing wavenumber.
    pub index: usize,
    /// Horizontal wavenumber k_rm, rad/m.
    pub k: T,
    /// Eigenfunction on every grid point including both boundaries.
    pub psi: Vec<T>,
    /// Modal attenuation, nepers/m.
    pub alpha: T,
    /// Group speed dω/dk, m/s.
    pub group_speed: Option<T>,
}

impl<T: Real> Mode<T> {
    pub fn phase_speed(&self, frequency: T) -> T {
        T::TAU() * frequency / self.k
    }
}

/// Modes of one profile at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSolution<T = f64> {
    pub frequency: T,
    pub grid: DepthGrid<T>,
    pub density: T,
    pub modes: Vec<Mode<T>>,
}

impl<T: Real> ModeSolution<T> {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Mode by its 1-based index.
    pub fn mode(&self, index: usize) -> Option<&Mode<T>> {
        self.modes.iter().find(|m| m.index == index)
    }

    /// ψ of `mode` at depth `z`, linearly interpolated; zero outside the column.
    pub fn psi_at(&self, mode: &Mode<T>, z: T) -> T {
        let dz = self.grid.spacing();
        if z < T::zero() || z > self.grid.depth_max() {
            return T::zero();
        }
        let x = z / dz;
        let i = x.floor().to_usize().unwrap().min(self.grid.intervals() - 1);
        let w = x - T::from_usize_lossy(i);
        mode.psi[i] + w * (mode.psi[i + 1] - mode.psi[i])
    }

    /// Sets per-mode attenuation (nepers/m); missing entries stay unchanged.
    pub fn set_attenuation(&mut self, alpha: &[T]) -> Result<()> {
        if let Some(a) = alpha.iter().find(|a| !(**a >= T::zero())) {
            return Err(Error::invalid(format!("attenuation {a} must be >= 0")));
        }
        for (m, &a) in self.modes.iter_mut().zip(alpha) {
            m.alpha = a;
        }
        Ok(())
    }

    /// Same attenuation on every mode.
    pub fn with_uniform_attenuation(mut self, alpha: T) -> Result<Self> {
        let all = vec![alpha; self.modes.len()];
        self.set_attenuation(&all)?;
        Ok(self)
    }

    /// Discrete inner product (1/ρ)∫ψ_a ψ_b dz with the trapezoid rule.
    pub fn inner_product(&self, a: &Mode<T>, b: &Mode<T>) -> T {
        trapezoid_product(&a.psi, &b.psi, self.grid.spacing()) / self.density
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_error(&self) -> T {
        let mut worst = T::zero();
        for (i, a) in self.modes.iter().enumerate() {
            for (j, b) in self.modes.iter().enumerate().skip(i) {
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((self.inner_product(a, b) - target).abs());
            }
        }
        worst
    }

    /// Mode table: `m,k_rm,group_speed,alpha_m`.
    pub fn to_table_csv(&self) -> String {
        let mut out = String::from("m,k_rm,group_speed,alpha_m\n");
        for m in &self.modes {
            let vg = m.group_speed.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{}", m.index, m.k, vg, m.alpha);
        }
        out
    }

    /// Eigenfunction matrix: one row per depth, one column per mode.
    pub fn eigenfunctions_csv(&self) -> String {
        let mut out = String::from("depth_m");
        for m in &self.modes {
            let _ = write!(out, ",psi_{}", m.index);
        }
        out.push('\n');
        for i in 0..=self.grid.intervals() {
            let _ = write!(out, "{}", self.grid.depth(i));
            for m in &self.modes {
                let _ = write!(out, ",{}", m.psi[i]);
            }
            out.push('\n');
        }
        out
    }
}

fn trapezoid_product<T: Real>(a: &[T], b: &[T], dz: T) -> T {
    let n = a.len();
    let interior = a[1..n - 1]
        .iter()
        .zip(&b[1..n - 1])
        .fold(T::zero(), |s, (&x, &y)| s + x * y);
    (interior + T::lit(0.5) * (a[0] * b[0] + a[n - 1] * b[n - 1])) * dz
}

/// Solver configuration shared across frequencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSolver<T = f64> {
    pub grid: DepthGrid<T>,
    pub density: T,
    /// Modes with phase speed ω/k at or above this are dropped. `None` uses
    /// the profile's speed at the truncation depth; `Some(inf)` keeps every
    /// mode with real k.
    pub max_phase_speed: Option<T>,
    /// Return at most this many modes (the slowest ones).
    pub mode_limit: Option<usize>,
}

impl<T: Real> ModeSolver<T> {
    pub fn new(grid: DepthGrid<T>) -> Self {
        Self {
            grid,
            density: T::lit(DEFAULT_DENSITY),
            max_phase_speed: None,
            mode_limit: None,
        }
    }

    pub fn max_phase_speed(mut self, c: T) -> Self {
        self.max_phase_speed = Some(c);
        self
    }

    pub fn mode_limit(mut self, n: usize) -> Self {
        self.mode_limit = Some(n);
        self
    }

    pub fn density(mut self, rho: T) -> Self {
        self.density = rho;
        self
    }

    /// Finest spacing needed at `frequency` for `profile`.
    pub fn max_spacing(&self, profile: &SoundSpeedProfile<T>, frequency: T) -> T {
        profile.min_speed_to(self.grid.depth_max())
            / (T::lit(MIN_POINTS_PER_WAVELENGTH) * frequency)
    }

    /// Solves for the trapped modes of `profile` at `frequency` (Hz).
    pub fn solve(&self, profile: &SoundSpeedProfile<T>, frequency: T) -> Result<ModeSolution<T>> {
        if !(frequency > T::zero()) || !frequency.is_finite() {
            return Err(Error::out_of_range("frequency", frequency.to_f64_lossy(), "(0, inf)"));
        }
        if !(self.density > T::zero()) {
            return Err(Error::out_of_range("density", self.density.to_f64_lossy(), "(0, inf)"));
        }
        let dz = self.grid.spacing();
        let max_dz = self.max_spacing(profile, frequency);
        if dz > max_dz {
            return Err(Error::GridTooCoarse {
                dz: dz.to_f64_lossy(),
                frequency: frequency.to_f64_lossy(),
                max_dz: max_dz.to_f64_lossy(),
            });
        }
        let omega = T::TAU() * frequency;
        let n = self.grid.intervals() - 1;
        let dz2 = dz * dz;
        let mut inv_c2 = Vec::with_capacity(n);
        let diag: Vec<T> = (1..=n)
            .map(|i| {
                let c = profile.speed_at(self.grid.depth(i));
                let s = (c * c).recip();
                inv_c2.push(s);
                T::lit(-2.0) + dz2 * omega * omega * s
            })
            .collect();

        let cmax = self
            .max_phase_speed
            .unwrap_or_else(|| profile.speed_at(self.grid.depth_max()));
        let floor = if cmax.is_finite() {
            dz2 * (omega / cmax).powi(2)
        } else {
            T::zero()
        };
        let mut count = tridiag::count_above(&diag, floor);
        if let Some(limit) = self.mode_limit {
            count = count.min(limit);
        }
        if count == 0 {
            return Err(Error::NoPropagatingModes {
                frequency: frequency.to_f64_lossy(),
            });
        }

        let mut hi = tridiag::upper_bound(&diag);
        let mut modes = Vec::with_capacity(count);
        for index in 1..=count {
            let mu = tridiag::kth_largest(&diag, index, floor, hi);
            hi = mu;
            let v = tridiag::eigenvector(&diag, mu);
            let k = (mu / dz2).sqrt();
            let psi = finish_eigenfunction(&v, dz, self.density);
            // Hellmann-Feynman: dk/dω = (ω/k)·Σ ψ²/c² / Σ ψ²
            let (num, den) = v
                .iter()
                .zip(&inv_c2)
                .fold((T::zero(), T::zero()), |(a, b), (&x, &s)| (a + x * x * s, b + x * x));
            let group_speed = k / (omega * num / den);
            modes.push(Mode {
                index,
                k,
                psi,
                alpha: T::zero(),
                group_speed: Some(group_speed),
            });
        }
        Ok(ModeSolution {
            frequency,
            grid: self.grid,
            density: self.density,
            modes,
        })
    }
}

/// Pads the interior vector with boundary zeros, normalizes so that
/// (1/ρ)∫ψ² dz = 1 and makes the first extremum positive.
fn finish_eigenfunction<T: Real>(v: &[T], dz: T, density: T) -> Vec<T> {
    let mut psi = Vec::with_capacity(v.len() + 2);
    psi.push(T::zero());
    psi.extend_from_slice(v);
    psi.push(T::zero());
    let norm2 = trapezoid_product(&psi, &psi, dz) / density;
    let mut scale = norm2.sqrt().recip();
    if first_extremum(&psi).map_or(false, |x| x < T::zero()) {
        scale = -scale;
    }
    psi.iter_mut().for_each(|p| *p = *p * scale);
    psi
}

fn first_extremum<T: Real>(psi: &[T]) -> Option<T> {
    psi.windows(3)
        .find(|w| {
            let (a, b, c) = (w[0].abs(), w[1].abs(), w[2].abs());
            b > T::zero() && b >= a && b > c
        })
        .map(|w| w[1])
}

/// Solves with the given grid and phase-speed cap and default density.
pub fn solve_modes<T: Real>(
    profile: &SoundSpeedProfile<T>,
    frequency: T,
    grid: DepthGrid<T>,
    max_phase_speed: Option<T>,
) -> Result<ModeSolution<T>> {
    let solver = ModeSolver {
        max_phase_speed,
        ..ModeSolver::new(grid)
    };
    solver.solve(profile, frequency)
}

/// Group speed of mode `mode_index` from a centered difference in frequency.
pub fn group_speed<T: Real>(
    solver: &ModeSolver<T>,
    profile: &SoundSpeedProfile<T>,
    frequency: T,
    mode_index: usize,
    dfreq: T,
) -> Result<T> {
    if !(dfreq > T::zero()) || dfreq >= frequency {
        return Err(Error::InvalidStencil(format!(
            "dfreq = {dfreq} must lie in (0, {frequency})"
        )));
    }
    let below = solver.solve(profile, frequency - dfreq)?;
    let above = solver.solve(profile, frequency + dfreq)?;
    if below.len() != above.len() {
        return Err(Error::ModeCountChanged {
            below: below.len(),
            above: above.len(),
        });
    }
    let pick = |s: &ModeSolution<T>| {
        s.mode(mode_index).map(|m| m.k).ok_or(Error::MissingMode {
            mode: mode_index,
            frequency: s.frequency.to_f64_lossy(),
        })
    };
    let (k_lo, k_hi) = (pick(&below)?, pick(&above)?);
    Ok(T::TAU() * (dfreq + dfreq) / (k_hi - k_lo))
}

/// Deepest depth where |ψ| exceeds 1 % of its maximum (penetration depth).
pub fn mode_surface_concentration<T: Real>(solution: &ModeSolution<T>, mode_index: usize) -> Result<T> {
    let mode = solution.mode(mode_index).ok_or(Error::MissingMode {
        mode: mode_index,
        frequency: solution.frequency.to_f64_lossy(),
    })?;
    let peak = mode.psi.iter().fold(T::zero(), |m, p| m.max(p.abs()));
    let threshold = T::lit(0.01) * peak;
    let deepest = mode.psi.iter().rposition(|p| p.abs() > threshold).unwrap_or(0);
    Ok(solution.grid.depth(deepest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::LinearDuct;
    use std::f64::consts::PI;

    fn isospeed() -> SoundSpeedProfile {
        SoundSpeedProfile::new("iso", vec![(0.0, 1500.0), (1000.0, 1500.0)]).unwrap()
    }

    fn reference_duct() -> SoundSpeedProfile {
        LinearDuct::new(1434.0, 4.359e-5, 400.0).unwrap().to_profile()
    }

    fn iso_solver(f: f64) -> ModeSolver {
        let grid = DepthGrid::new(1000.0, 1500.0 / (40.0 * f)).unwrap();
        ModeSolver::new(grid).max_phase_speed(f64::INFINITY)
    }

    #[test]
    fn grid_invariants() {
        assert!(DepthGrid::new(1000.0, 20.0).is_err());
        assert!(DepthGrid::new(0.0, 1.0).is_err());
        assert!(DepthGrid::new(1000.0, -1.0).is_err());
        let g = DepthGrid::<f64>::new(1000.0, 0.75).unwrap();
        assert_eq!(g.intervals(), 1333);
        assert!((g.depth(g.intervals()) - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn ideal_waveguide_wavenumbers() {
        let f = 50.0;
        let s = iso_solver(f).solve(&isospeed(), f).unwrap();
        let kw = 2.0 * PI * f / 1500.0;
        for m in 1..=10 {
            let exact = (kw * kw - (m as f64 * PI / 1000.0).powi(2)).sqrt();
            let got = s.mode(m).unwrap().k;
            assert!(((got - exact) / exact).abs() < 1e-6, "m={m} {got} vs {exact}");
        }
        // closed form evaluates to 0.2094159 for mode 1
        assert!((s.mode(1).unwrap().k - 0.209_415_9).abs() < 1e-7);
    }

    #[test]
    fn ideal_waveguide_group_speed() {
        let f = 50.0;
        let solver = iso_solver(f);
        let k = solver.solve(&isospeed(), f).unwrap().mode(1).unwrap().k;
        let expect = 1500.0 * 1500.0 * k / (2.0 * PI * f);
        let vg = group_speed(&solver, &isospeed(), f, 1, 0.01).unwrap();
        assert!((vg - expect).abs() < 1e-3, "{vg} vs {expect}");
        let hf = solver.solve(&isospeed(), f).unwrap().mode(1).unwrap().group_speed.unwrap();
        assert!((hf - expect).abs() < 1e-3, "{hf} vs {expect}");
    }

    #[test]
    fn zero_stencil_is_rejected() {
        let solver = iso_solver(50.0);
        assert!(matches!(
            group_speed(&solver, &isospeed(), 50.0, 1, 0.0),
            Err(Error::InvalidStencil(_))
        ));
    }

    #[test]
    fn eigenfunctions_are_orthonormal_and_sign_fixed() {
        let grid = DepthGrid::new(2000.0, 0.5).unwrap();
        let s = ModeSolver::new(grid).solve(&reference_duct(), 100.0).unwrap();
        assert!(s.len() > 20);
        assert!(s.orthonormality_error() < 1e-6, "{}", s.orthonormality_error());
        for m in &s.modes {
            assert!(first_extremum(&m.psi).unwrap() > 0.0, "mode {}", m.index);
            assert_eq!(m.alpha, 0.0);
        }
        assert!(s.modes.windows(2).all(|w| w[0].k > w[1].k));
    }

    #[test]
    fn linear_duct_mode_one_at_50hz() {
        let grid = DepthGrid::new(2000.0, 0.5).unwrap();
        let s = ModeSolver::new(grid).mode_limit(3).solve(&reference_duct(), 50.0).unwrap();
        let k1 = s.mode(1).unwrap().k;
        assert!((k1 - 0.21771).abs() < 2e-5, "{k1}");
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn no_modes_below_cutoff() {
        let grid = DepthGrid::new(2000.0, 0.5).unwrap();
        let r = ModeSolver::new(grid).solve(&reference_duct(), 0.5);
        assert!(matches!(r, Err(Error::NoPropagatingModes { .. })), "{r:?}");
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let grid = DepthGrid::new(2000.0, 5.0).unwrap();
        assert!(matches!(
            ModeSolver::new(grid).solve(&reference_duct(), 100.0),
            Err(Error::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn isospeed_modes_fill_the_column() {
        for f in [20.0, 50.0] {
            let s = iso_solver(f).solve(&isospeed(), f).unwrap();
            let d = mode_surface_concentration(&s, 1).unwrap();
            assert!(d > 990.0, "f={f} depth={d}");
        }
    }

    #[test]
    fn mode_counts_grow_with_frequency() {
        let grid = DepthGrid::new(2000.0, 0.5).unwrap();
        let solver = ModeSolver::new(grid);
        let counts: Vec<usize> = [5.0, 10.0, 20.0, 40.0, 80.0]
            .iter()
            .map(|&f| solver.solve(&reference_duct(), f).unwrap().len())
            .collect();
        assert!(counts.windows(2).all(|w| w[0] <= w[1]), "{counts:?}");
    }

    #[test]
    fn attenuation_injection() {
        let grid = DepthGrid::new(2000.0, 0.5).unwrap();
        let s = ModeSolver::new(grid).mode_limit(2).solve(&reference_duct(), 50.0).unwrap();
        let s = s.with_uniform_attenuation(1e-3).unwrap();
        assert!(s.modes.iter().all(|m| m.alpha == 1e-3));
        let mut s = s;
        assert!(s.set_attenuation(&[-1.0]).is_err());
    }

    #[test]
    fn csv_exports_have_expected_shape() {
        let grid = DepthGrid::new(2000.0, 0.5).unwrap();
        let s = ModeSolver::new(grid).mode_limit(2).solve(&reference_duct(), 50.0).unwrap();
        let table = s.to_table_csv();
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines[0], "m,k_rm,group_speed,alpha_m");
        assert_eq!(lines.len(), 3);
        let k1: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
        assert!((k1 - 0.21770).abs() < 2e-5, "{k1}");
        let ef = s.eigenfunctions_csv();
        assert_eq!(ef.lines().count(), grid.intervals() + 2);
        assert_eq!(ef.lines().next().unwrap(), "depth_m,psi_1,psi_2");
    }
}
