//! Symmetric tridiagonal eigenproblems with unit off-diagonal.
//!
//! Matrices here have diagonal `d` and every off-diagonal entry equal to 1,
//! which is the shape of the scaled second-difference operator.

use crate::num::Real;

/// Number of eigenvalues strictly below `x` (Sturm sequence count).
pub(crate) fn count_below<T: Real>(diag: &[T], x: T) -> usize {
    let tiny = T::min_positive_value().sqrt();
    let mut count = 0;
    let mut q = T::one();
    for (i, &d) in diag.iter().enumerate() {
        q = if i == 0 { d - x } else { d - x - q.recip() };
        if q == T::zero() {
            q = -tiny;
        }
        if q < T::zero() {
            count += 1;
        }
    }
    count
}

/// Number of eigenvalues strictly above `x`.
#[inline]
pub(crate) fn count_above<T: Real>(diag: &[T], x: T) -> usize {
    diag.len() - count_below(diag, x)
}

/// Gershgorin upper bound on the spectrum.
pub(crate) fn upper_bound<T: Real>(diag: &[T]) -> T {
    diag.iter().copied().fold(T::neg_infinity(), T::max) + T::lit(2.0)
}

/// The `k`-th largest eigenvalue (1-based) in `(lo, hi]`, by bisection.
///
/// Requires at least `k` eigenvalues above `lo` and none above `hi`.
pub(crate) fn kth_largest<T: Real>(diag: &[T], k: usize, mut lo: T, mut hi: T) -> T {
    let eps = T::epsilon();
    for _ in 0..256 {
        let mid = T::lit(0.5) * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= eps * (lo.abs().max(hi.abs())) {
            break;
        }
        if count_above(diag, mid) >= k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    T::lit(0.5) * (lo + hi)
}

/// Eigenvector for the (converged) eigenvalue `lambda` by inverse iteration.
///
/// Uses LU with partial pivoting on the shifted matrix; the result has unit
/// Euclidean norm and arbitrary sign.
pub(crate) fn eigenvector<T: Real>(diag: &[T], lambda: T) -> Vec<T> {
    let n = diag.len();
    // deterministic start vector with no special alignment to the modes
    let mut x: Vec<T> = (0..n)
        .map(|i| T::one() + T::lit(0.5) * T::lit((i as f64 * 0.618_034 + 0.1).sin()))
        .collect();
    let lu = ShiftedLu::new(diag, lambda);
    for _ in 0..3 {
        lu.solve(&mut x);
        let norm = x.iter().fold(T::zero(), |s, &v| s + v * v).sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            break;
        }
        x.iter_mut().for_each(|v| *v = *v / norm);
    }
    x
}

/// LU factorization (partial pivoting) of `tridiag(1, d - lambda, 1)`.
struct ShiftedLu<T> {
    // U has up to two super-diagonals after pivoting
    u0: Vec<T>,
    u1: Vec<T>,
    u2: Vec<T>,
    l: Vec<T>,
    swapped: Vec<bool>,
}

impl<T: Real> ShiftedLu<T> {
    fn new(diag: &[T], lambda: T) -> Self {
        let n = diag.len();
        let tiny = T::epsilon() * T::lit(4.0);
        let mut u0: Vec<T> = diag.iter().map(|&d| d - lambda).collect();
        let mut u1 = vec![T::one(); n.saturating_sub(1)];
        let mut u2 = vec![T::zero(); n.saturating_sub(2)];
        let mut l = vec![T::zero(); n.saturating_sub(1)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        // sub-diagonal entries are all 1
        for i in 0..n.saturating_sub(1) {
            let sub = T::one();
            if u0[i].abs() >= sub.abs() {
                let piv = if u0[i] == T::zero() { tiny } else { u0[i] };
                u0[i] = piv;
                let f = sub / piv;
                l[i] = f;
                u0[i + 1] = u0[i + 1] - f * u1[i];
            } else {
                // swap rows i and i+1
                swapped[i] = true;
                let f = u0[i] / sub;
                l[i] = f;
                u0[i] = sub;
                let old_u1 = u1[i];
                u1[i] = u0[i + 1];
                u0[i + 1] = old_u1 - f * u1[i];
                if i + 1 < n - 1 {
                    u2[i] = u1[i + 1];
                    u1[i + 1] = -f * u1[i + 1];
                }
            }
        }
        if let Some(last) = u0.last_mut() {
            if *last == T::zero() {
                *last = tiny;
            }
        }
        Self {
            u0,
            u1,
            u2,
            l,
            swapped,
        }
    }

    fn solve(&self, b: &mut [T]) {
        let n = b.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] = b[i + 1] - self.l[i] * b[i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            if i + 1 < n {
                s = s - self.u1[i] * b[i + 1];
            }
            if i + 2 < n {
                s = s - self.u2[i] * b[i + 2];
            }
            b[i] = s / self.u0[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // tridiag(1, -2, 1) of size n has eigenvalues -2 + 2 cos(j pi / (n + 1))
    fn laplacian_eigs(n: usize) -> Vec<f64> {
        let mut v: Vec<f64> = (1..=n)
            .map(|j| -2.0 + 2.0 * (j as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos())
            .collect();
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        v
    }

    #[test]
    fn counts_match_known_spectrum() {
        let n = 50;
        let d = vec![-2.0; n];
        let eigs = laplacian_eigs(n);
        for x in [-4.5, -3.0, -1.0, -0.01, 0.5] {
            let expect = eigs.iter().filter(|&&e| e < x).count();
            assert_eq!(count_below(&d, x), expect, "x={x}");
        }
    }

    #[test]
    fn bisection_finds_each_eigenvalue() {
        let n = 40;
        let d = vec![-2.0; n];
        let eigs = laplacian_eigs(n);
        for (k, &e) in eigs.iter().enumerate().take(10) {
            let got = kth_largest(&d, k + 1, -4.1, upper_bound(&d));
            assert!((got - e).abs() < 1e-14, "k={} got {got} want {e}", k + 1);
        }
    }

    #[test]
    fn inverse_iteration_gives_sine_vectors() {
        let n = 60;
        let d = vec![-2.0; n];
        let lam = kth_largest(&d, 3, -4.1, 0.1);
        let v = eigenvector(&d, lam);
        let h = std::f64::consts::PI / (n as f64 + 1.0);
        let s: Vec<f64> = (1..=n).map(|i| (3.0 * i as f64 * h).sin()).collect();
        let ns = s.iter().map(|x| x * x).sum::<f64>().sqrt();
        let dot: f64 = v.iter().zip(&s).map(|(a, b)| a * b).sum::<f64>() / ns;
        assert!((dot.abs() - 1.0).abs() < 1e-12, "dot {dot}");
    }

    #[test]
    fn lu_solves_indefinite_system() {
        let d = vec![0.3, -1.2, 0.05, 2.0, -0.7];
        let lu = ShiftedLu::new(&d, 0.1);
        let x_true = [1.0, -2.0, 0.5, 3.0, -1.0];
        // b = (tridiag(1, d - 0.1, 1)) x
        let n = d.len();
        let mut b: Vec<f64> = (0..n)
            .map(|i| {
                let mut s = (d[i] - 0.1) * x_true[i];
                if i > 0 {
                    s += x_true[i - 1];
                }
                if i + 1 < n {
                    s += x_true[i + 1];
                }
                s
            })
            .collect();
        lu.solve(&mut b);
        for (a, e) in b.iter().zip(x_true) {
            assert!((a - e).abs() < 1e-12);
        }
    }
}
