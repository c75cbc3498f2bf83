//! Log-barrier Newton method for smooth objectives over
//! `{x : E x = e, a_i . x + c_i > 0}`.
//!
//! Steps live in the nullspace of `E`, so a feasible start stays feasible.
//! Reduced Hessians are eigen-decomposed and their spectrum floored, which
//! keeps the step a descent direction when the objective is not convex.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Strict inequality `coeffs . x + offset > 0`.
#[derive(Debug, Clone)]
pub(crate) struct AffineRow {
    pub coeffs: Vec<(usize, f64)>,
    pub offset: f64,
}

impl AffineRow {
    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        self.coeffs.iter().map(|&(i, a)| a * x[i]).sum::<f64>() + self.offset
    }
}

pub(crate) trait Smooth {
    /// `None` outside the objective's domain.
    fn value(&self, x: &DVector<f64>) -> Option<f64>;
    fn derivatives(&self, x: &DVector<f64>) -> Option<(f64, DVector<f64>, DMatrix<f64>)>;
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct BarrierSettings {
    /// Stop once the duality-gap bound is below `gap_rel * |f| + gap_abs`.
    pub gap_rel: f64,
    pub gap_abs: f64,
    pub mu: f64,
    pub max_newton: usize,
    /// Centering ends when half the squared Newton decrement drops below this.
    pub centering_tol: f64,
}

impl Default for BarrierSettings {
    fn default() -> Self {
        Self { gap_rel: 1e-8, gap_abs: 0.0, mu: 10.0, max_newton: 4000, centering_tol: 1e-10 }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct BarrierOutcome {
    pub x: DVector<f64>,
    pub value: f64,
    pub gap_bound: f64,
    pub newton_iterations: usize,
    pub converged: bool,
}

/// Orthonormal basis of `{z : E z = 0}` for an `n`-column `E`.
pub(crate) fn nullspace(e: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    if e.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    let gram = e.transpose() * e;
    let eig = SymmetricEigen::new(gram);
    let top = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let cut = 1e-10 * top.max(1.0);
    let cols: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] <= cut).collect();
    DMatrix::from_fn(n, cols.len(), |i, j| eig.eigenvectors[(i, cols[j])])
}

struct Barrier<'a, S: Smooth> {
    smooth: &'a S,
    rows: &'a [AffineRow],
}

impl<S: Smooth> Barrier<'_, S> {
    fn interior(&self, x: &DVector<f64>) -> bool {
        self.rows.iter().all(|r| r.eval(x) > 0.0)
    }

    fn merit(&self, t: f64, x: &DVector<f64>) -> Option<f64> {
        if !self.interior(x) {
            return None;
        }
        let f = self.smooth.value(x)?;
        Some(t * f - self.rows.iter().map(|r| r.eval(x).ln()).sum::<f64>())
    }
}

/// Runs the barrier method from a strictly feasible `x0`.
pub(crate) fn minimize<S: Smooth>(
    smooth: &S,
    rows: &[AffineRow],
    basis: &DMatrix<f64>,
    x0: DVector<f64>,
    settings: &BarrierSettings,
) -> BarrierOutcome {
    let barrier = Barrier { smooth, rows };
    let m = rows.len().max(1) as f64;
    let mut x = x0;
    let mut newton = 0usize;
    let f0 = smooth.value(&x).unwrap_or(1.0);
    let mut t = m / f0.abs().max(1e-12);
    let mut failed = false;

    if basis.ncols() == 0 {
        let value = smooth.value(&x).unwrap_or(f64::INFINITY);
        return BarrierOutcome { x, value, gap_bound: 0.0, newton_iterations: 0, converged: value.is_finite() };
    }

    loop {
        // centering
        loop {
            if newton >= settings.max_newton {
                failed = true;
                break;
            }
            let Some((_, g, h)) = smooth.derivatives(&x) else {
                failed = true;
                break;
            };
            let mut grad = g * t;
            let mut hess = h * t;
            for row in rows {
                let v = row.eval(&x);
                for &(i, a) in &row.coeffs {
                    grad[i] -= a / v;
                    for &(j, b) in &row.coeffs {
                        hess[(i, j)] += a * b / (v * v);
                    }
                }
            }
            let gz = basis.tr_mul(&grad);
            let hz = basis.tr_mul(&(&hess * basis));
            let hz = (&hz + hz.transpose()) * 0.5;
            let eig = SymmetricEigen::new(hz);
            let scale = eig.eigenvalues.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
            let floor = 1e-13 * scale.max(f64::MIN_POSITIVE);
            let proj = eig.eigenvectors.tr_mul(&gz);
            let scaled = DVector::from_iterator(
                proj.len(),
                proj.iter().zip(eig.eigenvalues.iter()).map(|(p, l)| -p / l.abs().max(floor)),
            );
            let dz = &eig.eigenvectors * scaled;
            let dec2 = -gz.dot(&dz);
            newton += 1;
            if !(dec2 > 0.0) || dec2 / 2.0 <= settings.centering_tol {
                break;
            }
            let dx = basis * dz;
            let here = barrier.merit(t, &x).unwrap_or(f64::INFINITY);
            let mut step = 1.0;
            let mut accepted = false;
            while step > 1e-14 {
                let cand = &x + &dx * step;
                if let Some(v) = barrier.merit(t, &cand) {
                    // near the center the merit change is below round-off, so
                    // full steps are taken on trust
                    if (step == 1.0 && dec2 < 0.1) || v <= here - 0.25 * step * dec2 {
                        x = cand;
                        accepted = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        let value = smooth.value(&x).unwrap_or(f64::INFINITY);
        let gap = m / t;
        if failed || !value.is_finite() {
            return BarrierOutcome { x, value, gap_bound: gap, newton_iterations: newton, converged: false };
        }
        if gap <= settings.gap_rel * value.abs() + settings.gap_abs {
            return BarrierOutcome { x, value, gap_bound: gap, newton_iterations: newton, converged: true };
        }
        t *= settings.mu;
    }
}
