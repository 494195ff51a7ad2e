//! Small dense linear-algebra helpers shared by the MISO and MIMO solvers.

use nalgebra::{Cholesky, SymmetricEigen};

use crate::{CMatrix, C64};

/// `(A + Aᴴ) / 2`.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * C64::new(0.5, 0.0)
}

/// Natural-log determinant of a Hermitian positive-definite matrix.
/// Returns `None` if the Cholesky factorization fails.
pub fn ln_det_hpd(a: &CMatrix) -> Option<f64> {
    let chol = Cholesky::new(a.clone())?;
    let l = chol.l_dirty();
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        let d = l[(i, i)].re;
        if !(d > 0.0) {
            return None;
        }
        acc += d.ln();
    }
    Some(2.0 * acc)
}

/// Inverse of a Hermitian positive-definite matrix, symmetrized.
pub fn inv_hpd(a: &CMatrix) -> Option<CMatrix> {
    let chol = Cholesky::new(a.clone())?;
    Some(hermitian_part(&chol.inverse()))
}

/// Solves `A X = B` for Hermitian positive-definite `A`.
pub fn solve_hpd(a: &CMatrix, b: &CMatrix) -> Option<CMatrix> {
    let chol = Cholesky::new(a.clone())?;
    Some(chol.solve(b))
}

/// Inverse with a `1e-12·I` fallback; the flag reports whether the fallback
/// was needed.
pub fn inv_hpd_regularized(a: &CMatrix) -> (CMatrix, bool) {
    if let Some(inv) = inv_hpd(a) {
        return (inv, false);
    }
    let n = a.nrows();
    let reg = a + CMatrix::identity(n, n) * C64::new(1e-12, 0.0);
    match inv_hpd(&reg) {
        Some(inv) => (inv, true),
        None => {
            let inv = reg
                .try_inverse()
                .unwrap_or_else(|| CMatrix::from_element(n, n, C64::new(f64::NAN, 0.0)));
            (hermitian_part(&inv), true)
        }
    }
}

/// Squared Frobenius norm.
pub fn fro2(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// `Re Tr(Aᴴ B)` without forming the product.
pub fn re_inner(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Water-level search shared by the FP and WMMSE digital precoders.
///
/// For a Hermitian PSD `gram` and right-hand side `rhs`, the solution family
/// `X(t) = (gram + t·I)⁻¹ rhs` has power `scale·‖X(t)‖_F²` decreasing in
/// `t ≥ 0`. The eigendecomposition is computed once so every bisection probe
/// costs a diagonal rescale.
pub struct RegularizedSolve {
    basis: CMatrix,
    eigvals: Vec<f64>,
    /// Row energies of `Qᴴ rhs`, one per eigenvector.
    energy: Vec<f64>,
    projected: CMatrix,
    null: Vec<bool>,
    scale: f64,
}

/// Outcome of [`RegularizedSolve::min_multiplier`].
#[derive(Debug, Clone)]
pub struct MultiplierSolution {
    pub multiplier: f64,
    pub solution: CMatrix,
    pub power: f64,
}

impl RegularizedSolve {
    pub fn new(gram: &CMatrix, rhs: &CMatrix, scale: f64) -> Self {
        let eig = SymmetricEigen::new(hermitian_part(gram));
        let basis = eig.eigenvectors;
        let dmax = eig.eigenvalues.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
        let eigvals: Vec<f64> = eig.eigenvalues.iter().map(|d| d.max(0.0)).collect();
        let projected = basis.adjoint() * rhs;
        let total: f64 = fro2(rhs);
        let energy: Vec<f64> = (0..projected.nrows())
            .map(|k| projected.row(k).iter().map(|z| z.norm_sqr()).sum())
            .collect();
        let null = eigvals
            .iter()
            .zip(&energy)
            .map(|(&d, &e)| d <= 1e-12 * dmax.max(f64::MIN_POSITIVE) && e <= 1e-24 * total)
            .collect();
        Self {
            basis,
            eigvals,
            energy,
            projected,
            null,
            scale,
        }
    }

    /// `scale·‖X(t)‖_F²`; directions in the joint null space of `gram` and
    /// `rhs` are dropped (minimum-norm solution).
    pub fn power(&self, t: f64) -> f64 {
        let mut p = 0.0;
        for k in 0..self.eigvals.len() {
            if self.null[k] || self.energy[k] == 0.0 {
                continue;
            }
            let d = self.eigvals[k] + t;
            if d <= 0.0 {
                return f64::INFINITY;
            }
            p += self.energy[k] / (d * d);
        }
        self.scale * p
    }

    pub fn solution(&self, t: f64) -> CMatrix {
        let mut scaled = self.projected.clone();
        for k in 0..self.eigvals.len() {
            let d = self.eigvals[k] + t;
            let f = if self.null[k] || d <= 0.0 { 0.0 } else { 1.0 / d };
            scaled.row_mut(k).scale_mut(f);
        }
        &self.basis * scaled
    }

    /// Smallest `t ≥ 0` with `power(t) ≤ budget`, found by doubling an upper
    /// bracket and bisecting. Terminates when the power is within `rel_tol`
    /// of the budget or the bracket collapses below `1e-15` relative.
    pub fn min_multiplier(&self, budget: f64, rel_tol: f64) -> MultiplierSolution {
        let p0 = self.power(0.0);
        if p0 <= budget {
            return MultiplierSolution {
                multiplier: 0.0,
                solution: self.solution(0.0),
                power: p0,
            };
        }
        let mut lo = 0.0_f64;
        let mut hi = 1e-12_f64;
        while self.power(hi) > budget {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                break;
            }
        }
        let mut p_hi = self.power(hi);
        for _ in 0..400 {
            if (budget - p_hi) <= rel_tol * budget || hi - lo <= 1e-15 * hi {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let p_mid = self.power(mid);
            if p_mid > budget {
                lo = mid;
            } else {
                hi = mid;
                p_hi = p_mid;
            }
        }
        MultiplierSolution {
            multiplier: hi,
            solution: self.solution(hi),
            power: p_hi,
        }
    }
}
