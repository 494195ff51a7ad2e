//! Products of unit-modulus block-diagonal phase matrices and the Riemannian
//! geometry needed to optimize over them.
//!
//! A phase matrix is zero outside a fixed block-diagonal support and has
//! unit-modulus entries on it. Each supported entry lives on the complex
//! circle, so the manifold is a product of circles embedded in `ℂ^{m×n}`
//! with the real inner product `Re Tr(Aᴴ B)`.

mod rcg;

use std::ops::Range;
use std::sync::Arc;

use rand::Rng;

pub use rcg::{
    backtracking_step, rcg_minimize, FnObjective, LineSearchStep, ProductObjective, RcgOutcome,
    RcgParams, RcgState, StopReason,
};

use crate::linalg::{fro2, re_inner};
use crate::{CMatrix, Error, Result, C64};

/// Modulus tolerance for feasibility checks.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Entries below this modulus cannot be retracted.
pub const RETRACTION_FLOOR: f64 = 1e-15;

/// Block-diagonal support: blocks are laid along the diagonal in order,
/// each starting where the previous one ended in both rows and columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockDiagPattern {
    blocks: Vec<(usize, usize)>,
    total_rows: usize,
    total_cols: usize,
    /// Supported column range for every row.
    row_cols: Vec<Range<usize>>,
}

impl BlockDiagPattern {
    pub fn new(blocks: Vec<(usize, usize)>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidArgument("pattern needs at least one block".into()));
        }
        if let Some(b) = blocks.iter().find(|(r, c)| *r == 0 || *c == 0) {
            return Err(Error::InvalidArgument(format!("empty block {b:?}")));
        }
        let mut row_cols = Vec::new();
        let mut col = 0;
        for &(r, c) in &blocks {
            for _ in 0..r {
                row_cols.push(col..col + c);
            }
            col += c;
        }
        let total_rows = row_cols.len();
        Ok(Self {
            blocks,
            total_rows,
            total_cols: col,
            row_cols,
        })
    }

    /// `count` identical blocks of shape `rows × cols`.
    pub fn uniform(count: usize, rows: usize, cols: usize) -> Result<Self> {
        Self::new(vec![(rows, cols); count])
    }

    pub fn blocks(&self) -> &[(usize, usize)] {
        &self.blocks
    }

    pub fn total_rows(&self) -> usize {
        self.total_rows
    }

    pub fn total_cols(&self) -> usize {
        self.total_cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.total_rows, self.total_cols)
    }

    pub fn is_supported(&self, row: usize, col: usize) -> bool {
        row < self.total_rows && self.row_cols[row].contains(&col)
    }

    pub fn row_support(&self, row: usize) -> Range<usize> {
        self.row_cols[row].clone()
    }

    /// Number of supported entries.
    pub fn support_len(&self) -> usize {
        self.blocks.iter().map(|(r, c)| r * c).sum()
    }

    /// Iterator over supported `(row, col)` positions, row-major.
    pub fn support(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.row_cols
            .iter()
            .enumerate()
            .flat_map(|(i, cols)| cols.clone().map(move |j| (i, j)))
    }

    fn check_shape(&self, m: &CMatrix) -> Result<()> {
        if m.shape() != self.shape() {
            return Err(Error::shape(self.shape(), m.shape()));
        }
        Ok(())
    }

    /// Copy of `m` with off-support entries zeroed.
    pub fn mask(&self, m: &CMatrix) -> Result<CMatrix> {
        self.check_shape(m)?;
        let mut out = CMatrix::zeros(self.total_rows, self.total_cols);
        for (i, cols) in self.row_cols.iter().enumerate() {
            for j in cols.clone() {
                out[(i, j)] = m[(i, j)];
            }
        }
        Ok(out)
    }
}

/// Feasible point of a phase-matrix manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMatrix {
    pattern: Arc<BlockDiagPattern>,
    values: CMatrix,
}

impl PhaseMatrix {
    /// Validates the unit-modulus and zero-off-support invariants.
    pub fn new(pattern: Arc<BlockDiagPattern>, values: CMatrix) -> Result<Self> {
        let x = Self { pattern, values };
        x.check_feasible()?;
        Ok(x)
    }

    /// Wraps `values` without validation; [`rcg_minimize`] and
    /// [`PhaseMatrix::check_feasible`] still reject infeasible inputs.
    pub fn new_unchecked(pattern: Arc<BlockDiagPattern>, values: CMatrix) -> Self {
        Self { pattern, values }
    }

    /// Supported entries `exp(j·phase(row, col))`.
    pub fn from_phases(pattern: Arc<BlockDiagPattern>, mut phase: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = CMatrix::zeros(pattern.total_rows, pattern.total_cols);
        for (i, j) in pattern.support() {
            values[(i, j)] = C64::from_polar(1.0, phase(i, j));
        }
        Self { pattern, values }
    }

    /// All supported entries equal to one.
    pub fn zero_phase(pattern: Arc<BlockDiagPattern>) -> Self {
        Self::from_phases(pattern, |_, _| 0.0)
    }

    /// Independent uniform phases on `[0, 2π)`.
    pub fn random<R: Rng + ?Sized>(pattern: Arc<BlockDiagPattern>, rng: &mut R) -> Self {
        Self::from_phases(pattern, |_, _| rng.gen_range(0.0..std::f64::consts::TAU))
    }

    pub fn pattern(&self) -> &BlockDiagPattern {
        &self.pattern
    }

    pub fn shared_pattern(&self) -> Arc<BlockDiagPattern> {
        Arc::clone(&self.pattern)
    }

    pub fn values(&self) -> &CMatrix {
        &self.values
    }

    pub fn into_values(self) -> CMatrix {
        self.values
    }

    pub fn shape(&self) -> (usize, usize) {
        self.values.shape()
    }

    /// Block origins `(row, col)` with block shapes.
    fn block_spans(&self) -> impl Iterator<Item = ((usize, usize), (usize, usize))> + '_ {
        self.pattern.blocks.iter().scan((0, 0), |origin, &shape| {
            let at = *origin;
            *origin = (at.0 + shape.0, at.1 + shape.1);
            Some((at, shape))
        })
    }

    /// `X · A`, multiplying only the supported blocks of `X`.
    ///
    /// # Panics
    /// If `a` has a different number of rows than `X` has columns.
    pub fn left_of(&self, a: &CMatrix) -> CMatrix {
        assert_eq!(a.nrows(), self.values.ncols(), "X·A shape mismatch");
        let n = self.values.nrows();
        let a_rows = a.nrows();
        let mut out = CMatrix::zeros(n, a.ncols());
        let (x, a, data) = (self.values.as_slice(), a.as_slice(), out.as_mut_slice());
        let mut x_row = Vec::new();
        for ((r0, c0), (rb, cb)) in self.block_spans() {
            for r in r0..r0 + rb {
                x_row.clear();
                x_row.extend((c0..c0 + cb).map(|k| x[k * n + r]));
                for (j, a_col) in a.chunks_exact(a_rows).enumerate() {
                    data[j * n + r] = a_col[c0..c0 + cb].iter().zip(&x_row).map(|(av, xv)| av * xv).sum();
                }
            }
        }
        out
    }

    /// `A · X`, multiplying only the supported blocks of `X`.
    ///
    /// # Panics
    /// If `a` has a different number of columns than `X` has rows.
    pub fn right_of(&self, a: &CMatrix) -> CMatrix {
        assert_eq!(a.ncols(), self.values.nrows(), "A·X shape mismatch");
        let (m, n) = (a.nrows(), self.values.nrows());
        let mut out = CMatrix::zeros(m, self.values.ncols());
        let (x, a) = (self.values.as_slice(), a.as_slice());
        let data = out.as_mut_slice();
        for ((r0, c0), (rb, cb)) in self.block_spans() {
            for j in c0..c0 + cb {
                let out_col = &mut data[j * m..(j + 1) * m];
                for r in r0..r0 + rb {
                    let xv = x[j * n + r];
                    for (o, av) in out_col.iter_mut().zip(&a[r * m..(r + 1) * m]) {
                        *o += av * xv;
                    }
                }
            }
        }
        out
    }

    pub fn check_feasible(&self) -> Result<()> {
        self.pattern.check_shape(&self.values)?;
        for i in 0..self.values.nrows() {
            for j in 0..self.values.ncols() {
                let z = self.values[(i, j)];
                if self.pattern.is_supported(i, j) {
                    if (z.norm() - 1.0).abs() > FEASIBILITY_TOL {
                        return Err(Error::Infeasible(format!(
                            "entry ({i}, {j}) has modulus {}",
                            z.norm()
                        )));
                    }
                } else if z != C64::new(0.0, 0.0) {
                    return Err(Error::Infeasible(format!("off-support entry ({i}, {j}) is {z}")));
                }
            }
        }
        Ok(())
    }
}

/// Element of the tangent space at some phase matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector(CMatrix);

impl TangentVector {
    pub fn zeros(shape: (usize, usize)) -> Self {
        Self(CMatrix::zeros(shape.0, shape.1))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn norm(&self) -> f64 {
        fro2(&self.0).sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self(&self.0 * C64::new(s, 0.0))
    }

    /// `self + s·other`, for direction updates.
    pub fn add_scaled(&self, s: f64, other: &TangentVector) -> Self {
        Self(&self.0 + &other.0 * C64::new(s, 0.0))
    }

    /// Largest `|Re(Z ⊙ conj(X))|` over all entries, zero for tangent vectors.
    pub fn tangency_residual(&self, x: &PhaseMatrix) -> f64 {
        self.0
            .iter()
            .zip(x.values.iter())
            .map(|(z, v)| (z * v.conj()).re.abs())
            .fold(0.0, f64::max)
    }
}

/// `Z − Re(Z ⊙ conj(X)) ⊙ X` on the support, zero elsewhere.
fn project_onto(x: &PhaseMatrix, z: &CMatrix) -> Result<TangentVector> {
    let pattern = &x.pattern;
    pattern.check_shape(z)?;
    let mut out = CMatrix::zeros(pattern.total_rows, pattern.total_cols);
    for (i, cols) in pattern.row_cols.iter().enumerate() {
        for j in cols.clone() {
            let g = z[(i, j)];
            let xv = x.values[(i, j)];
            out[(i, j)] = g - xv * (g * xv.conj()).re;
        }
    }
    Ok(TangentVector(out))
}

/// Orthogonal projection of a Euclidean gradient onto the tangent space at `x`.
pub fn project_tangent(x: &PhaseMatrix, g: &CMatrix) -> Result<TangentVector> {
    project_onto(x, g)
}

/// Elementwise normalization of the supported entries; off-support entries
/// are dropped.
pub fn retract(x_raw: &CMatrix, pattern: Arc<BlockDiagPattern>) -> Result<PhaseMatrix> {
    pattern.check_shape(x_raw)?;
    let mut values = CMatrix::zeros(pattern.total_rows, pattern.total_cols);
    for (i, cols) in pattern.row_cols.iter().enumerate() {
        for j in cols.clone() {
            let z = x_raw[(i, j)];
            let m = z.norm();
            if !(m >= RETRACTION_FLOOR) {
                return Err(Error::DegenerateRetraction { row: i, col: j, modulus: m });
            }
            values[(i, j)] = z / m;
        }
    }
    Ok(PhaseMatrix { pattern, values })
}

/// Vector transport by projection onto the tangent space at `x_new`.
pub fn transport(pi_prev: &TangentVector, x_new: &PhaseMatrix) -> Result<TangentVector> {
    project_onto(x_new, &pi_prev.0)
}

/// `Re Tr(Aᴴ B)`.
pub fn metric(a: &TangentVector, b: &TangentVector) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::shape(a.shape(), b.shape()));
    }
    Ok(re_inner(&a.0, &b.0))
}

/// `⟨g_new, g_new − T(g_old)⟩ / ⟨g_old, g_old⟩`.
pub fn polak_ribiere(
    g_new: &TangentVector,
    g_old_transported: &TangentVector,
    g_old: &TangentVector,
) -> Result<f64> {
    let denom = metric(g_old, g_old)?;
    if !(denom > 0.0) {
        return Err(Error::ZeroGradient);
    }
    let num = metric(g_new, g_new)? - metric(g_new, g_old_transported)?;
    Ok(num / denom)
}
