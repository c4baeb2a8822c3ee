//! Dense complex linear algebra and fixed-step integration for dimensions 2 to 8.
//!
//! Everything here is a pure function of its inputs. Matrices are small enough that an
//! eigendecomposition gives the exact Hermitian exponential, so no Pade scaling is needed
//! on the hot path; the general exponential is only used by the Liouville-space oracle.

use crate::error::{NhqcError, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

pub type C64 = Complex64;

/// Column state vector in the system basis.
pub type StateVector = DVector<C64>;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const UNITARY_TOL: f64 = 1e-9;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `e^{i x}`
#[inline]
pub fn cis(x: f64) -> C64 {
    C64::from_polar(1.0, x)
}

pub fn basis_state(dim: usize, index: usize) -> StateVector {
    let mut v = StateVector::zeros(dim);
    v[index] = C64::new(1.0, 0.0);
    v
}

/// Dense square complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        ComplexMatrix(DMatrix::identity(dim, dim))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        ComplexMatrix(DMatrix::from_fn(dim, dim, f))
    }

    /// Builds a matrix from `dim * dim` entries in row-major order.
    pub fn from_row_slice(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(NhqcError::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        Ok(ComplexMatrix(DMatrix::from_row_slice(dim, dim, entries)))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, |i, j| if i == j { C64::new(diag[i], 0.0) } else { C64::new(0.0, 0.0) })
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, |i, j| if i == j { diag[i] } else { C64::new(0.0, 0.0) })
    }

    /// `|a><b|`
    pub fn outer(a: &StateVector, b: &StateVector) -> Self {
        ComplexMatrix(a * b.adjoint())
    }

    /// Square matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[StateVector]) -> Result<Self> {
        Self::from_dmatrix(DMatrix::from_columns(columns))
    }

    pub fn from_dmatrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(NhqcError::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        Ok(ComplexMatrix(m))
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// Row-major copy of the entries.
    pub fn entries(&self) -> Vec<C64> {
        let d = self.dim();
        let mut out = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.0[(i, j)] = v;
    }

    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, v: C64) {
        self.0[(i, j)] += v;
    }

    pub fn dagger(&self) -> Self {
        ComplexMatrix(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexMatrix(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        ComplexMatrix(self.0.map(|z| z * s))
    }

    /// `[self, other]`
    pub fn commutator(&self, other: &Self) -> Self {
        ComplexMatrix(&self.0 * &other.0 - &other.0 * &self.0)
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        &self.0 * v
    }

    /// `<a| M |b>`
    pub fn matrix_element(&self, a: &StateVector, b: &StateVector) -> C64 {
        a.dotc(&(&self.0 * b))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max |M - M^dagger|`
    pub fn hermitian_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `max |M^dagger M - I|`
    pub fn unitary_defect(&self) -> f64 {
        let p = self.0.adjoint() * &self.0;
        let d = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..d {
            for j in 0..d {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((p[(i, j)] - target).norm());
            }
        }
        worst
    }

    /// `(M + M^dagger) / 2`
    pub fn hermitian_part(&self) -> Self {
        ComplexMatrix((&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0))
    }

    /// Restriction to the rows and columns in `indices`, in the given order.
    pub fn submatrix(&self, indices: &[usize]) -> Self {
        let n = indices.len();
        Self::from_fn(n, |i, j| self.0[(indices[i], indices[j])])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn ensure_hermitian(&self) -> Result<()> {
        let defect = self.hermitian_defect();
        if defect > HERMITIAN_TOL * self.max_abs().max(1.0) {
            return Err(NhqcError::NotHermitian {
                defect,
                tolerance: HERMITIAN_TOL,
            });
        }
        Ok(())
    }

    /// Kronecker product `self (x) other`.
    pub fn kron(&self, other: &Self) -> Self {
        ComplexMatrix(self.0.kronecker(&other.0))
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Add for ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 + rhs.0)
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        self.0 += &rhs.0;
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Sub for ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 - rhs.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 * rhs.0)
    }
}

impl Mul<C64> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: C64) -> ComplexMatrix {
        ComplexMatrix(&self.0 * rhs)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

/// Uniform sampling of `[t_start, t_end]` with `steps` intervals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    t_start: f64,
    t_end: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, steps: usize) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite()) {
            return Err(NhqcError::InvalidGrid("non-finite bounds".into()));
        }
        if t_end <= t_start {
            return Err(NhqcError::InvalidGrid(format!(
                "t_end ({t_end}) must exceed t_start ({t_start})"
            )));
        }
        if steps < 2 {
            return Err(NhqcError::InvalidGrid(format!("need at least 2 steps, got {steps}")));
        }
        Ok(TimeGrid { t_start, t_end, steps })
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn h(&self) -> f64 {
        (self.t_end - self.t_start) / self.steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.steps {
            self.t_end
        } else {
            self.t_start + k as f64 * self.h()
        }
    }

    /// All `steps + 1` nodes including both endpoints.
    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.time(k)).collect()
    }
}

/// `exp(-i H dt)` through the eigendecomposition of the Hermitian `H`.
pub fn expm_hermitian(h: &ComplexMatrix, dt: f64) -> Result<ComplexMatrix> {
    h.ensure_hermitian()?;
    Ok(expm_hermitian_unchecked(h, dt))
}

pub(crate) fn expm_hermitian_unchecked(h: &ComplexMatrix, dt: f64) -> ComplexMatrix {
    let eig = h.0.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&lambda| cis(-lambda * dt)),
    );
    let mut scaled = v.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    ComplexMatrix(scaled * v.adjoint())
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = h.0.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    ev
}

pub fn min_eigenvalue_hermitian(h: &ComplexMatrix) -> f64 {
    h.0.clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(f64::INFINITY, |m, &x| m.min(x))
}

/// General matrix exponential `exp(M)`, used only for non-Hermitian generators.
pub fn expm_general(m: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(m.0.clone().exp())
}

/// Fixed-step classical RK4 for `dy/dt = deriv(t, y)`; returns `y(t_end)`.
pub fn rk4_propagate<F>(deriv: F, y0: &ComplexMatrix, grid: &TimeGrid) -> Result<ComplexMatrix>
where
    F: Fn(f64, &ComplexMatrix) -> ComplexMatrix,
{
    rk4_propagate_observed(deriv, y0, grid, |_, _, _| Ok(()))
}

/// RK4 that reports every node (including the initial one) to `observer`.
/// The observer may abort the integration by returning an error.
pub fn rk4_propagate_observed<F, O>(
    deriv: F,
    y0: &ComplexMatrix,
    grid: &TimeGrid,
    mut observer: O,
) -> Result<ComplexMatrix>
where
    F: Fn(f64, &ComplexMatrix) -> ComplexMatrix,
    O: FnMut(usize, f64, &ComplexMatrix) -> Result<()>,
{
    let h = grid.h();
    let half = C64::new(h / 2.0, 0.0);
    let full = C64::new(h, 0.0);
    let sixth = C64::new(h / 6.0, 0.0);
    let two = C64::new(2.0, 0.0);
    let mut y = y0.clone();
    observer(0, grid.t_start(), &y)?;
    for k in 0..grid.steps() {
        let t = grid.time(k);
        let k1 = deriv(t, &y);
        let k2 = deriv(t + h / 2.0, &ComplexMatrix(&y.0 + &k1.0 * half));
        let k3 = deriv(t + h / 2.0, &ComplexMatrix(&y.0 + &k2.0 * half));
        let k4 = deriv(t + h, &ComplexMatrix(&y.0 + &k3.0 * full));
        y.0 += (k1.0 + (k2.0 + k3.0) * two + k4.0) * sixth;
        if !y.is_finite() {
            return Err(NhqcError::NonFinite { step: k + 1, t: t + h });
        }
        observer(k + 1, grid.time(k + 1), &y)?;
    }
    Ok(y)
}

/// Trapezoidal rule on samples taken at the `steps + 1` grid nodes.
pub fn quad_trapz(samples: &[f64], grid: &TimeGrid) -> Result<f64> {
    if samples.len() != grid.steps() + 1 {
        return Err(NhqcError::DimensionMismatch {
            expected: grid.steps() + 1,
            got: samples.len(),
        });
    }
    if let Some(k) = samples.iter().position(|x| !x.is_finite()) {
        return Err(NhqcError::NonFinite { step: k, t: grid.time(k) });
    }
    let n = samples.len();
    let inner: f64 = samples[1..n - 1].iter().sum();
    Ok(grid.h() * (inner + 0.5 * (samples[0] + samples[n - 1])))
}

/// Trapezoidal integral of `f` sampled on `grid`.
pub fn quad_trapz_fn(f: impl Fn(f64) -> f64, grid: &TimeGrid) -> Result<f64> {
    let samples: Vec<f64> = grid.times().into_iter().map(f).collect();
    quad_trapz(&samples, grid)
}

const GAUSS_OFFSET: f64 = 0.288_675_134_594_812_9; // sqrt(3)/6

/// Independent propagation oracle for `i dU/dt = H(t) U` over `[t0, t1]`.
///
/// Uses the fourth-order Magnus expansion at the two Gauss points of each uniform slice,
/// `X = h/2 (H1 + H2) + i sqrt(3)/12 h^2 [H1, H2]`, and multiplies `exp(-i X)` slices.
/// Consecutive slices with identical generators reuse the previous exponential.
pub fn oracle_unitary<F>(hamiltonian: F, t0: f64, t1: f64, slices: usize) -> Result<ComplexMatrix>
where
    F: Fn(f64) -> ComplexMatrix,
{
    let grid = TimeGrid::new(t0, t1, slices.max(2))?;
    let h = grid.h();
    let coef = C64::new(0.0, 3f64.sqrt() / 12.0 * h * h);
    let mut u: Option<ComplexMatrix> = None;
    let mut cache: Option<(ComplexMatrix, ComplexMatrix)> = None;
    for k in 0..grid.steps() {
        let t = grid.time(k);
        let h1 = hamiltonian(t + (0.5 - GAUSS_OFFSET) * h);
        let h2 = hamiltonian(t + (0.5 + GAUSS_OFFSET) * h);
        let step = if h1 == h2 {
            match &cache {
                Some((key, val)) if *key == h1 => val.clone(),
                _ => {
                    h1.ensure_hermitian()?;
                    let val = expm_hermitian_unchecked(&h1, h);
                    cache = Some((h1, val.clone()));
                    val
                }
            }
        } else {
            let x = ComplexMatrix((&h1.0 + &h2.0) * C64::new(h / 2.0, 0.0))
                + ComplexMatrix(h1.commutator(&h2).0 * coef);
            x.ensure_hermitian()?;
            expm_hermitian_unchecked(&x, 1.0)
        };
        u = Some(match u {
            None => step,
            Some(prev) => &step * &prev,
        });
    }
    Ok(u.expect("at least two slices"))
}

/// Fourth-order Magnus oracle for a general linear generator `dy/dt = L(t) y`,
/// returning the propagator over `[t0, t1]`.
pub fn oracle_generator<F>(generator: F, t0: f64, t1: f64, slices: usize) -> Result<ComplexMatrix>
where
    F: Fn(f64) -> ComplexMatrix,
{
    let grid = TimeGrid::new(t0, t1, slices.max(2))?;
    let h = grid.h();
    let coef = C64::new(3f64.sqrt() / 12.0 * h * h, 0.0);
    let mut prop: Option<ComplexMatrix> = None;
    let mut cache: Option<(ComplexMatrix, ComplexMatrix)> = None;
    for k in 0..grid.steps() {
        let t = grid.time(k);
        let l1 = generator(t + (0.5 - GAUSS_OFFSET) * h);
        let l2 = generator(t + (0.5 + GAUSS_OFFSET) * h);
        let step = if l1 == l2 {
            match &cache {
                Some((key, val)) if *key == l1 => val.clone(),
                _ => {
                    let val = expm_general(&l1.scale_real(h));
                    cache = Some((l1, val.clone()));
                    val
                }
            }
        } else {
            let omega = ComplexMatrix((&l1.0 + &l2.0) * C64::new(h / 2.0, 0.0))
                + ComplexMatrix(l2.commutator(&l1).0 * coef);
            expm_general(&omega)
        };
        if !step.is_finite() {
            return Err(NhqcError::NonFinite { step: k, t });
        }
        prop = Some(match prop {
            None => step,
            Some(prev) => &step * &prev,
        });
    }
    Ok(prop.expect("at least two slices"))
}

/// `|Tr(X^dagger Y)| / d`: equals 1 exactly when `Y = e^{i a} X` for unitary `X`.
pub fn global_phase_overlap(x: &ComplexMatrix, y: &ComplexMatrix) -> f64 {
    (x.dagger() * y.clone()).trace().norm() / x.dim() as f64
}

/// Max-entry distance between `x` and `y` after removing the best global phase.
pub fn phase_aligned_distance(x: &ComplexMatrix, y: &ComplexMatrix) -> f64 {
    let overlap = (x.dagger() * y.clone()).trace();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    x.scale(phase).max_abs_diff(y)
}

/// Pauli matrices and the rotation `exp(-i gamma/2 n.sigma)`.
pub mod pauli {
    use super::*;

    pub fn sigma_x() -> ComplexMatrix {
        ComplexMatrix::from_fn(2, |i, j| if i != j { c(1.0, 0.0) } else { c(0.0, 0.0) })
    }

    pub fn sigma_y() -> ComplexMatrix {
        ComplexMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 1) => c(0.0, -1.0),
            (1, 0) => c(0.0, 1.0),
            _ => c(0.0, 0.0),
        })
    }

    pub fn sigma_z() -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(&[1.0, -1.0])
    }

    /// `exp(-i gamma/2 n.sigma)` with `n = (sin t cos p, sin t sin p, cos t)`.
    pub fn rotation(gamma: f64, theta: f64, phi: f64) -> ComplexMatrix {
        let (nx, ny, nz) = (theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
        let cg = (gamma / 2.0).cos();
        let sg = (gamma / 2.0).sin();
        // cos(g/2) I - i sin(g/2) n.sigma
        ComplexMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 0) => c(cg, -sg * nz),
            (1, 1) => c(cg, sg * nz),
            (0, 1) => c(-sg * ny, -sg * nx),
            (1, 0) => c(sg * ny, -sg * nx),
            _ => unreachable!(),
        })
    }
}
