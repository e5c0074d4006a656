//! Dense complex linear algebra on the small Hilbert spaces of the gate:
//! single qubits (dim 2), qubit pairs (dim 4) and the full two-atom,
//! two-photon register (dim 16).
//!
//! Basis ordering is global. A qubit is `{|0>, |1>}` and tensor products put
//! the left factor on the slow index, so `|0>_1 |1>_2` is basis index 1.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Absolute tolerance for Hermiticity and unit trace.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted for a density matrix.
pub const PSD_TOL: f64 = -1e-10;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: DVector<C64>,
}

impl PureState {
    /// Normalizes `amps`. Rejects empty and zero vectors.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        Self::from_vector(DVector::from_vec(amps))
    }

    pub fn from_vector(amps: DVector<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidState("empty state vector".into()));
        }
        let norm = amps.norm();
        if !norm.is_finite() || norm < 1e-300 {
            return Err(Error::InvalidState(format!("cannot normalize vector of norm {norm}")));
        }
        Ok(Self { amps: amps.unscale(norm) })
    }

    /// Computational basis vector `|index>` of dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index {index} out of range for dim {dim}");
        let mut amps = DVector::from_element(dim, ZERO);
        amps[index] = ONE;
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amps[index]
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        same_dim(self.dim(), other.dim())?;
        Ok(self.amps.dotc(&other.amps))
    }

    pub fn scale_phase(&self, chi: f64) -> PureState {
        Self { amps: self.amps.map(|a| a * C64::from_polar(1.0, chi)) }
    }

    pub fn to_density(&self) -> DensityMatrix {
        let m = &self.amps * self.amps.adjoint();
        DensityMatrix { m: hermitize(&m) }
    }
}

/// General square matrix; may be non-Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    m: DMatrix<C64>,
}

impl Operator {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "operator must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(Self { m })
    }

    pub fn from_rows(rows: &[&[C64]]) -> Result<Self> {
        let n = rows.len();
        let mut m = DMatrix::from_element(n, n, ZERO);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        Ok(Self { m })
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: DMatrix::identity(dim, dim) }
    }

    pub fn projector(state: &PureState) -> Self {
        Self { m: state.amps.clone() * state.amps.adjoint() }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn adjoint(&self) -> Operator {
        Self { m: self.m.adjoint() }
    }

    pub fn scale(&self, s: f64) -> Operator {
        Self { m: self.m.scale(s) }
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        same_dim(self.dim(), other.dim())?;
        Ok(Self { m: &self.m + &other.m })
    }

    pub fn compose(&self, other: &Operator) -> Result<Operator> {
        same_dim(self.dim(), other.dim())?;
        Ok(Self { m: &self.m * &other.m })
    }

    /// Unnormalized image `self |psi>`.
    pub fn apply(&self, psi: &PureState) -> Result<DVector<C64>> {
        same_dim(self.dim(), psi.dim())?;
        Ok(&self.m * &psi.amps)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        max_abs_diff(&self.m, &self.m.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// Eigenvalues in ascending order. Only meaningful for Hermitian operators.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        sorted_eigenvalues(&hermitize(&self.m))
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity within the crate tolerances.
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "density matrix must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let dev = max_abs_diff(&m, &m.adjoint());
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > HERMITIAN_TOL || tr.im.abs() > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let m = hermitize(&m);
        let min_eig = sorted_eigenvalues(&m)[0];
        if min_eig < PSD_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:.3e}")));
        }
        Ok(Self { m })
    }

    /// Hermitizes and divides by the trace, then validates. For matrices that
    /// are PSD up to rounding, such as sums of weighted states.
    pub fn from_unnormalized(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::Dimension(format!("non-square {}x{}", m.nrows(), m.ncols())));
        }
        let h = hermitize(&m);
        let tr = h.trace().re;
        if !(tr.is_finite() && tr > 0.0) {
            return Err(Error::InvalidState(format!("cannot normalize matrix with trace {tr}")));
        }
        Self::new(h.unscale(tr))
    }

    /// Row-major construction followed by the same validation as [`DensityMatrix::new`].
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let slices: Vec<&[C64]> = rows.iter().map(|r| r.as_slice()).collect();
        Self::new(Operator::from_rows(&slices)?.into_matrix())
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { m: DMatrix::identity(dim, dim).unscale(dim as f64) }
    }

    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        let m = DMatrix::from_diagonal(&DVector::from_iterator(probs.len(), probs.iter().map(|p| c(*p, 0.0))));
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.m[(i, j)]
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        sorted_eigenvalues(&self.m)
    }

    /// Convex combination `w * self + (1 - w) * other`.
    pub fn mix(&self, other: &DensityMatrix, w: f64) -> Result<DensityMatrix> {
        same_dim(self.dim(), other.dim())?;
        crate::error::check_unit("mixing weight", w)?;
        Self::from_unnormalized(self.m.scale(w) + other.m.scale(1.0 - w))
    }

    /// `U rho U^dagger` for unitary `U`.
    pub fn conjugate_by(&self, u: &Operator) -> Result<DensityMatrix> {
        same_dim(self.dim(), u.dim())?;
        Self::from_unnormalized(&u.m * &self.m * u.m.adjoint())
    }
}

fn same_dim(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::Dimension(format!("{a} vs {b}")))
    }
}

pub(crate) fn hermitize(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()).scale(0.5)
}

fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub(crate) fn sorted_eigenvalues(h: &DMatrix<C64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(h.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Kronecker product; the left operand is the slow index.
pub trait Tensor {
    fn tensor(&self, other: &Self) -> Self;
}

impl Tensor for PureState {
    fn tensor(&self, other: &Self) -> Self {
        Self { amps: self.amps.kronecker(&other.amps) }
    }
}

impl Tensor for Operator {
    fn tensor(&self, other: &Self) -> Self {
        Self { m: self.m.kronecker(&other.m) }
    }
}

impl Tensor for DensityMatrix {
    fn tensor(&self, other: &Self) -> Self {
        Self { m: hermitize(&self.m.kronecker(&other.m)) }
    }
}

/// Digits of `index` in the mixed radix `dims`, most significant first.
fn unravel(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
}

fn ravel(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (d, n)| acc * n + d)
}

/// Partial trace of an arbitrary square matrix over every factor not listed in
/// `keep`. Kept factors stay in ascending order.
pub(crate) fn partial_trace_matrix(m: &DMatrix<C64>, keep: &[usize], dims: &[usize]) -> Result<DMatrix<C64>> {
    let total: usize = dims.iter().product();
    if dims.is_empty() || dims.contains(&0) || total != m.nrows() || m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "factor dims {dims:?} do not match a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::Dimension(format!(
            "keep list {keep:?} must be strictly ascending indices below {}",
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let out_dim: usize = kept_dims.iter().product();
    let env_dim: usize = traced_dims.iter().product();

    let mut out = DMatrix::from_element(out_dim, out_dim, ZERO);
    let mut row_digits = vec![0; dims.len()];
    let mut col_digits = vec![0; dims.len()];
    let mut kd_r = vec![0; keep.len()];
    let mut kd_c = vec![0; keep.len()];
    let mut ed = vec![0; traced.len()];
    for i in 0..out_dim {
        unravel(i, &kept_dims, &mut kd_r);
        for j in 0..out_dim {
            unravel(j, &kept_dims, &mut kd_c);
            let mut acc = ZERO;
            for e in 0..env_dim {
                unravel(e, &traced_dims, &mut ed);
                for (slot, &k) in keep.iter().enumerate() {
                    row_digits[k] = kd_r[slot];
                    col_digits[k] = kd_c[slot];
                }
                for (slot, &k) in traced.iter().enumerate() {
                    row_digits[k] = ed[slot];
                    col_digits[k] = ed[slot];
                }
                acc += m[(ravel(&row_digits, dims), ravel(&col_digits, dims))];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// Reduced state on the factors in `keep` (ascending). Tracing every factor
/// yields the 1x1 matrix `[1]`.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize], dims: &[usize]) -> Result<DensityMatrix> {
    let reduced = partial_trace_matrix(&rho.m, keep, dims)?;
    DensityMatrix::new(hermitize(&reduced))
}

/// Permutes the tensor factors of a state vector: factor `perm[k]` of the
/// input becomes factor `k` of the output.
pub(crate) fn permute_factors(v: &DVector<C64>, dims: &[usize], perm: &[usize]) -> DVector<C64> {
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let mut out = DVector::from_element(v.len(), ZERO);
    let mut old = vec![0; dims.len()];
    let mut new = vec![0; dims.len()];
    for idx in 0..v.len() {
        unravel(idx, dims, &mut old);
        for (k, &p) in perm.iter().enumerate() {
            new[k] = old[p];
        }
        out[ravel(&new, &new_dims)] = v[idx];
    }
    out
}

/// `<target| rho |target>`.
pub fn fidelity_pure(rho: &DensityMatrix, target: &PureState) -> Result<f64> {
    same_dim(rho.dim(), target.dim())?;
    let v = target.amps.dotc(&(&rho.m * &target.amps));
    if v.im.abs() >= 1e-10 {
        return Err(Error::NotHermitian(v.im.abs()));
    }
    Ok(v.re.clamp(0.0, 1.0))
}

/// Half the trace norm of `a - b`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    same_dim(a.dim(), b.dim())?;
    let diff = &a.m - &b.m;
    Ok(0.5 * sorted_eigenvalues(&hermitize(&diff)).iter().map(|e| e.abs()).sum::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

pub fn pauli(which: Pauli) -> Operator {
    let i = C64::i();
    let m = match which {
        Pauli::I => [ONE, ZERO, ZERO, ONE],
        Pauli::X => [ZERO, ONE, ONE, ZERO],
        Pauli::Y => [ZERO, -i, i, ZERO],
        Pauli::Z => [ONE, ZERO, ZERO, -ONE],
    };
    Operator { m: DMatrix::from_row_slice(2, 2, &m) }
}

/// `Tr(rho op)` for Hermitian `op`.
pub fn expectation(rho: &DensityMatrix, op: &Operator) -> Result<f64> {
    same_dim(rho.dim(), op.dim())?;
    let dev = op.hermitian_deviation();
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    Ok((&rho.m * &op.m).trace().re)
}

/// The four Bell states on two qubits.
pub mod bell {
    use super::*;

    fn pair(a: C64, b: C64, i: usize, j: usize) -> PureState {
        let mut v = vec![ZERO; 4];
        v[i] = a;
        v[j] = b;
        PureState::new(v).expect("Bell state is non-zero")
    }

    /// `(|01> - |10>)/sqrt 2`.
    pub fn psi_minus() -> PureState {
        pair(ONE, -ONE, 1, 2)
    }

    pub fn psi_plus() -> PureState {
        pair(ONE, ONE, 1, 2)
    }

    pub fn phi_minus() -> PureState {
        pair(ONE, -ONE, 0, 3)
    }

    pub fn phi_plus() -> PureState {
        pair(ONE, ONE, 0, 3)
    }
}

/// SWAP on two qubits.
pub fn swap() -> Operator {
    let mut m = DMatrix::from_element(4, 4, ZERO);
    m[(0, 0)] = ONE;
    m[(1, 2)] = ONE;
    m[(2, 1)] = ONE;
    m[(3, 3)] = ONE;
    Operator { m }
}
