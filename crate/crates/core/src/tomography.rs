//! Maximum-likelihood two-qubit state reconstruction from nine-basis counts,
//! and the concurrence / entanglement-of-formation measures.
//!
//! The state is parameterized as `rho = T^dagger T / Tr(T^dagger T)` with `T`
//! lower triangular and real on the diagonal (16 real parameters), so every
//! iterate is physical. The objective is the multinomial negative
//! log-likelihood; it is minimized with L-BFGS on an analytic gradient.

use std::collections::{BTreeMap, VecDeque};

use nalgebra::{Cholesky, DMatrix, Matrix4, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::measurement::{BasisPair, CountRecord, MeasBasis};
use crate::qcore::{c, hermitize, pauli, DensityMatrix, Operator, Pauli, Tensor, C64};

/// Outcome probabilities below this are clamped inside the logarithm.
pub const PROB_FLOOR: f64 = 1e-12;
pub const N_PARAMS: usize = 16;
/// Minimum total number of events accepted for reconstruction.
pub const MIN_EVENTS: u64 = 16;

/// Strictly-lower entries of `T`, in parameter order after the diagonal.
const OFF_DIAG: [(usize, usize); 6] = [(1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2)];

/// One count record per basis pair, all nine pairs present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyInput {
    records: Vec<CountRecord>,
}

impl TomographyInput {
    pub fn new(records: Vec<CountRecord>) -> Result<Self> {
        let mut by_basis: BTreeMap<BasisPair, CountRecord> = BTreeMap::new();
        for r in records {
            if by_basis.insert(r.basis, r).is_some() {
                return Err(Error::Tomography(format!("basis {} appears more than once", r.basis)));
            }
        }
        let ordered: Vec<CountRecord> = BasisPair::all()
            .iter()
            .map(|b| by_basis.remove(b).ok_or_else(|| Error::MissingBasis(b.to_string())))
            .collect::<Result<_>>()?;
        let total: u64 = ordered.iter().map(CountRecord::total).sum();
        if total < MIN_EVENTS {
            return Err(Error::Tomography(format!("{total} events, need at least {MIN_EVENTS}")));
        }
        Ok(Self { records: ordered })
    }

    /// Records in [`BasisPair::all`] order.
    pub fn records(&self) -> &[CountRecord] {
        &self.records
    }

    pub fn total_events(&self) -> u64 {
        self.records.iter().map(CountRecord::total).sum()
    }

    /// Input with the two ions' roles exchanged.
    pub fn swapped(&self) -> Self {
        Self::new(self.records.iter().map(CountRecord::swapped).collect()).expect("swap preserves validity")
    }
}

type M4 = Matrix4<C64>;

fn to_m4(m: &DMatrix<C64>) -> M4 {
    M4::from_fn(|i, j| m[(i, j)])
}

fn to_dmatrix(m: &M4) -> DMatrix<C64> {
    DMatrix::from_fn(4, 4, |i, j| m[(i, j)])
}

/// Effective POVM elements, including readout flips, with their counts.
struct Likelihood {
    terms: Vec<(f64, M4)>,
    total: f64,
}

impl Likelihood {
    fn new(input: &TomographyInput, eps_det: f64) -> Result<Self> {
        check_range("eps_det", eps_det, 0.0, 0.5, "[0, 0.5]")?;
        let side = |b: MeasBasis, bright: bool| -> DMatrix<C64> {
            let (hit, miss) =
                if bright { (b.bright_state(), b.dark_state()) } else { (b.dark_state(), b.bright_state()) };
            let ph = hit.amplitudes() * hit.amplitudes().adjoint();
            let pm = miss.amplitudes() * miss.amplitudes().adjoint();
            ph.scale(1.0 - eps_det) + pm.scale(eps_det)
        };
        let mut terms = Vec::with_capacity(36);
        for r in &input.records {
            for (k, &n) in r.counts.iter().enumerate() {
                let e1 = side(r.basis.b1, k / 2 == 0);
                let e2 = side(r.basis.b2, k % 2 == 0);
                terms.push((n as f64, to_m4(&e1.kronecker(&e2))));
            }
        }
        Ok(Self { terms, total: input.total_events() as f64 })
    }

    /// Raw negative log-likelihood and its gradient with respect to `rho`
    /// (as the Hermitian matrix `G` with `dNLL = Tr(G drho)`).
    fn evaluate(&self, rho: &M4, want_grad: bool) -> (f64, M4) {
        let mut nll = 0.0;
        let mut g = M4::zeros();
        for (n, povm) in &self.terms {
            if *n == 0.0 {
                continue;
            }
            let p = trace_product(rho, povm);
            if p < PROB_FLOOR {
                nll -= n * PROB_FLOOR.ln();
            } else {
                nll -= n * p.ln();
                if want_grad {
                    g -= povm.scale(n / p);
                }
            }
        }
        (nll, g)
    }
}

/// `Re Tr(a b)`.
fn trace_product(a: &M4, b: &M4) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            s += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    s
}

fn params_to_t(params: &[f64]) -> M4 {
    let mut t = M4::zeros();
    for i in 0..4 {
        t[(i, i)] = c(params[i], 0.0);
    }
    for (k, (i, j)) in OFF_DIAG.iter().enumerate() {
        t[(*i, *j)] = c(params[4 + 2 * k], params[5 + 2 * k]);
    }
    t
}

fn t_to_params(t: &M4) -> [f64; N_PARAMS] {
    let mut p = [0.0; N_PARAMS];
    for i in 0..4 {
        p[i] = t[(i, i)].re;
    }
    for (k, (i, j)) in OFF_DIAG.iter().enumerate() {
        p[4 + 2 * k] = t[(*i, *j)].re;
        p[5 + 2 * k] = t[(*i, *j)].im;
    }
    p
}

fn rho_of_t(t: &M4) -> Result<(M4, f64)> {
    let a = t.adjoint() * t;
    let tr = a.trace().re;
    if !(tr.is_finite() && tr > 0.0) {
        return Err(Error::Tomography("parameters give Tr(T^dagger T) = 0".into()));
    }
    Ok((a.unscale(tr), tr))
}

fn check_params(params: &[f64]) -> Result<()> {
    if params.len() != N_PARAMS {
        return Err(Error::Dimension(format!("expected {N_PARAMS} parameters, got {}", params.len())));
    }
    Ok(())
}

/// `T^dagger T / Tr(T^dagger T)` for the 16-parameter lower-triangular `T`.
pub fn rho_from_params(params: &[f64]) -> Result<DensityMatrix> {
    check_params(params)?;
    let (rho, _) = rho_of_t(&params_to_t(params))?;
    DensityMatrix::from_unnormalized(to_dmatrix(&rho))
}

/// Parameters whose state is `rho`. Requires `rho` positive definite.
pub fn params_from_rho(rho: &DensityMatrix) -> Result<[f64; N_PARAMS]> {
    if rho.dim() != 4 {
        return Err(Error::Dimension(format!("two-qubit state required, got dim {}", rho.dim())));
    }
    // With J the reversal permutation, J rho J = L L^dagger gives
    // rho = T^dagger T for the lower-triangular T = J L^dagger J.
    let m = to_m4(rho.matrix());
    let rev = M4::from_fn(|i, j| m[(3 - i, 3 - j)]);
    let l = Cholesky::new(rev).ok_or_else(|| Error::Tomography("state is not positive definite".into()))?.l();
    let ld = l.adjoint();
    let t = M4::from_fn(|i, j| ld[(3 - i, 3 - j)]);
    Ok(t_to_params(&t))
}

pub fn neg_log_likelihood(params: &[f64], input: &TomographyInput, eps_det: f64) -> Result<f64> {
    check_params(params)?;
    let lk = Likelihood::new(input, eps_det)?;
    let (rho, _) = rho_of_t(&params_to_t(params))?;
    Ok(lk.evaluate(&rho, false).0)
}

/// Analytic gradient of [`neg_log_likelihood`] with respect to the parameters.
pub fn neg_log_likelihood_gradient(params: &[f64], input: &TomographyInput, eps_det: f64) -> Result<[f64; N_PARAMS]> {
    check_params(params)?;
    let lk = Likelihood::new(input, eps_det)?;
    Ok(objective(&lk, params, 1.0)?.1)
}

/// Value and parameter gradient of `NLL * scale`.
fn objective(lk: &Likelihood, params: &[f64], scale: f64) -> Result<(f64, [f64; N_PARAMS])> {
    let t = params_to_t(params);
    let (rho, tr) = rho_of_t(&t)?;
    let (nll, g) = lk.evaluate(&rho, true);
    // d rho = (dA - rho Tr dA) / tr  =>  dNLL = Tr(G' dA), G' = (G - Tr(G rho) I) / tr
    let shift = trace_product(&g, &rho);
    let g_prime = (g - M4::identity().scale(shift)).unscale(tr);
    let tg = t * g_prime;
    let mut grad = [0.0; N_PARAMS];
    for i in 0..4 {
        grad[i] = 2.0 * tg[(i, i)].re * scale;
    }
    for (k, (i, j)) in OFF_DIAG.iter().enumerate() {
        grad[4 + 2 * k] = 2.0 * tg[(*i, *j)].re * scale;
        grad[5 + 2 * k] = 2.0 * tg[(*i, *j)].im * scale;
    }
    Ok((nll * scale, grad))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleOptions {
    pub max_iterations: usize,
    /// Gradient-norm threshold on the per-event objective.
    pub grad_tol: f64,
    /// Per-iteration decrease threshold on the per-event objective.
    pub f_tol: f64,
    pub lbfgs_memory: usize,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self { max_iterations: 10_000, grad_tol: 1e-6, f_tol: 1e-10, lbfgs_memory: 10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    pub rho_hat: DensityMatrix,
    pub log_likelihood: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Linear-inversion estimate, not necessarily positive.
pub fn linear_inversion(input: &TomographyInput, eps_det: f64) -> Result<DMatrix<C64>> {
    check_range("eps_det", eps_det, 0.0, 0.5, "[0, 0.5]")?;
    let contrast = 1.0 - 2.0 * eps_det;
    if contrast <= 0.0 {
        return Err(Error::Tomography("readout carries no information at eps_det = 0.5".into()));
    }
    let mut corr: BTreeMap<BasisPair, f64> = BTreeMap::new();
    let mut local1 = [0.0; 3];
    let mut local2 = [0.0; 3];
    let mut n1 = [0usize; 3];
    let mut n2 = [0usize; 3];
    let idx = |b: MeasBasis| b as usize;
    for r in &input.records {
        let n = r.total();
        if n == 0 {
            continue;
        }
        let p = r.counts.map(|k| k as f64 / n as f64);
        corr.insert(r.basis, (p[0] + p[3] - p[1] - p[2]) / (contrast * contrast));
        local1[idx(r.basis.b1)] += (p[0] + p[1] - p[2] - p[3]) / contrast;
        n1[idx(r.basis.b1)] += 1;
        local2[idx(r.basis.b2)] += (p[0] + p[2] - p[1] - p[3]) / contrast;
        n2[idx(r.basis.b2)] += 1;
    }
    let id = pauli(Pauli::I);
    let mut rho = id.tensor(&id).into_matrix();
    for b in MeasBasis::ALL {
        let o = b.observable();
        if n1[idx(b)] > 0 {
            rho += o.tensor(&id).into_matrix().scale(local1[idx(b)] / n1[idx(b)] as f64);
        }
        if n2[idx(b)] > 0 {
            rho += id.tensor(&o).into_matrix().scale(local2[idx(b)] / n2[idx(b)] as f64);
        }
    }
    for (pair, v) in corr {
        rho += pair.observable().into_matrix().scale(v);
    }
    Ok(rho.unscale(4.0))
}

/// Projects a Hermitian matrix to a full-rank density matrix by clipping
/// eigenvalues at `floor` and renormalizing.
pub fn project_psd(m: &DMatrix<C64>, floor: f64) -> Result<DensityMatrix> {
    let eig = SymmetricEigen::new(hermitize(m));
    let clipped = eig.eigenvalues.map(|v| v.max(floor));
    let vecs = &eig.eigenvectors;
    let d = DMatrix::from_diagonal(&clipped.map(|v| c(v, 0.0)));
    DensityMatrix::from_unnormalized(vecs * d * vecs.adjoint())
}

/// Starting parameters: PSD-projected linear inversion, or `I/4`.
pub fn initial_params(input: &TomographyInput, eps_det: f64) -> [f64; N_PARAMS] {
    let fallback = {
        let mut p = [0.0; N_PARAMS];
        p[..4].fill(0.5);
        p
    };
    linear_inversion(input, eps_det)
        .and_then(|m| project_psd(&m, 1e-6))
        .and_then(|rho| params_from_rho(&rho))
        .unwrap_or(fallback)
}

pub fn reconstruct_mle(input: &TomographyInput, eps_det: f64, opts: &MleOptions) -> Result<ReconstructionResult> {
    let lk = Likelihood::new(input, eps_det)?;
    let scale = 1.0 / lk.total;
    let x0 = initial_params(input, eps_det);
    let (x, iterations, converged) = lbfgs(|p| objective(&lk, p, scale), x0, opts)?;
    let (rho, _) = rho_of_t(&params_to_t(&x))?;
    let (nll, _) = lk.evaluate(&rho, false);
    Ok(ReconstructionResult {
        rho_hat: DensityMatrix::from_unnormalized(to_dmatrix(&rho))?,
        log_likelihood: -nll,
        converged,
        iterations,
    })
}

fn dot(a: &[f64; N_PARAMS], b: &[f64; N_PARAMS]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(a: f64, x: &[f64; N_PARAMS], y: &[f64; N_PARAMS]) -> [f64; N_PARAMS] {
    std::array::from_fn(|i| a * x[i] + y[i])
}

/// Limited-memory BFGS with Armijo backtracking. Returns the best iterate,
/// the iteration count and whether a convergence test fired.
fn lbfgs<F>(f: F, x0: [f64; N_PARAMS], opts: &MleOptions) -> Result<([f64; N_PARAMS], usize, bool)>
where
    F: Fn(&[f64]) -> Result<(f64, [f64; N_PARAMS])>,
{
    let mut x = x0;
    let (mut fx, mut g) = f(&x)?;
    let mut history: VecDeque<([f64; N_PARAMS], [f64; N_PARAMS], f64)> = VecDeque::new();

    for iter in 0..opts.max_iterations {
        if dot(&g, &g).sqrt() < opts.grad_tol {
            return Ok((x, iter, true));
        }

        // Two-loop recursion.
        let mut q = g;
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * dot(s, &q);
            q = axpy(-a, y, &q);
            alphas.push(a);
        }
        let gamma =
            history.back().map_or_else(|| 1.0 / dot(&g, &g).sqrt().max(1e-300), |(s, y, _)| dot(s, y) / dot(y, y));
        let mut r = q.map(|v| v * gamma);
        for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &r);
            r = axpy(a - b, s, &r);
        }
        let mut dir = r.map(|v| -v);
        let mut slope = dot(&g, &dir);
        if slope >= 0.0 || slope.is_nan() {
            history.clear();
            dir = g.map(|v| -v / dot(&g, &g).sqrt().max(1e-300));
            slope = dot(&g, &dir);
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial = axpy(step, &dir, &x);
            if let Ok((ft, gt)) = f(&trial) {
                if ft.is_finite() && ft <= fx + 1e-4 * step * slope {
                    accepted = Some((trial, ft, gt));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((x_new, f_new, g_new)) = accepted else {
            // No further decrease representable.
            return Ok((x, iter, true));
        };

        let s: [f64; N_PARAMS] = std::array::from_fn(|i| x_new[i] - x[i]);
        let y: [f64; N_PARAMS] = std::array::from_fn(|i| g_new[i] - g[i]);
        let sy = dot(&s, &y);
        if sy > 1e-16 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() && sy > 0.0 {
            history.push_back((s, y, 1.0 / sy));
            if history.len() > opts.lbfgs_memory {
                history.pop_front();
            }
        }
        let decrease = fx - f_new;
        x = x_new;
        fx = f_new;
        g = g_new;
        if decrease < opts.f_tol {
            return Ok((x, iter + 1, true));
        }
    }
    Ok((x, opts.max_iterations, false))
}

/// Wootters concurrence of a two-qubit state.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::Dimension(format!("two-qubit state required, got dim {}", rho.dim())));
    }
    let yy = pauli(Pauli::Y).tensor(&pauli(Pauli::Y));
    let conj = rho.matrix().map(|v| v.conj());
    let flipped = yy.matrix() * conj * yy.matrix();
    // Square roots of the eigenvalues of rho * flipped are the eigenvalues of
    // the Hermitian sqrt(sqrt(rho) flipped sqrt(rho)).
    let sqrt_rho = hermitian_sqrt(rho.matrix());
    let r = &sqrt_rho * flipped * &sqrt_rho;
    let mut lambdas: Vec<f64> =
        SymmetricEigen::new(hermitize(&r)).eigenvalues.iter().map(|v| v.max(0.0).sqrt()).collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).clamp(0.0, 1.0))
}

fn hermitian_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let eig = SymmetricEigen::new(hermitize(m));
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| c(v.max(0.0).sqrt(), 0.0)));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// Binary entropy in bits.
pub fn binary_entropy(x: f64) -> f64 {
    let term = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.log2() };
    term(x) + term(1.0 - x)
}

/// Entanglement of formation as a function of concurrence.
pub fn entanglement_of_formation_from_concurrence(conc: f64) -> f64 {
    let conc = conc.clamp(0.0, 1.0);
    binary_entropy((1.0 + (1.0 - conc * conc).sqrt()) / 2.0)
}

pub fn entanglement_of_formation(rho: &DensityMatrix) -> Result<f64> {
    Ok(entanglement_of_formation_from_concurrence(concurrence(rho)?))
}

/// Expected counts of `rho` scaled to `per_basis` events in each basis,
/// rounded to integers.
pub fn expected_input(rho: &DensityMatrix, eps_det: f64, per_basis: f64) -> Result<TomographyInput> {
    let records = BasisPair::all()
        .iter()
        .map(|b| {
            let p = crate::measurement::outcome_probabilities(rho, *b, eps_det)?;
            Ok(CountRecord::new(*b, p.map(|v| (v * per_basis).round() as u64)))
        })
        .collect::<Result<Vec<_>>>()?;
    TomographyInput::new(records)
}

/// Operator used for the SWAP-covariance check.
pub fn swap_conjugate(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let s: Operator = crate::qcore::swap();
    rho.conjugate_by(&s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{bell, fidelity_pure, trace_distance};
    use approx::assert_abs_diff_eq;

    fn werner(p: f64) -> DensityMatrix {
        bell::psi_minus().to_density().mix(&DensityMatrix::maximally_mixed(4), p).unwrap()
    }

    #[test]
    fn input_validation() {
        let recs: Vec<CountRecord> = BasisPair::all().iter().map(|b| CountRecord::new(*b, [1, 1, 1, 1])).collect();
        assert!(TomographyInput::new(recs.clone()).is_ok());
        assert!(matches!(TomographyInput::new(recs[..8].to_vec()), Err(Error::MissingBasis(_))));
        let mut dup = recs.clone();
        dup.push(recs[0]);
        assert!(TomographyInput::new(dup).is_err());
        let sparse: Vec<CountRecord> = BasisPair::all().iter().map(|b| CountRecord::new(*b, [1, 0, 0, 0])).collect();
        assert!(TomographyInput::new(sparse).is_err());
    }

    #[test]
    fn params_roundtrip() {
        let rho = werner(0.7);
        let p = params_from_rho(&rho).unwrap();
        let back = rho_from_params(&p).unwrap();
        assert!(trace_distance(&rho, &back).unwrap() < 1e-12);
        assert!(rho_from_params(&[0.0; N_PARAMS]).is_err());
        assert!(neg_log_likelihood(&[0.0; 3], &expected_input(&rho, 0.0, 10.0).unwrap(), 0.0).is_err());
    }

    #[test]
    fn nll_of_mixed_state_closed_form() {
        // Every outcome has probability 1/4 under I/4, with or without flips.
        let mut p = [0.0; N_PARAMS];
        p[..4].fill(1.0);
        let input = expected_input(&werner(0.9), 0.0, 40.0).unwrap();
        let n = input.total_events() as f64;
        for eps in [0.0, 0.1] {
            let v = neg_log_likelihood(&p, &input, eps).unwrap();
            assert_abs_diff_eq!(v, -n * 0.25f64.ln(), epsilon = 1e-9);
        }
    }

    #[test]
    fn impossible_record_is_finite() {
        // ZZ "++" never happens for the singlet.
        // Only row 3 of T is non-zero, so rho is exactly the singlet.
        let mut params = [0.0; N_PARAMS];
        params[12] = std::f64::consts::FRAC_1_SQRT_2;
        params[14] = -std::f64::consts::FRAC_1_SQRT_2;
        let rho = rho_from_params(&params).unwrap();
        assert_abs_diff_eq!(fidelity_pure(&rho, &bell::psi_minus()).unwrap(), 1.0, epsilon = 1e-15);
        let mut recs: Vec<CountRecord> = BasisPair::all().iter().map(|b| CountRecord::new(*b, [0, 5, 5, 0])).collect();
        recs[8].counts = [3, 5, 5, 0];
        let input = TomographyInput::new(recs).unwrap();
        let v = neg_log_likelihood(&params, &input, 0.0).unwrap();
        assert!(v.is_finite());
        assert!(v > -3.0 * PROB_FLOOR.ln() * 0.99);
    }

    #[test]
    fn concurrence_examples() {
        assert_abs_diff_eq!(concurrence(&bell::psi_minus().to_density()).unwrap(), 1.0, epsilon = 1e-7);
        assert_abs_diff_eq!(concurrence(&DensityMatrix::maximally_mixed(4)).unwrap(), 0.0);
        assert_abs_diff_eq!(concurrence(&werner(0.8)).unwrap(), 0.7, epsilon = 1e-10);
    }

    #[test]
    fn eof_examples() {
        assert_abs_diff_eq!(entanglement_of_formation_from_concurrence(1.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(entanglement_of_formation_from_concurrence(0.0), 0.0);
        assert_abs_diff_eq!(entanglement_of_formation_from_concurrence(0.77), 0.682, epsilon = 1e-3);
    }

    #[test]
    fn mle_recovers_mixed_state() {
        let input = expected_input(&DensityMatrix::maximally_mixed(4), 0.0, 1e5).unwrap();
        let r = reconstruct_mle(&input, 0.0, &MleOptions::default()).unwrap();
        assert!(trace_distance(&r.rho_hat, &DensityMatrix::maximally_mixed(4)).unwrap() < 0.02);
    }

    #[test]
    fn mle_with_detection_model() {
        let truth = werner(0.9);
        let input = expected_input(&truth, 0.05, 1e6).unwrap();
        let calibrated = reconstruct_mle(&input, 0.05, &MleOptions::default()).unwrap();
        let raw = reconstruct_mle(&input, 0.0, &MleOptions::default()).unwrap();
        let f_cal = fidelity_pure(&calibrated.rho_hat, &bell::psi_minus()).unwrap();
        let f_raw = fidelity_pure(&raw.rho_hat, &bell::psi_minus()).unwrap();
        assert_abs_diff_eq!(f_cal, fidelity_pure(&truth, &bell::psi_minus()).unwrap(), epsilon = 1e-3);
        assert!(f_raw < f_cal);
    }

    #[test]
    fn iteration_cap_reports_unconverged() {
        let input = expected_input(&werner(0.6), 0.0, 100.0).unwrap();
        let opts = MleOptions { max_iterations: 0, ..MleOptions::default() };
        let r = reconstruct_mle(&input, 0.0, &opts).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 0);
    }
}
