//! Ideal gate algebra.
//!
//! Each ion is prepared in `a|0> + b|1>` and emits a photon whose frequency
//! mode (`nu_b` or `nu_r`) is entangled with the atomic qubit. A coincidence
//! behind the beamsplitter projects the photon pair onto its antisymmetric
//! state, which applies the Kraus operator `Z1 (I - Z1 Z2) / 2` to the atoms.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, check_unit, Error, Result};
use crate::qcore::{
    bell, c, partial_trace_matrix, pauli, permute_factors, DensityMatrix, Operator, Pauli, PureState, Tensor, C64,
};

/// Norms below this count as an annihilated input.
pub const ANNIHILATION_TOL: f64 = 1e-14;

/// Microwave preparation: `cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrepSetting {
    pub theta: f64,
    pub phi: f64,
}

impl PrepSetting {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        let p = Self { theta, phi };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_range("theta", self.theta, 0.0, PI, "[0, pi]")?;
        if !(self.phi.is_finite() && self.phi >= 0.0 && self.phi < 2.0 * PI) {
            return Err(Error::OutOfRange { name: "phi", value: self.phi, range: "[0, 2 pi)" });
        }
        Ok(())
    }

    /// Settings for the input labels used in the results table:
    /// `0`, `1`, `0+1`, `0-1`, `0+i`, `0-i`.
    pub fn from_label(label: &str) -> Option<Self> {
        let h = PI / 2.0;
        let (theta, phi) = match label.trim() {
            "0" => (0.0, 0.0),
            "1" => (PI, 0.0),
            "0+1" => (h, 0.0),
            "0+i" => (h, h),
            "0-1" => (h, PI),
            "0-i" => (h, 3.0 * h),
            _ => return None,
        };
        Some(Self { theta, phi })
    }
}

/// State vector prepared by `p`. The `|0>` amplitude is real and non-negative.
pub fn prepare_qubit(p: &PrepSetting) -> PureState {
    let a = (p.theta / 2.0).cos();
    let b = C64::from_polar((p.theta / 2.0).sin(), p.phi);
    PureState::new(vec![c(a, 0.0), b]).expect("prepared qubit has unit norm")
}

/// Joint atom-photon state over `{|0,nu_b>, |0,nu_r>, |1,nu_b>, |1,nu_r>}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomPhotonState {
    state: PureState,
}

impl AtomPhotonState {
    pub fn state(&self) -> &PureState {
        &self.state
    }
}

/// `a|0>|nu_b> + b|1>|nu_r>` for `q = a|0> + b|1>`.
pub fn atom_photon_entangle(q: &PureState) -> Result<AtomPhotonState> {
    if q.dim() != 2 {
        return Err(Error::Dimension(format!("atomic qubit must have dim 2, got {}", q.dim())));
    }
    let zero = c(0.0, 0.0);
    let state = PureState::new(vec![q.amplitude(0), zero, zero, q.amplitude(1)])?;
    Ok(AtomPhotonState { state })
}

fn qubit_amps(q: &PureState) -> Result<(C64, C64)> {
    if q.dim() != 2 {
        return Err(Error::Dimension(format!("expected a qubit, got dim {}", q.dim())));
    }
    Ok((q.amplitude(0), q.amplitude(1)))
}

/// Probability that the two photons leave in the antisymmetric state,
/// `(|a1 b2|^2 + |b1 a2|^2) / 2`.
pub fn p_psi_minus(q1: &PureState, q2: &PureState) -> Result<f64> {
    let (a1, b1) = qubit_amps(q1)?;
    let (a2, b2) = qubit_amps(q2)?;
    Ok((a1.norm_sqr() * b2.norm_sqr() + b1.norm_sqr() * a2.norm_sqr()) / 2.0)
}

/// `Z1 (I - Z1 Z2) / 2` on the two atomic qubits.
pub fn gate_kraus_operator() -> Operator {
    let z1 = pauli(Pauli::Z).tensor(&pauli(Pauli::I));
    let zz = pauli(Pauli::Z).tensor(&pauli(Pauli::Z));
    let inner = Operator::identity(4).add(&zz.scale(-1.0)).expect("dims agree").scale(0.5);
    z1.compose(&inner).expect("dims agree")
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrausResult {
    /// Normalized output, `None` when the input is annihilated.
    pub state: Option<PureState>,
    /// Squared norm of the unnormalized image, `2 * P_psi_minus`.
    pub norm_sq: f64,
}

pub fn gate_kraus_apply(q1: &PureState, q2: &PureState) -> Result<KrausResult> {
    qubit_amps(q1)?;
    qubit_amps(q2)?;
    let image = gate_kraus_operator().apply(&q1.tensor(q2))?;
    let norm_sq = image.norm_squared();
    let state = if norm_sq < ANNIHILATION_TOL { None } else { Some(PureState::from_vector(image)?) };
    Ok(KrausResult { state, norm_sq })
}

/// Coincidence POVM element on the photon pair for squared wavepacket overlap
/// `m`: `m |psi-><psi-| + (1 - m) I/2`.
pub fn coincidence_povm(m: f64) -> Result<Operator> {
    check_unit("mode_overlap", m)?;
    let singlet = Operator::projector(&bell::psi_minus());
    singlet.scale(m).add(&Operator::identity(4).scale((1.0 - m) / 2.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeraldOutcome {
    pub coincidence_probability: f64,
    /// Conditional two-atom state, `None` when no coincidence can occur.
    pub post_state: Option<DensityMatrix>,
}

/// Full 16-dimensional herald: joint atom-photon pure state, coincidence
/// POVM on the photons, trace over the photons.
pub fn herald_project(s1: &AtomPhotonState, s2: &AtomPhotonState, m: f64) -> Result<HeraldOutcome> {
    let povm = coincidence_povm(m)?;
    // (a1, p1, a2, p2) -> (a1, a2, p1, p2)
    let joint = s1.state.tensor(&s2.state);
    let reordered: DVector<C64> = permute_factors(joint.amplitudes(), &[2, 2, 2, 2], &[0, 2, 1, 3]);
    let rho = &reordered * reordered.adjoint();
    let filter = Operator::identity(4).tensor(&povm);
    let weighted = filter.matrix() * rho;
    let atoms = partial_trace_matrix(&weighted, &[0, 1], &[2, 2, 2, 2])?;
    let prob = atoms.trace().re.max(0.0);
    let post_state = if prob < ANNIHILATION_TOL { None } else { Some(DensityMatrix::from_unnormalized(atoms)?) };
    Ok(HeraldOutcome { coincidence_probability: prob, post_state })
}

/// Convenience: prepare both ions and herald.
pub fn herald_from_qubits(q1: &PureState, q2: &PureState, m: f64) -> Result<HeraldOutcome> {
    herald_project(&atom_photon_entangle(q1)?, &atom_photon_entangle(q2)?, m)
}

/// `(|0> + e^{i phi}|1>)/sqrt 2`.
pub fn equator_state(phi: f64) -> PureState {
    PureState::new(vec![c(FRAC_1_SQRT_2, 0.0), C64::from_polar(FRAC_1_SQRT_2, phi)]).expect("unit norm")
}
