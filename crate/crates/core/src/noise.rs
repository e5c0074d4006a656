//! Imperfection channels layered on the ideal herald.
//!
//! Mode mismatch enters through the coincidence POVM overlap, sigma-polarized
//! light as two-qubit white noise, and dark-count coincidences as a mixture
//! with the locally dephased input. Detection errors are applied by the
//! measurement module, not here.

use serde::{Deserialize, Serialize};

use crate::error::{check_range, check_unit, Error, Result};
use crate::protocol::{herald_from_qubits, HeraldOutcome, ANNIHILATION_TOL};
use crate::qcore::{DensityMatrix, PureState, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorModel {
    /// Squared wavepacket overlap of the two photons; absorbs micromotion.
    pub mode_overlap: f64,
    /// Per-ion probability that a state readout is flipped.
    pub eps_det: f64,
    /// Per-photon probability of sigma-polarized contamination.
    pub eps_sigma: f64,
    /// Weight of dark-count coincidences in the herald mixture.
    pub p_false_herald: f64,
}

impl Default for ErrorModel {
    fn default() -> Self {
        Self::ideal()
    }
}

impl ErrorModel {
    pub const fn ideal() -> Self {
        Self { mode_overlap: 1.0, eps_det: 0.0, eps_sigma: 0.0, p_false_herald: 0.0 }
    }

    /// Overlap 0.94, 1.5% readout flips per ion, 2% effective sigma
    /// depolarization, 1% false heralds.
    pub fn calibrated() -> Self {
        Self { mode_overlap: 0.94, eps_det: 0.015, eps_sigma: eps_sigma_for_effective(0.02), p_false_herald: 0.01 }
    }

    pub fn validate(&self) -> Result<()> {
        check_unit("mode_overlap", self.mode_overlap)?;
        check_range("eps_det", self.eps_det, 0.0, 0.5, "[0, 0.5]")?;
        check_unit("eps_sigma", self.eps_sigma)?;
        check_unit("p_false_herald", self.p_false_herald)
    }

    pub fn effective_sigma(&self) -> f64 {
        effective_sigma(self.eps_sigma)
    }
}

/// Probability that at least one of the two photons is contaminated.
pub fn effective_sigma(eps_sigma: f64) -> f64 {
    1.0 - (1.0 - eps_sigma).powi(2)
}

/// Inverse of [`effective_sigma`].
pub fn eps_sigma_for_effective(eff: f64) -> f64 {
    1.0 - (1.0 - eff).sqrt()
}

/// `(1 - e) rho + e I/4` with `e = 1 - (1 - eps_sigma)^2`.
pub fn apply_sigma_leak(rho: &DensityMatrix, eps_sigma: f64) -> Result<DensityMatrix> {
    check_unit("eps_sigma", eps_sigma)?;
    if eps_sigma == 0.0 {
        return Ok(rho.clone());
    }
    let mixed = DensityMatrix::maximally_mixed(rho.dim());
    rho.mix(&mixed, 1.0 - effective_sigma(eps_sigma))
}

/// State left behind when the herald is a dark count: each ion is dephased by
/// its undetected photon.
pub fn false_herald_state(q1: &PureState, q2: &PureState) -> Result<DensityMatrix> {
    let dephased = |q: &PureState| -> Result<DensityMatrix> {
        if q.dim() != 2 {
            return Err(Error::Dimension(format!("expected a qubit, got dim {}", q.dim())));
        }
        DensityMatrix::diagonal(&[q.amplitude(0).norm_sqr(), q.amplitude(1).norm_sqr()])
    };
    Ok(dephased(q1)?.tensor(&dephased(q2)?))
}

/// Per-attempt herald probability and conditional atomic state under `em`.
///
/// Signal coincidences occur with `p_cc (1 - p_false)` and false ones with
/// `p_false`; the post-herald state is the corresponding mixture of the
/// sigma-leaked signal state and [`false_herald_state`].
pub fn noisy_herald(q1: &PureState, q2: &PureState, em: &ErrorModel) -> Result<HeraldOutcome> {
    em.validate()?;
    let signal = herald_from_qubits(q1, q2, em.mode_overlap)?;
    let w_signal = signal.coincidence_probability * (1.0 - em.p_false_herald);
    let w_false = em.p_false_herald;
    let total = w_signal + w_false;
    if total < ANNIHILATION_TOL {
        return Ok(HeraldOutcome { coincidence_probability: total, post_state: None });
    }
    let post = match signal.post_state {
        Some(rho) if w_signal > 0.0 => {
            let leaked = apply_sigma_leak(&rho, em.eps_sigma)?;
            if w_false > 0.0 {
                leaked.mix(&false_herald_state(q1, q2)?, w_signal / total)?
            } else {
                leaked
            }
        }
        _ => false_herald_state(q1, q2)?,
    };
    Ok(HeraldOutcome { coincidence_probability: total, post_state: Some(post) })
}
