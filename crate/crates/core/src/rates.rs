//! Photon collection budget and gate success probability.

use serde::{Deserialize, Serialize};

use crate::error::{check_range, check_unit, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBudget {
    /// Fraction of collected photons that are pi-polarized.
    pub p_pi: f64,
    /// Collection solid angle over 4 pi.
    pub solid_angle_fraction: f64,
    pub t_fiber: f64,
    pub t_optics: f64,
    /// Detector quantum efficiency.
    pub eta: f64,
    /// Excitation attempts per second; 0 when unknown.
    pub attempt_rate_hz: f64,
}

impl Default for RateBudget {
    fn default() -> Self {
        Self::experiment()
    }
}

impl RateBudget {
    /// Free-space collection values of the two-trap experiment.
    pub const fn experiment() -> Self {
        Self { p_pi: 0.5, solid_angle_fraction: 0.02, t_fiber: 0.2, t_optics: 0.95, eta: 0.15, attempt_rate_hz: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        check_unit("p_pi", self.p_pi)?;
        check_unit("solid_angle_fraction", self.solid_angle_fraction)?;
        check_unit("t_fiber", self.t_fiber)?;
        check_unit("t_optics", self.t_optics)?;
        check_unit("eta", self.eta)?;
        if !(self.attempt_rate_hz.is_finite() && self.attempt_rate_hz >= 0.0) {
            return Err(Error::OutOfRange { name: "attempt_rate_hz", value: self.attempt_rate_hz, range: "[0, inf)" });
        }
        Ok(())
    }

    /// The five efficiency factors in order.
    pub fn factors(&self) -> [(&'static str, f64); 5] {
        [
            ("p_pi", self.p_pi),
            ("solid_angle_fraction", self.solid_angle_fraction),
            ("t_fiber", self.t_fiber),
            ("t_optics", self.t_optics),
            ("eta", self.eta),
        ]
    }
}

/// Probability that one emitted photon is detected.
pub fn per_photon_detection_prob(b: &RateBudget) -> f64 {
    b.p_pi * b.solid_angle_fraction * b.t_fiber * b.t_optics * b.eta
}

/// `p_psi * (per-photon detection probability)^2`.
pub fn gate_success_probability(b: &RateBudget, p_psi: f64) -> Result<f64> {
    check_range("p_psi", p_psi, 0.0, 0.5, "[0, 0.5]")?;
    Ok(p_psi * per_photon_detection_prob(b).powi(2))
}

/// Mean number of heralds in `duration_s` seconds; 0 when the attempt rate
/// is unknown.
pub fn expected_events(b: &RateBudget, p_psi: f64, duration_s: f64) -> Result<f64> {
    if !(duration_s.is_finite() && duration_s >= 0.0) {
        return Err(Error::OutOfRange { name: "duration_s", value: duration_s, range: "[0, inf)" });
    }
    Ok(b.attempt_rate_hz * duration_s * gate_success_probability(b, p_psi)?)
}

/// Human-readable breakdown used by the `rates` subcommand.
pub fn breakdown(b: &RateBudget) -> String {
    let mut out = String::new();
    for (name, v) in b.factors() {
        out.push_str(&format!("{name:<22} {v}\n"));
    }
    let p1 = per_photon_detection_prob(b);
    out.push_str(&format!("{:<22} {p1:.6e}\n", "per_photon_detection"));
    out.push_str(&format!("{:<22} {:.6e}\n", "p_gate / p_psi_minus", p1 * p1));
    for (label, p_psi) in [("p_gate (p_psi = 1/4)", 0.25), ("p_gate (p_psi = 1/2)", 0.5)] {
        out.push_str(&format!("{label:<22} {:.6e}\n", p_psi * p1 * p1));
    }
    out.push_str("reported: p_gate / p_psi_minus ~ 8.5e-8 (table), p_gate ~ 2.2e-8 (text)\n");
    if b.attempt_rate_hz > 0.0 {
        let per_hour = b.attempt_rate_hz * 3600.0 * 0.25 * p1 * p1;
        out.push_str(&format!("{:<22} {per_hour:.6e}\n", "heralds/hour (1/4)"));
    }
    out
}
