//! Membrane capacitor and the circuit-to-membrane coupling chain.
//!
//! The membrane forms one plate of a gap capacitor inside the LC circuit.
//! Its displacement modulates the circuit resonance, and a strong rf pump
//! converts that modulation into a beam-splitter coupling between circuit
//! and membrane. Everything here works in angular units (rad/s) and SI.

use crate::config::ExperimentConfig;
use crate::constants::{EPSILON_0, HBAR};

/// Smallest membrane gap treated as physical. Below this the plates are
/// considered collapsed and capacitance formulas refuse to evaluate.
pub const MIN_GAP: f64 = 10e-9;

/// The membrane gap closed past [`MIN_GAP`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GapError {
    #[error("membrane gap {gap:.3e} m is inside the {MIN_GAP:.1e} m collision guard")]
    Collapsed { gap: f64 },
}

/// Zero-point spread sqrt(ħ / 2 m ω₀) of a mode with effective mass
/// `m_eff` and angular frequency `omega_0`.
pub fn zero_point_fluctuation(m_eff: f64, omega_0: f64) -> f64 {
    (HBAR / (2.0 * m_eff * omega_0)).sqrt()
}

/// Membrane capacitance ε₀A / 2(d₀ + Z) at total plate separation `gap`
/// = d₀ + Z. The factor 2 accounts for the series gap on either side of
/// the dielectric membrane.
pub fn membrane_capacitance(a_cap: f64, gap: f64) -> Result<f64, GapError> {
    if gap < MIN_GAP {
        return Err(GapError::Collapsed { gap });
    }
    Ok(EPSILON_0 * a_cap / (2.0 * gap))
}

/// Participation ratio predicted from pure geometry: the membrane
/// capacitor against the trimmer and parasitic capacitance it sits in
/// parallel with. The calibrated value in a config should land within a
/// few percent of this.
pub fn participation_from_geometry(a_cap: f64, d0: f64, c_t: f64, c_p: f64) -> Result<f64, GapError> {
    let c_m = membrane_capacitance(a_cap, d0)?;
    Ok(c_m / (c_t + c_p + c_m))
}

/// Rescale a calibrated participation ratio to a different gap, holding
/// the total circuit capacitance fixed: η ∝ C_m ∝ 1/d. This is the
/// convention used for gap sweeps; retuning the trimmer to keep the
/// circuit on resonance is what holds the total fixed in practice.
pub fn participation_at_gap(eta_ref: f64, d_ref: f64, d: f64) -> f64 {
    eta_ref * d_ref / d
}

/// Single-quantum electromechanical coupling g_em = ω_LC (z_zpf / 2d₀) η:
/// the circuit frequency pull per zero-point displacement.
pub fn coupling_g_em(omega_lc: f64, z_zpf: f64, d0: f64, eta_cap: f64) -> f64 {
    omega_lc * (z_zpf / (2.0 * d0)) * eta_cap
}

/// Pump-enhanced coupling G_em = (g_em/2) sqrt(P_D / ħ ω_LC κ_iT). The
/// square root is the intra-circuit pump amplitude in quanta for a drive
/// power `p_drive` on resonance.
pub fn pumped_g_em(g_em: f64, p_drive: f64, omega_lc: f64, kappa_i_total: f64) -> f64 {
    0.5 * g_em * (p_drive / (HBAR * omega_lc * kappa_i_total)).sqrt()
}

/// Electromechanical cooperativity at offset `omega` from the drive,
/// C_em(ω) = (4 G_em² / γ_m κ_iT) · κ_iT² / (4ω² + κ_iT²). The Lorentzian
/// factor is the circuit response rolling off away from resonance.
pub fn cooperativity_em(big_g_em: f64, gamma_m: f64, kappa_i_total: f64, omega: f64) -> f64 {
    let on_resonance = 4.0 * big_g_em * big_g_em / (gamma_m * kappa_i_total);
    let rolloff = kappa_i_total * kappa_i_total / (4.0 * omega * omega + kappa_i_total * kappa_i_total);
    on_resonance * rolloff
}

/// Static mechanical frequency shift from the rf pump's electrostatic
/// spring: δω = −(R P_D / 4 m ω₀) ε₀ A / d₀³, in rad/s. Negative because
/// the attractive force softens the mode.
pub fn gap_frequency_shift(r_circuit: f64, p_drive: f64, m_eff: f64, omega_0: f64, a_cap: f64, d0: f64) -> f64 {
    p_drive * gap_shift_slope(r_circuit, m_eff, omega_0, a_cap, d0)
}

/// Slope of the pump-induced frequency shift, δω / P_D, in rad/s per W.
pub fn gap_shift_slope(r_circuit: f64, m_eff: f64, omega_0: f64, a_cap: f64, d0: f64) -> f64 {
    -(r_circuit / (4.0 * m_eff * omega_0)) * EPSILON_0 * a_cap / (d0 * d0 * d0)
}

/// g_em evaluated from a config's calibrated participation.
pub fn g_em_of(cfg: &ExperimentConfig) -> f64 {
    coupling_g_em(cfg.omega_lc.rad_per_sec(), cfg.z_zpf(), cfg.d0, cfg.eta_cap)
}

/// Pump-enhanced G_em at the config's drive power.
pub fn big_g_em_of(cfg: &ExperimentConfig) -> f64 {
    pumped_g_em(g_em_of(cfg), cfg.p_drive.watts(), cfg.omega_lc.rad_per_sec(), cfg.kappa_i_total())
}

/// C_em(ω) at the config's operating point.
pub fn cooperativity_em_of(cfg: &ExperimentConfig, omega: f64) -> f64 {
    cooperativity_em(big_g_em_of(cfg), cfg.gamma_m, cfg.kappa_i_total(), omega)
}
