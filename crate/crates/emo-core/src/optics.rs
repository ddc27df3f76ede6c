//! Gaussian cavity geometry and the membrane-cavity coupling.
//!
//! The cavity is hemispherical: flat input mirror at the beam waist, one
//! curved mirror a length L away. Geometry fixes the Rayleigh range and
//! waist; laser power and mirror losses fix the pump-enhanced coupling.

use crate::config::ExperimentConfig;
use crate::constants::HBAR;

/// Geometry problems that have no physical solution.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OpticsError {
    #[error("cavity of length {length:.3e} m with mirror radius {r_mirror:.3e} m is unstable")]
    Unstable { length: f64, r_mirror: f64 },
    #[error("no stable cavity produces a {waist_radius:.3e} m waist with mirror radius {r_mirror:.3e} m")]
    NoStableSolution { waist_radius: f64, r_mirror: f64 },
    #[error("{name} must be > 0, got {value:.3e}")]
    NonPositive { name: &'static str, value: f64 },
}

/// Wavefront curvature radius at a point along the beam. Tagged so the
/// waist (infinite radius) never turns into a division by zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Curvature {
    /// At the waist: plane wavefront.
    Flat,
    /// Radius of curvature in metres, positive for a diverging beam.
    Curved(f64),
}

/// Rayleigh range z₀ = π W₀² / λ of a beam with waist radius `w0`.
pub fn rayleigh_range(w0: f64, lambda: f64) -> f64 {
    std::f64::consts::PI * w0 * w0 / lambda
}

/// Waist radius W₀ = sqrt(λ z₀ / π) of a beam with Rayleigh range `z0`.
pub fn waist_radius(z0: f64, lambda: f64) -> f64 {
    (lambda * z0 / std::f64::consts::PI).sqrt()
}

/// Wavefront curvature R(z) = z (1 + (z₀/z)²) at distance `z` from the
/// waist.
pub fn wavefront_curvature(z: f64, z0: f64) -> Curvature {
    if z == 0.0 {
        Curvature::Flat
    } else {
        Curvature::Curved(z * (1.0 + (z0 / z).powi(2)))
    }
}

/// Mode geometry of a hemispherical cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityMode {
    /// Cavity length (m), flat mirror to curved mirror.
    pub length: f64,
    /// Curved-mirror radius (m).
    pub r_mirror: f64,
    /// Rayleigh range of the resonant mode (m).
    pub rayleigh: f64,
    /// Waist radius at the flat mirror (m).
    pub waist: f64,
}

impl CavityMode {
    /// Waist diameter 2W₀ (m), the number quoted for mode-matching.
    pub fn waist_diameter(&self) -> f64 {
        2.0 * self.waist
    }
}

/// Solve the mode of a hemispherical cavity: the wavefront must match the
/// curved mirror at z = L, so z₀² = L (R − L). Unstable once L ≥ R.
pub fn hemispherical_mode(length: f64, r_mirror: f64, lambda: f64) -> Result<CavityMode, OpticsError> {
    for (name, value) in [("length", length), ("r_mirror", r_mirror), ("lambda", lambda)] {
        if !(value > 0.0) {
            return Err(OpticsError::NonPositive { name, value });
        }
    }
    let z0_sq = length * (r_mirror - length);
    if z0_sq <= 0.0 {
        return Err(OpticsError::Unstable { length, r_mirror });
    }
    let rayleigh = z0_sq.sqrt();
    Ok(CavityMode { length, r_mirror, rayleigh, waist: waist_radius(rayleigh, lambda) })
}

/// Inverse problem: which cavity lengths give a requested waist radius
/// against a mirror of radius `r_mirror`? Both roots of z² − Rz + z₀² = 0,
/// sorted ascending. Fails once the requested waist needs z₀ > R/2.
pub fn lengths_for_waist(w0: f64, r_mirror: f64, lambda: f64) -> Result<(f64, f64), OpticsError> {
    for (name, value) in [("waist", w0), ("r_mirror", r_mirror), ("lambda", lambda)] {
        if !(value > 0.0) {
            return Err(OpticsError::NonPositive { name, value });
        }
    }
    let z0 = rayleigh_range(w0, lambda);
    let disc = r_mirror * r_mirror - 4.0 * z0 * z0;
    if disc < 0.0 {
        return Err(OpticsError::NoStableSolution { waist_radius: w0, r_mirror });
    }
    // take the short root from the product z_short z_long = z0², not from
    // R − √disc, which cancels badly when z0 ≪ R
    let long = (r_mirror + disc.sqrt()) / 2.0;
    Ok((z0 * z0 / long, long))
}

/// Mean intracavity photon number N_D = (P / ħΩ) · 2κ_o / κ_oT² for a
/// drive of power `p_opt` at carrier `omega_c` (rad/s), injected through
/// the κ_o mirror, half a linewidth off resonance.
pub fn intracavity_photons(p_opt: f64, omega_c: f64, kappa_o: f64, kappa_o_total: f64) -> f64 {
    (p_opt / (HBAR * omega_c)) * 2.0 * kappa_o / (kappa_o_total * kappa_o_total)
}

/// Radiation-pressure value of the single-photon coupling,
/// g_om = Ω_c z_zpf / L. Measured couplings can exceed this when
/// photothermal forces assist the radiation pressure.
pub fn g_om_radiation_pressure(omega_c: f64, z_zpf: f64, length: f64) -> f64 {
    omega_c * z_zpf / length
}

/// Pump-enhanced optomechanical coupling G_om = (g_om/2) sqrt(N).
pub fn pumped_g_om(g_om: f64, n_photons: f64) -> f64 {
    0.5 * g_om * n_photons.sqrt()
}

/// Invert [`pumped_g_om`]: the single-photon coupling implied by a
/// measured G_om at known photon number.
pub fn g_om_from_pumped(big_g_om: f64, n_photons: f64) -> f64 {
    2.0 * big_g_om / n_photons.sqrt()
}

/// Optomechanical cooperativity C_om = G_om² / γ_m κ_oT.
pub fn cooperativity_om(big_g_om: f64, gamma_m: f64, kappa_o_total: f64) -> f64 {
    big_g_om * big_g_om / (gamma_m * kappa_o_total)
}

/// Photon number at the config's laser power and optical linewidths.
pub fn n_photons_of(cfg: &ExperimentConfig) -> f64 {
    intracavity_photons(
        cfg.p_optical.watts(),
        cfg.omega_c_optical().rad_per_sec(),
        cfg.kappa_o,
        cfg.kappa_o_total(),
    )
}

/// Pump-enhanced G_om from the config's calibrated g_om.
pub fn big_g_om_of(cfg: &ExperimentConfig) -> f64 {
    pumped_g_om(cfg.g_om, n_photons_of(cfg))
}

/// C_om at the config's operating point.
pub fn cooperativity_om_of(cfg: &ExperimentConfig) -> f64 {
    cooperativity_om(big_g_om_of(cfg), cfg.gamma_m, cfg.kappa_o_total())
}

/// Radiation-pressure g_om bound for the config's cavity.
pub fn g_om_bound_of(cfg: &ExperimentConfig) -> f64 {
    g_om_radiation_pressure(cfg.omega_c_optical().rad_per_sec(), cfg.z_zpf(), cfg.cavity_length)
}
