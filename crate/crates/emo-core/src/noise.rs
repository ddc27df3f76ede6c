//! Noise occupations, budgets, sideband spectra and sensitivity estimates.
//!
//! Conventions: spectral densities are two-sided and symmetrized, measured
//! in quanta; integrals over frequency carry dω/2π; noise referred to the
//! circuit's signal port divides out the full transduction path so that a
//! coherent rf signal of one quantum per second competes against the
//! quoted numbers directly.

use crate::config::ExperimentConfig;
use crate::constants::{HBAR, K_B};
use crate::dynamics::chi_mech;
use crate::electromech;
use crate::numerics;
use crate::optics;
use crate::units::PowerLevel;

/// Vacuum occupation of one quadrature, S_XX = S_YY = 1/2.
pub const VACUUM_QUADRATURE: f64 = 0.5;

/// Noise temperature demonstrated by the tuned-up instrument, in kelvin.
/// Quoted for context only; the canonical operating point in this crate
/// deliberately reproduces the conservative published budget instead.
pub const DEMONSTRATED_NOISE_TEMPERATURE_K: f64 = 84.0;

/// Thermal occupation in the high-temperature limit, k_B T / ħω.
/// All baths here sit at MHz frequencies and hundreds of kelvin, where
/// the full Bose factor differs from this by parts in 10⁷.
pub fn thermal_occupation(omega: f64, temperature: f64) -> f64 {
    K_B * temperature / (HBAR * omega)
}

/// Photon flux of a beam of power `power` at carrier `omega` (rad/s).
pub fn photon_flux(power: f64, omega: f64) -> f64 {
    power / (HBAR * omega)
}

/// Convert an input-referred occupation to a noise temperature at the
/// circuit frequency.
pub fn quanta_to_kelvin(quanta: f64, omega_lc: f64) -> f64 {
    quanta * HBAR * omega_lc / K_B
}

/// Drive phase-noise profile ℒ(ω) = δ_P / (ω² + δ_P²/4), normalized to
/// unit area under ∫ dω/2π over the whole line.
pub fn lorentzian_profile(omega: f64, delta_p: f64) -> f64 {
    delta_p / (omega * omega + delta_p * delta_p / 4.0)
}

/// Phase-noise pickup of the membrane over a band of half-width `half_width`
/// around ω_m, treating ℒ as constant across the narrow mechanical line:
/// ℒ(ω_m) γ_m atan(2W/γ_m) / 2π. The atan keeps the finite window honest;
/// it only reaches the γ_m/4 limit as W → ∞.
pub fn phase_pickup_flat(gamma_m: f64, omega_m: f64, delta_p: f64, half_width: f64) -> f64 {
    lorentzian_profile(omega_m, delta_p) * gamma_m * (2.0 * half_width / gamma_m).atan()
        / std::f64::consts::TAU
}

/// Phase-noise pickup integrated numerically:
/// ∫ dω/2π γ_m²|χ_m(ω)|² ℒ(ω) over [ω_m − W, ω_m + W].
/// The band must stay above ω = 0 or the drive-centered ℒ divergence
/// dominates; callers get a panic rather than a silently wrong number.
pub fn phase_pickup_band(gamma_m: f64, omega_m: f64, delta_p: f64, half_width: f64) -> f64 {
    assert!(half_width > 0.0 && half_width < omega_m, "band must stay above zero frequency");
    let f = |w: f64| {
        gamma_m * gamma_m * chi_mech(w, omega_m, gamma_m).norm_sqr() * lorentzian_profile(w, delta_p)
    };
    let lo = omega_m - half_width;
    let hi = omega_m + half_width;
    (numerics::adaptive_simpson(&f, lo, omega_m, 1e-10)
        + numerics::adaptive_simpson(&f, omega_m, hi, 1e-10))
        / std::f64::consts::TAU
}

/// Input-referred noise populations, in quanta at the circuit port.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct NoiseBudget {
    /// Optical shot noise divided by the transduction path gain.
    pub shot: f64,
    /// Membrane Brownian motion at the effective bath temperature.
    pub brownian: f64,
    /// Circuit Johnson noise at the physical temperature.
    pub johnson: f64,
    /// Drive phase noise picked up by the mechanical line.
    pub phase: f64,
}

impl NoiseBudget {
    pub fn total(&self) -> f64 {
        self.shot + self.brownian + self.johnson + self.phase
    }

    /// The same budget expressed as noise temperatures in kelvin.
    pub fn in_kelvin(&self, omega_lc: f64) -> NoiseBudget {
        NoiseBudget {
            shot: quanta_to_kelvin(self.shot, omega_lc),
            brownian: quanta_to_kelvin(self.brownian, omega_lc),
            johnson: quanta_to_kelvin(self.johnson, omega_lc),
            phase: quanta_to_kelvin(self.phase, omega_lc),
        }
    }
}

/// Input-referred noise budget at the config's operating point.
pub fn budget(cfg: &ExperimentConfig) -> NoiseBudget {
    let omega_m = cfg.omega_m.rad_per_sec();
    let c_em = electromech::cooperativity_em_of(cfg, omega_m);
    let c_om = optics::cooperativity_om_of(cfg);
    let inv_ri = 1.0 / cfg.ratio_i();
    let s_ff = thermal_occupation(omega_m, cfg.t_eff);
    let s_qq = thermal_occupation(cfg.omega_lc.rad_per_sec(), cfg.t_bath);
    let phi_d = photon_flux(cfg.p_drive.watts(), cfg.omega_d_rf().rad_per_sec());
    NoiseBudget {
        shot: inv_ri * 2.0 * VACUUM_QUADRATURE / (2.0 * c_om * cfg.ratio_o() * c_em),
        brownian: inv_ri * 2.0 * s_ff / c_em,
        johnson: inv_ri * s_qq,
        phase: cfg.eta_p * phi_d / cfg.gamma_m,
    }
}

/// Upgrade scenario: smaller gap, stronger pump, matched ports.
#[derive(Debug, Clone, PartialEq)]
pub struct ProspectiveOptions {
    /// New membrane gap (m).
    pub d0: f64,
    /// New circuit pump power.
    pub p_drive: PowerLevel,
    /// Drop the membrane's excess force noise, thermalizing it to the
    /// physical bath. Closing the gap reworks the mount that caused it.
    pub thermalize: bool,
    /// Keep the drive phase-noise term. Off by default: the scenario
    /// assumes a filtered pump.
    pub include_phase: bool,
}

impl Default for ProspectiveOptions {
    fn default() -> Self {
        ProspectiveOptions {
            d0: 100e-9,
            p_drive: PowerLevel::from_dbm(30.0),
            thermalize: true,
            include_phase: false,
        }
    }
}

/// Electromechanical cooperativity of the upgraded instrument. The gap
/// enters at the fourth power: participation and transduction each gain
/// a factor d₀/d, squared into the cooperativity; pump power enters
/// linearly. The trimmer is assumed retuned so the total circuit
/// capacitance stays put.
pub fn prospective_cooperativity(cfg: &ExperimentConfig, opts: &ProspectiveOptions) -> f64 {
    let base = electromech::cooperativity_em_of(cfg, cfg.omega_m.rad_per_sec());
    let gap_gain = (cfg.d0 / opts.d0).powi(4);
    let power_gain = opts.p_drive.watts() / cfg.p_drive.watts();
    base * gap_gain * power_gain
}

/// Noise budget of the upgrade scenario: both ports critically matched
/// (coupling ratios → 1), optomechanical side unchanged.
pub fn prospective_budget(cfg: &ExperimentConfig, opts: &ProspectiveOptions) -> NoiseBudget {
    let omega_m = cfg.omega_m.rad_per_sec();
    let c_em = prospective_cooperativity(cfg, opts);
    let c_om = optics::cooperativity_om_of(cfg);
    let t_mech = if opts.thermalize { cfg.t_bath } else { cfg.t_eff };
    let s_ff = thermal_occupation(omega_m, t_mech);
    let s_qq = thermal_occupation(cfg.omega_lc.rad_per_sec(), cfg.t_bath);
    let phase = if opts.include_phase {
        let phi_d = photon_flux(opts.p_drive.watts(), cfg.omega_d_rf().rad_per_sec());
        cfg.eta_p * phi_d / cfg.gamma_m
    } else {
        0.0
    };
    NoiseBudget {
        shot: 2.0 * VACUUM_QUADRATURE / (2.0 * c_om * c_em),
        brownian: 2.0 * s_ff / c_em,
        johnson: s_qq,
        phase,
    }
}

/// What went wrong while building a noise estimate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NoiseError {
    #[error("config field {field} is required for this estimate")]
    MissingField { field: &'static str },
    #[error("band half-width {half_width:e} rad/s must stay below the mechanical frequency {omega_m:e} rad/s")]
    BandTooWide { half_width: f64, omega_m: f64 },
}

/// Squared signal flux S² (quanta/s) implied by the configured echo
/// strength: the quoted quanta count is S² (T₂*/2)(γ_m T₂*/2), the echo
/// duration times the fraction the membrane bandwidth accepts.
pub fn signal_flux_squared(cfg: &ExperimentConfig) -> Result<f64, NoiseError> {
    let s_q = cfg
        .s_signal_quanta
        .ok_or(NoiseError::MissingField { field: "signal.S_signal_quanta" })?;
    let t2 = cfg.t2_star.ok_or(NoiseError::MissingField { field: "membrane.T2_star" })?;
    Ok(s_q / ((t2 / 2.0) * (cfg.gamma_m * t2 / 2.0)))
}

/// Which sensitivity estimate to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnrVariant {
    /// Continuous wave in a γ_m bandwidth: shot + Brownian + Johnson,
    /// referred through the measured couplings.
    Narrowband,
    /// Narrowband plus the drive phase-noise floor at ω_m.
    WithPhaseNoise,
    /// Pulsed echo: quanta in the echo against the full input-referred
    /// budget, phase noise included.
    Echo,
    /// Narrowband with both ports taken perfectly coupled.
    Overcoupled,
}

/// A sensitivity estimate, kept factored so the ratio can be audited.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SnrReport {
    /// Signal strength: squared flux S² for the continuous variants,
    /// total quanta in the echo for the pulsed one.
    pub signal_quanta: f64,
    /// Competing noise in matching units.
    pub noise_quanta: f64,
    /// √(signal_quanta / noise_quanta).
    pub snr_single_shot: f64,
}

impl SnrReport {
    /// Amplitude signal-to-noise after averaging `shots` repetitions.
    pub fn averaged(&self, shots: u32) -> f64 {
        crate::echo::average_shots(self.snr_single_shot, shots)
    }
}

/// Single-shot signal-to-noise of the configured signal under `variant`.
pub fn snr(cfg: &ExperimentConfig, variant: SnrVariant) -> Result<SnrReport, NoiseError> {
    let omega_m = cfg.omega_m.rad_per_sec();
    let c_em = electromech::cooperativity_em_of(cfg, omega_m);
    let c_om = optics::cooperativity_om_of(cfg);
    let s_ff = thermal_occupation(omega_m, cfg.t_eff);
    let s_qq = thermal_occupation(cfg.omega_lc.rad_per_sec(), cfg.t_bath);
    let brownian = 2.0 * s_ff / c_em;
    let (signal, noise) = match variant {
        SnrVariant::Narrowband => {
            let shot = 2.0 * VACUUM_QUADRATURE / (2.0 * c_om * cfg.ratio_o() * c_em);
            let density = (shot + brownian + s_qq) / cfg.ratio_i();
            (signal_flux_squared(cfg)?, density * cfg.gamma_m)
        }
        SnrVariant::WithPhaseNoise => {
            let shot = 2.0 * VACUUM_QUADRATURE / (2.0 * c_om * cfg.ratio_o() * c_em);
            let phi_d = photon_flux(cfg.p_drive.watts(), cfg.omega_d_rf().rad_per_sec());
            let phase = cfg.ratio_i() * lorentzian_profile(omega_m, cfg.delta_p) * phi_d;
            let density = (shot + brownian + s_qq + phase) / cfg.ratio_i();
            (signal_flux_squared(cfg)?, density * cfg.gamma_m)
        }
        SnrVariant::Echo => {
            let s_q = cfg
                .s_signal_quanta
                .ok_or(NoiseError::MissingField { field: "signal.S_signal_quanta" })?;
            (s_q, budget(cfg).total())
        }
        SnrVariant::Overcoupled => {
            let shot = 2.0 * VACUUM_QUADRATURE / (2.0 * c_om * c_em);
            let density = shot + brownian + s_qq;
            (signal_flux_squared(cfg)?, density * cfg.gamma_m)
        }
    };
    Ok(SnrReport {
        signal_quanta: signal,
        noise_quanta: noise,
        snr_single_shot: (signal / noise).sqrt(),
    })
}

/// Bath occupations and quadrature floors feeding a sideband spectrum.
/// Keeping them explicit lets calibration work on synthetic spectra with
/// any of the sources switched off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseInputs {
    /// Membrane force-noise occupation at ω_m.
    pub s_ff: f64,
    /// Circuit charge-noise occupation at ω_LC.
    pub s_qq: f64,
    /// Optical amplitude-quadrature floor.
    pub s_xx: f64,
    /// Optical phase-quadrature floor.
    pub s_yy: f64,
    /// Drive phase-noise linewidth (rad/s); zero switches the term off.
    pub delta_p: f64,
}

impl NoiseInputs {
    /// Shot-noise-limited detection at the config's bath temperatures.
    pub fn shot_limited(cfg: &ExperimentConfig) -> NoiseInputs {
        NoiseInputs {
            s_ff: thermal_occupation(cfg.omega_m.rad_per_sec(), cfg.t_eff),
            s_qq: thermal_occupation(cfg.omega_lc.rad_per_sec(), cfg.t_bath),
            s_xx: VACUUM_QUADRATURE,
            s_yy: VACUUM_QUADRATURE,
            delta_p: cfg.delta_p,
        }
    }

    /// Every stochastic source off. A spectrum computed from this, with
    /// no coherent lines requested, is identically zero.
    pub fn silent() -> NoiseInputs {
        NoiseInputs { s_ff: 0.0, s_qq: 0.0, s_xx: 0.0, s_yy: 0.0, delta_p: 0.0 }
    }
}

/// A coherent calibration tone riding on the drive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToneSpec {
    /// Sideband offset from the drive (rad/s).
    pub offset: f64,
    /// Photon flux of the injected tone (quanta/s).
    pub flux: f64,
    /// Fraction of the drive flux leaking into the tone bin.
    pub leak: f64,
}

/// What to include in a computed sideband spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumOptions {
    /// Number of grid points across the band.
    pub points: usize,
    /// Half-width of the band around ω_m (rad/s); `None` means 20 γ_m.
    pub half_width: Option<f64>,
    /// Deposit the configured echo signal as a line at the (pump-shifted)
    /// mechanical frequency.
    pub include_signal: bool,
    pub tone: Option<ToneSpec>,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions { points: 4096, half_width: None, include_signal: false, tone: None }
    }
}

/// One-sided record of the upper optical sideband, sampled on a uniform
/// grid of sideband offsets from the drive.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Sideband offsets (rad/s).
    pub omega: Vec<f64>,
    /// Photon-flux spectral density at each offset.
    pub density: Vec<f64>,
}

impl Spectrum {
    /// ∫ density dω/2π over the whole record.
    pub fn band_power(&self) -> f64 {
        numerics::trapezoid(&self.omega, &self.density) / std::f64::consts::TAU
    }
}

/// Photodetected sideband spectrum around the mechanical frequency.
///
/// The mechanical response is evaluated at the pump-shifted frequency
/// ω_m′ = ω_m + δω(P_D). Narrow coherent lines (signal, tone) are
/// deposited into their nearest bin with the bin width divided out, so
/// band integrals recover their full weight.
pub fn sideband_spectrum(
    cfg: &ExperimentConfig,
    noise: &NoiseInputs,
    opts: &SpectrumOptions,
) -> Result<Spectrum, NoiseError> {
    let omega_m = cfg.omega_m.rad_per_sec();
    let gamma_m = cfg.gamma_m;
    let half_width = opts.half_width.unwrap_or(20.0 * gamma_m);
    if half_width >= omega_m {
        return Err(NoiseError::BandTooWide { half_width, omega_m });
    }
    let shift = electromech::gap_frequency_shift(
        cfg.r_circuit,
        cfg.p_drive.watts(),
        cfg.m_eff,
        cfg.omega_0.rad_per_sec(),
        cfg.a_cap,
        cfg.d0,
    );
    let omega_m_shifted = omega_m + shift;

    let r = cfg.ratio_o();
    let r_i = cfg.ratio_i();
    let c_om = optics::cooperativity_om_of(cfg);
    let flux_scale = cfg.kappa_o * optics::n_photons_of(cfg);
    let phi_d = photon_flux(cfg.p_drive.watts(), cfg.omega_d_rf().rad_per_sec());
    let floor = (r * r + (1.0 - r) * (1.0 - r)) * 2.0 * (noise.s_xx + noise.s_yy);

    let n = opts.points.max(2);
    let step = 2.0 * half_width / (n - 1) as f64;
    let mut omega = Vec::with_capacity(n);
    let mut density = Vec::with_capacity(n);
    for i in 0..n {
        let w = omega_m - half_width + step * i as f64;
        let mech = gamma_m * gamma_m * chi_mech(w, omega_m_shifted, gamma_m).norm_sqr();
        let c_em = electromech::cooperativity_em_of(cfg, w);
        let mut s = floor;
        s += c_om * r * 2.0 * mech * 4.0 * noise.s_ff;
        let mut circuit_noise = 4.0 * noise.s_qq;
        if noise.delta_p > 0.0 {
            circuit_noise += 4.0 * r_i * lorentzian_profile(w, noise.delta_p) * phi_d;
        }
        s += c_om * r * c_em * mech * circuit_noise;
        omega.push(w);
        density.push(flux_scale * s);
    }

    let mut deposit = |w_line: f64, flux: f64| {
        if w_line < omega[0] || w_line > omega[n - 1] {
            return;
        }
        let bin = ((w_line - omega[0]) / step).round() as usize;
        let mech = gamma_m * gamma_m * chi_mech(w_line, omega_m_shifted, gamma_m).norm_sqr();
        let c_em = electromech::cooperativity_em_of(cfg, w_line);
        let weight = flux_scale * c_om * r * c_em * mech * 4.0 * r_i * flux;
        density[bin] += weight / step;
    };

    if opts.include_signal {
        let s2 = signal_flux_squared(cfg)?;
        deposit(omega_m_shifted, s2);
    }
    if let Some(tone) = &opts.tone {
        deposit(tone.offset, tone.flux + tone.leak * phi_d);
    }

    Ok(Spectrum { omega, density })
}

/// Parameters of the membrane-noise-to-tone calibration model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioParams {
    /// Effective mechanical bath temperature (K).
    pub t_eff: f64,
    /// Integrated phase-noise pickup.
    pub eta_p: f64,
    /// Drive leak fraction into the tone bin.
    pub tone_leak: f64,
}

/// Band-integrated membrane noise referred through the optical readout,
/// divided by the common κ_o N_D C_om r prefactor:
/// 2 γ_m n(ω_m, T_eff) + C_em(ω_m)[γ_m n(ω_LC, T) + 4 r_i η_p Φ_D].
pub fn membrane_noise_rate(cfg: &ExperimentConfig, params: &RatioParams) -> f64 {
    let omega_m = cfg.omega_m.rad_per_sec();
    let c_em = electromech::cooperativity_em_of(cfg, omega_m);
    let phi_d = photon_flux(cfg.p_drive.watts(), cfg.omega_d_rf().rad_per_sec());
    2.0 * cfg.gamma_m * thermal_occupation(omega_m, params.t_eff)
        + c_em
            * (cfg.gamma_m * thermal_occupation(cfg.omega_lc.rad_per_sec(), cfg.t_bath)
                + 4.0 * cfg.ratio_i() * params.eta_p * phi_d)
}

/// Integrated weight of the calibration tone in the same units:
/// C_em(ω_t) γ_m²|χ_m(ω_t)|² r_i (4/2π)(Φ_T + L_δ Φ_D), with the
/// mechanical response taken at the pump-shifted resonance.
pub fn tone_response_rate(cfg: &ExperimentConfig, tone: &ToneSpec) -> f64 {
    let gamma_m = cfg.gamma_m;
    let shift = electromech::gap_frequency_shift(
        cfg.r_circuit,
        cfg.p_drive.watts(),
        cfg.m_eff,
        cfg.omega_0.rad_per_sec(),
        cfg.a_cap,
        cfg.d0,
    );
    let omega_m_shifted = cfg.omega_m.rad_per_sec() + shift;
    let mech = gamma_m * gamma_m * chi_mech(tone.offset, omega_m_shifted, gamma_m).norm_sqr();
    let c_em = electromech::cooperativity_em_of(cfg, tone.offset);
    let phi_d = photon_flux(cfg.p_drive.watts(), cfg.omega_d_rf().rad_per_sec());
    c_em * mech * cfg.ratio_i() * (4.0 / std::f64::consts::TAU) * (tone.flux + tone.leak * phi_d)
}

/// Membrane-noise area over tone area: the calibration observable. All
/// optical prefactors cancel, so this is independent of C_om and of the
/// detection efficiency.
pub fn noise_tone_ratio(cfg: &ExperimentConfig, tone: &ToneSpec, params: &RatioParams) -> f64 {
    let tone = ToneSpec { leak: params.tone_leak, ..*tone };
    membrane_noise_rate(cfg, params) / tone_response_rate(cfg, &tone)
}
