//! Linearized input-output dynamics of the full transduction chain.
//!
//! Everything is written in the rotating frame of the two pumps, in
//! frequency space, at the standard operating point: circuit pump resonant
//! (Δ_i = 0), optical pump half a linewidth off resonance, and the slowly
//! varying cavity quadratures adiabatically following the membrane. Input
//! operators become c-number amplitudes here; spectra attach the proper
//! occupations to each port downstream.

use num_complex::Complex64;

use crate::config::ExperimentConfig;
use crate::{electromech, optics};

/// Mechanical susceptibility χ_m(ω) = ω_m / (ω_m² − ω² − iωγ_m).
///
/// Written so that γ_m² |χ_m(ω_m)|² = 1 holds exactly in floating point:
/// at ω = ω_m the real part of the denominator cancels identically.
pub fn chi_mech(omega: f64, omega_m: f64, gamma_m: f64) -> Complex64 {
    omega_m / Complex64::new(omega_m * omega_m - omega * omega, -omega * gamma_m)
}

/// Circuit susceptibility χ_LC(ω) = [(−iω + κ_iT/2)² + Δ_i²]⁻¹.
pub fn chi_circuit(omega: f64, kappa_i_total: f64, delta_i: f64) -> Complex64 {
    let pole = Complex64::new(kappa_i_total / 2.0, -omega);
    (pole * pole + delta_i * delta_i).inv()
}

/// Cavity susceptibility, same form as [`chi_circuit`] with the optical
/// linewidth and detuning.
pub fn chi_cavity(omega: f64, kappa_o_total: f64, delta_o: f64) -> Complex64 {
    chi_circuit(omega, kappa_o_total, delta_o)
}

/// Complex amplitudes entering each port of the chain at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Inputs {
    /// Optical amplitude quadrature at the input mirror.
    pub x_in: Complex64,
    /// Optical phase quadrature at the input mirror.
    pub y_in: Complex64,
    /// Circuit noise entering through the internal-loss port (rate γ_i).
    pub q_internal: Complex64,
    /// Circuit noise entering through the signal port (rate κ_i).
    pub q_port: Complex64,
    /// The rf signal itself, entering through the same κ_i port.
    pub signal: Complex64,
    /// Langevin force on the membrane.
    pub force: Complex64,
}

impl Inputs {
    /// A pure signal drive of amplitude `s`, every noise port silent.
    pub fn signal_only(s: f64) -> Self {
        Inputs { signal: Complex64::new(s, 0.0), ..Default::default() }
    }
}

/// Output quadratures and the membrane motion that produced them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outputs {
    pub x_out: Complex64,
    pub y_out: Complex64,
    /// Membrane displacement amplitude z(ω), in zero-point units.
    pub z: Complex64,
}

impl Outputs {
    /// |X_out|² + |Y_out|², the two-quadrature output power.
    pub fn quadrature_power(&self) -> f64 {
        self.x_out.norm_sqr() + self.y_out.norm_sqr()
    }
}

/// Frequency-domain transfer model of circuit → membrane → cavity.
///
/// All rates are rad/s. `back_action` keeps the term where the optical
/// quadratures push back on the membrane; it is on by default and only
/// matters at order G_om².
#[derive(Debug, Clone, PartialEq)]
pub struct TransductionModel {
    pub omega_m: f64,
    pub gamma_m: f64,
    pub kappa_i: f64,
    pub gamma_i: f64,
    pub kappa_o: f64,
    pub kappa_o_total: f64,
    pub big_g_em: f64,
    pub big_g_om: f64,
    pub n_photons: f64,
    pub back_action: bool,
}

impl TransductionModel {
    /// Build the model at a config's operating point.
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        TransductionModel {
            omega_m: cfg.omega_m.rad_per_sec(),
            gamma_m: cfg.gamma_m,
            kappa_i: cfg.kappa_i,
            gamma_i: cfg.gamma_i,
            kappa_o: cfg.kappa_o,
            kappa_o_total: cfg.kappa_o_total(),
            big_g_em: electromech::big_g_em_of(cfg),
            big_g_om: optics::big_g_om_of(cfg),
            n_photons: optics::n_photons_of(cfg),
            back_action: true,
        }
    }

    /// Same model with the optical back-action term removed.
    pub fn without_back_action(mut self) -> Self {
        self.back_action = false;
        self
    }

    /// Same model with the mechanical resonance moved, e.g. to the
    /// pump-shifted frequency.
    pub fn with_mechanical_frequency(mut self, omega_m: f64) -> Self {
        self.omega_m = omega_m;
        self
    }

    pub fn kappa_i_total(&self) -> f64 {
        self.kappa_i + self.gamma_i
    }

    /// Optical coupling efficiency r = κ_o/κ_oT. Also the rotation angle
    /// mixing the reflected quadratures.
    pub fn r_o(&self) -> f64 {
        self.kappa_o / self.kappa_o_total
    }

    /// G_om √κ_o / κ_oT, the factor converting membrane motion into
    /// output quadrature amplitude.
    pub fn readout_gain(&self) -> f64 {
        self.big_g_om * self.kappa_o.sqrt() / self.kappa_o_total
    }

    /// χ_m at this model's mechanical frequency.
    pub fn chi_mech(&self, omega: f64) -> Complex64 {
        chi_mech(omega, self.omega_m, self.gamma_m)
    }

    /// Membrane displacement driven by all ports:
    /// z(ω) = χ_m [ −√(2γ_m) f − G_em/(iω − κ_iT/2) (√γ_i q + √κ_i (Q + S))
    ///              − (G_om√κ_o/κ_oT)(Y_in − X_in) ].
    pub fn displacement(&self, omega: f64, inputs: &Inputs) -> Complex64 {
        let circuit_pole = Complex64::new(-self.kappa_i_total() / 2.0, omega);
        let circuit_drive = self.gamma_i.sqrt() * inputs.q_internal
            + self.kappa_i.sqrt() * (inputs.q_port + inputs.signal);
        let mut force = -(2.0 * self.gamma_m).sqrt() * inputs.force
            - self.big_g_em / circuit_pole * circuit_drive;
        if self.back_action {
            force -= self.readout_gain() * (inputs.y_in - inputs.x_in);
        }
        self.chi_mech(omega) * force
    }

    /// Reflected output quadratures. The cavity rotates the promptly
    /// reflected field by r and adds the membrane's phase imprint.
    pub fn output(&self, omega: f64, inputs: &Inputs) -> Outputs {
        let r = Complex64::new(self.r_o(), 0.0);
        let t = Complex64::new(1.0 - self.r_o(), 0.0);
        let z = self.displacement(omega, inputs);
        let imprint = self.readout_gain() * z;
        Outputs {
            x_out: t * inputs.x_in + r * inputs.y_in + imprint,
            y_out: t * inputs.y_in - r * inputs.x_in - imprint,
            z,
        }
    }

    /// Detected photon-flux amplitude O(ω) = √(κ_o N_D) √(|X|² + |Y|²).
    pub fn detected_amplitude(&self, omega: f64, inputs: &Inputs) -> f64 {
        (self.kappa_o * self.n_photons).sqrt() * self.output(omega, inputs).quadrature_power().sqrt()
    }

    /// Closed form for the signal-only quadrature power per unit S²:
    /// |X|² + |Y|² = 2 C_om r_o C_em(ω) r_i · γ_m²|χ_m(ω)|² · S².
    /// At ω = ω_m the susceptibility factor is exactly 1.
    pub fn signal_path_gain(&self, omega: f64) -> f64 {
        let c_om = optics::cooperativity_om(self.big_g_om, self.gamma_m, self.kappa_o_total);
        let c_em = electromech::cooperativity_em(self.big_g_em, self.gamma_m, self.kappa_i_total(), omega);
        let r_i = self.kappa_i / self.kappa_i_total();
        let mech = self.gamma_m * self.gamma_m * self.chi_mech(omega).norm_sqr();
        2.0 * c_om * self.r_o() * c_em * r_i * mech
    }
}

/// Figure of merit for the whole chain: C_om (κ_o/κ_oT) C_em (κ_i/κ_iT),
/// the fraction of an rf signal quantum that reaches the detector as an
/// optical sideband quantum.
pub fn signal_transfer_rate(
    c_om: f64,
    kappa_o: f64,
    kappa_o_total: f64,
    c_em: f64,
    kappa_i: f64,
    kappa_i_total: f64,
) -> f64 {
    c_om * (kappa_o / kappa_o_total) * c_em * (kappa_i / kappa_i_total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::TAU;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn mechanical_susceptibility_on_resonance_is_i_over_gamma() {
        let omega_m = TAU * 180e3;
        let gamma = TAU * 100.0;
        let chi = chi_mech(omega_m, omega_m, gamma);
        // the real part vanishes identically; the rest only up to the
        // rounding of the complex division
        assert_eq!(chi.re, 0.0);
        assert!(close(chi.im, 1.0 / gamma, 1e-14));
        assert!((gamma * gamma * chi.norm_sqr() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn susceptibilities_obey_reality() {
        let chi_p = chi_mech(1.1e6, TAU * 180e3, TAU * 100.0);
        let chi_n = chi_mech(-1.1e6, TAU * 180e3, TAU * 100.0);
        assert_eq!(chi_n, chi_p.conj());
        let lc_p = chi_circuit(2e6, TAU * 1.6e6, 0.0);
        let lc_n = chi_circuit(-2e6, TAU * 1.6e6, 0.0);
        assert!(close(lc_n.re, lc_p.conj().re, 1e-15) && close(lc_n.im, lc_p.conj().im, 1e-15));
    }

    #[test]
    fn circuit_susceptibility_dc_value() {
        let kit = TAU * 1.6e6;
        let chi = chi_circuit(0.0, kit, 0.0);
        assert!(close(chi.re, 4.0 / (kit * kit), 1e-15));
        assert_eq!(chi.im, 0.0);
    }

    #[test]
    fn signal_only_power_matches_closed_form_on_resonance() {
        let cfg = ExperimentConfig::canonical();
        let model = TransductionModel::from_config(&cfg);
        let omega = model.omega_m;
        let s = 1.3e4;
        let out = model.output(omega, &Inputs::signal_only(s));
        let expected = model.signal_path_gain(omega) * s * s;
        assert!(
            close(out.quadrature_power(), expected, 1e-9),
            "power {:e} vs closed form {:e}",
            out.quadrature_power(),
            expected
        );
    }

    #[test]
    fn signal_only_power_matches_closed_form_off_resonance() {
        let cfg = ExperimentConfig::canonical();
        let model = TransductionModel::from_config(&cfg);
        for omega in [0.3 * model.omega_m, model.omega_m * 1.002, 3.0 * model.omega_m] {
            let out = model.output(omega, &Inputs::signal_only(2.0));
            let expected = model.signal_path_gain(omega) * 4.0;
            assert!(close(out.quadrature_power(), expected, 1e-9));
        }
    }

    #[test]
    fn back_action_feeds_optical_input_into_membrane() {
        let cfg = ExperimentConfig::canonical();
        let model = TransductionModel::from_config(&cfg);
        let inputs = Inputs { x_in: Complex64::new(1.0, 0.0), ..Default::default() };
        let z_on = model.displacement(model.omega_m, &inputs);
        let z_off = model.clone().without_back_action().displacement(model.omega_m, &inputs);
        assert!(z_on.norm() > 0.0);
        assert_eq!(z_off, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn outputs_are_linear_in_inputs() {
        let cfg = ExperimentConfig::canonical();
        let model = TransductionModel::from_config(&cfg);
        let a = Inputs {
            x_in: Complex64::new(0.3, -0.1),
            y_in: Complex64::new(-1.2, 0.4),
            q_internal: Complex64::new(0.9, 0.0),
            q_port: Complex64::new(0.0, 2.0),
            signal: Complex64::new(5.0, 0.0),
            force: Complex64::new(-0.7, 0.2),
        };
        let b = Inputs {
            x_in: Complex64::new(-0.5, 0.8),
            y_in: Complex64::new(0.25, 0.0),
            q_internal: Complex64::new(0.0, -1.1),
            q_port: Complex64::new(0.6, 0.0),
            signal: Complex64::new(0.0, 3.0),
            force: Complex64::new(1.4, -0.9),
        };
        let sum = Inputs {
            x_in: a.x_in + b.x_in,
            y_in: a.y_in + b.y_in,
            q_internal: a.q_internal + b.q_internal,
            q_port: a.q_port + b.q_port,
            signal: a.signal + b.signal,
            force: a.force + b.force,
        };
        let omega = model.omega_m * 1.0003;
        let oa = model.output(omega, &a);
        let ob = model.output(omega, &b);
        let os = model.output(omega, &sum);
        assert!((os.x_out - (oa.x_out + ob.x_out)).norm() < 1e-12 * os.x_out.norm().max(1.0));
        assert!((os.y_out - (oa.y_out + ob.y_out)).norm() < 1e-12 * os.y_out.norm().max(1.0));
    }

    #[test]
    fn detected_amplitude_scales_photon_flux() {
        let cfg = ExperimentConfig::canonical();
        let model = TransductionModel::from_config(&cfg);
        let inputs = Inputs::signal_only(1.0);
        let o = model.detected_amplitude(model.omega_m, &inputs);
        let manual = (model.kappa_o * model.n_photons).sqrt()
            * model.output(model.omega_m, &inputs).quadrature_power().sqrt();
        assert_eq!(o, manual);
    }

    #[test]
    fn transfer_rate_for_demonstrated_parameters() {
        let rate = signal_transfer_rate(
            0.32e-3,
            TAU * 43.0e3,
            TAU * 1.1e6,
            0.019,
            TAU * 810.0e3,
            TAU * 1.6e6,
        );
        assert!(close(rate, 1.2032182e-7, 1e-7), "rate {rate:e}");
    }

    #[test]
    fn transfer_rate_vanishes_with_any_factor() {
        assert_eq!(signal_transfer_rate(0.0, 1.0, 2.0, 0.019, 1.0, 2.0), 0.0);
        assert_eq!(signal_transfer_rate(3.2e-4, 1.0, 2.0, 0.0, 1.0, 2.0), 0.0);
    }

    #[test]
    fn transfer_rate_overcoupled_limit_is_cooperativity_product() {
        let rate = signal_transfer_rate(3.2e-4, 5.0, 5.0, 0.019, 7.0, 7.0);
        assert!(close(rate, 3.2e-4 * 0.019, 1e-15));
    }

    #[test]
    fn transfer_rate_matches_path_gain_factorisation() {
        let cfg = ExperimentConfig::canonical();
        let model = TransductionModel::from_config(&cfg);
        let c_om = crate::optics::cooperativity_om_of(&cfg);
        let c_em = crate::electromech::cooperativity_em_of(&cfg, model.omega_m);
        let rate = signal_transfer_rate(
            c_om,
            cfg.kappa_o,
            cfg.kappa_o_total(),
            c_em,
            cfg.kappa_i,
            cfg.kappa_i_total(),
        );
        let gain = model.signal_path_gain(model.omega_m);
        assert!(close(2.0 * rate, gain, 1e-9), "2*rate {:e} vs gain {:e}", 2.0 * rate, gain);
    }
}
