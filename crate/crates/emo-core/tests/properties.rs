//! Randomized invariants: symmetries, scalings, and round trips that must
//! hold across the whole parameter space, not just at the canonical
//! operating point.

use emo_core::config::ExperimentConfig;
use emo_core::constants::TAU;
use emo_core::dynamics::{self, Inputs, TransductionModel};
use emo_core::echo::{convolve_response, impulse_response, quadrature_demodulate, synth_echo, EchoParams, Waveform};
use emo_core::noise::{
    budget, noise_tone_ratio, phase_pickup_band, phase_pickup_flat, quanta_to_kelvin, snr,
    thermal_occupation, RatioParams, SnrVariant, ToneSpec,
};
use emo_core::report::{
    calibration_csv, read_calibration_csv, read_waveform_csv, waveform_csv, RunManifest,
};
use emo_core::units::{dbm_to_watts, watts_to_dbm, AngularFrequency, PowerLevel};
use emo_core::{electromech, optics};
use num_complex::Complex64;
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs()
}

fn manifest() -> RunManifest {
    RunManifest {
        command: "properties".into(),
        config_path: "-".into(),
        overrides: vec![],
        output_dir: "-".into(),
        seed: 0,
    }
}

prop_compose! {
    /// Canonical config with the rates, powers and temperatures scattered
    /// around their nominal values.
    fn arb_config()(
        ki in 0.5..2.0f64,
        gi in 0.5..2.0f64,
        ko in 0.5..2.0f64,
        go in 0.5..2.0f64,
        p_dbm in -5.0..25.0f64,
        t_eff in 20.0..500.0f64,
        t_bath in 77.0..400.0f64,
        eta_p in 1e-13..1e-10f64,
    ) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::canonical();
        cfg.kappa_i *= ki;
        cfg.gamma_i *= gi;
        cfg.kappa_o *= ko;
        cfg.gamma_o *= go;
        cfg.p_drive = PowerLevel::from_dbm(p_dbm);
        cfg.t_eff = t_eff;
        cfg.t_bath = t_bath;
        cfg.eta_p = eta_p;
        cfg
    }
}

prop_compose! {
    fn arb_complex()(re in -1.0..1.0f64, im in -1.0..1.0f64) -> Complex64 {
        Complex64::new(re, im)
    }
}

prop_compose! {
    fn arb_inputs()(v in prop::array::uniform12(-1.0..1.0f64)) -> Inputs {
        Inputs {
            x_in: Complex64::new(v[0], v[1]),
            y_in: Complex64::new(v[2], v[3]),
            q_internal: Complex64::new(v[4], v[5]),
            q_port: Complex64::new(v[6], v[7]),
            signal: Complex64::new(v[8], v[9]),
            force: Complex64::new(v[10], v[11]),
        }
    }
}

fn add_inputs(a: &Inputs, b: &Inputs) -> Inputs {
    Inputs {
        x_in: a.x_in + b.x_in,
        y_in: a.y_in + b.y_in,
        q_internal: a.q_internal + b.q_internal,
        q_port: a.q_port + b.q_port,
        signal: a.signal + b.signal,
        force: a.force + b.force,
    }
}

fn scale_inputs(a: &Inputs, s: f64) -> Inputs {
    Inputs {
        x_in: s * a.x_in,
        y_in: s * a.y_in,
        q_internal: s * a.q_internal,
        q_port: s * a.q_port,
        signal: s * a.signal,
        force: s * a.force,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dbm_round_trip_is_tight(p in -120.0..40.0f64) {
        let back = watts_to_dbm(dbm_to_watts(p));
        prop_assert!((back - p).abs() <= 1e-12 * p.abs().max(1.0), "{p} -> {back}");
    }

    #[test]
    fn hz_round_trip_is_exact(f in 1e-3..1e15f64) {
        prop_assert_eq!(AngularFrequency::from_hz(f).hz(), f);
    }

    #[test]
    fn susceptibilities_obey_reality(
        omega in 1e0..1e9f64,
        omega_m in 1e3..1e9f64,
        gamma in 1e0..1e6f64,
        kappa in 1e3..1e9f64,
    ) {
        let chi = dynamics::chi_mech(omega, omega_m, gamma);
        let neg = dynamics::chi_mech(-omega, omega_m, gamma);
        prop_assert_eq!(neg, chi.conj());

        let chi = dynamics::chi_circuit(omega, kappa, 0.0);
        let neg = dynamics::chi_circuit(-omega, kappa, 0.0);
        prop_assert_eq!(neg, chi.conj());

        let chi = dynamics::chi_cavity(omega, kappa, 0.0);
        let neg = dynamics::chi_cavity(-omega, kappa, 0.0);
        prop_assert_eq!(neg, chi.conj());
    }

    #[test]
    fn transduction_is_linear(
        cfg in arb_config(),
        a in arb_inputs(),
        b in arb_inputs(),
        s in -5.0..5.0f64,
        offset in -50.0..50.0f64,
    ) {
        let model = TransductionModel::from_config(&cfg);
        let omega = model.omega_m + offset * model.gamma_m;
        let oa = model.output(omega, &a);
        let ob = model.output(omega, &b);
        let osum = model.output(omega, &add_inputs(&a, &b));
        let scale = oa.x_out.norm().max(ob.x_out.norm()).max(1e-300);
        prop_assert!((osum.x_out - (oa.x_out + ob.x_out)).norm() <= 1e-12 * scale);
        prop_assert!((osum.y_out - (oa.y_out + ob.y_out)).norm() <= 1e-12 * scale);
        prop_assert!((osum.z - (oa.z + ob.z)).norm() <= 1e-12 * (oa.z.norm() + ob.z.norm()).max(1e-300));

        let oscaled = model.output(omega, &scale_inputs(&a, s));
        prop_assert!((oscaled.x_out - s * oa.x_out).norm() <= 1e-12 * (s.abs() * oa.x_out.norm()).max(1e-300));
        prop_assert!((oscaled.y_out - s * oa.y_out).norm() <= 1e-12 * (s.abs() * oa.y_out.norm()).max(1e-300));
    }

    #[test]
    fn path_gain_matches_the_closed_form(cfg in arb_config()) {
        let model = TransductionModel::from_config(&cfg);
        let omega_m = model.omega_m;
        let power = model.output(omega_m, &Inputs::signal_only(1.0)).quadrature_power();
        let gain = model.signal_path_gain(omega_m);
        prop_assert!(close(power, gain, 1e-9), "{power:e} vs {gain:e}");
    }

    #[test]
    fn cooperativity_scales_linearly_with_power(cfg in arb_config(), alpha in 0.01..100.0f64) {
        let omega_m = cfg.omega_m.rad_per_sec();
        let base = electromech::cooperativity_em_of(&cfg, omega_m);
        let mut boosted = cfg.clone();
        boosted.p_drive = PowerLevel::from_watts(alpha * cfg.p_drive.watts());
        let scaled = electromech::cooperativity_em_of(&boosted, omega_m);
        prop_assert!(close(scaled, alpha * base, 1e-12));
    }

    #[test]
    fn coupling_scales_with_the_inverse_square_gap(
        d1 in 5e-8..5e-6f64,
        d2 in 5e-8..5e-6f64,
        eta0 in 1e-4..1e-2f64,
    ) {
        // participation goes as 1/d on top of the 1/d lever arm, so the
        // single-photon coupling goes as 1/d^2 and C_em as 1/d^4
        let cfg = ExperimentConfig::canonical();
        let g = |d: f64| {
            let eta = electromech::participation_at_gap(eta0, cfg.d0, d);
            electromech::coupling_g_em(cfg.omega_lc.rad_per_sec(), cfg.z_zpf(), d, eta)
        };
        let ratio = (g(d1) / g(d2)).powi(2);
        let quartic = (d2 / d1).powi(4);
        prop_assert!(close(ratio, quartic, 1e-12), "{ratio:e} vs {quartic:e}");
    }

    #[test]
    fn pump_frequency_shift_is_strictly_linear(
        p1 in 1e-6..1e0f64,
        p2 in 1e-6..1e0f64,
    ) {
        let cfg = ExperimentConfig::canonical();
        let shift = |p: f64| {
            electromech::gap_frequency_shift(
                cfg.r_circuit, p, cfg.m_eff, cfg.omega_0.rad_per_sec(), cfg.a_cap, cfg.d0,
            )
        };
        prop_assert!(close(shift(p1) / p1, shift(p2) / p2, 1e-12));
    }

    #[test]
    fn beam_parameter_decomposition_agrees(z in 1e-5..1.0f64, z0 in 1e-5..1.0f64) {
        // 1/q = 1/R - i lambda / (pi W^2) with q = z + i z0
        let lambda = 780e-9;
        let q = Complex64::new(z, z0);
        let inv_q = 1.0 / q;
        match optics::wavefront_curvature(z, z0) {
            optics::Curvature::Curved(r) => {
                prop_assert!(close(inv_q.re, 1.0 / r, 1e-12));
            }
            optics::Curvature::Flat => prop_assert!(z == 0.0),
        }
        let w0 = optics::waist_radius(z0, lambda);
        let w_sq = w0 * w0 * (1.0 + (z / z0).powi(2));
        prop_assert!(close(-inv_q.im, lambda / (std::f64::consts::PI * w_sq), 1e-12));
    }

    #[test]
    fn pumped_coupling_round_trips(g in 1e-2..1e4f64, n in 1.0..1e9f64) {
        let big = optics::pumped_g_om(g, n);
        prop_assert!(close(optics::g_om_from_pumped(big, n), g, 1e-14));
    }

    #[test]
    fn cavity_roots_satisfy_vieta(
        w0 in 2e-5..2e-4f64,
        r_mirror in 5e-3..2e-1f64,
        lambda in 4e-7..1.6e-6f64,
    ) {
        let solved = optics::lengths_for_waist(w0, r_mirror, lambda);
        prop_assume!(solved.is_ok());
        let (short, long) = solved.unwrap();
        let z0 = optics::rayleigh_range(w0, lambda);
        prop_assert!(close(short + long, r_mirror, 1e-12));
        prop_assert!(close(short * long, z0 * z0, 1e-12));
    }

    #[test]
    fn budget_total_is_the_component_sum(cfg in arb_config()) {
        let b = budget(&cfg);
        prop_assert_eq!(b.total(), b.shot + b.brownian + b.johnson + b.phase);
        let k = b.in_kelvin(cfg.omega_lc.rad_per_sec());
        let converted = quanta_to_kelvin(b.total(), cfg.omega_lc.rad_per_sec());
        prop_assert!(close(k.total(), converted, 1e-12));
    }

    #[test]
    fn quanta_and_kelvin_convert_both_ways(n in 1e-3..1e12f64, omega in 1e5..1e10f64) {
        let t = quanta_to_kelvin(n, omega);
        prop_assert!(close(thermal_occupation(omega, t), n, 1e-12));
    }

    #[test]
    fn budget_components_scale_with_drive_power(cfg in arb_config(), alpha in 1.5..1e3f64) {
        let base = budget(&cfg);
        let mut driven = cfg.clone();
        driven.p_drive = PowerLevel::from_watts(alpha * cfg.p_drive.watts());
        let boosted = budget(&driven);
        prop_assert!(close(boosted.shot, base.shot / alpha, 1e-12));
        prop_assert!(close(boosted.brownian, base.brownian / alpha, 1e-12));
        prop_assert_eq!(boosted.johnson, base.johnson);
        prop_assert!(close(boosted.phase, alpha * base.phase, 1e-12));
    }

    #[test]
    fn matched_ports_never_lose_snr(cfg in arb_config()) {
        let narrow = snr(&cfg, SnrVariant::Narrowband).unwrap().snr_single_shot;
        let matched = snr(&cfg, SnrVariant::Overcoupled).unwrap().snr_single_shot;
        prop_assert!(matched >= narrow * (1.0 - 1e-12), "{matched} < {narrow}");
    }

    #[test]
    fn phase_snr_never_beats_the_phase_free_one(cfg in arb_config()) {
        let narrow = snr(&cfg, SnrVariant::Narrowband).unwrap().snr_single_shot;
        let with_phase = snr(&cfg, SnrVariant::WithPhaseNoise).unwrap().snr_single_shot;
        prop_assert!(with_phase <= narrow * (1.0 + 1e-12));
    }

    #[test]
    fn calibration_ratio_ignores_the_optical_side(
        cfg in arb_config(),
        g_scale in 0.1..10.0f64,
        p_scale in 0.1..10.0f64,
        k_scale in 0.5..2.0f64,
    ) {
        let tone = ToneSpec {
            offset: cfg.omega_m.rad_per_sec() + 6.0 * cfg.gamma_m,
            flux: 1e14,
            leak: 0.0,
        };
        let params = RatioParams { t_eff: cfg.t_eff, eta_p: cfg.eta_p, tone_leak: 3e-10 };
        let before = noise_tone_ratio(&cfg, &tone, &params);
        let mut optical = cfg.clone();
        optical.g_om *= g_scale;
        optical.p_optical = PowerLevel::from_watts(p_scale * cfg.p_optical.watts());
        optical.kappa_o *= k_scale;
        let after = noise_tone_ratio(&optical, &tone, &params);
        prop_assert!(close(after, before, 1e-12));
    }

    #[test]
    fn waveform_csv_round_trips(
        t0_steps in -1000.0..1000.0f64,
        dt in 1e-7..1e-2f64,
        samples in prop::collection::vec(arb_complex(), 2..120),
    ) {
        let wf = Waveform { t0: t0_steps * dt, dt, samples };
        let text = waveform_csv(&manifest(), &wf);
        let back = read_waveform_csv(&text).unwrap();
        prop_assert_eq!(back.samples, wf.samples);
        prop_assert_eq!(back.t0, wf.t0);
        prop_assert!((back.dt - wf.dt).abs() <= 4.0 * f64::EPSILON * (wf.t0.abs() + wf.dt));
    }

    #[test]
    fn calibration_csv_round_trips(
        rows in prop::collection::vec(
            (-50.0..40.0f64, -1e6..1e6f64, 1e-9..1e3f64),
            1..60,
        ),
    ) {
        let text = calibration_csv(&manifest(), &rows);
        let back = read_calibration_csv(&text).unwrap();
        prop_assert_eq!(back, rows);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn band_pickup_tracks_the_flat_form(
        w_mult in 25.0..1000.0f64,
        delta_p in 1.0..200.0f64,
    ) {
        // past ~1000 linewidths the band reaches a fair fraction of ω_m
        // and the profile's curvature pulls the integral off the flat
        // form, so the comparison stops there
        let cfg = ExperimentConfig::canonical();
        let omega_m = cfg.omega_m.rad_per_sec();
        let half_width = w_mult * cfg.gamma_m;
        prop_assume!(half_width < omega_m);
        let numeric = phase_pickup_band(cfg.gamma_m, omega_m, delta_p, half_width);
        let flat = phase_pickup_flat(cfg.gamma_m, omega_m, delta_p, half_width);
        prop_assert!(close(numeric, flat, 2e-3), "{numeric:e} vs {flat:e}");
    }

    #[test]
    fn convolution_is_linear_and_time_invariant(
        a in prop::collection::vec(arb_complex(), 5..80),
        b in prop::collection::vec(arb_complex(), 5..80),
        h in prop::collection::vec(arb_complex(), 3..30),
        shift in 1usize..20,
    ) {
        let dt = 1e-4;
        let len = a.len().min(b.len());
        let wa = Waveform { t0: 0.0, dt, samples: a[..len].to_vec() };
        let wb = Waveform { t0: 0.0, dt, samples: b[..len].to_vec() };
        let wh = Waveform { t0: 0.0, dt, samples: h };
        let sum = Waveform {
            t0: 0.0,
            dt,
            samples: wa.samples.iter().zip(&wb.samples).map(|(x, y)| x + y).collect(),
        };
        let oa = convolve_response(&wa, &wh).unwrap();
        let ob = convolve_response(&wb, &wh).unwrap();
        let osum = convolve_response(&sum, &wh).unwrap();
        let scale = oa.samples.iter().chain(&ob.samples).map(|z| z.norm()).fold(1e-300, f64::max);
        for i in 0..osum.len() {
            prop_assert!((osum.samples[i] - (oa.samples[i] + ob.samples[i])).norm() <= 1e-12 * scale);
        }

        let mut delayed = vec![Complex64::new(0.0, 0.0); shift];
        delayed.extend_from_slice(&wa.samples);
        let od = convolve_response(&Waveform { t0: 0.0, dt, samples: delayed }, &wh).unwrap();
        for i in 0..oa.len() {
            prop_assert_eq!(od.samples[i + shift], oa.samples[i]);
        }
    }

    #[test]
    fn filtering_delays_the_echo_peak(
        t2_star in 1.2e-4..5e-4f64,
        t_echo in 2e-3..6e-3f64,
        amplitude in 0.1..10.0f64,
    ) {
        let cfg = ExperimentConfig::canonical();
        let dt = 1e-5;
        let params = EchoParams { t2_star, t_echo, amplitude, carrier_offset: 0.0 };
        let span_start = (t_echo - 5.0 * t2_star - 1e-3).min(0.0);
        let span_end = t_echo + 5.0 * t2_star + 1e-3;
        let echo = synth_echo(&params, span_start, span_end, dt).unwrap();
        let h = impulse_response(cfg.gamma_m, 20.0 / cfg.gamma_m, dt).unwrap();
        let filtered = convolve_response(&echo, &h).unwrap();
        let (t_in, _) = echo.peak().unwrap();
        let (t_out, _) = filtered.peak().unwrap();
        prop_assert!(t_out >= t_in - dt, "peak moved early: {t_out} < {t_in}");
    }

    #[test]
    fn demodulated_tone_energy_ignores_its_phase(phase in 0.0..6.283f64) {
        let dt = 1e-6;
        let f_ref = TAU * 50e3;
        let cutoff = TAU * 2e3;
        let tone = |phi: f64| Waveform {
            t0: 0.0,
            dt,
            samples: (0..4000)
                .map(|n| Complex64::new((f_ref * n as f64 * dt + phi).cos(), 0.0))
                .collect(),
        };
        let energy = |phi: f64| -> f64 {
            quadrature_demodulate(&tone(phi), f_ref, cutoff)
                .unwrap()
                .samples
                .iter()
                .skip(2000)
                .map(|z| z.norm_sqr())
                .sum()
        };
        let e0 = energy(0.0);
        let ep = energy(phase);
        prop_assert!(close(ep, e0, 1e-6), "{ep:e} vs {e0:e}");
    }
}
