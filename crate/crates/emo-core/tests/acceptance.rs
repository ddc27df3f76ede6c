//! Acceptance gate: twelve end-to-end checks, one per headline figure of
//! the modeled instrument. Every target and tolerance is pinned here in
//! code; the harness output gives one pass/fail line per check.

use emo_core::config::ExperimentConfig;
use emo_core::constants::TAU;
use emo_core::echo::{
    convolve_response, impulse_response, quadrature_demodulate, synth_echo, EchoParams, Waveform,
};
use emo_core::fit::{
    fit_bath_and_phase, fit_gap, fit_optomech, synthetic_area_sweeps, synthetic_gap_data,
    synthetic_ratio_data,
};
use emo_core::noise::{
    budget, lorentzian_profile, noise_tone_ratio, phase_pickup_band, prospective_budget,
    prospective_cooperativity, quanta_to_kelvin, snr, ProspectiveOptions, RatioParams, SnrVariant,
    ToneSpec,
};
use emo_core::units::{dbm_to_watts, PowerLevel};
use emo_core::{dynamics, electromech, numerics, optics};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Relative deviation of a measurement from its target.
fn rel(x: f64, target: f64) -> f64 {
    ((x - target) / target).abs()
}

/// One standard-normal draw, Box-Muller.
fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

#[test]
fn c01_zero_point_motion() {
    let cfg = ExperimentConfig::canonical();
    let z = cfg.z_zpf();
    assert!(rel(z, 7.3e-16) <= 0.01, "z_zpf {z:e} m vs 7.3e-16 m");
}

#[test]
fn c02_electromechanical_couplings() {
    let cfg = ExperimentConfig::canonical();
    let g = electromech::g_em_of(&cfg) / TAU;
    let big_g = electromech::big_g_em_of(&cfg) / TAU;
    assert!(rel(g, 5.1e-6) <= 0.05, "g_em/2pi {g:e} Hz vs 5.1e-6 Hz");
    assert!(rel(big_g, 900.0) <= 0.05, "G_em/2pi {big_g} Hz vs 900 Hz");
}

#[test]
fn c03_electromechanical_cooperativity() {
    let c_em = electromech::cooperativity_em(TAU * 900.0, TAU * 100.0, TAU * 1.6e6, TAU * 180e3);
    assert!(rel(c_em, 0.019) <= 0.10, "C_em {c_em} vs 0.019");
}

#[test]
fn c04_signal_transfer_rate() {
    let cfg = ExperimentConfig::canonical();
    let c_em = electromech::cooperativity_em(TAU * 900.0, TAU * 100.0, TAU * 1.6e6, TAU * 180e3);
    let rate = dynamics::signal_transfer_rate(
        0.32e-3,
        cfg.kappa_o,
        cfg.kappa_o_total(),
        c_em,
        cfg.kappa_i,
        cfg.kappa_i_total(),
    );
    assert!(rel(rate, 1.1e-7) <= 0.15, "transfer rate {rate:e} vs 1.1e-7");
}

#[test]
fn c05_noise_budget_table() {
    let cfg = ExperimentConfig::canonical();
    let b = budget(&cfg);
    let quanta = [
        (b.shot, 4.4e6, "shot"),
        (b.brownian, 5.0e9, "brownian"),
        (b.johnson, 3.3e5, "johnson"),
        (b.phase, 1.9e10, "phase"),
        (b.total(), 2.4e10, "total"),
    ];
    for (got, want, name) in quanta {
        assert!(rel(got, want) <= 0.15, "{name} {got:e} quanta vs {want:e}");
    }
    let k = b.in_kelvin(cfg.omega_lc.rad_per_sec());
    let kelvin = [
        (k.shot, 8000.0, "shot"),
        (k.brownian, 9.2e6, "brownian"),
        (k.johnson, 590.0, "johnson"),
        (k.phase, 3.5e7, "phase"),
        (k.total(), 4.4e7, "total"),
    ];
    for (got, want, name) in kelvin {
        assert!(rel(got, want) <= 0.15, "{name} {got:e} K vs {want:e} K");
    }
}

#[test]
fn c06_echo_signal_to_noise() {
    let cfg = ExperimentConfig::canonical();
    let report = snr(&cfg, SnrVariant::Echo).unwrap();
    let single = report.snr_single_shot;
    let averaged = report.averaged(5000);
    assert!(rel(single, 0.12) <= 0.15, "single-shot SNR {single} vs 0.12");
    assert!(rel(averaged, 8.5) <= 0.15, "5000-shot SNR {averaged} vs 8.5");
}

#[test]
fn c07_prospective_budget_table() {
    let cfg = ExperimentConfig::canonical();
    let b = prospective_budget(&cfg, &ProspectiveOptions::default());
    let quanta = [
        (b.shot, 0.069, "shot"),
        (b.brownian, 3100.0, "brownian"),
        (b.johnson, 1.6e5, "johnson"),
        (b.total(), 1.7e5, "total"),
    ];
    for (got, want, name) in quanta {
        assert!(rel(got, want) <= 0.20, "{name} {got:e} quanta vs {want:e}");
    }
    let t = quanta_to_kelvin(b.total(), cfg.omega_lc.rad_per_sec());
    assert!(rel(t, 306.0) <= 0.20, "prospective noise temperature {t} K vs 306 K");
}

#[test]
fn c08_cooperativity_gap_scaling() {
    let cfg = ExperimentConfig::canonical();
    let base = electromech::cooperativity_em_of(&cfg, cfg.omega_m.rad_per_sec());
    let same_power = ProspectiveOptions { p_drive: cfg.p_drive, ..Default::default() };
    let gain = prospective_cooperativity(&cfg, &same_power) / base;
    assert!(rel(gain, 38416.0) <= 1e-12, "gap gain {gain} vs 14^4 = 38416");
    let boosted = prospective_cooperativity(&cfg, &ProspectiveOptions::default());
    assert!(rel(boosted, 2e4) <= 0.20, "C_em at 100 nm and 30 dBm {boosted:e} vs 2e4");
}

#[test]
fn c09_cavity_mode_geometry() {
    let mode = optics::hemispherical_mode(17.5e-3, 75e-3, 780e-9).unwrap();
    let diameter = mode.waist_diameter();
    assert!((diameter - 177e-6).abs() <= 1e-6, "2W0 {:.3} um vs 177 um", diameter * 1e6);

    let (short, long) = optics::lengths_for_waist(90e-6, 75e-3, 780e-9).unwrap();
    assert!((short - 19.0e-3).abs() <= 0.1e-3, "short root {:.4} mm", short * 1e3);
    assert!((long - 56.0e-3).abs() <= 0.1e-3, "long root {:.4} mm", long * 1e3);

    // both roots of z^2 - Rz + z0^2 = 0: sum R, product z0^2
    let z0 = optics::rayleigh_range(90e-6, 780e-9);
    assert!(rel(short + long, 75e-3) <= 1e-12, "root sum {:e}", short + long);
    assert!(rel(short * long, z0 * z0) <= 1e-12, "root product {:e}", short * long);
}

#[test]
fn c10_optomechanical_coupling_routes() {
    let cfg = ExperimentConfig::canonical();
    let bound = optics::g_om_bound_of(&cfg) / TAU;
    assert!(rel(bound, 16.0) <= 0.10, "radiation-pressure bound {bound} Hz vs 16 Hz");
    let measured = optics::g_om_from_pumped(TAU * 6.0e3, 5.3e4) / TAU;
    assert!(
        (52.0..=55.0).contains(&measured),
        "measured-route g_om {measured} Hz outside 52..55 Hz"
    );
}

#[test]
fn c11_model_invariants_and_fit_round_trips() {
    let cfg = ExperimentConfig::canonical();
    let omega_m = cfg.omega_m.rad_per_sec();

    // mechanical susceptibility saturates its damping bound on resonance
    let chi = dynamics::chi_mech(omega_m, omega_m, cfg.gamma_m);
    let sat = cfg.gamma_m * cfg.gamma_m * chi.norm_sqr();
    assert!((sat - 1.0).abs() <= 1e-12, "gamma^2 |chi(omega_m)|^2 = {sat}");

    // the phase-noise profile integrates to one: quadrature over a wide
    // window plus the analytic arctangent tails
    let delta_p = cfg.delta_p;
    let w = 50.0 * delta_p;
    let body = numerics::adaptive_simpson(&|x: f64| lorentzian_profile(x, delta_p), -w, w, 1e-10);
    let tails = 4.0 * (std::f64::consts::FRAC_PI_2 - (2.0 * w / delta_p).atan());
    let area = (body + tails) / TAU;
    assert!((area - 1.0).abs() <= 1e-6, "Lorentzian area {area}");

    // wide-band phase pickup approaches the flat-profile limit L * gamma/4
    let band = phase_pickup_band(cfg.gamma_m, omega_m, delta_p, 1000.0 * cfg.gamma_m);
    let limit = lorentzian_profile(omega_m, delta_p) * cfg.gamma_m / 4.0;
    assert!(rel(band, limit) <= 1e-3, "pickup {band:e} vs flat limit {limit:e}");

    // the noise-to-tone ratio cancels every optical parameter
    let tone = ToneSpec { offset: omega_m + 6.0 * cfg.gamma_m, flux: 1e10, leak: 5.8e-10 };
    let params = RatioParams { t_eff: cfg.t_eff, eta_p: cfg.eta_p, tone_leak: 5.8e-10 };
    let before = noise_tone_ratio(&cfg, &tone, &params);
    let mut bright = cfg.clone();
    bright.g_om *= 3.0;
    bright.p_optical = PowerLevel::from_watts(0.4e-3);
    bright.kappa_o *= 1.5;
    let after = noise_tone_ratio(&bright, &tone, &params);
    assert!(rel(after, before) <= 1e-12, "ratio moved {before:e} -> {after:e}");

    // discrete convolution against an independently ordered O(N^2) oracle
    let dt = 1e-4;
    let h = impulse_response(cfg.gamma_m, 20.0 / cfg.gamma_m, dt).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let samples: Vec<Complex64> = (0..4096)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let input = Waveform { t0: 0.0, dt, samples };
    let out = convolve_response(&input, &h).unwrap();
    let scale = out.samples.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for (n, got) in out.samples.iter().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in (0..h.len()).rev() {
            if n >= k && n - k < input.len() {
                acc += h.samples[k] * input.samples[n - k] * dt;
            }
        }
        assert!((got - acc).norm() <= 1e-9 * scale, "convolution drifts at sample {n}");
    }

    // calibration fits: noiseless round trips to solver tolerance
    let powers: Vec<f64> = (0..10).map(|i| dbm_to_watts(-2.0 + 2.5 * i as f64)).collect();
    let gap_truth = electromech::gap_shift_slope(
        cfg.r_circuit,
        cfg.m_eff,
        cfg.omega_0.rad_per_sec(),
        cfg.a_cap,
        cfg.d0,
    );
    let gap = fit_gap(&cfg, &synthetic_gap_data(&cfg, &powers, 1e-12, 21)).unwrap();
    assert!(rel(gap.slope, gap_truth) <= 1e-8, "gap slope {:e}", gap.slope);
    assert!(rel(gap.d0, cfg.d0) <= 1e-8, "gap d0 {:e}", gap.d0);

    // calibration tone bright enough that the drive leak stays a
    // comparable, separable term rather than swamping the denominator
    let cal_tone = ToneSpec { flux: 5e14, ..tone };
    let truth = RatioParams { t_eff: cfg.t_eff, eta_p: cfg.eta_p, tone_leak: 5.8e-10 };
    let data = synthetic_ratio_data(&cfg, &cal_tone, &truth, &powers, 0.0, 1);
    let bp = fit_bath_and_phase(&cfg, &cal_tone, &data).unwrap();
    assert!(rel(bp.t_eff, truth.t_eff) <= 1e-6, "t_eff {:e}", bp.t_eff);
    assert!(rel(bp.eta_p, truth.eta_p) <= 1e-6, "eta_p {:e}", bp.eta_p);
    assert!(rel(bp.tone_leak, truth.tone_leak) <= 1e-6, "leak {:e}", bp.tone_leak);

    let dark_tone = ToneSpec { leak: 0.0, ..tone };
    let c_om_true = optics::cooperativity_om_of(&cfg);
    let half_width = 20.0 * cfg.gamma_m;
    let (nd, td) =
        synthetic_area_sweeps(&cfg, c_om_true, &dark_tone, &truth, half_width, &powers, 0.0, 9);
    let om = fit_optomech(&cfg, &nd, &td, &dark_tone, &truth, half_width).unwrap();
    assert!(rel(om.c_om_noise, c_om_true) <= 1e-9, "noise route {:e}", om.c_om_noise);
    assert!(rel(om.c_om_tone, c_om_true) <= 1e-9, "tone route {:e}", om.c_om_tone);

    // and under 5% scatter across 100 seeds: every parameter the sweep
    // constrains tightly recovers within 15% on each seed; the two
    // phase-noise parameters share a soft direction of the model (the
    // high-power points only pin their quotient), so at 5% noise their
    // single-seed bound is 20% or worse no matter the estimator, and the
    // 15% figure holds for the ensemble median instead
    let mut eta_errors = Vec::with_capacity(100);
    let mut leak_errors = Vec::with_capacity(100);
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x6a70 ^ seed);
        let gap_data: Vec<(f64, f64, f64)> = powers
            .iter()
            .map(|&p| {
                let shift = gap_truth * p;
                let sigma = 0.05 * shift.abs();
                (p, shift + sigma * normal(&mut rng), sigma)
            })
            .collect();
        let g = fit_gap(&cfg, &gap_data).unwrap();
        assert!(rel(g.slope, gap_truth) <= 0.15, "seed {seed} gap slope {:e}", g.slope);
        assert!(rel(g.d0, cfg.d0) <= 0.15, "seed {seed} gap d0 {:e}", g.d0);

        let data = synthetic_ratio_data(&cfg, &cal_tone, &truth, &powers, 0.05, seed);
        let f = fit_bath_and_phase(&cfg, &cal_tone, &data).unwrap();
        assert!(rel(f.t_eff, truth.t_eff) <= 0.15, "seed {seed} t_eff {}", f.t_eff);
        eta_errors.push(rel(f.eta_p, truth.eta_p));
        leak_errors.push(rel(f.tone_leak, truth.tone_leak));

        let (nd, td) = synthetic_area_sweeps(
            &cfg, c_om_true, &dark_tone, &truth, half_width, &powers, 0.05, seed,
        );
        let m = fit_optomech(&cfg, &nd, &td, &dark_tone, &truth, half_width).unwrap();
        assert!(rel(m.c_om_noise, c_om_true) <= 0.15, "seed {seed} noise {:e}", m.c_om_noise);
        assert!(rel(m.c_om_tone, c_om_true) <= 0.15, "seed {seed} tone {:e}", m.c_om_tone);
    }
    for errors in [&mut eta_errors, &mut leak_errors] {
        errors.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }
    let eta_median = eta_errors[eta_errors.len() / 2];
    let leak_median = leak_errors[leak_errors.len() / 2];
    assert!(eta_median <= 0.15, "median eta_p recovery {eta_median:.3}");
    assert!(leak_median <= 0.15, "median leak recovery {leak_median:.3}");
}

#[test]
fn c12_off_resonance_rejection() {
    let cfg = ExperimentConfig::canonical();
    let gamma = cfg.gamma_m;
    let offset = TAU * 2.5e3;

    // settled tones through the membrane response: the rejection a
    // carrier 25 linewidths out must see, measured in the time domain
    let dt = 1e-5;
    let h = impulse_response(gamma, 20.0 / gamma, dt).unwrap();
    let settled = |delta: f64| -> f64 {
        let samples: Vec<Complex64> =
            (0..5000).map(|n| Complex64::from_polar(1.0, delta * n as f64 * dt)).collect();
        let drive = Waveform { t0: 0.0, dt, samples };
        let out = convolve_response(&drive, &h).unwrap();
        out.samples[4999].norm()
    };
    let on = settled(0.0);
    let off = settled(offset);
    let rejection_db = 20.0 * (on / off).log10();
    assert!(rejection_db >= 30.0, "carrier rejection {rejection_db:.1} dB < 30 dB");

    // and the detected control echo trace all but vanishes next to the
    // on-resonance one
    let echo_dt = 5e-6;
    let f_if = TAU * 10e3;
    let h = impulse_response(gamma, 20.0 / gamma, echo_dt).unwrap();
    let trace_peak = |carrier_offset: f64| -> f64 {
        let params = EchoParams {
            t2_star: cfg.t2_star.unwrap(),
            t_echo: 5e-3,
            amplitude: 1.0,
            carrier_offset,
        };
        let echo = synth_echo(&params, 0.0, 10e-3, echo_dt).unwrap();
        let filtered = convolve_response(&echo, &h).unwrap();
        let detected = Waveform {
            t0: filtered.t0,
            dt: echo_dt,
            samples: filtered
                .samples
                .iter()
                .enumerate()
                .map(|(i, z)| {
                    let lo = Complex64::from_polar(1.0, f_if * filtered.time_at(i));
                    Complex64::new((z * lo).re, 0.0)
                })
                .collect(),
        };
        let out = quadrature_demodulate(&detected, f_if, 5.0 * gamma).unwrap();
        out.samples
            .iter()
            .enumerate()
            .filter(|(i, _)| out.time_at(*i) >= 2e-3)
            .map(|(_, s)| s.norm())
            .fold(0.0, f64::max)
    };
    let on_trace = trace_peak(0.0);
    let off_trace = trace_peak(offset);
    assert!(off_trace < 0.1 * on_trace, "control trace failed to vanish: {off_trace:e} vs {on_trace:e}");
}
