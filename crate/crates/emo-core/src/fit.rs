//! Calibration fits: recovering operating-point parameters from measured
//! curves.
//!
//! Three calibrations matter in practice: the membrane gap from the
//! pump-power frequency pull, the effective bath temperature and
//! phase-noise pickup from noise-to-tone ratios across pump powers, and
//! the optomechanical cooperativity from band areas across pump powers.
//! Each fit has a synthetic-data generator next to it so round trips
//! stay testable.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ExperimentConfig;
use crate::constants::EPSILON_0;
use crate::noise::{self, RatioParams, ToneSpec};
use crate::optics;
use crate::units::PowerLevel;

/// Why a fit refused to run or failed to settle.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("power points must span at least {needed_db} dB, got {got_db:.2} dB")]
    InsufficientSpan { needed_db: f64, got_db: f64 },
    #[error("point {index} has a non-positive or non-finite uncertainty")]
    BadSigma { index: usize },
    #[error("fitted slope must be negative; the pump softens the mode")]
    WrongSign,
    #[error("data cannot constrain the fit: {reason}")]
    DegenerateData { reason: &'static str },
    #[error("objective returned a non-finite value")]
    ObjectiveNotFinite,
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },
}

/// Stopping rules for the simplex minimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    pub max_iter: usize,
    /// Relative spread of the simplex in every parameter below which the
    /// search stops.
    pub param_tol: f64,
    /// Absolute spread of objective values below which the search stops.
    pub residual_tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions { max_iter: 2000, param_tol: 1e-9, residual_tol: 1e-12 }
    }
}

/// Result of a simplex minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexFit {
    pub params: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Nelder-Mead minimization with box bounds.
///
/// Deterministic: no randomized restarts, vertices ordered by value with
/// index as tie-breaker. Out-of-bounds proposals are clamped to the box
/// rather than rejected, which keeps the simplex moving along active
/// constraints. Any non-finite objective value aborts the fit.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut objective: F,
    start: &[f64],
    scales: &[f64],
    bounds: &[(f64, f64)],
    opts: &SimplexOptions,
) -> Result<SimplexFit, FitError> {
    let n = start.len();
    assert!(n > 0 && scales.len() == n && bounds.len() == n);
    let clamp = |x: &mut Vec<f64>| {
        for (v, (lo, hi)) in x.iter_mut().zip(bounds) {
            *v = v.clamp(*lo, *hi);
        }
    };
    let mut eval = |x: &[f64]| -> Result<f64, FitError> {
        let v = objective(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(FitError::ObjectiveNotFinite)
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let mut first = start.to_vec();
    clamp(&mut first);
    let f0 = eval(&first)?;
    simplex.push((first.clone(), f0));
    for i in 0..n {
        let mut v = first.clone();
        v[i] += scales[i];
        clamp(&mut v);
        if v[i] == first[i] {
            v[i] -= scales[i];
            clamp(&mut v);
        }
        let f = eval(&v)?;
        simplex.push((v, f));
    }

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut iterations = 0;
    loop {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let best = simplex[0].1;
        let worst = simplex[n].1;
        let spread_ok = (0..n).all(|i| {
            let lo = simplex.iter().map(|(v, _)| v[i]).fold(f64::INFINITY, f64::min);
            let hi = simplex.iter().map(|(v, _)| v[i]).fold(f64::NEG_INFINITY, f64::max);
            hi - lo <= opts.param_tol * hi.abs().max(lo.abs()).max(1e-30)
        });
        if (worst - best).abs() <= opts.residual_tol || spread_ok {
            return Ok(SimplexFit { params: simplex[0].0.clone(), residual: best, iterations });
        }
        if iterations >= opts.max_iter {
            return Err(FitError::NotConverged { iterations, residual: best });
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for (v, _) in simplex.iter().take(n) {
            for i in 0..n {
                centroid[i] += v[i] / n as f64;
            }
        }
        let blend = |a: f64, x: &Vec<f64>| -> Vec<f64> {
            let mut out: Vec<f64> =
                centroid.iter().zip(x).map(|(c, w)| c + a * (c - w)).collect();
            for (v, (lo, hi)) in out.iter_mut().zip(bounds) {
                *v = v.clamp(*lo, *hi);
            }
            out
        };

        let reflected = blend(alpha, &simplex[n].0);
        let fr = eval(&reflected)?;
        if fr < simplex[0].1 {
            let expanded = blend(gamma, &simplex[n].0);
            let fe = eval(&expanded)?;
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
            continue;
        }
        let contracted = blend(-rho, &simplex[n].0);
        let fc = eval(&contracted)?;
        if fc < simplex[n].1 {
            simplex[n] = (contracted, fc);
            continue;
        }
        let best_point = simplex[0].0.clone();
        for (v, f) in simplex.iter_mut().skip(1) {
            for i in 0..n {
                v[i] = best_point[i] + sigma * (v[i] - best_point[i]);
            }
            *f = eval(v)?;
        }
    }
}

/// Gap calibration from the pump-induced frequency pull.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GapFit {
    /// Fitted pull slope δω/P (rad/s per W), always negative.
    pub slope: f64,
    /// Membrane gap recovered from the slope (m).
    pub d0: f64,
}

/// Fit δω = s·P through the origin by weighted least squares and invert
/// the slope for the gap: s = −(R ε₀ A / 4 m ω₀) / d₀³.
///
/// `data` rows are (pump power W, frequency shift rad/s, shift sigma).
pub fn fit_gap(cfg: &ExperimentConfig, data: &[(f64, f64, f64)]) -> Result<GapFit, FitError> {
    if data.len() < 2 {
        return Err(FitError::TooFewPoints { needed: 2, got: data.len() });
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (index, (p, shift, sigma)) in data.iter().enumerate() {
        if !(sigma.is_finite() && *sigma > 0.0) {
            return Err(FitError::BadSigma { index });
        }
        let w = 1.0 / (sigma * sigma);
        num += w * p * shift;
        den += w * p * p;
    }
    if !(den > 0.0) {
        return Err(FitError::DegenerateData { reason: "no nonzero pump powers" });
    }
    let slope = num / den;
    if !(slope < 0.0) {
        return Err(FitError::WrongSign);
    }
    let strength = cfg.r_circuit * EPSILON_0 * cfg.a_cap / (4.0 * cfg.m_eff * cfg.omega_0.rad_per_sec());
    let d0 = (strength / -slope).cbrt();
    Ok(GapFit { slope, d0 })
}

/// Bath and phase-noise calibration from noise-to-tone ratios.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BathPhaseFit {
    pub t_eff: f64,
    pub eta_p: f64,
    pub tone_leak: f64,
    /// Final weighted sum of squared residuals.
    pub residual: f64,
}

/// Fit (T_eff, η_p, L_δ) to measured noise-to-tone ratios across pump
/// powers. The three parameters separate because their terms scale as
/// 1/P, P and P through different factors of the model.
///
/// `data` rows are (pump power W, measured ratio, ratio sigma). Powers
/// must include at least 4 points spanning 10 dB.
pub fn fit_bath_and_phase(
    cfg: &ExperimentConfig,
    tone: &ToneSpec,
    data: &[(f64, f64, f64)],
) -> Result<BathPhaseFit, FitError> {
    if data.len() < 4 {
        return Err(FitError::TooFewPoints { needed: 4, got: data.len() });
    }
    let p_min = data.iter().map(|d| d.0).fold(f64::INFINITY, f64::min);
    let p_max = data.iter().map(|d| d.0).fold(0.0, f64::max);
    let span_db = 10.0 * (p_max / p_min).log10();
    if !(span_db >= 10.0) {
        return Err(FitError::InsufficientSpan { needed_db: 10.0, got_db: span_db });
    }
    for (index, (_, _, sigma)) in data.iter().enumerate() {
        if !(sigma.is_finite() && *sigma > 0.0) {
            return Err(FitError::BadSigma { index });
        }
    }

    let configs: Vec<ExperimentConfig> = data
        .iter()
        .map(|(p, _, _)| {
            let mut c = cfg.clone();
            c.p_drive = PowerLevel::from_watts(*p);
            c
        })
        .collect();
    let objective = |x: &[f64]| -> f64 {
        let params = RatioParams { t_eff: x[0], eta_p: x[1], tone_leak: x[2] };
        let mut chi2 = 0.0;
        for (c, (_, y, sigma)) in configs.iter().zip(data) {
            let model = noise::noise_tone_ratio(c, tone, &params);
            let r = (model - y) / sigma;
            chi2 += r * r;
        }
        chi2
    };

    let start = [cfg.t_bath, 1e-11, 1e-9];
    let scales = [50.0, 5e-12, 5e-10];
    let bounds = [(1.0, 2000.0), (0.0, 1e-6), (0.0, 1e-3)];
    let fit = nelder_mead(objective, &start, &scales, &bounds, &SimplexOptions::default())?;
    Ok(BathPhaseFit {
        t_eff: fit.params[0],
        eta_p: fit.params[1],
        tone_leak: fit.params[2],
        residual: fit.residual,
    })
}

/// Two independent routes to the optomechanical cooperativity.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct OptomechFit {
    /// From the membrane-noise areas across pump powers.
    pub c_om_noise: f64,
    /// From the calibration-tone areas across the same powers.
    pub c_om_tone: f64,
}

impl OptomechFit {
    /// How far the two routes disagree, relative to their mean.
    pub fn relative_discrepancy(&self) -> f64 {
        let mean = 0.5 * (self.c_om_noise + self.c_om_tone);
        (self.c_om_tone - self.c_om_noise).abs() / mean
    }
}

/// Predicted band areas per unit C_om at pump power `p_watts`, in
/// squared-photon-flux units: the detected spectrum integrates to
/// κ_o N_D r C_om times the membrane-noise or tone rate, with the finite
/// band truncating the mechanical Lorentzian by atan(2W/γ_m)/(π/2).
fn unit_areas(
    cfg: &ExperimentConfig,
    p_watts: f64,
    tone: &ToneSpec,
    params: &RatioParams,
    half_width: f64,
) -> (f64, f64) {
    let mut c = cfg.clone();
    c.p_drive = PowerLevel::from_watts(p_watts);
    let scale = c.kappa_o * optics::n_photons_of(&c) * c.ratio_o();
    let band = (2.0 * half_width / c.gamma_m).atan() / (std::f64::consts::PI / 2.0);
    let tone = ToneSpec { leak: params.tone_leak, ..*tone };
    (
        scale * noise::membrane_noise_rate(&c, params) * band,
        scale * noise::tone_response_rate(&c, &tone),
    )
}

/// Weighted least-squares scale through the origin: y ≈ c·m.
fn scale_through_origin(data: &[(f64, f64, f64)], models: &[f64]) -> Result<f64, FitError> {
    if data.len() < 2 {
        return Err(FitError::TooFewPoints { needed: 2, got: data.len() });
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (index, ((_, y, sigma), m)) in data.iter().zip(models).enumerate() {
        if !(sigma.is_finite() && *sigma > 0.0) {
            return Err(FitError::BadSigma { index });
        }
        let w = 1.0 / (sigma * sigma);
        num += w * m * y;
        den += w * m * m;
    }
    let c = num / den;
    if !(c.is_finite() && c > 0.0) {
        return Err(FitError::DegenerateData { reason: "areas do not resolve a positive scale" });
    }
    Ok(c)
}

/// Estimate C_om twice from band areas measured across pump powers, both
/// sweeps calibrated in squared-photon-flux units against the optical
/// shot noise level. `noise_data` rows hold membrane-noise areas,
/// `tone_data` rows calibration-tone areas; both are (pump power W,
/// area, sigma). `half_width` is the integration band used for the
/// noise areas (rad/s around ω_m).
pub fn fit_optomech(
    cfg: &ExperimentConfig,
    noise_data: &[(f64, f64, f64)],
    tone_data: &[(f64, f64, f64)],
    tone: &ToneSpec,
    params: &RatioParams,
    half_width: f64,
) -> Result<OptomechFit, FitError> {
    let noise_models: Vec<f64> =
        noise_data.iter().map(|(p, _, _)| unit_areas(cfg, *p, tone, params, half_width).0).collect();
    let tone_models: Vec<f64> =
        tone_data.iter().map(|(p, _, _)| unit_areas(cfg, *p, tone, params, half_width).1).collect();
    Ok(OptomechFit {
        c_om_noise: scale_through_origin(noise_data, &noise_models)?,
        c_om_tone: scale_through_origin(tone_data, &tone_models)?,
    })
}

/// Synthetic frequency-pull measurements with Gaussian scatter.
pub fn synthetic_gap_data(
    cfg: &ExperimentConfig,
    powers: &[f64],
    sigma: f64,
    seed: u64,
) -> Vec<(f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    powers
        .iter()
        .map(|&p| {
            let shift = crate::electromech::gap_frequency_shift(
                cfg.r_circuit,
                p,
                cfg.m_eff,
                cfg.omega_0.rad_per_sec(),
                cfg.a_cap,
                cfg.d0,
            );
            (p, shift + sigma * standard_normal(&mut rng), sigma)
        })
        .collect()
}

/// Synthetic noise-to-tone ratios with relative Gaussian scatter. A zero
/// `rel_sigma` produces noiseless data; the reported uncertainties keep
/// a tiny floor so weighted fits stay defined.
pub fn synthetic_ratio_data(
    cfg: &ExperimentConfig,
    tone: &ToneSpec,
    params: &RatioParams,
    powers: &[f64],
    rel_sigma: f64,
    seed: u64,
) -> Vec<(f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    powers
        .iter()
        .map(|&p| {
            let mut c = cfg.clone();
            c.p_drive = PowerLevel::from_watts(p);
            let ratio = noise::noise_tone_ratio(&c, tone, params);
            let scatter = rel_sigma * ratio;
            (p, ratio + scatter * standard_normal(&mut rng), ratio * rel_sigma.max(1e-12))
        })
        .collect()
}

/// Synthetic band-area sweeps (membrane noise, tone) for a given C_om,
/// with relative Gaussian scatter and the same sigma floor as above.
#[allow(clippy::too_many_arguments)]
pub fn synthetic_area_sweeps(
    cfg: &ExperimentConfig,
    c_om: f64,
    tone: &ToneSpec,
    params: &RatioParams,
    half_width: f64,
    powers: &[f64],
    rel_sigma: f64,
    seed: u64,
) -> (Vec<(f64, f64, f64)>, Vec<(f64, f64, f64)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noise_data = Vec::with_capacity(powers.len());
    let mut tone_data = Vec::with_capacity(powers.len());
    for &p in powers {
        let (nm, tm) = unit_areas(cfg, p, tone, params, half_width);
        let (yn, yt) = (c_om * nm, c_om * tm);
        noise_data.push((p, yn + rel_sigma * yn * standard_normal(&mut rng), yn * rel_sigma.max(1e-12)));
        tone_data.push((p, yt + rel_sigma * yt * standard_normal(&mut rng), yt * rel_sigma.max(1e-12)));
    }
    (noise_data, tone_data)
}

/// One draw from a standard normal via Box-Muller.
fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
