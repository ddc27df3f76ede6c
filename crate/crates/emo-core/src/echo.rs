//! Time-domain processing: membrane ring-down, spin-echo synthesis,
//! lock-in demodulation and pulse gating.
//!
//! Everything here works on uniformly sampled complex records. The
//! membrane acts as a narrow filter, so time steps are checked against
//! the fastest frequency involved rather than trusted.

use num_complex::Complex64;

use crate::config::ExperimentConfig;

/// Uniformly sampled complex time record.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    /// Time of the first sample (s).
    pub t0: f64,
    /// Sample interval (s).
    pub dt: f64,
    pub samples: Vec<Complex64>,
}

impl Waveform {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Time of sample `i` (s).
    pub fn time_at(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    /// Time and magnitude of the strongest sample.
    pub fn peak(&self) -> Option<(f64, f64)> {
        let (mut best, mut mag) = (None, 0.0);
        for (i, s) in self.samples.iter().enumerate() {
            let m = s.norm();
            if best.is_none() || m > mag {
                best = Some(i);
                mag = m;
            }
        }
        best.map(|i| (self.time_at(i), mag))
    }
}

/// Shape of a synthesized spin echo.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EchoParams {
    /// Dephasing time T₂* of the echo envelope (s).
    pub t2_star: f64,
    /// Center of the echo (s).
    pub t_echo: f64,
    /// Peak amplitude.
    pub amplitude: f64,
    /// Offset of the echo carrier from the demodulation reference (rad/s).
    pub carrier_offset: f64,
}

/// Why a time-domain operation refused to run.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EchoError {
    #[error("sample interval must be positive and finite")]
    BadSampling,
    #[error("impulse response must cover {needed:.3e} s (ten decay times), got {got:.3e} s")]
    DurationTooShort { needed: f64, got: f64 },
    #[error("span [{lo:.4e}, {hi:.4e}] s must cover the echo window [{need_lo:.4e}, {need_hi:.4e}] s")]
    SpanTooNarrow { lo: f64, hi: f64, need_lo: f64, need_hi: f64 },
    #[error("waveforms must share one sample interval, got {a:.3e} s and {b:.3e} s")]
    MismatchedSampling { a: f64, b: f64 },
    #[error("sample interval {dt:.3e} s undersamples {omega:.3e} rad/s; need dt <= {max_dt:.3e} s")]
    Undersampled { dt: f64, omega: f64, max_dt: f64 },
    #[error("filter cutoff {cutoff:.3e} rad/s must sit below the reference {f_ref:.3e} rad/s")]
    CutoffTooHigh { cutoff: f64, f_ref: f64 },
}

fn check_dt(dt: f64) -> Result<(), EchoError> {
    if dt.is_finite() && dt > 0.0 {
        Ok(())
    } else {
        Err(EchoError::BadSampling)
    }
}

/// Ten samples per period of the fastest component, or the step is
/// rejected.
fn check_sampling(dt: f64, omega: f64) -> Result<(), EchoError> {
    if omega == 0.0 {
        return Ok(());
    }
    let max_dt = std::f64::consts::TAU / (10.0 * omega.abs());
    if dt > max_dt {
        return Err(EchoError::Undersampled { dt, omega: omega.abs(), max_dt });
    }
    Ok(())
}

/// Membrane amplitude ring-down h(t) = exp(−γ_m t / 2) sampled from
/// t = 0. The record must cover at least ten decay times so convolution
/// tails are not silently clipped.
pub fn impulse_response(gamma_m: f64, duration: f64, dt: f64) -> Result<Waveform, EchoError> {
    check_dt(dt)?;
    let needed = 10.0 * 2.0 / gamma_m;
    if duration < needed {
        return Err(EchoError::DurationTooShort { needed, got: duration });
    }
    let n = (duration / dt).floor() as usize + 1;
    let samples = (0..n)
        .map(|i| Complex64::new((-gamma_m * (i as f64 * dt) / 2.0).exp(), 0.0))
        .collect();
    Ok(Waveform { t0: 0.0, dt, samples })
}

/// Run `input` through the filter `response` by direct convolution:
/// b[n] = Σ_k h[k] a[n−k] dt. The output covers the full overlap,
/// len(a) + len(h) − 1 samples starting at the sum of the start times.
pub fn convolve_response(input: &Waveform, response: &Waveform) -> Result<Waveform, EchoError> {
    check_dt(input.dt)?;
    let rel = (input.dt - response.dt).abs() / input.dt;
    if rel > 1e-9 {
        return Err(EchoError::MismatchedSampling { a: input.dt, b: response.dt });
    }
    let (la, lh) = (input.len(), response.len());
    if la == 0 || lh == 0 {
        return Ok(Waveform { t0: input.t0 + response.t0, dt: input.dt, samples: Vec::new() });
    }
    let mut samples = vec![Complex64::new(0.0, 0.0); la + lh - 1];
    for (k, h) in response.samples.iter().enumerate() {
        let h_dt = h * input.dt;
        for (j, a) in input.samples.iter().enumerate() {
            samples[k + j] += h_dt * a;
        }
    }
    Ok(Waveform { t0: input.t0 + response.t0, dt: input.dt, samples })
}

/// Synthesize a spin echo over `t_start..t_end`:
/// amplitude · exp(−|t − t_echo| / T₂*) · exp(i δ (t − t_echo)).
/// The span must cover five dephasing times on both sides of the echo.
pub fn synth_echo(
    params: &EchoParams,
    t_start: f64,
    t_end: f64,
    dt: f64,
) -> Result<Waveform, EchoError> {
    check_dt(dt)?;
    check_sampling(dt, params.carrier_offset)?;
    check_sampling(dt, std::f64::consts::TAU / params.t2_star)?;
    let need_lo = params.t_echo - 5.0 * params.t2_star;
    let need_hi = params.t_echo + 5.0 * params.t2_star;
    if t_start > need_lo || t_end < need_hi {
        return Err(EchoError::SpanTooNarrow { lo: t_start, hi: t_end, need_lo, need_hi });
    }
    let n = ((t_end - t_start) / dt).floor() as usize + 1;
    let samples = (0..n)
        .map(|i| {
            let t = t_start + i as f64 * dt - params.t_echo;
            let envelope = params.amplitude * (-t.abs() / params.t2_star).exp();
            Complex64::from_polar(envelope, params.carrier_offset * t)
        })
        .collect();
    Ok(Waveform { t0: t_start, dt, samples })
}

/// Lock-in cutoff used when nothing else is requested: five mechanical
/// linewidths, wide enough for the echo envelope and narrow enough to
/// reject the image at twice the reference.
pub fn default_demod_cutoff(cfg: &ExperimentConfig) -> f64 {
    5.0 * cfg.gamma_m
}

/// Mix a record down with exp(−i f_ref t) and low-pass the result with a
/// fourth-order Butterworth of the given cutoff (rad/s), run causally in
/// one pass like a hardware lock-in. A real cosine at the reference
/// lands at DC with magnitude 1/2.
pub fn quadrature_demodulate(
    signal: &Waveform,
    f_ref: f64,
    cutoff: f64,
) -> Result<Waveform, EchoError> {
    check_dt(signal.dt)?;
    check_sampling(signal.dt, f_ref)?;
    if !(cutoff > 0.0) || cutoff >= f_ref.abs() {
        return Err(EchoError::CutoffTooHigh { cutoff, f_ref: f_ref.abs() });
    }
    let mut samples: Vec<Complex64> = signal
        .samples
        .iter()
        .enumerate()
        .map(|(i, s)| s * Complex64::from_polar(1.0, -f_ref * signal.time_at(i)))
        .collect();
    // Two cascaded biquads make the fourth-order Butterworth; their Q
    // values are the reciprocal pole-pair spacings of the analog
    // prototype, and the bilinear transform maps it onto the grid with
    // the cutoff held fixed.
    for q in [0.5411961001461969, 1.3065629648763766] {
        biquad_lowpass_in_place(&mut samples, cutoff * signal.dt, q);
    }
    Ok(Waveform { t0: signal.t0, dt: signal.dt, samples })
}

/// One RBJ-style low-pass biquad, direct form II transposed, unity DC
/// gain. `omega0` is the digital cutoff in radians per sample.
fn biquad_lowpass_in_place(samples: &mut [Complex64], omega0: f64, q: f64) {
    let (sin, cos) = omega0.sin_cos();
    let alpha = sin / (2.0 * q);
    let a0 = 1.0 + alpha;
    let b0 = (1.0 - cos) / 2.0 / a0;
    let b1 = (1.0 - cos) / a0;
    let b2 = b0;
    let a1 = -2.0 * cos / a0;
    let a2 = (1.0 - alpha) / a0;
    let mut s1 = Complex64::new(0.0, 0.0);
    let mut s2 = Complex64::new(0.0, 0.0);
    for x in samples.iter_mut() {
        let y = b0 * *x + s1;
        s1 = b1 * *x - a1 * y + s2;
        s2 = b2 * *x - a2 * y;
        *x = y;
    }
}

/// Zero every sample whose time falls inside one of the `windows`
/// (inclusive start, exclusive end). Used to blank the transmit pulses
/// out of a receive record.
pub fn gate(signal: &Waveform, windows: &[(f64, f64)]) -> Waveform {
    let samples = signal
        .samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let t = signal.time_at(i);
            if windows.iter().any(|(lo, hi)| t >= *lo && t < *hi) {
                Complex64::new(0.0, 0.0)
            } else {
                *s
            }
        })
        .collect();
    Waveform { t0: signal.t0, dt: signal.dt, samples }
}

/// Amplitude signal-to-noise after averaging `shots` identical
/// repetitions: the signal adds coherently, the noise in quadrature.
pub fn average_shots(single_shot_snr: f64, shots: u32) -> f64 {
    assert!(shots >= 1, "averaging needs at least one shot");
    single_shot_snr * (shots as f64).sqrt()
}
