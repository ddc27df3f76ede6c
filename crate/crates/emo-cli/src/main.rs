//! `emo`: command-line front end for the transduction toolkit.
//!
//! Every run loads one config file, applies `--set` overrides in order,
//! and stamps its outputs with a manifest header, so a file names the
//! exact invocation that produced it and a rerun reproduces it byte for
//! byte.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use emo_core::config::{load_config_with_overrides, ConfigError, ExperimentConfig};
use emo_core::constants::TAU;
use emo_core::dynamics::{Inputs, TransductionModel};
use emo_core::echo::{
    convolve_response, default_demod_cutoff, impulse_response, quadrature_demodulate, synth_echo,
    EchoError, EchoParams, Waveform,
};
use emo_core::fit::{fit_bath_and_phase, fit_gap, fit_optomech, FitError};
use emo_core::noise::{
    budget, prospective_budget, sideband_spectrum, snr, NoiseBudget, NoiseError, NoiseInputs,
    ProspectiveOptions, RatioParams, SnrVariant, SpectrumOptions, ToneSpec,
};
use emo_core::optics::{hemispherical_mode, lengths_for_waist, rayleigh_range, OpticsError};
use emo_core::report::{
    budget_table, complex_spectrum_csv, density_spectrum_csv, json_report, read_calibration_csv,
    read_waveform_csv, sweep_csv, waveform_csv, ReportError, RunManifest,
};
use emo_core::units::{dbm_to_watts, PowerLevel};
use emo_core::{electromech, optics};

#[derive(Parser)]
#[command(name = "emo", version, about = "Electro-mechano-optical transduction toolkit")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Experiment configuration file.
    #[arg(long, global = true, default_value = "configs/canonical.conf")]
    config: PathBuf,
    /// Override a config entry, e.g. --set "circuit.P_drive=18 dBm".
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
    /// Directory for emitted files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Seed for any stochastic step; fixed seed means identical output.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Evaluate the upgraded scenario (closed gap, raised pump, membrane
    /// thermalized, pump phase noise filtered) where a command supports it.
    #[arg(long, global = true)]
    prospective: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Photodetected sideband spectra around the mechanical line.
    Spectrum(SpectrumArgs),
    /// Input-referred noise budget, as quanta and as temperatures.
    Budget,
    /// Signal-to-noise estimate for one detection variant.
    Snr(SnrArgs),
    /// Fit calibration sweeps read from CSV files.
    Calibrate(CalibrateArgs),
    /// Solve the optical cavity geometry, forward or backward.
    Cavity(CavityArgs),
    /// Synthesize an echo record and push it through the detection chain.
    Echo(EchoArgs),
    /// Scan one parameter axis and tabulate derived figures of merit.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SpectrumArgs {
    /// Grid points across the band.
    #[arg(long, default_value_t = 4096)]
    points: usize,
    /// Band half-width around the mechanical frequency (Hz); defaults to
    /// twenty mechanical linewidths.
    #[arg(long)]
    half_width_hz: Option<f64>,
    /// Deposit the configured echo signal as a coherent line.
    #[arg(long)]
    signal: bool,
    /// Add a calibration tone at this offset from the drive (Hz).
    #[arg(long)]
    tone_offset_hz: Option<f64>,
    /// Tone photon flux (quanta/s).
    #[arg(long, default_value_t = 1e15)]
    tone_flux: f64,
    /// Drive leak fraction into the tone bin.
    #[arg(long, default_value_t = 0.0)]
    tone_leak: f64,
    /// Emit one spectrum per listed drive power (dBm) instead of the
    /// config's single operating point.
    #[arg(long = "drive-dbm", value_name = "DBM")]
    drive_dbm: Vec<f64>,
}

#[derive(Args)]
struct SnrArgs {
    #[arg(long, value_enum, default_value_t = VariantArg::Echo)]
    variant: VariantArg,
    /// Number of averaged repetitions.
    #[arg(long, default_value_t = 1)]
    avg: u32,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Narrowband,
    WithPhase,
    Echo,
    Overcoupled,
}

impl VariantArg {
    fn to_core(self) -> SnrVariant {
        match self {
            VariantArg::Narrowband => SnrVariant::Narrowband,
            VariantArg::WithPhase => SnrVariant::WithPhaseNoise,
            VariantArg::Echo => SnrVariant::Echo,
            VariantArg::Overcoupled => SnrVariant::Overcoupled,
        }
    }

    fn name(self) -> &'static str {
        match self {
            VariantArg::Narrowband => "narrowband",
            VariantArg::WithPhase => "with-phase",
            VariantArg::Echo => "echo",
            VariantArg::Overcoupled => "overcoupled",
        }
    }
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(value_enum)]
    kind: CalKind,
    /// Calibration sweep CSV (power_dbm, value, sigma) for the gap and
    /// bath-phase fits.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Membrane-noise area sweep CSV for the optomech fit.
    #[arg(long)]
    noise_data: Option<PathBuf>,
    /// Calibration-tone area sweep CSV for the optomech fit.
    #[arg(long)]
    tone_data: Option<PathBuf>,
    /// Calibration tone offset from the drive (Hz); defaults to six
    /// linewidths above the mechanical frequency.
    #[arg(long)]
    tone_offset_hz: Option<f64>,
    /// Calibration tone photon flux (quanta/s).
    #[arg(long, default_value_t = 1e15)]
    tone_flux: f64,
    /// Known drive leak fraction into the tone bin (optomech only; the
    /// bath-phase fit recovers it instead).
    #[arg(long, default_value_t = 0.0)]
    tone_leak: f64,
    /// Effective membrane temperature (K) for the optomech fit; defaults
    /// to the configured value.
    #[arg(long)]
    t_eff: Option<f64>,
    /// Integrated phase pickup for the optomech fit; defaults to the
    /// configured value.
    #[arg(long)]
    eta_p: Option<f64>,
    /// Integration half-width of the area sweeps (Hz); defaults to
    /// twenty mechanical linewidths.
    #[arg(long)]
    half_width_hz: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CalKind {
    /// Membrane gap from the pump-power frequency pull.
    Gap,
    /// Bath temperature, phase pickup and tone leak from noise-to-tone
    /// ratios.
    BathPhase,
    /// Optomechanical cooperativity from band areas, two routes.
    Optomech,
}

#[derive(Args)]
struct CavityArgs {
    /// Solve the mode at this cavity length (mm); defaults to the
    /// configured length when no waist target is given.
    #[arg(long)]
    length_mm: Option<f64>,
    /// Solve for the lengths that give this waist diameter (µm).
    #[arg(long)]
    waist_diameter_um: Option<f64>,
    /// Curved mirror radius (mm); defaults to the configured mirror.
    #[arg(long)]
    r_mirror_mm: Option<f64>,
    /// Wavelength (nm); defaults to the configured laser.
    #[arg(long)]
    lambda_nm: Option<f64>,
}

#[derive(Args)]
struct EchoArgs {
    /// Echo center time (s).
    #[arg(long, default_value_t = 5e-3)]
    t_echo: f64,
    /// Echo peak amplitude.
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    /// Intermediate-frequency offset of the echo carrier (Hz); zero
    /// skips demodulation.
    #[arg(long, default_value_t = 1e4)]
    carrier_offset_hz: f64,
    /// Sample interval (s).
    #[arg(long, default_value_t = 5e-6)]
    dt: f64,
    /// Record start (s).
    #[arg(long, default_value_t = 0.0)]
    t_start: f64,
    /// Record end (s); defaults to five coherence times past the echo.
    #[arg(long)]
    t_end: Option<f64>,
    /// Read the input record from a waveform CSV instead of
    /// synthesizing one.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Average this many noisy repetitions.
    #[arg(long, default_value_t = 1)]
    shots: u32,
    /// Per-sample noise standard deviation added to each repetition.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    axis: AxisArg,
    /// First axis value (meters for d0, dBm for p-drive).
    #[arg(long)]
    from: f64,
    /// Last axis value.
    #[arg(long)]
    to: f64,
    #[arg(long, default_value_t = 15)]
    points: usize,
    /// Space the points geometrically instead of linearly.
    #[arg(long)]
    log: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    /// Membrane gap (m), with capacitive participation rescaled as the
    /// gap closes.
    D0,
    /// Circuit pump power (dBm).
    PDrive,
}

impl AxisArg {
    fn name(self) -> &'static str {
        match self {
            AxisArg::D0 => "d0_m",
            AxisArg::PDrive => "p_drive_dbm",
        }
    }
}

/// Anything a command can fail with, tagged with the exit code the
/// failure deserves: 2 for bad input, 1 for a run that could not finish.
#[derive(Debug, thiserror::Error)]
enum CmdError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Report(#[from] ReportError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Noise(#[from] NoiseError),
    #[error("{0}")]
    Fit(#[from] FitError),
    #[error("{0}")]
    Optics(#[from] OpticsError),
    #[error("{0}")]
    Echo(#[from] EchoError),
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
}

impl CmdError {
    fn exit_code(&self) -> u8 {
        match self {
            CmdError::Config(_) | CmdError::Report(_) | CmdError::Usage(_) | CmdError::Read { .. } => 2,
            _ => 1,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), CmdError> {
    let cfg = load_config_with_overrides(&cli.global.config, &cli.global.overrides)?;
    let manifest = RunManifest {
        command: command_name(&cli.command).to_string(),
        config_path: cli.global.config.display().to_string(),
        overrides: cli.global.overrides.clone(),
        output_dir: cli.global.out.display().to_string(),
        seed: cli.global.seed,
    };
    match &cli.command {
        Command::Spectrum(args) => cmd_spectrum(&cli.global, &manifest, &cfg, args),
        Command::Budget => cmd_budget(&cli.global, &manifest, &cfg),
        Command::Snr(args) => cmd_snr(&cli.global, &manifest, &cfg, args),
        Command::Calibrate(args) => cmd_calibrate(&cli.global, &manifest, &cfg, args),
        Command::Cavity(args) => cmd_cavity(&cli.global, &manifest, &cfg, args),
        Command::Echo(args) => cmd_echo(&cli.global, &manifest, &cfg, args),
        Command::Sweep(args) => cmd_sweep(&cli.global, &manifest, &cfg, args),
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Spectrum(_) => "spectrum",
        Command::Budget => "budget",
        Command::Snr(_) => "snr",
        Command::Calibrate(_) => "calibrate",
        Command::Cavity(_) => "cavity",
        Command::Echo(_) => "echo",
        Command::Sweep(_) => "sweep",
    }
}

fn write_out(dir: &Path, name: &str, contents: &str) -> Result<(), CmdError> {
    std::fs::create_dir_all(dir)
        .map_err(|source| CmdError::Write { path: dir.display().to_string(), source })?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|source| CmdError::Write { path: path.display().to_string(), source })?;
    println!("wrote {}", path.display());
    Ok(())
}

fn read_text(path: &Path) -> Result<String, CmdError> {
    std::fs::read_to_string(path)
        .map_err(|source| CmdError::Read { path: path.display().to_string(), source })
}

fn spectrum_options(args: &SpectrumArgs) -> SpectrumOptions {
    SpectrumOptions {
        points: args.points,
        half_width: args.half_width_hz.map(|f| TAU * f),
        include_signal: args.signal,
        tone: args.tone_offset_hz.map(|f| ToneSpec {
            offset: TAU * f,
            flux: args.tone_flux,
            leak: args.tone_leak,
        }),
    }
}

fn cmd_spectrum(
    global: &Global,
    manifest: &RunManifest,
    cfg: &ExperimentConfig,
    args: &SpectrumArgs,
) -> Result<(), CmdError> {
    let opts = spectrum_options(args);

    let mut runs: Vec<(String, ExperimentConfig)> = Vec::new();
    if args.drive_dbm.is_empty() {
        runs.push(("spectrum.csv".to_string(), cfg.clone()));
    } else {
        for dbm in &args.drive_dbm {
            let mut c = cfg.clone();
            c.p_drive = PowerLevel::from_dbm(*dbm);
            runs.push((format!("spectrum_{dbm:+06.1}dBm.csv"), c));
        }
    }
    for (name, c) in &runs {
        let spectrum = sideband_spectrum(c, &NoiseInputs::shot_limited(c), &opts)?;
        let (peak_w, peak_d) = spectrum
            .omega
            .iter()
            .zip(&spectrum.density)
            .fold((0.0, f64::NEG_INFINITY), |best, (w, d)| if *d > best.1 { (*w, *d) } else { best });
        println!(
            "{name}: peak {:.6} Hz, density {:.6e}, band power {:.6e}",
            peak_w / TAU,
            peak_d,
            spectrum.band_power()
        );
        write_out(&global.out, name, &density_spectrum_csv(manifest, &spectrum))?;
    }

    // the complex signal-path response over the same band, at the
    // config's own operating point
    let model = TransductionModel::from_config(cfg);
    let omega_m = cfg.omega_m.rad_per_sec();
    let half_width = args.half_width_hz.map(|f| TAU * f).unwrap_or(20.0 * cfg.gamma_m);
    let n = args.points.max(2);
    let step = 2.0 * half_width / (n - 1) as f64;
    let mut freqs = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let w = omega_m - half_width + step * i as f64;
        freqs.push(w / TAU);
        values.push(model.output(w, &Inputs::signal_only(1.0)).z);
    }
    write_out(&global.out, "response.csv", &complex_spectrum_csv(manifest, &freqs, &values))
}

fn budget_json(b: &NoiseBudget) -> serde_json::Value {
    serde_json::json!({
        "shot": b.shot,
        "brownian": b.brownian,
        "johnson": b.johnson,
        "phase": b.phase,
        "total": b.total(),
    })
}

fn cmd_budget(
    global: &Global,
    manifest: &RunManifest,
    cfg: &ExperimentConfig,
) -> Result<(), CmdError> {
    let (mode, quanta) = if global.prospective {
        ("prospective", prospective_budget(cfg, &ProspectiveOptions::default()))
    } else {
        ("canonical", budget(cfg))
    };
    let kelvin = quanta.in_kelvin(cfg.omega_lc.rad_per_sec());
    print!("{}", budget_table(&quanta, &kelvin));
    let payload = serde_json::json!({
        "mode": mode,
        "quanta": budget_json(&quanta),
        "kelvin": budget_json(&kelvin),
    });
    write_out(&global.out, "budget.json", &json_report(manifest, payload))
}

fn cmd_snr(
    global: &Global,
    manifest: &RunManifest,
    cfg: &ExperimentConfig,
    args: &SnrArgs,
) -> Result<(), CmdError> {
    let report = snr(cfg, args.variant.to_core())?;
    let averaged = report.averaged(args.avg);
    println!(
        "{}: single-shot {:.6}, x{} shots {:.6}",
        args.variant.name(),
        report.snr_single_shot,
        args.avg,
        averaged
    );
    let payload = serde_json::json!({
        "variant": args.variant.name(),
        "signal_quanta": report.signal_quanta,
        "noise_quanta": report.noise_quanta,
        "snr_single_shot": report.snr_single_shot,
        "shots": args.avg,
        "snr_averaged": averaged,
    });
    write_out(&global.out, "snr.json", &json_report(manifest, payload))
}

fn default_tone(cfg: &ExperimentConfig, offset_hz: Option<f64>, flux: f64, leak: f64) -> ToneSpec {
    let offset = offset_hz
        .map(|f| TAU * f)
        .unwrap_or(cfg.omega_m.rad_per_sec() + 6.0 * cfg.gamma_m);
    ToneSpec { offset, flux, leak }
}

/// Convert calibration rows from the file's dBm column to the watts the
/// fitters work in.
fn to_watts(rows: &[(f64, f64, f64)]) -> Vec<(f64, f64, f64)> {
    rows.iter().map(|(dbm, v, s)| (dbm_to_watts(*dbm), *v, *s)).collect()
}

fn require<'a>(opt: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, CmdError> {
    opt.as_deref().ok_or_else(|| CmdError::Usage(format!("this fit needs {flag} FILE")))
}

fn cmd_calibrate(
    global: &Global,
    manifest: &RunManifest,
    cfg: &ExperimentConfig,
    args: &CalibrateArgs,
) -> Result<(), CmdError> {
    let payload = match args.kind {
        CalKind::Gap => {
            let rows = to_watts(&read_calibration_csv(&read_text(require(&args.data, "--data")?)?)?);
            let fit = fit_gap(cfg, &rows)?;
            println!("gap: d0 {:.6e} m, slope {:.6e} rad/s/W", fit.d0, fit.slope);
            serde_json::json!({
                "kind": "gap",
                "points": rows.len(),
                "slope_rad_per_s_per_w": fit.slope,
                "d0_m": fit.d0,
            })
        }
        CalKind::BathPhase => {
            let rows = to_watts(&read_calibration_csv(&read_text(require(&args.data, "--data")?)?)?);
            let tone = default_tone(cfg, args.tone_offset_hz, args.tone_flux, 0.0);
            let fit = fit_bath_and_phase(cfg, &tone, &rows)?;
            println!(
                "bath-phase: T_eff {:.4} K, eta_p {:.4e}, tone leak {:.4e}",
                fit.t_eff, fit.eta_p, fit.tone_leak
            );
            serde_json::json!({
                "kind": "bath-phase",
                "points": rows.len(),
                "t_eff_k": fit.t_eff,
                "eta_p": fit.eta_p,
                "tone_leak": fit.tone_leak,
                "residual": fit.residual,
            })
        }
        CalKind::Optomech => {
            let noise_rows =
                to_watts(&read_calibration_csv(&read_text(require(&args.noise_data, "--noise-data")?)?)?);
            let tone_rows =
                to_watts(&read_calibration_csv(&read_text(require(&args.tone_data, "--tone-data")?)?)?);
            let tone = default_tone(cfg, args.tone_offset_hz, args.tone_flux, args.tone_leak);
            let params = RatioParams {
                t_eff: args.t_eff.unwrap_or(cfg.t_eff),
                eta_p: args.eta_p.unwrap_or(cfg.eta_p),
                tone_leak: args.tone_leak,
            };
            let half_width = args.half_width_hz.map(|f| TAU * f).unwrap_or(20.0 * cfg.gamma_m);
            let fit = fit_optomech(cfg, &noise_rows, &tone_rows, &tone, &params, half_width)?;
            println!(
                "optomech: C_om {:.6e} (noise route) / {:.6e} (tone route), discrepancy {:.2}%",
                fit.c_om_noise,
                fit.c_om_tone,
                100.0 * fit.relative_discrepancy()
            );
            serde_json::json!({
                "kind": "optomech",
                "noise_points": noise_rows.len(),
                "tone_points": tone_rows.len(),
                "c_om_noise": fit.c_om_noise,
                "c_om_tone": fit.c_om_tone,
                "relative_discrepancy": fit.relative_discrepancy(),
            })
        }
    };
    write_out(&global.out, "calibration.json", &json_report(manifest, payload))
}

fn cmd_cavity(
    global: &Global,
    manifest: &RunManifest,
    cfg: &ExperimentConfig,
    args: &CavityArgs,
) -> Result<(), CmdError> {
    let r_mirror = args.r_mirror_mm.map(|mm| mm * 1e-3).unwrap_or(cfg.r_mirror);
    let lambda = args.lambda_nm.map(|nm| nm * 1e-9).unwrap_or(cfg.lambda_opt);
    let payload = match (args.length_mm, args.waist_diameter_um) {
        (Some(_), Some(_)) => {
            return Err(CmdError::Usage(
                "--length-mm and --waist-diameter-um are two directions of the same solve; pick one"
                    .to_string(),
            ));
        }
        (length_mm, None) => {
            let length = length_mm.map(|mm| mm * 1e-3).unwrap_or(cfg.cavity_length);
            let mode = hemispherical_mode(length, r_mirror, lambda)?;
            println!(
                "mode at L {:.4} mm: waist diameter {:.4} um, rayleigh {:.4} mm",
                length * 1e3,
                mode.waist_diameter() * 1e6,
                mode.rayleigh * 1e3
            );
            serde_json::json!({
                "direction": "forward",
                "length_m": length,
                "r_mirror_m": r_mirror,
                "lambda_m": lambda,
                "waist_m": mode.waist,
                "waist_diameter_m": mode.waist_diameter(),
                "rayleigh_m": mode.rayleigh,
            })
        }
        (None, Some(diameter_um)) => {
            let w0 = 0.5 * diameter_um * 1e-6;
            let (short, long) = lengths_for_waist(w0, r_mirror, lambda)?;
            let z0 = rayleigh_range(w0, lambda);
            println!(
                "lengths for 2W0 {:.2} um: {:.4} mm and {:.4} mm",
                diameter_um,
                short * 1e3,
                long * 1e3
            );
            serde_json::json!({
                "direction": "backward",
                "waist_diameter_m": diameter_um * 1e-6,
                "r_mirror_m": r_mirror,
                "lambda_m": lambda,
                "short_m": short,
                "long_m": long,
                "root_sum_m": short + long,
                "root_product_m2": short * long,
                "rayleigh_m": z0,
            })
        }
    };
    write_out(&global.out, "cavity.json", &json_report(manifest, payload))
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(1e-12..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

fn cmd_echo(
    global: &Global,
    manifest: &RunManifest,
    cfg: &ExperimentConfig,
    args: &EchoArgs,
) -> Result<(), CmdError> {
    let input = match &args.input {
        Some(path) => read_waveform_csv(&read_text(path)?)?,
        None => {
            let t2_star = cfg.t2_star.ok_or(NoiseError::MissingField { field: "membrane.T2_star" })?;
            let params = EchoParams {
                t2_star,
                t_echo: args.t_echo,
                amplitude: args.amplitude,
                carrier_offset: TAU * args.carrier_offset_hz,
            };
            let t_end = args.t_end.unwrap_or(args.t_echo + 5.0 * t2_star + 1e-3);
            synth_echo(&params, args.t_start, t_end, args.dt)?
        }
    };

    let averaged = if args.noise > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(global.seed);
        let mut acc = vec![Complex64::new(0.0, 0.0); input.len()];
        for _ in 0..args.shots.max(1) {
            for (a, s) in acc.iter_mut().zip(&input.samples) {
                *a += s + args.noise * Complex64::new(gaussian(&mut rng), gaussian(&mut rng));
            }
        }
        let n = f64::from(args.shots.max(1));
        Waveform {
            t0: input.t0,
            dt: input.dt,
            samples: acc.into_iter().map(|a| a / n).collect(),
        }
    } else {
        input.clone()
    };

    let h = impulse_response(cfg.gamma_m, 20.0 / cfg.gamma_m, averaged.dt)?;
    let filtered = convolve_response(&averaged, &h)?;
    if let Some((t, m)) = filtered.peak() {
        println!("filtered peak at {t:.6} s, magnitude {m:.6e}");
    }

    write_out(&global.out, "echo_input.csv", &waveform_csv(manifest, &averaged))?;
    write_out(&global.out, "echo_filtered.csv", &waveform_csv(manifest, &filtered))?;

    if args.carrier_offset_hz > 0.0 {
        let demod = quadrature_demodulate(
            &filtered,
            TAU * args.carrier_offset_hz,
            default_demod_cutoff(cfg),
        )?;
        write_out(&global.out, "echo_demod.csv", &waveform_csv(manifest, &demod))?;
    }
    Ok(())
}

fn axis_grid(args: &SweepArgs) -> Result<Vec<f64>, CmdError> {
    if args.points < 2 {
        return Err(CmdError::Usage("a sweep needs at least 2 points".to_string()));
    }
    if args.points > 100_000 {
        return Err(CmdError::Usage("more than 1e5 sweep points is a typo".to_string()));
    }
    let n = args.points;
    if args.log {
        if !(args.from > 0.0 && args.to > 0.0) {
            return Err(CmdError::Usage("--log needs strictly positive endpoints".to_string()));
        }
        let ratio = (args.to / args.from).ln();
        Ok((0..n).map(|i| args.from * (ratio * i as f64 / (n - 1) as f64).exp()).collect())
    } else {
        let step = (args.to - args.from) / (n - 1) as f64;
        Ok((0..n).map(|i| args.from + step * i as f64).collect())
    }
}

fn sweep_point(cfg: &ExperimentConfig, axis: AxisArg, value: f64) -> Vec<(String, f64)> {
    let mut c = cfg.clone();
    match axis {
        AxisArg::D0 => {
            c.eta_cap = electromech::participation_at_gap(cfg.eta_cap, cfg.d0, value);
            c.d0 = value;
        }
        AxisArg::PDrive => {
            c.p_drive = PowerLevel::from_dbm(value);
        }
    }
    let omega_m = c.omega_m.rad_per_sec();
    let b = budget(&c);
    let mut metrics = vec![
        ("c_em".to_string(), electromech::cooperativity_em_of(&c, omega_m)),
        ("g_em_hz".to_string(), electromech::g_em_of(&c) / TAU),
        ("big_g_em_hz".to_string(), electromech::big_g_em_of(&c) / TAU),
        ("c_om".to_string(), optics::cooperativity_om_of(&c)),
        ("noise_shot_quanta".to_string(), b.shot),
        ("noise_brownian_quanta".to_string(), b.brownian),
        ("noise_johnson_quanta".to_string(), b.johnson),
        ("noise_phase_quanta".to_string(), b.phase),
        ("noise_total_quanta".to_string(), b.total()),
    ];
    if c.s_signal_quanta.is_some() && c.t2_star.is_some() {
        if let Ok(report) = snr(&c, SnrVariant::Echo) {
            metrics.push(("snr_echo".to_string(), report.snr_single_shot));
        }
    }
    metrics
}

fn cmd_sweep(
    global: &Global,
    manifest: &RunManifest,
    cfg: &ExperimentConfig,
    args: &SweepArgs,
) -> Result<(), CmdError> {
    let values = axis_grid(args)?;

    // evaluate points across a few worker threads, then lay the rows out
    // strictly in axis order
    let workers = values.len().min(8).max(1);
    let chunk_size = values.len().div_ceil(workers);
    let per_point: Vec<Vec<(String, f64)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = values
            .chunks(chunk_size)
            .map(|chunk| {
                scope.spawn(move || {
                    chunk.iter().map(|v| sweep_point(cfg, args.axis, *v)).collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("sweep worker panicked")).collect()
    });

    let mut rows = Vec::with_capacity(values.len() * 8);
    for (value, metrics) in values.iter().zip(per_point) {
        for (metric, y) in metrics {
            rows.push((*value, metric, y));
        }
    }
    println!("swept {} over {} points", args.axis.name(), values.len());
    write_out(&global.out, "sweep.csv", &sweep_csv(manifest, args.axis.name(), &rows))
}
