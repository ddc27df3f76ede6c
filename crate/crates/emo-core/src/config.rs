//! Experiment parameter files.
//!
//! The on-disk format is a flat INI-like text: `[section]` headers, one
//! `key = value [unit]` pair per line, `#` comments. Values are ordinary
//! frequencies (Hz), human powers (dBm or W), and SI lengths/capacitances;
//! the loader normalizes everything to the internal convention (rad/s, W,
//! m, F) exactly once so downstream physics never multiplies by 2π again.
//!
//! Derived quantities that must stay consistent (total linewidths, drive
//! frequencies, the optical carrier) are methods, never stored fields.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use crate::constants::{C_LIGHT, TAU};
use crate::electromech;
use crate::units::{AngularFrequency, PowerLevel};

/// Full operating point of the transducer.
///
/// Rates (`gamma_*`, `kappa_*`, `delta_p`, `g_om`) are angular, in rad/s.
/// `eta_cap` is the capacitive participation C_m/C_0. `t_eff` is the
/// effective mechanical bath temperature seen by the membrane (excess force
/// noise makes it differ from `t_bath`).
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Loaded membrane drum-mode frequency.
    pub omega_m: AngularFrequency,
    /// Bare membrane mode frequency, used for the zero-point spread.
    pub omega_0: AngularFrequency,
    /// LC circuit resonance. Deliberately distinct from `omega_s`: the
    /// circuit sits a few MHz below the spin precession frequency, and all
    /// circuit formulas use this value.
    pub omega_lc: AngularFrequency,
    /// Nuclear spin precession frequency the transducer is meant to read.
    pub omega_s: AngularFrequency,
    /// Membrane energy damping rate (rad/s).
    pub gamma_m: f64,
    /// Internal LC loss rate (rad/s).
    pub gamma_i: f64,
    /// External (signal input) LC coupling rate (rad/s).
    pub kappa_i: f64,
    /// Internal optical loss rate (rad/s).
    pub gamma_o: f64,
    /// Input-mirror optical coupling rate (rad/s).
    pub kappa_o: f64,
    /// Effective mass of the metallized membrane mode (kg).
    pub m_eff: f64,
    /// Electrode area of the membrane capacitor (m²).
    pub a_cap: f64,
    /// Rest gap of the membrane capacitor (m).
    pub d0: f64,
    /// Capacitive participation ratio C_m/C_0 at the rest gap.
    pub eta_cap: f64,
    /// Trimmer capacitance (F).
    pub c_t: f64,
    /// Parasitic capacitance (F).
    pub c_p: f64,
    /// Series resistance of the LC circuit (ohm).
    pub r_circuit: f64,
    /// Physical temperature of circuit and environment (K).
    pub t_bath: f64,
    /// Effective membrane bath temperature (K).
    pub t_eff: f64,
    /// rf pump power feeding the circuit.
    pub p_drive: PowerLevel,
    /// Laser power reaching the cavity.
    pub p_optical: PowerLevel,
    /// Laser wavelength (m).
    pub lambda_opt: f64,
    /// Curved-mirror radius of the cavity (m).
    pub r_mirror: f64,
    /// Cavity length (m).
    pub cavity_length: f64,
    /// Calibrated single-photon optomechanical coupling (rad/s). The
    /// measured value sits well above the pure radiation-pressure bound
    /// because of thermally assisted transduction in the mirror coating.
    pub g_om: f64,
    /// Integrated drive phase-noise weight over the mechanical band.
    pub eta_p: f64,
    /// Drive phase-noise linewidth (rad/s) for the Lorentzian floor model.
    /// Kept independent of `eta_p`; the two could not be collapsed into one
    /// number without breaking either the budget or the spectrum shape.
    pub delta_p: f64,
    /// Inhomogeneous spin dephasing time (s), needed for echo estimates.
    pub t2_star: Option<f64>,
    /// Echo signal quanta referred to the circuit input, including the
    /// echo-duration and bandwidth-mismatch factors.
    pub s_signal_quanta: Option<f64>,
}

impl ExperimentConfig {
    /// Total LC linewidth κ_iT = κ_i + γ_i (rad/s).
    pub fn kappa_i_total(&self) -> f64 {
        self.kappa_i + self.gamma_i
    }

    /// Total cavity linewidth κ_oT = κ_o + γ_o (rad/s).
    pub fn kappa_o_total(&self) -> f64 {
        self.kappa_o + self.gamma_o
    }

    /// rf coupling efficiency κ_i/κ_iT.
    pub fn ratio_i(&self) -> f64 {
        self.kappa_i / self.kappa_i_total()
    }

    /// Optical coupling efficiency κ_o/κ_oT.
    pub fn ratio_o(&self) -> f64 {
        self.kappa_o / self.kappa_o_total()
    }

    /// rf drive frequency ω_D = ω_LC + ω_m: the pump that bridges circuit
    /// and membrane sits one mechanical frequency above the LC resonance.
    pub fn omega_d_rf(&self) -> AngularFrequency {
        AngularFrequency::from_rad_per_sec(self.omega_lc.rad_per_sec() + self.omega_m.rad_per_sec())
    }

    /// Optical carrier Ω_c = 2πc/λ.
    pub fn omega_c_optical(&self) -> AngularFrequency {
        AngularFrequency::from_hz(C_LIGHT / self.lambda_opt)
    }

    /// Optical drive Ω_D, detuned half a cavity linewidth from the carrier.
    pub fn omega_d_optical(&self) -> AngularFrequency {
        AngularFrequency::from_rad_per_sec(self.omega_c_optical().rad_per_sec() + self.kappa_o_total() / 2.0)
    }

    /// Zero-point spread of the membrane mode (m).
    pub fn z_zpf(&self) -> f64 {
        electromech::zero_point_fluctuation(self.m_eff, self.omega_0.rad_per_sec())
    }

    /// The canonical operating point. Mirrors `configs/canonical.conf`;
    /// a test keeps the two in lockstep.
    pub fn canonical() -> Self {
        ExperimentConfig {
            omega_m: AngularFrequency::from_hz(180e3),
            omega_0: AngularFrequency::from_hz(180e3),
            omega_lc: AngularFrequency::from_hz(38e6),
            omega_s: AngularFrequency::from_hz(43e6),
            gamma_m: 100.0 * TAU,
            gamma_i: 790e3 * TAU,
            kappa_i: 810e3 * TAU,
            gamma_o: 1057e6 * TAU,
            kappa_o: 43e6 * TAU,
            m_eff: 8.6e-11,
            a_cap: 2.0106192983e-8,
            d0: 1.4e-6,
            eta_cap: 5.1e-4,
            c_t: 98e-12,
            c_p: 21e-12,
            r_circuit: 50.0,
            t_bath: 300.0,
            t_eff: 205.0,
            p_drive: PowerLevel::from_dbm(15.0),
            p_optical: PowerLevel::from_watts(1.2e-3),
            lambda_opt: 780e-9,
            r_mirror: 75e-3,
            cavity_length: 17.5e-3,
            g_om: 51.4 * TAU,
            eta_p: 9.6e-12,
            delta_p: 19.0 * TAU,
            // written as the parser computes it (value times unit factor)
            // so the snippet round-trip test can compare bit for bit
            t2_star: Some(320.0 * 1e-6),
            s_signal_quanta: Some(3.6e8),
        }
    }
}

/// Anything that can go wrong between a config file and a validated
/// [`ExperimentConfig`]. Every variant names the offending line or field.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown section [{name}]")]
    UnknownSection { line: usize, name: String },
    #[error("line {line}: unknown key {path}")]
    UnknownKey { line: usize, path: String },
    #[error("line {line}: duplicate key {path}")]
    DuplicateKey { line: usize, path: String },
    #[error("line {line}: {path}: {msg}")]
    BadValue { line: usize, path: String, msg: String },
    #[error("missing required field {path}")]
    MissingField { path: String },
    #[error("{path}: {msg}")]
    Invalid { path: String, msg: String },
    #[error("bad override {given:?}: expected section.key=value")]
    BadOverride { given: String },
}

/// Physical dimension a field expects; drives unit parsing.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    /// Ordinary frequency in the file, stored as [`AngularFrequency`].
    Frequency,
    /// Ordinary frequency in the file, stored as a bare rad/s rate.
    Rate,
    Power,
    Temperature,
    Mass,
    Length,
    Area,
    Capacitance,
    Resistance,
    Time,
    Dimensionless,
}

/// (section, key, kind, required) for every recognized field.
const FIELDS: &[(&str, &str, Kind, bool)] = &[
    ("membrane", "omega_m", Kind::Frequency, true),
    ("membrane", "omega_0", Kind::Frequency, true),
    ("membrane", "gamma_m", Kind::Rate, true),
    ("membrane", "m_eff", Kind::Mass, true),
    ("membrane", "T_eff", Kind::Temperature, true),
    ("membrane", "T2_star", Kind::Time, false),
    ("circuit", "omega_lc", Kind::Frequency, true),
    ("circuit", "omega_s", Kind::Frequency, true),
    ("circuit", "kappa_i", Kind::Rate, true),
    ("circuit", "gamma_i", Kind::Rate, true),
    ("circuit", "C_t", Kind::Capacitance, true),
    ("circuit", "C_p", Kind::Capacitance, true),
    ("circuit", "R_circuit", Kind::Resistance, true),
    ("circuit", "T_bath", Kind::Temperature, true),
    ("circuit", "P_drive", Kind::Power, true),
    ("capacitor", "A_cap", Kind::Area, true),
    ("capacitor", "d0", Kind::Length, true),
    ("capacitor", "eta_cap", Kind::Dimensionless, true),
    ("cavity", "lambda_opt", Kind::Length, true),
    ("cavity", "R_mirror", Kind::Length, true),
    ("cavity", "cavity_length", Kind::Length, true),
    ("cavity", "kappa_o", Kind::Rate, true),
    ("cavity", "gamma_o", Kind::Rate, true),
    ("cavity", "P_optical", Kind::Power, true),
    ("cavity", "g_om", Kind::Rate, true),
    ("noise", "eta_p", Kind::Dimensionless, true),
    ("noise", "delta_P", Kind::Rate, true),
    ("signal", "S_signal_quanta", Kind::Dimensionless, false),
];

fn field_kind(section: &str, key: &str) -> Option<(Kind, bool)> {
    FIELDS
        .iter()
        .find(|(s, k, _, _)| *s == section && *k == key)
        .map(|(_, _, kind, req)| (*kind, *req))
}

fn known_section(section: &str) -> bool {
    FIELDS.iter().any(|(s, _, _, _)| *s == section)
}

/// Parse "value [unit]" for a field of the given kind, returning the value
/// in internal units (rad/s for rates, W for powers, SI otherwise).
fn parse_value(kind: Kind, raw: &str) -> Result<f64, String> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Err("empty value".into());
    }
    let (num_str, unit) = match raw.split_once(char::is_whitespace) {
        Some((n, u)) => (n, u.trim()),
        None => {
            // allow "1.4um" with no space
            let split = raw
                .char_indices()
                .find(|(_, c)| c.is_ascii_alphabetic() && *c != 'e' && *c != 'E')
                .map(|(i, _)| i);
            match split {
                Some(i) if i > 0 => (&raw[..i], raw[i..].trim()),
                _ => (raw, ""),
            }
        }
    };
    let value: f64 = num_str
        .parse()
        .map_err(|_| format!("not a number: {num_str:?}"))?;
    if !value.is_finite() {
        return Err(format!("non-finite value {num_str:?}"));
    }

    let scale = |table: &[(&str, f64)], what: &str| -> Result<f64, String> {
        if unit.is_empty() {
            return Err(format!("missing {what} unit (expected one of {:?})", table.iter().map(|(u, _)| *u).collect::<Vec<_>>()));
        }
        table
            .iter()
            .find(|(u, _)| *u == unit)
            .map(|(_, s)| *s)
            .ok_or_else(|| format!("bad {what} unit {unit:?}"))
    };

    const FREQ: &[(&str, f64)] = &[("Hz", 1.0), ("kHz", 1e3), ("MHz", 1e6), ("GHz", 1e9), ("THz", 1e12)];
    const LEN: &[(&str, f64)] = &[("m", 1.0), ("mm", 1e-3), ("um", 1e-6), ("nm", 1e-9)];
    const AREA: &[(&str, f64)] = &[("m2", 1.0), ("mm2", 1e-6), ("um2", 1e-12)];
    const CAP: &[(&str, f64)] = &[("F", 1.0), ("nF", 1e-9), ("pF", 1e-12), ("fF", 1e-15)];
    const RES: &[(&str, f64)] = &[("Ohm", 1.0), ("kOhm", 1e3), ("MOhm", 1e6)];
    const TIME: &[(&str, f64)] = &[("s", 1.0), ("ms", 1e-3), ("us", 1e-6), ("ns", 1e-9)];
    const WATT: &[(&str, f64)] = &[("W", 1.0), ("mW", 1e-3), ("uW", 1e-6), ("nW", 1e-9)];

    match kind {
        Kind::Frequency => Ok(value * scale(FREQ, "frequency")?),
        Kind::Rate => Ok(value * scale(FREQ, "frequency")? * TAU),
        Kind::Power => {
            if unit == "dBm" {
                Ok(crate::units::dbm_to_watts(value))
            } else {
                Ok(value * scale(WATT, "power")?)
            }
        }
        Kind::Temperature => {
            if unit == "K" {
                Ok(value)
            } else {
                Err(format!("bad temperature unit {unit:?} (expected K)"))
            }
        }
        Kind::Mass => {
            if unit == "kg" {
                Ok(value)
            } else {
                Err(format!("bad mass unit {unit:?} (expected kg)"))
            }
        }
        Kind::Length => Ok(value * scale(LEN, "length")?),
        Kind::Area => Ok(value * scale(AREA, "area")?),
        Kind::Capacitance => Ok(value * scale(CAP, "capacitance")?),
        Kind::Resistance => Ok(value * scale(RES, "resistance")?),
        Kind::Time => Ok(value * scale(TIME, "time")?),
        Kind::Dimensionless => {
            if unit.is_empty() {
                Ok(value)
            } else {
                Err(format!("unexpected unit {unit:?} on dimensionless field"))
            }
        }
    }
}

/// Accumulates raw field values before validation.
#[derive(Default)]
struct Builder {
    values: std::collections::HashMap<(String, String), f64>,
}

impl Builder {
    fn set(&mut self, section: &str, key: &str, raw: &str, line: usize) -> Result<(), ConfigError> {
        let path = format!("{section}.{key}");
        if !known_section(section) {
            return Err(ConfigError::UnknownSection { line, name: section.to_string() });
        }
        let (kind, _) = field_kind(section, key).ok_or_else(|| ConfigError::UnknownKey { line, path: path.clone() })?;
        let value = parse_value(kind, raw).map_err(|msg| ConfigError::BadValue { line, path: path.clone(), msg })?;
        let prev = self.values.insert((section.to_string(), key.to_string()), value);
        if prev.is_some() {
            return Err(ConfigError::DuplicateKey { line, path });
        }
        Ok(())
    }

    fn override_set(&mut self, section: &str, key: &str, raw: &str) -> Result<(), ConfigError> {
        let path = format!("{section}.{key}");
        let (kind, _) = field_kind(section, key).ok_or_else(|| ConfigError::UnknownKey { line: 0, path: path.clone() })?;
        let value = parse_value(kind, raw).map_err(|msg| ConfigError::BadValue { line: 0, path, msg })?;
        self.values.insert((section.to_string(), key.to_string()), value);
        Ok(())
    }

    fn take(&mut self, section: &str, key: &str) -> Result<f64, ConfigError> {
        self.values
            .remove(&(section.to_string(), key.to_string()))
            .ok_or_else(|| ConfigError::MissingField { path: format!("{section}.{key}") })
    }

    fn take_opt(&mut self, section: &str, key: &str) -> Option<f64> {
        self.values.remove(&(section.to_string(), key.to_string()))
    }

    fn finish(mut self) -> Result<ExperimentConfig, ConfigError> {
        let cfg = ExperimentConfig {
            omega_m: AngularFrequency::from_hz(self.take("membrane", "omega_m")?),
            omega_0: AngularFrequency::from_hz(self.take("membrane", "omega_0")?),
            omega_lc: AngularFrequency::from_hz(self.take("circuit", "omega_lc")?),
            omega_s: AngularFrequency::from_hz(self.take("circuit", "omega_s")?),
            gamma_m: self.take("membrane", "gamma_m")?,
            gamma_i: self.take("circuit", "gamma_i")?,
            kappa_i: self.take("circuit", "kappa_i")?,
            gamma_o: self.take("cavity", "gamma_o")?,
            kappa_o: self.take("cavity", "kappa_o")?,
            m_eff: self.take("membrane", "m_eff")?,
            a_cap: self.take("capacitor", "A_cap")?,
            d0: self.take("capacitor", "d0")?,
            eta_cap: self.take("capacitor", "eta_cap")?,
            c_t: self.take("circuit", "C_t")?,
            c_p: self.take("circuit", "C_p")?,
            r_circuit: self.take("circuit", "R_circuit")?,
            t_bath: self.take("circuit", "T_bath")?,
            t_eff: self.take("membrane", "T_eff")?,
            p_drive: PowerLevel::from_watts(self.take("circuit", "P_drive")?),
            p_optical: PowerLevel::from_watts(self.take("cavity", "P_optical")?),
            lambda_opt: self.take("cavity", "lambda_opt")?,
            r_mirror: self.take("cavity", "R_mirror")?,
            cavity_length: self.take("cavity", "cavity_length")?,
            g_om: self.take("cavity", "g_om")?,
            eta_p: self.take("noise", "eta_p")?,
            delta_p: self.take("noise", "delta_P")?,
            t2_star: self.take_opt("membrane", "T2_star"),
            s_signal_quanta: self.take_opt("signal", "S_signal_quanta"),
        };
        validate(&cfg)?;
        Ok(cfg)
    }
}

fn validate(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    let positive: &[(&str, f64)] = &[
        ("membrane.omega_m", cfg.omega_m.rad_per_sec()),
        ("membrane.omega_0", cfg.omega_0.rad_per_sec()),
        ("circuit.omega_lc", cfg.omega_lc.rad_per_sec()),
        ("circuit.omega_s", cfg.omega_s.rad_per_sec()),
        ("membrane.gamma_m", cfg.gamma_m),
        ("circuit.gamma_i", cfg.gamma_i),
        ("circuit.kappa_i", cfg.kappa_i),
        ("cavity.gamma_o", cfg.gamma_o),
        ("cavity.kappa_o", cfg.kappa_o),
        ("membrane.m_eff", cfg.m_eff),
        ("capacitor.A_cap", cfg.a_cap),
        ("capacitor.d0", cfg.d0),
        ("circuit.R_circuit", cfg.r_circuit),
        ("circuit.T_bath", cfg.t_bath),
        ("membrane.T_eff", cfg.t_eff),
        ("cavity.lambda_opt", cfg.lambda_opt),
        ("cavity.R_mirror", cfg.r_mirror),
        ("cavity.cavity_length", cfg.cavity_length),
        ("cavity.g_om", cfg.g_om),
        ("noise.delta_P", cfg.delta_p),
    ];
    for (path, v) in positive {
        if !(*v > 0.0) {
            return Err(ConfigError::Invalid { path: path.to_string(), msg: format!("must be > 0, got {v}") });
        }
    }
    for (path, v) in [("circuit.C_t", cfg.c_t), ("circuit.C_p", cfg.c_p), ("noise.eta_p", cfg.eta_p)] {
        if !(v >= 0.0) {
            return Err(ConfigError::Invalid { path: path.to_string(), msg: format!("must be >= 0, got {v}") });
        }
    }
    if !(cfg.eta_cap > 0.0 && cfg.eta_cap < 1.0) {
        return Err(ConfigError::Invalid {
            path: "capacitor.eta_cap".into(),
            msg: format!("participation ratio must lie in (0, 1), got {}", cfg.eta_cap),
        });
    }
    if let Some(t2) = cfg.t2_star {
        if !(t2 > 0.0) {
            return Err(ConfigError::Invalid { path: "membrane.T2_star".into(), msg: format!("must be > 0, got {t2}") });
        }
    }
    if let Some(s) = cfg.s_signal_quanta {
        if !(s >= 0.0) {
            return Err(ConfigError::Invalid { path: "signal.S_signal_quanta".into(), msg: format!("must be >= 0, got {s}") });
        }
    }
    Ok(())
}

/// Parse config text. Entry point shared by [`load_config`] and the fuzz
/// harness; must never panic on malformed input.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig, ConfigError> {
    parse_config_with_overrides(text, &[])
}

/// Parse config text, then apply `section.key=value` overrides in order.
pub fn parse_config_with_overrides(text: &str, overrides: &[String]) -> Result<ExperimentConfig, ConfigError> {
    let mut b = Builder::default();
    let mut section: Option<String> = None;
    let mut seen_sections: HashSet<String> = HashSet::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.split_once('#') {
            Some((before, _)) => before,
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::Syntax { line: line_no, msg: format!("unterminated section header {line:?}") })?
                .trim();
            if name.is_empty() {
                return Err(ConfigError::Syntax { line: line_no, msg: "empty section name".into() });
            }
            if !known_section(name) {
                return Err(ConfigError::UnknownSection { line: line_no, name: name.to_string() });
            }
            if !seen_sections.insert(name.to_string()) {
                return Err(ConfigError::Syntax { line: line_no, msg: format!("section [{name}] repeated") });
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax { line: line_no, msg: format!("expected key = value, got {line:?}") })?;
        let section = section
            .as_deref()
            .ok_or_else(|| ConfigError::Syntax { line: line_no, msg: "key before any [section] header".into() })?;
        b.set(section, key.trim(), value, line_no)?;
    }

    for ov in overrides {
        let (section, key, value) = parse_override(ov)?;
        b.override_set(&section, &key, &value)?;
    }

    b.finish()
}

/// Split an override of the form `section.key=value [unit]`.
pub fn parse_override(s: &str) -> Result<(String, String, String), ConfigError> {
    let bad = || ConfigError::BadOverride { given: s.to_string() };
    let (path, value) = s.split_once('=').ok_or_else(bad)?;
    let (section, key) = path.trim().split_once('.').ok_or_else(bad)?;
    let (section, key, value) = (section.trim(), key.trim(), value.trim());
    if section.is_empty() || key.is_empty() || value.is_empty() {
        return Err(bad());
    }
    Ok((section.to_string(), key.to_string(), value.to_string()))
}

/// Read and parse a config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    load_config_with_overrides(path, &[])
}

/// Read and parse a config file, then apply overrides.
pub fn load_config_with_overrides(path: &Path, overrides: &[String]) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    parse_config_with_overrides(&text, overrides)
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "omega_m/2pi   = {:.6e} Hz", self.omega_m.hz())?;
        writeln!(f, "omega_lc/2pi  = {:.6e} Hz", self.omega_lc.hz())?;
        writeln!(f, "kappa_iT/2pi  = {:.6e} Hz", self.kappa_i_total() / TAU)?;
        writeln!(f, "kappa_oT/2pi  = {:.6e} Hz", self.kappa_o_total() / TAU)?;
        writeln!(f, "P_drive       = {:.3} dBm", self.p_drive.dbm())?;
        write!(f, "d0            = {:.4e} m", self.d0)
    }
}
