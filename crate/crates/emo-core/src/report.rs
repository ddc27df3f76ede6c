//! Run manifests and file formats.
//!
//! Every file the toolkit emits starts with a schema line and the
//! manifest of the run that produced it, so results stay traceable and
//! reruns are byte-identical. Readers check the schema version and kind
//! before trusting a single row; unknown versions are rejected rather
//! than guessed at.

use num_complex::Complex64;

use crate::echo::Waveform;
use crate::noise::Spectrum;

/// Format version stamped into every CSV this crate writes.
pub const CSV_VERSION: u32 = 1;

/// What produced a file: the command, its inputs and its seed.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: String,
    pub overrides: Vec<String>,
    pub output_dir: String,
    pub seed: u64,
}

impl RunManifest {
    fn comment_block(&self) -> String {
        let overrides = if self.overrides.is_empty() {
            "(none)".to_string()
        } else {
            self.overrides.join("; ")
        };
        let mut block = String::new();
        for (key, value) in [
            ("command", &self.command),
            ("config", &self.config_path),
            ("overrides", &overrides),
            ("output_dir", &self.output_dir),
            ("seed", &self.seed.to_string()),
        ] {
            block.push_str("# ");
            block.push_str(key);
            block.push_str(": ");
            // comments are line-oriented; never let a value break that
            block.extend(value.chars().map(|c| if c == '\n' || c == '\r' { ' ' } else { c }));
            block.push('\n');
        }
        block
    }
}

/// Why a file could not be written or parsed.
#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line 1 must be a schema line '# emo-csv <version> <kind>', got {got:?}")]
    BadSchema { got: String },
    #[error("unsupported format version {found}; this build reads version {CSV_VERSION}")]
    UnsupportedVersion { found: String },
    #[error("expected a {expected} file, found kind {found:?}")]
    WrongKind { expected: &'static str, found: String },
    #[error("line {line}: expected header {expected:?}, got {got:?}")]
    BadHeader { line: usize, expected: &'static str, got: String },
    #[error("line {line}: {message}")]
    BadRow { line: usize, message: String },
    #[error("line {line}: sample times are not uniformly spaced")]
    NonUniformSampling { line: usize },
    #[error("no data rows")]
    Empty,
}

fn schema_line(kind: &str) -> String {
    format!("# emo-csv {CSV_VERSION} {kind}\n")
}

/// Full precision so values survive a round trip through text exactly.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Noise spectrum as CSV: density per grid point.
pub fn density_spectrum_csv(manifest: &RunManifest, spectrum: &Spectrum) -> String {
    let mut out = schema_line("spectrum");
    out.push_str(&manifest.comment_block());
    out.push_str("frequency_Hz,density\n");
    for (w, d) in spectrum.omega.iter().zip(&spectrum.density) {
        out.push_str(&fmt(w / std::f64::consts::TAU));
        out.push(',');
        out.push_str(&fmt(*d));
        out.push('\n');
    }
    out
}

/// Complex response as CSV, one row per frequency.
pub fn complex_spectrum_csv(
    manifest: &RunManifest,
    freqs_hz: &[f64],
    values: &[Complex64],
) -> String {
    let mut out = schema_line("response");
    out.push_str(&manifest.comment_block());
    out.push_str("frequency_Hz,real,imag,magnitude,phase_rad\n");
    for (f, v) in freqs_hz.iter().zip(values) {
        for (i, col) in [*f, v.re, v.im, v.norm(), v.arg()].iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&fmt(*col));
        }
        out.push('\n');
    }
    out
}

/// Time record as CSV.
pub fn waveform_csv(manifest: &RunManifest, wf: &Waveform) -> String {
    let mut out = schema_line("waveform");
    out.push_str(&manifest.comment_block());
    out.push_str("t_s,re,im\n");
    for (i, s) in wf.samples.iter().enumerate() {
        out.push_str(&fmt(wf.time_at(i)));
        out.push(',');
        out.push_str(&fmt(s.re));
        out.push(',');
        out.push_str(&fmt(s.im));
        out.push('\n');
    }
    out
}

/// Calibration sweep as CSV, the same shape `read_calibration_csv`
/// accepts.
pub fn calibration_csv(manifest: &RunManifest, rows: &[(f64, f64, f64)]) -> String {
    let mut out = schema_line("calibration");
    out.push_str(&manifest.comment_block());
    out.push_str("power_dbm,value,sigma\n");
    for (p, v, s) in rows {
        out.push_str(&fmt(*p));
        out.push(',');
        out.push_str(&fmt(*v));
        out.push(',');
        out.push_str(&fmt(*s));
        out.push('\n');
    }
    out
}

/// Parameter sweep in long format: one row per (axis value, metric).
pub fn sweep_csv(manifest: &RunManifest, axis: &str, rows: &[(f64, String, f64)]) -> String {
    let mut out = schema_line("sweep");
    out.push_str(&manifest.comment_block());
    out.push_str(&format!("# axis: {axis}\n"));
    out.push_str("axis_value,metric,value\n");
    for (x, metric, y) in rows {
        out.push_str(&fmt(*x));
        out.push(',');
        out.push_str(metric);
        out.push(',');
        out.push_str(&fmt(*y));
        out.push('\n');
    }
    out
}

/// Wrap a JSON payload with the run manifest and render it
/// deterministically (serde_json orders object keys).
pub fn json_report(manifest: &RunManifest, payload: serde_json::Value) -> String {
    let mut root = serde_json::Map::new();
    root.insert("manifest".into(), serde_json::to_value(manifest).expect("manifest serializes"));
    if let serde_json::Value::Object(map) = payload {
        for (k, v) in map {
            root.insert(k, v);
        }
    } else {
        root.insert("result".into(), payload);
    }
    let mut text = serde_json::to_string_pretty(&serde_json::Value::Object(root))
        .expect("report serializes");
    text.push('\n');
    text
}

/// Split a file into (version, kind, remaining lines with their 1-based
/// numbers), enforcing the schema line and skipping comments.
fn parse_schema<'a>(
    text: &'a str,
    expected_kind: &'static str,
) -> Result<Vec<(usize, &'a str)>, ReportError> {
    let mut lines = text.lines().enumerate();
    let (_, first) = lines.next().ok_or(ReportError::Empty)?;
    let rest = first
        .strip_prefix("# emo-csv ")
        .ok_or_else(|| ReportError::BadSchema { got: first.chars().take(60).collect() })?;
    let mut parts = rest.split_whitespace();
    let version = parts.next().unwrap_or("");
    let kind = parts.next().unwrap_or("");
    if version != CSV_VERSION.to_string() {
        return Err(ReportError::UnsupportedVersion { found: version.to_string() });
    }
    if kind != expected_kind {
        return Err(ReportError::WrongKind { expected: expected_kind, found: kind.to_string() });
    }
    Ok(lines
        .filter(|(_, l)| !l.trim_start().starts_with('#') && !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l))
        .collect())
}

fn expect_header(
    rows: &[(usize, &str)],
    expected: &'static str,
) -> Result<(), ReportError> {
    match rows.first() {
        Some((line, got)) if got.trim() != expected => Err(ReportError::BadHeader {
            line: *line,
            expected,
            got: got.chars().take(60).collect(),
        }),
        Some(_) => Ok(()),
        None => Err(ReportError::Empty),
    }
}

fn parse_floats<const N: usize>(line_no: usize, line: &str) -> Result<[f64; N], ReportError> {
    let mut out = [0.0; N];
    let mut fields = line.split(',');
    for (i, slot) in out.iter_mut().enumerate() {
        let field = fields.next().ok_or_else(|| ReportError::BadRow {
            line: line_no,
            message: format!("expected {N} fields, got {i}"),
        })?;
        *slot = field.trim().parse().map_err(|_| ReportError::BadRow {
            line: line_no,
            message: format!("field {} is not a number: {:?}", i + 1, field.chars().take(40).collect::<String>()),
        })?;
    }
    if fields.next().is_some() {
        return Err(ReportError::BadRow {
            line: line_no,
            message: format!("expected exactly {N} fields"),
        });
    }
    Ok(out)
}

/// Read a calibration sweep: rows of (power dBm, value, sigma).
pub fn read_calibration_csv(text: &str) -> Result<Vec<(f64, f64, f64)>, ReportError> {
    let rows = parse_schema(text, "calibration")?;
    expect_header(&rows, "power_dbm,value,sigma")?;
    let mut out = Vec::with_capacity(rows.len().saturating_sub(1));
    for (line, row) in &rows[1..] {
        let [p, v, s] = parse_floats::<3>(*line, row)?;
        out.push((p, v, s));
    }
    if out.is_empty() {
        return Err(ReportError::Empty);
    }
    Ok(out)
}

/// Read a time record back, rebuilding the uniform grid and rejecting
/// files whose sample times drift off it.
pub fn read_waveform_csv(text: &str) -> Result<Waveform, ReportError> {
    let rows = parse_schema(text, "waveform")?;
    expect_header(&rows, "t_s,re,im")?;
    let data = &rows[1..];
    if data.len() < 2 {
        return Err(ReportError::Empty);
    }
    let mut times = Vec::with_capacity(data.len());
    let mut samples = Vec::with_capacity(data.len());
    for (line, row) in data {
        let [t, re, im] = parse_floats::<3>(*line, row)?;
        times.push((*line, t));
        samples.push(Complex64::new(re, im));
    }
    let t0 = times[0].1;
    let dt = times[1].1 - t0;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(ReportError::NonUniformSampling { line: times[1].0 });
    }
    for (i, (line, t)) in times.iter().enumerate() {
        let expected = t0 + i as f64 * dt;
        if !((t - expected).abs() <= 1e-3 * dt) {
            return Err(ReportError::NonUniformSampling { line: *line });
        }
    }
    Ok(Waveform { t0, dt, samples })
}

/// Budget as an aligned text table, quanta and kelvin side by side.
pub fn budget_table(quanta: &crate::noise::NoiseBudget, kelvin: &crate::noise::NoiseBudget) -> String {
    let mut out = String::from("term       quanta          kelvin\n");
    let rows = [
        ("shot", quanta.shot, kelvin.shot),
        ("brownian", quanta.brownian, kelvin.brownian),
        ("johnson", quanta.johnson, kelvin.johnson),
        ("phase", quanta.phase, kelvin.phase),
        ("total", quanta.total(), kelvin.total()),
    ];
    for (name, q, k) in rows {
        out.push_str(&format!("{name:<10} {q:<15.6e} {k:<15.6e}\n"));
    }
    out
}
