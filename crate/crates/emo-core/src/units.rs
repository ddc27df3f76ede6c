//! Unit-safe wrappers for the two quantities that cause the most grief in
//! this domain: frequencies (factor-of-2π bugs) and rf powers (dBm vs W).

use crate::constants::TAU;

/// An angular frequency.
///
/// Carries both the ordinary-frequency and the angular value so that
/// `from_hz(f).hz() == f` is exact; `(f * 2π) / 2π` loses the last bit for
/// roughly one value in seven. All physics code consumes [`rad_per_sec`],
/// the conversion from Hz happens exactly once, in the constructor.
///
/// [`rad_per_sec`]: AngularFrequency::rad_per_sec
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularFrequency {
    hz: f64,
    rad: f64,
}

impl AngularFrequency {
    /// From ordinary frequency in Hz. Negative or non-finite input is a
    /// caller bug; this type only represents physical mode frequencies.
    pub fn from_hz(hz: f64) -> Self {
        assert!(hz.is_finite() && hz >= 0.0, "frequency must be finite and >= 0, got {hz}");
        Self { hz, rad: hz * TAU }
    }

    /// From an angular frequency in rad/s.
    pub fn from_rad_per_sec(rad: f64) -> Self {
        assert!(rad.is_finite() && rad >= 0.0, "frequency must be finite and >= 0, got {rad}");
        Self { hz: rad / TAU, rad }
    }

    /// Ordinary frequency in Hz (exact round trip with [`Self::from_hz`]).
    pub fn hz(&self) -> f64 {
        self.hz
    }

    /// Angular frequency in rad/s.
    pub fn rad_per_sec(&self) -> f64 {
        self.rad
    }
}

/// An rf or optical power, stored in watts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLevel {
    watts: f64,
}

impl PowerLevel {
    pub fn from_watts(watts: f64) -> Self {
        assert!(watts.is_finite() && watts > 0.0, "power must be finite and > 0, got {watts} W");
        Self { watts }
    }

    pub fn from_dbm(dbm: f64) -> Self {
        Self::from_watts(dbm_to_watts(dbm))
    }

    pub fn watts(&self) -> f64 {
        self.watts
    }

    pub fn dbm(&self) -> f64 {
        watts_to_dbm(self.watts)
    }
}

/// dBm → W: P = 1 mW · 10^(p/10).
pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

/// W → dBm, inverse of [`dbm_to_watts`].
pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts / 1e-3).log10()
}
