//! Unit strings accepted in trace files and their conversion to SI.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dimension {
    Temperature,
    Resistance,
    Current,
    Voltage,
    Frequency,
    Time,
    Length,
    Power,
    Exposure,
    CurrentDensity,
    Dimensionless,
}

impl Dimension {
    /// Unit written for SI values.
    pub fn si_unit(self) -> &'static str {
        match self {
            Dimension::Temperature => "K",
            Dimension::Resistance => "ohm",
            Dimension::Current => "A",
            Dimension::Voltage => "V",
            Dimension::Frequency => "Hz",
            Dimension::Time => "s",
            Dimension::Length => "m",
            Dimension::Power => "W",
            Dimension::Exposure => "Pa_s",
            Dimension::CurrentDensity => "A_m2",
            Dimension::Dimensionless => "",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Conversion {
    Scale(f64),
    /// Decibels relative to 1 mW.
    Dbm,
}

const TORR: f64 = 101_325.0 / 760.0;

fn lookup(dim: Dimension, unit: &str) -> Option<Conversion> {
    use Conversion::Scale;
    use Dimension::*;
    let u = unit.replace('µ', "u").replace('Ω', "ohm");
    let c = match (dim, u.as_str()) {
        (Temperature, "K") => Scale(1.0),
        (Temperature, "mK") => Scale(1e-3),
        (Temperature, "uK") => Scale(1e-6),
        (Resistance, "ohm" | "Ohm") => Scale(1.0),
        (Resistance, "mohm" | "mOhm") => Scale(1e-3),
        (Resistance, "kohm" | "kOhm") => Scale(1e3),
        (Resistance, "Mohm" | "MOhm") => Scale(1e6),
        (Current, "A") => Scale(1.0),
        (Current, "mA") => Scale(1e-3),
        (Current, "uA") => Scale(1e-6),
        (Current, "nA") => Scale(1e-9),
        (Current, "pA") => Scale(1e-12),
        (Voltage, "V") => Scale(1.0),
        (Voltage, "mV") => Scale(1e-3),
        (Voltage, "uV") => Scale(1e-6),
        (Voltage, "nV") => Scale(1e-9),
        (Frequency, "Hz") => Scale(1.0),
        (Frequency, "kHz") => Scale(1e3),
        (Frequency, "MHz") => Scale(1e6),
        (Frequency, "GHz") => Scale(1e9),
        (Time, "s") => Scale(1.0),
        (Time, "ms") => Scale(1e-3),
        (Time, "us") => Scale(1e-6),
        (Time, "ns") => Scale(1e-9),
        (Time, "min") => Scale(60.0),
        (Time, "h") => Scale(3600.0),
        (Length, "m") => Scale(1.0),
        (Length, "mm") => Scale(1e-3),
        (Length, "um") => Scale(1e-6),
        (Length, "nm") => Scale(1e-9),
        (Power, "W") => Scale(1.0),
        (Power, "mW") => Scale(1e-3),
        (Power, "uW") => Scale(1e-6),
        (Power, "nW") => Scale(1e-9),
        (Power, "pW") => Scale(1e-12),
        (Power, "fW") => Scale(1e-15),
        (Power, "aW") => Scale(1e-18),
        (Power, "dBm") => Conversion::Dbm,
        (Exposure, "Pa_s" | "Pa*s" | "Pa.s") => Scale(1.0),
        (Exposure, "Torr_s" | "Torr*s") => Scale(TORR),
        (Exposure, "mTorr_s" | "mTorr*s") => Scale(1e-3 * TORR),
        (Exposure, "Torr_min") => Scale(60.0 * TORR),
        (Exposure, "mTorr_min") => Scale(60e-3 * TORR),
        (CurrentDensity, "A_m2" | "A/m2" | "A/m^2") => Scale(1.0),
        (CurrentDensity, "A_cm2" | "A/cm2" | "A/cm^2") => Scale(1e4),
        (CurrentDensity, "kA_cm2" | "kA/cm2" | "kA/cm^2") => Scale(1e7),
        (CurrentDensity, "uA_um2" | "uA/um2") => Scale(1e6),
        (Dimensionless, "" | "1" | "ratio") => Scale(1.0),
        _ => return None,
    };
    Some(c)
}

/// Converter from values in `unit` to SI for the given dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitConverter(Conversion);

impl UnitConverter {
    pub fn new(dim: Dimension, unit: &str) -> Result<Self> {
        lookup(dim, unit.trim())
            .map(UnitConverter)
            .ok_or_else(|| Error::Unit(unit.trim().to_string()))
    }

    pub fn si() -> Self {
        UnitConverter(Conversion::Scale(1.0))
    }

    pub fn to_si(&self, v: f64) -> f64 {
        match self.0 {
            Conversion::Scale(1.0) => v,
            Conversion::Scale(s) => v * s,
            Conversion::Dbm => 1e-3 * 10f64.powf(v / 10.0),
        }
    }
}

/// Parses `"<number> [unit]"` into SI.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64> {
    let text = text.trim();
    let (num, unit) = match text.find(char::is_whitespace) {
        Some(i) => (&text[..i], text[i..].trim()),
        None => (text, ""),
    };
    let v: f64 = num
        .parse()
        .map_err(|_| Error::Schema(format!("`{text}` is not a number with an optional unit")))?;
    let conv = if unit.is_empty() {
        UnitConverter::si()
    } else {
        UnitConverter::new(dim, unit)?
    };
    Ok(conv.to_si(v))
}
