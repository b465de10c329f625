//! Plain-text trap configuration: one `key = value unit` assignment per
//! line, `#` comments, every key optional with the reference setup as the
//! default.
//!
//! Dimensioned keys require an explicit unit so a bare number can never be
//! misread; the only unitless key is the electrode offset `d`. Frequencies
//! given in hertz multiples are interpreted as ordinary frequencies and
//! converted to angular (multiplied by 2 pi); `rad/s` is taken as given.

use std::path::Path;

use thiserror::Error;

use crate::constants::{ATOMIC_MASS, ELEMENTARY_CHARGE};
use crate::trap::{DriveConfig, IonSpecies, TrapError, TrapGeometry};

/// Reference configuration accepted by the parser, with every key at its
/// default value.
pub const DEFAULT_CONFIG: &str = "\
# ion species
mass = 171 u
charge = 1 e

# electrode geometry
r_o = 512 um
a = 524 um
b_t = 761 um
c = 704 um
d = 0.812

# RF drive
v_rf = 500 V
omega_rf = 35 MHz

# DC electrode voltages
v_ring = 0 V
v_top = 0 V
v_bottom = 0 V
";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Invalid(#[from] TrapError),
}

/// Species, geometry, and drive resolved from a configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapSetup {
    pub species: IonSpecies,
    pub geometry: TrapGeometry,
    pub drive: DriveConfig,
}

impl Default for TrapSetup {
    fn default() -> Self {
        Self {
            species: IonSpecies::ytterbium_171(),
            geometry: TrapGeometry::default(),
            drive: DriveConfig::default(),
        }
    }
}

impl TrapSetup {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        parse_config(&text)
    }
}

const KEYS: [&str; 12] = [
    "mass", "charge", "r_o", "a", "b_t", "c", "d", "v_rf", "omega_rf", "v_ring", "v_top",
    "v_bottom",
];

fn err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Parse {
        line,
        message: message.into(),
    }
}

/// Parsed magnitude converted to SI by the key's unit family.
fn convert(line: usize, key: &str, value: f64, unit: Option<&str>) -> Result<f64, ConfigError> {
    let unit_err = |expected: &str| {
        err(
            line,
            format!(
                "key `{key}` takes a unit in {{{expected}}}, got `{}`",
                unit.unwrap_or("")
            ),
        )
    };
    match key {
        "mass" => match unit {
            Some("u") => Ok(value * ATOMIC_MASS),
            Some("kg") => Ok(value),
            _ => Err(unit_err("u, kg")),
        },
        "charge" => match unit {
            Some("e") => Ok(value * ELEMENTARY_CHARGE),
            Some("C") => Ok(value),
            _ => Err(unit_err("e, C")),
        },
        // submultiples divide by the exact power of ten so `524 um` lands on
        // the same bits as the literal 524e-6
        "r_o" | "a" | "b_t" | "c" => match unit {
            Some("m") => Ok(value),
            Some("mm") => Ok(value / 1e3),
            Some("um") => Ok(value / 1e6),
            Some("nm") => Ok(value / 1e9),
            _ => Err(unit_err("m, mm, um, nm")),
        },
        "d" => match unit {
            None => Ok(value),
            Some(_) => Err(err(line, "key `d` is unitless")),
        },
        "v_rf" | "v_ring" | "v_top" | "v_bottom" => match unit {
            Some("V") => Ok(value),
            Some("kV") => Ok(value * 1e3),
            Some("mV") => Ok(value / 1e3),
            _ => Err(unit_err("V, kV, mV")),
        },
        "omega_rf" => {
            let two_pi = 2.0 * std::f64::consts::PI;
            match unit {
                Some("rad/s") => Ok(value),
                Some("Hz") => Ok(value * two_pi),
                Some("kHz") => Ok(value * 1e3 * two_pi),
                Some("MHz") => Ok(value * 1e6 * two_pi),
                Some("GHz") => Ok(value * 1e9 * two_pi),
                _ => Err(unit_err("rad/s, Hz, kHz, MHz, GHz")),
            }
        }
        _ => unreachable!("unknown keys are rejected before conversion"),
    }
}

/// Parse a configuration; keys not present fall back to the defaults.
pub fn parse_config(text: &str) -> Result<TrapSetup, ConfigError> {
    let mut values: [Option<f64>; KEYS.len()] = [None; 12];

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, rhs) = content
            .split_once('=')
            .ok_or_else(|| err(line, "expected `key = value [unit]`"))?;
        let key = key.trim();
        let slot = KEYS
            .iter()
            .position(|&k| k == key)
            .ok_or_else(|| err(line, format!("unknown key `{key}`")))?;
        if values[slot].is_some() {
            return Err(err(line, format!("duplicate key `{key}`")));
        }
        let mut parts = rhs.split_whitespace();
        let value: f64 = parts
            .next()
            .ok_or_else(|| err(line, "missing value"))?
            .parse()
            .map_err(|_| err(line, format!("cannot parse `{}` as a number", rhs.trim())))?;
        let unit = parts.next();
        if parts.next().is_some() {
            return Err(err(line, "trailing input after unit"));
        }
        values[slot] = Some(convert(line, key, value, unit)?);
    }

    let get = |key: &str| values[KEYS.iter().position(|&k| k == key).unwrap()];
    let defaults = TrapSetup::default();

    let species = IonSpecies::new(
        get("mass").unwrap_or(defaults.species.mass()),
        get("charge").unwrap_or(defaults.species.charge()),
    )?;
    let geometry = TrapGeometry::new(
        get("r_o").unwrap_or(defaults.geometry.r_o()),
        get("a").unwrap_or(defaults.geometry.a()),
        get("b_t").unwrap_or(defaults.geometry.b_t()),
        get("c").unwrap_or(defaults.geometry.c()),
        get("d").unwrap_or(defaults.geometry.d()),
    )?;
    let drive = DriveConfig::new(
        get("v_rf").unwrap_or(defaults.drive.v_rf()),
        get("omega_rf").unwrap_or(defaults.drive.omega_rf()),
        get("v_ring").unwrap_or(0.0),
        get("v_top").unwrap_or(0.0),
        get("v_bottom").unwrap_or(0.0),
    )?;

    Ok(TrapSetup {
        species,
        geometry,
        drive,
    })
}
