//! Conversion between laboratory SI quantities and the dimensionless model.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant, J s (CODATA 2018, exact).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Unified atomic mass unit, kg (CODATA 2018).
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value })
    }
}

/// Mass, dimensional kick strength, and kick period of the lab setup.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// kg
    pub mass: f64,
    /// m^2/s
    pub lambda: f64,
    /// s
    pub period: f64,
    /// J s
    pub hbar: f64,
}

impl PhysicalParams {
    pub fn new(mass: f64, lambda: f64, period: f64) -> Result<Self> {
        let p = Self {
            mass,
            lambda,
            period,
            hbar: HBAR,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        positive("mass", self.mass)?;
        positive("lambda", self.lambda)?;
        positive("period", self.period)?;
        positive("hbar", self.hbar)
    }
}

/// Inputs of the quasi-1D estimate for the kick strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentalParams {
    pub atom_count: f64,
    /// m
    pub scattering_length: f64,
    /// m
    pub transverse_length: f64,
    /// s
    pub kick_duration: f64,
}

impl ExperimentalParams {
    pub fn validate(&self) -> Result<()> {
        positive("atom_count", self.atom_count)?;
        positive("scattering_length", self.scattering_length)?;
        positive("transverse_length", self.transverse_length)?;
        positive("kick_duration", self.kick_duration)
    }
}

/// `m lambda^2 / (hbar T)`.
pub fn epsilon_from_physical(p: &PhysicalParams) -> Result<f64> {
    p.validate()?;
    Ok(p.mass * p.lambda * p.lambda / (p.hbar * p.period))
}

/// `2 N hbar a_s dt / (m a_perp^2)`, an approximate kick strength in m^2/s.
pub fn lambda_from_experiment(e: &ExperimentalParams, mass: f64) -> Result<f64> {
    e.validate()?;
    positive("mass", mass)?;
    Ok(2.0 * e.atom_count * HBAR * e.scattering_length * e.kick_duration
        / (mass * e.transverse_length * e.transverse_length))
}

/// Kick duration as a fraction of the period, used as the smoothing width
/// of the pulsed model.
pub fn duty_fraction(e: &ExperimentalParams, p: &PhysicalParams) -> Result<f64> {
    e.validate()?;
    p.validate()?;
    Ok(e.kick_duration / p.period)
}

/// Linear maps between lab coordinates and model coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scaling {
    /// model x per metre
    pub x: f64,
    /// model t per second
    pub t: f64,
    /// model amplitude per (m^{-1/2})
    pub psi: f64,
}

impl Scaling {
    pub fn new(p: &PhysicalParams) -> Result<Self> {
        p.validate()?;
        let x = p.mass * p.lambda / (p.hbar * p.period);
        let t = p.mass * p.lambda * p.lambda / (p.hbar * p.period * p.period);
        Ok(Self {
            x,
            t,
            psi: x.recip().sqrt(),
        })
    }

    /// `(x, t, psi)` in model units from lab values.
    pub fn rescale(&self, x_phys: f64, t_phys: f64, psi_phys: f64) -> (f64, f64, f64) {
        (self.x * x_phys, self.t * t_phys, self.psi * psi_phys)
    }

    pub fn inverse(&self, x: f64, t: f64, psi: f64) -> (f64, f64, f64) {
        (x / self.x, t / self.t, psi / self.psi)
    }
}

/// A float with an SI unit tag, e.g. `"10 nm"`, `"7.016 u"`, `"5ms"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity {
    /// Value converted to SI.
    pub si: f64,
    pub dimension: Dimension,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimension {
    Mass,
    Length,
    Time,
    Diffusivity,
    Dimensionless,
}

fn unit_factor(tag: &str) -> Option<(f64, Dimension)> {
    use Dimension::*;
    Some(match tag {
        "" => (1.0, Dimensionless),
        "kg" => (1.0, Mass),
        "u" | "Da" => (ATOMIC_MASS_UNIT, Mass),
        "m" => (1.0, Length),
        "mm" => (1e-3, Length),
        "um" | "μm" | "µm" => (1e-6, Length),
        "nm" => (1e-9, Length),
        "s" => (1.0, Time),
        "ms" => (1e-3, Time),
        "us" | "μs" | "µs" => (1e-6, Time),
        "ns" => (1e-9, Time),
        "m^2/s" | "m2/s" => (1.0, Diffusivity),
        _ => return None,
    })
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let split = s
            .char_indices()
            .find(|&(i, c)| {
                !(c.is_ascii_digit()
                    || c == '.'
                    || c == '+'
                    || c == '-'
                    || ((c == 'e' || c == 'E')
                        && s[i + 1..].starts_with(|n: char| n.is_ascii_digit() || n == '-' || n == '+')))
            })
            .map_or(s.len(), |(i, _)| i);
        let (num, tag) = s.split_at(split);
        let value: f64 = num
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad number in quantity '{s}'")))?;
        let (factor, dimension) =
            unit_factor(tag.trim()).ok_or_else(|| Error::Parse(format!("unknown unit in '{s}'")))?;
        Ok(Self {
            si: value * factor,
            dimension,
        })
    }
}

impl Quantity {
    /// Parses `s` and requires the given dimension.
    pub fn parse_as(s: &str, dimension: Dimension) -> Result<f64> {
        let q: Quantity = s.parse()?;
        if q.dimension != dimension {
            return Err(Error::Parse(format!(
                "'{s}' has dimension {:?}, expected {dimension:?}",
                q.dimension
            )));
        }
        Ok(q.si)
    }
}
