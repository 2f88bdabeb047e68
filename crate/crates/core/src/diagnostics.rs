//! Fidelity, comoving fidelity, and the fidelity-error and width series
//! derived from a [`Trajectory`].

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::propagator::Trajectory;
use crate::wavefunction::WaveFunction;

/// Negative fidelity errors down to this magnitude are roundoff and clip
/// to zero.
pub const ROUNDOFF_ALLOWANCE: f64 = 1e-10;

/// `|<reference, current>|^2`.
pub fn fidelity(reference: &WaveFunction, current: &WaveFunction) -> Result<f64> {
    Ok(reference.inner_product(current)?.norm_sqr())
}

/// Fidelity against the reference carried along by the classical drift
/// `v t`, using the exact spectral translation.
pub fn comoving_fidelity(
    reference: &WaveFunction,
    current: &WaveFunction,
    v: f64,
    t: f64,
) -> Result<f64> {
    let shift = v * t;
    if shift == 0.0 {
        return fidelity(reference, current);
    }
    fidelity(&reference.translate(shift), current)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub label: String,
}

impl ObservableSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Writes `t,value,label` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,value,label")?;
        for (t, v) in self.times.iter().zip(&self.values) {
            writeln!(out, "{},{},{}", fmt_f64(*t), fmt_f64(*v), self.label)?;
        }
        Ok(())
    }
}

/// Full-precision float formatting shared by every CSV writer:
/// 17 significant digits in scientific notation.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// `(n eps, 1 - F(n eps))` at the kick instants of `traj`, clipped to
/// `[0, 1]`.
pub fn fidelity_error_curve(traj: &Trajectory, label: &str) -> Result<ObservableSeries> {
    if traj.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let (times, values) = traj
        .kick_rows()
        .map(|i| (traj.times[i], (1.0 - traj.fidelities[i]).clamp(0.0, 1.0)))
        .unzip();
    Ok(ObservableSeries {
        times,
        values,
        label: label.to_owned(),
    })
}

/// `(t, sigma(t))` at every recorded row.
pub fn width_curve(traj: &Trajectory, label: &str) -> Result<ObservableSeries> {
    if traj.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    Ok(ObservableSeries {
        times: traj.times.clone(),
        values: traj.widths.clone(),
        label: label.to_owned(),
    })
}
