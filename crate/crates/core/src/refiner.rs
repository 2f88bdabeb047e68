//! Numerical solution of the stationary fixed-point problem
//! `U0^eps phi = phi e^{i eps (alpha - |phi|^2)}` beyond perturbation
//! theory.
//!
//! Each iteration re-extracts `alpha` from `<phi, U phi>`, forms the damped
//! Picard update toward `e^{-i alpha eps} U phi`, renormalizes, and fixes
//! the global phase. Two optional accelerators sit on top of the plain
//! scheme:
//!
//! * a diagonal spectral preconditioner that divides mode `k` of the update
//!   by `1 - e^{-i theta_k}`, `theta_k = eps (k^2/2 + alpha)`, the exact
//!   inverse of the linearized free part. Without it, long-wavelength
//!   continuum modes contract by only `1 - O(eps^2)` per step;
//! * Anderson mixing over the last few iterates.
//!
//! Non-convergence is reported, not raised.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagator::{free_step, kicked_step, KickModel};
use crate::wavefunction::WaveFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseConvention {
    /// Rotate so the value at the density maximum is real and positive.
    PeakRealPositive,
    /// Rotate so the overlap with the seed is real and positive.
    ProjectionAligned,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Preconditioner {
    /// Scalar mixing only.
    None,
    /// Per-mode division by `1 - e^{-i theta_k}`; the magnitude of the
    /// divisor is held at or above `floor` near Floquet resonances.
    Spectral { floor: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinerOptions {
    pub max_iters: usize,
    pub mixing: f64,
    pub tol: f64,
    pub phase_convention: PhaseConvention,
    pub preconditioner: Preconditioner,
    /// Number of past differences used by Anderson mixing; 0 disables it.
    pub anderson_depth: usize,
}

impl Default for RefinerOptions {
    fn default() -> Self {
        Self {
            max_iters: 500,
            mixing: 0.5,
            tol: 1e-10,
            phase_convention: PhaseConvention::PeakRealPositive,
            preconditioner: Preconditioner::Spectral { floor: 0.1 },
            anderson_depth: 10,
        }
    }
}

impl RefinerOptions {
    /// The unaccelerated damped Picard iteration.
    pub fn plain_picard() -> Self {
        Self {
            preconditioner: Preconditioner::None,
            anderson_depth: 0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidParameter {
                name: "tol",
                value: self.tol,
            });
        }
        if !(self.mixing > 0.0 && self.mixing <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "mixing",
                value: self.mixing,
            });
        }
        if let Preconditioner::Spectral { floor } = self.preconditioner {
            if !(floor.is_finite() && floor > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "floor",
                    value: floor,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinerReport {
    pub epsilon: f64,
    pub iterations: usize,
    pub final_residual: f64,
    pub alpha: f64,
    pub converged: bool,
    pub residual_history: Vec<f64>,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    Ok(())
}

/// `alpha = arg <wf, U wf> / eps` on the principal branch.
pub fn extract_alpha(wf: &WaveFunction, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    let next = kicked_step(wf, epsilon, KickModel::Instantaneous)?;
    Ok(wf.inner_product(&next)?.arg() / epsilon)
}

/// `|| U0^eps wf - wf e^{i eps (alpha - |wf|^2)} ||`.
pub fn fixed_point_residual(wf: &WaveFunction, alpha: f64, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    let lhs = free_step(wf, epsilon);
    let sum: f64 = lhs
        .values()
        .iter()
        .zip(wf.values())
        .map(|(l, c)| (l - c * Complex64::from_polar(1.0, epsilon * (alpha - c.norm_sqr()))).norm_sqr())
        .sum();
    Ok((sum * wf.grid().dx()).sqrt())
}

/// Fixes the global phase of `wf`. `reference` is only consulted by
/// [`PhaseConvention::ProjectionAligned`].
pub fn apply_phase_convention(
    wf: &WaveFunction,
    convention: PhaseConvention,
    reference: &WaveFunction,
) -> Result<WaveFunction> {
    let anchor = match convention {
        PhaseConvention::PeakRealPositive => wf.values()[wf.peak_index()],
        PhaseConvention::ProjectionAligned => reference.inner_product(wf)?,
    };
    if anchor.norm() == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let arg = anchor.arg();
    if arg == 0.0 {
        return Ok(wf.clone());
    }
    Ok(wf.scaled(Complex64::from_polar(1.0, -arg)))
}

/// Stores the last `depth + 1` iterates and their Picard increments as real
/// vectors and extrapolates by least squares.
struct Anderson {
    depth: usize,
    xs: Vec<Vec<f64>>,
    fs: Vec<Vec<f64>>,
}

impl Anderson {
    fn new(depth: usize) -> Self {
        Self {
            depth,
            xs: Vec::new(),
            fs: Vec::new(),
        }
    }

    fn reset(&mut self) {
        self.xs.clear();
        self.fs.clear();
    }

    /// Given the current iterate `x` and its Picard image `g`, returns the
    /// mixed next iterate.
    fn next(&mut self, x: Vec<f64>, g: Vec<f64>) -> Vec<f64> {
        let f: Vec<f64> = g.iter().zip(&x).map(|(a, b)| a - b).collect();
        self.xs.push(x);
        self.fs.push(f);
        if self.xs.len() > self.depth + 1 {
            self.xs.remove(0);
            self.fs.remove(0);
        }
        let m = self.xs.len() - 1;
        if m == 0 {
            return g;
        }

        let rows = g.len();
        let df = DMatrix::from_fn(rows, m, |r, c| self.fs[c + 1][r] - self.fs[c][r]);
        let f_k = self.fs.last().expect("history is non-empty");
        let rhs = DVector::from_column_slice(f_k);
        let gamma = match df.svd(true, true).solve(&rhs, 1e-14) {
            Ok(gamma) => gamma,
            Err(_) => {
                self.reset();
                return g;
            }
        };

        let x_k = self.xs.last().expect("history is non-empty");
        let mut out: Vec<f64> = x_k.iter().zip(f_k).map(|(x, f)| x + f).collect();
        for (c, &gc) in gamma.iter().enumerate() {
            for (r, o) in out.iter_mut().enumerate() {
                let dx = self.xs[c + 1][r] - self.xs[c][r];
                let dfv = self.fs[c + 1][r] - self.fs[c][r];
                *o -= gc * (dx + dfv);
            }
        }
        out
    }
}

fn to_real(wf: &WaveFunction) -> Vec<f64> {
    let v = wf.values();
    v.iter().map(|c| c.re).chain(v.iter().map(|c| c.im)).collect()
}

fn from_real(template: &WaveFunction, flat: &[f64]) -> WaveFunction {
    let n = template.grid().n_points();
    let values = (0..n).map(|j| Complex64::new(flat[j], flat[n + j])).collect();
    WaveFunction::new(template.grid().clone(), values).expect("length preserved")
}

/// Iterates from `seed` toward a normalized stationary stroboscopic soliton.
pub fn find_fixed_point(
    epsilon: f64,
    seed: &WaveFunction,
    opts: &RefinerOptions,
) -> Result<(WaveFunction, RefinerReport)> {
    check_epsilon(epsilon)?;
    opts.validate()?;

    let reference = seed.normalized()?;
    let conform = |wf: &WaveFunction| -> Result<WaveFunction> {
        apply_phase_convention(&wf.normalized()?, opts.phase_convention, &reference)
    };

    let mut phi = conform(&reference)?;
    let mut history = Vec::new();
    let mut anderson = Anderson::new(opts.anderson_depth);
    let mut best = f64::INFINITY;

    let mut iterations = 0;
    loop {
        let alpha = extract_alpha(&phi, epsilon)?;
        let residual = fixed_point_residual(&phi, alpha, epsilon)?;
        history.push(residual);

        if residual <= opts.tol || iterations >= opts.max_iters || !residual.is_finite() {
            let report = RefinerReport {
                epsilon,
                iterations,
                final_residual: residual,
                alpha,
                converged: residual <= opts.tol,
                residual_history: history,
            };
            return Ok((phi, report));
        }

        // Restart acceleration when an extrapolated step made things much
        // worse than the best iterate so far.
        if residual > 10.0 * best {
            anderson.reset();
        }
        best = best.min(residual);

        let target = kicked_step(&phi, epsilon, KickModel::Instantaneous)?
            .scaled(Complex64::from_polar(1.0, -alpha * epsilon));
        let mut update: Vec<Complex64> = target
            .values()
            .iter()
            .zip(phi.values())
            .map(|(t, p)| t - p)
            .collect();

        if let Preconditioner::Spectral { floor } = opts.preconditioner {
            phi.grid().apply_spectral(&mut update, |k| {
                let theta = epsilon * (0.5 * k * k + alpha);
                let mut den = Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -theta);
                if den.norm() < floor {
                    den = Complex64::from_polar(floor, den.arg());
                }
                den.inv()
            });
        }

        let picard: Vec<Complex64> = phi
            .values()
            .iter()
            .zip(&update)
            .map(|(p, u)| p + opts.mixing * u)
            .collect();
        let picard = conform(&WaveFunction::new(phi.grid().clone(), picard)?)?;

        phi = if opts.anderson_depth > 0 {
            let mixed = anderson.next(to_real(&phi), to_real(&picard));
            conform(&from_real(&phi, &mixed))?
        } else {
            picard
        };
        iterations += 1;
    }
}
