//! Uniform periodic lattice in the dimensionless coordinate `x` and its
//! paired momentum lattice.
//!
//! Points sit at `x_j = -L/2 + j dx`, so `x = 0` is the grid midpoint and a
//! lattice point. Momenta are stored in FFT order, `k_j = j dk` for
//! `j < N/2` and `(j - N) dk` otherwise, covering `[-pi/dx, pi/dx)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Smallest lattice accepted by [`Grid::new`].
pub const MIN_POINTS: usize = 16;

pub const DEFAULT_POINTS: usize = 2048;
pub const DEFAULT_LENGTH: f64 = 80.0;

/// A periodic spatial grid with cached transform plans.
///
/// Cloning is cheap: coordinates and plans are shared behind `Arc`s and the
/// plans are safe for concurrent use.
#[derive(Clone)]
pub struct Grid {
    n_points: usize,
    length: f64,
    dx: f64,
    x: Arc<[f64]>,
    k: Arc<[f64]>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Grid {
    pub fn new(n_points: usize, length: f64) -> Result<Self> {
        if n_points < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "n_points must be at least {MIN_POINTS}, got {n_points}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "length must be positive and finite, got {length}"
            )));
        }

        let dx = length / n_points as f64;
        let x: Arc<[f64]> = (0..n_points)
            .map(|j| -0.5 * length + j as f64 * dx)
            .collect();
        let dk = 2.0 * PI / length;
        let half = n_points / 2;
        let k: Arc<[f64]> = (0..n_points)
            .map(|j| {
                let m = if j < half { j as f64 } else { j as f64 - n_points as f64 };
                m * dk
            })
            .collect();

        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n_points);
        let inverse = planner.plan_fft_inverse(n_points);

        Ok(Self {
            n_points,
            length,
            dx,
            x,
            k,
            forward,
            inverse,
        })
    }

    /// The default lattice: 2048 points over length 80.
    pub fn standard() -> Self {
        Self::new(DEFAULT_POINTS, DEFAULT_LENGTH).expect("default grid is valid")
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Momentum lattice spacing `2 pi / L`.
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.length
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Momenta in FFT order.
    pub fn k(&self) -> &[f64] {
        &self.k
    }

    /// The grid midpoint, `x = 0`.
    pub fn midpoint(&self) -> f64 {
        0.0
    }

    /// True if `v` is an integer multiple of `dk`, i.e. `e^{ivx}` is
    /// periodic on this grid.
    pub fn is_lattice_momentum(&self, v: f64) -> bool {
        let m = v / self.dk();
        (m - m.round()).abs() < 1e-9
    }

    pub fn nearest_lattice_momentum(&self, v: f64) -> f64 {
        (v / self.dk()).round() * self.dk()
    }

    /// In-place forward transform (unnormalized).
    pub fn forward(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
    }

    /// In-place inverse transform, normalized so that
    /// `inverse(forward(f)) == f`.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
        let scale = 1.0 / self.n_points as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
    }

    /// Transforms `buf` to momentum space, multiplies mode `j` by
    /// `multiplier(k_j)` and transforms back.
    pub fn apply_spectral<F>(&self, buf: &mut [Complex64], multiplier: F)
    where
        F: Fn(f64) -> Complex64,
    {
        self.forward(buf);
        for (c, &k) in buf.iter_mut().zip(self.k.iter()) {
            *c *= multiplier(k);
        }
        self.inverse(buf);
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n_points == other.n_points && self.length == other.length
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n_points", &self.n_points)
            .field("length", &self.length)
            .field("dx", &self.dx)
            .finish()
    }
}
