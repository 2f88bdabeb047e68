//! Complex samples of a wave function on a [`Grid`] and the spectral
//! primitives every other module builds on.
//!
//! Integrals are plain Riemann sums with weight `dx`, which is spectrally
//! accurate for periodic, rapidly decaying integrands.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// First and second centred moments of the normalized density `|psi|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

impl Moments {
    pub fn width(&self) -> f64 {
        self.variance.sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct WaveFunction {
    grid: Grid,
    values: Vec<Complex64>,
}

impl WaveFunction {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::LengthMismatch {
                expected: grid.n_points(),
                found: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at every grid point.
    pub fn from_fn<F>(grid: &Grid, f: F) -> Self
    where
        F: Fn(f64) -> Complex64,
    {
        let values = grid.x().iter().map(|&x| f(x)).collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    /// Samples a real-valued `f`.
    pub fn from_real_fn<F>(grid: &Grid, f: F) -> Self
    where
        F: Fn(f64) -> f64,
    {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![Complex64::new(0.0, 0.0); grid.n_points()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// `|psi_j|^2` at every grid point.
    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|c| c.norm_sqr()).collect()
    }

    /// `sum |psi|^2 dx`.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        self.map(|_, c| c * factor)
    }

    /// Applies `f(x_j, psi_j)` pointwise.
    pub fn map<F>(&self, f: F) -> Self
    where
        F: Fn(f64, Complex64) -> Complex64,
    {
        let values = self
            .grid
            .x()
            .iter()
            .zip(&self.values)
            .map(|(&x, &c)| f(x, c))
            .collect();
        Self {
            grid: self.grid.clone(),
            values,
        }
    }

    fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// `sum conj(self) other dx`.
    pub fn inner_product(&self, other: &Self) -> Result<Complex64> {
        self.check_same_grid(other)?;
        let sum: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(sum * self.grid.dx())
    }

    /// L2 norm of `self - other`.
    pub fn l2_distance(&self, other: &Self) -> Result<f64> {
        self.check_same_grid(other)?;
        let sum: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok((sum * self.grid.dx()).sqrt())
    }

    /// `min_theta || self - e^{i theta} other ||`.
    pub fn phase_removed_distance(&self, other: &Self) -> Result<f64> {
        let overlap = self.inner_product(other)?.norm();
        let d2 = self.norm_sq() + other.norm_sq() - 2.0 * overlap;
        Ok(d2.max(0.0).sqrt())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            grid: self.grid.clone(),
            values,
        })
    }

    /// Mean and variance of position under `|psi|^2 / norm_sq`.
    pub fn moments(&self) -> Result<Moments> {
        let x = self.grid.x();
        let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for (&xj, c) in x.iter().zip(&self.values) {
            let d = c.norm_sqr();
            m0 += d;
            m1 += d * xj;
            m2 += d * xj * xj;
        }
        if m0 == 0.0 || !m0.is_finite() {
            return Err(Error::ZeroNorm);
        }
        let mean = m1 / m0;
        let variance = (m2 / m0 - mean * mean).max(0.0);
        Ok(Moments { mean, variance })
    }

    /// Standard deviation of position, `sqrt(<x^2> - <x>^2)`.
    pub fn width(&self) -> Result<f64> {
        Ok(self.moments()?.width())
    }

    /// Index of the largest `|psi_j|`.
    pub fn peak_index(&self) -> usize {
        self.values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (j, c)| {
                let d = c.norm_sqr();
                if d > best.1 {
                    (j, d)
                } else {
                    best
                }
            })
            .0
    }

    /// Returns a copy with `multiplier(k)` applied to every momentum mode.
    pub fn spectral_map<F>(&self, multiplier: F) -> Self
    where
        F: Fn(f64) -> Complex64,
    {
        let mut values = self.values.clone();
        self.grid.apply_spectral(&mut values, multiplier);
        Self {
            grid: self.grid.clone(),
            values,
        }
    }

    /// Momentum-space amplitudes in FFT order (unnormalized DFT).
    pub fn spectrum(&self) -> Vec<Complex64> {
        let mut buf = self.values.clone();
        self.grid.forward(&mut buf);
        buf
    }

    /// Derivative of the given order via multiplication by `(ik)^order`.
    ///
    /// For odd orders the Nyquist mode is dropped so that real input stays
    /// real.
    pub fn spectral_derivative(&self, order: u32) -> Result<Self> {
        if !matches!(order, 1 | 2 | 4) {
            return Err(Error::UnsupportedDerivativeOrder(order));
        }
        let nyquist = -std::f64::consts::PI / self.grid.dx();
        Ok(self.spectral_map(|k| {
            if order % 2 == 1 && k == nyquist {
                return Complex64::new(0.0, 0.0);
            }
            Complex64::new(0.0, k).powu(order)
        }))
    }

    /// Exact periodic translation by `shift`: `psi(x) -> psi(x - shift)`.
    pub fn translate(&self, shift: f64) -> Self {
        if shift == 0.0 {
            return self.clone();
        }
        self.spectral_map(|k| Complex64::from_polar(1.0, -k * shift))
    }

    /// Multiplies by the plane wave `e^{ivx}`.
    pub fn boost(&self, v: f64) -> Self {
        if v == 0.0 {
            return self.clone();
        }
        self.map(|x, c| c * Complex64::from_polar(1.0, v * x))
    }
}
