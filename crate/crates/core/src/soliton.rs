//! Closed-form members of the stroboscopic soliton family and residual
//! checks of the small-`eps` perturbation hierarchy.
//!
//! The leading-order profile is `phi0 = sech(x/2) / 2` with `alpha = 1/8`.
//! The first-order correction is `phi1 = mu + i nu` with
//! `mu = A phi0^2 sinh(x/2)` and `nu = B phi0 + phi0^3 / 2`. The normalized
//! approximation used throughout is
//! `(1 + eps^2/120)^{-1/2} (phi0 + i (eps/2) phi0^3)`, i.e. `A = B = 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::Grid;
use crate::wavefunction::WaveFunction;

/// Stationary frequency of the soliton family.
pub const ALPHA: f64 = 0.125;

/// Density standard deviation of the Gaussian that maximizes overlap with
/// `phi0`.
pub const MATCHED_GAUSSIAN_WIDTH: f64 = 1.77;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonParams {
    pub epsilon: f64,
    pub v: f64,
    pub a: f64,
    pub b: f64,
    /// Stationary (comoving) frequency.
    pub alpha: f64,
    /// Lab-frame frequency, `alpha + v^2 / 2`.
    pub omega: f64,
}

impl SolitonParams {
    pub fn new(epsilon: f64, v: f64) -> Self {
        Self {
            epsilon,
            v,
            a: 0.0,
            b: 0.0,
            alpha: ALPHA,
            omega: ALPHA + 0.5 * v * v,
        }
    }
}

fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

fn phi0_at(x: f64) -> f64 {
    0.5 * sech(0.5 * x)
}

/// `phi0^2 sinh(x/2)`, written as `tanh(x/2) sech(x/2) / 4` to stay finite
/// far out in the tails.
fn odd_mode_at(x: f64) -> f64 {
    0.25 * (0.5 * x).tanh() * sech(0.5 * x)
}

/// `sech((x - center)/2) / 2`.
pub fn phi0(grid: &Grid, center: f64) -> WaveFunction {
    WaveFunction::from_real_fn(grid, |x| phi0_at(x - center))
}

/// `mu + i nu` with the general bounded solutions of the first-order
/// equations.
pub fn phi1(grid: &Grid, center: f64, a: f64, b: f64) -> WaveFunction {
    WaveFunction::from_fn(grid, |x| {
        let s = x - center;
        let p = phi0_at(s);
        Complex64::new(a * odd_mode_at(s), b * p + 0.5 * p * p * p)
    })
}

/// `phi0 + i (eps/2) phi0^3`, not normalized.
pub fn first_order_unnormalized(grid: &Grid, epsilon: f64, center: f64) -> WaveFunction {
    WaveFunction::from_fn(grid, |x| {
        let p = phi0_at(x - center);
        Complex64::new(p, 0.5 * epsilon * p * p * p)
    })
}

/// The normalized first-order soliton, boosted to velocity `v`.
pub fn soliton_state(
    grid: &Grid,
    epsilon: f64,
    v: f64,
    center: f64,
) -> (WaveFunction, SolitonParams) {
    let scale = (1.0 + epsilon * epsilon / 120.0).powf(-0.5);
    let wf = first_order_unnormalized(grid, epsilon, center)
        .scaled(Complex64::new(scale, 0.0))
        .boost(v);
    (wf, SolitonParams::new(epsilon, v))
}

/// `phi0 + eps phi1(A, B)` normalized numerically, for sensitivity studies
/// away from `A = B = 0`.
pub fn corrected_state(
    grid: &Grid,
    epsilon: f64,
    center: f64,
    a: f64,
    b: f64,
) -> Result<(WaveFunction, SolitonParams)> {
    let wf = phi0(grid, center)
        .add(&phi1(grid, center, a, b).scaled(Complex64::new(epsilon, 0.0)))?
        .normalized()?;
    let mut params = SolitonParams::new(epsilon, 0.0);
    params.a = a;
    params.b = b;
    Ok((wf, params))
}

/// Normalized real Gaussian whose density has standard deviation `sigma`.
pub fn gaussian(grid: &Grid, center: f64, sigma: f64) -> Result<WaveFunction> {
    WaveFunction::from_real_fn(grid, |x| {
        let s = x - center;
        (-s * s / (4.0 * sigma * sigma)).exp()
    })
    .normalized()
}

/// The Gaussian of width [`MATCHED_GAUSSIAN_WIDTH`].
pub fn matched_gaussian(grid: &Grid, center: f64) -> WaveFunction {
    gaussian(grid, center, MATCHED_GAUSSIAN_WIDTH).expect("matched gaussian fits on any valid grid")
}

/// Golden-section search for the Gaussian width maximizing `|<g, phi0>|^2`
/// on `[lo, hi]`.
pub fn overlap_optimal_width(grid: &Grid, lo: f64, hi: f64) -> Result<f64> {
    let target = phi0(grid, 0.0);
    let overlap = |sigma: f64| -> Result<f64> {
        Ok(gaussian(grid, 0.0, sigma)?.inner_product(&target)?.norm_sqr())
    };
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (overlap(c)?, overlap(d)?);
    while b - a > 1e-10 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = overlap(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = overlap(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// Half-width of the central stencil used by the residual checks.
const STENCIL_HALF_WIDTH: usize = 6;

/// 12th-order central weights for the second derivative, offsets 0..=6.
const STENCIL: [f64; STENCIL_HALF_WIDTH + 1] = [
    -5369.0 / 1800.0,
    12.0 / 7.0,
    -15.0 / 56.0,
    10.0 / 189.0,
    -1.0 / 112.0,
    2.0 / 1925.0,
    -1.0 / 16632.0,
];

/// Second derivative at every point whose stencil stays inside the window.
///
/// The residual checks use a local stencil rather than the spectral
/// derivative: odd profiles such as `mu` take values of opposite sign at
/// the two ends of the window, and the spectral derivative spreads that
/// jump over the whole domain as ringing far above the tolerance.
fn interior_second_derivative(f: &[f64], dx: f64) -> Vec<f64> {
    let m = STENCIL_HALF_WIDTH;
    (m..f.len() - m)
        .map(|j| {
            let mut acc = STENCIL[0] * f[j];
            for (o, w) in STENCIL.iter().enumerate().skip(1) {
                acc += w * (f[j - o] + f[j + o]);
            }
            acc / (dx * dx)
        })
        .collect()
}

/// `sqrt(dx * sum r_j^2)` over interior points, `residual(j, f_xx)`.
fn interior_l2<F>(profile: &[f64], dx: f64, residual: F) -> f64
where
    F: Fn(usize, f64) -> f64,
{
    let d2 = interior_second_derivative(profile, dx);
    let sum: f64 = d2
        .iter()
        .enumerate()
        .map(|(i, &dd)| residual(i + STENCIL_HALF_WIDTH, dd).powi(2))
        .sum();
    (sum * dx).sqrt()
}

/// L2 norm of `-phi0''/2 + (alpha - phi0^2) phi0` over the interior of the
/// window.
pub fn residual_phi0_with_alpha(grid: &Grid, alpha: f64) -> f64 {
    let p: Vec<f64> = grid.x().iter().map(|&x| phi0_at(x)).collect();
    interior_l2(&p, grid.dx(), |j, dd| -0.5 * dd + (alpha - p[j] * p[j]) * p[j])
}

/// Leading-order residual at `alpha = 1/8`.
pub fn residual_phi0(grid: &Grid) -> f64 {
    residual_phi0_with_alpha(grid, ALPHA)
}

/// L2 residuals of the first-order pair
/// `mu'' + (-1/4 + 6 phi0^2) mu = 0` and
/// `nu'' + (-1/4 + 2 phi0^2) nu = phi0^3 - 5 phi0^5`
/// for arbitrary real profiles `mu`, `nu` sampled on `grid`.
pub fn first_order_residuals(grid: &Grid, mu: &[f64], nu: &[f64]) -> (f64, f64) {
    let p: Vec<f64> = grid.x().iter().map(|&x| phi0_at(x)).collect();
    let dx = grid.dx();
    let real = interior_l2(mu, dx, |j, dd| dd + (-0.25 + 6.0 * p[j] * p[j]) * mu[j]);
    let imag = interior_l2(nu, dx, |j, dd| {
        let pj = p[j];
        dd + (-0.25 + 2.0 * pj * pj) * nu[j] - (pj.powi(3) - 5.0 * pj.powi(5))
    });
    (real, imag)
}

/// Residuals of `phi1(A, B)` in the first-order equations.
pub fn residual_phi1(grid: &Grid, a: f64, b: f64) -> (f64, f64) {
    let p1 = phi1(grid, 0.0, a, b);
    let mu: Vec<f64> = p1.values().iter().map(|c| c.re).collect();
    let nu: Vec<f64> = p1.values().iter().map(|c| c.im).collect();
    first_order_residuals(grid, &mu, &nu)
}
