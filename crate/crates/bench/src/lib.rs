//! Shared fixtures for the criterion benches.

use strobo_core::soliton::soliton_state;
use strobo_core::{Grid, WaveFunction};

/// The soliton profile at `epsilon` on a grid of `n_points` over length 80.
pub fn fixture(n_points: usize, epsilon: f64) -> WaveFunction {
    let grid = Grid::new(n_points, 80.0).expect("valid bench grid");
    soliton_state(&grid, epsilon, 0.0, 0.0).0
}
