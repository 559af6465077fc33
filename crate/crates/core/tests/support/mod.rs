//! Shared oracles for the acceptance suite. These deliberately avoid the
//! library's solver path: the obstacle oracle is projected SOR on the
//! complementarity system, assembled from the raw stencil.

use anisolve_core::{Grid, GridFunction};

/// Projected successive over-relaxation for the double-obstacle problem
/// `m <= u <= M`, `-laplace u = f` off the contact set (p = 2 model field).
pub fn psor_obstacle(
    grid: &Grid,
    density: &[f64],
    lower: f64,
    upper: f64,
    omega: f64,
    tol: f64,
    max_sweeps: usize,
) -> GridFunction {
    let n = grid.node_count();
    let mut u = vec![0.0; n];
    let dim = grid.dim();
    let mut inv_h2 = [0.0; 2];
    for (d, slot) in inv_h2.iter_mut().take(dim).enumerate() {
        *slot = 1.0 / (grid.spacings()[d] * grid.spacings()[d]);
    }
    let diag: f64 = (0..dim).map(|d| 2.0 * inv_h2[d]).sum();
    let counts = grid.counts().to_vec();

    for _sweep in 0..max_sweeps {
        let mut worst = 0.0f64;
        for idx in 0..n {
            if grid.is_boundary(idx) {
                continue;
            }
            let mut neighbor_sum = 0.0;
            for (d, ih2) in inv_h2.iter().take(dim).enumerate() {
                let stride = if dim == 2 && d == 0 { counts[1] } else { 1 };
                neighbor_sum += ih2 * (u[idx - stride] + u[idx + stride]);
            }
            let residual = density[idx] + neighbor_sum - diag * u[idx];
            let unclamped = u[idx] + omega * residual / diag;
            let clamped = unclamped.clamp(lower, upper);
            worst = worst.max((clamped - u[idx]).abs());
            u[idx] = clamped;
        }
        if worst <= tol {
            break;
        }
    }
    GridFunction::from_values(grid, u).expect("psor keeps the boundary at zero")
}

pub fn linf_error(a: &GridFunction, b: &GridFunction) -> f64 {
    a.linf_distance(b)
}
