//! Post-hoc verification of a solution bundle: the renormalized identity, the
//! one-sided entropy inequality, level-set decay measurements, and the
//! concentration sign checks at the domain endpoints.

use crate::calculus::{level_indicator_ramp, level_indicator_ramp_below, plateau_cutoff, truncate};
use crate::error::DiagnosticsError;
use crate::grid::{apply_operator, derivative, Grid, GridFunction};
use crate::solver::SolutionBundle;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// `sum_i sum_edges a_i(x, D^i u) * D^i v * cellvolume`.
fn flux_pairing(bundle: &SolutionBundle, v: &GridFunction) -> f64 {
    let grid = &bundle.grid;
    let vol = grid.cell_volume();
    let mut acc = 0.0;
    for d in 0..grid.dim() {
        let du = derivative(grid, &bundle.u, d);
        let dv = derivative(grid, v, d);
        let mut s = 0.0;
        grid.for_each_edge(d, |e, a, _| {
            let x = grid.edge_midpoint(d, a);
            s += bundle.field.flux(grid, d, &x[..grid.dim()], du[e]) * dv[e];
        });
        acc += s * vol;
    }
    acc
}

/// Absolute defect of the renormalized identity against `h_l(u) * xi`:
/// flux term + `w`-term + `nu`-term minus the measure pairing.
pub fn renormalized_residual(bundle: &SolutionBundle, l: f64, xi: &GridFunction) -> f64 {
    assert!(l > 0.0);
    let grid = &bundle.grid;
    let vol = grid.cell_volume();
    let hu: Vec<f64> = bundle
        .u
        .values()
        .iter()
        .map(|&r| plateau_cutoff(l, r))
        .collect();
    let phi = GridFunction::from_values_unchecked(
        xi.values().iter().zip(&hu).map(|(x, h)| x * h).collect(),
    );
    let mut lhs = flux_pairing(bundle, &phi);
    for j in 0..grid.node_count() {
        if !grid.is_boundary(j) {
            lhs += bundle.w[j] * phi.values()[j] * vol;
            lhs += bundle.nu[j] * phi.values()[j];
        }
    }
    let rhs = bundle.measure.pairing(grid, &phi);
    (lhs - rhs).abs()
}

/// One-sided entropy residual (left minus right) against `T_k(u - xi)`;
/// nonpositive up to tolerance for admissible `xi` with values in the graph
/// domain.
pub fn entropy_residual(
    bundle: &SolutionBundle,
    xi: &GridFunction,
    k: f64,
) -> Result<f64, DiagnosticsError> {
    assert!(k > 0.0);
    let (m, big) = bundle.graph.dom();
    for &v in xi.values() {
        if v < m || v > big {
            return Err(DiagnosticsError::RejectedInput(format!(
                "entropy test function takes value {v} outside the graph domain [{m}, {big}]"
            )));
        }
    }
    let grid = &bundle.grid;
    let vol = grid.cell_volume();
    let phi = GridFunction::from_values_unchecked(
        bundle
            .u
            .values()
            .iter()
            .zip(xi.values())
            .map(|(u, x)| truncate(k, u - x))
            .collect(),
    );
    let mut lhs = flux_pairing(bundle, &phi);
    for j in 0..grid.node_count() {
        if !grid.is_boundary(j) {
            lhs += bundle.w[j] * phi.values()[j] * vol;
        }
    }
    Ok(lhs - bundle.measure.pairing(grid, &phi))
}

/// Cell-volume-weighted measures of the super-level sets
/// `[|u| > k]` and `[|Du| > k]` (node-based gradient magnitude from the
/// forward-difference stencil).
pub fn level_set_decay(bundle: &SolutionBundle, k: f64) -> (f64, f64) {
    assert!(k > 0.0);
    let grid = &bundle.grid;
    let vol = grid.cell_volume();
    let v = bundle.u.values();
    let mut meas_u = 0.0;
    for j in 0..grid.node_count() {
        if !grid.is_boundary(j) && v[j].abs() > k {
            meas_u += vol;
        }
    }
    // forward-difference gradient magnitude per node owning forward edges
    let mut grad_sq = vec![0.0; grid.node_count()];
    let mut has_all = vec![true; grid.node_count()];
    for d in 0..grid.dim() {
        let der = derivative(grid, &bundle.u, d);
        let mut got = vec![false; grid.node_count()];
        grid.for_each_edge(d, |e, a, _| {
            grad_sq[a] += der[e] * der[e];
            got[a] = true;
        });
        for j in 0..grid.node_count() {
            has_all[j] &= got[j];
        }
    }
    let mut meas_grad = 0.0;
    for j in 0..grid.node_count() {
        if !grid.is_boundary(j) && has_all[j] && grad_sq[j].sqrt() > k {
            meas_grad += vol;
        }
    }
    (meas_u, meas_grad)
}

/// The exponent in the level-set decay bound: `N (pbar - 1) / (N - pbar)`
/// with `pbar` the harmonic mean, only meaningful when `pbar < N`.
pub fn decay_exponent(grid: &Grid) -> Option<f64> {
    let n = grid.dim() as f64;
    let pbar = grid.exponent_harmonic_mean();
    if pbar < n {
        Some(n * (pbar - 1.0) / (n - pbar))
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConcentrationSide {
    Above,
    Below,
}

/// Evaluate `sum xi * phi_n(u) * z` where `z = w * cellvolume + nu + residual`
/// collapses to the node weights `vol * (mu - op(u))`, for the geometric ramp
/// sweep `n in {4, 16, 64, 256}`.
pub fn concentration_sweep(
    bundle: &SolutionBundle,
    lambda: f64,
    side: ConcentrationSide,
    xi: &GridFunction,
) -> Vec<(u32, f64)> {
    let grid = &bundle.grid;
    let vol = grid.cell_volume();
    let mu_nodal = bundle.measure.nodal_density(grid);
    let op = apply_operator(grid, &bundle.field, &bundle.u);
    let mut out = Vec::new();
    for &n in &[4u32, 16, 64, 256] {
        let mut acc = 0.0;
        for j in 0..grid.node_count() {
            if grid.is_boundary(j) {
                continue;
            }
            let ramp = match side {
                ConcentrationSide::Above => level_indicator_ramp(n, lambda, bundle.u.values()[j]),
                ConcentrationSide::Below => {
                    level_indicator_ramp_below(n, lambda, bundle.u.values()[j])
                }
            };
            let z = vol * (mu_nodal[j] - op.values()[j]);
            acc += xi.values()[j] * ramp * z;
        }
        out.push((n, acc));
    }
    out
}

/// The limit proxy at the largest ramp index; nonnegative at the upper
/// endpoint and nonpositive at the lower one for converged bundles.
pub fn concentration_check(
    bundle: &SolutionBundle,
    lambda: f64,
    side: ConcentrationSide,
    xi: &GridFunction,
) -> f64 {
    concentration_sweep(bundle, lambda, side, xi)
        .last()
        .map(|&(_, v)| v)
        .unwrap_or(0.0)
}

/// Deterministic family of bounded test functions with zero trace: tensor
/// hats, a smooth bump, the solution itself, and clipped seeded noise.
pub fn test_function_family(
    grid: &Grid,
    u: &GridFunction,
    seed: u64,
) -> Vec<(String, GridFunction)> {
    let mut family = Vec::new();
    let lengths = grid.lengths().to_vec();
    let hat =
        move |center: f64, t: f64| (1.0 - ((t - center) / center.min(1.0 - center)).abs()).max(0.0);
    {
        let lengths = lengths.clone();
        family.push((
            "hat_center".to_string(),
            GridFunction::from_fn(grid, move |x| {
                (0..x.len()).map(|d| hat(0.5, x[d] / lengths[d])).product()
            }),
        ));
    }
    {
        let lengths = lengths.clone();
        family.push((
            "hat_offset".to_string(),
            GridFunction::from_fn(grid, move |x| {
                (0..x.len())
                    .map(|d| hat(1.0 / 3.0, x[d] / lengths[d]))
                    .product()
            }),
        ));
    }
    {
        let lengths = lengths.clone();
        family.push((
            "bump".to_string(),
            GridFunction::from_fn(grid, move |x| {
                (0..x.len())
                    .map(|d| {
                        let t = 2.0 * x[d] / lengths[d] - 1.0;
                        if t.abs() >= 1.0 {
                            0.0
                        } else {
                            (1.0 - 1.0 / (1.0 - t * t)).exp()
                        }
                    })
                    .product()
            }),
        ));
    }
    family.push(("solution".to_string(), u.clone()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    family.push((
        "noise".to_string(),
        GridFunction::from_fn(grid, move |_| rng.gen_range(-0.5..0.5)),
    ));
    family
}

/// Clamp a test function into the graph domain (needed by the entropy check).
pub fn clamp_into_domain(bundle: &SolutionBundle, xi: &GridFunction) -> GridFunction {
    let (m, big) = bundle.graph.dom();
    xi.map_zero_preserving(|v| v.clamp(m, big))
}
