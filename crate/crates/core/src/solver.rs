//! The epsilon-regularization scheme: each regularized problem is the strictly
//! convex minimization of
//!
//! ```text
//!   J_eps(u) = energy(u) + sum_nodes j_eps(u_j) vol - <mu_eps, u>
//! ```
//!
//! solved by damped Newton on the nodal residual
//! `-div_h a(x, D_h u) + beta_eps(u) - mu_eps`, with a proximal-gradient
//! fallback whenever a Newton direction fails the descent test. Driving
//! `eps` down a geometric schedule with warm starts yields the limit triple
//! `(u, w, nu)`: the regular part `w` is the Yosida value projected onto the
//! graph section, and the singular part `nu` collects the residual at contact
//! nodes only.

use crate::error::SolverError;
use crate::graph::MonotoneGraph;
use crate::grid::{
    anisotropic_energy, apply_operator, derivative, Grid, GridFunction, LerayLionsField,
};
use crate::measure::MeasureData;
use crate::tolerances;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Geometric schedule `eps_k = eps0 * factor^k`, `k = 0..count`.
#[derive(Debug, Clone)]
pub struct EpsilonSchedule {
    pub eps0: f64,
    pub factor: f64,
    pub count: usize,
}

impl EpsilonSchedule {
    pub fn new(eps0: f64, factor: f64, count: usize) -> Result<Self, crate::error::BuildError> {
        let schedule_ok = eps0 > 0.0 && factor > 0.0 && factor < 1.0 && count >= 1;
        if !schedule_ok {
            return Err(crate::error::BuildError::Grid(format!(
                "schedule needs eps0 > 0, factor in (0,1), count >= 1; got {eps0}, {factor}, {count}"
            )));
        }
        Ok(EpsilonSchedule {
            eps0,
            factor,
            count,
        })
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count)
            .map(|k| self.eps0 * self.factor.powi(k as i32))
            .collect()
    }
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        EpsilonSchedule {
            eps0: 1.0,
            factor: 0.5,
            count: 20,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub max_iter: usize,
    pub tol_scheme: f64,
    /// Override for the inner residual tolerance; default
    /// `1e-9 * (1 + variation(mu))`.
    pub tol_res: Option<f64>,
    /// Truncation levels recorded per epsilon in the trace.
    pub trace_truncation_k: Vec<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iter: tolerances::MAX_INNER_ITER,
            tol_scheme: tolerances::DEFAULT_TOL_SCHEME,
            tol_res: None,
            trace_truncation_k: Vec::new(),
        }
    }
}

/// One row of the per-epsilon trace.
#[derive(Debug, Clone)]
pub struct TraceRow {
    pub eps: f64,
    pub iterations: usize,
    pub residual: f64,
    pub energy: f64,
    pub objective: f64,
    pub truncation: Vec<(f64, f64)>,
}

/// The limit triple plus run diagnostics.
#[derive(Debug, Clone)]
pub struct SolutionBundle {
    pub grid: Grid,
    pub field: LerayLionsField,
    pub graph: MonotoneGraph,
    pub measure: MeasureData,
    pub u: GridFunction,
    /// Regular part, `w in beta(u)` away from contact nodes.
    pub w: Vec<f64>,
    /// Singular part as nodal weights, supported on contact nodes only.
    pub nu: Vec<f64>,
    pub trace: Vec<TraceRow>,
    pub converged: bool,
    pub final_residual: f64,
    pub final_eps: f64,
    pub variation: f64,
    pub tol_res: f64,
    pub tol_conc: f64,
}

/// Moreau envelope via the resolvent identity; this is the exact
/// antiderivative of the Yosida map and is what the line searches descend on.
fn envelope_value(graph: &MonotoneGraph, eps: f64, s: f64) -> f64 {
    let r = graph.resolvent(eps, s);
    let y = (s - r) / eps;
    0.5 * eps * y * y + graph.potential(r)
}

struct InnerProblem<'a> {
    grid: &'a Grid,
    field: &'a LerayLionsField,
    graph: &'a MonotoneGraph,
    mu_nodal: Vec<f64>,
    interior: Vec<usize>,
    eps: f64,
}

impl InnerProblem<'_> {
    fn residual(&self, u: &[f64]) -> Vec<f64> {
        let gf = GridFunction::from_values_unchecked(u.to_vec());
        let op = apply_operator(self.grid, self.field, &gf);
        let mut r = vec![0.0; u.len()];
        for &j in &self.interior {
            r[j] = op.values()[j] + self.graph.yosida(self.eps, u[j]) - self.mu_nodal[j];
        }
        r
    }

    fn objective(&self, u: &[f64]) -> f64 {
        let gf = GridFunction::from_values_unchecked(u.to_vec());
        let vol = self.grid.cell_volume();
        let mut acc = anisotropic_energy(self.grid, &gf);
        for &j in &self.interior {
            acc += (envelope_value(self.graph, self.eps, u[j]) - self.mu_nodal[j] * u[j]) * vol;
        }
        acc
    }

    /// Edge stiffness (delta-regularized) and nodal Yosida slopes for the
    /// Newton linearization.
    fn jacobian_parts(&self, u: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
        let grid = self.grid;
        let gf = GridFunction::from_values_unchecked(u.to_vec());
        let mut edge_w = Vec::with_capacity(grid.dim());
        for d in 0..grid.dim() {
            let der = derivative(grid, &gf, d);
            let mut w = vec![0.0; grid.edge_count(d)];
            grid.for_each_edge(d, |e, a, _| {
                let x = grid.edge_midpoint(d, a);
                w[e] = self
                    .field
                    .flux_slope(grid, d, &x[..grid.dim()], der[e])
                    .max(0.0);
            });
            edge_w.push(w);
        }
        let mut diag = vec![0.0; u.len()];
        for &j in &self.interior {
            diag[j] = self.graph.yosida_slope(self.eps, u[j]).max(0.0);
        }
        (edge_w, diag)
    }

    /// Matrix-free application of the Newton matrix to a direction with zero
    /// boundary values.
    fn apply_jacobian(&self, edge_w: &[Vec<f64>], diag: &[f64], d: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let grid = self.grid;
        for ax in 0..grid.dim() {
            let h2 = grid.spacings()[ax] * grid.spacings()[ax];
            let w = &edge_w[ax];
            grid.for_each_edge(ax, |e, a, b| {
                let f = w[e] * (d[a] - d[b]) / h2;
                out[a] += f;
                out[b] -= f;
            });
        }
        for j in 0..d.len() {
            out[j] += diag[j] * d[j];
        }
        for j in 0..d.len() {
            if grid.is_boundary(j) {
                out[j] = 0.0;
            }
        }
    }

    fn solve_newton_system(
        &self,
        edge_w: &[Vec<f64>],
        diag: &[f64],
        rhs: &[f64],
    ) -> Result<Vec<f64>, SolverError> {
        match self.grid.dim() {
            1 => self.solve_tridiagonal(&edge_w[0], diag, rhs),
            _ => self.solve_pcg(edge_w, diag, rhs),
        }
    }

    fn solve_tridiagonal(
        &self,
        edge_w: &[f64],
        diag: &[f64],
        rhs: &[f64],
    ) -> Result<Vec<f64>, SolverError> {
        let n = self.grid.counts()[0];
        let h2 = self.grid.spacings()[0] * self.grid.spacings()[0];
        let m = n - 2;
        let mut sub = vec![0.0; m];
        let mut main = vec![0.0; m];
        let mut sup = vec![0.0; m];
        let mut b = vec![0.0; m];
        for i in 0..m {
            let j = i + 1;
            main[i] = (edge_w[j - 1] + edge_w[j]) / h2 + diag[j];
            if i > 0 {
                sub[i] = -edge_w[j - 1] / h2;
            }
            if i + 1 < m {
                sup[i] = -edge_w[j] / h2;
            }
            b[i] = rhs[j];
        }
        // Thomas elimination
        for i in 1..m {
            if main[i - 1] == 0.0 {
                return Err(SolverError::LinearSolve(
                    "singular tridiagonal pivot".into(),
                ));
            }
            let f = sub[i] / main[i - 1];
            main[i] -= f * sup[i - 1];
            b[i] -= f * b[i - 1];
        }
        if main[m - 1] == 0.0 {
            return Err(SolverError::LinearSolve(
                "singular tridiagonal pivot".into(),
            ));
        }
        let mut x = vec![0.0; m];
        x[m - 1] = b[m - 1] / main[m - 1];
        for i in (0..m - 1).rev() {
            x[i] = (b[i] - sup[i] * x[i + 1]) / main[i];
        }
        let mut full = vec![0.0; n];
        full[1..=m].copy_from_slice(&x);
        Ok(full)
    }

    fn solve_pcg(
        &self,
        edge_w: &[Vec<f64>],
        diag: &[f64],
        rhs: &[f64],
    ) -> Result<Vec<f64>, SolverError> {
        let grid = self.grid;
        let n = grid.node_count();
        // Jacobi preconditioner from the matrix diagonal
        let mut precond = diag.to_vec();
        for ax in 0..grid.dim() {
            let h2 = grid.spacings()[ax] * grid.spacings()[ax];
            let w = &edge_w[ax];
            grid.for_each_edge(ax, |e, a, b| {
                precond[a] += w[e] / h2;
                precond[b] += w[e] / h2;
            });
        }
        for j in 0..n {
            if grid.is_boundary(j) || precond[j] <= 0.0 {
                precond[j] = 1.0;
            }
        }
        let mut x = vec![0.0; n];
        let mut r = rhs.to_vec();
        for j in 0..n {
            if grid.is_boundary(j) {
                r[j] = 0.0;
            }
        }
        let mut z: Vec<f64> = r.iter().zip(&precond).map(|(ri, pi)| ri / pi).collect();
        let mut p = z.clone();
        let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let b_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if b_norm == 0.0 {
            return Ok(x);
        }
        let tol = 1e-11 * b_norm;
        let mut ap = vec![0.0; n];
        let max_cg = 40 * n;
        for _ in 0..max_cg {
            self.apply_jacobian(edge_w, diag, &p, &mut ap);
            let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
            if pap <= 0.0 {
                return Err(SolverError::LinearSolve(
                    "lost positive definiteness in CG".into(),
                ));
            }
            let alpha = rz / pap;
            for j in 0..n {
                x[j] += alpha * p[j];
                r[j] -= alpha * ap[j];
            }
            let r_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r_norm <= tol {
                return Ok(x);
            }
            for j in 0..n {
                z[j] = r[j] / precond[j];
            }
            let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
            let beta = rz_new / rz;
            rz = rz_new;
            for j in 0..n {
                p[j] = z[j] + beta * p[j];
            }
        }
        // a slightly inexact direction still works under the damped line search
        Ok(x)
    }

    /// Proximal-gradient step: forward step on the smooth part, closed-form
    /// prox of the envelope term through the resolvent at parameter
    /// `eps + tau`.
    fn prox_gradient_step(&self, u: &[f64], tau: f64) -> Vec<f64> {
        let gf = GridFunction::from_values_unchecked(u.to_vec());
        let op = apply_operator(self.grid, self.field, &gf);
        let mut out = u.to_vec();
        for &j in &self.interior {
            let v = u[j] - tau * (op.values()[j] - self.mu_nodal[j]);
            let r = self.graph.resolvent(self.eps + tau, v);
            out[j] = v - tau * (v - r) / (self.eps + tau);
        }
        out
    }
}

fn linf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Solve one regularized problem. `mu_eps` must already be regularized at
/// this `eps`. Returns the iterate, the iteration count and the final
/// max-norm residual.
pub fn solve_regularized(
    grid: &Grid,
    field: &LerayLionsField,
    graph: &MonotoneGraph,
    mu_eps: &MeasureData,
    eps: f64,
    warm_start: Option<&GridFunction>,
    opts: &SolverOptions,
) -> Result<(GridFunction, usize, f64), SolverError> {
    solve_regularized_observed(
        grid,
        field,
        graph,
        mu_eps,
        eps,
        warm_start,
        opts,
        &mut |_| {},
    )
}

#[allow(clippy::too_many_arguments)]
fn solve_regularized_observed(
    grid: &Grid,
    field: &LerayLionsField,
    graph: &MonotoneGraph,
    mu_eps: &MeasureData,
    eps: f64,
    warm_start: Option<&GridFunction>,
    opts: &SolverOptions,
    observe_objective: &mut dyn FnMut(f64),
) -> Result<(GridFunction, usize, f64), SolverError> {
    assert!(eps > 0.0);
    let tol_res = opts
        .tol_res
        .unwrap_or_else(|| tolerances::TOL_RES_FACTOR * (1.0 + mu_eps.variation(grid)));
    let problem = InnerProblem {
        grid,
        field,
        graph,
        mu_nodal: mu_eps.nodal_density(grid),
        interior: grid.interior_indices(),
        eps,
    };
    let mut u: Vec<f64> = match warm_start {
        Some(g) => g.values().to_vec(),
        None => vec![0.0; grid.node_count()],
    };
    let mut obj = problem.objective(&u);
    observe_objective(obj);
    let mut tau = 1.0; // adaptive prox-step memory
                       // objective differences below this are rounding noise; steps that shrink
                       // the residual while staying flat to rounding are still accepted
    let obj_noise = |o: f64| 64.0 * f64::EPSILON * (1.0 + o.abs());

    for it in 0..opts.max_iter {
        let r = problem.residual(&u);
        let rmax = linf(&r);
        if rmax <= tol_res {
            return Ok((GridFunction::from_values_unchecked(u), it, rmax));
        }

        let (edge_w, diag) = problem.jacobian_parts(&u);
        let mut rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        for j in 0..rhs.len() {
            if grid.is_boundary(j) {
                rhs[j] = 0.0;
            }
        }
        let newton_dir = problem.solve_newton_system(&edge_w, &diag, &rhs);

        let mut stepped = false;
        if let Ok(dir) = newton_dir {
            let slope: f64 =
                problem.interior.iter().map(|&j| r[j] * dir[j]).sum::<f64>() * grid.cell_volume();
            if slope < 0.0 {
                let mut t = 1.0;
                for _ in 0..60 {
                    let cand: Vec<f64> = u.iter().zip(&dir).map(|(a, d)| a + t * d).collect();
                    let cand_obj = problem.objective(&cand);
                    let armijo = cand_obj <= obj + 1e-4 * t * slope;
                    let residual_drop = cand_obj <= obj + obj_noise(obj)
                        && linf(&problem.residual(&cand)) <= 0.9 * rmax;
                    if armijo || residual_drop {
                        u = cand;
                        obj = cand_obj;
                        observe_objective(cand_obj);
                        stepped = true;
                        break;
                    }
                    t *= 0.5;
                }
            }
        }

        if !stepped {
            // proximal-gradient fallback with backtracking on the objective
            let mut progressed = false;
            for _ in 0..80 {
                let cand = problem.prox_gradient_step(&u, tau);
                let cand_obj = problem.objective(&cand);
                if cand_obj < obj
                    || (cand_obj <= obj + obj_noise(obj)
                        && linf(&problem.residual(&cand)) <= 0.9 * rmax)
                {
                    u = cand;
                    obj = cand_obj;
                    observe_objective(cand_obj);
                    tau *= 1.5;
                    progressed = true;
                    break;
                }
                tau *= 0.5;
            }
            if !progressed {
                return Err(SolverError::NonConvergence {
                    iterations: it,
                    residual: rmax,
                });
            }
        }
    }
    let rmax = linf(&problem.residual(&u));
    if rmax <= tol_res {
        return Ok((GridFunction::from_values_unchecked(u), opts.max_iter, rmax));
    }
    Err(SolverError::NonConvergence {
        iterations: opts.max_iter,
        residual: rmax,
    })
}

/// Truncation energy `sum_i sum_edges |D^i T_k(u)|^{p_i} * cellvolume`,
/// restricted to edges with both endpoints in `[|u| <= k]`.
pub fn truncation_energy(grid: &Grid, u: &GridFunction, k: f64) -> f64 {
    assert!(k > 0.0);
    band_edge_energy(grid, u, |a, b| a.abs() <= k && b.abs() <= k)
}

/// Band energy over edges whose endpoints both satisfy `lo <= |u| <= hi`.
pub fn band_energy(grid: &Grid, u: &GridFunction, lo: f64, hi: f64) -> f64 {
    band_edge_energy(grid, u, |a, b| {
        a.abs() >= lo && a.abs() <= hi && b.abs() >= lo && b.abs() <= hi
    })
}

fn band_edge_energy(grid: &Grid, u: &GridFunction, include: impl Fn(f64, f64) -> bool) -> f64 {
    let vol = grid.cell_volume();
    let v = u.values();
    let mut total = 0.0;
    for d in 0..grid.dim() {
        let h = grid.spacings()[d];
        let p = grid.exponents()[d];
        let mut s = 0.0;
        grid.for_each_edge(d, |_, a, b| {
            if include(v[a], v[b]) {
                s += ((v[b] - v[a]) / h).abs().powf(p);
            }
        });
        total += s * vol;
    }
    total
}

/// Run the scheme down the schedule with warm starts and extract the triple.
pub fn run_scheme(
    grid: &Grid,
    field: &LerayLionsField,
    graph: &MonotoneGraph,
    mu: &MeasureData,
    schedule: &EpsilonSchedule,
    opts: &SolverOptions,
) -> Result<SolutionBundle, SolverError> {
    run_scheme_from(grid, field, graph, mu, schedule, opts, None)
}

/// Same as [`run_scheme`] but from a caller-provided initial iterate (used by
/// the uniqueness check; warm starting across epsilons is unchanged).
#[allow(clippy::too_many_arguments)]
pub fn run_scheme_from(
    grid: &Grid,
    field: &LerayLionsField,
    graph: &MonotoneGraph,
    mu: &MeasureData,
    schedule: &EpsilonSchedule,
    opts: &SolverOptions,
    initial: Option<GridFunction>,
) -> Result<SolutionBundle, SolverError> {
    let variation = mu.variation(grid);
    let tol_res = opts
        .tol_res
        .unwrap_or(tolerances::TOL_RES_FACTOR * (1.0 + variation));
    let inner_opts = SolverOptions {
        tol_res: Some(tol_res),
        ..opts.clone()
    };

    let mut u = initial.unwrap_or_else(|| GridFunction::zeros(grid));
    let mut prev: Option<GridFunction> = None;
    let mut trace = Vec::with_capacity(schedule.count);
    let mut last = (0.0, 0.0); // (eps, residual)

    for eps in schedule.values() {
        let mu_eps = mu.regularize(eps);
        let (u_new, iterations, residual) =
            solve_regularized(grid, field, graph, &mu_eps, eps, Some(&u), &inner_opts)?;
        let energy = anisotropic_energy(grid, &u_new);
        let objective = {
            let p = InnerProblem {
                grid,
                field,
                graph,
                mu_nodal: mu_eps.nodal_density(grid),
                interior: grid.interior_indices(),
                eps,
            };
            p.objective(u_new.values())
        };
        let truncation = opts
            .trace_truncation_k
            .iter()
            .map(|&k| (k, truncation_energy(grid, &u_new, k)))
            .collect();
        trace.push(TraceRow {
            eps,
            iterations,
            residual,
            energy,
            objective,
            truncation,
        });
        last = (eps, residual);
        prev = Some(std::mem::replace(&mut u, u_new));
    }

    let converged = match &prev {
        Some(p) if schedule.count >= 2 => u.linf_distance(p) <= opts.tol_scheme,
        _ => last.1 <= tol_res,
    };
    if !converged {
        let gap = prev
            .as_ref()
            .map(|p| u.linf_distance(p))
            .unwrap_or(f64::INFINITY);
        return Err(SolverError::SchemeStalled {
            gap,
            tol: opts.tol_scheme,
        });
    }

    let (final_eps, final_residual) = last;
    let tol_conc = tolerances::CONC_FACTOR * opts.tol_scheme;
    let (w, nu) = extract_parts(grid, field, graph, mu, &u, final_eps, tol_res, tol_conc);

    Ok(SolutionBundle {
        grid: grid.clone(),
        field: field.clone(),
        graph: graph.clone(),
        measure: mu.clone(),
        u,
        w,
        nu,
        trace,
        converged,
        final_residual,
        final_eps,
        variation,
        tol_res,
        tol_conc,
    })
}

/// Split the limit into the regular part `w` and the singular weights `nu`.
/// A node is contact only when `u` sits within `tol_conc` of a finite domain
/// endpoint AND the residual against the nearest finite subgradient exceeds
/// `tol_res` (which rules out spurious atoms from roundoff).
#[allow(clippy::too_many_arguments)]
fn extract_parts(
    grid: &Grid,
    field: &LerayLionsField,
    graph: &MonotoneGraph,
    mu: &MeasureData,
    u: &GridFunction,
    eps: f64,
    tol_res: f64,
    tol_conc: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = grid.node_count();
    let vol = grid.cell_volume();
    let mu_nodal = mu.regularize(eps).nodal_density(grid);
    let op = apply_operator(grid, field, u);
    let (m, big) = graph.dom();
    let mut w = vec![0.0; n];
    let mut nu = vec![0.0; n];
    for j in 0..n {
        if grid.is_boundary(j) {
            continue;
        }
        let uj = u.values()[j];
        let near_upper = big.is_finite() && uj >= big - tol_conc;
        let near_lower = m.is_finite() && uj <= m + tol_conc;
        let contact_value = if near_upper && near_lower {
            // degenerate tiny domain: take the nearer endpoint
            if (uj - m).abs() < (big - uj).abs() {
                graph.lower_contact_value()
            } else {
                graph.upper_contact_value()
            }
        } else if near_upper {
            graph.upper_contact_value()
        } else if near_lower {
            graph.lower_contact_value()
        } else {
            None
        };
        if let Some(wc) = contact_value {
            let resid = mu_nodal[j] - op.values()[j] - wc;
            if resid.abs() > tol_res {
                w[j] = wc;
                nu[j] = vol * resid;
                continue;
            }
        }
        // regular node: project the Yosida value onto the graph section,
        // snapping to interior jump knots within the contact tolerance
        let y = graph.yosida(eps, uj);
        let clamped = uj.clamp(m, big);
        w[j] = match graph.section_near(clamped, tol_conc) {
            Some(span) => span.project(y),
            None => y,
        };
    }
    (w, nu)
}

impl SolutionBundle {
    /// Reassemble a bundle from stored arrays (no trace); used when checking
    /// artifacts written by an earlier run.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        grid: Grid,
        field: LerayLionsField,
        graph: MonotoneGraph,
        measure: MeasureData,
        u: GridFunction,
        w: Vec<f64>,
        nu: Vec<f64>,
        tol_scheme: f64,
    ) -> Self {
        let variation = measure.variation(&grid);
        SolutionBundle {
            grid,
            field,
            graph,
            measure,
            u,
            w,
            nu,
            trace: Vec::new(),
            converged: true,
            final_residual: f64::NAN,
            final_eps: f64::NAN,
            variation,
            tol_res: tolerances::TOL_RES_FACTOR * (1.0 + variation),
            tol_conc: tolerances::CONC_FACTOR * tol_scheme,
        }
    }

    /// Truncation energy of the limit iterate, for the linear-in-`k` bound.
    pub fn estimate_truncation_energy(&self, k: f64) -> f64 {
        truncation_energy(&self.grid, &self.u, k)
    }

    /// Energy of the band `n <= |u| <= n+1`; vanishes beyond `max |u|`.
    pub fn tail_energy(&self, n: u32) -> f64 {
        band_energy(&self.grid, &self.u, n as f64, n as f64 + 1.0)
    }

    /// Largest membership defect of `(u, w)` over nodes carrying no singular
    /// mass.
    pub fn max_membership_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.grid.node_count() {
            if self.grid.is_boundary(j) || self.nu[j] != 0.0 {
                continue;
            }
            worst = worst.max(self.graph.membership_defect(self.u.values()[j], self.w[j]));
        }
        worst
    }

    /// Largest signed complementarity product: positive singular mass must
    /// sit where `u` has reached the upper endpoint, negative mass at the
    /// lower one.
    pub fn complementarity_defect(&self) -> f64 {
        let (m, big) = self.graph.dom();
        let mut worst = 0.0f64;
        for j in 0..self.grid.node_count() {
            let nu = self.nu[j];
            let uj = self.u.values()[j];
            if nu > 0.0 && big.is_finite() {
                worst = worst.max(nu * (big - uj));
            }
            if nu < 0.0 && m.is_finite() {
                worst = worst.max(-nu * (uj - m));
            }
        }
        worst
    }

    /// Largest violation of `m - tol_conc <= u <= M + tol_conc`.
    pub fn dom_confinement_violation(&self) -> f64 {
        let (m, big) = self.graph.dom();
        let mut worst = 0.0f64;
        for &v in self.u.values() {
            if big.is_finite() {
                worst = worst.max(v - (big + self.tol_conc));
            }
            if m.is_finite() {
                worst = worst.max((m - self.tol_conc) - v);
            }
        }
        worst
    }

    pub fn nu_l1(&self) -> f64 {
        self.nu.iter().map(|v| v.abs()).sum()
    }
}

/// Two-start agreement report for the uniqueness verification.
#[derive(Debug, Clone)]
pub struct UniquenessReport {
    pub u_gap: f64,
    pub w_gap_noncontact: f64,
    pub nu_gap_l1: f64,
}

/// Run the scheme from a zero start and from a seeded random bounded start
/// and report the disagreement of the extracted triples.
pub fn solve_twice_uniqueness(
    grid: &Grid,
    field: &LerayLionsField,
    graph: &MonotoneGraph,
    mu: &MeasureData,
    schedule: &EpsilonSchedule,
    opts: &SolverOptions,
    seed: u64,
) -> Result<UniquenessReport, SolverError> {
    let first = run_scheme(grid, field, graph, mu, schedule, opts)?;
    let (m, big) = graph.dom();
    let lo = 0.9 * m.max(-1.0);
    let hi = 0.9 * big.min(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = GridFunction::from_fn(grid, |_| rng.gen_range(lo..=hi));
    let second = run_scheme_from(grid, field, graph, mu, schedule, opts, Some(start))?;

    let u_gap = first.u.linf_distance(&second.u);
    let mut w_gap = 0.0f64;
    let mut nu_gap = 0.0;
    for j in 0..grid.node_count() {
        if first.nu[j] == 0.0 && second.nu[j] == 0.0 {
            w_gap = w_gap.max((first.w[j] - second.w[j]).abs());
        }
        nu_gap += (first.nu[j] - second.nu[j]).abs();
    }
    Ok(UniquenessReport {
        u_gap,
        w_gap_noncontact: w_gap,
        nu_gap_l1: nu_gap,
    })
}
