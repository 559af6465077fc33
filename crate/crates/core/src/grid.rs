//! Finite-difference discretization of a box domain: forward differences on
//! staggered edges, anisotropic energies and norms, and the coefficient
//! fields of the divergence-form operator.
//!
//! Forward differences make the discrete operator the exact gradient of the
//! discrete energy, so the regularized solves are convex minimizations. All
//! nodal quadratures use the full cell volume `prod h_i`; boundary nodes are
//! pinned to zero and excluded.

use crate::error::BuildError;
use crate::expr::Expr;

/// Jacobian regularization for degenerate exponents; never used in residual
/// evaluation.
pub const GRADIENT_DELTA: f64 = 1e-8;

/// A rectangular grid on `prod (0, L_i)` with `n_i` nodes per axis (boundary
/// included) and exponent vector `p`.
#[derive(Debug, Clone)]
pub struct Grid {
    counts: Vec<usize>,
    lengths: Vec<f64>,
    spacings: Vec<f64>,
    exponents: Vec<f64>,
}

impl Grid {
    pub fn new(counts: &[usize], lengths: &[f64], exponents: &[f64]) -> Result<Self, BuildError> {
        let dim = counts.len();
        if dim == 0 || dim > 2 {
            return Err(BuildError::Grid(format!(
                "dimension must be 1 or 2, got {dim}"
            )));
        }
        if lengths.len() != dim || exponents.len() != dim {
            return Err(BuildError::Grid(
                "counts, lengths and exponents must agree in length".into(),
            ));
        }
        for &n in counts {
            if n < 3 {
                return Err(BuildError::Grid(format!(
                    "need at least 3 nodes per axis, got {n}"
                )));
            }
        }
        for &l in lengths {
            if l.is_nan() || l <= 0.0 || !l.is_finite() {
                return Err(BuildError::Grid(format!(
                    "axis length must be positive, got {l}"
                )));
            }
        }
        for &p in exponents {
            if p.is_nan() || p <= 1.0 || !p.is_finite() {
                return Err(BuildError::Grid(format!(
                    "every exponent must exceed 1, got {p}"
                )));
            }
        }
        let spacings = counts
            .iter()
            .zip(lengths)
            .map(|(&n, &l)| l / (n - 1) as f64)
            .collect();
        Ok(Grid {
            counts: counts.to_vec(),
            lengths: lengths.to_vec(),
            spacings,
            exponents: exponents.to_vec(),
        })
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn spacings(&self) -> &[f64] {
        &self.spacings
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    /// Harmonic mean of the exponents.
    pub fn exponent_harmonic_mean(&self) -> f64 {
        let n = self.dim() as f64;
        n / self.exponents.iter().map(|p| 1.0 / p).sum::<f64>()
    }

    pub fn exponent_min(&self) -> f64 {
        self.exponents.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn node_count(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacings.iter().product()
    }

    pub fn node_index(&self, multi: &[usize]) -> usize {
        match self.dim() {
            1 => multi[0],
            _ => multi[0] * self.counts[1] + multi[1],
        }
    }

    pub fn node_multi(&self, idx: usize) -> [usize; 2] {
        match self.dim() {
            1 => [idx, 0],
            _ => [idx / self.counts[1], idx % self.counts[1]],
        }
    }

    pub fn node_position(&self, idx: usize) -> [f64; 2] {
        let m = self.node_multi(idx);
        let mut pos = [0.0; 2];
        for d in 0..self.dim() {
            pos[d] = m[d] as f64 * self.spacings[d];
        }
        pos
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        let m = self.node_multi(idx);
        (0..self.dim()).any(|d| m[d] == 0 || m[d] == self.counts[d] - 1)
    }

    pub fn interior_indices(&self) -> Vec<usize> {
        (0..self.node_count())
            .filter(|&i| !self.is_boundary(i))
            .collect()
    }

    /// Number of axis-`d` edges (one per node with a forward neighbor).
    pub fn edge_count(&self, axis: usize) -> usize {
        let mut c = 1;
        for d in 0..self.dim() {
            c *= if d == axis {
                self.counts[d] - 1
            } else {
                self.counts[d]
            };
        }
        c
    }

    /// Visit every axis-`axis` edge as `(edge_index, lower_node, upper_node)`.
    pub fn for_each_edge(&self, axis: usize, mut f: impl FnMut(usize, usize, usize)) {
        match self.dim() {
            1 => {
                for i in 0..self.counts[0] - 1 {
                    f(i, i, i + 1);
                }
            }
            _ => {
                let (n0, n1) = (self.counts[0], self.counts[1]);
                if axis == 0 {
                    for i0 in 0..n0 - 1 {
                        for i1 in 0..n1 {
                            f(i0 * n1 + i1, i0 * n1 + i1, (i0 + 1) * n1 + i1);
                        }
                    }
                } else {
                    for i0 in 0..n0 {
                        for i1 in 0..n1 - 1 {
                            f(i0 * (n1 - 1) + i1, i0 * n1 + i1, i0 * n1 + i1 + 1);
                        }
                    }
                }
            }
        }
    }

    /// Midpoint of an axis edge, given its lower node.
    pub fn edge_midpoint(&self, axis: usize, lower_node: usize) -> [f64; 2] {
        let mut pos = self.node_position(lower_node);
        pos[axis] += 0.5 * self.spacings[axis];
        pos
    }
}

/// Nodal values with homogeneous Dirichlet trace: zero on every boundary node.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(grid: &Grid) -> Self {
        GridFunction {
            values: vec![0.0; grid.node_count()],
        }
    }

    /// Interpolate `f` at interior nodes; boundary stays zero.
    pub fn from_fn(grid: &Grid, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        let mut values = vec![0.0; grid.node_count()];
        for idx in 0..grid.node_count() {
            if !grid.is_boundary(idx) {
                let pos = grid.node_position(idx);
                values[idx] = f(&pos[..grid.dim()]);
            }
        }
        GridFunction { values }
    }

    /// Wrap raw nodal values, enforcing the zero trace and finiteness.
    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Self, BuildError> {
        if values.len() != grid.node_count() {
            return Err(BuildError::Grid(format!(
                "value count {} does not match grid node count {}",
                values.len(),
                grid.node_count()
            )));
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(BuildError::Grid(format!("non-finite value at node {i}")));
            }
            if grid.is_boundary(i) && v != 0.0 {
                return Err(BuildError::Grid(format!(
                    "nonzero boundary value at node {i}"
                )));
            }
        }
        Ok(GridFunction { values })
    }

    /// Wrap values produced by code that already keeps the boundary at zero.
    pub(crate) fn from_values_unchecked(values: Vec<f64>) -> Self {
        GridFunction { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Apply a scalar map fixing 0 (so the zero trace survives) at every node.
    pub fn map_zero_preserving(&self, f: impl Fn(f64) -> f64) -> Self {
        GridFunction {
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn linf_distance(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Per-axis edge arrays (one value per staggered face).
#[derive(Debug, Clone)]
pub struct FluxField {
    components: Vec<Vec<f64>>,
}

impl FluxField {
    pub fn zeros(grid: &Grid) -> Self {
        FluxField {
            components: (0..grid.dim())
                .map(|d| vec![0.0; grid.edge_count(d)])
                .collect(),
        }
    }

    /// Evaluate one expression per axis at edge midpoints.
    pub fn from_exprs(grid: &Grid, exprs: &[Option<Expr>]) -> Self {
        let mut field = FluxField::zeros(grid);
        for d in 0..grid.dim() {
            if let Some(expr) = exprs.get(d).and_then(|e| e.as_ref()) {
                let comp = &mut field.components[d];
                grid.for_each_edge(d, |e, a, _| {
                    let pos = grid.edge_midpoint(d, a);
                    comp[e] = expr.eval(&pos[..grid.dim()]);
                });
            }
        }
        field
    }

    pub fn component(&self, axis: usize) -> &[f64] {
        &self.components[axis]
    }

    pub fn component_mut(&mut self, axis: usize) -> &mut [f64] {
        &mut self.components[axis]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.iter().all(|&v| v == 0.0))
    }
}

/// Divergence-form coefficient field `a_i(x, xi) = w_i(x) |xi|^(p_i-2) xi`,
/// with optional positive weights and growth offsets `d_i` for the hypothesis
/// checks.
#[derive(Debug, Clone)]
pub struct LerayLionsField {
    weights: Vec<Option<Expr>>,
    offsets: Vec<Option<Expr>>,
    /// Coercivity constant: a lower bound for the weights.
    pub lambda: f64,
    /// Growth constant: an upper bound for the weights.
    pub gamma: f64,
}

impl LerayLionsField {
    /// The unweighted model field (`lambda = gamma = 1`).
    pub fn model(dim: usize) -> Self {
        LerayLionsField {
            weights: vec![None; dim],
            offsets: vec![None; dim],
            lambda: 1.0,
            gamma: 1.0,
        }
    }

    pub fn with_weights(
        weights: Vec<Option<Expr>>,
        offsets: Vec<Option<Expr>>,
        lambda: f64,
        gamma: f64,
    ) -> Result<Self, BuildError> {
        if !(lambda > 0.0 && gamma >= lambda) {
            return Err(BuildError::Grid(format!(
                "field constants need 0 < lambda <= gamma, got {lambda}, {gamma}"
            )));
        }
        Ok(LerayLionsField {
            weights,
            offsets,
            lambda,
            gamma,
        })
    }

    pub fn weight(&self, axis: usize, x: &[f64]) -> f64 {
        match &self.weights[axis] {
            Some(e) => e.eval(x),
            None => 1.0,
        }
    }

    pub fn offset(&self, axis: usize, x: &[f64]) -> f64 {
        match &self.offsets[axis] {
            Some(e) => e.eval(x),
            None => 0.0,
        }
    }

    /// `a_i(x, xi)`.
    pub fn flux(&self, grid: &Grid, axis: usize, x: &[f64], xi: f64) -> f64 {
        let p = grid.exponents()[axis];
        self.weight(axis, x) * xi.abs().powf(p - 1.0) * xi.signum()
    }

    /// Derivative of the delta-regularized flux, for Newton linearization only.
    pub fn flux_slope(&self, grid: &Grid, axis: usize, x: &[f64], xi: f64) -> f64 {
        let p = grid.exponents()[axis];
        let d2 = GRADIENT_DELTA * GRADIENT_DELTA;
        let s2 = xi * xi + d2;
        let w = self.weight(axis, x);
        w * s2.powf(0.5 * (p - 4.0)) * ((p - 1.0) * xi * xi + d2)
    }

    /// Sample the coercivity bound `sum a_i(x, xi) xi >= lambda sum |xi|^p_i`.
    pub fn check_coercivity(&self, grid: &Grid, samples: &[(Vec<f64>, Vec<f64>)]) -> bool {
        samples.iter().all(|(x, xi)| {
            let lhs: f64 = (0..grid.dim())
                .map(|d| self.flux(grid, d, x, xi[d]) * xi[d])
                .sum();
            let rhs: f64 = (0..grid.dim())
                .map(|d| xi[d].abs().powf(grid.exponents()[d]))
                .sum();
            lhs + 1e-12 >= self.lambda * rhs
        })
    }

    /// Sample the growth bound `|a_i(x, xi)| <= gamma (d_i(x) + |xi|^(p_i-1))`.
    pub fn check_growth(&self, grid: &Grid, samples: &[(Vec<f64>, Vec<f64>)]) -> bool {
        samples.iter().all(|(x, xi)| {
            (0..grid.dim()).all(|d| {
                let a = self.flux(grid, d, x, xi[d]).abs();
                let bound =
                    self.gamma * (self.offset(d, x) + xi[d].abs().powf(grid.exponents()[d] - 1.0));
                a <= bound + 1e-12 * (1.0 + bound)
            })
        })
    }

    /// Sample the monotonicity bound `(a(x,xi)-a(x,eta)).(xi-eta) >= 0`.
    pub fn check_monotonicity(
        &self,
        grid: &Grid,
        samples: &[(Vec<f64>, Vec<f64>, Vec<f64>)],
    ) -> bool {
        samples.iter().all(|(x, xi, eta)| {
            let dot: f64 = (0..grid.dim())
                .map(|d| {
                    (self.flux(grid, d, x, xi[d]) - self.flux(grid, d, x, eta[d]))
                        * (xi[d] - eta[d])
                })
                .sum();
            dot >= -1e-12
        })
    }
}

/// Forward difference `(u(node + e_axis) - u(node)) / h_axis` on every
/// axis-`axis` edge; exact for affine nodal data.
pub fn derivative(grid: &Grid, u: &GridFunction, axis: usize) -> Vec<f64> {
    let h = grid.spacings()[axis];
    let mut out = vec![0.0; grid.edge_count(axis)];
    let v = u.values();
    grid.for_each_edge(axis, |e, a, b| {
        out[e] = (v[b] - v[a]) / h;
    });
    out
}

/// `sum_i (1/p_i) sum_edges |D^i u|^{p_i} * cellvolume`; zero iff `u == 0`.
pub fn anisotropic_energy(grid: &Grid, u: &GridFunction) -> f64 {
    let vol = grid.cell_volume();
    let mut total = 0.0;
    for d in 0..grid.dim() {
        let p = grid.exponents()[d];
        let der = derivative(grid, u, d);
        let s: f64 = der.iter().map(|&g| g.abs().powf(p)).sum();
        total += s * vol / p;
    }
    total
}

/// Discrete negative divergence of an edge field: at each interior node,
/// `sum_i (G_i(in-edge) - G_i(out-edge)) / h_i`; zero on the boundary.
pub fn neg_divergence(grid: &Grid, flux: &FluxField) -> Vec<f64> {
    let mut out = vec![0.0; grid.node_count()];
    for d in 0..grid.dim() {
        let h = grid.spacings()[d];
        let comp = flux.component(d);
        grid.for_each_edge(d, |e, a, b| {
            // the edge leaves `a` and enters `b`
            out[a] -= comp[e] / h;
            out[b] += comp[e] / h;
        });
    }
    for idx in 0..grid.node_count() {
        if grid.is_boundary(idx) {
            out[idx] = 0.0;
        }
    }
    out
}

/// Nodal values of `-div a(x, Du)`: the exact gradient (per cell volume) of
/// [`anisotropic_energy`] for the model field.
pub fn apply_operator(grid: &Grid, field: &LerayLionsField, u: &GridFunction) -> GridFunction {
    let mut flux = FluxField::zeros(grid);
    for d in 0..grid.dim() {
        let der = derivative(grid, u, d);
        let comp = flux.component_mut(d);
        grid.for_each_edge(d, |e, a, _| {
            let x = grid.edge_midpoint(d, a);
            comp[e] = field.flux(grid, d, &x[..grid.dim()], der[e]);
        });
    }
    GridFunction::from_values_unchecked(neg_divergence(grid, &flux))
}

/// Nodal inner product `sum_interior a b * cellvolume`.
pub fn node_inner(grid: &Grid, a: &[f64], b: &[f64]) -> f64 {
    let vol = grid.cell_volume();
    let mut acc = 0.0;
    for idx in 0..grid.node_count() {
        if !grid.is_boundary(idx) {
            acc += a[idx] * b[idx];
        }
    }
    acc * vol
}

/// `(sum_interior |v|^q * cellvolume)^(1/q)`.
pub fn lq_norm(grid: &Grid, v: &[f64], q: f64) -> f64 {
    let vol = grid.cell_volume();
    let mut acc = 0.0;
    for idx in 0..grid.node_count() {
        if !grid.is_boundary(idx) {
            acc += v[idx].abs().powf(q);
        }
    }
    (acc * vol).powf(1.0 / q)
}

/// `(sum_edges |g|^p * cellvolume)^(1/p)` over one axis component.
pub fn edge_lp_norm(grid: &Grid, edge_values: &[f64], p: f64) -> f64 {
    let vol = grid.cell_volume();
    let acc: f64 = edge_values.iter().map(|&g| g.abs().powf(p)).sum();
    (acc * vol).powf(1.0 / p)
}

/// Measured embedding ratios for one function: `||u||_q / ||D^i u||_{p_i}`
/// per axis and against the summed gradient norms (0/0 reported as 0).
#[derive(Debug, Clone)]
pub struct EmbeddingReport {
    pub q: f64,
    pub u_norm: f64,
    pub per_axis_ratio: Vec<f64>,
    pub sum_ratio: f64,
}

pub fn check_embeddings(grid: &Grid, u: &GridFunction, q: f64) -> EmbeddingReport {
    assert!(q >= 1.0, "embedding exponent must satisfy q >= 1");
    let u_norm = lq_norm(grid, u.values(), q);
    let grad_norms: Vec<f64> = (0..grid.dim())
        .map(|d| edge_lp_norm(grid, &derivative(grid, u, d), grid.exponents()[d]))
        .collect();
    let ratio = |den: f64| if den == 0.0 { 0.0 } else { u_norm / den };
    let sum: f64 = grad_norms.iter().sum();
    EmbeddingReport {
        q,
        u_norm,
        per_axis_ratio: grad_norms.iter().map(|&g| ratio(g)).collect(),
        sum_ratio: ratio(sum),
    }
}
