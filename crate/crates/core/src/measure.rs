//! Diffuse measure data `mu = f - div F` (plus nodal point masses on 1D
//! grids), its truncation-based regularization, and duality pairings against
//! grid functions with zero trace.

use crate::calculus::truncate;
use crate::error::BuildError;
use crate::grid::{derivative, neg_divergence, FluxField, Grid, GridFunction};

/// Measure data as a nodal density, a staggered flux field and optional
/// point masses. Point masses are only admissible on 1D grids, where a point
/// carries positive capacity; in 2D they are rejected.
#[derive(Debug, Clone)]
pub struct MeasureData {
    density: Vec<f64>,
    flux: FluxField,
    atoms: Vec<(usize, f64)>,
}

impl MeasureData {
    pub fn new(
        grid: &Grid,
        density: Vec<f64>,
        flux: FluxField,
        atoms: Vec<(usize, f64)>,
    ) -> Result<Self, BuildError> {
        if density.len() != grid.node_count() {
            return Err(BuildError::Measure(format!(
                "density length {} does not match node count {}",
                density.len(),
                grid.node_count()
            )));
        }
        if density.iter().any(|v| !v.is_finite()) {
            return Err(BuildError::Measure("density must be finite".into()));
        }
        if !atoms.is_empty() && grid.dim() != 1 {
            return Err(BuildError::Measure(
                "point masses are only diffuse on 1D grids (a point in 2D has vanishing \
                 capacity), so atoms are rejected here"
                    .into(),
            ));
        }
        for &(idx, weight) in &atoms {
            if idx >= grid.node_count() {
                return Err(BuildError::Measure(format!("atom node {idx} out of range")));
            }
            if grid.is_boundary(idx) {
                return Err(BuildError::Measure(format!(
                    "atom node {idx} lies on the boundary"
                )));
            }
            if !weight.is_finite() {
                return Err(BuildError::Measure("atom weight must be finite".into()));
            }
        }
        Ok(MeasureData {
            density,
            flux,
            atoms,
        })
    }

    pub fn zero(grid: &Grid) -> Self {
        MeasureData {
            density: vec![0.0; grid.node_count()],
            flux: FluxField::zeros(grid),
            atoms: Vec::new(),
        }
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn flux(&self) -> &FluxField {
        &self.flux
    }

    pub fn atoms(&self) -> &[(usize, f64)] {
        &self.atoms
    }

    /// `sum f v + sum_i F_i D^i v + sum_atoms weight * v(node)` with the cell
    /// volume quadrature.
    pub fn pairing(&self, grid: &Grid, v: &GridFunction) -> f64 {
        let vol = grid.cell_volume();
        let mut acc = 0.0;
        let vv = v.values();
        for idx in 0..grid.node_count() {
            if !grid.is_boundary(idx) {
                acc += self.density[idx] * vv[idx];
            }
        }
        acc *= vol;
        for d in 0..grid.dim() {
            let der = derivative(grid, v, d);
            let fcomp = self.flux.component(d);
            acc += fcomp.iter().zip(&der).map(|(f, dv)| f * dv).sum::<f64>() * vol;
        }
        for &(idx, weight) in &self.atoms {
            acc += weight * vv[idx];
        }
        acc
    }

    /// Truncate the density at `1/eps`; flux and atoms are untouched.
    pub fn regularize(&self, eps: f64) -> MeasureData {
        assert!(eps > 0.0, "regularize needs eps > 0");
        let cap = 1.0 / eps;
        MeasureData {
            density: self.density.iter().map(|&f| truncate(cap, f)).collect(),
            flux: self.flux.clone(),
            atoms: self.atoms.clone(),
        }
    }

    /// Total-variation proxy: `sum |f| + sum |div_h F| + sum |atom weights|`.
    /// Dominates `|pairing(mu, v)|` over `||v||_inf <= 1`.
    pub fn variation(&self, grid: &Grid) -> f64 {
        let vol = grid.cell_volume();
        let mut acc = 0.0;
        for idx in 0..grid.node_count() {
            if !grid.is_boundary(idx) {
                acc += self.density[idx].abs();
            }
        }
        let div = neg_divergence(grid, &self.flux);
        for idx in 0..grid.node_count() {
            if !grid.is_boundary(idx) {
                acc += div[idx].abs();
            }
        }
        acc *= vol;
        acc + self.atoms.iter().map(|(_, w)| w.abs()).sum::<f64>()
    }

    /// Equivalent nodal density: `f + (-div_h F) + atoms / cellvolume`. The
    /// pairing equals the nodal inner product against this density, by the
    /// exactness of discrete integration by parts.
    pub fn nodal_density(&self, grid: &Grid) -> Vec<f64> {
        let vol = grid.cell_volume();
        let mut out = neg_divergence(grid, &self.flux);
        for idx in 0..grid.node_count() {
            if grid.is_boundary(idx) {
                out[idx] = 0.0;
            } else {
                out[idx] += self.density[idx];
            }
        }
        for &(idx, weight) in &self.atoms {
            out[idx] += weight / vol;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{edge_lp_norm, node_inner};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn grid_1d(n: usize) -> Grid {
        Grid::new(&[n], &[1.0], &[2.0]).unwrap()
    }

    #[test]
    fn pairing_examples() {
        let g = grid_1d(129);
        let atom_node = 64; // x = 0.5
        let mu = MeasureData::new(
            &g,
            vec![0.0; 129],
            FluxField::zeros(&g),
            vec![(atom_node, 1.0)],
        )
        .unwrap();
        let zero = GridFunction::zeros(&g);
        assert_eq!(mu.pairing(&g, &zero), 0.0);
        let v = GridFunction::from_fn(&g, |x| x[0] * (1.0 - x[0]));
        assert!((mu.pairing(&g, &v) - 0.25).abs() < 1e-12);

        let ones = MeasureData::new(&g, vec![1.0; 129], FluxField::zeros(&g), vec![]).unwrap();
        let vone = GridFunction::from_fn(&g, |_| 1.0);
        let val = ones.pairing(&g, &vone);
        assert!(
            (val - 1.0).abs() < 2.0 * g.spacings()[0],
            "boundary-layer error only: {val}"
        );
    }

    #[test]
    fn regularize_truncates_density_only() {
        let g = grid_1d(9);
        let mu =
            MeasureData::new(&g, vec![100.0; 9], FluxField::zeros(&g), vec![(4, -2.0)]).unwrap();
        let reg = mu.regularize(0.1);
        assert!(reg.density().iter().all(|&f| f == 10.0));
        assert_eq!(reg.atoms(), &[(4, -2.0)]);

        let small = MeasureData::new(&g, vec![0.5; 9], FluxField::zeros(&g), vec![]).unwrap();
        let reg = small.regularize(0.5);
        assert_eq!(reg.density(), small.density());
    }

    #[test]
    fn regularized_pairing_converges() {
        let g = grid_1d(33);
        let mu = MeasureData::new(
            &g,
            (0..33)
                .map(|i| ((i * 37 % 11) as f64 - 5.0) * 3.0)
                .collect(),
            FluxField::zeros(&g),
            vec![],
        )
        .unwrap();
        let v = GridFunction::from_fn(&g, |x| (std::f64::consts::PI * x[0]).sin());
        let exact = mu.pairing(&g, &v);
        let mut prev = f64::INFINITY;
        for &eps in &[1.0, 0.5, 0.25, 0.125, 0.01] {
            let gap = (mu.regularize(eps).pairing(&g, &v) - exact).abs();
            assert!(gap <= prev + 1e-14);
            prev = gap;
        }
        assert!(prev < 1e-14, "truncation eventually inactive");
    }

    #[test]
    fn variation_examples() {
        let g = grid_1d(17);
        assert_eq!(MeasureData::zero(&g).variation(&g), 0.0);
        let atom =
            MeasureData::new(&g, vec![0.0; 17], FluxField::zeros(&g), vec![(8, -2.0)]).unwrap();
        assert_eq!(atom.variation(&g), 2.0);
        let ones = MeasureData::new(&g, vec![1.0; 17], FluxField::zeros(&g), vec![]).unwrap();
        let v = ones.variation(&g);
        assert!((v - 1.0).abs() < 2.0 * g.spacings()[0]);
    }

    #[test]
    fn atoms_rejected_in_2d_and_on_boundary() {
        let g2 = Grid::new(&[5, 5], &[1.0, 1.0], &[2.0, 2.0]).unwrap();
        let err = MeasureData::new(&g2, vec![0.0; 25], FluxField::zeros(&g2), vec![(12, 1.0)]);
        assert!(err.is_err());
        let msg = format!("{}", err.unwrap_err());
        assert!(
            msg.contains("capacity"),
            "message should explain diffuseness: {msg}"
        );

        let g1 = grid_1d(9);
        assert!(
            MeasureData::new(&g1, vec![0.0; 9], FluxField::zeros(&g1), vec![(0, 1.0)]).is_err()
        );
    }

    #[test]
    fn pairing_bounded_by_variation_and_hoelder() {
        let g = Grid::new(&[9, 9], &[1.0, 1.0], &[2.0, 3.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let density: Vec<f64> = (0..81).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let mut flux = FluxField::zeros(&g);
        for d in 0..2 {
            for v in flux.component_mut(d) {
                *v = rng.gen_range(-2.0..2.0);
            }
        }
        let mu = MeasureData::new(&g, density, flux, vec![]).unwrap();
        let var = mu.variation(&g);
        for _ in 0..25 {
            let v = GridFunction::from_fn(&g, |_| rng.gen_range(-1.5..1.5));
            let vmax = v.max_abs();
            let mut hoelder = 0.0;
            for d in 0..2 {
                let p = g.exponents()[d];
                let pp = p / (p - 1.0);
                hoelder += edge_lp_norm(&g, mu.flux().component(d), pp)
                    * edge_lp_norm(&g, &derivative(&g, &v, d), p);
            }
            let bound = var * vmax + hoelder;
            assert!(mu.pairing(&g, &v).abs() <= bound + 1e-10 * (1.0 + bound));
        }
    }

    #[test]
    fn truncated_pairing_bounded_by_k_variation() {
        let g = grid_1d(33);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let density: Vec<f64> = (0..33).map(|_| rng.gen_range(-4.0..4.0)).collect();
        let mut flux = FluxField::zeros(&g);
        for v in flux.component_mut(0) {
            *v = rng.gen_range(-1.0..1.0);
        }
        let mu = MeasureData::new(&g, density, flux, vec![(16, 1.5)]).unwrap();
        let var = mu.variation(&g);
        for _ in 0..20 {
            let v = GridFunction::from_fn(&g, |_| rng.gen_range(-5.0..5.0));
            for &k in &[0.25, 1.0, 3.0] {
                let tk = v.map_zero_preserving(|r| crate::calculus::truncate(k, r));
                assert!(mu.pairing(&g, &tk) <= k * var + 1e-10 * (1.0 + k * var));
            }
        }
    }

    #[test]
    fn nodal_density_reproduces_pairing() {
        let g = Grid::new(&[7, 8], &[1.0, 2.0], &[2.0, 2.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let density: Vec<f64> = (0..56).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut flux = FluxField::zeros(&g);
        for d in 0..2 {
            for v in flux.component_mut(d) {
                *v = rng.gen_range(-1.0..1.0);
            }
        }
        let mu = MeasureData::new(&g, density, flux, vec![]).unwrap();
        let nodal = mu.nodal_density(&g);
        for _ in 0..10 {
            let v = GridFunction::from_fn(&g, |_| rng.gen_range(-1.0..1.0));
            let direct = mu.pairing(&g, &v);
            let via_nodal = node_inner(&g, &nodal, v.values());
            assert!((direct - via_nodal).abs() < 1e-12 * (1.0 + direct.abs()));
        }
    }
}
