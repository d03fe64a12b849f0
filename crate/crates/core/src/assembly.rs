//! Finite-volume spatial operators: diagonal mass matrix, symmetric
//! tridiagonal stiffness matrix with the interface row, and their
//! matrix-vector products.

use std::fmt::Write as _;

use crate::model::{PhysicalParams, SpatialGrid};

/// Diagonal mass matrix: rho1 left of the interface, the average of the two
/// densities at it, rho2 right of it.
#[derive(Debug, Clone, PartialEq)]
pub struct MassMatrix {
    pub diag: Vec<f64>,
}

/// Symmetric tridiagonal stiffness matrix, stored as the main diagonal and
/// the single off-diagonal. `off[i]` couples nodes `i` and `i+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StiffnessMatrix {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

/// The pair of spatial operators a simulation needs.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialOperators {
    pub mass: MassMatrix,
    pub stiffness: StiffnessMatrix,
}

impl SpatialOperators {
    #[must_use]
    pub fn build(p: &PhysicalParams, g: &SpatialGrid) -> Self {
        SpatialOperators {
            mass: assemble_mass(p, g),
            stiffness: assemble_stiffness(p, g),
        }
    }
}

/// Builds the diagonal mass matrix for the two-material layout.
#[must_use]
pub fn assemble_mass(p: &PhysicalParams, g: &SpatialGrid) -> MassMatrix {
    let j = g.half_count;
    let mut diag = Vec::with_capacity(g.node_count());
    diag.resize(j, p.rho1);
    diag.push(0.5 * (p.rho1 + p.rho2));
    diag.resize(g.node_count(), p.rho2);
    MassMatrix { diag }
}

/// Builds the positive-definite stiffness matrix: second-difference blocks
/// scaled by k1 (left) and k2 (right), the interface row
/// (-k1, k1+k2, -k2)/dx^2, and zero Dirichlet ghost values at both ends.
#[must_use]
pub fn assemble_stiffness(p: &PhysicalParams, g: &SpatialGrid) -> StiffnessMatrix {
    let j = g.half_count;
    let n = g.node_count();
    let inv_dx2 = 1.0 / (g.dx * g.dx);
    let mut diag = Vec::with_capacity(n);
    let mut off = Vec::with_capacity(n - 1);
    for i in 0..n {
        if i < j {
            diag.push(2.0 * p.k1 * inv_dx2);
        } else if i == j {
            diag.push((p.k1 + p.k2) * inv_dx2);
        } else {
            diag.push(2.0 * p.k2 * inv_dx2);
        }
    }
    for i in 0..n - 1 {
        if i < j {
            off.push(-p.k1 * inv_dx2);
        } else {
            off.push(-p.k2 * inv_dx2);
        }
    }
    StiffnessMatrix { diag, off }
}

/// Tridiagonal matrix-vector product `K x` in O(J) time.
///
/// Panics if the vector length does not match the matrix dimension.
#[must_use]
pub fn apply_operator(k: &StiffnessMatrix, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; x.len()];
    apply_operator_into(k, x, &mut y);
    y
}

/// In-place variant of [`apply_operator`] for the stepper's hot loop.
pub fn apply_operator_into(k: &StiffnessMatrix, x: &[f64], y: &mut [f64]) {
    let n = k.diag.len();
    assert_eq!(x.len(), n, "operand length does not match matrix dimension");
    assert_eq!(y.len(), n, "output length does not match matrix dimension");
    for i in 0..n {
        let mut acc = k.diag[i] * x[i];
        if i > 0 {
            acc += k.off[i - 1] * x[i - 1];
        }
        if i + 1 < n {
            acc += k.off[i] * x[i + 1];
        }
        y[i] = acc;
    }
}

impl StiffnessMatrix {
    /// Dense expansion, for small-instance oracles and debug dumps.
    #[must_use]
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.diag.len();
        let mut rows = vec![vec![0.0; n]; n];
        for i in 0..n {
            rows[i][i] = self.diag[i];
            if i + 1 < n {
                rows[i][i + 1] = self.off[i];
                rows[i + 1][i] = self.off[i];
            }
        }
        rows
    }
}

/// Renders dense rows as CSV for test fixtures and debugging.
#[must_use]
pub fn dense_csv(rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for row in rows {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            let _ = write!(out, "{v}");
            first = false;
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(rho1: f64, rho2: f64, k1: f64, k2: f64) -> PhysicalParams {
        PhysicalParams {
            rho1,
            rho2,
            k1,
            k2,
            half_length: 1.0,
        }
    }

    #[test]
    fn mass_uniform_density_is_identity_diag() {
        let g = SpatialGrid::new(3, 1.0);
        let m = assemble_mass(&params(1.0, 1.0, 10.0, 2.0), &g);
        assert_eq!(m.diag, vec![1.0; 7]);
    }

    #[test]
    fn mass_two_material_layout() {
        let g = SpatialGrid::new(2, 1.0);
        let m = assemble_mass(&params(2.0, 4.0, 1.0, 1.0), &g);
        assert_eq!(m.diag, vec![2.0, 2.0, 3.0, 4.0, 4.0]);
    }

    #[test]
    fn mass_length_and_positivity() {
        let g = SpatialGrid::new(2, 1.0);
        let m = assemble_mass(&params(0.5, 7.0, 1.0, 1.0), &g);
        assert_eq!(m.diag.len(), 5);
        assert!(m.diag.iter().all(|&d| d > 0.0));
    }

    #[test]
    fn stiffness_homogeneous_is_second_difference() {
        let g = SpatialGrid::new(2, 2.0);
        assert_eq!(g.dx, 1.0);
        let k = assemble_stiffness(&params(1.0, 1.0, 1.0, 1.0), &g);
        assert_eq!(k.diag, vec![2.0; 5]);
        assert_eq!(k.off, vec![-1.0; 4]);
    }

    #[test]
    fn stiffness_interface_row() {
        let g = SpatialGrid::new(2, 1.0);
        assert_eq!(g.dx, 0.5);
        let k = assemble_stiffness(&params(1.0, 1.0, 10.0, 2.0), &g);
        assert_eq!(k.off[1], -40.0);
        assert_eq!(k.diag[2], 48.0);
        assert_eq!(k.off[2], -8.0);
        let dense = k.to_dense();
        assert_eq!(dense[2], vec![0.0, -40.0, 48.0, -8.0, 0.0]);
    }

    #[test]
    fn stiffness_is_positive_definite() {
        let g = SpatialGrid::new(5, 1.3);
        let k = assemble_stiffness(&params(1.0, 1.0, 3.0, 0.7), &g);
        let mut d = k.diag.clone();
        for i in 0..d.len() - 1 {
            assert!(d[i] > 0.0, "pivot {i} not positive");
            let l = k.off[i] / d[i];
            d[i + 1] -= l * k.off[i];
        }
        assert!(*d.last().unwrap() > 0.0);
    }

    #[test]
    fn apply_annihilates_interior_constants() {
        let g = SpatialGrid::new(2, 2.0);
        let k = assemble_stiffness(&params(1.0, 1.0, 1.0, 1.0), &g);
        let y = apply_operator(&k, &[1.0; 5]);
        assert_eq!(y, vec![1.0, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn apply_extracts_interface_column() {
        let g = SpatialGrid::new(2, 1.0);
        let k = assemble_stiffness(&params(1.0, 1.0, 10.0, 2.0), &g);
        let y = apply_operator(&k, &[0.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(y, vec![0.0, -40.0, 48.0, -8.0, 0.0]);
    }

    #[test]
    fn apply_zero_is_zero() {
        let g = SpatialGrid::new(4, 1.0);
        let k = assemble_stiffness(&params(1.0, 1.0, 2.0, 5.0), &g);
        assert_eq!(apply_operator(&k, &[0.0; 9]), vec![0.0; 9]);
    }

    #[test]
    fn interior_rows_approximate_second_derivative() {
        let error = |j: usize| {
            let g = SpatialGrid::new(j, 1.0);
            let p = params(1.0, 1.0, 10.0, 2.0);
            let k = assemble_stiffness(&p, &g);
            let l = p.half_length;
            let freq = std::f64::consts::PI / (2.0 * l);
            let w: Vec<f64> = (0..g.node_count())
                .map(|i| (freq * (g.node_x(i) + l)).sin())
                .collect();
            let kw = apply_operator(&k, &w);
            let mut worst = 0.0f64;
            for i in 2..g.node_count() - 2 {
                if i.abs_diff(g.interface_index()) < 2 {
                    continue;
                }
                let mat_k = if i < g.interface_index() { p.k1 } else { p.k2 };
                let exact = mat_k * freq * freq * w[i];
                worst = worst.max((kw[i] - exact).abs());
            }
            worst
        };
        let order = (error(40) / error(80)).log2();
        assert!(order >= 1.9, "observed order {order}");
    }

    #[test]
    fn dense_csv_renders_rows() {
        let g = SpatialGrid::new(2, 2.0);
        let k = assemble_stiffness(&params(1.0, 1.0, 1.0, 1.0), &g);
        let csv = dense_csv(&k.to_dense());
        assert!(csv.starts_with("2,-1,0,0,0\n"));
        assert_eq!(csv.lines().count(), 5);
    }

    proptest! {
        #[test]
        fn apply_is_symmetric(
            seed_x in proptest::collection::vec(-10.0f64..10.0, 9),
            seed_y in proptest::collection::vec(-10.0f64..10.0, 9),
        ) {
            let g = SpatialGrid::new(4, 1.0);
            let k = assemble_stiffness(&params(1.0, 1.0, 10.0, 2.0), &g);
            let kx = apply_operator(&k, &seed_x);
            let ky = apply_operator(&k, &seed_y);
            let xky: f64 = seed_x.iter().zip(&ky).map(|(a, b)| a * b).sum();
            let ykx: f64 = seed_y.iter().zip(&kx).map(|(a, b)| a * b).sum();
            let scale = xky.abs().max(ykx.abs()).max(1.0);
            prop_assert!((xky - ykx).abs() <= 1e-12 * scale);
        }
    }
}
