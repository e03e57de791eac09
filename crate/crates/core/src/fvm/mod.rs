//! Finite-volume assembly of the discrete linear operators of the lifted
//! system: the diffusion operator (two-point normal flux plus the
//! tangential correction through inverse-distance vertex values) and the
//! directional gradient operators. Boundary faces contribute nothing; their
//! effect is absorbed by the right-hand side recovered from snapshots.
//!
//! All operators are in integral form: row `c` approximates the surface
//! integral over the boundary of cell `c`, without division by its area.

mod block;
mod sparse;

use crate::mesh::{MeshGeometry, BOUNDARY};

pub use block::{canonical_operator, euler_operator, recover_rhs, Block, BlockOperator, MassScaling};
pub use sparse::{OperatorKind, SparseOperator, TripletBuilder};

#[derive(Debug, thiserror::Error)]
pub enum FvmError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("entry ({row}, {col}) outside a {n_rows}x{n_cols} operator")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        n_rows: usize,
        n_cols: usize,
    },
    #[error("diffusion coefficient must be positive, got {value} in cell {cell}")]
    NonPositiveCoefficient { cell: usize, value: f64 },
    #[error("block layout: {0}")]
    BlockLayout(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

const ORTHOGONAL_TOLERANCE: f64 = 1e-12;

/// One value per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(geom: &MeshGeometry, values: Vec<f64>) -> Result<Self, FvmError> {
        if values.len() != geom.n_cells() {
            return Err(FvmError::DimensionMismatch {
                expected: geom.n_cells(),
                found: values.len(),
            });
        }
        Ok(Self { values })
    }

    pub fn constant(geom: &MeshGeometry, value: f64) -> Self {
        Self {
            values: vec![value; geom.n_cells()],
        }
    }

    /// Samples `f` at the cell centroids.
    pub fn from_fn(geom: &MeshGeometry, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            values: geom.cell_centroids.iter().map(|c| f(c[0], c[1])).collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Axis of a gradient operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Diffusion operator `div(gamma grad u)` in integral form.
///
/// For each interior face with owner 0 and neighbour 1 the flux
///
/// ```text
/// F = G_f A_f / d_f * [ (u1 - u0) - (u_a - u_b) (t.l) / A_f ]
/// ```
///
/// is added to row 0 and subtracted from row 1, where `a`/`b` are the
/// higher/lower-index face vertices and the vertex values are
/// inverse-distance averages of the surrounding cells. `G_f` is the
/// inverse-distance face interpolation of `gamma`.
pub fn assemble_diffusion(geom: &MeshGeometry, gamma: &ScalarField) -> Result<SparseOperator, FvmError> {
    let mesh = geom.mesh();
    let n = geom.n_cells();
    if gamma.values.len() != n {
        return Err(FvmError::DimensionMismatch {
            expected: n,
            found: gamma.values.len(),
        });
    }
    if let Some((cell, &value)) = gamma.values.iter().enumerate().find(|(_, &g)| !(g > 0.0)) {
        return Err(FvmError::NonPositiveCoefficient { cell, value });
    }

    let mut b = TripletBuilder::with_capacity(n, n, 30 * n);
    for f in 0..mesh.n_faces() {
        let [o, nb] = mesh.face_cells[f];
        if nb == BOUNDARY {
            continue;
        }
        let w = geom.face_weights[f];
        let gamma_f = w * gamma.values[o] + (1.0 - w) * gamma.values[nb];
        let coef = gamma_f * geom.face_areas[f] / geom.delta[f];
        b.push(o, nb, coef);
        b.push(o, o, -coef);
        b.push(nb, o, coef);
        b.push(nb, nb, -coef);

        let td = geom.tangent_dot[f];
        // orthogonal pairs: t.l is pure round-off
        let l = geom.intercell[f];
        if td.abs() > ORTHOGONAL_TOLERANCE * l[0].hypot(l[1]) {
            let tang = coef * td / geom.face_areas[f];
            let [lo, hi] = mesh.faces[f];
            for &(c, wv) in &geom.node_weights[hi] {
                b.push(o, c, -tang * wv);
                b.push(nb, c, tang * wv);
            }
            for &(c, wv) in &geom.node_weights[lo] {
                b.push(o, c, tang * wv);
                b.push(nb, c, -tang * wv);
            }
        }
    }
    b.build(OperatorKind::Diffusion)
}

/// Gradient component `d/dx` or `d/dy` in integral (Gauss) form: each
/// interior face adds `+-q_f n_axis A_f` to its two cells, with
/// `q_f = w q0 + (1 - w) q1`.
pub fn assemble_gradient(geom: &MeshGeometry, axis: Axis) -> Result<SparseOperator, FvmError> {
    let mesh = geom.mesh();
    let n = geom.n_cells();
    let k = match axis {
        Axis::X => 0,
        Axis::Y => 1,
    };
    let mut b = TripletBuilder::with_capacity(n, n, 4 * mesh.n_faces());
    for f in 0..mesh.n_faces() {
        let [o, nb] = mesh.face_cells[f];
        if nb == BOUNDARY {
            continue;
        }
        let s = geom.face_normals[f][k] * geom.face_areas[f];
        let w = geom.face_weights[f];
        b.push(o, o, w * s);
        b.push(o, nb, (1.0 - w) * s);
        b.push(nb, o, -w * s);
        b.push(nb, nb, -(1.0 - w) * s);
    }
    b.build(match axis {
        Axis::X => OperatorKind::GradX,
        Axis::Y => OperatorKind::GradY,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{
        build_connectivity, compute_geometry, crossed_unit_square, perturbed, right_triangle_unit_square, RawMesh,
    };

    fn geometry(raw: RawMesh) -> MeshGeometry {
        compute_geometry(build_connectivity(raw).unwrap()).unwrap()
    }

    #[test]
    fn diffusion_annihilates_constants() {
        let g = geometry(perturbed(&crossed_unit_square(6), 0.02, 1));
        let gamma = ScalarField::from_fn(&g, |x, y| 1.0 + x * y);
        let a = assemble_diffusion(&g, &gamma).unwrap();
        let scale = a.triplets().map(|(_, _, v)| v.abs()).fold(0.0, f64::max);
        for c in [1.0, -3.5, 1e3] {
            let r = a.apply(&vec![c; g.n_cells()]).unwrap();
            let worst = r.iter().map(|v| v.abs()).fold(0.0, f64::max);
            assert!(worst <= 1e-13 * scale * c.abs(), "{worst}");
        }
    }

    #[test]
    fn rejects_non_positive_gamma() {
        let g = geometry(crossed_unit_square(2));
        let mut vals = vec![1.0; g.n_cells()];
        vals[3] = 0.0;
        let gamma = ScalarField::new(&g, vals).unwrap();
        assert!(matches!(
            assemble_diffusion(&g, &gamma),
            Err(FvmError::NonPositiveCoefficient { cell: 3, .. })
        ));
        assert!(ScalarField::new(&g, vec![1.0; 2]).is_err());
    }

    #[test]
    fn crossed_mesh_reduces_to_central_differences() {
        let g = geometry(crossed_unit_square(4));
        for f in 0..g.mesh().n_faces() {
            assert!(g.tangent_dot[f].abs() < 1e-15);
        }
        let a = assemble_diffusion(&g, &ScalarField::constant(&g, 1.0)).unwrap();
        for f in 0..g.mesh().n_faces() {
            let [o, nb] = g.mesh().face_cells[f];
            if nb == BOUNDARY {
                continue;
            }
            let expected = g.face_areas[f] / g.delta[f];
            assert!((a.get(o, nb) - expected).abs() < 1e-12);
        }
        // only face neighbours couple
        for (r, c, _) in a.triplets() {
            assert!(r == c || g.mesh().face_neighbours(r).any(|x| x == c));
        }
    }

    #[test]
    fn couplings_are_local() {
        let g = geometry(perturbed(&right_triangle_unit_square(5), 0.03, 9));
        let a = assemble_diffusion(&g, &ScalarField::constant(&g, 1.0)).unwrap();
        let mesh = g.mesh();
        for (r, c, _) in a.triplets() {
            let shares_vertex = mesh.raw.cells[r].iter().any(|v| mesh.raw.cells[c].contains(v));
            assert!(shares_vertex, "({r}, {c})");
        }
        let max_vertex_valence = mesh.vertex_cells.iter().map(Vec::len).max().unwrap();
        assert!(a.max_row_nnz() <= 3 + 3 * max_vertex_valence);
    }

    #[test]
    fn gradient_of_constant_vanishes_on_interior_cells() {
        let g = geometry(perturbed(&crossed_unit_square(5), 0.02, 4));
        for axis in [Axis::X, Axis::Y] {
            let op = assemble_gradient(&g, axis).unwrap();
            let r = op.apply(&vec![2.5; g.n_cells()]).unwrap();
            for c in g.interior_cells() {
                assert!(r[c].abs() < 1e-14, "{axis:?} cell {c}: {}", r[c]);
            }
        }
    }
}
