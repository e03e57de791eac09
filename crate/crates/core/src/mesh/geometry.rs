use super::{Mesh, MeshError, BOUNDARY};

/// Intercell normal distances below this fraction of the mesh size are
/// treated as a degenerate cell pair.
const DELTA_TOLERANCE: f64 = 1e-12;

/// Geometric quantities of a cell-centred finite-volume discretisation.
///
/// Per face `f` with owner `0` and neighbour `1`:
/// * `face_normals[f]` is the unit normal pointing from owner to neighbour
///   (outward for boundary faces);
/// * `face_tangents[f]` is the unit vector from the lower-index face vertex
///   to the higher-index one;
/// * `intercell[f]` is the vector from centroid 0 to centroid 1 (to the face
///   midpoint on the boundary), `delta[f] = l.n` and `tangent_dot[f] = t.l`;
/// * `face_weights[f]` is the inverse-distance weight of the owner in the
///   two-point face interpolation `w q0 + (1 - w) q1` (1 on the boundary).
///
/// `node_weights[v]` holds `(cell, w)` pairs for the inverse-distance
/// average of cell values at vertex `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshGeometry {
    mesh: Mesh,
    pub cell_centroids: Vec<[f64; 2]>,
    pub cell_areas: Vec<f64>,
    pub face_midpoints: Vec<[f64; 2]>,
    pub face_areas: Vec<f64>,
    pub face_normals: Vec<[f64; 2]>,
    pub face_tangents: Vec<[f64; 2]>,
    pub intercell: Vec<[f64; 2]>,
    pub delta: Vec<f64>,
    pub tangent_dot: Vec<f64>,
    pub face_weights: Vec<f64>,
    pub node_weights: Vec<Vec<(usize, f64)>>,
}

#[inline]
fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
fn norm(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

pub fn compute_geometry(mesh: Mesh) -> Result<MeshGeometry, MeshError> {
    let nodes = &mesh.raw.nodes;
    let n_cells = mesh.n_cells();
    let n_faces = mesh.n_faces();

    let mut cell_centroids = Vec::with_capacity(n_cells);
    let mut cell_areas = Vec::with_capacity(n_cells);
    for (ci, &[a, b, c]) in mesh.raw.cells.iter().enumerate() {
        let (pa, pb, pc) = (nodes[a], nodes[b], nodes[c]);
        cell_centroids.push([(pa[0] + pb[0] + pc[0]) / 3.0, (pa[1] + pb[1] + pc[1]) / 3.0]);
        cell_areas.push(mesh.raw.cell_area(ci));
    }

    let scale = cell_areas.iter().sum::<f64>().sqrt();

    let mut face_midpoints = Vec::with_capacity(n_faces);
    let mut face_areas = Vec::with_capacity(n_faces);
    let mut face_normals = Vec::with_capacity(n_faces);
    let mut face_tangents = Vec::with_capacity(n_faces);
    let mut intercell = Vec::with_capacity(n_faces);
    let mut delta = Vec::with_capacity(n_faces);
    let mut tangent_dot = Vec::with_capacity(n_faces);
    let mut face_weights = Vec::with_capacity(n_faces);

    for (f, &[lo, hi]) in mesh.faces.iter().enumerate() {
        let (pa, pb) = (nodes[lo], nodes[hi]);
        let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
        let edge = sub(pb, pa);
        let len = norm(edge);
        let t = [edge[0] / len, edge[1] / len];
        let [owner, neighbour] = mesh.face_cells[f];
        let c0 = cell_centroids[owner];
        let (l, w) = if neighbour == BOUNDARY {
            (sub(mid, c0), 1.0)
        } else {
            let c1 = cell_centroids[neighbour];
            let d0 = norm(sub(mid, c0));
            let d1 = norm(sub(mid, c1));
            (sub(c1, c0), d1 / (d0 + d1))
        };
        // the normal is fixed by the face, its sign by the owner side
        let mut n = [t[1], -t[0]];
        if dot(n, sub(mid, c0)) < 0.0 {
            n = [-n[0], -n[1]];
        }
        let d = dot(l, n);
        if neighbour != BOUNDARY && !(d > DELTA_TOLERANCE * scale) {
            return Err(MeshError::DegenerateFacePair { face: f, delta: d });
        }
        face_midpoints.push(mid);
        face_areas.push(len);
        face_normals.push(n);
        face_tangents.push(t);
        intercell.push(l);
        delta.push(d);
        tangent_dot.push(dot(t, l));
        face_weights.push(w);
    }

    let node_weights = mesh
        .vertex_cells
        .iter()
        .enumerate()
        .map(|(v, cells)| {
            let inv: Vec<f64> = cells
                .iter()
                .map(|&c| 1.0 / norm(sub(cell_centroids[c], nodes[v])))
                .collect();
            let total: f64 = inv.iter().sum();
            cells.iter().zip(&inv).map(|(&c, &i)| (c, i / total)).collect()
        })
        .collect();

    Ok(MeshGeometry {
        mesh,
        cell_centroids,
        cell_areas,
        face_midpoints,
        face_areas,
        face_normals,
        face_tangents,
        intercell,
        delta,
        tangent_dot,
        face_weights,
        node_weights,
    })
}

impl MeshGeometry {
    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn n_cells(&self) -> usize {
        self.mesh.n_cells()
    }

    /// `+1` if the stored normal of `face` points out of `cell`, `-1` otherwise.
    pub fn orientation(&self, cell: usize, face: usize) -> f64 {
        if self.mesh.face_cells[face][0] == cell {
            1.0
        } else {
            -1.0
        }
    }

    /// Cells that touch no boundary face.
    pub fn interior_cells(&self) -> Vec<usize> {
        (0..self.n_cells())
            .filter(|&c| self.mesh.cell_faces[c].iter().all(|&f| !self.mesh.is_boundary_face(f)))
            .collect()
    }

    /// Cells that touch no boundary vertex.
    pub fn cells_away_from_boundary(&self) -> Vec<usize> {
        let mut on_boundary = vec![false; self.mesh.n_nodes()];
        for (f, &[a, b]) in self.mesh.faces.iter().enumerate() {
            if self.mesh.is_boundary_face(f) {
                on_boundary[a] = true;
                on_boundary[b] = true;
            }
        }
        (0..self.n_cells())
            .filter(|&c| self.mesh.raw.cells[c].iter().all(|&v| !on_boundary[v]))
            .collect()
    }
}
