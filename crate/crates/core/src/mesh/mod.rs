//! Unstructured 2D triangular meshes: ingestion, connectivity and the
//! geometric quantities needed by the cell-centred finite-volume operators.
//!
//! The pipeline is `RawMesh` (nodes + cells as read from disk) ->
//! [`Mesh`] (face enumeration, face/cell/vertex adjacency) ->
//! [`MeshGeometry`] (centroids, normals, intercell vectors, interpolants).
//! All three are immutable once built.

mod fixtures;
mod geometry;
mod io;

use std::collections::{BTreeMap, HashMap};

pub use fixtures::{crossed_unit_square, perturbed, right_triangle_unit_square};
pub use geometry::{compute_geometry, MeshGeometry};
pub use io::{load_mesh, parse_mesh, save_mesh, write_mesh};

/// Sentinel used in [`Mesh::face_cells`] for the missing neighbour of a
/// boundary face.
pub const BOUNDARY: usize = usize::MAX;

/// Relative area below which a cell is rejected as degenerate.
const DEGENERATE_AREA_RATIO: f64 = 1e-14;

#[derive(Debug, thiserror::Error)]
pub enum MeshError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("cell {cell} references vertex {vertex}, but the mesh has {n_nodes} nodes")]
    VertexOutOfRange { cell: usize, vertex: usize, n_nodes: usize },
    #[error("cell {cell} repeats a vertex: {vertices:?}")]
    RepeatedVertex { cell: usize, vertices: [usize; 3] },
    #[error("cell {cell} is degenerate (area {area:e})")]
    DegenerateCell { cell: usize, area: f64 },
    #[error("cells {first} and {second} are duplicates")]
    DuplicateCell { first: usize, second: usize },
    #[error("face ({0}, {1}) is shared by more than two cells")]
    NonManifoldFace(usize, usize),
    #[error("boundary tag on ({0}, {1}) does not name a boundary face")]
    UnknownBoundaryFace(usize, usize),
    #[error("face {face}: intercell normal distance {delta:e} is not positive")]
    DegenerateFacePair { face: usize, delta: f64 },
    #[error("mesh has no cells")]
    Empty,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Nodes and triangles as ingested, with cells normalised to
/// counter-clockwise orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct RawMesh {
    pub nodes: Vec<[f64; 2]>,
    pub cells: Vec<[usize; 3]>,
    /// Optional tags keyed by the sorted vertex pair of a boundary face.
    pub boundary_tags: BTreeMap<[usize; 2], String>,
}

fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

impl RawMesh {
    /// Validates and normalises a triangle soup.
    pub fn new(nodes: Vec<[f64; 2]>, cells: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        Self::with_tags(nodes, cells, BTreeMap::new())
    }

    pub fn with_tags(
        nodes: Vec<[f64; 2]>,
        mut cells: Vec<[usize; 3]>,
        boundary_tags: BTreeMap<[usize; 2], String>,
    ) -> Result<Self, MeshError> {
        if cells.is_empty() {
            return Err(MeshError::Empty);
        }
        let n_nodes = nodes.len();
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in &nodes {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        let bbox_area = (hi[0] - lo[0]) * (hi[1] - lo[1]);

        let mut seen: HashMap<[usize; 3], usize> = HashMap::with_capacity(cells.len());
        for (ci, cell) in cells.iter_mut().enumerate() {
            for &v in cell.iter() {
                if v >= n_nodes {
                    return Err(MeshError::VertexOutOfRange {
                        cell: ci,
                        vertex: v,
                        n_nodes,
                    });
                }
            }
            if cell[0] == cell[1] || cell[1] == cell[2] || cell[0] == cell[2] {
                return Err(MeshError::RepeatedVertex {
                    cell: ci,
                    vertices: *cell,
                });
            }
            let area = signed_area(nodes[cell[0]], nodes[cell[1]], nodes[cell[2]]);
            if !(area.abs() >= DEGENERATE_AREA_RATIO * bbox_area) || area == 0.0 {
                return Err(MeshError::DegenerateCell { cell: ci, area });
            }
            if area < 0.0 {
                cell.swap(1, 2);
            }
            let mut key = *cell;
            key.sort_unstable();
            if let Some(&first) = seen.get(&key) {
                return Err(MeshError::DuplicateCell { first, second: ci });
            }
            seen.insert(key, ci);
        }
        Ok(Self {
            nodes,
            cells,
            boundary_tags,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_area(&self, cell: usize) -> f64 {
        let [a, b, c] = self.cells[cell];
        signed_area(self.nodes[a], self.nodes[b], self.nodes[c])
    }
}

/// A mesh with full face/cell/vertex connectivity.
///
/// Faces are the sorted vertex pairs of all cell edges, enumerated in
/// lexicographic order. `face_cells[f][0]` is the owner (lower cell index)
/// and `face_cells[f][1]` the neighbour, or [`BOUNDARY`].
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub raw: RawMesh,
    pub faces: Vec<[usize; 2]>,
    pub face_cells: Vec<[usize; 2]>,
    pub cell_faces: Vec<[usize; 3]>,
    pub vertex_cells: Vec<Vec<usize>>,
}

pub fn build_connectivity(raw: RawMesh) -> Result<Mesh, MeshError> {
    let n_cells = raw.cells.len();
    let mut edges: Vec<([usize; 2], usize)> = Vec::with_capacity(3 * n_cells);
    for (ci, cell) in raw.cells.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (cell[k], cell[(k + 1) % 3]);
            edges.push(([a.min(b), a.max(b)], ci));
        }
    }
    edges.sort_unstable();

    let mut faces = Vec::with_capacity(edges.len() / 2 + 1);
    let mut face_cells = Vec::with_capacity(edges.len() / 2 + 1);
    let mut cell_faces = vec![[usize::MAX; 3]; n_cells];
    let mut fill = vec![0usize; n_cells];
    let mut i = 0;
    while i < edges.len() {
        let key = edges[i].0;
        let mut j = i + 1;
        while j < edges.len() && edges[j].0 == key {
            j += 1;
        }
        if j - i > 2 {
            return Err(MeshError::NonManifoldFace(key[0], key[1]));
        }
        let f = faces.len();
        faces.push(key);
        // edges are sorted by (key, cell), so the owner comes first
        let owner = edges[i].1;
        let neighbour = if j - i == 2 { edges[i + 1].1 } else { BOUNDARY };
        face_cells.push([owner, neighbour]);
        for &(_, c) in &edges[i..j] {
            cell_faces[c][fill[c]] = f;
            fill[c] += 1;
        }
        i = j;
    }

    for key in raw.boundary_tags.keys() {
        let ok = faces
            .binary_search(key)
            .map(|f| face_cells[f][1] == BOUNDARY)
            .unwrap_or(false);
        if !ok {
            return Err(MeshError::UnknownBoundaryFace(key[0], key[1]));
        }
    }

    let mut vertex_cells = vec![Vec::new(); raw.nodes.len()];
    for (ci, cell) in raw.cells.iter().enumerate() {
        for &v in cell {
            vertex_cells[v].push(ci);
        }
    }

    Ok(Mesh {
        raw,
        faces,
        face_cells,
        cell_faces,
        vertex_cells,
    })
}

impl Mesh {
    pub fn n_cells(&self) -> usize {
        self.raw.cells.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.raw.nodes.len()
    }

    pub fn is_boundary_face(&self, face: usize) -> bool {
        self.face_cells[face][1] == BOUNDARY
    }

    pub fn n_boundary_faces(&self) -> usize {
        self.face_cells.iter().filter(|fc| fc[1] == BOUNDARY).count()
    }

    pub fn n_interior_faces(&self) -> usize {
        self.n_faces() - self.n_boundary_faces()
    }

    /// Tag of a boundary face, if one was supplied.
    pub fn boundary_tag(&self, face: usize) -> Option<&str> {
        self.raw.boundary_tags.get(&self.faces[face]).map(String::as_str)
    }

    /// Cells that share at least one face with `cell`.
    pub fn face_neighbours(&self, cell: usize) -> impl Iterator<Item = usize> + '_ {
        self.cell_faces[cell].iter().filter_map(move |&f| {
            let [o, n] = self.face_cells[f];
            if n == BOUNDARY {
                None
            } else if o == cell {
                Some(n)
            } else {
                Some(o)
            }
        })
    }
}
