//! Structured triangulations of the unit square used as test fixtures and
//! for the reference experiment. These are not a general mesh generator.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::RawMesh;

fn tag_square_boundary(nodes: &[[f64; 2]], cells: &[[usize; 3]]) -> BTreeMap<[usize; 2], String> {
    let mut tags = BTreeMap::new();
    let on = |v: f64, t: f64| (v - t).abs() < 1e-12;
    for cell in cells {
        for k in 0..3 {
            let (a, b) = (cell[k], cell[(k + 1) % 3]);
            let (pa, pb) = (nodes[a], nodes[b]);
            let tag = if on(pa[1], 0.0) && on(pb[1], 0.0) {
                "bottom"
            } else if on(pa[0], 1.0) && on(pb[0], 1.0) {
                "right"
            } else if on(pa[1], 1.0) && on(pb[1], 1.0) {
                "top"
            } else if on(pa[0], 0.0) && on(pb[0], 0.0) {
                "left"
            } else {
                continue;
            };
            tags.insert([a.min(b), a.max(b)], tag.to_string());
        }
    }
    tags
}

/// `n x n` squares, each split into four right triangles meeting at the
/// square centre: `4 n^2` cells, `(n+1)^2 + n^2` nodes.
pub fn crossed_unit_square(n: usize) -> RawMesh {
    assert!(n > 0);
    let h = 1.0 / n as f64;
    let corner = |i: usize, j: usize| j * (n + 1) + i;
    let centre = |i: usize, j: usize| (n + 1) * (n + 1) + j * n + i;
    let mut nodes = Vec::with_capacity((n + 1) * (n + 1) + n * n);
    for j in 0..=n {
        for i in 0..=n {
            nodes.push([i as f64 * h, j as f64 * h]);
        }
    }
    for j in 0..n {
        for i in 0..n {
            nodes.push([(i as f64 + 0.5) * h, (j as f64 + 0.5) * h]);
        }
    }
    let mut cells = Vec::with_capacity(4 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (ll, lr, ur, ul) = (corner(i, j), corner(i + 1, j), corner(i + 1, j + 1), corner(i, j + 1));
            let c = centre(i, j);
            cells.extend_from_slice(&[[ll, lr, c], [lr, ur, c], [ur, ul, c], [ul, ll, c]]);
        }
    }
    let tags = tag_square_boundary(&nodes, &cells);
    RawMesh::with_tags(nodes, cells, tags).expect("structured mesh is valid")
}

/// `n x n` squares, each split along its rising diagonal: `2 n^2` cells.
pub fn right_triangle_unit_square(n: usize) -> RawMesh {
    assert!(n > 0);
    let h = 1.0 / n as f64;
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut nodes = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            nodes.push([i as f64 * h, j as f64 * h]);
        }
    }
    let mut cells = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (ll, lr, ur, ul) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            cells.push([ll, lr, ul]);
            cells.push([ur, ul, lr]);
        }
    }
    let tags = tag_square_boundary(&nodes, &cells);
    RawMesh::with_tags(nodes, cells, tags).expect("structured mesh is valid")
}

/// Moves every node strictly inside the bounding box by a uniform random
/// offset of at most `amplitude` per coordinate.
pub fn perturbed(raw: &RawMesh, amplitude: f64, seed: u64) -> RawMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &raw.nodes {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let eps = 1e-12 * (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let nodes = raw
        .nodes
        .iter()
        .map(|p| {
            let interior = (0..2).all(|d| p[d] > lo[d] + eps && p[d] < hi[d] - eps);
            if interior {
                [
                    p[0] + rng.random_range(-amplitude..=amplitude),
                    p[1] + rng.random_range(-amplitude..=amplitude),
                ]
            } else {
                *p
            }
        })
        .collect();
    RawMesh::with_tags(nodes, raw.cells.clone(), raw.boundary_tags.clone())
        .expect("perturbation amplitude too large for this mesh")
}
