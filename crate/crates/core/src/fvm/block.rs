use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{
    assemble_diffusion, assemble_gradient, Axis, FvmError, OperatorKind, ScalarField, SparseOperator, TripletBuilder,
};
use crate::mesh::MeshGeometry;

/// One `N x N` block of a lifted operator.
#[derive(Debug, Clone)]
pub enum Block {
    Zero,
    Identity(f64),
    Diagonal(Vec<f64>),
    Operator { op: Arc<SparseOperator>, scale: f64 },
}

/// Weighting of the identity block of the canonical lifted operator.
///
/// `CellArea` puts the algebraic term in the same integral form as the
/// diffusion block, so both rows scale alike under refinement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MassScaling {
    Unit,
    #[default]
    CellArea,
}

/// Block-structured linear operator acting on the stacked observable vector
/// `[y1; y2; ...]`, each block of size `N = n_cells`.
#[derive(Debug, Clone)]
pub struct BlockOperator {
    n: usize,
    block_rows: usize,
    block_cols: usize,
    blocks: Vec<Block>,
    assembled: SparseOperator,
}

impl BlockOperator {
    /// `blocks` is row-major with `block_rows * block_cols` entries.
    pub fn new(n: usize, block_rows: usize, block_cols: usize, blocks: Vec<Block>) -> Result<Self, FvmError> {
        if blocks.len() != block_rows * block_cols {
            return Err(FvmError::BlockLayout(format!(
                "{} blocks for a {block_rows}x{block_cols} layout",
                blocks.len()
            )));
        }
        let mut b = TripletBuilder::new(n * block_rows, n * block_cols);
        for (k, block) in blocks.iter().enumerate() {
            let (bi, bj) = (k / block_cols, k % block_cols);
            let (r0, c0) = (bi * n, bj * n);
            match block {
                Block::Zero => {}
                Block::Identity(s) => {
                    for i in 0..n {
                        b.push(r0 + i, c0 + i, *s);
                    }
                }
                Block::Diagonal(d) => {
                    if d.len() != n {
                        return Err(FvmError::DimensionMismatch {
                            expected: n,
                            found: d.len(),
                        });
                    }
                    for (i, &v) in d.iter().enumerate() {
                        b.push(r0 + i, c0 + i, v);
                    }
                }
                Block::Operator { op, scale } => {
                    if op.n_rows() != n || op.n_cols() != n {
                        return Err(FvmError::BlockLayout(format!(
                            "block ({bi}, {bj}) is {}x{}, expected {n}x{n}",
                            op.n_rows(),
                            op.n_cols()
                        )));
                    }
                    for (r, c, v) in op.triplets() {
                        b.push(r0 + r, c0 + c, scale * v);
                    }
                }
            }
        }
        let assembled = b.build(OperatorKind::Block)?;
        Ok(Self {
            n,
            block_rows,
            block_cols,
            blocks,
            assembled,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.n
    }

    pub fn block_rows(&self) -> usize {
        self.block_rows
    }

    pub fn block_cols(&self) -> usize {
        self.block_cols
    }

    pub fn block(&self, i: usize, j: usize) -> &Block {
        &self.blocks[i * self.block_cols + j]
    }

    /// The flattened `(rows * N) x (cols * N)` sparse matrix.
    pub fn assembled(&self) -> &SparseOperator {
        &self.assembled
    }

    pub fn apply(&self, y: &[f64]) -> Result<Vec<f64>, FvmError> {
        self.assembled.apply(y)
    }
}

/// `A = [-L, M]` for `-div(grad u) + s(u) = F` lifted to `y = [u; s(u)]`,
/// with `M` the identity or the diagonal of cell areas.
pub fn canonical_operator(geom: &MeshGeometry, mass: MassScaling) -> Result<BlockOperator, FvmError> {
    let n = geom.n_cells();
    let lap = assemble_diffusion(geom, &ScalarField::constant(geom, 1.0))?;
    let m = match mass {
        MassScaling::Unit => Block::Identity(1.0),
        MassScaling::CellArea => Block::Diagonal(geom.cell_areas.clone()),
    };
    BlockOperator::new(
        n,
        1,
        2,
        vec![
            Block::Operator {
                op: Arc::new(lap),
                scale: -1.0,
            },
            m,
        ],
    )
}

/// Lifted steady compressible Euler operator: four conservation rows acting
/// on the eight observables
/// `[rho u, rho v, rho u v, p, rho u^2, rho v^2, rho u H, rho v H]`.
///
/// ```text
/// row 1:  Gx y1 + Gy y2
/// row 2:  Gy y3 + Gx y4 + Gx y5
/// row 3:  Gx y3 + Gy y4 + Gy y6
/// row 4:  Gx y7 + Gy y8
/// ```
pub fn euler_operator(geom: &MeshGeometry) -> Result<BlockOperator, FvmError> {
    let n = geom.n_cells();
    let gx = Arc::new(assemble_gradient(geom, Axis::X)?);
    let gy = Arc::new(assemble_gradient(geom, Axis::Y)?);
    let x = || Block::Operator {
        op: gx.clone(),
        scale: 1.0,
    };
    let y = || Block::Operator {
        op: gy.clone(),
        scale: 1.0,
    };
    let z = || Block::Zero;
    let blocks = vec![
        x(),
        y(),
        z(),
        z(),
        z(),
        z(),
        z(),
        z(), //
        z(),
        z(),
        y(),
        x(),
        x(),
        z(),
        z(),
        z(), //
        z(),
        z(),
        x(),
        y(),
        z(),
        y(),
        z(),
        z(), //
        z(),
        z(),
        z(),
        z(),
        z(),
        z(),
        x(),
        y(),
    ];
    BlockOperator::new(n, 4, 8, blocks)
}

/// Right-hand side `f = A y` implied by a full-order snapshot.
pub fn recover_rhs(op: &BlockOperator, snapshot: &[f64]) -> Result<Vec<f64>, FvmError> {
    op.apply(snapshot)
}
