//! Proper orthogonal decomposition of snapshot blocks.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Singular values at or below this fraction of the largest are treated as
/// zero when deciding the numerical rank.
pub const RANK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PodError {
    #[error("empty snapshot matrix")]
    Empty,
    #[error("snapshot matrix has non-finite entries")]
    NonFinite,
    #[error("energy fraction must lie in (0, 1], got {0}")]
    BadEnergy(f64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("singular value decomposition failed")]
    SvdFailed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "value", rename_all = "snake_case")]
pub enum Truncation {
    /// Keep every mode up to the numerical rank.
    Full,
    Fixed(usize),
    /// Smallest `k` capturing this fraction of the squared singular values.
    Energy(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PodBasis {
    /// Orthonormal columns, `rows x k`.
    pub phi: DMatrix<f64>,
    /// All singular values of the snapshot block, descending.
    pub sigma: Vec<f64>,
    pub source: String,
}

impl PodBasis {
    pub fn k(&self) -> usize {
        self.phi.ncols()
    }

    pub fn rows(&self) -> usize {
        self.phi.nrows()
    }

    /// `sum_{i > k} sigma_i^2`.
    pub fn tail_energy(&self) -> f64 {
        self.sigma.iter().skip(self.k()).map(|s| s * s).sum()
    }

    /// Captured fraction of the squared singular values.
    pub fn energy_fraction(&self) -> f64 {
        let total: f64 = self.sigma.iter().map(|s| s * s).sum();
        if total == 0.0 {
            return 1.0;
        }
        1.0 - self.tail_energy() / total
    }
}

/// Makes the largest-magnitude entry of every column positive; ties go to the
/// lowest row.
fn fix_signs(u: &mut DMatrix<f64>) {
    for mut col in u.column_iter_mut() {
        let mut best = 0;
        for i in 1..col.len() {
            if col[i].abs() > col[best].abs() {
                best = i;
            }
        }
        if !col.is_empty() && col[best] < 0.0 {
            col.neg_mut();
        }
    }
}

pub fn numerical_rank(sigma: &[f64]) -> usize {
    match sigma.first() {
        Some(&s1) if s1 > 0.0 => sigma.iter().take_while(|&&s| s > RANK_TOLERANCE * s1).count(),
        _ => 0,
    }
}

pub fn compute_pod(snapshots: &DMatrix<f64>, truncation: Truncation, source: &str) -> Result<PodBasis, PodError> {
    if snapshots.is_empty() {
        return Err(PodError::Empty);
    }
    if snapshots.iter().any(|v| !v.is_finite()) {
        return Err(PodError::NonFinite);
    }
    if let Truncation::Energy(e) = truncation {
        if !(e > 0.0 && e <= 1.0) {
            return Err(PodError::BadEnergy(e));
        }
    }
    let svd = snapshots
        .clone()
        .try_svd(true, false, f64::EPSILON, 0)
        .ok_or(PodError::SvdFailed)?;
    let u = svd.u.ok_or(PodError::SvdFailed)?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .total_cmp(&svd.singular_values[a])
            .then(a.cmp(&b))
    });
    let sigma: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();

    let rank = numerical_rank(&sigma);
    let wanted = match truncation {
        Truncation::Full => rank,
        Truncation::Fixed(k) => k,
        Truncation::Energy(frac) => {
            let total: f64 = sigma.iter().map(|s| s * s).sum();
            let mut acc = 0.0;
            let mut k = 0;
            for s in &sigma {
                if total == 0.0 || acc >= frac * total {
                    break;
                }
                acc += s * s;
                k += 1;
            }
            k
        }
    };
    let k = if wanted > rank {
        log::warn!("{source}: requested {wanted} modes but the numerical rank is {rank}; keeping {rank}");
        rank
    } else {
        wanted
    };
    let mut phi = DMatrix::from_fn(snapshots.nrows(), k, |i, j| u[(i, order[j])]);
    fix_signs(&mut phi);
    Ok(PodBasis {
        phi,
        sigma,
        source: source.to_string(),
    })
}

/// `sum_j || u_j - Phi Phi^T u_j ||^2`, computed directly.
pub fn projection_error(snapshots: &DMatrix<f64>, basis: &PodBasis) -> Result<f64, PodError> {
    if snapshots.nrows() != basis.rows() {
        return Err(PodError::DimensionMismatch {
            expected: basis.rows(),
            found: snapshots.nrows(),
        });
    }
    let coeffs = basis.phi.tr_mul(snapshots);
    let residual = snapshots - &basis.phi * coeffs;
    Ok(residual.norm_squared())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisMode {
    /// One POD per observable, assembled block-diagonally.
    #[default]
    PerBlock,
    /// A single POD of the stacked observables.
    Joint,
}

/// Trial basis for the stacked observable vector.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockBasis {
    pub mode: BasisMode,
    pub n_cells: usize,
    pub n_blocks: usize,
    /// Per observable in `PerBlock` mode; a single basis in `Joint` mode.
    pub bases: Vec<PodBasis>,
    /// Assembled `(n_blocks N) x k` trial basis.
    pub phi: DMatrix<f64>,
}

impl BlockBasis {
    pub fn k(&self) -> usize {
        self.phi.ncols()
    }

    /// Rows of the trial basis belonging to observable `j`.
    pub fn observable_rows(&self, j: usize) -> nalgebra::DMatrixView<'_, f64> {
        self.phi.rows(j * self.n_cells, self.n_cells)
    }

    /// Column range of observable `j` (per-block mode only).
    pub fn block_columns(&self, j: usize) -> Option<std::ops::Range<usize>> {
        if self.mode != BasisMode::PerBlock {
            return None;
        }
        let start: usize = self.bases[..j].iter().map(PodBasis::k).sum();
        Some(start..start + self.bases[j].k())
    }

    pub fn reduce(&self, y: &[f64]) -> Result<Vec<f64>, PodError> {
        if y.len() != self.phi.nrows() {
            return Err(PodError::DimensionMismatch {
                expected: self.phi.nrows(),
                found: y.len(),
            });
        }
        Ok(self
            .phi
            .tr_mul(&nalgebra::DVector::from_column_slice(y))
            .as_slice()
            .to_vec())
    }

    pub fn reconstruct(&self, reduced: &[f64]) -> Result<Vec<f64>, PodError> {
        if reduced.len() != self.k() {
            return Err(PodError::DimensionMismatch {
                expected: self.k(),
                found: reduced.len(),
            });
        }
        Ok((&self.phi * nalgebra::DVector::from_column_slice(reduced))
            .as_slice()
            .to_vec())
    }
}

/// Block-diagonal assembly of per-observable bases.
pub fn assemble_block_basis(bases: Vec<PodBasis>) -> Result<BlockBasis, PodError> {
    let n = bases.first().ok_or(PodError::Empty)?.rows();
    if let Some(b) = bases.iter().find(|b| b.rows() != n) {
        return Err(PodError::DimensionMismatch {
            expected: n,
            found: b.rows(),
        });
    }
    let k: usize = bases.iter().map(PodBasis::k).sum();
    let mut phi = DMatrix::zeros(n * bases.len(), k);
    let mut col = 0;
    for (j, b) in bases.iter().enumerate() {
        phi.view_mut((j * n, col), (n, b.k())).copy_from(&b.phi);
        col += b.k();
    }
    Ok(BlockBasis {
        mode: BasisMode::PerBlock,
        n_cells: n,
        n_blocks: bases.len(),
        bases,
        phi,
    })
}

/// Trial basis from stacked snapshots `[y1; y2; ...]` (`n_blocks N` rows).
pub fn build_trial_basis(
    snapshots: &DMatrix<f64>,
    n_blocks: usize,
    mode: BasisMode,
    truncation: Truncation,
) -> Result<BlockBasis, PodError> {
    if n_blocks == 0 || !snapshots.nrows().is_multiple_of(n_blocks) {
        return Err(PodError::DimensionMismatch {
            expected: n_blocks.max(1) * (snapshots.nrows() / n_blocks.max(1)),
            found: snapshots.nrows(),
        });
    }
    let n = snapshots.nrows() / n_blocks;
    match mode {
        BasisMode::PerBlock => {
            let bases = (0..n_blocks)
                .map(|j| {
                    let block = snapshots.rows(j * n, n).into_owned();
                    compute_pod(&block, truncation, &format!("observable {}", j + 1))
                })
                .collect::<Result<Vec<_>, _>>()?;
            assemble_block_basis(bases)
        }
        BasisMode::Joint => {
            let basis = compute_pod(snapshots, truncation, "joint")?;
            Ok(BlockBasis {
                mode,
                n_cells: n,
                n_blocks,
                phi: basis.phi.clone(),
                bases: vec![basis],
            })
        }
    }
}
