//! Discrete empirical interpolation of the pointwise constraints.
//!
//! For a constraint `h = y_t - N(y)` with target basis `Phi_t`, the reduced
//! constraint is approximated as
//!
//! ```text
//! h~(y~) = Phi_t^T Phi[t] y~  -  Phi_t^T X (P^T X)^{-1} N(P^T Phi y~)
//! ```
//!
//! where `X` is a basis for snapshots of `N` and `P` selects the rows
//! chosen greedily from `X`. Everything except the `q` sampled evaluations
//! of `N` is precomputed.

use nalgebra::{DMatrix, DVector};

use crate::observables::LiftedSystem;
use crate::pod::BlockBasis;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum DeimError {
    #[error("interpolation basis is degenerate at column {0}")]
    DegenerateBasis(usize),
    #[error("sampled basis matrix is singular")]
    Singular,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("point index {index} out of range for {rows} rows")]
    PointOutOfRange { index: usize, rows: usize },
    #[error("repeated interpolation point {0}")]
    RepeatedPoint(usize),
    #[error("constraint {family} cannot be evaluated at sample point {point}")]
    Evaluation { family: usize, point: usize },
}

fn argmax_abs(v: impl Iterator<Item = f64>) -> (usize, f64) {
    let mut best = (0, -1.0);
    for (i, x) in v.enumerate() {
        if x.abs() > best.1 {
            best = (i, x.abs());
        }
    }
    best
}

/// Greedy point selection: the first point maximises `|X[:, 0]|`, and each
/// further point maximises the residual of column `j` after interpolating it
/// from the previous columns at the previous points. Ties go to the lowest
/// row.
pub fn select_points(x: &DMatrix<f64>) -> Result<Vec<usize>, DeimError> {
    let (rows, q) = x.shape();
    if q > rows {
        return Err(DeimError::DimensionMismatch(format!(
            "{q} columns but only {rows} rows"
        )));
    }
    let mut points = Vec::with_capacity(q);
    for j in 0..q {
        let col = x.column(j);
        let scale = col.amax();
        let residual: DVector<f64> = if j == 0 {
            col.into_owned()
        } else {
            let u = x.columns(0, j);
            let pu = DMatrix::from_fn(j, j, |a, b| u[(points[a], b)]);
            let rhs = DVector::from_fn(j, |a, _| col[points[a]]);
            let c = pu.lu().solve(&rhs).ok_or(DeimError::DegenerateBasis(j))?;
            col - u * c
        };
        let (p, r) = argmax_abs(residual.iter().copied());
        if !(r > 1e-14 * scale) {
            return Err(DeimError::DegenerateBasis(j));
        }
        points.push(p);
    }
    Ok(points)
}

/// Precomputed factors for one constraint family.
#[derive(Debug, Clone, PartialEq)]
pub struct DeimInterpolant {
    pub family: usize,
    pub target: usize,
    /// Basis of the nonlinear-term snapshots, `N x q`.
    pub basis: DMatrix<f64>,
    pub points: Vec<usize>,
    /// `Phi_t^T X (P^T X)^{-1}`, `k_t x q`.
    pub left_factor: DMatrix<f64>,
    /// `Phi_t^T Phi[t]`, `k_t x k`.
    pub linear: DMatrix<f64>,
    /// `Phi[j](points, :)` for every observable `j`, each `q x k`.
    pub sampled: Vec<DMatrix<f64>>,
    /// 2-norm condition number of `P^T X`.
    pub condition: f64,
}

fn condition_number(m: &DMatrix<f64>) -> f64 {
    let s = m.singular_values();
    let max = s.max();
    let min = s.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Builds the interpolant for constraint `family` of `system` from the
/// nonlinear-term basis `x`, its points, the target basis and the trial
/// basis.
pub fn build_interpolant(
    system: &dyn LiftedSystem,
    family: usize,
    x: &DMatrix<f64>,
    points: &[usize],
    target_basis: &DMatrix<f64>,
    trial: &BlockBasis,
) -> Result<DeimInterpolant, DeimError> {
    let n = trial.n_cells;
    let q = x.ncols();
    if x.nrows() != n || target_basis.nrows() != n {
        return Err(DeimError::DimensionMismatch(format!(
            "bases have {} and {} rows, mesh has {n} cells",
            x.nrows(),
            target_basis.nrows()
        )));
    }
    if points.len() != q {
        return Err(DeimError::DimensionMismatch(format!(
            "{} points for {q} basis columns",
            points.len()
        )));
    }
    if trial.n_blocks != system.n_observables() {
        return Err(DeimError::DimensionMismatch(format!(
            "trial basis has {} blocks, system has {} observables",
            trial.n_blocks,
            system.n_observables()
        )));
    }
    let mut seen = std::collections::BTreeSet::new();
    for &p in points {
        if p >= n {
            return Err(DeimError::PointOutOfRange { index: p, rows: n });
        }
        if !seen.insert(p) {
            return Err(DeimError::RepeatedPoint(p));
        }
    }
    let ptx = DMatrix::from_fn(q, q, |a, b| x[(points[a], b)]);
    let condition = condition_number(&ptx);
    if !condition.is_finite() || condition > 1e14 {
        return Err(DeimError::Singular);
    }
    let inv = ptx.try_inverse().ok_or(DeimError::Singular)?;
    let left_factor = target_basis.tr_mul(x) * inv;
    let target = system.target(family);
    let linear = target_basis.tr_mul(&trial.observable_rows(target));
    let sampled = (0..system.n_observables())
        .map(|j| {
            let rows = trial.observable_rows(j);
            DMatrix::from_fn(q, trial.k(), |a, b| rows[(points[a], b)])
        })
        .collect();
    Ok(DeimInterpolant {
        family,
        target,
        basis: x.clone(),
        points: points.to_vec(),
        left_factor,
        linear,
        sampled,
        condition,
    })
}

impl DeimInterpolant {
    pub fn q(&self) -> usize {
        self.points.len()
    }

    /// Number of reduced constraints contributed.
    pub fn n_reduced(&self) -> usize {
        self.left_factor.nrows()
    }

    /// `X (P^T X)^{-1} P^T f`: the interpolant of a full vector.
    pub fn approximate(&self, f: &[f64]) -> DVector<f64> {
        let pf = DVector::from_fn(self.q(), |a, _| f[self.points[a]]);
        let ptx = DMatrix::from_fn(self.q(), self.q(), |a, b| self.basis[(self.points[a], b)]);
        let c = ptx.lu().solve(&pf).expect("checked at construction");
        &self.basis * c
    }
}

/// Reduced constraint values and Jacobian, stacked over the families in
/// order. Cost is independent of the mesh size.
pub fn evaluate_constraint_reduced(
    reduced: &DVector<f64>,
    interpolants: &[DeimInterpolant],
    system: &dyn LiftedSystem,
) -> Result<(DVector<f64>, DMatrix<f64>), DeimError> {
    let k = reduced.len();
    let total: usize = interpolants.iter().map(DeimInterpolant::n_reduced).sum();
    let mut h = DVector::zeros(total);
    let mut jac = DMatrix::zeros(total, k);
    let l = system.n_observables();
    let mut row = 0;
    let mut vals = vec![0.0; l];
    let mut grad = vec![0.0; l];
    for it in interpolants {
        if it.linear.ncols() != k {
            return Err(DeimError::DimensionMismatch(format!(
                "reduced vector has {k} entries, interpolant expects {}",
                it.linear.ncols()
            )));
        }
        let q = it.q();
        let sampled_y: Vec<DVector<f64>> = it.sampled.iter().map(|s| s * reduced).collect();
        let mut nl = DVector::zeros(q);
        let mut d = DMatrix::zeros(q, k);
        for a in 0..q {
            for j in 0..l {
                vals[j] = sampled_y[j][a];
            }
            nl[a] = system.nonlinear(it.family, &vals).ok_or(DeimError::Evaluation {
                family: it.family,
                point: it.points[a],
            })?;
            system
                .nonlinear_gradient(it.family, &vals, &mut grad)
                .ok_or(DeimError::Evaluation {
                    family: it.family,
                    point: it.points[a],
                })?;
            for (j, &g) in grad.iter().enumerate() {
                if g != 0.0 {
                    for b in 0..k {
                        d[(a, b)] += g * it.sampled[j][(a, b)];
                    }
                }
            }
        }
        let m = it.n_reduced();
        let hv = &it.linear * reduced - &it.left_factor * nl;
        h.rows_mut(row, m).copy_from(&hv);
        let jv = &it.linear - &it.left_factor * d;
        jac.rows_mut(row, m).copy_from(&jv);
        row += m;
    }
    Ok((h, jac))
}
