//! Reference full-order solver for `-lap(u) + s(u; mu) = F` on the unit
//! square with `u = 0` on the boundary, Latin-hypercube designs, and
//! snapshot generation.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fvm::{assemble_diffusion, OperatorKind, ScalarField, SparseOperator, TripletBuilder};
use crate::mesh::{MeshGeometry, BOUNDARY};
use crate::observables::{CanonicalSystem, LiftedSystem};

/// Parameter box on which the canonical reduced models are trained.
pub const CANONICAL_RANGE: [[f64; 2]; 2] = [[0.01, 2.0], [0.01, 2.0]];

#[derive(Debug, thiserror::Error)]
pub enum FomError {
    #[error("invalid design: {0}")]
    InvalidDesign(String),
    #[error("Newton did not converge in {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("Newton step failed to reduce the residual {residual:e} after {halvings} halvings")]
    Stalled { residual: f64, halvings: usize },
    #[error("singular Newton system: {0}")]
    Singular(String),
    #[error("solve failed at theta = {theta:?}")]
    AtPoint {
        theta: Vec<f64>,
        #[source]
        source: Box<FomError>,
    },
    #[error(transparent)]
    Observable(#[from] crate::observables::ObservableError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignRole {
    Train,
    Validate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterDesign {
    pub ranges: Vec<[f64; 2]>,
    pub points: Vec<Vec<f64>>,
    pub role: DesignRole,
    pub seed: Option<u64>,
}

fn check_ranges(ranges: &[[f64; 2]]) -> Result<(), FomError> {
    if ranges.is_empty() {
        return Err(FomError::InvalidDesign("no parameter ranges".into()));
    }
    for (d, r) in ranges.iter().enumerate() {
        if !(r[0] <= r[1]) || !r[0].is_finite() || !r[1].is_finite() {
            return Err(FomError::InvalidDesign(format!("range {d} is [{}, {}]", r[0], r[1])));
        }
    }
    Ok(())
}

impl ParameterDesign {
    /// A design from explicit points; every point must lie in `ranges`.
    pub fn from_points(ranges: Vec<[f64; 2]>, points: Vec<Vec<f64>>, role: DesignRole) -> Result<Self, FomError> {
        check_ranges(&ranges)?;
        for (i, p) in points.iter().enumerate() {
            if p.len() != ranges.len() {
                return Err(FomError::InvalidDesign(format!(
                    "point {i} has {} coordinates, expected {}",
                    p.len(),
                    ranges.len()
                )));
            }
            if p.iter().zip(&ranges).any(|(x, r)| !(*x >= r[0] && *x <= r[1])) {
                return Err(FomError::InvalidDesign(format!(
                    "point {i} = {p:?} is outside the ranges"
                )));
            }
        }
        Ok(Self {
            ranges,
            points,
            role,
            seed: None,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn n_params(&self) -> usize {
        self.ranges.len()
    }
}

/// Latin-hypercube sample of `m` points: each coordinate visits each of the
/// `m` equal-width strata once, at a uniform position inside it.
pub fn lhs_sample(ranges: &[[f64; 2]], m: usize, seed: u64) -> Result<ParameterDesign, FomError> {
    check_ranges(ranges)?;
    if m == 0 {
        return Err(FomError::InvalidDesign("sample size must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = vec![vec![0.0; ranges.len()]; m];
    for (d, r) in ranges.iter().enumerate() {
        let mut strata: Vec<usize> = (0..m).collect();
        strata.shuffle(&mut rng);
        for (p, &s) in points.iter_mut().zip(&strata) {
            let t = (s as f64 + rng.random::<f64>()) / m as f64;
            p[d] = (r[0] + t * (r[1] - r[0])).min(r[1]);
        }
    }
    Ok(ParameterDesign {
        ranges: ranges.to_vec(),
        points,
        role: DesignRole::Train,
        seed: Some(seed),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonConfig {
    /// Absolute tolerance on the residual 2-norm.
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 50,
            max_halvings: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonResult {
    pub u: Vec<f64>,
    pub iterations: usize,
    /// Residual norm before each iteration and after the last.
    pub residual_history: Vec<f64>,
}

impl NewtonResult {
    pub fn residual_norm(&self) -> f64 {
        *self.residual_history.last().expect("history is never empty")
    }
}

/// The discretised canonical problem on a fixed mesh, independent of `mu`.
///
/// Residual: `R(u) = K u + |c| s(u) - |c| F`, where `K = -L + D` is the
/// diffusion operator closed with the wall value `u_b = 0` at distance
/// `|x_f - x_c|` on boundary faces.
#[derive(Debug, Clone)]
pub struct CanonicalFom {
    stiffness: SparseOperator,
    areas: Vec<f64>,
    load: Vec<f64>,
}

fn forcing(x: f64, y: f64) -> f64 {
    use std::f64::consts::PI;
    (2.0 * PI * x).sin() * (2.0 * PI * y).sin()
}

impl CanonicalFom {
    pub fn new(geom: &MeshGeometry) -> Result<Self, FomError> {
        Self::with_forcing_amplitude(geom, 100.0)
    }

    /// Same problem with forcing `amplitude sin(2 pi x) sin(2 pi y)`.
    pub fn with_forcing_amplitude(geom: &MeshGeometry, amplitude: f64) -> Result<Self, FomError> {
        let stiffness = dirichlet_operator(geom);
        let areas = geom.cell_areas.clone();
        let load = geom
            .cell_centroids
            .iter()
            .zip(&areas)
            .map(|(c, a)| a * amplitude * forcing(c[0], c[1]))
            .collect();
        Ok(Self { stiffness, areas, load })
    }

    pub fn n_cells(&self) -> usize {
        self.areas.len()
    }

    /// `K` in the residual, the negative diffusion operator with the wall
    /// closure.
    pub fn stiffness(&self) -> &SparseOperator {
        &self.stiffness
    }

    /// Integrated forcing `|c| F(x_c)`.
    pub fn load(&self) -> &[f64] {
        &self.load
    }

    pub fn residual(&self, system: &CanonicalSystem, u: &[f64]) -> Vec<f64> {
        let mut r = self.stiffness.apply(u).expect("state has one value per cell");
        for i in 0..r.len() {
            r[i] += self.areas[i] * system.source(u[i]) - self.load[i];
        }
        r
    }

    fn jacobian(&self, system: &CanonicalSystem, u: &[f64]) -> Result<SparseColMat<usize, f64>, FomError> {
        let n = self.n_cells();
        let mut t: Vec<Triplet<usize, usize, f64>> = self
            .stiffness
            .triplets()
            .map(|(r, c, v)| Triplet::new(r, c, v))
            .collect();
        t.extend((0..n).map(|i| Triplet::new(i, i, self.areas[i] * system.source_derivative(u[i]))));
        SparseColMat::try_new_from_triplets(n, n, &t).map_err(|e| FomError::Singular(format!("{e:?}")))
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `-L + D`: the negated diffusion operator plus, for every boundary face, a
/// diagonal wall term `A_f / |x_f - x_c|`.
pub fn dirichlet_operator(geom: &MeshGeometry) -> SparseOperator {
    let lap = assemble_diffusion(geom, &ScalarField::constant(geom, 1.0)).expect("unit coefficient is valid");
    let mesh = geom.mesh();
    let n = geom.n_cells();
    let mut b = TripletBuilder::with_capacity(n, n, lap.nnz() + mesh.n_boundary_faces());
    for (r, c, v) in lap.triplets() {
        b.push(r, c, -v);
    }
    for f in 0..mesh.n_faces() {
        let [o, nb] = mesh.face_cells[f];
        if nb == BOUNDARY {
            let l = geom.intercell[f];
            b.push(o, o, geom.face_areas[f] / l[0].hypot(l[1]));
        }
    }
    b.build(OperatorKind::General).expect("indices are in range")
}

/// Damped Newton from `u = 0` on the canonical residual at `mu`.
pub fn solve_canonical(fom: &CanonicalFom, mu: [f64; 2], config: &NewtonConfig) -> Result<NewtonResult, FomError> {
    let inside = mu.iter().zip(&CANONICAL_RANGE).all(|(m, r)| *m >= r[0] && *m <= r[1]);
    if !inside {
        log::warn!("mu = {mu:?} lies outside the canonical range {CANONICAL_RANGE:?}");
    }
    let system = CanonicalSystem::new(mu[0], mu[1])?;
    let n = fom.n_cells();
    let mut u = vec![0.0; n];
    let mut r = fom.residual(&system, &u);
    let mut rn = norm(&r);
    let mut history = vec![rn];
    for it in 0..config.max_iter {
        if rn <= config.tol {
            return Ok(NewtonResult {
                u,
                iterations: it,
                residual_history: history,
            });
        }
        let jac = fom.jacobian(&system, &u)?;
        let lu = jac.sp_lu().map_err(|e| FomError::Singular(format!("{e:?}")))?;
        let mut rhs = faer::Mat::from_fn(n, 1, |i, _| -r[i]);
        lu.solve_in_place(rhs.as_mut());
        let step: Vec<f64> = (0..n).map(|i| rhs[(i, 0)]).collect();
        if step.iter().any(|v| !v.is_finite()) {
            return Err(FomError::Singular("non-finite Newton step".into()));
        }

        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..=config.max_halvings {
            let trial: Vec<f64> = u.iter().zip(&step).map(|(a, d)| a + alpha * d).collect();
            let rt = fom.residual(&system, &trial);
            let rtn = norm(&rt);
            if rtn < rn {
                u = trial;
                r = rt;
                rn = rtn;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Err(FomError::Stalled {
                residual: rn,
                halvings: config.max_halvings,
            });
        }
        history.push(rn);
    }
    if rn <= config.tol {
        return Ok(NewtonResult {
            u,
            iterations: config.max_iter,
            residual_history: history,
        });
    }
    Err(FomError::NotConverged {
        iterations: config.max_iter,
        residual: rn,
    })
}

/// Lifted full-order solutions, one column per design point.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSet {
    pub matrix: DMatrix<f64>,
    pub thetas: Vec<Vec<f64>>,
    pub system: String,
    pub n_cells: usize,
}

impl SnapshotSet {
    pub fn n_snapshots(&self) -> usize {
        self.matrix.ncols()
    }

    /// Rows of observable `k` in every column.
    pub fn block(&self, k: usize) -> DMatrix<f64> {
        self.matrix.rows(k * self.n_cells, self.n_cells).into_owned()
    }
}

/// Solves the canonical problem at every design point (concurrently) and
/// lifts each solution to `[u, s(u)]`. Columns follow the design order.
pub fn generate_snapshots(
    fom: &CanonicalFom,
    design: &ParameterDesign,
    config: &NewtonConfig,
) -> Result<SnapshotSet, FomError> {
    if design.n_params() != 2 {
        return Err(FomError::InvalidDesign(format!(
            "the canonical problem has 2 parameters, design has {}",
            design.n_params()
        )));
    }
    if design.is_empty() {
        return Err(FomError::InvalidDesign("empty design".into()));
    }
    let columns: Vec<Vec<f64>> = design
        .points
        .par_iter()
        .map(|theta| {
            let at = |e: FomError| FomError::AtPoint {
                theta: theta.clone(),
                source: Box::new(e),
            };
            let mu = [theta[0], theta[1]];
            let sol = solve_canonical(fom, mu, config).map_err(at)?;
            let system = CanonicalSystem::new(mu[0], mu[1]).map_err(|e| at(e.into()))?;
            system.lift(&sol.u).map_err(|e| at(e.into()))
        })
        .collect::<Result<_, _>>()?;
    let rows = columns[0].len();
    let matrix = DMatrix::from_fn(rows, columns.len(), |i, j| columns[j][i]);
    Ok(SnapshotSet {
        matrix,
        thetas: design.points.clone(),
        system: "canonical".into(),
        n_cells: fom.n_cells(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_connectivity, compute_geometry, crossed_unit_square};
    use proptest::prelude::*;

    fn geometry(n: usize) -> MeshGeometry {
        compute_geometry(build_connectivity(crossed_unit_square(n)).unwrap()).unwrap()
    }

    #[test]
    fn lhs_visits_every_stratum_once() {
        let d = lhs_sample(&[[0.0, 1.0], [0.0, 1.0]], 4, 3).unwrap();
        for k in 0..2 {
            let mut strata: Vec<usize> = d
                .points
                .iter()
                .map(|p| ((p[k] * 4.0).floor() as usize).min(3))
                .collect();
            strata.sort();
            assert_eq!(strata, vec![0, 1, 2, 3]);
        }
        assert_eq!(d, lhs_sample(&[[0.0, 1.0], [0.0, 1.0]], 4, 3).unwrap());
        assert_ne!(d.points, lhs_sample(&[[0.0, 1.0], [0.0, 1.0]], 4, 4).unwrap().points);
    }

    #[test]
    fn lhs_rejects_bad_input() {
        assert!(lhs_sample(&[[0.0, 1.0]], 0, 1).is_err());
        assert!(lhs_sample(&[[1.0, 0.0]], 3, 1).is_err());
        assert!(lhs_sample(&[], 3, 1).is_err());
        let one = lhs_sample(&[[0.5, 0.7], [1.0, 2.0]], 1, 9).unwrap();
        assert!((0.5..=0.7).contains(&one.points[0][0]) && (1.0..=2.0).contains(&one.points[0][1]));
    }

    proptest! {
        #[test]
        fn lhs_is_stratified(m in 1usize..40, seed in any::<u64>(), lo in -5.0..5.0f64, w in 0.1..10.0f64) {
            let d = lhs_sample(&[[lo, lo + w], [0.01, 2.0]], m, seed).unwrap();
            for k in 0..2 {
                let r = d.ranges[k];
                let mut seen = vec![false; m];
                for p in &d.points {
                    prop_assert!(p[k] >= r[0] && p[k] <= r[1]);
                    let s = (((p[k] - r[0]) / (r[1] - r[0]) * m as f64).floor() as usize).min(m - 1);
                    seen[s] = true;
                }
                prop_assert!(seen.iter().all(|&b| b));
            }
        }
    }

    #[test]
    fn zero_forcing_gives_zero_solution() {
        let g = geometry(4);
        let fom = CanonicalFom::with_forcing_amplitude(&g, 0.0).unwrap();
        let sol = solve_canonical(&fom, [0.7, 1.3], &NewtonConfig::default()).unwrap();
        assert_eq!(sol.iterations, 0);
        assert!(sol.u.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn small_mu2_matches_linear_solve() {
        let g = geometry(6);
        let fom = CanonicalFom::new(&g).unwrap();
        let mu1 = 0.8;
        let sol = solve_canonical(&fom, [mu1, 1e-10], &NewtonConfig::default()).unwrap();
        // (K + mu1 diag(area)) u = area F, solved densely
        let mut a = fom.stiffness().to_dense();
        for i in 0..g.n_cells() {
            a[(i, i)] += mu1 * g.cell_areas[i];
        }
        let b = nalgebra::DVector::from_column_slice(fom.load());
        let lin = a.lu().solve(&b).unwrap();
        let diff: f64 = sol
            .u
            .iter()
            .zip(lin.iter())
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(diff <= 1e-6 * lin.norm(), "{diff}");
    }

    #[test]
    fn newton_converges_fast_and_solution_is_sensible() {
        let g = geometry(8);
        let fom = CanonicalFom::new(&g).unwrap();
        let sol = solve_canonical(&fom, [0.3, 9.0], &NewtonConfig::default()).unwrap();
        assert!(sol.residual_norm() <= 1e-10);
        let h = &sol.residual_history;
        let r0 = h[0];
        // superlinear once the residual has dropped below 1e-2 r0
        let tail: Vec<f64> = h.iter().copied().filter(|&r| r < 1e-2 * r0 && r > 1e-13).collect();
        for w in tail.windows(3) {
            let order = (w[2] / w[1]).ln() / (w[1] / w[0]).ln();
            assert!(order >= 1.5, "{h:?}");
        }
        let umax = sol.u.iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(umax > 0.1 && umax < 10.0, "{umax}");
        // sign follows the forcing in the four quadrants
        for (c, &u) in g.cell_centroids.iter().zip(&sol.u) {
            let f = forcing(c[0], c[1]);
            if f.abs() > 0.5 {
                assert_eq!(u.signum(), f.signum());
            }
        }
    }

    #[test]
    fn snapshots_follow_design_order() {
        let g = geometry(3);
        let fom = CanonicalFom::new(&g).unwrap();
        let pts = vec![vec![0.5, 1.0], vec![1.5, 0.2], vec![0.5, 1.0]];
        let design = ParameterDesign::from_points(CANONICAL_RANGE.to_vec(), pts, DesignRole::Train).unwrap();
        let snaps = generate_snapshots(&fom, &design, &NewtonConfig::default()).unwrap();
        assert_eq!(snaps.matrix.shape(), (2 * g.n_cells(), 3));
        assert_eq!(snaps.matrix.column(0), snaps.matrix.column(2));
        let sol = solve_canonical(&fom, [1.5, 0.2], &NewtonConfig::default()).unwrap();
        let y = CanonicalSystem::new(1.5, 0.2).unwrap().lift(&sol.u).unwrap();
        assert_eq!(snaps.matrix.column(1).as_slice(), y.as_slice());
        assert!(
            ParameterDesign::from_points(CANONICAL_RANGE.to_vec(), vec![vec![3.0, 1.0]], DesignRole::Train).is_err()
        );
    }

    #[test]
    fn refinement_reduces_differences() {
        // compare cell averages of coarse cells against refined solutions
        // through the solution sampled at a fixed set of points
        let probe = |n: usize| {
            let g = geometry(n);
            let fom = CanonicalFom::new(&g).unwrap();
            let sol = solve_canonical(&fom, [1.0, 1.0], &NewtonConfig::default()).unwrap();
            // value at the cell containing each probe point, via nearest centroid
            [[0.25, 0.25], [0.75, 0.25], [0.3, 0.7]]
                .iter()
                .map(|p: &[f64; 2]| {
                    let (i, _) = g
                        .cell_centroids
                        .iter()
                        .enumerate()
                        .map(|(i, c)| (i, (c[0] - p[0]).hypot(c[1] - p[1])))
                        .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
                    sol.u[i]
                })
                .collect::<Vec<_>>()
        };
        let (a, b, c) = (probe(4), probe(8), probe(16));
        let d1: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum();
        let d2: f64 = b.iter().zip(&c).map(|(x, y)| (x - y).abs()).sum();
        assert!(d2 < d1, "{d1} {d2}");
    }
}
