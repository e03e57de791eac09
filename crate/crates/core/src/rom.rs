//! Reduced models: least-squares projection of the lifted operator, the
//! constrained reduced solve, and the offline database of reduced systems.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::deim::{build_interpolant, evaluate_constraint_reduced, select_points, DeimError, DeimInterpolant};
use crate::fvm::{BlockOperator, FvmError};
use crate::observables::{CanonicalSystem, EulerSystem, LiftedSystem, ObservableError};
use crate::persist::{read_json, read_matrix, write_json, write_matrix, PersistError};
use crate::pod::{
    assemble_block_basis, build_trial_basis, compute_pod, BasisMode, BlockBasis, PodBasis, PodError, Truncation,
};

#[derive(Debug, thiserror::Error)]
pub enum RomError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("KKT system stayed singular up to regularisation {0:e}")]
    SingularKkt(f64),
    #[error("inconsistent database: {0}")]
    Database(String),
    #[error(transparent)]
    Deim(#[from] DeimError),
    #[error(transparent)]
    Pod(#[from] PodError),
    #[error(transparent)]
    Fvm(#[from] FvmError),
    #[error(transparent)]
    Observable(#[from] ObservableError),
    #[error(transparent)]
    Persist(#[from] PersistError),
}

/// Which lifted system a database belongs to; the canonical system takes
/// its two parameters from `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum SystemSpec {
    Canonical,
    Euler { gamma: f64 },
}

impl SystemSpec {
    pub fn instantiate(&self, theta: &[f64]) -> Result<Box<dyn LiftedSystem>, ObservableError> {
        match *self {
            SystemSpec::Canonical => {
                if theta.len() != 2 {
                    return Err(ObservableError::InvalidParameter(format!(
                        "canonical system takes 2 parameters, got {}",
                        theta.len()
                    )));
                }
                Ok(Box::new(CanonicalSystem::new(theta[0], theta[1])?))
            }
            SystemSpec::Euler { gamma } => Ok(Box::new(EulerSystem::new(gamma)?)),
        }
    }

    pub fn n_observables(&self) -> usize {
        match self {
            SystemSpec::Canonical => 2,
            SystemSpec::Euler { .. } => 8,
        }
    }
}

/// `B~ = (A Phi)^T (A Phi)` and `f~ = (A Phi)^T f` at one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct RomInstance {
    pub b: DMatrix<f64>,
    pub f: DVector<f64>,
    pub theta: Vec<f64>,
}

impl RomInstance {
    pub fn k(&self) -> usize {
        self.f.len()
    }

    /// `1/2 || B~ y~ - f~ ||^2`.
    pub fn objective(&self, reduced: &DVector<f64>) -> f64 {
        0.5 * (&self.b * reduced - &self.f).norm_squared()
    }
}

/// The tall product `A Phi`, shared by every right-hand side.
#[derive(Debug, Clone)]
pub struct Projector {
    a_phi: DMatrix<f64>,
    b: DMatrix<f64>,
}

impl Projector {
    pub fn new(op: &BlockOperator, basis: &BlockBasis) -> Result<Self, RomError> {
        if op.assembled().n_cols() != basis.phi.nrows() {
            return Err(RomError::DimensionMismatch(format!(
                "operator has {} columns, basis has {} rows",
                op.assembled().n_cols(),
                basis.phi.nrows()
            )));
        }
        let a_phi = op.assembled().mul_dense(&basis.phi)?;
        let b = a_phi.tr_mul(&a_phi);
        Ok(Self { a_phi, b })
    }

    pub fn project(&self, f: &[f64], theta: Vec<f64>) -> Result<RomInstance, RomError> {
        if f.len() != self.a_phi.nrows() {
            return Err(RomError::DimensionMismatch(format!(
                "right-hand side has {} entries, operator has {} rows",
                f.len(),
                self.a_phi.nrows()
            )));
        }
        let f = self.a_phi.tr_mul(&DVector::from_column_slice(f));
        Ok(RomInstance {
            b: self.b.clone(),
            f,
            theta,
        })
    }
}

pub fn project(op: &BlockOperator, f: &[f64], basis: &BlockBasis, theta: Vec<f64>) -> Result<RomInstance, RomError> {
    Projector::new(op, basis)?.project(f, theta)
}

pub fn reconstruct(basis: &BlockBasis, reduced: &DVector<f64>) -> Result<Vec<f64>, RomError> {
    Ok(basis.reconstruct(reduced.as_slice())?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqpConfig {
    /// Stationarity tolerance, relative to `||B~||_F (||B~||_F ||y~|| + ||f~||)`.
    pub tol_kkt: f64,
    /// Feasibility tolerance, relative to `max(||y~||_inf, 1)`.
    pub tol_feas: f64,
    pub max_iter: usize,
    /// Initial Levenberg shift, relative to the largest Hessian diagonal.
    pub lambda0: f64,
    pub max_lambda: f64,
    pub max_backtracks: usize,
}

impl Default for SqpConfig {
    fn default() -> Self {
        Self {
            tol_kkt: 1e-8,
            tol_feas: 1e-8,
            max_iter: 200,
            lambda0: 1e-10,
            max_lambda: 1e2,
            max_backtracks: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RomSolution {
    pub reduced: DVector<f64>,
    pub iterations: usize,
    pub objective: f64,
    /// `||h~||_inf` at the returned point.
    pub violation: f64,
    pub kkt_residual: f64,
    pub converged: bool,
    /// Merit value after every accepted step.
    pub merit_history: Vec<f64>,
}

struct Evaluation {
    g: DVector<f64>,
    c: DVector<f64>,
    jac: DMatrix<f64>,
    objective: f64,
}

fn evaluate(
    inst: &RomInstance,
    y: &DVector<f64>,
    interpolants: &[DeimInterpolant],
    system: &dyn LiftedSystem,
) -> Result<Evaluation, DeimError> {
    let r = &inst.b * y - &inst.f;
    let g = inst.b.tr_mul(&r);
    let (c, jac) = evaluate_constraint_reduced(y, interpolants, system)?;
    Ok(Evaluation {
        g,
        c,
        jac,
        objective: 0.5 * r.norm_squared(),
    })
}

struct Step {
    p: DVector<f64>,
    nu: DVector<f64>,
    /// `Z^T g` with `Z` spanning the null space of the constraint Jacobian.
    projected_gradient: DVector<f64>,
}

/// Householder QR of a small dense matrix, `A P = Q R`. The reflectors
/// are kept so `Q` can be applied or formed on demand.
struct SmallQr {
    /// `R` in the upper triangle.
    r: DMatrix<f64>,
    reflectors: Vec<(Vec<f64>, f64)>,
    /// Column `j` of `A P` is column `perm[j]` of `A`.
    perm: Vec<usize>,
}

impl SmallQr {
    /// Factorises the first `n_factor` columns of `a`, pivoting on the
    /// largest remaining column norm when `pivot` is set. Trailing columns
    /// are carried along, so they end up multiplied by `Q^T`.
    fn new(mut a: DMatrix<f64>, n_factor: usize, pivot: bool) -> Self {
        let (rows, cols) = a.shape();
        let mut perm: Vec<usize> = (0..cols).collect();
        let mut reflectors = Vec::with_capacity(n_factor.min(rows));
        for j in 0..n_factor.min(rows) {
            if pivot {
                let mut best = (j, -1.0);
                for c in j..n_factor {
                    let n2: f64 = a.column(c).as_slice()[j..].iter().map(|x| x * x).sum();
                    if n2 > best.1 {
                        best = (c, n2);
                    }
                }
                if best.0 != j {
                    a.swap_columns(j, best.0);
                    perm.swap(j, best.0);
                }
            }
            let mut v: Vec<f64> = a.column(j).as_slice()[j..].to_vec();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let alpha = if v[0] > 0.0 { -norm } else { norm };
            v[0] -= alpha;
            let vv: f64 = v.iter().map(|x| x * x).sum();
            let beta = if vv > 0.0 { 2.0 / vv } else { 0.0 };
            for c in j..cols {
                reflect(&v, beta, &mut a.column_mut(c).as_mut_slice()[j..]);
            }
            a.column_mut(j).as_mut_slice()[j + 1..].fill(0.0);
            reflectors.push((v, beta));
        }
        Self { r: a, reflectors, perm }
    }

    /// The full orthogonal factor.
    fn q(&self) -> DMatrix<f64> {
        let n = self.r.nrows();
        let mut q = DMatrix::identity(n, n);
        for (j, (v, beta)) in self.reflectors.iter().enumerate().rev() {
            for c in j..n {
                reflect(v, *beta, &mut q.column_mut(c).as_mut_slice()[j..]);
            }
        }
        q
    }
}

/// Applies `I - beta v v^T` to `x`.
fn reflect(v: &[f64], beta: f64, x: &mut [f64]) {
    let s = beta * v.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>();
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= s * vi;
    }
}

/// Solves `R x = b` (or `R^T x = b` when `transpose`) for the leading
/// `n x n` upper triangle of `r`.
fn triangular_solve(r: &DMatrix<f64>, b: &[f64], transpose: bool) -> Option<Vec<f64>> {
    let n = b.len();
    let mut x = b.to_vec();
    if transpose {
        for i in 0..n {
            for j in 0..i {
                x[i] -= r[(j, i)] * x[j];
            }
            x[i] /= r[(i, i)];
        }
    } else {
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= r[(i, j)] * x[j];
            }
            x[i] /= r[(i, i)];
        }
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Solves `min 1/2 ||B (y + p) - f||^2 + lambda/2 ||p_Z||^2` subject to
/// `J p = -c` by the null-space method. A column-pivoted QR of `J^T` gives
/// the particular solution and an orthonormal basis `Z` of `null(J)`; the
/// correction in `null(J)` is the least-squares solution of the stacked
/// system `[B Z; sqrt(shift) I] w = [-r0; 0]`. Working with `B` instead of
/// `B^T B` keeps the condition number from being squared.
fn qp_step(inst: &RomInstance, y: &DVector<f64>, ev: &Evaluation, lambda: f64) -> Option<Step> {
    let k = y.len();
    let m = ev.c.len();
    let (p0, z, range) = if m == 0 {
        (DVector::zeros(k), DMatrix::identity(k, k), None)
    } else {
        let qr = SmallQr::new(ev.jac.transpose(), m, true);
        let q = qr.q();
        let d0 = qr.r[(0, 0)].abs();
        let rank = (0..m.min(k)).take_while(|&i| qr.r[(i, i)].abs() > 1e-12 * d0).count();
        let c_perm: Vec<f64> = qr.perm[..rank].iter().map(|&j| -ev.c[j]).collect();
        let w = triangular_solve(&qr.r, &c_perm, true)?;
        let q1 = q.columns(0, rank).into_owned();
        let p0 = &q1 * DVector::from_vec(w);
        let z = q.columns(rank, k - rank).into_owned();
        (p0, z, Some((q1, qr.r, qr.perm, rank)))
    };

    let r0 = &inst.b * (y + &p0) - &inst.f;
    let mut p = p0;
    let nz = z.ncols();
    if nz > 0 {
        let bz = &inst.b * &z;
        let shift = lambda.sqrt() * bz.norm();
        // [B Z, -r0; shift I, 0], factorised on the first nz columns
        let mut stacked = DMatrix::zeros(k + nz, nz + 1);
        stacked.view_mut((0, 0), (k, nz)).copy_from(&bz);
        stacked.view_mut((k, 0), (nz, nz)).fill_diagonal(shift);
        stacked.view_mut((0, nz), (k, 1)).copy_from(&(-&r0));
        let qr = SmallQr::new(stacked, nz, false);
        let rhs: Vec<f64> = (0..nz).map(|i| qr.r[(i, nz)]).collect();
        let w = triangular_solve(&qr.r, &rhs, false)?;
        p += &z * DVector::from_vec(w);
    }

    let mut nu = DVector::zeros(m);
    if let Some((q1, r, perm, rank)) = range {
        let t = -(&ev.g + inst.b.tr_mul(&(&inst.b * &p)));
        let rhs = q1.tr_mul(&t);
        let x = triangular_solve(&r, rhs.as_slice(), false)?;
        for (j, v) in x.into_iter().enumerate().take(rank) {
            nu[perm[j]] = v;
        }
    }
    let projected_gradient = z.tr_mul(&ev.g);
    let finite = p.iter().chain(nu.iter()).all(|v| v.is_finite());
    finite.then_some(Step {
        p,
        nu,
        projected_gradient,
    })
}

/// Minimises `1/2 ||B~ y~ - f~||^2` subject to `h~(y~) = 0`.
///
/// Each iteration solves the equality-constrained Gauss-Newton subproblem
/// with a Levenberg shift `lambda` on the free directions (raised tenfold
/// when the step is not finite) and backtracks on the merit
/// `objective + rho ||h~||_1`. A run that exhausts its iterations or its
/// line search returns the last iterate with `converged = false`.
pub fn solve_rom(
    inst: &RomInstance,
    system: &dyn LiftedSystem,
    interpolants: &[DeimInterpolant],
    initial: &DVector<f64>,
    config: &SqpConfig,
) -> Result<RomSolution, RomError> {
    let k = inst.k();
    if initial.len() != k || inst.b.shape() != (k, k) {
        return Err(RomError::DimensionMismatch(format!(
            "initial guess has {} entries, instance is {}x{} with {} right-hand side entries",
            initial.len(),
            inst.b.nrows(),
            inst.b.ncols(),
            k
        )));
    }
    if initial.iter().any(|v| !v.is_finite()) {
        return Err(RomError::DimensionMismatch("non-finite initial guess".into()));
    }
    let b_norm = inst.b.norm();

    let mut y = initial.clone();
    let mut ev = evaluate(inst, &y, interpolants, system)?;
    let mut rho = 0.0f64;
    let mut merit_history = Vec::new();
    let mut kkt_residual;
    let mut iterations = 0;
    let converged = loop {
        let mut lambda = config.lambda0;
        let step = loop {
            if let Some(s) = qp_step(inst, &y, &ev, lambda) {
                break s;
            }
            lambda *= 10.0;
            if lambda > config.max_lambda {
                return Err(RomError::SingularKkt(lambda / 10.0));
            }
        };

        let g_scale = b_norm * (b_norm * y.norm() + inst.f.norm()) + f64::MIN_POSITIVE;
        kkt_residual = step.projected_gradient.amax() / g_scale;
        let violation = ev.c.amax();
        if kkt_residual <= config.tol_kkt && violation <= config.tol_feas * y.amax().max(1.0) {
            break true;
        }
        if iterations == config.max_iter {
            log::warn!("reduced solve: no convergence in {} iterations", config.max_iter);
            break false;
        }
        iterations += 1;

        let c1 = ev.c.lp_norm(1);
        rho = rho.max(1.1 * step.nu.amax());
        let merit0 = ev.objective + rho * c1;
        let slope = (ev.g.dot(&step.p) - rho * c1).min(0.0);
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=config.max_backtracks {
            let trial = &y + alpha * &step.p;
            if let Ok(te) = evaluate(inst, &trial, interpolants, system) {
                let merit = te.objective + rho * te.c.lp_norm(1);
                if merit <= merit0 + 1e-4 * alpha * slope {
                    accepted = Some((trial, te, merit));
                    break;
                }
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((trial, te, merit)) => {
                y = trial;
                ev = te;
                merit_history.push(merit);
            }
            None => {
                log::warn!("reduced solve: line search failed at iteration {iterations}");
                break false;
            }
        }
    };
    Ok(RomSolution {
        violation: ev.c.amax(),
        objective: ev.objective,
        reduced: y,
        iterations,
        kkt_residual,
        converged,
        merit_history,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuildOptions {
    pub mode: BasisMode,
    pub truncation: Truncation,
    /// Truncation of the nonlinear-term bases, which fixes `q`.
    pub deim_truncation: Truncation,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            mode: BasisMode::PerBlock,
            truncation: Truncation::Full,
            deim_truncation: Truncation::Full,
        }
    }
}

/// Descriptive fields carried into the manifest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatabaseMeta {
    pub mesh: String,
    pub operator: String,
    pub seed: Option<u64>,
}

/// Reduced systems at the training points with their shared trial basis and
/// interpolants.
#[derive(Debug, Clone)]
pub struct RomDatabase {
    pub system: SystemSpec,
    pub options: BuildOptions,
    pub meta: DatabaseMeta,
    pub ranges: Vec<[f64; 2]>,
    pub basis: BlockBasis,
    pub interpolants: Vec<DeimInterpolant>,
    pub instances: Vec<RomInstance>,
    /// `Phi^T y` of every training snapshot.
    pub reduced_snapshots: Vec<DVector<f64>>,
}

/// Builds the database from training snapshots (columns of `snapshots`,
/// one per entry of `thetas`).
pub fn build_database(
    system: SystemSpec,
    op: &BlockOperator,
    snapshots: &DMatrix<f64>,
    thetas: &[Vec<f64>],
    ranges: Vec<[f64; 2]>,
    options: BuildOptions,
    meta: DatabaseMeta,
) -> Result<RomDatabase, RomError> {
    let l = system.n_observables();
    if snapshots.ncols() != thetas.len() || snapshots.ncols() == 0 {
        return Err(RomError::DimensionMismatch(format!(
            "{} snapshots for {} parameter points",
            snapshots.ncols(),
            thetas.len()
        )));
    }
    if op.block_cols() != l || snapshots.nrows() != l * op.n_cells() {
        return Err(RomError::DimensionMismatch(format!(
            "snapshots have {} rows, expected {} observables on {} cells",
            snapshots.nrows(),
            l,
            op.n_cells()
        )));
    }
    let n = op.n_cells();
    let basis = build_trial_basis(snapshots, l, options.mode, options.truncation)?;

    let systems = thetas
        .iter()
        .map(|t| system.instantiate(t))
        .collect::<Result<Vec<_>, _>>()?;
    let probe = &systems[0];
    let mut interpolants = Vec::new();
    let mut cell = vec![0.0; l];
    for family in 0..probe.n_constraints() {
        let mut nl = DMatrix::zeros(n, snapshots.ncols());
        for (j, sys) in systems.iter().enumerate() {
            for i in 0..n {
                for (o, v) in cell.iter_mut().enumerate() {
                    *v = snapshots[(o * n + i, j)];
                }
                nl[(i, j)] = sys
                    .nonlinear(family, &cell)
                    .ok_or(ObservableError::Singular { family, cell: i })?;
            }
        }
        let x = compute_pod(&nl, options.deim_truncation, &format!("nonlinear term {}", family + 1))?.phi;
        let points = select_points(&x)?;
        let target = probe.target(family);
        let target_basis = match options.mode {
            BasisMode::PerBlock => basis.bases[target].phi.clone(),
            BasisMode::Joint => x.clone(),
        };
        interpolants.push(build_interpolant(
            probe.as_ref(),
            family,
            &x,
            &points,
            &target_basis,
            &basis,
        )?);
    }

    let projector = Projector::new(op, &basis)?;
    let mut instances = Vec::with_capacity(thetas.len());
    let mut reduced_snapshots = Vec::with_capacity(thetas.len());
    for (j, theta) in thetas.iter().enumerate() {
        let y = snapshots.column(j);
        let f = op.apply(y.as_slice())?;
        instances.push(projector.project(&f, theta.clone())?);
        reduced_snapshots.push(basis.phi.tr_mul(&y));
    }
    Ok(RomDatabase {
        system,
        options,
        meta,
        ranges,
        basis,
        interpolants,
        instances,
        reduced_snapshots,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct DeimManifest {
    family: usize,
    target: usize,
    points: Vec<u32>,
    condition: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Manifest {
    format: u32,
    system: SystemSpec,
    meta: DatabaseMeta,
    options: BuildOptions,
    n_cells: usize,
    n_observables: usize,
    k: usize,
    block_k: Vec<usize>,
    sigma: Vec<Vec<f64>>,
    ranges: Vec<[f64; 2]>,
    thetas: Vec<Vec<f64>>,
    deim: Vec<DeimManifest>,
}

impl RomDatabase {
    pub fn k(&self) -> usize {
        self.basis.k()
    }

    pub fn thetas(&self) -> Vec<Vec<f64>> {
        self.instances.iter().map(|i| i.theta.clone()).collect()
    }

    fn manifest(&self) -> Manifest {
        Manifest {
            format: 1,
            system: self.system,
            meta: self.meta.clone(),
            options: self.options,
            n_cells: self.basis.n_cells,
            n_observables: self.basis.n_blocks,
            k: self.k(),
            block_k: self.basis.bases.iter().map(PodBasis::k).collect(),
            sigma: self.basis.bases.iter().map(|b| b.sigma.clone()).collect(),
            ranges: self.ranges.clone(),
            thetas: self.thetas(),
            deim: self
                .interpolants
                .iter()
                .map(|d| DeimManifest {
                    family: d.family,
                    target: d.target,
                    points: d.points.iter().map(|&p| p as u32).collect(),
                    condition: d.condition,
                })
                .collect(),
        }
    }

    /// Writes `manifest.json` and the `ROMB` matrices into `dir`.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<(), RomError> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|source| PersistError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        for (j, b) in self.basis.bases.iter().enumerate() {
            write_matrix(dir.join(format!("basis_{j}.romb")), &b.phi)?;
        }
        for (i, inst) in self.instances.iter().enumerate() {
            write_matrix(dir.join(format!("Btilde_{i}.romb")), &inst.b)?;
            write_matrix(
                dir.join(format!("ftilde_{i}.romb")),
                &DMatrix::from_column_slice(inst.k(), 1, inst.f.as_slice()),
            )?;
            let r = &self.reduced_snapshots[i];
            write_matrix(
                dir.join(format!("yred_{i}.romb")),
                &DMatrix::from_column_slice(r.len(), 1, r.as_slice()),
            )?;
        }
        for d in &self.interpolants {
            write_matrix(dir.join(format!("deim_{}_basis.romb", d.family)), &d.basis)?;
            write_matrix(dir.join(format!("deim_{}_left.romb", d.family)), &d.left_factor)?;
            write_matrix(dir.join(format!("deim_{}_linear.romb", d.family)), &d.linear)?;
        }
        write_json(dir.join("manifest.json"), &self.manifest())?;
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self, RomError> {
        let dir = dir.as_ref();
        let man: Manifest = read_json(dir.join("manifest.json"))?;
        if man.format != 1 {
            return Err(RomError::Database(format!("unsupported format {}", man.format)));
        }
        let bases = man
            .block_k
            .iter()
            .zip(&man.sigma)
            .enumerate()
            .map(|(j, (&k, sigma))| {
                let phi = read_matrix(dir.join(format!("basis_{j}.romb")))?;
                if phi.ncols() != k {
                    return Err(RomError::Database(format!(
                        "basis {j} has {} columns, manifest says {k}",
                        phi.ncols()
                    )));
                }
                Ok(PodBasis {
                    phi,
                    sigma: sigma.clone(),
                    source: match man.options.mode {
                        BasisMode::PerBlock => format!("observable {}", j + 1),
                        BasisMode::Joint => "joint".into(),
                    },
                })
            })
            .collect::<Result<Vec<_>, RomError>>()?;
        let basis = match man.options.mode {
            BasisMode::PerBlock => assemble_block_basis(bases)?,
            BasisMode::Joint => {
                let b = bases
                    .into_iter()
                    .next()
                    .ok_or_else(|| RomError::Database("missing joint basis".into()))?;
                BlockBasis {
                    mode: BasisMode::Joint,
                    n_cells: man.n_cells,
                    n_blocks: man.n_observables,
                    phi: b.phi.clone(),
                    bases: vec![b],
                }
            }
        };
        if basis.k() != man.k || basis.n_cells != man.n_cells {
            return Err(RomError::Database("basis does not match the manifest".into()));
        }
        let mut instances = Vec::new();
        let mut reduced_snapshots = Vec::new();
        for (i, theta) in man.thetas.iter().enumerate() {
            let b = read_matrix(dir.join(format!("Btilde_{i}.romb")))?;
            let f = read_matrix(dir.join(format!("ftilde_{i}.romb")))?;
            let r = read_matrix(dir.join(format!("yred_{i}.romb")))?;
            if b.shape() != (man.k, man.k) || f.shape() != (man.k, 1) || r.shape() != (man.k, 1) {
                return Err(RomError::Database(format!("reduced system {i} has the wrong size")));
            }
            instances.push(RomInstance {
                b,
                f: f.column(0).into_owned(),
                theta: theta.clone(),
            });
            reduced_snapshots.push(r.column(0).into_owned());
        }
        let interpolants = man
            .deim
            .iter()
            .map(|d| {
                let x = read_matrix(dir.join(format!("deim_{}_basis.romb", d.family)))?;
                let left_factor = read_matrix(dir.join(format!("deim_{}_left.romb", d.family)))?;
                let linear = read_matrix(dir.join(format!("deim_{}_linear.romb", d.family)))?;
                let points: Vec<usize> = d.points.iter().map(|&p| p as usize).collect();
                if points.iter().any(|&p| p >= man.n_cells)
                    || left_factor.ncols() != points.len()
                    || linear.ncols() != man.k
                    || x.shape() != (man.n_cells, points.len())
                {
                    return Err(RomError::Database(format!("interpolant {} is inconsistent", d.family)));
                }
                let sampled = (0..man.n_observables)
                    .map(|j| {
                        let rows = basis.observable_rows(j);
                        DMatrix::from_fn(points.len(), man.k, |a, b| rows[(points[a], b)])
                    })
                    .collect();
                Ok(DeimInterpolant {
                    family: d.family,
                    target: d.target,
                    basis: x,
                    points,
                    left_factor,
                    linear,
                    sampled,
                    condition: d.condition,
                })
            })
            .collect::<Result<Vec<_>, RomError>>()?;
        Ok(Self {
            system: man.system,
            options: man.options,
            meta: man.meta,
            ranges: man.ranges,
            basis,
            interpolants,
            instances,
            reduced_snapshots,
        })
    }
}
