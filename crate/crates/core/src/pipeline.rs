//! End-to-end offline/online workflow for the canonical problem:
//! sample -> full-order snapshots -> POD -> operator assembly -> database ->
//! prediction and validation at held-out parameters.
//!
//! Every stage reads the previous stage's files from the output directory
//! and writes its own, so stages can be rerun in isolation. Outputs are
//! written under a `.partial` name and renamed once complete.

use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::fom::{
    generate_snapshots, lhs_sample, solve_canonical, CanonicalFom, DesignRole, FomError, NewtonConfig, ParameterDesign,
    SnapshotSet, CANONICAL_RANGE,
};
use crate::fvm::{canonical_operator, MassScaling};
use crate::interp::{interpolate_rom, stencil_size, LagrangeStencil};
use crate::mesh::{build_connectivity, compute_geometry, crossed_unit_square, load_mesh, MeshGeometry};
use crate::persist::{read_json, read_matrix, write_json, write_matrix, PersistError};
use crate::pod::{build_trial_basis, BasisMode, Truncation};
use crate::rom::{
    build_database, reconstruct, solve_rom, BuildOptions, DatabaseMeta, RomDatabase, RomSolution, SqpConfig, SystemSpec,
};

/// Validation points of the reference canonical study.
pub const REFERENCE_VALIDATION: [[f64; 2]; 12] = [
    [0.94, 1.90],
    [0.45, 0.54],
    [0.70, 0.86],
    [1.61, 1.40],
    [1.53, 0.69],
    [1.69, 0.86],
    [1.65, 1.26],
    [0.30, 0.17],
    [0.91, 0.91],
    [0.96, 0.95],
    [1.61, 0.81],
    [1.81, 0.08],
];

/// Side count of the built-in mesh used when no mesh file is configured.
pub const DEFAULT_MESH_DIVISIONS: usize = 16;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("stage `{stage}` failed")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },
}

fn stage<E: std::error::Error + Send + Sync + 'static>(stage: &'static str) -> impl FnOnce(E) -> PipelineError {
    move |e| PipelineError::Stage {
        stage,
        source: Box::new(e),
    }
}

/// `e` followed by its sources, separated by `: `.
pub fn error_chain(e: &dyn std::error::Error) -> String {
    let mut s = e.to_string();
    let mut cur = e.source();
    while let Some(c) = cur {
        s.push_str(": ");
        s.push_str(&c.to_string());
        cur = c.source();
    }
    s
}

fn stage_msg(stage: &'static str, msg: String) -> PipelineError {
    PipelineError::Stage {
        stage,
        source: msg.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationSet {
    /// Explicit parameter points.
    Points(Vec<Vec<f64>>),
    /// Latin-hypercube draw of this many points, seeded from `seed + 1`.
    Random(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Mesh file in the `mesh2d` text format; the built-in crossed 16x16
    /// unit-square mesh when absent.
    pub mesh: Option<PathBuf>,
    pub system: SystemSpec,
    pub ranges: Vec<[f64; 2]>,
    pub m_train: usize,
    pub seed: u64,
    pub validation: ValidationSet,
    pub mode: BasisMode,
    pub truncation: Truncation,
    /// Truncation of the nonlinear-term bases, which fixes the DEIM size.
    pub deim_truncation: Truncation,
    pub mass: MassScaling,
    pub degree: usize,
    pub newton: NewtonConfig,
    pub sqp: SqpConfig,
    /// Largest acceptable relative error in percent.
    pub max_error: f64,
    /// Largest acceptable median relative error in percent.
    pub max_median_error: f64,
    pub out_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            mesh: None,
            system: SystemSpec::Canonical,
            ranges: CANONICAL_RANGE.to_vec(),
            m_train: 20,
            seed: 42,
            validation: ValidationSet::Points(REFERENCE_VALIDATION.iter().map(|p| p.to_vec()).collect()),
            mode: BasisMode::PerBlock,
            truncation: Truncation::Full,
            deim_truncation: Truncation::Full,
            mass: MassScaling::CellArea,
            degree: 2,
            newton: NewtonConfig::default(),
            sqp: SqpConfig::default(),
            max_error: 5.0,
            max_median_error: 1.5,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl PipelineConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let cfg: Self = read_json(path).map_err(|e| PipelineError::Config(error_chain(&e)))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if self.system != SystemSpec::Canonical {
            return bad("only the canonical system has a full-order solver".into());
        }
        if self.ranges.len() != 2
            || self
                .ranges
                .iter()
                .any(|r| !(r[0] < r[1]) || !r[0].is_finite() || !r[1].is_finite())
        {
            return bad(format!("need two nonempty parameter ranges, got {:?}", self.ranges));
        }
        if self.m_train == 0 {
            return bad("m_train must be positive".into());
        }
        for t in [self.truncation, self.deim_truncation] {
            match t {
                Truncation::Energy(e) if !(e > 0.0 && e <= 1.0) => {
                    return bad(format!("energy fraction {e} outside (0, 1]"))
                }
                Truncation::Fixed(0) => return bad("fixed truncation must keep at least one mode".into()),
                _ => {}
            }
        }
        match &self.validation {
            ValidationSet::Points(p) if p.iter().any(|t| t.len() != 2) => {
                return bad("validation points need 2 coordinates".into())
            }
            ValidationSet::Random(0) => return bad("random validation set is empty".into()),
            _ => {}
        }
        if let Some(m) = &self.mesh {
            if !m.exists() {
                return bad(format!("mesh file {} does not exist", m.display()));
            }
        }
        Ok(())
    }

    fn mesh_label(&self) -> String {
        match &self.mesh {
            Some(p) => p.display().to_string(),
            None => format!("crossed_unit_square({DEFAULT_MESH_DIVISIONS})"),
        }
    }
}

pub fn load_geometry(mesh: Option<&Path>) -> Result<MeshGeometry, PipelineError> {
    let raw = match mesh {
        Some(p) => load_mesh(p).map_err(stage("mesh"))?,
        None => crossed_unit_square(DEFAULT_MESH_DIVISIONS),
    };
    compute_geometry(build_connectivity(raw).map_err(stage("mesh"))?).map_err(stage("mesh"))
}

/// `100 ||fom - rom|| / ||fom||`.
pub fn relative_error(fom: &[f64], rom: &[f64]) -> Result<f64, PipelineError> {
    if fom.len() != rom.len() {
        return Err(stage_msg(
            "validate",
            format!("vectors of length {} and {}", fom.len(), rom.len()),
        ));
    }
    let den = fom.iter().map(|v| v * v).sum::<f64>().sqrt();
    if den == 0.0 {
        return Err(stage_msg("validate", "reference vector has zero norm".into()));
    }
    let num = fom.iter().zip(rom).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    Ok(100.0 * num / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Csv,
    Vtk,
}

/// Writes one cell-centred field: CSV rows `cell_id,cx,cy,value`, or a
/// legacy ASCII VTK unstructured grid with the values as cell data.
pub fn export_field(
    geom: &MeshGeometry,
    name: &str,
    values: &[f64],
    format: ExportFormat,
    path: impl AsRef<Path>,
) -> Result<(), PipelineError> {
    use std::fmt::Write;
    let n = geom.n_cells();
    if values.len() != n {
        return Err(stage_msg(
            "export",
            format!("field has {} values, mesh has {n} cells", values.len()),
        ));
    }
    let mut out = String::new();
    match format {
        ExportFormat::Csv => {
            out.push_str("cell_id,cx,cy,value\n");
            for (i, (c, v)) in geom.cell_centroids.iter().zip(values).enumerate() {
                writeln!(out, "{i},{},{},{v}", c[0], c[1]).unwrap();
            }
        }
        ExportFormat::Vtk => {
            let raw = &geom.mesh().raw;
            writeln!(
                out,
                "# vtk DataFile Version 2.0\n{name}\nASCII\nDATASET UNSTRUCTURED_GRID"
            )
            .unwrap();
            writeln!(out, "POINTS {} double", raw.nodes.len()).unwrap();
            for p in &raw.nodes {
                writeln!(out, "{} {} 0", p[0], p[1]).unwrap();
            }
            writeln!(out, "CELLS {n} {}", 4 * n).unwrap();
            for c in &raw.cells {
                writeln!(out, "3 {} {} {}", c[0], c[1], c[2]).unwrap();
            }
            writeln!(out, "CELL_TYPES {n}").unwrap();
            for _ in 0..n {
                out.push_str("5\n");
            }
            let field: String = name.chars().map(|c| if c.is_whitespace() { '_' } else { c }).collect();
            writeln!(out, "CELL_DATA {n}\nSCALARS {field} double 1\nLOOKUP_TABLE default").unwrap();
            for v in values {
                writeln!(out, "{v}").unwrap();
            }
        }
    }
    let path = path.as_ref();
    std::fs::write(path, out).map_err(|source| {
        stage("export")(PersistError::Io {
            path: path.display().to_string(),
            source,
        })
    })
}

/// A reduced-order prediction at one parameter point.
#[derive(Debug, Clone)]
pub struct Prediction {
    pub theta: Vec<f64>,
    pub solution: RomSolution,
    /// Reconstructed observables, block-stacked.
    pub observables: Vec<f64>,
    pub stencil: LagrangeStencil,
}

/// Interpolates the reduced system at `theta`, solves it and reconstructs
/// the observables. The starting point interpolates the training
/// coordinates `Phi^T y` over the same stencil, falling back to those of
/// the nearest training point. With fewer training points than the
/// requested degree needs, the degree is lowered.
pub fn predict(db: &RomDatabase, theta: &[f64], degree: usize, sqp: &SqpConfig) -> Result<Prediction, PipelineError> {
    let m = db.instances.len();
    let dim = db.ranges.len();
    let mut degree_used = degree;
    while degree_used > 0 && stencil_size(degree_used, dim) > m {
        degree_used -= 1;
    }
    if degree_used != degree {
        log::warn!("{m} training points support interpolation degree {degree_used}, not {degree}");
    }
    let (inst, stencil) = interpolate_rom(db, theta, degree_used).map_err(stage("predict"))?;
    let mut initial = DVector::zeros(db.k());
    for (&i, &w) in stencil.indices.iter().zip(stencil.weights.iter()) {
        initial.axpy(w, &db.reduced_snapshots[i], 1.0);
    }
    if initial.iter().any(|v| !v.is_finite()) {
        initial = db.reduced_snapshots[stencil.indices[0]].clone();
    }
    let system = db.system.instantiate(theta).map_err(stage("predict"))?;
    let solution = solve_rom(&inst, system.as_ref(), &db.interpolants, &initial, sqp).map_err(stage("predict"))?;
    let observables = reconstruct(&db.basis, &solution.reduced).map_err(stage("predict"))?;
    Ok(Prediction {
        theta: theta.to_vec(),
        solution,
        observables,
        stencil,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationCase {
    pub case: usize,
    pub theta: Vec<f64>,
    /// Percent, over all observables concatenated.
    pub relative_error: f64,
    pub converged: bool,
    pub sqp_iterations: usize,
    pub objective: f64,
    pub violation: f64,
    pub newton_iterations: usize,
    pub stencil: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationSummary {
    pub k: usize,
    pub cases: Vec<ValidationCase>,
    pub max_error: f64,
    pub median_error: f64,
    pub passed: bool,
}

/// Wall-clock seconds per validation point. The full-order time is a fresh
/// Newton solve; the reduced time covers interpolation, solve and
/// reconstruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub fom_seconds: Vec<f64>,
    pub rom_seconds: Vec<f64>,
    pub fom_total: f64,
    pub rom_total: f64,
    pub speedup: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub summary: ValidationSummary,
    pub timing: Timing,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    match n {
        0 => f64::NAN,
        _ if n % 2 == 1 => v[n / 2],
        _ => 0.5 * (v[n / 2 - 1] + v[n / 2]),
    }
}

/// File names inside the output directory.
pub mod files {
    pub const TRAIN: &str = "design_train.json";
    pub const VALIDATE: &str = "design_validate.json";
    pub const SNAPSHOTS: &str = "snapshots.romb";
    pub const SNAPSHOT_META: &str = "snapshots.json";
    pub const POD: &str = "pod";
    pub const DATABASE: &str = "rom";
    pub const REPORT: &str = "report.json";
    pub const REPORT_CSV: &str = "report.csv";
    pub const TIMING: &str = "timing.json";
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SnapshotMeta {
    system: String,
    n_cells: usize,
    thetas: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PodMeta {
    mode: BasisMode,
    truncation: Truncation,
    k: usize,
    block_k: Vec<usize>,
    sigma: Vec<Vec<f64>>,
    energy_fraction: Vec<f64>,
}

/// Stages with on-disk inputs and outputs rooted at `config.out_dir`.
pub struct Pipeline {
    pub config: PipelineConfig,
    geom: Option<MeshGeometry>,
}

fn partial(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".partial");
    PathBuf::from(s)
}

fn remove_path(path: &Path) {
    if path.is_dir() {
        let _ = std::fs::remove_dir_all(path);
    } else if path.exists() {
        let _ = std::fs::remove_file(path);
    }
}

/// Runs `write` against a `.partial` sibling of `target` and renames it into
/// place on success; on failure the partial output is removed.
fn commit<T>(
    name: &'static str,
    target: &Path,
    write: impl FnOnce(&Path) -> Result<T, PipelineError>,
) -> Result<T, PipelineError> {
    let tmp = partial(target);
    remove_path(&tmp);
    match write(&tmp) {
        Ok(v) => {
            remove_path(target);
            std::fs::rename(&tmp, target).map_err(|source| {
                stage(name)(PersistError::Io {
                    path: target.display().to_string(),
                    source,
                })
            })?;
            Ok(v)
        }
        Err(e) => {
            remove_path(&tmp);
            Err(e)
        }
    }
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Result<Self, PipelineError> {
        config.validate()?;
        std::fs::create_dir_all(&config.out_dir).map_err(|source| {
            stage("setup")(PersistError::Io {
                path: config.out_dir.display().to_string(),
                source,
            })
        })?;
        Ok(Self { config, geom: None })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.config.out_dir.join(name)
    }

    pub fn geometry(&mut self) -> Result<&MeshGeometry, PipelineError> {
        if self.geom.is_none() {
            self.geom = Some(load_geometry(self.config.mesh.as_deref())?);
        }
        Ok(self.geom.as_ref().unwrap())
    }

    /// Draws the training design and fixes the validation points.
    pub fn sample(&mut self) -> Result<(ParameterDesign, ParameterDesign), PipelineError> {
        let c = &self.config;
        let train = lhs_sample(&c.ranges, c.m_train, c.seed).map_err(stage("sample"))?;
        let validate = match &c.validation {
            ValidationSet::Points(p) => {
                for t in p {
                    if t.iter().zip(&c.ranges).any(|(v, r)| *v < r[0] || *v > r[1]) {
                        log::warn!("validation point {t:?} lies outside the parameter ranges");
                    }
                }
                ParameterDesign {
                    ranges: c.ranges.clone(),
                    points: p.clone(),
                    role: DesignRole::Validate,
                    seed: None,
                }
            }
            ValidationSet::Random(n) => {
                let mut d = lhs_sample(&c.ranges, *n, c.seed.wrapping_add(1)).map_err(stage("sample"))?;
                d.role = DesignRole::Validate;
                d
            }
        };
        commit("sample", &self.path(files::TRAIN), |p| {
            write_json(p, &train).map_err(stage("sample"))
        })?;
        commit("sample", &self.path(files::VALIDATE), |p| {
            write_json(p, &validate).map_err(stage("sample"))
        })?;
        Ok((train, validate))
    }

    fn fom(&mut self) -> Result<CanonicalFom, PipelineError> {
        CanonicalFom::new(self.geometry()?).map_err(stage("snapshots"))
    }

    pub fn snapshots(&mut self) -> Result<SnapshotSet, PipelineError> {
        let design: ParameterDesign = read_json(self.path(files::TRAIN)).map_err(stage("snapshots"))?;
        let fom = self.fom()?;
        let set = generate_snapshots(&fom, &design, &self.config.newton).map_err(stage("snapshots"))?;
        let meta = SnapshotMeta {
            system: set.system.clone(),
            n_cells: set.n_cells,
            thetas: set.thetas.clone(),
        };
        commit("snapshots", &self.path(files::SNAPSHOTS), |p| {
            write_matrix(p, &set.matrix).map_err(stage("snapshots"))
        })?;
        commit("snapshots", &self.path(files::SNAPSHOT_META), |p| {
            write_json(p, &meta).map_err(stage("snapshots"))
        })?;
        Ok(set)
    }

    fn load_snapshots(&self, name: &'static str) -> Result<SnapshotSet, PipelineError> {
        let matrix = read_matrix(self.path(files::SNAPSHOTS)).map_err(stage(name))?;
        let meta: SnapshotMeta = read_json(self.path(files::SNAPSHOT_META)).map_err(stage(name))?;
        if matrix.ncols() != meta.thetas.len() {
            return Err(stage_msg(name, "snapshot matrix and metadata disagree".into()));
        }
        Ok(SnapshotSet {
            matrix,
            thetas: meta.thetas,
            system: meta.system,
            n_cells: meta.n_cells,
        })
    }

    /// Computes the trial basis and writes it with its singular values.
    pub fn pod(&mut self) -> Result<usize, PipelineError> {
        let set = self.load_snapshots("pod")?;
        let l = self.config.system.n_observables();
        let basis =
            build_trial_basis(&set.matrix, l, self.config.mode, self.config.truncation).map_err(stage("pod"))?;
        let meta = PodMeta {
            mode: basis.mode,
            truncation: self.config.truncation,
            k: basis.k(),
            block_k: basis.bases.iter().map(|b| b.k()).collect(),
            sigma: basis.bases.iter().map(|b| b.sigma.clone()).collect(),
            energy_fraction: basis.bases.iter().map(|b| b.energy_fraction()).collect(),
        };
        commit("pod", &self.path(files::POD), |dir| {
            std::fs::create_dir_all(dir).map_err(|source| {
                stage("pod")(PersistError::Io {
                    path: dir.display().to_string(),
                    source,
                })
            })?;
            for (j, b) in basis.bases.iter().enumerate() {
                write_matrix(dir.join(format!("basis_{j}.romb")), &b.phi).map_err(stage("pod"))?;
            }
            write_json(dir.join("pod.json"), &meta).map_err(stage("pod"))
        })?;
        Ok(basis.k())
    }

    /// Assembles the operator, recovers the right-hand sides and projects
    /// every training snapshot into the persisted database.
    pub fn build(&mut self) -> Result<RomDatabase, PipelineError> {
        let set = self.load_snapshots("build")?;
        let mass = self.config.mass;
        let op = canonical_operator(self.geometry()?, mass).map_err(stage("build"))?;
        let c = &self.config;
        let options = BuildOptions {
            mode: c.mode,
            truncation: c.truncation,
            deim_truncation: c.deim_truncation,
        };
        let meta = DatabaseMeta {
            mesh: c.mesh_label(),
            operator: format!(
                "canonical, {} mass",
                serde_json::to_value(mass).unwrap().as_str().unwrap_or("")
            ),
            seed: Some(c.seed),
        };
        let db = build_database(c.system, &op, &set.matrix, &set.thetas, c.ranges.clone(), options, meta)
            .map_err(stage("build"))?;
        commit("build", &self.path(files::DATABASE), |dir| {
            db.save(dir).map_err(stage("build"))
        })?;
        Ok(db)
    }

    pub fn load_database(&self) -> Result<RomDatabase, PipelineError> {
        RomDatabase::load(self.path(files::DATABASE)).map_err(stage("predict"))
    }

    /// Predicts every validation point, compares with fresh full-order
    /// solves and writes `report.json`, `report.csv` and `timing.json`.
    pub fn validate(&mut self) -> Result<ValidationReport, PipelineError> {
        let design: ParameterDesign = read_json(self.path(files::VALIDATE)).map_err(stage("validate"))?;
        let db = self.load_database().map_err(|e| match e {
            PipelineError::Stage { source, .. } => PipelineError::Stage {
                stage: "validate",
                source,
            },
            other => other,
        })?;
        let fom = self.fom()?;
        let c = self.config.clone();
        let mut cases = Vec::new();
        let (mut fom_seconds, mut rom_seconds) = (Vec::new(), Vec::new());
        for (i, theta) in design.points.iter().enumerate() {
            let t0 = Instant::now();
            let truth = solve_canonical(&fom, [theta[0], theta[1]], &c.newton)
                .map_err(|e| FomError::AtPoint {
                    theta: theta.clone(),
                    source: Box::new(e),
                })
                .map_err(stage("validate"))?;
            fom_seconds.push(t0.elapsed().as_secs_f64());
            let t1 = Instant::now();
            let pred = predict(&db, theta, c.degree, &c.sqp)?;
            rom_seconds.push(t1.elapsed().as_secs_f64());

            let system = c.system.instantiate(theta).map_err(stage("validate"))?;
            let lifted = system.lift(&truth.u).map_err(stage("validate"))?;
            let err = relative_error(&lifted, &pred.observables)?;
            cases.push(ValidationCase {
                case: i + 1,
                theta: theta.clone(),
                relative_error: err,
                converged: pred.solution.converged,
                sqp_iterations: pred.solution.iterations,
                objective: pred.solution.objective,
                violation: pred.solution.violation,
                newton_iterations: truth.iterations,
                stencil: pred.stencil.indices.clone(),
            });
        }
        let errors: Vec<f64> = cases.iter().map(|c| c.relative_error).collect();
        let max_error = errors.iter().copied().fold(0.0, f64::max);
        let median_error = median(&errors);
        let summary = ValidationSummary {
            k: db.k(),
            passed: max_error < c.max_error && median_error < c.max_median_error,
            cases,
            max_error,
            median_error,
        };
        let fom_total: f64 = fom_seconds.iter().sum();
        let rom_total: f64 = rom_seconds.iter().sum();
        let timing = Timing {
            speedup: fom_total / rom_total,
            fom_seconds,
            rom_seconds,
            fom_total,
            rom_total,
        };
        commit("validate", &self.path(files::REPORT), |p| {
            write_json(p, &summary).map_err(stage("validate"))
        })?;
        commit("validate", &self.path(files::REPORT_CSV), |p| {
            std::fs::write(p, report_csv(&summary)).map_err(|source| {
                stage("validate")(PersistError::Io {
                    path: p.display().to_string(),
                    source,
                })
            })
        })?;
        commit("validate", &self.path(files::TIMING), |p| {
            write_json(p, &timing).map_err(stage("validate"))
        })?;
        Ok(ValidationReport { summary, timing })
    }

    /// All stages in order.
    pub fn run(&mut self) -> Result<ValidationReport, PipelineError> {
        self.sample()?;
        self.snapshots()?;
        self.pod()?;
        self.build()?;
        self.validate()
    }
}

pub fn report_csv(summary: &ValidationSummary) -> String {
    let mut s = String::from("case,mu1,mu2,relative_error_percent,converged,sqp_iterations\n");
    for c in &summary.cases {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            c.case, c.theta[0], c.theta[1], c.relative_error, c.converged, c.sqp_iterations
        ));
    }
    s
}
