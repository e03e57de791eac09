//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the
//! process exits non-zero if any fails.
//!
//! Runs without the libtest harness so that the lines are always visible and
//! the timing criteria never share the machine with other tests from this
//! binary.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use nirom::deim::{build_interpolant, evaluate_constraint_reduced, select_points};
use nirom::fom::{solve_canonical, CanonicalFom, NewtonConfig};
use nirom::fvm::{assemble_diffusion, assemble_gradient, Axis, ScalarField};
use nirom::interp::{interpolate_rom, lagrange_fit_eval};
use nirom::mesh::{
    build_connectivity, compute_geometry, crossed_unit_square, perturbed, right_triangle_unit_square, MeshGeometry,
    RawMesh,
};
use nirom::observables::{EulerSystem, LiftedSystem};
use nirom::pipeline::{median, predict, Pipeline, PipelineConfig, ValidationReport};
use nirom::pod::{build_trial_basis, compute_pod, projection_error, BasisMode, Truncation};
use nirom::rom::RomDatabase;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn geometry(raw: RawMesh) -> MeshGeometry {
    compute_geometry(build_connectivity(raw).unwrap()).unwrap()
}

fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

/// Minimum wall time of `reps` runs of `f`.
fn min_time<T>(reps: usize, mut f: impl FnMut() -> T) -> f64 {
    (0..reps)
        .map(|_| {
            let t = Instant::now();
            std::hint::black_box(f());
            t.elapsed().as_secs_f64()
        })
        .fold(f64::INFINITY, f64::min)
}

// Validation points of the reference canonical study, transcribed
// independently of the library constant.
const REFERENCE_POINTS: [(f64, f64); 12] = [
    (0.94, 1.90),
    (0.45, 0.54),
    (0.70, 0.86),
    (1.61, 1.40),
    (1.53, 0.69),
    (1.69, 0.86),
    (1.65, 1.26),
    (0.30, 0.17),
    (0.91, 0.91),
    (0.96, 0.95),
    (1.61, 0.81),
    (1.81, 0.08),
];

/// The canonical study built once and shared by the criteria that need it.
struct Canonical {
    _dir: tempfile::TempDir,
    config: PipelineConfig,
    geom: MeshGeometry,
    db: RomDatabase,
    report: ValidationReport,
    joint: Option<ValidationReport>,
    seconds: f64,
}

fn canonical() -> Result<Canonical, String> {
    let t = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = PipelineConfig {
        out_dir: dir.path().join("per_block"),
        ..PipelineConfig::default()
    };
    let mut p = Pipeline::new(config.clone()).map_err(|e| format!("{e:#?}"))?;
    let report = p.run().map_err(|e| nirom::pipeline::error_chain(&e))?;
    let db = p.load_database().map_err(|e| nirom::pipeline::error_chain(&e))?;
    let geom = p.geometry().map_err(|e| nirom::pipeline::error_chain(&e))?.clone();
    let seconds = t.elapsed().as_secs_f64();
    let joint_config = PipelineConfig {
        out_dir: dir.path().join("joint"),
        mode: BasisMode::Joint,
        ..PipelineConfig::default()
    };
    let joint = Pipeline::new(joint_config).and_then(|mut p| p.run()).ok();
    Ok(Canonical {
        _dir: dir,
        config,
        geom,
        db,
        report,
        joint,
        seconds,
    })
}

fn criterion_1(c: &Canonical) -> Outcome {
    let s = &c.report.summary;
    let thetas: Vec<(f64, f64)> = s.cases.iter().map(|k| (k.theta[0], k.theta[1])).collect();
    if thetas != REFERENCE_POINTS {
        return Err(format!("validation points {thetas:?} differ from the reference points"));
    }
    if c.geom.n_cells() != 1024 {
        return Err(format!("mesh has {} cells", c.geom.n_cells()));
    }
    let errors: Vec<f64> = s.cases.iter().map(|k| k.relative_error).collect();
    let max = errors.iter().copied().fold(0.0, f64::max);
    let med = median(&errors);
    let joint = match &c.joint {
        Some(j) => format!(
            "; joint POD (k = {}): max {:.3} %, median {:.3} %",
            j.summary.k, j.summary.max_error, j.summary.median_error
        ),
        None => "; joint POD failed to run".into(),
    };
    check(
        c.db.instances.len() == 20 && max < 5.0 && med < 1.5,
        format!(
            "N = 1024, M = {}, per-block POD k = {}: max {max:.4} % (< 5), median {med:.4} % (< 1.5), {:.1} s{joint}",
            c.db.instances.len(),
            s.k,
            c.seconds
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let mut largest = (0, 0);
    for i in 0..20 {
        let (rows, cols) = if i == 0 {
            (500, 30)
        } else {
            let cols = rng.random_range(2..=30);
            (rng.random_range(cols..=500), cols)
        };
        let k = rng.random_range(1..cols);
        let x = random_matrix(rows, cols, &mut rng);
        let basis = compute_pod(&x, Truncation::Fixed(k), "acceptance").map_err(|e| e.to_string())?;
        let direct = projection_error(&x, &basis).map_err(|e| e.to_string())?;
        let tail = basis.tail_energy();
        worst = worst.max((direct - tail).abs() / tail);
        largest = largest.max((rows, cols));
    }
    check(
        worst <= 1e-8,
        format!(
            "20 matrices up to {}x{}: worst relative gap {worst:.2e} (<= 1e-8)",
            largest.0, largest.1
        ),
    )
}

fn criterion_3(c: &Canonical) -> Outcome {
    // exactness on the span of a random non-orthogonal basis
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let trial = build_trial_basis(
        &random_matrix(400, 4, &mut rng),
        2,
        BasisMode::PerBlock,
        Truncation::Full,
    )
    .map_err(|e| e.to_string())?;
    let system = nirom::observables::CanonicalSystem::new(1.0, 1.0).unwrap();
    let mut span_err: f64 = 0.0;
    for q in [1, 3, 8, 15] {
        let x = random_matrix(200, q, &mut rng);
        let points = select_points(&x).map_err(|e| e.to_string())?;
        let it = build_interpolant(&system, 0, &x, &points, &x, &trial).map_err(|e| e.to_string())?;
        for _ in 0..5 {
            let v = &x * DVector::from_fn(q, |_, _| rng.random_range(-1.0..1.0));
            let approx = it.approximate(v.as_slice());
            span_err = span_err.max((approx - &v).norm() / v.norm());
        }
    }

    // reduced constraint against the full-space constraint projected on the
    // target basis, at snapshot coordinates with the target block perturbed
    let db = &c.db;
    let it = &db.interpolants[0];
    let target = it.target;
    let cols = db.basis.block_columns(target).ok_or("per-block basis expected")?;
    let phi_t = &db.basis.bases[target].phi;
    let mut reduced_err: f64 = 0.0;
    for (j, theta) in db.thetas().iter().enumerate() {
        let system = db.system.instantiate(theta).map_err(|e| e.to_string())?;
        let mut yr = db.reduced_snapshots[j].clone();
        let scale = yr.rows(cols.start, cols.len()).amax().max(1.0);
        for col in cols.clone() {
            yr[col] += scale * rng.random_range(-0.5..0.5);
        }
        let (h, _) = evaluate_constraint_reduced(&yr, &db.interpolants, system.as_ref()).map_err(|e| e.to_string())?;
        let y = &db.basis.phi * &yr;
        let full = DVector::from_vec(system.constraint_residual(y.as_slice()).map_err(|e| e.to_string())?);
        let projected = phi_t.tr_mul(&full);
        reduced_err = reduced_err.max((&h - &projected).norm() / projected.norm());
    }
    check(
        span_err <= 1e-12 && reduced_err <= 1e-8,
        format!(
            "span reproduction {span_err:.2e} (<= 1e-12), reduced vs full constraint on the canonical database \
             (q = {}) {reduced_err:.2e} (<= 1e-8)",
            it.q()
        ),
    )
}

/// Two triangles `(0,0) (1,0) (0,1)` and `(1,0) (2,1) (0,1)` sharing the
/// face from node 1 to node 2; the pair is not orthogonal, so the
/// tangential correction contributes.
fn two_cell_oracle(g0: f64, g1: f64) -> [[f64; 2]; 2] {
    let s2 = 2f64.sqrt();
    // centroids (1/3, 1/3) and (1, 2/3); face midpoint (1/2, 1/2)
    let d0 = s2 / 6.0;
    let d1 = 10f64.sqrt() / 6.0;
    let w = d1 / (d0 + d1);
    let gamma_f = w * g0 + (1.0 - w) * g1;
    // |face| = sqrt 2, n = (1, 1)/sqrt 2, l = (2/3, 1/3): delta = 1/sqrt 2
    let coef = gamma_f * s2 / (1.0 / s2);
    // t = (-1, 1)/sqrt 2 from node 1 to node 2: t.l / |face| = -1/6
    let tl = -1.0 / 6.0;
    // inverse-distance vertex weights of (cell 0, cell 1)
    let inv = |a: f64, b: f64| [a / (a + b), b / (a + b)];
    let at_node1 = inv(3.0 / 5f64.sqrt(), 3.0 / 2.0);
    let at_node2 = inv(3.0 / 5f64.sqrt(), 3.0 / 10f64.sqrt());
    // flux into cell 0: coef [(u1 - u0) - (u_node2 - u_node1) t.l/|face|]
    let r0 = [
        coef * (-1.0 - (at_node2[0] - at_node1[0]) * tl),
        coef * (1.0 - (at_node2[1] - at_node1[1]) * tl),
    ];
    [r0, [-r0[0], -r0[1]]]
}

fn criterion_4() -> Outcome {
    // (a) constants on a perturbed mesh with a variable coefficient
    let g = geometry(perturbed(&right_triangle_unit_square(12), 0.15 / 12.0, 4));
    let gamma = ScalarField::from_fn(&g, |x, y| 1.0 + x * x + 0.5 * y);
    let a = assemble_diffusion(&g, &gamma).map_err(|e| e.to_string())?;
    let mut annihilation: f64 = 0.0;
    for c in [1.0, -7.25, 1e4] {
        let r = a.apply(&vec![c; g.n_cells()]).unwrap();
        for (i, v) in r.iter().enumerate() {
            let row_scale: f64 = a.row(i).map(|(_, x)| x.abs()).sum();
            annihilation = annihilation.max(v.abs() / (row_scale * c.abs()));
        }
    }
    let annihilated = annihilation <= 64.0 * f64::EPSILON;

    // (b) two-cell hand evaluation
    let raw = RawMesh::new(
        vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [2.0, 1.0]],
        vec![[0, 1, 2], [1, 3, 2]],
    )
    .unwrap();
    let g2 = geometry(raw);
    let (g0, g1) = (2.0, 5.0);
    let op = assemble_diffusion(&g2, &ScalarField::new(&g2, vec![g0, g1]).unwrap()).map_err(|e| e.to_string())?;
    let oracle = two_cell_oracle(g0, g1);
    let mut hand: f64 = 0.0;
    for (r, row) in oracle.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            hand = hand.max((op.get(r, c) - v).abs());
        }
    }

    // (c) area-scaled operator against the exact Laplacian of
    // sin(2 pi x) sin(2 pi y), away from the boundary
    let u = |x: f64, y: f64| (2.0 * PI * x).sin() * (2.0 * PI * y).sin();
    let mut levels = Vec::new();
    for n in [8, 16, 32, 64] {
        let g = geometry(right_triangle_unit_square(n));
        let l = assemble_diffusion(&g, &ScalarField::constant(&g, 1.0)).map_err(|e| e.to_string())?;
        let lu = l.apply(ScalarField::from_fn(&g, u).values()).unwrap();
        let (mut err, mut area) = (0.0, 0.0);
        for i in g.cells_away_from_boundary() {
            let [x, y] = g.cell_centroids[i];
            let exact = -8.0 * PI * PI * u(x, y);
            let a = g.cell_areas[i];
            err += a * (lu[i] / a - exact).powi(2);
            area += a;
        }
        levels.push((1.0 / n as f64, (err / area).sqrt()));
    }
    let orders: Vec<f64> = levels
        .windows(2)
        .map(|w| (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln())
        .collect();
    let min_order = orders.iter().copied().fold(f64::INFINITY, f64::min);

    check(
        annihilated && hand <= 1e-13 && min_order >= 1.0,
        format!(
            "constants annihilated to {annihilation:.1e} of row scale; two-cell oracle gap {hand:.1e} (<= 1e-13); \
             observed orders {:?} (>= 1)",
            orders.iter().map(|o| (o * 100.0).round() / 100.0).collect::<Vec<_>>()
        ),
    )
}

fn criterion_5(c: &Canonical) -> Outcome {
    // total-degree-2 polynomials at off-node points
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ranges = [[0.01, 2.0], [0.01, 2.0]];
    let mut poly_err: f64 = 0.0;
    for _ in 0..50 {
        let coef: Vec<f64> = (0..6).map(|_| rng.random_range(-3.0..3.0)).collect();
        let p = |t: &[f64]| {
            coef[0]
                + coef[1] * t[0]
                + coef[2] * t[1]
                + coef[3] * t[0] * t[0]
                + coef[4] * t[0] * t[1]
                + coef[5] * t[1] * t[1]
        };
        // a jittered, well-spread six-point stencil
        let points: Vec<Vec<f64>> = [
            [0.2, 0.2],
            [0.8, 0.3],
            [0.5, 0.8],
            [0.25, 0.6],
            [0.75, 0.7],
            [0.5, 0.45],
        ]
        .iter()
        .map(|b| {
            b.iter()
                .map(|v| 0.01 + 1.99 * (v + rng.random_range(-0.08..0.08)))
                .collect()
        })
        .collect();
        let values: Vec<f64> = points.iter().map(|t| p(t)).collect();
        let query = [rng.random_range(0.01..2.0), rng.random_range(0.01..2.0)];
        let v = lagrange_fit_eval(&points, &values, &query, &ranges, 2).map_err(|e| e.to_string())?;
        poly_err = poly_err.max((v - p(&query)).abs() / p(&query).abs().max(1.0));
    }

    // the interpolated database reproduces every training instance
    let mut node_err: f64 = 0.0;
    for (j, theta) in c.db.thetas().iter().enumerate() {
        let (inst, _) = interpolate_rom(&c.db, theta, c.config.degree).map_err(|e| e.to_string())?;
        let stored = &c.db.instances[j];
        node_err = node_err.max((&inst.b - &stored.b).norm() / stored.b.norm());
        node_err = node_err.max((&inst.f - &stored.f).norm() / stored.f.norm());
    }
    check(
        poly_err <= 1e-10 && node_err <= 1e-12,
        format!(
            "quadratic reproduction {poly_err:.2e} (<= 1e-10), database node reproduction {node_err:.2e} (<= 1e-12)"
        ),
    )
}

fn criterion_6() -> Outcome {
    // crossed meshes of 4 n^2 cells, perturbed so the tangential terms are
    // assembled: N = 4096, 8100, 16384 (the node offsets scale with 1/n)
    let mut times = Vec::new();
    for n in [32, 45, 64] {
        let g = geometry(perturbed(&crossed_unit_square(n), 0.15 / n as f64, 6));
        let gamma = ScalarField::constant(&g, 1.0);
        let t = min_time(15, || assemble_diffusion(&g, &gamma).unwrap());
        times.push((g.n_cells(), t));
    }
    let ratios: Vec<f64> = times.windows(2).map(|w| w[1].1 / w[0].1).collect();
    check(
        ratios.iter().all(|r| (1.5..=3.0).contains(r)),
        format!(
            "assembly {} ; growth per doubling {:?} (in [1.5, 3.0])",
            times
                .iter()
                .map(|(n, t)| format!("N={n}: {:.2} ms", t * 1e3))
                .collect::<Vec<_>>()
                .join(", "),
            ratios.iter().map(|r| (r * 100.0).round() / 100.0).collect::<Vec<_>>()
        ),
    )
}

fn criterion_7(c: &Canonical) -> Outcome {
    let fom = CanonicalFom::new(&c.geom).map_err(|e| e.to_string())?;
    let newton = NewtonConfig::default();
    let (mut fom_total, mut rom_total) = (0.0, 0.0);
    for &(mu1, mu2) in &REFERENCE_POINTS {
        fom_total += min_time(5, || solve_canonical(&fom, [mu1, mu2], &newton).unwrap());
        rom_total += min_time(5, || {
            predict(&c.db, &[mu1, mu2], c.config.degree, &c.config.sqp).unwrap()
        });
    }
    let speedup = fom_total / rom_total;
    check(
        speedup >= 10.0,
        format!(
            "N = {}: full-order {:.2} ms, reduced {:.2} ms per point, speedup {speedup:.1}x (>= 10)",
            c.geom.n_cells(),
            fom_total * 1e3 / 12.0,
            rom_total * 1e3 / 12.0
        ),
    )
}

fn criterion_8() -> Outcome {
    let g = geometry(perturbed(&crossed_unit_square(10), 0.015, 8));
    let interior = g.interior_cells();
    let mesh = g.mesh();
    let nodes = &mesh.raw.nodes;

    // gradients of constants vanish on closed cells; for linear fields the
    // Gauss integral over a cell is exact at face midpoints, so the only
    // error is the two-point face interpolation, bounded face by face
    let mut constant: f64 = 0.0;
    let mut divergence_excess: f64 = 0.0;
    let mut divergence_gap: f64 = 0.0;
    for (axis, k) in [(Axis::X, 0), (Axis::Y, 1)] {
        let op = assemble_gradient(&g, axis).map_err(|e| e.to_string())?;
        let r = op.apply(&vec![3.25; g.n_cells()]).unwrap();
        for &i in &interior {
            constant = constant.max(r[i].abs());
        }
        for m in 0..2 {
            let field: Vec<f64> = g.cell_centroids.iter().map(|c| c[m]).collect();
            let r = op.apply(&field).unwrap();
            for &i in &interior {
                let cell = mesh.raw.cells[i];
                let centroid = g.cell_centroids[i];
                let mut exact = 0.0;
                let mut bound = 0.0;
                for e in 0..3 {
                    let (pa, pb) = (nodes[cell[e]], nodes[cell[(e + 1) % 3]]);
                    let mid = [(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0];
                    let len = (pb[0] - pa[0]).hypot(pb[1] - pa[1]);
                    let mut normal = [(pb[1] - pa[1]) / len, -(pb[0] - pa[0]) / len];
                    if normal[0] * (mid[0] - centroid[0]) + normal[1] * (mid[1] - centroid[1]) < 0.0 {
                        normal = [-normal[0], -normal[1]];
                    }
                    exact += mid[m] * normal[k] * len;
                    // two-point interpolation error of the coordinate at this face
                    let f = mesh.cell_faces[i]
                        .iter()
                        .copied()
                        .find(|&f| {
                            let fm = g.face_midpoints[f];
                            (fm[0] - mid[0]).abs() < 1e-14 && (fm[1] - mid[1]).abs() < 1e-14
                        })
                        .ok_or("face not found")?;
                    let [o, nb] = mesh.face_cells[f];
                    let w = g.face_weights[f];
                    let interp = w * g.cell_centroids[o][m] + (1.0 - w) * g.cell_centroids[nb][m];
                    bound += (interp - mid[m]).abs() * normal[k].abs() * len;
                }
                let expected_exact = if m == k { g.cell_areas[i] } else { 0.0 };
                divergence_gap = divergence_gap.max((exact - expected_exact).abs());
                divergence_excess = divergence_excess.max((r[i] - exact).abs() - bound);
            }
        }
    }

    // lifted smooth states satisfy the constraints, and the Jacobian matches
    // central differences
    let system = EulerSystem::new(1.4).unwrap();
    let n = g.n_cells();
    let mut state = vec![0.0; 4 * n];
    for (i, c) in g.cell_centroids.iter().enumerate() {
        let (x, y) = (c[0], c[1]);
        state[i] = 1.0 + 0.2 * (PI * x).sin() * (PI * y).cos();
        state[n + i] = 0.8 + 0.3 * x * y;
        state[2 * n + i] = 0.3 + 0.2 * (2.0 * PI * x).cos() * 0.5 + 0.1 * y;
        state[3 * n + i] = 1.0 / 1.4 + 0.1 * (PI * (x + y)).sin();
    }
    let lifted = system.lift(&state).map_err(|e| e.to_string())?;
    let h = system.constraint_residual(&lifted).map_err(|e| e.to_string())?;
    let mut constraint: f64 = 0.0;
    for k in 0..4 {
        let t = system.target(k);
        for i in 0..n {
            constraint = constraint.max(h[k * n + i].abs() / lifted[t * n + i].abs().max(1.0));
        }
    }
    let jac = system
        .constraint_jacobian(&lifted)
        .map_err(|e| e.to_string())?
        .to_dense();
    let mut fd_gap: f64 = 0.0;
    for col in (0..8 * n).step_by(7) {
        let step = 1e-6 * lifted[col].abs().max(1.0);
        let mut p = lifted.clone();
        let mut m = lifted.clone();
        p[col] += step;
        m[col] -= step;
        let hp = system.constraint_residual(&p).unwrap();
        let hm = system.constraint_residual(&m).unwrap();
        for row in 0..4 * n {
            let fd = (hp[row] - hm[row]) / (2.0 * step);
            let exact = jac[(row, col)];
            fd_gap = fd_gap.max((fd - exact).abs() / exact.abs().max(1.0));
        }
    }

    check(
        constant <= 1e-13 && divergence_gap <= 1e-13 && divergence_excess <= 1e-13 && constraint <= 1e-12 && fd_gap <= 1e-6,
        format!(
            "gradient of constants {constant:.1e}; Gauss oracle within its interpolation bound (excess {divergence_excess:.1e}, \
             oracle self-check {divergence_gap:.1e}); lifted constraints {constraint:.1e} (<= 1e-12); Jacobian vs finite \
             differences {fd_gap:.1e} (<= 1e-6)"
        ),
    )
}

fn run(label: &str, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    let secs = t.elapsed().as_secs_f64();
    match outcome {
        Ok(detail) => {
            println!("PASS  {label}: {detail} [{secs:.1} s]");
            true
        }
        Err(detail) => {
            println!("FAIL  {label}: {detail} [{secs:.1} s]");
            false
        }
    }
}

fn main() {
    // panics inside a criterion are reported on its FAIL line
    std::panic::set_hook(Box::new(|_| {}));
    let shared = canonical();
    let with = |f: fn(&Canonical) -> Outcome| {
        let shared = &shared;
        move || match shared {
            Ok(c) => f(c),
            Err(e) => Err(format!("canonical study failed: {e}")),
        }
    };
    let results = [
        run("1 canonical end-to-end accuracy", with(criterion_1)),
        run("2 POD identity", criterion_2),
        run("3 DEIM exactness", with(criterion_3)),
        run("4 FV operator correctness", criterion_4),
        run("5 interpolation exactness", with(criterion_5)),
        run("6 offline scaling", criterion_6),
        run("7 online speedup", with(criterion_7)),
        run("8 Euler machinery", criterion_8),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
