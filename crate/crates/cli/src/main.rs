use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use nirom::mesh::{build_connectivity, compute_geometry, crossed_unit_square, save_mesh, MeshGeometry};
use nirom::persist::{read_matrix, write_json, write_matrix};
use nirom::pipeline::{export_field, files, predict, ExportFormat, Pipeline, PipelineConfig};

/// Non-intrusive reduced-order models for parametrised nonlinear PDEs.
#[derive(Parser, Debug)]
#[command(name = "nirom", version)]
struct Cli {
    /// JSON pipeline configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the sampling seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the mesh file.
    #[arg(long, global = true)]
    mesh: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print mesh statistics, optionally writing the built-in mesh.
    MeshInfo {
        /// Describe (and with --save, write) the built-in crossed mesh with
        /// this many divisions per side instead of the configured mesh.
        #[arg(long)]
        generate: Option<usize>,
        #[arg(long, requires = "generate")]
        save: Option<PathBuf>,
    },
    /// Draw the training design and fix the validation points.
    Sample,
    /// Solve the full-order model at every training point.
    Snapshots,
    /// Compute the trial basis from the snapshots.
    Pod,
    /// Build and persist the reduced-order database.
    Build,
    /// Predict the observables at one parameter point.
    Predict {
        #[arg(required = true, num_args = 1.., allow_negative_numbers = true)]
        theta: Vec<f64>,
    },
    /// Compare predictions with full-order solves at the validation points.
    Validate,
    /// Write fields of the last prediction (or a training snapshot) per
    /// observable.
    Export {
        #[arg(long, value_enum, default_value = "vtk")]
        format: Format,
        /// Export training snapshot J instead of the last prediction.
        #[arg(long, value_name = "J")]
        snapshot: Option<usize>,
    },
    /// Run every stage in order.
    Run,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Vtk,
}

impl From<Format> for ExportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => ExportFormat::Csv,
            Format::Vtk => ExportFormat::Vtk,
        }
    }
}

const PREDICTION: &str = "prediction.romb";
const PREDICTION_META: &str = "prediction.json";

fn config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    if let Some(m) = &cli.mesh {
        cfg.mesh = Some(m.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect::<String>()
        .trim_matches('_')
        .to_string()
}

fn print_mesh_info(label: &str, geom: &MeshGeometry) {
    let mesh = geom.mesh();
    let (amin, amax) = geom
        .cell_areas
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &a| (lo.min(a), hi.max(a)));
    let skew = geom
        .tangent_dot
        .iter()
        .zip(&geom.intercell)
        .map(|(td, l)| td.abs() / l[0].hypot(l[1]))
        .fold(0.0f64, f64::max);
    println!("mesh            {label}");
    println!("cells           {}", mesh.n_cells());
    println!("nodes           {}", mesh.n_nodes());
    println!(
        "faces           {} ({} boundary)",
        mesh.n_faces(),
        mesh.n_boundary_faces()
    );
    println!("cell area       {amin:.4e} .. {amax:.4e}");
    println!("max |t.l|/|l|   {skew:.4e}");
}

fn export_observables(
    geom: &MeshGeometry,
    names: &[String],
    y: &[f64],
    format: ExportFormat,
    dir: &Path,
    tag: &str,
) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let n = geom.n_cells();
    if y.len() != n * names.len() {
        bail!(
            "field has {} entries, expected {} observables on {n} cells",
            y.len(),
            names.len()
        );
    }
    let ext = match format {
        ExportFormat::Csv => "csv",
        ExportFormat::Vtk => "vtk",
    };
    for (j, name) in names.iter().enumerate() {
        let path = dir.join(format!("{tag}_{}.{ext}", file_stem(name)));
        export_field(geom, name, &y[j * n..(j + 1) * n], format, &path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<bool> {
    if let Command::MeshInfo {
        generate: Some(n),
        save,
    } = &cli.command
    {
        let raw = crossed_unit_square(*n);
        if let Some(p) = save {
            save_mesh(&raw, p)?;
            println!("wrote {}", p.display());
        }
        let geom = compute_geometry(build_connectivity(raw)?)?;
        print_mesh_info(&format!("crossed_unit_square({n})"), &geom);
        return Ok(true);
    }
    let cfg = config(cli)?;
    let mut p = Pipeline::new(cfg.clone())?;
    match &cli.command {
        Command::MeshInfo { .. } => {
            let label = cfg
                .mesh
                .as_ref()
                .map(|m| m.display().to_string())
                .unwrap_or_else(|| "built-in".into());
            print_mesh_info(&label, p.geometry()?);
        }
        Command::Sample => {
            let (train, validate) = p.sample()?;
            println!("{} training points, {} validation points", train.len(), validate.len());
        }
        Command::Snapshots => {
            let set = p.snapshots()?;
            println!("{} snapshots of {} rows", set.n_snapshots(), set.matrix.nrows());
        }
        Command::Pod => println!("k = {}", p.pod()?),
        Command::Build => {
            let db = p.build()?;
            println!(
                "database with k = {} and {} training points",
                db.k(),
                db.instances.len()
            );
        }
        Command::Predict { theta } => {
            let db = p.load_database()?;
            let pred = predict(&db, theta, cfg.degree, &cfg.sqp)?;
            let out = &cfg.out_dir;
            let y = nalgebra::DMatrix::from_column_slice(pred.observables.len(), 1, &pred.observables);
            write_matrix(out.join(PREDICTION), &y)?;
            let meta = serde_json::json!({
                "theta": pred.theta,
                "converged": pred.solution.converged,
                "iterations": pred.solution.iterations,
                "objective": pred.solution.objective,
                "violation": pred.solution.violation,
                "stencil": pred.stencil.indices,
                "stencil_condition": pred.stencil.condition,
                "extrapolated": pred.stencil.extrapolated,
            });
            write_json(out.join(PREDICTION_META), &meta)?;
            println!("{}", serde_json::to_string_pretty(&meta)?);
            if !pred.solution.converged {
                log::warn!("the reduced solve did not converge");
            }
        }
        Command::Validate | Command::Run => {
            let report = if matches!(cli.command, Command::Run) {
                p.run()?
            } else {
                p.validate()?
            };
            let s = &report.summary;
            println!("case  mu1     mu2     error %");
            for c in &s.cases {
                println!(
                    "{:>4}  {:<6}  {:<6}  {:.4}{}",
                    c.case,
                    c.theta[0],
                    c.theta[1],
                    c.relative_error,
                    if c.converged { "" } else { " (not converged)" }
                );
            }
            println!("k = {}, max {:.4} %, median {:.4} %", s.k, s.max_error, s.median_error);
            println!(
                "full-order {:.4} s, reduced {:.4} s, speedup {:.1}x",
                report.timing.fom_total, report.timing.rom_total, report.timing.speedup
            );
            if !s.passed {
                eprintln!(
                    "validation failed: max {:.4} % (limit {}), median {:.4} % (limit {})",
                    s.max_error, cfg.max_error, s.median_error, cfg.max_median_error
                );
                return Ok(false);
            }
        }
        Command::Export { format, snapshot } => {
            let names = cfg.system.instantiate(&[1.0, 1.0])?.observable_names();
            let out = cfg.out_dir.clone();
            let (y, tag) = match snapshot {
                Some(j) => {
                    let m = read_matrix(out.join(files::SNAPSHOTS))?;
                    if *j >= m.ncols() {
                        bail!("snapshot {j} out of range ({} snapshots)", m.ncols());
                    }
                    (m.column(*j).iter().copied().collect::<Vec<_>>(), format!("snapshot{j}"))
                }
                None => {
                    let m =
                        read_matrix(out.join(PREDICTION)).context("no prediction to export; run `predict` first")?;
                    (m.iter().copied().collect(), "prediction".to_string())
                }
            };
            export_observables(p.geometry()?, &names, &y, (*format).into(), &out.join("export"), &tag)?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
