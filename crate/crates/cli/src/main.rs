//! `dwill`: discrete Willmore energy toolkit.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use willmore::bending::{bending_energy_with, BendPair, HingeLength};
use willmore::energy::{energy_value, total_energy};
use willmore::flow::{alternate_flow, multistart, optimize_triangulation, run_flow, FlowConfig, FlowTrace, Normalization};
use willmore::geom::fit_sphere;
use willmore::mesh::{generate, read_mesh, write_mesh, Generator, LoadOptions, MeshFormat};
use willmore::TriMesh;

/// Seed used when `--seed` is not given.
const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Parser, Debug)]
#[command(name = "dwill", version, about = "Discrete Willmore energy of triangle meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Per-edge angles, per-vertex and total energy.
    Energy(EnergyArgs),
    /// Gradient-descent minimization of the energy.
    Flow(FlowArgs),
    /// Greedy edge flips at fixed vertex positions.
    FlipOptimize(FlipArgs),
    /// One step of 1-to-4 midpoint subdivision.
    Refine(IoArgs),
    /// Hinge bending energy of a rest/deformed pair.
    Bend(BendArgs),
    /// Write a generated mesh.
    Gen(GenArgs),
    /// Validate a mesh; with --delaunay also require zero energy.
    Check(CheckArgs),
}

#[derive(Args, Debug)]
struct IoArgs {
    /// Input mesh (.off or .obj); standard input (OFF) when omitted or `-`.
    #[arg(long, short)]
    input: Option<PathBuf>,
    /// Output file; standard output when omitted or `-`.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Off,
}

#[derive(Args, Debug)]
struct EnergyArgs {
    #[command(flatten)]
    io: IoArgs,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum NormalizeArg {
    None,
    RecenterRescale,
}

#[derive(Args, Debug)]
struct FlowArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Trace format; `off` writes the final mesh to --output instead.
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Where to write the final mesh (OFF).
    #[arg(long)]
    mesh_output: Option<PathBuf>,
    #[arg(long, default_value_t = FlowConfig::default().max_iters)]
    max_iters: usize,
    #[arg(long, default_value_t = FlowConfig::default().grad_tol)]
    grad_tol: f64,
    /// Initial step in units of the squared bounding-box diagonal.
    #[arg(long, default_value_t = FlowConfig::default().step)]
    step: f64,
    /// Comma-separated vertex indices held in place.
    #[arg(long, value_delimiter = ',')]
    fix: Vec<usize>,
    /// Default: recenter-rescale, or none when vertices are fixed.
    #[arg(long, value_enum)]
    normalize: Option<NormalizeArg>,
    /// Optimize the triangulation by flips every K iterations.
    #[arg(long, value_name = "K")]
    alternate: Option<usize>,
    /// Number of jittered starts; the lowest final energy is reported.
    #[arg(long, default_value_t = 1)]
    starts: usize,
    /// Jitter amplitude relative to the bounding-box diagonal (multistart only).
    #[arg(long, default_value_t = 0.05)]
    jitter: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args, Debug)]
struct FlipArgs {
    #[command(flatten)]
    io: IoArgs,
    /// `off` writes the flipped mesh, `json`/`csv` the flip trace.
    #[arg(long, value_enum, default_value = "off")]
    format: Format,
    /// Where to write the flip trace (JSON) when --format is off.
    #[arg(long)]
    trace_output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BendArgs {
    /// Rest mesh.
    #[arg(long, short)]
    input: PathBuf,
    /// Deformed mesh with the same faces.
    #[arg(long)]
    deformed: PathBuf,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Use face barycenter distance instead of circumcenter distance.
    #[arg(long)]
    barycenter: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Tetrahedron,
    Octahedron,
    Icosahedron,
    /// Subdivided icosahedron on the unit sphere (--level).
    Icosphere,
    /// Bipyramid over an --n-gon.
    Bipyramid,
    Steinitz11,
    StellatedTetrahedron,
    StellatedOctahedron,
    StellatedIcosahedron,
    /// Convex hull of --n random points on the unit sphere (--seed).
    Random,
    /// Torus with --n rings and --sides sides.
    Torus,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long, default_value_t = 1)]
    level: usize,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 8)]
    sides: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "off")]
    format: Format,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Also require the vertices to lie on a sphere and the energy to vanish.
    #[arg(long)]
    delaunay: bool,
    /// Energy tolerance for --delaunay.
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
}

/// A failed run: a library or I/O error, or a check that did not pass.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn init_logging() -> Result<(), String> {
    let level = match std::env::var("DW_LOG").as_deref() {
        Err(_) => log::LevelFilter::Warn,
        Ok("quiet") => log::LevelFilter::Off,
        Ok("info") => log::LevelFilter::Info,
        Ok("debug") => log::LevelFilter::Debug,
        Ok(other) => return Err(format!("DW_LOG must be one of quiet, info, debug (got {other:?})")),
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    Ok(())
}

fn is_stdio(p: &Option<PathBuf>) -> bool {
    p.as_deref().is_none_or(|p| p == Path::new("-"))
}

fn load(input: &Option<PathBuf>) -> Result<TriMesh, Failure> {
    if is_stdio(input) {
        let mut buf = Vec::new();
        io::stdin().read_to_end(&mut buf)?;
        return Ok(read_mesh(buf.as_slice(), MeshFormat::Off, LoadOptions::default())?);
    }
    let path = input.as_deref().unwrap();
    let format = MeshFormat::from_path(path).unwrap_or(MeshFormat::Off);
    Ok(willmore::mesh::load_mesh(path, format)?)
}

fn sink(output: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    if is_stdio(output) {
        return Ok(Box::new(BufWriter::new(io::stdout().lock())));
    }
    let path = output.as_deref().unwrap();
    let file = File::create(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    Ok(Box::new(BufWriter::new(file)))
}

fn emit_text(output: &Option<PathBuf>, text: &str) -> Outcome {
    let mut w = sink(output)?;
    w.write_all(text.as_bytes())?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn emit_mesh(output: &Option<PathBuf>, mesh: &TriMesh) -> Outcome {
    let mut w = sink(output)?;
    write_mesh(&mut w, mesh, MeshFormat::Off)?;
    w.flush()?;
    Ok(())
}

fn unsupported(cmd: &str, format: Format) -> Failure {
    Failure(format!("{cmd} does not support --format {format:?}").to_lowercase())
}

fn cmd_energy(a: &EnergyArgs) -> Outcome {
    let report = total_energy(&load(&a.io.input)?)?;
    match a.format {
        Format::Json => emit_text(&a.io.output, &report.to_json()?),
        Format::Csv => {
            let mut w = sink(&a.io.output)?;
            report.write_csv(&mut w)?;
            Ok(w.flush()?)
        }
        Format::Off => Err(unsupported("energy", a.format)),
    }
}

fn cmd_flow(a: &FlowArgs) -> Outcome {
    let mesh = load(&a.io.input)?;
    let fixed: BTreeSet<usize> = a.fix.iter().copied().collect();
    let normalization = match a.normalize {
        Some(NormalizeArg::None) => Normalization::None,
        Some(NormalizeArg::RecenterRescale) => Normalization::RecenterRescale,
        None if fixed.is_empty() => Normalization::RecenterRescale,
        None => Normalization::None,
    };
    let cfg = FlowConfig {
        max_iters: a.max_iters,
        grad_tol: a.grad_tol,
        step: a.step,
        fixed_vertices: fixed,
        normalization,
        ..FlowConfig::default()
    };
    cfg.validate(mesh.num_vertices())?;
    if a.starts == 0 {
        return Err(Failure("--starts must be at least 1".into()));
    }
    let trace: FlowTrace = if a.starts > 1 {
        if a.alternate.is_some() {
            return Err(Failure("--alternate cannot be combined with --starts".into()));
        }
        let seeds: Vec<u64> = (0..a.starts as u64).map(|i| a.seed.wrapping_add(i)).collect();
        let traces = multistart(&mesh, &cfg, &seeds, a.jitter)?;
        for (s, t) in seeds.iter().zip(&traces) {
            log::info!("seed {s}: W = {:.12} after {} records", t.final_energy, t.records.len());
        }
        traces
            .into_iter()
            .min_by(|x, y| x.final_energy.total_cmp(&y.final_energy))
            .expect("at least one start")
    } else if let Some(k) = a.alternate {
        alternate_flow(&mesh, &cfg, k)?
    } else {
        run_flow(&mesh, &cfg)?
    };
    log::info!("{:?}: W = {:.12}", trace.termination, trace.final_energy);
    if let Some(p) = &a.mesh_output {
        emit_mesh(&Some(p.clone()), &trace.final_mesh)?;
    }
    match a.format {
        Format::Json => emit_text(&a.io.output, &trace.to_json()?),
        Format::Csv => {
            let mut w = sink(&a.io.output)?;
            trace.write_csv(&mut w)?;
            Ok(w.flush()?)
        }
        Format::Off => emit_mesh(&a.io.output, &trace.final_mesh),
    }
}

fn cmd_flip(a: &FlipArgs) -> Outcome {
    let (mesh, trace) = optimize_triangulation(&load(&a.io.input)?)?;
    log::info!("{} flips, W {:.3e} -> {:.3e}", trace.records.len(), trace.initial_energy, trace.final_energy);
    if let Some(p) = &a.trace_output {
        emit_text(&Some(p.clone()), &trace.to_json()?)?;
    }
    match a.format {
        Format::Off => emit_mesh(&a.io.output, &mesh),
        Format::Json => emit_text(&a.io.output, &trace.to_json()?),
        Format::Csv => {
            let mut w = sink(&a.io.output)?;
            trace.write_csv(&mut w)?;
            Ok(w.flush()?)
        }
    }
}

fn cmd_refine(a: &IoArgs) -> Outcome {
    emit_mesh(&a.output, &load(&a.input)?.refine())
}

fn cmd_bend(a: &BendArgs) -> Outcome {
    let rest = load(&Some(a.input.clone()))?;
    let deformed = load(&Some(a.deformed.clone()))?;
    let model = if a.barycenter {
        HingeLength::Barycenter
    } else {
        HingeLength::Circumcenter
    };
    let report = bending_energy_with(&BendPair::new(rest, deformed)?, model)?;
    match a.format {
        Format::Json => emit_text(&a.output, &report.to_json()?),
        Format::Csv => {
            let mut w = sink(&a.output)?;
            report.write_csv(&mut w)?;
            Ok(w.flush()?)
        }
        Format::Off => Err(unsupported("bend", a.format)),
    }
}

fn generator(a: &GenArgs) -> Generator {
    let stellated = |base| Generator::Stellated { base: Box::new(base) };
    match a.kind {
        Kind::Tetrahedron => Generator::Tetrahedron,
        Kind::Octahedron => Generator::Octahedron,
        Kind::Icosahedron => Generator::Icosahedron,
        Kind::Icosphere => Generator::SubdividedSphere { level: a.level },
        Kind::Bipyramid => Generator::Bipyramid { ring: a.n.unwrap_or(5) },
        Kind::Steinitz11 => Generator::Steinitz11,
        Kind::StellatedTetrahedron => stellated(Generator::Tetrahedron),
        Kind::StellatedOctahedron => stellated(Generator::Octahedron),
        Kind::StellatedIcosahedron => stellated(Generator::Icosahedron),
        Kind::Random => Generator::RandomInscribed {
            n: a.n.unwrap_or(100),
            seed: a.seed,
        },
        Kind::Torus => Generator::Torus {
            rings: a.n.unwrap_or(16),
            sides: a.sides,
        },
    }
}

fn cmd_gen(a: &GenArgs) -> Outcome {
    if a.format != Format::Off {
        return Err(unsupported("gen", a.format));
    }
    emit_mesh(&a.output, &generate(&generator(a))?)
}

fn cmd_check(a: &CheckArgs) -> Outcome {
    let mesh = load(&a.io.input)?;
    let mut report = serde_json::json!({
        "vertices": mesh.num_vertices(),
        "edges": mesh.num_edges(),
        "faces": mesh.num_faces(),
        "manifold": true,
        "closed": mesh.is_closed(),
        "oriented": mesh.is_oriented(),
        "genus": mesh.genus(),
    });
    let mut problems = Vec::new();
    if !mesh.is_closed() {
        problems.push("mesh has boundary edges".to_string());
    }
    if !mesh.is_oriented() {
        problems.push("faces are not consistently oriented".to_string());
    }
    if a.delaunay {
        let diag = mesh.bbox_diagonal();
        match fit_sphere(mesh.vertices()) {
            Some((center, radius, dev)) if dev <= 1e-9 * diag => {
                report["sphere"] = serde_json::json!({ "center": [center.x, center.y, center.z], "radius": radius });
            }
            Some((_, _, dev)) => problems.push(format!("vertices are not on a common sphere (deviation {dev:.3e})")),
            None => problems.push("vertices are not on a common sphere".to_string()),
        }
        if mesh.is_closed() {
            let w = energy_value(&mesh)?;
            report["energy"] = serde_json::json!(w);
            if w.abs() > a.tol || w.is_nan() {
                problems.push(format!("energy {w:.6e} exceeds {:.1e}: not a Delaunay triangulation", a.tol));
            }
        }
    }
    report["ok"] = serde_json::json!(problems.is_empty());
    report["problems"] = serde_json::json!(problems);
    emit_text(&a.io.output, &serde_json::to_string_pretty(&report)?)?;
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Failure(problems.join("; ")))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = init_logging() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let result = match &cli.command {
        Command::Energy(a) => cmd_energy(a),
        Command::Flow(a) => cmd_flow(a),
        Command::FlipOptimize(a) => cmd_flip(a),
        Command::Refine(a) => cmd_refine(a),
        Command::Bend(a) => cmd_bend(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Check(a) => cmd_check(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
