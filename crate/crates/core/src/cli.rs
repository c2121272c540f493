//! Command-line front end.
//!
//! Exit codes: 0 pass, 1 verification failed, 2 construction or input
//! error, 3 I/O error. Every failure prints one `error[kind]: message` line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::assembly::{
    family_body, graph_peabody, meissner_body, roberts_body, MeissnerVariant, ProvenanceRecord, SelfDualGraphEmbedding,
};
use crate::error::Error;
use crate::geom::{mesh_tolerance, Vec3};
use crate::mesh::{MeshFormat, PeabodyMesh};
use crate::verify::{minkowski_sum, plane_section, support_distance, width_report, Plane, WidthReport};

#[derive(Debug, Parser)]
#[command(name = "peabody", version, about = "Constant-width peabodies: build, verify, section, compare, sum")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BodyKind {
    Robert,
    Meissner,
    Family,
    Graph,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a body and write its mesh plus a `<output>.json` provenance sidecar.
    Build {
        kind: BodyKind,
        #[arg(long, default_value_t = 2.0)]
        side: f64,
        #[arg(long, default_value_t = 64)]
        res: usize,
        #[arg(long, short = 'o')]
        output: PathBuf,
        /// Defaults to the output file extension.
        #[arg(long, value_enum)]
        format: Option<MeshFormat>,
        #[arg(long, value_enum, default_value = "three_at_vertex")]
        variant: MeissnerVariant,
        #[arg(long)]
        lambda: Option<f64>,
        /// Graph embedding JSON (for `graph`).
        #[arg(long)]
        input: Option<PathBuf>,
        /// Certify constant width before writing; exit 1 on failure.
        #[arg(long)]
        verify: bool,
    },
    /// Width certificate of a mesh; exit 0 iff it passes.
    Verify {
        mesh: PathBuf,
        #[arg(long)]
        expect_width: Option<f64>,
        #[arg(long, default_value_t = 2e-3)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        dirs: usize,
        /// Report path; stdout when absent.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Plane section as `x,y,z` CSV.
    Section {
        mesh: PathBuf,
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
        point: Vec3,
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
        normal: Vec3,
        #[arg(long, short = 'o')]
        output: Option<PathBuf>,
    },
    /// Support-function distance between two meshes.
    Compare {
        first: PathBuf,
        second: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        dirs: usize,
    },
    /// Minkowski sum of two convex meshes.
    Sum {
        first: PathBuf,
        second: PathBuf,
        #[arg(long, short = 'o')]
        output: PathBuf,
        #[arg(long, value_enum)]
        format: Option<MeshFormat>,
        #[arg(long, default_value_t = 20_000)]
        dirs: usize,
    },
}

fn parse_vec3(s: &str) -> Result<Vec3, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("expected x,y,z: {e}"))?;
    match parts[..] {
        [x, y, z] => Ok(Vec3::new(x, y, z)),
        _ => Err("expected three comma-separated numbers".into()),
    }
}

/// What to build.
#[derive(Debug, Clone, PartialEq)]
pub enum BuildKind {
    Robert,
    Meissner(MeissnerVariant),
    Family(f64),
    Graph(PathBuf),
}

/// A fully specified build.
#[derive(Debug, Clone, PartialEq)]
pub struct BuildSpec {
    pub kind: BuildKind,
    pub side: f64,
    pub resolution: usize,
    pub output: PathBuf,
    pub format: MeshFormat,
}

/// Smallest resolution accepted by the command line.
pub const MIN_RESOLUTION: usize = 8;

/// Directions sampled by `build --verify`.
pub const BUILD_VERIFY_DIRS: usize = 2000;

/// A failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(kind: &'static str, code: i32, message: impl Into<String>) -> Self {
        CliError {
            kind,
            code,
            message: message.into().replace('\n', " "),
        }
    }

    /// Errors while reading inputs are input errors, whatever their cause.
    fn input(e: Error) -> Self {
        match e {
            Error::Io(io) => CliError::new("invalid-input", 2, io.to_string()),
            other => other.into(),
        }
    }

    pub fn diagnostic(&self) -> String {
        format!("error[{}]: {}", self.kind, self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match &e {
            Error::InvalidParameter(m) => CliError::new("invalid-parameter", 2, m.clone()),
            Error::ConstructionImpossible(m) => CliError::new("construction-impossible", 2, m.clone()),
            Error::InvalidInput(m) => CliError::new("invalid-input", 2, m.clone()),
            Error::Internal(m) => CliError::new("internal", 2, m.clone()),
            Error::Io(io) => CliError::new("io", 3, io.to_string()),
        }
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::new("io", 3, format!("{}: {e}", path.display()))
}

/// Provenance sidecar written next to built meshes.
#[derive(Debug, Serialize)]
pub struct BuildRecord {
    #[serde(flatten)]
    pub provenance: ProvenanceRecord,
    pub side: f64,
    pub format: MeshFormat,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    pub mesh_vertices: usize,
    pub mesh_triangles: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<WidthReport>,
}

/// Sidecar path: the mesh path with `.json` appended.
pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn format_for(path: &Path, flag: Option<MeshFormat>) -> Result<MeshFormat, CliError> {
    match flag {
        Some(f) => Ok(f),
        None => MeshFormat::from_path(path).map_err(CliError::from),
    }
}

/// Builds the mesh described by `spec`.
pub fn build_mesh(spec: &BuildSpec) -> Result<PeabodyMesh, CliError> {
    if spec.resolution < MIN_RESOLUTION {
        return Err(Error::InvalidParameter(format!(
            "resolution must be at least {MIN_RESOLUTION}, got {}",
            spec.resolution
        ))
        .into());
    }
    let mesh = match &spec.kind {
        BuildKind::Robert => roberts_body(spec.side, spec.resolution)?,
        BuildKind::Meissner(v) => meissner_body(*v, spec.side, spec.resolution)?,
        BuildKind::Family(l) => family_body(*l, spec.side, spec.resolution)?,
        BuildKind::Graph(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::new("invalid-input", 2, format!("{}: {e}", path.display())))?;
            let g = SelfDualGraphEmbedding::from_json(&text)?;
            graph_peabody(&g, spec.resolution)?
        }
    };
    Ok(mesh)
}

/// Builds, optionally verifies, and writes mesh and sidecar. Returns the
/// exit code.
pub fn run_build(spec: &BuildSpec, verify: bool) -> Result<i32, CliError> {
    let mesh = build_mesh(spec)?;
    let prov = mesh
        .provenance
        .as_ref()
        .ok_or_else(|| CliError::new("internal", 2, "built mesh has no provenance"))?;
    let width = prov.embedding.width;
    let verification = if verify {
        let tol = mesh_tolerance(width, spec.resolution);
        Some(width_report(&mesh, BUILD_VERIFY_DIRS, tol, Some(width))?)
    } else {
        None
    };
    mesh.save(&spec.output, spec.format).map_err(|e| io_error(&spec.output, e))?;
    let record = BuildRecord {
        provenance: prov.record(),
        side: spec.side,
        format: spec.format,
        input: match &spec.kind {
            BuildKind::Graph(p) => Some(p.display().to_string()),
            _ => None,
        },
        mesh_vertices: mesh.vertex_count(),
        mesh_triangles: mesh.triangle_count(),
        verification: verification.clone(),
    };
    let side = sidecar_path(&spec.output);
    write_json(&side, &record)?;
    Ok(match verification {
        Some(r) if !r.pass => 1,
        _ => 0,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::new("internal", 2, e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| io_error(path, e))
}

fn load_mesh(path: &Path) -> Result<PeabodyMesh, CliError> {
    let mesh = PeabodyMesh::load(path).map_err(|e| match e {
        Error::Io(io) => CliError::new("invalid-input", 2, format!("{}: {io}", path.display())),
        other => CliError::input(other),
    })?;
    mesh.check_watertight().map_err(CliError::input)?;
    Ok(mesh)
}

/// Writes the width report; returns 0 iff it passes.
pub fn run_verify(
    mesh: &Path,
    expect_width: Option<f64>,
    tol: f64,
    dirs: usize,
    report: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let m = load_mesh(mesh)?;
    let r = width_report(&m, dirs, tol, expect_width).map_err(CliError::input)?;
    match report {
        Some(p) => write_json(p, &r)?,
        None => {
            let text = serde_json::to_string_pretty(&r).map_err(|e| CliError::new("internal", 2, e.to_string()))?;
            writeln!(out, "{text}").map_err(|e| CliError::new("io", 3, e.to_string()))?;
        }
    }
    Ok(if r.pass { 0 } else { 1 })
}

fn run_section(mesh: &Path, point: Vec3, normal: Vec3, output: Option<&Path>, out: &mut dyn Write) -> Result<i32, CliError> {
    let m = load_mesh(mesh)?;
    let plane = Plane::new(point, normal)?;
    let sec = plane_section(&m, &plane, 0.0).map_err(CliError::input)?;
    let mut csv = String::from("x,y,z\n");
    for p in &sec.polyline {
        csv.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", p.x, p.y, p.z));
    }
    match output {
        Some(p) => std::fs::write(p, csv).map_err(|e| io_error(p, e))?,
        None => out.write_all(csv.as_bytes()).map_err(|e| CliError::new("io", 3, e.to_string()))?,
    }
    Ok(0)
}

#[derive(Serialize)]
struct Comparison {
    dirs: usize,
    support_distance: f64,
}

fn run_compare(a: &Path, b: &Path, dirs: usize, out: &mut dyn Write) -> Result<i32, CliError> {
    let (ma, mb) = (load_mesh(a)?, load_mesh(b)?);
    let c = Comparison {
        dirs,
        support_distance: support_distance(&ma, &mb, dirs),
    };
    let text = serde_json::to_string_pretty(&c).map_err(|e| CliError::new("internal", 2, e.to_string()))?;
    writeln!(out, "{text}").map_err(|e| CliError::new("io", 3, e.to_string()))?;
    Ok(0)
}

fn run_sum(a: &Path, b: &Path, output: &Path, format: Option<MeshFormat>, dirs: usize) -> Result<i32, CliError> {
    let format = format_for(output, format)?;
    let (ma, mb) = (load_mesh(a)?, load_mesh(b)?);
    let s = minkowski_sum(&ma, &mb, dirs).map_err(CliError::input)?;
    s.save(output, format).map_err(|e| io_error(output, e))?;
    Ok(0)
}

/// Dispatches a parsed command line.
pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    match cli.command {
        Command::Build {
            kind,
            side,
            res,
            output,
            format,
            variant,
            lambda,
            input,
            verify,
        } => {
            let kind = match kind {
                BodyKind::Robert => BuildKind::Robert,
                BodyKind::Meissner => BuildKind::Meissner(variant),
                BodyKind::Family => BuildKind::Family(
                    lambda.ok_or_else(|| CliError::new("invalid-parameter", 2, "family needs --lambda"))?,
                ),
                BodyKind::Graph => BuildKind::Graph(
                    input.ok_or_else(|| CliError::new("invalid-parameter", 2, "graph needs --input"))?,
                ),
            };
            let spec = BuildSpec {
                kind,
                side,
                resolution: res,
                format: format_for(&output, format)?,
                output,
            };
            run_build(&spec, verify)
        }
        Command::Verify {
            mesh,
            expect_width,
            tol,
            dirs,
            report,
        } => run_verify(&mesh, expect_width, tol, dirs, report.as_deref(), out),
        Command::Section {
            mesh,
            point,
            normal,
            output,
        } => run_section(&mesh, point, normal, output.as_deref(), out),
        Command::Compare { first, second, dirs } => run_compare(&first, &second, dirs, out),
        Command::Sum {
            first,
            second,
            output,
            format,
            dirs,
        } => run_sum(&first, &second, &output, format, dirs),
    }
}

/// Parses arguments, runs, prints diagnostics; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error[usage]: {first}");
            return 2;
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(cli, &mut lock) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.diagnostic());
            e.code
        }
    }
}
