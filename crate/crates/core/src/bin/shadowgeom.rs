use std::io::Read as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde_json::{json, Value};

use shadowgeom::equivalence::{affine_equivalent_with, linear_equivalent_with, EquivalenceOptions};
use shadowgeom::fit::{body_mvee, canonicalize, is_ellipsoid, DEFAULT_TOL};
use shadowgeom::generate::{gen_body, BodySpec};
use shadowgeom::geometry::{project_along, ConvexBody, Line};
use shadowgeom::harness::{
    report_csv, scan_csv, scan_json, scan_projection_field, suite_csv, suite_defaults, suite_json,
    svg_shadow, verify, AxisReport, ScanOptions, SuiteConfig, LEMMA_IDS,
};
use shadowgeom::io::{
    affine_map_json, body_from_json, body_json, certificate_json, ellipsoid_json, matrix_json,
    mvee_json, to_stable_string, vector_json, verdict_json,
};
use shadowgeom::revolution::{affine_revolution_axis_with, revolution_axis_with, AxisSearch};
use shadowgeom::GeomError;

/// Projection fields of convex bodies: shadows, their enclosing
/// ellipsoids and axes of revolution, and randomized property suites.
///
/// Exit status is 0 on success, 1 when a `verify` suite fails and 2 on
/// usage or I/O errors.
#[derive(Parser, Debug)]
#[command(name = "shadowgeom", version)]
struct Cli {
    /// Master seed; every random choice is derived from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Main acceptance tolerance (command specific default).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Number of projection directions.
    #[arg(long, global = true)]
    dirs: Option<usize>,
    /// Number of suite trials.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Ambient dimension.
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also draw planar results as SVG. For `scan`, one file per shadow
    /// with the shadow index appended to the stem.
    #[arg(long, global = true)]
    svg: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a body from a generator descriptor.
    ///
    /// SPEC is a JSON descriptor (inline or a file path) or one of the
    /// names ball, cube, cross-polytope, random-symmetric-polytope, which
    /// use --dim.
    Gen { spec: String },
    /// Orthogonal projection along a direction.
    Project {
        body: String,
        /// Comma-separated direction; the last coordinate axis by default.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        direction: Option<Vec<f64>>,
    },
    /// Minimum-volume enclosing ellipsoid.
    Mvee { body: String },
    /// Canonical position: the image under the map sending the enclosing
    /// ellipsoid to the unit ball.
    Canon { body: String },
    /// Decide whether two bodies are linearly (or affinely) equivalent.
    Equiv {
        first: String,
        second: String,
        #[arg(long)]
        affine: bool,
        #[arg(long, default_value_t = shadowgeom::equivalence::DEFAULT_RESTARTS)]
        restarts: usize,
    },
    /// Axis of revolution of a symmetric body.
    Axis {
        body: String,
        /// Search for an affine axis of revolution.
        #[arg(long)]
        affine: bool,
    },
    /// Shadows along sampled directions and their pairwise equivalence.
    Scan {
        body: String,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Skip the per-shadow axis search.
        #[arg(long)]
        no_axes: bool,
    },
    /// Run a randomized property suite.
    Verify {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(LEMMA_IDS))]
        lemma_id: String,
        /// Check every trial against a deliberately wrong value.
        #[arg(long)]
        plant_violation: bool,
        /// Include per-trial runtimes (output is then not reproducible).
        #[arg(long)]
        timings: bool,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Convert a saved `verify` or `scan` JSON report to CSV.
    Report { report: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

enum Failure {
    Usage(String),
    Geom(GeomError),
}

impl From<GeomError> for Failure {
    fn from(e: GeomError) -> Self {
        Failure::Geom(e)
    }
}

type Outcome = std::result::Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Geom(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn read_input(arg: &str) -> std::result::Result<String, Failure> {
    if arg == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(GeomError::from)?;
        return Ok(s);
    }
    std::fs::read_to_string(arg).map_err(|e| Failure::Geom(GeomError::Io(format!("{arg}: {e}"))))
}

/// A body argument: a file (or `-`) holding a body or a generator
/// descriptor, or either of those given inline as JSON.
fn load_body(arg: &str, seed: u64) -> std::result::Result<ConvexBody, Failure> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        read_input(arg)?
    };
    let v: Value = serde_json::from_str(&text).map_err(GeomError::from)?;
    if v.get("kind").is_some() {
        let spec: BodySpec = serde_json::from_value(v)
            .map_err(|e| Failure::Usage(format!("invalid descriptor: {e}")))?;
        return Ok(gen_body(&spec, seed)?);
    }
    Ok(body_from_json(&v)?)
}

fn emit(cli: &Cli, text: &str) -> Outcome {
    match &cli.out {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Failure::Geom(GeomError::Io(format!("{}: {e}", p.display()))))?,
        None => print!("{text}"),
    }
    Ok(true)
}

fn emit_json(cli: &Cli, v: &Value) -> Outcome {
    emit(cli, &to_stable_string(v))
}

fn write_svg(path: &Path, body: &ConvexBody, axes: &[Line]) -> std::result::Result<(), Failure> {
    let svg = svg_shadow(body, axes)?;
    std::fs::write(path, svg)
        .map_err(|e| Failure::Geom(GeomError::Io(format!("{}: {e}", path.display()))))
}

fn indexed_path(path: &Path, i: usize) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("shadow");
    let name = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}-{i}.{ext}"),
        None => format!("{stem}-{i}"),
    };
    path.with_file_name(name)
}

fn parse_spec(spec: &str, dim: Option<usize>) -> std::result::Result<BodySpec, Failure> {
    let dim = dim.unwrap_or(3);
    let named = match spec {
        "ball" => Some(BodySpec::Ball { dim }),
        "cube" => Some(BodySpec::Cube { dim }),
        "cross-polytope" => Some(BodySpec::CrossPolytope { dim }),
        "random-symmetric-polytope" => Some(BodySpec::RandomSymmetricPolytope {
            dim,
            points: 4 * dim,
        }),
        _ => None,
    };
    if let Some(s) = named {
        return Ok(s);
    }
    let text = if spec.trim_start().starts_with('{') {
        spec.to_string()
    } else {
        read_input(spec)?
    };
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("invalid descriptor: {e}")))
}

fn run(cli: &Cli) -> Outcome {
    let tol = cli.tol.unwrap_or(DEFAULT_TOL);
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Failure::Usage("--tol must be a positive number".into()));
    }
    match &cli.command {
        Command::Gen { spec } => {
            let body = gen_body(&parse_spec(spec, cli.dim)?, cli.seed)?;
            if let Some(p) = &cli.svg {
                write_svg(p, &body, &[])?;
            }
            emit_json(cli, &body_json(&body))
        }
        Command::Project { body, direction } => {
            let body = load_body(body, cli.seed)?;
            let n = body.dim();
            let u = match direction {
                Some(d) => DVector::from_column_slice(d),
                None => {
                    let mut e = DVector::zeros(n);
                    e[n - 1] = 1.0;
                    e
                }
            };
            let (shadow, plane) = project_along(&body, &u)?;
            if let Some(p) = &cli.svg {
                write_svg(p, &shadow, &[])?;
            }
            let mut v = body_json(&shadow);
            v["direction"] = vector_json(&(&u / u.norm()));
            v["plane_basis"] = matrix_json(&plane.basis().transpose());
            emit_json(cli, &v)
        }
        Command::Mvee { body } => {
            let body = load_body(body, cli.seed)?;
            emit_json(cli, &mvee_json(&body_mvee(&body)?))
        }
        Command::Canon { body } => {
            let body = load_body(body, cli.seed)?;
            let (canon, map) = canonicalize(&body)?;
            let ellipsoid = body_mvee(&body)?.ellipsoid;
            let (is_ell, residual) = is_ellipsoid(&body, tol)?;
            if let Some(p) = &cli.svg {
                write_svg(p, &canon, &[])?;
            }
            emit_json(
                cli,
                &json!({
                    "body": body_json(&canon),
                    "map": affine_map_json(&map),
                    "ellipsoid": ellipsoid_json(&ellipsoid),
                    "is_ellipsoid": is_ell,
                    "ellipsoid_residual": residual,
                    "tol": tol,
                }),
            )
        }
        Command::Equiv {
            first,
            second,
            affine,
            restarts,
        } => {
            let a = load_body(first, cli.seed)?;
            let b = load_body(second, cli.seed)?;
            let opts = EquivalenceOptions {
                tol,
                restarts: *restarts,
                seed: cli.seed,
                directions: cli.dirs,
            };
            let verdict = if *affine {
                affine_equivalent_with(&a, &b, &opts)?
            } else {
                linear_equivalent_with(&a, &b, &opts)?
            };
            emit_json(cli, &verdict_json(&verdict))
        }
        Command::Axis { body, affine } => {
            let body = load_body(body, cli.seed)?;
            let search = AxisSearch {
                tol,
                seed: cli.seed,
                ..AxisSearch::default()
            };
            let cert = if *affine {
                affine_revolution_axis_with(&body, &search)?
            } else {
                revolution_axis_with(&body, &search)?
            };
            if let Some(p) = &cli.svg {
                let axes: Vec<Line> = cert.iter().map(|c| c.axis.clone()).collect();
                write_svg(p, &body, &axes)?;
            }
            emit_json(
                cli,
                &json!({
                    "certificate": cert.as_ref().map_or(Value::Null, certificate_json),
                    "tol": tol,
                }),
            )
        }
        Command::Scan {
            body,
            format,
            no_axes,
        } => {
            let body = load_body(body, cli.seed)?;
            let opts = ScanOptions {
                count: cli.dirs.unwrap_or(8),
                seed: cli.seed,
                tol,
                axes: !no_axes,
                equivalence: EquivalenceOptions {
                    seed: cli.seed,
                    ..EquivalenceOptions::default()
                },
                ..ScanOptions::default()
            };
            let scan = scan_projection_field(&body, &opts)?;
            if let Some(p) = &cli.svg {
                for (i, s) in scan.shadows.iter().enumerate() {
                    let (shadow, plane) = project_along(&body, &s.direction)?;
                    let axes = match &s.axis {
                        AxisReport::Axis { axis, .. } => {
                            let dir = plane.coords(&axis.direction());
                            vec![Line::new(plane.coords(axis.base_point()), &dir)?]
                        }
                        _ => Vec::new(),
                    };
                    write_svg(&indexed_path(p, i), &shadow, &axes)?;
                }
            }
            match format {
                Format::Json => emit_json(cli, &scan_json(&scan)),
                Format::Csv => emit(cli, &scan_csv(&scan)?),
            }
        }
        Command::Verify {
            lemma_id,
            plant_violation,
            timings,
            format,
        } => {
            let defaults = suite_defaults(lemma_id)
                .ok_or_else(|| Failure::Usage(format!("unknown lemma id `{lemma_id}`")))?;
            let cfg = SuiteConfig {
                trials: cli.trials.unwrap_or(defaults.trials),
                dim: cli.dim,
                seed: cli.seed,
                tol: cli.tol,
                dirs: cli.dirs,
                plant_violation: *plant_violation,
            };
            let report = verify(lemma_id, &cfg)?;
            match format {
                Format::Json => emit_json(cli, &suite_json(&report, *timings)?)?,
                Format::Csv => emit(cli, &suite_csv(&report, *timings)?)?,
            };
            eprintln!(
                "{lemma_id}: {} passed, {} failed, {} skipped{}",
                report.passed,
                report.failed,
                report.skipped,
                if report.ok() { "" } else { " (FAILED)" }
            );
            for c in report.checks.iter().filter(|c| !c.passed) {
                eprintln!("  check failed: {} ({:e} vs {:e})", c.name, c.value, c.threshold);
            }
            Ok(report.ok())
        }
        Command::Report { report } => {
            let text = read_input(&report.to_string_lossy())?;
            let v: Value = serde_json::from_str(&text).map_err(GeomError::from)?;
            emit(cli, &report_csv(&v)?)
        }
    }
}
