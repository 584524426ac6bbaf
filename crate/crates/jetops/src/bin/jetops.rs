use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use jetops_core::convex::{self, ConjMethod, GridSpec};
use jetops_core::front::{
    detect_cusps, q_grid_1d, q_grid_2d, sample_legendrian, wave_front,
};
use jetops_core::selector;

use jetops::scenario::Scenario;
use jetops::{figures, io, suites};

/// Numerical toolkit for Legendrian fronts built from generating functions.
#[derive(Parser)]
#[command(name = "jetops", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    /// Convex-hull conjugation (fast, monotone pointer).
    Llt,
    /// Brute-force supremum (slow oracle).
    Brute,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the wave front of a scenario's generating function into CSV
    /// (and optionally SVG).
    Front {
        /// Scenario JSON file describing the expression and grids.
        #[arg(long)]
        gf: PathBuf,
        /// Output CSV path (columns u, q.., p.., branch).
        #[arg(long)]
        out: PathBuf,
        /// Optional SVG rendering next to the CSV.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Compute the selector curve of a scenario over its base grid.
    Selector {
        #[arg(long)]
        gf: PathBuf,
        /// Output CSV path (columns q, s, iota, n_critical).
        #[arg(long)]
        out: PathBuf,
        /// Homology coefficient field (overrides the scenario).
        #[arg(long)]
        field: Option<String>,
    },
    /// Convex conjugate of a sampled function (CSV plus JSON tail sidecar).
    Conjugate {
        /// Input CSV with columns x,value.
        #[arg(long = "in")]
        input: PathBuf,
        /// JSON sidecar declaring the tail model.
        #[arg(long)]
        sidecar: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Llt)]
        method: Method,
        /// Output slope-grid minimum.
        #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
        min: f64,
        /// Output slope-grid maximum.
        #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
        max: f64,
        /// Output slope-grid step.
        #[arg(long, default_value_t = 0.01)]
        step: f64,
    },
    /// Run verification suites; exits nonzero if any check fails.
    Verify {
        /// Suite name or "all".
        #[arg(long, default_value = "all")]
        suite: String,
        /// Write the full JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Generate a figure into a directory.
    Figure {
        /// Figure id (fig1..fig9).
        #[arg(long)]
        id: String,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Allow experimental figures (fig2, fig3).
        #[arg(long)]
        experimental: bool,
    },
}

fn cmd_front(gf: &PathBuf, out: &PathBuf, svg: Option<&PathBuf>) -> Result<()> {
    let sc = Scenario::from_path(gf)?;
    let expr = sc.build_gf()?;
    let axis = sc.base_grid.points();
    let grid = match expr.base_dim() {
        1 => q_grid_1d(&axis),
        2 => q_grid_2d(&axis, &axis),
        n => return Err(anyhow!("front sampling supports base dimension 1 or 2, got {n}")),
    };
    let fiber = sc.fiber_rect(expr.fiber_dim())?;
    let cloud = sample_legendrian(&expr, &grid, &fiber, sc.step)?;
    io::cloud_to_csv(&cloud, out)?;
    eprintln!("{} points in {} ({} unresolved cells)", cloud.len(), out.display(), cloud.unresolved_cells);
    if let Some(svg_path) = svg {
        let text = if expr.base_dim() == 1 {
            let front = wave_front(&cloud);
            let cusps = detect_cusps(&front);
            io::front_to_svg(&front, &cusps, &sc.name)?
        } else {
            io::front2_to_svg(&cloud, &sc.name)?
        };
        std::fs::write(svg_path, text)?;
    }
    Ok(())
}

fn cmd_selector(gf: &PathBuf, out: &PathBuf, field: Option<&str>) -> Result<()> {
    let sc = Scenario::from_path(gf)?;
    let expr = sc.build_gf()?;
    let field = match field {
        Some("z2") => selector::Field::Z2,
        Some("q") => selector::Field::Q,
        Some(other) => return Err(anyhow!("unknown field {other:?}; expected \"z2\" or \"q\"")),
        None => sc.field()?,
    };
    let fiber = sc.fiber_rect(expr.fiber_dim())?;
    let curve = selector::selector(&expr, &sc.base_grid.points(), &fiber, sc.step, field, sc.index)?;
    io::selector_to_csv(&curve, out)?;
    if !curve.continuity_ok {
        eprintln!(
            "warning: selector jump {:.3e} exceeds the continuity modulus {:.3e}",
            curve.max_jump, curve.modulus
        );
    }
    Ok(())
}

fn cmd_conjugate(
    input: &PathBuf,
    sidecar: &PathBuf,
    out: &PathBuf,
    method: Method,
    min: f64,
    max: f64,
    step: f64,
) -> Result<()> {
    let f = io::grid_from_csv(input, sidecar)?;
    let spec = GridSpec::covering(min, max, step);
    let m = match method {
        Method::Llt => ConjMethod::Hull,
        Method::Brute => ConjMethod::Brute,
    };
    let c = convex::lf_transform(&f, &spec, m)?;
    io::grid_to_csv(&c, out)?;
    Ok(())
}

fn cmd_verify(suite: &str, report: Option<&PathBuf>) -> Result<bool> {
    let reports = if suite == "all" {
        suites::run_all()?
    } else {
        vec![suites::run_suite(suite)?]
    };
    let mut all_ok = true;
    for rep in &reports {
        for check in &rep.checks {
            let status = if check.passed { "pass" } else { "FAIL" };
            println!(
                "{:<22} {:<48} {status}  defect {:.3e} (tol {:.3e})",
                rep.suite, check.name, check.defect, check.tolerance
            );
            all_ok &= check.passed;
        }
    }
    if let Some(path) = report {
        std::fs::write(path, serde_json::to_string_pretty(&reports)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(all_ok)
}

fn run(cli: Cli) -> Result<bool> {
    match &cli.command {
        Command::Front { gf, out, svg } => cmd_front(gf, out, svg.as_ref()).map(|_| true),
        Command::Selector { gf, out, field } => {
            cmd_selector(gf, out, field.as_deref()).map(|_| true)
        }
        Command::Conjugate { input, sidecar, out, method, min, max, step } => {
            cmd_conjugate(input, sidecar, out, *method, *min, *max, *step).map(|_| true)
        }
        Command::Verify { suite, report } => cmd_verify(suite, report.as_ref()),
        Command::Figure { id, out, experimental } => {
            figures::generate(id, out, *experimental).map(|_| true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
