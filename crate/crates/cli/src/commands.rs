use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use desitter_twistor::chart::{interior_max, interior_stats, ChartGrid, Field, StencilOrder};
use desitter_twistor::energy::{cmc_pipeline, energy_report, SolverConfig};
use desitter_twistor::frames::{
    adapted_frame_of, analytic_connection_of, associated_family, default_base_frame, frobenius, harmonicity_residual,
    lambda_connection, reconstruct_surface, verify_family, zcc_residual,
};
use desitter_twistor::surface::{
    analyze, cylinder_grid, cylinder_strip, residual_margin, stereo_grid, stereo_log_grid, Analysis,
    ConformalImmersion, Generator, SurfaceData,
};
use desitter_twistor::twistor::{
    holomorphicity_report, horizontality_of_frames, horizontality_residual, max_horizontality,
};
use nalgebra::Complex;

use crate::chartfile::ChartFile;
use crate::config::{scaled, Thresholds};
use crate::error::CliError;
use crate::summary::Summary;

#[derive(Debug, Parser)]
#[command(
    name = "desitter",
    version,
    about = "Spacelike surfaces in de Sitter 3-space and their twistor lifts"
)]
pub struct Cli {
    /// Thresholds file replacing the built-in defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Use fourth-order interior stencils for every derivative.
    #[arg(long, global = true)]
    pub fourth_order: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a closed-form surface on a chart grid.
    Generate(GenerateArgs),
    /// Compute (u, n, H, ξ) and the structure-equation residuals of an immersion.
    Analyze(AnalyzeArgs),
    /// Run holomorphicity, horizontality, harmonicity and zero-curvature tests.
    #[command(alias = "lift")]
    Check(CheckArgs),
    /// Member of the associated family of a CMC surface.
    Deform(DeformArgs),
    /// Solve the Gauss equation for constant (H, ξ) and build the surface.
    Solve(SolveArgs),
    /// Integrate the frame of (u, H, ξ) data and write the immersion.
    Reconstruct(ReconstructArgs),
    /// Twistor and Willmore energies.
    Energy(EnergyArgs),
    /// Analyze, reconstruct and compare with the input immersion.
    Roundtrip(RoundtripArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Shape {
    Sphere,
    Cylinder,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SphereChart {
    Stereo,
    StereoLog,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    pub shape: Shape,
    /// Height of the umbilic sphere.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub c: f64,
    /// Cylinder parameter.
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    /// Nodes along x (and along y unless --ny is given).
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    #[arg(long)]
    pub ny: Option<usize>,
    #[arg(long, value_enum, default_value_t = SphereChart::StereoLog)]
    pub chart: SphereChart,
    /// Outer radius of the logarithmic sphere chart.
    #[arg(long, default_value_t = 100.0)]
    pub radius: f64,
    /// Half width of the Cartesian sphere chart.
    #[arg(long, default_value_t = 2.0)]
    pub half_width: f64,
    /// y range of the cylinder chart, as "min,max".
    #[arg(long, default_value = "-1,1", allow_hyphen_values = true)]
    pub y_range: String,
    /// Open cylinder strip with this spacing instead of the periodic chart.
    #[arg(long)]
    pub strip_h: Option<f64>,
    /// x range of the cylinder strip, as "min,max".
    #[arg(long, default_value = "0,1", allow_hyphen_values = true)]
    pub x_range: String,
    /// Also write the closed-form normal and invariants.
    #[arg(long)]
    pub exact: bool,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub input: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TestName {
    J1,
    J2,
    Conformal,
    Horizontal,
    Harmonic,
    Zcc,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub input: PathBuf,
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "j1,j2,conformal,horizontal,harmonic,zcc"
    )]
    pub tests: Vec<TestName>,
    /// Spectral parameters for the zero-curvature test.
    #[arg(long, value_delimiter = ';', default_value = "1", allow_hyphen_values = true)]
    pub lambda: Vec<String>,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DeformArgs {
    pub input: PathBuf,
    /// Unit complex number such as "i", "0.6+0.8i" or "-1".
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: String,
    /// Base node as "i,j" (defaults to the grid centre).
    #[arg(long)]
    pub base: Option<String>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Constant mean curvature.
    #[arg(long = "H", allow_negative_numbers = true)]
    pub h: f64,
    /// Constant Hopf differential as "re,im".
    #[arg(long, allow_hyphen_values = true)]
    pub xi: String,
    #[arg(long, default_value_t = 128)]
    pub n: usize,
    #[arg(long)]
    pub ny: Option<usize>,
    /// Period of the doubly periodic chart.
    #[arg(long, default_value_t = 2.0 * PI)]
    pub length: f64,
    /// Amplitude of the initial guess u₀ = a·sin x.
    #[arg(long, default_value_t = 0.05, allow_negative_numbers = true)]
    pub u0: f64,
    /// Surface output.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Also write the solved (u, H, ξ) on the periodic chart.
    #[arg(long)]
    pub data_out: Option<PathBuf>,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub base: Option<String>,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct EnergyArgs {
    pub input: PathBuf,
    /// Euler characteristic for the closed-surface identity.
    #[arg(long, allow_negative_numbers = true)]
    pub chi: Option<i32>,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RoundtripArgs {
    pub input: PathBuf,
    /// Exit with a residual failure when the node distance exceeds this.
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

struct Context {
    thresholds: Thresholds,
    /// Overrides the stencil stored in input files.
    stencil: Option<StencilOrder>,
}

impl Context {
    fn read(&self, path: &Path) -> Result<ChartFile, CliError> {
        let file = ChartFile::read(path)?;
        Ok(match self.stencil {
            Some(s) => file.with_stencil(s),
            None => file,
        })
    }

    fn stencil(&self) -> StencilOrder {
        self.stencil.unwrap_or_default()
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let ctx = Context {
        thresholds: Thresholds::load(cli.config.as_deref())?,
        stencil: cli.fourth_order.then_some(StencilOrder::Fourth),
    };
    match &cli.command {
        Command::Generate(a) => generate(&ctx, a),
        Command::Analyze(a) => cmd_analyze(&ctx, a),
        Command::Check(a) => check(&ctx, a),
        Command::Deform(a) => deform(&ctx, a),
        Command::Solve(a) => solve(&ctx, a),
        Command::Reconstruct(a) => reconstruct(&ctx, a),
        Command::Energy(a) => energy(&ctx, a),
        Command::Roundtrip(a) => roundtrip(&ctx, a),
    }
}

fn arg_error(what: &str, value: &str) -> CliError {
    CliError::Argument(format!("cannot parse {what} from {value:?}"))
}

fn parse_pair(s: &str, what: &str) -> Result<(f64, f64), CliError> {
    let (a, b) = s.split_once(',').ok_or_else(|| arg_error(what, s))?;
    let a = a.trim().parse().map_err(|_| arg_error(what, s))?;
    let b = b.trim().parse().map_err(|_| arg_error(what, s))?;
    Ok((a, b))
}

/// Parses `a`, `bi`, `a+bi` and `a-bi`.
pub fn parse_complex(s: &str) -> Result<Complex<f64>, CliError> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let err = || arg_error("complex number", s);
    let num = |p: &str| -> Result<f64, CliError> {
        match p {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => p.parse().map_err(|_| err()),
        }
    };
    let Some(body) = t.strip_suffix('i') else {
        return Ok(Complex::new(t.parse().map_err(|_| err())?, 0.0));
    };
    // the last sign that is neither leading nor part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => Ok(Complex::new(body[..k].parse().map_err(|_| err())?, num(&body[k..])?)),
        None => Ok(Complex::new(0.0, num(body)?)),
    }
}

fn parse_base(s: Option<&str>, grid: &ChartGrid) -> Result<usize, CliError> {
    let Some(s) = s else {
        return Ok(grid.center());
    };
    let (i, j) = s.split_once(',').ok_or_else(|| arg_error("base node", s))?;
    let i: usize = i.trim().parse().map_err(|_| arg_error("base node", s))?;
    let j: usize = j.trim().parse().map_err(|_| arg_error("base node", s))?;
    if i >= grid.nx || j >= grid.ny {
        return Err(CliError::Argument(format!(
            "base node ({i}, {j}) outside the {}x{} grid",
            grid.nx, grid.ny
        )));
    }
    Ok(grid.index(i, j))
}

fn finish(summary: &Summary, path: Option<&Path>) -> Result<(), CliError> {
    summary.print();
    if let Some(p) = path {
        summary.write(p)?;
    }
    Ok(())
}

fn analyze_file(file: &ChartFile) -> Result<Analysis, CliError> {
    let f = file.f.clone().ok_or(CliError::MissingField("f"))?;
    let imm = ConformalImmersion::new(f)?.with_euler_char(file.euler_char);
    Ok(analyze(&imm)?)
}

/// Analyzed data when the file holds an immersion, the stored invariants otherwise.
fn surface_data(file: &ChartFile) -> Result<(SurfaceData, Option<Analysis>), CliError> {
    if file.f.is_some() {
        let a = analyze_file(file)?;
        Ok((a.data.clone(), Some(a)))
    } else {
        Ok((file.to_data()?, None))
    }
}

/// Largest interior `|⟨f_z, f_z⟩| e^{−2u}`.
fn relative_conformality(a: &Analysis) -> f64 {
    let g = a.data.grid();
    let rel = a
        .residuals
        .conformality
        .zip_map(&a.data.u, |c, u| c * (-2.0 * u).exp())
        .expect("same grid");
    interior_max(&rel, residual_margin(g), |v| *v)
}

fn generate(ctx: &Context, a: &GenerateArgs) -> Result<(), CliError> {
    let ny = a.ny.unwrap_or(a.n);
    let (gen, grid) = match a.shape {
        Shape::Sphere => {
            let grid = match a.chart {
                SphereChart::StereoLog => stereo_log_grid(a.n, ny, a.radius)?,
                SphereChart::Stereo => stereo_grid(a.n, a.half_width)?,
            };
            (Generator::UmbilicSphere { c: a.c }, grid)
        }
        Shape::Cylinder => {
            let y = parse_pair(&a.y_range, "y range")?;
            let grid = match a.strip_h {
                Some(h) => cylinder_strip(h, parse_pair(&a.x_range, "x range")?, y)?,
                None => cylinder_grid(a.rho, a.n, a.ny.unwrap_or(a.n / 4 + 1), y)?,
            };
            (Generator::HyperbolicCylinder { rho: a.rho }, grid)
        }
    };
    let grid = grid.with_stencil(ctx.stencil());
    let file = if a.exact {
        ChartFile::from_data(&gen.exact(&grid)?)
    } else {
        let imm = gen.immersion(&grid)?;
        let mut f = ChartFile::empty(grid.clone());
        f.f = Some(imm.f().clone());
        f.euler_char = imm.euler_char();
        f
    };
    file.write(&a.output)?;
    println!(
        "wrote {} ({}x{} {} chart, H = {:.6}, |xi| = {:.6})",
        a.output.display(),
        grid.nx,
        grid.ny,
        grid.chart_id,
        gen.mean_curvature(),
        gen.hopf_xi().norm()
    );
    Ok(())
}

fn cmd_analyze(ctx: &Context, a: &AnalyzeArgs) -> Result<(), CliError> {
    let file = ctx.read(&a.input)?;
    let an = analyze_file(&file)?;
    let s = &an.summary;
    let mut sum = Summary::new("analyze");
    sum.stats("conformality", s.conformality);
    sum.stats("gauss", s.gauss);
    sum.stats("codazzi", s.codazzi);
    sum.stats("structure", s.structure);
    sum.stats("gauss_identity", s.gauss_identity);
    sum.scalar("normal_constraints", s.normal_constraints);
    sum.scalar("cmc_spread", s.cmc.spread);
    let g = an.data.grid();
    let m = residual_margin(g);
    sum.stats("H", interior_stats(&an.data.h, m, |v| *v));
    sum.stats("abs_xi", interior_stats(&an.data.xi, m, |v| v.norm()));
    sum.stats("K", interior_stats(&an.k, m, |v| *v));
    let conf = relative_conformality(&an);
    let conf_limit = scaled(ctx.thresholds.analysis.conformality, g);
    sum.scalar("relative_conformality", conf);
    finish(&sum, a.summary.as_deref())?;
    if let Some(out) = &a.output {
        ChartFile::from_data(&an.data).write(out)?;
    }
    if !(conf <= conf_limit) {
        return Err(CliError::Geometry(format!(
            "immersion is not conformal: max |<f_z,f_z>| e^(-2u) = {conf:e} exceeds {conf_limit:e}"
        )));
    }
    Ok(())
}

fn check(ctx: &Context, a: &CheckArgs) -> Result<(), CliError> {
    let file = ctx.read(&a.input)?;
    let (data, _) = surface_data(&file)?;
    let grid = data.grid().clone();
    let c = &ctx.thresholds.checks;
    let lambdas = a
        .lambda
        .iter()
        .map(|s| parse_complex(s))
        .collect::<Result<Vec<_>, _>>()?;
    let mut sum = Summary::new("check");
    let mut failed = Vec::new();
    let report = if a
        .tests
        .iter()
        .any(|t| matches!(t, TestName::J1 | TestName::J2 | TestName::Conformal))
    {
        Some(holomorphicity_report(&data)?)
    } else {
        None
    };
    let m = residual_margin(&grid);
    for test in &a.tests {
        let (name, value, coef) = match test {
            TestName::J1 => ("j1", report.as_ref().unwrap().xi_max, c.j1),
            TestName::J2 => ("j2", report.as_ref().unwrap().h_max, c.j2),
            TestName::Conformal => ("conformal", report.as_ref().unwrap().conformal_max, c.conformal),
            TestName::Horizontal => {
                let field = match adapted_frame_of(&data) {
                    Ok(frames) => horizontality_of_frames(&frames),
                    Err(_) => horizontality_residual(&data)?,
                };
                ("horizontal", max_horizontality(&field), c.horizontal)
            }
            TestName::Harmonic => {
                let cf = analytic_connection_of(&data)?;
                (
                    "harmonic",
                    interior_max(&harmonicity_residual(&cf), m, frobenius),
                    c.harmonic,
                )
            }
            TestName::Zcc => {
                let cf = analytic_connection_of(&data)?;
                let mut worst = 0.0f64;
                for l in &lambdas {
                    let r = interior_max(&zcc_residual(&lambda_connection(&cf, *l)?), m, frobenius);
                    sum.scalar(&format!("zcc[{}{:+}i]", l.re, l.im), r);
                    worst = worst.max(r);
                }
                ("zcc", worst, c.zcc)
            }
        };
        let limit = scaled(coef, &grid);
        let pass = value <= limit;
        println!(
            "{name:10} {}  value {value:.6e}  threshold {limit:.6e}",
            if pass { "PASS" } else { "FAIL" }
        );
        sum.scalar(name, value);
        if !pass {
            failed.push(name);
        }
    }
    if let Some(p) = &a.summary {
        sum.write(p)?;
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Residual(failed.join(", ")))
    }
}

fn deform(ctx: &Context, a: &DeformArgs) -> Result<(), CliError> {
    let lambda = parse_complex(&a.lambda)?;
    let file = ctx.read(&a.input)?;
    let (data, _) = surface_data(&file)?;
    let base = parse_base(a.base.as_deref(), data.grid())?;
    let d = associated_family(&data, lambda, Some(base))?;
    let r = verify_family(&data, &d.analysis, lambda)?;
    let mut sum = Summary::new("deform");
    sum.scalar("lambda_re", lambda.re);
    sum.scalar("lambda_im", lambda.im);
    sum.scalar("h_dev", r.h_dev);
    sum.scalar("u_dev", r.u_dev);
    sum.scalar("xi_dev", r.xi_dev);
    sum.scalar("k_dev", r.k_dev);
    sum.scalar("path_dependence", d.frame.path_dependence);
    sum.scalar("past_pointing_nodes", d.past_pointing_nodes as f64);
    let m = residual_margin(d.analysis.data.grid());
    sum.stats("xi_re", interior_stats(&d.analysis.data.xi, m, |v| v.re));
    sum.stats("xi_im", interior_stats(&d.analysis.data.xi, m, |v| v.im));
    finish(&sum, a.summary.as_deref())?;
    if let Some(out) = &a.output {
        ChartFile::from_data(&d.analysis.data).write(out)?;
    }
    Ok(())
}

fn solve(ctx: &Context, a: &SolveArgs) -> Result<(), CliError> {
    let (re, im) = parse_pair(&a.xi, "xi")?;
    let xi = Complex::new(re, im);
    let ny = a.ny.unwrap_or(a.n);
    let grid = ChartGrid::new(
        a.n,
        ny,
        a.length / a.n as f64,
        a.length / ny as f64,
        0.0,
        0.0,
        true,
        true,
    )?
    .with_chart_id("plane")
    .with_stencil(ctx.stencil());
    let amp = a.u0;
    let cfg = SolverConfig {
        initial_u: Some(Field::from_fn(grid.clone(), |x, _| amp * x.sin())),
        ..ctx.thresholds.solver_config()
    };
    let out = cmc_pipeline(a.h, xi, &grid, &cfg, ctx.thresholds.reconstruct_threshold(&grid))?;
    let s = &out.solution;
    let mut sum = Summary::new("solve");
    sum.scalar("iterations", s.iterations as f64);
    sum.scalar("final_residual", s.history.last().copied().unwrap_or(f64::NAN));
    if let Some(k) = s.kappa {
        sum.scalar("kappa", k);
    }
    if let Some(r) = s.normalized_residual {
        sum.scalar("normalized_residual", r);
    }
    if let Some(p) = s.observed_order() {
        sum.scalar("observed_order", p);
    }
    let d = &out.analysis.data;
    let m = residual_margin(d.grid());
    sum.scalar("h_dev", interior_max(&d.h, m, |v| (v - a.h).abs()));
    sum.scalar("xi_dev", interior_max(&d.xi, m, |v| (v - xi).norm()));
    sum.scalar("twistor_energy", out.energy.twistor_energy);
    sum.scalar("density_max", out.energy.density_max);
    sum.scalar("harmonicity", out.harmonicity_max);
    sum.scalar("monodromy_x", out.reconstruction.frame.monodromy_x.unwrap_or(0.0));
    sum.scalar("monodromy_y", out.reconstruction.frame.monodromy_y.unwrap_or(0.0));
    finish(&sum, a.summary.as_deref())?;
    let mut surface = ChartFile::empty(d.grid().clone());
    surface.f = Some(out.reconstruction.immersion.f().clone());
    surface.write(&a.output)?;
    if let Some(p) = &a.data_out {
        let data = SurfaceData::from_invariants(
            s.u.clone(),
            Field::constant(grid.clone(), a.h),
            Field::constant(grid.clone(), xi),
        )?;
        ChartFile::from_data(&data).write(p)?;
    }
    Ok(())
}

fn reconstruct(ctx: &Context, a: &ReconstructArgs) -> Result<(), CliError> {
    let file = ctx.read(&a.input)?;
    let data = file.to_data()?;
    let base = parse_base(a.base.as_deref(), data.grid())?;
    let frame = default_base_frame(&data, base)?;
    let rec = reconstruct_surface(&data, base, frame, ctx.thresholds.reconstruct_threshold(data.grid()))?;
    let mut out = ChartFile::empty(rec.immersion.grid().clone());
    out.f = Some(rec.immersion.f().clone());
    out.euler_char = data.euler_char;
    out.write(&a.output)?;
    println!("path_dependence  {:.6e}", rec.frame.path_dependence);
    if let Some(m) = rec.frame.monodromy_x {
        println!("monodromy_x      {m:.6e}");
    }
    if let Some(m) = rec.frame.monodromy_y {
        println!("monodromy_y      {m:.6e}");
    }
    Ok(())
}

fn energy(ctx: &Context, a: &EnergyArgs) -> Result<(), CliError> {
    let file = ctx.read(&a.input)?;
    let (data, _) = surface_data(&file)?;
    let r = energy_report(&data, a.chi)?;
    let mut sum = Summary::new("energy");
    sum.scalar("twistor_energy", r.twistor_energy);
    sum.scalar("willmore_energy", r.willmore_energy);
    sum.scalar("curvature_integral", r.curvature_integral);
    sum.scalar("area", r.area);
    sum.scalar("local_defect", r.local_defect);
    if let Some(d) = r.identity_defect {
        sum.scalar("identity_defect", d);
    }
    if let Some(chi) = r.euler_char_used {
        sum.scalar("euler_char", chi as f64);
    }
    sum.scalar("density_min", r.density_min);
    sum.scalar("density_max", r.density_max);
    finish(&sum, a.summary.as_deref())
}

fn roundtrip(ctx: &Context, a: &RoundtripArgs) -> Result<(), CliError> {
    let file = ctx.read(&a.input)?;
    let first = analyze_file(&file)?;
    let grid = first.data.grid().clone();
    let base = grid.center();
    let frame = *adapted_frame_of(&first.data)?.at(base);
    let rec = reconstruct_surface(&first.data, base, frame, ctx.thresholds.reconstruct_threshold(&grid))?;
    let second = analyze(&rec.immersion)?;
    let m = residual_margin(&grid);
    let nodes = grid.interior(m);
    let f0 = first.data.f.as_ref().expect("analyzed data carries f");
    let f1 = rec.immersion.f();
    let max_over = |g: &dyn Fn(usize) -> f64| nodes.iter().map(|&k| g(k)).fold(0.0, f64::max);
    let distance = max_over(&|k| (f0.at(k) - f1.at(k)).norm());
    let (d0, d1) = (&first.data, &second.data);
    let mut sum = Summary::new("roundtrip");
    sum.scalar("node_distance", distance);
    sum.scalar("u_drift", max_over(&|k| (d0.u.at(k) - d1.u.at(k)).abs()));
    sum.scalar("h_drift", max_over(&|k| (d0.h.at(k) - d1.h.at(k)).abs()));
    sum.scalar("xi_drift", max_over(&|k| (d0.xi.at(k) - d1.xi.at(k)).norm()));
    sum.scalar("path_dependence", rec.frame.path_dependence);
    finish(&sum, a.summary.as_deref())?;
    match a.tolerance {
        Some(t) if !(distance <= t) => Err(CliError::Residual(format!("node distance {distance:e} exceeds {t:e}"))),
        _ => Ok(()),
    }
}
