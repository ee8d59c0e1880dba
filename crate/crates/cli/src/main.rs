//! Command-line façade: JSON-configured pipelines over the core crate,
//! reproducible run manifests with checksums, figure-data emission.
//!
//! Exit codes: 0 success, 2 validation error (bad config, bad inputs,
//! failed classification), 3 numerical-contract failure (a residual or
//! comparison above its threshold).

use clap::Parser;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use geomcst::cst::{annihilation_residual, fiducial, icst};
use geomcst::dynamics::{interference_profile, reconstruct_field, schrodinger_residual, Model};
use geomcst::grid::{Grid1D, Grid3D, WaveFunction1D};
use geomcst::group_reps::{analytic_operator, structural_operator};
use geomcst::oracle::{classical_orbit, cn_propagate, energy_expectation, PhasePoint};
use geomcst::reduction::{classify, QuadraticForm};
use geomcst::symalg::{CRat, Polynomial, Rat};
use geomcst::ModelParams;

const EXIT_VALIDATION: i32 = 2;
const EXIT_CONTRACT: i32 = 3;

#[derive(Parser)]
#[command(
    name = "geomcst",
    about = "Coherent state transforms on a step-3 nilpotent group: \
             symbolic order reduction and its numerical validation"
)]
struct Cli {
    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// Cap the worker pool (outputs are deterministic regardless)
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory (created if missing)
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// 3-D field output format
    #[arg(long, default_value = "binary", value_parser = ["csv", "binary"])]
    format: String,
    /// Override the config's residual threshold (verify, evolve, compare)
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Deserialize, Serialize, Clone)]
struct Grid1Spec {
    min: f64,
    max: f64,
    n: usize,
}

impl Grid1Spec {
    fn build(&self) -> Result<Grid1D, CliError> {
        if self.n < 3 || self.max <= self.min {
            return Err(CliError::Validation(format!(
                "bad 1-D grid: [{}, {}] with {} nodes",
                self.min, self.max, self.n
            )));
        }
        Ok(Grid1D {
            y0: self.min,
            step: (self.max - self.min) / (self.n - 1) as f64,
            n: self.n,
        })
    }
}

#[derive(Deserialize, Serialize, Clone)]
struct Grid3Spec {
    origin: [f64; 3],
    step: [f64; 3],
    n: [usize; 3],
}

impl Grid3Spec {
    fn build(&self) -> Result<Grid3D, CliError> {
        if self.n.iter().any(|&k| k < 2) || self.step.iter().any(|&s| s <= 0.0) {
            return Err(CliError::Validation("bad 3-D grid spec".into()));
        }
        Ok(Grid3D {
            origin: self.origin,
            step: self.step,
            n: self.n,
        })
    }
}

fn default_model() -> String {
    "free".into()
}

#[derive(Deserialize, Serialize, Clone)]
struct RunConfig {
    command: String,
    params: ModelParams,
    #[serde(default = "default_model")]
    model: String,
    #[serde(default)]
    seed: u64,
    /// residual threshold for verify/evolve/compare; CLI --tolerance wins
    #[serde(default)]
    tolerance: Option<f64>,
    #[serde(default)]
    grid1d: Option<Grid1Spec>,
    #[serde(default)]
    grid3d: Option<Grid3Spec>,
    /// per-axis node counts for the verify refinement levels
    #[serde(default)]
    levels: Option<Vec<usize>>,
    #[serde(default)]
    margin: Option<usize>,
    /// input paths: matrix JSON, psi CSV, density CSV, compare operands
    #[serde(default)]
    matrix: Option<PathBuf>,
    #[serde(default)]
    input_psi: Option<PathBuf>,
    #[serde(default)]
    density: Option<PathBuf>,
    #[serde(default)]
    compare_a: Option<PathBuf>,
    #[serde(default)]
    compare_b: Option<PathBuf>,
    /// "wavefunction" or "field"
    #[serde(default)]
    compare_kind: Option<String>,
    #[serde(default)]
    t: Option<f64>,
    #[serde(default)]
    dt: Option<f64>,
    #[serde(default)]
    t_end: Option<f64>,
    #[serde(default)]
    snapshots: Option<Vec<f64>>,
    #[serde(default)]
    initials: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    delta: Option<f64>,
}

enum CliError {
    Validation(String),
    Contract(String),
}

impl From<geomcst::NumericError> for CliError {
    fn from(e: geomcst::NumericError) -> Self {
        CliError::Validation(e.to_string())
    }
}

/// Files touched by the run, checksummed into the manifest.
#[derive(Default)]
struct Ledger {
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
}

fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

impl Ledger {
    fn input(&mut self, path: &Path) -> Result<(), CliError> {
        self.inputs
            .insert(path.display().to_string(), sha256_file(path)?);
        Ok(())
    }
    fn output(&mut self, path: &Path) -> Result<(), CliError> {
        self.outputs
            .insert(path.display().to_string(), sha256_file(path)?);
        Ok(())
    }
}

#[derive(Serialize)]
struct Manifest {
    command: String,
    version: String,
    wall_time_s: f64,
    threads: Option<usize>,
    format: String,
    tolerance: Option<f64>,
    config: serde_json::Value,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
}

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    std::process::exit(run(&cli));
}

fn run(cli: &Cli) -> i32 {
    let start = Instant::now();
    if let Some(n) = cli.threads {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .is_err()
        {
            eprintln!("warning: thread pool already initialized; --threads ignored");
        }
    }
    let config_text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read config {}: {e}", cli.config.display());
            return EXIT_VALIDATION;
        }
    };
    let config: RunConfig = match serde_json::from_str(&config_text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: bad config: {e}");
            return EXIT_VALIDATION;
        }
    };
    if let Err(e) = std::fs::create_dir_all(&cli.out) {
        eprintln!("error: cannot create {}: {e}", cli.out.display());
        return EXIT_VALIDATION;
    }
    let mut ledger = Ledger::default();
    if ledger.input(&cli.config).is_err() {
        eprintln!("error: cannot checksum config");
        return EXIT_VALIDATION;
    }
    let outcome = dispatch(cli, &config, &mut ledger);
    let code = match outcome {
        Ok(()) => 0,
        Err(CliError::Validation(msg)) => {
            eprintln!("validation error: {msg}");
            EXIT_VALIDATION
        }
        Err(CliError::Contract(msg)) => {
            eprintln!("numerical-contract failure: {msg}");
            EXIT_CONTRACT
        }
    };
    // The manifest records the run even on failure (without a checksum
    // of itself).
    let manifest = Manifest {
        command: config.command.clone(),
        version: env!("CARGO_PKG_VERSION").into(),
        wall_time_s: start.elapsed().as_secs_f64(),
        threads: cli.threads,
        format: cli.format.clone(),
        tolerance: cli.tolerance.or(config.tolerance),
        config: serde_json::from_str(&config_text).unwrap_or(serde_json::Value::Null),
        inputs: ledger.inputs,
        outputs: ledger.outputs,
    };
    let manifest_path = cli.out.join("manifest.json");
    match serde_json::to_string_pretty(&manifest) {
        Ok(json) => {
            if let Err(e) = std::fs::write(&manifest_path, json) {
                eprintln!("error: cannot write manifest: {e}");
                return EXIT_VALIDATION.max(code);
            }
        }
        Err(e) => {
            eprintln!("error: cannot serialize manifest: {e}");
            return EXIT_VALIDATION.max(code);
        }
    }
    code
}

fn model_of(config: &RunConfig) -> Result<Model, CliError> {
    match config.model.as_str() {
        "free" => Ok(Model::Free),
        "harmonic" => Ok(Model::Harmonic),
        other => Err(CliError::Validation(format!("unknown model `{other}`"))),
    }
}

fn tolerance_of(cli: &Cli, config: &RunConfig, default: f64) -> f64 {
    cli.tolerance.or(config.tolerance).unwrap_or(default)
}

fn need<T: Clone>(field: &Option<T>, name: &str) -> Result<T, CliError> {
    field
        .clone()
        .ok_or_else(|| CliError::Validation(format!("config field `{name}` is required")))
}

/// Exact rational from the f64 the JSON parser produced (binary floats
/// are exact rationals, so classification stays an exact identity).
fn exact(x: f64) -> Result<CRat, CliError> {
    let r: Rat = Ratio::<BigInt>::from_float(x)
        .ok_or_else(|| CliError::Validation(format!("non-finite matrix entry {x}")))?;
    Ok(CRat::new(r, Ratio::from_integer(BigInt::from(0))))
}

fn load_matrix(path: &Path, params: &ModelParams) -> Result<(QuadraticForm, Polynomial), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read matrix {}: {e}", path.display())))?;
    let rows: Vec<Vec<f64>> = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("matrix must be a 3x3 JSON array: {e}")))?;
    if rows.len() != 3 || rows.iter().any(|r| r.len() != 3) {
        return Err(CliError::Validation("matrix must be 3x3".into()));
    }
    let mut q = QuadraticForm::zero();
    for (j, row) in rows.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            q.a[j][k] = Polynomial::constant(exact(v)?);
        }
    }
    Ok((q, Polynomial::constant(exact(params.d)?)))
}

fn write_and_track(
    ledger: &mut Ledger,
    path: &Path,
    write: impl FnOnce(&Path) -> Result<(), geomcst::NumericError>,
) -> Result<(), CliError> {
    write(path)?;
    ledger.output(path)
}

fn load_psi(
    config: &RunConfig,
    params: &ModelParams,
    ledger: &mut Ledger,
) -> Result<WaveFunction1D, CliError> {
    match &config.input_psi {
        Some(path) => {
            ledger.input(path)?;
            Ok(geomcst::io::read_wavefunction_csv(path)?)
        }
        None => {
            let grid = need(&config.grid1d, "grid1d")?.build()?;
            Ok(fiducial(params, grid)?)
        }
    }
}

fn dispatch(cli: &Cli, config: &RunConfig, ledger: &mut Ledger) -> Result<(), CliError> {
    let params = &config.params;
    params.validate()?;
    match config.command.as_str() {
        "classify" => {
            let path = need(&config.matrix, "matrix")?;
            ledger.input(&path)?;
            let (q, d) = load_matrix(&path, params)?;
            let cls = classify(&q, &d);
            println!("geometrisable: {}", cls.geometrisable);
            for v in &cls.violations {
                println!("violated: {} (residual {})", v.constraint, v.residual);
            }
            let report = serde_json::json!({
                "geometrisable": cls.geometrisable,
                "violations": cls.violations.iter()
                    .map(|v| format!("{} (residual {})", v.constraint, v.residual))
                    .collect::<Vec<_>>(),
            });
            let out = cli.out.join("classification.json");
            std::fs::write(&out, serde_json::to_string_pretty(&report).unwrap())
                .map_err(|e| CliError::Validation(format!("write: {e}")))?;
            ledger.output(&out)
        }
        "reduce" => {
            let path = need(&config.matrix, "matrix")?;
            ledger.input(&path)?;
            let (q, d) = load_matrix(&path, params)?;
            let cls = classify(&q, &d);
            if !cls.geometrisable {
                return Err(CliError::Validation(format!(
                    "matrix is not geometrisable; violated: {}",
                    cls.violations
                        .iter()
                        .map(|v| format!("{} (residual {})", v.constraint, v.residual))
                        .collect::<Vec<_>>()
                        .join("; ")
                )));
            }
            // The multiplier coefficients carry formal D and E; the
            // second-order cancellation for a numeric matrix happens
            // once those are bound to the exact parameter values.
            let mut bind = std::collections::BTreeMap::new();
            bind.insert(geomcst::symalg::Sym::D, exact(params.d)?);
            bind.insert(geomcst::symalg::Sym::E, exact(params.e)?);
            let raw = geomcst::reduction::reduce_unchecked(&q);
            let op = raw
                .op
                .substitute(&bind)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            if op.order() > 1 {
                return Err(CliError::Validation(format!(
                    "reduction left order {} terms",
                    op.order()
                )));
            }
            let coeff = |p: &Polynomial| -> String {
                p.substitute(&bind)
                    .map(|r| r.to_string())
                    .unwrap_or_else(|_| p.to_string())
            };
            println!("reduced order: {}", op.order());
            let report = serde_json::json!({
                "order": op.order(),
                "coefficients": {
                    "A": coeff(&raw.coeffs.a),
                    "B": coeff(&raw.coeffs.b),
                    "C": coeff(&raw.coeffs.c),
                    "F": coeff(&raw.coeffs.f),
                    "K": coeff(&raw.coeffs.k),
                },
                "operator": op.terms()
                    .map(|(idx, p)| format!("d^{idx:?}: {p}"))
                    .collect::<Vec<_>>(),
            });
            let out = cli.out.join("reduced.json");
            std::fs::write(&out, serde_json::to_string_pretty(&report).unwrap())
                .map_err(|e| CliError::Validation(format!("write: {e}")))?;
            ledger.output(&out)
        }
        "fiducial" => {
            let grid = need(&config.grid1d, "grid1d")?.build()?;
            let phi = fiducial(params, grid)?;
            write_and_track(ledger, &cli.out.join("fiducial.csv"), |p| {
                geomcst::io::write_wavefunction_csv(p, &phi, params)
            })?;
            let ys: Vec<f64> = grid.points().collect();
            let mags: Vec<f64> = phi.values.iter().map(|v| v.norm()).collect();
            write_and_track(ledger, &cli.out.join("fiducial_abs.svg"), |p| {
                geomcst::io::write_svg_lines(p, &ys, &[("|phi|", &mags)])
            })
        }
        "transform" => {
            let f = load_psi(config, params, ledger)?;
            let phi = fiducial(params, f.grid)?;
            let out_grid = need(&config.grid3d, "grid3d")?.build()?;
            let field = icst(&f, &phi, out_grid, params)?;
            emit_field(cli, ledger, &field, params)
        }
        "verify" => {
            let f = load_psi(config, params, ledger)?;
            let phi = fiducial(params, f.grid)?;
            let spec3 = need(&config.grid3d, "grid3d")?;
            let levels = config.levels.clone().unwrap_or_else(|| vec![spec3.n[0]]);
            let margin = config.margin.unwrap_or(2);
            // Default 1e-2: one refinement below the coarsest level of
            // the acceptance convergence study.
            let tol = tolerance_of(cli, config, 1e-2);
            let c_op = analytic_operator();
            let s_op = structural_operator();
            let mut table = Vec::new();
            for &n in &levels {
                let g = Grid3Spec {
                    origin: spec3.origin,
                    step: [
                        spec3.step[0] * (spec3.n[0] - 1) as f64 / (n - 1) as f64,
                        spec3.step[1] * (spec3.n[1] - 1) as f64 / (n - 1) as f64,
                        spec3.step[2] * (spec3.n[2] - 1) as f64 / (n - 1) as f64,
                    ],
                    n: [n, n, n],
                }
                .build()?;
                let field = icst(&f, &phi, g, params)?;
                let rc = annihilation_residual(&c_op, &field, params, margin)?;
                let rs = annihilation_residual(&s_op, &field, params, margin)?;
                println!("level n={n}: C-residual {rc:.6e}  S-residual {rs:.6e}");
                table.push((n, rc, rs));
            }
            for w in table.windows(2) {
                println!(
                    "ratio {} -> {}: C {:.2}  S {:.2}",
                    w[0].0,
                    w[1].0,
                    w[0].1 / w[1].1,
                    w[0].2 / w[1].2
                );
            }
            let (_, rc, rs) = *table.last().unwrap();
            let report = serde_json::json!({
                "levels": table.iter()
                    .map(|(n, rc, rs)| serde_json::json!({"n": n, "c": rc, "s": rs}))
                    .collect::<Vec<_>>(),
                "tolerance": tol,
            });
            let out = cli.out.join("verify.json");
            std::fs::write(&out, serde_json::to_string_pretty(&report).unwrap())
                .map_err(|e| CliError::Validation(format!("write: {e}")))?;
            ledger.output(&out)?;
            if rc > tol || rs > tol {
                return Err(CliError::Contract(format!(
                    "residuals C {rc:.3e} / S {rs:.3e} exceed tolerance {tol:.3e}"
                )));
            }
            Ok(())
        }
        "evolve" => {
            let model = model_of(config)?;
            let density_path = need(&config.density, "density")?;
            ledger.input(&density_path)?;
            let density = geomcst::io::read_density_csv(&density_path)?;
            let out_grid = need(&config.grid3d, "grid3d")?.build()?;
            let t = need(&config.t, "t")?;
            let dt = config.dt.unwrap_or(0.001);
            let margin = config.margin.unwrap_or(2);
            // Default 0.05: above the coarse-grid acceptance level,
            // below every wrong-convention control.
            let tol = tolerance_of(cli, config, 0.05);
            let field = reconstruct_field(t, out_grid, model, &density, params)?;
            emit_field(cli, ledger, &field, params)?;
            let residual =
                schrodinger_residual(model, &density, params, out_grid, t, dt, margin)?;
            println!("schrodinger residual at t={t}: {residual:.6e}");
            if residual > tol {
                return Err(CliError::Contract(format!(
                    "evolution residual {residual:.3e} exceeds tolerance {tol:.3e}"
                )));
            }
            Ok(())
        }
        "oracle" => {
            let model = model_of(config)?;
            let psi0 = load_psi(config, params, ledger)?;
            let t_end = need(&config.t_end, "t_end")?;
            let dt = config.dt.unwrap_or(0.001);
            let snapshots = config.snapshots.clone().unwrap_or_default();
            let sample_every = ((t_end / dt / 200.0).ceil() as usize).max(1);
            let mut rows = Vec::new();
            let steps = (t_end / dt).round() as usize;
            let mut psi = psi0.clone();
            rows.push((0.0, psi.norm(), energy_expectation(&psi, model, params)));
            for k in 1..=steps {
                psi = cn_propagate(&psi, model, params, dt, dt)?;
                if k % sample_every == 0 || k == steps {
                    let t = k as f64 * dt;
                    rows.push((t, psi.norm(), energy_expectation(&psi, model, params)));
                }
            }
            write_and_track(ledger, &cli.out.join("trajectory.csv"), |p| {
                geomcst::io::write_trajectory_csv(p, &rows)
            })?;
            for (k, &ts) in snapshots.iter().enumerate() {
                let snap = cn_propagate(&psi0, model, params, ts, dt)?;
                write_and_track(ledger, &cli.out.join(format!("snapshot_{k}.csv")), |p| {
                    geomcst::io::write_wavefunction_csv(p, &snap, params)
                })?;
            }
            Ok(())
        }
        "compare" => {
            let a = need(&config.compare_a, "compare_a")?;
            let b = need(&config.compare_b, "compare_b")?;
            // Default 1e-9: the determinism contract, far below any
            // discretization level.
            let tol = tolerance_of(cli, config, 1e-9);
            let kind = config
                .compare_kind
                .clone()
                .unwrap_or_else(|| "wavefunction".into());
            let diff = match kind.as_str() {
                "wavefunction" => {
                    ledger.input(&a)?;
                    ledger.input(&b)?;
                    let fa = geomcst::io::read_wavefunction_csv(&a)?;
                    let fb = geomcst::io::read_wavefunction_csv(&b)?;
                    rel_l2(&fa.values, &fb.values)?
                }
                "field" => {
                    for base in [&a, &b] {
                        ledger.input(&base.with_extension("json"))?;
                        ledger.input(&base.with_extension("f64"))?;
                    }
                    let (fa, _) = geomcst::io::read_field_binary(&a)?;
                    let (fb, _) = geomcst::io::read_field_binary(&b)?;
                    rel_l2(&fa.values, &fb.values)?
                }
                other => {
                    return Err(CliError::Validation(format!(
                        "unknown compare_kind `{other}`"
                    )))
                }
            };
            println!("relative L2 difference: {diff:.6e}");
            if diff > tol {
                return Err(CliError::Contract(format!(
                    "difference {diff:.3e} exceeds tolerance {tol:.3e}"
                )));
            }
            Ok(())
        }
        "orbits" => {
            let model = model_of(config)?;
            let initials = need(&config.initials, "initials")?;
            let t_end = need(&config.t_end, "t_end")?;
            let dt = config.dt.unwrap_or(0.001);
            let mut all_q = Vec::new();
            let mut all_p = Vec::new();
            for (k, &[q, p]) in initials.iter().enumerate() {
                let orbit = classical_orbit(
                    PhasePoint { q, p, t: 0.0 },
                    model,
                    params,
                    t_end,
                    dt,
                );
                write_and_track(ledger, &cli.out.join(format!("orbit_{k}.csv")), |path| {
                    geomcst::io::write_orbit_csv(path, &orbit)
                })?;
                all_q.push(orbit.iter().map(|pt| pt.q).collect::<Vec<f64>>());
                all_p.push(orbit.iter().map(|pt| pt.p).collect::<Vec<f64>>());
            }
            // phase-space figure: p against q per initial condition
            if let Some(first_q) = all_q.first() {
                let series: Vec<(String, &[f64])> = all_p
                    .iter()
                    .enumerate()
                    .map(|(k, p)| (format!("orbit {k}"), p.as_slice()))
                    .collect();
                let named: Vec<(&str, &[f64])> =
                    series.iter().map(|(n, s)| (n.as_str(), *s)).collect();
                write_and_track(ledger, &cli.out.join("orbits.svg"), |path| {
                    geomcst::io::write_svg_lines(path, first_q, &named)
                })?;
            }
            Ok(())
        }
        "interference" => {
            let grid = need(&config.grid1d, "grid1d")?.build()?;
            let delta = need(&config.delta, "delta")?;
            let profile = interference_profile(delta, grid, params);
            let ys: Vec<f64> = grid.points().collect();
            write_and_track(ledger, &cli.out.join("interference.csv"), |p| {
                geomcst::io::write_columns_csv(p, &["y", "profile"], &[ys.clone(), profile.clone()])
            })?;
            write_and_track(ledger, &cli.out.join("interference.svg"), |p| {
                geomcst::io::write_svg_lines(p, &ys, &[("profile", &profile)])
            })
        }
        other => Err(CliError::Validation(format!("unknown command `{other}`"))),
    }
}

fn rel_l2(a: &[Complex64], b: &[Complex64]) -> Result<f64, CliError> {
    if a.len() != b.len() {
        return Err(CliError::Validation(format!(
            "operand sizes differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let norm: f64 = a.iter().map(|x| x.norm_sqr()).sum();
    if norm == 0.0 {
        return Ok(diff.sqrt());
    }
    Ok((diff / norm).sqrt())
}

fn emit_field(
    cli: &Cli,
    ledger: &mut Ledger,
    field: &geomcst::grid::Field3D,
    params: &ModelParams,
) -> Result<(), CliError> {
    if cli.format == "csv" {
        write_and_track(ledger, &cli.out.join("field.csv"), |p| {
            geomcst::io::write_field_csv(p, field, params)
        })
    } else {
        let base = cli.out.join("field");
        geomcst::io::write_field_binary(&base, field, params)?;
        ledger.output(&base.with_extension("json"))?;
        ledger.output(&base.with_extension("f64"))
    }
}
