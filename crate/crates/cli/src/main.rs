use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{CommandFactory, Parser, Subcommand};
use nldir::assembly::{assemble, PenaltySpec, PenaltyVariant, WMass};
use nldir::field::BoundaryData;
use nldir::format::{human, machine};
use nldir::geometry::{build_mesh, DomainMesh};
use nldir::kernel::{normalize_w, sigma_r, validate_kernel, KernelSpec};
use nldir::minimize::{solve_p_energy, solve_quadratic};
use nldir::spectra::{solve_eigen, EigenProblem, MassModel};
use nldir::study::{self, EigenStudy, StudyConfig, StudyReport};
use nldir::{Error, Result};

/// Nonlocal Dirichlet energies: kernels, solves, spectra and δ-sweeps.
#[derive(Parser, Debug)]
#[command(name = "nldir", version, arg_required_else_help = true)]
struct Cli {
    /// Study configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output path; overrides the configured CSV path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads [default: available parallelism].
    #[arg(long, global = true, env = "NLDIR_THREADS")]
    threads: Option<usize>,
    /// Seed for random starts and probes; overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print σ_R = ∫ R(|z|²) |z₁|^p dz.
    Sigma {
        #[arg(long)]
        kernel: String,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        dim: usize,
    },
    /// Check a kernel against the admissibility conditions.
    ValidateKernel {
        #[arg(long)]
        kernel: String,
        #[arg(long, default_value_t = 1025)]
        samples: usize,
    },
    /// Minimize the energy at one horizon.
    Solve {
        /// Horizon [default: the last configured δ].
        #[arg(long)]
        delta: Option<f64>,
        /// Boundary datum id or `csv:<path>` [default: the configured case].
        #[arg(long)]
        data: Option<String>,
    },
    /// Lowest eigenpairs of the zero-data operator at one horizon.
    Eigen {
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        modes: Option<usize>,
        /// `l2` or `nonlocal_w`.
        #[arg(long)]
        mass: Option<String>,
    },
    /// Run the configured δ-sweep.
    Sweep,
    /// Run the sweep once per penalty variant and compare minimizers.
    Compare {
        #[arg(long, value_delimiter = ',', required = true)]
        variants: Vec<String>,
    },
    /// Probe the zero-data penalty for coercivity with random fields.
    ProbeCoercivity {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long)]
        delta: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(n) = cli.threads.filter(|&n| n > 0) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the worker pool: {e}");
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let report = serde_json::json!({ "kind": e.kind(), "message": e.to_string() });
            eprintln!("{report}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Sigma { kernel, p, dim } => sigma(cli, kernel, *p, *dim),
        Command::ValidateKernel { kernel, samples } => validate(cli, kernel, *samples),
        Command::Solve { delta, data } => solve(cli, *delta, data.as_deref()),
        Command::Eigen { delta, modes, mass } => eigen(cli, *delta, *modes, mass.as_deref()),
        Command::Sweep => sweep(cli),
        Command::Compare { variants } => compare(cli, variants),
        Command::ProbeCoercivity { trials, delta } => probe(cli, *trials, *delta),
    }
}

/// Exits with a usage error when a subcommand needs `--config`.
fn config(cli: &Cli) -> Result<StudyConfig> {
    let Some(path) = &cli.config else {
        Cli::command().error(clap::error::ErrorKind::MissingRequiredArgument, "this subcommand needs --config <PATH>").exit()
    };
    let mut cfg = StudyConfig::from_path(path)?;
    if let Some(s) = cli.seed {
        cfg.solver.seed = s;
        if let Some(e) = cfg.eigen.as_mut() {
            e.options.seed = s;
        }
    }
    Ok(cfg)
}

fn horizon(cfg: &StudyConfig, delta: Option<f64>) -> f64 {
    delta.unwrap_or_else(|| *cfg.deltas.last().expect("validated config has a horizon"))
}

fn mesh_for(cfg: &StudyConfig, delta: f64) -> Result<Arc<DomainMesh>> {
    Ok(Arc::new(build_mesh(&cfg.shape, delta / cfg.ratio)?))
}

fn penalty_spec(cfg: &StudyConfig) -> Result<PenaltySpec> {
    Ok(PenaltySpec::new(cfg.penalty.variant, KernelSpec::from_id(&cfg.kernels.k)?)
        .with_shi_delta_power(cfg.penalty.shi_delta_power))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.to_owned(), source })
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|source| Error::Csv { path: path.to_owned(), source })
}

fn csv_row(w: &mut csv::Writer<std::fs::File>, path: &Path, row: &[String]) -> Result<()> {
    w.write_record(row).map_err(|source| Error::Csv { path: path.to_owned(), source })
}

fn sigma(cli: &Cli, kernel: &str, p: f64, dim: usize) -> Result<()> {
    let k = KernelSpec::from_id(kernel)?;
    let q = sigma_r(&k, p, dim)?;
    log::info!("{} points per axis, error estimate {:e}", q.points_per_axis, q.abs_error);
    println!("{}", human(q.value));
    if let Some(out) = &cli.out {
        let doc = serde_json::json!({
            "kernel": k.label(), "p": p, "dim": dim, "sigma_r": q.value, "abs_error": q.abs_error,
        });
        write_file(out, &serde_json::to_string_pretty(&doc)?)?;
    }
    Ok(())
}

fn validate(cli: &Cli, kernel: &str, samples: usize) -> Result<()> {
    let k = KernelSpec::from_id(kernel)?;
    let report = validate_kernel(&k, samples)?;
    for c in &report.checks {
        match c.first_violation {
            None => println!("{}: ok", c.condition),
            Some(s) => println!("{}: FAILED at s = {} ({})", c.condition, human(s), c.detail),
        }
    }
    if let Some(out) = &cli.out {
        write_file(out, &serde_json::to_string_pretty(&report)?)?;
    }
    report.into_result().map(|_| ())
}

fn solve(cli: &Cli, delta: Option<f64>, data: Option<&str>) -> Result<()> {
    let cfg = config(cli)?;
    let delta = horizon(&cfg, delta);
    let mesh = mesh_for(&cfg, delta)?;
    let case = study::manufactured_case(&cfg.case)?;
    let a = match data {
        Some(id) => BoundaryData::from_id(id, &mesh)?,
        None => case.datum(&mesh),
    };
    let r = KernelSpec::from_id(&cfg.kernels.r)?;
    let op = assemble(&mesh, &r, &penalty_spec(&cfg)?, delta, cfg.p, &a)?;
    let res = if op.is_quadratic() { solve_quadratic(&op, &cfg.solver)? } else { solve_p_energy(&op, &cfg.solver)? };
    println!("nodes       {}", mesh.len());
    println!("energy      {}", human(res.energy));
    println!("grad norm   {}", human(res.gradient_norm));
    println!("iterations  {} ({:?})", res.iterations, res.stop);
    if data.is_none() {
        println!("l2 error    {}", human(res.minimizer.l2_distance(&case.solution(&mesh), mesh.weights())));
    }
    if let Some(out) = &cli.out {
        let mut w = csv_writer(out)?;
        csv_row(&mut w, out, &["x".into(), "y".into(), "u".into()])?;
        for (x, u) in mesh.positions().iter().zip(res.minimizer.values()) {
            csv_row(&mut w, out, &[machine(x[0]), machine(x[1]), machine(*u)])?;
        }
        w.flush().map_err(|source| Error::Io { path: out.clone(), source })?;
    }
    Ok(())
}

fn eigen(cli: &Cli, delta: Option<f64>, modes: Option<usize>, mass: Option<&str>) -> Result<()> {
    let cfg = config(cli)?;
    let mut spec = cfg.eigen.clone().unwrap_or_default();
    if let Some(k) = modes {
        spec.modes = k;
    }
    if let Some(m) = mass {
        spec.mass = match m {
            "l2" => MassModel::L2,
            "nonlocal_w" => MassModel::NonlocalW,
            other => {
                return Err(Error::UnknownId { what: "mass model", id: other.into(), catalog: "l2, nonlocal_w".into() })
            }
        };
    }
    if let Some(s) = cli.seed {
        spec.options.seed = s;
    }
    let EigenStudy { modes, mass, options } = spec;
    let delta = horizon(&cfg, delta);
    let mesh = mesh_for(&cfg, delta)?;
    let r = KernelSpec::from_id(&cfg.kernels.r)?;
    let op = assemble(&mesh, &r, &penalty_spec(&cfg)?, delta, 2.0, &BoundaryData::zeros(&mesh))?;
    let prob = match mass {
        MassModel::L2 => EigenProblem::l2(&op, modes)?,
        MassModel::NonlocalW => {
            let (w, _) = normalize_w(&KernelSpec::from_id(&cfg.kernels.w)?, mesh.dim())?;
            EigenProblem::nonlocal_w(&op, WMass::new(&mesh, &w, delta), modes)?
        }
    };
    let res = solve_eigen(&prob, &options)?;
    let sigma = sigma_r(&r, 2.0, mesh.dim())?.value;
    println!("{:>4}  {:>14}  {:>14}  {:>12}", "mode", "lambda", "lambda/sigma", "residual");
    for (i, (l, res)) in res.eigenvalues.iter().zip(&res.residuals).enumerate() {
        println!("{:>4}  {:>14}  {:>14}  {:>12}", i + 1, human(*l), human(l / sigma), human(*res));
    }
    if !res.all_converged() {
        log::warn!("some modes did not reach the residual target");
    }
    if let Some(out) = &cli.out {
        let mut w = csv_writer(out)?;
        let header = ["mode", "lambda", "residual", "mass_model", "delta", "h"].map(String::from);
        csv_row(&mut w, out, &header)?;
        for (i, (l, r)) in res.eigenvalues.iter().zip(&res.residuals).enumerate() {
            let row = [(i + 1).to_string(), machine(*l), machine(*r), mass.id().into(), machine(delta), machine(mesh.h())];
            csv_row(&mut w, out, &row)?;
        }
        w.flush().map_err(|source| Error::Io { path: out.clone(), source })?;
    }
    Ok(())
}

fn print_rows(report: &StudyReport) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{:>10} {:>10} {:>8} {:>12} {:>12} {:>12} {:>9}", "delta", "h", "penalty", "l2_error", "trace_norm", "energy", "seconds");
    for r in &report.rows {
        if let Some(f) = &r.failure {
            let _ = writeln!(out, "{:>10} {:>10} {:>8} failed: {f}", human(r.delta), human(r.h), r.penalty.id());
            continue;
        }
        let _ = writeln!(
            out,
            "{:>10} {:>10} {:>8} {:>12} {:>12} {:>12} {:>9}",
            human(r.delta),
            human(r.h),
            r.penalty.id(),
            human(r.l2_error),
            human(r.trace_norm),
            human(r.energy),
            human(r.seconds)
        );
    }
}

fn sweep(cli: &Cli) -> Result<()> {
    let mut cfg = config(cli)?;
    if let Some(out) = &cli.out {
        cfg.output.csv = Some(out.clone());
    }
    let report = study::run_delta_sweep(&cfg)?;
    print_rows(&report);
    report.write_outputs(&cfg.output)
}

fn compare(cli: &Cli, variants: &[String]) -> Result<()> {
    let mut cfg = config(cli)?;
    if let Some(out) = &cli.out {
        cfg.output.csv = Some(out.clone());
    }
    let variants = variants.iter().map(|v| PenaltyVariant::from_id(v.trim())).collect::<Result<Vec<_>>>()?;
    let cmp = study::compare_penalties(&cfg, &variants)?;
    print_rows(&cmp.report);
    for pair in &cmp.pairs {
        let dists: Vec<String> = pair.l2.iter().map(|d| human(*d)).collect();
        println!("{} vs {}: l2 distance {}", pair.a, pair.b, dists.join(", "));
    }
    if let Some(p) = &cfg.output.csv {
        cmp.report.write_csv(p)?;
    }
    if let Some(p) = &cfg.output.json {
        write_file(p, &serde_json::to_string_pretty(&cmp)?)?;
    }
    Ok(())
}

fn probe(cli: &Cli, trials: usize, delta: Option<f64>) -> Result<()> {
    let cfg = config(cli)?;
    let delta = horizon(&cfg, delta);
    let mesh = mesh_for(&cfg, delta)?;
    let r = KernelSpec::from_id(&cfg.kernels.r)?;
    let khat = KernelSpec::from_id(cfg.kernels.khat.as_deref().unwrap_or(&cfg.kernels.k))?;
    let seed = cli.seed.unwrap_or(cfg.solver.seed);
    let rep = study::coercivity_probe(&mesh, &r, &penalty_spec(&cfg)?, &khat, delta, trials, seed)?;
    println!("variant          {}", rep.variant);
    println!("trials           {} ({} skipped)", rep.trials, rep.skipped);
    println!("min ratio        {}", human(rep.min_ratio));
    println!("empirical C_n    {}  (/delta^{} = {})", human(rep.empirical_cn), rep.delta_power, human(rep.empirical_scaled));
    match rep.certified_cn {
        Some(c) => println!("certified C_n    {}  ({} violations)", human(c), rep.violations),
        None => println!("certified C_n    none for this kernel pair"),
    }
    if let Some(out) = &cli.out {
        write_file(out, &serde_json::to_string_pretty(&rep)?)?;
    }
    if rep.coercive() {
        Ok(())
    } else {
        Err(Error::Incompatible(format!("penalty vanishes on a probe with nonzero trace (min ratio {})", rep.min_ratio)))
    }
}
