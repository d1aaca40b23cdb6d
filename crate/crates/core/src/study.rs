//! δ-sweeps against manufactured solutions, coercivity probes and penalty
//! comparisons.
//!
//! The manufactured catalog is this crate's own choice of test problems;
//! reports say so in their stamp.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::{assemble, EnergyOperator, Mollifier, PenaltySpec, PenaltyVariant, WMass};
use crate::error::{Error, Result};
use crate::field::{BoundaryData, Field, NamedFunction};
use crate::format::machine;
use crate::geometry::{build_mesh, DomainMesh, Point, Shape};
use crate::kernel::{normalize_w, sigma_r, KernelSpec};
use crate::minimize::{solve_p_energy, solve_quadratic, SolveOptions};
use crate::spectra::{local_dirichlet_eigenvalues, solve_eigen, EigenOptions, EigenProblem, MassModel};

/// Header of the sweep CSV.
pub const CSV_HEADER: [&str; 9] = ["delta", "h", "penalty", "p", "l2_error", "trace_norm", "energy", "sigma_r", "seconds"];

const CATALOG_NOTE: &str = "manufactured cases are an artifact-chosen catalog, not canonical benchmarks";

/// Boundary datum `a` together with the exact local solution `u*`, which
/// here is the same function.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ManufacturedCase {
    pub id: &'static str,
    pub function: NamedFunction,
    /// Admissible dimensions.
    pub dims: &'static [usize],
    /// `None` when every `p > 1` is admissible.
    pub p: Option<f64>,
}

const CASES: [ManufacturedCase; 4] = [
    ManufacturedCase { id: "linear_x", function: NamedFunction::LinearX, dims: &[1, 2], p: None },
    ManufacturedCase { id: "harmonic_x2_minus_y2", function: NamedFunction::HarmonicX2MinusY2, dims: &[2], p: Some(2.0) },
    ManufacturedCase { id: "harmonic_xy", function: NamedFunction::HarmonicXy, dims: &[2], p: Some(2.0) },
    ManufacturedCase { id: "zero", function: NamedFunction::Zero, dims: &[1, 2], p: None },
];

/// Looks up a catalog entry and checks that `u*` solves the local problem.
pub fn manufactured_case(id: &str) -> Result<ManufacturedCase> {
    let case = CASES.iter().find(|c| c.id == id).cloned().ok_or_else(|| Error::UnknownId {
        what: "manufactured case",
        id: id.to_owned(),
        catalog: CASES.iter().map(|c| c.id).collect::<Vec<_>>().join(", "),
    })?;
    let probes: [Point; 4] = [[0.1, 0.2], [0.5, 0.5], [0.9, 0.3], [0.37, 0.81]];
    for p in case.p.map_or(vec![1.5, 2.0, 3.0, 4.0], |p| vec![p]) {
        for x in probes {
            let r = case.pde_residual(x, p);
            assert!(r.abs() < 1e-12, "catalog entry {} fails the p-Laplace equation at {x:?}: {r}", case.id);
        }
    }
    Ok(case)
}

impl ManufacturedCase {
    pub fn catalog() -> impl Iterator<Item = &'static str> {
        CASES.iter().map(|c| c.id)
    }

    /// `div(|∇u|^(p−2) ∇u)` at `x`, exact for the at most quadratic catalog
    /// functions: `|g|^(p−2) tr H + (p−2) |g|^(p−4) gᵀHg`.
    pub fn pde_residual(&self, x: Point, p: f64) -> f64 {
        let g = self.function.gradient(x);
        let h = self.function.hessian();
        let tr = h[0][0] + h[1][1];
        let ghg = g[0] * (h[0][0] * g[0] + h[0][1] * g[1]) + g[1] * (h[1][0] * g[0] + h[1][1] * g[1]);
        let s = g[0].hypot(g[1]);
        if s == 0.0 {
            return if tr == 0.0 && ghg == 0.0 { 0.0 } else { f64::NAN };
        }
        s.powf(p - 2.0) * tr + (p - 2.0) * s.powf(p - 4.0) * ghg
    }

    pub fn datum(&self, mesh: &DomainMesh) -> BoundaryData {
        BoundaryData::sample(mesh, |x| self.function.eval(x))
    }

    pub fn solution(&self, mesh: &DomainMesh) -> Field {
        Field::sample(mesh, |x| self.function.eval(x))
    }

    /// `Σ q_i |∇u*(x_i)|^p`, the mesh quadrature of the local energy.
    pub fn local_energy(&self, mesh: &DomainMesh, p: f64) -> f64 {
        mesh.positions()
            .iter()
            .zip(mesh.weights())
            .map(|(&x, q)| {
                let g = self.function.gradient(x);
                let g = if mesh.dim() == 1 { g[0].abs() } else { g[0].hypot(g[1]) };
                q * g.powf(p)
            })
            .sum()
    }

    pub fn check_compatible(&self, shape: &Shape, p: f64) -> Result<()> {
        if !self.dims.contains(&shape.dim()) {
            return Err(Error::Incompatible(format!("case {} is not defined in dimension {}", self.id, shape.dim())));
        }
        if let Some(q) = self.p {
            if q != p {
                return Err(Error::Incompatible(format!("case {} solves the problem for p = {q} only, got p = {p}", self.id)));
            }
        }
        Ok(())
    }
}

/// Kernel ids, resolved with [`KernelSpec::from_id`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelIds {
    /// Interior kernel.
    pub r: String,
    /// Penalty kernel.
    pub k: String,
    /// Mass kernel, normalized to unit mass before use.
    pub w: String,
    /// Mollifier kernel for trace norms; defaults to `k`.
    pub khat: Option<String>,
}

impl Default for KernelIds {
    fn default() -> Self {
        KernelIds { r: "quartic".into(), k: "quartic".into(), w: "wendland".into(), khat: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PenaltyConfig {
    pub variant: PenaltyVariant,
    pub shi_delta_power: i32,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        PenaltyConfig { variant: PenaltyVariant::Product, shi_delta_power: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigenStudy {
    pub modes: usize,
    pub mass: MassModel,
    pub options: EigenOptions,
}

impl Default for EigenStudy {
    fn default() -> Self {
        EigenStudy { modes: 1, mass: MassModel::L2, options: EigenOptions::default() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

fn default_p() -> f64 {
    2.0
}

fn default_ratio() -> f64 {
    4.0
}

/// A δ-sweep, read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub shape: Shape,
    #[serde(default)]
    pub kernels: KernelIds,
    #[serde(default)]
    pub penalty: PenaltyConfig,
    #[serde(default = "default_p")]
    pub p: f64,
    /// Manufactured case id.
    pub case: String,
    /// Strictly decreasing horizons.
    pub deltas: Vec<f64>,
    /// `δ/h`, at least 2.
    #[serde(default = "default_ratio")]
    pub ratio: f64,
    #[serde(default)]
    pub solver: SolveOptions,
    /// Eigenvalues of the zero-data operator, if present.
    #[serde(default)]
    pub eigen: Option<EigenStudy>,
    #[serde(default)]
    pub output: OutputPaths,
}

impl StudyConfig {
    pub fn new(shape: Shape, case: &str, deltas: Vec<f64>) -> Self {
        StudyConfig {
            shape,
            kernels: KernelIds::default(),
            penalty: PenaltyConfig::default(),
            p: 2.0,
            case: case.to_owned(),
            deltas,
            ratio: 4.0,
            solver: SolveOptions::default(),
            eigen: None,
            output: OutputPaths::default(),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: StudyConfig = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_owned(), source })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: String| Err(Error::InvalidArgument { name, reason });
        if self.deltas.is_empty() {
            return bad("deltas", "at least one horizon is required".into());
        }
        if self.deltas.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
            return bad("deltas", format!("horizons must be positive, got {:?}", self.deltas));
        }
        if self.deltas.windows(2).any(|w| w[1] >= w[0]) {
            return bad("deltas", format!("must be strictly decreasing, got {:?}", self.deltas));
        }
        if !(self.ratio >= 2.0 && self.ratio.is_finite()) {
            return bad("ratio", format!("delta/h must be at least 2, got {}", self.ratio));
        }
        if !(self.p > 1.0 && self.p.is_finite()) {
            return bad("p", format!("exponent must exceed 1, got {}", self.p));
        }
        if let Some(e) = &self.eigen {
            if e.modes == 0 {
                return bad("eigen.modes", "must be at least 1".into());
            }
            if self.p != 2.0 {
                return Err(Error::Incompatible("eigenvalues need p = 2".into()));
            }
        }
        self.solver.validate()?;
        let case = manufactured_case(&self.case)?;
        case.check_compatible(&self.shape, self.p)?;
        let variant = self.penalty.variant;
        if variant.quadratic_only() && self.p != 2.0 {
            return Err(Error::PenaltyContract { variant: variant.id(), reason: format!("is defined for p = 2 only, got p = {}", self.p) });
        }
        if variant.zero_data_only() && case.function != NamedFunction::Zero {
            return Err(Error::PenaltyContract { variant: variant.id(), reason: format!("requires zero boundary data, case is {}", case.id) });
        }
        Ok(())
    }

    fn penalty_spec(&self, k: KernelSpec) -> PenaltySpec {
        PenaltySpec::new(self.penalty.variant, k).with_shi_delta_power(self.penalty.shi_delta_power)
    }
}

/// Provenance recorded alongside every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stamp {
    pub version: String,
    pub kernels: KernelIds,
    pub seed: u64,
    pub case: String,
    pub note: String,
}

/// One δ of a sweep. Failed rows carry `failure` and NaN measurements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub delta: f64,
    pub h: f64,
    pub penalty: PenaltyVariant,
    pub p: f64,
    pub nodes: usize,
    /// Weighted L² distance from the minimizer to `u*`.
    pub l2_error: f64,
    /// `‖ũ − a‖` on the boundary nodes, `ũ` mollified with `K̂`.
    pub trace_norm: f64,
    pub energy: f64,
    pub sigma_r: f64,
    /// `energy / (σ_R Σ q|∇u*|^p)`, absent when `u*` is constant.
    pub energy_ratio: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub eigenvalues: Option<Vec<f64>>,
    /// `|λ_i/σ_R − λ_i*| / λ_i*` against the local Dirichlet spectrum.
    pub eigen_errors: Option<Vec<f64>>,
    pub seconds: f64,
    pub failure: Option<String>,
}

impl StudyRow {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub rows: Vec<StudyRow>,
    pub stamp: Stamp,
}

impl StudyReport {
    pub fn l2_errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.l2_error).collect()
    }

    pub fn trace_norms(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.trace_norm).collect()
    }

    /// Observed orders `log(e_i/e_{i+1}) / log(δ_i/δ_{i+1})` of the L² error.
    /// Informational only.
    pub fn l2_rates(&self) -> Vec<f64> {
        self.rows
            .windows(2)
            .map(|w| (w[0].l2_error / w[1].l2_error).ln() / (w[0].delta / w[1].delta).ln())
            .collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let csv_err = |source| Error::Csv { path: path.to_owned(), source };
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(CSV_HEADER).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record([
                machine(r.delta),
                machine(r.h),
                r.penalty.id().to_owned(),
                machine(r.p),
                machine(r.l2_error),
                machine(r.trace_norm),
                machine(r.energy),
                machine(r.sigma_r),
                machine(r.seconds),
            ])
            .map_err(csv_err)?;
        }
        w.flush().map_err(|source| Error::Io { path: path.to_owned(), source })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|source| Error::Io { path: path.to_owned(), source })
    }

    /// Writes whichever outputs are configured.
    pub fn write_outputs(&self, out: &OutputPaths) -> Result<()> {
        if let Some(p) = &out.csv {
            self.write_csv(p)?;
        }
        if let Some(p) = &out.json {
            self.write_json(p)?;
        }
        Ok(())
    }
}

/// Everything a row needs that does not depend on δ.
struct Prepared {
    case: ManufacturedCase,
    r: KernelSpec,
    k: KernelSpec,
    w: KernelSpec,
    khat: KernelSpec,
    sigma: f64,
}

fn prepare(cfg: &StudyConfig) -> Result<Prepared> {
    cfg.validate()?;
    let ids = &cfg.kernels;
    let r = KernelSpec::from_id(&ids.r)?;
    let k = KernelSpec::from_id(&ids.k)?;
    let khat = KernelSpec::from_id(ids.khat.as_deref().unwrap_or(&ids.k))?;
    let w = match cfg.eigen.as_ref().map(|e| e.mass) {
        Some(MassModel::NonlocalW) => normalize_w(&KernelSpec::from_id(&ids.w)?, cfg.shape.dim())?.0,
        _ => KernelSpec::zero(),
    };
    let sigma = sigma_r(&r, cfg.p, cfg.shape.dim())?.value;
    Ok(Prepared { case: manufactured_case(&cfg.case)?, r, k, w, khat, sigma })
}

struct RowOutcome {
    l2_error: f64,
    trace_norm: f64,
    energy: f64,
    energy_ratio: Option<f64>,
    nodes: usize,
    iterations: usize,
    converged: bool,
    eigenvalues: Option<Vec<f64>>,
    eigen_errors: Option<Vec<f64>>,
    minimizer: Field,
}

fn solve(op: &EnergyOperator, opts: &SolveOptions) -> Result<crate::minimize::SolveResult> {
    if op.is_quadratic() {
        solve_quadratic(op, opts)
    } else {
        solve_p_energy(op, opts)
    }
}

fn run_row_inner(cfg: &StudyConfig, prep: &Prepared, delta: f64) -> Result<RowOutcome> {
    let h = delta / cfg.ratio;
    let mesh = Arc::new(build_mesh(&cfg.shape, h)?);
    let a = prep.case.datum(&mesh);
    let op = assemble(&mesh, &prep.r, &cfg.penalty_spec(prep.k.clone()), delta, cfg.p, &a)?;
    let res = solve(&op, &cfg.solver)?;
    let exact = prep.case.solution(&mesh);
    let l2_error = res.minimizer.l2_distance(&exact, mesh.weights());
    let (_, trace) = Mollifier::new(&mesh, &prep.khat, delta)?.apply(&res.minimizer)?;
    let trace_norm = trace.l2_distance(&a, mesh.boundary_weights());
    let local = prep.case.local_energy(&mesh, cfg.p);
    let energy_ratio = (local > 0.0).then(|| res.energy / (prep.sigma * local));
    let (eigenvalues, eigen_errors) = match &cfg.eigen {
        None => (None, None),
        Some(e) => {
            let op0 = op.with_data(&BoundaryData::zeros(&mesh))?;
            let prob = match e.mass {
                MassModel::L2 => EigenProblem::l2(&op0, e.modes)?,
                MassModel::NonlocalW => EigenProblem::nonlocal_w(&op0, WMass::new(&mesh, &prep.w, delta), e.modes)?,
            };
            let lambdas = solve_eigen(&prob, &e.options)?.eigenvalues;
            let errors = local_dirichlet_eigenvalues(&cfg.shape, e.modes).ok().map(|exact| {
                lambdas.iter().zip(exact).map(|(l, x)| (l / prep.sigma - x).abs() / x).collect()
            });
            (Some(lambdas), errors)
        }
    };
    Ok(RowOutcome {
        l2_error,
        trace_norm,
        energy: res.energy,
        energy_ratio,
        nodes: mesh.len(),
        iterations: res.iterations,
        converged: res.converged,
        eigenvalues,
        eigen_errors,
        minimizer: res.minimizer,
    })
}

fn run_row(cfg: &StudyConfig, prep: &Prepared, delta: f64) -> (StudyRow, Option<Field>) {
    let start = Instant::now();
    let outcome = run_row_inner(cfg, prep, delta);
    let seconds = start.elapsed().as_secs_f64();
    let mut row = StudyRow {
        delta,
        h: delta / cfg.ratio,
        penalty: cfg.penalty.variant,
        p: cfg.p,
        nodes: 0,
        l2_error: f64::NAN,
        trace_norm: f64::NAN,
        energy: f64::NAN,
        sigma_r: prep.sigma,
        energy_ratio: None,
        iterations: 0,
        converged: false,
        eigenvalues: None,
        eigen_errors: None,
        seconds,
        failure: None,
    };
    match outcome {
        Ok(o) => {
            row.nodes = o.nodes;
            row.l2_error = o.l2_error;
            row.trace_norm = o.trace_norm;
            row.energy = o.energy;
            row.energy_ratio = o.energy_ratio;
            row.iterations = o.iterations;
            row.converged = o.converged;
            row.eigenvalues = o.eigenvalues;
            row.eigen_errors = o.eigen_errors;
            log::info!("delta {delta}: l2 error {:.3e}, trace {:.3e}", o.l2_error, o.trace_norm);
            (row, Some(o.minimizer))
        }
        Err(e) => {
            log::warn!("delta {delta}: {e}");
            row.failure = Some(e.to_string());
            (row, None)
        }
    }
}

fn sweep_with_fields(cfg: &StudyConfig) -> Result<(StudyReport, Vec<Option<Field>>)> {
    let prep = prepare(cfg)?;
    let (rows, fields): (Vec<_>, Vec<_>) = cfg.deltas.par_iter().map(|&d| run_row(cfg, &prep, d)).collect::<Vec<_>>().into_iter().unzip();
    let stamp = Stamp {
        version: env!("CARGO_PKG_VERSION").to_owned(),
        kernels: cfg.kernels.clone(),
        seed: cfg.solver.seed,
        case: cfg.case.clone(),
        note: CATALOG_NOTE.to_owned(),
    };
    Ok((StudyReport { rows, stamp }, fields))
}

/// One row per δ, rows computed concurrently and reported in δ order.
///
/// Configuration errors fail the whole sweep. Errors inside a row are
/// recorded in that row and the other rows still run.
pub fn run_delta_sweep(cfg: &StudyConfig) -> Result<StudyReport> {
    Ok(sweep_with_fields(cfg)?.0)
}

/// Result of [`coercivity_probe`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub variant: PenaltyVariant,
    pub delta: f64,
    pub trials: usize,
    /// Probes with zero penalty and zero trace.
    pub skipped: usize,
    /// `min penalty(u, 0) / ‖ũ‖²` over the probes.
    pub min_ratio: f64,
    /// `1 / min_ratio`.
    pub empirical_cn: f64,
    /// Power `m` with `C_n ∝ δ^m` for this variant.
    pub delta_power: i32,
    /// `empirical_cn / δ^m`.
    pub empirical_scaled: f64,
    /// Constant from [`EnergyOperator::coercivity_constant`], if available.
    pub certified_cn: Option<f64>,
    pub certified_scaled: Option<f64>,
    /// Probes with `certified_cn · penalty < ‖ũ‖²`.
    pub violations: usize,
}

impl ProbeReport {
    pub fn coercive(&self) -> bool {
        self.min_ratio > 0.0
    }
}

/// `m` with `C_n ∝ δ^m`: every variant's coefficients scale like `δ^(−2)`,
/// and the shi prefactor adds `δ^(−e)`.
pub fn coercivity_delta_power(spec: &PenaltySpec) -> i32 {
    match spec.variant {
        PenaltyVariant::Shi => 2 + spec.shi_delta_power,
        _ => 2,
    }
}

/// Coercivity of the zero-data penalty over `trials` standard-normal fields.
pub fn coercivity_probe(
    mesh: &Arc<DomainMesh>,
    r: &KernelSpec,
    spec: &PenaltySpec,
    khat: &KernelSpec,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<ProbeReport> {
    if trials < 10 {
        return Err(Error::InvalidArgument { name: "trials", reason: format!("at least 10 probes are required, got {trials}") });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fields: Vec<Field> =
        (0..trials).map(|_| Field::new((0..mesh.len()).map(|_| StandardNormal.sample(&mut rng)).collect())).collect();
    coercivity_probe_fields(mesh, r, spec, khat, delta, &fields)
}

/// [`coercivity_probe`] on caller-supplied fields.
pub fn coercivity_probe_fields(
    mesh: &Arc<DomainMesh>,
    r: &KernelSpec,
    spec: &PenaltySpec,
    khat: &KernelSpec,
    delta: f64,
    fields: &[Field],
) -> Result<ProbeReport> {
    let op = assemble(mesh, r, spec, delta, 2.0, &BoundaryData::zeros(mesh))?;
    let moll = Mollifier::new(mesh, khat, delta)?;
    let certified = op.coercivity_constant(&moll);
    let wb = mesh.boundary_weights();
    let mut skipped = 0;
    let mut violations = 0;
    let mut min_ratio = f64::INFINITY;
    for u in fields {
        let pen = op.penalty_energy(u)?;
        let (_, ub) = moll.apply(u)?;
        let tr: f64 = ub.values().iter().zip(wb).map(|(v, w)| w * v * v).sum();
        if pen == 0.0 && tr == 0.0 {
            skipped += 1;
            continue;
        }
        min_ratio = min_ratio.min(pen / tr);
        if certified.is_some_and(|c| c * pen < tr * (1.0 - 1e-12)) {
            violations += 1;
        }
    }
    let power = coercivity_delta_power(spec);
    let scale = delta.powi(power);
    let empirical_cn = 1.0 / min_ratio;
    Ok(ProbeReport {
        variant: spec.variant,
        delta,
        trials: fields.len(),
        skipped,
        min_ratio,
        empirical_cn,
        delta_power: power,
        empirical_scaled: empirical_cn / scale,
        certified_cn: certified,
        certified_scaled: certified.map(|c| c / scale),
        violations,
    })
}

/// Distances between the minimizers of two variants, one per δ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairDistance {
    pub a: PenaltyVariant,
    pub b: PenaltyVariant,
    /// Weighted L² distance; NaN where either row failed.
    pub l2: Vec<f64>,
    /// `|λ₁^a − λ₁^b| / λ₁^a`, when eigenvalues were requested.
    pub lambda1_gap: Option<Vec<f64>>,
    /// Strictly decreasing over at least three horizons.
    pub shrinking: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenaltyComparison {
    /// Rows of every sweep, grouped by variant in the order given.
    pub report: StudyReport,
    pub pairs: Vec<PairDistance>,
}

/// The template sweep once per variant, on identical meshes.
pub fn compare_penalties(template: &StudyConfig, variants: &[PenaltyVariant]) -> Result<PenaltyComparison> {
    if variants.is_empty() {
        return Err(Error::InvalidArgument { name: "variants", reason: "at least one penalty variant is required".into() });
    }
    let mut sweeps = Vec::with_capacity(variants.len());
    for &v in variants {
        let mut cfg = template.clone();
        cfg.penalty.variant = v;
        sweeps.push(sweep_with_fields(&cfg)?);
    }
    let mesh_weights: Vec<Option<Vec<f64>>> = template
        .deltas
        .iter()
        .map(|d| build_mesh(&template.shape, d / template.ratio).ok().map(|m| m.weights().to_vec()))
        .collect();
    let mut pairs = Vec::new();
    for i in 0..variants.len() {
        for j in i + 1..variants.len() {
            let (ra, fa) = &sweeps[i];
            let (rb, fb) = &sweeps[j];
            let l2: Vec<f64> = (0..template.deltas.len())
                .map(|n| match (&fa[n], &fb[n], &mesh_weights[n]) {
                    (Some(x), Some(y), Some(q)) => x.l2_distance(y, q),
                    _ => f64::NAN,
                })
                .collect();
            let lambda1_gap = template.eigen.as_ref().map(|_| {
                ra.rows
                    .iter()
                    .zip(&rb.rows)
                    .map(|(x, y)| match (&x.eigenvalues, &y.eigenvalues) {
                        (Some(lx), Some(ly)) => (lx[0] - ly[0]).abs() / lx[0],
                        _ => f64::NAN,
                    })
                    .collect()
            });
            let shrinking = (l2.len() >= 3).then(|| l2.windows(2).all(|w| w[1] < w[0]));
            pairs.push(PairDistance { a: variants[i], b: variants[j], l2, lambda1_gap, shrinking });
        }
    }
    let stamp = sweeps[0].0.stamp.clone();
    let rows = sweeps.into_iter().flat_map(|(r, _)| r.rows).collect();
    Ok(PenaltyComparison { report: StudyReport { rows, stamp }, pairs })
}
