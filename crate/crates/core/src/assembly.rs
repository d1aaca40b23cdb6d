//! Discrete nonlocal energies.
//!
//! The interior term is the double sum
//!
//! ```text
//! δ^(-p) Σ_i Σ_j q_i q_j R_δ(|x_i − x_j|) |u_i − u_j|^p
//! ```
//!
//! over ordered pairs, so every unordered pair is counted twice. Boundary
//! penalties come in two algebraic shapes:
//!
//! * *rank-one* terms `c_b |κ_b a_b − k_bᵀu|^p` (product and wang), where `k_b`
//!   holds kernel weights around boundary node `b` and `κ_b = Σ_j k_bj`;
//! * *pointwise* terms `Σ_j c_bj |u_j − a_b|^p` (pointwise, dirac_diagonal, shi).
//!
//! For `p = 2` the whole energy is also available as `uᵀAu − 2ℓᵀu + c₀`. The
//! sparse part of `A` holds the interior form and the pointwise penalties; the
//! rank-one penalties stay factored, so applying `A` keeps the cost of the
//! band rather than densifying it.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{BoundaryData, Field};
use crate::geometry::{dist_sq, neighbor_pairs, DomainMesh};
use crate::kernel::{antiderivative_kernel, validate_kernel, KernelSpec, ScaledKernel};
use crate::sparse::CsrMatrix;

/// Samples used when validating kernels at assembly.
const VALIDATION_SAMPLES: usize = 1025;
/// Work items per parallel task in energy sums.
const CHUNK: usize = 256;

/// The boundary penalty family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyVariant {
    /// `Σ_b w_b |δ⁻¹ Σ_j q_j K_δ(|x_b − x_j|)(a_b − u_j)|^p`.
    Product,
    /// `δ^(-p) Σ_b w_b Σ_j q_j K_δ(|x_b − x_j|) |u_j − a_b|^p`.
    Pointwise,
    /// `δ⁻² Σ_b w_b Σ_j q_j K_δ(|x_b − x_j|) u_j²`, zero data and `p = 2` only.
    DiracDiagonal,
    /// `Σ_b w_b 2/(δ² ω̄̄_b) (Σ_j q_j R̄_δ(|x_b − x_j|)(a_b − u_j))²`, `p = 2` only.
    Wang,
    /// `Σ_b w_b 4/(δ^e μ_b) Σ_j q_j R̄_δ(|x_b − x_j|) u_j²`, zero data and `p = 2` only.
    Shi,
}

impl PenaltyVariant {
    pub const ALL: [PenaltyVariant; 5] = [
        PenaltyVariant::Product,
        PenaltyVariant::Pointwise,
        PenaltyVariant::DiracDiagonal,
        PenaltyVariant::Wang,
        PenaltyVariant::Shi,
    ];

    pub fn id(self) -> &'static str {
        match self {
            PenaltyVariant::Product => "product",
            PenaltyVariant::Pointwise => "pointwise",
            PenaltyVariant::DiracDiagonal => "dirac_diagonal",
            PenaltyVariant::Wang => "wang",
            PenaltyVariant::Shi => "shi",
        }
    }

    pub fn from_id(id: &str) -> Result<Self> {
        Self::ALL.iter().copied().find(|v| v.id() == id).ok_or_else(|| Error::UnknownId {
            what: "penalty variant",
            id: id.to_owned(),
            catalog: Self::ALL.iter().map(|v| v.id()).collect::<Vec<_>>().join(", "),
        })
    }

    /// Variants defined only for homogeneous data.
    pub fn zero_data_only(self) -> bool {
        matches!(self, PenaltyVariant::DiracDiagonal | PenaltyVariant::Shi)
    }

    /// Variants defined only for `p = 2`.
    pub fn quadratic_only(self) -> bool {
        matches!(self, PenaltyVariant::DiracDiagonal | PenaltyVariant::Wang | PenaltyVariant::Shi)
    }

    /// Whether the penalty is built from the interior kernel `R` (through its
    /// antiderivatives) rather than the penalty kernel `K`.
    pub fn uses_interior_kernel(self) -> bool {
        matches!(self, PenaltyVariant::Wang | PenaltyVariant::Shi)
    }

    fn check(self, p: f64, a: &BoundaryData) -> Result<()> {
        if self.quadratic_only() && p != 2.0 {
            return Err(Error::PenaltyContract { variant: self.id(), reason: format!("is defined for p = 2 only, got p = {p}") });
        }
        if self.zero_data_only() && !a.is_zero() {
            return Err(Error::PenaltyContract { variant: self.id(), reason: "requires zero boundary data".into() });
        }
        Ok(())
    }
}

impl std::fmt::Display for PenaltyVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

/// A penalty variant with its kernel `K`. The wang and shi variants ignore
/// `kernel` and use antiderivatives of the interior kernel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenaltySpec {
    pub variant: PenaltyVariant,
    pub kernel: KernelSpec,
    /// Exponent `e` in the shi prefactor `4/(δ^e μ)`; either 0 or 2.
    #[serde(default)]
    pub shi_delta_power: i32,
}

impl PenaltySpec {
    pub fn new(variant: PenaltyVariant, kernel: KernelSpec) -> Self {
        PenaltySpec { variant, kernel, shi_delta_power: 0 }
    }

    pub fn product(kernel: KernelSpec) -> Self {
        Self::new(PenaltyVariant::Product, kernel)
    }

    pub fn with_shi_delta_power(mut self, e: i32) -> Self {
        self.shi_delta_power = e;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct RankOne {
    node: usize,
    coef: f64,
    kappa: f64,
    idx: Vec<usize>,
    k: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Pointwise {
    node: usize,
    idx: Vec<usize>,
    c: Vec<f64>,
}

#[derive(Clone, Debug)]
struct QuadraticParts {
    sparse: CsrMatrix,
    ell: Vec<f64>,
    c0: f64,
}

/// The assembled discrete functional for one mesh, horizon and exponent.
#[derive(Clone, Debug)]
pub struct EnergyOperator {
    mesh: Arc<DomainMesh>,
    delta: f64,
    p: f64,
    variant: PenaltyVariant,
    /// Symmetric interior weights `q_i q_j R_δ / δ^p`, no diagonal.
    pairs: CsrMatrix,
    rank_one: Vec<RankOne>,
    pointwise: Vec<Pointwise>,
    data: BoundaryData,
    quad: Option<QuadraticParts>,
}

/// Builds the operator. Requires `δ ≥ 2h` and kernels that pass
/// [`validate_kernel`]; warns when `δ < 4h`.
pub fn assemble(
    mesh: &Arc<DomainMesh>,
    r: &KernelSpec,
    spec: &PenaltySpec,
    delta: f64,
    p: f64,
    a: &BoundaryData,
) -> Result<EnergyOperator> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidArgument { name: "p", reason: format!("exponent must exceed 1, got {p}") });
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument { name: "delta", reason: format!("horizon must be positive, got {delta}") });
    }
    let h = mesh.h();
    if delta < 2.0 * h * (1.0 - 1e-12) {
        return Err(Error::HorizonTooSmall { delta, h });
    }
    if delta < 4.0 * h * (1.0 - 1e-12) {
        log::warn!("horizon {delta} resolves fewer than 4 cells of size {h}");
    }
    a.check_len(mesh.boundary_len())?;
    spec.variant.check(p, a)?;
    if !matches!(spec.shi_delta_power, 0 | 2) {
        return Err(Error::InvalidArgument {
            name: "shi_delta_power",
            reason: format!("must be 0 or 2, got {}", spec.shi_delta_power),
        });
    }
    validate_kernel(r, VALIDATION_SAMPLES)?.into_result()?;
    if !spec.variant.uses_interior_kernel() {
        validate_kernel(&spec.kernel, VALIDATION_SAMPLES)?.into_result()?;
    }

    let dim = mesh.dim();
    let pairs = pair_weights(mesh, &r.at_horizon(delta, dim), delta.powf(-p));
    let (rank_one, pointwise) = penalty_terms(mesh, r, spec, delta, p)?;

    let mut op = EnergyOperator {
        mesh: Arc::clone(mesh),
        delta,
        p,
        variant: spec.variant,
        pairs,
        rank_one,
        pointwise,
        data: a.clone(),
        quad: None,
    };
    if p == 2.0 {
        op.quad = Some(op.build_quadratic());
    }
    Ok(op)
}

/// Symmetric pair weights `scale · q_i q_j K_δ(|x_i − x_j|)` without diagonal.
fn pair_weights(mesh: &DomainMesh, k: &ScaledKernel, scale: f64) -> CsrMatrix {
    let table = neighbor_pairs(mesh, k.radius());
    let x = mesh.positions();
    let q = mesh.weights();
    let rows: Vec<Vec<(usize, f64)>> = (0..mesh.len())
        .into_par_iter()
        .map(|i| {
            table
                .neighbors(i)
                .iter()
                .filter_map(|&j| {
                    let w = scale * q[i] * q[j] * k.eval_sq(dist_sq(x[i], x[j]));
                    (w != 0.0).then_some((j, w))
                })
                .collect()
        })
        .collect();
    CsrMatrix::from_rows(rows)
}

/// Kernel weights `q_j K_δ(|x_b − x_j|)` around every boundary node.
fn boundary_weights(mesh: &DomainMesh, k: &ScaledKernel) -> Vec<(Vec<usize>, Vec<f64>)> {
    let table = neighbor_pairs(mesh, k.radius());
    let x = mesh.positions();
    let q = mesh.weights();
    let xb = mesh.boundary_positions();
    (0..mesh.boundary_len())
        .into_par_iter()
        .map(|b| {
            let mut idx = Vec::new();
            let mut val = Vec::new();
            for &j in table.boundary_neighbors(b) {
                let v = q[j] * k.eval_sq(dist_sq(xb[b], x[j]));
                if v != 0.0 {
                    idx.push(j);
                    val.push(v);
                }
            }
            (idx, val)
        })
        .collect()
}

fn penalty_terms(
    mesh: &DomainMesh,
    r: &KernelSpec,
    spec: &PenaltySpec,
    delta: f64,
    p: f64,
) -> Result<(Vec<RankOne>, Vec<Pointwise>)> {
    let dim = mesh.dim();
    let wb = mesh.boundary_weights();
    let mut rank_one = Vec::new();
    let mut pointwise = Vec::new();
    match spec.variant {
        PenaltyVariant::Product => {
            let kb = boundary_weights(mesh, &spec.kernel.at_horizon(delta, dim));
            for (b, (idx, k)) in kb.into_iter().enumerate() {
                let kappa = k.iter().sum();
                rank_one.push(RankOne { node: b, coef: wb[b] * delta.powf(-p), kappa, idx, k });
            }
        }
        PenaltyVariant::Pointwise | PenaltyVariant::DiracDiagonal => {
            let kb = boundary_weights(mesh, &spec.kernel.at_horizon(delta, dim));
            let scale = delta.powf(-p);
            for (b, (idx, k)) in kb.into_iter().enumerate() {
                let c = k.iter().map(|v| wb[b] * scale * v).collect();
                pointwise.push(Pointwise { node: b, idx, c });
            }
        }
        PenaltyVariant::Wang => {
            let rbar = antiderivative_kernel(r);
            let rbarbar = antiderivative_kernel(&rbar);
            let kb = boundary_weights(mesh, &rbar.at_horizon(delta, dim));
            let omega = boundary_weights(mesh, &rbarbar.at_horizon(delta, dim));
            for (b, ((idx, k), (_, om))) in kb.into_iter().zip(omega).enumerate() {
                let omega_b: f64 = om.iter().sum();
                if !(omega_b > 0.0) {
                    return Err(Error::VanishingWeight { location: "boundary", index: b });
                }
                let kappa = k.iter().sum();
                let coef = wb[b] * 2.0 / (delta * delta * omega_b);
                rank_one.push(RankOne { node: b, coef, kappa, idx, k });
            }
        }
        PenaltyVariant::Shi => {
            let rbar = antiderivative_kernel(r);
            let kb = boundary_weights(mesh, &rbar.at_horizon(delta, dim));
            let xb = mesh.boundary_positions();
            for (b, (idx, k)) in kb.into_iter().enumerate() {
                let d = mesh.distance_to_boundary(xb[b]).unwrap_or(0.0);
                let mu = (delta * delta).max(d).min(2.0 * delta);
                let pref = wb[b] * 4.0 / (delta.powi(spec.shi_delta_power) * mu);
                let c = k.iter().map(|v| pref * v).collect();
                pointwise.push(Pointwise { node: b, idx, c });
            }
        }
    }
    Ok((rank_one, pointwise))
}

#[inline]
fn pow_abs(x: f64, p: f64) -> f64 {
    let a = x.abs();
    if p == 2.0 {
        a * a
    } else if p == 3.0 {
        a * a * a
    } else if p == 4.0 {
        (a * a) * (a * a)
    } else {
        a.powf(p)
    }
}

/// `d/dx |x|^p = p |x|^(p-1) sign(x)`.
#[inline]
fn dpow(x: f64, p: f64) -> f64 {
    if p == 2.0 {
        2.0 * x
    } else if x == 0.0 {
        0.0
    } else {
        p * pow_abs(x, p - 1.0) * x.signum()
    }
}

fn chunked_sum(n: usize, f: impl Fn(usize) -> f64 + Sync) -> f64 {
    let partial: Vec<f64> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| (c * CHUNK..((c + 1) * CHUNK).min(n)).map(&f).sum::<f64>())
        .collect();
    partial.iter().sum()
}

impl EnergyOperator {
    pub fn mesh(&self) -> &Arc<DomainMesh> {
        &self.mesh
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn variant(&self) -> PenaltyVariant {
        self.variant
    }

    pub fn data(&self) -> &BoundaryData {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.mesh.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mesh.is_empty()
    }

    /// Number of ordered interior pairs with nonzero weight.
    pub fn pair_count(&self) -> usize {
        self.pairs.nnz()
    }

    /// The interior double sum.
    pub fn interior_energy(&self, u: &Field) -> Result<f64> {
        u.check_len(self.len())?;
        Ok(self.interior_energy_unchecked(u.values()))
    }

    fn interior_energy_unchecked(&self, u: &[f64]) -> f64 {
        let p = self.p;
        chunked_sum(self.len(), |i| {
            let (c, w) = self.pairs.row(i);
            c.iter().zip(w).map(|(&j, w)| w * pow_abs(u[i] - u[j], p)).sum::<f64>()
        })
    }

    /// Penalty with the operator's own boundary data.
    pub fn penalty_energy(&self, u: &Field) -> Result<f64> {
        self.penalty_energy_with(u, &self.data)
    }

    /// Penalty with boundary data `a` in place of the assembled data.
    pub fn penalty_energy_with(&self, u: &Field, a: &BoundaryData) -> Result<f64> {
        u.check_len(self.len())?;
        a.check_len(self.mesh.boundary_len())?;
        self.variant.check(self.p, a)?;
        Ok(self.penalty_unchecked(u.values(), a.values()))
    }

    fn penalty_unchecked(&self, u: &[f64], a: &[f64]) -> f64 {
        let p = self.p;
        let r1: f64 = chunked_sum(self.rank_one.len(), |t| {
            let term = &self.rank_one[t];
            let dot: f64 = term.idx.iter().zip(&term.k).map(|(&j, k)| k * u[j]).sum();
            term.coef * pow_abs(term.kappa * a[term.node] - dot, p)
        });
        let pw: f64 = chunked_sum(self.pointwise.len(), |t| {
            let term = &self.pointwise[t];
            let ab = a[term.node];
            term.idx.iter().zip(&term.c).map(|(&j, c)| c * pow_abs(u[j] - ab, p)).sum::<f64>()
        });
        r1 + pw
    }

    /// Interior plus penalty energy.
    pub fn energy(&self, u: &Field) -> Result<f64> {
        u.check_len(self.len())?;
        Ok(self.energy_unchecked(u.values()))
    }

    pub(crate) fn energy_unchecked(&self, u: &[f64]) -> f64 {
        self.interior_energy_unchecked(u) + self.penalty_unchecked(u, self.data.values())
    }

    /// Analytic gradient of [`energy`](Self::energy).
    pub fn gradient(&self, u: &Field) -> Result<Field> {
        u.check_len(self.len())?;
        let mut g = vec![0.0; self.len()];
        self.gradient_into(u.values(), &mut g);
        Ok(Field::new(g))
    }

    pub(crate) fn gradient_into(&self, u: &[f64], g: &mut [f64]) {
        let p = self.p;
        g.par_chunks_mut(CHUNK).enumerate().for_each(|(c, gs)| {
            for (k, gi) in gs.iter_mut().enumerate() {
                let i = c * CHUNK + k;
                let (cols, w) = self.pairs.row(i);
                *gi = 2.0 * cols.iter().zip(w).map(|(&j, w)| w * dpow(u[i] - u[j], p)).sum::<f64>();
            }
        });
        let a = self.data.values();
        // Penalty contributions scatter into shared entries; the per-term
        // factors are computed in parallel and added in a fixed order.
        let factors: Vec<f64> = self
            .rank_one
            .par_iter()
            .map(|t| {
                let dot: f64 = t.idx.iter().zip(&t.k).map(|(&j, k)| k * u[j]).sum();
                -t.coef * dpow(t.kappa * a[t.node] - dot, p)
            })
            .collect();
        for (t, f) in self.rank_one.iter().zip(factors) {
            for (&j, k) in t.idx.iter().zip(&t.k) {
                g[j] += f * k;
            }
        }
        for t in &self.pointwise {
            let ab = a[t.node];
            for (&j, c) in t.idx.iter().zip(&t.c) {
                g[j] += c * dpow(u[j] - ab, p);
            }
        }
    }

    /// Diagonal of the `p = 2` form built from this operator's weights; used
    /// as a preconditioner for every `p`.
    pub fn p2_diagonal(&self) -> Vec<f64> {
        let mut d: Vec<f64> = (0..self.len()).map(|i| 2.0 * self.pairs.row(i).1.iter().sum::<f64>()).collect();
        for t in &self.rank_one {
            for (&j, k) in t.idx.iter().zip(&t.k) {
                d[j] += t.coef * k * k;
            }
        }
        for t in &self.pointwise {
            for (&j, c) in t.idx.iter().zip(&t.c) {
                d[j] += c;
            }
        }
        d
    }

    fn build_quadratic(&self) -> QuadraticParts {
        let n = self.len();
        let mut extra_diag = vec![0.0; n];
        for t in &self.pointwise {
            for (&j, c) in t.idx.iter().zip(&t.c) {
                extra_diag[j] += c;
            }
        }
        let rows: Vec<Vec<(usize, f64)>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let (cols, w) = self.pairs.row(i);
                let mut row = Vec::with_capacity(cols.len() + 1);
                let diag = 2.0 * w.iter().sum::<f64>() + extra_diag[i];
                let mut placed = false;
                for (&j, w) in cols.iter().zip(w) {
                    if !placed && j > i {
                        row.push((i, diag));
                        placed = true;
                    }
                    row.push((j, -2.0 * w));
                }
                if !placed {
                    row.push((i, diag));
                }
                row
            })
            .collect();
        let (ell, c0) = self.affine_part(&self.data);
        QuadraticParts { sparse: CsrMatrix::from_rows(rows), ell, c0 }
    }

    fn affine_part(&self, a: &BoundaryData) -> (Vec<f64>, f64) {
        let a = a.values();
        let mut ell = vec![0.0; self.len()];
        let mut c0 = 0.0;
        for t in &self.rank_one {
            let s = t.coef * t.kappa * a[t.node];
            if s != 0.0 {
                for (&j, k) in t.idx.iter().zip(&t.k) {
                    ell[j] += s * k;
                }
            }
            c0 += t.coef * (t.kappa * a[t.node]).powi(2);
        }
        for t in &self.pointwise {
            let ab = a[t.node];
            for (&j, c) in t.idx.iter().zip(&t.c) {
                ell[j] += c * ab;
                c0 += c * ab * ab;
            }
        }
        (ell, c0)
    }

    fn quad(&self) -> Result<&QuadraticParts> {
        self.quad.as_ref().ok_or(Error::NotQuadratic(self.p))
    }

    /// Whether `uᵀAu − 2ℓᵀu + c₀` is available (`p = 2`).
    pub fn is_quadratic(&self) -> bool {
        self.quad.is_some()
    }

    /// `y = A u` for `p = 2`.
    pub fn apply_a(&self, u: &[f64], y: &mut [f64]) -> Result<()> {
        let q = self.quad()?;
        q.sparse.apply(u, y);
        let dots: Vec<f64> = self
            .rank_one
            .par_iter()
            .map(|t| t.coef * t.idx.iter().zip(&t.k).map(|(&j, k)| k * u[j]).sum::<f64>())
            .collect();
        for (t, s) in self.rank_one.iter().zip(dots) {
            for (&j, k) in t.idx.iter().zip(&t.k) {
                y[j] += s * k;
            }
        }
        Ok(())
    }

    /// Linear term `ℓ` for `p = 2`.
    pub fn ell(&self) -> Result<&[f64]> {
        Ok(&self.quad()?.ell)
    }

    /// Constant term `c₀` for `p = 2`.
    pub fn c0(&self) -> Result<f64> {
        Ok(self.quad()?.c0)
    }

    /// `uᵀAu − 2ℓᵀu + c₀`.
    pub fn quadratic_energy(&self, u: &Field) -> Result<f64> {
        u.check_len(self.len())?;
        let q = self.quad()?;
        let mut au = vec![0.0; self.len()];
        self.apply_a(u.values(), &mut au)?;
        let u = u.values();
        let uau: f64 = u.iter().zip(&au).map(|(a, b)| a * b).sum();
        let lu: f64 = u.iter().zip(&q.ell).map(|(a, b)| a * b).sum();
        Ok(uau - 2.0 * lu + q.c0)
    }

    /// Dense copy of `A`, for oracles on small meshes.
    pub fn dense_a(&self) -> Result<DMatrix<f64>> {
        let mut m = self.quad()?.sparse.to_dense();
        for t in &self.rank_one {
            for (&i, ki) in t.idx.iter().zip(&t.k) {
                for (&j, kj) in t.idx.iter().zip(&t.k) {
                    m[(i, j)] += t.coef * ki * kj;
                }
            }
        }
        Ok(m)
    }

    /// The operator multiplied by `c > 0`. Minimizers are unchanged.
    pub fn scaled(&self, c: f64) -> EnergyOperator {
        let mut op = self.clone();
        op.pairs.scale(c);
        op.rank_one.iter_mut().for_each(|t| t.coef *= c);
        op.pointwise.iter_mut().for_each(|t| t.c.iter_mut().for_each(|v| *v *= c));
        if let Some(q) = op.quad.as_mut() {
            q.sparse.scale(c);
            q.ell.iter_mut().for_each(|v| *v *= c);
            q.c0 *= c;
        }
        op
    }

    /// Same operator with different boundary data.
    pub fn with_data(&self, a: &BoundaryData) -> Result<EnergyOperator> {
        a.check_len(self.mesh.boundary_len())?;
        self.variant.check(self.p, a)?;
        let mut op = self.clone();
        op.data = a.clone();
        if op.quad.is_some() {
            let (ell, c0) = op.affine_part(a);
            let q = op.quad.as_mut().expect("checked above");
            q.ell = ell;
            q.c0 = c0;
        }
        Ok(op)
    }

    /// A constant `C` with `C · penalty(u, 0) ≥ Σ_b w_b ũ_b²` for every `u`,
    /// where `ũ` is the boundary mollification by `moll`, or `None` if the
    /// penalty's coefficients do not dominate the mollifier weights.
    ///
    /// Rank-one terms need `k_b` proportional to the mollifier weights, so
    /// that `k_bᵀu = κ_b ũ_b`. Pointwise terms use Jensen's inequality
    /// `ũ_b² ≤ Σ_j m_bj u_j² / ω_b` for the raw weights `m_bj` and need
    /// `c_bj ≥ λ_b m_bj` for some `λ_b > 0`.
    pub fn coercivity_constant(&self, moll: &Mollifier) -> Option<f64> {
        if self.p != 2.0 {
            return None;
        }
        let wb = self.mesh.boundary_weights();
        let mut worst = 0.0f64;
        for t in &self.rank_one {
            let (idx, val) = &moll.boundary[t.node];
            if idx != &t.idx || idx.is_empty() {
                return None;
            }
            let ratio = t.k[0] / val[0];
            if t.k.iter().zip(val).any(|(k, v)| (k - ratio * v).abs() > 1e-12 * k.abs()) {
                return None;
            }
            // k_bᵀu = κ_b ũ_b, so the term equals c_b κ_b² ũ_b².
            let scale = t.coef * t.kappa * t.kappa;
            if !(scale > 0.0) {
                return None;
            }
            worst = worst.max(wb[t.node] / scale);
        }
        for t in &self.pointwise {
            let (idx, val) = &moll.boundary[t.node];
            let omega = moll.boundary_omega[t.node];
            let mut lambda = f64::INFINITY;
            for (&j, v) in idx.iter().zip(val) {
                let raw = v * omega;
                let c = t.idx.binary_search(&j).map_or(0.0, |k| t.c[k]);
                lambda = lambda.min(c / raw);
            }
            if !(lambda > 0.0 && lambda.is_finite()) {
                return None;
            }
            worst = worst.max(wb[t.node] / (lambda * omega));
        }
        Some(worst)
    }

    /// JSON-serializable snapshot of the pair list and penalty vectors.
    pub fn dump(&self) -> OperatorDump {
        let mut pairs = Vec::with_capacity(self.pairs.nnz() / 2);
        for i in 0..self.len() {
            let (c, w) = self.pairs.row(i);
            pairs.extend(c.iter().zip(w).filter(|(&j, _)| j > i).map(|(&j, &w)| (i, j, w)));
        }
        OperatorDump {
            delta: self.delta,
            p: self.p,
            dim: self.mesh.dim(),
            variant: self.variant,
            interior_nodes: self.len(),
            boundary_nodes: self.mesh.boundary_len(),
            pairs,
            rank_one: self
                .rank_one
                .iter()
                .map(|t| RankOneDump {
                    node: t.node,
                    coef: t.coef,
                    kappa: t.kappa,
                    entries: t.idx.iter().copied().zip(t.k.iter().copied()).collect(),
                })
                .collect(),
            pointwise: self
                .pointwise
                .iter()
                .map(|t| PointwiseDump { node: t.node, entries: t.idx.iter().copied().zip(t.c.iter().copied()).collect() })
                .collect(),
            data: self.data.values().to_vec(),
        }
    }
}

/// Plain-data form of an [`EnergyOperator`]. Pairs are listed once with
/// `i < j`; the energy counts each twice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorDump {
    pub delta: f64,
    pub p: f64,
    pub dim: usize,
    pub variant: PenaltyVariant,
    pub interior_nodes: usize,
    pub boundary_nodes: usize,
    pub pairs: Vec<(usize, usize, f64)>,
    pub rank_one: Vec<RankOneDump>,
    pub pointwise: Vec<PointwiseDump>,
    pub data: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankOneDump {
    pub node: usize,
    pub coef: f64,
    pub kappa: f64,
    pub entries: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointwiseDump {
    pub node: usize,
    pub entries: Vec<(usize, f64)>,
}

impl OperatorDump {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Total energy evaluated straight from the dumped lists.
    pub fn energy(&self, u: &[f64]) -> f64 {
        let p = self.p;
        let interior: f64 = self.pairs.iter().map(|&(i, j, w)| 2.0 * w * pow_abs(u[i] - u[j], p)).sum();
        let r1: f64 = self
            .rank_one
            .iter()
            .map(|t| {
                let dot: f64 = t.entries.iter().map(|&(j, k)| k * u[j]).sum();
                t.coef * pow_abs(t.kappa * self.data[t.node] - dot, p)
            })
            .sum();
        let pw: f64 = self
            .pointwise
            .iter()
            .flat_map(|t| t.entries.iter().map(move |&(j, c)| c * pow_abs(u[j] - self.data[t.node], p)))
            .sum();
        interior + r1 + pw
    }
}

/// Kernel-weighted averaging `ũ(x) = Σ_j q_j K̂_δ(|x − x_j|) u_j / ω_δ(x)` at
/// interior and boundary nodes. At interior nodes the sum includes `j = i`.
#[derive(Clone, Debug)]
pub struct Mollifier {
    interior: Vec<(Vec<usize>, Vec<f64>)>,
    boundary: Vec<(Vec<usize>, Vec<f64>)>,
    interior_omega: Vec<f64>,
    boundary_omega: Vec<f64>,
}

impl Mollifier {
    /// Errors with [`Error::VanishingWeight`] if `ω_δ` is zero at some node.
    pub fn new(mesh: &DomainMesh, khat: &KernelSpec, delta: f64) -> Result<Self> {
        let k = khat.at_horizon(delta, mesh.dim());
        let table = neighbor_pairs(mesh, k.radius());
        let x = mesh.positions();
        let q = mesh.weights();
        let row = |center: [f64; 2], nbrs: &mut dyn Iterator<Item = usize>| -> (Vec<usize>, Vec<f64>, f64) {
            let mut idx = Vec::new();
            let mut val = Vec::new();
            for j in nbrs {
                let v = q[j] * k.eval_sq(dist_sq(center, x[j]));
                if v != 0.0 {
                    idx.push(j);
                    val.push(v);
                }
            }
            let omega: f64 = val.iter().sum();
            (idx, val, omega)
        };
        let mut interior = Vec::with_capacity(mesh.len());
        let mut interior_omega = Vec::with_capacity(mesh.len());
        for i in 0..mesh.len() {
            let nb = table.neighbors(i);
            let split = nb.partition_point(|&j| j < i);
            let mut it = nb[..split].iter().copied().chain(std::iter::once(i)).chain(nb[split..].iter().copied());
            let (idx, mut val, omega) = row(x[i], &mut it);
            if !(omega > 0.0) {
                return Err(Error::VanishingWeight { location: "interior", index: i });
            }
            val.iter_mut().for_each(|v| *v /= omega);
            interior.push((idx, val));
            interior_omega.push(omega);
        }
        let mut boundary = Vec::with_capacity(mesh.boundary_len());
        let mut boundary_omega = Vec::with_capacity(mesh.boundary_len());
        for (b, &xb) in mesh.boundary_positions().iter().enumerate() {
            let (idx, mut val, omega) = row(xb, &mut table.boundary_neighbors(b).iter().copied());
            if !(omega > 0.0) {
                return Err(Error::VanishingWeight { location: "boundary", index: b });
            }
            val.iter_mut().for_each(|v| *v /= omega);
            boundary.push((idx, val));
            boundary_omega.push(omega);
        }
        Ok(Mollifier { interior, boundary, interior_omega, boundary_omega })
    }

    /// `(ũ at interior nodes, ũ at boundary nodes)`.
    pub fn apply(&self, u: &Field) -> Result<(Field, BoundaryData)> {
        u.check_len(self.interior.len())?;
        let u = u.values();
        let avg = |(idx, val): &(Vec<usize>, Vec<f64>)| idx.iter().zip(val).map(|(&j, v)| v * u[j]).sum::<f64>();
        Ok((
            Field::new(self.interior.par_iter().map(avg).collect()),
            BoundaryData::new(self.boundary.par_iter().map(avg).collect()),
        ))
    }

    /// `ω_δ` at interior nodes.
    pub fn interior_omega(&self) -> &[f64] {
        &self.interior_omega
    }

    /// `ω_δ` at boundary nodes.
    pub fn boundary_omega(&self) -> &[f64] {
        &self.boundary_omega
    }
}

/// One-shot [`Mollifier`] application.
pub fn mollify(mesh: &DomainMesh, khat: &KernelSpec, delta: f64, u: &Field) -> Result<(Field, BoundaryData)> {
    Mollifier::new(mesh, khat, delta)?.apply(u)
}

/// The nonlocal mass form `M_ij = q_i q_j W_δ(|x_i − x_j|)`, diagonal included.
#[derive(Clone, Debug)]
pub struct WMass {
    matrix: CsrMatrix,
}

impl WMass {
    pub fn new(mesh: &DomainMesh, w: &KernelSpec, delta: f64) -> Self {
        let k = w.at_horizon(delta, mesh.dim());
        let off = pair_weights(mesh, &k, 1.0);
        let q = mesh.weights();
        let k0 = k.eval(0.0);
        let rows = (0..mesh.len())
            .map(|i| {
                let (c, v) = off.row(i);
                let mut row: Vec<(usize, f64)> = c.iter().copied().zip(v.iter().copied()).collect();
                let at = row.partition_point(|&(j, _)| j < i);
                row.insert(at, (i, q[i] * q[i] * k0));
                row
            })
            .collect();
        WMass { matrix: CsrMatrix::from_rows(rows) }
    }

    /// A mass form given directly as a symmetric matrix.
    pub fn from_matrix(matrix: CsrMatrix) -> Self {
        WMass { matrix }
    }

    /// The diagonal form `diag(q)`, identical to the L² quadrature mass.
    pub fn identity_weights(mesh: &DomainMesh) -> Self {
        WMass::from_matrix(CsrMatrix::from_rows(
            mesh.weights().iter().enumerate().map(|(i, &q)| vec![(i, q)]).collect(),
        ))
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn len(&self) -> usize {
        self.matrix.n()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.n() == 0
    }

    /// `⟨u, v⟩_n`; exactly symmetric in its arguments.
    pub fn inner(&self, u: &Field, v: &Field) -> Result<f64> {
        u.check_len(self.len())?;
        v.check_len(self.len())?;
        Ok(self.matrix.symmetric_form(u.values(), v.values()))
    }

    pub fn apply(&self, u: &[f64], y: &mut [f64]) {
        self.matrix.apply(u, y);
    }
}

/// `Σ_i Σ_j q_i q_j W_δ(|x_i − x_j|) u_i v_j`, diagonal included.
pub fn nonlocal_inner_product(mesh: &DomainMesh, w: &KernelSpec, delta: f64, u: &Field, v: &Field) -> Result<f64> {
    WMass::new(mesh, w, delta).inner(u, v)
}

/// Largest observed ratio of raw double sums
/// `Σ q_i q_j R_δ |u_i − u_j|^p / Σ q_i q_j R_{mδ} |u_i − u_j|^p` over
/// `trials` standard-normal fields. Fields with a zero denominator are redrawn.
pub fn kernel_scale_ratio(
    mesh: &DomainMesh,
    r: &KernelSpec,
    delta: f64,
    m: f64,
    p: f64,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if !(m > 0.0) {
        return Err(Error::InvalidArgument { name: "m", reason: format!("scale factor must be positive, got {m}") });
    }
    if trials == 0 {
        return Err(Error::InvalidArgument { name: "trials", reason: "need at least one trial".into() });
    }
    let dim = mesh.dim();
    let num = pair_weights(mesh, &r.at_horizon(delta, dim), 1.0);
    let den = pair_weights(mesh, &r.at_horizon(m * delta, dim), 1.0);
    let raw = |w: &CsrMatrix, u: &[f64]| -> f64 {
        chunked_sum(u.len(), |i| {
            let (c, w) = w.row(i);
            c.iter().zip(w).map(|(&j, w)| w * pow_abs(u[i] - u[j], p)).sum::<f64>()
        })
    };
    if den.nnz() == 0 {
        return Err(Error::InvalidArgument {
            name: "m",
            reason: format!("horizon {} couples no node pairs; every denominator vanishes", m * delta),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    let mut done = 0;
    while done < trials {
        let u: Vec<f64> = (0..mesh.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
        let d = raw(&den, &u);
        if d == 0.0 {
            continue;
        }
        best = best.max(raw(&num, &u) / d);
        done += 1;
    }
    Ok(best)
}
