//! Lowest eigenpairs of `Aμ = λBμ`, where `A` is the `p = 2` energy with zero
//! data and `B` is either the L² quadrature mass or the nonlocal W mass.
//!
//! Modes are computed one at a time. Each mode minimizes the Rayleigh
//! quotient by a locally optimal block iteration on `{x, D⁻¹r, previous step}`,
//! with `B`-orthogonalization against the modes already found at every step.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::assembly::{EnergyOperator, WMass};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::geometry::Shape;

/// Smallest admissible eigenvalue of the diagonally scaled mass form.
pub const MASS_PD_THRESHOLD: f64 = 1e-8;
/// Meshes up to this size get an exact dense positive-definiteness check.
const DENSE_CHECK_MAX: usize = 1500;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MassModel {
    /// Diagonal quadrature weights.
    L2,
    /// The nonlocal W-kernel form.
    NonlocalW,
}

impl MassModel {
    pub fn id(self) -> &'static str {
        match self {
            MassModel::L2 => "l2",
            MassModel::NonlocalW => "nonlocal_w",
        }
    }
}

#[derive(Clone, Debug)]
enum Mass {
    L2(Vec<f64>),
    W(WMass),
}

impl Mass {
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        match self {
            Mass::L2(q) => y.iter_mut().zip(x).zip(q).for_each(|((y, x), q)| *y = q * x),
            Mass::W(m) => m.apply(x, y),
        }
    }

    fn dense(&self) -> DMatrix<f64> {
        match self {
            Mass::L2(q) => DMatrix::from_diagonal(&DVector::from_column_slice(q)),
            Mass::W(m) => m.matrix().to_dense(),
        }
    }
}

/// Stiffness, mass and mode count.
#[derive(Clone, Debug)]
pub struct EigenProblem<'a> {
    stiffness: &'a EnergyOperator,
    mass: Mass,
    model: MassModel,
    k: usize,
}

impl<'a> EigenProblem<'a> {
    /// L² mass `diag(q)`.
    pub fn l2(stiffness: &'a EnergyOperator, k: usize) -> Result<Self> {
        check_stiffness(stiffness, k)?;
        Ok(EigenProblem { stiffness, mass: Mass::L2(stiffness.mesh().weights().to_vec()), model: MassModel::L2, k })
    }

    /// Nonlocal W mass. Errors with [`Error::MassIndefinite`] if the mass
    /// form is not positive definite.
    pub fn nonlocal_w(stiffness: &'a EnergyOperator, mass: WMass, k: usize) -> Result<Self> {
        check_stiffness(stiffness, k)?;
        if mass.len() != stiffness.len() {
            return Err(Error::LengthMismatch { what: "mass form", expected: stiffness.len(), got: mass.len() });
        }
        let smallest = smallest_scaled_mass_eigenvalue(&mass)?;
        if !(smallest > MASS_PD_THRESHOLD) {
            return Err(Error::MassIndefinite(smallest));
        }
        Ok(EigenProblem { stiffness, mass: Mass::W(mass), model: MassModel::NonlocalW, k })
    }

    pub fn model(&self) -> MassModel {
        self.model
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `B`-inner product of two fields.
    pub fn mass_inner(&self, u: &Field, v: &Field) -> f64 {
        let mut bv = vec![0.0; v.len()];
        self.mass.apply(v.values(), &mut bv);
        dot(u.values(), &bv)
    }

    /// Dense `(A, B)`, for oracles on small meshes.
    pub fn dense_pair(&self) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        Ok((self.stiffness.dense_a()?, self.mass.dense()))
    }
}

fn check_stiffness(op: &EnergyOperator, k: usize) -> Result<()> {
    if !op.is_quadratic() {
        return Err(Error::NotQuadratic(op.p()));
    }
    if op.c0()? != 0.0 || op.ell()?.iter().any(|&v| v != 0.0) {
        return Err(Error::AffineStiffness);
    }
    if k == 0 || k > op.len() {
        return Err(Error::InvalidArgument { name: "k", reason: format!("need 1 ≤ k ≤ {}, got {k}", op.len()) });
    }
    Ok(())
}

/// Smallest eigenvalue of `D^(-1/2) M D^(-1/2)`, `D = diag(M)`.
pub fn smallest_scaled_mass_eigenvalue(mass: &WMass) -> Result<f64> {
    let d = mass.matrix().diagonal();
    if let Some(i) = d.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::VanishingWeight { location: "mass diagonal", index: i });
    }
    let n = mass.len();
    if n <= DENSE_CHECK_MAX {
        let mut m = mass.matrix().to_dense();
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] /= (d[i] * d[j]).sqrt();
            }
        }
        return Ok(SymmetricEigen::new(m).eigenvalues.min());
    }
    let apply_a = |x: &[f64], y: &mut [f64]| mass.apply(x, y);
    let apply_b = |x: &[f64], y: &mut [f64]| y.iter_mut().zip(x).zip(&d).for_each(|((y, x), d)| *y = d * x);
    let inv: Vec<f64> = d.iter().map(|v| 1.0 / v).collect();
    let modes = lowest_modes(&apply_a, &apply_b, &inv, 1, &EigenOptions { tol: 1e-8, ..EigenOptions::default() });
    if !modes.converged[0] {
        log::warn!("mass positivity check did not converge; using the last Ritz value");
    }
    Ok(modes.values[0])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigenOptions {
    /// Relative residual target `‖Aμ − λBμ‖ / (‖Aμ‖ + |λ|‖Bμ‖)`.
    pub tol: f64,
    /// Iteration budget per mode.
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions { tol: 1e-10, max_iter: 20_000, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub mass_model: MassModel,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `B`-orthonormal; the largest-magnitude entry of each is positive.
    pub eigenfields: Vec<Field>,
    pub residuals: Vec<f64>,
    pub iterations: Vec<usize>,
    pub converged: Vec<bool>,
}

impl EigenResult {
    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }
}

/// Deflated Rayleigh-quotient minimization of the first `k` modes.
pub fn solve_eigen(prob: &EigenProblem<'_>, opts: &EigenOptions) -> Result<EigenResult> {
    if !(opts.tol > 0.0 && opts.tol < 1.0) || opts.max_iter == 0 {
        return Err(Error::InvalidArgument {
            name: "eigen options",
            reason: format!("need 0 < tol < 1 and max_iter ≥ 1, got {} and {}", opts.tol, opts.max_iter),
        });
    }
    let op = prob.stiffness;
    let apply_a = |x: &[f64], y: &mut [f64]| op.apply_a(x, y).expect("quadratic operator checked at construction");
    let apply_b = |x: &[f64], y: &mut [f64]| prob.mass.apply(x, y);
    let inv: Vec<f64> = op.p2_diagonal().iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let modes = lowest_modes(&apply_a, &apply_b, &inv, prob.k, opts);
    if modes.values.iter().any(|&v| v < -1e-8) {
        log::warn!("negative eigenvalue {:?}; the stiffness is not semidefinite", modes.values);
    }
    Ok(EigenResult {
        mass_model: prob.model,
        eigenvalues: modes.values,
        eigenfields: modes.vectors.into_iter().map(Field::new).collect(),
        residuals: modes.residuals,
        iterations: modes.iterations,
        converged: modes.converged,
    })
}

struct Modes {
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    residuals: Vec<f64>,
    iterations: Vec<usize>,
    converged: Vec<bool>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

type Apply<'f> = dyn Fn(&[f64], &mut [f64]) + 'f;

/// Removes the `B`-components along `basis` (each `(v, Bv)` with `vᵀBv = 1`).
fn b_project(x: &mut [f64], basis: &[(Vec<f64>, Vec<f64>)]) {
    for (v, bv) in basis {
        let c = dot(bv, x);
        x.iter_mut().zip(v).for_each(|(x, v)| *x -= c * v);
    }
}

fn lowest_modes(apply_a: &Apply<'_>, apply_b: &Apply<'_>, inv_prec: &[f64], k: usize, opts: &EigenOptions) -> Modes {
    let n = inv_prec.len();
    let mut found: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(k);
    let mut iterations = Vec::with_capacity(k);
    let mut converged = Vec::with_capacity(k);
    let mut tmp = vec![0.0; n];

    for mode in 0..k {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(mode as u64));
        let mut x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mut prev: Option<Vec<f64>> = None;
        let mut ok = false;
        let mut its = 0;
        // Two projection passes keep the deflation exact to roundoff.
        b_project(&mut x, &found);
        b_project(&mut x, &found);
        normalize_b(&mut x, apply_b, &mut tmp);
        while its < opts.max_iter {
            let mut ax = vec![0.0; n];
            let mut bx = vec![0.0; n];
            apply_a(&x, &mut ax);
            apply_b(&x, &mut bx);
            let lambda = dot(&x, &ax) / dot(&x, &bx);
            let r: Vec<f64> = ax.iter().zip(&bx).map(|(a, b)| a - lambda * b).collect();
            let scale = norm(&ax) + lambda.abs() * norm(&bx);
            if norm(&r) <= opts.tol * scale {
                ok = true;
                break;
            }
            its += 1;
            let w: Vec<f64> = r.iter().zip(inv_prec).map(|(r, m)| r * m).collect();

            // B-orthonormal basis of span{x, w, prev}, projected off found modes.
            let mut basis: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(3);
            let xb_norm = dot(&x, &bx).sqrt();
            basis.push((x.iter().map(|v| v / xb_norm).collect(), bx.iter().map(|v| v / xb_norm).collect()));
            for mut v in std::iter::once(w).chain(prev.take()) {
                apply_b(&v, &mut tmp);
                let before = dot(&v, &tmp);
                for _ in 0..2 {
                    b_project(&mut v, &found);
                    b_project(&mut v, &basis);
                }
                apply_b(&v, &mut tmp);
                let nb = dot(&v, &tmp);
                if !(nb > 1e-20 * before) {
                    continue;
                }
                let s = nb.sqrt();
                basis.push((v.iter().map(|e| e / s).collect(), tmp.iter().map(|e| e / s).collect()));
            }
            let m = basis.len();
            let a_basis: Vec<Vec<f64>> = basis
                .iter()
                .enumerate()
                .map(|(i, (v, _))| {
                    if i == 0 {
                        ax.iter().map(|a| a / xb_norm).collect()
                    } else {
                        let mut av = vec![0.0; n];
                        apply_a(v, &mut av);
                        av
                    }
                })
                .collect();
            let mut g = DMatrix::zeros(m, m);
            for i in 0..m {
                for j in 0..=i {
                    let v = 0.5 * (dot(&basis[i].0, &a_basis[j]) + dot(&basis[j].0, &a_basis[i]));
                    g[(i, j)] = v;
                    g[(j, i)] = v;
                }
            }
            let eig = SymmetricEigen::new(g);
            let idx = eig.eigenvalues.imin();
            let c = eig.eigenvectors.column(idx);
            let mut x_new = vec![0.0; n];
            let mut p_new = vec![0.0; n];
            for (i, (v, _)) in basis.iter().enumerate() {
                x_new.iter_mut().zip(v).for_each(|(x, v)| *x += c[i] * v);
                if i > 0 {
                    p_new.iter_mut().zip(v).for_each(|(p, v)| *p += c[i] * v);
                }
            }
            b_project(&mut x_new, &found);
            normalize_b(&mut x_new, apply_b, &mut tmp);
            x = x_new;
            prev = (m > 1).then_some(p_new);
        }
        iterations.push(its);
        converged.push(ok);
        let mut bx = vec![0.0; n];
        apply_b(&x, &mut bx);
        found.push((x, bx));
    }

    // Final Gram–Schmidt in the B-inner product, then Rayleigh quotients.
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut basis: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(k);
    for (mut v, _) in found {
        b_project(&mut v, &basis);
        b_project(&mut v, &basis);
        normalize_b(&mut v, apply_b, &mut tmp);
        let big = v.iter().fold(0.0f64, |m, &e| if e.abs() > m.abs() { e } else { m });
        if big < 0.0 {
            v.iter_mut().for_each(|e| *e = -*e);
        }
        let mut bv = vec![0.0; n];
        apply_b(&v, &mut bv);
        basis.push((v.clone(), bv));
        vectors.push(v);
    }
    let mut rows: Vec<(f64, f64, Vec<f64>, usize, bool)> = Vec::with_capacity(k);
    for ((v, (_, bv)), (its, ok)) in vectors.into_iter().zip(&basis).zip(iterations.into_iter().zip(converged)) {
        let mut av = vec![0.0; n];
        apply_a(&v, &mut av);
        let lambda = dot(&v, &av);
        let r: Vec<f64> = av.iter().zip(bv).map(|(a, b)| a - lambda * b).collect();
        let res = norm(&r) / (norm(&av) + lambda.abs() * norm(bv)).max(f64::MIN_POSITIVE);
        rows.push((lambda, res, v, its, ok));
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = Modes { values: vec![], vectors: vec![], residuals: vec![], iterations: vec![], converged: vec![] };
    for (l, r, v, i, c) in rows {
        out.values.push(l);
        out.residuals.push(r);
        out.vectors.push(v);
        out.iterations.push(i);
        out.converged.push(c);
    }
    out
}

fn normalize_b(x: &mut [f64], apply_b: &Apply<'_>, tmp: &mut [f64]) {
    apply_b(x, tmp);
    let s = dot(x, tmp).sqrt();
    if s > 0.0 {
        x.iter_mut().for_each(|v| *v /= s);
    }
}

/// L²-mass and W-mass spectra of the same stiffness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassComparison {
    pub l2: EigenResult,
    pub nonlocal_w: EigenResult,
    /// `|λ_i^L2 − λ_i^W| / λ_i^L2`.
    pub gaps: Vec<f64>,
}

pub fn compare_mass_models(stiffness: &EnergyOperator, w: WMass, k: usize, opts: &EigenOptions) -> Result<MassComparison> {
    let l2 = solve_eigen(&EigenProblem::l2(stiffness, k)?, opts)?;
    let nonlocal_w = solve_eigen(&EigenProblem::nonlocal_w(stiffness, w, k)?, opts)?;
    let gaps = l2
        .eigenvalues
        .iter()
        .zip(&nonlocal_w.eigenvalues)
        .map(|(a, b)| (a - b).abs() / a.abs())
        .collect();
    Ok(MassComparison { l2, nonlocal_w, gaps })
}

/// First `k` Dirichlet Laplacian eigenvalues of an interval or rectangle.
pub fn local_dirichlet_eigenvalues(shape: &Shape, k: usize) -> Result<Vec<f64>> {
    let pi2 = std::f64::consts::PI.powi(2);
    match shape {
        Shape::Interval([a, b]) => Ok((1..=k).map(|m| pi2 * (m * m) as f64 / (b - a).powi(2)).collect()),
        Shape::Rect([p, q]) => {
            let (lx, ly) = (q[0] - p[0], q[1] - p[1]);
            let mut all = Vec::with_capacity(k * k);
            for m in 1..=k {
                for n in 1..=k {
                    all.push(pi2 * ((m * m) as f64 / (lx * lx) + (n * n) as f64 / (ly * ly)));
                }
            }
            all.sort_by(f64::total_cmp);
            all.truncate(k);
            Ok(all)
        }
        Shape::Polygon(_) => Err(Error::Incompatible("no closed-form Dirichlet spectrum for polygons".into())),
    }
}

/// Dense generalized symmetric eigensolver, used as an oracle.
pub mod dense {
    use super::*;

    /// All eigenpairs of `Ax = λBx` with `B` positive definite, ascending,
    /// eigenvectors `B`-orthonormal.
    pub fn generalized_eigen(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(Vec<f64>, Vec<DVector<f64>>)> {
        let chol = b.clone().cholesky().ok_or(Error::MassIndefinite(f64::NAN))?;
        let l = chol.l();
        let linv = l.clone().try_inverse().ok_or(Error::MassIndefinite(f64::NAN))?;
        let c = &linv * a * linv.transpose();
        let c = (&c + c.transpose()) * 0.5;
        let eig = SymmetricEigen::new(c);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let lt_inv = linv.transpose();
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = order.iter().map(|&i| &lt_inv * eig.eigenvectors.column(i)).collect();
        Ok((values, vectors))
    }

    /// Dense solve of an [`EigenProblem`].
    pub fn solve(prob: &EigenProblem<'_>) -> Result<(Vec<f64>, Vec<DVector<f64>>)> {
        let (a, b) = prob.dense_pair()?;
        generalized_eigen(&a, &b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble, PenaltySpec};
    use crate::field::BoundaryData;
    use crate::geometry::{build_mesh, DomainMesh};
    use crate::kernel::{normalize_w, sigma_r, KernelSpec};
    use std::sync::Arc;

    fn interval_op(delta: f64, ratio: f64) -> EnergyOperator {
        let m = Arc::new(build_mesh(&Shape::unit_interval(), delta / ratio).unwrap());
        let z = BoundaryData::zeros(&m);
        assemble(&m, &KernelSpec::quartic(), &PenaltySpec::product(KernelSpec::quartic()), delta, 2.0, &z).unwrap()
    }

    #[test]
    fn interval_first_mode_near_pi_squared() {
        let sigma = sigma_r(&KernelSpec::quartic(), 2.0, 1).unwrap().value;
        let mut errs = Vec::new();
        for delta in [0.08, 0.04, 0.02] {
            let op = interval_op(delta, 4.0);
            let res = solve_eigen(&EigenProblem::l2(&op, 1).unwrap(), &EigenOptions::default()).unwrap();
            assert!(res.all_converged());
            errs.push((res.eigenvalues[0] / sigma - std::f64::consts::PI.powi(2)).abs() / std::f64::consts::PI.powi(2));
        }
        assert!(errs[2] < 0.1 && errs[2] < errs[1] && errs[1] < errs[0], "{errs:?}");
    }

    #[test]
    fn matches_dense_oracle_and_is_orthonormal() {
        let op = interval_op(0.04, 4.0);
        let prob = EigenProblem::l2(&op, 3).unwrap();
        let res = solve_eigen(&prob, &EigenOptions::default()).unwrap();
        let (vals, _) = dense::solve(&prob).unwrap();
        for i in 0..3 {
            assert!((res.eigenvalues[i] - vals[i]).abs() <= 1e-8 * vals[i], "{} vs {}", res.eigenvalues[i], vals[i]);
            for j in 0..3 {
                let ip = prob.mass_inner(&res.eigenfields[i], &res.eigenfields[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((ip - target).abs() <= 1e-8, "<{i},{j}> = {ip}");
            }
            let e = op.energy(&res.eigenfields[i]).unwrap();
            assert!((e - res.eigenvalues[i]).abs() <= 1e-8 * res.eigenvalues[i]);
        }
    }

    #[test]
    fn scaling_stiffness_scales_spectrum() {
        let op = interval_op(0.08, 4.0);
        let scaled = op.scaled(2.5);
        let a = solve_eigen(&EigenProblem::l2(&op, 2).unwrap(), &EigenOptions::default()).unwrap();
        let b = solve_eigen(&EigenProblem::l2(&scaled, 2).unwrap(), &EigenOptions::default()).unwrap();
        for i in 0..2 {
            assert!((b.eigenvalues[i] - 2.5 * a.eigenvalues[i]).abs() <= 1e-9 * b.eigenvalues[i]);
            let d = a.eigenfields[i].l2_distance(&b.eigenfields[i], op.mesh().weights());
            assert!(d < 1e-6, "{d}");
        }
    }

    #[test]
    fn identity_weight_mass_has_zero_gap() {
        let op = interval_op(0.08, 4.0);
        let w = WMass::identity_weights(op.mesh());
        let cmp = compare_mass_models(&op, w, 3, &EigenOptions::default()).unwrap();
        assert!(cmp.gaps.iter().all(|&g| g < 1e-9), "{:?}", cmp.gaps);
    }

    #[test]
    fn single_mode_is_mass_normalized() {
        let m = Arc::new(build_mesh(&Shape::unit_square(), 0.05).unwrap());
        let z = BoundaryData::zeros(&m);
        let op = assemble(&m, &KernelSpec::quartic(), &PenaltySpec::product(KernelSpec::quartic()), 0.2, 2.0, &z).unwrap();
        let prob = EigenProblem::l2(&op, 1).unwrap();
        let res = solve_eigen(&prob, &EigenOptions::default()).unwrap();
        let f = &res.eigenfields[0];
        assert!((prob.mass_inner(f, f) - 1.0).abs() <= 1e-10);
        let big = f.values().iter().fold(0.0f64, |m, &v| if v.abs() > m.abs() { v } else { m });
        assert!(big > 0.0);
    }

    #[test]
    fn affine_stiffness_rejected() {
        let m = Arc::new(build_mesh(&Shape::unit_interval(), 0.02).unwrap());
        let a = BoundaryData::new(vec![0.0, 1.0]);
        let op = assemble(&m, &KernelSpec::quartic(), &PenaltySpec::product(KernelSpec::quartic()), 0.08, 2.0, &a).unwrap();
        assert!(matches!(EigenProblem::l2(&op, 1), Err(Error::AffineStiffness)));
    }

    #[test]
    fn indefinite_w_mass_rejected() {
        let m: Arc<DomainMesh> = Arc::new(build_mesh(&Shape::unit_interval(), 0.02).unwrap());
        let z = BoundaryData::zeros(&m);
        let op = assemble(&m, &KernelSpec::quartic(), &PenaltySpec::product(KernelSpec::quartic()), 0.08, 2.0, &z).unwrap();
        let (w, _) = normalize_w(&KernelSpec::quartic(), 1).unwrap();
        let err = EigenProblem::nonlocal_w(&op, WMass::new(&m, &w, 0.08), 1).unwrap_err();
        assert!(matches!(err, Error::MassIndefinite(v) if v < 0.0));
        let (w, _) = normalize_w(&KernelSpec::wendland(), 1).unwrap();
        assert!(EigenProblem::nonlocal_w(&op, WMass::new(&m, &w, 0.08), 1).is_ok());
    }

    #[test]
    fn local_spectra() {
        let pi2 = std::f64::consts::PI.powi(2);
        let v = local_dirichlet_eigenvalues(&Shape::unit_interval(), 3).unwrap();
        assert_eq!(v, vec![pi2, 4.0 * pi2, 9.0 * pi2]);
        let v = local_dirichlet_eigenvalues(&Shape::unit_square(), 4).unwrap();
        assert_eq!(v, vec![2.0 * pi2, 5.0 * pi2, 5.0 * pi2, 8.0 * pi2]);
    }
}
