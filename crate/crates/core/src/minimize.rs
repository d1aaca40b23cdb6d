//! Minimizers of assembled energies.
//!
//! Both solvers start from zero and declare convergence when
//! `‖∇F(u)‖ ≤ tol · (1 + |F(u)|)`. The quadratic solver runs Jacobi-
//! preconditioned conjugate gradients on `Au = ℓ`; the general solver runs
//! L-BFGS preconditioned by the diagonal of the `p = 2` form, with Armijo
//! backtracking.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::assembly::EnergyOperator;
use crate::error::{Error, Result};
use crate::field::Field;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    /// Relative gradient target, in `(0, 1)`.
    pub tol: f64,
    pub max_iter: usize,
    /// Seed for randomized starts (used by the eigen solver).
    pub seed: u64,
    /// Sufficient-decrease constant of the line search.
    pub armijo: f64,
    /// Step reduction factor of the line search.
    pub backtrack: f64,
    /// Correction pairs kept by L-BFGS.
    pub history: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-10, max_iter: 20_000, seed: 0, armijo: 1e-4, backtrack: 0.5, history: 10 }
    }
}

impl SolveOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: String| Err(Error::InvalidArgument { name, reason });
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return bad("tol", format!("must lie in (0, 1), got {}", self.tol));
        }
        if self.max_iter == 0 {
            return bad("max_iter", "must be at least 1".into());
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0) {
            return bad("armijo", format!("must lie in (0, 1), got {}", self.armijo));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return bad("backtrack", format!("must lie in (0, 1), got {}", self.backtrack));
        }
        if self.history == 0 {
            return bad("history", "must be at least 1".into());
        }
        Ok(())
    }
}

/// Why a solve stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIterations,
    LineSearchFailed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub minimizer: Field,
    pub energy: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stop: StopReason,
    /// Energy after every iteration, starting with the initial guess.
    pub energy_trace: Vec<f64>,
    /// Largest weighted `‖u‖_p` over all iterates.
    pub max_iterate_norm: f64,
}

/// Multiple of `ε|F|` below which energy differences are treated as roundoff.
const NOISE_BAND: f64 = 1e3;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn converged(gnorm: f64, energy: f64, tol: f64) -> bool {
    gnorm <= tol * (1.0 + energy.abs())
}

/// Conjugate gradients on `Au = ℓ` for a `p = 2` operator.
///
/// A non-positive curvature `dᵀAd ≤ 0` along a nonzero search direction is an
/// error. If the budget runs out, the last (lowest-energy) iterate is returned
/// unconverged.
pub fn solve_quadratic(op: &EnergyOperator, opts: &SolveOptions) -> Result<SolveResult> {
    opts.validate()?;
    let n = op.len();
    let ell = op.ell()?.to_vec();
    let c0 = op.c0()?;
    let weights = op.mesh().weights().to_vec();
    let inv_diag: Vec<f64> = op.p2_diagonal().iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect();

    let mut u = vec![0.0; n];
    let mut r = ell.clone();
    let mut au = vec![0.0; n];
    let mut ad = vec![0.0; n];
    let mut trace = vec![c0];
    let mut max_norm = 0.0f64;
    let mut iterations = 0;
    let lp = |u: &[f64]| Field::new(u.to_vec()).lp_norm(&weights, 2.0);

    // Outer restarts refresh the recursively updated residual.
    'restart: loop {
        let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, m)| r * m).collect();
        let mut d = z.clone();
        let mut rz = dot(&r, &z);
        loop {
            let energy = c0 - dot(&ell, &u) - dot(&r, &u);
            if converged(2.0 * norm(&r), energy, opts.tol) {
                op.apply_a(&u, &mut au)?;
                r = ell.iter().zip(&au).map(|(l, a)| l - a).collect();
                let energy = c0 - dot(&ell, &u) - dot(&r, &u);
                if converged(2.0 * norm(&r), energy, opts.tol) || iterations >= opts.max_iter {
                    break 'restart;
                }
                continue 'restart;
            }
            if iterations >= opts.max_iter {
                break 'restart;
            }
            op.apply_a(&d, &mut ad)?;
            let curvature = dot(&d, &ad);
            if !(curvature > 0.0) {
                return Err(Error::Indefinite { iteration: iterations, curvature, direction_norm: norm(&d) });
            }
            let alpha = rz / curvature;
            for i in 0..n {
                u[i] += alpha * d[i];
                r[i] -= alpha * ad[i];
            }
            iterations += 1;
            trace.push(c0 - dot(&ell, &u) - dot(&r, &u));
            max_norm = max_norm.max(lp(&u));
            z = r.iter().zip(&inv_diag).map(|(r, m)| r * m).collect();
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                d[i] = z[i] + beta * d[i];
            }
        }
    }

    let minimizer = Field::new(u);
    let energy = op.energy(&minimizer)?;
    let gradient_norm = norm(op.gradient(&minimizer)?.values());
    let ok = converged(gradient_norm, energy, opts.tol) || converged(2.0 * norm(&r), energy, opts.tol);
    Ok(SolveResult {
        minimizer,
        energy,
        gradient_norm,
        iterations,
        converged: ok,
        stop: if ok { StopReason::Converged } else { StopReason::MaxIterations },
        energy_trace: trace,
        max_iterate_norm: max_norm,
    })
}

/// Preconditioned L-BFGS with Armijo backtracking for any `p > 1`.
///
/// Steps satisfy sufficient decrease while the energy can resolve it. Once
/// the predicted decrease is within `NOISE_BAND·ε|F|` of roundoff, a step is
/// accepted if `∇F(u + αd)ᵀd ≤ 0`; by convexity this still guarantees
/// `F(u + αd) ≤ F(u)`, so computed energies can only rise by roundoff.
pub fn solve_p_energy(op: &EnergyOperator, opts: &SolveOptions) -> Result<SolveResult> {
    opts.validate()?;
    let n = op.len();
    let p = op.p();
    let weights = op.mesh().weights().to_vec();
    let inv_diag: Vec<f64> = op.p2_diagonal().iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect();

    let mut u = vec![0.0; n];
    let mut g = vec![0.0; n];
    op.gradient_into(&u, &mut g);
    let mut energy = op.energy_unchecked(&u);
    let mut trace = vec![energy];
    let mut max_norm = 0.0f64;
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.history);
    let mut gamma = 1.0;
    let mut iterations = 0;
    let mut stop = StopReason::MaxIterations;

    let mut trial = vec![0.0; n];
    let mut g_trial = vec![0.0; n];
    while iterations < opts.max_iter {
        let gnorm = norm(&g);
        if converged(gnorm, energy, opts.tol) {
            stop = StopReason::Converged;
            break;
        }

        let mut d = two_loop(&g, &history, &inv_diag, gamma);
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            history.clear();
            d = g.iter().zip(&inv_diag).map(|(g, m)| -g * m).collect();
            slope = dot(&g, &d);
        }

        let mut alpha = 1.0;
        let noise = NOISE_BAND * f64::EPSILON * energy.abs();
        let accepted = loop {
            for i in 0..n {
                trial[i] = u[i] + alpha * d[i];
            }
            if trial == u {
                break None;
            }
            let e_trial = op.energy_unchecked(&trial);
            if e_trial <= energy + opts.armijo * alpha * slope {
                op.gradient_into(&trial, &mut g_trial);
                break Some(e_trial);
            }
            if opts.armijo * alpha * slope.abs() <= noise {
                // The energy no longer resolves the predicted decrease.
                op.gradient_into(&trial, &mut g_trial);
                if dot(&g_trial, &d) <= 0.0 {
                    break Some(e_trial);
                }
            }
            alpha *= opts.backtrack;
            if alpha < 1e-20 {
                break None;
            }
        };
        let Some(e_new) = accepted else {
            stop = StopReason::LineSearchFailed;
            break;
        };

        let s: Vec<f64> = trial.iter().zip(&u).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_trial.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            let yhy: f64 = y.iter().zip(&inv_diag).map(|(y, m)| y * y * m).sum();
            if yhy > 0.0 {
                gamma = sy / yhy;
            }
            if history.len() == opts.history {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        std::mem::swap(&mut u, &mut trial);
        std::mem::swap(&mut g, &mut g_trial);
        energy = e_new;
        iterations += 1;
        trace.push(energy);
        max_norm = max_norm.max(Field::new(u.clone()).lp_norm(&weights, p));
    }
    if stop == StopReason::MaxIterations && converged(norm(&g), energy, opts.tol) {
        stop = StopReason::Converged;
    }

    let gradient_norm = norm(&g);
    Ok(SolveResult {
        minimizer: Field::new(u),
        energy,
        gradient_norm,
        iterations,
        converged: stop == StopReason::Converged,
        stop,
        energy_trace: trace,
        max_iterate_norm: max_norm,
    })
}

/// L-BFGS direction `−H g` with initial inverse Hessian `γ D⁻¹`.
fn two_loop(g: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>, inv_diag: &[f64], gamma: f64) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(q, y)| *q -= a * y);
        alphas.push(a);
    }
    let scale = if history.is_empty() { 1.0 } else { gamma };
    let mut r: Vec<f64> = q.iter().zip(inv_diag).map(|(q, m)| scale * q * m).collect();
    for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &r);
        r.iter_mut().zip(s).for_each(|(r, s)| *r += (a - b) * s);
    }
    r.iter_mut().for_each(|v| *v = -*v);
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble, PenaltySpec, PenaltyVariant};
    use crate::field::BoundaryData;
    use crate::geometry::{build_mesh, DomainMesh, Shape};
    use crate::kernel::KernelSpec;
    use std::sync::Arc;

    fn interval(h: f64) -> Arc<DomainMesh> {
        Arc::new(build_mesh(&Shape::unit_interval(), h).unwrap())
    }

    fn op(m: &Arc<DomainMesh>, variant: PenaltyVariant, delta: f64, p: f64, a: &BoundaryData) -> EnergyOperator {
        assemble(m, &KernelSpec::quartic(), &PenaltySpec::new(variant, KernelSpec::quartic()), delta, p, a).unwrap()
    }

    #[test]
    fn zero_data_gives_zero_minimizer() {
        let m = interval(0.025);
        let z = BoundaryData::zeros(&m);
        for variant in PenaltyVariant::ALL {
            let res = solve_quadratic(&op(&m, variant, 0.1, 2.0, &z), &SolveOptions::default()).unwrap();
            assert!(res.converged);
            assert!(res.minimizer.values().iter().all(|&v| v == 0.0));
            assert_eq!(res.energy, 0.0);
        }
        let res = solve_p_energy(&op(&m, PenaltyVariant::Product, 0.1, 3.0, &z), &SolveOptions::default()).unwrap();
        assert!(res.converged && res.energy == 0.0);
    }

    #[test]
    fn linear_data_gives_near_linear_minimizer() {
        let m = interval(0.025);
        let a = BoundaryData::new(vec![0.0, 1.0]);
        let o = op(&m, PenaltyVariant::Product, 0.1, 2.0, &a);
        let res = solve_quadratic(&o, &SolveOptions::default()).unwrap();
        assert!(res.converged, "{:?}", res.gradient_norm);
        let exact = Field::sample(&m, |x| x[0]);
        assert!(res.minimizer.l2_distance(&exact, m.weights()) < 0.05);

        // dense direct solve of the same system
        let a_dense = o.dense_a().unwrap();
        let rhs = nalgebra::DVector::from_column_slice(o.ell().unwrap());
        let direct = a_dense.cholesky().unwrap().solve(&rhs);
        let diff: f64 = direct.iter().zip(res.minimizer.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-8, "{diff}");
    }

    #[test]
    fn scaled_operator_has_same_minimizer() {
        let m = interval(0.025);
        let a = BoundaryData::new(vec![0.3, 1.0]);
        let o = op(&m, PenaltyVariant::Product, 0.1, 2.0, &a);
        let opts = SolveOptions::default();
        let u1 = solve_quadratic(&o, &opts).unwrap().minimizer;
        let u2 = solve_quadratic(&o.scaled(3.7), &opts).unwrap().minimizer;
        assert!(u1.l2_distance(&u2, m.weights()) < 1e-8);
    }

    #[test]
    fn p3_linear_limit() {
        let m = interval(0.025);
        let a = BoundaryData::new(vec![0.0, 1.0]);
        let res = solve_p_energy(&op(&m, PenaltyVariant::Product, 0.1, 3.0, &a), &SolveOptions::default()).unwrap();
        assert!(res.converged, "{:?} {}", res.stop, res.gradient_norm);
        let exact = Field::sample(&m, |x| x[0]);
        assert!(res.minimizer.l2_distance(&exact, m.weights()) < 0.05);
        assert!(res.energy_trace.windows(2).all(|w| w[1] <= w[0] + 10.0 * f64::EPSILON * w[0].abs()));
    }

    #[test]
    fn lbfgs_agrees_with_cg_at_p2() {
        let m = interval(0.025);
        let a = BoundaryData::new(vec![0.0, 1.0]);
        let o = op(&m, PenaltyVariant::Product, 0.1, 2.0, &a);
        let opts = SolveOptions::default();
        let cg = solve_quadratic(&o, &opts).unwrap();
        let lb = solve_p_energy(&o, &opts).unwrap();
        assert!(cg.converged && lb.converged);
        let diff = cg.minimizer.l2_distance(&lb.minimizer, m.weights());
        assert!(diff <= 10.0 * opts.tol, "{diff}");
    }

    #[test]
    fn solves_are_deterministic() {
        let m = interval(0.025);
        let a = BoundaryData::new(vec![0.0, 1.0]);
        let o = op(&m, PenaltyVariant::Product, 0.1, 3.0, &a);
        let r1 = solve_p_energy(&o, &SolveOptions::default()).unwrap();
        let r2 = solve_p_energy(&o, &SolveOptions::default()).unwrap();
        assert_eq!(r1.iterations, r2.iterations);
        assert_eq!(r1.minimizer, r2.minimizer);
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let m = interval(0.025);
        let a = BoundaryData::new(vec![0.0, 1.0]);
        let o = op(&m, PenaltyVariant::Product, 0.1, 2.0, &a);
        let res = solve_quadratic(&o, &SolveOptions::default().with_max_iter(2)).unwrap();
        assert!(!res.converged);
        assert_eq!(res.stop, StopReason::MaxIterations);
        assert_eq!(res.iterations, 2);
        let res = solve_p_energy(&o.with_data(&a).unwrap(), &SolveOptions::default().with_max_iter(2)).unwrap();
        assert!(!res.converged);
    }

    #[test]
    fn invalid_options_rejected() {
        let m = interval(0.025);
        let o = op(&m, PenaltyVariant::Product, 0.1, 2.0, &BoundaryData::zeros(&m));
        assert!(solve_quadratic(&o, &SolveOptions::default().with_tol(1.5)).is_err());
        assert!(solve_quadratic(&o, &SolveOptions::default().with_max_iter(0)).is_err());
        let p3 = op(&m, PenaltyVariant::Product, 0.1, 3.0, &BoundaryData::zeros(&m));
        assert!(matches!(solve_quadratic(&p3, &SolveOptions::default()), Err(Error::NotQuadratic(_))));
    }
}
