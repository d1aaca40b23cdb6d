//! Radial kernel profiles and the constants derived from them.
//!
//! A kernel is stored as its *profile* `s ↦ K(s)`, where `s` is the squared
//! scaled radius. The scaled kernel used at horizon `δ` in dimension `d` is
//!
//! ```text
//! K_δ(ρ) = δ^(-d) · K(ρ² / δ²)
//! ```
//!
//! and vanishes for `ρ > r·δ`, where `r` is the kernel's support radius in the
//! unscaled variable (so the profile vanishes for `s > r²`).
//!
//! Profiles are piecewise sums of shifted power terms `c·|s − s₀|^e`. That
//! family is closed under `s ↦ ∫_s^∞ K`, so antiderivative kernels (and their
//! antiderivatives) stay exact.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of grid points a single quadrature estimate may use.
pub const QUADRATURE_BUDGET: usize = 10_000_000;
/// Relative agreement between successive Richardson estimates.
pub const QUADRATURE_RTOL: f64 = 1e-8;

/// `coef · |s − shift|^exp`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerTerm {
    pub coef: f64,
    pub shift: f64,
    pub exp: f64,
}

impl PowerTerm {
    pub fn new(coef: f64, shift: f64, exp: f64) -> Self {
        PowerTerm { coef, shift, exp }
    }

    fn constant(coef: f64) -> Self {
        PowerTerm { coef, shift: 0.0, exp: 0.0 }
    }

    #[inline]
    fn eval(&self, s: f64) -> f64 {
        let base = (s - self.shift).abs();
        let pow = if self.exp == 0.0 {
            1.0
        } else if self.exp.fract() == 0.0 && self.exp.abs() < 64.0 {
            base.powi(self.exp as i32)
        } else {
            base.powf(self.exp)
        };
        self.coef * pow
    }
}

/// One smooth piece of a profile on `[lo, hi]`. A piece never straddles the
/// shift of one of its terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub terms: Vec<PowerTerm>,
}

impl Piece {
    #[inline]
    fn eval(&self, s: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(s)).sum()
    }

    /// `∫_s^hi` of this piece, as a new piece.
    fn integral_to_hi(&self) -> Piece {
        let mut constant = 0.0;
        let mut terms = Vec::with_capacity(self.terms.len() + 1);
        let mid = 0.5 * (self.lo + self.hi);
        for t in &self.terms {
            let e1 = t.exp + 1.0;
            let at_hi = (self.hi - t.shift).abs().powf(e1) / e1;
            if mid <= t.shift {
                // falling base: |t - shift| = shift - t
                terms.push(PowerTerm::new(t.coef / e1, t.shift, e1));
                constant -= t.coef * at_hi;
            } else {
                terms.push(PowerTerm::new(-t.coef / e1, t.shift, e1));
                constant += t.coef * at_hi;
            }
        }
        terms.push(PowerTerm::constant(constant));
        Piece { lo: self.lo, hi: self.hi, terms }
    }

    fn full_integral(&self) -> f64 {
        self.integral_to_hi().eval(self.lo)
    }
}

/// A radial kernel profile with compact support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    label: String,
    pieces: Vec<Piece>,
    /// Support radius `r` in the unscaled variable; the profile vanishes for `s > r²`.
    support: f64,
}

impl KernelSpec {
    /// Builds a kernel from explicit pieces. Pieces must be contiguous,
    /// start at `s = 0` and end at or before `support²`.
    pub fn from_pieces(label: impl Into<String>, pieces: Vec<Piece>, support: f64) -> Result<Self> {
        if !(support > 0.0 && support.is_finite()) {
            return Err(Error::InvalidArgument {
                name: "support",
                reason: format!("support radius must be positive, got {support}"),
            });
        }
        let mut cursor = 0.0;
        for piece in &pieces {
            if piece.lo != cursor || !(piece.hi > piece.lo) {
                return Err(Error::InvalidArgument {
                    name: "pieces",
                    reason: format!("pieces must tile [0, r²] in order; got [{}, {}] after {cursor}", piece.lo, piece.hi),
                });
            }
            cursor = piece.hi;
        }
        if cursor > support * support * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument {
                name: "pieces",
                reason: format!("pieces extend to {cursor}, beyond r² = {}", support * support),
            });
        }
        Ok(KernelSpec { label: label.into(), pieces, support })
    }

    /// `(1 − s)₊²`, the quartic kernel `(1 − |z|²)²` in the radial variable.
    pub fn quartic() -> Self {
        KernelSpec {
            label: "quartic".into(),
            pieces: vec![Piece { lo: 0.0, hi: 1.0, terms: vec![PowerTerm::new(1.0, 1.0, 2.0)] }],
            support: 1.0,
        }
    }

    /// `(1 − s)₊³`.
    pub fn cubic() -> Self {
        KernelSpec {
            label: "cubic".into(),
            pieces: vec![Piece { lo: 0.0, hi: 1.0, terms: vec![PowerTerm::new(1.0, 1.0, 3.0)] }],
            support: 1.0,
        }
    }

    /// Wendland's `(1 − r)⁴(4r + 1)` written in `s = r²`. C¹ in `s`, and a
    /// positive definite radial function for `d ≤ 3`, so its W-form is
    /// positive definite on any node set.
    pub fn wendland() -> Self {
        let terms = vec![
            PowerTerm::new(1.0, 0.0, 0.0),
            PowerTerm::new(-10.0, 0.0, 1.0),
            PowerTerm::new(20.0, 0.0, 1.5),
            PowerTerm::new(-15.0, 0.0, 2.0),
            PowerTerm::new(4.0, 0.0, 2.5),
        ];
        KernelSpec { label: "wendland".into(), pieces: vec![Piece { lo: 0.0, hi: 1.0, terms }], support: 1.0 }
    }

    /// `(c₁/c₂²)(s − c₂)²` on `[0, c₂]`, zero beyond: the lower-bound kernel
    /// used to certify coercivity of the diagonal penalty.
    pub fn corollary(c1: f64, c2: f64) -> Result<Self> {
        if !(c1 > 0.0 && c2 > 0.0) {
            return Err(Error::InvalidArgument {
                name: "corollary",
                reason: format!("c1 and c2 must be positive, got {c1}, {c2}"),
            });
        }
        Ok(KernelSpec {
            label: format!("corollary:{c1},{c2}"),
            pieces: vec![Piece { lo: 0.0, hi: c2, terms: vec![PowerTerm::new(c1 / (c2 * c2), c2, 2.0)] }],
            support: c2.sqrt(),
        })
    }

    /// The zero profile on the unit ball.
    pub fn zero() -> Self {
        KernelSpec {
            label: "zero".into(),
            pieces: vec![Piece { lo: 0.0, hi: 1.0, terms: vec![] }],
            support: 1.0,
        }
    }

    /// Piecewise-linear interpolant of samples `(s_i, v_i)`. `s` must be
    /// strictly increasing; if `s₀ > 0` the first value is held on `[0, s₀]`.
    pub fn tabulated(label: impl Into<String>, s: &[f64], v: &[f64]) -> Result<Self> {
        let label = label.into();
        if s.len() != v.len() || s.len() < 2 {
            return Err(Error::InvalidArgument {
                name: "tabulated",
                reason: format!("need at least two (s, value) pairs of equal length, got {} and {}", s.len(), v.len()),
            });
        }
        if s[0] < 0.0 || s.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument {
                name: "tabulated",
                reason: "s must be nonnegative and strictly increasing".into(),
            });
        }
        let mut pieces = Vec::with_capacity(s.len());
        if s[0] > 0.0 {
            pieces.push(Piece { lo: 0.0, hi: s[0], terms: vec![PowerTerm::constant(v[0])] });
        }
        for i in 0..s.len() - 1 {
            let slope = (v[i + 1] - v[i]) / (s[i + 1] - s[i]);
            pieces.push(Piece {
                lo: s[i],
                hi: s[i + 1],
                terms: vec![PowerTerm::constant(v[i]), PowerTerm::new(slope, s[i], 1.0)],
            });
        }
        let support = s[s.len() - 1].sqrt();
        KernelSpec::from_pieces(label, pieces, support)
    }

    /// Reads a two-column CSV `(s, value)`. A non-numeric first row is
    /// treated as a header.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|source| Error::Csv { path: path.to_owned(), source })?;
        let mut s = Vec::new();
        let mut v = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|source| Error::Csv { path: path.to_owned(), source })?;
            if record.len() != 2 {
                return Err(Error::Tabulated {
                    path: path.to_owned(),
                    reason: format!("row {} has {} columns, expected 2", row + 1, record.len()),
                });
            }
            let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
            match parsed {
                (Ok(a), Ok(b)) => {
                    s.push(a);
                    v.push(b);
                }
                _ if row == 0 => continue,
                _ => {
                    return Err(Error::Tabulated {
                        path: path.to_owned(),
                        reason: format!("row {} is not numeric", row + 1),
                    })
                }
            }
        }
        let label = format!("tabulated:{}", path.display());
        KernelSpec::tabulated(label, &s, &v).map_err(|e| Error::Tabulated { path: path.to_owned(), reason: e.to_string() })
    }

    /// Resolves a catalog id: `quartic`, `cubic`, `wendland`,
    /// `corollary:<c1>,<c2>` or `tabulated:<path>`.
    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "quartic" => Ok(Self::quartic()),
            "cubic" => Ok(Self::cubic()),
            "wendland" => Ok(Self::wendland()),
            "zero" => Ok(Self::zero()),
            _ => {
                if let Some(rest) = id.strip_prefix("corollary:") {
                    let mut it = rest.split(',').map(|x| x.trim().parse::<f64>());
                    match (it.next(), it.next(), it.next()) {
                        (Some(Ok(c1)), Some(Ok(c2)), None) => Self::corollary(c1, c2),
                        _ => Err(Error::UnknownKernel(id.to_owned())),
                    }
                } else if let Some(path) = id.strip_prefix("tabulated:") {
                    Self::from_csv(Path::new(path))
                } else {
                    Err(Error::UnknownKernel(id.to_owned()))
                }
            }
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Support radius `r` in the unscaled variable.
    pub fn support(&self) -> f64 {
        self.support
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Profile value at squared radius `s`. Zero beyond `r²`.
    #[inline]
    pub fn profile(&self, s: f64) -> f64 {
        let s = s.max(0.0);
        let idx = self.pieces.partition_point(|p| p.hi < s);
        match self.pieces.get(idx) {
            Some(piece) => piece.eval(s),
            None => 0.0,
        }
    }

    /// The kernel with every value multiplied by `c`.
    pub fn scaled_by(&self, c: f64) -> KernelSpec {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece {
                lo: p.lo,
                hi: p.hi,
                terms: p.terms.iter().map(|t| PowerTerm::new(t.coef * c, t.shift, t.exp)).collect(),
            })
            .collect();
        let label = if c == 1.0 { self.label.clone() } else { format!("{}*{c}", self.label) };
        KernelSpec { label, pieces, support: self.support }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Scaled kernel at horizon `delta` in dimension `dim`.
    pub fn at_horizon(&self, delta: f64, dim: usize) -> ScaledKernel {
        ScaledKernel::new(self.clone(), delta, dim)
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// `K_δ(ρ) = δ^(-d) K(ρ²/δ²)`.
#[derive(Clone, Debug)]
pub struct ScaledKernel {
    base: KernelSpec,
    delta: f64,
    dim: usize,
    prefactor: f64,
    radius: f64,
}

impl ScaledKernel {
    /// # Panics
    /// If `delta` is not positive or `dim` is zero.
    pub fn new(base: KernelSpec, delta: f64, dim: usize) -> Self {
        assert!(delta > 0.0, "horizon must be positive");
        assert!(dim >= 1, "dimension must be positive");
        let prefactor = delta.powi(-(dim as i32));
        let radius = base.support * delta;
        ScaledKernel { base, delta, dim, prefactor, radius }
    }

    pub fn base(&self) -> &KernelSpec {
        &self.base
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Interaction radius `r·δ`.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    #[inline]
    pub fn eval(&self, rho: f64) -> f64 {
        if rho > self.radius {
            return 0.0;
        }
        let s = (rho * rho) / (self.delta * self.delta);
        self.prefactor * self.base.profile(s)
    }

    /// Same as [`eval`](Self::eval) with the squared distance supplied.
    #[inline]
    pub fn eval_sq(&self, rho_sq: f64) -> f64 {
        if rho_sq > self.radius * self.radius {
            return 0.0;
        }
        self.prefactor * self.base.profile(rho_sq / (self.delta * self.delta))
    }
}

/// Free-function form of [`ScaledKernel::eval`].
pub fn eval_scaled(k: &ScaledKernel, rho: f64) -> f64 {
    k.eval(rho)
}

/// A quadrature value with its error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub value: f64,
    /// Difference between the last two Richardson estimates.
    pub abs_error: f64,
    /// Grid points per axis in the finest midpoint rule used.
    pub points_per_axis: usize,
}

/// `∫_{ℝ^d} K(|z|²) |z·e_axis|^exponent dz` over the support ball, by composite
/// midpoint rules on tensor grids, Richardson-extrapolated under grid
/// doubling until successive extrapolations agree to [`QUADRATURE_RTOL`].
pub fn ball_moment(k: &KernelSpec, dim: usize, exponent: f64, axis: usize) -> Result<Quadrature> {
    ball_moment_with_budget(k, dim, exponent, axis, QUADRATURE_BUDGET)
}

pub fn ball_moment_with_budget(
    k: &KernelSpec,
    dim: usize,
    exponent: f64,
    axis: usize,
    budget: usize,
) -> Result<Quadrature> {
    if dim == 0 || axis >= dim {
        return Err(Error::InvalidArgument {
            name: "axis",
            reason: format!("axis {axis} is not a coordinate of dimension {dim}"),
        });
    }
    let mut n = 8usize;
    let mut prev_mid: Option<f64> = None;
    let mut prev_rich: Option<f64> = None;
    let mut last_two = (f64::NAN, f64::NAN);
    loop {
        let total = n.checked_pow(dim as u32).unwrap_or(usize::MAX);
        if total > budget {
            return Err(Error::QuadratureBudget { budget, previous: last_two.0, last: last_two.1 });
        }
        let mid = midpoint_moment(k, dim, exponent, axis, n);
        if let Some(pm) = prev_mid {
            let rich = (4.0 * mid - pm) / 3.0;
            if let Some(pr) = prev_rich {
                let diff = (rich - pr).abs();
                if diff <= QUADRATURE_RTOL * rich.abs() || (rich == 0.0 && pr == 0.0) {
                    return Ok(Quadrature { value: rich, abs_error: diff, points_per_axis: n });
                }
            }
            last_two = (prev_rich.unwrap_or(f64::NAN), rich);
            prev_rich = Some(rich);
        }
        prev_mid = Some(mid);
        n *= 2;
    }
}

/// Midpoint rule with `n` cells per axis on `[-r, r]^d`. The integrand is even
/// in every coordinate, so only the positive orthant is visited.
fn midpoint_moment(k: &KernelSpec, dim: usize, exponent: f64, axis: usize, n: usize) -> f64 {
    let r = k.support();
    let h = 2.0 * r / n as f64;
    let half = n / 2;
    let centers: Vec<f64> = (0..half).map(|i| (i as f64 + 0.5) * h).collect();
    let weight_of = |c: f64| if exponent == 0.0 { 1.0 } else { c.powf(exponent) };
    let axis_weights: Vec<f64> = centers.iter().map(|&c| weight_of(c)).collect();

    // Odometer over the orthant; dim is small.
    let mut idx = vec![0usize; dim];
    let mut sum = 0.0;
    'outer: loop {
        let s: f64 = idx.iter().map(|&i| centers[i] * centers[i]).sum();
        sum += k.profile(s) * axis_weights[idx[axis]];
        for slot in idx.iter_mut() {
            *slot += 1;
            if *slot < half {
                continue 'outer;
            }
            *slot = 0;
        }
        break;
    }
    sum * (2.0 * h).powi(dim as i32)
}

/// `σ_R = ∫_{ℝ^d} R(|z|²) |z·e₁|^p dz`.
pub fn sigma_r(k: &KernelSpec, p: f64, dim: usize) -> Result<Quadrature> {
    sigma_r_along(k, p, dim, 0)
}

/// `σ_R` with `e₁` replaced by the coordinate axis `axis`.
pub fn sigma_r_along(k: &KernelSpec, p: f64, dim: usize, axis: usize) -> Result<Quadrature> {
    if !(p > 1.0) {
        return Err(Error::InvalidArgument { name: "p", reason: format!("exponent must exceed 1, got {p}") });
    }
    ball_moment(k, dim, p, axis)
}

/// `∫_{ℝ^d} K(|z|²) dz`.
pub fn kernel_mass(k: &KernelSpec, dim: usize) -> Result<Quadrature> {
    ball_moment(k, dim, 0.0, 0)
}

/// The antiderivative profile `s ↦ ∫_s^∞ K(t) dt`, in closed form. Applying it
/// twice gives the doubly integrated kernel.
pub fn antiderivative_kernel(k: &KernelSpec) -> KernelSpec {
    let mut pieces: Vec<Piece> = k.pieces.iter().map(Piece::integral_to_hi).collect();
    // Add the mass of every later piece to each piece's constant term.
    let mut tail = 0.0;
    for (piece, orig) in pieces.iter_mut().zip(&k.pieces).rev() {
        if let Some(c) = piece.terms.last_mut() {
            c.coef += tail;
        }
        tail += orig.full_integral();
    }
    KernelSpec { label: format!("bar({})", k.label), pieces, support: k.support }
}

/// Rescales `k` so that `∫_{ℝ^d} W(|z|²) dz = 1`. Returns the normalized kernel
/// and the factor applied.
pub fn normalize_w(k: &KernelSpec, dim: usize) -> Result<(KernelSpec, f64)> {
    let mass = kernel_mass(k, dim)?.value;
    if !(mass > 0.0) {
        return Err(Error::ZeroMass(k.label.clone()));
    }
    let factor = 1.0 / mass;
    let label = format!("normalized({})", k.label.trim_start_matches("normalized(").trim_end_matches(')'));
    Ok((k.scaled_by(factor).with_label(label), factor))
}

/// Kernel condition checked by [`validate_kernel`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    /// Profile is nonnegative.
    Nonnegative,
    /// (K1) proxy: continuous profile, including `K(r²) = 0` at the support edge.
    K1Continuity,
    /// (K2) monotonically nonincreasing.
    K2Monotone,
    /// (K3) zero beyond the declared support.
    K3Support,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Nonnegative => "nonnegativity",
            Condition::K1Continuity => "(K1) continuity",
            Condition::K2Monotone => "(K2) monotonicity",
            Condition::K3Support => "(K3) compact support",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub condition: Condition,
    pub passed: bool,
    /// `s` at the first violating sample.
    pub first_violation: Option<f64>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub label: String,
    pub samples: usize,
    pub checks: Vec<ConditionCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> impl Iterator<Item = &ConditionCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, condition: Condition) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.condition == condition)
    }

    /// `Err(KernelInvalid)` naming every failed condition.
    pub fn into_result(self) -> Result<Self> {
        if self.passed() {
            Ok(self)
        } else {
            let failed = self.failed().map(|c| c.condition.to_string()).collect::<Vec<_>>().join(", ");
            Err(Error::KernelInvalid { label: self.label, failed })
        }
    }
}

/// Samples the profile on `[0, 1.5 r²]` and checks nonnegativity, (K1)
/// continuity, (K2) monotonicity and (K3) support. Failures are report
/// entries, not errors.
pub fn validate_kernel(k: &KernelSpec, samples: usize) -> Result<ValidationReport> {
    if samples < 2 {
        return Err(Error::InvalidArgument { name: "samples", reason: format!("need at least 2 samples, got {samples}") });
    }
    let r2 = k.support * k.support;
    let grid = |n: usize| -> Vec<(f64, f64)> {
        (0..n)
            .map(|i| {
                let s = r2 * i as f64 / (n - 1) as f64;
                (s, k.profile(s))
            })
            .collect()
    };
    let inside = grid(samples);
    let scale = inside.iter().map(|&(_, v)| v.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let tol = 1e-12 * scale;

    let first = |pred: &dyn Fn(usize) -> bool, n: usize| (0..n).find(|&i| pred(i));

    let neg = first(&|i| inside[i].1 < -tol, inside.len());
    let nonneg = ConditionCheck {
        condition: Condition::Nonnegative,
        passed: neg.is_none(),
        first_violation: neg.map(|i| inside[i].0),
        detail: neg.map_or_else(String::new, |i| format!("profile({}) = {}", inside[i].0, inside[i].1)),
    };

    let inc = first(&|i| i + 1 < inside.len() && inside[i + 1].1 > inside[i].1 + tol, inside.len());
    let mono = ConditionCheck {
        condition: Condition::K2Monotone,
        passed: inc.is_none(),
        first_violation: inc.map(|i| inside[i + 1].0),
        detail: inc.map_or_else(String::new, |i| {
            format!("profile increases from {} to {} on [{}, {}]", inside[i].1, inside[i + 1].1, inside[i].0, inside[i + 1].0)
        }),
    };

    // Beyond the support: the profile must vanish.
    let outside: Vec<(f64, f64)> = (1..samples)
        .map(|i| {
            let s = r2 * (1.0 + 0.5 * i as f64 / (samples - 1) as f64);
            (s, k.profile(s))
        })
        .collect();
    let leak = outside.iter().find(|&&(_, v)| v.abs() > tol);
    let support = ConditionCheck {
        condition: Condition::K3Support,
        passed: leak.is_none(),
        first_violation: leak.map(|&(s, _)| s),
        detail: leak.map_or_else(String::new, |&(s, v)| format!("profile({s}) = {v} beyond r² = {r2}")),
    };

    // Continuity: largest sample increment must shrink under refinement, and
    // the profile must reach zero at the support edge.
    let fine = grid(2 * samples - 1);
    let max_step = |g: &[(f64, f64)]| -> (f64, usize) {
        g.windows(2)
            .enumerate()
            .map(|(i, w)| ((w[1].1 - w[0].1).abs(), i))
            .fold((0.0, 0), |acc, x| if x.0 > acc.0 { x } else { acc })
    };
    let (coarse_step, _) = max_step(&inside);
    let (fine_step, fine_at) = max_step(&fine);
    let edge = k.profile(r2);
    let jump = fine_step > 1e-9 * scale && fine_step > 0.75 * coarse_step;
    let continuity = if edge.abs() > 1e-9 * scale {
        ConditionCheck {
            condition: Condition::K1Continuity,
            passed: false,
            first_violation: Some(r2),
            detail: format!("profile(r²) = {edge}, expected 0 at the support edge"),
        }
    } else if jump {
        ConditionCheck {
            condition: Condition::K1Continuity,
            passed: false,
            first_violation: Some(fine[fine_at].0),
            detail: format!("jump of {fine_step} near s = {} does not shrink under refinement", fine[fine_at].0),
        }
    } else {
        ConditionCheck { condition: Condition::K1Continuity, passed: true, first_violation: None, detail: String::new() }
    };

    Ok(ValidationReport { label: k.label.clone(), samples, checks: vec![nonneg, continuity, mono, support] })
}
