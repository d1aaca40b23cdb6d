//! Oracles and generators shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use nldir::geometry::{build_mesh, DomainMesh, Shape};
use nldir::{BoundaryData, Field, PenaltyVariant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn mesh(shape: Shape, h: f64) -> Arc<DomainMesh> {
    Arc::new(build_mesh(&shape, h).unwrap())
}

pub fn pentagon() -> Shape {
    Shape::Polygon(vec![[0.0, 0.0], [1.0, 0.0], [1.2, 0.6], [0.5, 1.1], [-0.2, 0.6]])
}

pub fn uniform_field(rng: &mut ChaCha8Rng, n: usize) -> Field {
    Field::new((0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
}

pub fn uniform_data(rng: &mut ChaCha8Rng, n: usize) -> BoundaryData {
    BoundaryData::new((0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Quartic `(1 − s)₊²` and its first two antiderivatives in closed form.
pub fn quartic(s: f64) -> f64 {
    if s < 1.0 {
        (1.0 - s).powi(2)
    } else {
        0.0
    }
}

pub fn quartic_bar(s: f64) -> f64 {
    if s < 1.0 {
        (1.0 - s).powi(3) / 3.0
    } else {
        0.0
    }
}

pub fn quartic_bar_bar(s: f64) -> f64 {
    if s < 1.0 {
        (1.0 - s).powi(4) / 12.0
    } else {
        0.0
    }
}

/// `δ^(−d) f(ρ²/δ²)`.
pub fn scaled(f: fn(f64) -> f64, delta: f64, dim: usize, rho: f64) -> f64 {
    f(rho * rho / (delta * delta)) / delta.powi(dim as i32)
}

/// All-pairs interior energy with the quartic kernel.
pub fn brute_interior(m: &DomainMesh, delta: f64, p: f64, u: &[f64]) -> f64 {
    let x = m.positions();
    let q = m.weights();
    let mut e = 0.0;
    for i in 0..m.len() {
        for j in 0..m.len() {
            if i != j {
                e += q[i] * q[j] * scaled(quartic, delta, m.dim(), dist(x[i], x[j])) * (u[i] - u[j]).abs().powf(p);
            }
        }
    }
    e / delta.powf(p)
}

/// All-pairs penalty with the quartic interior and penalty kernels.
pub fn brute_penalty(m: &DomainMesh, variant: PenaltyVariant, delta: f64, p: f64, u: &[f64], a: &[f64]) -> f64 {
    let x = m.positions();
    let q = m.weights();
    let d = m.dim();
    let mut total = 0.0;
    for (b, &xb) in m.boundary_positions().iter().enumerate() {
        let wb = m.boundary_weights()[b];
        let k = |f: fn(f64) -> f64, j: usize| q[j] * scaled(f, delta, d, dist(xb, x[j]));
        total += match variant {
            PenaltyVariant::Product => {
                let s: f64 = (0..m.len()).map(|j| k(quartic, j) * (a[b] - u[j])).sum();
                wb / delta.powf(p) * s.abs().powf(p)
            }
            PenaltyVariant::Pointwise | PenaltyVariant::DiracDiagonal => {
                (0..m.len()).map(|j| wb / delta.powf(p) * k(quartic, j) * (u[j] - a[b]).abs().powf(p)).sum()
            }
            PenaltyVariant::Wang => {
                let omega: f64 = (0..m.len()).map(|j| k(quartic_bar_bar, j)).sum();
                let s: f64 = (0..m.len()).map(|j| k(quartic_bar, j) * (a[b] - u[j])).sum();
                2.0 * wb / (delta * delta * omega) * s * s
            }
            PenaltyVariant::Shi => {
                // Boundary nodes sit on the boundary, so μ = δ².
                let pref = 4.0 * wb / (delta * delta);
                (0..m.len()).map(|j| pref * k(quartic_bar, j) * (u[j] - a[b]).powi(2)).sum()
            }
        };
    }
    total
}
