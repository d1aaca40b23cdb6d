mod common;

use common::*;
use nldir::assembly::Mollifier;
use nldir::geometry::{neighbor_pairs, Shape};
use nldir::kernel::antiderivative_kernel;
use nldir::{assemble, BoundaryData, Field, KernelSpec, PenaltySpec, PenaltyVariant};
use proptest::prelude::*;

fn quartic_spec(variant: PenaltyVariant) -> PenaltySpec {
    PenaltySpec::new(variant, KernelSpec::quartic())
}

#[test]
fn all_variants_match_the_double_loop() {
    let q = KernelSpec::quartic();
    let cases = [(Shape::unit_interval(), 0.02, 0.07), (Shape::unit_square(), 0.1, 0.25), (pentagon(), 0.125, 0.3)];
    let mut r = rng(1);
    for (shape, h, delta) in cases {
        let m = mesh(shape, h);
        assert!(m.len() <= 100);
        for variant in PenaltyVariant::ALL {
            let ps: &[f64] = if variant.quadratic_only() { &[2.0] } else { &[2.0, 3.0, 1.5] };
            for &p in ps {
                let u = uniform_field(&mut r, m.len());
                let a = if variant.zero_data_only() { BoundaryData::zeros(&m) } else { uniform_data(&mut r, m.boundary_len()) };
                let op = assemble(&m, &q, &quartic_spec(variant), delta, p, &a).unwrap();
                let bi = brute_interior(&m, delta, p, u.values());
                let bp = brute_penalty(&m, variant, delta, p, u.values(), a.values());
                assert!(rel(op.interior_energy(&u).unwrap(), bi) <= 1e-12, "{variant} p={p}");
                assert!(rel(op.penalty_energy(&u).unwrap(), bp) <= 1e-12, "{variant} p={p}");
            }
        }
    }
}

#[test]
fn library_antiderivatives_match_closed_forms() {
    let rbar = antiderivative_kernel(&KernelSpec::quartic());
    let rbarbar = antiderivative_kernel(&rbar);
    for i in 0..=40 {
        let s = i as f64 / 32.0;
        assert!((rbar.profile(s) - quartic_bar(s)).abs() < 1e-15);
        assert!((rbarbar.profile(s) - quartic_bar_bar(s)).abs() < 1e-15);
    }
}

#[test]
fn penalty_vanishes_away_from_the_collar() {
    let q = KernelSpec::quartic();
    let mut r = rng(2);
    for (shape, h, delta) in [(Shape::unit_interval(), 0.01, 0.05), (Shape::unit_square(), 0.025, 0.1), (pentagon(), 0.025, 0.1)] {
        let m = mesh(shape, h);
        let mut u = uniform_field(&mut r, m.len());
        for (v, &x) in u.values_mut().iter_mut().zip(m.positions()) {
            if m.distance_to_boundary(x).unwrap() <= delta * (1.0 + 1e-9) {
                *v = 0.0;
            }
        }
        assert!(u.values().iter().any(|&v| v != 0.0));
        for variant in PenaltyVariant::ALL {
            let op = assemble(&m, &q, &quartic_spec(variant), delta, 2.0, &BoundaryData::zeros(&m)).unwrap();
            assert_eq!(op.penalty_energy(&u).unwrap(), 0.0, "{variant}");
        }
    }
}

/// Weighted L² norm of `Σ_j q_j R_δ(|x_i − x_j|)(u_i − u_j)` for `u = sin(πx)`.
fn first_variation_residual(h: f64, delta: f64) -> f64 {
    let m = mesh(Shape::unit_interval(), h);
    let k = KernelSpec::quartic().at_horizon(delta, 1);
    let table = neighbor_pairs(&m, k.radius());
    let x = m.positions();
    let u: Vec<f64> = x.iter().map(|p| (std::f64::consts::PI * p[0]).sin()).collect();
    let mut s = 0.0;
    for i in 0..m.len() {
        let ri: f64 = table.neighbors(i).iter().map(|&j| m.weights()[j] * k.eval((x[i][0] - x[j][0]).abs()) * (u[i] - u[j])).sum();
        s += m.weights()[i] * ri * ri;
    }
    s.sqrt()
}

#[test]
fn first_variation_of_smooth_field_vanishes() {
    let res: Vec<f64> = [0.2, 0.1, 0.05, 0.025].iter().map(|&d| first_variation_residual(d / 4.0, d)).collect();
    assert!(res.windows(2).all(|w| w[1] < w[0]), "{res:?}");
}

/// `δ ‖ũ'‖ / E^(1/p)` maximized over a few fields, with `ũ'` from finite
/// differences on the interval nodes.
fn mollifier_gradient_constant(delta: f64, p: f64) -> f64 {
    let m = mesh(Shape::unit_interval(), delta / 4.0);
    let q = KernelSpec::quartic();
    let op = assemble(&m, &q, &PenaltySpec::product(q.clone()), delta, p, &BoundaryData::zeros(&m)).unwrap();
    let moll = Mollifier::new(&m, &q, delta).unwrap();
    let mut r = rng(3);
    let pi = std::f64::consts::PI;
    let mut fields = vec![Field::sample(&m, |x| (pi * x[0]).sin()), Field::sample(&m, |x| (6.0 * pi * x[0]).cos())];
    fields.extend((0..4).map(|_| uniform_field(&mut r, m.len())));
    let h = m.h();
    fields
        .iter()
        .map(|u| {
            let (ut, _) = moll.apply(u).unwrap();
            let v = ut.values();
            let grad: f64 = (1..v.len() - 1).map(|i| ((v[i + 1] - v[i - 1]) / (2.0 * h)).abs().powf(p) * h).sum();
            delta * grad.powf(1.0 / p) / op.interior_energy(u).unwrap().powf(1.0 / p)
        })
        .fold(0.0, f64::max)
}

#[test]
fn mollified_gradient_is_controlled_by_the_energy() {
    for p in [2.0, 3.0] {
        let c: Vec<f64> = [0.2, 0.1, 0.05].iter().map(|&d| mollifier_gradient_constant(d, p)).collect();
        assert!(c.iter().all(|v| v.is_finite() && *v > 0.0));
        assert!(c.windows(2).all(|w| w[1] <= 1.25 * w[0]), "p={p}: {c:?}");
    }
}

#[test]
fn boundary_trace_of_smooth_field_approaches_its_values() {
    let q = KernelSpec::quartic();
    let errs: Vec<f64> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&d| {
            let m = mesh(Shape::unit_square(), d / 4.0);
            let u = Field::sample(&m, |x| x[0] * x[0] - x[1] * x[1]);
            let a = BoundaryData::sample(&m, |x| x[0] * x[0] - x[1] * x[1]);
            let (_, ub) = Mollifier::new(&m, &q, d).unwrap().apply(&u).unwrap();
            ub.l2_distance(&a, m.boundary_weights())
        })
        .collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}

/// Values on a 1/1024 grid, so that adding a grid constant is exact.
fn dyadic(r: &mut impl rand::Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.random_range(-1024i32..=1024) as f64 / 1024.0).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn interior_energy_ignores_constants(seed in any::<u64>(), shift in -64i32..64, p in prop::sample::select(vec![1.5, 2.0, 3.0])) {
        let m = mesh(Shape::unit_square(), 0.1);
        let q = KernelSpec::quartic();
        let op = assemble(&m, &q, &PenaltySpec::product(q.clone()), 0.25, p, &BoundaryData::zeros(&m)).unwrap();
        let u = dyadic(&mut rng(seed), m.len());
        let c = shift as f64 / 1024.0;
        let shifted = Field::new(u.iter().map(|v| v + c).collect());
        prop_assert_eq!(op.interior_energy(&Field::new(u)).unwrap(), op.interior_energy(&shifted).unwrap());
    }

    #[test]
    fn product_penalty_depends_on_differences(seed in any::<u64>(), c in -3.0f64..3.0) {
        let m = mesh(Shape::unit_interval(), 0.05);
        let q = KernelSpec::quartic();
        let mut r = rng(seed);
        let u = uniform_field(&mut r, m.len());
        let a = uniform_data(&mut r, m.boundary_len());
        let op = assemble(&m, &q, &PenaltySpec::product(q.clone()), 0.15, 2.0, &a).unwrap();
        let base = op.penalty_energy(&u).unwrap();
        let moved = op
            .penalty_energy_with(&Field::new(u.values().iter().map(|v| v + c).collect()), &a.shifted(c))
            .unwrap();
        prop_assert!(rel(base, moved) <= 1e-10, "{} vs {}", base, moved);
    }
}
