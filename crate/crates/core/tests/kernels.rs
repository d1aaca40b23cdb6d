use nldir::kernel::{antiderivative_kernel, kernel_mass, normalize_w, sigma_r, sigma_r_along, KernelSpec};
use proptest::prelude::*;

fn catalog() -> Vec<KernelSpec> {
    vec![KernelSpec::quartic(), KernelSpec::cubic(), KernelSpec::wendland(), KernelSpec::corollary(0.5, 0.5).unwrap()]
}

/// Midpoint sum of `f` on `[0, b]` with `n` cells.
fn midpoint(f: impl Fn(f64) -> f64, b: f64, n: usize) -> f64 {
    let h = b / n as f64;
    (0..n).map(|i| f((i as f64 + 0.5) * h)).sum::<f64>() * h
}

/// Mass of `K_δ` over its support ball, integrated in radial form.
fn scaled_mass(k: &KernelSpec, delta: f64, dim: usize) -> f64 {
    let sk = k.at_horizon(delta, dim);
    let n = 200_000;
    match dim {
        1 => 2.0 * midpoint(|r| sk.eval(r), sk.radius(), n),
        _ => 2.0 * std::f64::consts::PI * midpoint(|r| sk.eval(r) * r, sk.radius(), n),
    }
}

#[test]
fn sigma_matches_riemann_sums() {
    // 1D: ∫_{-1}^{1} (1 − z²)² z² dz with 10⁶ cells; 2D in polar form.
    let one = 2.0 * midpoint(|z| (1.0 - z * z).powi(2) * z * z, 1.0, 1_000_000);
    let two = std::f64::consts::PI * midpoint(|r| (1.0 - r * r).powi(2) * r.powi(3), 1.0, 1_000_000);
    assert!((one - 16.0 / 105.0).abs() < 1e-11);
    assert!((two - std::f64::consts::PI / 24.0).abs() < 1e-11);
    let q = KernelSpec::quartic();
    assert!((sigma_r(&q, 2.0, 1).unwrap().value - one).abs() <= 1e-6 * one);
    assert!((sigma_r(&q, 2.0, 2).unwrap().value - two).abs() <= 1e-6 * two);
    // p = 3 in 1D: 2∫₀¹ (1 − z²)² z³ dz = 2(1/4 − 1/3 + 1/8) = 1/12.
    assert!((sigma_r(&q, 3.0, 1).unwrap().value - 1.0 / 12.0).abs() <= 1e-6 / 12.0);
}

#[test]
fn sigma_is_the_same_along_every_axis() {
    for k in catalog() {
        for p in [2.0, 3.0] {
            let a = sigma_r_along(&k, p, 2, 0).unwrap();
            let b = sigma_r_along(&k, p, 2, 1).unwrap();
            assert!((a.value - b.value).abs() <= a.abs_error + b.abs_error + 1e-12, "{}", k.label());
        }
    }
}

#[test]
fn normalized_mass_kernel_has_unit_mass_at_every_horizon() {
    for dim in [1, 2] {
        let (w, _) = normalize_w(&KernelSpec::wendland(), dim).unwrap();
        for delta in [0.3, 0.05] {
            assert!((scaled_mass(&w, delta, dim) - 1.0).abs() < 1e-6);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mass_is_invariant_under_rescaling(i in 0usize..4, dim in 1usize..=2, d1 in 0.01f64..2.0, d2 in 0.01f64..2.0) {
        let k = &catalog()[i];
        let exact = kernel_mass(k, dim).unwrap().value;
        for delta in [d1, d2] {
            prop_assert!((scaled_mass(k, delta, dim) - exact).abs() <= 1e-6 * exact);
        }
    }

    #[test]
    fn sigma_is_homogeneous(i in 0usize..4, c in 0.01f64..100.0, dim in 1usize..=2) {
        let k = &catalog()[i];
        let base = sigma_r(k, 2.0, dim).unwrap().value;
        let scaled = sigma_r(&k.scaled_by(c), 2.0, dim).unwrap().value;
        prop_assert!((scaled - c * base).abs() <= 1e-12 * c * base);
    }

    #[test]
    fn antiderivatives_decrease_to_zero(i in 0usize..4, s in 0.0f64..2.0, ds in 0.0f64..0.5) {
        let k = &catalog()[i];
        let bar = antiderivative_kernel(k);
        let r2 = k.support() * k.support();
        prop_assert!(bar.profile(s + ds) <= bar.profile(s) + 1e-15);
        prop_assert!(bar.profile(s) >= 0.0);
        if s > r2 {
            prop_assert_eq!(bar.profile(s), 0.0);
        }
    }
}
