//! Property tests for the invariants that hold for every path, field and
//! cloud, not just the worked examples in the unit tests.

use nlrd_core::attractor::{
    absorbing_radius, ic_ensemble, pullback_attractor_sample, pullback_window, semidistance_fields, PullbackSettings,
    RadiusFormula,
};
use nlrd_core::conjugate::{AuxSource, AuxiliaryProcess};
use nlrd_core::ensemble::Pool;
use nlrd_core::galerkin::{eigenvalue, lp_norm};
use nlrd_core::noise::StationaryNoise;
use nlrd_core::solver::Drive;
use nlrd_core::{Field, ModelSpec, NoiseKind, NoiseVariant, WienerPath, LAMBDA_1};
use proptest::prelude::*;

const H: f64 = 1.0 / 1024.0;

fn variant() -> impl Strategy<Value = NoiseVariant> {
    prop_oneof![
        Just(NoiseVariant::Ou),
        Just(NoiseVariant::MollifierDerivative),
        Just(NoiseVariant::DifferenceQuotient),
    ]
}

/// A grid time `k·h` with `k` drawn from `range`.
fn grid_time(range: std::ops::RangeInclusive<i64>) -> impl Strategy<Value = f64> {
    range.prop_map(|k| k as f64 * H)
}

fn field(n: usize) -> impl Strategy<Value = Field> {
    prop::collection::vec(-3.0f64..3.0, n).prop_map(Field::from_coeffs)
}

fn cloud(n: usize) -> impl Strategy<Value = Vec<Field>> {
    prop::collection::vec(field(4), 1..n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shifts_compose(seed in 0u64..1000, a in grid_time(-2048..=2048), b in grid_time(-1024..=1024)) {
        let p = WienerPath::sample(seed, -4.0, 4.0, H).unwrap();
        let once = p.shift(a + b).unwrap();
        let twice = p.shift(a).unwrap().shift(b).unwrap();
        prop_assert_eq!(once.zero_index(), twice.zero_index());
        for (x, y) in once.values().iter().zip(twice.values()) {
            prop_assert!((x - y).abs() <= 1e-12, "{} vs {}", x, y);
        }
    }

    #[test]
    fn growth_bound_holds_on_the_grid(seed in 0u64..1000, t in grid_time(-2048..=2048)) {
        let p = WienerPath::sample(seed, -4.0, 4.0, H).unwrap();
        let c = p.growth_constant().c_omega;
        for i in 0..p.len() {
            prop_assert!(p.values()[i].abs() / (p.time(i).abs() + 1.0) <= c);
        }
        // |ω(t+s) − ω(t)| ≤ C(|t+s|+1) + C(|t|+1) ≤ 2C(|t|+1)(|s|+1).
        let shifted = p.shift(t).unwrap().growth_constant().c_omega;
        prop_assert!(shifted <= 2.0 * c * (t.abs() + 1.0) * (1.0 + 1e-12));
    }

    #[test]
    fn noise_is_linear_in_the_path(
        v in variant(),
        k in 4u32..7,
        s1 in 0u64..500,
        s2 in 500u64..1000,
        alpha in -2.0f64..2.0,
        beta in -2.0f64..2.0,
        t in grid_time(-1024..=1024),
    ) {
        let noise = NoiseKind::new(v, 0.5f64.powi(k as i32)).unwrap();
        let p1 = WienerPath::sample(s1, -8.0, 2.0, H).unwrap();
        let p2 = WienerPath::sample(s2, -8.0, 2.0, H).unwrap();
        let mix = WienerPath::combine(alpha, &p1, beta, &p2).unwrap();
        let lhs = noise.eval(&mix, t).unwrap();
        let rhs = alpha * noise.eval(&p1, t).unwrap() + beta * noise.eval(&p2, t).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn noise_commutes_with_shifts(
        v in variant(),
        k in 4u32..7,
        seed in 0u64..1000,
        s in grid_time(-1024..=1024),
        t in grid_time(-1024..=1024),
    ) {
        let noise = NoiseKind::new(v, 0.5f64.powi(k as i32)).unwrap();
        let p = WienerPath::sample(seed, -10.0, 4.0, H).unwrap();
        let shifted = p.shift(s).unwrap();
        let a = noise.eval(&shifted, t).unwrap();
        let b = noise.eval(&p, s + t).unwrap();
        prop_assert!((a - b).abs() <= 1e-10, "{} vs {}", a, b);
    }

    #[test]
    fn aux_processes_are_stationary_and_linear_in_epsilon(
        v in variant(),
        seed in 0u64..1000,
        eps in 0.01f64..1.0,
        additive in any::<bool>(),
        s in grid_time(-512..=512),
        t in grid_time(-512..=512),
    ) {
        let noise = NoiseKind::new(v, 0.125).unwrap();
        let proc = if additive {
            AuxiliaryProcess::additive(AuxSource::Noise(noise), eps, Field::mode(4, 1, 1.0), 1.0).unwrap()
        } else {
            AuxiliaryProcess::multiplicative(AuxSource::Noise(noise), eps).unwrap()
        };
        let p = WienerPath::sample(seed, -50.0, 3.0, H).unwrap();
        let a = proc.scalar(&p.shift(s).unwrap(), t).unwrap();
        let b = proc.scalar(&p, s + t).unwrap();
        prop_assert!((a - b).abs() <= 1e-10, "{} vs {}", a, b);
        let doubled = proc.with_epsilon(2.0 * eps).scalar(&p, t).unwrap();
        let single = proc.scalar(&p, t).unwrap();
        prop_assert!((doubled - 2.0 * single).abs() <= 1e-12 * (1.0 + single.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn poincare_inequality(u in field(12)) {
        let l2 = u.l2_norm_sq();
        let h1 = u.h1_norm_sq();
        prop_assert!(LAMBDA_1 * l2 <= h1 * (1.0 + 1e-12) + 1e-300);
        let direct: f64 = u.coeffs.iter().enumerate().map(|(k, c)| eigenvalue(k + 1) * c * c).sum();
        prop_assert!((h1 - direct).abs() <= 1e-12 * direct.max(1.0));
    }

    #[test]
    fn first_mode_attains_poincare(a in -5.0f64..5.0, n in 1usize..20) {
        let u = Field::mode(n, 1, a);
        prop_assert!((u.h1_norm_sq() - LAMBDA_1 * u.l2_norm_sq()).abs() <= 1e-12 * (1.0 + u.h1_norm_sq()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn semidistance_triangle(a in cloud(12), b in cloud(12), c in cloud(12)) {
        let ab = semidistance_fields(&a, &b).unwrap();
        let bc = semidistance_fields(&b, &c).unwrap();
        let ac = semidistance_fields(&a, &c).unwrap();
        prop_assert!(ac <= ab + bc + 1e-12, "{} > {} + {}", ac, ab, bc);
        prop_assert_eq!(semidistance_fields(&a, &a).unwrap(), 0.0);
    }
}

#[test]
fn samples_give_the_same_l2_norm_as_coefficients() {
    let u = Field::from_coeffs(vec![0.3, -1.2, 0.0, 2.5, 0.7]);
    for n_grid in [10, 16, 31, 64, 200] {
        let from_samples = lp_norm(&u, 2.0, n_grid).unwrap();
        assert!((from_samples - u.l2_norm()).abs() < 1e-13, "n_grid {n_grid}");
    }
}

#[test]
fn quadrature_refines_at_second_order() {
    // ∫₀¹ √2 |sin πx| dx = 2√2/π; the kink-free integrand gives O(n⁻²).
    let exact = 2.0 * 2f64.sqrt() / std::f64::consts::PI;
    let e1 = Field::mode(1, 1, 1.0);
    let errs: Vec<f64> = [16, 32, 64, 128]
        .iter()
        .map(|&n| (lp_norm(&e1, 1.0, n).unwrap() - exact).abs())
        .collect();
    for w in errs.windows(2) {
        let rate = (w[0] / w[1]).log2();
        assert!(rate >= 1.9, "rate {rate}, errors {errs:?}");
    }
}

#[test]
fn radius_is_nondecreasing_in_epsilon() {
    let noise = NoiseKind::difference_quotient(0.0625).unwrap();
    let base = ModelSpec::default_additive();
    let formula = RadiusFormula::for_spec(&base).unwrap();
    for seed in [1, 2, 3] {
        let p = WienerPath::sample(seed, -60.0, 2.0, H).unwrap();
        let radii: Vec<f64> = [0.0, 0.05, 0.1, 0.2, 0.4, 0.8]
            .iter()
            .map(|&epsilon| {
                let spec = ModelSpec { epsilon, ..base.clone() };
                absorbing_radius(&spec, &p, Some(&noise), formula).unwrap().r_squared
            })
            .collect();
        assert!(radii.windows(2).all(|w| w[1] >= w[0]), "seed {seed}: {radii:?}");
    }
}

#[test]
fn pullback_clouds_rerun_bit_exactly() {
    let spec = ModelSpec::default_additive();
    let settings = PullbackSettings::new(vec![1.0, 2.0]).with_dt(H).with_modes(8).with_tol(1e-3);
    let noise = NoiseKind::mollifier(0.125).unwrap();
    let (a, b) = pullback_window(&spec, &settings, 0.125);
    let p = WienerPath::sample(5, (a / H).floor() * H, (b / H).ceil() * H, H).unwrap();
    let ics = ic_ensemble(8, 10, 2.0, 5);
    let run = |pool: &Pool| {
        pullback_attractor_sample(&spec, Some(&p), Drive::Stationary(&noise), &settings, &ics, pool).unwrap()
    };
    let first = run(&Pool::serial());
    assert_eq!(first, run(&Pool::serial()));
    assert_eq!(first, run(&Pool::new(3)));
}
