//! Property tests of the scaling laws, rescalings, the region model, the
//! random sampler and the split-step flow.

use std::f64::consts::PI;
use std::sync::OnceLock;

use cqlab_core::branch::{default_omegas, locate_special_points, sweep};
use cqlab_core::dynamics::{step, NaiveSineTransform, RadialField};
use cqlab_core::functionals::{coercivity_identity, evaluate, RadialFunction};
use cqlab_core::region::{build_region, d_function, RegionModel};
use cqlab_core::rescale::{dilate_functionals, mass_preserving_dilation, relative_virial, rescale_to_zero_virial, rescaled_family};
use cqlab_core::sampling::{trial_rng, BumpSet, MAX_BOOST, MAX_CENTER, MAX_WIDTH, MIN_WIDTH};
use cqlab_core::shooting::ShootingOptions;
use cqlab_core::FunctionalSet;
use num_complex::Complex64;
use proptest::prelude::*;

fn model() -> &'static RegionModel {
    static MODEL: OnceLock<RegionModel> = OnceLock::new();
    MODEL.get_or_init(|| {
        let opts = ShootingOptions::default();
        let omegas: Vec<f64> = default_omegas().into_iter().step_by(2).collect();
        let mut t = sweep(&omegas, &opts);
        t.special_points = Some(locate_special_points(&t, &opts).unwrap());
        t.insert_special_rows();
        build_region(&t, &rescaled_family(&t).unwrap()).unwrap()
    })
}

fn gaussian(a: f64, s: f64) -> RadialFunction {
    RadialFunction::sample(s / 80.0, 800, |r| Complex64::new(a * (-(r / s).powi(2)).exp(), 0.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dilation_matches_quadrature(a in 0.2f64..2.0, s in 1.0f64..4.0, lambda in 0.5f64..2.0) {
        let u = gaussian(a, s);
        let scaled = dilate_functionals(&evaluate(&u).unwrap(), 1.3, lambda);
        let direct = evaluate(&u.dilate(1.3, lambda)).unwrap();
        for (x, y) in scaled.integrals().iter().zip(direct.integrals()) {
            prop_assert!((x - y).abs() <= 1e-8 * y.abs(), "{x} vs {y}");
        }
    }

    #[test]
    fn mass_preserving_dilation_keeps_mass(m in 1.0f64..300.0, g in 0.1f64..50.0, l4 in 0.1f64..50.0, l6 in 0.1f64..50.0, lambda in 0.1f64..10.0) {
        let fs = FunctionalSet::from_integrals(m, g, l4, l6);
        let d = mass_preserving_dilation(&fs, lambda);
        prop_assert_eq!(d.mass, m);
        prop_assert!(d.is_consistent());
    }

    #[test]
    fn zero_virial_rescaling_posts(g in 0.1f64..10.0, l6 in 0.1f64..10.0, excess in 0.01f64..10.0) {
        // choose L4 so that V = G + L6 - (3/4)L4 < 0
        let l4 = (g + l6) * (1.0 + excess) / 0.75;
        let fs = FunctionalSet::from_integrals(50.0, g, l4, l6);
        let (lambda, out) = rescale_to_zero_virial(&fs).unwrap();
        prop_assert!(lambda > 1.0);
        prop_assert!(relative_virial(&out).abs() < 1e-10);
        prop_assert!(out.beta >= 1.0 / 3.0 - 1e-12);
        prop_assert!(out.energy < fs.energy);
        prop_assert!(out.kinetic > fs.kinetic);
        prop_assert_eq!(out.mass, fs.mass);
    }

    #[test]
    fn sampler_respects_ranges(seed in any::<u64>(), index in any::<u64>(), boosted in any::<bool>()) {
        let b = BumpSet::random(&mut trial_rng(seed, index), boosted);
        prop_assert!((1..=4).contains(&b.bumps.len()));
        for x in &b.bumps {
            prop_assert!(x.amplitude > 0.0 && x.amplitude <= 1.0);
            prop_assert!((0.0..=MAX_CENTER).contains(&x.center));
            prop_assert!(x.width >= MIN_WIDTH * (1.0 - 1e-12) && x.width <= MAX_WIDTH * (1.0 + 1e-12));
            prop_assert!((0.0..2.0 * PI).contains(&x.phase));
        }
        prop_assert!((0.0..=MAX_BOOST).contains(&b.boost));
        prop_assert!(boosted || b.boost == 0.0);
        prop_assert_eq!(b, BumpSet::random(&mut trial_rng(seed, index), boosted));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn coercivity_identity_on_random_data(seed in any::<u64>(), boosted in any::<bool>()) {
        let (u, fs) = BumpSet::random(&mut trial_rng(seed, 0), boosted).evaluate().unwrap();
        prop_assert!(coercivity_identity(&u, &fs) < 1e-10);
    }

    #[test]
    fn split_step_is_unitary(a in 0.1f64..1.0, s in 1.0f64..5.0, chirp in 0.0f64..2.0) {
        let n = 1024;
        let tr = NaiveSineTransform::new(n - 1);
        let mut f = RadialField::from_fn(40.0, n, |r| Complex64::from_polar(a * (-(r / s).powi(2)).exp(), chirp * r * r));
        let norm = |f: &RadialField| f.w.iter().map(|w| w.norm_sqr()).sum::<f64>();
        let (l0, m0) = (norm(&f), f.observables().mass);
        for _ in 0..5 {
            step(&mut f, 1e-3, &tr).unwrap();
        }
        let (l1, m1) = (norm(&f), f.observables().mass);
        prop_assert!(((l1 - l0) / l0).abs() < 1e-13, "{l0} -> {l1}");
        prop_assert!(((m1 - m0) / m0).abs() < 1e-10, "{m0} -> {m1}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distance_shrinks_toward_the_complement(m in 1.0f64..240.0, e in 0.01f64..3.0, dm in 0.0f64..50.0, de in 0.0f64..1.0) {
        let model = model();
        prop_assume!(model.contains(m, e).unwrap());
        let (m2, e2) = ((m - dm).max(0.5), (e - de).max(0.005));
        let (near, _) = model.distance_to_complement(m, e);
        let (far, _) = model.distance_to_complement(m2, e2);
        prop_assert!(far >= near, "dist({m2}, {e2}) = {far} < dist({m}, {e}) = {near}");
    }

    #[test]
    fn d_is_monotone(m in 1.0f64..240.0, e in 0.01f64..3.0, dm in 0.0f64..50.0, de in 0.0f64..1.0) {
        let model = model();
        prop_assume!(model.contains(m, e).unwrap());
        let (m2, e2) = ((m - dm).max(0.5), (e - de).max(0.005));
        let upper = d_function(m, e, model).unwrap().value;
        let lower = d_function(m2, e2, model).unwrap().value;
        prop_assert!(lower <= upper, "D({m2}, {e2}) = {lower} > D({m}, {e}) = {upper}");
    }
}

#[test]
fn d_spot_values() {
    let model = model();
    let d = |m, e| d_function(m, e, model).unwrap().value;
    assert_eq!(d(0.0, 0.0), 0.0);
    assert!(d(100.0, 1.0) < d(120.0, 1.0));
    assert!(d(120.0, 1.0) < d(120.0, 2.0));
    assert_eq!(d(200.0, 5.0), f64::INFINITY);
}

#[test]
fn region_thresholds_from_a_coarse_sweep() {
    let t = model().thresholds;
    assert!((t.m_q1 - 240.45).abs() < 0.05);
    assert!((t.m_star - 185.10).abs() < 0.05);
    assert!((t.m0 - 189.48).abs() < 0.05);
}
