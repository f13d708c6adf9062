use approx::assert_relative_eq;
use proptest::prelude::*;

use weighted_transfer::flows::{equimeasurability_check, stratified_points, Flow, SpaceFunction};
use weighted_transfer::line_operators::LineOperator;
use weighted_transfer::sampled_line::{distribution_weighted, lp_norm_weighted, Interval, SampledFunction};
use weighted_transfer::transfer::TransferredOperator;
use weighted_transfer::verify::{ergodic_sample, strong_from_sample, FunctionFamily};
use weighted_transfer::weights::{ap_constant, IntervalFamily, Weight};

const H: f64 = 1.0 / 256.0;

fn steps(values: &[f64]) -> SampledFunction {
    SampledFunction::steps(values, -1.0, 1.0, H).unwrap()
}

fn piecewise(values: &[f64]) -> Weight {
    let n = values.len() as f64;
    let pieces = values
        .iter()
        .enumerate()
        .map(|(i, v)| (Interval::new(-2.0 + 4.0 * i as f64 / n, -2.0 + 4.0 * (i + 1) as f64 / n).unwrap(), *v))
        .collect();
    Weight::piecewise(pieces).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn integrals_add_over_adjacent_intervals(
        v in prop::collection::vec(-3.0f64..3.0, 1..12),
        a in -1.5f64..1.5, b in -1.5f64..1.5, c in -1.5f64..1.5,
    ) {
        let f = steps(&v);
        let mut x = [a, b, c];
        x.sort_by(f64::total_cmp);
        let split = f.integrate_between(x[0], x[1]) + f.integrate_between(x[1], x[2]);
        prop_assert!((split - f.integrate_between(x[0], x[2])).abs() <= 1e-12);
    }

    #[test]
    fn norms_grow_with_the_weight(
        v in prop::collection::vec(-3.0f64..3.0, 1..12),
        w in prop::collection::vec(0.0f64..2.0, 1..8),
        bump in prop::collection::vec(0.0f64..1.0, 8),
        p in 1.0f64..4.0,
    ) {
        let f = steps(&v);
        let lo = piecewise(&w);
        let hi = piecewise(&w.iter().zip(&bump).map(|(a, b)| a + b).collect::<Vec<_>>());
        prop_assert!(lp_norm_weighted(&f, &lo, p) <= lp_norm_weighted(&f, &hi, p) * (1.0 + 1e-12));
    }

    #[test]
    fn chebyshev_bound(
        v in prop::collection::vec(-3.0f64..3.0, 1..12),
        w in prop::collection::vec(0.0f64..2.0, 1..8),
        lambda in 0.01f64..3.0,
        p in 1.0f64..4.0,
    ) {
        let f = steps(&v);
        let w = piecewise(&w);
        let lhs = lambda.powf(p) * distribution_weighted(&f, &w, lambda);
        prop_assert!(lhs <= lp_norm_weighted(&f, &w, p).powf(p) * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn refining_the_grid_keeps_integrals(v in prop::collection::vec(-3.0f64..3.0, 1..12)) {
        let coarse = steps(&v);
        let fine = SampledFunction::steps(&v, -1.0, 1.0, H / 4.0).unwrap();
        prop_assert!((coarse.integrate_between(-1.0, 1.0) - fine.integrate_between(-1.0, 1.0)).abs() <= 1e-12);
    }

    #[test]
    fn ap_constants_are_at_least_one(
        w in prop::collection::vec(0.05f64..5.0, 1..8),
        p in 1.1f64..4.0,
    ) {
        let c = ap_constant(&piecewise(&w), p, &IntervalFamily::symmetric(-4, 2).unwrap()).unwrap();
        prop_assert!(c >= 1.0 - 1e-12);
    }

    #[test]
    fn larger_families_give_larger_constants(
        w in prop::collection::vec(0.05f64..5.0, 1..8),
        p in 1.1f64..4.0,
    ) {
        let w = piecewise(&w);
        let small = IntervalFamily::symmetric(-4, 0).unwrap();
        let big = small.merged(&IntervalFamily::dyadic(-3, 1, 0.25, 1.5).unwrap());
        prop_assert!(ap_constant(&w, p, &big).unwrap() >= ap_constant(&w, p, &small).unwrap() * (1.0 - 1e-12));
    }

    #[test]
    fn ap_ignores_weight_scale(
        w in prop::collection::vec(0.05f64..5.0, 1..8),
        c in 0.01f64..100.0,
        p in 1.1f64..4.0,
    ) {
        let fam = IntervalFamily::symmetric(-4, 2).unwrap();
        let w = piecewise(&w);
        let base = ap_constant(&w, p, &fam).unwrap();
        let scaled = ap_constant(&w.scaled(c).unwrap(), p, &fam).unwrap();
        prop_assert!((base - scaled).abs() <= 1e-9 * base);
    }

    #[test]
    fn power_weights_are_a2_exactly_inside_the_range(alpha in -1.5f64..1.5) {
        let fam = IntervalFamily::symmetric(-8, 8).unwrap();
        let r = ap_constant(&Weight::power(alpha, 1e-300).unwrap(), 2.0, &fam);
        let inside = alpha.abs() < 0.95;
        let outside = alpha.abs() > 1.05;
        if inside {
            // On symmetric intervals A_2(|t|^α) = 1 / (1 - α²).
            let c = r.unwrap();
            prop_assert!((c - 1.0 / (1.0 - alpha * alpha)).abs() <= 1e-6 * c, "{} {}", alpha, c);
        } else if outside {
            prop_assert!(r.map_or(true, |c| c > 1e6), "{}", alpha);
        }
    }

    #[test]
    fn maximal_and_square_are_absolutely_homogeneous(
        v in prop::collection::vec(-3.0f64..3.0, 1..12),
        c in -4.0f64..4.0,
        t in -3.0f64..3.0,
    ) {
        let f = steps(&v);
        let cf = f.scale(c);
        for op in [LineOperator::maximal_dyadic(-4, 1).unwrap(), LineOperator::square(-4, 1).unwrap()] {
            let lhs = op.kernel_at(&cf, t);
            let rhs = c.abs() * op.kernel_at(&f, t);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        }
        let h = LineOperator::hilbert(1.0 / 16.0).unwrap();
        let lhs = h.kernel_at(&cf, t);
        let rhs = c * h.kernel_at(&f, t);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
    }

    #[test]
    fn transferred_maximal_of_a_constant_is_its_modulus(c in -5.0f64..5.0, x in 0.0f64..1.0) {
        let t = TransferredOperator::new(LineOperator::maximal_dyadic(-3, 0).unwrap(), Flow::golden(), None, None, Some(H)).unwrap();
        let v = t.apply(&SpaceFunction::constant(c).unwrap(), &weighted_transfer::flows::Point::circle(x)).unwrap();
        prop_assert!((v - c.abs()).abs() <= 1e-12 * (1.0 + c.abs()));
    }

    #[test]
    fn flows_preserve_level_sets(t in -50.0f64..50.0, a in 0.0f64..0.5, len in 0.01f64..0.5) {
        let f = SpaceFunction::arc(a, a + len).unwrap();
        let n = 1024;
        let dev = equimeasurability_check(&Flow::golden(), &f, 0.0, t, n, &[0.5]).unwrap();
        prop_assert!(dev <= 2.0 / n as f64);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn strong_ratios_ignore_function_scale(c in prop_oneof![-8.0f64..-0.125, 0.125f64..8.0]) {
        let flow = Flow::golden();
        let t = TransferredOperator::new(LineOperator::maximal_dyadic(-3, 0).unwrap(), flow, None, None, Some(1.0 / 128.0)).unwrap();
        let base = FunctionFamily::new(vec![("cos".into(), SpaceFunction::cosine(2, 1.0, 0.5).unwrap())]).unwrap();
        let scaled = FunctionFamily::new(vec![("cos".into(), SpaceFunction::cosine(2, c, 0.5 * c).unwrap())]).unwrap();
        let w = SpaceFunction::cosine(1, 0.5, 1.0).unwrap();
        let pts = stratified_points(&flow, 16);
        let r0 = strong_from_sample(&t, &base, &ergodic_sample(&t, &base, &pts).unwrap(), 2.0, &w, &w).unwrap();
        let r1 = strong_from_sample(&t, &scaled, &ergodic_sample(&t, &scaled, &pts).unwrap(), 2.0, &w, &w).unwrap();
        assert_relative_eq!(r0.estimated_constant, r1.estimated_constant, max_relative = 1e-9);
    }
}
