//! Randomized invariants for the exact layer, driven by proptest so
//! shrinking produces a minimal counterexample whenever one exists.

use fofana_core::exponents::Exponent;
use fofana_core::norms::{amalgam_norm, lebesgue_norm, weak_norm};
use fofana_core::rational::{rat_int, Rat};
use fofana_core::{Aabb, SimpleFunction};
use proptest::prelude::*;

fn arb_rat(max_den: i64, lo: i64, hi: i64) -> impl Strategy<Value = Rat> {
    (1..=max_den).prop_flat_map(move |den| {
        (lo * den..=hi * den).prop_map(move |num| &rat_int(num) / &rat_int(den))
    })
}

fn arb_box(dim: usize) -> impl Strategy<Value = Aabb> {
    prop::collection::vec((arb_rat(4, -4, 4), arb_rat(4, -4, 4)), dim)
        .prop_filter("degenerate axis", |axes| axes.iter().all(|(a, b)| a != b))
        .prop_map(|axes| {
            let lo = axes.iter().map(|(a, b)| a.clone().min(b.clone())).collect();
            let hi = axes.iter().map(|(a, b)| a.clone().max(b.clone())).collect();
            Aabb::new(lo, hi).unwrap()
        })
}

fn arb_terms(dim: usize) -> impl Strategy<Value = Vec<(f64, Aabb)>> {
    prop::collection::vec((-2.5f64..2.5, arb_box(dim)), 1..=4)
}

fn arb_simple(dim: usize) -> impl Strategy<Value = SimpleFunction<f64>> {
    arb_terms(dim).prop_map(move |terms| SimpleFunction::from_terms(dim, terms).unwrap())
}

fn arb_scale() -> impl Strategy<Value = Rat> {
    prop::sample::select(vec!["1/4", "1/3", "1/2", "2/3", "1", "3/2", "2", "3", "4"])
        .prop_map(|s| fofana_core::rational::parse_rat(s).unwrap())
}

fn arb_exponent() -> impl Strategy<Value = Exponent> {
    prop::sample::select(vec!["1", "4/3", "3/2", "2", "3", "4", "inf"])
        .prop_map(|s| Exponent::parse(s).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        .. ProptestConfig::default()
    })]

    #[test]
    fn canonical_form_evaluates_like_the_raw_terms(
        terms in arb_terms(1),
        x in arb_rat(8, -5, 5),
    ) {
        let f = SimpleFunction::from_terms(1, terms.clone()).unwrap();
        let point = [x];
        let direct: f64 = terms
            .iter()
            .filter(|(_, b)| b.contains_point(&point))
            .map(|(c, _)| *c)
            .sum();
        prop_assert!((f.value_at(&point) - direct).abs() <= 1e-12);
    }

    #[test]
    fn dilation_composes(
        f in arb_simple(1),
        a in arb_scale(),
        b in arb_scale(),
        beta in arb_exponent(),
    ) {
        let once = f.dilate(&b, &beta).unwrap().dilate(&a, &beta).unwrap();
        let fused = f.dilate(&(&a * &b), &beta).unwrap();
        let dev = once.sup_abs_diff(&fused).unwrap();
        prop_assert!(dev <= 1e-12 * (1.0 + f.max_abs_value()));
    }

    #[test]
    fn pairing_is_symmetric(f in arb_simple(1), g in arb_simple(1)) {
        let a = f.pairing(&g).unwrap();
        let b = g.pairing(&f).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs())));
    }

    #[test]
    fn integral_is_additive(f in arb_simple(1), g in arb_simple(1)) {
        let sum = f.add(&g).unwrap().integral();
        let parts = f.integral() + g.integral();
        prop_assert!((sum - parts).abs() <= 1e-12 * (1.0 + parts.abs()));
    }

    #[test]
    fn amalgam_norm_is_absolutely_homogeneous(
        f in arb_simple(1),
        c in -3.0f64..3.0,
        q in arb_exponent(),
        p in arb_exponent(),
        rho in arb_scale(),
    ) {
        let lhs = amalgam_norm(&f.scaled(c), &q, &p, &rho).unwrap();
        let rhs = c.abs() * amalgam_norm(&f, &q, &p, &rho).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
    }

    #[test]
    fn amalgam_norm_satisfies_the_triangle_inequality(
        f in arb_simple(1),
        g in arb_simple(1),
        q in arb_exponent(),
        p in arb_exponent(),
        rho in arb_scale(),
    ) {
        let sum = amalgam_norm(&f.add(&g).unwrap(), &q, &p, &rho).unwrap();
        let split = amalgam_norm(&f, &q, &p, &rho).unwrap()
            + amalgam_norm(&g, &q, &p, &rho).unwrap();
        prop_assert!(sum <= split * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn restriction_never_increases_the_norm(
        f in arb_simple(1),
        window in arb_box(1),
        q in arb_exponent(),
    ) {
        let cut = f.restrict(&window).unwrap();
        let lhs = lebesgue_norm(&cut, &q);
        let rhs = lebesgue_norm(&f, &q);
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn weak_norm_is_dominated_by_the_strong_norm(
        f in arb_simple(1),
        alpha in prop::sample::select(vec!["1", "3/2", "2", "3", "4"])
            .prop_map(|s| Exponent::parse(s).unwrap()),
    ) {
        let weak = weak_norm(&f, &alpha).unwrap();
        let strong = lebesgue_norm(&f, &alpha);
        prop_assert!(weak <= strong + 1e-12);
    }

    #[test]
    fn two_dimensional_dilation_composes(
        f in arb_simple(2),
        a in arb_scale(),
        b in arb_scale(),
        beta in arb_exponent(),
    ) {
        let once = f.dilate(&b, &beta).unwrap().dilate(&a, &beta).unwrap();
        let fused = f.dilate(&(&a * &b), &beta).unwrap();
        let dev = once.sup_abs_diff(&fused).unwrap();
        prop_assert!(dev <= 1e-12 * (1.0 + f.max_abs_value()));
    }
}
