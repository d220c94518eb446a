use ko_core::nonlinearity::{
    check_beta, classify_ko, classify_ko_numerical, odd_extension, truncate_below, KoStatus, NonlinearitySpec,
};
use proptest::prelude::*;

fn parametric() -> impl Strategy<Value = NonlinearitySpec> {
    prop_oneof![
        (0.2..4.0_f64, 0.0..2.0_f64).prop_map(|(g, e)| NonlinearitySpec::power_plus_eps(g, e).unwrap()),
        (0.1..3.0_f64).prop_map(|s| NonlinearitySpec::exponential(s).unwrap()),
        (0.0..3.0_f64, 0.1..3.0_f64).prop_map(|(m, b)| NonlinearitySpec::affine(m, b).unwrap()),
        (0.0..3.0_f64).prop_map(|v| NonlinearitySpec::constant(v).unwrap()),
    ]
}

fn sorted3() -> impl Strategy<Value = (f64, f64, f64)> {
    prop::array::uniform3(-8.0..8.0_f64).prop_map(|mut v| {
        v.sort_by(f64::total_cmp);
        (v[0], v[1], v[2])
    })
}

proptest! {
    #[test]
    fn primitive_is_additive(f in parametric(), (a, b, c) in sorted3()) {
        let ab = f.primitive(a, b).unwrap();
        let bc = f.primitive(b, c).unwrap();
        let ac = f.primitive(a, c).unwrap();
        prop_assert!((ab + bc - ac).abs() <= 1e-10 * ac.abs().max(1.0), "{} + {} vs {}", ab, bc, ac);
    }

    #[test]
    fn primitive_of_nonnegative_f_is_monotone(f in parametric(), (a, b, c) in sorted3()) {
        if f.value(a) >= 0.0 {
            let fb = f.primitive(a, b).unwrap();
            let fc = f.primitive(a, c).unwrap();
            prop_assert!(fb >= -1e-12 && fc >= fb - 1e-12 * fc.abs().max(1.0));
        }
    }

    #[test]
    fn odd_extension_is_odd(scale in 0.1..3.0_f64, t0 in -2.0..2.0_f64, t in 0.0..10.0_f64) {
        let g = odd_extension(&NonlinearitySpec::exponential(scale).unwrap(), t0).unwrap();
        prop_assert_eq!(g.value(-t), -g.value(t));
    }

    #[test]
    fn odd_extension_satisfies_the_convexity_margin(t in -5.0..5.0_f64, h in 0.0..5.0_f64) {
        let g = odd_extension(&NonlinearitySpec::power_plus_eps(2.0, 0.5).unwrap(), 0.5).unwrap();
        prop_assert!(check_beta(&g, &[(t, h)]).unwrap().passed());
    }

    #[test]
    fn truncation_never_exceeds_the_base(t in -50.0..10.0_f64) {
        let base = NonlinearitySpec::tabulated(vec![(-60.0, 4.0), (-10.0, 0.5), (0.0, 2.0), (3.0, 3.0)]).unwrap();
        let g = truncate_below(&base, 1.0).unwrap();
        prop_assert!(g.value(t) <= base.value(t) + 1e-15);
        if t >= 1.0 {
            prop_assert_eq!(g.value(t), base.value(t));
        }
    }

    #[test]
    fn spec_json_round_trips(f in parametric()) {
        let text = serde_json::to_string(&f).unwrap();
        let back: NonlinearitySpec = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, f);
    }
}

#[test]
fn analytic_and_numerical_verdicts_agree() {
    let mut specs: Vec<NonlinearitySpec> = [0.5, 0.8, 1.0, 1.2, 1.5, 2.0, 3.0]
        .iter()
        .flat_map(|&g| [0.1, 1.0].map(|e| NonlinearitySpec::power_plus_eps(g, e).unwrap()))
        .collect();
    specs.push(NonlinearitySpec::exponential(1.0).unwrap());
    specs.push(NonlinearitySpec::constant(1.0).unwrap());
    specs.push(NonlinearitySpec::affine(1.0, 1.0).unwrap());
    let mut conclusive = 0;
    for f in &specs {
        let analytic = classify_ko(f).unwrap();
        let numerical = classify_ko_numerical(f).unwrap();
        if numerical.status != KoStatus::Inconclusive {
            conclusive += 1;
            assert_eq!(analytic.status, numerical.status, "{}", f.label());
        }
    }
    assert!(conclusive >= specs.len() / 2, "only {conclusive} conclusive numerical verdicts");
}
