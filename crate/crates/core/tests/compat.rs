use ibvp_lab::compat::{check_cc_half_order, check_cc_order, compat_report, taylor_coefficients, DataTriple};
use ibvp_lab::system::{ForcingSpec, ForcingTerm, SystemSpec};
use ibvp_lab::{Error, Expr, Verdict};

fn diag() -> SystemSpec {
    SystemSpec::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]], &[vec![0.5, 1.0]]).unwrap()
}

#[test]
fn zero_data_has_zero_coefficients() {
    let spec = diag();
    let vs = taylor_coefficients(&spec, &DataTriple::zero(&spec), 4, 0.01, 100).unwrap();
    assert_eq!(vs.len(), 5);
    assert!(vs.iter().all(|v| v.comps.iter().flatten().all(|x| *x == 0.0)));
}

#[test]
fn toy_coefficients_of_decaying_exponential() {
    let d = DataTriple::closed(&["exp(-x)"], &["exp(-t)"]).unwrap();
    let vs = taylor_coefficients(&SystemSpec::toy(), &d, 4, 0.01, 200).unwrap();
    for v in &vs {
        for (i, x) in v.comp(0).iter().enumerate() {
            assert!((x - (-(i as f64) * 0.01).exp()).abs() < 1e-12);
        }
    }
}

#[test]
fn diagonal_first_coefficient() {
    let d = DataTriple::closed(&["sin(x)", "cos(x)"], &["0"]).unwrap();
    let vs = taylor_coefficients(&diag(), &d, 1, 0.01, 300).unwrap();
    for i in 0..=300 {
        let x = i as f64 * 0.01;
        assert!((vs[1].comp(0)[i] - x.cos()).abs() < 1e-12);
        assert!((vs[1].comp(1)[i] - x.sin()).abs() < 1e-12);
    }
}

#[test]
fn first_two_residuals_of_toy_exponentials() {
    let d = DataTriple::closed(&["exp(-x)"], &["exp(-t)"]).unwrap();
    assert_eq!(check_cc_order(1, &SystemSpec::toy(), &d).unwrap(), vec![0.0]);
    let e2 = check_cc_order(2, &SystemSpec::toy(), &d).unwrap();
    assert!((e2[0] + 2.0).abs() < 1e-14, "{e2:?}");
}

#[test]
fn zero_data_residuals_vanish() {
    let spec = diag();
    for j in 1..=5 {
        assert!(check_cc_order(j, &spec, &DataTriple::zero(&spec)).unwrap().iter().all(|e| *e == 0.0));
    }
}

#[test]
fn order_zero_is_invalid() {
    let d = DataTriple::closed(&["0"], &["0"]).unwrap();
    assert!(matches!(check_cc_order(0, &SystemSpec::toy(), &d), Err(Error::InvalidParameter(_))));
}

#[test]
fn data_from_a_smooth_solution_are_compatible() {
    // w = (exp(-x) cos t, exp(-(x - t)^2)) solves the diagonal system with
    // forcing exp(-x)(cos t - sin t) in the first component.
    let spec = diag();
    let mut d = DataTriple::closed(&["exp(-x)", "exp(-x^2)"], &["0.5*cos(t) + exp(-t^2)"]).unwrap();
    d.f = ForcingSpec {
        terms: vec![ForcingTerm {
            component: 0,
            x: Expr::parse("exp(-x)").unwrap(),
            t: Expr::parse("cos(t) - sin(t)").unwrap(),
        }],
    };
    for j in 1..=4 {
        let e = check_cc_order(j, &spec, &d).unwrap();
        assert!(e[0].abs() < 1e-8, "order {j}: {e:?}");
    }
}

#[test]
fn half_order_examples() {
    let toy = SystemSpec::toy();
    let same = DataTriple::closed(&["exp(-x)*cos(x)"], &["exp(-t)*cos(t)"]).unwrap();
    assert_eq!(check_cc_half_order(1, &toy, &same).unwrap().verdict, Verdict::Finite);
    let root = DataTriple::closed(&["x^0.3*eta(x)"], &["0"]).unwrap();
    assert_eq!(check_cc_half_order(1, &toy, &root).unwrap().verdict, Verdict::Finite);
    let flat = DataTriple::closed(&["eta(x)"], &["0"]).unwrap();
    assert_eq!(check_cc_half_order(1, &toy, &flat).unwrap().verdict, Verdict::Divergent);
}

#[test]
fn half_order_needs_lower_orders() {
    let d = DataTriple::closed(&["exp(-x)"], &["0"]).unwrap();
    assert!(matches!(check_cc_half_order(2, &SystemSpec::toy(), &d), Err(Error::LowerOrderViolated(1))));
}

#[test]
fn report_examples() {
    let toy = SystemSpec::toy();
    let zero = compat_report(&toy, &DataTriple::closed(&["0"], &["0"]).unwrap(), 3.5).unwrap();
    assert_eq!(zero.verified_order, 3.5);
    assert!(zero.hierarchy_consistent);

    let exps = compat_report(&toy, &DataTriple::closed(&["exp(-x)"], &["exp(-t)"]).unwrap(), 3.0).unwrap();
    assert_eq!(exps.verified_order, 1.0);
    assert!(exps.satisfies(1.0) && !exps.satisfies(1.5) && !exps.satisfies(2.0));
    assert_eq!(exps.half_order_hardy.as_ref().unwrap().verdict, Verdict::Divergent);

    let lin = compat_report(&toy, &DataTriple::closed(&["x*eta(x)"], &["-t*eta(t)"]).unwrap(), 3.0).unwrap();
    assert!(lin.verified_order >= 2.0, "{}", lin.verified_order);
    assert!(lin.hierarchy_consistent);
}

#[test]
fn report_rejects_non_half_integer_cap() {
    let d = DataTriple::closed(&["0"], &["0"]).unwrap();
    assert!(compat_report(&SystemSpec::toy(), &d, 1.25).is_err());
}

#[test]
fn strict_report_underflows_on_rough_jet() {
    let d = DataTriple::closed(&["x^1.3*eta(x)"], &["0"]).unwrap();
    let e = compat_report(&SystemSpec::toy(), &d, 3.0).unwrap_err();
    assert!(matches!(e, Error::JetUnderflow { .. }), "{e}");
}
