mod common;

use common::{box4, interior_points};
use hyperint::characteristics::{CharStrip, InitialData};
use hyperint::compat::{con1_max, Interval};
use hyperint::parse;
use hyperint::families::{
    riccati_g, riccati_numeric, ArbitraryFns, Family, FamilyId, FamilyParams, RiccatiCoefficients,
};
use hyperint::oracle::{fd_residual, FdOrder};

struct Case {
    id: FamilyId,
    params: FamilyParams,
    u0: &'static str,
    x: (f64, f64),
    t: (f64, f64),
    u: (f64, f64),
    /// `u(σ, t_start)` when it is not `u0` itself.
    initial: Option<&'static str>,
}

fn params(consts: &[(&str, f64)], exprs: &[(&str, &str)]) -> FamilyParams {
    let mut p = FamilyParams::new();
    for (k, v) in consts {
        p = p.with(k, *v);
    }
    for (k, e) in exprs {
        p = p.with_parsed(k, e).unwrap();
    }
    p
}

fn closed_form_cases() -> Vec<Case> {
    vec![
        Case { id: FamilyId::E5, params: params(&[], &[]), u0: "1 + 0.5*sigma", x: (0.5, 1.5), t: (0.05, 0.3), u: (0.5, 3.0), initial: None },
        Case {
            id: FamilyId::SimpleWave,
            params: params(&[], &[("a", "1 + u^2")]),
            u0: "0.3*sin(sigma)",
            x: (-1.0, 1.0),
            t: (0.05, 0.3),
            u: (-0.5, 0.5),
            initial: None,
        },
        Case {
            id: FamilyId::E1CaseII,
            params: params(&[("k1", 0.5)], &[("a", "1 + u^2")]),
            u0: "0.3*sin(sigma)",
            x: (-1.0, 1.0),
            t: (0.05, 0.3),
            u: (-0.5, 0.5),
            initial: None,
        },
        Case {
            id: FamilyId::E1CaseIII12,
            params: params(&[("k0", 0.7)], &[("a", "1 + u^2")]),
            u0: "0.5 + 0.2*sin(sigma)",
            x: (-1.0, 1.0),
            t: (0.05, 0.3),
            u: (0.2, 1.0),
            initial: None,
        },
        Case {
            id: FamilyId::E1CaseI,
            params: params(&[("gamma0", -1.0), ("beta0", 0.0), ("t0", 1.0)], &[("a", "u^(-2)")]),
            u0: "1 + 0.2*sin(sigma)",
            x: (-1.0, 1.0),
            t: (1.05, 1.3),
            u: (0.7, 1.6),
            initial: None,
        },
        Case {
            id: FamilyId::E1CaseIII11,
            params: params(&[("alpha0", 0.0), ("gamma0", 2.0), ("c1", 1.0)], &[]),
            u0: "1 + 0.2*sin(sigma)",
            x: (-1.0, 1.0),
            t: (0.05, 0.3),
            u: (0.7, 1.6),
            initial: None,
        },
        Case {
            id: FamilyId::E6Minus,
            params: params(&[("c", 1.0)], &[("q1", "1 + 0.5*sin(x)")]),
            u0: "cos(sigma)",
            x: (-1.0, 1.0),
            t: (0.05, 0.3),
            u: (-2.0, 2.0),
            // u0(σ) exp(∫_0^σ q1 / 2)
            initial: Some("cos(sigma)*exp((sigma + 0.5*(1 - cos(sigma)))/2)"),
        },
        Case {
            id: FamilyId::E6Plus,
            params: params(&[("c", 2.0)], &[("q1", "x")]),
            u0: "cos(sigma)",
            x: (-1.0, 1.0),
            t: (0.05, 0.3),
            u: (-2.0, 2.0),
            // u0(σ) exp(-∫_0^σ q1 / 4)
            initial: Some("cos(sigma)*exp(-sigma^2/8)"),
        },
    ]
}

fn family(case: &Case) -> Family {
    Family::new(case.id, &case.params, &ArbitraryFns::new().with_parsed("u0", case.u0).unwrap()).unwrap()
}

#[test]
fn closed_forms_solve_their_equations() {
    for case in closed_form_cases() {
        let f = family(&case);
        let pts = interior_points(case.x, case.t, 200);
        let r = fd_residual(&*f.equation(), &f, &pts, 1e-2, FdOrder::Fourth).unwrap();
        assert!(r <= 1e-5, "{}: fd residual {r:e}", case.id);
    }
}

#[test]
fn catalog_reductions_are_compatible() {
    for case in closed_form_cases() {
        let f = family(&case);
        let (p, r) = (f.pde().unwrap(), f.reduction().unwrap());
        let report = con1_max(p, r, &box4(case.x, case.t, case.u, (-2.0, 2.0))).unwrap();
        assert!(report.max_abs <= 1e-10, "{}: con1 {:e}", case.id, report.max_abs);
    }
}

#[test]
fn closed_forms_match_characteristics() {
    for case in closed_form_cases() {
        let f = family(&case);
        let x = Interval::new(case.x.0 - 1.0, case.x.1 + 1.0).unwrap();
        let strip = match case.initial {
            None => f.integrate_strip(x, case.t.1, 201, 1e-3).unwrap(),
            Some(src) => {
                let init = InitialData::new(parse(src).unwrap(), x, f.t_start()).unwrap();
                CharStrip::integrate(f.system().unwrap(), &init, case.t.1, 201, 1e-3).unwrap()
            }
        };
        for (x, t) in interior_points(case.x, case.t, 20) {
            let a = f.eval(x, t).unwrap();
            let b = strip.eval_solution(x, t).unwrap();
            assert!((a - b).abs() < 1e-9, "{}: ({x}, {t}) {a} vs {b}", case.id);
        }
    }
}

#[test]
fn strip_only_families_solve_their_equations() {
    let cases = [
        (FamilyId::ConstantAstigmatism, params(&[], &[]), "1 + 0.2*sin(sigma)"),
        // A1, A2 and A4 speed profiles, with a nonconstant G.
        (FamilyId::E1CaseIII11, params(&[("alpha0", -1.0), ("gamma0", -1.0), ("alpha2", -0.25), ("gamma2", -0.25), ("c1", 0.3)], &[]), "1 + 0.2*sin(sigma)"),
        (FamilyId::E1CaseIII11, params(&[("alpha0", 1.0), ("gamma0", -1.0), ("alpha2", 1.0), ("gamma2", -1.0), ("c1", 0.0)], &[]), "1 + 0.2*sin(sigma)"),
        (FamilyId::E1CaseIII11, params(&[("alpha0", -0.5), ("gamma0", 0.0), ("alpha2", -0.5)], &[]), "1 + 0.2*sin(sigma)"),
    ];
    for (id, p, u0) in cases {
        let mut f = Family::new(id, &p, &ArbitraryFns::new().with_parsed("u0", u0).unwrap()).unwrap();
        assert!(!f.has_closed_form());
        f.attach_strip(Interval::new(-1.2, 1.2).unwrap(), 0.25, 121, 1e-3).unwrap();
        let pts = interior_points((-0.5, 0.5), (0.05, 0.2), 60);
        let r = fd_residual(&*f.equation(), &f, &pts, 1e-2, FdOrder::Fourth).unwrap();
        assert!(r <= 1e-5, "{id} {p:?}: fd residual {r:e}");
    }
}

#[test]
fn riccati_satisfies_both_equations() {
    let coef = RiccatiCoefficients::new([1.0, 0.0, 1.0], [0.5, 0.0, 0.5]);
    let h = 1e-5;
    for (x, t) in interior_points((-0.5, 0.5), (0.0, 0.4), 20) {
        let g = |x, t| riccati_g(&coef, 0.1, x, t).unwrap();
        let v = g(x, t);
        let gx = (g(x + h, t) - g(x - h, t)) / (2.0 * h);
        let gt = (g(x, t + h) - g(x, t - h)) / (2.0 * h);
        assert!((gx - (v * v + 1.0)).abs() < 1e-7);
        assert!((gt - 0.5 * (v * v + 1.0)).abs() < 1e-7);
    }
}

#[test]
fn riccati_numeric_agrees_with_closed_forms() {
    for (r, c1) in [(4.0, 0.1), (-4.0, 2.0), (0.0, 2.0)] {
        for s in [-0.3, 0.1, 0.35] {
            let coef = RiccatiCoefficients::new([1.0, 0.0, r], [0.0; 3]);
            let closed = riccati_g(&coef, c1, s, 0.0).unwrap();
            let num = riccati_numeric(0.0, r, c1, s).unwrap();
            assert!((closed - num).abs() <= 1e-6, "r={r} s={s}: {closed} vs {num}");
        }
    }
}

#[test]
fn implicit_evaluations_are_deterministic() {
    for case in closed_form_cases() {
        let f = family(&case);
        for (x, t) in interior_points(case.x, case.t, 5) {
            assert_eq!(f.eval(x, t).unwrap().to_bits(), f.eval(x, t).unwrap().to_bits());
        }
    }
}

#[test]
fn e5_singular_time_with_linear_data() {
    // x = σ(2 - e^t) folds at t = ln 2.
    let f = Family::new(FamilyId::E5, &FamilyParams::new(), &ArbitraryFns::new().with_parsed("u0", "sigma").unwrap()).unwrap();
    assert!(f.eval(1.0, 0.8).is_err());
    assert!(f.eval(1.0, 0.6).is_ok());
}

