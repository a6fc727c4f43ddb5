use laxgeom::conformal;
use laxgeom::corpus;
use laxgeom::dsl::{self, parse_expr, DslErrorKind};
use laxgeom::lax::{self, Congruence, LaxVerdict};
use laxgeom::weyl::{self, Corollary};
use laxgeom::Error;
use laxgeom_jet::Expr;

const HEAD: &str = "[coords]\nbase = x, y, t\nunknowns = u\n\n";

#[test]
fn dsl_rejects_unsolved_and_unknown() {
    let e = dsl::parse(&format!("{HEAD}[equation F]\nsolve u_xt = u_xxx\n")).unwrap_err();
    assert_eq!(e.kind, DslErrorKind::NotSolvedForm);
    assert_eq!(e.line, 6);
    let e = dsl::parse(&format!("{HEAD}[equation F]\nsolve u_xt = w_yy\n")).unwrap_err();
    assert_eq!(e.kind, DslErrorKind::UnknownIdentifier);
    let e = dsl::parse(&format!("{HEAD}[equation F]\nsolve u_xt = (u_yy\n")).unwrap_err();
    assert_eq!(e.kind, DslErrorKind::SyntaxError);
}

#[test]
fn dkp_residual_cofactors() {
    let e = corpus::load("dkp").unwrap();
    let sys = &e.spec.system;
    let p = e.pair("dkp").unwrap();
    let h = p.frobenius_residual();
    let nonzero: Vec<&Expr> = h.components().into_iter().filter(|c| !c.is_zero()).collect();
    assert!(!nonzero.is_empty());
    for c in nonzero {
        let cof = sys.cofactor_extract(c, 2).unwrap();
        assert_eq!(&cof.apply(sys).unwrap(), c);
    }
    let u_t = parse_expr("u_t", &sys.coords).unwrap();
    assert_eq!(sys.cofactor_extract(&u_t, 2), Err(Error::NotInIdeal));
}

#[test]
fn dkp_broken_has_no_weyl_form() {
    let e = corpus::load("dkp-broken").unwrap();
    let sys = &e.spec.system;
    let g = conformal::invert_to_metric(&conformal::characteristic_quadric(sys).unwrap(), sys).unwrap();
    assert_eq!(weyl::solve_weyl_form(&g, sys, 1).unwrap_err(), Error::NoSolution);
    assert_eq!(e.pair("dkp").unwrap().verify_lax(sys), LaxVerdict::NotIntegrable);
}

#[test]
fn flat_metric_family_has_zero_member() {
    let e = corpus::load("flat-counterexample").unwrap();
    let sys = &e.spec.system;
    let g = conformal::invert_to_metric(&conformal::characteristic_quadric(sys).unwrap(), sys).unwrap();
    let (ws, free) = weyl::solve_weyl_form_particular(&g, sys, 1).unwrap();
    assert!(free > 0);
    assert!(ws.omega.iter().all(Expr::is_zero));
    assert_eq!(weyl::ew_residual(&ws, sys).unwrap().classify(), Corollary::IdenticallyZero);
}

#[test]
fn monge_on_named_curves() {
    let c = corpus::load("dkp").unwrap().spec.coords;
    let curve = |a: &str, b: &str| Congruence::new_3d(parse_expr(a, &c).unwrap(), parse_expr(b, &c).unwrap());
    assert!(lax::monge_invariant(&curve("lam^2", "lam")).unwrap().is_zero());
    assert!(lax::monge_invariant(&curve("1/lam", "lam")).unwrap().is_zero());
    assert!(!lax::monge_invariant_with_exponent(&curve("1/lam", "lam"), 2).unwrap().is_zero());
    assert!(!lax::monge_invariant(&curve("lam^3", "lam")).unwrap().is_zero());
    assert_eq!(lax::monge_invariant(&curve("lam", "u")), Err(Error::ReparametrizationFailure));
}

#[test]
fn wrong_dimension_is_reported() {
    let e = corpus::load("second-heavenly").unwrap();
    let sys = &e.spec.system;
    let g = conformal::invert_to_metric(&conformal::characteristic_quadric(sys).unwrap(), sys).unwrap();
    assert!(matches!(weyl::solve_weyl_form(&g, sys, 1), Err(Error::WrongDimension { expected: 3, found: 4 })));
    let c = &e.pair("alpha-planes").unwrap().congruence;
    assert!(matches!(lax::monge_invariant(c), Err(Error::WrongDimension { .. })));
}
