use laxgeom::corpus;
use laxgeom::dsl::parse_expr;
use laxgeom_jet::substitute_prolonged;

// a = v_t, b = u - v_y turns the Einstein-Weyl pair of equations into
// D_t G = 0, F - D_y G = 0.
#[test]
fn einstein_weyl_equations_in_potential_form() {
    let ew = corpus::load("master-ew").unwrap().spec.system;
    let ms = corpus::load("manakov-santini").unwrap().spec.system;
    let c = &ms.coords;
    let a = parse_expr("v_t", c).unwrap();
    let b = parse_expr("u - v_y", c).unwrap();
    let f = ms.equation("F").unwrap().generator();
    let g = ms.equation("G").unwrap().generator();
    let ea = substitute_prolonged(&ew.equation("A").unwrap().generator(), &[(0, a.clone()), (1, b.clone())]).unwrap();
    let eb = substitute_prolonged(&ew.equation("B").unwrap().generator(), &[(0, a), (1, b)]).unwrap();
    assert_eq!(ea, g.total_derivative(2));
    assert_eq!(eb, &f - &g.total_derivative(1));
}
