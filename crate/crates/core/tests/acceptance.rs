//! One line per acceptance criterion: verdict, wall time, budget, detail.
//! Every check is an exact identity over the rationals.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use laxgeom::conformal::{self, Metric};
use laxgeom::corpus::{self, CorpusEntry};
use laxgeom::dsl::parse_expr;
use laxgeom::lax::{self, Congruence, LaxVerdict, Pair};
use laxgeom::weyl::{self, Corollary, WeylStructure};
use laxgeom::System;
use laxgeom_jet::{jet_symbol, substitute_prolonged, Coordinates, Expr, Var};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn load(name: &str) -> CorpusEntry {
    corpus::load(name).expect("corpus entry")
}

fn ex(text: &str, c: &Coordinates) -> Expr {
    parse_expr(text, c).unwrap_or_else(|e| panic!("{text}: {e}"))
}

fn metric_of(sys: &System) -> Result<Metric, String> {
    conformal::characteristic_quadric(sys).and_then(|q| conformal::invert_to_metric(&q, sys)).map_err(|e| e.to_string())
}

fn pair<'a>(e: &'a CorpusEntry, name: &str) -> &'a Pair {
    e.pair(name).unwrap_or_else(|| panic!("no pair {name}"))
}

fn c1_dkp_metric() -> Outcome {
    let e = load("dkp");
    let c = &e.spec.system.coords;
    let g = metric_of(&e.spec.system)?;
    let z = Expr::zero();
    let reference = Metric::new(vec![
        vec![ex("-4*u", c), z.clone(), Expr::int(2)],
        vec![z.clone(), Expr::int(-1), z.clone()],
        vec![Expr::int(2), z.clone(), z],
    ]);
    ensure(g.conformally_equal(&reference, &e.spec.system).map_err(|e| e.to_string())?, "metric differs")?;
    Ok(format!("g = {}", reference.display(c)))
}

fn c2_dkp_lax() -> Outcome {
    let e = load("dkp");
    let sys = &e.spec.system;
    let p = pair(&e, "dkp");
    // the dKP pair is the Manakov-Santini pair at v = 0
    let ms = load("manakov-santini");
    let drop_v = |v: Var| v.as_jet().filter(|j| j.unknown == 1).map(|_| Expr::zero());
    let reduced = pair(&ms, "ms");
    let coeffs = reduced.congruence.substitute(&drop_v).map_err(|e| e.to_string())?;
    let m = reduced.m.substitute_with(&drop_v).map_err(|e| e.to_string())?;
    let n = reduced.n.substitute_with(&drop_v).map_err(|e| e.to_string())?;
    ensure(Pair::new(coeffs, m, n) == *p, "not the v = 0 reduction")?;
    let verdict = p.verify_lax(sys);
    ensure(verdict == LaxVerdict::LaxPair, format!("verdict {verdict}"))?;
    ensure(lax::characteristic_check(p, sys).map_err(|e| e.to_string())?, "not characteristic")?;
    ensure(p.is_normal(), "not normal")?;
    Ok("LaxPair, characteristic, normal".into())
}

fn c3_manakov_santini() -> Outcome {
    let e = load("manakov-santini");
    let sys = &e.spec.system;
    let p = pair(&e, "ms");
    let verdict = p.verify_lax(sys);
    ensure(verdict == LaxVerdict::LaxPair, format!("verdict {verdict}"))?;
    ensure(!p.is_normal(), "already normal")?;
    let norm = lax::normalize(p, sys, 4).map_err(|e| e.to_string())?;
    ensure(norm.pair.is_normal(), "normalized pair not normal")?;
    let shifted = norm.pair.shift_spectral(&ex("v_t", &sys.coords)).map_err(|e| e.to_string())?;
    ensure(shifted.e_equivalent(pair(&e, "normal"), sys), "not E-equivalent to the normal pair")?;
    Ok("LaxPair, normalize then lam -> lam + v_t matches the normal pair".into())
}

fn c4_master_ew_lift() -> Outcome {
    let e = load("master-ew");
    let sys = &e.spec.system;
    let c = &sys.coords;
    let g = e.spec.metric.clone().ok_or("no metric")?;
    let omega = e.spec.weyl_form.clone().ok_or("no Weyl form")?;
    let p = pair(&e, "weyl");
    let lift = lax::weyl_lift_3d(&p.congruence, &WeylStructure::new(g, omega), sys).map_err(|e| e.to_string())?;
    // m' is written against d_x + lam d_y; our frame uses d_x - alpha d_t
    let n = ex("-a_t*lam - b_t", c);
    let m = &ex("-a_y*lam - b_y", c) + &(&ex("lam - a", c) * &n);
    let expected = Pair::new(p.congruence.clone(), m, n);
    ensure(lift.e_equivalent(&expected, sys), "lift differs")?;
    let verdict = lift.verify_lax(sys);
    ensure(verdict == LaxVerdict::LaxPair, format!("verdict {verdict}"))?;
    Ok("lift E-equivalent to (m', n), LaxPair".into())
}

fn c5_gauge() -> Outcome {
    let ew = load("master-ew").spec.system;
    let ms = load("manakov-santini").spec.system;
    let c = &ms.coords;
    let images = [(0, ex("v_t", c)), (1, ex("u - v_y", c))];
    let f = ms.equation("F").unwrap().generator();
    let g = ms.equation("G").unwrap().generator();
    let ea = substitute_prolonged(&ew.equation("A").unwrap().generator(), &images).map_err(|e| e.to_string())?;
    let eb = substitute_prolonged(&ew.equation("B").unwrap().generator(), &images).map_err(|e| e.to_string())?;
    ensure(ea == g.total_derivative(2), "first equation is not D_t G")?;
    ensure(eb == &f - &g.total_derivative(1), "second equation is not F - D_y G")?;
    Ok("E_a = D_t G, E_b = F - D_y G".into())
}

fn classify_ew(g: &Metric, omega: Vec<Expr>, sys: &System) -> Result<Corollary, String> {
    weyl::ew_residual(&WeylStructure::new(g.clone(), omega), sys).map(|r| r.classify()).map_err(|e| e.to_string())
}

fn c6_einstein_weyl() -> Outcome {
    let e = load("dkp");
    let sys = &e.spec.system;
    let g = metric_of(sys)?;
    let ws = weyl::solve_weyl_form(&g, sys, 1).map_err(|e| e.to_string())?;
    let solved = classify_ew(&g, ws.omega.clone(), sys)?;
    ensure(solved == Corollary::ZeroModIdeal, format!("dKP with solved omega: {solved}"))?;
    let zero = classify_ew(&g, vec![Expr::zero(); 3], sys)?;
    ensure(zero == Corollary::Nonzero, format!("dKP with omega = 0: {zero}"))?;
    let flat = load("flat-counterexample");
    let fs = &flat.spec.system;
    let fg = metric_of(fs)?;
    let fomega = weyl::solve_weyl_form(&fg, fs, 1).map(|w| w.omega).unwrap_or_else(|_| vec![Expr::zero(); 3]);
    let fc = classify_ew(&fg, fomega, fs)?;
    ensure(fc == Corollary::IdenticallyZero, format!("flat: {fc}"))?;
    Ok(format!("dKP omega = ({}) ZeroModIdeal, omega = 0 Nonzero, flat IdenticallyZero", fmt_list(&ws.omega, &sys.coords)))
}

fn fmt_list(v: &[Expr], c: &Coordinates) -> String {
    v.iter().map(|e| c.fmt_expr(e)).collect::<Vec<_>>().join(", ")
}

fn c7_self_dual() -> Outcome {
    let e = load("second-heavenly");
    let sys = &e.spec.system;
    let g = metric_of(sys)?;
    let plus = weyl::sd_residual(&g, 1, sys).map_err(|e| e.to_string())?.classify();
    let minus = weyl::sd_residual(&g, -1, sys).map_err(|e| e.to_string())?.classify();
    ensure(
        matches!((plus, minus), (Corollary::ZeroModIdeal, Corollary::Nonzero) | (Corollary::Nonzero, Corollary::ZeroModIdeal)),
        format!("+ {plus}, - {minus}"),
    )?;
    let entries: Vec<&Expr> = g.g.iter().flatten().collect();
    for seed in 0..5 {
        let s = conformal::signature_at(&g, &conformal::random_sample(&entries, seed)).map_err(|e| e.to_string())?;
        ensure((s.p, s.q) == (2, 2), format!("signature ({}, {}) at seed {seed}", s.p, s.q))?;
    }
    Ok(format!("+ {plus}, - {minus}, signature (2,2) at 5 samples"))
}

fn c8_characteristic() -> Outcome {
    let mut n = 0;
    for name in corpus::NAMES {
        let e = load(name);
        let sys = &e.spec.system;
        for ps in &e.spec.pairs {
            if ps.pair.verify_lax(sys) == LaxVerdict::LaxPair {
                ensure(lax::characteristic_check(&ps.pair, sys) == Ok(true), format!("{name}/{} not characteristic", ps.name))?;
                n += 1;
            }
        }
    }
    let broken = load("dkp-broken");
    let v = pair(&broken, "dkp").verify_lax(&broken.spec.system);
    ensure(v != LaxVerdict::LaxPair, "dkp-broken verifies")?;
    Ok(format!("{n} Lax pairs characteristic, dkp-broken {v}"))
}

fn poly_in_lambda(rng: &mut ChaCha8Rng, deg: u32) -> Expr {
    let l = Expr::lambda();
    let mut acc = Expr::zero();
    for k in 0..=deg {
        let c = Expr::int(rng.gen_range(-4..=4));
        acc = &acc + &(&c * &l.pow(k as i32).unwrap());
    }
    acc
}

/// Curves of degree at most 4: every third one a rational conic.
fn random_curve(rng: &mut ChaCha8Rng, i: usize) -> Option<(Expr, Expr)> {
    let (a, b, d) = match i % 3 {
        0 => (poly_in_lambda(rng, 2), poly_in_lambda(rng, 2), poly_in_lambda(rng, 2)),
        1 => (poly_in_lambda(rng, 4), poly_in_lambda(rng, 3), Expr::one()),
        _ => (poly_in_lambda(rng, 3), poly_in_lambda(rng, 3), poly_in_lambda(rng, 1)),
    };
    Some((a.checked_div(&d).ok()?, b.checked_div(&d).ok()?))
}

fn c9_monge() -> Outcome {
    let l = Expr::lambda();
    let mut curves = vec![(l.pow(2).unwrap(), l.clone()), (l.recip().unwrap(), l.clone())];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut i = 0;
    while curves.len() < 32 {
        if let Some(c) = random_curve(&mut rng, i) {
            curves.push(c);
        }
        i += 1;
    }
    let (mut agree3, mut agree2, mut conics, mut tested) = (0, 0, 0, 0);
    for (k, (a, b)) in curves.iter().enumerate() {
        let c = Congruence::new_3d(a.clone(), b.clone());
        let (Ok(i3), Ok(i2)) = (lax::monge_invariant(&c), lax::monge_invariant_with_exponent(&c, 2)) else { continue };
        let Ok(oracle) = lax::conic_oracle(&c, k as u64) else { continue };
        tested += 1;
        conics += oracle as usize;
        agree3 += (i3.is_zero() == oracle) as usize;
        agree2 += (i2.is_zero() == oracle) as usize;
        if k < 2 {
            ensure(oracle && i3.is_zero(), format!("curve {k} not recognised as a conic"))?;
        }
    }
    ensure(tested >= 20, format!("only {tested} curves usable"))?;
    ensure(conics > 0 && conics < tested, "sample has no conics or only conics")?;
    ensure(agree3 == tested, format!("exponent 3 agrees on {agree3}/{tested}"))?;
    Ok(format!("{tested} curves ({conics} conics): exponent 3 agrees {agree3}/{tested}, exponent 2 agrees {agree2}/{tested}"))
}

fn c10_recovery() -> Outcome {
    for (name, p) in [("dkp", "dkp"), ("second-heavenly", "alpha-planes")] {
        let e = load(name);
        let sys = &e.spec.system;
        let g = metric_of(sys)?;
        let r = lax::recover_metric(&pair(&e, p).congruence, sys).map_err(|e| format!("{name}: {e}"))?;
        ensure(r.conformally_equal(&g, sys).map_err(|e| e.to_string())?, format!("{name}: recovered metric differs"))?;
    }
    Ok("dKP and second heavenly recover the symbol metric".into())
}

fn random_coefficient(rng: &mut ChaCha8Rng, c: &Coordinates) -> Expr {
    const NAMES: [&str; 6] = ["u", "u_x", "u_zt", "u_yy", "x", "lam"];
    let mut acc = Expr::zero();
    for _ in 0..rng.gen_range(2..=4) {
        let mut t = Expr::int(rng.gen_range(-3..=3));
        for _ in 0..rng.gen_range(0..=2) {
            t = &t * &ex(NAMES[rng.gen_range(0..NAMES.len())], c);
        }
        acc = &acc + &t;
    }
    acc
}

fn c11_normal_lift() -> Outcome {
    let c = Coordinates::standard(4, &["u"]);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut done, mut skipped) = (0, 0);
    while done < 10 {
        let k: Vec<Expr> = (0..4).map(|_| random_coefficient(&mut rng, &c)).collect();
        let cong = Congruence::new_4d(k[0].clone(), k[1].clone(), k[2].clone(), k[3].clone());
        if !cong.is_nondegenerate() {
            skipped += 1;
            continue;
        }
        let p = lax::normal_lift_4d(&cong).map_err(|e| e.to_string())?;
        ensure(p.is_normal(), format!("congruence {done} lift not normal"))?;
        done += 1;
    }
    Ok(format!("10 lifts normal ({skipped} degenerate draws skipped)"))
}

fn random_expr(rng: &mut ChaCha8Rng, c: &Coordinates) -> Expr {
    const NAMES: [&str; 10] = ["u", "u_x", "u_t", "u_xt", "u_xxt", "u_yy", "u_tt", "u_xtt", "lam", "y"];
    let poly = |rng: &mut ChaCha8Rng| {
        let mut acc = Expr::zero();
        for _ in 0..rng.gen_range(1..=4) {
            let mut t = Expr::int(rng.gen_range(-3..=3));
            for _ in 0..rng.gen_range(0..=2) {
                t = &t * &ex(NAMES[rng.gen_range(0..NAMES.len())], c);
            }
            acc = &acc + &t;
        }
        acc
    };
    let n = poly(rng);
    let d = poly(rng);
    // d^2 + 1 never vanishes on rational points
    n.checked_div(&(&(&d * &d) + &Expr::one())).unwrap()
}

fn c12_kernel() -> Outcome {
    let e = load("dkp");
    let sys = &e.spec.system;
    let c = &sys.coords;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for k in 0..100 {
        let f = random_expr(&mut rng, c);
        let (i, j) = (rng.gen_range(0..3), rng.gen_range(0..3));
        ensure(f.total_derivative(i).total_derivative(j) == f.total_derivative(j).total_derivative(i), format!("D_{i}D_{j} case {k}"))?;
    }
    for k in 0..100 {
        let f = random_expr(&mut rng, c);
        let once = sys.reduce(&f).map_err(|e| e.to_string())?;
        ensure(sys.reduce(&once).map_err(|e| e.to_string())? == once, format!("reduce not idempotent, case {k}"))?;
    }
    for k in 0..100 {
        let f = random_expr(&mut rng, c);
        let xs: Vec<Expr> = (0..3).map(|_| Expr::int(rng.gen_range(-3..=3))).collect();
        let lhs = jet_symbol(&f.derivative_along(&xs), 4, c).map_err(|e| e.to_string())?;
        let rhs = jet_symbol(&f, 3, c).map_err(|e| e.to_string())?;
        ensure(lhs[0] == rhs[0].mul_vector(&xs), format!("symbol rule, case {k}"))?;
    }
    Ok("100 cases each: commuting D, idempotent reduce, symbol of D_X".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, u64, fn() -> Outcome); 12] = [
        ("dKP metric identity", 1, c1_dkp_metric),
        ("dKP Lax verification", 5, c2_dkp_lax),
        ("Manakov-Santini normalization", 30, c3_manakov_santini),
        ("Einstein-Weyl lift", 30, c4_master_ew_lift),
        ("gauge identity", 5, c5_gauge),
        ("Einstein-Weyl residuals", 120, c6_einstein_weyl),
        ("self-dual residuals", 120, c7_self_dual),
        ("Lax pairs are characteristic", 60, c8_characteristic),
        ("Monge invariant vs conic oracle", 60, c9_monge),
        ("metric recovery from congruence", 60, c10_recovery),
        ("4D normal lift", 60, c11_normal_lift),
        ("kernel properties", 60, c12_kernel),
    ];
    let mut failed = 0;
    for (k, (name, budget, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = f();
        let dt = t.elapsed();
        let in_time = dt <= Duration::from_secs(*budget);
        let ok = out.is_ok() && in_time;
        failed += !ok as usize;
        let detail = match &out {
            Ok(s) => s.clone(),
            Err(s) => format!("error: {s}"),
        };
        let timing = if in_time { "" } else { " OVER BUDGET" };
        println!(
            "{} {:>2} {name}: exact, {:.3} s of {budget} s{timing}; {detail}",
            if ok { "PASS" } else { "FAIL" },
            k + 1,
            dt.as_secs_f64()
        );
    }
    println!("{} of 12 criteria pass", 12 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
