//! Weyl connections, curvature, and the Einstein–Weyl and self-duality
//! residuals.
//!
//! Sign convention: `∇g = −2ω⊗g`, so
//! `Γ^k_ij = {k ij} + δ^k_i ω_j + δ^k_j ω_i − g_ij ω^k`.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use laxgeom_jet::gcd::squarefree;
use laxgeom_jet::matrix::Matrix;
use laxgeom_jet::{aux, Coeff, Expr, MultiIndex, Poly, Var};
use num_traits::{One, Signed, Zero};

use crate::conformal::Metric;
use crate::error::{Error, Result};
use crate::ideal::System;

/// `gamma[k][i][j] = Γ^k_ij`.
pub type Christoffel = Vec<Vec<Vec<Expr>>>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeylStructure {
    pub g: Metric,
    pub omega: Vec<Expr>,
}

impl WeylStructure {
    pub fn new(g: Metric, omega: Vec<Expr>) -> Self {
        WeylStructure { g, omega }
    }

    pub fn levi_civita(g: Metric) -> Self {
        let n = g.dim();
        WeylStructure { g, omega: vec![Expr::zero(); n] }
    }
}

pub fn levi_civita(g: &Matrix, ginv: &Matrix) -> Christoffel {
    let n = g.len();
    // dg[i][j][k] = D_i g_jk
    let dg: Vec<Vec<Vec<Expr>>> =
        (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| g[j][k].total_derivative(i)).collect()).collect()).collect();
    (0..n)
        .into_par_iter()
        .map(|k| {
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let mut acc = Expr::zero();
                            for l in 0..n {
                                if ginv[k][l].is_zero() {
                                    continue;
                                }
                                let s = &(&dg[i][l][j] + &dg[j][l][i]) - &dg[l][i][j];
                                if !s.is_zero() {
                                    acc = &acc + &(&ginv[k][l] * &s);
                                }
                            }
                            acc.scale(&Coeff::new(1.into(), 2.into()))
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

pub fn weyl_connection(ws: &WeylStructure) -> Result<Christoffel> {
    let ginv = ws.g.inverse()?;
    Ok(weyl_connection_with(&ws.g.g, &ginv, &ws.omega))
}

fn weyl_connection_with(g: &Matrix, ginv: &Matrix, omega: &[Expr]) -> Christoffel {
    let n = g.len();
    let mut gamma = levi_civita(g, ginv);
    let up: Vec<Expr> = (0..n).map(|k| matrix_vec(ginv, omega, k)).collect();
    for (k, plane) in gamma.iter_mut().enumerate() {
        for i in 0..n {
            for j in 0..n {
                let mut e = plane[i][j].clone();
                if k == i {
                    e = &e + &omega[j];
                }
                if k == j {
                    e = &e + &omega[i];
                }
                if !g[i][j].is_zero() && !up[k].is_zero() {
                    e = &e - &(&g[i][j] * &up[k]);
                }
                plane[i][j] = e;
            }
        }
    }
    gamma
}

fn matrix_vec(m: &Matrix, v: &[Expr], k: usize) -> Expr {
    let mut acc = Expr::zero();
    for (l, x) in v.iter().enumerate() {
        if !m[k][l].is_zero() && !x.is_zero() {
            acc = &acc + &(&m[k][l] * x);
        }
    }
    acc
}

/// `r[l][k][i][j] = R^l_{kij} = D_iΓ^l_jk − D_jΓ^l_ik + Γ^l_im Γ^m_jk − Γ^l_jm Γ^m_ik`.
pub fn riemann(gamma: &Christoffel) -> Vec<Vec<Vec<Vec<Expr>>>> {
    let n = gamma.len();
    (0..n)
        .into_par_iter()
        .map(|l| {
            (0..n)
                .map(|k| {
                    (0..n)
                        .map(|i| {
                            (0..n)
                                .map(|j| {
                                    if i == j {
                                        return Expr::zero();
                                    }
                                    let mut acc = &gamma[l][j][k].total_derivative(i) - &gamma[l][i][k].total_derivative(j);
                                    for m in 0..n {
                                        if !gamma[l][i][m].is_zero() && !gamma[m][j][k].is_zero() {
                                            acc = &acc + &(&gamma[l][i][m] * &gamma[m][j][k]);
                                        }
                                        if !gamma[l][j][m].is_zero() && !gamma[m][i][k].is_zero() {
                                            acc = &acc - &(&gamma[l][j][m] * &gamma[m][i][k]);
                                        }
                                    }
                                    acc
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// `Ric_kj = R^i_{kij}`.
pub fn ricci(r: &[Vec<Vec<Vec<Expr>>>]) -> Matrix {
    let n = r.len();
    (0..n).map(|k| (0..n).map(|j| laxgeom_jet::expr::sum((0..n).map(|i| &r[i][k][i][j]))).collect()).collect()
}

fn trace(ginv: &Matrix, s: &Matrix) -> Expr {
    let n = s.len();
    let mut acc = Expr::zero();
    for i in 0..n {
        for j in 0..n {
            if !ginv[i][j].is_zero() && !s[i][j].is_zero() {
                acc = &acc + &(&ginv[i][j] * &s[i][j]);
            }
        }
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Corollary {
    IdenticallyZero,
    ZeroModIdeal,
    Nonzero,
}

impl std::fmt::Display for Corollary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Corollary::IdenticallyZero => "IdenticallyZero",
            Corollary::ZeroModIdeal => "ZeroModIdeal",
            Corollary::Nonzero => "Nonzero",
        };
        f.write_str(s)
    }
}

/// Tensor components with labels, before and after reduction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Residual {
    pub labels: Vec<Vec<usize>>,
    pub offshell: Vec<Expr>,
    pub reduced: Vec<Expr>,
}

impl Residual {
    fn build(labels: Vec<Vec<usize>>, offshell: Vec<Expr>, system: &System) -> Residual {
        let reduced = offshell.par_iter().map(|e| normal_form(e, system)).collect();
        Residual { labels, offshell, reduced }
    }

    pub fn classify(&self) -> Corollary {
        classify_corollary(self)
    }
}

/// Normal form of the numerator over the original denominator; zero
/// exactly when the expression vanishes mod the ideal.
pub fn normal_form(e: &Expr, system: &System) -> Expr {
    match system.reduce(e) {
        Ok(r) => r,
        Err(_) => {
            let n = system.reduce(&Expr::from(e.num().clone())).expect("polynomial reduction");
            n.checked_div(&Expr::from(e.den())).expect("nonzero denominator")
        }
    }
}

pub fn classify_corollary(r: &Residual) -> Corollary {
    if r.offshell.iter().all(|e| e.is_zero()) {
        Corollary::IdenticallyZero
    } else if r.reduced.iter().all(|e| e.is_zero()) {
        Corollary::ZeroModIdeal
    } else {
        Corollary::Nonzero
    }
}

/// Trace-free part of the symmetrized Ricci tensor, `i ≤ j` entries.
pub fn ew_residual(ws: &WeylStructure, system: &System) -> Result<Residual> {
    let n = ws.g.dim();
    if n != 3 {
        return Err(Error::WrongDimension { expected: 3, found: n });
    }
    let (labels, entries) = ew_tensor(ws)?;
    Ok(Residual::build(labels, entries, system))
}

fn ew_tensor(ws: &WeylStructure) -> Result<(Vec<Vec<usize>>, Vec<Expr>)> {
    let n = ws.g.dim();
    let ginv = ws.g.inverse()?;
    let gamma = weyl_connection_with(&ws.g.g, &ginv, &ws.omega);
    let ric = ricci(&riemann(&gamma));
    let sym: Matrix =
        (0..n).map(|i| (0..n).map(|j| (&ric[i][j] + &ric[j][i]).scale(&Coeff::new(1.into(), 2.into()))).collect()).collect();
    let tr = trace(&ginv, &sym).scale(&Coeff::new(1.into(), (n as i64).into()));
    let mut labels = Vec::new();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            labels.push(vec![i, j]);
            out.push(&sym[i][j] - &(&tr * &ws.g.g[i][j]));
        }
    }
    Ok((labels, out))
}

/// Undetermined coefficients of the ansatz for `ω`.
fn ansatz(system: &System, order: usize) -> (Vec<Expr>, Vec<Var>) {
    let coords = &system.coords;
    let n = coords.dim();
    let jets_of = |k: usize| -> Vec<Expr> {
        let mut v = Vec::new();
        for a in 0..coords.n_unknowns() {
            for alpha in MultiIndex::all_of_order(n, k) {
                v.push(Expr::jet(a, alpha));
            }
        }
        v
    };
    let mut top = vec![Expr::one()];
    top.extend(jets_of(order));
    let mut low = vec![Expr::one()];
    if order > 0 {
        for k in 0..order {
            low.extend(jets_of(k));
        }
    }
    let mut basis = Vec::new();
    for t in &top {
        for l in &low {
            let b = t * l;
            if !basis.contains(&b) {
                basis.push(b);
            }
        }
    }
    let mut coeffs = Vec::new();
    let mut omega = Vec::new();
    for i in 0..n {
        let mut acc = Expr::zero();
        for (k, b) in basis.iter().enumerate() {
            let c = aux(&format!("weyl_c{i}_{k}"));
            coeffs.push(c);
            acc = &acc + &(&Expr::var(c) * b);
        }
        omega.push(acc);
    }
    (omega, coeffs)
}

/// Repeated linear elimination on a polynomial system in the unknowns.
/// Returns values for eliminated unknowns and the equations left over,
/// none of which is linear.
fn solve_coefficients(mut eqs: Vec<Poly>, unknowns: &[Var]) -> Result<(BTreeMap<Var, Poly>, Vec<Poly>)> {
    let is_unknown = |v: &Var| unknowns.contains(v);
    let mut solved: BTreeMap<Var, Poly> = BTreeMap::new();
    loop {
        eqs.retain(|e| !e.is_zero());
        let dedup: BTreeSet<Vec<(laxgeom_jet::Monomial, Coeff)>> = eqs.iter().map(|e| e.monic().terms().to_vec()).collect();
        eqs = dedup.into_iter().map(Poly::from_terms).collect();
        if eqs.is_empty() {
            break;
        }
        let linear: Vec<&Poly> = eqs.iter().filter(|e| e.total_degree() <= 1).collect();
        if linear.is_empty() {
            break;
        }
        let vars: Vec<Var> = {
            let mut s = BTreeSet::new();
            for e in &linear {
                s.extend(e.vars().into_iter().filter(is_unknown));
            }
            s.into_iter().collect()
        };
        // rows: coefficients, then the constant
        let mut rows: Vec<Vec<Coeff>> = linear
            .iter()
            .map(|e| {
                let mut row = vec![Coeff::zero(); vars.len() + 1];
                for (m, c) in e.terms() {
                    match m.factors().first() {
                        None => row[vars.len()] = c.clone(),
                        Some((v, _)) => row[vars.iter().position(|w| w == v).unwrap()] = c.clone(),
                    }
                }
                row
            })
            .collect();
        let pivots = rref_q(&mut rows);
        if pivots.contains(&vars.len()) {
            return Err(Error::NoSolution);
        }
        let mut step: BTreeMap<Var, Poly> = BTreeMap::new();
        for (r, &pc) in pivots.iter().enumerate() {
            let mut val = Poly::constant(-rows[r][vars.len()].clone());
            for (c, v) in vars.iter().enumerate() {
                if c != pc && !rows[r][c].is_zero() {
                    val = &val - &Poly::var(*v).scale(&rows[r][c]);
                }
            }
            step.insert(vars[pc], val);
        }
        let sub = |v: Var| step.get(&v).cloned();
        for val in solved.values_mut() {
            *val = val.substitute(&sub);
        }
        solved.extend(step.clone());
        eqs = eqs.iter().map(|e| e.substitute(&sub)).collect();
    }
    Ok((solved, eqs))
}

fn rref_q(a: &mut [Vec<Coeff>]) -> Vec<usize> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(p, r);
        let inv = Coeff::one() / &a[r][c];
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..cols {
                    let t = &f * &a[r][j];
                    a[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Finds the Weyl form making the EW residual vanish mod the ideal.
///
/// `ω` is sought affine in jets of order `ansatz_order` with coefficients
/// affine in jets of lower order.
pub fn solve_weyl_form(g: &Metric, system: &System, ansatz_order: usize) -> Result<WeylStructure> {
    match solve_weyl_form_particular(g, system, ansatz_order)? {
        (ws, 0) => Ok(ws),
        (_, free) => Err(Error::NonUnique(free)),
    }
}

/// Like [`solve_weyl_form`], but when the ansatz leaves a family of
/// solutions, returns the member with every free coefficient zero together
/// with the number of free coefficients.
pub fn solve_weyl_form_particular(g: &Metric, system: &System, ansatz_order: usize) -> Result<(WeylStructure, usize)> {
    let n = g.dim();
    if n != 3 {
        return Err(Error::WrongDimension { expected: 3, found: n });
    }
    let (omega, coeffs) = ansatz(system, ansatz_order);
    let ws = WeylStructure::new(g.clone(), omega);
    let (_, entries) = ew_tensor(&ws)?;
    let is_coeff = |v: Var| coeffs.contains(&v);
    let eqs: Vec<Poly> = entries
        .par_iter()
        .map(|e| {
            let r = system.reduce(&Expr::from(e.num().clone())).expect("polynomial reduction");
            r.num().split_by(|v| !is_coeff(v)).into_iter().map(|(_, c)| c).collect::<Vec<_>>()
        })
        .flatten()
        .collect();
    let (solved, left) = solve_coefficients(eqs, &coeffs)?;
    let mut free: BTreeSet<Var> = coeffs.iter().filter(|v| !solved.contains_key(v)).copied().collect();
    free.extend(solved.values().flat_map(|p| p.vars()));
    free.extend(left.iter().flat_map(|e| e.vars()));
    let zero = |v: Var| free.contains(&v).then(Poly::zero);
    if left.iter().any(|e| !e.substitute(&zero).is_zero()) {
        return Err(Error::NonUnique(free.len()));
    }
    let sub = |v: Var| {
        if free.contains(&v) {
            Some(Expr::zero())
        } else {
            solved.get(&v).map(|p| Expr::from(p.substitute(&zero)))
        }
    };
    let omega = ws.omega.iter().map(|w| w.substitute_with(&sub)).collect::<std::result::Result<Vec<_>, _>>()?;
    Ok((WeylStructure::new(g.clone(), omega), free.len()))
}

/// Square root of an expression when it is the square of one.
pub fn sqrt_exact(e: &Expr) -> Option<Expr> {
    let root = |p: &Poly| -> Option<Expr> {
        let lc = p.leading_coeff();
        if lc.is_negative() {
            return None;
        }
        let (a, b) = (lc.numer().sqrt(), lc.denom().sqrt());
        if &(&a * &a) != lc.numer() || &(&b * &b) != lc.denom() {
            return None;
        }
        let mut acc = Expr::constant(Coeff::new(a, b));
        for (s, k) in squarefree(p) {
            if k % 2 == 1 {
                return None;
            }
            acc = &acc * &Expr::from(s.pow(k / 2));
        }
        Some(acc)
    };
    let n = root(e.num())?;
    let d = root(&e.den())?;
    n.checked_div(&d).ok()
}

fn levi_civita_symbol(p: &[usize]) -> i64 {
    let mut sign = 1;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] == p[j] {
                return 0;
            }
            if p[i] > p[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// Weyl tensor `W_{abcd}` with all indices down.
pub fn weyl_tensor(g: &Metric) -> Result<BTreeMap<[usize; 4], Expr>> {
    let n = g.dim();
    let ginv = g.inverse()?;
    let gamma = levi_civita(&g.g, &ginv);
    let r = riemann(&gamma);
    let ric = ricci(&r);
    let sc = trace(&ginv, &ric);
    let nn = n as i64;
    let schouten: Matrix = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let t = &ric[i][j] - &(&sc * &g.g[i][j]).scale(&Coeff::new(1.into(), (2 * (nn - 1)).into()));
                    t.scale(&Coeff::new(1.into(), (nn - 2).into()))
                })
                .collect()
        })
        .collect();
    let idx: Vec<[usize; 4]> = (0..n)
        .flat_map(|a| (0..n).flat_map(move |b| (0..n).flat_map(move |c| (0..n).map(move |d| [a, b, c, d]))))
        .filter(|[a, b, c, d]| a < b && c < d)
        .collect();
    let gg = &g.g;
    let entries: Vec<([usize; 4], Expr)> = idx
        .into_par_iter()
        .map(|[a, b, c, d]| {
            let mut low = Expr::zero();
            for m in 0..n {
                if !gg[a][m].is_zero() && !r[m][b][c][d].is_zero() {
                    low = &low + &(&gg[a][m] * &r[m][b][c][d]);
                }
            }
            let kn = &(&(&gg[a][c] * &schouten[b][d]) - &(&gg[a][d] * &schouten[b][c]))
                - &(&(&gg[b][c] * &schouten[a][d]) - &(&gg[b][d] * &schouten[a][c]));
            ([a, b, c, d], &low - &kn)
        })
        .collect();
    let mut out = BTreeMap::new();
    for ([a, b, c, d], e) in entries {
        out.insert([a, b, c, d], e.clone());
        out.insert([b, a, c, d], -&e);
        out.insert([a, b, d, c], -&e);
        out.insert([b, a, d, c], e);
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    out.entry([a, b, c, d]).or_insert_with(Expr::zero);
                }
            }
        }
    }
    Ok(out)
}

/// Anti-self-dual part `W − o·⋆W` (Hodge star on the second pair), for
/// `a < b`, `c < d`. Zero on-shell iff the Weyl tensor is self-dual for
/// the orientation `o`.
pub fn sd_residual(g: &Metric, orientation: i32, system: &System) -> Result<Residual> {
    let n = g.dim();
    if n != 4 {
        return Err(Error::WrongDimension { expected: 4, found: n });
    }
    let det = g.det();
    if det.is_zero() {
        return Err(Error::Degenerate("metric is singular".into()));
    }
    // volume factor: rational when |det g| is a square, else a formal symbol
    let s = sqrt_exact(&det).or_else(|| sqrt_exact(&-&det)).unwrap_or_else(|| Expr::var(aux("vol_s")));
    let ginv = g.inverse()?;
    let w = weyl_tensor(g)?;
    // raised second pair: W_ab^{pq}
    let o = Expr::int(orientation.signum() as i64);
    let mut labels = Vec::new();
    let mut entries = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let mut up: BTreeMap<(usize, usize), Expr> = BTreeMap::new();
            for p in 0..n {
                for q in 0..n {
                    let mut acc = Expr::zero();
                    for r in 0..n {
                        for t in 0..n {
                            if ginv[p][r].is_zero() || ginv[q][t].is_zero() || w[&[a, b, r, t]].is_zero() {
                                continue;
                            }
                            acc = &acc + &(&(&ginv[p][r] * &ginv[q][t]) * &w[&[a, b, r, t]]);
                        }
                    }
                    up.insert((p, q), acc);
                }
            }
            for c in 0..n {
                for d in c + 1..n {
                    let mut star = Expr::zero();
                    for p in 0..n {
                        for q in 0..n {
                            let e = levi_civita_symbol(&[p, q, c, d]);
                            if e != 0 && !up[&(p, q)].is_zero() {
                                star = &star + &up[&(p, q)].scale(&Coeff::from_integer(e.into()));
                            }
                        }
                    }
                    let star = (&star * &s).scale(&Coeff::new(1.into(), 2.into()));
                    labels.push(vec![a, b, c, d]);
                    entries.push(&w[&[a, b, c, d]] - &(&o * &star));
                }
            }
        }
    }
    Ok(Residual::build(labels, entries, system))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideal::SolvedEquation;
    use laxgeom_jet::matrix;
    use laxgeom_jet::Coordinates;

    fn dkp() -> (System, Metric) {
        let c = Coordinates::standard(3, &["u"]);
        let v = |n: &str| Expr::var(c.parse_var(n).unwrap());
        let rhs = &(&v("u_yy") - &(&v("u") * &v("u_tt"))) - &(&v("u_t") * &v("u_t"));
        let p = c.parse_var("u_xt").unwrap().as_jet().unwrap();
        let s = System::new(c.clone(), vec![SolvedEquation::new("F", p, rhs)]).unwrap();
        let z = Expr::zero;
        let g = Metric::new(vec![
            vec![&v("u") * &Expr::int(-4), z(), Expr::int(2)],
            vec![z(), Expr::int(-1), z()],
            vec![Expr::int(2), z(), z()],
        ]);
        (s, g)
    }

    #[test]
    fn flat_metric_has_no_connection() {
        let (s, _) = dkp();
        let g = Metric::new(matrix::identity(3));
        let gamma = weyl_connection(&WeylStructure::levi_civita(g.clone())).unwrap();
        assert!(gamma.iter().flatten().flatten().all(|e| e.is_zero()));
        assert_eq!(ew_residual(&WeylStructure::levi_civita(g), &s).unwrap().classify(), Corollary::IdenticallyZero);
    }

    #[test]
    fn dkp_weyl_form() {
        let (s, g) = dkp();
        let ut = Expr::var(s.coords.parse_var("u_t").unwrap());
        let ws = WeylStructure::new(g.clone(), vec![&ut * &Expr::int(-2), Expr::zero(), Expr::zero()]);
        assert_eq!(ew_residual(&ws, &s).unwrap().classify(), Corollary::ZeroModIdeal);
        assert_eq!(ew_residual(&WeylStructure::levi_civita(g.clone()), &s).unwrap().classify(), Corollary::Nonzero);
        let solved = solve_weyl_form(&g, &s, 1).unwrap();
        assert_eq!(solved.omega, ws.omega);
    }

    #[test]
    fn first_bianchi_identity() {
        let c = Coordinates::standard(3, &["u"]);
        let v = |n: &str| Expr::var(c.parse_var(n).unwrap());
        let g = vec![
            vec![&v("u") + &Expr::one(), v("x"), Expr::zero()],
            vec![v("x"), Expr::int(2), v("u_t")],
            vec![Expr::zero(), v("u_t"), &v("y") * &v("y") + Expr::one()],
        ];
        let ginv = matrix::inverse(&g).unwrap();
        let r = riemann(&levi_civita(&g, &ginv));
        for l in 0..3 {
            for k in 0..3 {
                for i in 0..3 {
                    for j in 0..3 {
                        let s = &(&r[l][k][i][j] + &r[l][i][j][k]) + &r[l][j][k][i];
                        assert!(s.is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn rescaling_compensated_by_weyl_form() {
        let (s, g) = dkp();
        let v = |n: &str| Expr::var(s.coords.parse_var(n).unwrap());
        let f = &(&v("u") * &v("u")) + &Expr::one();
        let omega = vec![&v("u_t") * &Expr::int(-2), v("u_x"), Expr::zero()];
        let ws = WeylStructure::new(g.clone(), omega.clone());
        let half = Coeff::new(1.into(), 2.into());
        let shifted: Vec<Expr> =
            (0..3).map(|i| &omega[i] - &f.total_derivative(i).checked_div(&f).unwrap().scale(&half)).collect();
        let g2 = Metric::new(g.g.iter().map(|r| r.iter().map(|e| e * &f).collect()).collect());
        let a = ew_residual(&ws, &s).unwrap();
        let b = ew_residual(&WeylStructure::new(g2, shifted), &s).unwrap();
        assert_eq!(a.offshell, b.offshell);
    }

    #[test]
    fn square_roots() {
        let x = Expr::base(0);
        let e = &(&x * &x) * &Expr::int(4);
        assert_eq!(sqrt_exact(&e), Some(&x * &Expr::int(2)));
        assert_eq!(sqrt_exact(&x), None);
        assert_eq!(sqrt_exact(&Expr::ratio(9, 16)), Some(Expr::ratio(3, 4)));
    }
}
