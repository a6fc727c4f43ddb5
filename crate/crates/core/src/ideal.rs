//! Determined systems in solved form and reduction modulo their
//! differential ideal.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use laxgeom_jet::{Coordinates, Expr, JetVar, MultiIndex, Poly, Var};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolvedEquation {
    pub name: String,
    pub principal: JetVar,
    pub rhs: Expr,
}

impl SolvedEquation {
    pub fn new(name: &str, principal: JetVar, rhs: Expr) -> Self {
        SolvedEquation { name: name.to_string(), principal, rhs }
    }

    /// `principal − rhs`, the generator of the ideal.
    pub fn generator(&self) -> Expr {
        &Expr::var(Var::Jet(self.principal)) - &self.rhs
    }
}

/// Orderly ranking: total order first, then unknown priority, then the
/// multi-index compared count by count in coordinate priority order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ranking {
    /// Unknowns from highest to lowest.
    pub unknowns: Vec<usize>,
    /// Coordinates from most to least significant.
    pub coordinates: Vec<usize>,
}

impl Ranking {
    pub fn standard(coords: &Coordinates) -> Self {
        Ranking { unknowns: (0..coords.n_unknowns()).collect(), coordinates: (0..coords.dim()).collect() }
    }

    pub fn cmp(&self, a: &JetVar, b: &JetVar) -> Ordering {
        match a.order().cmp(&b.order()) {
            Ordering::Equal => {}
            o => return o,
        }
        let pos = |u: u8| self.unknowns.iter().position(|&x| x == u as usize).unwrap_or(usize::MAX);
        // earlier in the priority list ranks higher
        match pos(b.unknown).cmp(&pos(a.unknown)) {
            Ordering::Equal => {}
            o => return o,
        }
        for &c in &self.coordinates {
            match a.index.count(c).cmp(&b.index.count(c)) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        Ordering::Equal
    }

    fn all(coords: &Coordinates) -> Vec<Ranking> {
        let mut out = Vec::new();
        for u in permutations(coords.n_unknowns()) {
            for c in permutations(coords.dim()) {
                out.push(Ranking { unknowns: u.clone(), coordinates: c });
            }
        }
        out
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    // identity first, then lexicographic
    out.sort();
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub principals: Vec<(String, String)>,
    pub ranking: Ranking,
}

/// Determined system `u_{p_a} = rhs_a`, one equation per unknown.
#[derive(Clone, Debug)]
pub struct System {
    pub coords: Coordinates,
    pub equations: Vec<SolvedEquation>,
    pub ranking: Ranking,
    cache: Arc<RwLock<HashMap<JetVar, Expr>>>,
    certificates: Arc<RwLock<HashMap<JetVar, Expr>>>,
}

impl System {
    /// Validates and searches for an orderly ranking compatible with all
    /// equations; the identity ranking is tried first.
    pub fn new(coords: Coordinates, equations: Vec<SolvedEquation>) -> Result<Self> {
        let ranking = Self::check(&coords, &equations)?;
        Ok(System {
            coords,
            equations,
            ranking,
            cache: Arc::new(RwLock::new(HashMap::new())),
            certificates: Arc::new(RwLock::new(HashMap::new())),
        })
    }

    fn check(coords: &Coordinates, eqs: &[SolvedEquation]) -> Result<Ranking> {
        for (i, a) in eqs.iter().enumerate() {
            for b in &eqs[i + 1..] {
                if a.principal.unknown == b.principal.unknown {
                    return Err(Error::DuplicatePrincipal(a.name.clone(), b.name.clone()));
                }
            }
        }
        if eqs.len() != coords.n_unknowns() {
            return Err(Error::NotDetermined(format!("{} equations for {} unknowns", eqs.len(), coords.n_unknowns())));
        }
        for e in eqs {
            if e.principal.order() == 0 {
                return Err(Error::NotDetermined(format!("equation `{}` is solved for an underived unknown", e.name)));
            }
            if let Some(v) = e.rhs.vars().into_iter().find(|v| !coords.knows(*v) || matches!(v, Var::Gen(_))) {
                return Err(Error::RankingViolation { equation: e.name.clone(), jet: coords.var_name(v) });
            }
            if e.rhs.contains_var(Var::Jet(e.principal)) {
                return Err(Error::RankingViolation { equation: e.name.clone(), jet: coords.jet_name(&e.principal) });
            }
        }
        let violation = |r: &Ranking| -> Option<(String, String)> {
            for e in eqs {
                for v in e.rhs.vars() {
                    if let Var::Jet(j) = v {
                        if r.cmp(&j, &e.principal) != Ordering::Less {
                            return Some((e.name.clone(), coords.jet_name(&j)));
                        }
                    }
                }
            }
            None
        };
        let first = violation(&Ranking::standard(coords));
        let Some((equation, jet)) = first else { return Ok(Ranking::standard(coords)) };
        for r in Ranking::all(coords) {
            if violation(&r).is_none() {
                return Ok(r);
            }
        }
        Err(Error::RankingViolation { equation, jet })
    }

    pub fn validate(&self) -> ValidationReport {
        ValidationReport {
            principals: self.equations.iter().map(|e| (e.name.clone(), self.coords.jet_name(&e.principal))).collect(),
            ranking: self.ranking.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.dim()
    }

    /// Highest principal order.
    pub fn order(&self) -> usize {
        self.equations.iter().map(|e| e.principal.order()).max().unwrap_or(0)
    }

    pub fn equation(&self, name: &str) -> Option<&SolvedEquation> {
        self.equations.iter().find(|e| e.name == name)
    }

    pub fn generators(&self) -> Vec<Expr> {
        self.equations.iter().map(|e| e.generator()).collect()
    }

    fn principal_of(&self, j: &JetVar) -> Option<(usize, MultiIndex)> {
        self.equations
            .iter()
            .enumerate()
            .find(|(_, e)| e.principal.unknown == j.unknown)
            .and_then(|(a, e)| j.index.checked_sub(&e.principal.index).map(|tau| (a, tau)))
    }

    pub fn is_principal_multiple(&self, v: Var) -> bool {
        match v {
            Var::Jet(j) => self.principal_of(&j).is_some(),
            _ => false,
        }
    }

    /// Normal form of a single jet.
    fn normal_form_jet(&self, j: JetVar) -> Expr {
        if let Some(e) = self.cache.read().unwrap().get(&j) {
            return e.clone();
        }
        let (a, tau) = self.principal_of(&j).expect("principal multiple");
        let nf = if tau.order() == 0 {
            self.reduce_poly_parts(&self.equations[a].rhs)
        } else {
            let i = tau.indices()[0];
            let prev = JetVar { unknown: j.unknown, index: j.index.checked_sub(&MultiIndex::unit(i)).unwrap() };
            let base = self.normal_form_jet(prev);
            self.reduce_poly_parts(&base.total_derivative(i))
        };
        self.cache.write().unwrap().insert(j, nf.clone());
        nf
    }

    fn substitution_images(&self, e: &Expr) -> HashMap<Var, Expr> {
        let mut jets: Vec<JetVar> =
            e.vars().into_iter().filter_map(|v| v.as_jet()).filter(|j| self.principal_of(j).is_some()).collect();
        // low orders first keeps recursion shallow
        jets.sort_by_key(|j| j.order());
        jets.into_iter().map(|j| (Var::Jet(j), self.normal_form_jet(j))).collect()
    }

    fn reduce_poly_parts(&self, e: &Expr) -> Expr {
        let images = self.substitution_images(e);
        if images.is_empty() {
            return e.clone();
        }
        e.substitute_with(&|v| images.get(&v).cloned()).expect("normal form of a denominator vanished")
    }

    /// Normal form modulo the ideal. Fails only if a denominator reduces to 0.
    pub fn reduce(&self, e: &Expr) -> Result<Expr> {
        let images = self.substitution_images(e);
        if images.is_empty() {
            return Ok(e.clone());
        }
        let f = |v: Var| images.get(&v).cloned();
        let num = Expr::from(e.num().clone()).substitute_with(&f)?;
        if e.is_polynomial() {
            return Ok(num);
        }
        let den = Expr::from(e.den()).substitute_with(&f)?;
        if den.is_zero() {
            return Err(Error::DegenerateDenominator);
        }
        Ok(num.checked_div(&den)?)
    }

    /// Membership test; only the numerator matters, coefficientwise in λ.
    pub fn is_in_ideal(&self, e: &Expr) -> bool {
        self.reduce(&Expr::from(e.num().clone())).map(|r| r.is_zero()).unwrap_or(false)
    }

    /// Certificate for a principal multiple: an expression in jets and
    /// generator jets `ε_{a,σ}` (standing for `D^σ F_a`) equal to the jet.
    fn certificate_jet(&self, j: JetVar) -> Expr {
        if let Some(e) = self.certificates.read().unwrap().get(&j) {
            return e.clone();
        }
        let (a, tau) = self.principal_of(&j).expect("principal multiple");
        let cert = if tau.order() == 0 {
            let eps = Expr::var(Var::Gen(JetVar::new(a, MultiIndex::ZERO)));
            &self.certify(&self.equations[a].rhs) + &eps
        } else {
            let i = tau.indices()[0];
            let prev = JetVar { unknown: j.unknown, index: j.index.checked_sub(&MultiIndex::unit(i)).unwrap() };
            self.certify(&self.certificate_jet(prev).total_derivative(i))
        };
        self.certificates.write().unwrap().insert(j, cert.clone());
        cert
    }

    fn certify(&self, e: &Expr) -> Expr {
        let mut jets: Vec<JetVar> =
            e.vars().into_iter().filter_map(|v| v.as_jet()).filter(|j| self.principal_of(j).is_some()).collect();
        if jets.is_empty() {
            return e.clone();
        }
        jets.sort_by_key(|j| j.order());
        let images: HashMap<Var, Expr> = jets.into_iter().map(|j| (Var::Jet(j), self.certificate_jet(j))).collect();
        e.substitute_with(&|v| images.get(&v).cloned()).expect("certificate denominator vanished")
    }

    /// Writes `e` as `Σ_a □_a(F_a)` with `□_a = Σ_σ c_σ D^σ`, `|σ| ≤ max_order`.
    pub fn cofactor_extract(&self, e: &Expr, max_order: usize) -> Result<Cofactors> {
        if !self.is_in_ideal(e) {
            return Err(Error::NotInIdeal);
        }
        let cert = self.certify(e);
        if cert.den_factors().iter().any(|(s, _)| s.vars().iter().any(|v| matches!(v, Var::Gen(_)))) {
            return Err(Error::CofactorFailure("generator appears in a denominator".into()));
        }
        let den = cert.den();
        let gens: HashMap<Var, Expr> = cert
            .num()
            .vars()
            .into_iter()
            .filter_map(|v| match v {
                Var::Gen(g) => Some((v, self.equations[g.unknown as usize].generator().total_derivative_multi(&g.index))),
                _ => None,
            })
            .collect();
        let mut ops: BTreeMap<usize, BTreeMap<MultiIndex, Poly>> = BTreeMap::new();
        let mut needed = 0;
        for (m, c) in cert.num().terms() {
            // the largest generator jet of the term is the operator slot;
            // remaining generator jets are folded into the coefficient
            let Some(&(g, _)) = m.factors().iter().find(|(v, _)| matches!(v, Var::Gen(_))) else {
                return Err(Error::CofactorFailure("reduction left a term outside the ideal".into()));
            };
            let Var::Gen(gj) = g else { unreachable!() };
            needed = needed.max(gj.order());
            let rest = m.div(&laxgeom_jet::Monomial::var(g)).expect("factor present");
            let slot = ops.entry(gj.unknown as usize).or_default().entry(gj.index).or_insert_with(Poly::zero);
            *slot = &*slot + &Poly::term(rest, c.clone());
        }
        if needed > max_order {
            return Err(Error::OrderBudgetExceeded { needed, budget: max_order });
        }
        let mut out = Cofactors { operators: BTreeMap::new() };
        for (a, terms) in ops {
            let mut op = Operator::default();
            for (sigma, coeff) in terms {
                let c = Expr::from(coeff).substitute_with(&|v| gens.get(&v).cloned())?;
                let c = c.checked_div(&Expr::from(den.clone()))?;
                if !c.is_zero() {
                    op.terms.insert(sigma, c);
                }
            }
            if !op.terms.is_empty() {
                out.operators.insert(self.equations[a].name.clone(), op);
            }
        }
        let check = out.apply(self)?;
        if &check - e != Expr::zero() {
            return Err(Error::CofactorFailure("expansion does not reproduce the input".into()));
        }
        Ok(out)
    }
}

/// Linear total-derivative operator `Σ_σ c_σ D^σ`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Operator {
    pub terms: BTreeMap<MultiIndex, Expr>,
}

impl Operator {
    pub fn apply(&self, f: &Expr) -> Expr {
        let mut acc = Expr::zero();
        for (sigma, c) in &self.terms {
            acc = &acc + &(c * &f.total_derivative_multi(sigma));
        }
        acc
    }

    pub fn order(&self) -> usize {
        self.terms.keys().map(|s| s.order()).max().unwrap_or(0)
    }

    pub fn display(&self, coords: &Coordinates) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (sigma, c) in &self.terms {
            let d: String = sigma.indices().iter().map(|&i| format!("D_{}", coords.base_names()[i])).collect::<Vec<_>>().join(" ");
            let c = coords.fmt_expr(c);
            parts.push(if d.is_empty() { format!("({c})") } else { format!("({c}) {d}") });
        }
        parts.join(" + ")
    }
}

/// Operators `□_a` keyed by equation name.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Cofactors {
    pub operators: BTreeMap<String, Operator>,
}

impl Cofactors {
    /// `Σ_a □_a(F_a)`, expanded off-shell.
    pub fn apply(&self, system: &System) -> Result<Expr> {
        let mut acc = Expr::zero();
        for (name, op) in &self.operators {
            let eq = system.equation(name).ok_or_else(|| Error::CofactorFailure(format!("unknown equation `{name}`")))?;
            acc = &acc + &op.apply(&eq.generator());
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dkp() -> System {
        let c = Coordinates::standard(3, &["u"]);
        let v = |n: &str| Expr::var(c.parse_var(n).unwrap());
        let rhs = &(&v("u_yy") - &(&v("u") * &v("u_tt"))) - &(&v("u_t") * &v("u_t"));
        let p = c.parse_var("u_xt").unwrap().as_jet().unwrap();
        System::new(c.clone(), vec![SolvedEquation::new("F", p, rhs)]).unwrap()
    }

    #[test]
    fn generator_reduces_to_zero() {
        let s = dkp();
        let f = s.equations[0].generator();
        assert!(s.reduce(&f).unwrap().is_zero());
        assert!(s.is_in_ideal(&f.total_derivative(1)));
        let ut = Expr::var(s.coords.parse_var("u_t").unwrap());
        assert!(!s.is_in_ideal(&ut));
        let uyy = Expr::var(s.coords.parse_var("u_yy").unwrap());
        assert_eq!(s.reduce(&uyy).unwrap(), uyy);
    }

    #[test]
    fn one_step_prolongation() {
        let s = dkp();
        let c = &s.coords;
        let v = |n: &str| Expr::var(c.parse_var(n).unwrap());
        let r = s.reduce(&v("u_xxt")).unwrap();
        let rhs = &s.equations[0].rhs;
        let expected = s.reduce(&rhs.total_derivative(0)).unwrap();
        assert_eq!(r, expected);
        assert!(r.vars().iter().all(|v| !s.is_principal_multiple(*v)));
    }

    #[test]
    fn cofactors_of_constructed_input() {
        let s = dkp();
        let f = s.equations[0].generator();
        let u = Expr::var(s.coords.parse_var("u").unwrap());
        let e = &f.total_derivative(0) + &(&u * &f);
        let cf = s.cofactor_extract(&e, 1).unwrap();
        let op = &cf.operators["F"];
        assert_eq!(op.terms[&MultiIndex::ZERO], u);
        assert_eq!(op.terms[&MultiIndex::unit(0)], Expr::one());
        assert_eq!(s.cofactor_extract(&f, 0).unwrap().operators["F"].terms[&MultiIndex::ZERO], Expr::one());
        assert!(matches!(s.cofactor_extract(&e, 0), Err(Error::OrderBudgetExceeded { .. })));
        assert!(matches!(s.cofactor_extract(&u, 2), Err(Error::NotInIdeal)));
    }

    #[test]
    fn validation_errors() {
        let c = Coordinates::standard(3, &["u"]);
        let p = c.parse_var("u_xx").unwrap().as_jet().unwrap();
        let rhs = Expr::var(c.parse_var("u_xxy").unwrap());
        assert!(matches!(System::new(c.clone(), vec![SolvedEquation::new("F", p, rhs)]), Err(Error::RankingViolation { .. })));
        let q = c.parse_var("u_yy").unwrap().as_jet().unwrap();
        let eqs = vec![SolvedEquation::new("F", p, Expr::zero()), SolvedEquation::new("G", q, Expr::zero())];
        assert!(matches!(System::new(c, eqs), Err(Error::DuplicatePrincipal(..))));
    }

    #[test]
    fn permutations_start_with_identity() {
        let p = permutations(3);
        assert_eq!(p.len(), 6);
        assert_eq!(p[0], vec![0, 1, 2]);
    }
}
