use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use num_traits::{One, Signed};

use crate::error::{JetError, Result};
use crate::expr::Expr;
use crate::poly::{ratio, Coeff, Poly};
use crate::var::{aux_name, JetVar, MultiIndex, Var, MAX_DIM};

/// Names of base coordinates, unknowns and the spectral parameter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coordinates {
    base_names: Vec<String>,
    unknown_names: Vec<String>,
    spectral_name: String,
}

fn is_identifier(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic()) && cs.all(|c| c.is_ascii_alphanumeric())
}

impl Coordinates {
    pub fn new<S: AsRef<str>>(base: &[S], unknowns: &[S], spectral: &str) -> Result<Self> {
        let base_names: Vec<String> = base.iter().map(|s| s.as_ref().to_string()).collect();
        let unknown_names: Vec<String> = unknowns.iter().map(|s| s.as_ref().to_string()).collect();
        if !(3..=MAX_DIM).contains(&base_names.len()) {
            return Err(JetError::InvalidCoordinates(format!("dimension {} not in {{3, 4}}", base_names.len())));
        }
        if unknown_names.is_empty() {
            return Err(JetError::InvalidCoordinates("no unknowns".into()));
        }
        let mut seen = HashSet::new();
        for n in base_names.iter().chain(&unknown_names).chain(std::iter::once(&spectral.to_string())) {
            if !is_identifier(n) {
                return Err(JetError::InvalidCoordinates(format!("`{n}` is not an identifier")));
            }
            if !seen.insert(n.clone()) {
                return Err(JetError::InvalidCoordinates(format!("duplicate name `{n}`")));
            }
        }
        Ok(Coordinates { base_names, unknown_names, spectral_name: spectral.to_string() })
    }

    /// (x, y, t) or (x, y, z, t) with the given unknowns and `lam`.
    pub fn standard(dim: usize, unknowns: &[&str]) -> Self {
        let base: &[&str] = if dim == 3 { &["x", "y", "t"] } else { &["x", "y", "z", "t"] };
        Self::new(base, unknowns, "lam").expect("valid standard coordinates")
    }

    pub fn dim(&self) -> usize {
        self.base_names.len()
    }

    pub fn base_names(&self) -> &[String] {
        &self.base_names
    }

    pub fn unknown_names(&self) -> &[String] {
        &self.unknown_names
    }

    pub fn spectral_name(&self) -> &str {
        &self.spectral_name
    }

    pub fn n_unknowns(&self) -> usize {
        self.unknown_names.len()
    }

    pub fn base_index(&self, name: &str) -> Option<usize> {
        self.base_names.iter().position(|n| n == name)
    }

    pub fn unknown_index(&self, name: &str) -> Option<usize> {
        self.unknown_names.iter().position(|n| n == name)
    }

    /// Parses `x`, `lam`, `u`, `u_xt` (subscripts are base names, any order).
    pub fn parse_var(&self, name: &str) -> Result<Var> {
        if name == self.spectral_name {
            return Ok(Var::Lambda);
        }
        if let Some(i) = self.base_index(name) {
            return Ok(Var::Base(i as u8));
        }
        if let Some(a) = self.unknown_index(name) {
            return Ok(Var::jet(a, MultiIndex::ZERO));
        }
        if let Some((head, sub)) = name.split_once('_') {
            if let Some(a) = self.unknown_index(head) {
                if let Some(idx) = self.parse_subscript(sub) {
                    return Ok(Var::jet(a, MultiIndex::from_indices(&idx)));
                }
            }
        }
        Err(JetError::UnknownVariable(name.to_string()))
    }

    fn parse_subscript(&self, mut s: &str) -> Option<Vec<usize>> {
        let mut out = Vec::new();
        if s.is_empty() {
            return None;
        }
        while !s.is_empty() {
            let (i, len) = self
                .base_names
                .iter()
                .enumerate()
                .filter(|(_, n)| s.starts_with(n.as_str()))
                .map(|(i, n)| (i, n.len()))
                .max_by_key(|p| p.1)?;
            out.push(i);
            s = &s[len..];
            if out.len() > u8::MAX as usize {
                return None;
            }
        }
        Some(out)
    }

    pub fn jet_name(&self, j: &JetVar) -> String {
        let mut s = self.unknown_names.get(j.unknown as usize).cloned().unwrap_or_else(|| format!("w{}", j.unknown));
        if j.order() > 0 {
            s.push('_');
            for i in j.index.indices() {
                s.push_str(&self.base_names[i]);
            }
        }
        s
    }

    pub fn var_name(&self, v: Var) -> String {
        match v {
            Var::Base(i) => self.base_names[i as usize].clone(),
            Var::Jet(j) => self.jet_name(&j),
            Var::Lambda => self.spectral_name.clone(),
            Var::Gen(j) => {
                let mut s = format!("E{}", j.unknown);
                if j.order() > 0 {
                    s.push('_');
                    for i in j.index.indices() {
                        s.push_str(&self.base_names[i]);
                    }
                }
                s
            }
            Var::Aux(id) => aux_name(id),
        }
    }

    /// Every variable the coordinates can name (for validation).
    pub fn knows(&self, v: Var) -> bool {
        match v {
            Var::Base(i) => (i as usize) < self.dim(),
            Var::Jet(j) | Var::Gen(j) => (j.unknown as usize) < self.n_unknowns() && j.index.0[self.dim()..].iter().all(|&c| c == 0),
            Var::Lambda | Var::Aux(_) => true,
        }
    }

    pub fn fmt_poly(&self, p: &Poly) -> String {
        fmt_poly(p, &|v| self.var_name(v))
    }

    pub fn fmt_expr(&self, e: &Expr) -> String {
        if e.is_polynomial() {
            return self.fmt_poly(e.num());
        }
        let n = self.fmt_poly(e.num());
        let den = e.den();
        let d = self.fmt_poly(&den);
        let wrap = |s: String, p: &Poly| if p.len() > 1 || s.starts_with('-') || s.contains(['*', '/']) { format!("({s})") } else { s };
        format!("{}/{}", wrap(n, e.num()), wrap(d, &den))
    }
}

fn fmt_coeff(c: &Coeff) -> String {
    if c.denom().is_one() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

/// Prints a polynomial with `^` powers and `*` products, leading term first.
pub fn fmt_poly(p: &Poly, name: &dyn Fn(Var) -> String) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (k, (m, c)) in p.terms().iter().enumerate() {
        let neg = c.is_negative();
        let a = c.abs();
        if k == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mut factors: Vec<String> = Vec::new();
        // ascending variable order reads naturally: x before u_t before lam
        for &(v, e) in m.factors().iter().rev() {
            if e == 1 {
                factors.push(name(v));
            } else {
                factors.push(format!("{}^{}", name(v), e));
            }
        }
        if factors.is_empty() {
            out.push_str(&fmt_coeff(&a));
        } else {
            if !a.is_one() {
                let _ = write!(out, "{}*", fmt_coeff(&a));
            }
            out.push_str(&factors.join("*"));
        }
    }
    out
}

/// Symmetric tensor stored as coefficients of `θ^α` for `|α| = k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymTensor {
    pub dim: usize,
    pub k: usize,
    pub coeffs: BTreeMap<MultiIndex, Expr>,
}

impl SymTensor {
    pub fn zero(dim: usize, k: usize) -> Self {
        SymTensor { dim, k, coeffs: BTreeMap::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(|e| e.is_zero())
    }

    pub fn get(&self, alpha: &MultiIndex) -> Expr {
        self.coeffs.get(alpha).cloned().unwrap_or_else(Expr::zero)
    }

    /// Evaluates the form on a covector.
    pub fn eval(&self, theta: &[Expr]) -> Expr {
        let mut acc = Expr::zero();
        for (alpha, c) in &self.coeffs {
            let mut t = c.clone();
            for i in alpha.indices() {
                t = &t * &theta[i];
            }
            acc = &acc + &t;
        }
        acc
    }

    /// Symmetric product with a vector: coefficient form of `X(θ)·S(θ)`.
    pub fn mul_vector(&self, x: &[Expr]) -> SymTensor {
        let mut out: BTreeMap<MultiIndex, Expr> = BTreeMap::new();
        for (alpha, c) in &self.coeffs {
            for (i, xi) in x.iter().enumerate() {
                if xi.is_zero() {
                    continue;
                }
                let slot = out.entry(alpha.shifted(i)).or_insert_with(Expr::zero);
                *slot = &*slot + &(c * xi);
            }
        }
        out.retain(|_, e| !e.is_zero());
        SymTensor { dim: self.dim, k: self.k + 1, coeffs: out }
    }

    /// Quadratic case: the symmetric matrix with entries `((1+δ_ij)/2)` times
    /// the coefficient of `θ_iθ_j`.
    pub fn to_matrix(&self) -> Vec<Vec<Expr>> {
        assert_eq!(self.k, 2, "matrix form needs a quadratic symbol");
        let n = self.dim;
        let mut m = vec![vec![Expr::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let c = self.get(&MultiIndex::from_indices(&[i, j]));
                m[i][j] = if i == j { c } else { c.scale(&ratio(1, 2)) };
            }
        }
        m
    }

    pub fn from_matrix(m: &[Vec<Expr>]) -> SymTensor {
        let n = m.len();
        let mut coeffs = BTreeMap::new();
        for i in 0..n {
            for j in i..n {
                let c = if i == j { m[i][i].clone() } else { &m[i][j] + &m[j][i] };
                if !c.is_zero() {
                    coeffs.insert(MultiIndex::from_indices(&[i, j]), c);
                }
            }
        }
        SymTensor { dim: n, k: 2, coeffs }
    }
}

/// Order-`k` symbol of `e` with respect to each unknown:
/// `Σ_{|α|=k} ∂e/∂u_α θ^α`.
pub fn jet_symbol(e: &Expr, k: usize, coords: &Coordinates) -> Result<Vec<SymTensor>> {
    let order = e.jet_order().unwrap_or(0);
    if order > k {
        return Err(JetError::OrderExceeded { order, k });
    }
    let mut out = vec![SymTensor::zero(coords.dim(), k); coords.n_unknowns()];
    for v in e.vars() {
        if let Var::Jet(j) = v {
            if j.order() == k {
                let d = e.partial(v);
                if !d.is_zero() {
                    out[j.unknown as usize].coeffs.insert(j.index, d);
                }
            }
        }
    }
    Ok(out)
}

/// Highest jet order present; `None` for jet-free expressions.
pub fn order(e: &Expr) -> Option<usize> {
    e.jet_order()
}

/// Simultaneous substitution. Bindings whose images mention other bound
/// variables in a cycle of length two or more are rejected; a binding may
/// refer to its own variable (e.g. `λ → λ + c`).
pub fn substitute(e: &Expr, bindings: &[(Var, Expr)], coords: &Coordinates) -> Result<Expr> {
    let map: HashMap<Var, &Expr> = bindings.iter().map(|(v, x)| (*v, x)).collect();
    check_acyclic(&map, coords)?;
    e.substitute_with(&|v| map.get(&v).map(|x| (*x).clone()))
}

fn check_acyclic(map: &HashMap<Var, &Expr>, coords: &Coordinates) -> Result<()> {
    // depth-first search over the "image mentions" graph, ignoring self loops
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    fn visit(v: Var, map: &HashMap<Var, &Expr>, marks: &mut HashMap<Var, Mark>) -> Option<Var> {
        match marks.get(&v) {
            Some(Mark::Done) => return None,
            Some(Mark::Open) => return Some(v),
            None => {}
        }
        marks.insert(v, Mark::Open);
        if let Some(img) = map.get(&v) {
            for w in img.vars() {
                if w != v && map.contains_key(&w) {
                    if let Some(c) = visit(w, map, marks) {
                        return Some(c);
                    }
                }
            }
        }
        marks.insert(v, Mark::Done);
        None
    }
    let mut marks = HashMap::new();
    let mut keys: Vec<Var> = map.keys().copied().collect();
    keys.sort();
    for v in keys {
        if let Some(c) = visit(v, map, &mut marks) {
            return Err(JetError::CyclicSubstitution(coords.var_name(c)));
        }
    }
    Ok(())
}

/// Replaces every jet `w_α` of a bound unknown `w` by `D^α(image)`.
pub fn substitute_prolonged(e: &Expr, unknowns: &[(usize, Expr)]) -> Result<Expr> {
    let mut cache: HashMap<JetVar, Expr> = HashMap::new();
    let mut needed: Vec<JetVar> = e.vars().into_iter().filter_map(|v| v.as_jet()).collect();
    needed.sort_by_key(|j| j.order());
    for j in needed {
        let Some((_, img)) = unknowns.iter().find(|(a, _)| *a == j.unknown as usize) else { continue };
        let val = prolong_cached(&mut cache, img, j);
        cache.insert(j, val);
    }
    e.substitute_with(&|v| v.as_jet().and_then(|j| cache.get(&j).cloned()))
}

fn prolong_cached(cache: &mut HashMap<JetVar, Expr>, img: &Expr, j: JetVar) -> Expr {
    if let Some(v) = cache.get(&j) {
        return v.clone();
    }
    if j.order() == 0 {
        return img.clone();
    }
    let idx = j.index.indices();
    let i = *idx.last().unwrap();
    let prev = JetVar { unknown: j.unknown, index: j.index.checked_sub(&MultiIndex::unit(i)).unwrap() };
    let p = prolong_cached(cache, img, prev);
    cache.insert(prev, p.clone());
    p.total_derivative(i)
}

/// Partial derivative by name, the checked entry point for user input.
pub fn partial_by_name(e: &Expr, name: &str, coords: &Coordinates) -> Result<Expr> {
    let v = coords.parse_var(name)?;
    Ok(e.partial(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c3() -> Coordinates {
        Coordinates::standard(3, &["u"])
    }
    fn v(c: &Coordinates, n: &str) -> Expr {
        Expr::var(c.parse_var(n).unwrap())
    }

    #[test]
    fn coordinate_validation() {
        assert!(Coordinates::new(&["x", "y"], &["u"], "lam").is_err());
        assert!(Coordinates::new(&["x", "y", "x"], &["u"], "lam").is_err());
        assert!(Coordinates::new(&["x", "y", "t"], &["x"], "lam").is_err());
        assert_eq!(c3().dim(), 3);
    }

    #[test]
    fn jet_names_are_order_insensitive() {
        let c = c3();
        assert_eq!(c.parse_var("u_xt").unwrap(), c.parse_var("u_tx").unwrap());
        assert_eq!(c.var_name(c.parse_var("u_tx").unwrap()), "u_xt");
        assert!(c.parse_var("u_q").is_err());
        assert!(c.parse_var("w").is_err());
    }

    #[test]
    fn symbol_of_dkp() {
        let c = c3();
        let f = &(&(&v(&c, "u_xt") + &(&v(&c, "u") * &v(&c, "u_tt"))) + &(&v(&c, "u_t") * &v(&c, "u_t"))) - &v(&c, "u_yy");
        let s = &jet_symbol(&f, 2, &c).unwrap()[0];
        let m = s.to_matrix();
        assert_eq!(m[0][2], Expr::ratio(1, 2));
        assert_eq!(m[2][2], v(&c, "u"));
        assert_eq!(m[1][1], Expr::int(-1));
        assert!(jet_symbol(&(&v(&c, "u_t") * &v(&c, "u_t")), 2, &c).unwrap()[0].is_zero());
        assert!(matches!(jet_symbol(&f, 1, &c), Err(JetError::OrderExceeded { .. })));
    }

    #[test]
    fn spectral_shift_substitution() {
        let c = c3();
        let lam = Expr::lambda();
        let vt = {
            let cc = Coordinates::standard(3, &["u", "v"]);
            Expr::var(cc.parse_var("v_t").unwrap())
        };
        let e = &(&lam * &lam) + &(&vt * &lam);
        let s = substitute(&e, &[(Var::Lambda, &lam + &vt)], &c).unwrap();
        let expected = &(&(&lam * &lam) + &(&vt * &lam).scale(&crate::poly::rat(3))) + &(&vt * &vt).scale(&crate::poly::rat(2));
        assert_eq!(s, expected);
    }

    #[test]
    fn cycles_rejected() {
        let c = c3();
        let x = Var::Base(0);
        let y = Var::Base(1);
        let e = Expr::var(x);
        assert!(matches!(
            substitute(&e, &[(x, Expr::var(y)), (y, Expr::var(x))], &c),
            Err(JetError::CyclicSubstitution(_))
        ));
        assert_eq!(substitute(&e, &[(x, Expr::var(y))], &c).unwrap(), Expr::var(y));
    }

    #[test]
    fn prolonged_substitution() {
        let c = c3();
        // u -> x*u_t, so u_x -> u_t + x*u_xt
        let img = &v(&c, "x") * &v(&c, "u_t");
        let r = substitute_prolonged(&v(&c, "u_x"), &[(0, img)]);
        assert_eq!(r.unwrap(), &v(&c, "u_t") + &(&v(&c, "x") * &v(&c, "u_xt")));
    }

    #[test]
    fn printing() {
        let c = c3();
        let e = &(&v(&c, "u_xt") - &(&v(&c, "u") * &v(&c, "u_tt"))) + &Expr::ratio(1, 2);
        let s = c.fmt_expr(&e);
        assert!(s.contains("u_xt") && s.contains("u*u_tt") && s.contains("1/2"), "{s}");
    }
}
