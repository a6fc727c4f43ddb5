use std::collections::{BTreeSet, HashMap};
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::error::{JetError, Result};
use crate::gcd::{gcd, group_by_exponent, squarefree};
use crate::monomial::Monomial;
use crate::poly::{rat, ratio, Coeff, Poly};
use crate::var::{MultiIndex, Var};

/// Rational function `num / den` in canonical form.
///
/// The denominator is kept as its squarefree decomposition `Π s_k^k`
/// (distinct exponents, each `s_k` monic, squarefree, pairwise coprime),
/// which is unique, so structural equality decides equality of rational
/// functions. `num` is coprime to every `s_k`. Zero is `0` over the empty
/// product.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Expr {
    num: Poly,
    den: Vec<(Poly, u32)>,
}

impl Default for Expr {
    fn default() -> Self {
        Expr::zero()
    }
}

impl From<Poly> for Expr {
    fn from(p: Poly) -> Self {
        Expr { num: p, den: Vec::new() }
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

fn den_poly(den: &[(Poly, u32)]) -> Poly {
    let mut d = Poly::one();
    for (s, k) in den {
        d = &d * &s.pow(*k);
    }
    d
}

/// Refines two factored denominators to a common coprime base. Returns
/// triples `(q, ea, eb)` with `a = Π q^ea`, `b = Π q^eb`.
fn common_base(a: &[(Poly, u32)], b: &[(Poly, u32)]) -> Vec<(Poly, u32, u32)> {
    let mut out = Vec::new();
    let mut rest_b: Vec<(Poly, u32)> = b.to_vec();
    for (s, k) in a {
        let mut s = s.clone();
        for (t, j) in rest_b.iter_mut() {
            if s.is_constant() {
                break;
            }
            if t.is_constant() {
                continue;
            }
            if s == *t {
                out.push((s.clone(), *k, *j));
                *t = Poly::one();
                s = Poly::one();
                break;
            }
            let g = gcd(&s, t);
            if !g.is_one() {
                s = s.div_exact(&g).expect("gcd divides");
                *t = t.div_exact(&g).expect("gcd divides");
                out.push((g, *k, *j));
            }
        }
        if !s.is_constant() {
            out.push((s, *k, 0));
        }
    }
    for (t, j) in rest_b {
        if !t.is_constant() {
            out.push((t, 0, j));
        }
    }
    out
}

impl Expr {
    pub fn zero() -> Self {
        Expr { num: Poly::zero(), den: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::one().into()
    }

    pub fn int(n: i64) -> Self {
        Poly::int(n).into()
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Poly::constant(ratio(n, d)).into()
    }

    pub fn constant(c: Coeff) -> Self {
        Poly::constant(c).into()
    }

    pub fn var(v: Var) -> Self {
        Poly::var(v).into()
    }

    pub fn lambda() -> Self {
        Self::var(Var::Lambda)
    }

    pub fn base(i: usize) -> Self {
        Self::var(Var::Base(i as u8))
    }

    pub fn jet(unknown: usize, index: MultiIndex) -> Self {
        Self::var(Var::jet(unknown, index))
    }

    /// Canonicalizes `num / den`.
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(JetError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(Expr::zero());
        }
        if let Some(c) = den.constant_value() {
            return Ok(num.scale(&c.recip()).into());
        }
        let lc = den.leading_coeff();
        let num = num.scale(&lc.recip());
        Ok(Self::cancel(num, squarefree(&den.monic())))
    }

    /// Removes common factors of `num` with the factored denominator.
    fn cancel(mut num: Poly, den: Vec<(Poly, u32)>) -> Self {
        if num.is_zero() {
            return Expr::zero();
        }
        let mut out = Vec::new();
        let mut pending = den;
        while let Some((s, k)) = pending.pop() {
            let h = gcd(&num, &s);
            if h.is_one() {
                out.push((s, k));
                continue;
            }
            num = num.div_exact(&h).expect("gcd divides");
            let rest = s.div_exact(&h).expect("gcd divides");
            if !rest.is_constant() {
                out.push((rest, k));
            }
            if k > 1 {
                pending.push((h, k - 1));
            }
        }
        Expr { num, den: group_by_exponent(out) }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    /// Expanded denominator.
    pub fn den(&self) -> Poly {
        den_poly(&self.den)
    }

    pub fn den_factors(&self) -> &[(Poly, u32)] {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_empty()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_empty()
    }

    pub fn constant_value(&self) -> Option<Coeff> {
        if self.den.is_empty() {
            self.num.constant_value()
        } else {
            None
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut s = self.num.vars();
        for (f, _) in &self.den {
            s.extend(f.vars());
        }
        s
    }

    pub fn contains_var(&self, v: Var) -> bool {
        self.num.contains_var(v) || self.den.iter().any(|(f, _)| f.contains_var(v))
    }

    /// Number of stored terms, a rough size measure.
    pub fn size(&self) -> usize {
        self.num.len() + self.den.iter().map(|(f, _)| f.len()).sum::<usize>()
    }

    pub fn scale(&self, c: &Coeff) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn recip(&self) -> Result<Expr> {
        if self.is_zero() {
            return Err(JetError::DivisionByZero);
        }
        let lc = self.num.leading_coeff();
        let new_num = den_poly(&self.den).scale(&lc.recip());
        if self.num.is_constant() {
            return Ok(new_num.into());
        }
        // numerator and denominator are coprime, so nothing cancels
        Ok(Expr { num: new_num, den: squarefree(&self.num.monic()) })
    }

    pub fn checked_div(&self, other: &Expr) -> Result<Expr> {
        if other.is_zero() {
            return Err(JetError::DivisionByZero);
        }
        Ok(self * &other.recip()?)
    }

    pub fn pow(&self, e: i32) -> Result<Expr> {
        if e < 0 {
            return self.recip()?.pow(-e);
        }
        let e = e as u32;
        if e == 0 {
            return Ok(Expr::one());
        }
        Ok(Expr { num: self.num.pow(e), den: self.den.iter().map(|(s, k)| (s.clone(), k * e)).collect() })
    }

    /// Shared quotient-rule step for derivations `d` of the polynomial ring:
    /// `d(N / Π s^k) = (dN·S − N·Σ k·ds·S/s) / Π s^(k+1)` with `S = Π s`.
    fn derivation(&self, d: &dyn Fn(&Poly) -> Poly) -> Expr {
        let dn = d(&self.num);
        if self.den.is_empty() {
            return dn.into();
        }
        let ds: Vec<Poly> = self.den.iter().map(|(s, _)| d(s)).collect();
        if ds.iter().all(|p| p.is_zero()) {
            return Self::cancel(dn, self.den.clone());
        }
        // only factors moved by the derivation gain an exponent
        let radical = den_poly(
            &self.den.iter().zip(&ds).filter(|(_, d)| !d.is_zero()).map(|((s, _), _)| (s.clone(), 1)).collect::<Vec<_>>(),
        );
        let mut num = &dn * &radical;
        for ((s, k), dsk) in self.den.iter().zip(&ds) {
            if dsk.is_zero() {
                continue;
            }
            let others = radical.div_exact(s).expect("factor of radical");
            num = &num - &(&(&self.num * dsk) * &others).scale(&rat(*k as i64));
        }
        let den: Vec<(Poly, u32)> =
            self.den.iter().zip(&ds).map(|((s, k), d)| (s.clone(), if d.is_zero() { *k } else { k + 1 })).collect();
        Self::cancel(num, group_by_exponent(den))
    }

    /// Formal partial derivative with all variables independent.
    pub fn partial(&self, v: Var) -> Expr {
        self.derivation(&|p: &Poly| p.partial(v))
    }

    /// Total derivative `D_i`.
    pub fn total_derivative(&self, i: usize) -> Expr {
        self.derivation(&|p: &Poly| p.total_derivative(i))
    }

    /// Iterated total derivative `D^α`.
    pub fn total_derivative_multi(&self, alpha: &MultiIndex) -> Expr {
        let mut e = self.clone();
        for i in alpha.indices() {
            e = e.total_derivative(i);
        }
        e
    }

    /// Derivative along a vector field: `Σ X^i D_i e`.
    pub fn derivative_along(&self, x: &[Expr]) -> Expr {
        let mut acc = Expr::zero();
        for (i, xi) in x.iter().enumerate() {
            if !xi.is_zero() {
                acc = &acc + &(xi * &self.total_derivative(i));
            }
        }
        acc
    }

    /// Simultaneous substitution. Variables not mapped by `f` are kept.
    pub fn substitute_with(&self, f: &dyn Fn(Var) -> Option<Expr>) -> Result<Expr> {
        let mut images: HashMap<Var, Expr> = HashMap::new();
        for v in self.vars() {
            if let Some(e) = f(v) {
                images.insert(v, e);
            }
        }
        if images.is_empty() {
            return Ok(self.clone());
        }
        let num = substitute_poly(&self.num, &images);
        if self.den.is_empty() {
            return Ok(num);
        }
        let mut den = Expr::one();
        for (s, k) in &self.den {
            den = &den * &substitute_poly(s, &images).pow(*k as i32)?;
        }
        num.checked_div(&den)
    }

    /// Applies a polynomial map to numerator and expanded denominator.
    pub fn map_polys(&self, f: impl Fn(&Poly) -> Poly) -> Result<Expr> {
        let n = f(&self.num);
        if self.den.is_empty() {
            return Ok(n.into());
        }
        Expr::new(n, f(&self.den()))
    }

    /// Numerator coefficients in λ.
    pub fn lambda_coefficients(&self) -> Vec<Poly> {
        self.num.coeffs_in(Var::Lambda)
    }

    /// Highest jet order present, `None` for jet-free expressions.
    pub fn jet_order(&self) -> Option<usize> {
        self.vars().iter().filter_map(|v| v.as_jet()).map(|j| j.order()).max()
    }
}

/// Substitutes rational images into a polynomial.
fn substitute_poly(p: &Poly, images: &HashMap<Var, Expr>) -> Expr {
    if images.values().all(|e| e.is_polynomial()) {
        return p.substitute(&|v| images.get(&v).map(|e| e.num.clone())).into();
    }
    // common denominator Π den(img_v)^(max exponent of v)
    let mut max_exp: HashMap<Var, u32> = HashMap::new();
    for (m, _) in p.terms() {
        for &(v, e) in m.factors() {
            if images.get(&v).is_some_and(|img| !img.is_polynomial()) {
                let slot = max_exp.entry(v).or_insert(0);
                *slot = (*slot).max(e);
            }
        }
    }
    let mut den_parts: Vec<(Poly, u32)> = Vec::new();
    let mut den_polys: HashMap<Var, Poly> = HashMap::new();
    for (v, &e) in &max_exp {
        let d = images[v].den();
        den_polys.insert(*v, d);
        let factored = Expr { num: Poly::one(), den: images[v].den.iter().map(|(s, k)| (s.clone(), k * e)).collect() };
        den_parts = mul_dens(&den_parts, &factored.den);
    }
    let mut acc = Poly::zero();
    for (m, c) in p.terms() {
        let mut term = Poly::constant(c.clone());
        let mut kept = Vec::new();
        for &(v, e) in m.factors() {
            match images.get(&v) {
                None => kept.push((v, e)),
                Some(img) => {
                    term = &term * &img.num.pow(e);
                    if let Some(&me) = max_exp.get(&v) {
                        term = &term * &den_polys[&v].pow(me - e);
                    }
                }
            }
        }
        acc = &acc + &term.mul_monomial(&Monomial::from_pairs(kept), &Coeff::one());
    }
    Expr::cancel(acc, den_parts)
}

fn mul_dens(a: &[(Poly, u32)], b: &[(Poly, u32)]) -> Vec<(Poly, u32)> {
    if a.is_empty() {
        return b.to_vec();
    }
    if b.is_empty() {
        return a.to_vec();
    }
    group_by_exponent(common_base(a, b).into_iter().map(|(q, ea, eb)| (q, ea + eb)).collect())
}

impl Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den.is_empty() && rhs.den.is_empty() {
            return (&self.num + &rhs.num).into();
        }
        if rhs.den.is_empty() {
            // (a + c·b)/b stays reduced
            return Expr { num: &self.num + &(&rhs.num * &self.den()), den: self.den.clone() };
        }
        if self.den.is_empty() {
            return Expr { num: &(&self.num * &rhs.den()) + &rhs.num, den: rhs.den.clone() };
        }
        if self.den == rhs.den {
            return Expr::cancel(&self.num + &rhs.num, self.den.clone());
        }
        let base = common_base(&self.den, &rhs.den);
        let mut fa = Poly::one();
        let mut fb = Poly::one();
        let mut lcm = Vec::new();
        let mut may_cancel = Vec::new();
        for (q, ea, eb) in base {
            let e = ea.max(eb);
            if e > ea {
                fa = &fa * &q.pow(e - ea);
            }
            if e > eb {
                fb = &fb * &q.pow(e - eb);
            }
            if ea == eb {
                may_cancel.push((q, e));
            } else {
                lcm.push((q, e));
            }
        }
        let num = &(&self.num * &fa) + &(&rhs.num * &fb);
        if num.is_zero() {
            return Expr::zero();
        }
        let partial = Expr::cancel(num, may_cancel);
        lcm.extend(partial.den);
        Expr { num: partial.num, den: group_by_exponent(lcm) }
    }
}

impl Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        self + &(-rhs)
    }
}

impl Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        if self.is_zero() || rhs.is_zero() {
            return Expr::zero();
        }
        if self.den.is_empty() && rhs.den.is_empty() {
            return (&self.num * &rhs.num).into();
        }
        if let Some(c) = self.constant_value() {
            return rhs.scale(&c);
        }
        if let Some(c) = rhs.constant_value() {
            return self.scale(&c);
        }
        let a = Expr::cancel(self.num.clone(), rhs.den.clone());
        let b = Expr::cancel(rhs.num.clone(), self.den.clone());
        Expr { num: &a.num * &b.num, den: mul_dens(&a.den, &b.den) }
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr { num: -&self.num, den: self.den.clone() }
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr { num: -self.num, den: self.den }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for Expr {
            type Output = Expr;
            fn $f(self, rhs: Expr) -> Expr {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $f(self, rhs: &Expr) -> Expr {
                (&self).$f(rhs)
            }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $f(self, rhs: Expr) -> Expr {
                self.$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Sum of expressions, adding polynomial summands first.
pub fn sum<'a, I: IntoIterator<Item = &'a Expr>>(it: I) -> Expr {
    let mut polys = Poly::zero();
    let mut rest = Expr::zero();
    for e in it {
        if e.is_polynomial() {
            polys = &polys + e.num();
        } else {
            rest = &rest + e;
        }
    }
    &rest + &Expr::from(polys)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Expr {
        Expr::base(0)
    }
    fn u() -> Expr {
        Expr::jet(0, MultiIndex::ZERO)
    }
    fn ut() -> Expr {
        Expr::jet(0, MultiIndex::unit(2))
    }

    #[test]
    fn canonical_division() {
        assert_eq!(x().checked_div(&x()).unwrap(), Expr::one());
        assert_eq!(x().checked_div(&Expr::zero()), Err(JetError::DivisionByZero));
        let a = (&x() + &u()).checked_div(&(&x() * &u())).unwrap();
        let b = &x().recip().unwrap() + &u().recip().unwrap();
        assert_eq!(a, b);
        let half = Expr::ratio(1, 2);
        let c = x().checked_div(&(&half * &u())).unwrap();
        assert!(c.den().leading_coeff().is_one());
    }

    #[test]
    fn factored_denominators_are_canonical() {
        let p = &x() + &u();
        let q = &x() - &u();
        let a = Expr::new(Poly::one(), (&p * &q).num().clone()).unwrap();
        let b = &p.recip().unwrap() * &q.recip().unwrap();
        assert_eq!(a, b);
        assert_eq!(a.den_factors().len(), 1);
        let c = Expr::new(x().num().clone(), (&(&p * &p) * &q).num().clone()).unwrap();
        assert_eq!(c.den_factors().len(), 2);
        assert_eq!(&(&c * &p) * &(&p * &q), x());
    }

    #[test]
    fn cancellation_in_sums() {
        let p = &x() + &u();
        let q = &x() - &u();
        // 1/(p q) + 1/(p q) style cancellation: x/(p q) - u/(p q) = 1/p
        let d = (&p * &q).recip().unwrap();
        let e = &(&x() * &d) - &(&u() * &d);
        assert_eq!(e, p.recip().unwrap());
        let f = &q.checked_div(&p).unwrap() + &Expr::int(2).checked_div(&p).unwrap();
        assert_eq!(f, (&q + &Expr::int(2)).checked_div(&p).unwrap());
    }

    #[test]
    fn quotient_rule() {
        let e = (&ut() * &ut()).checked_div(&u()).unwrap();
        let d = e.partial(Var::jet(0, MultiIndex::ZERO));
        let expected = -(&(&ut() * &ut()) * &u().pow(-2).unwrap());
        assert_eq!(d, expected);
    }

    #[test]
    fn total_derivative_of_fraction() {
        let e = u().recip().unwrap();
        let ux = Expr::jet(0, MultiIndex::unit(0));
        assert_eq!(e.total_derivative(0), -(&ux * &u().pow(-2).unwrap()));
        // D_x(x / x^2) = -1/x^2
        let f = x().checked_div(&(&x() * &x())).unwrap();
        assert_eq!(f.total_derivative(0), -x().pow(-2).unwrap());
    }

    #[test]
    fn rational_substitution() {
        let e = &x() * &u();
        let s = e
            .substitute_with(&|v| match v {
                Var::Base(0) => Some(u().recip().unwrap()),
                _ => None,
            })
            .unwrap();
        assert_eq!(s, Expr::one());
        let g = (&x() + &u()).recip().unwrap();
        let s = g.substitute_with(&|v| match v {
            Var::Base(0) => Some(-u()),
            _ => None,
        });
        assert_eq!(s, Err(JetError::DivisionByZero));
    }
}
