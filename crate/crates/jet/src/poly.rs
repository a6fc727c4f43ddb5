use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::monomial::Monomial;
use crate::var::Var;

pub type Coeff = BigRational;

/// Sparse polynomial with exact rational coefficients. Terms are kept sorted
/// with the leading monomial first and never hold zero coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct Poly {
    terms: Vec<(Monomial, Coeff)>,
}

pub fn rat(n: i64) -> Coeff {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Coeff {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Coeff::one())
    }

    pub fn constant(c: Coeff) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            Poly { terms: vec![(Monomial::one(), c)] }
        }
    }

    pub fn int(n: i64) -> Self {
        Self::constant(rat(n))
    }

    pub fn var(v: Var) -> Self {
        Self::term(Monomial::var(v), Coeff::one())
    }

    pub fn term(m: Monomial, c: Coeff) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            Poly { terms: vec![(m, c)] }
        }
    }

    /// Builds a polynomial from arbitrary (possibly repeated) terms.
    pub fn from_terms<I: IntoIterator<Item = (Monomial, Coeff)>>(it: I) -> Self {
        let mut acc: HashMap<Monomial, Coeff> = HashMap::new();
        for (m, c) in it {
            *acc.entry(m).or_insert_with(Coeff::zero) += c;
        }
        Self::from_map(acc)
    }

    fn from_map(acc: HashMap<Monomial, Coeff>) -> Self {
        let mut terms: Vec<_> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        Poly { terms }
    }

    pub fn terms(&self) -> &[(Monomial, Coeff)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one() && self.terms[0].1.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0.is_one())
    }

    pub fn constant_value(&self) -> Option<Coeff> {
        match self.terms.as_slice() {
            [] => Some(Coeff::zero()),
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn leading(&self) -> Option<&(Monomial, Coeff)> {
        self.terms.first()
    }

    pub fn leading_coeff(&self) -> Coeff {
        self.terms.first().map_or_else(Coeff::zero, |t| t.1.clone())
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.first().map_or(0, |t| t.0.degree())
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut s = BTreeSet::new();
        for (m, _) in &self.terms {
            s.extend(m.vars());
        }
        s
    }

    pub fn contains_var(&self, v: Var) -> bool {
        self.terms.iter().any(|(m, _)| m.degree_in(v) > 0)
    }

    pub fn degree_in(&self, v: Var) -> u32 {
        self.terms.iter().map(|(m, _)| m.degree_in(v)).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &Coeff) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect() }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Coeff) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(t, k)| (t.mul(m), k * c)).collect() }
    }

    /// Divides every coefficient by the leading one.
    pub fn monic(&self) -> Poly {
        match self.terms.first() {
            None => Poly::zero(),
            Some((_, c)) if c.is_one() => self.clone(),
            Some((_, c)) => self.scale(&c.recip()),
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut result = Poly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    fn merge(&self, other: &Poly, negate: bool) -> Poly {
        let (a, b) = (&self.terms, &other.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Less => {
                    let c = if negate { -&b[j].1 } else { b[j].1.clone() };
                    out.push((b[j].0.clone(), c));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = if negate { &a[i].1 - &b[j].1 } else { &a[i].1 + &b[j].1 };
                    if !c.is_zero() {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(a[i..].iter().cloned());
        for t in &b[j..] {
            let c = if negate { -&t.1 } else { t.1.clone() };
            out.push((t.0.clone(), c));
        }
        Poly { terms: out }
    }

    fn product(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if let Some(c) = self.constant_value() {
            return other.scale(&c);
        }
        if let Some(c) = other.constant_value() {
            return self.scale(&c);
        }
        if other.terms.len() == 1 {
            return self.mul_monomial(&other.terms[0].0, &other.terms[0].1);
        }
        if self.terms.len() == 1 {
            return other.mul_monomial(&self.terms[0].0, &self.terms[0].1);
        }
        let mut acc: HashMap<Monomial, Coeff> = HashMap::with_capacity(self.terms.len() * other.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let c = ca * cb;
                match acc.entry(ma.mul(mb)) {
                    std::collections::hash_map::Entry::Occupied(mut e) => *e.get_mut() += c,
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(c);
                    }
                }
            }
        }
        Self::from_map(acc)
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        assert!(!d.is_zero(), "division by zero polynomial");
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if let Some(c) = d.constant_value() {
            return Some(self.scale(&c.recip()));
        }
        if d.terms.len() == 1 {
            let (dm, dc) = &d.terms[0];
            let inv = dc.recip();
            let mut terms = Vec::with_capacity(self.terms.len());
            for (m, c) in &self.terms {
                terms.push((m.div(dm)?, c * &inv));
            }
            return Some(Poly { terms });
        }
        // a quick degree test per variable rules out most non-divisors
        for v in d.vars() {
            if d.degree_in(v) > self.degree_in(v) {
                return None;
            }
        }
        if d.total_degree() > self.total_degree() {
            return None;
        }
        let (lm, lc) = d.terms[0].clone();
        let lc_inv = lc.recip();
        let mut rem: BTreeMap<Monomial, Coeff> = self.terms.iter().cloned().collect();
        let mut quot = Vec::new();
        while let Some((m, c)) = rem.pop_last() {
            let qm = m.div(&lm)?;
            let qc = &c * &lc_inv;
            for (dm, dc) in &d.terms[1..] {
                let key = dm.mul(&qm);
                let delta = dc * &qc;
                match rem.entry(key) {
                    std::collections::btree_map::Entry::Occupied(mut e) => {
                        *e.get_mut() -= delta;
                        if e.get().is_zero() {
                            e.remove();
                        }
                    }
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(-delta);
                    }
                }
            }
            quot.push((qm, qc));
        }
        Some(Poly { terms: quot })
    }

    /// Greatest common monomial divisor of all terms.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.iter();
        let Some((first, _)) = it.next() else { return Monomial::one() };
        let mut g = first.clone();
        for (m, _) in it {
            if g.is_one() {
                break;
            }
            g = g.gcd(m);
        }
        g
    }

    /// Coefficients with respect to `v`, indexed by exponent.
    pub fn coeffs_in(&self, v: Var) -> Vec<Poly> {
        let deg = self.degree_in(v) as usize;
        let mut buckets: Vec<Vec<(Monomial, Coeff)>> = vec![Vec::new(); deg + 1];
        for (m, c) in &self.terms {
            let (rest, e) = m.split_off(v);
            buckets[e as usize].push((rest, c.clone()));
        }
        buckets
            .into_iter()
            .map(|mut ts| {
                // removing one variable keeps relative order only within equal exponents
                ts.sort_unstable_by(|a, b| b.0.cmp(&a.0));
                Poly { terms: ts }
            })
            .collect()
    }

    pub fn from_coeffs_in(v: Var, coeffs: &[Poly]) -> Poly {
        let mut acc = Vec::new();
        for (e, c) in coeffs.iter().enumerate() {
            let m = Monomial::pow(v, e as u32);
            acc.extend(c.terms.iter().map(|(t, k)| (t.mul(&m), k.clone())));
        }
        Poly::from_terms(acc)
    }

    /// Groups terms by their part in the variables selected by `keep`,
    /// returning `(monomial in selected vars, coefficient polynomial)` pairs.
    pub fn split_by<F: Fn(Var) -> bool>(&self, keep: F) -> Vec<(Monomial, Poly)> {
        let mut groups: HashMap<Monomial, Vec<(Monomial, Coeff)>> = HashMap::new();
        for (m, c) in &self.terms {
            let mut sel = Vec::new();
            let mut rest = Vec::new();
            for &(v, e) in m.factors() {
                if keep(v) {
                    sel.push((v, e));
                } else {
                    rest.push((v, e));
                }
            }
            groups
                .entry(Monomial::from_pairs(sel))
                .or_default()
                .push((Monomial::from_pairs(rest), c.clone()));
        }
        let mut out: Vec<(Monomial, Poly)> = groups
            .into_iter()
            .map(|(k, mut ts)| {
                ts.sort_unstable_by(|a, b| b.0.cmp(&a.0));
                (k, Poly { terms: ts })
            })
            .collect();
        out.sort_by(|a, b| b.0.cmp(&a.0));
        out
    }

    /// Formal partial derivative.
    pub fn partial(&self, v: Var) -> Poly {
        let mut terms = Vec::new();
        for (m, c) in &self.terms {
            if let Some((rest, e)) = m.lowered(v) {
                terms.push((rest, c * rat(e as i64)));
            }
        }
        Poly::from_terms(terms)
    }

    /// Total derivative in base direction `i`: base coordinate `i` maps to 1,
    /// jets and generator jets are prolonged, everything else is constant.
    pub fn total_derivative(&self, i: usize) -> Poly {
        let mut acc: HashMap<Monomial, Coeff> = HashMap::new();
        for (m, c) in &self.terms {
            for &(v, e) in m.factors() {
                let image = match v {
                    Var::Base(j) if j as usize == i => None,
                    Var::Jet(_) | Var::Gen(_) => v.prolonged(i),
                    _ => continue,
                };
                let (rest, _) = m.lowered(v).expect("factor present");
                let key = match image {
                    Some(w) => rest.mul(&Monomial::var(w)),
                    None => rest,
                };
                *acc.entry(key).or_insert_with(Coeff::zero) += c * rat(e as i64);
            }
        }
        Self::from_map(acc)
    }

    /// Substitutes polynomials for variables simultaneously.
    pub fn substitute(&self, f: &dyn Fn(Var) -> Option<Poly>) -> Poly {
        let mut images: HashMap<Var, Option<Poly>> = HashMap::new();
        let mut powers: HashMap<(Var, u32), Poly> = HashMap::new();
        let mut acc: HashMap<Monomial, Coeff> = HashMap::new();
        let mut untouched = true;
        for (m, _) in &self.terms {
            for v in m.vars() {
                let img = images.entry(v).or_insert_with(|| f(v));
                if img.is_some() {
                    untouched = false;
                }
            }
        }
        if untouched {
            return self.clone();
        }
        for (m, c) in &self.terms {
            let mut kept = Vec::new();
            let mut prod = Poly::constant(c.clone());
            for &(v, e) in m.factors() {
                match &images[&v] {
                    None => kept.push((v, e)),
                    Some(p) => {
                        let pw = powers.entry((v, e)).or_insert_with(|| p.pow(e)).clone();
                        prod = &prod * &pw;
                    }
                }
            }
            let km = Monomial::from_pairs(kept);
            for (t, k) in prod.terms {
                *acc.entry(t.mul(&km)).or_insert_with(Coeff::zero) += k;
            }
        }
        Self::from_map(acc)
    }

    /// Evaluates every variable for which `f` returns a value.
    pub fn eval(&self, f: &dyn Fn(Var) -> Option<Coeff>) -> Poly {
        self.substitute(&|v| f(v).map(Poly::constant))
    }

    /// Largest denominator of the coefficients' lcm and the numerators' gcd,
    /// so that `self * den / num` has coprime integer coefficients.
    pub fn rational_content(&self) -> Coeff {
        use num_integer::Integer;
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        for (_, c) in &self.terms {
            num = num.gcd(c.numer());
            den = den.lcm(c.denom());
        }
        if num.is_zero() {
            return Coeff::one();
        }
        BigRational::new(num, den)
    }

    pub fn sign_of_leading(&self) -> i32 {
        match self.terms.first() {
            None => 0,
            Some((_, c)) if c.is_negative() => -1,
            _ => 1,
        }
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        self.merge(rhs, false)
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        if rhs.is_zero() {
            return self.clone();
        }
        self.merge(rhs, true)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        self.product(rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for Poly {
            type Output = Poly;
            fn $f(self, rhs: Poly) -> Poly {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(mut self) -> Poly {
        for t in &mut self.terms {
            t.1 = -&t.1;
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::var::MultiIndex;

    fn x() -> Poly {
        Poly::var(Var::Base(0))
    }
    fn y() -> Poly {
        Poly::var(Var::Base(1))
    }
    fn u() -> Poly {
        Poly::var(Var::jet(0, MultiIndex::ZERO))
    }

    #[test]
    fn ring_ops() {
        let a = &x() + &y();
        let b = &x() - &y();
        let p = &a * &b;
        assert_eq!(p, &(&x() * &x()) - &(&y() * &y()));
        assert!((&p - &p).is_zero());
        assert_eq!(a.pow(2), &(&(&x() * &x()) + &(&x() * &y()).scale(&rat(2))) + &(&y() * &y()));
    }

    #[test]
    fn exact_division() {
        let a = &x() + &u();
        let b = &(&x() * &y()) - &Poly::int(3);
        let p = &a * &b;
        assert_eq!(p.div_exact(&a), Some(b.clone()));
        assert_eq!(p.div_exact(&b), Some(a.clone()));
        assert_eq!((&p + &Poly::one()).div_exact(&a), None);
    }

    #[test]
    fn total_derivative_prolongs() {
        let ut = Poly::var(Var::jet(0, MultiIndex::unit(2)));
        let uxt = Poly::var(Var::jet(0, MultiIndex::from_indices(&[0, 2])));
        assert_eq!(ut.total_derivative(0), uxt);
        assert_eq!(x().total_derivative(0), Poly::one());
        assert!(Poly::var(Var::Lambda).total_derivative(0).is_zero());
        let ux = Poly::var(Var::jet(0, MultiIndex::unit(0)));
        assert_eq!((&u() * &ut).total_derivative(0), &(&ux * &ut) + &(&u() * &uxt));
    }

    #[test]
    fn coefficient_split_roundtrip() {
        let l = Poly::var(Var::Lambda);
        let p = &(&(&l * &l) * &u()) + &(&l * &x());
        let cs = p.coeffs_in(Var::Lambda);
        assert_eq!(cs.len(), 3);
        assert_eq!(cs[2], u());
        assert_eq!(Poly::from_coeffs_in(Var::Lambda, &cs), p);
    }

    #[test]
    fn substitution_is_simultaneous() {
        let p = &x() - &y();
        let q = p.substitute(&|v| match v {
            Var::Base(0) => Some(y()),
            Var::Base(1) => Some(x()),
            _ => None,
        });
        assert_eq!(q, -&p);
    }
}
