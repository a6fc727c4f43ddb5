//! Multivariate polynomial gcd over the rationals.
//!
//! Strategy: strip monomial content, recurse on contents for variables
//! present on one side only, try trial division, then decide coprimality of
//! the primitive parts from a univariate image. Only when the image has a
//! nontrivial gcd do we fall back to a primitive remainder sequence.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::poly::{rat, Coeff, Poly};
use crate::var::Var;

/// Monic greatest common divisor. `gcd(0, 0) = 0`.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    let ma = a.monomial_content();
    let mb = b.monomial_content();
    let mg = ma.gcd(&mb);
    let a1 = strip(a, &ma);
    let b1 = strip(b, &mb);
    let g = if coprime_mod_p(&a1, &b1) { Poly::one() } else { gcd_no_monomial(&a1, &b1) };
    if mg.is_one() {
        g
    } else {
        g.mul_monomial(&mg, &Coeff::one())
    }
}

fn strip(p: &Poly, m: &crate::monomial::Monomial) -> Poly {
    if m.is_one() {
        p.clone()
    } else {
        p.div_exact(&Poly::term(m.clone(), Coeff::one())).expect("monomial content divides")
    }
}

fn gcd_no_monomial(a: &Poly, b: &Poly) -> Poly {
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    let va = a.vars();
    let vb = b.vars();
    if let Some(&v) = va.iter().find(|v| !vb.contains(v)) {
        let c = content_in(a, v);
        return gcd(&c, b);
    }
    if let Some(&v) = vb.iter().find(|v| !va.contains(v)) {
        let c = content_in(b, v);
        return gcd(a, &c);
    }
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if large.div_exact(small).is_some() {
        return small.monic();
    }
    // main variable: lowest combined degree keeps remainder sequences short
    let v = *va
        .iter()
        .min_by_key(|&&v| (a.degree_in(v) + b.degree_in(v), v))
        .expect("nonconstant");
    let ca = content_in(a, v);
    let cb = content_in(b, v);
    let pa = if ca.is_one() { a.clone() } else { a.div_exact(&ca).expect("content divides") };
    let pb = if cb.is_one() { b.clone() } else { b.div_exact(&cb).expect("content divides") };
    let gc = gcd(&ca, &cb);
    let gp = if images_coprime(&pa, &pb, v) {
        Poly::one()
    } else {
        heuristic(&pa, &pb).unwrap_or_else(|| primitive_prs(&pa, &pb, v))
    };
    (&gc * &gp).monic()
}

/// Gcd of the coefficients of `p` viewed as a polynomial in `v`.
pub fn content_in(p: &Poly, v: Var) -> Poly {
    let mut cs = p.coeffs_in(v);
    cs.retain(|c| !c.is_zero());
    if cs.iter().any(|c| c.len() == 1) && p.monomial_content().is_one() {
        return Poly::one();
    }
    cs.sort_by_key(|c| c.len());
    let mut g = cs[0].monic();
    for c in &cs[1..] {
        if g.is_one() {
            break;
        }
        g = gcd(&g, c);
    }
    g
}

fn primitive_part(p: &Poly, v: Var) -> Poly {
    let c = content_in(p, v);
    if c.is_one() {
        p.clone()
    } else {
        p.div_exact(&c).expect("content divides")
    }
}

fn lead(cs: &[Poly]) -> &Poly {
    cs.last().expect("nonzero")
}

fn trim(cs: &mut Vec<Poly>) {
    while cs.last().is_some_and(|c| c.is_zero()) {
        cs.pop();
    }
}

/// Pseudo-remainder of `a` by `b` as polynomials in `v`.
fn prem(a: &[Poly], b: &[Poly]) -> Vec<Poly> {
    let mut r: Vec<Poly> = a.to_vec();
    let db = b.len() - 1;
    let lb = lead(b).clone();
    trim(&mut r);
    while !r.is_empty() && r.len() - 1 >= db {
        let dr = r.len() - 1;
        let lr = lead(&r).clone();
        let shift = dr - db;
        let mut next: Vec<Poly> = r.iter().map(|c| c * &lb).collect();
        for (k, bc) in b.iter().enumerate() {
            next[k + shift] = &next[k + shift] - &(bc * &lr);
        }
        next.pop();
        trim(&mut next);
        r = next;
    }
    r
}

fn primitive_prs(a: &Poly, b: &Poly, v: Var) -> Poly {
    let (mut f, mut g) = if a.degree_in(v) >= b.degree_in(v) { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
    loop {
        let fc = f.coeffs_in(v);
        let gc = g.coeffs_in(v);
        let r = prem(&fc, &gc);
        if r.is_empty() {
            return g.monic();
        }
        if r.len() == 1 {
            return Poly::one();
        }
        let rp = primitive_part(&Poly::from_coeffs_in(v, &r), v);
        f = g;
        g = rp;
    }
}

const P: u64 = (1 << 61) - 1;

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % P as u128) as u64
}

fn powmod(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a);
        }
        a = mulmod(a, a);
        e >>= 1;
    }
    r
}

fn invmod(a: u64) -> u64 {
    powmod(a, P - 2)
}

fn coeff_mod(c: &Coeff) -> Option<u64> {
    let p = BigInt::from(P);
    let n = c.numer().mod_floor(&p);
    let d = c.denom().mod_floor(&p);
    let (n, d) = (u64::try_from(n).ok()?, u64::try_from(d).ok()?);
    if d == 0 {
        return None;
    }
    Some(mulmod(n, invmod(d)))
}

/// Image of `p` mod P as a dense univariate polynomial in `v`, with every
/// other variable replaced by its value from `point`.
fn image_mod(p: &Poly, v: Var, point: &dyn Fn(Var) -> u64) -> Option<Vec<u64>> {
    let deg = p.degree_in(v) as usize;
    let mut out = vec![0u64; deg + 1];
    for (m, c) in p.terms() {
        let mut t = coeff_mod(c)?;
        let mut e_v = 0;
        for &(w, e) in m.factors() {
            if w == v {
                e_v = e as usize;
            } else {
                t = mulmod(t, powmod(point(w), e as u64));
            }
        }
        out[e_v] = (out[e_v] + t) % P;
    }
    Some(out)
}

fn gcd_degree_mod(mut a: Vec<u64>, mut b: Vec<u64>) -> usize {
    fn trim(c: &mut Vec<u64>) {
        while c.last() == Some(&0) {
            c.pop();
        }
    }
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let inv = invmod(*b.last().unwrap());
        while a.len() >= b.len() {
            let q = mulmod(*a.last().unwrap(), inv);
            let shift = a.len() - b.len();
            for (k, &bc) in b.iter().enumerate() {
                a[k + shift] = (a[k + shift] + P - mulmod(bc, q)) % P;
            }
            a.pop();
            trim(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

/// Rigorous sufficient test for `gcd(a, b) = 1` (inputs without monomial
/// content): for every shared variable, the images mod P at a point keeping
/// both leading coefficients nonzero must be coprime. A common factor would
/// survive in at least one of those images with its full degree.
pub fn coprime_mod_p(a: &Poly, b: &Poly) -> bool {
    let va = a.vars();
    let vb = b.vars();
    let shared: Vec<Var> = va.intersection(&vb).copied().collect();
    let mut rng = Lcg(0x2545_f491_4f6c_dd1d ^ (a.len() as u64).rotate_left(17) ^ b.len() as u64);
    for &v in &shared {
        let mut ok = false;
        for _attempt in 0..3 {
            let vals: Vec<(Var, u64)> = va.union(&vb).map(|&w| (w, rng.next_u64() % P)).collect();
            let point = |w: Var| vals.iter().find(|p| p.0 == w).map_or(0, |p| p.1);
            let (Some(ia), Some(ib)) = (image_mod(a, v, &point), image_mod(b, v, &point)) else { return false };
            if ia.last() == Some(&0) || ib.last() == Some(&0) {
                continue;
            }
            if gcd_degree_mod(ia, ib) > 0 {
                return false;
            }
            ok = true;
            break;
        }
        if !ok {
            return false;
        }
    }
    true
}

struct Lcg(u64);

impl Lcg {
    fn next(&mut self) -> i64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((self.0 >> 33) % 97) as i64 - 48
    }

    fn next_u64(&mut self) -> u64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        self.0
    }
}

/// Univariate coprimality certificate: if the images of two primitive
/// polynomials (leading coefficients kept nonzero) are coprime, so are they.
fn images_coprime(a: &Poly, b: &Poly, v: Var) -> bool {
    let mut others: Vec<Var> = a.vars().union(&b.vars()).copied().filter(|&w| w != v).collect();
    others.sort();
    let la = a.coeffs_in(v).pop().expect("nonzero");
    let lb = b.coeffs_in(v).pop().expect("nonzero");
    let mut rng = Lcg(0x9e37_79b9_7f4a_7c15 ^ (a.len() as u64) << 8 ^ b.len() as u64);
    for _attempt in 0..4 {
        let point: Vec<(Var, Coeff)> = others.iter().map(|&w| (w, rat(rng.next()))).collect();
        let at = |w: Var| point.iter().find(|p| p.0 == w).map(|p| p.1.clone());
        if la.eval(&at).is_zero() || lb.eval(&at).is_zero() {
            continue;
        }
        let ua = univariate(&a.eval(&at), v);
        let ub = univariate(&b.eval(&at), v);
        return univariate_gcd_degree(ua, ub) == 0;
    }
    false
}

fn univariate(p: &Poly, v: Var) -> Vec<Coeff> {
    p.coeffs_in(v).into_iter().map(|c| c.constant_value().expect("univariate image")).collect()
}

fn univariate_gcd_degree(mut a: Vec<Coeff>, mut b: Vec<Coeff>) -> usize {
    fn trim(c: &mut Vec<Coeff>) {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
    }
    trim(&mut a);
    trim(&mut b);
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    while !b.is_empty() {
        // a := a mod b
        let lb = b.last().unwrap().clone();
        while a.len() >= b.len() && !a.is_empty() {
            let q = a.last().unwrap() / &lb;
            let shift = a.len() - b.len();
            for (k, bc) in b.iter().enumerate() {
                let t = bc * &q;
                a[k + shift] -= t;
            }
            a.pop();
            trim(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

/// Heuristic gcd: evaluate one variable at a large integer, recurse, lift
/// the image back by balanced ξ-adic expansion and accept it only if it
/// divides both inputs.
fn heuristic(a: &Poly, b: &Poly) -> Option<Poly> {
    let ia = integer_primitive(a);
    let ib = integer_primitive(b);
    let h = heu_int(&ia, &ib, 0)?;
    Some(h.monic())
}

fn integer_primitive(p: &Poly) -> Poly {
    p.scale(&p.rational_content().recip())
}

fn max_norm(p: &Poly) -> BigInt {
    p.terms().iter().map(|(_, c)| c.numer().abs()).max().unwrap_or_default()
}

fn int_content(p: &Poly) -> BigInt {
    let mut g = BigInt::zero();
    for (_, c) in p.terms() {
        g = g.gcd(c.numer());
        if g.is_one() {
            break;
        }
    }
    g
}

fn eval_at(p: &Poly, v: Var, x: &BigInt) -> Poly {
    let mut pows: Vec<BigInt> = vec![BigInt::one()];
    Poly::from_terms(p.terms().iter().map(|(m, c)| {
        let (rest, e) = m.split_off(v);
        while pows.len() <= e as usize {
            let next = pows.last().unwrap() * x;
            pows.push(next);
        }
        (rest, c * Coeff::from_integer(pows[e as usize].clone()))
    }))
}

fn balanced_mod(c: &BigInt, m: &BigInt) -> BigInt {
    let r = c.mod_floor(m);
    if &r * 2 > *m {
        r - m
    } else {
        r
    }
}

fn interpolate(h: &Poly, x: &BigInt, v: Var) -> Poly {
    let mut h = h.clone();
    let mut out = Vec::new();
    let mut i = 0u32;
    let xr = Coeff::from_integer(x.clone());
    while !h.is_zero() {
        let g = Poly::from_terms(h.terms().iter().map(|(m, c)| (m.clone(), Coeff::from_integer(balanced_mod(c.numer(), x)))));
        for (m, c) in g.terms() {
            out.push((m.mul(&crate::monomial::Monomial::pow(v, i)), c.clone()));
        }
        h = (&h - &g).scale(&xr.recip());
        i += 1;
        if i > 4096 {
            break;
        }
    }
    Poly::from_terms(out)
}

fn heu_int(a: &Poly, b: &Poly, depth: usize) -> Option<Poly> {
    if a.is_zero() {
        return Some(b.clone());
    }
    if b.is_zero() {
        return Some(a.clone());
    }
    let ca = int_content(a);
    let cb = int_content(b);
    let c = ca.gcd(&cb);
    if a.is_constant() || b.is_constant() {
        return Some(Poly::constant(Coeff::from_integer(c)));
    }
    if depth > 24 {
        return None;
    }
    let a = a.scale(&Coeff::from_integer(ca).recip());
    let b = b.scale(&Coeff::from_integer(cb).recip());
    let vars_a = a.vars();
    let vars_b = b.vars();
    let v = *vars_a.intersection(&vars_b).next().or_else(|| vars_a.iter().next())?;
    let bound: BigInt = max_norm(&a).min(max_norm(&b)) * 2 + 29;
    let mut x = bound.clone().min(bound.sqrt() * 99u32).max(BigInt::from(2));
    for _ in 0..6 {
        let ae = eval_at(&a, v, &x);
        let be = eval_at(&b, v, &x);
        if !ae.is_zero() && !be.is_zero() {
            if let Some(h) = heu_int(&ae, &be, depth + 1) {
                let mut cand = interpolate(&h, &x, v);
                let cc = int_content(&cand);
                if !cc.is_zero() {
                    cand = cand.scale(&Coeff::from_integer(cc).recip());
                    if cand.sign_of_leading() < 0 {
                        cand = -cand;
                    }
                    if a.div_exact(&cand).is_some() && b.div_exact(&cand).is_some() {
                        return Some(cand.scale(&Coeff::from_integer(c)));
                    }
                }
            }
        }
        x = &x * 73794u32 * x.sqrt().sqrt() / 27011u32;
    }
    None
}

/// Squarefree decomposition of a monic polynomial: pairs `(s_k, k)` with
/// distinct `k`, each `s_k` monic, squarefree and pairwise coprime, and
/// `p = Π s_k^k`.
pub fn squarefree(p: &Poly) -> Vec<(Poly, u32)> {
    let mut pieces: Vec<(Poly, u32)> = Vec::new();
    let m = p.monomial_content();
    for &(v, e) in m.factors() {
        pieces.push((Poly::var(v), e));
    }
    let rest = strip(&p.monic(), &m);
    sqf_rec(&rest, &mut pieces);
    group_by_exponent(pieces)
}

fn sqf_rec(p: &Poly, out: &mut Vec<(Poly, u32)>) {
    if p.is_constant() {
        return;
    }
    let v = *p.vars().iter().next().expect("nonconstant");
    let c = content_in(p, v);
    let q = if c.is_one() { p.clone() } else { p.div_exact(&c).expect("content divides") };
    yun(&q, v, out);
    sqf_rec(&c, out);
}

fn yun(f: &Poly, v: Var, out: &mut Vec<(Poly, u32)>) {
    let df = f.partial(v);
    let a0 = gcd(f, &df);
    if a0.is_one() {
        out.push((f.monic(), 1));
        return;
    }
    let mut b = f.div_exact(&a0).expect("gcd divides");
    let mut c = df.div_exact(&a0).expect("gcd divides");
    let mut d = &c - &b.partial(v);
    let mut i = 1;
    while !b.is_constant() {
        let a = gcd(&b, &d);
        b = b.div_exact(&a).expect("gcd divides");
        c = d.div_exact(&a).expect("gcd divides");
        d = &c - &b.partial(v);
        if !a.is_constant() {
            out.push((a.monic(), i));
        }
        i += 1;
    }
}

/// Multiplies together pieces sharing an exponent and sorts by exponent.
pub fn group_by_exponent(pieces: Vec<(Poly, u32)>) -> Vec<(Poly, u32)> {
    let mut by: std::collections::BTreeMap<u32, Poly> = std::collections::BTreeMap::new();
    for (s, k) in pieces {
        if s.is_constant() || k == 0 {
            continue;
        }
        let slot = by.entry(k).or_insert_with(Poly::one);
        *slot = &*slot * &s.monic();
    }
    by.into_iter().map(|(k, s)| (s.monic(), k)).collect()
}

/// Least common multiple, monic.
pub fn lcm(a: &Poly, b: &Poly) -> Poly {
    let g = gcd(a, b);
    (a * &b.div_exact(&g).expect("gcd divides")).monic()
}
