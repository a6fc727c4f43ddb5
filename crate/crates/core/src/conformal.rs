//! Characteristic quadric of a determined system and its inverse metric.

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use laxgeom_jet::gcd::squarefree;
use laxgeom_jet::matrix::{self, Matrix};
use laxgeom_jet::{aux, jet_symbol, Coeff, Coordinates, Expr, Poly, SymTensor, Var};

use crate::error::{Error, Result};
use crate::ideal::System;

/// Formal covector `θ = Σ θ_i dx^i` with auxiliary components.
pub fn formal_covector(coords: &Coordinates) -> Vec<Var> {
    coords.base_names().iter().map(|b| aux(&format!("theta_{b}"))).collect()
}

/// `ζ(θ) = Σ ζ_ij θ_i θ_j` on covectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quadric {
    pub matrix: Matrix,
}

impl Quadric {
    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn eval(&self, theta: &[Expr]) -> Expr {
        self.bilinear(theta, theta)
    }

    pub fn bilinear(&self, a: &[Expr], b: &[Expr]) -> Expr {
        bilinear(&self.matrix, a, b)
    }

    pub fn det(&self) -> Expr {
        matrix::det(&self.matrix)
    }
}

/// Symmetric bilinear form on vectors, meaningful up to a nonzero factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Metric {
    pub g: Matrix,
}

impl Metric {
    pub fn new(g: Matrix) -> Self {
        Metric { g }
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    pub fn det(&self) -> Expr {
        matrix::det(&self.g)
    }

    pub fn inverse(&self) -> Result<Matrix> {
        matrix::inverse(&self.g).map_err(|_| Error::Degenerate("metric is singular".into()))
    }

    pub fn eval(&self, a: &[Expr], b: &[Expr]) -> Expr {
        bilinear(&self.g, a, b)
    }

    /// `g ≡ g'` iff all `g_ij g'_kl − g'_ij g_kl` vanish mod the ideal.
    pub fn conformally_equal(&self, other: &Metric, system: &System) -> Result<bool> {
        conformally_equal(&self.g, &other.g, system)
    }

    /// Rescales so the first nonzero entry, in row-major order, is `scale`.
    pub fn normalized(&self, scale: &Expr) -> Result<Metric> {
        Ok(Metric { g: normalize_matrix(&self.g, scale)? })
    }

    /// Quadratic form `Σ g_ij dx^i dx^j` as text.
    pub fn display(&self, coords: &Coordinates) -> String {
        let names = coords.base_names();
        let mut parts = Vec::new();
        for i in 0..self.dim() {
            for j in i..self.dim() {
                let c = if i == j { self.g[i][i].clone() } else { self.g[i][j].scale(&Coeff::from_integer(2.into())) };
                if c.is_zero() {
                    continue;
                }
                let d = if i == j { format!("d{}^2", names[i]) } else { format!("d{} d{}", names[i], names[j]) };
                parts.push(format!("({}) {}", coords.fmt_expr(&c), d));
            }
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

pub(crate) fn bilinear(m: &Matrix, a: &[Expr], b: &[Expr]) -> Expr {
    let mut acc = Expr::zero();
    for (i, row) in m.iter().enumerate() {
        if a[i].is_zero() {
            continue;
        }
        for (j, c) in row.iter().enumerate() {
            if c.is_zero() || b[j].is_zero() {
                continue;
            }
            acc = &acc + &(&(c * &a[i]) * &b[j]);
        }
    }
    acc
}

pub fn conformally_equal(a: &Matrix, b: &Matrix, system: &System) -> Result<bool> {
    let n = a.len();
    if b.len() != n {
        return Ok(false);
    }
    let flat_a: Vec<&Expr> = a.iter().flatten().collect();
    let flat_b: Vec<&Expr> = b.iter().flatten().collect();
    if flat_a.iter().all(|e| e.is_zero()) || flat_b.iter().all(|e| e.is_zero()) {
        return Ok(false);
    }
    for p in 0..flat_a.len() {
        for q in p..flat_a.len() {
            let d = &(flat_a[p] * flat_b[q]) - &(flat_b[p] * flat_a[q]);
            if !system.is_in_ideal(&d) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

pub(crate) fn normalize_matrix(m: &Matrix, scale: &Expr) -> Result<Matrix> {
    let Some(pivot) = m.iter().flatten().find(|e| !e.is_zero()) else { return Ok(m.clone()) };
    let f = scale.checked_div(pivot)?;
    Ok(m.iter().map(|r| r.iter().map(|e| e * &f).collect()).collect())
}

/// Entry `(a, b)`: order-`ℓ_a` symbol of equation `a` in unknown `b`.
pub fn matrix_symbol(system: &System) -> Result<Vec<Vec<SymTensor>>> {
    system
        .equations
        .iter()
        .map(|eq| Ok(jet_symbol(&eq.generator(), eq.principal.order(), &system.coords)?))
        .collect()
}

/// `det σ(θ)` as a polynomial in the formal covector.
pub fn symbol_determinant(system: &System) -> Result<Expr> {
    let theta: Vec<Expr> = formal_covector(&system.coords).into_iter().map(Expr::var).collect();
    let sym = matrix_symbol(system)?;
    let m: Matrix = sym.iter().map(|row| row.iter().map(|s| s.eval(&theta)).collect()).collect();
    Ok(matrix::det(&m))
}

/// Squarefree part in `θ` of `det σ(θ)`, as a quadric.
pub fn characteristic_quadric(system: &System) -> Result<Quadric> {
    let coords = &system.coords;
    let theta = formal_covector(coords);
    let det = symbol_determinant(system)?;
    if det.is_zero() {
        return Err(Error::NotAQuadric(0));
    }
    let is_theta = |v: &Var| theta.contains(v);
    let num = det.num().clone();
    // strip repeated θ-factors, keeping jet content and scale
    let mut q = num.clone();
    for (s, k) in squarefree(&num) {
        if k > 1 && s.vars().iter().any(is_theta) {
            q = q.div_exact(&s.pow(k - 1)).expect("squarefree factor divides");
        }
    }
    let q = Expr::new(q, det.den())?;
    let mut degree = None;
    for (m, _) in q.num().terms() {
        let d: u32 = m.factors().iter().filter(|(v, _)| is_theta(v)).map(|(_, e)| *e).sum();
        match degree {
            None => degree = Some(d),
            Some(d0) if d0 != d => return Err(Error::NotAQuadric(d.max(d0) as usize)),
            _ => {}
        }
    }
    if degree != Some(2) {
        return Err(Error::NotAQuadric(degree.unwrap_or(0) as usize));
    }
    let n = coords.dim();
    let mut mat = vec![vec![Expr::zero(); n]; n];
    let den = Expr::new(Poly::one(), q.den())?;
    for (mono, coeff) in q.num().split_by(|v| theta.contains(&v)) {
        let idx: Vec<usize> =
            mono.factors().iter().flat_map(|(v, e)| std::iter::repeat(theta.iter().position(|t| t == v).unwrap()).take(*e as usize)).collect();
        let c = &Expr::from(coeff) * &den;
        let (i, j) = (idx[0], idx[1]);
        if i == j {
            mat[i][i] = c;
        } else {
            let h = c.scale(&Coeff::new(1.into(), 2.into()));
            mat[i][j] = h.clone();
            mat[j][i] = h;
        }
    }
    let quad = Quadric { matrix: mat };
    let d = system.reduce(&quad.det())?;
    if d.is_zero() {
        return Err(Error::DegenerateQuadric);
    }
    Ok(quad)
}

/// Inverse matrix of the quadric, entries reduced mod the ideal.
pub fn invert_to_metric(q: &Quadric, system: &System) -> Result<Metric> {
    let d = system.reduce(&q.det())?;
    if d.is_zero() {
        return Err(Error::Degenerate("quadric determinant vanishes modulo the ideal".into()));
    }
    let inv = matrix::inverse(&q.matrix).map_err(|_| Error::Degenerate("singular quadric".into()))?;
    let g = inv.iter().map(|r| r.iter().map(|e| system.reduce(e)).collect::<Result<Vec<_>>>()).collect::<Result<Vec<_>>>()?;
    Ok(Metric { g })
}

/// Quadric from a metric on vectors (inverse matrix).
pub fn dual_quadric(m: &Metric) -> Result<Quadric> {
    Ok(Quadric { matrix: m.inverse()? })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignatureReport {
    pub sample: Vec<(Var, Coeff)>,
    /// Sign counts with `p ≥ q`.
    pub p: usize,
    pub q: usize,
}

/// Sign counts of a symmetric rational matrix by symmetric pivoting;
/// `None` when singular.
pub fn inertia(m: &[Vec<Coeff>]) -> Option<(usize, usize)> {
    let mut a: Vec<Vec<Coeff>> = m.to_vec();
    let (mut pos, mut neg) = (0, 0);
    while !a.is_empty() {
        let n = a.len();
        if let Some(k) = (0..n).find(|&k| !a[k][k].is_zero()) {
            if a[k][k].is_positive() {
                pos += 1;
            } else {
                neg += 1;
            }
            a = schur(&a, &[k]);
            continue;
        }
        // zero diagonal: a 2x2 block [[0, c], [c, 0]] has one sign of each
        let (i, j) = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).find(|&(i, j)| !a[i][j].is_zero())?;
        pos += 1;
        neg += 1;
        a = schur(&a, &[i, j]);
    }
    Some((pos, neg))
}

/// Schur complement after eliminating the pivot rows/columns `piv`.
fn schur(a: &[Vec<Coeff>], piv: &[usize]) -> Vec<Vec<Coeff>> {
    let n = a.len();
    let rest: Vec<usize> = (0..n).filter(|i| !piv.contains(i)).collect();
    let block_inv: Vec<Vec<Coeff>> = if piv.len() == 1 {
        vec![vec![Coeff::one() / &a[piv[0]][piv[0]]]]
    } else {
        let (p, q) = (piv[0], piv[1]);
        let (aa, bb, cc) = (&a[p][p], &a[p][q], &a[q][q]);
        let det = aa * cc - bb * bb;
        vec![vec![cc / &det, -(bb / &det)], vec![-(bb / &det), aa / &det]]
    };
    rest.iter()
        .map(|&i| {
            rest.iter()
                .map(|&j| {
                    let mut v = a[i][j].clone();
                    for (s, &p) in piv.iter().enumerate() {
                        for (t, &q) in piv.iter().enumerate() {
                            v -= &a[i][p] * &block_inv[s][t] * &a[q][j];
                        }
                    }
                    v
                })
                .collect()
        })
        .collect()
}

/// Signature at a rational sample of the variables the metric depends on.
pub fn signature_at(m: &Metric, sample: &[(Var, Coeff)]) -> Result<SignatureReport> {
    let f = |v: Var| sample.iter().find(|(w, _)| *w == v).map(|(_, c)| Expr::constant(c.clone()));
    let mut num = Vec::new();
    for row in &m.g {
        let mut r = Vec::new();
        for e in row {
            let val = e.substitute_with(&f).map_err(|_| Error::SingularSample)?;
            r.push(val.constant_value().ok_or(Error::SingularSample)?);
        }
        num.push(r);
    }
    let (p, q) = inertia(&num).ok_or(Error::SingularSample)?;
    let (p, q) = if p >= q { (p, q) } else { (q, p) };
    Ok(SignatureReport { sample: sample.to_vec(), p, q })
}

/// Seeded rational values for every variable of `exprs` except `λ`.
pub fn random_sample(exprs: &[&Expr], seed: u64) -> Vec<(Var, Coeff)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vars = std::collections::BTreeSet::new();
    for e in exprs {
        vars.extend(e.vars());
    }
    vars.into_iter()
        .filter(|v| *v != Var::Lambda)
        .map(|v| {
            let n: i64 = rng.gen_range(-9..=9);
            let d: i64 = rng.gen_range(1..=5);
            (v, Coeff::new(n.into(), d.into()))
        })
        .collect()
}

/// Signature at a seeded sample, resampling on singular points.
pub fn signature_sampled(m: &Metric, seed: u64) -> Result<SignatureReport> {
    let entries: Vec<&Expr> = m.g.iter().flatten().collect();
    for k in 0..32 {
        let s = random_sample(&entries, seed.wrapping_add(k));
        match signature_at(m, &s) {
            Err(Error::SingularSample) => continue,
            r => return r,
        }
    }
    Err(Error::SingularSample)
}

/// `ζ(θ, θ) ≡ 0` mod the ideal, coefficientwise in `λ`.
pub fn is_null(q: &Quadric, theta: &[Expr], system: &System) -> bool {
    system.is_in_ideal(&q.eval(theta))
}
