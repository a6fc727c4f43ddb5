//! Two-plane congruences, dispersionless pairs and their integrability.
//!
//! Frames: in 3D `X = ∂_0 − α∂_2`, `Y = ∂_1 − β∂_2`; in 4D
//! `X = ∂_0 − α∂_2 − β∂_3`, `Y = ∂_1 − γ∂_2 − δ∂_3`. Lifts add `m∂_λ`, `n∂_λ`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use laxgeom_jet::matrix::{self, Matrix};
use laxgeom_jet::{Coeff, Expr, Var};

use crate::conformal::{self, Metric, Quadric};
use crate::error::{Error, Result};
use crate::ideal::{Cofactors, System};
use crate::weyl::{weyl_connection, WeylStructure};

fn dl(e: &Expr) -> Expr {
    e.partial(Var::Lambda)
}

fn dl_n(e: &Expr, k: usize) -> Expr {
    (0..k).fold(e.clone(), |acc, _| dl(&acc))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Congruence {
    /// `[α, β]` or `[α, β, γ, δ]`.
    pub coeffs: Vec<Expr>,
}

impl Congruence {
    pub fn new_3d(alpha: Expr, beta: Expr) -> Self {
        Congruence { coeffs: vec![alpha, beta] }
    }

    pub fn new_4d(alpha: Expr, beta: Expr, gamma: Expr, delta: Expr) -> Self {
        Congruence { coeffs: vec![alpha, beta, gamma, delta] }
    }

    pub fn dim(&self) -> usize {
        if self.coeffs.len() == 2 {
            3
        } else {
            4
        }
    }

    /// Components of `X` and `Y` in the coordinate frame.
    pub fn frame(&self) -> (Vec<Expr>, Vec<Expr>) {
        let c = &self.coeffs;
        let (o, z) = (Expr::one(), Expr::zero());
        if self.dim() == 3 {
            (vec![o.clone(), z.clone(), -&c[0]], vec![z, o, -&c[1]])
        } else {
            (vec![o.clone(), z.clone(), -&c[0], -&c[1]], vec![z, o, -&c[2], -&c[3]])
        }
    }

    /// Generators of the annihilator: `dt + α dx + β dy` in 3D;
    /// `dz + α dx + γ dy` and `dt + β dx + δ dy` in 4D.
    pub fn annihilator(&self) -> Vec<Vec<Expr>> {
        let c = &self.coeffs;
        let (o, z) = (Expr::one(), Expr::zero());
        if self.dim() == 3 {
            vec![vec![c[0].clone(), c[1].clone(), o]]
        } else {
            vec![vec![c[0].clone(), c[2].clone(), o.clone(), z.clone()], vec![c[1].clone(), c[3].clone(), z, o]]
        }
    }

    /// Nondegeneracy determinant: `α'β'' − α''β'` in 3D, `α'δ' − β'γ'` in 4D.
    pub fn nondegeneracy(&self) -> Expr {
        let c = &self.coeffs;
        if self.dim() == 3 {
            &(&dl(&c[0]) * &dl_n(&c[1], 2)) - &(&dl_n(&c[0], 2) * &dl(&c[1]))
        } else {
            &(&dl(&c[0]) * &dl(&c[3])) - &(&dl(&c[1]) * &dl(&c[2]))
        }
    }

    pub fn is_nondegenerate(&self) -> bool {
        !self.nondegeneracy().is_zero()
    }

    pub fn substitute(&self, f: &dyn Fn(Var) -> Option<Expr>) -> Result<Congruence> {
        Ok(Congruence { coeffs: self.coeffs.iter().map(|e| e.substitute_with(f)).collect::<std::result::Result<_, _>>()? })
    }
}

pub fn nondegenerate(c: &Congruence) -> bool {
    c.is_nondegenerate()
}

fn along(v: &[Expr], e: &Expr) -> Expr {
    e.derivative_along(v)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pair {
    pub congruence: Congruence,
    pub m: Expr,
    pub n: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrobeniusResidual {
    /// Coefficients of `∂_2` (and `∂_3` in 4D).
    pub horizontal: Vec<Expr>,
    pub vertical: Expr,
}

impl FrobeniusResidual {
    pub fn components(&self) -> Vec<&Expr> {
        self.horizontal.iter().chain(std::iter::once(&self.vertical)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LaxVerdict {
    LaxPair,
    IntegrableButTrivial,
    NotIntegrable,
}

impl std::fmt::Display for LaxVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LaxVerdict::LaxPair => "LaxPair",
            LaxVerdict::IntegrableButTrivial => "IntegrableButTrivial",
            LaxVerdict::NotIntegrable => "NotIntegrable",
        })
    }
}

impl Pair {
    pub fn new(congruence: Congruence, m: Expr, n: Expr) -> Self {
        Pair { congruence, m, n }
    }

    pub fn dim(&self) -> usize {
        self.congruence.dim()
    }

    /// `[X̂, Ŷ]`: horizontal part `D_X Y − D_Y X + m∂_λY − n∂_λX` and
    /// vertical part `D_X n − D_Y m + m∂_λ n − n∂_λ m`.
    pub fn frobenius_residual(&self) -> FrobeniusResidual {
        let (x, y) = self.congruence.frame();
        let d = self.dim();
        let horizontal = (2..d)
            .map(|k| {
                let a = &along(&x, &y[k]) - &along(&y, &x[k]);
                let b = &(&self.m * &dl(&y[k])) - &(&self.n * &dl(&x[k]));
                &a + &b
            })
            .collect();
        let vertical = &(&along(&x, &self.n) - &along(&y, &self.m)) + &(&(&self.m * &dl(&self.n)) - &(&self.n * &dl(&self.m)));
        FrobeniusResidual { horizontal, vertical }
    }

    /// Horizontal residual vanishes identically.
    pub fn is_normal(&self) -> bool {
        self.frobenius_residual().horizontal.iter().all(|e| e.is_zero())
    }

    pub fn verify_lax(&self, system: &System) -> LaxVerdict {
        let r = self.frobenius_residual();
        let comps = r.components();
        if comps.iter().all(|e| e.is_zero()) {
            LaxVerdict::IntegrableButTrivial
        } else if comps.iter().all(|e| system.is_in_ideal(e)) {
            LaxVerdict::LaxPair
        } else {
            LaxVerdict::NotIntegrable
        }
    }

    /// Change of spectral parameter `λ_new = λ + φ` with `φ` free of `λ`.
    pub fn shift_spectral(&self, phi: &Expr) -> Result<Pair> {
        let (x, y) = self.congruence.frame();
        let m = &self.m + &along(&x, phi);
        let n = &self.n + &along(&y, phi);
        let back = &Expr::lambda() - phi;
        let f = |v: Var| (v == Var::Lambda).then(|| back.clone());
        Ok(Pair {
            congruence: self.congruence.substitute(&f)?,
            m: m.substitute_with(&f)?,
            n: n.substitute_with(&f)?,
        })
    }

    /// Component differences all vanish mod the ideal.
    pub fn e_equivalent(&self, other: &Pair, system: &System) -> bool {
        let a = self.congruence.coeffs.iter().chain([&self.m, &self.n]);
        let b = other.congruence.coeffs.iter().chain([&other.m, &other.n]);
        self.dim() == other.dim() && a.zip(b).all(|(p, q)| system.is_in_ideal(&(p - q)))
    }
}

pub fn frobenius_residual(p: &Pair) -> FrobeniusResidual {
    p.frobenius_residual()
}

pub fn verify_lax(p: &Pair, system: &System) -> LaxVerdict {
    p.verify_lax(system)
}

pub fn is_normal(p: &Pair) -> bool {
    p.is_normal()
}

/// Monge invariant of `λ ↦ (β, α)` with `α` regarded as a function of
/// `β`; derivatives in `β` are `∂_λ/β_λ`.
///
/// `I = 9(α'')²α⁽⁵⁾ − 45α''α'''α⁽⁴⁾ + 40(α''')^e`; the conic condition
/// needs `e = 3`.
pub fn monge_invariant(c: &Congruence) -> Result<Expr> {
    monge_invariant_with_exponent(c, 3)
}

pub fn monge_invariant_with_exponent(c: &Congruence, e: i32) -> Result<Expr> {
    if c.dim() != 3 {
        return Err(Error::WrongDimension { expected: 3, found: c.dim() });
    }
    let bl = dl(&c.coeffs[1]);
    if bl.is_zero() {
        return Err(Error::ReparametrizationFailure);
    }
    let inv = bl.recip().map_err(|_| Error::ReparametrizationFailure)?;
    let mut d = vec![c.coeffs[0].clone()];
    for k in 1..=5 {
        d.push(&dl(&d[k - 1]) * &inv);
    }
    let t1 = &(&d[2] * &d[2]) * &d[5];
    let t2 = &(&d[2] * &d[3]) * &d[4];
    let t3 = d[3].pow(e)?;
    Ok(&(&t1.scale(&Coeff::from_integer(9.into())) - &t2.scale(&Coeff::from_integer(45.into())))
        + &t3.scale(&Coeff::from_integer(40.into())))
}

/// Whether `λ ↦ (α, β)` lies on a conic: rank of the values of
/// `(α², αβ, β², α, β, 1)` at seeded rational `λ` is at most 5.
pub fn conic_oracle(c: &Congruence, seed: u64) -> Result<bool> {
    if c.dim() != 3 {
        return Err(Error::WrongDimension { expected: 3, found: c.dim() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Matrix = Vec::new();
    let mut attempts = 0;
    while rows.len() < 9 {
        attempts += 1;
        if attempts > 200 {
            return Err(Error::PoleAtSample);
        }
        let l = Expr::ratio(rng.gen_range(-40..=40), rng.gen_range(1..=7));
        let f = |v: Var| (v == Var::Lambda).then(|| l.clone());
        let (Ok(a), Ok(b)) = (c.coeffs[0].substitute_with(&f), c.coeffs[1].substitute_with(&f)) else { continue };
        rows.push(vec![&a * &a, &a * &b, &b * &b, a, b, Expr::one()]);
    }
    Ok(matrix::rank(&rows) <= 5)
}

fn is_lambda_free(e: &Expr) -> bool {
    !e.contains_var(Var::Lambda)
}

/// Null-space vector of `rows`, normalized so its first nonzero entry is 1.
fn unique_ratio(rows: Matrix, unknowns: usize) -> Result<Vec<Expr>> {
    let ns = matrix::nullspace(&rows);
    if ns.len() != 1 {
        return Err(Error::DegenerateLinearSystem);
    }
    let v = &ns[0];
    let piv = v.iter().find(|e| !e.is_zero()).ok_or(Error::DegenerateLinearSystem)?.clone();
    let v: Vec<Expr> = v.iter().map(|e| e.checked_div(&piv)).collect::<std::result::Result<_, _>>()?;
    debug_assert_eq!(v.len(), unknowns);
    if !v.iter().all(is_lambda_free) {
        return Err(Error::LambdaDependent);
    }
    Ok(v)
}

fn sym_index(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect()
}

fn from_sym(n: usize, v: &[Expr]) -> Matrix {
    let mut m = vec![vec![Expr::zero(); n]; n];
    for (k, &(i, j)) in sym_index(n).iter().enumerate() {
        m[i][j] = v[k].clone();
        m[j][i] = v[k].clone();
    }
    m
}

/// Coefficient row of `Σ_{i≤j} q_ij a_i b_j (sym)` in the unknowns `q_ij`.
fn bilinear_row(n: usize, a: &[Expr], b: &[Expr]) -> Vec<Expr> {
    sym_index(n)
        .into_iter()
        .map(|(i, j)| if i == j { &a[i] * &b[i] } else { &(&a[i] * &b[j]) + &(&a[j] * &b[i]) })
        .collect()
}

/// Quadric on covectors annihilating `θ` and its first four λ-derivatives,
/// inverted to a metric.
pub fn recover_metric_3d(c: &Congruence, system: &System) -> Result<Metric> {
    if c.dim() != 3 {
        return Err(Error::WrongDimension { expected: 3, found: c.dim() });
    }
    if !c.is_nondegenerate() {
        return Err(Error::DegenerateLinearSystem);
    }
    let theta = &c.annihilator()[0];
    let base = bilinear_row(3, theta, theta);
    let rows: Matrix = (0..5).map(|k| base.iter().map(|e| dl_n(e, k)).collect()).collect();
    let v = unique_ratio(rows, 6)?;
    let q = Quadric { matrix: from_sym(3, &v) };
    conformal::invert_to_metric(&q, system)
}

/// Metric making `X`, `Y` null and orthogonal, with λ-derivatives up to 2.
pub fn recover_metric_4d(c: &Congruence, system: &System) -> Result<Metric> {
    if c.dim() != 4 {
        return Err(Error::WrongDimension { expected: 4, found: c.dim() });
    }
    if !c.is_nondegenerate() {
        return Err(Error::DegenerateLinearSystem);
    }
    let (x, y) = c.frame();
    let mut rows = Vec::new();
    for (a, b) in [(&x, &x), (&x, &y), (&y, &y)] {
        let base = bilinear_row(4, a, b);
        for k in 0..3 {
            rows.push(base.iter().map(|e| dl_n(e, k)).collect());
        }
    }
    let v = unique_ratio(rows, 10)?;
    let g = from_sym(4, &v);
    let g = g.iter().map(|r| r.iter().map(|e| system.reduce(e)).collect::<Result<Vec<_>>>()).collect::<Result<Vec<_>>>()?;
    Ok(Metric::new(g))
}

pub fn recover_metric(c: &Congruence, system: &System) -> Result<Metric> {
    if c.dim() == 3 {
        recover_metric_3d(c, system)
    } else {
        recover_metric_4d(c, system)
    }
}

/// Annihilator of the congruence is null for the characteristic quadric,
/// including the mixed pairing in 4D.
pub fn characteristic_check(p: &Pair, system: &System) -> Result<bool> {
    let q = conformal::characteristic_quadric(system)?;
    Ok(null_annihilator(&q, &p.congruence, system))
}

pub fn null_annihilator(q: &Quadric, c: &Congruence, system: &System) -> bool {
    let ann = c.annihilator();
    for i in 0..ann.len() {
        for j in i..ann.len() {
            if !system.is_in_ideal(&q.bilinear(&ann[i], &ann[j])) {
                return false;
            }
        }
    }
    true
}

/// Solves `M (a, b)ᵀ = −h` for the vertical corrections in 4D.
fn solve_4d(c: &Congruence, h: &[Expr]) -> Result<(Expr, Expr)> {
    let k = &c.coeffs;
    // h_z changes by −a γ_λ + b α_λ, h_t by −a δ_λ + b β_λ
    let (m11, m12, m21, m22) = (-&dl(&k[2]), dl(&k[0]), -&dl(&k[3]), dl(&k[1]));
    let det = &(&m11 * &m22) - &(&m12 * &m21);
    if det.is_zero() {
        return Err(Error::Degenerate("nondegeneracy determinant vanishes".into()));
    }
    let inv = det.recip()?;
    let (r1, r2) = (-&h[0], -&h[1]);
    let a = &(&(&m22 * &r1) - &(&m12 * &r2)) * &inv;
    let b = &(&(&m11 * &r2) - &(&m21 * &r1)) * &inv;
    Ok((a, b))
}

/// The unique lift whose horizontal residual vanishes.
pub fn normal_lift_4d(c: &Congruence) -> Result<Pair> {
    if c.dim() != 4 {
        return Err(Error::WrongDimension { expected: 4, found: c.dim() });
    }
    let bare = Pair::new(c.clone(), Expr::zero(), Expr::zero());
    let h = bare.frobenius_residual().horizontal;
    let (m, n) = solve_4d(c, &h)?;
    Ok(Pair::new(c.clone(), m, n))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Normalization {
    pub pair: Pair,
    /// Cofactors of each horizontal residual component.
    pub cofactors: Vec<Cofactors>,
    pub a: Expr,
    pub b: Expr,
}

/// Adds `A(F)∂_λ`, `B(F)∂_λ` so the horizontal residual vanishes
/// off-shell. `A`, `B` are built from the cofactor operators of the
/// horizontal residual, so the result is E-equivalent to the input.
pub fn normalize(p: &Pair, system: &System, max_order: usize) -> Result<Normalization> {
    let h = p.frobenius_residual().horizontal;
    if h.iter().all(|e| e.is_zero()) {
        return Ok(Normalization { pair: p.clone(), cofactors: Vec::new(), a: Expr::zero(), b: Expr::zero() });
    }
    let cofactors = h.iter().map(|e| system.cofactor_extract(e, max_order)).collect::<Result<Vec<_>>>()?;
    // expansions equal h exactly, verified by cofactor_extract
    let boxes: Vec<Expr> = cofactors.iter().map(|c| c.apply(system)).collect::<Result<_>>()?;
    let c = &p.congruence;
    let (a, b) = if p.dim() == 3 {
        let (al, be) = (&c.coeffs[0], &c.coeffs[1]);
        let den = &(&dl(be) * &dl_n(al, 2)) - &(&dl(al) * &dl_n(be, 2));
        if den.is_zero() {
            return Err(Error::Degenerate("nondegeneracy determinant vanishes".into()));
        }
        (
            (&dl_n(al, 2) * &boxes[0]).checked_div(&den)?,
            (&dl_n(be, 2) * &boxes[0]).checked_div(&den)?,
        )
    } else {
        solve_4d(c, &boxes)?
    };
    let pair = Pair::new(c.clone(), &p.m + &a, &p.n + &b);
    Ok(Normalization { pair, cofactors, a, b })
}

/// Lift by parallel transport of the annihilator along `X`, `Y`:
/// `∇_V θ = A θ + B ∂_λθ` gives the vertical part `−B`.
pub fn weyl_lift_3d(c: &Congruence, ws: &WeylStructure, system: &System) -> Result<Pair> {
    if c.dim() != 3 {
        return Err(Error::WrongDimension { expected: 3, found: c.dim() });
    }
    let q = conformal::dual_quadric(&ws.g)?;
    if !null_annihilator(&q, c, system) {
        return Err(Error::NotNull);
    }
    let gamma = weyl_connection(ws)?;
    let theta = &c.annihilator()[0];
    let tl: Vec<Expr> = theta.iter().map(dl).collect();
    let (x, y) = c.frame();
    let mut out = Vec::new();
    for v in [&x, &y] {
        let nab: Vec<Expr> = (0..3)
            .map(|j| {
                let mut acc = Expr::zero();
                for i in 0..3 {
                    if v[i].is_zero() {
                        continue;
                    }
                    let mut t = theta[j].total_derivative(i);
                    for k in 0..3 {
                        t = &t - &(&gamma[k][i][j] * &theta[k]);
                    }
                    acc = &acc + &(&v[i] * &t);
                }
                acc
            })
            .collect();
        let a = nab[2].clone();
        let b = (&nab[1] - &(&a * &theta[1])).checked_div(&tl[1]).map_err(|_| Error::NotNull)?;
        let check = &(&nab[0] - &(&a * &theta[0])) - &(&b * &tl[0]);
        if !system.is_in_ideal(&check) {
            return Err(Error::NotNull);
        }
        out.push(-&b);
    }
    let n = out.pop().unwrap();
    let m = out.pop().unwrap();
    Ok(Pair::new(c.clone(), m, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideal::SolvedEquation;
    use laxgeom_jet::Coordinates;

    fn lam() -> Expr {
        Expr::lambda()
    }

    fn dkp() -> (System, Pair) {
        let c = Coordinates::standard(3, &["u"]);
        let v = |n: &str| Expr::var(c.parse_var(n).unwrap());
        let rhs = &(&v("u_yy") - &(&v("u") * &v("u_tt"))) - &(&v("u_t") * &v("u_t"));
        let p = c.parse_var("u_xt").unwrap().as_jet().unwrap();
        let s = System::new(c.clone(), vec![SolvedEquation::new("F", p, rhs)]).unwrap();
        let cong = Congruence::new_3d(&(&lam() * &lam()) - &v("u"), lam());
        let m = -&(&(&lam() * &v("u_t")) + &v("u_y"));
        (s, Pair::new(cong, m, -&v("u_t")))
    }

    #[test]
    fn nondegeneracy_examples() {
        assert!(nondegenerate(&Congruence::new_3d(&lam() * &lam(), lam())));
        assert!(!nondegenerate(&Congruence::new_3d(lam(), lam())));
        let z = Expr::zero;
        assert!(nondegenerate(&Congruence::new_4d(lam(), z(), z(), lam())));
    }

    #[test]
    fn dkp_pair() {
        let (s, p) = dkp();
        assert_eq!(p.verify_lax(&s), LaxVerdict::LaxPair);
        assert!(p.is_normal());
        assert!(characteristic_check(&p, &s).unwrap());
        let flipped = Pair::new(p.congruence.clone(), -&p.m, p.n.clone());
        assert_eq!(flipped.verify_lax(&s), LaxVerdict::NotIntegrable);
        let u = Expr::var(s.coords.parse_var("u").unwrap());
        let wrong = Pair::new(Congruence::new_3d(&(&lam() * &lam()) + &u, lam()), p.m.clone(), p.n.clone());
        assert!(!characteristic_check(&wrong, &s).unwrap());
        let trivial = Pair::new(Congruence::new_3d(&lam() * &lam(), lam()), Expr::zero(), Expr::zero());
        assert_eq!(trivial.verify_lax(&s), LaxVerdict::IntegrableButTrivial);
    }

    #[test]
    fn dkp_metric_from_congruence() {
        let (s, p) = dkp();
        let g = recover_metric_3d(&p.congruence, &s).unwrap();
        let q = conformal::characteristic_quadric(&s).unwrap();
        let g0 = conformal::invert_to_metric(&q, &s).unwrap();
        assert!(g.conformally_equal(&g0, &s).unwrap());
        let cubic = Congruence::new_3d(lam().pow(3).unwrap(), lam());
        assert_eq!(recover_metric_3d(&cubic, &s), Err(Error::LambdaDependent));
    }

    #[test]
    fn monge_and_oracle() {
        let parabola = Congruence::new_3d(&lam() * &lam(), lam());
        let hyperbola = Congruence::new_3d(lam().recip().unwrap(), lam());
        let cubic = Congruence::new_3d(lam().pow(3).unwrap(), lam());
        assert!(monge_invariant(&parabola).unwrap().is_zero());
        assert!(monge_invariant(&hyperbola).unwrap().is_zero());
        assert!(!monge_invariant_with_exponent(&hyperbola, 2).unwrap().is_zero());
        assert!(!monge_invariant(&cubic).unwrap().is_zero());
        assert!(conic_oracle(&parabola, 1).unwrap());
        assert!(conic_oracle(&hyperbola, 1).unwrap());
        assert!(!conic_oracle(&cubic, 1).unwrap());
    }

    #[test]
    fn dkp_weyl_lift() {
        let (s, p) = dkp();
        let q = conformal::characteristic_quadric(&s).unwrap();
        let g = conformal::invert_to_metric(&q, &s).unwrap();
        let ut = Expr::var(s.coords.parse_var("u_t").unwrap());
        let ws = WeylStructure::new(g, vec![&ut * &Expr::int(-2), Expr::zero(), Expr::zero()]);
        let lifted = weyl_lift_3d(&p.congruence, &ws, &s).unwrap();
        assert!(lifted.e_equivalent(&p, &s));
    }

    #[test]
    fn flat_4d_normal_lift() {
        let z = Expr::zero;
        let c = Congruence::new_4d(lam(), z(), z(), lam());
        let p = normal_lift_4d(&c).unwrap();
        assert!(p.m.is_zero() && p.n.is_zero());
        assert!(p.is_normal());
    }
}
