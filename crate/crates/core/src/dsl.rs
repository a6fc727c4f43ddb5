//! The `.dspec` text format.
//!
//! ```text
//! # comment
//! [coords]
//! base = x, y, t
//! unknowns = u
//! spectral = lam
//!
//! [equation F]
//! solve u_xt = u_yy - u*u_tt - u_t^2
//!
//! [pair dkp]
//! pair { alpha = lam^2 - u; beta = lam; m = -lam*u_t - u_y; n = -u_t }
//!
//! [metric]
//! g_xx = -4*u
//!
//! [weyl-form]
//! omega_x = -2*u_t
//!
//! [expect]
//! ew = ZeroModIdeal
//! ```
//!
//! Expressions use `+ - * / ^`, parentheses, integer literals and names
//! resolved against `[coords]`. Exponents are integers, optionally negative.

use std::collections::BTreeMap;
use std::fmt;

use laxgeom_jet::{Coordinates, Expr, JetVar, Var};

use crate::conformal::Metric;
use crate::error::Error;
use crate::ideal::{SolvedEquation, System};
use crate::lax::{Congruence, Pair};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DslErrorKind {
    SyntaxError,
    UnknownIdentifier,
    NotSolvedForm,
    InvalidSystem,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DslError {
    pub kind: DslErrorKind,
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for DslError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {:?}: {}", self.line, self.col, self.kind, self.message)
    }
}

impl std::error::Error for DslError {}

fn err(kind: DslErrorKind, line: usize, col: usize, message: impl Into<String>) -> DslError {
    DslError { kind, line, col, message: message.into() }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(i64),
    Ident(String),
    Op(char),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    col: usize,
}

fn lex(text: &str, line: usize, col0: usize) -> Result<Vec<Token>, DslError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = col0 + i;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let n = s.parse().map_err(|_| err(DslErrorKind::SyntaxError, line, col, format!("literal `{s}` is too large")))?;
            out.push(Token { tok: Tok::Num(n), col });
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), col });
        } else if "+-*/^()".contains(c) {
            out.push(Token { tok: Tok::Op(c), col });
            i += 1;
        } else {
            return Err(err(DslErrorKind::SyntaxError, line, col, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    line: usize,
    end_col: usize,
    coords: &'a Coordinates,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.col).unwrap_or(self.end_col)
    }

    fn syntax(&self, msg: impl Into<String>) -> DslError {
        err(DslErrorKind::SyntaxError, self.line, self.col(), msg)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, DslError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = &acc + &self.term()?;
            } else if self.eat('-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, DslError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = &acc * &self.unary()?;
            } else if self.peek() == Some(&Tok::Op('/')) {
                let col = self.col();
                self.pos += 1;
                let d = self.unary()?;
                acc = acc.checked_div(&d).map_err(|_| err(DslErrorKind::SyntaxError, self.line, col, "division by zero"))?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, DslError> {
        if self.eat('-') {
            return Ok(-&self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, DslError> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let col = self.col();
        let paren = self.eat('(');
        let neg = self.eat('-');
        let e = match self.peek() {
            Some(Tok::Num(n)) => *n,
            _ => return Err(self.syntax("expected an integer exponent")),
        };
        self.pos += 1;
        if paren && !self.eat(')') {
            return Err(self.syntax("expected `)`"));
        }
        let e = i32::try_from(e).map_err(|_| err(DslErrorKind::SyntaxError, self.line, col, "exponent too large"))?;
        base.pow(if neg { -e } else { e }).map_err(|_| err(DslErrorKind::SyntaxError, self.line, col, "zero raised to a negative power"))
    }

    fn atom(&mut self) -> Result<Expr, DslError> {
        let col = self.col();
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Expr::int(n))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                let v = self
                    .coords
                    .parse_var(&name)
                    .map_err(|_| err(DslErrorKind::UnknownIdentifier, self.line, col, format!("unknown identifier `{name}`")))?;
                Ok(Expr::var(v))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.syntax("expected `)`"));
                }
                Ok(e)
            }
            Some(t) => Err(self.syntax(format!("unexpected `{}`", tok_text(&t)))),
            None => Err(self.syntax("unexpected end of expression")),
        }
    }
}

fn tok_text(t: &Tok) -> String {
    match t {
        Tok::Num(n) => n.to_string(),
        Tok::Ident(s) => s.clone(),
        Tok::Op(c) => c.to_string(),
    }
}

/// Parses a complete expression; `col0` is the 1-based column of `text`.
pub fn parse_expr_at(text: &str, coords: &Coordinates, line: usize, col0: usize) -> Result<Expr, DslError> {
    let toks = lex(text, line, col0)?;
    let mut p = Parser { toks, pos: 0, line, end_col: col0 + text.chars().count(), coords };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        let t = tok_text(&p.toks[p.pos].tok);
        return Err(p.syntax(format!("unexpected `{t}`")));
    }
    Ok(e)
}

pub fn parse_expr(text: &str, coords: &Coordinates) -> Result<Expr, DslError> {
    parse_expr_at(text, coords, 1, 1)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairSpec {
    pub name: String,
    pub pair: Pair,
}

#[derive(Clone, Debug)]
pub struct SpecFile {
    pub coords: Coordinates,
    pub system: System,
    pub pairs: Vec<PairSpec>,
    pub metric: Option<Metric>,
    pub weyl_form: Option<Vec<Expr>>,
    pub expect: BTreeMap<String, String>,
}

struct Line<'a> {
    no: usize,
    text: &'a str,
}

struct Section<'a> {
    kind: String,
    name: Option<String>,
    line: usize,
    body: Vec<Line<'a>>,
}

fn strip_comment(s: &str) -> &str {
    match s.find('#') {
        Some(i) => &s[..i],
        None => s,
    }
}

fn sections(text: &str) -> Result<Vec<Section<'_>>, DslError> {
    let mut out: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let s = strip_comment(raw);
        let t = s.trim();
        if t.is_empty() {
            continue;
        }
        if t.starts_with('[') {
            let col = s.find('[').unwrap() + 1;
            let inner = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')).ok_or_else(|| err(DslErrorKind::SyntaxError, no, col, "malformed section header"))?;
            let mut parts = inner.split_whitespace();
            let kind = parts.next().unwrap_or("").to_string();
            let name = parts.next().map(str::to_string);
            if parts.next().is_some() {
                return Err(err(DslErrorKind::SyntaxError, no, col, "section header takes at most one name"));
            }
            out.push(Section { kind, name, line: no, body: Vec::new() });
        } else {
            let sec = out.last_mut().ok_or_else(|| err(DslErrorKind::SyntaxError, no, 1, "content before the first section"))?;
            sec.body.push(Line { no, text: s });
        }
    }
    Ok(out)
}

/// `key = value` with the 1-based column of the value.
fn key_value<'a>(l: &Line<'a>) -> Result<(&'a str, &'a str, usize), DslError> {
    let eq = l.text.find('=').ok_or_else(|| err(DslErrorKind::SyntaxError, l.no, indent(l.text) + 1, "expected `key = value`"))?;
    let key = l.text[..eq].trim();
    let val = &l.text[eq + 1..];
    Ok((key, val, eq + 2))
}

fn indent(s: &str) -> usize {
    s.len() - s.trim_start().len()
}

fn list(v: &str) -> Vec<String> {
    v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

pub fn parse(text: &str) -> Result<SpecFile, DslError> {
    let secs = sections(text)?;
    let coords_sec = secs.iter().find(|s| s.kind == "coords").ok_or_else(|| err(DslErrorKind::SyntaxError, 1, 1, "missing [coords] section"))?;
    let (mut base, mut unknowns, mut spectral) = (None, None, "lam".to_string());
    for l in &coords_sec.body {
        let (k, v, _) = key_value(l)?;
        match k {
            "base" => base = Some(list(v)),
            "unknowns" => unknowns = Some(list(v)),
            "spectral" => spectral = v.trim().to_string(),
            _ => return Err(err(DslErrorKind::SyntaxError, l.no, indent(l.text) + 1, format!("unknown key `{k}` in [coords]"))),
        }
    }
    let line = coords_sec.line;
    let base = base.ok_or_else(|| err(DslErrorKind::SyntaxError, line, 1, "[coords] needs `base`"))?;
    let unknowns = unknowns.ok_or_else(|| err(DslErrorKind::SyntaxError, line, 1, "[coords] needs `unknowns`"))?;
    let coords = Coordinates::new(&base, &unknowns, &spectral).map_err(|e| err(DslErrorKind::SyntaxError, line, 1, e.to_string()))?;

    let mut equations = Vec::new();
    let mut eq_lines = Vec::new();
    let mut pairs = Vec::new();
    let mut metric = None;
    let mut weyl_form = None;
    let mut expect = BTreeMap::new();
    let default_names = ["F", "G", "H", "K", "L"];
    for sec in &secs {
        match sec.kind.as_str() {
            "coords" => {}
            "equation" => {
                let name = sec.name.clone().unwrap_or_else(|| default_names.get(equations.len()).unwrap_or(&"E").to_string());
                let [l] = sec.body.as_slice() else {
                    return Err(err(DslErrorKind::SyntaxError, sec.line, 1, "[equation] holds exactly one `solve` line"));
                };
                equations.push(parse_solve(l, &name, &coords)?);
                eq_lines.push(l.no);
            }
            "pair" => {
                let name = sec.name.clone().unwrap_or_else(|| format!("pair{}", pairs.len() + 1));
                pairs.push(PairSpec { name, pair: parse_pair(&sec.body, sec.line, &coords)? });
            }
            "metric" => metric = Some(parse_metric(&sec.body, &coords)?),
            "weyl-form" => weyl_form = Some(parse_weyl_form(&sec.body, &coords)?),
            "expect" => {
                for l in &sec.body {
                    let (k, v, _) = key_value(l)?;
                    expect.insert(k.to_string(), v.trim().to_string());
                }
            }
            other => return Err(err(DslErrorKind::SyntaxError, sec.line, 1, format!("unknown section `[{other}]`"))),
        }
    }
    let system = System::new(coords.clone(), equations).map_err(|e| {
        let kind = if matches!(e, Error::RankingViolation { .. }) { DslErrorKind::NotSolvedForm } else { DslErrorKind::InvalidSystem };
        let line = match &e {
            Error::RankingViolation { equation, .. } => {
                secs.iter().filter(|s| s.kind == "equation").zip(&eq_lines).find(|(s, _)| s.name.as_deref() == Some(equation)).map(|(_, l)| *l)
            }
            _ => None,
        };
        err(kind, line.or(eq_lines.first().copied()).unwrap_or(1), 1, e.to_string())
    })?;
    Ok(SpecFile { coords, system, pairs, metric, weyl_form, expect })
}

fn parse_solve(l: &Line, name: &str, coords: &Coordinates) -> Result<SolvedEquation, DslError> {
    let t = l.text.trim_start();
    let col = indent(l.text) + 1;
    let rest = t.strip_prefix("solve").filter(|r| r.starts_with(char::is_whitespace)).ok_or_else(|| err(DslErrorKind::SyntaxError, l.no, col, "expected `solve <jet> = <expr>`"))?;
    let eq = rest.find('=').ok_or_else(|| err(DslErrorKind::SyntaxError, l.no, col, "expected `=`"))?;
    let lhs = rest[..eq].trim();
    let lhs_col = col + 5 + indent(&rest[..eq]);
    let principal = match coords.parse_var(lhs) {
        Ok(Var::Jet(j)) if j.order() > 0 => j,
        Ok(_) => return Err(err(DslErrorKind::NotSolvedForm, l.no, lhs_col, format!("`{lhs}` is not a derivative of an unknown"))),
        Err(_) => return Err(err(DslErrorKind::UnknownIdentifier, l.no, lhs_col, format!("unknown identifier `{lhs}`"))),
    };
    let rhs_col = col + 5 + eq + 1;
    let rhs = parse_expr_at(&rest[eq + 1..], coords, l.no, rhs_col)?;
    Ok(SolvedEquation::new(name, principal, rhs))
}

fn parse_pair(body: &[Line], line: usize, coords: &Coordinates) -> Result<Pair, DslError> {
    // join the body, tracking where each character came from
    let mut text = String::new();
    let mut origin = Vec::new();
    for l in body {
        for (i, c) in l.text.chars().enumerate() {
            text.push(c);
            origin.push((l.no, i + 1));
        }
        text.push(' ');
        origin.push((l.no, l.text.chars().count() + 1));
    }
    let at = |i: usize| origin.get(i).copied().unwrap_or((line, 1));
    let chars: Vec<char> = text.chars().collect();
    let open = chars.iter().position(|&c| c == '{');
    let start = chars.iter().position(|c| !c.is_whitespace()).unwrap_or(0);
    let word: String = chars[start..].iter().take_while(|c| c.is_alphabetic()).collect();
    let (Some(open), true) = (open, word == "pair") else {
        let (l, c) = at(start);
        return Err(err(DslErrorKind::SyntaxError, l, c, "expected `pair { ... }`"));
    };
    let close = chars.iter().rposition(|&c| c == '}').filter(|&c| c > open).ok_or_else(|| {
        let (l, c) = at(chars.len().saturating_sub(1));
        err(DslErrorKind::SyntaxError, l, c, "expected `}`")
    })?;
    if let Some(extra) = (close + 1..chars.len()).find(|&i| !chars[i].is_whitespace()) {
        let (l, c) = at(extra);
        return Err(err(DslErrorKind::SyntaxError, l, c, "unexpected text after `}`"));
    }
    let mut fields: BTreeMap<String, Expr> = BTreeMap::new();
    let mut i = open + 1;
    while i < close {
        let end = (i..close).find(|&k| chars[k] == ';').unwrap_or(close);
        let item: String = chars[i..end].iter().collect();
        if !item.trim().is_empty() {
            let first = i + indent(&item);
            let (l0, c0) = at(first);
            let eq = item.find('=').ok_or_else(|| err(DslErrorKind::SyntaxError, l0, c0, "expected `name = <expr>`"))?;
            let key = item[..eq].trim().to_string();
            if !["alpha", "beta", "gamma", "delta", "m", "n"].contains(&key.as_str()) {
                return Err(err(DslErrorKind::SyntaxError, l0, c0, format!("unknown pair field `{key}`")));
            }
            let vstart = i + item[..eq + 1].chars().count();
            let (lv, cv) = at(vstart);
            let val: String = item[eq + 1..].to_string();
            let e = parse_expr_at(&val, coords, lv, cv)?;
            if fields.insert(key.clone(), e).is_some() {
                return Err(err(DslErrorKind::SyntaxError, l0, c0, format!("duplicate field `{key}`")));
            }
        }
        i = end + 1;
    }
    let m = fields.remove("m").unwrap_or_else(Expr::zero);
    let n = fields.remove("n").unwrap_or_else(Expr::zero);
    let need = |k: &str, v: Option<Expr>| v.ok_or_else(|| err(DslErrorKind::SyntaxError, line, 1, format!("pair needs `{k}`")));
    let cong = if coords.dim() == 3 {
        if fields.contains_key("gamma") || fields.contains_key("delta") {
            return Err(err(DslErrorKind::SyntaxError, line, 1, "gamma/delta only exist in 4D"));
        }
        Congruence::new_3d(need("alpha", fields.remove("alpha"))?, need("beta", fields.remove("beta"))?)
    } else {
        Congruence::new_4d(
            need("alpha", fields.remove("alpha"))?,
            need("beta", fields.remove("beta"))?,
            need("gamma", fields.remove("gamma"))?,
            need("delta", fields.remove("delta"))?,
        )
    };
    Ok(Pair::new(cong, m, n))
}

fn index_suffix(key: &str, prefix: &str, coords: &Coordinates) -> Option<Vec<usize>> {
    let sub = key.strip_prefix(prefix)?;
    let mut out = Vec::new();
    let mut s = sub;
    while !s.is_empty() {
        let (i, len) = coords.base_names().iter().enumerate().filter(|(_, n)| s.starts_with(n.as_str())).map(|(i, n)| (i, n.len())).max_by_key(|p| p.1)?;
        out.push(i);
        s = &s[len..];
    }
    Some(out)
}

fn parse_metric(body: &[Line], coords: &Coordinates) -> Result<Metric, DslError> {
    let n = coords.dim();
    let mut g = vec![vec![Expr::zero(); n]; n];
    for l in body {
        let (k, v, col) = key_value(l)?;
        let idx = index_suffix(k, "g_", coords).filter(|i| i.len() == 2).ok_or_else(|| {
            err(DslErrorKind::SyntaxError, l.no, indent(l.text) + 1, format!("expected `g_<i><j>`, found `{k}`"))
        })?;
        let e = parse_expr_at(v, coords, l.no, col)?;
        g[idx[0]][idx[1]] = e.clone();
        g[idx[1]][idx[0]] = e;
    }
    Ok(Metric::new(g))
}

fn parse_weyl_form(body: &[Line], coords: &Coordinates) -> Result<Vec<Expr>, DslError> {
    let mut w = vec![Expr::zero(); coords.dim()];
    for l in body {
        let (k, v, col) = key_value(l)?;
        let idx = index_suffix(k, "omega_", coords).filter(|i| i.len() == 1).ok_or_else(|| {
            err(DslErrorKind::SyntaxError, l.no, indent(l.text) + 1, format!("expected `omega_<i>`, found `{k}`"))
        })?;
        w[idx[0]] = parse_expr_at(v, coords, l.no, col)?;
    }
    Ok(w)
}

/// Canonical text of a spec file; `parse(print(s))` prints identically.
pub fn print(spec: &SpecFile) -> String {
    let c = &spec.coords;
    let f = |e: &Expr| c.fmt_expr(e);
    let mut out = String::new();
    out.push_str("[coords]\n");
    out.push_str(&format!("base = {}\n", c.base_names().join(", ")));
    out.push_str(&format!("unknowns = {}\n", c.unknown_names().join(", ")));
    out.push_str(&format!("spectral = {}\n", c.spectral_name()));
    for eq in &spec.system.equations {
        out.push_str(&format!("\n[equation {}]\nsolve {} = {}\n", eq.name, jet_name(c, &eq.principal), f(&eq.rhs)));
    }
    for p in &spec.pairs {
        let names: &[&str] = if c.dim() == 3 { &["alpha", "beta"] } else { &["alpha", "beta", "gamma", "delta"] };
        let mut items: Vec<String> = names.iter().zip(&p.pair.congruence.coeffs).map(|(k, e)| format!("{k} = {}", f(e))).collect();
        items.push(format!("m = {}", f(&p.pair.m)));
        items.push(format!("n = {}", f(&p.pair.n)));
        out.push_str(&format!("\n[pair {}]\npair {{\n  {}\n}}\n", p.name, items.join(";\n  ")));
    }
    if let Some(m) = &spec.metric {
        out.push_str("\n[metric]\n");
        for i in 0..c.dim() {
            for j in i..c.dim() {
                if !m.g[i][j].is_zero() {
                    out.push_str(&format!("g_{}{} = {}\n", c.base_names()[i], c.base_names()[j], f(&m.g[i][j])));
                }
            }
        }
    }
    if let Some(w) = &spec.weyl_form {
        out.push_str("\n[weyl-form]\n");
        for (i, e) in w.iter().enumerate() {
            if !e.is_zero() {
                out.push_str(&format!("omega_{} = {}\n", c.base_names()[i], f(e)));
            }
        }
    }
    if !spec.expect.is_empty() {
        out.push_str("\n[expect]\n");
        for (k, v) in &spec.expect {
            out.push_str(&format!("{k} = {v}\n"));
        }
    }
    out
}

fn jet_name(c: &Coordinates, j: &JetVar) -> String {
    c.jet_name(j)
}

#[cfg(test)]
mod tests {
    use super::*;

    const DKP: &str = "\
[coords]
base = x, y, t
unknowns = u

[equation F]
solve u_xt = u_yy - u*u_tt - u_t^2

[pair dkp]
pair { alpha = lam^2 - u; beta = lam;
       m = -lam*u_t - u_y; n = -u_t }
";

    #[test]
    fn parses_dkp() {
        let s = parse(DKP).unwrap();
        assert_eq!(s.system.equations[0].name, "F");
        assert_eq!(s.pairs.len(), 1);
        let lam = Expr::lambda();
        let u = Expr::var(s.coords.parse_var("u").unwrap());
        assert_eq!(s.pairs[0].pair.congruence.coeffs[0], &(&lam * &lam) - &u);
    }

    #[test]
    fn expression_examples() {
        let c = Coordinates::standard(3, &["u"]);
        let e = parse_expr("lam^2 - u", &c).unwrap();
        assert_eq!(e, &Expr::lambda().pow(2).unwrap() - &Expr::var(c.parse_var("u").unwrap()));
        assert_eq!(parse_expr("x^-1*x", &c).unwrap(), Expr::one());
        assert_eq!(parse_expr("-1/2*(x + 1)", &c).unwrap(), &(&Expr::base(0) + &Expr::one()) * &Expr::ratio(-1, 2));
    }

    #[test]
    fn error_positions() {
        let c = Coordinates::standard(3, &["u"]);
        let e = parse_expr("u + w_x", &c).unwrap_err();
        assert_eq!((e.kind, e.line, e.col), (DslErrorKind::UnknownIdentifier, 1, 5));
        let e = parse_expr("u + * 2", &c).unwrap_err();
        assert_eq!((e.kind, e.col), (DslErrorKind::SyntaxError, 5));
        let e = parse_expr("(u + 1", &c).unwrap_err();
        assert_eq!(e.kind, DslErrorKind::SyntaxError);
    }

    #[test]
    fn not_solved_form() {
        let text = "[coords]\nbase = x, y, t\nunknowns = u\n[equation]\nsolve u_xt = u_xxx\n";
        let e = parse(text).unwrap_err();
        assert_eq!((e.kind, e.line), (DslErrorKind::NotSolvedForm, 5));
    }

    #[test]
    fn print_roundtrip() {
        let s = parse(DKP).unwrap();
        let p = print(&s);
        let again = print(&parse(&p).unwrap());
        assert_eq!(p, again);
    }
}
