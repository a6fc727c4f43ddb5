//! Built-in example systems and the harness checking their expectations.

use std::time::{Duration, Instant};

use laxgeom_jet::Expr;

use crate::conformal::{self, Metric};
use crate::dsl::{self, SpecFile};
use crate::error::Error;
use crate::lax::{self, Pair};
use crate::weyl::{self, WeylStructure};

pub const NAMES: [&str; 6] = ["dkp", "manakov-santini", "flat-counterexample", "master-ew", "second-heavenly", "dkp-broken"];

pub fn source(name: &str) -> Option<&'static str> {
    Some(match name {
        "dkp" => include_str!("../../../corpus/dkp.dspec"),
        "manakov-santini" => include_str!("../../../corpus/manakov-santini.dspec"),
        "flat-counterexample" => include_str!("../../../corpus/flat-counterexample.dspec"),
        "master-ew" => include_str!("../../../corpus/master-ew.dspec"),
        "second-heavenly" => include_str!("../../../corpus/second-heavenly.dspec"),
        "dkp-broken" => include_str!("../../../corpus/dkp-broken.dspec"),
        _ => return None,
    })
}

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: String,
    pub spec: SpecFile,
}

impl CorpusEntry {
    pub fn pair(&self, name: &str) -> Option<&Pair> {
        self.spec.pairs.iter().find(|p| p.name == name).map(|p| &p.pair)
    }
}

pub fn load(name: &str) -> Option<CorpusEntry> {
    let text = source(name)?;
    let spec = dsl::parse(text).unwrap_or_else(|e| panic!("corpus entry `{name}` does not parse: {e}"));
    Some(CorpusEntry { name: name.to_string(), spec })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub key: String,
    pub expected: String,
    pub actual: String,
    pub elapsed: Duration,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.expected == self.actual
    }
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub name: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed()).collect()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Options {
    pub seed: u64,
    pub max_order: usize,
    pub ansatz_order: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options { seed: 7, max_order: 4, ansatz_order: 1 }
    }
}

struct Recorder<'a> {
    entry: &'a CorpusEntry,
    checks: Vec<Check>,
}

impl Recorder<'_> {
    /// Runs `f` only when `key` has an expectation.
    fn check(&mut self, key: &str, f: impl FnOnce() -> String) {
        if let Some(expected) = self.entry.spec.expect.get(key) {
            let t = Instant::now();
            let actual = f();
            self.checks.push(Check { key: key.to_string(), expected: expected.clone(), actual, elapsed: t.elapsed() });
        }
    }

    fn wants(&self, key: &str) -> bool {
        self.entry.spec.expect.contains_key(key)
    }
}

fn outcome<T>(r: &Result<T, Error>, ok: impl FnOnce(&T) -> String) -> String {
    match r {
        Ok(v) => ok(v),
        Err(e) => error_name(e),
    }
}

pub fn error_name(e: &Error) -> String {
    let s = format!("{e:?}");
    s.split(['(', ' ', '{']).next().unwrap_or("").to_string()
}

/// Runs the pipeline on an entry and compares every stated expectation.
pub fn verify(entry: &CorpusEntry, opts: &Options) -> Report {
    let spec = &entry.spec;
    let sys = &spec.system;
    let mut r = Recorder { entry, checks: Vec::new() };
    let quadric = conformal::characteristic_quadric(sys);
    let metric: Result<Metric, Error> = quadric.clone().and_then(|q| conformal::invert_to_metric(&q, sys));
    r.check("metric", || match (&metric, &spec.metric) {
        (Ok(g), Some(m)) => {
            if g.conformally_equal(m, sys).unwrap_or(false) {
                "conformal".into()
            } else {
                "different".into()
            }
        }
        (Ok(_), None) => "no reference".into(),
        (Err(e), _) => error_name(e),
    });
    r.check("signature", || outcome(&metric, |g| outcome(&conformal::signature_sampled(g, opts.seed), |s| format!("{},{}", s.p, s.q))));

    // Weyl form: solved when possible, else the file's, else zero
    let mut omega: Option<Vec<Expr>> = None;
    if sys.dim() == 3 && (r.wants("ew") || r.wants("ew.solve") || spec.pairs.iter().any(|p| r.wants(&format!("pair.{}.weyl-lift", p.name)))) {
        if let Ok(g) = &metric {
            let t = Instant::now();
            let solved = weyl::solve_weyl_form(g, sys, opts.ansatz_order);
            let elapsed = t.elapsed();
            if let Some(expected) = spec.expect.get("ew.solve") {
                r.checks.push(Check { key: "ew.solve".into(), expected: expected.clone(), actual: outcome(&solved, |_| "Solved".into()), elapsed });
            }
            if let (Ok(ws), Some(w)) = (&solved, &spec.weyl_form) {
                let same = ws.omega.iter().zip(w).all(|(a, b)| sys.is_in_ideal(&(a - b)));
                r.checks.push(Check {
                    key: "weyl-form".into(),
                    expected: "as stated".into(),
                    actual: if same { "as stated" } else { "different" }.into(),
                    elapsed,
                });
            }
            omega = solved.ok().map(|ws| ws.omega).or_else(|| spec.weyl_form.clone());
        }
    }
    r.check("ew", || {
        let g = match &metric {
            Ok(g) => g.clone(),
            Err(e) => return error_name(e),
        };
        let w = omega.clone().unwrap_or_else(|| vec![Expr::zero(); 3]);
        outcome(&weyl::ew_residual(&WeylStructure::new(g, w), sys), |res| res.classify().to_string())
    });
    r.check("ew.levi-civita", || {
        outcome(&metric.clone().and_then(|g| weyl::ew_residual(&WeylStructure::levi_civita(g), sys)), |res| res.classify().to_string())
    });
    for (key, o) in [("sd.plus", 1), ("sd.minus", -1)] {
        r.check(key, || outcome(&metric.clone().and_then(|g| weyl::sd_residual(&g, o, sys)), |res| res.classify().to_string()));
    }

    for ps in &spec.pairs {
        let p = &ps.pair;
        let k = |s: &str| format!("pair.{}{}", ps.name, s);
        r.check(&k(""), || p.verify_lax(sys).to_string());
        r.check(&k(".characteristic"), || outcome(&lax::characteristic_check(p, sys), |b| b.to_string()));
        r.check(&k(".normal"), || p.is_normal().to_string());
        r.check(&k(".recovers-metric"), || {
            let rec = lax::recover_metric(&p.congruence, sys);
            match (&rec, &metric) {
                (Ok(a), Ok(b)) => a.conformally_equal(b, sys).map(|x| x.to_string()).unwrap_or_else(|e| error_name(&e)),
                (Err(e), _) | (_, Err(e)) => error_name(e),
            }
        });
        r.check(&k(".weyl-lift"), || {
            let (Ok(g), Some(w)) = (&metric, &omega) else { return "no Weyl structure".into() };
            let ws = WeylStructure::new(g.clone(), w.clone());
            outcome(&lax::weyl_lift_3d(&p.congruence, &ws, sys), |l| l.e_equivalent(p, sys).to_string())
        });
        if let (Some(shift), Some(target)) = (spec.expect.get(&k(".normalize-shift")), spec.expect.get(&k(".normalize-target"))) {
            let t = Instant::now();
            let actual = normalize_and_compare(entry, p, shift, target, opts);
            r.checks.push(Check { key: k(".normalize"), expected: "E-equivalent".into(), actual, elapsed: t.elapsed() });
        }
    }
    Report { name: entry.name.clone(), checks: r.checks }
}

fn normalize_and_compare(entry: &CorpusEntry, p: &Pair, shift: &str, target: &str, opts: &Options) -> String {
    let sys = &entry.spec.system;
    let Some(target) = entry.pair(target) else { return format!("no pair `{target}`") };
    let phi = match dsl::parse_expr(shift, &sys.coords) {
        Ok(e) => e,
        Err(e) => return e.to_string(),
    };
    let normalized = match lax::normalize(p, sys, opts.max_order) {
        Ok(n) => n.pair,
        Err(e) => return error_name(&e),
    };
    if !normalized.is_normal() {
        return "not normal".into();
    }
    match normalized.shift_spectral(&phi) {
        Ok(q) if q.e_equivalent(target, sys) => "E-equivalent".into(),
        Ok(_) => "different".into(),
        Err(e) => error_name(&e),
    }
}
