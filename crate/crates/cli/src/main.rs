use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use laxgeom::conformal::{self, Metric};
use laxgeom::corpus::{self, error_name, CorpusEntry, Options};
use laxgeom::dsl::{self, SpecFile};
use laxgeom::lax::{self, LaxVerdict};
use laxgeom::weyl::{self, Corollary, Residual, WeylStructure};
use laxgeom::{Error, System};
use laxgeom_jet::{Coeff, Coordinates, Expr};
use rayon::prelude::*;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

/// Residual strings longer than this are cut and tagged with a hash.
const RESIDUAL_BUDGET: usize = 160;

#[derive(Parser)]
#[command(name = "laxgeom", version, about = "Conformal geometry and Lax pairs of dispersionless PDE systems")]
struct Cli {
    /// Order budget for cofactor extraction.
    #[arg(long, global = true, default_value_t = 4)]
    max_order: usize,
    /// Seed for random rational samples.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Matrix symbol and characteristic quadric.
    Symbol { file: PathBuf },
    /// Metric of the characteristic quadric and its signature.
    Metric {
        file: PathBuf,
        /// Point to evaluate the signature at, e.g. `u=1,u_t=-1/2`; random when absent.
        #[arg(long)]
        sample: Option<String>,
    },
    #[command(subcommand)]
    Lax(LaxCommand),
    #[command(subcommand)]
    Ew(EwCommand),
    #[command(subcommand)]
    Sd(SdCommand),
    #[command(subcommand)]
    Corpus(CorpusCommand),
}

#[derive(Subcommand)]
enum LaxCommand {
    /// Lax verdict, characteristic check and normality of every pair.
    Verify { file: PathBuf },
    /// Normal pair E-equivalent to each pair.
    Normalize { file: PathBuf },
    /// Conformal structure recovered from each congruence.
    RecoverMetric { file: PathBuf },
}

#[derive(Subcommand)]
enum EwCommand {
    /// Einstein-Weyl residual of the characteristic metric.
    Check(EwArgs),
}

#[derive(Args)]
struct EwArgs {
    file: PathBuf,
    /// Solve for the Weyl form (default when the file states none).
    #[arg(long, conflicts_with = "omega_from_file")]
    solve_omega: bool,
    #[arg(long, default_value_t = 1)]
    ansatz_order: usize,
    /// Use the `[weyl-form]` section of the file.
    #[arg(long)]
    omega_from_file: bool,
}

#[derive(Subcommand)]
enum SdCommand {
    /// Anti-self-dual part of the Weyl tensor for one orientation.
    Check {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_orientation)]
        orientation: i32,
    },
}

#[derive(Subcommand)]
enum CorpusCommand {
    /// Check the stated expectations of built-in examples.
    Verify {
        #[arg(required_unless_present = "all", conflicts_with = "all")]
        name: Option<String>,
        #[arg(long)]
        all: bool,
        #[arg(long, default_value_t = 1)]
        ansatz_order: usize,
    },
}

fn parse_orientation(s: &str) -> Result<i32, String> {
    match s {
        "+" | "+1" | "1" => Ok(1),
        "-" | "-1" => Ok(-1),
        _ => Err(format!("orientation must be + or -, got `{s}`")),
    }
}

/// Failure that maps to exit code 2.
struct UsageError(String);

impl From<Error> for UsageError {
    fn from(e: Error) -> Self {
        UsageError(e.to_string())
    }
}

/// Flat key/value report; `failed` marks a Nonzero or NotIntegrable verdict.
#[derive(Default)]
struct Report {
    fields: Map<String, Value>,
    failed: bool,
}

impl Report {
    fn put(&mut self, key: impl Into<String>, value: impl Into<Value>) {
        self.fields.insert(key.into(), value.into());
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(&Value::Object(self.fields.clone())).expect("serializable report"),
            Format::Text => {
                let mut out = String::new();
                for (k, v) in &self.fields {
                    let v = match v {
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    };
                    out.push_str(&format!("{k}: {v}\n"));
                }
                out
            }
        }
    }
}

fn truncated(s: String) -> String {
    if s.len() <= RESIDUAL_BUDGET {
        return s;
    }
    let mut cut = RESIDUAL_BUDGET;
    while !s.is_char_boundary(cut) {
        cut -= 1;
    }
    let hash: String = Sha256::digest(s.as_bytes()).iter().take(8).map(|b| format!("{b:02x}")).collect();
    format!("{}... ({} chars, sha256 {hash})", &s[..cut], s.len())
}

fn millis(d: std::time::Duration) -> f64 {
    (d.as_secs_f64() * 1e6).round() / 1e3
}

fn load(path: &Path) -> Result<SpecFile, UsageError> {
    let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    dsl::parse(&text).map_err(|e| UsageError(format!("{}:{e}", path.display())))
}

fn symbol_metric(sys: &System) -> Result<Metric, Error> {
    conformal::invert_to_metric(&conformal::characteristic_quadric(sys)?, sys)
}

/// Index labels by base names; four-index labels split into two pairs.
fn index_name(c: &Coordinates, idx: &[usize]) -> String {
    let names: Vec<&str> = idx.iter().map(|&i| c.base_names()[i].as_str()).collect();
    if names.len() == 4 {
        format!("{}{}.{}{}", names[0], names[1], names[2], names[3])
    } else {
        names.concat()
    }
}

fn put_residual(r: &mut Report, prefix: &str, res: &Residual, c: &Coordinates) {
    for (label, e) in res.labels.iter().zip(&res.reduced) {
        if !e.is_zero() {
            r.put(format!("{prefix}.{}", index_name(c, label)), truncated(c.fmt_expr(e)));
        }
    }
}

fn cmd_symbol(spec: &SpecFile, r: &mut Report) -> Result<(), UsageError> {
    let sys = &spec.system;
    let c = &sys.coords;
    let theta: Vec<Expr> = conformal::formal_covector(c).into_iter().map(Expr::var).collect();
    let sym = conformal::matrix_symbol(sys)?;
    for (eq, row) in sys.equations.iter().zip(&sym) {
        for (k, s) in row.iter().enumerate() {
            r.put(format!("symbol.{}.{}", eq.name, c.unknown_names()[k]), c.fmt_expr(&s.eval(&theta)));
        }
    }
    match conformal::characteristic_quadric(sys) {
        Ok(q) => {
            for i in 0..c.dim() {
                for j in i..c.dim() {
                    r.put(format!("quadric.{}", index_name(c, &[i, j])), c.fmt_expr(&q.matrix[i][j]));
                }
            }
        }
        Err(e) => r.put("quadric", error_name(&e)),
    }
    Ok(())
}

fn parse_sample(text: &str, c: &Coordinates) -> Result<Vec<(laxgeom_jet::Var, Coeff)>, UsageError> {
    text.split(',')
        .map(|kv| {
            let (k, v) = kv.split_once('=').ok_or_else(|| UsageError(format!("sample entry `{kv}` is not name=value")))?;
            let var = c.parse_var(k.trim()).map_err(|e| UsageError(e.to_string()))?;
            let val: Coeff = v.trim().parse().map_err(|_| UsageError(format!("`{v}` is not a rational number")))?;
            Ok((var, val))
        })
        .collect()
}

fn cmd_metric(spec: &SpecFile, sample: Option<&str>, seed: u64, r: &mut Report) -> Result<(), UsageError> {
    let sys = &spec.system;
    let c = &sys.coords;
    let g = symbol_metric(sys)?;
    r.put("metric", g.display(c));
    let sig = match sample {
        Some(s) => conformal::signature_at(&g, &parse_sample(s, c)?)?,
        None => conformal::signature_sampled(&g, seed)?,
    };
    let at: Vec<String> = sig.sample.iter().map(|(v, x)| format!("{}={x}", c.fmt_expr(&Expr::var(*v)))).collect();
    r.put("signature", format!("{},{}", sig.p, sig.q));
    r.put("sample", at.join(","));
    if let Some(m) = &spec.metric {
        r.put("matches-file", g.conformally_equal(m, sys)?);
    }
    Ok(())
}

fn cmd_lax_verify(spec: &SpecFile, r: &mut Report) {
    let sys = &spec.system;
    let rows: Vec<_> = spec
        .pairs
        .par_iter()
        .map(|ps| {
            let p = &ps.pair;
            let chr = lax::characteristic_check(p, sys).map(Value::from).unwrap_or_else(|e| error_name(&e).into());
            (ps.name.clone(), p.verify_lax(sys), chr, p.is_normal())
        })
        .collect();
    for (name, verdict, chr, normal) in rows {
        r.failed |= verdict == LaxVerdict::NotIntegrable;
        r.put(format!("pair.{name}.verdict"), verdict.to_string());
        r.put(format!("pair.{name}.characteristic"), chr);
        r.put(format!("pair.{name}.normal"), normal);
    }
}

fn cmd_lax_normalize(spec: &SpecFile, max_order: usize, r: &mut Report) {
    let sys = &spec.system;
    let c = &sys.coords;
    let rows: Vec<_> = spec.pairs.par_iter().map(|ps| (ps.name.clone(), lax::normalize(&ps.pair, sys, max_order))).collect();
    for (name, out) in rows {
        match out {
            Ok(n) => {
                r.put(format!("pair.{name}.m"), truncated(c.fmt_expr(&n.pair.m)));
                r.put(format!("pair.{name}.n"), truncated(c.fmt_expr(&n.pair.n)));
                r.put(format!("pair.{name}.normal"), n.pair.is_normal());
                for (k, cof) in n.cofactors.iter().enumerate() {
                    for (eq, op) in &cof.operators {
                        r.put(format!("pair.{name}.cofactor.{k}.{eq}"), truncated(op.display(c)));
                    }
                }
            }
            Err(e) => {
                r.failed |= matches!(e, Error::NotInIdeal);
                r.put(format!("pair.{name}.normalize"), error_name(&e));
            }
        }
    }
}

fn cmd_lax_recover(spec: &SpecFile, r: &mut Report) {
    let sys = &spec.system;
    let c = &sys.coords;
    let reference = symbol_metric(sys).ok();
    for ps in &spec.pairs {
        match lax::recover_metric(&ps.pair.congruence, sys) {
            Ok(g) => {
                r.put(format!("pair.{}.metric", ps.name), g.display(c));
                if let Some(h) = &reference {
                    let same = g.conformally_equal(h, sys).unwrap_or(false);
                    r.put(format!("pair.{}.matches-symbol", ps.name), same);
                }
            }
            Err(e) => r.put(format!("pair.{}.metric", ps.name), error_name(&e)),
        }
    }
}

fn put_classification(r: &mut Report, c: Corollary) {
    r.failed |= c == Corollary::Nonzero;
    r.put("classification", c.to_string());
    if c == Corollary::IdenticallyZero {
        r.put("warning", "trivial corollary: the residual vanishes for every function");
    }
}

fn cmd_ew(spec: &SpecFile, a: &EwArgs, r: &mut Report) -> Result<(), UsageError> {
    let sys = &spec.system;
    let c = &sys.coords;
    let g = symbol_metric(sys)?;
    let from_file = a.omega_from_file || (!a.solve_omega && spec.weyl_form.is_some());
    let omega = if from_file {
        r.put("omega.source", "file");
        spec.weyl_form.clone().ok_or_else(|| UsageError("file has no [weyl-form] section".into()))?
    } else {
        r.put("omega.source", format!("solved, ansatz order {}", a.ansatz_order));
        match weyl::solve_weyl_form_particular(&g, sys, a.ansatz_order) {
            Ok((ws, 0)) => ws.omega,
            Ok((ws, free)) => {
                r.put("omega.free-coefficients", free);
                ws.omega
            }
            Err(e @ (Error::NoSolution | Error::NonUnique(_))) => {
                r.failed = true;
                r.put("omega", error_name(&e));
                return Ok(());
            }
            Err(e) => return Err(e.into()),
        }
    };
    r.put("omega", omega.iter().map(|e| c.fmt_expr(e)).collect::<Vec<_>>().join(", "));
    let res = weyl::ew_residual(&WeylStructure::new(g, omega), sys)?;
    put_classification(r, res.classify());
    put_residual(r, "residual", &res, c);
    Ok(())
}

fn cmd_sd(spec: &SpecFile, orientation: i32, r: &mut Report) -> Result<(), UsageError> {
    let sys = &spec.system;
    let g = symbol_metric(sys)?;
    let res = weyl::sd_residual(&g, orientation, sys)?;
    r.put("orientation", if orientation > 0 { "+" } else { "-" });
    put_classification(r, res.classify());
    put_residual(r, "residual", &res, &sys.coords);
    Ok(())
}

fn cmd_corpus(name: Option<&str>, opts: &Options, r: &mut Report) -> Result<(), UsageError> {
    let names: Vec<&str> = match name {
        Some(n) => vec![corpus::NAMES.iter().copied().find(|k| *k == n).ok_or_else(|| {
            UsageError(format!("unknown corpus entry `{n}`; known: {}", corpus::NAMES.join(", ")))
        })?],
        None => corpus::NAMES.to_vec(),
    };
    let entries: Vec<CorpusEntry> = names.iter().map(|n| corpus::load(n).expect("known entry")).collect();
    let reports: Vec<_> = entries.par_iter().map(|e| corpus::verify(e, opts)).collect();
    for rep in reports {
        for ch in &rep.checks {
            let key = format!("{}.{}", rep.name, ch.key);
            r.put(format!("{key}.result"), ch.actual.clone());
            r.put(format!("{key}.pass"), ch.passed());
            if !ch.passed() {
                r.put(format!("{key}.expected"), ch.expected.clone());
            }
            r.put(format!("{key}.ms"), millis(ch.elapsed));
        }
        r.failed |= !rep.passed();
        r.put(format!("{}.pass", rep.name), rep.passed());
    }
    Ok(())
}

fn run(cli: &Cli, r: &mut Report) -> Result<(), UsageError> {
    match &cli.command {
        Command::Symbol { file } => cmd_symbol(&load(file)?, r),
        Command::Metric { file, sample } => cmd_metric(&load(file)?, sample.as_deref(), cli.seed, r),
        Command::Lax(LaxCommand::Verify { file }) => {
            cmd_lax_verify(&load(file)?, r);
            Ok(())
        }
        Command::Lax(LaxCommand::Normalize { file }) => {
            cmd_lax_normalize(&load(file)?, cli.max_order, r);
            Ok(())
        }
        Command::Lax(LaxCommand::RecoverMetric { file }) => {
            cmd_lax_recover(&load(file)?, r);
            Ok(())
        }
        Command::Ew(EwCommand::Check(a)) => cmd_ew(&load(&a.file)?, a, r),
        Command::Sd(SdCommand::Check { file, orientation }) => cmd_sd(&load(file)?, *orientation, r),
        Command::Corpus(CorpusCommand::Verify { name, all: _, ansatz_order }) => {
            let opts = Options { seed: cli.seed, max_order: cli.max_order, ansatz_order: *ansatz_order };
            cmd_corpus(name.as_deref(), &opts, r)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut report = Report::default();
    let t = Instant::now();
    if let Err(UsageError(msg)) = run(&cli, &mut report) {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    report.put("elapsed_ms", millis(t.elapsed()));
    print!("{}", report.render(cli.format));
    if report.failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
