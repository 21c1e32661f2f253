//! Command-line front end: tree enumeration, negative trees, renormalised
//! equations, counterterm sweeps, graph power-counting checks and a
//! self-test, with text / JSON / DOT / CSV output.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::Rational64;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::Problem;
use crate::counterterms::{self, dyadic_decompose, zbar, ConstantSweep, KernelSpec, Resolution};
use crate::error::{Error, Result};
use crate::graph_power::{check_assumptions, LabelledGraph};
use crate::homogeneity::{parse_rational, Homogeneity};
use crate::renorm_eq::renormalized_equation;
use crate::renorm_group::{Character, Universe};
use crate::rules::{Alphabet, EdgeClass};
use crate::subforests::{negative_forests, negative_subtrees};
use crate::trees::{SecondHomogeneity, TypedTree};

/// Environment variable fixing the size of the worker pool.
pub const THREADS_ENV: &str = "RENORMALIST_THREADS";

/// Process exit codes, one per failure class.
pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const INPUT: i32 = 3;
    pub const PRECONDITION: i32 = 4;
    pub const NUMERICS: i32 = 5;
    pub const GRAPH_CHECK_FAILED: i32 = 6;
    pub const SELFTEST_FAILED: i32 = 7;
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => exit::IO,
        Error::Parse(_) | Error::Invalid(_) | Error::Unknown(_) => exit::INPUT,
        Error::Precondition(_) | Error::Budget(_) => exit::PRECONDITION,
        Error::Numerics(_) => exit::NUMERICS,
    }
}

/// Machine-readable error object written to stderr.
pub fn error_json(class: &str, message: &str) -> String {
    json!({ "error": { "class": class, "message": message } }).to_string()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Dot,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Sector {
    /// Right-hand-side trees 𝔗^r.
    Rhs,
    /// Solution trees 𝔗^𝒥.
    Solution,
    All,
}

#[derive(Debug, Parser)]
#[command(name = "renormalist", version, about = "Decorated trees, renormalisation and counterterms for singular SPDEs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate the trees of the model below the cutoffs.
    Trees {
        config: PathBuf,
        /// Override the cutoff γ of the selected sector(s).
        #[arg(long)]
        gamma: Option<String>,
        /// Override δ₀ of the second homogeneity.
        #[arg(long)]
        delta0: Option<String>,
        /// Concrete rational κ for numeric homogeneities.
        #[arg(long)]
        kappa: Option<String>,
        #[arg(long, value_enum, default_value = "all")]
        sector: Sector,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// List the counterterm-relevant negative trees.
    Negatives {
        config: PathBuf,
        #[arg(long)]
        kappa: Option<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Emit the renormalised equation for the configured constants.
    Renorm {
        config: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Evaluate counterterm constants on an ε-grid and fit divergence rates.
    Counterterms {
        config: PathBuf,
        /// Exponents k of ε = 2^{-k}, as `3..8` or `3,5,7`.
        #[arg(long)]
        eps_grid: Option<String>,
        /// Quadrature resolution level (overrides the config).
        #[arg(long)]
        resolution: Option<usize>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Check the power-counting conditions of a labelled graph.
    Graphcheck {
        graph: PathBuf,
        #[arg(long)]
        kappa: Option<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run the built-in consistency checks on the bundled example models.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random characters per group-axiom check.
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

/// Result of a command: what to print and the exit code.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { stdout, code: exit::OK }
    }
}

fn unsupported(cmd: &str, f: Format) -> Error {
    Error::Invalid(format!("format {:?} is not supported by '{cmd}'", f).to_lowercase())
}

fn parse_h(s: &str) -> Result<Homogeneity> {
    s.parse()
}

fn kappa_value(arg: &Option<String>, default: &str) -> Result<Rational64> {
    parse_rational(arg.as_deref().unwrap_or(default))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialise");
    s.push('\n');
    s
}

fn num(h: Homogeneity, kappa: Rational64) -> f64 {
    h.substitute(kappa).rational.to_f64().unwrap_or(f64::NAN)
}

/// Run a parsed command.
pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Trees { config, gamma, delta0, kappa, sector, format } => {
            let p = Problem::load(config)?;
            cmd_trees(&p, gamma.as_deref(), delta0.as_deref(), kappa, *sector, *format).map(Outcome::ok)
        }
        Command::Negatives { config, kappa, format } => {
            let p = Problem::load(config)?;
            cmd_negatives(&p, kappa, *format).map(Outcome::ok)
        }
        Command::Renorm { config, format } => cmd_renorm(&Problem::load(config)?, *format).map(Outcome::ok),
        Command::Counterterms { config, eps_grid, resolution, format } => {
            cmd_counterterms(&Problem::load(config)?, eps_grid.as_deref(), *resolution, *format).map(Outcome::ok)
        }
        Command::Graphcheck { graph, kappa, format } => cmd_graphcheck(&LabelledGraph::load(graph)?, kappa, *format),
        Command::Selftest { seed, trials, format } => cmd_selftest(*seed, *trials, *format),
    }
}

/// Per-tree enumeration record.
struct TreeRow {
    tree: String,
    homogeneity: Homogeneity,
    norm: String,
    symmetry: u128,
    plane_count: u128,
}

fn tree_rows(p: &Problem, trees: &[TypedTree], delta0: Homogeneity) -> Vec<TreeRow> {
    let al = &p.alphabet;
    let mut sh = SecondHomogeneity::new(al);
    trees
        .iter()
        .map(|t| TreeRow {
            tree: t.format(al),
            homogeneity: t.homogeneity(al),
            norm: sh.eval(t, delta0).to_string(),
            symmetry: t.symmetry(),
            plane_count: t.plane_count(),
        })
        .collect()
}

/// `trees`: enumeration report per sector.
pub fn cmd_trees(
    p: &Problem,
    gamma: Option<&str>,
    delta0: Option<&str>,
    kappa: &Option<String>,
    sector: Sector,
    format: Format,
) -> Result<String> {
    let gamma = gamma.map(parse_h).transpose()?;
    let delta0 = delta0.map(parse_h).transpose()?.unwrap_or(p.config.cutoffs.delta0);
    let k = kappa_value(kappa, &p.config.kappa)?;
    p.check_rule()?;
    let mut sectors = Vec::new();
    if matches!(sector, Sector::Rhs | Sector::All) {
        let g = gamma.unwrap_or(p.config.cutoffs.gamma_rhs);
        sectors.push(("rhs", g, p.rhs_trees(Some(g))?));
    }
    if matches!(sector, Sector::Solution | Sector::All) {
        let g = gamma.unwrap_or(p.config.cutoffs.gamma_solution);
        sectors.push(("solution", g, p.solution_trees(Some(g))?));
    }
    let al = &p.alphabet;
    match format {
        Format::Text => {
            let mut s = format!("# model {} (δ₀ = {delta0}, κ = {k})\n", p.config.name);
            for (name, g, trees) in &sectors {
                let _ = writeln!(s, "## sector {name}: {} trees below γ = {g}", trees.len());
                let _ = writeln!(s, "{:<40} {:>16} {:>10} {:>16} {:>6} {:>6}", "tree", "|τ|", "|τ|(κ)", "‖τ‖", "S", "plane");
                for r in tree_rows(p, trees, delta0) {
                    let _ = writeln!(
                        s,
                        "{:<40} {:>16} {:>10.4} {:>16} {:>6} {:>6}",
                        r.tree,
                        r.homogeneity.to_string(),
                        num(r.homogeneity, k),
                        r.norm,
                        r.symmetry,
                        r.plane_count
                    );
                }
            }
            Ok(s)
        }
        Format::Json => {
            let secs: Vec<Value> = sectors
                .iter()
                .map(|(name, g, trees)| {
                    let rows: Vec<Value> = tree_rows(p, trees, delta0)
                        .into_iter()
                        .map(|r| {
                            json!({
                                "tree": r.tree,
                                "homogeneity": r.homogeneity.to_string(),
                                "homogeneity_value": num(r.homogeneity, k),
                                "norm": r.norm,
                                "symmetry": r.symmetry.to_string(),
                                "plane_count": r.plane_count.to_string(),
                            })
                        })
                        .collect();
                    json!({ "sector": name, "gamma": g.to_string(), "count": trees.len(), "trees": rows })
                })
                .collect();
            Ok(pretty(&json!({
                "model": p.config.name,
                "delta0": delta0.to_string(),
                "kappa": k.to_string(),
                "sectors": secs,
            })))
        }
        Format::Dot => {
            let mut s = String::new();
            for (name, _, trees) in &sectors {
                for (i, t) in trees.iter().enumerate() {
                    s.push_str(&t.to_dot(al, &format!("{name}_{i}: {}", t.format(al)), None, None));
                }
            }
            Ok(s)
        }
        Format::Csv => {
            let mut s = String::from("sector,tree,homogeneity,homogeneity_value,norm,symmetry,plane_count\n");
            for (name, _, trees) in &sectors {
                for r in tree_rows(p, trees, delta0) {
                    let _ = writeln!(
                        s,
                        "{name},\"{}\",{},{},{},{},{}",
                        r.tree,
                        r.homogeneity,
                        num(r.homogeneity, k),
                        r.norm,
                        r.symmetry,
                        r.plane_count
                    );
                }
            }
            Ok(s)
        }
    }
}

/// Colour depth per node: the number of negative subtrees of `t` whose
/// node set contains it (nesting depth of divergent subdiagrams).
pub fn divergence_depth(al: &Alphabet, t: &TypedTree) -> Vec<u32> {
    let mut d = vec![0u32; t.num_nodes()];
    for s in negative_subtrees(al, t) {
        let nodes: BTreeSet<usize> = s.iter().flat_map(|&e| [e, t.lower(e)]).collect();
        for n in nodes {
            d[n] += 1;
        }
    }
    d
}

/// `negatives`: counterterm-relevant negative trees.
pub fn cmd_negatives(p: &Problem, kappa: &Option<String>, format: Format) -> Result<String> {
    let al = &p.alphabet;
    let k = kappa_value(kappa, &p.config.kappa)?;
    p.check_rule()?;
    let trees = p.negative_trees()?;
    match format {
        Format::Text => {
            let mut s = format!("# model {}: {} negative trees with an even number of noises\n", p.config.name, trees.len());
            let _ = writeln!(s, "{:<40} {:>16} {:>10} {:>7} {:>4} {:>8}", "tree", "|τ|", "|τ|(κ)", "noises", "S", "forests");
            for t in &trees {
                let h = t.homogeneity(al);
                let _ = writeln!(
                    s,
                    "{:<40} {:>16} {:>10.4} {:>7} {:>4} {:>8}",
                    t.format(al),
                    h.to_string(),
                    num(h, k),
                    t.count_class(al, EdgeClass::Minus),
                    t.symmetry(),
                    negative_forests(al, t).len()
                );
            }
            Ok(s)
        }
        Format::Json => {
            let rows: Vec<Value> = trees
                .iter()
                .map(|t| {
                    let h = t.homogeneity(al);
                    json!({
                        "tree": t.format(al),
                        "homogeneity": h.to_string(),
                        "homogeneity_value": num(h, k),
                        "noises": t.count_class(al, EdgeClass::Minus),
                        "symmetry": t.symmetry().to_string(),
                        "negative_forests": negative_forests(al, t).len(),
                    })
                })
                .collect();
            Ok(pretty(&json!({ "model": p.config.name, "count": trees.len(), "trees": rows })))
        }
        Format::Dot => {
            let mut s = String::new();
            for (i, t) in trees.iter().enumerate() {
                let depth = divergence_depth(al, t);
                let labels: Vec<String> = depth.iter().map(|d| d.to_string()).collect();
                s.push_str(&t.to_dot(al, &format!("negative_{i}: {}", t.format(al)), Some(&labels), Some(&depth)));
            }
            Ok(s)
        }
        Format::Csv => Err(unsupported("negatives", format)),
    }
}

/// `renorm`: the renormalised right-hand sides.
pub fn cmd_renorm(p: &Problem, format: Format) -> Result<String> {
    let al = &p.alphabet;
    let spec = p
        .spec
        .as_ref()
        .ok_or_else(|| Error::Precondition("renorm needs an equation, not a bare rule table".into()))?;
    p.check_rule()?;
    let constants = p.constants()?;
    let negatives: BTreeSet<String> = p.negative_trees()?.iter().map(|t| t.code()).collect();
    for (t, _) in &constants {
        if !negatives.contains(&t.code()) {
            return Err(Error::Invalid(format!(
                "constant declared on {} which is not a counterterm-relevant negative tree",
                t.format(al)
            )));
        }
    }
    let eq = renormalized_equation(spec, al, &constants)?;
    match format {
        Format::Text => {
            let mut s = format!("# renormalised equation for model {}\n", p.config.name);
            for (label, poly) in &eq.components {
                let _ = writeln!(s, "F^{label} = {poly}");
            }
            for c in &eq.contributions {
                let _ = write!(s, "#   {} on {} (g = {}): {}", c.component, c.tree, c.value, c.term);
                if let Some(r) = &c.zero_reason {
                    let _ = write!(s, "  [{r}]");
                }
                s.push('\n');
            }
            Ok(s)
        }
        Format::Json => {
            let comps: Vec<Value> = eq
                .components
                .iter()
                .map(|(l, poly)| {
                    let terms: Vec<Value> =
                        poly.term_list().into_iter().map(|(c, m)| json!({ "monomial": m, "coefficient": c })).collect();
                    json!({ "component": l, "rhs": poly.to_string(), "terms": terms })
                })
                .collect();
            let contribs: Vec<Value> = eq
                .contributions
                .iter()
                .map(|c| {
                    json!({
                        "component": c.component,
                        "tree": c.tree,
                        "value": c.value.to_string(),
                        "operator": c.operator.to_string(),
                        "term": c.term.to_string(),
                        "zero_reason": c.zero_reason,
                    })
                })
                .collect();
            Ok(pretty(&json!({ "model": p.config.name, "components": comps, "contributions": contribs })))
        }
        _ => Err(unsupported("renorm", format)),
    }
}

fn model_dim(model: &str) -> Result<usize> {
    match model {
        "pam" => Ok(2),
        "phi4" => Ok(3),
        "phi34" => Ok(4),
        _ => Err(Error::Unknown(format!("counterterm model '{model}'"))),
    }
}

/// Dyadic decomposition check of the truncated heat kernel of a model.
pub fn kernel_dyadic_report(model: &str) -> Result<counterterms::DyadicReport> {
    let dim = model_dim(model)?;
    let spec = KernelSpec::new(dim);
    let kernel = move |t: f64, x: &[f64]| zbar(t, x, &spec);
    Ok(dyadic_decompose(&kernel, dim, spec.scaling() as f64, dim as f64, 6))
}

fn fit_lines(sweeps: &[ConstantSweep]) -> Vec<String> {
    sweeps
        .iter()
        .map(|c| match &c.fit {
            Some(f) => format!(
                "fit {}: model={} a={:.6e} b={:.6e}{} residual={:.3e} (log {:.3e}, power {:.3e}) expected={} positive={} monotone={}",
                c.name,
                f.model,
                f.best.a,
                f.best.b,
                f.best.p.map(|p| format!(" p={p:.4}")).unwrap_or_default(),
                f.best.residual,
                f.log.residual,
                f.power.residual,
                c.diagram.expected_model().map(|m| m.to_string()).unwrap_or_else(|| "convergent".into()),
                c.positive(),
                c.monotone()
            ),
            None => format!("fit {}: fewer than 4 samples", c.name),
        })
        .collect()
}

/// `counterterms`: ε-sweep with fits and the kernel decomposition check.
pub fn cmd_counterterms(p: &Problem, eps_grid: Option<&str>, resolution: Option<usize>, format: Format) -> Result<String> {
    let cfg = p
        .config
        .counterterms
        .as_ref()
        .ok_or_else(|| Error::Precondition("config has no [counterterms] section".into()))?;
    let exps = match eps_grid {
        Some(g) => counterterms::parse_eps_grid(g)?,
        None => cfg.eps_exponents.clone(),
    };
    let res = Resolution::new(resolution.unwrap_or(cfg.resolution));
    let sweeps = counterterms::sweep(&cfg.model, &exps, res)?;
    let dyadic = kernel_dyadic_report(&cfg.model)?;
    match format {
        Format::Csv => {
            let mut s = counterterms::sweep_csv(&cfg.model, &sweeps);
            for l in fit_lines(&sweeps) {
                let _ = writeln!(s, "# {l}");
            }
            let _ = writeln!(s, "# dyadic kernel check: bound={:.4e} growth={:.4} flagged={}", dyadic.bound, dyadic.growth, dyadic.flagged);
            Ok(s)
        }
        Format::Text => {
            let mut s = format!("# counterterms of model {} ({}), resolution {}\n", p.config.name, cfg.model, res.level);
            for c in &sweeps {
                let _ = writeln!(s, "{} (degree {}):", c.name, c.diagram.degree());
                for (e, v) in &c.samples {
                    let _ = writeln!(s, "  eps={e:.6e} value={:.10e} ± {:.2e}", v.value, v.error);
                }
            }
            for l in fit_lines(&sweeps) {
                s.push_str(&l);
                s.push('\n');
            }
            let _ = writeln!(s, "dyadic kernel check: bound={:.4e} growth={:.4} flagged={}", dyadic.bound, dyadic.growth, dyadic.flagged);
            Ok(s)
        }
        Format::Json => Ok(pretty(&json!({
            "model": cfg.model,
            "resolution": res.level,
            "constants": sweeps,
            "dyadic": dyadic,
        }))),
        Format::Dot => Err(unsupported("counterterms", format)),
    }
}

/// `graphcheck`: exits with a dedicated code when a condition fails.
pub fn cmd_graphcheck(g: &LabelledGraph, kappa: &Option<String>, format: Format) -> Result<Outcome> {
    let k = kappa_value(kappa, "1/100")?;
    let r = check_assumptions(g);
    let code = if r.passed { exit::OK } else { exit::GRAPH_CHECK_FAILED };
    let stdout = match format {
        Format::Text => {
            let mut s = format!("graph {}: {}\n", g.name, if r.passed { "PASS" } else { "FAIL" });
            let _ = writeln!(s, "subsets checked: {}", r.subsets_checked);
            for (i, m) in r.min_slack.iter().enumerate() {
                match m {
                    Some(h) => {
                        let _ = writeln!(s, "condition {}: min slack {} ({:.4} at κ = {k})", i + 1, h, num(*h, k));
                    }
                    None => {
                        let _ = writeln!(s, "condition {}: vacuous", i + 1);
                    }
                }
            }
            if let Some(v) = &r.violation {
                let _ = writeln!(
                    s,
                    "violation: condition {} on {{{}}}: lhs {} rhs {} slack {}",
                    v.condition,
                    v.subset.join(", "),
                    v.lhs,
                    v.rhs,
                    v.slack
                );
            }
            let _ = writeln!(s, "alpha_tilde: {} ({:.4} at κ = {k})", r.alpha_tilde, num(r.alpha_tilde, k));
            s
        }
        Format::Json => {
            let mut v = serde_json::to_value(&r).expect("report serialises");
            v["name"] = json!(g.name);
            v["kappa"] = json!(k.to_string());
            v["alpha_tilde_value"] = json!(num(r.alpha_tilde, k));
            pretty(&v)
        }
        _ => return Err(unsupported("graphcheck", format)),
    };
    Ok(Outcome { stdout, code })
}

/// Bundled example models.
pub const FIXTURES: [(&str, &str); 3] = [
    ("gpam", include_str!("../fixtures/gpam.toml")),
    ("phi43", include_str!("../fixtures/phi43.toml")),
    ("phi34", include_str!("../fixtures/phi34.toml")),
];

/// One self-test line.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
    Check { name: name.into(), passed, detail: detail.into() }
}

/// Group axioms of the character group on random characters.
pub fn group_axiom_checks(u: &Universe, seed: u64, trials: usize) -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = Character::unit();
    let mut failures = 0;
    for _ in 0..trials {
        let f = u.random_character(&mut rng, 0.7);
        let g = u.random_character(&mut rng, 0.7);
        let h = u.random_character(&mut rng, 0.7);
        let assoc = u.agree(&u.star(&u.star(&f, &g), &h), &u.star(&f, &u.star(&g, &h)));
        let unit = u.agree(&u.star(&f, &e), &f) && u.agree(&u.star(&e, &f), &f);
        let inv = u.inverse(&f);
        let inverse = u.agree(&u.star(&f, &inv), &e) && u.agree(&u.star(&inv, &f), &e);
        if !(assoc && unit && inverse) {
            failures += 1;
        }
    }
    (trials, failures)
}

fn selftest_model(name: &str, src: &str, seed: u64, trials: usize) -> Result<Vec<Check>> {
    let p = Problem::from_toml(src)?;
    p.check_rule()?;
    let mut out = Vec::new();
    let rhs = p.rhs_trees(None)?.len();
    let sol = p.solution_trees(None)?.len();
    let neg = p.negative_trees()?;
    let expected: (Option<usize>, Option<usize>, usize) = match name {
        "gpam" => (Some(4), None, 2),
        "phi43" => (Some(8), Some(4), 3),
        _ => (Some(9), Some(5), 4),
    };
    if let Some(n) = expected.0 {
        out.push(check(format!("{name}: rhs tree count"), rhs == n, format!("{rhs} (expected {n})")));
    }
    if let Some(n) = expected.1 {
        out.push(check(format!("{name}: solution tree count"), sol == n, format!("{sol} (expected {n})")));
    }
    out.push(check(
        format!("{name}: negative tree count"),
        neg.len() == expected.2,
        format!("{} (expected {})", neg.len(), expected.2),
    ));
    let u = Universe::new(&p.alphabet, &neg);
    let (n, failures) = group_axiom_checks(&u, seed, trials);
    out.push(check(
        format!("{name}: group axioms"),
        failures == 0,
        format!("{n} random triples on {} trees / {} keys, {failures} failures", u.len(), u.num_keys()),
    ));
    let rt = crate::config::Config::from_toml(&p.config.to_toml()?)? == p.config;
    out.push(check(format!("{name}: config round trip"), rt, ""));
    Ok(out)
}

/// `selftest`: bundled-model checks; exits with a dedicated code on failure.
pub fn cmd_selftest(seed: u64, trials: usize, format: Format) -> Result<Outcome> {
    let mut checks = Vec::new();
    for (name, src) in FIXTURES {
        match selftest_model(name, src, seed, trials) {
            Ok(c) => checks.extend(c),
            Err(e) => checks.push(check(format!("{name}: load"), false, e.to_string())),
        }
    }
    let passed = checks.iter().all(|c| c.passed);
    let code = if passed { exit::OK } else { exit::SELFTEST_FAILED };
    let stdout = match format {
        Format::Text => {
            let mut s = String::new();
            for c in &checks {
                let _ = writeln!(s, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            let _ = writeln!(s, "{}", if passed { "selftest passed" } else { "selftest FAILED" });
            s
        }
        Format::Json => pretty(&json!({ "passed": passed, "seed": seed, "checks": checks })),
        _ => return Err(unsupported("selftest", format)),
    };
    Ok(Outcome { stdout, code })
}

/// Configure the global worker pool from `RENORMALIST_THREADS`.
pub fn configure_threads(value: Option<&str>) -> std::result::Result<(), String> {
    let Some(v) = value else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got '{v}'"))?;
    // a pool may already exist when called repeatedly in one process
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Full entry point: parse arguments, run, and return (stdout, stderr, code).
pub fn main_with_args<I, T>(args: I) -> (String, String, i32)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => (e.to_string(), String::new(), exit::OK),
                _ => (String::new(), error_json("usage", e.to_string().trim()), exit::USAGE),
            };
        }
    };
    if let Err(m) = configure_threads(std::env::var(THREADS_ENV).ok().as_deref()) {
        return (String::new(), error_json("usage", &m), exit::USAGE);
    }
    match run(&cli) {
        Ok(o) => (o.stdout, String::new(), o.code),
        Err(e) => (String::new(), error_json(e.class(), &e.to_string()), exit_code(&e)),
    }
}
