//! Acceptance suite: one PASS/FAIL line per criterion, with details.
//!
//! Runs as a plain binary (no libtest harness) so that the report is always
//! printed. The process exits with status 1 when any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use renormalist::config::Problem;
use renormalist::counterterms::{sweep, ConstantSweep, DivergenceModel, Resolution};
use renormalist::graph_power::{check_assumptions, LabelledGraph};
use renormalist::renorm_eq::renormalized_equation;
use renormalist::renorm_group::{Character, Universe};
use renormalist::rules::{Alphabet, EdgeId};
use renormalist::subforests::{negative_forests, positive_cuts};
use renormalist::symbolic::Poly;
use renormalist::trees::{second_homogeneity, TypedTree};
use renormalist::{Grade, Homogeneity};

/// Wall-clock budget per fixture for tree generation.
const TREE_BUDGET: Duration = Duration::from_secs(1);
/// Wall-clock budget for the group-axiom suite.
const GROUP_BUDGET: Duration = Duration::from_secs(60);
/// Wall-clock budget for the counterterm numerics.
const NUMERICS_BUDGET: Duration = Duration::from_secs(600);
/// Random characters in the group-axiom suite (in total over all universes).
const RANDOM_CHARACTERS: usize = 100;
/// Random trees (per fixture alphabet) in the oracle-equivalence suite.
const RANDOM_TREES: usize = 50;
/// Largest tree enumerated exhaustively in the oracle-equivalence suite.
const EXHAUSTIVE_EDGES: usize = 6;
/// Largest random tree.
const RANDOM_EDGES: usize = 8;
/// Largest admissible relative RMS residual of a divergence fit.
const FIT_RESIDUAL_TOL: f64 = 0.02;
/// Exponents k of the ε-grid ε = 2^{-k}.
const EPS_EXPONENTS: [u32; 6] = [3, 4, 5, 6, 7, 8];
/// The two quadrature resolutions compared; they share no Gauss–Legendre
/// order, so neither error estimate is built from the other's value.
const RESOLUTIONS: [usize; 2] = [1, 3];
/// Values of δ₀ at which the second homogeneity is compared.
const DELTA0S: [&str; 3] = ["1", "10", "100"];
/// Lower bound ‖T‖ must exceed at the largest δ₀.
const NORM_GROWTH_BOUND: &str = "50";

struct Outcome {
    passed: bool,
    details: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { passed: true, details: Vec::new() }
    }

    fn check(&mut self, ok: bool, line: impl Into<String>) {
        self.passed &= ok;
        let tag = if ok { "ok  " } else { "FAIL" };
        self.details.push(format!("{tag} {}", line.into()));
    }

    fn note(&mut self, line: impl Into<String>) {
        self.details.push(format!("     {}", line.into()));
    }
}

fn codes(trees: &[TypedTree]) -> BTreeSet<String> {
    trees.iter().map(|t| t.code()).collect()
}

fn expected_codes(p: &Problem, trees: &[&str]) -> BTreeSet<String> {
    trees.iter().map(|s| tree(p, s).code()).collect()
}

// Expected tree sets, written in bracket notation. Every noise carries its
// zero jet, `d2`/`d3` mark the polynomial nonlinearity and `dI` the
// solution jet.

const GPAM_RHS: [&str; 4] = [
    "[Xi,df0]",                    // δ^{f,0} Ξ
    "[I[Xi,df0],Xi,df1]",          // δ^{f,1} Ξ I[Ξ]
    "[Xi,dI,df1]",                 // δ^{f,1} δ^I Ξ
    "[DI[Xi,df0],DI[Xi,df0],dA0]", // δ^{A,0} (∇I[Ξ])²
];
const GPAM_NEG: [&str; 2] = ["[I[Xi],Xi]", "[DI[Xi],DI[Xi]]"];

const PHI43_SOL: [&str; 4] = [
    "[dI]",
    "[I[Xi,dXi]]",
    "[I[I[Xi,dXi],I[Xi,dXi],I[Xi,dXi],d3]]",
    "[I[I[Xi,dXi],I[Xi,dXi],d3,dI]]",
];
const PHI43_RHS: [&str; 8] = [
    "[Xi,dXi]",
    "[I[Xi,dXi],I[Xi,dXi],I[Xi,dXi],d3]",                                 // ⟨3⟩
    "[I[Xi,dXi],I[Xi,dXi],d3,dI]",                                        // ⟨3'⟩
    "[I[Xi,dXi],d3,dI,dI]",                                               // ⟨3''⟩
    "[d3,dI,dI,dI]",                                                      // ⟨3'''⟩
    "[I[I[Xi,dXi],I[Xi,dXi],I[Xi,dXi],d3],I[Xi,dXi],I[Xi,dXi],d3]",       // ⟨32⟩
    "[I[I[Xi,dXi],I[Xi,dXi],d3,dI],I[Xi,dXi],I[Xi,dXi],d3]",              // ⟨3'2⟩
    "[I[I[Xi,dXi],I[Xi,dXi],I[Xi,dXi],d3],I[Xi,dXi],d3,dI]",              // ⟨32'⟩
];

const PHI34_SOL: [&str; 5] = [
    "[I[Xi,dXi]]",
    "[I[I[Xi,dXi],I[Xi,dXi],d2]]",
    "[I[I[I[Xi,dXi],I[Xi,dXi],d2],I[Xi,dXi],d2]]",
    "[dI]",
    "[I[I[Xi,dXi],d2,dI]]",
];
const PHI34_RHS: [&str; 9] = [
    "[Xi,dXi]",
    "[I[Xi,dXi],I[Xi,dXi],d2]",                                    // ⟨2⟩
    "[I[I[Xi,dXi],I[Xi,dXi],d2],I[Xi,dXi],d2]",                    // ⟨21⟩
    "[I[I[I[Xi,dXi],I[Xi,dXi],d2],I[Xi,dXi],d2],I[Xi,dXi],d2]",    // ⟨211⟩
    "[I[I[Xi,dXi],I[Xi,dXi],d2],I[I[Xi,dXi],I[Xi,dXi],d2],d2]",    // ⟨22j⟩
    "[I[Xi,dXi],d2,dI]",                                           // ⟨2'⟩
    "[d2,dI,dI]",                                                  // ⟨2''⟩
    "[I[I[Xi,dXi],d2,dI],I[Xi,dXi],d2]",                           // ⟨2'1⟩
    "[I[I[Xi,dXi],I[Xi,dXi],d2],d2,dI]",                           // ⟨21'⟩
];
const PHI34_NEG: [&str; 4] = [
    "[I[Xi],I[Xi]]",                   // ⟨2⟩
    "[I[I[I[Xi],I[Xi]],I[Xi]],I[Xi]]", // ⟨211⟩
    "[I[I[Xi],I[Xi]],I[I[Xi],I[Xi]]]", // ⟨22j⟩
    "[I[I[Xi]],I[Xi]]",                // ⟨11⟩
];

fn compare_set(o: &mut Outcome, label: &str, got: &[TypedTree], p: &Problem, want: &[&str]) {
    let (g, w) = (codes(got), expected_codes(p, want));
    o.check(g == w && got.len() == want.len(), format!("{label}: {} trees (expected {})", got.len(), want.len()));
}

fn criterion_tree_sets() -> Outcome {
    let mut o = Outcome::new();
    for name in FIXTURES {
        let t0 = Instant::now();
        let p = fixture(name);
        let ok_rule = p.check_rule().is_ok();
        let rhs = p.rhs_trees(None).unwrap();
        let sol = p.solution_trees(None).unwrap();
        let neg = p.negative_trees().unwrap();
        let elapsed = t0.elapsed();
        o.check(ok_rule, format!("{name}: rule accepted"));
        match name {
            "gpam" => {
                compare_set(&mut o, "gpam 𝔗^r", &rhs, &p, &GPAM_RHS);
                compare_set(&mut o, "gpam 𝔗₋", &neg, &p, &GPAM_NEG);
            }
            "phi43" => {
                compare_set(&mut o, "phi43 𝔗^𝒥", &sol, &p, &PHI43_SOL);
                compare_set(&mut o, "phi43 𝔗^r", &rhs, &p, &PHI43_RHS);
            }
            _ => {
                compare_set(&mut o, "phi34 𝔗^𝒥", &sol, &p, &PHI34_SOL);
                compare_set(&mut o, "phi34 𝔗^r", &rhs, &p, &PHI34_RHS);
                compare_set(&mut o, "phi34 negatives", &neg, &p, &PHI34_NEG);
            }
        }
        o.check(elapsed < TREE_BUDGET, format!("{name}: generated in {:.3} s (budget {:?})", elapsed.as_secs_f64(), TREE_BUDGET));
    }
    o
}

fn criterion_coefficients() -> Outcome {
    let mut o = Outcome::new();
    // (fixture, full renormalised right-hand side, counterterm part alone)
    let cases = [
        ("gpam", "A*Du^2 + f(u)*xi - C*f'(u)*f(u) - C'*f(u)^2*trA", "-C*f'(u)*f(u) - C'*f(u)^2*trA"),
        ("phi43", "-u^3 + xi + 3*C*u - 9*C'*u", "3*C*u - 9*C'*u"),
        ("phi34", "u^2 + xi - C1 - C2*s - 4*C11*u - 4*C211 - C22j", "-C1 - C2*s - 4*C11*u - 4*C211 - C22j"),
    ];
    for (name, full, counter) in cases {
        let p = fixture(name);
        let spec = p.spec.as_ref().unwrap();
        let vars = spec.vars();
        let eq = renormalized_equation(spec, &p.alphabet, &p.constants().unwrap()).unwrap();
        let got = &eq.components[0].1;
        let bare = spec.rhs("u").unwrap();
        let want_full = Poly::parse(full, &vars).unwrap();
        let want_counter = Poly::parse(counter, &vars).unwrap();
        o.check(*got == want_full, format!("{name}: F = {got}"));
        o.check(&(got - &bare) == &want_counter, format!("{name}: counterterms {}", got - &bare));
    }
    o
}

/// Random negative trees of at most `RANDOM_EDGES` edges that are the
/// minimal subtree spanned by their noises.
fn random_negative_seeds(rng: &mut ChaCha8Rng, al: &Alphabet, tys: &[EdgeId], want: usize) -> Vec<TypedTree> {
    let mut seeds = Vec::new();
    for _ in 0..200_000 {
        if seeds.len() == want {
            break;
        }
        let n = rng.gen_range(2..=RANDOM_EDGES);
        let t = random_tree(rng, al, tys, n);
        let all: BTreeSet<usize> = t.edges().collect();
        let noises: BTreeSet<usize> = noise_edges(al, &t).into_iter().collect();
        if t.homogeneity(al).is_negative()
            && oracle_minimal_subtree(&t, &noises) == all
            && !seeds.iter().any(|s: &TypedTree| s.code() == t.code())
        {
            seeds.push(t);
        }
    }
    seeds
}

fn criterion_group_axioms() -> Outcome {
    let mut o = Outcome::new();
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let setups = [("gpam", &["I", "DI", "Xi"][..]), ("phi43", &["I", "Xi"][..]), ("phi34", &["I", "Xi"][..])];
    let per = RANDOM_CHARACTERS.div_ceil(setups.len());
    let mut total = 0;
    for (name, names) in setups {
        let p = fixture(name);
        let al = &p.alphabet;
        let mut trees = p.negative_trees().unwrap();
        let extra = random_negative_seeds(&mut rng, al, &types(al, names), 4);
        let n_extra = extra.len();
        trees.extend(extra);
        let u = Universe::new(al, &trees);
        let e = Character::unit();
        let mut fails = [0usize; 3];
        for _ in 0..per {
            let f = u.random_character(&mut rng, 0.7);
            let g = u.random_character(&mut rng, 0.7);
            let h = u.random_character(&mut rng, 0.7);
            if !u.agree(&u.star(&u.star(&f, &g), &h), &u.star(&f, &u.star(&g, &h))) {
                fails[0] += 1;
            }
            if !(u.agree(&u.star(&f, &e), &f) && u.agree(&u.star(&e, &f), &f)) {
                fails[1] += 1;
            }
            let inv = u.inverse(&f);
            if !(u.agree(&u.star(&f, &inv), &e) && u.agree(&u.star(&inv, &f), &e)) {
                fails[2] += 1;
            }
        }
        total += per;
        o.check(
            fails == [0, 0, 0] && n_extra > 0,
            format!(
                "{name}: {per} characters on {} trees ({n_extra} random) / {} keys; failures assoc {} unit {} inverse {}",
                u.len(),
                u.num_keys(),
                fails[0],
                fails[1],
                fails[2]
            ),
        );
    }
    let elapsed = t0.elapsed();
    o.check(total >= RANDOM_CHARACTERS, format!("{total} random characters in total"));
    o.check(elapsed < GROUP_BUDGET, format!("{:.2} s (budget {:?})", elapsed.as_secs_f64(), GROUP_BUDGET));
    o
}

/// First disagreement between the library and the brute-force oracles.
fn oracle_mismatch(al: &Alphabet, t: &TypedTree, delta0: Homogeneity) -> Option<&'static str> {
    let forests: BTreeSet<Vec<BTreeSet<usize>>> = negative_forests(al, t).into_iter().map(|f| f.parts).collect();
    if forests != oracle_negative_forests(al, t) {
        return Some("𝔉⁻");
    }
    let cuts: BTreeSet<BTreeSet<usize>> = positive_cuts(al, t).into_iter().collect();
    if cuts != oracle_positive_cuts(al, t) {
        return Some("𝔉⁺");
    }
    if t.symmetry() != oracle_symmetry(t) {
        return Some("S");
    }
    if t.plane_count() != oracle_plane_count(t) as u128 {
        return Some("plane_count");
    }
    if second_homogeneity(al, t, delta0) != oracle_norm(al, t, delta0) {
        return Some("‖·‖");
    }
    None
}

fn criterion_oracles() -> Outcome {
    let mut o = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let setups = [
        ("phi43", &["I", "Xi", "dI", "dXi", "d3"][..]),
        ("phi34", &["I", "Xi", "dI", "d2"][..]),
        ("gpam", &["I", "DI", "Xi", "df0", "df1", "dA0"][..]),
    ];
    for (name, names) in setups {
        let p = fixture(name);
        let al = &p.alphabet;
        let delta0 = p.config.cutoffs.delta0;
        let tys = types(al, names);
        // exhaustive enumeration over the first four types keeps the count
        // in the low thousands
        let small = all_trees(al, &tys[..4], EXHAUSTIVE_EDGES);
        let bad: Vec<(String, &str)> =
            small.iter().filter_map(|t| oracle_mismatch(al, t, delta0).map(|w| (t.format(al), w))).collect();
        o.check(
            bad.is_empty(),
            format!("{name}: all {} trees ≤ {EXHAUSTIVE_EDGES} edges over {:?}{}", small.len(), &names[..4], first(&bad)),
        );
        let random: Vec<TypedTree> =
            (0..RANDOM_TREES)
                .map(|_| {
                    let n = rng.gen_range(1..=RANDOM_EDGES);
                    random_tree(&mut rng, al, &tys, n)
                })
                .collect();
        let bad: Vec<(String, &str)> =
            random.iter().filter_map(|t| oracle_mismatch(al, t, delta0).map(|w| (t.format(al), w))).collect();
        o.check(bad.is_empty(), format!("{name}: {RANDOM_TREES} random trees ≤ {RANDOM_EDGES} edges{}", first(&bad)));
    }
    o
}

fn first(bad: &[(String, &str)]) -> String {
    match bad.first() {
        Some((t, what)) => format!("; {} mismatches, first {what} on {t}", bad.len()),
        None => String::new(),
    }
}

fn criterion_subcriticality() -> Outcome {
    let mut o = Outcome::new();
    for name in FIXTURES {
        let p = fixture(name);
        let sub = p.subcriticality().unwrap();
        o.check(sub.reg.is_some() && p.check_rule().is_ok(), format!("{name}: accepted after {} steps", sub.steps));
    }
    let src = std::fs::read_to_string(fixture_path("gpam")).unwrap();
    let rough = src.replace("degree = \"-1-kappa\"", "degree = \"-3\"");
    let p = Problem::from_toml(&rough).unwrap();
    let sub = p.subcriticality().unwrap();
    o.check(
        rough != src && sub.reg.is_none() && p.check_rule().is_err(),
        format!("gpam with |Ξ| = -3: rejected after {} steps", sub.steps),
    );
    o
}

fn criterion_counterterms() -> Outcome {
    let mut o = Outcome::new();
    let t0 = Instant::now();
    for model in ["pam", "phi4", "phi34"] {
        let runs: Vec<Vec<ConstantSweep>> =
            RESOLUTIONS.iter().map(|&l| sweep(model, &EPS_EXPONENTS, Resolution::new(l)).unwrap()).collect();
        let (lo, hi) = (&runs[0], &runs[1]);
        for (a, b) in lo.iter().zip(hi) {
            let label = format!("{model} {}", a.name);
            o.check(a.positive() && b.positive(), format!("{label}: positive"));
            o.check(a.monotone() && b.monotone(), format!("{label}: monotone in ε"));
            let fit = b.fit.expect("six samples are fitted");
            let expected = b.diagram.expected_model();
            o.check(
                Some(fit.model) == expected,
                format!(
                    "{label}: fit selects {:?}{} (power counting: {:?}, degree {})",
                    fit.model,
                    match fit.model {
                        DivergenceModel::Power => format!(" p = {:.3}", fit.best.p.unwrap_or(f64::NAN)),
                        DivergenceModel::Log => String::new(),
                    },
                    expected,
                    b.diagram.degree()
                ),
            );
            o.check(
                fit.best.residual < FIT_RESIDUAL_TOL,
                format!(
                    "{label}: residual {:.3e} (log {:.3e}, power {:.3e}; tolerance {FIT_RESIDUAL_TOL})",
                    fit.best.residual, fit.log.residual, fit.power.residual
                ),
            );
            let worst = a
                .samples
                .iter()
                .zip(&b.samples)
                .map(|((_, x), (_, y))| (x.value - y.value).abs() / (x.error + y.error))
                .fold(0.0f64, f64::max);
            o.check(
                worst <= 1.0,
                format!("{label}: resolutions {:?} agree, max |Δ|/(err₁+err₂) = {worst:.3}", RESOLUTIONS),
            );
        }
        o.note(format!("{model}: done at {:.1} s", t0.elapsed().as_secs_f64()));
    }
    let elapsed = t0.elapsed();
    o.check(elapsed < NUMERICS_BUDGET, format!("total {:.1} s (budget {:?})", elapsed.as_secs_f64(), NUMERICS_BUDGET));
    o
}

fn criterion_second_homogeneity() -> Outcome {
    let mut o = Outcome::new();
    let bound = Grade::Finite(h(NORM_GROWTH_BOUND));
    for name in FIXTURES {
        let p = fixture(name);
        let al = &p.alphabet;
        let mut trees = p.rhs_trees(None).unwrap();
        trees.extend(p.solution_trees(None).unwrap());
        let bad: Vec<String> = trees
            .iter()
            .filter(|t| {
                let v: Vec<Grade> = DELTA0S.iter().map(|d| second_homogeneity(al, t, h(d))).collect();
                !(v.windows(2).all(|w| w[0] <= w[1]) && v[2] > bound)
            })
            .map(|t| t.format(al))
            .collect();
        o.check(
            bad.is_empty(),
            format!(
                "{name}: {} trees of 𝔗^r ∪ 𝔗^𝒥 nondecreasing over δ₀ ∈ {DELTA0S:?} and > {NORM_GROWTH_BOUND} at δ₀ = 100{}",
                trees.len(),
                if bad.is_empty() { String::new() } else { format!("; failing {bad:?}") }
            ),
        );
        // jet-free negative trees decompose as themselves with empty
        // branches, so their value is |τ| for every δ₀
        let constant = p
            .negative_trees()
            .unwrap()
            .iter()
            .filter(|t| DELTA0S.iter().all(|d| second_homogeneity(al, t, h(d)) == Grade::Finite(t.homogeneity(al))))
            .count();
        o.note(format!("{name}: {constant} negative trees have ‖τ‖ = |τ| independently of δ₀"));
    }
    o
}

fn criterion_graphs() -> Outcome {
    let mut o = Outcome::new();
    for name in ["gpam", "phi43", "phi34"] {
        let g = LabelledGraph::load(&graph_path(name)).unwrap();
        let r = check_assumptions(&g);
        o.check(
            r.passed && r.alpha_tilde.is_positive(),
            format!("{name}: passed = {}, α̃ = {} ({} subsets)", r.passed, r.alpha_tilde, r.subsets_checked),
        );
    }
    let g = LabelledGraph::load(&graph_path("violation")).unwrap();
    let r = check_assumptions(&g);
    let ok = !r.passed
        && r.violation.as_ref().is_some_and(|v| v.condition == 1 && v.subset == ["u".to_string(), "v".to_string()]);
    o.check(
        ok,
        match &r.violation {
            Some(v) => format!("violation: fails condition {} on {:?} (lhs {}, rhs {})", v.condition, v.subset, v.lhs, v.rhs),
            None => "violation: unexpectedly passed".into(),
        },
    );
    o
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("tree-set reproduction", criterion_tree_sets),
        ("renormalised-equation coefficients", criterion_coefficients),
        ("group axioms", criterion_group_axioms),
        ("oracle equivalence", criterion_oracles),
        ("subcriticality discrimination", criterion_subcriticality),
        ("counterterm numerics", criterion_counterterms),
        ("second-homogeneity growth", criterion_second_homogeneity),
        ("graph checker", criterion_graphs),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome { passed: false, details: vec![format!("FAIL panicked: {msg}")] }
        });
        let tag = if outcome.passed { "PASS" } else { "FAIL" };
        println!("{tag} criterion {}: {name} ({:.2} s)", i + 1, t0.elapsed().as_secs_f64());
        for d in &outcome.details {
            println!("     {d}");
        }
        failed += usize::from(!outcome.passed);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
