//! Versioned TOML configuration: either an equation spec (components,
//! kernels, noises, jets) or an explicit rule table, plus cutoffs,
//! renormalisation constants and counterterm settings.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homogeneity::{parse_rational, Homogeneity};
use crate::renorm_eq::{Component, Contraction, EquationSpec, FunctionDecl, JetSpec, KernelSlot, NoiseSlot};
use crate::rules::{
    is_equation_like, is_subcritical, normalize_rule, red_star, spde_to_rule, Alphabet, EdgeClass, EdgeId,
    EdgeIndex, EdgeType, Labels, MultiIndex, Rule, SubcriticalOptions, Subcriticality,
};
use crate::subforests;
use crate::symbolic::Poly;
use crate::trees::{generate_planted, generate_trees, GenOptions, Target, TypedTree};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    /// Concrete κ used for numeric export only.
    #[serde(default = "default_kappa")]
    pub kappa: String,
    pub cutoffs: Cutoffs,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub components: Vec<ComponentCfg>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub functions: Vec<FunctionCfg>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub kernels: Vec<KernelCfg>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub noises: Vec<NoiseCfg>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub jets: Vec<JetCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule_table: Option<RuleTableCfg>,
    #[serde(default)]
    pub renorm: RenormCfg,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterterms: Option<CountertermCfg>,
    #[serde(default)]
    pub limits: LimitsCfg,
}

fn default_kappa() -> String {
    "1/100".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cutoffs {
    /// Kernel edge whose solution sector `{ι(o)} ∪ I_o(·)` is enumerated.
    pub solution_edge: String,
    /// Cutoff for the solution sector 𝔗^𝒥.
    pub gamma_solution: Homogeneity,
    /// Cutoff for the right-hand-side sector 𝔗^r.
    pub gamma_rhs: Homogeneity,
    pub delta0: Homogeneity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentCfg {
    pub label: String,
    /// Right-hand side as a list of terms (summed).
    pub rhs: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionCfg {
    pub name: String,
    pub arg: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelCfg {
    pub edge: String,
    pub component: String,
    pub var: String,
    pub degree: Homogeneity,
    pub iota: String,
    #[serde(default)]
    pub iota_weight: Homogeneity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseCfg {
    pub edge: String,
    pub var: String,
    pub degree: Homogeneity,
    #[serde(default = "one")]
    pub multilinearity: u32,
}

fn one() -> u32 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JetCfg {
    pub edge: String,
    pub component: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub term: Option<usize>,
    pub slots: Vec<String>,
    #[serde(default)]
    pub weight: Homogeneity,
}

/// Explicit alphabet and rule, as an alternative to an equation spec.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleTableCfg {
    /// Label pairs `[label, dual]`.
    pub labels: Vec<[String; 2]>,
    pub edges: Vec<EdgeCfg>,
    /// Kernel edge name → list of node types in bracket notation `[a,b]`.
    pub rules: BTreeMap<String, Vec<String>>,
    #[serde(default = "yes")]
    pub normalize: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeCfg {
    pub name: String,
    /// `plus`, `zero` or `minus`.
    pub class: String,
    pub degree: Homogeneity,
    /// Plus: `[upper, lower]`; Minus: `[label]`; Zero: signed counts `label:count`.
    pub index: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iota: Option<String>,
    #[serde(default)]
    pub gen_weight: Homogeneity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RenormCfg {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub contractions: Vec<ContractionCfg>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constants: Vec<ConstantCfg>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractionCfg {
    pub a: String,
    pub b: String,
    pub result: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantCfg {
    /// Negative tree in bracket notation.
    pub tree: String,
    /// Character value (polynomial in named constants).
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountertermCfg {
    /// `pam`, `phi4` or `phi34`.
    pub model: String,
    /// ε = 2^{-k} for the listed k.
    #[serde(default = "default_eps")]
    pub eps_exponents: Vec<u32>,
    /// Quadrature resolution multiplier (the check run uses half of it).
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    /// Radius r̄ of the spatial cut-off ball.
    #[serde(default = "default_radius")]
    pub radius: f64,
}

fn default_eps() -> Vec<u32> {
    vec![3, 4, 5, 6, 7, 8]
}

fn default_resolution() -> usize {
    2
}

fn default_radius() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsCfg {
    #[serde(default = "default_max_trees")]
    pub max_trees: usize,
    #[serde(default = "default_floor")]
    pub subcritical_floor: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subcritical_steps: Option<usize>,
}

impl Default for LimitsCfg {
    fn default() -> Self {
        LimitsCfg { max_trees: default_max_trees(), subcritical_floor: default_floor(), subcritical_steps: None }
    }
}

fn default_max_trees() -> usize {
    200_000
}

fn default_floor() -> i64 {
    -1_000_000
}

impl Config {
    pub fn from_toml(s: &str) -> Result<Config> {
        let cfg: Config = toml::from_str(s).map_err(|e| Error::Parse(format!("config: {e}")))?;
        if cfg.version != CONFIG_VERSION {
            return Err(Error::Invalid(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                cfg.version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Config::from_toml(&s)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Invalid(format!("serialise config: {e}")))
    }

    pub fn kappa_value(&self) -> Result<f64> {
        use num_traits::ToPrimitive;
        Ok(parse_rational(&self.kappa)?.to_f64().unwrap_or(f64::NAN))
    }

    /// The equation spec, when the config declares one.
    pub fn equation_spec(&self) -> Result<Option<EquationSpec>> {
        if self.components.is_empty() {
            return Ok(None);
        }
        let vars: Vec<String> = self
            .kernels
            .iter()
            .map(|k| k.var.clone())
            .chain(self.noises.iter().map(|n| n.var.clone()))
            .collect();
        let components = self
            .components
            .iter()
            .map(|c| {
                Ok(Component {
                    label: c.label.clone(),
                    rhs: c.rhs.iter().map(|t| Poly::parse(t, &vars)).collect::<Result<Vec<_>>>()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Some(EquationSpec {
            components,
            kernels: self
                .kernels
                .iter()
                .map(|k| KernelSlot {
                    edge: k.edge.clone(),
                    component: k.component.clone(),
                    var: k.var.clone(),
                    degree: k.degree,
                    iota: k.iota.clone(),
                    iota_weight: k.iota_weight,
                })
                .collect(),
            noises: self
                .noises
                .iter()
                .map(|n| NoiseSlot {
                    edge: n.edge.clone(),
                    var: n.var.clone(),
                    degree: n.degree,
                    multilinearity: n.multilinearity,
                })
                .collect(),
            functions: self.functions.iter().map(|f| FunctionDecl { name: f.name.clone(), arg: f.arg.clone() }).collect(),
            jets: self
                .jets
                .iter()
                .map(|j| JetSpec {
                    edge: j.edge.clone(),
                    component: j.component.clone(),
                    term: j.term,
                    slots: j.slots.clone(),
                    weight: j.weight,
                })
                .collect(),
            contractions: self
                .renorm
                .contractions
                .iter()
                .map(|c| Contraction { a: c.a.clone(), b: c.b.clone(), result: c.result.clone() })
                .collect(),
        }))
    }
}

fn build_rule_table(t: &RuleTableCfg) -> Result<(Alphabet, Rule)> {
    let mut labels = Labels::new();
    for [a, b] in &t.labels {
        labels.add_pair(a, b)?;
    }
    let mut al = Alphabet::new(labels);
    for e in &t.edges {
        let class = match e.class.as_str() {
            "plus" => EdgeClass::Plus,
            "zero" => EdgeClass::Zero,
            "minus" => EdgeClass::Minus,
            other => return Err(Error::Invalid(format!("unknown edge class '{other}'"))),
        };
        let index = match class {
            EdgeClass::Plus => {
                if e.index.len() != 2 {
                    return Err(Error::Invalid(format!("kernel edge '{}' needs [upper, lower] labels", e.name)));
                }
                EdgeIndex::Plus { upper: al.labels.id(&e.index[0])?, lower: al.labels.id(&e.index[1])? }
            }
            EdgeClass::Minus => {
                if e.index.len() != 1 {
                    return Err(Error::Invalid(format!("noise edge '{}' needs one label", e.name)));
                }
                EdgeIndex::Minus(al.labels.id(&e.index[0])?)
            }
            EdgeClass::Zero => {
                let mut m = MultiIndex::new();
                for item in &e.index {
                    let (l, c) = match item.split_once(':') {
                        Some((l, c)) => (l.trim(), c.trim().parse::<i64>().map_err(|_| Error::Parse(format!("count in '{item}'")))?),
                        None => (item.trim(), 1),
                    };
                    m.add(al.labels.id(l)?, c);
                }
                EdgeIndex::Zero(red_star(&al.labels, &m)?)
            }
        };
        al.add_edge(EdgeType {
            name: e.name.clone(),
            class,
            degree: e.degree,
            index,
            iota: None,
            gen_weight: e.gen_weight,
            var: e.var.clone(),
        })?;
    }
    for e in &t.edges {
        if let Some(i) = &e.iota {
            let a = al.id(&e.name)?;
            let b = al.id(i)?;
            al.set_iota(a, b);
        }
    }
    al.validate()?;
    let mut rule = Rule::empty(&al);
    for (k, nus) in &t.rules {
        let kid = al.id(k)?;
        if al.class(kid) != EdgeClass::Plus {
            return Err(Error::Invalid(format!("rule entries are only allowed for kernel edges ('{k}')")));
        }
        for nu in nus {
            let tree = TypedTree::parse(&al, nu)?;
            if tree.children(0).iter().any(|&c| !tree.is_leaf(c)) {
                return Err(Error::Invalid(format!("node type '{nu}' must be flat")));
            }
            rule.insert(kid, tree.node_type_at(0));
        }
    }
    rule.validate(&al)?;
    let rule = if t.normalize { normalize_rule(&al, &rule)? } else { rule };
    Ok((al, rule))
}

/// A loaded problem: alphabet, normal rule and (optionally) equation spec.
#[derive(Clone, Debug)]
pub struct Problem {
    pub config: Config,
    pub alphabet: Alphabet,
    pub rule: Rule,
    pub spec: Option<EquationSpec>,
    pub solution_edge: EdgeId,
}

impl Problem {
    pub fn from_config(config: Config) -> Result<Problem> {
        let spec = config.equation_spec()?;
        let (alphabet, rule) = match (&spec, &config.rule_table) {
            (Some(_), Some(_)) => {
                return Err(Error::Invalid("declare either an equation or a rule_table, not both".into()))
            }
            (Some(s), None) => spde_to_rule(s)?,
            (None, Some(t)) => build_rule_table(t)?,
            (None, None) => return Err(Error::Invalid("config declares neither an equation nor a rule_table".into())),
        };
        let solution_edge = alphabet.id(&config.cutoffs.solution_edge)?;
        if alphabet.class(solution_edge) != EdgeClass::Plus {
            return Err(Error::Invalid("solution_edge must be a kernel edge".into()));
        }
        Ok(Problem { config, alphabet, rule, spec, solution_edge })
    }

    pub fn from_toml(s: &str) -> Result<Problem> {
        Problem::from_config(Config::from_toml(s)?)
    }

    pub fn load(path: &Path) -> Result<Problem> {
        Problem::from_config(Config::load(path)?)
    }

    pub fn gen_options(&self) -> GenOptions {
        GenOptions { max_trees: self.config.limits.max_trees, ..GenOptions::default() }
    }

    pub fn subcritical_options(&self) -> SubcriticalOptions {
        SubcriticalOptions {
            floor: Homogeneity::int(self.config.limits.subcritical_floor),
            max_steps: self.config.limits.subcritical_steps,
        }
    }

    pub fn subcriticality(&self) -> Result<Subcriticality> {
        is_subcritical(&self.alphabet, &self.rule, &self.subcritical_options())
    }

    /// Check that the rule is equation-like and subcritical.
    pub fn check_rule(&self) -> Result<()> {
        let el = is_equation_like(&self.alphabet, &self.rule);
        if !el.holds {
            let (e, nu) = el.witness.expect("witness");
            return Err(Error::Precondition(format!(
                "rule is not equation-like: R({}) ∋ {}",
                self.alphabet.name(e),
                crate::rules::render_node_type(&self.alphabet, &nu)
            )));
        }
        if self.subcriticality()?.reg.is_none() {
            return Err(Error::Precondition("rule is not subcritical".into()));
        }
        Ok(())
    }

    /// 𝔗^r: trees with root type in `R(solution edge)` below `gamma`.
    pub fn rhs_trees(&self, gamma: Option<Homogeneity>) -> Result<Vec<TypedTree>> {
        let g = gamma.unwrap_or(self.config.cutoffs.gamma_rhs);
        generate_trees(&self.alphabet, &self.rule, &Target::Edge(self.solution_edge), g, &self.gen_options())
    }

    /// 𝔗^𝒥: `{ι(o)} ∪ I_o(·)` below `gamma`.
    pub fn solution_trees(&self, gamma: Option<Homogeneity>) -> Result<Vec<TypedTree>> {
        let g = gamma.unwrap_or(self.config.cutoffs.gamma_solution);
        generate_planted(&self.alphabet, &self.rule, self.solution_edge, g, &self.gen_options())
    }

    /// Counterterm-relevant negative trees: canonical `T_E` over all
    /// generated trees with `|τ| < 0` and an even number of noises.
    pub fn negative_trees(&self) -> Result<Vec<TypedTree>> {
        let mut all = self.rhs_trees(None)?;
        all.extend(self.solution_trees(None)?);
        let mut seen: BTreeMap<String, TypedTree> = BTreeMap::new();
        for t in &all {
            for s in subforests::negative_subtrees(&self.alphabet, t) {
                let (tau, _) = t.extract(&s);
                let tau = tau.canonical();
                let noises = tau.count_class(&self.alphabet, EdgeClass::Minus);
                if tau.homogeneity(&self.alphabet).is_negative() && noises % 2 == 0 {
                    seen.entry(tau.code()).or_insert(tau);
                }
            }
        }
        let mut v: Vec<TypedTree> = seen.into_values().collect();
        v.sort_by(|a, b| (a.homogeneity(&self.alphabet), a.code()).cmp(&(b.homogeneity(&self.alphabet), b.code())));
        Ok(v)
    }

    /// The declared constants character as (tree, value) pairs.
    pub fn constants(&self) -> Result<Vec<(TypedTree, Poly)>> {
        self.config
            .renorm
            .constants
            .iter()
            .map(|c| Ok((TypedTree::parse(&self.alphabet, &c.tree)?.canonical(), Poly::parse(&c.value, &[])?)))
            .collect()
    }
}
