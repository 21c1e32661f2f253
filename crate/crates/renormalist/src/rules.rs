//! Labels with a fixed-point-free involution, multi-indices and `red_*`,
//! typed edge alphabets, rules and the rule-level predicates (normal,
//! equation-like, subcritical), plus the construction of the rule attached
//! to a polynomial SPDE.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::homogeneity::Homogeneity;
use crate::renorm_eq::EquationSpec;

pub type LabelId = usize;
pub type EdgeId = usize;

/// Label set 𝔏 with the involution `*`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Labels {
    names: Vec<String>,
    duals: Vec<LabelId>,
    by_name: HashMap<String, LabelId>,
}

impl Labels {
    pub fn new() -> Self {
        Labels::default()
    }

    /// Declare a label together with its dual; returns `(l, l*)`.
    pub fn add_pair(&mut self, name: &str, dual: &str) -> Result<(LabelId, LabelId)> {
        if name == dual {
            return Err(Error::Invalid(format!("label '{name}' cannot be its own dual")));
        }
        for n in [name, dual] {
            if self.by_name.contains_key(n) {
                return Err(Error::Invalid(format!("label '{n}' declared twice")));
            }
        }
        let a = self.names.len();
        let b = a + 1;
        self.names.push(name.to_string());
        self.names.push(dual.to_string());
        self.duals.push(b);
        self.duals.push(a);
        self.by_name.insert(name.to_string(), a);
        self.by_name.insert(dual.to_string(), b);
        Ok((a, b))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn id(&self, name: &str) -> Result<LabelId> {
        self.by_name.get(name).copied().ok_or_else(|| Error::Unknown(format!("label '{name}'")))
    }

    pub fn name(&self, id: LabelId) -> &str {
        &self.names[id]
    }

    pub fn dual(&self, id: LabelId) -> Result<LabelId> {
        self.duals.get(id).copied().ok_or_else(|| Error::Unknown(format!("label id {id}")))
    }
}

/// A signed multi-index σ ∈ ℤ[𝔏] (zero entries are never stored).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(BTreeMap<LabelId, i64>);

impl MultiIndex {
    pub fn new() -> Self {
        MultiIndex::default()
    }

    pub fn unit(l: LabelId) -> Self {
        MultiIndex::from_counts([(l, 1)])
    }

    pub fn from_counts<I: IntoIterator<Item = (LabelId, i64)>>(it: I) -> Self {
        let mut m = MultiIndex::new();
        for (l, c) in it {
            m.add(l, c);
        }
        m
    }

    pub fn add(&mut self, l: LabelId, c: i64) {
        let e = self.0.entry(l).or_insert(0);
        *e += c;
        if *e == 0 {
            self.0.remove(&l);
        }
    }

    pub fn add_all(&mut self, other: &MultiIndex, sign: i64) {
        for (l, c) in &other.0 {
            self.add(*l, sign * c);
        }
    }

    pub fn get(&self, l: LabelId) -> i64 {
        self.0.get(&l).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (LabelId, i64)> + '_ {
        self.0.iter().map(|(l, c)| (*l, *c))
    }

    /// Image under the involution.
    pub fn dual(&self, labels: &Labels) -> Result<MultiIndex> {
        let mut out = MultiIndex::new();
        for (l, c) in self.iter() {
            out.add(labels.dual(l)?, c);
        }
        Ok(out)
    }

    pub fn render(&self, labels: &Labels) -> String {
        if self.0.is_empty() {
            return "0".into();
        }
        self.iter()
            .map(|(l, c)| if c == 1 { labels.name(l).to_string() } else { format!("{c}{}", labels.name(l)) })
            .collect::<Vec<_>>()
            .join("+")
    }
}

/// `red_*`: the reduced representative, with signed counts interpreted via
/// `−[l] ≡ [l*]`. For each dual pair the net count `σ_l − σ_{l*}` survives on
/// `l` if positive and on `l*` otherwise.
pub fn red_star(labels: &Labels, sigma: &MultiIndex) -> Result<MultiIndex> {
    let mut out = MultiIndex::new();
    let mut seen: BTreeSet<LabelId> = BTreeSet::new();
    for (l, _) in sigma.iter() {
        let d = labels.dual(l)?;
        let base = l.min(d);
        if !seen.insert(base) {
            continue;
        }
        let other = labels.dual(base)?;
        let net = sigma.get(base) - sigma.get(other);
        if net > 0 {
            out.add(base, net);
        } else if net < 0 {
            out.add(other, -net);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum EdgeClass {
    /// Kernel edges ℰ₊ (positive degree).
    Plus,
    /// Jet/polynomial edges ℰ₀ (degree zero).
    Zero,
    /// Noise edges ℰ₋ (negative degree).
    Minus,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EdgeIndex {
    Plus { upper: LabelId, lower: LabelId },
    Zero(MultiIndex),
    Minus(LabelId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeType {
    pub name: String,
    pub class: EdgeClass,
    pub degree: Homogeneity,
    pub index: EdgeIndex,
    /// ι image (Plus edges only).
    pub iota: Option<EdgeId>,
    /// Extra weight counted only when deciding which trees fall below a
    /// generation cutoff (jet grading); never part of `|T|`.
    pub gen_weight: Homogeneity,
    /// Indeterminate (derivative slot or noise variable) the edge stands for.
    pub var: Option<String>,
}

impl EdgeType {
    pub fn gen_degree(&self) -> Homogeneity {
        self.degree + self.gen_weight
    }
}

/// The typed-edge alphabet ℰ = ℰ₊ ⊔ ℰ₀ ⊔ ℰ₋ together with its labels.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Alphabet {
    pub labels: Labels,
    edges: Vec<EdgeType>,
    by_name: HashMap<String, EdgeId>,
}

impl Alphabet {
    pub fn new(labels: Labels) -> Self {
        Alphabet { labels, edges: Vec::new(), by_name: HashMap::new() }
    }

    pub fn add_edge(&mut self, e: EdgeType) -> Result<EdgeId> {
        if self.by_name.contains_key(&e.name) {
            return Err(Error::Invalid(format!("edge type '{}' declared twice", e.name)));
        }
        let name_ok = !e.name.is_empty()
            && e.name.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '\'');
        if !name_ok {
            return Err(Error::Invalid(format!("edge type name '{}' must be alphanumeric", e.name)));
        }
        let id = self.edges.len();
        self.by_name.insert(e.name.clone(), id);
        self.edges.push(e);
        Ok(id)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edge(&self, id: EdgeId) -> &EdgeType {
        &self.edges[id]
    }

    pub fn edges(&self) -> &[EdgeType] {
        &self.edges
    }

    pub fn set_iota(&mut self, e: EdgeId, iota: EdgeId) {
        self.edges[e].iota = Some(iota);
    }

    pub fn id(&self, name: &str) -> Result<EdgeId> {
        self.by_name.get(name).copied().ok_or_else(|| Error::Unknown(format!("edge type '{name}'")))
    }

    pub fn name(&self, id: EdgeId) -> &str {
        &self.edges[id].name
    }

    pub fn class(&self, id: EdgeId) -> EdgeClass {
        self.edges[id].class
    }

    pub fn degree(&self, id: EdgeId) -> Homogeneity {
        self.edges[id].degree
    }

    /// `𝔢₋`: the lower index of an edge type as a multi-index.
    pub fn minus_index(&self, id: EdgeId) -> MultiIndex {
        match &self.edges[id].index {
            EdgeIndex::Plus { lower, .. } => MultiIndex::unit(*lower),
            EdgeIndex::Zero(m) => m.clone(),
            EdgeIndex::Minus(l) => MultiIndex::unit(*l),
        }
    }

    /// `𝔢₊` for kernel edges.
    pub fn plus_label(&self, id: EdgeId) -> Option<LabelId> {
        match &self.edges[id].index {
            EdgeIndex::Plus { upper, .. } => Some(*upper),
            _ => None,
        }
    }

    pub fn ids_of_class(&self, class: EdgeClass) -> Vec<EdgeId> {
        (0..self.edges.len()).filter(|&e| self.edges[e].class == class).collect()
    }

    /// Edge types lying in the image of ι.
    pub fn iota_image(&self) -> BTreeSet<EdgeId> {
        self.edges.iter().filter_map(|e| e.iota).collect()
    }

    /// Check the alphabet invariants: degree signs per class, ι defined only
    /// on kernel edges, injective, and index-compatible.
    pub fn validate(&self) -> Result<()> {
        let mut seen_iota = BTreeSet::new();
        for (id, e) in self.edges.iter().enumerate() {
            let ok = match e.class {
                EdgeClass::Plus => e.degree.is_positive(),
                EdgeClass::Minus => e.degree.is_negative(),
                EdgeClass::Zero => e.degree.is_zero(),
            };
            if !ok {
                return Err(Error::Invalid(format!(
                    "edge type '{}' of class {:?} has incompatible degree {}",
                    e.name, e.class, e.degree
                )));
            }
            let index_ok = matches!(
                (&e.index, e.class),
                (EdgeIndex::Plus { .. }, EdgeClass::Plus)
                    | (EdgeIndex::Zero(_), EdgeClass::Zero)
                    | (EdgeIndex::Minus(_), EdgeClass::Minus)
            );
            if !index_ok {
                return Err(Error::Invalid(format!("edge type '{}' has an index of the wrong shape", e.name)));
            }
            if let Some(i) = e.iota {
                if e.class != EdgeClass::Plus {
                    return Err(Error::Invalid(format!("ι is only defined on kernel edges ('{}')", e.name)));
                }
                if i >= self.edges.len() || self.edges[i].class != EdgeClass::Zero {
                    return Err(Error::Invalid(format!("ι('{}') must be a Zero edge", e.name)));
                }
                if !seen_iota.insert(i) {
                    return Err(Error::Invalid(format!("ι is not injective at '{}'", e.name)));
                }
                let lhs = red_star(&self.labels, &self.minus_index(id))?;
                let rhs = red_star(&self.labels, &self.minus_index(i))?;
                if lhs != rhs {
                    return Err(Error::Invalid(format!(
                        "ind₊('{}')₋ differs from ind₀(ι('{}'))",
                        e.name, e.name
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A node type: a finite multiset of edge types, stored sorted.
pub type NodeType = Vec<EdgeId>;

pub fn node_type(mut edges: Vec<EdgeId>) -> NodeType {
    edges.sort_unstable();
    edges
}

/// `ind(ν) = red_*(Σ_{ε∈ν} ε₋)`.
pub fn node_index(alphabet: &Alphabet, nu: &[EdgeId]) -> Result<MultiIndex> {
    let mut s = MultiIndex::new();
    for &e in nu {
        s.add_all(&alphabet.minus_index(e), 1);
    }
    red_star(&alphabet.labels, &s)
}

pub fn render_node_type(alphabet: &Alphabet, nu: &[EdgeId]) -> String {
    format!("[{}]", nu.iter().map(|&e| alphabet.name(e)).collect::<Vec<_>>().join(","))
}

/// A rule: for each edge type the admissible node types directly above it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    table: Vec<BTreeSet<NodeType>>,
}

impl Rule {
    /// A rule with `R(ε) = {()}` for Zero/Minus edges and `R(𝔨) = ∅` for
    /// kernel edges, to be filled with [`Rule::insert`].
    pub fn empty(alphabet: &Alphabet) -> Self {
        let table = (0..alphabet.len())
            .map(|e| {
                let mut s = BTreeSet::new();
                if alphabet.class(e) != EdgeClass::Plus {
                    s.insert(Vec::new());
                }
                s
            })
            .collect();
        Rule { table }
    }

    pub fn insert(&mut self, e: EdgeId, nu: NodeType) {
        self.table[e].insert(node_type(nu));
    }

    pub fn get(&self, e: EdgeId) -> &BTreeSet<NodeType> {
        &self.table[e]
    }

    pub fn contains(&self, e: EdgeId, nu: &[EdgeId]) -> bool {
        self.table[e].contains(nu)
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// `R ⊆ R'` entrywise.
    pub fn is_subset(&self, other: &Rule) -> bool {
        self.table.iter().zip(&other.table).all(|(a, b)| a.is_subset(b))
    }

    /// Check the rule invariants against the alphabet.
    pub fn validate(&self, alphabet: &Alphabet) -> Result<()> {
        if self.table.len() != alphabet.len() {
            return Err(Error::Invalid("rule table size differs from alphabet".into()));
        }
        for e in 0..alphabet.len() {
            match alphabet.class(e) {
                EdgeClass::Plus => {
                    let upper = alphabet.plus_label(e).expect("kernel edge");
                    let want = MultiIndex::unit(upper);
                    for nu in &self.table[e] {
                        if node_index(alphabet, nu)? != want {
                            return Err(Error::Invalid(format!(
                                "node type {} in R({}) has index {} instead of {}",
                                render_node_type(alphabet, nu),
                                alphabet.name(e),
                                node_index(alphabet, nu)?.render(&alphabet.labels),
                                want.render(&alphabet.labels)
                            )));
                        }
                    }
                }
                _ => {
                    if self.table[e].len() != 1 || !self.table[e].contains(&Vec::new()) {
                        return Err(Error::Invalid(format!(
                            "R({}) must be {{()}} for non-kernel edges",
                            alphabet.name(e)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn render(&self, alphabet: &Alphabet) -> String {
        let mut out = String::new();
        for e in 0..alphabet.len() {
            if alphabet.class(e) != EdgeClass::Plus {
                continue;
            }
            let entries: Vec<String> =
                self.table[e].iter().map(|nu| render_node_type(alphabet, nu)).collect();
            out.push_str(&format!("R({}) = {{{}}}\n", alphabet.name(e), entries.join(", ")));
        }
        out
    }
}

/// All node types obtained from `nu` by replacing a nonempty sub-multiset of
/// its kernel edges by their ι images.
fn iota_variants(alphabet: &Alphabet, nu: &[EdgeId]) -> Result<Vec<NodeType>> {
    let mut counts: BTreeMap<EdgeId, usize> = BTreeMap::new();
    for &e in nu {
        if alphabet.class(e) == EdgeClass::Plus {
            *counts.entry(e).or_insert(0) += 1;
        }
    }
    let kinds: Vec<(EdgeId, usize)> = counts.into_iter().collect();
    for &(e, _) in &kinds {
        if alphabet.edge(e).iota.is_none() {
            return Err(Error::Invalid(format!("kernel edge '{}' has no ι image", alphabet.name(e))));
        }
    }
    let mut out = Vec::new();
    let mut choice = vec![0usize; kinds.len()];
    loop {
        // advance odometer
        let mut i = 0;
        loop {
            if i == kinds.len() {
                return Ok(out);
            }
            if choice[i] < kinds[i].1 {
                choice[i] += 1;
                break;
            }
            choice[i] = 0;
            i += 1;
        }
        let mut v: Vec<EdgeId> = nu.to_vec();
        for (k, &(e, _)) in kinds.iter().enumerate() {
            for _ in 0..choice[k] {
                let pos = v.iter().position(|&x| x == e).expect("present");
                v[pos] = alphabet.edge(e).iota.expect("checked");
            }
        }
        out.push(node_type(v));
    }
}

/// The minimal normal rule containing `rule`.
pub fn normalize_rule(alphabet: &Alphabet, rule: &Rule) -> Result<Rule> {
    let mut out = rule.clone();
    for e in 0..alphabet.len() {
        let mut work: Vec<NodeType> = out.table[e].iter().cloned().collect();
        while let Some(nu) = work.pop() {
            for v in iota_variants(alphabet, &nu)? {
                if out.table[e].insert(v.clone()) {
                    work.push(v);
                }
            }
        }
    }
    Ok(out)
}

pub fn is_normal(alphabet: &Alphabet, rule: &Rule) -> Result<bool> {
    Ok(normalize_rule(alphabet, rule)? == *rule)
}

/// Outcome of the equation-like check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquationLike {
    pub holds: bool,
    /// Offending `(edge type, node type)` if the check fails.
    pub witness: Option<(EdgeId, NodeType)>,
}

/// Every node type contains at most one Zero edge outside the image of ι.
pub fn is_equation_like(alphabet: &Alphabet, rule: &Rule) -> EquationLike {
    let image = alphabet.iota_image();
    for e in 0..alphabet.len() {
        for nu in rule.get(e) {
            let free = nu
                .iter()
                .filter(|&&x| alphabet.class(x) == EdgeClass::Zero && !image.contains(&x))
                .count();
            if free > 1 {
                return EquationLike { holds: false, witness: Some((e, nu.clone())) };
            }
        }
    }
    EquationLike { holds: true, witness: None }
}

/// Knobs for the subcriticality value iteration.
#[derive(Clone, Debug)]
pub struct SubcriticalOptions {
    pub floor: Homogeneity,
    /// Step budget; `None` means `10·|ℰ|`.
    pub max_steps: Option<usize>,
}

impl Default for SubcriticalOptions {
    fn default() -> Self {
        SubcriticalOptions { floor: Homogeneity::int(-1_000_000), max_steps: None }
    }
}

/// Result of the subcriticality decision: the regularity assignment when one
/// was found, plus the iteration trace for diagnostics.
#[derive(Clone, Debug)]
pub struct Subcriticality {
    pub reg: Option<BTreeMap<EdgeId, Homogeneity>>,
    pub steps: usize,
    pub trace: Vec<BTreeMap<EdgeId, Homogeneity>>,
}

fn min_node_sum(
    alphabet: &Alphabet,
    nus: &BTreeSet<NodeType>,
    reg: &BTreeMap<EdgeId, Homogeneity>,
) -> Homogeneity {
    nus.iter()
        .map(|nu| nu.iter().map(|&e| reg_of(alphabet, reg, e)).sum::<Homogeneity>())
        .min()
        .expect("nonempty")
}

fn reg_of(alphabet: &Alphabet, reg: &BTreeMap<EdgeId, Homogeneity>, e: EdgeId) -> Homogeneity {
    match alphabet.class(e) {
        EdgeClass::Plus => reg[&e],
        EdgeClass::Zero => Homogeneity::ZERO,
        EdgeClass::Minus => alphabet.degree(e),
    }
}

/// Decide subcriticality by monotone value iteration
/// `reg(𝔨) ← min(reg(𝔨), |𝔨| + min_ν Σ reg(ε) − κ)` started from zero. The
/// iterates never increase, so a stable point satisfies the defining strict
/// inequality and divergence below the floor certifies failure.
pub fn is_subcritical(alphabet: &Alphabet, rule: &Rule, opts: &SubcriticalOptions) -> Result<Subcriticality> {
    let plus = alphabet.ids_of_class(EdgeClass::Plus);
    for &k in &plus {
        if rule.get(k).is_empty() {
            return Err(Error::Precondition(format!("R({}) is empty", alphabet.name(k))));
        }
    }
    let slack = Homogeneity::kappa(1, 1);
    let budget = opts.max_steps.unwrap_or(10 * alphabet.len().max(1));
    let mut reg: BTreeMap<EdgeId, Homogeneity> = plus.iter().map(|&k| (k, Homogeneity::ZERO)).collect();
    let mut trace = vec![reg.clone()];
    for step in 1..=budget {
        let mut next = BTreeMap::new();
        for &k in &plus {
            let v = alphabet.degree(k) + min_node_sum(alphabet, rule.get(k), &reg) - slack;
            next.insert(k, v.min(reg[&k]));
        }
        let diverged = next.values().any(|v| *v < opts.floor);
        let stable = next == reg;
        reg = next;
        trace.push(reg.clone());
        if diverged {
            return Ok(Subcriticality { reg: None, steps: step, trace });
        }
        if stable {
            let strict = plus
                .iter()
                .all(|&k| reg[&k] < alphabet.degree(k) + min_node_sum(alphabet, rule.get(k), &reg));
            let reg = if strict {
                let mut full = reg.clone();
                for e in 0..alphabet.len() {
                    full.entry(e).or_insert_with(|| reg_of(alphabet, &reg, e));
                }
                Some(full)
            } else {
                None
            };
            return Ok(Subcriticality { reg, steps: step, trace });
        }
    }
    Ok(Subcriticality { reg: None, steps: budget, trace })
}

impl fmt::Display for EdgeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeClass::Plus => "plus",
            EdgeClass::Zero => "zero",
            EdgeClass::Minus => "minus",
        })
    }
}

/// Build the alphabet and normal rule attached to an SPDE: kernel edges for
/// the derivative slots, noise edges, ι images of kernel edges, and the
/// declared jets `δ^{(𝔱,σ)}`; the naive rule `R̊(𝔨) = {[δ^{(𝔱,σ)}] ⊔ σ}` is
/// then normalised.
pub fn spde_to_rule(spec: &EquationSpec) -> Result<(Alphabet, Rule)> {
    spec.validate()?;
    let mut labels = Labels::new();
    for c in &spec.components {
        labels.add_pair(&c.label, &format!("{}*", c.label))?;
    }
    for k in &spec.kernels {
        labels.add_pair(&k.edge, &format!("{}*", k.edge))?;
    }
    for n in &spec.noises {
        labels.add_pair(&n.edge, &format!("{}*", n.edge))?;
    }
    let mut alphabet = Alphabet::new(labels);
    let mut kernel_ids = Vec::new();
    for k in &spec.kernels {
        let upper = alphabet.labels.id(&k.component)?;
        let lower = alphabet.labels.id(&k.edge)?;
        let id = alphabet.add_edge(EdgeType {
            name: k.edge.clone(),
            class: EdgeClass::Plus,
            degree: k.degree,
            index: EdgeIndex::Plus { upper, lower },
            iota: None,
            gen_weight: Homogeneity::ZERO,
            var: Some(k.var.clone()),
        })?;
        kernel_ids.push(id);
    }
    for n in &spec.noises {
        let l = alphabet.labels.id(&n.edge)?;
        alphabet.add_edge(EdgeType {
            name: n.edge.clone(),
            class: EdgeClass::Minus,
            degree: n.degree,
            index: EdgeIndex::Minus(l),
            iota: None,
            gen_weight: Homogeneity::ZERO,
            var: Some(n.var.clone()),
        })?;
    }
    for (k, &id) in spec.kernels.iter().zip(&kernel_ids) {
        let lower = alphabet.labels.id(&k.edge)?;
        let iota = alphabet.add_edge(EdgeType {
            name: k.iota.clone(),
            class: EdgeClass::Zero,
            degree: Homogeneity::ZERO,
            index: EdgeIndex::Zero(MultiIndex::unit(lower)),
            iota: None,
            gen_weight: k.iota_weight,
            var: None,
        })?;
        alphabet.set_iota(id, iota);
    }
    let mut jets: Vec<(String, EdgeId, Vec<EdgeId>)> = Vec::new();
    for j in &spec.jets {
        let mut ind = MultiIndex::unit(alphabet.labels.id(&j.component)?);
        let mut slots = Vec::new();
        for s in &j.slots {
            let e = alphabet.id(s)?;
            if alphabet.class(e) == EdgeClass::Zero {
                return Err(Error::Invalid(format!("jet '{}' lists a jet edge as a slot", j.edge)));
            }
            ind.add_all(&alphabet.minus_index(e), -1);
            slots.push(e);
        }
        let ind = red_star(&alphabet.labels, &ind)?;
        let id = alphabet.add_edge(EdgeType {
            name: j.edge.clone(),
            class: EdgeClass::Zero,
            degree: Homogeneity::ZERO,
            index: EdgeIndex::Zero(ind),
            iota: None,
            gen_weight: j.weight,
            var: None,
        })?;
        jets.push((j.component.clone(), id, slots));
    }
    alphabet.validate()?;
    let mut naive = Rule::empty(&alphabet);
    for (k, &id) in spec.kernels.iter().zip(&kernel_ids) {
        for (comp, jet, slots) in &jets {
            if *comp == k.component {
                let mut nu = slots.clone();
                nu.push(*jet);
                naive.insert(id, nu);
            }
        }
        if naive.get(id).is_empty() {
            return Err(Error::Invalid(format!(
                "no jet declared for component '{}' (kernel '{}')",
                k.component, k.edge
            )));
        }
    }
    naive.validate(&alphabet)?;
    let rule = normalize_rule(&alphabet, &naive)?;
    rule.validate(&alphabet)?;
    Ok((alphabet, rule))
}
