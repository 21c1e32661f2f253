//! Typed rooted trees: construction, canonical codes, symmetry factors and
//! plane counts, bracket notation, rule conformity, generation below a
//! cutoff, and the second homogeneity ‖·‖_{δ₀}.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::homogeneity::{Grade, Homogeneity};
use crate::rules::{node_type, Alphabet, EdgeClass, EdgeId, NodeType, Rule};
use crate::subforests;

const NONE: usize = usize::MAX;

/// A rooted tree whose edges carry edge types. Node 0 is the root; every
/// other node `n` has a parent `< n`, and the edge below `n` is identified
/// with `n` itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypedTree {
    parent: Vec<usize>,
    etype: Vec<EdgeId>,
    children: Vec<Vec<usize>>,
}

impl Default for TypedTree {
    fn default() -> Self {
        TypedTree::trivial()
    }
}

impl TypedTree {
    /// The trivial tree • (a single node, no edges).
    pub fn trivial() -> Self {
        TypedTree { parent: vec![NONE], etype: vec![NONE], children: vec![Vec::new()] }
    }

    /// Build from `(parent, edge type)` pairs for nodes `1, 2, …`; each
    /// parent must precede its child.
    pub fn from_parent_list(list: &[(usize, EdgeId)]) -> Result<TypedTree> {
        let mut out = TypedTree::trivial();
        for (i, &(p, ty)) in list.iter().enumerate() {
            if p > i {
                return Err(Error::Invalid(format!("node {} has parent {} not preceding it", i + 1, p)));
            }
            out.push_node(p, ty);
        }
        Ok(out)
    }

    pub fn num_nodes(&self) -> usize {
        self.parent.len()
    }

    pub fn num_edges(&self) -> usize {
        self.parent.len() - 1
    }

    pub fn is_trivial(&self) -> bool {
        self.parent.len() == 1
    }

    /// Edge identifiers `1..=num_edges` (each named by its upper node).
    pub fn edges(&self) -> std::ops::Range<usize> {
        1..self.parent.len()
    }

    pub fn parent(&self, n: usize) -> Option<usize> {
        let p = self.parent[n];
        (p != NONE).then_some(p)
    }

    /// Lower endpoint `e₋` of an edge.
    pub fn lower(&self, e: usize) -> usize {
        self.parent[e]
    }

    pub fn children(&self, n: usize) -> &[usize] {
        &self.children[n]
    }

    pub fn edge_type(&self, e: usize) -> EdgeId {
        self.etype[e]
    }

    pub fn is_leaf(&self, n: usize) -> bool {
        self.children[n].is_empty()
    }

    fn push_node(&mut self, parent: usize, t: EdgeId) -> usize {
        let id = self.parent.len();
        self.parent.push(parent);
        self.etype.push(t);
        self.children.push(Vec::new());
        self.children[parent].push(id);
        id
    }

    /// Copy `other` so that its root is identified with node `at`.
    fn attach(&mut self, at: usize, other: &TypedTree) {
        let mut map = vec![NONE; other.num_nodes()];
        map[0] = at;
        for n in 1..other.num_nodes() {
            map[n] = self.push_node(map[other.parent[n]], other.etype[n]);
        }
    }

    /// `I_𝔨(T)`: a new root joined to the old root by a `𝔨` edge (no class check).
    pub fn planted(k: EdgeId, t: &TypedTree) -> TypedTree {
        let mut out = TypedTree::trivial();
        let top = out.push_node(0, k);
        out.attach(top, t);
        out
    }

    /// Single-edge tree of type `k`.
    pub fn edge(k: EdgeId) -> TypedTree {
        TypedTree::planted(k, &TypedTree::trivial())
    }

    /// Graft with the class check: Zero/Minus edges only onto •.
    pub fn graft(alphabet: &Alphabet, k: EdgeId, t: &TypedTree) -> Result<TypedTree> {
        if alphabet.class(k) != EdgeClass::Plus && !t.is_trivial() {
            return Err(Error::Invalid(format!(
                "cannot graft {} edge '{}' onto a non-trivial tree",
                alphabet.class(k),
                alphabet.name(k)
            )));
        }
        Ok(TypedTree::planted(k, t))
    }

    /// Tree product: identify all roots.
    pub fn product(trees: &[TypedTree]) -> TypedTree {
        let mut out = TypedTree::trivial();
        for t in trees {
            out.attach(0, t);
        }
        out
    }

    /// Root with the given planted branches `(edge type, tree above)`.
    pub fn from_branches(branches: &[(EdgeId, &TypedTree)]) -> TypedTree {
        let mut out = TypedTree::trivial();
        for (k, t) in branches {
            let top = out.push_node(0, *k);
            out.attach(top, t);
        }
        out
    }

    /// The subtree rooted at node `n` (everything above `n`).
    pub fn subtree_at(&self, n: usize) -> TypedTree {
        let mut out = TypedTree::trivial();
        let mut map: HashMap<usize, usize> = HashMap::new();
        map.insert(n, 0);
        let mut stack = vec![n];
        while let Some(x) = stack.pop() {
            for &c in &self.children[x] {
                let id = out.push_node(map[&x], self.etype[c]);
                map.insert(c, id);
                stack.push(c);
            }
        }
        out.canonical()
    }

    /// `T_{≥e}` as a planted tree.
    pub fn planted_at(&self, e: usize) -> TypedTree {
        TypedTree::planted(self.etype[e], &self.subtree_at(e))
    }

    /// The tree spanned by a connected set of edges, as a standalone tree,
    /// together with the map new edge → host edge.
    pub fn extract(&self, edges: &BTreeSet<usize>) -> (TypedTree, Vec<usize>) {
        let mut out = TypedTree::trivial();
        let mut back = vec![NONE];
        if edges.is_empty() {
            return (out, back);
        }
        let root = edges
            .iter()
            .map(|&e| self.parent[e])
            .find(|&n| n == 0 || !edges.contains(&n))
            .expect("connected edge set has a root");
        let mut map: HashMap<usize, usize> = HashMap::new();
        map.insert(root, 0);
        for &e in edges {
            // host edges are numbered parent-first, so parents are mapped first
            let p = self.parent[e];
            let np = *map.get(&p).expect("edge set must be connected");
            let id = out.push_node(np, self.etype[e]);
            map.insert(e, id);
            back.push(e);
        }
        (out, back)
    }

    /// Depth of every node (root = 0).
    pub fn depths(&self) -> Vec<usize> {
        let mut d = vec![0; self.num_nodes()];
        for n in 1..self.num_nodes() {
            d[n] = d[self.parent[n]] + 1;
        }
        d
    }

    /// True iff edge `a` lies (weakly) below edge `b`, i.e. `b ∈ T_{≥a}`.
    pub fn edge_below(&self, a: usize, b: usize) -> bool {
        let mut x = b;
        while x != NONE && x != 0 {
            if x == a {
                return true;
            }
            x = self.parent[x];
        }
        false
    }

    /// Nodes above (and including) node `n`.
    pub fn nodes_above(&self, n: usize) -> Vec<usize> {
        let mut out = vec![n];
        let mut i = 0;
        while i < out.len() {
            out.extend_from_slice(&self.children[out[i]]);
            i += 1;
        }
        out
    }

    /// Canonical codes of all nodes (code of the subtree rooted there).
    pub fn node_codes(&self) -> Vec<String> {
        let mut codes = vec![String::new(); self.num_nodes()];
        for n in (0..self.num_nodes()).rev() {
            let mut items: Vec<String> = self.children[n]
                .iter()
                .map(|&c| format!("{}{}", self.etype[c], codes[c]))
                .collect();
            items.sort();
            codes[n] = format!("({})", items.concat());
        }
        codes
    }

    /// Canonical code: equal iff the trees are isomorphic as typed rooted trees.
    pub fn code(&self) -> String {
        self.node_codes().swap_remove(0)
    }

    /// A canonically numbered copy (children ordered by code, preorder ids).
    pub fn canonical(&self) -> TypedTree {
        let codes = self.node_codes();
        let mut out = TypedTree::trivial();
        let mut stack: Vec<(usize, usize)> = Vec::new();
        let order = |n: usize| {
            let mut ch = self.children[n].clone();
            ch.sort_by(|&a, &b| {
                (self.etype[a], &codes[a]).cmp(&(self.etype[b], &codes[b]))
            });
            ch
        };
        // preorder: process children in sorted order
        for c in order(0).into_iter().rev() {
            stack.push((c, 0));
        }
        while let Some((x, np)) = stack.pop() {
            let id = out.push_node(np, self.etype[x]);
            for c in order(x).into_iter().rev() {
                stack.push((c, id));
            }
        }
        out
    }

    pub fn homogeneity(&self, alphabet: &Alphabet) -> Homogeneity {
        self.edges().map(|e| alphabet.degree(self.etype[e])).sum()
    }

    /// Degree used against generation cutoffs (includes jet weights).
    pub fn gen_degree(&self, alphabet: &Alphabet) -> Homogeneity {
        self.edges().map(|e| alphabet.edge(self.etype[e]).gen_degree()).sum()
    }

    /// Multiset of incoming edge types at node `n`.
    pub fn node_type_at(&self, n: usize) -> NodeType {
        node_type(self.children[n].iter().map(|&c| self.etype[c]).collect())
    }

    /// `S_n(τ)` for every node: ∏ multiplicity! over identical
    /// (edge type, subtree) pairs directly above `n`.
    pub fn symmetry_factors(&self) -> Vec<u128> {
        let codes = self.node_codes();
        (0..self.num_nodes())
            .map(|n| {
                let mut mult: BTreeMap<(EdgeId, &str), u128> = BTreeMap::new();
                for &c in &self.children[n] {
                    *mult.entry((self.etype[c], codes[c].as_str())).or_insert(0) += 1;
                }
                mult.values().map(|&m| factorial(m)).product()
            })
            .collect()
    }

    /// `S(τ) = ∏_n S_n(τ)`.
    pub fn symmetry(&self) -> u128 {
        self.symmetry_factors().into_iter().product()
    }

    /// `∏_n k_τ(n)!/S_n(τ)`: the number of distinct plane representatives.
    pub fn plane_count(&self) -> u128 {
        let s = self.symmetry_factors();
        (0..self.num_nodes()).map(|n| factorial(self.children[n].len() as u128) / s[n]).product()
    }

    /// Edge types of the edges in the tree.
    pub fn edge_types(&self) -> Vec<EdgeId> {
        self.edges().map(|e| self.etype[e]).collect()
    }

    pub fn count_class(&self, alphabet: &Alphabet, class: EdgeClass) -> usize {
        self.edges().filter(|&e| alphabet.class(self.etype[e]) == class).count()
    }

    /// Check every internal node against the rule; the root's node type must
    /// lie in `R(target)` (edge target) or equal the given node type.
    pub fn conforms(&self, alphabet: &Alphabet, rule: &Rule, target: &Target) -> bool {
        for e in self.edges() {
            let t = self.etype[e];
            let nu = self.node_type_at(e);
            if alphabet.class(t) == EdgeClass::Plus {
                if !rule.contains(t, &nu) {
                    return false;
                }
            } else if !nu.is_empty() {
                return false;
            }
        }
        let root = self.node_type_at(0);
        match target {
            Target::Edge(k) => rule.contains(*k, &root),
            Target::Node(nu) => *nu == root,
        }
    }

    /// Bracket notation, e.g. `[I[Xi],Xi]`; children sorted canonically.
    pub fn format(&self, alphabet: &Alphabet) -> String {
        let codes = self.node_codes();
        fn rec(t: &TypedTree, al: &Alphabet, codes: &[String], n: usize, out: &mut String) {
            let mut ch = t.children[n].clone();
            ch.sort_by(|&a, &b| {
                (al.name(t.etype[a]), &codes[a]).cmp(&(al.name(t.etype[b]), &codes[b]))
            });
            out.push('[');
            for (i, &c) in ch.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(al.name(t.etype[c]));
                if !t.children[c].is_empty() {
                    rec(t, al, codes, c, out);
                }
            }
            out.push(']');
        }
        let mut out = String::new();
        rec(self, alphabet, &codes, 0, &mut out);
        out
    }

    /// Parse bracket notation (see [`TypedTree::format`]).
    pub fn parse(alphabet: &Alphabet, s: &str) -> Result<TypedTree> {
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pos = 0;
        let mut out = TypedTree::trivial();
        parse_node(alphabet, &chars, &mut pos, &mut out, 0)?;
        if pos != chars.len() {
            return Err(Error::Parse(format!("trailing input in tree '{s}'")));
        }
        Ok(out)
    }

    /// Nested JSON form: `{"children":[{"type":..,"tree":{..}}]}`.
    pub fn to_json(&self, alphabet: &Alphabet) -> Value {
        fn rec(t: &TypedTree, al: &Alphabet, n: usize) -> Value {
            let ch: Vec<Value> = t.children[n]
                .iter()
                .map(|&c| json!({"type": al.name(t.etype[c]), "tree": rec(t, al, c)}))
                .collect();
            json!({ "children": ch })
        }
        rec(self, alphabet, 0)
    }

    /// DOT rendering. `node_labels` optionally annotates nodes and
    /// `fill_depth` encodes colour depth as grey fill levels.
    pub fn to_dot(&self, alphabet: &Alphabet, name: &str, node_labels: Option<&[String]>, fill_depth: Option<&[u32]>) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "digraph \"{}\" {{", name.replace('"', "'"));
        let _ = writeln!(s, "  rankdir=BT;");
        for n in 0..self.num_nodes() {
            let label = node_labels.map(|l| l[n].clone()).unwrap_or_default();
            let fill = match fill_depth.map(|d| d[n]).unwrap_or(0) {
                0 => String::new(),
                d => format!(", style=filled, fillcolor=\"gray{}\"", (90u32.saturating_sub(20 * d)).max(20)),
            };
            let shape = if n == 0 { "doublecircle" } else { "circle" };
            let _ = writeln!(s, "  n{n} [shape={shape}, label=\"{label}\"{fill}];");
        }
        for e in self.edges() {
            let _ = writeln!(s, "  n{} -> n{} [label=\"{}\"];", e, self.parent[e], alphabet.name(self.etype[e]));
        }
        s.push_str("}\n");
        s
    }
}

fn parse_node(al: &Alphabet, c: &[char], pos: &mut usize, out: &mut TypedTree, at: usize) -> Result<()> {
    let err = |p: usize, what: &str| Error::Parse(format!("{what} at offset {p} in tree notation"));
    if c.get(*pos) != Some(&'[') {
        return Err(err(*pos, "expected '['"));
    }
    *pos += 1;
    if c.get(*pos) == Some(&']') {
        *pos += 1;
        return Ok(());
    }
    loop {
        let start = *pos;
        while *pos < c.len() && (c[*pos].is_alphanumeric() || c[*pos] == '_' || c[*pos] == '\'') {
            *pos += 1;
        }
        if start == *pos {
            return Err(err(*pos, "expected an edge type name"));
        }
        let name: String = c[start..*pos].iter().collect();
        let t = al.id(&name)?;
        let child = out.push_node(at, t);
        if c.get(*pos) == Some(&'[') {
            if al.class(t) != EdgeClass::Plus {
                return Err(Error::Invalid(format!("edge '{name}' cannot carry a subtree")));
            }
            parse_node(al, c, pos, out, child)?;
        }
        match c.get(*pos) {
            Some(',') => *pos += 1,
            Some(']') => {
                *pos += 1;
                return Ok(());
            }
            _ => return Err(err(*pos, "expected ',' or ']'")),
        }
    }
}

pub fn factorial(n: u128) -> u128 {
    (1..=n).product()
}

/// Root constraint for generation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Target {
    /// Root node type must lie in `R(edge)`.
    Edge(EdgeId),
    /// Root node type must equal the given node type.
    Node(NodeType),
}

#[derive(Clone, Debug)]
pub struct GenOptions {
    /// Hard cap on the number of trees materialised during generation.
    pub max_trees: usize,
    /// Cap on the lower-bound value iteration.
    pub max_bound_steps: usize,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions { max_trees: 200_000, max_bound_steps: 1_000 }
    }
}

type Bucket = std::rc::Rc<Vec<(String, Homogeneity, TypedTree)>>;

/// Enumerates conforming trees below a generation cutoff using exact lower
/// bounds on the generation degree of planted trees for pruning.
pub struct Generator<'a> {
    alphabet: &'a Alphabet,
    rule: &'a Rule,
    opts: GenOptions,
    lower: Vec<Option<Homogeneity>>,
    memo: HashMap<(EdgeId, Homogeneity), Bucket>,
    produced: usize,
}

impl<'a> Generator<'a> {
    pub fn new(alphabet: &'a Alphabet, rule: &'a Rule, opts: GenOptions) -> Result<Self> {
        let lower = planted_lower_bounds(alphabet, rule, opts.max_bound_steps)?;
        Ok(Generator { alphabet, rule, opts, lower, memo: HashMap::new(), produced: 0 })
    }

    /// Minimal generation degree of a planted tree `I_e(·)` (None if no
    /// finite conforming tree exists).
    pub fn lower_bound(&self, e: EdgeId) -> Option<Homogeneity> {
        self.lower[e]
    }

    fn bump(&mut self, n: usize) -> Result<()> {
        self.produced += n;
        if self.produced > self.opts.max_trees {
            return Err(Error::Budget(format!(
                "tree generation exceeded {} trees (rule not equation-like or cutoff miscalibrated?)",
                self.opts.max_trees
            )));
        }
        Ok(())
    }

    /// Planted trees `I_e(T)` (or the single edge for Zero/Minus `e`) with
    /// generation degree `< c`, sorted by canonical code.
    pub fn planted(&mut self, e: EdgeId, c: Homogeneity) -> Result<Bucket> {
        if let Some(b) = self.memo.get(&(e, c)) {
            return Ok(b.clone());
        }
        let g = self.alphabet.edge(e).gen_degree();
        let mut out: Vec<(String, Homogeneity, TypedTree)> = Vec::new();
        match self.alphabet.class(e) {
            EdgeClass::Zero | EdgeClass::Minus => {
                if g < c {
                    let t = TypedTree::edge(e);
                    out.push((t.code(), g, t));
                }
            }
            EdgeClass::Plus => {
                if self.lower[e].map(|l| l < c).unwrap_or(false) {
                    let nus: Vec<NodeType> = self.rule.get(e).iter().cloned().collect();
                    for nu in nus {
                        for (_, d, t) in self.sector(&nu, c - g)? {
                            let p = TypedTree::planted(e, &t);
                            out.push((p.code(), d + g, p));
                        }
                    }
                }
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out.dedup_by(|a, b| a.0 == b.0);
        self.bump(out.len())?;
        let b = std::rc::Rc::new(out);
        self.memo.insert((e, c), b.clone());
        Ok(b)
    }

    /// Trees with root node type exactly `nu` and generation degree `< c`.
    pub fn sector(&mut self, nu: &[EdgeId], c: Homogeneity) -> Result<Vec<(String, Homogeneity, TypedTree)>> {
        let mut lbs = Vec::with_capacity(nu.len());
        for &e in nu {
            match self.lower[e] {
                Some(l) => lbs.push(l),
                None => return Ok(Vec::new()),
            }
        }
        let mut rest = vec![Homogeneity::ZERO; nu.len() + 1];
        for i in (0..nu.len()).rev() {
            rest[i] = rest[i + 1] + lbs[i];
        }
        if rest[0] >= c {
            return Ok(Vec::new());
        }
        let mut results = Vec::new();
        let mut chosen: Vec<(usize, Bucket)> = Vec::new();
        self.sector_rec(nu, c, &rest, 0, Homogeneity::ZERO, &mut chosen, &mut results)?;
        results.sort_by(|a: &(String, Homogeneity, TypedTree), b| a.0.cmp(&b.0));
        results.dedup_by(|a, b| a.0 == b.0);
        Ok(results)
    }

    #[allow(clippy::too_many_arguments)]
    fn sector_rec(
        &mut self,
        nu: &[EdgeId],
        c: Homogeneity,
        rest: &[Homogeneity],
        i: usize,
        acc: Homogeneity,
        chosen: &mut Vec<(usize, Bucket)>,
        results: &mut Vec<(String, Homogeneity, TypedTree)>,
    ) -> Result<()> {
        if i == nu.len() {
            let branches: Vec<(EdgeId, TypedTree)> = chosen
                .iter()
                .map(|(idx, b)| {
                    let p = &b[*idx].2;
                    (p.etype[1], p.subtree_at(1))
                })
                .collect();
            let refs: Vec<(EdgeId, &TypedTree)> = branches.iter().map(|(k, t)| (*k, t)).collect();
            let t = TypedTree::from_branches(&refs).canonical();
            results.push((t.code(), acc, t));
            self.bump(1)?;
            return Ok(());
        }
        let budget = c - acc - rest[i + 1];
        let bucket = self.planted(nu[i], budget)?;
        // identical consecutive edge types: enforce non-decreasing codes
        let min_code: Option<String> = if i > 0 && nu[i] == nu[i - 1] {
            let (idx, b) = &chosen[i - 1];
            Some(b[*idx].0.clone())
        } else {
            None
        };
        for idx in 0..bucket.len() {
            if let Some(m) = &min_code {
                if bucket[idx].0 < *m {
                    continue;
                }
            }
            let d = bucket[idx].1;
            chosen.push((idx, bucket.clone()));
            self.sector_rec(nu, c, rest, i + 1, acc + d, chosen, results)?;
            chosen.pop();
        }
        Ok(())
    }
}

/// Exact minimal generation degree of planted trees per edge type, by
/// value iteration from above (depth-bounded minima).
fn planted_lower_bounds(alphabet: &Alphabet, rule: &Rule, max_steps: usize) -> Result<Vec<Option<Homogeneity>>> {
    let n = alphabet.len();
    let mut lb: Vec<Option<Homogeneity>> = (0..n)
        .map(|e| match alphabet.class(e) {
            EdgeClass::Plus => None,
            _ => Some(alphabet.edge(e).gen_degree()),
        })
        .collect();
    for _ in 0..max_steps {
        let mut next = lb.clone();
        for e in 0..n {
            if alphabet.class(e) != EdgeClass::Plus {
                continue;
            }
            let best = rule
                .get(e)
                .iter()
                .filter_map(|nu| nu.iter().map(|&x| lb[x]).sum::<Option<Homogeneity>>())
                .min();
            next[e] = best.map(|b| b + alphabet.edge(e).gen_degree());
        }
        if next == lb {
            return Ok(lb);
        }
        lb = next;
    }
    Err(Error::Budget(
        "lower bounds for planted trees do not stabilise (rule not subcritical?)".into(),
    ))
}

fn sort_trees(alphabet: &Alphabet, v: Vec<(String, Homogeneity, TypedTree)>) -> Vec<TypedTree> {
    let mut keyed: Vec<(Homogeneity, String, TypedTree)> =
        v.into_iter().map(|(c, _, t)| (t.homogeneity(alphabet), c, t)).collect();
    keyed.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    keyed.dedup_by(|a, b| a.1 == b.1);
    keyed.into_iter().map(|(_, _, t)| t).collect()
}

/// All conforming trees with root matching `target` and generation degree
/// below `gamma`, sorted by (homogeneity, canonical code).
pub fn generate_trees(alphabet: &Alphabet, rule: &Rule, target: &Target, gamma: Homogeneity, opts: &GenOptions) -> Result<Vec<TypedTree>> {
    let mut g = Generator::new(alphabet, rule, opts.clone())?;
    let mut all = Vec::new();
    match target {
        Target::Edge(k) => {
            let nus: Vec<NodeType> = rule.get(*k).iter().cloned().collect();
            for nu in nus {
                all.extend(g.sector(&nu, gamma)?);
            }
        }
        Target::Node(nu) => all.extend(g.sector(nu, gamma)?),
    }
    Ok(sort_trees(alphabet, all))
}

/// The solution sector `{ι(o)} ∪ {I_o(T)}` below `gamma`.
pub fn generate_planted(alphabet: &Alphabet, rule: &Rule, o: EdgeId, gamma: Homogeneity, opts: &GenOptions) -> Result<Vec<TypedTree>> {
    if alphabet.class(o) != EdgeClass::Plus {
        return Err(Error::Invalid(format!("'{}' is not a kernel edge", alphabet.name(o))));
    }
    let mut g = Generator::new(alphabet, rule, opts.clone())?;
    let mut all: Vec<(String, Homogeneity, TypedTree)> = g.planted(o, gamma)?.to_vec();
    if let Some(i) = alphabet.edge(o).iota {
        all.extend(g.planted(i, gamma)?.iter().cloned());
    }
    Ok(sort_trees(alphabet, all))
}

/// Memoised evaluator of the second homogeneity ‖·‖_{δ₀}.
pub struct SecondHomogeneity<'a> {
    alphabet: &'a Alphabet,
    memo: HashMap<(String, Homogeneity), Grade>,
}

impl<'a> SecondHomogeneity<'a> {
    pub fn new(alphabet: &'a Alphabet) -> Self {
        SecondHomogeneity { alphabet, memo: HashMap::new() }
    }

    pub fn eval(&mut self, t: &TypedTree, delta0: Homogeneity) -> Grade {
        let key = (t.code(), delta0);
        if let Some(g) = self.memo.get(&key) {
            return *g;
        }
        let v = self.compute(t, delta0);
        self.memo.insert(key, v);
        v
    }

    fn compute(&mut self, t: &TypedTree, delta0: Homogeneity) -> Grade {
        let al = self.alphabet;
        let root_children = t.children(0);
        if root_children.len() == 1 {
            let e = root_children[0];
            let k = t.edge_type(e);
            match al.class(k) {
                EdgeClass::Zero => return Grade::Finite(delta0),
                EdgeClass::Minus => return Grade::Infinite,
                EdgeClass::Plus => {
                    let above = t.subtree_at(e);
                    let inner = self.eval(&above, delta0);
                    let deg = al.degree(k) + above.homogeneity(al);
                    if inner.is_infinite() && deg.is_negative() {
                        return Grade::Infinite;
                    }
                    return (inner + al.degree(k)).min(Grade::Finite(delta0));
                }
            }
        }
        // general case: minimise over τ ∈ {•} ∪ {T_E ∋ root}
        let mut candidates: Vec<BTreeSet<usize>> = vec![BTreeSet::new()];
        candidates.extend(subforests::negative_subtrees_at_root(al, t));
        let mut best = Grade::Infinite;
        for tau in candidates {
            let nodes: BTreeSet<usize> = if tau.is_empty() {
                [0].into_iter().collect()
            } else {
                tau.iter().flat_map(|&e| [e, t.lower(e)]).collect()
            };
            let tau_deg: Homogeneity = tau.iter().map(|&e| al.degree(t.edge_type(e))).sum();
            let branches: Vec<TypedTree> = nodes
                .iter()
                .flat_map(|&n| t.children(n).iter().copied())
                .filter(|c| !tau.contains(c))
                .map(|c| t.planted_at(c))
                .collect();
            let value = if branches.is_empty() {
                Grade::Finite(tau_deg)
            } else {
                let alphas: Vec<Homogeneity> =
                    branches.iter().map(|b| subforests::sector_regularity(al, b)).collect();
                let total_alpha: Homogeneity = alphas.iter().copied().sum();
                let mut m = Grade::Infinite;
                for (j, b) in branches.iter().enumerate() {
                    let g = self.eval(b, delta0) + (total_alpha - alphas[j]);
                    m = m.min(g);
                }
                m + tau_deg
            };
            best = best.min(value);
        }
        best
    }
}

/// Convenience wrapper around [`SecondHomogeneity`].
pub fn second_homogeneity(alphabet: &Alphabet, t: &TypedTree, delta0: Homogeneity) -> Grade {
    SecondHomogeneity::new(alphabet).eval(t, delta0)
}
