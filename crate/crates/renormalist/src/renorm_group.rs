//! Coloured negative trees, the colouring operation `⊔₋`, potential depth,
//! and the renormalisation group 𝔊₋ in the scalar-character model: star
//! product, unit and inverse.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rules::Alphabet;
use crate::subforests::{negative_forests, negative_subtrees, Forest};
use crate::symbolic::Poly;
use crate::trees::TypedTree;

/// Connected components of an edge set (edges sharing an endpoint).
pub fn components(t: &TypedTree, edges: &BTreeSet<usize>) -> Forest {
    let list: Vec<usize> = edges.iter().copied().collect();
    let mut parent: Vec<usize> = (0..list.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let n = p[y];
            p[y] = r;
            y = n;
        }
        r
    }
    let pos: HashMap<usize, usize> = list.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    for (i, &e) in list.iter().enumerate() {
        // the edge below the lower endpoint of e, and sibling edges, share nodes
        let low = t.lower(e);
        if let Some(&j) = pos.get(&low) {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            parent[a] = b;
        }
        for &s in t.children(low) {
            if let Some(&j) = pos.get(&s) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (i, &e) in list.iter().enumerate() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().insert(e);
    }
    Forest::new(groups.into_values().collect())
}

/// Canonical bracket notation with coloured edges marked by `*`.
pub fn colored_key(alphabet: &Alphabet, t: &TypedTree, coloured: &BTreeSet<usize>) -> String {
    fn rec(al: &Alphabet, t: &TypedTree, col: &BTreeSet<usize>, n: usize) -> String {
        let mut items: Vec<String> = t
            .children(n)
            .iter()
            .map(|&c| {
                let mut s = al.name(t.edge_type(c)).to_string();
                if col.contains(&c) {
                    s.push('*');
                }
                if !t.is_leaf(c) {
                    s.push_str(&rec(al, t, col, c));
                }
                s
            })
            .collect();
        items.sort();
        format!("[{}]", items.join(","))
    }
    rec(alphabet, t, coloured, 0)
}

/// A tree with a nesting-depth colouring of its edges (0 = uncoloured).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoredTree {
    pub tree: TypedTree,
    /// Depth per edge id (index 0 unused).
    pub depth: Vec<u32>,
}

impl ColoredTree {
    pub fn uncoloured(tree: TypedTree) -> Self {
        let n = tree.num_nodes();
        ColoredTree { tree, depth: vec![0; n] }
    }

    /// Edges with depth ≥ `level`.
    pub fn level_edges(&self, level: u32) -> BTreeSet<usize> {
        self.tree.edges().filter(|&e| self.depth[e] >= level).collect()
    }

    /// The level-`n` subforest `T̂_{[-]^n}`.
    pub fn level_forest(&self, level: u32) -> Forest {
        components(&self.tree, &self.level_edges(level))
    }

    /// `T̂₋`.
    pub fn coloured_forest(&self) -> Forest {
        self.level_forest(1)
    }

    /// Depth of each node: maximum over incident edges.
    pub fn node_depths(&self) -> Vec<u32> {
        let mut d = vec![0; self.tree.num_nodes()];
        for e in self.tree.edges() {
            d[e] = d[e].max(self.depth[e]);
            let l = self.tree.lower(e);
            d[l] = d[l].max(self.depth[e]);
        }
        d
    }

    pub fn is_fully_coloured(&self) -> bool {
        self.tree.edges().all(|e| self.depth[e] >= 1)
    }

    /// Every level set is a negative forest of the tree.
    pub fn is_admissible(&self, alphabet: &Alphabet) -> bool {
        let forests: BTreeSet<Forest> = negative_forests(alphabet, &self.tree).into_iter().collect();
        let max = self.depth.iter().copied().max().unwrap_or(0);
        (1..=max).all(|n| forests.contains(&self.level_forest(n)))
    }

    pub fn key(&self, alphabet: &Alphabet) -> String {
        colored_key(alphabet, &self.tree, &self.level_edges(1))
    }
}

fn is_negative_forest(alphabet: &Alphabet, t: &TypedTree, f: &Forest) -> bool {
    negative_forests(alphabet, t).contains(f)
}

/// `T̂ ⊔₋ F`: raise the depth on `F` by one; requires `T̂₋ ⊆ F ∈ 𝔉⁻_T`.
pub fn color_union(alphabet: &Alphabet, that: &ColoredTree, f: &Forest) -> Result<ColoredTree> {
    if !is_negative_forest(alphabet, &that.tree, f) {
        return Err(Error::Invalid("F is not a negative forest of T".into()));
    }
    if !that.level_edges(1).is_subset(&f.edges()) {
        return Err(Error::Precondition("T̂₋ is not contained in F".into()));
    }
    let mut out = that.clone();
    for e in f.edges() {
        out.depth[e] += 1;
    }
    Ok(out)
}

/// `F₁ ≪_{(T,T̂)} F₂`: strict inclusion, and a component of `F₁` may equal
/// its enclosing component of `F₂` only if that is a component of `T̂₋`.
pub fn strictly_nested(f1: &Forest, f2: &Forest, hat: &Forest) -> bool {
    let (e1, e2) = (f1.edges(), f2.edges());
    if !e1.is_subset(&e2) || e1 == e2 {
        return false;
    }
    for a in &f1.parts {
        let e = *a.iter().next().expect("nonempty component");
        let Some(bi) = f2.component_of(e) else { return false };
        let b = &f2.parts[bi];
        if !a.is_subset(b) {
            return false;
        }
        if a == b && !hat.parts.contains(b) {
            return false;
        }
    }
    true
}

/// Potential depth by exhaustive enumeration of `≪`-chains
/// `T̂₋ = F_m ≪ … ≪ F_0 = T` inside `𝔉⁻_T`.
pub fn potential_depth(alphabet: &Alphabet, that: &ColoredTree) -> usize {
    if that.is_fully_coloured() {
        return 0;
    }
    let hat = that.coloured_forest();
    let all_edges: BTreeSet<usize> = that.tree.edges().collect();
    let full = components(&that.tree, &all_edges);
    let hat_edges = hat.edges();
    let mut pool: Vec<Forest> = negative_forests(alphabet, &that.tree)
        .into_iter()
        .filter(|f| hat_edges.is_subset(&f.edges()))
        .collect();
    if !pool.contains(&full) {
        pool.push(full.clone());
    }
    // longest chain from each forest down to T̂₋ (None: unreachable)
    pool.sort_by_key(|f| f.num_edges());
    let mut best: Vec<Option<usize>> = vec![None; pool.len()];
    for i in 0..pool.len() {
        if pool[i] == hat {
            best[i] = Some(0);
            continue;
        }
        let mut b: Option<usize> = None;
        for j in 0..i {
            let Some(lj) = best[j] else { continue };
            if pool[j].is_empty() && pool[j] != hat {
                continue;
            }
            if strictly_nested(&pool[j], &pool[i], &hat) {
                b = Some(b.map_or(lj + 1, |x: usize| x.max(lj + 1)));
            }
        }
        best[i] = b;
    }
    let i = pool.iter().position(|f| *f == full).expect("present");
    best[i].unwrap_or(0)
}

/// One tree of a character universe with its negative forests.
#[derive(Clone, Debug)]
struct UTree {
    tree: TypedTree,
    forests: Vec<Forest>,
    keys: Vec<String>,
    full: Option<usize>,
    /// `comps[f][s]` for `forests[s] ⊆ forests[f]`: the pairs
    /// `(universe tree, forest index)` describing `g(F, S)` componentwise.
    comps: HashMap<(usize, usize), Vec<(usize, usize)>>,
}

/// A finite set of negative trees closed under taking negative subtrees;
/// the support on which characters are evaluated.
#[derive(Clone, Debug)]
pub struct Universe {
    trees: Vec<UTree>,
    index: HashMap<String, usize>,
}

impl Universe {
    /// Close the given trees under negative subtrees and precompute forest
    /// tables.
    pub fn new(alphabet: &Alphabet, seeds: &[TypedTree]) -> Universe {
        let mut trees: Vec<TypedTree> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut work: Vec<TypedTree> = seeds.iter().map(|t| t.canonical()).collect();
        while let Some(t) = work.pop() {
            let code = t.code();
            if index.contains_key(&code) {
                continue;
            }
            index.insert(code, trees.len());
            for s in negative_subtrees(alphabet, &t) {
                let (sub, _) = t.extract(&s);
                let sub = sub.canonical();
                if !index.contains_key(&sub.code()) {
                    work.push(sub);
                }
            }
            trees.push(t);
        }
        let mut utrees: Vec<UTree> = trees
            .iter()
            .map(|t| {
                let forests = negative_forests(alphabet, t);
                let keys = forests.iter().map(|f| colored_key(alphabet, t, &f.edges())).collect();
                let all: BTreeSet<usize> = t.edges().collect();
                let full = forests.iter().position(|f| f.edges() == all && f.parts.len() == 1);
                UTree { tree: t.clone(), forests, keys, full, comps: HashMap::new() }
            })
            .collect();
        // component tables
        let key_index: Vec<HashMap<String, usize>> = utrees
            .iter()
            .map(|u| u.keys.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect())
            .collect();
        for ti in 0..utrees.len() {
            let t = utrees[ti].tree.clone();
            let forests = utrees[ti].forests.clone();
            let mut comps = HashMap::new();
            for (fi, f) in forests.iter().enumerate() {
                let fe = f.edges();
                let extracted: Vec<(usize, TypedTree, Vec<usize>)> = f
                    .parts
                    .iter()
                    .map(|p| {
                        let (sub, back) = t.extract(p);
                        let code = sub.canonical().code();
                        (index[&code], sub, back)
                    })
                    .collect();
                for (si, s) in forests.iter().enumerate() {
                    let se = s.edges();
                    if !se.is_subset(&fe) {
                        continue;
                    }
                    let v: Vec<(usize, usize)> = extracted
                        .iter()
                        .map(|(ui, sub, back)| {
                            let local: BTreeSet<usize> =
                                (1..back.len()).filter(|&le| se.contains(&back[le])).collect();
                            let key = colored_key(alphabet, sub, &local);
                            (*ui, key_index[*ui][&key])
                        })
                        .collect();
                    comps.insert((fi, si), v);
                }
            }
            utrees[ti].comps = comps;
        }
        Universe { trees: utrees, index }
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    pub fn tree(&self, i: usize) -> &TypedTree {
        &self.trees[i].tree
    }

    pub fn tree_index(&self, t: &TypedTree) -> Option<usize> {
        self.index.get(&t.canonical().code()).copied()
    }

    pub fn forests(&self, i: usize) -> &[Forest] {
        &self.trees[i].forests
    }

    /// All keys `(T, S)` with `S` not the full colouring.
    pub fn keys(&self) -> Vec<String> {
        let mut v = Vec::new();
        for u in &self.trees {
            for (i, k) in u.keys.iter().enumerate() {
                if Some(i) != u.full {
                    v.push(k.clone());
                }
            }
        }
        v.sort();
        v
    }

    /// Total number of coloured keys (including full colourings).
    pub fn num_keys(&self) -> usize {
        self.trees.iter().map(|u| u.forests.len()).sum()
    }

    fn value(&self, g: &Character, t: usize, s: usize) -> Poly {
        let u = &self.trees[t];
        if Some(s) == u.full {
            return Poly::one();
        }
        g.values.get(&u.keys[s]).cloned().unwrap_or_else(Poly::zero)
    }

    /// `g(F, S)` expanded multiplicatively over the components of `F`.
    fn forest_value(&self, g: &Character, t: usize, f: usize, s: usize) -> Poly {
        let mut acc = Poly::one();
        for &(ui, si) in &self.trees[t].comps[&(f, s)] {
            let v = self.value(g, ui, si);
            if v.is_zero() {
                return Poly::zero();
            }
            acc = &acc * &v;
        }
        acc
    }

    /// Evaluate `g(T, S)` for a tree of the universe and a colouring given
    /// as a forest of that tree.
    pub fn eval(&self, g: &Character, t: usize, s: &Forest) -> Result<Poly> {
        let si = self.trees[t]
            .forests
            .iter()
            .position(|f| f == s)
            .ok_or_else(|| Error::Invalid("colouring is not a negative forest".into()))?;
        Ok(self.value(g, t, si))
    }

    /// `(f⋆g)(T,S) = Σ_{F ⊇ S} f(T,F)·g(F,S)` on every key of the universe.
    pub fn star(&self, f: &Character, g: &Character) -> Character {
        let entries: Vec<Vec<(String, Poly)>> = (0..self.trees.len())
            .into_par_iter()
            .map(|t| {
                let u = &self.trees[t];
                let mut out = Vec::new();
                for s in 0..u.forests.len() {
                    if Some(s) == u.full {
                        continue;
                    }
                    let mut acc = Poly::zero();
                    for fi in 0..u.forests.len() {
                        if !u.comps.contains_key(&(fi, s)) {
                            continue;
                        }
                        let a = self.value(f, t, fi);
                        if a.is_zero() {
                            continue;
                        }
                        let b = self.forest_value(g, t, fi, s);
                        if b.is_zero() {
                            continue;
                        }
                        acc = &acc + &(&a * &b);
                    }
                    if !acc.is_zero() {
                        out.push((u.keys[s].clone(), acc));
                    }
                }
                out
            })
            .collect();
        Character { values: entries.into_iter().flatten().collect() }
    }

    /// `𝒜g(T,S) = −g(T,S) − Σ_{S ⊊ F ⊊ T} 𝒜g(T,F)·g(F,S)`, evaluated from
    /// the largest colourings down (equivalently, by increasing potential depth).
    pub fn inverse(&self, g: &Character) -> Character {
        let entries: Vec<Vec<(String, Poly)>> = (0..self.trees.len())
            .into_par_iter()
            .map(|t| {
                let u = &self.trees[t];
                let n = u.forests.len();
                let mut order: Vec<usize> = (0..n).filter(|&s| Some(s) != u.full).collect();
                order.sort_by_key(|&s| std::cmp::Reverse(u.forests[s].num_edges()));
                let mut ag: Vec<Option<Poly>> = vec![None; n];
                if let Some(fi) = u.full {
                    ag[fi] = Some(Poly::one());
                }
                for &s in &order {
                    let mut acc = -self.value(g, t, s);
                    for fi in 0..n {
                        if fi == s || Some(fi) == u.full || !u.comps.contains_key(&(fi, s)) {
                            continue;
                        }
                        let a = ag[fi].as_ref().expect("larger forests computed first");
                        if a.is_zero() {
                            continue;
                        }
                        let b = self.forest_value(g, t, fi, s);
                        acc = &acc - &(a * &b);
                    }
                    ag[s] = Some(acc);
                }
                order
                    .into_iter()
                    .filter_map(|s| {
                        let v = ag[s].take().expect("computed");
                        (!v.is_zero()).then(|| (u.keys[s].clone(), v))
                    })
                    .collect()
            })
            .collect();
        Character { values: entries.into_iter().flatten().collect() }
    }

    /// A character with independent random rational values on every
    /// non-full key.
    pub fn random_character<R: Rng>(&self, rng: &mut R, density: f64) -> Character {
        let mut values = BTreeMap::new();
        for k in self.keys() {
            if rng.gen_bool(density) {
                let p: i64 = rng.gen_range(-9..=9);
                let q: i64 = rng.gen_range(1..=5);
                if p != 0 {
                    values.insert(k, Poly::rational(p, q));
                }
            }
        }
        Character { values }
    }

    /// Equality of two characters on every key of the universe.
    pub fn agree(&self, a: &Character, b: &Character) -> bool {
        self.keys().iter().all(|k| {
            let x = a.values.get(k).cloned().unwrap_or_else(Poly::zero);
            let y = b.values.get(k).cloned().unwrap_or_else(Poly::zero);
            x == y
        })
    }
}

/// Sparse scalar character: values on coloured-tree keys; unstored keys are
/// 0, fully coloured trees and the empty forest evaluate to 1.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Character {
    pub values: BTreeMap<String, Poly>,
}

impl Character {
    /// The unit `e`.
    pub fn unit() -> Self {
        Character::default()
    }

    /// Constants character: values on uncoloured trees only.
    pub fn constants(alphabet: &Alphabet, entries: &[(TypedTree, Poly)]) -> Self {
        let values = entries
            .iter()
            .filter(|(_, v)| !v.is_zero())
            .map(|(t, v)| (colored_key(alphabet, t, &BTreeSet::new()), v.clone()))
            .collect();
        Character { values }
    }

    /// Value on an uncoloured tree.
    pub fn on_tree(&self, alphabet: &Alphabet, t: &TypedTree) -> Poly {
        self.values
            .get(&colored_key(alphabet, t, &BTreeSet::new()))
            .cloned()
            .unwrap_or_else(Poly::zero)
    }

    /// Serialised form: list of (coloured-tree key, polynomial) pairs.
    pub fn entries(&self) -> Vec<(String, String)> {
        self.values.iter().map(|(k, v)| (k.clone(), v.to_string())).collect()
    }
}
