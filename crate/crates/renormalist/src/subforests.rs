//! Negative subtrees and forests, the `dif` indices, positive cuts, tree
//! surgery `T∖F` and the sector regularity α̲.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::homogeneity::Homogeneity;
use crate::rules::{red_star, Alphabet, EdgeClass, MultiIndex};
use crate::trees::TypedTree;

/// Edge set of the minimal subtree `T_E` containing the edges `E`.
pub fn minimal_subtree(t: &TypedTree, e: &BTreeSet<usize>) -> BTreeSet<usize> {
    let mut out: BTreeSet<usize> = e.clone();
    if e.is_empty() {
        return out;
    }
    let depths = t.depths();
    // lowest common ancestor of all lower endpoints
    let mut lca = t.lower(*e.iter().next().expect("nonempty"));
    for &x in e {
        let mut a = lca;
        let mut b = t.lower(x);
        while a != b {
            if depths[a] >= depths[b] {
                a = t.parent(a).expect("non-root");
            } else {
                b = t.parent(b).expect("non-root");
            }
        }
        lca = a;
    }
    for &x in e {
        let mut n = t.lower(x);
        while n != lca {
            out.insert(n);
            n = t.parent(n).expect("non-root");
        }
    }
    out
}

/// Node set (endpoints) of an edge set.
pub fn nodes_of(t: &TypedTree, edges: &BTreeSet<usize>) -> BTreeSet<usize> {
    edges.iter().flat_map(|&e| [e, t.lower(e)]).collect()
}

/// The noise (Minus) edges of a tree.
pub fn noise_edges(alphabet: &Alphabet, t: &TypedTree) -> Vec<usize> {
    t.edges().filter(|&e| alphabet.class(t.edge_type(e)) == EdgeClass::Minus).collect()
}

/// All negative subtrees `T_E`, `∅ ≠ E ⊆ E⁻_T`, as edge sets.
pub fn negative_subtrees(alphabet: &Alphabet, t: &TypedTree) -> Vec<BTreeSet<usize>> {
    let noise = noise_edges(alphabet, t);
    let mut out = Vec::new();
    for mask in 1u64..(1u64 << noise.len()) {
        let e: BTreeSet<usize> =
            noise.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &x)| x).collect();
        out.push(minimal_subtree(t, &e));
    }
    out
}

/// Negative subtrees that contain the root node.
pub fn negative_subtrees_at_root(alphabet: &Alphabet, t: &TypedTree) -> Vec<BTreeSet<usize>> {
    negative_subtrees(alphabet, t)
        .into_iter()
        .filter(|s| s.iter().any(|&e| t.lower(e) == 0))
        .collect()
}

/// A subforest of a host tree: vertex-disjoint connected components, each
/// given by its edge set. Components are kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Default)]
pub struct Forest {
    pub parts: Vec<BTreeSet<usize>>,
}

impl Forest {
    pub fn empty() -> Self {
        Forest { parts: Vec::new() }
    }

    pub fn new(mut parts: Vec<BTreeSet<usize>>) -> Self {
        parts.retain(|p| !p.is_empty());
        parts.sort();
        Forest { parts }
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn edges(&self) -> BTreeSet<usize> {
        self.parts.iter().flatten().copied().collect()
    }

    pub fn nodes(&self, t: &TypedTree) -> BTreeSet<usize> {
        nodes_of(t, &self.edges())
    }

    pub fn num_edges(&self) -> usize {
        self.parts.iter().map(|p| p.len()).sum()
    }

    /// Subgraph inclusion `self ⊆ other`.
    pub fn is_subforest_of(&self, other: &Forest) -> bool {
        self.edges().is_subset(&other.edges())
    }

    /// Index of the component of `self` containing the given edge.
    pub fn component_of(&self, e: usize) -> Option<usize> {
        self.parts.iter().position(|p| p.contains(&e))
    }
}

/// All negative forests of `t` (including the empty forest): forests
/// generated by partitions of noise-edge subsets whose minimal subtrees are
/// pairwise vertex-disjoint. Each forest appears exactly once.
pub fn negative_forests(alphabet: &Alphabet, t: &TypedTree) -> Vec<Forest> {
    struct Part {
        noise: BTreeSet<usize>,
        edges: BTreeSet<usize>,
        nodes: BTreeSet<usize>,
    }
    fn rec(t: &TypedTree, noise: &[usize], i: usize, parts: &mut Vec<Part>, out: &mut BTreeSet<Forest>) {
        if i == noise.len() {
            out.insert(Forest::new(parts.iter().map(|p| p.edges.clone()).collect()));
            return;
        }
        let e = noise[i];
        // leave e out
        rec(t, noise, i + 1, parts, out);
        // join an existing part
        for j in 0..parts.len() {
            let mut ns = parts[j].noise.clone();
            ns.insert(e);
            let edges = minimal_subtree(t, &ns);
            let nodes = nodes_of(t, &edges);
            let clash = parts.iter().enumerate().any(|(k, p)| k != j && !p.nodes.is_disjoint(&nodes));
            if clash {
                continue;
            }
            let old = std::mem::replace(&mut parts[j], Part { noise: ns, edges, nodes });
            rec(t, noise, i + 1, parts, out);
            parts[j] = old;
        }
        // open a new part
        let edges: BTreeSet<usize> = [e].into_iter().collect();
        let nodes = nodes_of(t, &edges);
        if parts.iter().all(|p| p.nodes.is_disjoint(&nodes)) {
            parts.push(Part { noise: [e].into_iter().collect(), edges, nodes });
            rec(t, noise, i + 1, parts, out);
            parts.pop();
        }
    }
    let noise = noise_edges(alphabet, t);
    let mut out = BTreeSet::new();
    rec(t, &noise, 0, &mut Vec::new(), &mut out);
    let mut v: Vec<Forest> = out.into_iter().collect();
    v.sort_by(|a, b| (a.num_edges(), a).cmp(&(b.num_edges(), b)));
    v
}

/// `dif_T(n) = red_*(𝔢(n↓)₊ − Σ_{e: e₋ = n} 𝔢(e)₋)`, zero on leaves and
/// with empty first term at the root.
pub fn dif(alphabet: &Alphabet, t: &TypedTree, n: usize) -> Result<MultiIndex> {
    if t.is_leaf(n) {
        return Ok(MultiIndex::new());
    }
    let mut s = MultiIndex::new();
    if n != 0 {
        if let Some(l) = alphabet.plus_label(t.edge_type(n)) {
            s.add(l, 1);
        }
    }
    for &c in t.children(n) {
        s.add_all(&alphabet.minus_index(t.edge_type(c)), -1);
    }
    red_star(&alphabet.labels, &s)
}

fn has_zero_above(alphabet: &Alphabet, t: &TypedTree, n: usize) -> bool {
    t.nodes_above(n)
        .into_iter()
        .skip(1)
        .any(|x| alphabet.class(t.edge_type(x)) == EdgeClass::Zero)
}

/// All positive cuts `C₊(T)`: antichains of Plus/Zero edges containing
/// every Zero edge.
pub fn positive_cuts(alphabet: &Alphabet, t: &TypedTree) -> Vec<BTreeSet<usize>> {
    fn at(alphabet: &Alphabet, t: &TypedTree, n: usize) -> Vec<Vec<usize>> {
        let mut acc: Vec<Vec<usize>> = vec![Vec::new()];
        for &c in t.children(n) {
            let opts: Vec<Vec<usize>> = match alphabet.class(t.edge_type(c)) {
                EdgeClass::Zero => vec![vec![c]],
                EdgeClass::Minus => vec![Vec::new()],
                EdgeClass::Plus => {
                    let mut o = at(alphabet, t, c);
                    if !has_zero_above(alphabet, t, c) {
                        o.push(vec![c]);
                    }
                    o
                }
            };
            let mut next = Vec::with_capacity(acc.len() * opts.len());
            for a in &acc {
                for o in &opts {
                    let mut v = a.clone();
                    v.extend_from_slice(o);
                    next.push(v);
                }
            }
            acc = next;
        }
        acc
    }
    let mut out: Vec<BTreeSet<usize>> =
        at(alphabet, t, 0).into_iter().map(|v| v.into_iter().collect()).collect();
    out.sort();
    out
}

/// Check the `C₊` conditions for an edge set.
pub fn is_positive_cut(alphabet: &Alphabet, t: &TypedTree, cut: &BTreeSet<usize>) -> bool {
    for &e in cut {
        if e == 0 || e > t.num_edges() || alphabet.class(t.edge_type(e)) == EdgeClass::Minus {
            return false;
        }
    }
    for e in t.edges() {
        if alphabet.class(t.edge_type(e)) == EdgeClass::Zero && !cut.contains(&e) {
            return false;
        }
    }
    for &a in cut {
        for &b in cut {
            if a != b && t.edge_below(a, b) {
                return false;
            }
        }
    }
    true
}

/// `T∖F` for the positive forest generated by `cut`: every `T_{≥e}` with
/// `e` a kernel edge is replaced by a single `ι(𝔢(e))` edge; Zero edges are
/// kept (ι acts as the identity on them).
pub fn cut(alphabet: &Alphabet, t: &TypedTree, cut: &BTreeSet<usize>) -> Result<TypedTree> {
    if !is_positive_cut(alphabet, t, cut) {
        return Err(Error::Invalid("edge set violates the positive-cut conditions".into()));
    }
    let mut branches_types: Vec<(usize, usize)> = Vec::new();
    for &e in cut {
        let k = t.edge_type(e);
        if alphabet.class(k) == EdgeClass::Plus {
            let i = alphabet.edge(k).iota.ok_or_else(|| {
                Error::Invalid(format!("kernel edge '{}' has no ι image", alphabet.name(k)))
            })?;
            branches_types.push((e, i));
        }
    }
    // keep every node not strictly above a cut kernel edge, retyping the cut edges
    let mut removed = vec![false; t.num_nodes()];
    for &(e, _) in &branches_types {
        for n in t.nodes_above(e).into_iter().skip(1) {
            removed[n] = true;
        }
    }
    let retype: std::collections::HashMap<usize, usize> = branches_types.into_iter().collect();
    let mut map = vec![usize::MAX; t.num_nodes()];
    map[0] = 0;
    let mut list: Vec<(usize, usize)> = Vec::new();
    for n in 1..t.num_nodes() {
        if removed[n] {
            continue;
        }
        let ty = retype.get(&n).copied().unwrap_or(t.edge_type(n));
        list.push((map[t.lower(n)], ty));
        map[n] = list.len();
    }
    Ok(TypedTree::from_parent_list(&list)?.canonical())
}

/// `α̲(T) = min_{F ∈ 𝔉⁺_T} |T∖F|`.
pub fn sector_regularity(alphabet: &Alphabet, t: &TypedTree) -> Homogeneity {
    positive_cuts(alphabet, t)
        .iter()
        .map(|c| {
            let removed: Homogeneity = c
                .iter()
                .filter(|&&e| alphabet.class(t.edge_type(e)) == EdgeClass::Plus)
                .map(|&e| t.planted_at(e).homogeneity(alphabet))
                .sum();
            t.homogeneity(alphabet) - removed
        })
        .min()
        .expect("at least one positive cut")
}
