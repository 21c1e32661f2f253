//! Shared fixtures, random tree generators and brute-force oracles for the
//! integration tests. The oracles deliberately avoid the library's own
//! algorithms (canonical codes, recursive forest enumeration, cut
//! recursion) and work by exhaustive enumeration instead.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use rand::Rng;
use renormalist::config::Problem;
use renormalist::rules::{Alphabet, EdgeClass, EdgeId};
use renormalist::trees::TypedTree;
use renormalist::{Grade, Homogeneity};

pub const FIXTURES: [&str; 3] = ["gpam", "phi43", "phi34"];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.toml"))
}

pub fn graph_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join("graphs").join(format!("{name}.json"))
}

pub fn fixture(name: &str) -> Problem {
    Problem::load(&fixture_path(name)).expect("fixture loads")
}

pub fn h(s: &str) -> Homogeneity {
    s.parse().expect("homogeneity literal")
}

pub fn tree(p: &Problem, s: &str) -> TypedTree {
    TypedTree::parse(&p.alphabet, s).expect("tree literal")
}

/// Edges strictly above edge `e` (all edges of `T_{≥e}` except `e`).
pub fn strictly_above(t: &TypedTree, e: usize) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    let mut stack: Vec<usize> = t.children(e).to_vec();
    while let Some(x) = stack.pop() {
        out.insert(x);
        stack.extend_from_slice(t.children(x));
    }
    out
}

/// Endpoints of an edge set.
pub fn endpoints(t: &TypedTree, edges: &BTreeSet<usize>) -> BTreeSet<usize> {
    edges.iter().flat_map(|&e| [e, t.lower(e)]).collect()
}

/// Minimal subtree containing `E`: an edge belongs to it iff it lies in `E`
/// or separates `E` (some edge of `E` above it and some not above it).
pub fn oracle_minimal_subtree(t: &TypedTree, e: &BTreeSet<usize>) -> BTreeSet<usize> {
    t.edges()
        .filter(|f| {
            if e.contains(f) {
                return true;
            }
            let up = strictly_above(t, *f);
            let n_above = e.iter().filter(|x| up.contains(x)).count();
            n_above > 0 && n_above < e.len()
        })
        .collect()
}

pub fn noise_edges(al: &Alphabet, t: &TypedTree) -> Vec<usize> {
    t.edges().filter(|&e| al.class(t.edge_type(e)) == EdgeClass::Minus).collect()
}

/// All set partitions of `items` (restricted growth strings).
pub fn set_partitions(items: &[usize]) -> Vec<Vec<Vec<usize>>> {
    fn rec(items: &[usize], i: usize, blocks: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == items.len() {
            out.push(blocks.clone());
            return;
        }
        for b in 0..blocks.len() {
            blocks[b].push(items[i]);
            rec(items, i + 1, blocks, out);
            blocks[b].pop();
        }
        blocks.push(vec![items[i]]);
        rec(items, i + 1, blocks, out);
        blocks.pop();
    }
    let mut out = Vec::new();
    rec(items, 0, &mut Vec::new(), &mut out);
    out
}

/// 𝔉⁻_T by brute force: every subset of noise edges, every set partition,
/// kept when the generated minimal subtrees are pairwise vertex-disjoint.
pub fn oracle_negative_forests(al: &Alphabet, t: &TypedTree) -> BTreeSet<Vec<BTreeSet<usize>>> {
    let noise = noise_edges(al, t);
    let mut out = BTreeSet::new();
    for mask in 0u64..(1u64 << noise.len()) {
        let subset: Vec<usize> = noise.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &x)| x).collect();
        for partition in set_partitions(&subset) {
            let parts: Vec<BTreeSet<usize>> =
                partition.iter().map(|b| oracle_minimal_subtree(t, &b.iter().copied().collect())).collect();
            let disjoint = (0..parts.len()).all(|i| {
                (i + 1..parts.len()).all(|j| endpoints(t, &parts[i]).is_disjoint(&endpoints(t, &parts[j])))
            });
            if disjoint {
                let mut v = parts;
                v.sort();
                out.insert(v);
            }
        }
    }
    out
}

/// 𝔉⁺_T by brute force over all edge subsets.
pub fn oracle_positive_cuts(al: &Alphabet, t: &TypedTree) -> BTreeSet<BTreeSet<usize>> {
    let edges: Vec<usize> = t.edges().collect();
    let mut out = BTreeSet::new();
    for mask in 0u64..(1u64 << edges.len()) {
        let c: BTreeSet<usize> = edges.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &x)| x).collect();
        if c.iter().any(|&e| al.class(t.edge_type(e)) == EdgeClass::Minus) {
            continue;
        }
        if edges.iter().any(|&e| al.class(t.edge_type(e)) == EdgeClass::Zero && !c.contains(&e)) {
            continue;
        }
        let antichain = c.iter().all(|&a| c.iter().all(|&b| a == b || !strictly_above(t, a).contains(&b)));
        if antichain {
            out.insert(c);
        }
    }
    out
}

fn degree_sum(al: &Alphabet, t: &TypedTree, edges: impl IntoIterator<Item = usize>) -> Homogeneity {
    edges.into_iter().map(|e| al.degree(t.edge_type(e))).sum()
}

/// α̲ by brute force: min over cuts of |T| minus the removed planted parts.
pub fn oracle_alpha(al: &Alphabet, t: &TypedTree) -> Homogeneity {
    let total = degree_sum(al, t, t.edges());
    oracle_positive_cuts(al, t)
        .into_iter()
        .map(|c| {
            let removed: Homogeneity = c
                .iter()
                .filter(|&&e| al.class(t.edge_type(e)) == EdgeClass::Plus)
                .map(|&e| al.degree(t.edge_type(e)) + degree_sum(al, t, strictly_above(t, e)))
                .sum();
            total - removed
        })
        .min()
        .expect("the cut of all Zero edges always exists")
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Number of type- and root-preserving isomorphisms between the subtrees
/// above `u` in `a` and above `v` in `b`, by enumerating child bijections.
pub fn iso_count(a: &TypedTree, u: usize, b: &TypedTree, v: usize) -> u128 {
    let (ca, cb) = (a.children(u), b.children(v));
    if ca.len() != cb.len() {
        return 0;
    }
    let mut total = 0u128;
    for p in permutations(ca.len()) {
        let mut prod = 1u128;
        for (i, &j) in p.iter().enumerate() {
            let (x, y) = (ca[i], cb[j]);
            if a.edge_type(x) != b.edge_type(y) {
                prod = 0;
                break;
            }
            prod *= iso_count(a, x, b, y);
            if prod == 0 {
                break;
            }
        }
        total += prod;
    }
    total
}

/// `S(τ)` as the order of the automorphism group.
pub fn oracle_symmetry(t: &TypedTree) -> u128 {
    iso_count(t, 0, t, 0)
}

pub fn oracle_isomorphic(a: &TypedTree, b: &TypedTree) -> bool {
    a.num_edges() == b.num_edges() && iso_count(a, 0, b, 0) > 0
}

/// Distinct plane embeddings, by enumerating child orderings at every node.
pub fn oracle_plane_count(t: &TypedTree) -> usize {
    fn plane(t: &TypedTree, n: usize) -> BTreeSet<String> {
        let kids = t.children(n);
        let child_sets: Vec<Vec<String>> = kids
            .iter()
            .map(|&c| plane(t, c).into_iter().map(|s| format!("{}({})", t.edge_type(c), s)).collect())
            .collect();
        let mut out = BTreeSet::new();
        for p in permutations(kids.len()) {
            let mut acc: Vec<String> = vec![String::new()];
            for &i in &p {
                let mut next = Vec::new();
                for a in &acc {
                    for s in &child_sets[i] {
                        next.push(format!("{a}{s},"));
                    }
                }
                acc = next;
            }
            out.extend(acc);
        }
        out
    }
    plane(t, 0).len()
}

/// The planted tree `T_{≥e}` rebuilt by hand.
pub fn planted_branch(t: &TypedTree, e: usize) -> TypedTree {
    let mut list: Vec<(usize, EdgeId)> = vec![(0, t.edge_type(e))];
    let mut map: BTreeMap<usize, usize> = BTreeMap::from([(e, 1)]);
    let mut queue = vec![e];
    while let Some(n) = queue.pop() {
        for &c in t.children(n) {
            list.push((map[&n], t.edge_type(c)));
            map.insert(c, list.len());
            queue.push(c);
        }
    }
    TypedTree::from_parent_list(&list).expect("parents precede children")
}

fn grade_add(g: Grade, h: Homogeneity) -> Grade {
    match g {
        Grade::Finite(x) => Grade::Finite(x + h),
        Grade::Infinite => Grade::Infinite,
    }
}

/// Whether an edge set containing an edge at the root is connected.
fn is_root_subtree(t: &TypedTree, s: &BTreeSet<usize>) -> bool {
    s.iter().all(|&e| t.lower(e) == 0 || s.contains(&t.lower(e)))
}

/// ‖T‖_{δ₀} by exhaustive decomposition: single edges and planted trees
/// by the explicit cases, otherwise the minimum over all connected root
/// subtrees τ that are negative trees (τ = T_E for its own noise edges), or
/// τ = •, and over the choice of the distinguished planted branch.
pub fn oracle_norm(al: &Alphabet, t: &TypedTree, delta0: Homogeneity) -> Grade {
    let rc = t.children(0);
    if rc.len() == 1 {
        let e = rc[0];
        let k = t.edge_type(e);
        return match al.class(k) {
            EdgeClass::Zero => Grade::Finite(delta0),
            EdgeClass::Minus => Grade::Infinite,
            EdgeClass::Plus => {
                let above = planted_branch(t, e);
                let inner_tree = {
                    // the tree above e, re-rooted at e's upper node
                    let mut list = Vec::new();
                    let mut map: BTreeMap<usize, usize> = BTreeMap::from([(1usize, 0usize)]);
                    for n in 2..above.num_nodes() {
                        let p = above.parent(n).expect("non-root");
                        list.push((map[&p], above.edge_type(n)));
                        map.insert(n, list.len());
                    }
                    TypedTree::from_parent_list(&list).expect("parents precede children")
                };
                let inner = oracle_norm(al, &inner_tree, delta0);
                let deg = degree_sum(al, t, t.edges());
                if inner == Grade::Infinite && deg.is_negative() {
                    Grade::Infinite
                } else {
                    grade_add(inner, al.degree(k)).min(Grade::Finite(delta0))
                }
            }
        };
    }
    let edges: Vec<usize> = t.edges().collect();
    let mut best = Grade::Infinite;
    for mask in 0u64..(1u64 << edges.len()) {
        let s: BTreeSet<usize> = edges.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &x)| x).collect();
        if !s.is_empty() {
            if !s.iter().any(|&e| t.lower(e) == 0) || !is_root_subtree(t, &s) {
                continue;
            }
            let noise: BTreeSet<usize> = s.iter().copied().filter(|&e| al.class(t.edge_type(e)) == EdgeClass::Minus).collect();
            if noise.is_empty() || oracle_minimal_subtree(t, &noise) != s {
                continue;
            }
        }
        let mut nodes = endpoints(t, &s);
        nodes.insert(0);
        let branches: Vec<TypedTree> = edges
            .iter()
            .filter(|e| !s.contains(e) && nodes.contains(&t.lower(**e)))
            .map(|&e| planted_branch(t, e))
            .collect();
        let tau = degree_sum(al, t, s.iter().copied());
        let value = if branches.is_empty() {
            Grade::Finite(tau)
        } else {
            let alphas: Vec<Homogeneity> = branches.iter().map(|b| oracle_alpha(al, b)).collect();
            let mut m = Grade::Infinite;
            for j in 0..branches.len() {
                let others: Homogeneity = (0..branches.len()).filter(|&i| i != j).map(|i| alphas[i]).sum();
                m = m.min(grade_add(oracle_norm(al, &branches[j], delta0), others + tau));
            }
            m
        };
        best = best.min(value);
    }
    best
}

/// A uniformly grown random typed tree with `n` edges: each new edge hangs
/// from a random node that may carry edges (the root or the top of a
/// kernel edge); noise and jet edges only ever end in leaves.
pub fn random_tree<R: Rng>(rng: &mut R, al: &Alphabet, types: &[EdgeId], n: usize) -> TypedTree {
    let plus: Vec<EdgeId> = types.iter().copied().filter(|&k| al.class(k) == EdgeClass::Plus).collect();
    let mut list: Vec<(usize, EdgeId)> = Vec::new();
    let mut open = vec![0usize];
    for i in 0..n {
        let at = open[rng.gen_range(0..open.len())];
        // keep room for at least one leaf-type edge when kernels are chosen
        let ty = if i + 1 < n && !plus.is_empty() && rng.gen_bool(0.5) {
            plus[rng.gen_range(0..plus.len())]
        } else {
            types[rng.gen_range(0..types.len())]
        };
        list.push((at, ty));
        if al.class(ty) == EdgeClass::Plus {
            open.push(list.len());
        }
    }
    TypedTree::from_parent_list(&list).expect("parents precede children")
}

/// All trees with exactly `n` edges over `types`, up to isomorphism
/// (deduplicated with the isomorphism oracle, not canonical codes).
pub fn all_trees(al: &Alphabet, types: &[EdgeId], max_edges: usize) -> Vec<TypedTree> {
    let mut levels: Vec<Vec<TypedTree>> = vec![vec![TypedTree::trivial()]];
    for _ in 1..=max_edges {
        let prev = levels.last().expect("nonempty");
        // bucket by a cheap invariant to limit pairwise isomorphism tests
        let mut buckets: BTreeMap<(Vec<usize>, Vec<EdgeId>), Vec<TypedTree>> = BTreeMap::new();
        for t in prev {
            let open: Vec<usize> = (0..t.num_nodes())
                .filter(|&n| n == 0 || al.class(t.edge_type(n)) == EdgeClass::Plus)
                .collect();
            for &at in &open {
                for &ty in types {
                    let mut list: Vec<(usize, EdgeId)> =
                        (1..t.num_nodes()).map(|n| (t.parent(n).expect("non-root"), t.edge_type(n))).collect();
                    list.push((at, ty));
                    let nt = TypedTree::from_parent_list(&list).expect("valid");
                    let mut degs: Vec<usize> = (0..nt.num_nodes()).map(|n| nt.children(n).len()).collect();
                    degs.sort();
                    let mut tys: Vec<EdgeId> = nt.edges().map(|e| nt.edge_type(e)).collect();
                    tys.sort();
                    let bucket = buckets.entry((degs, tys)).or_default();
                    if !bucket.iter().any(|b| oracle_isomorphic(b, &nt)) {
                        bucket.push(nt);
                    }
                }
            }
        }
        levels.push(buckets.into_values().flatten().collect());
    }
    levels.into_iter().flatten().collect()
}

/// Edge types by name.
pub fn types(al: &Alphabet, names: &[&str]) -> Vec<EdgeId> {
    names.iter().map(|n| al.id(n).expect("edge type")).collect()
}
