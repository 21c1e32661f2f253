//! Power-counting conditions for labelled multigraphs (kernel diagrams
//! with a distinguished vertex `⋆` and test-function vertices `V⋆`), and the
//! bound exponent `α̃ = |𝔰||V∖V⋆| − Σ aₑ`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homogeneity::Homogeneity;

/// Maximal number of vertices accepted for exhaustive subset enumeration.
pub const MAX_VERTICES: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub from: String,
    pub to: String,
    pub a: Homogeneity,
    #[serde(default)]
    pub r: u8,
}

/// Graph input format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// Scaling dimension `|𝔰|`.
    pub scaling: Homogeneity,
    pub vertices: Vec<String>,
    /// The distinguished vertex `⋆`.
    pub star: String,
    /// Test-function vertices `v_{⋆,i}` (`V⋆` is these together with `⋆`).
    #[serde(default)]
    pub vstar: Vec<String>,
    pub edges: Vec<EdgeSpec>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub a: Homogeneity,
    pub r: u8,
}

/// A validated labelled multigraph.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelledGraph {
    pub name: String,
    pub names: Vec<String>,
    pub star: usize,
    /// `V⋆`, including `⋆`.
    pub vstar: BTreeSet<usize>,
    pub scaling: Homogeneity,
    pub edges: Vec<Edge>,
}

impl LabelledGraph {
    pub fn from_spec(spec: &GraphSpec) -> Result<Self> {
        let n = spec.vertices.len();
        if n > MAX_VERTICES {
            return Err(Error::Precondition(format!("graph has {n} vertices; at most {MAX_VERTICES} supported")));
        }
        let mut index = BTreeMap::new();
        for (i, v) in spec.vertices.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(Error::Invalid(format!("vertex '{v}' declared twice")));
            }
        }
        let id = |v: &str| index.get(v).copied().ok_or_else(|| Error::Unknown(format!("vertex '{v}'")));
        let star = id(&spec.star)?;
        let mut vstar = BTreeSet::from([star]);
        for v in &spec.vstar {
            vstar.insert(id(v)?);
        }
        if !spec.scaling.is_positive() {
            return Err(Error::Invalid("scaling |𝔰| must be positive".into()));
        }
        let mut edges = Vec::new();
        let mut renormalised: BTreeSet<(usize, usize)> = BTreeSet::new();
        for e in &spec.edges {
            let (from, to) = (id(&e.from)?, id(&e.to)?);
            if from == to {
                return Err(Error::Invalid(format!("self-loop at '{}'", e.from)));
            }
            if e.a.is_negative() {
                return Err(Error::Invalid(format!("edge {}→{} has negative label a = {}", e.from, e.to, e.a)));
            }
            if e.r > 1 {
                return Err(Error::Invalid(format!("edge {}→{} has r = {} ∉ {{0,1}}", e.from, e.to, e.r)));
            }
            if e.r == 1 {
                if from == star || to == star || (vstar.contains(&from) && vstar.contains(&to)) {
                    return Err(Error::Invalid(format!(
                        "edge {}→{} has r = 1 but touches ⋆ or connects two elements of V⋆",
                        e.from, e.to
                    )));
                }
                if !renormalised.insert((from.min(to), from.max(to))) {
                    return Err(Error::Invalid(format!(
                        "more than one r = 1 edge between '{}' and '{}'",
                        e.from, e.to
                    )));
                }
            }
            edges.push(Edge { from, to, a: e.a, r: e.r });
        }
        Ok(LabelledGraph { name: spec.name.clone(), names: spec.vertices.clone(), star, vstar, scaling: spec.scaling, edges })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: GraphSpec = serde_json::from_str(s).map_err(|e| Error::Parse(format!("graph JSON: {e}")))?;
        Self::from_spec(&spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&s)
    }

    pub fn num_vertices(&self) -> usize {
        self.names.len()
    }

    /// The merged complete graph `Ĝ`: labels summed over parallel edges
    /// with the same orientation.
    pub fn merged(&self) -> Vec<Edge> {
        let mut m: BTreeMap<(usize, usize), (Homogeneity, u8)> = BTreeMap::new();
        for e in &self.edges {
            let x = m.entry((e.from, e.to)).or_insert((Homogeneity::ZERO, 0));
            x.0 = x.0 + e.a;
            x.1 += e.r;
        }
        m.into_iter().map(|((from, to), (a, r))| Edge { from, to, a, r }).collect()
    }
}

/// `α̃ = |𝔰||V∖V⋆| − Σ aₑ`.
pub fn bound_exponent(g: &LabelledGraph) -> Homogeneity {
    let internal = (g.num_vertices() - g.vstar.len()) as i64;
    g.scaling * internal - g.edges.iter().map(|e| e.a).sum::<Homogeneity>()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    /// Condition number (1, 2 or 3).
    pub condition: u8,
    pub subset: Vec<String>,
    pub lhs: Homogeneity,
    pub rhs: Homogeneity,
    /// Signed margin; nonpositive for a violation.
    pub slack: Homogeneity,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub passed: bool,
    pub violation: Option<Violation>,
    /// Smallest slack per condition (None if no subset applies).
    pub min_slack: [Option<Homogeneity>; 3],
    pub subsets_checked: usize,
    pub alpha_tilde: Homogeneity,
}

struct Sums<'a> {
    merged: &'a [Edge],
}

impl Sums<'_> {
    fn inside(mask: u32, v: usize) -> bool {
        mask >> v & 1 == 1
    }

    /// Condition-specific left-hand sides.
    fn lhs(&self, cond: u8, mask: u32) -> Homogeneity {
        let mut s = Homogeneity::ZERO;
        for e in self.merged {
            let (a_in, b_in) = (Self::inside(mask, e.from), Self::inside(mask, e.to));
            let r = Homogeneity::int(e.r as i64);
            let one = Homogeneity::int(1);
            let internal = a_in && b_in;
            let outgoing = a_in && !b_in;
            let incoming = !a_in && b_in;
            let plus = e.r > 0;
            match cond {
                1 => {
                    if internal {
                        s = s + e.a;
                    }
                }
                2 => {
                    if internal {
                        s = s + e.a;
                    } else if outgoing && plus {
                        s = s + e.a + r - one;
                    } else if incoming && plus {
                        s = s - r;
                    }
                }
                _ => {
                    if (a_in || b_in) && !(incoming && plus) {
                        s = s + e.a;
                    }
                    if outgoing && plus {
                        s = s + r;
                    }
                    if incoming && plus {
                        s = s - (r - one);
                    }
                }
            }
        }
        s
    }
}

/// Exhaustively verify the three subset conditions; the first violation
/// (by condition, then by subset bitmask) is reported.
pub fn check_assumptions(g: &LabelledGraph) -> CheckReport {
    let n = g.num_vertices();
    let merged = g.merged();
    let sums = Sums { merged: &merged };
    let star_bit = 1u32 << g.star;
    let vstar_mask: u32 = g.vstar.iter().map(|&v| 1u32 << v).sum();
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut min_slack: [Option<Homogeneity>; 3] = [None, None, None];
    let mut violation = None;
    let mut checked = 0;
    for cond in 1..=3u8 {
        let subsets: Vec<u32> = (1..=full)
            .filter(|&m| match cond {
                1 => m & star_bit == 0 && m.count_ones() >= 2,
                2 => m & star_bit != 0 && m.count_ones() >= 2,
                _ => m & vstar_mask == 0,
            })
            .collect();
        checked += subsets.len();
        let results: Vec<(u32, Homogeneity, Homogeneity, Homogeneity)> = subsets
            .par_iter()
            .map(|&m| {
                let k = m.count_ones() as i64;
                let lhs = sums.lhs(cond, m);
                let (rhs, slack) = if cond == 3 {
                    let rhs = g.scaling * k;
                    (rhs, lhs - rhs)
                } else {
                    let rhs = g.scaling * (k - 1);
                    (rhs, rhs - lhs)
                };
                (m, lhs, rhs, slack)
            })
            .collect();
        for (m, lhs, rhs, slack) in results {
            let i = (cond - 1) as usize;
            min_slack[i] = Some(min_slack[i].map_or(slack, |x: Homogeneity| x.min(slack)));
            if violation.is_none() && !slack.is_positive() {
                let subset = (0..n).filter(|&v| m >> v & 1 == 1).map(|v| g.names[v].clone()).collect();
                violation = Some(Violation { condition: cond, subset, lhs, rhs, slack });
            }
        }
    }
    CheckReport { passed: violation.is_none(), violation, min_slack, subsets_checked: checked, alpha_tilde: bound_exponent(g) }
}
