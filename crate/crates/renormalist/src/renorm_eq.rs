//! Equation specifications and the renormalised equation: derivative
//! operators `D_τF` with symmetry factors, paired with the values of a
//! constants character.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::homogeneity::Homogeneity;
use crate::rules::{Alphabet, EdgeClass};
use crate::symbolic::{Atom, Poly};
use crate::trees::TypedTree;

/// One solution component `𝔱` with its right-hand side `F^𝔱` (sum of terms).
#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub label: String,
    pub rhs: Vec<Poly>,
}

/// A derivative slot of a solution component, represented by a kernel edge.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelSlot {
    pub edge: String,
    pub component: String,
    /// Indeterminate standing for this slot in `F` (e.g. `u`, `Du`).
    pub var: String,
    pub degree: Homogeneity,
    /// Name of the ι image (polynomial placeholder) of the edge.
    pub iota: String,
    /// Generation weight of the ι image.
    pub iota_weight: Homogeneity,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseSlot {
    pub edge: String,
    pub var: String,
    pub degree: Homogeneity,
    /// Maximal polynomial degree of `F` in this noise (1 = multilinear).
    pub multilinearity: u32,
}

/// A declared jet edge `δ^{(𝔱,σ)}`: the Taylor coefficient `D^σ F^𝔱`
/// (optionally restricted to one term of `F^𝔱`).
#[derive(Clone, Debug, PartialEq)]
pub struct JetSpec {
    pub edge: String,
    pub component: String,
    pub term: Option<usize>,
    pub slots: Vec<String>,
    pub weight: Homogeneity,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FunctionDecl {
    pub name: String,
    pub arg: String,
}

/// Contraction `a·b ↦ result` applied to counterterms.
#[derive(Clone, Debug, PartialEq)]
pub struct Contraction {
    pub a: String,
    pub b: String,
    pub result: String,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct EquationSpec {
    pub components: Vec<Component>,
    pub kernels: Vec<KernelSlot>,
    pub noises: Vec<NoiseSlot>,
    pub functions: Vec<FunctionDecl>,
    pub jets: Vec<JetSpec>,
    pub contractions: Vec<Contraction>,
}

impl EquationSpec {
    /// All declared indeterminates (slot and noise variables).
    pub fn vars(&self) -> Vec<String> {
        self.kernels
            .iter()
            .map(|k| k.var.clone())
            .chain(self.noises.iter().map(|n| n.var.clone()))
            .collect()
    }

    pub fn component(&self, label: &str) -> Result<&Component> {
        self.components
            .iter()
            .find(|c| c.label == label)
            .ok_or_else(|| Error::Unknown(format!("component '{label}'")))
    }

    /// `F^𝔱` as a single polynomial.
    pub fn rhs(&self, label: &str) -> Result<Poly> {
        Ok(self.component(label)?.rhs.iter().cloned().sum())
    }

    /// Check the spec: declared names, polynomial structure, noise
    /// multilinearity and non-vanishing jets.
    pub fn validate(&self) -> Result<()> {
        let mut names = BTreeSet::new();
        for n in self
            .kernels
            .iter()
            .flat_map(|k| [k.edge.clone(), k.iota.clone()])
            .chain(self.noises.iter().map(|n| n.edge.clone()))
            .chain(self.jets.iter().map(|j| j.edge.clone()))
        {
            if !names.insert(n.clone()) {
                return Err(Error::Invalid(format!("edge name '{n}' declared twice")));
            }
        }
        let vars = self.vars();
        let unique: BTreeSet<&String> = vars.iter().collect();
        if unique.len() != vars.len() {
            return Err(Error::Invalid("indeterminate declared twice".into()));
        }
        for f in &self.functions {
            if !self.kernels.iter().any(|k| k.var == f.arg) {
                return Err(Error::Invalid(format!(
                    "function '{}' must take a solution slot as argument, got '{}'",
                    f.name, f.arg
                )));
            }
        }
        for k in &self.kernels {
            self.component(&k.component)?;
        }
        for c in &self.components {
            for term in &c.rhs {
                for (m, _) in term.terms() {
                    for (a, _) in m.factors() {
                        match a {
                            Atom::Var(v) if !vars.contains(v) => {
                                return Err(Error::Unknown(format!("indeterminate '{v}'")))
                            }
                            Atom::Func { name, arg, .. } => {
                                if !self.functions.iter().any(|f| &f.name == name && &f.arg == arg) {
                                    return Err(Error::Invalid(format!(
                                        "non-polynomial dependence through undeclared function '{name}({arg})'"
                                    )));
                                }
                            }
                            _ => {}
                        }
                    }
                }
            }
            let f = self.rhs(&c.label)?;
            for n in &self.noises {
                if f.degree_in(&n.var) > n.multilinearity {
                    return Err(Error::Invalid(format!(
                        "noise '{}' appears with degree {} > declared multilinearity {}",
                        n.var,
                        f.degree_in(&n.var),
                        n.multilinearity
                    )));
                }
            }
        }
        for j in &self.jets {
            let comp = self.component(&j.component)?;
            let base = match j.term {
                Some(i) => comp.rhs.get(i).cloned().ok_or_else(|| {
                    Error::Invalid(format!("jet '{}' refers to missing term {}", j.edge, i))
                })?,
                None => self.rhs(&j.component)?,
            };
            let mut slot_vars = Vec::new();
            for s in &j.slots {
                let v = self
                    .kernels
                    .iter()
                    .find(|k| &k.edge == s)
                    .map(|k| k.var.clone())
                    .or_else(|| self.noises.iter().find(|n| &n.edge == s).map(|n| n.var.clone()))
                    .ok_or_else(|| Error::Unknown(format!("slot edge '{s}' in jet '{}'", j.edge)))?;
                slot_vars.push(v);
            }
            if base.derivative_multi(&slot_vars).is_zero() {
                return Err(Error::Invalid(format!(
                    "jet '{}' has vanishing derivative D^σF",
                    j.edge
                )));
            }
        }
        Ok(())
    }
}

/// `D^σ F` for a list of indeterminates.
pub fn formal_derivative(spec: &EquationSpec, f: &Poly, sigma: &[String]) -> Result<Poly> {
    let vars = spec.vars();
    for s in sigma {
        if !vars.contains(s) {
            return Err(Error::Unknown(format!("indeterminate '{s}'")));
        }
    }
    Ok(f.derivative_multi(sigma))
}

/// Result of `D_τF` for a single tree.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TreeCounterterm {
    /// `D_τF` without the character value (includes `1/S(τ)`).
    pub operator: Poly,
    /// `⟨D_τF, g(τ)⟩` after contractions.
    pub term: Poly,
    /// Set when some node's derivative vanishes.
    pub zero_reason: Option<String>,
}

fn edge_var(alphabet: &Alphabet, e: usize) -> Result<String> {
    alphabet
        .edge(e)
        .var
        .clone()
        .ok_or_else(|| Error::Invalid(format!("edge '{}' has no indeterminate", alphabet.name(e))))
}

/// `⟨D_τF^𝔱, g⟩ = g · ∏_n D^{𝔫(n)}F^{𝔢(n↓)₊} / S_n(τ)`, with the root
/// factor taken from the component `target`.
pub fn counterterm_for_tree(spec: &EquationSpec, alphabet: &Alphabet, tau: &TypedTree, target: &str, g: &Poly) -> Result<TreeCounterterm> {
    let s = tau.symmetry_factors();
    let mut op = Poly::one();
    let mut zero_reason = None;
    for n in 0..tau.num_nodes() {
        if tau.is_leaf(n) {
            continue;
        }
        let comp = if n == 0 {
            target.to_string()
        } else {
            let k = tau.edge_type(n);
            let l = alphabet.plus_label(k).ok_or_else(|| {
                Error::Invalid(format!("node above non-kernel edge '{}'", alphabet.name(k)))
            })?;
            alphabet.labels.name(l).to_string()
        };
        let mut sigma = Vec::new();
        for &c in tau.children(n) {
            let k = tau.edge_type(c);
            if alphabet.class(k) == EdgeClass::Zero {
                return Err(Error::Invalid("counterterm trees must not contain jet edges".into()));
            }
            sigma.push(edge_var(alphabet, k)?);
        }
        let d = formal_derivative(spec, &spec.rhs(&comp)?, &sigma)?;
        if d.is_zero() && zero_reason.is_none() {
            zero_reason = Some(format!("D^σF^{comp} vanishes at node {n} (σ = {})", sigma.join(",")));
        }
        let inv = BigRational::new(BigInt::from(1), BigInt::from(s[n]));
        op = &op * &d.scale(&inv);
    }
    let mut term = &op * g;
    for c in &spec.contractions {
        term = term.contract(&c.a, &c.b, &c.result);
    }
    Ok(TreeCounterterm { operator: op, term, zero_reason })
}

/// One counterterm contribution in the renormalised equation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Contribution {
    pub tree: String,
    pub component: String,
    pub value: Poly,
    pub operator: Poly,
    pub term: Poly,
    pub zero_reason: Option<String>,
}

/// The renormalised right-hand sides, per component, with contributions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RenormalisedEquation {
    pub components: Vec<(String, Poly)>,
    pub contributions: Vec<Contribution>,
}

/// `F^𝔱 + Σ_τ ⟨D_τF^𝔱, g(τ)⟩` for each component, with `g` given as a list
/// of (tree, value) pairs on uncoloured negative trees.
pub fn renormalized_equation(spec: &EquationSpec, alphabet: &Alphabet, g: &[(TypedTree, Poly)]) -> Result<RenormalisedEquation> {
    let mut components = Vec::new();
    let mut contributions = Vec::new();
    for c in &spec.components {
        let f = spec.rhs(&c.label)?;
        let args = f.variables();
        let mut total = f.clone();
        for (tau, value) in g {
            if value.is_zero() {
                continue;
            }
            for &ch in tau.children(0) {
                let v = edge_var(alphabet, tau.edge_type(ch))?;
                if !args.contains(&v) {
                    return Err(Error::Precondition(format!(
                        "nonzero value on tree {} whose root slot '{v}' is not an argument of F^{}",
                        tau.format(alphabet),
                        c.label
                    )));
                }
            }
            let ct = counterterm_for_tree(spec, alphabet, tau, &c.label, value)?;
            total = &total + &ct.term;
            contributions.push(Contribution {
                tree: tau.format(alphabet),
                component: c.label.clone(),
                value: value.clone(),
                operator: ct.operator,
                term: ct.term,
                zero_reason: ct.zero_reason,
            });
        }
        components.push((c.label.clone(), total));
    }
    Ok(RenormalisedEquation { components, contributions })
}
