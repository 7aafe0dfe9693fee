//! Symmetrical (Set-Set) Hilbert calculi: built-in rule sets, rule instances,
//! analytic proof search with derivation trees and countermodel extraction,
//! soundness auditing, the disjunctive lifting to Set-Fmla calculi and a
//! bounded forward-chaining prover for the lifted calculi.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::algebra::Assignment;
use crate::error::{Error, Result};
use crate::matrix::{sset_consequence, valuations, Matrix, Verdict};
use crate::syntax::{
    generalized_subformulas, parse_formula, render_set, subformulas, Formula, Signature,
    Substitution,
};

/// An inference rule `antecedent / succedent`. Both sides keep their listed
/// order, without duplicates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub name: String,
    pub antecedent: Vec<Formula>,
    pub succedent: Vec<Formula>,
}

fn dedup(v: Vec<Formula>) -> Vec<Formula> {
    let mut out: Vec<Formula> = Vec::with_capacity(v.len());
    for f in v {
        if !out.contains(&f) {
            out.push(f);
        }
    }
    out
}

impl Rule {
    pub fn new(name: impl Into<String>, antecedent: Vec<Formula>, succedent: Vec<Formula>) -> Rule {
        Rule {
            name: name.into(),
            antecedent: dedup(antecedent),
            succedent: dedup(succedent),
        }
    }

    /// Parses both sides as comma-separated lists.
    pub fn parse(name: &str, antecedent: &str, succedent: &str) -> Result<Rule> {
        let sig = Signature::full();
        Ok(Rule::new(
            name,
            crate::syntax::parse_formula_list(antecedent, &sig)?,
            crate::syntax::parse_formula_list(succedent, &sig)?,
        ))
    }

    pub fn props(&self) -> BTreeSet<Arc<str>> {
        self.antecedent
            .iter()
            .chain(&self.succedent)
            .flat_map(Formula::props)
            .collect()
    }

    pub fn apply(&self, sigma: &Substitution) -> Rule {
        Rule::new(
            self.name.clone(),
            self.antecedent.iter().map(|f| f.apply(sigma)).collect(),
            self.succedent.iter().map(|f| f.apply(sigma)).collect(),
        )
    }

    pub fn is_set_fmla(&self) -> bool {
        self.succedent.len() == 1
    }

    pub fn to_json(&self) -> Value {
        let strs = |v: &[Formula]| v.iter().map(Formula::to_string).collect::<Vec<_>>();
        json!({
            "name": self.name,
            "antecedent": strs(&self.antecedent),
            "succedent": strs(&self.succedent),
        })
    }
}

fn side(v: &[Formula]) -> String {
    if v.is_empty() {
        "∅".into()
    } else {
        render_set(v)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} / {}", self.name, side(&self.antecedent), side(&self.succedent))
    }
}

/// An ordered list of rules with an optional analyticity certificate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Calculus {
    pub rules: Vec<Rule>,
    pub analytic_over: Option<Vec<Formula>>,
}

impl Calculus {
    pub fn new(rules: Vec<Rule>, analytic_over: Option<Vec<Formula>>) -> Result<Calculus> {
        let mut names = HashSet::new();
        for r in &rules {
            if !names.insert(r.name.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate rule name `{}`", r.name)));
            }
        }
        Ok(Calculus {
            rules,
            analytic_over,
        })
    }

    pub fn rule(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.name == name)
    }

    pub fn props(&self) -> BTreeSet<Arc<str>> {
        self.rules.iter().flat_map(Rule::props).collect()
    }

    pub fn to_json(&self) -> Value {
        let mut doc = json!({ "rules": self.rules.iter().map(Rule::to_json).collect::<Vec<_>>() });
        if let Some(xi) = &self.analytic_over {
            doc["analytic_over"] = json!(xi.iter().map(Formula::to_string).collect::<Vec<_>>());
        }
        doc
    }

    pub fn from_json(doc: &Value) -> Result<Calculus> {
        let fmt = |m: &str| Error::Format(m.to_string());
        let sig = Signature::full();
        let list = |v: Option<&Value>, what: &str| -> Result<Vec<Formula>> {
            v.and_then(Value::as_array)
                .ok_or_else(|| Error::Format(format!("`{what}` must be an array")))?
                .iter()
                .map(|s| {
                    let s = s.as_str().ok_or_else(|| fmt("formulas must be strings"))?;
                    parse_formula(s, &sig)
                })
                .collect()
        };
        let rules = doc
            .get("rules")
            .and_then(Value::as_array)
            .ok_or_else(|| fmt("`rules` must be an array"))?
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let name = r
                    .get("name")
                    .and_then(Value::as_str)
                    .map(str::to_string)
                    .unwrap_or_else(|| format!("r{}", i + 1));
                Ok(Rule::new(
                    name,
                    list(r.get("antecedent"), "antecedent")?,
                    list(r.get("succedent"), "succedent")?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let xi = match doc.get("analytic_over") {
            None | Some(Value::Null) => None,
            v => Some(list(v, "analytic_over")?),
        };
        Calculus::new(rules, xi)
    }
}

impl fmt::Display for Calculus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        if let Some(xi) = &self.analytic_over {
            writeln!(f, "analytic over: {}", render_set(xi))?;
        }
        Ok(())
    }
}

fn rules(prefix: &str, table: &[(&str, &str)]) -> Vec<Rule> {
    table
        .iter()
        .enumerate()
        .map(|(i, (a, s))| {
            Rule::parse(&format!("{prefix}.r{}", i + 1), a, s).expect("built-in rule parses")
        })
        .collect()
}

fn rb_rules() -> Vec<Rule> {
    rules(
        "RB",
        &[
            ("", "1"),
            ("~1", ""),
            ("", "~0"),
            ("0", ""),
            ("p", "~~p"),
            ("~~p", "p"),
            ("p & q", "p"),
            ("p & q", "q"),
            ("p, q", "p & q"),
            ("~p", "~(p & q)"),
            ("~q", "~(p & q)"),
            ("~(p & q)", "~p, ~q"),
            ("p", "p | q"),
            ("q", "p | q"),
            ("p | q", "p, q"),
            ("~p, ~q", "~(p | q)"),
            ("~(p | q)", "~p"),
            ("~(p | q)", "~q"),
        ],
    )
}

fn rcirc_rules() -> Vec<Rule> {
    rules(
        "Rcirc",
        &[
            ("", "*0"),
            ("", "*1"),
            ("", "**p"),
            ("*p", "*~p"),
            ("*~p", "*p"),
            ("*p", "p, ~p"),
            ("*p, p, ~p", ""),
            ("*p", "*(p & q), p"),
            ("*q", "*(p & q), q"),
            ("*(p & q), q", "*p"),
            ("*(p & q), p", "*q"),
            ("*p, *q", "*(p & q)"),
            ("*(p & q)", "*p, *q"),
            ("*p, *q", "*(p | q)"),
            ("*(p | q)", "*p, *q"),
            ("*p, p", "*(p | q)"),
            ("*q, q", "*(p | q)"),
            ("*(p | q)", "*p, q"),
            ("*(p | q)", "*q, p"),
        ],
    )
}

fn single(name: &str, a: &str, s: &str) -> Vec<Rule> {
    vec![Rule::parse(name, a, s).expect("built-in rule parses")]
}

/// Separators `{p, ~p}`.
pub fn separators_s() -> Vec<Formula> {
    let p = Formula::var("p");
    vec![p.clone(), Formula::neg(p)]
}

/// Separators `{p, ~p, *p, ~*p}`.
pub fn separators_s_circ() -> Vec<Formula> {
    let p = Formula::var("p");
    let mut out = separators_s();
    out.push(Formula::circ(p.clone()));
    out.push(Formula::neg(Formula::circ(p)));
    out
}

/// Built-in calculi, combinable with `+`: `RB`, `Rcirc`, `DS`, `EM`, `K1`,
/// `Kleq`. `RB` carries the certificate `{p,~p}`, `RB+Rcirc` carries
/// `{p,~p,*p,~*p}`.
pub fn builtin_calculus(name: &str) -> Result<Calculus> {
    let mut all = Vec::new();
    let parts: Vec<&str> = name.split('+').map(str::trim).collect();
    for part in &parts {
        let rs = match *part {
            "RB" => rb_rules(),
            "Rcirc" => rcirc_rules(),
            "DS" => single("DS", "p & (~p | q)", "q"),
            "EM" => single("EM", "", "p | ~p"),
            "K1" => single("K1", "(p & ~p) | q", "q"),
            "Kleq" => single("Kleq", "(p & ~p) | r", "q | ~q | r"),
            other => return Err(Error::UnknownName(format!("calculus {other}"))),
        };
        all.extend(rs);
    }
    let xi = match parts.as_slice() {
        ["RB"] => Some(separators_s()),
        ["RB", "Rcirc"] | ["Rcirc", "RB"] => Some(separators_s_circ()),
        _ => None,
    };
    Calculus::new(all, xi)
}

pub const BUILTIN_CALCULI: [&str; 7] = ["RB", "Rcirc", "RB+Rcirc", "DS", "EM", "K1", "Kleq"];

/// Extends `sigma` so that `pattern` instantiates to `target`.
pub fn match_formula(pattern: &Formula, target: &Formula, sigma: &mut Substitution) -> bool {
    match pattern {
        Formula::Var(v) => match sigma.get(v) {
            Some(bound) => bound == target,
            None => {
                sigma.insert(v.clone(), target.clone());
                true
            }
        },
        Formula::App(c, args) => match target {
            Formula::App(d, targs) if c == d => args
                .iter()
                .zip(targs.iter())
                .all(|(a, t)| match_formula(a, t, sigma)),
            _ => false,
        },
    }
}

fn all_bound(f: &Formula, sigma: &Substitution) -> bool {
    f.props().iter().all(|v| sigma.get(v).is_some())
}

/// Substitutions sending every formula of `formulas` into `pool`.
fn embeddings(formulas: &[&Formula], pool: &[Formula], member: &dyn Fn(&Formula) -> bool) -> Vec<Substitution> {
    let mut ordered: Vec<&Formula> = formulas.to_vec();
    ordered.sort_by_key(|f| std::cmp::Reverse(f.props().len()));
    let mut out = Vec::new();
    fn go(
        rest: &[&Formula],
        sigma: Substitution,
        pool: &[Formula],
        member: &dyn Fn(&Formula) -> bool,
        out: &mut Vec<Substitution>,
    ) {
        let Some((first, rest)) = rest.split_first() else {
            out.push(sigma);
            return;
        };
        if all_bound(first, &sigma) {
            if member(&first.apply(&sigma)) {
                go(rest, sigma, pool, member, out);
            }
            return;
        }
        for target in pool {
            let mut s = sigma.clone();
            if match_formula(first, target, &mut s) {
                go(rest, s, pool, member, out);
            }
        }
    }
    go(&ordered, Substitution::new(), pool, member, &mut out);
    out.sort();
    out.dedup();
    out
}

/// Instances of `r` whose antecedent and succedent lie inside `lambda`,
/// ordered by the substituted values in variable order.
pub fn rule_instances(r: &Rule, lambda: &BTreeSet<Formula>) -> Vec<(Substitution, Rule)> {
    let pool: Vec<Formula> = lambda.iter().cloned().collect();
    let formulas: Vec<&Formula> = r.antecedent.iter().chain(&r.succedent).collect();
    embeddings(&formulas, &pool, &|f| lambda.contains(f))
        .into_iter()
        .map(|s| {
            let inst = r.apply(&s);
            (s, inst)
        })
        .collect()
}

/// Node label: the formulas added by the parent expansion, or the
/// discontinuation mark.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeLabel {
    Added(Vec<Formula>),
    Star,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub id: usize,
    pub label: NodeLabel,
    /// Rule name and substitution used to expand this node, if expanded.
    pub expansion: Option<(String, Substitution)>,
    pub children: Vec<usize>,
}

/// A derivation tree, stored as an arena rooted at node 0. The root's label
/// holds the premises.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivationTree {
    pub nodes: Vec<Node>,
}

impl DerivationTree {
    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    /// Every root-to-leaf sequence of node ids.
    pub fn branches(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut stack = vec![vec![0usize]];
        while let Some(path) = stack.pop() {
            let last = *path.last().expect("nonempty");
            let kids = &self.nodes[last].children;
            if kids.is_empty() {
                out.push(path);
            } else {
                for &k in kids.iter().rev() {
                    let mut p = path.clone();
                    p.push(k);
                    stack.push(p);
                }
            }
        }
        out
    }

    /// Full label of a node: the union of deltas on its path, or `None` for ★.
    pub fn branch_label(&self, path: &[usize]) -> Option<BTreeSet<Formula>> {
        let mut out = BTreeSet::new();
        for &id in path {
            match &self.nodes[id].label {
                NodeLabel::Star => return None,
                NodeLabel::Added(fs) => out.extend(fs.iter().cloned()),
            }
        }
        Some(out)
    }

    /// Rule names used in pre-order.
    pub fn rule_sequence(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut stack = vec![0];
        while let Some(id) = stack.pop() {
            let n = &self.nodes[id];
            if let Some((name, _)) = &n.expansion {
                out.push(name.clone());
            }
            stack.extend(n.children.iter().rev());
        }
        out
    }

    /// Indented text rendering.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_node(0, 0, &mut out);
        out
    }

    fn render_node(&self, id: usize, indent: usize, out: &mut String) {
        let n = &self.nodes[id];
        let pad = "  ".repeat(indent);
        match &n.label {
            NodeLabel::Star => out.push_str(&format!("{pad}[{id}] ★\n")),
            NodeLabel::Added(fs) if id == 0 => {
                out.push_str(&format!("{pad}[{id}] {}\n", side(fs)));
            }
            NodeLabel::Added(fs) => out.push_str(&format!("{pad}[{id}] + {}\n", render_set(fs))),
        }
        if let Some((rule, sigma)) = &n.expansion {
            out.push_str(&format!("{pad}  by {rule} {sigma}\n"));
        }
        for &c in &n.children {
            self.render_node(c, indent + 1, out);
        }
    }

    pub fn to_json(&self) -> Value {
        self.node_json(0)
    }

    fn node_json(&self, id: usize) -> Value {
        let n = &self.nodes[id];
        let label = match &n.label {
            NodeLabel::Star => json!("★"),
            NodeLabel::Added(fs) => json!(fs.iter().map(Formula::to_string).collect::<Vec<_>>()),
        };
        let mut doc = json!({ "id": id, "label": label });
        if let Some((rule, sigma)) = &n.expansion {
            doc["rule"] = json!(rule);
            let sub: serde_json::Map<String, Value> = sigma
                .iter()
                .map(|(v, f)| (v.to_string(), json!(f.to_string())))
                .collect();
            doc["substitution"] = Value::Object(sub);
        }
        doc["children"] = json!(n.children.iter().map(|&c| self.node_json(c)).collect::<Vec<_>>());
        doc
    }
}

/// Checks a tree against the calculus independently of the search: the root
/// holds the premises, every expansion is a rule instance whose antecedent is
/// in the node label and whose children add exactly the instantiated
/// succedent (or one ★), and every leaf is ★ or meets `psi`.
pub fn validate_tree(
    tree: &DerivationTree,
    calculus: &Calculus,
    phi: &[Formula],
    psi: &[Formula],
) -> std::result::Result<(), String> {
    let root = tree.nodes.first().ok_or("empty tree")?;
    let want: BTreeSet<&Formula> = phi.iter().collect();
    match &root.label {
        NodeLabel::Added(fs) if fs.iter().collect::<BTreeSet<_>>() == want => {}
        _ => return Err("root label differs from the premises".into()),
    }
    let mut stack: Vec<(usize, BTreeSet<Formula>)> = vec![(0, phi.iter().cloned().collect())];
    let mut visited = 0;
    while let Some((id, label)) = stack.pop() {
        visited += 1;
        if visited > tree.nodes.len() {
            return Err("tree contains a cycle".into());
        }
        let node = tree.nodes.get(id).ok_or_else(|| format!("dangling node {id}"))?;
        match &node.expansion {
            None => {
                if !node.children.is_empty() {
                    return Err(format!("node {id} has children but no rule"));
                }
                if !psi.iter().any(|f| label.contains(f)) {
                    return Err(format!("leaf {id} is not closed"));
                }
            }
            Some((name, sigma)) => {
                let rule = calculus
                    .rule(name)
                    .ok_or_else(|| format!("node {id}: unknown rule {name}"))?;
                let inst = rule.apply(sigma);
                if let Some(missing) = inst.antecedent.iter().find(|f| !label.contains(f)) {
                    return Err(format!("node {id}: antecedent formula {missing} not in label"));
                }
                let kids: Vec<&Node> = node
                    .children
                    .iter()
                    .map(|&c| tree.nodes.get(c).ok_or_else(|| format!("dangling node {c}")))
                    .collect::<std::result::Result<_, _>>()?;
                if inst.succedent.is_empty() {
                    if kids.len() != 1 || kids[0].label != NodeLabel::Star || !kids[0].children.is_empty() {
                        return Err(format!("node {id}: empty succedent needs one ★ leaf"));
                    }
                    continue;
                }
                if kids.len() != inst.succedent.len() {
                    return Err(format!("node {id}: wrong number of children"));
                }
                for (kid, f) in kids.iter().zip(&inst.succedent) {
                    if kid.label != NodeLabel::Added(vec![f.clone()]) {
                        return Err(format!("node {}: expected delta {f}", kid.id));
                    }
                    let mut l = label.clone();
                    l.insert(f.clone());
                    stack.push((kid.id, l));
                }
            }
        }
    }
    Ok(())
}

/// A saturated branch that does not meet the succedent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpenBranch {
    pub label: Vec<Formula>,
    pub steps: Vec<(String, Substitution)>,
    pub lambda: Vec<Formula>,
    pub premises: Vec<Formula>,
    pub conclusions: Vec<Formula>,
}

impl OpenBranch {
    pub fn render(&self) -> String {
        let mut out = format!("saturated label: {}\n", side(&self.label));
        for (rule, sigma) in &self.steps {
            out.push_str(&format!("  by {rule} {sigma}\n"));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let strs = |v: &[Formula]| v.iter().map(Formula::to_string).collect::<Vec<_>>();
        json!({
            "label": strs(&self.label),
            "steps": self.steps.iter().map(|(r, s)| json!({"rule": r, "substitution": s.to_string()})).collect::<Vec<_>>(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProofResult {
    Closed(DerivationTree),
    Open(OpenBranch),
}

impl ProofResult {
    pub fn is_closed(&self) -> bool {
        matches!(self, ProofResult::Closed(_))
    }
}

#[derive(Clone, Debug)]
struct Instance {
    rule: usize,
    sigma: Substitution,
    antecedent: Vec<usize>,
    succedent: Vec<usize>,
}

#[derive(Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Bits {
        Bits(vec![0; n.div_ceil(64)])
    }
    fn get(&self, i: usize) -> bool {
        self.0[i / 64] & (1 << (i % 64)) != 0
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
}

struct Search<'a> {
    calculus: &'a Calculus,
    lambda: Vec<Formula>,
    instances: Vec<Instance>,
    goal: Bits,
    nodes: Vec<Node>,
}

impl Search<'_> {
    /// Expands the node `id` with full label `label`; returns the open branch
    /// label and its steps if some branch below saturates without closing.
    fn expand(&mut self, id: usize, label: &Bits) -> Option<(Bits, Vec<(String, Substitution)>)> {
        if (0..self.lambda.len()).any(|i| label.get(i) && self.goal.get(i)) {
            return None;
        }
        // Prefer instances whose children all close at once, then those that
        // close the most children, then list order.
        let mut best: Option<(usize, (bool, usize))> = None;
        for (k, inst) in self.instances.iter().enumerate() {
            if !inst.antecedent.iter().all(|&i| label.get(i)) {
                continue;
            }
            if inst.succedent.iter().any(|&i| label.get(i)) {
                continue;
            }
            let closed = inst.succedent.iter().filter(|&&i| self.goal.get(i)).count();
            let key = (closed == inst.succedent.len(), closed);
            if best.is_none_or(|(_, b)| key > b) {
                best = Some((k, key));
            }
        }
        let Some((k, _)) = best else {
            return Some((label.clone(), Vec::new()));
        };
        let inst = self.instances[k].clone();
        let step = (self.calculus.rules[inst.rule].name.clone(), inst.sigma.clone());
        self.nodes[id].expansion = Some(step.clone());
        if inst.succedent.is_empty() {
            let child = self.push(NodeLabel::Star);
            self.nodes[id].children.push(child);
            return None;
        }
        for &f in &inst.succedent {
            let child = self.push(NodeLabel::Added(vec![self.lambda[f].clone()]));
            self.nodes[id].children.push(child);
            let mut l = label.clone();
            l.set(f);
            if let Some((open, mut steps)) = self.expand(child, &l) {
                steps.insert(0, step);
                return Some((open, steps));
            }
        }
        None
    }

    fn push(&mut self, label: NodeLabel) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node {
            id,
            label,
            expansion: None,
            children: Vec::new(),
        });
        id
    }
}

/// Analytic proof search over `Λ = generalized_subformulas(Φ, Ψ, Ξ)`.
///
/// Each node is expanded by one applicable instance: its antecedent lies in
/// the label and no succedent formula does. The search stops at the first
/// saturated branch that does not meet `Ψ`.
pub fn prove_analytic(
    calculus: &Calculus,
    xi: &[Formula],
    phi: &[Formula],
    psi: &[Formula],
) -> ProofResult {
    let phi = dedup(phi.to_vec());
    let psi = dedup(psi.to_vec());
    let lambda_set = generalized_subformulas(&phi, &psi, xi);
    let lambda: Vec<Formula> = lambda_set.iter().cloned().collect();
    let index: HashMap<&Formula, usize> = lambda.iter().enumerate().map(|(i, f)| (f, i)).collect();
    let mut instances = Vec::new();
    for (ri, rule) in calculus.rules.iter().enumerate() {
        for (sigma, inst) in rule_instances(rule, &lambda_set) {
            instances.push(Instance {
                rule: ri,
                sigma,
                antecedent: inst.antecedent.iter().map(|f| index[f]).collect(),
                succedent: inst.succedent.iter().map(|f| index[f]).collect(),
            });
        }
    }
    let mut goal = Bits::new(lambda.len());
    for f in &psi {
        goal.set(index[f]);
    }
    let mut start = Bits::new(lambda.len());
    for f in &phi {
        start.set(index[f]);
    }
    let mut search = Search {
        calculus,
        lambda,
        instances,
        goal,
        nodes: Vec::new(),
    };
    let root = search.push(NodeLabel::Added(phi.clone()));
    match search.expand(root, &start) {
        None => ProofResult::Closed(DerivationTree {
            nodes: search.nodes,
        }),
        Some((label, steps)) => ProofResult::Open(OpenBranch {
            label: (0..search.lambda.len())
                .filter(|&i| label.get(i))
                .map(|i| search.lambda[i].clone())
                .collect(),
            steps,
            lambda: search.lambda,
            premises: phi,
            conclusions: psi,
        }),
    }
}

/// A valuation refuting the open statement, consistent with the branch:
/// first one designating exactly the label within `Λ`, otherwise one that
/// designates the label and no conclusion.
pub fn countermodel_from_open(open: &OpenBranch, m: &Matrix) -> Option<Assignment> {
    let vars: Vec<Arc<str>> = open.lambda.iter().flat_map(Formula::props).collect::<BTreeSet<_>>().into_iter().collect();
    let in_label: BTreeSet<&Formula> = open.label.iter().collect();
    let val = |h: &Assignment, f: &Formula| m.algebra.evaluate(f, h).ok().map(|v| m.is_designated(v));
    let exact = valuations(m.algebra.size(), &vars).find(|h| {
        open.lambda
            .iter()
            .all(|f| val(h, f) == Some(in_label.contains(f)))
    });
    exact.or_else(|| {
        valuations(m.algebra.size(), &vars).find(|h| {
            open.label.iter().all(|f| val(h, f) == Some(true))
                && open.conclusions.iter().all(|f| val(h, f) == Some(false))
        })
    })
}

/// Whether `h` designates every premise and no conclusion.
pub fn refutes(m: &Matrix, h: &Assignment, phi: &[Formula], psi: &[Formula]) -> bool {
    let des = |f: &Formula| m.algebra.evaluate(f, h).map(|v| m.is_designated(v)).ok();
    phi.iter().all(|f| des(f) == Some(true)) && psi.iter().all(|f| des(f) == Some(false))
}

/// `r` is sound in `m` when its antecedent entails its succedent.
pub fn soundness(r: &Rule, m: &Matrix) -> Result<Verdict> {
    sset_consequence(std::slice::from_ref(m), &r.antecedent, &r.succedent)
}

/// First variable among `r, s, t, u, p0, p1, ...` not in `avoid`.
pub fn lift_variable(avoid: &BTreeSet<Arc<str>>) -> Arc<str> {
    ["r", "s", "t", "u"]
        .into_iter()
        .find(|v| !avoid.contains(*v))
        .map(Arc::from)
        .unwrap_or_else(|| crate::syntax::fresh_variable(avoid))
}

/// The Set-Fmla calculus `R^∨`: three structural disjunction rules and one
/// lifted rule per rule of `R`.
pub fn lift(calculus: &Calculus) -> Result<Calculus> {
    let p0 = Formula::Var(lift_variable(&calculus.props()));
    let mut out = vec![
        Rule::parse("Vintro", "p", "p | q")?,
        Rule::parse("Vcomm", "p | q", "q | p")?,
        Rule::parse("Vassoc", "p | (q | r)", "(p | q) | r")?,
    ];
    for r in &calculus.rules {
        let name = format!("{}^v", r.name);
        let lifted = if r.antecedent.is_empty() && r.succedent.len() == 1 {
            Rule::new(name, vec![], r.succedent.clone())
        } else {
            let ante = r.antecedent.iter().map(|f| Formula::or(f.clone(), p0.clone())).collect();
            let conc = if r.succedent.is_empty() {
                p0.clone()
            } else {
                Formula::or(Formula::disjunction(&r.succedent), p0.clone())
            };
            Rule::new(name, ante, vec![conc])
        };
        out.push(lifted);
    }
    Calculus::new(out, None)
}

/// Justification of a derived formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Justification {
    Premise,
    Rule {
        name: String,
        substitution: Substitution,
        from: Vec<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivationStep {
    pub formula: Formula,
    pub justification: Justification,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SfmlaResult {
    /// Steps in dependency order; the last one is the goal.
    Proof(Vec<DerivationStep>),
    Unknown,
}

/// Stops forward chaining after this many facts.
pub const FACT_LIMIT: usize = 10_000;

/// Bounded forward chaining for Set-Fmla calculi. Facts deeper than
/// `depth_bound` are discarded; variables occurring only in a conclusion range
/// over `sub(Φ ∪ {ψ}) ∪ {1, 0}`.
pub fn sfmla_prove(
    calculus: &Calculus,
    phi: &[Formula],
    psi: &Formula,
    depth_bound: usize,
) -> Result<SfmlaResult> {
    if let Some(r) = calculus.rules.iter().find(|r| !r.is_set_fmla()) {
        return Err(Error::NonSingletonSuccedent(r.name.clone()));
    }
    let mut universe = subformulas(phi.iter().chain(std::iter::once(psi)));
    universe.insert(Formula::top());
    universe.insert(Formula::bot());
    let universe: Vec<Formula> = universe.into_iter().collect();

    let mut facts: Vec<(Formula, Justification)> = Vec::new();
    let mut index = FactIndex::default();
    for f in phi {
        if !index.known.contains_key(f) {
            index.insert(f, facts.len());
            facts.push((f.clone(), Justification::Premise));
        }
    }
    let mut delta_start = 0;
    loop {
        if let Some(&goal) = index.known.get(psi) {
            return Ok(SfmlaResult::Proof(trace(&facts, goal)));
        }
        let frontier_end = facts.len();
        let mut fresh: Vec<(Formula, Justification)> = Vec::new();
        for rule in &calculus.rules {
            let conclusion = &rule.succedent[0];
            for sigma in fire(rule, &facts, &index, delta_start, frontier_end, &universe) {
                let c = conclusion.apply(&sigma);
                if c.depth() > depth_bound || index.known.contains_key(&c) {
                    continue;
                }
                let from: Vec<usize> = rule
                    .antecedent
                    .iter()
                    .map(|a| index.known[&a.apply(&sigma)])
                    .collect();
                index.insert(&c, facts.len() + fresh.len());
                fresh.push((
                    c,
                    Justification::Rule {
                        name: rule.name.clone(),
                        substitution: sigma,
                        from,
                    },
                ));
            }
        }
        if fresh.is_empty() {
            return Ok(SfmlaResult::Unknown);
        }
        delta_start = frontier_end;
        facts.extend(fresh);
        if facts.len() > FACT_LIMIT {
            return Ok(match index.known.get(psi) {
                Some(&g) => SfmlaResult::Proof(trace(&facts, g)),
                None => SfmlaResult::Unknown,
            });
        }
    }
}

/// Facts indexed by their right disjunct, for antecedents of the shape `φ | r`.
#[derive(Default)]
struct FactIndex {
    known: HashMap<Formula, usize>,
    by_right: HashMap<Formula, Vec<usize>>,
}

impl FactIndex {
    fn insert(&mut self, f: &Formula, id: usize) {
        self.known.insert(f.clone(), id);
        if let Formula::App(crate::syntax::Connective::Or, args) = f {
            self.by_right.entry(args[1].clone()).or_default().push(id);
        }
    }

    /// Fact ids in `lo..hi` that may match `pattern` under `sigma`.
    fn candidates(&self, pattern: &Formula, sigma: &Substitution, lo: usize, hi: usize) -> Vec<usize> {
        let in_range = |i: &usize| (lo..hi).contains(i);
        if all_bound(pattern, sigma) {
            return self.known.get(&pattern.apply(sigma)).copied().filter(in_range).into_iter().collect();
        }
        if let Formula::App(crate::syntax::Connective::Or, args) = pattern {
            if all_bound(&args[1], sigma) {
                return self
                    .by_right
                    .get(&args[1].apply(sigma))
                    .map(|v| v.iter().copied().filter(in_range).collect())
                    .unwrap_or_default();
            }
        }
        (lo..hi).collect()
    }
}

/// Substitutions firing `rule` with at least one antecedent among the facts
/// `delta_start..end` (any fact below `end` for the others). Axioms fire only
/// in the first round.
fn fire(
    rule: &Rule,
    facts: &[(Formula, Justification)],
    index: &FactIndex,
    delta_start: usize,
    end: usize,
    universe: &[Formula],
) -> Vec<Substitution> {
    let mut out = BTreeSet::new();
    let free: Vec<Arc<str>> = {
        let bound: BTreeSet<Arc<str>> = rule.antecedent.iter().flat_map(Formula::props).collect();
        rule.succedent[0].props().into_iter().filter(|v| !bound.contains(v)).collect()
    };
    let close = |sigma: Substitution, out: &mut BTreeSet<Substitution>| {
        for choice in crate::syntax::tuples(universe.len(), free.len()) {
            let mut s = sigma.clone();
            for (v, &i) in free.iter().zip(&choice) {
                s.insert(v.clone(), universe[i].clone());
            }
            out.insert(s);
        }
    };
    if rule.antecedent.is_empty() {
        if delta_start == 0 {
            close(Substitution::new(), &mut out);
        }
        return out.into_iter().collect();
    }
    for pivot in 0..rule.antecedent.len() {
        let order = std::iter::once(pivot).chain((0..rule.antecedent.len()).filter(|&i| i != pivot));
        let mut partial = vec![Substitution::new()];
        for i in order {
            let a = &rule.antecedent[i];
            let lo = if i == pivot { delta_start } else { 0 };
            let mut next = Vec::new();
            for s in &partial {
                for id in index.candidates(a, s, lo, end) {
                    let mut t = s.clone();
                    if match_formula(a, &facts[id].0, &mut t) {
                        next.push(t);
                    }
                }
            }
            partial = next;
            if partial.is_empty() {
                break;
            }
        }
        for s in partial {
            close(s, &mut out);
        }
    }
    out.into_iter().collect()
}

fn trace(facts: &[(Formula, Justification)], goal: usize) -> Vec<DerivationStep> {
    let mut needed = BTreeSet::new();
    let mut stack = vec![goal];
    while let Some(i) = stack.pop() {
        if needed.insert(i) {
            if let Justification::Rule { from, .. } = &facts[i].1 {
                stack.extend(from.iter().copied());
            }
        }
    }
    let renumber: BTreeMap<usize, usize> = needed.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    needed
        .iter()
        .map(|&i| {
            let (f, j) = &facts[i];
            let justification = match j {
                Justification::Premise => Justification::Premise,
                Justification::Rule {
                    name,
                    substitution,
                    from,
                } => Justification::Rule {
                    name: name.clone(),
                    substitution: substitution.clone(),
                    from: from.iter().map(|x| renumber[x]).collect(),
                },
            };
            DerivationStep {
                formula: f.clone(),
                justification,
            }
        })
        .collect()
}

/// Checks a Set-Fmla derivation step by step.
pub fn validate_derivation(
    calculus: &Calculus,
    phi: &[Formula],
    steps: &[DerivationStep],
) -> std::result::Result<(), String> {
    for (k, step) in steps.iter().enumerate() {
        match &step.justification {
            Justification::Premise => {
                if !phi.contains(&step.formula) {
                    return Err(format!("step {k}: {} is not a premise", step.formula));
                }
            }
            Justification::Rule {
                name,
                substitution,
                from,
            } => {
                let rule = calculus.rule(name).ok_or_else(|| format!("step {k}: unknown rule {name}"))?;
                let inst = rule.apply(substitution);
                if inst.succedent != vec![step.formula.clone()] {
                    return Err(format!("step {k}: conclusion mismatch"));
                }
                if from.iter().any(|&i| i >= k) {
                    return Err(format!("step {k}: forward reference"));
                }
                let cited: Vec<&Formula> = from.iter().map(|&i| &steps[i].formula).collect();
                if inst.antecedent.iter().any(|a| !cited.contains(&a)) {
                    return Err(format!("step {k}: antecedent not cited"));
                }
            }
        }
    }
    Ok(())
}

pub fn render_derivation(steps: &[DerivationStep]) -> String {
    let mut out = String::new();
    for (k, s) in steps.iter().enumerate() {
        let why = match &s.justification {
            Justification::Premise => "premise".to_string(),
            Justification::Rule {
                name,
                substitution,
                from,
            } => {
                let from: Vec<String> = from.iter().map(|i| i.to_string()).collect();
                format!("{name} {substitution} from [{}]", from.join(", "))
            }
        };
        out.push_str(&format!("{k:>3}. {}    ({why})\n", s.formula));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula_list;

    fn fs(s: &str) -> Vec<Formula> {
        parse_formula_list(s, &Signature::full()).unwrap()
    }

    fn f(s: &str) -> Formula {
        parse_formula(s, &Signature::full()).unwrap()
    }

    fn rbc() -> Calculus {
        builtin_calculus("RB+Rcirc").unwrap()
    }

    #[test]
    fn builtin_shapes() {
        let rb = builtin_calculus("RB").unwrap();
        assert_eq!(rb.rules.len(), 18);
        let r12 = rb.rule("RB.r12").unwrap();
        assert_eq!((r12.antecedent.clone(), r12.succedent.clone()), (fs("~(p & q)"), fs("~p, ~q")));
        let rc = builtin_calculus("Rcirc").unwrap();
        assert_eq!(rc.rules.len(), 19);
        let r7 = rc.rule("Rcirc.r7").unwrap();
        assert_eq!(r7.antecedent, fs("*p, p, ~p"));
        assert!(r7.succedent.is_empty());
        let em = builtin_calculus("EM").unwrap();
        assert!(em.rules[0].antecedent.is_empty() && em.rules[0].succedent == fs("p | ~p"));
        assert_eq!(rbc().rules.len(), 37);
        assert_eq!(rbc().analytic_over, Some(fs("p, ~p, *p, ~*p")));
        assert!(builtin_calculus("XX").is_err());
        assert!(builtin_calculus("RB+RB").is_err());
    }

    #[test]
    fn instance_examples() {
        let rb = builtin_calculus("RB").unwrap();
        let r5 = rb.rule("RB.r5").unwrap();
        let lambda: BTreeSet<Formula> = fs("q, ~~q").into_iter().collect();
        let inst = rule_instances(r5, &lambda);
        assert_eq!(inst.len(), 1);
        assert_eq!(inst[0].0, Substitution::from_pairs([("p", f("q"))]));

        let r7 = rbc().rule("Rcirc.r7").unwrap().clone();
        let lambda: BTreeSet<Formula> = fs("p, ~p, p & q").into_iter().collect();
        assert!(rule_instances(&r7, &lambda).is_empty());

        let r9 = rb.rule("RB.r9").unwrap();
        let lambda = subformulas([&f("p & q")]);
        let inst = rule_instances(r9, &lambda);
        assert!(inst.iter().any(|(s, _)| *s == Substitution::from_pairs([("p", f("p")), ("q", f("q"))])));
        for (_, i) in &inst {
            assert!(i.antecedent.iter().chain(&i.succedent).all(|x| lambda.contains(x)));
        }
    }

    #[test]
    fn figure_three_first_tree() {
        let psi = fs("p, ~p, ~*p");
        let calc = rbc();
        let ProofResult::Closed(tree) = prove_analytic(&calc, &separators_s_circ(), &[], &psi) else {
            panic!("expected a closed tree");
        };
        validate_tree(&tree, &calc, &[], &psi).unwrap();
        assert_eq!(tree.rule_sequence(), vec!["Rcirc.r3", "Rcirc.r6", "Rcirc.r6"]);
        let root = tree.root();
        assert_eq!(root.expansion.as_ref().unwrap().1, Substitution::from_pairs([("p", f("p"))]));
        let second = &tree.nodes[root.children[0]];
        assert_eq!(second.expansion.as_ref().unwrap().1, Substitution::from_pairs([("p", f("*p"))]));
    }

    #[test]
    fn figure_three_open_branch() {
        let psi = fs("p, ~*p");
        let ProofResult::Open(open) = prove_analytic(&rbc(), &separators_s_circ(), &[], &psi) else {
            panic!("expected an open branch");
        };
        for g in fs("**p, *p, ~p") {
            assert!(open.label.contains(&g), "{g}");
        }
        // *~p is not a generalized subformula here: ~p is not in sub(∅, {p, ~*p}).
        assert!(!open.lambda.contains(&f("*~p")));
        let m = Matrix::parse_address("PP6:up_b").unwrap();
        let h = countermodel_from_open(&open, &m).unwrap();
        assert_eq!(m.algebra.render_assignment(&h), "p=F^");
        assert!(refutes(&m, &h, &[], &psi));
    }

    #[test]
    fn pseudo_complement_not_implosive() {
        let psi = fs("p, *p & ~p");
        let ProofResult::Open(open) = prove_analytic(&rbc(), &separators_s_circ(), &[], &psi) else {
            panic!("expected an open branch");
        };
        let m = Matrix::parse_address("PP6:up_b").unwrap();
        let h = countermodel_from_open(&open, &m).unwrap();
        assert_eq!(m.algebra.render_assignment(&h), "p=f");
        assert!(refutes(&m, &h, &[], &psi));
        // *F^ & ~F^ = T^ is designated, so p=F^ is no countermodel here.
        let top: Assignment = [(Arc::from("p"), m.algebra.index_of("F^").unwrap())].into();
        assert!(!refutes(&m, &top, &[], &psi));
    }

    #[test]
    fn figure_two_trees() {
        let rb = builtin_calculus("RB").unwrap();
        let s = separators_s();
        let (a, b) = (fs("~(p & q)"), fs("~p | ~q"));
        let ProofResult::Closed(t) = prove_analytic(&rb, &s, &a, &b) else { panic!() };
        validate_tree(&t, &rb, &a, &b).unwrap();
        assert_eq!(t.rule_sequence(), vec!["RB.r12", "RB.r13", "RB.r14"]);
        let ProofResult::Closed(t) = prove_analytic(&rb, &s, &b, &a) else { panic!() };
        validate_tree(&t, &rb, &b, &a).unwrap();
        assert_eq!(t.rule_sequence(), vec!["RB.r15", "RB.r10", "RB.r11"]);
        let (c, d) = (fs("p | 0"), fs("p, q"));
        let ProofResult::Closed(t) = prove_analytic(&rb, &s, &c, &d) else { panic!() };
        validate_tree(&t, &rb, &c, &d).unwrap();
        assert_eq!(t.rule_sequence(), vec!["RB.r15", "RB.r4"]);
        let ProofResult::Closed(t) = prove_analytic(&rb, &s, &d, &c) else { panic!() };
        validate_tree(&t, &rb, &d, &c).unwrap();
        assert_eq!(t.rule_sequence(), vec!["RB.r13"]);
    }

    #[test]
    fn validation_rejects_tampering() {
        let psi = fs("p, ~p, ~*p");
        let calc = rbc();
        let ProofResult::Closed(tree) = prove_analytic(&calc, &separators_s_circ(), &[], &psi) else {
            panic!()
        };
        let mut bad = tree.clone();
        let leaf = bad.nodes.iter().position(|n| n.children.is_empty()).unwrap();
        bad.nodes[leaf].label = NodeLabel::Added(fs("q"));
        assert!(validate_tree(&bad, &calc, &[], &psi).is_err());
        assert!(validate_tree(&tree, &calc, &[], &fs("p")).is_err());
    }

    #[test]
    fn soundness_examples() {
        let pp6b = Matrix::parse_address("PP6:up_b").unwrap();
        let c = rbc();
        assert!(soundness(c.rule("Rcirc.r3").unwrap(), &pp6b).unwrap().holds());
        assert!(soundness(c.rule("Rcirc.r8").unwrap(), &pp6b).unwrap().holds());
        let dm4b = Matrix::parse_address("DM4:up_b").unwrap();
        let em = builtin_calculus("EM").unwrap();
        let v = soundness(&em.rules[0], &dm4b).unwrap();
        assert_eq!(dm4b.algebra.render_assignment(&v.countermodel().unwrap().valuation), "p=n");
    }

    #[test]
    fn lifting_examples() {
        let lifted = lift(&rbc()).unwrap();
        assert_eq!(lifted.rules.len(), 40);
        let r = |n: &str| lifted.rule(n).unwrap().clone();
        assert_eq!(r("Rcirc.r6^v"), Rule::parse("Rcirc.r6^v", "*p | r", "(p | ~p) | r").unwrap());
        assert_eq!(r("Rcirc.r7^v"), Rule::parse("Rcirc.r7^v", "*p | r, p | r, ~p | r", "r").unwrap());
        assert_eq!(r("Rcirc.r8^v"), Rule::parse("Rcirc.r8^v", "*p | r", "(*(p & q) | p) | r").unwrap());
        assert_eq!(r("Rcirc.r16^v"), Rule::parse("Rcirc.r16^v", "*p | r, p | r", "*(p | q) | r").unwrap());
        assert_eq!(r("Rcirc.r1^v"), Rule::parse("Rcirc.r1^v", "", "*0").unwrap());
        assert!(lifted.rules.iter().all(Rule::is_set_fmla));
        let kleq = lift(&builtin_calculus("Kleq").unwrap()).unwrap();
        assert_eq!(kleq.rule("Kleq^v").unwrap().succedent, fs("(q | ~q | r) | s"));
    }

    #[test]
    fn sfmla_examples() {
        let lifted = lift(&rbc()).unwrap();
        let SfmlaResult::Proof(steps) = sfmla_prove(&lifted, &fs("p & q"), &f("p"), 2).unwrap() else {
            panic!()
        };
        validate_derivation(&lifted, &fs("p & q"), &steps).unwrap();
        assert_eq!(steps.last().unwrap().formula, f("p"));
        assert!(steps.iter().any(|s| matches!(&s.justification, Justification::Rule { name, .. } if name == "RB.r7^v")));

        let prem = fs("*p, p, ~p");
        let SfmlaResult::Proof(steps) = sfmla_prove(&lifted, &prem, &f("q"), 2).unwrap() else {
            panic!()
        };
        validate_derivation(&lifted, &prem, &steps).unwrap();
        assert!(matches!(&steps.last().unwrap().justification, Justification::Rule { name, .. } if name == "Rcirc.r7^v"));

        let lrb = lift(&builtin_calculus("RB").unwrap()).unwrap();
        assert_eq!(sfmla_prove(&lrb, &[], &f("p | ~p"), 2).unwrap(), SfmlaResult::Unknown);
        assert!(matches!(
            sfmla_prove(&rbc(), &[], &f("p"), 2),
            Err(Error::NonSingletonSuccedent(_))
        ));
    }

    #[test]
    fn json_round_trip() {
        let c = rbc();
        assert_eq!(Calculus::from_json(&c.to_json()).unwrap(), c);
        let bad = json!({"rules": [{"name": "a", "antecedent": [], "succedent": []}, {"name": "a", "antecedent": [], "succedent": []}]});
        assert!(Calculus::from_json(&bad).is_err());
    }
}
