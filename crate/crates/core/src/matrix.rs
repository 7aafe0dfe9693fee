//! Logical matrices: Set-Set and Set-Fmla consequence, lattice filters,
//! order-preserving consequence, the perfection expansion of a matrix,
//! Leibniz reduction, logic-property checks and the DAT verifier.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde_json::Value;

use crate::algebra::{
    builtin, expand_with_perfection, is_homomorphism, next_permutation, Assignment, Equation,
    FiniteAlgebra, ENUMERATION_LIMIT,
};
use crate::error::{Error, Result};
use crate::syntax::{tuples, Connective, Formula, Signature};

/// An algebra with a set of designated elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    pub algebra: FiniteAlgebra,
    designated: Vec<bool>,
}

impl Matrix {
    pub fn new(algebra: FiniteAlgebra, designated: &[usize]) -> Result<Matrix> {
        let n = algebra.size();
        let mut flags = vec![false; n];
        for &d in designated {
            if d >= n {
                return Err(Error::InvalidInput(format!(
                    "designated index {d} outside {}",
                    algebra.name
                )));
            }
            flags[d] = true;
        }
        Ok(Matrix {
            algebra,
            designated: flags,
        })
    }

    pub fn from_names(algebra: FiniteAlgebra, designated: &[&str]) -> Result<Matrix> {
        let idx = designated
            .iter()
            .map(|d| algebra.index_of(d))
            .collect::<Result<Vec<_>>>()?;
        Matrix::new(algebra, &idx)
    }

    /// `⟨A, ↑a⟩`.
    pub fn up(algebra: FiniteAlgebra, element: &str) -> Result<Matrix> {
        let a = algebra.index_of(element)?;
        let up = algebra.upset(a)?;
        Matrix::new(algebra, &up)
    }

    /// `⟨A, {a}⟩`.
    pub fn only(algebra: FiniteAlgebra, element: &str) -> Result<Matrix> {
        let a = algebra.index_of(element)?;
        Matrix::new(algebra, &[a])
    }

    /// Resolves `NAME:up_X` or `NAME:only_X` over the built-in catalog.
    pub fn parse_address(text: &str) -> Result<Matrix> {
        let (name, des) = text
            .split_once(':')
            .ok_or_else(|| Error::UnknownName(format!("matrix {text} (expected NAME:up_X or NAME:only_X)")))?;
        let algebra = builtin(name)?;
        if let Some(x) = des.strip_prefix("up_") {
            Matrix::up(algebra, x)
        } else if let Some(x) = des.strip_prefix("only_") {
            Matrix::only(algebra, x)
        } else {
            Err(Error::UnknownName(format!("designation {des}")))
        }
    }

    pub fn is_designated(&self, a: usize) -> bool {
        self.designated[a]
    }

    pub fn designated(&self) -> Vec<usize> {
        (0..self.designated.len()).filter(|&a| self.designated[a]).collect()
    }

    pub fn designated_names(&self) -> Vec<&str> {
        self.designated().into_iter().map(|a| self.algebra.element(a)).collect()
    }

    /// Trivial when every element is designated.
    pub fn is_trivial(&self) -> bool {
        self.designated.iter().all(|&d| d)
    }

    pub fn signature(&self) -> Signature {
        self.algebra.signature()
    }

    pub fn label(&self) -> String {
        format!("<{}, {{{}}}>", self.algebra.name, self.designated_names().join(","))
    }

    /// Element, designation flag and formula for each of `formulas` under `h`.
    pub fn valuation_rows(&self, h: &Assignment, formulas: &[Formula]) -> Result<Vec<ValueRow>> {
        formulas
            .iter()
            .map(|phi| {
                let v = self.algebra.evaluate(phi, h)?;
                Ok(ValueRow {
                    formula: phi.clone(),
                    value: self.algebra.element(v).to_string(),
                    designated: self.is_designated(v),
                })
            })
            .collect()
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "algebra": self.algebra.to_json(),
            "designated": self.designated_names(),
        })
    }

    pub fn from_json(doc: &Value) -> Result<Matrix> {
        let algebra = match doc.get("algebra") {
            Some(Value::String(name)) => builtin(name)?,
            Some(obj @ Value::Object(_)) => FiniteAlgebra::from_json(obj)?,
            _ => return Err(Error::Format("`algebra` must be a name or an algebra object".into())),
        };
        let names: Vec<&str> = doc
            .get("designated")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Format("`designated` must be an array".into()))?
            .iter()
            .map(|v| v.as_str().ok_or_else(|| Error::Format("designated entries are element names".into())))
            .collect::<Result<_>>()?;
        Matrix::from_names(algebra, &names)
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueRow {
    pub formula: Formula,
    pub value: String,
    pub designated: bool,
}

/// A refuting valuation, with the index of the matrix it lives in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Countermodel {
    pub matrix: usize,
    pub valuation: Assignment,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails(Countermodel),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn countermodel(&self) -> Option<&Countermodel> {
        match self {
            Verdict::Holds => None,
            Verdict::Fails(c) => Some(c),
        }
    }
}

fn props_of(formulas: &[&[Formula]]) -> Vec<Arc<str>> {
    let mut out = BTreeSet::new();
    for set in formulas {
        for f in set.iter() {
            out.extend(f.props());
        }
    }
    out.into_iter().collect()
}

/// Valuations over `vars`, first variable most significant.
pub fn valuations(n: usize, vars: &[Arc<str>]) -> impl Iterator<Item = Assignment> + '_ {
    tuples(n, vars.len()).map(move |vals| vars.iter().cloned().zip(vals).collect())
}

fn eval_indexed(a: &FiniteAlgebra, phi: &Formula, vars: &[Arc<str>], vals: &[usize]) -> Result<usize> {
    a.eval_with(phi, &|v| vars.binary_search_by(|x| (**x).cmp(v)).ok().map(|i| vals[i]))
}

/// `Φ ⊳ Ψ` over a family of matrices. The countermodel is the first found
/// sweeping matrices in order and valuations lexicographically.
pub fn sset_consequence(ms: &[Matrix], phi: &[Formula], psi: &[Formula]) -> Result<Verdict> {
    if ms.is_empty() {
        return Err(Error::EmptyMatrixSet);
    }
    let vars = props_of(&[phi, psi]);
    for (mi, m) in ms.iter().enumerate() {
        for f in phi.iter().chain(psi) {
            m.algebra.admits(f)?;
        }
        let a = &m.algebra;
        'vals: for vals in tuples(a.size(), vars.len()) {
            for f in phi {
                if !m.is_designated(eval_indexed(a, f, &vars, &vals)?) {
                    continue 'vals;
                }
            }
            for f in psi {
                if m.is_designated(eval_indexed(a, f, &vars, &vals)?) {
                    continue 'vals;
                }
            }
            return Ok(Verdict::Fails(Countermodel {
                matrix: mi,
                valuation: vars.iter().cloned().zip(vals).collect(),
            }));
        }
    }
    Ok(Verdict::Holds)
}

/// `Φ ⊢ ψ`, the single-conclusion companion.
pub fn sfmla_consequence(ms: &[Matrix], phi: &[Formula], psi: &Formula) -> Result<Verdict> {
    sset_consequence(ms, phi, std::slice::from_ref(psi))
}

/// Lattice filters of `a`: nonempty, meet-closed upsets. With `prime_only`,
/// the proper prime ones. Ordered by size, then by element indices.
pub fn lattice_filters(a: &FiniteAlgebra, prime_only: bool) -> Result<Vec<Vec<usize>>> {
    if !a.has_lattice() {
        return Err(Error::NoLattice(a.name.clone()));
    }
    let n = a.size();
    if n > 16 {
        return Err(Error::TooLarge {
            what: a.name.clone(),
            size: n,
            limit: 16,
        });
    }
    let mut out = Vec::new();
    for mask in 1u32..(1 << n) {
        let has = |x: usize| mask & (1 << x) != 0;
        if !has(a.top()) {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|&x| has(x)).collect();
        let upward = members.iter().all(|&x| (0..n).all(|y| !a.leq(x, y) || has(y)));
        let meets = members.iter().all(|&x| members.iter().all(|&y| has(a.meet(x, y))));
        if !(upward && meets) {
            continue;
        }
        if prime_only {
            let proper = members.len() < n;
            let prime = (0..n).all(|x| (0..n).all(|y| !has(a.join(x, y)) || has(x) || has(y)));
            if !(proper && prime) {
                continue;
            }
        }
        out.push(members);
    }
    out.sort_by(|x, y| (x.len(), x).cmp(&(y.len(), y)));
    Ok(out)
}

/// Matrices `⟨A, F⟩` for every nonempty lattice filter `F` of `A`.
pub fn filter_matrices(a: &FiniteAlgebra) -> Result<Vec<Matrix>> {
    lattice_filters(a, false)?
        .into_iter()
        .map(|f| Matrix::new(a.clone(), &f))
        .collect()
}

/// Decides `⋀Φ ≈ ⋀Φ ∧ ⋁Ψ` on `a`; `None` when valid, else the first
/// refuting assignment.
pub fn order_preserving_consequence(
    a: &FiniteAlgebra,
    phi: &[Formula],
    psi: &[Formula],
) -> Result<Option<Assignment>> {
    if !a.has_lattice() {
        return Err(Error::NoLattice(a.name.clone()));
    }
    let lhs = Formula::conjunction(phi);
    let rhs = Formula::and(lhs.clone(), Formula::disjunction(psi));
    a.check_equation(&Equation::new(lhs, rhs))
}

/// `M° = ⟨A°, D ∪ {T^}⟩`.
pub fn expand_matrix(m: &Matrix) -> Result<Matrix> {
    let expanded = expand_with_perfection(&m.algebra)?;
    let top = expanded.size() - 1;
    let mut designated: Vec<usize> = m.designated().into_iter().map(|d| d + 1).collect();
    designated.push(top);
    Matrix::new(expanded, &designated)
}

/// A partition of the carrier; `block_of[a]` indexes `blocks`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub blocks: Vec<Vec<usize>>,
    pub block_of: Vec<usize>,
}

impl Partition {
    fn from_growth(rgs: &[usize]) -> Partition {
        let count = rgs.iter().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); count];
        for (a, &b) in rgs.iter().enumerate() {
            blocks[b].push(a);
        }
        Partition {
            blocks,
            block_of: rgs.to_vec(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.blocks.iter().all(|b| b.len() == 1)
    }

    pub fn same(&self, a: usize, b: usize) -> bool {
        self.block_of[a] == self.block_of[b]
    }

    /// Whether every block of `self` lies inside a block of `other`.
    pub fn refines(&self, other: &Partition) -> bool {
        self.blocks
            .iter()
            .all(|b| b.iter().all(|&x| other.same(x, b[0])))
    }

    pub fn render(&self, a: &FiniteAlgebra) -> String {
        self.blocks
            .iter()
            .map(|b| {
                let names: Vec<&str> = b.iter().map(|&x| a.element(x)).collect();
                format!("{{{}}}", names.join(","))
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// All partitions of `0..n` as restricted growth strings.
pub fn partitions(n: usize) -> Vec<Partition> {
    fn go(rgs: &mut Vec<usize>, n: usize, max: usize, out: &mut Vec<Partition>) {
        if rgs.len() == n {
            out.push(Partition::from_growth(rgs));
            return;
        }
        let limit = if rgs.is_empty() { 0 } else { max + 1 };
        for b in 0..=limit {
            rgs.push(b);
            go(rgs, n, max.max(b), out);
            rgs.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        go(&mut Vec::new(), n, 0, &mut out);
    }
    out
}

/// Whether `p` is a congruence of `a`.
pub fn is_congruence(a: &FiniteAlgebra, p: &Partition) -> bool {
    let n = a.size();
    a.signature().iter().all(|c| match c.arity() {
        0 => true,
        1 => (0..n).all(|x| {
            (0..n).all(|y| !p.same(x, y) || p.same(a.apply(c, &[x]).unwrap(), a.apply(c, &[y]).unwrap()))
        }),
        _ => (0..n).all(|x| {
            (0..n).all(|y| {
                !p.same(x, y)
                    || (0..n).all(|z| {
                        p.same(a.apply(c, &[x, z]).unwrap(), a.apply(c, &[y, z]).unwrap())
                            && p.same(a.apply(c, &[z, x]).unwrap(), a.apply(c, &[z, y]).unwrap())
                    })
            })
        }),
    })
}

fn check_size(a: &FiniteAlgebra) -> Result<()> {
    if a.size() > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            what: a.name.clone(),
            size: a.size(),
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(())
}

/// Greatest congruence compatible with the designated set.
pub fn leibniz_congruence(m: &Matrix) -> Result<Partition> {
    check_size(&m.algebra)?;
    let compatible: Vec<Partition> = partitions(m.algebra.size())
        .into_iter()
        .filter(|p| {
            p.blocks
                .iter()
                .all(|b| b.iter().all(|&x| m.is_designated(x) == m.is_designated(b[0])))
        })
        .filter(|p| is_congruence(&m.algebra, p))
        .collect();
    let greatest = compatible
        .iter()
        .min_by_key(|p| p.blocks.len())
        .expect("the identity partition is always compatible")
        .clone();
    assert!(
        compatible.iter().all(|p| p.refines(&greatest)),
        "compatible congruences have a greatest element"
    );
    Ok(greatest)
}

/// Quotient algebra and designated set by a congruence. Singleton blocks keep
/// their element name, larger blocks are named `[a,b,..]`.
pub fn quotient(m: &Matrix, p: &Partition) -> Result<Matrix> {
    let a = &m.algebra;
    let elements: Vec<String> = p
        .blocks
        .iter()
        .map(|b| {
            if b.len() == 1 {
                a.element(b[0]).to_string()
            } else {
                let names: Vec<&str> = b.iter().map(|&x| a.element(x)).collect();
                format!("[{}]", names.join(","))
            }
        })
        .collect();
    let rep = |blk: usize| p.blocks[blk][0];
    let ops: Vec<(Connective, Box<dyn Fn(&[usize]) -> usize + '_>)> = a
        .signature()
        .iter()
        .map(|c| {
            let f: Box<dyn Fn(&[usize]) -> usize> = Box::new(move |args: &[usize]| {
                let reps: Vec<usize> = args.iter().map(|&b| rep(b)).collect();
                p.block_of[a.apply(c, &reps).expect("own signature")]
            });
            (c, f)
        })
        .collect();
    let refs: Vec<(Connective, &dyn Fn(&[usize]) -> usize)> =
        ops.iter().map(|(c, f)| (*c, f.as_ref())).collect();
    let algebra = FiniteAlgebra::from_fns(format!("{}*", a.name), elements, &refs)?;
    let designated: Vec<usize> = (0..p.blocks.len())
        .filter(|&b| m.is_designated(rep(b)))
        .collect();
    Matrix::new(algebra, &designated)
}

/// `M* = ⟨A/Ω, D/Ω⟩`.
pub fn reduce_matrix(m: &Matrix) -> Result<Matrix> {
    let p = leibniz_congruence(m)?;
    quotient(m, &p)
}

/// A bijection between carriers preserving operations and designation.
pub fn matrix_isomorphism(m: &Matrix, n: &Matrix) -> Result<Option<Vec<usize>>> {
    let size = m.algebra.size();
    if size != n.algebra.size() || m.signature() != n.signature() {
        return Ok(None);
    }
    check_size(&m.algebra)?;
    let mut perm: Vec<usize> = (0..size).collect();
    loop {
        let designation = (0..size).all(|x| m.is_designated(x) == n.is_designated(perm[x]));
        if designation && is_homomorphism(&m.algebra, &n.algebra, &perm) {
            return Ok(Some(perm));
        }
        if !next_permutation(&mut perm) {
            return Ok(None);
        }
    }
}

/// Paraconsistency-style properties of a matrix. Gentle checks are `None`
/// when `*` is absent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogicReport {
    pub paraconsistent: bool,
    pub paracomplete: bool,
    pub gently_explosive: Option<bool>,
    pub gently_implosive: Option<bool>,
}

impl LogicReport {
    pub fn paradefinite(&self) -> bool {
        self.paraconsistent && self.paracomplete
    }

    pub fn lfi(&self) -> Option<bool> {
        self.gently_explosive.map(|g| g && self.paraconsistent)
    }

    pub fn lfu(&self) -> Option<bool> {
        self.gently_implosive.map(|g| g && self.paracomplete)
    }
}

fn fails(m: &Matrix, phi: &[&str], psi: &[&str]) -> Result<bool> {
    let sig = Signature::full();
    let parse = |v: &[&str]| -> Vec<Formula> {
        v.iter()
            .map(|s| crate::syntax::parse_formula(s, &sig).expect("fixed formula"))
            .collect()
    };
    Ok(!sset_consequence(std::slice::from_ref(m), &parse(phi), &parse(psi))?.holds())
}

pub fn check_logic_properties(m: &Matrix) -> Result<LogicReport> {
    if !m.algebra.has(Connective::Neg) {
        return Err(Error::MissingConnective("~".into()));
    }
    let paraconsistent = fails(m, &["p", "~p"], &["q"])?;
    let paracomplete = fails(m, &["q"], &["p", "~p"])?;
    let (explosive, implosive) = if m.algebra.has(Connective::Circ) {
        let explosive = fails(m, &["*p", "p"], &[])?
            && fails(m, &["*p", "~p"], &[])?
            && !fails(m, &["*p", "p", "~p"], &[])?;
        let implosive = fails(m, &[], &["p", "~*p"])?
            && fails(m, &[], &["~p", "~*p"])?
            && !fails(m, &[], &["~p", "p", "~*p"])?;
        (Some(explosive), Some(implosive))
    } else {
        (None, None)
    };
    Ok(LogicReport {
        paraconsistent,
        paracomplete,
        gently_explosive: explosive,
        gently_implosive: implosive,
    })
}

/// Classical verdict, enriched verdict, and whether they agree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatReport {
    pub classical: Verdict,
    pub enriched: Verdict,
    pub enriched_premises: Vec<Formula>,
}

impl DatReport {
    pub fn agree(&self) -> bool {
        self.classical.holds() == self.enriched.holds()
    }
}

/// The classical two-valued matrix `⟨B2, {t}⟩`.
pub fn classical_matrix() -> Matrix {
    Matrix::only(builtin("B2").expect("catalog"), "t").expect("catalog")
}

/// Compares `Φ ⊳ Ψ` on `⟨B2,{t}⟩` with `Φ, *p1..*pn ⊳ Ψ` on `m_pp`.
pub fn dat_check(phi: &[Formula], psi: &[Formula], m_pp: &Matrix) -> Result<DatReport> {
    let dm = Signature::de_morgan();
    for f in phi.iter().chain(psi) {
        dm.admits(f)?;
    }
    if !m_pp.algebra.has(Connective::Circ) {
        return Err(Error::MissingConnective("*".into()));
    }
    let classical = sset_consequence(&[classical_matrix()], phi, psi)?;
    let mut enriched_premises = phi.to_vec();
    for v in props_of(&[phi, psi]) {
        let c = Formula::circ(Formula::Var(v));
        if !enriched_premises.contains(&c) {
            enriched_premises.push(c);
        }
    }
    let enriched = sset_consequence(std::slice::from_ref(m_pp), &enriched_premises, psi)?;
    Ok(DatReport {
        classical,
        enriched,
        enriched_premises,
    })
}

/// Pairs `a < b` that no separator in `s` tells apart by designation.
pub fn check_monadicity(m: &Matrix, s: &[Formula]) -> Result<Vec<(usize, usize)>> {
    let tables = s
        .iter()
        .map(|f| m.algebra.unary_table(f))
        .collect::<Result<Vec<_>>>()?;
    let n = m.algebra.size();
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if tables
                .iter()
                .all(|t| m.is_designated(t[a]) == m.is_designated(t[b]))
            {
                out.push((a, b));
            }
        }
    }
    Ok(out)
}
