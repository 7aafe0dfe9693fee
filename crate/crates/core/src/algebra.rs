//! Finite algebras, the built-in catalog, equations and axiom classes, the
//! perfection and nabla expansions, and the IS/PP term translations.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::syntax::{parse_formula, tuples, Connective, Formula, Signature, Substitution};

/// Variable assignment into a finite algebra, by element index.
pub type Assignment = BTreeMap<Arc<str>, usize>;

/// Largest carrier accepted by the enumeration-based operations.
pub const ENUMERATION_LIMIT: usize = 8;

/// A finite algebra. Tables are flattened: nullary tables have one entry,
/// unary tables are indexed by `a`, binary tables by `a * n + b`.
#[derive(Clone, Debug)]
pub struct FiniteAlgebra {
    pub name: String,
    pub elements: Vec<String>,
    tables: BTreeMap<Connective, Vec<usize>>,
}

impl PartialEq for FiniteAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.elements == other.elements && self.tables == other.tables
    }
}

impl Eq for FiniteAlgebra {}

impl FiniteAlgebra {
    /// Builds an algebra from flattened tables, checking totality and closure.
    pub fn new(
        name: impl Into<String>,
        elements: Vec<String>,
        tables: BTreeMap<Connective, Vec<usize>>,
    ) -> Result<Self> {
        let name = name.into();
        let n = elements.len();
        if n == 0 {
            return Err(Error::InvalidInput(format!("{name}: empty carrier")));
        }
        for (i, e) in elements.iter().enumerate() {
            if elements[..i].contains(e) {
                return Err(Error::InvalidInput(format!("{name}: duplicate element `{e}`")));
            }
        }
        for (c, t) in &tables {
            let want = n.pow(c.arity() as u32);
            if t.len() != want {
                return Err(Error::InvalidInput(format!(
                    "{name}: table for `{c}` has {} entries, expected {want}",
                    t.len()
                )));
            }
            if t.iter().any(|&v| v >= n) {
                return Err(Error::InvalidInput(format!(
                    "{name}: table for `{c}` leaves the carrier"
                )));
            }
        }
        Ok(FiniteAlgebra {
            name,
            elements,
            tables,
        })
    }

    /// Builds an algebra whose operations are given as functions on indices.
    pub fn from_fns(
        name: impl Into<String>,
        elements: Vec<String>,
        ops: &[(Connective, &dyn Fn(&[usize]) -> usize)],
    ) -> Result<Self> {
        let n = elements.len();
        let mut tables = BTreeMap::new();
        for (c, f) in ops {
            let table = tuples(n, c.arity()).map(|args| f(&args)).collect();
            tables.insert(*c, table);
        }
        FiniteAlgebra::new(name, elements, tables)
    }

    pub fn size(&self) -> usize {
        self.elements.len()
    }

    pub fn signature(&self) -> Signature {
        Signature::new(self.tables.keys().copied())
    }

    pub fn has(&self, c: Connective) -> bool {
        self.tables.contains_key(&c)
    }

    pub fn table(&self, c: Connective) -> Option<&[usize]> {
        self.tables.get(&c).map(Vec::as_slice)
    }

    pub fn index_of(&self, element: &str) -> Result<usize> {
        self.elements
            .iter()
            .position(|e| e == element)
            .ok_or_else(|| Error::UnknownName(format!("element `{element}` of {}", self.name)))
    }

    pub fn element(&self, i: usize) -> &str {
        &self.elements[i]
    }

    fn require(&self, c: Connective) -> Result<&[usize]> {
        self.table(c).ok_or_else(|| {
            Error::SignatureMismatch(format!("{} has no operation `{c}`", self.name))
        })
    }

    /// Applies connective `c` to argument indices.
    pub fn apply(&self, c: Connective, args: &[usize]) -> Result<usize> {
        let t = self.require(c)?;
        let n = self.size();
        let idx = args.iter().fold(0, |acc, &a| acc * n + a);
        Ok(t[idx])
    }

    fn op(&self, c: Connective, args: &[usize]) -> usize {
        self.apply(c, args).expect("connective checked by caller")
    }

    pub fn meet(&self, a: usize, b: usize) -> usize {
        self.op(Connective::And, &[a, b])
    }

    pub fn join(&self, a: usize, b: usize) -> usize {
        self.op(Connective::Or, &[a, b])
    }

    pub fn top(&self) -> usize {
        self.op(Connective::Top, &[])
    }

    pub fn bottom(&self) -> usize {
        self.op(Connective::Bot, &[])
    }

    /// Lattice order `a <= b` iff `a & b = a`.
    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.meet(a, b) == a
    }

    pub fn has_lattice(&self) -> bool {
        Signature::bounded_lattice().is_subset(&self.signature())
    }

    /// Principal upset `↑a`, in carrier order.
    pub fn upset(&self, a: usize) -> Result<Vec<usize>> {
        if !self.has(Connective::And) {
            return Err(Error::NoLattice(self.name.clone()));
        }
        Ok((0..self.size()).filter(|&b| self.leq(a, b)).collect())
    }

    /// Homomorphic extension of `h`.
    pub fn evaluate(&self, phi: &Formula, h: &Assignment) -> Result<usize> {
        self.eval_with(phi, &|v: &str| h.get(v).copied())
    }

    /// Evaluates with an arbitrary variable lookup.
    pub fn eval_with(&self, phi: &Formula, h: &dyn Fn(&str) -> Option<usize>) -> Result<usize> {
        match phi {
            Formula::Var(v) => h(v).ok_or_else(|| Error::UnassignedVariable(v.to_string())),
            Formula::App(c, args) => {
                let t = self.require(*c)?;
                let n = self.size();
                let mut idx = 0;
                for a in args.iter() {
                    idx = idx * n + self.eval_with(a, h)?;
                }
                Ok(t[idx])
            }
        }
    }

    /// Fails unless every connective of `phi` has a table here.
    pub fn admits(&self, phi: &Formula) -> Result<()> {
        self.signature().admits(phi)
    }

    /// Exhaustive check of `lhs = rhs`; the witness is the first failing
    /// assignment with variables in name order and elements in carrier order.
    pub fn check_equation(&self, e: &Equation) -> Result<Option<Assignment>> {
        self.admits(&e.lhs)?;
        self.admits(&e.rhs)?;
        let mut vars = e.lhs.props();
        vars.extend(e.rhs.props());
        let vars: Vec<Arc<str>> = vars.into_iter().collect();
        for values in tuples(self.size(), vars.len()) {
            let h: Assignment = vars.iter().cloned().zip(values).collect();
            if self.evaluate(&e.lhs, &h)? != self.evaluate(&e.rhs, &h)? {
                return Ok(Some(h));
            }
        }
        Ok(None)
    }

    /// Every failing class equation together with its witness.
    pub fn check_axiom_class(&self, class: AxiomClass) -> Result<Vec<ClassFailure>> {
        let sig = class.signature();
        if !sig.is_subset(&self.signature()) {
            return Err(Error::SignatureMismatch(format!(
                "{} lacks the {class} signature {sig}",
                self.name
            )));
        }
        let mut out = Vec::new();
        for (label, eq) in class.equations() {
            if let Some(witness) = self.check_equation(&eq)? {
                out.push(ClassFailure {
                    label,
                    equation: eq,
                    witness,
                });
            }
        }
        Ok(out)
    }

    pub fn satisfies(&self, class: AxiomClass) -> bool {
        matches!(self.check_axiom_class(class), Ok(f) if f.is_empty())
    }

    fn require_class(&self, class: AxiomClass) -> Result<()> {
        let failures = self.check_axiom_class(class)?;
        match failures.first() {
            None => Ok(()),
            Some(f) => Err(Error::NotInClass {
                algebra: self.name.clone(),
                class: class.to_string(),
                equation: format!("{} ({})", f.label, f.equation),
            }),
        }
    }

    /// Bounded-lattice laws, checked on documents loaded from files.
    pub fn validate_lattice(&self) -> Result<()> {
        if !self.has_lattice() {
            return Ok(());
        }
        for (label, eq) in lattice_laws().into_iter().filter(|(l, _)| !l.starts_with("D")) {
            if let Some(w) = self.check_equation(&eq)? {
                return Err(Error::InvalidInput(format!(
                    "{}: lattice law {label} ({eq}) fails at {}",
                    self.name,
                    self.render_assignment(&w)
                )));
            }
        }
        Ok(())
    }

    /// Restriction of the tables to `sig`.
    pub fn reduct(&self, sig: &Signature) -> Result<FiniteAlgebra> {
        if !sig.is_subset(&self.signature()) {
            return Err(Error::SignatureMismatch(format!(
                "{sig} is not contained in the signature {} of {}",
                self.signature(),
                self.name
            )));
        }
        let tables = self
            .tables
            .iter()
            .filter(|(c, _)| sig.contains(**c))
            .map(|(c, t)| (*c, t.clone()))
            .collect();
        Ok(FiniteAlgebra {
            name: self.name.clone(),
            elements: self.elements.clone(),
            tables,
        })
    }

    fn with_table(mut self, c: Connective, table: Vec<usize>) -> Self {
        self.tables.insert(c, table);
        self
    }

    fn without_table(mut self, c: Connective) -> Self {
        self.tables.remove(&c);
        self
    }

    /// Pointwise table of a one-variable term.
    pub fn unary_table(&self, term: &Formula) -> Result<Vec<usize>> {
        let props = term.props();
        if props.len() > 1 {
            return Err(Error::InvalidInput(format!("`{term}` has more than one variable")));
        }
        (0..self.size())
            .map(|a| self.eval_with(term, &|_| Some(a)))
            .collect()
    }

    /// Replaces the given operation by an arbitrary table (used to build
    /// mutated algebras).
    pub fn replace_table(&self, c: Connective, table: Vec<usize>) -> Result<FiniteAlgebra> {
        let mut tables = self.tables.clone();
        tables.insert(c, table);
        FiniteAlgebra::new(self.name.clone(), self.elements.clone(), tables)
    }

    pub fn render_assignment(&self, h: &Assignment) -> String {
        h.iter()
            .map(|(v, &a)| format!("{v}={}", self.elements[a]))
            .collect::<Vec<_>>()
            .join(", ")
    }

    /// Structured document: name, signature, elements and nested tables.
    pub fn to_json(&self) -> Value {
        let mut sig = Map::new();
        let mut tables = Map::new();
        let n = self.size();
        for (c, t) in &self.tables {
            sig.insert(c.symbol().into(), Value::from(c.arity()));
            let name = |i: usize| Value::String(self.elements[i].clone());
            let v = match c.arity() {
                0 => name(t[0]),
                1 => Value::Array(t.iter().map(|&i| name(i)).collect()),
                _ => Value::Array(
                    t.chunks(n)
                        .map(|row| Value::Array(row.iter().map(|&i| name(i)).collect()))
                        .collect(),
                ),
            };
            tables.insert(c.symbol().into(), v);
        }
        serde_json::json!({
            "name": self.name,
            "signature": sig,
            "elements": self.elements,
            "tables": tables,
        })
    }

    pub fn from_json(doc: &Value) -> Result<FiniteAlgebra> {
        let fmt = |m: &str| Error::Format(m.to_string());
        let obj = doc.as_object().ok_or_else(|| fmt("algebra must be an object"))?;
        let name = obj
            .get("name")
            .and_then(Value::as_str)
            .unwrap_or("unnamed")
            .to_string();
        let elements: Vec<String> = obj
            .get("elements")
            .and_then(Value::as_array)
            .ok_or_else(|| fmt("`elements` must be an array"))?
            .iter()
            .map(|e| e.as_str().map(str::to_string).ok_or_else(|| fmt("element names must be strings")))
            .collect::<Result<_>>()?;
        let sig = obj
            .get("signature")
            .and_then(Value::as_object)
            .ok_or_else(|| fmt("`signature` must be an object"))?;
        let tables_doc = obj
            .get("tables")
            .and_then(Value::as_object)
            .ok_or_else(|| fmt("`tables` must be an object"))?;
        let index = |v: &Value| -> Result<usize> {
            let s = v.as_str().ok_or_else(|| fmt("table entries must be element names"))?;
            elements
                .iter()
                .position(|e| e == s)
                .ok_or_else(|| Error::Format(format!("unknown element `{s}` in table")))
        };
        let mut tables = BTreeMap::new();
        for (sym, arity) in sig {
            let c = Connective::from_symbol(sym)
                .ok_or_else(|| Error::Format(format!("unknown connective `{sym}`")))?;
            if arity.as_u64() != Some(c.arity() as u64) {
                return Err(Error::Format(format!("`{sym}` must have arity {}", c.arity())));
            }
            let t = tables_doc
                .get(sym)
                .ok_or_else(|| Error::Format(format!("missing table for `{sym}`")))?;
            let n = elements.len();
            let flat = match c.arity() {
                0 => vec![index(t)?],
                1 => {
                    let row = t.as_array().ok_or_else(|| fmt("unary tables are arrays"))?;
                    if row.len() != n {
                        return Err(Error::Format(format!("table `{sym}` has wrong length")));
                    }
                    row.iter().map(index).collect::<Result<_>>()?
                }
                _ => {
                    let rows = t.as_array().ok_or_else(|| fmt("binary tables are nested arrays"))?;
                    if rows.len() != n {
                        return Err(Error::Format(format!("table `{sym}` has wrong length")));
                    }
                    let mut flat = Vec::with_capacity(n * n);
                    for row in rows {
                        let row = row.as_array().ok_or_else(|| fmt("binary tables are nested arrays"))?;
                        if row.len() != n {
                            return Err(Error::Format(format!("table `{sym}` has wrong length")));
                        }
                        for v in row {
                            flat.push(index(v)?);
                        }
                    }
                    flat
                }
            };
            tables.insert(c, flat);
        }
        let a = FiniteAlgebra::new(name, elements, tables)?;
        a.validate_lattice()?;
        Ok(a)
    }
}

impl fmt::Display for FiniteAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.size();
        let width = self.elements.iter().map(String::len).max().unwrap_or(1);
        writeln!(f, "{}  elements: {}", self.name, self.elements.join(" "))?;
        for (c, t) in &self.tables {
            match c.arity() {
                0 => writeln!(f, "{c} = {}", self.elements[t[0]])?,
                1 => {
                    let cells: Vec<_> = (0..n)
                        .map(|a| format!("{c}{} = {}", self.elements[a], self.elements[t[a]]))
                        .collect();
                    writeln!(f, "{}", cells.join("  "))?;
                }
                _ => {
                    write!(f, "{c:>width$} |")?;
                    for e in &self.elements {
                        write!(f, " {e:>width$}")?;
                    }
                    writeln!(f)?;
                    writeln!(f, "{}", "-".repeat((width + 1) * (n + 1) + 1))?;
                    for a in 0..n {
                        write!(f, "{:>width$} |", self.elements[a])?;
                        for b in 0..n {
                            write!(f, " {:>width$}", self.elements[t[a * n + b]])?;
                        }
                        writeln!(f)?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// A failed class equation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassFailure {
    pub label: String,
    pub equation: Equation,
    pub witness: Assignment,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Equation {
    pub lhs: Formula,
    pub rhs: Formula,
}

impl Equation {
    pub fn new(lhs: Formula, rhs: Formula) -> Self {
        Equation { lhs, rhs }
    }

    /// Parses `lhs = rhs`.
    pub fn parse(text: &str, sig: &Signature) -> Result<Self> {
        let Some((l, r)) = text.split_once('=') else {
            return Err(Error::Parse {
                pos: text.len(),
                message: "expected `lhs = rhs`".into(),
            });
        };
        let lhs = parse_formula(l, sig)?;
        let rhs = parse_formula(r, sig).map_err(|e| match e {
            Error::Parse { pos, message } => Error::Parse {
                pos: pos + l.len() + 1,
                message,
            },
            other => other,
        })?;
        Ok(Equation { lhs, rhs })
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

fn eqs(list: &[(&str, &str)]) -> Vec<(String, Equation)> {
    list.iter()
        .map(|(label, text)| {
            let eq = Equation::parse(text, &Signature::full()).expect("built-in equation parses");
            (label.to_string(), eq)
        })
        .collect()
}

/// Bounded distributive lattice laws; labels starting with `D` are the
/// distributive ones.
pub fn lattice_laws() -> Vec<(String, Equation)> {
    eqs(&[
        ("L-idem-and", "x & x = x"),
        ("L-idem-or", "x | x = x"),
        ("L-comm-and", "x & y = y & x"),
        ("L-comm-or", "x | y = y | x"),
        ("L-assoc-and", "(x & y) & z = x & (y & z)"),
        ("L-assoc-or", "(x | y) | z = x | (y | z)"),
        ("L-absorb-and", "x & (x | y) = x"),
        ("L-absorb-or", "x | (x & y) = x"),
        ("L-top", "x & 1 = x"),
        ("L-bot", "x | 0 = x"),
        ("D-distrib", "x & (y | z) = (x & y) | (x & z)"),
    ])
}

/// The three equational classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AxiomClass {
    DM,
    IS,
    PP,
}

impl AxiomClass {
    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_uppercase().as_str() {
            "DM" => Ok(AxiomClass::DM),
            "IS" => Ok(AxiomClass::IS),
            "PP" => Ok(AxiomClass::PP),
            _ => Err(Error::UnknownName(format!("axiom class {name}"))),
        }
    }

    pub fn signature(self) -> Signature {
        match self {
            AxiomClass::DM => Signature::de_morgan(),
            AxiomClass::IS => Signature::involutive_stone(),
            AxiomClass::PP => Signature::perfect_paradefinite(),
        }
    }

    pub fn equations(self) -> Vec<(String, Equation)> {
        let mut out = lattice_laws();
        out.extend(eqs(&[("DM1", "~~x = x"), ("DM2", "~(x & y) = ~x | ~y")]));
        match self {
            AxiomClass::DM => {}
            AxiomClass::IS => out.extend(eqs(&[
                ("IS1", "!0 = 0"),
                ("IS2", "x & !x = x"),
                ("IS3", "!(x & y) = !x & !y"),
                ("IS4", "~!x & !x = 0"),
            ])),
            AxiomClass::PP => out.extend(eqs(&[
                ("PP1", "**x = 1"),
                ("PP2", "*x = *~x"),
                ("PP3", "*1 = 1"),
                ("PP4", "x & ~x & *x = 0"),
                ("PP5", "*(x & y) = (*x | *y) & (*x | ~y) & (*y | ~x)"),
            ])),
        }
        out
    }
}

impl fmt::Display for AxiomClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AxiomClass::DM => "DM",
            AxiomClass::IS => "IS",
            AxiomClass::PP => "PP",
        })
    }
}

/// Identities valid in every IS-algebra.
pub fn is_identities() -> Vec<(String, Equation)> {
    eqs(&[
        ("IS-a", "x | !~x = 1"),
        ("IS-b", "x & ~!x = 0"),
        ("IS-c", "~!(x & ~x) & ~x = ~!x"),
        ("IS-d", "!!x = !x"),
        ("IS-e", "!~!x = ~!x"),
        ("IS-f", "~!~(x & y) = ~!~x & ~!~y"),
    ])
}

/// Identities valid in every PP-algebra.
pub fn pp_identities() -> Vec<(String, Equation)> {
    eqs(&[
        ("PP-a", "~*x | (x | ~x) = 1"),
        ("PP-b", "*x & ~*x = 0"),
        ("PP-c", "*x = *x & (x | ~x)"),
    ])
}

/// `(φ)°`: replaces `!ψ` by `~*ψ | ψ`, homomorphic elsewhere.
pub fn translate_to_pp(phi: &Formula) -> Formula {
    phi.map_apps(&|c, mut args| match c {
        Connective::Nabla => {
            let a = args.pop().expect("unary");
            Formula::or(Formula::neg(Formula::circ(a.clone())), a)
        }
        _ => Formula::app(c, args),
    })
}

/// `(φ)^∇`: replaces `*ψ` by `~!(ψ & ~ψ)`, homomorphic elsewhere.
pub fn translate_to_is(phi: &Formula) -> Formula {
    phi.map_apps(&|c, mut args| match c {
        Connective::Circ => {
            let a = args.pop().expect("unary");
            Formula::neg(Formula::nabla(Formula::and(a.clone(), Formula::neg(a))))
        }
        _ => Formula::app(c, args),
    })
}

fn fresh_name(elements: &[String], base: &str) -> String {
    let mut name = base.to_string();
    while elements.contains(&name) {
        name.push('\'');
    }
    name
}

/// Adds a new bottom and top to a De Morgan algebra; `extra` defines the new
/// unary operation on indices of the enlarged carrier.
fn bounded_expansion(
    a: &FiniteAlgebra,
    suffix: &str,
    extra: Connective,
    extra_fn: impl Fn(usize, usize) -> usize,
) -> Result<FiniteAlgebra> {
    let dm = a.reduct(&Signature::de_morgan())?;
    dm.require_class(AxiomClass::DM)?;
    let n = dm.size();
    let bot = fresh_name(&dm.elements, "F^");
    let top = fresh_name(&dm.elements, "T^");
    let mut elements = vec![bot];
    elements.extend(dm.elements.iter().cloned());
    elements.push(top);
    let (fb, ft) = (0, n + 1);
    let old = |x: usize| x - 1;
    let meet = |x: usize, y: usize| match (x, y) {
        (x, y) if x == fb || y == fb => fb,
        (x, y) if x == ft => y,
        (x, y) if y == ft => x,
        (x, y) => dm.meet(old(x), old(y)) + 1,
    };
    let join = |x: usize, y: usize| match (x, y) {
        (x, y) if x == ft || y == ft => ft,
        (x, y) if x == fb => y,
        (x, y) if y == fb => x,
        (x, y) => dm.join(old(x), old(y)) + 1,
    };
    let neg = |x: usize| match x {
        x if x == fb => ft,
        x if x == ft => fb,
        x => dm.op(Connective::Neg, &[old(x)]) + 1,
    };
    let extra_op = |x: usize| extra_fn(x, n + 1);
    FiniteAlgebra::from_fns(
        format!("{}{suffix}", dm.name),
        elements,
        &[
            (Connective::Top, &|_| ft),
            (Connective::Bot, &|_| fb),
            (Connective::Neg, &|v| neg(v[0])),
            (Connective::And, &|v| meet(v[0], v[1])),
            (Connective::Or, &|v| join(v[0], v[1])),
            (extra, &|v| extra_op(v[0])),
        ],
    )
}

/// `A°`: new least element `F^`, new greatest `T^`, and `*` sending the new
/// bounds to `T^` and every old element to `F^`.
pub fn expand_with_perfection(a: &FiniteAlgebra) -> Result<FiniteAlgebra> {
    bounded_expansion(a, "°", Connective::Circ, |x, top| {
        if x == 0 || x == top {
            top
        } else {
            0
        }
    })
}

/// `A^∇`: as [`expand_with_perfection`] with `!` sending `F^` to `F^` and
/// everything else to `T^`.
pub fn expand_with_nabla(a: &FiniteAlgebra) -> Result<FiniteAlgebra> {
    bounded_expansion(a, "∇", Connective::Nabla, |x, top| if x == 0 { 0 } else { top })
}

/// PP-algebra term-equivalent to an IS-algebra: `*x := ~!(x & ~x)`.
pub fn derive_perfection(a: &FiniteAlgebra) -> Result<FiniteAlgebra> {
    a.require_class(AxiomClass::IS)?;
    let term = translate_to_is(&Formula::circ(Formula::var("x")));
    let table = a.unary_table(&term)?;
    let base = a.reduct(&Signature::involutive_stone())?;
    let mut out = base.without_table(Connective::Nabla).with_table(Connective::Circ, table);
    out.name = rename(&a.name, "IS", "PP", "°");
    Ok(out)
}

/// IS-algebra term-equivalent to a PP-algebra: `!x := ~*x | x`.
pub fn derive_nabla(b: &FiniteAlgebra) -> Result<FiniteAlgebra> {
    b.require_class(AxiomClass::PP)?;
    let term = translate_to_pp(&Formula::nabla(Formula::var("x")));
    let table = b.unary_table(&term)?;
    let base = b.reduct(&Signature::perfect_paradefinite())?;
    let mut out = base.without_table(Connective::Circ).with_table(Connective::Nabla, table);
    out.name = rename(&b.name, "PP", "IS", "∇");
    Ok(out)
}

fn rename(name: &str, from: &str, to: &str, suffix: &str) -> String {
    match name.strip_prefix(from) {
        Some(rest) if rest.chars().all(|c| c.is_ascii_digit()) && !rest.is_empty() => {
            format!("{to}{rest}")
        }
        _ => format!("{name}{suffix}"),
    }
}

/// A unary term function together with one defining term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermFunction {
    pub table: Vec<usize>,
    pub term: Formula,
}

/// Closure of the identity and the constants under the operations, computed
/// pointwise. Terms use the variable `p`.
pub fn unary_definable_functions(a: &FiniteAlgebra) -> Result<Vec<TermFunction>> {
    let n = a.size();
    if n > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            what: a.name.clone(),
            size: n,
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut found: Vec<TermFunction> = Vec::new();
    let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut push = |found: &mut Vec<TermFunction>, table: Vec<usize>, term: Formula| {
        if !seen.contains_key(&table) {
            seen.insert(table.clone(), found.len());
            found.push(TermFunction { table, term });
        }
    };
    push(&mut found, (0..n).collect(), Formula::var("p"));
    for c in [Connective::Top, Connective::Bot] {
        if a.has(c) {
            push(&mut found, vec![a.op(c, &[]); n], Formula::app(c, vec![]));
        }
    }
    let unary: Vec<Connective> = a.tables.keys().copied().filter(|c| c.arity() == 1).collect();
    let binary: Vec<Connective> = a.tables.keys().copied().filter(|c| c.arity() == 2).collect();
    let mut i = 0;
    while i < found.len() {
        let f = found[i].clone();
        for &c in &unary {
            let table = f.table.iter().map(|&x| a.op(c, &[x])).collect();
            push(&mut found, table, Formula::app(c, vec![f.term.clone()]));
        }
        for j in 0..=i {
            let g = found[j].clone();
            for &c in &binary {
                for (l, r) in [(&f, &g), (&g, &f)] {
                    let table = (0..n).map(|x| a.op(c, &[l.table[x], r.table[x]])).collect();
                    push(&mut found, table, Formula::app(c, vec![l.term.clone(), r.term.clone()]));
                }
            }
        }
        i += 1;
    }
    Ok(found)
}

/// An isomorphism `a -> b` as an index map, by brute force over bijections.
pub fn isomorphism(a: &FiniteAlgebra, b: &FiniteAlgebra) -> Result<Option<Vec<usize>>> {
    let n = a.size();
    if n != b.size() || a.signature() != b.signature() {
        return Ok(None);
    }
    if n > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            what: a.name.clone(),
            size: n,
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        if is_homomorphism(a, b, &perm) {
            return Ok(Some(perm));
        }
        if !next_permutation(&mut perm) {
            return Ok(None);
        }
    }
}

/// Whether the index map `h` commutes with every operation of `a`.
pub fn is_homomorphism(a: &FiniteAlgebra, b: &FiniteAlgebra, h: &[usize]) -> bool {
    a.tables.keys().all(|&c| {
        b.has(c)
            && tuples(a.size(), c.arity()).all(|args| {
                let image: Vec<usize> = args.iter().map(|&x| h[x]).collect();
                h[a.op(c, &args)] == b.op(c, &image)
            })
    })
}

/// Advances to the next lexicographic permutation.
pub fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

// Built-in catalog.

const V6: [&str; 6] = ["F^", "f", "n", "b", "t", "T^"];

/// Order on the six-element carrier: `F^` least, `T^` greatest, and below
/// them the four-element De Morgan lattice with `n`, `b` incomparable.
fn v6_leq(x: &str, y: &str) -> bool {
    x == y || x == "F^" || y == "T^" || (x == "f" && y != "F^") || (y == "t" && x != "T^")
}

fn v6_neg(x: &str) -> &'static str {
    match x {
        "F^" => "T^",
        "f" => "t",
        "n" => "n",
        "b" => "b",
        "t" => "f",
        _ => "F^",
    }
}

/// Sublattice of V6 on `carrier` with `~` and, optionally, `*` or `!`.
fn catalog_algebra(name: &str, carrier: &[&str], extra: Option<Connective>) -> FiniteAlgebra {
    let elements: Vec<String> = carrier.iter().map(|s| s.to_string()).collect();
    let idx = |s: &str| carrier.iter().position(|e| *e == s).expect("closed carrier");
    let least = |set: &[usize], below: bool| -> usize {
        *set.iter()
            .find(|&&c| {
                set.iter().all(|&d| {
                    if below {
                        v6_leq(carrier[c], carrier[d])
                    } else {
                        v6_leq(carrier[d], carrier[c])
                    }
                })
            })
            .expect("bounded")
    };
    let n = carrier.len();
    let glb = |x: usize, y: usize| {
        let lower: Vec<usize> = (0..n)
            .filter(|&z| v6_leq(carrier[z], carrier[x]) && v6_leq(carrier[z], carrier[y]))
            .collect();
        least(&lower, false)
    };
    let lub = |x: usize, y: usize| {
        let upper: Vec<usize> = (0..n)
            .filter(|&z| v6_leq(carrier[x], carrier[z]) && v6_leq(carrier[y], carrier[z]))
            .collect();
        least(&upper, true)
    };
    let all: Vec<usize> = (0..n).collect();
    let top = least(&all, false);
    let bot = least(&all, true);
    let circ = |x: usize| {
        if carrier[x] == "F^" || carrier[x] == "T^" {
            idx("T^")
        } else {
            idx("F^")
        }
    };
    let nabla = |x: usize| if carrier[x] == "F^" { idx("F^") } else { idx("T^") };
    let neg = |x: usize| idx(v6_neg(carrier[x]));
    let top_fn = |_: &[usize]| top;
    let bot_fn = |_: &[usize]| bot;
    let neg_fn = |v: &[usize]| neg(v[0]);
    let and_fn = |v: &[usize]| glb(v[0], v[1]);
    let or_fn = |v: &[usize]| lub(v[0], v[1]);
    let circ_fn = |v: &[usize]| circ(v[0]);
    let nabla_fn = |v: &[usize]| nabla(v[0]);
    let mut ops: Vec<(Connective, &dyn Fn(&[usize]) -> usize)> = vec![
        (Connective::Top, &top_fn),
        (Connective::Bot, &bot_fn),
        (Connective::Neg, &neg_fn),
        (Connective::And, &and_fn),
        (Connective::Or, &or_fn),
    ];
    match extra {
        Some(Connective::Circ) => ops.push((Connective::Circ, &circ_fn)),
        Some(Connective::Nabla) => ops.push((Connective::Nabla, &nabla_fn)),
        _ => {}
    }
    FiniteAlgebra::from_fns(name, elements, &ops).expect("catalog tables are total")
}

/// Names of the built-in algebras.
pub const BUILTIN_NAMES: [&str; 13] = [
    "B2", "K3", "DM4", "IS2", "IS3", "IS4", "IS5", "IS6", "PP2", "PP3", "PP4", "PP5", "PP6",
];

fn indexed_carrier(i: &str) -> Option<&'static [&'static str]> {
    Some(match i {
        "6" => &V6,
        "5" => &["F^", "f", "n", "t", "T^"],
        "4" => &["F^", "f", "t", "T^"],
        "3" => &["F^", "n", "T^"],
        "2" => &["F^", "T^"],
        _ => return None,
    })
}

/// Looks up a built-in algebra by name.
pub fn builtin(name: &str) -> Result<FiniteAlgebra> {
    let unknown = || Error::UnknownName(format!("algebra {name}"));
    match name {
        "B2" => Ok(catalog_algebra(name, &["f", "t"], None)),
        "K3" => Ok(catalog_algebra(name, &["f", "n", "t"], None)),
        "DM4" => Ok(catalog_algebra(name, &["f", "n", "b", "t"], None)),
        _ => {
            let (extra, rest) = if let Some(rest) = name.strip_prefix("PP") {
                (Connective::Circ, rest)
            } else if let Some(rest) = name.strip_prefix("IS") {
                (Connective::Nabla, rest)
            } else {
                return Err(unknown());
            };
            let carrier = indexed_carrier(rest).ok_or_else(unknown)?;
            Ok(catalog_algebra(name, carrier, Some(extra)))
        }
    }
}

/// Instantiates a one-variable term at `x`.
pub fn instantiate(term: &Formula, x: &Formula) -> Formula {
    let Some(v) = term.props().into_iter().next() else {
        return term.clone();
    };
    let mut sigma = Substitution::new();
    sigma.insert(v, x.clone());
    term.apply(&sigma)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> Formula {
        parse_formula(s, &Signature::full()).unwrap()
    }

    fn at(a: &FiniteAlgebra, pairs: &[(&str, &str)]) -> Assignment {
        pairs
            .iter()
            .map(|(v, e)| (Arc::from(*v), a.index_of(e).unwrap()))
            .collect()
    }

    #[test]
    fn evaluate_examples() {
        let dm4 = builtin("DM4").unwrap();
        let v = dm4.evaluate(&f("~p"), &at(&dm4, &[("p", "n")])).unwrap();
        assert_eq!(dm4.element(v), "n");
        let pp6 = builtin("PP6").unwrap();
        let v = pp6.evaluate(&f("*p"), &at(&pp6, &[("p", "b")])).unwrap();
        assert_eq!(pp6.element(v), "F^");
        let is6 = builtin("IS6").unwrap();
        let v = is6.evaluate(&f("!p"), &at(&is6, &[("p", "F^")])).unwrap();
        assert_eq!(is6.element(v), "F^");
    }

    #[test]
    fn evaluate_errors() {
        let dm4 = builtin("DM4").unwrap();
        assert!(matches!(
            dm4.evaluate(&f("p & q"), &at(&dm4, &[("p", "n")])),
            Err(Error::UnassignedVariable(v)) if v == "q"
        ));
        assert!(matches!(
            dm4.evaluate(&f("*p"), &at(&dm4, &[("p", "n")])),
            Err(Error::SignatureMismatch(_))
        ));
    }

    #[test]
    fn check_equation_examples() {
        let dm4 = builtin("DM4").unwrap();
        let sig = Signature::full();
        assert_eq!(dm4.check_equation(&Equation::parse("~~x = x", &sig).unwrap()).unwrap(), None);
        let w = dm4
            .check_equation(&Equation::parse("x | ~x = 1", &sig).unwrap())
            .unwrap()
            .unwrap();
        assert_eq!(dm4.render_assignment(&w), "x=n");
        let pp6 = builtin("PP6").unwrap();
        assert_eq!(pp6.check_equation(&Equation::parse("**x = 1", &sig).unwrap()).unwrap(), None);
        assert!(dm4.check_equation(&Equation::parse("*x = x", &sig).unwrap()).is_err());
    }

    #[test]
    fn catalog_shapes() {
        for name in BUILTIN_NAMES {
            let a = builtin(name).unwrap();
            assert_eq!(a.name, name);
            a.validate_lattice().unwrap();
            assert_eq!(a.element(a.bottom()), a.elements[0]);
            assert_eq!(a.elements.last().map(String::as_str), Some(a.element(a.top())));
        }
        assert!(builtin("PP7").is_err());
        assert!(builtin("XY").is_err());
        let pp6 = builtin("PP6").unwrap();
        let i = |e| pp6.index_of(e).unwrap();
        assert!(!pp6.leq(i("n"), i("b")) && !pp6.leq(i("b"), i("n")));
        assert_eq!(pp6.meet(i("n"), i("b")), i("f"));
        assert_eq!(pp6.join(i("n"), i("b")), i("t"));
        let up: Vec<_> = pp6.upset(i("b")).unwrap().into_iter().map(|x| pp6.element(x)).collect();
        assert_eq!(up, vec!["b", "t", "T^"]);
    }

    #[test]
    fn classes_on_builtins() {
        for name in ["B2", "K3", "DM4"] {
            assert!(builtin(name).unwrap().satisfies(AxiomClass::DM), "{name}");
        }
        for i in 2..=6 {
            assert!(builtin(&format!("IS{i}")).unwrap().satisfies(AxiomClass::IS), "IS{i}");
            assert!(builtin(&format!("PP{i}")).unwrap().satisfies(AxiomClass::PP), "PP{i}");
        }
        assert!(builtin("DM4").unwrap().check_axiom_class(AxiomClass::PP).is_err());
    }

    #[test]
    fn mutated_negation_fails_dm() {
        let dm4 = builtin("DM4").unwrap();
        let bad = dm4.replace_table(Connective::Neg, (0..4).collect()).unwrap();
        let failures = bad.check_axiom_class(AxiomClass::DM).unwrap();
        assert_eq!(failures.len(), 1);
        assert_eq!(failures[0].label, "DM2");
        // ~(f & t) = f but ~f | ~t = t under the identity negation
        let w = &failures[0].witness;
        let lhs = bad.evaluate(&failures[0].equation.lhs, w).unwrap();
        let rhs = bad.evaluate(&failures[0].equation.rhs, w).unwrap();
        assert_ne!(lhs, rhs);
    }

    #[test]
    fn expansions_match_catalog() {
        for (base, pp, is) in [("DM4", "PP6", "IS6"), ("K3", "PP5", "IS5"), ("B2", "PP4", "IS4")] {
            let a = builtin(base).unwrap();
            assert_eq!(expand_with_perfection(&a).unwrap(), builtin(pp).unwrap());
            assert_eq!(expand_with_nabla(&a).unwrap(), builtin(is).unwrap());
        }
        let bad = builtin("DM4")
            .unwrap()
            .replace_table(Connective::Neg, (0..4).collect())
            .unwrap();
        assert!(matches!(expand_with_perfection(&bad), Err(Error::NotInClass { .. })));
    }

    #[test]
    fn expansion_names_avoid_collisions() {
        let mut a = builtin("B2").unwrap();
        a.elements = vec!["F^".into(), "T^".into()];
        let e = expand_with_perfection(&a).unwrap();
        assert_eq!(e.elements, vec!["F^'", "F^", "T^", "T^'"]);
        assert!(e.satisfies(AxiomClass::PP));
    }

    #[test]
    fn derivations_and_round_trips() {
        for i in 2..=6 {
            let is = builtin(&format!("IS{i}")).unwrap();
            let pp = builtin(&format!("PP{i}")).unwrap();
            let d = derive_perfection(&is).unwrap();
            assert_eq!(d, pp);
            assert_eq!(d.name, format!("PP{i}"));
            assert_eq!(derive_nabla(&pp).unwrap(), is);
            assert_eq!(derive_nabla(&derive_perfection(&is).unwrap()).unwrap(), is);
            assert_eq!(derive_perfection(&derive_nabla(&pp).unwrap()).unwrap(), pp);
        }
        assert!(derive_perfection(&builtin("PP6").unwrap()).is_err());
    }

    #[test]
    fn translations() {
        assert_eq!(translate_to_pp(&f("!p")), f("~*p | p"));
        assert_eq!(translate_to_pp(&f("p")), f("p"));
        assert_eq!(translate_to_pp(&f("!!p")), f("~*(~*p | p) | (~*p | p)"));
        assert_eq!(translate_to_is(&f("*p")), f("~!(p & ~p)"));
        assert_eq!(translate_to_is(&f("1")), f("1"));
        let pp6 = builtin("PP6").unwrap();
        let back = translate_to_pp(&translate_to_is(&f("*p")));
        assert_eq!(pp6.unary_table(&back).unwrap(), pp6.unary_table(&f("*p")).unwrap());
    }

    #[test]
    fn reducts() {
        let pp6 = builtin("PP6").unwrap();
        let is6 = builtin("IS6").unwrap();
        let dm = Signature::de_morgan();
        assert_eq!(pp6.reduct(&dm).unwrap(), is6.reduct(&dm).unwrap());
        assert_eq!(pp6.reduct(&pp6.signature()).unwrap(), pp6);
        assert!(builtin("DM4").unwrap().reduct(&Signature::perfect_paradefinite()).is_err());
    }

    #[test]
    fn identity_lemmas() {
        for i in 2..=6 {
            let is = builtin(&format!("IS{i}")).unwrap();
            for (label, eq) in is_identities() {
                assert_eq!(is.check_equation(&eq).unwrap(), None, "IS{i} {label}");
            }
            let pp = builtin(&format!("PP{i}")).unwrap();
            for (label, eq) in pp_identities() {
                assert_eq!(pp.check_equation(&eq).unwrap(), None, "PP{i} {label}");
            }
        }
    }

    #[test]
    fn unary_functions() {
        let pp2 = builtin("PP2").unwrap();
        let fs = unary_definable_functions(&pp2).unwrap();
        assert_eq!(fs.len(), 4);
        assert_eq!(fs[0].term, f("p"));
        for tf in &fs {
            assert_eq!(pp2.unary_table(&tf.term).unwrap(), tf.table);
        }
        let pp6 = builtin("PP6").unwrap();
        let (ft, tt) = (pp6.index_of("F^").unwrap(), pp6.index_of("T^").unwrap());
        for tf in unary_definable_functions(&pp6).unwrap() {
            assert_eq!(pp6.unary_table(&tf.term).unwrap(), tf.table);
            let complement = (0..6).all(|a| pp6.join(a, tf.table[a]) == tt && pp6.meet(a, tf.table[a]) == ft);
            assert!(!complement, "{}", tf.term);
        }
    }

    #[test]
    fn isomorphisms() {
        let dm4 = builtin("DM4").unwrap();
        let mut swapped = dm4.clone();
        swapped.elements = vec!["f".into(), "b".into(), "n".into(), "t".into()];
        assert!(isomorphism(&dm4, &swapped).unwrap().is_some());
        assert!(isomorphism(&dm4, &builtin("K3").unwrap()).unwrap().is_none());
        let m = isomorphism(&dm4, &dm4).unwrap().unwrap();
        assert_eq!(m, vec![0, 1, 2, 3]);
    }

    #[test]
    fn json_round_trip() {
        for name in BUILTIN_NAMES {
            let a = builtin(name).unwrap();
            let back = FiniteAlgebra::from_json(&a.to_json()).unwrap();
            assert_eq!(back, a);
            assert_eq!(back.name, a.name);
        }
        let mut doc = builtin("B2").unwrap().to_json();
        doc["tables"]["&"] = serde_json::json!([["f", "t"], ["t", "t"]]);
        assert!(FiniteAlgebra::from_json(&doc).is_err());
        let mut doc = builtin("B2").unwrap().to_json();
        doc["tables"]["~"] = serde_json::json!(["t", "x"]);
        assert!(matches!(FiniteAlgebra::from_json(&doc), Err(Error::Format(_))));
    }

    #[test]
    fn permutations() {
        let mut v = vec![0, 1, 2];
        let mut count = 1;
        while next_permutation(&mut v) {
            count += 1;
        }
        assert_eq!(count, 6);
    }
}
