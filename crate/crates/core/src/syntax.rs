//! Signatures, formulas, the concrete ASCII grammar, substitutions and
//! (generalized) subformulas.
//!
//! Grammar, loosest to tightest:
//!
//! ```text
//! disj  := conj ('|' conj)*        left associative
//! conj  := unary ('&' unary)*      left associative
//! unary := ('~' | '*' | '!') unary | atom
//! atom  := VAR | '1' | '0' | '(' disj ')'
//! VAR   := letter (letter | digit | '_')*
//! ```
//!
//! `~` is the De Morgan negation, `*` the perfection operator, `!` the
//! involutive Stone operator, `1` and `0` the lattice bounds.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// The connectives known to the grammar. The derived order is part of the
/// canonical formula order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Connective {
    Top,
    Bot,
    Neg,
    Circ,
    Nabla,
    And,
    Or,
}

impl Connective {
    pub const ALL: [Connective; 7] = [
        Connective::Top,
        Connective::Bot,
        Connective::Neg,
        Connective::Circ,
        Connective::Nabla,
        Connective::And,
        Connective::Or,
    ];

    pub fn arity(self) -> usize {
        match self {
            Connective::Top | Connective::Bot => 0,
            Connective::Neg | Connective::Circ | Connective::Nabla => 1,
            Connective::And | Connective::Or => 2,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Connective::Top => "1",
            Connective::Bot => "0",
            Connective::Neg => "~",
            Connective::Circ => "*",
            Connective::Nabla => "!",
            Connective::And => "&",
            Connective::Or => "|",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Connective> {
        Connective::ALL.into_iter().find(|c| c.symbol() == s)
    }

    fn precedence(self) -> u8 {
        match self {
            Connective::Or => 1,
            Connective::And => 2,
            _ => 3,
        }
    }
}

impl fmt::Display for Connective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// A propositional signature: a set of connectives, each with its fixed arity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature(BTreeSet<Connective>);

impl Signature {
    pub fn new(connectives: impl IntoIterator<Item = Connective>) -> Self {
        Signature(connectives.into_iter().collect())
    }

    /// Bounded lattices: `&`, `|`, `1`, `0`.
    pub fn bounded_lattice() -> Self {
        Signature::new([
            Connective::And,
            Connective::Or,
            Connective::Top,
            Connective::Bot,
        ])
    }

    /// De Morgan signature: bounded lattice plus `~`.
    pub fn de_morgan() -> Self {
        let mut sig = Signature::bounded_lattice();
        sig.0.insert(Connective::Neg);
        sig
    }

    /// Involutive Stone signature: De Morgan plus `!`.
    pub fn involutive_stone() -> Self {
        let mut sig = Signature::de_morgan();
        sig.0.insert(Connective::Nabla);
        sig
    }

    /// Perfect paradefinite signature: De Morgan plus `*`.
    pub fn perfect_paradefinite() -> Self {
        let mut sig = Signature::de_morgan();
        sig.0.insert(Connective::Circ);
        sig
    }

    /// Every connective the grammar knows.
    pub fn full() -> Self {
        Signature::new(Connective::ALL)
    }

    /// Looks up a signature by its short name (`bL`, `DM`, `IS`, `PP`, `full`).
    pub fn named(name: &str) -> Result<Self> {
        match name {
            "bL" | "BL" | "bl" => Ok(Signature::bounded_lattice()),
            "DM" | "dm" => Ok(Signature::de_morgan()),
            "IS" | "is" => Ok(Signature::involutive_stone()),
            "PP" | "pp" => Ok(Signature::perfect_paradefinite()),
            "full" => Ok(Signature::full()),
            other => Err(Error::UnknownName(format!("signature {other}"))),
        }
    }

    pub fn contains(&self, c: Connective) -> bool {
        self.0.contains(&c)
    }

    pub fn is_subset(&self, other: &Signature) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = Connective> + '_ {
        self.0.iter().copied()
    }

    pub fn with(&self, c: Connective) -> Signature {
        let mut sig = self.clone();
        sig.0.insert(c);
        sig
    }

    pub fn without(&self, c: Connective) -> Signature {
        let mut sig = self.clone();
        sig.0.remove(&c);
        sig
    }

    /// Checks that every connective of `formula` belongs to this signature.
    pub fn admits(&self, formula: &Formula) -> Result<()> {
        match formula {
            Formula::Var(_) => Ok(()),
            Formula::App(c, args) => {
                if !self.contains(*c) {
                    return Err(Error::SignatureMismatch(format!(
                        "connective `{c}` of `{formula}` is not in signature {self}"
                    )));
                }
                args.iter().try_for_each(|a| self.admits(a))
            }
        }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "}}")
    }
}

/// A propositional formula. The derived `Ord` is the canonical structural
/// order used for every set of formulas: variables (by name) precede
/// applications, applications compare by connective then arguments.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Var(Arc<str>),
    App(Connective, Arc<[Formula]>),
}

impl Formula {
    pub fn var(name: &str) -> Formula {
        Formula::Var(Arc::from(name))
    }

    pub fn app(c: Connective, args: Vec<Formula>) -> Formula {
        assert_eq!(c.arity(), args.len(), "arity mismatch for `{c}`");
        Formula::App(c, Arc::from(args))
    }

    pub fn top() -> Formula {
        Formula::app(Connective::Top, vec![])
    }

    pub fn bot() -> Formula {
        Formula::app(Connective::Bot, vec![])
    }

    pub fn neg(a: Formula) -> Formula {
        Formula::app(Connective::Neg, vec![a])
    }

    pub fn circ(a: Formula) -> Formula {
        Formula::app(Connective::Circ, vec![a])
    }

    pub fn nabla(a: Formula) -> Formula {
        Formula::app(Connective::Nabla, vec![a])
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::app(Connective::And, vec![a, b])
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::app(Connective::Or, vec![a, b])
    }

    /// Left-nested conjunction; `1` for the empty family.
    pub fn conjunction<'a>(items: impl IntoIterator<Item = &'a Formula>) -> Formula {
        items
            .into_iter()
            .cloned()
            .reduce(Formula::and)
            .unwrap_or_else(Formula::top)
    }

    /// Left-nested disjunction `(..(a1 | a2) | ..) | an`; `0` for the empty family.
    pub fn disjunction<'a>(items: impl IntoIterator<Item = &'a Formula>) -> Formula {
        items
            .into_iter()
            .cloned()
            .reduce(Formula::or)
            .unwrap_or_else(Formula::bot)
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Formula::Var(_))
    }

    pub fn var_name(&self) -> Option<&Arc<str>> {
        match self {
            Formula::Var(v) => Some(v),
            Formula::App(..) => None,
        }
    }

    pub fn connective(&self) -> Option<Connective> {
        match self {
            Formula::Var(_) => None,
            Formula::App(c, _) => Some(*c),
        }
    }

    pub fn args(&self) -> &[Formula] {
        match self {
            Formula::Var(_) => &[],
            Formula::App(_, args) => args,
        }
    }

    /// Nesting depth of connectives; variables and constants have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Var(_) => 0,
            Formula::App(_, args) if args.is_empty() => 0,
            Formula::App(_, args) => 1 + args.iter().map(Formula::depth).max().unwrap_or(0),
        }
    }

    /// Number of symbol occurrences.
    pub fn size(&self) -> usize {
        1 + self.args().iter().map(Formula::size).sum::<usize>()
    }

    pub fn props(&self) -> BTreeSet<Arc<str>> {
        let mut out = BTreeSet::new();
        self.collect_props(&mut out);
        out
    }

    fn collect_props(&self, out: &mut BTreeSet<Arc<str>>) {
        match self {
            Formula::Var(v) => {
                out.insert(v.clone());
            }
            Formula::App(_, args) => args.iter().for_each(|a| a.collect_props(out)),
        }
    }

    pub fn connectives(&self) -> BTreeSet<Connective> {
        let mut out = BTreeSet::new();
        let mut stack = vec![self];
        while let Some(f) = stack.pop() {
            if let Formula::App(c, args) = f {
                out.insert(*c);
                stack.extend(args.iter());
            }
        }
        out
    }

    /// Homomorphic replacement of variables.
    pub fn apply(&self, sigma: &Substitution) -> Formula {
        match self {
            Formula::Var(v) => sigma.get(v).cloned().unwrap_or_else(|| self.clone()),
            Formula::App(c, args) => Formula::App(*c, args.iter().map(|a| a.apply(sigma)).collect()),
        }
    }

    /// Replace every connective application bottom-up through `f`, leaving
    /// variables untouched.
    pub fn map_apps(&self, f: &impl Fn(Connective, Vec<Formula>) -> Formula) -> Formula {
        match self {
            Formula::Var(_) => self.clone(),
            Formula::App(c, args) => f(*c, args.iter().map(|a| a.map_apps(f)).collect()),
        }
    }

    pub fn parse(text: &str, sig: &Signature) -> Result<Formula> {
        parse_formula(text, sig)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Var(v) => f.write_str(v),
            Formula::App(c, args) => match args.len() {
                0 => f.write_str(c.symbol()),
                1 => {
                    f.write_str(c.symbol())?;
                    let a = &args[0];
                    if binary_precedence(a).is_some() {
                        write!(f, "({a})")
                    } else {
                        write!(f, "{a}")
                    }
                }
                _ => {
                    let own = c.precedence();
                    let (l, r) = (&args[0], &args[1]);
                    match binary_precedence(l) {
                        Some(p) if p < own => write!(f, "({l})")?,
                        _ => write!(f, "{l}")?,
                    }
                    write!(f, " {} ", c.symbol())?;
                    match binary_precedence(r) {
                        Some(p) if p <= own => write!(f, "({r})"),
                        _ => write!(f, "{r}"),
                    }
                }
            },
        }
    }
}

fn binary_precedence(f: &Formula) -> Option<u8> {
    match f {
        Formula::App(c, _) if c.arity() == 2 => Some(c.precedence()),
        _ => None,
    }
}

/// Renders a formula in the ASCII grammar.
pub fn render_formula(f: &Formula) -> String {
    f.to_string()
}

/// Renders a finite family as comma-separated formulas.
pub fn render_set<'a>(items: impl IntoIterator<Item = &'a Formula>) -> String {
    items
        .into_iter()
        .map(Formula::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

/// A finite map from variables to formulas, identity elsewhere.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Substitution(BTreeMap<Arc<str>, Formula>);

impl Substitution {
    pub fn new() -> Self {
        Substitution::default()
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, Formula)>) -> Self {
        Substitution(
            pairs
                .into_iter()
                .map(|(v, f)| (Arc::from(v), f))
                .collect(),
        )
    }

    pub fn insert(&mut self, var: Arc<str>, value: Formula) {
        self.0.insert(var, value);
    }

    pub fn get(&self, var: &str) -> Option<&Formula> {
        self.0.get(var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Arc<str>, &Formula)> {
        self.0.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (v, phi)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v} := {phi}")?;
        }
        write!(f, "}}")
    }
}

pub fn apply_substitution(sigma: &Substitution, phi: &Formula) -> Formula {
    phi.apply(sigma)
}

/// Smallest set containing `formulas` and closed under immediate subterms.
pub fn subformulas<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> BTreeSet<Formula> {
    let mut out = BTreeSet::new();
    let mut stack: Vec<&Formula> = formulas.into_iter().collect();
    while let Some(f) = stack.pop() {
        if out.insert(f.clone()) {
            stack.extend(f.args().iter());
        }
    }
    out
}

/// `sub(Φ ∪ Ψ)` together with every instance of a formula of `xi` obtained by
/// mapping its variables into `sub(Φ ∪ Ψ)`.
pub fn generalized_subformulas(
    premises: &[Formula],
    conclusions: &[Formula],
    xi: &[Formula],
) -> BTreeSet<Formula> {
    let sub = subformulas(premises.iter().chain(conclusions));
    let pool: Vec<&Formula> = sub.iter().collect();
    let mut out = sub.clone();
    for pattern in xi {
        let vars: Vec<Arc<str>> = pattern.props().into_iter().collect();
        for choice in tuples(pool.len(), vars.len()) {
            let mut sigma = Substitution::new();
            for (v, &i) in vars.iter().zip(&choice) {
                sigma.insert(v.clone(), pool[i].clone());
            }
            out.insert(pattern.apply(&sigma));
        }
    }
    out
}

/// All `len`-tuples over `0..base` in lexicographic order (first position most
/// significant). Yields the empty tuple once when `len == 0`.
pub fn tuples(base: usize, len: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut current = if base == 0 && len > 0 {
        None
    } else {
        Some(vec![0; len])
    };
    std::iter::from_fn(move || {
        let out = current.clone()?;
        let mut next = out.clone();
        let mut i = len;
        loop {
            if i == 0 {
                current = None;
                break;
            }
            i -= 1;
            next[i] += 1;
            if next[i] < base {
                current = Some(next);
                break;
            }
            next[i] = 0;
        }
        Some(out)
    })
}

/// Smallest identifier of the form `p0, p1, ...` not in `avoid`.
pub fn fresh_variable(avoid: &BTreeSet<Arc<str>>) -> Arc<str> {
    (0..)
        .map(|i| format!("p{i}"))
        .find(|name| !avoid.contains(name.as_str()))
        .map(Arc::from)
        .expect("unbounded candidate pool")
}

/// Parses one formula in the ASCII grammar, rejecting connectives outside `sig`.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula> {
    let mut p = Parser {
        src: text,
        pos: 0,
        sig,
    };
    let f = p.disjunction()?;
    p.skip_ws();
    if p.pos < text.len() {
        return Err(p.error(format!("unexpected `{}`", p.peek_char().unwrap_or(' '))));
    }
    Ok(f)
}

/// Parses a comma-separated list of formulas; blank input is the empty list.
/// Duplicates are dropped, first occurrence wins.
pub fn parse_formula_list(text: &str, sig: &Signature) -> Result<Vec<Formula>> {
    let mut out: Vec<Formula> = Vec::new();
    if text.trim().is_empty() {
        return Ok(out);
    }
    let mut offset = 0;
    for piece in text.split(',') {
        let f = parse_formula(piece, sig).map_err(|e| match e {
            Error::Parse { pos, message } => Error::Parse {
                pos: pos + offset,
                message,
            },
            other => other,
        })?;
        if !out.contains(&f) {
            out.push(f);
        }
        offset += piece.len() + 1;
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    sig: &'a Signature,
}

impl Parser<'_> {
    fn error(&self, message: String) -> Error {
        Error::Parse {
            pos: self.pos,
            message,
        }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek_char() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek_char(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.peek_char()
    }

    fn connective(&self, c: Connective) -> Result<Connective> {
        if self.sig.contains(c) {
            Ok(c)
        } else {
            Err(Error::UnknownConnective {
                symbol: c.symbol().to_string(),
                pos: self.pos,
                signature: self.sig.to_string(),
            })
        }
    }

    fn disjunction(&mut self) -> Result<Formula> {
        let mut lhs = self.conjunction()?;
        while self.peek() == Some('|') {
            let c = self.connective(Connective::Or)?;
            self.pos += 1;
            let rhs = self.conjunction()?;
            lhs = Formula::app(c, vec![lhs, rhs]);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut lhs = self.unary()?;
        while self.peek() == Some('&') {
            let c = self.connective(Connective::And)?;
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Formula::app(c, vec![lhs, rhs]);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula> {
        let c = match self.peek() {
            Some('~') => Connective::Neg,
            Some('*') => Connective::Circ,
            Some('!') => Connective::Nabla,
            _ => return self.atom(),
        };
        let c = self.connective(c)?;
        self.pos += 1;
        let arg = self.unary()?;
        Ok(Formula::app(c, vec![arg]))
    }

    fn atom(&mut self) -> Result<Formula> {
        match self.peek() {
            None => Err(self.error("unexpected end of input".into())),
            Some('(') => {
                self.pos += 1;
                let inner = self.disjunction()?;
                if self.peek() != Some(')') {
                    return Err(self.error("expected `)`".into()));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some('1') => {
                let c = self.connective(Connective::Top)?;
                self.pos += 1;
                Ok(Formula::app(c, vec![]))
            }
            Some('0') => {
                let c = self.connective(Connective::Bot)?;
                self.pos += 1;
                Ok(Formula::app(c, vec![]))
            }
            Some(c) if c.is_alphabetic() => {
                let start = self.pos;
                while let Some(c) = self.peek_char() {
                    if c.is_alphanumeric() || c == '_' {
                        self.pos += c.len_utf8();
                    } else {
                        break;
                    }
                }
                Ok(Formula::var(&self.src[start..self.pos]))
            }
            Some(c) => Err(self.error(format!("unexpected `{c}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pp(s: &str) -> Formula {
        parse_formula(s, &Signature::full()).unwrap()
    }

    #[test]
    fn parses_grammar_cases() {
        let p = Formula::var("p");
        let q = Formula::var("q");
        let r = Formula::var("r");
        assert_eq!(
            pp("*(p&q) | ~p"),
            Formula::or(Formula::circ(Formula::and(p.clone(), q.clone())), Formula::neg(p.clone()))
        );
        assert_eq!(pp("~~p"), Formula::neg(Formula::neg(p.clone())));
        assert_eq!(
            pp("p & q | r"),
            Formula::or(Formula::and(p.clone(), q.clone()), r.clone())
        );
        assert_eq!(
            pp("p | q | r"),
            Formula::or(Formula::or(p.clone(), q.clone()), r.clone())
        );
        assert_eq!(pp(" 1 & 0 "), Formula::and(Formula::top(), Formula::bot()));
    }

    #[test]
    fn renders_minimal_parentheses() {
        for s in [
            "*(p & q) | ~p",
            "~!(p & ~p)",
            "p & q | r",
            "p & (q | r)",
            "p | (q | r)",
            "(p | q) & r",
            "~*p | p",
            "x_1 & Y2",
        ] {
            assert_eq!(pp(s).to_string(), s);
        }
    }

    #[test]
    fn rejects_connective_outside_signature() {
        let err = parse_formula("*p", &Signature::de_morgan()).unwrap_err();
        assert!(matches!(err, Error::UnknownConnective { pos: 0, .. }), "{err}");
        let err = parse_formula("p & !q", &Signature::perfect_paradefinite()).unwrap_err();
        assert!(matches!(err, Error::UnknownConnective { pos: 4, .. }), "{err}");
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_formula("p & (q", &Signature::full()) {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 6),
            other => panic!("{other:?}"),
        }
        match parse_formula("p q", &Signature::full()) {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 2),
            other => panic!("{other:?}"),
        }
        assert!(parse_formula("", &Signature::full()).is_err());
        assert!(parse_formula("p & ", &Signature::full()).is_err());
        match parse_formula_list("p, q &", &Signature::full()) {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 6),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn formula_lists() {
        let sig = Signature::full();
        assert!(parse_formula_list("  ", &sig).unwrap().is_empty());
        let l = parse_formula_list("p,~p, p", &sig).unwrap();
        assert_eq!(l, vec![pp("p"), pp("~p")]);
    }

    #[test]
    fn subformula_closure() {
        let got = subformulas([&pp("*p & q")]);
        let want: BTreeSet<_> = ["*p & q", "*p", "p", "q"].into_iter().map(pp).collect();
        assert_eq!(got, want);
        assert_eq!(subformulas([&pp("p")]), BTreeSet::from([pp("p")]));
        assert_eq!(subformulas([&pp("1")]), BTreeSet::from([pp("1")]));
    }

    #[test]
    fn generalized_subformula_examples() {
        let got = generalized_subformulas(&[pp("p")], &[], &[pp("~x")]);
        assert_eq!(got, BTreeSet::from([pp("p"), pp("~p")]));

        let s_circ: Vec<_> = ["x", "~x", "*x", "~*x"].into_iter().map(pp).collect();
        let got = generalized_subformulas(&[], &[pp("p"), pp("~*p")], &s_circ);
        // sub = {p, *p, ~*p}; each of the 3 subformulas gets ~, * and ~* applied.
        let mut want: BTreeSet<Formula> = ["p", "*p", "~*p"].into_iter().map(pp).collect();
        for s in ["p", "*p", "~*p"] {
            for pat in ["~x", "*x", "~*x"] {
                let sigma = Substitution::from_pairs([("x", pp(s))]);
                want.insert(pp(pat).apply(&sigma));
            }
        }
        assert_eq!(got, want);
        for f in ["*p", "~*p", "**p", "~**p", "*~*p"] {
            assert!(got.contains(&pp(f)), "{f}");
        }

        let sub = subformulas([&pp("p | q")]);
        assert_eq!(generalized_subformulas(&[pp("p | q")], &[], &[]), sub);
    }

    #[test]
    fn substitution_examples() {
        let sigma = Substitution::from_pairs([("p", pp("q & r"))]);
        assert_eq!(pp("~p").apply(&sigma), pp("~(q & r)"));
        assert_eq!(pp("*p | ~q").apply(&Substitution::new()), pp("*p | ~q"));
        let sigma = Substitution::from_pairs([("p", pp("0"))]);
        assert_eq!(apply_substitution(&sigma, &pp("p | q")), pp("0 | q"));
    }

    #[test]
    fn fresh_variables() {
        let avoid: BTreeSet<Arc<str>> = ["p0", "p1", "q"].into_iter().map(Arc::from).collect();
        assert_eq!(&*fresh_variable(&avoid), "p2");
        assert_eq!(&*fresh_variable(&BTreeSet::new()), "p0");
    }

    #[test]
    fn tuple_enumeration() {
        assert_eq!(tuples(3, 0).collect::<Vec<_>>(), vec![Vec::<usize>::new()]);
        assert_eq!(tuples(0, 2).count(), 0);
        let t: Vec<_> = tuples(2, 2).collect();
        assert_eq!(t, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn signature_chain() {
        let bl = Signature::bounded_lattice();
        let dm = Signature::de_morgan();
        let is = Signature::involutive_stone();
        let pps = Signature::perfect_paradefinite();
        assert!(bl.is_subset(&dm) && dm.is_subset(&is) && dm.is_subset(&pps));
        assert!(!is.is_subset(&pps) && !pps.is_subset(&is));
        assert!(bl != dm && dm != is);
    }
}
