use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ppcalc::algebra::{
    builtin, derive_nabla, derive_perfection, expand_with_nabla, expand_with_perfection,
    translate_to_is, translate_to_pp, unary_definable_functions, Assignment, BUILTIN_NAMES,
};
use ppcalc::calculus::{
    builtin_calculus, countermodel_from_open, lift, prove_analytic, render_derivation, sfmla_prove,
    soundness, validate_derivation, validate_tree, Justification, SfmlaResult,
};
use ppcalc::matrix::{
    check_logic_properties, check_monadicity, dat_check, expand_matrix, lattice_filters,
    leibniz_congruence, reduce_matrix, sset_consequence,
};
use ppcalc::syntax::parse_formula_list;
use ppcalc::{
    AxiomClass, Calculus, Connective, Equation, FiniteAlgebra, Formula, Matrix, ProofResult,
    Signature, Verdict,
};

#[derive(Parser)]
#[command(name = "ppcalc", version, about = "Finite De Morgan algebras with perfection: equations, matrices, calculi")]
struct Cli {
    /// Print structured JSON documents instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Finite algebras: catalog, equations, classes, expansions, translations.
    #[command(subcommand)]
    Algebra(AlgebraCmd),
    /// Logical matrices: consequence, filters, congruences, properties.
    #[command(subcommand)]
    Matrix(MatrixCmd),
    /// Symmetrical calculi: proof search, soundness, lifting.
    #[command(subcommand)]
    Calculus(CalculusCmd),
}

#[derive(Subcommand)]
enum AlgebraCmd {
    /// List the built-in algebras.
    List,
    /// Print the operation tables of an algebra.
    Show { algebra: String },
    /// Check an equation `lhs = rhs` under every assignment.
    CheckEq { algebra: String, equation: String },
    /// Check the axioms of DM, IS or PP.
    CheckClass { algebra: String, class: String },
    /// Expand a De Morgan algebra with perfection.
    ExpandPp { algebra: String },
    /// Expand a De Morgan algebra with nabla.
    ExpandIs { algebra: String },
    /// Define perfection in an IS algebra.
    DerivePp { algebra: String },
    /// Define nabla in a PP algebra.
    DeriveIs { algebra: String },
    /// Restrict to a signature (bL, DM, IS, PP or full).
    Reduct { algebra: String, signature: String },
    /// Translate a formula between the nabla and perfection languages.
    Translate {
        #[arg(long, value_enum)]
        to: Target,
        formula: String,
    },
    /// List the unary term functions and look for a Boolean complement.
    Terms { algebra: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Is,
    Pp,
}

#[derive(Args)]
struct Statement {
    /// Comma-separated premises.
    #[arg(long, default_value = "")]
    prem: String,
    /// Comma-separated conclusions.
    #[arg(long, default_value = "")]
    conc: String,
}

impl Statement {
    fn parse(&self) -> Result<(Vec<Formula>, Vec<Formula>)> {
        let sig = Signature::full();
        let phi = parse_formula_list(&self.prem, &sig).context("premises")?;
        let psi = parse_formula_list(&self.conc, &sig).context("conclusions")?;
        Ok((phi, psi))
    }
}

#[derive(Subcommand)]
enum MatrixCmd {
    /// Decide Set-Set consequence over one or more matrices.
    Consequence {
        #[arg(required = true)]
        matrices: Vec<String>,
        #[command(flatten)]
        statement: Statement,
    },
    /// List the lattice filters of an algebra.
    Filters {
        algebra: String,
        /// Only prime filters.
        #[arg(long)]
        prime: bool,
    },
    /// Compute the Leibniz congruence.
    Leibniz { matrix: String },
    /// Quotient by the Leibniz congruence.
    Reduce { matrix: String },
    /// Expand a De Morgan matrix with perfection.
    Expand { matrix: String },
    /// Paraconsistency, paracompleteness and gentle explosion.
    Props { matrix: String },
    /// Check that a set of one-variable formulas separates all elements.
    Monadic {
        matrix: String,
        /// Comma-separated separators.
        #[arg(long)]
        sep: String,
    },
    /// Compare classical consequence with enriched consequence.
    Dat {
        #[arg(long, default_value = "PP6:up_b")]
        matrix: String,
        #[command(flatten)]
        statement: Statement,
    },
}

#[derive(Subcommand)]
enum CalculusCmd {
    /// Print the rules of a calculus.
    Show { calculus: String },
    /// Run analytic proof search.
    Prove {
        calculus: String,
        #[command(flatten)]
        statement: Statement,
        /// Matrix used for countermodel extraction.
        #[arg(long)]
        matrix: Option<String>,
        /// Comma-separated one-variable formulas overriding the certificate.
        #[arg(long)]
        xi: Option<String>,
    },
    /// Check every rule against a matrix.
    Soundness { calculus: String, matrix: String },
    /// Build the Set-Fmla calculus by disjunctive lifting.
    Lift {
        calculus: String,
        /// Write the lifted calculus document here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bounded forward search in a Set-Fmla calculus.
    SfmlaProve {
        calculus: String,
        #[command(flatten)]
        statement: Statement,
        /// Lift the calculus first.
        #[arg(long)]
        lift: bool,
        /// Maximum formula depth kept during search.
        #[arg(long)]
        depth: Option<usize>,
    },
}

/// A finished command: text for humans, a document for `--json`, and whether
/// the verdict is positive.
struct Report {
    text: String,
    doc: Value,
    ok: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Algebra(cmd) => algebra(cmd),
        Command::Matrix(cmd) => matrix(cmd),
        Command::Calculus(cmd) => calculus(cmd),
    };
    match result {
        Ok(report) => {
            let mut body = if cli.json {
                serde_json::to_string_pretty(&report.doc).expect("json")
            } else {
                report.text
            };
            if !body.ends_with('\n') {
                body.push('\n');
            }
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let _ = std::io::stdout().lock().write_all(body.as_bytes());
            if report.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read_doc(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_algebra(spec: &str) -> Result<FiniteAlgebra> {
    if BUILTIN_NAMES.contains(&spec) {
        return Ok(builtin(spec)?);
    }
    let path = Path::new(spec);
    if path.exists() {
        return Ok(FiniteAlgebra::from_json(&read_doc(path)?)?);
    }
    bail!("unknown algebra `{spec}` (not a built-in name or a file)")
}

fn load_matrix(spec: &str) -> Result<Matrix> {
    let path = Path::new(spec);
    if path.exists() {
        return Ok(Matrix::from_json(&read_doc(path)?)?);
    }
    Ok(Matrix::parse_address(spec)?)
}

fn load_calculus(spec: &str) -> Result<Calculus> {
    let path = Path::new(spec);
    if path.exists() {
        return Ok(Calculus::from_json(&read_doc(path)?)?);
    }
    Ok(builtin_calculus(spec)?)
}

fn strs(fs: &[Formula]) -> Vec<String> {
    fs.iter().map(Formula::to_string).collect()
}

fn assignment_doc(a: &FiniteAlgebra, h: &Assignment) -> Value {
    let map: serde_json::Map<String, Value> = h
        .iter()
        .map(|(v, &x)| (v.to_string(), json!(a.element(x))))
        .collect();
    Value::Object(map)
}

/// The documented countermodel block: assignment, then each formula with its
/// value and designation.
fn countermodel_block(m: &Matrix, h: &Assignment, phi: &[Formula], psi: &[Formula]) -> Result<(String, Value)> {
    let prem = m.valuation_rows(h, phi)?;
    let conc = m.valuation_rows(h, psi)?;
    let width = prem
        .iter()
        .chain(&conc)
        .map(|r| r.formula.to_string().chars().count())
        .max()
        .unwrap_or(0);
    let mut text = format!("countermodel in {}\n  assignment: {}\n", m.label(), m.algebra.render_assignment(h));
    let rows_doc = |title: &str, rows: &[ppcalc::matrix::ValueRow], text: &mut String| -> Vec<Value> {
        if !rows.is_empty() {
            text.push_str(&format!("  {title}:\n"));
        }
        rows.iter()
            .map(|r| {
                let f = r.formula.to_string();
                let pad = width - f.chars().count();
                let flag = if r.designated { "designated" } else { "undesignated" };
                text.push_str(&format!("    {f}{}  {:<4} {flag}\n", " ".repeat(pad), r.value));
                json!({"formula": f, "value": r.value, "designated": r.designated})
            })
            .collect()
    };
    let p = rows_doc("premises", &prem, &mut text);
    let c = rows_doc("conclusions", &conc, &mut text);
    let doc = json!({
        "matrix": m.label(),
        "assignment": assignment_doc(&m.algebra, h),
        "premises": p,
        "conclusions": c,
    });
    Ok((text, doc))
}

fn verdict_report(ms: &[Matrix], v: &Verdict, phi: &[Formula], psi: &[Formula]) -> Result<(String, Value)> {
    match v {
        Verdict::Holds => Ok(("HOLDS\n".into(), json!({"verdict": "holds"}))),
        Verdict::Fails(cm) => {
            let (block, doc) = countermodel_block(&ms[cm.matrix], &cm.valuation, phi, psi)?;
            Ok((format!("FAILS\n{block}"), json!({"verdict": "fails", "countermodel": doc})))
        }
    }
}

fn document(doc: Value) -> Report {
    Report {
        text: serde_json::to_string_pretty(&doc).expect("json"),
        doc,
        ok: true,
    }
}

fn algebra(cmd: AlgebraCmd) -> Result<Report> {
    match cmd {
        AlgebraCmd::List => {
            let mut text = String::new();
            let mut docs = Vec::new();
            for name in BUILTIN_NAMES {
                let a = builtin(name)?;
                text.push_str(&format!("{name:<4} {} elements  signature {}\n", a.size(), a.signature()));
                docs.push(json!({"name": name, "elements": a.elements, "signature": a.signature().to_string()}));
            }
            Ok(Report { text, doc: json!(docs), ok: true })
        }
        AlgebraCmd::Show { algebra } => {
            let a = load_algebra(&algebra)?;
            Ok(Report { text: a.to_string(), doc: a.to_json(), ok: true })
        }
        AlgebraCmd::CheckEq { algebra, equation } => {
            let a = load_algebra(&algebra)?;
            let eq = Equation::parse(&equation, &a.signature())?;
            match a.check_equation(&eq)? {
                None => Ok(Report {
                    text: format!("HOLDS  {eq} on {}\n", a.name),
                    doc: json!({"verdict": "holds", "equation": eq.to_string()}),
                    ok: true,
                }),
                Some(h) => {
                    let l = a.element(a.evaluate(&eq.lhs, &h)?).to_string();
                    let r = a.element(a.evaluate(&eq.rhs, &h)?).to_string();
                    Ok(Report {
                        text: format!(
                            "FAILS  {eq} on {}\n  witness: {}\n  lhs = {l}, rhs = {r}\n",
                            a.name,
                            a.render_assignment(&h)
                        ),
                        doc: json!({
                            "verdict": "fails",
                            "equation": eq.to_string(),
                            "witness": assignment_doc(&a, &h),
                            "lhs": l,
                            "rhs": r,
                        }),
                        ok: false,
                    })
                }
            }
        }
        AlgebraCmd::CheckClass { algebra, class } => {
            let a = load_algebra(&algebra)?;
            let class = AxiomClass::parse(&class)?;
            let failures = a.check_axiom_class(class)?;
            let mut text = if failures.is_empty() {
                format!("HOLDS  {} is in {class}\n", a.name)
            } else {
                format!("FAILS  {} is not in {class}\n", a.name)
            };
            let mut docs = Vec::new();
            for f in &failures {
                text.push_str(&format!("  {}: {}  witness {}\n", f.label, f.equation, a.render_assignment(&f.witness)));
                docs.push(json!({
                    "label": f.label,
                    "equation": f.equation.to_string(),
                    "witness": assignment_doc(&a, &f.witness),
                }));
            }
            Ok(Report {
                text,
                doc: json!({"verdict": if failures.is_empty() { "holds" } else { "fails" }, "failures": docs}),
                ok: failures.is_empty(),
            })
        }
        AlgebraCmd::ExpandPp { algebra } => Ok(document(expand_with_perfection(&load_algebra(&algebra)?)?.to_json())),
        AlgebraCmd::ExpandIs { algebra } => Ok(document(expand_with_nabla(&load_algebra(&algebra)?)?.to_json())),
        AlgebraCmd::DerivePp { algebra } => Ok(document(derive_perfection(&load_algebra(&algebra)?)?.to_json())),
        AlgebraCmd::DeriveIs { algebra } => Ok(document(derive_nabla(&load_algebra(&algebra)?)?.to_json())),
        AlgebraCmd::Reduct { algebra, signature } => {
            let sig = Signature::named(&signature)?;
            Ok(document(load_algebra(&algebra)?.reduct(&sig)?.to_json()))
        }
        AlgebraCmd::Translate { to, formula } => {
            let f = Formula::parse(&formula, &Signature::full())?;
            let out = match to {
                Target::Is => translate_to_is(&f),
                Target::Pp => translate_to_pp(&f),
            };
            Ok(Report {
                text: format!("{out}\n"),
                doc: json!({"input": f.to_string(), "output": out.to_string()}),
                ok: true,
            })
        }
        AlgebraCmd::Terms { algebra } => {
            let a = load_algebra(&algebra)?;
            let fns = unary_definable_functions(&a)?;
            let mut text = String::new();
            let mut docs = Vec::new();
            let mut complement = None;
            let lattice = a.has_lattice();
            for tf in &fns {
                let table: Vec<&str> = tf.table.iter().map(|&x| a.element(x)).collect();
                text.push_str(&format!("  {}  {}\n", table.join(" "), tf.term));
                docs.push(json!({"term": tf.term.to_string(), "table": table}));
                let is_complement = lattice
                    && (0..a.size()).all(|x| a.join(x, tf.table[x]) == a.top() && a.meet(x, tf.table[x]) == a.bottom());
                if is_complement && complement.is_none() {
                    complement = Some(tf.term.to_string());
                }
            }
            let head = format!("{} unary term functions on {} ({})\n", fns.len(), a.name, a.elements.join(" "));
            let tail = match &complement {
                Some(t) => format!("Boolean complement: {t}\n"),
                None => "Boolean complement: none\n".to_string(),
            };
            Ok(Report {
                text: format!("{head}{text}{tail}"),
                doc: json!({"functions": docs, "complement": complement}),
                ok: true,
            })
        }
    }
}

fn names(a: &FiniteAlgebra, xs: &[usize]) -> Vec<String> {
    xs.iter().map(|&x| a.element(x).to_string()).collect()
}

fn matrix(cmd: MatrixCmd) -> Result<Report> {
    match cmd {
        MatrixCmd::Consequence { matrices, statement } => {
            let ms = matrices.iter().map(|s| load_matrix(s)).collect::<Result<Vec<_>>>()?;
            let (phi, psi) = statement.parse()?;
            let v = sset_consequence(&ms, &phi, &psi)?;
            let (text, doc) = verdict_report(&ms, &v, &phi, &psi)?;
            Ok(Report { text, doc, ok: v.holds() })
        }
        MatrixCmd::Filters { algebra, prime } => {
            let a = load_algebra(&algebra)?;
            let filters = lattice_filters(&a, prime)?;
            let kind = if prime { "prime filters" } else { "filters" };
            let mut text = format!("{} {kind} of {}\n", filters.len(), a.name);
            let mut docs = Vec::new();
            for f in &filters {
                let n = names(&a, f);
                text.push_str(&format!("  {{{}}}\n", n.join(",")));
                docs.push(json!(n));
            }
            Ok(Report { text, doc: json!(docs), ok: true })
        }
        MatrixCmd::Leibniz { matrix } => {
            let m = load_matrix(&matrix)?;
            let p = leibniz_congruence(&m)?;
            let blocks: Vec<Vec<String>> = p.blocks.iter().map(|b| names(&m.algebra, b)).collect();
            let text = format!(
                "Leibniz congruence of {}: {}{}\n",
                m.label(),
                p.render(&m.algebra),
                if p.is_identity() { "  (identity)" } else { "" }
            );
            Ok(Report {
                text,
                doc: json!({"matrix": m.label(), "blocks": blocks, "identity": p.is_identity()}),
                ok: true,
            })
        }
        MatrixCmd::Reduce { matrix } => {
            let r = reduce_matrix(&load_matrix(&matrix)?)?;
            Ok(Report {
                text: format!("{}\n{}", r.label(), r.algebra),
                doc: r.to_json(),
                ok: true,
            })
        }
        MatrixCmd::Expand { matrix } => Ok(document(expand_matrix(&load_matrix(&matrix)?)?.to_json())),
        MatrixCmd::Props { matrix } => {
            let m = load_matrix(&matrix)?;
            let r = check_logic_properties(&m)?;
            let show = |b: Option<bool>| b.map_or("n/a".to_string(), |b| b.to_string());
            let text = format!(
                "{}\n  paraconsistent    {}\n  paracomplete      {}\n  paradefinite      {}\n  gently explosive  {}\n  gently implosive  {}\n  LFI               {}\n  LFU               {}\n",
                m.label(),
                r.paraconsistent,
                r.paracomplete,
                r.paradefinite(),
                show(r.gently_explosive),
                show(r.gently_implosive),
                show(r.lfi()),
                show(r.lfu()),
            );
            let doc = json!({
                "matrix": m.label(),
                "paraconsistent": r.paraconsistent,
                "paracomplete": r.paracomplete,
                "paradefinite": r.paradefinite(),
                "gently_explosive": r.gently_explosive,
                "gently_implosive": r.gently_implosive,
                "lfi": r.lfi(),
                "lfu": r.lfu(),
            });
            Ok(Report { text, doc, ok: true })
        }
        MatrixCmd::Monadic { matrix, sep } => {
            let m = load_matrix(&matrix)?;
            let s = parse_formula_list(&sep, &Signature::full())?;
            let pairs = check_monadicity(&m, &s)?;
            let mut text = if pairs.is_empty() {
                format!("HOLDS  {{{}}} separates every pair of {}\n", ppcalc::syntax::render_set(&s), m.label())
            } else {
                format!("FAILS  {} pairs not separated in {}\n", pairs.len(), m.label())
            };
            let mut docs = Vec::new();
            for &(a, b) in &pairs {
                let (x, y) = (m.algebra.element(a), m.algebra.element(b));
                text.push_str(&format!("  ({x}, {y})\n"));
                docs.push(json!([x, y]));
            }
            Ok(Report {
                text,
                doc: json!({"verdict": if pairs.is_empty() { "holds" } else { "fails" }, "undiscriminated": docs}),
                ok: pairs.is_empty(),
            })
        }
        MatrixCmd::Dat { matrix, statement } => {
            let m = load_matrix(&matrix)?;
            let (phi, psi) = statement.parse()?;
            let r = dat_check(&phi, &psi, &m)?;
            let classical = [ppcalc::matrix::classical_matrix()];
            let (ct, cd) = verdict_report(&classical, &r.classical, &phi, &psi)?;
            let (et, ed) = verdict_report(std::slice::from_ref(&m), &r.enriched, &r.enriched_premises, &psi)?;
            let text = format!(
                "classical {}: {ct}enriched {} with premises {{{}}}: {et}{}\n",
                classical[0].label(),
                m.label(),
                ppcalc::syntax::render_set(&r.enriched_premises),
                if r.agree() { "AGREE" } else { "DISAGREE" }
            );
            Ok(Report {
                text,
                doc: json!({
                    "classical": cd,
                    "enriched": ed,
                    "enriched_premises": strs(&r.enriched_premises),
                    "agree": r.agree(),
                }),
                ok: r.agree(),
            })
        }
    }
}

fn mentions(calc: &Calculus, c: Connective) -> bool {
    calc.rules
        .iter()
        .flat_map(|r| r.antecedent.iter().chain(&r.succedent))
        .any(|f| f.connectives().contains(&c))
}

fn calculus(cmd: CalculusCmd) -> Result<Report> {
    match cmd {
        CalculusCmd::Show { calculus } => {
            let c = load_calculus(&calculus)?;
            Ok(Report { text: c.to_string(), doc: c.to_json(), ok: true })
        }
        CalculusCmd::Prove { calculus, statement, matrix, xi } => {
            let c = load_calculus(&calculus)?;
            let (phi, psi) = statement.parse()?;
            let xi = match xi {
                Some(s) => parse_formula_list(&s, &Signature::full())?,
                None => c.analytic_over.clone().unwrap_or_default(),
            };
            let m = match matrix {
                Some(s) => load_matrix(&s)?,
                None if mentions(&c, Connective::Circ) => Matrix::parse_address("PP6:up_b")?,
                None => Matrix::parse_address("DM4:up_b")?,
            };
            match prove_analytic(&c, &xi, &phi, &psi) {
                ProofResult::Closed(tree) => {
                    validate_tree(&tree, &c, &phi, &psi).map_err(|e| anyhow!("internal: invalid tree: {e}"))?;
                    Ok(Report {
                        text: format!("CLOSED\n{}", tree.render()),
                        doc: json!({"verdict": "closed", "tree": tree.to_json()}),
                        ok: true,
                    })
                }
                ProofResult::Open(branch) => {
                    let mut text = format!("OPEN\n{}", branch.render());
                    let cm = match countermodel_from_open(&branch, &m) {
                        Some(h) => {
                            let (block, doc) = countermodel_block(&m, &h, &phi, &psi)?;
                            text.push_str(&block);
                            doc
                        }
                        None => {
                            text.push_str(&format!("no countermodel found in {}\n", m.label()));
                            Value::Null
                        }
                    };
                    Ok(Report {
                        text,
                        doc: json!({"verdict": "open", "branch": branch.to_json(), "countermodel": cm}),
                        ok: false,
                    })
                }
            }
        }
        CalculusCmd::Soundness { calculus, matrix } => {
            let c = load_calculus(&calculus)?;
            let m = load_matrix(&matrix)?;
            let mut text = String::new();
            let mut docs = Vec::new();
            let mut sound = 0;
            for r in &c.rules {
                let v = soundness(r, &m)?;
                if v.holds() {
                    sound += 1;
                    text.push_str(&format!("  Sound    {r}\n"));
                    docs.push(json!({"rule": r.name, "sound": true}));
                } else {
                    let (block, doc) = verdict_report(std::slice::from_ref(&m), &v, &r.antecedent, &r.succedent)?;
                    text.push_str(&format!("  UNSOUND  {r}\n"));
                    for line in block.lines().skip(1) {
                        text.push_str(&format!("    {line}\n"));
                    }
                    docs.push(json!({"rule": r.name, "sound": false, "countermodel": doc["countermodel"]}));
                }
            }
            let total = c.rules.len();
            Ok(Report {
                text: format!("{sound}/{total} rules sound in {}\n{text}", m.label()),
                doc: json!({"matrix": m.label(), "sound": sound, "total": total, "rules": docs}),
                ok: sound == total,
            })
        }
        CalculusCmd::Lift { calculus, out } => {
            let lifted = lift(&load_calculus(&calculus)?)?;
            let doc = lifted.to_json();
            match out {
                Some(path) => {
                    let body = serde_json::to_string_pretty(&doc)? + "\n";
                    fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
                    Ok(Report {
                        text: format!("{} rules written to {}\n", lifted.rules.len(), path.display()),
                        doc: json!({"rules": lifted.rules.len(), "out": path.display().to_string()}),
                        ok: true,
                    })
                }
                None => Ok(Report { text: lifted.to_string(), doc, ok: true }),
            }
        }
        CalculusCmd::SfmlaProve { calculus, statement, lift: do_lift, depth } => {
            let mut c = load_calculus(&calculus)?;
            if do_lift {
                c = lift(&c)?;
            }
            let (phi, psi) = statement.parse()?;
            let [goal] = psi.as_slice() else {
                bail!("sfmla-prove needs exactly one conclusion, got {}", psi.len());
            };
            let depth = depth.unwrap_or_else(|| {
                let deepest = phi.iter().chain([goal]).map(Formula::depth).max().unwrap_or(0);
                (deepest + 1).max(2)
            });
            match sfmla_prove(&c, &phi, goal, depth)? {
                SfmlaResult::Proof(steps) => {
                    validate_derivation(&c, &phi, &steps).map_err(|e| anyhow!("internal: invalid derivation: {e}"))?;
                    let docs: Vec<Value> = steps
                        .iter()
                        .map(|s| match &s.justification {
                            Justification::Premise => json!({"formula": s.formula.to_string(), "premise": true}),
                            Justification::Rule { name, substitution, from } => json!({
                                "formula": s.formula.to_string(),
                                "rule": name,
                                "substitution": substitution.to_string(),
                                "from": from,
                            }),
                        })
                        .collect();
                    Ok(Report {
                        text: format!("DERIVED\n{}", render_derivation(&steps)),
                        doc: json!({"verdict": "derived", "steps": docs}),
                        ok: true,
                    })
                }
                SfmlaResult::Unknown => Ok(Report {
                    text: format!("UNKNOWN  no derivation within depth {depth}\n"),
                    doc: json!({"verdict": "unknown", "depth": depth}),
                    ok: false,
                }),
            }
        }
    }
}
