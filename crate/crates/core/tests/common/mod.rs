#![allow(dead_code)]

use ppcalc::syntax::{Connective, Formula};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const VARS: [&str; 3] = ["p", "q", "r"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn dm_connectives() -> Vec<Connective> {
    vec![
        Connective::Top,
        Connective::Bot,
        Connective::Neg,
        Connective::And,
        Connective::Or,
    ]
}

pub fn pp_connectives() -> Vec<Connective> {
    let mut c = dm_connectives();
    c.push(Connective::Circ);
    c
}

pub fn is_connectives() -> Vec<Connective> {
    let mut c = dm_connectives();
    c.push(Connective::Nabla);
    c
}

/// A random formula of depth at most `depth` over the first `nvars` variables.
pub fn formula(rng: &mut impl Rng, conns: &[Connective], nvars: usize, depth: usize) -> Formula {
    let leaf = depth == 0 || rng.gen_bool(0.25);
    if leaf {
        let nullary: Vec<&Connective> = conns.iter().filter(|c| c.arity() == 0).collect();
        if !nullary.is_empty() && rng.gen_bool(0.1) {
            return Formula::app(*nullary[rng.gen_range(0..nullary.len())], vec![]);
        }
        return Formula::var(VARS[rng.gen_range(0..nvars)]);
    }
    let ops: Vec<&Connective> = conns.iter().filter(|c| c.arity() > 0).collect();
    let c = *ops[rng.gen_range(0..ops.len())];
    let args = (0..c.arity()).map(|_| formula(rng, conns, nvars, depth - 1)).collect();
    Formula::app(c, args)
}

/// A random statement with 0..=2 premises and 1..=2 conclusions (0..=2 when
/// `allow_empty`), at most `nvars` variables and depth at most `depth`.
pub fn statement(
    rng: &mut impl Rng,
    conns: &[Connective],
    nvars: usize,
    depth: usize,
    allow_empty: bool,
) -> (Vec<Formula>, Vec<Formula>) {
    let np = rng.gen_range(0..=2);
    let nc = rng.gen_range(if allow_empty { 0 } else { 1 }..=2);
    let mut gen = |n: usize| -> Vec<Formula> {
        let mut v: Vec<Formula> = Vec::new();
        for _ in 0..n {
            let d = rng.gen_range(0..=depth);
            let f = formula(rng, conns, nvars, d);
            if !v.contains(&f) {
                v.push(f);
            }
        }
        v
    };
    let phi = gen(np);
    let psi = gen(nc);
    (phi, psi)
}
