//! Random program pairs that differ only in the order of two independent
//! `let`s:
//!
//! ```text
//! let x = e1 in let y = e2 in e     vs     let y = e2 in let x = e1 in e
//! ```
//!
//! with `x ∉ fv(e2)` and `y ∉ fv(e1)`. Both `e1` and `e2` may depend on an
//! outer variable `z`, which ranges over an antichain so that any case
//! analysis on it is Scott-continuous. The body `e` is a nested case on `x`
//! and `y` whose leaves follow a random monotone map `A × B → R`, so it is
//! continuous in both variables whatever the orders on `A`, `B` and `R`.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Context, Expr};
use crate::gen::{random_cdf, random_monotone_map, random_poset, random_step_map};
use crate::poset::{FinitePoset, PosetRef};
use crate::rational::q;

#[derive(Debug, Clone)]
pub struct SwapCase {
    pub context: Context,
    pub original: String,
    pub swapped: String,
}

struct Builder<'a> {
    rng: &'a mut ChaCha8Rng,
    context: &'a Context,
}

impl Builder<'_> {
    fn element(&mut self, poset: &str) -> Expr {
        let p = &self.context.posets[poset];
        let elem = p.elements().choose(self.rng).expect("generated posets are non-empty").clone();
        Expr::Const { poset: poset.to_string(), elem }
    }

    fn probability(&mut self) -> crate::rational::Q {
        q(self.rng.gen_range(0..=12), 12)
    }

    /// A random expression of type `poset` whose only free variable is
    /// (optionally) `z`.
    fn closed(&mut self, poset: &str, z_in_scope: bool, depth: u32) -> Expr {
        let stepmap = format!("S{poset}");
        let can_sample = self.context.stepmaps.contains_key(&stepmap);
        loop {
            match self.rng.gen_range(0..6) {
                0 | 1 => return self.element(poset),
                2 if self.rng.gen_bool(0.4) => return Expr::Fail(poset.to_string()),
                3 if depth > 0 => {
                    let p = self.probability();
                    let left = Box::new(self.closed(poset, z_in_scope, depth - 1));
                    let right = Box::new(self.closed(poset, z_in_scope, depth - 1));
                    return Expr::Choice { p, left, right };
                }
                4 if can_sample => {
                    let cdf = if self.rng.gen_bool(0.5) { "lebesgue" } else { "F" };
                    return Expr::Sample { cdf: cdf.into(), stepmap };
                }
                5 if z_in_scope && depth > 0 => {
                    let keys: Vec<String> = self.context.posets["Z"].elements().to_vec();
                    let arms = keys
                        .into_iter()
                        .map(|k| (k, self.closed(poset, z_in_scope, depth - 1)))
                        .collect();
                    return Expr::Case { scrutinee: Box::new(Expr::Var("z".into())), arms };
                }
                _ => {}
            }
        }
    }

    /// `case var x { aᵢ -> case var y { bⱼ -> const R.m(i,j) } }`.
    fn body(&mut self) -> Expr {
        let (a, b, r) = (&self.context.posets["A"], &self.context.posets["B"], &self.context.posets["R"]);
        let product = crate::poset::product(a, b).into_ref();
        let m = random_monotone_map(self.rng, &product, r);
        let arms = (0..a.len())
            .map(|i| {
                let inner = (0..b.len())
                    .map(|j| {
                        let elem = r.element(m.apply(crate::poset::pair_index(b.len(), i, j))).to_string();
                        (b.element(j).to_string(), Expr::Const { poset: "R".into(), elem })
                    })
                    .collect();
                (a.element(i).to_string(), Expr::Case { scrutinee: Box::new(Expr::Var("y".into())), arms: inner })
            })
            .collect();
        Expr::Case { scrutinee: Box::new(Expr::Var("x".into())), arms }
    }
}

fn let_in(name: &str, bound: Expr, body: Expr) -> Expr {
    Expr::Let { name: name.into(), bound: Box::new(bound), body: Box::new(body) }
}

/// One random swap instance.
pub fn random_let_swap(rng: &mut ChaCha8Rng) -> SwapCase {
    let a = random_poset(rng, "A", 1, 4).into_ref();
    let b = random_poset(rng, "B", 1, 4).into_ref();
    let r = random_poset(rng, "R", 1, 4).into_ref();
    let z_ids: Vec<String> = (0..rng.gen_range(1..=3)).map(|i| format!("z{i}")).collect();
    let z: PosetRef = FinitePoset::build::<String>("Z", &z_ids, &[]).expect("distinct ids").into_ref();
    let mut context = Context::with_posets([a.clone(), b.clone(), r, z]);
    context.add_cdf(random_cdf(rng, "F"));
    let level_a = rng.gen_range(0..=3);
    let level_b = rng.gen_range(0..=3);
    context.add_stepmap(random_step_map(rng, "SA", &a, level_a));
    context.add_stepmap(random_step_map(rng, "SB", &b, level_b));

    let mut builder = Builder { rng, context: &context };
    let use_z = builder.rng.gen_bool(0.5);
    let e1 = builder.closed("A", use_z, 2);
    let e2 = builder.closed("B", use_z, 2);
    let body = builder.body();
    let use_def = builder.rng.gen_bool(0.5);
    let tail = if builder.rng.gen_bool(0.3) {
        let p = builder.probability();
        let leaf = builder.closed("R", use_z, 1);
        let core = if use_def { call_k() } else { body.clone() };
        Expr::Choice { p, left: Box::new(core), right: Box::new(leaf) }
    } else if use_def {
        call_k()
    } else {
        body.clone()
    };
    let z_bound = use_z.then(|| builder.closed("Z", false, 1));

    let original = let_in("x", e1.clone(), let_in("y", e2.clone(), tail.clone()));
    let swapped = let_in("y", e2, let_in("x", e1, tail));
    let wrap = |e: Expr| match &z_bound {
        Some(zb) => let_in("z", zb.clone(), e),
        None => e,
    };
    let prelude = if use_def { format!("def k(x:A, y:B) = {body} ;\n") } else { String::new() };
    SwapCase {
        original: format!("{prelude}main = {}", wrap(original)),
        swapped: format!("{prelude}main = {}", wrap(swapped)),
        context,
    }
}

fn call_k() -> Expr {
    Expr::Call { func: "k".into(), args: vec![Expr::Var("x".into()), Expr::Var("y".into())] }
}
