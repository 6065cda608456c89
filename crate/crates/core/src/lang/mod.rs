//! A first-order probabilistic expression language over finite posets.
//!
//! Every expression denotes a simple valuation on its result poset, built
//! from the monad operations: constants are units, `choice` is a convex
//! mixture, `sample` is a push-forward from `[0,1]`, and `let`, `case` and
//! calls are Kleisli extensions. Because the fragment is commutative, two
//! independent `let`s may be swapped without changing the denotation.

mod eval;
pub mod gen;
mod syntax;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use eval::{check_equiv, eval, eval_expr};
pub use syntax::parse;

use crate::error::{Error, Result};
use crate::interval::{lebesgue, Cdf, StepMap};
use crate::poset::PosetRef;
use crate::rational::{fmt_q, Q};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Const { poset: String, elem: String },
    Var(String),
    Fail(String),
    Choice { p: Q, left: Box<Expr>, right: Box<Expr> },
    Sample { cdf: String, stepmap: String },
    Let { name: String, bound: Box<Expr>, body: Box<Expr> },
    Call { func: String, args: Vec<Expr> },
    Case { scrutinee: Box<Expr>, arms: Vec<(String, Expr)> },
}

impl Expr {
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Expr::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Expr::Const { .. } | Expr::Fail(_) | Expr::Sample { .. } => {}
            Expr::Choice { left, right, .. } => {
                left.collect_free(bound, out);
                right.collect_free(bound, out);
            }
            Expr::Let { name, bound: e1, body } => {
                e1.collect_free(bound, out);
                bound.push(name.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            Expr::Call { args, .. } => args.iter().for_each(|a| a.collect_free(bound, out)),
            Expr::Case { scrutinee, arms } => {
                scrutinee.collect_free(bound, out);
                arms.iter().for_each(|(_, e)| e.collect_free(bound, out));
            }
        }
    }

    /// `self[name := replacement]` for a closed `replacement`; stops under
    /// binders that shadow `name`.
    pub fn substitute(&self, name: &str, replacement: &Expr) -> Expr {
        debug_assert!(replacement.free_vars().is_empty());
        let sub = |e: &Expr| Box::new(e.substitute(name, replacement));
        match self {
            Expr::Var(x) if x == name => replacement.clone(),
            Expr::Var(_) | Expr::Const { .. } | Expr::Fail(_) | Expr::Sample { .. } => self.clone(),
            Expr::Choice { p, left, right } => Expr::Choice { p: p.clone(), left: sub(left), right: sub(right) },
            Expr::Let { name: x, bound, body } => Expr::Let {
                name: x.clone(),
                bound: sub(bound),
                body: if x == name { body.clone() } else { sub(body) },
            },
            Expr::Call { func, args } => Expr::Call {
                func: func.clone(),
                args: args.iter().map(|a| a.substitute(name, replacement)).collect(),
            },
            Expr::Case { scrutinee, arms } => Expr::Case {
                scrutinee: sub(scrutinee),
                arms: arms.iter().map(|(k, e)| (k.clone(), e.substitute(name, replacement))).collect(),
            },
        }
    }
}

/// Prints parseable surface syntax.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const { poset, elem } => write!(f, "const {poset}.{elem}"),
            Expr::Var(x) => write!(f, "var {x}"),
            Expr::Fail(p) => write!(f, "fail {p}"),
            Expr::Choice { p, left, right } => write!(f, "choice {} ({left}) ({right})", fmt_q(p)),
            Expr::Sample { cdf, stepmap } => write!(f, "sample {cdf} {stepmap}"),
            Expr::Let { name, bound, body } => write!(f, "let {name} = {bound} in {body}"),
            Expr::Call { func, args } => {
                let args: Vec<String> = args.iter().map(|a| a.to_string()).collect();
                write!(f, "{func}({})", args.join(", "))
            }
            Expr::Case { scrutinee, arms } => {
                let arms: Vec<String> = arms.iter().map(|(k, e)| format!("{k} -> {e}")).collect();
                write!(f, "case {scrutinee} {{ {} }}", arms.join(" ; "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FnDef {
    pub name: String,
    pub params: Vec<(String, String)>,
    pub body: Expr,
    /// Result poset name, inferred from the body.
    pub result: String,
}

/// Named objects a program may refer to without declaring them.
#[derive(Debug, Clone, Default)]
pub struct Context {
    pub posets: BTreeMap<String, PosetRef>,
    pub cdfs: BTreeMap<String, Cdf>,
    pub stepmaps: BTreeMap<String, StepMap>,
}

impl Context {
    pub fn with_posets(posets: impl IntoIterator<Item = PosetRef>) -> Self {
        Context {
            posets: posets.into_iter().map(|p| (p.name().to_string(), p)).collect(),
            ..Context::default()
        }
    }

    pub fn add_poset(&mut self, poset: PosetRef) {
        self.posets.insert(poset.name().to_string(), poset);
    }

    pub fn add_cdf(&mut self, cdf: Cdf) {
        self.cdfs.insert(cdf.name().to_string(), cdf);
    }

    pub fn add_stepmap(&mut self, map: StepMap) {
        self.stepmaps.insert(map.name().to_string(), map);
    }

    /// `lebesgue` resolves even when not declared.
    pub fn cdf(&self, name: &str) -> Option<Cdf> {
        self.cdfs.get(name).cloned().or_else(|| (name == "lebesgue").then(lebesgue))
    }
}

/// A resolved, well-typed program.
#[derive(Debug, Clone)]
pub struct Program {
    pub context: Context,
    pub defs: BTreeMap<String, FnDef>,
    pub main: Expr,
    pub result: String,
}

impl Program {
    pub fn poset(&self, name: &str) -> Result<&PosetRef> {
        self.context
            .posets
            .get(name)
            .ok_or_else(|| Error::Resolution(format!("unknown poset `{name}`")))
    }

    pub fn result_poset(&self) -> &PosetRef {
        &self.context.posets[&self.result]
    }
}
