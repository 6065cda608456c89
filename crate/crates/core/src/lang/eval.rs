use num_traits::One;

use super::syntax::infer;
use super::{Expr, Program};
use crate::error::{Error, Result};
use crate::interval::pushforward;
use crate::monad::{bind, kleisli_ext, KleisliMap};
use crate::valuation::{dirac_at, SimpleValuation};

/// Variables in scope: name, poset name, element index (innermost last).
type Env = Vec<(String, String, usize)>;

/// The denotation of `main`.
pub fn eval(program: &Program) -> Result<SimpleValuation> {
    eval_expr(program, &program.main)
}

/// Evaluates a closed expression in the program's context.
pub fn eval_expr(program: &Program, expr: &Expr) -> Result<SimpleValuation> {
    Evaluator { program }.eval(expr, &mut Vec::new())
}

struct Evaluator<'a> {
    program: &'a Program,
}

impl Evaluator<'_> {
    fn type_of(&self, expr: &Expr, env: &Env) -> Result<String> {
        let scope: Vec<(String, String)> = env.iter().map(|(x, p, _)| (x.clone(), p.clone())).collect();
        infer(expr, &scope, &self.program.context, &self.program.defs)
    }

    fn eval(&self, expr: &Expr, env: &mut Env) -> Result<SimpleValuation> {
        match expr {
            Expr::Const { poset, elem } => {
                let p = self.program.poset(poset)?;
                Ok(dirac_at(p, p.index_of(elem)?))
            }
            Expr::Var(x) => {
                let (_, p, i) = env
                    .iter()
                    .rev()
                    .find(|(name, _, _)| name == x)
                    .ok_or_else(|| Error::Resolution(format!("unbound variable `{x}`")))?;
                Ok(dirac_at(self.program.poset(p)?, *i))
            }
            Expr::Fail(p) => Ok(SimpleValuation::zero(self.program.poset(p)?)),
            Expr::Choice { p, left, right } => {
                let l = self.eval(left, env)?;
                let r = self.eval(right, env)?;
                let q = crate::rational::Q::one() - p;
                SimpleValuation::mixture(&l.poset().clone(), [(p.clone(), &l), (q, &r)])
            }
            Expr::Sample { cdf, stepmap } => {
                let ctx = &self.program.context;
                let cdf = ctx.cdf(cdf).ok_or_else(|| Error::Resolution(format!("unknown cdf `{cdf}`")))?;
                let map = ctx
                    .stepmaps
                    .get(stepmap)
                    .ok_or_else(|| Error::Resolution(format!("unknown stepmap `{stepmap}`")))?;
                pushforward(&cdf, map)
            }
            Expr::Let { name, bound, body } => {
                let bound_type = self.type_of(bound, env)?;
                let first = self.eval(bound, env)?;
                env.push((name.clone(), bound_type, 0));
                let target = self.type_of(body, env);
                let result = target.and_then(|t| {
                    let target = self.program.poset(&t)?.clone();
                    bind(&first, &target, |i| {
                        env.last_mut().expect("binding pushed above").2 = i;
                        self.eval(body, env)
                    })
                });
                env.pop();
                result
            }
            Expr::Call { func, args } => {
                let def = self
                    .program
                    .defs
                    .get(func)
                    .ok_or_else(|| Error::Resolution(format!("unknown function `{func}`")))?;
                let values = args
                    .iter()
                    .map(|a| self.eval(a, env))
                    .collect::<Result<Vec<_>>>()?;
                let target = self.program.poset(&def.result)?.clone();
                self.call(def, &values, &mut Vec::new(), &target)
            }
            Expr::Case { scrutinee, arms } => {
                let scrutinized = self.eval(scrutinee, env)?;
                let source = scrutinized.poset().clone();
                let target = self.program.poset(&self.type_of(expr, env)?)?.clone();
                let mut table = vec![None; source.len()];
                for (key, arm) in arms {
                    table[source.index_of(key)?] = Some(self.eval(arm, env)?);
                }
                let table = table
                    .into_iter()
                    .map(|t| t.ok_or_else(|| Error::Resolution("case arms are not total".into())))
                    .collect::<Result<Vec<_>>>()?;
                // An antichain has no covers, so any arm table is accepted.
                let f = KleisliMap::new(&source, &target, table).map_err(|e| match e {
                    Error::NotContinuous(lo, hi) => Error::ContinuityViolation(format!(
                        "{lo} <= {hi} in `{}` but the arm for {lo} is not below the arm for {hi}",
                        source.name()
                    )),
                    other => other,
                })?;
                kleisli_ext(&f, &scrutinized)
            }
        }
    }

    /// Binds the evaluated arguments one at a time, then runs the body in a
    /// fresh scope holding only the parameters.
    fn call(
        &self,
        def: &super::FnDef,
        values: &[SimpleValuation],
        scope: &mut Env,
        target: &crate::poset::PosetRef,
    ) -> Result<SimpleValuation> {
        let k = scope.len();
        if k == values.len() {
            return self.eval(&def.body, scope);
        }
        let (x, p) = &def.params[k];
        bind(&values[k], target, |i| {
            scope.push((x.clone(), p.clone(), i));
            let out = self.call(def, values, scope, target);
            scope.pop();
            out
        })
    }
}

/// Exact equality of the two denotations.
pub fn check_equiv(first: &Program, second: &Program) -> Result<bool> {
    let a = eval(first)?;
    let b = eval(second)?;
    a.poset().ensure_same(b.poset())?;
    Ok(a == b)
}
