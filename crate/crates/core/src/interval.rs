//! Valuations on `[0,1]` given by piecewise-linear CDFs, dyadic step maps
//! into finite posets, and their exact push-forwards.
//!
//! A step map at level `m` is constant on the cells `[k/2ᵐ, (k+1)/2ᵐ)`, the
//! last cell closed at `1`. The preimage of any upper set is then a finite
//! union of such cells, which a CDF measures exactly. Lower semi-continuity
//! of a limit of step maps is not representable and is not checked; only the
//! finite approximants and the monotonicity of chains of them are.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::integration::{integrate, Integrand};
use crate::monad::{fubini_check, BiIntegrand};
use crate::poset::{enumerate_upper_sets, PosetRef, UpperSet};
use crate::rational::{fmt_q, in_unit_interval, q, MassValue, Q};
use crate::valuation::{stochastic_leq_flow, SimpleValuation};

/// A subprobability valuation on `[0,1]` through its distribution function
/// `F(x) = ν([0,x])`.
///
/// Each breakpoint stores the left limit `F(x−)` and the value `F(x)`; they
/// differ exactly where `ν` has an atom. Between breakpoints `F` is linear
/// from one breakpoint's value to the next one's left limit. The first
/// breakpoint is `0` with left limit `0`, so `F(0)` is the atom at zero.
#[derive(Clone, PartialEq, Eq)]
pub struct Cdf {
    name: String,
    points: Vec<(Q, Q, Q)>,
}

impl fmt::Debug for Cdf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cdf[{}](", self.name)?;
        for (x, l, r) in &self.points {
            write!(f, " {}:{}|{}", fmt_q(x), fmt_q(l), fmt_q(r))?;
        }
        write!(f, " )")
    }
}

impl Cdf {
    /// `points` are `(x, F(x−), F(x))` in increasing `x`.
    pub fn new(name: &str, points: Vec<(Q, Q, Q)>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidCdf(format!("{name}: {msg}")));
        if points.len() < 2 {
            return bad("needs breakpoints at 0 and 1".into());
        }
        if !points[0].0.is_zero() || !points[points.len() - 1].0.is_one() {
            return bad("breakpoints must start at 0 and end at 1".into());
        }
        if !points[0].1.is_zero() {
            return bad("left limit at 0 must be 0".into());
        }
        for (x, l, r) in &points {
            if !in_unit_interval(l) || !in_unit_interval(r) {
                return bad(format!("values at {} leave [0,1]", fmt_q(x)));
            }
            if l > r {
                return bad(format!("decreasing jump at {}", fmt_q(x)));
            }
        }
        for pair in points.windows(2) {
            if pair[0].0 >= pair[1].0 {
                return bad("breakpoints must be strictly increasing".into());
            }
            if pair[0].2 > pair[1].1 {
                return bad(format!("F decreases between {} and {}", fmt_q(&pair[0].0), fmt_q(&pair[1].0)));
            }
        }
        Ok(Cdf { name: name.to_string(), points })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn points(&self) -> &[(Q, Q, Q)] {
        &self.points
    }

    pub fn total_mass(&self) -> Q {
        self.points[self.points.len() - 1].2.clone()
    }

    pub fn atom_at_zero(&self) -> Q {
        self.points[0].2.clone()
    }

    /// `(F(x−), F(x))`.
    fn limits_at(&self, x: &Q) -> (Q, Q) {
        assert!(in_unit_interval(x), "CDF queried outside [0,1]");
        match self.points.binary_search_by(|(p, _, _)| p.cmp(x)) {
            Ok(k) => (self.points[k].1.clone(), self.points[k].2.clone()),
            Err(k) => {
                let (x0, _, f0) = &self.points[k - 1];
                let (x1, f1, _) = &self.points[k];
                let v = f0 + (f1 - f0) * (x - x0) / (x1 - x0);
                (v.clone(), v)
            }
        }
    }

    /// `F(x) = ν([0,x])`.
    pub fn value(&self, x: &Q) -> Q {
        self.limits_at(x).1
    }

    /// `F(x−) = ν([0,x))`.
    pub fn left_limit(&self, x: &Q) -> Q {
        self.limits_at(x).0
    }

    /// `ν((a,b]) = F(b) − F(a)`.
    pub fn mass_open_closed(&self, a: &Q, b: &Q) -> Q {
        if a >= b {
            return Q::zero();
        }
        self.value(b) - self.value(a)
    }

    /// `ν([a,b))`, or `ν([a,1])` when `b = 1` and `closed_at_one` holds.
    pub fn mass_half_open(&self, a: &Q, b: &Q, closed_at_one: bool) -> Q {
        let top = if closed_at_one && b.is_one() { self.value(b) } else { self.left_limit(b) };
        let mass = top - self.left_limit(a);
        if mass.is_negative() {
            Q::zero()
        } else {
            mass
        }
    }
}

/// The uniform valuation on `[0,1]`: `F(x) = x`.
pub fn lebesgue() -> Cdf {
    Cdf::new("lebesgue", vec![(q(0, 1), q(0, 1), q(0, 1)), (q(1, 1), q(1, 1), q(1, 1))])
        .expect("identity CDF is valid")
}

/// A dyadic step function `[0,1] → D`.
#[derive(Clone, PartialEq, Eq)]
pub struct StepMap {
    name: String,
    target: PosetRef,
    level: u32,
    cells: Vec<usize>,
}

impl fmt::Debug for StepMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<&str> = self.cells.iter().map(|&c| self.target.element(c)).collect();
        write!(f, "StepMap[{} level {}]{ids:?}", self.name, self.level)
    }
}

/// Levels above this would need more than a million cells.
pub const MAX_LEVEL: u32 = 20;

impl StepMap {
    pub fn new(name: &str, target: &PosetRef, level: u32, cells: Vec<usize>) -> Result<Self> {
        if level > MAX_LEVEL {
            return Err(Error::InvalidStepMap(format!("level {level} exceeds {MAX_LEVEL}")));
        }
        if cells.len() != 1 << level {
            return Err(Error::InvalidStepMap(format!(
                "level {level} needs {} cells, got {}",
                1u64 << level,
                cells.len()
            )));
        }
        if let Some(&c) = cells.iter().find(|&&c| c >= target.len()) {
            return Err(Error::UnknownElement(format!("#{c}")));
        }
        Ok(StepMap { name: name.to_string(), target: target.clone(), level, cells })
    }

    pub fn from_ids(name: &str, target: &PosetRef, level: u32, ids: &[&str]) -> Result<Self> {
        let cells = ids.iter().map(|id| target.index_of(id)).collect::<Result<Vec<_>>>()?;
        Self::new(name, target, level, cells)
    }

    pub fn constant(target: &PosetRef, value: usize) -> Self {
        StepMap { name: "const".into(), target: target.clone(), level: 0, cells: vec![value] }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn target(&self) -> &PosetRef {
        &self.target
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    /// The same function at a finer level.
    pub fn refine(&self, level: u32) -> StepMap {
        assert!(level >= self.level, "refinement cannot coarsen");
        let repeat = 1usize << (level - self.level);
        let cells = self
            .cells
            .iter()
            .flat_map(|&c| std::iter::repeat_n(c, repeat))
            .collect();
        StepMap { name: self.name.clone(), target: self.target.clone(), level, cells }
    }

    /// `[start, end)` in cell coordinates, closed at `1` for the last cell.
    fn interval(&self, start: usize, end: usize) -> DyadicInterval {
        let denom = 1i64 << self.level;
        DyadicInterval { from: q(start as i64, denom), to: q(end as i64, denom), closed: end == self.cells.len() }
    }

    /// `f⁻¹(O)` as maximal runs of adjacent cells.
    pub fn preimage_intervals(&self, open: &UpperSet) -> Result<Vec<DyadicInterval>> {
        self.target.ensure_same(open.poset())?;
        let mut runs = Vec::new();
        let mut start = None;
        for (k, &c) in self.cells.iter().enumerate() {
            match (open.contains(c), start) {
                (true, None) => start = Some(k),
                (false, Some(s)) => {
                    runs.push(self.interval(s, k));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            runs.push(self.interval(s, self.cells.len()));
        }
        Ok(runs)
    }
}

/// `[from, to)`, or `[from, to]` when `closed`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DyadicInterval {
    pub from: Q,
    pub to: Q,
    pub closed: bool,
}

impl DyadicInterval {
    pub fn measure(&self, cdf: &Cdf) -> Q {
        cdf.mass_half_open(&self.from, &self.to, self.closed)
    }
}

impl fmt::Display for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let close = if self.closed { ']' } else { ')' };
        write!(f, "[{}, {}{close}", fmt_q(&self.from), fmt_q(&self.to))
    }
}

fn cell_masses(cdf: &Cdf, level: u32) -> Vec<Q> {
    let n = 1usize << level;
    let denom = 1i64 << level;
    let cuts: Vec<Q> = (0..=n).map(|k| cdf.left_limit(&q(k as i64, denom))).collect();
    let mut masses: Vec<Q> = cuts.windows(2).map(|w| &w[1] - &w[0]).collect();
    // the last cell also contains 1
    masses[n - 1] += cdf.total_mass() - &cuts[n];
    masses
}

/// `f_*(ν)`: each element receives the mass of the cells mapped onto it.
/// Cell 0 contains `0`, so an atom at zero lands on `f(0)`.
pub fn pushforward(cdf: &Cdf, f: &StepMap) -> Result<SimpleValuation> {
    let masses = cell_masses(cdf, f.level);
    SimpleValuation::from_indexed(&f.target, f.cells.iter().copied().zip(masses))
}

/// Compares `f_*(ν)(O)` with the CDF measure of the explicit interval union
/// `f⁻¹(O)` on every upper set `O` of the target.
pub fn pushforward_mass_identity(cdf: &Cdf, f: &StepMap, bound: usize) -> Result<bool> {
    let pushed = pushforward(cdf, f)?;
    for open in enumerate_upper_sets(&f.target, bound)? {
        let direct: Q = f.preimage_intervals(&open)?.iter().map(|iv| iv.measure(cdf)).sum();
        if *pushed.mass(&open)?.value() != direct {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `f(x) ≤ g(x)` on every cell of the common refinement.
pub fn check_pointwise_leq(f: &StepMap, g: &StepMap) -> Result<bool> {
    f.target.ensure_same(&g.target)?;
    let level = f.level.max(g.level);
    let (f, g) = (f.refine(level), g.refine(level));
    Ok(f.cells.iter().zip(&g.cells).all(|(&a, &b)| f.target.leq(a, b)))
}

/// `∫ g d(f_*ν)` and `∫ (g ∘ f) dν`, the latter summed cell by cell.
pub fn change_of_variable_sides(g: &Integrand, f: &StepMap, cdf: &Cdf) -> Result<(MassValue, MassValue)> {
    g.poset().ensure_same(&f.target)?;
    let lhs = integrate(g, &pushforward(cdf, f)?)?;
    let denom = 1i64 << f.level;
    let n = f.cells.len();
    let rhs: Q = f
        .cells
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let cell = DyadicInterval { from: q(k as i64, denom), to: q(k as i64 + 1, denom), closed: k + 1 == n };
            g.value(c) * cell.measure(cdf)
        })
        .sum();
    Ok((lhs, MassValue::new(rhs)?))
}

pub fn change_of_variable_check(g: &Integrand, f: &StepMap, cdf: &Cdf) -> Result<bool> {
    let (lhs, rhs) = change_of_variable_sides(g, f, cdf)?;
    Ok(lhs == rhs)
}

/// For a pointwise-increasing chain of step maps, checks that the
/// push-forwards increase in the stochastic order.
pub fn refinement_chain_check(chain: &[StepMap], cdf: &Cdf) -> Result<bool> {
    for (k, pair) in chain.windows(2).enumerate() {
        if !check_pointwise_leq(&pair[0], &pair[1])? {
            return Err(Error::ChainNotMonotone(k));
        }
    }
    let pushed = chain.iter().map(|f| pushforward(cdf, f)).collect::<Result<Vec<_>>>()?;
    for pair in pushed.windows(2) {
        if !stochastic_leq_flow(&pair[0], &pair[1])? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Fubini for the push-forward `f_*(ν)` against `μ` and `h`.
pub fn interval_fubini_check(cdf: &Cdf, f: &StepMap, mu: &SimpleValuation, h: &BiIntegrand) -> Result<bool> {
    let pushed = pushforward(cdf, f)?;
    Ok(fubini_check(&pushed, mu, h)?.equal)
}
