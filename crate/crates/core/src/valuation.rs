//! Simple subprobability valuations `Σ wᵢ δ_{xᵢ}` with `Σ wᵢ ≤ 1`.
//!
//! On a finite poset every valuation is simple, so valuations are stored as
//! atoms and never as tables over open sets. Missing mass is kept as is;
//! nothing is ever renormalized.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::flow::FlowNetwork;
use crate::poset::{enumerate_upper_sets, PosetRef, UpperSet};
use crate::rational::{fmt_q, MassValue, Q};

#[derive(Clone, PartialEq, Eq)]
pub struct SimpleValuation {
    poset: PosetRef,
    /// Element index to strictly positive weight.
    atoms: BTreeMap<usize, Q>,
}

impl fmt::Debug for SimpleValuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SimpleValuation[{}]({self})", self.poset.name())
    }
}

/// `1/2 a, 1/4 b`; the zero valuation renders as `0`.
impl fmt::Display for SimpleValuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.atoms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .atoms
            .iter()
            .map(|(&i, w)| format!("{} {}", fmt_q(w), self.poset.element(i)))
            .collect();
        write!(f, "{}", parts.join(", "))
    }
}

impl SimpleValuation {
    /// Merges duplicate atoms, drops zero weights and checks the mass bound.
    pub fn from_indexed(poset: &PosetRef, atoms: impl IntoIterator<Item = (usize, Q)>) -> Result<Self> {
        let mut merged: BTreeMap<usize, Q> = BTreeMap::new();
        for (i, w) in atoms {
            if i >= poset.len() {
                return Err(Error::UnknownElement(format!("#{i}")));
            }
            if w.is_negative() {
                return Err(Error::NegativeWeight(fmt_q(&w)));
            }
            *merged.entry(i).or_insert_with(Q::zero) += w;
        }
        merged.retain(|_, w| !w.is_zero());
        let total: Q = merged.values().sum();
        if total > Q::one() {
            return Err(Error::MassExceedsOne(fmt_q(&total)));
        }
        Ok(SimpleValuation { poset: poset.clone(), atoms: merged })
    }

    pub fn zero(poset: &PosetRef) -> Self {
        SimpleValuation { poset: poset.clone(), atoms: BTreeMap::new() }
    }

    pub fn poset(&self) -> &PosetRef {
        &self.poset
    }

    /// Atoms in element order.
    pub fn atoms(&self) -> impl Iterator<Item = (usize, &Q)> + '_ {
        self.atoms.iter().map(|(&i, w)| (i, w))
    }

    pub fn weight(&self, i: usize) -> Q {
        self.atoms.get(&i).cloned().unwrap_or_else(Q::zero)
    }

    pub fn support_len(&self) -> usize {
        self.atoms.len()
    }

    pub fn total_mass(&self) -> Q {
        self.atoms.values().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `Σ_k c_k · ν_k`, every `ν_k` on the same poset.
    pub fn mixture<'a>(poset: &PosetRef, parts: impl IntoIterator<Item = (Q, &'a SimpleValuation)>) -> Result<Self> {
        let mut atoms = Vec::new();
        for (c, nu) in parts {
            nu.poset.ensure_same(poset)?;
            if c.is_negative() {
                return Err(Error::NegativeWeight(fmt_q(&c)));
            }
            atoms.extend(nu.atoms().map(|(i, w)| (i, &c * w)));
        }
        Self::from_indexed(poset, atoms)
    }

    pub fn scale(&self, c: &Q) -> Result<Self> {
        Self::mixture(&self.poset, [(c.clone(), self)])
    }

    /// `ν(U)`: total weight of atoms inside `U`.
    pub fn mass(&self, u: &UpperSet) -> Result<MassValue> {
        self.poset.ensure_same(u.poset())?;
        Ok(MassValue::new(self.mass_unchecked(u)).expect("subprobability masses stay in [0,1]"))
    }

    pub(crate) fn mass_unchecked(&self, u: &UpperSet) -> Q {
        self.atoms().filter(|(i, _)| u.contains(*i)).map(|(_, w)| w).sum()
    }

    /// `ν(S)` for a set of identifiers; rejects sets that are not open.
    pub fn mass_of_ids(&self, ids: &[&str]) -> Result<MassValue> {
        let u = UpperSet::from_ids(&self.poset, ids)?;
        self.mass(&u)
    }
}

/// `Σ w δ_x` from `(identifier, weight)` pairs; duplicates add up.
pub fn make_simple(poset: &PosetRef, atoms: &[(&str, Q)]) -> Result<SimpleValuation> {
    let indexed = atoms
        .iter()
        .map(|(id, w)| Ok((poset.index_of(id)?, w.clone())))
        .collect::<Result<Vec<_>>>()?;
    SimpleValuation::from_indexed(poset, indexed)
}

pub fn dirac(poset: &PosetRef, id: &str) -> Result<SimpleValuation> {
    let i = poset.index_of(id)?;
    Ok(dirac_at(poset, i))
}

pub fn dirac_at(poset: &PosetRef, i: usize) -> SimpleValuation {
    assert!(i < poset.len(), "element index out of range");
    SimpleValuation { poset: poset.clone(), atoms: BTreeMap::from([(i, Q::one())]) }
}

/// Exhaustively checks `ν(U) + ν(V) = ν(U ∪ V) + ν(U ∩ V)` over all pairs of
/// upper sets.
pub fn check_modularity(nu: &SimpleValuation, bound: usize) -> Result<bool> {
    let opens = enumerate_upper_sets(nu.poset(), bound)?;
    let masses: Vec<Q> = opens.iter().map(|u| nu.mass_unchecked(u)).collect();
    for (a, u) in opens.iter().enumerate() {
        for v in &opens[a..] {
            let lhs = &masses[a] + nu.mass_unchecked(v);
            let rhs = nu.mass_unchecked(&u.union(v)) + nu.mass_unchecked(&u.intersection(v));
            if lhs != rhs {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `ν₁ ≤ ν₂` by comparing masses on every upper set.
pub fn stochastic_leq_exhaustive(lower: &SimpleValuation, upper: &SimpleValuation, bound: usize) -> Result<bool> {
    lower.poset.ensure_same(&upper.poset)?;
    let opens = enumerate_upper_sets(lower.poset(), bound)?;
    Ok(opens
        .iter()
        .all(|u| lower.mass_unchecked(u) <= upper.mass_unchecked(u)))
}

/// `ν₁ ≤ ν₂` as transport feasibility: the stochastic order holds iff all of
/// `ν₁`'s mass can be moved upward into `ν₂`'s atoms without exceeding their
/// weights. Unused `ν₂` mass is allowed, which covers the subprobability case.
pub fn stochastic_leq_flow(lower: &SimpleValuation, upper: &SimpleValuation) -> Result<bool> {
    Ok(transport_plan(lower, upper)?.is_some())
}

/// One transport `(from, to, amount)` witnessing `lower ≤ upper`, or `None`.
pub fn transport_plan(lower: &SimpleValuation, upper: &SimpleValuation) -> Result<Option<Vec<(usize, usize, Q)>>> {
    lower.poset.ensure_same(&upper.poset)?;
    let poset = lower.poset();
    let left: Vec<(usize, &Q)> = lower.atoms().collect();
    let right: Vec<(usize, &Q)> = upper.atoms().collect();
    // source, left atoms, right atoms, sink
    let source = 0;
    let sink = 1 + left.len() + right.len();
    let mut net = FlowNetwork::new(sink + 1);
    let mut middle = Vec::new();
    for (a, &(x, w)) in left.iter().enumerate() {
        net.add_arc(source, 1 + a, w.clone());
        for (b, &(y, _)) in right.iter().enumerate() {
            if poset.leq(x, y) {
                let id = net.add_arc(1 + a, 1 + left.len() + b, w.clone());
                middle.push((id, x, y));
            }
        }
    }
    for (b, &(_, v)) in right.iter().enumerate() {
        net.add_arc(1 + left.len() + b, sink, v.clone());
    }
    if net.max_flow(source, sink) != lower.total_mass() {
        return Ok(None);
    }
    let plan = middle
        .into_iter()
        .map(|(id, x, y)| (x, y, net.flow(id)))
        .filter(|(_, _, f)| !f.is_zero())
        .collect();
    Ok(Some(plan))
}
