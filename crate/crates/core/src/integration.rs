//! Choquet integrals of monotone `[0,1]`-valued maps against simple
//! valuations.
//!
//! The integral is defined as `∫₀¹ ν(h⁻¹(t,1]) dt`. For a simple valuation it
//! collapses to `Σ wᵢ h(xᵢ)`; [`integrate_riemann_oracle`] evaluates the
//! defining integral directly so the two can be compared.

use std::fmt;

use fixedbitset::FixedBitSet;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::poset::{PosetRef, UpperSet};
use crate::rational::{fmt_q, in_unit_interval, MassValue, Q};
use crate::valuation::SimpleValuation;

/// A monotone map `h: D → [0,1] ∩ ℚ`, i.e. a Scott-continuous integrand.
#[derive(Clone, PartialEq, Eq)]
pub struct Integrand {
    poset: PosetRef,
    values: Vec<Q>,
}

impl fmt::Debug for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vals: Vec<String> = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{}={}", self.poset.element(i), fmt_q(v)))
            .collect();
        write!(f, "Integrand[{}]({})", self.poset.name(), vals.join(", "))
    }
}

impl Integrand {
    pub fn new(poset: &PosetRef, values: Vec<Q>) -> Result<Self> {
        if values.len() != poset.len() {
            return Err(Error::NotMonotone(format!(
                "{} values for {} elements",
                values.len(),
                poset.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !in_unit_interval(v)) {
            return Err(Error::OutOfRange(fmt_q(v)));
        }
        if let Some((i, j)) = poset.strict_pairs().find(|&(i, j)| values[i] > values[j]) {
            return Err(Error::NotMonotone(format!(
                "h({}) = {} > h({}) = {}",
                poset.element(i),
                fmt_q(&values[i]),
                poset.element(j),
                fmt_q(&values[j])
            )));
        }
        Ok(Integrand { poset: poset.clone(), values })
    }

    /// From `(identifier, value)` pairs covering every element.
    pub fn from_ids(poset: &PosetRef, values: &[(&str, Q)]) -> Result<Self> {
        let mut table: Vec<Option<Q>> = vec![None; poset.len()];
        for (id, v) in values {
            table[poset.index_of(id)?] = Some(v.clone());
        }
        let table = table
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| Error::NotMonotone(format!("no value for {}", poset.element(i)))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(poset, table)
    }

    pub fn constant(poset: &PosetRef, c: Q) -> Result<Self> {
        Self::new(poset, vec![c; poset.len()])
    }

    pub fn poset(&self) -> &PosetRef {
        &self.poset
    }

    pub fn value(&self, i: usize) -> &Q {
        &self.values[i]
    }

    pub fn values(&self) -> &[Q] {
        &self.values
    }

    /// `{ x : h(x) ≥ t }`, upper because `h` is monotone.
    pub fn threshold_set(&self, t: &Q) -> Result<UpperSet> {
        let mut members = FixedBitSet::with_capacity(self.poset.len());
        members.extend((0..self.poset.len()).filter(|&i| &self.values[i] >= t));
        UpperSet::new(&self.poset, members).map_err(|_| Error::NotMonotone(format!("threshold set at {}", fmt_q(t))))
    }
}

/// `∫ h dν = Σ wᵢ h(xᵢ)`.
pub fn integrate(h: &Integrand, nu: &SimpleValuation) -> Result<MassValue> {
    h.poset.ensure_same(nu.poset())?;
    let sum: Q = nu.atoms().map(|(i, w)| w * &h.values[i]).sum();
    MassValue::new(sum)
}

/// One constant piece of `t ↦ ν(h⁻¹(t,1])`: on `[from, to)` it equals `mass`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdStep {
    pub from: Q,
    pub to: Q,
    pub mass: Q,
}

/// The step function `t ↦ ν(h⁻¹(t,1])` on `[0,1)`, one piece per gap between
/// consecutive distinct values of `h` (with `0` prepended). Beyond the
/// largest value of `h` the function is zero and is not listed.
///
/// Let `0 = t₀ < t₁ < … < t_k` be those values. For `t ∈ [t_{j-1}, t_j)` no
/// value of `h` lies in `(t, t_j)`, so `h(x) > t` exactly when `h(x) ≥ t_j`.
/// The half-open preimage `h⁻¹(t,1]` is therefore the closed threshold set
/// `{h ≥ t_j}` on the whole piece, including its left end `t = t_{j-1}`.
pub fn threshold_profile(h: &Integrand, nu: &SimpleValuation) -> Result<Vec<ThresholdStep>> {
    h.poset.ensure_same(nu.poset())?;
    let mut levels: Vec<Q> = h.values.iter().filter(|v| !v.is_zero()).cloned().collect();
    levels.push(Q::zero());
    levels.sort();
    levels.dedup();
    levels
        .windows(2)
        .map(|pair| {
            let open = h.threshold_set(&pair[1])?;
            Ok(ThresholdStep {
                from: pair[0].clone(),
                to: pair[1].clone(),
                mass: nu.mass(&open)?.into_inner(),
            })
        })
        .collect()
}

/// `∫₀¹ ν(h⁻¹(t,1]) dt` summed exactly over the pieces of
/// [`threshold_profile`].
pub fn integrate_riemann_oracle(h: &Integrand, nu: &SimpleValuation) -> Result<MassValue> {
    let total: Q = threshold_profile(h, nu)?
        .into_iter()
        .map(|step| (step.to - step.from) * step.mass)
        .sum();
    MassValue::new(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::FinitePoset;
    use crate::rational::q;
    use crate::valuation::{dirac, make_simple};

    fn chain2() -> PosetRef {
        FinitePoset::chain("C2", &["a", "b"]).unwrap().into_ref()
    }

    #[test]
    fn worked_chain_instance() {
        let p = chain2();
        let h = Integrand::from_ids(&p, &[("a", q(1, 3)), ("b", q(1, 1))]).unwrap();
        let nu = make_simple(&p, &[("a", q(1, 2)), ("b", q(1, 4))]).unwrap();
        assert_eq!(*integrate(&h, &nu).unwrap().value(), q(5, 12));
        assert_eq!(*integrate_riemann_oracle(&h, &nu).unwrap().value(), q(5, 12));
        let profile = threshold_profile(&h, &nu).unwrap();
        assert_eq!(
            profile,
            vec![
                ThresholdStep { from: q(0, 1), to: q(1, 3), mass: q(3, 4) },
                ThresholdStep { from: q(1, 3), to: q(1, 1), mass: q(1, 4) },
            ]
        );
    }

    #[test]
    fn constant_and_dirac() {
        let p = chain2();
        let nu = make_simple(&p, &[("a", q(1, 3)), ("b", q(1, 3))]).unwrap();
        let c = Integrand::constant(&p, q(3, 5)).unwrap();
        assert_eq!(*integrate(&c, &nu).unwrap().value(), q(2, 5));
        assert_eq!(*integrate_riemann_oracle(&c, &nu).unwrap().value(), q(2, 5));
        let h = Integrand::from_ids(&p, &[("a", q(1, 7)), ("b", q(2, 7))]).unwrap();
        let db = dirac(&p, "b").unwrap();
        assert_eq!(*integrate(&h, &db).unwrap().value(), q(2, 7));
        assert_eq!(*integrate_riemann_oracle(&h, &db).unwrap().value(), q(2, 7));
    }

    #[test]
    fn extreme_integrands() {
        let p = chain2();
        let nu = make_simple(&p, &[("a", q(1, 2)), ("b", q(1, 8))]).unwrap();
        let zero = Integrand::constant(&p, q(0, 1)).unwrap();
        assert!(threshold_profile(&zero, &nu).unwrap().is_empty());
        assert_eq!(*integrate_riemann_oracle(&zero, &nu).unwrap().value(), q(0, 1));
        let one = Integrand::constant(&p, q(1, 1)).unwrap();
        assert_eq!(*integrate_riemann_oracle(&one, &nu).unwrap().value(), q(5, 8));
    }

    #[test]
    fn ingestion_guards() {
        let p = chain2();
        assert!(matches!(
            Integrand::from_ids(&p, &[("a", q(1, 1)), ("b", q(1, 2))]),
            Err(Error::NotMonotone(_))
        ));
        assert!(matches!(
            Integrand::from_ids(&p, &[("a", q(1, 1)), ("b", q(3, 2))]),
            Err(Error::OutOfRange(_))
        ));
        assert!(matches!(Integrand::from_ids(&p, &[("a", q(1, 1))]), Err(Error::NotMonotone(_))));
        let other = FinitePoset::antichain("A2", &["a", "b"]).unwrap().into_ref();
        let h = Integrand::constant(&other, q(1, 2)).unwrap();
        let nu = dirac(&p, "a").unwrap();
        assert!(matches!(integrate(&h, &nu), Err(Error::PosetMismatch(..))));
        assert!(matches!(integrate_riemann_oracle(&h, &nu), Err(Error::PosetMismatch(..))));
    }
}
