//! Finite posets, their upper sets and monotone maps.
//!
//! A finite poset is a dcpo: every directed subset contains its own top. On
//! such a poset the Scott-open sets are exactly the upper sets, and the
//! Scott-continuous maps are exactly the monotone ones. The whole crate works
//! with those two finite characterizations.
//!
//! For finite posets the Scott topology of `P × Q` also coincides with the
//! product of the two Scott topologies, so iterated integrals over a product
//! must commute at this scale.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};

/// Default ceiling on the carrier size for exhaustive upper-set enumeration.
pub const DEFAULT_MAX_ELEMS: usize = 16;

pub type PosetRef = Arc<FinitePoset>;

#[derive(Clone)]
pub struct FinitePoset {
    name: String,
    elements: Vec<String>,
    index: HashMap<String, usize>,
    /// `up[i]` holds every `j` with `i <= j`.
    up: Vec<FixedBitSet>,
    /// `down[j]` holds every `i` with `i <= j`.
    down: Vec<FixedBitSet>,
}

impl PartialEq for FinitePoset {
    fn eq(&self, other: &Self) -> bool {
        self.elements == other.elements && self.up == other.up
    }
}

impl Eq for FinitePoset {}

impl fmt::Debug for FinitePoset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FinitePoset")
            .field("name", &self.name)
            .field("elements", &self.elements)
            .finish()
    }
}

impl FinitePoset {
    /// Builds a poset from its elements and a cover relation `(lower, upper)`.
    /// The order is the reflexive-transitive closure of the covers.
    pub fn build<S: AsRef<str>>(name: &str, elements: &[S], covers: &[(S, S)]) -> Result<Self> {
        let elements: Vec<String> = elements.iter().map(|e| e.as_ref().to_string()).collect();
        let index = index_elements(&elements)?;
        let n = elements.len();
        let mut rel: Vec<FixedBitSet> = (0..n)
            .map(|i| {
                let mut row = FixedBitSet::with_capacity(n);
                row.insert(i);
                row
            })
            .collect();
        for (lo, hi) in covers {
            let lo = lookup(&index, lo.as_ref())?;
            let hi = lookup(&index, hi.as_ref())?;
            rel[lo].insert(hi);
        }
        let up = transitive_closure(rel);
        for i in 0..n {
            for j in up[i].ones() {
                if j != i && up[j].contains(i) {
                    return Err(Error::CycleDetected(elements[i].clone()));
                }
            }
        }
        Ok(Self::from_parts(name.to_string(), elements, index, up))
    }

    /// Builds a poset from an order predicate already known to be a partial
    /// order (used for products and generated instances).
    fn from_order(name: String, elements: Vec<String>, leq: impl Fn(usize, usize) -> bool) -> Result<Self> {
        let index = index_elements(&elements)?;
        let n = elements.len();
        let up = (0..n)
            .map(|i| {
                let mut row = FixedBitSet::with_capacity(n);
                row.extend((0..n).filter(|&j| leq(i, j)));
                row
            })
            .collect();
        Ok(Self::from_parts(name, elements, index, up))
    }

    fn from_parts(name: String, elements: Vec<String>, index: HashMap<String, usize>, up: Vec<FixedBitSet>) -> Self {
        let n = elements.len();
        let mut down: Vec<FixedBitSet> = (0..n).map(|_| FixedBitSet::with_capacity(n)).collect();
        for (i, row) in up.iter().enumerate() {
            for j in row.ones() {
                down[j].insert(i);
            }
        }
        FinitePoset { name, elements, index, up, down }
    }

    pub fn chain(name: &str, ids: &[&str]) -> Result<Self> {
        let covers: Vec<(&str, &str)> = ids.windows(2).map(|w| (w[0], w[1])).collect();
        Self::build(name, ids, &covers)
    }

    pub fn antichain(name: &str, ids: &[&str]) -> Result<Self> {
        Self::build::<&str>(name, ids, &[])
    }

    pub fn into_ref(self) -> PosetRef {
        Arc::new(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &str {
        &self.elements[i]
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        lookup(&self.index, id)
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.up[i].contains(j)
    }

    /// `{ j : i <= j }`
    pub fn up_set(&self, i: usize) -> &FixedBitSet {
        &self.up[i]
    }

    /// `{ j : j <= i }`
    pub fn down_set(&self, i: usize) -> &FixedBitSet {
        &self.down[i]
    }

    pub fn is_antichain(&self) -> bool {
        self.up.iter().all(|row| row.count_ones(..) == 1)
    }

    /// Every strict pair `i < j`, in index order.
    pub fn strict_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.up
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.ones().filter(move |&j| j != i).map(move |j| (i, j)))
    }

    /// Immediate covers `i ⋖ j`, the minimal input describing this order.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        self.strict_pairs()
            .filter(|&(i, j)| {
                !self.up[i]
                    .ones()
                    .any(|k| k != i && k != j && self.up[k].contains(j))
            })
            .collect()
    }

    /// Indices sorted so that every element comes after everything below it.
    pub fn linear_extension(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&i| (self.down[i].count_ones(..), i));
        order
    }

    /// Structural equality check that reports names on failure.
    pub fn ensure_same(&self, other: &FinitePoset) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::PosetMismatch(self.name.clone(), other.name.clone()))
        }
    }
}

fn index_elements(elements: &[String]) -> Result<HashMap<String, usize>> {
    let mut index = HashMap::with_capacity(elements.len());
    for (i, e) in elements.iter().enumerate() {
        if index.insert(e.clone(), i).is_some() {
            return Err(Error::DuplicateElement(e.clone()));
        }
    }
    Ok(index)
}

fn lookup(index: &HashMap<String, usize>, id: &str) -> Result<usize> {
    index
        .get(id)
        .copied()
        .ok_or_else(|| Error::UnknownElement(id.to_string()))
}

/// Squares the relation `R := R ∘ R` until it stops growing. `rel` must be
/// reflexive, so each squaring at least doubles the path length covered.
fn transitive_closure(mut rel: Vec<FixedBitSet>) -> Vec<FixedBitSet> {
    loop {
        let squared: Vec<FixedBitSet> = rel
            .iter()
            .map(|row| {
                let mut next = row.clone();
                for k in row.ones() {
                    next.union_with(&rel[k]);
                }
                next
            })
            .collect();
        if squared == rel {
            return rel;
        }
        rel = squared;
    }
}

/// Componentwise product. Element `(i, j)` sits at index `i * q.len() + j`
/// and is named `(x,y)`.
pub fn product(p: &FinitePoset, q: &FinitePoset) -> FinitePoset {
    let m = q.len();
    let elements = p
        .elements
        .iter()
        .flat_map(|x| q.elements.iter().map(move |y| format!("({x},{y})")))
        .collect();
    let name = format!("{}*{}", p.name, q.name);
    FinitePoset::from_order(name, elements, |a, b| {
        p.leq(a / m, b / m) && q.leq(a % m, b % m)
    })
    .expect("pair names of distinct components are distinct")
}

pub fn pair_index(q_len: usize, i: usize, j: usize) -> usize {
    i * q_len + j
}

/// An upper set, i.e. a Scott-open subset of a finite poset.
#[derive(Clone, PartialEq, Eq)]
pub struct UpperSet {
    poset: PosetRef,
    members: FixedBitSet,
}

impl fmt::Debug for UpperSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<&str> = self.members.ones().map(|i| self.poset.element(i)).collect();
        write!(f, "UpperSet{ids:?}")
    }
}

impl UpperSet {
    pub fn new(poset: &PosetRef, members: FixedBitSet) -> Result<Self> {
        if members.len() != poset.len() || !is_upper_set(poset, &members) {
            return Err(Error::NotUpperSet);
        }
        Ok(UpperSet { poset: poset.clone(), members })
    }

    pub fn from_ids(poset: &PosetRef, ids: &[&str]) -> Result<Self> {
        let members = id_subset(poset, ids)?;
        Self::new(poset, members)
    }

    pub fn empty(poset: &PosetRef) -> Self {
        UpperSet { poset: poset.clone(), members: FixedBitSet::with_capacity(poset.len()) }
    }

    pub fn full(poset: &PosetRef) -> Self {
        let mut members = FixedBitSet::with_capacity(poset.len());
        members.insert_range(..);
        UpperSet { poset: poset.clone(), members }
    }

    /// `{ x : x_i <= x }`
    pub fn principal(poset: &PosetRef, i: usize) -> Self {
        UpperSet { poset: poset.clone(), members: poset.up_set(i).clone() }
    }

    pub fn poset(&self) -> &PosetRef {
        &self.poset
    }

    pub fn members(&self) -> &FixedBitSet {
        &self.members
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.contains(i)
    }

    pub fn len(&self) -> usize {
        self.members.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_clear()
    }

    pub fn ids(&self) -> Vec<&str> {
        self.members.ones().map(|i| self.poset.element(i)).collect()
    }

    pub fn is_subset(&self, other: &UpperSet) -> bool {
        self.members.is_subset(&other.members)
    }

    pub fn union(&self, other: &UpperSet) -> UpperSet {
        let mut members = self.members.clone();
        members.union_with(&other.members);
        UpperSet { poset: self.poset.clone(), members }
    }

    pub fn intersection(&self, other: &UpperSet) -> UpperSet {
        let mut members = self.members.clone();
        members.intersect_with(&other.members);
        UpperSet { poset: self.poset.clone(), members }
    }
}

fn id_subset(poset: &FinitePoset, ids: &[&str]) -> Result<FixedBitSet> {
    let mut members = FixedBitSet::with_capacity(poset.len());
    for id in ids {
        members.insert(poset.index_of(id)?);
    }
    Ok(members)
}

/// True iff `subset` is upward closed in `poset`.
pub fn is_upper_set(poset: &FinitePoset, subset: &FixedBitSet) -> bool {
    subset.ones().all(|i| poset.up_set(i).is_subset(subset))
}

/// [`is_upper_set`] on element identifiers.
pub fn is_upper_set_ids(poset: &FinitePoset, ids: &[&str]) -> Result<bool> {
    Ok(is_upper_set(poset, &id_subset(poset, ids)?))
}

/// Every upper set exactly once, including `∅` and the carrier.
///
/// Elements are decided along a linear extension. An element with an
/// included predecessor is forced in; otherwise both branches are taken.
/// Distinct decision paths therefore give distinct sets, and every path
/// gives an upper set.
pub fn enumerate_upper_sets(poset: &PosetRef, bound: usize) -> Result<Vec<UpperSet>> {
    if poset.len() > bound {
        return Err(Error::TooLarge { size: poset.len(), bound });
    }
    let order = poset.linear_extension();
    let mut out = Vec::new();
    let mut current = FixedBitSet::with_capacity(poset.len());
    extend_upper(poset, &order, 0, &mut current, &mut out);
    Ok(out)
}

fn extend_upper(
    poset: &PosetRef,
    order: &[usize],
    depth: usize,
    current: &mut FixedBitSet,
    out: &mut Vec<UpperSet>,
) {
    let Some(&x) = order.get(depth) else {
        out.push(UpperSet { poset: poset.clone(), members: current.clone() });
        return;
    };
    let forced = poset.down_set(x).ones().any(|y| y != x && current.contains(y));
    if !forced {
        extend_upper(poset, order, depth + 1, current, out);
    }
    current.insert(x);
    extend_upper(poset, order, depth + 1, current, out);
    current.set(x, false);
}

/// A monotone, hence Scott-continuous, map between finite posets.
#[derive(Clone, PartialEq, Eq)]
pub struct MonotoneMap {
    source: PosetRef,
    target: PosetRef,
    table: Vec<usize>,
}

impl fmt::Debug for MonotoneMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pairs: Vec<(&str, &str)> = self
            .table
            .iter()
            .enumerate()
            .map(|(i, &j)| (self.source.element(i), self.target.element(j)))
            .collect();
        write!(f, "MonotoneMap{pairs:?}")
    }
}

impl MonotoneMap {
    /// Validates totality and monotonicity of an index table.
    pub fn new(source: &PosetRef, target: &PosetRef, table: Vec<usize>) -> Result<Self> {
        if table.len() != source.len() {
            return Err(Error::NotMonotone(format!(
                "table has {} entries for {} source elements",
                table.len(),
                source.len()
            )));
        }
        if let Some(&bad) = table.iter().find(|&&j| j >= target.len()) {
            return Err(Error::UnknownElement(format!("#{bad}")));
        }
        if let Some((i, j)) = first_monotonicity_violation(source, target, &table) {
            return Err(Error::NotMonotone(format!(
                "{} <= {} but {} is not below {}",
                source.element(i),
                source.element(j),
                target.element(table[i]),
                target.element(table[j])
            )));
        }
        Ok(MonotoneMap { source: source.clone(), target: target.clone(), table })
    }

    /// From `(source id, target id)` pairs covering the whole source.
    pub fn from_ids(source: &PosetRef, target: &PosetRef, pairs: &[(&str, &str)]) -> Result<Self> {
        let mut table = vec![None; source.len()];
        for (x, y) in pairs {
            table[source.index_of(x)?] = Some(target.index_of(y)?);
        }
        let table = table
            .into_iter()
            .enumerate()
            .map(|(i, t)| t.ok_or_else(|| Error::NotMonotone(format!("no image for {}", source.element(i)))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(source, target, table)
    }

    pub fn identity(poset: &PosetRef) -> Self {
        MonotoneMap { source: poset.clone(), target: poset.clone(), table: (0..poset.len()).collect() }
    }

    pub fn constant(source: &PosetRef, target: &PosetRef, value: usize) -> Self {
        assert!(value < target.len());
        MonotoneMap { source: source.clone(), target: target.clone(), table: vec![value; source.len()] }
    }

    /// `self` after `first`.
    pub fn compose(&self, first: &MonotoneMap) -> Result<MonotoneMap> {
        first.target.ensure_same(&self.source)?;
        let table = first.table.iter().map(|&j| self.table[j]).collect();
        Ok(MonotoneMap { source: first.source.clone(), target: self.target.clone(), table })
    }

    pub fn source(&self) -> &PosetRef {
        &self.source
    }

    pub fn target(&self) -> &PosetRef {
        &self.target
    }

    pub fn apply(&self, i: usize) -> usize {
        self.table[i]
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }
}

fn first_monotonicity_violation(source: &FinitePoset, target: &FinitePoset, table: &[usize]) -> Option<(usize, usize)> {
    source.strict_pairs().find(|&(i, j)| !target.leq(table[i], table[j]))
}

/// True iff the table preserves order. Entries must index into `target`.
pub fn check_monotone(source: &FinitePoset, target: &FinitePoset, table: &[usize]) -> bool {
    table.len() == source.len() && first_monotonicity_violation(source, target, table).is_none()
}

/// `g⁻¹(U)`, upper because `g` is monotone.
pub fn preimage(map: &MonotoneMap, u: &UpperSet) -> Result<UpperSet> {
    map.target.ensure_same(u.poset())?;
    let mut members = FixedBitSet::with_capacity(map.source.len());
    members.extend((0..map.source.len()).filter(|&i| u.contains(map.table[i])));
    Ok(UpperSet { poset: map.source.clone(), members })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain2() -> PosetRef {
        FinitePoset::chain("C2", &["a", "b"]).unwrap().into_ref()
    }

    fn brute_force_upper_count(p: &FinitePoset) -> usize {
        let n = p.len();
        (0u32..(1 << n))
            .filter(|mask| {
                let mut s = FixedBitSet::with_capacity(n);
                s.extend((0..n).filter(|i| mask & (1 << i) != 0));
                is_upper_set(p, &s)
            })
            .count()
    }

    #[test]
    fn two_chain_closure() {
        let p = chain2();
        assert!(p.leq(0, 1));
        assert!(!p.leq(1, 0));
        assert!(p.leq(0, 0) && p.leq(1, 1));
    }

    #[test]
    fn two_antichain_has_only_reflexive_pairs() {
        let p = FinitePoset::antichain("A2", &["a", "b"]).unwrap();
        assert!(!p.leq(0, 1) && !p.leq(1, 0));
        assert!(p.is_antichain());
    }

    #[test]
    fn closure_is_transitive() {
        let p = FinitePoset::chain("C5", &["a", "b", "c", "d", "e"]).unwrap();
        assert!(p.leq(0, 4));
        assert_eq!(p.covers(), vec![(0, 1), (1, 2), (2, 3), (3, 4)]);
    }

    #[test]
    fn duplicate_and_cycle_errors() {
        assert_eq!(
            FinitePoset::antichain("X", &["a", "b", "a"]).unwrap_err(),
            Error::DuplicateElement("a".into())
        );
        let err = FinitePoset::build("X", &["a", "b", "c"], &[("a", "b"), ("b", "c"), ("c", "a")]).unwrap_err();
        assert!(matches!(err, Error::CycleDetected(_)));
        let err = FinitePoset::build("X", &["a"], &[("a", "z")]).unwrap_err();
        assert_eq!(err, Error::UnknownElement("z".into()));
    }

    #[test]
    fn upper_set_membership() {
        let p = chain2();
        assert!(is_upper_set_ids(&p, &["b"]).unwrap());
        assert!(!is_upper_set_ids(&p, &["a"]).unwrap());
        assert!(is_upper_set_ids(&p, &[]).unwrap());
        assert_eq!(is_upper_set_ids(&p, &["q"]).unwrap_err(), Error::UnknownElement("q".into()));
    }

    #[test]
    fn upper_set_counts() {
        let c2 = chain2();
        let sets = enumerate_upper_sets(&c2, DEFAULT_MAX_ELEMS).unwrap();
        let listed: Vec<Vec<&str>> = sets.iter().map(|u| u.ids()).collect();
        assert_eq!(listed.len(), 3);
        for expected in [vec![], vec!["b"], vec!["a", "b"]] {
            assert!(listed.contains(&expected));
        }

        let a4 = FinitePoset::antichain("A4", &["a", "b", "c", "d"]).unwrap().into_ref();
        assert_eq!(enumerate_upper_sets(&a4, 16).unwrap().len(), 16);

        let c3 = FinitePoset::chain("C3", &["a", "b", "c"]).unwrap().into_ref();
        assert_eq!(enumerate_upper_sets(&c3, 16).unwrap().len(), brute_force_upper_count(&c3));
        assert_eq!(brute_force_upper_count(&c3), 4);
    }

    #[test]
    fn enumeration_bound() {
        let ids: Vec<String> = (0..17).map(|i| format!("e{i}")).collect();
        let p = FinitePoset::build::<String>("Big", &ids, &[]).unwrap().into_ref();
        assert_eq!(
            enumerate_upper_sets(&p, DEFAULT_MAX_ELEMS).unwrap_err(),
            Error::TooLarge { size: 17, bound: 16 }
        );
    }

    #[test]
    fn products() {
        let c2 = chain2();
        let sq = product(&c2, &c2);
        assert_eq!(sq.len(), 4);
        let aa = sq.index_of("(a,a)").unwrap();
        let ab = sq.index_of("(a,b)").unwrap();
        let ba = sq.index_of("(b,a)").unwrap();
        let bb = sq.index_of("(b,b)").unwrap();
        assert!(sq.leq(aa, ab) && sq.leq(aa, ba) && sq.leq(ab, bb) && sq.leq(ba, bb));
        assert!(!sq.leq(ab, ba) && !sq.leq(ba, ab));

        let one = FinitePoset::antichain("1", &["*"]).unwrap();
        let p = product(&one, &c2);
        assert_eq!(p.len(), 2);
        assert!(p.leq(0, 1) && !p.leq(1, 0));

        let a2 = FinitePoset::antichain("A2", &["x", "y"]).unwrap();
        assert!(product(&a2, &a2).is_antichain());
    }

    #[test]
    fn monotone_checks() {
        let c2 = chain2();
        let id = MonotoneMap::identity(&c2);
        assert!(check_monotone(&c2, &c2, id.table()));
        assert!(check_monotone(&c2, &c2, &[1, 1]));
        assert!(!check_monotone(&c2, &c2, &[1, 0]));
        assert!(matches!(MonotoneMap::new(&c2, &c2, vec![1, 0]), Err(Error::NotMonotone(_))));
        assert!(matches!(MonotoneMap::from_ids(&c2, &c2, &[("a", "z"), ("b", "b")]), Err(Error::UnknownElement(_))));
    }

    #[test]
    fn preimages() {
        let c2 = chain2();
        let c3 = FinitePoset::chain("C3", &["x", "y", "z"]).unwrap().into_ref();
        for u in enumerate_upper_sets(&c2, 16).unwrap() {
            assert_eq!(preimage(&MonotoneMap::identity(&c2), &u).unwrap(), u);
        }
        let konst = MonotoneMap::constant(&c2, &c3, 1);
        let with_y = UpperSet::from_ids(&c3, &["y", "z"]).unwrap();
        let without_y = UpperSet::from_ids(&c3, &["z"]).unwrap();
        assert_eq!(preimage(&konst, &with_y).unwrap(), UpperSet::full(&c2));
        assert_eq!(preimage(&konst, &without_y).unwrap(), UpperSet::empty(&c2));
    }
}
