//! The valuations monad restricted to simple valuations on finite posets.
//!
//! Simple valuations are central, so on this fragment the two iterated
//! integrals of every monotone `h: D × E → [0,1]` agree and the monad is
//! commutative. The checks here compute both sides exactly and compare them
//! with `==`; there is no tolerance anywhere.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gen;
use crate::integration::{integrate, Integrand};
use crate::poset::{pair_index, product, MonotoneMap, PosetRef};
use crate::rational::{MassValue, Q};
use crate::valuation::{dirac_at, stochastic_leq_flow, SimpleValuation};

/// A Scott-continuous map `f: C → V D`: monotone into the stochastic order.
#[derive(Clone, PartialEq, Eq)]
pub struct KleisliMap {
    source: PosetRef,
    target: PosetRef,
    table: Vec<SimpleValuation>,
}

impl fmt::Debug for KleisliMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (i, v) in self.table.iter().enumerate() {
            m.entry(&self.source.element(i), &format_args!("{v}"));
        }
        m.finish()
    }
}

impl KleisliMap {
    /// Validates that every image lives on `target` and that covers of the
    /// source are sent to stochastically ordered valuations. Checking covers
    /// suffices because the stochastic order is transitive.
    pub fn new(source: &PosetRef, target: &PosetRef, table: Vec<SimpleValuation>) -> Result<Self> {
        if table.len() != source.len() {
            return Err(Error::NotContinuous(
                format!("{} images", table.len()),
                format!("{} source elements", source.len()),
            ));
        }
        for image in &table {
            image.poset().ensure_same(target)?;
        }
        for (i, j) in source.covers() {
            if !stochastic_leq_flow(&table[i], &table[j])? {
                return Err(Error::NotContinuous(
                    source.element(i).to_string(),
                    source.element(j).to_string(),
                ));
            }
        }
        Ok(KleisliMap { source: source.clone(), target: target.clone(), table })
    }

    /// `η_D` as a Kleisli map `D → V D`.
    pub fn unit(poset: &PosetRef) -> Self {
        let table = (0..poset.len()).map(|i| dirac_at(poset, i)).collect();
        KleisliMap { source: poset.clone(), target: poset.clone(), table }
    }

    /// `η ∘ g`.
    pub fn from_monotone(g: &MonotoneMap) -> Self {
        let table = g.table().iter().map(|&j| dirac_at(g.target(), j)).collect();
        KleisliMap { source: g.source().clone(), target: g.target().clone(), table }
    }

    /// `x ↦ ρ` for a fixed `ρ`.
    pub fn constant(source: &PosetRef, rho: &SimpleValuation) -> Self {
        KleisliMap { source: source.clone(), target: rho.poset().clone(), table: vec![rho.clone(); source.len()] }
    }

    /// `g† ∘ self`, validated like any other Kleisli map.
    pub fn then(&self, g: &KleisliMap) -> Result<KleisliMap> {
        let table = self
            .table
            .iter()
            .map(|nu| kleisli_ext(g, nu))
            .collect::<Result<Vec<_>>>()?;
        KleisliMap::new(&self.source, &g.target, table)
    }

    pub fn source(&self) -> &PosetRef {
        &self.source
    }

    pub fn target(&self) -> &PosetRef {
        &self.target
    }

    pub fn apply(&self, i: usize) -> &SimpleValuation {
        &self.table[i]
    }
}

/// `D × E` together with its pairing, shared by strengths and bivariate
/// integrands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductSpace {
    left: PosetRef,
    right: PosetRef,
    poset: PosetRef,
}

impl ProductSpace {
    pub fn new(left: &PosetRef, right: &PosetRef) -> Self {
        ProductSpace { left: left.clone(), right: right.clone(), poset: product(left, right).into_ref() }
    }

    pub fn left(&self) -> &PosetRef {
        &self.left
    }

    pub fn right(&self) -> &PosetRef {
        &self.right
    }

    pub fn poset(&self) -> &PosetRef {
        &self.poset
    }

    pub fn pair(&self, x: usize, y: usize) -> usize {
        pair_index(self.right.len(), x, y)
    }

    pub fn split(&self, k: usize) -> (usize, usize) {
        (k / self.right.len(), k % self.right.len())
    }
}

/// A monotone `h: D × E → [0,1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiIntegrand {
    space: ProductSpace,
    joint: Integrand,
}

impl BiIntegrand {
    /// `values[x][y] = h(x, y)`.
    pub fn new(left: &PosetRef, right: &PosetRef, values: Vec<Vec<Q>>) -> Result<Self> {
        if values.len() != left.len() || values.iter().any(|row| row.len() != right.len()) {
            return Err(Error::NotMonotone("bivariate table has the wrong shape".into()));
        }
        let space = ProductSpace::new(left, right);
        let joint = Integrand::new(space.poset(), values.into_iter().flatten().collect())?;
        Ok(BiIntegrand { space, joint })
    }

    pub fn from_joint(space: &ProductSpace, joint: Integrand) -> Result<Self> {
        joint.poset().ensure_same(space.poset())?;
        Ok(BiIntegrand { space: space.clone(), joint })
    }

    pub fn space(&self) -> &ProductSpace {
        &self.space
    }

    /// `h` as a single integrand on the product poset.
    pub fn joint(&self) -> &Integrand {
        &self.joint
    }

    pub fn value(&self, x: usize, y: usize) -> &Q {
        self.joint.value(self.space.pair(x, y))
    }

    /// `y ↦ h(x, y)`.
    pub fn section_at_left(&self, x: usize) -> Result<Integrand> {
        let row = (0..self.space.right.len()).map(|y| self.value(x, y).clone()).collect();
        Integrand::new(&self.space.right, row)
    }

    /// `x ↦ h(x, y)`.
    pub fn section_at_right(&self, y: usize) -> Result<Integrand> {
        let col = (0..self.space.left.len()).map(|x| self.value(x, y).clone()).collect();
        Integrand::new(&self.space.left, col)
    }
}

/// `η_D(x) = δₓ`.
pub fn unit(poset: &PosetRef, id: &str) -> Result<SimpleValuation> {
    Ok(dirac_at(poset, poset.index_of(id)?))
}

/// `V(g)(ν)`: atoms pushed through `g`, weights merged.
pub fn vmap(g: &MonotoneMap, nu: &SimpleValuation) -> Result<SimpleValuation> {
    g.source().ensure_same(nu.poset())?;
    SimpleValuation::from_indexed(g.target(), nu.atoms().map(|(i, w)| (g.apply(i), w.clone())))
}

/// `Σᵢ wᵢ · k(xᵢ)` for an arbitrary continuation `k` into `target`. The
/// general bind behind [`kleisli_ext`] and program evaluation.
pub fn bind<F>(nu: &SimpleValuation, target: &PosetRef, mut k: F) -> Result<SimpleValuation>
where
    F: FnMut(usize) -> Result<SimpleValuation>,
{
    let images = nu
        .atoms()
        .map(|(i, w)| Ok((w.clone(), k(i)?)))
        .collect::<Result<Vec<_>>>()?;
    SimpleValuation::mixture(target, images.iter().map(|(w, v)| (w.clone(), v)))
}

/// `f†(ν) = Σᵢ wᵢ f(xᵢ)`. On every open `U` this is `∫ f(x)(U) dν`.
pub fn kleisli_ext(f: &KleisliMap, nu: &SimpleValuation) -> Result<SimpleValuation> {
    f.source.ensure_same(nu.poset())?;
    bind(nu, &f.target, |i| Ok(f.table[i].clone()))
}

/// `(x, ν) ↦ Σ vⱼ δ_{(x, yⱼ)}`.
pub fn strength(space: &ProductSpace, x: usize, nu: &SimpleValuation) -> Result<SimpleValuation> {
    space.right.ensure_same(nu.poset())?;
    if x >= space.left.len() {
        return Err(Error::UnknownElement(format!("#{x}")));
    }
    SimpleValuation::from_indexed(&space.poset, nu.atoms().map(|(y, w)| (space.pair(x, y), w.clone())))
}

/// `(ν, y) ↦ Σ wᵢ δ_{(xᵢ, y)}`.
pub fn costrength(space: &ProductSpace, nu: &SimpleValuation, y: usize) -> Result<SimpleValuation> {
    space.left.ensure_same(nu.poset())?;
    if y >= space.right.len() {
        return Err(Error::UnknownElement(format!("#{y}")));
    }
    SimpleValuation::from_indexed(&space.poset, nu.atoms().map(|(x, w)| (space.pair(x, y), w.clone())))
}

/// `ν ⊗ μ` with atoms `wᵢ vⱼ δ_{(xᵢ, yⱼ)}`.
pub fn product_valuation(space: &ProductSpace, nu: &SimpleValuation, mu: &SimpleValuation) -> Result<SimpleValuation> {
    space.left.ensure_same(nu.poset())?;
    space.right.ensure_same(mu.poset())?;
    let atoms: Vec<(usize, Q)> = nu
        .atoms()
        .flat_map(|(x, w)| mu.atoms().map(move |(y, v)| (space.pair(x, y), w * v)))
        .collect();
    SimpleValuation::from_indexed(&space.poset, atoms)
}

/// `ν`-outer double strength: `(x ↦ strength(x, μ))†(ν)`.
pub fn double_strength_left(space: &ProductSpace, nu: &SimpleValuation, mu: &SimpleValuation) -> Result<SimpleValuation> {
    let table = (0..space.left.len())
        .map(|x| strength(space, x, mu))
        .collect::<Result<Vec<_>>>()?;
    kleisli_ext(&KleisliMap::new(&space.left, &space.poset, table)?, nu)
}

/// `μ`-outer double strength: `(y ↦ costrength(ν, y))†(μ)`.
pub fn double_strength_right(space: &ProductSpace, nu: &SimpleValuation, mu: &SimpleValuation) -> Result<SimpleValuation> {
    let table = (0..space.right.len())
        .map(|y| costrength(space, nu, y))
        .collect::<Result<Vec<_>>>()?;
    kleisli_ext(&KleisliMap::new(&space.right, &space.poset, table)?, mu)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FubiniReport {
    /// `∫_x ∫_y h dμ dν`
    pub lhs: MassValue,
    /// `∫_y ∫_x h dν dμ`
    pub rhs: MassValue,
    /// `∫ h d(ν ⊗ μ)`
    pub joint: MassValue,
    pub equal: bool,
}

impl FubiniReport {
    pub fn three_way(&self) -> bool {
        self.equal && self.lhs == self.joint
    }
}

/// Both iterated integrals of `h` plus the integral against `ν ⊗ μ`.
///
/// Each inner integral is rebuilt as an [`Integrand`] before the outer
/// integration, which re-checks that it is monotone.
pub fn fubini_check(nu: &SimpleValuation, mu: &SimpleValuation, h: &BiIntegrand) -> Result<FubiniReport> {
    let space = h.space();
    space.left.ensure_same(nu.poset())?;
    space.right.ensure_same(mu.poset())?;

    let inner_y = (0..space.left.len())
        .map(|x| Ok(integrate(&h.section_at_left(x)?, mu)?.into_inner()))
        .collect::<Result<Vec<_>>>()?;
    let lhs = integrate(&Integrand::new(&space.left, inner_y)?, nu)?;

    let inner_x = (0..space.right.len())
        .map(|y| Ok(integrate(&h.section_at_right(y)?, nu)?.into_inner()))
        .collect::<Result<Vec<_>>>()?;
    let rhs = integrate(&Integrand::new(&space.right, inner_x)?, mu)?;

    let joint = integrate(h.joint(), &product_valuation(space, nu, mu)?)?;
    let equal = lhs == rhs;
    Ok(FubiniReport { lhs, rhs, joint, equal })
}

/// `∫ h d(f†μ)` and `∫_C (∫ h df(t)) dμ`.
pub fn disintegration_sides(f: &KleisliMap, mu: &SimpleValuation, h: &Integrand) -> Result<(MassValue, MassValue)> {
    h.poset().ensure_same(&f.target)?;
    let lhs = integrate(h, &kleisli_ext(f, mu)?)?;
    let inner = (0..f.source.len())
        .map(|t| Ok(integrate(h, &f.table[t])?.into_inner()))
        .collect::<Result<Vec<_>>>()?;
    let rhs = integrate(&Integrand::new(&f.source, inner)?, mu)?;
    Ok((lhs, rhs))
}

pub fn disintegration_check(f: &KleisliMap, mu: &SimpleValuation, h: &Integrand) -> Result<bool> {
    let (lhs, rhs) = disintegration_sides(f, mu, h)?;
    Ok(lhs == rhs)
}

/// A test instance on which the two iterated integrals differ.
#[derive(Debug, Clone)]
pub struct Witness {
    pub trial: u64,
    pub partner: SimpleValuation,
    pub integrand: BiIntegrand,
    pub lhs: MassValue,
    pub rhs: MassValue,
}

#[derive(Debug, Clone)]
pub struct FalsifierReport {
    pub trials: u64,
    pub falsified: bool,
    pub witness: Option<Witness>,
}

/// Upper bound on the partner poset size drawn by the falsifier.
pub const FALSIFIER_PARTNER_MAX: usize = 6;

/// Searches for a partner `(E, μ, h)` breaking Fubini for `ν`.
///
/// Partners are finite posets with simple valuations. At finite scale these
/// exhaust both the continuous valuations and all valuations on `E`, so the
/// two readings of centrality coincide here. Trial `k` draws from its own
/// stream `(seed, k)`, so reports are reproducible and trials independent.
pub fn central_falsifier(nu: &SimpleValuation, trials: u64, seed: u64) -> Result<FalsifierReport> {
    for trial in 0..trials {
        let mut rng = gen::rng_for(seed, trial);
        let partner_poset = gen::random_poset(&mut rng, "E", 1, FALSIFIER_PARTNER_MAX).into_ref();
        let mu = gen::random_valuation(&mut rng, &partner_poset);
        let space = ProductSpace::new(nu.poset(), &partner_poset);
        let h = gen::random_bi_integrand(&mut rng, &space);
        let report = fubini_check(nu, &mu, &h)?;
        if !report.equal {
            return Ok(FalsifierReport {
                trials: trial + 1,
                falsified: true,
                witness: Some(Witness { trial, partner: mu, integrand: h, lhs: report.lhs, rhs: report.rhs }),
            });
        }
    }
    Ok(FalsifierReport { trials, falsified: false, witness: None })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LawTally {
    pub passed: u64,
    pub total: u64,
}

impl LawTally {
    fn record(&mut self, ok: bool) {
        self.total += 1;
        self.passed += u64::from(ok);
    }

    pub fn all_passed(&self) -> bool {
        self.passed == self.total
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LawReport {
    pub left_unit: LawTally,
    pub right_unit: LawTally,
    pub associativity: LawTally,
}

impl LawReport {
    pub fn all_passed(&self) -> bool {
        self.left_unit.all_passed() && self.right_unit.all_passed() && self.associativity.all_passed()
    }
}

/// `f†∘η = f`, `η† = id` and `(g†∘f)† = g†∘f†` on random instances with
/// posets of at most `max_elems` elements.
pub fn check_monad_laws(trials: u64, seed: u64, max_elems: usize) -> Result<LawReport> {
    let mut report = LawReport::default();
    for trial in 0..trials {
        let mut rng = gen::rng_for(seed, trial);
        let c = gen::random_poset(&mut rng, "C", 1, max_elems).into_ref();
        let d = gen::random_poset(&mut rng, "D", 1, max_elems).into_ref();
        let e = gen::random_poset(&mut rng, "E", 1, max_elems).into_ref();
        let f = gen::random_kleisli_map(&mut rng, &c, &d)?;
        let g = gen::random_kleisli_map(&mut rng, &d, &e)?;
        let nu = gen::random_valuation(&mut rng, &c);
        let x = rand::Rng::gen_range(&mut rng, 0..c.len());

        let left = kleisli_ext(&f, &dirac_at(&c, x))?;
        report.left_unit.record(&left == f.apply(x));

        let right = kleisli_ext(&KleisliMap::unit(&c), &nu)?;
        report.right_unit.record(right == nu);

        let composite = f.then(&g)?;
        let once = kleisli_ext(&composite, &nu)?;
        let twice = kleisli_ext(&g, &kleisli_ext(&f, &nu)?)?;
        report.associativity.record(once == twice);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::{enumerate_upper_sets, FinitePoset};
    use crate::rational::q;
    use crate::valuation::{dirac, make_simple};

    fn chain() -> PosetRef {
        FinitePoset::chain("C2", &["a", "b"]).unwrap().into_ref()
    }

    fn out() -> PosetRef {
        FinitePoset::antichain("Out", &["c", "d"]).unwrap().into_ref()
    }

    /// `c ≤ d`: with a chain source, `δc ≤ ½δc + ½δd` is what makes the
    /// example table continuous.
    fn out_chain() -> PosetRef {
        FinitePoset::chain("Cd", &["c", "d"]).unwrap().into_ref()
    }

    fn nu() -> SimpleValuation {
        make_simple(&chain(), &[("a", q(1, 2)), ("b", q(1, 4))]).unwrap()
    }

    #[test]
    fn unit_is_dirac() {
        let c2 = chain();
        assert_eq!(unit(&c2, "a").unwrap(), dirac(&c2, "a").unwrap());
        for open in enumerate_upper_sets(&c2, 16).unwrap() {
            let m = unit(&c2, "a").unwrap().mass(&open).unwrap();
            assert_eq!(*m.value(), if open.contains(0) { q(1, 1) } else { q(0, 1) });
        }
        assert!(matches!(unit(&c2, "z"), Err(Error::UnknownElement(_))));
    }

    #[test]
    fn vmap_merges_atoms() {
        let c2 = chain();
        let point = FinitePoset::chain("One", &["c"]).unwrap().into_ref();
        let g = MonotoneMap::constant(&c2, &point, 0);
        let pushed = vmap(&g, &nu()).unwrap();
        assert_eq!(pushed, make_simple(&point, &[("c", q(3, 4))]).unwrap());
        for open in enumerate_upper_sets(&point, 16).unwrap() {
            let pre = crate::poset::preimage(&g, &open).unwrap();
            assert_eq!(pushed.mass(&open).unwrap(), nu().mass(&pre).unwrap());
        }
        assert_eq!(vmap(&MonotoneMap::identity(&c2), &nu()).unwrap(), nu());
    }

    fn f_example() -> KleisliMap {
        let o = out_chain();
        let table = vec![
            dirac(&o, "c").unwrap(),
            make_simple(&o, &[("c", q(1, 2)), ("d", q(1, 2))]).unwrap(),
        ];
        KleisliMap::new(&chain(), &o, table).unwrap()
    }

    #[test]
    fn kleisli_extension_example() {
        let f = f_example();
        let result = kleisli_ext(&f, &nu()).unwrap();
        assert_eq!(result, make_simple(&out_chain(), &[("c", q(5, 8)), ("d", q(1, 8))]).unwrap());
        // mass on every open equals the integral of x ↦ f(x)(U)
        for open in enumerate_upper_sets(&out_chain(), 16).unwrap() {
            let inner: Vec<Q> = (0..2).map(|x| f.apply(x).mass(&open).unwrap().into_inner()).collect();
            let h = Integrand::new(&chain(), inner).unwrap();
            assert_eq!(result.mass(&open).unwrap(), integrate(&h, &nu()).unwrap());
        }
    }

    #[test]
    fn unit_laws_on_example() {
        let f = f_example();
        assert_eq!(kleisli_ext(&KleisliMap::unit(&chain()), &nu()).unwrap(), nu());
        assert_eq!(&kleisli_ext(&f, &dirac_at(&chain(), 1)).unwrap(), f.apply(1));
    }

    #[test]
    fn discontinuous_tables_are_rejected() {
        let o = out();
        // a ≤ b but δc and δd are incomparable
        let table = vec![dirac(&o, "c").unwrap(), dirac(&o, "d").unwrap()];
        assert!(matches!(KleisliMap::new(&chain(), &o, table), Err(Error::NotContinuous(..))));
        // on a chain target, decreasing mass is rejected too
        let c2 = chain();
        let table = vec![dirac(&c2, "a").unwrap(), SimpleValuation::zero(&c2)];
        assert!(KleisliMap::new(&c2, &c2, table).is_err());
    }

    #[test]
    fn strength_and_products() {
        let c2 = chain();
        let o = out();
        let space = ProductSpace::new(&c2, &o);
        let mu = make_simple(&o, &[("c", q(1, 2)), ("d", q(1, 4))]).unwrap();
        let s = strength(&space, 0, &mu).unwrap();
        assert_eq!(s.to_string(), "1/2 (a,c), 1/4 (a,d)");
        assert!(strength(&space, 0, &SimpleValuation::zero(&o)).unwrap().is_zero());
        assert_eq!(strength(&space, 1, &dirac(&o, "d").unwrap()).unwrap(), dirac_at(space.poset(), space.pair(1, 1)));

        let half_a = make_simple(&c2, &[("a", q(1, 2))]).unwrap();
        let half_c = make_simple(&o, &[("c", q(1, 2))]).unwrap();
        let p = product_valuation(&space, &half_a, &half_c).unwrap();
        assert_eq!(p.to_string(), "1/4 (a,c)");

        let p = product_valuation(&space, &nu(), &mu).unwrap();
        assert_eq!(p.total_mass(), q(9, 16));
        assert_eq!(double_strength_left(&space, &nu(), &mu).unwrap(), p);
        assert_eq!(double_strength_right(&space, &nu(), &mu).unwrap(), p);
    }

    #[test]
    fn fubini_examples() {
        let c2 = chain();
        let o = out();
        let values = vec![vec![q(0, 1), q(1, 6)], vec![q(1, 2), q(5, 6)]];
        let h = BiIntegrand::new(&c2, &o, values).unwrap();
        let r = fubini_check(&dirac_at(&c2, 0), &dirac_at(&o, 1), &h).unwrap();
        assert_eq!(*r.lhs.value(), q(1, 6));
        assert!(r.three_way());

        let ones = BiIntegrand::new(&c2, &o, vec![vec![q(1, 1); 2]; 2]).unwrap();
        let mu = make_simple(&o, &[("d", q(2, 3))]).unwrap();
        let r = fubini_check(&nu(), &mu, &ones).unwrap();
        assert_eq!(*r.rhs.value(), q(1, 2));
        assert!(r.three_way());

        // h(a,·) > h(b,·) is not monotone on the product
        let bad = vec![vec![q(1, 1), q(1, 1)], vec![q(0, 1), q(0, 1)]];
        assert!(matches!(BiIntegrand::new(&c2, &o, bad), Err(Error::NotMonotone(_))));
    }

    #[test]
    fn disintegration_examples() {
        let f = f_example();
        let h = Integrand::from_ids(&out_chain(), &[("c", q(1, 3)), ("d", q(1, 1))]).unwrap();
        let (lhs, rhs) = disintegration_sides(&f, &dirac_at(&chain(), 1), &h).unwrap();
        assert_eq!(lhs, rhs);
        assert_eq!(*lhs.value(), q(2, 3));

        let rho = make_simple(&out_chain(), &[("d", q(1, 2))]).unwrap();
        let constant = KleisliMap::constant(&chain(), &rho);
        let (lhs, rhs) = disintegration_sides(&constant, &nu(), &h).unwrap();
        assert_eq!(lhs, rhs);
        assert_eq!(*lhs.value(), q(3, 8));
    }

    #[test]
    fn falsifier_finds_nothing_and_is_deterministic() {
        let c2 = chain();
        let r = central_falsifier(&dirac_at(&c2, 0), 50, 9).unwrap();
        assert!(!r.falsified);
        assert_eq!(r.trials, 50);
        let a = central_falsifier(&nu(), 200, 4).unwrap();
        let b = central_falsifier(&nu(), 200, 4).unwrap();
        assert!(!a.falsified);
        assert_eq!((a.trials, a.falsified), (b.trials, b.falsified));
    }

    #[test]
    fn laws_on_small_posets() {
        let r = check_monad_laws(100, 1, 6).unwrap();
        assert!(r.all_passed(), "{r:?}");
        assert_eq!(r.associativity.total, 100);
    }
}
