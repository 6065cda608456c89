//! The randomized criteria run by `valuations suite`.
//!
//! Each check draws its instances from `gen::rng_for(seed, trial)` and
//! reports counts only, so two runs with the same seed serialize to the same
//! bytes.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::gen;
use crate::integration::{integrate, integrate_riemann_oracle, Integrand};
use crate::interval::{
    change_of_variable_check, interval_fubini_check, lebesgue, pushforward_mass_identity, refinement_chain_check, Cdf,
};
use crate::lang::{check_equiv, gen::random_let_swap, parse, Context};
use crate::monad::{
    central_falsifier, check_monad_laws, disintegration_check, fubini_check, ProductSpace,
};
use crate::poset::{FinitePoset, PosetRef};
use crate::rational::q;
use crate::valuation::{make_simple, stochastic_leq_exhaustive, stochastic_leq_flow, SimpleValuation};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub checked: u64,
    pub failures: u64,
    pub passed: bool,
}

impl CriterionReport {
    fn new(id: u8, name: &'static str, checked: u64, failures: u64) -> Self {
        CriterionReport { id, name, checked, failures, passed: failures == 0 && checked > 0 }
    }
}

/// Sizes of each randomized check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub laws: u64,
    pub fubini: u64,
    pub oracle: u64,
    pub order: u64,
    pub disintegration: u64,
    pub step_maps: u64,
    pub chains: u64,
    pub central_valuations: u64,
    pub central_trials: u64,
    pub swaps: u64,
}

impl Budget {
    pub const FULL: Budget = Budget {
        laws: 1000,
        fubini: 1000,
        oracle: 1000,
        order: 500,
        disintegration: 500,
        step_maps: 60,
        chains: 20,
        central_valuations: 20,
        central_trials: 500,
        swaps: 300,
    };

    pub const QUICK: Budget = Budget {
        laws: 50,
        fubini: 50,
        oracle: 50,
        order: 30,
        disintegration: 30,
        step_maps: 8,
        chains: 3,
        central_valuations: 3,
        central_trials: 20,
        swaps: 20,
    };
}

/// Largest poset drawn by the monad-law check.
pub const LAW_MAX_ELEMS: usize = 8;
/// Largest poset drawn by the order-agreement check.
pub const ORDER_MAX_ELEMS: usize = 12;
/// Number of non-uniform CDFs used besides the uniform one.
pub const EXTRA_CDFS: usize = 5;
/// Deepest dyadic level of generated step maps.
pub const STEP_MAX_LEVEL: u32 = 6;

pub fn monad_laws(seed: u64, budget: &Budget) -> Result<CriterionReport> {
    let r = check_monad_laws(budget.laws, seed, LAW_MAX_ELEMS)?;
    let failures = [r.left_unit, r.right_unit, r.associativity]
        .iter()
        .map(|t| t.total - t.passed)
        .sum();
    Ok(CriterionReport::new(1, "monad laws", budget.laws, failures))
}

pub fn fubini(seed: u64, budget: &Budget) -> Result<CriterionReport> {
    let mut failures = 0;
    for trial in 0..budget.fubini {
        let mut rng = gen::rng_for(seed, trial);
        let d = gen::random_poset(&mut rng, "D", 1, 5).into_ref();
        let e = gen::random_poset(&mut rng, "E", 1, 5).into_ref();
        let nu = gen::random_valuation(&mut rng, &d);
        let mu = gen::random_valuation(&mut rng, &e);
        let h = gen::random_bi_integrand(&mut rng, &ProductSpace::new(&d, &e));
        failures += u64::from(!fubini_check(&nu, &mu, &h)?.three_way());
    }
    Ok(CriterionReport::new(2, "fubini", budget.fubini, failures))
}

/// The chain `a ≤ b` with `h = (1/3, 1)` and `ν = ½δa + ¼δb`.
pub fn worked_integral() -> Result<(Integrand, SimpleValuation)> {
    let c2 = FinitePoset::chain("C2", &["a", "b"])?.into_ref();
    let h = Integrand::from_ids(&c2, &[("a", q(1, 3)), ("b", q(1, 1))])?;
    let nu = make_simple(&c2, &[("a", q(1, 2)), ("b", q(1, 4))])?;
    Ok((h, nu))
}

pub fn integral_oracle(seed: u64, budget: &Budget) -> Result<CriterionReport> {
    let (h, nu) = worked_integral()?;
    let closed = integrate(&h, &nu)?;
    let mut failures = u64::from(closed != integrate_riemann_oracle(&h, &nu)? || *closed.value() != q(5, 12));
    for trial in 0..budget.oracle {
        let mut rng = gen::rng_for(seed, trial);
        let p = gen::random_poset(&mut rng, "P", 1, 10).into_ref();
        let h = gen::random_integrand(&mut rng, &p);
        let nu = gen::random_valuation(&mut rng, &p);
        failures += u64::from(integrate(&h, &nu)? != integrate_riemann_oracle(&h, &nu)?);
    }
    Ok(CriterionReport::new(3, "integral oracle", budget.oracle + 1, failures))
}

/// A valuation stochastically above `lower`: every atom is moved to a
/// random element above it, and some of the spare mass is added on top.
pub fn random_dominating(rng: &mut ChaCha8Rng, lower: &SimpleValuation) -> SimpleValuation {
    let poset = lower.poset();
    let mut atoms: Vec<(usize, crate::rational::Q)> = lower
        .atoms()
        .map(|(i, w)| {
            let ups: Vec<usize> = poset.up_set(i).ones().collect();
            (ups[rng.gen_range(0..ups.len())], w.clone())
        })
        .collect();
    let spare = crate::rational::one() - lower.total_mass();
    let k = rng.gen_range(0..=gen::WEIGHT_GRID);
    atoms.push((rng.gen_range(0..poset.len()), spare * q(k, gen::WEIGHT_GRID)));
    SimpleValuation::from_indexed(poset, atoms).expect("mass stays below one")
}

pub fn order_agreement(seed: u64, budget: &Budget) -> Result<CriterionReport> {
    let mut failures = 0;
    for trial in 0..budget.order {
        let mut rng = gen::rng_for(seed, trial);
        let p = gen::random_poset(&mut rng, "P", 1, ORDER_MAX_ELEMS).into_ref();
        let lo = gen::random_valuation(&mut rng, &p);
        let hi = if rng.gen_bool(0.5) { random_dominating(&mut rng, &lo) } else { gen::random_valuation(&mut rng, &p) };
        for (a, b) in [(&lo, &hi), (&hi, &lo)] {
            let flow = stochastic_leq_flow(a, b)?;
            let exhaustive = stochastic_leq_exhaustive(a, b, ORDER_MAX_ELEMS)?;
            failures += u64::from(flow != exhaustive);
        }
    }
    Ok(CriterionReport::new(4, "order agreement", budget.order, failures))
}

pub fn disintegration(seed: u64, budget: &Budget) -> Result<CriterionReport> {
    let mut failures = 0;
    for trial in 0..budget.disintegration {
        let mut rng = gen::rng_for(seed, trial);
        let c = gen::random_poset(&mut rng, "C", 1, 6).into_ref();
        let d = gen::random_poset(&mut rng, "D", 1, 6).into_ref();
        let f = gen::random_kleisli_map(&mut rng, &c, &d)?;
        let mu = gen::random_valuation(&mut rng, &c);
        let h = gen::random_integrand(&mut rng, &d);
        failures += u64::from(!disintegration_check(&f, &mu, &h)?);
    }
    Ok(CriterionReport::new(5, "disintegration", budget.disintegration, failures))
}

/// The uniform CDF followed by [`EXTRA_CDFS`] distinct non-uniform ones.
pub fn test_cdfs(seed: u64) -> Vec<Cdf> {
    let uniform = lebesgue();
    let mut out = vec![uniform.clone()];
    let mut rng = gen::rng_for(seed, u64::MAX);
    while out.len() <= EXTRA_CDFS {
        let cdf = gen::random_cdf(&mut rng, &format!("F{}", out.len()));
        if cdf.points() != uniform.points() && out.iter().all(|c| c.points() != cdf.points()) {
            out.push(cdf);
        }
    }
    out
}

/// Every step map is checked against every CDF: mass on opens,
/// change of variable and Fubini for the push-forward. Refinement chains are
/// checked for stochastic monotonicity.
pub fn pushforward(seed: u64, budget: &Budget) -> Result<CriterionReport> {
    let cdfs = test_cdfs(seed);
    let mut failures = 0;
    let mut checked = 0;
    for trial in 0..budget.step_maps {
        let mut rng = gen::rng_for(seed, trial);
        let target = gen::random_poset(&mut rng, "T", 1, 5).into_ref();
        let level = (trial % u64::from(STEP_MAX_LEVEL + 1)) as u32;
        let f = gen::random_step_map(&mut rng, "f", &target, level);
        let g = gen::random_integrand(&mut rng, &target);
        let e = gen::random_poset(&mut rng, "E", 1, 4).into_ref();
        let mu = gen::random_valuation(&mut rng, &e);
        let h = gen::random_bi_integrand(&mut rng, &ProductSpace::new(&target, &e));
        for cdf in &cdfs {
            checked += 1;
            let ok = pushforward_mass_identity(cdf, &f, ORDER_MAX_ELEMS)?
                && change_of_variable_check(&g, &f, cdf)?
                && interval_fubini_check(cdf, &f, &mu, &h)?;
            failures += u64::from(!ok);
        }
    }
    for trial in 0..budget.chains {
        let mut rng = gen::rng_for(seed, budget.step_maps + trial);
        let target = gen::random_poset(&mut rng, "T", 1, 5).into_ref();
        let chain = gen::random_step_chain(&mut rng, &target, 0, STEP_MAX_LEVEL as usize + 1);
        for cdf in &cdfs {
            checked += 1;
            failures += u64::from(!refinement_chain_check(&chain, cdf)?);
        }
    }
    Ok(CriterionReport::new(6, "push-forward", checked, failures))
}

/// Runs the falsifier against `valuations` random simple valuations, then
/// reruns the first one to confirm the report is reproducible.
pub fn central(seed: u64, budget: &Budget) -> Result<CriterionReport> {
    let mut failures = 0;
    let mut first: Option<(SimpleValuation, u64, bool)> = None;
    for k in 0..budget.central_valuations {
        let mut rng = gen::rng_for(seed, k);
        let p: PosetRef = gen::random_poset(&mut rng, "D", 1, 6).into_ref();
        let nu = gen::random_valuation(&mut rng, &p);
        let report = central_falsifier(&nu, budget.central_trials, seed.wrapping_add(k))?;
        failures += u64::from(report.falsified);
        if first.is_none() {
            first = Some((nu, report.trials, report.falsified));
        }
    }
    if let Some((nu, trials, falsified)) = first {
        let again = central_falsifier(&nu, budget.central_trials, seed)?;
        failures += u64::from(again.trials != trials || again.falsified != falsified);
    }
    Ok(CriterionReport::new(7, "central falsifier", budget.central_valuations * budget.central_trials, failures))
}

/// The coin used by the bias counterexample.
pub const COIN_POSET: &str = "poset Coin = { heads, tails } ;\n";
pub const FAIR_COIN: &str = "main = choice 1/2 (const Coin.heads) (const Coin.tails)";
pub const BIASED_COIN: &str = "main = choice 1/3 (const Coin.heads) (const Coin.tails)";

/// The two coin programs evaluated and compared.
pub fn bias_counterexample_distinguished() -> Result<bool> {
    let fair = parse(&format!("{COIN_POSET}{FAIR_COIN}"), &Context::default())?;
    let biased = parse(&format!("{COIN_POSET}{BIASED_COIN}"), &Context::default())?;
    Ok(!check_equiv(&fair, &biased)?)
}

pub fn program_equivalence(seed: u64, budget: &Budget) -> Result<CriterionReport> {
    let mut failures = u64::from(!bias_counterexample_distinguished()?);
    for trial in 0..budget.swaps {
        let mut rng = gen::rng_for(seed, trial);
        let case = random_let_swap(&mut rng);
        let original = parse(&case.original, &case.context)?;
        let swapped = parse(&case.swapped, &case.context)?;
        failures += u64::from(!check_equiv(&original, &swapped)?);
    }
    Ok(CriterionReport::new(8, "program equivalence", budget.swaps + 1, failures))
}

pub fn run_all(seed: u64, budget: &Budget) -> Result<Vec<CriterionReport>> {
    Ok(vec![
        monad_laws(seed, budget)?,
        fubini(seed, budget)?,
        integral_oracle(seed, budget)?,
        order_agreement(seed, budget)?,
        disintegration(seed, budget)?,
        pushforward(seed, budget)?,
        central(seed, budget)?,
        program_equivalence(seed, budget)?,
    ])
}
