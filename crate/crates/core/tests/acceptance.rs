//! Acceptance criteria 1–9. Runs as a plain binary so that one line per
//! criterion is always printed; exits non-zero if any criterion fails.
//!
//! Each check compares the library against a direct sum written here, in
//! addition to the library's own cross-checks.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use rand::Rng;

use valuations::gen;
use valuations::integration::{integrate, integrate_riemann_oracle, Integrand};
use valuations::interval::{
    change_of_variable_check, interval_fubini_check, lebesgue, pushforward, pushforward_mass_identity,
    refinement_chain_check, Cdf, StepMap,
};
use valuations::lang::{check_equiv, gen::random_let_swap, parse};
use valuations::monad::{
    central_falsifier, disintegration_sides, fubini_check, kleisli_ext, BiIntegrand, KleisliMap, ProductSpace,
};
use valuations::rational::{q, Q};
use valuations::suite::{bias_counterexample_distinguished, random_dominating, worked_integral};
use valuations::valuation::{dirac_at, stochastic_leq_exhaustive, stochastic_leq_flow, SimpleValuation};

const SEED: u64 = 2026;

struct Outcome {
    ok: bool,
    detail: String,
}

fn dense(nu: &SimpleValuation) -> Vec<Q> {
    (0..nu.poset().len()).map(|i| nu.weight(i)).collect()
}

/// `Σ_x ν(x) h(x)` over the dense weight vector.
fn direct_integral(h: &Integrand, nu: &SimpleValuation) -> Q {
    dense(nu).iter().zip(h.values()).map(|(w, v)| w * v).sum()
}

/// `Σ_j (t_j − t_{j−1}) · Σ_{h(x) ≥ t_j} ν(x)` over the sorted distinct values.
fn direct_threshold_sum(h: &Integrand, nu: &SimpleValuation) -> Q {
    let mut levels: Vec<Q> = h.values().to_vec();
    levels.push(Q::zero());
    levels.sort();
    levels.dedup();
    let weights = dense(nu);
    levels
        .windows(2)
        .map(|w| {
            let above: Q = h.values().iter().zip(&weights).filter(|(v, _)| **v >= w[1]).map(|(_, m)| m.clone()).sum();
            (&w[1] - &w[0]) * above
        })
        .sum()
}

fn monad_laws() -> Outcome {
    let mut passed = [0u64; 3];
    let trials = 1000;
    for trial in 0..trials {
        let mut rng = gen::rng_for(SEED, trial);
        let c = gen::random_poset(&mut rng, "C", 1, 8).into_ref();
        let d = gen::random_poset(&mut rng, "D", 1, 8).into_ref();
        let e = gen::random_poset(&mut rng, "E", 1, 8).into_ref();
        let f = gen::random_kleisli_map(&mut rng, &c, &d).unwrap();
        let g = gen::random_kleisli_map(&mut rng, &d, &e).unwrap();
        let nu = gen::random_valuation(&mut rng, &c);
        let x = rng.gen_range(0..c.len());

        passed[0] += u64::from(&kleisli_ext(&f, &dirac_at(&c, x)).unwrap() == f.apply(x));
        passed[1] += u64::from(kleisli_ext(&KleisliMap::unit(&c), &nu).unwrap() == nu);

        // (g†∘f)†ν and g†(f†ν) against Σ_x Σ_y ν(x) f(x)(y) g(y)(z)
        let mut table = vec![Q::zero(); e.len()];
        for (xi, wx) in nu.atoms() {
            for (yi, wy) in f.apply(xi).atoms() {
                for (zi, wz) in g.apply(yi).atoms() {
                    table[zi] += wx * wy * wz;
                }
            }
        }
        let once = kleisli_ext(&f.then(&g).unwrap(), &nu).unwrap();
        let twice = kleisli_ext(&g, &kleisli_ext(&f, &nu).unwrap()).unwrap();
        passed[2] += u64::from(once == twice && dense(&once) == table);
    }
    Outcome {
        ok: passed.iter().all(|&p| p == trials),
        detail: format!("left unit {}/{trials}, right unit {}/{trials}, associativity {}/{trials}", passed[0], passed[1], passed[2]),
    }
}

fn fubini() -> Outcome {
    let trials = 1000;
    let mut agree = 0;
    for trial in 0..trials {
        let mut rng = gen::rng_for(SEED, trial);
        let d = gen::random_poset(&mut rng, "D", 1, 8).into_ref();
        let e = gen::random_poset(&mut rng, "E", 1, 8).into_ref();
        let nu = gen::random_valuation(&mut rng, &d);
        let mu = gen::random_valuation(&mut rng, &e);
        let h = gen::random_bi_integrand(&mut rng, &ProductSpace::new(&d, &e));
        let r = fubini_check(&nu, &mu, &h).unwrap();
        let direct: Q = nu
            .atoms()
            .flat_map(|(x, w)| mu.atoms().map(move |(y, v)| (x, y, w * v)))
            .map(|(x, y, wv)| wv * h.value(x, y))
            .sum();
        agree += u64::from(r.three_way() && *r.lhs.value() == direct);
    }
    Outcome { ok: agree == trials, detail: format!("lhs == rhs == joint == direct on {agree}/{trials}") }
}

fn integral_oracle() -> Outcome {
    let (h, nu) = worked_integral().unwrap();
    let worked = [
        integrate(&h, &nu).unwrap().into_inner(),
        integrate_riemann_oracle(&h, &nu).unwrap().into_inner(),
        direct_threshold_sum(&h, &nu),
    ];
    let worked_ok = worked.iter().all(|v| *v == q(5, 12));
    let trials = 1000;
    let mut agree = 0;
    for trial in 0..trials {
        let mut rng = gen::rng_for(SEED, trial);
        let p = gen::random_poset(&mut rng, "P", 1, 10).into_ref();
        let h = gen::random_integrand(&mut rng, &p);
        let nu = gen::random_valuation(&mut rng, &p);
        let closed = integrate(&h, &nu).unwrap().into_inner();
        let oracle = integrate_riemann_oracle(&h, &nu).unwrap().into_inner();
        agree += u64::from(closed == oracle && closed == direct_integral(&h, &nu) && oracle == direct_threshold_sum(&h, &nu));
    }
    Outcome {
        ok: worked_ok && agree == trials,
        detail: format!("worked instance {} ; weighted sum == threshold sum on {agree}/{trials}", if worked_ok { "5/12" } else { "WRONG" }),
    }
}

fn order_agreement() -> Outcome {
    let trials = 500;
    let mut agree = 0;
    let mut ordered = 0;
    let mut largest = 0;
    for trial in 0..trials {
        let mut rng = gen::rng_for(SEED, trial);
        let p = gen::random_poset(&mut rng, "P", 1, 12).into_ref();
        largest = largest.max(p.len());
        let lo = gen::random_valuation(&mut rng, &p);
        let hi = if trial % 2 == 0 { random_dominating(&mut rng, &lo) } else { gen::random_valuation(&mut rng, &p) };
        let flow = stochastic_leq_flow(&lo, &hi).unwrap();
        let back = stochastic_leq_flow(&hi, &lo).unwrap();
        let exhaustive = stochastic_leq_exhaustive(&lo, &hi, 12).unwrap();
        let back_exhaustive = stochastic_leq_exhaustive(&hi, &lo, 12).unwrap();
        ordered += u64::from(flow);
        agree += u64::from(flow == exhaustive && back == back_exhaustive);
    }
    Outcome {
        ok: agree == trials && ordered > 0 && ordered < trials,
        detail: format!("flow == exhaustive on {agree}/{trials} ({ordered} ordered, posets up to {largest})"),
    }
}

fn disintegration() -> Outcome {
    let trials = 500;
    let mut agree = 0;
    for trial in 0..trials {
        let mut rng = gen::rng_for(SEED, trial);
        let c = gen::random_poset(&mut rng, "C", 1, 8).into_ref();
        let d = gen::random_poset(&mut rng, "D", 1, 8).into_ref();
        let f = gen::random_kleisli_map(&mut rng, &c, &d).unwrap();
        let mu = gen::random_valuation(&mut rng, &c);
        let h = gen::random_integrand(&mut rng, &d);
        let (lhs, rhs) = disintegration_sides(&f, &mu, &h).unwrap();
        let direct: Q = mu.atoms().map(|(t, w)| w * direct_integral(&h, f.apply(t))).sum();
        agree += u64::from(lhs == rhs && *lhs.value() == direct);
    }
    Outcome { ok: agree == trials, detail: format!("both sides equal on {agree}/{trials}") }
}

/// `ν([a,b))`, or `ν([a,1])` when `b = 1`, from the atoms and the linear
/// pieces of the CDF rather than from its values at `a` and `b`.
fn direct_cell_mass(cdf: &Cdf, a: &Q, b: &Q) -> Q {
    let points = cdf.points();
    let inside = |x: &Q| x >= a && (x < b || b.is_one());
    let atoms: Q = points.iter().filter(|(x, _, _)| inside(x)).map(|(_, l, r)| r - l).sum();
    let spread: Q = points
        .windows(2)
        .map(|w| {
            let (x0, _, f0) = &w[0];
            let (x1, f1, _) = &w[1];
            let lo = x0.max(a);
            let hi = x1.min(b);
            if lo >= hi {
                Q::zero()
            } else {
                (f1 - f0) / (x1 - x0) * (hi - lo)
            }
        })
        .sum();
    atoms + spread
}

fn direct_pushforward(cdf: &Cdf, f: &StepMap) -> Vec<Q> {
    let mut weights = vec![Q::zero(); f.target().len()];
    let denom = 1i64 << f.level();
    for (k, &c) in f.cells().iter().enumerate() {
        weights[c] += direct_cell_mass(cdf, &q(k as i64, denom), &q(k as i64 + 1, denom));
    }
    weights
}

fn pushforward_criterion() -> Outcome {
    let mut cdfs = vec![lebesgue()];
    let mut rng = gen::rng_for(SEED, 1 << 40);
    while cdfs.len() < 6 {
        let cdf = gen::random_cdf(&mut rng, &format!("F{}", cdfs.len()));
        if cdfs.iter().all(|c| c.points() != cdf.points()) {
            cdfs.push(cdf);
        }
    }
    let maps = 56;
    let mut checks = 0;
    let mut passed = 0;
    let mut levels = BTreeMap::new();
    for trial in 0..maps {
        let mut rng = gen::rng_for(SEED, trial);
        let target = gen::random_poset(&mut rng, "T", 1, 5).into_ref();
        let level = (trial % 7) as u32;
        *levels.entry(level).or_insert(0) += 1;
        let f = gen::random_step_map(&mut rng, "f", &target, level);
        let g = gen::random_integrand(&mut rng, &target);
        let e = gen::random_poset(&mut rng, "E", 1, 4).into_ref();
        let mu = gen::random_valuation(&mut rng, &e);
        let h: BiIntegrand = gen::random_bi_integrand(&mut rng, &ProductSpace::new(&target, &e));
        for cdf in &cdfs {
            checks += 1;
            let pushed = pushforward(cdf, &f).unwrap();
            let ok = dense(&pushed) == direct_pushforward(cdf, &f)
                && pushforward_mass_identity(cdf, &f, 16).unwrap()
                && change_of_variable_check(&g, &f, cdf).unwrap()
                && interval_fubini_check(cdf, &f, &mu, &h).unwrap();
            passed += u64::from(ok);
        }
    }
    let chains = 20;
    let mut chain_ok = 0;
    for trial in 0..chains {
        let mut rng = gen::rng_for(SEED, 1000 + trial);
        let target = gen::random_poset(&mut rng, "T", 1, 5).into_ref();
        let chain = gen::random_step_chain(&mut rng, &target, 0, 7);
        chain_ok += u64::from(cdfs.iter().all(|cdf| refinement_chain_check(&chain, cdf).unwrap()));
    }
    Outcome {
        ok: passed == checks && chain_ok == chains && levels.len() == 7,
        detail: format!(
            "{maps} step maps (levels 0-6) x {} CDFs: {passed}/{checks} ; refinement chains {chain_ok}/{chains}",
            cdfs.len()
        ),
    }
}

fn central() -> Outcome {
    let valuations = 20;
    let trials = 500;
    let mut clean = 0;
    let mut reproducible = 0;
    for k in 0..valuations {
        let mut rng = gen::rng_for(SEED, k);
        let p = gen::random_poset(&mut rng, "D", 1, 6).into_ref();
        let nu = gen::random_valuation(&mut rng, &p);
        let first = central_falsifier(&nu, trials, SEED + k).unwrap();
        let second = central_falsifier(&nu, trials, SEED + k).unwrap();
        clean += u64::from(!first.falsified && first.trials == trials);
        reproducible += u64::from(first.falsified == second.falsified && first.trials == second.trials);
    }
    Outcome {
        ok: clean == valuations && reproducible == valuations,
        detail: format!("{clean}/{valuations} valuations survive {trials} trials, {reproducible}/{valuations} reruns identical"),
    }
}

fn program_equivalence() -> Outcome {
    let swaps = 300;
    let mut equal = 0;
    for trial in 0..swaps {
        let case = random_let_swap(&mut gen::rng_for(SEED, trial));
        let a = parse(&case.original, &case.context).unwrap();
        let b = parse(&case.swapped, &case.context).unwrap();
        equal += u64::from(check_equiv(&a, &b).unwrap());
    }
    let bias = bias_counterexample_distinguished().unwrap();
    Outcome {
        ok: equal == swaps && bias,
        detail: format!("{equal}/{swaps} swaps equal ; bias 1/2 vs 1/3 {}", if bias { "distinguished" } else { "NOT distinguished" }),
    }
}

fn end_to_end() -> Outcome {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let script = root.join("scripts/reproduce.sh");
    let tmp = tempfile::tempdir().unwrap();
    let run = |out: &Path| {
        Command::new("sh")
            .arg(&script)
            .env("VALUATIONS_BIN", env!("CARGO_BIN_EXE_valuations"))
            .env("SEED", "1")
            .env("OUT", out)
            .output()
            .unwrap()
    };
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let first = run(&a);
    let second = run(&b);
    if !first.status.success() || !second.status.success() {
        return Outcome { ok: false, detail: format!("script failed:\n{}", String::from_utf8_lossy(&first.stdout)) };
    }
    let mut names: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    let identical = names
        .iter()
        .filter(|n| std::fs::read(a.join(n)).unwrap() == std::fs::read(b.join(n)).unwrap())
        .count();
    let suite: serde_json::Value = serde_json::from_slice(&std::fs::read(a.join("suite.json")).unwrap()).unwrap();
    let suite_ok = suite["ok"] == serde_json::Value::Bool(true);
    Outcome {
        ok: identical == names.len() && names.len() >= 10 && suite_ok,
        detail: format!("exit 0 twice, {identical}/{} reports byte-identical, suite ok: {suite_ok}", names.len()),
    }
}

type Criterion = (&'static str, u64, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("monad laws", 30, monad_laws),
        ("fubini", 60, fubini),
        ("integral oracle", 10, integral_oracle),
        ("order agreement", 60, order_agreement),
        ("disintegration", 30, disintegration),
        ("push-forward", 60, pushforward_criterion),
        ("central falsifier", 60, central),
        ("program equivalence", 30, program_equivalence),
        ("end-to-end CLI", 300, end_to_end),
    ];
    let mut failed = 0;
    for (k, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let in_time = elapsed < Duration::from_secs(*limit);
        let ok = outcome.ok && in_time;
        failed += u64::from(!ok);
        println!(
            "[{}] {}. {name}: {} ({:.2}s, limit {limit}s)",
            if ok { "PASS" } else { "FAIL" },
            k + 1,
            outcome.detail,
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
