//! The `valuations` command line.
//!
//! Every command produces an [`Outcome`]: a human-readable text, a JSON
//! report and a pass/fail flag. The process exits with 0 when the flag is
//! set, 1 when an assertion failed and 2 on input errors.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::error::Result;
use crate::formats::{self, json_q as qs, valuation_json};
use crate::integration::{integrate, integrate_riemann_oracle};
use crate::interval::{pushforward, pushforward_mass_identity};
use crate::lang;
use crate::monad::{central_falsifier, check_monad_laws, fubini_check, LawTally, Witness};
use crate::poset::DEFAULT_MAX_ELEMS;
use crate::rational::fmt_q;
use crate::suite::{self, Budget, LAW_MAX_ELEMS};
use crate::valuation::{stochastic_leq_exhaustive, stochastic_leq_flow, transport_plan};
pub use crate::workspace::Workspace;

#[derive(Debug, Parser)]
#[command(name = "valuations", version, about = "Exact checks for simple valuations on finite posets")]
pub struct Cli {
    /// Directory holding .poset, .val, .fn, .cdf, .step and .prob files.
    #[arg(long, global = true, default_value = ".")]
    pub workspace: PathBuf,
    /// Emit a JSON report instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 200)]
    pub trials: u64,
    /// Largest poset on which upper sets are enumerated.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_ELEMS)]
    pub max_elems: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Expect {
    Equal,
    Different,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate with the closed form and the threshold oracle.
    Integrate { valuation: String, integrand: String },
    /// Decide the stochastic order between two valuations.
    Compare { first: String, second: String },
    /// Both iterated integrals of a two-argument integrand.
    Fubini { left: String, right: String, integrand: String },
    /// Monad laws on random instances.
    Laws,
    /// Push a CDF forward along a step map.
    Pushforward { cdf: String, stepmap: String },
    /// Evaluate a program.
    Eval { program: String },
    /// Compare the denotations of two programs.
    Equiv {
        first: String,
        second: String,
        #[arg(long, value_enum, default_value_t = Expect::Equal)]
        expect: Expect,
    },
    /// Search for a Fubini counterexample against a valuation.
    Central { valuation: String },
    /// Run every randomized check.
    Suite {
        /// Small instance counts, for smoke testing.
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub ok: bool,
    pub text: String,
    pub json: Value,
}

pub fn witness_json(w: &Witness) -> Value {
    let space = w.integrand.space();
    let values: Vec<Value> = (0..space.left().len())
        .flat_map(|x| (0..space.right().len()).map(move |y| (x, y)))
        .map(|(x, y)| json!([space.left().element(x), space.right().element(y), fmt_q(w.integrand.value(x, y))]))
        .collect();
    json!({
        "trial": w.trial,
        "partner": valuation_json(&w.partner),
        "partner_poset": formats::write_poset(space.right()),
        "integrand": values,
        "lhs": qs(w.lhs.value()),
        "rhs": qs(w.rhs.value()),
    })
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "OK"
    } else {
        "FAIL"
    }
}

pub fn cmd_integrate(ws: &Workspace, valuation: &str, integrand: &str) -> Result<Outcome> {
    let nu = ws.valuation(valuation)?;
    let h = ws.integrand(integrand)?;
    let closed = integrate(h, nu)?;
    let oracle = integrate_riemann_oracle(h, nu)?;
    let ok = closed == oracle;
    let text = format!("{closed} {} {oracle} {}", if ok { "==" } else { "!=" }, verdict(ok));
    let json = json!({
        "command": "integrate",
        "valuation": valuation,
        "integrand": integrand,
        "closed_form": qs(closed.value()),
        "oracle": qs(oracle.value()),
        "ok": ok,
    });
    Ok(Outcome { ok, text, json })
}

pub fn cmd_compare(ws: &Workspace, first: &str, second: &str, max_elems: usize) -> Result<Outcome> {
    let a = ws.valuation(first)?;
    let b = ws.valuation(second)?;
    a.poset().ensure_same(b.poset())?;
    let flow = (stochastic_leq_flow(a, b)?, stochastic_leq_flow(b, a)?);
    let label = match flow {
        (true, true) => "EQ",
        (true, false) => "LEQ",
        (false, true) => "GEQ",
        (false, false) => "INCOMPARABLE",
    };
    let exhaustive = if a.poset().len() <= max_elems {
        Some((stochastic_leq_exhaustive(a, b, max_elems)?, stochastic_leq_exhaustive(b, a, max_elems)?))
    } else {
        None
    };
    let ok = exhaustive.is_none_or(|e| e == flow);
    let mut text = label.to_string();
    match exhaustive {
        Some(_) if !ok => text.push_str("\nexhaustive check disagrees FAIL"),
        Some(_) => {}
        None => text.push_str(&format!("\nexhaustive check skipped (more than {max_elems} elements)")),
    }
    let plan = transport_plan(a, b)?.map(|plan| {
        plan.iter()
            .map(|(i, j, w)| json!([a.poset().element(*i), a.poset().element(*j), fmt_q(w)]))
            .collect::<Vec<_>>()
    });
    let json = json!({
        "command": "compare",
        "first": first,
        "second": second,
        "verdict": label,
        "exhaustive": exhaustive.map(|(x, y)| json!([x, y])),
        "plan": plan,
        "ok": ok,
    });
    Ok(Outcome { ok, text, json })
}

pub fn cmd_fubini(ws: &Workspace, left: &str, right: &str, integrand: &str) -> Result<Outcome> {
    let nu = ws.valuation(left)?;
    let mu = ws.valuation(right)?;
    let h = ws.bi_integrand(integrand)?;
    let r = fubini_check(nu, mu, h)?;
    let ok = r.three_way();
    let text = format!("lhs: {}\nrhs: {}\njoint: {}\n{}", r.lhs, r.rhs, r.joint, verdict(ok));
    let json = json!({
        "command": "fubini",
        "lhs": qs(r.lhs.value()),
        "rhs": qs(r.rhs.value()),
        "joint": qs(r.joint.value()),
        "ok": ok,
    });
    Ok(Outcome { ok, text, json })
}

pub fn cmd_laws(seed: u64, trials: u64, max_elems: usize) -> Result<Outcome> {
    let r = check_monad_laws(trials, seed, max_elems.min(LAW_MAX_ELEMS))?;
    let line = |name: &str, t: &LawTally| format!("{name}: {}/{}", t.passed, t.total);
    let text = [
        line("left unit", &r.left_unit),
        line("right unit", &r.right_unit),
        line("associativity", &r.associativity),
    ]
    .join("\n");
    let ok = r.all_passed();
    let json = json!({ "command": "laws", "seed": seed, "trials": trials, "report": r, "ok": ok });
    Ok(Outcome { ok, text, json })
}

pub fn cmd_pushforward(ws: &Workspace, cdf: &str, stepmap: &str, max_elems: usize) -> Result<Outcome> {
    let cdf = ws.cdf(cdf)?;
    let map = ws.stepmap(stepmap)?;
    let pushed = pushforward(&cdf, map)?;
    let identity = if map.target().len() <= max_elems {
        Some(pushforward_mass_identity(&cdf, map, max_elems)?)
    } else {
        None
    };
    let ok = identity != Some(false);
    let check = match identity {
        Some(ok) => format!("mass on opens: {}", verdict(ok)),
        None => format!("mass on opens: skipped (more than {max_elems} elements)"),
    };
    let text = format!("{pushed}\n{check}");
    let json = json!({
        "command": "pushforward",
        "cdf": cdf.name(),
        "stepmap": stepmap,
        "valuation": valuation_json(&pushed),
        "mass_identity": identity,
        "ok": ok,
    });
    Ok(Outcome { ok, text, json })
}

pub fn cmd_eval(ws: &Workspace, program: &str) -> Result<Outcome> {
    let nu = lang::eval(ws.program(program)?)?;
    let text = format!("{nu}\nmass: {}", fmt_q(&nu.total_mass()));
    let json = json!({ "command": "eval", "program": program, "valuation": valuation_json(&nu), "ok": true });
    Ok(Outcome { ok: true, text, json })
}

pub fn cmd_equiv(ws: &Workspace, first: &str, second: &str, expect: Expect) -> Result<Outcome> {
    let a = lang::eval(ws.program(first)?)?;
    let b = lang::eval(ws.program(second)?)?;
    a.poset().ensure_same(b.poset())?;
    let equal = a == b;
    let ok = equal == (expect == Expect::Equal);
    let label = if equal { "EQUAL" } else { "DIFFERENT" };
    let text = format!("{first}: {a}\n{second}: {b}\n{label}");
    let json = json!({
        "command": "equiv",
        "first": valuation_json(&a),
        "second": valuation_json(&b),
        "equal": equal,
        "expected_equal": expect == Expect::Equal,
        "ok": ok,
    });
    Ok(Outcome { ok, text, json })
}

pub fn cmd_central(ws: &Workspace, valuation: &str, trials: u64, seed: u64) -> Result<Outcome> {
    let nu = ws.valuation(valuation)?;
    let r = central_falsifier(nu, trials, seed)?;
    let mut text = format!("falsified: {}\ntrials: {}", r.falsified, r.trials);
    if let Some(w) = &r.witness {
        text.push_str(&format!("\nwitness at trial {}: {} != {}", w.trial, w.lhs, w.rhs));
    }
    let json = json!({
        "command": "central",
        "valuation": valuation,
        "seed": seed,
        "trials": r.trials,
        "falsified": r.falsified,
        "witness": r.witness.as_ref().map(witness_json),
        "ok": !r.falsified,
    });
    Ok(Outcome { ok: !r.falsified, text, json })
}

pub fn cmd_suite(seed: u64, quick: bool) -> Result<Outcome> {
    let budget = if quick { Budget::QUICK } else { Budget::FULL };
    let reports = suite::run_all(seed, &budget)?;
    let ok = reports.iter().all(|r| r.passed);
    let text = reports
        .iter()
        .map(|r| {
            let status = if r.passed { "PASS" } else { "FAIL" };
            format!("[{status}] {}. {} ({} checked, {} failed)", r.id, r.name, r.checked, r.failures)
        })
        .collect::<Vec<_>>()
        .join("\n");
    let json = json!({ "command": "suite", "seed": seed, "quick": quick, "criteria": reports, "ok": ok });
    Ok(Outcome { ok, text, json })
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Result<Outcome> {
    let ws = || Workspace::load(&cli.workspace);
    match &cli.command {
        Command::Integrate { valuation, integrand } => cmd_integrate(&ws()?, valuation, integrand),
        Command::Compare { first, second } => cmd_compare(&ws()?, first, second, cli.max_elems),
        Command::Fubini { left, right, integrand } => cmd_fubini(&ws()?, left, right, integrand),
        Command::Laws => cmd_laws(cli.seed, cli.trials, cli.max_elems),
        Command::Pushforward { cdf, stepmap } => cmd_pushforward(&ws()?, cdf, stepmap, cli.max_elems),
        Command::Eval { program } => cmd_eval(&ws()?, program),
        Command::Equiv { first, second, expect } => cmd_equiv(&ws()?, first, second, *expect),
        Command::Central { valuation } => cmd_central(&ws()?, valuation, cli.trials, cli.seed),
        Command::Suite { quick } => cmd_suite(cli.seed, *quick),
    }
}

/// Prints the outcome of `cli` and returns the process exit code.
pub fn main_with(cli: &Cli) -> i32 {
    match run(cli) {
        Ok(outcome) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&outcome.json).expect("reports serialize"));
            } else {
                println!("{}", outcome.text);
            }
            if outcome.ok {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
