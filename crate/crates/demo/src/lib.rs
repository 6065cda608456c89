//! Browser bindings for three operations: push-forward of a CDF along a step
//! map, the Choquet integral with its threshold staircase, and program
//! evaluation.
//!
//! Each operation takes a workspace document in the text formats of the
//! `valuations` crate and returns a JSON string. Failures are reported as
//! `{"error": "..."}` rather than thrown, so the page only handles one shape.

use serde_json::{json, Value};
use wasm_bindgen::prelude::wasm_bindgen;

use valuations::formats::{json_q, valuation_json};
use valuations::integration::{integrate, integrate_riemann_oracle, threshold_profile};
use valuations::interval::pushforward as push;
use valuations::rational::q;
use valuations::{Result, Workspace};

pub fn pushforward_report(document: &str, cdf: &str, stepmap: &str) -> Result<Value> {
    let ws = Workspace::from_text(document)?;
    let cdf = ws.cdf(cdf)?;
    let map = ws.stepmap(stepmap)?;
    let pushed = push(&cdf, map)?;
    let denom = 1i64 << map.level();
    let cells: Vec<Value> = map
        .cells()
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let (from, to) = (q(k as i64, denom), q(k as i64 + 1, denom));
            let mass = cdf.mass_half_open(&from, &to, k + 1 == map.cells().len());
            json!({ "from": json_q(&from), "to": json_q(&to), "element": map.target().element(c), "mass": json_q(&mass) })
        })
        .collect();
    let points: Vec<Value> = cdf.points().iter().map(|(x, l, r)| json!([json_q(x), json_q(l), json_q(r)])).collect();
    Ok(json!({
        "valuation": valuation_json(&pushed),
        "text": pushed.to_string(),
        "cells": cells,
        "cdf": points,
        "elements": map.target().elements(),
    }))
}

pub fn choquet_report(document: &str, valuation: &str, integrand: &str) -> Result<Value> {
    let ws = Workspace::from_text(document)?;
    let nu = ws.valuation(valuation)?;
    let h = ws.integrand(integrand)?;
    let closed = integrate(h, nu)?;
    let oracle = integrate_riemann_oracle(h, nu)?;
    let steps: Vec<Value> = threshold_profile(h, nu)?
        .iter()
        .map(|s| json!({ "from": json_q(&s.from), "to": json_q(&s.to), "mass": json_q(&s.mass) }))
        .collect();
    Ok(json!({
        "closed_form": json_q(closed.value()),
        "oracle": json_q(oracle.value()),
        "equal": closed == oracle,
        "steps": steps,
    }))
}

pub fn eval_report(document: &str, program: &str) -> Result<Value> {
    let mut ws = Workspace::from_text(document)?;
    ws.add_program("main", program)?;
    let nu = valuations::lang::eval(ws.program("main")?)?;
    Ok(json!({ "valuation": valuation_json(&nu), "text": nu.to_string() }))
}

fn respond(result: Result<Value>) -> String {
    match result {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

#[wasm_bindgen]
pub fn pushforward(document: &str, cdf: &str, stepmap: &str) -> String {
    respond(pushforward_report(document, cdf, stepmap))
}

#[wasm_bindgen]
pub fn choquet(document: &str, valuation: &str, integrand: &str) -> String {
    respond(choquet_report(document, valuation, integrand))
}

#[wasm_bindgen]
pub fn eval(document: &str, program: &str) -> String {
    respond(eval_report(document, program))
}
