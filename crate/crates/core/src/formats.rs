//! Line-based text formats.
//!
//! A document is a sequence of blocks. Each block opens with a header line
//! and continues with body lines until the next header. `#` starts a
//! comment; blank lines are ignored. Rationals are written `p/q` (or as
//! integers); decimals are rejected.
//!
//! ```text
//! poset C2
//! elem a
//! elem b
//! cover a b
//!
//! valuation nu on C2
//! atom a 1/2
//! atom b 1/4
//!
//! integrand h on C2
//! val a 1/3
//! val b 1
//!
//! biintegrand g on C2 C2
//! val a a 0
//! ...
//!
//! cdf skew
//! point 0 0 1/4
//! point 1 1 1
//!
//! stepmap split level 1 on C2
//! cells a b
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::integration::Integrand;
use crate::interval::{Cdf, StepMap};
use crate::monad::BiIntegrand;
use crate::poset::{FinitePoset, PosetRef};
use crate::rational::{fmt_q, parse_q, Q};
use crate::valuation::{make_simple, SimpleValuation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Line {
    pub number: usize,
    pub words: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub header: Line,
    pub body: Vec<Line>,
}

impl Block {
    pub fn kind(&self) -> &str {
        &self.header.words[0]
    }

    /// Name given right after the kind keyword.
    pub fn name(&self) -> Result<&str> {
        self.header
            .words
            .get(1)
            .map(String::as_str)
            .ok_or_else(|| syntax(self.header.number, format!("`{}` needs a name", self.kind())))
    }
}

pub const HEADERS: [&str; 6] = ["poset", "valuation", "integrand", "biintegrand", "cdf", "stepmap"];

fn syntax(line: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { line, col: 1, msg: msg.into() }
}

/// Splits a document into blocks.
pub fn blocks(text: &str) -> Result<Vec<Block>> {
    let mut out: Vec<Block> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("");
        let words: Vec<String> = content.split_whitespace().map(str::to_string).collect();
        if words.is_empty() {
            continue;
        }
        let line = Line { number: k + 1, words };
        if HEADERS.contains(&line.words[0].as_str()) {
            out.push(Block { header: line, body: Vec::new() });
        } else if let Some(block) = out.last_mut() {
            block.body.push(line);
        } else {
            return Err(syntax(k + 1, format!("`{}` outside of any block", line.words[0])));
        }
    }
    Ok(out)
}

fn rational_at(line: &Line, idx: usize) -> Result<Q> {
    let text = line
        .words
        .get(idx)
        .ok_or_else(|| syntax(line.number, "missing rational"))?;
    parse_q(text).map_err(|_| syntax(line.number, format!("invalid rational `{text}` (write p/q)")))
}

fn expect_arity(line: &Line, keyword: &str, arity: usize) -> Result<()> {
    if line.words[0] != keyword {
        return Err(syntax(line.number, format!("expected `{keyword}`, found `{}`", line.words[0])));
    }
    if line.words.len() != arity + 1 {
        return Err(syntax(line.number, format!("`{keyword}` takes {arity} arguments")));
    }
    Ok(())
}

/// `on <poset>` at header positions 2 and 3.
fn on_poset<'a>(block: &Block, posets: &'a BTreeMap<String, PosetRef>) -> Result<&'a PosetRef> {
    let h = &block.header;
    if h.words.len() != 4 || h.words[2] != "on" {
        return Err(syntax(h.number, format!("expected `{} <name> on <poset>`", block.kind())));
    }
    lookup_poset(posets, &h.words[3])
}

fn lookup_poset<'a>(posets: &'a BTreeMap<String, PosetRef>, name: &str) -> Result<&'a PosetRef> {
    posets
        .get(name)
        .ok_or_else(|| Error::NameNotFound { kind: "poset", name: name.to_string() })
}

pub fn poset_from_block(block: &Block) -> Result<FinitePoset> {
    let name = block.name()?;
    let mut elems = Vec::new();
    let mut covers = Vec::new();
    for line in &block.body {
        match line.words[0].as_str() {
            "elem" => {
                expect_arity(line, "elem", 1)?;
                elems.push(line.words[1].clone());
            }
            "cover" => {
                expect_arity(line, "cover", 2)?;
                covers.push((line.words[1].clone(), line.words[2].clone()));
            }
            other => return Err(syntax(line.number, format!("unexpected `{other}` in poset"))),
        }
    }
    FinitePoset::build(name, &elems, &covers)
}

pub fn valuation_from_block(block: &Block, posets: &BTreeMap<String, PosetRef>) -> Result<(String, SimpleValuation)> {
    let poset = on_poset(block, posets)?;
    let atoms = block
        .body
        .iter()
        .map(|line| {
            expect_arity(line, "atom", 2)?;
            Ok((line.words[1].as_str(), rational_at(line, 2)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((block.name()?.to_string(), make_simple(poset, &atoms)?))
}

pub fn integrand_from_block(block: &Block, posets: &BTreeMap<String, PosetRef>) -> Result<(String, Integrand)> {
    let poset = on_poset(block, posets)?;
    let values = block
        .body
        .iter()
        .map(|line| {
            expect_arity(line, "val", 2)?;
            Ok((line.words[1].as_str(), rational_at(line, 2)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((block.name()?.to_string(), Integrand::from_ids(poset, &values)?))
}

pub fn bi_integrand_from_block(block: &Block, posets: &BTreeMap<String, PosetRef>) -> Result<(String, BiIntegrand)> {
    let h = &block.header;
    if h.words.len() != 5 || h.words[2] != "on" {
        return Err(syntax(h.number, "expected `biintegrand <name> on <left> <right>`"));
    }
    let left = lookup_poset(posets, &h.words[3])?;
    let right = lookup_poset(posets, &h.words[4])?;
    let mut table: Vec<Vec<Option<Q>>> = vec![vec![None; right.len()]; left.len()];
    for line in &block.body {
        expect_arity(line, "val", 3)?;
        let x = left.index_of(&line.words[1])?;
        let y = right.index_of(&line.words[2])?;
        table[x][y] = Some(rational_at(line, 3)?);
    }
    let values = table
        .into_iter()
        .enumerate()
        .map(|(x, row)| {
            row.into_iter()
                .enumerate()
                .map(|(y, v)| {
                    v.ok_or_else(|| {
                        Error::NotMonotone(format!("no value for ({}, {})", left.element(x), right.element(y)))
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((block.name()?.to_string(), BiIntegrand::new(left, right, values)?))
}

pub fn cdf_from_block(block: &Block) -> Result<Cdf> {
    let points = block
        .body
        .iter()
        .map(|line| {
            expect_arity(line, "point", 3)?;
            Ok((rational_at(line, 1)?, rational_at(line, 2)?, rational_at(line, 3)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Cdf::new(block.name()?, points)
}

pub fn stepmap_from_block(block: &Block, posets: &BTreeMap<String, PosetRef>) -> Result<StepMap> {
    let h = &block.header;
    if h.words.len() != 6 || h.words[2] != "level" || h.words[4] != "on" {
        return Err(syntax(h.number, "expected `stepmap <name> level <m> on <poset>`"));
    }
    let level: u32 = h.words[3]
        .parse()
        .map_err(|_| syntax(h.number, format!("invalid level `{}`", h.words[3])))?;
    let poset = lookup_poset(posets, &h.words[5])?;
    let mut ids: Vec<&str> = Vec::new();
    for line in &block.body {
        if line.words[0] != "cells" {
            return Err(syntax(line.number, format!("unexpected `{}` in stepmap", line.words[0])));
        }
        ids.extend(line.words[1..].iter().map(String::as_str));
    }
    StepMap::from_ids(block.name()?, poset, level, &ids)
}

pub fn write_poset(poset: &FinitePoset) -> String {
    let mut out = format!("poset {}\n", poset.name());
    for e in poset.elements() {
        let _ = writeln!(out, "elem {e}");
    }
    for (i, j) in poset.covers() {
        let _ = writeln!(out, "cover {} {}", poset.element(i), poset.element(j));
    }
    out
}

pub fn write_valuation(name: &str, nu: &SimpleValuation) -> String {
    let mut out = format!("valuation {name} on {}\n", nu.poset().name());
    for (i, w) in nu.atoms() {
        let _ = writeln!(out, "atom {} {}", nu.poset().element(i), fmt_q(w));
    }
    out
}

pub fn write_integrand(name: &str, h: &Integrand) -> String {
    let mut out = format!("integrand {name} on {}\n", h.poset().name());
    for (i, v) in h.values().iter().enumerate() {
        let _ = writeln!(out, "val {} {}", h.poset().element(i), fmt_q(v));
    }
    out
}

pub fn write_bi_integrand(name: &str, h: &BiIntegrand) -> String {
    let (left, right) = (h.space().left(), h.space().right());
    let mut out = format!("biintegrand {name} on {} {}\n", left.name(), right.name());
    for x in 0..left.len() {
        for y in 0..right.len() {
            let _ = writeln!(out, "val {} {} {}", left.element(x), right.element(y), fmt_q(h.value(x, y)));
        }
    }
    out
}

pub fn write_cdf(cdf: &Cdf) -> String {
    let mut out = format!("cdf {}\n", cdf.name());
    for (x, l, r) in cdf.points() {
        let _ = writeln!(out, "point {} {} {}", fmt_q(x), fmt_q(l), fmt_q(r));
    }
    out
}

pub fn write_stepmap(map: &StepMap) -> String {
    let ids: Vec<&str> = map.cells().iter().map(|&c| map.target().element(c)).collect();
    format!(
        "stepmap {} level {} on {}\ncells {}\n",
        map.name(),
        map.level(),
        map.target().name(),
        ids.join(" ")
    )
}

/// A rational as a `"p/q"` JSON string.
pub fn json_q(x: &Q) -> Value {
    Value::String(fmt_q(x))
}

/// `{"poset": …, "atoms": [[element, "p/q"], …], "mass": "p/q"}` with atoms
/// in element order.
pub fn valuation_json(nu: &SimpleValuation) -> Value {
    let atoms: Vec<Value> = nu.atoms().map(|(i, w)| json!([nu.poset().element(i), fmt_q(w)])).collect();
    json!({ "poset": nu.poset().name(), "atoms": atoms, "mass": json_q(&nu.total_mass()) })
}
