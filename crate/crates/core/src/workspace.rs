//! Named objects loaded from text documents or a workspace directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::formats::{self, Block};
use crate::integration::Integrand;
use crate::interval::{Cdf, StepMap};
use crate::lang::{self, Context, Program};
use crate::monad::BiIntegrand;
use crate::poset::PosetRef;
use crate::valuation::SimpleValuation;

#[derive(Debug, Clone, Default)]
pub struct Workspace {
    pub posets: BTreeMap<String, PosetRef>,
    pub valuations: BTreeMap<String, SimpleValuation>,
    pub integrands: BTreeMap<String, Integrand>,
    pub bi_integrands: BTreeMap<String, BiIntegrand>,
    pub cdfs: BTreeMap<String, Cdf>,
    pub stepmaps: BTreeMap<String, StepMap>,
    pub programs: BTreeMap<String, Program>,
}

const DATA_EXTENSIONS: [&str; 5] = ["poset", "val", "fn", "cdf", "step"];

fn insert_unique<T>(map: &mut BTreeMap<String, T>, kind: &str, name: String, value: T) -> Result<()> {
    if map.contains_key(&name) {
        return Err(Error::Resolution(format!("duplicate {kind} `{name}`")));
    }
    map.insert(name, value);
    Ok(())
}

fn lookup<'a, T>(map: &'a BTreeMap<String, T>, kind: &'static str, name: &str) -> Result<&'a T> {
    map.get(name).ok_or_else(|| Error::NameNotFound { kind, name: name.to_string() })
}

fn in_file(label: &str, err: Error) -> Error {
    match err {
        Error::Syntax { line, col, msg } => Error::Syntax { line, col, msg: format!("{label}: {msg}") },
        other => other,
    }
}

impl Workspace {
    /// Loads every recognised file in `dir`. Posets are read first, so the
    /// other blocks may refer to posets declared in any file.
    pub fn load(dir: &Path) -> Result<Self> {
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        paths.sort();
        let extension = |p: &Path| p.extension().and_then(|e| e.to_str()).unwrap_or("").to_string();

        let mut documents = Vec::new();
        for path in paths.iter().filter(|p| DATA_EXTENSIONS.contains(&extension(p).as_str())) {
            documents.push((path.display().to_string(), read(path)?));
        }
        let mut ws = Workspace::from_documents(&documents)?;
        for path in paths.iter().filter(|p| extension(p) == "prob") {
            let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
            ws.add_program(name, &read(path)?).map_err(|e| in_file(&path.display().to_string(), e))?;
        }
        Ok(ws)
    }

    /// Reads `(label, text)` documents; the label only annotates errors.
    pub fn from_documents<S: AsRef<str>>(documents: &[(S, S)]) -> Result<Self> {
        let mut parsed: Vec<(&str, Vec<Block>)> = Vec::new();
        for (label, text) in documents {
            let blocks = formats::blocks(text.as_ref()).map_err(|e| in_file(label.as_ref(), e))?;
            parsed.push((label.as_ref(), blocks));
        }
        let mut ws = Workspace::default();
        for (label, blocks) in &parsed {
            for block in blocks.iter().filter(|b| b.kind() == "poset") {
                let p = formats::poset_from_block(block).map_err(|e| in_file(label, e))?;
                insert_unique(&mut ws.posets, "poset", p.name().to_string(), p.into_ref())?;
            }
        }
        for (label, blocks) in &parsed {
            for block in blocks {
                ws.add_block(block).map_err(|e| in_file(label, e))?;
            }
        }
        Ok(ws)
    }

    /// A single document.
    pub fn from_text(text: &str) -> Result<Self> {
        Self::from_documents(&[("input", text)])
    }

    /// Parses `source` against the objects loaded so far.
    pub fn add_program(&mut self, name: &str, source: &str) -> Result<()> {
        let program = lang::parse(source, &self.context())?;
        insert_unique(&mut self.programs, "program", name.to_string(), program)
    }

    fn add_block(&mut self, block: &Block) -> Result<()> {
        match block.kind() {
            "valuation" => {
                let (name, v) = formats::valuation_from_block(block, &self.posets)?;
                insert_unique(&mut self.valuations, "valuation", name, v)
            }
            "integrand" => {
                let (name, h) = formats::integrand_from_block(block, &self.posets)?;
                insert_unique(&mut self.integrands, "integrand", name, h)
            }
            "biintegrand" => {
                let (name, h) = formats::bi_integrand_from_block(block, &self.posets)?;
                insert_unique(&mut self.bi_integrands, "biintegrand", name, h)
            }
            "cdf" => {
                let cdf = formats::cdf_from_block(block)?;
                insert_unique(&mut self.cdfs, "cdf", cdf.name().to_string(), cdf)
            }
            "stepmap" => {
                let map = formats::stepmap_from_block(block, &self.posets)?;
                insert_unique(&mut self.stepmaps, "stepmap", map.name().to_string(), map)
            }
            _ => Ok(()),
        }
    }

    /// The names a program may use without declaring them.
    pub fn context(&self) -> Context {
        Context { posets: self.posets.clone(), cdfs: self.cdfs.clone(), stepmaps: self.stepmaps.clone() }
    }

    pub fn valuation(&self, name: &str) -> Result<&SimpleValuation> {
        lookup(&self.valuations, "valuation", name)
    }

    pub fn integrand(&self, name: &str) -> Result<&Integrand> {
        lookup(&self.integrands, "integrand", name)
    }

    pub fn bi_integrand(&self, name: &str) -> Result<&BiIntegrand> {
        lookup(&self.bi_integrands, "biintegrand", name)
    }

    /// `lebesgue` resolves even when not declared.
    pub fn cdf(&self, name: &str) -> Result<Cdf> {
        self.context().cdf(name).ok_or_else(|| Error::NameNotFound { kind: "cdf", name: name.to_string() })
    }

    pub fn stepmap(&self, name: &str) -> Result<&StepMap> {
        lookup(&self.stepmaps, "stepmap", name)
    }

    pub fn program(&self, name: &str) -> Result<&Program> {
        lookup(&self.programs, "program", name)
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
