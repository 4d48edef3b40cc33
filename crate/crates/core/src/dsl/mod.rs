//! Definition files.
//!
//! A file is a sequence of blocks. Each block opens with a `[kind name]`
//! header and continues with `key = value` lines; `#` starts a comment.
//! Names share one namespace and must be defined before use.
//!
//! ```text
//! [chart G]
//! vars = x, p
//! [form Omega]
//! chart = G
//! value = dx^dp
//! ```

mod suite;

pub use suite::{builtin_suites, run_suite, RunOptions, BUILTIN_SUITES};

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exterior::{parse_form_of_degree, parse_multivector_of_degree, Form, MultiVector, SmoothMap};
use crate::expr::{parse_expr, Chart, Expr, ParseScope};
use crate::groupoid::{power_chart, GroupoidPresentation};
use crate::jacobi::{contact_structure, ContactStructure, JacobiStructure, LcsStructure};
use crate::lcs::{ContactGroupoid, JacobiGroupoid, LcsGroupoid};

pub const BLOCK_KINDS: [&str; 8] = ["chart", "map", "form", "multivector", "scalar", "groupoid", "structure", "suite"];

/// One `key = value` line. `col` is the column of the first value character.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub kind: String,
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { line, col, msg: msg.into() }
}

/// Splits a file into blocks without interpreting values.
pub fn parse_blocks(text: &str) -> Result<Vec<Block>> {
    let mut blocks: Vec<Block> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("");
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = body.len() - body.trim_start().len();
        if let Some(rest) = trimmed.strip_prefix('[') {
            let inner = rest
                .strip_suffix(']')
                .ok_or_else(|| syntax(line, indent + trimmed.len() + 1, "expected `]` closing the block header"))?;
            let parts: Vec<&str> = inner.split_whitespace().collect();
            let [kind, name] = parts[..] else {
                return Err(syntax(line, indent + 2, "block header is `[kind name]`"));
            };
            if !BLOCK_KINDS.contains(&kind) {
                return Err(syntax(line, indent + 2, format!("unknown block kind `{kind}`")));
            }
            if !is_ident(name) {
                return Err(syntax(line, indent + 2, format!("bad block name `{name}`")));
            }
            blocks.push(Block { kind: kind.into(), name: name.into(), line, entries: Vec::new() });
            continue;
        }
        let Some(block) = blocks.last_mut() else {
            return Err(syntax(line, indent + 1, "`key = value` line outside a block"));
        };
        let eq = body.find('=').ok_or_else(|| syntax(line, indent + 1, "expected `key = value`"))?;
        let key = body[..eq].trim();
        if !key.split('.').all(is_ident) {
            return Err(syntax(line, indent + 1, format!("bad key `{key}`")));
        }
        if block.entries.iter().any(|e| e.key == key) {
            return Err(syntax(line, indent + 1, format!("duplicate key `{key}`")));
        }
        let after = &body[eq + 1..];
        let lead = after.len() - after.trim_start().len();
        let value = after.trim();
        if value.is_empty() {
            return Err(syntax(line, eq + 2, format!("empty value for `{key}`")));
        }
        block.entries.push(Entry { key: key.into(), value: value.into(), line, col: eq + 2 + lead });
    }
    Ok(blocks)
}

/// Comma-separated items with their starting columns.
fn split_list(e: &Entry) -> Vec<(String, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for part in e.value.split(',') {
        let lead = part.len() - part.trim_start().len();
        out.push((part.trim().to_string(), e.col + start + lead));
        start += part.len() + 1;
    }
    out
}

/// A checked object of a definition file.
#[derive(Debug, Clone)]
pub enum StructureKind {
    Lcs(LcsStructure),
    LcsGroupoid(LcsGroupoid),
    Contact(ContactStructure),
    ContactGroupoid(ContactGroupoid),
    Jacobi(JacobiStructure),
    JacobiGroupoid(JacobiGroupoid),
}

#[derive(Debug, Clone)]
pub struct Structure {
    pub name: String,
    pub kind: StructureKind,
}

impl Structure {
    pub fn groupoid(&self) -> Option<(&GroupoidPresentation, &Expr)> {
        match &self.kind {
            StructureKind::LcsGroupoid(d) => Some((&d.gp, &d.sigma)),
            StructureKind::ContactGroupoid(d) => Some((&d.gp, &d.sigma)),
            StructureKind::JacobiGroupoid(d) => Some((&d.gp, &d.sigma)),
            _ => None,
        }
    }

    /// The l.c.s. groupoid of the structure: itself, or the one built from
    /// a contact groupoid.
    pub fn lcs_groupoid(&self) -> Option<Result<LcsGroupoid>> {
        match &self.kind {
            StructureKind::LcsGroupoid(d) => Some(Ok(d.clone())),
            StructureKind::ContactGroupoid(c) => Some(crate::lcs::build_lcs_from_contact(c)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteDef {
    pub name: String,
    pub run: Vec<String>,
    /// Restricts the suite to these structures; all when `None`.
    pub structures: Option<Vec<String>>,
}

/// A resolved definition file.
#[derive(Debug, Clone, Default)]
pub struct Definitions {
    pub charts: BTreeMap<String, Arc<Chart>>,
    pub maps: BTreeMap<String, SmoothMap>,
    /// Scalars with the chart they live on.
    pub scalars: BTreeMap<String, (String, Expr)>,
    pub forms: BTreeMap<String, Form>,
    pub multivectors: BTreeMap<String, MultiVector>,
    pub groupoids: BTreeMap<String, GroupoidPresentation>,
    pub structures: Vec<Structure>,
    pub suites: Vec<SuiteDef>,
    names: Vec<String>,
}

fn def_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Definition(format!("line {line}: {msg}"))
}

struct Fields<'b> {
    block: &'b Block,
    used: Vec<&'b str>,
}

impl<'b> Fields<'b> {
    fn new(block: &'b Block) -> Self {
        Fields { block, used: Vec::new() }
    }

    fn opt(&mut self, key: &str) -> Option<&'b Entry> {
        let e = self.block.entries.iter().find(|e| e.key == key)?;
        self.used.push(&e.key);
        Some(e)
    }

    fn req(&mut self, key: &str) -> Result<&'b Entry> {
        self.opt(key).ok_or_else(|| {
            def_err(self.block.line, format!("{} `{}` needs `{key}`", self.block.kind, self.block.name))
        })
    }

    /// Keys matching `prefix.*`.
    fn prefixed(&mut self, prefix: &str) -> Vec<&'b Entry> {
        let out: Vec<&Entry> =
            self.block.entries.iter().filter(|e| e.key.strip_prefix(prefix).is_some_and(|r| r.starts_with('.'))).collect();
        self.used.extend(out.iter().map(|e| e.key.as_str()));
        out
    }

    fn finish(self) -> Result<()> {
        match self.block.entries.iter().find(|e| !self.used.contains(&e.key.as_str())) {
            Some(e) => Err(def_err(e.line, format!("unknown key `{}` in {} block", e.key, self.block.kind))),
            None => Ok(()),
        }
    }
}

fn parse_interval(e: &Entry) -> Result<(f64, f64)> {
    let items = split_list(e);
    let nums: Vec<f64> = items.iter().filter_map(|(s, _)| s.parse().ok()).collect();
    match nums[..] {
        [lo, hi] if items.len() == 2 => Ok((lo, hi)),
        _ => Err(def_err(e.line, format!("`{}` is `lo, hi`", e.key))),
    }
}

impl Definitions {
    fn claim(&mut self, b: &Block) -> Result<()> {
        if self.names.contains(&b.name) {
            return Err(def_err(b.line, format!("`{}` is already defined", b.name)));
        }
        self.names.push(b.name.clone());
        Ok(())
    }

    /// A defined chart, or `X^2` / `X^3` for a defined `X`.
    pub fn chart(&self, name: &str, line: usize) -> Result<Arc<Chart>> {
        if let Some(c) = self.charts.get(name) {
            return Ok(c.clone());
        }
        if let Some((base, k)) = name.rsplit_once('^') {
            if let (Some(c), Ok(k @ 2..=3)) = (self.charts.get(base.trim()), k.trim().parse::<usize>()) {
                return Ok(Arc::new(power_chart(c, k)?));
            }
        }
        Err(def_err(line, format!("unknown chart `{name}`")))
    }

    fn scope<'c>(&self, chart: &'c Chart, e: &Entry, col: usize) -> ParseScope<'c> {
        let scalars: HashMap<String, Expr> = self
            .scalars
            .iter()
            .filter(|(_, (c, _))| c == chart.name())
            .map(|(n, (_, x))| (n.clone(), x.clone()))
            .collect();
        ParseScope::new(chart).with_scalars(scalars).at(e.line, col)
    }

    fn expr(&self, chart: &Chart, e: &Entry) -> Result<Expr> {
        parse_expr(&e.value, &self.scope(chart, e, e.col))
    }

    fn form(&self, chart: &Arc<Chart>, e: &Entry, degree: usize) -> Result<Form> {
        if let Some(f) = self.forms.get(&e.value) {
            f.ensure_chart(chart).map_err(|err| def_err(e.line, err))?;
            if f.degree() != degree {
                return Err(def_err(e.line, format!("`{}` has degree {}, expected {degree}", e.value, f.degree())));
            }
            return Ok(f.clone());
        }
        parse_form_of_degree(&e.value, &self.scope(chart, e, e.col), chart.clone(), degree)
    }

    fn multivector(&self, chart: &Arc<Chart>, e: &Entry, degree: usize) -> Result<MultiVector> {
        if let Some(f) = self.multivectors.get(&e.value) {
            f.ensure_chart(chart).map_err(|err| def_err(e.line, err))?;
            if f.degree() != degree {
                return Err(def_err(e.line, format!("`{}` has degree {}, expected {degree}", e.value, f.degree())));
            }
            return Ok(f.clone());
        }
        parse_multivector_of_degree(&e.value, &self.scope(chart, e, e.col), chart.clone(), degree)
    }

    fn map(&self, e: &Entry) -> Result<SmoothMap> {
        self.maps.get(&e.value).cloned().ok_or_else(|| def_err(e.line, format!("unknown map `{}`", e.value)))
    }

    fn add_chart(&mut self, b: &Block) -> Result<()> {
        let mut f = Fields::new(b);
        let vars: Vec<String> = split_list(f.req("vars")?).into_iter().map(|(s, _)| s).collect();
        let default = match f.opt("box") {
            Some(e) => parse_interval(e)?,
            None => (-1.0, 1.0),
        };
        let mut bounds = vec![default; vars.len()];
        for e in f.prefixed("box") {
            let var = &e.key[4..];
            let i = vars.iter().position(|v| v == var).ok_or_else(|| def_err(e.line, format!("no variable `{var}`")))?;
            bounds[i] = parse_interval(e)?;
        }
        f.finish()?;
        let chart = Chart::with_bounds(b.name.clone(), vars, bounds).map_err(|e| def_err(b.line, e))?;
        self.charts.insert(b.name.clone(), Arc::new(chart));
        Ok(())
    }

    fn add_map(&mut self, b: &Block) -> Result<()> {
        let mut f = Fields::new(b);
        let from = f.req("from")?;
        let src = self.chart(&from.value, from.line)?;
        let to = f.req("to")?;
        let dst = self.chart(&to.value, to.line)?;
        let value = f.req("value")?;
        f.finish()?;
        let comps = split_list(value)
            .into_iter()
            .map(|(s, col)| parse_expr(&s, &self.scope(&src, value, col)))
            .collect::<Result<Vec<_>>>()?;
        let map = SmoothMap::new(src, dst, comps).map_err(|e| def_err(value.line, e))?;
        self.maps.insert(b.name.clone(), map);
        Ok(())
    }

    fn add_scalar(&mut self, b: &Block) -> Result<()> {
        let mut f = Fields::new(b);
        let c = f.req("chart")?;
        let chart = self.chart(&c.value, c.line)?;
        let e = self.expr(&chart, f.req("value")?)?;
        f.finish()?;
        self.scalars.insert(b.name.clone(), (chart.name().to_string(), e));
        Ok(())
    }

    fn degree(f: &mut Fields<'_>) -> Result<Option<usize>> {
        f.opt("degree").map(|e| e.value.parse().map_err(|_| def_err(e.line, "degree is a non-negative integer"))).transpose()
    }

    fn add_form(&mut self, b: &Block) -> Result<()> {
        let mut f = Fields::new(b);
        let c = f.req("chart")?;
        let chart = self.chart(&c.value, c.line)?;
        let value = f.req("value")?;
        let degree = Self::degree(&mut f)?;
        f.finish()?;
        let scope = self.scope(&chart, value, value.col);
        let form = match degree {
            Some(k) => parse_form_of_degree(&value.value, &scope, chart.clone(), k)?,
            None => crate::exterior::parse_form(&value.value, &scope, chart.clone())?,
        };
        self.forms.insert(b.name.clone(), form);
        Ok(())
    }

    fn add_multivector(&mut self, b: &Block) -> Result<()> {
        let mut f = Fields::new(b);
        let c = f.req("chart")?;
        let chart = self.chart(&c.value, c.line)?;
        let value = f.req("value")?;
        let degree = Self::degree(&mut f)?;
        f.finish()?;
        let scope = self.scope(&chart, value, value.col);
        let mv = match degree {
            Some(k) => parse_multivector_of_degree(&value.value, &scope, chart.clone(), k)?,
            None => crate::exterior::parse_multivector(&value.value, &scope, chart.clone())?,
        };
        self.multivectors.insert(b.name.clone(), mv);
        Ok(())
    }

    fn add_groupoid(&mut self, b: &Block) -> Result<()> {
        let mut f = Fields::new(b);
        let a = f.req("arrows")?;
        let g = self.chart(&a.value, a.line)?;
        let o = f.req("base")?;
        let m = self.chart(&o.value, o.line)?;
        let mut maps = Vec::new();
        for key in ["alpha", "beta", "unit", "inverse", "mult", "pairs", "triples"] {
            maps.push(self.map(f.req(key)?)?);
        }
        f.finish()?;
        let [alpha, beta, unit, inverse, mult, pairs, triples]: [SmoothMap; 7] = maps.try_into().expect("seven maps");
        let gp = GroupoidPresentation::new(b.name.clone(), g, m, alpha, beta, unit, inverse, mult, pairs, triples)
            .map_err(|e| def_err(b.line, e))?;
        self.groupoids.insert(b.name.clone(), gp);
        Ok(())
    }

    fn add_structure(&mut self, b: &Block) -> Result<()> {
        let mut f = Fields::new(b);
        let ty = f.req("type")?;
        let (gp, chart) = match (f.opt("groupoid"), f.opt("chart")) {
            (Some(e), None) => {
                let gp = self.groupoids.get(&e.value).ok_or_else(|| def_err(e.line, format!("unknown groupoid `{}`", e.value)))?;
                (Some(gp.clone()), gp.g.clone())
            }
            (None, Some(e)) => (None, self.chart(&e.value, e.line)?),
            _ => return Err(def_err(b.line, "a structure names exactly one of `groupoid` or `chart`")),
        };
        let sigma = match f.opt("sigma") {
            Some(e) if gp.is_none() => return Err(def_err(e.line, "`sigma` needs a groupoid")),
            Some(e) => self.expr(&chart, e)?,
            None => Expr::zero(),
        };
        let at = |e: Error| def_err(b.line, e);
        let kind = match (ty.value.as_str(), gp) {
            ("lcs", gp) => {
                let omega = self.form(&chart, f.req("omega")?, 2)?;
                let lee = match f.opt("lee") {
                    Some(e) => self.form(&chart, e, 1)?,
                    None => Form::zero(chart.clone(), 1),
                };
                let s = LcsStructure::new(omega, lee).map_err(at)?;
                match gp {
                    Some(gp) => StructureKind::LcsGroupoid(LcsGroupoid::new(gp, s, sigma).map_err(at)?),
                    None => StructureKind::Lcs(s),
                }
            }
            ("contact", gp) => {
                let eta = self.form(&chart, f.req("eta")?, 1)?;
                match gp {
                    Some(gp) => StructureKind::ContactGroupoid(ContactGroupoid::new(gp, &eta, sigma).map_err(at)?),
                    None => StructureKind::Contact(contact_structure(&eta).map_err(at)?),
                }
            }
            ("jacobi", gp) => {
                let lambda = self.multivector(&chart, f.req("lambda")?, 2)?;
                let e = match f.opt("e") {
                    Some(e) => self.multivector(&chart, e, 1)?,
                    None => MultiVector::zero(chart.clone(), 1),
                };
                let jacobi = JacobiStructure::new(lambda, e).map_err(at)?;
                match gp {
                    Some(gp) => StructureKind::JacobiGroupoid(JacobiGroupoid { gp, jacobi, sigma }),
                    None => StructureKind::Jacobi(jacobi),
                }
            }
            (other, _) => return Err(def_err(ty.line, format!("unknown structure type `{other}`"))),
        };
        f.finish()?;
        self.structures.push(Structure { name: b.name.clone(), kind });
        Ok(())
    }

    fn add_suite(&mut self, b: &Block) -> Result<()> {
        let mut f = Fields::new(b);
        let run: Vec<String> = split_list(f.req("run")?).into_iter().map(|(s, _)| s).collect();
        for r in &run {
            if !BUILTIN_SUITES.contains(&r.as_str()) {
                return Err(Error::UnknownSuite(r.clone()));
            }
        }
        let structures = f.opt("structures").map(|e| split_list(e).into_iter().map(|(s, _)| s).collect::<Vec<_>>());
        if let Some(names) = &structures {
            for n in names {
                if !self.structures.iter().any(|s| &s.name == n) {
                    return Err(def_err(b.line, format!("unknown structure `{n}`")));
                }
            }
        }
        f.finish()?;
        self.suites.push(SuiteDef { name: b.name.clone(), run, structures });
        Ok(())
    }
}

/// Parses and resolves a definition file.
pub fn load(text: &str) -> Result<Definitions> {
    let mut d = Definitions::default();
    for b in parse_blocks(text)? {
        d.claim(&b)?;
        match b.kind.as_str() {
            "chart" => d.add_chart(&b)?,
            "map" => d.add_map(&b)?,
            "scalar" => d.add_scalar(&b)?,
            "form" => d.add_form(&b)?,
            "multivector" => d.add_multivector(&b)?,
            "groupoid" => d.add_groupoid(&b)?,
            "structure" => d.add_structure(&b)?,
            "suite" => d.add_suite(&b)?,
            _ => unreachable!("kinds are checked by parse_blocks"),
        }
    }
    Ok(d)
}

/// Reads and resolves a definition file from disk.
pub fn load_file(path: &std::path::Path) -> Result<Definitions> {
    load(&std::fs::read_to_string(path)?)
}
