//! JSON encodings of series, matrices, modules and reports.

use std::sync::Arc;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::cyclo::{build_context, CycloContext};
use crate::error::{Error, Result};
use crate::fl::{validate_fl, FLModule};
use crate::linalg::PMatrix;
use crate::padic::Zpn;
use crate::reduction::FilteredReduction;
use crate::series::{TruncSeries, TruncationProfile, Var};
use crate::smatrix::SeriesMatrix;
use crate::wach::WachModule;

/// Coefficients as decimal strings, trailing zeros trimmed.
pub fn series_to_json(f: &TruncSeries) -> serde_json::Value {
    let len = f.degree().map_or(0, |d| d + 1);
    serde_json::Value::Array(f.coeffs()[..len].iter().map(|c| c.to_string().into()).collect())
}

/// Parses a coefficient list, zero-padding it to `order`.
pub fn series_from_strings(var: Var, ring: Zpn, coeffs: &[String], order: usize) -> Result<TruncSeries> {
    if coeffs.len() > order {
        return Err(Error::Schema(format!("series has {} coefficients, order is {order}", coeffs.len())));
    }
    let mut out = Vec::with_capacity(order);
    for c in coeffs {
        out.push(ring.parse_decimal(c)?);
    }
    out.resize(order, 0);
    Ok(TruncSeries::from_coeffs(var, ring, out))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// A list of named checks; passes when every check does.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn push(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), pass, detail: detail.into() });
    }

    pub fn extend(&mut self, prefix: &str, other: Report) {
        for c in other.checks {
            self.checks.push(Check { name: format!("{prefix}{}", c.name), ..c });
        }
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> Vec<String> {
        self.checks.iter().filter(|c| !c.pass).map(|c| format!("{}: {}", c.name, c.detail)).collect()
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlFile {
    pub p: u64,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    pub weights: Vec<u32>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WachMeta {
    pub weights: Vec<u32>,
    pub iterations_used: usize,
    #[serde(default, skip_serializing_if = "is_false")]
    pub c_exact: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WachFile {
    pub p: u64,
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(rename = "M_pi0")]
    pub m_pi0: usize,
    pub chi_gamma: String,
    #[serde(rename = "C")]
    pub c: Vec<Vec<Vec<String>>>,
    #[serde(rename = "G")]
    pub g: Vec<Vec<Vec<String>>>,
    pub meta: WachMeta,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ModuleFile {
    #[serde(rename = "fl")]
    Fl(FlFile),
    #[serde(rename = "wach")]
    Wach(WachFile),
}

#[derive(Clone, Debug, Serialize)]
pub struct ReductionFile {
    pub kind: &'static str,
    pub p: u64,
    pub precision: u32,
    pub d: usize,
    pub fil_ranks: Vec<usize>,
    pub weights: Vec<u32>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<String>>,
    pub basis: Vec<Vec<String>>,
    pub fil_generators: Vec<Vec<Vec<String>>>,
}

/// Profile settings requested on the command line.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProfileOverrides {
    pub n: Option<u32>,
    pub m_pi0: Option<usize>,
    pub chi_gamma: Option<BigUint>,
}

/// A parsed module. Wach modules carry the context they were built over.
#[derive(Clone, Debug)]
pub enum Module {
    Fl(FLModule),
    Wach(WachModule),
}

pub fn matrix_to_strings(a: &PMatrix) -> Vec<Vec<String>> {
    a.to_rows().into_iter().map(|r| r.into_iter().map(|c| c.to_string()).collect()).collect()
}

pub fn matrix_from_strings(ring: Zpn, rows: &[Vec<String>], d: usize, what: &str) -> Result<PMatrix> {
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(Error::Schema(format!("field `{what}` must be a {d}x{d} matrix")));
    }
    let mut m = PMatrix::zeros(ring, d, d);
    for (i, row) in rows.iter().enumerate() {
        for (j, s) in row.iter().enumerate() {
            m.set(i, j, ring.parse_decimal(s).map_err(|e| Error::Schema(format!("{what}[{i}][{j}]: {e}")))?);
        }
    }
    Ok(m)
}

fn series_to_strings(f: &TruncSeries) -> Vec<String> {
    let len = f.degree().map_or(0, |d| d + 1);
    f.coeffs()[..len].iter().map(|c| c.to_string()).collect()
}

pub fn series_matrix_to_strings(m: &SeriesMatrix) -> Vec<Vec<Vec<String>>> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| series_to_strings(m.get(i, j))).collect()).collect()
}

fn series_matrix_from_strings(ring: Zpn, order: usize, rows: &[Vec<Vec<String>>], d: usize, what: &str) -> Result<SeriesMatrix> {
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(Error::Schema(format!("field `{what}` must be a {d}x{d} matrix of series")));
    }
    let mut entries = Vec::with_capacity(d * d);
    for (i, row) in rows.iter().enumerate() {
        for (j, s) in row.iter().enumerate() {
            entries.push(
                series_from_strings(Var::Pi0, ring, s, order).map_err(|e| Error::Schema(format!("{what}[{i}][{j}]: {e}")))?,
            );
        }
    }
    SeriesMatrix::from_entries(Var::Pi0, ring, d, d, entries)
}

pub fn fl_to_file(m: &FLModule) -> FlFile {
    let default_labels = m.labels.iter().enumerate().all(|(k, l)| *l == format!("e{}", m.input_order[k] + 1));
    FlFile {
        p: m.p(),
        n: Some(m.ring().precision()),
        weights: m.weights.clone(),
        a: matrix_to_strings(&m.a),
        labels: if default_labels { None } else { Some(m.labels.clone()) },
    }
}

pub fn wach_to_file(w: &WachModule) -> WachFile {
    WachFile {
        p: w.ctx.p(),
        n: w.ctx.ring().precision(),
        m_pi0: w.ctx.m_pi0(),
        chi_gamma: w.ctx.chi_gamma().to_string(),
        c: series_matrix_to_strings(&w.c),
        g: series_matrix_to_strings(&w.g),
        meta: WachMeta { weights: w.weights.clone(), iterations_used: w.iterations_used, c_exact: w.c_exact },
    }
}

pub fn reduction_to_file(p: u64, fr: &FilteredReduction) -> ReductionFile {
    ReductionFile {
        kind: "reduction",
        p,
        precision: fr.precision(),
        d: fr.d,
        fil_ranks: fr.fil_ranks.clone(),
        weights: fr.weights_recovered.clone(),
        a: matrix_to_strings(&fr.a_recovered),
        basis: matrix_to_strings(&fr.basis),
        fil_generators: fr.fil_generators.iter().map(matrix_to_strings).collect(),
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn parse_chi(s: &str) -> Result<BigUint> {
    let t = s.trim();
    if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Schema(format!("chi_gamma \"{s}\" is not a non-negative decimal integer")));
    }
    BigUint::parse_bytes(t.as_bytes(), 10).ok_or_else(|| Error::Schema(format!("bad chi_gamma \"{s}\"")))
}

/// Builds contexts on demand and reuses them across modules with the same profile.
#[derive(Default)]
pub struct ContextCache {
    entries: Vec<Arc<CycloContext>>,
}

impl ContextCache {
    pub fn new() -> Self {
        ContextCache::default()
    }

    pub fn get(&mut self, p: u64, n: u32, m_pi0: usize, chi: &BigUint) -> Result<Arc<CycloContext>> {
        let profile = TruncationProfile::new(p, n, m_pi0)?;
        if let Some(c) = self.entries.iter().find(|c| c.profile == profile && c.chi_gamma() == chi) {
            return Ok(c.clone());
        }
        let ctx = Arc::new(build_context(p, n, m_pi0, chi)?);
        self.entries.push(ctx.clone());
        Ok(ctx)
    }

    /// Context for an FL module, honoring the overrides.
    pub fn for_fl(&mut self, m: &FLModule, o: &ProfileOverrides) -> Result<Arc<CycloContext>> {
        let p = m.p();
        let chi = o.chi_gamma.clone().unwrap_or_else(|| BigUint::from(1 + p));
        let m_pi0 = o.m_pi0.unwrap_or(TruncationProfile::DEFAULT_M_PI0);
        self.get(p, m.ring().precision(), m_pi0, &chi)
    }
}

pub fn fl_from_file(f: &FlFile, o: &ProfileOverrides) -> Result<FLModule> {
    let n = o.n.or(f.n).unwrap_or(TruncationProfile::DEFAULT_N);
    let ring = Zpn::new(f.p, n)?;
    let d = f.weights.len();
    let a = matrix_from_strings(ring, &f.a, d, "A")?;
    let m = match &f.labels {
        Some(l) => FLModule::with_labels(f.weights.clone(), a, l.clone())?,
        None => FLModule::new(f.weights.clone(), a)?,
    };
    let report = validate_fl(&m);
    if !report.pass() {
        return Err(Error::ValidationFailed(report.failures()));
    }
    Ok(m)
}

pub fn wach_from_file(f: &WachFile, o: &ProfileOverrides, cache: &mut ContextCache) -> Result<WachModule> {
    let chi = parse_chi(&f.chi_gamma)?;
    let conflicts = [
        o.n.is_some_and(|n| n != f.n),
        o.m_pi0.is_some_and(|m| m != f.m_pi0),
        o.chi_gamma.as_ref().is_some_and(|c| *c != chi),
    ];
    if conflicts.iter().any(|&c| c) {
        return Err(Error::ValidationFailed(vec!["profile flags conflict with the Wach module file".into()]));
    }
    let ctx = cache.get(f.p, f.n, f.m_pi0, &chi)?;
    let d = f.meta.weights.len();
    let ring = ctx.ring();
    Ok(WachModule {
        c: series_matrix_from_strings(ring, f.m_pi0, &f.c, d, "C")?,
        g: series_matrix_from_strings(ring, f.m_pi0, &f.g, d, "G")?,
        weights: f.meta.weights.clone(),
        source: None,
        iterations_used: f.meta.iterations_used,
        c_exact: f.meta.c_exact,
        ctx,
    })
}

pub fn parse_module_str(text: &str, o: &ProfileOverrides, cache: &mut ContextCache) -> Result<Module> {
    let file: ModuleFile = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    match file {
        ModuleFile::Fl(f) => Ok(Module::Fl(fl_from_file(&f, o)?)),
        ModuleFile::Wach(f) => Ok(Module::Wach(wach_from_file(&f, o, cache)?)),
    }
}

pub fn parse_module_file(path: &std::path::Path, o: &ProfileOverrides, cache: &mut ContextCache) -> Result<Module> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
    parse_module_str(&text, o, cache)
}
