//! Job orchestration behind the `wach` binary.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use wach_core::io::{
    fl_to_file, parse_module_file, reduction_to_file, series_matrix_to_strings, to_json_string, wach_to_file,
    ContextCache, Module, ModuleFile, ProfileOverrides,
};
use wach_core::reduction::{normalize_basis, normalize_residual, recover_filtration, roundtrip_check};
use wach_core::suite::generate_suite;
use wach_core::wach::{tensor_wach, verify_wach_axioms, wach_functor, WachModule};
use wach_core::{validate_fl, CycloContext, Error, Report, TruncationProfile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;
pub const EXIT_AXIOM: i32 = 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Command {
    Build { input: PathBuf },
    Verify { input: PathBuf },
    Reduce { input: PathBuf, h_max: Option<u32> },
    Tensor { left: PathBuf, right: PathBuf },
    Normalize { input: PathBuf, target: PathBuf },
    Roundtrip { input: Option<PathBuf>, suite: bool, count: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JobSpec {
    pub command: Command,
    pub overrides: ProfileOverrides,
    pub max_iter: Option<usize>,
    pub seed: u64,
}

/// Exit code and the JSON document to emit (empty on errors).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub output: String,
    pub error: Option<String>,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Schema(_) => EXIT_PARSE,
        Error::NoConvergence { .. } | Error::NotDivisible(_) => EXIT_CONVERGENCE,
        Error::AxiomViolation(_) | Error::NotCongruent | Error::PrecisionExhausted(_) => EXIT_AXIOM,
        _ => EXIT_VALIDATION,
    }
}

fn check_overrides(o: &ProfileOverrides) -> Result<(), Error> {
    if o.n == Some(0) {
        return Err(Error::InvalidInput("precision N must be positive".into()));
    }
    let n = o.n.unwrap_or(TruncationProfile::DEFAULT_N) as usize;
    if let Some(m) = o.m_pi0 {
        if m < n {
            return Err(Error::InvalidInput(format!("M_pi0 = {m} must be at least N = {n}")));
        }
    } else if n > TruncationProfile::DEFAULT_M_PI0 {
        return Err(Error::InvalidInput(format!(
            "N = {n} exceeds the default M_pi0 = {}; pass --prec-pi0",
            TruncationProfile::DEFAULT_M_PI0
        )));
    }
    Ok(())
}

struct Runner {
    cache: ContextCache,
    overrides: ProfileOverrides,
    max_iter: Option<usize>,
    seed: u64,
}

enum Output {
    Doc(String),
    Report(Report),
    /// A document whose embedded report decides the exit code.
    DocWithStatus(String, bool),
}

impl Runner {
    fn load(&mut self, path: &Path) -> Result<Module, Error> {
        parse_module_file(path, &self.overrides, &mut self.cache)
    }

    fn context_for(&mut self, m: &wach_core::FLModule) -> Result<Arc<CycloContext>, Error> {
        self.cache.for_fl(m, &self.overrides)
    }

    fn as_wach(&mut self, module: Module) -> Result<WachModule, Error> {
        match module {
            Module::Wach(w) => Ok(w),
            Module::Fl(m) => {
                let ctx = self.context_for(&m)?;
                wach_functor(&m, &ctx, self.max_iter)
            }
        }
    }

    fn run(&mut self, command: &Command) -> Result<Output, Error> {
        match command {
            Command::Build { input } => match self.load(input)? {
                Module::Fl(m) => {
                    let ctx = self.context_for(&m)?;
                    let w = wach_functor(&m, &ctx, self.max_iter)?;
                    Ok(Output::Doc(to_json_string(&ModuleFile::Wach(wach_to_file(&w)))))
                }
                Module::Wach(_) => Err(Error::InvalidInput("build expects an FL module".into())),
            },
            Command::Verify { input } => match self.load(input)? {
                Module::Fl(m) => Ok(Output::Report(validate_fl(&m))),
                Module::Wach(w) => Ok(Output::Report(verify_wach_axioms(&w))),
            },
            Command::Reduce { input, h_max } => {
                let module = self.load(input)?;
                let w = self.as_wach(module)?;
                let h = h_max.unwrap_or_else(|| w.h());
                let fr = recover_filtration(&w, h)?;
                Ok(Output::Doc(to_json_string(&reduction_to_file(w.ctx.p(), &fr))))
            }
            Command::Tensor { left, right } => {
                let l = self.load(left)?;
                let r = self.load(right)?;
                let (l, r) = (self.as_wach(l)?, self.as_wach(r)?);
                let t = tensor_wach(&l, &r)?;
                Ok(Output::Doc(to_json_string(&ModuleFile::Wach(wach_to_file(&t)))))
            }
            Command::Normalize { input, target } => {
                let Module::Wach(w) = self.load(input)? else {
                    return Err(Error::InvalidInput("normalize expects a Wach module as input".into()));
                };
                // the target adopts the precision of the module unless overridden
                let saved = self.overrides.clone();
                self.overrides.n = saved.n.or(Some(w.ctx.ring().precision()));
                self.overrides.m_pi0 = saved.m_pi0.or(Some(w.ctx.m_pi0()));
                let target = self.load(target);
                self.overrides = saved;
                let Module::Fl(m) = target? else {
                    return Err(Error::InvalidInput("normalize expects an FL module as target".into()));
                };
                let (p, iterations) = normalize_basis(&w.c, &m, &w.ctx, self.max_iter)?;
                let residual = normalize_residual(&w.c, &p, &m, &w.ctx)?;
                let mut report = Report { seed: None, ..Report::default() };
                report.push("normalize_residual", residual.is_zero(), format!("{iterations} iterations"));
                let pass = report.pass();
                let doc = BasisChange {
                    kind: "basis_change",
                    p: w.ctx.p(),
                    n: w.ctx.ring().precision(),
                    m_pi0: w.ctx.m_pi0(),
                    iterations,
                    basis_change: series_matrix_to_strings(&p),
                    report,
                };
                Ok(Output::DocWithStatus(to_json_string(&doc), pass))
            }
            Command::Roundtrip { input, suite, count } => {
                let modules = match (input, suite) {
                    (Some(path), false) => match self.load(path)? {
                        Module::Fl(m) => vec![m],
                        Module::Wach(_) => {
                            return Err(Error::InvalidInput("roundtrip expects an FL module".into()))
                        }
                    },
                    (None, true) => {
                        let n = self.overrides.n.unwrap_or(TruncationProfile::DEFAULT_N);
                        generate_suite(self.seed, *count, n)
                    }
                    _ => return Err(Error::InvalidInput("give either an input file or --suite".into())),
                };
                let mut report = Report { seed: Some(self.seed), ..Report::default() };
                for (k, m) in modules.iter().enumerate() {
                    let ctx = self.context_for(m)?;
                    let r = roundtrip_check(m, &ctx, self.seed.wrapping_add(k as u64));
                    let detail = if r.pass() {
                        format!("p={} weights={:?}", m.p(), m.weights)
                    } else {
                        r.failures().join("; ")
                    };
                    report.push(format!("module_{k}"), r.pass(), detail);
                }
                Ok(Output::Report(report))
            }
        }
    }
}

#[derive(serde::Serialize)]
struct BasisChange {
    kind: &'static str,
    p: u64,
    #[serde(rename = "N")]
    n: u32,
    #[serde(rename = "M_pi0")]
    m_pi0: usize,
    iterations: usize,
    #[serde(rename = "P")]
    basis_change: Vec<Vec<Vec<String>>>,
    report: Report,
}

pub fn execute(job: &JobSpec) -> Outcome {
    if let Err(e) = check_overrides(&job.overrides) {
        return Outcome { code: exit_code(&e), output: String::new(), error: Some(e.to_string()) };
    }
    let mut runner = Runner {
        cache: ContextCache::new(),
        overrides: job.overrides.clone(),
        max_iter: job.max_iter,
        seed: job.seed,
    };
    match runner.run(&job.command) {
        Ok(Output::Doc(s)) => Outcome { code: EXIT_OK, output: s, error: None },
        Ok(Output::DocWithStatus(s, pass)) => Outcome { code: if pass { EXIT_OK } else { EXIT_AXIOM }, output: s, error: None },
        Ok(Output::Report(mut r)) => {
            if matches!(job.command, Command::Roundtrip { .. }) {
                r.seed = Some(job.seed);
            }
            let code = if r.pass() { EXIT_OK } else { EXIT_AXIOM };
            let error = (!r.pass()).then(|| format!("failing checks: {}", r.failures().join("; ")));
            Outcome { code, output: to_json_string(&r), error }
        }
        Err(e) => Outcome { code: exit_code(&e), output: String::new(), error: Some(e.to_string()) },
    }
}

/// FL module JSON, used by tests and examples.
pub fn fl_json(m: &wach_core::FLModule) -> String {
    to_json_string(&ModuleFile::Fl(fl_to_file(m)))
}
