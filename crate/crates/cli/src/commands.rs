use std::io::Read;
use std::path::{Path, PathBuf};

use motive_core::experiments::{check_s_equals_t, invariance_experiment, n_of_m};
use motive_core::motive::{height, validate as validate_motive, HeightOptions, LatticeFormula, MotiveData};
use rayon::prelude::*;

use crate::document::{parse_motive, parse_spec, to_text, MotiveDocument};
use crate::error::{core_exit_code, CliError};
use crate::examples::example as build_example;
use crate::render;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Rows,
}

#[derive(Clone, Debug)]
pub struct Settings {
    pub precision: u32,
    pub window: Option<(i64, i64)>,
    pub format: Format,
    pub digits: usize,
    pub formula: LatticeFormula,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            precision: motive_core::ball::DEFAULT_PRECISION,
            window: None,
            format: Format::Text,
            digits: 30,
            formula: LatticeFormula::Windowed,
        }
    }
}

impl Settings {
    fn height_options(&self) -> HeightOptions {
        HeightOptions { precision: self.precision, formula: self.formula }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Outcome {
        Outcome { stdout, stderr: String::new(), code: 0 }
    }

    fn failed(e: &CliError) -> Outcome {
        Outcome { stdout: String::new(), stderr: format!("error: {e}\n"), code: e.exit_code() }
    }
}

fn finish(r: Result<Outcome, CliError>) -> Outcome {
    r.unwrap_or_else(|e| Outcome::failed(&e))
}

pub fn read_input(path: &Path) -> Result<String, CliError> {
    let io = |e: std::io::Error| CliError::Io { path: path.display().to_string(), detail: e.to_string() };
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(io)?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(io)
}

struct Loaded {
    id: String,
    motive: MotiveData,
}

fn load(path: &Path, settings: &Settings) -> Result<Loaded, CliError> {
    let doc = parse_motive(&read_input(path)?)?;
    let id = doc.id().map(str::to_string).unwrap_or_else(|| default_id(path));
    let mut motive = doc.to_motive(settings.precision)?;
    if let Some(w) = settings.window {
        motive = motive.with_window(w).map_err(|e| CliError::computation("--window", e))?;
    }
    Ok(Loaded { id, motive })
}

fn default_id(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn check(m: &MotiveData, prec: u32) -> Result<(), CliError> {
    let report = validate_motive(m, prec);
    match report.issues.into_iter().next() {
        None => Ok(()),
        Some(i) => Err(CliError::computation(i.location, i.error)),
    }
}

pub fn validate(path: &Path, settings: &Settings) -> Outcome {
    let loaded = match load(path, settings) {
        Ok(l) => l,
        Err(e) => return Outcome::failed(&e),
    };
    let report = validate_motive(&loaded.motive, settings.precision);
    if report.is_valid() {
        return Outcome::ok(format!("{}: valid\n", loaded.id));
    }
    let mut out =
        Outcome { stdout: format!("{}: invalid ({} issues)\n", loaded.id, report.issues.len()), ..Default::default() };
    for issue in &report.issues {
        out.stderr.push_str(&format!("error at {}: {}\n", issue.location, issue.error));
        out.code = out.code.max(core_exit_code(&issue.error));
    }
    out
}

pub fn height_of(path: &Path, settings: &Settings) -> Outcome {
    finish((|| {
        let Loaded { id, motive } = load(path, settings)?;
        check(&motive, settings.precision)?;
        let report = height(&motive, &settings.height_options()).map_err(|e| CliError::computation("height", e))?;
        let n = n_of_m(&motive, settings.precision);
        let stdout = match settings.format {
            Format::Text => render::height_text(&id, &report, &n, settings.digits),
            Format::Rows => render::row(&id, report.window, Some(&report.h), &n, settings.digits),
        };
        Ok(Outcome::ok(stdout))
    })())
}

pub fn local(path: &Path, p: u64, settings: &Settings) -> Outcome {
    finish((|| {
        let Loaded { motive, .. } = load(path, settings)?;
        check(&motive, settings.precision)?;
        let spec = motive.local_spec(p).map_err(|e| CliError::computation(format!("local.{p}"), e))?;
        let stdout = match settings.format {
            Format::Text => render::local_text(&spec, motive.window()),
            Format::Rows => render::local_rows(&spec, motive.window()),
        };
        Ok(Outcome::ok(stdout))
    })())
}

pub fn invariants(path: &Path, settings: &Settings) -> Outcome {
    finish((|| {
        let Loaded { motive, .. } = load(path, settings)?;
        let report = check_s_equals_t(&motive.mtype);
        let code = if report.pass { 0 } else { 1 };
        Ok(Outcome { stdout: render::invariants_text(&motive.mtype, &report), stderr: String::new(), code })
    })())
}

pub fn experiment(path: &Path, spec_path: &Path, n: Option<u32>, settings: &Settings) -> Outcome {
    finish((|| {
        let Loaded { motive, .. } = load(path, settings)?;
        let mut spec = parse_spec(&read_input(spec_path)?)?.to_spec()?;
        if let Some(n) = n {
            spec = spec.with_exponent(n);
        }
        let report = invariance_experiment(&motive, &spec, &settings.height_options())
            .map_err(|e| CliError::computation("experiment", e))?;
        let code = if report.pass() { 0 } else { 1 };
        Ok(Outcome { stdout: render::invariance_text(&report, settings.digits), stderr: String::new(), code })
    })())
}

/// Files named directly, plus the `*.json` files of named directories in name order.
pub fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let io = |e: std::io::Error| CliError::Io { path: p.display().to_string(), detail: e.to_string() };
            let mut files: Vec<PathBuf> =
                std::fs::read_dir(p).map_err(io)?.map(|e| e.map(|e| e.path()).map_err(io)).collect::<Result<_, _>>()?;
            files.retain(|f| f.extension().is_some_and(|x| x == "json"));
            files.sort();
            out.extend(files);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

struct BatchItem {
    id: String,
    window: (i64, i64),
    h: Option<motive_core::ball::Real>,
    n: motive_core::ball::Real,
    error: Option<CliError>,
}

fn batch_item(path: &Path, settings: &Settings) -> BatchItem {
    let fallback = default_id(path);
    let zero = motive_core::ball::Real::zero(settings.precision);
    match load(path, settings) {
        Err(e) => BatchItem { id: fallback, window: (0, 0), h: None, n: zero, error: Some(e) },
        Ok(Loaded { id, motive }) => {
            let n = n_of_m(&motive, settings.precision);
            if let Err(e) = check(&motive, settings.precision) {
                return BatchItem { id, window: motive.window(), h: None, n, error: Some(e) };
            }
            match height(&motive, &settings.height_options()) {
                Ok(r) => BatchItem { id, window: r.window, h: Some(r.h), n, error: None },
                Err(e) => BatchItem {
                    id,
                    window: motive.window(),
                    h: None,
                    n,
                    error: Some(CliError::computation("height", e)),
                },
            }
        }
    }
}

pub fn batch(inputs: &[PathBuf], settings: &Settings) -> Outcome {
    let files = match expand_inputs(inputs) {
        Ok(f) => f,
        Err(e) => return Outcome::failed(&e),
    };
    let items: Vec<BatchItem> = files.par_iter().map(|f| batch_item(f, settings)).collect();
    let mut out = Outcome::default();
    if settings.format == Format::Text {
        out.stdout.push_str("id\ta\tb\th\tn(M)\n");
    }
    for (item, path) in items.iter().zip(&files) {
        match settings.format {
            Format::Rows => {
                out.stdout.push_str(&render::row(&item.id, item.window, item.h.as_ref(), &item.n, settings.digits))
            }
            Format::Text => {
                let h = item.h.as_ref().map_or_else(|| "error".to_string(), |h| render::ball(h, settings.digits));
                out.stdout.push_str(&format!(
                    "{}\t{}\t{}\t{h}\t{}\n",
                    item.id,
                    item.window.0,
                    item.window.1,
                    render::ball(&item.n, settings.digits)
                ));
            }
        }
        if let Some(e) = &item.error {
            out.stderr.push_str(&format!("error: {}: {e}\n", path.display()));
            out.code = out.code.max(e.exit_code());
        }
    }
    if settings.format == Format::Text {
        out.stdout.push_str("(over Q: log|D_K| = 0, [K:Q] = 1; no inequality is checked)\n");
    }
    out
}

pub fn example(name: &str, settings: &Settings) -> Outcome {
    finish(build_example(name, settings.precision).map(|doc| Outcome::ok(to_text(&doc))))
}

/// Rewrite a document in canonical form.
pub fn canonicalize(path: &Path) -> Outcome {
    finish((|| {
        let text = read_input(path)?;
        let canonical = match parse_motive(&text) {
            Ok(doc) => to_text(&doc.canonical()?),
            Err(motive_err) => match parse_spec(&text) {
                Ok(spec) => to_text(&spec.canonical()?),
                Err(_) => return Err(motive_err),
            },
        };
        Ok(Outcome::ok(canonical))
    })())
}

pub fn canonical_text(doc: &MotiveDocument) -> Result<String, CliError> {
    Ok(to_text(&doc.canonical()?))
}
