use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use motive_core::motive::LatticeFormula;

use crate::commands::{self, Format, Outcome, Settings};

#[derive(Parser, Debug)]
#[command(name = "motive-height", version, about = "Heights of motives over Q from realization data")]
pub struct Cli {
    /// Working precision in bits.
    #[arg(long, global = true, default_value_t = 128)]
    pub precision: u32,

    /// Filtration window `a,b` replacing the one in the document.
    #[arg(long, global = true, value_parser = parse_window, allow_hyphen_values = true)]
    pub window: Option<(i64, i64)>,

    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Text)]
    pub format: FormatArg,

    /// Significant digits for printed midpoints.
    #[arg(long, global = true, default_value_t = 30)]
    pub digits: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FormatArg {
    Text,
    Rows,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FormulaArg {
    Windowed,
    Graded,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a document and list every failed invariant with its location.
    Validate { path: PathBuf },
    /// Compute h(M), H(M) and the local contributions.
    Height {
        path: PathBuf,
        /// Tensor expression for the lattice; `graded` is experimental.
        #[arg(long, value_enum, default_value_t = FormulaArg::Windowed)]
        formula: FormulaArg,
    },
    /// Lattice valuations v(r) at one prime.
    Local { path: PathBuf, p: u64 },
    /// Compare s = Σ r h(r) with t = w n / 2.
    Invariants { path: PathBuf },
    /// Run the sublattice invariance experiment for a quotient specification.
    Experiment {
        path: PathBuf,
        spec: PathBuf,
        /// Exponent n, replacing the one in the specification.
        #[arg(long)]
        n: Option<u32>,
    },
    /// Heights and n(M) for many documents, one row each, in input order.
    Batch {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Print a builder document: tate:<r>, elliptic:square or trivial.
    Example { name: String },
    /// Print a motive or specification document in canonical form.
    Canonical { path: PathBuf },
}

fn parse_window(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected a,b, got {s:?}"))?;
    let a = a.trim().parse().map_err(|_| format!("bad window start {a:?}"))?;
    let b = b.trim().parse().map_err(|_| format!("bad window end {b:?}"))?;
    Ok((a, b))
}

impl Cli {
    pub fn settings(&self) -> Settings {
        let formula = match &self.command {
            Command::Height { formula: FormulaArg::Graded, .. } => LatticeFormula::Graded,
            _ => LatticeFormula::Windowed,
        };
        Settings {
            precision: self.precision,
            window: self.window,
            format: match self.format {
                FormatArg::Text => Format::Text,
                FormatArg::Rows => Format::Rows,
            },
            digits: self.digits.max(1),
            formula,
        }
    }

    pub fn execute(&self) -> Outcome {
        let s = self.settings();
        if s.precision < 16 {
            return Outcome {
                stderr: "error: --precision must be at least 16 bits\n".into(),
                code: 3,
                ..Default::default()
            };
        }
        match &self.command {
            Command::Validate { path } => commands::validate(path, &s),
            Command::Height { path, .. } => commands::height_of(path, &s),
            Command::Local { path, p } => commands::local(path, *p, &s),
            Command::Invariants { path } => commands::invariants(path, &s),
            Command::Experiment { path, spec, n } => commands::experiment(path, spec, *n, &s),
            Command::Batch { inputs } => commands::batch(inputs, &s),
            Command::Example { name } => commands::example(name, &s),
            Command::Canonical { path } => commands::canonicalize(path),
        }
    }
}

/// Parse `args` (program name first) and run; usage errors exit with 3.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => cli.execute(),
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                Outcome { stdout: text, code, ..Default::default() }
            } else {
                Outcome { stderr: text, code, ..Default::default() }
            }
        }
    }
}
