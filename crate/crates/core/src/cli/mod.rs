//! Command-line front end.

pub mod document;
pub mod render;

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::spectral_report;
use crate::error::{Error, Result};
use crate::geminal::CanonicalGeminal;
use crate::kernel::{block_dimensions, kernel_decomposition, BlockSignature};
use crate::oracle::random_geminal;
use crate::verify::{verify_case, Tolerances, VerifyOptions};

use document::{
    terms, BasisEntry, BlockEntry, CanonicalEcho, ClusterEntry, DimsDocument, DimsRow, FamilyEntry, GeminalDocument,
    GeminalInput, KernelSection, ReportDocument, SpectrumSection, VerifyDocument, SCHEMA,
};

const FOLDED_NOTE: &str = "pair eigenvalues folded into kernel";

#[derive(Debug, Parser)]
#[command(name = "fermion-wedge", version, about = "Spectrum and kernel of the 3-fermion operator 3P²_g∧I¹")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Emit JSON instead of a table.
    #[arg(long, global = true, conflicts_with = "table")]
    pub json: bool,
    /// Emit a table (default for spectrum, kernel and dims).
    #[arg(long, global = true)]
    pub table: bool,
    /// Write output to PATH instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Numerical tolerance for rank, clustering and the standard checks.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    /// Seed for random cases when `--random` omits one.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Canonical pair form of a geminal document.
    Canonicalize {
        /// Geminal document, or `-` for stdin.
        input: PathBuf,
    },
    /// Eigenvalue clusters and eigenfunctions.
    Spectrum {
        input: PathBuf,
        /// Print eigenfunction expansions.
        #[arg(long)]
        vectors: bool,
        /// Include natural orbitals in JSON output.
        #[arg(long)]
        orbitals: bool,
    },
    /// Kernel blocks and their basis functions.
    Kernel {
        input: PathBuf,
        /// Print basis function expansions.
        #[arg(long)]
        vectors: bool,
        #[arg(long)]
        orbitals: bool,
    },
    /// Run the full check battery on a document or on random geminals.
    Verify {
        #[arg(required_unless_present = "random", conflicts_with = "random")]
        input: Option<PathBuf>,
        /// N S [SEED] [COUNT]
        #[arg(long, num_args = 2..=4, value_names = ["N", "S", "SEED", "COUNT"])]
        random: Option<Vec<u64>>,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Closed-form block dimensions and the dimension identity.
    Dims {
        /// Orbital counts, `a..b` (inclusive) or a single value.
        #[arg(long, default_value = "3..30")]
        n_range: IntRange,
        /// Pair counts; every admissible s for each n when absent.
        #[arg(long)]
        s_range: Option<IntRange>,
    },
}

/// Inclusive integer range written `a..b`, `a..=b` or `a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IntRange {
    pub start: usize,
    pub end: usize,
}

impl FromStr for IntRange {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
        let (start, end) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.strip_prefix('=').unwrap_or(b))?),
            None => {
                let v = parse(s)?;
                (v, v)
            }
        };
        if start > end {
            return Err(format!("empty range {s}"));
        }
        Ok(Self { start, end })
    }
}

/// Failure classes mapped to exit codes 1 and 2.
#[derive(Debug)]
enum Failure {
    Verification,
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

struct Output<'a> {
    global: &'a GlobalArgs,
}

impl Output<'_> {
    fn write(&self, text: &str) -> std::result::Result<(), Failure> {
        match &self.global.out {
            Some(path) => fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
            None => {
                let mut stdout = io::stdout().lock();
                stdout.write_all(text.as_bytes())?;
                stdout.flush()?;
                Ok(())
            }
        }
    }

    fn json<T: Serialize>(&self, value: &T) -> std::result::Result<(), Failure> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Input(e.to_string()))?;
        text.push('\n');
        self.write(&text)
    }
}

fn read_input(path: &Path) -> std::result::Result<(GeminalDocument, serde_json::Value), Failure> {
    let text = if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        s
    } else {
        fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?
    };
    let doc = GeminalDocument::parse(&text)?;
    let echo = serde_json::from_str(&text).map_err(|e| Failure::Input(e.to_string()))?;
    Ok((doc, echo))
}

fn load(path: &Path) -> std::result::Result<(GeminalInput, serde_json::Value), Failure> {
    let (doc, echo) = read_input(path)?;
    Ok((doc.validate()?, echo))
}

pub fn run(cli: Cli) -> ExitCode {
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Input(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: &Cli) -> std::result::Result<(), Failure> {
    let g = &cli.global;
    if !(g.tol.is_finite() && g.tol > 0.0) {
        return Err(Failure::Input(format!("--tol must be a positive number, got {}", g.tol)));
    }
    let out = Output { global: g };
    match &cli.command {
        Command::Canonicalize { input } => cmd_canonicalize(&out, input),
        Command::Spectrum { input, vectors, orbitals } => cmd_spectrum(&out, input, *vectors, *orbitals),
        Command::Kernel { input, vectors, orbitals } => cmd_kernel(&out, input, *vectors, *orbitals),
        Command::Verify { input, random, inject_fault } => {
            cmd_verify(&out, input.as_deref(), random.as_deref(), *inject_fault)
        }
        Command::Dims { n_range, s_range } => cmd_dims(&out, *n_range, *s_range),
    }
}

fn cmd_canonicalize(out: &Output, input: &Path) -> std::result::Result<(), Failure> {
    let tol = out.global.tol;
    let (input, _) = load(input)?;
    let canonical = match input {
        // Already canonical: only the gauge (real, positive, descending) is fixed.
        GeminalInput::Canonical(c) => c.gauge_fixed(tol)?,
        GeminalInput::Matrix(g) => crate::geminal::canonicalize(&g, tol)?.gauge_fixed(tol)?,
    };
    out.json(&GeminalDocument::from_canonical(&canonical))
}

fn folded_notes(folded: &[usize]) -> Vec<String> {
    if folded.is_empty() {
        Vec::new()
    } else {
        vec![format!("{FOLDED_NOTE}: pairs {folded:?}")]
    }
}

fn cmd_spectrum(out: &Output, input: &Path, vectors: bool, orbitals: bool) -> std::result::Result<(), Failure> {
    let tol = out.global.tol;
    let (input, echo) = load(input)?;
    let c = input.resolve(tol)?;
    let report = spectral_report(&c, tol)?;
    if !out.global.json {
        return out.write(&render::spectrum_table(&report, vectors));
    }
    let families = vectors.then(|| {
        report
            .families
            .iter()
            .map(|f| FamilyEntry {
                label: f.label.to_string(),
                eigenvalue: f.eigenvalue,
                amplitudes: terms(&f.vector),
            })
            .collect()
    });
    out.json(&ReportDocument {
        schema: SCHEMA,
        command: "spectrum",
        input: echo,
        canonical: CanonicalEcho::new(&c, orbitals),
        spectrum: Some(SpectrumSection {
            clusters: report
                .clusters
                .iter()
                .map(|c| ClusterEntry {
                    value: c.value,
                    multiplicity: c.multiplicity,
                })
                .collect(),
            kernel_dim: report.kernel_dim,
            folded_pairs: report.folded_pairs.clone(),
            families,
        }),
        kernel: None,
        comparison: None,
        notes: folded_notes(&report.folded_pairs),
    })
}

fn cmd_kernel(out: &Output, input: &Path, vectors: bool, orbitals: bool) -> std::result::Result<(), Failure> {
    let tol = out.global.tol;
    let (input, echo) = load(input)?;
    let c = input.resolve(tol)?;
    let kernel = kernel_decomposition(&c, tol)?;
    let dims = block_dimensions(c.n(), c.pair_count())?;
    let closed_form = [dims.d03, dims.d12, dims.d21, dims.d30];
    if !out.global.json {
        return out.write(&render::kernel_table(&kernel, closed_form, vectors));
    }
    let entry = |f: &crate::kernel::KernelBasisFunction| BasisEntry {
        family: f.family.to_string(),
        amplitudes: vectors.then(|| terms(&f.vector)),
    };
    let blocks = BlockSignature::ALL
        .iter()
        .zip(closed_form)
        .map(|(sig, closed_form)| {
            let block = kernel.block(*sig);
            BlockEntry {
                signature: sig.label().to_string(),
                dimension: block.dimension(),
                closed_form,
                basis: block.basis.iter().map(entry).collect(),
            }
        })
        .collect();
    out.json(&ReportDocument {
        schema: SCHEMA,
        command: "kernel",
        input: echo,
        canonical: CanonicalEcho::new(&c, orbitals),
        spectrum: None,
        kernel: Some(KernelSection {
            blocks,
            folded: kernel.folded.iter().map(entry).collect(),
            dimension: kernel.dimension(),
            generic_dimension: dims.expected,
        }),
        comparison: None,
        notes: folded_notes(&kernel.folded_pairs),
    })
}

fn random_cases(values: &[u64], default_seed: u64) -> std::result::Result<Vec<(u64, usize, usize)>, Failure> {
    let n = values[0] as usize;
    let s = values[1] as usize;
    let seed = values.get(2).copied().unwrap_or(default_seed);
    let count = values.get(3).copied().unwrap_or(1) as usize;
    if n < 3 || s == 0 || 2 * s > n || n > crate::basis::MAX_ORBITALS {
        return Err(Failure::Input(format!("--random needs 3 ≤ n ≤ 63 and 1 ≤ s ≤ n/2, got n={n} s={s}")));
    }
    if count == 0 {
        return Err(Failure::Input("--random count must be positive".into()));
    }
    Ok((0..count as u64).map(|i| (seed.wrapping_add(i), n, s)).collect())
}

fn cmd_verify(
    out: &Output,
    input: Option<&Path>,
    random: Option<&[u64]>,
    inject_fault: bool,
) -> std::result::Result<(), Failure> {
    let tol = out.global.tol;
    let options = VerifyOptions {
        tolerances: Tolerances::with_standard(tol),
        inject_fault,
    };
    let (cases, echo) = match (input, random) {
        (Some(path), _) => {
            let (input, echo) = load(path)?;
            let c = input.resolve(tol)?;
            let mut verdict = verify_case(&c, &options)?;
            if let GeminalInput::Matrix(g) = &input {
                verdict.checks.push(crate::verify::canonicalization_check(g, &c, tol));
                verdict.passed = verdict.checks.iter().all(|c| c.passed);
            }
            (vec![verdict], Some(echo))
        }
        (None, Some(values)) => {
            let specs = random_cases(values, out.global.seed)?;
            let verdicts: Result<Vec<_>> = specs
                .par_iter()
                .map(|&(seed, n, s)| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let c: CanonicalGeminal = random_geminal(n, s, &mut rng)?;
                    let mut verdict = verify_case(&c, &options)?;
                    verdict.seed = Some(seed);
                    Ok(verdict)
                })
                .collect();
            (verdicts?, None)
        }
        (None, None) => return Err(Failure::Input("give an input document or --random".into())),
    };
    let passed_cases = cases.iter().filter(|c| c.passed).count();
    let doc = VerifyDocument {
        schema: SCHEMA,
        command: "verify",
        input: echo,
        tolerances: options.tolerances,
        total_cases: cases.len(),
        passed_cases,
        degenerate: cases.iter().any(|c| c.degenerate),
        passed: passed_cases == cases.len(),
        cases,
    };
    eprintln!("{}/{} pass", doc.passed_cases, doc.total_cases);
    out.json(&doc)?;
    if doc.passed {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn cmd_dims(out: &Output, n_range: IntRange, s_range: Option<IntRange>) -> std::result::Result<(), Failure> {
    if n_range.start < 3 {
        return Err(Failure::Input(format!("n must be at least 3, got {}", n_range.start)));
    }
    if let Some(s) = s_range {
        if s.start == 0 {
            return Err(Failure::Input("s must be at least 1".into()));
        }
        if 2 * s.end > n_range.end {
            return Err(Failure::Input(format!(
                "s={} exceeds n/2 for every n in {}..{}",
                s.end, n_range.start, n_range.end
            )));
        }
    }
    let mut rows = Vec::new();
    for n in n_range.start..=n_range.end {
        let (lo, hi) = match s_range {
            Some(s) => (s.start, s.end.min(n / 2)),
            None => (1, n / 2),
        };
        for s in lo..=hi {
            rows.push(DimsRow::from(&block_dimensions(n, s)?));
        }
    }
    let passed = rows.iter().all(|r| r.holds);
    if out.global.json {
        out.json(&DimsDocument {
            schema: SCHEMA,
            command: "dims",
            rows,
            passed,
        })?;
    } else {
        let mut text: String = rows.iter().map(|r| render::dims_row(r) + "\n").collect();
        if rows.is_empty() {
            text.push_str("no admissible (n, s)\n");
        }
        out.write(&text)?;
    }
    if passed {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn int_ranges() {
        assert_eq!("3..30".parse::<IntRange>().unwrap(), IntRange { start: 3, end: 30 });
        assert_eq!("3..=30".parse::<IntRange>().unwrap(), IntRange { start: 3, end: 30 });
        assert_eq!("6".parse::<IntRange>().unwrap(), IntRange { start: 6, end: 6 });
        assert!("9..3".parse::<IntRange>().is_err());
        assert!("x".parse::<IntRange>().is_err());
    }

    #[test]
    fn random_case_seeds() {
        let cases = random_cases(&[6, 2, 42, 3], 0).unwrap();
        assert_eq!(cases, vec![(42, 6, 2), (43, 6, 2), (44, 6, 2)]);
        assert_eq!(random_cases(&[6, 2], 9).unwrap(), vec![(9, 6, 2)]);
        assert!(random_cases(&[5, 3], 0).is_err());
    }
}
