//! Plain-text tables at four decimals.

use std::fmt::Write;

use num_complex::Complex64;

use crate::analytic::SpectralReport;
use crate::basis::WedgeVector;
use crate::kernel::{BlockSignature, KernelDecomposition};

use super::document::DimsRow;

/// Terms below this magnitude are left out of printed expansions.
const PRINT_CUTOFF: f64 = 1e-14;

fn coefficient(z: Complex64, first: bool) -> String {
    if z.im.abs() < 5e-5 {
        if first {
            format!("{:.4}", z.re)
        } else {
            format!("{:+.4}", z.re)
        }
    } else {
        let body = format!("({:.4}{:+.4}i)", z.re, z.im);
        if first {
            body
        } else {
            format!("+{body}")
        }
    }
}

/// `0.8660|1,2,5⟩+0.5000|3,4,5⟩`
pub fn expansion(v: &WedgeVector) -> String {
    let mut out = String::new();
    for (det, z) in v.terms().filter(|(_, z)| z.norm() > PRINT_CUTOFF) {
        out.push_str(&coefficient(z, out.is_empty()));
        out.push_str(&det.to_string());
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

pub fn spectrum_table(report: &SpectralReport, vectors: bool) -> String {
    let mut out = String::new();
    writeln!(out, "n={} s={}", report.n, report.s).unwrap();
    writeln!(out, "{:>12}  {:>12}", "eigenvalue", "multiplicity").unwrap();
    for c in &report.clusters {
        writeln!(out, "{:>12.4}  {:>12}", c.value, c.multiplicity).unwrap();
    }
    if report.has_folded_pairs() {
        writeln!(out, "pair eigenvalues folded into kernel: pairs {:?}", report.folded_pairs).unwrap();
    }
    if vectors {
        for f in &report.families {
            writeln!(out, "{} = {}  (λ={:.4})", f.label, expansion(&f.vector), f.eigenvalue).unwrap();
        }
    }
    out
}

pub fn kernel_table(kernel: &KernelDecomposition, closed_form: [i64; 4], vectors: bool) -> String {
    let mut out = String::new();
    writeln!(out, "n={} s={}", kernel.n, kernel.s).unwrap();
    for (signature, expected) in BlockSignature::ALL.iter().zip(closed_form) {
        let block = kernel.block(*signature);
        writeln!(out, "K{} dim {} (closed form {})", signature, block.dimension(), expected).unwrap();
        for f in &block.basis {
            if vectors {
                writeln!(out, "  {} = {}", f.family, expansion(&f.vector)).unwrap();
            } else {
                writeln!(out, "  {}", f.family).unwrap();
            }
        }
    }
    if !kernel.folded_pairs.is_empty() {
        writeln!(out, "pair eigenvalues folded into kernel: pairs {:?}", kernel.folded_pairs).unwrap();
        for f in &kernel.folded {
            writeln!(out, "  {} = {}", f.family, expansion(&f.vector)).unwrap();
        }
    }
    writeln!(out, "kernel dim {}", kernel.dimension()).unwrap();
    out
}

/// `n=6 s=2: 0 4 10 0 | 14 = 14 ✓`
pub fn dims_row(row: &DimsRow) -> String {
    let mark = if row.holds { "✓" } else { "✗" };
    let d30 = if row.folded { row.d30.max(0) } else { row.d30 };
    let mut line = format!(
        "n={} s={}: {} {} {} {} | {} = {} {}",
        row.n, row.s, row.d03, row.d12, row.d21, d30, row.total, row.expected, mark
    );
    if row.folded {
        line.push_str(" (pair eigenvalues folded into kernel)");
    }
    line
}
