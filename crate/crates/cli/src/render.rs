use std::fmt::Write;

use motive_core::ball::Real;
use motive_core::experiments::{InvarianceReport, SEqualsT};
use motive_core::fl::LocalLatticeSpec;
use motive_core::lines::format_rational;
use motive_core::motive::{HeightReport, LatticeFormula, MotiveType};

pub fn formula_name(f: LatticeFormula) -> &'static str {
    match f {
        LatticeFormula::Windowed => "windowed",
        LatticeFormula::Graded => "graded",
    }
}

pub fn ball(x: &Real, digits: usize) -> String {
    format!("{x:.digits$}")
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

pub fn height_text(id: &str, r: &HeightReport, n_of_m: &Real, digits: usize) -> String {
    let mut s = String::new();
    let (a, b) = r.window;
    writeln!(s, "motive: {id}").unwrap();
    writeln!(s, "window: ({a}, {b})").unwrap();
    writeln!(s, "formula: {}", formula_name(r.formula)).unwrap();
    writeln!(s, "h = {}", ball(&r.h, digits)).unwrap();
    writeln!(s, "H = {}", ball(&r.big_h, digits)).unwrap();
    writeln!(s, "|e| = {}", ball(&r.generator_length, digits)).unwrap();
    writeln!(s, "|ref| = {}", ball(&r.reference_length, digits)).unwrap();
    writeln!(s, "lattice scalar: {}", format_rational(&r.lattice_scalar)).unwrap();
    writeln!(s, "n(M) = {}", ball(n_of_m, digits)).unwrap();
    if !r.per_prime.is_empty() {
        writeln!(s, "local contributions:").unwrap();
        for c in &r.per_prime {
            writeln!(s, "  p = {}, r = {}, v = {} ({})", c.p, c.r, c.v, c.provenance.as_str()).unwrap();
        }
    }
    for w in &r.warnings {
        writeln!(s, "warning: {w}").unwrap();
    }
    s
}

/// `id, a, b, h_mid, h_rad, n_of_M`, tab separated.
pub fn row(id: &str, window: (i64, i64), h: Option<&Real>, n_of_m: &Real, digits: usize) -> String {
    let (mid, rad) = match h {
        Some(h) => (h.mid_to_decimal(digits), h.radius().to_string()),
        None => ("error".to_string(), "-".to_string()),
    };
    format!("{id}\t{}\t{}\t{mid}\t{rad}\t{}\n", window.0, window.1, n_of_m.mid_to_decimal(digits))
}

pub fn local_text(spec: &LocalLatticeSpec, window: (i64, i64)) -> String {
    let mut s = String::new();
    writeln!(s, "p = {} ({})", spec.p, spec.provenance.as_str()).unwrap();
    for r in window.0..=window.1 {
        writeln!(s, "v({r}) = {}", spec.value(r)).unwrap();
    }
    s
}

pub fn local_rows(spec: &LocalLatticeSpec, window: (i64, i64)) -> String {
    (window.0..=window.1)
        .map(|r| format!("{}\t{r}\t{}\t{}\n", spec.p, spec.value(r), spec.provenance.as_str()))
        .collect()
}

pub fn invariants_text(t: &MotiveType, r: &SEqualsT) -> String {
    let mut s = String::new();
    writeln!(s, "weight: {}", t.w).unwrap();
    writeln!(s, "rank: {}", t.rank()).unwrap();
    writeln!(s, "s = {}", r.s).unwrap();
    writeln!(s, "t = {}", format_rational(&r.t)).unwrap();
    writeln!(s, "s - t = {}", format_rational(&r.defect)).unwrap();
    writeln!(s, "s = t: {}", verdict(r.pass)).unwrap();
    s
}

pub fn invariance_text(r: &InvarianceReport, digits: usize) -> String {
    let mut s = String::new();
    writeln!(s, "p = {}, n = {}, rank U = {}", r.p, r.n, r.k).unwrap();
    writeln!(s, "s(U) = {}, t(U) = {}", r.s_u, format_rational(&r.t_u)).unwrap();
    writeln!(
        s,
        "lattice ratio: {} (expected {}) {}",
        format_rational(&r.lattice_ratio),
        format_rational(&r.expected_ratio),
        verdict(r.lattice_ok)
    )
    .unwrap();
    writeln!(s, "Betti index: {} (expected {}) {}", r.betti_index, r.expected_index, verdict(r.betti_ok)).unwrap();
    writeln!(s, "h before = {}", ball(&r.h_before, digits)).unwrap();
    writeln!(s, "h after  = {}", ball(&r.h_after, digits)).unwrap();
    writeln!(s, "heights agree: {}", verdict(r.heights_ok)).unwrap();
    writeln!(s, "result: {}", verdict(r.pass())).unwrap();
    s
}
