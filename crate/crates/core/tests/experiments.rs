mod support;

use std::collections::BTreeMap;

use motive_core::experiments::{
    abc_report, check_s_equals_t, invariance_experiment, lattice_scalar, n_of_m, sublattice_motive, QuotientSpec,
};
use motive_core::lines::{pow_rational, rat, LatticeBasis};
use motive_core::motive::{height, HeightOptions, MotiveData, MotiveType};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::Rng;
use support::*;

const P: u32 = 128;

fn quotient_s(m: &MotiveData, spec: &QuotientSpec) -> i64 {
    let (a, b) = m.window();
    let dim = |i: i64| -> usize {
        if i <= a {
            spec.k()
        } else if i >= b {
            0
        } else {
            spec.u_filtration.get(&i).map_or_else(|| dim_above(spec, i, b), |g| g.cols())
        }
    };
    (a..b).map(|r| r * (dim(r) - dim(r + 1)) as i64).sum()
}

fn dim_above(spec: &QuotientSpec, i: i64, b: i64) -> usize {
    (i + 1..b).find_map(|j| spec.u_filtration.get(&j).map(|g| g.cols())).unwrap_or(0)
}

#[test]
fn random_quotients_preserve_the_height() {
    let mut r = rng(21);
    let opts = HeightOptions::default();
    let mut cases = 0;
    for _ in 0..40 {
        let p = [3u64, 5, 7][r.gen_range(0..3)];
        let n = r.gen_range(1..=3);
        let (m, spec) = random_invariance_case(&mut r, p, n, P);
        let report = invariance_experiment(&m, &spec, &opts).unwrap();
        let pn = BigRational::from_integer(BigInt::from(p));
        let s = quotient_s(&m, &spec);
        assert_eq!(report.s_u, s);
        assert_eq!(report.lattice_ratio, pow_rational(&pn, n as i64 * s));
        assert_eq!(report.betti_index, BigInt::from(p).pow(n * spec.k() as u32));
        // [H : H^(n)]^w = p^{2 n t(U)} with t(U) = w k / 2
        let w = m.mtype.w;
        let lhs = pow_rational(&BigRational::from_integer(report.betti_index.clone()), w);
        assert_eq!(lhs, pow_rational(&pn, n as i64 * w * spec.k() as i64));
        assert!(report.h_before.overlaps(&report.h_after), "{} vs {}", report.h_before, report.h_after);
        assert!(report.pass());
        cases += 1;
    }
    assert_eq!(cases, 40);
}

#[test]
fn steps_compose() {
    let mut r = rng(22);
    let opts = HeightOptions::default();
    for _ in 0..15 {
        let p = [3u64, 5][r.gen_range(0..2)];
        let (n1, n2) = (r.gen_range(1..=2), r.gen_range(1..=2));
        let (m, spec) = random_invariance_case(&mut r, p, n1, P);
        let first = sublattice_motive(&m, &spec, P).unwrap();
        let next = spec.after_step(&first.betti_basis).with_exponent(n2);
        let second = sublattice_motive(&first.motive, &next, P).unwrap();
        let direct = sublattice_motive(&m, &spec.with_exponent(n1 + n2), P).unwrap();
        assert_eq!(
            LatticeBasis::new(&first.betti_basis.mul(&second.betti_basis)),
            LatticeBasis::new(&direct.betti_basis)
        );
        assert_eq!(&first.betti_index * &second.betti_index, direct.betti_index);
        assert_eq!(lattice_scalar(&second.motive, &opts).unwrap(), lattice_scalar(&direct.motive, &opts).unwrap());
        let h2 = height(&second.motive, &opts).unwrap().h;
        let hd = height(&direct.motive, &opts).unwrap().h;
        assert!(h2.overlaps(&hd));
    }
}

#[test]
fn exponent_zero_is_the_identity() {
    let mut r = rng(23);
    let (m, spec) = random_invariance_case(&mut r, 5, 1, P);
    let step = sublattice_motive(&m, &spec.with_exponent(0), P).unwrap();
    assert_eq!(step.betti_index, BigInt::from(1));
    assert_eq!(
        lattice_scalar(&step.motive, &HeightOptions::default()).unwrap(),
        lattice_scalar(&m, &HeightOptions::default()).unwrap()
    );
}

fn symmetric_type() -> impl Strategy<Value = MotiveType> {
    (-3i64..=3, prop::collection::vec(0usize..=3, 1..=4)).prop_filter_map("nonempty", |(lo, half)| {
        // h(r) for r = lo .. lo + len - 1, mirrored around w/2
        let len = half.len() as i64;
        let w = 2 * lo + 2 * (len - 1);
        let mut h = BTreeMap::new();
        for (i, &d) in half.iter().enumerate() {
            let r = lo + i as i64;
            *h.entry(r).or_insert(0) += d;
            if w - r != r {
                *h.entry(w - r).or_insert(0) += d;
            }
        }
        h.retain(|_, d| *d > 0);
        let lo_r = *h.keys().next()?;
        let hi_r = *h.keys().next_back()?;
        MotiveType::new(w, h, (lo_r, hi_r + 1)).ok()
    })
}

proptest! {
    #[test]
    fn s_equals_t_for_hodge_symmetric_types(t in symmetric_type()) {
        let report = check_s_equals_t(&t);
        prop_assert!(report.pass, "s = {}, t = {}", report.s, report.t);
        // direct computation of both sides
        let s: i64 = t.h.iter().map(|(&r, &d)| r * d as i64).sum();
        let n: i64 = t.h.values().map(|&d| d as i64).sum();
        prop_assert_eq!(report.s, s);
        prop_assert_eq!(report.t.clone(), BigRational::new(BigInt::from(t.w * n), BigInt::from(2)));
    }

    #[test]
    fn s_and_t_are_additive_and_twist_correctly(t1 in symmetric_type(), t2 in symmetric_type(), j in -2i64..=2) {
        let (s1, s2) = (t1.s(), t2.s());
        let n1 = t1.rank() as i64;
        // a twist by j moves h(r) to h(r - j) and w to w - 2j
        let shifted: BTreeMap<i64, usize> = t1.h.iter().map(|(&r, &d)| (r - j, d)).collect();
        let tw = MotiveType::new(t1.w - 2 * j, shifted, (t1.window.0 - j, t1.window.1 - j)).unwrap();
        prop_assert_eq!(tw.s(), s1 - j * n1);
        prop_assert_eq!(tw.t(), t1.t() - rat(j * n1));
        if t1.w == t2.w {
            let mut h = t1.h.clone();
            for (&r, &d) in &t2.h {
                *h.entry(r).or_insert(0) += d;
            }
            let window = (t1.window.0.min(t2.window.0), t1.window.1.max(t2.window.1));
            let sum = MotiveType::new(t1.w, h, window).unwrap();
            prop_assert_eq!(sum.s(), s1 + s2);
            prop_assert_eq!(sum.t(), t1.t() + t2.t());
        }
    }
}

#[test]
fn conductor_term_sums_logs_of_bad_primes() {
    let m = curve_motive(&CURVES[2], 20, P);
    let got = n_of_m(&m, P);
    let want = (15f64).ln();
    assert!((got.mid_f64() - want).abs() < 1e-14);
    let batch: Vec<(String, MotiveData)> =
        CURVES.iter().map(|c| (c.label.to_string(), curve_motive(c, 20, P))).collect();
    let rows = abc_report(&batch, &HeightOptions::default());
    let labels: Vec<&str> = rows.iter().map(|r| r.id.as_str()).collect();
    assert_eq!(labels, ["37a1", "32a2", "15a1"]);
    for (row, (_, m)) in rows.iter().zip(&batch) {
        assert!(row.h.as_ref().unwrap().overlaps(&height(m, &HeightOptions::default()).unwrap().h));
        assert_eq!(row.window, (-1, 1));
    }
}
