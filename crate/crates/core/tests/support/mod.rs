//! Oracles and random generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use motive_core::ball::{Complex, Real};
use motive_core::cmatrix::CMatrix;
use motive_core::experiments::QuotientSpec;
use motive_core::fl::{FilPhiModule, LocalLatticeSpec, Provenance};
use motive_core::lines::{rat, RationalMatrix};
use motive_core::motive::{
    direct_sum, elliptic_curve_h1, tate_module, tate_motive, EllipticLocal, LocalDatum, MotiveData,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- periods

fn drop_radius(x: &Real, prec: u32) -> Real {
    Real::from_rational(&x.midpoint_rational(), prec)
}

/// Real roots `e1 > e2 > e3` of `4x^3 + b2 x^2 + 2 b4 x + b6`.
fn real_roots(b2: i64, b4: i64, b6: i64, prec: u32) -> [Real; 3] {
    let f = |x: f64| 4.0 * x * x * x + b2 as f64 * x * x + 2.0 * b4 as f64 * x + b6 as f64;
    // bracket the roots by sign changes on a fine grid
    let bound = 1.0 + (b2.abs() + 2 * b4.abs() + b6.abs()) as f64;
    let mut guesses = Vec::new();
    let steps = 200_000;
    let mut prev = f(-bound);
    for i in 1..=steps {
        let x = -bound + 2.0 * bound * i as f64 / steps as f64;
        let y = f(x);
        let near = guesses.last().is_some_and(|&g: &f64| x - g < 1e-3);
        if (prev.signum() != y.signum() || y == 0.0) && !near {
            guesses.push(x);
        }
        prev = y;
    }
    assert_eq!(guesses.len(), 3, "expected three real roots");
    let wp = prec + 64;
    let c = |n: i64| Real::from_i64(n, wp);
    let mut roots: Vec<Real> = guesses
        .into_iter()
        .map(|g| {
            let mut x = Real::from_f64(g, wp);
            for _ in 0..12 {
                let fx = c(4).mul(&x).mul(&x).mul(&x).add(&c(b2).mul(&x).mul(&x)).add(&c(2 * b4).mul(&x)).add(&c(b6));
                let dfx = c(12).mul(&x).mul(&x).add(&c(2 * b2).mul(&x)).add(&c(2 * b4));
                x = drop_radius(&x.sub(&fx.div(&dfx).unwrap()), wp);
            }
            x
        })
        .collect();
    roots.sort_by(|a, b| b.mid_f64().partial_cmp(&a.mid_f64()).unwrap());
    [roots[0].clone(), roots[1].clone(), roots[2].clone()]
}

fn agm(a: &Real, b: &Real, wp: u32) -> Real {
    let mut a = a.clone();
    let mut b = b.clone();
    for _ in 0..200 {
        let na = drop_radius(&a.add(&b).mul_2exp(-1), wp);
        let nb = drop_radius(&a.mul(&b).sqrt().unwrap(), wp);
        a = na;
        b = nb;
        if a.sub(&b).upper_abs().to_f64() < 2f64.powi(-(wp as i32)) {
            break;
        }
    }
    a
}

/// Periods `(ω1, iω2')` of the Néron differential of a curve with `Δ > 0`,
/// computed by the arithmetic-geometric mean.
pub fn curve_periods(a: [i64; 5], prec: u32) -> (Complex, Complex) {
    let [a1, a2, a3, a4, a6] = a;
    let (b2, b4, b6) = (a1 * a1 + 4 * a2, 2 * a4 + a1 * a3, a3 * a3 + 4 * a6);
    let wp = prec + 64;
    let [e1, e2, e3] = real_roots(b2, b4, b6, prec);
    let pi = Real::pi(wp);
    let w1 = pi.div(&agm(&e1.sub(&e3).sqrt().unwrap(), &e1.sub(&e2).sqrt().unwrap(), wp)).unwrap();
    let w2 = pi.div(&agm(&e1.sub(&e3).sqrt().unwrap(), &e2.sub(&e3).sqrt().unwrap(), wp)).unwrap();
    (Complex::from_real(drop_radius(&w1, prec)), Complex::new(Real::zero(prec), drop_radius(&w2, prec)))
}

/// Faltings height `(1/12) log|Δ_min| - (1/12) log(|Δ(τ)| Im(τ)^6) - log(2π)`
/// for a rectangular lattice `τ = i t`, with `Δ(τ) = q ∏ (1 - q^n)^24`.
pub fn faltings_height_oracle(omega1: &Complex, omega2: &Complex, disc: i64, prec: u32) -> Real {
    let wp = prec + 64;
    let t = omega2.im.with_precision(wp).div(&omega1.re.with_precision(wp)).unwrap();
    let two_pi = Real::pi(wp).mul_2exp(1);
    let q = two_pi.mul(&t).neg().exp();
    let mut prod = Real::one(wp);
    let mut qn = q.clone();
    let one = Real::one(wp);
    while qn.upper_abs().to_f64() > 2f64.powi(-(wp as i32) - 8) {
        prod = prod.mul(&one.sub(&qn).powi(24).unwrap());
        qn = qn.mul(&q);
    }
    let delta = q.mul(&prod);
    let twelve = Real::from_i64(12, wp);
    let term1 = Real::from_i64(disc.abs(), wp).log().unwrap().div(&twelve).unwrap();
    let term2 = delta.mul(&t.powi(6).unwrap()).log().unwrap().div(&twelve).unwrap();
    term1.sub(&term2).sub(&two_pi.log().unwrap()).with_precision(prec)
}

/// A named test curve with positive discriminant.
pub struct Curve {
    pub label: &'static str,
    pub a: [i64; 5],
    pub disc: i64,
    pub conductor_primes: &'static [u64],
}

pub const CURVES: [Curve; 3] = [
    Curve { label: "37a1", a: [0, 0, 1, -1, 0], disc: 37, conductor_primes: &[37] },
    Curve { label: "32a2", a: [0, 0, 0, -1, 0], disc: 64, conductor_primes: &[2] },
    Curve { label: "15a1", a: [1, 1, 1, -10, -10], disc: 50625, conductor_primes: &[3, 5] },
];

/// Elliptic datum with modules at good primes `3 ≤ p < bound` and trivial
/// overrides at the bad primes.
pub fn curve_motive(c: &Curve, bound: u64, prec: u32) -> MotiveData {
    let (w1, w2) = curve_periods(c.a, prec);
    let mut local = Vec::new();
    for p in (3..bound).filter(|&p| motive_core::lines::is_prime(p)) {
        if c.conductor_primes.contains(&p) {
            continue;
        }
        local.push(EllipticLocal::Good { p, a_p: motive_core::motive::trace_of_frobenius(c.a, p) });
    }
    for &p in c.conductor_primes {
        local.push(EllipticLocal::Bad { p, values: BTreeMap::new() });
    }
    elliptic_curve_h1(&w1, &w2, &local, prec).unwrap()
}

// ---------------------------------------------------------------- random data

pub fn random_complex(rng: &mut ChaCha8Rng, prec: u32) -> Complex {
    Complex::new(Real::from_f64(rng.gen_range(-2.0..2.0), prec), Real::from_f64(rng.gen_range(-2.0..2.0), prec))
}

pub fn random_nonzero_complex(rng: &mut ChaCha8Rng, prec: u32) -> Complex {
    loop {
        let c = random_complex(rng, prec);
        if c.mid_abs_f64() > 0.1 {
            return c;
        }
    }
}

/// Random periods with `Im(ω2/ω1)` bounded away from zero.
pub fn random_periods(rng: &mut ChaCha8Rng, prec: u32) -> (Complex, Complex) {
    let w1 = random_nonzero_complex(rng, prec);
    let tau =
        Complex::new(Real::from_f64(rng.gen_range(-0.5..0.5), prec), Real::from_f64(rng.gen_range(0.6..2.0), prec));
    let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
    (w1.clone(), w1.mul(&tau).scale_rational(&rat(sign)))
}

pub fn random_prime(rng: &mut ChaCha8Rng, from: &[u64]) -> u64 {
    from[rng.gen_range(0..from.len())]
}

/// Random elliptic datum: random periods, a few good primes with random
/// traces, a few bad primes with random overrides.
pub fn random_elliptic(rng: &mut ChaCha8Rng, prec: u32) -> MotiveData {
    let (w1, w2) = random_periods(rng, prec);
    let mut local = Vec::new();
    let mut primes: Vec<u64> = vec![2, 3, 5, 7, 11, 13];
    for _ in 0..rng.gen_range(0..3) {
        let i = rng.gen_range(0..primes.len());
        let p = primes.remove(i);
        if p >= 3 && rng.gen_bool(0.6) {
            let bound = (2.0 * (p as f64).sqrt()) as i64;
            local.push(EllipticLocal::Good { p, a_p: rng.gen_range(-bound..=bound) });
        } else {
            let values = (-1..=1).map(|r| (r, if r == -1 { 0 } else { rng.gen_range(-2..=2) })).collect();
            local.push(EllipticLocal::Bad { p, values });
        }
    }
    elliptic_curve_h1(&w1, &w2, &local, prec).unwrap()
}

/// Random `Q(j)`-type datum with random overrides.
pub fn random_tate(rng: &mut ChaCha8Rng, j: i64, prec: u32) -> MotiveData {
    let mut m = tate_motive(j, prec);
    for _ in 0..rng.gen_range(0..3) {
        let p = random_prime(rng, &[2, 3, 5, 7]);
        let (a, b) = m.window();
        let values = (a..=b).map(|r| (r, if r == a { 0 } else { rng.gen_range(-3..=3) })).collect();
        m.local
            .insert(p, LocalDatum::Override(LocalLatticeSpec { p, values, provenance: Provenance::ExplicitOverride }));
    }
    m
}

/// Random integer matrix in `GL_m(Z)` (product of elementary matrices).
pub fn random_unimodular(rng: &mut ChaCha8Rng, m: usize, steps: usize) -> RationalMatrix {
    let mut g = RationalMatrix::identity(m);
    if m < 2 {
        return g;
    }
    for _ in 0..steps {
        let i = rng.gen_range(0..m);
        let mut j = rng.gen_range(0..m);
        while j == i {
            j = rng.gen_range(0..m);
        }
        let f: i64 = rng.gen_range(-2..=2);
        let mut e = RationalMatrix::identity(m);
        e.set(i, j, rat(f));
        g = g.mul(&e);
    }
    if rng.gen_bool(0.5) {
        let mut s = RationalMatrix::identity(m);
        s.set(0, 0, rat(-1));
        g = g.mul(&s);
    }
    g
}

/// Block lower triangular rational matrix adapted to the blocks of `m`.
pub fn random_adapted(rng: &mut ChaCha8Rng, m: &MotiveData, integral_unimodular: bool) -> RationalMatrix {
    let n = m.rank();
    let (a, b) = m.window();
    let mut g = RationalMatrix::zeros(n, n);
    for r in a..b {
        let blk: Vec<usize> = m.mtype.block(r).collect();
        if blk.is_empty() {
            continue;
        }
        let d = if integral_unimodular {
            random_unimodular(rng, blk.len(), 4)
        } else {
            loop {
                let c = RationalMatrix::from_fn(blk.len(), blk.len(), |_, _| {
                    BigRational::new(BigInt::from(rng.gen_range(-6i64..=6)), BigInt::from(rng.gen_range(1i64..=4)))
                });
                if !c.det().is_zero() {
                    break c;
                }
            }
        };
        for (x, &i) in blk.iter().enumerate() {
            for (y, &j) in blk.iter().enumerate() {
                g.set(i, j, d.get(x, y).clone());
            }
        }
        // entries mapping block r into later blocks
        for r2 in r + 1..b {
            for i in m.mtype.block(r2) {
                for &j in &blk {
                    g.set(i, j, rat(rng.gen_range(-2..=2)));
                }
            }
        }
    }
    g
}

/// Change the Betti basis by `g ∈ GL_n(Z)`.
pub fn rebase_betti(m: &MotiveData, g: &RationalMatrix) -> MotiveData {
    let prec = m.period.precision();
    let mut out = m.clone();
    out.period = CMatrix::from_rational(g, prec).mul(&m.period);
    out
}

// ---------------------------------------------------------------- invariance cases

/// `X ⊗ Z^mult` with its module at `p`, where `X` is `Q(j)` or an elliptic curve.
fn base_power(rng: &mut ChaCha8Rng, elliptic: bool, j: i64, p: u64, mult: usize, prec: u32) -> MotiveData {
    let one = if elliptic {
        let (w1, w2) = random_periods(rng, prec);
        let bound = (2.0 * (p as f64).sqrt()) as i64;
        let a_p = rng.gen_range(-bound..=bound);
        elliptic_curve_h1(&w1, &w2, &[EllipticLocal::Good { p, a_p }], prec).unwrap()
    } else {
        let mut t = tate_motive(j, prec);
        t.local.insert(p, LocalDatum::Fl(tate_module(j, p).unwrap()));
        t
    };
    let mut m = one.clone();
    for _ in 1..mult {
        m = direct_sum(&m, &one).unwrap();
    }
    m
}

/// A random motive of rank ≤ 4 with a module at `p` and a compatible
/// quotient specification at exponent `n`.
pub fn random_invariance_case(rng: &mut ChaCha8Rng, p: u64, n: u32, prec: u32) -> (MotiveData, QuotientSpec) {
    let elliptic = rng.gen_bool(0.5);
    let (d, mult) = if elliptic { (2, rng.gen_range(1..=2)) } else { (1, rng.gen_range(1..=4)) };
    // keep the window within the Fontaine–Laffaille range
    let j = if p == 3 { rng.gen_range(-1..=1) } else { rng.gen_range(-2..=2) };
    let base = base_power(rng, elliptic, j, p, mult, prec);
    let k = rng.gen_range(1..=mult);
    let Some(LocalDatum::Fl(fm)) = base.local.get(&p).cloned() else { unreachable!() };
    // after direct sums the basis is block ordered: index (block, copy)
    // so the quotient acts by C on the copy index within each block of X
    let w = random_unimodular(rng, mult, 5);
    let c0 = RationalMatrix::from_fn(k, mult, |i, jj| {
        if i == jj {
            BigRational::one()
        } else if jj >= k {
            rat(rng.gen_range(-3..=3))
        } else {
            BigRational::zero()
        }
    });
    let c = c0.mul(&w.inverse().unwrap());
    let id_d = RationalMatrix::identity(d);
    let q = id_d.kron(&c);
    let phi_x = if elliptic {
        RationalMatrix::from_fn(d, d, |i, jj| fm.phi().get(i * mult, jj * mult).clone())
    } else {
        RationalMatrix::scalar(1, fm.phi().get(0, 0))
    };
    let phi_u = phi_x.kron(&RationalMatrix::identity(k));
    let (a, b) = base.window();
    let u_filtration: BTreeMap<i64, RationalMatrix> = (a + 1..b)
        .map(|i| {
            let step = fm.step(i);
            (i, motive_core::lines::LocalLattice::new(p, &q.mul(step.basis())).basis().clone())
        })
        .collect();
    // Betti rows of the iterated direct sum are copy-major, de Rham columns block-major
    let mut q_b = c.kron(&id_d);
    let mut m = base;
    let mut q_dr = q;
    // random Betti mixing
    let g = random_unimodular(rng, m.rank(), 6);
    m = rebase_betti(&m, &g);
    q_b = q_b.mul(&g.inverse().unwrap());
    // random p-unimodular adapted de Rham rebasing
    let h = random_adapted(rng, &m, true);
    m = m.rebased(&h).unwrap();
    q_dr = q_dr.mul(&h);
    let spec = QuotientSpec {
        p,
        n,
        q_dr,
        q_b,
        phi_u,
        u_filtration: u_filtration.into_iter().filter(|(_, g)| g.cols() > 0).collect(),
    };
    (m, spec)
}

/// `Z^n` lattice with a random invertible `φ` and adapted filtration, for
/// strong-divisibility trials. Roughly half the instances are built to pass.
pub fn random_fl_instance(rng: &mut ChaCha8Rng, p: u64, n: usize) -> FilPhiModule {
    let pi = p as i64;
    let len = rng.gen_range(1..=(pi - 1).min(3));
    let a = rng.gen_range(-1..=0);
    let b = a + len;
    // jump index r_j for each basis vector, nondecreasing
    let mut jumps: Vec<i64> = (0..n).map(|_| rng.gen_range(a..b)).collect();
    jumps.sort();
    let filtration: BTreeMap<i64, RationalMatrix> = (a + 1..b)
        .map(|i| {
            let cols: Vec<usize> = (0..n).filter(|&j| jumps[j] >= i).collect();
            let g = RationalMatrix::from_fn(n, cols.len(), |r, c| {
                if r == cols[c] {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            });
            (i, g)
        })
        .collect();
    let bound = pi * pi;
    let phi = loop {
        let phi = if rng.gen_bool(0.5) {
            // U diag(p^{r_j}) with U invertible mod p
            let u = loop {
                let u = RationalMatrix::from_fn(n, n, |_, _| rat(rng.gen_range(-bound..=bound)));
                let d = u.det();
                if !d.is_zero() && !(d.numer() % BigInt::from(p)).is_zero() {
                    break u;
                }
            };
            let diag: Vec<BigRational> = jumps.iter().map(|&r| pow_p(p, r)).collect();
            u.mul(&RationalMatrix::diagonal(&diag))
        } else {
            RationalMatrix::from_fn(n, n, |_, _| {
                BigRational::new(
                    BigInt::from(rng.gen_range(-bound..=bound)),
                    BigInt::from(pi.pow(rng.gen_range(0..=2))),
                )
            })
        };
        if !phi.det().is_zero() {
            break phi;
        }
    };
    FilPhiModule::new(p, &RationalMatrix::identity(n), phi, (a, b), &filtration).unwrap()
}

pub fn pow_p(p: u64, e: i64) -> BigRational {
    let pb = BigInt::from(p);
    if e >= 0 {
        BigRational::from_integer(pb.pow(e as u32))
    } else {
        BigRational::new(BigInt::one(), pb.pow((-e) as u32))
    }
}

/// Strong divisibility by brute force: every generator `p^{-i} φ x`
/// (`x` in a basis of `D^i`) lies in `D = Z_p^n`, and their reductions span
/// `F_p^n`, checked by enumerating the span.
pub fn strong_divisibility_oracle(m: &FilPhiModule) -> bool {
    let p = m.prime();
    let n = m.rank();
    let (a, b) = m.window();
    let mut gens: Vec<Vec<u64>> = Vec::new();
    for i in a..b {
        let step = m.step(i);
        for j in 0..step.rank() {
            let x: Vec<BigRational> = step.basis().column(j);
            let y = m.phi().mul_vec(&x);
            let mut red = Vec::with_capacity(n);
            for v in y {
                let v = v * pow_p(p, -i);
                let den = v.denom().clone();
                if (&den % BigInt::from(p)).is_zero() {
                    return false;
                }
                let pb = BigInt::from(p);
                let inv = den.modinv(&pb).unwrap();
                let r = ((v.numer() * inv) % &pb + &pb) % &pb;
                red.push(u64::try_from(&r).unwrap());
            }
            gens.push(red);
        }
    }
    // breadth-first closure of the F_p-span
    let total = (p as usize).pow(n as u32);
    let index = |v: &[u64]| v.iter().fold(0usize, |acc, &x| acc * p as usize + x as usize);
    let mut seen = vec![false; total];
    let zero = vec![0u64; n];
    seen[index(&zero)] = true;
    let mut queue = vec![zero];
    while let Some(v) = queue.pop() {
        for g in &gens {
            let w: Vec<u64> = v.iter().zip(g).map(|(x, y)| (x + y) % p).collect();
            let k = index(&w);
            if !seen[k] {
                seen[k] = true;
                queue.push(w);
            }
        }
    }
    seen.iter().all(|&s| s)
}
