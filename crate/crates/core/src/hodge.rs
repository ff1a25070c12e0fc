//! Pure Hodge structures and the canonical metric on their determinant line.
//!
//! For a Hodge structure `(H_Z, F)` of weight `w` the line
//! `L(H) = ⊗_r (det F^r/F^{r+1})^{⊗r}` carries the metric `|s| = |z|^{1/2}`,
//! where `s ⊗ s̄ = z·e` and `e` generates `(det H_Z)^{⊗w}`. With `b_r` a basis
//! of `H^{r,w-r}`, `δ = det[b_r]_r` and `conj(b_{w-r}) = λ_r b_r` in
//! `det H^{r,w-r}`, one has `z = δ^w ∏_r λ_r^{w-r}`. The sign of `z` depends on
//! an orientation of `e` and is never reported.

use std::collections::BTreeMap;

use crate::ball::{Complex, Real};
use crate::cmatrix::CMatrix;
use crate::error::{Error, Result};

/// Rank threshold for subspace computations at a given precision.
pub fn rank_threshold(prec: u32) -> f64 {
    2f64.powi(-((prec / 2) as i32))
}

/// Integral Hodge structure on `Z^n` with filtration given by spanning columns.
#[derive(Clone, Debug)]
pub struct HodgeStructure {
    n: usize,
    w: i64,
    r_min: i64,
    /// `F^{r_min + t}` for `t = 0..steps.len()`; the last step is zero.
    steps: Vec<CMatrix>,
}

impl HodgeStructure {
    /// Build from filtration steps `F^{r_min}, F^{r_min+1}, ..., 0`.
    pub fn new(w: i64, r_min: i64, steps: Vec<CMatrix>) -> Result<HodgeStructure> {
        let Some(first) = steps.first() else {
            return Err(Error::Invalid("filtration needs at least one step".into()));
        };
        let n = first.rows();
        if steps.iter().any(|s| s.rows() != n) {
            return Err(Error::Dimension("filtration steps live in different ambient spaces".into()));
        }
        if steps.last().map(|s| s.cols()) != Some(0) {
            return Err(Error::Invalid("last filtration step must be zero".into()));
        }
        let prec = first.precision();
        let thr = rank_threshold(prec);
        if first.cols() != n || first.rank(thr)? != n {
            return Err(Error::Invalid("first filtration step must be the whole space".into()));
        }
        for (t, pair) in steps.windows(2).enumerate() {
            let (big, small) = (&pair[0], &pair[1]);
            let index = r_min + t as i64 + 1;
            if small.cols() > 0 && small.rank(thr)? != small.cols() {
                return Err(Error::Invalid(format!("spanning columns of F^{index} are dependent")));
            }
            if small.cols() > big.cols() || big.hstack(small).rank(thr)? != big.cols() {
                return Err(Error::NotNested { index });
            }
        }
        Ok(HodgeStructure { n, w, r_min, steps })
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn weight(&self) -> i64 {
        self.w
    }

    /// `(r_min, r_max)` with `F^{r_min} = C^n` and `F^{r_max} = 0`.
    pub fn window(&self) -> (i64, i64) {
        (self.r_min, self.r_min + self.steps.len() as i64 - 1)
    }

    pub fn precision(&self) -> u32 {
        self.steps[0].precision()
    }

    pub fn filtration(&self, r: i64) -> CMatrix {
        let (lo, hi) = self.window();
        if r <= lo {
            self.steps[0].clone()
        } else if r >= hi {
            CMatrix::zeros(self.n, 0, self.precision())
        } else {
            self.steps[(r - lo) as usize].clone()
        }
    }

    /// Basis of `F^r ∩ conj(F^{w-r})`.
    fn piece(&self, r: i64) -> Result<CMatrix> {
        let prec = self.precision();
        let f = self.filtration(r);
        let g = self.filtration(self.w - r).conj();
        if f.cols() == 0 || g.cols() == 0 {
            return Ok(CMatrix::zeros(self.n, 0, prec));
        }
        let stacked = f.hstack(&g.neg());
        let k = stacked.kernel(rank_threshold(prec))?;
        let x = CMatrix::from_fn(f.cols(), k.cols(), |i, j| k.get(i, j).clone());
        Ok(f.mul(&x))
    }
}

#[derive(Clone, Debug)]
pub struct PurityReport {
    pub pass: bool,
    pub dims: BTreeMap<i64, usize>,
    /// `|n - Σ dims|`.
    pub defect: usize,
    /// Smallest relative pivot of the assembled decomposition matrix.
    pub min_pivot: f64,
}

/// Bases of the pieces `H^{r,w-r}` (only nonzero pieces are stored).
#[derive(Clone, Debug)]
pub struct HodgeDecomposition {
    pub w: i64,
    pub pieces: BTreeMap<i64, CMatrix>,
}

impl HodgeDecomposition {
    pub fn dims(&self) -> BTreeMap<i64, usize> {
        self.pieces.iter().map(|(&r, b)| (r, b.cols())).collect()
    }

    /// All basis vectors side by side in increasing `r`, with the column
    /// range of each piece.
    pub fn assembled(&self) -> (CMatrix, BTreeMap<i64, std::ops::Range<usize>>) {
        let mut ranges = BTreeMap::new();
        let mut acc: Option<CMatrix> = None;
        let mut start = 0;
        for (&r, b) in &self.pieces {
            ranges.insert(r, start..start + b.cols());
            start += b.cols();
            acc = Some(match acc {
                None => b.clone(),
                Some(a) => a.hstack(b),
            });
        }
        (acc.expect("at least one piece"), ranges)
    }

    /// Replace the basis of `H^{r,w-r}` by `b_r · g`.
    pub fn rebased(&self, r: i64, g: &CMatrix) -> HodgeDecomposition {
        let mut out = self.clone();
        if let Some(b) = out.pieces.get_mut(&r) {
            *b = b.mul(g);
        }
        out
    }
}

fn decompose_unchecked(h: &HodgeStructure) -> Result<(HodgeDecomposition, usize)> {
    let (lo, hi) = h.window();
    let mut pieces = BTreeMap::new();
    let mut total = 0;
    for r in lo..hi {
        let b = h.piece(r)?;
        total += b.cols();
        if b.cols() > 0 {
            pieces.insert(r, b);
        }
    }
    Ok((HodgeDecomposition { w: h.w, pieces }, total))
}

pub fn purity_check(h: &HodgeStructure) -> Result<PurityReport> {
    let (dec, total) = decompose_unchecked(h)?;
    let dims: BTreeMap<i64, usize> = {
        let (lo, hi) = h.window();
        (lo..hi).map(|r| (r, dec.pieces.get(&r).map_or(0, |b| b.cols()))).collect()
    };
    let defect = h.n.abs_diff(total);
    if defect != 0 || dec.pieces.is_empty() {
        return Ok(PurityReport { pass: false, dims, defect, min_pivot: 0.0 });
    }
    let (b, _) = dec.assembled();
    let e = b.echelon(rank_threshold(h.precision()))?;
    let pass = e.pivots.len() == h.n;
    Ok(PurityReport { pass, dims, defect, min_pivot: e.min_pivot })
}

pub fn hodge_decompose(h: &HodgeStructure) -> Result<HodgeDecomposition> {
    let report = purity_check(h)?;
    if !report.pass {
        return Err(Error::NotPure {
            detail: format!("piece dimensions {:?} (defect {})", report.dims, report.defect),
        });
    }
    let (dec, _) = decompose_unchecked(h)?;
    let (b, ranges) = dec.assembled();
    let tol = rank_threshold(h.precision());
    let (lo, hi) = h.window();
    for r in lo + 1..hi {
        let f = h.filtration(r);
        if f.cols() == 0 {
            continue;
        }
        let coords = b.solve(&f)?;
        for (&r2, range) in &ranges {
            if r2 >= r {
                continue;
            }
            if !coords.select_rows(&range.clone().collect::<Vec<_>>()).is_negligible(tol * scale_of(&coords)) {
                return Err(Error::NotPure {
                    detail: format!("F^{r} is not the sum of the pieces H^{{r',w-r'}} with r' >= {r}"),
                });
            }
        }
    }
    Ok(dec)
}

fn scale_of(m: &CMatrix) -> f64 {
    m.entries().iter().map(|c| c.upper_abs().to_f64()).fold(1.0, f64::max)
}

/// The invariant `z` for the generator `⊗_r (det b_r)^{⊗r}` of `L(H)`.
pub fn pairing_scalar(dec: &HodgeDecomposition, prec: u32) -> Result<Complex> {
    let (b, ranges) = dec.assembled();
    let w = dec.w;
    let mut z = Complex::one(prec);
    if w != 0 {
        let delta = b.det()?;
        z = z.mul(&delta.powi(w).ok_or_else(|| exhausted("determinant of the decomposition"))?);
    }
    let tol = rank_threshold(prec);
    for (&r, range) in &ranges {
        if w - r == 0 {
            continue;
        }
        let partner = dec
            .pieces
            .get(&(w - r))
            .ok_or_else(|| Error::NotPure { detail: format!("H^{{{r},{}}} has no conjugate partner", w - r) })?;
        let coords = b.solve(&partner.conj())?;
        let rows: Vec<usize> = range.clone().collect();
        for (&r2, range2) in &ranges {
            if r2 != r
                && !coords.select_rows(&range2.clone().collect::<Vec<_>>()).is_negligible(tol * scale_of(&coords))
            {
                return Err(Error::NotPure {
                    detail: format!("conjugate of H^{{{},{r}}} leaves H^{{{r},{}}}", w - r, w - r),
                });
            }
        }
        let lambda = coords.select_rows(&rows).det()?;
        z = z.mul(&lambda.powi(w - r).ok_or_else(|| exhausted("conjugation scalar"))?);
    }
    Ok(z)
}

fn exhausted(what: &str) -> Error {
    Error::PrecisionExhausted { context: format!("{what} is not certified nonzero") }
}

/// `|z|^{1/2}` as a certified positive real.
fn sqrt_abs(z: &Complex) -> Result<Real> {
    if z.im.is_exact_zero() && z.re.is_exact_one() {
        return Ok(z.re.clone());
    }
    if !z.is_certified_nonzero() {
        return Err(exhausted("pairing scalar"));
    }
    z.abs().sqrt().ok_or_else(|| exhausted("pairing scalar"))
}

/// Metric of `c · ⊗_r (det G_r)^{⊗r}`, where the columns of `graded[r]`
/// lie in `F^r` and lift a basis of `F^r/F^{r+1}`.
pub fn line_metric(h: &HodgeStructure, graded: &BTreeMap<i64, CMatrix>, c: &Complex) -> Result<Real> {
    let dec = hodge_decompose(h)?;
    line_metric_with(h, &dec, graded, c)
}

/// As [`line_metric`], with an explicit choice of decomposition bases.
pub fn line_metric_with(
    h: &HodgeStructure,
    dec: &HodgeDecomposition,
    graded: &BTreeMap<i64, CMatrix>,
    c: &Complex,
) -> Result<Real> {
    let prec = h.precision();
    if !c.is_certified_nonzero() {
        return Err(Error::ZeroVector);
    }
    let z = pairing_scalar(dec, prec)?;
    let mut len = sqrt_abs(&z)?;
    let (b, ranges) = dec.assembled();
    for (&r, g) in graded {
        if g.cols() == 0 {
            continue;
        }
        let range =
            ranges.get(&r).ok_or_else(|| Error::Dimension(format!("graded piece {r} has no Hodge component")))?;
        if range.len() != g.cols() {
            return Err(Error::Dimension(format!(
                "graded piece {r} has dimension {} but h^{r} = {}",
                g.cols(),
                range.len()
            )));
        }
        if r == 0 {
            continue;
        }
        let coords = b.solve(g)?;
        let x = coords.select_rows(&range.clone().collect::<Vec<_>>());
        let d = x.det()?;
        let factor = d.abs().powi(r).ok_or(Error::ZeroVector)?;
        len = len.mul(&factor);
    }
    if !(c.im.is_exact_zero() && c.re.is_exact_one()) {
        len = len.mul(&c.abs());
    }
    Ok(len)
}
