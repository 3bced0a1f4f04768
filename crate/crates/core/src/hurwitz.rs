//! Hurwitz products `S_{m,k}(A,B)`: the sum of all length-`m` words in `A`
//! and `B` containing exactly `k` copies of `B`, i.e. the matrix coefficient
//! of `t^k` in `(A + tB)^m`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::matrix::{frob_norm, rel_err_c, ComplexMat, HermitianMat, PsdUnit, C64};
use crate::rng::LabRng;

/// Default refusal threshold for explicit word enumeration.
pub const ENUM_CAP: u128 = 1_000_000;
/// Allowed imaginary part of a coefficient before discarding, relative to its scale.
pub const IMAG_LIMIT: f64 = 1e-8;

pub fn binomial(m: usize, k: usize) -> u128 {
    if k > m {
        return 0;
    }
    let k = k.min(m - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (m - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Every `S_{j,l}(A,B)` for `0 <= l <= j <= depth`.
#[derive(Clone, Debug)]
pub struct HurwitzTable {
    depth: usize,
    a: ComplexMat,
    b: ComplexMat,
    cells: Vec<ComplexMat>,
}

fn tri_index(j: usize, l: usize) -> usize {
    j * (j + 1) / 2 + l
}

impl HurwitzTable {
    /// Builds the table from `S_{j,l} = A S_{j-1,l} + B S_{j-1,l-1}`, with
    /// `S_{0,0} = I` and `S_{j,l} = 0` outside `0 <= l <= j`.
    pub fn build(a: &ComplexMat, b: &ComplexMat, depth: usize) -> Result<Self> {
        a.check_same_dim(b)?;
        let n = a.n();
        let mut cells = Vec::with_capacity(tri_index(depth + 1, 0));
        cells.push(ComplexMat::identity(n));
        for j in 1..=depth {
            for l in 0..=j {
                let mut cell = ComplexMat::zeros(n);
                if l < j {
                    cell = a.matmul(&cells[tri_index(j - 1, l)]);
                }
                if l > 0 {
                    let from_b = b.matmul(&cells[tri_index(j - 1, l - 1)]);
                    cell = &cell + &from_b;
                }
                cells.push(cell);
            }
        }
        Ok(Self {
            depth,
            a: a.clone(),
            b: b.clone(),
            cells,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn a(&self) -> &ComplexMat {
        &self.a
    }

    pub fn b(&self) -> &ComplexMat {
        &self.b
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }

    /// `S_{j,l}`; `None` when `l > j` or `j` exceeds the table depth.
    pub fn cell(&self, j: usize, l: usize) -> Option<&ComplexMat> {
        (j <= self.depth && l <= j).then(|| &self.cells[tri_index(j, l)])
    }

    /// `S_{j,l}` with the zero convention for `l > j`.
    pub fn s(&self, j: usize, l: usize) -> Result<ComplexMat> {
        if j > self.depth {
            return Err(LabError::TableTooShallow {
                depth: self.depth,
                m: j,
                k: l,
            });
        }
        Ok(self
            .cell(j, l)
            .cloned()
            .unwrap_or_else(|| ComplexMat::zeros(self.n())))
    }

    /// `Tr[S_{j,l}]`, zero for `l > j`.
    pub fn trace(&self, j: usize, l: usize) -> Result<C64> {
        if j > self.depth {
            return Err(LabError::TableTooShallow {
                depth: self.depth,
                m: j,
                k: l,
            });
        }
        Ok(self
            .cell(j, l)
            .map_or(C64::new(0.0, 0.0), ComplexMat::trace))
    }

    pub fn iter_cells(&self) -> impl Iterator<Item = (usize, usize, &ComplexMat)> {
        (0..=self.depth)
            .flat_map(move |j| (0..=j).map(move |l| (j, l, &self.cells[tri_index(j, l)])))
    }
}

pub fn hurwitz_table(a: &ComplexMat, b: &ComplexMat, m: usize) -> Result<HurwitzTable> {
    HurwitzTable::build(a, b, m)
}

/// Next integer with the same popcount (Gosper's hack).
fn next_same_popcount(x: u64) -> u64 {
    let c = x & x.wrapping_neg();
    let r = x + c;
    (((r ^ x) >> 2) / c) | r
}

/// Masks of `m` bits with `k` ones, ascending.
fn masks(m: usize, k: usize) -> impl Iterator<Item = u64> {
    let first = if k == 0 { 0 } else { (1u64 << k) - 1 };
    let limit = 1u128 << m;
    let mut cur = Some(first);
    std::iter::from_fn(move || {
        let x = cur?;
        cur = if k == 0 || k == m {
            None
        } else {
            let nx = next_same_popcount(x);
            ((nx as u128) < limit).then_some(nx)
        };
        Some(x)
    })
}

fn word_product(a: &ComplexMat, b: &ComplexMat, m: usize, mask: u64) -> ComplexMat {
    let mut prod = ComplexMat::identity(a.n());
    for pos in 0..m {
        let letter = if mask >> pos & 1 == 1 { b } else { a };
        prod = prod.matmul(letter);
    }
    prod
}

/// Explicit sum over all `C(m,k)` words; returns the sum and the number of words.
pub fn hurwitz_enum_counted(
    a: &ComplexMat,
    b: &ComplexMat,
    m: usize,
    k: usize,
    cap: u128,
) -> Result<(ComplexMat, u128)> {
    a.check_same_dim(b)?;
    if k > m {
        return Err(LabError::InvalidArgument(format!(
            "k = {k} exceeds m = {m}"
        )));
    }
    let count = binomial(m, k);
    if count > cap {
        return Err(LabError::EnumerationCap { m, k, count, cap });
    }
    if m > 63 {
        return Err(LabError::InvalidArgument(format!(
            "word length {m} exceeds 63"
        )));
    }
    let mut sum = ComplexMat::zeros(a.n());
    let mut seen = 0u128;
    for mask in masks(m, k) {
        sum = &sum + &word_product(a, b, m, mask);
        seen += 1;
    }
    Ok((sum, seen))
}

pub fn hurwitz_enum(a: &ComplexMat, b: &ComplexMat, m: usize, k: usize) -> Result<ComplexMat> {
    hurwitz_enum_counted(a, b, m, k, ENUM_CAP).map(|(s, _)| s)
}

/// `Tr[S_{m,k}(A,B)]` for `k = 0..=m`: the coefficients of `p(t) = Tr[(A + tB)^m]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffVector {
    pub m: usize,
    pub coeffs: Vec<f64>,
    /// Largest discarded imaginary part, relative to the coefficient's scale.
    #[serde(skip)]
    pub max_imag_rel: f64,
}

/// Magnitude bound `C(m,k) sqrt(n) ||A||^{m-k} ||B||^k` on `|Tr S_{m,k}|`, floored at 1.
pub fn trace_scale(a: &ComplexMat, b: &ComplexMat, m: usize, k: usize) -> f64 {
    let bound = binomial(m, k) as f64
        * (a.n() as f64).sqrt()
        * frob_norm(a).powi((m - k) as i32)
        * frob_norm(b).powi(k as i32);
    bound.max(1.0)
}

pub fn coefficients_from_table(table: &HurwitzTable, m: usize) -> Result<CoeffVector> {
    let mut coeffs = Vec::with_capacity(m + 1);
    let mut max_imag_rel: f64 = 0.0;
    for k in 0..=m {
        let tr = table.trace(m, k)?;
        let scale = trace_scale(table.a(), table.b(), m, k);
        let rel = tr.im.abs() / scale;
        if rel.is_nan() || rel > IMAG_LIMIT {
            return Err(LabError::ImaginaryTrace {
                k,
                defect: tr.im.abs(),
                limit: IMAG_LIMIT * scale,
            });
        }
        max_imag_rel = max_imag_rel.max(rel);
        coeffs.push(tr.re);
    }
    Ok(CoeffVector {
        m,
        coeffs,
        max_imag_rel,
    })
}

pub fn coefficients(a: &HermitianMat, b: &HermitianMat, m: usize) -> Result<CoeffVector> {
    let table = HurwitzTable::build(a.as_mat(), b.as_mat(), m)?;
    coefficients_from_table(&table, m)
}

/// A word of length `m`; letter `i` is `B` when `letters[i]` is set.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct WordSpec {
    letters: Vec<bool>,
}

impl WordSpec {
    pub fn new(letters: Vec<bool>) -> Self {
        Self { letters }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Number of `B` letters.
    pub fn b_count(&self) -> usize {
        self.letters.iter().filter(|&&x| x).count()
    }

    pub fn letters(&self) -> &[bool] {
        &self.letters
    }

    /// Cyclic shift by `by` letters to the left.
    pub fn rotated(&self, by: usize) -> Self {
        let mut letters = self.letters.clone();
        if !letters.is_empty() {
            let by = by % letters.len();
            letters.rotate_left(by);
        }
        Self { letters }
    }

    /// The word as letters, e.g. `ABABBA`.
    pub fn as_letters(&self) -> String {
        self.letters
            .iter()
            .map(|&x| if x { 'B' } else { 'A' })
            .collect()
    }

    pub fn product(&self, a: &ComplexMat, b: &ComplexMat) -> ComplexMat {
        let mut prod = ComplexMat::identity(a.n());
        for &is_b in &self.letters {
            prod = prod.matmul(if is_b { b } else { a });
        }
        prod
    }
}

impl fmt::Display for WordSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &x in &self.letters {
            f.write_str(if x { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for WordSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WordSpec({})", self.as_letters())
    }
}

impl FromStr for WordSpec {
    type Err = LabError;

    /// Accepts a 0/1 string (`010110`) or letters (`ABABBA`).
    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| match c {
                '0' | 'A' | 'a' => Ok(false),
                '1' | 'B' | 'b' => Ok(true),
                other => Err(LabError::InvalidArgument(format!(
                    "word character {other:?} is not 0/1 or A/B"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        if letters.is_empty() {
            return Err(LabError::InvalidArgument("empty word".into()));
        }
        Ok(Self { letters })
    }
}

impl Serialize for WordSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for WordSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Trace of the word's product taken in order.
pub fn word_trace(a: &ComplexMat, b: &ComplexMat, w: &WordSpec) -> Result<C64> {
    a.check_same_dim(b)?;
    Ok(w.product(a, b).trace())
}

/// Best (lowest `Re Tr`) instance found by [`negative_word_search`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WordSearchResult {
    pub word: WordSpec,
    pub trials: u64,
    pub seed: u64,
    pub trace: f64,
    #[serde(rename = "A")]
    pub a: PsdUnit,
    #[serde(rename = "B")]
    pub b: PsdUnit,
}

/// Gram factor of a unit PSD matrix; the matrix is `L L* / ||L L*||`.
#[derive(Clone)]
struct Factor(ComplexMat);

impl Factor {
    fn matrix(&self) -> Option<ComplexMat> {
        let g = self.0.matmul(&self.0.adjoint());
        let nrm = frob_norm(&g);
        (nrm > 1e-300).then(|| g.scale_re(1.0 / nrm))
    }

    fn perturbed(&self, rng: &mut LabRng, sigma: f64) -> Factor {
        let scale = sigma * frob_norm(&self.0);
        let mut out = self.0.clone();
        out.axpy(C64::new(scale, 0.0), &rng.ginibre(self.0.n()));
        Factor(out)
    }

    fn random(rng: &mut LabRng, n: usize) -> Factor {
        let rank = 1 + rng.below(n);
        Factor(ComplexMat::from_fn(n, |_, j| {
            if j < rank {
                rng.complex_gaussian()
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }
}

fn evaluate(w: &WordSpec, fa: &Factor, fb: &Factor) -> Option<(f64, ComplexMat, ComplexMat)> {
    let a = fa.matrix()?;
    let b = fb.matrix()?;
    let tr = w.product(&a, &b).trace().re;
    tr.is_finite().then_some((tr, a, b))
}

const SEARCH_BATCH: u64 = 50;
const SEARCH_EPISODE: u64 = 3000;
const SEARCH_SIGMA0: f64 = 0.3;
const SEARCH_SIGMA_MIN: f64 = 1e-7;

/// Seeded search for unit PSD pairs minimizing `Re Tr[w(A,B)]`.
///
/// The trial budget is spent in episodes. Each episode samples a batch of
/// Gram matrices `G G*` of random rank, then runs a stochastic local descent
/// in Gram-factor coordinates from the best of the batch, with a
/// success-driven step size, until the step collapses or the episode budget
/// runs out. Every evaluation counts as one trial.
pub fn negative_word_search(
    w: &WordSpec,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<WordSearchResult> {
    if trials == 0 {
        return Err(LabError::InvalidArgument(
            "trials must be at least 1".into(),
        ));
    }
    if n == 0 {
        return Err(LabError::InvalidArgument(
            "dimension must be at least 1".into(),
        ));
    }
    let mut rng = LabRng::new(seed);
    let mut best: Option<(f64, ComplexMat, ComplexMat)> = None;
    let mut used = 0u64;

    while used < trials {
        let episode_end = (used + SEARCH_EPISODE).min(trials);

        let mut incumbent: Option<(f64, Factor, Factor)> = None;
        let batch_end = (used + SEARCH_BATCH).min(episode_end);
        while used < batch_end {
            let fa = Factor::random(&mut rng, n);
            let fb = Factor::random(&mut rng, n);
            used += 1;
            if let Some(ev) = evaluate(w, &fa, &fb) {
                if incumbent.as_ref().is_none_or(|i| ev.0 < i.0) {
                    incumbent = Some((ev.0, fa, fb));
                }
                keep_lower(&mut best, ev);
            }
        }

        let mut sigma = SEARCH_SIGMA0;
        while used < episode_end && sigma >= SEARCH_SIGMA_MIN {
            let Some((value, fa, fb)) = incumbent.as_ref() else {
                break;
            };
            let (ca, cb) = match rng.below(3) {
                0 => (fa.perturbed(&mut rng, sigma), fb.clone()),
                1 => (fa.clone(), fb.perturbed(&mut rng, sigma)),
                _ => (fa.perturbed(&mut rng, sigma), fb.perturbed(&mut rng, sigma)),
            };
            used += 1;
            match evaluate(w, &ca, &cb) {
                Some(ev) if ev.0 < *value => {
                    incumbent = Some((ev.0, ca, cb));
                    keep_lower(&mut best, ev);
                    sigma *= 1.5;
                }
                _ => sigma *= 0.97,
            }
        }
    }

    let (trace, a, b) = best.expect("at least one finite evaluation");
    Ok(WordSearchResult {
        word: w.clone(),
        trials,
        seed,
        trace,
        a: PsdUnit::new(HermitianMat::symmetrize(&a))?,
        b: PsdUnit::new(HermitianMat::symmetrize(&b))?,
    })
}

fn keep_lower(
    best: &mut Option<(f64, ComplexMat, ComplexMat)>,
    cand: (f64, ComplexMat, ComplexMat),
) {
    if best.as_ref().is_none_or(|b| cand.0 < b.0) {
        *best = Some(cand);
    }
}

/// Worst relative error of the two trace identities
/// `Tr S_{j,l} = j/(j-l) Tr[A S_{j-1,l}]` (for `j > l`) and
/// `Tr S_{j,l} = j/l Tr[B S_{j-1,l-1}]` (for `l > 0`), over all `1 <= j <= m`.
pub fn check_trace_lemmas(a: &ComplexMat, b: &ComplexMat, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(LabError::InvalidArgument("m must be at least 1".into()));
    }
    let table = HurwitzTable::build(a, b, m)?;
    let mut worst: f64 = 0.0;
    for j in 1..=m {
        for l in 0..=j {
            let lhs = table.trace(j, l)?;
            if j > l {
                let rhs = a.trace_product(&table.s(j - 1, l)?) * (j as f64 / (j - l) as f64);
                worst = worst.max(rel_err_c(lhs, rhs));
            }
            if l > 0 {
                let rhs = b.trace_product(&table.s(j - 1, l - 1)?) * (j as f64 / l as f64);
                worst = worst.max(rel_err_c(lhs, rhs));
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::rel_err_mat;

    fn pair(seed: u64, n: usize) -> (ComplexMat, ComplexMat) {
        let mut rng = LabRng::new(seed);
        (rng.ginibre(n), rng.ginibre(n))
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 3), 20);
        assert_eq!(binomial(12, 6), 924);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(40, 20), 137_846_528_820);
    }

    #[test]
    fn gosper_masks_ascend_with_fixed_popcount() {
        let all: Vec<u64> = masks(5, 2).collect();
        assert_eq!(all.len(), 10);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert!(all.iter().all(|x| x.count_ones() == 2 && *x < 32));
        assert_eq!(masks(4, 0).collect::<Vec<_>>(), vec![0]);
        assert_eq!(masks(4, 4).collect::<Vec<_>>(), vec![15]);
    }

    #[test]
    fn table_small_cells() {
        let (a, b) = pair(1, 3);
        let t = hurwitz_table(&a, &b, 3).unwrap();
        assert_eq!(t.cell(0, 0).unwrap(), &ComplexMat::identity(3));
        assert_eq!(t.cell(1, 0).unwrap(), &a);
        assert_eq!(t.cell(1, 1).unwrap(), &b);
        let ab_ba = &a.matmul(&b) + &b.matmul(&a);
        assert!(rel_err_mat(t.cell(2, 1).unwrap(), &ab_ba) < 1e-14);
        assert!(rel_err_mat(t.cell(3, 0).unwrap(), &a.powi(3)) < 1e-14);
        assert!(t.cell(2, 3).is_none());
        assert!(t.s(4, 1).is_err());
    }

    #[test]
    fn commuting_diagonal_pair_collapses() {
        let a = ComplexMat::from_diag(&[0.5, -1.0, 2.0]);
        let b = ComplexMat::from_diag(&[1.5, 0.25, -0.5]);
        let t = hurwitz_table(&a, &b, 7).unwrap();
        for (j, l, cell) in t.iter_cells() {
            let want = a
                .powi(j - l)
                .matmul(&b.powi(l))
                .scale_re(binomial(j, l) as f64);
            assert!(rel_err_mat(cell, &want) < 1e-13, "({j},{l})");
        }
    }

    #[test]
    fn enumeration_counts_and_matches() {
        let (a, b) = pair(2, 3);
        let (s, count) = hurwitz_enum_counted(&a, &b, 6, 3, ENUM_CAP).unwrap();
        assert_eq!(count, 20);
        let t = hurwitz_table(&a, &b, 6).unwrap();
        assert!(rel_err_mat(&s, t.cell(6, 3).unwrap()) < 1e-10);
        let s21 = hurwitz_enum(&a, &b, 2, 1).unwrap();
        assert!(rel_err_mat(&s21, &(&a.matmul(&b) + &b.matmul(&a))) < 1e-14);
    }

    #[test]
    fn enumeration_cap_refuses() {
        let (a, b) = pair(3, 2);
        match hurwitz_enum_counted(&a, &b, 10, 5, 100) {
            Err(LabError::EnumerationCap { count, .. }) => assert_eq!(count, 252),
            other => panic!("unexpected {other:?}"),
        }
        let err = hurwitz_enum(&a, &b, 30, 15).unwrap_err();
        assert!(err.to_string().contains("155117520"));
    }

    #[test]
    fn coefficients_identity_and_zero() {
        let i = HermitianMat::identity(3);
        let c = coefficients(&i, &i, 5).unwrap();
        for k in 0..=5 {
            assert!((c.coeffs[k] - 3.0 * binomial(5, k) as f64).abs() < 1e-12);
        }
        let a = HermitianMat::from_diag(&[0.5, 0.25, 1.0]);
        let c = coefficients(&a, &HermitianMat::zeros(3), 4).unwrap();
        assert!((c.coeffs[0] - (0.5f64.powi(4) + 0.25f64.powi(4) + 1.0)).abs() < 1e-14);
        assert!(c.coeffs[1..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn imaginary_breach_is_an_error() {
        let (a, b) = pair(4, 3);
        let t = hurwitz_table(&a, &b, 4).unwrap();
        assert!(matches!(
            coefficients_from_table(&t, 4),
            Err(LabError::ImaginaryTrace { .. })
        ));
    }

    #[test]
    fn coefficient_json_shape() {
        let i = HermitianMat::identity(2);
        let c = coefficients(&i, &i, 2).unwrap();
        assert_eq!(
            serde_json::to_string(&c).unwrap(),
            r#"{"m":2,"coeffs":[2.0,4.0,2.0]}"#
        );
    }

    #[test]
    fn word_parsing_and_display() {
        let w: WordSpec = "ABABBA".parse().unwrap();
        assert_eq!(w.to_string(), "010110");
        assert_eq!(w.b_count(), 3);
        assert_eq!("010110".parse::<WordSpec>().unwrap(), w);
        assert!("01x".parse::<WordSpec>().is_err());
        assert_eq!(serde_json::to_string(&w).unwrap(), "\"010110\"");
    }

    #[test]
    fn word_trace_examples() {
        let (a, b) = pair(5, 3);
        let w: WordSpec = "AAAA".parse().unwrap();
        let tr = word_trace(&a, &b, &w).unwrap();
        assert!(rel_err_c(tr, a.powi(4).trace()) < 1e-12);

        let w: WordSpec = "ABABBA".parse().unwrap();
        let base = word_trace(&a, &b, &w).unwrap();
        for r in 1..6 {
            assert!(rel_err_c(base, word_trace(&a, &b, &w.rotated(r)).unwrap()) < 1e-10);
        }

        let da = ComplexMat::from_diag(&[0.3, 0.9, 0.1]);
        let db = ComplexMat::from_diag(&[0.7, 0.2, 0.6]);
        let want = da.powi(3).matmul(&db.powi(3)).trace();
        assert!(rel_err_c(word_trace(&da, &db, &w).unwrap(), want) < 1e-14);
    }

    #[test]
    fn short_and_square_words_never_go_negative() {
        let aabb: WordSpec = "AABB".parse().unwrap();
        let r = negative_word_search(&aabb, 3, 2000, 3).unwrap();
        assert!(r.trace >= 0.0);
        let w5: WordSpec = "ABABB".parse().unwrap();
        let r = negative_word_search(&w5, 3, 2000, 3).unwrap();
        assert!(r.trace >= -1e-10);
    }

    #[test]
    fn search_is_deterministic() {
        let w: WordSpec = "ABABBA".parse().unwrap();
        let r1 = negative_word_search(&w, 3, 500, 11).unwrap();
        let r2 = negative_word_search(&w, 3, 500, 11).unwrap();
        assert_eq!(r1.trace.to_bits(), r2.trace.to_bits());
        assert_eq!(r1.a, r2.a);
    }

    #[test]
    fn trace_lemmas_hold() {
        let (a, b) = pair(6, 4);
        assert!(check_trace_lemmas(&a, &b, 8).unwrap() < 1e-10);
        assert!(check_trace_lemmas(&a, &a, 8).unwrap() < 1e-12);
        let da = ComplexMat::from_diag(&[0.3, -0.9]);
        let db = ComplexMat::from_diag(&[0.7, 0.2]);
        assert!(check_trace_lemmas(&da, &db, 10).unwrap() < 1e-14);
    }
}
