//! Dense complex matrices and the Hermitian machinery built on them.
//!
//! Everything here is sized for small problems (n up to ~16): storage is a
//! flat row-major `Vec<Complex64>` and products are the naive triple loop.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub type C64 = Complex64;

/// Relative tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerances for the unit-norm PSD class.
pub const PSD_EIG_TOL: f64 = 1e-10;
pub const UNIT_NORM_TOL: f64 = 1e-10;
/// Default relative rank threshold for [`pseudo_inverse`].
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_OFF_TOL: f64 = 1e-13;

/// Dense `n x n` complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMat {
    n: usize,
    data: Vec<C64>,
}

impl ComplexMat {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "matrix dimension must be positive");
        Self {
            n,
            data: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting non-finite values.
    pub fn from_row_major(n: usize, data: Vec<C64>) -> Result<Self> {
        if n == 0 {
            return Err(LabError::Schema {
                field: "n",
                reason: "dimension must be at least 1".into(),
            });
        }
        if data.len() != n * n {
            return Err(LabError::DimensionMismatch {
                left: data.len(),
                right: n * n,
            });
        }
        if let Some(pos) = data
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(LabError::NonFinite {
                row: pos / n,
                col: pos % n,
            });
        }
        Ok(Self { n, data })
    }

    /// Real matrix from row-major entries.
    pub fn from_real(n: usize, re: &[f64]) -> Result<Self> {
        Self::from_row_major(n, re.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    /// Matrix unit `E_rs`: a single 1 at `(r, s)`.
    pub fn unit(n: usize, r: usize, s: usize) -> Self {
        let mut m = Self::zeros(n);
        m[(r, s)] = C64::new(1.0, 0.0);
        m
    }

    /// Rank-one `v v*`.
    pub fn outer(v: &[C64]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn frob_norm(&self) -> f64 {
        frob_norm(self)
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&z| z * c).collect(),
        }
    }

    pub fn scale_re(&self, c: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&z| z * c).collect(),
        }
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: C64, other: &ComplexMat) {
        assert_eq!(self.n, other.n);
        for (x, &y) in self.data.iter_mut().zip(&other.data) {
            *x += c * y;
        }
    }

    pub fn matmul(&self, other: &ComplexMat) -> ComplexMat {
        assert_eq!(self.n, other.n, "matmul dimension mismatch");
        let n = self.n;
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let out_row = &mut out[i * n..(i + 1) * n];
            for (l, &a) in row.iter().enumerate() {
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let other_row = &other.data[l * n..(l + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(other_row) {
                    *o += a * b;
                }
            }
        }
        ComplexMat { n, data: out }
    }

    /// `Tr[self * other]` without forming the product.
    pub fn trace_product(&self, other: &ComplexMat) -> C64 {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for l in 0..n {
                acc += self.data[i * n + l] * other.data[l * n + i];
            }
        }
        acc
    }

    /// Real inner product `Re Tr[self * other*]`.
    pub fn inner_re(&self, other: &ComplexMat) -> f64 {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a * b.conj()).re)
            .sum()
    }

    pub fn commutator(&self, other: &ComplexMat) -> ComplexMat {
        &self.matmul(other) - &other.matmul(self)
    }

    pub fn powi(&self, p: usize) -> ComplexMat {
        let mut out = ComplexMat::identity(self.n);
        for _ in 0..p {
            out = out.matmul(self);
        }
        out
    }

    /// `||M - M*||`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub(crate) fn check_same_dim(&self, other: &ComplexMat) -> Result<()> {
        if self.n != other.n {
            return Err(LabError::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMat {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

impl Add for &ComplexMat {
    type Output = ComplexMat;
    fn add(self, rhs: &ComplexMat) -> ComplexMat {
        assert_eq!(self.n, rhs.n);
        ComplexMat {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMat {
    type Output = ComplexMat;
    fn sub(self, rhs: &ComplexMat) -> ComplexMat {
        assert_eq!(self.n, rhs.n);
        ComplexMat {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &ComplexMat {
    type Output = ComplexMat;
    fn mul(self, rhs: &ComplexMat) -> ComplexMat {
        self.matmul(rhs)
    }
}

impl Neg for &ComplexMat {
    type Output = ComplexMat;
    fn neg(self) -> ComplexMat {
        self.scale_re(-1.0)
    }
}

impl fmt::Debug for ComplexMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMat({}x{}) [", self.n, self.n)?;
        for i in 0..self.n {
            write!(f, "  ")?;
            for j in 0..self.n {
                let z = self[(i, j)];
                write!(f, "{:>+.4e}{:+.4e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// On-disk representation: `{ "n": int, "re": [...], "im": [...] }`, row-major.
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for ComplexMat {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson {
            n: self.n,
            re: self.data.iter().map(|z| z.re).collect(),
            im: self.data.iter().map(|z| z.im).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMat {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(d)?;
        ComplexMat::try_from_parts(raw.n, &raw.re, &raw.im).map_err(serde::de::Error::custom)
    }
}

impl ComplexMat {
    /// Validates the split real/imaginary layout used by the matrix file format.
    pub fn try_from_parts(n: usize, re: &[f64], im: &[f64]) -> Result<Self> {
        if n == 0 {
            return Err(LabError::Schema {
                field: "n",
                reason: "dimension must be at least 1".into(),
            });
        }
        let want = n * n;
        if re.len() != want {
            return Err(LabError::Schema {
                field: "re",
                reason: format!("expected {want} entries, found {}", re.len()),
            });
        }
        if im.len() != want {
            return Err(LabError::Schema {
                field: "im",
                reason: format!("expected {want} entries, found {}", im.len()),
            });
        }
        ComplexMat::from_row_major(
            n,
            re.iter().zip(im).map(|(&r, &i)| C64::new(r, i)).collect(),
        )
    }
}

/// `||M|| = Tr[M M*]^{1/2}`.
pub fn frob_norm(m: &ComplexMat) -> f64 {
    m.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Relative error `|x - y| / max(1, |x|, |y|)`.
pub fn rel_err(x: f64, y: f64) -> f64 {
    (x - y).abs() / 1f64.max(x.abs()).max(y.abs())
}

pub fn rel_err_c(x: C64, y: C64) -> f64 {
    (x - y).norm() / 1f64.max(x.norm()).max(y.norm())
}

/// Matrix version of [`rel_err`] in the Frobenius norm.
pub fn rel_err_mat(x: &ComplexMat, y: &ComplexMat) -> f64 {
    frob_norm(&(x - y)) / 1f64.max(frob_norm(x)).max(frob_norm(y))
}

/// Hermitian matrix. Construction symmetrizes small defects and rejects large ones.
#[derive(Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct HermitianMat(ComplexMat);

impl HermitianMat {
    pub fn new(m: ComplexMat) -> Result<Self> {
        let allowed = HERMITIAN_TOL * 1f64.max(frob_norm(&m));
        let defect = m.hermitian_defect();
        if defect.is_nan() || defect > allowed {
            return Err(LabError::NotHermitian { defect, allowed });
        }
        Ok(Self::symmetrize(&m))
    }

    /// `(M + M*) / 2`, unconditionally.
    pub fn symmetrize(m: &ComplexMat) -> Self {
        let n = m.n();
        let mut out = ComplexMat::zeros(n);
        for i in 0..n {
            out[(i, i)] = C64::new(m[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                out[(i, j)] = z;
                out[(j, i)] = z.conj();
            }
        }
        HermitianMat(out)
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        HermitianMat(ComplexMat::from_diag(diag))
    }

    pub fn identity(n: usize) -> Self {
        HermitianMat(ComplexMat::identity(n))
    }

    pub fn zeros(n: usize) -> Self {
        HermitianMat(ComplexMat::zeros(n))
    }

    pub fn as_mat(&self) -> &ComplexMat {
        &self.0
    }

    pub fn into_mat(self) -> ComplexMat {
        self.0
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn norm(&self) -> f64 {
        frob_norm(&self.0)
    }

    /// Real trace.
    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn scale(&self, c: f64) -> Self {
        HermitianMat(self.0.scale_re(c))
    }

    /// Rescales to unit Frobenius norm; `None` for the zero matrix.
    pub fn normalized(&self) -> Option<Self> {
        let nrm = self.norm();
        (nrm > 1e-300).then(|| self.scale(1.0 / nrm))
    }

    pub fn eig(&self) -> Result<Spectrum> {
        herm_eig(self)
    }
}

impl std::ops::Deref for HermitianMat {
    type Target = ComplexMat;
    fn deref(&self) -> &ComplexMat {
        &self.0
    }
}

impl fmt::Debug for HermitianMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Hermitian{:?}", self.0)
    }
}

impl<'de> Deserialize<'de> for HermitianMat {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        HermitianMat::new(ComplexMat::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// Positive semidefinite matrix of unit Frobenius norm.
#[derive(Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct PsdUnit(HermitianMat);

impl PsdUnit {
    pub fn new(h: HermitianMat) -> Result<Self> {
        let nrm = h.norm();
        if (nrm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(LabError::NotPsdUnit(format!("norm {nrm} is not 1")));
        }
        let min = herm_eig(&h)?.min();
        if min < -PSD_EIG_TOL {
            return Err(LabError::NotPsdUnit(format!("minimum eigenvalue {min:e}")));
        }
        Ok(Self(h))
    }

    /// Normalizes a PSD matrix of any positive norm.
    pub fn from_psd(h: &HermitianMat) -> Result<Self> {
        let unit = h
            .normalized()
            .ok_or_else(|| LabError::NotPsdUnit("zero matrix".into()))?;
        Self::new(unit)
    }

    pub fn as_herm(&self) -> &HermitianMat {
        &self.0
    }

    pub fn as_mat(&self) -> &ComplexMat {
        self.0.as_mat()
    }

    pub fn into_herm(self) -> HermitianMat {
        self.0
    }
}

impl std::ops::Deref for PsdUnit {
    type Target = HermitianMat;
    fn deref(&self) -> &HermitianMat {
        &self.0
    }
}

impl fmt::Debug for PsdUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PsdUnit{:?}", self.0 .0)
    }
}

impl<'de> Deserialize<'de> for PsdUnit {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        PsdUnit::new(HermitianMat::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// Eigen-decomposition `M = U diag(eigenvalues) U*`, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub unitary: ComplexMat,
}

impl Spectrum {
    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().expect("nonempty spectrum")
    }

    /// `U f(diag) U*` for an arbitrary map on eigenvalues.
    pub fn reassemble(&self, f: impl Fn(f64) -> f64) -> HermitianMat {
        let n = self.unitary.n();
        let u = &self.unitary;
        let vals: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let m = ComplexMat::from_fn(n, |i, j| {
            (0..n)
                .filter(|&l| vals[l] != 0.0)
                .map(|l| u[(i, l)] * vals[l] * u[(j, l)].conj())
                .sum()
        });
        HermitianMat::symmetrize(&m)
    }
}

fn off_diag_norm(a: &ComplexMat) -> f64 {
    let n = a.n();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Cyclic complex Jacobi eigensolver for Hermitian matrices.
pub fn herm_eig(h: &HermitianMat) -> Result<Spectrum> {
    let n = h.n();
    let mut a = h.as_mat().clone();
    let mut u = ComplexMat::identity(n);
    let target = JACOBI_OFF_TOL * h.norm();

    let mut sweeps = 0;
    let mut off = off_diag_norm(&a);
    while off > target {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(LabError::EigenNoConvergence {
                sweeps,
                residual: off,
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut u, p, q);
            }
        }
        sweeps += 1;
        off = off_diag_norm(&a);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let unitary = ComplexMat::from_fn(n, |i, j| u[(i, order[j])]);
    Ok(Spectrum {
        eigenvalues,
        unitary,
    })
}

/// Annihilates `a[p,q]` with the unitary `V = diag(1, e^{-i phi}) R(theta)` on
/// the `(p, q)` plane, `a <- V* a V`, `u <- u V`.
fn rotate(a: &mut ComplexMat, u: &mut ComplexMat, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Rotation is numerically a no-op; zero it outright.
    if mag <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = C64::new(0.0, 0.0);
        a[(q, p)] = C64::new(0.0, 0.0);
        return;
    }
    let phase = apq / mag;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let e = phase.conj();
    let v_pp = C64::new(c, 0.0);
    let v_pq = C64::new(s, 0.0);
    let v_qp = -e * s;
    let v_qq = e * c;

    let n = a.n();
    for i in 0..n {
        let aip = a[(i, p)];
        let aiq = a[(i, q)];
        a[(i, p)] = aip * v_pp + aiq * v_qp;
        a[(i, q)] = aip * v_pq + aiq * v_qq;
    }
    for j in 0..n {
        let apj = a[(p, j)];
        let aqj = a[(q, j)];
        a[(p, j)] = v_pp.conj() * apj + v_qp.conj() * aqj;
        a[(q, j)] = v_pq.conj() * apj + v_qq.conj() * aqj;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

    for i in 0..n {
        let uip = u[(i, p)];
        let uiq = u[(i, q)];
        u[(i, p)] = uip * v_pp + uiq * v_qp;
        u[(i, q)] = uip * v_pq + uiq * v_qq;
    }
}

/// Nearest PSD matrix by eigenvalue clipping.
pub fn psd_project(h: &HermitianMat) -> Result<HermitianMat> {
    Ok(herm_eig(h)?.reassemble(|l| l.max(0.0)))
}

/// Moore-Penrose inverse on the eigenspaces with `|lambda| > rank_tol * max|lambda|`.
pub fn pseudo_inverse(h: &HermitianMat, rank_tol: f64) -> Result<HermitianMat> {
    let spec = herm_eig(h)?;
    let scale = spec.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
    let cut = rank_tol * scale;
    Ok(spec.reassemble(|l| {
        if l.abs() > cut && l != 0.0 {
            1.0 / l
        } else {
            0.0
        }
    }))
}

/// `C A C*`.
pub fn congruence(c: &ComplexMat, a: &ComplexMat) -> Result<ComplexMat> {
    c.check_same_dim(a)?;
    Ok(c.matmul(a).matmul(&c.adjoint()))
}

/// Principal square root of a PSD matrix (negative rounding noise clipped).
pub fn psd_sqrt(h: &HermitianMat) -> Result<HermitianMat> {
    Ok(herm_eig(h)?.reassemble(|l| l.max(0.0).sqrt()))
}
