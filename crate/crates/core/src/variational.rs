//! First-order calculus for `f(A,B) = Tr[S_{m,k}(A,B)]` on unit-norm matrices.
//!
//! The directional derivative of `f` in `A` along `H` is `m Tr[H S_{m-1,k}]`
//! and along `B` is `m Tr[H S_{m-1,k-1}]`. Stationary points of `f` restricted
//! to unit-norm PSD (or Hermitian) pairs satisfy
//!
//! ```text
//! A S_{m-1,k}   = A^2 Tr[A S_{m-1,k}]
//! B S_{m-1,k-1} = B^2 Tr[B S_{m-1,k-1}]
//! ```
//!
//! which [`el_residual`] measures.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::hurwitz::HurwitzTable;
use crate::matrix::{frob_norm, rel_err_mat, ComplexMat, HermitianMat};
use crate::rng::LabRng;

/// Unit-norm Hermitian perturbation direction.
#[derive(Clone, Debug)]
pub struct Direction(HermitianMat);

impl Direction {
    pub fn new(h: HermitianMat) -> Result<Self> {
        let nrm = h.norm();
        if (nrm - 1.0).abs() > 1e-12 {
            return Err(LabError::InvalidArgument(format!(
                "direction must have unit norm, found {nrm}"
            )));
        }
        Ok(Self(h))
    }

    pub fn random(rng: &mut LabRng, n: usize) -> Self {
        Self(rng.hermitian_unit(n))
    }

    pub fn as_herm(&self) -> &HermitianMat {
        &self.0
    }
}

fn check_depth(table: &HurwitzTable, m: usize, k: usize) -> Result<()> {
    if m == 0 || table.depth() < m - 1 {
        return Err(LabError::TableTooShallow {
            depth: table.depth(),
            m,
            k,
        });
    }
    Ok(())
}

/// Euclidean gradient of `Re Tr S_{m,k}` with respect to `A`: `m S_{m-1,k}`,
/// symmetrized. Zero when `k = m`.
pub fn grad_a(table: &HurwitzTable, m: usize, k: usize) -> Result<HermitianMat> {
    if k > m {
        return Err(LabError::InvalidArgument(format!(
            "grad_a needs k <= m, got ({m},{k})"
        )));
    }
    check_depth(table, m, k)?;
    let s = table.s(m - 1, k)?;
    Ok(HermitianMat::symmetrize(&s.scale_re(m as f64)))
}

/// Euclidean gradient with respect to `B`: `m S_{m-1,k-1}`, symmetrized.
pub fn grad_b(table: &HurwitzTable, m: usize, k: usize) -> Result<HermitianMat> {
    if k == 0 || k > m {
        return Err(LabError::InvalidArgument(format!(
            "grad_b needs m >= k > 0, got ({m},{k})"
        )));
    }
    check_depth(table, m, k)?;
    let s = table.s(m - 1, k - 1)?;
    Ok(HermitianMat::symmetrize(&s.scale_re(m as f64)))
}

/// Derivative at `x = 0` of `C A C* / ||C A C*||` for a path `C(x)` with
/// `C(0) = I`, `C'(0) = cprime` and `||A|| = 1`:
///
/// `C'A + AC'* - Tr[C'A^2] A - conj(Tr[C'A^2]) A`.
pub fn normalized_congruence_derivative(
    a: &HermitianMat,
    cprime: &ComplexMat,
) -> Result<HermitianMat> {
    a.check_same_dim(cprime)?;
    let nrm = a.norm();
    if (nrm - 1.0).abs() > 1e-10 {
        return Err(LabError::InvalidArgument(format!(
            "congruence derivative needs ||A|| = 1, found {nrm}"
        )));
    }
    let a = a.as_mat();
    let ca = cprime.matmul(a);
    let tr = cprime.matmul(&a.matmul(a)).trace();
    let mut d = &ca + &a.matmul(&cprime.adjoint());
    d.axpy(-(tr + tr.conj()), a);
    Ok(HermitianMat::symmetrize(&d))
}

/// Residuals of the stationarity equations at `(A, B)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ELResidual {
    #[serde(skip)]
    pub r_a: Option<ComplexMat>,
    #[serde(skip)]
    pub r_b: Option<ComplexMat>,
    #[serde(rename = "norm_A")]
    pub norm_a: f64,
    #[serde(rename = "norm_B")]
    pub norm_b: f64,
    /// `Re Tr[A S_{m-1,k}]`
    pub alpha: f64,
    /// `Re Tr[B S_{m-1,k-1}]`
    pub beta: f64,
    #[serde(skip)]
    pub alpha_imag: f64,
    #[serde(skip)]
    pub beta_imag: f64,
}

pub(crate) fn el_residual_from_table(
    a: &ComplexMat,
    b: &ComplexMat,
    table: &HurwitzTable,
    m: usize,
    k: usize,
) -> Result<ELResidual> {
    if !(m > k && k > 0) {
        return Err(LabError::InvalidArgument(format!(
            "Euler-Lagrange residual needs m > k > 0, got ({m},{k})"
        )));
    }
    check_depth(table, m, k)?;
    let as_ = a.matmul(&table.s(m - 1, k)?);
    let bs = b.matmul(&table.s(m - 1, k - 1)?);
    let ta = as_.trace();
    let tb = bs.trace();
    let mut r_a = as_;
    r_a.axpy(-ta, &a.matmul(a));
    let mut r_b = bs;
    r_b.axpy(-tb, &b.matmul(b));
    Ok(ELResidual {
        norm_a: frob_norm(&r_a),
        norm_b: frob_norm(&r_b),
        r_a: Some(r_a),
        r_b: Some(r_b),
        alpha: ta.re,
        beta: tb.re,
        alpha_imag: ta.im,
        beta_imag: tb.im,
    })
}

/// `R_A = A S_{m-1,k} - A^2 Tr[A S_{m-1,k}]`, `R_B = B S_{m-1,k-1} - B^2 Tr[B S_{m-1,k-1}]`.
///
/// Both vanish at constrained extremizers of `Tr S_{m,k}` over unit-norm
/// PSD or Hermitian pairs. Inputs are expected to have unit norm.
pub fn el_residual(a: &HermitianMat, b: &HermitianMat, m: usize, k: usize) -> Result<ELResidual> {
    a.check_same_dim(b)?;
    let table = HurwitzTable::build(a.as_mat(), b.as_mat(), m.saturating_sub(1))?;
    el_residual_from_table(a.as_mat(), b.as_mat(), &table, m, k)
}

/// Relative gap `||S_{m,k} - (A^2 alpha + B^2 beta)||`, which the recurrence
/// forces to zero wherever both residuals vanish.
pub fn el_consequence_check(a: &HermitianMat, b: &HermitianMat, m: usize, k: usize) -> Result<f64> {
    a.check_same_dim(b)?;
    if !(m > k && k > 0) {
        return Err(LabError::InvalidArgument(format!(
            "Euler-Lagrange consequence needs m > k > 0, got ({m},{k})"
        )));
    }
    let (a, b) = (a.as_mat(), b.as_mat());
    let table = HurwitzTable::build(a, b, m)?;
    let ta = a.trace_product(&table.s(m - 1, k)?);
    let tb = b.trace_product(&table.s(m - 1, k - 1)?);
    let mut rhs = a.matmul(a).scale(ta);
    rhs.axpy(tb, &b.matmul(b));
    Ok(rel_err_mat(&table.s(m, k)?, &rhs))
}

/// `Re Tr S_{m,k}(A,B)`.
pub fn objective(a: &ComplexMat, b: &ComplexMat, m: usize, k: usize) -> Result<f64> {
    let table = HurwitzTable::build(a, b, m)?;
    Ok(table.trace(m, k)?.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hurwitz::binomial;
    use crate::matrix::{rel_err, C64};

    fn zero() -> C64 {
        C64::new(0.0, 0.0)
    }

    fn e(n: usize, i: usize) -> Vec<C64> {
        (0..n)
            .map(|j| if i == j { C64::new(1.0, 0.0) } else { zero() })
            .collect()
    }

    #[test]
    fn gradients_at_identity() {
        let i = ComplexMat::identity(3);
        let t = HurwitzTable::build(&i, &i, 6).unwrap();
        let ga = grad_a(&t, 7, 2).unwrap();
        let want = 7.0 * binomial(6, 2) as f64;
        assert!(rel_err_mat(ga.as_mat(), &ComplexMat::identity(3).scale_re(want)) < 1e-14);
        let gb = grad_b(&t, 7, 2).unwrap();
        let want = 7.0 * binomial(6, 1) as f64;
        assert!(rel_err_mat(gb.as_mat(), &ComplexMat::identity(3).scale_re(want)) < 1e-14);
        assert_eq!(grad_a(&t, 7, 7).unwrap().norm(), 0.0);
        assert!(grad_b(&t, 7, 0).is_err());
        assert!(matches!(
            grad_a(&t, 9, 2),
            Err(LabError::TableTooShallow { .. })
        ));
    }

    #[test]
    fn congruence_derivative_closed_forms() {
        let mut rng = LabRng::new(8);
        let a = rng.psd_unit(3);
        let d = normalized_congruence_derivative(&a, &ComplexMat::identity(3)).unwrap();
        assert!(d.norm() < 1e-14);

        let a = HermitianMat::symmetrize(&ComplexMat::outer(&e(3, 0)));
        let d = normalized_congruence_derivative(&a, &ComplexMat::unit(3, 1, 0)).unwrap();
        let want = &ComplexMat::unit(3, 1, 0) + &ComplexMat::unit(3, 0, 1);
        assert!(rel_err_mat(d.as_mat(), &want) < 1e-15);

        assert!(normalized_congruence_derivative(
            &HermitianMat::identity(3),
            &ComplexMat::identity(3)
        )
        .is_err());
    }

    #[test]
    fn el_points() {
        let p = HermitianMat::symmetrize(&ComplexMat::outer(&e(3, 0)));
        let r = el_residual(&p, &p, 6, 3).unwrap();
        assert!(r.norm_a < 1e-12 && r.norm_b < 1e-12);
        assert!(el_consequence_check(&p, &p, 6, 3).unwrap() < 1e-10);

        let q = HermitianMat::symmetrize(&ComplexMat::outer(&e(3, 1)));
        for (m, k) in [(2, 1), (5, 2), (6, 3)] {
            let r = el_residual(&p, &q, m, k).unwrap();
            assert_eq!((r.norm_a, r.norm_b), (0.0, 0.0));
            assert!(el_consequence_check(&p, &q, m, k).unwrap() <= 1e-12);
        }
        assert!(el_residual(&p, &q, 3, 3).is_err());
    }

    #[test]
    fn residual_json_fields() {
        let p = HermitianMat::from_diag(&[1.0, 0.0]);
        let r = el_residual(&p, &p, 3, 1).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys.len(), 4);
        for k in ["norm_A", "norm_B", "alpha", "beta"] {
            assert!(v.get(k).is_some(), "{k}");
        }
        // alpha = Tr[A S_{2,1}(A,A)] = 2
        assert!(rel_err(r.alpha, 2.0) < 1e-15);
    }
}
