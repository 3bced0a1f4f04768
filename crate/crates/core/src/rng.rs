//! Seeded random generation.
//!
//! The generator is ChaCha8 (`rand_chacha`), a counter-based stream cipher
//! whose output is fixed across platforms for a given `(seed, stream)`.
//! Gaussians come from the Box-Muller transform so that nothing depends on
//! the sampling algorithms of a particular `rand` release.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::matrix::{frob_norm, ComplexMat, HermitianMat, PsdUnit, C64};

#[derive(Clone, Debug)]
pub struct LabRng {
    inner: ChaCha8Rng,
}

impl LabRng {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Independent substream of the same seed.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `(0, 1]`, 53 bits.
    pub fn uniform(&mut self) -> f64 {
        let bits = self.inner.next_u64() >> 11;
        (bits as f64 + 1.0) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn below(&mut self, bound: usize) -> usize {
        ((self.uniform() - f64::EPSILON / 2.0).max(0.0) * bound as f64) as usize % bound.max(1)
    }

    /// Standard complex Gaussian (`E|z|^2 = 1`) from one Box-Muller pair.
    pub fn complex_gaussian(&mut self) -> C64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-u1.ln()).sqrt(); // sqrt(-2 ln u1) / sqrt(2)
        let theta = 2.0 * std::f64::consts::PI * u2;
        C64::new(r * theta.cos(), r * theta.sin())
    }

    pub fn gaussian(&mut self) -> f64 {
        self.complex_gaussian().re * std::f64::consts::SQRT_2
    }

    /// Matrix with i.i.d. standard complex Gaussian entries.
    pub fn ginibre(&mut self, n: usize) -> ComplexMat {
        ComplexMat::from_fn(n, |_, _| self.complex_gaussian())
    }

    /// `G G* / ||G G*||` for Gaussian `G`.
    pub fn psd_unit(&mut self, n: usize) -> PsdUnit {
        loop {
            let g = self.ginibre(n);
            let gg = g.matmul(&g.adjoint());
            let nrm = frob_norm(&gg);
            if nrm >= 1e-300 {
                let h = HermitianMat::symmetrize(&gg.scale_re(1.0 / nrm));
                return PsdUnit::new(h).expect("Gram matrix is PSD");
            }
        }
    }

    /// PSD unit matrix of rank at most `rank`, `G G*` with `G` of size `n x rank`.
    pub fn psd_unit_rank(&mut self, n: usize, rank: usize) -> PsdUnit {
        loop {
            let g = ComplexMat::from_fn(n, |_, j| {
                if j < rank {
                    self.complex_gaussian()
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            let gg = g.matmul(&g.adjoint());
            let nrm = frob_norm(&gg);
            if nrm >= 1e-300 {
                let h = HermitianMat::symmetrize(&gg.scale_re(1.0 / nrm));
                return PsdUnit::new(h).expect("Gram matrix is PSD");
            }
        }
    }

    /// Unit-norm Hermitian matrix, `(G + G*)` normalized.
    pub fn hermitian_unit(&mut self, n: usize) -> HermitianMat {
        loop {
            let g = self.ginibre(n);
            if let Some(h) = HermitianMat::symmetrize(&g).normalized() {
                return h;
            }
        }
    }

    pub fn unit_vector(&mut self, n: usize) -> Vec<C64> {
        loop {
            let v: Vec<C64> = (0..n).map(|_| self.complex_gaussian()).collect();
            let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if nrm > 1e-300 {
                return v.into_iter().map(|z| z / nrm).collect();
            }
        }
    }
}

/// Unit-norm PSD matrix determined by `(n, seed)`.
///
/// If the Gram matrix underflows to zero the draw is repeated on the next
/// substream of the same seed.
pub fn random_psd_unit(n: usize, seed: u64) -> PsdUnit {
    assert!(n >= 1, "dimension must be positive");
    let mut stream = 0u64;
    loop {
        let mut rng = LabRng::with_stream(seed, stream);
        let g = rng.ginibre(n);
        let gg = g.matmul(&g.adjoint());
        let nrm = frob_norm(&gg);
        if nrm >= 1e-300 {
            let h = HermitianMat::symmetrize(&gg.scale_re(1.0 / nrm));
            return PsdUnit::new(h).expect("Gram matrix is PSD");
        }
        stream += 1;
    }
}
