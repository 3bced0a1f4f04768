use bmv_lab_core::hurwitz::hurwitz_enum_counted;
use bmv_lab_core::{
    binomial, coefficients, congruence, herm_eig, psd_project, rel_err, rel_err_mat, word_trace,
    ComplexMat, HermitianMat, LabRng, WordSpec,
};
use proptest::prelude::*;

fn scaled_hermitian(rng: &mut LabRng, n: usize, scale: f64) -> HermitianMat {
    rng.hermitian_unit(n).scale(scale)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn eigen_decomposition_reassembles(seed in any::<u64>(), n in 1usize..=7, scale in 1e-3f64..1e3) {
        let mut rng = LabRng::new(seed);
        let h = scaled_hermitian(&mut rng, n, scale);
        let spec = herm_eig(&h).unwrap();
        let sum: f64 = spec.eigenvalues.iter().sum();
        prop_assert!((sum - h.trace()).abs() <= 1e-12 * scale.max(1.0) * n as f64);
        prop_assert!(spec.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let back = spec.reassemble(|l| l);
        prop_assert!((&back.as_mat().clone() - h.as_mat()).frob_norm() <= 1e-12 * h.norm().max(1.0));
        let u = &spec.unitary;
        let gram = u.adjoint().matmul(u);
        prop_assert!((&gram - &ComplexMat::identity(n)).frob_norm() <= 1e-12 * n as f64);
    }

    #[test]
    fn psd_projection_is_idempotent(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = LabRng::new(seed);
        let h = rng.hermitian_unit(n);
        let p = psd_project(&h).unwrap();
        prop_assert!(herm_eig(&p).unwrap().min() >= -1e-10);
        let pp = psd_project(&p).unwrap();
        prop_assert!(rel_err_mat(p.as_mat(), pp.as_mat()) <= 1e-12);
    }

    #[test]
    fn congruence_preserves_psd(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = LabRng::new(seed);
        let a = rng.psd_unit(n);
        let c = rng.ginibre(n);
        let out = congruence(&c, a.as_mat()).unwrap();
        let h = HermitianMat::new(out).unwrap();
        let scale = c.frob_norm().powi(2);
        prop_assert!(herm_eig(&h).unwrap().min() >= -1e-10 * scale.max(1.0));
    }

    #[test]
    fn frobenius_norm_is_trace_of_gram(seed in any::<u64>(), n in 1usize..=8) {
        let m = LabRng::new(seed).ginibre(n);
        let tr = m.matmul(&m.adjoint()).trace();
        prop_assert!(tr.im.abs() <= 1e-12 * tr.re.max(1.0));
        prop_assert!(rel_err(m.frob_norm().powi(2), tr.re) <= 1e-13);
    }

    #[test]
    fn word_traces_are_cyclic(seed in any::<u64>(), n in 1usize..=4, bits in proptest::collection::vec(any::<bool>(), 1..10)) {
        let mut rng = LabRng::new(seed);
        let a = rng.ginibre(n);
        let b = rng.ginibre(n);
        let w = WordSpec::new(bits);
        let t0 = word_trace(&a, &b, &w).unwrap();
        for r in 1..w.len() {
            let t = word_trace(&a, &b, &w.rotated(r)).unwrap();
            prop_assert!((t - t0).norm() / t0.norm().max(1.0) <= 1e-10);
        }
        let parsed: WordSpec = w.to_string().parse().unwrap();
        prop_assert_eq!(parsed, w);
    }

    #[test]
    fn enumeration_touches_binomial_many_words(m in 0usize..=12, k in 0usize..=12) {
        prop_assume!(k <= m);
        let i = ComplexMat::identity(1);
        let (s, count) = hurwitz_enum_counted(&i, &i, m, k, 1_000_000).unwrap();
        prop_assert_eq!(count, binomial(m, k));
        prop_assert_eq!(s[(0, 0)].re, binomial(m, k) as f64);
    }

    #[test]
    fn hermitian_coefficients_are_real(seed in any::<u64>(), n in 1usize..=5, m in 1usize..=10) {
        let mut rng = LabRng::new(seed);
        let a = rng.hermitian_unit(n);
        let b = rng.hermitian_unit(n);
        let c = coefficients(&a, &b, m).unwrap();
        prop_assert_eq!(c.coeffs.len(), m + 1);
        prop_assert!(c.max_imag_rel <= 1e-10);
    }

    #[test]
    fn matrix_json_round_trip_is_bitwise(seed in any::<u64>(), n in 1usize..=5) {
        let m = LabRng::new(seed).ginibre(n).scale_re(1.0 / 7.0);
        let back: ComplexMat = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        for (x, y) in m.as_slice().iter().zip(back.as_slice()) {
            prop_assert_eq!(x.re.to_bits(), y.re.to_bits());
            prop_assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }
}
