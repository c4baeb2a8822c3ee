use nhqc::bench::{parse_range, unitary_gate_fidelity};
use nhqc::dynamics::{final_density, final_unitary, pure_density};
use nhqc::numkit::{c, cis, expm_hermitian, global_phase_overlap, ComplexMatrix};
use nhqc::schemes::build_schedule;
use nhqc::system::{ErrorModel, GateAngles, SchemeKind, SchemeSpec};
use proptest::prelude::*;
use std::f64::consts::PI;

fn hermitian(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec(-2.0f64..2.0, dim * dim * 2).prop_map(move |v| {
        let m = ComplexMatrix::from_fn(dim, |i, j| c(v[2 * (i * dim + j)], v[2 * (i * dim + j) + 1]));
        m.hermitian_part()
    })
}

fn angles() -> impl Strategy<Value = GateAngles> {
    (0.05f64..2.0 * PI - 0.05, 0.0f64..PI, 0.0f64..2.0 * PI).prop_map(|(g, t, p)| GateAngles::new(g, t, p).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn hermitian_exponential_is_unitary(h in hermitian(3), dt in -3.0f64..3.0) {
        let u = expm_hermitian(&h, dt).unwrap();
        prop_assert!(u.unitary_defect() < 1e-12);
        let back = &u * &expm_hermitian(&h, -dt).unwrap();
        prop_assert!(back.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-12);
    }

    #[test]
    fn fidelity_ignores_global_phase(h in hermitian(2), phase in 0.0f64..2.0 * PI) {
        let u = expm_hermitian(&h, 1.0).unwrap();
        let shifted = u.scale(cis(phase));
        let f = unitary_gate_fidelity(&shifted, &u, &[0, 1]);
        prop_assert!((f - 1.0).abs() < 1e-12);
        prop_assert!((global_phase_overlap(&u, &shifted) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sl_realises_any_gate(a in angles()) {
        let s = build_schedule(&SchemeSpec::new(SchemeKind::Sl, a)).unwrap();
        let u = final_unitary(&s, &ErrorModel::ideal(), 1000).unwrap();
        prop_assert!(1.0 - unitary_gate_fidelity(&u, &s.target, &s.system.computational_indices) < 1e-9);
    }

    #[test]
    fn dc_realises_any_gate(a in angles()) {
        let s = build_schedule(&SchemeSpec::new(SchemeKind::Dc, a)).unwrap();
        let u = final_unitary(&s, &ErrorModel::ideal(), 1000).unwrap();
        prop_assert!(1.0 - unitary_gate_fidelity(&u, &s.target, &s.system.computational_indices) < 1e-9);
    }

    #[test]
    fn rabi_error_never_improves_sl(eps in -0.2f64..0.2) {
        let s = build_schedule(&SchemeSpec::new(SchemeKind::Sl, GateAngles::s_gate())).unwrap();
        let u = final_unitary(&s, &ErrorModel::rabi(eps), 1000).unwrap();
        let f = unitary_gate_fidelity(&u, &s.target, &s.system.computational_indices);
        prop_assert!(f <= 1.0 + 1e-12);
        prop_assert!(u.unitary_defect() < 1e-8);
    }

    #[test]
    fn lindblad_keeps_a_valid_density(gm in 0.0f64..0.05, gz in 0.0f64..0.05, eta in -0.2f64..0.2, a in angles()) {
        let s = build_schedule(&SchemeSpec::new(SchemeKind::Sl, a)).unwrap();
        let err = ErrorModel::new(0.0, eta, gm, gz).unwrap();
        let rho0 = pure_density(&s.system.embed(&[c(0.6, 0.0), c(0.0, 0.8)]));
        let (rho, peak) = final_density(&s, &err, &rho0, 400).unwrap();
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-8);
        prop_assert!(rho.hermitian_defect() < 1e-10);
        prop_assert!((0.0..=1.0 + 1e-9).contains(&peak));
    }

    #[test]
    fn parse_range_endpoints(a in -1.0f64..1.0, span in 0.0f64..1.0, n in 2usize..50) {
        let b = a + span;
        let grid = parse_range(&format!("{a}:{b}:{n}")).unwrap();
        prop_assert_eq!(grid.len(), n);
        prop_assert_eq!(grid[0], a);
        prop_assert!((grid[n - 1] - b).abs() < 1e-12);
        prop_assert!(grid.windows(2).all(|w| w[1] >= w[0]));
    }
}

#[test]
fn negative_rates_are_rejected() {
    assert!(ErrorModel::new(0.0, 0.0, -1e-3, 0.0).is_err());
    assert!(ErrorModel::new(0.0, 0.0, 0.0, f64::NAN).is_err());
}
