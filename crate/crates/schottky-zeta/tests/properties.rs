use num_complex::Complex64 as C64;
use proptest::prelude::*;
use schottky_zeta::graphzeta::{theta_closed_form, WeightedGraph};
use schottky_zeta::intermediate::IntermediateZeta;
use schottky_zeta::schottky::builtin_three_funnel;
use schottky_zeta::selberg::{SelbergEvaluator, TransferConfig};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn theta_determinant_is_periodic(h in prop::array::uniform3(1u32..6), re in -1.0f64..2.0, im in -3.0f64..3.0) {
        let h = h.map(f64::from);
        let g = WeightedGraph::theta(h);
        let p = g.strip_period(None).unwrap();
        let s = C64::new(re, im);
        let a = g.ihara_det(s, None);
        let b = g.ihara_det(s + C64::new(0.0, p), None);
        prop_assert!((a - b).norm() <= 1e-9 * a.norm().max(1.0));
        let c = theta_closed_form(h, s);
        prop_assert!((a - c).norm() <= 1e-9 * c.norm().max(1.0));
    }

    #[test]
    fn selberg_zeta_is_real_on_the_real_axis(s in 0.1f64..2.0) {
        let fam = builtin_three_funnel(32);
        let z = C64::new(fam.z_for_length(10.0).unwrap(), 0.0);
        let ev = SelbergEvaluator::det_with(&fam, z, TransferConfig { k: 12, q: 48, n: 1 }).unwrap();
        let v = ev.value(C64::new(s, 0.0));
        prop_assert!(v.im.abs() <= 1e-12 * v.norm().max(1.0));
    }

    #[test]
    fn z0_conjugate_symmetry(re in -1.0f64..2.0, im in -3.0f64..3.0) {
        let fam = builtin_three_funnel(32);
        let iz = IntermediateZeta::new(&fam, 0).unwrap();
        let z = C64::new(0.05, 0.0);
        let s = C64::new(re, im);
        let a = iz.eval(z, s);
        let b = iz.eval(z, s.conj()).conj();
        prop_assert!((a - b).norm() <= 1e-10 * a.norm().max(1.0));
    }
}
