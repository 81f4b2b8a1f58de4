//! Built-in families.

use super::{MobiusC, MobiusSeries, SchottkyFamily};
use crate::laurent::{Laurent, SqrtBranch};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

/// Ford-disc levels of the symmetric three-funnel family, from a level
/// search at `z = e^{-6}` (margin 0.9975).
pub const THREE_FUNNEL_LEVELS: [f64; 2] = [1.0, 1.0];

/// Ford-disc levels `e^{-1/4}, e^{1/4}` of the funneled torus family, from a
/// level search at `z = e^{-6}` (margin 0.9926).
pub const TORUS_LEVELS: [f64; 2] = [0.7788007830714049, 1.2840254166877414];

/// Rotation used to move fixed points away from infinity.
fn rotation(theta: f64) -> MobiusC {
    let (s, c) = theta.sin_cos();
    MobiusC::real(c, -s, s, c)
}

/// `(t^{-2} + t^2)/2` and `(t^{-2} - t^2)/2`.
fn cosh_sinh(k: usize, power: i64) -> (Laurent, Laurent) {
    let mut ch = vec![0.0; (2 * power + 1) as usize];
    let mut sh = ch.clone();
    ch[0] = 0.5;
    sh[0] = 0.5;
    ch[2 * power as usize] = 0.5;
    sh[2 * power as usize] = -0.5;
    (
        Laurent::real_polynomial(-power, &ch, k),
        Laurent::real_polynomial(-power, &sh, k),
    )
}

/// `a^{-1} = (sqrt(2C - 1) - C)/(C - 1)` where `C = (t^{-2}+t^2)/2`, the
/// root of `tr(S_1 S_2) = -2C` with `a^{-1} -> -1`.
pub fn three_funnel_inverse_a(k: usize) -> Laurent {
    let (c, _) = cosh_sinh(k, 2);
    let one = Laurent::constant(1.0.into(), k);
    // 2C - 1 = t^{-2}(1 - t^2 + t^4)
    let two_c_minus_one = Laurent::real_polynomial(-2, &[1.0, 0.0, -1.0, 0.0, 1.0], k);
    let root = two_c_minus_one.sqrt(SqrtBranch::Principal).expect("even order");
    root.sub(&c).div(&c.sub(&one)).expect("C - 1 is nonzero")
}

/// The symmetric three-funnel family with `z = e^{-l/4}`:
/// `S_1 = [[C, S], [S, C]]`, `S_2 = [[C, a^{-1} S], [a S, C]]`.
pub fn builtin_three_funnel(k: usize) -> SchottkyFamily {
    let (c, s) = cosh_sinh(k, 2);
    let ainv = three_funnel_inverse_a(k);
    let a = ainv.inv().expect("a^{-1} is nonzero");
    let s1 = MobiusSeries::new(c.clone(), s.clone(), s.clone(), c.clone());
    let s2 = MobiusSeries::new(c.clone(), ainv.mul(&s), a.mul(&s), c);
    SchottkyFamily::new(
        "three-funnel",
        vec![s1, s2],
        THREE_FUNNEL_LEVELS.to_vec(),
        0.5,
        Some(4.0),
    )
    .expect("three-funnel family is well formed")
}

/// The funneled torus with `z = e^{-l/2}` and angle `phi` between the two
/// shortest geodesics, conjugated by a rotation of `pi/8` so that no fixed
/// point sits at infinity.
pub fn builtin_funneled_torus(phi: f64, k: usize) -> SchottkyFamily {
    let (ch, sh) = cosh_sinh(k, 1);
    let s1 = MobiusSeries::new(
        Laurent::real_polynomial(-1, &[1.0], k),
        Laurent::zero(),
        Laurent::zero(),
        Laurent::real_polynomial(1, &[1.0], k),
    );
    let cphi = C64::new(phi.cos(), 0.0);
    let s2 = MobiusSeries::new(
        ch.sub(&sh.scale(cphi)),
        sh.scale(C64::new(phi.sin().powi(2), 0.0)),
        sh.clone(),
        ch.add(&sh.scale(cphi)),
    );
    let p = rotation(PI / 8.0);
    SchottkyFamily::new(
        format!("funneled-torus(phi={phi})"),
        vec![s1.conjugate_by(&p, k), s2.conjugate_by(&p, k)],
        TORUS_LEVELS.to_vec(),
        0.5,
        Some(2.0),
    )
    .expect("torus family is well formed")
}

/// Two-generator family realizing prescribed leading traces
/// `tr(g_1) ~ A t^{-n_1}`, `tr(g_2) ~ B t^{-n_2}`, `tr(g_1 g_2) ~ D t^{-n_3}`:
/// `g_1 = diag(A t^{-n_1}, ...)`, `g_2 = P diag(B t^{-n_2}, ...) P^{-1}` with
/// `P = [[1/(1-alpha), alpha], [1/(1-alpha), 1]]` and `1 - alpha = (AB/D) t^{n_3-n_1-n_2}`.
pub fn builtin_two_generator(lead: [f64; 3], orders: [i64; 3], k: usize) -> SchottkyFamily {
    let [a, b, d] = lead;
    let [n1, n2, n3] = orders;
    let diag = |x: f64, n: i64| {
        MobiusSeries::new(
            Laurent::real_polynomial(-n, &[x], k),
            Laurent::zero(),
            Laurent::zero(),
            Laurent::real_polynomial(n, &[1.0 / x], k),
        )
    };
    let one_minus_alpha = Laurent::real_polynomial(n3 - n1 - n2, &[a * b / d], k);
    let alpha = Laurent::constant(1.0.into(), k).sub(&one_minus_alpha);
    let inv = one_minus_alpha.inv().expect("nonzero monomial");
    let one = Laurent::constant(1.0.into(), k);
    let p = MobiusSeries::new(inv.clone(), alpha.clone(), inv, one);
    let pinv = p.inverse();
    let g1 = diag(a, n1);
    let g2 = p.mul(&diag(b, n2)).mul(&pinv);
    let rot = rotation(PI / 8.0);
    SchottkyFamily::new(
        format!("two-generator(n={n1},{n2},{n3})"),
        vec![g1.conjugate_by(&rot, k), g2.conjugate_by(&rot, k)],
        vec![1.0, 1.0],
        0.5,
        None,
    )
    .expect("two-generator family is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freegroup::Word;

    fn w(s: &str) -> Word {
        Word::parse(2, s).unwrap()
    }

    #[test]
    fn inverse_a_leading_terms() {
        let ainv = three_funnel_inverse_a(32);
        assert_eq!(ainv.order(), 0);
        assert!((ainv.coeffs()[0] + 1.0).norm() < 1e-14);
        assert!((ainv.coeffs()[1] - 2.0).norm() < 1e-14);
    }

    #[test]
    fn three_funnel_trace_condition() {
        let fam = builtin_three_funnel(32);
        let t1 = fam.trace_series(&w("a1"));
        assert_eq!(t1.order(), -2);
        assert!((t1.coeffs()[0] - 1.0).norm() < 1e-14);
        let t12 = fam.trace_series(&w("a1 a2"));
        assert_eq!(t12.order(), -2);
        assert!((t12.coeffs()[0] + 1.0).norm() < 1e-12);
        // tr(S1 S2) + 2C vanishes to the working precision
        let (c, _) = cosh_sinh(32, 2);
        let resid = t12.add(&c.scale(2.0.into()));
        assert!(resid.is_zero() || resid.coeffs().iter().all(|x| x.norm() < 1e-10));
    }

    #[test]
    fn three_funnel_evaluates_to_cosh_sinh() {
        let fam = builtin_three_funnel(32);
        let ell = 10.0;
        let z = fam.z_for_length(ell).unwrap();
        let m = fam.evaluate_at(z.into()).unwrap();
        assert!((m[0].a.re - (ell / 2.0).cosh()).abs() < 1e-12 * (ell / 2.0).cosh());
        assert!((m[0].b.re - (ell / 2.0).sinh()).abs() < 1e-12 * (ell / 2.0).cosh());
        let tr12 = m[0].mul(&m[1]).trace();
        assert!((tr12.re + 2.0 * (ell / 2.0).cosh()).abs() < 1e-10 * (ell / 2.0).cosh());
    }

    #[test]
    fn torus_leading_traces() {
        let fam = builtin_funneled_torus(PI / 2.0, 32);
        let t1 = fam.trace_series(&w("a1"));
        assert_eq!(t1.order(), -1);
        assert!((t1.coeffs()[0] - 1.0).norm() < 1e-13);
        let t12 = fam.trace_series(&w("a1 a2"));
        assert_eq!(t12.order(), -2);
        assert!((t12.coeffs()[0] - 0.5).norm() < 1e-13);
        // for general phi the displayed matrices give (1 - cos phi)/2 on a1 a2
        // and (1 + cos phi)/2 on a1 A2
        let phi = 1.1f64;
        let fam = builtin_funneled_torus(phi, 32);
        let lt = |s: &str| fam.trace_series(&w(s)).coeffs()[0];
        assert!((lt("a1 a2") - (1.0 - phi.cos()) / 2.0).norm() < 1e-12);
        assert!((lt("a1 A2") - (1.0 + phi.cos()) / 2.0).norm() < 1e-12);
    }

    #[test]
    fn two_generator_leading_traces() {
        let fam = builtin_two_generator([1.5, 0.7, 2.0], [1, 1, 3], 24);
        let lead = |s: &str| {
            let t = fam.trace_series(&w(s));
            (t.order(), t.coeffs()[0])
        };
        let (o1, a) = lead("a1");
        let (o2, b) = lead("a2");
        let (o3, d) = lead("a1 a2");
        assert_eq!((o1, o2, o3), (-1, -1, -3));
        assert!((a - 1.5).norm() < 1e-12);
        assert!((b - 0.7).norm() < 1e-12);
        assert!((d - 2.0).norm() < 1e-12);
    }
}
