//! The acceptance suite: each criterion measures a quantity, compares it with
//! its target and reports both.

use crate::freegroup::{enumerate_classes, enumerate_cyclically_reduced, Word};
use crate::graphzeta::WeightedGraph;
use crate::intermediate::{choose_horizon, cocycle_table, l_m_direct, IntermediateZeta};
use crate::laurent::{Laurent, SqrtBranch};
use crate::schottky::{builtin_funneled_torus, builtin_three_funnel, SchottkyFamily};
use crate::selberg::{
    euler_product_r, fit_decay, geodesic_table, hausdorff_dim, Method, SelbergEvaluator, TransferConfig,
    TransferOperator,
};
use crate::zeros::{find_zeros, first_real_zero, Region, Zero};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub title: &'static str,
    pub pass: bool,
    pub measured: String,
    pub target: String,
}

type Check = fn() -> CriterionResult;

const CRITERIA: [Check; 11] = [
    three_funnel_ihara_limit,
    torus_dimension,
    second_order_formula,
    determinant_equals_euler_product,
    dimension_rate,
    rescaled_convergence,
    cocycle_oracle,
    trace_identity,
    resonance_periodicity,
    laurent_suite,
    singular_value_decay,
];

/// Runs the listed criteria (all when `only` is empty), in order.
pub fn run(only: &[usize]) -> Vec<CriterionResult> {
    CRITERIA
        .iter()
        .enumerate()
        .filter(|(i, _)| only.is_empty() || only.contains(&(i + 1)))
        .map(|(_, c)| c())
        .collect()
}

pub fn table(results: &[CriterionResult]) -> String {
    let mut out = String::new();
    for r in results {
        out.push_str(&format!(
            "[{}] {:>2} {}\n       measured: {}\n       target:   {}\n",
            if r.pass { "PASS" } else { "FAIL" },
            r.id,
            r.title,
            r.measured,
            r.target
        ));
    }
    let passed = results.iter().filter(|r| r.pass).count();
    out.push_str(&format!("{passed}/{} criteria passed\n", results.len()));
    out
}

fn result(id: usize, title: &'static str, pass: bool, measured: String, target: impl Into<String>) -> CriterionResult {
    CriterionResult {
        id,
        title,
        pass,
        measured,
        target: target.into(),
    }
}

fn failed(id: usize, title: &'static str, err: impl std::fmt::Display, target: impl Into<String>) -> CriterionResult {
    result(id, title, false, format!("error: {err}"), target)
}

fn torus() -> SchottkyFamily {
    builtin_funneled_torus(FRAC_PI_2, 32)
}

fn z_at(fam: &SchottkyFamily, ell: f64) -> C64 {
    C64::new(fam.z_for_length(ell).expect("built-ins have a length scale"), 0.0)
}

fn three_funnel_ihara_limit() -> CriterionResult {
    const TITLE: &str = "three-funnel Ihara limit";
    let g = WeightedGraph::theta([2.0; 3]);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let s = C64::new(rng.random_range(-0.5..3.0), rng.random_range(-6.0..6.0));
        let x = (-s).exp();
        let want = 1.0 - 6.0 * x + 9.0 * x * x - 4.0 * x * x * x;
        let got = g.ihara_det(s / 4.0, None);
        worst = worst.max((got - want).norm() / want.norm());
    }
    result(
        1,
        TITLE,
        worst <= 1e-10,
        format!("max relative error {worst:.2e} over 50 points"),
        "1 - 6e^{-s} + 9e^{-2s} - 4e^{-3s} to 1e-10 relative",
    )
}

fn torus_dimension() -> CriterionResult {
    const TITLE: &str = "funneled torus dimension at l = 10";
    const TARGET: &str = "s0/5 in [0.110, 0.120]; reference 0.115, main term log 3/10 = 0.1099";
    let fam = torus();
    let iz = match IntermediateZeta::new(&fam, 0) {
        Ok(iz) => iz,
        Err(e) => return failed(2, TITLE, e, TARGET),
    };
    let z = z_at(&fam, 10.0);
    let f = |s: f64| iz.eval(z, C64::new(s, 0.0)).re;
    match first_real_zero(&f, 1e-3, 3.0, 1e-13) {
        Ok(s0) => {
            let d = s0 / 5.0;
            result(
                2,
                TITLE,
                (0.110..=0.120).contains(&d),
                format!("s0/5 = {d:.6} (reference 0.115, main term {:.6})", 3f64.ln() / 10.0),
                TARGET,
            )
        }
        Err(e) => failed(2, TITLE, e, TARGET),
    }
}

fn second_order_formula() -> CriterionResult {
    const TITLE: &str = "three-funnel Z_2 against the closed form";
    const TARGET: &str =
        "x2 = e^{s z^2/(2 log(1/|z|))}: Z_2 x2^12 equals the closed form to 1e-8 relative at 30 points; x2 = 1 gives the Ihara zeta";
    let fam = builtin_three_funnel(32);
    let sym = match IntermediateZeta::new(&fam, 2).and_then(|iz| iz.symbolic()) {
        Ok(p) => p,
        Err(e) => return failed(3, TITLE, e, TARGET),
    };
    let closed = |x1: C64, x2: C64| {
        let (x1s, x2s) = (x1 * x1, x2 * x2);
        let x2q = x2s * x2s;
        let d = (x2s - 1.0) * (x2s - 1.0);
        (x2q + x1s * x1s * d + x1s * (x2s - 2.0 * x2q)).powu(2) * (x2q + x1s * x1s * d - 2.0 * x1s * (x2s + x2q))
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut literal, mut doubled): (f64, f64) = (0.0, 0.0);
    for _ in 0..30 {
        let z: f64 = rng.random_range(0.01..0.3);
        let s = C64::new(rng.random_range(-0.5..1.5), rng.random_range(-3.0..3.0));
        let l = (1.0 / z).ln();
        let ours = sym.eval(C64::new(z, 0.0), s);
        let x1 = (-2.0 * s).exp();
        for (exponent, worst) in [(z * z / (2.0 * l), &mut literal), (z * z / l, &mut doubled)] {
            let x2 = (s * exponent).exp();
            let want = closed(x1, x2);
            *worst = worst.max((ours * x2.powu(12) - want).norm() / want.norm());
        }
    }
    let ihara = sym.ihara_from();
    let ihara_ok = ihara == vec![(0, 1), (4, -6), (8, 9), (12, -4)];
    result(
        3,
        TITLE,
        literal <= 1e-8 && ihara_ok,
        format!(
            "max relative error {literal:.2e} with the stated x2; {doubled:.2e} with x2 = e^{{s z^2/log(1/|z|)}}; x2 = 1 gives {}",
            if ihara_ok { "1 - 6x1^2 + 9x1^4 - 4x1^6 exactly" } else { "a different polynomial" }
        ),
        TARGET,
    )
}

fn determinant_equals_euler_product() -> CriterionResult {
    const TITLE: &str = "determinant equals Euler product (three-funnel, l = 8)";
    const TARGET: &str = "|det/euler - 1| <= 1e-6 with both tails <= 1e-8";
    let fam = builtin_three_funnel(32);
    let z = z_at(&fam, 8.0);
    let (ev, table) = match (SelbergEvaluator::new(&fam, z, Method::Det), geodesic_table(&fam, z, 12)) {
        (Ok(ev), Ok(t)) => (ev, t),
        (Err(e), _) => return failed(4, TITLE, e, TARGET),
        (_, Err(e)) => return failed(4, TITLE, e, TARGET),
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for s in [0.5, 1.0, 2.0] {
        let s = C64::new(s, 0.0);
        let euler = euler_product_r(&table, s, 12);
        let (det, det_err) = ev.eval(s);
        let rel = (det / euler.value - 1.0).norm();
        let det_tail = det_err / det.norm();
        pass &= rel <= 1e-6 && euler.tail_bound() <= 1e-8 && det_tail <= 1e-8;
        parts.push(format!(
            "s={}: {rel:.1e} (euler tail {:.1e}, det tail {det_tail:.1e})",
            s.re,
            euler.tail_bound()
        ));
    }
    result(4, TITLE, pass, parts.join("; "), TARGET)
}

fn dimension_rate() -> CriterionResult {
    const TITLE: &str = "dimension rate r(l) = |delta(l) - log 4/l|";
    const TARGET: &str = "r strictly decreasing on l = 8, 12, 16, 20 and r e^{l/5} <= 2 r(8) e^{8/5}";
    let fam = builtin_three_funnel(32);
    let mut r = Vec::new();
    for ell in [8.0, 12.0, 16.0, 20.0] {
        match hausdorff_dim(&fam, z_at(&fam, ell), Method::Det) {
            Ok(d) => r.push((ell, (d - 4f64.ln() / ell).abs())),
            Err(e) => return failed(5, TITLE, e, TARGET),
        }
    }
    let decreasing = r.windows(2).all(|w| w[1].1 < w[0].1);
    let bound = 2.0 * r[0].1 * (r[0].0 / 5.0).exp();
    let bounded = r.iter().all(|&(ell, v)| v * (ell / 5.0).exp() <= bound);
    let measured = r
        .iter()
        .map(|(ell, v)| format!("r({ell})={v:.3e} [r e^(l/5)={:.3e}]", v * (ell / 5.0).exp()))
        .collect::<Vec<_>>()
        .join(", ");
    result(5, TITLE, decreasing && bounded, measured, TARGET)
}

fn rescaled_convergence() -> CriterionResult {
    const TITLE: &str = "rescaled Selberg zeta converges to Z_0";
    const TARGET: &str =
        "sup |Z(s/L) - Z_0(s)| on the 5x5 grid decreases over l = 8, 12, 16 and stays <= C |z|^0.8, C fixed at l = 8";
    let fam = builtin_three_funnel(32);
    let iz = match IntermediateZeta::new(&fam, 0) {
        Ok(iz) => iz,
        Err(e) => return failed(6, TITLE, e, TARGET),
    };
    let mut pts = Vec::new();
    for ell in [8.0, 12.0, 16.0] {
        let z = z_at(&fam, ell);
        let l = (1.0 / z.re).ln();
        let ev = match SelbergEvaluator::new(&fam, z, Method::Det) {
            Ok(ev) => ev,
            Err(e) => return failed(6, TITLE, e, TARGET),
        };
        let mut sup: f64 = 0.0;
        for i in 0..5 {
            for j in 0..5 {
                let s = C64::new(-1.0 + i as f64, -3.0 + 1.5 * j as f64);
                sup = sup.max((ev.value(s / l) - iz.eval(z, s)).norm());
            }
        }
        pts.push((z.re, sup));
    }
    let decreasing = pts.windows(2).all(|w| w[1].1 < w[0].1);
    let c = pts[0].1 / pts[0].0.powf(0.8);
    let bounded = pts.iter().all(|&(z, d)| d <= c * z.powf(0.8) * (1.0 + 1e-12));
    // least-squares slope of log d against log |z|
    let n = pts.len() as f64;
    let (mx, my) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), (z, d)| (a + z.ln() / n, b + d.ln() / n));
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), (z, d)| {
        (a + (z.ln() - mx) * (d.ln() - my), b + (z.ln() - mx).powi(2))
    });
    let measured = format!(
        "{}; fitted exponent {:.2}",
        pts.iter()
            .map(|(z, d)| format!("|z|={z:.3e}: {d:.3e}"))
            .collect::<Vec<_>>()
            .join(", "),
        sxy / sxx
    );
    result(6, TITLE, decreasing && bounded, measured, TARGET)
}

fn cocycle_oracle() -> CriterionResult {
    const TITLE: &str = "cocycle sums equal direct length expansions";
    const TARGET: &str = "coefficientwise agreement <= 1e-9 for all classes of length <= 8, M = 0, 1, 2, both families";
    let mut worst: f64 = 0.0;
    let mut count = 0usize;
    for fam in [builtin_three_funnel(32), torus()] {
        for m in 0..=2 {
            let table = match choose_horizon(&fam, m).and_then(|(n, _)| cocycle_table(&fam, m, n)) {
                Ok(t) => t,
                Err(e) => return failed(7, TITLE, e, TARGET),
            };
            for len in 1..=8 {
                for class in enumerate_classes(fam.g, len) {
                    let w = &class.representative;
                    let d = match (table.l_m_word(w), l_m_direct(&fam, w, m)) {
                        (Ok(a), Ok(b)) if a.analytic.len() == b.analytic.len() => a.rel_diff_mod_2pi(&b),
                        (Ok(_), Ok(_)) => f64::INFINITY,
                        (Err(e), _) => return failed(7, TITLE, e, TARGET),
                        (_, Err(e)) => return failed(7, TITLE, e, TARGET),
                    };
                    worst = worst.max(d);
                    count += 1;
                }
            }
        }
    }
    result(
        7,
        TITLE,
        worst <= 1e-9,
        format!("max difference {worst:.2e} over {count} (family, M, class) cases"),
        TARGET,
    )
}

fn trace_identity() -> CriterionResult {
    const TITLE: &str = "two-generator trace identity";
    const TARGET: &str = "lt(w)^2 = prod lt(a_ij a_ij+1): equal orders, leading coefficients to 1e-10";
    let mut worst: f64 = 0.0;
    let mut order_mismatch = 0usize;
    let mut count = 0usize;
    for fam in [builtin_three_funnel(32), torus(), builtin_funneled_torus(1.0, 32)] {
        for n in 1..=8 {
            for w in enumerate_cyclically_reduced(fam.g, n) {
                let l = w.letters();
                let t = fam.trace_series(&w);
                let mut order = 0;
                let mut lead = C64::new(1.0, 0.0);
                for j in 0..n {
                    let pair = Word::reduce(fam.g, &[l[j], l[(j + 1) % n]]).expect("cyclically reduced");
                    let tp = fam.trace_series(&pair);
                    order += tp.order();
                    lead *= tp.leading();
                }
                count += 1;
                if order != 2 * t.order() {
                    order_mismatch += 1;
                    continue;
                }
                let lhs = t.leading() * t.leading();
                worst = worst.max((lhs - lead).norm() / lhs.norm());
            }
        }
    }
    result(
        8,
        TITLE,
        order_mismatch == 0 && worst <= 1e-10,
        format!(
            "{order_mismatch} order mismatches, max relative leading-coefficient error {worst:.2e} over {count} words"
        ),
        TARGET,
    )
}

fn match_translated(a: &[Zero], b: &[Zero], shift: C64, tol: f64) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for za in a {
        let target = za.location + shift;
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, zb)| !used[*k] && zb.multiplicity == za.multiplicity)
            .map(|(k, zb)| (k, (zb.location - target).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))?;
        if d > tol {
            return None;
        }
        used[k] = true;
        worst = worst.max(d);
    }
    Some(worst)
}

fn resonance_periodicity() -> CriterionResult {
    const TITLE: &str = "resonance chains of graph zeta functions";
    const TARGET: &str = "zeros in adjacent strips of height 2 pi/d coincide after translation to 1e-9";
    let graphs = [
        ("theta(1,2,3)", WeightedGraph::theta([1.0, 2.0, 3.0])),
        ("dumbbell(1,2,1)", WeightedGraph::dumbbell([1.0, 2.0, 1.0])),
        ("figure-eight(1,2)", WeightedGraph::figure_eight([1.0, 2.0])),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, g) in graphs {
        let Some(p) = g.strip_period(None) else {
            return failed(9, TITLE, format!("{name} has incommensurable lengths"), TARGET);
        };
        let f = |s: C64| g.ihara_det(s, None);
        let lo = 0.37;
        let strips: Result<Vec<_>, _> = (0..2)
            .map(|k| {
                let r = Region::new(-8.0, 8.0, lo + k as f64 * p, lo + (k + 1) as f64 * p)?;
                find_zeros(&f, &r, 1e-12)
            })
            .collect();
        let strips = match strips {
            Ok(s) => s,
            Err(e) => return failed(9, TITLE, format!("{name}: {e}"), TARGET),
        };
        match match_translated(&strips[0].zeros, &strips[1].zeros, C64::new(0.0, p), 1e-9) {
            Some(d) => parts.push(format!(
                "{name}: {} zeros, shift error {d:.1e}",
                strips[0].total_multiplicity()
            )),
            None => {
                pass = false;
                parts.push(format!(
                    "{name}: strips differ ({} vs {} zeros)",
                    strips[0].total_multiplicity(),
                    strips[1].total_multiplicity()
                ));
            }
        }
    }
    result(9, TITLE, pass, parts.join("; "), TARGET)
}

/// Random series `t^order sum f_j t^j` with `|f_j| <= e^{c (j + 1)}` and `|f_0| = lead`.
fn random_series(rng: &mut ChaCha8Rng, order: i64, k: usize, c: f64, lead: f64) -> Laurent {
    let mut coeffs: Vec<C64> = (0..=k)
        .map(|j| {
            let r = (c * (j + 1) as f64).exp() * rng.random_range(0.0f64..1.0).sqrt();
            C64::from_polar(r, rng.random_range(-PI..PI))
        })
        .collect();
    coeffs[0] = C64::from_polar(lead, rng.random_range(-PI..PI));
    Laurent::new(order, coeffs)
}

fn scale(f: &Laurent) -> f64 {
    f.coeffs().iter().map(|c| c.norm()).fold(1.0, f64::max)
}

/// Largest `log|h_j| / w(j)` over the nonzero coefficients with `w(j) > 0`.
fn rate(h: &[C64], w: impl Fn(usize) -> f64) -> f64 {
    h.iter()
        .enumerate()
        .filter(|(j, x)| x.norm() > 0.0 && w(*j) > 0.0)
        .map(|(j, x)| x.norm().ln() / w(j))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Constants for the quotient and log envelopes, `|h_j| <= e^{(3C + C1 + A)(j + 1)}`
/// and `|h_j| <= e^{(3C + C0) j}`, together with whether every product obeyed
/// `|h_j| <= (j + 1) e^{C (j + 2)}`.
fn envelope_batch(rng: &mut ChaCha8Rng, cs: &[f64], n: usize) -> ([f64; 2], bool) {
    const K: usize = 24;
    const A: f64 = 1.0;
    let mut constants = [f64::NEG_INFINITY; 2];
    let mut product_ok = true;
    for i in 0..n {
        let c = cs[i % cs.len()];
        let lead = |rng: &mut ChaCha8Rng| rng.random_range(-A..c).exp();
        let (lf, lg) = (lead(rng), lead(rng));
        let f = random_series(rng, 0, K, c, lf);
        let g = random_series(rng, 0, K, c, lg);
        product_ok &= f
            .mul(&g)
            .coeffs()
            .iter()
            .enumerate()
            .all(|(j, h)| h.norm() <= (j + 1) as f64 * (c * (j + 2) as f64).exp() * (1.0 + 1e-12));
        let quot = f.div(&g).expect("nonzero divisor");
        constants[0] = constants[0].max(rate(quot.coeffs(), |j| (j + 1) as f64) - 3.0 * c - A);
        let f0 = f.leading();
        let log: Vec<C64> = f
            .plog()
            .expect("nonzero series")
            .analytic
            .iter()
            .enumerate()
            .map(|(j, b)| b * f0.powi(j as i32))
            .collect();
        constants[1] = constants[1].max(rate(&log, |j| j as f64) - 3.0 * c);
    }
    (constants, product_ok)
}

fn laurent_suite() -> CriterionResult {
    const TITLE: &str = "Laurent arithmetic suite";
    const TARGET: &str =
        "1000 mul/div/log/sqrt roundtrips to 1e-11; product within (j+1)e^{C(j+2)}; quotient and log within e^{(3C+C1+A)(j+1)}, e^{(3C+C0)j} for one fitted C1, C0";
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let k = 16;
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let f = {
            let order = rng.random_range(-3..3);
            random_series(&mut rng, order, k, 0.0, 1.0)
        };
        let err = match i % 4 {
            0 => {
                let g = {
                    let order = rng.random_range(-3..3);
                    random_series(&mut rng, order, k, 0.0, 1.0)
                };
                let back = f.mul(&g).div(&g).expect("nonzero divisor");
                back.max_abs_diff(&f) / scale(&f)
            }
            1 => {
                let g = {
                    let order = rng.random_range(-3..3);
                    random_series(&mut rng, order, k, 0.0, 1.0)
                };
                let q = f.div(&g).expect("nonzero divisor");
                q.mul(&g).max_abs_diff(&f) / scale(&f)
            }
            2 => {
                let back = f.plog().expect("nonzero").exp();
                back.max_abs_diff(&f) / scale(&f)
            }
            _ => {
                let sq = f.mul(&f);
                let r = sq.sqrt(SqrtBranch::Principal).expect("even order");
                let sign = if (r.leading() - f.leading()).norm() < (r.leading() + f.leading()).norm() {
                    1.0
                } else {
                    -1.0
                };
                r.scale(C64::new(sign, 0.0)).max_abs_diff(&f) / scale(&f)
            }
        };
        worst = worst.max(err);
    }
    // the constants C1 and C0 do not depend on C: fitted on small C, where
    // they are largest, they must also bound the envelopes for larger C
    let (fitted, fit_ok) = envelope_batch(&mut rng, &[0.25, 0.5], 400);
    let (fresh, fresh_ok) = envelope_batch(&mut rng, &[1.0, 2.0, 3.0], 300);
    let envelope_ok =
        fit_ok && fresh_ok && fitted.iter().all(|x| x.is_finite()) && (0..2).all(|i| fresh[i] <= fitted[i]);
    result(
        10,
        TITLE,
        worst <= 1e-11 && envelope_ok,
        format!(
            "roundtrip error {worst:.2e}; product bound {}; C1 = {:.3}, C0 = {:.3} fitted at C <= 1/2; C in [1, 3] needs {:.3}, {:.3}",
            if fit_ok && fresh_ok { "holds" } else { "violated" },
            fitted[0],
            fitted[1],
            fresh[0],
            fresh[1]
        ),
        TARGET,
    )
}

fn singular_value_decay() -> CriterionResult {
    const TITLE: &str = "singular-value decay of the transfer operator (s = 1)";
    const TARGET: &str = "fitted ratio rho < 1 and rho(12) < rho(8)";
    let fam = builtin_three_funnel(32);
    let mut rho = Vec::new();
    for ell in [8.0, 12.0] {
        let op = match TransferOperator::new(&fam, z_at(&fam, ell), TransferConfig::default()) {
            Ok(op) => op,
            Err(e) => return failed(11, TITLE, e, TARGET),
        };
        let r = op
            .block_singular_values(C64::new(1.0, 0.0))
            .iter()
            .filter_map(|b| fit_decay(b))
            .map(|f| f.rho)
            .fold(f64::NEG_INFINITY, f64::max);
        rho.push(r);
    }
    result(
        11,
        TITLE,
        rho[0] < 1.0 && rho[1] < rho[0],
        format!("rho(8) = {:.4e}, rho(12) = {:.4e}", rho[0], rho[1]),
        TARGET,
    )
}
