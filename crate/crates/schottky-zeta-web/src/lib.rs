//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every exported function returns a JSON string; errors become a thrown
//! JavaScript string. The computations live in plain functions so they can be
//! tested natively.

use num_complex::Complex64 as C64;
use schottky_zeta::graphzeta::WeightedGraph;
use schottky_zeta::intermediate::IntermediateZeta;
use schottky_zeta::schottky::{builtin_funneled_torus, builtin_three_funnel};
use schottky_zeta::selberg::{hausdorff_dim, Method};
use schottky_zeta::zeros::{find_zeros, first_real_zero, Region};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct DimPoint {
    ell: f64,
    dim: f64,
    main_term: f64,
}

/// Hausdorff dimension of the three-funnel surface at `n` lengths evenly
/// spaced in `[ell_min, ell_max]`, next to the main term `log 4 / ell`.
pub fn dimension_curve_json(ell_min: f64, ell_max: f64, n: usize) -> Result<String, String> {
    if !(ell_min > 0.0 && ell_max >= ell_min) || n == 0 || n > 200 {
        return Err("need 0 < ell_min <= ell_max and 1 <= n <= 200".into());
    }
    let fam = builtin_three_funnel(32);
    let mut points = Vec::with_capacity(n);
    for i in 0..n {
        let ell = if n == 1 {
            ell_min
        } else {
            ell_min + (ell_max - ell_min) * i as f64 / (n - 1) as f64
        };
        let z = fam.z_for_length(ell).ok_or("the family has no length scale")?;
        let dim = hausdorff_dim(&fam, C64::new(z, 0.0), Method::Det).map_err(|e| e.to_string())?;
        points.push(DimPoint {
            ell,
            dim,
            main_term: 4f64.ln() / ell,
        });
    }
    serde_json::to_string(&points).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct GraphZeros {
    period: f64,
    zeros: Vec<(f64, f64, u32)>,
}

/// Zeros of the Ihara zeta of a theta, dumbbell or figure-eight graph with
/// commensurable edge lengths, in one period strip `re_min <= Re s <= re_max`.
pub fn graph_zeros_json(kind: &str, lengths: &[f64], re_min: f64, re_max: f64) -> Result<String, String> {
    if lengths.iter().any(|&h| !(h > 0.0)) {
        return Err("edge lengths must be positive".into());
    }
    let g = match (kind, lengths) {
        ("theta", &[a, b, c]) => WeightedGraph::theta([a, b, c]),
        ("dumbbell", &[a, b, c]) => WeightedGraph::dumbbell([a, b, c]),
        ("figure-eight", &[a, b]) => WeightedGraph::figure_eight([a, b]),
        _ => return Err(format!("unknown graph `{kind}` with {} lengths", lengths.len())),
    };
    let period = g.strip_period(None).ok_or("edge lengths are incommensurable")?;
    // start the strip slightly off the real axis so that real zeros stay inside
    let region = Region::new(re_min, re_max, -0.5 * period + 0.123, 0.5 * period + 0.123).map_err(|e| e.to_string())?;
    let set = find_zeros(&|s| g.ihara_det(s, None), &region, 1e-12).map_err(|e| e.to_string())?;
    let zeros = set
        .zeros
        .iter()
        .map(|z| (z.location.re, z.location.im, z.multiplicity))
        .collect();
    serde_json::to_string(&GraphZeros { period, zeros }).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct TorusScan {
    s: Vec<f64>,
    value: Vec<f64>,
    first_zero: Option<f64>,
    dim_estimate: Option<f64>,
}

/// `Z_0(s)` of the funneled torus with angle `phi` at `ell` on `n` real
/// points in `[0, s_max]`, with its first real zero and the dimension
/// estimate `s0 / (ell / 2)`.
pub fn torus_scan_json(phi: f64, ell: f64, s_max: f64, n: usize) -> Result<String, String> {
    if !(phi > 0.0 && phi < std::f64::consts::PI) || !(ell > 0.0) || !(s_max > 0.0) || !(2..=2000).contains(&n) {
        return Err("need 0 < phi < pi, ell > 0, s_max > 0 and 2 <= n <= 2000".into());
    }
    let fam = builtin_funneled_torus(phi, 32);
    let z = C64::new(fam.z_for_length(ell).ok_or("the family has no length scale")?, 0.0);
    let iz = IntermediateZeta::new(&fam, 0).map_err(|e| e.to_string())?;
    let f = |s: f64| iz.eval(z, C64::new(s, 0.0)).re;
    let s: Vec<f64> = (0..n).map(|i| s_max * i as f64 / (n - 1) as f64).collect();
    let value = s.iter().map(|&x| f(x)).collect();
    let first_zero = first_real_zero(&f, 1e-3, s_max, 1e-13).ok();
    let dim_estimate = first_zero.map(|s0| s0 / (1.0 / z.re).ln());
    serde_json::to_string(&TorusScan {
        s,
        value,
        first_zero,
        dim_estimate,
    })
    .map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = dimensionCurve)]
pub fn dimension_curve(ell_min: f64, ell_max: f64, n: usize) -> Result<String, JsValue> {
    dimension_curve_json(ell_min, ell_max, n).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = graphZeros)]
pub fn graph_zeros(kind: &str, lengths: Vec<f64>, re_min: f64, re_max: f64) -> Result<String, JsValue> {
    graph_zeros_json(kind, &lengths, re_min, re_max).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = torusScan)]
pub fn torus_scan(phi: f64, ell: f64, s_max: f64, n: usize) -> Result<String, JsValue> {
    torus_scan_json(phi, ell, s_max, n).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn dimension_approaches_main_term() {
        let v: Value = serde_json::from_str(&dimension_curve_json(8.0, 16.0, 3).unwrap()).unwrap();
        let pts = v.as_array().unwrap();
        assert_eq!(pts.len(), 3);
        let gap = |p: &Value| (p["dim"].as_f64().unwrap() - p["main_term"].as_f64().unwrap()).abs();
        assert!(gap(&pts[2]) < gap(&pts[0]));
        assert!(gap(&pts[2]) < 1e-5);
    }

    #[test]
    fn theta_zeros_in_one_strip() {
        // theta(2, 2, 2): (1 - u^4)^2 (1 - 4 u^4) with u = e^{-s}; one strip
        // of height pi holds two double zeros on Re s = 0 and two simple
        // zeros on Re s = log(2)/2
        let v: Value = serde_json::from_str(&graph_zeros_json("theta", &[2.0, 2.0, 2.0], -1.0, 1.0).unwrap()).unwrap();
        assert!((v["period"].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-12);
        let zeros = v["zeros"].as_array().unwrap();
        let total: u64 = zeros.iter().map(|z| z[2].as_u64().unwrap()).sum();
        assert_eq!(total, 6);
        let simple = zeros.iter().filter(|z| z[2] == 1).count();
        assert_eq!(simple, 2);
        for z in zeros.iter().filter(|z| z[2] == 1) {
            assert!((z[0].as_f64().unwrap() - 2f64.ln() / 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn torus_scan_finds_the_dimension() {
        let v: Value =
            serde_json::from_str(&torus_scan_json(std::f64::consts::FRAC_PI_2, 10.0, 3.0, 50).unwrap()).unwrap();
        assert_eq!(v["s"].as_array().unwrap().len(), 50);
        let d = v["dim_estimate"].as_f64().unwrap();
        assert!((0.110..=0.120).contains(&d), "{d}");
    }

    #[test]
    fn bad_input_is_reported() {
        assert!(graph_zeros_json("square", &[1.0], -1.0, 1.0).is_err());
        assert!(graph_zeros_json("theta", &[1.0, -2.0, 1.0], -1.0, 1.0).is_err());
        assert!(dimension_curve_json(0.0, 1.0, 3).is_err());
        assert!(torus_scan_json(0.0, 10.0, 3.0, 10).is_err());
    }
}
