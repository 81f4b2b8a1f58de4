//! Ford discs, the Schottky-figure check and the degeneration condition on
//! fixed points and multipliers.

use super::{Disc, MobiusC, SchottkyError, SchottkyFamily};
use crate::freegroup::{inverse_letter, Letter, Word};
use crate::laurent::Laurent;
use num_complex::Complex64 as C64;
use serde::Serialize;

fn letter_name(g: usize, x: Letter) -> String {
    Word::generator(g, x).to_string()
}

/// Ford discs of all `2g` letters at `z`, indexed by `letter - 1`.
///
/// For a generator `N = [[a, b], [c, d]]` with level `lambda` and
/// `L = log(1/|z|)`, `D_{N^{-1}} = {|c x + d| <= lambda^{L/2}}` contains the
/// pole of `N` and `D_N = {|c x - a| <= lambda^{-L/2}}`, so that `N` maps the
/// boundary of the first onto the boundary of the second.
pub fn ford_discs(fam: &SchottkyFamily, z: C64) -> Result<Vec<Disc>, SchottkyError> {
    let maps = fam.evaluate_at(z)?;
    let l = (1.0 / z.norm()).ln();
    let mut out = vec![
        Disc {
            center: 0.0.into(),
            radius: 1.0
        };
        2 * fam.g
    ];
    for (i, m) in maps.iter().enumerate() {
        if m.c.norm() == 0.0 {
            return Err(SchottkyError::FixedPointAtInfinity);
        }
        let rho = fam.disc_levels[i].powf(l / 2.0);
        let cn = m.c.norm();
        out[i] = Disc::new(m.a / m.c, 1.0 / (rho * cn));
        out[i + fam.g] = Disc::new(-m.d / m.c, rho / cn);
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct Margin {
    pub first: String,
    pub second: String,
    pub margin: f64,
}

/// Relative margins of a candidate Schottky figure; positive means satisfied.
#[derive(Clone, Debug, Serialize)]
pub struct FigureReport {
    pub pass: bool,
    pub min_margin: f64,
    /// `(|c_1 - c_2| - r_1 - r_2)/(r_1 + r_2)` for every pair of discs.
    pub disjointness: Vec<Margin>,
    /// `(r_a - |c' - c_a| - r')/r_a` for the image `a(D_b)` of every `b != a^{-1}`.
    pub containment: Vec<Margin>,
    /// `(r - |pole - c|)/r` for the pole of `a` inside `D_{a^{-1}}`.
    pub poles: Vec<Margin>,
}

/// Checks disjointness of the discs, `a(D_b) ⊂ D_a` for `b != a^{-1}`, and
/// that the pole of every letter lies in the disc of its inverse.
pub fn check_schottky_figure(discs: &[Disc], maps: &[MobiusC], g: usize) -> FigureReport {
    let n = 2 * g;
    let name = |i: usize| letter_name(g, (i + 1) as Letter);
    let mut disjointness = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let (p, q) = (&discs[i], &discs[j]);
            let m = ((p.center - q.center).norm() - p.radius - q.radius) / (p.radius + q.radius);
            disjointness.push(Margin {
                first: name(i),
                second: name(j),
                margin: m,
            });
        }
    }
    let mut containment = Vec::new();
    let mut poles = Vec::new();
    for i in 0..n {
        let inv = inverse_letter(g, (i + 1) as Letter) as usize - 1;
        let target = &discs[i];
        for j in (0..n).filter(|&j| j != inv) {
            let m = match maps[i].image_of_disc(&discs[j]) {
                Some(img) => (target.radius - (img.center - target.center).norm() - img.radius) / target.radius,
                None => -1.0,
            };
            containment.push(Margin {
                first: name(i),
                second: name(j),
                margin: m,
            });
        }
        let home = &discs[inv];
        let pm = if maps[i].c.norm() == 0.0 {
            -1.0
        } else {
            (home.radius - (maps[i].pole() - home.center).norm()) / home.radius
        };
        poles.push(Margin {
            first: name(i),
            second: name(inv),
            margin: pm,
        });
    }
    let min_margin = disjointness
        .iter()
        .chain(&containment)
        .chain(&poles)
        .map(|m| m.margin)
        .fold(f64::INFINITY, f64::min);
    FigureReport {
        pass: min_margin > 0.0,
        min_margin,
        disjointness,
        containment,
        poles,
    }
}

/// Minimum figure margin of a family at `z` for the given levels.
fn min_margin_with(fam: &SchottkyFamily, z: C64, levels: &[f64]) -> f64 {
    let mut f = fam.clone();
    f.disc_levels = levels.to_vec();
    match (ford_discs(&f, z), f.letter_maps(z)) {
        (Ok(d), Ok(m)) => check_schottky_figure(&d, &m, f.g).min_margin,
        _ => f64::NEG_INFINITY,
    }
}

/// Coordinate search over `log lambda_i` in `[-2, 2]` maximizing the minimum
/// figure margin at `z`. Returns the levels and the margin they achieve.
pub fn search_disc_levels(fam: &SchottkyFamily, z: C64) -> (Vec<f64>, f64) {
    let grid: Vec<f64> = (0..=80).map(|k| -2.0 + 0.05 * k as f64).collect();
    let mut levels = vec![1.0; fam.g];
    let mut best = min_margin_with(fam, z, &levels);
    for _ in 0..3 {
        for i in 0..fam.g {
            for &lg in &grid {
                let mut trial = levels.clone();
                trial[i] = lg.exp();
                let m = min_margin_with(fam, z, &trial);
                if m > best + 1e-12 {
                    best = m;
                    levels = trial;
                }
            }
        }
    }
    (levels, best)
}

/// Numeric cross-ratio `[a:b; c:d] = (a-c)(b-d)/((a-d)(b-c))`.
pub fn cross_ratio(a: C64, b: C64, c: C64, d: C64) -> C64 {
    (a - c) * (b - d) / ((a - d) * (b - c))
}

#[derive(Clone, Debug, Serialize)]
pub struct StarReport {
    /// Vanishing order of each multiplier `1/lambda_1^2` at `z = 0`.
    pub multiplier_orders: Vec<i64>,
    pub k_min: i64,
    pub pass: bool,
}

/// Order of `(u - a)(v - b)/((u - b)(v - a))`; `None` when a factor vanishes
/// to the working precision.
fn cross_ratio_order(u: &Laurent, v: &Laurent, a: &Laurent, b: &Laurent) -> Option<i64> {
    let f = [u.sub(a), v.sub(b), u.sub(b), v.sub(a)];
    if f.iter().any(|x| x.is_zero()) {
        return None;
    }
    Some(f[0].order() + f[1].order() - f[2].order() - f[3].order())
}

/// Computes the multiplier orders and
/// `K_min = min ord(lambda_i [u_j : u_k; alpha_i : beta_i])` over `j, k != i`
/// and `u` ranging over attracting and repelling fixed points.
pub fn check_star_condition(fam: &SchottkyFamily) -> Result<StarReport, SchottkyError> {
    let mut orders = Vec::with_capacity(fam.g);
    let mut fixed = Vec::with_capacity(fam.g);
    for m in &fam.generators {
        let tr = m.trace();
        let o = if tr.is_zero() { 0 } else { (-2 * tr.order()).max(0) };
        orders.push(o);
        fixed.push(m.fixed_point_series()?);
    }
    let mut k_min = i64::MAX;
    for i in 0..fam.g {
        let (ai, bi) = &fixed[i];
        for j in (0..fam.g).filter(|&j| j != i) {
            for k in (0..fam.g).filter(|&k| k != i) {
                for uj in [&fixed[j].0, &fixed[j].1] {
                    for uk in [&fixed[k].0, &fixed[k].1] {
                        match cross_ratio_order(uj, uk, ai, bi) {
                            Some(o) => k_min = k_min.min(orders[i] + o),
                            None if uj == uk => k_min = k_min.min(orders[i]),
                            None => {
                                return Err(SchottkyError::NotLoxodromic(
                                    "fixed points of distinct generators coincide".into(),
                                ))
                            }
                        }
                    }
                }
            }
        }
    }
    if k_min == i64::MAX {
        k_min = orders.iter().copied().min().unwrap_or(0);
    }
    let pass = orders.iter().all(|&o| o > 0) && k_min > 0;
    Ok(StarReport {
        multiplier_orders: orders,
        k_min,
        pass,
    })
}
