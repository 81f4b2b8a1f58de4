//! Zeros of entire functions given as black boxes: argument-principle
//! counting, recursive subdivision, Newton refinement, and the first real zero.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZeroError {
    #[error("region must have nonempty interior")]
    InvalidRegion,
    #[error("a zero lies on or too close to the boundary of {0:?} after 3 dilations")]
    BoundaryZero(Region),
    #[error("no sign change of f on [{a}, {b}]")]
    NoSignChange { a: f64, b: f64 },
    #[error("function value is not finite at {0}")]
    NonFinite(C64),
}

/// Axis-aligned rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Region {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self, ZeroError> {
        if !(re_max > re_min && im_max > im_min) {
            return Err(ZeroError::InvalidRegion);
        }
        Ok(Self {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }

    pub fn center(&self) -> C64 {
        C64::new((self.re_min + self.re_max) / 2.0, (self.im_min + self.im_max) / 2.0)
    }

    pub fn diameter(&self) -> f64 {
        (self.re_max - self.re_min).hypot(self.im_max - self.im_min)
    }

    pub fn contains(&self, z: C64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    /// Scales the rectangle about its center.
    pub fn dilate(&self, factor: f64) -> Self {
        let c = self.center();
        let hw = (self.re_max - self.re_min) / 2.0 * factor;
        let hh = (self.im_max - self.im_min) / 2.0 * factor;
        Self {
            re_min: c.re - hw,
            re_max: c.re + hw,
            im_min: c.im - hh,
            im_max: c.im + hh,
        }
    }

    pub fn translate(&self, d: C64) -> Self {
        Self {
            re_min: self.re_min + d.re,
            re_max: self.re_max + d.re,
            im_min: self.im_min + d.im,
            im_max: self.im_max + d.im,
        }
    }

    fn corners(&self) -> [C64; 4] {
        [
            C64::new(self.re_min, self.im_min),
            C64::new(self.re_max, self.im_min),
            C64::new(self.re_max, self.im_max),
            C64::new(self.re_min, self.im_max),
        ]
    }

    /// Splits at the fractions `(fx, fy)` of the width and height.
    fn split(&self, fx: f64, fy: f64) -> [Region; 4] {
        let xm = self.re_min + fx * (self.re_max - self.re_min);
        let ym = self.im_min + fy * (self.im_max - self.im_min);
        [
            Region {
                re_min: self.re_min,
                re_max: xm,
                im_min: self.im_min,
                im_max: ym,
            },
            Region {
                re_min: xm,
                re_max: self.re_max,
                im_min: self.im_min,
                im_max: ym,
            },
            Region {
                re_min: self.re_min,
                re_max: xm,
                im_min: ym,
                im_max: self.im_max,
            },
            Region {
                re_min: xm,
                re_max: self.re_max,
                im_min: ym,
                im_max: self.im_max,
            },
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Zero {
    pub location: C64,
    pub multiplicity: u32,
    pub residual: f64,
    /// Zeros within `1e-3` of the origin are excluded from the resonance
    /// correspondence by convention.
    pub excluded: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroSet {
    pub zeros: Vec<Zero>,
    pub provenance: String,
}

impl ZeroSet {
    pub fn total_multiplicity(&self) -> u32 {
        self.zeros.iter().map(|z| z.multiplicity).sum()
    }
}

/// Orders by descending real part, then ascending imaginary part, then modulus.
pub fn sort_zeros(zs: &mut [Zero]) {
    zs.sort_by(|a, b| {
        let (x, y) = (a.location, b.location);
        let key = |u: f64| (u * 1e9).round();
        key(y.re)
            .partial_cmp(&key(x.re))
            .unwrap()
            .then(key(x.im).partial_cmp(&key(y.im)).unwrap())
            .then(x.norm().partial_cmp(&y.norm()).unwrap())
    });
}

/// Phase change of `f` along the segment `p -> q`, refined until every
/// increment is below `pi/2`. Returns `None` when the segment passes too
/// close to a zero.
fn segment_phase<F: Fn(C64) -> C64>(f: &F, p: C64, q: C64, fp: C64, fq: C64, depth: u32, floor: f64) -> Option<f64> {
    let m = (p + q) / 2.0;
    let fm = f(m);
    if !fm.re.is_finite() || !fm.im.is_finite() {
        return None;
    }
    if fm.norm() <= floor {
        return None;
    }
    let d1 = (fm / fp).arg();
    let d2 = (fq / fm).arg();
    let whole = (fq / fp).arg();
    if d1.abs() < PI / 2.0 && d2.abs() < PI / 2.0 && (d1 + d2 - whole).abs() < 1e-9 {
        return Some(whole);
    }
    if depth == 0 {
        return None;
    }
    Some(segment_phase(f, p, m, fp, fm, depth - 1, floor)? + segment_phase(f, m, q, fm, fq, depth - 1, floor)?)
}

/// Winding number of `f` around the boundary of `region`, or `None` if the
/// boundary is not resolved.
fn winding<F: Fn(C64) -> C64>(f: &F, region: &Region, samples: usize) -> Option<i64> {
    let corners = region.corners();
    let n = samples.max(4) / 4;
    let mut pts = Vec::with_capacity(4 * n + 1);
    for k in 0..4 {
        let (a, b) = (corners[k], corners[(k + 1) % 4]);
        for j in 0..n {
            pts.push(a + (b - a) * (j as f64 / n as f64));
        }
    }
    pts.push(corners[0]);
    let vals: Vec<C64> = pts.iter().map(|&z| f(z)).collect();
    if vals.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return None;
    }
    // the scale is local to a window of samples, so functions that grow
    // exponentially along the contour are not mistaken for near-zeros
    let window = (n / 8).max(1);
    let floors: Vec<f64> = (0..vals.len())
        .map(|i| {
            let lo = i.saturating_sub(window);
            let hi = (i + window).min(vals.len() - 1);
            1e-13 * vals[lo..=hi].iter().map(|v| v.norm()).fold(0.0, f64::max)
        })
        .collect();
    if vals.iter().zip(&floors).any(|(v, &fl)| v.norm() <= fl) {
        return None;
    }
    let mut total = 0.0;
    for i in 0..pts.len() - 1 {
        let floor = floors[i].min(floors[i + 1]);
        total += segment_phase(f, pts[i], pts[i + 1], vals[i], vals[i + 1], 30, floor)?;
    }
    let w = total / (2.0 * PI);
    let r = w.round();
    if (w - r).abs() > 0.05 {
        return None;
    }
    Some(r as i64)
}

const BOUNDARY_SAMPLES: usize = 256;

/// Winding number of `f` on the boundary of `region`, accepted only when the
/// contours dilated by factors `1 - 1/200` and `1 + 1/200` give the same count:
/// a zero on or very near the boundary makes the phase ambiguous. Otherwise
/// the region is dilated by 1% and the check repeats (up to 3 times).
fn certified_count<F: Fn(C64) -> C64>(f: &F, region: &Region) -> Option<(Region, u32)> {
    let mut r = *region;
    for _ in 0..4 {
        let counts =
            [r, r.dilate(1.0 - 1.0 / 200.0), r.dilate(1.0 + 1.0 / 200.0)].map(|c| winding(f, &c, BOUNDARY_SAMPLES));
        if let [Some(a), Some(b), Some(c)] = counts {
            if a == b && b == c {
                return Some((r, a.max(0) as u32));
            }
        }
        log::debug!("boundary of {r:?} is not resolved; dilating by 1%");
        r = r.dilate(1.01);
    }
    None
}

/// Number of zeros (with multiplicity) inside `region`, possibly dilated by a
/// few percent when a zero lies on its boundary.
pub fn count_zeros<F: Fn(C64) -> C64>(f: &F, region: &Region) -> Result<u32, ZeroError> {
    certified_count(f, region)
        .map(|(_, n)| n)
        .ok_or(ZeroError::BoundaryZero(*region))
}

fn derivative<F: Fn(C64) -> C64>(f: &F, z: C64, h: f64) -> C64 {
    (f(z + h) - f(z - h)) / (2.0 * h)
}

/// Newton iteration started at `z0`; returns the limit if it converges.
fn newton<F: Fn(C64) -> C64>(f: &F, z0: C64, h: f64, tol: f64, scale: f64) -> Option<C64> {
    let mut z = z0;
    for _ in 0..60 {
        let fz = f(z);
        let d = derivative(f, z, h);
        if d.norm() == 0.0 || !d.re.is_finite() {
            return None;
        }
        let step = fz / d;
        z -= step;
        if step.norm() <= 1e-15 * scale.max(z.norm()) || (f(z).norm() <= tol && step.norm() < 1e-12 * scale) {
            return Some(z);
        }
    }
    let fz = f(z);
    (fz.norm() <= tol).then_some(z)
}

/// Roots inside a circle from the contour moments `(1/2 pi i) oint z^k f'/f dz`.
fn circle_roots<F: Fn(C64) -> C64>(f: &F, center: C64, radius: f64, m: usize) -> Vec<C64> {
    let q = 128;
    let h = 1e-6 * radius;
    let mut p = vec![C64::new(0.0, 0.0); m + 1];
    for j in 0..q {
        let e = C64::from_polar(1.0, 2.0 * PI * j as f64 / q as f64);
        let z = center + radius * e;
        let ratio = derivative(f, z, h) / f(z);
        // dz = i r e dtheta
        let w = ratio * radius * e / q as f64;
        let mut zk = C64::new(1.0, 0.0);
        let u = z - center;
        for pk in p.iter_mut() {
            *pk += zk * w;
            zk *= u;
        }
    }
    // Newton identities: k e_k = sum_{i=1..k} (-1)^{i-1} e_{k-i} p_i
    let mut e = vec![C64::new(1.0, 0.0)];
    for k in 1..=m {
        let mut acc = C64::new(0.0, 0.0);
        for i in 1..=k {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            acc += sign * e[k - i] * p[i];
        }
        e.push(acc / k as f64);
    }
    // monic polynomial x^m - e1 x^{m-1} + e2 x^{m-2} ...
    let roots = if m == 1 {
        vec![e[1]]
    } else {
        let mut comp = DMatrix::<C64>::zeros(m, m);
        for i in 1..m {
            comp[(i, i - 1)] = C64::new(1.0, 0.0);
        }
        for k in 1..=m {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            comp[(0, k - 1)] = sign * e[k];
        }
        comp.eigenvalues()
            .map(|v| v.iter().copied().collect())
            .unwrap_or_else(|| {
                let mean = e[1] / m as f64;
                vec![mean; m]
            })
    };
    roots.into_iter().map(|r| r + center).collect()
}

const SPLITS: [(f64, f64); 3] = [(0.4937, 0.5113), (0.5281, 0.4719), (0.4613, 0.5389)];

struct Finder<'a, F> {
    f: &'a F,
    tol: f64,
    scale: f64,
    cluster: f64,
}

impl<F: Fn(C64) -> C64 + Sync> Finder<'_, F> {
    fn solve(&self, cell: Region, count: u32, depth: u32) -> Vec<Zero> {
        if count == 0 {
            return Vec::new();
        }
        let h = 1e-6 * self.scale;
        if count == 1 {
            if let Some(z) = newton(self.f, cell.center(), h, self.tol, self.scale) {
                if cell.dilate(1.02).contains(z) {
                    return vec![self.zero(z, 1)];
                }
            }
        }
        if cell.diameter() < self.cluster || depth == 0 {
            return self.cluster_zeros(cell, count);
        }
        for (fx, fy) in SPLITS {
            let kids = cell.split(fx, fy);
            let counts: Vec<Option<i64>> = kids.par_iter().map(|k| winding(self.f, k, BOUNDARY_SAMPLES)).collect();
            if counts.iter().all(|c| c.is_some_and(|c| c >= 0))
                && counts.iter().map(|c| c.unwrap()).sum::<i64>() == count as i64
            {
                let parts: Vec<Vec<Zero>> = kids
                    .par_iter()
                    .zip(counts.par_iter())
                    .map(|(k, c)| self.solve(*k, c.unwrap() as u32, depth - 1))
                    .collect();
                return parts.into_iter().flatten().collect();
            }
        }
        log::warn!("could not subdivide {cell:?} cleanly; using contour moments");
        self.cluster_zeros(cell, count)
    }

    /// Locates `count` zeros in a small cell from contour moments; roots
    /// closer than `1e-6 scale` are merged into one multiple zero.
    fn cluster_zeros(&self, cell: Region, count: u32) -> Vec<Zero> {
        let r = 0.75 * cell.diameter();
        let roots = circle_roots(self.f, cell.center(), r, count as usize);
        let mut groups: Vec<(C64, u32)> = Vec::new();
        for z in roots {
            match groups
                .iter_mut()
                .find(|(c, m)| (*c / *m as f64 - z).norm() < 1e-6 * self.scale)
            {
                Some(g) => {
                    g.0 += z;
                    g.1 += 1;
                }
                None => groups.push((z, 1)),
            }
        }
        groups
            .into_iter()
            .map(|(sum, m)| {
                let c = sum / m as f64;
                let z = if m == 1 {
                    newton(self.f, c, 1e-6 * self.scale, self.tol, self.scale).unwrap_or(c)
                } else {
                    c
                };
                self.zero(z, m)
            })
            .collect()
    }

    fn zero(&self, z: C64, m: u32) -> Zero {
        Zero {
            location: z,
            multiplicity: m,
            residual: (self.f)(z).norm(),
            excluded: z.norm() < 1e-3,
        }
    }
}

/// All zeros in `region` with multiplicities.
pub fn find_zeros<F: Fn(C64) -> C64 + Sync>(f: &F, region: &Region, tol: f64) -> Result<ZeroSet, ZeroError> {
    let (r, count) = certified_count(f, region).ok_or(ZeroError::BoundaryZero(*region))?;
    let scale = r.diameter().max(1.0);
    let finder = Finder {
        f,
        tol,
        scale,
        cluster: 1e-4 * scale,
    };
    let mut zeros = finder.solve(r, count, 40);
    sort_zeros(&mut zeros);
    Ok(ZeroSet {
        zeros,
        provenance: if r == *region {
            format!("argument principle, Newton tolerance {tol:e}")
        } else {
            format!(
                "argument principle on the region dilated to re [{}, {}], im [{}, {}], Newton tolerance {tol:e}",
                r.re_min, r.re_max, r.im_min, r.im_max
            )
        },
    })
}

/// Largest zero of a real function in `[a, b]`: scans down from `b` for a
/// sign change, then bisects to `tol`.
pub fn first_real_zero<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64, ZeroError> {
    let steps = 2000;
    let dx = (b - a) / steps as f64;
    let mut hi = b;
    let mut fhi = f(hi);
    if fhi == 0.0 {
        return Ok(hi);
    }
    for k in 1..=steps {
        let lo = b - dx * k as f64;
        let flo = f(lo);
        if flo == 0.0 {
            return Ok(lo);
        }
        if flo.signum() != fhi.signum() {
            let (mut l, mut h, mut fl) = (lo, hi, flo);
            while h - l > tol {
                let m = 0.5 * (l + h);
                let fm = f(m);
                if fm == 0.0 {
                    return Ok(m);
                }
                if fm.signum() == fl.signum() {
                    l = m;
                    fl = fm;
                } else {
                    h = m;
                }
            }
            return Ok(0.5 * (l + h));
        }
        hi = lo;
        fhi = flo;
    }
    Err(ZeroError::NoSignChange { a, b })
}
