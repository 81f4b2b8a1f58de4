//! Möbius transformations with complex entries and with Laurent-series entries.

use crate::laurent::{Laurent, SqrtBranch};
use crate::schottky::SchottkyError;
use num_complex::Complex64 as C64;

/// A closed disc in the complex plane.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Disc {
    pub center: C64,
    pub radius: f64,
}

impl Disc {
    pub fn new(center: C64, radius: f64) -> Self {
        assert!(radius > 0.0, "disc radius must be positive");
        Self { center, radius }
    }

    pub fn contains(&self, x: C64) -> bool {
        (x - self.center).norm() <= self.radius
    }
}

/// `x -> (a x + b)/(c x + d)` with `ad - bc = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MobiusC {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl MobiusC {
    /// Builds the map and rescales by the square root of the determinant
    /// closest to 1.
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        let det = a * d - b * c;
        let s = det.sqrt();
        if (det - 1.0).norm() > 1e-12 {
            log::debug!("renormalizing determinant {det}");
        }
        Self {
            a: a / s,
            b: b / s,
            c: c / s,
            d: d / s,
        }
    }

    /// Builds the map without touching the determinant.
    pub const fn raw(a: C64, b: C64, c: C64, d: C64) -> Self {
        Self { a, b, c, d }
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn identity() -> Self {
        Self::raw(1.0.into(), 0.0.into(), 0.0.into(), 1.0.into())
    }

    pub fn det(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> C64 {
        self.a + self.d
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::raw(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }

    /// Inverse of a unimodular map.
    pub fn inverse(&self) -> Self {
        Self::raw(self.d, -self.b, -self.c, self.a)
    }

    pub fn apply(&self, x: C64) -> C64 {
        (self.a * x + self.b) / (self.c * x + self.d)
    }

    /// `d/dx` of the map, `det / (c x + d)^2`.
    pub fn derivative(&self, x: C64) -> C64 {
        let q = self.c * x + self.d;
        self.det() / (q * q)
    }

    /// The point sent to infinity.
    pub fn pole(&self) -> C64 {
        -self.d / self.c
    }

    pub fn frobenius_diff(&self, o: &Self) -> f64 {
        ((self.a - o.a).norm_sqr() + (self.b - o.b).norm_sqr() + (self.c - o.c).norm_sqr() + (self.d - o.d).norm_sqr())
            .sqrt()
    }

    /// Eigenvalue of largest modulus.
    pub fn lambda1(&self) -> C64 {
        let t = self.trace() / 2.0;
        let r = (t * t - self.det()).sqrt();
        let (p, q) = (t + r, t - r);
        if p.norm() >= q.norm() {
            p
        } else {
            q
        }
    }

    /// Attracting and repelling fixed points; requires `c != 0`.
    pub fn fixed_points(&self) -> Result<(C64, C64), SchottkyError> {
        if self.c.norm() == 0.0 {
            return Err(SchottkyError::FixedPointAtInfinity);
        }
        let t = self.trace();
        let r = (t * t - 4.0 * self.det()).sqrt();
        let x1 = (self.a - self.d + r) / (2.0 * self.c);
        let x2 = (self.a - self.d - r) / (2.0 * self.c);
        if self.derivative(x1).norm() < self.derivative(x2).norm() {
            Ok((x1, x2))
        } else {
            Ok((x2, x1))
        }
    }

    /// Image of a disc that does not contain the pole.
    pub fn image_of_disc(&self, disc: &Disc) -> Option<Disc> {
        if self.c.norm() == 0.0 {
            let k = self.a / self.d;
            return Some(Disc {
                center: k * disc.center + self.b / self.d,
                radius: k.norm() * disc.radius,
            });
        }
        // w = c x + d, then 1/w, then a/c - 1/(c w)
        let w0 = self.c * disc.center + self.d;
        let rw = self.c.norm() * disc.radius;
        let den = w0.norm_sqr() - rw * rw;
        if den <= 0.0 {
            return None;
        }
        let inv_center = w0.conj() / den;
        let inv_radius = rw / den;
        Some(Disc {
            center: self.a / self.c - inv_center / self.c,
            radius: inv_radius / self.c.norm(),
        })
    }
}

/// Displacement length of a real hyperbolic element, `2 arccosh(|tr|/2)`.
pub fn displacement_length_r(m: &MobiusC) -> Result<f64, SchottkyError> {
    let t = m.trace();
    if t.im.abs() > 1e-10 * t.norm().max(1.0) {
        return Err(SchottkyError::NotLoxodromic(format!("trace {t} is not real")));
    }
    let x = t.re.abs() / 2.0;
    if x <= 1.0 {
        return Err(SchottkyError::NotLoxodromic(format!("|tr| = {} <= 2", t.re.abs())));
    }
    Ok(2.0 * x.acosh())
}

/// Displacement length and holonomy, `l = 2 log|lambda_1|`, `theta = -2 arg lambda_1`.
pub fn displacement_length_c(m: &MobiusC) -> Result<(f64, f64), SchottkyError> {
    let l1 = m.lambda1();
    let l2 = m.det() / l1;
    if (l1.norm() - l2.norm()).abs() <= 1e-14 * l1.norm() {
        return Err(SchottkyError::NotLoxodromic("eigenvalues of equal modulus".into()));
    }
    let ell = 2.0 * l1.norm().ln();
    Ok((ell, crate::laurent::wrap_angle(-2.0 * l1.arg())))
}

/// A 2x2 matrix of Laurent series.
#[derive(Clone, Debug, PartialEq)]
pub struct MobiusSeries {
    pub a: Laurent,
    pub b: Laurent,
    pub c: Laurent,
    pub d: Laurent,
}

impl MobiusSeries {
    pub fn new(a: Laurent, b: Laurent, c: Laurent, d: Laurent) -> Self {
        Self { a, b, c, d }
    }

    pub fn identity(truncation: usize) -> Self {
        let one = Laurent::constant(1.0.into(), truncation);
        Self::new(one.clone(), Laurent::zero(), Laurent::zero(), one)
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(
            self.a.mul(&o.a).add(&self.b.mul(&o.c)),
            self.a.mul(&o.b).add(&self.b.mul(&o.d)),
            self.c.mul(&o.a).add(&self.d.mul(&o.c)),
            self.c.mul(&o.b).add(&self.d.mul(&o.d)),
        )
    }

    /// Inverse assuming unit determinant.
    pub fn inverse(&self) -> Self {
        Self::new(self.d.clone(), self.b.neg(), self.c.neg(), self.a.clone())
    }

    pub fn trace(&self) -> Laurent {
        self.a.add(&self.d)
    }

    pub fn det(&self) -> Laurent {
        self.a.mul(&self.d).sub(&self.b.mul(&self.c))
    }

    /// Conjugation `p * self * p^{-1}` by a constant unimodular matrix.
    pub fn conjugate_by(&self, p: &MobiusC, truncation: usize) -> Self {
        let k = |x: C64| Laurent::constant(x, truncation);
        let ps = Self::new(k(p.a), k(p.b), k(p.c), k(p.d));
        ps.mul(self).mul(&ps.inverse())
    }

    /// Entrywise evaluation at `z`, renormalized to unit determinant.
    pub fn eval(&self, z: C64) -> Result<MobiusC, SchottkyError> {
        if z.norm() == 0.0 {
            return Err(SchottkyError::PoleAtZero);
        }
        Ok(MobiusC::new(
            self.a.eval(z)?,
            self.b.eval(z)?,
            self.c.eval(z)?,
            self.d.eval(z)?,
        ))
    }

    /// Fixed points `((a - d) +- sqrt(tr^2 - 4)) / (2c)` as series, attracting first.
    pub fn fixed_point_series(&self) -> Result<(Laurent, Laurent), SchottkyError> {
        if self.c.is_zero() {
            return Err(SchottkyError::FixedPointAtInfinity);
        }
        let tr = self.trace();
        let k = tr.truncation();
        let disc = tr.mul(&tr).sub(&Laurent::constant(4.0.into(), k));
        if disc.order() % 2 != 0 {
            return Err(SchottkyError::OddDiscriminant(disc.order()));
        }
        let r = disc.sqrt(SqrtBranch::Principal)?;
        let two_c = self.c.scale(2.0.into());
        let amd = self.a.sub(&self.d);
        let x1 = amd.add(&r).div(&two_c)?;
        let x2 = amd.sub(&r).div(&two_c)?;
        // the attracting point is where c x + d has the more negative order
        let q1 = self.c.mul(&x1).add(&self.d);
        let q2 = self.c.mul(&x2).add(&self.d);
        let o1 = if q1.is_zero() { i64::MAX } else { q1.order() };
        let o2 = if q2.is_zero() { i64::MAX } else { q2.order() };
        if o1 <= o2 {
            Ok((x1, x2))
        } else {
            Ok((x2, x1))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn real_length_inverts_cosh() {
        let (c, s) = (C64::new(5f64.cosh(), 0.0), C64::new(5f64.sinh(), 0.0));
        let m = MobiusC::raw(c, s, s, c);
        assert!((displacement_length_r(&m).unwrap() - 10.0).abs() < 1e-12);
        let p = MobiusC::real(1.0, 1.0, 0.0, 1.0);
        assert!(displacement_length_r(&p).is_err());
    }

    #[test]
    fn diagonal_length_and_holonomy() {
        let m = MobiusC::real(2.0, 0.0, 0.0, 0.5);
        let (l, th) = displacement_length_c(&m).unwrap();
        assert!((l - 2.0 * 2f64.ln()).abs() < 1e-15);
        assert!(th.abs() < 1e-15);
    }

    #[test]
    fn complex_length_matches_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let r = |rng: &mut ChaCha8Rng| C64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let (a, b, c) = (r(&mut rng), r(&mut rng), r(&mut rng));
            if a.norm() < 0.3 {
                continue;
            }
            let d = (1.0 + b * c) / a;
            let m = MobiusC::raw(a, b, c, d);
            let Ok((l, th)) = displacement_length_c(&m) else {
                continue;
            };
            // eigenvalue oracle: roots of x^2 - tr x + 1 via nalgebra
            let mat = nalgebra::Matrix2::new(a, b, c, d);
            let eig = mat.eigenvalues().expect("2x2 eigenvalues");
            let big = if eig[0].norm() > eig[1].norm() { eig[0] } else { eig[1] };
            assert!((l - 2.0 * big.norm().ln()).abs() < 1e-10);
            let dth = crate::laurent::wrap_angle(th + 2.0 * big.arg());
            assert!(dth.abs() < 1e-10);
        }
    }

    #[test]
    fn disc_image_matches_boundary_points() {
        let m = MobiusC::real(2.0, 1.0, 1.0, 1.0);
        let d = Disc::new(C64::new(3.0, 0.5), 0.7);
        let img = m.image_of_disc(&d).unwrap();
        for k in 0..16 {
            let x = d.center + d.radius * C64::from_polar(1.0, k as f64 * 0.4);
            let y = m.apply(x);
            assert!(((y - img.center).norm() - img.radius).abs() < 1e-12);
        }
    }

    #[test]
    fn fixed_points_are_fixed() {
        let m = MobiusC::real(3.0, 1.0, 2.0, 1.0);
        let (att, rep) = m.fixed_points().unwrap();
        assert!((m.apply(att) - att).norm() < 1e-12);
        assert!((m.apply(rep) - rep).norm() < 1e-12);
        assert!(m.derivative(att).norm() < 1.0);
    }
}
