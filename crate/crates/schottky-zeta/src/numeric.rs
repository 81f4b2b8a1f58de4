//! Small numerical helpers shared by the zeta modules.

use num_complex::Complex64 as C64;

/// `log(1 + x)` accurate for small `|x|`.
pub fn clog1p(x: C64) -> C64 {
    if x.norm() < 1e-4 {
        let mut term = x;
        let mut acc = C64::new(0.0, 0.0);
        for n in 1..=6 {
            acc += term / n as f64;
            term *= -x;
        }
        acc
    } else {
        (1.0 + x).ln()
    }
}

/// Greatest common divisor of positive reals up to `tol`, by the Euclidean
/// algorithm. Returns `None` when the values are not commensurable at that
/// tolerance (the remainder never drops below `tol`).
pub fn real_gcd(values: &[f64], tol: f64) -> Option<f64> {
    let mut g: Option<f64> = None;
    for &v in values.iter().filter(|v| v.abs() > tol) {
        let mut a = v.abs();
        let mut b = match g {
            None => {
                g = Some(a);
                continue;
            }
            Some(x) => x,
        };
        let mut steps = 0;
        while b > tol {
            let r = a % b;
            let r = if b - r <= tol { 0.0 } else { r };
            a = b;
            b = r;
            steps += 1;
            if steps > 200 {
                return None;
            }
        }
        if a <= 10.0 * tol {
            return None;
        }
        g = Some(a);
    }
    g
}
