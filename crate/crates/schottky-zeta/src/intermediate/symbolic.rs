//! Exact expansion of `det(I - V(s))` as a polynomial with integer
//! coefficients in `u_j = exp(s mu_j(z))`.

use super::{CocycleTable, IntermediateError};
use crate::numeric::real_gcd;
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

/// `mu(z) = constant + Re(sum_k coeffs[k] z^k) / log(1/|z|)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentAtom {
    pub constant: f64,
    pub coeffs: Vec<C64>,
}

impl ExponentAtom {
    pub fn eval(&self, z: C64) -> f64 {
        let mut acc = C64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        self.constant + acc.re / (1.0 / z.norm()).ln()
    }

    fn truncated(&self, m: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.truncate(m + 1);
        while coeffs.last().is_some_and(|c| c.norm() == 0.0) {
            coeffs.pop();
        }
        Self {
            constant: self.constant,
            coeffs,
        }
    }

    fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.coeffs.iter().all(|c| c.norm() == 0.0)
    }
}

impl fmt::Display for ExponentAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.constant != 0.0 {
            parts.push(format!("{}", self.constant));
        }
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.norm() == 0.0 {
                continue;
            }
            let coef = if c.im == 0.0 {
                format!("{}", c.re)
            } else if c.re == 0.0 {
                format!("{}i", c.im)
            } else {
                format!("({}{:+}i)", c.re, c.im)
            };
            parts.push(format!("Re({coef} z^{k})/log(1/|z|)"));
        }
        if parts.is_empty() {
            parts.push("0".into());
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// `P_M(u_1, ..., u_J)` with `u_j = exp(s mu_j(z))`; exponents may be negative.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymbolicZetaM {
    pub m: usize,
    pub atoms: Vec<ExponentAtom>,
    /// `(exponents, coefficient)`, sorted by exponent vector.
    pub terms: Vec<(Vec<i32>, i128)>,
}

const BITS: u32 = 12;
const BIAS: i64 = 1 << (BITS - 1);
const MAX_ATOMS: usize = 10;
/// Cap on coefficient multiplications in the Newton recursion.
const WORK_CAP: u64 = 2_000_000_000;

type Poly = HashMap<u128, i128>;

fn pack(e: &[i32]) -> Result<u128, IntermediateError> {
    let mut k = 0u128;
    for (j, &x) in e.iter().enumerate() {
        let b = x as i64 + BIAS;
        if !(0..(1 << BITS)).contains(&b) {
            return Err(IntermediateError::ExpansionTooLarge(format!(
                "exponent {x} out of range"
            )));
        }
        k |= (b as u128) << (BITS * j as u32);
    }
    Ok(k)
}

fn unpack(k: u128, j: usize) -> Vec<i32> {
    (0..j)
        .map(|i| (((k >> (BITS * i as u32)) & ((1 << BITS) - 1)) as i64 - BIAS) as i32)
        .collect()
}

fn bias_key(j: usize) -> u128 {
    (0..j).map(|i| (BIAS as u128) << (BITS * i as u32)).sum()
}

fn overflow() -> IntermediateError {
    IntermediateError::ExpansionTooLarge("integer coefficient overflow".into())
}

fn add_into(acc: &mut Poly, k: u128, c: i128) -> Result<(), IntermediateError> {
    let slot = acc.entry(k).or_insert(0);
    *slot = slot.checked_add(c).ok_or_else(overflow)?;
    if *slot == 0 {
        acc.remove(&k);
    }
    Ok(())
}

/// Integer decomposition of the component values over one or more atoms.
struct Component {
    /// Atom coefficient for a unit exponent.
    atoms: Vec<f64>,
    /// Per entry, the exponent on each atom of this component.
    exponents: Vec<Vec<i32>>,
}

fn decompose(values: &[f64]) -> Result<Option<Component>, IntermediateError> {
    let scale = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if scale < 1e-10 {
        return Ok(None);
    }
    let snap = |v: f64| if v.abs() < 1e-10 * scale.max(1.0) { 0.0 } else { v };
    let vals: Vec<f64> = values.iter().map(|&v| snap(v)).collect();
    if let Some(g) = real_gcd(&vals, 1e-9 * scale.max(1.0)) {
        let mut exps = Vec::with_capacity(vals.len());
        for &v in &vals {
            let k = (v / g).round();
            if (v - k * g).abs() > 1e-8 * scale.max(1.0) || k.abs() > 1000.0 {
                return Err(IntermediateError::IncommensurableExponent { value: v, basis: g });
            }
            exps.push(vec![k as i32]);
        }
        return Ok(Some(Component {
            atoms: vec![g],
            exponents: exps,
        }));
    }
    // incommensurable values: one atom per distinct magnitude
    let mut atoms: Vec<f64> = Vec::new();
    for &v in &vals {
        if v != 0.0 && !atoms.iter().any(|a| (a - v.abs()).abs() <= 1e-10 * scale) {
            atoms.push(v.abs());
        }
    }
    let exponents = vals
        .iter()
        .map(|&v| {
            atoms
                .iter()
                .map(|a| {
                    if v != 0.0 && (a - v.abs()).abs() <= 1e-10 * scale {
                        v.signum() as i32
                    } else {
                        0
                    }
                })
                .collect()
        })
        .collect();
    Ok(Some(Component { atoms, exponents }))
}

impl SymbolicZetaM {
    /// Expands `det(I - V)` for a cocycle table.
    pub fn from_table(table: &CocycleTable) -> Result<Self, IntermediateError> {
        let entries = &table.entries;
        let mut atoms = vec![ExponentAtom {
            constant: -1.0,
            coeffs: Vec::new(),
        }];
        let mut exps: Vec<Vec<i32>> = entries.iter().map(|e| vec![-e.l.na_part as i32]).collect();
        for k in 0..=table.m {
            // Re(b z^k) = Re(b) Re(z^k) + Re(i Im(b) z^k); the imaginary part of
            // b_0 never contributes
            let parts: &[bool] = if k == 0 { &[false] } else { &[false, true] };
            for &imag in parts {
                let values: Vec<f64> = entries
                    .iter()
                    .map(|e| {
                        let b = e.l.analytic.get(k).copied().unwrap_or_default();
                        if imag {
                            b.im
                        } else {
                            b.re
                        }
                    })
                    .collect();
                if let Some(comp) = decompose(&values)? {
                    for g in &comp.atoms {
                        let mut coeffs = vec![C64::new(0.0, 0.0); k + 1];
                        coeffs[k] = if imag { C64::new(0.0, *g) } else { C64::new(*g, 0.0) };
                        atoms.push(ExponentAtom { constant: 0.0, coeffs });
                    }
                    for (row, ce) in exps.iter_mut().zip(comp.exponents) {
                        row.extend(ce);
                    }
                }
            }
        }
        if atoms.len() > MAX_ATOMS {
            return Err(IntermediateError::ExpansionTooLarge(format!(
                "{} exponent atoms (cap {MAX_ATOMS})",
                atoms.len()
            )));
        }
        let j = atoms.len();
        let verts = table.vertices();
        let idx: HashMap<&[u8], usize> = verts.iter().enumerate().map(|(i, w)| (w.letters(), i)).collect();
        let nv = verts.len();
        // adjacency: (target, packed monomial) per source
        let mut adj: Vec<Vec<(usize, u128)>> = vec![Vec::new(); nv];
        for (e, ex) in entries.iter().zip(&exps) {
            let mut key = vec![e.letter];
            key.extend_from_slice(e.suffix.letters());
            adj[idx[&key[..table.n - 1]]].push((idx[&key[1..]], pack(ex)?));
        }
        let bias = bias_key(j);
        let shift = |a: u128, b: u128| a + b - bias;
        // power sums p_k = tr V^k by propagation from every vertex
        let mut p: Vec<Poly> = vec![Poly::new(); nv + 1];
        for start in 0..nv {
            let mut cur: Vec<Poly> = vec![Poly::new(); nv];
            cur[start].insert(bias, 1);
            for k in 1..=nv {
                let mut next: Vec<Poly> = vec![Poly::new(); nv];
                for (u, poly) in cur.iter().enumerate() {
                    for &(w, mono) in &adj[u] {
                        for (&key, &c) in poly {
                            add_into(&mut next[w], shift(key, mono), c)?;
                        }
                    }
                }
                for (&key, &c) in &next[start] {
                    add_into(&mut p[k], key, c)?;
                }
                cur = next;
            }
        }
        // Newton identities: k e_k = sum_{i=1..k} (-1)^{i-1} e_{k-i} p_i
        let mut e: Vec<Poly> = vec![Poly::from([(bias, 1i128)])];
        let mut work = 0u64;
        for k in 1..=nv {
            let mut acc = Poly::new();
            for i in 1..=k {
                let sign: i128 = if i % 2 == 1 { 1 } else { -1 };
                work += (e[k - i].len() * p[i].len()) as u64;
                if work > WORK_CAP {
                    return Err(IntermediateError::ExpansionTooLarge(format!(
                        "Newton recursion exceeds {WORK_CAP} coefficient products"
                    )));
                }
                for (&ka, &ca) in &e[k - i] {
                    for (&kb, &cb) in &p[i] {
                        let c = ca.checked_mul(cb).ok_or_else(overflow)?;
                        add_into(&mut acc, shift(ka, kb), sign * c)?;
                    }
                }
            }
            let mut ek = Poly::new();
            for (key, c) in acc {
                if c % k as i128 != 0 {
                    return Err(IntermediateError::ExpansionTooLarge(format!(
                        "inexact division by {k} in the Newton recursion"
                    )));
                }
                ek.insert(key, c / k as i128);
            }
            e.push(ek);
        }
        // det(I - V) = sum_k (-1)^k e_k
        let mut det = Poly::new();
        for (k, ek) in e.iter().enumerate() {
            let sign: i128 = if k % 2 == 0 { 1 } else { -1 };
            for (&key, &c) in ek {
                add_into(&mut det, key, sign * c)?;
            }
        }
        let terms: BTreeMap<Vec<i32>, i128> = det.into_iter().map(|(k, c)| (unpack(k, j), c)).collect();
        Ok(Self {
            m: table.m,
            atoms,
            terms: terms.into_iter().collect(),
        }
        .prune())
    }

    /// Drops atoms whose exponent vanishes in every term.
    fn prune(self) -> Self {
        let keep: Vec<usize> = (0..self.atoms.len())
            .filter(|&i| i == 0 || self.terms.iter().any(|(e, _)| e[i] != 0))
            .collect();
        Self {
            m: self.m,
            atoms: keep.iter().map(|&i| self.atoms[i].clone()).collect(),
            terms: self
                .terms
                .into_iter()
                .map(|(e, c)| (keep.iter().map(|&i| e[i]).collect(), c))
                .collect(),
        }
    }

    pub fn eval(&self, z: C64, s: C64) -> C64 {
        let mu: Vec<f64> = self.atoms.iter().map(|a| a.eval(z)).collect();
        self.terms
            .iter()
            .map(|(e, c)| {
                let x: f64 = e.iter().zip(&mu).map(|(&k, m)| k as f64 * m).sum();
                *c as f64 * (s * x).exp()
            })
            .sum()
    }

    /// `Z_{M'}` for `M' <= M`: every exponent atom keeps its terms up to `z^{M'}`.
    pub fn specialize(&self, m: usize) -> Self {
        let truncated: Vec<ExponentAtom> = self.atoms.iter().map(|a| a.truncated(m)).collect();
        let keep: Vec<usize> = (0..truncated.len()).filter(|&i| !truncated[i].is_zero()).collect();
        let mut merged: BTreeMap<Vec<i32>, i128> = BTreeMap::new();
        for (e, c) in &self.terms {
            let key: Vec<i32> = keep.iter().map(|&i| e[i]).collect();
            *merged.entry(key).or_insert(0) += c;
        }
        Self {
            m: m.min(self.m),
            atoms: keep.iter().map(|&i| truncated[i].clone()).collect(),
            terms: merged.into_iter().filter(|(_, c)| *c != 0).collect(),
        }
        .prune()
    }

    /// Ihara zeta `sum_n c_n e^{-n s}` obtained by dropping all analytic parts;
    /// returned as `(n, c_n)` sorted by `n`.
    pub fn ihara_from(&self) -> Vec<(i64, i128)> {
        let mut out: BTreeMap<i64, i128> = BTreeMap::new();
        for (e, c) in &self.terms {
            let rate: f64 = e.iter().zip(&self.atoms).map(|(&k, a)| -(k as f64) * a.constant).sum();
            *out.entry(rate.round() as i64).or_insert(0) += c;
        }
        out.into_iter().filter(|(_, c)| *c != 0).collect()
    }
}

impl fmt::Display for SymbolicZetaM {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.atoms.iter().enumerate() {
            writeln!(f, "u{} = exp(s * ({a}))", i + 1)?;
        }
        let mut first = true;
        write!(f, "Z_{} = ", self.m)?;
        for (e, c) in &self.terms {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k != 0)
                .map(|(i, &k)| {
                    if k == 1 {
                        format!("u{}", i + 1)
                    } else {
                        format!("u{}^{k}", i + 1)
                    }
                })
                .collect();
            let sign = if *c < 0 {
                "-"
            } else if first {
                ""
            } else {
                "+"
            };
            let mag = c.unsigned_abs();
            let body = match (mono.is_empty(), mag) {
                (true, _) => mag.to_string(),
                (false, 1) => mono.join("*"),
                (false, _) => format!("{mag}*{}", mono.join("*")),
            };
            if first {
                write!(f, "{sign}{body}")?;
            } else {
                write!(f, " {sign} {body}")?;
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::super::IntermediateZeta;
    use super::*;
    use crate::graphzeta::WeightedGraph;
    use crate::schottky::{builtin_funneled_torus, builtin_three_funnel, builtin_two_generator};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn ihara_eval(poly: &[(i64, i128)], s: C64) -> C64 {
        poly.iter().map(|&(n, c)| c as f64 * (-s * n as f64).exp()).sum()
    }

    #[test]
    fn packing_roundtrip() {
        let e = vec![3, -7, 0, 100];
        assert_eq!(unpack(pack(&e).unwrap(), 4), e);
        let (a, b) = (pack(&[1, -2]).unwrap(), pack(&[4, 5]).unwrap());
        assert_eq!(unpack(a + b - bias_key(2), 2), vec![5, 3]);
    }

    #[test]
    fn decomposition_finds_gcd() {
        let c = decompose(&[0.5, -1.0, 0.0, 1.5]).unwrap().unwrap();
        assert_eq!(c.atoms, vec![0.5]);
        assert_eq!(c.exponents, vec![vec![1], vec![-2], vec![0], vec![3]]);
        assert!(decompose(&[0.0, 1e-14]).unwrap().is_none());
    }

    #[test]
    fn symbolic_matches_numeric_determinant() {
        for (fam, m) in [(builtin_three_funnel(32), 2), (builtin_funneled_torus(1.0, 32), 1)] {
            let iz = IntermediateZeta::new(&fam, m).unwrap();
            let sym = iz.symbolic().unwrap();
            for (z, s) in [(0.05, C64::new(0.3, 0.2)), (0.1, C64::new(-0.4, 1.5))] {
                let z = C64::new(z, 0.0);
                let a = sym.eval(z, s);
                let b = iz.eval(z, s);
                assert!((a - b).norm() <= 1e-9 * b.norm().max(1.0), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn three_funnel_ihara_coefficients() {
        let iz = IntermediateZeta::new(&builtin_three_funnel(32), 2).unwrap();
        let sym = iz.symbolic().unwrap();
        assert_eq!(sym.ihara_from(), vec![(0, 1), (4, -6), (8, 9), (12, -4)]);
    }

    #[test]
    fn specialize_matches_fresh_table() {
        let fam = builtin_three_funnel(32);
        let sym = IntermediateZeta::new(&fam, 2).unwrap().symbolic().unwrap();
        for m in [0, 1] {
            let fresh = IntermediateZeta::new(&fam, m).unwrap();
            let sp = sym.specialize(m);
            for (z, s) in [(0.07, C64::new(0.2, -0.9)), (0.12, C64::new(1.1, 0.4))] {
                let z = C64::new(z, 0.0);
                let (a, b) = (sp.eval(z, s), fresh.eval(z, s));
                assert!((a - b).norm() <= 1e-8 * b.norm().max(1.0), "M'={m}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn three_funnel_second_order_closed_form() {
        // Z_2 x2^12 = (x2^4 + x1^4 (x2^2 - 1)^2 + x1^2 (x2^2 - 2 x2^4))^2
        //           * (x2^4 + x1^4 (x2^2 - 1)^2 - 2 x1^2 (x2^2 + x2^4)),
        // x1 = e^{-2s}, x2 = e^{s z^2 / log(1/z)}. The exponent of x2 is fixed
        // by l(a1 A2) = 8 log(1/z) + 2 z^2 + O(z^4); with half of it the
        // polynomial does not match.
        let sym = IntermediateZeta::new(&builtin_three_funnel(32), 2)
            .unwrap()
            .symbolic()
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let z = rng.random_range(0.01..0.3);
            let s = C64::new(rng.random_range(-0.5..1.5), rng.random_range(-3.0..3.0));
            let x1 = (-2.0 * s).exp();
            let x2 = (s * (z * z) / (1.0 / z).ln()).exp();
            let (x1s, x2s) = (x1 * x1, x2 * x2);
            let x2q = x2s * x2s;
            let d = (x2s - 1.0) * (x2s - 1.0);
            let f = (x2q + x1s * x1s * d + x1s * (x2s - 2.0 * x2q)).powu(2)
                * (x2q + x1s * x1s * d - 2.0 * x1s * (x2s + x2q));
            let ours = sym.eval(C64::new(z, 0.0), s) * x2.powu(12);
            assert!(
                (ours - f).norm() <= 1e-8 * f.norm().max(1.0),
                "z={z} s={s}: {ours} vs {f}"
            );
        }
    }

    #[test]
    fn torus_ihara_is_figure_eight() {
        // figure eight with loops of length 2: (1 - u^4)(1 - u^2)(1 - 3u^2)
        let sym = IntermediateZeta::new(&builtin_funneled_torus(FRAC_PI_2, 32), 0)
            .unwrap()
            .symbolic()
            .unwrap();
        assert_eq!(sym.ihara_from(), vec![(0, 1), (2, -4), (4, 2), (6, 4), (8, -3)]);
    }

    #[test]
    fn dumbbell_ihara_matches_graph() {
        let sym = IntermediateZeta::new(&builtin_two_generator([1.0, 1.0, 1.0], [1, 1, 4], 32), 0)
            .unwrap()
            .symbolic()
            .unwrap();
        let poly = sym.ihara_from();
        let g = WeightedGraph::dumbbell([2.0, 2.0, 2.0]);
        for s in [C64::new(0.3, 0.0), C64::new(0.7, 2.1), C64::new(-0.2, -1.3)] {
            let (a, b) = (ihara_eval(&poly, s), g.ihara_det(s, None));
            assert!((a - b).norm() <= 1e-10 * b.norm().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn second_order_length_coefficient() {
        // l(a1 A2) = 8 log(1/z) + 2 z^2 + O(z^4), against the trace of the matrix
        let fam = builtin_three_funnel(32);
        let w = crate::freegroup::Word::parse(2, "a1 A2").unwrap();
        let (na, a) = fam.length_expansion(&w, 2).unwrap();
        assert_eq!(na, 8);
        assert!((a[2] - C64::new(2.0, 0.0)).norm() < 1e-12);
        let z = 0.01;
        let maps = fam.letter_maps(C64::new(z, 0.0)).unwrap();
        let m = crate::schottky::SchottkyFamily::word_at(&w, &maps);
        let (ell, _) = crate::schottky::displacement_length_c(&m).unwrap();
        let c2 = (ell - 8.0 * (1.0 / z).ln()) / (z * z);
        assert!((c2 - 2.0).abs() < 1e-2, "{c2}");
    }
}
