//! Intermediate zeta functions `Z_M(Gamma, z, s)`: the derivative cocycle of
//! leading terms, its edge-matrix determinant, and symbolic extraction of the
//! polynomial in exponentials.

mod symbolic;

pub use symbolic::{ExponentAtom, SymbolicZetaM};

use crate::freegroup::{enumerate_reduced, inverse_letter, Letter, Word};
use crate::laurent::{Laurent, LogSeries, SeriesError};
use crate::schottky::{MobiusSeries, SchottkyError, SchottkyFamily};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntermediateError {
    #[error(transparent)]
    Schottky(#[from] SchottkyError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("no horizon N <= {cap} makes lt_{m} of the derivative cocycle locally constant")]
    HorizonNotFound { m: usize, cap: usize },
    #[error("horizon N = {0} must be at least 2")]
    HorizonTooSmall(usize),
    #[error("word {0} is not cyclically reduced")]
    NotCyclicallyReduced(String),
    #[error("symbolic expansion exceeds its size cap: {0}")]
    ExpansionTooLarge(String),
    #[error("exponent {value} is not an integer multiple of the basis element {basis}")]
    IncommensurableExponent { value: f64, basis: f64 },
}

/// Largest horizon tried by [`choose_horizon`].
pub const HORIZON_CAP: usize = 12;

/// Relative tolerance for two leading-term samples to count as equal.
const AGREE_TOL: f64 = 1e-9;

/// One cocycle value `l_M(a, (b))` for a letter `a` and a reduced word `b`
/// of length `N - 1` with `a b` reduced.
#[derive(Clone, Debug)]
pub struct CocycleEntry {
    pub letter: Letter,
    pub suffix: Word,
    /// `lt_M(a'(b(infinity)))`.
    pub lt: Laurent,
    /// `lt'_M plog lt`.
    pub l: LogSeries,
}

#[derive(Clone, Debug)]
pub struct CocycleTable {
    pub g: usize,
    pub m: usize,
    pub n: usize,
    pub entries: Vec<CocycleEntry>,
    index: HashMap<Vec<Letter>, usize>,
}

/// Outcome of the local-constancy check at one horizon.
#[derive(Clone, Debug, Serialize)]
pub struct HorizonCheck {
    pub n: usize,
    pub keys: usize,
    pub disagreements: usize,
    pub worst: f64,
}

/// `b(x)` for a series point `x`, or `b(infinity) = A/C` when `x` is `None`.
fn apply_series(b: &MobiusSeries, x: Option<&Laurent>) -> Result<Laurent, IntermediateError> {
    match x {
        None => {
            if b.c.is_zero() {
                return Err(SchottkyError::FixedPointAtInfinity.into());
            }
            Ok(b.a.div(&b.c)?)
        }
        Some(x) => Ok(b.a.mul(x).add(&b.b).div(&b.c.mul(x).add(&b.d))?),
    }
}

/// `lt_M(a'(x)) = lt_M(1/(c x + d)^2)`.
fn lt_derivative(a: &MobiusSeries, x: &Laurent, m: usize) -> Result<Laurent, IntermediateError> {
    let q = a.c.mul(x).add(&a.d);
    Ok(q.mul(&q).inv()?.lt(m)?)
}

fn lt_distance(p: &Laurent, q: &Laurent) -> f64 {
    if p.order() != q.order() {
        return f64::INFINITY;
    }
    let scale = p.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
    p.max_abs_diff(q) / scale
}

struct Context<'a> {
    fam: &'a SchottkyFamily,
    m: usize,
    /// Attracting fixed point of each letter, indexed by `letter - 1`.
    attracting: Vec<Laurent>,
}

impl<'a> Context<'a> {
    fn new(fam: &'a SchottkyFamily, m: usize) -> Result<Self, IntermediateError> {
        let attracting = (1..=(2 * fam.g) as Letter)
            .map(|x| Ok(fam.letter(x).fixed_point_series()?.0))
            .collect::<Result<_, IntermediateError>>()?;
        Ok(Self { fam, m, attracting })
    }

    /// Cocycle entry at `b(infinity)` and the distance to the value at the
    /// second sample `b(c_+)`, `c` a letter continuing `b`.
    fn entry(&self, word: &[Letter]) -> Result<(CocycleEntry, f64), IntermediateError> {
        let g = self.fam.g;
        let (a, suffix) = (word[0], &word[1..]);
        let suffix = Word::reduce(g, suffix).expect("suffix of a reduced word");
        let b = self.fam.word_series(&suffix);
        let letter = self.fam.letter(a);
        let x1 = apply_series(&b, None)?;
        let lt = lt_derivative(letter, &x1, self.m)?;
        let last = *suffix.letters().last().unwrap();
        let c = (1..=(2 * g) as Letter).find(|&c| c != inverse_letter(g, last)).unwrap();
        let x2 = apply_series(&b, Some(&self.attracting[c as usize - 1]))?;
        let lt2 = lt_derivative(letter, &x2, self.m)?;
        let dist = lt_distance(&lt, &lt2);
        let l = lt.plog()?.lt_prime(self.m);
        Ok((
            CocycleEntry {
                letter: a,
                suffix,
                lt,
                l,
            },
            dist,
        ))
    }

    fn build(&self, n: usize) -> Result<(CocycleTable, HorizonCheck), IntermediateError> {
        if n < 2 {
            return Err(IntermediateError::HorizonTooSmall(n));
        }
        let keys = enumerate_reduced(self.fam.g, n);
        let results = keys
            .par_iter()
            .map(|w| self.entry(w.letters()))
            .collect::<Result<Vec<_>, _>>()?;
        let disagreements = results.iter().filter(|(_, d)| !(*d <= AGREE_TOL)).count();
        let worst = results.iter().map(|(_, d)| *d).fold(0.0, f64::max);
        let entries: Vec<CocycleEntry> = results.into_iter().map(|(e, _)| e).collect();
        let index = keys
            .iter()
            .enumerate()
            .map(|(i, w)| (w.letters().to_vec(), i))
            .collect();
        Ok((
            CocycleTable {
                g: self.fam.g,
                m: self.m,
                n,
                entries,
                index,
            },
            HorizonCheck {
                n,
                keys: keys.len(),
                disagreements,
                worst,
            },
        ))
    }
}

/// Smallest `N >= M + 2` at which `lt_M(a'(x))` agrees for the two sample
/// points of every key, with the checks made on the way.
pub fn choose_horizon(fam: &SchottkyFamily, m: usize) -> Result<(usize, Vec<HorizonCheck>), IntermediateError> {
    let ctx = Context::new(fam, m)?;
    let mut log = Vec::new();
    for n in m + 2..=HORIZON_CAP {
        let (_, check) = ctx.build(n)?;
        log::debug!("horizon {n}: {} of {} keys disagree", check.disagreements, check.keys);
        let ok = check.disagreements == 0;
        log.push(check);
        if ok {
            return Ok((n, log));
        }
    }
    Err(IntermediateError::HorizonNotFound { m, cap: HORIZON_CAP })
}

/// Cocycle table at horizon `n`.
pub fn cocycle_table(fam: &SchottkyFamily, m: usize, n: usize) -> Result<CocycleTable, IntermediateError> {
    Ok(Context::new(fam, m)?.build(n)?.0)
}

impl CocycleTable {
    /// Entry for the reduced word `a b` of length `N`.
    pub fn get(&self, key: &[Letter]) -> Option<&CocycleEntry> {
        self.index.get(key).map(|&i| &self.entries[i])
    }

    /// Reduced words of length `N - 1`, the vertices of the edge matrix `V`.
    pub fn vertices(&self) -> Vec<Word> {
        enumerate_reduced(self.g, self.n - 1)
    }

    /// `exp((s/L) Re l_M(a_1, (a_2 ... a_N))(z))` on the edge
    /// `a_1 ... a_{N-1} -> a_2 ... a_N`.
    pub fn v_matrix(&self, z: C64, s: C64) -> DMatrix<C64> {
        let verts = self.vertices();
        let idx: HashMap<&[Letter], usize> = verts.iter().enumerate().map(|(i, w)| (w.letters(), i)).collect();
        let big_l = (1.0 / z.norm()).ln();
        let mut v = DMatrix::zeros(verts.len(), verts.len());
        for e in &self.entries {
            let mut key = vec![e.letter];
            key.extend_from_slice(e.suffix.letters());
            let p = idx[&key[..self.n - 1]];
            let q = idx[&key[1..]];
            v[(p, q)] = (s / big_l * e.l.eval(z).re).exp();
        }
        v
    }

    /// Edge matrix `W` on reduced words of length `N`, with the symmetric
    /// split of the weights over consecutive keys.
    pub fn w_matrix(&self, z: C64, s: C64) -> DMatrix<C64> {
        let words = enumerate_reduced(self.g, self.n);
        let big_l = (1.0 / z.norm()).ln();
        let mut w = DMatrix::zeros(words.len(), words.len());
        for (i, u) in words.iter().enumerate() {
            for (j, v) in words.iter().enumerate() {
                if u.letters()[1..] != v.letters()[..self.n - 1] {
                    continue;
                }
                let lu = self.get(u.letters()).unwrap().l.eval(z).re;
                let lv = self.get(v.letters()).unwrap().l.eval(z).re;
                w[(i, j)] = (s / (2.0 * big_l) * (lu + lv)).exp();
            }
        }
        w
    }

    /// `Z_M(Gamma, z, s) = det(I - V(s))`.
    pub fn eval(&self, z: C64, s: C64) -> C64 {
        let v = self.v_matrix(z, s);
        (DMatrix::identity(v.nrows(), v.ncols()) - v).lu().determinant()
    }

    /// `L_M(w) = -sum_k l_M(a_{i_k}, (a_{i_{k+1}} ... a_{i_{k+N-1}}))` with
    /// indices read cyclically.
    pub fn l_m_word(&self, w: &Word) -> Result<LogSeries, IntermediateError> {
        if w.is_empty() || !w.is_cyclically_reduced() {
            return Err(IntermediateError::NotCyclicallyReduced(w.to_string()));
        }
        let l = w.letters();
        let n = l.len();
        let mut acc = LogSeries {
            na_part: 0,
            analytic: vec![C64::new(0.0, 0.0); self.m + 1],
        };
        let mut key = vec![0; self.n];
        for k in 0..n {
            for (j, slot) in key.iter_mut().enumerate() {
                *slot = l[(k + j) % n];
            }
            acc = acc.add(&self.get(&key).expect("periodic windows are reduced").l);
        }
        Ok(acc.neg())
    }
}

/// `L_M(w) = lt'_M(2 plog lambda_1(w))` computed from the trace.
pub fn l_m_direct(fam: &SchottkyFamily, w: &Word, m: usize) -> Result<LogSeries, IntermediateError> {
    Ok(fam.length_log_series(w)?.lt_prime(m))
}

/// `l_M(w, z) = l^na(w) + Re(sum_{j<=M} a_j(w) z^j) / log(1/|z|)`.
pub fn ell_m(fam: &SchottkyFamily, w: &Word, m: usize, z: C64) -> Result<f64, IntermediateError> {
    let (na, a) = fam.length_expansion(w, m)?;
    let mut acc = C64::new(0.0, 0.0);
    for c in a.iter().rev() {
        acc = acc * z + c;
    }
    Ok(na as f64 + acc.re / (1.0 / z.norm()).ln())
}

/// The intermediate zeta function of one family at one truncation order,
/// with its cocycle table at the certified horizon.
#[derive(Clone, Debug)]
pub struct IntermediateZeta {
    pub table: CocycleTable,
    pub horizon_log: Vec<HorizonCheck>,
}

impl IntermediateZeta {
    pub fn new(fam: &SchottkyFamily, m: usize) -> Result<Self, IntermediateError> {
        let (n, horizon_log) = choose_horizon(fam, m)?;
        Ok(Self {
            table: cocycle_table(fam, m, n)?,
            horizon_log,
        })
    }

    /// Uses the horizon `n` as given instead of searching for it.
    pub fn with_horizon(fam: &SchottkyFamily, m: usize, n: usize) -> Result<Self, IntermediateError> {
        Ok(Self {
            table: cocycle_table(fam, m, n)?,
            horizon_log: Vec::new(),
        })
    }

    pub fn eval(&self, z: C64, s: C64) -> C64 {
        self.table.eval(z, s)
    }

    pub fn symbolic(&self) -> Result<SymbolicZetaM, IntermediateError> {
        SymbolicZetaM::from_table(&self.table)
    }
}

/// `Z_M(Gamma, z, s)`; builds the table, so prefer [`IntermediateZeta`] for
/// repeated evaluation.
pub fn zm_eval(fam: &SchottkyFamily, m: usize, z: C64, s: C64) -> Result<C64, IntermediateError> {
    Ok(IntermediateZeta::new(fam, m)?.eval(z, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freegroup::enumerate_primitive_classes;
    use crate::graphzeta::skeleton_two_generator;
    use crate::schottky::{builtin_funneled_torus, builtin_three_funnel, builtin_two_generator};
    use std::f64::consts::PI;

    fn w(g: usize, s: &str) -> Word {
        Word::parse(g, s).unwrap()
    }

    #[test]
    fn three_funnel_horizon_is_small() {
        let fam = builtin_three_funnel(32);
        let (n, log) = choose_horizon(&fam, 0).unwrap();
        assert!(n <= 3, "{log:?}");
        let mut last = n;
        for m in 1..=2 {
            let (n, _) = choose_horizon(&fam, m).unwrap();
            assert!(n >= last);
            last = n;
        }
    }

    #[test]
    fn diagonal_toy_family() {
        // both generators have leading order t^{-1}, so every derivative
        // behaves like t^2
        let fam = builtin_two_generator([1.0, 1.0, 1.0], [1, 1, 4], 24);
        let (n, _) = choose_horizon(&fam, 0).unwrap();
        assert!(n <= 4, "horizon {n}");
        let t = cocycle_table(&fam, 0, n).unwrap();
        for (word, na) in [("a1", 2), ("a2", 2), ("a1 a2", 8), ("a1 A2", 8)] {
            let l = t.l_m_word(&w(2, word)).unwrap();
            assert_eq!(l.na_part, na, "{word}");
        }
    }

    #[test]
    fn three_funnel_entries_match_theta_weights() {
        // A = B = 1, C = -1: all theta weights vanish, so closed words have
        // length a multiple of 4 log(1/t) with no constant correction
        let fam = builtin_three_funnel(32);
        let t = cocycle_table(&fam, 0, 3).unwrap();
        for (word, na) in [("a1", 4), ("a2", 4), ("a1 a2", 4), ("a1 A2", 8)] {
            let l = t.l_m_word(&w(2, word)).unwrap();
            assert_eq!(l.na_part, na, "{word}");
            assert!(l.analytic[0].re.abs() < 1e-10, "{word}: {l:?}");
        }
    }

    #[test]
    fn stable_under_larger_horizon() {
        let fam = builtin_three_funnel(32);
        let (n, _) = choose_horizon(&fam, 1).unwrap();
        let t = cocycle_table(&fam, 1, n).unwrap();
        let t2 = cocycle_table(&fam, 1, n + 1).unwrap();
        for e in &t2.entries {
            let mut key = vec![e.letter];
            key.extend_from_slice(&e.suffix.letters()[..n - 1]);
            assert!(t.get(&key).unwrap().l.diff_mod_2pi(&e.l) < 1e-9);
        }
    }

    #[test]
    fn cocycle_matches_direct_on_short_classes() {
        for fam in [builtin_three_funnel(32), builtin_funneled_torus(PI / 2.0, 32)] {
            for m in 0..=2 {
                let iz = IntermediateZeta::new(&fam, m).unwrap();
                for c in enumerate_primitive_classes(2, 5) {
                    let a = iz.table.l_m_word(&c.representative).unwrap();
                    let b = l_m_direct(&fam, &c.representative, m).unwrap();
                    assert!(a.diff_mod_2pi(&b) < 1e-9, "{} M={m}: {a:?} vs {b:?}", c.representative);
                    assert_eq!(a.lt_prime_neg1().na_part, fam.na_length(&c.representative).unwrap());
                }
            }
        }
    }

    #[test]
    fn length_log_series_real_part_is_length() {
        let fam = builtin_three_funnel(32);
        let z = C64::new((-5.0f64).exp(), 0.0);
        let g = w(2, "a1");
        let l0 = l_m_direct(&fam, &g, 0).unwrap();
        let ell0 = ell_m(&fam, &g, 0, z).unwrap();
        assert!((l0.eval(z).re - ell0 * 5.0).abs() < 1e-12);
        assert!((ell0 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn torus_ell_zero_of_commutator_pair() {
        let fam = builtin_funneled_torus(PI / 2.0, 32);
        let z = C64::new((-5.0f64).exp(), 0.0);
        let v = ell_m(&fam, &w(2, "a1 a2"), 0, z).unwrap();
        assert!((v - (4.0 - 2.0 * 2f64.ln() / 5.0)).abs() < 1e-12);
    }

    #[test]
    fn ell_m_tends_to_na_length() {
        let fam = builtin_funneled_torus(PI / 2.0, 32);
        let g = w(2, "a1 a2 A1");
        let na = fam.na_length(&g).unwrap() as f64;
        let mut prev = f64::INFINITY;
        for k in 5..=12 {
            let z = C64::new((-(k as f64)).exp(), 0.0);
            let d = (ell_m(&fam, &g, 2, z).unwrap() - na).abs();
            assert!(d <= prev + 1e-15);
            assert!(ell_m(&fam, &g, 2, z).unwrap() >= na / 2.0);
            prev = d;
        }
    }

    #[test]
    fn torus_zero_matches_closed_form() {
        let fam = builtin_funneled_torus(PI / 2.0, 32);
        let iz = IntermediateZeta::new(&fam, 0).unwrap();
        let z = C64::new((-5.0f64).exp(), 0.0);
        let mut rng_state = 1u64;
        let mut next = || {
            rng_state = rng_state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (rng_state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..20 {
            let s = C64::new(-1.0 + 3.0 * next(), -4.0 + 8.0 * next());
            let a = (-2.0 * s).exp();
            let b = (-s * (2.0 - 2f64.ln() / 5.0)).exp();
            let want = -(-a + 2.0 * b + 1.0) * (a + 2.0 * b - 1.0) * (a - 1.0).powi(2);
            let got = iz.eval(z, s);
            assert!(
                (got - want).norm() <= 1e-8 * want.norm().max(1e-300),
                "s={s}: {got} vs {want}"
            );
        }
        assert!((iz.eval(z, C64::new(50.0, 0.0)) - 1.0).norm() < 1e-12);
    }

    #[test]
    fn v_and_w_matrices_agree() {
        let fam = builtin_funneled_torus(PI / 2.0, 32);
        let iz = IntermediateZeta::new(&fam, 0).unwrap();
        let z = C64::new((-4.0f64).exp(), 0.0);
        let s = C64::new(0.3, 1.1);
        let wm = iz.table.w_matrix(z, s);
        let dw = (DMatrix::identity(wm.nrows(), wm.ncols()) - wm).lu().determinant();
        assert!((dw - iz.eval(z, s)).norm() < 1e-12);
    }

    #[test]
    fn three_funnel_zero_is_theta_ihara() {
        let fam = builtin_three_funnel(32);
        let iz = IntermediateZeta::new(&fam, 0).unwrap();
        let sk = skeleton_two_generator(4.0, 4.0, 4.0, 8.0).unwrap();
        let graph = sk.weighted(1.0, 1.0, -1.0).unwrap();
        let z = C64::new((-3.0f64).exp(), 0.0);
        for s in [C64::new(0.2, 0.0), C64::new(0.5, 2.0), C64::new(-0.3, -1.0)] {
            let a = iz.eval(z, s);
            let b = graph.ihara_det(s, Some(3.0));
            assert!((a - b).norm() < 1e-10 * a.norm().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn dumbbell_closed_form() {
        let (ca, cb, cc) = (1.5, 0.8, 2.5);
        let fam = builtin_two_generator([ca, cb, cc], [1, 1, 4], 32);
        let iz = IntermediateZeta::new(&fam, 0).unwrap();
        let z = C64::new((-4.0f64).exp(), 0.0);
        let big_l = 4.0;
        let b1 = f64::ln(ca);
        let b2 = f64::ln(cb);
        let b3 = (f64::ln(cc) - b1 - b2) / 2.0;
        let h = |beta: f64| 2.0 + 2.0 * beta / big_l;
        for s in [C64::new(0.3, 0.0), C64::new(0.1, 1.3), C64::new(-0.5, 0.7)] {
            let a = (-s * h(b1) / 2.0).exp();
            let b = (-s * h(b3) / 2.0).exp();
            let c = (-s * h(b2) / 2.0).exp();
            let want = -(c - 1.0)
                * (c + 1.0)
                * (a - 1.0)
                * (a + 1.0)
                * (4.0 * a * a * b.powi(4) * c * c - a * a * c * c + a * a + c * c - 1.0);
            let got = iz.eval(z, s);
            assert!((got - want).norm() < 1e-9 * want.norm().max(1.0), "{got} vs {want}");
        }
    }
}
