//! Selberg zeta functions of a family at a fixed parameter `z`: truncated
//! Euler products over primitive closed geodesics and the Fredholm
//! determinant of the transfer operator for real families.

mod transfer;

pub use transfer::{fit_decay, DecayFit, TransferConfig, TransferOperator};

use crate::freegroup::{for_each_class, Word};
use crate::numeric::clog1p;
use crate::schottky::{displacement_length_c, SchottkyError, SchottkyFamily};
use crate::zeros::{first_real_zero, ZeroError};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SelbergError {
    #[error(transparent)]
    Schottky(#[from] SchottkyError),
    #[error(transparent)]
    Zeros(#[from] ZeroError),
    #[error("Schottky figure fails at z (minimum margin {0:.3e})")]
    FigureFailure(f64),
    #[error("the determinant method needs a real family at real z: {0}")]
    NotReal(String),
    #[error("derivative of letter {letter} winds around 0 on the sampling circle of disc {disc}")]
    BranchAmbiguity { letter: String, disc: String },
    #[error("transfer matrix of size {0} exceeds the cap of 4096")]
    TooLarge(usize),
    #[error("invalid transfer configuration: {0}")]
    InvalidConfig(String),
}

/// Largest word length for which non-Archimedean lengths are stored in a
/// geodesic table; they need series arithmetic per class.
pub const NA_WORD_LEN: usize = 8;

#[derive(Clone, Debug, Serialize)]
pub struct GeodesicEntry {
    pub class: Word,
    pub ell: f64,
    pub theta: f64,
    pub na_length: Option<i64>,
}

/// Primitive oriented classes up to a word length with their lengths and
/// holonomies at a fixed `z`, sorted by length.
#[derive(Clone, Debug, Serialize)]
pub struct GeodesicTable {
    pub z: C64,
    pub word_len_max: usize,
    pub entries: Vec<GeodesicEntry>,
}

pub fn geodesic_table(fam: &SchottkyFamily, z: C64, word_len_max: usize) -> Result<GeodesicTable, SelbergError> {
    let maps = fam.letter_maps(z)?;
    let mut words: Vec<Vec<u8>> = Vec::new();
    for n in 1..=word_len_max {
        for_each_class(fam.g, n, |w, p| {
            if p == n {
                words.push(w.to_vec());
            }
        });
    }
    let mut entries = words
        .into_par_iter()
        .map(|letters| {
            let w = Word::reduce(fam.g, &letters).expect("canonical class words are reduced");
            let m = SchottkyFamily::word_at(&w, &maps);
            let (ell, theta) = displacement_length_c(&m)?;
            let na_length = if w.len() <= NA_WORD_LEN {
                Some(fam.na_length(&w)?)
            } else {
                None
            };
            Ok(GeodesicEntry {
                class: w,
                ell,
                theta,
                na_length,
            })
        })
        .collect::<Result<Vec<_>, SelbergError>>()?;
    entries.sort_by(|a, b| {
        a.ell
            .partial_cmp(&b.ell)
            .unwrap()
            .then_with(|| a.class.letters().cmp(b.class.letters()))
    });
    Ok(GeodesicTable {
        z,
        word_len_max,
        entries,
    })
}

/// Value of a truncated Euler product with both truncation tails.
#[derive(Clone, Debug, Serialize)]
pub struct EulerResult {
    pub value: C64,
    pub k_max: usize,
    /// Bound on the change of `log Z` from the factors with `k > k_max`.
    pub k_tail: f64,
    /// Extrapolated change of `log Z` from classes beyond the table.
    pub class_tail: f64,
}

impl EulerResult {
    pub fn tail_bound(&self) -> f64 {
        self.k_tail + self.class_tail
    }
}

const K_TAIL_TARGET: f64 = 1e-12;
const K_MAX_CAP: usize = 64;

/// Geometric extrapolation of `sum_{|w| > n_max} e^{-sigma l(w)}` from the
/// per-word-length sums of the last three lengths.
fn class_tail(table: &GeodesicTable, sigma: f64) -> f64 {
    let n = table.word_len_max;
    let mut sums = vec![0.0f64; n + 1];
    for e in &table.entries {
        sums[e.class.len()] += (-sigma * e.ell).exp();
    }
    if n < 4 {
        return f64::INFINITY;
    }
    let ratio = (n - 2..=n).map(|k| sums[k] / sums[k - 1]).fold(0.0f64, f64::max);
    if !(ratio < 1.0) {
        log::warn!("Euler product does not converge at Re s = {sigma}: class ratio {ratio:.3}");
        return f64::INFINITY;
    }
    sums[n] * ratio / (1.0 - ratio)
}

/// `sum_gamma sum_{k > k_max} (k + 1)^p 2|e^{-(s+k) l}|`, with `p = 0` for
/// the real product and `p = 1` for the complex one.
fn k_tail(table: &GeodesicTable, sigma: f64, k_max: usize, complex: bool) -> f64 {
    table
        .entries
        .iter()
        .map(|e| {
            let q = (-e.ell).exp();
            let first = (-(sigma + (k_max + 1) as f64) * e.ell).exp();
            if complex {
                // sum_{k > K} (k+1) q^k <= q^{K+1} ((K+2) - (K+1) q)/(1-q)^2
                2.0 * first * ((k_max + 2) as f64) / (1.0 - q).powi(2)
            } else {
                2.0 * first / (1.0 - q)
            }
        })
        .sum()
}

fn auto_k_max(table: &GeodesicTable, sigma: f64, k_max: usize, complex: bool) -> (usize, f64) {
    let mut k = k_max;
    let mut tail = k_tail(table, sigma, k, complex);
    while tail > K_TAIL_TARGET && k < K_MAX_CAP {
        k += 1;
        tail = k_tail(table, sigma, k, complex);
    }
    if tail > K_TAIL_TARGET {
        log::warn!("k-tail {tail:.3e} exceeds {K_TAIL_TARGET:e} at k_max = {k}");
    }
    (k, tail)
}

/// `prod_gamma prod_{k <= k_max} (1 - e^{-(s+k) l(gamma)})`; `k_max` is
/// raised until the `k`-tail is at most `1e-12`.
pub fn euler_product_r(table: &GeodesicTable, s: C64, k_max: usize) -> EulerResult {
    let (k_max, k_tail) = auto_k_max(table, s.re, k_max, false);
    let terms: Vec<C64> = table
        .entries
        .par_iter()
        .map(|e| {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..=k_max {
                let x = (-(s + k as f64) * e.ell).exp();
                if x.norm() < 1e-300 {
                    break;
                }
                acc += clog1p(-x);
            }
            acc
        })
        .collect();
    let log_z: C64 = terms.iter().sum();
    EulerResult {
        value: log_z.exp(),
        k_max,
        k_tail,
        class_tail: class_tail(table, s.re),
    }
}

/// `prod_gamma prod_{k_1 + k_2 <= k_max} (1 - e^{-(s+k_1+k_2) l} e^{-i theta (k_1 - k_2)})`.
pub fn euler_product_c(table: &GeodesicTable, s: C64, k_max: usize) -> EulerResult {
    let (k_max, k_tail) = auto_k_max(table, s.re, k_max, true);
    let terms: Vec<C64> = table
        .entries
        .par_iter()
        .map(|e| {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..=k_max {
                let base = (-(s + k as f64) * e.ell).exp();
                if base.norm() < 1e-300 {
                    break;
                }
                for k1 in 0..=k {
                    let k2 = k - k1;
                    let rot = C64::from_polar(1.0, -e.theta * (k1 as f64 - k2 as f64));
                    acc += clog1p(-base * rot);
                }
            }
            acc
        })
        .collect();
    let log_z: C64 = terms.iter().sum();
    EulerResult {
        value: log_z.exp(),
        k_max,
        k_tail,
        class_tail: class_tail(table, s.re),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Det,
    Euler,
}

/// Default word length of geodesic tables behind the Euler method.
pub const EULER_WORD_LEN: usize = 12;

/// Evaluates `Z(Gamma_z, s)` for one family and one `z` by either method,
/// reusing the precomputed operator geometry or geodesic table.
pub enum SelbergEvaluator {
    /// `check` uses eight more Taylor coefficients and estimates the truncation error.
    Det {
        op: TransferOperator,
        check: TransferOperator,
    },
    Euler {
        table: GeodesicTable,
        real: bool,
    },
}

impl SelbergEvaluator {
    pub fn new(fam: &SchottkyFamily, z: C64, method: Method) -> Result<Self, SelbergError> {
        match method {
            Method::Det => Self::det_with(fam, z, TransferConfig::default()),
            Method::Euler => {
                let real = z.im == 0.0
                    && fam.letter_maps(z)?.iter().all(|m| {
                        [m.a, m.b, m.c, m.d]
                            .iter()
                            .all(|x| x.im.abs() < 1e-12 * x.norm().max(1.0))
                    });
                Ok(Self::Euler {
                    table: geodesic_table(fam, z, EULER_WORD_LEN)?,
                    real,
                })
            }
        }
    }

    /// Determinant evaluator with an explicit operator configuration.
    pub fn det_with(fam: &SchottkyFamily, z: C64, cfg: TransferConfig) -> Result<Self, SelbergError> {
        let k = cfg.k + 8;
        let check = TransferConfig {
            k,
            q: cfg.q.max(4 * k),
            n: cfg.n,
        };
        Ok(Self::Det {
            op: TransferOperator::new(fam, z, cfg)?,
            check: TransferOperator::new(fam, z, check)?,
        })
    }

    /// Value without an error estimate.
    pub fn value(&self, s: C64) -> C64 {
        match self {
            Self::Det { op, .. } => op.det(s),
            Self::Euler { .. } => self.eval(s).0,
        }
    }

    /// Value and an estimate of its absolute error.
    pub fn eval(&self, s: C64) -> (C64, f64) {
        match self {
            Self::Det { op, check } => {
                let v = op.det(s);
                (v, (v - check.det(s)).norm())
            }
            Self::Euler { table, real } => {
                let r = if *real {
                    euler_product_r(table, s, 12)
                } else {
                    euler_product_c(table, s, 12)
                };
                (r.value, r.value.norm() * r.tail_bound())
            }
        }
    }
}

/// `Z(Gamma_z, s / log(1/|z|))`.
pub fn rescaled_zeta(fam: &SchottkyFamily, z: C64, s: C64, method: Method) -> Result<C64, SelbergError> {
    let l = (1.0 / z.norm()).ln();
    Ok(SelbergEvaluator::new(fam, z, method)?.value(s / l))
}

/// Hausdorff dimension of the limit set as the first real zero of
/// `Z(Gamma_z, s)` in `(0, 2)`.
pub fn hausdorff_dim(fam: &SchottkyFamily, z: C64, method: Method) -> Result<f64, SelbergError> {
    let ev = SelbergEvaluator::new(fam, z, method)?;
    let f = |s: f64| ev.value(C64::new(s, 0.0)).re;
    Ok(first_real_zero(&f, 1e-4, 2.0, 1e-13)?)
}
