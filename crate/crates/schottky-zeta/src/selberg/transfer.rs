//! Matrix of the transfer operator `L_s u(w) = sum_a a'(w)^s u(a(w))` on
//! Bergman spaces of the word-length-`N` Schottky discs.

use super::SelbergError;
use crate::freegroup::{enumerate_reduced, inverse_letter, Word};
use crate::schottky::{check_schottky_figure, ford_discs, Disc, MobiusC, SchottkyFamily};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

/// Largest transfer matrix that will be assembled.
pub const MAX_SIZE: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferConfig {
    /// Basis functions per disc.
    pub k: usize,
    /// Boundary samples per disc, at least `4k`.
    pub q: usize,
    /// Word length of the discs.
    pub n: usize,
}

impl Default for TransferConfig {
    fn default() -> Self {
        Self { k: 20, q: 80, n: 1 }
    }
}

impl TransferConfig {
    pub fn with_k(k: usize) -> Self {
        Self { k, q: 4 * k, n: 1 }
    }

    fn validate(&self) -> Result<(), SelbergError> {
        if self.k < 4 {
            return Err(SelbergError::InvalidConfig(format!("K = {} < 4", self.k)));
        }
        if self.q < 4 * self.k {
            return Err(SelbergError::InvalidConfig(format!(
                "Q = {} < 4K = {}",
                self.q,
                4 * self.k
            )));
        }
        if self.n == 0 {
            return Err(SelbergError::InvalidConfig("N must be at least 1".into()));
        }
        Ok(())
    }
}

/// One block `source disc -> target disc` through the letter `a`, stored as
/// `log(sigma (c w + d))` and the normalized image point on the samples.
struct Block {
    target: usize,
    source: usize,
    log_q: Vec<C64>,
    u: Vec<C64>,
}

/// Geometry of the transfer operator of a real family at real `z`; the
/// matrix for any `s` is assembled from it.
pub struct TransferOperator {
    cfg: TransferConfig,
    discs: Vec<(Word, Disc)>,
    blocks: Vec<Block>,
    fft: Arc<dyn Fft<f64>>,
}

fn is_real(m: &MobiusC) -> bool {
    [m.a, m.b, m.c, m.d]
        .iter()
        .all(|x| x.im.abs() <= 1e-12 * x.norm().max(1.0))
}

impl TransferOperator {
    pub fn new(fam: &SchottkyFamily, z: C64, cfg: TransferConfig) -> Result<Self, SelbergError> {
        cfg.validate()?;
        if z.im != 0.0 {
            return Err(SelbergError::NotReal(format!("z = {z} is not real")));
        }
        let maps = fam.letter_maps(z)?;
        if !maps.iter().all(is_real) {
            return Err(SelbergError::NotReal("generators are not real at z".into()));
        }
        let g = fam.g;
        let base = ford_discs(fam, z)?;
        let report = check_schottky_figure(&base, &maps, g);
        if !report.pass {
            return Err(SelbergError::FigureFailure(report.min_margin));
        }
        let words = enumerate_reduced(g, cfg.n);
        let size = words.len() * cfg.k;
        if size > MAX_SIZE {
            return Err(SelbergError::TooLarge(size));
        }
        let discs: Vec<(Word, Disc)> = words
            .iter()
            .map(|w| {
                let l = w.letters();
                let prefix = Word::reduce(g, &l[..l.len() - 1]).expect("prefix of a reduced word");
                let inner = &base[l[l.len() - 1] as usize - 1];
                let d = SchottkyFamily::word_at(&prefix, &maps)
                    .image_of_disc(inner)
                    .ok_or(SelbergError::FigureFailure(report.min_margin))?;
                Ok((w.clone(), d))
            })
            .collect::<Result<_, SelbergError>>()?;
        let index: HashMap<Vec<u8>, usize> = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.letters().to_vec(), i))
            .collect();
        let mut blocks = Vec::new();
        for (tb, (bw, bd)) in discs.iter().enumerate() {
            let b = bw.letters();
            for a in 1..=(2 * g) as u8 {
                if a == inverse_letter(g, b[0]) {
                    continue;
                }
                let mut src = vec![a];
                src.extend_from_slice(&b[..b.len() - 1]);
                let sb = index[&src];
                let sd = &discs[sb].1;
                let m = &maps[a as usize - 1];
                let sigma = (m.c * bd.center + m.d).re.signum();
                let r = bd.radius / 2.0;
                let mut log_q = Vec::with_capacity(cfg.q);
                let mut u = Vec::with_capacity(cfg.q);
                for j in 0..cfg.q {
                    let w = bd.center + C64::from_polar(r, 2.0 * PI * j as f64 / cfg.q as f64);
                    let q = sigma * (m.c * w + m.d);
                    if q.re <= 0.0 {
                        return Err(SelbergError::BranchAmbiguity {
                            letter: Word::generator(g, a).to_string(),
                            disc: bw.to_string(),
                        });
                    }
                    log_q.push(q.ln());
                    u.push((m.apply(w) - sd.center) / sd.radius);
                }
                blocks.push(Block {
                    target: tb,
                    source: sb,
                    log_q,
                    u,
                });
            }
        }
        let fft = FftPlanner::new().plan_fft_forward(cfg.q);
        Ok(Self {
            cfg,
            discs,
            blocks,
            fft,
        })
    }

    pub fn config(&self) -> TransferConfig {
        self.cfg
    }

    pub fn size(&self) -> usize {
        self.discs.len() * self.cfg.k
    }

    pub fn discs(&self) -> &[(Word, Disc)] {
        &self.discs
    }

    /// `K x K` matrix of one block: column `n` holds the coefficients of
    /// `a'(w)^s phi_n(a(w))` in the basis `phi_m(w) = sqrt(m+1) ((w-c)/R)^m`.
    fn block_matrix(&self, b: &Block, s: C64) -> DMatrix<C64> {
        let (k, q) = (self.cfg.k, self.cfg.q);
        let weight: Vec<C64> = b.log_q.iter().map(|l| (-2.0 * s * l).exp()).collect();
        let mut out = DMatrix::zeros(k, k);
        let mut buf = vec![C64::new(0.0, 0.0); q];
        let mut pow: Vec<C64> = weight.clone();
        let mut scratch = vec![C64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        for n in 0..k {
            let norm_n = ((n + 1) as f64).sqrt();
            for j in 0..q {
                buf[j] = pow[j] * norm_n;
                pow[j] *= b.u[j];
            }
            self.fft.process_with_scratch(&mut buf, &mut scratch);
            let mut scale = 1.0 / q as f64;
            for m in 0..k {
                out[(m, n)] = buf[m] * scale / ((m + 1) as f64).sqrt();
                scale *= 2.0;
            }
        }
        out
    }

    fn blocks_at(&self, s: C64) -> Vec<DMatrix<C64>> {
        self.blocks.par_iter().map(|b| self.block_matrix(b, s)).collect()
    }

    pub fn matrix(&self, s: C64) -> DMatrix<C64> {
        let k = self.cfg.k;
        let mut out = DMatrix::zeros(self.size(), self.size());
        for (b, m) in self.blocks.iter().zip(self.blocks_at(s)) {
            out.view_mut((b.target * k, b.source * k), (k, k)).copy_from(&m);
        }
        out
    }

    /// `det(I - L_s)` by LU with partial pivoting.
    pub fn det(&self, s: C64) -> C64 {
        let m = self.matrix(s);
        (DMatrix::identity(m.nrows(), m.ncols()) - m).lu().determinant()
    }

    /// Singular values of every block, largest first.
    pub fn block_singular_values(&self, s: C64) -> Vec<Vec<f64>> {
        self.blocks_at(s)
            .into_par_iter()
            .map(|m| m.singular_values().iter().copied().collect::<Vec<f64>>())
            .map(|mut v| {
                v.sort_by(|a, b| b.partial_cmp(a).unwrap());
                v
            })
            .collect()
    }
}

/// Envelope `mu_l ~ C rho^l sqrt(l+1)` fitted to a singular-value sequence.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DecayFit {
    pub rho: f64,
    pub c: f64,
    pub points: usize,
}

/// Least-squares fit of `log mu_l - log(l+1)/2 = log C + l log rho` over the
/// values above `1e-13 mu_0`.
pub fn fit_decay(sv: &[f64]) -> Option<DecayFit> {
    let floor = 1e-13 * sv.first().copied()?;
    let pts: Vec<(f64, f64)> = sv
        .iter()
        .enumerate()
        .take_while(|(_, &m)| m > floor)
        .map(|(l, &m)| (l as f64, m.ln() - 0.5 * ((l + 1) as f64).ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    Some(DecayFit {
        rho: slope.exp(),
        c: (my - slope * mx).exp(),
        points: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schottky::builtin_three_funnel;

    fn operator(ell: f64, cfg: TransferConfig) -> TransferOperator {
        let fam = builtin_three_funnel(32);
        let z = C64::new(fam.z_for_length(ell).unwrap(), 0.0);
        TransferOperator::new(&fam, z, cfg).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(TransferConfig { k: 3, q: 12, n: 1 }.validate().is_err());
        assert!(TransferConfig { k: 10, q: 30, n: 1 }.validate().is_err());
        assert!(TransferConfig::with_k(10).validate().is_ok());
    }

    #[test]
    fn schwarz_symmetry() {
        let op = operator(8.0, TransferConfig::default());
        let s = C64::new(0.3, 1.7);
        let (a, b) = (op.det(s), op.det(s.conj()));
        assert!((a - b.conj()).norm() < 1e-12 * a.norm().max(1.0));
    }

    #[test]
    fn value_near_one_far_right() {
        let op = operator(8.0, TransferConfig::default());
        assert!((op.det(C64::new(6.0, 0.0)) - 1.0).norm() < 1e-12);
    }

    #[test]
    fn independent_of_refinement() {
        let s = C64::new(0.4, 0.5);
        let a = operator(8.0, TransferConfig { k: 20, q: 80, n: 1 }).det(s);
        let b = operator(8.0, TransferConfig { k: 20, q: 80, n: 2 }).det(s);
        assert!((a - b).norm() < 1e-8, "{a} vs {b}");
    }

    #[test]
    fn stable_in_basis_size() {
        for s in [0.05, 0.1, 0.2, 0.3] {
            let s = C64::new(s, 0.0);
            let a = operator(8.0, TransferConfig::with_k(40)).det(s);
            let b = operator(8.0, TransferConfig::with_k(48)).det(s);
            assert!((a - b).norm() <= 1e-10, "s = {s}: {a} vs {b}");
        }
    }

    #[test]
    fn singular_values_decay_geometrically() {
        let op = operator(8.0, TransferConfig::default());
        for sv in op.block_singular_values(C64::new(1.0, 0.0)) {
            let fit = fit_decay(&sv).unwrap();
            assert!(fit.rho < 1.0, "{fit:?}");
        }
    }

    #[test]
    fn fit_recovers_envelope() {
        let sv: Vec<f64> = (0..20)
            .map(|l| 3.0 * 0.4f64.powi(l) * ((l + 1) as f64).sqrt())
            .collect();
        let fit = fit_decay(&sv).unwrap();
        assert!((fit.rho - 0.4).abs() < 1e-12);
        assert!((fit.c - 3.0).abs() < 1e-10);
    }
}
