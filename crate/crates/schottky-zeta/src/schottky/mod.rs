//! Schottky families: generators as matrices of Laurent series in the
//! degeneration parameter, evaluated at points `z` of the punctured disc.

mod builtins;
mod discs;
mod mobius;

pub use builtins::{
    builtin_funneled_torus, builtin_three_funnel, builtin_two_generator, three_funnel_inverse_a, THREE_FUNNEL_LEVELS,
    TORUS_LEVELS,
};
pub use discs::{
    check_schottky_figure, check_star_condition, cross_ratio, ford_discs, search_disc_levels, FigureReport, StarReport,
};
pub use mobius::{displacement_length_c, displacement_length_r, Disc, MobiusC, MobiusSeries};

use crate::freegroup::{inverse_letter, Letter, Word};
use crate::laurent::{Laurent, LogSeries, SeriesError, SeriesLiteral, SqrtBranch};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchottkyError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("the family has a pole at z = 0")]
    PoleAtZero,
    #[error("|z| = {z} is outside the validity radius {radius}")]
    OutsideValidity { z: f64, radius: f64 },
    #[error("element is not loxodromic: {0}")]
    NotLoxodromic(String),
    #[error("fixed point at infinity; conjugate the family first")]
    FixedPointAtInfinity,
    #[error("discriminant series has odd order {0}; PGL2 families are not supported")]
    OddDiscriminant(i64),
    #[error("invalid family document: {0}")]
    Schema(String),
}

/// Rank-`g` family of Möbius maps with Laurent-series entries.
#[derive(Clone, Debug)]
pub struct SchottkyFamily {
    pub name: String,
    pub g: usize,
    pub generators: Vec<MobiusSeries>,
    /// Ford-disc level per generator.
    pub disc_levels: Vec<f64>,
    pub validity_radius: f64,
    /// When set, the family at geodesic-length parameter `l` is `z = e^{-l/length_scale}`.
    pub length_scale: Option<f64>,
    letters: Vec<MobiusSeries>,
}

impl SchottkyFamily {
    pub fn new(
        name: impl Into<String>,
        generators: Vec<MobiusSeries>,
        disc_levels: Vec<f64>,
        validity_radius: f64,
        length_scale: Option<f64>,
    ) -> Result<Self, SchottkyError> {
        let name: String = name.into();
        let g = generators.len();
        if g == 0 {
            return Err(SchottkyError::Schema("no generators".into()));
        }
        let disc_levels = if disc_levels.is_empty() {
            vec![1.0; g]
        } else {
            disc_levels
        };
        if disc_levels.len() != g {
            return Err(SchottkyError::Schema(format!(
                "{} disc levels for {g} generators",
                disc_levels.len()
            )));
        }
        if disc_levels.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(SchottkyError::Schema("disc levels must be positive".into()));
        }
        if !(validity_radius > 0.0 && validity_radius <= 1.0) {
            return Err(SchottkyError::Schema("validity radius must lie in (0, 1]".into()));
        }
        for (i, m) in generators.iter().enumerate() {
            let det = m.det();
            let k = det.truncation();
            let defect = det.sub(&Laurent::constant(1.0.into(), k));
            if det.is_zero() || (!defect.is_zero() && defect.leading().norm() > 1e-10) {
                return Err(SchottkyError::Schema(format!(
                    "generator {} does not have unit determinant",
                    i + 1
                )));
            }
            let tr = m.trace();
            if tr.is_zero() || tr.order() >= 0 {
                log::warn!(
                    "generator {} of {} has a trace of order {}; it does not degenerate",
                    i + 1,
                    name,
                    tr.order()
                );
            }
        }
        let mut letters = generators.clone();
        letters.extend(generators.iter().map(|m| m.inverse()));
        Ok(Self {
            name,
            g,
            generators,
            disc_levels,
            validity_radius,
            length_scale,
            letters,
        })
    }

    /// Series matrix of a letter in `1..=2g`.
    pub fn letter(&self, i: Letter) -> &MobiusSeries {
        &self.letters[i as usize - 1]
    }

    pub fn truncation(&self) -> usize {
        self.generators
            .iter()
            .flat_map(|m| [&m.a, &m.b, &m.c, &m.d])
            .filter(|s| !s.is_zero())
            .map(|s| s.truncation())
            .min()
            .unwrap_or(0)
    }

    pub fn word_series(&self, w: &Word) -> MobiusSeries {
        let mut acc = MobiusSeries::identity(self.truncation());
        for &x in w.letters() {
            acc = acc.mul(self.letter(x));
        }
        acc
    }

    pub fn trace_series(&self, w: &Word) -> Laurent {
        let t = self.word_series(w).trace();
        if t.is_zero() {
            log::warn!("trace series of {w} cancelled beyond its precision");
        }
        t
    }

    /// `z` corresponding to the geometric length parameter `l`.
    pub fn z_for_length(&self, ell: f64) -> Option<f64> {
        self.length_scale.map(|k| (-ell / k).exp())
    }

    fn loxodromic_trace(&self, w: &Word) -> Result<Laurent, SchottkyError> {
        let w = w.cyclic_reduce();
        if w.is_empty() {
            return Err(SchottkyError::NotLoxodromic("identity word".into()));
        }
        let t = self.trace_series(&w);
        if t.is_zero() || t.order() >= 0 {
            return Err(SchottkyError::NotLoxodromic(format!(
                "trace of {w} has order {}",
                t.order()
            )));
        }
        Ok(t)
    }

    /// Non-Archimedean length `-2 ord tr(w)`.
    pub fn na_length(&self, w: &Word) -> Result<i64, SchottkyError> {
        Ok(-2 * self.loxodromic_trace(w)?.order())
    }

    /// Large eigenvalue `tr (1/2 + sqrt(1/4 - 1/tr^2))` as a series.
    pub fn lambda1_series(&self, w: &Word) -> Result<Laurent, SchottkyError> {
        let t = self.loxodromic_trace(w)?;
        Ok(lambda1_from_trace(&t)?)
    }

    /// `(l^na, a_0..a_M)` with `l(w_z) = l^na log(1/|z|) + Re sum a_j z^j`.
    pub fn length_expansion(&self, w: &Word, m: usize) -> Result<(i64, Vec<C64>), SchottkyError> {
        let l = self.lambda1_series(w)?.plog()?.scale_int(2);
        if l.analytic.len() < m + 1 {
            return Err(SeriesError::PrecisionExhausted(format!(
                "length expansion of {w} has {} justified terms, {} requested",
                l.analytic.len(),
                m + 1
            ))
            .into());
        }
        Ok((l.na_part, l.lt_prime(m).analytic))
    }

    /// Log-series `2 plog lambda_1(w)`.
    pub fn length_log_series(&self, w: &Word) -> Result<LogSeries, SchottkyError> {
        Ok(self.lambda1_series(w)?.plog()?.scale_int(2))
    }

    fn check_z(&self, z: C64) -> Result<(), SchottkyError> {
        if z.norm() == 0.0 {
            return Err(SchottkyError::PoleAtZero);
        }
        if z.norm() >= self.validity_radius {
            return Err(SchottkyError::OutsideValidity {
                z: z.norm(),
                radius: self.validity_radius,
            });
        }
        Ok(())
    }

    /// Generators evaluated at `z`.
    pub fn evaluate_at(&self, z: C64) -> Result<Vec<MobiusC>, SchottkyError> {
        self.check_z(z)?;
        self.generators.iter().map(|m| m.eval(z)).collect()
    }

    /// All `2g` letters evaluated at `z`, inverses last.
    pub fn letter_maps(&self, z: C64) -> Result<Vec<MobiusC>, SchottkyError> {
        let gens = self.evaluate_at(z)?;
        let mut out = gens.clone();
        out.extend(gens.iter().map(|m| m.inverse()));
        Ok(out)
    }

    pub fn word_at(w: &Word, maps: &[MobiusC]) -> MobiusC {
        w.letters()
            .iter()
            .fold(MobiusC::identity(), |acc, &x| acc.mul(&maps[x as usize - 1]))
    }

    pub fn inverse_letter(&self, i: Letter) -> Letter {
        inverse_letter(self.g, i)
    }

    pub fn to_document(&self) -> FamilyDocument {
        FamilyDocument {
            name: self.name.clone(),
            g: self.g,
            generators: self
                .generators
                .iter()
                .map(|m| {
                    [
                        [m.a.to_literal(), m.b.to_literal()],
                        [m.c.to_literal(), m.d.to_literal()],
                    ]
                })
                .collect(),
            disc_levels: self.disc_levels.clone(),
            validity_radius: self.validity_radius,
            length_scale: self.length_scale,
        }
    }

    pub fn from_document(doc: &FamilyDocument) -> Result<Self, SchottkyError> {
        if doc.g != doc.generators.len() {
            return Err(SchottkyError::Schema(format!(
                "g = {} but {} generators given",
                doc.g,
                doc.generators.len()
            )));
        }
        let gens = doc
            .generators
            .iter()
            .map(|m| {
                MobiusSeries::new(
                    Laurent::from_literal(&m[0][0]),
                    Laurent::from_literal(&m[0][1]),
                    Laurent::from_literal(&m[1][0]),
                    Laurent::from_literal(&m[1][1]),
                )
            })
            .collect();
        Self::new(
            doc.name.clone(),
            gens,
            doc.disc_levels.clone(),
            doc.validity_radius,
            doc.length_scale,
        )
    }
}

/// `tr (1/2 + sqrt(1/4 - 1/tr^2))` for a trace series of negative order.
pub fn lambda1_from_trace(t: &Laurent) -> Result<Laurent, SeriesError> {
    let k = t.truncation();
    let inv2 = t.mul(t).inv()?;
    let quarter = Laurent::constant(0.25.into(), k);
    let half = Laurent::constant(0.5.into(), k);
    let root = quarter.sub(&inv2).sqrt(SqrtBranch::Principal)?;
    Ok(t.mul(&half.add(&root)))
}

/// JSON form of a family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDocument {
    pub name: String,
    pub g: usize,
    pub generators: Vec<[[SeriesLiteral; 2]; 2]>,
    #[serde(default)]
    pub disc_levels: Vec<f64>,
    pub validity_radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length_scale: Option<f64>,
}

/// Parses a family JSON document.
pub fn builtin_from_json(text: &str) -> Result<SchottkyFamily, SchottkyError> {
    let doc: FamilyDocument = serde_json::from_str(text).map_err(|e| SchottkyError::Schema(e.to_string()))?;
    SchottkyFamily::from_document(&doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_lambda1() {
        let d = MobiusSeries::new(
            Laurent::real_polynomial(-1, &[1.0], 16),
            Laurent::zero(),
            Laurent::zero(),
            Laurent::real_polynomial(1, &[1.0], 16),
        );
        let fam = SchottkyFamily::new("diag", vec![d], vec![], 0.5, None).unwrap();
        let l = fam.lambda1_series(&Word::generator(1, 1)).unwrap();
        assert_eq!(l.order(), -1);
        assert!((l.coeffs()[0] - 1.0).norm() < 1e-15);
        assert!(l.coeffs()[1..].iter().all(|c| c.norm() < 1e-13));
    }

    #[test]
    fn bad_documents_are_rejected() {
        assert!(builtin_from_json("{}").is_err());
        let fam = builtin_three_funnel(16);
        let mut doc = fam.to_document();
        doc.g = 3;
        assert!(SchottkyFamily::from_document(&doc).is_err());
        let mut doc = fam.to_document();
        doc.generators[0][0][0] = SeriesLiteral {
            order: -2,
            coeffs: vec![[3.0, 0.0]],
        };
        assert!(matches!(
            SchottkyFamily::from_document(&doc),
            Err(SchottkyError::Schema(_))
        ));
    }

    #[test]
    fn document_roundtrip() {
        let fam = builtin_funneled_torus(std::f64::consts::FRAC_PI_3, 24);
        let text = serde_json::to_string(&fam.to_document()).unwrap();
        let back = builtin_from_json(&text).unwrap();
        assert_eq!(back.to_document(), fam.to_document());
    }
}
