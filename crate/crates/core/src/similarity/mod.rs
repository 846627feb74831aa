//! Similarity maps, iterated function systems, sections and separation checks.

mod map;
mod section;
mod separation;

pub use map::{SimilarityMap, MAP_TOLERANCE, ORTHOGONALITY_TOLERANCE};
pub(crate) use section::{at_most, walk_section};
pub use section::{
    attractor_cloud, build_section, build_section_capped, cloud_resolution,
    restricted_attractor_cloud, Section, SectionEntry, DEFAULT_SECTION_CAP,
};
pub use separation::{
    check_declared_osc, check_ssc, dedup_maps, wsc_profile, OscReport, PairCheck, SeparationKind,
    SeparationVerdict, WscEntry,
};

use crate::error::{Error, Result};
use crate::symbols::{check_symbols, Subset, Symbol, MAX_ALPHABET};

/// An open axis-aligned box `(lo, hi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OpenBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl OpenBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if lo.is_empty() || lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::Validation(
                "box must satisfy lo < hi on every axis".into(),
            ));
        }
        Ok(Self { lo, hi })
    }

    pub fn unit(dim: usize) -> Self {
        Self {
            lo: vec![0.0; dim],
            hi: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains_open(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (a, b))| *a < *v && *v < *b)
    }
}

/// A finite system of contracting similarities on `R^d`, indexed `0..len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ifs {
    dim: usize,
    maps: Vec<SimilarityMap>,
    osc_box: Option<OpenBox>,
    r_min: f64,
    r_max: f64,
    radius: f64,
}

impl Ifs {
    pub fn new(maps: Vec<SimilarityMap>, osc_box: Option<OpenBox>) -> Result<Self> {
        let first = maps
            .first()
            .ok_or_else(|| Error::Validation("an IFS needs at least one map".into()))?;
        if maps.len() > MAX_ALPHABET {
            return Err(Error::Validation(format!(
                "at most {MAX_ALPHABET} maps are supported, got {}",
                maps.len()
            )));
        }
        let dim = first.dim();
        let mut r_min = f64::INFINITY;
        let mut r_max: f64 = 0.0;
        let mut max_shift: f64 = 0.0;
        for (i, m) in maps.iter().enumerate() {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: m.dim(),
                });
            }
            if !(m.ratio() > 0.0 && m.ratio() < 1.0) {
                return Err(Error::Validation(format!(
                    "map {i} has ratio {} outside (0, 1)",
                    m.ratio()
                )));
            }
            r_min = r_min.min(m.ratio());
            r_max = r_max.max(m.ratio());
            let norm = m.translation().iter().map(|x| x * x).sum::<f64>().sqrt();
            max_shift = max_shift.max(norm);
        }
        if let Some(b) = &osc_box {
            if b.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: b.dim(),
                });
            }
        }
        Ok(Self {
            dim,
            maps,
            osc_box,
            r_min,
            r_max,
            radius: max_shift / (1.0 - r_max),
        })
    }

    /// `{x/3, x/3 + 2/3}` on the line.
    pub fn cantor() -> Self {
        Self::new(
            vec![
                SimilarityMap::homothety(1.0 / 3.0, vec![0.0]).unwrap(),
                SimilarityMap::homothety(1.0 / 3.0, vec![2.0 / 3.0]).unwrap(),
            ],
            Some(OpenBox::unit(1)),
        )
        .unwrap()
    }

    /// `{x/2, x/2 + 1/2}`, whose attractor is `[0,1]`.
    pub fn unit_interval() -> Self {
        Self::new(
            vec![
                SimilarityMap::homothety(0.5, vec![0.0]).unwrap(),
                SimilarityMap::homothety(0.5, vec![0.5]).unwrap(),
            ],
            Some(OpenBox::unit(1)),
        )
        .unwrap()
    }

    /// The `b^d` maps `x ↦ (x + k)/b`, `k ∈ {0..b-1}^d`, tiling the unit cube.
    /// Map index `n` has offset digits `k_j = (n / b^j) mod b`.
    pub fn percolation(base: usize, dim: usize) -> Result<Self> {
        if base < 2 || dim == 0 {
            return Err(Error::Validation(
                "percolation needs base >= 2 and dim >= 1".into(),
            ));
        }
        let count = base
            .checked_pow(dim as u32)
            .filter(|&c| c <= MAX_ALPHABET)
            .ok_or_else(|| {
                Error::Validation(format!(
                    "base^dim exceeds the maximum alphabet {MAX_ALPHABET}"
                ))
            })?;
        let r = 1.0 / base as f64;
        let maps = (0..count)
            .map(|n| {
                let mut rest = n;
                let t = (0..dim)
                    .map(|_| {
                        let k = rest % base;
                        rest /= base;
                        k as f64 * r
                    })
                    .collect();
                SimilarityMap::homothety(r, t)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(maps, Some(OpenBox::unit(dim)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Alphabet size.
    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn maps(&self) -> &[SimilarityMap] {
        &self.maps
    }

    pub fn map(&self, i: Symbol) -> &SimilarityMap {
        &self.maps[i as usize]
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.maps.iter().map(|m| m.ratio()).collect()
    }

    pub fn ratio(&self, i: Symbol) -> f64 {
        self.maps[i as usize].ratio()
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// `max‖translation‖ / (1 − r_max)`: the attractor lies in the closed ball
    /// of this radius about the origin.
    pub fn bounding_radius(&self) -> f64 {
        self.radius
    }

    pub fn osc_box(&self) -> Option<&OpenBox> {
        self.osc_box.as_ref()
    }

    /// The base point of the coding map: the fixed point of map 0.
    pub fn base_point(&self) -> Vec<f64> {
        self.maps[0].fixed_point()
    }

    /// Product of the ratios along a word.
    pub fn word_ratio(&self, word: &[Symbol]) -> f64 {
        word.iter().map(|&s| self.ratio(s)).product()
    }

    /// `φ_{w1} ∘ φ_{w2} ∘ ... ∘ φ_{wn}`; the empty word gives the identity.
    pub fn compose_word(&self, word: &[Symbol]) -> Result<SimilarityMap> {
        check_symbols(word, self.len())?;
        let mut out = SimilarityMap::identity(self.dim);
        for &s in word {
            out = out.compose(self.map(s));
        }
        Ok(out)
    }

    /// The system `{φ_i}_{i ∈ subset}`, re-indexed in increasing symbol order.
    pub fn sub_system(&self, subset: Subset) -> Result<Ifs> {
        if subset.is_empty() {
            return Err(Error::EmptySet(
                "the sub-system of the empty set has no attractor".into(),
            ));
        }
        if !subset.fits(self.len()) {
            return Err(Error::Validation(format!(
                "subset {subset} is not contained in an alphabet of size {}",
                self.len()
            )));
        }
        let maps = subset
            .iter()
            .map(|s| self.maps[s as usize].clone())
            .collect();
        Ifs::new(maps, None)
    }

    pub fn with_osc_box(mut self, osc_box: Option<OpenBox>) -> Result<Self> {
        if let Some(b) = &osc_box {
            if b.dim() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    got: b.dim(),
                });
            }
        }
        self.osc_box = osc_box;
        Ok(self)
    }
}
