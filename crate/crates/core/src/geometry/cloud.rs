use crate::error::{Error, Result};
use crate::similarity::SimilarityMap;

/// A finite nonempty point set in `R^d` together with a certified resolution:
/// the Hausdorff distance to the compact set it stands for is at most `epsilon`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
    epsilon: f64,
}

/// A nonempty compact set at finite resolution, or the empty set.
#[derive(Debug, Clone, PartialEq)]
pub enum CompactSet {
    Cloud(PointCloud),
    Empty,
}

impl CompactSet {
    pub fn cloud(&self) -> Option<&PointCloud> {
        match self {
            CompactSet::Cloud(c) => Some(c),
            CompactSet::Empty => None,
        }
    }

    pub fn into_cloud(self) -> Option<PointCloud> {
        match self {
            CompactSet::Cloud(c) => Some(c),
            CompactSet::Empty => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, CompactSet::Empty)
    }
}

impl PointCloud {
    /// `coords` holds the points back to back, `dim` numbers each.
    pub fn new(dim: usize, coords: Vec<f64>, epsilon: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Validation(
                "ambient dimension must be at least 1".into(),
            ));
        }
        if coords.is_empty() {
            return Err(Error::EmptySet(
                "a point cloud needs at least one point".into(),
            ));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: coords.len() % dim,
            });
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::Validation(
                "point cloud has a non-finite coordinate".into(),
            ));
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::Validation(format!(
                "resolution must be finite and >= 0, got {epsilon}"
            )));
        }
        Ok(Self {
            dim,
            coords,
            epsilon,
        })
    }

    pub fn from_points(points: &[Vec<f64>], epsilon: f64) -> Result<Self> {
        let dim = points.first().map(|p| p.len()).unwrap_or(0);
        if points.is_empty() {
            return Err(Error::EmptySet(
                "a point cloud needs at least one point".into(),
            ));
        }
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Self::new(dim, coords, epsilon)
    }

    /// Unchecked constructor for internal producers that guarantee the invariants.
    pub(crate) fn from_raw(dim: usize, coords: Vec<f64>, epsilon: f64) -> Self {
        debug_assert!(dim > 0 && !coords.is_empty() && coords.len().is_multiple_of(dim));
        Self {
            dim,
            coords,
            epsilon,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    /// Always false; kept for API symmetry with collections.
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    /// Image under a similarity; the resolution scales with the ratio.
    pub fn transform(&self, map: &SimilarityMap) -> PointCloud {
        let mut coords = vec![0.0; self.coords.len()];
        for (src, dst) in self.points().zip(coords.chunks_exact_mut(self.dim)) {
            map.apply_into(src, dst);
        }
        PointCloud {
            dim: self.dim,
            coords,
            epsilon: self.epsilon * map.ratio(),
        }
    }

    /// Union of clouds; the resolution is the largest of the parts.
    pub fn union(parts: &[&PointCloud]) -> Result<PointCloud> {
        let first = parts
            .first()
            .ok_or_else(|| Error::EmptySet("union of no clouds".into()))?;
        let mut coords = Vec::new();
        let mut epsilon: f64 = 0.0;
        for p in parts {
            if p.dim != first.dim {
                return Err(Error::DimensionMismatch {
                    expected: first.dim,
                    got: p.dim,
                });
            }
            coords.extend_from_slice(&p.coords);
            epsilon = epsilon.max(p.epsilon);
        }
        Ok(PointCloud {
            dim: first.dim,
            coords,
            epsilon,
        })
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for p in self.points() {
            for k in 0..self.dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }

    /// Largest coordinate extent; a lower bound for the diameter.
    pub fn extent(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max)
    }

    /// Points sorted lexicographically with exact duplicates removed.
    pub fn canonical_points(&self) -> Vec<Vec<f64>> {
        let mut pts: Vec<Vec<f64>> = self.points().map(|p| p.to_vec()).collect();
        pts.sort_by(|a, b| {
            a.iter()
                .zip(b)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        pts.dedup();
        pts
    }
}

/// Squared Euclidean distance, summed in axis order. Every distance in the
/// crate goes through this function so that exact and accelerated searches
/// agree bit for bit.
#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for k in 0..a.len() {
        let d = a[k] - b[k];
        s += d * d;
    }
    s
}

/// The closed unit cube `[0,1]^d` sampled on a regular grid with `per_axis`
/// points per axis, as a cloud with its certified resolution.
pub fn unit_cube_cloud(dim: usize, per_axis: usize) -> PointCloud {
    assert!(dim > 0 && per_axis >= 2);
    let step = 1.0 / (per_axis - 1) as f64;
    let total = per_axis.pow(dim as u32);
    let mut coords = Vec::with_capacity(total * dim);
    for n in 0..total {
        let mut rest = n;
        for _ in 0..dim {
            coords.push((rest % per_axis) as f64 * step);
            rest /= per_axis;
        }
    }
    let epsilon = 0.5 * step * (dim as f64).sqrt();
    PointCloud::from_raw(dim, coords, epsilon)
}
