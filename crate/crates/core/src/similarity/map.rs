use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Tolerance on `O·Oᵀ = I`, per entry.
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-9;

/// Two maps are "the same map" when ratio, orthogonal entries and translation
/// agree within this tolerance.
pub const MAP_TOLERANCE: f64 = 1e-9;

/// A similarity `x ↦ ratio · O x + translation` of `R^d`.
///
/// `orthogonal` is stored row-major; `None` means the identity (a homothety).
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMap {
    ratio: f64,
    orthogonal: Option<Vec<f64>>,
    translation: Vec<f64>,
}

impl SimilarityMap {
    pub fn new(ratio: f64, orthogonal: Option<Vec<f64>>, translation: Vec<f64>) -> Result<Self> {
        if !(ratio > 0.0 && ratio.is_finite()) {
            return Err(Error::Validation(format!(
                "ratio must be positive and finite, got {ratio}"
            )));
        }
        if translation.iter().any(|x| !x.is_finite()) {
            return Err(Error::Validation(
                "translation has a non-finite entry".into(),
            ));
        }
        let d = translation.len();
        if d == 0 {
            return Err(Error::Validation(
                "ambient dimension must be at least 1".into(),
            ));
        }
        if let Some(o) = &orthogonal {
            if o.len() != d * d {
                return Err(Error::DimensionMismatch {
                    expected: d * d,
                    got: o.len(),
                });
            }
            check_orthogonal(o, d)?;
        }
        let orthogonal = orthogonal.filter(|o| !is_identity(o, d));
        Ok(Self {
            ratio,
            orthogonal,
            translation,
        })
    }

    pub fn homothety(ratio: f64, translation: Vec<f64>) -> Result<Self> {
        Self::new(ratio, None, translation)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            ratio: 1.0,
            orthogonal: None,
            translation: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn translation(&self) -> &[f64] {
        &self.translation
    }

    /// Row-major orthogonal part, `None` for the identity.
    pub fn orthogonal(&self) -> Option<&[f64]> {
        self.orthogonal.as_deref()
    }

    pub fn is_homothety(&self) -> bool {
        self.orthogonal.is_none()
    }

    /// Orthogonal entry `(row, col)`, materializing the identity.
    pub fn orthogonal_entry(&self, row: usize, col: usize) -> f64 {
        match &self.orthogonal {
            Some(o) => o[row * self.dim() + col],
            None => (row == col) as u8 as f64,
        }
    }

    /// Writes `self(x)` into `out`.
    #[inline]
    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dim();
        match &self.orthogonal {
            None => {
                for k in 0..d {
                    out[k] = self.ratio * x[k] + self.translation[k];
                }
            }
            Some(o) => {
                for k in 0..d {
                    let row = &o[k * d..(k + 1) * d];
                    let dot: f64 = row.iter().zip(x).map(|(a, b)| a * b).sum();
                    out[k] = self.ratio * dot + self.translation[k];
                }
            }
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.apply_into(x, &mut out);
        out
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &SimilarityMap) -> SimilarityMap {
        let d = self.dim();
        debug_assert_eq!(d, inner.dim());
        let orthogonal = match (&self.orthogonal, &inner.orthogonal) {
            (None, None) => None,
            (Some(a), None) => Some(a.clone()),
            (None, Some(b)) => Some(b.clone()),
            (Some(a), Some(b)) => {
                let mut m = vec![0.0; d * d];
                for i in 0..d {
                    for j in 0..d {
                        m[i * d + j] = (0..d).map(|k| a[i * d + k] * b[k * d + j]).sum();
                    }
                }
                Some(m)
            }
        };
        SimilarityMap {
            ratio: self.ratio * inner.ratio,
            orthogonal,
            translation: self.apply(&inner.translation),
        }
    }

    /// The inverse similarity `y ↦ Oᵀ(y − translation) / ratio`.
    pub fn inverse(&self) -> SimilarityMap {
        let d = self.dim();
        let orthogonal = self.orthogonal.as_ref().map(|o| {
            let mut t = vec![0.0; d * d];
            for i in 0..d {
                for j in 0..d {
                    t[i * d + j] = o[j * d + i];
                }
            }
            t
        });
        let inv_ratio = 1.0 / self.ratio;
        let shifted: Vec<f64> = self.translation.iter().map(|t| -t).collect();
        let rotated = match &orthogonal {
            None => shifted,
            Some(t) => (0..d)
                .map(|i| (0..d).map(|j| t[i * d + j] * shifted[j]).sum())
                .collect(),
        };
        SimilarityMap {
            ratio: inv_ratio,
            orthogonal,
            translation: rotated.into_iter().map(|x| x * inv_ratio).collect(),
        }
    }

    /// Unique fixed point of a contraction (`ratio < 1`).
    pub fn fixed_point(&self) -> Vec<f64> {
        let d = self.dim();
        match &self.orthogonal {
            None => self
                .translation
                .iter()
                .map(|a| a / (1.0 - self.ratio))
                .collect(),
            Some(o) => {
                let system = DMatrix::from_fn(d, d, |i, j| {
                    (i == j) as u8 as f64 - self.ratio * o[i * d + j]
                });
                let rhs = DVector::from_column_slice(&self.translation);
                let sol = system
                    .lu()
                    .solve(&rhs)
                    .expect("I - rO is invertible for a contraction");
                sol.iter().copied().collect()
            }
        }
    }

    /// Parameter-wise equality within `tol`.
    pub fn approx_eq(&self, other: &SimilarityMap, tol: f64) -> bool {
        let d = self.dim();
        if d != other.dim() || (self.ratio - other.ratio).abs() > tol {
            return false;
        }
        if self
            .translation
            .iter()
            .zip(&other.translation)
            .any(|(a, b)| (a - b).abs() > tol)
        {
            return false;
        }
        (0..d).all(|i| {
            (0..d)
                .all(|j| (self.orthogonal_entry(i, j) - other.orthogonal_entry(i, j)).abs() <= tol)
        })
    }

    /// If the orthogonal part is a signed permutation, returns for each output
    /// axis the source axis and the sign. Images of axis-aligned boxes are then
    /// axis-aligned boxes.
    pub fn signed_permutation(&self) -> Option<Vec<(usize, f64)>> {
        let d = self.dim();
        let mut out = Vec::with_capacity(d);
        for i in 0..d {
            let mut found = None;
            for j in 0..d {
                let e = self.orthogonal_entry(i, j);
                if e.abs() > 1e-12 {
                    if found.is_some() || (e.abs() - 1.0).abs() > 1e-12 {
                        return None;
                    }
                    found = Some((j, e.signum()));
                }
            }
            out.push(found?);
        }
        Some(out)
    }
}

fn is_identity(o: &[f64], d: usize) -> bool {
    (0..d).all(|i| (0..d).all(|j| o[i * d + j] == (i == j) as u8 as f64))
}

fn check_orthogonal(o: &[f64], d: usize) -> Result<()> {
    for i in 0..d {
        for j in 0..d {
            let dot: f64 = (0..d).map(|k| o[i * d + k] * o[j * d + k]).sum();
            let target = (i == j) as u8 as f64;
            if (dot - target).abs() > ORTHOGONALITY_TOLERANCE {
                return Err(Error::Validation(format!(
                    "orthogonal part is not orthogonal: (O·Oᵀ)[{i}][{j}] = {dot}"
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rotation(theta: f64) -> Vec<f64> {
        vec![theta.cos(), -theta.sin(), theta.sin(), theta.cos()]
    }

    #[test]
    fn compose_is_left_to_right_application() {
        let f = SimilarityMap::homothety(1.0 / 3.0, vec![0.0]).unwrap();
        let g = SimilarityMap::homothety(1.0 / 3.0, vec![2.0 / 3.0]).unwrap();
        let fg = f.compose(&g);
        assert!((fg.ratio() - 1.0 / 9.0).abs() < 1e-15);
        assert!((fg.translation()[0] - 2.0 / 9.0).abs() < 1e-15);
        let x = [0.37];
        assert!((fg.apply(&x)[0] - f.apply(&g.apply(&x))[0]).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_orthogonal_and_bad_ratio() {
        assert!(SimilarityMap::new(0.5, Some(vec![1.0, 0.1, 0.0, 1.0]), vec![0.0, 0.0]).is_err());
        assert!(SimilarityMap::new(0.0, None, vec![0.0]).is_err());
        assert!(SimilarityMap::new(-0.5, None, vec![0.0]).is_err());
    }

    #[test]
    fn inverse_undoes_map() {
        let f = SimilarityMap::new(0.4, Some(rotation(0.7)), vec![0.3, -1.2]).unwrap();
        let g = f.inverse();
        let x = [0.25, 0.8];
        let y = g.apply(&f.apply(&x));
        assert!((y[0] - x[0]).abs() < 1e-12 && (y[1] - x[1]).abs() < 1e-12);
        assert!((g.ratio() - 2.5).abs() < 1e-15);
        assert!(f.compose(&g).approx_eq(&SimilarityMap::identity(2), 1e-12));
    }

    #[test]
    fn fixed_point_with_rotation() {
        let f = SimilarityMap::new(0.5, Some(rotation(1.1)), vec![1.0, 2.0]).unwrap();
        let p = f.fixed_point();
        let q = f.apply(&p);
        assert!((p[0] - q[0]).abs() < 1e-12 && (p[1] - q[1]).abs() < 1e-12);
    }

    #[test]
    fn identity_matrix_collapses_to_homothety() {
        let f = SimilarityMap::new(0.5, Some(vec![1.0, 0.0, 0.0, 1.0]), vec![0.0, 0.0]).unwrap();
        assert!(f.is_homothety());
    }

    #[test]
    fn signed_permutation_detection() {
        let reflect =
            SimilarityMap::new(0.5, Some(vec![0.0, -1.0, 1.0, 0.0]), vec![0.0, 0.0]).unwrap();
        assert_eq!(
            reflect.signed_permutation(),
            Some(vec![(1, -1.0), (0, 1.0)])
        );
        let rot = SimilarityMap::new(0.5, Some(rotation(0.3)), vec![0.0, 0.0]).unwrap();
        assert_eq!(rot.signed_permutation(), None);
    }
}
