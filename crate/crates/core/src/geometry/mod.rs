//! Point clouds, the Hausdorff metric, minisets and zooms along coding trees.

mod cloud;
mod kdtree;
mod zoom;

use rayon::prelude::*;

pub use cloud::{squared_distance, unit_cube_cloud, CompactSet, PointCloud};
pub use kdtree::KdTree;
pub use zoom::{
    check_zoom_against, check_zoom_identity_ssc, cube_coverage_bound, descendant_cloud,
    zoom_miniset, zoom_sequence, ZoomChecker, ZoomIdentity, ZoomSequence, ZoomStep,
};

use crate::error::{Error, Result};
use crate::similarity::SimilarityMap;

fn check_dims(a: &PointCloud, b: &PointCloud) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(())
}

/// `max_{a∈A} min_{b∈B} |a−b|²` through a kd-tree on `B`.
fn directed_sq(a: &PointCloud, b: &PointCloud) -> f64 {
    let tree = KdTree::new(b);
    a.coords()
        .par_chunks_exact(a.dim())
        .map(|p| tree.nearest(p).map_or(f64::INFINITY, |n| n.0))
        .reduce(|| 0.0, f64::max)
}

/// Hausdorff distance between two finite clouds, ignoring their resolutions.
///
/// Each nearest-neighbor value equals the brute-force minimum bit for bit and
/// the maximum does not depend on the reduction order, so the result is the
/// same as [`hausdorff_distance_brute`].
pub fn hausdorff_distance(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    check_dims(a, b)?;
    Ok(directed_sq(a, b).max(directed_sq(b, a)).sqrt())
}

/// `O(|A||B|)` reference implementation.
pub fn hausdorff_distance_brute(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    check_dims(a, b)?;
    let directed = |x: &PointCloud, y: &PointCloud| {
        x.points()
            .map(|p| {
                y.points()
                    .map(|q| squared_distance(p, q))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    Ok(directed(a, b).max(directed(b, a)).sqrt())
}

/// Euclidean distance from `x` to the closed unit cube.
pub fn distance_to_unit_cube(x: &[f64]) -> f64 {
    x.iter()
        .map(|&c| {
            let d = if c < 0.0 {
                -c
            } else if c > 1.0 {
                c - 1.0
            } else {
                0.0
            };
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// `Q ∩ ψ(F)` at finite resolution: the points of `ψ(F)` within `band` of
/// the unit cube `Q`. The band defaults to `ψ.ratio·ε(F)` and absorbs the
/// difference between the open and the closed cube. The result carries
/// resolution `ψ.ratio·ε(F) + band`.
pub fn miniset(f: &PointCloud, psi: &SimilarityMap, band: Option<f64>) -> Result<CompactSet> {
    if psi.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: psi.dim(),
        });
    }
    if psi.ratio() < 1.0 - 1e-12 {
        return Err(Error::Domain(format!(
            "miniset maps must be expanding, got ratio {}",
            psi.ratio()
        )));
    }
    let scaled = psi.ratio() * f.epsilon();
    let band = band.unwrap_or(scaled);
    if !(band >= 0.0) {
        return Err(Error::Domain(format!(
            "band must be nonnegative, got {band}"
        )));
    }
    let image = f.transform(psi);
    let coords: Vec<f64> = image
        .points()
        .filter(|p| distance_to_unit_cube(p) <= band)
        .flatten()
        .copied()
        .collect();
    if coords.is_empty() {
        return Ok(CompactSet::Empty);
    }
    Ok(CompactSet::Cloud(PointCloud::from_raw(
        f.dim(),
        coords,
        scaled + band,
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;
    use crate::similarity::{attractor_cloud, Ifs};

    fn random_cloud(stream: &mut Stream, n: usize, dim: usize) -> PointCloud {
        let coords = (0..n * dim).map(|_| stream.uniform()).collect();
        PointCloud::new(dim, coords, 0.0).unwrap()
    }

    #[test]
    fn simple_distances() {
        let a = PointCloud::from_points(&[vec![0.0, 0.0]], 0.0).unwrap();
        let b = PointCloud::from_points(&[vec![3.0, 4.0]], 0.0).unwrap();
        assert_eq!(hausdorff_distance(&a, &b).unwrap(), 5.0);
        assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
        let c = PointCloud::from_points(&[vec![1.0]], 0.0).unwrap();
        assert!(matches!(
            hausdorff_distance(&a, &c),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn accelerated_matches_brute_force() {
        let mut s = Stream::new(11);
        for i in 0..40 {
            let dim = 1 + i % 3;
            let (n, m) = (1 + s.index(200), 1 + s.index(200));
            let a = random_cloud(&mut s, n, dim);
            let b = random_cloud(&mut s, m, dim);
            assert_eq!(
                hausdorff_distance(&a, &b).unwrap().to_bits(),
                hausdorff_distance_brute(&a, &b).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn miniset_examples() {
        let ifs = Ifs::cantor();
        let c = attractor_cloud(&ifs, 3f64.powi(-8)).unwrap();
        let same = miniset(&c, &SimilarityMap::identity(1), None).unwrap();
        assert_eq!(same.cloud().unwrap().coords(), c.coords());
        let tripled = miniset(&c, &SimilarityMap::homothety(3.0, vec![0.0]).unwrap(), None)
            .unwrap()
            .into_cloud()
            .unwrap();
        assert_eq!(tripled.len(), c.len() / 2);
        assert!(hausdorff_distance(&tripled, &c).unwrap() <= 2.0 * c.epsilon());
        let away = SimilarityMap::homothety(1.0, vec![5.0]).unwrap();
        assert!(miniset(&c, &away, None).unwrap().is_empty());
        let shrink = SimilarityMap::homothety(0.5, vec![0.0]).unwrap();
        assert!(matches!(miniset(&c, &shrink, None), Err(Error::Domain(_))));
    }

    #[test]
    fn narrower_band_keeps_fewer_points() {
        let ifs = Ifs::percolation(3, 2).unwrap();
        let c = attractor_cloud(&ifs, 1.0 / 27.0).unwrap();
        let psi = SimilarityMap::homothety(1.7, vec![-0.4, -0.2]).unwrap();
        let mut last = usize::MAX;
        for band in [0.5, 0.2, 0.05, 0.0] {
            let n = miniset(&c, &psi, Some(band))
                .unwrap()
                .cloud()
                .map_or(0, |c| c.len());
            assert!(n <= last);
            last = n;
        }
    }
}
