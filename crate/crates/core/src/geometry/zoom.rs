//! Zooms into projected coding trees and the separated-case identity between
//! a zoom and the corresponding descendant set.

use super::{distance_to_unit_cube, hausdorff_distance, miniset, CompactSet, KdTree, PointCloud};
use crate::error::{Error, Result};
use crate::similarity::{
    at_most, attractor_cloud, cloud_resolution, Ifs, SeparationVerdict, SimilarityMap,
};
use crate::symbols::{Symbol, Word};
use crate::tree::{NodeId, Reduction, Tree};

fn reduced(tree: &Tree) -> Result<Tree> {
    match tree.reduce_to_horizon(tree.horizon())? {
        Reduction::Survives(t) => Ok(t),
        Reduction::Extinct => Err(Error::EmptySet(
            "the tree has no node at its horizon".into(),
        )),
    }
}

fn locate(tree: &Tree, v: &[Symbol]) -> Result<NodeId> {
    tree.find(v).ok_or_else(|| {
        Error::NotFound(format!(
            "{} is not a node of the reduced tree",
            Word::from(v)
        ))
    })
}

/// `Γ(T^v)` at scale `scale`, computed on the reduced tree.
pub fn descendant_cloud(tree: &Tree, ifs: &Ifs, v: &[Symbol], scale: f64) -> Result<PointCloud> {
    if ifs.len() != tree.alphabet() {
        return Err(Error::DimensionMismatch {
            expected: tree.alphabet(),
            got: ifs.len(),
        });
    }
    if !(scale > 0.0) {
        return Err(Error::Domain(format!(
            "projection scale must be positive, got {scale}"
        )));
    }
    let t = reduced(tree)?;
    let node = locate(&t, v)?;
    t.project_reduced(ifs, node, scale)
}

/// `Q ∩ ψ(Γ(T))` with `Γ(T)` taken at section scale `scale`, for an already
/// reduced tree. Subtrees whose bounding ball lands farther than `band` from
/// `Q` are skipped, which does not change the result.
fn pruned_miniset(
    tree: &Tree,
    ifs: &Ifs,
    psi: &SimilarityMap,
    scale: f64,
    band: f64,
) -> Result<Vec<f64>> {
    struct Walk<'a> {
        tree: &'a Tree,
        ifs: &'a Ifs,
        psi: &'a SimilarityMap,
        scale: f64,
        band: f64,
        x0: Vec<f64>,
        origin: Vec<f64>,
        radius: f64,
        out: Vec<f64>,
        buf: Vec<f64>,
        tmp: Vec<f64>,
    }
    fn rec(w: &mut Walk<'_>, node: NodeId, map: &SimilarityMap) -> Result<()> {
        let zoomed = w.psi.compose(map);
        zoomed.apply_into(&w.origin, &mut w.buf);
        let reach = zoomed.ratio() * w.radius + w.band;
        if distance_to_unit_cube(&w.buf) > reach * (1.0 + 1e-9) + 1e-12 {
            return Ok(());
        }
        if at_most(map.ratio(), w.scale) {
            // same operation order as projecting first and zooming after
            map.apply_into(&w.x0, &mut w.tmp);
            w.psi.apply_into(&w.tmp, &mut w.buf);
            if distance_to_unit_cube(&w.buf) <= w.band {
                w.out.extend_from_slice(&w.buf);
            }
            return Ok(());
        }
        let kids = w.tree.children(node);
        if kids.is_empty() && w.tree.depth(node) >= w.tree.horizon() {
            return Err(Error::Horizon {
                horizon: w.tree.horizon(),
                scale: w.scale,
            });
        }
        for s in kids.iter() {
            let child = w.tree.child(node, s).expect("listed child exists");
            rec(w, child, &map.compose(w.ifs.map(s)))?;
        }
        Ok(())
    }
    let mut w = Walk {
        tree,
        ifs,
        psi,
        scale,
        band,
        x0: ifs.base_point(),
        origin: vec![0.0; ifs.dim()],
        radius: ifs.bounding_radius(),
        out: Vec::new(),
        buf: vec![0.0; ifs.dim()],
        tmp: vec![0.0; ifs.dim()],
    };
    rec(&mut w, tree.root(), &SimilarityMap::identity(ifs.dim()))?;
    Ok(w.out)
}

/// The miniset `Q ∩ φ_v^{-1}(Γ(T))` for a node `v` of the reduced tree.
///
/// `Γ(T)` is projected at scale `scale·r_v`, so the zoomed set has resolution
/// `2·scale·R_K` whatever the depth of `v`. The band is that resolution and the
/// returned resolution is twice it, as for [`miniset`].
pub fn zoom_miniset(
    tree: &Tree,
    ifs: &Ifs,
    v: &[Symbol],
    scale: f64,
) -> Result<(SimilarityMap, CompactSet)> {
    let t = reduced(tree)?;
    zoom_reduced(&t, ifs, v, scale)
}

fn zoom_reduced(
    t: &Tree,
    ifs: &Ifs,
    v: &[Symbol],
    scale: f64,
) -> Result<(SimilarityMap, CompactSet)> {
    if ifs.len() != t.alphabet() {
        return Err(Error::DimensionMismatch {
            expected: t.alphabet(),
            got: ifs.len(),
        });
    }
    if !(scale > 0.0 && scale < 1.0) {
        return Err(Error::Domain(format!(
            "zoom scale must lie in (0, 1), got {scale}"
        )));
    }
    locate(t, v)?;
    let psi = ifs.compose_word(v)?.inverse();
    let eps = cloud_resolution(ifs, scale);
    let section = scale * ifs.word_ratio(v);
    let coords = pruned_miniset(t, ifs, &psi, section, eps)?;
    let set = if coords.is_empty() {
        CompactSet::Empty
    } else {
        CompactSet::Cloud(PointCloud::from_raw(ifs.dim(), coords, 2.0 * eps))
    };
    Ok((psi, set))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZoomStep {
    pub node: Word,
    /// The expanding map `φ_v^{-1}`.
    pub map: SimilarityMap,
    pub miniset: CompactSet,
    /// Hausdorff distance to the previous step when both are nonempty.
    pub d_h_to_prev: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZoomSequence {
    pub steps: Vec<ZoomStep>,
    pub tail_threshold: f64,
    /// Whether the last two distances between consecutive steps are below
    /// the threshold. Only an empirical sign of convergence.
    pub approximant: bool,
}

/// Minisets at every prefix of `path`, from the root down.
/// The tail threshold is four times the zoom resolution `2·scale·R_K`.
pub fn zoom_sequence(tree: &Tree, ifs: &Ifs, path: &[Symbol], scale: f64) -> Result<ZoomSequence> {
    let t = reduced(tree)?;
    locate(&t, path)?;
    let mut steps: Vec<ZoomStep> = Vec::with_capacity(path.len() + 1);
    for k in 0..=path.len() {
        let (map, set) = zoom_reduced(&t, ifs, &path[..k], scale)?;
        let d_h_to_prev = match (steps.last().and_then(|s| s.miniset.cloud()), set.cloud()) {
            (Some(a), Some(b)) => Some(hausdorff_distance(a, b)?),
            _ => None,
        };
        steps.push(ZoomStep {
            node: Word::from(&path[..k]),
            map,
            miniset: set,
            d_h_to_prev,
        });
    }
    let tail_threshold = 4.0 * cloud_resolution(ifs, scale);
    let tail: Vec<Option<f64>> = steps.iter().rev().take(2).map(|s| s.d_h_to_prev).collect();
    let approximant =
        tail.len() == 2 && tail.iter().all(|d| d.is_some_and(|d| d <= tail_threshold));
    Ok(ZoomSequence {
        steps,
        tail_threshold,
        approximant,
    })
}

/// Upper bound on `sup_{q∈Q} dist(q, K)`, from a grid on `Q` and a cloud of `K`.
/// Supported for ambient dimension at most 3.
pub fn cube_coverage_bound(ifs: &Ifs) -> Result<f64> {
    let d = ifs.dim();
    let per_axis: usize = match d {
        1 => 1025,
        2 => 129,
        3 => 49,
        _ => {
            return Err(Error::Precondition(format!(
                "cube coverage is only computed for dimension at most 3, got {d}"
            )))
        }
    };
    // the cloud is refined until its resolution is below the grid spacing
    let spacing = 1.0 / (per_axis - 1) as f64;
    let mut scale = ifs.r_min() * 0.5;
    while cloud_resolution(ifs, scale) > spacing {
        scale *= ifs.r_max();
    }
    let k = attractor_cloud(ifs, scale)?;
    let tree = KdTree::new(&k);
    let grid = super::unit_cube_cloud(d, per_axis);
    let worst = grid
        .points()
        .map(|q| tree.nearest(q).map_or(f64::INFINITY, |n| n.0))
        .fold(0.0, f64::max)
        .sqrt();
    Ok(worst + k.epsilon() + 0.5 * spacing * (d as f64).sqrt())
}

/// Comparison of the zoom at `v` with the descendant set at `other`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ZoomIdentity {
    pub node: Word,
    pub compared_with: Word,
    pub distance: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Zoom-versus-descendant comparisons on one tree under certified separation.
///
/// Construction checks that the certified gap exceeds the reach of `Q` around
/// `K` plus the band: then the zoom window at any node meets no other cylinder
/// and `Q ∩ φ_v^{-1}(Γ(T)) = Q ∩ Γ(T^v)`.
#[derive(Debug, Clone)]
pub struct ZoomChecker<'a> {
    tree: Tree,
    ifs: &'a Ifs,
    scale: f64,
    band: f64,
}

impl<'a> ZoomChecker<'a> {
    pub fn new(tree: &Tree, ifs: &'a Ifs, scale: f64, ssc: &SeparationVerdict) -> Result<Self> {
        if ifs.len() != tree.alphabet() {
            return Err(Error::DimensionMismatch {
                expected: tree.alphabet(),
                got: ifs.len(),
            });
        }
        let band = cloud_resolution(ifs, scale);
        let gap = ssc.certified_gap().ok_or_else(|| {
            Error::Precondition("strong separation is not certified for this system".into())
        })?;
        let coverage = cube_coverage_bound(ifs)?;
        if !(gap > coverage + band) {
            return Err(Error::Precondition(format!(
                "certified gap {gap} does not exceed the reach {coverage} of Q around K plus the band {band}"
            )));
        }
        Ok(ZoomChecker {
            tree: reduced(tree)?,
            ifs,
            scale,
            band,
        })
    }

    /// The reduced tree the comparisons run on.
    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    /// Compares the zoom miniset `Q ∩ φ_v^{-1}(Γ(T))` with `Q ∩ Γ(T^u)` for
    /// `u = other`; `u = v` is the identity, other choices are controls.
    /// Passes iff `d_H ≤ 2(ε_zoom + ε_desc) + band`.
    pub fn compare(&self, v: &[Symbol], other: &[Symbol]) -> Result<ZoomIdentity> {
        let (ifs, band) = (self.ifs, self.band);
        let (_, zoom) = zoom_reduced(&self.tree, ifs, v, self.scale)?;
        let node = locate(&self.tree, other)?;
        let desc = self.tree.project_reduced(ifs, node, self.scale)?;
        let desc = miniset(&desc, &SimilarityMap::identity(ifs.dim()), Some(band))?;
        let (distance, tolerance) = match (zoom, desc) {
            (CompactSet::Cloud(a), CompactSet::Cloud(b)) => (
                hausdorff_distance(&a, &b)?,
                2.0 * (a.epsilon() + b.epsilon()) + band,
            ),
            (CompactSet::Empty, CompactSet::Empty) => (0.0, band),
            _ => (f64::INFINITY, band),
        };
        Ok(ZoomIdentity {
            node: Word::from(v),
            compared_with: Word::from(other),
            distance,
            tolerance,
            passed: distance <= tolerance,
        })
    }

    pub fn identity(&self, v: &[Symbol]) -> Result<ZoomIdentity> {
        self.compare(v, v)
    }
}

/// One-off form of [`ZoomChecker::compare`].
pub fn check_zoom_against(
    tree: &Tree,
    ifs: &Ifs,
    v: &[Symbol],
    other: &[Symbol],
    scale: f64,
    ssc: &SeparationVerdict,
) -> Result<ZoomIdentity> {
    ZoomChecker::new(tree, ifs, scale, ssc)?.compare(v, other)
}

/// One-off form of [`ZoomChecker::identity`].
pub fn check_zoom_identity_ssc(
    tree: &Tree,
    ifs: &Ifs,
    v: &[Symbol],
    scale: f64,
    ssc: &SeparationVerdict,
) -> Result<ZoomIdentity> {
    ZoomChecker::new(tree, ifs, scale, ssc)?.identity(v)
}
