use rayon::prelude::*;
use serde::Serialize;

use super::section::{cloud_at_scale, walk_section, DEFAULT_SECTION_CAP};
use super::{Ifs, OpenBox, SimilarityMap, MAP_TOLERANCE};
use crate::error::{Error, Result};
use crate::geometry::{squared_distance, KdTree};
use crate::rng::{derive_seed, Stream};
use crate::symbols::{Symbol, Word};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeparationKind {
    /// `gap` is the distance between the first-level cylinder clouds at the
    /// evidence depth; `lower_bound = gap − 2·error` bounds the true distance
    /// between distinct first-level cylinders from below.
    CertifiedSeparated {
        gap: f64,
        lower_bound: f64,
    },
    /// Two distinct words with the same cylinder map.
    CertifiedOverlap {
        first: Word,
        second: Word,
    },
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationVerdict {
    #[serde(flatten)]
    pub kind: SeparationKind,
    /// Word length at which the verdict was reached.
    pub depth: usize,
    /// Hausdorff error of the cylinder clouds at that depth.
    pub approximation_error: f64,
}

impl SeparationVerdict {
    pub fn is_separated(&self) -> bool {
        matches!(self.kind, SeparationKind::CertifiedSeparated { .. })
    }

    /// Certified lower bound on the distance between distinct first-level cylinders.
    pub fn certified_gap(&self) -> Option<f64> {
        match self.kind {
            SeparationKind::CertifiedSeparated { lower_bound, .. } => Some(lower_bound),
            _ => None,
        }
    }

    /// `τ = √d / (gap · r_min)` computed with the certified gap.
    pub fn lemma_constant(&self, ifs: &Ifs) -> Option<f64> {
        self.certified_gap()
            .map(|g| (ifs.dim() as f64).sqrt() / (g * ifs.r_min()))
    }
}

/// Indices of one representative per class of maps equal within `tol`, in
/// increasing order. The first occurrence represents its class.
pub fn dedup_maps(maps: &[SimilarityMap], tol: f64) -> Vec<usize> {
    let mut duplicate = vec![false; maps.len()];
    for_each_equal_pair(maps, tol, |i, j| {
        duplicate[j.max(i)] = true;
        true
    });
    (0..maps.len()).filter(|&i| !duplicate[i]).collect()
}

/// Calls `hit(i, j)` with `i < j` for pairs of maps equal within `tol`, until it
/// returns `false`.
fn for_each_equal_pair(
    maps: &[SimilarityMap],
    tol: f64,
    mut hit: impl FnMut(usize, usize) -> bool,
) {
    let Some(first) = maps.first() else { return };
    let d = first.dim();
    let coords: Vec<f64> = maps
        .iter()
        .flat_map(|m| m.translation().iter().copied())
        .collect();
    let tree = KdTree::from_coords(d, &coords);
    // translations within tol per axis are within tol·√d in norm
    let radius_sq = tol * tol * d as f64 * (1.0 + 1e-9);
    for (i, m) in maps.iter().enumerate() {
        let mut near = Vec::new();
        tree.within(m.translation(), radius_sq + f64::MIN_POSITIVE, &mut |j| {
            if j > i {
                near.push(j)
            }
        });
        near.sort_unstable();
        for j in near {
            if m.approx_eq(&maps[j], tol) && !hit(i, j) {
                return;
            }
        }
    }
}

/// Below this ratio, distinct cylinder maps can differ by less than the
/// absolute map tolerance, so equality tests stop being meaningful.
const OVERLAP_MIN_RATIO: f64 = 1e-6;

/// Three-valued strong-separation check using words up to length `depth`.
pub fn check_ssc(ifs: &Ifs, depth: usize) -> Result<SeparationVerdict> {
    if depth == 0 {
        return Err(Error::Domain("separation depth must be at least 1".into()));
    }
    let n = ifs.len();
    let x0 = ifs.base_point();
    let d = ifs.dim();
    let mut words: Vec<Vec<Symbol>> = (0..n as Symbol).map(|s| vec![s]).collect();
    let mut maps: Vec<SimilarityMap> = ifs.maps().to_vec();
    let mut best: Option<(f64, f64, usize, f64)> = None;
    let mut last_error = 0.0;
    for k in 1..=depth {
        if k > 1 {
            let size = maps.len().saturating_mul(n);
            if size > DEFAULT_SECTION_CAP {
                return Err(Error::Resource {
                    what: "separation check",
                    cap: DEFAULT_SECTION_CAP,
                });
            }
            let mut next_words = Vec::with_capacity(size);
            let mut next_maps = Vec::with_capacity(size);
            for (w, m) in words.iter().zip(&maps) {
                for s in 0..n as Symbol {
                    let mut v = w.clone();
                    v.push(s);
                    next_words.push(v);
                    next_maps.push(m.compose(ifs.map(s)));
                }
            }
            words = next_words;
            maps = next_maps;
        }
        let error = ifs.r_max().powi(k as i32) * 2.0 * ifs.bounding_radius();
        last_error = error;

        let mut overlap = None;
        if ifs.r_min().powi(k as i32) >= OVERLAP_MIN_RATIO {
            for_each_equal_pair(&maps, MAP_TOLERANCE, |i, j| {
                overlap = Some((i, j));
                false
            });
        }
        if let Some((i, j)) = overlap {
            return Ok(SeparationVerdict {
                kind: SeparationKind::CertifiedOverlap {
                    first: Word(words[i].clone()),
                    second: Word(words[j].clone()),
                },
                depth: k,
                approximation_error: error,
            });
        }
        if n == 1 {
            continue;
        }

        // words are grouped by first letter in lexicographic order
        let per = maps.len() / n;
        let mut clouds: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut buf = vec![0.0; d];
        for letter in 0..n {
            let mut c = Vec::with_capacity(per * d);
            for m in &maps[letter * per..(letter + 1) * per] {
                m.apply_into(&x0, &mut buf);
                c.extend_from_slice(&buf);
            }
            clouds.push(c);
        }
        let trees: Vec<KdTree> = clouds.iter().map(|c| KdTree::from_coords(d, c)).collect();
        let mut gap_sq = f64::INFINITY;
        for i in 0..n {
            for tree in &trees[i + 1..] {
                for p in clouds[i].chunks_exact(d) {
                    if let Some((dist, _)) = tree.nearest(p) {
                        gap_sq = gap_sq.min(dist);
                    }
                }
            }
        }
        let gap = gap_sq.sqrt();
        let lower = gap - 2.0 * error;
        if lower > 0.0 && best.is_none_or(|b| lower > b.1) {
            best = Some((gap, lower, k, error));
        }
    }
    if n == 1 {
        // a single map: nothing to separate
        return Ok(SeparationVerdict {
            kind: SeparationKind::CertifiedSeparated {
                gap: f64::INFINITY,
                lower_bound: f64::INFINITY,
            },
            depth: 1,
            approximation_error: last_error,
        });
    }
    Ok(match best {
        Some((gap, lower_bound, depth, approximation_error)) => SeparationVerdict {
            kind: SeparationKind::CertifiedSeparated { gap, lower_bound },
            depth,
            approximation_error,
        },
        None => SeparationVerdict {
            kind: SeparationKind::Undecided,
            depth,
            approximation_error: last_error,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairCheck {
    pub first: usize,
    pub second: usize,
    pub disjoint: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OscReport {
    pub passed: bool,
    /// Set when some map has an orthogonal part that is not a signed
    /// permutation, so the check fell back to sampling.
    pub heuristic: bool,
    /// `φ_i(box) ⊆ box` per map.
    pub contained: Vec<bool>,
    pub pairs: Vec<PairCheck>,
}

const OSC_SLACK: f64 = 1e-12;
const OSC_SAMPLES: usize = 4096;
const OSC_SEED: u64 = 0x05C0_05C0;

fn image_box(map: &SimilarityMap, b: &OpenBox) -> Option<OpenBox> {
    let perm = map.signed_permutation()?;
    let mut lo = Vec::with_capacity(b.dim());
    let mut hi = Vec::with_capacity(b.dim());
    for (k, (axis, sign)) in perm.into_iter().enumerate() {
        let a = map.ratio() * sign * b.lo[axis] + map.translation()[k];
        let c = map.ratio() * sign * b.hi[axis] + map.translation()[k];
        lo.push(a.min(c));
        hi.push(a.max(c));
    }
    Some(OpenBox { lo, hi })
}

/// Checks the open set condition for a declared box: images inside the box and
/// pairwise disjoint. Exact for maps whose orthogonal part is a signed
/// permutation, sampled otherwise.
pub fn check_declared_osc(ifs: &Ifs, b: &OpenBox) -> Result<OscReport> {
    if b.dim() != ifs.dim() {
        return Err(Error::DimensionMismatch {
            expected: ifs.dim(),
            got: b.dim(),
        });
    }
    let images: Option<Vec<OpenBox>> = ifs.maps().iter().map(|m| image_box(m, b)).collect();
    let n = ifs.len();
    let mut pairs = Vec::new();
    let (contained, heuristic): (Vec<bool>, bool) = match &images {
        Some(images) => {
            let contained = images
                .iter()
                .map(|im| {
                    (0..b.dim())
                        .all(|k| im.lo[k] >= b.lo[k] - OSC_SLACK && im.hi[k] <= b.hi[k] + OSC_SLACK)
                })
                .collect();
            for i in 0..n {
                for j in i + 1..n {
                    let (p, q) = (&images[i], &images[j]);
                    let disjoint = (0..b.dim())
                        .any(|k| p.hi[k] <= q.lo[k] + OSC_SLACK || q.hi[k] <= p.lo[k] + OSC_SLACK);
                    pairs.push(PairCheck {
                        first: i,
                        second: j,
                        disjoint,
                    });
                }
            }
            (contained, false)
        }
        None => {
            let mut stream = Stream::new(OSC_SEED);
            let samples: Vec<Vec<f64>> = (0..OSC_SAMPLES)
                .map(|_| {
                    (0..b.dim())
                        .map(|k| b.lo[k] + (b.hi[k] - b.lo[k]) * stream.uniform())
                        .collect()
                })
                .collect();
            let contained = ifs
                .maps()
                .iter()
                .map(|m| {
                    samples.iter().all(|x| {
                        let y = m.apply(x);
                        (0..b.dim())
                            .all(|k| y[k] >= b.lo[k] - OSC_SLACK && y[k] <= b.hi[k] + OSC_SLACK)
                    })
                })
                .collect();
            let inverses: Vec<SimilarityMap> = ifs.maps().iter().map(|m| m.inverse()).collect();
            for i in 0..n {
                for (j, inv) in inverses.iter().enumerate().skip(i + 1) {
                    // a point of φ_i(box) whose φ_j-preimage lies inside the box
                    // witnesses an intersection
                    let disjoint = samples.iter().all(|x| {
                        let z = inv.apply(&ifs.maps()[i].apply(x));
                        !(0..b.dim())
                            .all(|k| z[k] > b.lo[k] + OSC_SLACK && z[k] < b.hi[k] - OSC_SLACK)
                    });
                    pairs.push(PairCheck {
                        first: i,
                        second: j,
                        disjoint,
                    });
                }
            }
            (contained, true)
        }
    };
    let passed = contained.iter().all(|&c| c) && pairs.iter().all(|p| p.disjoint);
    Ok(OscReport {
        passed,
        heuristic,
        contained,
        pairs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WscEntry {
    pub rho: f64,
    /// Distinct cylinder maps in the section.
    pub distinct_cylinders: usize,
    /// Largest number of distinct cylinders meeting one sampled ball of radius `rho`.
    pub max_count: usize,
}

/// Empirical weak-separation profile: for each scale, the largest number of
/// distinct section cylinders that meet a sampled ball of that radius.
pub fn wsc_profile(
    ifs: &Ifs,
    rhos: &[f64],
    ball_samples: usize,
    seed: u64,
) -> Result<Vec<WscEntry>> {
    let d = ifs.dim();
    let x0 = ifs.base_point();
    // a small fixed sample of the attractor, pushed into each cylinder
    let mut depth = 1;
    while ifs.len().pow(depth as u32 + 1) <= 256 {
        depth += 1;
    }
    let mut base = Vec::new();
    let base_scale = ifs.r_max().powi(depth);
    walk_section(
        ifs,
        base_scale,
        DEFAULT_SECTION_CAP,
        true,
        (),
        &mut |_, _| Some(()),
        &mut |_, _| Ok(()),
        &mut |_, _, m| base.extend(m.expect("maps are tracked").apply(&x0)),
    )?;

    let mut out = Vec::with_capacity(rhos.len());
    for (idx, &rho) in rhos.iter().enumerate() {
        if !(rho > 0.0 && rho <= ifs.r_min()) {
            return Err(Error::Domain(format!(
                "profile scale must lie in (0, r_min = {}], got {rho}",
                ifs.r_min()
            )));
        }
        let mut maps = Vec::new();
        walk_section(
            ifs,
            rho,
            DEFAULT_SECTION_CAP,
            true,
            (),
            &mut |_, _| Some(()),
            &mut |_, _| Ok(()),
            &mut |_, _, m| maps.push(m.expect("maps are tracked").clone()),
        )?;
        let reps: Vec<SimilarityMap> = dedup_maps(&maps, MAP_TOLERANCE)
            .into_iter()
            .map(|i| maps[i].clone())
            .collect();
        let anchors: Vec<f64> = reps.iter().flat_map(|m| m.apply(&x0)).collect();
        let anchor_tree = KdTree::from_coords(d, &anchors);

        let centers = cloud_at_scale(ifs, rho * ifs.r_min(), DEFAULT_SECTION_CAP)?;
        let mut stream = Stream::new(derive_seed(seed, idx as u64));
        let picks: Vec<usize> = (0..ball_samples)
            .map(|_| stream.index(centers.len()))
            .collect();
        let reach = rho + 2.0 * rho * ifs.bounding_radius();
        let reach_sq = reach * reach * (1.0 + 1e-9);
        let rho_sq = rho * rho;
        let max_count = picks
            .par_iter()
            .map(|&c| {
                let center = centers.point(c);
                let mut candidates = Vec::new();
                anchor_tree.within(center, reach_sq, &mut |i| candidates.push(i));
                let mut buf = vec![0.0; d];
                candidates
                    .into_iter()
                    .filter(|&i| {
                        base.chunks_exact(d).any(|b| {
                            reps[i].apply_into(b, &mut buf);
                            squared_distance(&buf, center) < rho_sq
                        })
                    })
                    .count()
            })
            .max()
            .unwrap_or(0);
        out.push(WscEntry {
            rho,
            distinct_cylinders: reps.len(),
            max_count,
        });
    }
    Ok(out)
}
