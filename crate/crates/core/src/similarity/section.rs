use serde::Serialize;

use super::{Ifs, SimilarityMap};
use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::symbols::{Subset, Symbol, Word};

/// Default limit on the number of words in a section.
pub const DEFAULT_SECTION_CAP: usize = 10_000_000;

/// Relative slack in `r ≤ ρ`, so that products of ratios that equal `ρ` in
/// exact arithmetic are not pushed past it by rounding.
const RATIO_SLACK: f64 = 1e-12;

#[inline]
pub(crate) fn at_most(ratio: f64, scale: f64) -> bool {
    ratio <= scale * (1.0 + RATIO_SLACK)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionEntry {
    pub word: Word,
    pub ratio: f64,
}

/// The words whose ratio first drops to `scale` or below, in lexicographic order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Section {
    pub scale: f64,
    pub entries: Vec<SectionEntry>,
}

impl Section {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The unique entry that is a prefix of `word`, if `word` is long enough.
    pub fn entry_prefixing(&self, word: &[Symbol]) -> Option<&SectionEntry> {
        let i = self
            .entries
            .partition_point(|e| e.word.0.as_slice() <= word);
        let e = self.entries.get(i.checked_sub(1)?)?;
        e.word.is_prefix_of(word).then_some(e)
    }
}

/// Receives a section word, its ratio and optionally its cylinder map.
pub(crate) type Visitor<'a> = dyn FnMut(&[Symbol], f64, Option<&SimilarityMap>) + 'a;

/// Depth-first walk over the words of a tree-like word set, emitting the words
/// that belong to the section at `scale`.
///
/// `expand(node, s)` returns the child handle for symbol `s`, if present.
/// `dead_end(node, depth)` is called for nodes above the section without
/// children. `visit(word, ratio, map)` receives each section word; `map` is the
/// composed cylinder map when `with_maps` is set. Returns the number of words.
#[allow(clippy::too_many_arguments)]
pub(crate) fn walk_section<N: Copy>(
    ifs: &Ifs,
    scale: f64,
    cap: usize,
    with_maps: bool,
    root: N,
    expand: &mut dyn FnMut(N, Symbol) -> Option<N>,
    dead_end: &mut dyn FnMut(N, usize) -> Result<()>,
    visit: &mut Visitor<'_>,
) -> Result<usize> {
    struct Ctx<'a, N> {
        ifs: &'a Ifs,
        scale: f64,
        cap: usize,
        with_maps: bool,
        count: usize,
        word: Vec<Symbol>,
        expand: &'a mut dyn FnMut(N, Symbol) -> Option<N>,
        dead_end: &'a mut dyn FnMut(N, usize) -> Result<()>,
        visit: &'a mut Visitor<'a>,
    }

    fn rec<N: Copy>(
        ctx: &mut Ctx<'_, N>,
        node: N,
        ratio: f64,
        map: Option<&SimilarityMap>,
    ) -> Result<()> {
        if at_most(ratio, ctx.scale) {
            ctx.count += 1;
            if ctx.count > ctx.cap {
                return Err(Error::Resource {
                    what: "section",
                    cap: ctx.cap,
                });
            }
            (ctx.visit)(&ctx.word, ratio, map);
            return Ok(());
        }
        let mut any = false;
        for s in 0..ctx.ifs.len() as Symbol {
            if let Some(child) = (ctx.expand)(node, s) {
                any = true;
                let child_map = if ctx.with_maps {
                    Some(map.expect("maps are tracked").compose(ctx.ifs.map(s)))
                } else {
                    None
                };
                ctx.word.push(s);
                let r = rec(ctx, child, ratio * ctx.ifs.ratio(s), child_map.as_ref());
                ctx.word.pop();
                r?;
            }
        }
        if !any {
            (ctx.dead_end)(node, ctx.word.len())?;
        }
        Ok(())
    }

    let mut ctx = Ctx {
        ifs,
        scale,
        cap,
        with_maps,
        count: 0,
        word: Vec::new(),
        expand,
        dead_end,
        visit,
    };
    let identity = SimilarityMap::identity(ifs.dim());
    rec(&mut ctx, root, 1.0, with_maps.then_some(&identity))?;
    Ok(ctx.count)
}

fn check_scale(ifs: &Ifs, scale: f64) -> Result<()> {
    if !(scale > 0.0 && scale <= ifs.r_min()) {
        return Err(Error::Domain(format!(
            "section scale must lie in (0, r_min = {}], got {scale}",
            ifs.r_min()
        )));
    }
    Ok(())
}

/// The section `Π_ρ` of the full word space, capped at [`DEFAULT_SECTION_CAP`].
pub fn build_section(ifs: &Ifs, scale: f64) -> Result<Section> {
    build_section_capped(ifs, scale, DEFAULT_SECTION_CAP)
}

pub fn build_section_capped(ifs: &Ifs, scale: f64, cap: usize) -> Result<Section> {
    check_scale(ifs, scale)?;
    let mut entries = Vec::new();
    walk_section(
        ifs,
        scale,
        cap,
        false,
        (),
        &mut |_, _| Some(()),
        &mut |_, _| Ok(()),
        &mut |w, r, _| {
            entries.push(SectionEntry {
                word: Word::from(w),
                ratio: r,
            })
        },
    )?;
    Ok(Section { scale, entries })
}

/// One point per section word: `φ_w(x0)` with `x0` the base point.
/// Accepts any positive scale; scales at or above 1 give the base point alone.
pub(crate) fn cloud_at_scale(ifs: &Ifs, scale: f64, cap: usize) -> Result<PointCloud> {
    let x0 = ifs.base_point();
    let d = ifs.dim();
    let mut coords = Vec::new();
    let mut buf = vec![0.0; d];
    walk_section(
        ifs,
        scale,
        cap,
        true,
        (),
        &mut |_, _| Some(()),
        &mut |_, _| Ok(()),
        &mut |_, _, m| {
            m.expect("maps are tracked").apply_into(&x0, &mut buf);
            coords.extend_from_slice(&buf);
        },
    )?;
    Ok(PointCloud::from_raw(
        d,
        coords,
        cloud_resolution(ifs, scale),
    ))
}

/// Certified resolution `2ρR_K` of a cloud built at scale `ρ`.
pub fn cloud_resolution(ifs: &Ifs, scale: f64) -> f64 {
    2.0 * scale.min(1.0) * ifs.bounding_radius()
}

/// Discretized attractor at scale `ρ ∈ (0, r_min)`.
pub fn attractor_cloud(ifs: &Ifs, scale: f64) -> Result<PointCloud> {
    check_scale(ifs, scale)?;
    cloud_at_scale(ifs, scale, DEFAULT_SECTION_CAP)
}

/// Discretized attractor of the sub-system indexed by `subset`.
pub fn restricted_attractor_cloud(ifs: &Ifs, subset: Subset, scale: f64) -> Result<PointCloud> {
    check_scale(ifs, scale)?;
    let sub = ifs.sub_system(subset)?;
    cloud_at_scale(&sub, scale, DEFAULT_SECTION_CAP)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::hausdorff_distance;
    use crate::similarity::OpenBox;

    fn half_quarter() -> Ifs {
        Ifs::new(
            vec![
                SimilarityMap::homothety(0.5, vec![0.0]).unwrap(),
                SimilarityMap::homothety(0.25, vec![0.75]).unwrap(),
            ],
            Some(OpenBox::unit(1)),
        )
        .unwrap()
    }

    #[test]
    fn mixed_ratio_section_by_enumeration() {
        // Oracle: all words of length <= 2, keep those with r <= 1/4 whose
        // parent has r > 1/4.
        let ifs = half_quarter();
        let mut oracle = Vec::new();
        let words: Vec<Vec<Symbol>> = vec![
            vec![0],
            vec![1],
            vec![0, 0],
            vec![0, 1],
            vec![1, 0],
            vec![1, 1],
        ];
        for w in words {
            let r = ifs.word_ratio(&w);
            let parent = ifs.word_ratio(&w[..w.len() - 1]);
            if r <= 0.25 && parent > 0.25 {
                oracle.push(Word(w));
            }
        }
        oracle.sort();
        let sec = build_section(&ifs, 0.25).unwrap();
        let got: Vec<Word> = sec.entries.iter().map(|e| e.word.clone()).collect();
        assert_eq!(got, oracle);
        assert_eq!(got, vec![Word(vec![0, 0]), Word(vec![0, 1]), Word(vec![1])]);
    }

    #[test]
    fn equal_ratios_give_full_level() {
        let ifs = Ifs::cantor();
        let sec = build_section(&ifs, 1.0 / 27.0).unwrap();
        assert_eq!(sec.len(), 8);
        assert!(sec.entries.iter().all(|e| e.word.len() == 3));
        let sec = build_section(&ifs, 0.03).unwrap();
        assert_eq!(sec.len(), 16);
    }

    #[test]
    fn scale_out_of_range() {
        let ifs = Ifs::cantor();
        assert!(matches!(build_section(&ifs, 0.5), Err(Error::Domain(_))));
        assert!(matches!(build_section(&ifs, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn cap_is_enforced() {
        let ifs = Ifs::cantor();
        assert!(matches!(
            build_section_capped(&ifs, 1e-6, 100),
            Err(Error::Resource { .. })
        ));
    }

    #[test]
    fn cantor_cloud_contains_endpoints() {
        let ifs = Ifs::cantor();
        let c = attractor_cloud(&ifs, 1.0 / 27.0).unwrap();
        assert_eq!(c.len(), 8);
        let eps = c.epsilon();
        assert!((eps - 2.0 / 27.0).abs() < 1e-15);
        assert!(c.points().any(|p| p[0].abs() <= eps));
        assert!(c.points().any(|p| (p[0] - 1.0).abs() <= eps));
    }

    #[test]
    fn refinement_within_resolution() {
        let ifs = half_quarter();
        let rho = 0.01;
        let a = attractor_cloud(&ifs, rho).unwrap();
        let b = attractor_cloud(&ifs, rho * rho).unwrap();
        assert!(hausdorff_distance(&a, &b).unwrap() <= a.epsilon());
    }

    #[test]
    fn singleton_restriction_is_fixed_point() {
        let ifs = Ifs::cantor();
        let c = restricted_attractor_cloud(&ifs, Subset::singleton(1), 0.01).unwrap();
        assert!(c.points().all(|p| (p[0] - 1.0).abs() < 1e-12));
        let full = restricted_attractor_cloud(&ifs, Subset::full(2), 0.01).unwrap();
        assert_eq!(full, attractor_cloud(&ifs, 0.01).unwrap());
        assert!(matches!(
            restricted_attractor_cloud(&ifs, Subset::EMPTY, 0.01),
            Err(Error::EmptySet(_))
        ));
    }

    #[test]
    fn entry_prefixing_lookup() {
        let sec = build_section(&half_quarter(), 0.25).unwrap();
        assert_eq!(
            sec.entry_prefixing(&[0, 1, 1, 0]).unwrap().word,
            Word(vec![0, 1])
        );
        assert_eq!(sec.entry_prefixing(&[1, 0]).unwrap().word, Word(vec![1]));
        assert!(sec.entry_prefixing(&[0]).is_none());
    }
}
