use serde::Serialize;

use super::solvers::{gwf_root, moran_root, Root};
use crate::error::{Error, Result};
use crate::galton_watson::OffspringDistribution;
use crate::similarity::Ifs;
use crate::symbols::Subset;

/// Dimensions closer than this are reported as ties.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Minimum and maximum of `dim K_A` over a collection of subsets, with every
/// subset attaining them in increasing mask order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extremes {
    pub min: f64,
    pub max: f64,
    pub argmin: Vec<Subset>,
    pub argmax: Vec<Subset>,
    /// Largest residual among the Moran solves.
    pub residual: f64,
}

/// `dim K_A` for the sub-system on `set`; the empty set counts as 0.
pub fn subset_dimension(ifs: &Ifs, set: Subset) -> Result<f64> {
    Ok(subset_root(ifs, set)?.value)
}

fn subset_root(ifs: &Ifs, set: Subset) -> Result<Root> {
    if !set.fits(ifs.len()) {
        return Err(Error::Validation(format!(
            "{set} is not a subset of an alphabet of size {}",
            ifs.len()
        )));
    }
    if set.is_empty() {
        return Ok(Root {
            value: 0.0,
            residual: 0.0,
            iterations: 0,
        });
    }
    let ratios: Vec<f64> = set.iter().map(|s| ifs.ratio(s)).collect();
    moran_root(&ratios)
}

fn extremes_over(ifs: &Ifs, sets: &[Subset]) -> Result<Extremes> {
    let mut dims = Vec::with_capacity(sets.len());
    let mut residual: f64 = 0.0;
    for &s in sets {
        let r = subset_root(ifs, s)?;
        residual = residual.max(r.residual);
        dims.push((s, r.value));
    }
    dims.sort_by_key(|d| d.0);
    let min = dims.iter().map(|d| d.1).fold(f64::INFINITY, f64::min);
    let max = dims.iter().map(|d| d.1).fold(f64::NEG_INFINITY, f64::max);
    let argmin = dims
        .iter()
        .filter(|d| d.1 <= min + TIE_TOLERANCE)
        .map(|d| d.0)
        .collect();
    let argmax = dims
        .iter()
        .filter(|d| d.1 >= max - TIE_TOLERANCE)
        .map(|d| d.0)
        .collect();
    Ok(Extremes {
        min,
        max,
        argmin,
        argmax,
        residual,
    })
}

/// `(m_W, M_W)`: extremes of `dim K_A` over the support of `W`, with `∅ ↦ 0`.
pub fn offspring_extremes(ifs: &Ifs, w: &OffspringDistribution) -> Result<Extremes> {
    if w.alphabet() != ifs.len() {
        return Err(Error::DimensionMismatch {
            expected: ifs.len(),
            got: w.alphabet(),
        });
    }
    extremes_over(ifs, &w.support())
}

/// The family actually used for `𝒜`: duplicates removed, and when `∅ ∈ 𝒜`
/// the down-closure `{A ≠ ∅ : A ⊆ B for some B ∈ 𝒜}`, represented by its
/// maximal members plus the singletons below them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Family {
    pub members: Vec<Subset>,
    pub down_closed: bool,
}

impl Family {
    pub fn new(alphabet: usize, sets: &[Subset]) -> Result<Family> {
        if sets.is_empty() {
            return Err(Error::Domain("the family of child sets is empty".into()));
        }
        if let Some(s) = sets.iter().find(|s| !s.fits(alphabet)) {
            return Err(Error::Validation(format!(
                "{s} is not a subset of an alphabet of size {alphabet}"
            )));
        }
        let mut members: Vec<Subset> = sets.to_vec();
        members.sort();
        members.dedup();
        let down_closed = members[0].is_empty();
        if down_closed {
            members.remove(0);
            if members.is_empty() {
                return Err(Error::Domain(
                    "the family {∅} is degenerate: no infinite tree has it".into(),
                ));
            }
        }
        Ok(Family {
            members,
            down_closed,
        })
    }

    /// Whether `set` is an allowed child set.
    pub fn allows(&self, set: Subset) -> bool {
        if self.down_closed {
            !set.is_empty() && self.members.iter().any(|m| set.is_subset_of(*m))
        } else {
            self.members.binary_search(&set).is_ok()
        }
    }

    /// Every allowed child set when it is cheap to list them, otherwise `None`.
    pub fn allowed_sets(&self, limit: usize) -> Option<Vec<Subset>> {
        if !self.down_closed {
            return Some(self.members.clone());
        }
        let mut all = Vec::new();
        for m in &self.members {
            if m.len() >= 63 || (1usize << m.len()) > limit {
                return None;
            }
            all.extend(m.submasks().into_iter().filter(|s| !s.is_empty()));
        }
        all.sort();
        all.dedup();
        (all.len() <= limit).then_some(all)
    }
}

/// `(m_𝒜, M_𝒜)` for a family of child sets.
///
/// With `∅ ∈ 𝒜` the interval is taken over the down-closure. Its minimum is 0,
/// attained exactly at the singletons, and its maximum is attained only at
/// members of `𝒜` because adding a map strictly raises the dimension.
pub fn family_interval(ifs: &Ifs, family: &[Subset]) -> Result<Extremes> {
    let fam = Family::new(ifs.len(), family)?;
    let mut ext = extremes_over(ifs, &fam.members)?;
    if fam.down_closed {
        let union = fam
            .members
            .iter()
            .fold(Subset::EMPTY, |u, m| Subset(u.0 | m.0));
        ext.min = 0.0;
        ext.argmin = union.iter().map(Subset::singleton).collect();
    }
    Ok(ext)
}

/// The law `W_t = t·δ_{A_min} + (1−t)·δ_{A_max}` hitting a target dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetLaw {
    pub t: f64,
    pub a_min: Subset,
    pub a_max: Subset,
    pub law: OffspringDistribution,
    /// `gwf_dimension(law)`.
    pub achieved: f64,
}

fn interpolated(
    alphabet: usize,
    a_min: Subset,
    a_max: Subset,
    t: f64,
) -> Result<OffspringDistribution> {
    if a_min == a_max || t <= 0.0 {
        return OffspringDistribution::deterministic(alphabet, a_max);
    }
    if t >= 1.0 {
        return OffspringDistribution::deterministic(alphabet, a_min);
    }
    OffspringDistribution::new(alphabet, vec![(a_min, t), (a_max, 1.0 - t)])
}

fn law_dimension(ifs: &Ifs, w: &OffspringDistribution) -> Result<f64> {
    Ok(gwf_root(ifs, w)?.value)
}

/// Finds `t` with `dim W_t = target` by bisection, `A_min` and `A_max` being
/// the first minimizer and maximizer of [`family_interval`] in mask order.
///
/// `t ↦ s_t` is continuous and non-increasing: at `s ∈ [m, M]` the sums
/// `Σ_{A_min} r_i^s ≤ 1 ≤ Σ_{A_max} r_i^s`, so raising `t` lowers the
/// expectation there. Endpoints: `s_0 = M`, `s_1 = m`.
///
/// No separation condition is checked; without one the dimensions involved
/// are similarity dimensions only.
pub fn offspring_for_target(ifs: &Ifs, family: &[Subset], target: f64) -> Result<TargetLaw> {
    let ext = family_interval(ifs, family)?;
    if !(target >= ext.min - TIE_TOLERANCE && target <= ext.max + TIE_TOLERANCE) {
        return Err(Error::Domain(format!(
            "target {target} is outside the family interval [{}, {}]",
            ext.min, ext.max
        )));
    }
    let (a_min, a_max) = (ext.argmin[0], ext.argmax[0]);
    let alphabet = ifs.len();
    let dim_at =
        |t: f64| -> Result<f64> { law_dimension(ifs, &interpolated(alphabet, a_min, a_max, t)?) };
    let t = if target >= ext.max || a_min == a_max {
        0.0
    } else if target <= ext.min {
        1.0
    } else {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if dim_at(mid)? > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if (dim_at(lo)? - target).abs() <= (dim_at(hi)? - target).abs() {
            lo
        } else {
            hi
        }
    };
    let law = interpolated(alphabet, a_min, a_max, t)?;
    let achieved = law_dimension(ifs, &law)?;
    Ok(TargetLaw {
        t,
        a_min,
        a_max,
        law,
        achieved,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimension::gwf_dimension;

    fn all_nonempty(k: usize) -> Vec<Subset> {
        Subset::full(k)
            .submasks()
            .into_iter()
            .filter(|s| !s.is_empty())
            .collect()
    }

    #[test]
    fn percolation_extremes() {
        let ifs = Ifs::percolation(2, 2).unwrap();
        let w = OffspringDistribution::binomial(4, 0.7).unwrap();
        let e = offspring_extremes(&ifs, &w).unwrap();
        assert_eq!(e.min, 0.0);
        assert!((e.max - 2.0).abs() < 1e-12);
        assert_eq!(e.argmax, vec![Subset::full(4)]);
        // the empty set and the four singletons all have dimension 0
        assert_eq!(e.argmin.len(), 5);
    }

    #[test]
    fn cantor_mixed_extremes() {
        let ifs = Ifs::cantor();
        let w = OffspringDistribution::uniform(2, &[Subset(1), Subset(3)]).unwrap();
        let e = offspring_extremes(&ifs, &w).unwrap();
        assert_eq!((e.min, e.argmin.clone()), (0.0, vec![Subset(1)]));
        assert!((e.max - 2f64.ln() / 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn family_intervals() {
        let ifs = Ifs::cantor();
        let s = 2f64.ln() / 3f64.ln();
        let e = family_interval(&ifs, &[Subset(3)]).unwrap();
        assert!((e.min - s).abs() < 1e-12 && (e.max - s).abs() < 1e-12);
        let e = family_interval(&ifs, &all_nonempty(2)).unwrap();
        assert_eq!(e.min, 0.0);
        assert_eq!(e.argmin, vec![Subset(1), Subset(2)]);
        let with_empty = family_interval(&ifs, &[Subset::EMPTY, Subset(3)]).unwrap();
        assert_eq!(with_empty, e);
        assert!(matches!(
            family_interval(&ifs, &[Subset::EMPTY]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(family_interval(&ifs, &[]), Err(Error::Domain(_))));
    }

    #[test]
    fn down_closure_membership() {
        let f = Family::new(3, &[Subset::EMPTY, Subset(0b011)]).unwrap();
        assert!(f.allows(Subset(0b001)) && f.allows(Subset(0b011)));
        assert!(!f.allows(Subset(0b100)) && !f.allows(Subset::EMPTY));
        assert_eq!(
            f.allowed_sets(100).unwrap(),
            vec![Subset(1), Subset(2), Subset(3)]
        );
    }

    #[test]
    fn target_endpoints_and_midpoint() {
        let ifs = Ifs::cantor();
        let fam = all_nonempty(2);
        let e = family_interval(&ifs, &fam).unwrap();
        let top = offspring_for_target(&ifs, &fam, e.max).unwrap();
        assert_eq!(top.t, 0.0);
        let bottom = offspring_for_target(&ifs, &fam, e.min).unwrap();
        assert_eq!(bottom.t, 1.0);
        assert_eq!(bottom.achieved, 0.0);
        let mid = 0.5 * (e.min + e.max);
        let law = offspring_for_target(&ifs, &fam, mid).unwrap();
        assert!((gwf_dimension(&ifs, &law.law).unwrap() - mid).abs() < 1e-9);
        assert!(matches!(
            offspring_for_target(&ifs, &fam, 0.9),
            Err(Error::Domain(_))
        ));
    }
}
