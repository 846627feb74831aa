use serde::Serialize;

use super::extremes::{family_interval, Family};
use crate::error::{Error, Result};
use crate::similarity::Ifs;
use crate::symbols::Subset;
use crate::tree::Tree;

/// Relative slack in the bound comparisons, absorbing rounding in `ρ^{-s}`.
const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSide {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub scale: f64,
    pub count: usize,
    pub bound: f64,
    pub side: BoundSide,
}

/// Counts `|T ∩ Π_ρ|` with the bounds they were compared against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionCountRow {
    pub scale: f64,
    pub count: usize,
    pub lower: f64,
    pub upper: f64,
}

/// Checks `ρ^{-m_𝒜} ≤ |T ∩ Π_ρ| ≤ (ρ·r_min)^{-M_𝒜}` for each scale.
///
/// `T` must be an `𝒜`-tree up to its horizon. When `∅ ∈ 𝒜` the tree is
/// checked against the down-closure, which has no empty child set, so reduced
/// trees qualify and trees with early leaves do not.
pub fn section_count_check(
    tree: &Tree,
    ifs: &Ifs,
    family: &[Subset],
    scales: &[f64],
) -> Result<Vec<Violation>> {
    let fam = Family::new(ifs.len(), family)?;
    let bad = (0..tree.len() as u32)
        .find(|&id| tree.depth(id) < tree.horizon() && !fam.allows(tree.children(id)));
    if let Some(id) = bad {
        return Err(Error::Precondition(format!(
            "node {} has child set {}, which the family does not allow",
            tree.word_of(id),
            tree.children(id)
        )));
    }
    section_count_unchecked(tree, ifs, family, scales)
}

/// [`section_count_check`] without the family validation, for exhibiting
/// violations on trees that are not `𝒜`-trees.
pub fn section_count_unchecked(
    tree: &Tree,
    ifs: &Ifs,
    family: &[Subset],
    scales: &[f64],
) -> Result<Vec<Violation>> {
    Ok(section_count_table(tree, ifs, family, scales)?
        .into_iter()
        .flat_map(|row| {
            let mut v = Vec::new();
            if (row.count as f64) < row.lower * (1.0 - BOUND_SLACK) {
                v.push(Violation {
                    scale: row.scale,
                    count: row.count,
                    bound: row.lower,
                    side: BoundSide::Lower,
                });
            }
            if (row.count as f64) > row.upper * (1.0 + BOUND_SLACK) {
                v.push(Violation {
                    scale: row.scale,
                    count: row.count,
                    bound: row.upper,
                    side: BoundSide::Upper,
                });
            }
            v
        })
        .collect())
}

pub fn section_count_table(
    tree: &Tree,
    ifs: &Ifs,
    family: &[Subset],
    scales: &[f64],
) -> Result<Vec<SectionCountRow>> {
    let ext = family_interval(ifs, family)?;
    scales
        .iter()
        .map(|&rho| {
            if !(rho > 0.0 && rho < ifs.r_min()) {
                return Err(Error::Domain(format!(
                    "section scale must lie in (0, r_min = {}), got {rho}",
                    ifs.r_min()
                )));
            }
            Ok(SectionCountRow {
                scale: rho,
                count: tree.section_count(ifs, rho)?,
                lower: rho.powf(-ext.min),
                upper: (rho * ifs.r_min()).powf(-ext.max),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::similarity::{OpenBox, SimilarityMap};

    fn mixed() -> Ifs {
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
    fn full_tree_within_bounds() {
        let ifs = mixed();
        let t = Tree::full_tree(2, 14).unwrap();
        let scales = [0.2, 0.05, 0.01, 0.002];
        let table = section_count_table(&t, &ifs, &[Subset(3)], &scales).unwrap();
        let s = crate::dimension::moran_dimension(&[0.5, 0.25]).unwrap();
        for row in &table {
            assert!((row.lower - row.scale.powf(-s)).abs() < 1e-9 * row.lower);
            assert!(row.count as f64 >= row.lower && row.count as f64 <= row.upper);
        }
        assert!(section_count_check(&t, &ifs, &[Subset(3)], &scales)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn out_of_family_tree() {
        // every node keeps only the long-lived map
        let ifs = mixed();
        let t = Tree::ray_tree(2, &[0; 10]).unwrap();
        assert!(matches!(
            section_count_check(&t, &ifs, &[Subset(3)], &[0.01]),
            Err(Error::Precondition(_))
        ));
        let v = section_count_unchecked(&t, &ifs, &[Subset(3)], &[0.01]).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].side, BoundSide::Lower);
    }
}
