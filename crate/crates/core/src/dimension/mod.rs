//! Exact dimension solvers and covering-number estimators.

mod bounds;
mod estimators;
mod extremes;
mod solvers;

use serde::Serialize;

pub use bounds::{
    section_count_check, section_count_table, section_count_unchecked, BoundSide, SectionCountRow,
    Violation,
};
pub use estimators::{
    assouad_estimate, box_counts, box_dim_estimate, grid_scale_pairs, lower_estimate, BoxCount,
    BoxFit, Centers, WindowEstimate, WindowRecord, DEFAULT_GUARD, MIN_WINDOW_RATIO,
};
pub use extremes::{
    family_interval, offspring_extremes, offspring_for_target, subset_dimension, Extremes, Family,
    TargetLaw, TIE_TOLERANCE,
};
pub use solvers::{bisect_decreasing, gwf_dimension, gwf_root, moran_dimension, moran_root, Root};

use crate::error::Result;
use crate::galton_watson::OffspringDistribution;
use crate::similarity::Ifs;
use crate::symbols::Subset;

/// Almost sure dimension and the lower/Assouad endpoints of a Galton-Watson fractal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionReport {
    pub delta: f64,
    #[serde(rename = "m_W")]
    pub lower: f64,
    #[serde(rename = "M_W")]
    pub upper: f64,
    pub argmin_sets: Vec<Subset>,
    pub argmax_sets: Vec<Subset>,
    pub delta_residual: f64,
    pub extremes_residual: f64,
}

impl DimensionReport {
    pub fn compute(ifs: &Ifs, w: &OffspringDistribution) -> Result<DimensionReport> {
        let root = gwf_root(ifs, w)?;
        let ext = offspring_extremes(ifs, w)?;
        Ok(DimensionReport {
            delta: root.value,
            lower: ext.min,
            upper: ext.max,
            argmin_sets: ext.argmin,
            argmax_sets: ext.argmax,
            delta_residual: root.residual,
            extremes_residual: ext.residual,
        })
    }
}
