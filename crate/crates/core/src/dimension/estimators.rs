//! Covering-number estimators on point clouds.
//!
//! Every count is taken on the axis grid anchored at the origin: `N_r` is the
//! number of grid cells of side `r` holding a point. This is within a constant
//! factor of the smallest cover by balls of radius `r`, which does not change
//! slopes. Local counts use grid windows: the window of side `R` at `x` is the
//! grid cell of side `R` containing `x`, and `R/r` is an integer so that the
//! small cells tile it exactly.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::rng::{derive_seed, Stream};

/// Default ratio between the smallest admissible scale and the cloud resolution.
pub const DEFAULT_GUARD: f64 = 4.0;

/// Smallest admissible window ratio `R/r`.
pub const MIN_WINDOW_RATIO: u64 = 8;

/// Points on a cell boundary up to this relative offset are assigned to the
/// upper cell, so that grid points built as `k·r` in floating point land in
/// cell `k`.
const GRID_NUDGE: f64 = 1e-9;

#[inline]
fn cell_index(x: f64, side: f64) -> i64 {
    (x / side + GRID_NUDGE).floor() as i64
}

fn check_guard(cloud: &PointCloud, r: f64, guard: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Resolution(format!(
            "cell side must be positive, got {r}"
        )));
    }
    if r < guard * cloud.epsilon() {
        return Err(Error::Resolution(format!(
            "cell side {r:e} is below {guard}·ε = {:e}",
            guard * cloud.epsilon()
        )));
    }
    Ok(())
}

fn occupied_cells(cloud: &PointCloud, r: f64) -> Vec<Vec<i64>> {
    let mut cells: Vec<Vec<i64>> = cloud
        .points()
        .map(|p| p.iter().map(|&x| cell_index(x, r)).collect())
        .collect();
    cells.sort_unstable();
    cells.dedup();
    cells
}

/// `N_r`: occupied cells of side `r`. Requires `r ≥ guard·ε`.
pub fn box_counts(cloud: &PointCloud, r: f64, guard: f64) -> Result<usize> {
    check_guard(cloud, r, guard)?;
    Ok(occupied_cells(cloud, r).len())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxCount {
    pub r: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxFit {
    /// Least-squares slope of `log N_r` against `log(1/r)`.
    pub slope: f64,
    pub table: Vec<BoxCount>,
}

/// Box-counting slope over the given cell sides, each of which must pass the guard.
pub fn box_dim_estimate(cloud: &PointCloud, sides: &[f64], guard: f64) -> Result<BoxFit> {
    let mut table = Vec::with_capacity(sides.len());
    for &r in sides {
        table.push(BoxCount {
            r,
            count: box_counts(cloud, r, guard)?,
        });
    }
    let xs: Vec<f64> = table.iter().map(|b| -b.r.ln()).collect();
    let ys: Vec<f64> = table.iter().map(|b| (b.count as f64).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if xs.len() < 2 || sxx <= 0.0 {
        return Err(Error::Resolution(
            "a slope needs at least two distinct cell sides".into(),
        ));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(BoxFit {
        slope: sxy / sxx,
        table,
    })
}

/// Which windows to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Centers {
    /// Every occupied window, centered at its first point in coordinate order.
    All,
    /// `count` cloud points drawn uniformly; draw `i` uses its own stream
    /// keyed by `(seed, i)`.
    Sampled { count: usize, seed: u64 },
}

/// One evaluated window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowRecord {
    pub center: Vec<f64>,
    pub outer: f64,
    pub inner: f64,
    pub count: usize,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowEstimate {
    pub value: f64,
    /// Every evaluated window, grouped by scale pair in the order given.
    pub windows: Vec<WindowRecord>,
    /// Scale pairs `(R, r)` that passed the admissibility rules.
    pub admissible_pairs: Vec<(f64, f64)>,
}

/// All pairs `(base^-k, base^-j)` with `coarsest ≤ k < j ≤ finest`.
pub fn grid_scale_pairs(base: u32, coarsest: i32, finest: i32) -> Vec<(f64, f64)> {
    let b = base as f64;
    let mut pairs = Vec::new();
    for k in coarsest..=finest {
        for j in k + 1..=finest {
            pairs.push((b.powi(-k), b.powi(-j)));
        }
    }
    pairs
}

/// Integer `R/r` if the pair is admissible.
fn window_factor(
    cloud: &PointCloud,
    outer: f64,
    inner: f64,
    guard: f64,
    cap_outer: Option<f64>,
) -> Option<u64> {
    if check_guard(cloud, inner, guard).is_err() || !(outer > inner) {
        return None;
    }
    let q = outer / inner;
    let m = q.round();
    if (q - m).abs() > 1e-9 * q || (m as u64) < MIN_WINDOW_RATIO {
        return None;
    }
    if let Some(cap) = cap_outer {
        if outer > cap * (1.0 + 1e-12) {
            return None;
        }
    }
    Some(m as u64)
}

/// Distinct inner cells per window, and the window of each point.
struct WindowTable {
    counts: HashMap<Vec<i64>, (usize, usize)>,
    point_window: Vec<Vec<i64>>,
}

fn window_table(cloud: &PointCloud, inner: f64, factor: u64) -> WindowTable {
    let m = factor as i64;
    let mut keyed: Vec<(Vec<i64>, Vec<i64>, usize)> = Vec::with_capacity(cloud.len());
    let mut point_window = Vec::with_capacity(cloud.len());
    for (i, p) in cloud.points().enumerate() {
        let cell: Vec<i64> = p.iter().map(|&x| cell_index(x, inner)).collect();
        let window: Vec<i64> = cell.iter().map(|c| c.div_euclid(m)).collect();
        point_window.push(window.clone());
        keyed.push((window, cell, i));
    }
    keyed.sort_unstable();
    let mut counts: HashMap<Vec<i64>, (usize, usize)> = HashMap::new();
    let mut prev: Option<(&Vec<i64>, &Vec<i64>)> = None;
    for (w, c, i) in &keyed {
        let new_cell = prev.is_none_or(|(pw, pc)| pw != w || pc != c);
        let entry = counts.entry(w.clone()).or_insert((0, *i));
        if new_cell {
            entry.0 += 1;
        }
        prev = Some((w, c));
    }
    WindowTable {
        counts,
        point_window,
    }
}

fn first_point_order(cloud: &PointCloud, a: usize, b: usize) -> std::cmp::Ordering {
    cloud
        .point(a)
        .partial_cmp(cloud.point(b))
        .unwrap_or(std::cmp::Ordering::Equal)
}

fn windows_for_pair(
    cloud: &PointCloud,
    outer: f64,
    inner: f64,
    factor: u64,
    centers: Centers,
) -> Vec<WindowRecord> {
    let table = window_table(cloud, inner, factor);
    let log_ratio = (factor as f64).ln();
    let record = |point: usize, count: usize| WindowRecord {
        center: cloud.point(point).to_vec(),
        outer,
        inner,
        count,
        slope: (count as f64).ln() / log_ratio,
    };
    match centers {
        Centers::All => {
            // first point of each window in coordinate order, windows sorted by key
            let mut reps: HashMap<&Vec<i64>, usize> = HashMap::new();
            for (i, w) in table.point_window.iter().enumerate() {
                reps.entry(w)
                    .and_modify(|r| {
                        if first_point_order(cloud, i, *r).is_lt() {
                            *r = i
                        }
                    })
                    .or_insert(i);
            }
            let mut keys: Vec<&Vec<i64>> = reps.keys().copied().collect();
            keys.sort_unstable();
            keys.into_iter()
                .map(|k| record(reps[k], table.counts[k].0))
                .collect()
        }
        Centers::Sampled { count, seed } => (0..count as u64)
            .into_par_iter()
            .map(|i| {
                let p = Stream::new(derive_seed(seed, i)).index(cloud.len());
                record(p, table.counts[&table.point_window[p]].0)
            })
            .collect(),
    }
}

fn estimate(
    cloud: &PointCloud,
    pairs: &[(f64, f64)],
    centers: Centers,
    guard: f64,
    cap_outer: Option<f64>,
    pick: fn(f64, f64) -> f64,
    start: f64,
) -> Result<WindowEstimate> {
    let admissible: Vec<(f64, f64, u64)> = pairs
        .iter()
        .filter_map(|&(o, i)| window_factor(cloud, o, i, guard, cap_outer).map(|m| (o, i, m)))
        .collect();
    if admissible.is_empty() {
        return Err(Error::Resolution(format!(
            "no admissible scale pair: need r ≥ {guard}·ε = {:e} and integer R/r ≥ {MIN_WINDOW_RATIO}{}",
            guard * cloud.epsilon(),
            if cap_outer.is_some() { " with R at most the cloud extent" } else { "" }
        )));
    }
    let windows: Vec<WindowRecord> = admissible
        .par_iter()
        .map(|&(o, i, m)| windows_for_pair(cloud, o, i, m, centers))
        .collect::<Vec<_>>()
        .concat();
    let value = windows.iter().map(|w| w.slope).fold(start, pick);
    Ok(WindowEstimate {
        value,
        windows,
        admissible_pairs: admissible.iter().map(|&(o, i, _)| (o, i)).collect(),
    })
}

/// `max log N_r(window) / log(R/r)` over the evaluated windows.
pub fn assouad_estimate(
    cloud: &PointCloud,
    pairs: &[(f64, f64)],
    centers: Centers,
    guard: f64,
) -> Result<WindowEstimate> {
    estimate(
        cloud,
        pairs,
        centers,
        guard,
        None,
        f64::max,
        f64::NEG_INFINITY,
    )
}

/// `min log N_r(window) / log(R/r)` over the evaluated windows, with `R`
/// bounded by the cloud extent. Single-cell windows contribute 0.
pub fn lower_estimate(
    cloud: &PointCloud,
    pairs: &[(f64, f64)],
    centers: Centers,
    guard: f64,
) -> Result<WindowEstimate> {
    estimate(
        cloud,
        pairs,
        centers,
        guard,
        Some(cloud.extent()),
        f64::min,
        f64::INFINITY,
    )
}
