use serde::Serialize;

use crate::error::{Error, Result};
use crate::galton_watson::OffspringDistribution;
use crate::similarity::Ifs;

/// A root of a strictly decreasing function together with its residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Root {
    pub value: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Root of a strictly decreasing `g` with `g(0) ≥ 0` and `g → −1` at infinity.
/// The upper end of the bracket doubles from 1 until `g` turns negative, then
/// the bracket is halved until its ends are adjacent floats.
pub fn bisect_decreasing(g: impl Fn(f64) -> f64) -> Root {
    let at_zero = g(0.0);
    if at_zero <= 0.0 {
        return Root {
            value: 0.0,
            residual: at_zero.abs(),
            iterations: 0,
        };
    }
    let mut hi = 1.0;
    let mut iterations = 0;
    while g(hi) > 0.0 {
        hi *= 2.0;
        iterations += 1;
        if hi > 1e300 {
            break;
        }
    }
    let mut lo = 0.0;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (gl, gh) = (g(lo), g(hi));
    let (value, residual) = if gl.abs() <= gh.abs() {
        (lo, gl.abs())
    } else {
        (hi, gh.abs())
    };
    Root {
        value,
        residual,
        iterations,
    }
}

fn check_ratios(ratios: &[f64]) -> Result<()> {
    if ratios.is_empty() {
        return Err(Error::Domain(
            "the Moran equation needs at least one ratio".into(),
        ));
    }
    if let Some(r) = ratios.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
        return Err(Error::Domain(format!("ratio {r} is outside (0, 1)")));
    }
    Ok(())
}

/// The unique `s ≥ 0` with `Σ r_i^s = 1`.
pub fn moran_dimension(ratios: &[f64]) -> Result<f64> {
    Ok(moran_root(ratios)?.value)
}

pub fn moran_root(ratios: &[f64]) -> Result<Root> {
    check_ratios(ratios)?;
    Ok(bisect_decreasing(|s| {
        ratios.iter().map(|r| r.powf(s)).sum::<f64>() - 1.0
    }))
}

/// Weighted Moran equation `Σ w_i r_i^s = 1` for weights with `Σ w_i ≥ 1`.
pub(crate) fn weighted_root(weights: &[f64], ratios: &[f64]) -> Root {
    bisect_decreasing(|s| {
        weights
            .iter()
            .zip(ratios)
            .filter(|(w, _)| **w > 0.0)
            .map(|(w, r)| w * r.powf(s))
            .sum::<f64>()
            - 1.0
    })
}

/// Offspring means within this distance of 1 are treated as critical.
const CRITICAL_TOLERANCE: f64 = 1e-12;

/// The almost sure dimension `δ` of the Galton-Watson fractal:
/// the root of `E(Σ_{i∈W} r_i^δ) = Σ_i P[i ∈ W] r_i^δ = 1`.
///
/// Subcritical laws are a domain error. A critical law (`E|W| = 1`) gives 0,
/// the limit of the supercritical values; it is the endpoint of the
/// interpolation in [`super::offspring_for_target`].
/// The value is the Hausdorff dimension under the open set condition; without
/// it the root is only an upper bound.
pub fn gwf_dimension(ifs: &Ifs, w: &OffspringDistribution) -> Result<f64> {
    Ok(gwf_root(ifs, w)?.value)
}

pub fn gwf_root(ifs: &Ifs, w: &OffspringDistribution) -> Result<Root> {
    if w.alphabet() != ifs.len() {
        return Err(Error::DimensionMismatch {
            expected: ifs.len(),
            got: w.alphabet(),
        });
    }
    let mean = w.mean();
    if mean < 1.0 - CRITICAL_TOLERANCE {
        return Err(Error::Domain(format!(
            "offspring law is subcritical: E|W| = {mean} < 1"
        )));
    }
    if mean <= 1.0 + CRITICAL_TOLERANCE {
        return Ok(Root {
            value: 0.0,
            residual: (mean - 1.0).abs(),
            iterations: 0,
        });
    }
    Ok(weighted_root(&w.marginals(), &ifs.ratios()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::Subset;

    #[test]
    fn cantor_and_golden() {
        let s = moran_dimension(&[1.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!((s - 2f64.ln() / 3f64.ln()).abs() < 1e-12);
        // u = 2^{-s} solves u + u^2 = 1
        let u = (5f64.sqrt() - 1.0) / 2.0;
        let s = moran_dimension(&[0.5, 0.25]).unwrap();
        assert!((s + u.log2()).abs() < 1e-12);
        assert_eq!(moran_dimension(&[0.4]).unwrap(), 0.0);
        assert!(moran_dimension(&[]).is_err());
        assert!(moran_dimension(&[1.0]).is_err());
    }

    #[test]
    fn residual_is_tiny() {
        let r = moran_root(&[0.1, 0.2, 0.3, 0.05]).unwrap();
        assert!(r.residual < 1e-12);
    }

    #[test]
    fn gwf_closed_forms() {
        let perc = Ifs::percolation(2, 2).unwrap();
        let w = OffspringDistribution::binomial(4, 0.7).unwrap();
        assert!((gwf_dimension(&perc, &w).unwrap() - 2.8f64.log2()).abs() < 1e-12);
        let cantor = Ifs::cantor();
        let mixed = OffspringDistribution::uniform(2, &[Subset(1), Subset(3)]).unwrap();
        let want = 1.5f64.ln() / 3f64.ln();
        assert!((gwf_dimension(&cantor, &mixed).unwrap() - want).abs() < 1e-12);
        let full = OffspringDistribution::deterministic(2, Subset(3)).unwrap();
        assert_eq!(
            gwf_dimension(&cantor, &full).unwrap(),
            moran_dimension(&cantor.ratios()).unwrap()
        );
        let sub = OffspringDistribution::binomial(4, 0.2).unwrap();
        assert!(matches!(gwf_dimension(&perc, &sub), Err(Error::Domain(_))));
    }
}
