//! Spectra of Gram compressions: eigenvalues, norm lower bounds, complement
//! spectra and truncation sweeps.

mod jacobi;

pub use jacobi::{hermitian_eigenvalues, MAX_SWEEPS, OFF_DIAGONAL_TOL};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{AmbientDomain, MoebiusMap, SubregionSpec};
use crate::moments::{gram, GramMatrix, MomentMethod, MomentRequest};

/// Default truncation orders for sweeps.
pub const DEFAULT_SWEEP: [usize; 4] = [16, 32, 64, 128];

/// One row of a truncation sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub order: usize,
    pub top: f64,
    pub bottom: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumEstimate {
    pub order: usize,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    pub gram_error: f64,
    pub solver_residual: f64,
    pub history: Option<Vec<SweepPoint>>,
}

impl SpectrumEstimate {
    pub fn top(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn bottom(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Slack allowed around `[0, 1]`.
    pub fn tolerance(&self) -> f64 {
        self.gram_error + self.solver_residual + 1e-12
    }
}

/// Full spectrum of a Gram compression.
pub fn eigensolve(g: &GramMatrix) -> Result<SpectrumEstimate> {
    let defect = g.hermitian_defect();
    if defect > 1e-10 {
        return Err(Error::invalid(format!("Gram matrix is not Hermitian (defect {defect:e})")));
    }
    let (eigenvalues, solver_residual) = hermitian_eigenvalues(&g.entries, g.dim())?;
    Ok(SpectrumEstimate {
        order: g.order,
        eigenvalues,
        gram_error: g.error_estimate,
        solver_residual,
        history: None,
    })
}

fn spectrum(ambient: &AmbientDomain, region: &SubregionSpec, order: usize) -> Result<SpectrumEstimate> {
    eigensolve(&gram(&MomentRequest::new(ambient.clone(), region.clone(), order))?)
}

/// Spectra at each order, solved concurrently; the last one carries the
/// history of the whole sweep.
pub fn sweep(ambient: &AmbientDomain, region: &SubregionSpec, orders: &[usize]) -> Result<Vec<SpectrumEstimate>> {
    sweep_with(ambient, region, orders, &MomentMethod::Auto)
}

/// [`sweep`] with an explicit moment method.
pub fn sweep_with(
    ambient: &AmbientDomain,
    region: &SubregionSpec,
    orders: &[usize],
    method: &MomentMethod,
) -> Result<Vec<SpectrumEstimate>> {
    if orders.is_empty() {
        return Err(Error::invalid("sweep needs at least one order"));
    }
    if orders.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("sweep orders must be strictly increasing"));
    }
    let mut out = orders
        .par_iter()
        .map(|&n| {
            let request = MomentRequest::new(ambient.clone(), region.clone(), n).with_method(*method);
            eigensolve(&gram(&request)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let history: Vec<SweepPoint> = out
        .iter()
        .map(|s| SweepPoint {
            order: s.order,
            top: s.top(),
            bottom: s.bottom(),
        })
        .collect();
    if let Some(last) = out.last_mut() {
        last.history = Some(history);
    }
    Ok(out)
}

/// Lower bound for `‖T_U‖` from a truncation sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormEstimate {
    /// Largest compression eigenvalue over the sweep.
    pub lower: f64,
    /// `sqrt(lower)`, a lower bound for `‖R_U‖`.
    pub restriction_lower: f64,
    /// Tolerance to which `lower` is certified.
    pub tolerance: f64,
    pub history: Vec<SweepPoint>,
    /// Differences of the top eigenvalue between successive orders.
    pub successive_differences: Vec<f64>,
}

pub fn norm_estimate(ambient: &AmbientDomain, region: &SubregionSpec, orders: &[usize]) -> Result<NormEstimate> {
    Ok(norm_from_sweep(&sweep(ambient, region, orders)?))
}

/// [`NormEstimate`] from spectra already computed by [`sweep`].
pub fn norm_from_sweep(spectra: &[SpectrumEstimate]) -> NormEstimate {
    let history: Vec<SweepPoint> = spectra
        .last()
        .and_then(|s| s.history.clone())
        .unwrap_or_else(|| {
            spectra
                .iter()
                .map(|s| SweepPoint {
                    order: s.order,
                    top: s.top(),
                    bottom: s.bottom(),
                })
                .collect()
        });
    let (lower, tolerance) = spectra
        .iter()
        .map(|s| (s.top(), s.tolerance()))
        .fold((0.0, 0.0), |acc, x| if x.0 > acc.0 { x } else { acc });
    let successive_differences = history.windows(2).map(|w| w[1].top - w[0].top).collect();
    NormEstimate {
        lower,
        restriction_lower: lower.max(0.0).sqrt(),
        tolerance,
        history,
        successive_differences,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapReport {
    /// Smallest eigenvalue of the complement's compression.
    pub min_eig_complement: f64,
    /// `1 −` top eigenvalue of the region's compression.
    pub closed_range_indicator: f64,
    pub tolerance: f64,
}

/// Both sides of the complement duality at one order. A positive indicator
/// is evidence of closed range for the complement, not a proof.
pub fn spectral_gap_report(ambient: &AmbientDomain, region: &SubregionSpec, order: usize) -> Result<GapReport> {
    let inner = spectrum(ambient, region, order)?;
    let outer = spectrum(ambient, &SubregionSpec::complement(region.clone()), order)?;
    Ok(GapReport {
        min_eig_complement: outer.bottom(),
        closed_range_indicator: 1.0 - inner.top(),
        tolerance: inner.tolerance() + outer.tolerance(),
    })
}

/// Image of a planar region under a disc automorphism, as a disc when
/// possible and as an indicator otherwise.
pub fn moebius_image(region: &SubregionSpec, map: &MoebiusMap) -> Result<SubregionSpec> {
    let ambient = AmbientDomain::UnitDisc;
    region.validate(&ambient)?;
    let disc = match region {
        SubregionSpec::DilatedCopy { rho } => Some((num_complex::Complex64::new(0.0, 0.0), *rho)),
        other => other.as_disc(),
    };
    if let Some((c, r)) = disc {
        let (c2, r2) = map.image_of_disc(c, r)?;
        return Ok(SubregionSpec::disc(c2, r2));
    }
    let src = region.clone();
    let map = *map;
    Ok(SubregionSpec::indicator(format!("moebius image of {}", region.kind_name()), move |z| {
        let w = map.apply_inverse(z[0]);
        w.norm() < 1.0 && src.contains_raw(&ambient, &[w], false)
    }))
}

/// Largest relative deviation among the top three eigenvalues of `U` and
/// its image under `map`, both compressed at `order`.
pub fn isospectrality_check(region: &SubregionSpec, map: &MoebiusMap, order: usize) -> Result<f64> {
    let ambient = AmbientDomain::UnitDisc;
    let image = moebius_image(region, map)?;
    let a = spectrum(&ambient, region, order)?;
    let b = spectrum(&ambient, &image, order)?;
    Ok(a.eigenvalues
        .iter()
        .zip(&b.eigenvalues)
        .take(3)
        .map(|(x, y)| if *x == 0.0 { y.abs() } else { (x - y).abs() / x.abs() })
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RadialInterval;
    use num_complex::Complex64;

    #[test]
    fn dilation_spectrum_at_order_eight() {
        let s = spectrum(&AmbientDomain::UnitDisc, &SubregionSpec::dilated(0.5), 8).unwrap();
        for (k, e) in s.eigenvalues.iter().enumerate() {
            assert_eq!(*e, 0.5f64.powi(2 * k as i32 + 2));
        }
        assert_eq!(s.solver_residual, 0.0);
    }

    #[test]
    fn dilation_norm_is_exact_at_every_order() {
        let est = norm_estimate(&AmbientDomain::UnitDisc, &SubregionSpec::dilated(0.7), &[1, 4, 9]).unwrap();
        assert!((est.lower - 0.49).abs() < 1e-15);
        assert!((est.restriction_lower - 0.7).abs() < 1e-15);
        assert_eq!(est.successive_differences, vec![0.0, 0.0]);
    }

    #[test]
    fn sweep_rejects_unsorted_orders() {
        assert!(sweep(&AmbientDomain::UnitDisc, &SubregionSpec::dilated(0.5), &[8, 4]).is_err());
    }

    #[test]
    fn bidisc_norm() {
        let amb = AmbientDomain::polydisc(vec![1.0, 1.0]);
        let region = SubregionSpec::product(vec![RadialInterval::new(0.0, 0.6), RadialInterval::new(0.4, 1.0)]);
        let est = norm_estimate(&amb, &region, &[6, 41]).unwrap();
        assert!((est.restriction_lower - 0.6).abs() < 1e-12);
    }

    #[test]
    fn gap_report_for_dilation() {
        let r = spectral_gap_report(&AmbientDomain::UnitDisc, &SubregionSpec::dilated(0.5), 12).unwrap();
        assert_eq!(r.closed_range_indicator, 0.75);
        assert!((r.min_eig_complement - 0.75).abs() < 1e-15);
    }

    #[test]
    fn complement_spectrum_is_reflected() {
        let amb = AmbientDomain::UnitDisc;
        let u = SubregionSpec::disc(Complex64::new(0.1, -0.3), 0.4);
        let a = spectrum(&amb, &u, 24).unwrap();
        let b = spectrum(&amb, &SubregionSpec::complement(u), 24).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(b.eigenvalues.iter().rev()) {
            assert!((x - (1.0 - y)).abs() < 1e-10);
        }
    }

    #[test]
    fn trivial_isospectrality() {
        let d = SubregionSpec::disc(Complex64::new(0.0, 0.0), 0.4);
        assert_eq!(isospectrality_check(&d, &MoebiusMap::identity(), 20).unwrap(), 0.0);
        assert!(isospectrality_check(&d, &MoebiusMap::rotation(0.9), 20).unwrap() <= 1e-12);
    }

    #[test]
    fn indicator_image_membership() {
        let map = MoebiusMap::new(Complex64::new(0.3, 0.1), 0.2).unwrap();
        let img = moebius_image(&SubregionSpec::ideal_triangle(), &map).unwrap();
        let amb = AmbientDomain::UnitDisc;
        let w = map.apply(Complex64::new(0.0, 0.0));
        assert!(img.contains(&amb, &[w]).unwrap());
    }
}
