//! Bergman kernels and exact monomial norms of the model domains.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{graded_lex, AmbientDomain, MultiIndex};

/// Truncated monomial basis `φ_α = z^α / ‖z^α‖_Ω`, `|α| < order`, in graded
/// lexicographic order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonomialBasis {
    #[serde(skip)]
    pub ambient: AmbientDomain,
    pub order: usize,
    pub index_list: Vec<MultiIndex>,
    /// `‖z^α‖_Ω` (not squared).
    pub norms: Vec<f64>,
}

impl MonomialBasis {
    pub fn new(ambient: &AmbientDomain, order: usize) -> Result<Self> {
        ambient.validate()?;
        if order == 0 {
            return Err(Error::invalid("truncation order must be >= 1"));
        }
        let index_list = graded_lex(ambient.dim(), order);
        let norms = index_list
            .iter()
            .map(|a| monomial_norm_sq(ambient, a).map(f64::sqrt))
            .collect::<Result<Vec<_>>>()?;
        Ok(MonomialBasis {
            ambient: ambient.clone(),
            order,
            index_list,
            norms,
        })
    }

    pub fn len(&self) -> usize {
        self.index_list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index_list.is_empty()
    }

    /// Values `φ_α(z)` for every basis element.
    pub fn evaluate(&self, z: &[Complex64]) -> Vec<Complex64> {
        self.index_list
            .iter()
            .zip(&self.norms)
            .map(|(a, n)| monomial(z, a) / *n)
            .collect()
    }
}

pub(crate) fn monomial(z: &[Complex64], alpha: &MultiIndex) -> Complex64 {
    z.iter()
        .zip(&alpha.0)
        .fold(Complex64::new(1.0, 0.0), |acc, (w, k)| acc * w.powu(*k))
}

fn ln_factorial(n: u64) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// `∫_Ω |z^α|² dV` in closed form.
pub fn monomial_norm_sq(ambient: &AmbientDomain, alpha: &MultiIndex) -> Result<f64> {
    ambient.validate()?;
    let n = ambient.dim();
    if alpha.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: alpha.dim(),
        });
    }
    let value = match ambient {
        AmbientDomain::UnitDisc => PI / (alpha.0[0] as f64 + 1.0),
        AmbientDomain::UnitBall { n } => {
            // π^n α! / (n + |α|)!
            if *n == 1 {
                // keep the disc case bit-identical to UnitDisc
                PI / (alpha.0[0] as f64 + 1.0)
            } else {
                let n = *n as u64;
                let deg = alpha.degree() as u64;
                let ln_alpha_fact: f64 = alpha.0.iter().map(|k| ln_factorial(*k as u64)).sum();
                (n as f64 * PI.ln() + ln_alpha_fact - ln_factorial(n + deg)).exp()
            }
        }
        AmbientDomain::Polydisc { radii } => alpha
            .0
            .iter()
            .zip(radii)
            .map(|(k, r)| PI * r.powi(2 * *k as i32 + 2) / (*k as f64 + 1.0))
            .product(),
    };
    Ok(value)
}

/// Diagonal `B_Ω(z, z)` of the Bergman kernel.
pub fn bergman_kernel_diag(ambient: &AmbientDomain, z: &[Complex64]) -> Result<f64> {
    ambient.check_point(z)?;
    ambient.validate()?;
    if !ambient.contains_unchecked(z) {
        return Err(Error::domain("Bergman kernel diverges on and outside the boundary"));
    }
    Ok(kernel_diag_unchecked(ambient, z))
}

pub(crate) fn kernel_diag_unchecked(ambient: &AmbientDomain, z: &[Complex64]) -> f64 {
    match ambient {
        AmbientDomain::UnitDisc => disc_kernel(z[0].norm_sqr(), 1.0),
        AmbientDomain::UnitBall { n } => {
            let s: f64 = z.iter().map(|w| w.norm_sqr()).sum();
            let n = *n;
            let fact: f64 = (1..=n).map(|k| k as f64).product();
            fact / PI.powi(n as i32) / (1.0 - s).powi(n as i32 + 1)
        }
        AmbientDomain::Polydisc { radii } => z
            .iter()
            .zip(radii)
            .map(|(w, r)| disc_kernel(w.norm_sqr(), *r))
            .product(),
    }
}

/// `1 / (π R² (1 − |z|²/R²)²)`, the kernel diagonal of the disc of radius `R`.
fn disc_kernel(abs_sq: f64, r: f64) -> f64 {
    let t = 1.0 - abs_sq / (r * r);
    1.0 / (PI * r * r * t * t)
}

/// Truncated basis sum `Σ_{|α|<order} |z^α|² / ‖z^α‖²`.
pub fn kernel_partial_sum(ambient: &AmbientDomain, z: &[Complex64], order: usize) -> Result<f64> {
    ambient.check_point(z)?;
    let basis = MonomialBasis::new(ambient, order)?;
    Ok(basis.evaluate(z).iter().map(|v| v.norm_sqr()).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn disc_norms() {
        let d = AmbientDomain::UnitDisc;
        assert_eq!(monomial_norm_sq(&d, &MultiIndex(vec![0])).unwrap(), PI);
        assert!((monomial_norm_sq(&d, &MultiIndex(vec![3])).unwrap() - PI / 4.0).abs() < 1e-15);
        assert!(monomial_norm_sq(&d, &MultiIndex(vec![0, 1])).is_err());
    }

    #[test]
    fn ball_norm_at_origin_is_volume() {
        let v = monomial_norm_sq(&AmbientDomain::ball(2), &MultiIndex(vec![0, 0])).unwrap();
        assert!((v - PI * PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn one_ball_is_bitwise_the_disc() {
        for k in 0..20 {
            let a = MultiIndex(vec![k]);
            assert_eq!(
                monomial_norm_sq(&AmbientDomain::UnitDisc, &a).unwrap(),
                monomial_norm_sq(&AmbientDomain::ball(1), &a).unwrap()
            );
        }
        let z = [c(0.3, 0.4)];
        assert_eq!(
            bergman_kernel_diag(&AmbientDomain::UnitDisc, &z).unwrap(),
            bergman_kernel_diag(&AmbientDomain::ball(1), &z).unwrap()
        );
    }

    #[test]
    fn kernel_examples() {
        let d = AmbientDomain::UnitDisc;
        assert!((bergman_kernel_diag(&d, &[c(0.0, 0.0)]).unwrap() - 1.0 / PI).abs() < 1e-16);
        let k = bergman_kernel_diag(&d, &[c(0.5, 0.0)]).unwrap();
        assert!((k - 1.0 / (PI * 0.75 * 0.75)).abs() < 1e-15);
        let b = bergman_kernel_diag(&AmbientDomain::ball(2), &[c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((b - 2.0 / (PI * PI)).abs() < 1e-15);
        assert!(bergman_kernel_diag(&d, &[c(1.0, 0.0)]).is_err());
        assert!(bergman_kernel_diag(&d, &[c(0.0, 0.0), c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn center_kernel_is_inverse_volume() {
        for amb in [
            AmbientDomain::UnitDisc,
            AmbientDomain::ball(2),
            AmbientDomain::ball(3),
            AmbientDomain::polydisc(vec![1.0, 0.5]),
        ] {
            let n = amb.dim();
            let zero = vec![c(0.0, 0.0); n];
            let vol = monomial_norm_sq(&amb, &MultiIndex(vec![0; n])).unwrap();
            let k = bergman_kernel_diag(&amb, &zero).unwrap();
            assert!((k * vol - 1.0).abs() < 1e-13, "{amb:?}");
        }
    }

    #[test]
    fn partial_sums_are_monotone() {
        let z = [c(0.6, -0.2)];
        let mut prev = 0.0;
        for order in [1, 5, 20, 80] {
            let s = kernel_partial_sum(&AmbientDomain::UnitDisc, &z, order).unwrap();
            assert!(s > prev);
            prev = s;
        }
    }
}
