//! Closed-form and semi-closed-form spectral results used as ground truth.

mod search;
mod multipliers;

pub use search::{golden_section_max, grid_then_golden, Maximum};
pub use multipliers::{
    gamma_strip, gamma_wedge, horostrip_critical_point, horostrip_endpoint, horostrip_interval,
    horostrip_numeric_sup, lune_norm, lune_sup,
};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum OracleKind {
    /// `λ_k = first · ratio^k`.
    EigenvalueSequence { first: f64, ratio: f64 },
    Interval { lo: f64, hi: f64 },
    NormBounds { lower: f64, upper: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    #[serde(flatten)]
    pub kind: OracleKind,
    pub provenance: String,
}

impl OracleResult {
    /// `λ_k` for an eigenvalue sequence.
    pub fn eigenvalue(&self, k: usize) -> Option<f64> {
        match self.kind {
            OracleKind::EigenvalueSequence { first, ratio } => Some(first * ratio.powi(k as i32)),
            _ => None,
        }
    }

    /// First `count` eigenvalues of a sequence.
    pub fn eigenvalues(&self, count: usize) -> Vec<f64> {
        (0..count).filter_map(|k| self.eigenvalue(k)).collect()
    }

    /// Interval endpoints, or `(0, λ_0)` for a sequence.
    pub fn bounds(&self) -> (f64, f64) {
        match self.kind {
            OracleKind::EigenvalueSequence { first, .. } => (0.0, first),
            OracleKind::Interval { lo, hi } => (lo, hi),
            OracleKind::NormBounds { lower, upper } => (lower, upper),
        }
    }
}

fn open_unit(x: f64, name: &str) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must lie in (0, 1), got {x}")))
    }
}

/// `ρ^{2(|α|+n)}` indexed by the degree `|α|`; `‖R_U‖ = ρ^n`.
pub fn dilation_spectrum(n: usize, rho: f64) -> Result<OracleResult> {
    open_unit(rho, "rho")?;
    if n == 0 {
        return Err(Error::invalid("dimension must be >= 1"));
    }
    Ok(OracleResult {
        kind: OracleKind::EigenvalueSequence {
            first: rho.powi(2 * n as i32),
            ratio: rho * rho,
        },
        provenance: "closed form: dilated copy, eigenvalue per degree".into(),
    })
}

/// Norm of the restriction to a dilated copy, `ρ^n`.
pub fn dilation_restriction_norm(n: usize, rho: f64) -> Result<f64> {
    open_unit(rho, "rho")?;
    Ok(rho.powi(n as i32))
}

/// The constant `A` of a compactly contained disc `D(z0, r)`.
pub fn offcenter_disc_constant(z0: Complex64, r: f64) -> Result<f64> {
    let c = z0.norm();
    if !(r > 0.0) || !z0.is_finite() {
        return Err(Error::invalid("disc radius must be positive"));
    }
    if c + r >= 1.0 {
        return Err(Error::domain("disc must be compactly contained in the unit disc"));
    }
    Ok((((1.0 + c + r) * (1.0 - c + r)) / ((1.0 - c - r) * (1.0 + c - r))).sqrt())
}

/// `λ_k = ((A − 1)/(A + 1))^{2k+2}` for `D(z0, r)`.
pub fn offcenter_disc_spectrum(z0: Complex64, r: f64) -> Result<OracleResult> {
    let a = offcenter_disc_constant(z0, r)?;
    let q = (a - 1.0) / (a + 1.0);
    Ok(OracleResult {
        kind: OracleKind::EigenvalueSequence {
            first: q * q,
            ratio: q * q,
        },
        provenance: "closed form: off-center subdisc".into(),
    })
}

/// `(r/R)^n ≤ ‖R_U‖ ≤ (δ/R)^{(n−1)/2}` for a ball `U` of radius `r` inside
/// the ball of radius `R`, with `δ` the distance-type parameter.
pub fn ball_bounds(n: usize, big_r: f64, r: f64, delta: f64) -> Result<OracleResult> {
    if n == 0 {
        return Err(Error::invalid("dimension must be >= 1"));
    }
    if !(0.0 < r && r <= delta && delta <= big_r && big_r.is_finite()) {
        return Err(Error::invalid("ball bounds need 0 < r <= delta <= R"));
    }
    let lower = (r / big_r).powi(n as i32);
    let upper = if n == 1 {
        1.0
    } else {
        (delta / big_r).powf((n as f64 - 1.0) / 2.0)
    };
    Ok(OracleResult {
        kind: OracleKind::NormBounds { lower, upper },
        provenance: "norm bounds: subball of a ball".into(),
    })
}

/// `((r² − |z − δ|²)/(1 − |z − 1|²))^{(n−1)/2}` in tangent-normalized
/// coordinates.
pub fn slice_norm(n: usize, r: f64, delta: f64, z: Complex64) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("dimension must be >= 1"));
    }
    if !(0.0 < r && r <= delta && delta <= 1.0) {
        return Err(Error::invalid("slice norm needs 0 < r <= delta <= 1"));
    }
    let d2 = (z - delta).norm_sqr();
    if !(d2 < r * r) {
        return Err(Error::domain(format!("{z} lies outside the projected disc")));
    }
    let ratio = (r * r - d2) / (1.0 - (z - 1.0).norm_sqr());
    Ok(ratio.powf((n as f64 - 1.0) / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dilation_examples() {
        assert_eq!(dilation_spectrum(1, 0.5).unwrap().eigenvalue(0), Some(0.25));
        assert_eq!(dilation_spectrum(2, 0.5).unwrap().eigenvalue(0), Some(0.0625));
        assert!(dilation_spectrum(1, 1.0 - 1e-12).unwrap().eigenvalue(0).unwrap() > 1.0 - 1e-11);
        assert_eq!(dilation_restriction_norm(3, 0.5).unwrap(), 0.125);
    }

    #[test]
    fn centered_disc_reduces_to_dilation() {
        for rho in [0.1, 0.45, 0.9] {
            let a = offcenter_disc_spectrum(Complex64::new(0.0, 0.0), rho).unwrap();
            let b = dilation_spectrum(1, rho).unwrap();
            for k in 0..20 {
                let (x, y) = (a.eigenvalue(k).unwrap(), b.eigenvalue(k).unwrap());
                assert!((x - y).abs() < 1e-14, "{rho} {k}");
            }
        }
    }

    #[test]
    fn offcenter_constant() {
        let a = offcenter_disc_constant(Complex64::new(0.3, 0.0), 0.2).unwrap();
        assert!((a - (1.35f64 / 0.55).sqrt()).abs() < 1e-15);
        assert!(offcenter_disc_spectrum(Complex64::new(0.5, 0.0), 0.5).is_err());
        let tiny = offcenter_disc_spectrum(Complex64::new(0.3, 0.0), 1e-6).unwrap();
        assert!(tiny.eigenvalue(0).unwrap() < 1e-11);
    }

    #[test]
    fn ball_bound_examples() {
        let b = ball_bounds(2, 1.0, 0.5, 0.5).unwrap();
        assert_eq!(b.kind, OracleKind::NormBounds { lower: 0.25, upper: 0.5f64.sqrt() });
        assert_eq!(ball_bounds(1, 1.0, 0.3, 0.6).unwrap().bounds().1, 1.0);
        assert!(ball_bounds(2, 1.0, 0.6, 0.5).is_err());
    }

    #[test]
    fn slice_norm_examples() {
        let (r, d) = (0.3, 0.5);
        let at_center = slice_norm(3, r, d, Complex64::new(d, 0.0)).unwrap();
        assert!((at_center - r * r / (1.0 - 0.25)).abs() < 1e-15);
        assert_eq!(slice_norm(1, r, d, Complex64::new(0.6, 0.1)).unwrap(), 1.0);
        assert!(slice_norm(2, r, d, Complex64::new(0.9, 0.0)).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let z = Complex64::from_polar(r * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..6.3)) + d;
            assert!(slice_norm(2, r, d, z).unwrap() <= d.sqrt() + 1e-12);
        }
    }

    #[test]
    fn json_shape() {
        let v = serde_json::to_value(horostrip_interval(0.25, 0.5).unwrap()).unwrap();
        assert_eq!(v["kind"], "Interval");
        assert_eq!(v["lo"], 0.0);
        assert!(v["provenance"].is_string());
    }
}
