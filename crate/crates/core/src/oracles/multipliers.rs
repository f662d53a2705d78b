//! Multiplier functions for indicator symbols of horizontal strips and
//! wedges in the upper half-plane, and the suprema that bound their ranges.

use std::f64::consts::PI;

use super::search::{grid_then_golden, Maximum};
use super::{OracleKind, OracleResult};
use crate::error::{Error, Result};

/// Multiplier of the strip `a_lo < Im w < a_hi` (`a_hi` may be infinite):
/// `e^{−2x a_lo} − e^{−2x a_hi}`.
pub fn gamma_strip(a_lo: f64, a_hi: f64, x: f64) -> Result<f64> {
    if !(a_lo > 0.0 && a_hi > a_lo && x > 0.0) || a_lo.is_nan() || !x.is_finite() {
        return Err(Error::invalid("gamma_strip needs 0 < a_lo < a_hi and x > 0"));
    }
    Ok((-2.0 * x * a_lo).exp() * -(-2.0 * x * (a_hi - a_lo)).exp_m1())
}

fn strip_ratio(rho1: f64, rho2: f64) -> Result<f64> {
    if !(0.0 < rho1 && rho1 < rho2 && rho2 < 1.0) {
        return Err(Error::invalid("horocyclic strip needs 0 < rho1 < rho2 < 1"));
    }
    Ok((1.0 / rho1 - 1.0) / (1.0 / rho2 - 1.0))
}

/// Maximizer `ln α / (2(α − 1))` of `gamma_strip(1, α, ·)`.
pub fn horostrip_critical_point(rho1: f64, rho2: f64) -> Result<f64> {
    let alpha = strip_ratio(rho1, rho2)?;
    Ok(alpha.ln() / (2.0 * (alpha - 1.0)))
}

/// Closed-form upper endpoint `α^{−1/(α−1)} − α^{−α/(α−1)}`.
pub fn horostrip_endpoint(rho1: f64, rho2: f64) -> Result<f64> {
    let alpha = strip_ratio(rho1, rho2)?;
    Ok(alpha.powf(-1.0 / (alpha - 1.0)) - alpha.powf(-alpha / (alpha - 1.0)))
}

/// Numeric supremum of `gamma_strip(1, α, x)` over `x > 0` by a grid in
/// `ln x` followed by golden section.
pub fn horostrip_numeric_sup(rho1: f64, rho2: f64) -> Result<Maximum> {
    let alpha = strip_ratio(rho1, rho2)?;
    let f = |u: f64| gamma_strip(1.0, alpha, u.exp()).unwrap_or(0.0);
    let m = grid_then_golden(f, -30.0, 10.0, 0.05, 1e-12);
    Ok(Maximum {
        argmax: m.argmax.exp(),
        ..m
    })
}

/// Spectrum `[0, hi]` of the Toeplitz operator of a horocyclic strip. The
/// closed form is cross-checked against the numeric supremum.
pub fn horostrip_interval(rho1: f64, rho2: f64) -> Result<OracleResult> {
    let hi = horostrip_endpoint(rho1, rho2)?;
    let numeric = horostrip_numeric_sup(rho1, rho2)?.value;
    let difference = (hi - numeric).abs();
    if difference > 1e-10 {
        return Err(Error::CrossCheck {
            what: "horocyclic strip endpoint vs golden-section supremum".into(),
            difference,
        });
    }
    Ok(OracleResult {
        kind: OracleKind::Interval { lo: 0.0, hi },
        provenance: "closed form: horocyclic strip, supremum of the strip multiplier".into(),
    })
}

/// Multiplier `(ξ^b − ξ^a)/(ξ − 1)`, `ξ = e^{−2πλ}`, of the wedge with
/// normalized angles `a < b`; evaluated in log space.
pub fn gamma_wedge(a: f64, b: f64, lambda: f64) -> Result<f64> {
    check_wedge(a, b)?;
    Ok(wedge_in_log(a, b, -2.0 * PI * lambda))
}

fn check_wedge(a: f64, b: f64) -> Result<()> {
    if !(0.0 <= a && a < b && b <= 1.0) {
        return Err(Error::invalid("wedge angles need 0 <= a < b <= 1"));
    }
    Ok(())
}

/// `(e^{bt} − e^{at})/(e^t − 1)`.
fn wedge_in_log(a: f64, b: f64, t: f64) -> f64 {
    if t.abs() < 1e-8 {
        (b - a) * (1.0 + 0.5 * t * (a + b - 1.0))
    } else if t > 0.0 {
        ((b - 1.0) * t).exp() * -((a - b) * t).exp_m1() / -(-t).exp_m1()
    } else {
        (a * t).exp() * ((b - a) * t).exp_m1() / t.exp_m1()
    }
}

/// Supremum of the wedge multiplier over `ξ ∈ (0, ∞)`: grid on
/// `log10 ξ ∈ [−40, 40]` with step 0.01, then golden section to 1e-12.
pub fn lune_sup(a: f64, b: f64) -> Result<Maximum> {
    check_wedge(a, b)?;
    let ln10 = std::f64::consts::LN_10;
    Ok(grid_then_golden(|u| wedge_in_log(a, b, u * ln10), -40.0, 40.0, 0.01, 1e-12))
}

/// Spectrum `[0, c]` of the Toeplitz operator of a lune with normalized
/// wedge angles `a < b`; crescents give `[0, 1]`.
pub fn lune_norm(a: f64, b: f64) -> Result<OracleResult> {
    let m = lune_sup(a, b)?;
    let crescent = a == 0.0 || b == 1.0;
    if crescent {
        let difference = 1.0 - m.grid_value;
        if difference > 1e-3 {
            return Err(Error::CrossCheck {
                what: "crescent multiplier does not approach 1 on the grid".into(),
                difference,
            });
        }
        return Ok(OracleResult {
            kind: OracleKind::Interval { lo: 0.0, hi: 1.0 },
            provenance: "crescent: full interval".into(),
        });
    }
    Ok(OracleResult {
        kind: OracleKind::Interval { lo: 0.0, hi: m.value },
        provenance: "numeric supremum of the wedge multiplier".into(),
    })
}
