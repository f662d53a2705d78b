//! Conformal maps of the unit disc: automorphisms, the Cayley transform, and
//! the geodesic circles bounding ideal polygons.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Disc automorphism `z ↦ e^{iθ} (z − a) / (1 − ā z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoebiusMap {
    pub a: Complex64,
    pub phase: f64,
}

impl MoebiusMap {
    pub fn new(a: Complex64, phase: f64) -> Result<Self> {
        if !(a.norm() < 1.0) || !phase.is_finite() {
            return Err(Error::invalid("Moebius parameter must satisfy |a| < 1"));
        }
        Ok(MoebiusMap { a, phase })
    }

    pub fn identity() -> Self {
        MoebiusMap {
            a: Complex64::new(0.0, 0.0),
            phase: 0.0,
        }
    }

    pub fn rotation(phase: f64) -> Self {
        MoebiusMap {
            a: Complex64::new(0.0, 0.0),
            phase,
        }
    }

    fn rot(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.phase)
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        self.rot() * (z - self.a) / (Complex64::new(1.0, 0.0) - self.a.conj() * z)
    }

    pub fn apply_inverse(&self, w: Complex64) -> Complex64 {
        let u = w * self.rot().conj();
        (u + self.a) / (Complex64::new(1.0, 0.0) + self.a.conj() * u)
    }

    /// Complex derivative of `apply` at `z`.
    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let d = Complex64::new(1.0, 0.0) - self.a.conj() * z;
        self.rot() * (1.0 - self.a.norm_sqr()) / (d * d)
    }

    pub fn inverse(&self) -> MoebiusMap {
        // z = (u + a) / (1 + ā u), u = e^{-iθ} w, rewritten in normal form.
        MoebiusMap {
            a: -self.a * self.rot(),
            phase: -self.phase,
        }
    }

    /// Composition `self ∘ other`, returned in normal form.
    pub fn compose(&self, other: &MoebiusMap) -> MoebiusMap {
        // The composite is an automorphism; recover its zero and its phase from
        // the image of the zero's preimage and the derivative there.
        let zero = other.apply_inverse(self.a);
        let a = zero;
        let d = self.derivative(other.apply(a)) * other.derivative(a);
        // derivative of e^{iθ}(z - a)/(1 - ā z) at z = a is e^{iθ}/(1 - |a|²)
        let phase = (d * (1.0 - a.norm_sqr())).arg();
        MoebiusMap { a, phase }
    }

    /// Image of the disc `|z − center| < radius` (assumed to avoid the pole
    /// `1/ā`) as a disc `(center, radius)`.
    pub fn image_of_disc(&self, center: Complex64, radius: f64) -> Result<(Complex64, f64)> {
        if self.a.norm() == 0.0 {
            return Ok((self.rot() * center, radius));
        }
        let pole = Complex64::new(1.0, 0.0) / self.a.conj();
        let off = pole - center;
        if off.norm() <= radius {
            return Err(Error::domain("disc contains the pole of the Moebius map"));
        }
        // symmetric point of the pole in the circle maps to the image centre
        let sym = center + radius * radius / off.conj();
        let c = self.apply(sym);
        let r = (self.apply(center + radius) - c).norm();
        Ok((c, r))
    }
}

/// Cayley transform `z ↦ i (1 + z) / (1 − z)` from the disc to the upper half-plane.
pub fn cayley(z: Complex64) -> Result<Complex64> {
    if !(z.norm() < 1.0) {
        return Err(Error::domain("Cayley transform needs |z| < 1"));
    }
    Ok(cayley_unchecked(z))
}

pub(crate) fn cayley_unchecked(z: Complex64) -> Complex64 {
    I * (1.0 + z) / (1.0 - z)
}

pub fn inverse_cayley(w: Complex64) -> Result<Complex64> {
    if !(w.im > 0.0) {
        return Err(Error::domain("inverse Cayley transform needs Im w > 0"));
    }
    Ok((w - I) / (w + I))
}

/// Euclidean circle through the ideal points `a`, `b` orthogonal to the unit
/// circle. Returns `DiameterCase` when `a = −b`.
pub fn geodesic_side_circle(a: Complex64, b: Complex64) -> Result<(Complex64, f64)> {
    if (a.norm() - 1.0).abs() > 1e-12 || (b.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::invalid("geodesic endpoints must lie on the unit circle"));
    }
    if (a - b).norm() < 1e-14 {
        return Err(Error::invalid("geodesic endpoints must be distinct"));
    }
    let denom = 1.0 + (a * b.conj()).re;
    if denom.abs() < 1e-14 {
        return Err(Error::DiameterCase { a, b });
    }
    let c = (a + b) / denom;
    let r = (c.norm_sqr() - 1.0).sqrt();
    Ok((c, r))
}

/// Map of the disc onto the upper half-plane sending `a ↦ 0` and `b ↦ ∞`.
///
/// Any two such maps differ by a positive dilation, so arguments of images
/// are intrinsic; for `a = −1`, `b = 1` this is exactly the Cayley transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlaneFrame {
    a: Complex64,
    b: Complex64,
    k: Complex64,
}

impl HalfPlaneFrame {
    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        if (a.norm() - 1.0).abs() > 1e-12 || (b.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("ideal endpoints must lie on the unit circle"));
        }
        if (a - b).norm() < 1e-12 {
            return Err(Error::invalid("ideal endpoints must be distinct"));
        }
        // a boundary point away from both endpoints
        let s = a + b;
        let probe = if s.norm() > 1e-3 { -s / s.norm() } else { I * a };
        let d = (probe - a) / (probe - b);
        let mut k = d.conj() / d.norm();
        if (k * a / b).im < 0.0 {
            k = -k;
        }
        Ok(HalfPlaneFrame { a, b, k })
    }

    pub fn map(&self, z: Complex64) -> Complex64 {
        self.k * (z - self.a) / (z - self.b)
    }

    /// The ideal points sent to `0` and `∞`.
    pub fn endpoints(&self) -> (Complex64, Complex64) {
        (self.a, self.b)
    }

    pub fn map_inverse(&self, w: Complex64) -> Complex64 {
        (w * self.b - self.k * self.a) / (w - self.k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn side_circle_examples() {
        let w = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        let (center, r) = geodesic_side_circle(c(1.0, 0.0), w).unwrap();
        assert!((center - 2.0 * (1.0 + w)).norm() < 1e-14);
        assert!((r - 3f64.sqrt()).abs() < 1e-14);

        let (center, r) = geodesic_side_circle(c(1.0, 0.0), c(0.0, 1.0)).unwrap();
        assert!((center - c(1.0, 1.0)).norm() < 1e-15);
        assert!((r - 1.0).abs() < 1e-15);

        assert!(matches!(
            geodesic_side_circle(c(1.0, 0.0), c(-1.0, 0.0)),
            Err(Error::DiameterCase { .. })
        ));
    }

    #[test]
    fn cayley_examples() {
        assert!((cayley(c(0.0, 0.0)).unwrap() - I).norm() < 1e-15);
        for x in [-0.9, 0.0, 0.9] {
            assert!(cayley(c(x, 0.0)).unwrap().re.abs() < 1e-15);
        }
        assert!(cayley(c(1.0, 0.0)).is_err());
        assert!(cayley(c(0.6, 0.8)).is_err());
    }

    #[test]
    fn horocycle_maps_to_horizontal_line() {
        for rho in [0.25, 0.5, 0.8] {
            for t in [0.7, 2.0, 4.1] {
                let z = c(1.0 - rho, 0.0) + Complex64::from_polar(rho, t);
                let w = cayley(z).unwrap();
                assert!((w.im - (1.0 / rho - 1.0)).abs() < 1e-12, "rho={rho} t={t} w={w}");
            }
        }
    }

    #[test]
    fn moebius_examples() {
        let m = MoebiusMap::new(c(0.4, 0.0), 0.0).unwrap();
        assert!(m.apply(c(0.4, 0.0)).norm() < 1e-16);
        assert!(MoebiusMap::new(c(1.0, 0.0), 0.0).is_err());
        let id = MoebiusMap::identity();
        assert_eq!(id.apply(c(0.3, 0.2)), c(0.3, 0.2));
    }

    #[test]
    fn inverse_and_compose() {
        let m = MoebiusMap::new(c(0.3, -0.5), 1.1).unwrap();
        let inv = m.inverse();
        for z in [c(0.1, 0.2), c(-0.7, 0.3), c(0.0, -0.95)] {
            assert!((inv.apply(m.apply(z)) - z).norm() < 1e-14);
            assert!((m.apply_inverse(z) - inv.apply(z)).norm() < 1e-14);
        }
        let n = MoebiusMap::new(c(-0.2, 0.1), -0.4).unwrap();
        let mn = m.compose(&n);
        for z in [c(0.1, 0.2), c(-0.7, 0.3)] {
            assert!((mn.apply(z) - m.apply(n.apply(z))).norm() < 1e-13);
        }
    }

    #[test]
    fn disc_image_matches_pointwise_images() {
        let m = MoebiusMap::new(c(0.4, 0.0), 0.0).unwrap();
        let (center, r) = m.image_of_disc(c(0.0, 0.0), 0.3).unwrap();
        for k in 0..12 {
            let z = Complex64::from_polar(0.3, k as f64 * 0.5);
            assert!(((m.apply(z) - center).norm() - r).abs() < 1e-14);
        }
    }

    #[test]
    fn half_plane_frame_is_cayley_for_standard_endpoints() {
        let f = HalfPlaneFrame::new(c(-1.0, 0.0), c(1.0, 0.0)).unwrap();
        for z in [c(0.1, 0.2), c(-0.5, -0.3)] {
            assert!((f.map(z) - cayley(z).unwrap()).norm() < 1e-14);
        }
    }
}
