use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ambient::AmbientDomain;
use super::moebius::{geodesic_side_circle, HalfPlaneFrame};
use crate::error::{Error, Result};

type Predicate = dyn Fn(&[Complex64]) -> bool + Send + Sync;

/// Caller-supplied membership predicate for [`SubregionSpec::Indicator`].
#[derive(Clone)]
pub struct IndicatorFn(pub Arc<Predicate>);

impl IndicatorFn {
    pub fn new(f: impl Fn(&[Complex64]) -> bool + Send + Sync + 'static) -> Self {
        IndicatorFn(Arc::new(f))
    }
}

impl fmt::Debug for IndicatorFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("IndicatorFn(..)")
    }
}

impl PartialEq for IndicatorFn {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

/// Radial interval `inner < |z_i| < outer` for one coordinate of a product region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialInterval {
    pub inner: f64,
    pub outer: f64,
}

impl RadialInterval {
    pub fn new(inner: f64, outer: f64) -> Self {
        RadialInterval { inner, outer }
    }
}

/// The subdomain U of the ambient domain.
///
/// Lunes are stored in wedge-normal form: the two ideal endpoints of the
/// common geodesic axis plus the wedge angles `alpha < arg w < beta` of the
/// image under a map of the disc onto the upper half-plane sending
/// `endpoint_a ↦ 0` and `endpoint_b ↦ ∞`. With `A = −1, B = 1` that map is the
/// Cayley transform, so `alpha = 0` is the boundary arc through `−i` and
/// `beta = π` the arc through `+i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RegionRepr", into = "RegionRepr")]
pub enum SubregionSpec {
    Disc {
        center: Complex64,
        radius: f64,
    },
    Horodisc {
        tangency_angle: f64,
        rho: f64,
    },
    HorocyclicStrip {
        tangency_angle: f64,
        rho1: f64,
        rho2: f64,
    },
    HypercyclicLune {
        endpoint_a: Complex64,
        endpoint_b: Complex64,
        alpha: f64,
        beta: f64,
    },
    IdealPolygon {
        vertices: Vec<Complex64>,
    },
    DilatedCopy {
        rho: f64,
    },
    ProductRegion {
        factors: Vec<RadialInterval>,
    },
    Complement {
        inner: Box<SubregionSpec>,
    },
    Indicator {
        label: String,
        predicate: IndicatorFn,
    },
}

/// Outcome of testing an axis-aligned cell against a planar set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellClass {
    Inside,
    Outside,
    Straddle,
}

impl CellClass {
    fn negate(self) -> Self {
        match self {
            CellClass::Inside => CellClass::Outside,
            CellClass::Outside => CellClass::Inside,
            CellClass::Straddle => CellClass::Straddle,
        }
    }

    pub fn and(self, other: CellClass) -> CellClass {
        match (self, other) {
            (CellClass::Outside, _) | (_, CellClass::Outside) => CellClass::Outside,
            (CellClass::Inside, CellClass::Inside) => CellClass::Inside,
            _ => CellClass::Straddle,
        }
    }
}

/// A measurable subset of the plane that quadrature can integrate over.
pub trait PlanarSet: Send + Sync {
    fn contains(&self, z: Complex64) -> bool;

    /// Classifies the cell `[lo.re, hi.re] × [lo.im, hi.im]`. The default
    /// samples a 9×9 grid including the corners, which can miss features
    /// smaller than the grid spacing.
    fn classify(&self, lo: Complex64, hi: Complex64) -> CellClass {
        sample_classify(|z| self.contains(z), lo, hi)
    }
}

pub(crate) fn sample_classify(f: impl Fn(Complex64) -> bool, lo: Complex64, hi: Complex64) -> CellClass {
    const M: usize = 9;
    let mut seen_in = false;
    let mut seen_out = false;
    for i in 0..M {
        let x = lo.re + (hi.re - lo.re) * i as f64 / (M - 1) as f64;
        for j in 0..M {
            let y = lo.im + (hi.im - lo.im) * j as f64 / (M - 1) as f64;
            if f(Complex64::new(x, y)) {
                seen_in = true;
            } else {
                seen_out = true;
            }
            if seen_in && seen_out {
                return CellClass::Straddle;
            }
        }
    }
    if seen_in {
        CellClass::Inside
    } else {
        CellClass::Outside
    }
}

/// Classification of a cell against the open disc `|z − c| < r`.
pub(crate) fn classify_disc(c: Complex64, r: f64, lo: Complex64, hi: Complex64) -> CellClass {
    let cx = c.re.clamp(lo.re, hi.re);
    let cy = c.im.clamp(lo.im, hi.im);
    let dmin = Complex64::new(cx - c.re, cy - c.im).norm();
    let fx = (lo.re - c.re).abs().max((hi.re - c.re).abs());
    let fy = (lo.im - c.im).abs().max((hi.im - c.im).abs());
    let dmax = fx.hypot(fy);
    if dmax < r {
        CellClass::Inside
    } else if dmin >= r {
        CellClass::Outside
    } else {
        CellClass::Straddle
    }
}

/// One side of an ideal polygon.
#[derive(Debug, Clone, Copy)]
enum Side {
    /// Interior lies outside (`outside = true`) or inside the circle.
    Circle { center: Complex64, radius: f64, outside: bool },
    /// Chord from `a` to `b`; interior where `Im(conj(b − a)(z − a)) * sign > 0`.
    Chord { a: Complex64, dir: Complex64, sign: f64 },
}

impl Side {
    fn value(&self, z: Complex64) -> f64 {
        match *self {
            Side::Circle { center, radius, outside } => {
                let d = (z - center).norm() - radius;
                if outside {
                    d
                } else {
                    -d
                }
            }
            Side::Chord { a, dir, sign } => sign * (dir.conj() * (z - a)).im,
        }
    }

    fn classify(&self, lo: Complex64, hi: Complex64) -> CellClass {
        match *self {
            Side::Circle { center, radius, outside } => {
                let cls = classify_disc(center, radius, lo, hi);
                if outside {
                    cls.negate()
                } else {
                    cls
                }
            }
            Side::Chord { .. } => {
                let corners = [lo, Complex64::new(hi.re, lo.im), hi, Complex64::new(lo.re, hi.im)];
                let vals: Vec<f64> = corners.iter().map(|z| self.value(*z)).collect();
                if vals.iter().all(|v| *v > 0.0) {
                    CellClass::Inside
                } else if vals.iter().all(|v| *v <= 0.0) {
                    CellClass::Outside
                } else {
                    CellClass::Straddle
                }
            }
        }
    }
}

fn polygon_sides(vertices: &[Complex64]) -> Result<Vec<Side>> {
    let m = vertices.len();
    let mut sides = Vec::with_capacity(m);
    for i in 0..m {
        let a = vertices[i];
        let b = vertices[(i + 1) % m];
        // any other vertex lies on the interior side of this geodesic
        let v = vertices[(i + 2) % m];
        match geodesic_side_circle(a, b) {
            Ok((center, radius)) => sides.push(Side::Circle {
                center,
                radius,
                outside: (v - center).norm() > radius,
            }),
            Err(Error::DiameterCase { .. }) => {
                let dir = b - a;
                let s = (dir.conj() * (v - a)).im;
                sides.push(Side::Chord { a, dir, sign: s.signum() });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(sides)
}

/// Generalized circle through `p`, `q`, `r`, oriented so that `inside`
/// lies on the positive side.
fn side_through(p: Complex64, q: Complex64, r: Complex64, inside: Complex64) -> Side {
    let d = 2.0 * (p.re * (q.im - r.im) + q.re * (r.im - p.im) + r.re * (p.im - q.im));
    if d.abs() < 1e-12 {
        let dir = q - p;
        let sign = (dir.conj() * (inside - p)).im.signum();
        return Side::Chord { a: p, dir, sign };
    }
    let (pp, qq, rr) = (p.norm_sqr(), q.norm_sqr(), r.norm_sqr());
    let center = Complex64::new(
        (pp * (q.im - r.im) + qq * (r.im - p.im) + rr * (p.im - q.im)) / d,
        (pp * (r.re - q.re) + qq * (p.re - r.re) + rr * (q.re - p.re)) / d,
    );
    let radius = (p - center).norm();
    Side::Circle {
        center,
        radius,
        outside: (inside - center).norm() > radius,
    }
}

/// The two hypercycle (or boundary) arcs bounding a lune, as sides: the
/// preimages of the rays `arg w = alpha` and `arg w = beta`.
fn lune_sides(frame: &HalfPlaneFrame, alpha: f64, beta: f64) -> [Side; 2] {
    let (a, b) = frame.endpoints();
    let point = |angle: f64| {
        // any radius works; avoid the pole of the inverse map
        let mut w = Complex64::from_polar(1.0, angle);
        if (frame.map_inverse(w)).norm() > 1e6 {
            w *= 2.0;
        }
        frame.map_inverse(w)
    };
    [
        side_through(a, b, point(alpha), point(alpha + 0.5 * PI)),
        side_through(a, b, point(beta), point(beta - 0.5 * PI)),
    ]
}

impl SubregionSpec {
    pub fn disc(center: Complex64, radius: f64) -> Self {
        SubregionSpec::Disc { center, radius }
    }

    pub fn horodisc(tangency_angle: f64, rho: f64) -> Self {
        SubregionSpec::Horodisc { tangency_angle, rho }
    }

    pub fn horocyclic_strip(tangency_angle: f64, rho1: f64, rho2: f64) -> Self {
        SubregionSpec::HorocyclicStrip {
            tangency_angle,
            rho1,
            rho2,
        }
    }

    /// Lune whose axis is the diameter from `−1` to `1`.
    pub fn lune(alpha: f64, beta: f64) -> Self {
        SubregionSpec::HypercyclicLune {
            endpoint_a: Complex64::new(-1.0, 0.0),
            endpoint_b: Complex64::new(1.0, 0.0),
            alpha,
            beta,
        }
    }

    /// The ideal triangle with vertices at the cube roots of unity.
    pub fn ideal_triangle() -> Self {
        SubregionSpec::IdealPolygon {
            vertices: (0..3)
                .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 3.0))
                .collect(),
        }
    }

    pub fn dilated(rho: f64) -> Self {
        SubregionSpec::DilatedCopy { rho }
    }

    pub fn product(factors: Vec<RadialInterval>) -> Self {
        SubregionSpec::ProductRegion { factors }
    }

    pub fn complement(inner: SubregionSpec) -> Self {
        SubregionSpec::Complement { inner: Box::new(inner) }
    }

    pub fn indicator(label: impl Into<String>, f: impl Fn(&[Complex64]) -> bool + Send + Sync + 'static) -> Self {
        SubregionSpec::Indicator {
            label: label.into(),
            predicate: IndicatorFn::new(f),
        }
    }

    /// `(center, radius)` for the regions that are Euclidean discs in the plane.
    pub fn as_disc(&self) -> Option<(Complex64, f64)> {
        match *self {
            SubregionSpec::Disc { center, radius } => Some((center, radius)),
            SubregionSpec::Horodisc { tangency_angle, rho } => Some(horodisc_circle(tangency_angle, rho)),
            _ => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            SubregionSpec::Disc { .. } => "Disc",
            SubregionSpec::Horodisc { .. } => "Horodisc",
            SubregionSpec::HorocyclicStrip { .. } => "HorocyclicStrip",
            SubregionSpec::HypercyclicLune { .. } => "HypercyclicLune",
            SubregionSpec::IdealPolygon { .. } => "IdealPolygon",
            SubregionSpec::DilatedCopy { .. } => "DilatedCopy",
            SubregionSpec::ProductRegion { .. } => "ProductRegion",
            SubregionSpec::Complement { .. } => "Complement",
            SubregionSpec::Indicator { .. } => "Indicator",
        }
    }

    /// Checks the variant's parameter invariants against the ambient domain.
    pub fn validate(&self, ambient: &AmbientDomain) -> Result<()> {
        ambient.validate()?;
        let unit_disc = || -> Result<()> {
            match ambient.planar_radius() {
                Some(1.0) => Ok(()),
                _ => Err(Error::unsupported(format!(
                    "{} regions live in the unit disc",
                    self.kind_name()
                ))),
            }
        };
        let unit_interval = |x: f64, name: &str| -> Result<()> {
            if x > 0.0 && x < 1.0 {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must lie in (0, 1), got {x}")))
            }
        };
        match self {
            SubregionSpec::Disc { center, radius } => {
                let big = ambient.require_planar("a Disc region")?;
                if !(radius.is_finite() && *radius > 0.0) || !center.is_finite() {
                    return Err(Error::invalid("disc radius must be positive"));
                }
                if center.norm() + radius > big * (1.0 + 1e-12) {
                    return Err(Error::domain(format!(
                        "disc |z - {center}| < {radius} is not contained in the ambient disc"
                    )));
                }
                Ok(())
            }
            SubregionSpec::Horodisc { tangency_angle, rho } => {
                unit_disc()?;
                unit_interval(*rho, "rho")?;
                finite(*tangency_angle, "tangencyAngle")
            }
            SubregionSpec::HorocyclicStrip {
                tangency_angle,
                rho1,
                rho2,
            } => {
                unit_disc()?;
                unit_interval(*rho1, "rho1")?;
                unit_interval(*rho2, "rho2")?;
                if rho1 >= rho2 {
                    return Err(Error::invalid("horocyclic strip needs rho1 < rho2"));
                }
                finite(*tangency_angle, "tangencyAngle")
            }
            SubregionSpec::HypercyclicLune {
                endpoint_a,
                endpoint_b,
                alpha,
                beta,
            } => {
                unit_disc()?;
                if !(0.0 <= *alpha && alpha < beta && *beta <= PI) {
                    return Err(Error::invalid("lune angles need 0 <= alpha < beta <= pi"));
                }
                HalfPlaneFrame::new(*endpoint_a, *endpoint_b).map(|_| ())
            }
            SubregionSpec::IdealPolygon { vertices } => {
                unit_disc()?;
                if vertices.len() < 3 {
                    return Err(Error::invalid("ideal polygon needs at least 3 vertices"));
                }
                if vertices.iter().any(|v| (v.norm() - 1.0).abs() > 1e-12) {
                    return Err(Error::invalid("ideal polygon vertices must lie on the unit circle"));
                }
                polygon_sides(vertices).map(|_| ())
            }
            SubregionSpec::DilatedCopy { rho } => unit_interval(*rho, "rho"),
            SubregionSpec::ProductRegion { factors } => {
                let radii: Vec<f64> = match ambient {
                    AmbientDomain::Polydisc { radii } => radii.clone(),
                    _ => vec![ambient.require_planar("a ProductRegion")?],
                };
                if factors.len() != radii.len() {
                    return Err(Error::DimensionMismatch {
                        expected: radii.len(),
                        got: factors.len(),
                    });
                }
                for (f, r) in factors.iter().zip(&radii) {
                    if !(0.0 <= f.inner && f.inner < f.outer && f.outer <= *r) {
                        return Err(Error::invalid(format!(
                            "radial interval ({}, {}) must satisfy 0 <= inner < outer <= {r}",
                            f.inner, f.outer
                        )));
                    }
                }
                Ok(())
            }
            SubregionSpec::Complement { inner } => inner.validate(ambient),
            SubregionSpec::Indicator { .. } => Ok(()),
        }
    }

    /// Open-set membership of `z` in U.
    pub fn contains(&self, ambient: &AmbientDomain, z: &[Complex64]) -> Result<bool> {
        ambient.check_point(z)?;
        self.validate(ambient)?;
        Ok(ambient.contains_unchecked(z) && self.contains_raw(ambient, z, false))
    }

    /// Membership without validation; `closed` selects the closure.
    pub(crate) fn contains_raw(&self, ambient: &AmbientDomain, z: &[Complex64], closed: bool) -> bool {
        let lt = |a: f64, b: f64| if closed { a <= b } else { a < b };
        match self {
            SubregionSpec::Disc { .. } | SubregionSpec::Horodisc { .. } => {
                let (c, r) = self.as_disc().expect("disc-like variant");
                lt((z[0] - c).norm(), r)
            }
            SubregionSpec::HorocyclicStrip {
                tangency_angle,
                rho1,
                rho2,
            } => {
                let (c2, r2) = horodisc_circle(*tangency_angle, *rho2);
                let (c1, r1) = horodisc_circle(*tangency_angle, *rho1);
                lt((z[0] - c2).norm(), r2) && lt(r1, (z[0] - c1).norm())
            }
            SubregionSpec::HypercyclicLune {
                endpoint_a,
                endpoint_b,
                alpha,
                beta,
            } => {
                let on_disc = if closed { z[0].norm() <= 1.0 } else { z[0].norm() < 1.0 };
                if !on_disc {
                    return false;
                }
                if closed && ((z[0] - endpoint_a).norm() == 0.0 || (z[0] - endpoint_b).norm() == 0.0) {
                    return true;
                }
                let frame = HalfPlaneFrame::new(*endpoint_a, *endpoint_b).expect("validated endpoints");
                let w = frame.map(z[0]);
                let arg = w.im.atan2(w.re);
                lt(*alpha, arg) && lt(arg, *beta)
            }
            SubregionSpec::IdealPolygon { vertices } => {
                let sides = polygon_sides(vertices).expect("validated polygon");
                let in_disc = if closed { z[0].norm() <= 1.0 } else { z[0].norm() < 1.0 };
                in_disc
                    && sides.iter().all(|s| {
                        let v = s.value(z[0]);
                        if closed {
                            v >= 0.0
                        } else {
                            v > 0.0
                        }
                    })
            }
            SubregionSpec::DilatedCopy { rho } => {
                let scaled: Vec<Complex64> = z.iter().map(|w| w / rho).collect();
                if closed {
                    ambient.closure_contains(&scaled)
                } else {
                    ambient.contains_unchecked(&scaled)
                }
            }
            SubregionSpec::ProductRegion { factors } => z
                .iter()
                .zip(factors)
                .all(|(w, f)| lt(f.inner, w.norm()) && lt(w.norm(), f.outer)),
            SubregionSpec::Complement { inner } => {
                if closed {
                    ambient.closure_contains(z) && !inner.contains_raw(ambient, z, false)
                } else {
                    ambient.contains_unchecked(z) && !inner.contains_raw(ambient, z, true)
                }
            }
            SubregionSpec::Indicator { predicate, .. } => (predicate.0)(z),
        }
    }

    /// Wedge angles `(alpha, beta)` of the lune's half-plane image.
    pub fn lune_to_wedge(&self) -> Result<(f64, f64)> {
        match *self {
            SubregionSpec::HypercyclicLune { alpha, beta, .. } => Ok((alpha, beta)),
            _ => Err(Error::invalid("lune_to_wedge needs a HypercyclicLune")),
        }
    }

    /// Parses JSON `{"kind": .., "params": {..}}` or one of the shorthands
    /// `ideal-triangle`, `horodisc:ρ`, `strip:ρ1,ρ2`, `lune:a,b` (angles as
    /// fractions of π), `dilated:ρ`, `disc:x,y,r`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            return serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()));
        }
        let (head, tail) = match s.split_once(':') {
            Some((h, t)) => (h.trim(), t),
            None => (s, ""),
        };
        let nums = || -> Result<Vec<f64>> {
            tail.split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{t}` in `{s}`"))))
                .collect()
        };
        let want = |v: &[f64], n: usize| -> Result<()> {
            if v.len() == n {
                Ok(())
            } else {
                Err(Error::Parse(format!("`{head}` takes {n} numbers, got {}", v.len())))
            }
        };
        match head {
            "ideal-triangle" => Ok(SubregionSpec::ideal_triangle()),
            "horodisc" => {
                let v = nums()?;
                want(&v, 1)?;
                Ok(SubregionSpec::horodisc(0.0, v[0]))
            }
            "strip" => {
                let v = nums()?;
                want(&v, 2)?;
                Ok(SubregionSpec::horocyclic_strip(0.0, v[0], v[1]))
            }
            "lune" => {
                let v = nums()?;
                want(&v, 2)?;
                Ok(SubregionSpec::lune(v[0] * PI, v[1] * PI))
            }
            "dilated" => {
                let v = nums()?;
                want(&v, 1)?;
                Ok(SubregionSpec::dilated(v[0]))
            }
            "disc" => {
                let v = nums()?;
                want(&v, 3)?;
                Ok(SubregionSpec::disc(Complex64::new(v[0], v[1]), v[2]))
            }
            _ => Err(Error::Parse(format!("unknown region `{s}`"))),
        }
    }
}

fn finite(x: f64, name: &str) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be finite")))
    }
}

/// Euclidean circle of the horodisc tangent at `e^{iθ}` with radius `ρ`.
pub(crate) fn horodisc_circle(tangency_angle: f64, rho: f64) -> (Complex64, f64) {
    (Complex64::from_polar(1.0 - rho, tangency_angle), rho)
}

/// Planar view of a region inside an ambient disc, usable by quadrature.
///
/// The region is compiled once into a tree of circle, line and predicate
/// tests so that per-point membership does no allocation. Boundaries are
/// treated loosely here (they have measure zero); use
/// [`SubregionSpec::contains`] for exact open-set semantics.
pub struct PlanarRegion {
    shape: Shape,
    radius: f64,
}

#[derive(Clone)]
enum Shape {
    Disc(Complex64, f64),
    Side(Side),
    Predicate(IndicatorFn),
    Not(Box<Shape>),
    And(Vec<Shape>),
}

impl Shape {
    fn contains(&self, z: Complex64) -> bool {
        match self {
            Shape::Disc(c, r) => (z - c).norm() < *r,
            Shape::Side(s) => s.value(z) > 0.0,
            Shape::Predicate(f) => (f.0)(&[z]),
            Shape::Not(inner) => !inner.contains(z),
            Shape::And(parts) => parts.iter().all(|p| p.contains(z)),
        }
    }

    fn classify(&self, lo: Complex64, hi: Complex64) -> CellClass {
        match self {
            Shape::Disc(c, r) => classify_disc(*c, *r, lo, hi),
            Shape::Side(s) => s.classify(lo, hi),
            Shape::Predicate(_) => sample_classify(|z| self.contains(z), lo, hi),
            Shape::Not(inner) => inner.classify(lo, hi).negate(),
            Shape::And(parts) => {
                let mut acc = CellClass::Inside;
                for p in parts {
                    acc = acc.and(p.classify(lo, hi));
                    if acc == CellClass::Outside {
                        break;
                    }
                }
                acc
            }
        }
    }

    fn compile(region: &SubregionSpec, radius: f64) -> Shape {
        let zero = Complex64::new(0.0, 0.0);
        match region {
            SubregionSpec::Disc { .. } | SubregionSpec::Horodisc { .. } => {
                let (c, r) = region.as_disc().expect("disc-like variant");
                Shape::Disc(c, r)
            }
            SubregionSpec::HorocyclicStrip {
                tangency_angle,
                rho1,
                rho2,
            } => {
                let (c2, r2) = horodisc_circle(*tangency_angle, *rho2);
                let (c1, r1) = horodisc_circle(*tangency_angle, *rho1);
                Shape::And(vec![Shape::Disc(c2, r2), Shape::Not(Box::new(Shape::Disc(c1, r1)))])
            }
            SubregionSpec::HypercyclicLune {
                endpoint_a,
                endpoint_b,
                alpha,
                beta,
            } => {
                let frame = HalfPlaneFrame::new(*endpoint_a, *endpoint_b).expect("validated endpoints");
                Shape::And(lune_sides(&frame, *alpha, *beta).into_iter().map(Shape::Side).collect())
            }
            SubregionSpec::IdealPolygon { vertices } => Shape::And(
                polygon_sides(vertices)
                    .expect("validated polygon")
                    .into_iter()
                    .map(Shape::Side)
                    .collect(),
            ),
            SubregionSpec::DilatedCopy { rho } => Shape::Disc(zero, rho * radius),
            SubregionSpec::ProductRegion { factors } => {
                let f = factors[0];
                if f.inner > 0.0 {
                    Shape::And(vec![
                        Shape::Disc(zero, f.outer),
                        Shape::Not(Box::new(Shape::Disc(zero, f.inner))),
                    ])
                } else {
                    Shape::Disc(zero, f.outer)
                }
            }
            SubregionSpec::Complement { inner } => Shape::Not(Box::new(Shape::compile(inner, radius))),
            SubregionSpec::Indicator { predicate, .. } => Shape::Predicate(predicate.clone()),
        }
    }
}

/// Disjoint sub-intervals of `[0, 2π)`, sorted.
#[derive(Debug, Clone, PartialEq)]
struct ArcSet(Vec<(f64, f64)>);

const TAU: f64 = 2.0 * PI;

impl ArcSet {
    fn full() -> Self {
        ArcSet(vec![(0.0, TAU)])
    }

    fn empty() -> Self {
        ArcSet(Vec::new())
    }

    /// `(φ − h, φ + h)` modulo `2π`, with `0 <= h <= π`.
    fn centered(phi: f64, h: f64) -> Self {
        if h >= PI {
            return ArcSet::full();
        }
        if h <= 0.0 {
            return ArcSet::empty();
        }
        let lo = (phi - h).rem_euclid(TAU);
        let hi = lo + 2.0 * h;
        if hi <= TAU {
            ArcSet(vec![(lo, hi)])
        } else {
            ArcSet(vec![(0.0, hi - TAU), (lo, TAU)])
        }
    }

    fn complement(&self) -> Self {
        let mut out = Vec::with_capacity(self.0.len() + 1);
        let mut start = 0.0;
        for &(lo, hi) in &self.0 {
            if lo > start {
                out.push((start, lo));
            }
            start = hi;
        }
        if start < TAU {
            out.push((start, TAU));
        }
        ArcSet(out)
    }

    fn intersect(&self, other: &ArcSet) -> Self {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            let (a0, a1) = self.0[i];
            let (b0, b1) = other.0[j];
            let lo = a0.max(b0);
            let hi = a1.min(b1);
            if lo < hi {
                out.push((lo, hi));
            }
            if a1 < b1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        ArcSet(out)
    }

    fn measure(&self) -> f64 {
        self.0.iter().map(|(lo, hi)| hi - lo).sum()
    }
}

/// Angles where `s e^{iθ}` lies in the open disc `D(c, r)`.
fn disc_arcs(c: Complex64, r: f64, s: f64) -> ArcSet {
    let d = c.norm();
    if s + d < r {
        return ArcSet::full();
    }
    if (s - d).abs() >= r || s == 0.0 {
        return ArcSet::empty();
    }
    // sin²(h/2) = (r − s + d)(r + s − d) / (4 s d)
    let q = ((r - s + d) * (r + s - d) / (4.0 * s * d)).clamp(0.0, 1.0);
    ArcSet::centered(c.im.atan2(c.re), 2.0 * q.sqrt().asin())
}

impl Side {
    fn arcs(&self, s: f64) -> ArcSet {
        match *self {
            Side::Circle { center, radius, outside } => {
                let inside = disc_arcs(center, radius, s);
                if outside {
                    inside.complement()
                } else {
                    inside
                }
            }
            Side::Chord { a, dir, sign } => {
                // sign · (s |d| sin(θ − ψ) − Im(conj(d) a)) > 0
                let q = (dir.conj() * a).im / (s * dir.norm());
                let psi = dir.im.atan2(dir.re);
                let above = if q >= 1.0 {
                    ArcSet::empty()
                } else if q <= -1.0 {
                    ArcSet::full()
                } else {
                    ArcSet::centered(psi + 0.5 * PI, 0.5 * PI - q.asin())
                };
                if sign > 0.0 {
                    above
                } else {
                    above.complement()
                }
            }
        }
    }
}

impl Shape {
    fn arcs(&self, s: f64) -> Option<ArcSet> {
        match self {
            Shape::Disc(c, r) => Some(if c.norm() == 0.0 {
                if s < *r {
                    ArcSet::full()
                } else {
                    ArcSet::empty()
                }
            } else {
                disc_arcs(*c, *r, s)
            }),
            Shape::Side(side) => Some(side.arcs(s)),
            Shape::Predicate(_) => None,
            Shape::Not(inner) => Some(inner.arcs(s)?.complement()),
            Shape::And(parts) => {
                let mut acc = ArcSet::full();
                for p in parts {
                    acc = acc.intersect(&p.arcs(s)?);
                }
                Some(acc)
            }
        }
    }
}

impl PlanarRegion {
    /// Angular measure of `{θ : s e^{iθ} ∈ U}`, computed from the boundary
    /// circles; `None` when the region involves a user predicate.
    pub fn angular_measure(&self, s: f64) -> Option<f64> {
        let arcs = self.shape.arcs(s.max(f64::MIN_POSITIVE))?;
        if s <= 0.0 {
            return Some(if self.contains(Complex64::new(0.0, 0.0)) { 2.0 * PI } else { 0.0 });
        }
        Some(arcs.measure())
    }

    pub fn new(region: &SubregionSpec, ambient: &AmbientDomain) -> Result<Self> {
        let radius = ambient.require_planar("planar quadrature")?;
        region.validate(ambient)?;
        let shape = Shape::And(vec![
            Shape::Disc(Complex64::new(0.0, 0.0), radius),
            Shape::compile(region, radius),
        ]);
        Ok(PlanarRegion { shape, radius })
    }

    pub fn ambient_radius(&self) -> f64 {
        self.radius
    }
}

impl PlanarSet for PlanarRegion {
    fn contains(&self, z: Complex64) -> bool {
        self.shape.contains(z)
    }

    fn classify(&self, lo: Complex64, hi: Complex64) -> CellClass {
        self.shape.classify(lo, hi)
    }
}

// ---------------------------------------------------------------------------
// JSON representation
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", content = "params")]
enum RegionRepr {
    Disc {
        center: Complex64,
        radius: f64,
    },
    Horodisc {
        #[serde(rename = "tangencyAngle", default)]
        tangency_angle: f64,
        rho: f64,
    },
    HorocyclicStrip {
        #[serde(rename = "tangencyAngle", default)]
        tangency_angle: f64,
        rho1: f64,
        rho2: f64,
    },
    HypercyclicLune {
        #[serde(rename = "idealEndpointA")]
        endpoint_a: Complex64,
        #[serde(rename = "idealEndpointB")]
        endpoint_b: Complex64,
        alpha: f64,
        beta: f64,
    },
    IdealPolygon {
        vertices: Vec<Complex64>,
    },
    DilatedCopy {
        rho: f64,
    },
    ProductRegion {
        factors: Vec<RadialInterval>,
    },
    Complement {
        inner: Box<RegionRepr>,
    },
    Indicator {
        label: String,
    },
}

impl TryFrom<RegionRepr> for SubregionSpec {
    type Error = Error;

    fn try_from(r: RegionRepr) -> Result<Self> {
        Ok(match r {
            RegionRepr::Disc { center, radius } => SubregionSpec::Disc { center, radius },
            RegionRepr::Horodisc { tangency_angle, rho } => SubregionSpec::Horodisc { tangency_angle, rho },
            RegionRepr::HorocyclicStrip {
                tangency_angle,
                rho1,
                rho2,
            } => SubregionSpec::HorocyclicStrip {
                tangency_angle,
                rho1,
                rho2,
            },
            RegionRepr::HypercyclicLune {
                endpoint_a,
                endpoint_b,
                alpha,
                beta,
            } => SubregionSpec::HypercyclicLune {
                endpoint_a,
                endpoint_b,
                alpha,
                beta,
            },
            RegionRepr::IdealPolygon { vertices } => SubregionSpec::IdealPolygon { vertices },
            RegionRepr::DilatedCopy { rho } => SubregionSpec::DilatedCopy { rho },
            RegionRepr::ProductRegion { factors } => SubregionSpec::ProductRegion { factors },
            RegionRepr::Complement { inner } => SubregionSpec::Complement {
                inner: Box::new(SubregionSpec::try_from(*inner)?),
            },
            RegionRepr::Indicator { label } => {
                return Err(Error::Parse(format!(
                    "indicator region `{label}` needs an in-process predicate and cannot be read from JSON"
                )))
            }
        })
    }
}

impl From<SubregionSpec> for RegionRepr {
    fn from(s: SubregionSpec) -> Self {
        match s {
            SubregionSpec::Disc { center, radius } => RegionRepr::Disc { center, radius },
            SubregionSpec::Horodisc { tangency_angle, rho } => RegionRepr::Horodisc { tangency_angle, rho },
            SubregionSpec::HorocyclicStrip {
                tangency_angle,
                rho1,
                rho2,
            } => RegionRepr::HorocyclicStrip {
                tangency_angle,
                rho1,
                rho2,
            },
            SubregionSpec::HypercyclicLune {
                endpoint_a,
                endpoint_b,
                alpha,
                beta,
            } => RegionRepr::HypercyclicLune {
                endpoint_a,
                endpoint_b,
                alpha,
                beta,
            },
            SubregionSpec::IdealPolygon { vertices } => RegionRepr::IdealPolygon { vertices },
            SubregionSpec::DilatedCopy { rho } => RegionRepr::DilatedCopy { rho },
            SubregionSpec::ProductRegion { factors } => RegionRepr::ProductRegion { factors },
            SubregionSpec::Complement { inner } => RegionRepr::Complement {
                inner: Box::new(RegionRepr::from(*inner)),
            },
            SubregionSpec::Indicator { label, .. } => RegionRepr::Indicator { label },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(re: f64, im: f64) -> [Complex64; 1] {
        [Complex64::new(re, im)]
    }

    const DISC: AmbientDomain = AmbientDomain::UnitDisc;

    #[test]
    fn horodisc_membership_examples() {
        let h = SubregionSpec::horodisc(0.0, 0.5);
        assert!(h.contains(&DISC, &pt(0.5, 0.0)).unwrap());
        assert!(!h.contains(&DISC, &pt(-0.1, 0.0)).unwrap());
    }

    #[test]
    fn ideal_triangle_contains_origin() {
        let t = SubregionSpec::ideal_triangle();
        assert!(t.contains(&DISC, &pt(0.0, 0.0)).unwrap());
        // just inside the cap cut off between 1 and e^{2πi/3}
        let w = Complex64::from_polar(0.95, PI / 3.0);
        assert!(!t.contains(&DISC, &[w]).unwrap());
    }

    #[test]
    fn polygon_with_a_diameter_side() {
        let sq = SubregionSpec::IdealPolygon {
            vertices: vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(-1.0, 0.0),
            ],
        };
        assert!(sq.contains(&DISC, &pt(0.0, 0.2)).unwrap());
        assert!(!sq.contains(&DISC, &pt(0.0, -0.2)).unwrap());
    }

    #[test]
    fn complement_excludes_boundary() {
        let inner = SubregionSpec::disc(Complex64::new(0.0, 0.0), 0.5);
        let comp = SubregionSpec::complement(inner.clone());
        let on = pt(0.5, 0.0);
        assert!(!inner.contains(&DISC, &on).unwrap());
        assert!(!comp.contains(&DISC, &on).unwrap());
        assert!(comp.contains(&DISC, &pt(0.7, 0.0)).unwrap());
    }

    #[test]
    fn dimension_mismatch() {
        let d = SubregionSpec::dilated(0.5);
        let err = d.contains(&AmbientDomain::ball(2), &pt(0.1, 0.0)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 2, got: 1 }));
    }

    #[test]
    fn disc_must_fit_inside_ambient() {
        let d = SubregionSpec::disc(Complex64::new(0.6, 0.0), 0.5);
        assert!(d.validate(&DISC).is_err());
    }

    #[test]
    fn lune_wedge_form_roundtrip() {
        let l = SubregionSpec::lune(0.3, 2.0);
        assert_eq!(l.lune_to_wedge().unwrap(), (0.3, 2.0));
        let c = SubregionSpec::lune(0.5, PI);
        assert_eq!(c.lune_to_wedge().unwrap(), (0.5, PI));
    }

    #[test]
    fn rotated_lune_matches_standard_lune() {
        let (alpha, beta) = (0.4, 2.2);
        let std_lune = SubregionSpec::lune(alpha, beta);
        let rot = SubregionSpec::HypercyclicLune {
            endpoint_a: Complex64::new(0.0, -1.0),
            endpoint_b: Complex64::new(0.0, 1.0),
            alpha,
            beta,
        };
        // the rotation z ↦ -i z carries -i ↦ -1 and i ↦ 1
        for k in 0..400 {
            let z = Complex64::from_polar(0.97 * ((k * 37 % 101) as f64 / 101.0), k as f64 * 0.731);
            let w = Complex64::new(0.0, -1.0) * z;
            assert_eq!(rot.contains(&DISC, &[z]).unwrap(), std_lune.contains(&DISC, &[w]).unwrap());
        }
    }

    #[test]
    fn json_roundtrip_and_shorthands() {
        let r = SubregionSpec::complement(SubregionSpec::horocyclic_strip(0.2, 0.25, 0.5));
        let s = serde_json::to_string(&r).unwrap();
        let back: SubregionSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);

        let d = SubregionSpec::parse(r#"{"kind":"DilatedCopy","params":{"rho":0.5}}"#).unwrap();
        assert_eq!(d, SubregionSpec::dilated(0.5));
        let d = SubregionSpec::parse(r#"{"kind":"Disc","params":{"center":[0.3,0.0],"radius":0.2}}"#).unwrap();
        assert_eq!(d, SubregionSpec::disc(Complex64::new(0.3, 0.0), 0.2));
        assert_eq!(SubregionSpec::parse("ideal-triangle").unwrap(), SubregionSpec::ideal_triangle());
        assert_eq!(SubregionSpec::parse("strip:0.25,0.5").unwrap(), SubregionSpec::horocyclic_strip(0.0, 0.25, 0.5));
        assert!(SubregionSpec::parse(r#"{"kind":"Indicator","params":{"label":"x"}}"#).is_err());
        assert!(SubregionSpec::parse("blob").is_err());
    }

    #[test]
    fn exact_classification_agrees_with_sampling_on_fine_cells() {
        let regions = [
            SubregionSpec::ideal_triangle(),
            SubregionSpec::horocyclic_strip(1.0, 0.25, 0.5),
            SubregionSpec::complement(SubregionSpec::dilated(0.4)),
            SubregionSpec::lune(0.4, 2.2),
        ];
        for r in &regions {
            let p = PlanarRegion::new(r, &DISC).unwrap();
            let h = 1.0 / 16.0;
            for i in 0..32 {
                for j in 0..32 {
                    let lo = Complex64::new(-1.0 + i as f64 * h, -1.0 + j as f64 * h);
                    let hi = lo + Complex64::new(h, h);
                    let exact = p.classify(lo, hi);
                    let sampled = sample_classify(|z| p.contains(z), lo, hi);
                    if sampled == CellClass::Straddle {
                        assert_eq!(exact, CellClass::Straddle, "{r:?} {lo}");
                    } else if exact != CellClass::Straddle {
                        assert_eq!(exact, sampled, "{r:?} {lo}");
                    }
                }
            }
        }
    }

    fn lunes() -> Vec<SubregionSpec> {
        vec![
            SubregionSpec::lune(0.4, 2.2),
            SubregionSpec::lune(0.0, 1.0),
            SubregionSpec::lune(2.0, PI),
            SubregionSpec::lune(0.0, PI),
            SubregionSpec::HypercyclicLune {
                endpoint_a: Complex64::from_polar(1.0, 0.3),
                endpoint_b: Complex64::from_polar(1.0, 2.5),
                alpha: 0.7,
                beta: 1.9,
            },
        ]
    }

    #[test]
    fn compiled_lune_matches_frame_membership() {
        for r in lunes() {
            let p = PlanarRegion::new(&r, &DISC).unwrap();
            for i in 0..60 {
                for j in 0..60 {
                    let z = Complex64::new(-0.99 + i as f64 * 0.0333, -0.98 + j as f64 * 0.0331);
                    if z.norm() >= 0.999 {
                        continue;
                    }
                    assert_eq!(p.contains(z), r.contains(&DISC, &[z]).unwrap(), "{r:?} {z}");
                }
            }
        }
    }

    #[test]
    fn angular_measure_matches_sampling() {
        let mut regions = lunes();
        regions.extend([
            SubregionSpec::ideal_triangle(),
            SubregionSpec::horocyclic_strip(1.0, 0.25, 0.5),
            SubregionSpec::complement(SubregionSpec::disc(Complex64::new(0.2, 0.3), 0.4)),
            SubregionSpec::IdealPolygon {
                vertices: vec![
                    Complex64::new(1.0, 0.0),
                    Complex64::new(0.0, 1.0),
                    Complex64::new(-1.0, 0.0),
                    Complex64::new(0.0, -1.0),
                ],
            },
        ]);
        let m = 200_000;
        for r in &regions {
            let p = PlanarRegion::new(r, &DISC).unwrap();
            for s in [0.05, 0.3, 0.61, 0.9, 0.99] {
                let exact = p.angular_measure(s).unwrap();
                let hits = (0..m)
                    .filter(|k| p.contains(Complex64::from_polar(s, 2.0 * PI * (*k as f64 + 0.5) / m as f64)))
                    .count();
                let sampled = 2.0 * PI * hits as f64 / m as f64;
                assert!((exact - sampled).abs() < 1e-3, "{r:?} s={s}: {exact} vs {sampled}");
            }
        }
    }

    #[test]
    fn angular_measure_of_a_centered_disc() {
        let p = PlanarRegion::new(&SubregionSpec::dilated(0.5), &DISC).unwrap();
        assert_eq!(p.angular_measure(0.3), Some(2.0 * PI));
        assert_eq!(p.angular_measure(0.7), Some(0.0));
        let q = PlanarRegion::new(&SubregionSpec::indicator("x", |_| true), &DISC).unwrap();
        assert_eq!(q.angular_measure(0.3), None);
    }
}

