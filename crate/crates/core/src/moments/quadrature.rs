//! Planar quadrature over implicitly defined regions.
//!
//! Two engines live here:
//!
//! * an adaptive quadtree over a bounding box. Cells fully inside the region
//!   use a tensor 8-point Gauss–Legendre rule and are refined while the
//!   difference between the rule on the cell and on its four children is
//!   above the cell's share of the tolerance. Straddling cells are refined to
//!   the depth limit and finally integrated with the same rule multiplied by
//!   the indicator sampled at the 8×8 nodes; their error is bounded by the cell
//!   area times the largest sampled integrand magnitude.
//! * a polar Gauss–Legendre × trapezoid rule for discs and annuli, which is
//!   spectrally accurate for smooth integrands and exact for the polynomial
//!   integrands of moment matrices.
//!
//! Cells are evaluated in parallel level by level; results are reduced in
//! the fixed order in which cells are created, so the value is bitwise
//! independent of the thread count.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;

use super::gauss::gauss_legendre;
use crate::error::{Error, Result};
use crate::geometry::{classify_disc, horodisc_circle, AmbientDomain, CellClass, PlanarRegion, PlanarSet, SubregionSpec};

const RULE: usize = 8;

fn rule8() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE8: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE8.get_or_init(|| gauss_legendre(RULE))
}

/// Limits for the adaptive engines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Maximum number of quadtree cells visited.
    pub budget: usize,
    /// Maximum refinement depth below the bounding box.
    pub depth: u32,
    /// Target absolute error.
    pub tol: f64,
    /// Route disc/annulus-shaped regions through the polar rule.
    pub polar_for_discs: bool,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            budget: 4_000_000,
            depth: 12,
            tol: 1e-10,
            polar_for_discs: true,
        }
    }
}

impl QuadratureOptions {
    pub fn with_depth(mut self, depth: u32) -> Self {
        self.depth = depth;
        self
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn cells_only(mut self) -> Self {
        self.polar_for_discs = false;
        self
    }
}

/// Value of a (possibly vector-valued) integral plus its error estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature<T> {
    pub value: T,
    pub error_estimate: f64,
    pub cells: usize,
    /// The budget ran out before every cell met its tolerance.
    pub exhausted: bool,
}

#[derive(Clone)]
struct Cell {
    lo: Complex64,
    hi: Complex64,
    depth: u32,
    /// Interior rule on this cell, inherited from the parent's refinement.
    coarse: Option<Vec<Complex64>>,
}

enum Step {
    Done { value: Vec<Complex64>, err: f64 },
    Split(Vec<Cell>),
}

// NaN-propagating, unlike `f64::max`
fn max_norm(v: &[Complex64]) -> f64 {
    v.iter()
        .map(|z| z.norm())
        .fold(0.0, |m, x| if x.is_nan() || x > m { x } else { m })
}

fn diff_norm(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Tensor Gauss rule on a cell; with `mask`, nodes outside the set get zero
/// weight. Returns the integral and the largest integrand magnitude seen.
fn cell_rule<F>(
    lo: Complex64,
    hi: Complex64,
    dim: usize,
    f: &F,
    mask: Option<&dyn PlanarSet>,
) -> Result<(Vec<Complex64>, f64)>
where
    F: Fn(Complex64, &mut [Complex64]) + Sync,
{
    let (x, w) = rule8();
    let hx = 0.5 * (hi.re - lo.re);
    let hy = 0.5 * (hi.im - lo.im);
    let mx = 0.5 * (hi.re + lo.re);
    let my = 0.5 * (hi.im + lo.im);
    let mut acc = vec![Complex64::new(0.0, 0.0); dim];
    let mut buf = vec![Complex64::new(0.0, 0.0); dim];
    let mut bound: f64 = 0.0;
    for i in 0..RULE {
        for j in 0..RULE {
            let z = Complex64::new(mx + hx * x[i], my + hy * x[j]);
            if let Some(set) = mask {
                if !set.contains(z) {
                    continue;
                }
            }
            f(z, &mut buf);
            let m = max_norm(&buf);
            if !m.is_finite() {
                return Err(Error::SingularSample { point: z });
            }
            bound = bound.max(m);
            let wt = w[i] * w[j] * hx * hy;
            for (a, b) in acc.iter_mut().zip(&buf) {
                *a += b * wt;
            }
        }
    }
    Ok((acc, bound))
}

fn children(lo: Complex64, hi: Complex64) -> [(Complex64, Complex64); 4] {
    let mid = 0.5 * (lo + hi);
    [
        (lo, mid),
        (Complex64::new(mid.re, lo.im), Complex64::new(hi.re, mid.im)),
        (Complex64::new(lo.re, mid.im), Complex64::new(mid.re, hi.im)),
        (mid, hi),
    ]
}

/// Adaptive quadtree integration of the `dim`-component integrand `f` over
/// `set ∩ [lo, hi]`.
pub fn integrate_cells<F>(
    set: &dyn PlanarSet,
    lo: Complex64,
    hi: Complex64,
    dim: usize,
    f: F,
    opts: &QuadratureOptions,
) -> Result<Quadrature<Vec<Complex64>>>
where
    F: Fn(Complex64, &mut [Complex64]) + Sync,
{
    let total_area = (hi.re - lo.re) * (hi.im - lo.im);
    let mut active = vec![Cell {
        lo,
        hi,
        depth: 0,
        coarse: None,
    }];
    let mut finished: Vec<(Vec<Complex64>, f64)> = Vec::new();
    let mut visited = 0usize;
    let mut exhausted = false;

    while !active.is_empty() {
        visited += active.len();
        let force = visited + 4 * active.len() > opts.budget;
        if force {
            exhausted = true;
        }
        let steps: Vec<Result<Step>> = active
            .par_iter()
            .map(|cell| process_cell(cell, set, dim, &f, opts, total_area, force))
            .collect();
        let mut next = Vec::new();
        for step in steps {
            match step? {
                Step::Done { value, err } => finished.push((value, err)),
                Step::Split(kids) => next.extend(kids),
            }
        }
        active = next;
    }

    let mut value = vec![Complex64::new(0.0, 0.0); dim];
    let mut error_estimate = 0.0;
    for (v, e) in &finished {
        for (a, b) in value.iter_mut().zip(v) {
            *a += b;
        }
        error_estimate += e;
    }
    Ok(Quadrature {
        value,
        error_estimate,
        cells: visited,
        exhausted,
    })
}

fn process_cell<F>(
    cell: &Cell,
    set: &dyn PlanarSet,
    dim: usize,
    f: &F,
    opts: &QuadratureOptions,
    total_area: f64,
    force: bool,
) -> Result<Step>
where
    F: Fn(Complex64, &mut [Complex64]) + Sync,
{
    let area = (cell.hi.re - cell.lo.re) * (cell.hi.im - cell.lo.im);
    let cell_tol = opts.tol * area / total_area;
    let at_floor = cell.depth >= opts.depth || force;
    match set.classify(cell.lo, cell.hi) {
        CellClass::Outside => Ok(Step::Done {
            value: vec![Complex64::new(0.0, 0.0); dim],
            err: 0.0,
        }),
        CellClass::Inside => {
            let coarse = match &cell.coarse {
                Some(c) => c.clone(),
                None => cell_rule(cell.lo, cell.hi, dim, f, None)?.0,
            };
            let mut kids = Vec::with_capacity(4);
            let mut fine = vec![Complex64::new(0.0, 0.0); dim];
            for (lo, hi) in children(cell.lo, cell.hi) {
                let (v, _) = cell_rule(lo, hi, dim, f, None)?;
                for (a, b) in fine.iter_mut().zip(&v) {
                    *a += b;
                }
                kids.push(Cell {
                    lo,
                    hi,
                    depth: cell.depth + 1,
                    coarse: Some(v),
                });
            }
            let err = diff_norm(&fine, &coarse);
            if err <= cell_tol || at_floor {
                Ok(Step::Done { value: fine, err })
            } else {
                Ok(Step::Split(kids))
            }
        }
        CellClass::Straddle => {
            let (value, bound) = cell_rule(cell.lo, cell.hi, dim, f, Some(set))?;
            let err = area * bound;
            if at_floor || err <= cell_tol {
                Ok(Step::Done { value, err })
            } else {
                Ok(Step::Split(
                    children(cell.lo, cell.hi)
                        .into_iter()
                        .map(|(lo, hi)| Cell {
                            lo,
                            hi,
                            depth: cell.depth + 1,
                            coarse: None,
                        })
                        .collect(),
                ))
            }
        }
    }
}

/// Annular piece `inner < |z − center| < outer` used by the polar rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Annulus {
    pub center: Complex64,
    pub inner: f64,
    pub outer: f64,
}

impl PlanarSet for Annulus {
    fn contains(&self, z: Complex64) -> bool {
        let d = (z - self.center).norm();
        self.inner <= d && d < self.outer
    }

    fn classify(&self, lo: Complex64, hi: Complex64) -> CellClass {
        let outer = classify_disc(self.center, self.outer, lo, hi);
        if self.inner > 0.0 {
            let hole = match classify_disc(self.center, self.inner, lo, hi) {
                CellClass::Inside => CellClass::Outside,
                CellClass::Outside => CellClass::Inside,
                CellClass::Straddle => CellClass::Straddle,
            };
            outer.and(hole)
        } else {
            outer
        }
    }
}

/// Intersection of planar sets.
pub struct Intersection<'a>(pub Vec<&'a dyn PlanarSet>);

impl PlanarSet for Intersection<'_> {
    fn contains(&self, z: Complex64) -> bool {
        self.0.iter().all(|s| s.contains(z))
    }

    fn classify(&self, lo: Complex64, hi: Complex64) -> CellClass {
        let mut acc = CellClass::Inside;
        for s in &self.0 {
            acc = acc.and(s.classify(lo, hi));
            if acc == CellClass::Outside {
                break;
            }
        }
        acc
    }
}

/// Polar Gauss–Legendre × trapezoid rule on an annulus. The orders double
/// until successive results agree to `tol` (or the order cap is reached);
/// the last difference is the error estimate.
pub fn integrate_annulus<F>(piece: &Annulus, dim: usize, f: F, tol: f64) -> Result<Quadrature<Vec<Complex64>>>
where
    F: Fn(Complex64, &mut [Complex64]) + Sync,
{
    let mut radial = 16usize;
    let mut angular = 32usize;
    let mut prev = polar_rule(piece, dim, &f, radial, angular)?;
    loop {
        radial *= 2;
        angular *= 2;
        let cur = polar_rule(piece, dim, &f, radial, angular)?;
        let err = diff_norm(&cur, &prev);
        if err <= tol || radial >= 1024 {
            return Ok(Quadrature {
                value: cur,
                error_estimate: err,
                cells: radial * angular,
                exhausted: err > tol,
            });
        }
        prev = cur;
    }
}

fn polar_rule<F>(piece: &Annulus, dim: usize, f: &F, radial: usize, angular: usize) -> Result<Vec<Complex64>>
where
    F: Fn(Complex64, &mut [Complex64]) + Sync,
{
    let (x, w) = gauss_legendre(radial);
    let half = 0.5 * (piece.outer - piece.inner);
    let mid = 0.5 * (piece.outer + piece.inner);
    let rows: Vec<Result<Vec<Complex64>>> = (0..radial)
        .into_par_iter()
        .map(|i| {
            let s = mid + half * x[i];
            let wr = w[i] * half * s * 2.0 * PI / angular as f64;
            let mut acc = vec![Complex64::new(0.0, 0.0); dim];
            let mut buf = vec![Complex64::new(0.0, 0.0); dim];
            for k in 0..angular {
                let z = piece.center + Complex64::from_polar(s, 2.0 * PI * k as f64 / angular as f64);
                f(z, &mut buf);
                if !max_norm(&buf).is_finite() {
                    return Err(Error::SingularSample { point: z });
                }
                for (a, b) in acc.iter_mut().zip(&buf) {
                    *a += b * wr;
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total = vec![Complex64::new(0.0, 0.0); dim];
    for row in rows {
        for (a, b) in total.iter_mut().zip(&row?) {
            *a += b;
        }
    }
    Ok(total)
}

/// Signed decomposition of a region into annuli, when it has one.
pub(crate) fn polar_pieces(region: &SubregionSpec, ambient_radius: f64) -> Option<Vec<(f64, Annulus)>> {
    let zero = Complex64::new(0.0, 0.0);
    let disc = |c: Complex64, r: f64| Annulus {
        center: c,
        inner: 0.0,
        outer: r,
    };
    match region {
        SubregionSpec::Disc { .. } | SubregionSpec::Horodisc { .. } => {
            let (c, r) = region.as_disc()?;
            Some(vec![(1.0, disc(c, r))])
        }
        SubregionSpec::HorocyclicStrip {
            tangency_angle,
            rho1,
            rho2,
        } => {
            let (c2, r2) = horodisc_circle(*tangency_angle, *rho2);
            let (c1, r1) = horodisc_circle(*tangency_angle, *rho1);
            Some(vec![(1.0, disc(c2, r2)), (-1.0, disc(c1, r1))])
        }
        SubregionSpec::DilatedCopy { rho } => Some(vec![(1.0, disc(zero, rho * ambient_radius))]),
        SubregionSpec::ProductRegion { factors } if factors.len() == 1 => Some(vec![(
            1.0,
            Annulus {
                center: zero,
                inner: factors[0].inner,
                outer: factors[0].outer,
            },
        )]),
        SubregionSpec::Complement { inner } => {
            let mut pieces = vec![(1.0, disc(zero, ambient_radius))];
            for (s, p) in polar_pieces(inner, ambient_radius)? {
                pieces.push((-s, p));
            }
            Some(pieces)
        }
        _ => None,
    }
}

/// Integral of `f` over `U` for a planar ambient domain.
///
/// Disc-shaped regions (and signed combinations of them) use the polar rule
/// unless `opts.polar_for_discs` is off; everything else uses the quadtree
/// over the ambient bounding box.
pub fn quadrature_integral<F>(
    region: &SubregionSpec,
    ambient: &AmbientDomain,
    f: F,
    opts: &QuadratureOptions,
) -> Result<Quadrature<Complex64>>
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    let q = integrate_region(region, ambient, 1, |z, out| out[0] = f(z), opts)?;
    Ok(Quadrature {
        value: q.value[0],
        error_estimate: q.error_estimate,
        cells: q.cells,
        exhausted: q.exhausted,
    })
}

/// Vector-valued form of [`quadrature_integral`].
pub fn integrate_region<F>(
    region: &SubregionSpec,
    ambient: &AmbientDomain,
    dim: usize,
    f: F,
    opts: &QuadratureOptions,
) -> Result<Quadrature<Vec<Complex64>>>
where
    F: Fn(Complex64, &mut [Complex64]) + Sync,
{
    let radius = ambient.require_planar("quadrature")?;
    region.validate(ambient)?;
    if opts.polar_for_discs {
        if let Some(pieces) = polar_pieces(region, radius) {
            let mut value = vec![Complex64::new(0.0, 0.0); dim];
            let mut err = 0.0;
            let mut cells = 0;
            let mut exhausted = false;
            for (sign, piece) in &pieces {
                let q = integrate_annulus(piece, dim, &f, opts.tol / pieces.len() as f64)?;
                for (a, b) in value.iter_mut().zip(&q.value) {
                    *a += b * *sign;
                }
                err += q.error_estimate;
                cells += q.cells;
                exhausted |= q.exhausted;
            }
            return Ok(Quadrature {
                value,
                error_estimate: err,
                cells,
                exhausted,
            });
        }
    }
    let set = PlanarRegion::new(region, ambient)?;
    let lo = Complex64::new(-radius, -radius);
    let hi = Complex64::new(radius, radius);
    integrate_cells(&set, lo, hi, dim, f, opts)
}
