//! Trace and Schatten norms of Toeplitz compressions, and the iterated
//! kernels `B^{(p)}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{AmbientDomain, PlanarRegion, SubregionSpec};
use crate::kernels::{kernel_diag_unchecked, MonomialBasis};
use crate::moments::{
    gauss_legendre, gram, integrate_annulus, matmul, polar_pieces, quadrature_integral, Annulus, GramMatrix,
    MomentRequest, QuadratureOptions,
};
use crate::toeplitz::eigensolve;

/// Controls for [`trace_by_formula`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions {
    /// Relative target for the ring sum and its tail.
    pub tol: f64,
    /// Last dyadic ring `1 − 2^{−k} ≤ |z| < 1 − 2^{−k−1}` examined.
    pub max_ring: u32,
    /// Successive rings whose contributions must fail to shrink before the
    /// integral is declared divergent.
    pub divergence_window: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            tol: 1e-9,
            max_ring: 48,
            divergence_window: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEstimate {
    pub value: f64,
    pub error_estimate: f64,
    /// Contribution of each boundary ring, innermost first (empty on the
    /// compact path).
    pub ring_contributions: Vec<f64>,
    /// Geometric bound on the rings not integrated.
    pub tail_bound: f64,
}

/// First ring of the boundary layer; everything inside `|z| < 1 − 2^{−3}`
/// is integrated as one core piece.
const FIRST_RING: u32 = 3;

fn disc_kernel_radial(s: f64) -> f64 {
    let t = 1.0 - s * s;
    1.0 / (PI * t * t)
}

/// `‖T_U‖_{S_1} = ∫_U B(ζ, ζ) dV(ζ)` over the unit disc.
///
/// Compactly contained disc-like regions use the polar rule directly. Any
/// other region is integrated radially, `∫ B(s) L(s) s ds` with `L(s)` the
/// angular measure of `U` on the circle of radius `s`, over a core disc and
/// then dyadic rings toward the boundary. The ring sums must shrink
/// geometrically; otherwise `NonTraceClass` is returned.
pub fn trace_by_formula(region: &SubregionSpec, ambient: &AmbientDomain, opts: &TraceOptions) -> Result<TraceEstimate> {
    if *ambient != AmbientDomain::UnitDisc {
        return Err(Error::unsupported("the trace formula is implemented on the unit disc"));
    }
    region.validate(ambient)?;
    if let Some(pieces) = polar_pieces(region, 1.0) {
        if pieces.iter().all(|(_, p)| p.center.norm() + p.outer < 1.0 - 1e-9) {
            let q = quadrature_integral(
                region,
                ambient,
                |z| Complex64::new(kernel_diag_unchecked(ambient, &[z]), 0.0),
                &QuadratureOptions::default().with_tol(1e-13),
            )?;
            return Ok(TraceEstimate {
                value: q.value.re,
                error_estimate: q.error_estimate,
                ring_contributions: Vec::new(),
                tail_bound: 0.0,
            });
        }
    }
    let planar = PlanarRegion::new(region, ambient)?;
    let measure = |s: f64| planar.angular_measure(s).unwrap_or_else(|| sampled_measure(&planar, s));
    let f = |s: f64| s * measure(s) * disc_kernel_radial(s);
    radial_rings(&f, opts)
}

fn radial_rings(f: &dyn Fn(f64) -> f64, opts: &TraceOptions) -> Result<TraceEstimate> {
    let rule = gauss_legendre(10);
    let core_hi = 1.0 - 0.5f64.powi(FIRST_RING as i32);
    let (mut value, mut err) = adaptive(f, &rule, 0.0, core_hi, 1e-15)?;
    let mut rings = Vec::new();
    let mut tail_bound = f64::INFINITY;
    let w = opts.divergence_window;
    for k in FIRST_RING..=opts.max_ring {
        let lo = 1.0 - 0.5f64.powi(k as i32);
        let hi = 1.0 - 0.5f64.powi(k as i32 + 1);
        // rounding in L(s) is amplified by the kernel; past this point the
        // ring sums are dominated by it
        let full_ring = 1.0 / (1.0 - hi * hi) - 1.0 / (1.0 - lo * lo);
        let noise = 1e-15 * full_ring;
        if let Some(&last) = rings.last() {
            if noise > 1e-3 * last && last > 0.0 {
                break;
            }
        }
        let (v, e) = adaptive(f, &rule, lo, hi, 1e-15 + 1e-3 * opts.tol * value.abs())?;
        rings.push(v);
        value += v;
        err += e + noise;

        let n = rings.len();
        if n > w {
            let ratios: Vec<f64> = (n - w..n).map(|i| rings[i] / rings[i - 1]).collect();
            if ratios.iter().all(|r| *r > 0.9) {
                return Err(Error::NonTraceClass { ring_contributions: rings });
            }
        }
        if n >= 3 && rings[n - 3..].iter().all(|c| *c == 0.0) {
            tail_bound = 0.0;
            break;
        }
        if n >= 4 {
            let r = (n - 3..n)
                .filter(|&i| rings[i - 1] > 0.0)
                .map(|i| rings[i] / rings[i - 1])
                .fold(0.0, f64::max);
            tail_bound = if r < 1.0 { rings[n - 1] * r / (1.0 - r) } else { f64::INFINITY };
            if tail_bound <= opts.tol * value.abs() {
                break;
            }
        }
    }
    Ok(TraceEstimate {
        value,
        error_estimate: err + tail_bound,
        ring_contributions: rings,
        tail_bound,
    })
}

/// Globally adaptive Gauss–Legendre on `[a, b]`: repeatedly halves the piece
/// with the largest error until the summed error is below `tol` or the
/// piece budget is spent.
fn adaptive(f: &dyn Fn(f64) -> f64, rule: &(Vec<f64>, Vec<f64>), a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
    const MAX_PIECES: usize = 4000;
    let gl = |a: f64, b: f64| -> f64 {
        let (x, w) = rule;
        let h = 0.5 * (b - a);
        let m = 0.5 * (a + b);
        x.iter().zip(w).map(|(x, w)| w * f(m + h * x)).sum::<f64>() * h
    };
    // (a, b, value, error) with error from comparing against the two halves
    let piece = |a: f64, b: f64| -> Result<(f64, f64, f64, f64)> {
        let m = 0.5 * (a + b);
        let (whole, l, r) = (gl(a, b), gl(a, m), gl(m, b));
        let err = (l + r - whole).abs();
        if !err.is_finite() {
            return Err(Error::SingularSample {
                point: Complex64::new(m, 0.0),
            });
        }
        Ok((a, b, l + r, err))
    };
    let mut pieces = vec![piece(a, b)?];
    loop {
        let err: f64 = pieces.iter().map(|p| p.3).sum();
        let value: f64 = pieces.iter().map(|p| p.2).sum();
        let floor = 1e-14 * pieces.iter().map(|p| p.2.abs()).sum::<f64>();
        if err <= tol.max(floor) || pieces.len() >= MAX_PIECES {
            return Ok((value, err));
        }
        let worst = (0..pieces.len())
            .max_by(|&i, &j| pieces[i].3.total_cmp(&pieces[j].3))
            .expect("non-empty");
        let (a, b, _, _) = pieces.swap_remove(worst);
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            return Ok((value, err));
        }
        pieces.push(piece(a, m)?);
        pieces.push(piece(m, b)?);
    }
}

/// Angular measure by sampling the circle and bisecting every membership
/// change; used when the region has no exact boundary description.
fn sampled_measure(set: &PlanarRegion, s: f64) -> f64 {
    use crate::geometry::PlanarSet;
    const M: usize = 4096;
    let at = |t: f64| set.contains(Complex64::from_polar(s, t));
    let step = 2.0 * PI / M as f64;
    let inside: Vec<bool> = (0..M).map(|k| at(k as f64 * step)).collect();
    let mut total = 0.0;
    for k in 0..M {
        let (a, b) = (inside[k], inside[(k + 1) % M]);
        let t0 = k as f64 * step;
        if a == b {
            if a {
                total += step;
            }
            continue;
        }
        let (mut lo, mut hi) = (t0, t0 + step);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if at(mid) == a {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let cut = 0.5 * (lo + hi) - t0;
        total += if a { cut } else { step - cut };
    }
    total
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchattenReport {
    pub p: f64,
    pub order: usize,
    /// `(Σ λ_j^p)^{1/p}` over the compression eigenvalues clamped to `[0, 1]`.
    pub value_matrix: f64,
    /// `(tr G^p)^{1/p}` for integer `p`.
    pub value_matrix_power: Option<f64>,
    /// The trace formula, for `p = 1`, when requested.
    pub value_trace_formula: Option<f64>,
    /// Geometric extrapolation of the diagonal beyond the truncation;
    /// infinite when the diagonal does not decay.
    pub tail_bound: f64,
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("Schatten exponent must be positive and finite, got {p}")))
    }
}

/// Trace of `G^p` by repeated multiplication.
pub fn trace_of_power(g: &GramMatrix, p: u32) -> f64 {
    let n = g.dim();
    if p == 0 {
        return n as f64;
    }
    let mut acc = g.entries.clone();
    for _ in 1..p {
        acc = matmul(&acc, &g.entries, n);
    }
    (0..n).map(|j| acc[j * n + j].re).sum()
}

/// Heuristic tail of `Σ λ^p` past the truncation, from the decay of the
/// per-degree sums of the diagonal.
fn diagonal_tail(g: &GramMatrix, p: f64) -> f64 {
    let degree_of = |j: usize| g.index_list[j].degree() as usize;
    let top = g.index_list.iter().map(|a| a.degree() as usize).max().unwrap_or(0);
    if top < 1 {
        return f64::INFINITY;
    }
    let mut sums = vec![0.0; top + 1];
    for (j, d) in g.diagonal().iter().enumerate() {
        sums[degree_of(j)] += d.clamp(0.0, 1.0).powf(p);
    }
    let (last, prev) = (sums[top], sums[top - 1]);
    if last == 0.0 {
        return 0.0;
    }
    let q = last / prev;
    if q < 1.0 {
        last * q / (1.0 - q)
    } else {
        f64::INFINITY
    }
}

/// Schatten `p`-norm of the compression, with the matrix-power cross-check
/// for integer `p` (agreement to 1e-10 is enforced).
pub fn schatten_norm(g: &GramMatrix, p: f64) -> Result<SchattenReport> {
    check_p(p)?;
    let spec = eigensolve(g)?;
    let sum: f64 = spec.eigenvalues.iter().map(|l| l.clamp(0.0, 1.0).powf(p)).sum();
    let value_matrix = sum.powf(1.0 / p);
    let value_matrix_power = if p.fract() == 0.0 && p <= 64.0 {
        let t = trace_of_power(g, p as u32);
        let v = t.max(0.0).powf(1.0 / p);
        let difference = (v - value_matrix).abs();
        if difference > 1e-10 * value_matrix.max(1.0) {
            return Err(Error::CrossCheck {
                what: format!("eigenvalue and matrix-power Schatten {p}-norms"),
                difference,
            });
        }
        Some(v)
    } else {
        None
    };
    let tail_sum = diagonal_tail(g, p);
    let tail_bound = (sum + tail_sum).powf(1.0 / p) - value_matrix;
    Ok(SchattenReport {
        p,
        order: g.order,
        value_matrix,
        value_matrix_power,
        value_trace_formula: None,
        tail_bound,
    })
}

/// `‖R_U‖_{S_p} = ‖T_U‖_{S_{2p}}^{1/2}` at the compression's order.
pub fn restriction_schatten_norm(g: &GramMatrix, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(schatten_norm(g, 2.0 * p)?.value_matrix.sqrt())
}

/// Gram compression, its Schatten norm and, for `p = 1` on the disc, the
/// trace formula alongside.
pub fn schatten_report(
    ambient: &AmbientDomain,
    region: &SubregionSpec,
    order: usize,
    p: f64,
    trace: Option<&TraceOptions>,
) -> Result<SchattenReport> {
    let g = gram(&MomentRequest::new(ambient.clone(), region.clone(), order))?;
    let mut report = schatten_norm(&g, p)?;
    if let (Some(opts), true) = (trace, p == 1.0) {
        report.value_trace_formula = Some(trace_by_formula(region, ambient, opts)?.value);
    }
    Ok(report)
}

/// Largest admissible `|z|/R` for truncated kernel sums.
pub const KERNEL_RADIUS_LIMIT: f64 = 0.95;

fn relative_size(ambient: &AmbientDomain, z: &[Complex64]) -> f64 {
    match ambient {
        AmbientDomain::UnitDisc => z[0].norm(),
        AmbientDomain::UnitBall { .. } => z.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt(),
        AmbientDomain::Polydisc { radii } => z.iter().zip(radii).map(|(w, r)| w.norm() / r).fold(0.0, f64::max),
    }
}

/// `Σ_{j,k} (G^{p−1})_{jk} φ_k(z) conj(φ_j(z))`, the order-`N` truncation of
/// `B^{(p)}(z, z)`. Requires `|z| ≤ 0.95` (relative to the ambient size) so
/// that the truncated sums are meaningful.
pub fn iterated_kernel_diag(g: &GramMatrix, p: u32, z: &[Complex64]) -> Result<f64> {
    if p == 0 {
        return Err(Error::invalid("iterated kernel needs p >= 1"));
    }
    g.ambient.check_point(z)?;
    if relative_size(&g.ambient, z) > KERNEL_RADIUS_LIMIT {
        return Err(Error::domain(format!(
            "truncated kernel sums are only evaluated for |z| <= {KERNEL_RADIUS_LIMIT}"
        )));
    }
    let basis = MonomialBasis::new(&g.ambient, g.order)?;
    let power = matrix_power(g, p - 1);
    Ok(iterated_unchecked(&basis, &power, z))
}

fn matrix_power(g: &GramMatrix, p: u32) -> Vec<Complex64> {
    let n = g.dim();
    let mut acc: Vec<Complex64> = (0..n * n)
        .map(|i| if i / n == i % n { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
        .collect();
    for _ in 0..p {
        acc = matmul(&acc, &g.entries, n);
    }
    acc
}

fn iterated_unchecked(basis: &MonomialBasis, power: &[Complex64], z: &[Complex64]) -> f64 {
    let phi = basis.evaluate(z);
    let n = phi.len();
    let mut s = Complex64::new(0.0, 0.0);
    for j in 0..n {
        let mut row = Complex64::new(0.0, 0.0);
        for k in 0..n {
            row += power[j * n + k] * phi[k];
        }
        s += row * phi[j].conj();
    }
    s.re
}

/// `∫_Ω B^{(p)}(z, z) dV` of the truncated iterated kernel over the whole
/// unit disc, by the polar rule.
pub fn iterated_kernel_integral(g: &GramMatrix, p: u32) -> Result<(f64, f64)> {
    if p == 0 {
        return Err(Error::invalid("iterated kernel needs p >= 1"));
    }
    let r = g.ambient.require_planar("the iterated kernel integral")?;
    let basis = MonomialBasis::new(&g.ambient, g.order)?;
    let power = matrix_power(g, p - 1);
    let piece = Annulus {
        center: Complex64::new(0.0, 0.0),
        inner: 0.0,
        outer: r,
    };
    let q = integrate_annulus(
        &piece,
        1,
        |z, out| out[0] = Complex64::new(iterated_unchecked(&basis, &power, &[z]), 0.0),
        1e-12,
    )?;
    Ok((q.value[0].re, q.error_estimate))
}
