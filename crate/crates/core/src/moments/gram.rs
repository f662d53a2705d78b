use num_complex::Complex64;
use serde::Serialize;

use super::disc::disc_gram;
use super::quadrature::{integrate_region, QuadratureOptions};
use crate::error::{Error, Result};
use crate::geometry::{horodisc_circle, AmbientDomain, MultiIndex, SubregionSpec};
use crate::kernels::MonomialBasis;

/// How the moment matrix is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentMethod {
    /// Closed form when the region admits one, quadrature otherwise.
    Auto,
    ClosedForm,
    Quadrature(QuadratureOptions),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentRequest {
    pub ambient: AmbientDomain,
    pub region: SubregionSpec,
    pub order: usize,
    pub method: MomentMethod,
}

impl MomentRequest {
    pub fn new(ambient: AmbientDomain, region: SubregionSpec, order: usize) -> Self {
        MomentRequest {
            ambient,
            region,
            order,
            method: MomentMethod::Auto,
        }
    }

    pub fn with_method(mut self, method: MomentMethod) -> Self {
        self.method = method;
        self
    }
}

/// Compression of the Toeplitz operator to the span of the first basis
/// elements: `G[j][k] = ⟨φ_j, φ_k⟩_U`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GramMatrix {
    #[serde(skip)]
    pub ambient: AmbientDomain,
    pub order: usize,
    pub index_list: Vec<MultiIndex>,
    pub entries: Vec<Complex64>,
    pub error_estimate: f64,
    /// Quadrature stopped on its budget before meeting the tolerance.
    #[serde(skip)]
    pub truncated_quality: bool,
}

impl GramMatrix {
    /// Number of rows (the basis size; equals `order` in one variable).
    pub fn dim(&self) -> usize {
        self.index_list.len()
    }

    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.entries[j * self.dim() + k]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|j| self.get(j, j).re).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    /// Largest entrywise deviation from Hermitian symmetry.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for k in j..n {
                worst = worst.max((self.get(j, k) - self.get(k, j).conj()).norm());
            }
        }
        worst
    }

    /// `I − G`, the compression for the complementary region.
    pub fn complement(&self) -> GramMatrix {
        let n = self.dim();
        let mut entries: Vec<Complex64> = self.entries.iter().map(|z| -z).collect();
        for j in 0..n {
            entries[j * n + j] += 1.0;
        }
        GramMatrix {
            entries,
            ..self.clone()
        }
    }

    fn from_entries(basis: &MonomialBasis, entries: Vec<Complex64>, error_estimate: f64) -> Self {
        GramMatrix {
            ambient: basis.ambient.clone(),
            order: basis.order,
            index_list: basis.index_list.clone(),
            entries,
            error_estimate,
            truncated_quality: false,
        }
    }

    /// Dense matrix product `self · other`.
    pub fn matmul(&self, other: &GramMatrix) -> Vec<Complex64> {
        matmul(&self.entries, &other.entries, self.dim())
    }
}

pub(crate) fn matmul(a: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for l in 0..n {
            let x = a[i * n + l];
            if x == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += x * b[l * n + j];
            }
        }
    }
    out
}

fn diag_entries(values: &[f64]) -> Vec<Complex64> {
    let n = values.len();
    let mut e = vec![Complex64::new(0.0, 0.0); n * n];
    for (j, v) in values.iter().enumerate() {
        e[j * n + j] = Complex64::new(*v, 0.0);
    }
    e
}

/// Whether `gram` can assemble this region without quadrature.
pub fn has_closed_form(region: &SubregionSpec, ambient: &AmbientDomain) -> bool {
    match region {
        SubregionSpec::Disc { .. } | SubregionSpec::Horodisc { .. } | SubregionSpec::HorocyclicStrip { .. } => {
            ambient.planar_radius().is_some()
        }
        SubregionSpec::DilatedCopy { .. } => true,
        SubregionSpec::ProductRegion { .. } => {
            matches!(ambient, AmbientDomain::Polydisc { .. }) || ambient.planar_radius().is_some()
        }
        SubregionSpec::Complement { inner } => has_closed_form(inner, ambient),
        _ => false,
    }
}

fn closed_form(region: &SubregionSpec, basis: &MonomialBasis) -> Result<Vec<Complex64>> {
    let ambient = &basis.ambient;
    let n = basis.len();
    match region {
        SubregionSpec::Disc { .. } | SubregionSpec::Horodisc { .. } => {
            let (c, r) = region.as_disc().expect("disc-like variant");
            disc_gram(ambient, c, r, n)
        }
        SubregionSpec::HorocyclicStrip {
            tangency_angle,
            rho1,
            rho2,
        } => {
            let (c2, r2) = horodisc_circle(*tangency_angle, *rho2);
            let (c1, r1) = horodisc_circle(*tangency_angle, *rho1);
            let outer = disc_gram(ambient, c2, r2, n)?;
            let inner = disc_gram(ambient, c1, r1, n)?;
            Ok(outer.iter().zip(&inner).map(|(a, b)| a - b).collect())
        }
        SubregionSpec::DilatedCopy { rho } => {
            // ‖z^α‖²_{ρΩ} / ‖z^α‖²_Ω = ρ^{2(|α| + n)}
            let dim = ambient.dim() as i32;
            let vals: Vec<f64> = basis
                .index_list
                .iter()
                .map(|a| rho.powi(2 * (a.degree() as i32 + dim)))
                .collect();
            Ok(diag_entries(&vals))
        }
        SubregionSpec::ProductRegion { factors } => {
            let radii: Vec<f64> = match ambient {
                AmbientDomain::Polydisc { radii } => radii.clone(),
                _ => vec![ambient.require_planar("a ProductRegion")?],
            };
            let vals: Vec<f64> = basis
                .index_list
                .iter()
                .map(|a| {
                    a.0.iter()
                        .zip(factors.iter().zip(&radii))
                        .map(|(k, (f, r))| {
                            let e = 2 * *k as i32 + 2;
                            (f.outer / r).powi(e) - (f.inner / r).powi(e)
                        })
                        .product()
                })
                .collect();
            Ok(diag_entries(&vals))
        }
        SubregionSpec::Complement { inner } => {
            let g = closed_form(inner, basis)?;
            let mut out: Vec<Complex64> = g.iter().map(|z| -z).collect();
            for j in 0..n {
                out[j * n + j] += 1.0;
            }
            Ok(out)
        }
        other => Err(Error::unsupported(format!(
            "no closed-form moments for {} regions",
            other.kind_name()
        ))),
    }
}

fn quadrature_gram(region: &SubregionSpec, basis: &MonomialBasis, opts: &QuadratureOptions) -> Result<GramMatrix> {
    let n = basis.len();
    basis.ambient.require_planar("quadrature moments")?;
    let norms = basis.norms.clone();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|j| (j..n).map(move |k| (j, k))).collect();
    let q = integrate_region(
        region,
        &basis.ambient,
        pairs.len(),
        |z, out| {
            let mut phi = Vec::with_capacity(n);
            let mut p = Complex64::new(1.0, 0.0);
            for norm in &norms {
                phi.push(p / *norm);
                p *= z;
            }
            for (slot, (j, k)) in out.iter_mut().zip(&pairs) {
                *slot = phi[*j] * phi[*k].conj();
            }
        },
        opts,
    )?;
    let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
    for ((j, k), v) in pairs.iter().zip(&q.value) {
        let v = if j == k { Complex64::new(v.re, 0.0) } else { *v };
        entries[j * n + k] = v;
        entries[k * n + j] = v.conj();
    }
    let mut g = GramMatrix::from_entries(basis, entries, q.error_estimate);
    g.truncated_quality = q.exhausted;
    Ok(g)
}

/// Compression of `T_U` in the normalized monomial basis.
///
/// Complements are always `I − G_inner`, whichever path computes the inner
/// matrix.
pub fn gram(request: &MomentRequest) -> Result<GramMatrix> {
    let MomentRequest {
        ambient,
        region,
        order,
        method,
    } = request;
    region.validate(ambient)?;
    let basis = MonomialBasis::new(ambient, *order)?;
    let closed = has_closed_form(region, ambient);
    match method {
        MomentMethod::ClosedForm if !closed => Err(Error::unsupported(format!(
            "no closed-form moments for {} regions",
            region.kind_name()
        ))),
        MomentMethod::Auto | MomentMethod::ClosedForm if closed => {
            Ok(GramMatrix::from_entries(&basis, closed_form(region, &basis)?, 0.0))
        }
        MomentMethod::Auto | MomentMethod::ClosedForm => {
            quadrature_gram_for(region, &basis, &QuadratureOptions::default().with_depth(10).with_tol(1e-8))
        }
        MomentMethod::Quadrature(opts) => quadrature_gram_for(region, &basis, opts),
    }
}

fn quadrature_gram_for(region: &SubregionSpec, basis: &MonomialBasis, opts: &QuadratureOptions) -> Result<GramMatrix> {
    if let SubregionSpec::Complement { inner } = region {
        return Ok(quadrature_gram_for(inner, basis, opts)?.complement());
    }
    quadrature_gram(region, basis, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RadialInterval;

    fn disc_gram_for(region: SubregionSpec, order: usize) -> GramMatrix {
        gram(&MomentRequest::new(AmbientDomain::UnitDisc, region, order)).unwrap()
    }

    #[test]
    fn dilation_is_diagonal() {
        let g = disc_gram_for(SubregionSpec::dilated(0.5), 4);
        assert_eq!(g.diagonal(), vec![0.25, 0.0625, 0.015625, 0.00390625]);
        let c = disc_gram_for(SubregionSpec::complement(SubregionSpec::dilated(0.5)), 4);
        assert_eq!(c.diagonal(), vec![0.75, 0.9375, 0.984375, 0.99609375]);
    }

    #[test]
    fn bidisc_product_region() {
        let amb = AmbientDomain::polydisc(vec![1.0, 1.0]);
        let region = SubregionSpec::product(vec![RadialInterval::new(0.0, 0.6), RadialInterval::new(0.4, 1.0)]);
        let g = gram(&MomentRequest::new(amb, region, 5)).unwrap();
        for (a, d) in g.index_list.iter().zip(g.diagonal()) {
            let want = 0.6f64.powi(2 * a.0[0] as i32 + 2) * (1.0 - 0.4f64.powi(2 * a.0[1] as i32 + 2));
            assert!((d - want).abs() < 1e-15);
        }
    }

    #[test]
    fn rotated_horodisc_is_unitarily_conjugate() {
        let g0 = disc_gram_for(SubregionSpec::horodisc(0.0, 0.5), 12);
        let theta = 1.234;
        let g = disc_gram_for(SubregionSpec::horodisc(theta, 0.5), 12);
        for j in 0..12 {
            for k in 0..12 {
                let phase = Complex64::from_polar(1.0, (j as f64 - k as f64) * theta);
                assert!((g.get(j, k) - phase * g0.get(j, k)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn forced_closed_form_on_lune_fails() {
        let req = MomentRequest::new(AmbientDomain::UnitDisc, SubregionSpec::lune(0.5, 2.0), 4)
            .with_method(MomentMethod::ClosedForm);
        assert!(matches!(gram(&req), Err(Error::Unsupported(_))));
    }

    #[test]
    fn quadrature_gram_of_lune_is_hermitian_and_bounded() {
        let req = MomentRequest::new(AmbientDomain::UnitDisc, SubregionSpec::lune(0.6, 2.0), 5).with_method(
            MomentMethod::Quadrature(QuadratureOptions::default().with_depth(7).with_tol(1e-6)),
        );
        let g = gram(&req).unwrap();
        assert!(g.hermitian_defect() == 0.0);
        for d in g.diagonal() {
            assert!(d > 0.0 && d < 1.0 + g.error_estimate);
        }
    }

    #[test]
    fn serialized_fields() {
        let g = disc_gram_for(SubregionSpec::dilated(0.5), 2);
        let v: serde_json::Value = serde_json::to_value(&g).unwrap();
        assert_eq!(v["order"], 2);
        assert_eq!(v["index_list"], serde_json::json!([[0], [1]]));
        assert_eq!(v["entries"][0], serde_json::json!([0.25, 0.0]));
        assert_eq!(v["error_estimate"], 0.0);
    }
}
