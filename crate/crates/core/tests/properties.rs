use std::f64::consts::PI;

use bergman_lab::geometry::{geodesic_side_circle, AmbientDomain, MoebiusMap, SubregionSpec};
use bergman_lab::moments::{gram, MomentRequest};
use bergman_lab::toeplitz::{eigensolve, hermitian_eigenvalues};
use num_complex::Complex64;
use proptest::prelude::*;

fn point(radius: f64) -> impl Strategy<Value = Complex64> {
    (0.0..radius, 0.0..2.0 * PI).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

fn automorphism() -> impl Strategy<Value = MoebiusMap> {
    (point(0.9), -PI..PI).prop_map(|(a, phase)| MoebiusMap::new(a, phase).unwrap())
}

/// Roots of `λ³ + bλ² + cλ + d` when all three are real, descending.
fn real_cubic_roots(b: f64, c: f64, d: f64) -> [f64; 3] {
    let shift = -b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    if p.abs() < 1e-300 {
        let r = (-q).cbrt() + shift;
        return [r, r, r];
    }
    let m = 2.0 * (-p / 3.0).sqrt();
    let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
    let theta = arg.acos() / 3.0;
    let mut roots = [0.0; 3];
    for (k, r) in roots.iter_mut().enumerate() {
        *r = m * (theta - 2.0 * PI * k as f64 / 3.0).cos() + shift;
    }
    roots.sort_by(|x, y| y.total_cmp(x));
    roots
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn moebius_group_law(f in automorphism(), g in automorphism(), z in point(0.95)) {
        let fg = f.compose(&g);
        let direct = f.apply(g.apply(z));
        prop_assert!((fg.apply(z) - direct).norm() < 1e-9);
        prop_assert!((f.apply_inverse(f.apply(z)) - z).norm() < 1e-9);
        prop_assert!((f.inverse().apply(f.apply(z)) - z).norm() < 1e-9);
        prop_assert!(f.apply(z).norm() < 1.0);
    }

    #[test]
    fn geodesic_circle_is_orthogonal(t1 in 0.0..2.0 * PI, gap in 0.05..(PI - 0.05)) {
        let a = Complex64::from_polar(1.0, t1);
        let b = Complex64::from_polar(1.0, t1 + gap);
        let (c, r) = geodesic_side_circle(a, b).unwrap();
        prop_assert!((c.norm_sqr() - 1.0 - r * r).abs() <= 1e-9 * c.norm_sqr());
        prop_assert!(((a - c).norm() - r).abs() <= 1e-9 * r.max(1.0));
        prop_assert!(((b - c).norm() - r).abs() <= 1e-9 * r.max(1.0));
    }

    #[test]
    fn complement_adds_to_identity(c in point(0.5), r in 0.05..0.45f64) {
        let disc = AmbientDomain::UnitDisc;
        let u = SubregionSpec::disc(c, r);
        let a = gram(&MomentRequest::new(disc.clone(), u.clone(), 12)).unwrap();
        let b = gram(&MomentRequest::new(disc, SubregionSpec::complement(u), 12)).unwrap();
        for j in 0..12 {
            for k in 0..12 {
                let id = if j == k { 1.0 } else { 0.0 };
                prop_assert!((a.get(j, k) + b.get(j, k) - id).norm() <= 1e-10);
            }
        }
        let s = eigensolve(&a).unwrap();
        prop_assert!(s.bottom() >= -s.tolerance() && s.top() <= 1.0 + s.tolerance());
    }

    #[test]
    fn jacobi_matches_characteristic_polynomial(
        d in prop::array::uniform3(-2.0..2.0f64),
        off in prop::array::uniform6(-1.0..1.0f64),
    ) {
        let z = |re: f64, im: f64| Complex64::new(re, im);
        let (x, y, w) = (z(off[0], off[1]), z(off[2], off[3]), z(off[4], off[5]));
        let m = [
            z(d[0], 0.0), x, y,
            x.conj(), z(d[1], 0.0), w,
            y.conj(), w.conj(), z(d[2], 0.0),
        ];
        let trace = d[0] + d[1] + d[2];
        let minors = d[0] * d[1] - x.norm_sqr() + d[0] * d[2] - y.norm_sqr() + d[1] * d[2] - w.norm_sqr();
        let det = d[0] * (d[1] * d[2] - w.norm_sqr()) - d[1] * y.norm_sqr() - d[2] * x.norm_sqr()
            + 2.0 * (x * w * y.conj()).re;
        let want = real_cubic_roots(-trace, minors, -det);
        let (got, _) = hermitian_eigenvalues(&m, 3).unwrap();
        for (g, w) in got.iter().zip(want) {
            prop_assert!((g - w).abs() <= 1e-8, "{got:?} vs {want:?}");
        }
    }
}
