use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::AmbientDomain;

/// Rows `0..=n` of Pascal's triangle as floats.
pub(crate) fn binomial_table(n: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let mut row = vec![1.0; j + 1];
        for m in 1..j {
            row[m] = rows[j - 1][m - 1] + rows[j - 1][m];
        }
        rows.push(row);
    }
    rows
}

fn check_disc(ambient: &AmbientDomain, center: Complex64, radius: f64) -> Result<f64> {
    let big = ambient.require_planar("disc moments")?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid("disc radius must be positive"));
    }
    if center.norm() + radius > big * (1.0 + 1e-12) {
        return Err(Error::domain("disc is not contained in the ambient disc"));
    }
    Ok(big)
}

/// `∫_{|z − c| < r} z^j conj(z)^k dV` by expanding `z = c + w` binomially:
/// only the `w^m conj(w)^m` terms survive the angular integration.
pub fn disc_moment(ambient: &AmbientDomain, center: Complex64, radius: f64, j: usize, k: usize) -> Result<Complex64> {
    check_disc(ambient, center, radius)?;
    let binom = binomial_table(j.max(k));
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 0..=j.min(k) {
        let term = binom[j][m] * binom[k][m] * PI * radius.powi(2 * m as i32 + 2) / (m as f64 + 1.0);
        acc += center.powu((j - m) as u32) * center.conj().powu((k - m) as u32) * term;
    }
    Ok(acc)
}

/// Normalized moment matrix `⟨φ_j, φ_k⟩_{D(c, r)}` for degrees `0..order`.
///
/// The matrix is assembled for the real centre `|c|` and then conjugated by
/// the diagonal unitary `diag(e^{ijθ})`, so rotating the disc rotates the
/// matrix exactly.
pub fn disc_gram(ambient: &AmbientDomain, center: Complex64, radius: f64, order: usize) -> Result<Vec<Complex64>> {
    let big = check_disc(ambient, center, radius)?;
    let a = center.norm();
    let theta = if a > 0.0 { center.arg() } else { 0.0 };
    let binom = binomial_table(order);

    // ‖z^j‖ on the ambient disc of radius `big`
    let norm = |j: usize| (PI * big.powi(2 * j as i32 + 2) / (j as f64 + 1.0)).sqrt();
    let r_pow: Vec<f64> = (0..order).map(|m| PI * radius.powi(2 * m as i32 + 2) / (m as f64 + 1.0)).collect();
    let a_pow: Vec<f64> = (0..order).map(|p| a.powi(p as i32)).collect();
    let phases: Vec<Complex64> = (0..order).map(|j| Complex64::from_polar(1.0, j as f64 * theta)).collect();

    let mut g = vec![Complex64::new(0.0, 0.0); order * order];
    for j in 0..order {
        for k in j..order {
            let mut s = 0.0;
            for m in 0..=j {
                s += binom[j][m] * binom[k][m] * a_pow[j - m] * a_pow[k - m] * r_pow[m];
            }
            let v = s / (norm(j) * norm(k));
            let phase = phases[j] * phases[k].conj();
            g[j * order + k] = phase * v;
            g[k * order + j] = phase.conj() * v;
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    const D: AmbientDomain = AmbientDomain::UnitDisc;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn centered_disc_examples() {
        let rho: f64 = 0.7;
        for j in 0..6 {
            let v = disc_moment(&D, c(0.0, 0.0), rho, j, j).unwrap();
            let want = PI * rho.powi(2 * j as i32 + 2) / (j as f64 + 1.0);
            assert!((v.re - want).abs() < 1e-15 && v.im == 0.0);
            let off = disc_moment(&D, c(0.0, 0.0), rho, j, j + 2).unwrap();
            assert_eq!(off, c(0.0, 0.0));
        }
    }

    #[test]
    fn first_moment_of_shifted_disc() {
        let v = disc_moment(&D, c(0.3, 0.0), 0.2, 1, 0).unwrap();
        assert!((v - c(0.012 * PI, 0.0)).norm() < 1e-16);
    }

    #[test]
    fn containment_is_enforced() {
        assert!(disc_moment(&D, c(0.6, 0.0), 0.5, 0, 0).is_err());
        assert!(disc_gram(&D, c(0.0, 0.7), 0.31, 4).is_err());
        // tangency is allowed
        assert!(disc_gram(&D, c(0.5, 0.0), 0.5, 4).is_ok());
    }

    #[test]
    fn gram_matches_raw_moments() {
        let center = c(0.2, -0.35);
        let r = 0.4;
        let g = disc_gram(&D, center, r, 6).unwrap();
        for j in 0..6 {
            for k in 0..6 {
                let raw = disc_moment(&D, center, r, j, k).unwrap();
                let nj = (PI / (j as f64 + 1.0)).sqrt();
                let nk = (PI / (k as f64 + 1.0)).sqrt();
                assert!((g[j * 6 + k] - raw / (nj * nk)).norm() < 1e-15, "{j} {k}");
            }
        }
    }

    #[test]
    fn pascal_rows() {
        let t = binomial_table(6);
        assert_eq!(t[6], vec![1.0, 6.0, 15.0, 20.0, 15.0, 6.0, 1.0]);
    }
}
