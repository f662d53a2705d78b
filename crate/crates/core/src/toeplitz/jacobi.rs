use num_complex::Complex64;

use crate::error::{Error, Result};

pub const OFF_DIAGONAL_TOL: f64 = 1e-13;
pub const MAX_SWEEPS: usize = 60;

fn off_norm(a: &[Complex64], n: usize) -> f64 {
    let mut s = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                s += a[p * n + q].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Eigenvalues of a Hermitian matrix (row-major, `n × n`) by cyclic Jacobi,
/// sorted descending, together with the final off-diagonal Frobenius norm.
pub fn hermitian_eigenvalues(matrix: &[Complex64], n: usize) -> Result<(Vec<f64>, f64)> {
    if matrix.len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            got: matrix.len(),
        });
    }
    let mut a = matrix.to_vec();
    for p in 0..n {
        a[p * n + p] = Complex64::new(a[p * n + p].re, 0.0);
    }
    let mut residual = off_norm(&a, n);
    let mut sweeps = 0;
    while residual > OFF_DIAGONAL_TOL {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, residual });
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, n, p, q);
            }
        }
        sweeps += 1;
        residual = off_norm(&a, n);
    }
    let mut eig: Vec<f64> = (0..n).map(|p| a[p * n + p].re).collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    Ok((eig, residual))
}

/// Annihilates `a[p][q]`: a diagonal phase makes it real, then a real plane
/// rotation finishes the job.
fn rotate(a: &mut [Complex64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    let g = apq.norm();
    if g == 0.0 {
        return;
    }
    let e = apq / g;
    for r in 0..n {
        if r != q {
            let v = a[r * n + q] * e.conj();
            a[r * n + q] = v;
            a[q * n + r] = v.conj();
        }
    }
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    let tau = (aqq - app) / (2.0 * g);
    let t = if tau == 0.0 {
        1.0
    } else {
        tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = a[r * n + p];
        let arq = a[r * n + q];
        let np = arp * c - arq * s;
        let nq = arp * s + arq * c;
        a[r * n + p] = np;
        a[p * n + r] = np.conj();
        a[r * n + q] = nq;
        a[q * n + r] = nq.conj();
    }
    a[p * n + p] = Complex64::new(app - t * g, 0.0);
    a[q * n + q] = Complex64::new(aqq + t * g, 0.0);
    a[p * n + q] = Complex64::new(0.0, 0.0);
    a[q * n + p] = Complex64::new(0.0, 0.0);
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_input_is_sorted_exactly() {
        let m = vec![c(0.0625, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.25, 0.0)];
        let (e, r) = hermitian_eigenvalues(&m, 2).unwrap();
        assert_eq!(e, vec![0.25, 0.0625]);
        assert_eq!(r, 0.0);
    }

    #[test]
    fn two_by_two_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a: f64 = rng.gen_range(-1.0..1.0);
            let d: f64 = rng.gen_range(-1.0..1.0);
            let b = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let m = vec![c(a, 0.0), b, b.conj(), c(d, 0.0)];
            let (e, _) = hermitian_eigenvalues(&m, 2).unwrap();
            let mean = 0.5 * (a + d);
            let rad = (0.25 * (a - d).powi(2) + b.norm_sqr()).sqrt();
            assert!((e[0] - (mean + rad)).abs() < 1e-12);
            assert!((e[1] - (mean - rad)).abs() < 1e-12);
        }
    }

    #[test]
    fn unitary_similarity_preserves_trace_and_frobenius() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 12;
        let mut m = vec![c(0.0, 0.0); n * n];
        for i in 0..n {
            for j in i..n {
                let v = if i == j {
                    c(rng.gen_range(-1.0..1.0), 0.0)
                } else {
                    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                };
                m[i * n + j] = v;
                m[j * n + i] = v.conj();
            }
        }
        let (e, r) = hermitian_eigenvalues(&m, n).unwrap();
        assert!(r <= OFF_DIAGONAL_TOL);
        let tr: f64 = (0..n).map(|i| m[i * n + i].re).sum();
        let fro: f64 = m.iter().map(|z| z.norm_sqr()).sum();
        assert!((e.iter().sum::<f64>() - tr).abs() < 1e-12);
        assert!((e.iter().map(|x| x * x).sum::<f64>() - fro).abs() < 1e-12);
        assert!(e.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn shape_is_checked() {
        assert!(hermitian_eigenvalues(&[c(1.0, 0.0); 3], 2).is_err());
    }
}
