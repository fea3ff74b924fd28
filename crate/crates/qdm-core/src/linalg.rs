//! Small dense complex linear algebra for Hilbert-space dimensions up to 64.

use num_complex::Complex64;

use crate::error::{QdmError, Result};

pub type C64 = Complex64;

/// Dense square complex matrix in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    pub n: usize,
    pub data: Vec<C64>,
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.n + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.n + c] = v;
    }

    pub fn matmul(&self, rhs: &CMat) -> CMat {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.n, v.len());
        let n = self.n;
        let mut out = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            let row = &self.data[i * n..(i + 1) * n];
            for (a, x) in row.iter().zip(v.iter()) {
                acc += a * x;
            }
            out[i] = acc;
        }
        out
    }

    pub fn adjoint(&self) -> CMat {
        let n = self.n;
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    /// ρ ↦ U ρ U†
    pub fn conjugate(&self, rho: &CMat) -> CMat {
        self.matmul(rho).matmul(&self.adjoint())
    }

    pub fn max_abs_diff(&self, rhs: &CMat) -> f64 {
        self.data
            .iter()
            .zip(rhs.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let n = self.n;
        for i in 0..n {
            for j in i..n {
                if (self.get(i, j) - self.get(j, i).conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }
}

/// Eigendecomposition of a Hermitian matrix by the cyclic complex Jacobi
/// method. Returns (eigenvalues, V) with columns of V the eigenvectors,
/// so that A = V diag(w) V†.
pub fn hermitian_eig(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    if !a.is_hermitian(1e-10) {
        return Err(QdmError::NonFinite("hermitian_eig: input not Hermitian"));
    }
    let n = a.n;
    let mut m = a.clone();
    let mut v = CMat::identity(n);

    let off = |m: &CMat| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m.get(i, j).norm_sqr();
                }
            }
        }
        s
    };

    for _sweep in 0..100 {
        if off(&m) < 1e-28 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq.norm() < 1e-300 {
                    continue;
                }
                let app = m.get(p, p).re;
                let aqq = m.get(q, q).re;
                // Unitary 2x2 rotation diagonalizing the (p,q) block:
                // [c, -s*e^{-i phi}; s*e^{i phi}, c] with apq = |apq| e^{i phi}.
                let phi = apq.arg();
                let abs_apq = apq.norm();
                let tau = (aqq - app) / (2.0 * abs_apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let eip = C64::from_polar(1.0, phi);
                // Columns rotate: col_p' = c*col_p - s*conj(e)*col_q ; col_q' = s*e*col_p + c*col_q
                for r in 0..n {
                    let mrp = m.get(r, p);
                    let mrq = m.get(r, q);
                    m.set(r, p, c * mrp - s * eip.conj() * mrq);
                    m.set(r, q, s * eip * mrp + c * mrq);
                }
                for cix in 0..n {
                    let mpc = m.get(p, cix);
                    let mqc = m.get(q, cix);
                    m.set(p, cix, c * mpc - s * eip * mqc);
                    m.set(q, cix, s * eip.conj() * mpc + c * mqc);
                }
                for r in 0..n {
                    let vrp = v.get(r, p);
                    let vrq = v.get(r, q);
                    v.set(r, p, c * vrp - s * eip.conj() * vrq);
                    v.set(r, q, s * eip * vrp + c * vrq);
                }
            }
        }
    }

    let w: Vec<f64> = (0..n).map(|i| m.get(i, i).re).collect();
    Ok((w, v))
}

/// exp(-i H t) for Hermitian H via eigendecomposition.
pub fn expm_neg_i_h_t(h: &CMat, t: f64) -> Result<CMat> {
    let (w, v) = hermitian_eig(h)?;
    let n = h.n;
    // V diag(e^{-i w t}) V†
    let mut out = CMat::zeros(n);
    for r in 0..n {
        for c in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                let phase = C64::from_polar(1.0, -w[k] * t);
                acc += v.get(r, k) * phase * v.get(c, k).conj();
            }
            out.set(r, c, acc);
        }
    }
    Ok(out)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(a: &CMat) -> Result<f64> {
    let (w, _) = hermitian_eig(a)?;
    Ok(w.into_iter().fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn random_hermitian(n: usize, seed: u64) -> CMat {
        use rand::Rng;
        let mut rng = crate::rng::sub_rng(seed, "test-herm", 0);
        let mut m = CMat::zeros(n);
        for i in 0..n {
            m.set(i, i, C64::new(rng.gen_range(-1.0..1.0), 0.0));
            for j in (i + 1)..n {
                let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                m.set(i, j, z);
                m.set(j, i, z.conj());
            }
        }
        m
    }

    #[test]
    fn jacobi_reconstructs_matrix() {
        for n in [2, 3, 8, 16] {
            let a = random_hermitian(n, n as u64);
            let (w, v) = hermitian_eig(&a).unwrap();
            // A = V diag(w) V†
            let mut recon = CMat::zeros(n);
            for r in 0..n {
                for c in 0..n {
                    let mut acc = C64::new(0.0, 0.0);
                    for k in 0..n {
                        acc += v.get(r, k) * w[k] * v.get(c, k).conj();
                    }
                    recon.set(r, c, acc);
                }
            }
            assert!(a.max_abs_diff(&recon) < 1e-11, "n={n}");
            // V unitary
            let vvd = v.matmul(&v.adjoint());
            assert!(vvd.max_abs_diff(&CMat::identity(n)) < 1e-12);
        }
    }

    #[test]
    fn expm_single_qubit_x_rotation() {
        // H = sigma_x, t = 0.3: exp(-i t X) = cos t I - i sin t X
        let mut h = CMat::zeros(2);
        h.set(0, 1, C64::new(1.0, 0.0));
        h.set(1, 0, C64::new(1.0, 0.0));
        let u = expm_neg_i_h_t(&h, 0.3).unwrap();
        assert_abs_diff_eq!(u.get(0, 0).re, 0.3f64.cos(), epsilon = 1e-12);
        assert_abs_diff_eq!(u.get(0, 1).im, -(0.3f64.sin()), epsilon = 1e-12);
    }

    #[test]
    fn expm_zero_time_is_identity() {
        let a = random_hermitian(8, 3);
        let u = expm_neg_i_h_t(&a, 0.0).unwrap();
        assert!(u.max_abs_diff(&CMat::identity(8)) < 1e-12);
    }
}
