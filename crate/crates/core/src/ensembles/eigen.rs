//! Hermitian eigensolver: Householder reduction to real symmetric tridiagonal
//! form followed by implicitly shifted QL iterations.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_QL_SWEEPS: usize = 60;

/// Dense complex matrix stored row-major. Only Hermitian inputs are accepted
/// by the eigensolver.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn zeros(n: usize) -> Self {
        HermitianMatrix {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), n, "matrix must be square");
            for (j, &v) in r.iter().enumerate() {
                m.set(i, j, Complex64::new(v, 0.0));
            }
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Complex64>(n: usize, mut f: F) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    /// Sets `(i, j)` to `v` and `(j, i)` to its conjugate.
    pub fn set_hermitian(&mut self, i: usize, j: usize, v: Complex64) {
        self.set(i, j, v);
        self.set(j, i, v.conj());
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i).re).sum()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation `|A - A*|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.n {
            for j in i..self.n {
                d = d.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        d
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.n.hash(&mut h);
        for z in &self.data {
            z.re.to_bits().hash(&mut h);
            z.im.to_bits().hash(&mut h);
        }
        h.finish()
    }
}

/// Eigenvalues (ascending) and, optionally, unit eigenvectors stored as
/// columns: `vectors[j]` belongs to `values[j]`.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Option<Vec<Vec<Complex64>>>,
}

impl Eigen {
    /// `max_j |A v_j - λ_j v_j|`.
    pub fn max_residual(&self, a: &HermitianMatrix) -> Option<f64> {
        let vecs = self.vectors.as_ref()?;
        Some(
            vecs.iter()
                .zip(&self.values)
                .map(|(v, &l)| {
                    a.mul_vec(v)
                        .iter()
                        .zip(v)
                        .map(|(av, vi)| (av - vi * l).norm_sqr())
                        .sum::<f64>()
                        .sqrt()
                })
                .fold(0.0, f64::max),
        )
    }
}

/// Sorted eigenvalues of a Hermitian matrix.
pub fn eig_hermitian(a: &HermitianMatrix) -> Result<Vec<f64>> {
    Ok(eig_hermitian_full(a, false)?.values)
}

/// Eigen-decomposition with optional eigenvectors.
pub fn eig_hermitian_full(a: &HermitianMatrix, want_vectors: bool) -> Result<Eigen> {
    let n = a.dim();
    if n == 0 {
        return Ok(Eigen {
            values: vec![],
            vectors: want_vectors.then(Vec::new),
        });
    }
    let scale = a.max_abs().max(1.0);
    let defect = a.hermitian_defect();
    if defect > 1e-12 * scale {
        return Err(Error::InvalidParameter(format!(
            "matrix is not Hermitian: max |A - A*| = {defect:.3e}"
        )));
    }
    let (diag, off, q) = householder_tridiagonalize(a, want_vectors);
    let mut d = diag;
    let mut e = off;
    let mut z = q;
    tql(&mut d, &mut e, z.as_mut()).map_err(|iterations| Error::EigenNoConvergence {
        iterations,
        n,
        fingerprint: a.fingerprint(),
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = z.map(|z| {
        order
            .iter()
            .map(|&j| (0..n).map(|i| z[i * n + j]).collect())
            .collect()
    });
    Ok(Eigen { values, vectors })
}

/// Reduces `a` to a real symmetric tridiagonal matrix `(diag, off)` with
/// `off[k]` coupling rows `k` and `k + 1`. When requested, also returns the
/// row-major unitary `Z` with `A = Z T Z*`.
fn householder_tridiagonalize(
    a: &HermitianMatrix,
    want_vectors: bool,
) -> (Vec<f64>, Vec<f64>, Option<Vec<Complex64>>) {
    let n = a.dim();
    let mut m = a.data.clone();
    // Hermitian by assumption: work on the lower triangle, keep the full
    // matrix updated so that the rank-2 update stays simple.
    let mut sub = vec![Complex64::new(0.0, 0.0); n.saturating_sub(1)];
    let mut reflectors: Vec<(usize, Vec<Complex64>, f64)> = Vec::new();
    let zero = Complex64::new(0.0, 0.0);
    let mut p = vec![zero; n];
    for k in 0..n.saturating_sub(1) {
        let len = n - k - 1;
        let mut v: Vec<Complex64> = (0..len).map(|i| m[(k + 1 + i) * n + k]).collect();
        let xnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if len == 1 || xnorm == 0.0 || v[1..].iter().all(|z| z.norm_sqr() == 0.0) {
            sub[k] = v[0];
            continue;
        }
        let phase = if v[0].norm() > 0.0 {
            v[0] / v[0].norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -phase * xnorm;
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let tau = 2.0 / vnorm2;
        // p = tau * A_sub v
        for i in 0..len {
            let row = (k + 1 + i) * n + k + 1;
            let mut s = zero;
            for (j, vj) in v.iter().enumerate() {
                s += m[row + j] * vj;
            }
            p[i] = s * tau;
        }
        // K = tau/2 * v^* p
        let vp: Complex64 = v.iter().zip(&p[..len]).map(|(vi, pi)| vi.conj() * pi).sum();
        let kk = vp * (0.5 * tau);
        for i in 0..len {
            p[i] -= kk * v[i];
        }
        // A_sub -= v q^* + q v^*
        for i in 0..len {
            let row = (k + 1 + i) * n + k + 1;
            let vi = v[i];
            let qi = p[i];
            for j in 0..len {
                m[row + j] -= vi * p[j].conj() + qi * v[j].conj();
            }
        }
        sub[k] = alpha;
        for i in 1..len {
            m[(k + 1 + i) * n + k] = zero;
            m[k * n + k + 1 + i] = zero;
        }
        if want_vectors {
            reflectors.push((k, v, tau));
        }
    }
    let diag: Vec<f64> = (0..n).map(|i| m[i * n + i].re).collect();
    // Phase scaling D makes the subdiagonal real and nonnegative.
    let mut d = vec![Complex64::new(1.0, 0.0); n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    for k in 0..n.saturating_sub(1) {
        let r = sub[k].norm();
        off[k] = r;
        d[k + 1] = if r > 0.0 { d[k] * sub[k] / r } else { d[k] };
    }
    let z = want_vectors.then(|| {
        // Z = H_0 H_1 ... H_{n-3} D, built by applying reflectors in reverse.
        let mut z = vec![zero; n * n];
        for i in 0..n {
            z[i * n + i] = d[i];
        }
        for (k, v, tau) in reflectors.iter().rev() {
            let off0 = k + 1;
            for col in 0..n {
                let mut s = zero;
                for (i, vi) in v.iter().enumerate() {
                    s += vi.conj() * z[(off0 + i) * n + col];
                }
                s *= *tau;
                for (i, vi) in v.iter().enumerate() {
                    z[(off0 + i) * n + col] -= vi * s;
                }
            }
        }
        z
    });
    (diag, off, z)
}

/// Implicit QL with Wilkinson-type shifts on a symmetric tridiagonal matrix.
/// `off[k]` couples `k` and `k + 1`. Rotations are accumulated into the
/// row-major `z` when given. Returns the failing eigen-index on
/// non-convergence.
/// `√(a² + b²)`, falling back to the careful `hypot` only when the naive
/// square would overflow or underflow.
#[inline]
fn fast_hypot(a: f64, b: f64) -> f64 {
    let s = a * a + b * b;
    if s.is_finite() && s > 1e-290 {
        s.sqrt()
    } else {
        a.hypot(b)
    }
}

fn tql(d: &mut [f64], off: &mut [f64], mut z: Option<&mut Vec<Complex64>>) -> std::result::Result<(), usize> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(off);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_SWEEPS {
                return Err(MAX_QL_SWEEPS * (l + 1));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = fast_hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = fast_hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for row in 0..n {
                        let zi1 = z[row * n + i + 1];
                        let zi = z[row * n + i];
                        z[row * n + i + 1] = zi * s + zi1 * c;
                        z[row * n + i] = zi * c - zi1 * s;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Sorted eigenvalues of the real symmetric tridiagonal matrix with diagonal
/// `diag` and off-diagonal `off` (`off.len() == diag.len() - 1`).
pub fn eig_symmetric_tridiagonal(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    assert_eq!(off.len() + 1, diag.len().max(1));
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    tql(&mut d, &mut e, None).map_err(|iterations| {
        let mut h = DefaultHasher::new();
        for x in diag.iter().chain(off) {
            x.to_bits().hash(&mut h);
        }
        Error::EigenNoConvergence {
            iterations,
            n: diag.len(),
            fingerprint: h.finish(),
        }
    })?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Number of eigenvalues strictly below `x` of a symmetric tridiagonal
/// matrix (Sturm sequence count).
pub fn sturm_count_below(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let e2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = diag[i] - x - if i == 0 { 0.0 } else { e2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (diag[i].abs() + x.abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64) -> HermitianMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = HermitianMatrix::zeros(n);
        for i in 0..n {
            m.set(i, i, Complex64::new(rng.random_range(-1.0..1.0), 0.0));
            for j in 0..i {
                let v = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                m.set_hermitian(i, j, v);
            }
        }
        m
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let v = eig_hermitian(&HermitianMatrix::identity(5)).unwrap();
        assert_eq!(v.len(), 5);
        assert!(v.iter().all(|&x| (x - 1.0).abs() < 1e-14));
    }

    #[test]
    fn two_by_two_swap() {
        let m = HermitianMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let v = eig_hermitian(&m).unwrap();
        assert!((v[0] + 1.0).abs() < 1e-14 && (v[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn trace_and_frobenius_identities() {
        let a = random_hermitian(30, 11);
        let v = eig_hermitian(&a).unwrap();
        let tr: f64 = v.iter().sum();
        let fro: f64 = v.iter().map(|x| x * x).sum();
        assert!((tr - a.trace()).abs() <= 1e-9 * a.frobenius_sq().sqrt());
        assert!((fro - a.frobenius_sq()).abs() <= 1e-9 * a.frobenius_sq());
        assert!(v.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eigenvector_residuals_are_small() {
        let a = random_hermitian(25, 3);
        let e = eig_hermitian_full(&a, true).unwrap();
        let norm = a.frobenius_sq().sqrt();
        let res = e.max_residual(&a).unwrap();
        assert!(res <= 1e-9 * norm, "residual {res}");
        let values_only = eig_hermitian(&a).unwrap();
        for (x, y) in e.values.iter().zip(&values_only) {
            assert!((x - y).abs() < 1e-11);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = HermitianMatrix::zeros(2);
        m.set(0, 1, Complex64::new(1.0, 0.0));
        assert!(matches!(eig_hermitian(&m), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn tridiagonal_matches_dense_and_sturm() {
        let diag = [0.3, -1.2, 0.5, 2.0, -0.1];
        let off = [1.0, 0.4, -0.7, 0.2];
        let t = eig_symmetric_tridiagonal(&diag, &off).unwrap();
        let dense = HermitianMatrix::from_fn(5, |i, j| {
            let v = if i == j {
                diag[i]
            } else if i + 1 == j {
                off[i]
            } else if j + 1 == i {
                off[j]
            } else {
                0.0
            };
            Complex64::new(v, 0.0)
        });
        let d = eig_hermitian(&dense).unwrap();
        for (a, b) in t.iter().zip(&d) {
            assert!((a - b).abs() < 1e-12);
        }
        for x in [-3.0, -0.5, 0.0, 0.45, 1.0, 5.0] {
            let expect = t.iter().filter(|&&l| l < x).count();
            assert_eq!(sturm_count_below(&diag, &off, x), expect);
        }
    }
}
