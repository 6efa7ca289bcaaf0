//! Small dense complex linear algebra used by the per-frequency-bin machinery.
//!
//! Every matrix in this crate is tiny (a handful of spectral shifts per bin,
//! so at most ~16 rows even for generous excess bandwidth), which makes
//! dependency-free O(n³) kernels the right tool: a Cholesky factorization for
//! Hermitian positive-definite solves and cyclic Jacobi sweeps for Hermitian
//! eigenpairs. Results are deterministic; eigenvectors are phase-normalized so
//! the largest-magnitude entry is real and positive.

use num_complex::Complex64;
use thiserror::Error;

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// Errors from the dense kernels.
#[derive(Debug, Clone, Error)]
pub enum NumericsError {
    /// A Cholesky pivot was not strictly positive.
    #[error("matrix is not positive definite (pivot {pivot:.3e} at index {index})")]
    NotPositiveDefinite { pivot: f64, index: usize },
    /// Operand dimensions do not conform.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Build from a row-major slice of entries.
    pub fn from_rows(rows: usize, cols: usize, entries: &[C64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count must be rows*cols");
        Self { rows, cols, data: entries.to_vec() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Conjugate transpose.
    pub fn herm(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> CMatrix {
        CMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].conj())
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        CMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * s)
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + other[(i, j)])
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        CMatrix::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).map(|k| self[(i, k)] * other[(k, j)]).sum()
        })
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "vector length must equal column count");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|k| self[(i, k)] * v[k]).sum())
            .collect()
    }

    /// Outer product u vᴴ.
    pub fn outer(u: &[C64], v: &[C64]) -> CMatrix {
        CMatrix::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from the conjugate transpose.
    pub fn hermitian_defect(&self) -> f64 {
        assert!(self.is_square());
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Replace the matrix by its Hermitian part (A + Aᴴ)/2, squashing roundoff.
    pub fn symmetrized(&self) -> CMatrix {
        assert!(self.is_square());
        CMatrix::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// The backward identity: ones on the anti-diagonal (entry (m,n) is 1 when
/// m + n = size + 1 in 1-based indexing). Applying it to a vector reverses the
/// entry order; it is symmetric, orthogonal, and involutive.
pub fn backward_identity(n: usize) -> CMatrix {
    assert!(n >= 1, "backward identity needs n >= 1");
    CMatrix::from_fn(n, n, |i, j| {
        if i + j == n - 1 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }
    })
}

/// Reverse a vector: the result of applying the backward identity.
pub fn reversed(v: &[C64]) -> Vec<C64> {
    v.iter().rev().copied().collect()
}

/// Reverse and conjugate: `J v*`, which maps the spectrum samples of a
/// waveform at `-f` onto the spectrum samples of its complex conjugate at `f`.
pub fn conj_reversed(v: &[C64]) -> Vec<C64> {
    v.iter().rev().map(|z| z.conj()).collect()
}

/// Lower-triangular Cholesky factor of a Hermitian positive-definite matrix.
pub fn cholesky(a: &CMatrix) -> Result<CMatrix, NumericsError> {
    assert!(a.is_square(), "cholesky needs a square matrix");
    let n = a.rows();
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(NumericsError::NotPositiveDefinite { pivot: d, index: j });
        }
        let ljj = d.sqrt();
        l[(j, j)] = C64::new(ljj, 0.0);
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Solve `A x = b` for Hermitian positive-definite `A` via Cholesky.
pub fn hermitian_solve(a: &CMatrix, b: &[C64]) -> Result<Vec<C64>, NumericsError> {
    if a.rows() != b.len() {
        return Err(NumericsError::ShapeMismatch(format!(
            "matrix is {}x{} but rhs has length {}",
            a.rows(),
            a.cols(),
            b.len()
        )));
    }
    let l = cholesky(a)?;
    let n = b.len();
    // forward substitution L y = b
    let mut y = vec![C64::new(0.0, 0.0); n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    // back substitution Lᴴ x = y
    let mut x = vec![C64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[(k, i)].conj() * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    Ok(x)
}

/// Full Hermitian eigendecomposition by cyclic Jacobi sweeps.
///
/// Returns eigenvalues in descending order with matching eigenvector columns.
/// Intended for the tiny per-bin matrices; convergence is quadratic and a few
/// sweeps suffice.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    assert!(a.is_square());
    let n = a.rows();
    let mut m = a.symmetrized();
    let mut v = CMatrix::identity(n);
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    let tol = 1e-15 * scale;

    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(m[(p, q)].norm());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let mag = apq.norm();
                if mag <= tol * 1e-2 {
                    continue;
                }
                let phase = apq / mag;
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // Unitary 2x2: columns (c, -s e^{-jφ}) and (s, c e^{-jφ}).
                let sp = phase * s;
                let cp = phase * c;
                for i in 0..n {
                    let mp = m[(i, p)];
                    let mq = m[(i, q)];
                    m[(i, p)] = mp * c - mq * sp.conj();
                    m[(i, q)] = mp * s + mq * cp.conj();
                }
                for j in 0..n {
                    let mp = m[(p, j)];
                    let mq = m[(q, j)];
                    m[(p, j)] = mp * c - sp * mq;
                    m[(q, j)] = mp * s + cp * mq;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = vp * c - vq * sp.conj();
                    v[(i, q)] = vp * s + vq * cp.conj();
                }
                m[(p, q)] = C64::new(0.0, 0.0);
                m[(q, p)] = C64::new(0.0, 0.0);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].re.partial_cmp(&m[(i, i)].re).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    (values, vectors)
}

/// Largest eigenvalue and a unit eigenvector of a Hermitian PSD matrix.
///
/// The eigenvector phase is fixed so its largest-magnitude entry is real and
/// positive, making downstream waveform assembly deterministic. A zero matrix
/// yields eigenvalue 0 with the first basis vector.
pub fn top_eigenpair(a: &CMatrix) -> (f64, Vec<C64>) {
    let n = a.rows();
    if a.max_abs() == 0.0 {
        let mut v = vec![C64::new(0.0, 0.0); n];
        v[0] = C64::new(1.0, 0.0);
        return (0.0, v);
    }
    let (values, vectors) = hermitian_eigen(a);
    let lambda = values[0].max(0.0);
    let mut v: Vec<C64> = (0..n).map(|i| vectors[(i, 0)]).collect();
    normalize_phase(&mut v);
    (lambda, v)
}

/// Scale a vector to unit norm and rotate it so the largest-magnitude entry
/// is real positive.
pub fn normalize_phase(v: &mut [C64]) {
    let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for z in v.iter_mut() {
            *z /= norm;
        }
    }
    let (imax, _) = v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
        .expect("non-empty vector");
    let mag = v[imax].norm();
    if mag > 0.0 {
        let rot = v[imax].conj() / mag;
        for z in v.iter_mut() {
            *z *= rot;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_hermitian_pd(rng: &mut StdRng, n: usize) -> CMatrix {
        // G Gᴴ + I is comfortably positive definite
        let g = CMatrix::from_fn(n, n, |_, _| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        g.mul(&g.herm()).add(&CMatrix::identity(n))
    }

    fn vec_norm(v: &[C64]) -> f64 {
        v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn solve_identity_is_passthrough() {
        let x = hermitian_solve(&CMatrix::identity(2), &[c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        assert!((x[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((x[1] - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn solve_diagonal() {
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 0)] = c(2.0, 0.0);
        a[(1, 1)] = c(4.0, 0.0);
        let x = hermitian_solve(&a, &[c(2.0, 0.0), c(4.0, 0.0)]).unwrap();
        assert!((x[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((x[1] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn solve_random_residual() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..100 {
            let a = random_hermitian_pd(&mut rng, 4);
            let b: Vec<C64> =
                (0..4).map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
            let x = hermitian_solve(&a, &b).unwrap();
            let ax = a.mul_vec(&x);
            let res: Vec<C64> = ax.iter().zip(&b).map(|(l, r)| l - r).collect();
            assert!(
                vec_norm(&res) <= 1e-10 * vec_norm(&b),
                "residual too large: {:e}",
                vec_norm(&res) / vec_norm(&b)
            );
        }
    }

    #[test]
    fn solve_rejects_indefinite() {
        let mut a = CMatrix::identity(2);
        a[(1, 1)] = c(-1.0, 0.0);
        match hermitian_solve(&a, &[c(1.0, 0.0), c(1.0, 0.0)]) {
            Err(NumericsError::NotPositiveDefinite { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected NotPositiveDefinite, got {:?}", other),
        }
    }

    #[test]
    fn top_eigenpair_diagonal() {
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 0)] = c(1.0, 0.0);
        a[(1, 1)] = c(3.0, 0.0);
        let (lambda, v) = top_eigenpair(&a);
        assert!((lambda - 3.0).abs() < 1e-12);
        assert!(v[0].norm() < 1e-12 && (v[1].norm() - 1.0).abs() < 1e-12);
        // phase convention: the dominant entry is real positive
        assert!(v[1].im.abs() < 1e-12 && v[1].re > 0.0);
    }

    #[test]
    fn top_eigenpair_rank_one() {
        let u = [c(1.0, 0.0) / 2f64.sqrt(), c(0.0, 1.0) / 2f64.sqrt()];
        let a = CMatrix::outer(&u, &u);
        let (lambda, v) = top_eigenpair(&a);
        assert!((lambda - 1.0).abs() < 1e-12);
        let overlap: C64 = v.iter().zip(&u).map(|(a, b)| a.conj() * b).sum();
        assert!((overlap.norm() - 1.0).abs() < 1e-12, "eigenvector differs from u");
    }

    #[test]
    fn top_eigenpair_zero_matrix() {
        let (lambda, v) = top_eigenpair(&CMatrix::zeros(3, 3));
        assert_eq!(lambda, 0.0);
        assert!((v[0] - c(1.0, 0.0)).norm() == 0.0);
    }

    /// Cubic-root oracle: eigenvalues of a 3x3 Hermitian matrix are the roots
    /// of its (real) characteristic polynomial, solved in closed form.
    fn char_poly_roots_3x3(a: &CMatrix) -> [f64; 3] {
        // det(A - xI) = -x^3 + tr x^2 - c1 x + det
        let tr = (a[(0, 0)] + a[(1, 1)] + a[(2, 2)]).re;
        let minor = |i: usize, j: usize| -> C64 { a[(i, i)] * a[(j, j)] - a[(i, j)] * a[(j, i)] };
        let c1 = (minor(0, 1) + minor(0, 2) + minor(1, 2)).re;
        let det = (a[(0, 0)] * (a[(1, 1)] * a[(2, 2)] - a[(1, 2)] * a[(2, 1)])
            - a[(0, 1)] * (a[(1, 0)] * a[(2, 2)] - a[(1, 2)] * a[(2, 0)])
            + a[(0, 2)] * (a[(1, 0)] * a[(2, 1)] - a[(1, 1)] * a[(2, 0)]))
            .re;
        // x^3 - tr x^2 + c1 x - det = 0; depressed cubic + trigonometric solve
        let p = c1 - tr * tr / 3.0;
        let q = -det + tr * c1 / 3.0 - 2.0 * tr * tr * tr / 27.0;
        let shift = tr / 3.0;
        let inner = (-p / 3.0).max(0.0);
        let r = 2.0 * inner.sqrt();
        let arg = if r > 0.0 { (3.0 * q / (p * r)).clamp(-1.0, 1.0) } else { 0.0 };
        let theta = arg.acos() / 3.0;
        let mut roots = [0.0f64; 3];
        for (k, root) in roots.iter_mut().enumerate() {
            *root = shift + r * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos();
        }
        roots.sort_by(|x, y| y.partial_cmp(x).unwrap());
        roots
    }

    #[test]
    fn top_eigenpair_matches_char_poly() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..50 {
            let g = CMatrix::from_fn(3, 3, |_, _| {
                c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            let a = g.mul(&g.herm()); // Hermitian PSD
            let roots = char_poly_roots_3x3(&a);
            let (lambda, v) = top_eigenpair(&a);
            let scale = roots[0].abs().max(1.0);
            assert!(
                (lambda - roots[0]).abs() <= 1e-9 * scale,
                "largest eigenvalue {lambda} vs cubic root {}",
                roots[0]
            );
            let av = a.mul_vec(&v);
            let res: Vec<C64> = av.iter().zip(&v).map(|(x, y)| x - y * lambda).collect();
            assert!(vec_norm(&res) <= 1e-10 * scale);
        }
    }

    #[test]
    fn top_eigenvalue_dominates_rayleigh_quotients() {
        let mut rng = StdRng::seed_from_u64(3);
        let g = CMatrix::from_fn(5, 5, |_, _| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        let a = g.mul(&g.herm());
        let (lambda, _) = top_eigenpair(&a);
        for _ in 0..100 {
            let mut probe: Vec<C64> =
                (0..5).map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
            let n = vec_norm(&probe);
            probe.iter_mut().for_each(|z| *z /= n);
            let ap = a.mul_vec(&probe);
            let rq: C64 = probe.iter().zip(&ap).map(|(x, y)| x.conj() * y).sum();
            assert!(lambda >= rq.re - 1e-10 * lambda.max(1.0));
        }
    }

    #[test]
    fn backward_identity_basics() {
        let j1 = backward_identity(1);
        assert_eq!(j1[(0, 0)], c(1.0, 0.0));

        let j2 = backward_identity(2);
        assert_eq!(j2[(0, 0)], c(0.0, 0.0));
        assert_eq!(j2[(0, 1)], c(1.0, 0.0));
        assert_eq!(j2[(1, 0)], c(1.0, 0.0));
        assert_eq!(j2[(1, 1)], c(0.0, 0.0));

        for n in 1..=8 {
            let j = backward_identity(n);
            let jj = j.mul(&j);
            let id = CMatrix::identity(n);
            for i in 0..n {
                for k in 0..n {
                    assert_eq!(jj[(i, k)], id[(i, k)], "J*J must be the identity");
                    assert_eq!(j[(i, k)], j[(k, i)], "J must be symmetric");
                }
            }
        }
    }

    #[test]
    fn conj_reversed_matches_backward_identity() {
        let v = [c(1.0, 2.0), c(-0.5, 0.25), c(3.0, -1.0)];
        let j = backward_identity(3);
        let direct = conj_reversed(&v);
        let viaj = j.mul_vec(&v.iter().map(|z| z.conj()).collect::<Vec<_>>());
        for (a, b) in direct.iter().zip(&viaj) {
            assert_eq!(a, b);
        }
    }
}
