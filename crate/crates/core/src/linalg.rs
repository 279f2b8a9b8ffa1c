//! Small dense complex matrices (N <= 6) and a cyclic Jacobi Hermitian eigensolver.

use num_complex::Complex64;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const MAX_N: usize = 6;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Row-major square complex matrix of order `n <= 6`, stored inline.
#[derive(Clone, Copy, PartialEq)]
pub struct CMat {
    n: usize,
    a: [C64; MAX_N * MAX_N],
}

impl std::fmt::Debug for CMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "CMat({})", self.n)?;
        for i in 0..self.n {
            for j in 0..self.n {
                let z = self[(i, j)];
                write!(f, " {:+.6}{:+.6}i", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.a[i * MAX_N + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.a[i * MAX_N + j]
    }
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1 && n <= MAX_N, "matrix order {n} unsupported");
        CMat {
            n,
            a: [ZERO; MAX_N * MAX_N],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = C64::new(x, 0.0);
        }
        m
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let mut m = Self::zeros(rows.len());
        for (i, r) in rows.iter().enumerate() {
            for (j, &x) in r.iter().enumerate() {
                m[(i, j)] = C64::new(x, 0.0);
            }
        }
        m
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mul(&self, o: &CMat) -> CMat {
        debug_assert_eq!(self.n, o.n);
        let n = self.n;
        let mut r = CMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let x = self[(i, k)];
                if x == ZERO {
                    continue;
                }
                for j in 0..n {
                    r[(i, j)] += x * o[(k, j)];
                }
            }
        }
        r
    }

    pub fn adjoint(&self) -> CMat {
        CMat::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> CMat {
        CMat::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> CMat {
        CMat::from_fn(self.n, |i, j| self[(i, j)].conj())
    }

    /// `a * self + b * other`.
    pub fn lincomb(&self, a: f64, other: &CMat, b: f64) -> CMat {
        CMat::from_fn(self.n, |i, j| self[(i, j)] * a + other[(i, j)] * b)
    }

    pub fn scale(&self, s: f64) -> CMat {
        CMat::from_fn(self.n, |i, j| self[(i, j)] * s)
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs_diff(&self, o: &CMat) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.n {
            for j in 0..self.n {
                m = m.max((self[(i, j)] - o[(i, j)]).norm());
            }
        }
        m
    }

    /// `max |M - M†|`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.n {
            for j in i..self.n {
                m = m.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        m
    }

    pub fn is_real(&self) -> bool {
        self.a[..].iter().all(|z| z.im == 0.0)
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det(&self) -> C64 {
        let n = self.n;
        let mut m = *self;
        let mut det = ONE;
        for c in 0..n {
            let mut p = c;
            let mut best = m[(c, c)].norm();
            for r in c + 1..n {
                let v = m[(r, c)].norm();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == 0.0 {
                return ZERO;
            }
            if p != c {
                for j in 0..n {
                    let t = m[(c, j)];
                    m[(c, j)] = m[(p, j)];
                    m[(p, j)] = t;
                }
                det = -det;
            }
            let piv = m[(c, c)];
            det *= piv;
            for r in c + 1..n {
                let f = m[(r, c)] / piv;
                if f == ZERO {
                    continue;
                }
                for j in c..n {
                    let t = m[(c, j)];
                    m[(r, j)] -= f * t;
                }
            }
        }
        det
    }

    /// `U · diag(d) · U†`.
    pub fn conjugate_diag(u: &CMat, d: &[f64]) -> CMat {
        let n = u.n;
        debug_assert_eq!(d.len(), n);
        let mut r = CMat::zeros(n);
        for i in 0..n {
            for j in i..n {
                let mut s = ZERO;
                for k in 0..n {
                    if d[k] != 0.0 {
                        s += u[(i, k)] * u[(j, k)].conj() * d[k];
                    }
                }
                r[(i, j)] = s;
                r[(j, i)] = s.conj();
            }
            r[(i, i)] = C64::new(r[(i, i)].re, 0.0);
        }
        r
    }
}

/// Tolerance on `max |M - M†|` accepted by the eigensolver.
pub const HERMITIAN_TOL: f64 = 1e-10;

const OFF_TOL: f64 = 1e-13;
const MAX_SWEEPS: usize = 60;

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Eigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`, when requested.
    pub vectors: Option<CMat>,
}

fn off_norm2(a: &CMat) -> f64 {
    let mut s = 0.0;
    for i in 0..a.n {
        for j in i + 1..a.n {
            s += a[(i, j)].norm_sqr();
        }
    }
    2.0 * s
}

/// Cyclic Jacobi eigensolver for Hermitian matrices.
///
/// Each rotation first removes the phase of the pivot `a_pq` and then applies
/// the classical real symmetric rotation, so the diagonal stays exactly real.
pub fn hermitian_eigen(m: &CMat, want_vectors: bool) -> Result<Eigen> {
    let herr = m.hermiticity_error();
    if !(herr <= HERMITIAN_TOL) {
        return Err(Error::NotHermitian(herr));
    }
    let n = m.n;
    let mut a = *m;
    for i in 0..n {
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
    }
    let mut v = if want_vectors {
        Some(CMat::identity(n))
    } else {
        None
    };
    let scale = (0..n).map(|i| a[(i, i)].re.abs()).fold(0.0, f64::max).max(1e-300);
    let stop = (OFF_TOL * scale.max(1.0)).powi(2);
    for _ in 0..MAX_SWEEPS {
        if off_norm2(&a) <= stop {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r < 1e-300 {
                    continue;
                }
                let e = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G = [[c, s], [-s ē, c ē]] acting on columns p, q.
                let g_qp = -e.conj() * s;
                let g_qq = e.conj() * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c + akq * g_qp;
                    a[(k, q)] = akp * s + akq * g_qq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c + aqk * g_qp.conj();
                    a[(q, k)] = apk * s + aqk * g_qq.conj();
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(app - t * r, 0.0);
                a[(q, q)] = C64::new(aqq + t * r, 0.0);
                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * c + vkq * g_qp;
                        v[(k, q)] = vkp * s + vkq * g_qq;
                    }
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = idx.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = v.map(|v| CMat::from_fn(n, |r, c| v[(r, idx[c])]));
    Ok(Eigen { values, vectors })
}

/// Ascending eigenvalues only.
pub fn eigenvalues(m: &CMat) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(m, false)?.values)
}
