//! Uniform coordinates to density matrices: Haar unitaries, simplex spectra,
//! assembly, partial transpose and the spin flip.
//!
//! Coordinate layout for a full state draw is fixed: the first `2n²` (complex)
//! or `n²` (real) coordinates feed the unitary, the next `k` the spectrum.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, CMat, Eigen, C64};

/// Eigenvalues at or above `-PSD_TOL` count as nonnegative.
pub const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    /// Dyson index.
    pub fn beta(self) -> u32 {
        match self {
            Field::Real => 1,
            Field::Complex => 2,
        }
    }

    /// Uniform coordinates consumed by an `n×n` Haar draw.
    pub fn unitary_coords(self, n: usize) -> usize {
        match self {
            Field::Real => n * n,
            Field::Complex => 2 * n * n,
        }
    }
}

/// Bipartition `(d_A, d_B)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    pub a: usize,
    pub b: usize,
}

impl Dims {
    pub const QUBIT_QUBIT: Dims = Dims { a: 2, b: 2 };
    pub const QUBIT_QUTRIT: Dims = Dims { a: 2, b: 3 };

    pub fn n(self) -> usize {
        self.a * self.b
    }
}

/// Descending point of the probability simplex, zero-padded past `rank`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
    rank: usize,
}

impl Spectrum {
    /// Sorts descending and validates; `values.len()` is the matrix order.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::Domain("spectrum entries must be finite and >= 0".into()));
        }
        let s: f64 = values.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("spectrum sums to {s}, not 1")));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        let rank = values.iter().filter(|&&x| x > 0.0).count();
        Ok(Spectrum { values, rank })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Nonzero part `λ_1..λ_rank`.
    pub fn support(&self) -> &[f64] {
        &self.values[..self.rank]
    }

    /// Same values, padded with zeros to order `n`.
    pub fn padded(&self, n: usize) -> Spectrum {
        let mut values = self.values.clone();
        values.resize(n.max(values.len()), 0.0);
        Spectrum {
            values,
            rank: self.rank,
        }
    }
}

/// A density matrix together with the spectrum it was assembled from.
#[derive(Debug, Clone)]
pub struct QuantumState {
    pub matrix: CMat,
    pub field: Field,
    pub dims: Dims,
    pub rank_target: usize,
    pub spectrum: Spectrum,
    /// Eigenbasis (the unitary used for assembly), when known.
    pub basis: Option<CMat>,
}

impl QuantumState {
    /// Wraps an explicit matrix, diagonalizing it to obtain spectrum and basis.
    pub fn from_matrix(matrix: CMat, dims: Dims, field: Field) -> Result<Self> {
        if matrix.n() != dims.n() {
            return Err(Error::Domain(format!(
                "matrix order {} does not match dims {}x{}",
                matrix.n(),
                dims.a,
                dims.b
            )));
        }
        let Eigen { values, vectors } = hermitian_eigen(&matrix, true)?;
        if values[0] < -PSD_TOL {
            return Err(Error::Domain(format!("matrix has eigenvalue {}", values[0])));
        }
        let tr: f64 = values.iter().sum();
        if (tr - 1.0).abs() > 1e-10 {
            return Err(Error::Domain(format!("trace {tr} is not 1")));
        }
        let n = matrix.n();
        let vectors = vectors.expect("vectors requested");
        // descending order, clipped at zero
        let desc: Vec<f64> = values.iter().rev().map(|&x| x.max(0.0)).collect();
        let basis = CMat::from_fn(n, |r, c| vectors[(r, n - 1 - c)]);
        let sum: f64 = desc.iter().sum();
        let desc: Vec<f64> = desc.iter().map(|x| x / sum).collect();
        let rank = desc.iter().filter(|&&x| x > 1e-14).count();
        let spectrum = Spectrum {
            values: desc,
            rank,
        };
        Ok(QuantumState {
            matrix,
            field,
            dims,
            rank_target: rank,
            spectrum,
            basis: Some(basis),
        })
    }

    pub fn n(&self) -> usize {
        self.dims.n()
    }
}

/// Inverse of the standard normal CDF (Acklam's rational approximation,
/// absolute error below 1.2e-9).
pub fn inverse_normal_cdf(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383_577_518_672_69e2,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

fn check_open_unit(coords: &[f64]) -> Result<()> {
    if coords.iter().any(|&u| !(u > 0.0 && u < 1.0)) {
        return Err(Error::Rejected("coordinate outside (0,1)".into()));
    }
    Ok(())
}

/// Haar-distributed unitary (or orthogonal) matrix from uniform coordinates.
///
/// Coordinates become a Ginibre matrix through the inverse normal CDF; its
/// QR factor with positive real `diag(R)` is returned. Columns are built by
/// Gram-Schmidt with one reorthogonalization pass.
pub fn haar_unitary(coords: &[f64], n: usize, field: Field) -> Result<CMat> {
    let need = field.unitary_coords(n);
    if coords.len() != need {
        return Err(Error::Domain(format!(
            "haar_unitary needs {need} coordinates, got {}",
            coords.len()
        )));
    }
    check_open_unit(coords)?;
    let mut g = CMat::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let k = i * n + j;
            g[(i, j)] = match field {
                Field::Real => C64::new(inverse_normal_cdf(coords[k]), 0.0),
                Field::Complex => C64::new(
                    inverse_normal_cdf(coords[2 * k]),
                    inverse_normal_cdf(coords[2 * k + 1]),
                ),
            };
        }
    }
    orthonormalize_columns(&mut g)?;
    Ok(g)
}

fn orthonormalize_columns(g: &mut CMat) -> Result<()> {
    let n = g.n();
    for j in 0..n {
        let norm0: f64 = (0..n).map(|i| g[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        for _pass in 0..2 {
            for k in 0..j {
                let mut dot = C64::new(0.0, 0.0);
                for i in 0..n {
                    dot += g[(i, k)].conj() * g[(i, j)];
                }
                for i in 0..n {
                    let t = g[(i, k)];
                    g[(i, j)] -= t * dot;
                }
            }
        }
        let norm: f64 = (0..n).map(|i| g[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 1e-10 * norm0.max(1e-300)) {
            return Err(Error::DegenerateSample(
                "rank-deficient Ginibre matrix; retry with perturbed coordinates".into(),
            ));
        }
        for i in 0..n {
            g[(i, j)] /= norm;
        }
    }
    Ok(())
}

/// Uniform point on the `(k-1)`-simplex from `k` uniforms (normalized
/// exponential spacings), sorted descending and zero-padded to `n`.
pub fn simplex_spectrum(coords: &[f64], k: usize, n: usize) -> Result<Spectrum> {
    if coords.len() != k || !(1..=n).contains(&k) {
        return Err(Error::Domain(format!(
            "simplex_spectrum needs k={k} <= n={n} coordinates, got {}",
            coords.len()
        )));
    }
    if coords.iter().any(|&u| !(u > 0.0 && u < 1.0)) {
        return Err(Error::Rejected("spectrum coordinate outside (0,1)".into()));
    }
    let mut values: Vec<f64> = coords.iter().map(|&u| -u.ln()).collect();
    let s: f64 = values.iter().sum();
    for v in values.iter_mut() {
        *v /= s;
    }
    values.sort_by(|a, b| b.total_cmp(a));
    values.resize(n, 0.0);
    Ok(Spectrum { values, rank: k })
}

/// Dirichlet(1/2, …, 1/2) point from `k` uniforms (normalized squared
/// normals), sorted descending and zero-padded to `n`. Its density on the
/// simplex is proportional to `Π λ_i^{-1/2}`.
pub fn dirichlet_half_spectrum(coords: &[f64], k: usize, n: usize) -> Result<Spectrum> {
    if coords.len() != k || !(1..=n).contains(&k) {
        return Err(Error::Domain(format!(
            "dirichlet_half_spectrum needs k={k} <= n={n} coordinates, got {}",
            coords.len()
        )));
    }
    check_open_unit(coords)?;
    let mut values: Vec<f64> = coords
        .iter()
        .map(|&u| {
            let z = inverse_normal_cdf(u);
            z * z
        })
        .collect();
    let s: f64 = values.iter().sum();
    if values.iter().any(|&v| v == 0.0) || !(s > 0.0) {
        return Err(Error::Rejected("zero Dirichlet component".into()));
    }
    for v in values.iter_mut() {
        *v /= s;
    }
    values.sort_by(|a, b| b.total_cmp(a));
    values.resize(n, 0.0);
    Ok(Spectrum { values, rank: k })
}

/// `U · diag(spectrum) · U†`; the stored spectrum is the input, not re-derived.
pub fn assemble_state(u: &CMat, spectrum: &Spectrum, dims: Dims, field: Field) -> Result<QuantumState> {
    let n = dims.n();
    if u.n() != n || spectrum.len() != n {
        return Err(Error::Domain(format!(
            "unitary order {} / spectrum length {} do not match N={n}",
            u.n(),
            spectrum.len()
        )));
    }
    let matrix = CMat::conjugate_diag(u, spectrum.values());
    Ok(QuantumState {
        matrix,
        field,
        dims,
        rank_target: spectrum.rank(),
        spectrum: spectrum.clone(),
        basis: Some(*u),
    })
}

/// Transpose of the second tensor factor.
pub fn partial_transpose_matrix(m: &CMat, dims: Dims) -> CMat {
    let (da, db) = (dims.a, dims.b);
    let mut r = CMat::zeros(m.n());
    for a in 0..da {
        for ap in 0..da {
            for b in 0..db {
                for bp in 0..db {
                    r[(a * db + b, ap * db + bp)] = m[(a * db + bp, ap * db + b)];
                }
            }
        }
    }
    r
}

pub fn partial_transpose(state: &QuantumState) -> CMat {
    partial_transpose_matrix(&state.matrix, state.dims)
}

/// Transpose of the first tensor factor (used to check subsystem independence).
pub fn partial_transpose_first(m: &CMat, dims: Dims) -> CMat {
    let (da, db) = (dims.a, dims.b);
    let mut r = CMat::zeros(m.n());
    for a in 0..da {
        for ap in 0..da {
            for b in 0..db {
                for bp in 0..db {
                    r[(a * db + b, ap * db + bp)] = m[(ap * db + b, a * db + bp)];
                }
            }
        }
    }
    r
}

fn sigma_y_sigma_y() -> CMat {
    let mut y = CMat::zeros(4);
    y[(0, 3)] = Complex64::new(-1.0, 0.0);
    y[(1, 2)] = Complex64::new(1.0, 0.0);
    y[(2, 1)] = Complex64::new(1.0, 0.0);
    y[(3, 0)] = Complex64::new(-1.0, 0.0);
    y
}

/// `(σ_y ⊗ σ_y) ρ* (σ_y ⊗ σ_y)`.
pub fn spin_flip(state: &QuantumState) -> Result<CMat> {
    if state.dims != Dims::QUBIT_QUBIT {
        return Err(Error::Unsupported("spin flip is defined for two qubits only".into()));
    }
    Ok(spin_flip_matrix(&state.matrix))
}

pub fn spin_flip_matrix(rho: &CMat) -> CMat {
    let y = sigma_y_sigma_y();
    y.mul(&rho.conj()).mul(&y)
}

/// `(1/2)(|00⟩ + |11⟩)(⟨00| + ⟨11|)`.
pub fn bell_phi_plus() -> CMat {
    let mut m = CMat::zeros(4);
    for &i in &[0usize, 3] {
        for &j in &[0usize, 3] {
            m[(i, j)] = C64::new(0.5, 0.0);
        }
    }
    m
}

/// `p |Φ+⟩⟨Φ+| + (1-p) I/4`.
pub fn werner(p: f64) -> CMat {
    bell_phi_plus().lincomb(p, &CMat::identity(4), (1.0 - p) / 4.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigenvalues;

    #[test]
    fn acklam_reference_values() {
        assert!(inverse_normal_cdf(0.5).abs() < 1e-12);
        // relative accuracy of the rational approximation is 1.15e-9
        for (p, z) in [
            (0.975, 1.959963984540054),
            (0.001, -3.090232306167813),
            (1e-10, -6.361340902404056),
        ] {
            assert!((inverse_normal_cdf(p) - z).abs() < 1.2e-9 * z.abs(), "p={p}");
        }
    }

    #[test]
    fn equal_coordinates_give_flat_spectrum() {
        let s = simplex_spectrum(&[0.3; 4], 4, 4).unwrap();
        for v in s.values() {
            assert!((v - 0.25).abs() < 1e-15);
        }
        assert!(simplex_spectrum(&[0.0, 0.2, 0.3, 0.4], 4, 4).is_err());
    }

    #[test]
    fn rank_deficient_spectrum_is_padded() {
        let s = simplex_spectrum(&[0.2, 0.5, 0.7], 3, 4).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s.rank(), 3);
        assert_eq!(s.values()[3], 0.0);
    }

    #[test]
    fn pure_state_from_identity() {
        let s = Spectrum::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let st = assemble_state(&CMat::identity(4), &s, Dims::QUBIT_QUBIT, Field::Complex).unwrap();
        let mut e = CMat::zeros(4);
        e[(0, 0)] = C64::new(1.0, 0.0);
        assert_eq!(st.matrix, e);
    }

    #[test]
    fn maximally_mixed_is_unitarily_invariant() {
        let coords: Vec<f64> = (0..32).map(|i| (i as f64 + 0.5) / 33.0).collect();
        let u = haar_unitary(&coords, 4, Field::Complex).unwrap();
        let s = Spectrum::new(vec![0.25; 4]).unwrap();
        let st = assemble_state(&u, &s, Dims::QUBIT_QUBIT, Field::Complex).unwrap();
        assert!(st.matrix.max_abs_diff(&CMat::identity(4).scale(0.25)) < 1e-15);
    }

    #[test]
    fn bell_partial_transpose_spectrum() {
        let pt = partial_transpose_matrix(&bell_phi_plus(), Dims::QUBIT_QUBIT);
        let e = eigenvalues(&pt).unwrap();
        let want = [-0.5, 0.5, 0.5, 0.5];
        for (a, b) in e.iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn partial_transpose_is_an_involution() {
        let coords: Vec<f64> = (0..72).map(|i| ((i * 37 % 71) as f64 + 0.5) / 72.0).collect();
        let u = haar_unitary(&coords, 6, Field::Complex).unwrap();
        let s = Spectrum::new(vec![0.3, 0.25, 0.2, 0.15, 0.07, 0.03]).unwrap();
        let st = assemble_state(&u, &s, Dims::QUBIT_QUTRIT, Field::Complex).unwrap();
        let pt = partial_transpose(&st);
        assert_eq!(partial_transpose_matrix(&pt, st.dims), st.matrix);
        assert!(pt.hermiticity_error() < 1e-15);
        assert!((pt.trace() - st.matrix.trace()).norm() < 1e-15);
        // transposing either factor gives the same PT spectrum
        let e1 = eigenvalues(&pt).unwrap();
        let e2 = eigenvalues(&partial_transpose_first(&st.matrix, st.dims)).unwrap();
        for (a, b) in e1.iter().zip(&e2) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn spin_flip_fixed_points() {
        let mm = CMat::identity(4).scale(0.25);
        assert!(spin_flip_matrix(&mm).max_abs_diff(&mm) < 1e-16);
        let b = bell_phi_plus();
        assert!(spin_flip_matrix(&b).max_abs_diff(&b) < 1e-16);
        let st = QuantumState::from_matrix(werner(0.3), Dims::QUBIT_QUBIT, Field::Real).unwrap();
        assert!(spin_flip(&st).is_ok());
    }

    #[test]
    fn spin_flip_rejects_qubit_qutrit() {
        let m = CMat::identity(6).scale(1.0 / 6.0);
        let st = QuantumState::from_matrix(m, Dims::QUBIT_QUTRIT, Field::Real).unwrap();
        assert!(matches!(spin_flip(&st), Err(Error::Unsupported(_))));
    }

    #[test]
    fn haar_rejects_bad_coordinates() {
        assert!(haar_unitary(&[0.5; 31], 4, Field::Complex).is_err());
        let mut c = vec![0.5; 16];
        c[3] = 0.0;
        assert!(matches!(haar_unitary(&c, 4, Field::Real), Err(Error::Rejected(_))));
        // all-equal coordinates give a rank-one Ginibre matrix
        assert!(matches!(
            haar_unitary(&[0.3; 16], 4, Field::Real),
            Err(Error::DegenerateSample(_))
        ));
    }
}
