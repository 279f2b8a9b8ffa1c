//! Entanglement quantities and feasible-α sets of the generalized
//! Peres-Horodecki constraints.

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, CMat};
use crate::poly;
use crate::statespace::{partial_transpose, spin_flip, Dims, QuantumState, Spectrum, PSD_TOL};

/// Largest double strictly below one.
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

/// Which α values satisfy a constraint.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleAlphaSet {
    /// Every α in [0, 1].
    All,
    /// Exactly the α in [0, 1] with `α <= threshold`.
    Threshold(f64),
    /// Membership on an explicit α-grid.
    Mask(Vec<bool>),
}

impl FeasibleAlphaSet {
    /// Membership of `alpha` for the interval forms.
    pub fn contains(&self, alpha: f64) -> Option<bool> {
        match self {
            FeasibleAlphaSet::All => Some(true),
            FeasibleAlphaSet::Threshold(t) => Some(alpha <= *t),
            FeasibleAlphaSet::Mask(_) => None,
        }
    }

    /// Threshold with `All` mapped to 1.
    pub fn threshold(&self) -> Option<f64> {
        match self {
            FeasibleAlphaSet::All => Some(1.0),
            FeasibleAlphaSet::Threshold(t) => Some(*t),
            FeasibleAlphaSet::Mask(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxConcurrence {
    pub c_max: f64,
    /// Unclipped expression; in [-1/2, 1] for full-rank two-qubit spectra.
    pub c_max_raw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcurrencePair {
    pub c: f64,
    pub c_max: f64,
    pub c_max_raw: f64,
}

/// Maximal concurrence over the unitary orbit of a descending spectrum.
///
/// Two qubits: `λ1-λ3-2√(λ2λ4)`, reducing to `λ1-λ3` at rank 3.
/// Qubit-qutrit: `λ1-λ5-2√(λ4λ6)`, reducing to `λ1-λ5` at rank 5.
pub fn maximal_concurrence(spec: &Spectrum) -> Result<MaxConcurrence> {
    let l = spec.values();
    let raw = match (l.len(), spec.rank()) {
        (4, _) => l[0] - l[2] - 2.0 * (l[1] * l[3]).sqrt(),
        (6, _) => l[0] - l[4] - 2.0 * (l[3] * l[5]).sqrt(),
        (n, k) => {
            return Err(Error::Unsupported(format!(
                "maximal concurrence for N={n}, rank {k}"
            )))
        }
    };
    Ok(MaxConcurrence {
        c_max: raw.max(0.0),
        c_max_raw: raw,
    })
}

/// Spectral square root `U diag(√λ) U†`, using the stored basis when present.
fn sqrt_state(state: &QuantumState) -> Result<CMat> {
    let roots: Vec<f64> = state.spectrum.values().iter().map(|x| x.max(0.0).sqrt()).collect();
    match &state.basis {
        Some(u) => Ok(CMat::conjugate_diag(u, &roots)),
        None => {
            let e = crate::linalg::hermitian_eigen(&state.matrix, true)?;
            let v = e.vectors.expect("vectors requested");
            let r: Vec<f64> = e.values.iter().map(|x| x.max(0.0).sqrt()).collect();
            Ok(CMat::conjugate_diag(&v, &r))
        }
    }
}

/// Wootters concurrence from the eigenvalues of `√ρ ρ̃ √ρ`.
pub fn concurrence(state: &QuantumState) -> Result<f64> {
    let flipped = spin_flip(state)?;
    let s = sqrt_state(state)?;
    let mut h = s.mul(&flipped).mul(&s);
    // symmetrize away rounding
    h = h.lincomb(0.5, &h.adjoint(), 0.5);
    let ev = eigenvalues(&h)?;
    if ev[0] < -1e-8 {
        return Err(Error::Numerical(format!(
            "spin-flipped product has eigenvalue {}",
            ev[0]
        )));
    }
    let eta: Vec<f64> = ev.iter().rev().map(|x| x.max(0.0).sqrt()).collect();
    Ok((eta[0] - eta[1] - eta[2] - eta[3]).max(0.0))
}

pub fn concurrence_pair(state: &QuantumState) -> Result<ConcurrencePair> {
    let m = maximal_concurrence(&state.spectrum)?;
    let c = concurrence(state)?;
    Ok(ConcurrencePair {
        c,
        c_max: m.c_max,
        c_max_raw: m.c_max_raw,
    })
}

/// Partial transpose and its ascending spectrum, computed once per state.
#[derive(Debug, Clone)]
pub struct PtSpectrum {
    pub matrix: CMat,
    pub eigenvalues: Vec<f64>,
}

impl PtSpectrum {
    pub fn of(state: &QuantumState) -> Result<Self> {
        let matrix = partial_transpose(state);
        let eigenvalues = eigenvalues(&matrix)?;
        Ok(PtSpectrum {
            matrix,
            eigenvalues,
        })
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn det(&self) -> f64 {
        self.eigenvalues.iter().product()
    }

    pub fn is_ppt(&self) -> bool {
        self.min() >= -PSD_TOL
    }
}

pub fn negativity(state: &QuantumState) -> Result<f64> {
    Ok((-2.0 * PtSpectrum::of(state)?.min()).max(0.0))
}

pub fn ppt_separable(state: &QuantumState) -> Result<bool> {
    Ok(PtSpectrum::of(state)?.is_ppt())
}

fn require_two_qubit(state: &QuantumState, what: &str) -> Result<()> {
    if state.dims != Dims::QUBIT_QUBIT {
        return Err(Error::Unsupported(format!("{what} is defined for two qubits only")));
    }
    Ok(())
}

/// `(minor3, mineig3)`: product and minimum of the three nonzero eigenvalues.
pub fn rank3_modified_quantities(state: &QuantumState) -> Result<(f64, f64)> {
    require_two_qubit(state, "rank-3 quantities")?;
    let s = state.spectrum.support();
    if state.spectrum.rank() != 3 {
        return Err(Error::Domain(format!(
            "rank-3 quantities need rank 3, got {}",
            state.spectrum.rank()
        )));
    }
    Ok((s.iter().product(), s[2]))
}

/// `|ρ|`, or the 3×3 minor for rank-3 states.
fn det_like(state: &QuantumState) -> Result<f64> {
    if state.spectrum.rank() == 3 && state.n() == 4 {
        Ok(rank3_modified_quantities(state)?.0)
    } else {
        Ok(state.spectrum.values().iter().product())
    }
}

/// Smallest eigenvalue of ρ, or the smallest nonzero one for spectra of
/// rank `N - 1` (rank 3 for two qubits, rank 5 for qubit-qutrit).
fn min_eig_like(state: &QuantumState) -> Result<f64> {
    let spec = &state.spectrum;
    if spec.rank() + 1 == state.n() {
        Ok(*spec.support().last().expect("nonempty spectrum"))
    } else {
        Ok(*spec.values().last().expect("nonempty spectrum"))
    }
}

fn linear_threshold(at_zero: f64, at_one: f64) -> f64 {
    // α·at_one + (1-α)·at_zero >= 0 with at_zero >= 0 > at_one
    (at_zero / (at_zero - at_one)).clamp(0.0, BELOW_ONE)
}

/// `α|ρ_PT| + (1-α)|ρ| >= 0`.
pub fn alpha_set_det(state: &QuantumState) -> Result<FeasibleAlphaSet> {
    alpha_set_det_with(state, &PtSpectrum::of(state)?)
}

pub fn alpha_set_det_with(state: &QuantumState, pt: &PtSpectrum) -> Result<FeasibleAlphaSet> {
    require_two_qubit(state, "determinant constraint")?;
    if pt.is_ppt() {
        return Ok(FeasibleAlphaSet::All);
    }
    Ok(FeasibleAlphaSet::Threshold(linear_threshold(det_like(state)?, pt.det())))
}

/// `α λ_min(ρ_PT) + (1-α) λ_min(ρ) >= 0`.
pub fn alpha_set_mineig(state: &QuantumState) -> Result<FeasibleAlphaSet> {
    alpha_set_mineig_with(state, &PtSpectrum::of(state)?)
}

pub fn alpha_set_mineig_with(state: &QuantumState, pt: &PtSpectrum) -> Result<FeasibleAlphaSet> {
    if pt.is_ppt() {
        return Ok(FeasibleAlphaSet::All);
    }
    Ok(FeasibleAlphaSet::Threshold(linear_threshold(
        min_eig_like(state)?.max(0.0),
        pt.min(),
    )))
}

/// Result of the determinant-of-convex-combination analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvDetOutcome {
    pub set: FeasibleAlphaSet,
    /// Real roots of `det(αρ_PT + (1-α)ρ)` in (0, 1].
    pub roots_in_unit: Vec<f64>,
}

/// `det(α ρ_PT + (1-α) ρ)` as ascending quartic coefficients in α.
pub fn convdet_polynomial(state: &QuantumState, pt: &CMat) -> Result<[f64; 5]> {
    let mut vals = [0.0; 5];
    for (i, v) in vals.iter_mut().enumerate() {
        let a = i as f64 / 4.0;
        *v = pt.lincomb(a, &state.matrix, 1.0 - a).det().re;
    }
    poly::interpolate_quartic_unit(vals)
}

/// `|α ρ_PT + (1-α) ρ| >= 0`.
pub fn alpha_set_convdet(state: &QuantumState) -> Result<FeasibleAlphaSet> {
    Ok(convdet_analysis(state, &PtSpectrum::of(state)?)?.set)
}

/// The feasible set is `[0, r]` where `r` is the first root in (0, 1] at
/// which the determinant turns negative; PPT states are feasible throughout
/// since every convex combination of ρ and ρ_PT is then PSD.
pub fn convdet_analysis(state: &QuantumState, pt: &PtSpectrum) -> Result<ConvDetOutcome> {
    require_two_qubit(state, "convex-determinant constraint")?;
    let coef = convdet_polynomial(state, &pt.matrix)?;
    let scale = coef.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let zero_tol = 1e-9;
    let roots_in_unit: Vec<f64> = poly::real_roots(&coef)
        .into_iter()
        .filter(|&r| r > zero_tol && r <= 1.0 + zero_tol)
        .map(|r| r.min(1.0))
        .collect();
    if pt.is_ppt() {
        return Ok(ConvDetOutcome {
            set: FeasibleAlphaSet::All,
            roots_in_unit,
        });
    }
    let mut prev = 0.0;
    let mut edges = roots_in_unit.clone();
    edges.push(1.0);
    let mut threshold = None;
    for (i, &r) in edges.iter().enumerate() {
        // sign on (prev, r)
        let mid = 0.5 * (prev + r);
        if poly::eval(&coef, mid) < -1e-15 * scale {
            threshold = Some(if i == 0 { 0.0 } else { prev });
            break;
        }
        prev = r;
    }
    let t = match threshold {
        Some(t) => t,
        None => bisect_sign_change(&coef)?,
    };
    Ok(ConvDetOutcome {
        set: FeasibleAlphaSet::Threshold(t.clamp(0.0, BELOW_ONE)),
        roots_in_unit,
    })
}

fn bisect_sign_change(coef: &[f64]) -> Result<f64> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if poly::eval(coef, hi) >= 0.0 {
        return Err(Error::Numerical(
            "non-PPT state with nonnegative det(ρ_PT)".into(),
        ));
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if poly::eval(coef, mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

fn min_eig_at(state: &QuantumState, pt: &CMat, alpha: f64) -> Result<f64> {
    Ok(eigenvalues(&pt.lincomb(alpha, &state.matrix, 1.0 - alpha))?[0])
}

/// Grid scan of `λ_min(α ρ_PT + (1-α) ρ) >= -PSD_TOL`, checking every grid point.
pub fn alpha_grid_convmineig_scan(state: &QuantumState, grid: &[f64]) -> Result<FeasibleAlphaSet> {
    let pt = partial_transpose(state);
    let mask = grid
        .iter()
        .map(|&a| Ok(min_eig_at(state, &pt, a)? >= -PSD_TOL))
        .collect::<Result<Vec<bool>>>()?;
    Ok(FeasibleAlphaSet::Mask(mask))
}

/// Same mask as [`alpha_grid_convmineig_scan`], located by binary search.
///
/// `α ↦ λ_min(α ρ_PT + (1-α) ρ)` is concave, so the feasible grid points
/// form one run around the point closest to α = 0.
pub fn alpha_grid_convmineig(state: &QuantumState, grid: &[f64]) -> Result<FeasibleAlphaSet> {
    if grid.is_empty() {
        return Ok(FeasibleAlphaSet::Mask(vec![]));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("α grid must be strictly ascending".into()));
    }
    let pt = partial_transpose(state);
    let ok = |i: usize| -> Result<bool> { Ok(min_eig_at(state, &pt, grid[i])? >= -PSD_TOL) };
    let anchor = (0..grid.len())
        .min_by(|&i, &j| grid[i].abs().total_cmp(&grid[j].abs()))
        .expect("nonempty grid");
    if !ok(anchor)? {
        return alpha_grid_convmineig_scan(state, grid);
    }
    // last feasible index to the right
    let (mut lo, mut hi) = (anchor, grid.len());
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if ok(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let right = lo;
    // first feasible index to the left
    let left = if anchor == 0 || ok(0)? {
        0
    } else {
        let (mut lo, mut hi) = (0usize, anchor);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if ok(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    let mask = (0..grid.len()).map(|i| i >= left && i <= right).collect();
    Ok(FeasibleAlphaSet::Mask(mask))
}

/// `-αC + (1-α)C_max >= 0`; always holds for α <= 1/2.
pub fn alpha_set_concurrence(state: &QuantumState) -> Result<FeasibleAlphaSet> {
    require_two_qubit(state, "concurrence constraint")?;
    let pair = concurrence_pair(state)?;
    alpha_set_concurrence_from(pair)
}

pub fn alpha_set_concurrence_from(pair: ConcurrencePair) -> Result<FeasibleAlphaSet> {
    if pair.c > pair.c_max + 1e-6 {
        return Err(Error::Numerical(format!(
            "concurrence {} exceeds maximal concurrence {}",
            pair.c, pair.c_max
        )));
    }
    if pair.c <= 0.0 {
        return Ok(FeasibleAlphaSet::All);
    }
    let t = pair.c_max / (pair.c + pair.c_max);
    Ok(FeasibleAlphaSet::Threshold(t.clamp(0.5, BELOW_ONE)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statespace::{bell_phi_plus, werner, Field};

    fn state(m: CMat) -> QuantumState {
        QuantumState::from_matrix(m, Dims::QUBIT_QUBIT, Field::Real).unwrap()
    }

    fn spec(v: &[f64]) -> Spectrum {
        Spectrum::new(v.to_vec()).unwrap()
    }

    #[test]
    fn maximal_concurrence_examples() {
        let m = maximal_concurrence(&spec(&[1.0, 0.0, 0.0, 0.0])).unwrap();
        assert_eq!(m.c_max, 1.0);
        assert!(maximal_concurrence(&spec(&[0.5, 0.3, 0.2])).is_err());
        let m = maximal_concurrence(&spec(&[0.25; 4])).unwrap();
        assert_eq!((m.c_max, m.c_max_raw), (0.0, -0.5));
        let m = maximal_concurrence(&spec(&[0.5, 0.2, 0.2, 0.1])).unwrap();
        let want = 0.3 - 2.0 * 0.02f64.sqrt();
        assert!((m.c_max - want).abs() < 1e-15);
        assert!((m.c_max - 0.017157).abs() < 1e-6);
        let m = maximal_concurrence(&spec(&[0.5, 0.3, 0.2, 0.0])).unwrap();
        assert!((m.c_max - 0.3).abs() < 1e-15);
        let m = maximal_concurrence(&spec(&[0.4, 0.2, 0.15, 0.1, 0.1, 0.05])).unwrap();
        assert!((m.c_max_raw - (0.3 - 2.0 * 0.005f64.sqrt())).abs() < 1e-15);
        let m = maximal_concurrence(&spec(&[0.4, 0.2, 0.15, 0.15, 0.1, 0.0])).unwrap();
        assert!((m.c_max - 0.3).abs() < 1e-15);
    }

    #[test]
    fn pure_product_is_rank_one() {
        let mut m = CMat::zeros(4);
        m[(0, 0)] = 1.0.into();
        let st = state(m);
        assert_eq!(st.spectrum.rank(), 1);
        assert!(ppt_separable(&st).unwrap());
    }

    #[test]
    fn bell_and_mixed_concurrence() {
        let b = state(bell_phi_plus());
        assert!((concurrence(&b).unwrap() - 1.0).abs() < 1e-7);
        let mm = state(CMat::identity(4).scale(0.25));
        assert!(concurrence(&mm).unwrap() < 1e-12);
        let w = state(werner(0.5));
        assert!((concurrence(&w).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn negativity_examples() {
        assert!((negativity(&state(bell_phi_plus())).unwrap() - 1.0).abs() < 1e-12);
        assert!((negativity(&state(werner(0.5))).unwrap() - 0.25).abs() < 1e-12);
        assert_eq!(negativity(&state(CMat::identity(4).scale(0.25))).unwrap(), 0.0);
    }

    #[test]
    fn werner_ppt_boundary() {
        assert!(ppt_separable(&state(werner(0.2))).unwrap());
        assert!(!ppt_separable(&state(werner(0.5))).unwrap());
    }

    #[test]
    fn werner_thresholds() {
        let w = state(werner(0.5));
        // spectra (5,1,1,1)/8 and (3,3,3,-1)/8
        let det = alpha_set_det(&w).unwrap().threshold().unwrap();
        assert!((det - 5.0 / 32.0).abs() < 1e-12);
        for set in [
            alpha_set_mineig(&w).unwrap(),
            alpha_set_convdet(&w).unwrap(),
            alpha_set_concurrence(&w).unwrap(),
        ] {
            let t = set.threshold().unwrap();
            assert!((t - 0.5).abs() < 1e-9, "{set:?}");
        }
    }

    #[test]
    fn separable_states_are_unconstrained() {
        let w = state(werner(0.2));
        assert_eq!(alpha_set_det(&w).unwrap(), FeasibleAlphaSet::All);
        assert_eq!(alpha_set_mineig(&w).unwrap(), FeasibleAlphaSet::All);
        assert_eq!(alpha_set_convdet(&w).unwrap(), FeasibleAlphaSet::All);
        assert_eq!(alpha_set_concurrence(&w).unwrap(), FeasibleAlphaSet::All);
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        match alpha_grid_convmineig(&w, &grid).unwrap() {
            FeasibleAlphaSet::Mask(m) => assert!(m.iter().all(|&b| b)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bell_state_thresholds() {
        let b = state(bell_phi_plus());
        let pt = PtSpectrum::of(&b).unwrap();
        assert!((pt.det() + 1.0 / 16.0).abs() < 1e-14);
        assert_eq!(alpha_set_det(&b).unwrap().threshold(), Some(0.0));
        assert_eq!(alpha_set_mineig(&b).unwrap().threshold(), Some(0.0));
        assert!((alpha_set_concurrence(&b).unwrap().threshold().unwrap() - 0.5).abs() < 1e-7);
    }

    #[test]
    fn werner_grid_mask() {
        let w = state(werner(0.5));
        let grid: Vec<f64> = (0..=1000).map(|i| i as f64 / 1000.0).collect();
        let fast = alpha_grid_convmineig(&w, &grid).unwrap();
        let slow = alpha_grid_convmineig_scan(&w, &grid).unwrap();
        assert_eq!(fast, slow);
        if let FeasibleAlphaSet::Mask(m) = fast {
            for (i, &b) in m.iter().enumerate() {
                assert_eq!(b, grid[i] <= 0.5, "alpha {}", grid[i]);
            }
        }
        // extended range: feasible for α in [-1/2, 1/2] on this state
        let ext: Vec<f64> = (0..=500).map(|i| -2.25 + 5.0 * i as f64 / 500.0).collect();
        assert_eq!(
            alpha_grid_convmineig(&w, &ext).unwrap(),
            alpha_grid_convmineig_scan(&w, &ext).unwrap()
        );
    }

    #[test]
    fn rank3_quantities() {
        let s = spec(&[0.5, 0.25, 0.25, 0.0]);
        let st = crate::statespace::assemble_state(
            &CMat::identity(4),
            &s,
            Dims::QUBIT_QUBIT,
            Field::Complex,
        )
        .unwrap();
        let (m3, e3) = rank3_modified_quantities(&st).unwrap();
        assert!((m3 - 1.0 / 32.0).abs() < 1e-16);
        assert_eq!(e3, 0.25);
        let s = spec(&[0.98, 0.01, 0.01, 0.0]);
        let st = crate::statespace::assemble_state(
            &CMat::identity(4),
            &s,
            Dims::QUBIT_QUBIT,
            Field::Complex,
        )
        .unwrap();
        assert!((rank3_modified_quantities(&st).unwrap().0 - 9.8e-5).abs() < 1e-18);
        let full = state(werner(0.3));
        assert!(rank3_modified_quantities(&full).is_err());
    }

    #[test]
    fn concurrence_consistency_guard() {
        let bad = ConcurrencePair {
            c: 0.5,
            c_max: 0.4,
            c_max_raw: 0.4,
        };
        assert!(alpha_set_concurrence_from(bad).is_err());
    }
}
