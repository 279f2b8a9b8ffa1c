//! Marginal law of `C = λ1 - λ3` under the rank-3 two-qubit HS eigenvalue measure.

use crate::error::{Error, Result};

use super::constants::value;
use super::quad::GaussLegendre;

fn check(c: f64, beta: u32) -> Result<()> {
    if !matches!(beta, 1 | 2 | 4) {
        return Err(Error::Domain(format!("beta must be 1, 2 or 4, got {beta}")));
    }
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::Domain(format!("C = {c} lies outside [0, 1]")));
    }
    Ok(())
}

/// Closed-form marginal density; lower branch on `[0, 1/2]`, upper on `(1/2, 1]`.
///
/// The quaternionic upper branch has no closed form here and is reported as
/// unsupported; [`rank3_marginal_quadrature`] covers it numerically.
pub fn marg_rank3(c: f64, beta: u32) -> Result<f64> {
    check(c, beta)?;
    let lower = c <= 0.5;
    let c2 = c * c;
    Ok(match (beta, lower) {
        (1, true) => -(1792.0 / 81.0) * c.powi(4) * (12.0 * c2 - 5.0),
        (1, false) => (3584.0 / 81.0) * (c - 1.0).powi(4) * c * (4.0 * c * (5.0 * c - 1.0) - 1.0),
        (2, true) => (7280.0 / 729.0) * c.powi(7) * (((155.0 * c2 + 1287.0) * c2 - 1089.0) * c2 + 231.0),
        (2, false) => {
            -(7280.0 / 729.0)
                * (c - 1.0).powi(7)
                * c2
                * (c * (c * (c * (16325.0 * c - 7693.0) - 379.0) + 315.0) + 45.0)
        }
        (4, true) => {
            let inner = ((((7133.0 * c2 + 236790.0) * c2 + 253023.0) * c2 - 729980.0) * c2 + 497097.0) * c2
                - 142766.0;
            9209200.0 * c.powi(13) * (3.0 * inner * c2 + 46189.0) / 531441.0
        }
        _ => {
            return Err(Error::Unsupported(
                "closed-form quaternionic rank-3 marginal above C = 1/2".into(),
            ))
        }
    })
}

const NODES: usize = 20;

/// Unnormalized HS weight `Π(λi-λj)^β Π λi^β` at `(C, λ2)`.
fn weight(c: f64, l2: f64, beta: u32) -> f64 {
    let l1 = 0.5 * (1.0 - l2 + c);
    let l3 = 0.5 * (1.0 - l2 - c);
    let b = beta as i32;
    ((l1 - l2) * (l1 - l3) * (l2 - l3) * l1 * l2 * l3).abs().powi(b)
}

fn unnormalized(c: f64, beta: u32, g: &GaussLegendre) -> f64 {
    let lo = (1.0 - c) / 3.0;
    let hi = ((1.0 + c) / 3.0).min(1.0 - c);
    if hi <= lo {
        return 0.0;
    }
    g.integrate(lo, hi, |l2| weight(c, l2, beta))
}

/// `∫_a^b C^k m(C) dC` for the unnormalized marginal, with `[a, b]` inside one branch.
fn unnormalized_moment(beta: u32, k: i32, a: f64, b: f64, g: &GaussLegendre) -> f64 {
    g.integrate(a, b, |c| c.powi(k) * unnormalized(c, beta, g))
}

fn normalizer(beta: u32, g: &GaussLegendre) -> f64 {
    unnormalized_moment(beta, 0, 0.0, 0.5, g) + unnormalized_moment(beta, 0, 0.5, 1.0, g)
}

/// Marginal density obtained by integrating the eigenvalue measure directly.
pub fn rank3_marginal_quadrature(c: f64, beta: u32) -> Result<f64> {
    check(c, beta)?;
    let g = GaussLegendre::new(NODES);
    Ok(unnormalized(c, beta, &g) / normalizer(beta, &g))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rank3Moments {
    pub beta: u32,
    /// `∫_0^1` of the density.
    pub total: f64,
    pub mean: f64,
    pub second_moment: f64,
    /// Mass on `[0, 1/2]`.
    pub lower_mass: f64,
    /// `1 - lower_mass`.
    pub upper_mass: f64,
}

impl Rank3Moments {
    pub fn variance(&self) -> f64 {
        self.second_moment - self.mean * self.mean
    }
}

/// Moments of the closed-form marginal by Gauss-Legendre quadrature on each
/// branch. The quaternionic upper branch is integrated from the eigenvalue
/// measure itself.
pub fn rank3_moments(beta: u32) -> Result<Rank3Moments> {
    check(0.5, beta)?;
    let g = GaussLegendre::new(NODES);
    let branch = |k: i32, a: f64, b: f64| -> Result<f64> {
        let mut err = None;
        let v = g.integrate(a, b, |c| match marg_rank3(c, beta) {
            Ok(m) => c.powi(k) * m,
            Err(e) => {
                err = Some(e);
                f64::NAN
            }
        });
        err.map_or(Ok(v), Err)
    };
    let upper = |k: i32| -> Result<f64> {
        if beta == 4 {
            Ok(unnormalized_moment(4, k, 0.5, 1.0, &g) / normalizer(4, &g))
        } else {
            branch(k, 0.5, 1.0)
        }
    };
    let lower_mass = branch(0, 0.0, 0.5)?;
    Ok(Rank3Moments {
        beta,
        total: lower_mass + upper(0)?,
        mean: branch(1, 0.0, 0.5)? + upper(1)?,
        second_moment: branch(2, 0.0, 0.5)? + upper(2)?,
        lower_mass,
        upper_mass: 1.0 - lower_mass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaFit {
    pub beta: u32,
    /// Stored exact pair.
    pub p: f64,
    pub q: f64,
    /// Recomputed by matching mean and variance of the marginal.
    pub p_moment: f64,
    pub q_moment: f64,
}

/// Beta-distribution parameters approximating the rank-3 marginal.
///
/// Fails with a numerical error if the moment-matched pair disagrees with
/// the stored rationals by more than `1e-9` relative.
pub fn beta_fit_params(beta: u32) -> Result<BetaFit> {
    let field = match beta {
        1 => "real",
        2 => "complex",
        4 => "quat",
        _ => return Err(Error::Domain(format!("beta must be 1, 2 or 4, got {beta}"))),
    };
    let m = rank3_moments(beta)?;
    let k = m.mean * (1.0 - m.mean) / m.variance() - 1.0;
    let fit = BetaFit {
        beta,
        p: value(&format!("beta_fit_{field}_p")),
        q: value(&format!("beta_fit_{field}_q")),
        p_moment: m.mean * k,
        q_moment: (1.0 - m.mean) * k,
    };
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    if rel(fit.p_moment, fit.p) > 1e-9 || rel(fit.q_moment, fit.q) > 1e-9 {
        return Err(Error::Numerical(format!(
            "moment-matched beta parameters {:?} disagree with stored {:?}",
            (fit.p_moment, fit.q_moment),
            (fit.p, fit.q)
        )));
    }
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn left_branch_value_at_half() {
        assert!((marg_rank3(0.5, 1).unwrap() - 224.0 / 81.0).abs() < 1e-13);
    }

    #[test]
    fn branches_meet_at_half() {
        for beta in [1, 2] {
            let left = marg_rank3(0.5, beta).unwrap();
            let right = marg_rank3(0.5 + 1e-12, beta).unwrap();
            assert!((left - right).abs() < 1e-9, "beta {beta}: {left} vs {right}");
        }
    }

    #[test]
    fn quaternionic_upper_branch_is_unsupported() {
        assert!(matches!(marg_rank3(0.7, 4), Err(Error::Unsupported(_))));
        assert!(marg_rank3(0.5, 4).is_ok());
        assert!(marg_rank3(1.5, 1).is_err());
        assert!(marg_rank3(0.3, 3).is_err());
    }

    #[test]
    fn closed_forms_match_the_eigenvalue_measure() {
        for beta in [1, 2, 4] {
            for i in 1..40 {
                let c = i as f64 / 40.0;
                let q = rank3_marginal_quadrature(c, beta).unwrap();
                if let Ok(m) = marg_rank3(c, beta) {
                    assert!((m - q).abs() < 1e-10 * (1.0 + m.abs()), "beta {beta} C {c}: {m} vs {q}");
                }
            }
        }
    }

    #[test]
    fn moments_match_registry() {
        for (beta, f) in [(1, "real"), (2, "complex"), (4, "quat")] {
            let m = rank3_moments(beta).unwrap();
            assert!((m.total - 1.0).abs() < 1e-10, "{m:?}");
            assert!((m.mean - value(&format!("rank3_{f}_mean"))).abs() < 1e-10, "{m:?}");
            assert!((m.upper_mass - value(&format!("rank3_{f}_upper_mass"))).abs() < 1e-10, "{m:?}");
        }
    }

    #[test]
    fn beta_fits_recompute() {
        let f = beta_fit_params(1).unwrap();
        assert_eq!(f.p, 47641.0 / 7196.0);
        assert_eq!(f.q, 41297.0 / 7196.0);
        let f2 = beta_fit_params(2).unwrap();
        assert!((f2.p - 10.7838).abs() < 1e-4 && (f2.q - 8.93514).abs() < 1e-5);
        assert!(beta_fit_params(4).is_ok());
        assert!(beta_fit_params(3).is_err());
    }
}
