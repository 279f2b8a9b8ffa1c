//! Closed-form reference values: exact constants, rank-3 marginals, fit
//! curves, model separability functions and integral identities.

pub mod constants;
pub mod curves;
pub mod expr;
pub mod identities;
pub mod quad;
pub mod rank3;

pub use constants::{constant, constant_ids, constants, ClosedFormConstant};
pub use curves::{dyson_sigma, fit_curve, lower_half_ratio, DysonModel, DysonShape, FitCurve};
pub use identities::{chamber_expectation, chamber_norm, esf_probability, verify_identity, Identity, IdentityReport};
pub use rank3::{beta_fit_params, marg_rank3, rank3_marginal_quadrature, rank3_moments, BetaFit, Rank3Moments};

use crate::estimator::Estimate;

/// `p4/p3 - (2 - p_abs/p3)`; zero when `p4 = 2 p3 - p_abs`.
pub fn sbz_check(p_rank4: f64, p_rank3: f64, p_abs: f64) -> f64 {
    p_rank4 / p_rank3 - (2.0 - p_abs / p_rank3)
}

/// [`sbz_check`] on independent estimates, with a delta-method standard error.
pub fn sbz_check_estimates(p_rank4: Estimate, p_rank3: Estimate, p_abs: Estimate) -> Estimate {
    let v = sbz_check(p_rank4.value, p_rank3.value, p_abs.value);
    let p3 = p_rank3.value;
    // r = (p4 + pa)/p3 - 2
    let d3 = -(p_rank4.value + p_abs.value) / (p3 * p3);
    let se = ((p_rank4.se / p3).powi(2) + (p_abs.se / p3).powi(2) + (d3 * p_rank3.se).powi(2)).sqrt();
    Estimate { value: v, se }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sbz_relation() {
        let (p3, pa) = (4.0 / 33.0, constant("abs_sep_hs_complex").unwrap().value);
        assert!(sbz_check(2.0 * p3 - pa, p3, pa).abs() < 1e-14);
        assert_eq!(sbz_check(0.3, 0.2, 0.0), 0.3 / 0.2 - 2.0);
        // the conjectured pair 8/33, 4/33 leaves exactly the absolute-separability imbalance
        assert!((sbz_check(8.0 / 33.0, p3, pa) - pa / p3).abs() < 1e-14);
        let e = sbz_check_estimates(
            Estimate { value: 0.24, se: 0.001 },
            Estimate { value: 0.12, se: 0.001 },
            Estimate { value: 0.0036, se: 0.0001 },
        );
        assert!(e.se > 0.0 && e.value.is_finite());
    }
}
