//! Closed-form α-curve fits and model separability functions of `C_max`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FitCurve {
    /// `8 / (8 + 9√α)`, real two-qubit HS, determinant constraint.
    RealHs,
    /// `(c / (c + 25√α))²` with `c = 8 + 2√66`, complex two-qubit HS.
    ComplexHs,
    /// Square of [`FitCurve::RealHs`], the near-fit to the complex HS curve.
    RealHsSquared,
    /// Seventh-root Bures fit with the sign chosen so the curve is a probability.
    ComplexBures,
    /// Seventh-root Bures fit exactly as printed; equals minus the probability.
    ComplexBuresPrinted,
    /// `1 - 9α/17`, real two-qubit HS, determinant of convex combinations.
    RealHsConvDetLine,
    /// `64 / ((√2398 - 8)√α + 8)²`, complex qubit-qutrit HS.
    QubitQutritSqrt,
    /// `64 / ((√2398 - 8)α + 8)²`, complex qubit-qutrit HS.
    QubitQutritLinear,
}

impl FitCurve {
    pub const ALL: [FitCurve; 8] = [
        FitCurve::RealHs,
        FitCurve::ComplexHs,
        FitCurve::RealHsSquared,
        FitCurve::ComplexBures,
        FitCurve::ComplexBuresPrinted,
        FitCurve::RealHsConvDetLine,
        FitCurve::QubitQutritSqrt,
        FitCurve::QubitQutritLinear,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            FitCurve::RealHs => "real-hs",
            FitCurve::ComplexHs => "complex-hs",
            FitCurve::RealHsSquared => "real-hs-squared",
            FitCurve::ComplexBures => "complex-bures",
            FitCurve::ComplexBuresPrinted => "complex-bures-printed",
            FitCurve::RealHsConvDetLine => "real-hs-convdet-line",
            FitCurve::QubitQutritSqrt => "qubit-qutrit-sqrt",
            FitCurve::QubitQutritLinear => "qubit-qutrit-linear",
        }
    }

    pub fn parse(s: &str) -> Result<FitCurve> {
        FitCurve::ALL
            .into_iter()
            .find(|c| c.tag() == s)
            .ok_or_else(|| Error::UnknownId {
                id: s.to_string(),
                valid: FitCurve::ALL.map(FitCurve::tag).join(", "),
            })
    }

    /// Registry id of the probability the curve reaches at `α = 1`.
    pub fn target_id(self) -> Option<&'static str> {
        match self {
            FitCurve::RealHs | FitCurve::RealHsConvDetLine => Some("hs_sep_real"),
            FitCurve::ComplexHs => Some("hs_sep_complex"),
            FitCurve::ComplexBures => Some("bures_sep_complex"),
            FitCurve::QubitQutritSqrt | FitCurve::QubitQutritLinear => Some("hs_sep_qubit_qutrit_complex"),
            FitCurve::RealHsSquared | FitCurve::ComplexBuresPrinted => None,
        }
    }
}

fn bures_fit(alpha: f64) -> f64 {
    let s2 = 2f64.sqrt();
    let r = alpha.powf(1.0 / 7.0);
    let d = 4.0 * (105.0 * (s2 - 1.0)).sqrt() * (r - 1.0) + PI.powi(4) * r;
    1680.0 * (1.0 - s2) / (d * d)
}

/// Evaluates a named fit at `α ∈ [0, 1]`.
pub fn fit_curve(curve: FitCurve, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha = {alpha} lies outside [0, 1]")));
    }
    let sa = alpha.sqrt();
    let qq = 2398f64.sqrt() - 8.0;
    Ok(match curve {
        FitCurve::RealHs => 8.0 / (8.0 + 9.0 * sa),
        FitCurve::ComplexHs => {
            let c = 8.0 + 2.0 * 66f64.sqrt();
            (c / (c + 25.0 * sa)).powi(2)
        }
        FitCurve::RealHsSquared => (8.0 / (8.0 + 9.0 * sa)).powi(2),
        FitCurve::ComplexBures => -bures_fit(alpha),
        FitCurve::ComplexBuresPrinted => bures_fit(alpha),
        FitCurve::RealHsConvDetLine => 1.0 - 9.0 * alpha / 17.0,
        FitCurve::QubitQutritSqrt => 64.0 / (qq * sa + 8.0).powi(2),
        FitCurve::QubitQutritLinear => 64.0 / (qq * alpha + 8.0).powi(2),
    })
}

/// Which separability-function model and on what half-range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DysonShape {
    /// Full-rank two-qubit, `C ∈ [1/2, 1]`: `(2 - 2C)^{3β/2}`.
    Rank4Upper,
    /// Rank-3 two-qubit, `C ∈ [1/2, 1]`: `(2 - 2C)^{7β/4}`, one at `C = 1/2`.
    Rank3Upper,
    /// Full-rank qubit-qutrit, `C ∈ [1/3, 1]`: `(4/3 - C)^{7β/2}`, one at `C = 1/3`.
    Rank6Upper,
    /// Full-rank two-qubit, `C ∈ (0, 1/2]`: `σ¹ ≈ 1 - 1.75C` and
    /// `σ² ≈ (1 + 2C)(σ¹)²`.
    Rank4Lower,
}

impl DysonShape {
    pub fn domain(self) -> (f64, f64) {
        match self {
            DysonShape::Rank4Upper | DysonShape::Rank3Upper => (0.5, 1.0),
            DysonShape::Rank6Upper => (1.0 / 3.0, 1.0),
            DysonShape::Rank4Lower => (0.0, 0.5),
        }
    }
}

/// A model separability function; `norm` multiplies the shape and is absent
/// when no normalization is known (notably κ for β = 4).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DysonModel {
    pub shape: DysonShape,
    pub beta: u32,
    pub norm: Option<f64>,
}

impl DysonModel {
    /// Model with its known normalization filled in.
    pub fn new(shape: DysonShape, beta: u32) -> Result<Self> {
        let norm = match (shape, beta) {
            (DysonShape::Rank4Upper, 1) => Some(1.0 / 30f64.sqrt()),
            (DysonShape::Rank4Upper, 2) => Some(1.0 / 15.0),
            (DysonShape::Rank4Upper, 4) => None,
            (DysonShape::Rank3Upper | DysonShape::Rank6Upper, 1 | 2) => None,
            (DysonShape::Rank4Lower, 1 | 2) => Some(1.0),
            _ => {
                return Err(Error::Unsupported(format!(
                    "no {shape:?} model for beta {beta}"
                )))
            }
        };
        Ok(DysonModel { shape, beta, norm })
    }

    /// The model without its normalization factor.
    pub fn shape_at(&self, c: f64) -> Result<f64> {
        let (lo, hi) = self.shape.domain();
        let inside = match self.shape {
            DysonShape::Rank4Lower => c > lo && c <= hi,
            _ => c >= lo && c <= hi,
        };
        if !inside {
            return Err(Error::Domain(format!(
                "C = {c} lies outside the {:?} domain [{lo}, {hi}]",
                self.shape
            )));
        }
        let b = self.beta as f64;
        Ok(match self.shape {
            DysonShape::Rank4Upper => (2.0 - 2.0 * c).powf(1.5 * b),
            DysonShape::Rank3Upper => (2.0 - 2.0 * c).powf(1.75 * b),
            DysonShape::Rank6Upper => (4.0 / 3.0 - c).powf(3.5 * b),
            DysonShape::Rank4Lower => {
                let s1 = 1.0 - 1.75 * c;
                if self.beta == 1 {
                    s1
                } else {
                    (1.0 + 2.0 * c) * s1 * s1
                }
            }
        })
    }
}

/// Normalized model value; errors when the normalization is unknown.
pub fn dyson_sigma(model: &DysonModel, c: f64) -> Result<f64> {
    let norm = model.norm.ok_or_else(|| {
        Error::Unsupported(format!(
            "{:?} model for beta {} has no known normalization; use the unnormalized shape",
            model.shape, model.beta
        ))
    })?;
    Ok(norm * model.shape_at(c)?)
}

/// `σ²(C) / σ¹(C)²` suggested for `C ∈ (0, 1/2]`: `1 + 2C` at full rank, `1 + 3C` at rank 3.
pub fn lower_half_ratio(rank: usize, c: f64) -> Result<f64> {
    if !(c > 0.0 && c <= 0.5) {
        return Err(Error::Domain(format!("C = {c} lies outside (0, 1/2]")));
    }
    match rank {
        4 => Ok(1.0 + 2.0 * c),
        3 => Ok(1.0 + 3.0 * c),
        _ => Err(Error::Unsupported(format!("no lower-half ratio model for rank {rank}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::constants::value;

    #[test]
    fn fit_endpoints() {
        assert_eq!(fit_curve(FitCurve::RealHs, 1.0).unwrap(), 8.0 / 17.0);
        assert_eq!(fit_curve(FitCurve::RealHs, 0.0).unwrap(), 1.0);
        assert!((fit_curve(FitCurve::ComplexHs, 1.0).unwrap() - 8.0 / 33.0).abs() < 1e-12);
        assert_eq!(fit_curve(FitCurve::ComplexHs, 0.0).unwrap(), 1.0);
        for c in FitCurve::ALL {
            if let Some(id) = c.target_id() {
                let v = fit_curve(c, 1.0).unwrap();
                assert!((v - value(id)).abs() < 1e-12, "{c:?}: {v}");
            }
        }
        assert!(fit_curve(FitCurve::RealHs, 1.5).is_err());
    }

    #[test]
    fn printed_bures_fit_has_the_opposite_sign() {
        let v1 = fit_curve(FitCurve::ComplexBuresPrinted, 1.0).unwrap();
        assert!((v1 + value("bures_sep_complex")).abs() < 1e-12);
        assert!((fit_curve(FitCurve::ComplexBuresPrinted, 0.0).unwrap() + 1.0).abs() < 1e-12);
        assert!((fit_curve(FitCurve::ComplexBures, 0.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qubit_qutrit_sandwich() {
        let a = fit_curve(FitCurve::QubitQutritSqrt, 0.3).unwrap();
        let b = fit_curve(FitCurve::QubitQutritLinear, 0.3).unwrap();
        // √α > α on (0, 1), so the square-root curve lies below
        assert!(a < b);
    }

    #[test]
    fn parse_round_trip() {
        for c in FitCurve::ALL {
            assert_eq!(FitCurve::parse(c.tag()).unwrap(), c);
        }
        assert!(matches!(FitCurve::parse("nope"), Err(Error::UnknownId { .. })));
    }

    #[test]
    fn dyson_examples() {
        let complex = DysonModel::new(DysonShape::Rank4Upper, 2).unwrap();
        assert!((dyson_sigma(&complex, 0.5).unwrap() - 1.0 / 15.0).abs() < 1e-15);
        let real = DysonModel::new(DysonShape::Rank4Upper, 1).unwrap();
        assert_eq!(dyson_sigma(&real, 1.0).unwrap(), 0.0);
        let lower = DysonModel::new(DysonShape::Rank4Lower, 2).unwrap();
        assert!((dyson_sigma(&lower, 0.2).unwrap() - 0.5915).abs() < 1e-12);
        assert!(dyson_sigma(&complex, 0.4).is_err());
    }

    #[test]
    fn dyson_ratio_is_two_above_half() {
        let r = DysonModel::new(DysonShape::Rank4Upper, 1).unwrap();
        let c = DysonModel::new(DysonShape::Rank4Upper, 2).unwrap();
        for i in 0..=10 {
            let x = 0.5 + 0.05 * i as f64;
            let s1 = dyson_sigma(&r, x).unwrap();
            if s1 > 0.0 {
                assert!((dyson_sigma(&c, x).unwrap() / (s1 * s1) - 2.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn quaternionic_needs_kappa() {
        let q = DysonModel::new(DysonShape::Rank4Upper, 4).unwrap();
        assert!(q.norm.is_none());
        assert!(matches!(dyson_sigma(&q, 0.6), Err(Error::Unsupported(_))));
        assert!((q.shape_at(0.5).unwrap() - 1.0).abs() < 1e-15);
        let r3 = DysonModel::new(DysonShape::Rank3Upper, 2).unwrap();
        assert!((r3.shape_at(0.5).unwrap() - 1.0).abs() < 1e-15);
        let r6 = DysonModel::new(DysonShape::Rank6Upper, 2).unwrap();
        assert!((r6.shape_at(1.0 / 3.0).unwrap() - 1.0).abs() < 1e-14);
        assert!(lower_half_ratio(3, 0.2).unwrap() > lower_half_ratio(4, 0.2).unwrap());
    }
}
