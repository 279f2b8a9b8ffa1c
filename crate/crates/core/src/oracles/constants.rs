//! Registry of exact constants: separability probabilities, region masses and
//! rank-3 marginal statistics.

use std::sync::OnceLock;

use crate::error::{Error, Result};

use super::expr::{acot, asec, atan, int, pi, pow, ratio, sqrt, Expr};

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormConstant {
    pub id: &'static str,
    pub expr: Expr,
    /// `expr` evaluated in 512-bit arithmetic and rounded once.
    pub value: f64,
    /// Printed decimal approximation accompanying the expression.
    pub printed: &'static str,
    /// False when the printed approximation disagrees with `expr`.
    pub printed_consistent: bool,
    /// Value is a coefficient of the unknown β=4 normalization κ.
    pub times_kappa: bool,
    pub source: &'static str,
}

impl ClosedFormConstant {
    /// Absolute tolerance implied by the printed digits: one unit in the last place.
    pub fn printed_tolerance(&self) -> f64 {
        let frac = self.printed.split('.').nth(1).map_or(0, str::len);
        10f64.powi(-(frac as i32))
    }

    pub fn printed_value(&self) -> f64 {
        self.printed.parse().unwrap_or(f64::NAN)
    }

    pub fn printed_matches(&self) -> bool {
        (self.value - self.printed_value()).abs() <= self.printed_tolerance()
    }
}

struct Entry {
    id: &'static str,
    expr: Expr,
    printed: &'static str,
    consistent: bool,
    kappa: bool,
    source: &'static str,
}

fn entry(id: &'static str, expr: Expr, printed: &'static str, source: &'static str) -> Entry {
    Entry {
        id,
        expr,
        printed,
        consistent: true,
        kappa: false,
        source,
    }
}

fn sqrt2() -> Expr {
    sqrt(int(2))
}

fn acot_5_sqrt2() -> Expr {
    acot(int(5) / sqrt2())
}

fn entries() -> Vec<Entry> {
    let (psi1, psi2, psi3, psi4) = (956877309536, 781862943168, 746624752335, 1990999339560);
    let (phi1, phi2, phi3, phi4): (i128, i128, i128, i128) = (
        -806338156306739134839776,
        658857590468226345222144,
        629162653900414735065195,
        1677767077067772626840520,
    );
    let (zeta1, zeta2): (i128, i128) = (174916374035295022487516506, 42964561240209557008032951);
    let (gamma1, gamma2): (i128, i128) = (217894901318574565900294, 107614737772623370233945);

    let abs_real = (int(6928) - int(2205) * pi()) / (pow(int(2), 4) * sqrt2());
    let abs_complex = (int(psi1) - int(psi2) * sqrt2() - int(psi3) * sqrt2() * pi()
        + int(psi4) * sqrt2() * asec(int(3)))
        / (pow(int(2), 16) * pow(int(3), 5));
    let abs_quat = -(int(13)
        * (int(phi1) + int(phi2) * sqrt2() + int(phi3) * sqrt2() * pi() - int(phi4) * sqrt2() * asec(int(3))))
        / (pow(int(2), 34) * pow(int(3), 11));
    let upper_real = (int(75962) - int(25515) * sqrt2() * atan(sqrt2())) / (pow(int(2), 13) * pow(int(3), 3));
    let upper_complex = (int(174957361466) - int(124912178055) * sqrt2() * acot_5_sqrt2())
        / (pow(int(2), 31) * pow(int(3), 5));
    let upper_quat =
        (int(gamma1) - int(gamma2) * sqrt2() * acot_5_sqrt2()) / (pow(int(2), 63) * pow(int(3), 10));

    let silver = sqrt2() - int(1);
    let mut v = vec![
        entry("abs_sep_hs_real", abs_real.clone(), "0.0348338", "HS absolutely separable probability (C_max = 0), real two-qubit"),
        entry("abs_sep_hs_complex", abs_complex.clone(), "0.0036582630543035", "HS absolutely separable probability (C_max = 0), complex two-qubit"),
        entry("abs_sep_hs_quat", abs_quat.clone(), "0.0000398703", "HS absolutely separable probability (C_max = 0), quaternionic two-qubit"),
        entry(
            "upper_sep_hs_real",
            sqrt(ratio(3, 10)) * (int(3162214) - int(738885) * sqrt2() * atan(sqrt2()))
                / (pow(int(2), 12) * int(5) * int(7) * int(17) * int(19)),
            "0.02559647778",
            "HS separable probability from C_max in [1/2, 1] under sigma = (2-2C)^(3/2)/sqrt(30), real two-qubit",
        ),
        entry(
            "upper_sep_hs_complex",
            int(7) * (int(148453588142) - int(79729806357) * sqrt2() * acot_5_sqrt2())
                / (pow(int(2), 31) * pow(int(3), 7) * int(17)),
            "0.01029059519",
            "HS separable probability from C_max in [1/2, 1] under sigma = (2-2C)^3/15, complex two-qubit",
        ),
        Entry {
            kappa: true,
            ..entry(
                "upper_sep_hs_quat",
                int(5) * (int(zeta1) - int(zeta2) * sqrt2() * acot_5_sqrt2())
                    / (pow(int(2), 66) * pow(int(3), 8) * int(11) * int(29) * int(31)),
                "0.165191",
                "HS separable probability from C_max in [1/2, 1] under sigma = kappa (2-2C)^6, quaternionic two-qubit; coefficient of kappa",
            )
        },
        entry("upper_mass_hs_real", upper_real.clone(), "0.187584", "HS mass of C_max in [1/2, 1], real two-qubit"),
        entry("upper_mass_hs_complex", upper_complex.clone(), "0.241961", "HS mass of C_max in [1/2, 1], complex two-qubit"),
        entry("upper_mass_hs_quat", upper_quat.clone(), "0.323053", "HS mass of C_max in [1/2, 1], quaternionic two-qubit"),
        entry("lower_mass_hs_real", int(1) - abs_real - upper_real, "0.777582", "HS mass of C_max in (0, 1/2], real two-qubit (complement)"),
        entry("lower_mass_hs_complex", int(1) - abs_complex - upper_complex, "0.754381", "HS mass of C_max in (0, 1/2], complex two-qubit (complement)"),
        entry("lower_mass_hs_quat", int(1) - abs_quat - upper_quat, "0.676907", "HS mass of C_max in (0, 1/2], quaternionic two-qubit (complement)"),
        entry("hs_sep_real", ratio(8, 17), "0.470588", "conjectured HS separability probability, real two-qubit"),
        entry("hs_sep_complex", ratio(8, 33), "0.242424", "conjectured HS separability probability, complex two-qubit"),
        Entry {
            consistent: false,
            ..entry(
                "hs_sep_quat",
                ratio(72442944, 936239725),
                "0.0733389",
                "conjectured HS separability probability, quaternionic two-qubit; printed approximation repeats the Bures value",
            )
        },
        entry("hs_sep_real_rank3", ratio(4, 17), "0.235294", "conjectured HS separability probability, rank-3 real two-qubit"),
        entry("hs_sep_complex_rank3", ratio(4, 33), "0.121212", "conjectured HS separability probability, rank-3 complex two-qubit"),
        entry("bures_sep_complex", int(1680) * silver.clone() / pow(pi(), 8), "0.0733389", "silver-mean conjecture, Bures, complex two-qubit"),
        Entry {
            consistent: false,
            ..entry(
                "km_sep_complex",
                int(1575) * silver.clone() / (int(2) * pow(pi(), 8)),
                "0.035398",
                "Kubo-Mori conjecture, complex two-qubit; printed approximation disagrees with the expression",
            )
        },
        entry(
            "avg_monotone_sep_complex",
            int(81664) * silver / (int(75) * pow(pi(), 8)),
            "0.0475329",
            "average monotone metric conjecture, complex two-qubit",
        ),
        entry("hs_sep_qubit_qutrit_real", ratio(32, 213), "0.150235", "conjectured HS separability probability, real qubit-qutrit"),
        entry("hs_sep_qubit_qutrit_complex", ratio(32, 1199), "0.0266889", "conjectured HS separability probability, complex qubit-qutrit"),
        entry("hs_sep_qubit_qutrit_real_rank5", ratio(16, 213), "0.0751174", "conjectured HS separability probability, rank-5 real qubit-qutrit"),
        entry("hs_sep_qubit_qutrit_complex_rank5", ratio(16, 1199), "0.0133445", "conjectured HS separability probability, rank-5 complex qubit-qutrit"),
        entry("rank3_real_upper_mass", ratio(49, 81), "0.604938", "HS mass of C_max in [1/2, 1], rank-3 real two-qubit"),
        entry(
            "rank3_complex_upper_mass",
            int(996431) / (pow(int(2), 11) * pow(int(3), 6)),
            "0.667405",
            "HS mass of C_max in [1/2, 1], rank-3 complex two-qubit",
        ),
        entry(
            "rank3_quat_upper_mass",
            int(3335170241153) / (pow(int(2), 23) * pow(int(3), 12)),
            "0.748123",
            "HS mass of C_max in [1/2, 1], rank-3 quaternionic two-qubit",
        ),
        entry("rank3_real_mean", int(781) / (int(2) * pow(int(3), 6)), "0.535665", "mean of C_max under the rank-3 real HS marginal"),
        entry("rank3_complex_mean", int(35) / pow(int(2), 6), "0.546875", "mean of C_max under the rank-3 complex HS marginal"),
        entry("rank3_quat_mean", int(27313) / (pow(int(2), 14) * int(3)), "0.555684", "mean of C_max under the rank-3 quaternionic HS marginal"),
        entry("beta_fit_real_p", ratio(47641, 7196), "6.62048", "moment-matched beta distribution p, rank-3 real marginal"),
        entry("beta_fit_real_q", ratio(41297, 7196), "5.73888", "moment-matched beta distribution q, rank-3 real marginal"),
        entry("beta_fit_complex_p", ratio(12323885, 1142816), "10.7838", "moment-matched beta distribution p, rank-3 complex marginal"),
        entry("beta_fit_complex_q", ratio(10211219, 1142816), "8.93514", "moment-matched beta distribution q, rank-3 complex marginal"),
        entry(
            "beta_fit_quat_p",
            ratio(4108424031600889, 214515575216232),
            "19.1521",
            "moment-matched beta distribution p, rank-3 quaternionic marginal",
        ),
        entry(
            "beta_fit_quat_q",
            ratio(3285024436207367, 214515575216232),
            "15.3137",
            "moment-matched beta distribution q, rank-3 quaternionic marginal",
        ),
        entry("esf_real_at_half", int(1) / sqrt(int(30)), "0.182574", "assumed real ESF value at C_max = 1/2 from above"),
        entry("esf_complex_at_half", ratio(1, 15), "0.0666667", "assumed complex ESF value at C_max = 1/2 from above"),
    ];
    v.shrink_to_fit();
    v
}

fn build() -> Vec<ClosedFormConstant> {
    entries()
        .into_iter()
        .map(|e| {
            let value = e.expr.eval();
            let c = ClosedFormConstant {
                id: e.id,
                expr: e.expr,
                value,
                printed: e.printed,
                printed_consistent: e.consistent,
                times_kappa: e.kappa,
                source: e.source,
            };
            assert!(
                value.is_finite() && c.printed_matches() == c.printed_consistent,
                "constant {} evaluates to {value:e}, printed {} (consistency flag {})",
                c.id,
                c.printed,
                c.printed_consistent
            );
            c
        })
        .collect()
}

/// All registered constants, evaluated once on first use.
pub fn constants() -> &'static [ClosedFormConstant] {
    static REGISTRY: OnceLock<Vec<ClosedFormConstant>> = OnceLock::new();
    REGISTRY.get_or_init(build)
}

pub fn constant(id: &str) -> Result<&'static ClosedFormConstant> {
    constants().iter().find(|c| c.id == id).ok_or_else(|| Error::UnknownId {
        id: id.to_string(),
        valid: constant_ids().join(", "),
    })
}

pub fn constant_ids() -> Vec<&'static str> {
    constants().iter().map(|c| c.id).collect()
}

/// Shorthand for `constant(id)?.value` on ids known to exist.
pub(crate) fn value(id: &str) -> f64 {
    constant(id).map(|c| c.value).unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Reference values computed independently with 40-digit mpmath.
    const MPMATH: &[(&str, f64)] = &[
        ("abs_sep_hs_real", 0.034833796300153857),
        ("abs_sep_hs_complex", 0.0036582630543034855),
        ("abs_sep_hs_quat", 3.987034706801993e-5),
        ("upper_sep_hs_real", 0.025596477781026404),
        ("upper_sep_hs_complex", 0.010290595186799502),
        ("upper_sep_hs_quat", 0.16519106940291678),
        ("upper_mass_hs_real", 0.18758445851678368),
        ("upper_mass_hs_complex", 0.24196061902497536),
        ("upper_mass_hs_quat", 0.32305321657105640),
        ("km_sep_complex", 0.034377627033767835),
        ("hs_sep_quat", 0.077376490300067112),
        ("rank3_complex_upper_mass", 0.66740545160322359),
        ("rank3_quat_upper_mass", 0.74812307476983692),
    ];

    #[test]
    fn registry_matches_independent_evaluation() {
        for &(id, v) in MPMATH {
            let c = constant(id).unwrap();
            assert!(((c.value - v) / v).abs() < 1e-12, "{id}: {} vs {v}", c.value);
        }
    }

    #[test]
    fn registry_examples() {
        let c = constant("abs_sep_hs_real").unwrap();
        assert!((c.value - 0.0348338).abs() < 1e-7);
        assert_eq!(c.expr.to_string(), "(6928 - 2205*pi)/(2^4*sqrt(2))");
        assert_eq!(constant("rank3_real_upper_mass").unwrap().value, 49.0 / 81.0);
        assert_eq!(constant("hs_sep_complex").unwrap().value, 8.0 / 33.0);
        assert!(constant("upper_sep_hs_quat").unwrap().times_kappa);
    }

    #[test]
    fn unknown_id_lists_valid_ids() {
        match constant("nope") {
            Err(Error::UnknownId { id, valid }) => {
                assert_eq!(id, "nope");
                assert!(valid.contains("hs_sep_real"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ids_are_unique_and_complements_close() {
        let ids = constant_ids();
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), ids.len());
        for f in ["real", "complex", "quat"] {
            let total = value(&format!("abs_sep_hs_{f}"))
                + value(&format!("lower_mass_hs_{f}"))
                + value(&format!("upper_mass_hs_{f}"));
            assert!((total - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn double_precision_loses_the_quaternionic_constant() {
        let c = constant("abs_sep_hs_quat").unwrap();
        assert!(((c.expr.eval_f64() - c.value) / c.value).abs() > 1e-12);
    }
}
