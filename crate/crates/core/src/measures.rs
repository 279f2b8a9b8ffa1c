//! Eigenvalue densities of the Hilbert-Schmidt and monotone-metric measures.
//!
//! All densities are unnormalized and taken with respect to the uniform
//! measure on the simplex. Every estimator output is a ratio of weighted
//! sums, so normalization constants never enter.

use crate::error::{Error, Result};
use crate::statespace::Spectrum;

/// Smallest eigenvalue accepted by the monotone-metric densities.
pub const EIGEN_FLOOR: f64 = 1e-12;

/// Measure family.
///
/// Monotone metrics carry their Morozova-Chentsov kernel `c(x,y) = 1/(y f(x/y))`
/// with operator monotone `f`:
/// Bures `f(t) = (1+t)/2`, Wigner-Yanase `f(t) = (1+√t)²/4`, Kubo-Mori `f(t) = (t-1)/ln t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    HilbertSchmidt,
    Bures,
    WignerYanase,
    KuboMori,
}

impl Metric {
    pub const ALL: [Metric; 4] = [
        Metric::HilbertSchmidt,
        Metric::Bures,
        Metric::WignerYanase,
        Metric::KuboMori,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Metric::HilbertSchmidt => "hs",
            Metric::Bures => "bures",
            Metric::WignerYanase => "wy",
            Metric::KuboMori => "km",
        }
    }

    pub fn parse(s: &str) -> Result<Metric> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hs" => Ok(Metric::HilbertSchmidt),
            "bures" => Ok(Metric::Bures),
            "wy" => Ok(Metric::WignerYanase),
            "km" => Ok(Metric::KuboMori),
            other => Err(Error::Config(format!(
                "unknown metric `{other}` (expected hs, bures, wy, km)"
            ))),
        }
    }

    pub fn is_monotone(self) -> bool {
        self != Metric::HilbertSchmidt
    }

    /// Whether the metric is defined for Dyson index `beta`.
    pub fn supports_beta(self, beta: u32) -> bool {
        match self {
            Metric::HilbertSchmidt => matches!(beta, 1 | 2 | 4),
            _ => matches!(beta, 1 | 2),
        }
    }
}

/// Unnormalized density value, carried together with its logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureWeight {
    pub value: f64,
    pub log_value: f64,
}

impl MeasureWeight {
    fn from_log(log_value: f64) -> Self {
        MeasureWeight {
            value: log_value.exp(),
            log_value,
        }
    }
}

/// Morozova-Chentsov function `c(x, y)`; `c(x, x) = 1/x`.
pub fn cm_function(metric: Metric, x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0 && y > 0.0) {
        return Err(Error::Domain(format!("c(x,y) needs x, y > 0, got ({x}, {y})")));
    }
    Ok(match metric {
        Metric::HilbertSchmidt => {
            return Err(Error::Unsupported(
                "Hilbert-Schmidt is not a monotone metric".into(),
            ))
        }
        Metric::Bures => 2.0 / (x + y),
        Metric::WignerYanase => 4.0 / (x.sqrt() + y.sqrt()).powi(2),
        Metric::KuboMori => {
            if x == y {
                1.0 / x
            } else {
                // ln(x/y)/(x-y) with a series near the diagonal
                let r = x / y;
                if (r - 1.0).abs() < 1e-5 {
                    let d = r - 1.0;
                    (1.0 - d / 2.0 + d * d / 3.0) / y
                } else {
                    r.ln() / (x - y)
                }
            }
        }
    })
}

/// `Π_{i<j<=k} (λ_i-λ_j)^β · Π_{i<=k} λ_i^{β(N-k)}` for a spectrum of rank `k`.
pub fn hs_weight(spec: &Spectrum, beta: u32, n: usize) -> Result<MeasureWeight> {
    if !matches!(beta, 1 | 2 | 4) {
        return Err(Error::Domain(format!("beta must be 1, 2 or 4, got {beta}")));
    }
    let k = spec.rank();
    if k > n {
        return Err(Error::Domain(format!("rank {k} exceeds N={n}")));
    }
    let lam = spec.support();
    let b = f64::from(beta);
    let mut log = 0.0;
    for i in 0..k {
        for j in i + 1..k {
            log += b * (lam[i] - lam[j]).abs().ln();
        }
    }
    if k < n {
        let e = b * (n - k) as f64;
        for &l in lam {
            log += e * l.ln();
        }
    }
    Ok(MeasureWeight::from_log(log))
}

/// `Π λ_i^{-1/2} · Π_{i<j} [(λ_i-λ_j)² c(λ_i,λ_j)]^{β/2}` on full-rank spectra.
pub fn monotone_weight(spec: &Spectrum, metric: Metric, beta: u32) -> Result<MeasureWeight> {
    if !metric.is_monotone() {
        return Err(Error::Unsupported("monotone_weight needs bures, wy or km".into()));
    }
    if !matches!(beta, 1 | 2) {
        return Err(Error::Domain(format!(
            "monotone metrics support beta 1 or 2, got {beta}"
        )));
    }
    let lam = spec.values();
    if spec.rank() != lam.len() {
        return Err(Error::Unsupported("monotone metrics need a full-rank spectrum".into()));
    }
    if lam.iter().any(|&l| l < EIGEN_FLOOR) {
        return Err(Error::Rejected("eigenvalue below the monotone-metric floor".into()));
    }
    let half_beta = f64::from(beta) / 2.0;
    let mut log = 0.0;
    for &l in lam {
        log -= 0.5 * l.ln();
    }
    for i in 0..lam.len() {
        for j in i + 1..lam.len() {
            let d = lam[i] - lam[j];
            let c = cm_function(metric, lam[i], lam[j])?;
            log += half_beta * ((d * d).ln() + c.ln());
        }
    }
    Ok(MeasureWeight::from_log(log))
}

/// Density of `metric` at Dyson index `beta` for a spectrum padded to `n`.
pub fn weight(spec: &Spectrum, metric: Metric, beta: u32, n: usize) -> Result<MeasureWeight> {
    match metric {
        Metric::HilbertSchmidt => hs_weight(spec, beta, n),
        m => monotone_weight(spec, m, beta),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(v: &[f64]) -> Spectrum {
        Spectrum::new(v.to_vec()).unwrap()
    }

    #[test]
    fn kernel_values() {
        assert_eq!(cm_function(Metric::Bures, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(cm_function(Metric::Bures, 1.0, 3.0).unwrap(), 0.5);
        let e = std::f64::consts::E;
        let km = cm_function(Metric::KuboMori, 1.0, e).unwrap();
        assert!((km - 1.0 / (e - 1.0)).abs() < 1e-15);
        assert!((km - 0.581977).abs() < 1e-6);
        assert_eq!(cm_function(Metric::WignerYanase, 4.0, 4.0).unwrap(), 0.25);
        assert!(cm_function(Metric::Bures, 0.0, 1.0).is_err());
        // continuity of the Kubo-Mori series branch
        let a = cm_function(Metric::KuboMori, 0.3, 0.3 * (1.0 + 2e-5)).unwrap();
        let b = cm_function(Metric::KuboMori, 0.3, 0.3 * (1.0 + 5e-6)).unwrap();
        assert!((a - b).abs() < 1e-4);
    }

    #[test]
    fn kernels_are_symmetric() {
        for m in [Metric::Bures, Metric::WignerYanase, Metric::KuboMori] {
            let a = cm_function(m, 0.2, 0.7).unwrap();
            let b = cm_function(m, 0.7, 0.2).unwrap();
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn hs_product_of_gaps() {
        let s = spec(&[0.4, 0.3, 0.2, 0.1]);
        let w1 = hs_weight(&s, 1, 4).unwrap().value;
        let w2 = hs_weight(&s, 2, 4).unwrap().value;
        assert!((w1 - 1.2e-5).abs() < 1e-17);
        assert!((w2 - 1.44e-10).abs() < 1e-22);
        assert_eq!(hs_weight(&spec(&[0.25; 4]), 2, 4).unwrap().value, 0.0);
    }

    #[test]
    fn rank_deficient_hs_exponent() {
        let s = spec(&[0.5, 0.3, 0.2, 0.0]);
        let w = hs_weight(&s, 2, 4).unwrap().value;
        let want = (0.2f64 * 0.3 * 0.1).powi(2) * (0.5f64 * 0.3 * 0.2).powi(2);
        assert!((w - want).abs() < 1e-12 * want, "{w} vs {want}");
    }

    #[test]
    fn bures_direct_evaluation() {
        let l = [0.4, 0.3, 0.2, 0.1];
        let mut want = 1.0 / (l.iter().product::<f64>()).sqrt();
        for i in 0..4 {
            for j in i + 1..4 {
                want *= (l[i] - l[j]).powi(2) * 2.0 / (l[i] + l[j]);
            }
        }
        let w = monotone_weight(&spec(&l), Metric::Bures, 2).unwrap().value;
        assert!((w - want).abs() < 1e-13 * want);
    }

    #[test]
    fn repeated_eigenvalues_vanish() {
        for m in [Metric::Bures, Metric::WignerYanase, Metric::KuboMori] {
            let w = monotone_weight(&spec(&[0.4, 0.2, 0.2, 0.2]), m, 2).unwrap();
            assert_eq!(w.value, 0.0);
        }
    }

    #[test]
    fn wy_exceeds_bures_on_distinct_spectra() {
        let s = spec(&[0.45, 0.3, 0.15, 0.1]);
        for beta in [1, 2] {
            let b = monotone_weight(&s, Metric::Bures, beta).unwrap().value;
            let w = monotone_weight(&s, Metric::WignerYanase, beta).unwrap().value;
            let l = s.values();
            let mut ratio = 1.0;
            for i in 0..4 {
                for j in i + 1..4 {
                    let cw = cm_function(Metric::WignerYanase, l[i], l[j]).unwrap();
                    let cb = cm_function(Metric::Bures, l[i], l[j]).unwrap();
                    ratio *= (cw / cb).powf(f64::from(beta) / 2.0);
                }
            }
            assert!((w / b - ratio).abs() < 1e-12);
            // (√x+√y)² <= 2(x+y), so c_wy >= c_bures
            assert!(w / b > 1.0);
        }
    }

    #[test]
    fn floor_and_rank_guards() {
        let s = spec(&[0.5, 0.3, 0.2 - 1e-13, 1e-13]);
        assert!(matches!(
            monotone_weight(&s, Metric::Bures, 2),
            Err(Error::Rejected(_))
        ));
        let s = spec(&[0.5, 0.3, 0.2, 0.0]);
        assert!(monotone_weight(&s, Metric::Bures, 2).is_err());
        assert!(monotone_weight(&spec(&[0.4, 0.3, 0.2, 0.1]), Metric::Bures, 4).is_err());
    }
}
