//! One-sided limits, jump detection and Dyson-index ratio analysis on ESF histograms.

use crate::error::{Error, Result};

use super::esf::EsfHistogram;
use super::Estimate;

/// Bins needed on each side of a one-sided fit.
pub const MIN_SIDE_BINS: usize = 5;

/// Added to every bin variance so bins with an exact 0 or 1 keep a finite weight.
const VAR_FLOOR: f64 = 1e-8;

/// Intercept of a weighted local linear fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitFit {
    pub value: f64,
    pub se: f64,
    pub bins_used: usize,
}

/// Fits `y = a + b(x - x0)` by weighted least squares and returns `a`.
fn local_linear(points: &[(f64, f64, f64)], x0: f64) -> Option<LimitFit> {
    let (mut s0, mut s1, mut s2, mut t0, mut t1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y, se) in points {
        let w = 1.0 / (se * se + VAR_FLOOR);
        let d = x - x0;
        s0 += w;
        s1 += w * d;
        s2 += w * d * d;
        t0 += w * y;
        t1 += w * d * y;
    }
    let det = s0 * s2 - s1 * s1;
    if !(det > 0.0) {
        return None;
    }
    Some(LimitFit {
        value: (s2 * t0 - s1 * t1) / det,
        se: (s2 / det).sqrt(),
        bins_used: points.len(),
    })
}

fn side_points(h: &EsfHistogram, c: f64, window: f64, right: bool) -> Vec<(f64, f64, f64)> {
    let eps = 1e-12;
    h.bins
        .iter()
        .filter(|b| b.count > 1 && b.sigma.is_finite())
        .filter(|b| {
            if right {
                b.lo >= c - eps && b.hi <= c + window + eps
            } else {
                b.lo >= c - window - eps && b.hi <= c + eps
            }
        })
        .map(|b| (b.mid(), b.sigma, b.se))
        .collect()
}

fn one_sided(h: &EsfHistogram, c: f64, window: f64, right: bool) -> Result<LimitFit> {
    let pts = side_points(h, c, window, right);
    let side = if right { "right" } else { "left" };
    if pts.len() < MIN_SIDE_BINS {
        return Err(Error::InsufficientBins(format!(
            "{} populated bins {side} of {c} within {window}, need {MIN_SIDE_BINS}",
            pts.len()
        )));
    }
    local_linear(&pts, c).ok_or_else(|| Error::InsufficientBins(format!("singular {side} fit at {c}")))
}

/// σ̂(c⁻) from bins inside `(c - window, c)`.
pub fn left_limit(h: &EsfHistogram, c: f64, window: f64) -> Result<LimitFit> {
    one_sided(h, c, window, false)
}

/// σ̂(c⁺) from bins inside `(c, c + window)`.
pub fn right_limit(h: &EsfHistogram, c: f64, window: f64) -> Result<LimitFit> {
    one_sided(h, c, window, true)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpReport {
    pub candidate: f64,
    pub left: LimitFit,
    pub right: LimitFit,
    /// Left limit minus right limit.
    pub jump: f64,
    pub se: f64,
}

impl JumpReport {
    /// Jump in units of its standard error.
    pub fn z(&self) -> f64 {
        self.jump / self.se
    }
}

/// Estimates the discontinuity of σ̂ at `candidate` from one-sided local fits.
pub fn jump_detect(h: &EsfHistogram, candidate: f64, window: f64) -> Result<JumpReport> {
    if !(candidate > 0.0 && candidate < 1.0) || !(window > 0.0) {
        return Err(Error::Config(format!(
            "jump candidate {candidate} must lie strictly inside (0, 1) with a positive window"
        )));
    }
    let left = left_limit(h, candidate, window)?;
    let right = right_limit(h, candidate, window)?;
    Ok(JumpReport {
        candidate,
        left,
        right,
        jump: left.value - right.value,
        se: (left.se * left.se + right.se * right.se).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioBin {
    pub mid: f64,
    pub ratio: f64,
    pub se: f64,
    pub included: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub bins: Vec<RatioBin>,
    /// `k` in `R ≈ 1 + kC` on `(0, 1/2]`.
    pub slope: Estimate,
    /// Weighted mean of `R` on `[1/2, 1]`.
    pub constant: Estimate,
    /// `σ̂²(1/2⁺) / σ̂¹(1/2⁺)²` from one-sided fits.
    pub right_limit_ratio: Estimate,
    pub excluded: Vec<usize>,
}

/// `R(C) = σ̂²(C) / σ̂¹(C)²` per bin, with its fits.
pub fn ratio_analysis(h1: &EsfHistogram, h2: &EsfHistogram, window: f64) -> Result<RatioReport> {
    if h1.bins.len() != h2.bins.len() || h1.bins.iter().zip(&h2.bins).any(|(a, b)| a.lo != b.lo || a.hi != b.hi) {
        return Err(Error::Config("ratio analysis needs matching bin layouts".into()));
    }
    let mut bins = Vec::with_capacity(h1.bins.len());
    let mut excluded = Vec::new();
    for (i, (b1, b2)) in h1.bins.iter().zip(&h2.bins).enumerate() {
        // bins with an all-or-nothing outcome carry no error estimate and
        // would otherwise dominate the inverse-variance fits
        let usable = b1.count > 1
            && b2.count > 1
            && b1.sigma > 0.0
            && b1.sigma >= 3.0 * b1.se
            && b1.se > 0.0
            && b2.se > 0.0
            && b2.sigma.is_finite();
        if !usable {
            excluded.push(i);
            bins.push(RatioBin {
                mid: b1.mid(),
                ratio: f64::NAN,
                se: f64::NAN,
                included: false,
            });
            continue;
        }
        let s1sq = b1.sigma * b1.sigma;
        let ratio = b2.sigma / s1sq;
        let rel1 = 2.0 * b1.se / b1.sigma;
        let se = ((b2.se / s1sq).powi(2) + (ratio * rel1).powi(2)).sqrt();
        bins.push(RatioBin {
            mid: b1.mid(),
            ratio,
            se,
            included: true,
        });
    }
    let w = |b: &RatioBin| 1.0 / (b.se * b.se + VAR_FLOOR);
    let lower: Vec<&RatioBin> = bins.iter().filter(|b| b.included && b.mid > 0.0 && b.mid <= 0.5).collect();
    let upper: Vec<&RatioBin> = bins.iter().filter(|b| b.included && b.mid >= 0.5).collect();
    if lower.is_empty() || upper.is_empty() {
        return Err(Error::InsufficientBins("no usable bins for the ratio fits".into()));
    }
    let sxx: f64 = lower.iter().map(|b| w(b) * b.mid * b.mid).sum();
    let sxy: f64 = lower.iter().map(|b| w(b) * b.mid * (b.ratio - 1.0)).sum();
    let slope = Estimate {
        value: sxy / sxx,
        se: 1.0 / sxx.sqrt(),
    };
    let sw: f64 = upper.iter().map(|b| w(b)).sum();
    let constant = Estimate {
        value: upper.iter().map(|b| w(b) * b.ratio).sum::<f64>() / sw,
        se: 1.0 / sw.sqrt(),
    };
    let r1 = right_limit(h1, 0.5, window)?;
    let r2 = right_limit(h2, 0.5, window)?;
    let value = r2.value / (r1.value * r1.value);
    let se = value * ((r2.se / r2.value).powi(2) + (2.0 * r1.se / r1.value).powi(2)).sqrt();
    Ok(RatioReport {
        bins,
        slope,
        constant,
        right_limit_ratio: Estimate { value, se },
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::esf::EsfBin;

    fn synthetic(f: impl Fn(f64) -> f64, n: usize, se: f64) -> EsfHistogram {
        let bins = (0..n)
            .map(|i| {
                let lo = i as f64 / n as f64;
                let hi = (i + 1) as f64 / n as f64;
                let s = f(0.5 * (lo + hi));
                EsfBin {
                    lo,
                    hi,
                    sigma: s,
                    se,
                    mass: 1.0 / n as f64,
                    count: 1000,
                    sigma_unweighted: s,
                    se_unweighted: se,
                }
            })
            .collect();
        EsfHistogram {
            system: "synthetic".into(),
            beta: 1,
            bins,
            total_samples: 0,
            rejected: 0,
        }
    }

    #[test]
    fn smooth_input_has_no_jump() {
        let h = synthetic(|c| (2.0 - 2.0 * c).powi(3) / 15.0, 500, 0.01);
        let j = jump_detect(&h, 0.5, 0.1).unwrap();
        assert!(j.jump.abs() < 3.0 * j.se, "{j:?}");
    }

    #[test]
    fn step_is_detected() {
        let h = synthetic(|c| if c < 0.5 { 0.4 } else { 0.2 }, 500, 0.01);
        let j = jump_detect(&h, 0.5, 0.1).unwrap();
        assert!((j.jump - 0.2).abs() < 1e-9);
        assert!(j.z() > 5.0);
    }

    #[test]
    fn insufficient_bins() {
        let h = synthetic(|_| 0.3, 25, 0.01);
        assert!(matches!(jump_detect(&h, 0.5, 0.1), Err(Error::InsufficientBins(_))));
        assert!(jump_detect(&h, 1.0, 0.1).is_err());
    }

    #[test]
    fn ratio_of_known_models() {
        let s1 = |c: f64| if c < 0.5 { 1.0 - 1.75 * c } else { (2.0 - 2.0 * c).powf(1.5) / 30f64.sqrt() };
        let s2 = |c: f64| if c < 0.5 { (1.0 + 2.0 * c) * s1(c).powi(2) } else { 2.0 * s1(c).powi(2) };
        let h1 = synthetic(s1, 500, 1e-4);
        let h2 = synthetic(s2, 500, 1e-4);
        let r = ratio_analysis(&h1, &h2, 0.05).unwrap();
        assert!((r.slope.value - 2.0).abs() < 1e-6, "{:?}", r.slope);
        assert!((r.constant.value - 2.0).abs() < 1e-6);
        // curvature bias of a linear one-sided fit is O(window²)
        assert!((r.right_limit_ratio.value - 2.0).abs() < 0.01, "{:?}", r.right_limit_ratio);
        let mut h2z = h2.clone();
        for b in h2z.bins.iter_mut().filter(|b| b.lo >= 0.9) {
            b.sigma = 0.0;
            b.se = 0.0;
        }
        let rz = ratio_analysis(&h1, &h2z, 0.05).unwrap();
        assert!((rz.constant.value - 2.0).abs() < 1e-6, "{:?}", rz.constant);
        let h3 = synthetic(s1, 250, 1e-4);
        assert!(ratio_analysis(&h1, &h3, 0.1).is_err());
    }
}
