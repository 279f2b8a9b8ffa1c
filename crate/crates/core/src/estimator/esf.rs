//! Binned eigenvalue-parameterized separability function σ(C_max).

use crate::criteria::{maximal_concurrence, PtSpectrum};
use crate::error::{Error, Result};
use crate::measures::hs_weight;

use super::{check_partials, Proposal, is_rejection, run, run_totals, total, BlockPartial, RunPlan, System, Tally};

const FIELDS: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct EsfBin {
    pub lo: f64,
    pub hi: f64,
    /// HS-weighted separable fraction; NaN for empty bins.
    pub sigma: f64,
    pub se: f64,
    /// Share of the total weight falling in the bin.
    pub mass: f64,
    pub count: u64,
    pub sigma_unweighted: f64,
    pub se_unweighted: f64,
}

impl EsfBin {
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn is_populated(&self) -> bool {
        self.count > 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EsfHistogram {
    pub system: String,
    pub beta: u32,
    pub bins: Vec<EsfBin>,
    pub total_samples: u64,
    pub rejected: u64,
}

impl EsfHistogram {
    /// Index of the bin containing `c`; bins are `[lo, hi)` except the last.
    pub fn bin_of(&self, c: f64) -> Option<usize> {
        let n = self.bins.len();
        if !(0.0..=1.0).contains(&c) {
            return None;
        }
        Some(((c * n as f64) as usize).min(n - 1))
    }

    /// Piecewise-constant σ̂; empty bins read as NaN.
    pub fn sigma_at(&self, c: f64) -> f64 {
        self.bin_of(c).map_or(f64::NAN, |i| self.bins[i].sigma)
    }

    /// `(agreeing, compared)`: populated bins where the weighted and unweighted
    /// fractions agree within three combined standard errors.
    pub fn ansatz_agreement(&self) -> (usize, usize) {
        let mut agree = 0;
        let mut compared = 0;
        for b in self.bins.iter().filter(|b| b.count > 1) {
            compared += 1;
            let se = (b.se * b.se + b.se_unweighted * b.se_unweighted).sqrt();
            if (b.sigma - b.sigma_unweighted).abs() <= 3.0 * se {
                agree += 1;
            }
        }
        (agree, compared)
    }
}

/// Accumulator behind [`esf_histogram`]; per bin
/// `[Σw, Σw·y, Σw², Σw²·y, count, count·y]` with `y` the PPT indicator.
#[derive(Debug, Clone)]
pub struct EsfTally {
    pub system: System,
    pub bins: usize,
}

impl EsfTally {
    pub fn new(system: System, bins: usize) -> Result<Self> {
        if bins < 25 {
            return Err(Error::Config(format!("ESF histograms need at least 25 bins, got {bins}")));
        }
        Ok(EsfTally { system, bins })
    }
}

impl Tally for EsfTally {
    type Scratch = ();
    type Output = EsfHistogram;

    fn stream_dim(&self) -> usize {
        self.system.stream_dim()
    }

    fn width(&self) -> usize {
        FIELDS * self.bins
    }

    fn scratch(&self) {}

    fn add(&self, point: &[f64], scale: f64, _: &mut (), sums: &mut [f64]) -> Result<bool> {
        let Some(state) = self.system.draw(point, Proposal::Uniform)? else {
            return Ok(false);
        };
        let w = match hs_weight(&state.spectrum, self.system.beta(), self.system.n()) {
            Ok(v) => v.value * scale,
            Err(e) if is_rejection(&e) => return Ok(false),
            Err(e) => return Err(e),
        };
        let c = maximal_concurrence(&state.spectrum)?.c_max;
        let y = if PtSpectrum::of(&state)?.is_ppt() { 1.0 } else { 0.0 };
        let i = ((c * self.bins as f64) as usize).min(self.bins - 1);
        let s = &mut sums[FIELDS * i..FIELDS * (i + 1)];
        s[0] += w;
        s[1] += w * y;
        s[2] += w * w;
        s[3] += w * w * y;
        s[4] += 1.0;
        s[5] += y;
        Ok(true)
    }

    fn finalize(&self, plan: &RunPlan, partials: &[BlockPartial]) -> Result<EsfHistogram> {
        check_partials(plan, self.width(), partials)?;
        let col = |i: usize, f: usize| total(partials, FIELDS * i + f);
        let all_w: f64 = super::compensated_sum((0..self.bins).map(|i| col(i, 0)));
        if !(all_w > 0.0) {
            return Err(Error::DegenerateRun("zero total weight".into()));
        }
        let n = self.bins as f64;
        let bins = (0..self.bins)
            .map(|i| {
                let (w, wy, w2, w2y, cnt, cy) = (col(i, 0), col(i, 1), col(i, 2), col(i, 3), col(i, 4), col(i, 5));
                let (sigma, se) = if w > 0.0 {
                    let p = wy / w;
                    // Σ w²(y-p)² / (Σw)²
                    let v = (w2y * (1.0 - 2.0 * p) + p * p * w2).max(0.0);
                    (p, v.sqrt() / w)
                } else {
                    (f64::NAN, f64::NAN)
                };
                let (su, seu) = if cnt > 0.0 {
                    let p = cy / cnt;
                    (p, (p * (1.0 - p) / cnt).sqrt())
                } else {
                    (f64::NAN, f64::NAN)
                };
                EsfBin {
                    lo: i as f64 / n,
                    hi: (i + 1) as f64 / n,
                    sigma,
                    se,
                    mass: w / all_w,
                    count: cnt as u64,
                    sigma_unweighted: su,
                    se_unweighted: seu,
                }
            })
            .collect();
        let (total_samples, rejected) = run_totals(partials);
        Ok(EsfHistogram {
            system: self.system.tag(),
            beta: self.system.beta(),
            bins,
            total_samples,
            rejected,
        })
    }
}

/// HS-weighted PPT fraction of sampled states, binned by `C_max` on `[0, 1]`.
pub fn esf_histogram(system: System, bins: usize, plan: &RunPlan) -> Result<EsfHistogram> {
    run(&EsfTally::new(system, bins)?, plan)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_shape_and_limits() {
        let h = esf_histogram(System::parse("2q-real").unwrap(), 50, &RunPlan::new(16_000, 3)).unwrap();
        assert_eq!(h.bins.len(), 50);
        assert_eq!(h.bins[0].lo, 0.0);
        assert_eq!(h.bins[49].hi, 1.0);
        let mass: f64 = h.bins.iter().map(|b| b.mass).sum();
        assert!((mass - 1.0).abs() < 1e-12);
        // C_max = 0 spectra are absolutely separable
        assert!((h.bins[0].sigma - 1.0).abs() <= 3.0 * h.bins[0].se + 1e-12);
        for b in h.bins.iter().filter(|b| b.is_populated()) {
            assert!((0.0..=1.0).contains(&b.sigma));
        }
        assert_eq!(h.bin_of(0.5), Some(25));
        assert_eq!(h.bin_of(1.0), Some(49));
        assert_eq!(h.bin_of(1.5), None);
        assert!(EsfTally::new(System::parse("2q-real").unwrap(), 10).is_err());
    }
}
