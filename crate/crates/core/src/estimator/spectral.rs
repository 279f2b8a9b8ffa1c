//! Eigenvalue-only estimators: no unitaries are drawn.

use crate::criteria::maximal_concurrence;
use crate::error::{Error, Result};
use crate::measures::Metric;
use crate::statespace::Spectrum;

use super::{
    block_ratio, check_partials, is_rejection, run, Proposal, run_totals, total, BlockPartial, Estimate, RunPlan, System, Tally,
};

/// Spectral measure on the ordered simplex: order `n`, rank, Dyson index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EigenModel {
    pub n: usize,
    pub rank: usize,
    pub beta: u32,
}

impl EigenModel {
    pub fn new(n: usize, rank: usize, beta: u32) -> Result<Self> {
        let rank_ok = matches!((n, rank), (4, 3) | (4, 4) | (6, 5) | (6, 6));
        if !rank_ok || !matches!(beta, 1 | 2 | 4) {
            return Err(Error::Config(format!(
                "unsupported spectral model N={n}, rank {rank}, beta {beta}"
            )));
        }
        Ok(EigenModel { n, rank, beta })
    }

    pub fn from_system(s: &System) -> Self {
        EigenModel {
            n: s.n(),
            rank: s.rank,
            beta: s.beta(),
        }
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank == self.n
    }

    pub fn tag(&self) -> String {
        format!("N{}-rank{}-beta{}", self.n, self.rank, self.beta)
    }

    pub fn check_metric(&self, metric: Metric) -> Result<()> {
        if !metric.supports_beta(self.beta) {
            return Err(Error::Config(format!(
                "metric {} is not defined for beta {}",
                metric.tag(),
                self.beta
            )));
        }
        if metric.is_monotone() && !self.is_full_rank() {
            return Err(Error::Config(format!("metric {} needs full rank", metric.tag())));
        }
        Ok(())
    }

    /// Spectrum and weight of one point; `None` marks a rejected sample.
    fn draw(&self, point: &[f64], metric: Metric, scale: f64) -> Result<Option<(Spectrum, f64)>> {
        let proposal = Proposal::for_metrics(&[metric]);
        let spec = match proposal.spectrum(point, self.rank, self.n) {
            Ok(s) => s,
            Err(e) if is_rejection(&e) => return Ok(None),
            Err(e) => return Err(e),
        };
        Ok(proposal.weight(&spec, metric, self.beta, self.n)?.map(|w| (spec, w * scale)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Marginal {
    pub model: String,
    pub metric: Metric,
    pub lo: f64,
    pub hi: f64,
    /// Probability density per bin; integrates to one.
    pub density: Vec<f64>,
    pub mass: Vec<f64>,
    pub mean: Estimate,
    /// Mass with `C_max >= 1/2`.
    pub upper_mass: Estimate,
    /// Mass with unclipped `C_max <= 0` (absolutely separable spectra).
    pub abs_sep: Estimate,
    pub total_samples: u64,
    pub rejected: u64,
}

/// Sums: `[Σw, Σw·C, Σw·1[C>=1/2], Σw·1[C_raw<=0], per-bin Σw …]`.
///
/// `C` is the unclipped maximal concurrence on full-rank spectra (range
/// `[-1/2, 1]`) and the clipped one otherwise (range `[0, 1]`).
#[derive(Debug, Clone)]
pub struct MarginalTally {
    pub model: EigenModel,
    pub metric: Metric,
    pub bins: usize,
}

impl MarginalTally {
    pub fn new(model: EigenModel, metric: Metric, bins: usize) -> Result<Self> {
        model.check_metric(metric)?;
        if bins == 0 {
            return Err(Error::Config("at least one bin is required".into()));
        }
        Ok(MarginalTally { model, metric, bins })
    }

    fn range(&self) -> (f64, f64) {
        if self.model.is_full_rank() {
            (-0.5, 1.0)
        } else {
            (0.0, 1.0)
        }
    }
}

const HEAD: usize = 4;

impl Tally for MarginalTally {
    type Scratch = ();
    type Output = Marginal;

    fn stream_dim(&self) -> usize {
        self.model.rank
    }

    fn width(&self) -> usize {
        HEAD + self.bins
    }

    fn scratch(&self) {}

    fn add(&self, point: &[f64], scale: f64, _: &mut (), sums: &mut [f64]) -> Result<bool> {
        let Some((spec, w)) = self.model.draw(point, self.metric, scale)? else {
            return Ok(false);
        };
        let m = maximal_concurrence(&spec)?;
        let c = if self.model.is_full_rank() { m.c_max_raw } else { m.c_max };
        let (lo, hi) = self.range();
        sums[0] += w;
        sums[1] += w * c;
        if c >= 0.5 {
            sums[2] += w;
        }
        if m.c_max_raw <= 0.0 {
            sums[3] += w;
        }
        let i = (((c - lo) / (hi - lo) * self.bins as f64).max(0.0) as usize).min(self.bins - 1);
        sums[HEAD + i] += w;
        Ok(true)
    }

    fn finalize(&self, plan: &RunPlan, partials: &[BlockPartial]) -> Result<Marginal> {
        check_partials(plan, self.width(), partials)?;
        let w = total(partials, 0);
        if !(w > 0.0) {
            return Err(Error::DegenerateRun("zero total weight".into()));
        }
        let (lo, hi) = self.range();
        let width = (hi - lo) / self.bins as f64;
        let mass: Vec<f64> = (0..self.bins).map(|i| total(partials, HEAD + i) / w).collect();
        let (total_samples, rejected) = run_totals(partials);
        Ok(Marginal {
            model: self.model.tag(),
            metric: self.metric,
            lo,
            hi,
            density: mass.iter().map(|m| m / width).collect(),
            mass,
            mean: block_ratio(partials, 1, 0),
            upper_mass: block_ratio(partials, 2, 0),
            abs_sep: block_ratio(partials, 3, 0),
            total_samples,
            rejected,
        })
    }
}

/// Weighted histogram of the maximal concurrence under a spectral measure.
pub fn marginal_histogram(model: EigenModel, metric: Metric, bins: usize, plan: &RunPlan) -> Result<Marginal> {
    run(&MarginalTally::new(model, metric, bins)?, plan)
}

/// Weighted fraction of spectra with unclipped `C_max <= 0`.
pub fn absolute_separability_probability(model: EigenModel, metric: Metric, plan: &RunPlan) -> Result<Estimate> {
    Ok(marginal_histogram(model, metric, 1, plan)?.abs_sep)
}

/// Sums `[Σw, Σw·σ(C)·1[C in range]]` with `C` the clipped maximal concurrence.
pub struct SepFromEsfTally<'a> {
    pub model: EigenModel,
    pub metric: Metric,
    pub sigma: &'a (dyn Fn(f64) -> f64 + Sync),
    pub range: (f64, f64),
}

impl<'a> SepFromEsfTally<'a> {
    pub fn new(
        model: EigenModel,
        metric: Metric,
        sigma: &'a (dyn Fn(f64) -> f64 + Sync),
        range: (f64, f64),
    ) -> Result<Self> {
        model.check_metric(metric)?;
        if !(0.0 <= range.0 && range.0 <= range.1 && range.1 <= 1.0) {
            return Err(Error::Config(format!("range {range:?} must lie in [0, 1]")));
        }
        Ok(SepFromEsfTally {
            model,
            metric,
            sigma,
            range,
        })
    }
}

impl Tally for SepFromEsfTally<'_> {
    type Scratch = ();
    type Output = Estimate;

    fn stream_dim(&self) -> usize {
        self.model.rank
    }

    fn width(&self) -> usize {
        2
    }

    fn scratch(&self) {}

    fn add(&self, point: &[f64], scale: f64, _: &mut (), sums: &mut [f64]) -> Result<bool> {
        let Some((spec, w)) = self.model.draw(point, self.metric, scale)? else {
            return Ok(false);
        };
        let c = maximal_concurrence(&spec)?.c_max;
        sums[0] += w;
        if c >= self.range.0 && c <= self.range.1 {
            let s = (self.sigma)(c);
            if !s.is_finite() {
                return Err(Error::Domain(format!("σ({c}) is not finite")));
            }
            sums[1] += w * s;
        }
        Ok(true)
    }

    fn finalize(&self, plan: &RunPlan, partials: &[BlockPartial]) -> Result<Estimate> {
        check_partials(plan, self.width(), partials)?;
        if !(total(partials, 0) > 0.0) {
            return Err(Error::DegenerateRun("zero total weight".into()));
        }
        Ok(block_ratio(partials, 1, 0))
    }
}

/// `E[σ(C_max)·1[C_max in range]]` under the spectral measure.
pub fn sep_prob_from_esf(
    sigma: &(dyn Fn(f64) -> f64 + Sync),
    model: EigenModel,
    metric: Metric,
    range: (f64, f64),
    plan: &RunPlan,
) -> Result<Estimate> {
    run(&SepFromEsfTally::new(model, metric, sigma, range)?, plan)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_sigma_is_normalization() {
        let m = EigenModel::new(4, 4, 2).unwrap();
        let e = sep_prob_from_esf(&|_| 1.0, m, Metric::HilbertSchmidt, (0.0, 1.0), &RunPlan::new(1600, 2)).unwrap();
        assert_eq!(e.value, 1.0);
        let z = sep_prob_from_esf(&|_| 0.0, m, Metric::HilbertSchmidt, (0.0, 1.0), &RunPlan::new(1600, 2)).unwrap();
        assert_eq!(z.value, 0.0);
    }

    #[test]
    fn marginal_density_integrates_to_one() {
        let m = EigenModel::new(4, 3, 1).unwrap();
        let h = marginal_histogram(m, Metric::HilbertSchmidt, 40, &RunPlan::new(16_000, 1)).unwrap();
        let integral: f64 = h.density.iter().map(|d| d * (h.hi - h.lo) / 40.0).sum();
        assert!((integral - 1.0).abs() < 1e-12);
        assert_eq!(h.lo, 0.0);
        // rank-3 spectra are never absolutely separable
        assert_eq!(h.abs_sep.value, 0.0);
    }

    #[test]
    fn model_validation() {
        assert!(EigenModel::new(4, 5, 1).is_err());
        assert!(EigenModel::new(4, 4, 3).is_err());
        let q = EigenModel::new(4, 4, 4).unwrap();
        assert!(q.check_metric(Metric::Bures).is_err());
        assert!(q.check_metric(Metric::HilbertSchmidt).is_ok());
        let r3 = EigenModel::new(4, 3, 2).unwrap();
        assert!(r3.check_metric(Metric::Bures).is_err());
    }
}
