//! Weighted quasi-Monte Carlo estimation over disjoint index blocks.
//!
//! Every analysis is a [`Tally`]: a fixed-width vector of running sums that
//! one block of stream indices fills in. Blocks are independent, so they run
//! in parallel and are merged in block order; a checkpoint is just the list
//! of finished [`BlockPartial`]s.

pub mod analysis;
pub mod curve;
pub mod esf;
pub mod spectral;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lowdisc::{QmcStream, Scramble};
use crate::measures::Metric;
use crate::statespace::{
    assemble_state, dirichlet_half_spectrum, haar_unitary, simplex_spectrum, Dims, Field, QuantumState, Spectrum,
};

pub use analysis::{jump_detect, ratio_analysis, JumpReport, LimitFit, RatioReport};
pub use curve::{alpha_curve, sep_vs_concurrence, AlphaGrid, CurveTable, CurveTally, MetricCurve, SepConcurrenceTally};
pub use esf::{esf_histogram, EsfBin, EsfHistogram, EsfTally};
pub use spectral::{
    absolute_separability_probability, marginal_histogram, sep_prob_from_esf, EigenModel, Marginal,
    MarginalTally, SepFromEsfTally,
};

/// Minimum number of blocks behind every standard error.
pub const MIN_BLOCKS: usize = 16;

/// Proposal distribution of the spectrum; importance weights are the
/// measure density divided by the proposal density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Proposal {
    /// Uniform on the simplex.
    Uniform,
    /// Dirichlet(1/2): density `Π λ_i^{-1/2}`, matching the monotone-metric
    /// singularity at vanishing eigenvalues so their weights stay bounded
    /// (up to logarithms).
    DirichletHalf,
}

impl Proposal {
    /// Dirichlet(1/2) whenever a monotone metric is requested.
    pub fn for_metrics(metrics: &[Metric]) -> Self {
        if metrics.iter().any(|m| m.is_monotone()) {
            Proposal::DirichletHalf
        } else {
            Proposal::Uniform
        }
    }

    pub fn spectrum(self, coords: &[f64], k: usize, n: usize) -> Result<Spectrum> {
        match self {
            Proposal::Uniform => simplex_spectrum(coords, k, n),
            Proposal::DirichletHalf => dirichlet_half_spectrum(coords, k, n),
        }
    }

    /// Unnormalized log density at `spec`.
    pub fn log_density(self, spec: &Spectrum) -> f64 {
        match self {
            Proposal::Uniform => 0.0,
            Proposal::DirichletHalf => -0.5 * spec.support().iter().map(|l| l.ln()).sum::<f64>(),
        }
    }

    /// `exp(log measure − log proposal)`; `None` when the measure rejects the spectrum.
    pub fn weight(self, spec: &Spectrum, metric: Metric, beta: u32, n: usize) -> Result<Option<f64>> {
        match crate::measures::weight(spec, metric, beta, n) {
            Ok(w) => Ok(Some((w.log_value - self.log_density(spec)).exp())),
            Err(e) if is_rejection(&e) => Ok(None),
            Err(e) => Err(e),
        }
    }
}

/// A sampled family of density matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct System {
    pub dims: Dims,
    pub field: Field,
    pub rank: usize,
}

impl System {
    pub const TAGS: [&'static str; 8] = [
        "2q-real",
        "2q-complex",
        "2q-real-rank3",
        "2q-complex-rank3",
        "qq-real",
        "qq-complex",
        "qq-real-rank5",
        "qq-complex-rank5",
    ];

    pub fn parse(tag: &str) -> Result<System> {
        let t = tag.trim().to_ascii_lowercase();
        let (dims, rest) = if let Some(r) = t.strip_prefix("2q-") {
            (Dims::QUBIT_QUBIT, r)
        } else if let Some(r) = t.strip_prefix("qq-") {
            (Dims::QUBIT_QUTRIT, r)
        } else {
            return Err(unknown_system(tag));
        };
        let (field, rank_part) = match rest.split_once('-') {
            Some((f, r)) => (f, Some(r)),
            None => (rest, None),
        };
        let field = match field {
            "real" => Field::Real,
            "complex" => Field::Complex,
            _ => return Err(unknown_system(tag)),
        };
        let n = dims.n();
        let rank = match rank_part {
            None => n,
            Some(r) => match (n, r) {
                (4, "rank3") => 3,
                (6, "rank5") => 5,
                _ => return Err(unknown_system(tag)),
            },
        };
        Ok(System { dims, field, rank })
    }

    pub fn tag(&self) -> String {
        let d = if self.dims == Dims::QUBIT_QUBIT { "2q" } else { "qq" };
        let f = match self.field {
            Field::Real => "real",
            Field::Complex => "complex",
        };
        if self.is_full_rank() {
            format!("{d}-{f}")
        } else {
            format!("{d}-{f}-rank{}", self.rank)
        }
    }

    pub fn n(&self) -> usize {
        self.dims.n()
    }

    pub fn beta(&self) -> u32 {
        self.field.beta()
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank == self.n()
    }

    pub fn is_two_qubit(&self) -> bool {
        self.dims == Dims::QUBIT_QUBIT
    }

    /// Coordinates per sample: the Haar draw first, then the spectrum.
    pub fn stream_dim(&self) -> usize {
        self.field.unitary_coords(self.n()) + self.rank
    }

    /// Metrics are checked against the field and rank of the system.
    pub fn check_metrics(&self, metrics: &[Metric]) -> Result<()> {
        if metrics.is_empty() {
            return Err(Error::Config("at least one metric is required".into()));
        }
        for &m in metrics {
            if m.is_monotone() && !self.is_full_rank() {
                return Err(Error::Config(format!(
                    "metric {} needs a full-rank system, got {}",
                    m.tag(),
                    self.tag()
                )));
            }
        }
        Ok(())
    }

    /// Maps one stream point to a state; `None` marks a rejected sample.
    pub fn draw(&self, point: &[f64], proposal: Proposal) -> Result<Option<QuantumState>> {
        let n = self.n();
        let split = self.field.unitary_coords(n);
        let u = match haar_unitary(&point[..split], n, self.field) {
            Ok(u) => u,
            Err(e) if is_rejection(&e) => return Ok(None),
            Err(e) => return Err(e),
        };
        let spec = match proposal.spectrum(&point[split..], self.rank, n) {
            Ok(s) => s,
            Err(e) if is_rejection(&e) => return Ok(None),
            Err(e) => return Err(e),
        };
        assemble_state(&u, &spec, self.dims, self.field).map(Some)
    }
}

fn unknown_system(tag: &str) -> Error {
    Error::UnknownId {
        id: tag.to_string(),
        valid: System::TAGS.join(", "),
    }
}

/// Errors that drop a single sample instead of aborting the run.
pub(crate) fn is_rejection(e: &Error) -> bool {
    matches!(e, Error::Rejected(_) | Error::DegenerateSample(_))
}

/// Sample budget, partitioning and reproducibility settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    pub n_samples: u64,
    pub blocks: usize,
    pub seed: u64,
    /// Worker threads; 0 uses the global pool. Never affects results.
    pub workers: usize,
    /// Common factor applied to every importance weight (diagnostics only).
    pub weight_scale: f64,
}

impl RunPlan {
    pub fn new(n_samples: u64, seed: u64) -> Self {
        RunPlan {
            n_samples,
            blocks: MIN_BLOCKS,
            seed,
            workers: 0,
            weight_scale: 1.0,
        }
    }

    pub fn with_blocks(mut self, blocks: usize) -> Self {
        self.blocks = blocks;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks < MIN_BLOCKS {
            return Err(Error::Config(format!(
                "at least {MIN_BLOCKS} blocks are required, got {}",
                self.blocks
            )));
        }
        if self.n_samples == 0 || self.n_samples % self.blocks as u64 != 0 {
            return Err(Error::Config(format!(
                "block count {} must divide the sample count {}",
                self.blocks, self.n_samples
            )));
        }
        if !(self.weight_scale > 0.0 && self.weight_scale.is_finite()) {
            return Err(Error::Config("weight scale must be positive".into()));
        }
        Ok(())
    }

    pub fn block_len(&self) -> u64 {
        self.n_samples / self.blocks as u64
    }

    /// Stream indices `[start, end)` of block `b`.
    pub fn block_range(&self, b: usize) -> (u64, u64) {
        let len = self.block_len();
        (b as u64 * len, (b as u64 + 1) * len)
    }
}

/// Sums accumulated over one block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPartial {
    pub block: usize,
    pub samples: u64,
    pub rejected: u64,
    pub sums: Vec<f64>,
}

impl BlockPartial {
    /// One line of text; doubles are stored as their bit patterns in hex.
    pub fn to_line(&self) -> String {
        let sums: Vec<String> = self.sums.iter().map(|x| format!("{:016x}", x.to_bits())).collect();
        format!(
            "block {} samples {} rejected {} sums {}",
            self.block,
            self.samples,
            self.rejected,
            sums.join(",")
        )
    }

    pub fn from_line(line: &str) -> Result<BlockPartial> {
        let bad = || Error::Config(format!("malformed block record: {line}"));
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 8 || f[0] != "block" || f[2] != "samples" || f[4] != "rejected" || f[6] != "sums" {
            return Err(bad());
        }
        let sums = f[7]
            .split(',')
            .map(|h| u64::from_str_radix(h, 16).map(f64::from_bits).map_err(|_| bad()))
            .collect::<Result<Vec<f64>>>()?;
        Ok(BlockPartial {
            block: f[1].parse().map_err(|_| bad())?,
            samples: f[3].parse().map_err(|_| bad())?,
            rejected: f[5].parse().map_err(|_| bad())?,
            sums,
        })
    }
}

/// An accumulator filled one stream point at a time.
pub trait Tally: Sync {
    type Scratch: Send;
    type Output;

    fn stream_dim(&self) -> usize;
    fn width(&self) -> usize;
    fn scratch(&self) -> Self::Scratch;
    /// Adds one point; `Ok(false)` marks a rejected sample.
    fn add(&self, point: &[f64], scale: f64, scratch: &mut Self::Scratch, sums: &mut [f64]) -> Result<bool>;
    /// Folds block-local scratch into the sums.
    fn finish(&self, _scratch: Self::Scratch, _sums: &mut [f64]) {}
    /// Turns the complete, block-ordered partials into the result.
    fn finalize(&self, plan: &RunPlan, partials: &[BlockPartial]) -> Result<Self::Output>;
}

fn run_block<T: Tally>(tally: &T, plan: &RunPlan, block: usize) -> Result<BlockPartial> {
    let (start, end) = plan.block_range(block);
    let mut stream = QmcStream::new(tally.stream_dim(), Scramble::Seeded(plan.seed))?;
    stream.skip_to(start)?;
    let mut point = vec![0.0; tally.stream_dim()];
    let mut sums = vec![0.0; tally.width()];
    let mut scratch = tally.scratch();
    let mut rejected = 0;
    for _ in start..end {
        stream.next_into(&mut point)?;
        if !tally.add(&point, plan.weight_scale, &mut scratch, &mut sums)? {
            rejected += 1;
        }
    }
    tally.finish(scratch, &mut sums);
    Ok(BlockPartial {
        block,
        samples: end - start,
        rejected,
        sums,
    })
}

/// Runs the listed blocks; the output is in the order given.
pub fn run_blocks<T: Tally>(tally: &T, plan: &RunPlan, blocks: &[usize]) -> Result<Vec<BlockPartial>> {
    plan.validate()?;
    if let Some(&b) = blocks.iter().find(|&&b| b >= plan.blocks) {
        return Err(Error::Config(format!("block {b} out of range")));
    }
    let work = || -> Result<Vec<BlockPartial>> {
        blocks.par_iter().map(|&b| run_block(tally, plan, b)).collect()
    };
    if plan.workers == 0 {
        work()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(plan.workers)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(work)
    }
}

/// Runs every block of the plan and finalizes.
pub fn run<T: Tally>(tally: &T, plan: &RunPlan) -> Result<T::Output> {
    let all: Vec<usize> = (0..plan.blocks).collect();
    let partials = run_blocks(tally, plan, &all)?;
    tally.finalize(plan, &partials)
}

/// Checks that `partials` are exactly blocks `0..plan.blocks` in order.
pub(crate) fn check_partials(plan: &RunPlan, width: usize, partials: &[BlockPartial]) -> Result<()> {
    if partials.len() != plan.blocks
        || partials.iter().enumerate().any(|(i, p)| p.block != i || p.sums.len() != width)
    {
        return Err(Error::Config(
            "block partials do not match the run configuration".into(),
        ));
    }
    Ok(())
}

/// Neumaier-compensated sum.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for x in values {
        let t = s + x;
        if s.abs() >= x.abs() {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }
    s + c
}

/// Column `i` summed over blocks in block order.
pub(crate) fn total(partials: &[BlockPartial], i: usize) -> f64 {
    compensated_sum(partials.iter().map(|p| p.sums[i]))
}

/// A ratio estimate with its block standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

/// `Σ num / Σ den` over blocks, with the delta-method block standard error.
pub(crate) fn block_ratio(partials: &[BlockPartial], num: usize, den: usize) -> Estimate {
    let n = total(partials, num);
    let d = total(partials, den);
    let value = n / d;
    let b = partials.len() as f64;
    let ss: f64 = partials
        .iter()
        .map(|p| {
            let r = p.sums[num] - value * p.sums[den];
            r * r
        })
        .sum();
    let se = if d > 0.0 && b > 1.0 {
        (b / (b - 1.0) * ss).sqrt() / d
    } else {
        f64::NAN
    };
    Estimate { value, se }
}

pub(crate) fn run_totals(partials: &[BlockPartial]) -> (u64, u64) {
    (
        partials.iter().map(|p| p.samples).sum(),
        partials.iter().map(|p| p.rejected).sum(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn system_tags_round_trip() {
        for t in System::TAGS {
            assert_eq!(System::parse(t).unwrap().tag(), t);
        }
        assert!(System::parse("3q-real").is_err());
        assert!(System::parse("2q-real-rank5").is_err());
        let s = System::parse("2q-complex").unwrap();
        assert_eq!(s.stream_dim(), 36);
        assert_eq!(System::parse("2q-real").unwrap().stream_dim(), 20);
        assert_eq!(System::parse("qq-complex").unwrap().stream_dim(), 78);
        assert_eq!(System::parse("2q-complex-rank3").unwrap().stream_dim(), 35);
    }

    #[test]
    fn monotone_metrics_need_full_rank() {
        let s = System::parse("2q-complex-rank3").unwrap();
        assert!(s.check_metrics(&[Metric::HilbertSchmidt]).is_ok());
        assert!(s.check_metrics(&[Metric::Bures]).is_err());
        assert!(s.check_metrics(&[]).is_err());
    }

    #[test]
    fn plan_validation() {
        assert!(RunPlan::new(1600, 1).validate().is_ok());
        assert!(RunPlan::new(1601, 1).validate().is_err());
        assert!(RunPlan::new(1600, 1).with_blocks(8).validate().is_err());
        let p = RunPlan::new(1600, 1);
        assert_eq!(p.block_range(3), (300, 400));
    }

    #[test]
    fn partial_line_round_trip() {
        let p = BlockPartial {
            block: 7,
            samples: 100,
            rejected: 2,
            sums: vec![0.1, -0.0, 1e-300, f64::MAX, 3.0],
        };
        let q = BlockPartial::from_line(&p.to_line()).unwrap();
        assert_eq!(p.sums.len(), q.sums.len());
        for (a, b) in p.sums.iter().zip(&q.sums) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!((q.block, q.samples, q.rejected), (7, 100, 2));
        assert!(BlockPartial::from_line("block x").is_err());
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(v), 2.0);
    }
}
