//! α-separability curves and separability conditional on a concurrence bound.

use crate::criteria::{
    alpha_grid_convmineig, alpha_set_concurrence, alpha_set_det_with, alpha_set_mineig_with, concurrence,
    convdet_analysis, FeasibleAlphaSet, PtSpectrum,
};
use crate::error::{Error, Result};
use crate::measures::Metric;
use crate::statespace::{QuantumState, Spectrum};

use super::{block_ratio, check_partials, run, run_totals, total, BlockPartial, Estimate, Proposal, RunPlan, System, Tally};

/// Evenly spaced grid `start, …, end` with `steps` subintervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaGrid {
    pub start: f64,
    pub end: f64,
    pub steps: usize,
}

impl AlphaGrid {
    pub fn unit(steps: usize) -> Self {
        AlphaGrid {
            start: 0.0,
            end: 1.0,
            steps,
        }
    }

    /// Parses `a:b:n`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("grid must look like start:end:steps, got `{s}`"));
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let g = AlphaGrid {
            start: parts[0].trim().parse().map_err(|_| bad())?,
            end: parts[1].trim().parse().map_err(|_| bad())?,
            steps: parts[2].trim().parse().map_err(|_| bad())?,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::Config("grid needs at least 2 steps".into()));
        }
        if !(self.start.is_finite() && self.end.is_finite() && self.end > self.start) {
            return Err(Error::Config("grid end must exceed start".into()));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let n = self.steps;
        (0..=n)
            .map(|i| {
                if i == n {
                    self.end
                } else {
                    self.start + (self.end - self.start) * (i as f64 / n as f64)
                }
            })
            .collect()
    }
}

/// Generalized Peres-Horodecki constraint families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constraint {
    /// `α|ρ_PT| + (1-α)|ρ| >= 0`
    Det,
    /// `α λ_min(ρ_PT) + (1-α) λ_min(ρ) >= 0`
    MinEig,
    /// `|α ρ_PT + (1-α) ρ| >= 0`
    ConvDet,
    /// `α ρ_PT + (1-α) ρ` positive semidefinite, checked per grid point
    ConvMinEig,
    /// `-αC + (1-α) C_max >= 0`
    Concurrence,
}

impl Constraint {
    pub const ALL: [Constraint; 5] = [
        Constraint::Det,
        Constraint::MinEig,
        Constraint::ConvDet,
        Constraint::ConvMinEig,
        Constraint::Concurrence,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Constraint::Det => "det",
            Constraint::MinEig => "mineig",
            Constraint::ConvDet => "convdet",
            Constraint::ConvMinEig => "convmineig",
            Constraint::Concurrence => "concurrence",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        Constraint::ALL
            .into_iter()
            .find(|c| c.tag() == t)
            .ok_or_else(|| Error::UnknownId {
                id: s.to_string(),
                valid: Constraint::ALL.map(|c| c.tag()).join(", "),
            })
    }

    fn grid_masked(self) -> bool {
        self == Constraint::ConvMinEig
    }

    pub fn check(self, system: &System, grid: &[f64]) -> Result<()> {
        let two_qubit_only = matches!(self, Constraint::Det | Constraint::ConvDet | Constraint::Concurrence);
        if two_qubit_only && !system.is_two_qubit() {
            return Err(Error::Config(format!(
                "constraint {} is defined for two-qubit systems only",
                self.tag()
            )));
        }
        if grid.is_empty() || grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("α grid must be nonempty and strictly ascending".into()));
        }
        if !self.grid_masked() && (grid[0] < 0.0 || grid[grid.len() - 1] > 1.0) {
            return Err(Error::Config(format!(
                "constraint {} supports α in [0, 1] only; use convmineig for extended ranges",
                self.tag()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricCurve {
    pub metric: Metric,
    pub p: Vec<f64>,
    pub se: Vec<f64>,
    /// Kish effective sample size of the weights.
    pub ess: f64,
    /// Weighted PPT probability on the same samples.
    pub ppt: Estimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable {
    pub system: String,
    pub constraint: String,
    pub grid: Vec<f64>,
    pub curves: Vec<MetricCurve>,
    pub total_samples: u64,
    pub rejected: u64,
}

impl CurveTable {
    pub fn curve(&self, metric: Metric) -> Option<&MetricCurve> {
        self.curves.iter().find(|c| c.metric == metric)
    }
}

/// Per-metric weights of one state; `false` when the spectrum is rejected.
fn metric_weights(
    system: &System,
    proposal: Proposal,
    metrics: &[Metric],
    spec: &Spectrum,
    scale: f64,
    out: &mut [f64],
) -> Result<bool> {
    for (w, &m) in out.iter_mut().zip(metrics) {
        match proposal.weight(spec, m, system.beta(), system.n())? {
            Some(v) => *w = v * scale,
            None => return Ok(false),
        }
    }
    Ok(true)
}

/// Accumulator behind [`alpha_curve`].
///
/// Per metric the sums are `[Σw, Σw², Σw·ppt, S_0 … S_{G-1}]` with
/// `S_j = Σ w·1[α_j feasible]`.
#[derive(Debug, Clone)]
pub struct CurveTally {
    pub system: System,
    pub constraint: Constraint,
    pub metrics: Vec<Metric>,
    pub grid: Vec<f64>,
}

pub struct CurveScratch {
    /// Weight of states with exactly `k` feasible grid points.
    buckets: Vec<f64>,
    used: Vec<bool>,
    w: Vec<f64>,
}

impl CurveTally {
    pub fn new(system: System, constraint: Constraint, metrics: &[Metric], grid: &[f64]) -> Result<Self> {
        system.check_metrics(metrics)?;
        constraint.check(&system, grid)?;
        Ok(CurveTally {
            system,
            constraint,
            metrics: metrics.to_vec(),
            grid: grid.to_vec(),
        })
    }

    fn stride(&self) -> usize {
        3 + self.grid.len()
    }

    fn feasible(&self, state: &QuantumState, pt: &PtSpectrum) -> Result<FeasibleAlphaSet> {
        match self.constraint {
            Constraint::Det => alpha_set_det_with(state, pt),
            Constraint::MinEig => alpha_set_mineig_with(state, pt),
            Constraint::ConvDet => Ok(convdet_analysis(state, pt)?.set),
            Constraint::ConvMinEig => alpha_grid_convmineig(state, &self.grid),
            Constraint::Concurrence => alpha_set_concurrence(state),
        }
    }
}

impl Tally for CurveTally {
    type Scratch = CurveScratch;
    type Output = CurveTable;

    fn stream_dim(&self) -> usize {
        self.system.stream_dim()
    }

    fn width(&self) -> usize {
        self.metrics.len() * self.stride()
    }

    fn scratch(&self) -> CurveScratch {
        let g = self.grid.len();
        CurveScratch {
            buckets: vec![0.0; self.metrics.len() * (g + 1)],
            used: vec![false; g + 1],
            w: vec![0.0; self.metrics.len()],
        }
    }

    fn add(&self, point: &[f64], scale: f64, sc: &mut CurveScratch, sums: &mut [f64]) -> Result<bool> {
        let proposal = Proposal::for_metrics(&self.metrics);
        let Some(state) = self.system.draw(point, proposal)? else {
            return Ok(false);
        };
        if !metric_weights(&self.system, proposal, &self.metrics, &state.spectrum, scale, &mut sc.w)? {
            return Ok(false);
        }
        let pt = PtSpectrum::of(&state)?;
        let ppt = pt.is_ppt();
        let set = self.feasible(&state, &pt)?;
        let g = self.grid.len();
        let stride = self.stride();
        let count = match &set {
            FeasibleAlphaSet::All => Some(g),
            FeasibleAlphaSet::Threshold(t) => Some(self.grid.partition_point(|&a| a <= *t)),
            FeasibleAlphaSet::Mask(_) => None,
        };
        if let Some(k) = count {
            sc.used[k] = true;
        }
        for (m, &w) in sc.w.iter().enumerate() {
            let base = m * stride;
            sums[base] += w;
            sums[base + 1] += w * w;
            if ppt {
                sums[base + 2] += w;
            }
            match (&set, count) {
                (FeasibleAlphaSet::Mask(mask), _) => {
                    for (s, _) in sums[base + 3..base + 3 + g].iter_mut().zip(mask).filter(|(_, &b)| b) {
                        *s += w;
                    }
                }
                (_, Some(k)) => sc.buckets[m * (g + 1) + k] += w,
                _ => unreachable!("interval sets always have a count"),
            }
        }
        Ok(true)
    }

    fn finish(&self, sc: CurveScratch, sums: &mut [f64]) {
        if self.constraint.grid_masked() {
            return;
        }
        let g = self.grid.len();
        let stride = self.stride();
        // grid points below every observed count are feasible for all states
        let first_used = sc.used.iter().position(|&u| u).unwrap_or(g + 1).min(g);
        for m in 0..self.metrics.len() {
            let base = m * stride;
            let buckets = &sc.buckets[m * (g + 1)..(m + 1) * (g + 1)];
            let mut running = 0.0;
            for j in (0..g).rev() {
                running += buckets[j + 1];
                sums[base + 3 + j] = running;
            }
            for j in 0..first_used {
                sums[base + 3 + j] = sums[base];
            }
        }
    }

    fn finalize(&self, plan: &RunPlan, partials: &[BlockPartial]) -> Result<CurveTable> {
        check_partials(plan, self.width(), partials)?;
        let stride = self.stride();
        let mut curves = Vec::new();
        for (m, &metric) in self.metrics.iter().enumerate() {
            let base = m * stride;
            let w = total(partials, base);
            if !(w > 0.0) {
                return Err(Error::DegenerateRun(format!("zero total {} weight", metric.tag())));
            }
            let w2 = total(partials, base + 1);
            let (p, se): (Vec<f64>, Vec<f64>) = (0..self.grid.len())
                .map(|j| {
                    let e = block_ratio(partials, base + 3 + j, base);
                    (e.value, e.se)
                })
                .unzip();
            curves.push(MetricCurve {
                metric,
                p,
                se,
                ess: w * w / w2,
                ppt: block_ratio(partials, base + 2, base),
            });
        }
        let (total_samples, rejected) = run_totals(partials);
        Ok(CurveTable {
            system: self.system.tag(),
            constraint: self.constraint.tag().to_string(),
            grid: self.grid.clone(),
            curves,
            total_samples,
            rejected,
        })
    }
}

/// Weighted probability that each grid α is feasible, per metric.
pub fn alpha_curve(
    system: System,
    constraint: Constraint,
    metrics: &[Metric],
    grid: &[f64],
    plan: &RunPlan,
) -> Result<CurveTable> {
    run(&CurveTally::new(system, constraint, metrics, grid)?, plan)
}

/// Accumulator behind [`sep_vs_concurrence`].
///
/// Per metric: `[Σw, Σw·ppt, M_0 … M_{T-1}]` with `M_j = Σ w·1[C <= C0_j]`.
#[derive(Debug, Clone)]
pub struct SepConcurrenceTally {
    pub system: System,
    pub metrics: Vec<Metric>,
    pub thresholds: Vec<f64>,
}

impl SepConcurrenceTally {
    pub fn new(system: System, metrics: &[Metric], thresholds: &[f64]) -> Result<Self> {
        system.check_metrics(metrics)?;
        if !system.is_two_qubit() {
            return Err(Error::Config("concurrence is defined for two-qubit systems only".into()));
        }
        if thresholds.is_empty() || thresholds.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("thresholds must be nonempty and strictly ascending".into()));
        }
        Ok(SepConcurrenceTally {
            system,
            metrics: metrics.to_vec(),
            thresholds: thresholds.to_vec(),
        })
    }

    fn stride(&self) -> usize {
        2 + self.thresholds.len()
    }
}

impl Tally for SepConcurrenceTally {
    type Scratch = CurveScratch;
    type Output = CurveTable;

    fn stream_dim(&self) -> usize {
        self.system.stream_dim()
    }

    fn width(&self) -> usize {
        self.metrics.len() * self.stride()
    }

    fn scratch(&self) -> CurveScratch {
        let t = self.thresholds.len();
        CurveScratch {
            buckets: vec![0.0; self.metrics.len() * (t + 1)],
            used: vec![false; t + 1],
            w: vec![0.0; self.metrics.len()],
        }
    }

    fn add(&self, point: &[f64], scale: f64, sc: &mut CurveScratch, sums: &mut [f64]) -> Result<bool> {
        let proposal = Proposal::for_metrics(&self.metrics);
        let Some(state) = self.system.draw(point, proposal)? else {
            return Ok(false);
        };
        if !metric_weights(&self.system, proposal, &self.metrics, &state.spectrum, scale, &mut sc.w)? {
            return Ok(false);
        }
        let ppt = PtSpectrum::of(&state)?.is_ppt();
        // PPT two-qubit states are separable, so their concurrence is zero
        let c = if ppt { 0.0 } else { concurrence(&state)? };
        let k = self.thresholds.partition_point(|&t| t < c);
        sc.used[k] = true;
        let t = self.thresholds.len();
        for (m, &w) in sc.w.iter().enumerate() {
            let base = m * self.stride();
            sums[base] += w;
            if ppt {
                sums[base + 1] += w;
            }
            sc.buckets[m * (t + 1) + k] += w;
        }
        Ok(true)
    }

    fn finish(&self, sc: CurveScratch, sums: &mut [f64]) {
        let t = self.thresholds.len();
        let last_used = sc.used.iter().rposition(|&u| u).unwrap_or(0);
        for m in 0..self.metrics.len() {
            let base = m * self.stride();
            let buckets = &sc.buckets[m * (t + 1)..(m + 1) * (t + 1)];
            let mut running = 0.0;
            for j in 0..t {
                running += buckets[j];
                sums[base + 2 + j] = if j >= last_used { sums[base] } else { running };
            }
        }
    }

    fn finalize(&self, plan: &RunPlan, partials: &[BlockPartial]) -> Result<CurveTable> {
        check_partials(plan, self.width(), partials)?;
        let mut curves = Vec::new();
        for (m, &metric) in self.metrics.iter().enumerate() {
            let base = m * self.stride();
            let w = total(partials, base);
            if !(w > 0.0) {
                return Err(Error::DegenerateRun(format!("zero total {} weight", metric.tag())));
            }
            let (p, se): (Vec<f64>, Vec<f64>) = (0..self.thresholds.len())
                .map(|j| {
                    if total(partials, base + 2 + j) > 0.0 {
                        let e = block_ratio(partials, base + 1, base + 2 + j);
                        (e.value, e.se)
                    } else {
                        (f64::NAN, f64::NAN)
                    }
                })
                .unzip();
            curves.push(MetricCurve {
                metric,
                p,
                se,
                ess: f64::NAN,
                ppt: block_ratio(partials, base + 1, base),
            });
        }
        let (total_samples, rejected) = run_totals(partials);
        Ok(CurveTable {
            system: self.system.tag(),
            constraint: "concurrence-threshold".into(),
            grid: self.thresholds.clone(),
            curves,
            total_samples,
            rejected,
        })
    }
}

/// `P(separable | C <= C0)` per metric and threshold; undefined entries are NaN.
pub fn sep_vs_concurrence(system: System, metrics: &[Metric], thresholds: &[f64], plan: &RunPlan) -> Result<CurveTable> {
    run(&SepConcurrenceTally::new(system, metrics, thresholds)?, plan)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(t: &str) -> System {
        System::parse(t).unwrap()
    }

    #[test]
    fn grid_points_and_parsing() {
        let g = AlphaGrid::unit(1000).points();
        assert_eq!(g.len(), 1001);
        assert_eq!((g[0], g[500], g[1000]), (0.0, 0.5, 1.0));
        let e = AlphaGrid::parse("-2.25:2.75:20").unwrap().points();
        assert_eq!((e[0], e[20]), (-2.25, 2.75));
        assert!(AlphaGrid::parse("0:1:1").is_err());
        assert!(AlphaGrid::parse("1:0:10").is_err());
        assert!(AlphaGrid::parse("0:1").is_err());
    }

    #[test]
    fn constraint_compatibility() {
        let unit = AlphaGrid::unit(10).points();
        let ext = AlphaGrid::parse("-2.25:2.75:10").unwrap().points();
        assert!(Constraint::Det.check(&sys("qq-real"), &unit).is_err());
        assert!(Constraint::MinEig.check(&sys("qq-real"), &unit).is_ok());
        assert!(Constraint::Det.check(&sys("2q-real"), &ext).is_err());
        assert!(Constraint::ConvMinEig.check(&sys("2q-real"), &ext).is_ok());
        assert!(Constraint::parse("bogus").is_err());
    }

    #[test]
    fn small_run_endpoints() {
        let grid = AlphaGrid::unit(20).points();
        let plan = RunPlan::new(1600, 11);
        for c in [Constraint::Det, Constraint::MinEig, Constraint::ConvDet, Constraint::Concurrence, Constraint::ConvMinEig] {
            let t = alpha_curve(sys("2q-complex"), c, &[Metric::HilbertSchmidt, Metric::Bures], &grid, &plan).unwrap();
            for curve in &t.curves {
                assert_eq!(curve.p[0], 1.0, "{}", c.tag());
                assert_eq!(curve.p[20], curve.ppt.value, "{}", c.tag());
                for w in curve.p.windows(2) {
                    assert!(w[1] <= w[0]);
                }
            }
            if c == Constraint::Concurrence {
                for curve in &t.curves {
                    assert!(curve.p[..=10].iter().all(|&p| p == 1.0));
                }
            }
        }
    }

    #[test]
    fn concurrence_threshold_endpoint() {
        let thr = AlphaGrid::unit(10).points();
        let plan = RunPlan::new(1600, 5);
        let t = sep_vs_concurrence(sys("2q-real"), &[Metric::HilbertSchmidt], &thr, &plan).unwrap();
        let c = &t.curves[0];
        assert_eq!(c.p[10], c.ppt.value);
        assert!(c.p.iter().all(|p| p.is_nan() || (0.0..=1.0).contains(p)));
    }
}
