use std::path::PathBuf;

use serde_json::{json, Value};

use qsep_core::acceptance::{run_criteria_with, Bound, Level, Outcome, CRITERIA};
use qsep_core::estimator::analysis::JumpReport;
use qsep_core::estimator::{
    jump_detect, ratio_analysis, CurveTable, CurveTally, EigenModel, EsfHistogram, EsfTally, MarginalTally,
    SepConcurrenceTally, System,
};
use qsep_core::measures::Metric;
use qsep_core::oracles::{
    beta_fit_params, constant, constants, dyson_sigma, fit_curve, marg_rank3, verify_identity, ClosedFormConstant,
    DysonModel, DysonShape, FitCurve, Identity,
};

use crate::checkpoint::execute;
use crate::config::{default_dir, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{line_chart, num, sibling, write_file, Csv, Series};

fn svg_path(cfg: &RunConfig) -> PathBuf {
    cfg.out.with_extension("svg")
}

fn finish(cfg: &RunConfig, csv: &Csv, chart: impl FnOnce() -> String) -> CliResult<()> {
    write_file(&cfg.out, csv.as_str())?;
    println!("wrote {}", cfg.out.display());
    if cfg.svg {
        let p = svg_path(cfg);
        write_file(&p, &chart())?;
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn curve_csv(t: &CurveTable, xname: &str, with_ess: bool) -> Csv {
    let mut header = vec![xname.to_string()];
    for c in &t.curves {
        header.push(format!("{}_p", c.metric.tag()));
        header.push(format!("{}_se", c.metric.tag()));
        if with_ess {
            header.push(format!("{}_ess", c.metric.tag()));
        }
    }
    let mut csv = Csv::new(&header);
    for (i, &x) in t.grid.iter().enumerate() {
        let mut row = vec![num(x)];
        for c in &t.curves {
            row.push(num(c.p[i]));
            row.push(num(c.se[i]));
            if with_ess {
                row.push(num(c.ess));
            }
        }
        csv.row(&row);
    }
    csv
}

fn curve_series(t: &CurveTable) -> Vec<Series> {
    t.curves
        .iter()
        .map(|c| Series {
            name: c.metric.tag().to_string(),
            points: t.grid.iter().copied().zip(c.p.iter().copied()).collect(),
        })
        .collect()
}

fn print_ppt(t: &CurveTable) {
    println!("{}: {} samples, {} rejected", t.system, t.total_samples, t.rejected);
    for c in &t.curves {
        let ess = if c.ess.is_nan() { String::new() } else { format!("   ESS = {:.0}", c.ess) };
        println!("  {:<6} P_PPT = {:.8} ± {:.2e}{ess}", c.metric.tag(), c.ppt.value, c.ppt.se);
    }
}

pub fn alpha_curve(cfg: &RunConfig) -> CliResult<()> {
    let system = cfg.system()?;
    let tally = CurveTally::new(system, cfg.constraint, &cfg.metrics, &cfg.grid.points())?;
    let t = execute(&tally, &cfg.plan(), &sibling(&cfg.out, ".ckpt"), &cfg.fingerprint(), cfg.resume, "alpha-curve")?;
    print_ppt(&t);
    let title = format!("{} {} alpha-curve", t.system, t.constraint);
    finish(cfg, &curve_csv(&t, "alpha", true), || {
        line_chart(&title, "alpha", "probability", &curve_series(&t))
    })
}

pub fn sep_vs_concurrence(cfg: &RunConfig) -> CliResult<()> {
    let system = cfg.system()?;
    let tally = SepConcurrenceTally::new(system, &cfg.metrics, &cfg.grid.points())?;
    let t = execute(
        &tally,
        &cfg.plan(),
        &sibling(&cfg.out, ".ckpt"),
        &cfg.fingerprint(),
        cfg.resume,
        "sep-vs-concurrence",
    )?;
    print_ppt(&t);
    let title = format!("{} P(PPT | C <= C0)", t.system);
    finish(cfg, &curve_csv(&t, "c0", false), || {
        line_chart(&title, "C0", "probability", &curve_series(&t))
    })
}

/// Points where a jump is looked for.
fn jump_candidates(s: &System) -> Vec<f64> {
    match (s.is_two_qubit(), s.is_full_rank()) {
        (true, _) => vec![0.5],
        (false, false) => vec![1.0 / 3.0, 0.5],
        (false, true) => Vec::new(),
    }
}

fn jump_json(tag: &str, r: Result<JumpReport, qsep_core::Error>, candidate: f64) -> Value {
    match r {
        Ok(j) => {
            println!(
                "  jump {tag} at {candidate:.4}: {:.6} ± {:.2e} (left {:.6}, right {:.6}, z = {:.2})",
                j.jump,
                j.se,
                j.left.value,
                j.right.value,
                j.z()
            );
            json!({"system": tag, "candidate": candidate, "jump": j.jump, "se": j.se, "z": j.z(),
                   "left": j.left.value, "left_se": j.left.se, "right": j.right.value, "right_se": j.right.se})
        }
        Err(e) => {
            println!("  jump {tag} at {candidate:.4}: {e}");
            json!({"system": tag, "candidate": candidate, "error": e.to_string()})
        }
    }
}

/// Jump and ratio fits use one-sided windows of this width.
const WINDOW: f64 = 0.1;

pub fn esf(cfg: &RunConfig) -> CliResult<()> {
    let systems = cfg
        .systems
        .iter()
        .map(|s| System::parse(s))
        .collect::<Result<Vec<_>, _>>()?;
    let paired = match systems.as_slice() {
        [_] => false,
        [a, b] if a.dims == b.dims && a.rank == b.rank && a.beta() != b.beta() => true,
        _ => {
            return Err(CliError::Config(
                "esf takes one system, or a real and a complex system of the same shape".into(),
            ))
        }
    };
    let mut hists: Vec<(System, EsfHistogram)> = Vec::new();
    for s in &systems {
        let tally = EsfTally::new(*s, cfg.bins)?;
        let ckpt = sibling(&cfg.out, &format!(".{}.ckpt", s.tag()));
        let h = execute(&tally, &cfg.plan(), &ckpt, &cfg.fingerprint(), cfg.resume, &format!("esf {}", s.tag()))?;
        hists.push((*s, h));
    }
    hists.sort_by_key(|(s, _)| s.beta());

    let mut header = vec!["c_lo".to_string(), "c_hi".into(), "c_mid".into()];
    for (s, _) in &hists {
        for f in ["sigma", "se", "mass", "count", "sigma_unweighted", "se_unweighted"] {
            header.push(format!("{}_{f}", s.tag().replace('-', "_")));
        }
    }
    let mut ratio_error = None;
    let ratio = if paired {
        header.push("ratio".into());
        header.push("ratio_se".into());
        match ratio_analysis(&hists[0].1, &hists[1].1, WINDOW) {
            Ok(r) => Some(r),
            Err(e) => {
                ratio_error = Some(e.to_string());
                None
            }
        }
    } else {
        None
    };
    let mut csv = Csv::new(&header);
    for i in 0..cfg.bins {
        let b0 = &hists[0].1.bins[i];
        let mut row = vec![num(b0.lo), num(b0.hi), num(b0.mid())];
        for (_, h) in &hists {
            let b = &h.bins[i];
            row.extend([num(b.sigma), num(b.se), num(b.mass), b.count.to_string(), num(b.sigma_unweighted), num(b.se_unweighted)]);
        }
        match &ratio {
            Some(r) => row.extend([num(r.bins[i].ratio), num(r.bins[i].se)]),
            None if paired => row.extend([num(f64::NAN), num(f64::NAN)]),
            None => {}
        }
        csv.row(&row);
    }

    let mut jumps = Vec::new();
    for (s, h) in &hists {
        let (agree, compared) = h.ansatz_agreement();
        println!(
            "{}: {} samples, {} rejected; weighted and unweighted fractions agree in {agree}/{compared} bins",
            s.tag(),
            h.total_samples,
            h.rejected
        );
        for c in jump_candidates(s) {
            jumps.push(jump_json(&s.tag(), jump_detect(h, c, WINDOW), c));
        }
    }
    let mut report = json!({"window": WINDOW, "jumps": jumps});
    if let Some(r) = &ratio {
        println!(
            "  ratio: slope k = {:.5} ± {:.2e} on (0, 1/2]; constant = {:.5} ± {:.2e} on [1/2, 1]; right limit at 1/2 = {:.5} ± {:.2e}",
            r.slope.value, r.slope.se, r.constant.value, r.constant.se, r.right_limit_ratio.value, r.right_limit_ratio.se
        );
        report["ratio"] = json!({
            "slope": r.slope.value, "slope_se": r.slope.se,
            "constant": r.constant.value, "constant_se": r.constant.se,
            "right_limit_ratio": r.right_limit_ratio.value, "right_limit_ratio_se": r.right_limit_ratio.se,
            "excluded_bins": r.excluded.len(),
        });
    }
    if let Some(e) = ratio_error {
        println!("  ratio: {e}");
        report["ratio"] = json!({"error": e});
    }
    let report_path = sibling(&cfg.out, ".report.json");
    write_file(&report_path, &format!("{report:#}\n"))?;
    println!("wrote {}", report_path.display());
    let series: Vec<Series> = hists
        .iter()
        .map(|(s, h)| Series {
            name: s.tag(),
            points: h.bins.iter().map(|b| (b.mid(), b.sigma)).collect(),
        })
        .collect();
    finish(cfg, &csv, || line_chart("ESF", "C_max", "sigma", &series))
}

fn single_metric(cfg: &RunConfig) -> CliResult<Metric> {
    match cfg.metrics.as_slice() {
        [m] => Ok(*m),
        _ => Err(CliError::Config(format!("{} takes exactly one metric", cfg.command))),
    }
}

fn field_name(beta: u32) -> &'static str {
    match beta {
        1 => "real",
        2 => "complex",
        _ => "quat",
    }
}

/// Registry value of `id` for HS two-qubit models, when one exists.
fn reference(model: &EigenModel, metric: Metric, id: impl Fn(&str) -> String) -> Option<f64> {
    if metric != Metric::HilbertSchmidt || model.n != 4 {
        return None;
    }
    constant(&id(field_name(model.beta))).ok().map(|c| c.value)
}

pub fn marginal(cfg: &RunConfig) -> CliResult<()> {
    let model = cfg.eigen_model()?;
    let metric = single_metric(cfg)?;
    let tally = MarginalTally::new(model, metric, cfg.bins)?;
    let m = execute(&tally, &cfg.plan(), &sibling(&cfg.out, ".ckpt"), &cfg.fingerprint(), cfg.resume, "marginal")?;
    println!("{} {}: {} samples, {} rejected", m.model, metric.tag(), m.total_samples, m.rejected);
    type Id = fn(&str) -> String;
    let (mean_id, upper_id): (Id, Id) = if model.is_full_rank() {
        (|_| String::new(), |f| format!("upper_mass_hs_{f}"))
    } else {
        (|f| format!("rank3_{f}_mean"), |f| format!("rank3_{f}_upper_mass"))
    };
    let show = |name: &str, e: qsep_core::estimator::Estimate, exact: Option<f64>| {
        let exact = exact.map_or(String::new(), |x| format!("   exact {x:.10}"));
        println!("  {name:<12} {:.8} ± {:.2e}{exact}", e.value, e.se);
    };
    show("mean", m.mean, reference(&model, metric, mean_id));
    show("upper mass", m.upper_mass, reference(&model, metric, upper_id));
    if model.is_full_rank() {
        show("abs sep", m.abs_sep, reference(&model, metric, |f| format!("abs_sep_hs_{f}")));
    }
    let mut csv = Csv::new(&["c_lo", "c_hi", "density", "mass"]);
    let width = (m.hi - m.lo) / cfg.bins as f64;
    for (i, (d, w)) in m.density.iter().zip(&m.mass).enumerate() {
        let lo = m.lo + width * i as f64;
        csv.row(&[num(lo), num(lo + width), num(*d), num(*w)]);
    }
    let series = vec![Series {
        name: m.model.clone(),
        points: m
            .density
            .iter()
            .enumerate()
            .map(|(i, &d)| (m.lo + width * (i as f64 + 0.5), d))
            .collect(),
    }];
    finish(cfg, &csv, || line_chart("C_max marginal", "C_max", "density", &series))
}

pub fn abs_sep(cfg: &RunConfig) -> CliResult<()> {
    let model = cfg.eigen_model()?;
    let metric = single_metric(cfg)?;
    let tally = MarginalTally::new(model, metric, 1)?;
    let m = execute(&tally, &cfg.plan(), &sibling(&cfg.out, ".ckpt"), &cfg.fingerprint(), cfg.resume, "abs-sep")?;
    let exact = if model.is_full_rank() {
        reference(&model, metric, |f| format!("abs_sep_hs_{f}"))
    } else {
        Some(0.0)
    };
    println!(
        "{} {}: P_abs = {:.10} ± {:.2e}{}",
        m.model,
        metric.tag(),
        m.abs_sep.value,
        m.abs_sep.se,
        exact.map_or(String::new(), |x| format!("   exact {x:.10}"))
    );
    let mut csv = Csv::new(&["model", "metric", "p_abs", "se", "samples", "rejected", "exact"]);
    csv.row(&[
        m.model.clone(),
        metric.tag().into(),
        num(m.abs_sep.value),
        num(m.abs_sep.se),
        m.total_samples.to_string(),
        m.rejected.to_string(),
        exact.map_or("NaN".into(), num),
    ]);
    write_file(&cfg.out, csv.as_str())?;
    println!("wrote {}", cfg.out.display());
    Ok(())
}

fn constant_row(c: &ClosedFormConstant) -> Vec<String> {
    vec![
        c.id.to_string(),
        format!("\"{}\"", c.expr),
        num(c.value),
        c.printed.to_string(),
        c.printed_consistent.to_string(),
        c.times_kappa.to_string(),
        format!("\"{}\"", c.source.replace('"', "'")),
    ]
}

const CONSTANT_HEADER: [&str; 7] = ["id", "expression", "value", "printed", "printed_consistent", "times_kappa", "source"];

fn parse_f64(what: &str, s: Option<&String>) -> CliResult<f64> {
    let s = s.ok_or_else(|| CliError::Config(format!("missing {what}")))?;
    s.parse().map_err(|_| CliError::Config(format!("invalid {what}: `{s}`")))
}

fn sigma_for(name: &str, identity: Identity) -> CliResult<Box<dyn Fn(f64) -> f64>> {
    Ok(match name {
        "one" => Box::new(|_| 1.0),
        "zero" => Box::new(|_| 0.0),
        "dyson" => {
            let beta = if identity == Identity::EsfReal { 1 } else { 2 };
            let model = DysonModel::new(DysonShape::Rank4Upper, beta)?;
            Box::new(move |c| if c >= 0.5 { dyson_sigma(&model, c).unwrap_or(0.0) } else { 0.0 })
        }
        other => return Err(CliError::Config(format!("unknown sigma `{other}` (one, zero, dyson)"))),
    })
}

/// `oracle all | <id> | verify <identity> | beta_fit <β> | fit <curve> <α> | marg_rank3 <C> <β>`
pub fn oracle(args: &[String], sigma: &str) -> CliResult<()> {
    let usage = || {
        CliError::Config(
            "usage: oracle all | <constant id> | verify <identity> | beta_fit <beta> | fit <curve> <alpha> | marg_rank3 <C> <beta>"
                .into(),
        )
    };
    let head = args.first().ok_or_else(usage)?;
    match head.as_str() {
        "all" => {
            let mut csv = Csv::new(&CONSTANT_HEADER);
            for c in constants() {
                csv.row(&constant_row(c));
            }
            print!("{}", csv.as_str());
        }
        "verify" => {
            let targets: Vec<Identity> = match args.get(1).map(String::as_str) {
                None => Identity::ALL.into_iter().filter(|i| !i.needs_sigma()).collect(),
                Some("all") => Identity::ALL.to_vec(),
                Some(t) => vec![Identity::parse(t)?],
            };
            println!("identity,sigma,rhs,target,deviation,error_estimate,converged,evaluations");
            for id in targets {
                let s = sigma_for(sigma, id)?;
                let r = verify_identity(id, id.needs_sigma().then_some(s.as_ref()), 1e-10)?;
                println!(
                    "{},{},{},{},{},{},{},{}",
                    id.tag(),
                    if id.needs_sigma() { sigma } else { "-" },
                    num(r.rhs),
                    num(r.target),
                    num(r.deviation),
                    num(r.error_estimate),
                    r.converged,
                    r.evaluations
                );
            }
        }
        "beta_fit" => {
            let beta = parse_f64("beta", args.get(1))? as u32;
            let f = beta_fit_params(beta)?;
            println!("beta,p,q,p_moment,q_moment");
            println!("{},{},{},{},{}", f.beta, num(f.p), num(f.q), num(f.p_moment), num(f.q_moment));
        }
        "fit" => {
            let curve = FitCurve::parse(args.get(1).ok_or_else(usage)?)?;
            let alpha = parse_f64("alpha", args.get(2))?;
            println!("{}", num(fit_curve(curve, alpha)?));
        }
        "marg_rank3" => {
            let c = parse_f64("C", args.get(1))?;
            let beta = parse_f64("beta", args.get(2))? as u32;
            println!("{}", num(marg_rank3(c, beta)?));
        }
        id => {
            let c = constant(id)?;
            let mut csv = Csv::new(&CONSTANT_HEADER);
            csv.row(&constant_row(c));
            print!("{}", csv.as_str());
        }
    }
    Ok(())
}

fn parse_ids(only: &str) -> CliResult<Vec<u8>> {
    only.split(',')
        .map(|s| {
            s.trim()
                .parse::<u8>()
                .ok()
                .filter(|i| CRITERIA.contains(i))
                .ok_or_else(|| CliError::Config(format!("unknown criterion `{s}` (valid: 1-13)")))
        })
        .collect()
}

fn outcome_json(o: &Outcome) -> Value {
    let checks: Vec<Value> = o
        .checks
        .iter()
        .map(|c| {
            let (kind, target, tol) = match c.bound {
                Bound::Within { target, tol } => ("within", Some(target), Some(tol)),
                Bound::AtLeast(b) => ("at_least", Some(b), None),
                Bound::AtMost(b) => ("at_most", Some(b), None),
                Bound::Report => ("report", None, None),
            };
            json!({"label": c.label, "value": c.value, "se": c.se, "bound": kind,
                   "target": target, "tolerance": tol, "passed": c.passed()})
        })
        .collect();
    json!({"id": o.id, "title": o.title, "passed": o.passed(), "samples": o.samples,
           "seconds": o.seconds, "error": o.error, "checks": checks})
}

pub struct CheckArgs<'a> {
    pub level: &'a str,
    pub only: Option<&'a str>,
    pub oracle_only: bool,
    pub samples: Option<u64>,
    pub out: Option<PathBuf>,
}

pub fn check(a: CheckArgs) -> CliResult<()> {
    let level = Level::parse(a.level)?;
    let ids = match (a.only, a.oracle_only) {
        (Some(_), true) => return Err(CliError::Config("--only and --oracle-only are exclusive".into())),
        (Some(s), false) => parse_ids(s)?,
        (None, true) => vec![4, 10],
        (None, false) => CRITERIA.to_vec(),
    };
    let outcomes = run_criteria_with(level, &ids, a.samples)?;
    println!("{:<4} {:>3}  {:<45} {:>12} {:>9}", "", "id", "criterion", "samples", "seconds");
    for o in &outcomes {
        println!(
            "{:<4} {:>3}  {:<45} {:>12} {:>9.1}",
            if o.passed() { "PASS" } else { "FAIL" },
            o.id,
            o.title,
            o.samples,
            o.seconds
        );
        for c in &o.checks {
            println!("           {c}");
        }
        if let Some(e) = &o.error {
            println!("           error: {e}");
        }
    }
    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.passed()).map(|o| o.id).collect();
    let summary = json!({
        "level": level.tag(),
        "passed": failed.is_empty(),
        "failed": failed,
        "criteria": outcomes.iter().map(outcome_json).collect::<Vec<_>>(),
    });
    let out = a
        .out
        .unwrap_or_else(|| default_dir().join(format!("check_{}.json", level.tag())));
    write_file(&out, &format!("{summary:#}\n"))?;
    println!("wrote {}", out.display());
    if failed.is_empty() {
        println!("{} of {} criteria passed", outcomes.len(), outcomes.len());
        Ok(())
    } else {
        Err(CliError::Acceptance(format!(
            "{} of {} criteria failed: {failed:?}",
            failed.len(),
            outcomes.len()
        )))
    }
}
