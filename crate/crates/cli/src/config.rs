//! Run configuration: INI-style file values overridden by command-line flags.
//!
//! ```text
//! # keys before any section apply to every subcommand
//! seed = 7
//! samples = 1600000
//!
//! [alpha-curve]
//! system = 2q-real
//! constraint = convmineig
//! grid = -2.25:2.75:1000
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use qsep_core::estimator::curve::Constraint;
use qsep_core::estimator::{AlphaGrid, EigenModel, RunPlan, System, MIN_BLOCKS};
use qsep_core::measures::Metric;

use crate::error::{CliError, CliResult};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "QSEP_OUT_DIR";

pub const KEYS: [&str; 12] = [
    "system", "constraint", "metrics", "samples", "seed", "blocks", "grid", "bins", "out", "svg", "workers", "resume",
];

/// Flat key-value pairs, already merged for one subcommand.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ini {
    values: BTreeMap<String, String>,
}

impl Ini {
    /// Parses `text`, keeping global keys and those of `[section]`.
    pub fn parse(text: &str, section: &str) -> CliResult<Ini> {
        let mut global = BTreeMap::new();
        let mut scoped = BTreeMap::new();
        let mut current: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            let bad = |what: &str| CliError::Config(format!("config line {}: {what}: `{raw}`", i + 1));
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| bad("unterminated section"))?;
                current = Some(name.trim().to_string());
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| bad("expected key = value"))?;
            let k = k.trim().to_ascii_lowercase();
            if !KEYS.contains(&k.as_str()) {
                return Err(bad(&format!("unknown key (valid: {})", KEYS.join(", "))));
            }
            let v = v.trim().to_string();
            match &current {
                None => global.insert(k, v),
                Some(s) if s == section => scoped.insert(k, v),
                Some(_) => None,
            };
        }
        global.extend(scoped);
        Ok(Ini { values: global })
    }

    pub fn load(path: &Path, section: &str) -> CliResult<Ini> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Ini::parse(&text, section)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }
}

/// Flags shared by the sampling subcommands; every one may be omitted.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct RunArgs {
    /// System tag, e.g. 2q-complex, 2q-real-rank3, qq-real (comma list for esf)
    #[arg(long)]
    pub system: Option<String>,
    /// det, mineig, convdet, convmineig or concurrence
    #[arg(long)]
    pub constraint: Option<String>,
    /// Comma list of hs, bures, wy, km
    #[arg(long)]
    pub metrics: Option<String>,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub blocks: Option<usize>,
    /// start:end:steps
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    #[arg(long)]
    pub bins: Option<usize>,
    /// Output CSV path (default: $QSEP_OUT_DIR or the working directory)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write an SVG chart next to the CSV
    #[arg(long)]
    pub svg: bool,
    /// Worker threads; never changes results
    #[arg(long)]
    pub workers: Option<usize>,
    /// Continue from the checkpoint left by an interrupted run
    #[arg(long)]
    pub resume: bool,
}

/// Fully resolved configuration of one sampling run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: &'static str,
    pub systems: Vec<String>,
    pub constraint: Constraint,
    pub metrics: Vec<Metric>,
    pub samples: u64,
    pub seed: u64,
    pub blocks: usize,
    pub grid: AlphaGrid,
    pub bins: usize,
    pub out: PathBuf,
    pub svg: bool,
    pub workers: usize,
    pub resume: bool,
}

pub struct Defaults {
    pub system: &'static str,
    pub grid: &'static str,
    pub bins: usize,
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> CliResult<T> {
    v.trim()
        .parse()
        .map_err(|_| CliError::Config(format!("invalid value for {key}: `{v}`")))
}

fn parse_bool(key: &str, v: &str) -> CliResult<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(CliError::Config(format!("invalid value for {key}: `{v}`"))),
    }
}

impl RunConfig {
    pub fn resolve(command: &'static str, args: &RunArgs, ini: &Ini, defaults: &Defaults) -> CliResult<RunConfig> {
        let pick = |flag: Option<String>, key: &str| flag.or_else(|| ini.get(key).map(str::to_string));
        let systems: Vec<String> = pick(args.system.clone(), "system")
            .unwrap_or_else(|| defaults.system.to_string())
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
        if systems.is_empty() {
            return Err(CliError::Config("no system given".into()));
        }
        let constraint = Constraint::parse(&pick(args.constraint.clone(), "constraint").unwrap_or("det".into()))?;
        let metrics = pick(args.metrics.clone(), "metrics")
            .unwrap_or("hs".into())
            .split(',')
            .map(Metric::parse)
            .collect::<Result<Vec<_>, _>>()?;
        let num_or = |flag: Option<u64>, key: &str, d: u64| -> CliResult<u64> {
            match flag {
                Some(v) => Ok(v),
                None => ini.get(key).map_or(Ok(d), |v| parse_num(key, v)),
            }
        };
        let samples = num_or(args.samples, "samples", 160_000)?;
        let seed = num_or(args.seed, "seed", 1)?;
        let blocks = num_or(args.blocks.map(|b| b as u64), "blocks", MIN_BLOCKS as u64)? as usize;
        let bins = num_or(args.bins.map(|b| b as u64), "bins", defaults.bins as u64)? as usize;
        let workers = num_or(args.workers.map(|w| w as u64), "workers", 0)? as usize;
        let grid = AlphaGrid::parse(&pick(args.grid.clone(), "grid").unwrap_or(defaults.grid.into()))?;
        let svg = args.svg || ini.get("svg").map_or(Ok(false), |v| parse_bool("svg", v))?;
        let resume = args.resume || ini.get("resume").map_or(Ok(false), |v| parse_bool("resume", v))?;
        let out = match pick(args.out.as_ref().map(|p| p.display().to_string()), "out") {
            Some(p) => PathBuf::from(p),
            None => default_dir().join(format!("{}_{}.csv", command.replace('-', "_"), systems.join("_"))),
        };
        let cfg = RunConfig {
            command,
            systems,
            constraint,
            metrics,
            samples,
            seed,
            blocks,
            grid,
            bins,
            out,
            svg,
            workers,
            resume,
        };
        cfg.plan().validate()?;
        Ok(cfg)
    }

    pub fn plan(&self) -> RunPlan {
        RunPlan::new(self.samples, self.seed)
            .with_blocks(self.blocks)
            .with_workers(self.workers)
    }

    pub fn system(&self) -> CliResult<System> {
        match self.systems.as_slice() {
            [one] => Ok(System::parse(one)?),
            _ => Err(CliError::Config(format!("{} takes exactly one system", self.command))),
        }
    }

    /// Spectral model of the single system; `quat` selects β = 4.
    pub fn eigen_model(&self) -> CliResult<EigenModel> {
        let [tag] = self.systems.as_slice() else {
            return Err(CliError::Config(format!("{} takes exactly one system", self.command)));
        };
        let (proxy, beta) = match tag.contains("quat") {
            true => (tag.replace("quat", "complex"), Some(4)),
            false => (tag.clone(), None),
        };
        let s = System::parse(&proxy)?;
        Ok(EigenModel::new(s.n(), s.rank, beta.unwrap_or(s.beta()))?)
    }

    /// Canonical description of everything that determines the results.
    pub fn fingerprint(&self) -> String {
        let metrics: Vec<&str> = self.metrics.iter().map(|m| m.tag()).collect();
        format!(
            "command={} systems={} constraint={} metrics={} samples={} seed={} blocks={} grid={}:{}:{} bins={}",
            self.command,
            self.systems.join(","),
            self.constraint.tag(),
            metrics.join(","),
            self.samples,
            self.seed,
            self.blocks,
            self.grid.start,
            self.grid.end,
            self.grid.steps,
            self.bins
        )
    }
}

pub fn default_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEFAULTS: Defaults = Defaults {
        system: "2q-complex",
        grid: "0:1:100",
        bins: 500,
    };

    #[test]
    fn sections_override_globals() {
        let ini = Ini::parse("seed = 3\nsamples=1600\n[esf]\nseed = 9\n[alpha-curve]\nseed = 5\n", "alpha-curve").unwrap();
        assert_eq!(ini.get("seed"), Some("5"));
        assert_eq!(ini.get("samples"), Some("1600"));
        assert!(Ini::parse("colour = red", "x").is_err());
        assert!(Ini::parse("[open", "x").is_err());
        assert!(Ini::parse("just words", "x").is_err());
    }

    #[test]
    fn flags_beat_file_values() {
        let ini = Ini::parse("samples = 3200\nseed = 4\nsvg = yes", "alpha-curve").unwrap();
        let args = RunArgs {
            seed: Some(11),
            out: Some("x.csv".into()),
            ..Default::default()
        };
        let c = RunConfig::resolve("alpha-curve", &args, &ini, &DEFAULTS).unwrap();
        assert_eq!((c.samples, c.seed, c.svg), (3200, 11, true));
        assert_eq!(c.out, PathBuf::from("x.csv"));
        assert_eq!(c.grid.steps, 100);
    }

    #[test]
    fn invalid_plans_are_config_errors() {
        let args = RunArgs {
            samples: Some(1000),
            ..Default::default()
        };
        assert!(matches!(
            RunConfig::resolve("alpha-curve", &args, &Ini::default(), &DEFAULTS),
            Err(CliError::Config(_))
        ));
        let args = RunArgs {
            grid: Some("0:1:1".into()),
            ..Default::default()
        };
        assert!(RunConfig::resolve("alpha-curve", &args, &Ini::default(), &DEFAULTS).is_err());
    }

    #[test]
    fn quaternionic_models() {
        let args = RunArgs {
            system: Some("2q-quat".into()),
            ..Default::default()
        };
        let c = RunConfig::resolve("marginal", &args, &Ini::default(), &DEFAULTS).unwrap();
        let m = c.eigen_model().unwrap();
        assert_eq!((m.n, m.rank, m.beta), (4, 4, 4));
        assert!(c.system().is_err());
    }
}
