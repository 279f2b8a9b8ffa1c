//! Block-level checkpointing. A checkpoint is a text file holding a version
//! line, the run fingerprint and one `BlockPartial` record per finished
//! block, appended as blocks complete.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::Path;

use qsep_core::estimator::{run_blocks, BlockPartial, RunPlan, Tally};

use crate::error::{CliError, CliResult};

const VERSION: &str = "qsep-checkpoint 1";

fn read(path: &Path, fingerprint: &str, plan: &RunPlan, width: usize) -> CliResult<BTreeMap<usize, BlockPartial>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some(VERSION) {
        return Err(CliError::Config(format!("{} is not a {VERSION} file", path.display())));
    }
    if lines.next().and_then(|l| l.strip_prefix("config ")) != Some(fingerprint) {
        return Err(CliError::Config(format!(
            "checkpoint {} was written for a different configuration",
            path.display()
        )));
    }
    let complete = text.ends_with('\n');
    let records: Vec<&str> = lines.collect();
    let mut done = BTreeMap::new();
    for (i, line) in records.iter().enumerate() {
        let p = match BlockPartial::from_line(line) {
            Ok(p) => p,
            // a record cut short by an interruption is simply redone
            Err(_) if i + 1 == records.len() && !complete => break,
            Err(e) => return Err(e.into()),
        };
        let (start, end) = if p.block < plan.blocks { plan.block_range(p.block) } else { (0, 0) };
        if p.block >= plan.blocks || p.samples != end - start || p.sums.len() != width {
            return Err(CliError::Config(format!(
                "checkpoint record for block {} does not match the run",
                p.block
            )));
        }
        done.insert(p.block, p);
    }
    Ok(done)
}

fn start_file(path: &Path, fingerprint: &str, done: &BTreeMap<usize, BlockPartial>) -> CliResult<File> {
    let mut text = format!("{VERSION}\nconfig {fingerprint}\n");
    for p in done.values() {
        text.push_str(&p.to_line());
        text.push('\n');
    }
    crate::output::write_file(path, &text)?;
    OpenOptions::new().append(true).open(path).map_err(|e| CliError::io(path, e))
}

/// Runs every block not yet in the checkpoint at `path`, recording each as it
/// finishes, and finalizes. Without `resume` any old checkpoint is replaced.
pub fn execute<T: Tally>(
    tally: &T,
    plan: &RunPlan,
    path: &Path,
    fingerprint: &str,
    resume: bool,
    label: &str,
) -> CliResult<T::Output> {
    plan.validate()?;
    let mut done = if resume && path.exists() {
        read(path, fingerprint, plan, tally.width())?
    } else {
        BTreeMap::new()
    };
    if resume && !done.is_empty() {
        eprintln!("{label}: resuming with {}/{} blocks done", done.len(), plan.blocks);
    }
    let mut file = start_file(path, fingerprint, &done)?;
    let pending: Vec<usize> = (0..plan.blocks).filter(|b| !done.contains_key(b)).collect();
    let batch = match plan.workers {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        w => w,
    };
    for chunk in pending.chunks(batch) {
        for p in run_blocks(tally, plan, chunk)? {
            writeln!(file, "{}", p.to_line()).map_err(|e| CliError::io(path, e))?;
            done.insert(p.block, p);
        }
        file.flush().map_err(|e| CliError::io(path, e))?;
        eprint!("\r{label}: {}/{} blocks", done.len(), plan.blocks);
    }
    eprintln!();
    let partials: Vec<BlockPartial> = done.into_values().collect();
    Ok(tally.finalize(plan, &partials)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qsep_core::estimator::spectral::MarginalTally;
    use qsep_core::estimator::EigenModel;
    use qsep_core::measures::Metric;

    fn tally() -> MarginalTally {
        MarginalTally::new(EigenModel::new(4, 4, 2).unwrap(), Metric::HilbertSchmidt, 20).unwrap()
    }

    #[test]
    fn resume_matches_uninterrupted_run() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.ckpt");
        let plan = RunPlan::new(3200, 5);
        let t = tally();
        let full = execute(&t, &plan, &path, "fp", false, "test").unwrap();

        // keep the header and the first five records, with the sixth cut short
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        let mut cut = lines[..7].join("\n");
        cut.push('\n');
        cut.push_str(&lines[7][..20]);
        fs::write(&path, cut).unwrap();

        let resumed = execute(&t, &plan, &path, "fp", true, "test").unwrap();
        assert_eq!(full, resumed);
        assert!(matches!(execute(&t, &plan, &path, "other", true, "test"), Err(CliError::Config(_))));
    }
}
