//! `oracle`: exhaustive order-preservation check over every subset pair.

use std::path::{Path, PathBuf};

use mutred_core::indicators::{full_oracle_op, p_count};
use mutred_core::sampling::derive_seed;
use mutred_core::{Error, Result};

use crate::report::{out_path, write_file};
use crate::workbench::{load_workbench, resolve_strategy, DOM_SELECT};

pub struct OracleArgsResolved {
    pub kill_path: PathBuf,
    pub selection: String,
    pub max_n: usize,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
}

pub fn run(args: &OracleArgsResolved) -> Result<()> {
    let bench = load_workbench(Path::new(&args.kill_path), None, None)?;
    let tests = bench.kill.test_count();
    if tests > args.max_n {
        return Err(Error::resource(format!(
            "the oracle enumerates all 2^n subsets; {tests} tests exceed the cap of {}. \
             Use `evaluate` with the sampled OP indicator instead",
            args.max_n
        )));
    }
    let strategy = resolve_strategy(&args.selection, &bench)?;
    let selection = strategy.select(&bench, derive_seed(args.seed, &[DOM_SELECT, 0, 0]))?;
    let outcome = full_oracle_op(&bench.kill, selection.mutants(), &bench.kill.full_suite())?;
    let closed_form = p_count(tests as u32);

    println!(
        "selection:  {} ({} mutants)",
        strategy.label,
        selection.len()
    );
    println!("changed:    {} of {}", outcome.changed, outcome.total);
    println!("preserved:  {}", outcome.preserved);
    println!(
        "p_count({tests}) = {closed_form} ({})",
        if closed_form == outcome.total {
            "matches the comparison count"
        } else {
            "MISMATCH"
        }
    );
    if closed_form != outcome.total {
        return Err(Error::domain(
            "comparison count disagrees with the closed form",
        ));
    }

    if let Some(dir) = &args.output_dir {
        let csv = format!(
            "strategy,selection_size,changed,total,preserved\n{},{},{},{},{}\n",
            strategy.label,
            selection.len(),
            outcome.changed,
            outcome.total,
            outcome.preserved
        );
        write_file(&out_path(dir, "oracle.csv"), &csv)?;
        println!("wrote {}", out_path(dir, "oracle.csv").display());
    }
    Ok(())
}
