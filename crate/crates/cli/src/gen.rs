//! `gen`: synthetic kill/coverage/operator fixtures.
//!
//! Coverage cells are 1 with probability `cover_density`; kill cells are 1
//! with probability `kill_given_cover` where covered, 0 elsewhere, so the
//! pair satisfies kill => cover by construction. Operator labels are uniform
//! over `OP1..OPk`. Output is deterministic per seed.

use std::path::PathBuf;

use rand::Rng;

use mutred_core::csv_io::{matrix_to_csv, operator_pairs_to_csv};
use mutred_core::matrix::RelationMatrix;
use mutred_core::sampling::{derive_seed, seeded_rng};
use mutred_core::{Error, Result};

use crate::report::{out_path, write_file};
use crate::workbench::DOM_GEN;

pub struct GenArgsResolved {
    pub mutants: usize,
    pub tests: usize,
    pub cover_density: f64,
    pub kill_given_cover: f64,
    pub operator_count: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
}

pub fn run(args: &GenArgsResolved) -> Result<()> {
    if args.mutants == 0 || args.tests == 0 {
        return Err(Error::input("mutant and test counts must be at least 1"));
    }
    if args.operator_count == 0 {
        return Err(Error::input("operator count must be at least 1"));
    }
    for (name, p) in [
        ("cover-density", args.cover_density),
        ("kill-given-cover", args.kill_given_cover),
    ] {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::input(format!("{name} must lie in (0, 1], got {p}")));
        }
    }

    let mut rng = seeded_rng(derive_seed(args.seed, &[DOM_GEN]));
    let mutant_ids: Vec<String> = (1..=args.mutants).map(|i| format!("m{i}")).collect();
    let test_ids: Vec<String> = (1..=args.tests).map(|i| format!("t{i}")).collect();

    let mut cover_rows = Vec::with_capacity(args.mutants);
    let mut kill_rows = Vec::with_capacity(args.mutants);
    for _ in 0..args.mutants {
        let cover_row: Vec<bool> = (0..args.tests)
            .map(|_| rng.random::<f64>() < args.cover_density)
            .collect();
        let kill_row: Vec<bool> = cover_row
            .iter()
            .map(|&covered| covered && rng.random::<f64>() < args.kill_given_cover)
            .collect();
        cover_rows.push(cover_row);
        kill_rows.push(kill_row);
    }
    let cover = RelationMatrix::from_rows(mutant_ids.clone(), test_ids.clone(), &cover_rows)?;
    let kill = RelationMatrix::from_rows(mutant_ids.clone(), test_ids, &kill_rows)?;

    let pairs: Vec<(String, String)> = mutant_ids
        .iter()
        .map(|id| {
            let label = format!("OP{}", rng.random_range(1..=args.operator_count));
            (id.clone(), label)
        })
        .collect();

    write_file(
        &out_path(&args.output_dir, "kill.csv"),
        &matrix_to_csv(&kill),
    )?;
    write_file(
        &out_path(&args.output_dir, "coverage.csv"),
        &matrix_to_csv(&cover),
    )?;
    write_file(
        &out_path(&args.output_dir, "operators.csv"),
        &operator_pairs_to_csv(&pairs),
    )?;
    println!(
        "wrote {}, {}, {}",
        out_path(&args.output_dir, "kill.csv").display(),
        out_path(&args.output_dir, "coverage.csv").display(),
        out_path(&args.output_dir, "operators.csv").display(),
    );
    Ok(())
}
