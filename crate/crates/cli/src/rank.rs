//! `rank`: Scott-Knott ESD ranking of strategies per indicator.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use mutred_core::csv_io::read_reports;
use mutred_core::indicators::Indicator;
use mutred_core::ranking::{scott_knott_esd, Direction, SkConfig};
use mutred_core::{Error, Result};

use crate::report::{out_path, write_file};

pub struct RankArgsResolved {
    pub inputs: Vec<PathBuf>,
    pub alpha: f64,
    pub d_threshold: f64,
    pub log1p: bool,
    pub output_dir: PathBuf,
}

pub fn run(args: &RankArgsResolved) -> Result<()> {
    if args.inputs.is_empty() {
        return Err(Error::input("rank needs at least one report CSV"));
    }
    let mut grouped: BTreeMap<Indicator, BTreeMap<String, Vec<f64>>> = BTreeMap::new();
    for path in &args.inputs {
        for report in read_reports(Path::new(path))? {
            grouped
                .entry(report.indicator)
                .or_default()
                .entry(report.strategy)
                .or_default()
                .push(report.value);
        }
    }
    if grouped.is_empty() {
        return Err(Error::input("the report files contain no rows"));
    }

    let mut csv = String::from("indicator,treatment,mean,rank\n");
    for (indicator, by_strategy) in &grouped {
        let samples: Vec<(String, Vec<f64>)> = by_strategy
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        let cfg = SkConfig {
            alpha: args.alpha,
            d_threshold: args.d_threshold,
            direction: if indicator.higher_is_better() {
                Direction::HigherIsBetter
            } else {
                Direction::LowerIsBetter
            },
            log1p: args.log1p,
        };
        let result = scott_knott_esd(&samples, &cfg)?;
        for entry in &result.entries {
            csv.push_str(&format!(
                "{indicator},{},{},{}\n",
                entry.treatment, entry.mean, entry.rank
            ));
        }
    }
    write_file(&out_path(&args.output_dir, "ranks.csv"), &csv)?;
    print!("{csv}");
    println!(
        "wrote {}",
        out_path(&args.output_dir, "ranks.csv").display()
    );
    Ok(())
}
