//! Canonical CSV formats.
//!
//! Matrix CSV: header `mutant_id,<test_id_1>,...,<test_id_n>`, then one row
//! per mutant with `0`/`1` cells. Operator CSV: header `mutant_id,operator`.
//! Files are UTF-8 and comma-separated with no quoting; ids must not contain
//! commas. Parse errors report 1-based row and column positions.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::indicators::{Indicator, IndicatorReport};
use crate::matrix::RelationMatrix;

fn parse_err(source_name: &str, row: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        source_name: source_name.to_string(),
        row,
        col,
        msg: msg.into(),
    }
}

fn split_line(line: &str) -> Vec<&str> {
    line.trim_end_matches('\r')
        .split(',')
        .map(str::trim)
        .collect()
}

/// Lines with content, keeping their original 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty())
}

/// Parses a matrix from CSV text. `source_name` is used in error positions.
pub fn parse_matrix(text: &str, source_name: &str) -> Result<RelationMatrix> {
    let mut lines = content_lines(text);
    let (header_row, header) = lines
        .next()
        .ok_or_else(|| parse_err(source_name, 1, 1, "empty file"))?;
    let fields = split_line(header);
    if fields.first() != Some(&"mutant_id") {
        return Err(parse_err(
            source_name,
            header_row,
            1,
            "header must start with `mutant_id`",
        ));
    }
    if fields.len() < 2 {
        return Err(parse_err(source_name, header_row, 1, "no test columns"));
    }
    let test_ids: Vec<String> = fields[1..].iter().map(|s| s.to_string()).collect();

    let mut mutant_ids = Vec::new();
    let mut rows = Vec::new();
    for (row_no, line) in lines {
        let cells = split_line(line);
        if cells.len() != test_ids.len() + 1 {
            return Err(parse_err(
                source_name,
                row_no,
                cells.len(),
                format!(
                    "expected {} fields, found {}",
                    test_ids.len() + 1,
                    cells.len()
                ),
            ));
        }
        if cells[0].is_empty() {
            return Err(parse_err(source_name, row_no, 1, "empty mutant id"));
        }
        mutant_ids.push(cells[0].to_string());
        let mut row = Vec::with_capacity(test_ids.len());
        for (i, cell) in cells[1..].iter().enumerate() {
            match *cell {
                "0" => row.push(false),
                "1" => row.push(true),
                other => {
                    return Err(parse_err(
                        source_name,
                        row_no,
                        i + 2,
                        format!("cell must be 0 or 1, found `{other}`"),
                    ))
                }
            }
        }
        rows.push(row);
    }
    RelationMatrix::from_rows(mutant_ids, test_ids, &rows)
}

pub fn read_matrix(path: &Path) -> Result<RelationMatrix> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::input(format!("cannot read `{}`: {e}", path.display())))?;
    parse_matrix(&text, &path.display().to_string())
}

pub fn matrix_to_csv(matrix: &RelationMatrix) -> String {
    let mut out = String::from("mutant_id");
    for t in matrix.test_ids() {
        out.push(',');
        out.push_str(t);
    }
    out.push('\n');
    for m in 0..matrix.mutant_count() {
        out.push_str(matrix.mutant_id(m));
        for t in 0..matrix.test_count() {
            out.push(',');
            out.push(if matrix.cell(m, t) { '1' } else { '0' });
        }
        out.push('\n');
    }
    out
}

/// Parses `(mutant_id, operator)` pairs; alignment against a matrix happens
/// in [`crate::matrix::OperatorMap::from_pairs`].
pub fn parse_operator_pairs(text: &str, source_name: &str) -> Result<Vec<(String, String)>> {
    let mut lines = content_lines(text);
    let (header_row, header) = lines
        .next()
        .ok_or_else(|| parse_err(source_name, 1, 1, "empty file"))?;
    if split_line(header) != vec!["mutant_id", "operator"] {
        return Err(parse_err(
            source_name,
            header_row,
            1,
            "header must be `mutant_id,operator`",
        ));
    }
    let mut pairs = Vec::new();
    for (row_no, line) in lines {
        let cells = split_line(line);
        if cells.len() != 2 {
            return Err(parse_err(
                source_name,
                row_no,
                cells.len(),
                format!("expected 2 fields, found {}", cells.len()),
            ));
        }
        pairs.push((cells[0].to_string(), cells[1].to_string()));
    }
    Ok(pairs)
}

pub fn read_operator_pairs(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::input(format!("cannot read `{}`: {e}", path.display())))?;
    parse_operator_pairs(&text, &path.display().to_string())
}

pub fn operator_pairs_to_csv<S: AsRef<str>, L: AsRef<str>>(pairs: &[(S, L)]) -> String {
    let mut out = String::from("mutant_id,operator\n");
    for (id, label) in pairs {
        out.push_str(id.as_ref());
        out.push(',');
        out.push_str(label.as_ref());
        out.push('\n');
    }
    out
}

/// Parses indicator report rows (`strategy,rep,indicator,value,seed`).
///
/// The strategy field is a spec text and may itself contain commas
/// (`cos:deny=A|B,n=10`), so rows split from the right: the last four
/// fields never contain commas.
pub fn parse_reports(text: &str, source_name: &str) -> Result<Vec<IndicatorReport>> {
    let mut lines = content_lines(text);
    let (header_row, header) = lines
        .next()
        .ok_or_else(|| parse_err(source_name, 1, 1, "empty file"))?;
    if split_line(header) != vec!["strategy", "rep", "indicator", "value", "seed"] {
        return Err(parse_err(
            source_name,
            header_row,
            1,
            "header must be `strategy,rep,indicator,value,seed`",
        ));
    }
    let mut reports = Vec::new();
    for (row_no, line) in lines {
        let mut tail = line.trim_end_matches('\r').rsplitn(5, ',');
        let seed_text = tail.next().unwrap_or_default().trim();
        let value_text = tail.next().unwrap_or_default().trim();
        let indicator_text = tail.next().unwrap_or_default().trim();
        let rep_text = tail.next().unwrap_or_default().trim();
        let strategy = tail.next().map(str::trim).unwrap_or_default();
        if strategy.is_empty() {
            return Err(parse_err(
                source_name,
                row_no,
                1,
                "expected 5 fields `strategy,rep,indicator,value,seed`",
            ));
        }
        let rep: usize = rep_text
            .parse()
            .map_err(|_| parse_err(source_name, row_no, 2, "rep must be an integer"))?;
        let indicator: Indicator = indicator_text
            .parse()
            .map_err(|e: Error| parse_err(source_name, row_no, 3, e.to_string()))?;
        let value: f64 = value_text
            .parse()
            .map_err(|_| parse_err(source_name, row_no, 4, "value must be a number"))?;
        let seed: u64 = seed_text
            .parse()
            .map_err(|_| parse_err(source_name, row_no, 5, "seed must be an integer"))?;
        reports.push(IndicatorReport {
            strategy: strategy.to_string(),
            rep,
            indicator,
            value,
            seed,
        });
    }
    Ok(reports)
}

pub fn read_reports(path: &Path) -> Result<Vec<IndicatorReport>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::input(format!("cannot read `{}`: {e}", path.display())))?;
    parse_reports(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEMO: &str = "mutant_id,t1,t2,t3,t4\n\
                        m1,1,0,0,0\n\
                        m2,0,0,1,0\n\
                        m3,1,1,1,0\n\
                        m4,1,1,1,1\n\
                        m5,0,0,0,1\n";

    #[test]
    fn parses_demo_matrix() {
        let m = parse_matrix(DEMO, "demo").unwrap();
        assert_eq!(m.mutant_count(), 5);
        assert_eq!(m.test_count(), 4);
        assert!(m.cell(0, 0));
        assert!(!m.cell(0, 1));
        assert!(m.cell(4, 3));
    }

    #[test]
    fn round_trips_through_text() {
        let m = parse_matrix(DEMO, "demo").unwrap();
        assert_eq!(matrix_to_csv(&m), DEMO);
    }

    #[test]
    fn parse_errors_carry_positions() {
        let bad = "mutant_id,t1\nm1,2\n";
        match parse_matrix(bad, "bad") {
            Err(Error::Parse { row, col, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(col, 2);
            }
            other => panic!("expected parse error, got {other:?}"),
        }

        let short = "mutant_id,t1,t2\nm1,1\n";
        match parse_matrix(short, "short") {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 2),
            other => panic!("expected parse error, got {other:?}"),
        }

        let header = "id,t1\nm1,1\n";
        assert!(matches!(
            parse_matrix(header, "h"),
            Err(Error::Parse { row: 1, .. })
        ));
    }

    #[test]
    fn operator_pairs_round_trip() {
        let text = "mutant_id,operator\nm1,AOR\nm2,ROR\n";
        let pairs = parse_operator_pairs(text, "ops").unwrap();
        assert_eq!(pairs.len(), 2);
        assert_eq!(operator_pairs_to_csv(&pairs), text);
    }

    #[test]
    fn tolerates_crlf_and_blank_tail() {
        let m = parse_matrix("mutant_id,t1\r\nm1,1\r\n\n", "crlf").unwrap();
        assert_eq!(m.mutant_count(), 1);
    }

    #[test]
    fn report_rows_allow_commas_in_the_strategy_field() {
        let text = "strategy,rep,indicator,value,seed\n\
                    cos:deny=A|B,n=10,3,OP,0.75,42\n";
        let rows = parse_reports(text, "r").unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].strategy, "cos:deny=A|B,n=10");
        assert_eq!(rows[0].rep, 3);
        assert_eq!(rows[0].indicator, Indicator::Op);
        assert_eq!(rows[0].value, 0.75);
        assert_eq!(rows[0].seed, 42);

        assert!(parse_reports("strategy,rep,indicator,value,seed\nonlyfield\n", "r").is_err());
        assert!(parse_reports("bad,header\n", "r").is_err());
    }
}
