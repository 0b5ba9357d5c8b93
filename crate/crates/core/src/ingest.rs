//! Draws files and dataset files.
//!
//! A draws file is comma-separated text with header `chain,iter,<param>...`
//! and one row per (chain, iteration). Rows of a chain are contiguous and
//! iterations count 1, 2, 3, ... within each chain. Values are written with
//! 17 significant digits, which reproduces every finite `f64` exactly.
//!
//! A dataset file has a header naming its columns; the outcome column holds
//! decimal numbers and the treatment column holds 0 or 1.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::draws::{Draws, DrawsError, RawDraws};
use crate::regress::{Dataset, RegressError};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: u64,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Validation(#[from] DrawsError),
    #[error(transparent)]
    Dataset(#[from] RegressError),
    #[error("line {line}: treatment value `{value}` is not 0 or 1")]
    NonBinaryTreatment { line: u64, value: String },
    #[error("missing column `{0}`")]
    MissingColumn(String),
}

impl IngestError {
    fn parse(line: u64, column: usize, message: impl Into<String>) -> Self {
        IngestError::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}

fn io_error(path: &Path) -> impl FnOnce(io::Error) -> IngestError + '_ {
    move |source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Finite decimal number; `inf`, `nan` and out-of-range literals are rejected.
fn parse_number(text: &str, line: u64, column: usize) -> Result<f64, IngestError> {
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(IngestError::parse(line, column, format!("expected a finite number, found `{text}`"))),
    }
}

/// 17 significant digits.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

struct Records<R: Read> {
    reader: csv::Reader<R>,
}

impl<R: Read> Records<R> {
    fn new(input: R) -> Self {
        let reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(input);
        Records { reader }
    }

    fn next(&mut self) -> Result<Option<(u64, csv::StringRecord)>, IngestError> {
        let mut record = csv::StringRecord::new();
        match self.reader.read_record(&mut record) {
            Ok(false) => Ok(None),
            Ok(true) => {
                let line = record.position().map_or(0, |p| p.line());
                Ok(Some((line, record)))
            }
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                Err(IngestError::parse(line, 0, e.to_string()))
            }
        }
    }
}

pub fn read_draws(path: impl AsRef<Path>) -> Result<Draws, IngestError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(io_error(path))?;
    read_draws_from(io::BufReader::new(file))
}

pub fn read_draws_from<R: Read>(input: R) -> Result<Draws, IngestError> {
    let mut records = Records::new(input);
    let (_, header) = records
        .next()?
        .ok_or_else(|| IngestError::parse(1, 1, "missing header"))?;
    if header.get(0) != Some("chain") || header.get(1) != Some("iter") {
        return Err(IngestError::parse(1, 1, "header must start with `chain,iter`"));
    }
    if header.len() < 3 {
        return Err(IngestError::parse(1, 3, "header names no parameters"));
    }
    let names: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
    let width = header.len();

    // per parameter, per chain
    let mut series: Vec<Vec<Vec<f64>>> = vec![Vec::new(); names.len()];
    let mut labels: Vec<u64> = Vec::new();
    let mut expected_iter = 0usize;

    while let Some((line, row)) = records.next()? {
        if row.len() != width {
            return Err(IngestError::parse(
                line,
                row.len().min(width) + 1,
                format!("expected {width} fields, found {}", row.len()),
            ));
        }
        let chain_text = &row[0];
        let label: u64 = chain_text
            .parse()
            .ok()
            .filter(|&c| c >= 1)
            .ok_or_else(|| IngestError::parse(line, 1, format!("chain label must be a positive integer, found `{chain_text}`")))?;
        let iter_text = &row[1];
        let iter: usize = iter_text
            .parse()
            .map_err(|_| IngestError::parse(line, 2, format!("iteration must be a positive integer, found `{iter_text}`")))?;

        if labels.last() != Some(&label) {
            if labels.contains(&label) {
                return Err(IngestError::parse(line, 1, format!("rows of chain {label} are not contiguous")));
            }
            labels.push(label);
            for s in &mut series {
                s.push(Vec::new());
            }
            expected_iter = 1;
        }
        if iter != expected_iter {
            return Err(IngestError::parse(
                line,
                2,
                format!("chain {label}: expected iteration {expected_iter}, found {iter}"),
            ));
        }
        expected_iter += 1;

        for (p, field) in row.iter().skip(2).enumerate() {
            let v = parse_number(field, line, p + 3)?;
            series[p].last_mut().expect("chain started").push(v);
        }
    }

    let raw = RawDraws {
        parameters: names.into_iter().zip(series).collect(),
    };
    Ok(Draws::validate(raw)?)
}

pub fn write_draws(draws: &Draws, path: impl AsRef<Path>) -> Result<(), IngestError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_error(path))?;
    let mut out = BufWriter::new(file);
    write_draws_to(draws, &mut out).map_err(io_error(path))?;
    out.flush().map_err(io_error(path))
}

pub fn write_draws_to<W: Write>(draws: &Draws, out: &mut W) -> io::Result<()> {
    write!(out, "chain,iter")?;
    for name in draws.parameter_names() {
        write!(out, ",{name}")?;
    }
    writeln!(out)?;
    let views: Vec<_> = draws.views().collect();
    for c in 0..draws.chains() {
        for i in 0..draws.iterations_per_chain() {
            write!(out, "{},{}", c + 1, i + 1)?;
            for v in &views {
                write!(out, ",{}", format_value(v.chain(c)[i]))?;
            }
            writeln!(out)?;
        }
    }
    Ok(())
}

pub fn draws_to_string(draws: &Draws) -> String {
    let mut buf = Vec::new();
    write_draws_to(draws, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

pub fn read_dataset(
    path: impl AsRef<Path>,
    outcome_column: &str,
    treatment_column: &str,
) -> Result<Dataset, IngestError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(io_error(path))?;
    read_dataset_from(io::BufReader::new(file), outcome_column, treatment_column)
}

pub fn read_dataset_from<R: Read>(
    input: R,
    outcome_column: &str,
    treatment_column: &str,
) -> Result<Dataset, IngestError> {
    let mut records = Records::new(input);
    let (_, header) = records
        .next()?
        .ok_or_else(|| IngestError::parse(1, 1, "missing header"))?;
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::MissingColumn(name.to_string()))
    };
    let y_col = find(outcome_column)?;
    let d_col = find(treatment_column)?;

    let mut outcome = Vec::new();
    let mut treatment = Vec::new();
    while let Some((line, row)) = records.next()? {
        if row.len() != header.len() {
            return Err(IngestError::parse(
                line,
                row.len().min(header.len()) + 1,
                format!("expected {} fields, found {}", header.len(), row.len()),
            ));
        }
        outcome.push(parse_number(&row[y_col], line, y_col + 1)?);
        let d = parse_number(&row[d_col], line, d_col + 1)?;
        treatment.push(match d {
            0.0 => false,
            1.0 => true,
            _ => {
                return Err(IngestError::NonBinaryTreatment {
                    line,
                    value: row[d_col].to_string(),
                })
            }
        });
    }
    Ok(Dataset::new(outcome, treatment)?)
}

pub fn write_dataset(
    data: &Dataset,
    path: impl AsRef<Path>,
    outcome_column: &str,
    treatment_column: &str,
) -> Result<(), IngestError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_error(path))?;
    let mut out = BufWriter::new(file);
    write_dataset_to(data, &mut out, outcome_column, treatment_column).map_err(io_error(path))?;
    out.flush().map_err(io_error(path))
}

pub fn write_dataset_to<W: Write>(
    data: &Dataset,
    out: &mut W,
    outcome_column: &str,
    treatment_column: &str,
) -> io::Result<()> {
    writeln!(out, "{outcome_column},{treatment_column}")?;
    for (y, &d) in data.outcome().iter().zip(data.treatment()) {
        writeln!(out, "{},{}", format_value(*y), u8::from(d))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SMALL: &str = "chain,iter,a,b\n1,1,0.5,1\n1,2,1.5,2\n1,3,2.5,3\n2,1,-0.5,4\n2,2,-1.5,5\n2,3,-2.5,6\n";

    #[test]
    fn reads_two_by_three() {
        let d = read_draws_from(SMALL.as_bytes()).unwrap();
        assert_eq!(d.chains(), 2);
        assert_eq!(d.iterations_per_chain(), 3);
        assert_eq!(d.parameter_names(), &["a", "b"]);
        assert_eq!(d.view("a").unwrap().chain(1), &[-0.5, -1.5, -2.5]);
    }

    #[test]
    fn iteration_gap_is_named() {
        let text = "chain,iter,a\n1,1,0.5\n1,3,1.5\n";
        match read_draws_from(text.as_bytes()).unwrap_err() {
            IngestError::Parse { line, column, message } => {
                assert_eq!((line, column), (3, 2));
                assert!(message.contains("expected iteration 2"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn structural_errors() {
        let cases = [
            ("", "missing header"),
            ("a,b,c\n1,1,1\n", "chain,iter"),
            ("chain,iter\n1,1\n", "no parameters"),
            ("chain,iter,a\n0,1,1\n", "positive integer"),
            ("chain,iter,a\n1,1,1,7\n", "expected 3 fields"),
            ("chain,iter,a\n1,1,1\n1,2,1\n2,1,1\n2,2,1\n1,3,1\n", "not contiguous"),
            ("chain,iter,a\n1,1,inf\n1,2,1\n", "finite number"),
            ("chain,iter,a\n1,1,NaN\n1,2,1\n", "finite number"),
            ("chain,iter,a\n1,1,1e999\n1,2,1\n", "finite number"),
        ];
        for (text, needle) in cases {
            let err = read_draws_from(text.as_bytes()).unwrap_err();
            assert!(err.to_string().contains(needle), "{text:?}: {err}");
        }
        let ragged = "chain,iter,a\n1,1,1\n1,2,1\n2,1,1\n";
        assert!(matches!(
            read_draws_from(ragged.as_bytes()).unwrap_err(),
            IngestError::Validation(DrawsError::RaggedChains { .. })
        ));
        let dup = "chain,iter,a,a\n1,1,1,1\n1,2,1,1\n";
        assert!(matches!(
            read_draws_from(dup.as_bytes()).unwrap_err(),
            IngestError::Validation(DrawsError::DuplicateParameter(_))
        ));
    }

    #[test]
    fn header_order_follows_registration() {
        let d = Draws::validate(
            RawDraws::new()
                .with_parameter("beta0", vec![vec![1.0, 2.0]])
                .with_parameter("beta1", vec![vec![1.0, 2.0]])
                .with_parameter("sigma", vec![vec![1.0, 2.0]]),
        )
        .unwrap();
        let text = draws_to_string(&d);
        assert_eq!(text.lines().next().unwrap(), "chain,iter,beta0,beta1,sigma");
        assert_eq!(text.lines().nth(1).unwrap(), "1,1,1.0000000000000000e0,1.0000000000000000e0,1.0000000000000000e0");
    }

    #[test]
    fn dataset_reading() {
        let d = read_dataset_from("y,d\n10.5,0\n11,1\n9,0\n".as_bytes(), "y", "d").unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.treatment(), &[false, true, false]);
        // extra columns and different order
        let d = read_dataset_from("id,arm,score\n1,1,3\n2,0,4\n3,1,5\n".as_bytes(), "score", "arm").unwrap();
        assert_eq!(d.outcome(), &[3.0, 4.0, 5.0]);

        let err = read_dataset_from("y,d\n1,0\n2,2\n3,1\n".as_bytes(), "y", "d").unwrap_err();
        assert!(matches!(err, IngestError::NonBinaryTreatment { line: 3, .. }));
        let err = read_dataset_from("y,d\n1,0\nNA,1\n3,1\n".as_bytes(), "y", "d").unwrap_err();
        assert!(matches!(err, IngestError::Parse { line: 3, column: 1, .. }), "{err}");
        let err = read_dataset_from("y,d\n1,0\n".as_bytes(), "y", "treat").unwrap_err();
        assert!(matches!(err, IngestError::MissingColumn(c) if c == "treat"));
        let err = read_dataset_from("y,d\n1,0\n2,1\n".as_bytes(), "y", "d").unwrap_err();
        assert!(matches!(err, IngestError::Dataset(RegressError::TooFewUnits(2))));
    }

    #[test]
    fn dataset_round_trip() {
        let data = crate::regress::simulate_experiment(25, 50.0, 1.0, 10.0, 4).unwrap();
        let mut buf = Vec::new();
        write_dataset_to(&data, &mut buf, "tax", "bombing").unwrap();
        assert_eq!(read_dataset_from(buf.as_slice(), "tax", "bombing").unwrap(), data);
    }

    fn finite() -> impl Strategy<Value = f64> {
        any::<f64>().prop_filter("finite", |v| v.is_finite())
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(
            chains in 1usize..4,
            values in prop::collection::vec(finite(), 4..40),
        ) {
            let iters = values.len() / chains;
            prop_assume!(iters >= 2);
            let series: Vec<Vec<f64>> = values.chunks_exact(iters).take(chains).map(<[f64]>::to_vec).collect();
            let d = Draws::validate(RawDraws::new().with_parameter("p", series)).unwrap();
            let back = read_draws_from(draws_to_string(&d).as_bytes()).unwrap();
            let a = d.view("p").unwrap().pooled();
            let b = back.view("p").unwrap().pooled();
            prop_assert!(a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
            prop_assert_eq!(back.chains(), d.chains());
        }

        // Replacing any single value field with non-numeric text is always a
        // parse error naming that field, never a silent coercion.
        #[test]
        fn corrupted_field_is_rejected(
            row in 0usize..6,
            col in 0usize..4,
            junk in "[a-zA-Z_?#@!]{1,6}|",
        ) {
            prop_assume!(!["inf", "nan", "infinity"].contains(&junk.to_ascii_lowercase().as_str()));
            let mut lines: Vec<Vec<String>> = SMALL
                .lines()
                .map(|l| l.split(',').map(str::to_string).collect())
                .collect();
            lines[row + 1][col] = junk.clone();
            let text: String = lines.iter().map(|l| l.join(",") + "\n").collect();
            match read_draws_from(text.as_bytes()) {
                Err(IngestError::Parse { line, column, .. }) => {
                    prop_assert_eq!(line, row as u64 + 2);
                    prop_assert_eq!(column, col + 1);
                }
                other => prop_assert!(false, "expected parse error, got {:?}", other),
            }
        }
    }
}
