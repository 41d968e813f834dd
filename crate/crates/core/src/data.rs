//! Domain types for competing-risks survival data: event labels, subject
//! records, validated datasets, and the CSV interchange format.
//!
//! A dataset holds one row per subject: an opaque id, the observed time
//! (event or censoring, whichever came first), an integer event code with
//! `0` reserved for censoring, and a fixed-width covariate vector.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while ingesting or validating survival data.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("dataset must contain at least 2 records")]
    EmptyDataset,
    #[error("record `{id}` has negative or non-finite time {time}")]
    NegativeTime { id: String, time: f64 },
    #[error("record `{id}` is missing covariate `{column}`")]
    MissingCovariate { id: String, column: String },
    #[error("record `{id}` has {found} covariates, expected {expected}")]
    InconsistentDimension {
        id: String,
        expected: usize,
        found: usize,
    },
    #[error("no records with event type {0}")]
    NoEventsOfType(u32),
    #[error("quantile {0} is outside (0, 1]")]
    InvalidQuantile(f64),
    #[error("csv parse failure: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}: field `{field}` is not numeric: `{value}`")]
    NonNumericField {
        row: usize,
        field: String,
        value: String,
    },
    #[error("csv header must start with id,time,event")]
    MalformedHeader,
    #[error("io failure: {0}")]
    Io(#[from] std::io::Error),
}

/// Event code for one subject: `0` means right-censored, codes `1..=K`
/// identify the competing event types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EventLabel(u32);

impl EventLabel {
    pub const CENSORED: EventLabel = EventLabel(0);

    pub fn new(code: u32) -> Self {
        EventLabel(code)
    }

    pub fn code(self) -> u32 {
        self.0
    }

    pub fn is_censored(self) -> bool {
        self.0 == 0
    }

    /// Zero-based index of an observed event type (`code - 1`).
    pub fn index(self) -> Option<usize> {
        (self.0 > 0).then(|| (self.0 - 1) as usize)
    }
}

impl std::fmt::Display for EventLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One subject: covariates, observed time `min(event time, censoring time)`,
/// and the observed event label (0 when censoring came first).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalRecord {
    pub id: String,
    pub covariates: Vec<f64>,
    pub time: f64,
    pub event: EventLabel,
}

/// A parsed but not yet validated row. Missing covariates are represented
/// as NaN so that validation can report them uniformly regardless of the
/// input source.
#[derive(Debug, Clone)]
pub struct RawRecord {
    pub id: String,
    pub time: f64,
    pub event: u32,
    pub covariates: Vec<f64>,
}

/// A validated cohort. Immutable after construction; all accessors are
/// cheap and safe to share across threads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    records: Vec<SurvivalRecord>,
    covariate_names: Vec<String>,
    n_event_types: usize,
}

/// Validate parsed rows into a [`Dataset`].
///
/// Checks, in order per record: finite nonnegative time, no missing (NaN)
/// covariates, consistent covariate dimension. The number of event types K
/// is the largest event code seen; every code in `1..=K` must occur at
/// least once. Input order is preserved.
pub fn validate_dataset(
    rows: Vec<RawRecord>,
    covariate_names: Vec<String>,
) -> Result<Dataset, DataError> {
    if rows.len() < 2 {
        return Err(DataError::EmptyDataset);
    }
    let dim = covariate_names.len();
    let mut records = Vec::with_capacity(rows.len());
    let mut max_code = 0u32;
    for row in rows {
        if !row.time.is_finite() || row.time < 0.0 {
            return Err(DataError::NegativeTime {
                id: row.id,
                time: row.time,
            });
        }
        if row.covariates.len() != dim {
            return Err(DataError::InconsistentDimension {
                id: row.id,
                expected: dim,
                found: row.covariates.len(),
            });
        }
        if let Some(col) = row.covariates.iter().position(|v| !v.is_finite()) {
            return Err(DataError::MissingCovariate {
                id: row.id,
                column: covariate_names[col].clone(),
            });
        }
        max_code = max_code.max(row.event);
        records.push(SurvivalRecord {
            id: row.id,
            covariates: row.covariates,
            time: row.time,
            event: EventLabel::new(row.event),
        });
    }
    if max_code == 0 {
        return Err(DataError::NoEventsOfType(1));
    }
    for code in 1..=max_code {
        if !records.iter().any(|r| r.event.code() == code) {
            return Err(DataError::NoEventsOfType(code));
        }
    }
    Ok(Dataset {
        records,
        covariate_names,
        n_event_types: max_code as usize,
    })
}

impl Dataset {
    /// Build a dataset from pre-validated parts. Used by the synthetic
    /// generators and resampling, which construct records satisfying the
    /// invariants directly.
    pub(crate) fn from_parts_unchecked(
        records: Vec<SurvivalRecord>,
        covariate_names: Vec<String>,
        n_event_types: usize,
    ) -> Dataset {
        Dataset {
            records,
            covariate_names,
            n_event_types,
        }
    }

    pub fn records(&self) -> &[SurvivalRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Number of competing event types K (event codes run `1..=K`).
    pub fn n_event_types(&self) -> usize {
        self.n_event_types
    }

    pub fn n_covariates(&self) -> usize {
        self.covariate_names.len()
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    pub fn has_censoring(&self) -> bool {
        self.records.iter().any(|r| r.event.is_censored())
    }

    /// Observed times in record order.
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.time)
    }

    /// New dataset keeping only the covariate columns in `keep` (indices
    /// into the current columns, order preserved as given).
    pub fn project_covariates(&self, keep: &[usize]) -> Dataset {
        let names = keep
            .iter()
            .map(|&c| self.covariate_names[c].clone())
            .collect();
        let records = self
            .records
            .iter()
            .map(|r| SurvivalRecord {
                id: r.id.clone(),
                covariates: keep.iter().map(|&c| r.covariates[c]).collect(),
                time: r.time,
                event: r.event,
            })
            .collect();
        Dataset {
            records,
            covariate_names: names,
            n_event_types: self.n_event_types,
        }
    }

    /// Recode every observed event to type 1, collapsing the competing
    /// structure to a single event type. Censoring codes are untouched.
    pub fn lump_events(&self) -> Dataset {
        let records = self
            .records
            .iter()
            .map(|r| SurvivalRecord {
                id: r.id.clone(),
                covariates: r.covariates.clone(),
                time: r.time,
                event: if r.event.is_censored() {
                    EventLabel::CENSORED
                } else {
                    EventLabel::new(1)
                },
            })
            .collect();
        Dataset {
            records,
            covariate_names: self.covariate_names.clone(),
            n_event_types: 1,
        }
    }

    /// Read and validate a dataset from CSV. Expected header:
    /// `id,time,event,<cov1>,...,<covd>`, event column holding integer
    /// codes with 0 = censored, UTF-8, `.` decimal point.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Dataset, DataError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() < 3
            || headers.get(0) != Some("id")
            || headers.get(1) != Some("time")
            || headers.get(2) != Some("event")
        {
            return Err(DataError::MalformedHeader);
        }
        let covariate_names: Vec<String> =
            headers.iter().skip(3).map(|s| s.to_string()).collect();
        let mut rows = Vec::new();
        for (line, result) in rdr.records().enumerate() {
            let record = result?;
            let row_no = line + 2; // 1-based, after the header
            let id = record.get(0).unwrap_or_default().to_string();
            let time = parse_f64(record.get(1), row_no, "time")?;
            let event = parse_u32(record.get(2), row_no, "event")?;
            let covariates = record
                .iter()
                .skip(3)
                .map(|field| {
                    // empty cell = missing -> NaN; validation rejects it
                    let trimmed = field.trim();
                    if trimmed.is_empty() {
                        Ok(f64::NAN)
                    } else {
                        trimmed.parse::<f64>().map_err(|_| DataError::NonNumericField {
                            row: row_no,
                            field: "covariate".to_string(),
                            value: field.to_string(),
                        })
                    }
                })
                .collect::<Result<Vec<f64>, DataError>>()?;
            rows.push(RawRecord {
                id,
                time,
                event,
                covariates,
            });
        }
        validate_dataset(rows, covariate_names)
    }

    pub fn from_csv_path<P: AsRef<Path>>(path: P) -> Result<Dataset, DataError> {
        let file = std::fs::File::open(path)?;
        Dataset::from_csv_reader(std::io::BufReader::new(file))
    }

    /// Write the dataset in the CSV interchange format. Floats use Rust's
    /// shortest round-trip formatting, so read-back reproduces the values
    /// exactly.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), DataError> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["id".to_string(), "time".to_string(), "event".to_string()];
        header.extend(self.covariate_names.iter().cloned());
        wtr.write_record(&header)?;
        for r in &self.records {
            let mut row = vec![r.id.clone(), r.time.to_string(), r.event.code().to_string()];
            row.extend(r.covariates.iter().map(|v| v.to_string()));
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String, DataError> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn to_csv_path<P: AsRef<Path>>(&self, path: P) -> Result<(), DataError> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

fn parse_f64(field: Option<&str>, row: usize, name: &str) -> Result<f64, DataError> {
    let raw = field.unwrap_or_default().trim();
    raw.parse::<f64>().map_err(|_| DataError::NonNumericField {
        row,
        field: name.to_string(),
        value: raw.to_string(),
    })
}

fn parse_u32(field: Option<&str>, row: usize, name: &str) -> Result<u32, DataError> {
    let raw = field.unwrap_or_default().trim();
    raw.parse::<u32>().map_err(|_| DataError::NonNumericField {
        row,
        field: name.to_string(),
        value: raw.to_string(),
    })
}

/// Empirical quantile of the observed times, used as the evaluation horizon.
///
/// Convention (fixed): linear interpolation between order statistics, the
/// "type 7" rule. With sorted times `x[0..n]` and `h = (n-1) * q`, the
/// result is `x[floor(h)] + frac(h) * (x[floor(h)+1] - x[floor(h)])`.
pub fn evaluation_horizon(ds: &Dataset, quantile: f64) -> Result<f64, DataError> {
    if ds.is_empty() {
        return Err(DataError::EmptyDataset);
    }
    if !(quantile > 0.0 && quantile <= 1.0) {
        return Err(DataError::InvalidQuantile(quantile));
    }
    let mut times: Vec<f64> = ds.times().collect();
    times.sort_by(f64::total_cmp);
    Ok(crate::numeric::quantile_type7(&times, quantile))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn raw(id: &str, time: f64, event: u32, covs: &[f64]) -> RawRecord {
        RawRecord {
            id: id.to_string(),
            time,
            event,
            covariates: covs.to_vec(),
        }
    }

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("x{}", i + 1)).collect()
    }

    #[test]
    fn valid_rows_two_types() {
        let ds = validate_dataset(
            vec![
                raw("a", 1.0, 1, &[0.5, 1.0]),
                raw("b", 2.0, 2, &[0.1, -1.0]),
                raw("c", 3.0, 0, &[0.0, 0.0]),
            ],
            names(2),
        )
        .unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.n_event_types(), 2);
        assert_eq!(ds.records()[0].id, "a");
        assert!(ds.has_censoring());
    }

    #[test]
    fn negative_time_rejected() {
        let err = validate_dataset(
            vec![raw("a", -1.0, 1, &[0.0]), raw("b", 2.0, 1, &[0.0])],
            names(1),
        )
        .unwrap_err();
        assert!(matches!(err, DataError::NegativeTime { .. }));
    }

    #[test]
    fn inconsistent_dimension_rejected() {
        let err = validate_dataset(
            vec![raw("a", 1.0, 1, &[0.0, 1.0]), raw("b", 2.0, 1, &[0.0, 1.0, 2.0])],
            names(2),
        )
        .unwrap_err();
        assert!(matches!(err, DataError::InconsistentDimension { .. }));
    }

    #[test]
    fn missing_covariate_rejected() {
        let err = validate_dataset(
            vec![raw("a", 1.0, 1, &[f64::NAN]), raw("b", 2.0, 1, &[0.0])],
            names(1),
        )
        .unwrap_err();
        assert!(matches!(err, DataError::MissingCovariate { .. }));
    }

    #[test]
    fn gap_in_event_codes_rejected() {
        let err = validate_dataset(
            vec![raw("a", 1.0, 1, &[0.0]), raw("b", 2.0, 3, &[0.0])],
            names(1),
        )
        .unwrap_err();
        assert!(matches!(err, DataError::NoEventsOfType(2)));
    }

    #[test]
    fn all_censored_rejected() {
        let err = validate_dataset(
            vec![raw("a", 1.0, 0, &[0.0]), raw("b", 2.0, 0, &[0.0])],
            names(1),
        )
        .unwrap_err();
        assert!(matches!(err, DataError::NoEventsOfType(1)));
    }

    #[test]
    fn empty_rejected() {
        assert!(matches!(
            validate_dataset(vec![], names(1)),
            Err(DataError::EmptyDataset)
        ));
    }

    fn four_point_ds() -> Dataset {
        validate_dataset(
            vec![
                raw("a", 1.0, 1, &[0.0]),
                raw("b", 2.0, 1, &[0.0]),
                raw("c", 3.0, 1, &[0.0]),
                raw("d", 4.0, 1, &[0.0]),
            ],
            names(1),
        )
        .unwrap()
    }

    #[test]
    fn horizon_maximum() {
        assert_eq!(evaluation_horizon(&four_point_ds(), 1.0).unwrap(), 4.0);
    }

    #[test]
    fn horizon_interpolates() {
        // h = 3 * 0.75 = 2.25 -> 3 + 0.25 * (4 - 3)
        assert!((evaluation_horizon(&four_point_ds(), 0.75).unwrap() - 3.25).abs() < 1e-12);
    }

    #[test]
    fn horizon_constant_sample() {
        let ds = validate_dataset(
            vec![
                raw("a", 5.0, 1, &[0.0]),
                raw("b", 5.0, 1, &[0.0]),
                raw("c", 5.0, 1, &[0.0]),
            ],
            names(1),
        )
        .unwrap();
        for q in [0.1, 0.5, 0.75, 1.0] {
            assert_eq!(evaluation_horizon(&ds, q).unwrap(), 5.0);
        }
    }

    #[test]
    fn horizon_rejects_bad_quantile() {
        let ds = four_point_ds();
        assert!(matches!(
            evaluation_horizon(&ds, 0.0),
            Err(DataError::InvalidQuantile(_))
        ));
        assert!(matches!(
            evaluation_horizon(&ds, 1.5),
            Err(DataError::InvalidQuantile(_))
        ));
    }

    #[test]
    fn csv_round_trip_hand_case() {
        let ds = validate_dataset(
            vec![
                raw("a", 1.5, 1, &[0.25, -3.0]),
                raw("b", 2.0, 0, &[1e-12, 7.5]),
                raw("c", 0.0, 2, &[-0.1, 2.0]),
            ],
            vec!["age".into(), "bp".into()],
        )
        .unwrap();
        let text = ds.to_csv_string().unwrap();
        let back = Dataset::from_csv_reader(text.as_bytes()).unwrap();
        assert_eq!(ds, back);
    }

    #[test]
    fn project_and_lump() {
        let ds = validate_dataset(
            vec![
                raw("a", 1.0, 1, &[1.0, 2.0, 3.0]),
                raw("b", 2.0, 2, &[4.0, 5.0, 6.0]),
            ],
            names(3),
        )
        .unwrap();
        let proj = ds.project_covariates(&[2, 0]);
        assert_eq!(proj.covariate_names(), &["x3".to_string(), "x1".to_string()]);
        assert_eq!(proj.records()[1].covariates, vec![6.0, 4.0]);
        let lumped = ds.lump_events();
        assert_eq!(lumped.n_event_types(), 1);
        assert!(lumped.records().iter().all(|r| r.event.code() == 1));
    }

    proptest! {
        // validate -> serialize -> validate is a fixed point
        #[test]
        fn csv_round_trip_is_stable(
            rows in proptest::collection::vec(
                (0.0f64..1e6, 0u32..3, proptest::collection::vec(-1e6f64..1e6, 2), 0u32..u32::MAX),
                2..40,
            )
        ) {
            let raws: Vec<RawRecord> = rows
                .iter()
                .enumerate()
                .map(|(i, (time, event, covs, salt))| RawRecord {
                    id: format!("s{}-{}", i, salt),
                    time: *time,
                    event: *event,
                    covariates: covs.clone(),
                })
                .collect();
            // force every event code in 1..=2 to appear so validation passes
            let mut raws = raws;
            raws[0].event = 1;
            raws[1].event = 2;
            let ds = validate_dataset(raws, names(2)).unwrap();
            let once = Dataset::from_csv_reader(ds.to_csv_string().unwrap().as_bytes()).unwrap();
            let twice = Dataset::from_csv_reader(once.to_csv_string().unwrap().as_bytes()).unwrap();
            prop_assert_eq!(&ds, &once);
            prop_assert_eq!(&once, &twice);
        }
    }
}
