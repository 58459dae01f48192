//! Survival data model: records, cohorts, CSV ingestion and the time-sorted
//! representation every estimator works from.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CoxError, Result};

/// One observation: covariates, observed time `min(T, C)` and event flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalRecord {
    pub covariates: Vec<f64>,
    pub time: f64,
    pub status: bool,
}

impl SurvivalRecord {
    pub fn new(covariates: Vec<f64>, time: f64, status: bool) -> Self {
        SurvivalRecord {
            covariates,
            time,
            status,
        }
    }
}

/// A validated, nonempty set of records sharing covariate dimension `p`.
///
/// Storage is columnar; covariates are row-major `n × p`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cohort {
    p: usize,
    times: Vec<f64>,
    status: Vec<bool>,
    covariates: Vec<f64>,
    names: Vec<String>,
}

impl Cohort {
    pub fn new(p: usize, times: Vec<f64>, status: Vec<bool>, covariates: Vec<f64>) -> Result<Self> {
        let n = times.len();
        if n == 0 {
            return Err(CoxError::Empty("cohort has no records".into()));
        }
        if p == 0 {
            return Err(CoxError::Invalid(
                "covariate dimension must be at least 1".into(),
            ));
        }
        if status.len() != n {
            return Err(CoxError::Dimension {
                expected: n,
                got: status.len(),
            });
        }
        if covariates.len() != n * p {
            return Err(CoxError::Dimension {
                expected: n * p,
                got: covariates.len(),
            });
        }
        for (i, &t) in times.iter().enumerate() {
            if !t.is_finite() || t < 0.0 {
                return Err(CoxError::Invalid(format!(
                    "record {i}: time {t} must be finite and >= 0"
                )));
            }
        }
        if let Some(pos) = covariates.iter().position(|x| !x.is_finite()) {
            return Err(CoxError::Invalid(format!(
                "record {}: non-finite covariate",
                pos / p
            )));
        }
        let names = (1..=p).map(|j| format!("z{j}")).collect();
        Ok(Cohort {
            p,
            times,
            status,
            covariates,
            names,
        })
    }

    pub fn from_records(records: &[SurvivalRecord]) -> Result<Self> {
        let first = records
            .first()
            .ok_or_else(|| CoxError::Empty("cohort has no records".into()))?;
        let p = first.covariates.len();
        let mut covariates = Vec::with_capacity(records.len() * p);
        for r in records {
            if r.covariates.len() != p {
                return Err(CoxError::Dimension {
                    expected: p,
                    got: r.covariates.len(),
                });
            }
            covariates.extend_from_slice(&r.covariates);
        }
        Cohort::new(
            p,
            records.iter().map(|r| r.time).collect(),
            records.iter().map(|r| r.status).collect(),
            covariates,
        )
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.p {
            return Err(CoxError::Dimension {
                expected: self.p,
                got: names.len(),
            });
        }
        self.names = names;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn status(&self) -> &[bool] {
        &self.status
    }

    pub fn time(&self, i: usize) -> f64 {
        self.times[i]
    }

    pub fn is_event(&self, i: usize) -> bool {
        self.status[i]
    }

    pub fn z(&self, i: usize) -> &[f64] {
        &self.covariates[i * self.p..(i + 1) * self.p]
    }

    pub fn covariates(&self) -> &[f64] {
        &self.covariates
    }

    pub fn record(&self, i: usize) -> SurvivalRecord {
        SurvivalRecord::new(self.z(i).to_vec(), self.times[i], self.status[i])
    }

    pub fn records(&self) -> impl Iterator<Item = SurvivalRecord> + '_ {
        (0..self.len()).map(|i| self.record(i))
    }

    pub fn event_count(&self) -> usize {
        self.status.iter().filter(|&&s| s).count()
    }
}

/// Index sets of censored (`s0`) and uncensored (`s1`) records.
pub fn censoring_split(cohort: &Cohort) -> (Vec<usize>, Vec<usize>) {
    let mut s0 = Vec::new();
    let mut s1 = Vec::new();
    for (i, &d) in cohort.status.iter().enumerate() {
        if d {
            s1.push(i);
        } else {
            s0.push(i);
        }
    }
    (s0, s1)
}

/// Distinct event times with tie multiplicities and risk-set boundaries.
///
/// `risk_start[k]` is the first sorted position whose time is `>= times[k]`;
/// the events at `times[k]` occupy sorted positions
/// `risk_start[k] .. risk_start[k] + counts[k]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EventGrid {
    pub times: Vec<f64>,
    pub counts: Vec<usize>,
    pub risk_start: Vec<usize>,
}

impl EventGrid {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Number of event times `<= x`.
    pub fn count_le(&self, x: f64) -> usize {
        self.times.partition_point(|&t| t <= x)
    }
}

/// Rows sorted by ascending time, with optional per-row weights and a global
/// normalizer. The full cohort uses unit weights and `norm = 1/N`; a
/// subsample uses weights `1/π*` and `norm = 1/(N r)`.
#[derive(Debug, Clone)]
pub struct SortedRows {
    p: usize,
    times: Vec<f64>,
    status: Vec<bool>,
    z: Vec<f64>,
    weights: Option<Vec<f64>>,
    norm: f64,
    grid: EventGrid,
}

impl SortedRows {
    /// Sort `source` rows (given by `rows`, possibly with repeats) and build
    /// the event grid. Ties in time put events before censorings; remaining
    /// ties keep the order of `rows`.
    pub fn build(
        source: &Cohort,
        rows: &[usize],
        weights: Option<&[f64]>,
        norm: f64,
    ) -> (Self, Vec<usize>) {
        let mut perm: Vec<usize> = (0..rows.len()).collect();
        perm.sort_by(|&a, &b| {
            let (ia, ib) = (rows[a], rows[b]);
            source.times[ia]
                .total_cmp(&source.times[ib])
                .then_with(|| source.status[ib].cmp(&source.status[ia]))
                .then_with(|| a.cmp(&b))
        });
        let p = source.p;
        let mut times = Vec::with_capacity(rows.len());
        let mut status = Vec::with_capacity(rows.len());
        let mut z = Vec::with_capacity(rows.len() * p);
        for &k in &perm {
            let i = rows[k];
            times.push(source.times[i]);
            status.push(source.status[i]);
            z.extend_from_slice(source.z(i));
        }
        let weights = weights.map(|w| perm.iter().map(|&k| w[k]).collect::<Vec<_>>());
        let grid = build_grid(&times, &status);
        (
            SortedRows {
                p,
                times,
                status,
                z,
                weights,
                norm,
                grid,
            },
            perm,
        )
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn status(&self) -> &[bool] {
        &self.status
    }

    pub fn z(&self, pos: usize) -> &[f64] {
        &self.z[pos * self.p..(pos + 1) * self.p]
    }

    pub fn weight(&self, pos: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[pos])
    }

    pub fn is_weighted(&self) -> bool {
        self.weights.is_some()
    }

    pub fn grid(&self) -> &EventGrid {
        &self.grid
    }

    /// Weighted event count at event time `k` (plain count when unweighted).
    pub fn weighted_events(&self, k: usize) -> f64 {
        let start = self.grid.risk_start[k];
        let end = start + self.grid.counts[k];
        match &self.weights {
            None => self.grid.counts[k] as f64,
            Some(w) => w[start..end].iter().sum(),
        }
    }
}

fn build_grid(times: &[f64], status: &[bool]) -> EventGrid {
    let mut grid = EventGrid::default();
    let n = times.len();
    let mut start = 0;
    while start < n {
        let t = times[start];
        let mut end = start;
        let mut d = 0;
        while end < n && times[end] == t {
            if status[end] {
                d += 1;
            }
            end += 1;
        }
        if d > 0 {
            grid.times.push(t);
            grid.counts.push(d);
            grid.risk_start.push(start);
        }
        start = end;
    }
    grid
}

/// The cohort sorted by time with event-time index and stratum index sets.
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct SortedCohort {
    base: Cohort,
    order: Vec<usize>,
    rows: SortedRows,
    censoring_rate: f64,
    s0_index: Vec<usize>,
    s1_index: Vec<usize>,
}

impl SortedCohort {
    pub fn new(base: Cohort) -> Self {
        let n = base.len();
        let all: Vec<usize> = (0..n).collect();
        let (rows, order) = SortedRows::build(&base, &all, None, 1.0 / n as f64);
        let (s0_index, s1_index) = censoring_split(&base);
        let censoring_rate = 1.0 - s1_index.len() as f64 / n as f64;
        SortedCohort {
            base,
            order,
            rows,
            censoring_rate,
            s0_index,
            s1_index,
        }
    }

    pub fn base(&self) -> &Cohort {
        &self.base
    }

    pub fn into_base(self) -> Cohort {
        self.base
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn p(&self) -> usize {
        self.base.p
    }

    /// Permutation such that `order[pos]` is the source index at sorted position `pos`.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn rows(&self) -> &SortedRows {
        &self.rows
    }

    pub fn event_times(&self) -> &[f64] {
        &self.rows.grid.times
    }

    pub fn event_counts(&self) -> &[usize] {
        &self.rows.grid.counts
    }

    pub fn grid(&self) -> &EventGrid {
        &self.rows.grid
    }

    /// Number of records with time `>= times[k]` for each event time.
    pub fn risk_set_sizes(&self) -> Vec<usize> {
        let n = self.len();
        self.rows.grid.risk_start.iter().map(|&s| n - s).collect()
    }

    /// `1 - δ̄`.
    pub fn censoring_rate(&self) -> f64 {
        self.censoring_rate
    }

    /// `δ̄`, the event fraction.
    pub fn event_rate(&self) -> f64 {
        self.s1_index.len() as f64 / self.len() as f64
    }

    pub fn s0_index(&self) -> &[usize] {
        &self.s0_index
    }

    pub fn s1_index(&self) -> &[usize] {
        &self.s1_index
    }

    pub fn event_count(&self) -> usize {
        self.s1_index.len()
    }
}

pub fn sort_cohort(cohort: Cohort) -> SortedCohort {
    SortedCohort::new(cohort)
}

/// Column mapping for CSV ingestion.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub time_col: String,
    pub status_col: String,
    pub covariates: Vec<String>,
    /// Covariates expanded into 0/1 dummies; the lexicographically first
    /// level is the reference and gets no column.
    #[serde(default)]
    pub categorical: BTreeSet<String>,
    /// Numeric covariates whose missing cells are replaced by the column median.
    #[serde(default)]
    pub median_fill: BTreeSet<String>,
}

impl CsvSchema {
    pub fn new(time_col: &str, status_col: &str, covariates: &[&str]) -> Self {
        CsvSchema {
            time_col: time_col.into(),
            status_col: status_col.into(),
            covariates: covariates.iter().map(|s| s.to_string()).collect(),
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.time_col.is_empty() || self.status_col.is_empty() {
            return Err(CoxError::Schema(
                "time and status columns are required".into(),
            ));
        }
        if self.covariates.is_empty() {
            return Err(CoxError::Schema(
                "at least one covariate column is required".into(),
            ));
        }
        for c in self.categorical.iter().chain(&self.median_fill) {
            if !self.covariates.contains(c) {
                return Err(CoxError::Schema(format!("{c} is not a listed covariate")));
            }
        }
        if let Some(c) = self.categorical.intersection(&self.median_fill).next() {
            return Err(CoxError::Schema(format!(
                "{c}: median fill applies to numeric columns only"
            )));
        }
        Ok(())
    }
}

fn is_missing(cell: &str) -> bool {
    let c = cell.trim();
    c.is_empty() || c.eq_ignore_ascii_case("na") || c.eq_ignore_ascii_case("nan")
}

fn parse_f64(cell: &str, row: usize, col: &str) -> Result<f64> {
    let v: f64 = cell.trim().parse().map_err(|_| CoxError::Parse {
        row,
        msg: format!("column {col}: cannot parse {cell:?} as a number"),
    })?;
    if !v.is_finite() {
        return Err(CoxError::Parse {
            row,
            msg: format!("column {col}: non-finite value {cell:?}"),
        });
    }
    Ok(v)
}

/// Median of a nonempty slice (mean of the two middle values for even length).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    })
}

enum Column {
    Numeric(Vec<Option<f64>>),
    Categorical(Vec<String>),
}

pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Cohort> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| CoxError::io(path, e))?;
    read_csv(file, schema)
}

/// Parse comma-separated survival data with a header row.
///
/// Row numbers in errors are 1-based data rows (the header is not counted).
pub fn read_csv<R: Read>(reader: R, schema: &CsvSchema) -> Result<Cohort> {
    schema.validate()?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = match rdr.headers() {
        Ok(h) if !h.is_empty() && !(h.len() == 1 && h[0].is_empty()) => h.clone(),
        Ok(_) => return Err(CoxError::Empty("no header row".into())),
        Err(e) => return Err(e.into()),
    };
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CoxError::Schema(format!("column {name:?} not found in header")))
    };
    let time_idx = find(&schema.time_col)?;
    let status_idx = find(&schema.status_col)?;
    let cov_idx: Vec<usize> = schema
        .covariates
        .iter()
        .map(|c| find(c))
        .collect::<Result<_>>()?;

    let mut times = Vec::new();
    let mut status = Vec::new();
    let mut columns: Vec<Column> = schema
        .covariates
        .iter()
        .map(|c| {
            if schema.categorical.contains(c) {
                Column::Categorical(Vec::new())
            } else {
                Column::Numeric(Vec::new())
            }
        })
        .collect();

    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| CoxError::Parse {
            row,
            msg: e.to_string(),
        })?;
        let cell = |j: usize| rec.get(j).unwrap_or("");
        let t_cell = cell(time_idx);
        if is_missing(t_cell) {
            return Err(CoxError::Parse {
                row,
                msg: "missing time".into(),
            });
        }
        let t = parse_f64(t_cell, row, &schema.time_col)?;
        if t < 0.0 {
            return Err(CoxError::Parse {
                row,
                msg: format!("negative time {t}"),
            });
        }
        let s_cell = cell(status_idx);
        let s = match parse_f64(s_cell, row, &schema.status_col) {
            Ok(0.0) => false,
            Ok(1.0) => true,
            _ => {
                return Err(CoxError::Parse {
                    row,
                    msg: format!("status must be 0 or 1, got {s_cell:?}"),
                })
            }
        };
        times.push(t);
        status.push(s);
        for ((col, &j), name) in columns.iter_mut().zip(&cov_idx).zip(&schema.covariates) {
            let c = cell(j);
            match col {
                Column::Categorical(v) => {
                    if is_missing(c) {
                        return Err(CoxError::Parse {
                            row,
                            msg: format!("missing categorical value in {name}"),
                        });
                    }
                    v.push(c.to_string());
                }
                Column::Numeric(v) => {
                    if is_missing(c) {
                        if !schema.median_fill.contains(name) {
                            return Err(CoxError::Parse {
                                row,
                                msg: format!("missing value in {name} (median fill not enabled)"),
                            });
                        }
                        v.push(None);
                    } else {
                        v.push(Some(parse_f64(c, row, name)?));
                    }
                }
            }
        }
    }
    let n = times.len();
    if n == 0 {
        return Err(CoxError::Empty("no data rows".into()));
    }

    // Expand columns into the final design.
    let mut names = Vec::new();
    let mut design_cols: Vec<Vec<f64>> = Vec::new();
    for (col, name) in columns.into_iter().zip(&schema.covariates) {
        match col {
            Column::Numeric(v) => {
                let present: Vec<f64> = v.iter().flatten().copied().collect();
                let fill = if present.len() < v.len() {
                    median(&present).ok_or_else(|| {
                        CoxError::Invalid(format!("column {name}: every value is missing"))
                    })?
                } else {
                    0.0
                };
                design_cols.push(v.into_iter().map(|x| x.unwrap_or(fill)).collect());
                names.push(name.clone());
            }
            Column::Categorical(v) => {
                let levels: BTreeMap<&str, ()> = v.iter().map(|s| (s.as_str(), ())).collect();
                for level in levels.keys().skip(1) {
                    design_cols.push(v.iter().map(|s| f64::from(s == level)).collect());
                    names.push(format!("{name}={level}"));
                }
            }
        }
    }
    let p = design_cols.len();
    if p == 0 {
        return Err(CoxError::Schema(
            "design has no columns (categorical covariates with a single level)".into(),
        ));
    }
    let mut covariates = Vec::with_capacity(n * p);
    for i in 0..n {
        for col in &design_cols {
            covariates.push(col[i]);
        }
    }
    Cohort::new(p, times, status, covariates)?.with_names(names)
}

/// Write a cohort as CSV with columns `time,status,<covariate names>`.
/// Numbers use the shortest representation that parses back bit-exactly.
pub fn write_csv<W: Write>(cohort: &Cohort, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["time".to_string(), "status".to_string()];
    header.extend(cohort.names().iter().cloned());
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(cohort.p() + 2);
    for i in 0..cohort.len() {
        row.clear();
        row.push(format!("{}", cohort.time(i)));
        row.push(if cohort.is_event(i) { "1" } else { "0" }.to_string());
        row.extend(cohort.z(i).iter().map(|x| format!("{x}")));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| CoxError::io("<csv writer>", e))?;
    Ok(())
}

pub fn save_csv(cohort: &Cohort, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| CoxError::io(path, e))?;
    write_csv(cohort, std::io::BufWriter::new(file))
}

/// Schema matching the layout produced by [`write_csv`].
pub fn default_schema(cohort: &Cohort) -> CsvSchema {
    CsvSchema {
        time_col: "time".into(),
        status_col: "status".into(),
        covariates: cohort.names().to_vec(),
        ..Default::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cohort(times: &[f64], status: &[bool]) -> Cohort {
        let z: Vec<f64> = (0..times.len()).map(|i| i as f64).collect();
        Cohort::new(1, times.to_vec(), status.to_vec(), z).unwrap()
    }

    #[test]
    fn parses_three_rows() {
        let text = "time,status,x\n1,1,0.5\n2,0,1.5\n3,1,-2\n";
        let c = read_csv(text.as_bytes(), &CsvSchema::new("time", "status", &["x"])).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.p(), 1);
        assert_eq!(c.times(), &[1.0, 2.0, 3.0]);
        assert_eq!(c.status(), &[true, false, true]);
        assert_eq!(c.z(2), &[-2.0]);
    }

    #[test]
    fn nonbinary_status_names_row() {
        let text = "time,status,x\n1,1,0.5\n2,2,1.5\n";
        let err = read_csv(text.as_bytes(), &CsvSchema::new("time", "status", &["x"])).unwrap_err();
        match err {
            CoxError::Parse { row, msg } => {
                assert_eq!(row, 2);
                assert!(msg.contains("status"));
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn unparseable_row_reported() {
        let text = "time,status,x\n1,1,0.5\n2,0,abc\n";
        let err = read_csv(text.as_bytes(), &CsvSchema::new("time", "status", &["x"])).unwrap_err();
        assert!(matches!(err, CoxError::Parse { row: 2, .. }));
    }

    #[test]
    fn empty_inputs_rejected() {
        let schema = CsvSchema::new("time", "status", &["x"]);
        assert!(matches!(
            read_csv("".as_bytes(), &schema),
            Err(CoxError::Empty(_))
        ));
        assert!(matches!(
            read_csv("time,status,x\n".as_bytes(), &schema),
            Err(CoxError::Empty(_))
        ));
    }

    #[test]
    fn missing_without_fill_rejected() {
        let text = "time,status,x\n1,1,\n";
        let err = read_csv(text.as_bytes(), &CsvSchema::new("time", "status", &["x"])).unwrap_err();
        assert!(matches!(err, CoxError::Parse { row: 1, .. }));
    }

    #[test]
    fn median_fill_uses_column_median() {
        let text = "time,status,x\n1,1,4\n2,0,NA\n3,1,1\n4,1,10\n5,0,\n";
        let mut schema = CsvSchema::new("time", "status", &["x"]);
        schema.median_fill.insert("x".into());
        let c = read_csv(text.as_bytes(), &schema).unwrap();
        // median of {4, 1, 10} is 4
        assert_eq!(c.z(1), &[4.0]);
        assert_eq!(c.z(4), &[4.0]);
    }

    #[test]
    fn categorical_expands_to_dummies() {
        let text = "time,status,ind,x\n1,1,b,0\n2,0,a,1\n3,1,c,2\n";
        let mut schema = CsvSchema::new("time", "status", &["ind", "x"]);
        schema.categorical.insert("ind".into());
        let c = read_csv(text.as_bytes(), &schema).unwrap();
        assert_eq!(c.p(), 3);
        assert_eq!(c.names(), &["ind=b", "ind=c", "x"]);
        assert_eq!(c.z(0), &[1.0, 0.0, 0.0]);
        assert_eq!(c.z(1), &[0.0, 0.0, 1.0]);
        assert_eq!(c.z(2), &[0.0, 1.0, 2.0]);
    }

    #[test]
    fn schema_requires_covariates() {
        let schema = CsvSchema::new("time", "status", &[]);
        assert!(matches!(
            read_csv("time,status\n1,1\n".as_bytes(), &schema),
            Err(CoxError::Schema(_))
        ));
    }

    #[test]
    fn sort_orders_times() {
        let s = SortedCohort::new(cohort(&[3.0, 1.0, 2.0], &[true, true, true]));
        assert_eq!(s.order(), &[1, 2, 0]);
        assert_eq!(s.event_times().len(), 3);
    }

    #[test]
    fn zero_events_gives_empty_grid() {
        let s = SortedCohort::new(cohort(&[1.0, 2.0, 3.0, 4.0], &[false; 4]));
        assert!(s.event_times().is_empty());
        assert_eq!(s.censoring_rate(), 1.0);
    }

    #[test]
    fn ties_put_events_first_and_share_risk_set() {
        let s = SortedCohort::new(cohort(&[2.0, 2.0, 1.0, 2.0], &[false, true, true, true]));
        assert_eq!(s.order(), &[2, 1, 3, 0]);
        assert_eq!(s.event_times(), &[1.0, 2.0]);
        assert_eq!(s.event_counts(), &[1, 2]);
        // a record censored at t=2 remains at risk for the events at t=2
        assert_eq!(s.risk_set_sizes(), vec![4, 3]);
    }

    #[test]
    fn split_by_status() {
        let c = cohort(&[1.0, 2.0, 3.0], &[true, false, true]);
        let (s0, s1) = censoring_split(&c);
        assert_eq!(s0, vec![1]);
        assert_eq!(s1, vec![0, 2]);
        let all_cens = cohort(&[1.0, 2.0], &[false, false]);
        assert!(censoring_split(&all_cens).1.is_empty());
    }

    #[test]
    fn invalid_records_rejected() {
        assert!(Cohort::new(1, vec![-1.0], vec![true], vec![0.0]).is_err());
        assert!(Cohort::new(1, vec![f64::NAN], vec![true], vec![0.0]).is_err());
        assert!(Cohort::new(1, vec![1.0], vec![true], vec![f64::INFINITY]).is_err());
        assert!(Cohort::new(1, vec![], vec![], vec![]).is_err());
        assert!(Cohort::new(2, vec![1.0], vec![true], vec![0.0]).is_err());
    }
}
