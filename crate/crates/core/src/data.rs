//! Observations, datasets, treatment arms and extended-real intervals.
//!
//! A [`Dataset`] is only ever built from records that pass
//! [`validate_dataset`], so every downstream module can rely on finite
//! covariates and outcomes of a common dimension.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Treatment assignment, coded as `+1` (treated) or `-1` (control).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TreatmentArm {
    Control,
    Treated,
}

impl TreatmentArm {
    pub const BOTH: [TreatmentArm; 2] = [TreatmentArm::Treated, TreatmentArm::Control];

    /// Numeric code, `+1.0` or `-1.0`.
    pub fn value(self) -> f64 {
        match self {
            TreatmentArm::Treated => 1.0,
            TreatmentArm::Control => -1.0,
        }
    }

    pub fn code(self) -> i64 {
        match self {
            TreatmentArm::Treated => 1,
            TreatmentArm::Control => -1,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            TreatmentArm::Treated => TreatmentArm::Control,
            TreatmentArm::Control => TreatmentArm::Treated,
        }
    }
}

impl TryFrom<i64> for TreatmentArm {
    type Error = i64;

    fn try_from(code: i64) -> std::result::Result<Self, i64> {
        match code {
            1 => Ok(TreatmentArm::Treated),
            -1 => Ok(TreatmentArm::Control),
            other => Err(other),
        }
    }
}

impl FromStr for TreatmentArm {
    type Err = String;

    /// Only the literal tokens `"1"` and `"-1"` are accepted.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "1" => Ok(TreatmentArm::Treated),
            "-1" => Ok(TreatmentArm::Control),
            other => Err(format!("invalid arm code {other:?} (expected \"-1\" or \"1\")")),
        }
    }
}

impl fmt::Display for TreatmentArm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub x: Vec<f64>,
    pub t: TreatmentArm,
    pub y: f64,
}

impl Observation {
    pub fn new(x: Vec<f64>, t: TreatmentArm, y: f64) -> Self {
        Self { x, t, y }
    }
}

/// An unchecked record, as it arrives from an external source.
#[derive(Debug, Clone, PartialEq)]
pub struct RawObservation {
    pub x: Vec<f64>,
    pub t: i64,
    pub y: f64,
}

impl From<Observation> for RawObservation {
    fn from(o: Observation) -> Self {
        Self {
            x: o.x,
            t: o.t.code(),
            y: o.y,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DimensionMismatch { row: usize, expected: usize, actual: usize },
    NonFiniteCovariate { row: usize, column: usize },
    NonFiniteOutcome { row: usize },
    InvalidArmCode { row: usize, code: i64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DimensionMismatch { row, expected, actual } => write!(
                f,
                "row {row}: dimension mismatch (expected {expected} covariates, got {actual})"
            ),
            Violation::NonFiniteCovariate { row, column } => {
                write!(f, "row {row}: non-finite covariate x{}", column + 1)
            }
            Violation::NonFiniteOutcome { row } => write!(f, "row {row}: non-finite outcome"),
            Violation::InvalidArmCode { row, code } => {
                write!(f, "row {row}: invalid arm code {code}")
            }
        }
    }
}

/// Checks every record against the dataset invariants and returns all
/// violations found, in row order.
pub fn validate_dataset(d: usize, records: &[RawObservation]) -> std::result::Result<(), Vec<Violation>> {
    let mut violations = Vec::new();
    for (row, rec) in records.iter().enumerate() {
        if rec.x.len() != d {
            violations.push(Violation::DimensionMismatch {
                row,
                expected: d,
                actual: rec.x.len(),
            });
        }
        for (column, v) in rec.x.iter().enumerate() {
            if !v.is_finite() {
                violations.push(Violation::NonFiniteCovariate { row, column });
            }
        }
        if !rec.y.is_finite() {
            violations.push(Violation::NonFiniteOutcome { row });
        }
        if TreatmentArm::try_from(rec.t).is_err() {
            violations.push(Violation::InvalidArmCode { row, code: rec.t });
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// An ordered, validated collection of observations stored column-wise.
///
/// Order matters: split conformal trains on the first `m` rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    d: usize,
    x: Vec<f64>,
    t: Vec<TreatmentArm>,
    y: Vec<f64>,
}

impl Dataset {
    pub fn empty(d: usize) -> Self {
        Self {
            d,
            x: Vec::new(),
            t: Vec::new(),
            y: Vec::new(),
        }
    }

    pub fn from_raw(d: usize, records: &[RawObservation]) -> Result<Self> {
        validate_dataset(d, records).map_err(Error::InvalidDataset)?;
        let mut ds = Self::empty(d);
        for r in records {
            ds.x.extend_from_slice(&r.x);
            ds.t.push(TreatmentArm::try_from(r.t).expect("validated"));
            ds.y.push(r.y);
        }
        Ok(ds)
    }

    pub fn from_observations(d: usize, obs: Vec<Observation>) -> Result<Self> {
        let raw: Vec<RawObservation> = obs.into_iter().map(RawObservation::from).collect();
        Self::from_raw(d, &raw)
    }

    /// Builds a dataset from a row-major covariate matrix. Used by the
    /// simulation engine, where inputs are finite by construction.
    pub fn from_columns(d: usize, x: Vec<f64>, t: Vec<TreatmentArm>, y: Vec<f64>) -> Result<Self> {
        let n = y.len();
        if t.len() != n || x.len() != n * d {
            return Err(Error::DimensionMismatch {
                expected: n * d,
                actual: x.len(),
            });
        }
        let ds = Self { d, x, t, y };
        let mut violations = Vec::new();
        for i in 0..n {
            for (column, v) in ds.row(i).iter().enumerate() {
                if !v.is_finite() {
                    violations.push(Violation::NonFiniteCovariate { row: i, column });
                }
            }
            if !ds.y[i].is_finite() {
                violations.push(Violation::NonFiniteOutcome { row: i });
            }
        }
        if violations.is_empty() {
            Ok(ds)
        } else {
            Err(Error::InvalidDataset(violations))
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    pub fn arm(&self, i: usize) -> TreatmentArm {
        self.t[i]
    }

    pub fn outcome(&self, i: usize) -> f64 {
        self.y[i]
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.y
    }

    pub fn arms(&self) -> &[TreatmentArm] {
        &self.t
    }

    /// Row-major covariate matrix.
    pub fn covariates(&self) -> &[f64] {
        &self.x
    }

    pub fn arm_count(&self, arm: TreatmentArm) -> usize {
        self.t.iter().filter(|&&t| t == arm).count()
    }

    pub fn observation(&self, i: usize) -> Observation {
        Observation::new(self.row(i).to_vec(), self.t[i], self.y[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], TreatmentArm, f64)> + '_ {
        (0..self.len()).map(move |i| (self.row(i), self.t[i], self.y[i]))
    }

    /// The first `m` observations.
    pub fn head(&self, m: usize) -> Dataset {
        let m = m.min(self.len());
        Dataset {
            d: self.d,
            x: self.x[..m * self.d].to_vec(),
            t: self.t[..m].to_vec(),
            y: self.y[..m].to_vec(),
        }
    }

    /// All observations after the first `m`.
    pub fn tail(&self, m: usize) -> Dataset {
        let m = m.min(self.len());
        Dataset {
            d: self.d,
            x: self.x[m * self.d..].to_vec(),
            t: self.t[m..].to_vec(),
            y: self.y[m..].to_vec(),
        }
    }

    /// Copy of the dataset with `(x, y, t)` appended as the last row.
    pub fn augmented(&self, x: &[f64], y: f64, t: TreatmentArm) -> Dataset {
        assert_eq!(x.len(), self.d, "probe dimension");
        let mut out = self.clone();
        out.x.extend_from_slice(x);
        out.t.push(t);
        out.y.push(y);
        out
    }

    /// Rows reordered so that row `i` of the result is row `order[i]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Dataset {
        assert_eq!(order.len(), self.len());
        let mut out = Dataset::empty(self.d);
        for &i in order {
            out.x.extend_from_slice(self.row(i));
            out.t.push(self.t[i]);
            out.y.push(self.y[i]);
        }
        out
    }

    /// Same covariates and arms with outcomes replaced by `f(i, y_i)`.
    pub fn map_outcomes(&self, mut f: impl FnMut(usize, f64) -> f64) -> Dataset {
        let y = self.y.iter().enumerate().map(|(i, &y)| f(i, y)).collect();
        Dataset {
            d: self.d,
            x: self.x.clone(),
            t: self.t.clone(),
            y,
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header: Vec<String> = (1..=self.d).map(|j| format!("x{j}")).collect();
        header.push("t".into());
        header.push("y".into());
        wtr.write_record(&header)?;
        for (x, t, y) in self.iter() {
            let mut rec: Vec<String> = x.iter().map(|v| v.to_string()).collect();
            rec.push(t.to_string());
            rec.push(y.to_string());
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Parses the `x1,...,xd,t,y` interchange format. `origin` names the
    /// source in error messages.
    pub fn read_csv<R: Read>(r: R, origin: &Path) -> Result<Dataset> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let header = rdr.headers()?.clone();
        let d = parse_header(&header, origin, true)?;
        let mut records = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec?;
            if rec.len() != d + 2 {
                return Err(parse_error(origin, line, format!("expected {} fields, got {}", d + 2, rec.len())));
            }
            let x = (0..d)
                .map(|j| parse_f64(&rec[j], origin, line))
                .collect::<Result<Vec<_>>>()?;
            let t: TreatmentArm = rec[d].parse().map_err(|m| parse_error(origin, line, m))?;
            let y = parse_f64(&rec[d + 1], origin, line)?;
            records.push(RawObservation { x, t: t.code(), y });
        }
        Dataset::from_raw(d, &records)
    }

    pub fn read_csv_path(path: &Path) -> Result<Dataset> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(f), path)
    }
}

/// Reads a probe file with header `x1,...,xd` and returns `(d, rows)`.
pub fn read_probes<R: Read>(r: R, origin: &Path) -> Result<(usize, Vec<Vec<f64>>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let header = rdr.headers()?.clone();
    let d = parse_header(&header, origin, false)?;
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec?;
        if rec.len() != d {
            return Err(parse_error(origin, line, format!("expected {d} fields, got {}", rec.len())));
        }
        let x = rec
            .iter()
            .map(|s| {
                let v = parse_f64(s, origin, line)?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(parse_error(origin, line, "non-finite covariate".into()))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(x);
    }
    Ok((d, rows))
}

fn parse_header(header: &csv::StringRecord, origin: &Path, with_outcome: bool) -> Result<usize> {
    let fields: Vec<&str> = header.iter().collect();
    let trailing = if with_outcome { 2 } else { 0 };
    if fields.len() < trailing {
        return Err(parse_error(origin, 1, "header too short".into()));
    }
    let d = fields.len() - trailing;
    for (j, name) in fields[..d].iter().enumerate() {
        if *name != format!("x{}", j + 1) {
            return Err(parse_error(origin, 1, format!("expected column x{}, found {name:?}", j + 1)));
        }
    }
    if with_outcome && (fields[d] != "t" || fields[d + 1] != "y") {
        return Err(parse_error(origin, 1, "header must end with columns t,y".into()));
    }
    Ok(d)
}

fn parse_f64(s: &str, origin: &Path, line: usize) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| parse_error(origin, line, format!("not a number: {s:?}")))
}

fn parse_error(origin: &Path, line: usize, msg: String) -> Error {
    Error::Parse {
        path: origin.to_path_buf(),
        line,
        msg,
    }
}

/// Closed interval on the extended real line. Either endpoint may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtInterval {
    lo: f64,
    hi: f64,
}

impl ExtInterval {
    /// # Panics
    /// If `lo > hi` or either endpoint is NaN.
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "interval endpoints out of order: [{lo}, {hi}]");
        Self { lo, hi }
    }

    pub fn full() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub fn point(c: f64) -> Self {
        Self::new(c, c)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn length(&self) -> f64 {
        if self.is_bounded() {
            self.hi - self.lo
        } else {
            f64::INFINITY
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn is_full(&self) -> bool {
        self.lo == f64::NEG_INFINITY && self.hi == f64::INFINITY
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn contains_interval(&self, other: &ExtInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn shifted(&self, c: f64) -> Self {
        Self::new(self.lo + c, self.hi + c)
    }
}

impl fmt::Display for ExtInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Per-arm prediction intervals at one covariate point, together with the
/// fitted values they were built around.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmIntervalPair {
    pub interval_plus: ExtInterval,
    pub interval_minus: ExtInterval,
    pub center_plus: f64,
    pub center_minus: f64,
}

impl ArmIntervalPair {
    pub fn interval(&self, arm: TreatmentArm) -> ExtInterval {
        match arm {
            TreatmentArm::Treated => self.interval_plus,
            TreatmentArm::Control => self.interval_minus,
        }
    }

    pub fn center(&self, arm: TreatmentArm) -> f64 {
        match arm {
            TreatmentArm::Treated => self.center_plus,
            TreatmentArm::Control => self.center_minus,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn raw(x: Vec<f64>, t: i64, y: f64) -> RawObservation {
        RawObservation { x, t, y }
    }

    #[test]
    fn empty_dataset_is_valid() {
        assert!(validate_dataset(10, &[]).is_ok());
        let ds = Dataset::from_raw(10, &[]).unwrap();
        assert!(ds.is_empty());
        assert_eq!(ds.dim(), 10);
    }

    #[test]
    fn zero_arm_code_is_rejected() {
        let err = validate_dataset(1, &[raw(vec![0.0], 0, 1.0)]).unwrap_err();
        assert_eq!(err, vec![Violation::InvalidArmCode { row: 0, code: 0 }]);
        assert!(err[0].to_string().contains("invalid arm code"));
    }

    #[test]
    fn nan_covariate_is_rejected() {
        let err = validate_dataset(2, &[raw(vec![1.0, f64::NAN], 1, 1.0)]).unwrap_err();
        assert_eq!(err, vec![Violation::NonFiniteCovariate { row: 0, column: 1 }]);
        assert!(err[0].to_string().contains("non-finite covariate"));
    }

    #[test]
    fn all_violations_are_listed() {
        let recs = [
            raw(vec![1.0], 1, 0.0),
            raw(vec![1.0, 2.0], 2, f64::INFINITY),
        ];
        let err = validate_dataset(1, &recs).unwrap_err();
        assert_eq!(err.len(), 3);
    }

    #[test]
    fn arm_tokens_are_literal() {
        assert_eq!("1".parse::<TreatmentArm>(), Ok(TreatmentArm::Treated));
        assert_eq!("-1".parse::<TreatmentArm>(), Ok(TreatmentArm::Control));
        for bad in ["0", "+1", "1.0", "treated", ""] {
            assert!(bad.parse::<TreatmentArm>().is_err(), "{bad}");
        }
    }

    #[test]
    fn csv_rejects_bad_arm_token() {
        let text = "x1,t,y\n0.5,1.0,2\n";
        let err = Dataset::read_csv(text.as_bytes(), Path::new("bad.csv")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn csv_rejects_bad_header() {
        let text = "a,b,t,y\n1,2,1,3\n";
        assert!(Dataset::read_csv(text.as_bytes(), Path::new("h.csv")).is_err());
    }

    #[test]
    fn interval_length_and_infinities() {
        assert_eq!(ExtInterval::new(1.0, 3.5).length(), 2.5);
        assert_eq!(ExtInterval::full().length(), f64::INFINITY);
        assert_eq!(ExtInterval::new(0.0, f64::INFINITY).length(), f64::INFINITY);
        assert!(ExtInterval::full().is_full());
        assert!(ExtInterval::full().contains(1e300));
    }

    #[test]
    #[should_panic]
    fn interval_rejects_reversed_endpoints() {
        let _ = ExtInterval::new(1.0, 0.0);
    }

    fn arb_dataset() -> impl Strategy<Value = Dataset> {
        (1usize..5).prop_flat_map(|d| {
            prop::collection::vec(
                (
                    prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::ZERO, d),
                    prop::bool::ANY,
                    prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL,
                ),
                0..20,
            )
            .prop_map(move |rows| {
                let obs = rows
                    .into_iter()
                    .map(|(x, treated, y)| {
                        let t = if treated { TreatmentArm::Treated } else { TreatmentArm::Control };
                        Observation::new(x, t, y)
                    })
                    .collect();
                Dataset::from_observations(d, obs).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_bitwise(ds in arb_dataset()) {
            let mut buf = Vec::new();
            ds.write_csv(&mut buf).unwrap();
            let back = Dataset::read_csv(buf.as_slice(), Path::new("mem")).unwrap();
            prop_assert_eq!(back.dim(), ds.dim());
            prop_assert_eq!(back.len(), ds.len());
            for (a, b) in back.covariates().iter().zip(ds.covariates()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
            for (a, b) in back.outcomes().iter().zip(ds.outcomes()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
            prop_assert_eq!(back.arms(), ds.arms());
        }

        #[test]
        fn arm_counts_sum_to_n(ds in arb_dataset()) {
            prop_assert_eq!(
                ds.arm_count(TreatmentArm::Treated) + ds.arm_count(TreatmentArm::Control),
                ds.len()
            );
        }
    }
}
