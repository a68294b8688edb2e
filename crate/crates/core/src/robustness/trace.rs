//! Sampled output traces: strictly increasing timestamps with one value per
//! schema signal at each sample, plus the CSV interchange format.

use std::fmt::Write as _;
use std::io;

use thiserror::Error;

use crate::stl::SignalSchema;

#[derive(Debug, Error, PartialEq)]
pub enum TraceError {
    #[error("sample time {t} does not increase past the previous time {last}")]
    NonMonotoneTime { t: f64, last: f64 },
    #[error("first sample time {0} is negative")]
    NegativeStart(f64),
    #[error("sample time {0} is not finite")]
    NonFiniteTime(f64),
    #[error("state vector has {got} values but the schema declares {want} signals")]
    StateWidth { got: usize, want: usize },
}

#[derive(Debug, Error)]
pub enum TraceCsvError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("header should be `time,{expected}`, got `{got}`")]
    Header { expected: String, got: String },
    #[error("line {line}: expected {want} comma-separated values, got {got}")]
    Width { line: usize, want: usize, got: usize },
    #[error("line {line}: `{field}` is not a number")]
    Number { line: usize, field: String },
    #[error("line {line}: {source}")]
    Sample {
        line: usize,
        #[source]
        source: TraceError,
    },
}

/// A finite sampled trace over a fixed signal schema.
///
/// Values are stored row-major: sample `n` occupies
/// `values[n*width .. (n+1)*width]` in schema order.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    schema: SignalSchema,
    times: Vec<f64>,
    values: Vec<f64>,
}

impl Trace {
    pub fn new(schema: SignalSchema) -> Self {
        Self { schema, times: Vec::new(), values: Vec::new() }
    }

    pub fn from_samples(
        schema: SignalSchema,
        samples: impl IntoIterator<Item = (f64, Vec<f64>)>,
    ) -> Result<Self, TraceError> {
        let mut tr = Self::new(schema);
        for (t, state) in samples {
            tr.push(t, &state)?;
        }
        Ok(tr)
    }

    /// Appends one sample. Times must strictly increase and start at or
    /// after zero.
    pub fn push(&mut self, t: f64, state: &[f64]) -> Result<(), TraceError> {
        if !t.is_finite() {
            return Err(TraceError::NonFiniteTime(t));
        }
        match self.times.last() {
            Some(&last) if t <= last => return Err(TraceError::NonMonotoneTime { t, last }),
            None if t < 0.0 => return Err(TraceError::NegativeStart(t)),
            _ => {}
        }
        if state.len() != self.schema.len() {
            return Err(TraceError::StateWidth { got: state.len(), want: self.schema.len() });
        }
        self.times.push(t);
        self.values.extend_from_slice(state);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn schema(&self) -> &SignalSchema {
        &self.schema
    }

    pub fn time(&self, n: usize) -> f64 {
        self.times[n]
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn last_time(&self) -> Option<f64> {
        self.times.last().copied()
    }

    pub fn value(&self, n: usize, signal: usize) -> f64 {
        debug_assert!(signal < self.schema.len());
        self.values[n * self.schema.len() + signal]
    }

    pub fn state(&self, n: usize) -> &[f64] {
        let w = self.schema.len();
        &self.values[n * w..(n + 1) * w]
    }

    /// Drops the `count` oldest samples (monitor eviction).
    pub(crate) fn remove_oldest(&mut self, count: usize) {
        let count = count.min(self.len());
        self.times.drain(..count);
        self.values.drain(..count * self.schema.len());
    }

    pub fn write_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", csv_header(&self.schema))?;
        let mut line = String::new();
        for n in 0..self.len() {
            line.clear();
            // `{}` on f64 prints the shortest digits that parse back to the
            // same value, so the file round-trips losslessly.
            write!(line, "{}", self.time(n)).unwrap();
            for v in self.state(n) {
                write!(line, ",{v}").unwrap();
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = Vec::new();
        self.write_csv(&mut out).expect("writing to a Vec cannot fail");
        String::from_utf8(out).expect("CSV output is ASCII")
    }

    pub fn read_csv<R: io::Read>(mut r: R, schema: &SignalSchema) -> Result<Self, TraceCsvError> {
        let mut text = String::new();
        r.read_to_string(&mut text)?;
        Self::parse_csv(&text, schema)
    }

    pub fn parse_csv(text: &str, schema: &SignalSchema) -> Result<Self, TraceCsvError> {
        let expected = csv_header(schema);
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| TraceCsvError::Header { expected: field_list(schema), got: String::new() })?;
        if header.trim_end() != expected {
            return Err(TraceCsvError::Header {
                expected: field_list(schema),
                got: header.to_string(),
            });
        }
        let mut tr = Self::new(schema.clone());
        let want = schema.len() + 1;
        let mut state = Vec::with_capacity(schema.len());
        for (idx, raw) in lines {
            let line = idx + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let mut fields = raw.split(',');
            let t = parse_field(fields.next().unwrap_or(""), line)?;
            state.clear();
            for field in fields.by_ref() {
                state.push(parse_field(field, line)?);
            }
            if state.len() != want - 1 {
                return Err(TraceCsvError::Width { line, want, got: state.len() + 1 });
            }
            tr.push(t, &state).map_err(|source| TraceCsvError::Sample { line, source })?;
        }
        Ok(tr)
    }
}

fn csv_header(schema: &SignalSchema) -> String {
    format!("time,{}", field_list(schema))
}

fn field_list(schema: &SignalSchema) -> String {
    schema.iter().map(|(name, _)| name).collect::<Vec<_>>().join(",")
}

fn parse_field(field: &str, line: usize) -> Result<f64, TraceCsvError> {
    field
        .trim()
        .parse()
        .map_err(|_| TraceCsvError::Number { line, field: field.to_string() })
}

/// Writes the `--trace-out` robustness dump: `time,rho` with one row per
/// monitored instant.
pub fn write_robustness_csv<W: io::Write>(
    mut w: W,
    rows: impl IntoIterator<Item = (f64, f64)>,
) -> io::Result<()> {
    writeln!(w, "time,rho")?;
    for (t, rho) in rows {
        writeln!(w, "{t},{rho}")?;
    }
    Ok(())
}
