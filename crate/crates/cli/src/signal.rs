//! The signal file format:
//!
//! ```text
//! # logbern-signal v1 schema=samples n=4 mu=0.5
//! k,y
//! 0,1.5
//! ...
//! ```
//!
//! `schema=samples` carries `(k, y_k)` rows for `k = 0..=n`; `schema=function`
//! carries `(x, f(x))` rows at the nodes `x = k/n`. `mu` is optional.

use std::io::Read;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schema {
    Samples,
    Function,
}

#[derive(Debug, Clone)]
pub struct SignalFile {
    pub schema: Schema,
    pub n: usize,
    pub mu: Option<f64>,
    /// Values at the nodes `k/n`, in index order.
    pub values: Vec<f64>,
}

impl Schema {
    pub fn name(self) -> &'static str {
        match self {
            Schema::Samples => "samples",
            Schema::Function => "function",
        }
    }
}

const MAGIC: &str = "# logbern-signal v1";

fn header_error(msg: impl Into<String>) -> CliError {
    CliError::Data(format!("line 1: {}", msg.into()))
}

fn parse_header(line: &str) -> Result<(Schema, usize, Option<f64>), CliError> {
    let rest = line
        .trim_end()
        .strip_prefix(MAGIC)
        .ok_or_else(|| header_error(format!("expected header starting with '{MAGIC}'")))?;
    let (mut schema, mut n, mut mu) = (None, None, None);
    for field in rest.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| header_error(format!("malformed header field '{field}'")))?;
        match key {
            "schema" => {
                schema = Some(match value {
                    "samples" => Schema::Samples,
                    "function" => Schema::Function,
                    other => return Err(header_error(format!("unknown schema '{other}'"))),
                })
            }
            "n" => {
                n = Some(
                    value
                        .parse::<usize>()
                        .ok()
                        .filter(|v| *v >= 1)
                        .ok_or_else(|| header_error(format!("n must be a positive integer, got '{value}'")))?,
                )
            }
            "mu" => {
                mu = Some(
                    value
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite() && *v > 0.0)
                        .ok_or_else(|| header_error(format!("mu must be a positive number, got '{value}'")))?,
                )
            }
            other => return Err(header_error(format!("unknown header field '{other}'"))),
        }
    }
    let schema = schema.ok_or_else(|| header_error("missing schema="))?;
    let n = n.ok_or_else(|| header_error("missing n="))?;
    Ok((schema, n, mu))
}

impl SignalFile {
    pub fn parse<R: Read>(mut reader: R) -> Result<Self, CliError> {
        let mut text = String::new();
        reader
            .read_to_string(&mut text)
            .map_err(|e| CliError::Data(format!("cannot read signal file: {e}")))?;
        let (first, body) = text.split_once('\n').unwrap_or((text.as_str(), ""));
        let (schema, n, mu) = parse_header(first)?;
        let expected = match schema {
            Schema::Samples => ["k", "y"],
            Schema::Function => ["x", "f"],
        };
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(body.as_bytes());
        let headers = rdr.headers().map_err(|e| CliError::Data(format!("line 2: {e}")))?.clone();
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(CliError::Data(format!(
                "line 2: expected columns '{}', got '{}'",
                expected.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut values = Vec::with_capacity(n + 1);
        for (i, record) in rdr.records().enumerate() {
            let line = i + 3;
            let record = record.map_err(|e| CliError::Data(format!("line {line}: {e}")))?;
            if record.len() != 2 {
                return Err(CliError::Data(format!("line {line}: expected 2 fields, got {}", record.len())));
            }
            let k = values.len();
            if k > n {
                return Err(CliError::Data(format!("line {line}: more than n + 1 = {} rows", n + 1)));
            }
            match schema {
                Schema::Samples => {
                    let idx: usize = record[0]
                        .parse()
                        .map_err(|_| CliError::Data(format!("line {line}: bad index '{}'", &record[0])))?;
                    if idx != k {
                        return Err(CliError::Data(format!("line {line}: index {idx} out of order, expected {k}")));
                    }
                }
                Schema::Function => {
                    let x: f64 = record[0]
                        .parse()
                        .map_err(|_| CliError::Data(format!("line {line}: bad abscissa '{}'", &record[0])))?;
                    let node = k as f64 / n as f64;
                    if (x - node).abs() > 1e-9 {
                        return Err(CliError::Data(format!("line {line}: x = {x} is not the node {k}/{n}")));
                    }
                }
            }
            let v: f64 = record[1]
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| CliError::Data(format!("line {line}: value '{}' is not a finite number", &record[1])))?;
            values.push(v);
        }
        if values.len() != n + 1 {
            return Err(CliError::Data(format!("expected {} rows for n = {n}, found {}", n + 1, values.len())));
        }
        Ok(Self { schema, n, mu, values })
    }

    /// First row whose value is not strictly positive, as `(line, k, value)`.
    pub fn first_nonpositive(&self) -> Option<(usize, usize, f64)> {
        self.values.iter().enumerate().find(|(_, v)| **v <= 0.0).map(|(k, v)| (k + 3, k, *v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_schemas() {
        let s = SignalFile::parse("# logbern-signal v1 schema=samples n=2 mu=1\nk,y\n0,2\n1,2.5\n2,3\n".as_bytes()).unwrap();
        assert_eq!((s.schema, s.n, s.mu), (Schema::Samples, 2, Some(1.0)));
        assert_eq!(s.values, vec![2.0, 2.5, 3.0]);
        let f = SignalFile::parse("# logbern-signal v1 schema=function n=2\nx,f\n0,1\n0.5,1\n1,1\n".as_bytes()).unwrap();
        assert_eq!((f.schema, f.mu), (Schema::Function, None));
    }

    #[test]
    fn rejects_malformed_files() {
        for text in [
            "k,y\n0,1\n",
            "# logbern-signal v1 schema=samples\nk,y\n0,1\n",
            "# logbern-signal v1 schema=samples n=1\nk,y\n0,1\n",
            "# logbern-signal v1 schema=samples n=1\nk,y\n1,1\n0,1\n",
            "# logbern-signal v1 schema=samples n=1\nx,f\n0,1\n1,1\n",
            "# logbern-signal v1 schema=function n=2\nx,f\n0,1\n0.4,1\n1,1\n",
            "# logbern-signal v1 schema=samples n=1\nk,y\n0,nan\n1,1\n",
        ] {
            assert!(matches!(SignalFile::parse(text.as_bytes()), Err(CliError::Data(_))), "{text}");
        }
    }

    #[test]
    fn reports_first_nonpositive_row() {
        let s = SignalFile::parse("# logbern-signal v1 schema=samples n=2 mu=1\nk,y\n0,2\n1,-0.5\n2,0\n".as_bytes()).unwrap();
        assert_eq!(s.first_nonpositive(), Some((4, 1, -0.5)));
    }
}
