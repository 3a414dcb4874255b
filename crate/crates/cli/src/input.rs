use std::fs::File;
use std::io::{self, Read};
use std::path::Path;

use crate::CliError;

/// Which field of each record holds the series.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Column {
    Index(usize),
    Name(String),
}

impl std::str::FromStr for Column {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => Column::Index(i),
            Err(_) => Column::Name(s.to_string()),
        })
    }
}

/// Reads one number per record from `path` (`-` for stdin).
pub fn read_values(path: &Path, column: &Column, skip_header: bool) -> Result<Vec<f64>, CliError> {
    let mut text = String::new();
    if path == Path::new("-") {
        io::stdin().read_to_string(&mut text)
    } else {
        File::open(path).and_then(|mut f| f.read_to_string(&mut text))
    }
    .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_values(&text, column, skip_header)
}

pub fn parse_values(text: &str, column: &Column, skip_header: bool) -> Result<Vec<f64>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(skip_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let index = match column {
        Column::Index(i) => *i,
        Column::Name(name) => {
            if !skip_header {
                return Err(CliError::Parse(format!("column `{name}` selected by name needs --skip-header")));
            }
            let headers = reader.headers().map_err(|e| CliError::Parse(e.to_string()))?;
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| CliError::Parse(format!("no column named `{name}`")))?
        }
    };
    let mut values = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Parse(e.to_string()))?;
        let line = record.position().map_or(row + 1, |p| p.line() as usize);
        let field = record
            .get(index)
            .ok_or_else(|| CliError::Parse(format!("line {line}: no column {index}")))?;
        let value = field
            .parse::<f64>()
            .map_err(|_| CliError::Parse(format!("line {line}: `{field}` is not a number")))?;
        values.push(value);
    }
    Ok(values)
}
