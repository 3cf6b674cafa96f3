use std::fmt::Display;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use isoband::Sequence;

/// A failure that maps onto a process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Display) -> Self {
        Self {
            code: 2,
            message: message.to_string(),
        }
    }

    pub fn violation(message: impl Display) -> Self {
        Self {
            code: 1,
            message: message.to_string(),
        }
    }
}

impl From<isoband::Error> for Failure {
    fn from(e: isoband::Error) -> Self {
        Failure::input(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::input(format!("I/O error: {e}"))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::input(format!("JSON error: {e}"))
    }
}

pub type CliResult<T> = Result<T, Failure>;

fn open_input(path: &Path) -> CliResult<Box<dyn BufRead>> {
    if path.as_os_str() == "-" {
        return Ok(Box::new(BufReader::new(io::stdin())));
    }
    let file = File::open(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    Ok(Box::new(BufReader::new(file)))
}

/// One number per line; blank lines are skipped. Errors name the 1-based line.
pub fn read_values(path: &Path) -> CliResult<Vec<f64>> {
    let mut reader = open_input(path)?;
    let mut text = String::new();
    reader
        .read_to_string(&mut text)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let field = line.trim();
        if field.is_empty() {
            continue;
        }
        let v: f64 = field.parse().map_err(|_| {
            Failure::input(format!(
                "{}: line {}: cannot parse {field:?} as a number",
                path.display(),
                k + 1
            ))
        })?;
        if !v.is_finite() {
            return Err(Failure::input(format!(
                "{}: line {}: value {field:?} is not finite",
                path.display(),
                k + 1
            )));
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(Failure::input(format!(
            "{}: no values found",
            path.display()
        )));
    }
    Ok(out)
}

pub fn read_sequence(path: &Path) -> CliResult<Sequence> {
    Ok(Sequence::new(read_values(path)?)?)
}

pub fn open_output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    match path {
        None => Ok(Box::new(BufWriter::new(io::stdout()))),
        Some(p) if p.as_os_str() == "-" => Ok(Box::new(BufWriter::new(io::stdout()))),
        Some(p) => {
            let file = File::create(p)
                .map_err(|e| Failure::input(format!("cannot write {}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(file)))
        }
    }
}

/// Writes `value` as pretty JSON followed by a newline.
pub fn write_json<T: serde::Serialize>(out: &mut dyn Write, value: &T) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}
