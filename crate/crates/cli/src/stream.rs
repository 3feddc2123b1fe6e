//! Stream plumbing: record input/output over stdin/stdout or files, and
//! the error-to-exit-code mapping.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};

use codecorpus::record::{load_records, save_records, CorpusRecord, LoadOutcome, RecordError};

/// Exit code 1: validation or usage problems. Exit code 2: I/O.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Io(m) => m,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<RecordError> for CliError {
    fn from(e: RecordError) -> Self {
        match e {
            RecordError::Io(inner) => CliError::Io(inner.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<codecorpus::config::ConfigError> for CliError {
    fn from(e: codecorpus::config::ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

/// Read an entire input stream (`-` for stdin).
pub fn read_input(spec: &str) -> Result<Vec<u8>, CliError> {
    let mut bytes = Vec::new();
    if spec == "-" {
        std::io::stdin().lock().read_to_end(&mut bytes)?;
    } else {
        File::open(spec)
            .map_err(|e| CliError::Io(format!("cannot open {spec}: {e}")))?
            .read_to_end(&mut bytes)?;
    }
    Ok(bytes)
}

/// Load records from an input stream; malformed lines are reported on
/// stderr, duplicate ids are fatal.
pub fn read_records(spec: &str) -> Result<LoadOutcome, CliError> {
    let bytes = read_input(spec)?;
    let outcome = load_records(BufReader::new(&bytes[..]))?;
    if outcome.malformed > 0 {
        eprintln!("skipped {} malformed line(s)", outcome.malformed);
    }
    Ok(outcome)
}

/// Open the output stream (`-` for stdout).
pub fn open_output(spec: &str) -> Result<Box<dyn Write>, CliError> {
    if spec == "-" {
        Ok(Box::new(BufWriter::new(std::io::stdout().lock())))
    } else {
        let file =
            File::create(spec).map_err(|e| CliError::Io(format!("cannot create {spec}: {e}")))?;
        Ok(Box::new(BufWriter::new(file)))
    }
}

pub fn write_records<'a>(
    records: impl IntoIterator<Item = &'a CorpusRecord>,
    spec: &str,
) -> Result<(), CliError> {
    let mut out = open_output(spec)?;
    save_records(records, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn write_text(text: &str, spec: &str) -> Result<(), CliError> {
    let mut out = open_output(spec)?;
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}
