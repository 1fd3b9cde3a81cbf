use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::error::{CliError, CliResult};

/// Opens `path` for writing, or stdout when absent.
pub fn sink(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| CliError::Io(format!("cannot create {}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(file)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

pub fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

/// Shortest decimal that reads back as the same `f64`.
pub fn float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v}")
    }
}

pub fn opt_float(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, 1e-300, 123456789.125, -0.0, 5e-324] {
            assert_eq!(float(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
        assert_eq!(float(0.5), "0.5");
        assert_eq!(float(2.0), "2");
        assert_eq!(opt_float(None), "");
    }
}
