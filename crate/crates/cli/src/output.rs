//! Bit-exact output artifacts.
//!
//! `field.csv` carries `i,j,x,y,u` row-major over `i` then `j`;
//! `summary.json` echoes the resolved config and every diagnostic. All reals
//! are printed with 17 significant digits (`{:.16e}`), which round-trips
//! 64-bit floats exactly, so identical runs produce byte-identical files.

use std::io;
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{PrettyFormatter, Serializer};

use logsp_core::{GridSpec, ScalarField};

use crate::error::CliError;

pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_field_csv(path: &Path, field: &ScalarField) -> Result<(), CliError> {
    let grid = field.grid();
    let n = grid.n();
    let mut out = String::with_capacity(n * n * 80);
    out.push_str("i,j,x,y,u\n");
    for i in 0..n {
        for j in 0..n {
            let (x, y) = grid.center(i, j);
            out.push_str(&format!(
                "{i},{j},{},{},{}\n",
                format_real(x),
                format_real(y),
                format_real(field.at(i, j))
            ));
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Read a field CSV back onto `grid`. The `i,j` indices must cover the grid
/// exactly once; `x,y` columns are documentation and not re-derived.
pub fn read_field_csv(path: &Path, grid: GridSpec) -> Result<ScalarField, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read field {}: {e}", path.display())))?;
    let n = grid.n();
    let mut values = vec![f64::NAN; n * n];
    let mut seen = vec![false; n * n];
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == "i,j,x,y,u" => {}
        _ => {
            return Err(CliError::Config(format!(
                "{}: expected header 'i,j,x,y,u'",
                path.display()
            )))
        }
    }
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(CliError::Config(format!(
                "{}:{}: expected 5 columns",
                path.display(),
                lineno + 2
            )));
        }
        let parse = |s: &str, what: &str| {
            s.trim().parse::<f64>().map_err(|e| {
                CliError::Config(format!(
                    "{}:{}: bad {what}: {e}",
                    path.display(),
                    lineno + 2
                ))
            })
        };
        let i = cols[0].trim().parse::<usize>().map_err(|e| {
            CliError::Config(format!("{}:{}: bad i: {e}", path.display(), lineno + 2))
        })?;
        let j = cols[1].trim().parse::<usize>().map_err(|e| {
            CliError::Config(format!("{}:{}: bad j: {e}", path.display(), lineno + 2))
        })?;
        if i >= n || j >= n {
            return Err(CliError::Config(format!(
                "{}:{}: index ({i}, {j}) outside {n}x{n} grid",
                path.display(),
                lineno + 2
            )));
        }
        let u = parse(cols[4], "value")?;
        values[i * n + j] = u;
        seen[i * n + j] = true;
    }
    if !seen.iter().all(|&s| s) {
        return Err(CliError::Config(format!(
            "{}: field does not cover the whole {n}x{n} grid",
            path.display()
        )));
    }
    ScalarField::from_values(grid, values).map_err(CliError::from)
}

/// Pretty JSON with `write_f64` overridden to 17 significant digits.
struct SigDigitFormatter<'a> {
    inner: PrettyFormatter<'a>,
}

impl serde_json::ser::Formatter for SigDigitFormatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object_value(writer)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut buf = Vec::new();
    let formatter = SigDigitFormatter {
        inner: PrettyFormatter::new(),
    };
    let mut ser = Serializer::with_formatter(&mut buf, formatter);
    value
        .serialize(&mut ser)
        .map_err(|e| CliError::Config(format!("cannot serialize summary: {e}")))?;
    buf.push(b'\n');
    std::fs::write(path, buf)?;
    Ok(())
}
