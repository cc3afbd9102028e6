//! File formats: matrix CSV, binary PGM images, and the flat key=value
//! config files accepted by the bench subcommand.

use nmfkit_core::matrix::DenseMatrix;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

/// I/O and parse failures, with the offending line (CSV, config) or byte
/// offset (PGM) where that is meaningful.
#[derive(Debug)]
pub enum FileError {
    Io(std::io::Error),
    Parse { line: usize, msg: String },
}

impl fmt::Display for FileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FileError::Io(e) => write!(f, "io error: {e}"),
            FileError::Parse { line, msg } => write!(f, "parse error at line {line}: {msg}"),
        }
    }
}

impl std::error::Error for FileError {}

impl From<std::io::Error> for FileError {
    fn from(e: std::io::Error) -> Self {
        FileError::Io(e)
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> FileError {
    FileError::Parse {
        line,
        msg: msg.into(),
    }
}

/// Supported matrix input formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    Pgm,
}

impl std::str::FromStr for MatrixFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(MatrixFormat::Csv),
            "pgm" => Ok(MatrixFormat::Pgm),
            other => Err(format!("unknown matrix format '{other}'")),
        }
    }
}

/// Write a matrix as CSV: a `rows,cols` header line, then one line per row
/// with 17 significant digits so values round-trip bit-exactly.
pub fn write_matrix_csv(m: &DenseMatrix, path: &Path) -> Result<(), FileError> {
    let mut out = String::new();
    out.push_str(&format!("{},{}\n", m.rows(), m.cols()));
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|j| format!("{:.16e}", m[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Read a matrix written by [`write_matrix_csv`].
pub fn read_matrix_csv(path: &Path) -> Result<DenseMatrix, FileError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let dims: Vec<&str> = header.split(',').collect();
    if dims.len() != 2 {
        return Err(parse_err(1, "header must be 'rows,cols'"));
    }
    let rows: usize = dims[0]
        .trim()
        .parse()
        .map_err(|_| parse_err(1, "bad row count"))?;
    let cols: usize = dims[1]
        .trim()
        .parse()
        .map_err(|_| parse_err(1, "bad column count"))?;

    let mut m = DenseMatrix::zeros(rows, cols);
    let mut filled = 0usize;
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        if filled >= rows {
            return Err(parse_err(idx + 1, "more rows than the header declares"));
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols {
            return Err(parse_err(
                idx + 1,
                format!("expected {cols} fields, found {}", fields.len()),
            ));
        }
        for (j, field) in fields.iter().enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| parse_err(idx + 1, format!("bad number '{field}'")))?;
            if !v.is_finite() {
                return Err(parse_err(idx + 1, "non-finite entry"));
            }
            m[(filled, j)] = v;
        }
        filled += 1;
    }
    if filled != rows {
        return Err(parse_err(
            filled + 1,
            format!("expected {rows} rows, found {filled}"),
        ));
    }
    Ok(m)
}

/// A grayscale image decoded from binary PGM, entries scaled to `[0, 1]`,
/// stored row-major (raster order).
#[derive(Debug, Clone)]
pub struct PgmImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<f64>,
}

impl PgmImage {
    /// Vectorize into one matrix column, raster order.
    pub fn to_column(&self) -> DenseMatrix {
        DenseMatrix::from_vec(self.pixels.len(), 1, self.pixels.clone()).expect("finite pixels")
    }
}

/// Decode a binary (P5) PGM with maxval up to 255.
pub fn read_pgm(path: &Path) -> Result<PgmImage, FileError> {
    let bytes = fs::read(path)?;
    let mut pos = 0usize;

    let next_token = |pos: &mut usize| -> Result<String, FileError> {
        // Skip whitespace and '#' comment lines between header tokens.
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
                continue;
            }
            break;
        }
        let start = *pos;
        while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if start == *pos {
            return Err(parse_err(*pos, "unexpected end of header"));
        }
        Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
    };

    let magic = next_token(&mut pos)?;
    if magic != "P5" {
        return Err(parse_err(0, format!("not a binary PGM (magic '{magic}')")));
    }
    let width: usize = next_token(&mut pos)?
        .parse()
        .map_err(|_| parse_err(pos, "bad width"))?;
    let height: usize = next_token(&mut pos)?
        .parse()
        .map_err(|_| parse_err(pos, "bad height"))?;
    let maxval: usize = next_token(&mut pos)?
        .parse()
        .map_err(|_| parse_err(pos, "bad maxval"))?;
    if maxval == 0 || maxval > 255 {
        return Err(parse_err(pos, format!("unsupported maxval {maxval}")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(parse_err(pos, "missing header terminator"));
    }
    pos += 1;

    let need = width * height;
    if bytes.len() < pos + need {
        return Err(parse_err(
            pos,
            format!("raster truncated: need {need} bytes, have {}", bytes.len() - pos),
        ));
    }
    let pixels = bytes[pos..pos + need]
        .iter()
        .map(|&b| b as f64 / maxval as f64)
        .collect();
    Ok(PgmImage {
        width,
        height,
        pixels,
    })
}

/// Encode a `[0, 1]` image as binary PGM with maxval 255.
pub fn write_pgm(img: &PgmImage, path: &Path) -> Result<(), FileError> {
    let mut f = fs::File::create(path)?;
    write!(f, "P5\n{} {}\n255\n", img.width, img.height)?;
    let bytes: Vec<u8> = img
        .pixels
        .iter()
        .map(|&p| (p.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    f.write_all(&bytes)?;
    Ok(())
}

/// Load a matrix: CSV as written by this tool, or a PGM vectorized into a
/// single column (one image = one face vector).
pub fn load_matrix(path: &Path, format: MatrixFormat) -> Result<DenseMatrix, FileError> {
    match format {
        MatrixFormat::Csv => read_matrix_csv(path),
        MatrixFormat::Pgm => Ok(read_pgm(path)?.to_column()),
    }
}

/// Flat `key=value` config file mirroring the bench flags. Blank lines and
/// `#` comments are ignored; later keys override earlier ones downstream.
pub fn parse_config(path: &Path) -> Result<Vec<(String, String)>, FileError> {
    let text = fs::read_to_string(path)?;
    let mut pairs = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(parse_err(idx + 1, "expected key=value"));
        };
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}
