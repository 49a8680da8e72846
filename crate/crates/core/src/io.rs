//! Matrix and graph file formats.
//!
//! Delimited text: one observation (vertex) per row, one signal per column,
//! separated by commas, tabs or runs of whitespace, with an optional header
//! row. Binary PGM images are read as a single signal in row-major pixel
//! order. Edge lists hold one `a b w` triple per line (0-indexed), with `#`
//! starting a comment.

use std::fs;
use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageEncoder};

use crate::{Error, Graph, Result};

/// Row-major dense matrix: rows are vertices, columns are signals.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidArgument(format!("{} values for a {rows}x{cols} matrix", data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::InvalidArgument("columns have different lengths".into()));
        }
        let cols = columns.len();
        let data = (0..rows).flat_map(|r| columns.iter().map(move |c| c[r])).collect();
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.cols).map(|c| self.column(c)).collect()
    }

    pub fn set_column(&mut self, c: usize, values: &[f64]) -> Result<()> {
        crate::check_len("column", values.len(), self.rows)?;
        for (r, v) in values.iter().enumerate() {
            self.data[r * self.cols + c] = *v;
        }
        Ok(())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delimiter {
    Comma,
    Tab,
    Whitespace,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatrixFormat {
    Delimited { delimiter: Delimiter, header: Option<Vec<String>> },
    /// Grayscale image; the matrix is a single column of `height·width` pixels.
    Pgm { height: usize, width: usize, maxval: u16 },
}

fn sniff(text: &str) -> Delimiter {
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    if first.contains(',') {
        Delimiter::Comma
    } else if first.contains('\t') {
        Delimiter::Tab
    } else {
        Delimiter::Whitespace
    }
}

/// Parse delimited numeric text. A first row containing any non-numeric
/// field is taken as a header.
pub fn parse_delimited(text: &str) -> Result<(Matrix, MatrixFormat)> {
    let delimiter = sniff(text);
    let mut records: Vec<(usize, Vec<String>)> = Vec::new();
    match delimiter {
        Delimiter::Whitespace => {
            for (i, line) in text.lines().enumerate() {
                if !line.trim().is_empty() {
                    records.push((i + 1, line.split_whitespace().map(str::to_owned).collect()));
                }
            }
        }
        Delimiter::Comma | Delimiter::Tab => {
            let mut reader = csv::ReaderBuilder::new()
                .delimiter(if delimiter == Delimiter::Comma { b',' } else { b'\t' })
                .has_headers(false)
                .flexible(true)
                .trim(csv::Trim::All)
                .from_reader(text.as_bytes());
            for rec in reader.records() {
                let rec = rec.map_err(|e| Error::Parse {
                    line: e.position().map_or(0, |p| p.line() as usize),
                    column: 0,
                    message: e.to_string(),
                })?;
                let line = rec.position().map_or(0, |p| p.line() as usize);
                if rec.len() == 1 && rec[0].is_empty() {
                    continue;
                }
                records.push((line, rec.iter().map(str::to_owned).collect()));
            }
        }
    }

    let mut header = None;
    if let Some((_, first)) = records.first() {
        if first.iter().any(|f| f.parse::<f64>().is_err()) {
            header = Some(records.remove(0).1);
        }
    }
    let cols = header
        .as_ref()
        .map(Vec::len)
        .or_else(|| records.first().map(|r| r.1.len()))
        .unwrap_or(0);
    let mut data = Vec::with_capacity(records.len() * cols);
    for (line, fields) in &records {
        if fields.len() != cols {
            return Err(Error::Parse {
                line: *line,
                column: fields.len().min(cols) + 1,
                message: format!("expected {cols} fields, found {}", fields.len()),
            });
        }
        for (c, field) in fields.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line: *line,
                column: c + 1,
                message: format!("`{field}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse { line: *line, column: c + 1, message: format!("`{field}` is not finite") });
            }
            data.push(v);
        }
    }
    let rows = records.len();
    Ok((Matrix { rows, cols, data }, MatrixFormat::Delimited { delimiter, header }))
}

fn is_pgm(path: &Path, head: &[u8]) -> bool {
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    matches!(ext.as_deref(), Some("pgm")) || head.starts_with(b"P5") || head.starts_with(b"P2")
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<(Matrix, MatrixFormat)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if is_pgm(path, &bytes) {
        return decode_pgm(&bytes);
    }
    let text = String::from_utf8(bytes)
        .map_err(|e| Error::Parse { line: 0, column: 0, message: format!("{}: not UTF-8 text: {e}", path.display()) })?;
    parse_delimited(&text)
}

fn decode_pgm(bytes: &[u8]) -> Result<(Matrix, MatrixFormat)> {
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Pnm)
        .map_err(|e| Error::Parse { line: 0, column: 0, message: format!("bad PGM image: {e}") })?;
    let (width, height) = (img.width() as usize, img.height() as usize);
    let (data, maxval): (Vec<f64>, u16) = match img {
        image::DynamicImage::ImageLuma8(buf) => (buf.into_raw().into_iter().map(f64::from).collect(), 255),
        other => (other.into_luma16().into_raw().into_iter().map(f64::from).collect(), u16::MAX),
    };
    Ok((Matrix { rows: height * width, cols: 1, data }, MatrixFormat::Pgm { height, width, maxval }))
}

/// Shortest decimal text that parses back to the same `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v}")
}

pub fn format_delimited(m: &Matrix, delimiter: Delimiter, header: Option<&[String]>) -> String {
    let sep = match delimiter {
        Delimiter::Comma => ",",
        Delimiter::Tab => "\t",
        Delimiter::Whitespace => " ",
    };
    let mut out = String::new();
    if let Some(h) = header {
        out.push_str(&h.join(sep));
        out.push('\n');
    }
    for r in 0..m.rows {
        let line: Vec<String> = (0..m.cols).map(|c| format_f64(m.get(r, c))).collect();
        out.push_str(&line.join(sep));
        out.push('\n');
    }
    out
}

/// Write `m` in `format`. Image output rounds and clamps to `[0, maxval]`.
pub fn write_matrix(path: impl AsRef<Path>, m: &Matrix, format: &MatrixFormat) -> Result<()> {
    let path = path.as_ref();
    match format {
        MatrixFormat::Delimited { delimiter, header } => {
            fs::write(path, format_delimited(m, *delimiter, header.as_deref())).map_err(|e| Error::io(path, e))
        }
        MatrixFormat::Pgm { height, width, maxval } => {
            if m.cols != 1 || m.rows != height * width {
                return Err(Error::InvalidArgument(format!(
                    "a {height}x{width} image needs one column of {} values",
                    height * width
                )));
            }
            let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
            let encoder = PnmEncoder::new(std::io::BufWriter::new(file))
                .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary));
            let clamp = |v: f64| v.round().clamp(0.0, f64::from(*maxval));
            let result = if *maxval <= 255 {
                let px: Vec<u8> = m.data.iter().map(|&v| clamp(v) as u8).collect();
                encoder.write_image(&px, *width as u32, *height as u32, ExtendedColorType::L8)
            } else {
                let px: Vec<u8> = m.data.iter().flat_map(|&v| (clamp(v) as u16).to_ne_bytes()).collect();
                encoder.write_image(&px, *width as u32, *height as u32, ExtendedColorType::L16)
            };
            result.map_err(|e| Error::io(path, std::io::Error::other(e)))
        }
    }
}

/// Parse an edge list. `n` defaults to one more than the largest index.
pub fn parse_edge_list(text: &str, n: Option<usize>) -> Result<Graph> {
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: i + 1,
                column: fields.len().min(3) + 1,
                message: format!("expected `a b w`, found {} fields", fields.len()),
            });
        }
        let index = |c: usize| {
            fields[c].parse::<usize>().map_err(|_| Error::Parse {
                line: i + 1,
                column: c + 1,
                message: format!("`{}` is not a vertex index", fields[c]),
            })
        };
        let a = index(0)?;
        let b = index(1)?;
        let w: f64 = fields[2].parse().map_err(|_| Error::Parse {
            line: i + 1,
            column: 3,
            message: format!("`{}` is not a weight", fields[2]),
        })?;
        edges.push((a, b, w));
    }
    let n = n.unwrap_or_else(|| edges.iter().map(|&(a, b, _)| a.max(b) + 1).max().unwrap_or(0));
    Graph::from_edges(n, edges)
}

pub fn read_edge_list(path: impl AsRef<Path>, n: Option<usize>) -> Result<Graph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(&text, n)
}
