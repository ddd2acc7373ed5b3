//! Vector files (`.fvecs`, `.bvecs`, `.ivecs`) and the model and code
//! containers. Everything is little-endian.
//!
//! Model file:
//! `b"GKMMODEL"`, version `u32`, `C`, `K`, `P` as `u32`, config text length
//! `u32`, UTF-8 `key=value` text, then `C*K*P` `f32` in `(c, k, p)` order.
//!
//! Codes file:
//! `b"GKMCODES"`, version `u32`, `N` as `u64`, `C`, `K` as `u32`, then
//! `N*C` entries of 1 byte (`K <= 256`) or 2 bytes.

use std::fs::File;
use std::io::{BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::Path;

use crate::config::TrainConfig;
use crate::data::{CodeMatrix, CodebookSet, DataMatrix};
use crate::error::{Error, Result};
use crate::model::Model;

const MODEL_MAGIC: &[u8; 8] = b"GKMMODEL";
const CODES_MAGIC: &[u8; 8] = b"GKMCODES";
const FORMAT_VERSION: u32 = 1;
const HISTORY_KEY: &str = "history";

/// Row-major `i32` matrix read from an `.ivecs` file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    pub rows: usize,
    pub dims: usize,
    pub values: Vec<i32>,
}

impl IntMatrix {
    pub fn row(&self, i: usize) -> &[i32] {
        &self.values[i * self.dims..(i + 1) * self.dims]
    }
}

/// Reader that tracks its byte offset for error messages.
struct Tracked<R> {
    inner: R,
    offset: u64,
}

impl<R: Read> Tracked<R> {
    fn new(inner: R) -> Self {
        Self { inner, offset: 0 }
    }

    /// Fills `buf`, or returns `Ok(false)` on a clean EOF before any byte.
    fn fill_or_eof(&mut self, buf: &mut [u8]) -> Result<bool> {
        let mut read = 0;
        while read < buf.len() {
            match self.inner.read(&mut buf[read..]) {
                Ok(0) if read == 0 => return Ok(false),
                Ok(0) => {
                    return Err(Error::format(
                        self.offset + read as u64,
                        format!("truncated: expected {} more bytes", buf.len() - read),
                    ))
                }
                Ok(n) => read += n,
                Err(e) if e.kind() == ErrorKind::Interrupted => {}
                Err(e) => return Err(e.into()),
            }
        }
        self.offset += buf.len() as u64;
        Ok(true)
    }

    fn fill(&mut self, buf: &mut [u8]) -> Result<()> {
        let at = self.offset;
        if buf.is_empty() || self.fill_or_eof(buf)? {
            Ok(())
        } else {
            Err(Error::format(
                at,
                format!("truncated: expected {} bytes", buf.len()),
            ))
        }
    }

    fn u32(&mut self) -> Result<u32> {
        let mut b = [0u8; 4];
        self.fill(&mut b)?;
        Ok(u32::from_le_bytes(b))
    }

    fn u64(&mut self) -> Result<u64> {
        let mut b = [0u8; 8];
        self.fill(&mut b)?;
        Ok(u64::from_le_bytes(b))
    }

    fn expect_end(&mut self) -> Result<()> {
        let mut b = [0u8; 1];
        if self.fill_or_eof(&mut b)? {
            Err(Error::format(self.offset - 1, "unexpected trailing bytes"))
        } else {
            Ok(())
        }
    }
}

fn open(path: &Path) -> Result<Tracked<BufReader<File>>> {
    Ok(Tracked::new(BufReader::new(File::open(path)?)))
}

/// Reads dimension-prefixed records of `width`-byte values.
/// Returns `(rows, dims, raw payload bytes)`.
fn read_records<R: Read>(r: &mut Tracked<R>, width: usize) -> Result<(usize, usize, Vec<u8>)> {
    let mut dims: Option<usize> = None;
    let mut rows = 0;
    let mut payload = Vec::new();
    let mut head = [0u8; 4];
    loop {
        let at = r.offset;
        if !r.fill_or_eof(&mut head)? {
            break;
        }
        let d = i32::from_le_bytes(head);
        if d <= 0 {
            return Err(Error::format(
                at,
                format!("record dimension must be positive, got {d}"),
            ));
        }
        let d = d as usize;
        match dims {
            None => dims = Some(d),
            Some(expected) if expected != d => {
                return Err(Error::format(
                    at,
                    format!("record dimension {d} differs from the first record's {expected}"),
                ))
            }
            _ => {}
        }
        let start = payload.len();
        payload.resize(start + d * width, 0);
        r.fill(&mut payload[start..])?;
        rows += 1;
    }
    match dims {
        Some(d) => Ok((rows, d, payload)),
        None => Err(Error::EmptyDataset),
    }
}

pub fn read_fvecs(path: impl AsRef<Path>) -> Result<DataMatrix> {
    parse_fvecs(open(path.as_ref())?)
}

fn parse_fvecs<R: Read>(mut r: Tracked<R>) -> Result<DataMatrix> {
    let (rows, dims, raw) = read_records(&mut r, 4)?;
    let values = raw
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    DataMatrix::new(rows, dims, values)
}

pub fn read_bvecs(path: impl AsRef<Path>) -> Result<DataMatrix> {
    let mut r = open(path.as_ref())?;
    let (rows, dims, raw) = read_records(&mut r, 1)?;
    DataMatrix::new(rows, dims, raw.into_iter().map(f32::from).collect())
}

pub fn read_ivecs(path: impl AsRef<Path>) -> Result<IntMatrix> {
    let mut r = open(path.as_ref())?;
    let (rows, dims, raw) = read_records(&mut r, 4)?;
    let values = raw
        .chunks_exact(4)
        .map(|b| i32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    Ok(IntMatrix { rows, dims, values })
}

fn dim_prefix(dims: usize) -> Result<[u8; 4]> {
    i32::try_from(dims)
        .map(i32::to_le_bytes)
        .map_err(|_| Error::Capacity(format!("dimension {dims} does not fit a record header")))
}

pub fn write_fvecs(path: impl AsRef<Path>, data: &DataMatrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let head = dim_prefix(data.dims())?;
    for row in data.iter_rows() {
        w.write_all(&head)?;
        for v in row {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Every value must be an integer in `0..=255`.
pub fn write_bvecs(path: impl AsRef<Path>, data: &DataMatrix) -> Result<()> {
    if let Some(v) = data
        .as_slice()
        .iter()
        .find(|&&v| !(0.0..=255.0).contains(&v) || v.fract() != 0.0)
    {
        return Err(Error::contract(format!(
            "value {v} cannot be stored as a byte"
        )));
    }
    let mut w = BufWriter::new(File::create(path)?);
    let head = dim_prefix(data.dims())?;
    for row in data.iter_rows() {
        w.write_all(&head)?;
        w.write_all(&row.iter().map(|&v| v as u8).collect::<Vec<_>>())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_ivecs(path: impl AsRef<Path>, data: &IntMatrix) -> Result<()> {
    if data.values.len() != data.rows * data.dims || data.dims == 0 {
        return Err(Error::contract(
            "integer matrix shape does not match its values",
        ));
    }
    let mut w = BufWriter::new(File::create(path)?);
    let head = dim_prefix(data.dims)?;
    for i in 0..data.rows {
        w.write_all(&head)?;
        for v in data.row(i) {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn to_u32(v: usize, what: &str) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::Capacity(format!("{what}={v} does not fit 32 bits")))
}

fn model_text(model: &Model) -> String {
    let mut text = model.config.to_kv_text();
    let history: Vec<String> = model
        .history
        .iter()
        .map(|(i, d)| format!("{i}:{d:?}"))
        .collect();
    text.push_str(HISTORY_KEY);
    text.push('=');
    text.push_str(&history.join(","));
    text.push('\n');
    text
}

fn parse_history(text: &str) -> Result<Vec<(usize, f64)>> {
    let Some(line) = text.lines().find_map(|l| {
        l.strip_prefix(HISTORY_KEY)
            .and_then(|r| r.strip_prefix('='))
    }) else {
        return Ok(Vec::new());
    };
    line.split(',')
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (i, d) = item
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("bad history entry `{item}`")))?;
            let i = i
                .parse()
                .map_err(|_| Error::Config(format!("bad history entry `{item}`")))?;
            let d = d
                .parse()
                .map_err(|_| Error::Config(format!("bad history entry `{item}`")))?;
            Ok((i, d))
        })
        .collect()
}

pub fn write_model(path: impl AsRef<Path>, model: &Model) -> Result<()> {
    let cb = &model.codebooks;
    let text = model_text(model);
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MODEL_MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    for (v, what) in [
        (cb.num_dicts(), "C"),
        (cb.num_words(), "K"),
        (cb.dims(), "P"),
    ] {
        w.write_all(&to_u32(v, what)?.to_le_bytes())?;
    }
    w.write_all(&to_u32(text.len(), "config length")?.to_le_bytes())?;
    w.write_all(text.as_bytes())?;
    for v in cb.as_slice() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn check_header<R: Read>(r: &mut Tracked<R>, magic: &[u8; 8]) -> Result<()> {
    let mut m = [0u8; 8];
    r.fill(&mut m)?;
    if &m != magic {
        return Err(Error::format(0, "bad magic"));
    }
    let at = r.offset;
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::format(
            at,
            format!("unsupported version {version}, expected {FORMAT_VERSION}"),
        ));
    }
    Ok(())
}

pub fn read_model(path: impl AsRef<Path>) -> Result<Model> {
    let mut r = open(path.as_ref())?;
    check_header(&mut r, MODEL_MAGIC)?;
    let shape_at = r.offset;
    let (c, k, p) = (r.u32()? as usize, r.u32()? as usize, r.u32()? as usize);
    if c == 0 || k == 0 || p == 0 {
        return Err(Error::format(
            shape_at,
            format!("invalid shape C={c} K={k} P={p}"),
        ));
    }
    let text_len = r.u32()? as usize;
    let text_at = r.offset;
    let mut text = vec![0u8; text_len];
    r.fill(&mut text)?;
    let text =
        String::from_utf8(text).map_err(|_| Error::format(text_at, "config text is not UTF-8"))?;
    let config = TrainConfig::from_kv_text(&text)?;
    if config.num_dicts != c || config.num_words != k {
        return Err(Error::format(
            text_at,
            format!(
                "config says C={} K={} but the header says C={c} K={k}",
                config.num_dicts, config.num_words
            ),
        ));
    }
    let history = parse_history(&text)?;
    let count = c
        .checked_mul(k)
        .and_then(|v| v.checked_mul(p))
        .ok_or_else(|| Error::format(shape_at, "shape overflows"))?;
    let words_at = r.offset;
    let mut raw = vec![
        0u8;
        count
            .checked_mul(4)
            .ok_or_else(|| Error::format(shape_at, "shape overflows"))?
    ];
    r.fill(&mut raw)?;
    r.expect_end()?;
    let words: Vec<f32> = raw
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    let codebooks =
        CodebookSet::new(c, k, p, words).map_err(|e| Error::format(words_at, e.to_string()))?;
    Ok(Model {
        codebooks,
        config,
        history,
    })
}

pub fn write_codes(path: impl AsRef<Path>, codes: &CodeMatrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(CODES_MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(codes.rows() as u64).to_le_bytes())?;
    w.write_all(&to_u32(codes.num_dicts(), "C")?.to_le_bytes())?;
    w.write_all(&to_u32(codes.num_words(), "K")?.to_le_bytes())?;
    w.write_all(&codes.to_le_bytes())?;
    w.flush()?;
    Ok(())
}

pub fn read_codes(path: impl AsRef<Path>) -> Result<CodeMatrix> {
    let mut r = open(path.as_ref())?;
    check_header(&mut r, CODES_MAGIC)?;
    let shape_at = r.offset;
    let n = usize::try_from(r.u64()?).map_err(|_| Error::format(shape_at, "N too large"))?;
    let (c, k) = (r.u32()? as usize, r.u32()? as usize);
    if c == 0 || k == 0 || k > CodeMatrix::MAX_WORDS {
        return Err(Error::format(
            shape_at,
            format!("invalid shape C={c} K={k}"),
        ));
    }
    let width = if k <= 256 { 1 } else { 2 };
    let entries = n
        .checked_mul(c)
        .ok_or_else(|| Error::format(shape_at, "shape overflows"))?;
    let body_at = r.offset;
    let mut raw = vec![0u8; entries * width];
    r.fill(&mut raw)?;
    r.expect_end()?;
    let indices: Vec<usize> = if width == 1 {
        raw.iter().map(|&b| b as usize).collect()
    } else {
        raw.chunks_exact(2)
            .map(|b| u16::from_le_bytes([b[0], b[1]]) as usize)
            .collect()
    };
    if let Some(pos) = indices.iter().position(|&v| v >= k) {
        return Err(Error::format(
            body_at + (pos * width) as u64,
            format!("code {} out of range for K={k}", indices[pos]),
        ));
    }
    CodeMatrix::from_indices(n, c, k, &indices)
}
