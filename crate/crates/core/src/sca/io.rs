//! Trace files.
//!
//! Text: a header line `ntraces,m,true_key_hex,leak_points` (leak points
//! separated by `;`, an empty key field for an unknown key), then one line per
//! trace holding the plaintext byte in hex followed by `m` samples.
//!
//! Binary (little endian): a 32-byte header `b"SCATRACE"`, `ntraces: u64`,
//! `m: u64`, `has_key: u8`, `key: u8`, two zero bytes, `n_leak: u32`; then
//! `n_leak` leak points as `u64`, `ntraces` plaintext bytes and the samples as
//! row-major `f64`.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use crate::channel::parse_f64;
use crate::error::{Error, Result};
use crate::sca::traces::TraceSet;

pub const BINARY_MAGIC: &[u8; 8] = b"SCATRACE";
const BINARY_HEADER_LEN: usize = 32;

pub fn write_text(set: &TraceSet) -> String {
    let key = set.true_key.map(|k| format!("{k:02x}")).unwrap_or_default();
    let leaks: Vec<String> = set.leak_points().iter().map(|i| i.to_string()).collect();
    let mut out = format!("{},{},{},{}\n", set.n_traces(), set.m(), key, leaks.join(";"));
    for t in 0..set.n_traces() {
        let _ = write!(out, "{:02x}", set.plaintexts()[t]);
        for x in set.row(t) {
            let _ = write!(out, ",{x}");
        }
        out.push('\n');
    }
    out
}

fn parse_usize(field: &str, line: usize, what: &str) -> Result<usize> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::parse(line, format!("{what} `{field}` is not a nonnegative integer")))
}

fn parse_hex_byte(field: &str, line: usize) -> Result<u8> {
    u8::from_str_radix(field.trim(), 16).map_err(|_| Error::parse(line, format!("`{field}` is not a hex byte")))
}

pub fn read_text<R: Read>(reader: R) -> Result<TraceSet> {
    let mut lines = BufReader::new(reader).lines();
    let header = match lines.next() {
        Some(line) => line.map_err(|e| Error::parse(1, e.to_string()))?,
        None => return Err(Error::parse(1, "missing header line")),
    };
    let fields: Vec<&str> = header.trim().split(',').collect();
    if fields.len() != 4 {
        return Err(Error::parse(1, "header must be `ntraces,m,true_key_hex,leak_points`"));
    }
    let n_traces = parse_usize(fields[0], 1, "ntraces")?;
    let m = parse_usize(fields[1], 1, "m")?;
    let true_key = match fields[2].trim() {
        "" => None,
        k => Some(parse_hex_byte(k, 1)?),
    };
    let leak_points = fields[3]
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_usize(s, 1, "leak point"))
        .collect::<Result<Vec<_>>>()?;

    let mut samples = Vec::with_capacity(n_traces * m);
    let mut plaintexts = Vec::with_capacity(n_traces);
    for (k, line) in lines.enumerate() {
        let line_no = k + 2;
        let line = line.map_err(|e| Error::parse(line_no, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        if plaintexts.len() == n_traces {
            return Err(Error::DimensionMismatch {
                what: "trace rows",
                expected: n_traces,
                found: n_traces + 1,
            });
        }
        let mut fields = line.split(',');
        plaintexts.push(parse_hex_byte(fields.next().unwrap_or(""), line_no)?);
        let before = samples.len();
        for f in fields {
            samples.push(parse_f64(f, line_no)?);
        }
        if samples.len() - before != m {
            return Err(Error::DimensionMismatch {
                what: "samples per trace row",
                expected: m,
                found: samples.len() - before,
            });
        }
    }
    if plaintexts.is_empty() && n_traces > 0 {
        return Err(Error::parse(2, "header is not followed by any trace rows"));
    }
    if plaintexts.len() != n_traces {
        return Err(Error::DimensionMismatch {
            what: "trace rows",
            expected: n_traces,
            found: plaintexts.len(),
        });
    }
    TraceSet::new(samples, m, plaintexts, true_key, leak_points)
}

pub fn write_binary(set: &TraceSet) -> Vec<u8> {
    let mut out = Vec::with_capacity(BINARY_HEADER_LEN + set.samples().len() * 8);
    out.extend_from_slice(BINARY_MAGIC);
    out.extend_from_slice(&(set.n_traces() as u64).to_le_bytes());
    out.extend_from_slice(&(set.m() as u64).to_le_bytes());
    out.push(u8::from(set.true_key.is_some()));
    out.push(set.true_key.unwrap_or(0));
    out.extend_from_slice(&[0, 0]);
    out.extend_from_slice(&(set.leak_points().len() as u32).to_le_bytes());
    for &i in set.leak_points() {
        out.extend_from_slice(&(i as u64).to_le_bytes());
    }
    out.extend_from_slice(set.plaintexts());
    for x in set.samples() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

fn u64_at(bytes: &[u8], at: usize) -> u64 {
    u64::from_le_bytes(bytes[at..at + 8].try_into().expect("8-byte slice"))
}

pub fn read_binary(bytes: &[u8]) -> Result<TraceSet> {
    if bytes.len() < BINARY_HEADER_LEN || &bytes[..8] != BINARY_MAGIC {
        return Err(Error::parse(1, "missing SCATRACE header"));
    }
    let n_traces = u64_at(bytes, 8) as usize;
    let m = u64_at(bytes, 16) as usize;
    let true_key = (bytes[24] != 0).then_some(bytes[25]);
    let n_leak = u32::from_le_bytes(bytes[28..32].try_into().expect("4-byte slice")) as usize;
    let body = &bytes[BINARY_HEADER_LEN..];
    let prefix = n_leak * 8 + n_traces;
    let expected = n_traces
        .checked_mul(m)
        .and_then(|cells| cells.checked_mul(8))
        .and_then(|b| b.checked_add(prefix))
        .ok_or_else(|| Error::parse(1, "binary trace dimensions overflow"))?;
    if body.len() != expected {
        return Err(Error::DimensionMismatch {
            what: "binary trace payload bytes",
            expected,
            found: body.len(),
        });
    }
    let leak_points = (0..n_leak).map(|k| u64_at(body, 8 * k) as usize).collect();
    let plaintexts = body[n_leak * 8..prefix].to_vec();
    let samples = body[prefix..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    TraceSet::new(samples, m, plaintexts, true_key, leak_points)
}

/// Reads either format, recognizing the binary one by its magic.
pub fn load(path: impl AsRef<Path>) -> Result<TraceSet> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(BINARY_MAGIC) {
        read_binary(&bytes)
    } else {
        read_text(bytes.as_slice())
    }
}

/// Writes the binary format when the extension is `.bin`, text otherwise.
pub fn save(set: &TraceSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = match path.extension().and_then(|e| e.to_str()) {
        Some("bin") => write_binary(set),
        _ => write_text(set).into_bytes(),
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
