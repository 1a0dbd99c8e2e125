//! Text formats for frames, symbols and multipliers.
//!
//! Frames are JSON objects `{"dim": d, "count": N, "entries": [...]}` with
//! `d` rows of `N` complex entries, each written as `[re, im]`. Symbols are
//! `{"count": N, "values": [[re, im], ...]}`. Every float is written with
//! 17 significant digits so a save/load cycle reproduces the bits exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::frames::Frame;
use crate::numeric::{Mat, Tol, C64};
use crate::symbols::Symbol;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameDoc {
    dim: usize,
    count: usize,
    entries: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SymbolDoc {
    count: usize,
    values: Vec<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MultiplierDoc {
    symbol: SymbolDoc,
    phi: FrameDoc,
    psi: FrameDoc,
}

fn fmt_f64(out: &mut String, x: f64) {
    if x.is_finite() {
        write!(out, "{x:.16e}").unwrap();
    } else {
        // JSON has no encoding for these; loading rejects them as non-finite.
        out.push_str("null");
    }
}

fn fmt_complex(out: &mut String, z: C64) {
    out.push('[');
    fmt_f64(out, z.re);
    out.push_str(", ");
    fmt_f64(out, z.im);
    out.push(']');
}

fn frame_json(frame: &Frame, indent: &str) -> String {
    let t = frame.synthesis_matrix();
    let mut out = String::new();
    writeln!(out, "{{").unwrap();
    writeln!(out, "{indent}  \"dim\": {},", t.nrows()).unwrap();
    writeln!(out, "{indent}  \"count\": {},", t.ncols()).unwrap();
    writeln!(out, "{indent}  \"entries\": [").unwrap();
    for r in 0..t.nrows() {
        write!(out, "{indent}    [").unwrap();
        for c in 0..t.ncols() {
            if c > 0 {
                out.push_str(", ");
            }
            fmt_complex(&mut out, t[(r, c)]);
        }
        out.push(']');
        if r + 1 < t.nrows() {
            out.push(',');
        }
        out.push('\n');
    }
    writeln!(out, "{indent}  ]").unwrap();
    write!(out, "{indent}}}").unwrap();
    out
}

fn symbol_json(symbol: &Symbol, indent: &str) -> String {
    let mut out = String::new();
    writeln!(out, "{{").unwrap();
    writeln!(out, "{indent}  \"count\": {},", symbol.len()).unwrap();
    write!(out, "{indent}  \"values\": [").unwrap();
    for (k, z) in symbol.values().iter().enumerate() {
        if k > 0 {
            out.push_str(", ");
        }
        fmt_complex(&mut out, *z);
    }
    writeln!(out, "]").unwrap();
    write!(out, "{indent}}}").unwrap();
    out
}

pub fn frame_to_string(frame: &Frame) -> String {
    let mut s = frame_json(frame, "");
    s.push('\n');
    s
}

pub fn symbol_to_string(symbol: &Symbol) -> String {
    let mut s = symbol_json(symbol, "");
    s.push('\n');
    s
}

/// A multiplier is stored as its three constituents.
pub fn multiplier_to_string(symbol: &Symbol, phi: &Frame, psi: &Frame) -> String {
    format!(
        "{{\n  \"symbol\": {},\n  \"phi\": {},\n  \"psi\": {}\n}}\n",
        symbol_json(symbol, "  "),
        frame_json(phi, "  "),
        frame_json(psi, "  ")
    )
}

fn parse<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn frame_from_doc(doc: FrameDoc, tol: &Tol) -> Result<Frame> {
    if doc.entries.len() != doc.dim {
        return Err(Error::Format(format!(
            "expected {} rows, found {}",
            doc.dim,
            doc.entries.len()
        )));
    }
    if let Some((r, row)) = doc
        .entries
        .iter()
        .enumerate()
        .find(|(_, row)| row.len() != doc.count)
    {
        return Err(Error::Format(format!(
            "row {r} has {} entries, expected {}",
            row.len(),
            doc.count
        )));
    }
    let t = Mat::from_fn(doc.dim, doc.count, |r, c| {
        let [re, im] = doc.entries[r][c];
        C64::new(re, im)
    });
    Frame::new(t, tol)
}

fn symbol_from_doc(doc: SymbolDoc) -> Result<Symbol> {
    if doc.values.len() != doc.count {
        return Err(Error::Format(format!(
            "expected {} symbol values, found {}",
            doc.count,
            doc.values.len()
        )));
    }
    Symbol::new(
        doc.values
            .iter()
            .map(|&[re, im]| C64::new(re, im))
            .collect(),
    )
}

pub fn frame_from_str(text: &str, tol: &Tol) -> Result<Frame> {
    frame_from_doc(parse(text)?, tol)
}

pub fn symbol_from_str(text: &str) -> Result<Symbol> {
    symbol_from_doc(parse(text)?)
}

pub fn multiplier_from_str(text: &str, tol: &Tol) -> Result<(Symbol, Frame, Frame)> {
    let doc: MultiplierDoc = parse(text)?;
    Ok((
        symbol_from_doc(doc.symbol)?,
        frame_from_doc(doc.phi, tol)?,
        frame_from_doc(doc.psi, tol)?,
    ))
}

pub fn save_frame(frame: &Frame, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, frame_to_string(frame))?;
    Ok(())
}

pub fn load_frame(path: impl AsRef<Path>, tol: &Tol) -> Result<Frame> {
    frame_from_str(&fs::read_to_string(path)?, tol)
}

pub fn save_symbol(symbol: &Symbol, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, symbol_to_string(symbol))?;
    Ok(())
}

pub fn load_symbol(path: impl AsRef<Path>) -> Result<Symbol> {
    symbol_from_str(&fs::read_to_string(path)?)
}
