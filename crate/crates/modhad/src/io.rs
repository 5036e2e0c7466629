//! Bit-exact text formats.
//!
//! Matrix files: a header `MH <n> <m>` (with `m = 0` for exact Hadamard
//! matrices), then `n` rows of `n` characters over `+`/`-`, every line
//! newline-terminated, no trailing bytes. Design files are the same shape
//! with header `DES <v> <k> <lambda> <m>` and rows over `0`/`1`.
//! Certificates serialize to a single-line JSON document.
//!
//! Parsers are strict and report the line and column of the first
//! offending character.

use std::fmt;
use thiserror::Error;

use crate::design::{DesignParams, ModularDesign};
use crate::matrix::{Modulus, SignMatrix};
use crate::solver::Certificate;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, column: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }
}

/// Renders a matrix in the `MH` text format.
pub fn write_matrix(h: &SignMatrix, m: Modulus) -> String {
    let n = h.order();
    let mut out = String::with_capacity(n * (n + 1) + 16);
    let _ = fmt::Write::write_fmt(&mut out, format_args!("MH {n} {m}\n"));
    for i in 0..n {
        for j in 0..n {
            out.push(if h.entry(i, j) == 1 { '+' } else { '-' });
        }
        out.push('\n');
    }
    out
}

/// Renders a design in the `DES` text format.
pub fn write_design(d: &ModularDesign) -> String {
    let p = d.params();
    let v = p.v;
    let mut out = String::with_capacity(v * (v + 1) + 24);
    let _ = fmt::Write::write_fmt(
        &mut out,
        format_args!("DES {} {} {} {}\n", p.v, p.k, p.lambda, p.m),
    );
    for i in 0..v {
        for j in 0..v {
            out.push(if d.matrix().entry(i, j) == 1 {
                '1'
            } else {
                '0'
            });
        }
        out.push('\n');
    }
    out
}

/// Single-line JSON rendering of a certificate, newline-terminated.
pub fn write_certificate(c: &Certificate) -> String {
    let mut s = serde_json::to_string(c).expect("certificates serialize");
    s.push('\n');
    s
}

/// Parses certificate JSON.
pub fn parse_certificate(text: &str) -> Result<Certificate, ParseError> {
    serde_json::from_str(text).map_err(|e| ParseError::new(e.line(), e.column(), e.to_string()))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    line: usize,
    column: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Cursor<'a> {
        Cursor {
            bytes: text.as_bytes(),
            pos: 0,
            line: 1,
            column: 1,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(b)
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::new(self.line, self.column, message)
    }

    fn expect_literal(&mut self, literal: &str) -> Result<(), ParseError> {
        for want in literal.bytes() {
            match self.peek() {
                Some(got) if got == want => {
                    self.bump();
                }
                got => {
                    return Err(self.error(format!(
                        "expected {:?}, found {}",
                        want as char,
                        describe(got)
                    )))
                }
            }
        }
        Ok(())
    }

    fn expect_integer(&mut self, what: &str) -> Result<u64, ParseError> {
        let mut digits = 0usize;
        let mut value: u64 = 0;
        while let Some(b @ b'0'..=b'9') = self.peek() {
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add((b - b'0') as u64))
                .ok_or_else(|| self.error(format!("{what} is too large")))?;
            digits += 1;
            self.bump();
        }
        if digits == 0 {
            return Err(self.error(format!(
                "expected {what} (an integer), found {}",
                describe(self.peek())
            )));
        }
        Ok(value)
    }

    fn expect_newline(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Some(b'\n') => {
                self.bump();
                Ok(())
            }
            got => Err(self.error(format!("expected end of line, found {}", describe(got)))),
        }
    }

    fn expect_eof(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            got => Err(self.error(format!("expected end of file, found {}", describe(got)))),
        }
    }
}

fn describe(b: Option<u8>) -> String {
    match b {
        None => "end of file".to_string(),
        Some(b'\n') => "end of line".to_string(),
        Some(other) => format!("{:?}", other as char),
    }
}

/// Parses the `MH` text format, returning the matrix and the modulus
/// recorded in the header.
pub fn parse_matrix(text: &str) -> Result<(SignMatrix, Modulus), ParseError> {
    let mut cur = Cursor::new(text);
    cur.expect_literal("MH ")?;
    let n = cur.expect_integer("the order n")?;
    if n == 0 {
        return Err(cur.error("the order n must be >= 1"));
    }
    cur.expect_literal(" ")?;
    let m = cur.expect_integer("the modulus m")?;
    if m == 1 {
        return Err(cur.error("the modulus must be 0 (exact) or >= 2"));
    }
    cur.expect_newline()?;
    let n = n as usize;
    let mut entries: Vec<Vec<i32>> = Vec::with_capacity(n);
    for _ in 0..n {
        let mut row = Vec::with_capacity(n);
        for _ in 0..n {
            match cur.peek() {
                Some(b'+') => {
                    row.push(1);
                    cur.bump();
                }
                Some(b'-') => {
                    row.push(-1);
                    cur.bump();
                }
                got => {
                    return Err(cur.error(format!("expected '+' or '-', found {}", describe(got))))
                }
            }
        }
        cur.expect_newline()?;
        entries.push(row);
    }
    cur.expect_eof()?;
    let h = SignMatrix::from_rows(&entries).expect("rows were validated entry by entry");
    Ok((h, Modulus::new(m)))
}

/// Parses the `DES` text format and re-verifies the design conditions.
pub fn parse_design(text: &str) -> Result<ModularDesign, ParseError> {
    let mut cur = Cursor::new(text);
    cur.expect_literal("DES ")?;
    let v = cur.expect_integer("the order v")?;
    cur.expect_literal(" ")?;
    let k = cur.expect_integer("k")?;
    cur.expect_literal(" ")?;
    let lambda = cur.expect_integer("lambda")?;
    cur.expect_literal(" ")?;
    let m = cur.expect_integer("the modulus m")?;
    cur.expect_newline()?;
    let params = DesignParams::new(v as usize, k, lambda, m)
        .map_err(|e| ParseError::new(1, 5, e.to_string()))?;
    if k >= m || lambda >= m {
        return Err(ParseError::new(
            1,
            5,
            format!("k and lambda must be canonical residues mod {m}"),
        ));
    }
    let v = v as usize;
    let mut rows: Vec<Vec<u8>> = Vec::with_capacity(v);
    for _ in 0..v {
        let mut row = Vec::with_capacity(v);
        for _ in 0..v {
            match cur.peek() {
                Some(b'0') => {
                    row.push(0);
                    cur.bump();
                }
                Some(b'1') => {
                    row.push(1);
                    cur.bump();
                }
                got => {
                    return Err(cur.error(format!("expected '0' or '1', found {}", describe(got))))
                }
            }
        }
        cur.expect_newline()?;
        rows.push(row);
    }
    cur.expect_eof()?;
    let matrix = crate::design::BinaryMatrix::from_fn(v, |i, j| rows[i][j]);
    ModularDesign::new(matrix, params).map_err(|e| ParseError::new(1, 1, e.to_string()))
}
