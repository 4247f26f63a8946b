//! Versioned text formats for schemes and postselection notes.
//!
//! Scheme file:
//! ```text
//! qmoney-scheme 1
//! n 2
//! m 1
//! l 1
//! epsilon 0.5
//! seed 7            (or `seed none`)
//! register 0
//! +XZ
//! secret            (optional section)
//! register 0
//! +ZI
//! +IZ
//! end
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::money::{MoneyScheme, SchemeParams, SecretKey};
use crate::pauli::PauliOp;
use crate::postselect::{make_label_scheme, LabelScheme};
use crate::stabilizer::StabilizerState;

pub const SCHEME_MAGIC: &str = "qmoney-scheme";
pub const SCHEME_VERSION: u32 = 1;
pub const NOTE_MAGIC: &str = "qmoney-note";
pub const NOTE_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct SchemeFile {
    pub scheme: MoneyScheme,
    pub secret: Option<SecretKey>,
    /// Seed the scheme was generated from, when known.
    pub seed: Option<u64>,
}

pub fn format_scheme(file: &SchemeFile) -> String {
    let p = &file.scheme.params;
    let mut out = String::new();
    let _ = writeln!(out, "{SCHEME_MAGIC} {SCHEME_VERSION}");
    let _ = writeln!(out, "n {}\nm {}\nl {}\nepsilon {}", p.n, p.m, p.l, p.epsilon);
    match file.seed {
        Some(s) => {
            let _ = writeln!(out, "seed {s}");
        }
        None => out.push_str("seed none\n"),
    }
    for (i, row) in file.scheme.table.iter().enumerate() {
        let _ = writeln!(out, "register {i}");
        for op in row {
            let _ = writeln!(out, "{op}");
        }
    }
    if let Some(secret) = &file.secret {
        out.push_str("secret\n");
        for (i, st) in secret.states.iter().enumerate() {
            let _ = writeln!(out, "register {i}");
            for g in st.generators() {
                let _ = writeln!(out, "{g}");
            }
        }
    }
    out.push_str("end\n");
    out
}

pub fn save_scheme(path: &Path, file: &SchemeFile) -> Result<()> {
    fs::write(path, format_scheme(file))?;
    Ok(())
}

pub fn load_scheme(path: &Path) -> Result<SchemeFile> {
    parse_scheme(&fs::read_to_string(path)?)
}

/// Line cursor that reports 1-based line numbers.
struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines { inner: text.lines().enumerate(), last: 0 }
    }

    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        match self.inner.next() {
            Some((i, l)) => {
                self.last = i + 1;
                Ok((i + 1, l.trim_end()))
            }
            None => Err(Error::Parse { line: self.last + 1, msg: "unexpected end of file".into() }),
        }
    }

    fn keyed(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (line, text) = self.next_line()?;
        match text.split_once(' ') {
            Some((k, v)) if k == key => Ok((line, v.trim())),
            _ => Err(Error::Parse { line, msg: format!("expected `{key} <value>`, found `{text}`") }),
        }
    }

    fn keyed_parse<T: std::str::FromStr>(&mut self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let (line, v) = self.keyed(key)?;
        v.parse().map_err(|e: T::Err| Error::Parse { line, msg: format!("bad {key}: {e}") })
    }

    fn expect(&mut self, literal: &str) -> Result<()> {
        let (line, text) = self.next_line()?;
        if text == literal {
            Ok(())
        } else {
            Err(Error::Parse { line, msg: format!("expected `{literal}`, found `{text}`") })
        }
    }
}

fn check_header(lines: &mut Lines, magic: &str, expected: u32) -> Result<()> {
    let (line, v) = lines.keyed(magic)?;
    let found: u32 = v.parse().map_err(|_| Error::Parse { line, msg: format!("bad version `{v}`") })?;
    if found != expected {
        return Err(Error::Version { found, expected });
    }
    Ok(())
}

fn parse_op(lines: &mut Lines, n: usize) -> Result<PauliOp> {
    let (line, text) = lines.next_line()?;
    let op: PauliOp = text.parse().map_err(|e| Error::Parse { line, msg: format!("{e}") })?;
    if op.num_qubits() != n {
        return Err(Error::Parse { line, msg: format!("operator has {} qubits, expected {n}", op.num_qubits()) });
    }
    Ok(op)
}

fn expect_register(lines: &mut Lines, i: usize) -> Result<()> {
    lines.expect(&format!("register {i}"))
}

pub fn parse_scheme(text: &str) -> Result<SchemeFile> {
    let mut lines = Lines::new(text);
    check_header(&mut lines, SCHEME_MAGIC, SCHEME_VERSION)?;
    let n: usize = lines.keyed_parse("n")?;
    let m: usize = lines.keyed_parse("m")?;
    let l: usize = lines.keyed_parse("l")?;
    let epsilon: f64 = lines.keyed_parse("epsilon")?;
    let (seed_line, seed_text) = lines.keyed("seed")?;
    let seed = match seed_text {
        "none" => None,
        s => Some(s.parse().map_err(|_| Error::Parse { line: seed_line, msg: format!("bad seed `{s}`") })?),
    };
    let params = SchemeParams::new(n, m, l, epsilon).map_err(|e| Error::Parse { line: seed_line, msg: e.to_string() })?;
    let mut table = Vec::with_capacity(l);
    for i in 0..l {
        expect_register(&mut lines, i)?;
        table.push((0..m).map(|_| parse_op(&mut lines, n)).collect::<Result<Vec<_>>>()?);
    }
    let scheme = MoneyScheme::new(params, table).map_err(|e| Error::Parse { line: lines.last, msg: e.to_string() })?;
    let (line, text) = lines.next_line()?;
    let secret = match text {
        "end" => return Ok(SchemeFile { scheme, secret: None, seed }),
        "secret" => {
            let mut states = Vec::with_capacity(l);
            for i in 0..l {
                expect_register(&mut lines, i)?;
                let start = lines.last + 1;
                let gens = (0..n).map(|_| parse_op(&mut lines, n)).collect::<Result<Vec<_>>>()?;
                states.push(
                    StabilizerState::from_generators(gens)
                        .map_err(|e| Error::Parse { line: start, msg: e.to_string() })?,
                );
            }
            lines.expect("end")?;
            SecretKey { states }
        }
        other => return Err(Error::Parse { line, msg: format!("expected `secret` or `end`, found `{other}`") }),
    };
    Ok(SchemeFile { scheme, secret: Some(secret), seed })
}

/// A postselection note: the label plus enough to rebuild its scheme. The
/// statevector is recomputed on load.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NoteFile {
    pub n: usize,
    pub s: usize,
    pub d: usize,
    pub seed: u64,
    pub label: u64,
}

impl NoteFile {
    pub fn scheme(&self) -> Result<LabelScheme> {
        make_label_scheme(self.n, self.s, self.d, self.seed)
    }
}

/// Label bits written least significant first.
fn label_bits(label: u64, s: usize) -> String {
    (0..s).map(|j| if (label >> j) & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn format_note(note: &NoteFile) -> String {
    format!(
        "{NOTE_MAGIC} {NOTE_VERSION}\nn {}\ns {}\nd {}\nseed {}\nlabel {}\nend\n",
        note.n,
        note.s,
        note.d,
        note.seed,
        label_bits(note.label, note.s)
    )
}

pub fn parse_note(text: &str) -> Result<NoteFile> {
    let mut lines = Lines::new(text);
    check_header(&mut lines, NOTE_MAGIC, NOTE_VERSION)?;
    let n = lines.keyed_parse("n")?;
    let s: usize = lines.keyed_parse("s")?;
    let d = lines.keyed_parse("d")?;
    let seed = lines.keyed_parse("seed")?;
    let (line, text) = lines.next_line()?;
    let bits = text
        .strip_prefix("label")
        .map(str::trim)
        .ok_or_else(|| Error::Parse { line, msg: format!("expected `label <bits>`, found `{text}`") })?;
    if bits.len() != s || !bits.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(Error::Parse { line, msg: format!("label must be {s} binary digits, found `{bits}`") });
    }
    let label = bits.bytes().enumerate().fold(0u64, |acc, (j, b)| acc | ((b == b'1') as u64) << j);
    lines.expect("end")?;
    Ok(NoteFile { n, s, d, seed, label })
}

pub fn save_note(path: &Path, note: &NoteFile) -> Result<()> {
    fs::write(path, format_note(note))?;
    Ok(())
}

pub fn load_note(path: &Path) -> Result<NoteFile> {
    parse_note(&fs::read_to_string(path)?)
}
