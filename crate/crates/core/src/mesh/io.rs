//! Plain-text mesh format.
//!
//! ```text
//! mesh2d 1
//! nodes <count>
//! <x> <y>
//! cells <count>
//! <v0> <v1> <v2>
//! boundary <count>      # optional
//! <va> <vb> <tag>
//! ```
//!
//! Indices are zero-based; `#` starts a comment.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use super::{MeshError, RawMesh};

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
            last: 0,
        }
    }

    /// Next non-empty line with comments stripped, split into tokens.
    fn next_tokens(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            let content = line.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = content.split_whitespace().collect();
            if !tokens.is_empty() {
                return Some((i + 1, tokens));
            }
        }
        None
    }

    fn expect_tokens(&mut self, what: &str) -> Result<(usize, Vec<&'a str>), MeshError> {
        self.next_tokens().ok_or_else(|| MeshError::Parse {
            line: self.last + 1,
            msg: format!("unexpected end of file, expected {what}"),
        })
    }
}

fn parse_num<T: FromStr>(tok: &str, line: usize, what: &str) -> Result<T, MeshError> {
    tok.parse().map_err(|_| MeshError::Parse {
        line,
        msg: format!("invalid {what} '{tok}'"),
    })
}

fn section_count(tokens: &[&str], line: usize, name: &str) -> Result<usize, MeshError> {
    if tokens.len() != 2 || tokens[0] != name {
        return Err(MeshError::Parse {
            line,
            msg: format!("expected '{name} <count>', found '{}'", tokens.join(" ")),
        });
    }
    parse_num(tokens[1], line, "count")
}

fn arity(tokens: &[&str], n: usize, line: usize, what: &str) -> Result<(), MeshError> {
    if tokens.len() != n {
        return Err(MeshError::Parse {
            line,
            msg: format!("expected {n} fields for {what}, found {}", tokens.len()),
        });
    }
    Ok(())
}

/// Parses the text format and validates the result.
pub fn parse_mesh(text: &str) -> Result<RawMesh, MeshError> {
    let mut lines = Lines::new(text);
    let (line, header) = lines.expect_tokens("header")?;
    if header != ["mesh2d", "1"] {
        return Err(MeshError::Parse {
            line,
            msg: "expected header 'mesh2d 1'".into(),
        });
    }

    let (line, toks) = lines.expect_tokens("nodes section")?;
    let n_nodes = section_count(&toks, line, "nodes")?;
    let mut nodes = Vec::with_capacity(n_nodes);
    for _ in 0..n_nodes {
        let (line, toks) = lines.expect_tokens("node coordinates")?;
        arity(&toks, 2, line, "a node")?;
        let x: f64 = parse_num(toks[0], line, "coordinate")?;
        let y: f64 = parse_num(toks[1], line, "coordinate")?;
        if !x.is_finite() || !y.is_finite() {
            return Err(MeshError::Parse {
                line,
                msg: "non-finite coordinate".into(),
            });
        }
        nodes.push([x, y]);
    }

    let (line, toks) = lines.expect_tokens("cells section")?;
    let n_cells = section_count(&toks, line, "cells")?;
    let mut cells = Vec::with_capacity(n_cells);
    for _ in 0..n_cells {
        let (line, toks) = lines.expect_tokens("cell indices")?;
        arity(&toks, 3, line, "a cell")?;
        let mut cell = [0usize; 3];
        for (k, t) in toks.iter().enumerate() {
            cell[k] = parse_num(t, line, "vertex index")?;
        }
        cells.push(cell);
    }

    let mut tags = BTreeMap::new();
    if let Some((line, toks)) = lines.next_tokens() {
        let n_tags = section_count(&toks, line, "boundary")?;
        for _ in 0..n_tags {
            let (line, toks) = lines.expect_tokens("boundary face")?;
            arity(&toks, 3, line, "a boundary face")?;
            let a: usize = parse_num(toks[0], line, "vertex index")?;
            let b: usize = parse_num(toks[1], line, "vertex index")?;
            tags.insert([a.min(b), a.max(b)], toks[2].to_string());
        }
        if let Some((line, _)) = lines.next_tokens() {
            return Err(MeshError::Parse {
                line,
                msg: "trailing content after boundary section".into(),
            });
        }
    }

    RawMesh::with_tags(nodes, cells, tags)
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<RawMesh, MeshError> {
    let text = std::fs::read_to_string(path)?;
    parse_mesh(&text)
}

/// Writes `raw` with shortest round-trip decimals, so that reloading is
/// bit-exact.
pub fn write_mesh<W: Write>(raw: &RawMesh, mut w: W) -> std::io::Result<()> {
    writeln!(w, "mesh2d 1")?;
    writeln!(w, "nodes {}", raw.nodes.len())?;
    for p in &raw.nodes {
        writeln!(w, "{:?} {:?}", p[0], p[1])?;
    }
    writeln!(w, "cells {}", raw.cells.len())?;
    for c in &raw.cells {
        writeln!(w, "{} {} {}", c[0], c[1], c[2])?;
    }
    if !raw.boundary_tags.is_empty() {
        writeln!(w, "boundary {}", raw.boundary_tags.len())?;
        for (k, tag) in &raw.boundary_tags {
            writeln!(w, "{} {} {}", k[0], k[1], tag)?;
        }
    }
    Ok(())
}

pub fn save_mesh(raw: &RawMesh, path: impl AsRef<Path>) -> Result<(), MeshError> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_mesh(raw, &mut w)?;
    w.flush()?;
    Ok(())
}
