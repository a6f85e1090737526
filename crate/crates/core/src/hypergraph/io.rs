//! Hyperedge list files.
//!
//! ```text
//! # comment
//! k=3 directed=0 n=9
//! 1 2 3
//! 4 5 6 2.5
//! ```
//!
//! The header is the first non-comment line; `n` is optional and defaults to
//! the largest vertex id. Vertices are 1-based, the trailing weight defaults
//! to 1. Directed lines list tails first and the head last.

use std::io::{BufRead, Write};

use super::UniformHypergraph;
use crate::error::{Error, Result};

struct Header {
    k: usize,
    directed: bool,
    n: Option<usize>,
}

fn parse_header(line: &str, lineno: usize) -> Result<Header> {
    let err = |msg: String| Error::Parse { line: lineno, msg };
    let (mut k, mut directed, mut n) = (None, None, None);
    for tok in line.split_whitespace() {
        let (key, value) =
            tok.split_once('=').ok_or_else(|| err(format!("expected key=value in header, got {tok:?}")))?;
        let parsed: usize = value.parse().map_err(|_| err(format!("bad header value {tok:?}")))?;
        match key {
            "k" => k = Some(parsed),
            "directed" => match parsed {
                0 => directed = Some(false),
                1 => directed = Some(true),
                _ => return Err(err("directed must be 0 or 1".into())),
            },
            "n" => n = Some(parsed),
            _ => return Err(err(format!("unknown header key {key:?}"))),
        }
    }
    Ok(Header {
        k: k.ok_or_else(|| err("header needs k=<order>".into()))?,
        directed: directed.ok_or_else(|| err("header needs directed=<0|1>".into()))?,
        n,
    })
}

pub fn read_hypergraph<R: BufRead>(reader: R) -> Result<UniformHypergraph> {
    let mut header: Option<Header> = None;
    let mut edges = Vec::new();
    let mut max_vertex = 0usize;
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let content = line.split('#').next().unwrap().trim();
        if content.is_empty() {
            continue;
        }
        let Some(h) = &header else {
            header = Some(parse_header(content, lineno)?);
            continue;
        };
        let toks: Vec<&str> = content.split_whitespace().collect();
        if toks.len() != h.k && toks.len() != h.k + 1 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected {} vertices and an optional weight, got {} fields", h.k, toks.len()),
            });
        }
        let mut vertices = Vec::with_capacity(h.k);
        for tok in &toks[..h.k] {
            let v: usize =
                tok.parse().map_err(|_| Error::Parse { line: lineno, msg: format!("bad vertex {tok:?}") })?;
            if v == 0 {
                return Err(Error::Parse { line: lineno, msg: "vertices are 1-based".into() });
            }
            max_vertex = max_vertex.max(v);
            vertices.push(v - 1);
        }
        let weight = match toks.get(h.k) {
            Some(w) => w.parse::<f64>().map_err(|_| Error::Parse { line: lineno, msg: format!("bad weight {w:?}") })?,
            None => 1.0,
        };
        edges.push((vertices, weight));
    }
    let h = header.ok_or(Error::Parse { line: 0, msg: "missing header line".into() })?;
    let n = match h.n {
        Some(n) if n < max_vertex => {
            return Err(Error::Parse { line: 0, msg: format!("vertex {max_vertex} exceeds n={n}") })
        }
        Some(n) => n,
        None => max_vertex,
    };
    UniformHypergraph::new(n, h.k, h.directed, edges)
}

pub fn write_hypergraph<W: Write>(mut w: W, h: &UniformHypergraph) -> Result<()> {
    writeln!(w, "k={} directed={} n={}", h.order(), u8::from(h.is_directed()), h.n())?;
    for e in h.edges() {
        let ids: Vec<String> = e.vertices().iter().map(|v| (v + 1).to_string()).collect();
        if e.weight() == 1.0 {
            writeln!(w, "{}", ids.join(" "))?;
        } else {
            writeln!(w, "{} {}", ids.join(" "), e.weight())?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_header_comments_and_weights() {
        let text = "# toy\nk=3 directed=0\n1 2 3\n\n2 3 4 2.5 # heavy\n";
        let h = read_hypergraph(text.as_bytes()).unwrap();
        assert_eq!((h.n(), h.order(), h.num_edges()), (4, 3, 2));
        assert_eq!(h.edges()[1].weight(), 2.5);
        assert_eq!(h.edges()[1].vertices(), &[1, 2, 3]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(read_hypergraph("1 2 3\n".as_bytes()).is_err());
        assert!(read_hypergraph("k=3\n1 2 3\n".as_bytes()).is_err());
        assert!(read_hypergraph("k=3 directed=0\n1 2\n".as_bytes()).is_err());
        assert!(read_hypergraph("k=3 directed=0\n0 1 2\n".as_bytes()).is_err());
        assert!(read_hypergraph("k=3 directed=0\n1 2 3\n3 2 1\n".as_bytes()).is_err());
        assert!(read_hypergraph("k=3 directed=0 n=2\n1 2 3\n".as_bytes()).is_err());
    }

    #[test]
    fn write_then_read_preserves_edges() {
        let h = UniformHypergraph::new(6, 3, true, [(vec![0, 4, 2], 0.125), (vec![5, 1, 3], 1.0)]).unwrap();
        let mut buf = Vec::new();
        write_hypergraph(&mut buf, &h).unwrap();
        let back = read_hypergraph(buf.as_slice()).unwrap();
        assert_eq!(back.n(), 6);
        assert!(back.is_directed());
        assert_eq!(back.edges(), h.edges());
    }
}
