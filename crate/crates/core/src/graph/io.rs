//! Edge-list text format: one `u v` pair per line, 0-indexed, whitespace
//! separated, each undirected edge listed once. Lines starting with `#` are
//! ignored. The writer emits edges as `min max` sorted lexicographically.
//!
//! The format cannot express trailing isolated vertices (the vertex count is
//! inferred as `max index + 1`), so the loader takes an optional minimum
//! vertex count for graphs that need them.

use super::{Graph, GraphError};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

pub fn read_edge_list<R: Read>(reader: R, min_vertices: Option<usize>) -> Result<Graph, GraphError> {
    let reader = BufReader::new(reader);
    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut max_index = 0u32;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut it = trimmed.split_whitespace();
        let parse = |tok: Option<&str>, lineno: usize| -> Result<u32, GraphError> {
            tok.ok_or(GraphError::Parse { line: lineno + 1, msg: "expected two vertex indices".into() })?
                .parse::<u32>()
                .map_err(|e| GraphError::Parse { line: lineno + 1, msg: e.to_string() })
        };
        let u = parse(it.next(), lineno)?;
        let v = parse(it.next(), lineno)?;
        if it.next().is_some() {
            return Err(GraphError::Parse { line: lineno + 1, msg: "trailing tokens after edge".into() });
        }
        max_index = max_index.max(u).max(v);
        edges.push((u, v));
    }
    let n = (max_index as usize + 1).max(min_vertices.unwrap_or(0));
    Graph::from_edges(n, &edges)
}

pub fn read_edge_list_file<P: AsRef<Path>>(path: P, min_vertices: Option<usize>) -> Result<Graph, GraphError> {
    read_edge_list(std::fs::File::open(path)?, min_vertices)
}

pub fn write_edge_list<W: Write>(g: &Graph, mut writer: W) -> Result<(), GraphError> {
    for i in 0..g.n() {
        for &j in g.neighbors(i) {
            if (j as usize) > i {
                writeln!(writer, "{} {}", i, j)?;
            }
        }
    }
    Ok(())
}

pub fn write_edge_list_file<P: AsRef<Path>>(g: &Graph, path: P) -> Result<(), GraphError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_edge_list(g, &mut f)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_erdos_renyi, NamedKind};

    #[test]
    fn roundtrip() {
        let g = gen_erdos_renyi(30, 0.2, 5).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        let h = read_edge_list(&buf[..], None).unwrap();
        assert_eq!(g.n(), h.n());
        for i in 0..g.n() {
            assert_eq!(g.neighbors(i), h.neighbors(i));
        }
    }

    #[test]
    fn rejects_self_loops_and_duplicates() {
        assert!(read_edge_list("0 0\n".as_bytes(), None).is_err());
        assert!(read_edge_list("0 1\n1 0\n".as_bytes(), None).is_err());
        assert!(read_edge_list("0 1 2\n".as_bytes(), None).is_err());
        assert!(read_edge_list("0 x\n".as_bytes(), None).is_err());
    }

    #[test]
    fn comments_and_min_vertices() {
        let g = read_edge_list("# a comment\n0 1\n\n".as_bytes(), Some(5)).unwrap();
        assert_eq!(g.n(), 5);
        assert_eq!(g.degree(4), 0);
    }

    #[test]
    fn writer_sorted() {
        let g = crate::graph::gen_named(NamedKind::Star, 4).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "0 1\n0 2\n0 3\n");
    }
}
