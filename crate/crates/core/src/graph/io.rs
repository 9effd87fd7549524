//! Text format: a header line `n m`, then `m` lines `u p_u v p_v`.

use std::fmt::Write as _;

use super::{PortEdge, PortGraph};
use crate::error::GraphError;

fn parse_fields(line: &str, lineno: usize, want: usize) -> Result<Vec<usize>, GraphError> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != want {
        return Err(GraphError::Parse {
            line: lineno,
            message: format!("expected {want} integers, found {}", fields.len()),
        });
    }
    fields
        .iter()
        .map(|f| {
            f.parse::<usize>().map_err(|_| GraphError::Parse {
                line: lineno,
                message: format!("not a non-negative integer: {f:?}"),
            })
        })
        .collect()
}

/// Parses and validates a graph file. Every error carries a 1-based line number.
pub fn parse_graph(text: &str) -> Result<PortGraph, GraphError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or(GraphError::Parse {
        line: 1,
        message: "missing header `n m`".into(),
    })?;
    let hdr = parse_fields(header, 1, 2)?;
    let (n, m) = (hdr[0], hdr[1]);
    let mut edges = Vec::with_capacity(m);
    let mut edge_lines = Vec::with_capacity(m);
    for _ in 0..m {
        let (lineno, line) = lines.next().ok_or(GraphError::Parse {
            line: edges.len() + 2,
            message: format!("expected {m} edge lines, found {}", edges.len()),
        })?;
        let f = parse_fields(line, lineno, 4)?;
        edges.push(PortEdge { u: f[0], pu: f[1], v: f[2], pv: f[3] });
        edge_lines.push(lineno);
    }
    for (lineno, line) in lines {
        if !line.trim().is_empty() {
            return Err(GraphError::Parse {
                line: lineno,
                message: "unexpected content after the last edge".into(),
            });
        }
    }
    let line_of = |index: usize| edge_lines[index];
    PortGraph::from_edges(n, &edges).map_err(|e| {
        let line = match &e {
            GraphError::NodeOutOfRange { index, .. }
            | GraphError::SelfLoop { index, .. }
            | GraphError::DuplicateEdge { index, .. }
            | GraphError::DuplicatePort { index, .. } => line_of(*index),
            _ => 1,
        };
        GraphError::Parse { line, message: e.to_string() }
    })
}

pub fn write_graph(g: &PortGraph) -> String {
    let edges = g.edges();
    let mut out = format!("{} {}\n", g.node_count(), edges.len());
    for e in edges {
        let _ = writeln!(out, "{} {} {} {}", e.u, e.pu, e.v, e.pv);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_four_cycle() {
        let g = parse_graph("4 4\n0 0 1 0\n0 1 3 1\n2 0 3 0\n2 1 1 1\n").unwrap();
        assert_eq!(g.node_count(), 4);
        assert_eq!(g.neighbor_via_port(0, 1).unwrap(), 3);
        assert_eq!(parse_graph(&write_graph(&g)).unwrap(), g);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_graph("3 2\n0 0 1 0\n1 0 2 0\n").unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 3, .. }), "{err}");
        let err = parse_graph("3 2\n0 0 1 0\n1 x 2 0\n").unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 3, .. }));
        let err = parse_graph("3 2\n0 0 1 0\n").unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 3, .. }));
        let err = parse_graph("3\n").unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 1, .. }));
    }
}
