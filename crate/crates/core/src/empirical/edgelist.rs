//! Plain-text edge lists: one `u v` pair per line, 0-indexed, whitespace separated,
//! each undirected edge listed once.
//!
//! Lines starting with `#` are comments. The writer emits two of them so a graph can be
//! read back with its size and labels: `# nodes N` and `# community1 i j k ...`.

use std::io::{BufRead, Write};

use super::SampledGraph;
use crate::error::{Error, Result};

pub fn write_edge_list<W: Write>(graph: &SampledGraph, mut out: W) -> Result<()> {
    writeln!(out, "# nodes {}", graph.n)?;
    write!(out, "# community1")?;
    for (i, _) in graph.in_first.iter().enumerate().filter(|(_, &f)| f) {
        write!(out, " {i}")?;
    }
    writeln!(out)?;
    for (i, j) in graph.edges() {
        writeln!(out, "{i} {j}")?;
    }
    Ok(())
}

/// Reads an edge list. Without a `# nodes` header the node count is one past the largest
/// index; without a `# community1` header every node is labelled community 2.
pub fn read_edge_list<R: BufRead>(input: R) -> Result<SampledGraph> {
    let mut declared_n = None;
    let mut first = Vec::new();
    let mut edges = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parse = |tok: &str| {
            tok.parse::<usize>()
                .map_err(|_| Error::EdgeList(format!("line {}: bad node index {tok:?}", lineno + 1)))
        };
        if let Some(comment) = line.strip_prefix('#') {
            let mut toks = comment.split_whitespace();
            match toks.next() {
                Some("nodes") => {
                    let tok = toks.next().ok_or_else(|| Error::EdgeList("empty nodes header".into()))?;
                    declared_n = Some(parse(tok)?);
                }
                Some("community1") => {
                    for tok in toks {
                        first.push(parse(tok)?);
                    }
                }
                _ => {}
            }
            continue;
        }
        let mut toks = line.split_whitespace();
        let (Some(u), Some(v), None) = (toks.next(), toks.next(), toks.next()) else {
            return Err(Error::EdgeList(format!("line {}: expected two node indices", lineno + 1)));
        };
        edges.push((parse(u)?, parse(v)?));
    }
    let inferred = edges
        .iter()
        .map(|&(u, v)| u.max(v) + 1)
        .chain(first.iter().map(|&i| i + 1))
        .max()
        .unwrap_or(0);
    let n = declared_n.unwrap_or(inferred);
    if inferred > n {
        return Err(Error::EdgeList(format!("node index {} exceeds declared {n} nodes", inferred - 1)));
    }
    let mut in_first = vec![false; n];
    for i in first {
        in_first[i] = true;
    }
    let mut graph = SampledGraph::empty(n, in_first, 0)?;
    for (u, v) in edges {
        graph.add_edge(u, v)?;
    }
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::empirical::sample_graph;
    use crate::graphon::SbmGraphon;

    #[test]
    fn round_trip() {
        let g = sample_graph(&SbmGraphon::new(0.4, 0.5, 0.1, 0.3).unwrap(), 40, 11).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        let back = read_edge_list(buf.as_slice()).unwrap();
        assert_eq!(back.n, g.n);
        assert_eq!(back.in_first, g.in_first);
        assert!(back.edges().eq(g.edges()));
    }

    #[test]
    fn edge_lines_are_plain_pairs() {
        let mut g = SampledGraph::empty(3, vec![true, false, false], 0).unwrap();
        g.add_edge(2, 0).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "# nodes 3\n# community1 0\n0 2\n");
    }

    #[test]
    fn headerless_input_and_errors() {
        let g = read_edge_list("0 1\n\n1   4\n".as_bytes()).unwrap();
        assert_eq!(g.n, 5);
        assert_eq!(g.edge_count(), 2);
        assert!(read_edge_list("0 1 2\n".as_bytes()).is_err());
        assert!(read_edge_list("0 x\n".as_bytes()).is_err());
        assert!(read_edge_list("3 3\n".as_bytes()).is_err());
        assert!(read_edge_list("# nodes 2\n0 5\n".as_bytes()).is_err());
    }
}
