use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::TrustGraph;
use crate::error::{Error, Result};

/// Reads a tab-separated `truster<TAB>trustee<TAB>weight` edge list. Blank
/// lines and lines starting with `#` are skipped. The agent count is one more
/// than the largest id seen.
pub fn read_edge_list(path: impl AsRef<Path>) -> Result<TrustGraph> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(BufReader::new(file), path)
}

pub fn parse_edge_list<R: BufRead>(reader: R, label: impl AsRef<Path>) -> Result<TrustGraph> {
    let label = label.as_ref();
    let parse_err = |line: usize, message: String| Error::Parse {
        path: label.to_path_buf(),
        line,
        message,
    };

    let mut edges = Vec::new();
    let mut max_id: Option<usize> = None;
    for (k, line) in reader.lines().enumerate() {
        let line_no = k + 1;
        let line = line.map_err(|e| Error::io(label, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').collect();
        if fields.len() != 3 {
            return Err(parse_err(
                line_no,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            ));
        }
        let i: usize = fields[0]
            .trim()
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad truster id {:?}", fields[0])))?;
        let j: usize = fields[1]
            .trim()
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad trustee id {:?}", fields[1])))?;
        let w: f64 = fields[2]
            .trim()
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad weight {:?}", fields[2])))?;
        if !(0.0..=1.0).contains(&w) {
            return Err(parse_err(line_no, format!("weight {w} outside [0, 1]")));
        }
        if i == j {
            return Err(parse_err(line_no, format!("self-loop on agent {i}")));
        }
        max_id = Some(max_id.map_or(i.max(j), |m| m.max(i).max(j)));
        edges.push((i, j, w));
    }
    let n = max_id.map_or(0, |m| m + 1);
    TrustGraph::from_edges(n, edges)
}

/// Writes every structural link, including zero-weight ones.
pub fn write_edge_list<W: Write>(g: &TrustGraph, mut out: W) -> std::io::Result<()> {
    for (i, j, w) in g.links() {
        writeln!(out, "{i}\t{j}\t{w}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_round_trips() {
        let text = "# comment\n0\t1\t0.5\n1\t0\t1\n\n2\t0\t0\n";
        let g = parse_edge_list(text.as_bytes(), "mem").unwrap();
        assert_eq!(g.n_agents(), 3);
        assert_eq!(g.weight(0, 1), 0.5);
        assert!(g.is_linked(2, 0));
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        let back = parse_edge_list(buf.as_slice(), "mem").unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn reports_line_numbers() {
        let text = "0\t1\t0.5\n1\t2\t1.5\n";
        match parse_edge_list(text.as_bytes(), "edges.tsv") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let text = "0\t0\t0.5\n";
        assert!(matches!(
            parse_edge_list(text.as_bytes(), "e"),
            Err(Error::Parse { line: 1, .. })
        ));
        let text = "0 1 0.5\n";
        assert!(parse_edge_list(text.as_bytes(), "e").is_err());
    }
}
