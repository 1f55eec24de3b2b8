//! Coordinate-triple text dumps of `T̃` and `S̃`.
//!
//! ```text
//! # n=2 beta=0.8 strategy=exact residual=0
//! 0	1	2.7777777777777777
//! ```

use std::io::{BufRead, Write};

use super::matrix::{IndirectTrustMatrix, RowNormalizedMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixDump {
    pub n: usize,
    pub beta: f64,
    pub strategy: String,
    pub residual: f64,
    pub entries: Vec<(usize, usize, f64)>,
}

impl MatrixDump {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries
            .iter()
            .find(|&&(a, b, _)| a == i && b == j)
            .map_or(0.0, |&(_, _, v)| v)
    }
}

fn write_header<W: Write>(
    out: &mut W,
    n: usize,
    beta: f64,
    strategy: &str,
    residual: f64,
) -> std::io::Result<()> {
    writeln!(out, "# n={n} beta={beta} strategy={strategy} residual={residual:e}")
}

pub fn write_indirect_dump<W: Write>(t: &IndirectTrustMatrix, mut out: W) -> std::io::Result<()> {
    let info = t.info();
    write_header(&mut out, t.n(), info.beta, info.strategy.name(), info.residual)?;
    for i in 0..t.n() {
        let mut res = Ok(());
        t.for_each_in_row(i, |j, v| {
            if res.is_ok() {
                res = writeln!(out, "{i}\t{j}\t{v}");
            }
        });
        res?;
    }
    Ok(())
}

/// Dumps `S̃` (or `S`) with the header of the run that produced it.
pub fn write_normalized_dump<W: Write>(
    s: &RowNormalizedMatrix,
    beta: f64,
    strategy: &str,
    residual: f64,
    mut out: W,
) -> std::io::Result<()> {
    write_header(&mut out, s.n(), beta, strategy, residual)?;
    for i in 0..s.n() {
        for &(j, v) in s.row(i) {
            if v != 0.0 {
                writeln!(out, "{i}\t{j}\t{v}")?;
            }
        }
    }
    Ok(())
}

pub fn parse_matrix_dump<R: BufRead>(reader: R) -> Result<MatrixDump> {
    let err = |line: usize, message: String| Error::Parse {
        path: "<dump>".into(),
        line,
        message,
    };
    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, Ok(h))) => h,
        _ => return Err(err(1, "missing header".into())),
    };
    let mut n = None;
    let mut beta = None;
    let mut strategy = None;
    let mut residual = None;
    for field in header.trim_start_matches('#').split_whitespace() {
        let Some((key, value)) = field.split_once('=') else {
            return Err(err(1, format!("bad header field {field:?}")));
        };
        match key {
            "n" => n = value.parse().ok(),
            "beta" => beta = value.parse().ok(),
            "strategy" => strategy = Some(value.to_string()),
            "residual" => residual = value.parse().ok(),
            _ => {}
        }
    }
    let (Some(n), Some(beta), Some(strategy), Some(residual)) = (n, beta, strategy, residual)
    else {
        return Err(err(1, "header must carry n, beta, strategy and residual".into()));
    };
    let mut entries = Vec::new();
    for (k, line) in lines {
        let line = line.map_err(|e| Error::io("<dump>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        let parsed = (f.len() == 3)
            .then(|| Some((f[0].parse().ok()?, f[1].parse().ok()?, f[2].parse().ok()?)))
            .flatten();
        match parsed {
            Some(e) => entries.push(e),
            None => return Err(err(k + 1, format!("bad triple {line:?}"))),
        }
    }
    Ok(MatrixDump {
        n,
        beta,
        strategy,
        residual,
        entries,
    })
}
