use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{LoadReport, Rating, RatingsDataset, Split};
use crate::error::{Error, Result};

/// Reads a ratings CSV (`user_id,item_id,stars[,timestamp]`) and a trust CSV
/// (`truster_id,trustee_id`).
pub fn load(ratings_path: impl AsRef<Path>, trust_path: impl AsRef<Path>) -> Result<RatingsDataset> {
    let (rp, tp) = (ratings_path.as_ref(), trust_path.as_ref());
    let rf = File::open(rp).map_err(|e| Error::io(rp, e))?;
    let tf = File::open(tp).map_err(|e| Error::io(tp, e))?;
    parse(rf, rp, tf, tp)
}

/// Parses both files from readers. Labels are only used in error messages.
///
/// Both files may start with a header line. For ratings it is recognised by
/// a non-numeric stars column; for trust by a first column named like
/// `truster`, `source` or `from`. Lines starting with `#` are skipped.
pub fn parse<R1: Read, R2: Read>(
    ratings: R1,
    ratings_label: impl AsRef<Path>,
    trust: R2,
    trust_label: impl AsRef<Path>,
) -> Result<RatingsDataset> {
    let mut users = Interner::default();
    let mut items = Interner::default();
    let mut report = LoadReport::default();
    let mut records = Vec::new();

    let label = ratings_label.as_ref();
    for (k, rec) in reader(ratings).into_records().enumerate() {
        let (rec, line) = record(rec, label)?;
        let fail = |message: String| Error::Parse {
            path: label.to_path_buf(),
            line,
            message,
        };
        if rec.len() < 3 || rec.len() > 4 {
            return Err(fail(format!("expected 3 or 4 fields, found {}", rec.len())));
        }
        let stars: f64 = match rec[2].parse() {
            Ok(v) => v,
            Err(_) if k == 0 => continue,
            Err(_) => return Err(fail(format!("stars {:?} is not a number", &rec[2]))),
        };
        if stars.fract() != 0.0 || !(1.0..=5.0).contains(&stars) {
            return Err(fail(format!("stars {stars} outside 1..=5")));
        }
        let timestamp = match rec.get(3) {
            None | Some("") => None,
            Some(s) => Some(
                s.parse::<i64>()
                    .map_err(|_| fail(format!("timestamp {s:?} is not an integer")))?,
            ),
        };
        records.push(Rating {
            user: users.intern(&rec[0]),
            item: items.intern(&rec[1]),
            stars: stars as u8,
            timestamp,
            split: Split::Train,
        });
    }

    let label = trust_label.as_ref();
    let mut edges = Vec::new();
    let mut trust_read = 0;
    for (k, rec) in reader(trust).into_records().enumerate() {
        let (rec, line) = record(rec, label)?;
        if rec.len() != 2 {
            return Err(Error::Parse {
                path: label.to_path_buf(),
                line,
                message: format!("expected 2 fields, found {}", rec.len()),
            });
        }
        if k == 0 && is_trust_header(&rec[0]) {
            continue;
        }
        trust_read += 1;
        match (users.get(&rec[0]), users.get(&rec[1])) {
            (Some(a), Some(b)) => edges.push((a, b)),
            _ => report.unknown_user_edges += 1,
        }
    }

    let mut ds = RatingsDataset::from_parts(users.ids, items.ids, records, edges)?;
    report.ratings_read = ds.load_report.ratings_read;
    report.duplicate_ratings = ds.load_report.duplicate_ratings;
    report.self_loops = ds.load_report.self_loops;
    report.duplicate_edges = ds.load_report.duplicate_edges;
    report.trust_read = trust_read;
    ds.load_report = report;
    Ok(ds)
}

/// Writes every rating as `user_id,item_id,stars[,timestamp]` with a header.
/// The split tag is not written.
pub fn write_ratings_csv<W: Write>(ds: &RatingsDataset, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["user_id", "item_id", "stars", "timestamp"])?;
    for r in &ds.ratings {
        w.write_record([
            ds.user_ids[r.user].as_str(),
            ds.item_ids[r.item].as_str(),
            &r.stars.to_string(),
            &r.timestamp.map_or_else(String::new, |t| t.to_string()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes trust edges as `truster_id,trustee_id` with a header.
pub fn write_trust_csv<W: Write>(ds: &RatingsDataset, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["truster_id", "trustee_id"])?;
    for &(a, b) in &ds.trust {
        w.write_record([ds.user_ids[a].as_str(), ds.user_ids[b].as_str()])?;
    }
    w.flush()?;
    Ok(())
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(r)
}

fn record(
    rec: csv::Result<csv::StringRecord>,
    label: &Path,
) -> Result<(csv::StringRecord, usize)> {
    match rec {
        Ok(r) => {
            let line = r.position().map_or(0, |p| p.line() as usize);
            Ok((r, line))
        }
        Err(e) => Err(Error::Parse {
            path: label.to_path_buf(),
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        }),
    }
}

fn is_trust_header(first: &str) -> bool {
    let f = first.to_ascii_lowercase();
    f.starts_with("truster") || f == "source" || f == "from"
}

#[derive(Default)]
struct Interner {
    ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl Interner {
    fn intern(&mut self, id: &str) -> usize {
        if let Some(&k) = self.index.get(id) {
            return k;
        }
        let k = self.ids.len();
        self.ids.push(id.to_string());
        self.index.insert(id.to_string(), k);
        k
    }

    fn get(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }
}
