use serde::{Deserialize, Serialize};

use super::RatingsDataset;
use crate::error::{Error, Result};
use crate::graph::{strongly_connected_components, TrustGraph};

/// Counts after cleaning, plus what was removed along the way.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanReport {
    pub users: usize,
    pub reviews: usize,
    pub products: usize,
    pub relationships: usize,
    pub sparsity: f64,
    pub rounds: usize,
    pub removed_without_reviews: usize,
    pub removed_without_relationships: usize,
    pub removed_outside_scc: usize,
}

/// Repeatedly drops users without reviews or without any trust relationship
/// and restricts to the largest strongly connected component of the trust
/// graph, until nothing changes. Users and items are then re-indexed in
/// their original order, and items nobody rates any more are dropped.
///
/// Among equally large components the one holding the smallest user index
/// is kept.
pub fn clean(ds: &RatingsDataset) -> Result<(RatingsDataset, CleanReport)> {
    let n = ds.n_users();
    let mut alive = vec![true; n];
    let mut report = CleanReport {
        users: 0,
        reviews: 0,
        products: 0,
        relationships: 0,
        sparsity: 0.0,
        rounds: 0,
        removed_without_reviews: 0,
        removed_without_relationships: 0,
        removed_outside_scc: 0,
    };

    loop {
        report.rounds += 1;
        let mut changed = false;

        let mut reviews = vec![0usize; n];
        for r in &ds.ratings {
            reviews[r.user] += 1;
        }
        let mut relations = vec![0usize; n];
        for &(a, b) in &ds.trust {
            if alive[a] && alive[b] {
                relations[a] += 1;
                relations[b] += 1;
            }
        }
        for u in 0..n {
            if !alive[u] {
                continue;
            }
            if reviews[u] == 0 {
                alive[u] = false;
                report.removed_without_reviews += 1;
                changed = true;
            } else if relations[u] == 0 {
                alive[u] = false;
                report.removed_without_relationships += 1;
                changed = true;
            }
        }

        let g = TrustGraph::from_edges(
            n,
            ds.trust
                .iter()
                .filter(|&&(a, b)| alive[a] && alive[b])
                .map(|&(a, b)| (a, b, 1.0)),
        )?;
        let components = strongly_connected_components(&g);
        let largest = components
            .iter()
            .filter(|c| alive[c[0]])
            .fold(None::<&Vec<usize>>, |best, c| match best {
                Some(b) if b.len() >= c.len() => Some(b),
                _ => Some(c),
            });
        let mut keep = vec![false; n];
        if let Some(c) = largest {
            for &u in c {
                keep[u] = true;
            }
        }
        for u in 0..n {
            if alive[u] && !keep[u] {
                alive[u] = false;
                report.removed_outside_scc += 1;
                changed = true;
            }
        }

        if !changed {
            break;
        }
    }

    let cleaned = restrict(ds, &alive)?;
    if cleaned.n_users() == 0 {
        return Err(Error::Empty("no users survive cleaning".into()));
    }
    report.users = cleaned.n_users();
    report.reviews = cleaned.ratings.len();
    report.products = cleaned.n_items();
    report.relationships = cleaned.trust.len();
    report.sparsity = cleaned.sparsity();
    Ok((cleaned, report))
}

fn restrict(ds: &RatingsDataset, alive: &[bool]) -> Result<RatingsDataset> {
    let mut user_map = vec![usize::MAX; ds.n_users()];
    let mut user_ids = Vec::new();
    for (u, id) in ds.user_ids.iter().enumerate() {
        if alive[u] {
            user_map[u] = user_ids.len();
            user_ids.push(id.clone());
        }
    }
    let mut rated = vec![false; ds.n_items()];
    for r in ds.ratings.iter().filter(|r| alive[r.user]) {
        rated[r.item] = true;
    }
    let mut item_map = vec![usize::MAX; ds.n_items()];
    let mut item_ids = Vec::new();
    for (i, id) in ds.item_ids.iter().enumerate() {
        if rated[i] {
            item_map[i] = item_ids.len();
            item_ids.push(id.clone());
        }
    }
    let ratings = ds
        .ratings
        .iter()
        .filter(|r| alive[r.user])
        .map(|r| super::Rating {
            user: user_map[r.user],
            item: item_map[r.item],
            ..*r
        })
        .collect();
    let trust = ds
        .trust
        .iter()
        .filter(|&&(a, b)| alive[a] && alive[b])
        .map(|&(a, b)| (user_map[a], user_map[b]))
        .collect();
    let mut out = RatingsDataset::from_parts(user_ids, item_ids, ratings, trust)?;
    out.load_report = ds.load_report.clone();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::{parse, synthesize_community_dataset, CommunitySpec};
    use super::*;

    fn parse_str(ratings: &str, trust: &str) -> RatingsDataset {
        parse(ratings.as_bytes(), "r", trust.as_bytes(), "t").unwrap()
    }

    #[test]
    fn user_without_trust_is_removed() {
        let ds = parse_str("a,x,5\nb,x,4\nc,y,2\n", "a,b\nb,a\n");
        let (out, rep) = clean(&ds).unwrap();
        assert_eq!(out.user_ids, vec!["a", "b"]);
        assert_eq!(out.item_ids, vec!["x"]);
        assert_eq!(rep.removed_without_relationships, 1);
        assert_eq!((rep.users, rep.reviews, rep.products, rep.relationships), (2, 2, 1, 2));
    }

    #[test]
    fn user_without_reviews_is_removed() {
        let mut ds = parse_str("a,x,5\nb,x,4\n", "a,b\nb,a\n");
        ds.user_ids.push("silent".into());
        ds.trust.push((0, 2));
        ds.trust.push((2, 0));
        let (out, rep) = clean(&ds).unwrap();
        assert_eq!(out.n_users(), 2);
        assert_eq!(rep.removed_without_reviews, 1);
    }

    #[test]
    fn only_largest_cycle_survives() {
        let ratings: String = "abcdefg".chars().map(|c| format!("{c},x,3\n")).collect();
        let trust = "a,b\nb,c\nc,a\nd,e\ne,f\nf,g\ng,d\n";
        let (out, rep) = clean(&parse_str(&ratings, trust)).unwrap();
        assert_eq!(out.user_ids, vec!["d", "e", "f", "g"]);
        assert_eq!(rep.removed_outside_scc, 3);
        assert_eq!(out.trust, vec![(0, 1), (1, 2), (2, 3), (3, 0)]);
    }

    #[test]
    fn equal_components_keep_the_first() {
        let ratings: String = "abcd".chars().map(|c| format!("{c},x,3\n")).collect();
        let (out, _) = clean(&parse_str(&ratings, "c,d\nd,c\na,b\nb,a\n")).unwrap();
        assert_eq!(out.user_ids, vec!["a", "b"]);
    }

    #[test]
    fn nothing_left_is_an_error() {
        let ds = parse_str("a,x,5\n", "");
        assert!(matches!(clean(&ds), Err(Error::Empty(_))));
    }

    #[test]
    fn idempotent_on_synthetic_data() {
        let spec = CommunitySpec {
            p_trust_intra: 0.02,
            p_trust_cross: 0.001,
            ..CommunitySpec::default()
        };
        let ds = synthesize_community_dataset(&spec).unwrap();
        let (once, _) = clean(&ds).unwrap();
        let (twice, rep) = clean(&once).unwrap();
        assert_eq!(once, twice);
        assert_eq!(rep.rounds, 1);
        let g = once.trust_graph();
        assert_eq!(strongly_connected_components(&g).len(), 1);
        assert!(once.n_users() < ds.n_users());
    }
}
