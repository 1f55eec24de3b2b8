//! Offline comparison of trust-weighted (TW), collaborative filtering (CF)
//! and item-average (SA) predictions on a split dataset.
//!
//! The TW model uses the strict direct normalisation of the trust graph, a
//! truncated series for indirect trust on the rows that are needed, and
//! normalises each of those rows over every agent it reaches.

use std::collections::HashMap;
use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dataset::{Rating, RatingsDataset};
use crate::error::{check_beta, Error, Result};
use crate::metric::{
    indirect_trust_truncated, normalize_direct, normalize_indirect_with, walk_cutoff_for,
    IndirectDenominator, IndirectTrustMatrix, MetricConfig, NormalizationMode,
    RowNormalizedMatrix, DEFAULT_BETA, DEFAULT_DROP_TOL,
};
use crate::par::Execution;
use crate::recommender::{
    predict_sa, predict_tw, CfConfig, CollaborativeFilter, Method, RatingFunction, RatingScale,
};

/// Mean absolute error divided by the width of the rating scale.
pub fn mae(predictions: &[f64], truths: &[f64], scale: RatingScale) -> Result<f64> {
    if predictions.len() != truths.len() {
        return Err(Error::invalid(format!(
            "{} predictions for {} truths",
            predictions.len(),
            truths.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::Empty("no predictions to score".into()));
    }
    let sum: f64 = predictions
        .iter()
        .zip(truths)
        .map(|(p, t)| (p - t).abs())
        .sum();
    Ok(sum / predictions.len() as f64 / scale.range())
}

/// Anything that can (sometimes) predict a user's rating of an item.
pub trait Predictor: Sync {
    fn method(&self) -> Method;
    fn predict(&self, user: usize, item: usize) -> Option<f64>;
}

/// Item average over the training ratings.
pub struct SaPredictor {
    ratings: RatingFunction,
}

impl SaPredictor {
    pub fn new(ds: &RatingsDataset) -> Self {
        Self {
            ratings: ds.train_ratings(),
        }
    }
}

impl Predictor for SaPredictor {
    fn method(&self) -> Method {
        Method::Sa
    }

    fn predict(&self, _user: usize, item: usize) -> Option<f64> {
        predict_sa(&self.ratings, item).map(|p| p.value)
    }
}

/// User-based CF with similarity lists cached for a chosen set of users.
pub struct CfPredictor {
    ratings: RatingFunction,
    cfg: CfConfig,
    sims: HashMap<usize, Vec<(usize, f64)>>,
}

impl CfPredictor {
    pub fn new(ds: &RatingsDataset, cfg: CfConfig, users: &[usize], exec: Execution) -> Self {
        let ratings = ds.train_ratings();
        let sims = {
            let cf = CollaborativeFilter::new(&ratings, cfg);
            let lists = exec.map(users.len(), |k| cf.similarities(users[k]));
            users.iter().copied().zip(lists).collect()
        };
        Self { ratings, cfg, sims }
    }

    /// The `k` most similar users with positive similarity.
    pub fn neighbourhood(&self, user: usize, k: usize) -> Vec<usize> {
        match self.sims.get(&user) {
            Some(s) => s.iter().take(k).map(|&(j, _)| j).collect(),
            None => CollaborativeFilter::new(&self.ratings, self.cfg)
                .similarities(user)
                .into_iter()
                .take(k)
                .map(|(j, _)| j)
                .collect(),
        }
    }
}

impl Predictor for CfPredictor {
    fn method(&self) -> Method {
        Method::Cf
    }

    fn predict(&self, user: usize, item: usize) -> Option<f64> {
        let cf = CollaborativeFilter::new(&self.ratings, self.cfg);
        match self.sims.get(&user) {
            Some(s) => cf.predict_with(s, user, item),
            None => cf.predict(user, item),
        }
        .map(|p| p.value)
    }
}

/// Trust-weighted predictor. Rows outside `users` are left uncomputed and
/// predict nothing.
pub struct TwPredictor {
    ratings: RatingFunction,
    indirect: IndirectTrustMatrix,
    normalized: RowNormalizedMatrix,
}

impl TwPredictor {
    pub fn new(ds: &RatingsDataset, cfg: &EvalConfig, beta: f64, users: &[usize]) -> Result<Self> {
        check_beta(beta)?;
        let s = normalize_direct(&ds.trust_graph(), NormalizationMode::Strict);
        let metric = MetricConfig {
            drop_tol: cfg.drop_tol,
            exec: cfg.exec,
            ..MetricConfig::default()
        };
        let cutoff = walk_cutoff_for(beta, cfg.walk_tol);
        let indirect = indirect_trust_truncated(&s, beta, cutoff, Some(users), &metric)?;
        let normalized = normalize_indirect_with(&indirect, cfg.denominator, cfg.drop_tol);
        Ok(Self {
            ratings: ds.train_ratings(),
            indirect,
            normalized,
        })
    }

    pub fn indirect(&self) -> &IndirectTrustMatrix {
        &self.indirect
    }

    /// The `k` users with the largest indirect trust from `user`.
    pub fn neighbourhood(&self, user: usize, k: usize) -> Vec<usize> {
        let mut row: Vec<(usize, f64)> = self
            .indirect
            .row_entries(user)
            .into_iter()
            .filter(|&(j, v)| j != user && v > 0.0)
            .collect();
        row.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        row.into_iter().take(k).map(|(j, _)| j).collect()
    }
}

impl Predictor for TwPredictor {
    fn method(&self) -> Method {
        Method::Tw
    }

    fn predict(&self, user: usize, item: usize) -> Option<f64> {
        predict_tw(&self.normalized, &self.ratings, user, item).map(|p| p.value)
    }
}

fn test_records(ds: &RatingsDataset) -> Vec<Rating> {
    ds.test().copied().collect()
}

fn predict_all<P: Predictor + ?Sized>(p: &P, records: &[Rating], exec: Execution) -> Vec<Option<f64>> {
    exec.map(records.len(), |k| p.predict(records[k].user, records[k].item))
}

/// Fraction of test records the predictor can predict.
pub fn coverage<P: Predictor + ?Sized>(p: &P, ds: &RatingsDataset) -> f64 {
    let records = test_records(ds);
    if records.is_empty() {
        return 0.0;
    }
    let hits = records.iter().filter(|r| p.predict(r.user, r.item).is_some()).count();
    hits as f64 / records.len() as f64
}

/// Which of a user's ratings form the target set in the overlap measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapTargets {
    #[default]
    TestSide,
    AllRatings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub beta: f64,
    /// Truncation error target that picks the walk cutoff.
    pub walk_tol: f64,
    pub drop_tol: f64,
    pub denominator: IndirectDenominator,
    pub cf: CfConfig,
    pub top_n: Vec<usize>,
    pub k_neighbourhood: usize,
    pub overlap_targets: OverlapTargets,
    pub beta_grid: Vec<f64>,
    #[serde(skip)]
    pub exec: Execution,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            beta: DEFAULT_BETA,
            walk_tol: 1e-6,
            drop_tol: DEFAULT_DROP_TOL,
            denominator: IndirectDenominator::Reach,
            cf: CfConfig::default(),
            top_n: vec![10, 20, 50, 100],
            k_neighbourhood: 100,
            overlap_targets: OverlapTargets::TestSide,
            beta_grid: (0..10).map(|k| k as f64 / 10.0).collect(),
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapValue {
    pub n: usize,
    pub value: f64,
}

/// Per-N averages of the global, CF and TW overlap measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapResult {
    pub global: Vec<OverlapValue>,
    pub cf: Vec<OverlapValue>,
    pub tw: Vec<OverlapValue>,
    pub users: usize,
    pub excluded_users: usize,
}

/// Items ranked by how many of `raters` rated them in training (ties by item
/// index), at most `n` of them.
fn most_rated<I: IntoIterator<Item = usize>>(ratings: &RatingFunction, raters: I, n: usize) -> Vec<usize> {
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for u in raters {
        for &(o, _) in ratings.of_agent(u) {
            *counts.entry(o).or_default() += 1;
        }
    }
    let mut ranked: Vec<(usize, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.into_iter().take(n).map(|(o, _)| o).collect()
}

fn overlap(targets: &[usize], candidates: &[usize], n: usize) -> f64 {
    let hits = candidates.iter().filter(|o| targets.binary_search(o).is_ok()).count();
    hits as f64 / targets.len().min(n) as f64
}

fn target_sets(ds: &RatingsDataset, mode: OverlapTargets) -> Vec<Vec<usize>> {
    let mut sets = vec![Vec::new(); ds.n_users()];
    let chosen: Box<dyn Iterator<Item = &Rating>> = match mode {
        OverlapTargets::TestSide => Box::new(ds.test()),
        OverlapTargets::AllRatings => Box::new(ds.ratings.iter()),
    };
    for r in chosen {
        sets[r.user].push(r.item);
    }
    for s in &mut sets {
        s.sort_unstable();
        s.dedup();
    }
    sets
}

/// Overlap of each user's target items with the globally most-rated items
/// and with the most-rated items of its CF and TW neighbourhoods, averaged
/// over users whose target set is non-empty.
pub fn top_n_overlap(
    ds: &RatingsDataset,
    ns: &[usize],
    k_neighbourhood: usize,
    cf: &CfPredictor,
    tw: &TwPredictor,
    targets: OverlapTargets,
) -> Result<OverlapResult> {
    if ns.iter().any(|&n| n == 0) {
        return Err(Error::invalid("overlap size N must be at least 1"));
    }
    let train = ds.train_ratings();
    let sets = target_sets(ds, targets);
    let users: Vec<usize> = (0..ds.n_users()).filter(|&u| !sets[u].is_empty()).collect();
    let max_n = ns.iter().copied().max().unwrap_or(0);
    let global = most_rated(&train, 0..ds.n_users(), max_n);

    let mut sums = vec![[0.0f64; 3]; ns.len()];
    for &u in &users {
        let via_cf = most_rated(&train, cf.neighbourhood(u, k_neighbourhood), max_n);
        let via_tw = most_rated(&train, tw.neighbourhood(u, k_neighbourhood), max_n);
        for (slot, &n) in ns.iter().enumerate() {
            let cut = |v: &[usize]| v[..v.len().min(n)].to_vec();
            sums[slot][0] += overlap(&sets[u], &cut(&global), n);
            sums[slot][1] += overlap(&sets[u], &cut(&via_cf), n);
            sums[slot][2] += overlap(&sets[u], &cut(&via_tw), n);
        }
    }
    let count = users.len().max(1) as f64;
    let column = |c: usize| {
        ns.iter()
            .zip(&sums)
            .map(|(&n, s)| OverlapValue { n, value: s[c] / count })
            .collect()
    };
    Ok(OverlapResult {
        global: column(0),
        cf: column(1),
        tw: column(2),
        users: users.len(),
        excluded_users: ds.n_users() - users.len(),
    })
}

fn users_with_test(ds: &RatingsDataset) -> Vec<usize> {
    let mut users: Vec<usize> = ds.test().map(|r| r.user).collect();
    users.sort_unstable();
    users.dedup();
    users
}

/// TW error and coverage at one damping value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaPoint {
    pub beta: f64,
    pub mae: Option<f64>,
    pub coverage: f64,
    pub predictions: usize,
}

/// TW error for each `β`, every other setting fixed.
pub fn beta_sweep(ds: &RatingsDataset, grid: &[f64], cfg: &EvalConfig) -> Result<Vec<BetaPoint>> {
    let records = test_records(ds);
    if records.is_empty() {
        return Err(Error::Empty("test partition is empty".into()));
    }
    let users = users_with_test(ds);
    grid.iter()
        .map(|&beta| {
            let tw = TwPredictor::new(ds, cfg, beta, &users)?;
            let preds = predict_all(&tw, &records, cfg.exec);
            let (p, t) = covered_pairs(&preds, &records, |_| true);
            Ok(BetaPoint {
                beta,
                mae: mae(&p, &t, RatingScale::FIVE_STARS).ok(),
                coverage: p.len() as f64 / records.len() as f64,
                predictions: p.len(),
            })
        })
        .collect()
}

/// `beta,mae,coverage,predictions`, one row per grid value.
pub fn write_beta_csv<W: Write>(points: &[BetaPoint], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["beta", "mae", "coverage", "predictions"])?;
    for p in points {
        w.write_record([
            p.beta.to_string(),
            p.mae.map_or_else(String::new, |m| m.to_string()),
            p.coverage.to_string(),
            p.predictions.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn covered_pairs<F: Fn(usize) -> bool>(
    preds: &[Option<f64>],
    records: &[Rating],
    keep: F,
) -> (Vec<f64>, Vec<f64>) {
    preds
        .iter()
        .zip(records)
        .enumerate()
        .filter_map(|(k, (p, r))| p.filter(|_| keep(k)).map(|p| (p, f64::from(r.stars))))
        .unzip()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PerMethod<T> {
    pub tw: T,
    pub cf: T,
    pub sa: T,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RuntimeStats {
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    /// Normalised MAE over each method's own covered records.
    pub mae_tw: Option<f64>,
    pub mae_cf: Option<f64>,
    pub mae_sa: Option<f64>,
    /// Normalised MAE over the records all three methods cover.
    pub mae_common: PerMethod<Option<f64>>,
    pub common_records: usize,
    pub coverage_tw: f64,
    pub coverage_cf: f64,
    pub coverage_sa: f64,
    pub predictions: PerMethod<usize>,
    pub test_records: usize,
    pub train_records: usize,
    pub overlap_global: Vec<OverlapValue>,
    pub overlap_cf: Vec<OverlapValue>,
    pub overlap_tw: Vec<OverlapValue>,
    pub overlap_users: usize,
    pub overlap_excluded_users: usize,
    pub overlap_note: String,
    pub beta: f64,
    pub beta_grid: Vec<BetaPoint>,
    /// Wall-clock time; left out of serialised output so reports stay
    /// byte-identical across runs.
    #[serde(skip)]
    pub runtime: RuntimeStats,
}

/// Runs all three predictors on the test partition of `ds`.
pub fn evaluate(ds: &RatingsDataset, cfg: &EvalConfig) -> Result<EvaluationReport> {
    let started = Instant::now();
    let records = test_records(ds);
    if records.is_empty() {
        return Err(Error::Empty("test partition is empty".into()));
    }
    let users = match cfg.overlap_targets {
        OverlapTargets::TestSide => users_with_test(ds),
        OverlapTargets::AllRatings => {
            let mut u: Vec<usize> = ds.ratings.iter().map(|r| r.user).collect();
            u.sort_unstable();
            u.dedup();
            u
        }
    };
    let sa = SaPredictor::new(ds);
    let cf = CfPredictor::new(ds, cfg.cf, &users, cfg.exec);
    let tw = TwPredictor::new(ds, cfg, cfg.beta, &users)?;

    let p_tw = predict_all(&tw, &records, cfg.exec);
    let p_cf = predict_all(&cf, &records, cfg.exec);
    let p_sa = predict_all(&sa, &records, cfg.exec);
    let common: Vec<bool> = (0..records.len())
        .map(|k| p_tw[k].is_some() && p_cf[k].is_some() && p_sa[k].is_some())
        .collect();

    let scale = RatingScale::FIVE_STARS;
    let own = |p: &[Option<f64>]| {
        let (a, b) = covered_pairs(p, &records, |_| true);
        (mae(&a, &b, scale).ok(), a.len())
    };
    let shared = |p: &[Option<f64>]| {
        let (a, b) = covered_pairs(p, &records, |k| common[k]);
        mae(&a, &b, scale).ok()
    };
    let (mae_tw, n_tw) = own(&p_tw);
    let (mae_cf, n_cf) = own(&p_cf);
    let (mae_sa, n_sa) = own(&p_sa);
    let total = records.len() as f64;

    let ov = top_n_overlap(ds, &cfg.top_n, cfg.k_neighbourhood, &cf, &tw, cfg.overlap_targets)?;
    let beta_grid = beta_sweep(ds, &cfg.beta_grid, cfg)?;

    Ok(EvaluationReport {
        mae_tw,
        mae_cf,
        mae_sa,
        mae_common: PerMethod {
            tw: shared(&p_tw),
            cf: shared(&p_cf),
            sa: shared(&p_sa),
        },
        common_records: common.iter().filter(|&&c| c).count(),
        coverage_tw: n_tw as f64 / total,
        coverage_cf: n_cf as f64 / total,
        coverage_sa: n_sa as f64 / total,
        predictions: PerMethod {
            tw: n_tw,
            cf: n_cf,
            sa: n_sa,
        },
        test_records: records.len(),
        train_records: ds.train().count(),
        overlap_global: ov.global,
        overlap_cf: ov.cf,
        overlap_tw: ov.tw,
        overlap_users: ov.users,
        overlap_excluded_users: ov.excluded_users,
        overlap_note: "CF neighbourhoods are chosen by co-rating, which favours the CF overlap"
            .to_string(),
        beta: cfg.beta,
        beta_grid,
        runtime: RuntimeStats {
            seconds: started.elapsed().as_secs_f64(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{parse, synthesize_community_dataset, CommunitySpec, Split};
    use approx::assert_abs_diff_eq;

    const STARS: RatingScale = RatingScale::FIVE_STARS;

    #[test]
    fn mae_examples() {
        assert_eq!(mae(&[3.0, 4.0], &[3.0, 4.0], STARS).unwrap(), 0.0);
        assert_eq!(mae(&[1.0; 4], &[5.0; 4], STARS).unwrap(), 1.0);
        assert_eq!(mae(&[4.0, 2.0], &[5.0, 3.0], STARS).unwrap(), 0.25);
        assert!(matches!(mae(&[], &[], STARS), Err(Error::Empty(_))));
        assert!(mae(&[1.0], &[], STARS).is_err());
    }

    #[test]
    fn overlap_examples() {
        assert_eq!(overlap(&[1, 2], &[2, 1, 7], 3), 1.0);
        assert_eq!(overlap(&[1, 2], &[5, 6], 3), 0.0);
        assert_eq!(overlap(&[1, 2, 3, 4], &[1, 9], 2), 0.5);
    }

    /// Three users who trust each other in a ring; the last rating of each
    /// user is held out.
    fn ring() -> RatingsDataset {
        let mut ds = parse(
            "a,x,5\na,y,4\na,z,1\nb,x,5\nb,y,4\nb,z,2\nc,x,4\nc,y,5\nc,w,3\n".as_bytes(),
            "r",
            "a,b\nb,c\nc,a\n".as_bytes(),
            "t",
        )
        .unwrap();
        for r in &mut ds.ratings {
            if ds.item_ids[r.item] == "z" && ds.user_ids[r.user] == "a" {
                r.split = Split::Test;
            }
            if ds.item_ids[r.item] == "w" {
                r.split = Split::Test;
            }
        }
        ds
    }

    #[test]
    fn sa_covers_trained_items_only() {
        let ds = ring();
        let sa = SaPredictor::new(&ds);
        // z was rated by b in training; w only appears in the test set.
        assert_eq!(coverage(&sa, &ds), 0.5);
    }

    #[test]
    fn tw_at_zero_beta_uses_direct_neighbours() {
        let ds = ring();
        let users = [0, 1, 2];
        let tw = TwPredictor::new(&ds, &EvalConfig::default(), 0.0, &users).unwrap();
        // a trusts only b, who rated z with 2.
        assert_eq!(tw.predict(0, 2), Some(2.0));
        assert_eq!(tw.neighbourhood(0, 10), vec![1]);
        let tw = TwPredictor::new(&ds, &EvalConfig::default(), 0.8, &users).unwrap();
        assert_eq!(tw.neighbourhood(0, 10), vec![1, 2]);
    }

    #[test]
    fn cf_without_co_raters_is_uncovered() {
        let ds = ring();
        let cf = CfPredictor::new(&ds, CfConfig::default(), &[0, 1, 2], Execution::Sequential);
        assert_eq!(cf.predict(2, 3), None);
        // a and b agree on x and y, so b's deviation on z carries over.
        let p = cf.predict(0, 2).unwrap();
        assert_abs_diff_eq!(p, 4.5 + (2.0 - 11.0 / 3.0), epsilon = 1e-12);
    }

    #[test]
    fn overlap_of_contained_targets_is_one() {
        let ds = ring();
        let users = [0, 1, 2];
        let cf = CfPredictor::new(&ds, CfConfig::default(), &users, Execution::Sequential);
        let tw = TwPredictor::new(&ds, &EvalConfig::default(), 0.8, &users).unwrap();
        let ov = top_n_overlap(&ds, &[3], 10, &cf, &tw, OverlapTargets::TestSide).unwrap();
        // Only a and c have test items; z is among the three most-rated
        // training items, w is not rated in training at all.
        assert_eq!(ov.users, 2);
        assert_eq!(ov.excluded_users, 1);
        assert_eq!(ov.global[0].value, 0.5);
        assert!(top_n_overlap(&ds, &[0], 10, &cf, &tw, OverlapTargets::TestSide).is_err());
    }

    #[test]
    fn report_on_synthetic_data_is_bounded_and_deterministic() {
        let spec = CommunitySpec {
            users_per_community: 60,
            items_per_community: 80,
            p_rate_intra: 0.1,
            p_trust_intra: 0.1,
            ..CommunitySpec::default()
        };
        let mut ds = synthesize_community_dataset(&spec).unwrap();
        ds.split(0.2, 4).unwrap();
        let cfg = EvalConfig {
            beta_grid: vec![0.0, 0.5, 0.8],
            ..EvalConfig::default()
        };
        let rep = evaluate(&ds, &cfg).unwrap();
        for m in [rep.mae_tw, rep.mae_cf, rep.mae_sa] {
            let m = m.unwrap();
            assert!((0.0..=1.0).contains(&m));
        }
        for c in [rep.coverage_tw, rep.coverage_cf, rep.coverage_sa] {
            assert!((0.0..=1.0).contains(&c));
        }
        assert!(rep.coverage_sa >= rep.coverage_cf);
        for v in rep.overlap_global.iter().chain(&rep.overlap_cf).chain(&rep.overlap_tw) {
            assert!((0.0..=1.0).contains(&v.value));
        }
        assert_eq!(rep.beta_grid.len(), 3);
        let again = evaluate(&ds, &EvalConfig { exec: Execution::Sequential, ..cfg }).unwrap();
        assert_eq!(
            serde_json::to_string(&rep).unwrap(),
            serde_json::to_string(&again).unwrap()
        );
    }

    #[test]
    fn beta_csv_has_one_row_per_value() {
        let points = [
            BetaPoint { beta: 0.0, mae: Some(0.2), coverage: 0.5, predictions: 3 },
            BetaPoint { beta: 0.5, mae: None, coverage: 0.0, predictions: 0 },
        ];
        let mut buf = Vec::new();
        write_beta_csv(&points, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "beta,mae,coverage,predictions\n0,0.2,0.5,3\n0.5,,0,0\n");
    }
}
