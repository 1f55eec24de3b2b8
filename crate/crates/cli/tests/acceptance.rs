//! Acceptance suite. Each test checks one criterion, prints a single
//! `PASS`/`FAIL` line straight to stdout (so it shows even when output is
//! captured), and then asserts.

use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trustweb::dataset::{
    clean, synthesize_community_dataset, synthesize_relay_dataset, CommunitySpec, RelaySpec,
    Split,
};
use trustweb::dynamics::{
    fixed_point_residual, polarized_configuration, MeanFieldConfig, ProfileVector,
};
use trustweb::evaluate::{beta_sweep, evaluate, EvalConfig};
use trustweb::graph::{generate_random_graph, strongly_connected_components, RandomGraphSpec, TrustGraph};
use trustweb::metric::{
    defining_identity_residual, indirect_trust_exact, indirect_trust_iterative,
    indirect_trust_truncated, naive_recursion_demo, normalize_direct, normalize_indirect,
    truncation_bound, IndirectTrustMatrix, MetricConfig, NaiveOutcome, NormalizationMode,
    RowNormalizedMatrix,
};
use trustweb::simulate::{run, sweep, SimulationConfig, TimeSeriesResult};

fn verdict(criterion: u32, ok: bool, elapsed: Duration, detail: String) {
    let line = format!(
        "acceptance criterion {criterion:>2}: {} ({:.2} s) {detail}\n",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    assert!(ok, "criterion {criterion} failed: {detail}");
}

fn two_cycle() -> RowNormalizedMatrix {
    let g = TrustGraph::from_edges(2, [(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
    normalize_direct(&g, NormalizationMode::Strict)
}

#[test]
fn criterion_01_cycle_closed_form() {
    let start = Instant::now();
    let beta = 0.8;
    let expected = 1.0 / (1.0 - beta * beta);
    let s = two_cycle();
    let cfg = MetricConfig::default();
    let exact = indirect_trust_exact(&s, beta, &cfg).unwrap().get(0, 1);
    let iter = indirect_trust_iterative(&s, beta, 1e-12, None, &cfg).unwrap().get(0, 1);
    let elapsed = start.elapsed();
    let ok = (exact - expected).abs() < 1e-10
        && (iter - expected).abs() < 1e-10
        && elapsed < Duration::from_secs(1);
    verdict(1, ok, elapsed, format!("exact {exact:.12}, iterative {iter:.12}, closed form {expected:.12}"));
}

/// The 30 graphs of the solver checks, with uniform (0, 1] trust weights.
fn solver_cases() -> Vec<(RowNormalizedMatrix, f64, String)> {
    let ns = [10usize, 50, 200];
    let ds = [3.0f64, 7.0, 15.0];
    let betas = [0.1, 0.5, 0.85];
    (0..30)
        .map(|k| {
            let n = ns[k % 3];
            // Degree 15 cannot be reached with 10 agents; use the complete graph.
            let d = ds[(k / 3) % 3].min((n - 1) as f64);
            let beta = betas[(k / 9) % 3];
            let g = generate_random_graph(&RandomGraphSpec::new(n, d, k as u64)).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + k as u64);
            let g = g.map_weights(|_, _, _| 1.0 - rng.gen::<f64>());
            let s = normalize_direct(&g, NormalizationMode::Strict);
            (s, beta, format!("n={n} d={d} beta={beta} seed={k}"))
        })
        .collect()
}

fn cutoff_below(beta: f64, bound: f64) -> usize {
    (1..).find(|&l| truncation_bound(beta, l) < bound).unwrap()
}

fn max_diff(a: &IndirectTrustMatrix, b: &IndirectTrustMatrix) -> f64 {
    a.to_dense()
        .iter()
        .zip(b.to_dense())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn criterion_02_solver_triangle() {
    let start = Instant::now();
    let cfg = MetricConfig::default();
    let mut worst_gap = 0.0f64;
    let mut worst_residual = 0.0f64;
    let mut failures = Vec::new();
    for (s, beta, label) in solver_cases() {
        let exact = indirect_trust_exact(&s, beta, &cfg).unwrap();
        let iter = indirect_trust_iterative(&s, beta, 1e-12, None, &cfg).unwrap();
        let trunc = indirect_trust_truncated(&s, beta, cutoff_below(beta, 1e-10), None, &cfg).unwrap();
        let gap = max_diff(&exact, &iter).max(max_diff(&exact, &trunc)).max(max_diff(&iter, &trunc));
        let residual = [&exact, &iter, &trunc]
            .iter()
            .map(|t| defining_identity_residual(&s, t, beta))
            .fold(0.0, f64::max);
        worst_gap = worst_gap.max(gap);
        worst_residual = worst_residual.max(residual);
        if gap >= 1e-8 || residual >= 1e-8 {
            failures.push(label);
        }
    }
    let elapsed = start.elapsed();
    let ok = failures.is_empty() && elapsed < Duration::from_secs(60);
    verdict(
        2,
        ok,
        elapsed,
        format!("max pairwise gap {worst_gap:.2e}, max residual {worst_residual:.2e}, failing cases {failures:?}"),
    );
}

#[test]
fn criterion_03_bounds_and_row_sums() {
    let start = Instant::now();
    let cfg = MetricConfig::default();
    let mut problems = Vec::new();
    let mut worst_row = 0.0f64;
    for (s, beta, label) in solver_cases() {
        let t = indirect_trust_exact(&s, beta, &cfg).unwrap();
        let n = s.n();
        let dense = t.to_dense();
        let cap = 1.0 / (1.0 - beta);
        if dense.iter().any(|&v| !(0.0..=cap).contains(&v)) {
            problems.push(format!("{label}: entry outside [0, {cap}]"));
        }
        let s_dense = s.to_dense();
        if dense.iter().zip(&s_dense).any(|(t, s)| *t < *s) {
            problems.push(format!("{label}: indirect below direct"));
        }
        let st = normalize_indirect(&t);
        for i in 0..n {
            for m in [&s, &st] {
                if !m.is_zero_row(i) {
                    worst_row = worst_row.max((m.row_sum(i) - 1.0).abs());
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let ok = problems.is_empty() && worst_row <= 1e-12;
    verdict(3, ok, elapsed, format!("max |row sum - 1| {worst_row:.2e}, problems {problems:?}"));
}

#[test]
fn criterion_04_naive_recursion() {
    let start = Instant::now();
    let ring = TrustGraph::from_edges(
        10,
        (0..10).map(|i| (i, (i + 1) % 10, 1.0)).chain([(0, 2, 1.0)]),
    )
    .unwrap();
    let primitive = naive_recursion_demo(&normalize_direct(&ring, NormalizationMode::Strict), 1e-8, 10_000);
    let bipartite = naive_recursion_demo(&two_cycle(), 1e-8, 10_000);
    let elapsed = start.elapsed();
    let collapsed = primitive.variance_below_tol_at.is_some_and(|k| k <= 10_000)
        && primitive.outcome == NaiveOutcome::Consensus;
    let ok = collapsed && !bipartite.converged && elapsed < Duration::from_secs(5);
    verdict(
        4,
        ok,
        elapsed,
        format!(
            "primitive variance < 1e-8 at step {:?} ({:?}); two-cycle converged = {}",
            primitive.variance_below_tol_at, primitive.outcome, bipartite.converged
        ),
    );
}

#[test]
fn criterion_05_mean_field_fixed_point() {
    let start = Instant::now();
    let n = 40;
    let profiles = ProfileVector::split_half(n);
    let mut g = generate_random_graph(&RandomGraphSpec::new(n, 5.0, 21)).unwrap();
    // Give every agent at least one neighbour of its own profile.
    for i in 0..n {
        if !g.neighbours(i).any(|j| profiles.same(i, j)) {
            let j = (0..n).find(|&j| j != i && profiles.same(i, j)).unwrap();
            g.connect(i, j).unwrap();
            g.connect(j, i).unwrap();
        }
    }
    let cross = g.links().filter(|&(i, j, _)| !profiles.same(i, j)).count();
    let polar = polarized_configuration(&g, &profiles);
    let cfg = MeanFieldConfig::default();
    let mut worst = 0.0f64;
    for eta in [0.0, 0.5, 1.0] {
        for beta in [0.5, 0.8] {
            worst = worst.max(fixed_point_residual(&polar, &profiles, eta, beta, &cfg).unwrap());
        }
    }
    let zero = g.map_weights(|_, _, _| 0.0);
    let zero_residual = fixed_point_residual(&zero, &profiles, 0.5, 0.8, &cfg).unwrap();
    let elapsed = start.elapsed();
    let ok = worst < 1e-12 && zero_residual > 0.1 && cross > 0 && elapsed < Duration::from_secs(5);
    verdict(
        5,
        ok,
        elapsed,
        format!("polarised residual {worst:.2e}, zero-trust residual {zero_residual:.3}, cross links {cross}"),
    );
}

fn desk_config(eta: f64) -> SimulationConfig {
    SimulationConfig {
        n_agents: 500,
        mean_degree: 7.0,
        gamma: 0.75,
        beta: 0.8,
        u_thr: 0.5,
        steps: 50,
        runs: 20,
        eta,
        seed: 2024,
        ..SimulationConfig::default()
    }
}

/// The η = 0.25 series is shared with the performance criterion.
fn fast_signalling() -> &'static (TimeSeriesResult, Duration) {
    static CELL: OnceLock<(TimeSeriesResult, Duration)> = OnceLock::new();
    CELL.get_or_init(|| {
        let start = Instant::now();
        let r = run(&desk_config(0.25)).unwrap();
        (r, start.elapsed())
    })
}

#[test]
fn criterion_06_simulation_convergence() {
    let (fast, fast_time) = fast_signalling();
    let start = Instant::now();
    let slow = run(&desk_config(0.05)).unwrap();
    let elapsed = *fast_time + start.elapsed();
    let end = fast.at(50).unwrap();
    let (cf, cs) = (fast.first_crossing(0.8), slow.first_crossing(0.8));
    let earlier = match (cf, cs) {
        (Some(f), Some(s)) => f < s,
        (Some(_), None) => true,
        _ => false,
    };
    let ok = end.mean_same_trust >= 0.9
        && end.mean_cross_trust <= 0.05
        && earlier
        && elapsed < Duration::from_secs(600);
    verdict(
        6,
        ok,
        elapsed,
        format!(
            "eta 0.25 at t=50: same {:.4}, cross {:.4}; crossing 0.8 at {cf:?} (eta 0.25) vs {cs:?} (eta 0.05)",
            end.mean_same_trust, end.mean_cross_trust
        ),
    );
}

#[test]
fn criterion_07_phase_structure() {
    let start = Instant::now();
    let degrees = [3.0, 5.0, 7.0, 9.0];
    let etas = [0.02, 0.05, 0.1, 0.2];
    let base = SimulationConfig {
        steps: 10,
        runs: 20,
        seed: 77,
        ..SimulationConfig::default()
    };
    let result = sweep(&base, &degrees, &etas).unwrap();
    let at10 = |a: usize, b: usize| *result.cell(a, b).at(10).unwrap();
    let mut violations = Vec::new();
    let mut check = |lo: (usize, usize), hi: (usize, usize)| {
        let (p, q) = (at10(lo.0, lo.1), at10(hi.0, hi.1));
        let slack = 2.0 * (p.stderr_same.powi(2) + q.stderr_same.powi(2)).sqrt();
        if q.mean_same_trust < p.mean_same_trust - slack {
            violations.push(format!(
                "d={} eta={} -> d={} eta={}: {:.4} < {:.4}",
                degrees[lo.0], etas[lo.1], degrees[hi.0], etas[hi.1], q.mean_same_trust, p.mean_same_trust
            ));
        }
    };
    for a in 0..4 {
        for b in 0..4 {
            if a + 1 < 4 {
                check((a, b), (a + 1, b));
            }
            if b + 1 < 4 {
                check((a, b), (a, b + 1));
            }
        }
    }
    let grid: Vec<String> = (0..4)
        .map(|a| {
            (0..4)
                .map(|b| format!("{:.3}", at10(a, b).mean_same_trust))
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();
    let elapsed = start.elapsed();
    let ok = violations.is_empty() && elapsed < Duration::from_secs(1800);
    verdict(7, ok, elapsed, format!("t=10 grid rows by d [{}]; violations {violations:?}", grid.join(" | ")));
}

#[test]
fn criterion_08_performance() {
    let (fast, elapsed) = fast_signalling();
    let (phi0, phi50) = (fast.at(0).unwrap().phi, fast.at(50).unwrap().phi);
    let ok = phi50 >= 0.85 && phi0 == 0.0;
    verdict(8, ok, *elapsed, format!("phi(0) = {phi0}, phi(50) = {phi50:.4}"));
}

#[test]
fn criterion_09_dataset_pipeline() {
    let start = Instant::now();
    let spec = CommunitySpec {
        communities: 2,
        users_per_community: 200,
        items_per_community: 250,
        seed: 9,
        ..CommunitySpec::default()
    };
    let raw = synthesize_community_dataset(&spec).unwrap();
    let ratings_per_user = raw.ratings.len() as f64 / raw.n_users() as f64;
    let trust_per_user = raw.trust.len() as f64 / raw.n_users() as f64;
    let (cleaned, _) = clean(&raw).unwrap();
    let (again, _) = clean(&cleaned).unwrap();
    let idempotent = again == cleaned;
    let connected = strongly_connected_components(&cleaned.trust_graph()).len() == 1;
    let mut ds = cleaned;
    ds.split(0.2, 9).unwrap();
    let cfg = EvalConfig {
        top_n: vec![20],
        beta_grid: vec![0.8],
        ..EvalConfig::default()
    };
    let report = evaluate(&ds, &cfg).unwrap();
    let (o_global, o_tw) = (report.overlap_global[0].value, report.overlap_tw[0].value);
    let (mae_tw, mae_cf) = (report.mae_tw.unwrap(), report.mae_cf.unwrap());
    let elapsed = start.elapsed();
    let ok = report.coverage_tw > report.coverage_cf
        && o_tw > o_global
        && (0.0..=1.0).contains(&mae_tw)
        && (0.0..=1.0).contains(&mae_cf)
        && idempotent
        && connected
        && elapsed < Duration::from_secs(300);
    verdict(
        9,
        ok,
        elapsed,
        format!(
            "coverage TW {:.3} vs CF {:.3}; O^20 TW {o_tw:.3} vs global {o_global:.3}; MAE TW {mae_tw:.3} CF {mae_cf:.3}; \
             idempotent {idempotent}; strongly connected {connected}; per user {trust_per_user:.1} trust vs {ratings_per_user:.1} ratings",
            report.coverage_tw, report.coverage_cf
        ),
    );
}

fn mean_and_stderr(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

#[test]
fn criterion_10_beta_sweep_mechanism() {
    let start = Instant::now();
    let spec = RelaySpec {
        seed: 10,
        ..RelaySpec::default()
    };
    let base = synthesize_relay_dataset(&spec).unwrap();
    let cfg = EvalConfig::default();
    let (mut at0, mut at8) = (Vec::new(), Vec::new());
    for seed in 0..10 {
        let mut ds = base.clone();
        ds.split(0.2, seed).unwrap();
        // Score only seekers, whose informative raters are two hops away.
        for r in &mut ds.ratings {
            if !spec.is_seeker(r.user) {
                r.split = Split::Train;
            }
        }
        let points = beta_sweep(&ds, &[0.0, 0.8], &cfg).unwrap();
        at0.push(points[0].mae.unwrap());
        at8.push(points[1].mae.unwrap());
    }
    let (m0, se0) = mean_and_stderr(&at0);
    let (m8, se8) = mean_and_stderr(&at8);
    let margin = m0 - m8;
    let two_se = 2.0 * (se0 * se0 + se8 * se8).sqrt();
    let elapsed = start.elapsed();
    let ok = margin > two_se && elapsed < Duration::from_secs(600);
    verdict(
        10,
        ok,
        elapsed,
        format!("MAE beta=0 {m0:.4} ± {se0:.4}, beta=0.8 {m8:.4} ± {se8:.4}; margin {margin:.4} vs 2 SE {two_se:.4}"),
    );
}

fn twr(args: &[&str], dir: &Path) {
    let out = Command::new(env!("CARGO_BIN_EXE_twr"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "twr {args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn criterion_11_cli_determinism() {
    let start = Instant::now();
    let work = tempfile::tempdir().unwrap();
    let graph = work.path().join("graph.tsv");
    std::fs::write(&graph, "0\t1\t1\n1\t2\t0.5\n2\t0\t1\n2\t1\t0.25\n").unwrap();
    let graph = graph.to_str().unwrap().to_string();
    let synth_dir = work.path().join("data");
    twr(&["synth", "--seed", "5", "--users-per-community", "40", "--items-per-community", "60"], &synth_dir);
    let ratings = synth_dir.join("ratings.csv").to_str().unwrap().to_string();
    let trust = synth_dir.join("trust.csv").to_str().unwrap().to_string();

    let invocations: Vec<Vec<&str>> = vec![
        vec!["simulate", "--seed", "3", "--n-agents", "60", "--runs", "4", "--steps", "5", "--etas", "0.1,0.3"],
        vec!["simulate", "--seed", "3", "--n-agents", "60", "--runs", "4", "--steps", "5", "--format", "json"],
        vec!["trust", "--graph", &graph],
        vec!["trust", "--graph", &graph, "--strategy", "truncated", "--format", "json"],
        vec!["evaluate", "--seed", "4", "--ratings", &ratings, "--trust", &trust, "--beta-grid", "0,0.5,0.8"],
        vec!["evaluate", "--seed", "4", "--kind", "relay", "--beta-grid", "0,0.8", "--format", "json"],
        vec!["synth", "--seed", "5", "--kind", "relay"],
        vec!["demo-naive", "--format", "json"],
        vec!["demo-naive"],
    ];
    let mut differing = Vec::new();
    for (k, args) in invocations.iter().enumerate() {
        let a = work.path().join(format!("{k}a"));
        let b = work.path().join(format!("{k}b"));
        twr(args, &a);
        twr(args, &b);
        let (sa, sb) = (snapshot(&a), snapshot(&b));
        if sa.is_empty() || sa != sb {
            differing.push(args.join(" "));
        }
    }
    let elapsed = start.elapsed();
    verdict(
        11,
        differing.is_empty(),
        elapsed,
        format!("{} invocations run twice; differing outputs {differing:?}", invocations.len()),
    );
}
