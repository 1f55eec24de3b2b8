use std::io::Write;

use serde::Serialize;
use trustweb::dataset::{
    clean, load, synthesize_community_dataset, synthesize_relay_dataset, write_ratings_csv,
    write_trust_csv, CleanReport, CommunitySpec, LoadReport, RatingsDataset, RelaySpec,
    SplitReport,
};
use trustweb::evaluate::{evaluate as run_evaluation, write_beta_csv, EvalConfig, EvaluationReport};
use trustweb::graph::{read_edge_list, TrustGraph};
use trustweb::metric::{
    indirect_trust, naive_recursion_demo, normalize_direct, normalize_indirect_with,
    write_indirect_dump, write_normalized_dump, IndirectDenominator, MetricConfig,
    NormalizationMode, SolveInfo, DEFAULT_BETA,
};
use trustweb::simulate::{sweep, write_sweep_csv, SimulationConfig, SweepResult, SWEEP_CSV_HEADER};
use trustweb::Execution;

use crate::output::{csv_body, json, Sink};
use crate::settings::{parse_opt, Settings};
use crate::{CliError, Format};

fn exec(s: &Settings) -> Result<Execution, CliError> {
    Ok(parse_opt("exec", &s.exec)?.unwrap_or_default())
}

fn metric_config(s: &Settings) -> Result<MetricConfig, CliError> {
    let d = MetricConfig::default();
    Ok(MetricConfig {
        strategy: parse_opt("strategy", &s.strategy)?.unwrap_or(d.strategy),
        tol: s.tol.unwrap_or(d.tol),
        max_iter: s.max_iter.or(d.max_iter),
        walk_cutoff: s.walk_cutoff.or(d.walk_cutoff),
        drop_tol: s.drop_tol.unwrap_or(d.drop_tol),
        dense_threshold: s.dense_threshold.unwrap_or(d.dense_threshold),
        exec: exec(s)?,
    })
}

fn simulation_config(s: &Settings) -> Result<SimulationConfig, CliError> {
    let d = SimulationConfig::default();
    Ok(SimulationConfig {
        n_agents: s.n_agents.unwrap_or(d.n_agents),
        mean_degree: s.mean_degree.unwrap_or(d.mean_degree),
        eta: s.eta.unwrap_or(d.eta),
        gamma: s.gamma.unwrap_or(d.gamma),
        beta: s.beta.unwrap_or(d.beta),
        u_thr: s.u_thr.unwrap_or(d.u_thr),
        steps: s.steps.unwrap_or(d.steps),
        runs: s.runs.unwrap_or(d.runs),
        seed: s.seed.unwrap_or(d.seed),
        normalization: parse_opt("normalization", &s.normalization)?.unwrap_or(d.normalization),
        update_rule: parse_opt("update_rule", &s.update_rule)?.unwrap_or(d.update_rule),
        metric: metric_config(s)?,
        exec: exec(s)?,
    })
}

#[derive(Serialize)]
struct SweepSidecar<'a> {
    config: &'a SimulationConfig,
    degrees: &'a [f64],
    etas: &'a [f64],
    columns: [&'static str; 10],
}

pub fn simulate(s: &Settings, sink: &Sink, format: Format) -> Result<(), CliError> {
    let cfg = simulation_config(s)?;
    let degrees = s.degrees.clone().unwrap_or_else(|| vec![cfg.mean_degree]);
    let etas = s.etas.clone().unwrap_or_else(|| vec![cfg.eta]);
    let result: SweepResult = sweep(&cfg, &degrees, &etas)?;
    match format {
        Format::Csv => {
            sink.emit("simulate.csv", csv_body(|w| write_sweep_csv(&result, w)))?;
            let side = SweepSidecar {
                config: &result.config,
                degrees: &result.degrees,
                etas: &result.etas,
                columns: SWEEP_CSV_HEADER,
            };
            sink.sidecar("simulate.json", json(&side))
        }
        Format::Json => sink.emit("simulate.json", json(&result)),
    }
}

fn load_graph(s: &Settings) -> Result<TrustGraph, CliError> {
    let path = s.graph.as_ref().ok_or_else(|| CliError::usage("--graph <file> is required"))?;
    Ok(read_edge_list(path)?)
}

#[derive(Serialize)]
struct TrustOutput {
    n: usize,
    info: SolveInfo,
    normalization: NormalizationMode,
    denominator: IndirectDenominator,
    indirect: Vec<(usize, usize, f64)>,
    normalized: Vec<(usize, usize, f64)>,
}

pub fn trust(s: &Settings, sink: &Sink, format: Format) -> Result<(), CliError> {
    let g = load_graph(s)?;
    let beta = s.beta.unwrap_or(DEFAULT_BETA);
    let metric = metric_config(s)?;
    let mode = parse_opt("normalization", &s.normalization)?.unwrap_or(NormalizationMode::Strict);
    let denominator =
        parse_opt("denominator", &s.denominator)?.unwrap_or(IndirectDenominator::Neighbours);
    let direct = normalize_direct(&g, mode);
    let indirect = indirect_trust(&direct, beta, &metric)?;
    let normalized = normalize_indirect_with(&indirect, denominator, metric.drop_tol);
    let info = indirect.info().clone();
    match format {
        Format::Csv => {
            sink.emit("indirect.tsv", |w| write_indirect_dump(&indirect, w))?;
            sink.sidecar("normalized.tsv", |w| {
                write_normalized_dump(&normalized, beta, info.strategy.name(), info.residual, w)
            })
        }
        Format::Json => {
            let mut ind = Vec::new();
            for i in 0..indirect.n() {
                indirect.for_each_in_row(i, |j, v| ind.push((i, j, v)));
            }
            let norm = (0..normalized.n())
                .flat_map(|i| {
                    normalized
                        .row(i)
                        .iter()
                        .filter(|&&(_, v)| v != 0.0)
                        .map(move |&(j, v)| (i, j, v))
                })
                .collect();
            let out = TrustOutput {
                n: g.n_agents(),
                info,
                normalization: mode,
                denominator,
                indirect: ind,
                normalized: norm,
            };
            sink.emit("trust.json", json(&out))
        }
    }
}

fn community_spec(s: &Settings) -> Result<CommunitySpec, CliError> {
    let d = CommunitySpec::default();
    Ok(CommunitySpec {
        communities: s.communities.unwrap_or(d.communities),
        users_per_community: s.users_per_community.unwrap_or(d.users_per_community),
        items_per_community: s.items_per_community.unwrap_or(d.items_per_community),
        p_rate_intra: s.p_rate_intra.unwrap_or(d.p_rate_intra),
        p_rate_cross: s.p_rate_cross.unwrap_or(d.p_rate_cross),
        p_trust_intra: s.p_trust_intra.unwrap_or(d.p_trust_intra),
        p_trust_cross: s.p_trust_cross.unwrap_or(d.p_trust_cross),
        star_bias: star_bias(s)?.unwrap_or(d.star_bias),
        taste_agreement: s.taste_agreement.unwrap_or(d.taste_agreement),
        popularity_exponent: s.popularity_exponent.unwrap_or(d.popularity_exponent),
        seed: s.seed.unwrap_or(d.seed),
    })
}

fn relay_spec(s: &Settings) -> Result<RelaySpec, CliError> {
    let d = RelaySpec::default();
    Ok(RelaySpec {
        seekers: s.seekers.unwrap_or(d.seekers),
        connectors: s.connectors.unwrap_or(d.connectors),
        experts: s.experts.unwrap_or(d.experts),
        items: s.items.unwrap_or(d.items),
        p_rate_seeker: s.p_rate_seeker.unwrap_or(d.p_rate_seeker),
        p_rate_connector: s.p_rate_connector.unwrap_or(d.p_rate_connector),
        p_rate_expert: s.p_rate_expert.unwrap_or(d.p_rate_expert),
        connectors_per_seeker: s.connectors_per_seeker.unwrap_or(d.connectors_per_seeker),
        experts_per_connector: s.experts_per_connector.unwrap_or(d.experts_per_connector),
        seekers_per_expert: s.seekers_per_expert.unwrap_or(d.seekers_per_expert),
        star_bias: star_bias(s)?.unwrap_or(d.star_bias),
        taste_agreement: s.taste_agreement.unwrap_or(d.taste_agreement),
        seed: s.seed.unwrap_or(d.seed),
    })
}

fn star_bias(s: &Settings) -> Result<Option<[f64; 5]>, CliError> {
    s.star_bias
        .as_ref()
        .map(|v| {
            <[f64; 5]>::try_from(v.as_slice())
                .map_err(|_| CliError::usage(format!("star_bias needs 5 values, got {}", v.len())))
        })
        .transpose()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
enum SynthKind {
    Community,
    Relay,
}

#[derive(Serialize)]
#[serde(untagged)]
enum AnySpec {
    Community(CommunitySpec),
    Relay(RelaySpec),
}

fn synthesize(s: &Settings) -> Result<(RatingsDataset, SynthKind, AnySpec), CliError> {
    let kind = parse_opt("kind", &s.kind)?.unwrap_or(SynthKind::Community);
    Ok(match kind {
        SynthKind::Community => {
            let spec = community_spec(s)?;
            (synthesize_community_dataset(&spec)?, kind, AnySpec::Community(spec))
        }
        SynthKind::Relay => {
            let spec = relay_spec(s)?;
            (synthesize_relay_dataset(&spec)?, kind, AnySpec::Relay(spec))
        }
    })
}

#[derive(Serialize)]
struct SynthSummary {
    kind: SynthKind,
    spec: AnySpec,
    users: usize,
    items: usize,
    ratings: usize,
    relationships: usize,
    sparsity: f64,
}

pub fn synth(s: &Settings, sink: &Sink, format: Format) -> Result<(), CliError> {
    let (ds, kind, spec) = synthesize(s)?;
    let summary = SynthSummary {
        kind,
        spec,
        users: ds.n_users(),
        items: ds.n_items(),
        ratings: ds.ratings.len(),
        relationships: ds.trust.len(),
        sparsity: ds.sparsity(),
    };
    if sink.to_directory() {
        sink.sidecar("ratings.csv", csv_body(|w| write_ratings_csv(&ds, w)))?;
        sink.sidecar("trust.csv", csv_body(|w| write_trust_csv(&ds, w)))?;
        return sink.emit("synth.json", json(&summary));
    }
    match format {
        Format::Csv => sink.emit("ratings.csv", csv_body(|w| write_ratings_csv(&ds, w))),
        Format::Json => sink.emit("synth.json", json(&summary)),
    }
}

fn eval_config(s: &Settings) -> Result<EvalConfig, CliError> {
    let d = EvalConfig::default();
    Ok(EvalConfig {
        beta: s.beta.unwrap_or(d.beta),
        walk_tol: s.walk_tol.unwrap_or(d.walk_tol),
        drop_tol: s.drop_tol.unwrap_or(d.drop_tol),
        denominator: parse_opt("denominator", &s.denominator)?.unwrap_or(d.denominator),
        cf: trustweb::recommender::CfConfig {
            k_neighbours: s.k_neighbours.unwrap_or(d.cf.k_neighbours),
            min_corated: s.min_corated.unwrap_or(d.cf.min_corated),
        },
        top_n: s.top_n.clone().unwrap_or(d.top_n),
        k_neighbourhood: s.k_neighbourhood.unwrap_or(d.k_neighbourhood),
        overlap_targets: parse_opt("overlap_targets", &s.overlap_targets)?
            .unwrap_or(d.overlap_targets),
        beta_grid: s.beta_grid.clone().unwrap_or(d.beta_grid),
        exec: exec(s)?,
    })
}

#[derive(Serialize)]
struct EvaluationOutput<'a> {
    #[serde(flatten)]
    report: &'a EvaluationReport,
    load: &'a LoadReport,
    clean: Option<CleanReport>,
    split: SplitReport,
}

pub fn evaluate(s: &Settings, sink: &Sink, format: Format) -> Result<(), CliError> {
    let ds = match (&s.ratings, &s.trust) {
        (Some(r), Some(t)) => load(r, t)?,
        (None, None) => synthesize(s)?.0,
        _ => return Err(CliError::usage("--ratings and --trust must be given together")),
    };
    let (mut ds, clean_report) = if s.no_clean.unwrap_or(false) {
        (ds, None)
    } else {
        let (c, rep) = clean(&ds)?;
        (c, Some(rep))
    };
    let split = ds.split(s.test_fraction.unwrap_or(0.2), s.seed.unwrap_or(0))?;
    for w in &split.warnings {
        let _ = writeln!(std::io::stderr(), "warning: {w}");
    }
    let cfg = eval_config(s)?;
    let report = run_evaluation(&ds, &cfg)?;
    let out = EvaluationOutput {
        report: &report,
        load: &ds.load_report,
        clean: clean_report,
        split,
    };
    match format {
        Format::Csv => {
            sink.emit("beta_sweep.csv", csv_body(|w| write_beta_csv(&report.beta_grid, w)))?;
            sink.sidecar("evaluation.json", json(&out))
        }
        Format::Json => sink.emit("evaluation.json", json(&out)),
    }
}

/// Ten agents on a ring with one chord: strongly connected and aperiodic.
fn default_naive_graph() -> TrustGraph {
    let n = 10;
    let edges = (0..n)
        .map(|i| (i, (i + 1) % n, 1.0))
        .chain(std::iter::once((0, 2, 1.0)));
    TrustGraph::from_edges(n, edges).expect("fixed graph is valid")
}

pub fn demo_naive(s: &Settings, sink: &Sink, format: Format) -> Result<(), CliError> {
    let g = if s.graph.is_some() { load_graph(s)? } else { default_naive_graph() };
    let mode = parse_opt("normalization", &s.normalization)?.unwrap_or(NormalizationMode::Strict);
    let direct = normalize_direct(&g, mode);
    let report = naive_recursion_demo(
        &direct,
        s.naive_tol.unwrap_or(1e-8),
        s.naive_max_iter.unwrap_or(10_000),
    );
    match format {
        Format::Json => sink.emit("naive.json", json(&report)),
        Format::Csv => sink.emit(
            "naive.csv",
            csv_body(|w| {
                let mut c = csv::Writer::from_writer(w);
                c.serialize(&report)?;
                c.flush()?;
                Ok(())
            }),
        ),
    }
}
