use std::collections::BTreeMap;

use num_traits::ToPrimitive;
use serde::Serialize;

use super::config::{BoundaryMode, ExperimentConfig, Reference, RootLaw};
use super::{HarnessError, Outputs, Verdict, STAT_THRESHOLD};
use crate::contraction::WiredContraction;
use crate::ends::{root_component_rays, three_ends_experiment, three_ends_fixtures, ThreeEndsReport};
use crate::forest::{ForestRecord, OrientedForest};
use crate::generators::{
    decorated_exact_probabilities, decorated_fixed_root_reversibility, decorated_path_membership, decorated_root,
    decorated_stated_probabilities, classify_decorated, reversibility_report, sample_root_step_classes,
    MembershipReport, ReversibilityReport,
};
use crate::network::{EdgeId, Network, NodeIndex, VertexId};
use crate::oracle::{
    build_kernel_on, certify_stationarity, certify_update_tolerance, chi_square_gof, enumerate_spanning_trees,
    kirchhoff_total, oriented_state_space, rational_string, ChiSquare, StationarityReport, ToleranceReport,
    TreeDistribution, ENUMERATION_EDGE_LIMIT,
};
use crate::parallel::try_map_indexed;
use crate::rng::{rng_from_seed, split_seed};
use crate::update::{run_dynamics, TraceRecord, UpdateCase};
use crate::wilson::{self, sample_free_window, sample_owusf_window, wilson_rooted, VertexOrder};

/// Oriented forest as `tail>edge` pairs sorted by tail.
fn forest_key(g: &Network, f: &OrientedForest) -> String {
    let mut parts: Vec<(VertexId, EdgeId)> = f
        .out_edges()
        .map(|(v, e)| (g.vertex_id(v), g.edge(e.edge).id))
        .collect();
    parts.sort();
    parts
        .iter()
        .map(|(v, e)| format!("{v}>{e}"))
        .collect::<Vec<_>>()
        .join(";")
}

fn reference_law(g: &Network, dist: &TreeDistribution) -> Vec<(String, f64)> {
    dist.trees()
        .iter()
        .map(|t| {
            let f = t.oriented.as_ref().expect("rooted enumeration");
            (forest_key(g, f), t.probability.to_f64().unwrap_or(f64::NAN))
        })
        .collect()
}

#[derive(Serialize)]
struct SampleSummary {
    operation: &'static str,
    seed: u64,
    replicas: usize,
    root: VertexId,
    distinct: usize,
    reference_states: Option<usize>,
    unexpected_states: usize,
    chi_square: Option<ChiSquare>,
    skipped: Option<String>,
    passed: bool,
}

#[derive(Serialize)]
struct ForestLine<'a> {
    replica: usize,
    forest: &'a ForestRecord,
}

fn write_forests(out: &mut Outputs, name: &str, records: &[ForestRecord]) -> Result<(), HarnessError> {
    let mut text = String::new();
    for (replica, forest) in records.iter().enumerate() {
        text.push_str(&serde_json::to_string(&ForestLine { replica, forest })?);
        text.push('\n');
    }
    out.write(name, text.as_bytes())
}

/// Frequency table of sampled states against an optional exact law.
fn tabulate(
    out: &mut Outputs,
    mut summary: SampleSummary,
    keys: &[String],
    reference: Result<Vec<(String, f64)>, String>,
) -> Result<Verdict, HarnessError> {
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for k in keys {
        *counts.entry(k).or_insert(0) += 1;
    }
    summary.distinct = counts.len();
    let n = keys.len() as f64;
    let mut rows: BTreeMap<&str, (u64, Option<f64>)> = counts.iter().map(|(k, c)| (*k, (*c, None))).collect();
    match &reference {
        Ok(law) => {
            for (k, p) in law {
                rows.entry(k).or_insert((0, None)).1 = Some(*p);
            }
            summary.reference_states = Some(law.len());
            summary.unexpected_states = rows.values().filter(|(_, p)| p.is_none()).count();
            let observed: Vec<u64> = law.iter().map(|(k, _)| counts.get(k.as_str()).copied().unwrap_or(0)).collect();
            let probs: Vec<f64> = law.iter().map(|(_, p)| *p).collect();
            match chi_square_gof(&observed, &probs) {
                Ok(chi) => summary.chi_square = Some(chi),
                Err(e) => summary.skipped = Some(e.to_string()),
            }
        }
        Err(reason) => summary.skipped = Some(reason.clone()),
    }
    summary.passed =
        summary.unexpected_states == 0 && summary.chi_square.is_none_or(|c| c.p_value > STAT_THRESHOLD);
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|(k, (c, p))| {
            vec![
                k.to_string(),
                c.to_string(),
                (*c as f64 / n).to_string(),
                p.map(|p| p.to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    out.csv("states.csv", &["state", "count", "frequency", "probability"], &table)?;
    out.json("summary.json", &summary)?;
    Ok(if summary.passed {
        Verdict::Passed
    } else {
        Verdict::StatisticalFailed
    })
}

fn budget_reason<T>(r: Result<T, crate::oracle::OracleError>) -> Result<T, String> {
    r.map_err(|e| format!("no exact reference: {e}"))
}

pub(super) fn sample_ust(config: &ExperimentConfig, workers: usize, out: &mut Outputs) -> Result<Verdict, HarnessError> {
    let seed = config.seed()?;
    let g = config.require_source()?.network(config)?;
    let root = match config.vertex {
        Some(v) => g.try_node(VertexId(v))?,
        None => NodeIndex::new(0),
    };
    let forests = try_map_indexed(config.replicas, workers, |r| {
        let mut rng = rng_from_seed(split_seed(seed, r as u64));
        wilson_rooted(&g, root, &VertexOrder::Natural, &mut rng)
    })?;
    let records: Vec<ForestRecord> = forests.iter().map(|f| f.to_record(&g)).collect();
    write_forests(out, "forests.jsonl", &records)?;
    let keys: Vec<String> = forests.iter().map(|f| forest_key(&g, f)).collect();
    let reference = if g.edge_count() > ENUMERATION_EDGE_LIMIT {
        Err(format!("{} edges exceed the enumeration limit", g.edge_count()))
    } else {
        budget_reason(enumerate_spanning_trees(&g, Some(root))).map(|d| reference_law(&g, &d))
    };
    let summary = SampleSummary {
        operation: "sample-ust",
        seed,
        replicas: config.replicas,
        root: g.vertex_id(root),
        distinct: 0,
        reference_states: None,
        unexpected_states: 0,
        chi_square: None,
        skipped: None,
        passed: false,
    };
    tabulate(out, summary, &keys, reference)
}

fn single_contraction(config: &ExperimentConfig) -> Result<(String, WiredContraction), HarnessError> {
    let mut all = config.require_source()?.contractions(config)?;
    if all.len() != 1 {
        return Err(HarnessError::Config("expected a single wired contraction".into()));
    }
    Ok(all.remove(0))
}

pub(super) fn sample_oust(config: &ExperimentConfig, workers: usize, out: &mut Outputs) -> Result<Verdict, HarnessError> {
    let seed = config.seed()?;
    let (_, c) = single_contraction(config)?;
    let g = c.network();
    let boundary = c.require_boundary()?;
    let forests = try_map_indexed(config.replicas, workers, |r| {
        let mut rng = rng_from_seed(split_seed(seed, r as u64));
        wilson::sample_oust(&c, &VertexOrder::Natural, &mut rng)
    })?;
    let records: Vec<ForestRecord> = forests.iter().map(|f| f.to_record(g)).collect();
    write_forests(out, "forests.jsonl", &records)?;
    let keys: Vec<String> = forests.iter().map(|f| forest_key(g, f)).collect();
    let reference = budget_reason(oriented_state_space(&c)).map(|d| reference_law(g, &d));
    let summary = SampleSummary {
        operation: "sample-oust",
        seed,
        replicas: config.replicas,
        root: g.vertex_id(boundary),
        distinct: 0,
        reference_states: None,
        unexpected_states: 0,
        chi_square: None,
        skipped: None,
        passed: false,
    };
    tabulate(out, summary, &keys, reference)
}

#[derive(Serialize)]
struct DynamicsSummary {
    seed: u64,
    replicas: usize,
    steps: u64,
    vertex: VertexId,
    no_op: u64,
    past_case: u64,
    non_past_case: u64,
}

pub(super) fn dynamics_run(config: &ExperimentConfig, workers: usize, out: &mut Outputs) -> Result<Verdict, HarnessError> {
    let seed = config.seed()?;
    let steps = config
        .steps
        .ok_or_else(|| HarnessError::Config("dynamics-run needs steps".into()))?;
    let (_, c) = single_contraction(config)?;
    let g = c.network();
    let v = match config.vertex {
        Some(id) => g.try_node(VertexId(id))?,
        None => g.try_node(c.kept()[0])?,
    };
    if c.is_boundary(v) {
        return Err(HarnessError::Config("the dynamics vertex must be a kept vertex".into()));
    }
    let runs = try_map_indexed(config.replicas, workers, |r| {
        let mut rng = rng_from_seed(split_seed(seed, r as u64));
        let start = wilson::sample_oust(&c, &VertexOrder::Natural, &mut rng)?;
        let mut trace = Vec::new();
        let end = run_dynamics(g, &start, v, steps, &mut rng, Some(&mut trace))?;
        Ok::<_, HarnessError>((trace, end.to_record(g)))
    })?;
    let mut rows = Vec::with_capacity(runs.len());
    let mut totals = [0u64; 3];
    for (r, (trace, _)) in runs.iter().enumerate() {
        let mut counts = [0u64; 3];
        for line in trace.split(|&b| b == b'\n').filter(|l| !l.is_empty()) {
            let rec: TraceRecord = serde_json::from_slice(line)?;
            counts[match rec.case {
                UpdateCase::NoOp => 0,
                UpdateCase::PastCase => 1,
                UpdateCase::NonPastCase => 2,
            }] += 1;
        }
        for i in 0..3 {
            totals[i] += counts[i];
        }
        rows.push(vec![r.to_string(), counts[0].to_string(), counts[1].to_string(), counts[2].to_string()]);
        out.write(&format!("traces/replica-{r:05}.jsonl"), trace)?;
    }
    let finals: Vec<ForestRecord> = runs.into_iter().map(|(_, f)| f).collect();
    write_forests(out, "final_forests.jsonl", &finals)?;
    out.csv("cases.csv", &["replica", "no_op", "past_case", "non_past_case"], &rows)?;
    out.json(
        "summary.json",
        &DynamicsSummary {
            seed,
            replicas: config.replicas,
            steps,
            vertex: g.vertex_id(v),
            no_op: totals[0],
            past_case: totals[1],
            non_past_case: totals[2],
        },
    )?;
    Ok(Verdict::Passed)
}

#[derive(Serialize)]
struct ToleranceEntry {
    vertex: VertexId,
    edge: EdgeId,
    forward: bool,
    #[serde(flatten)]
    report: ToleranceReport,
}

#[derive(Serialize)]
struct FixtureCertificate {
    fixture: String,
    vertices: usize,
    edges: usize,
    states: usize,
    /// Enumerated total weight and the Kirchhoff cofactor, as exact strings.
    total_weight: String,
    kirchhoff_total: String,
    stationarity: Vec<StationarityReport>,
    tolerance: Vec<ToleranceEntry>,
    passed: bool,
}

#[derive(Serialize)]
struct CertifyReport {
    seed: u64,
    fixtures: Vec<FixtureCertificate>,
    passed: bool,
}

/// Exact certificate for one contraction: enumeration against Kirchhoff,
/// stationarity at every kept vertex, update tolerance at every edge out of
/// a kept vertex.
fn certify_contraction(name: &str, c: &WiredContraction, seed: u64) -> Result<FixtureCertificate, HarnessError> {
    let g = c.network();
    let dist = oriented_state_space(c)?;
    let kirchhoff = kirchhoff_total(g);
    let mut stationarity = Vec::new();
    let mut tolerance = Vec::new();
    for v in g.nodes().filter(|&v| !c.is_boundary(v)) {
        let k = build_kernel_on(g, &dist, v)?;
        stationarity.push(certify_stationarity(g, &k, &dist)?);
        for &e in g.incident(v) {
            let report = certify_update_tolerance(g, &dist, e, split_seed(seed, tolerance.len() as u64))?;
            tolerance.push(ToleranceEntry {
                vertex: g.vertex_id(v),
                edge: g.edge(e.edge).id,
                forward: e.forward,
                report,
            });
        }
    }
    let passed = dist.total_weight() == &kirchhoff
        && stationarity.iter().all(|s| s.passed)
        && tolerance.iter().all(|t| t.report.passed);
    Ok(FixtureCertificate {
        fixture: name.to_string(),
        vertices: g.vertex_count(),
        edges: g.edge_count(),
        states: dist.len(),
        total_weight: rational_string(dist.total_weight()),
        kirchhoff_total: rational_string(&kirchhoff),
        stationarity,
        tolerance,
        passed,
    })
}

pub(super) fn certify(config: &ExperimentConfig, out: &mut Outputs) -> Result<Verdict, HarnessError> {
    let seed = config.seed()?;
    let targets = match &config.source {
        Some(spec) => spec.contractions(config)?,
        None => super::SourceSpec::Corpus { name: None }.contractions(config)?,
    };
    let fixtures = targets
        .iter()
        .enumerate()
        .map(|(i, (name, c))| certify_contraction(name, c, split_seed(seed, i as u64)))
        .collect::<Result<Vec<_>, _>>()?;
    let passed = fixtures.iter().all(|f| f.passed);
    out.json("certify.json", &CertifyReport { seed, fixtures, passed })?;
    Ok(if passed {
        Verdict::Passed
    } else {
        Verdict::CertificationFailed
    })
}

#[derive(Serialize)]
struct ThreeEndsEntry {
    control: bool,
    /// Passed for a construction fixture; flagged for a control.
    ok: bool,
    #[serde(flatten)]
    report: ThreeEndsReport,
}

pub(super) fn three_ends(out: &mut Outputs) -> Result<Verdict, HarnessError> {
    let mut entries = Vec::new();
    for fixture in three_ends_fixtures()? {
        let report = three_ends_experiment(&fixture)?;
        let ok = if fixture.control {
            !report.preconditions_met
        } else {
            report.passed
        };
        entries.push(ThreeEndsEntry {
            control: fixture.control,
            ok,
            report,
        });
    }
    let passed = entries.iter().all(|e| e.ok);
    out.json("three_ends.json", &entries)?;
    Ok(if passed {
        Verdict::Passed
    } else {
        Verdict::CertificationFailed
    })
}

#[derive(Clone, Debug, Serialize)]
pub(crate) struct TrendRow {
    pub depth: u32,
    pub radius: u32,
    pub replicas: usize,
    pub two_ray: usize,
    pub fraction: f64,
    pub std_error: f64,
}

#[derive(Serialize)]
struct TrendSummary {
    seed: u64,
    boundary: BoundaryMode,
    rows: Vec<TrendRow>,
    /// Each fraction is at most the previous one plus two combined standard errors.
    nonincreasing: bool,
    passed: bool,
}

/// `f_{D'} ≤ f_D + 2·√(se_D² + se_{D'}²)` for consecutive depths.
pub(crate) fn trend_nonincreasing(rows: &[TrendRow]) -> bool {
    rows.windows(2).all(|w| {
        let slack = 2.0 * (w[0].std_error.powi(2) + w[1].std_error.powi(2)).sqrt();
        w[1].fraction <= w[0].fraction + slack
    })
}

pub(super) fn gw_ends_trend(config: &ExperimentConfig, workers: usize, out: &mut Outputs) -> Result<Verdict, HarnessError> {
    let seed = config.seed()?;
    let spec = config.require_source()?;
    let depths = config
        .depths
        .clone()
        .or(config.depth.map(|d| vec![d]))
        .ok_or_else(|| HarnessError::Config("gw-ends-trend needs depths".into()))?;
    if depths.iter().any(|&d| d < 2) {
        return Err(HarnessError::Config("depths must be at least 2".into()));
    }
    let radius = |d: u32| config.radius.unwrap_or(d / 2);
    if let Some(&d) = depths.iter().find(|&&d| radius(d) >= d) {
        return Err(HarnessError::Config(format!("radius {} not below depth {d}", radius(d))));
    }
    let max_depth = depths.iter().copied().max().unwrap_or(0);
    let shared = if spec.is_seeded() {
        None
    } else {
        Some(spec.lazy(seed, max_depth)?)
    };
    let free = match config.boundary {
        BoundaryMode::Free => true,
        BoundaryMode::Wired => false,
        BoundaryMode::Auto => match &shared {
            Some(s) => s.is_recurrent(),
            None => false,
        },
    };
    let rays = try_map_indexed(config.replicas, workers, |r| {
        let replica_seed = split_seed(seed, r as u64);
        let source = match &shared {
            Some(s) => s.clone(),
            None => spec.lazy(replica_seed, max_depth)?,
        };
        depths
            .iter()
            .map(|&d| {
                let mut rng = rng_from_seed(split_seed(replica_seed, 1 + d as u64));
                let (window, forest) = if free {
                    sample_free_window(&source, d, &mut rng)?
                } else {
                    sample_owusf_window(&source, d, &VertexOrder::Natural, &mut rng)?
                };
                Ok(root_component_rays(&window, &forest, radius(d))?)
            })
            .collect::<Result<Vec<usize>, HarnessError>>()
    })?;
    let mut per_replica = Vec::new();
    let mut rows = Vec::new();
    for (j, &d) in depths.iter().enumerate() {
        let two_ray = rays.iter().filter(|r| r[j] >= 2).count();
        let n = config.replicas as f64;
        let p = two_ray as f64 / n;
        rows.push(TrendRow {
            depth: d,
            radius: radius(d),
            replicas: config.replicas,
            two_ray,
            fraction: p,
            std_error: (p * (1.0 - p) / n).sqrt(),
        });
        for (r, rs) in rays.iter().enumerate() {
            per_replica.push(vec![
                r.to_string(),
                d.to_string(),
                rs[j].to_string(),
                u8::from(rs[j] >= 2).to_string(),
            ]);
        }
    }
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|row| {
            vec![
                row.depth.to_string(),
                row.radius.to_string(),
                row.replicas.to_string(),
                row.two_ray.to_string(),
                row.fraction.to_string(),
                row.std_error.to_string(),
            ]
        })
        .collect();
    out.csv("trend.csv", &["depth", "radius", "replicas", "two_ray", "fraction", "std_error"], &table)?;
    out.csv("replicas.csv", &["replica", "depth", "rays", "two_ray"], &per_replica)?;
    let nonincreasing = trend_nonincreasing(&rows);
    out.json(
        "trend.json",
        &TrendSummary {
            seed,
            boundary: if free { BoundaryMode::Free } else { BoundaryMode::Wired },
            rows,
            nonincreasing,
            passed: nonincreasing,
        },
    )?;
    Ok(if nonincreasing {
        Verdict::Passed
    } else {
        Verdict::StatisticalFailed
    })
}

/// Swap `z` beyond which the fixed-root control counts as detected.
const CONTROL_Z: f64 = 5.0;

#[derive(Serialize)]
struct ReversibilitySummary {
    seed: u64,
    root_law: RootLaw,
    reference: Option<Reference>,
    tree_conductance: String,
    report: ReversibilityReport,
    membership: Option<MembershipReport>,
    passed: bool,
}

pub(super) fn reversibility(config: &ExperimentConfig, workers: usize, out: &mut Outputs) -> Result<Verdict, HarnessError> {
    let seed = config.seed()?;
    let source = config.require_source()?.decorated()?;
    let samples = config.samples.unwrap_or(1_000_000);
    let max_n = config.max_n.unwrap_or(5);
    let sample_seed = split_seed(seed, 0);
    let (report, reference) = match config.root_law {
        RootLaw::FixedRoot => (decorated_fixed_root_reversibility(&source, samples, sample_seed, workers)?, None),
        RootLaw::Stated => {
            let law = match config.reference {
                Reference::Stated => decorated_stated_probabilities(max_n),
                Reference::Exact => decorated_exact_probabilities(source.tree_conductance().exact(), max_n),
            };
            let counts =
                sample_root_step_classes(&source, decorated_root, classify_decorated, samples, sample_seed, workers)?;
            (reversibility_report(&counts, samples, |k| k.swapped(), &law), Some(config.reference))
        }
    };
    let membership = match config.membership_samples {
        Some(m) => Some(decorated_path_membership(
            &source,
            config.depth.unwrap_or(8),
            m,
            split_seed(seed, 1),
            workers,
        )?),
        None => None,
    };
    let statistics_ok = match config.root_law {
        RootLaw::FixedRoot => report.max_swap_z > CONTROL_Z,
        RootLaw::Stated => report.rows.iter().all(|r| r.within_3se != Some(false)),
    };
    let passed = statistics_ok && membership.as_ref().is_none_or(|m| m.passed);
    let table: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            let opt = |x: Option<String>| x.unwrap_or_default();
            vec![
                r.class.clone(),
                r.count.to_string(),
                r.frequency.to_string(),
                r.std_error.to_string(),
                r.swapped.clone(),
                r.swapped_frequency.to_string(),
                r.swap_z.to_string(),
                opt(r.reference.clone()),
                opt(r.reference_z.map(|z| z.to_string())),
                opt(r.within_3se.map(|b| b.to_string())),
            ]
        })
        .collect();
    out.csv(
        "reversibility.csv",
        &[
            "class",
            "count",
            "frequency",
            "std_error",
            "swapped",
            "swapped_frequency",
            "swap_z",
            "reference",
            "reference_z",
            "within_3se",
        ],
        &table,
    )?;
    out.json(
        "reversibility.json",
        &ReversibilitySummary {
            seed,
            root_law: config.root_law,
            reference,
            tree_conductance: source.tree_conductance().to_string(),
            report,
            membership,
            passed,
        },
    )?;
    Ok(if passed {
        Verdict::Passed
    } else {
        Verdict::StatisticalFailed
    })
}
