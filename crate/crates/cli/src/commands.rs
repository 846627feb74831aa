//! The five subcommands. Each returns a serializable report; the ones that
//! produce files write them under the configured output directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use gwf_core::dimension::{
    assouad_estimate, box_dim_estimate, grid_scale_pairs, lower_estimate, section_count_check,
    section_count_table, BoxFit, Centers, DimensionReport, WindowEstimate, DEFAULT_GUARD,
};
use gwf_core::galton_watson::{
    conditioning_bias_bound, empirical_reduced_law, extinction_by_generation,
    extinction_probability, kesten_stigum_stats, reduced_normalization, reduced_offspring,
    sample_surviving, ExtinctionReport, KestenStigumStats, OffspringDistribution,
    DEFAULT_MAX_ATTEMPTS,
};
use gwf_core::geometry::{zoom_sequence, PointCloud, ZoomChecker, ZoomIdentity};
use gwf_core::io::{render_pgm, write_cloud_csv};
use gwf_core::rng::{derive_seed, Stream};
use gwf_core::similarity::{
    attractor_cloud, check_declared_osc, check_ssc, wsc_profile, OscReport, SeparationVerdict,
    WscEntry,
};
use gwf_core::symbols::{Subset, Symbol, Word};
use gwf_core::tree::{Reduction, Tree};
use gwf_core::Error;

use crate::config::Experiment;
use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

// independent random streams derived from the run seed
const SAMPLE_STREAM: u64 = 1;
const KS_STREAM: u64 = 2;
const REDUCED_STREAM: u64 = 3;
const CENTER_STREAM: u64 = 4;
const WSC_STREAM: u64 = 5;
const CHECK_TREE_STREAM: u64 = 6;
const CHECK_NODE_STREAM: u64 = 7;

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn output_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Output {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn ensure_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| output_error(path, e))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| output_error(path, e))
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| output_error(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| output_error(path, e))?;
    }
    w.flush().map_err(|e| output_error(path, e))
}

fn write_cloud(path: &Path, cloud: &PointCloud) -> Result<(), CliError> {
    let file = fs::File::create(path).map_err(|e| output_error(path, e))?;
    write_cloud_csv(cloud, std::io::BufWriter::new(file)).map_err(|e| output_error(path, e))
}

fn reduce(tree: &Tree) -> Result<Tree, CliError> {
    match tree.reduce_to_horizon(tree.horizon())? {
        Reduction::Survives(t) => Ok(t),
        Reduction::Extinct => Err(Error::EmptySet("sampled tree is extinct".into()).into()),
    }
}

/// Surviving sample `i` of the run, shared by every command.
fn surviving_sample(
    exp: &Experiment,
    law: &OffspringDistribution,
    i: u64,
) -> Result<(Tree, u64), CliError> {
    let seed = derive_seed(derive_seed(exp.config.seed, SAMPLE_STREAM), i);
    Ok(sample_surviving(
        law,
        exp.config.horizon,
        seed,
        DEFAULT_MAX_ATTEMPTS,
    )?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Atom {
    pub subset: Subset,
    pub prob: f64,
}

fn atoms(law: &OffspringDistribution) -> Vec<Atom> {
    law.atoms()
        .iter()
        .map(|&(subset, prob)| Atom { subset, prob })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimsReport {
    pub schema_version: u32,
    pub command: &'static str,
    #[serde(flatten)]
    pub dimension: DimensionReport,
    pub mean_offspring: f64,
    pub extinction: ExtinctionReport,
    /// Offspring law of the reduced tree conditioned on survival.
    pub reduced_law: Vec<Atom>,
    /// The almost sure dimension equals `delta` under the open set condition;
    /// without a declared box it is still the solver output.
    pub osc_declared: bool,
}

pub fn dims(exp: &Experiment) -> Result<DimsReport, CliError> {
    let law = exp.law()?;
    let dimension = DimensionReport::compute(&exp.ifs, law)?;
    let reduced = reduced_offspring(law)?;
    Ok(DimsReport {
        schema_version: SCHEMA_VERSION,
        command: "dims",
        dimension,
        mean_offspring: law.mean(),
        extinction: extinction_probability(law),
        reduced_law: atoms(&reduced),
        osc_declared: exp.ifs.osc_box().is_some(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KsSummary {
    #[serde(flatten)]
    pub stats: KestenStigumStats,
    /// `1 − q_k` from the exact extinction recursion.
    pub expected_survival: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionCountSummary {
    pub scales: Vec<f64>,
    pub trees: u64,
    pub rows: usize,
    pub violations: usize,
    pub violating_samples: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorSummary {
    pub points: usize,
    pub epsilon: f64,
    pub base: u32,
    pub guard: f64,
    pub box_fit: Option<BoxFit>,
    pub assouad: Option<f64>,
    pub assouad_pairs: usize,
    pub lower: Option<f64>,
    pub lower_pairs: usize,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalSummary {
    pub samples: u64,
    pub attempts: u64,
    pub total_variation: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateSummary {
    pub schema_version: u32,
    pub command: &'static str,
    pub seed: u64,
    pub horizon: usize,
    pub projection_scale: f64,
    pub dimension: DimensionReport,
    pub extinction: ExtinctionReport,
    /// Distance between conditioning on reaching the horizon and on survival.
    pub conditioning_bias_bound: f64,
    pub reduced_law: Vec<Atom>,
    pub reduced_normalization: f64,
    pub kesten_stigum: KsSummary,
    pub section_counts: SectionCountSummary,
    /// Rejection attempts used by the surviving samples.
    pub surviving_attempts: u64,
    /// Covering-number estimates on the first sample.
    pub estimators: EstimatorSummary,
    pub empirical_reduced_law: Option<EmpiricalSummary>,
    pub checks: Vec<CheckResult>,
    pub all_passed: bool,
}

#[derive(Serialize)]
struct SectionRow {
    sample: u64,
    scale: f64,
    count: usize,
    lower: f64,
    upper: f64,
}

#[derive(Serialize)]
struct WindowRow {
    estimator: &'static str,
    center: String,
    outer: f64,
    inner: f64,
    count: usize,
    slope: f64,
}

fn window_rows(name: &'static str, est: &WindowEstimate) -> Vec<WindowRow> {
    est.windows
        .iter()
        .map(|w| WindowRow {
            estimator: name,
            center: w
                .center
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" "),
            outer: w.outer,
            inner: w.inner,
            count: w.count,
            slope: w.slope,
        })
        .collect()
}

/// Resolution failures (no admissible scale) are recorded, others propagate.
fn optional<T>(
    r: gwf_core::Result<T>,
    notes: &mut Vec<String>,
    what: &str,
) -> Result<Option<T>, CliError> {
    match r {
        Ok(x) => Ok(Some(x)),
        Err(Error::Resolution(m)) => {
            notes.push(format!("{what}: {m}"));
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

fn estimate(
    exp: &Experiment,
    cloud: &PointCloud,
    dir: &Path,
) -> Result<EstimatorSummary, CliError> {
    let base = exp.grid_base();
    let guard = exp.config.estimator.guard.unwrap_or(DEFAULT_GUARD);
    let b = base as f64;
    let mut finest = 0;
    while b.powi(-(finest + 1)) >= guard * cloud.epsilon() && finest < 60 {
        finest += 1;
    }
    let mut notes = Vec::new();
    let sides: Vec<f64> = (1..=finest).map(|k| b.powi(-k)).collect();
    let box_fit = if sides.len() >= 2 {
        optional(box_dim_estimate(cloud, &sides, guard), &mut notes, "box")?
    } else {
        notes.push("box: fewer than two cell sides pass the guard".into());
        None
    };
    let pairs = grid_scale_pairs(base, 0, finest);
    let centers = match exp.config.estimator.centers {
        Some(count) => Centers::Sampled {
            count,
            seed: derive_seed(exp.config.seed, CENTER_STREAM),
        },
        None => Centers::All,
    };
    let hi = optional(
        assouad_estimate(cloud, &pairs, centers, guard),
        &mut notes,
        "assouad",
    )?;
    let lo = optional(
        lower_estimate(cloud, &pairs, centers, guard),
        &mut notes,
        "lower",
    )?;
    if let Some(fit) = &box_fit {
        write_csv(&dir.join("box_counts.csv"), &fit.table)?;
    }
    let mut rows = Vec::new();
    for (name, est) in [("assouad", &hi), ("lower", &lo)] {
        if let Some(e) = est {
            rows.extend(window_rows(name, e));
        }
    }
    write_csv(&dir.join("windows.csv"), &rows)?;
    Ok(EstimatorSummary {
        points: cloud.len(),
        epsilon: cloud.epsilon(),
        base,
        guard,
        box_fit,
        assouad: hi.as_ref().map(|e| e.value),
        assouad_pairs: hi.as_ref().map_or(0, |e| e.admissible_pairs.len()),
        lower: lo.as_ref().map(|e| e.value),
        lower_pairs: lo.as_ref().map_or(0, |e| e.admissible_pairs.len()),
        notes,
    })
}

/// Samples, checks and writes a full run. The summary depends only on the
/// configuration and the seed.
pub fn simulate(exp: &Experiment) -> Result<SimulateSummary, CliError> {
    let law = exp.law()?;
    let (ifs, cfg) = (&exp.ifs, &exp.config);
    let dimension = DimensionReport::compute(ifs, law)?;
    let extinction = extinction_probability(law);
    let reduced = reduced_offspring(law)?;
    let normalization = reduced_normalization(law);

    let k = cfg.ks_generation.unwrap_or(cfg.horizon);
    let stats = kesten_stigum_stats(law, k, cfg.trials, derive_seed(cfg.seed, KS_STREAM))?;
    let expected_survival = 1.0 - extinction_by_generation(law, k)[k];

    let dir = cfg.output_dir.clone();
    ensure_dir(&dir.join("trees"))?;
    ensure_dir(&dir.join("clouds"))?;

    let scales = exp.rho_schedule();
    let family = law.support();
    let scale = exp.projection_scale();
    let mut section_rows = Vec::new();
    let mut violations = 0;
    let mut violating_samples = Vec::new();
    let mut attempts = 0;
    let mut estimators = None;
    for i in 0..cfg.samples.max(1) {
        let (tree, a) = surviving_sample(exp, law, i)?;
        attempts += a;
        let t = reduce(&tree)?;
        let bad = section_count_check(&t, ifs, &family, &scales)?;
        if !bad.is_empty() {
            violations += bad.len();
            violating_samples.push(i);
        }
        for row in section_count_table(&t, ifs, &family, &scales)? {
            section_rows.push(SectionRow {
                sample: i,
                scale: row.scale,
                count: row.count,
                lower: row.lower,
                upper: row.upper,
            });
        }
        let keep = (i as usize) < cfg.saved_samples;
        if keep || i == 0 {
            let cloud = t.project(ifs, scale)?;
            if keep {
                write_bytes(
                    &dir.join(format!("trees/sample_{i:03}.txt")),
                    tree.to_canonical_string().as_bytes(),
                )?;
                write_cloud(&dir.join(format!("clouds/sample_{i:03}.csv")), &cloud)?;
            }
            if i == 0 {
                estimators = Some(estimate(exp, &cloud, &dir)?);
            }
        }
    }
    write_csv(&dir.join("section_counts.csv"), &section_rows)?;

    let empirical = if cfg.reduced_law_samples > 0 {
        let emp = empirical_reduced_law(
            law,
            cfg.horizon,
            cfg.reduced_law_samples,
            derive_seed(cfg.seed, REDUCED_STREAM),
        )?;
        let n = cfg.reduced_law_samples as f64;
        // half the sum of per-atom three-sigma envelopes, plus the horizon bias
        let tolerance = 0.5
            * reduced
                .atoms()
                .iter()
                .map(|&(_, p)| 3.0 * (p * (1.0 - p) / n).sqrt())
                .sum::<f64>()
            + conditioning_bias_bound(law, cfg.horizon);
        Some(EmpiricalSummary {
            samples: emp.samples,
            attempts: emp.attempts,
            total_variation: emp.total_variation(&reduced),
            tolerance,
        })
    } else {
        None
    };

    let mut checks = vec![
        CheckResult {
            name: "dimension_between_extremes",
            passed: dimension.lower - 1e-12 <= dimension.delta
                && dimension.delta <= dimension.upper + 1e-12,
            detail: format!(
                "{} <= {} <= {}",
                dimension.lower, dimension.delta, dimension.upper
            ),
        },
        CheckResult {
            name: "reduced_normalization",
            passed: (normalization - extinction.p).abs() <= 1e-12,
            detail: format!("sum {normalization} vs survival {}", extinction.p),
        },
        CheckResult {
            name: "kesten_stigum_mean",
            passed: (stats.mean - 1.0).abs() <= 3.0 * stats.standard_error,
            detail: format!(
                "mean {} with standard error {}",
                stats.mean, stats.standard_error
            ),
        },
    ];
    let survival_se = (expected_survival * (1.0 - expected_survival) / cfg.trials as f64).sqrt();
    checks.push(CheckResult {
        name: "kesten_stigum_survival",
        passed: (stats.survival_fraction - expected_survival).abs() <= 3.0 * survival_se + 1e-12,
        detail: format!(
            "fraction {} vs exact {expected_survival} (standard error {survival_se})",
            stats.survival_fraction
        ),
    });
    checks.push(CheckResult {
        name: "section_count_bounds",
        passed: violations == 0,
        detail: format!("{violations} violations over {} rows", section_rows.len()),
    });
    if let Some(e) = &empirical {
        checks.push(CheckResult {
            name: "empirical_reduced_law",
            passed: e.total_variation <= e.tolerance,
            detail: format!(
                "total variation {} (tolerance {})",
                e.total_variation, e.tolerance
            ),
        });
    }
    let all_passed = checks.iter().all(|c| c.passed);
    let summary = SimulateSummary {
        schema_version: SCHEMA_VERSION,
        command: "simulate",
        seed: cfg.seed,
        horizon: cfg.horizon,
        projection_scale: scale,
        dimension,
        extinction,
        conditioning_bias_bound: conditioning_bias_bound(law, cfg.horizon),
        reduced_law: atoms(&reduced),
        reduced_normalization: normalization,
        kesten_stigum: KsSummary {
            stats,
            expected_survival,
        },
        section_counts: SectionCountSummary {
            scales,
            trees: cfg.samples.max(1),
            rows: section_rows.len(),
            violations,
            violating_samples,
        },
        surviving_attempts: attempts,
        estimators: estimators.expect("sample 0 is always drawn"),
        empirical_reduced_law: empirical,
        checks,
        all_passed,
    };
    write_bytes(&dir.join("summary.json"), to_json(&summary).as_bytes())?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZoomCheckSummary {
    /// `checked`, or `skipped` with a reason.
    pub status: &'static str,
    pub reason: Option<String>,
    /// `sampled` when an offspring law is configured, `full` otherwise.
    pub tree: &'static str,
    pub scale: Option<f64>,
    pub identities: Vec<ZoomIdentity>,
    pub passed: usize,
    /// Comparisons against a different node at the same depth. These fail
    /// whenever the two descendant sets differ at the zoom resolution.
    pub controls: Vec<ZoomIdentity>,
    pub controls_failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub ssc: SeparationVerdict,
    pub osc: Option<OscReport>,
    pub wsc: Vec<WscEntry>,
    pub zoom: ZoomCheckSummary,
}

fn skipped(tree: &'static str, reason: String) -> ZoomCheckSummary {
    ZoomCheckSummary {
        status: "skipped",
        reason: Some(reason),
        tree,
        scale: None,
        identities: Vec::new(),
        passed: 0,
        controls: Vec::new(),
        controls_failed: 0,
    }
}

fn check_tree(exp: &Experiment) -> Result<(Tree, &'static str), CliError> {
    match &exp.law {
        Some(law) => {
            let seed = derive_seed(exp.config.seed, CHECK_TREE_STREAM);
            Ok((
                sample_surviving(law, exp.config.horizon, seed, DEFAULT_MAX_ATTEMPTS)?.0,
                "sampled",
            ))
        }
        None => Ok((Tree::full_tree(exp.ifs.len(), exp.config.horizon)?, "full")),
    }
}

fn zoom_checks(exp: &Experiment, ssc: &SeparationVerdict) -> Result<ZoomCheckSummary, CliError> {
    let (ifs, cfg) = (&exp.ifs, &exp.config);
    let kind = if exp.law.is_some() { "sampled" } else { "full" };
    if !ssc.is_separated() {
        return Ok(skipped(kind, "strong separation is not certified".into()));
    }
    let (tree, kind) = check_tree(exp)?;
    let max_depth = (cfg.horizon / 2).max(1);
    let scale = ifs.r_max().powi((cfg.horizon - max_depth) as i32);
    let checker = match ZoomChecker::new(&tree, ifs, scale, ssc) {
        Ok(c) => c,
        Err(Error::Precondition(m)) => return Ok(skipped(kind, m)),
        Err(e) => return Err(e.into()),
    };
    let t = checker.tree();
    let levels: Vec<Vec<u32>> = (1..=max_depth.min(t.height()))
        .map(|k| t.level(k).map(|id| id as u32).collect())
        .collect();
    let pool: Vec<(usize, usize)> = levels
        .iter()
        .enumerate()
        .flat_map(|(d, ids)| (0..ids.len()).map(move |j| (d, j)))
        .collect();
    let mut stream = Stream::new(derive_seed(cfg.seed, CHECK_NODE_STREAM));
    let mut identities = Vec::new();
    let mut controls = Vec::new();
    for _ in 0..cfg.check.zoom_nodes.min(pool.len()) {
        let (d, j) = pool[stream.index(pool.len())];
        let v = t.word_of(levels[d][j]);
        identities.push(checker.identity(&v)?);
        if levels[d].len() > 1 {
            let u = t.word_of(levels[d][(j + 1) % levels[d].len()]);
            controls.push(checker.compare(&v, &u)?);
        }
    }
    Ok(ZoomCheckSummary {
        status: "checked",
        reason: None,
        tree: kind,
        scale: Some(scale),
        passed: identities.iter().filter(|i| i.passed).count(),
        controls_failed: controls.iter().filter(|c| !c.passed).count(),
        identities,
        controls,
    })
}

/// Separation verdicts and, under certified strong separation, zoom identities.
pub fn check(exp: &Experiment) -> Result<CheckReport, CliError> {
    let (ifs, cfg) = (&exp.ifs, &exp.config);
    let ssc = check_ssc(ifs, cfg.check.ssc_depth)?;
    let osc = ifs
        .osc_box()
        .map(|b| check_declared_osc(ifs, b))
        .transpose()?;
    let scales = if cfg.check.wsc_scales.is_empty() {
        (1..=3).map(|k| ifs.r_min() * 0.5f64.powi(k)).collect()
    } else {
        cfg.check.wsc_scales.clone()
    };
    let wsc = wsc_profile(
        ifs,
        &scales,
        cfg.check.wsc_samples,
        derive_seed(cfg.seed, WSC_STREAM),
    )?;
    let zoom = zoom_checks(exp, &ssc)?;
    let report = CheckReport {
        schema_version: SCHEMA_VERSION,
        command: "check",
        ssc,
        osc,
        wsc,
        zoom,
    };
    ensure_dir(&cfg.output_dir)?;
    write_bytes(
        &cfg.output_dir.join("check.json"),
        to_json(&report).as_bytes(),
    )?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZoomStepSummary {
    pub node: Word,
    pub ratio: f64,
    pub points: usize,
    pub epsilon: Option<f64>,
    pub d_h_to_prev: Option<f64>,
    pub file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZoomReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub tree: &'static str,
    pub scale: f64,
    pub tail_threshold: f64,
    /// Only an empirical sign that the minisets settle down.
    pub approximant: bool,
    pub steps: Vec<ZoomStepSummary>,
}

/// The tree the zoom and render commands look at: the first surviving sample,
/// or the full tree when no law is configured.
fn first_tree(exp: &Experiment) -> Result<(Tree, &'static str), CliError> {
    match &exp.law {
        Some(law) => Ok((surviving_sample(exp, law, 0)?.0, "sampled")),
        None => Ok((Tree::full_tree(exp.ifs.len(), exp.config.horizon)?, "full")),
    }
}

/// Smallest-symbol descent of the given length.
fn leftmost_path(tree: &Tree, len: usize) -> Vec<Symbol> {
    let mut node = tree.root();
    let mut path = Vec::with_capacity(len);
    while path.len() < len {
        let Some(s) = tree.children(node).iter().next() else {
            break;
        };
        path.push(s);
        node = tree.child(node, s).expect("listed child exists");
    }
    path
}

/// Minisets along the configured path (by default the leftmost path of half
/// the horizon), one CSV per nonempty step.
pub fn zoom(exp: &Experiment) -> Result<ZoomReport, CliError> {
    let (ifs, cfg) = (&exp.ifs, &exp.config);
    let (tree, kind) = first_tree(exp)?;
    let path = if cfg.zoom.path.is_empty() {
        leftmost_path(&reduce(&tree)?, cfg.horizon / 2)
    } else {
        cfg.zoom.path.clone()
    };
    if path.len() >= cfg.horizon {
        return Err(CliError::Config(format!(
            "zoom path of length {} must be shorter than the horizon {}",
            path.len(),
            cfg.horizon
        )));
    }
    let scale = cfg
        .zoom
        .scale
        .unwrap_or_else(|| ifs.r_max().powi((cfg.horizon - path.len()) as i32));
    let seq = zoom_sequence(&tree, ifs, &path, scale)?;
    let dir = cfg.output_dir.join("zoom");
    ensure_dir(&dir)?;
    let mut steps = Vec::new();
    for (k, step) in seq.steps.iter().enumerate() {
        let file = match step.miniset.cloud() {
            Some(c) => {
                let name = format!("zoom/step_{k:02}.csv");
                write_cloud(&cfg.output_dir.join(&name), c)?;
                Some(name)
            }
            None => None,
        };
        steps.push(ZoomStepSummary {
            node: step.node.clone(),
            ratio: step.map.ratio(),
            points: step.miniset.cloud().map_or(0, |c| c.len()),
            epsilon: step.miniset.cloud().map(|c| c.epsilon()),
            d_h_to_prev: step.d_h_to_prev,
            file,
        });
    }
    let report = ZoomReport {
        schema_version: SCHEMA_VERSION,
        command: "zoom",
        tree: kind,
        scale,
        tail_threshold: seq.tail_threshold,
        approximant: seq.approximant,
        steps,
    };
    write_bytes(
        &cfg.output_dir.join("zoom.json"),
        to_json(&report).as_bytes(),
    )?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenderReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub source: &'static str,
    pub file: PathBuf,
    pub width: usize,
    pub height: usize,
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub points: usize,
}

/// Rasterizes the first sample's cloud, or the attractor without a law.
pub fn render(exp: &Experiment) -> Result<RenderReport, CliError> {
    let (ifs, cfg) = (&exp.ifs, &exp.config);
    if ifs.dim() > 2 {
        return Err(Error::Domain(format!(
            "rendering needs dimension 1 or 2, got {}",
            ifs.dim()
        ))
        .into());
    }
    let scale = exp.projection_scale();
    let (cloud, source) = match &exp.law {
        Some(law) => (
            reduce(&surviving_sample(exp, law, 0)?.0)?.project(ifs, scale)?,
            "sample",
        ),
        None => (attractor_cloud(ifs, scale)?, "attractor"),
    };
    let (blo, bhi) = cloud.bounding_box();
    let pad = |lo: f64, hi: f64| {
        if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, hi + 0.5)
        }
    };
    let x = pad(blo[0], bhi[0]);
    let y = if ifs.dim() == 2 {
        pad(blo[1], bhi[1])
    } else {
        (-0.5, 0.5)
    };
    let lo = cfg.render.lo.unwrap_or([x.0, y.0]);
    let hi = cfg.render.hi.unwrap_or([x.1, y.1]);
    let image = render_pgm(&cloud, lo, hi, cfg.render.width, cfg.render.height)?;
    ensure_dir(&cfg.output_dir)?;
    let file = cfg.output_dir.join("render.pgm");
    write_bytes(&file, &image)?;
    Ok(RenderReport {
        schema_version: SCHEMA_VERSION,
        command: "render",
        source,
        file,
        width: cfg.render.width,
        height: cfg.render.height,
        lo,
        hi,
        points: cloud.len(),
    })
}
