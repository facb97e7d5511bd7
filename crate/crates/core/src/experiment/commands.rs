use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, HardRuleKind, ScorerSource};
use super::output::{fmt_g9, write_file, Csv};
use crate::analysis::{
    length_token_stats, precision_curve, shaping_rewards, telescoping_check, weighting_bias_demo, ValuedTrace,
};
use crate::decode::{decode_many, ControlRule, DecodeReport};
use crate::error::{Error, Result};
use crate::eval::{
    evaluate_boundary_predictions, frontier_sweep, jensen_gap, length_deviation, length_score, ConstraintKind,
    FrontierConfig,
};
use crate::horizon::{DiscountSpec, Trajectory};
use crate::value::{
    format_hex_f64, load_checkpoint, save_checkpoint, train, FeatureMap, HeadScorer, StateValue, TrainingSet,
    ValueHead,
};
use crate::world::{exact_value, sample_rollouts, Dataset, ValueOracle};

pub const TRAJECTORIES_FILE: &str = "trajectories.jsonl";
pub const CHECKPOINT_FILE: &str = "checkpoint.lvm";

/// First line of every JSONL output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonlHeader {
    pub config_digest: String,
    pub seed: u64,
}

fn prepare_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn jsonl<T: Serialize>(cfg: &ExperimentConfig, rows: impl IntoIterator<Item = T>) -> Result<String> {
    let mut out = serde_json::to_string(&JsonlHeader {
        config_digest: cfg.digest.clone(),
        seed: cfg.seed,
    })?;
    out.push('\n');
    for r in rows {
        out.push_str(&serde_json::to_string(&r)?);
        out.push('\n');
    }
    Ok(out)
}

fn gamma_line(cfg: &ExperimentConfig) -> String {
    match cfg.l99 {
        Some(l) => format!("gamma={} (from l99={l})", fmt_g9(cfg.spec.gamma())),
        None => format!("gamma={}", fmt_g9(cfg.spec.gamma())),
    }
}

/// Reads the rollouts written by [`cmd_rollout`].
pub fn read_trajectories(path: &Path) -> Result<Vec<Trajectory>> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::Config(format!("{} not found; run `lenvm rollout` first", path.display()))
        } else {
            Error::io(path, e)
        }
    })?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    serde_json::from_str::<JsonlHeader>(header).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: 1,
        message: format!("bad header: {e}"),
    })?;
    lines
        .enumerate()
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                path: path.display().to_string(),
                line: i + 2,
                message: e.to_string(),
            })
        })
        .collect()
}

fn percentile(sorted: &[usize], q: f64) -> usize {
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

/// Samples rollouts and writes them to `trajectories.jsonl`.
pub fn cmd_rollout(cfg: &ExperimentConfig) -> Result<String> {
    prepare_dir(&cfg.output_dir)?;
    let trajs = sample_rollouts(
        &cfg.world,
        &cfg.prompts(),
        cfg.rollout.rollouts_per_prompt,
        cfg.seed,
        cfg.rollout.max_len,
    )?;
    write_file(&cfg.output_dir.join(TRAJECTORIES_FILE), &jsonl(cfg, &trajs)?)?;

    let mut lengths: Vec<usize> = trajs.iter().filter(|t| !t.truncated).map(|t| t.length).collect();
    lengths.sort_unstable();
    let mut s = format!("{}\nrollouts={} completed={} truncated={}", gamma_line(cfg), trajs.len(), lengths.len(), trajs.len() - lengths.len());
    if !lengths.is_empty() {
        let mean = lengths.iter().sum::<usize>() as f64 / lengths.len() as f64;
        let _ = write!(
            s,
            "\nmean_length={} p50={} p90={} p99={} max={}",
            fmt_g9(mean),
            percentile(&lengths, 0.5),
            percentile(&lengths, 0.9),
            percentile(&lengths, 0.99),
            lengths[lengths.len() - 1]
        );
    }
    Ok(s)
}

fn feature_map(cfg: &ExperimentConfig) -> FeatureMap {
    match cfg.train.position_scale {
        Some(scale) => FeatureMap::with_position(cfg.world.num_states(), scale),
        None => FeatureMap::one_hot(cfg.world.num_states()),
    }
}

/// Fits a value head to the rollouts; writes `checkpoint.lvm` and `loss.csv`.
pub fn cmd_train(cfg: &ExperimentConfig) -> Result<String> {
    let trajs = read_trajectories(&cfg.output_dir.join(TRAJECTORIES_FILE))?;
    let dataset = Dataset::from_trajectories(trajs, &cfg.spec)?;
    let fm = feature_map(cfg);
    let set = TrainingSet::from_dataset(&dataset, &fm);
    let head = ValueHead::init(fm.dimension(), cfg.train.hidden_width, cfg.seed);
    let out = train(head, &set, &cfg.spec, &cfg.train.sgd(cfg.seed))?;

    save_checkpoint(
        &cfg.output_dir.join(CHECKPOINT_FILE),
        &out.head,
        &fm,
        &[
            format!("config_digest={}", cfg.digest),
            format!("seed={}", cfg.seed),
            format!("gamma={}", format_hex_f64(cfg.spec.gamma())),
        ],
    )?;
    let mut csv = Csv::new(&cfg.digest, cfg.seed, &["epoch", "train_loss", "valid_loss"]);
    for e in &out.history {
        csv.row(&[e.epoch.to_string(), fmt_g9(e.train), fmt_g9(e.valid)]);
    }
    write_file(&cfg.output_dir.join("loss.csv"), &csv.finish())?;

    let mut s = format!("{}\ntrajectories={} tokens={}", gamma_line(cfg), set.trajectories.len(), set.token_count());
    if let Some(last) = out.history.last() {
        let _ = write!(
            s,
            "\nepochs={} train_loss={} valid_loss={}",
            out.history.len(),
            fmt_g9(last.train),
            fmt_g9(last.valid)
        );
    }
    Ok(s)
}

/// State values used by decoding and analysis.
pub enum Scorer {
    Head(ValueHead, FeatureMap),
    Oracle(ValueOracle),
}

impl StateValue for Scorer {
    fn state_value(&self, state: usize, step: usize) -> Result<f64> {
        match self {
            Scorer::Head(h, fm) => HeadScorer::new(h, fm).state_value(state, step),
            Scorer::Oracle(o) => o.state_value(state, step),
        }
    }
}

pub fn load_scorer(cfg: &ExperimentConfig) -> Result<Scorer> {
    match cfg.scorer {
        ScorerSource::Oracle => Ok(Scorer::Oracle(exact_value(&cfg.world, &cfg.spec)?)),
        ScorerSource::Checkpoint => {
            let path = cfg.output_dir.join(CHECKPOINT_FILE);
            if !path.exists() {
                return Err(Error::Config(format!("{} not found; run `lenvm train` first", path.display())));
            }
            let (head, fm) = load_checkpoint(&path)?;
            if fm.num_states() != cfg.world.num_states() {
                return Err(Error::Config(format!(
                    "checkpoint encodes {} states but the world has {}",
                    fm.num_states(),
                    cfg.world.num_states()
                )));
            }
            Ok(Scorer::Head(head, fm))
        }
    }
}

fn kind_of(k: HardRuleKind) -> ConstraintKind {
    match k {
        HardRuleKind::EqualTo => ConstraintKind::EqualTo,
        HardRuleKind::AtMost => ConstraintKind::AtMost,
        HardRuleKind::AtLeast => ConstraintKind::AtLeast,
    }
}

fn rule_of(k: HardRuleKind, target: usize) -> ControlRule {
    match k {
        HardRuleKind::EqualTo => ControlRule::EqualTo { target },
        HardRuleKind::AtMost => ControlRule::AtMost { target },
        HardRuleKind::AtLeast => ControlRule::AtLeast { target },
    }
}

#[derive(Serialize)]
struct ScoredReport {
    #[serde(flatten)]
    report: DecodeReport,
    ld: f64,
    ls: f64,
}

/// Mean observed length, deviation and score of `lengths` against `target`.
fn score_lengths(lengths: &[usize], target: usize, kind: ConstraintKind) -> Result<[f64; 3]> {
    let n = lengths.len() as f64;
    let mut acc = [0.0; 3];
    for &l in lengths {
        let ld = length_deviation(l, target)?;
        acc[0] += l as f64;
        acc[1] += ld;
        acc[2] += length_score(ld, kind);
    }
    Ok(acc.map(|a| a / n))
}

/// Hard-constraint decoding for every configured rule and target, scored
/// next to the unguided base policy.
pub fn cmd_control(cfg: &ExperimentConfig) -> Result<String> {
    prepare_dir(&cfg.output_dir)?;
    let scorer = load_scorer(cfg)?;
    let prompts = cfg.prompts();
    let trunc = cfg.control_truncation();
    let c = &cfg.control;
    let base = sample_rollouts(&cfg.world, &prompts, c.rollouts_per_prompt, cfg.seed, c.max_len)?;
    let base_lengths: Vec<usize> = base.iter().map(|t| t.length).collect();

    let cols = ["kind", "target", "observed", "ld", "ls"];
    let mut guided = Csv::new(&cfg.digest, cfg.seed, &cols);
    let mut unguided = Csv::new(&cfg.digest, cfg.seed, &cols);
    let mut reports = Vec::new();
    let mut s = gamma_line(cfg);
    for &k in &c.rules {
        let kind = kind_of(k);
        for &target in &c.targets {
            let runs = decode_many(
                &cfg.world,
                &scorer,
                rule_of(k, target),
                &cfg.spec,
                &trunc,
                &prompts,
                c.rollouts_per_prompt,
                cfg.seed,
                c.max_len,
            )?;
            let lengths: Vec<usize> = runs.iter().map(|r| r.trajectory.length).collect();
            for r in &runs {
                let ld = length_deviation(r.trajectory.length, target)?;
                reports.push(ScoredReport {
                    report: r.report(),
                    ld,
                    ls: length_score(ld, kind),
                });
            }
            let [obs, ld, ls] = score_lengths(&lengths, target, kind)?;
            let [bobs, bld, bls] = score_lengths(&base_lengths, target, kind)?;
            let row = |o: f64, d: f64, l: f64| {
                vec![kind.as_str().to_string(), target.to_string(), fmt_g9(o), fmt_g9(d), fmt_g9(l)]
            };
            guided.row(&row(obs, ld, ls));
            unguided.row(&row(bobs, bld, bls));
            let _ = write!(
                s,
                "\n{} target={target} observed={} ls={} base_ls={}",
                kind.as_str(),
                fmt_g9(obs),
                fmt_g9(ls),
                fmt_g9(bls)
            );
        }
    }
    write_file(&cfg.output_dir.join("control_report.jsonl"), &jsonl(cfg, &reports)?)?;
    write_file(&cfg.output_dir.join("control_metrics.csv"), &guided.finish())?;
    write_file(&cfg.output_dir.join("control_base_metrics.csv"), &unguided.finish())?;
    Ok(s)
}

/// Tilted decoding against hard token budgets; writes `frontier.csv`.
pub fn cmd_frontier(cfg: &ExperimentConfig) -> Result<String> {
    prepare_dir(&cfg.output_dir)?;
    let scorer = load_scorer(cfg)?;
    let f = &cfg.frontier;
    let mut betas = f.betas.clone();
    if !betas.contains(&0.0) {
        betas.push(0.0);
    }
    let fc = FrontierConfig {
        betas,
        budgets: f.budgets.clone(),
        rollouts_per_prompt: f.rollouts_per_prompt,
        seed: cfg.seed,
        max_len: f.max_len,
        truncation: cfg.frontier_truncation(),
    };
    let mut points = frontier_sweep(&cfg.world, &scorer, &cfg.spec, &cfg.prompts(), &fc)?;
    points.sort_by(|a, b| {
        a.method
            .as_str()
            .cmp(b.method.as_str())
            .then(a.beta.total_cmp(&b.beta))
            .then(a.budget.cmp(&b.budget))
    });
    let mut csv = Csv::new(
        &cfg.digest,
        cfg.seed,
        &["method", "beta", "budget", "pass_rate", "avg_truncated_length"],
    );
    let mut s = gamma_line(cfg);
    for p in &points {
        let budget = p.budget.map(|b| b.to_string()).unwrap_or_default();
        csv.row(&[
            p.method.as_str().to_string(),
            fmt_g9(p.beta),
            budget.clone(),
            fmt_g9(p.pass_rate),
            fmt_g9(p.avg_truncated_length),
        ]);
        let _ = write!(
            s,
            "\n{} beta={} budget={budget} pass_rate={} avg_len={}",
            p.method.as_str(),
            fmt_g9(p.beta),
            fmt_g9(p.pass_rate),
            fmt_g9(p.avg_truncated_length)
        );
    }
    write_file(&cfg.output_dir.join("frontier.csv"), &csv.finish())?;
    Ok(s)
}

/// TD-residual token counts, shaping traces, precision curves, weighting
/// bias and boundary predictions.
pub fn cmd_analyze(cfg: &ExperimentConfig) -> Result<String> {
    let trajs = read_trajectories(&cfg.output_dir.join(TRAJECTORIES_FILE))?;
    let scorer = load_scorer(cfg)?;
    let a = &cfg.analyze;
    let done: Vec<&Trajectory> = trajs.iter().filter(|t| !t.truncated).collect();
    if done.is_empty() {
        return Err(Error::EmptyDataset("no completed trajectories to analyse".into()));
    }
    let traces = done
        .iter()
        .map(|t| ValuedTrace::from_trajectory(&cfg.world, t, &scorer))
        .collect::<Result<Vec<_>>>()?;

    let stats = length_token_stats(&traces, &cfg.spec, a.threshold)?;
    let mut csv = Csv::new(&cfg.digest, cfg.seed, &["token", "pos_count", "neg_count"]);
    for (tok, (p, n)) in &stats.counts {
        csv.row(&[tok.to_string(), p.to_string(), n.to_string()]);
    }
    write_file(&cfg.output_dir.join("length_tokens.csv"), &csv.finish())?;

    let mut csv = Csv::new(&cfg.digest, cfg.seed, &["trajectory", "step", "potential", "shaping_reward"]);
    let mut max_tel: f64 = 0.0;
    for (i, tr) in traces.iter().enumerate() {
        max_tel = max_tel.max(telescoping_check(&tr.values, &cfg.spec).residual.abs());
        if i < a.shaping_traces {
            for (t, f) in shaping_rewards(&tr.values, &cfg.spec).iter().enumerate() {
                csv.row(&[i.to_string(), t.to_string(), fmt_g9(tr.values[t]), fmt_g9(*f)]);
            }
        }
    }
    write_file(&cfg.output_dir.join("shaping.csv"), &csv.finish())?;

    let mut csv = Csv::new(&cfg.digest, cfg.seed, &["k", "z", "l", "f"]);
    for c in precision_curve(&cfg.spec, &a.k_values, &a.horizons)? {
        for p in &c.points {
            csv.row(&[fmt_g9(c.k), fmt_g9(p.z), fmt_g9(p.l), fmt_g9(p.f)]);
        }
    }
    write_file(&cfg.output_dir.join("precision.csv"), &csv.finish())?;

    let prompts = cfg.prompts();
    let mut csv = Csv::new(&cfg.digest, cfg.seed, &["name", "gamma", "token_avg", "traj_avg"]);
    let half = DiscountSpec::new(0.5)?;
    let (tok, trj) = weighting_bias_demo(&[(1, 0.5), (3, 0.5)], &half)?;
    csv.row(&["fixture_1_3".into(), fmt_g9(0.5), fmt_g9(tok), fmt_g9(trj)]);
    let mut gaps = Vec::new();
    for p in &prompts {
        let lengths: Vec<usize> = done.iter().filter(|t| &t.prompt_id == p).map(|t| t.length).collect();
        if lengths.is_empty() {
            continue;
        }
        gaps.push(jensen_gap(&lengths, &cfg.spec)?);
        let w = 1.0 / lengths.len() as f64;
        let dist: Vec<(usize, f64)> = lengths.iter().map(|&l| (l, w)).collect();
        let (tok, trj) = weighting_bias_demo(&dist, &cfg.spec)?;
        csv.row(&[format!("prompt_{p}"), fmt_g9(cfg.spec.gamma()), fmt_g9(tok), fmt_g9(trj)]);
    }
    write_file(&cfg.output_dir.join("weighting.csv"), &csv.finish())?;

    let (rows, boundary_mre) = evaluate_boundary_predictions(
        &scorer,
        &cfg.world,
        &prompts,
        &cfg.spec,
        a.ground_truth_samples,
        cfg.seed,
        cfg.rollout.max_len,
    )?;
    let mut csv = Csv::new(&cfg.digest, cfg.seed, &["prompt_id", "predicted", "ground_truth", "mean_length"]);
    for r in &rows {
        csv.row(&[r.prompt_id.clone(), fmt_g9(r.predicted), fmt_g9(r.ground_truth), fmt_g9(r.mean_length)]);
    }
    write_file(&cfg.output_dir.join("boundary.csv"), &csv.finish())?;

    let mean_gap = gaps.iter().sum::<f64>() / gaps.len().max(1) as f64;
    let summary = [
        ("traces", traces.len() as f64),
        ("total_exceedances", stats.total_exceedances() as f64),
        ("max_abs_telescoping_residual", max_tel),
        ("boundary_mre", boundary_mre),
        ("mean_jensen_gap", mean_gap),
    ];
    let mut csv = Csv::new(&cfg.digest, cfg.seed, &["metric", "value"]);
    let mut s = gamma_line(cfg);
    for (k, v) in summary {
        csv.row(&[k.to_string(), fmt_g9(v)]);
        let _ = write!(s, "\n{k}={}", fmt_g9(v));
    }
    write_file(&cfg.output_dir.join("analysis_summary.csv"), &csv.finish())?;
    Ok(s)
}

/// Output paths written by each command, relative to `output_dir`.
pub fn outputs_of(command: &str) -> &'static [&'static str] {
    match command {
        "rollout" => &[TRAJECTORIES_FILE],
        "train" => &[CHECKPOINT_FILE, "loss.csv"],
        "control" => &["control_report.jsonl", "control_metrics.csv", "control_base_metrics.csv"],
        "frontier" => &["frontier.csv"],
        "analyze" => &[
            "length_tokens.csv",
            "shaping.csv",
            "precision.csv",
            "weighting.csv",
            "boundary.csv",
            "analysis_summary.csv",
        ],
        _ => &[],
    }
}

/// Resolves the output directory: `--out` wins over the config/env value.
pub fn with_overrides(mut cfg: ExperimentConfig, seed: Option<u64>, out: Option<PathBuf>) -> ExperimentConfig {
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(o) = out {
        cfg.output_dir = o;
    }
    cfg
}
