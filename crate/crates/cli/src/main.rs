mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use locallearn::netsim::data::generate;
use locallearn::netsim::train::{train_unit, UnitTrainConfig};
use locallearn::reproduce::{self, Budget};
use locallearn::rules::{self, QuadraticCoefficients, RangeConvention};
use locallearn::{boolean, channel, deep_targets, hopfield, moments, ssh, Error};
use serde::Serialize;
use sha2::{Digest, Sha256};

use config::*;

/// Experiment runner for local learning rules, learnability censuses,
/// deep targets, learning-channel benchmarks and Hopfield invariance.
#[derive(Parser)]
#[command(name = "locallearn", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON experiment document: {"experiment", "seed", "output_dir", "params"}.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the document's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; defaults to out/<experiment>.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, default_value = "quick", value_parser = parse_budget)]
    budget: Budget,
}

fn parse_budget(s: &str) -> Result<Budget, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Inspect the rule catalog and the range transform.
    Rules {
        #[command(subcommand)]
        action: RulesAction,
    },
    /// Data moments and, with a rule, the predicted epoch trajectory.
    Moments,
    /// On-line training of a single unit.
    Simulate,
    /// Shallow and two-layer learnability census of Boolean functions.
    Boolean,
    /// Supervised-Hebb learnability verdict on one dataset.
    Ssh,
    /// Deep-targets training of a threshold autoencoder.
    DeepTargets,
    /// Rate/improvement table and an empirical scaling study.
    Channel,
    /// Isometry-commutation search for a symmetric storage rule.
    Hopfield,
    /// Regenerate a table or figure, or run the acceptance criteria.
    Reproduce {
        target: Target,
    },
}

#[derive(Subcommand)]
enum RulesAction {
    /// Every catalog rule with its degrees.
    List,
    /// Degrees of one rule given by name, e.g. `oja` or `fixed_decay(0.5)`.
    Classify { rule: String },
    /// Re-express quadratic coefficients in the other output range.
    Transform {
        #[arg(long, value_enum)]
        from: Range,
        alpha: f64,
        beta: f64,
        gamma: f64,
        delta: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Range {
    ZeroOne,
    MinusOneOne,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Target {
    Table6,
    Table7,
    Table8,
    Fig3,
    Fig4,
    Fig11,
    Criteria,
    All,
}

#[derive(Debug)]
pub enum Failure {
    /// Bad configuration or arguments: exit 2.
    Config(String),
    /// Anything that went wrong while running: exit 1.
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_)
            | Error::DimensionMismatch { .. }
            | Error::AboveCap { .. }
            | Error::MissingTarget
            | Error::HigherOrderMoments(_)
            | Error::DegenerateRule
            | Error::Json(_) => Failure::Config(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type Outcome<T> = Result<T, Failure>;

/// Files of one run, written together with a manifest.
struct Run {
    experiment: &'static str,
    seed: u64,
    dir: PathBuf,
    config: serde_json::Value,
    files: Vec<(String, String)>,
}

#[derive(Serialize)]
struct Artifact {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    experiment: &'a str,
    version: &'a str,
    seed: u64,
    config_sha256: String,
    config: &'a serde_json::Value,
    artifacts: Vec<Artifact>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl Run {
    fn new(experiment: &'static str, common: &Common, doc: Option<&ExperimentConfig>, config: serde_json::Value) -> Self {
        let seed = common.seed.or(doc.and_then(|d| d.seed)).unwrap_or(0);
        let dir = common
            .out
            .clone()
            .or_else(|| doc.and_then(|d| d.output_dir.clone()))
            .unwrap_or_else(|| Path::new("out").join(experiment));
        Run {
            experiment,
            seed,
            dir,
            config,
            files: Vec::new(),
        }
    }

    fn add(&mut self, name: &str, contents: impl Into<String>) {
        self.files.push((name.to_string(), contents.into()));
    }

    fn add_json<T: Serialize>(&mut self, name: &str, value: &T) -> Outcome<()> {
        let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Runtime(e.to_string()))?;
        self.add(name, text + "\n");
        Ok(())
    }

    fn finish(self) -> Outcome<()> {
        std::fs::create_dir_all(&self.dir)?;
        let mut artifacts = Vec::new();
        for (name, body) in &self.files {
            std::fs::write(self.dir.join(name), body)?;
            artifacts.push(Artifact {
                path: name.clone(),
                sha256: sha256_hex(body.as_bytes()),
            });
        }
        let mut config = self.config;
        if let serde_json::Value::Object(map) = &mut config {
            map.insert("seed".into(), self.seed.into());
        }
        let canonical = serde_json::to_string(&config).map_err(|e| Failure::Runtime(e.to_string()))?;
        let manifest = Manifest {
            experiment: self.experiment,
            version: env!("CARGO_PKG_VERSION"),
            seed: self.seed,
            config_sha256: sha256_hex(canonical.as_bytes()),
            config: &config,
            artifacts,
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| Failure::Runtime(e.to_string()))?;
        std::fs::write(self.dir.join("manifest.json"), text + "\n")?;
        eprintln!("wrote {} artifacts to {}", self.files.len(), self.dir.display());
        Ok(())
    }
}

fn document(common: &Common, experiment: &str) -> Outcome<ExperimentConfig> {
    match &common.config {
        Some(path) => ExperimentConfig::load(path),
        None => Err(Failure::Config(format!("{experiment} needs --config <file>"))),
    }
}

fn params_json<T: Serialize>(p: &T) -> serde_json::Value {
    serde_json::json!({ "params": p })
}

fn rules_cmd(action: &RulesAction, common: &Common) -> Outcome<()> {
    let mut run = Run::new("rules", common, None, serde_json::json!({}));
    let sub = match action {
        RulesAction::List => "list",
        RulesAction::Classify { .. } => "classify",
        RulesAction::Transform { .. } => "transform",
    };
    if common.out.is_none() {
        run.dir = Path::new("out").join("rules").join(sub);
    }
    match action {
        RulesAction::List => {
            let mut csv = String::from("name,n,d,supervised,formula\n");
            for r in rules::catalog() {
                let d = rules::classify_degrees(&r)?;
                csv.push_str(&format!("{},{},{},{},\"{}\"\n", r.name, d.n, d.d, r.is_supervised(), r.to_string().replace('"', "\"\"")));
            }
            print!("{csv}");
            run.config = serde_json::json!({ "action": "list" });
            run.add("rules.csv", csv);
        }
        RulesAction::Classify { rule } => {
            let r = rules::lookup(rule)?;
            let d = rules::classify_degrees(&r)?;
            println!("{} n={} d={}", r.name, d.n, d.d);
            run.config = serde_json::json!({ "action": "classify", "rule": rule });
            run.add_json("classification.json", &serde_json::json!({ "rule": r, "n": d.n, "d": d.d }))?;
        }
        RulesAction::Transform {
            from,
            alpha,
            beta,
            gamma,
            delta,
        } => {
            let conv = match from {
                Range::ZeroOne => RangeConvention::ZeroOne,
                Range::MinusOneOne => RangeConvention::MinusOneOne,
            };
            let out = rules::range_transform(QuadraticCoefficients::new(*alpha, *beta, *gamma, *delta), conv);
            println!("{} {} {} {}", out.alpha, out.beta, out.gamma, out.delta);
            run.config = serde_json::json!({ "action": "transform", "from": conv, "coefficients": [alpha, beta, gamma, delta] });
            run.add_json("transform.json", &out)?;
        }
    }
    run.finish()
}

fn moments_cmd(common: &Common) -> Outcome<()> {
    let doc = document(common, "moments")?;
    let p: MomentsParams = doc.params("moments")?;
    let mut run = Run::new("moments", common, Some(&doc), params_json(&p));
    let data = generate(&p.data, run.seed)?;
    let m = moments::compute_moments(&data)?;
    run.add_json("moments.json", &m)?;
    if let Some(rule) = &p.rule {
        let rule = rule.resolve()?;
        let w0 = p.w0.clone().unwrap_or_else(|| vec![0.0; m.dim()]);
        let traj = moments::predict(&rule, &m, p.eta, &w0, p.epochs)?;
        let mut csv = String::from("epoch");
        for i in 1..=m.dim() {
            csv.push_str(&format!(",w_{i}"));
        }
        csv.push('\n');
        for (k, w) in traj.iter().enumerate() {
            csv.push_str(&k.to_string());
            for v in w {
                csv.push_str(&format!(",{v}"));
            }
            csv.push('\n');
        }
        run.add("prediction.csv", csv);
    }
    run.finish()
}

fn simulate_cmd(common: &Common) -> Outcome<()> {
    let doc = document(common, "simulate")?;
    let p: SimulateParams = doc.params("simulate")?;
    let rule = p.rule.resolve()?;
    let mut run = Run::new("simulate", common, Some(&doc), params_json(&p));
    let mut data = generate(&p.data, run.seed)?;
    if p.bias {
        data = data.with_bias_column();
    }
    let cfg = UnitTrainConfig {
        transfer: p.transfer,
        eta: p.eta,
        epochs: p.epochs,
        seed: run.seed,
        init: p.init.clone(),
        shuffle: p.shuffle,
    };
    let traj = train_unit(&rule, &data, &cfg)?;
    let last = traj.records.last().expect("epoch 0 is recorded");
    println!("epoch {} norm {} angle {}", last.epoch, last.norm, last.angle_to_centroid);
    run.add("trajectory.csv", traj.to_csv());
    run.finish()
}

fn boolean_cmd(common: &Common) -> Outcome<()> {
    let doc = document(common, "boolean")?;
    let p: BooleanParams = doc.params("boolean")?;
    let rules = match &p.rules {
        Some(list) => list.iter().map(RuleSpec::resolve).collect::<Outcome<Vec<_>>>()?,
        None => boolean::census_rules(),
    };
    let mut run = Run::new("boolean", common, Some(&doc), params_json(&p));
    let res = boolean::census(p.n, p.monotone, &rules, &p.learn, run.seed)?;
    for r in &res.rows {
        println!("n={} {} shallow {}/{} deep {}/{}", r.fan_in, r.rule_name, r.shallow_count, r.total, r.deep_count, r.total);
    }
    run.add("census.csv", res.to_csv());
    run.add_json("details.json", &res.details)?;
    run.finish()
}

fn ssh_cmd(common: &Common) -> Outcome<()> {
    let doc = document(common, "ssh")?;
    let p: SshParams = doc.params("ssh")?;
    let mut run = Run::new("ssh", common, Some(&doc), params_json(&p));
    let data = generate(&p.data, run.seed)?;
    let mut verify = p.verify.clone().unwrap_or_default();
    if p.verify.is_none() || common.seed.is_some() {
        verify.seed = run.seed;
    }
    let v = ssh::predict_and_verify(&data, p.with_bias, &verify)?;
    println!("predicted {:?} empirical {} after {} epochs", v.predicted, v.empirical, v.epochs);
    run.add_json("verdict.json", &v)?;
    run.finish()
}

fn deep_targets_cmd(common: &Common) -> Outcome<()> {
    let doc = document(common, "deep-targets")?;
    let mut p: DeepTargetsParams = doc.params("deep-targets")?;
    if let Some(s) = common.seed.or(doc.seed) {
        p.seed = s;
    }
    let mut run = Run::new("deep-targets", common, Some(&doc), params_json(&p));
    run.seed = p.seed;
    let out = deep_targets::autoencoder_experiment(&p)?;
    let s = reproduce::summarize_autoencoder(&out)?;
    println!(
        "initial {:.3}; best epoch {} train reduction {:.3} test reduction {:.3}",
        s.initial_train, s.best_epoch, s.train_reduction, s.test_reduction
    );
    run.add("errors.csv", out.to_csv());
    run.add_json("summary.json", &s)?;
    run.finish()
}

fn channel_cmd(common: &Common) -> Outcome<()> {
    let doc = document(common, "channel")?;
    let p: ChannelParams = doc.params("channel")?;
    p.algorithm.kind.validate()?;
    let mut run = Run::new("channel", common, Some(&doc), params_json(&p));
    let [w, n, k, d] = p.table;
    let table = channel::table8(&channel::Table8Params::new(w, n, k, d))?;
    let study = channel::scaling_study(&p.algorithm, &p.sweep, p.fit, p.trials, run.seed)?;
    println!(
        "{} slope {:.4} +- {:.4} (R^2 {:.3})",
        study.algorithm, study.fit.slope, study.fit.slope_ci95, study.fit.r2
    );
    run.add("table8.md", channel::table8_markdown(&table));
    run.add("table8.csv", channel::table8_csv(&table));
    run.add("scaling_points.csv", study.points_csv());
    run.add("scaling_trials.csv", study.trials_csv());
    run.add_json("fit.json", &study.fit)?;
    run.finish()
}

fn hopfield_cmd(common: &Common) -> Outcome<()> {
    let doc = document(common, "hopfield")?;
    let p: HopfieldParams = doc.params("hopfield")?;
    let mut run = Run::new("hopfield", common, Some(&doc), params_json(&p));
    let mut search = p.search.unwrap_or_default();
    if p.search.is_none() || common.seed.is_some() {
        search.seed = run.seed;
    }
    let out = hopfield::uniqueness_search(p.n, p.rule, &search)?;
    println!(
        "n={} checked {} ({}), counterexample: {}",
        out.n,
        out.checked,
        if out.exhaustive { "exhaustive" } else { "random" },
        if out.counterexample.is_some() { "yes" } else { "none" }
    );
    run.add_json("search.json", &out)?;
    if let Some(mem) = &p.memories {
        let net = hopfield::store_with_rule(mem, p.rule)?;
        run.add("orientation.csv", hopfield::orientation(&net)?.to_csv()?);
    }
    run.finish()
}

fn reproduce_cmd(target: Target, common: &Common) -> Outcome<()> {
    if common.config.is_some() {
        return Err(Failure::Config("reproduce takes no --config; use --budget and --seed".into()));
    }
    let mut run = Run::new("reproduce", common, None, serde_json::json!({ "target": target, "budget": common.budget }));
    if common.out.is_none() {
        let name = serde_json::to_value(target).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        run.dir = Path::new("out").join("reproduce").join(name);
    }
    let seed = run.seed;
    let all = matches!(target, Target::All);
    let mut failed = Vec::new();
    if all || matches!(target, Target::Table6) {
        let csv: String = reproduce::table6()?.iter().map(|r| r.to_csv()).collect::<Vec<_>>().join("");
        run.add("table6.csv", dedupe_headers(&csv));
    }
    if all || matches!(target, Target::Table7) {
        let csv: String = reproduce::table7()?.iter().map(|r| r.to_csv()).collect::<Vec<_>>().join("");
        run.add("table7.csv", dedupe_headers(&csv));
    }
    if all || matches!(target, Target::Table8) {
        let t = reproduce::table8(common.budget, seed)?;
        run.add("table8.md", channel::table8_markdown(&t.theory));
        run.add("table8.csv", channel::table8_csv(&t.theory));
        for s in [&t.pwgb, &t.pwgrk, &t.pwgbk] {
            let name = s.algorithm.to_lowercase();
            run.add(&format!("table8_{name}_points.csv"), s.points_csv());
            run.add(&format!("table8_{name}_trials.csv"), s.trials_csv());
        }
        let fits: Vec<_> = [&t.pwgb, &t.pwgrk, &t.pwgbk].iter().map(|s| (&s.algorithm, &s.fit)).collect();
        run.add_json(
            "table8_fits.json",
            &serde_json::json!({ "fits": fits, "bp_improvement": t.bp_improvement, "pwlr_gap": t.pwlr_gap }),
        )?;
    }
    if all || matches!(target, Target::Fig3) {
        run.add("fig3.csv", reproduce::fig3(seed)?.to_csv());
    }
    if all || matches!(target, Target::Fig4) {
        run.add("fig4.csv", reproduce::riccati_comparison(0.05, 50, seed)?.to_csv());
    }
    if all || matches!(target, Target::Fig11) {
        run.add("fig11.csv", reproduce::fig11(seed)?.to_csv());
    }
    if all || matches!(target, Target::Criteria) {
        let results = reproduce::reproduce_all(common.budget);
        for r in &results {
            println!("{}", r.line());
            if !r.passed {
                failed.push(r.id);
            }
        }
        // Timings vary run to run, so they stay out of the artifact.
        let stable: Vec<_> = results
            .iter()
            .map(|r| serde_json::json!({ "id": r.id, "name": r.name, "passed": r.passed, "detail": r.detail }))
            .collect();
        run.add_json("criteria.json", &stable)?;
    }
    run.finish()?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Runtime(format!("criteria failed: {failed:?}")))
    }
}

/// Concatenated CSVs share a header; keep the first.
fn dedupe_headers(csv: &str) -> String {
    let mut lines = csv.lines();
    let header = lines.next().unwrap_or_default();
    let mut out = format!("{header}\n");
    for l in lines.filter(|l| *l != header) {
        out.push_str(l);
        out.push('\n');
    }
    out
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = &cli.common;
    if let Some(t) = common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Rules { action } => rules_cmd(action, common),
        Command::Moments => moments_cmd(common),
        Command::Simulate => simulate_cmd(common),
        Command::Boolean => boolean_cmd(common),
        Command::Ssh => ssh_cmd(common),
        Command::DeepTargets => deep_targets_cmd(common),
        Command::Channel => channel_cmd(common),
        Command::Hopfield => hopfield_cmd(common),
        Command::Reproduce { target } => reproduce_cmd(*target, common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("invalid configuration: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
