//! Command-line front end.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::encoding::DEFAULT_FRAME_SPAN;
use crate::error::{Error, Result};
use crate::evaluator::{vocabulary, MatchingMode};
use crate::io::checkpoint::{load_checkpoint, save_checkpoint};
use crate::io::ground_truth::load_ground_truth;
use crate::io::labels::load_labels;
use crate::io::manifest::Manifest;
use crate::io::read_text;
use crate::io::svg::{emit_strips, Strip, StripGroup};
use crate::io::synthetic::{generate_synthetic, SyntheticSpec};
use crate::io::write_bytes;
use crate::pipeline::{
    evaluate_predictions, format_sweep, k_sweep, label_candidates, load_activity, run_pipeline, sweep_range,
    write_labelings, PipelineConfig,
};
use crate::segmenter::{segment_activity, BackgroundPolicy};
use crate::trainer::{format_loss_log, train, TrainConfig};

pub const SEED_ENV: &str = "SUBSEG_SEED";

#[derive(Debug, Parser)]
#[command(name = "subseg", version, about = "Unsupervised sub-action segmentation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset with ground truth and a manifest.
    Synth(SynthArgs),
    /// Train one activity and write its checkpoint and loss log.
    Train(TrainArgs),
    /// Label an activity's videos with a trained checkpoint.
    Segment(SegmentArgs),
    /// Score label files against ground truth.
    Eval(EvalArgs),
    /// Train, segment and score every activity in a manifest.
    Pipeline(PipelineArgs),
    /// Draw segmentation strips for an activity.
    Viz(VizArgs),
    /// MoF as a function of the number of concepts.
    Ksweep(KsweepArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "synth")]
    pub activity: String,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 50)]
    pub videos: usize,
    #[arg(long, default_value_t = 32)]
    pub dim: usize,
    #[arg(long, default_value_t = 40)]
    pub min_segments: usize,
    #[arg(long, default_value_t = 80)]
    pub max_segments: usize,
    /// Noise as a fraction of the smallest distance between class means.
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    #[arg(long, default_value_t = 0.0)]
    pub permutation_rate: f64,
    #[arg(long, default_value_t = 0.0)]
    pub dropout_rate: f64,
    #[arg(long, default_value_t = 5.0)]
    pub mean_scale: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Model and optimizer flags shared by the training commands. Unset flags
/// keep the value from `--config` (or the built-in default).
#[derive(Debug, Args, Default)]
pub struct ModelArgs {
    /// JSON pipeline config; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub groups: Option<usize>,
    #[arg(long)]
    pub pe_dim: Option<usize>,
    #[arg(long)]
    pub embed_dim: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub warmup_epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub no_pe: bool,
    #[arg(long)]
    pub no_skip: bool,
    #[arg(long)]
    pub no_ld: bool,
    #[arg(long)]
    pub no_lf: bool,
    #[arg(long)]
    pub no_lp: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub activity: String,
    /// Overrides the manifest's concept count.
    #[arg(long)]
    pub k: Option<usize>,
    /// Directory for `checkpoint.bin` and `loss.tsv`.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub activity: String,
    #[arg(long, default_value_t = 0.0)]
    pub bg_ratio: f64,
    /// Directory receiving `<video>.txt` label files.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Directory holding label files (pipeline layout or flat).
    #[arg(long)]
    pub predictions: PathBuf,
    #[arg(long, default_value = "activity")]
    pub matching: MatchingMode,
    /// Ground-truth token to leave out of scoring.
    #[arg(long)]
    pub background_label: Option<String>,
    /// Score the initial assignments instead of the decoded ones.
    #[arg(long)]
    pub initial: bool,
    /// Report path; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub bg_ratio: Option<f64>,
    #[arg(long)]
    pub matching: Option<MatchingMode>,
    #[arg(long)]
    pub background_label: Option<String>,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct VizArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub predictions: PathBuf,
    #[arg(long)]
    pub activity: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct KsweepArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub activity: String,
    /// Center of the sweep; defaults to the manifest's `k`.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub radius: usize,
    #[arg(long, default_value_t = 3)]
    pub seeds: u64,
    /// Table path; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
}

/// `SUBSEG_SEED`, when set, wins over any `--seed`.
pub fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("{SEED_ENV} must be an unsigned integer, got `{v}`"))),
        Err(_) => Ok(None),
    }
}

impl ModelArgs {
    pub fn pipeline_config(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(p) => PipelineConfig::from_json(&read_text(p)?, p)?,
            None => PipelineConfig::default(),
        };
        self.apply(&mut cfg.train)?;
        Ok(cfg)
    }

    fn apply(&self, t: &mut TrainConfig) -> Result<()> {
        macro_rules! set {
            ($($field:ident => $target:expr),* $(,)?) => {
                $(if let Some(v) = self.$field { $target = v; })*
            };
        }
        set!(
            epochs => t.epochs,
            lr => t.lr,
            beta => t.beta,
            lambda => t.lambda,
            gamma => t.gamma,
            groups => t.encoding.groups,
            pe_dim => t.encoding.dim,
            embed_dim => t.embed_dim,
            batch_size => t.batch_size,
            warmup_epochs => t.warmup_epochs,
            seed => t.seed,
        );
        if let Some(seed) = env_seed()? {
            t.seed = seed;
        }
        let toggles = &mut t.toggles;
        toggles.use_pe &= !self.no_pe;
        toggles.use_skip &= !self.no_skip;
        toggles.use_ld &= !self.no_ld;
        toggles.use_lf &= !self.no_lf;
        toggles.use_lp &= !self.no_lp;
        t.validate()
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_bytes(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn synth(a: &SynthArgs) -> Result<()> {
    let spec = SyntheticSpec {
        activity: a.activity.clone(),
        classes: a.k,
        videos: a.videos,
        feature_dim: a.dim,
        min_segments: a.min_segments,
        max_segments: a.max_segments,
        noise: a.noise,
        permutation_rate: a.permutation_rate,
        dropout_rate: a.dropout_rate,
        mean_scale: a.mean_scale,
    };
    let seed = env_seed()?.unwrap_or(a.seed);
    let manifest = generate_synthetic(&spec, seed, &a.out)?;
    eprintln!(
        "wrote {} videos to {}",
        manifest.activities.iter().map(|x| x.videos.len()).sum::<usize>(),
        a.out.display()
    );
    Ok(())
}

fn train_cmd(a: &TrainArgs) -> Result<()> {
    let manifest = Manifest::load(&a.manifest)?;
    let act = manifest.activity(&a.activity)?;
    let mut cfg = a.model.pipeline_config()?.train;
    cfg.concepts = a.k.unwrap_or(act.k);
    cfg.validate()?;
    let seqs = load_activity(act, &cfg.encoding)?;
    let model = train(&seqs, &cfg)?;
    save_checkpoint(&a.out.join("checkpoint.bin"), &model)?;
    write_bytes(&a.out.join("loss.tsv"), format_loss_log(&model.losses).as_bytes())
}

fn segment_cmd(a: &SegmentArgs) -> Result<()> {
    let policy = BackgroundPolicy::new(a.bg_ratio)?;
    let model = load_checkpoint(&a.checkpoint, None)?;
    let manifest = Manifest::load(&a.manifest)?;
    let act = manifest.activity(&a.activity)?;
    let seqs = load_activity(act, &model.config.encoding)?;
    let seg = segment_activity(&model, &seqs, &policy)?;
    write_labelings(&a.out, &seg)
}

fn eval_cmd(a: &EvalArgs) -> Result<()> {
    let manifest = Manifest::load(&a.manifest)?;
    let report = evaluate_predictions(
        &manifest,
        &a.predictions,
        a.matching,
        a.background_label.as_deref(),
        !a.initial,
    )?;
    emit(a.out.as_deref(), &report.to_json())
}

fn pipeline_cmd(a: &PipelineArgs) -> Result<()> {
    let manifest = Manifest::load(&a.manifest)?;
    let mut cfg = a.model.pipeline_config()?;
    if let Some(r) = a.bg_ratio {
        cfg.background_ratio = r;
    }
    if let Some(m) = a.matching {
        cfg.matching = m;
    }
    if a.background_label.is_some() {
        cfg.background_label = a.background_label.clone();
    }
    match run_pipeline(&manifest, &cfg, &a.out)? {
        Some(r) => eprintln!("MoF {:.4}  MoC {:.4}  F1 {:.4}", r.mof, r.moc, r.f1),
        None => eprintln!("some videos lack ground truth; no report written"),
    }
    Ok(())
}

fn viz_cmd(a: &VizArgs) -> Result<()> {
    let manifest = Manifest::load(&a.manifest)?;
    let act = manifest.activity(&a.activity)?;
    let truths = act
        .videos
        .iter()
        .filter_map(|v| v.gt_path.as_ref().map(|p| load_ground_truth(p, &v.id)))
        .collect::<Result<Vec<_>>>()?;
    let vocab = vocabulary(&truths, None);
    let mut groups = Vec::new();
    let mut missing = Vec::new();
    for v in &act.videos {
        let Some(path) = label_candidates(&a.predictions, &act.name, &v.id).into_iter().find(|p| p.is_file()) else {
            missing.push(v.id.clone());
            continue;
        };
        let labels = load_labels(&path)?;
        let mut strips = Vec::new();
        if let Some(t) = truths.iter().find(|t| t.video_id == v.id) {
            let gt = t
                .segment_labels(DEFAULT_FRAME_SPAN)
                .iter()
                .map(|tok| vocab.iter().position(|c| c == tok))
                .collect();
            strips.push(Strip { name: "ground truth".into(), labels: gt });
        }
        strips.push(Strip { name: "initial".into(), labels: labels.initial });
        strips.push(Strip { name: "decoded".into(), labels: labels.decoded });
        groups.push(StripGroup { title: v.id.clone(), strips });
    }
    if !missing.is_empty() {
        return Err(Error::Inventory(missing));
    }
    write_bytes(&a.out, emit_strips(&groups).as_bytes())
}

fn ksweep_cmd(a: &KsweepArgs) -> Result<()> {
    let manifest = Manifest::load(&a.manifest)?;
    let act = manifest.activity(&a.activity)?;
    let cfg = a.model.pipeline_config()?;
    let ks = sweep_range(a.k.unwrap_or(act.k), a.radius);
    let base = cfg.train.seed;
    let seeds: Vec<u64> = (0..a.seeds.max(1)).map(|s| base + s).collect();
    let rows = k_sweep(act, &cfg, &ks, &seeds)?;
    emit(a.out.as_deref(), &format_sweep(&rows, &seeds))
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Synth(a) => synth(a),
        Command::Train(a) => train_cmd(a),
        Command::Segment(a) => segment_cmd(a),
        Command::Eval(a) => eval_cmd(a),
        Command::Pipeline(a) => pipeline_cmd(a),
        Command::Viz(a) => viz_cmd(a),
        Command::Ksweep(a) => ksweep_cmd(a),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
