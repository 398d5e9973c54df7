//! Command-line front end: argument/config parsing and the four subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Deserializer, Serialize};

use qpattern::combinatorics::{degeneracy_s, degeneracy_sk, g_k_given_s, rational_to_exact_string};
use qpattern::degenerate::{
    load_idx, ClassifierSpec, EveKnowledge, Experiment, LabeledPatternSet, MnistRatePoint, RepeatedRate, Summary,
    DEFAULT_THRESHOLD, MNIST_CLASSES,
};
use qpattern::ensemble::{gram, holevo, pgm_conditional, pgm_error_from_spectrum};
use qpattern::pattern::enumerate_ktpf;
use qpattern::rates::{linspace, sweep_ltpf};
use qpattern::{
    Attack, ChannelParams, ImageSpace, LocalityPartition, LtpfScheme, Modulation, ModulationKind, Pattern, Side,
    TpfAssignment,
};

#[derive(Debug, Parser)]
#[command(name = "qpattern", version, about = "Secure-rate calculator for coherent pattern communication")]
pub struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// TOML file with per-subcommand defaults; command-line flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rate curves of a localised target-position code.
    Ltpf(LtpfArgs),
    /// Simulated rates of the degenerate MNIST code.
    Mnist(MnistArgs),
    /// Encoding-degeneracy counts for a range of mode numbers.
    Degeneracy(DegeneracyArgs),
    /// Ensemble-level diagnostics.
    #[command(subcommand)]
    Ensemble(EnsembleCommand),
}

#[derive(Debug, Subcommand)]
pub enum EnsembleCommand {
    /// Gram matrix, spectrum, PGM statistics and Holevo information as JSON.
    Inspect(InspectArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttackArg {
    Collective,
    Individual,
    Probabilistic,
    All,
}

impl From<AttackArg> for Attack {
    fn from(a: AttackArg) -> Self {
        match a {
            AttackArg::Collective => Attack::Collective,
            AttackArg::Individual => Attack::Individual,
            AttackArg::Probabilistic => Attack::Probabilistic,
            AttackArg::All => Attack::All,
        }
    }
}

/// Accepts `"0.25"`, `0.25`, `[0.25, 0.5]` or `"0.01:0.99:50"` from config files.
fn flexible_list<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Text(String),
        Number(f64),
        List(Vec<f64>),
    }
    Ok(Option::<Raw>::deserialize(d)?.map(|raw| match raw {
        Raw::Text(s) => s,
        Raw::Number(x) => x.to_string(),
        Raw::List(v) => v.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
    }))
}

macro_rules! fill_from {
    ($target:ident, $file:ident; $($field:ident),* $(,)?) => {
        $( if $target.$field.is_none() { $target.$field = $file.$field; } )*
    };
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct LtpfArgs {
    /// Blocks as `size:targets`, e.g. `3:1,5:2,3:1`.
    #[arg(long)]
    pub scheme: Option<String>,
    /// Mean photon numbers, comma separated.
    #[arg(long)]
    #[serde(deserialize_with = "flexible_list")]
    pub ns: Option<String>,
    /// Transmissivities: `start:stop:count` or a comma-separated list.
    #[arg(long)]
    #[serde(deserialize_with = "flexible_list")]
    pub eta: Option<String>,
    #[arg(long, value_enum)]
    pub attack: Option<AttackArg>,
    /// `bpsk` or `bam`.
    #[arg(long)]
    pub modulation: Option<String>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct MnistArgs {
    /// Directory holding the four standard MNIST IDX files.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    #[arg(long)]
    pub train_images: Option<PathBuf>,
    #[arg(long)]
    pub train_labels: Option<PathBuf>,
    #[arg(long)]
    pub test_images: Option<PathBuf>,
    #[arg(long)]
    pub test_labels: Option<PathBuf>,
    #[arg(long)]
    #[serde(deserialize_with = "flexible_list")]
    pub ns: Option<String>,
    #[arg(long)]
    #[serde(deserialize_with = "flexible_list")]
    pub eta: Option<String>,
    /// Size of Eve's stratified training subset (enables the diminished attack).
    #[arg(long)]
    pub eve_train_size: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `centroid`, `knn` or `knn:K`.
    #[arg(long)]
    pub classifier: Option<String>,
    #[arg(long)]
    pub threshold: Option<u8>,
    #[arg(long)]
    pub modulation: Option<String>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct DegeneracyArgs {
    /// Mode range `lo:hi` (inclusive) or a single value.
    #[arg(long)]
    pub m: Option<String>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct InspectArgs {
    /// Explicit patterns, e.g. `100,010,001`.
    #[arg(long, conflicts_with = "ktpf")]
    pub patterns: Option<String>,
    /// Full k-TPF space `m:k`.
    #[arg(long)]
    pub ktpf: Option<String>,
    #[arg(long)]
    #[serde(deserialize_with = "flexible_list")]
    pub ns: Option<String>,
    #[arg(long)]
    #[serde(deserialize_with = "flexible_list")]
    pub eta: Option<String>,
    /// `bob` or `eve`.
    #[arg(long)]
    pub side: Option<String>,
    #[arg(long)]
    pub modulation: Option<String>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Contents of a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub threads: Option<usize>,
    pub ltpf: LtpfArgs,
    pub mnist: MnistArgs,
    pub degeneracy: DegeneracyArgs,
    pub ensemble: InspectArgs,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Rendered command output plus a one-line summary for the terminal.
#[derive(Debug)]
pub struct Artifact {
    pub body: String,
    pub output: Option<PathBuf>,
    pub summary: String,
}

/// Parses `size:targets` blocks into a contiguous-layout scheme.
pub fn parse_scheme(text: &str, modulation: Modulation) -> Result<LtpfScheme> {
    let mut sizes = Vec::new();
    let mut targets = Vec::new();
    for (i, token) in text.split(',').enumerate() {
        let token = token.trim();
        let block = i + 1;
        let (s, k) = token
            .split_once(':')
            .with_context(|| format!("block {block} ({token:?}): expected size:targets"))?;
        let size: usize = s.trim().parse().with_context(|| format!("block {block} ({token:?}): bad size"))?;
        let k: usize = k.trim().parse().with_context(|| format!("block {block} ({token:?}): bad target count"))?;
        ensure!(size >= 2, "block {block} ({token:?}): size must be at least 2");
        ensure!(k >= 1 && k < size, "block {block} ({token:?}): targets must satisfy 1 <= k < {size}");
        sizes.push(size);
        targets.push(k);
    }
    Ok(LtpfScheme::new(LocalityPartition::contiguous(&sizes)?, TpfAssignment::new(targets), modulation)?)
}

/// `start:stop:count` grid or comma-separated values.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let values = match parts.as_slice() {
        [start, stop, count] => {
            let count: usize = count.trim().parse().with_context(|| format!("bad grid count in {text:?}"))?;
            ensure!(count >= 1, "grid {text:?} must contain at least one point");
            linspace(parse_f64(start)?, parse_f64(stop)?, count)
        }
        [_] => text.split(',').map(parse_f64).collect::<Result<Vec<_>>>()?,
        _ => bail!("cannot parse {text:?}: expected start:stop:count or a comma-separated list"),
    };
    ensure!(!values.is_empty(), "empty value list");
    Ok(values)
}

fn parse_f64(s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().with_context(|| format!("{s:?} is not a number"))?;
    ensure!(v.is_finite(), "{s:?} is not finite");
    Ok(v)
}

fn parse_transmissivities(text: &str) -> Result<Vec<f64>> {
    let etas = parse_grid(text)?;
    if let Some(bad) = etas.iter().find(|e| !(0.0..=1.0).contains(*e)) {
        bail!("transmissivity {bad} is outside [0, 1]");
    }
    Ok(etas)
}

fn parse_photons(text: &str) -> Result<Vec<f64>> {
    let ns = parse_grid(text)?;
    if let Some(bad) = ns.iter().find(|n| **n < 0.0) {
        bail!("mean photon number {bad} is negative");
    }
    Ok(ns)
}

fn parse_modulation(text: Option<&str>) -> Result<ModulationKind> {
    text.unwrap_or("bpsk").parse().map_err(anyhow::Error::msg)
}

fn csv_body<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn json_body<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

pub fn run_ltpf(args: LtpfArgs) -> Result<Artifact> {
    let kind = parse_modulation(args.modulation.as_deref())?;
    let scheme_text = args.scheme.as_deref().context("--scheme is required")?;
    let ns_list = parse_photons(args.ns.as_deref().unwrap_or("0.25"))?;
    let etas = parse_transmissivities(args.eta.as_deref().unwrap_or("0.01:0.99:50"))?;
    let scheme = parse_scheme(scheme_text, Modulation::new(kind, ns_list[0])?)?;
    let attack = args.attack.unwrap_or(AttackArg::All);

    let points = sweep_ltpf(&scheme, &etas, &ns_list, attack.into())?;
    let body = match args.format.unwrap_or(Format::Csv) {
        Format::Csv => csv_body(&points)?,
        Format::Json => json_body(&points)?,
    };
    let positive = points.iter().filter(|p| p.r_pr.or(p.r_ind).or(p.r_coll).is_some_and(|r| r > 0.0)).count();
    let summary = format!(
        "ltpf: scheme {scheme_text} (sigma = {}), {} points, {positive} with positive rate",
        scheme.sigma(),
        points.len()
    );
    Ok(Artifact { body, output: args.output, summary })
}

#[derive(Debug, Serialize)]
struct MnistPoint {
    eta: f64,
    ns: f64,
    seed_count: usize,
    i_ab: Summary,
    i_ae: Summary,
    r_ind: Summary,
    #[serde(skip_serializing_if = "Option::is_none")]
    i_ae_dim: Option<Summary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r_dim: Option<Summary>,
}

#[derive(Debug, Serialize)]
struct MnistReport {
    classifier: String,
    modulation: ModulationKind,
    threshold: u8,
    seed: u64,
    eve_train_size: Option<usize>,
    train_size: usize,
    eval_size: usize,
    points: Vec<MnistPoint>,
}

fn mnist_path(explicit: Option<PathBuf>, dir: &Path, name: &str) -> PathBuf {
    explicit.unwrap_or_else(|| dir.join(name))
}

pub fn run_mnist(args: MnistArgs) -> Result<Artifact> {
    let kind = parse_modulation(args.modulation.as_deref())?;
    let ns_list = parse_photons(args.ns.as_deref().unwrap_or("0.5"))?;
    let etas = parse_transmissivities(args.eta.as_deref().unwrap_or("0.5"))?;
    let classifier: ClassifierSpec =
        args.classifier.as_deref().unwrap_or("centroid").parse().map_err(anyhow::Error::msg)?;
    let reps = args.reps.unwrap_or(20);
    ensure!(reps >= 1, "--reps must be at least 1");
    let seed = args.seed.unwrap_or(0);
    let threshold = args.threshold.unwrap_or(DEFAULT_THRESHOLD);
    if let Some(n) = args.eve_train_size {
        ensure!(n >= MNIST_CLASSES as usize, "--eve-train-size must be at least {MNIST_CLASSES} (one per class)");
    }
    let format = args.format.unwrap_or(Format::Json);

    let dir = args.data_dir.clone().unwrap_or_else(|| PathBuf::from("data/mnist"));
    let load = |images: PathBuf, labels: PathBuf| -> Result<LabeledPatternSet> {
        let raw = load_idx(&images, &labels).with_context(|| format!("loading {}", images.display()))?;
        Ok(LabeledPatternSet::from_grayscale(&raw, threshold)?)
    };
    let train = load(
        mnist_path(args.train_images, &dir, "train-images-idx3-ubyte"),
        mnist_path(args.train_labels, &dir, "train-labels-idx1-ubyte"),
    )?;
    let eval = load(
        mnist_path(args.test_images, &dir, "t10k-images-idx3-ubyte"),
        mnist_path(args.test_labels, &dir, "t10k-labels-idx1-ubyte"),
    )?;
    let experiment = Experiment::new(classifier, &train, &eval)?;

    let mut points = Vec::new();
    let mut rows: Vec<MnistRatePoint> = Vec::new();
    for &ns in &ns_list {
        let modulation = Modulation::new(kind, ns)?;
        for &eta in &etas {
            let full = experiment.repeat(eta, &modulation, EveKnowledge::Full, reps, seed)?;
            let dim: Option<RepeatedRate> = args
                .eve_train_size
                .map(|n| experiment.repeat(eta, &modulation, EveKnowledge::Diminished { training_size: n }, reps, seed))
                .transpose()?;
            rows.push(dim.unwrap_or(full).into());
            points.push(MnistPoint {
                eta,
                ns,
                seed_count: reps,
                i_ab: full.i_ab,
                i_ae: full.i_ae,
                r_ind: full.rate,
                i_ae_dim: dim.map(|d| d.i_ae),
                r_dim: dim.map(|d| d.rate),
            });
        }
    }
    let summary = match points.as_slice() {
        [p] => format!(
            "mnist: eta = {}, N_S = {}, {reps} reps: R_ind = {:.4} +- {:.4}{}",
            p.eta,
            p.ns,
            p.r_ind.mean,
            p.r_ind.std_err,
            p.r_dim.map(|r| format!(", R_dim = {:.4} +- {:.4}", r.mean, r.std_err)).unwrap_or_default()
        ),
        _ => format!("mnist: {} grid points x {reps} reps with {classifier}", points.len()),
    };
    let body = match format {
        Format::Csv => csv_body(&rows)?,
        Format::Json => json_body(&MnistReport {
            classifier: classifier.to_string(),
            modulation: kind,
            threshold,
            seed,
            eve_train_size: args.eve_train_size,
            train_size: train.len(),
            eval_size: eval.len(),
            points,
        })?,
    };
    Ok(Artifact { body, output: args.output, summary })
}

#[derive(Debug, Serialize)]
struct DegeneracyRow {
    m: usize,
    g_s: String,
    g_sk: String,
    g_k_given_s: String,
}

pub fn run_degeneracy(args: DegeneracyArgs) -> Result<Artifact> {
    let text = args.m.as_deref().unwrap_or("2:12");
    let (lo, hi) = match text.split_once(':') {
        Some((a, b)) => (a.trim().parse::<usize>()?, b.trim().parse::<usize>()?),
        None => {
            let m = text.trim().parse::<usize>()?;
            (m, m)
        }
    };
    ensure!(lo >= 2 && lo <= hi, "--m must be lo:hi with 2 <= lo <= hi");
    let rows = (lo..=hi)
        .map(|m| {
            Ok(DegeneracyRow {
                m,
                g_s: degeneracy_s(m)?.to_string(),
                g_sk: degeneracy_sk(m)?.to_string(),
                g_k_given_s: rational_to_exact_string(&g_k_given_s(m)?),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let body = match args.format.unwrap_or(Format::Csv) {
        Format::Csv => csv_body(&rows)?,
        Format::Json => json_body(&rows)?,
    };
    let summary = format!("degeneracy: m = {lo}..={hi}, G_S({hi}) = {}", rows.last().expect("non-empty").g_s);
    Ok(Artifact { body, output: args.output, summary })
}

#[derive(Debug, Serialize)]
struct Inspection {
    patterns: Vec<Pattern>,
    modulation: Modulation,
    eta: f64,
    side: Side,
    gram: Vec<Vec<f64>>,
    eigenvalues: Vec<f64>,
    pgm_conditional: Vec<Vec<f64>>,
    p_err: f64,
    chi: f64,
}

pub fn run_inspect(args: InspectArgs) -> Result<Artifact> {
    let kind = parse_modulation(args.modulation.as_deref())?;
    let ns = parse_f64(args.ns.as_deref().unwrap_or("1"))?;
    let eta = parse_f64(args.eta.as_deref().unwrap_or("1"))?;
    let side: Side = args.side.as_deref().unwrap_or("bob").parse().map_err(anyhow::Error::msg)?;
    let modulation = Modulation::new(kind, ns)?;
    let channel = ChannelParams::new(eta, side)?;
    let space = match (&args.patterns, &args.ktpf) {
        (Some(p), None) => ImageSpace::new(
            p.split(',').map(|s| s.trim().parse::<Pattern>()).collect::<std::result::Result<_, _>>()?,
            modulation,
        )?,
        (None, Some(k)) => {
            let (m, k) = k.split_once(':').context("--ktpf expects m:k")?;
            enumerate_ktpf(m.trim().parse()?, k.trim().parse()?, modulation)?
        }
        _ => bail!("give exactly one of --patterns or --ktpf"),
    };
    let spectrum = gram(&space, &channel)?;
    let rows = |m: &qpattern::DMatrix<f64>| m.row_iter().map(|r| r.iter().copied().collect()).collect();
    let report = Inspection {
        patterns: space.patterns().to_vec(),
        modulation,
        eta,
        side,
        gram: rows(spectrum.gram()),
        eigenvalues: spectrum.eigenvalues().iter().copied().collect(),
        pgm_conditional: rows(&pgm_conditional(&spectrum)),
        p_err: pgm_error_from_spectrum(&spectrum),
        chi: holevo(&space, &qpattern::Priors::uniform(space.len())?, &channel)?,
    };
    let summary = format!("ensemble: {} states, p_err = {:.6}, chi = {:.6} bits", space.len(), report.p_err, report.chi);
    Ok(Artifact { body: json_body(&report)?, output: args.output, summary })
}

/// Applies the config file, sets up the thread pool and runs the subcommand.
pub fn run(cli: Cli) -> Result<Artifact> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    if let Some(n) = cli.threads.or(file.threads) {
        ensure!(n >= 1, "--threads must be at least 1");
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring thread pool")?;
    }
    match cli.command {
        Command::Ltpf(mut a) => {
            let f = file.ltpf;
            fill_from!(a, f; scheme, ns, eta, attack, modulation, output, format);
            run_ltpf(a)
        }
        Command::Mnist(mut a) => {
            let f = file.mnist;
            fill_from!(a, f; data_dir, train_images, train_labels, test_images, test_labels, ns, eta,
                eve_train_size, reps, seed, classifier, threshold, modulation, output, format);
            run_mnist(a)
        }
        Command::Degeneracy(mut a) => {
            let f = file.degeneracy;
            fill_from!(a, f; m, output, format);
            run_degeneracy(a)
        }
        Command::Ensemble(EnsembleCommand::Inspect(mut a)) => {
            let f = file.ensemble;
            fill_from!(a, f; patterns, ktpf, ns, eta, side, modulation, output);
            run_inspect(a)
        }
    }
}

/// Writes the artifact to its output file, or stdout when none is set.
pub fn emit(artifact: &Artifact) -> Result<()> {
    match &artifact.output {
        Some(path) => fs::write(path, &artifact.body).with_context(|| format!("writing {}", path.display())),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(artifact.body.as_bytes())?;
            Ok(())
        }
    }
}
