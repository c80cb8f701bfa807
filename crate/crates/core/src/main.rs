//! Thin command-line driver over the library.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use dynembed::experiments::{
    dimension_sweep, kmeans_time_clusters, run_experiment, temporal_dissimilarity, EmbeddingMethod, ExperimentSpec,
    Level, TestKind,
};
use dynembed::generators::{build_preset, PresetName, SystemPreset};
use dynembed::io::{
    load_edge_list, parse_nodes, read_embedding, write_edge_list, write_embedding, write_json, write_labels, Delimiter,
    EmbeddingFormat,
};
use dynembed::skipgram::SkipGramConfig;
use dynembed::spectral::SpectralMethod;
use dynembed::stability::{spatial_test, temporal_test, SpatialTestSpec, TemporalTestSpec};
use dynembed::{Error, Result};

#[derive(Parser)]
#[command(name = "dynembed", version, about = "Stable dynamic network embeddings and stability tests")]
struct Cli {
    /// Worker threads; defaults to DYNEMBED_THREADS, then to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a preset system and write it as a temporal edge list.
    Generate(GenerateArgs),
    /// Embed a temporal edge list.
    Embed(EmbedArgs),
    /// Run a paired displacement test on an embedding file.
    #[command(subcommand)]
    Test(TestCommand),
    /// Replicated p-value study on a preset system.
    Experiment(ExperimentArgs),
    /// Cluster time points by their temporal dissimilarity.
    Cluster(ClusterArgs),
}

#[derive(Args)]
struct PresetArgs {
    #[arg(long)]
    preset: PresetName,
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    t: usize,
    /// Within-community probabilities for k-community, comma separated.
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    weight_seed: u64,
}

impl PresetArgs {
    fn preset(&self) -> SystemPreset {
        let mut preset = SystemPreset::new(self.preset, self.n, self.t);
        if let Some(p) = &self.p {
            preset = preset.with_p(p.clone());
        }
        preset.weight_seed = self.weight_seed;
        preset
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    system: PresetArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MethodArgs {
    /// uase, urlse, ise, ise-procrustes, omni, unfolded-node2vec or independent-node2vec.
    #[arg(long)]
    method: String,
    /// Embedding dimension; experiments default to the preset's noise-free rank.
    #[arg(long)]
    d: Option<usize>,
    /// URLSE regulariser: `auto` (average dilated degree) or a value ≥ 0.
    #[arg(long, default_value = "auto")]
    gamma: String,
    #[arg(long)]
    walks_per_node: Option<usize>,
    #[arg(long)]
    walk_length: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    negatives: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
}

impl MethodArgs {
    fn method(&self, default_d: usize) -> Result<EmbeddingMethod> {
        let d = self.d.unwrap_or(default_d);
        if d == 0 {
            return Err(Error::InvalidArgument("--d must be ≥ 1".into()));
        }
        let gamma = match self.gamma.as_str() {
            "auto" => None,
            g => Some(g.parse().map_err(|_| Error::InvalidArgument(format!("bad --gamma '{g}'")))?),
        };
        let method = match self.method.parse::<EmbeddingMethod>()?.with_d(d) {
            EmbeddingMethod::Spectral(m) => EmbeddingMethod::Spectral(SpectralMethod { gamma, ..m }),
            EmbeddingMethod::UnfoldedNode2vec(c) => EmbeddingMethod::UnfoldedNode2vec(self.skipgram(c)),
            EmbeddingMethod::IndependentNode2vec(c) => EmbeddingMethod::IndependentNode2vec(self.skipgram(c)),
        };
        if let EmbeddingMethod::UnfoldedNode2vec(c) | EmbeddingMethod::IndependentNode2vec(c) = &method {
            c.validate()?;
        }
        Ok(method)
    }

    fn skipgram(&self, c: SkipGramConfig) -> SkipGramConfig {
        SkipGramConfig {
            walks_per_node: self.walks_per_node.unwrap_or(c.walks_per_node),
            walk_length: self.walk_length.unwrap_or(c.walk_length),
            window: self.window.unwrap_or(c.window),
            negatives: self.negatives.unwrap_or(c.negatives),
            epochs: self.epochs.unwrap_or(c.epochs),
            ..c
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DelimiterArg {
    Auto,
    Whitespace,
    Comma,
}

impl From<DelimiterArg> for Delimiter {
    fn from(d: DelimiterArg) -> Self {
        match d {
            DelimiterArg::Auto => Delimiter::Auto,
            DelimiterArg::Whitespace => Delimiter::Whitespace,
            DelimiterArg::Comma => Delimiter::Comma,
        }
    }
}

#[derive(Args)]
struct EmbedArgs {
    #[command(flatten)]
    method: MethodArgs,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    delimiter: DelimiterArg,
    /// Output format; inferred from the extension when omitted.
    #[arg(long)]
    format: Option<EmbeddingFormat>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum TestCommand {
    /// Compare one node set before and after a change point.
    Temporal(TemporalArgs),
    /// Compare two node sets at the same time points.
    Spatial(SpatialArgs),
}

#[derive(Args)]
struct TemporalArgs {
    /// `all`, or indices and inclusive ranges such as `0..99,150`.
    #[arg(long)]
    nodes: String,
    #[arg(long)]
    tc: usize,
    #[arg(long)]
    r1: usize,
    #[arg(long)]
    r2: usize,
    #[arg(long, default_value_t = 1000)]
    nsim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "in")]
    input: PathBuf,
}

#[derive(Args)]
struct SpatialArgs {
    #[arg(long)]
    nodes1: String,
    #[arg(long)]
    nodes2: String,
    /// Time points, same syntax as node lists.
    #[arg(long)]
    times: String,
    #[arg(long, default_value_t = 1000)]
    nsim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "in")]
    input: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum TestArg {
    Temporal,
    Spatial,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    system: PresetArgs,
    #[command(flatten)]
    method: MethodArgs,
    #[arg(long, value_enum, default_value = "temporal")]
    test: TestArg,
    /// `graph`, `community[:c]` or `node[:i]`.
    #[arg(long, default_value = "graph")]
    level: Level,
    #[arg(long, default_value_t = 200)]
    replicates: usize,
    #[arg(long, default_value_t = 1000)]
    nsim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sweep these dimensions instead of a single `--d`.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ClusterArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "all")]
    nodes: String,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn configure_threads(flag: Option<usize>) -> Result<()> {
    let env = std::env::var("DYNEMBED_THREADS").ok();
    let threads = match (flag, env) {
        (Some(t), _) => Some(t),
        (None, Some(v)) => {
            Some(v.parse().map_err(|_| Error::InvalidArgument(format!("bad DYNEMBED_THREADS '{v}'")))?)
        }
        (None, None) => None,
    };
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    configure_threads(cli.threads)?;
    match cli.command {
        Command::Generate(a) => {
            let network = build_preset(&a.system.preset())?.sample(a.seed)?;
            write_edge_list(&network, &a.out)?;
            log::info!("wrote n={} T={} edges={}", network.n(), network.t(), network.edge_count());
        }
        Command::Embed(a) => {
            let network = load_edge_list(&a.input, a.delimiter.into())?;
            let method = a.method.method(2)?;
            let emb = method.embed(&network, a.seed)?;
            write_embedding(&emb, &a.out, a.format.unwrap_or_else(|| EmbeddingFormat::from_path(&a.out)))?;
        }
        Command::Test(TestCommand::Temporal(a)) => {
            let emb = read_embedding(&a.input)?;
            let spec = TemporalTestSpec {
                nodes: parse_nodes(&a.nodes, emb.n())?,
                tc: a.tc,
                r1: a.r1,
                r2: a.r2,
                n_sim: a.nsim,
            };
            let r = temporal_test(&emb, &spec, a.seed)?;
            println!("{}", json!({ "t_obs": r.t_obs, "p_hat": r.p_hat }));
        }
        Command::Test(TestCommand::Spatial(a)) => {
            let emb = read_embedding(&a.input)?;
            let spec = SpatialTestSpec {
                nodes1: parse_nodes(&a.nodes1, emb.n())?,
                nodes2: parse_nodes(&a.nodes2, emb.n())?,
                times: parse_nodes(&a.times, emb.t())?,
                n_sim: a.nsim,
            };
            let r = spatial_test(&emb, &spec, a.seed)?;
            println!("{}", json!({ "t_obs": r.t_obs, "p_hat": r.p_hat }));
        }
        Command::Experiment(a) => {
            let preset = a.system.preset();
            let method = a.method.method(preset.noise_free_rank())?;
            let test = match a.test {
                TestArg::Temporal => TestKind::Temporal,
                TestArg::Spatial => TestKind::Spatial,
            };
            let spec = ExperimentSpec {
                replicates: a.replicates,
                n_sim: a.nsim,
                master_seed: a.seed,
                ..ExperimentSpec::new(preset, method, test, a.level)
            };
            match a.dims {
                Some(dims) => {
                    let reports = dimension_sweep(&spec, &dims)?;
                    for r in &reports {
                        println!("{}", json!({ "d": r.d, "decision": r.ks_decision, "power_at_5pct": r.power_at_5pct }));
                    }
                    write_json(&reports, &a.out)?;
                }
                None => {
                    let r = run_experiment(&spec)?;
                    println!("{}", json!({ "decision": r.ks_decision, "ks_statistic": r.ks_statistic, "power_at_5pct": r.power_at_5pct }));
                    write_json(&r, &a.out)?;
                }
            }
        }
        Command::Cluster(a) => {
            let emb = read_embedding(&a.input)?;
            let nodes = parse_nodes(&a.nodes, emb.n())?;
            let r = temporal_dissimilarity(&emb, &nodes)?;
            let labels = kmeans_time_clusters(&r, a.k, a.seed)?;
            write_labels(&labels, &a.out)?;
        }
    }
    Ok(())
}

fn fail(kind: &str, message: &str, code: u8) -> ExitCode {
    eprintln!("{}", json!({ "error": { "kind": kind, "message": message } }));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("usage", e.to_string().trim(), 2),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e.kind(), &e.to_string(), 1),
    }
}
