//! The `molhier` command line.
//!
//! Settings resolve in order: built-in defaults, `--config` file, `--set`
//! overrides, then dedicated flags. Exit status is 0 on success, 1 when an
//! input breaks its contract and 2 on numerical failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;

use crate::archive::Archive;
use crate::brics::fragment;
use crate::chem::{elements, parse_smiles, read_corpus, CorpusEntry, Molecule};
use crate::config::{RunConfig, StreamMode};
use crate::datagen::{augment_corpus, gen_motifhallu};
use crate::encoder::EncoderParams;
use crate::eval::{parse_gold, parse_predictions, score};
use crate::hier::{build_hier, EdgeKind, HierGraph, PE_DIM};
use crate::smarts::{detect_functional_groups, FunctionalGroupRegistry};
use crate::tokens::{hight_stream, node_centric_stream, serialize, Adapters, TokenError};
use crate::vq::{train, LossTerms, VqError};

#[derive(Debug, Parser)]
#[command(name = "molhier", version, about = "Hierarchical molecular graph tokenization toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Flat `key = value` configuration file [default: none]
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override one configuration key, repeatable [default: none]
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Random seed [default: 0]
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Worker threads, 0 for every core [default: 0]
    #[arg(long, value_name = "N")]
    pub jobs: Option<usize>,
    /// Functional-group registry file [default: built-in table]
    #[arg(long, value_name = "PATH")]
    pub registry: Option<PathBuf>,
    /// Output file; its effective config is written to `<PATH>.config` [default: standard output]
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse SMILES and print atoms and bonds as JSON Lines
    Parse {
        /// Corpus file, one SMILES per line
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Count functional groups per molecule
    DetectFg {
        /// Corpus file, one SMILES per line
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Print BRICS motifs as `smiles<TAB>k<TAB>atom lists`
    Fragment {
        /// Corpus file, one SMILES per line
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Build hierarchical graphs
    BuildHier {
        /// Corpus file, one SMILES per line
        input: PathBuf,
        /// Emit full node and edge lists as JSON Lines instead of counts [default: off]
        #[arg(long)]
        dump: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Emit token streams as JSON Lines
    Tokenize {
        /// Corpus file, one SMILES per line
        input: PathBuf,
        /// Stream layout, `node` or `hight` [default: hight]
        #[arg(long, value_name = "MODE")]
        mode: Option<StreamMode>,
        /// Encoder parameters or tokenizer checkpoint [default: seeded initialization]
        #[arg(long, value_name = "PATH")]
        checkpoint: Option<PathBuf>,
        /// Adapter archive [default: built from adapter_dim]
        #[arg(long, value_name = "PATH")]
        adapters: Option<PathBuf>,
        /// Width of seeded adapters, 0 for identity [default: 0]
        #[arg(long, value_name = "N")]
        adapter_dim: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Train the two-level VQ tokenizer; `--out` names the checkpoint
    TrainTokenizer {
        /// Corpus file, one SMILES per line
        input: PathBuf,
        /// Optimizer steps [default: 200]
        #[arg(long, value_name = "N")]
        steps: Option<usize>,
        /// Loss trace CSV [default: `<out>.loss.csv`]
        #[arg(long, value_name = "PATH")]
        trace: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Generate yes/no functional-group questions
    GenMotifhallu {
        /// Corpus file, one SMILES per line
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Prefix captions with functional-group sentences
    AugmentCaptions {
        /// Corpus file, `smiles<TAB>caption` per line
        input: PathBuf,
        /// Undetected groups named in the negative sentence [default: 4]
        #[arg(long, value_name = "N")]
        k_neg: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Score yes/no predictions against generated questions
    EvalHallu {
        /// Gold questions from gen-motifhallu
        #[arg(long, value_name = "PATH")]
        gold: PathBuf,
        /// Predictions, JSON Lines `{"id","answer","score"?}`
        #[arg(long, value_name = "PATH")]
        predictions: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Parse { common, .. }
            | Command::DetectFg { common, .. }
            | Command::Fragment { common, .. }
            | Command::BuildHier { common, .. }
            | Command::Tokenize { common, .. }
            | Command::TrainTokenizer { common, .. }
            | Command::GenMotifhallu { common, .. }
            | Command::AugmentCaptions { common, .. }
            | Command::EvalHallu { common, .. } => common,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Numeric(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Numeric(m) => m,
        }
    }
}

fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn token_err(e: TokenError) -> CliError {
    match e {
        TokenError::Spectral(s) => CliError::Numeric(s.to_string()),
        other => CliError::Input(other.to_string()),
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// exit status. Results go to `stdout` unless `--out` is given.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match execute(&cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message());
            e.exit_code()
        }
    }
}

/// Effective configuration after the config file, `--set` and flags.
pub fn resolve_config(command: &Command) -> Result<RunConfig, CliError> {
    let common = command.common();
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p).map_err(input_err)?,
        None => RunConfig::default(),
    };
    for s in &common.set {
        cfg.apply_override(s).map_err(input_err)?;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(j) = common.jobs {
        cfg.jobs = j;
    }
    if let Some(r) = &common.registry {
        cfg.registry = Some(r.clone());
    }
    if let Some(o) = &common.out {
        cfg.out = Some(o.clone());
    }
    match command {
        Command::Tokenize {
            mode,
            checkpoint,
            adapters,
            adapter_dim,
            ..
        } => {
            if let Some(m) = mode {
                cfg.mode = *m;
            }
            if let Some(c) = checkpoint {
                cfg.checkpoint = Some(c.clone());
            }
            if let Some(a) = adapters {
                cfg.adapters = Some(a.clone());
            }
            if let Some(d) = adapter_dim {
                cfg.adapter_dim = *d;
            }
        }
        Command::TrainTokenizer { steps: Some(s), .. } => cfg.train.steps = *s,
        Command::AugmentCaptions { k_neg: Some(k), .. } => cfg.k_neg = *k,
        _ => {}
    }
    Ok(cfg)
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Writes `text` to `--out` with its config sidecar, or hands it back for
/// standard output.
fn emit(cfg: &RunConfig, text: String) -> Result<String, CliError> {
    match &cfg.out {
        Some(p) => {
            write_file(p, text.as_bytes())?;
            write_file(&sidecar(p, ".config"), cfg.render().as_bytes())?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn load_registry(cfg: &RunConfig) -> Result<FunctionalGroupRegistry, CliError> {
    match &cfg.registry {
        Some(p) => FunctionalGroupRegistry::load(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => Ok(FunctionalGroupRegistry::builtin()),
    }
}

struct Corpus {
    name: String,
    entries: Vec<CorpusEntry>,
}

fn load_corpus(path: &Path) -> Result<Corpus, CliError> {
    Ok(Corpus {
        name: path.display().to_string(),
        entries: read_corpus(&read_text(path)?),
    })
}

impl Corpus {
    fn id(&self, e: &CorpusEntry) -> String {
        format!("{}:{}", self.name, e.line)
    }

    /// Parses every entry in parallel, keeping input order.
    fn molecules(&self) -> Result<Vec<Molecule>, CliError> {
        self.entries
            .par_iter()
            .map(|e| parse_smiles(&e.smiles).map_err(|err| CliError::Input(format!("{}: {err}", self.id(e)))))
            .collect()
    }
}

fn hier_of(mol: &Molecule) -> HierGraph {
    build_hier(mol, &fragment(mol)).expect("fragments cover the molecule")
}

fn lines<T, F>(items: &[T], f: F) -> Result<String, CliError>
where
    T: Sync,
    F: Fn(usize, &T) -> Result<String, CliError> + Sync,
{
    let parts: Vec<String> = items
        .par_iter()
        .enumerate()
        .map(|(i, t)| f(i, t))
        .collect::<Result<_, _>>()?;
    Ok(parts.concat())
}

fn jsonl<T: serde::Serialize>(items: &[T]) -> String {
    items
        .iter()
        .map(|i| serde_json::to_string(i).expect("serializable") + "\n")
        .collect()
}

fn execute(command: &Command, stdout: &mut dyn Write) -> Result<(), CliError> {
    let cfg = resolve_config(command)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(input_err)?;
    let text = pool.install(|| dispatch(command, &cfg))?;
    stdout.write_all(text.as_bytes()).map_err(input_err)
}

/// Runs one subcommand and returns what belongs on standard output.
fn dispatch(command: &Command, cfg: &RunConfig) -> Result<String, CliError> {
    match command {
        Command::Parse { input, .. } => {
            let corpus = load_corpus(input)?;
            let mols = corpus.molecules()?;
            let text = lines(&mols, |i, m| Ok(parse_line(&corpus.id(&corpus.entries[i]), m)))?;
            emit(cfg, text)
        }
        Command::DetectFg { input, .. } => {
            let corpus = load_corpus(input)?;
            let registry = load_registry(cfg)?;
            let mols = corpus.molecules()?;
            let text = lines(&mols, |i, m| {
                let counts = detect_functional_groups(m, &registry);
                let groups: serde_json::Map<String, serde_json::Value> =
                    counts.iter().map(|(n, c)| (n.to_string(), json!(c))).collect();
                let e = &corpus.entries[i];
                Ok(json!({"id": corpus.id(e), "smiles": e.smiles, "groups": groups}).to_string() + "\n")
            })?;
            emit(cfg, text)
        }
        Command::Fragment { input, .. } => {
            let corpus = load_corpus(input)?;
            let mols = corpus.molecules()?;
            let text = lines(&mols, |i, m| {
                let motifs = fragment(m);
                let lists: Vec<String> = motifs
                    .iter()
                    .filter(|mo| !mo.is_graph_motif)
                    .map(|mo| mo.atoms.iter().map(usize::to_string).collect::<Vec<_>>().join(","))
                    .collect();
                Ok(format!("{}\t{}\t{}\n", corpus.entries[i].smiles, lists.len(), lists.join(";")))
            })?;
            emit(cfg, text)
        }
        Command::BuildHier { input, dump, .. } => {
            let corpus = load_corpus(input)?;
            let mols = corpus.molecules()?;
            let text = lines(&mols, |i, m| {
                let h = hier_of(m);
                let e = &corpus.entries[i];
                if *dump {
                    Ok(hier_json(&corpus.id(e), &h) + "\n")
                } else {
                    Ok(format!(
                        "{}\t{}\t{}\t{}\t{}\n",
                        e.smiles,
                        h.atom_count(),
                        h.motif_count(),
                        h.node_count(),
                        h.edges().len()
                    ))
                }
            })?;
            emit(cfg, text)
        }
        Command::Tokenize { input, .. } => {
            let corpus = load_corpus(input)?;
            let mols = corpus.molecules()?;
            let params = match &cfg.checkpoint {
                Some(p) => Archive::load(p)
                    .and_then(|a| EncoderParams::from_archive(&a))
                    .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
                None => EncoderParams::init(cfg.train.hidden, cfg.train.layers, cfg.seed),
            };
            let d_in = params.hidden() + PE_DIM;
            let adapters = match (&cfg.adapters, cfg.adapter_dim) {
                (Some(p), _) => Archive::load(p)
                    .and_then(|a| Adapters::from_archive(&a))
                    .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
                (None, 0) => Adapters::identity(d_in),
                (None, d) => Adapters::init(d_in, d, cfg.seed),
            };
            let text = lines(&mols, |i, m| {
                let stream = match cfg.mode {
                    StreamMode::Node => node_centric_stream(m, i, &params, &adapters.node),
                    StreamMode::Hight => hight_stream(&hier_of(m), i, &params, &adapters),
                }
                .map_err(token_err)?;
                if stream.tokens.iter().any(|t| t.v.iter().any(|x| !x.is_finite())) {
                    return Err(CliError::Numeric(format!("{}: non-finite token", corpus.id(&corpus.entries[i]))));
                }
                Ok(serialize(&stream))
            })?;
            emit(cfg, text)
        }
        Command::TrainTokenizer { input, trace, .. } => {
            let out = cfg
                .out
                .clone()
                .ok_or_else(|| CliError::Input("train-tokenizer needs --out for the checkpoint".into()))?;
            let trace_path = trace.clone().unwrap_or_else(|| sidecar(&out, ".loss.csv"));
            let corpus = load_corpus(input)?;
            let hiers: Vec<HierGraph> = corpus.molecules()?.iter().map(hier_of).collect();
            match train(&hiers, &cfg.train_config()) {
                Ok(outcome) => {
                    write_file(&trace_path, loss_csv(&outcome.trace).as_bytes())?;
                    outcome
                        .model
                        .to_archive()
                        .save(&out)
                        .map_err(|e| CliError::Input(format!("{}: {e}", out.display())))?;
                    write_file(&sidecar(&out, ".config"), cfg.render().as_bytes())?;
                    Ok(String::new())
                }
                Err(VqError::Diverged { step, trace }) => {
                    write_file(&trace_path, loss_csv(&trace).as_bytes())?;
                    Err(CliError::Numeric(format!("loss became non-finite at step {step}")))
                }
                Err(e) => Err(input_err(e)),
            }
        }
        Command::GenMotifhallu { input, .. } => {
            let corpus = load_corpus(input)?;
            let registry = load_registry(cfg)?;
            let items = gen_motifhallu(&corpus.name, &corpus.entries, &registry, cfg.seed).map_err(input_err)?;
            emit(cfg, jsonl(&items))
        }
        Command::AugmentCaptions { input, .. } => {
            let corpus = load_corpus(input)?;
            let registry = load_registry(cfg)?;
            let records =
                augment_corpus(&corpus.name, &corpus.entries, &registry, cfg.k_neg, cfg.seed).map_err(input_err)?;
            emit(cfg, jsonl(&records))
        }
        Command::EvalHallu { gold, predictions, .. } => {
            let g = parse_gold(&read_text(gold)?).map_err(|e| CliError::Input(format!("{}: {e}", gold.display())))?;
            let p = parse_predictions(&read_text(predictions)?)
                .map_err(|e| CliError::Input(format!("{}: {e}", predictions.display())))?;
            let report = score(&p, &g).map_err(input_err)?;
            let machine = serde_json::to_string(&report).expect("serializable");
            match &cfg.out {
                Some(path) => {
                    write_file(path, format!("{machine}\n").as_bytes())?;
                    write_file(&sidecar(path, ".config"), cfg.render().as_bytes())?;
                    Ok(format!("{report}\n"))
                }
                None => Ok(format!("{report}\n{machine}\n")),
            }
        }
    }
}

fn parse_line(id: &str, m: &Molecule) -> String {
    let atoms: Vec<_> = m
        .atoms()
        .iter()
        .map(|a| {
            json!({
                "element": elements::symbol(a.element).unwrap_or("*"),
                "charge": a.formal_charge,
                "aromatic": a.aromatic,
                "h": m.hydrogen_count(a.index),
                "ring": a.in_ring,
            })
        })
        .collect();
    let bonds: Vec<_> = m
        .bonds()
        .iter()
        .map(|b| json!({"a": b.a, "b": b.b, "order": b.order.as_str(), "ring": b.in_ring}))
        .collect();
    json!({"id": id, "smiles": m.source(), "atoms": atoms, "bonds": bonds}).to_string() + "\n"
}

fn hier_json(id: &str, h: &HierGraph) -> String {
    let nodes: Vec<_> = h
        .nodes()
        .iter()
        .map(|n| json!({"kind": n.kind.as_str(), "ref": n.reference}))
        .collect();
    let edges: Vec<_> = h
        .edges()
        .iter()
        .map(|e| {
            let kind = match e.kind {
                EdgeKind::Chemical => "chemical",
                EdgeKind::Super => "super",
            };
            json!({"a": e.a, "b": e.b, "kind": kind, "bond": e.bond})
        })
        .collect();
    json!({"id": id, "n": h.atom_count(), "k": h.motif_count(), "nodes": nodes, "edges": edges}).to_string()
}

pub fn loss_csv(trace: &[LossTerms]) -> String {
    let mut s = String::from("step,term1,term2,term3,total\n");
    for (i, t) in trace.iter().enumerate() {
        writeln!(s, "{},{},{},{},{}", i + 1, t.term1, t.term2, t.term3, t.total()).unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(args.iter().copied(), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn every_flag_documents_its_default() {
        let mut cmd = Cli::command();
        for sub in cmd.get_subcommands_mut() {
            let name = sub.get_name().to_string();
            for arg in sub.get_arguments() {
                if arg.is_positional() || arg.get_id() == "help" || arg.is_required_set() {
                    continue;
                }
                let help = arg.get_help().map(|h| h.to_string()).unwrap_or_default();
                assert!(help.contains("[default:"), "{name} --{} lacks a default: {help}", arg.get_id());
            }
        }
    }

    #[test]
    fn help_exits_zero() {
        for sub in ["parse", "tokenize", "eval-hallu", "train-tokenizer"] {
            let (code, out, _) = run_capture(&["molhier", sub, "--help"]);
            assert_eq!(code, 0);
            assert!(out.contains("--jobs"));
        }
    }

    #[test]
    fn bad_input_exits_one() {
        let (code, _, err) = run_capture(&["molhier", "parse", "/nonexistent/corpus.smi"]);
        assert_eq!(code, 1);
        assert!(err.contains("/nonexistent/corpus.smi"));
        let (code, _, _) = run_capture(&["molhier", "frobnicate"]);
        assert_eq!(code, 1);
    }

    #[test]
    fn flags_beat_overrides() {
        let cli = Cli::try_parse_from(["molhier", "tokenize", "x", "--set", "seed=4", "--set", "mode=node"]).unwrap();
        let cfg = resolve_config(&cli.command).unwrap();
        assert_eq!((cfg.seed, cfg.mode), (4, StreamMode::Node));
        let cli = Cli::try_parse_from(["molhier", "tokenize", "x", "--set", "seed=4", "--seed", "5"]).unwrap();
        assert_eq!(resolve_config(&cli.command).unwrap().seed, 5);
        let cli = Cli::try_parse_from(["molhier", "parse", "x", "--set", "colour=red"]).unwrap();
        assert!(resolve_config(&cli.command).is_err());
    }
}
