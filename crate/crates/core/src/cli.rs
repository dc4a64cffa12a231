//! The `usersim` command line.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::corpus::{ingest, synth, Ontology, RestaurantDb};
use crate::dialog_system::{mask, RulePolicy, SystemPolicy};
use crate::domain::{goal_satisfied, DialogState, Goal, Outcome, SystemAct, SystemActKind, UserActKind, MAX_TURNS};
use crate::error::{Error, Result};
use crate::eval::{curve_svg, hist_svg, CrossConfig, CrossFile, MetricsConfig};
use crate::lab::{load_policies, policy_path, Lab};
use crate::rl::{RlAgent, SavedPolicy, TrainConfig};
use crate::service::{self, Service, ServiceConfig, Store};
use crate::simulator::SimKind;
use crate::seeded;

#[derive(Debug, Parser)]
#[command(name = "usersim", version, about = "Dialog user simulators, RL systems and their evaluation")]
pub struct Cli {
    /// Corpus directory written by `corpus ingest`; the built-in synthetic corpus otherwise.
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,

    /// Probability that the system's understanding of a user message is replaced by a random act.
    #[arg(long, global = true, default_value_t = 0.0)]
    pub nlu_noise: f64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build corpus artifacts.
    #[command(subcommand)]
    Corpus(CorpusCommand),
    /// Train a system against one or more simulators.
    Train(TrainArgs),
    /// Automatic metrics and the cross study.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Serve the chat and survey API.
    Serve(ServeArgs),
    /// Talk to a system as the user, or to a simulated user as the system.
    Chat(ChatArgs),
}

#[derive(Debug, Subcommand)]
pub enum CorpusCommand {
    /// Annotate a raw corpus file and build the goal database.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write a synthetic raw corpus in the native JSON shape.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        dialogs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Simulator kinds, comma separated, or `all`.
    #[arg(long, value_parser = parse_kinds)]
    pub sim: Kinds,
    #[arg(long, default_value_t = TrainConfig::default().episodes)]
    pub episodes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Each system goes to `<out>/<sim>/`.
    #[arg(long)]
    pub out: PathBuf,
    /// Also draw `curve.svg`.
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// Perplexity, vocabulary, utterance length and act distribution per simulator.
    Metrics {
        #[arg(long, value_parser = parse_kinds, default_value = "all")]
        sim: Kinds,
        #[arg(long, default_value_t = MetricsConfig::default().dialogs)]
        dialogs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Also draw `hist.svg`.
        #[arg(long)]
        plot: bool,
    },
    /// Every loaded system against every simulator.
    Cross {
        #[arg(long)]
        policies: PathBuf,
        /// Systems to evaluate, named by the simulator each was trained against.
        #[arg(long, value_parser = parse_kinds, default_value = "all")]
        systems: Kinds,
        #[arg(long, default_value_t = CrossConfig::default().episodes)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Also draw the training curves found next to the policies as `curve.svg`.
        #[arg(long)]
        plot: bool,
    },
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Directory of trained systems; only the rule system is offered without it.
    #[arg(long)]
    pub policies: Option<PathBuf>,
    /// Where transcripts and surveys are kept.
    #[arg(long, default_value = "sessions")]
    pub data: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("side").required(true)))]
pub struct ChatArgs {
    /// Play the system against this simulated user, picking acts by name.
    #[arg(long, group = "side")]
    pub sim: Option<SimKind>,
    /// Play the user against `rule` or a `policy.json`.
    #[arg(long, group = "side")]
    pub policy: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Kinds(pub Vec<SimKind>);

fn parse_kinds(s: &str) -> Result<Kinds, String> {
    if s == "all" {
        return Ok(Kinds(SimKind::ALL.to_vec()));
    }
    s.split(',')
        .map(|k| k.trim().parse::<SimKind>().map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()
        .map(Kinds)
}

pub fn run(cli: Cli) -> Result<()> {
    let lab = || -> Result<Lab> { Ok(Lab::open(cli.corpus.as_deref())?.with_nlu_noise(cli.nlu_noise)) };
    match cli.command {
        Command::Corpus(CorpusCommand::Ingest { input, out, seed }) => {
            let summary = ingest(&input, &out, seed)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        Command::Corpus(CorpusCommand::Synth { out, dialogs, seed }) => {
            let mut config = synth::SynthConfig::default();
            if let Some(n) = dialogs {
                config.restaurant_dialogs = n;
            }
            if let Some(s) = seed {
                config.seed = s;
            }
            synth::write_corpus(&out, &RestaurantDb::bundled(), &Ontology::bundled(), &config)?;
            println!("wrote {}", out.join("data.json").display());
        }
        Command::Train(args) => train(&lab()?, &args)?,
        Command::Eval(EvalCommand::Metrics {
            sim,
            dialogs,
            seed,
            out,
            plot,
        }) => {
            let config = MetricsConfig {
                dialogs,
                seed,
                ..Default::default()
            };
            let file = lab()?.metrics(&sim.0, &config)?;
            file.write(&out)?;
            if plot {
                let hists: Vec<_> = file.reports.iter().map(|r| (r.simulator.to_string(), r.act_hist.clone())).collect();
                fs::write(out.join("hist.svg"), hist_svg(&hists))?;
            }
            for r in &file.reports {
                println!(
                    "{:<6} ppl {:>8.2}  vocab {:>4}  len {:>5.2}  success {:.3}",
                    r.simulator, r.ppl, r.vocab, r.avg_utt_len, r.success
                );
            }
        }
        Command::Eval(EvalCommand::Cross {
            policies,
            systems,
            episodes,
            seed,
            out,
            plot,
        }) => {
            let saved = load_policies(&policies)?;
            let agents: BTreeMap<SimKind, RlAgent> = saved.iter().map(|(k, p)| (*k, p.agent.clone())).collect();
            let config = CrossConfig {
                systems: systems.0,
                episodes,
                seed,
                ..Default::default()
            };
            let matrix = lab()?.cross(&agents, &config)?;
            CrossFile::new(matrix.clone()).write(&out)?;
            if plot {
                let runs = config
                    .systems
                    .iter()
                    .map(|k| Ok((k.to_string(), read_curve(&policy_path(&policies, *k).with_file_name("curve.csv"))?)))
                    .collect::<Result<Vec<_>>>()?;
                fs::write(out.join("curve.svg"), curve_svg(&runs))?;
            }
            let mut stdout = std::io::stdout();
            matrix.write_csv(&mut stdout)?;
        }
        Command::Serve(args) => serve(lab()?, &args)?,
        Command::Chat(args) => {
            let lab = lab()?;
            let stdin = std::io::stdin();
            let mut input = stdin.lock();
            let mut output = std::io::stdout();
            match (args.sim, args.policy) {
                (Some(kind), _) => chat_as_system(&lab, kind, args.seed, &mut input, &mut output)?,
                (None, Some(policy)) => {
                    let policy = load_system(&policy)?;
                    chat_as_user(&lab, policy.as_ref(), args.seed, &mut input, &mut output)?
                }
                (None, None) => unreachable!("clap requires one of --sim and --policy"),
            }
        }
    }
    Ok(())
}

fn train(lab: &Lab, args: &TrainArgs) -> Result<()> {
    for kind in &args.sim.0 {
        let config = TrainConfig {
            episodes: args.episodes,
            seed: args.seed,
            ..Default::default()
        };
        log::info!("training against {kind} for up to {} episodes", config.episodes);
        let outcome = lab.train(*kind, &config)?;
        let dir = policy_path(&args.out, *kind).with_file_name("");
        outcome.write(&dir)?;
        if args.plot {
            fs::write(dir.join("curve.svg"), curve_svg(&[(kind.to_string(), outcome.curve.clone())]))?;
        }
        println!(
            "{kind}: success {:.3} after {} episodes, 0.9 reached at checkpoint {}",
            outcome.final_success(),
            outcome.curve.last().map_or(0, |c| c.episode),
            outcome.checkpoints_to(0.9).map_or("-".to_string(), |c| c.to_string())
        );
    }
    Ok(())
}

fn read_curve(path: &Path) -> Result<Vec<crate::rl::Checkpoint>> {
    let mut reader = csv::Reader::from_path(path)?;
    Ok(reader.deserialize().collect::<Result<Vec<_>, _>>()?)
}

fn serve(lab: Lab, args: &ServeArgs) -> Result<()> {
    let policies = match &args.policies {
        Some(dir) => load_policies(dir)?,
        None => BTreeMap::new(),
    };
    let systems = service::systems_from(&policies);
    let config = ServiceConfig {
        seed: args.seed,
        ..Default::default()
    };
    let svc = Service::new(lab.core, lab.corpus.goals, systems, Store::open(&args.data)?, config)?;
    let addr: SocketAddr = format!("{}:{}", args.host, args.port)
        .parse()
        .map_err(|_| Error::Unknown {
            what: "address",
            value: format!("{}:{}", args.host, args.port),
        })?;
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(service::serve(Arc::new(svc), addr))?;
    Ok(())
}

/// `rule`, or the path of a saved policy.
pub fn load_system(spec: &str) -> Result<Box<dyn SystemPolicy>> {
    if spec == service::RULE_SYSTEM {
        return Ok(Box::new(RulePolicy));
    }
    Ok(Box::new(SavedPolicy::load(Path::new(spec))?.agent.frozen()))
}

/// A REPL where the person types user messages and `policy` answers.
pub fn chat_as_user<R: BufRead, W: Write>(
    lab: &Lab,
    policy: &dyn SystemPolicy,
    seed: u64,
    input: &mut R,
    out: &mut W,
) -> Result<()> {
    let mut rng = seeded(seed);
    let goal = crate::corpus::sample_goal(&lab.corpus.goals, &mut rng)?.clone();
    writeln!(out, "{}", goal.instructions())?;
    let mut state = DialogState::default();
    let mut line = String::new();
    while state.turn < MAX_TURNS {
        write!(out, "> ")?;
        out.flush()?;
        line.clear();
        if input.read_line(&mut line)? == 0 {
            break;
        }
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let (nlu, next) = lab.core.understand(&state, text, &mut rng);
        state = next;
        let kind = policy.choose(&state, text, &mask(&state), &mut rng);
        let (_, reply) = lab.core.respond(kind, &mut state, &goal.id)?;
        writeln!(out, "system: {reply}")?;
        if nlu.act.kind == UserActKind::Goodbye || kind == SystemActKind::Goodbye {
            break;
        }
    }
    writeln!(out, "outcome: {:?}", final_outcome(&goal, &state))?;
    Ok(())
}

/// A REPL where the person picks system acts and a simulated user answers.
pub fn chat_as_system<R: BufRead, W: Write>(
    lab: &Lab,
    kind: SimKind,
    seed: u64,
    input: &mut R,
    out: &mut W,
) -> Result<()> {
    let mut rng = seeded(seed);
    let goal = crate::corpus::sample_goal(&lab.corpus.goals, &mut rng)?.clone();
    let mut sim = lab.simulator(kind);
    sim.reset(&goal, &mut rng);
    writeln!(out, "goal: {}", goal.instructions())?;
    let acts: Vec<&str> = SystemActKind::ALL.iter().map(|k| k.as_str()).collect();
    writeln!(out, "system acts: {}", acts.join(", "))?;
    let mut state = DialogState::default();
    let mut last: Option<(SystemAct, String)> = None;
    let mut line = String::new();
    loop {
        let user = sim.respond(last.as_ref().map(|(a, t)| (a, t.as_str())), &mut rng)?;
        writeln!(out, "user: {}", user.utterance)?;
        let (_, next) = lab.core.understand(&state, &user.utterance, &mut rng);
        state = next;
        if user.done || state.turn >= MAX_TURNS {
            break;
        }
        let kind = loop {
            write!(out, "> ")?;
            out.flush()?;
            line.clear();
            if input.read_line(&mut line)? == 0 {
                writeln!(out, "outcome: {:?}", final_outcome(&goal, &state))?;
                return Ok(());
            }
            match line.trim().parse::<SystemActKind>() {
                Ok(k) if mask(&state).allows(k) => break k,
                Ok(k) => writeln!(out, "{k} is not allowed now")?,
                Err(e) => writeln!(out, "{e}")?,
            }
        };
        let (act, text) = lab.core.respond(kind, &mut state, &goal.id)?;
        writeln!(out, "system: {text}")?;
        last = Some((act, text));
    }
    writeln!(out, "outcome: {:?}", final_outcome(&goal, &state))?;
    Ok(())
}

fn final_outcome(goal: &Goal, state: &DialogState) -> Outcome {
    match goal_satisfied(goal, state) {
        Outcome::Ongoing => Outcome::Failure,
        o => o,
    }
}
