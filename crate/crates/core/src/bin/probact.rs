//! `probact`: validate, bind, project, query and export probabilistic action
//! models.
//!
//! Exit status is 0 on success, 1 when the models are well-formed but the
//! request fails (invalid model, inconsistent state, incompatible action,
//! impossible evidence) and 2 when input cannot be read or parsed.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use probact::action::{check_consistency, DEFAULT_CONSISTENCY_TOL};
use probact::inference::{enumerate_marginal, forward_sample_indices};
use probact::io::{export_dot, parse_model, serialize_dist, serialize_model, DotOptions, Model};
use probact::projection::{project_original_with, project_sequence_with, ProjectionOptions, ProjectionResult};
use probact::{bind, d_separated, extract_successor, marginal, Assignment, BeliefNetwork, Error};

#[derive(Parser)]
#[command(name = "probact", version, about = "Probabilistic action models over belief networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a model document of any kind.
    Validate { path: PathBuf },
    /// Bind a prior network over the free nodes of a CBN or environment model.
    Bind {
        cbn: PathBuf,
        prior: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Project a state through a sequence of actions.
    ///
    /// The combined network goes to --out (or stdout). With --extract the
    /// succeeding state is printed to stdout instead, so pass --out to keep
    /// both.
    Project {
        state: PathBuf,
        actions: Vec<PathBuf>,
        /// Environment model; required unless --original.
        #[arg(long)]
        env: Option<PathBuf>,
        /// Take indirect effects from the state network (single action only).
        #[arg(long, conflicts_with = "modified")]
        original: bool,
        /// Take indirect effects from the environment model (default).
        #[arg(long)]
        modified: bool,
        #[arg(long)]
        extract: bool,
        /// Accept actions with effects bound in the environment model; the
        /// action's tables take priority.
        #[arg(long)]
        allow_incompatible: bool,
        /// Copy persisted distinctions into every slice as identity tables.
        #[arg(long)]
        materialize_persisted: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a conditional distribution.
    Query {
        model: PathBuf,
        /// Target node(s); repeat or separate with commas.
        #[arg(long = "target", short = 't', value_delimiter = ',', required = true)]
        targets: Vec<String>,
        /// Evidence as name=value; repeat or separate with commas.
        #[arg(long = "given", short = 'g', value_delimiter = ',')]
        given: Vec<String>,
        /// Print a canonical JSON document instead of a table.
        #[arg(long)]
        json: bool,
        /// Use brute-force enumeration instead of variable elimination.
        #[arg(long)]
        enumerate: bool,
    },
    /// Check a state against an environment model's conditionals.
    Check {
        state: PathBuf,
        env: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CONSISTENCY_TOL)]
        tol: f64,
    },
    /// Test whether X and Y are d-separated given Z (comma-separated sets).
    Dsep {
        model: PathBuf,
        x: String,
        y: String,
        #[arg(default_value = "")]
        z: String,
    },
    /// Draw forward samples as CSV (one column per node, in name order).
    Sample {
        model: PathBuf,
        #[arg(short = 'n', long, default_value_t = 1000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export a model as a DOT graph.
    Dot {
        model: PathBuf,
        /// Draw the action-name node (actions only).
        #[arg(long)]
        action_node: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Unreadable input or malformed arguments.
#[derive(Debug)]
struct InputError(String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

/// The request was understood and answered in the negative.
#[derive(Debug)]
struct Refused(String);

impl fmt::Display for Refused {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Refused {}

fn input_error(msg: impl Into<String>) -> anyhow::Error {
    InputError(msg.into()).into()
}

fn library_exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::UnknownKind(_) | Error::WrongKind { .. } | Error::UnknownFixture(_) => 2,
        Error::SequenceStep { source, .. } => library_exit_code(source),
        _ => 1,
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<InputError>() || cause.is::<std::io::Error>() || cause.is::<csv::Error>() {
            return 2;
        }
        if cause.is::<Refused>() {
            return 1;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return library_exit_code(e);
        }
    }
    1
}

fn read_model(path: &Path) -> Result<Model> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_model(&text).with_context(|| format!("in {}", path.display()))
}

fn read_network(path: &Path) -> Result<BeliefNetwork> {
    read_model(path)?
        .into_network()
        .with_context(|| format!("in {}", path.display()))
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn name_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|n| !n.is_empty())
        .map(str::to_string)
        .collect()
}

fn parse_evidence(pairs: &[String]) -> Result<Assignment> {
    let mut evidence = Assignment::new();
    for pair in pairs {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| input_error(format!("evidence `{pair}` is not name=value")))?;
        evidence.set(k.trim(), v.trim());
    }
    Ok(evidence)
}

fn describe_steps(pr: &ProjectionResult) {
    for (i, s) in pr.steps().iter().enumerate() {
        eprintln!(
            "step {i} {}: direct {:?} indirect {:?} persisted {:?}",
            s.action, s.direct_effects, s.indirect_effects, s.persisted
        );
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Validate { path } => {
            let model = read_model(&path);
            match model {
                Ok(model) => {
                    let report = match &model {
                        Model::Network(bn) => bn.validate(),
                        Model::Cbn(c) => probact::validate_cbn(c),
                        Model::Environment(v) => probact::validate_cbn(v.cbn()),
                        Model::Action(a) => probact::validate_cbn(a.cbn()),
                    };
                    print!("{report}");
                    println!("valid {}", model.kind());
                    Ok(())
                }
                Err(e) => {
                    if let Some(Error::Invalid(report)) = e.downcast_ref::<Error>() {
                        print!("{report}");
                    }
                    Err(e)
                }
            }
        }
        Command::Bind { cbn, prior, out } => {
            let cbn = match read_model(&cbn)? {
                Model::Cbn(c) => c,
                Model::Environment(v) => v.cbn().clone(),
                other => {
                    return Err(input_error(format!(
                        "expected a cbn or environment document, found {}",
                        other.kind()
                    )))
                }
            };
            let prior = read_network(&prior)?;
            let bn = bind(&cbn, &prior)?;
            emit(&serialize_model(&Model::Network(bn)), out.as_deref())
        }
        Command::Project {
            state,
            actions,
            env,
            original,
            modified: _,
            extract,
            allow_incompatible,
            materialize_persisted,
            out,
        } => {
            let state = read_network(&state)?;
            let actions = actions
                .iter()
                .map(|p| {
                    read_model(p)?
                        .into_action()
                        .with_context(|| format!("in {}", p.display()))
                })
                .collect::<Result<Vec<_>>>()?;
            let opts = ProjectionOptions {
                allow_incompatible,
                materialize_persisted,
            };
            if actions.is_empty() {
                let text = serialize_model(&Model::Network(state));
                if extract {
                    if let Some(path) = out.as_deref() {
                        emit(&text, Some(path))?;
                    }
                    return emit(&text, None);
                }
                return emit(&text, out.as_deref());
            }
            let pr = if original {
                if actions.len() != 1 {
                    return Err(input_error("--original projects exactly one action"));
                }
                project_original_with(&state, &actions[0], opts)?
            } else {
                let env_path = env.ok_or_else(|| input_error("--env is required unless --original"))?;
                let env = read_model(&env_path)?
                    .into_environment()
                    .with_context(|| format!("in {}", env_path.display()))?;
                project_sequence_with(&state, &actions, &env, opts)?
            };
            describe_steps(&pr);
            let combined = serialize_model(&Model::Network(pr.combined().clone()));
            if extract {
                if let Some(path) = out.as_deref() {
                    emit(&combined, Some(path))?;
                }
                let successor = extract_successor(&pr)?;
                emit(&serialize_model(&Model::Network(successor)), None)
            } else {
                emit(&combined, out.as_deref())
            }
        }
        Command::Query {
            model,
            targets,
            given,
            json,
            enumerate,
        } => {
            let bn = read_network(&model)?;
            let evidence = parse_evidence(&given)?;
            let dist = if enumerate {
                enumerate_marginal(&bn, &targets, &evidence)?
            } else {
                marginal(&bn, &targets, &evidence)?
            };
            if json {
                print!("{}", serialize_dist(&dist, &evidence));
            } else {
                print!("{dist}");
            }
            Ok(())
        }
        Command::Check { state, env, tol } => {
            let w = read_network(&state)?;
            let v = read_model(&env)?
                .into_environment()
                .with_context(|| format!("in {}", env.display()))?;
            let report = check_consistency(&w, &v, tol)?;
            print!("{report}");
            if report.consistent {
                Ok(())
            } else {
                Err(Refused("state is inconsistent with the environment model".into()).into())
            }
        }
        Command::Dsep { model, x, y, z } => {
            let bn = match read_model(&model)? {
                Model::Network(bn) => bn,
                Model::Cbn(c) => c.structure(),
                Model::Environment(v) => v.cbn().structure(),
                Model::Action(a) => a.cbn().structure(),
            };
            let separated = d_separated(&bn, &name_list(&x), &name_list(&y), &name_list(&z))?;
            println!("{}", if separated { "d-separated" } else { "d-connected" });
            Ok(())
        }
        Command::Sample {
            model,
            count,
            seed,
            out,
        } => {
            let bn = read_network(&model)?;
            let rows = forward_sample_indices(&bn, count, seed)?;
            let distinctions: Vec<_> = bn.distinctions().collect();
            let mut writer = csv::Writer::from_writer(Vec::new());
            writer.write_record(distinctions.iter().map(|d| d.name.as_str()))?;
            for row in rows {
                writer.write_record(row.iter().zip(&distinctions).map(|(&v, d)| d.domain[v].as_str()))?;
            }
            let bytes = writer.into_inner().map_err(|e| e.into_error())?;
            emit(&String::from_utf8(bytes)?, out.as_deref())
        }
        Command::Dot {
            model,
            action_node,
            out,
        } => {
            let model = read_model(&model)?;
            let opts = DotOptions {
                action_node: action_node.then_some(true),
                name: None,
            };
            emit(&export_dot(&model, &opts), out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
