//! The `promodel` command line.
//!
//! Exit codes: 0 success, 2 usage error (bad flags, unreadable or
//! unparseable input), 3 generation failed, 4 the model is invalid or
//! unsound. Diagnostics go to stderr as JSON lines.

use std::ffi::OsString;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use promodel::conversion::{check_soundness, to_petri_net, DEFAULT_STATE_CAP};
use promodel::orchestrator::{Conversation, Orchestrator, Status};
use promodel::powl::{from_json, validate, PowlModel};
use promodel::prompting::TemplateStore;
use promodel::semantics::bounded_language;
use serde_json::json;

use crate::api::{self, AppState};
use crate::config::{Config, ProviderKind};
use crate::store::Store;
use crate::Format;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_GENERATION: u8 = 3;
pub const EXIT_INVALID: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "promodel", version, about = "Generate, check and convert POWL process models")]
pub struct Cli {
    /// TOML configuration file; `PROMODEL_*` variables override it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a model from a process description.
    Generate {
        #[command(flatten)]
        input: DescriptionInput,
        /// Output file; stdout when omitted.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "powl-json")]
        format: Format,
        #[command(flatten)]
        provider: ProviderArgs,
    },
    /// Generate a model, then refine it with one feedback line at a time
    /// from stdin until an empty line.
    Chat {
        #[command(flatten)]
        input: DescriptionInput,
        /// Conversation file, rewritten after every turn. An existing
        /// session is resumed.
        #[arg(long, value_name = "FILE")]
        session: Option<PathBuf>,
        #[command(flatten)]
        provider: ProviderArgs,
    },
    /// Convert a POWL JSON model to PNML or BPMN.
    Convert {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
    },
    /// Check a POWL JSON model for structural violations.
    Validate {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
    },
    /// Check the workflow net of a POWL JSON model for soundness.
    Soundness {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
        state_cap: usize,
    },
    /// Print the traces of a POWL JSON model, one JSON array per line.
    Language {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long, default_value_t = 2)]
        max_loop: usize,
        #[arg(long, default_value_t = 10)]
        max_len: usize,
    },
    /// Run the REST service.
    Serve {
        /// Overrides `listen.address`.
        #[arg(long, value_name = "ADDR")]
        listen: Option<String>,
    },
}

/// Exactly one of a file (`-` for stdin) or literal text.
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct DescriptionInput {
    /// File holding the process description, or `-` for stdin.
    #[arg(long, value_name = "FILE")]
    pub description: Option<PathBuf>,
    /// The description itself.
    #[arg(value_name = "TEXT")]
    pub text: Option<String>,
}

#[derive(Debug, Args)]
pub struct ProviderArgs {
    #[arg(long, value_enum)]
    pub provider: Option<ProviderKind>,
    /// Recorded responses to replay; implies `--provider replay`.
    #[arg(long, value_name = "DIR")]
    pub replay_dir: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long, value_name = "N")]
    pub max_critical: Option<usize>,
    #[arg(long, value_name = "N")]
    pub max_adjustable: Option<usize>,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: Option<String>,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: Some(message.into()) }
    }

    fn code(code: u8) -> Self {
        Failure { code, message: None }
    }
}

type Outcome = Result<(), Failure>;

/// Entry point of the binary.
pub fn main(args: impl IntoIterator<Item = impl Into<OsString> + Clone>) -> ExitCode {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let stdin = io::stdin();
    ExitCode::from(run(cli, &mut stdin.lock(), &mut io::stdout(), &mut io::stderr()))
}

/// Runs a parsed command and returns its exit code.
pub fn run(cli: Cli, stdin: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    match dispatch(cli, stdin, out, err) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            if let Some(m) = f.message {
                let _ = writeln!(err, "{}", json!({ "error": m }));
            }
            f.code
        }
    }
}

fn dispatch(cli: Cli, stdin: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let config = || load_config(cli.config.as_deref());
    match cli.command {
        Command::Generate { input, out: path, format, provider } => {
            let description = read_description(&input, stdin)?;
            let orch = orchestrator(config()?, &provider)?;
            generate(&orch, &description, path.as_deref(), format, out, err)
        }
        Command::Chat { input, session, provider } => {
            if input.description.as_deref() == Some(Path::new("-")) {
                return Err(Failure::usage("chat reads feedback from stdin; pass the description as a file or text"));
            }
            let description = read_description(&input, stdin)?;
            let session = session
                .or_else(|| input.description.as_ref().map(|p| p.with_extension("session.json")))
                .unwrap_or_else(|| PathBuf::from("promodel-session.json"));
            let orch = orchestrator(config()?, &provider)?;
            chat(&orch, &description, &session, stdin, out, err)
        }
        Command::Convert { input, format } => {
            let model = read_model(&input)?;
            match format.render(&model) {
                Ok(doc) => write_stdout(out, &doc),
                Err(e) => {
                    let _ = writeln!(err, "{}", json!({ "error": e.to_string() }));
                    Err(Failure::code(EXIT_INVALID))
                }
            }
        }
        Command::Validate { input } => {
            let model = read_model(&input)?;
            let violations = validate(&model);
            let report = json!({ "valid": violations.is_empty(), "violations": violations });
            write_stdout(out, &report.to_string())?;
            if violations.is_empty() { Ok(()) } else { Err(Failure::code(EXIT_INVALID)) }
        }
        Command::Soundness { input, state_cap } => {
            let model = read_model(&input)?;
            let net = match to_petri_net(&model) {
                Ok(net) => net,
                Err(e) => {
                    write_stdout(out, &json!({ "sound": false, "error": e.to_string() }).to_string())?;
                    return Err(Failure::code(EXIT_INVALID));
                }
            };
            let report = check_soundness(&net, state_cap);
            write_stdout(out, &serde_json::to_string(&report).expect("reports serialize"))?;
            if report.sound { Ok(()) } else { Err(Failure::code(EXIT_INVALID)) }
        }
        Command::Language { input, max_loop, max_len } => {
            let model = read_model(&input)?;
            match bounded_language(&model, max_loop, max_len) {
                Ok(lang) => {
                    let mut text = String::new();
                    for trace in lang {
                        text.push_str(&serde_json::to_string(&trace.0).expect("traces serialize"));
                        text.push('\n');
                    }
                    out.write_all(text.as_bytes()).map_err(|e| Failure::usage(e.to_string()))
                }
                Err(e) => {
                    let _ = writeln!(err, "{}", json!({ "error": e.to_string() }));
                    Err(Failure::code(EXIT_INVALID))
                }
            }
        }
        Command::Serve { listen } => serve(config()?, listen),
    }
}

fn load_config(path: Option<&Path>) -> Result<Config, Failure> {
    let mut c = match path {
        Some(p) => Config::load(p).map_err(|e| Failure::usage(e.to_string()))?,
        None => Config::default(),
    };
    c.apply_env(|k| std::env::var(k).ok()).map_err(|e| Failure::usage(e.to_string()))?;
    Ok(c)
}

fn orchestrator(mut config: Config, args: &ProviderArgs) -> Result<Orchestrator, Failure> {
    if let Some(dir) = &args.replay_dir {
        config.provider.kind = ProviderKind::Replay;
        config.provider.replay_dir = Some(dir.clone());
    }
    if let Some(kind) = args.provider {
        config.provider.kind = kind;
    }
    if let Some(m) = &args.model {
        config.provider.model = m.clone();
    }
    if let Some(n) = args.max_critical {
        config.loop_.max_critical = n;
    }
    if let Some(n) = args.max_adjustable {
        config.loop_.max_adjustable = n;
    }
    build_orchestrator(&config).map_err(Failure::usage)
}

/// The orchestrator described by `config`, with the API key taken from the
/// process environment.
pub fn build_orchestrator(config: &Config) -> Result<Orchestrator, String> {
    let provider = config.provider(|k| std::env::var(k).ok()).map_err(|e| e.to_string())?;
    Ok(match &config.templates.dir {
        Some(dir) => {
            let templates = TemplateStore::from_dir(dir).map_err(|e| e.to_string())?;
            Orchestrator::with_templates(provider, Arc::new(templates), config.loop_config())
        }
        None => Orchestrator::new(provider, config.loop_config()),
    })
}

fn read_description(input: &DescriptionInput, stdin: &mut dyn BufRead) -> Result<String, Failure> {
    let text = match (&input.description, &input.text) {
        (Some(p), _) if p == Path::new("-") => {
            let mut s = String::new();
            stdin.read_to_string(&mut s).map_err(|e| Failure::usage(format!("stdin: {e}")))?;
            s
        }
        (Some(p), _) => std::fs::read_to_string(p).map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?,
        (None, Some(t)) => t.clone(),
        (None, None) => unreachable!("clap requires one input"),
    };
    if text.trim().is_empty() {
        return Err(Failure::usage("description is empty"));
    }
    Ok(text)
}

fn read_model(path: &Path) -> Result<PowlModel, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    from_json(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn write_stdout(out: &mut dyn Write, text: &str) -> Outcome {
    writeln!(out, "{text}").map_err(|e| Failure::usage(format!("stdout: {e}")))
}

fn report_turn(conv: &Conversation, err: &mut dyn Write) {
    if let Some(turn) = conv.last_turn() {
        for d in &turn.diagnostics {
            let _ = writeln!(err, "{}", serde_json::to_string(d).expect("diagnostics serialize"));
        }
    }
}

fn generate(
    orch: &Orchestrator,
    description: &str,
    path: Option<&Path>,
    format: Format,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Outcome {
    let conv = orch.generate(description).map_err(|e| Failure::usage(e.to_string()))?;
    report_turn(&conv, err);
    let Some(version) = conv.current().filter(|_| conv.status == Status::Succeeded) else {
        return Err(Failure { code: EXIT_GENERATION, message: Some(format!("generation {:?}", conv.status)) });
    };
    let doc = format
        .render(&version.model)
        .map_err(|e| Failure { code: EXIT_INVALID, message: Some(e.to_string()) })?;
    match path {
        Some(p) => std::fs::write(p, doc).map_err(|e| Failure::usage(format!("{}: {e}", p.display()))),
        None => write_stdout(out, &doc),
    }
}

fn summary(conv: &Conversation) -> String {
    let turn = conv.last_turn();
    json!({
        "id": conv.id,
        "status": conv.status,
        "turn_status": turn.map(|t| t.status),
        "failure": turn.and_then(|t| t.failure),
        "version": conv.versions.len(),
        "activities": conv.current().map(|v| v.model.activity_labels()),
        "model": conv.current().map(|v| v.model.describe()),
    })
    .to_string()
}

fn save(conv: &Conversation, session: &Path) -> Outcome {
    let text = serde_json::to_string_pretty(conv).expect("conversations serialize");
    std::fs::write(session, text).map_err(|e| Failure::usage(format!("{}: {e}", session.display())))
}

fn chat(
    orch: &Orchestrator,
    description: &str,
    session: &Path,
    stdin: &mut dyn BufRead,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Outcome {
    let resumed = std::fs::read_to_string(session)
        .ok()
        .and_then(|t| serde_json::from_str::<Conversation>(&t).ok())
        .filter(|c| c.status == Status::Succeeded);
    let mut conv = match resumed {
        Some(c) => c,
        None => {
            let c = orch.generate(description).map_err(|e| Failure::usage(e.to_string()))?;
            report_turn(&c, err);
            save(&c, session)?;
            c
        }
    };
    write_stdout(out, &summary(&conv))?;
    if conv.status != Status::Succeeded {
        return Err(Failure::code(EXIT_GENERATION));
    }
    out.flush().ok();
    let mut line = String::new();
    loop {
        line.clear();
        if stdin.read_line(&mut line).map_err(|e| Failure::usage(format!("stdin: {e}")))? == 0 {
            break;
        }
        let feedback = line.trim();
        if feedback.is_empty() {
            break;
        }
        orch.refine(&mut conv, feedback).map_err(|e| Failure::usage(e.to_string()))?;
        report_turn(&conv, err);
        save(&conv, session)?;
        write_stdout(out, &summary(&conv))?;
        out.flush().ok();
    }
    Ok(())
}

fn serve(config: Config, listen: Option<String>) -> Outcome {
    let _ = tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(io::stderr)
        .try_init();
    let orch = build_orchestrator(&config).map_err(Failure::usage)?;
    let store = match &config.store.path {
        Some(p) => Store::open(p).map_err(|e| Failure::usage(e.to_string()))?,
        None => Store::in_memory(),
    };
    let address = listen.unwrap_or(config.listen.address);
    let state = AppState { orchestrator: Arc::new(orch), store: Arc::new(store) };
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Failure::usage(e.to_string()))?;
    rt.block_on(api::serve(state, &address))
        .map_err(|e| Failure::usage(format!("{address}: {e}")))
}
