//! The generation loop: prompt, ask the LLM, extract and interpret the code,
//! validate, convert, check soundness. Failures go back to the LLM as error
//! prompts. Critical problems get `max_critical_attempts` repair rounds before
//! the turn fails; adjustable ones get `max_adjustable_attempts` rounds and are
//! then fixed mechanically.
//!
//! ```
//! use std::sync::Arc;
//! use promodel::orchestrator::{LoopConfig, Orchestrator, ScriptedProvider};
//!
//! let code = "```python\ngen = ModelGenerator()\nfinal_model = gen.activity('Ship order')\n```";
//! let orch = Orchestrator::new(Arc::new(ScriptedProvider::new([code])), LoopConfig::default());
//! let conv = orch.generate("Ship the order.").unwrap();
//! assert_eq!(conv.current().unwrap().model.activity_labels(), ["Ship order"]);
//! ```

mod provider;

use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc;
use std::sync::Arc;
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use uuid::Uuid;

use crate::conversion::{check_soundness, to_petri_net, DEFAULT_STATE_CAP};
use crate::dsl::{self, DslError, SecurityViolationKind};
use crate::powl::{validate, Node, PowlModel, ViolationKind};
use crate::prompting::{
    build_error_prompt, build_feedback_prompt, build_generation_prompt, merge_system_messages, ChatMessage,
    PromptError, PromptTemplate, TemplateStore,
};
use crate::semantics::{bounded_language_unchecked, Bounds};

pub use provider::{HttpChatProvider, LlmProvider, ProviderError, ProviderSettings, ReplayProvider, ScriptedProvider};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Category {
    Critical,
    Adjustable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stage {
    Provider,
    Extraction,
    Parse,
    Audit,
    Interpret,
    Validate,
    Convert,
}

/// What a diagnostic is about; [`classify`] maps it to a [`Category`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Source {
    ProviderFailure,
    NoCodeFound,
    Security(SecurityViolationKind),
    InterpretationError,
    Validation(ViolationKind),
    UntrimmedLabel,
    DuplicateDependency,
    Conversion,
    Unsound,
    /// The language changed when a problem was fixed automatically.
    RepairChangedBehavior,
}

pub fn classify(source: Source) -> Category {
    match source {
        Source::Validation(ViolationKind::SharedSubmodel)
        | Source::UntrimmedLabel
        | Source::DuplicateDependency
        | Source::RepairChangedBehavior => Category::Adjustable,
        Source::ProviderFailure
        | Source::NoCodeFound
        | Source::Security(_)
        | Source::InterpretationError
        | Source::Validation(_)
        | Source::Conversion
        | Source::Unsound => Category::Critical,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub category: Category,
    pub stage: Stage,
    pub source: Source,
    pub message: String,
    /// 1 for the first response of a turn, 2 after the first repair, ...
    pub attempt: usize,
    /// Set when the problem was fixed without the LLM.
    #[serde(default)]
    pub resolved_automatically: bool,
}

impl Diagnostic {
    fn new(source: Source, stage: Stage, message: impl Into<String>, attempt: usize) -> Self {
        Diagnostic {
            category: classify(source),
            stage,
            source,
            message: message.into(),
            attempt,
            resolved_automatically: false,
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}/{:?}, attempt {}] {}", self.category, self.stage, self.attempt, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    InProgress,
    Succeeded,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TurnKind {
    Generate,
    Feedback,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FailureKind {
    /// The provider could not be reached or ran out of answers.
    Provider,
    /// The repair budget was used up.
    RetriesExhausted,
    Cancelled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub kind: TurnKind,
    pub input: String,
    pub status: Status,
    pub failure: Option<FailureKind>,
    pub llm_calls: usize,
    pub critical_rounds: usize,
    pub adjustable_rounds: usize,
    pub diagnostics: Vec<Diagnostic>,
}

impl Turn {
    /// Error prompts sent back to the LLM in this turn.
    pub fn repair_rounds(&self) -> usize {
        self.critical_rounds + self.adjustable_rounds
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelVersion {
    pub model: PowlModel,
    pub diagnostics: Vec<Diagnostic>,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Conversation {
    pub id: Uuid,
    pub history: Vec<ChatMessage>,
    pub versions: Vec<ModelVersion>,
    pub status: Status,
    pub turns: Vec<Turn>,
}

impl Conversation {
    pub fn current(&self) -> Option<&ModelVersion> {
        self.versions.last()
    }

    pub fn last_turn(&self) -> Option<&Turn> {
        self.turns.last()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopConfig {
    pub max_adjustable_attempts: usize,
    pub max_critical_attempts: usize,
    pub settings: ProviderSettings,
    pub state_cap: usize,
}

impl Default for LoopConfig {
    fn default() -> Self {
        LoopConfig {
            max_adjustable_attempts: 2,
            max_critical_attempts: 5,
            settings: ProviderSettings::default(),
            state_cap: DEFAULT_STATE_CAP,
        }
    }
}

#[derive(Debug, Error)]
pub enum OrchestratorError {
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("conversation is {0:?}; feedback needs a succeeded conversation")]
    NotSucceeded(Status),
}

/// Cooperative cancellation shared between a caller and a running turn.
#[derive(Debug, Clone, Default)]
pub struct CancelToken(Arc<AtomicBool>);

impl CancelToken {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cancel(&self) {
        self.0.store(true, Ordering::SeqCst);
    }

    pub fn is_cancelled(&self) -> bool {
        self.0.load(Ordering::SeqCst)
    }
}

enum Outcome {
    Clean(PowlModel, Vec<Diagnostic>),
    Adjustable(PowlModel, Vec<Diagnostic>),
    Critical(Vec<Diagnostic>),
}

pub struct Orchestrator {
    provider: Arc<dyn LlmProvider>,
    templates: Arc<TemplateStore>,
    config: LoopConfig,
}

impl Orchestrator {
    pub fn new(provider: Arc<dyn LlmProvider>, config: LoopConfig) -> Self {
        Self::with_templates(provider, Arc::new(TemplateStore::builtin()), config)
    }

    pub fn with_templates(provider: Arc<dyn LlmProvider>, templates: Arc<TemplateStore>, config: LoopConfig) -> Self {
        Orchestrator { provider, templates, config }
    }

    pub fn config(&self) -> &LoopConfig {
        &self.config
    }

    pub fn template(&self) -> Arc<PromptTemplate> {
        self.templates.current()
    }

    /// Starts a conversation from a process description.
    pub fn generate(&self, description: &str) -> Result<Conversation, OrchestratorError> {
        self.generate_with(description, &CancelToken::new())
    }

    pub fn generate_with(&self, description: &str, cancel: &CancelToken) -> Result<Conversation, OrchestratorError> {
        let history = build_generation_prompt(description, &self.template())?;
        let mut conv = Conversation {
            id: Uuid::new_v4(),
            history,
            versions: Vec::new(),
            status: Status::InProgress,
            turns: Vec::new(),
        };
        let turn = self.run_turn(&mut conv, TurnKind::Generate, description, cancel);
        conv.status = turn.status;
        conv.turns.push(turn);
        Ok(conv)
    }

    /// Adds a feedback turn. On failure the previous version stays current
    /// and only the turn is marked failed.
    pub fn refine(&self, conv: &mut Conversation, feedback: &str) -> Result<(), OrchestratorError> {
        self.refine_with(conv, feedback, &CancelToken::new())
    }

    pub fn refine_with(
        &self,
        conv: &mut Conversation,
        feedback: &str,
        cancel: &CancelToken,
    ) -> Result<(), OrchestratorError> {
        if conv.status != Status::Succeeded {
            return Err(OrchestratorError::NotSucceeded(conv.status));
        }
        conv.history.push(build_feedback_prompt(feedback)?);
        conv.status = Status::InProgress;
        let turn = self.run_turn(conv, TurnKind::Feedback, feedback, cancel);
        conv.status = Status::Succeeded;
        conv.turns.push(turn);
        Ok(())
    }

    fn call(&self, history: &[ChatMessage], cancel: &CancelToken) -> Result<String, ProviderError> {
        if cancel.is_cancelled() {
            return Err(ProviderError::Cancelled);
        }
        let messages = if self.provider.supports_system_role() {
            history.to_vec()
        } else {
            merge_system_messages(history)
        };
        let provider = self.provider.clone();
        let settings = self.config.settings.clone();
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            let _ = tx.send(provider.send(&messages, &settings));
        });
        let deadline = Instant::now() + self.config.settings.timeout;
        loop {
            if cancel.is_cancelled() {
                return Err(ProviderError::Cancelled);
            }
            let now = Instant::now();
            if now >= deadline {
                return Err(ProviderError::Timeout(self.config.settings.timeout));
            }
            match rx.recv_timeout((deadline - now).min(Duration::from_millis(50))) {
                Ok(r) => return r,
                Err(mpsc::RecvTimeoutError::Timeout) => continue,
                Err(mpsc::RecvTimeoutError::Disconnected) => {
                    return Err(ProviderError::Http("provider thread panicked".into()));
                }
            }
        }
    }

    fn run_turn(&self, conv: &mut Conversation, kind: TurnKind, input: &str, cancel: &CancelToken) -> Turn {
        let mut turn = Turn {
            kind,
            input: input.to_string(),
            status: Status::InProgress,
            failure: None,
            llm_calls: 0,
            critical_rounds: 0,
            adjustable_rounds: 0,
            diagnostics: Vec::new(),
        };
        let fail = |turn: &mut Turn, failure: FailureKind| {
            turn.status = Status::Failed;
            turn.failure = Some(failure);
        };
        loop {
            let attempt = turn.llm_calls + 1;
            let response = match self.call(&conv.history, cancel) {
                Ok(r) => r,
                Err(e) => {
                    turn.diagnostics.push(Diagnostic::new(Source::ProviderFailure, Stage::Provider, e.to_string(), attempt));
                    let failure = if e == ProviderError::Cancelled { FailureKind::Cancelled } else { FailureKind::Provider };
                    fail(&mut turn, failure);
                    return turn;
                }
            };
            turn.llm_calls += 1;
            conv.history.push(ChatMessage::assistant(response.clone()));
            let (code, outcome) = self.evaluate_response(&response, attempt);
            let diags = match outcome {
                Outcome::Clean(model, diags) => {
                    turn.diagnostics.extend(diags.iter().cloned());
                    self.accept(conv, &mut turn, model, diags);
                    return turn;
                }
                Outcome::Critical(diags) => {
                    turn.diagnostics.extend(diags.iter().cloned());
                    if turn.critical_rounds >= self.config.max_critical_attempts {
                        fail(&mut turn, FailureKind::RetriesExhausted);
                        return turn;
                    }
                    turn.critical_rounds += 1;
                    diags
                }
                Outcome::Adjustable(model, diags) => {
                    turn.diagnostics.extend(diags.iter().cloned());
                    if turn.adjustable_rounds >= self.config.max_adjustable_attempts {
                        match self.auto_resolve(model, attempt) {
                            Ok((model, mut fixes)) => {
                                for d in &mut turn.diagnostics {
                                    if d.attempt == attempt && d.category == Category::Adjustable {
                                        d.resolved_automatically = true;
                                    }
                                }
                                turn.diagnostics.append(&mut fixes);
                                let version_diags =
                                    turn.diagnostics.iter().filter(|d| d.attempt == attempt).cloned().collect();
                                self.accept(conv, &mut turn, model, version_diags);
                                return turn;
                            }
                            Err(diags) => {
                                turn.diagnostics.extend(diags.iter().cloned());
                                if turn.critical_rounds >= self.config.max_critical_attempts {
                                    fail(&mut turn, FailureKind::RetriesExhausted);
                                    return turn;
                                }
                                turn.critical_rounds += 1;
                                diags
                            }
                        }
                    } else {
                        turn.adjustable_rounds += 1;
                        diags
                    }
                }
            };
            if cancel.is_cancelled() {
                fail(&mut turn, FailureKind::Cancelled);
                return turn;
            }
            conv.history.push(build_error_prompt(&error_text(&diags, code.as_deref())));
        }
    }

    fn accept(&self, conv: &mut Conversation, turn: &mut Turn, model: PowlModel, diagnostics: Vec<Diagnostic>) {
        conv.versions.push(ModelVersion { model, diagnostics, created_at: Utc::now() });
        turn.status = Status::Succeeded;
    }

    /// Runs one response through the pipeline. Also returns the extracted
    /// code, if any, for quoting lines in error prompts.
    fn evaluate_response(&self, response: &str, attempt: usize) -> (Option<String>, Outcome) {
        let critical = |source, stage, msg: String| Outcome::Critical(vec![Diagnostic::new(source, stage, msg, attempt)]);
        let extracted = match dsl::extract_code_block(response) {
            Ok(e) => e,
            Err(e) => return (None, critical(Source::NoCodeFound, Stage::Extraction, e.to_string())),
        };
        let code = extracted.code;
        let mut notes = Vec::new();
        if extracted.alternatives > 0 {
            tracing::debug!(alternatives = extracted.alternatives, "using the last of several code blocks");
        }
        let with_context = |line: usize, msg: String| match dsl::line_context(&code, line) {
            Some(ctx) => format!("{msg}\n{ctx}"),
            None => msg,
        };
        let program = match dsl::parse(&code) {
            Ok(p) => p,
            Err(v) => {
                let msg = with_context(v.line, v.to_string());
                return (Some(code.clone()), critical(Source::Security(v.kind), Stage::Parse, msg));
            }
        };
        let interpretation = match dsl::interpret(&program) {
            Ok(i) => i,
            Err(DslError::Rejected(vs)) => {
                let diags = vs
                    .into_iter()
                    .map(|v| Diagnostic::new(Source::Security(v.kind), Stage::Audit, with_context(v.line, v.to_string()), attempt))
                    .collect();
                return (Some(code.clone()), Outcome::Critical(diags));
            }
            Err(e) => {
                let msg = with_context(e.line().unwrap_or(1), e.to_string());
                return (Some(code.clone()), critical(Source::InterpretationError, Stage::Interpret, msg));
            }
        };
        for w in &interpretation.warnings {
            notes.push(Diagnostic::new(
                Source::DuplicateDependency,
                Stage::Interpret,
                with_context(w.line, format!("line {}: {}", w.line, w.message)),
                attempt,
            ));
        }
        let model = interpretation.model;
        for label in untrimmed_labels(&model) {
            notes.push(Diagnostic::new(
                Source::UntrimmedLabel,
                Stage::Validate,
                format!("activity label {label:?} has leading or trailing whitespace"),
                attempt,
            ));
        }
        let violations = validate(&model);
        let mut critical_found = Vec::new();
        for v in violations {
            let d = Diagnostic::new(Source::Validation(v.kind), Stage::Validate, v.to_string(), attempt);
            if d.category == Category::Critical {
                critical_found.push(d);
            } else {
                notes.push(d);
            }
        }
        if !critical_found.is_empty() {
            critical_found.extend(notes);
            return (Some(code), Outcome::Critical(critical_found));
        }
        if !notes.is_empty() {
            return (Some(code), Outcome::Adjustable(model, notes));
        }
        match self.check_model(&model, attempt) {
            Ok(()) => (Some(code), Outcome::Clean(model, notes)),
            Err(d) => (Some(code), Outcome::Critical(vec![d])),
        }
    }

    fn check_model(&self, model: &PowlModel, attempt: usize) -> Result<(), Diagnostic> {
        let net = to_petri_net(model)
            .map_err(|e| Diagnostic::new(Source::Conversion, Stage::Convert, e.to_string(), attempt))?;
        let report = check_soundness(&net, self.config.state_cap);
        if report.sound {
            Ok(())
        } else {
            let detail: Vec<String> = report.violations.iter().map(|v| format!("{:?}: {}", v.kind, v.detail)).collect();
            Err(Diagnostic::new(
                Source::Unsound,
                Stage::Convert,
                format!("the generated net is not sound: {}", detail.join("; ")),
                attempt,
            ))
        }
    }

    /// Trims labels and copies shared submodels, then checks the result. A
    /// change of the bounded language caused by copying is reported.
    fn auto_resolve(&self, model: PowlModel, attempt: usize) -> Result<(PowlModel, Vec<Diagnostic>), Vec<Diagnostic>> {
        let trimmed = model.trim_labels();
        let repaired = trimmed.repair_shared_submodels();
        let mut out = Vec::new();
        let bounds = Bounds::new(1, 8);
        let before = bounded_language_unchecked(&trimmed, bounds);
        let after = bounded_language_unchecked(&repaired, bounds);
        if before != after {
            let mut d = Diagnostic::new(
                Source::RepairChangedBehavior,
                Stage::Validate,
                "warning: the automatic repair changed the bounded language of the model",
                attempt,
            );
            d.resolved_automatically = true;
            out.push(d);
        }
        let remaining = validate(&repaired);
        if let Some(v) = remaining.first() {
            return Err(vec![Diagnostic::new(Source::Validation(v.kind), Stage::Validate, v.to_string(), attempt)]);
        }
        self.check_model(&repaired, attempt).map_err(|d| vec![d])?;
        let mut note = Diagnostic::new(
            Source::Validation(ViolationKind::SharedSubmodel),
            Stage::Validate,
            format!(
                "resolved automatically after {} repair round(s): shared submodels were copied and labels trimmed",
                self.config.max_adjustable_attempts
            ),
            attempt,
        );
        note.resolved_automatically = true;
        out.push(note);
        Ok((repaired, out))
    }
}

fn untrimmed_labels(model: &PowlModel) -> Vec<String> {
    let mut out = Vec::new();
    let mut stack = vec![model];
    while let Some(m) = stack.pop() {
        if let Node::Activity { label } = m.node() {
            if label.trim() != label {
                out.push(label.clone());
            }
        }
        stack.extend(m.children());
    }
    out
}

fn error_text(diags: &[Diagnostic], code: Option<&str>) -> String {
    let mut text: Vec<String> = diags.iter().map(|d| format!("{:?}: {}", d.source, d.message)).collect();
    if code.is_none() && diags.iter().any(|d| d.source == Source::NoCodeFound) {
        text.push("Put the complete program in a ```python fenced code block and assign the model to final_model.".into());
    }
    text.join("\n")
}

/// One-shot form of [`Orchestrator::generate`].
pub fn generate(
    description: &str,
    provider: Arc<dyn LlmProvider>,
    config: &LoopConfig,
) -> Result<Conversation, OrchestratorError> {
    Orchestrator::new(provider, config.clone()).generate(description)
}

/// One-shot form of [`Orchestrator::refine`].
pub fn refine(
    conversation: &mut Conversation,
    feedback: &str,
    provider: Arc<dyn LlmProvider>,
    config: &LoopConfig,
) -> Result<(), OrchestratorError> {
    Orchestrator::new(provider, config.clone()).refine(conversation, feedback)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fenced(code: &str) -> String {
        format!("Sure.\n```python\n{code}\n```\n")
    }

    const SHARED: &str = "gen = ModelGenerator()\na = gen.activity('a')\nb = gen.activity('b')\nfinal_model = gen.partial_order(dependencies=[(a, b), (gen.xor(a, b), )])";

    fn orch(p: ScriptedProvider) -> (Arc<ScriptedProvider>, Orchestrator) {
        let p = Arc::new(p);
        (p.clone(), Orchestrator::new(p, LoopConfig::default()))
    }

    #[test]
    fn classification_table() {
        assert_eq!(classify(Source::Security(SecurityViolationKind::ForbiddenImport)), Category::Critical);
        assert_eq!(classify(Source::Validation(ViolationKind::SharedSubmodel)), Category::Adjustable);
        assert_eq!(classify(Source::Validation(ViolationKind::CycleInPartialOrder)), Category::Critical);
        assert_eq!(classify(Source::NoCodeFound), Category::Critical);
        assert_eq!(classify(Source::DuplicateDependency), Category::Adjustable);
    }

    #[test]
    fn clean_first_response() {
        let (p, o) = orch(ScriptedProvider::new([fenced("gen = ModelGenerator()\nfinal_model = gen.activity('a')")]));
        let conv = o.generate("d").unwrap();
        assert_eq!(conv.status, Status::Succeeded);
        assert_eq!(p.call_count(), 1);
        assert_eq!(conv.turns[0].repair_rounds(), 0);
        assert_eq!(conv.history.len(), 3);
    }

    #[test]
    fn shared_submodel_is_copied_after_two_rounds() {
        let (p, o) = orch(ScriptedProvider::repeating(fenced(SHARED)));
        let conv = o.generate("d").unwrap();
        assert_eq!(conv.status, Status::Succeeded);
        assert_eq!(p.call_count(), 3);
        let turn = &conv.turns[0];
        assert_eq!(turn.adjustable_rounds, 2);
        assert!(turn.diagnostics.iter().any(|d| d.message.contains("resolved automatically")));
        assert!(validate(&conv.current().unwrap().model).is_empty());
    }

    #[test]
    fn critical_budget() {
        let (p, o) = orch(ScriptedProvider::repeating(fenced("import os")));
        let conv = o.generate("d").unwrap();
        assert_eq!(conv.status, Status::Failed);
        assert_eq!(conv.turns[0].critical_rounds, 5);
        assert_eq!(conv.turns[0].failure, Some(FailureKind::RetriesExhausted));
        assert_eq!(p.call_count(), 6);
        assert!(conv.versions.is_empty());
    }

    #[test]
    fn error_prompt_quotes_the_line() {
        let (p, o) = orch(ScriptedProvider::new([
            fenced("gen = ModelGenerator()\na = gen.activity('a')\nfinal_model = gen.xor(a)"),
            fenced("gen = ModelGenerator()\nfinal_model = gen.activity('a')"),
        ]));
        let conv = o.generate("d").unwrap();
        assert_eq!(conv.status, Status::Succeeded);
        let second = &p.calls()[1];
        let repair = &second.last().unwrap().content;
        assert!(repair.contains("line 3") && repair.contains("n >= 2"), "{repair}");
        assert!(repair.contains("final_model = gen.xor(a)"));
    }

    #[test]
    fn provider_failure_fails_the_turn() {
        let (_, o) = orch(ScriptedProvider::new(Vec::<String>::new()));
        let conv = o.generate("d").unwrap();
        assert_eq!(conv.status, Status::Failed);
        assert_eq!(conv.turns[0].failure, Some(FailureKind::Provider));
    }

    #[test]
    fn refine_requires_success_and_keeps_versions() {
        let code = fenced("gen = ModelGenerator()\nfinal_model = gen.activity('a')");
        let (_, o) = orch(ScriptedProvider::new([code.clone(), code, "no code".into()]));
        let mut conv = o.generate("d").unwrap();
        o.refine(&mut conv, "again").unwrap();
        assert_eq!(conv.versions.len(), 2);
        assert_eq!(conv.versions[0].model, conv.versions[1].model);
        let before = conv.history.len();
        o.refine(&mut conv, "once more").unwrap();
        assert_eq!(conv.status, Status::Succeeded);
        assert_eq!(conv.last_turn().unwrap().status, Status::Failed);
        assert_eq!(conv.versions.len(), 2);
        assert!(conv.history.len() > before);

        let (_, o) = orch(ScriptedProvider::repeating("nothing"));
        let mut failed = o.generate("d").unwrap();
        assert!(matches!(o.refine(&mut failed, "x"), Err(OrchestratorError::NotSucceeded(Status::Failed))));
    }

    #[test]
    fn cancelled_before_call() {
        let (p, o) = orch(ScriptedProvider::repeating("x"));
        let token = CancelToken::new();
        token.cancel();
        let conv = o.generate_with("d", &token).unwrap();
        assert_eq!(conv.turns[0].failure, Some(FailureKind::Cancelled));
        assert_eq!(p.call_count(), 0);
    }
}
