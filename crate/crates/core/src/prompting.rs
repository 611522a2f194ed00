//! Prompt assembly: role, POWL knowledge and API, few-shot examples with
//! their common errors, negative instructions, and the task itself. Also the
//! follow-up messages for error repair and user feedback.
//!
//! Templates are plain text files so they can be edited without a rebuild:
//!
//! ```text
//! role.txt  knowledge.txt  negative.txt  [api.txt]  [task.txt]
//! examples/01-description.txt  examples/01-code.txt  examples/01-errors.txt
//! ```
//!
//! A copy of the default set is compiled in ([`PromptTemplate::builtin`]).

use std::collections::BTreeMap;
use std::fmt::Write;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};
use std::time::SystemTime;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conversion::{check_soundness, to_petri_net, DEFAULT_STATE_CAP};
use crate::dsl;
use crate::powl::validate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Author {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub author: Author,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage { author: Author::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage { author: Author::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage { author: Author::Assistant, content: content.into() }
    }
}

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("the process description is empty")]
    EmptyDescription,
    #[error("the feedback is empty")]
    EmptyFeedback,
    #[error("template {path}: {message}")]
    Template { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FewShotExample {
    pub description: String,
    pub code: String,
    pub common_errors: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub role_section: String,
    pub knowledge_section: String,
    pub api_section: String,
    pub few_shot_examples: Vec<FewShotExample>,
    pub negative_section: String,
    pub task_section: String,
}

const BUILTIN_API: &str = include_str!("../templates/api.txt");
const BUILTIN_TASK: &str = include_str!("../templates/task.txt");

impl PromptTemplate {
    /// The default template shipped with the crate.
    pub fn builtin() -> Self {
        let ex = |d: &str, c: &str, e: &str| FewShotExample {
            description: d.trim().to_string(),
            code: c.trim_end().to_string(),
            common_errors: e.trim().to_string(),
        };
        PromptTemplate {
            role_section: include_str!("../templates/role.txt").trim().to_string(),
            knowledge_section: include_str!("../templates/knowledge.txt").trim().to_string(),
            api_section: BUILTIN_API.trim().to_string(),
            few_shot_examples: vec![
                ex(
                    include_str!("../templates/examples/01-description.txt"),
                    include_str!("../templates/examples/01-code.txt"),
                    include_str!("../templates/examples/01-errors.txt"),
                ),
                ex(
                    include_str!("../templates/examples/02-description.txt"),
                    include_str!("../templates/examples/02-code.txt"),
                    include_str!("../templates/examples/02-errors.txt"),
                ),
                ex(
                    include_str!("../templates/examples/03-description.txt"),
                    include_str!("../templates/examples/03-code.txt"),
                    include_str!("../templates/examples/03-errors.txt"),
                ),
            ],
            negative_section: include_str!("../templates/negative.txt").trim().to_string(),
            task_section: BUILTIN_TASK.trim().to_string(),
        }
    }

    /// Loads a template directory. `api.txt` and `task.txt` fall back to the
    /// built-in texts when absent. Examples are numbered `NN-*.txt` and used in
    /// numeric order.
    pub fn load_dir(dir: &Path) -> Result<Self, PromptError> {
        let read = |name: &str| -> Result<String, PromptError> {
            let path = dir.join(name);
            fs::read_to_string(&path)
                .map(|s| s.trim().to_string())
                .map_err(|e| PromptError::Template { path, message: e.to_string() })
        };
        let optional = |name: &str, fallback: &str| -> Result<String, PromptError> {
            if dir.join(name).exists() {
                read(name)
            } else {
                Ok(fallback.trim().to_string())
            }
        };
        let examples_dir = dir.join("examples");
        let mut numbers: BTreeMap<u32, String> = BTreeMap::new();
        let entries = fs::read_dir(&examples_dir)
            .map_err(|e| PromptError::Template { path: examples_dir.clone(), message: e.to_string() })?;
        for entry in entries.flatten() {
            let name = entry.file_name().to_string_lossy().into_owned();
            if let Some((num, _)) = name.split_once('-') {
                if let Ok(n) = num.parse::<u32>() {
                    numbers.insert(n, num.to_string());
                }
            }
        }
        let mut few_shot_examples = Vec::new();
        for prefix in numbers.values() {
            let part = |kind: &str| read(&format!("examples/{prefix}-{kind}.txt"));
            few_shot_examples.push(FewShotExample {
                description: part("description")?,
                code: part("code")?,
                common_errors: part("errors")?,
            });
        }
        let t = PromptTemplate {
            role_section: read("role.txt")?,
            knowledge_section: read("knowledge.txt")?,
            api_section: optional("api.txt", BUILTIN_API)?,
            few_shot_examples,
            negative_section: read("negative.txt")?,
            task_section: optional("task.txt", BUILTIN_TASK)?,
        };
        t.check().map_err(|message| PromptError::Template { path: dir.to_path_buf(), message })?;
        Ok(t)
    }

    /// Every section is non-empty and every example program compiles to a
    /// valid model with a sound net.
    pub fn check(&self) -> Result<(), String> {
        for (name, s) in [
            ("role", &self.role_section),
            ("knowledge", &self.knowledge_section),
            ("api", &self.api_section),
            ("negative", &self.negative_section),
            ("task", &self.task_section),
        ] {
            if s.trim().is_empty() {
                return Err(format!("{name} section is empty"));
            }
        }
        if self.few_shot_examples.is_empty() {
            return Err("no few-shot examples".into());
        }
        for (i, ex) in self.few_shot_examples.iter().enumerate() {
            let n = i + 1;
            if ex.description.trim().is_empty() || ex.common_errors.trim().is_empty() {
                return Err(format!("example {n} has an empty description or errors note"));
            }
            let out = dsl::compile(&ex.code).map_err(|e| format!("example {n}: {e}"))?;
            let violations = validate(&out.model);
            if !violations.is_empty() {
                return Err(format!("example {n}: {}", violations[0]));
            }
            let net = to_petri_net(&out.model).map_err(|e| format!("example {n}: {e}"))?;
            let report = check_soundness(&net, DEFAULT_STATE_CAP);
            if !report.sound {
                return Err(format!("example {n}: net is not sound"));
            }
        }
        Ok(())
    }
}

impl Default for PromptTemplate {
    fn default() -> Self {
        Self::builtin()
    }
}

/// A template directory that is re-read whenever one of its files changes.
#[derive(Debug)]
pub struct TemplateStore {
    dir: Option<PathBuf>,
    state: RwLock<(Option<SystemTime>, Arc<PromptTemplate>)>,
}

fn newest_mtime(dir: &Path) -> Option<SystemTime> {
    let mut newest = None;
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).ok()?.flatten() {
            let meta = entry.metadata().ok()?;
            if meta.is_dir() {
                stack.push(entry.path());
            }
            let m = meta.modified().ok()?;
            newest = newest.max(Some(m));
        }
    }
    newest
}

impl TemplateStore {
    pub fn builtin() -> Self {
        TemplateStore { dir: None, state: RwLock::new((None, Arc::new(PromptTemplate::builtin()))) }
    }

    pub fn from_dir(dir: impl Into<PathBuf>) -> Result<Self, PromptError> {
        let dir = dir.into();
        let stamp = newest_mtime(&dir);
        let t = PromptTemplate::load_dir(&dir)?;
        Ok(TemplateStore { dir: Some(dir), state: RwLock::new((stamp, Arc::new(t))) })
    }

    /// The current template. If the directory changed since the last load it
    /// is reloaded; a broken edit keeps the previous template in use.
    pub fn current(&self) -> Arc<PromptTemplate> {
        let Some(dir) = &self.dir else {
            return self.state.read().unwrap().1.clone();
        };
        let stamp = newest_mtime(dir);
        {
            let state = self.state.read().unwrap();
            if state.0 == stamp {
                return state.1.clone();
            }
        }
        let mut state = self.state.write().unwrap();
        match PromptTemplate::load_dir(dir) {
            Ok(t) => *state = (stamp, Arc::new(t)),
            Err(e) => {
                tracing::warn!("keeping previous prompt template: {e}");
                state.0 = stamp;
            }
        }
        state.1.clone()
    }
}

/// The opening messages of a conversation: a system message with the role
/// and a user message with everything else, ending in `description`
/// verbatim.
pub fn build_generation_prompt(
    description: &str,
    template: &PromptTemplate,
) -> Result<Vec<ChatMessage>, PromptError> {
    if description.trim().is_empty() {
        return Err(PromptError::EmptyDescription);
    }
    let mut user = String::new();
    let _ = writeln!(user, "{}\n\n{}\n", template.knowledge_section, template.api_section);
    for (i, ex) in template.few_shot_examples.iter().enumerate() {
        let n = i + 1;
        let _ = writeln!(user, "Process description for example {n}:\n{}\n", ex.description);
        let _ = writeln!(user, "Process model for example {n}:\n```python\n{}\n```\n", ex.code);
        let _ = writeln!(user, "Common errors to avoid for example {n}:\n{}\n", ex.common_errors);
    }
    let _ = writeln!(user, "{}\n", template.negative_section);
    let _ = writeln!(user, "{}\n", template.task_section);
    user.push_str("Process description:\n");
    user.push_str(description);
    Ok(vec![ChatMessage::system(template.role_section.clone()), ChatMessage::user(user)])
}

/// For providers without a system role: the system text moves to the front
/// of the first user message.
pub fn merge_system_messages(messages: &[ChatMessage]) -> Vec<ChatMessage> {
    let system: Vec<&str> = messages
        .iter()
        .filter(|m| m.author == Author::System)
        .map(|m| m.content.as_str())
        .collect();
    let mut out: Vec<ChatMessage> = messages.iter().filter(|m| m.author != Author::System).cloned().collect();
    if system.is_empty() {
        return out;
    }
    let prefix = system.join("\n\n");
    match out.iter_mut().find(|m| m.author == Author::User) {
        Some(first) => first.content = format!("{prefix}\n\n{}", first.content),
        None => out.insert(0, ChatMessage::user(prefix)),
    }
    out
}

/// Asks the LLM to fix the error described in `error_text` and send the
/// complete program again.
pub fn build_error_prompt(error_text: &str) -> ChatMessage {
    let error_text = if error_text.trim().is_empty() { "unknown error" } else { error_text.trim_end() };
    let mut msg = format!("Executing your code failed with the following error:\n\n{error_text}\n\n");
    if error_text.contains("SharedSubmodel") {
        msg.push_str(
            "Each submodel may be used at only one place. Call .copy() on a submodel to create another instance when the same behavior is needed again.\n\n",
        );
    }
    if error_text.contains("CycleInPartialOrder") {
        msg.push_str(
            "Partial orders must be irreflexive and acyclic. Remove the dependency that closes the cycle and use loop(do, redo) to model repetition.\n\n",
        );
    }
    msg.push_str("Please fix the error and reply with the complete corrected code in a single Python code block that assigns final_model.");
    ChatMessage::user(msg)
}

/// Asks the LLM to update its last model according to `feedback`.
pub fn build_feedback_prompt(feedback: &str) -> Result<ChatMessage, PromptError> {
    if feedback.trim().is_empty() {
        return Err(PromptError::EmptyFeedback);
    }
    Ok(ChatMessage::user(format!(
        "Please update the process model according to the following feedback:\n\n{feedback}\n\nReply with the complete updated code in a single Python code block that assigns final_model."
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_template_is_self_consistent() {
        PromptTemplate::builtin().check().unwrap();
    }

    #[test]
    fn generation_prompt_layout() {
        let t = PromptTemplate::builtin();
        let msgs = build_generation_prompt("A customer orders a pizza.", &t).unwrap();
        assert_eq!(msgs.len(), 2);
        assert_eq!(msgs[0].author, Author::System);
        let user = &msgs[1].content;
        assert!(user.contains("final_model"));
        assert!(user.contains("bicycle"));
        assert!(user.ends_with("A customer orders a pizza."));
        let pos = |s: &str| user.find(s).unwrap();
        assert!(pos("modeling language") < pos("Process description for example 1"));
        assert!(pos("Common errors to avoid for example 1") < pos("Process description for example 2"));
        assert!(pos("Avoid the following mistakes") < pos("Process description:\n"));
        assert_eq!(build_generation_prompt("A customer orders a pizza.", &t).unwrap(), msgs);
    }

    #[test]
    fn empty_inputs() {
        let t = PromptTemplate::builtin();
        assert!(matches!(build_generation_prompt("  ", &t), Err(PromptError::EmptyDescription)));
        assert!(matches!(build_feedback_prompt(""), Err(PromptError::EmptyFeedback)));
    }

    #[test]
    fn error_prompt_hints() {
        let m = build_error_prompt("SharedSubmodel at root/1: submodel 'a' is used twice");
        assert!(m.content.contains(".copy()"));
        let m = build_error_prompt("BadArity at line 12: xor() got 1 argument(s). Rule: xor(*args) takes n >= 2 arguments");
        assert!(m.content.contains("line 12") && m.content.contains("n >= 2"));
    }

    #[test]
    fn system_merge() {
        let msgs = vec![ChatMessage::system("role"), ChatMessage::user("task")];
        let merged = merge_system_messages(&msgs);
        assert_eq!(merged, vec![ChatMessage::user("role\n\ntask")]);
    }
}
