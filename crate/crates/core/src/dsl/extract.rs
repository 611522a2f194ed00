use super::{parse, DslError, FINAL_MODEL};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractedCode {
    pub code: String,
    /// Other fenced blocks that also mention `final_model` and were passed
    /// over in favour of the last one.
    pub alternatives: usize,
}

fn fenced_blocks(response: &str) -> Vec<String> {
    let mut blocks = Vec::new();
    let mut current: Option<Vec<&str>> = None;
    for line in response.lines() {
        let trimmed = line.trim_start();
        match current.as_mut() {
            None if trimmed.starts_with("```") => current = Some(Vec::new()),
            None => {}
            Some(_) if trimmed.trim_end() == "```" => {
                blocks.push(current.take().unwrap().join("\n"));
            }
            Some(lines) => lines.push(line),
        }
    }
    if let Some(lines) = current {
        blocks.push(lines.join("\n"));
    }
    blocks
}

/// Picks the program out of an LLM response.
///
/// The last fenced block containing `final_model` wins. Without any fenced
/// block, the whole text is used if it mentions `final_model` and parses.
/// The result is dedented.
pub fn extract_code_block(response: &str) -> Result<ExtractedCode, DslError> {
    let blocks = fenced_blocks(response);
    if blocks.is_empty() {
        let raw = textwrap::dedent(response);
        if raw.contains(FINAL_MODEL) && parse(&raw).is_ok() {
            return Ok(ExtractedCode { code: raw, alternatives: 0 });
        }
        return Err(DslError::NoCodeFound);
    }
    let mut qualifying: Vec<String> = blocks.into_iter().filter(|b| b.contains(FINAL_MODEL)).collect();
    let last = qualifying.pop().ok_or(DslError::NoCodeFound)?;
    Ok(ExtractedCode {
        code: textwrap::dedent(&last),
        alternatives: qualifying.len(),
    })
}
