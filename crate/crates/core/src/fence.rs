//! Markdown code fences around model outputs.
//!
//! A payload is wrapped as "```tag\n" + payload + "\n```" with no further
//! normalization, so [`unfence`] recovers it byte for byte.

/// Tag marking a fenced diff.
pub const DIFF_TAG: &str = "diff";

pub fn fence(tag: &str, payload: &str) -> String {
    let mut out = String::with_capacity(payload.len() + tag.len() + 8);
    out.push_str("```");
    out.push_str(tag);
    out.push('\n');
    out.push_str(payload);
    out.push_str("\n```");
    out
}

/// Splits the first fenced block into its tag and payload. A missing
/// closing fence is tolerated: the payload then runs to the end.
pub fn unfence(text: &str) -> Option<(String, String)> {
    let lines: Vec<&str> = text.split('\n').collect();
    let open = lines.iter().position(|l| l.trim_start().starts_with("```"))?;
    let tag = lines[open].trim_start()[3..].trim().to_owned();
    let body = &lines[open + 1..];
    let close = body.iter().rposition(|l| l.trim() == "```").unwrap_or(body.len());
    Some((tag, body[..close].join("\n")))
}
