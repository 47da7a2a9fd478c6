use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{EditError, Result};

/// Languages with a bundled grammar.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    #[default]
    Python,
    JavaScript,
}

impl Language {
    pub const ALL: [Language; 2] = [Language::Python, Language::JavaScript];

    pub fn name(self) -> &'static str {
        match self {
            Language::Python => "python",
            Language::JavaScript => "javascript",
        }
    }

    /// Tag used on code fences holding full code.
    pub fn fence_tag(self) -> &'static str {
        self.name()
    }

    pub fn from_path(path: &Path) -> Option<Language> {
        match path.extension()?.to_str()? {
            "py" | "pyi" => Some(Language::Python),
            "js" | "mjs" | "cjs" | "jsx" => Some(Language::JavaScript),
            _ => None,
        }
    }

    pub(crate) fn grammar(self) -> tree_sitter::Language {
        match self {
            Language::Python => tree_sitter_python::LANGUAGE.into(),
            Language::JavaScript => tree_sitter_javascript::LANGUAGE.into(),
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Language {
    type Err = EditError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "python" | "py" => Ok(Language::Python),
            "javascript" | "js" => Ok(Language::JavaScript),
            _ => Err(EditError::UnsupportedLanguage(s.to_owned())),
        }
    }
}

fn set(kinds: &[&str]) -> BTreeSet<String> {
    kinds.iter().map(|k| k.to_string()).collect()
}

/// Which grammar node kinds become block nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LanguageProfile {
    pub language: Language,
    pub control_kinds: BTreeSet<String>,
    pub function_kinds: BTreeSet<String>,
    pub class_kinds: BTreeSet<String>,
    /// Nodes such as decorators that wrap a definition. They are classified
    /// by the wrapped definition but keep their own span.
    pub wrapper_kinds: BTreeSet<String>,
    /// A control node directly under one of these kinds continues its
    /// parent statement (`else if`) and is not a block of its own.
    pub transparent_parents: BTreeSet<String>,
}

impl LanguageProfile {
    pub fn python() -> Self {
        LanguageProfile {
            language: Language::Python,
            control_kinds: set(&[
                "if_statement",
                "for_statement",
                "while_statement",
                "try_statement",
                "with_statement",
                "match_statement",
            ]),
            function_kinds: set(&["function_definition"]),
            class_kinds: set(&["class_definition"]),
            wrapper_kinds: set(&["decorated_definition"]),
            transparent_parents: BTreeSet::new(),
        }
    }

    pub fn javascript() -> Self {
        LanguageProfile {
            language: Language::JavaScript,
            control_kinds: set(&[
                "if_statement",
                "for_statement",
                "for_in_statement",
                "while_statement",
                "do_statement",
                "try_statement",
                "switch_statement",
                "with_statement",
            ]),
            function_kinds: set(&[
                "function_declaration",
                "function_expression",
                "function",
                "generator_function_declaration",
                "generator_function",
                "arrow_function",
                "method_definition",
            ]),
            class_kinds: set(&["class_declaration", "class"]),
            wrapper_kinds: BTreeSet::new(),
            transparent_parents: set(&["else_clause"]),
        }
    }

    pub fn for_language(language: Language) -> Self {
        match language {
            Language::Python => Self::python(),
            Language::JavaScript => Self::javascript(),
        }
    }

    /// The same profile without control kinds: functions become the finest
    /// blocks.
    pub fn function_level(&self) -> Self {
        LanguageProfile { control_kinds: BTreeSet::new(), ..self.clone() }
    }
}

impl Default for LanguageProfile {
    fn default() -> Self {
        Self::python()
    }
}
