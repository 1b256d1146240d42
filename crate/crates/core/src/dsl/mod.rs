//! The `.resha` model file format.
//!
//! A line-oriented block format: one statement per line, blocks opened by a
//! trailing `{` and closed by a line holding only `}`. `#` starts a comment.
//! The grammar, in EBNF:
//!
//! ```text
//! document     = { statement } ;
//! statement    = system | top_event | loss | hazard | design_class
//!              | division | redundancy_group | shared_resource ;
//! system       = "system" STRING ;
//! top_event    = "top_event" STRING ;
//! loss         = "loss" ID STRING ;
//! hazard       = "hazard" ID STRING [ "losses:" ids ] ;
//! design_class = "design_class" ID STRING [ "diversity:" STRING ] ;
//! division     = "division" ID ( "replicates" ID | "{" NL { component } "}" ) ;
//! component    = "component" ID "kind:" KIND "tech:" TECH "class:" ID
//!                [ "stub:" ( "true" | "false" ) ] [ "{" NL { item } "}" ] ;
//! item         = "inputs:" refs | "feedback:" refs | link ;
//! link         = ( "control_action" | "info_flow" ) ID [ "port:" ID ]
//!                [ "->" ids ] [ "{" NL { applicable } "}" ] ;
//! applicable   = "applicable:" TYPE { "," TYPE } [ "hazards:" ids ] ;
//! redundancy_group = "redundancy_group" ID "level:" LEVEL "logic:" LOGIC
//!                [ "members:" ids ] ;
//! shared_resource  = "shared_resource" ID "scope:" SCOPE [ "dependents:" ids ] ;
//! ids          = ID { "," ID } ;
//! refs         = ID [ "." ID ] { "," ID [ "." ID ] } ;
//! ID           = letter { letter | digit | "_" | "-" } ;
//! STRING       = '"' { char | '\"' | '\\' | '\n' | '\t' } '"' ;
//! ```
//!
//! Keys after a statement's positional arguments may come in any order.

mod lexer;
mod parser;
mod writer;

use crate::model::{SourceSpan, SystemModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    DuplicateId,
    UnknownEnumValue,
    UnknownKey,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub span: SourceSpan,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(kind: ParseErrorKind, span: SourceSpan, message: impl Into<String>) -> Self {
        ParseError { kind, span, message: message.into() }
    }

    pub(crate) fn syntax(span: SourceSpan, message: impl Into<String>) -> Self {
        Self::new(ParseErrorKind::Syntax, span, message)
    }
}

/// Parses a model document. Errors name the file as `<input>`.
pub fn parse_model(text: &str) -> Result<SystemModel, ParseError> {
    parser::parse(text, "<input>")
}

/// Parses a model document, naming `file` in error spans.
pub fn parse_model_named(text: &str, file: &str) -> Result<SystemModel, ParseError> {
    parser::parse(text, file)
}

/// Canonical, deterministic rendering of a model.
pub fn serialize_model(model: &SystemModel) -> String {
    writer::write(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::*;

    const MINIMAL: &str = r#"
system "X"
top_event "T"
division A {
  component S kind: sensor tech: analog class: C
}
"#;

    #[test]
    fn minimal_document() {
        let m = parse_model(MINIMAL).unwrap();
        assert_eq!(m.name, "X");
        assert_eq!(m.divisions.len(), 1);
        assert_eq!(m.divisions[0].components.len(), 1);
        assert_eq!(m.divisions[0].components[0].tech, Tech::Analog);
    }

    #[test]
    fn replicating_division_is_empty_before_expansion() {
        let m = parse_model(&format!("{MINIMAL}division B replicates A\n")).unwrap();
        let b = m.division("B").unwrap();
        assert_eq!(b.replicates.as_deref(), Some("A"));
        assert!(b.components.is_empty());
    }

    #[test]
    fn empty_model_serializes_to_header_only() {
        let m = SystemModel { name: "X".into(), top_event: "T".into(), ..Default::default() };
        assert_eq!(serialize_model(&m), "system \"X\"\ntop_event \"T\"\n");
    }

    #[test]
    fn links_and_applicability() {
        let text = r#"
system "X"
top_event "T"
hazard H-1 "h" losses: L-1
division A {
  component CTRL kind: controller tech: digital class: C {
    feedback: S.out
    control_action REF port: ref -> S {
      applicable: A, G hazards: H-1
      applicable: F
    }
  }
  component S kind: sensor tech: analog class: C {
    inputs: CTRL.ref
  }
}
"#;
        let m = parse_model(text).unwrap();
        let ctrl = &m.divisions[0].components[0];
        assert_eq!(ctrl.feedback_inputs[0].port.as_deref(), Some("out"));
        let link = &ctrl.links[0];
        assert_eq!(link.kind, LinkKind::ControlAction);
        assert_eq!(link.port, "ref");
        assert_eq!(link.applicability.len(), 3);
        assert_eq!(link.applicability[&FailureModeType::A], ["H-1"]);
        assert!(link.applicability[&FailureModeType::F].is_empty());
        let again = parse_model(&serialize_model(&m)).unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn unknown_key_is_rejected_at_the_key() {
        let err = parse_model("system \"X\"\nredundancy_group G level: system colour: red\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownKey);
        assert_eq!((err.span.line, err.span.column), (2, 34));
    }

    #[test]
    fn unknown_enum_value() {
        let err = parse_model("division A {\n  component S kind: widget tech: analog class: C\n}\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownEnumValue);
        assert_eq!((err.span.line, err.span.column), (2, 21));
    }

    #[test]
    fn duplicate_ids() {
        let err = parse_model("loss L-1 \"a\"\nloss L-1 \"b\"\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::DuplicateId);
        assert_eq!((err.span.line, err.span.column), (2, 6));
        let err = parse_model(
            "division A {\n  component S kind: sensor tech: analog class: C\n}\ndivision B {\n  component S kind: sensor tech: analog class: C\n}\n",
        )
        .unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::DuplicateId);
        assert_eq!(err.span.line, 5);
    }

    #[test]
    fn unclosed_block() {
        let err = parse_model("division A {\n").unwrap_err();
        assert_eq!(err.span.line, 1);
        assert!(err.message.contains("never closed"));
    }

    #[test]
    fn missing_required_key() {
        let err = parse_model("division A {\n  component S kind: sensor class: C\n}\n").unwrap_err();
        assert!(err.message.contains("`tech`"), "{err}");
    }

    #[test]
    fn error_display_includes_file() {
        let err = parse_model_named("bogus", "m.resha").unwrap_err();
        assert_eq!(err.to_string(), "m.resha:1:1: unknown statement `bogus`");
    }
}
