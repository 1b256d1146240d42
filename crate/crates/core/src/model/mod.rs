//! Domain types for redundant digital architectures.
//!
//! A [`SystemModel`] is what the DSL parses into and what every analysis
//! stage consumes. Models may contain `replicates` declarations; call
//! [`expand_replication`] before handing a model to the analysis stages.

mod expand;
mod validate;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use expand::expand_replication;
pub use validate::{dependency_order, validate_model, ValidationReport, Violation};

/// 1-based position of a token in a model document.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SourceSpan {
    pub file: String,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

/// Where a model element was declared, if it came from a document.
///
/// Origins never take part in equality, so a parsed model and the same
/// model built in code compare equal.
#[derive(Debug, Clone, Default)]
pub struct Origin(pub Option<SourceSpan>);

impl Origin {
    pub fn at(span: SourceSpan) -> Self {
        Origin(Some(span))
    }

    pub fn span(&self) -> Option<&SourceSpan> {
        self.0.as_ref()
    }
}

impl PartialEq for Origin {
    fn eq(&self, _other: &Self) -> bool {
        true
    }
}

impl Eq for Origin {}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SystemModel {
    pub name: String,
    pub top_event: String,
    pub losses: Vec<Loss>,
    pub hazards: Vec<Hazard>,
    pub design_classes: Vec<DesignClass>,
    pub divisions: Vec<Division>,
    pub redundancy_groups: Vec<RedundancyGroup>,
    pub shared_resources: Vec<SharedResource>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Loss {
    pub id: String,
    pub description: String,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hazard {
    pub id: String,
    pub description: String,
    pub linked_losses: Vec<String>,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignClass {
    pub id: String,
    pub description: String,
    /// Classes sharing a tag are treated as non-diverse.
    pub diversity_tag: String,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Division {
    pub id: String,
    pub components: Vec<Component>,
    pub replicates: Option<String>,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub id: String,
    pub kind: ComponentKind,
    pub tech: Tech,
    pub design_class: String,
    /// Out-of-scope placeholder (e.g. a diverse backup system). A stub that
    /// feeds an analyzed component contributes a single dependency leaf.
    pub stub: bool,
    pub inputs: Vec<LinkRef>,
    /// Closed-loop feedback; excluded from dependency expansion.
    pub feedback_inputs: Vec<LinkRef>,
    /// Control actions and information flows sourced by this component.
    pub links: Vec<Link>,
    pub origin: Origin,
}

/// Reference to another component's output, optionally naming the port.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinkRef {
    pub component: String,
    pub port: Option<String>,
}

impl LinkRef {
    pub fn to(component: impl Into<String>) -> Self {
        LinkRef { component: component.into(), port: None }
    }
}

impl fmt::Display for LinkRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.port {
            Some(p) => write!(f, "{}.{}", self.component, p),
            None => f.write_str(&self.component),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Link {
    pub id: String,
    pub kind: LinkKind,
    pub port: String,
    pub targets: Vec<String>,
    /// Declared failure-mode types with the hazards each one leads to.
    pub applicability: BTreeMap<FailureModeType, Vec<String>>,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RedundancyGroup {
    pub id: String,
    pub level: RedundancyLevel,
    /// Division ids or component ids.
    pub members: Vec<String>,
    pub logic: GroupLogic,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharedResource {
    pub id: String,
    pub scope: ResourceScope,
    pub dependents: Vec<String>,
    pub origin: Origin,
}

/// Error raised when a keyword does not name a member of an enumeration.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown {what} `{value}`")]
pub struct UnknownVariant {
    pub what: &'static str,
    pub value: String,
}

macro_rules! keyword_enum {
    ($(#[$meta:meta])* $name:ident, $what:literal { $($variant:ident => $kw:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn keyword(self) -> &'static str {
                match self {
                    $($name::$variant => $kw),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.keyword())
            }
        }

        impl FromStr for $name {
            type Err = UnknownVariant;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($kw => Ok($name::$variant),)+
                    _ => Err(UnknownVariant { what: $what, value: s.to_string() }),
                }
            }
        }
    };
}

keyword_enum!(ComponentKind, "component kind" {
    Controller => "controller",
    Sensor => "sensor",
    Calculator => "calculator",
    Alarm => "alarm",
    Converter => "converter",
    Conditioner => "conditioner",
    PowerSupply => "power_supply",
    Comms => "comms",
    Display => "display",
    TestPanel => "test_panel",
    Operator => "operator",
});

keyword_enum!(Tech, "technology" {
    Digital => "digital",
    Analog => "analog",
    Human => "human",
});

keyword_enum!(LinkKind, "link kind" {
    ControlAction => "control_action",
    InformationFlow => "info_flow",
});

keyword_enum!(RedundancyLevel, "redundancy level" {
    System => "system",
    Division => "division",
    Module => "module",
});

keyword_enum!(
    /// How the members of a redundancy group combine.
    ///
    /// `all_must_fail` is ordinary redundancy: the function is lost only when
    /// every member is down. `any_misleads` models a human consumer who is
    /// defeated by misleading output from any single member.
    GroupLogic, "group logic" {
    AllMustFail => "all_must_fail",
    AnyMisleads => "any_misleads",
});

keyword_enum!(ResourceScope, "resource scope" {
    Internal => "internal",
    External => "external",
});

/// The four categories of unsafe control action from classic STPA.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StpaCategory {
    MissingWhenNeeded,
    ProvidedWhenNotNeeded,
    TimingOrOrder,
    DurationOrMagnitude,
}

impl fmt::Display for StpaCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StpaCategory::MissingWhenNeeded => "missing_when_needed",
            StpaCategory::ProvidedWhenNotNeeded => "provided_when_not_needed",
            StpaCategory::TimingOrOrder => "timing_or_order",
            StpaCategory::DurationOrMagnitude => "duration_or_magnitude",
        })
    }
}

/// Seven-way refinement of the STPA categories, shared by UCAs and UIFs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FailureModeType {
    /// Missing when needed.
    A,
    /// Provided when not needed.
    B,
    /// Too early.
    C,
    /// Too late.
    D,
    /// Wrong order.
    E,
    /// Applied too long or too much.
    F,
    /// Stopped too early or applied too little.
    G,
}

impl FailureModeType {
    pub const ALL: [FailureModeType; 7] = [
        FailureModeType::A,
        FailureModeType::B,
        FailureModeType::C,
        FailureModeType::D,
        FailureModeType::E,
        FailureModeType::F,
        FailureModeType::G,
    ];

    pub fn letter(self) -> char {
        match self {
            FailureModeType::A => 'A',
            FailureModeType::B => 'B',
            FailureModeType::C => 'C',
            FailureModeType::D => 'D',
            FailureModeType::E => 'E',
            FailureModeType::F => 'F',
            FailureModeType::G => 'G',
        }
    }

    pub fn stpa_category(self) -> StpaCategory {
        match self {
            FailureModeType::A => StpaCategory::MissingWhenNeeded,
            FailureModeType::B => StpaCategory::ProvidedWhenNotNeeded,
            FailureModeType::C | FailureModeType::D | FailureModeType::E => StpaCategory::TimingOrOrder,
            FailureModeType::F | FailureModeType::G => StpaCategory::DurationOrMagnitude,
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            FailureModeType::A => "missing when needed",
            FailureModeType::B => "provided when not needed",
            FailureModeType::C => "provided too early",
            FailureModeType::D => "provided too late",
            FailureModeType::E => "applied in the wrong order",
            FailureModeType::F => "applied too long or too much",
            FailureModeType::G => "stopped too early or applied too little",
        }
    }
}

impl fmt::Display for FailureModeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for FailureModeType {
    type Err = UnknownVariant;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "A" => Ok(FailureModeType::A),
            "B" => Ok(FailureModeType::B),
            "C" => Ok(FailureModeType::C),
            "D" => Ok(FailureModeType::D),
            "E" => Ok(FailureModeType::E),
            "F" => Ok(FailureModeType::F),
            "G" => Ok(FailureModeType::G),
            _ => Err(UnknownVariant { what: "failure mode type", value: s.to_string() }),
        }
    }
}

/// Errors from model transformations.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("division `{division}`: chained replication unsupported (`{source_division}` itself replicates)")]
    ChainedReplication { division: String, source_division: String },
    #[error("division `{division}` replicates unknown division `{source_division}`")]
    UnknownReplicationSource { division: String, source_division: String },
}

/// `[A-Za-z][A-Za-z0-9_-]*`
pub fn is_valid_id(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

/// A component together with the division that owns it.
#[derive(Debug, Clone, Copy)]
pub struct Placed<'a> {
    pub division: &'a Division,
    pub component: &'a Component,
}

impl SystemModel {
    pub fn components(&self) -> impl Iterator<Item = Placed<'_>> {
        self.divisions.iter().flat_map(|d| d.components.iter().map(move |c| Placed { division: d, component: c }))
    }

    pub fn component(&self, id: &str) -> Option<Placed<'_>> {
        self.components().find(|p| p.component.id == id)
    }

    /// Index of components by id. First declaration wins on duplicates.
    pub fn component_index(&self) -> BTreeMap<&str, Placed<'_>> {
        let mut index = BTreeMap::new();
        for p in self.components() {
            index.entry(p.component.id.as_str()).or_insert(p);
        }
        index
    }

    pub fn division(&self, id: &str) -> Option<&Division> {
        self.divisions.iter().find(|d| d.id == id)
    }

    pub fn design_class(&self, id: &str) -> Option<&DesignClass> {
        self.design_classes.iter().find(|c| c.id == id)
    }

    pub fn hazard(&self, id: &str) -> Option<&Hazard> {
        self.hazards.iter().find(|h| h.id == id)
    }

    pub fn operators(&self) -> Vec<Placed<'_>> {
        self.components().filter(|p| p.component.kind == ComponentKind::Operator).collect()
    }

    pub fn links(&self) -> impl Iterator<Item = (Placed<'_>, &Link)> {
        self.components().flat_map(|p| p.component.links.iter().map(move |l| (p, l)))
    }

    /// Losses reachable from a hazard list, deduplicated and sorted.
    pub fn losses_for(&self, hazards: &[String]) -> Vec<String> {
        let mut out: Vec<String> =
            hazards.iter().filter_map(|h| self.hazard(h)).flat_map(|h| h.linked_losses.iter().cloned()).collect();
        out.sort();
        out.dedup();
        out
    }

    /// Components whose non-feedback inputs reference `id`.
    pub fn consumers_of(&self, id: &str) -> Vec<Placed<'_>> {
        self.components().filter(|p| p.component.inputs.iter().any(|r| r.component == id)).collect()
    }

    /// Whether the model still contains unexpanded `replicates` declarations.
    pub fn has_replication(&self) -> bool {
        self.divisions.iter().any(|d| d.replicates.is_some())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failure_mode_categories_are_fixed() {
        use FailureModeType::*;
        assert_eq!(A.stpa_category(), StpaCategory::MissingWhenNeeded);
        assert_eq!(B.stpa_category(), StpaCategory::ProvidedWhenNotNeeded);
        for t in [C, D, E] {
            assert_eq!(t.stpa_category(), StpaCategory::TimingOrOrder);
        }
        for t in [F, G] {
            assert_eq!(t.stpa_category(), StpaCategory::DurationOrMagnitude);
        }
        assert_eq!(FailureModeType::ALL.len(), 7);
    }

    #[test]
    fn keywords_round_trip() {
        for k in ComponentKind::ALL {
            assert_eq!(k.keyword().parse::<ComponentKind>().unwrap(), *k);
        }
        assert!("plc".parse::<Tech>().is_err());
        assert_eq!("F".parse::<FailureModeType>().unwrap(), FailureModeType::F);
        assert!("H".parse::<FailureModeType>().is_err());
    }

    #[test]
    fn id_pattern() {
        assert!(is_valid_id("H-1"));
        assert!(is_valid_id("HJTC_CALC_A"));
        assert!(!is_valid_id("1abc"));
        assert!(!is_valid_id(""));
        assert!(!is_valid_id("a.b"));
    }

    #[test]
    fn origin_does_not_affect_equality() {
        let a = Loss { id: "L-1".into(), description: "x".into(), origin: Origin::default() };
        let mut b = a.clone();
        b.origin = Origin::at(SourceSpan { file: "f".into(), line: 3, column: 1 });
        assert_eq!(a, b);
    }
}
