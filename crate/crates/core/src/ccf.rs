//! Common-cause failure detection and injection.
//!
//! Four group types, by shared cause:
//!
//! | type | trigger                                   | injected under          |
//! |------|-------------------------------------------|-------------------------|
//! | 1    | controller commanding ≥2 targets          | each target's inputs    |
//! | 2    | digital component feeding ≥2 digital ones | each dependent's inputs |
//! | 3    | external shared resource                  | each dependent's `Fail` |
//! | 4    | design class replicated across divisions  | each instance's gate    |
//!
//! Each group becomes one basic event shared by every affected location, so
//! a single event can defeat an AND over redundant divisions.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ftree::{EventCategory, FaultTree, FtError, NodeRef};
use crate::model::{ComponentKind, FailureModeType, LinkKind, RedundancyLevel, ResourceScope, SystemModel, Tech};
use crate::stpa::UcaUifInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum CcfType {
    /// Same commanding controller.
    Type1,
    /// Shared resource internal to the system.
    Type2,
    /// Shared resource external to the system.
    Type3,
    /// Shared design or location.
    Type4,
}

impl CcfType {
    pub fn number(self) -> u8 {
        match self {
            CcfType::Type1 => 1,
            CcfType::Type2 => 2,
            CcfType::Type3 => 3,
            CcfType::Type4 => 4,
        }
    }
}

impl From<CcfType> for u8 {
    fn from(t: CcfType) -> u8 {
        t.number()
    }
}

impl TryFrom<u8> for CcfType {
    type Error = String;
    fn try_from(n: u8) -> Result<Self, String> {
        match n {
            1 => Ok(CcfType::Type1),
            2 => Ok(CcfType::Type2),
            3 => Ok(CcfType::Type3),
            4 => Ok(CcfType::Type4),
            _ => Err(format!("CCF type must be 1-4, got {n}")),
        }
    }
}

impl fmt::Display for CcfType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Type {}", self.number())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriggerKind {
    DesignClass,
    Component,
    SharedResource,
    Controller,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CcfTrigger {
    pub kind: TriggerKind,
    pub id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CcfGroup {
    pub id: String,
    pub ccf_type: CcfType,
    pub scope: RedundancyLevel,
    pub trigger: CcfTrigger,
    /// Instance ids for Type 4, component ids otherwise.
    pub members: Vec<String>,
    /// `None` for resource groups, which are hardware causes.
    pub failure_type: Option<FailureModeType>,
}

impl CcfGroup {
    pub fn event_id(&self) -> String {
        format!("ccf/{}", self.id)
    }

    pub fn is_software(&self) -> bool {
        self.failure_type.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CcfError {
    #[error("unknown CCF trigger `{0}`")]
    UnknownTrigger(String),
    #[error("trigger `{0}` matches no CCF rule")]
    NoRule(String),
    #[error("trigger `{trigger}` is ambiguous between {}; annotate the group type", list(.types))]
    Ambiguous { trigger: String, types: Vec<CcfType> },
    #[error("group `{group}`: member `{member}` not found in tree")]
    MemberNotInTree { group: String, member: String },
    #[error(transparent)]
    Tree(#[from] FtError),
}

fn list(types: &[CcfType]) -> String {
    types.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" and ")
}

/// Digital components that source at least one link: the ones whose
/// software can mislead downstream.
fn is_software_bearing(c: &crate::model::Component) -> bool {
    c.tech == Tech::Digital && !c.stub && !c.links.is_empty()
}

/// Software-bearing components reachable downstream of `id` through
/// non-feedback inputs inside the same division, in declaration order.
fn digital_dependents(model: &SystemModel, id: &str) -> Vec<String> {
    let Some(start) = model.component(id) else { return Vec::new() };
    let division = start.division;
    let mut seen = BTreeSet::from([id.to_string()]);
    let mut queue = VecDeque::from([id.to_string()]);
    while let Some(cur) = queue.pop_front() {
        for c in &division.components {
            if c.inputs.iter().any(|r| r.component == cur) && seen.insert(c.id.clone()) {
                queue.push_back(c.id.clone());
            }
        }
    }
    division
        .components
        .iter()
        .filter(|c| c.id != id && seen.contains(&c.id) && is_software_bearing(c))
        .map(|c| c.id.clone())
        .collect()
}

/// Distinct targets per control action of a controller with at least two.
fn multi_target_actions(model: &SystemModel, id: &str) -> Vec<(String, Vec<String>)> {
    let Some(p) = model.component(id) else { return Vec::new() };
    if p.component.kind != ComponentKind::Controller {
        return Vec::new();
    }
    p.component
        .links
        .iter()
        .filter(|l| l.kind == LinkKind::ControlAction)
        .filter_map(|l| {
            let mut targets = l.targets.clone();
            targets.sort();
            targets.dedup();
            (targets.len() >= 2).then(|| (l.id.clone(), l.targets.clone()))
        })
        .collect()
}

fn divisions_of_class(model: &SystemModel, class: &str) -> BTreeSet<String> {
    model
        .components()
        .filter(|p| p.component.design_class == class && !p.component.stub)
        .map(|p| p.division.id.clone())
        .collect()
}

/// Classifies a trigger id by the rule it satisfies.
///
/// A design class used in two or more divisions is Type 4; a digital
/// component feeding two or more digital components of its division, or an
/// internal shared resource, is Type 2; an external shared resource is
/// Type 3; a controller commanding two or more targets with one control
/// action is Type 1. Triggers that satisfy several rules are reported as
/// ambiguous.
pub fn classify_ccf_type(trigger: &str, model: &SystemModel) -> Result<CcfType, CcfError> {
    let is_class = model.design_class(trigger).is_some();
    let component = model.component(trigger);
    let resource = model.shared_resources.iter().find(|r| r.id == trigger);
    if !is_class && component.is_none() && resource.is_none() {
        return Err(CcfError::UnknownTrigger(trigger.to_string()));
    }
    let mut types = Vec::new();
    if is_class && divisions_of_class(model, trigger).len() >= 2 {
        types.push(CcfType::Type4);
    }
    let digital_hub =
        component.is_some_and(|p| p.component.tech == Tech::Digital && digital_dependents(model, trigger).len() >= 2);
    if digital_hub || resource.is_some_and(|r| r.scope == ResourceScope::Internal) {
        types.push(CcfType::Type2);
    }
    if resource.is_some_and(|r| r.scope == ResourceScope::External) {
        types.push(CcfType::Type3);
    }
    if !multi_target_actions(model, trigger).is_empty() {
        types.push(CcfType::Type1);
    }
    match types.as_slice() {
        [] => Err(CcfError::NoRule(trigger.to_string())),
        [t] => Ok(*t),
        _ => Err(CcfError::Ambiguous { trigger: trigger.to_string(), types }),
    }
}

/// Where a group's event is attached for one member, if the tree has it.
fn injection_points(ft: &FaultTree, ccf_type: CcfType, software: bool, member: &str) -> Vec<NodeRef> {
    match ccf_type {
        CcfType::Type4 => ft.find(member).map(|e| ft.parents(e)).unwrap_or_default(),
        CcfType::Type3 => ft.find(&format!("{member}/fail")).into_iter().collect(),
        CcfType::Type1 | CcfType::Type2 if !software => ft.find(&format!("{member}/fail")).into_iter().collect(),
        CcfType::Type1 | CcfType::Type2 => {
            ft.find(&format!("{member}/dep")).or_else(|| ft.find(&format!("{member}/fail"))).into_iter().collect()
        }
    }
}

struct Collector<'a> {
    ft: &'a FaultTree,
    groups: Vec<CcfGroup>,
    seen: BTreeMap<(CcfType, String, Option<FailureModeType>), usize>,
}

impl Collector<'_> {
    /// Adds a group, merging members into an existing one with the same
    /// (type, trigger, failure type). Members absent from the tree are
    /// dropped; groups left with fewer than two are discarded.
    fn push(&mut self, mut g: CcfGroup, dedup_key: String) {
        let (ty, sw) = (g.ccf_type, g.is_software());
        g.members.retain(|m| !injection_points(self.ft, ty, sw, m).is_empty());
        let key = (g.ccf_type, dedup_key, g.failure_type);
        if let Some(&i) = self.seen.get(&key) {
            let existing = &mut self.groups[i];
            for m in g.members {
                if !existing.members.contains(&m) {
                    existing.members.push(m);
                }
            }
            return;
        }
        if g.members.len() < 2 {
            return;
        }
        self.seen.insert(key, self.groups.len());
        self.groups.push(g);
    }
}

/// Detects CCF groups on an integrated tree, in rule order (Type 4, Type 2,
/// Type 3, Type 1), each rule in model declaration order.
///
/// Type-2 groups are keyed by the upstream component's design class, so
/// replicated copies of one component yield a single group whose members
/// span every division.
pub fn detect_ccf_groups(ft: &FaultTree, model: &SystemModel, instances: &[UcaUifInstance]) -> Vec<CcfGroup> {
    let mut col = Collector { ft, groups: Vec::new(), seen: BTreeMap::new() };
    let index = model.component_index();
    let class_of = |owner: &str| index.get(owner).map(|p| p.component.design_class.clone());

    // Type 4: same design class, same failure type, several divisions.
    for class in &model.design_classes {
        for ty in FailureModeType::ALL {
            let members: Vec<&UcaUifInstance> = instances
                .iter()
                .filter(|i| i.failure_type == ty && class_of(&i.owner).as_deref() == Some(&class.id))
                .collect();
            let divisions: BTreeSet<&str> = members.iter().map(|i| i.division.as_str()).collect();
            if divisions.len() < 2 {
                continue;
            }
            col.push(
                CcfGroup {
                    id: format!("T4-{}-{ty}", class.id),
                    ccf_type: CcfType::Type4,
                    scope: RedundancyLevel::System,
                    trigger: CcfTrigger { kind: TriggerKind::DesignClass, id: class.id.clone() },
                    members: members.iter().map(|i| i.id.clone()).collect(),
                    failure_type: Some(ty),
                },
                class.id.clone(),
            );
        }
    }

    // Type 2: a component whose output reaches several software-bearing
    // components of its division.
    let mut types_of: BTreeMap<&str, BTreeSet<FailureModeType>> = BTreeMap::new();
    for i in instances {
        types_of.entry(i.owner.as_str()).or_default().insert(i.failure_type);
    }
    let mut trigger_of_class: BTreeMap<String, String> = BTreeMap::new();
    for p in model.components() {
        let c = p.component;
        if c.tech != Tech::Digital || c.stub {
            continue;
        }
        let Some(types) = types_of.get(c.id.as_str()) else { continue };
        let dependents = digital_dependents(model, &c.id);
        if dependents.len() < 2 {
            continue;
        }
        let trigger = trigger_of_class.entry(c.design_class.clone()).or_insert_with(|| c.id.clone()).clone();
        for &ty in types {
            col.push(
                CcfGroup {
                    id: format!("T2-{trigger}-{ty}"),
                    ccf_type: CcfType::Type2,
                    scope: RedundancyLevel::Division,
                    trigger: CcfTrigger { kind: TriggerKind::Component, id: trigger.clone() },
                    members: dependents.clone(),
                    failure_type: Some(ty),
                },
                c.design_class.clone(),
            );
        }
    }
    for r in model.shared_resources.iter().filter(|r| r.scope == ResourceScope::Internal) {
        col.push(
            CcfGroup {
                id: format!("T2-{}", r.id),
                ccf_type: CcfType::Type2,
                scope: RedundancyLevel::Division,
                trigger: CcfTrigger { kind: TriggerKind::SharedResource, id: r.id.clone() },
                members: r.dependents.clone(),
                failure_type: None,
            },
            r.id.clone(),
        );
    }

    // Type 3: external shared resources.
    for r in model.shared_resources.iter().filter(|r| r.scope == ResourceScope::External) {
        col.push(
            CcfGroup {
                id: format!("T3-{}", r.id),
                ccf_type: CcfType::Type3,
                scope: RedundancyLevel::System,
                trigger: CcfTrigger { kind: TriggerKind::SharedResource, id: r.id.clone() },
                members: r.dependents.clone(),
                failure_type: None,
            },
            r.id.clone(),
        );
    }

    // Type 1: one control action fanning out to several targets.
    for p in model.components() {
        let c = &p.component.id;
        for (link, targets) in multi_target_actions(model, c) {
            let types = model
                .components()
                .flat_map(|p| p.component.links.iter())
                .find(|l| l.id == link)
                .map(|l| l.applicability.keys().copied().collect::<Vec<_>>())
                .unwrap_or_default();
            for ty in types {
                col.push(
                    CcfGroup {
                        id: format!("T1-{c}-{ty}"),
                        ccf_type: CcfType::Type1,
                        scope: RedundancyLevel::Division,
                        trigger: CcfTrigger { kind: TriggerKind::Controller, id: c.clone() },
                        members: targets.clone(),
                        failure_type: Some(ty),
                    },
                    c.clone(),
                );
            }
        }
    }
    col.groups
}

/// Adds one shared basic event per group as an OR-sibling at every member
/// location. An empty group list returns the tree unchanged.
pub fn inject_ccf_events(ft: &FaultTree, groups: &[CcfGroup]) -> Result<FaultTree, CcfError> {
    let mut out = ft.clone();
    if groups.is_empty() {
        return Ok(out);
    }
    for g in groups {
        let mut points = Vec::new();
        for m in &g.members {
            let p = injection_points(ft, g.ccf_type, g.is_software(), m);
            if p.is_empty() {
                return Err(CcfError::MemberNotInTree { group: g.id.clone(), member: m.clone() });
            }
            points.extend(p);
        }
        let label = match g.failure_type {
            Some(ty) => format!(
                "{} CCF: {} {} type {ty} ({})",
                g.ccf_type,
                trigger_noun(g.trigger.kind),
                g.trigger.id,
                ty.description()
            ),
            None => format!("{} CCF: {} {}", g.ccf_type, trigger_noun(g.trigger.kind), g.trigger.id),
        };
        let event = out.add_event(g.event_id(), label, EventCategory::Ccf, g.is_software(), None)?;
        for p in points {
            out.add_child(p, event)?;
        }
    }
    out.metadata.ccf_injected = true;
    Ok(out)
}

fn trigger_noun(kind: TriggerKind) -> &'static str {
    match kind {
        TriggerKind::DesignClass => "shared design",
        TriggerKind::Component => "shared upstream",
        TriggerKind::SharedResource => "shared resource",
        TriggerKind::Controller => "commanding controller",
    }
}

/// Group counts per type.
pub fn count_by_type(groups: &[CcfGroup]) -> BTreeMap<CcfType, usize> {
    let mut out = BTreeMap::new();
    for g in groups {
        *out.entry(g.ccf_type).or_insert(0) += 1;
    }
    out
}

/// `id,type,scope,trigger,members,failure_type` rows; members `;`-joined.
pub fn ccf_csv(groups: &[CcfGroup]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let _ = w.write_record(["id", "type", "scope", "trigger", "members", "failure_type"]);
    for g in groups {
        let _ = w.write_record([
            g.id.clone(),
            g.ccf_type.number().to_string(),
            g.scope.keyword().to_string(),
            g.trigger.id.clone(),
            g.members.join(";"),
            g.failure_type.map(|t| t.to_string()).unwrap_or_default(),
        ]);
    }
    String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
}

pub fn ccf_json(groups: &[CcfGroup]) -> String {
    let mut s = serde_json::to_string_pretty(groups).unwrap_or_default();
    s.push('\n');
    s
}
