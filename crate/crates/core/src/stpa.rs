//! Control-structure extraction and UCA/UIF enumeration.
//!
//! Every control action or information flow yields seven candidates, one per
//! [`FailureModeType`]. Which ones are real is an analyst decision recorded
//! in the model's `applicable:` lines; [`apply_applicability`] keeps those and
//! attaches their hazard links.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{ComponentKind, FailureModeType, LinkKind, RedundancyLevel, StpaCategory, SystemModel, Tech};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ControlNode {
    pub id: String,
    pub division: String,
    pub kind: ComponentKind,
    pub tech: Tech,
    /// Levels of every redundancy group covering this node.
    pub redundancy: Vec<RedundancyLevel>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ControlEdge {
    pub link: String,
    pub source: String,
    pub division: String,
    pub targets: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ControlStructure {
    pub nodes: Vec<ControlNode>,
    pub control_edges: Vec<ControlEdge>,
    pub info_edges: Vec<ControlEdge>,
}

impl ControlStructure {
    pub fn node(&self, id: &str) -> Option<&ControlNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn edges(&self) -> impl Iterator<Item = (LinkKind, &ControlEdge)> {
        self.control_edges
            .iter()
            .map(|e| (LinkKind::ControlAction, e))
            .chain(self.info_edges.iter().map(|e| (LinkKind::InformationFlow, e)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Flavor {
    /// Unsafe control action.
    #[serde(rename = "UCA")]
    Uca,
    /// Unsafe information flow.
    #[serde(rename = "UIF")]
    Uif,
}

impl Flavor {
    pub fn of(kind: LinkKind) -> Self {
        match kind {
            LinkKind::ControlAction => Flavor::Uca,
            LinkKind::InformationFlow => Flavor::Uif,
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flavor::Uca => "UCA",
            Flavor::Uif => "UIF",
        })
    }
}

/// One failure-mode candidate bound to the component that emits it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UcaUifInstance {
    pub id: String,
    pub flavor: Flavor,
    pub failure_type: FailureModeType,
    pub owner: String,
    pub division: String,
    pub link: String,
    pub hazards: Vec<String>,
    pub stpa_category: StpaCategory,
}

impl UcaUifInstance {
    pub fn make_id(link: &str, ty: FailureModeType, division: &str) -> String {
        format!("{link}:{ty}:{division}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StpaError {
    #[error("applicable instance lacks hazard link: {instance}")]
    MissingHazard { instance: String },
    #[error("candidate {instance} refers to unknown link `{link}`")]
    UnknownLink { instance: String, link: String },
}

/// Components that source or receive a control action or information flow,
/// plus the operator. Pure pass-through hardware that neither emits nor
/// receives a link stays out.
pub fn extract_control_structure(model: &SystemModel) -> ControlStructure {
    let mut endpoints = std::collections::BTreeSet::new();
    let mut cs = ControlStructure::default();
    for (p, link) in model.links() {
        endpoints.insert(p.component.id.as_str());
        endpoints.extend(link.targets.iter().map(String::as_str));
        let edge = ControlEdge {
            link: link.id.clone(),
            source: p.component.id.clone(),
            division: p.division.id.clone(),
            targets: link.targets.clone(),
        };
        match link.kind {
            LinkKind::ControlAction => cs.control_edges.push(edge),
            LinkKind::InformationFlow => cs.info_edges.push(edge),
        }
    }
    for p in model.components() {
        let c = p.component;
        if c.kind != ComponentKind::Operator && !endpoints.contains(c.id.as_str()) {
            continue;
        }
        let mut redundancy: Vec<RedundancyLevel> = model
            .redundancy_groups
            .iter()
            .filter(|g| g.members.iter().any(|m| *m == c.id || *m == p.division.id))
            .map(|g| g.level)
            .collect();
        redundancy.sort();
        redundancy.dedup();
        cs.nodes.push(ControlNode {
            id: c.id.clone(),
            division: p.division.id.clone(),
            kind: c.kind,
            tech: c.tech,
            redundancy,
        });
    }
    cs
}

/// All seven failure-mode candidates for every edge, unfiltered.
pub fn enumerate_candidates(cs: &ControlStructure) -> Vec<UcaUifInstance> {
    cs.edges()
        .flat_map(|(kind, edge)| {
            FailureModeType::ALL.into_iter().map(move |ty| UcaUifInstance {
                id: UcaUifInstance::make_id(&edge.link, ty, &edge.division),
                flavor: Flavor::of(kind),
                failure_type: ty,
                owner: edge.source.clone(),
                division: edge.division.clone(),
                link: edge.link.clone(),
                hazards: Vec::new(),
                stpa_category: ty.stpa_category(),
            })
        })
        .collect()
}

/// Keeps the candidates declared applicable on their link and attaches the
/// declared hazards. Output is sorted by (division, owner, type, link).
pub fn apply_applicability(
    candidates: &[UcaUifInstance],
    model: &SystemModel,
) -> Result<Vec<UcaUifInstance>, StpaError> {
    let links: BTreeMap<&str, _> = model.links().map(|(_, l)| (l.id.as_str(), l)).collect();
    let mut out = Vec::new();
    for cand in candidates {
        let link = links
            .get(cand.link.as_str())
            .ok_or_else(|| StpaError::UnknownLink { instance: cand.id.clone(), link: cand.link.clone() })?;
        let Some(hazards) = link.applicability.get(&cand.failure_type) else { continue };
        if hazards.is_empty() {
            return Err(StpaError::MissingHazard { instance: cand.id.clone() });
        }
        out.push(UcaUifInstance { hazards: hazards.clone(), ..cand.clone() });
    }
    out.sort_by(|a, b| {
        (&a.division, &a.owner, a.failure_type, &a.link).cmp(&(&b.division, &b.owner, b.failure_type, &b.link))
    });
    Ok(out)
}

/// Extract, enumerate and filter in one go.
pub fn applicable_instances(model: &SystemModel) -> Result<Vec<UcaUifInstance>, StpaError> {
    let cs = extract_control_structure(model);
    apply_applicability(&enumerate_candidates(&cs), model)
}

/// Loss-hazard-instance traceability matrix as CSV.
pub fn traceability_csv(instances: &[UcaUifInstance], model: &SystemModel) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    // Writes into memory cannot fail.
    let _ = w.write_record(["instance", "flavor", "type", "owner", "link", "hazards", "losses"]);
    for i in instances {
        let _ = w.write_record([
            i.id.as_str(),
            &i.flavor.to_string(),
            &i.failure_type.to_string(),
            &i.owner,
            &i.link,
            &i.hazards.join(";"),
            &model.losses_for(&i.hazards).join(";"),
        ]);
    }
    String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_model;

    const ONE_CA: &str = r#"
system "X"
top_event "T"
loss L-1 "l"
hazard H-1 "h" losses: L-1
division A {
  component CTRL kind: controller tech: digital class: C {
    feedback: S
    control_action REF -> S {
      applicable: A, F hazards: H-1
    }
  }
  component S kind: sensor tech: analog class: C {
    inputs: CTRL
  }
  component ADC kind: converter tech: analog class: C {
    inputs: S
  }
  component OP kind: operator tech: human class: H {
    inputs: ADC
  }
}
"#;

    #[test]
    fn single_control_action() {
        let m = parse_model(ONE_CA).unwrap();
        let cs = extract_control_structure(&m);
        let ids: Vec<_> = cs.nodes.iter().map(|n| n.id.as_str()).collect();
        assert_eq!(ids, ["CTRL", "S", "OP"]);
        let cands = enumerate_candidates(&cs);
        assert_eq!(cands.len(), 7);
        assert!(cands.iter().all(|c| c.flavor == Flavor::Uca));
        let applicable = apply_applicability(&cands, &m).unwrap();
        let types: Vec<_> = applicable.iter().map(|i| i.failure_type).collect();
        assert_eq!(types, [FailureModeType::A, FailureModeType::F]);
        assert_eq!(applicable[0].id, "REF:A:A");
        assert_eq!(applicable[0].hazards, ["H-1"]);
    }

    #[test]
    fn no_links_leaves_only_the_operator() {
        let m = parse_model("division A {\n  component OP kind: operator tech: human class: H\n}\n").unwrap();
        let cs = extract_control_structure(&m);
        assert_eq!(cs.nodes.len(), 1);
        assert!(enumerate_candidates(&cs).is_empty());
    }

    #[test]
    fn applicable_without_hazard_is_an_error() {
        let m = parse_model(&ONE_CA.replace("applicable: A, F hazards: H-1", "applicable: G")).unwrap();
        let cs = extract_control_structure(&m);
        let err = apply_applicability(&enumerate_candidates(&cs), &m).unwrap_err();
        assert!(err.to_string().starts_with("applicable instance lacks hazard link"));
    }

    #[test]
    fn traceability_rows() {
        let m = parse_model(ONE_CA).unwrap();
        let inst = applicable_instances(&m).unwrap();
        let csv = traceability_csv(&inst, &m);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "instance,flavor,type,owner,link,hazards,losses");
        assert_eq!(lines[1], "REF:A:A,UCA,A,CTRL,REF,H-1,L-1");
        assert_eq!(lines.len(), 3);
    }
}
