//! Hardware fault-tree synthesis and software integration.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{EventCategory, FaultTree, FtError, GateOp, GateRole, NodeRef};
use crate::model::{Component, ComponentKind, GroupLogic, LinkRef, Placed, RedundancyGroup, SystemModel, Tech};
use crate::stpa::{Flavor, UcaUifInstance};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthOptions {
    pub include_hw_design: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchCensus {
    pub hw_stochastic_events: usize,
    pub dependency_branches: usize,
    pub sw_design_branches: usize,
    pub hw_design_branches: usize,
}

/// Builds the hardware fault tree of an expanded model.
///
/// Each component reachable upstream of the operator gets one shared
/// `Fail(C)` gate: OR of a stochastic event, a design event (when enabled),
/// a dependency gate over its non-feedback inputs, and an empty software
/// placeholder for digital components. Inputs that belong to one redundancy
/// group are combined per the group's logic before entering the OR.
pub fn synthesize_hardware_ft(model: &SystemModel, options: SynthOptions) -> Result<FaultTree, FtError> {
    if model.has_replication() {
        return Err(FtError::NotExpanded);
    }
    if model.top_event.trim().is_empty() {
        return Err(FtError::UnresolvedTopEvent);
    }
    let operator =
        model.components().find(|p| p.component.kind == ComponentKind::Operator).ok_or(FtError::MissingOperator)?;
    if operator.component.inputs.is_empty() {
        return Err(FtError::NoSources(operator.component.id.clone()));
    }

    let mut b = Builder {
        model,
        index: model.component_index(),
        options,
        ft: FaultTree::new(),
        fail: BTreeMap::new(),
        in_progress: Vec::new(),
    };
    b.ft.metadata.model = model.name.clone();
    b.ft.metadata.top_event = model.top_event.clone();
    b.ft.metadata.include_hw_design = options.include_hw_design;

    let children = b.combine_inputs(operator.component, "TOP")?;
    let root = match children.as_slice() {
        [only] if b.ft.node(*only).is_gate() => *only,
        _ => {
            let top = b.ft.add_gate("TOP", model.top_event.clone(), GateOp::Or, GateRole::Top, None)?;
            for c in children {
                b.ft.add_child(top, c)?;
            }
            top
        }
    };
    b.ft.set_root(root)?;
    Ok(b.ft)
}

struct Builder<'m> {
    model: &'m SystemModel,
    index: BTreeMap<&'m str, Placed<'m>>,
    options: SynthOptions,
    ft: FaultTree,
    fail: BTreeMap<String, NodeRef>,
    in_progress: Vec<String>,
}

impl<'m> Builder<'m> {
    fn fail(&mut self, id: &str) -> Result<NodeRef, FtError> {
        if let Some(r) = self.fail.get(id) {
            return Ok(*r);
        }
        if self.in_progress.iter().any(|p| p == id) {
            return Err(FtError::Cycle(id.to_string()));
        }
        let placed = *self.index.get(id).ok_or_else(|| FtError::UnknownComponent(id.to_string()))?;
        let c = placed.component;
        self.in_progress.push(id.to_string());

        let node = if c.stub {
            self.ft.add_event(
                format!("{id}/unavailable"),
                format!("{id} output unavailable (outside analysis scope)"),
                EventCategory::DependencyLeaf,
                false,
                Some(id),
            )?
        } else {
            let gate = self.ft.add_gate(
                format!("{id}/fail"),
                format!("{id} fails"),
                GateOp::Or,
                GateRole::Failure,
                Some(id),
            )?;
            let stoch = self.ft.add_event(
                format!("{id}/hw_stochastic"),
                format!("{id} random hardware failure"),
                EventCategory::HwStochastic,
                false,
                Some(id),
            )?;
            self.ft.add_child(gate, stoch)?;
            if self.options.include_hw_design {
                let design = self.ft.add_event(
                    format!("{id}/hw_design"),
                    format!("{id} hardware design failure"),
                    EventCategory::HwDesign,
                    false,
                    Some(id),
                )?;
                self.ft.add_child(gate, design)?;
            }
            if !c.inputs.is_empty() {
                let children = self.combine_inputs(c, &format!("{id}/dep"))?;
                let dep = self.ft.add_gate(
                    format!("{id}/dep"),
                    format!("{id} loses or receives corrupt inputs"),
                    GateOp::Or,
                    GateRole::Dependency,
                    Some(id),
                )?;
                for child in children {
                    self.ft.add_child(dep, child)?;
                }
                self.ft.add_child(gate, dep)?;
            }
            if c.tech == Tech::Digital {
                let sw = self.ft.add_gate(
                    format!("{id}/sw"),
                    format!("{id} software design failure"),
                    GateOp::Or,
                    GateRole::Software,
                    Some(id),
                )?;
                self.ft.add_child(gate, sw)?;
            }
            gate
        };
        self.in_progress.pop();
        self.fail.insert(id.to_string(), node);
        Ok(node)
    }

    /// Children for a gate over `consumer`'s inputs: one `Fail` node per
    /// distinct input, with redundancy-group members folded into sub-gates
    /// placed at the position of their first member.
    fn combine_inputs(&mut self, consumer: &Component, prefix: &str) -> Result<Vec<NodeRef>, FtError> {
        let inputs = distinct_inputs(&consumer.inputs);
        for i in &inputs {
            if !self.index.contains_key(i.as_str()) {
                return Err(FtError::UnknownComponent(i.clone()));
            }
        }

        // For each input, the group it joins and the member it represents.
        let model = self.model;
        let mut assignment: BTreeMap<&str, (&RedundancyGroup, String)> = BTreeMap::new();
        for group in &model.redundancy_groups {
            let matched: Vec<(&str, String)> = inputs
                .iter()
                .filter(|i| !assignment.contains_key(i.as_str()))
                .filter_map(|i| self.member_of(group, i).map(|m| (i.as_str(), m)))
                .collect();
            let mut members: Vec<&String> = matched.iter().map(|(_, m)| m).collect();
            members.sort();
            members.dedup();
            if members.len() >= 2 {
                for (i, m) in matched {
                    assignment.insert(i, (group, m));
                }
            }
        }

        let mut children = Vec::new();
        let mut placed_groups: BTreeMap<&str, ()> = BTreeMap::new();
        for input in &inputs {
            match assignment.get(input.as_str()) {
                None => children.push(self.fail(input)?),
                Some((group, _)) => {
                    if placed_groups.insert(group.id.as_str(), ()).is_some() {
                        continue;
                    }
                    // Members in first-appearance order, each with its inputs.
                    let mut members: Vec<(String, Vec<&str>)> = Vec::new();
                    for i in &inputs {
                        if let Some((g, m)) = assignment.get(i.as_str()) {
                            if g.id != group.id {
                                continue;
                            }
                            match members.iter_mut().find(|(mm, _)| mm == m) {
                                Some((_, v)) => v.push(i.as_str()),
                                None => members.push((m.clone(), vec![i.as_str()])),
                            }
                        }
                    }
                    let op = match group.logic {
                        GroupLogic::AllMustFail => GateOp::And,
                        GroupLogic::AnyMisleads => GateOp::Or,
                    };
                    let gid = format!("{prefix}/grp/{}", group.id);
                    let sub = self.ft.add_gate(
                        gid.clone(),
                        format!("{} redundancy group {} ({})", consumer.id, group.id, group.logic),
                        op,
                        GateRole::Group,
                        Some(&consumer.id),
                    )?;
                    for (member, member_inputs) in members {
                        let child = if member_inputs.len() == 1 {
                            self.fail(member_inputs[0])?
                        } else {
                            let mg = self.ft.add_gate(
                                format!("{gid}/{member}"),
                                format!("{member} contribution to {}", consumer.id),
                                GateOp::Or,
                                GateRole::Group,
                                Some(&consumer.id),
                            )?;
                            for i in member_inputs {
                                let f = self.fail(i)?;
                                self.ft.add_child(mg, f)?;
                            }
                            mg
                        };
                        self.ft.add_child(sub, child)?;
                    }
                    children.push(sub);
                }
            }
        }
        Ok(children)
    }

    /// The group member an input component stands for: the component itself
    /// if listed, else its division if listed.
    fn member_of(&self, group: &RedundancyGroup, input: &str) -> Option<String> {
        if group.members.iter().any(|m| m == input) {
            return Some(input.to_string());
        }
        let division = &self.index.get(input)?.division.id;
        group.members.iter().find(|m| *m == division).cloned()
    }
}

fn distinct_inputs(refs: &[LinkRef]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for r in refs {
        if !out.contains(&r.component) {
            out.push(r.component.clone());
        }
    }
    out
}

/// Counts branches reachable from the root, each shared subtree once.
pub fn branch_census(ft: &FaultTree) -> BranchCensus {
    let mut census = BranchCensus::default();
    for r in ft.reachable() {
        let node = ft.node(r);
        match (node.role(), node.category()) {
            (Some(GateRole::Dependency), _) => census.dependency_branches += 1,
            (Some(GateRole::Software), _) => census.sw_design_branches += 1,
            (_, Some(EventCategory::HwStochastic)) => census.hw_stochastic_events += 1,
            (_, Some(EventCategory::HwDesign)) => census.hw_design_branches += 1,
            _ => {}
        }
    }
    census
}

/// Hangs each applicable UCA/UIF as a basic event under its owner's
/// software-design gate. Because that gate sits inside the owner's shared
/// `Fail` subtree, the event appears wherever the owner's failure matters.
pub fn integrate_software(ft: &FaultTree, instances: &[UcaUifInstance]) -> Result<FaultTree, FtError> {
    let mut out = ft.clone();
    for inst in instances {
        let gate =
            out.find(&format!("{}/sw", inst.owner)).ok_or_else(|| FtError::OwnerNotInTree(inst.owner.clone()))?;
        let event = match out.find(&inst.id) {
            Some(e) => e,
            None => out.add_event(
                inst.id.clone(),
                format!(
                    "{} {} type {}: {}",
                    inst.owner,
                    inst.flavor,
                    inst.failure_type,
                    inst.failure_type.description()
                ),
                match inst.flavor {
                    Flavor::Uca => EventCategory::SwUca,
                    Flavor::Uif => EventCategory::SwUif,
                },
                true,
                Some(&inst.owner),
            )?,
        };
        out.add_child(gate, event)?;
    }
    out.metadata.software_integrated = true;
    Ok(out)
}
