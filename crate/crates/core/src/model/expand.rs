use std::collections::BTreeSet;

use super::{Component, Division, LinkRef, ModelError, RedundancyGroup, SystemModel};

/// Materializes every `replicates` declaration as a deep copy of its source.
///
/// Copied ids take the replicating division's id as suffix: a trailing
/// `_<source>` is swapped for `_<target>`, anything else gets `_<target>`
/// appended. Design classes are never renamed. Redundancy groups made only of
/// source-division components are copied alongside. The result contains no
/// `replicates` declarations, so expanding twice equals expanding once.
pub fn expand_replication(model: &SystemModel) -> Result<SystemModel, ModelError> {
    let mut out = model.clone();
    for (idx, division) in model.divisions.iter().enumerate() {
        let Some(source_id) = &division.replicates else { continue };
        let source = model.division(source_id).ok_or_else(|| ModelError::UnknownReplicationSource {
            division: division.id.clone(),
            source_division: source_id.clone(),
        })?;
        if source.replicates.is_some() {
            return Err(ModelError::ChainedReplication {
                division: division.id.clone(),
                source_division: source_id.clone(),
            });
        }
        let renamer = Renamer::new(source, &division.id);
        out.divisions[idx] = Division {
            id: division.id.clone(),
            components: source.components.iter().map(|c| renamer.component(c)).collect(),
            replicates: None,
            origin: division.origin.clone(),
        };

        let mut groups = Vec::with_capacity(out.redundancy_groups.len());
        for group in out.redundancy_groups.drain(..) {
            let copy = (!group.members.is_empty() && group.members.iter().all(|m| renamer.local.contains(m.as_str())))
                .then(|| RedundancyGroup {
                    id: renamer.suffix(&group.id),
                    members: group.members.iter().map(|m| renamer.id(m)).collect(),
                    ..group.clone()
                });
            groups.push(group);
            groups.extend(copy);
        }
        out.redundancy_groups = groups;
    }
    Ok(out)
}

struct Renamer<'a> {
    source: &'a str,
    target: &'a str,
    local: BTreeSet<&'a str>,
}

impl<'a> Renamer<'a> {
    fn new(source: &'a Division, target: &'a str) -> Self {
        Renamer { source: &source.id, target, local: source.components.iter().map(|c| c.id.as_str()).collect() }
    }

    fn suffix(&self, id: &str) -> String {
        let tail = format!("_{}", self.source);
        match id.strip_suffix(&tail) {
            Some(stem) if !stem.is_empty() => format!("{stem}_{}", self.target),
            _ => format!("{id}_{}", self.target),
        }
    }

    /// Renames component references local to the source division only.
    fn id(&self, id: &str) -> String {
        if self.local.contains(id) {
            self.suffix(id)
        } else {
            id.to_string()
        }
    }

    fn link_ref(&self, r: &LinkRef) -> LinkRef {
        LinkRef { component: self.id(&r.component), port: r.port.clone() }
    }

    fn component(&self, c: &Component) -> Component {
        Component {
            id: self.suffix(&c.id),
            inputs: c.inputs.iter().map(|r| self.link_ref(r)).collect(),
            feedback_inputs: c.feedback_inputs.iter().map(|r| self.link_ref(r)).collect(),
            links: c
                .links
                .iter()
                .map(|l| super::Link {
                    id: self.suffix(&l.id),
                    targets: l.targets.iter().map(|t| self.id(t)).collect(),
                    ..l.clone()
                })
                .collect(),
            ..c.clone()
        }
    }
}
