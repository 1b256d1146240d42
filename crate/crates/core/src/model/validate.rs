use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::{
    expand_replication, is_valid_id, ComponentKind, GroupLogic, LinkKind, Origin, SourceSpan, SystemModel, Tech,
};

/// One broken invariant, located in the model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Dotted path of the offending element, e.g. `division A / component X`.
    pub location: String,
    pub message: String,
    pub span: Option<SourceSpan>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(span) = &self.span {
            write!(f, "{span}: ")?;
        }
        write!(f, "{}: {}", self.location, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn messages(&self) -> impl Iterator<Item = &str> {
        self.violations.iter().map(|v| v.message.as_str())
    }

    fn push(&mut self, location: impl Into<String>, message: impl Into<String>, origin: &Origin) {
        self.violations.push(Violation {
            location: location.into(),
            message: message.into(),
            span: origin.span().cloned(),
        });
    }
}

/// Checks every model invariant. Never fails: problems become report entries.
///
/// Replication is resolved internally, so references to components that only
/// exist after expansion are accepted.
pub fn validate_model(model: &SystemModel) -> ValidationReport {
    let mut report = ValidationReport::default();
    let none = Origin::default();

    if model.name.is_empty() {
        report.push("system", "missing system name", &none);
    }
    if model.top_event.is_empty() {
        report.push("top_event", "missing top event", &none);
    }

    check_unique(&mut report, "loss", model.losses.iter().map(|l| (&l.id, &l.origin)));
    check_unique(&mut report, "hazard", model.hazards.iter().map(|h| (&h.id, &h.origin)));
    check_unique(&mut report, "design_class", model.design_classes.iter().map(|c| (&c.id, &c.origin)));
    check_unique(&mut report, "division", model.divisions.iter().map(|d| (&d.id, &d.origin)));
    check_unique(&mut report, "redundancy_group", model.redundancy_groups.iter().map(|g| (&g.id, &g.origin)));
    check_unique(&mut report, "shared_resource", model.shared_resources.iter().map(|r| (&r.id, &r.origin)));

    let loss_ids: BTreeSet<&str> = model.losses.iter().map(|l| l.id.as_str()).collect();
    for loss in &model.losses {
        if !matches_numbered(&loss.id, "L-") {
            report.push(format!("loss {}", loss.id), "loss id must look like L-<n>", &loss.origin);
        }
    }
    for hazard in &model.hazards {
        let loc = format!("hazard {}", hazard.id);
        if !matches_numbered(&hazard.id, "H-") {
            report.push(&loc, "hazard id must look like H-<n>", &hazard.origin);
        }
        if hazard.linked_losses.is_empty() {
            report.push(&loc, "hazard has no linked losses", &hazard.origin);
        }
        for l in &hazard.linked_losses {
            if !loss_ids.contains(l.as_str()) {
                report.push(&loc, format!("unresolved loss reference `{l}`"), &hazard.origin);
            }
        }
    }

    // Replication problems are reported here and neutralized so that the
    // remaining checks can run on a best-effort expansion.
    let mut sanitized = model.clone();
    for division in &mut sanitized.divisions {
        let Some(src) = division.replicates.clone() else { continue };
        let loc = format!("division {}", division.id);
        if !division.components.is_empty() {
            report.push(&loc, "replicating division declares components", &division.origin);
        }
        match model.division(&src) {
            None => {
                report.push(&loc, format!("replicates unknown division `{src}`"), &division.origin);
                division.replicates = None;
            }
            Some(s) if s.replicates.is_some() => {
                report.push(&loc, "chained replication unsupported", &division.origin);
                division.replicates = None;
            }
            Some(s) if s.id == division.id => {
                report.push(&loc, "division replicates itself", &division.origin);
                division.replicates = None;
            }
            Some(_) => {}
        }
    }
    let expanded = match expand_replication(&sanitized) {
        Ok(m) => m,
        Err(e) => {
            report.push("model", e.to_string(), &none);
            sanitized
        }
    };
    check_expanded(&expanded, &mut report);
    report
}

fn matches_numbered(id: &str, prefix: &str) -> bool {
    id.strip_prefix(prefix).is_some_and(|n| !n.is_empty() && n.chars().all(|c| c.is_ascii_digit()))
}

fn check_unique<'a>(report: &mut ValidationReport, what: &str, items: impl Iterator<Item = (&'a String, &'a Origin)>) {
    let mut seen = BTreeSet::new();
    for (id, origin) in items {
        if !is_valid_id(id) {
            report.push(format!("{what} {id}"), "invalid identifier", origin);
        }
        if !seen.insert(id.as_str()) {
            report.push(format!("{what} {id}"), "duplicate id", origin);
        }
    }
}

fn check_expanded(model: &SystemModel, report: &mut ValidationReport) {
    let class_ids: BTreeSet<&str> = model.design_classes.iter().map(|c| c.id.as_str()).collect();
    let hazard_ids: BTreeSet<&str> = model.hazards.iter().map(|h| h.id.as_str()).collect();
    let division_ids: BTreeSet<&str> = model.divisions.iter().map(|d| d.id.as_str()).collect();
    let index = model.component_index();

    let mut seen_components = BTreeSet::new();
    let mut seen_links = BTreeSet::new();
    for p in model.components() {
        let c = p.component;
        let loc = format!("division {} / component {}", p.division.id, c.id);
        if !is_valid_id(&c.id) {
            report.push(&loc, "invalid identifier", &c.origin);
        }
        if !seen_components.insert(c.id.as_str()) {
            report.push(&loc, "duplicate id", &c.origin);
        }
        if !class_ids.contains(c.design_class.as_str()) {
            report.push(&loc, format!("unresolved design class `{}`", c.design_class), &c.origin);
        }
        for r in c.inputs.iter().chain(&c.feedback_inputs) {
            if !index.contains_key(r.component.as_str()) {
                report.push(&loc, format!("unresolved component reference `{}`", r.component), &c.origin);
            }
        }
        for link in &c.links {
            let lloc = format!("{loc} / link {}", link.id);
            if !seen_links.insert(link.id.as_str()) {
                report.push(&lloc, "duplicate id", &link.origin);
            }
            if link.kind == LinkKind::ControlAction && c.kind != ComponentKind::Controller {
                report.push(&lloc, "control action source is not a controller", &link.origin);
            }
            if link.targets.is_empty() {
                report.push(&lloc, "link has no targets", &link.origin);
            }
            for t in &link.targets {
                match index.get(t.as_str()) {
                    None => report.push(&lloc, format!("unresolved component reference `{t}`"), &link.origin),
                    Some(target) => {
                        let consumes = target
                            .component
                            .inputs
                            .iter()
                            .chain(&target.component.feedback_inputs)
                            .any(|r| r.component == c.id);
                        if !consumes {
                            report.push(&lloc, format!("link target `{t}` does not consume `{}`", c.id), &link.origin);
                        }
                    }
                }
            }
            if !link.applicability.is_empty() && c.tech != Tech::Digital {
                report.push(&lloc, "failure-mode declarations on non-digital component", &link.origin);
            }
            for (ty, hazards) in &link.applicability {
                if hazards.is_empty() {
                    report.push(&lloc, format!("applicable type {ty} lacks hazard link"), &link.origin);
                }
                for h in hazards {
                    if !hazard_ids.contains(h.as_str()) {
                        report.push(&lloc, format!("unresolved hazard reference `{h}`"), &link.origin);
                    }
                }
            }
        }
    }

    let operators = model.operators();
    if operators.len() != 1 {
        report.push(
            "model",
            format!("expected exactly one operator component, found {}", operators.len()),
            &Origin::default(),
        );
    }

    for cycle in dependency_cycles(model) {
        let origin = index.get(cycle[0].as_str()).map(|p| p.component.origin.clone()).unwrap_or_default();
        report.push(
            format!("component {}", cycle[0]),
            format!("dependency cycle through {}", cycle.join(" -> ")),
            &origin,
        );
    }

    // Everything upstream of a human consumer.
    let upstream = upstream_of_humans(model);

    for group in &model.redundancy_groups {
        let loc = format!("redundancy_group {}", group.id);
        if group.members.len() < 2 {
            report.push(&loc, "redundancy group needs at least two members", &group.origin);
        }
        for m in &group.members {
            if !division_ids.contains(m.as_str()) && !index.contains_key(m.as_str()) {
                report.push(&loc, format!("unresolved member `{m}`"), &group.origin);
            }
        }
        if group.logic == GroupLogic::AnyMisleads {
            let feeds_human = group.members.iter().all(|m| match model.division(m) {
                Some(d) => d.components.iter().any(|c| upstream.contains(c.id.as_str())),
                None => upstream.contains(m.as_str()),
            });
            if !feeds_human {
                report.push(&loc, "any_misleads group does not feed a human component", &group.origin);
            }
        }
    }

    for res in &model.shared_resources {
        let loc = format!("shared_resource {}", res.id);
        if res.dependents.len() < 2 {
            report.push(&loc, "shared resource needs at least two dependents", &res.origin);
        }
        for d in &res.dependents {
            if !index.contains_key(d.as_str()) {
                report.push(&loc, format!("unresolved component reference `{d}`"), &res.origin);
            }
        }
    }

    if operators.len() == 1 {
        for p in model.components() {
            let owns_modes = p.component.links.iter().any(|l| !l.applicability.is_empty());
            if owns_modes && !upstream.contains(p.component.id.as_str()) {
                report.push(
                    format!("division {} / component {}", p.division.id, p.component.id),
                    "failure-mode owner is unreachable from the operator",
                    &p.component.origin,
                );
            }
        }
    }
}

/// Component ids that transitively feed (via non-feedback inputs) a human.
pub(crate) fn upstream_of_humans(model: &SystemModel) -> BTreeSet<&str> {
    let index = model.component_index();
    let mut seen = BTreeSet::new();
    let mut stack: Vec<&str> =
        model.components().filter(|p| p.component.tech == Tech::Human).map(|p| p.component.id.as_str()).collect();
    while let Some(id) = stack.pop() {
        let Some(p) = index.get(id) else { continue };
        for r in &p.component.inputs {
            if seen.insert(r.component.as_str()) {
                stack.push(r.component.as_str());
            }
        }
    }
    seen
}

/// Strongly connected components of the non-feedback input graph that form
/// cycles, each reported as a sorted id list.
pub(crate) fn dependency_cycles(model: &SystemModel) -> Vec<Vec<String>> {
    let ids: Vec<&str> = model.components().map(|p| p.component.id.as_str()).collect();
    let pos: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let edges: Vec<Vec<usize>> = model
        .components()
        .map(|p| p.component.inputs.iter().filter_map(|r| pos.get(r.component.as_str()).copied()).collect())
        .collect();

    let mut tarjan = Tarjan {
        edges: &edges,
        index: vec![None; ids.len()],
        low: vec![0; ids.len()],
        on_stack: vec![false; ids.len()],
        stack: Vec::new(),
        next: 0,
        sccs: Vec::new(),
    };
    for v in 0..ids.len() {
        if tarjan.index[v].is_none() {
            tarjan.visit(v);
        }
    }
    let mut cycles: Vec<Vec<String>> = tarjan
        .sccs
        .into_iter()
        .filter(|scc| scc.len() > 1 || edges[scc[0]].contains(&scc[0]))
        .map(|scc| {
            let mut names: Vec<String> = scc.iter().map(|&i| ids[i].to_string()).collect();
            names.sort();
            names.dedup();
            names
        })
        .collect();
    cycles.sort();
    cycles
}

struct Tarjan<'a> {
    edges: &'a [Vec<usize>],
    index: Vec<Option<usize>>,
    low: Vec<usize>,
    on_stack: Vec<bool>,
    stack: Vec<usize>,
    next: usize,
    sccs: Vec<Vec<usize>>,
}

impl Tarjan<'_> {
    fn visit(&mut self, v: usize) {
        self.index[v] = Some(self.next);
        self.low[v] = self.next;
        self.next += 1;
        self.stack.push(v);
        self.on_stack[v] = true;
        for &w in &self.edges[v] {
            match self.index[w] {
                None => {
                    self.visit(w);
                    self.low[v] = self.low[v].min(self.low[w]);
                }
                Some(iw) if self.on_stack[w] => self.low[v] = self.low[v].min(iw),
                Some(_) => {}
            }
        }
        if Some(self.low[v]) == self.index[v] {
            let mut scc = Vec::new();
            while let Some(w) = self.stack.pop() {
                self.on_stack[w] = false;
                scc.push(w);
                if w == v {
                    break;
                }
            }
            self.sccs.push(scc);
        }
    }
}

/// Deterministic topological order of the non-feedback dependency graph,
/// sources first. `None` when the graph has a cycle.
pub fn dependency_order(model: &SystemModel) -> Option<Vec<String>> {
    let index = model.component_index();
    let mut indegree: BTreeMap<&str, usize> = index.keys().map(|k| (*k, 0)).collect();
    let mut consumers: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for p in model.components() {
        let inputs: BTreeSet<&str> =
            p.component.inputs.iter().map(|r| r.component.as_str()).filter(|r| index.contains_key(r)).collect();
        *indegree.get_mut(p.component.id.as_str())? = inputs.len();
        for i in inputs {
            consumers.entry(i).or_default().push(p.component.id.as_str());
        }
    }
    let mut ready: BTreeSet<&str> = indegree.iter().filter(|(_, d)| **d == 0).map(|(k, _)| *k).collect();
    let mut order = Vec::with_capacity(indegree.len());
    while let Some(id) = ready.pop_first() {
        order.push(id.to_string());
        for c in consumers.get(id).into_iter().flatten() {
            let d = indegree.get_mut(c)?;
            *d -= 1;
            if *d == 0 {
                ready.insert(c);
            }
        }
    }
    (order.len() == indegree.len()).then_some(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::*;

    fn comp(id: &str, kind: ComponentKind, tech: Tech, inputs: &[&str]) -> Component {
        Component {
            id: id.into(),
            kind,
            tech,
            design_class: "CLS".into(),
            stub: false,
            inputs: inputs.iter().map(|i| LinkRef::to(*i)).collect(),
            feedback_inputs: vec![],
            links: vec![],
            origin: Origin::default(),
        }
    }

    fn base() -> SystemModel {
        SystemModel {
            name: "X".into(),
            top_event: "T".into(),
            losses: vec![Loss { id: "L-1".into(), description: "l".into(), origin: Origin::default() }],
            hazards: vec![Hazard {
                id: "H-1".into(),
                description: "h".into(),
                linked_losses: vec!["L-1".into()],
                origin: Origin::default(),
            }],
            design_classes: vec![DesignClass {
                id: "CLS".into(),
                description: String::new(),
                diversity_tag: "t".into(),
                origin: Origin::default(),
            }],
            divisions: vec![Division {
                id: "A".into(),
                components: vec![
                    comp("S", ComponentKind::Sensor, Tech::Analog, &[]),
                    comp("OP", ComponentKind::Operator, Tech::Human, &["S"]),
                ],
                replicates: None,
                origin: Origin::default(),
            }],
            ..Default::default()
        }
    }

    #[test]
    fn clean_model_has_empty_report() {
        let r = validate_model(&base());
        assert!(r.is_empty(), "{:?}", r);
    }

    #[test]
    fn unresolved_loss_is_one_violation() {
        let mut m = base();
        m.hazards[0].linked_losses = vec!["L-9".into()];
        let r = validate_model(&m);
        assert_eq!(r.len(), 1, "{r:?}");
        assert!(r.violations[0].message.contains("unresolved loss reference"));
    }

    #[test]
    fn two_node_cycle_is_one_violation() {
        let mut m = base();
        let comps = &mut m.divisions[0].components;
        comps.push(comp("P", ComponentKind::Converter, Tech::Analog, &["Q"]));
        comps.push(comp("Q", ComponentKind::Converter, Tech::Analog, &["P"]));
        let r = validate_model(&m);
        assert_eq!(r.len(), 1, "{r:?}");
        assert!(r.violations[0].message.contains("dependency cycle"));
        assert!(dependency_order(&m).is_none());
    }

    #[test]
    fn feedback_edges_do_not_form_cycles() {
        let mut m = base();
        m.divisions[0].components[0].feedback_inputs.push(LinkRef::to("OP"));
        assert!(validate_model(&m).is_empty());
        assert_eq!(dependency_order(&m).unwrap(), ["S", "OP"]);
    }

    #[test]
    fn control_action_needs_controller_and_digital_applicability() {
        let mut m = base();
        let mut applicability = std::collections::BTreeMap::new();
        applicability.insert(FailureModeType::A, vec!["H-1".to_string()]);
        m.divisions[0].components[0].links.push(Link {
            id: "CA1".into(),
            kind: LinkKind::ControlAction,
            port: "out".into(),
            targets: vec!["OP".into()],
            applicability,
            origin: Origin::default(),
        });
        let r = validate_model(&m);
        let msgs: Vec<_> = r.messages().collect();
        assert!(msgs.iter().any(|m| m.contains("not a controller")));
        assert!(msgs.iter().any(|m| m.contains("non-digital")));
    }

    #[test]
    fn operator_required_once() {
        let mut m = base();
        m.divisions[0].components.pop();
        let r = validate_model(&m);
        assert!(r.messages().any(|m| m.contains("exactly one operator")));
    }

    #[test]
    fn references_into_replicated_division_resolve() {
        let mut m = base();
        m.divisions[0].components.retain(|c| c.kind != ComponentKind::Operator);
        m.divisions[0].components[0].id = "S_A".into();
        m.divisions.push(Division {
            id: "B".into(),
            components: vec![],
            replicates: Some("A".into()),
            origin: Origin::default(),
        });
        m.divisions.push(Division {
            id: "MCR".into(),
            components: vec![comp("OP", ComponentKind::Operator, Tech::Human, &["S_A", "S_B"])],
            replicates: None,
            origin: Origin::default(),
        });
        let r = validate_model(&m);
        assert!(r.is_empty(), "{r:?}");
    }

    #[test]
    fn groups_and_resources_need_two_members() {
        let mut m = base();
        m.redundancy_groups.push(RedundancyGroup {
            id: "G".into(),
            level: RedundancyLevel::System,
            members: vec!["A".into()],
            logic: GroupLogic::AllMustFail,
            origin: Origin::default(),
        });
        m.shared_resources.push(SharedResource {
            id: "BUS".into(),
            scope: ResourceScope::External,
            dependents: vec!["S".into()],
            origin: Origin::default(),
        });
        assert_eq!(validate_model(&m).len(), 2);
    }

    #[test]
    fn any_misleads_must_feed_human() {
        let mut m = base();
        let comps = &mut m.divisions[0].components;
        comps.push(comp("X1", ComponentKind::Display, Tech::Analog, &[]));
        comps.push(comp("X2", ComponentKind::Display, Tech::Analog, &[]));
        m.redundancy_groups.push(RedundancyGroup {
            id: "G".into(),
            level: RedundancyLevel::Module,
            members: vec!["X1".into(), "X2".into()],
            logic: GroupLogic::AnyMisleads,
            origin: Origin::default(),
        });
        let r = validate_model(&m);
        assert!(r.messages().any(|m| m.contains("does not feed a human")), "{r:?}");
    }

    #[test]
    fn garbage_model_never_panics() {
        let m = SystemModel {
            divisions: vec![Division {
                id: "".into(),
                components: vec![comp("", ComponentKind::Alarm, Tech::Digital, &["", "nope"])],
                replicates: Some("".into()),
                origin: Origin::default(),
            }],
            ..Default::default()
        };
        assert!(!validate_model(&m).is_empty());
    }
}
