//! Random generators shared by the property tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use resha_core::ftree::{EventCategory, FaultTree, GateOp, GateRole, NodeRef};
use resha_core::model::*;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random monotone DAG over 1..=`max_events` basic events, all reachable.
/// Gates form a spanning tree (each gate hangs under a lower-indexed one),
/// every event is attached somewhere, and extra edges to higher-indexed
/// gates or to events add sharing without creating cycles. Occasionally an
/// empty software gate is added.
pub fn random_tree(rng: &mut impl Rng, max_events: usize) -> FaultTree {
    let n_events = rng.gen_range(1..=max_events);
    let n_gates = rng.gen_range(1..=8);
    let mut ft = FaultTree::new();
    let gates: Vec<NodeRef> = (0..n_gates)
        .map(|i| {
            let op = if rng.gen_bool(0.5) { GateOp::And } else { GateOp::Or };
            ft.add_gate(format!("g{i}"), "", op, GateRole::Generic, None).unwrap()
        })
        .collect();
    let categories = [EventCategory::HwStochastic, EventCategory::SwUif, EventCategory::Ccf];
    let events: Vec<NodeRef> = (0..n_events)
        .map(|i| {
            let cat = *categories.choose(rng).unwrap();
            ft.add_event(format!("e{i:02}"), "", cat, cat != EventCategory::HwStochastic, None).unwrap()
        })
        .collect();
    for i in 1..n_gates {
        let parent = gates[rng.gen_range(0..i)];
        ft.add_child(parent, gates[i]).unwrap();
    }
    for &e in &events {
        ft.add_child(gates[rng.gen_range(0..n_gates)], e).unwrap();
    }
    for _ in 0..rng.gen_range(0..=n_events) {
        let i = rng.gen_range(0..n_gates);
        let child = if i + 1 < n_gates && rng.gen_bool(0.3) {
            gates[rng.gen_range(i + 1..n_gates)]
        } else {
            *events.choose(rng).unwrap()
        };
        ft.add_child(gates[i], child).unwrap();
    }
    // Gates left without children get one event so the tree stays well formed.
    for &g in &gates {
        if ft.node(g).children().is_empty() {
            ft.add_child(g, *events.choose(rng).unwrap()).unwrap();
        }
    }
    if rng.gen_bool(0.1) {
        let sw = ft.add_gate("sw", "", GateOp::Or, GateRole::Software, None).unwrap();
        let parent = *gates.choose(rng).unwrap();
        ft.add_child(parent, sw).unwrap();
    }
    ft.set_root(gates[0]).unwrap();
    ft.check().unwrap();
    ft
}

fn origin() -> Origin {
    Origin::default()
}

fn component(id: String, kind: ComponentKind, tech: Tech, class: &str) -> Component {
    Component {
        id,
        kind,
        tech,
        design_class: class.to_string(),
        stub: false,
        inputs: Vec::new(),
        feedback_inputs: Vec::new(),
        links: Vec::new(),
        origin: origin(),
    }
}

/// Knobs for [`random_model`].
#[derive(Clone, Copy)]
pub struct ModelShape {
    pub max_components: usize,
    pub replicate: Option<bool>,
}

impl Default for ModelShape {
    fn default() -> Self {
        ModelShape { max_components: 7, replicate: None }
    }
}

/// A random model that passes validation and runs through the pipeline.
///
/// Division A is a layered DAG of analog and digital components, optionally
/// replicated as B. Every digital component sources one link to all of its
/// consumers (the operator for sinks) with random applicable types. Design
/// classes, shared resources and redundancy groups are sprinkled at random,
/// which exercises every CCF rule.
pub fn random_model(rng: &mut impl Rng, shape: ModelShape) -> SystemModel {
    let mut m = SystemModel { name: "Random".into(), top_event: "Top".into(), ..Default::default() };
    let n_losses = rng.gen_range(1..=3);
    for i in 1..=n_losses {
        m.losses.push(Loss { id: format!("L-{i}"), description: format!("loss {i}"), origin: origin() });
    }
    let n_hazards = rng.gen_range(1..=3);
    for i in 1..=n_hazards {
        let linked = vec![format!("L-{}", rng.gen_range(1..=n_losses))];
        m.hazards.push(Hazard {
            id: format!("H-{i}"),
            description: format!("hazard {i}"),
            linked_losses: linked,
            origin: origin(),
        });
    }
    let n_classes = rng.gen_range(1..=4);
    let tags = ["p1", "p2"];
    for i in 0..n_classes {
        m.design_classes.push(DesignClass {
            id: format!("SW{i}"),
            description: format!("software {i}"),
            diversity_tag: tags.choose(rng).unwrap().to_string(),
            origin: origin(),
        });
    }
    for id in ["HW", "HUM"] {
        m.design_classes.push(DesignClass {
            id: id.into(),
            description: id.into(),
            diversity_tag: id.into(),
            origin: origin(),
        });
    }

    let n = rng.gen_range(2..=shape.max_components.max(2));
    let mut comps: Vec<Component> = Vec::new();
    for i in 0..n {
        let digital = rng.gen_bool(0.6);
        let id = format!("C{i}_A");
        let mut c = if digital {
            let kind = if rng.gen_bool(0.3) { ComponentKind::Controller } else { ComponentKind::Calculator };
            let class = format!("SW{}", rng.gen_range(0..n_classes));
            component(id, kind, Tech::Digital, &class)
        } else {
            component(id, ComponentKind::Sensor, Tech::Analog, "HW")
        };
        if i > 0 {
            let k = rng.gen_range(0..=2.min(i));
            let mut picks: Vec<usize> = (0..i).collect();
            picks.shuffle(rng);
            for &j in picks.iter().take(k) {
                c.inputs.push(LinkRef::to(format!("C{j}_A")));
            }
        }
        comps.push(c);
    }
    let consumers: Vec<Vec<String>> = (0..n)
        .map(|i| {
            let me = format!("C{i}_A");
            comps.iter().filter(|c| c.inputs.iter().any(|r| r.component == me)).map(|c| c.id.clone()).collect()
        })
        .collect();
    let replicate = shape.replicate.unwrap_or_else(|| rng.gen_bool(0.6));
    let sinks: Vec<String> = (0..n).filter(|&i| consumers[i].is_empty()).map(|i| format!("C{i}_A")).collect();

    for (i, c) in comps.iter_mut().enumerate() {
        if c.tech != Tech::Digital {
            continue;
        }
        let targets = if consumers[i].is_empty() { vec!["OP".to_string()] } else { consumers[i].clone() };
        let kind =
            if c.kind == ComponentKind::Controller { LinkKind::ControlAction } else { LinkKind::InformationFlow };
        let mut applicability = BTreeMap::new();
        for ty in FailureModeType::ALL {
            if rng.gen_bool(0.3) {
                applicability.insert(ty, vec![format!("H-{}", rng.gen_range(1..=n_hazards))]);
            }
        }
        c.links.push(Link {
            id: format!("LK{i}_A"),
            kind,
            port: "out".into(),
            targets,
            applicability,
            origin: origin(),
        });
    }

    m.divisions.push(Division { id: "A".into(), components: comps, replicates: None, origin: origin() });
    if replicate {
        m.divisions.push(Division {
            id: "B".into(),
            components: Vec::new(),
            replicates: Some("A".into()),
            origin: origin(),
        });
    }
    let mut op = component("OP".into(), ComponentKind::Operator, Tech::Human, "HUM");
    for s in &sinks {
        op.inputs.push(LinkRef::to(s.clone()));
        if replicate {
            op.inputs.push(LinkRef::to(s.replace("_A", "_B")));
        }
    }
    m.divisions.push(Division { id: "MCR".into(), components: vec![op], replicates: None, origin: origin() });

    if replicate && rng.gen_bool(0.5) {
        m.redundancy_groups.push(RedundancyGroup {
            id: "SYS".into(),
            level: RedundancyLevel::System,
            members: vec!["A".into(), "B".into()],
            logic: GroupLogic::AllMustFail,
            origin: origin(),
        });
    }
    let all_ids: Vec<String> = (0..n)
        .flat_map(|i| {
            let a = format!("C{i}_A");
            let b = format!("C{i}_B");
            if replicate {
                vec![a, b]
            } else {
                vec![a]
            }
        })
        .collect();
    for (k, scope) in [ResourceScope::External, ResourceScope::Internal].into_iter().enumerate() {
        if all_ids.len() >= 2 && rng.gen_bool(0.35) {
            let mut deps = all_ids.clone();
            deps.shuffle(rng);
            deps.truncate(rng.gen_range(2..=all_ids.len().min(3)));
            m.shared_resources.push(SharedResource {
                id: format!("RES{k}"),
                scope,
                dependents: deps,
                origin: origin(),
            });
        }
    }
    m
}

/// Extra syntactic variety on top of [`random_model`]: awkward strings,
/// ports, feedback, stubs and module-level groups. The result parses but
/// need not validate.
pub fn random_syntactic_model(rng: &mut impl Rng) -> SystemModel {
    let mut m = random_model(rng, ModelShape::default());
    let awkward = ["plain", "with \"quotes\"", "back\\slash", "tab\tand\nnewline", "", "unicode: ±°"];
    m.name = awkward.choose(rng).unwrap().to_string();
    m.top_event = awkward.choose(rng).unwrap().to_string();
    if rng.gen_bool(0.2) {
        m.top_event.clear();
    }
    for h in &mut m.hazards {
        h.description = awkward.choose(rng).unwrap().to_string();
    }
    let a = &mut m.divisions[0];
    for c in &mut a.components {
        for r in &mut c.inputs {
            if rng.gen_bool(0.3) {
                r.port = Some("p".into());
            }
        }
        if rng.gen_bool(0.2) {
            c.stub = true;
        }
        if rng.gen_bool(0.2) {
            c.feedback_inputs.push(LinkRef::to("C0_A"));
        }
        for l in &mut c.links {
            if rng.gen_bool(0.3) {
                l.port = "value".into();
            }
        }
    }
    if rng.gen_bool(0.5) {
        let members: Vec<String> = a.components.iter().take(2).map(|c| c.id.clone()).collect();
        m.redundancy_groups.push(RedundancyGroup {
            id: "MOD".into(),
            level: RedundancyLevel::Module,
            members,
            logic: GroupLogic::AnyMisleads,
            origin: Origin::default(),
        });
    }
    m
}
