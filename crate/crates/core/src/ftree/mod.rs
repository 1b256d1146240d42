//! Monotone AND/OR fault trees stored as an arena DAG.
//!
//! Subtrees are shared: a component's failure gate is built once and
//! referenced from every place that depends on it. Software-design gates may
//! stay empty ("unresolved") until failure modes are integrated; an empty gate
//! never fails.

mod json;
mod synth;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use json::{export_ft, import_ft, FT_SCHEMA};
pub use synth::{branch_census, integrate_software, synthesize_hardware_ft, BranchCensus, SynthOptions};

/// Index of a node in its tree's arena.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeRef(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateOp {
    And,
    Or,
}

/// What a gate stands for in the synthesized structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateRole {
    /// Top event gate when it is not a single component's failure.
    Top,
    /// Fail(C): OR of a component's failure branches.
    Failure,
    /// Lost or corrupt inputs.
    Dependency,
    /// Software design failure; holds UCA/UIF events once integrated.
    Software,
    /// Inputs combined per redundancy-group logic.
    Group,
    /// Hand-built trees.
    Generic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventCategory {
    HwStochastic,
    HwDesign,
    DependencyLeaf,
    SwUca,
    SwUif,
    Ccf,
}

impl EventCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            EventCategory::HwStochastic => "hw_stochastic",
            EventCategory::HwDesign => "hw_design",
            EventCategory::DependencyLeaf => "dependency_leaf",
            EventCategory::SwUca => "sw_uca",
            EventCategory::SwUif => "sw_uif",
            EventCategory::Ccf => "ccf",
        }
    }
}

impl fmt::Display for EventCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeBody {
    Gate {
        op: GateOp,
        role: GateRole,
        children: Vec<NodeRef>,
    },
    Event {
        category: EventCategory,
        /// Software-originated: UCA/UIF events and CCFs triggered by them.
        software: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: String,
    pub label: String,
    /// Component the node belongs to, if any.
    pub component: Option<String>,
    pub body: NodeBody,
}

impl Node {
    pub fn is_gate(&self) -> bool {
        matches!(self.body, NodeBody::Gate { .. })
    }

    pub fn children(&self) -> &[NodeRef] {
        match &self.body {
            NodeBody::Gate { children, .. } => children,
            NodeBody::Event { .. } => &[],
        }
    }

    pub fn role(&self) -> Option<GateRole> {
        match &self.body {
            NodeBody::Gate { role, .. } => Some(*role),
            NodeBody::Event { .. } => None,
        }
    }

    pub fn category(&self) -> Option<EventCategory> {
        match &self.body {
            NodeBody::Event { category, .. } => Some(*category),
            NodeBody::Gate { .. } => None,
        }
    }

    pub fn is_software(&self) -> bool {
        matches!(self.body, NodeBody::Event { software: true, .. })
    }

    /// An empty software-design placeholder.
    pub fn is_unresolved(&self) -> bool {
        matches!(&self.body, NodeBody::Gate { role: GateRole::Software, children, .. } if children.is_empty())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeMetadata {
    pub model: String,
    pub top_event: String,
    pub include_hw_design: bool,
    pub software_integrated: bool,
    pub ccf_injected: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FtError {
    #[error("model has no operator component")]
    MissingOperator,
    #[error("operator `{0}` has no information sources")]
    NoSources(String),
    #[error("unresolved top event")]
    UnresolvedTopEvent,
    #[error("model still contains replicates declarations; expand it first")]
    NotExpanded,
    #[error("unresolved component reference `{0}`")]
    UnknownComponent(String),
    #[error("dependency cycle through `{0}`")]
    Cycle(String),
    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),
    #[error("unknown node id `{0}`")]
    UnknownNode(String),
    #[error("node `{0}` is not a gate")]
    NotAGate(String),
    #[error("instance owner `{0}` not present in tree")]
    OwnerNotInTree(String),
    #[error("tree is malformed: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaultTree {
    nodes: Vec<Node>,
    index: BTreeMap<String, NodeRef>,
    root: Option<NodeRef>,
    pub metadata: TreeMetadata,
}

impl Default for FaultTree {
    fn default() -> Self {
        Self::new()
    }
}

impl FaultTree {
    pub fn new() -> Self {
        FaultTree { nodes: Vec::new(), index: BTreeMap::new(), root: None, metadata: TreeMetadata::default() }
    }

    fn push(&mut self, node: Node) -> Result<NodeRef, FtError> {
        if self.index.contains_key(&node.id) {
            return Err(FtError::DuplicateNode(node.id));
        }
        let r = NodeRef(self.nodes.len());
        self.index.insert(node.id.clone(), r);
        self.nodes.push(node);
        Ok(r)
    }

    pub fn add_gate(
        &mut self,
        id: impl Into<String>,
        label: impl Into<String>,
        op: GateOp,
        role: GateRole,
        component: Option<&str>,
    ) -> Result<NodeRef, FtError> {
        self.push(Node {
            id: id.into(),
            label: label.into(),
            component: component.map(str::to_string),
            body: NodeBody::Gate { op, role, children: Vec::new() },
        })
    }

    pub fn add_event(
        &mut self,
        id: impl Into<String>,
        label: impl Into<String>,
        category: EventCategory,
        software: bool,
        component: Option<&str>,
    ) -> Result<NodeRef, FtError> {
        self.push(Node {
            id: id.into(),
            label: label.into(),
            component: component.map(str::to_string),
            body: NodeBody::Event { category, software },
        })
    }

    /// Appends `child` under `parent` unless it is already there.
    pub fn add_child(&mut self, parent: NodeRef, child: NodeRef) -> Result<(), FtError> {
        if child.0 >= self.nodes.len() {
            return Err(FtError::UnknownNode(format!("#{}", child.0)));
        }
        let node = self.nodes.get_mut(parent.0).ok_or_else(|| FtError::UnknownNode(format!("#{}", parent.0)))?;
        match &mut node.body {
            NodeBody::Gate { children, .. } => {
                if !children.contains(&child) {
                    children.push(child);
                }
                Ok(())
            }
            NodeBody::Event { .. } => Err(FtError::NotAGate(node.id.clone())),
        }
    }

    pub fn set_root(&mut self, root: NodeRef) -> Result<(), FtError> {
        match self.nodes.get(root.0) {
            Some(n) if n.is_gate() => {
                self.root = Some(root);
                Ok(())
            }
            Some(n) => Err(FtError::NotAGate(n.id.clone())),
            None => Err(FtError::UnknownNode(format!("#{}", root.0))),
        }
    }

    pub fn root(&self) -> NodeRef {
        self.root.expect("fault tree has no root")
    }

    pub fn try_root(&self) -> Option<NodeRef> {
        self.root
    }

    pub fn node(&self, r: NodeRef) -> &Node {
        &self.nodes[r.0]
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeRef, &Node)> {
        self.nodes.iter().enumerate().map(|(i, n)| (NodeRef(i), n))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn find(&self, id: &str) -> Option<NodeRef> {
        self.index.get(id).copied()
    }

    /// Gates that list `r` as a child, in arena order.
    pub fn parents(&self, r: NodeRef) -> Vec<NodeRef> {
        self.nodes().filter(|(_, n)| n.children().contains(&r)).map(|(p, _)| p).collect()
    }

    /// Nodes reachable from the root, each once, in depth-first preorder.
    pub fn reachable(&self) -> Vec<NodeRef> {
        let Some(root) = self.root else { return Vec::new() };
        let mut seen = vec![false; self.nodes.len()];
        let mut order = Vec::new();
        let mut stack = vec![root];
        while let Some(r) = stack.pop() {
            if std::mem::replace(&mut seen[r.0], true) {
                continue;
            }
            order.push(r);
            stack.extend(self.node(r).children().iter().rev().copied());
        }
        order
    }

    /// Basic events reachable from the root, ordered by (category, id).
    pub fn basic_events(&self) -> Vec<NodeRef> {
        let mut events: Vec<NodeRef> = self.reachable().into_iter().filter(|r| !self.node(*r).is_gate()).collect();
        events.sort_by(|a, b| self.event_order(*a, *b));
        events
    }

    /// Stable event ordering: (category, id).
    pub fn event_order(&self, a: NodeRef, b: NodeRef) -> std::cmp::Ordering {
        let (na, nb) = (self.node(a), self.node(b));
        (na.category(), &na.id).cmp(&(nb.category(), &nb.id))
    }

    /// Children-before-parents order over the reachable part. Fails on cycles.
    pub fn postorder(&self) -> Result<Vec<NodeRef>, FtError> {
        let Some(root) = self.root else { return Err(FtError::Malformed("no root".into())) };
        // 0 = unvisited, 1 = on path, 2 = done
        let mut state = vec![0u8; self.nodes.len()];
        let mut order = Vec::new();
        let mut stack = vec![(root, 0usize)];
        state[root.0] = 1;
        while let Some((r, i)) = stack.pop() {
            let children = self.node(r).children();
            if i < children.len() {
                stack.push((r, i + 1));
                let c = children[i];
                match state[c.0] {
                    0 => {
                        state[c.0] = 1;
                        stack.push((c, 0));
                    }
                    1 => return Err(FtError::Cycle(self.node(c).id.clone())),
                    _ => {}
                }
            } else {
                state[r.0] = 2;
                order.push(r);
            }
        }
        Ok(order)
    }

    /// Evaluates the top event. `failed` is indexed by node; only entries for
    /// basic events are consulted.
    pub fn evaluate(&self, failed: &[bool]) -> bool {
        let mut value = vec![false; self.nodes.len()];
        let order = match self.postorder() {
            Ok(o) => o,
            Err(_) => return false,
        };
        for r in order {
            value[r.0] = match &self.node(r).body {
                NodeBody::Event { .. } => failed.get(r.0).copied().unwrap_or(false),
                NodeBody::Gate { children, .. } if children.is_empty() => false,
                NodeBody::Gate { op: GateOp::Or, children, .. } => children.iter().any(|c| value[c.0]),
                NodeBody::Gate { op: GateOp::And, children, .. } => children.iter().all(|c| value[c.0]),
            };
        }
        self.root.is_some_and(|r| value[r.0])
    }

    /// Convenience wrapper: the top event with exactly `events` failed.
    pub fn evaluate_set(&self, events: &[NodeRef]) -> bool {
        let mut failed = vec![false; self.nodes.len()];
        for e in events {
            if let Some(f) = failed.get_mut(e.0) {
                *f = true;
            }
        }
        self.evaluate(&failed)
    }

    /// Checks the structural invariants: rooted at a gate, acyclic, and every
    /// gate other than a software placeholder has at least one child.
    pub fn check(&self) -> Result<(), FtError> {
        let root = self.root.ok_or_else(|| FtError::Malformed("no root".into()))?;
        if !self.node(root).is_gate() {
            return Err(FtError::Malformed("root is not a gate".into()));
        }
        self.postorder()?;
        for n in &self.nodes {
            if n.is_gate() && n.children().is_empty() && !n.is_unresolved() {
                return Err(FtError::Malformed(format!("gate `{}` has no children", n.id)));
            }
        }
        Ok(())
    }
}
