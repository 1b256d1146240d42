//! `ft.json`: the machine-readable fault-tree artifact.

use serde::{Deserialize, Serialize};

use super::{EventCategory, FaultTree, FtError, GateOp, GateRole, NodeBody, NodeRef, TreeMetadata};

pub const FT_SCHEMA: &str = "resha/1";

#[derive(Serialize, Deserialize)]
struct Document {
    schema: String,
    metadata: TreeMetadata,
    root: String,
    nodes: Vec<NodeDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Kind {
    Gate,
    Event,
}

#[derive(Serialize, Deserialize)]
struct NodeDoc {
    id: String,
    kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    op: Option<GateOp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    role: Option<GateRole>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    category: Option<EventCategory>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    software: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    unresolved: bool,
    label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    component: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    children: Option<Vec<String>>,
}

/// Serializes a tree. Output is byte-deterministic for a given tree.
pub fn export_ft(ft: &FaultTree) -> String {
    let nodes = ft
        .nodes()
        .map(|(_, n)| match &n.body {
            NodeBody::Gate { op, role, children } => NodeDoc {
                id: n.id.clone(),
                kind: Kind::Gate,
                op: Some(*op),
                role: Some(*role),
                category: None,
                software: false,
                unresolved: n.is_unresolved(),
                label: n.label.clone(),
                component: n.component.clone(),
                children: Some(children.iter().map(|c| ft.node(*c).id.clone()).collect()),
            },
            NodeBody::Event { category, software } => NodeDoc {
                id: n.id.clone(),
                kind: Kind::Event,
                op: None,
                role: None,
                category: Some(*category),
                software: *software,
                unresolved: false,
                label: n.label.clone(),
                component: n.component.clone(),
                children: None,
            },
        })
        .collect();
    let doc = Document {
        schema: FT_SCHEMA.to_string(),
        metadata: ft.metadata.clone(),
        root: ft.try_root().map(|r| ft.node(r).id.clone()).unwrap_or_default(),
        nodes,
    };
    let mut s = serde_json::to_string_pretty(&doc).unwrap_or_default();
    s.push('\n');
    s
}

pub fn import_ft(text: &str) -> Result<FaultTree, FtError> {
    let doc: Document = serde_json::from_str(text).map_err(|e| FtError::Malformed(e.to_string()))?;
    if doc.schema != FT_SCHEMA {
        return Err(FtError::Malformed(format!("unsupported schema `{}`", doc.schema)));
    }
    let mut ft = FaultTree::new();
    ft.metadata = doc.metadata;
    for n in &doc.nodes {
        match n.kind {
            Kind::Gate => ft.add_gate(
                n.id.clone(),
                n.label.clone(),
                n.op.ok_or_else(|| FtError::Malformed(format!("gate `{}` lacks op", n.id)))?,
                n.role.unwrap_or(GateRole::Generic),
                n.component.as_deref(),
            )?,
            Kind::Event => ft.add_event(
                n.id.clone(),
                n.label.clone(),
                n.category.ok_or_else(|| FtError::Malformed(format!("event `{}` lacks category", n.id)))?,
                n.software,
                n.component.as_deref(),
            )?,
        };
    }
    for (i, n) in doc.nodes.iter().enumerate() {
        for c in n.children.iter().flatten() {
            let child = ft.find(c).ok_or_else(|| FtError::UnknownNode(c.clone()))?;
            ft.add_child(NodeRef(i), child)?;
        }
    }
    let root = ft.find(&doc.root).ok_or_else(|| FtError::UnknownNode(doc.root.clone()))?;
    ft.set_root(root)?;
    ft.check()?;
    Ok(ft)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ftree::tests::small;

    #[test]
    fn round_trip() {
        let ft = small();
        let text = export_ft(&ft);
        assert!(text.contains("\"schema\": \"resha/1\""));
        let back = import_ft(&text).unwrap();
        assert_eq!(back, ft);
        assert_eq!(export_ft(&back), text);
    }

    #[test]
    fn single_event_tree_has_two_nodes() {
        let mut ft = FaultTree::new();
        let g = ft.add_gate("S/fail", "S fails", GateOp::Or, GateRole::Failure, Some("S")).unwrap();
        let e = ft.add_event("S/hw_stochastic", "x", EventCategory::HwStochastic, false, Some("S")).unwrap();
        ft.add_child(g, e).unwrap();
        ft.set_root(g).unwrap();
        let v: serde_json::Value = serde_json::from_str(&export_ft(&ft)).unwrap();
        assert_eq!(v["nodes"].as_array().unwrap().len(), 2);
        assert_eq!(v["root"], "S/fail");
        assert_eq!(v["nodes"][0]["kind"], "gate");
        assert_eq!(v["nodes"][1]["category"], "hw_stochastic");
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(import_ft("{}").is_err());
        let text = export_ft(&small()).replace("resha/1", "resha/9");
        assert!(import_ft(&text).is_err());
        let text = export_ft(&small()).replace("\"root\": \"top\"", "\"root\": \"zzz\"");
        assert!(matches!(import_ft(&text), Err(FtError::UnknownNode(_))));
    }
}
