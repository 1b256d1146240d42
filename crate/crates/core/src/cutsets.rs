//! Minimal cut sets.
//!
//! [`minimal_cut_sets`] expands the tree bottom-up: an OR gate unions its
//! children's families, an AND gate takes pairwise unions, and every gate's
//! family is minimized (idempotence and absorption) before its parents see
//! it. Each node is expanded once, so subtrees shared across redundant
//! divisions do not blow up the work.
//!
//! [`brute_force_oracle`] enumerates truth assignments instead and is kept as
//! an independent check for small trees.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::ftree::{EventCategory, FaultTree, FtError, GateOp, NodeBody, NodeRef};

/// Largest tree the oracle will enumerate.
pub const ORACLE_MAX_EVENTS: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutSetMember {
    pub id: String,
    pub category: EventCategory,
    pub software: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutSet {
    /// Ordered by (category, id).
    pub members: Vec<CutSetMember>,
}

impl CutSet {
    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn ids(&self) -> Vec<&str> {
        self.members.iter().map(|m| m.id.as_str()).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutSetCollection {
    /// Sorted by order, then lexicographically by member (category, id).
    pub sets: Vec<CutSet>,
    /// Number of sets per order.
    pub order_index: BTreeMap<usize, usize>,
    pub truncation_order: Option<usize>,
}

impl CutSetCollection {
    pub fn of_order(&self, order: usize) -> impl Iterator<Item = &CutSet> {
        self.sets.iter().filter(move |s| s.order() == order)
    }

    /// Sets as sorted id lists, handy for comparisons.
    pub fn id_sets(&self) -> Vec<Vec<String>> {
        self.sets.iter().map(|s| s.ids().into_iter().map(String::from).collect()).collect()
    }
}

/// Singleton cut sets split by origin.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FirstOrder {
    pub hardware: Vec<String>,
    pub software: Vec<String>,
}

impl FirstOrder {
    pub fn all(&self) -> impl Iterator<Item = &String> {
        self.hardware.iter().chain(&self.software)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CutSetError {
    #[error(transparent)]
    Tree(#[from] FtError),
    #[error("tree has {events} basic events; the oracle enumerates at most {max}")]
    TooManyEvents { events: usize, max: usize },
}

type Set = Vec<u32>;

/// Ranks reachable basic events by (category, id) so that sorted rank lists
/// compare in the output order.
struct EventRanks {
    by_node: Vec<Option<u32>>,
    nodes: Vec<NodeRef>,
}

impl EventRanks {
    fn new(ft: &FaultTree) -> Self {
        let nodes = ft.basic_events();
        let mut by_node = vec![None; ft.len()];
        for (i, r) in nodes.iter().enumerate() {
            by_node[r.0] = Some(i as u32);
        }
        EventRanks { by_node, nodes }
    }

    fn collect(&self, ft: &FaultTree, mut sets: Vec<Set>, truncation: Option<usize>) -> CutSetCollection {
        sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        let mut order_index = BTreeMap::new();
        let sets = sets
            .into_iter()
            .map(|s| {
                *order_index.entry(s.len()).or_insert(0) += 1;
                CutSet {
                    members: s
                        .iter()
                        .map(|&rank| {
                            let node = ft.node(self.nodes[rank as usize]);
                            CutSetMember {
                                id: node.id.clone(),
                                category: node.category().unwrap_or(EventCategory::HwStochastic),
                                software: node.is_software(),
                            }
                        })
                        .collect(),
                }
            })
            .collect();
        CutSetCollection { sets, order_index, truncation_order: truncation }
    }
}

fn is_subset(small: &[u32], big: &[u32]) -> bool {
    if small.len() > big.len() {
        return false;
    }
    let mut it = big.iter();
    small.iter().all(|x| it.by_ref().any(|y| y == x))
}

fn union(a: &[u32], b: &[u32]) -> Set {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Drops duplicates and supersets.
fn minimize(mut sets: Vec<Set>) -> Vec<Set> {
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    sets.dedup();
    let mut singletons: HashSet<u32> = HashSet::new();
    let mut kept: Vec<Set> = Vec::with_capacity(sets.len());
    for s in sets {
        if s.iter().any(|e| singletons.contains(e)) {
            continue;
        }
        if kept.iter().any(|k| k.len() > 1 && k.len() < s.len() && is_subset(k, &s)) {
            continue;
        }
        if s.len() == 1 {
            singletons.insert(s[0]);
        }
        kept.push(s);
    }
    kept
}

/// All minimal cut sets, or those of order at most `max_order`.
///
/// Truncation is exact: every minimal cut set of order `<= k` is a union of
/// intermediate sets no larger than `k`, so dropping larger intermediates
/// loses nothing below the bound.
pub fn minimal_cut_sets(ft: &FaultTree, max_order: Option<usize>) -> Result<CutSetCollection, CutSetError> {
    let order = ft.postorder()?;
    let ranks = EventRanks::new(ft);
    let within = |s: &Set| max_order.is_none_or(|k| s.len() <= k);
    let mut family: Vec<Option<Vec<Set>>> = vec![None; ft.len()];

    for r in order {
        let sets = match &ft.node(r).body {
            NodeBody::Event { .. } => {
                let rank = ranks.by_node[r.0].expect("reachable event is ranked");
                let s = vec![rank];
                if within(&s) {
                    vec![s]
                } else {
                    Vec::new()
                }
            }
            NodeBody::Gate { children, .. } if children.is_empty() => Vec::new(),
            NodeBody::Gate { op: GateOp::Or, children, .. } => {
                let mut all = Vec::new();
                for c in children {
                    all.extend(family[c.0].as_ref().expect("child expanded first").iter().cloned());
                }
                minimize(all)
            }
            NodeBody::Gate { op: GateOp::And, children, .. } => {
                let mut acc: Vec<Set> = vec![Vec::new()];
                for c in children {
                    let child = family[c.0].as_ref().expect("child expanded first");
                    let mut next = Vec::with_capacity(acc.len() * child.len());
                    for a in &acc {
                        for b in child {
                            let u = union(a, b);
                            if within(&u) {
                                next.push(u);
                            }
                        }
                    }
                    acc = minimize(next);
                    if acc.is_empty() {
                        break;
                    }
                }
                acc
            }
        };
        family[r.0] = Some(sets);
    }

    let root = ft.try_root().ok_or_else(|| FtError::Malformed("no root".into()))?;
    let top = family[root.0].take().unwrap_or_default();
    Ok(ranks.collect(ft, top, max_order))
}

/// Singleton cut sets, split into hardware and software origin.
pub fn first_order_cut_sets(c: &CutSetCollection) -> FirstOrder {
    let mut out = FirstOrder::default();
    for s in c.of_order(1) {
        let m = &s.members[0];
        if m.software {
            out.software.push(m.id.clone());
        } else {
            out.hardware.push(m.id.clone());
        }
    }
    out
}

/// Ground truth by enumeration of all `2^n` assignments of the reachable
/// basic events. Refuses trees with more than [`ORACLE_MAX_EVENTS`] events.
pub fn brute_force_oracle(ft: &FaultTree) -> Result<CutSetCollection, CutSetError> {
    let order = ft.postorder()?;
    let ranks = EventRanks::new(ft);
    let n = ranks.nodes.len();
    if n > ORACLE_MAX_EVENTS {
        return Err(CutSetError::TooManyEvents { events: n, max: ORACLE_MAX_EVENTS });
    }
    let root = ft.try_root().ok_or_else(|| FtError::Malformed("no root".into()))?;

    let mut value = vec![false; ft.len()];
    let mut eval = |mask: u32| -> bool {
        for &r in &order {
            value[r.0] = match &ft.node(r).body {
                NodeBody::Event { .. } => {
                    let rank = ranks.by_node[r.0].expect("reachable event is ranked");
                    mask & (1 << rank) != 0
                }
                NodeBody::Gate { children, .. } if children.is_empty() => false,
                NodeBody::Gate { op: GateOp::Or, children, .. } => children.iter().any(|c| value[c.0]),
                NodeBody::Gate { op: GateOp::And, children, .. } => children.iter().all(|c| value[c.0]),
            };
        }
        value[root.0]
    };

    let total = 1u32 << n;
    let sat: Vec<bool> = (0..total).map(&mut eval).collect();
    let mut sets = Vec::new();
    for mask in 0..total {
        if !sat[mask as usize] {
            continue;
        }
        // A satisfying set is minimal when no proper satisfying subset
        // exists; checking every proper subset keeps this independent of
        // monotonicity.
        let mut minimal = true;
        let mut sub = (mask.wrapping_sub(1)) & mask;
        if mask != 0 {
            loop {
                if sat[sub as usize] {
                    minimal = false;
                    break;
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & mask;
            }
        }
        if minimal {
            sets.push((0..n as u32).filter(|b| mask & (1 << b) != 0).collect::<Vec<u32>>());
        }
    }
    Ok(ranks.collect(ft, sets, None))
}

/// `order,members,categories` rows; members and categories `;`-joined.
pub fn cutsets_csv(c: &CutSetCollection) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let _ = w.write_record(["order", "members", "categories"]);
    for s in &c.sets {
        let members: Vec<&str> = s.members.iter().map(|m| m.id.as_str()).collect();
        let cats: Vec<&str> = s.members.iter().map(|m| m.category.as_str()).collect();
        let _ = w.write_record([s.order().to_string(), members.join(";"), cats.join(";")]);
    }
    String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
}

pub fn cutsets_json(c: &CutSetCollection) -> String {
    let mut s = serde_json::to_string_pretty(c).unwrap_or_default();
    s.push('\n');
    s
}
