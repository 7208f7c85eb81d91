use std::collections::HashMap;

use crate::bitmap::StateBitmap;
use crate::operators::{Operator, SearchState, Transition};

/// States reached during a run and the transition that first reached each.
/// Every node has at most one incoming edge, so the graph is a forest over
/// its roots.
#[derive(Debug, Clone, Default)]
pub struct RunningGraph {
    order: Vec<StateBitmap>,
    nodes: HashMap<StateBitmap, SearchState>,
    parent: HashMap<StateBitmap, usize>,
    edges: Vec<Transition>,
    roots: Vec<StateBitmap>,
}

impl RunningGraph {
    pub fn add_root(&mut self, state: SearchState) {
        if self.nodes.contains_key(&state.bitmap) {
            return;
        }
        self.roots.push(state.bitmap.clone());
        self.order.push(state.bitmap.clone());
        self.nodes.insert(state.bitmap.clone(), state);
    }

    /// Adds `state` reached from `from` by `op`. Already known states keep
    /// their first edge.
    pub fn add_edge(&mut self, from: &StateBitmap, op: Operator, state: SearchState) -> bool {
        if self.nodes.contains_key(&state.bitmap) || !self.nodes.contains_key(from) {
            return false;
        }
        self.parent.insert(state.bitmap.clone(), self.edges.len());
        self.edges.push(Transition {
            from: from.clone(),
            op,
            to: state.bitmap.clone(),
        });
        self.order.push(state.bitmap.clone());
        self.nodes.insert(state.bitmap.clone(), state);
        true
    }

    pub fn node(&self, b: &StateBitmap) -> Option<&SearchState> {
        self.nodes.get(b)
    }

    pub fn node_mut(&mut self, b: &StateBitmap) -> Option<&mut SearchState> {
        self.nodes.get_mut(b)
    }

    pub fn contains(&self, b: &StateBitmap) -> bool {
        self.nodes.contains_key(b)
    }

    /// Nodes in discovery order.
    pub fn nodes(&self) -> impl Iterator<Item = &SearchState> {
        self.order.iter().map(|b| &self.nodes[b])
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edges(&self) -> &[Transition] {
        &self.edges
    }

    pub fn roots(&self) -> &[StateBitmap] {
        &self.roots
    }

    /// Transitions from a root to `b`, in application order.
    pub fn path_to(&self, b: &StateBitmap) -> Option<(StateBitmap, Vec<Transition>)> {
        if !self.nodes.contains_key(b) {
            return None;
        }
        let mut path = Vec::new();
        let mut cur = b.clone();
        while let Some(&e) = self.parent.get(&cur) {
            path.push(self.edges[e].clone());
            cur = self.edges[e].from.clone();
        }
        path.reverse();
        Some((cur, path))
    }
}
