//! Context entity graph and the structural (connectivity) cost.
//!
//! Every context statement `X is Y` contributes the directed edge `x -> y`.
//! The structural cost of a step is `alpha_struct * ln(1 + d)` where `d` is the
//! directed hop distance from the step's subject to its object. An unreachable
//! pair is an infinite barrier rather than a large constant.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::config::CostCoefficients;
use crate::statement::Statement;

#[derive(Clone, Debug, Default)]
pub struct ContextGraph {
    index: HashMap<String, usize>,
    names: Vec<String>,
    edges: BTreeSet<(usize, String, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl ContextGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_statements<'a, I>(statements: I) -> Self
    where
        I: IntoIterator<Item = &'a Statement>,
    {
        let mut g = Self::new();
        for s in statements {
            g.add_statement(s);
        }
        g
    }

    fn intern(&mut self, entity: &str) -> usize {
        if let Some(&id) = self.index.get(entity) {
            return id;
        }
        let id = self.names.len();
        self.index.insert(entity.to_string(), id);
        self.names.push(entity.to_string());
        self.adjacency.push(Vec::new());
        id
    }

    /// Adds `subject -> object`. Re-adding an identical triple is a no-op.
    pub fn add_statement(&mut self, s: &Statement) {
        let u = self.intern(&s.subject);
        let v = self.intern(&s.object);
        if self.edges.insert((u, s.relation.clone(), v)) {
            let succ = &mut self.adjacency[u];
            if let Err(pos) = succ.binary_search(&v) {
                succ.insert(pos, v);
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, entity: &str) -> bool {
        self.index.contains_key(entity)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(String::as_str)
    }

    /// `(subject, relation, object)` triples in insertion-independent order.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str, &str)> {
        self.edges
            .iter()
            .map(|(u, r, v)| (self.names[*u].as_str(), r.as_str(), self.names[*v].as_str()))
    }

    /// Breadth-first hop count along directed edges; `None` when either entity
    /// is absent or no path exists.
    pub fn shortest_distance(&self, from: &str, to: &str) -> Option<usize> {
        let &src = self.index.get(from)?;
        let &dst = self.index.get(to)?;
        if src == dst {
            return Some(0);
        }
        let mut dist = vec![usize::MAX; self.names.len()];
        let mut queue = VecDeque::from([src]);
        dist[src] = 0;
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    if v == dst {
                        return Some(dist[v]);
                    }
                    queue.push_back(v);
                }
            }
        }
        None
    }

    pub fn reachable(&self, from: &str, to: &str) -> bool {
        self.shortest_distance(from, to).is_some()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructCost {
    /// Hop count; `None` means disconnected.
    pub distance: Option<usize>,
    /// Infinite exactly when `distance` is `None`.
    pub cost: f64,
}

impl StructCost {
    pub fn is_barrier(&self) -> bool {
        self.distance.is_none()
    }
}

pub fn tau_struct(graph: &ContextGraph, step: &Statement, coeff: &CostCoefficients) -> StructCost {
    match graph.shortest_distance(&step.subject, &step.object) {
        Some(d) => StructCost {
            distance: Some(d),
            cost: coeff.alpha_struct * (1.0 + d as f64).ln(),
        },
        None => StructCost {
            distance: None,
            cost: f64::INFINITY,
        },
    }
}
