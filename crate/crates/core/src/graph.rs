//! Workflow graph extraction and decay-weighted random walks.
//!
//! Nodes are non-idle classes; an edge `a -> b` exists when some source
//! video shows a run of `a` followed (possibly after idle frames) by a run
//! of `b`. Outgoing weights of every node sum to one. A walk keeps its own
//! copy of the weights and, after taking an edge, scales that edge by the
//! decay factor and spreads the removed mass equally over the node's other
//! edges, which keeps each node's weights summing to one.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::annotation::{runs, ClassCatalog, ClassId, LabelTrack};
use crate::error::{Error, Result};
use crate::num::Real;
use crate::rng::{self, StreamRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    #[default]
    Uniform,
    Empirical,
}

impl std::str::FromStr for WeightMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "empirical" => Ok(Self::Empirical),
            other => Err(Error::InvalidArgument(format!("unknown weight mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge<T> {
    pub to: ClassId,
    pub weight: T,
    /// Number of times the transition was observed in the source tracks.
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkflowGraph<T> {
    nodes: BTreeSet<ClassId>,
    edges: BTreeMap<ClassId, Vec<Edge<T>>>,
    starts: BTreeMap<ClassId, usize>,
    finals: BTreeMap<ClassId, usize>,
    phases: BTreeMap<ClassId, String>,
}

/// Tolerance for the per-node weight sum.
pub fn sum_tolerance<T: Real>() -> T {
    T::of(1e-9).max(T::epsilon() * T::of(64.0))
}

/// Sequence of non-idle run classes of a track.
pub fn active_sequence(track: &LabelTrack) -> Vec<ClassId> {
    runs(&track.frames)
        .into_iter()
        .filter(|r| !r.class.is_idle())
        .map(|r| r.class)
        .collect()
}

impl<T: Real> WorkflowGraph<T> {
    /// Builds the graph as the union of all transitions observed in `tracks`.
    pub fn extract(tracks: &[LabelTrack], catalog: &ClassCatalog, mode: WeightMode) -> Result<Self> {
        if tracks.is_empty() {
            return Err(Error::NoTracks);
        }
        let mut nodes = BTreeSet::new();
        let mut counts: BTreeMap<ClassId, BTreeMap<ClassId, usize>> = BTreeMap::new();
        let mut starts = BTreeMap::new();
        let mut finals = BTreeMap::new();
        for track in tracks {
            if let Some(&bad) = track.frames.iter().find(|c| !catalog.contains(**c)) {
                return Err(Error::InvalidArgument(format!(
                    "track {} uses class {bad} outside the catalog",
                    track.video_id
                )));
            }
            let seq = active_sequence(track);
            let (first, last) = match (seq.first(), seq.last()) {
                (Some(f), Some(l)) => (*f, *l),
                _ => return Err(Error::NoActiveRun(track.video_id.clone())),
            };
            *starts.entry(first).or_insert(0) += 1;
            *finals.entry(last).or_insert(0) += 1;
            nodes.extend(seq.iter().copied());
            for w in seq.windows(2) {
                *counts.entry(w[0]).or_default().entry(w[1]).or_insert(0) += 1;
            }
        }
        let edges = counts
            .into_iter()
            .map(|(from, outs)| {
                let n = outs.len();
                let total: usize = outs.values().sum();
                let edges = outs
                    .into_iter()
                    .map(|(to, count)| {
                        let weight = match mode {
                            WeightMode::Uniform => T::one() / T::of_usize(n),
                            WeightMode::Empirical => T::of_usize(count) / T::of_usize(total),
                        };
                        Edge { to, weight, count }
                    })
                    .collect();
                (from, edges)
            })
            .collect();
        let phases = nodes
            .iter()
            .filter_map(|&c| catalog.phase_of(c).map(|p| (c, p.to_string())))
            .collect();
        let graph = Self { nodes, edges, starts, finals, phases };
        graph.validate()?;
        Ok(graph)
    }

    pub fn validate(&self) -> Result<()> {
        if self.starts.is_empty() || self.finals.is_empty() {
            return Err(Error::Graph("starts and finals must be non-empty".into()));
        }
        for c in self.starts.keys().chain(self.finals.keys()) {
            if !self.nodes.contains(c) {
                return Err(Error::Graph(format!("start/final class {c} is not a node")));
            }
        }
        let tol = sum_tolerance::<T>();
        for (from, edges) in &self.edges {
            if !self.nodes.contains(from) {
                return Err(Error::Graph(format!("edge source {from} is not a node")));
            }
            let mut seen = BTreeSet::new();
            for e in edges {
                if !self.nodes.contains(&e.to) {
                    return Err(Error::Graph(format!("edge target {} is not a node", e.to)));
                }
                if !seen.insert(e.to) {
                    return Err(Error::Graph(format!("duplicate edge {from} -> {}", e.to)));
                }
                if !(e.weight >= T::zero()) || !e.weight.is_finite() {
                    return Err(Error::Graph(format!("edge {from} -> {} has invalid weight", e.to)));
                }
            }
            if edges.is_empty() {
                continue;
            }
            let sum: T = edges.iter().map(|e| e.weight).sum();
            if (sum - T::one()).abs() > tol {
                return Err(Error::Graph(format!("outgoing weights of {from} sum to {sum}, not 1")));
            }
        }
        Ok(())
    }

    pub fn nodes(&self) -> &BTreeSet<ClassId> {
        &self.nodes
    }

    /// Outgoing edges sorted by target class; empty for sinks.
    pub fn out_edges(&self, from: ClassId) -> &[Edge<T>] {
        self.edges.get(&from).map_or(&[], Vec::as_slice)
    }

    pub fn edges(&self) -> impl Iterator<Item = (ClassId, &Edge<T>)> {
        self.edges.iter().flat_map(|(&f, es)| es.iter().map(move |e| (f, e)))
    }

    pub fn has_edge(&self, from: ClassId, to: ClassId) -> bool {
        self.out_edges(from).iter().any(|e| e.to == to)
    }

    /// Start classes with the number of source videos starting there.
    pub fn starts(&self) -> &BTreeMap<ClassId, usize> {
        &self.starts
    }

    pub fn finals(&self) -> &BTreeMap<ClassId, usize> {
        &self.finals
    }

    pub fn is_start(&self, c: ClassId) -> bool {
        self.starts.contains_key(&c)
    }

    pub fn is_final(&self, c: ClassId) -> bool {
        self.finals.contains_key(&c)
    }

    pub fn phase(&self, c: ClassId) -> Option<&str> {
        self.phases.get(&c).map(String::as_str)
    }

    pub fn edge_count(&self) -> usize {
        self.edges.values().map(Vec::len).sum()
    }

    /// Whether `seq` starts in a start class, ends in a final class and only uses edges.
    pub fn is_valid_walk(&self, seq: &[ClassId]) -> bool {
        match (seq.first(), seq.last()) {
            (Some(f), Some(l)) => {
                self.is_start(*f)
                    && self.is_final(*l)
                    && seq.windows(2).all(|w| self.has_edge(w[0], w[1]))
            }
            _ => false,
        }
    }

    pub fn to_file(&self, catalog: &ClassCatalog) -> GraphFile<T> {
        let name = |c: ClassId| catalog.class_name(c).to_string();
        GraphFile {
            nodes: self
                .nodes
                .iter()
                .map(|&c| NodeEntry { class: name(c), phase: self.phases.get(&c).cloned() })
                .collect(),
            starts: self.starts.iter().map(|(&c, &n)| Endpoint { class: name(c), count: n }).collect(),
            finals: self.finals.iter().map(|(&c, &n)| Endpoint { class: name(c), count: n }).collect(),
            edges: self
                .edges()
                .map(|(from, e)| EdgeEntry {
                    from: name(from),
                    to: name(e.to),
                    weight: e.weight,
                    count: e.count,
                })
                .collect(),
        }
    }

    pub fn from_file(file: &GraphFile<T>, catalog: &ClassCatalog) -> Result<Self> {
        let id = |n: &str| {
            catalog
                .class_by_name(n)
                .ok_or_else(|| Error::Graph(format!("unknown class {n:?}")))
                .and_then(|c| {
                    if c.is_idle() {
                        Err(Error::Graph("the idle class cannot be a node".into()))
                    } else {
                        Ok(c)
                    }
                })
        };
        let mut nodes = BTreeSet::new();
        let mut phases = BTreeMap::new();
        for n in &file.nodes {
            let c = id(&n.class)?;
            if !nodes.insert(c) {
                return Err(Error::Graph(format!("node {:?} listed twice", n.class)));
            }
            if let Some(p) = &n.phase {
                phases.insert(c, p.clone());
            }
        }
        let endpoints = |list: &[Endpoint]| -> Result<BTreeMap<ClassId, usize>> {
            list.iter().map(|e| Ok((id(&e.class)?, e.count))).collect()
        };
        let mut edges: BTreeMap<ClassId, Vec<Edge<T>>> = BTreeMap::new();
        for e in &file.edges {
            edges
                .entry(id(&e.from)?)
                .or_default()
                .push(Edge { to: id(&e.to)?, weight: e.weight, count: e.count });
        }
        for list in edges.values_mut() {
            list.sort_by_key(|e| e.to);
        }
        let graph = Self {
            nodes,
            edges,
            starts: endpoints(&file.starts)?,
            finals: endpoints(&file.finals)?,
            phases,
        };
        graph.validate()?;
        Ok(graph)
    }

    pub fn to_json(&self, catalog: &ClassCatalog) -> String {
        serde_json::to_string_pretty(&self.to_file(catalog)).expect("graph serializes") + "\n"
    }

    pub fn load(path: &Path, catalog: &ClassCatalog) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: GraphFile<T> = serde_json::from_str(&text).map_err(|e| Error::format(path, e))?;
        Self::from_file(&file, catalog)
    }

    /// Human-readable listing of nodes per phase plus start and final classes.
    pub fn phase_report(&self, catalog: &ClassCatalog) -> String {
        let mut out = String::new();
        let mut by_phase: BTreeMap<&str, Vec<ClassId>> = BTreeMap::new();
        for &c in &self.nodes {
            by_phase.entry(self.phase(c).unwrap_or("(none)")).or_default().push(c);
        }
        let mut order: Vec<&str> = catalog
            .phases()
            .iter()
            .map(String::as_str)
            .filter(|p| by_phase.contains_key(p))
            .collect();
        order.extend(by_phase.keys().copied().filter(|p| !order.contains(p)).collect::<Vec<_>>());
        let _ = writeln!(out, "nodes: {}  edges: {}", self.nodes.len(), self.edge_count());
        for p in order {
            let _ = writeln!(out, "phase {p}:");
            for &c in &by_phase[p] {
                let _ = writeln!(
                    out,
                    "  {} (out-degree {})",
                    catalog.class_name(c),
                    self.out_edges(c).len()
                );
            }
        }
        for (label, set) in [("starts", &self.starts), ("finals", &self.finals)] {
            let _ = writeln!(out, "{label}:");
            for (&c, &n) in set {
                let _ = writeln!(out, "  {} ({n} videos)", catalog.class_name(c));
            }
        }
        let declared = |set: &BTreeMap<ClassId, usize>, listed: &[ClassId]| {
            listed.is_empty() || set.keys().all(|c| listed.contains(c))
        };
        if !declared(&self.starts, catalog.starts()) || !declared(&self.finals, catalog.finals()) {
            let _ = writeln!(out, "warning: observed start/final classes differ from the catalog");
        }
        out
    }
}

/// Serializable graph, keyed by class names so it can be edited by hand.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct GraphFile<T> {
    pub nodes: Vec<NodeEntry>,
    pub starts: Vec<Endpoint>,
    pub finals: Vec<Endpoint>,
    pub edges: Vec<EdgeEntry<T>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeEntry {
    pub class: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Endpoint {
    pub class: String,
    #[serde(default = "one")]
    pub count: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct EdgeEntry<T> {
    pub from: String,
    pub to: String,
    pub weight: T,
    #[serde(default)]
    pub count: usize,
}

/// Mutable per-walk state: the current node and the live edge weights.
#[derive(Debug, Clone)]
pub struct WalkState<'g, T, R> {
    graph: &'g WorkflowGraph<T>,
    current: ClassId,
    live: BTreeMap<ClassId, Vec<T>>,
    rng: R,
}

impl<'g, T: Real, R: Rng> WalkState<'g, T, R> {
    /// Starts a walk at `start` with live weights equal to the base weights.
    pub fn new(graph: &'g WorkflowGraph<T>, start: ClassId, rng: R) -> Self {
        let live = graph
            .edges
            .iter()
            .map(|(&c, es)| (c, es.iter().map(|e| e.weight).collect()))
            .collect();
        Self { graph, current: start, live, rng }
    }

    pub fn current(&self) -> ClassId {
        self.current
    }

    pub fn live_weights(&self, node: ClassId) -> &[T] {
        self.live.get(&node).map_or(&[], Vec::as_slice)
    }

    pub fn rng_mut(&mut self) -> &mut R {
        &mut self.rng
    }

    pub fn into_rng(self) -> R {
        self.rng
    }

    /// Samples an outgoing edge of the current node proportionally to the
    /// live weights, applies the decay update and moves to the target.
    pub fn decay_select(&mut self, decay: T) -> Result<ClassId> {
        if !(decay > T::zero() && decay <= T::one()) {
            return Err(Error::InvalidArgument(format!("decay must be in (0, 1], got {decay}")));
        }
        let edges = self.graph.out_edges(self.current);
        let weights = match self.live.get_mut(&self.current) {
            Some(w) if !edges.is_empty() => w,
            _ => return Err(Error::DeadEnd(self.current.to_string())),
        };
        let j = sample_index(weights, &mut self.rng);
        apply_decay(weights, j, decay);
        self.current = edges[j].to;
        Ok(self.current)
    }
}

/// Categorical draw over non-negative weights summing to (about) one.
fn sample_index<T: Real, R: Rng>(weights: &[T], rng: &mut R) -> usize {
    let total: T = weights.iter().copied().sum();
    let u = T::of(rng.random::<f64>()) * total;
    let mut acc = T::zero();
    for (i, &w) in weights.iter().enumerate() {
        acc = acc + w;
        if u < acc {
            return i;
        }
    }
    weights.iter().rposition(|&w| w > T::zero()).unwrap_or(weights.len() - 1)
}

/// `w_j <- decay * w_j`; every other weight gains `(1 - decay) * w_j / (N - 1)`.
pub fn apply_decay<T: Real>(weights: &mut [T], j: usize, decay: T) {
    let n = weights.len();
    if n < 2 {
        return;
    }
    let old = weights[j];
    let share = (T::one() - decay) * old / T::of_usize(n - 1);
    for (i, w) in weights.iter_mut().enumerate() {
        if i == j {
            *w = decay * old;
        } else {
            *w = *w + share;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StartChoice {
    #[default]
    Uniform,
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub decay: f64,
    pub max_len: usize,
    pub start_choice: StartChoice,
    /// Probability of continuing past a final class that has outgoing edges.
    pub final_continue_prob: f64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self { decay: 0.5, max_len: 500, start_choice: StartChoice::Uniform, final_continue_prob: 0.0 }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(Error::InvalidArgument(format!("decay must be in (0, 1], got {}", self.decay)));
        }
        if self.max_len < 2 {
            return Err(Error::InvalidArgument("max walk length must be at least 2".into()));
        }
        if !(0.0..1.0).contains(&self.final_continue_prob) {
            return Err(Error::InvalidArgument("final continue probability must be in [0, 1)".into()));
        }
        Ok(())
    }
}

fn choose_start<T: Real, R: Rng>(graph: &WorkflowGraph<T>, choice: StartChoice, rng: &mut R) -> ClassId {
    let starts: Vec<(ClassId, usize)> = graph.starts.iter().map(|(&c, &n)| (c, n)).collect();
    match choice {
        StartChoice::Uniform => starts[rng.random_range(0..starts.len())].0,
        StartChoice::Empirical => {
            let total: usize = starts.iter().map(|s| s.1.max(1)).sum();
            let mut pick = rng.random_range(0..total);
            for (c, n) in &starts {
                let n = (*n).max(1);
                if pick < n {
                    return *c;
                }
                pick -= n;
            }
            unreachable!("pick < total")
        }
    }
}

/// Draws one class sequence from a start class to a final class.
pub fn sample_sequence<T: Real, R: Rng>(
    graph: &WorkflowGraph<T>,
    rng: &mut R,
    config: &WalkConfig,
) -> Result<Vec<ClassId>> {
    config.validate()?;
    let start = choose_start(graph, config.start_choice, rng);
    let decay = T::of(config.decay);
    let mut walk = WalkState::new(graph, start, &mut *rng);
    let mut seq = vec![start];
    if graph.out_edges(start).is_empty() {
        return if graph.is_final(start) { Ok(seq) } else { Err(Error::DeadEnd(start.to_string())) };
    }
    while seq.len() < config.max_len {
        let next = walk.decay_select(decay)?;
        seq.push(next);
        if graph.is_final(next) {
            let sink = graph.out_edges(next).is_empty();
            if sink
                || config.final_continue_prob == 0.0
                || !walk.rng_mut().random_bool(config.final_continue_prob)
            {
                return Ok(seq);
            }
        } else if graph.out_edges(next).is_empty() {
            return Err(Error::DeadEnd(next.to_string()));
        }
    }
    Err(Error::WalkDidNotTerminate(config.max_len))
}

/// [`sample_sequence`] on a fresh stream derived from `seed`.
pub fn sample_sequence_seeded<T: Real>(
    graph: &WorkflowGraph<T>,
    seed: u64,
    config: &WalkConfig,
) -> Result<Vec<ClassId>> {
    let mut rng: StreamRng = rng::stream(seed, "walk", 0);
    sample_sequence(graph, &mut rng, config)
}
