//! Trees as polynomial endofunctors `X0 <-s- X2 -p-> X1 -t-> X0` and the
//! dendroidal category they span.
//!
//! A morphism `S -> T` is a map of polynomial endofunctors `S -> T̄` into the
//! free monad on `T`: every vertex of `S` goes to a subtree of `T` whose
//! leaves are the images of its inputs. Such a map is determined by what it
//! does on edges, which is how morphisms are stored and compared.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finset::permutations;

pub type EdgeId = usize;
pub type VertexId = usize;

/// Default cap on the size of a single enumerated hom-set.
pub const DEFAULT_HOM_GUARD: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Vertex {
    pub output: EdgeId,
    pub inputs: Vec<EdgeId>,
}

/// A candidate tree in polynomial form. Flags are `(s, p)` pairs; the inputs
/// of a vertex are listed in flag order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeCandidate {
    pub edge_names: Vec<String>,
    /// `t: X1 -> X0`
    pub outputs: Vec<EdgeId>,
    /// `(s(x), p(x))` for each flag `x ∈ X2`
    pub flags: Vec<(EdgeId, VertexId)>,
}

/// The tree axiom a candidate fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeCondition {
    /// Flag or vertex data refers to something that does not exist.
    WellFormed,
    /// `t` must be injective.
    OutputsInjective,
    /// `s` must be injective with exactly one edge outside its image.
    UniqueRoot,
    /// Iterating the successor function must reach the root.
    SuccessorReachesRoot,
}

impl fmt::Display for TreeCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TreeCondition::WellFormed => "well-formedness",
            TreeCondition::OutputsInjective => "condition (2): t injective",
            TreeCondition::UniqueRoot => "condition (3): s injective with a unique root",
            TreeCondition::SuccessorReachesRoot => "condition (4): successor reaches the root",
        })
    }
}

#[derive(Debug, Clone)]
pub struct PolyTree {
    edge_names: Vec<String>,
    vertices: Vec<Vertex>,
    root: EdgeId,
    producer: Vec<Option<VertexId>>,
    consumer: Vec<Option<VertexId>>,
    successor: Vec<EdgeId>,
}

impl PartialEq for PolyTree {
    fn eq(&self, other: &Self) -> bool {
        self.edge_names.len() == other.edge_names.len() && self.vertices == other.vertices
    }
}

impl Eq for PolyTree {}

impl std::hash::Hash for PolyTree {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.edge_names.len().hash(state);
        self.vertices.hash(state);
    }
}

fn default_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("e{i}")).collect()
}

impl PolyTree {
    pub fn validate(candidate: TreeCandidate) -> std::result::Result<Self, (TreeCondition, String)> {
        let TreeCandidate {
            edge_names,
            outputs,
            flags,
        } = candidate;
        let n_edges = edge_names.len();
        let n_vertices = outputs.len();
        let bad = |c: TreeCondition, msg: String| Err((c, msg));
        if let Some(&e) = outputs.iter().find(|&&e| e >= n_edges) {
            return bad(TreeCondition::WellFormed, format!("vertex output {e} is not an edge"));
        }
        if let Some(&(e, v)) = flags.iter().find(|&&(e, v)| e >= n_edges || v >= n_vertices) {
            return bad(TreeCondition::WellFormed, format!("flag ({e}, {v}) is out of range"));
        }
        let mut producer = vec![None; n_edges];
        for (v, &e) in outputs.iter().enumerate() {
            if producer[e].replace(v).is_some() {
                return bad(
                    TreeCondition::OutputsInjective,
                    format!("edge {} is the output of two vertices", edge_names[e]),
                );
            }
        }
        let mut consumer = vec![None; n_edges];
        let mut inputs = vec![Vec::new(); n_vertices];
        for &(e, v) in &flags {
            if consumer[e].replace(v).is_some() {
                return bad(
                    TreeCondition::UniqueRoot,
                    format!("edge {} is an input twice", edge_names[e]),
                );
            }
            inputs[v].push(e);
        }
        let roots: Vec<EdgeId> = (0..n_edges).filter(|&e| consumer[e].is_none()).collect();
        if roots.len() != 1 {
            return bad(
                TreeCondition::UniqueRoot,
                format!("{} edges are not inputs of any vertex", roots.len()),
            );
        }
        let root = roots[0];
        let successor: Vec<EdgeId> = (0..n_edges)
            .map(|e| consumer[e].map_or(root, |v| outputs[v]))
            .collect();
        for start in 0..n_edges {
            let mut e = start;
            let mut steps = 0;
            while e != root {
                e = successor[e];
                steps += 1;
                if steps > n_edges {
                    return bad(
                        TreeCondition::SuccessorReachesRoot,
                        format!("edge {} never reaches the root", edge_names[start]),
                    );
                }
            }
        }
        let vertices = outputs
            .into_iter()
            .zip(inputs)
            .map(|(output, inputs)| Vertex { output, inputs })
            .collect();
        Ok(PolyTree {
            edge_names,
            vertices,
            root,
            producer,
            consumer,
            successor,
        })
    }

    /// Build from vertex records over edges `0..n_edges`.
    pub fn from_vertices(n_edges: usize, vertices: Vec<Vertex>) -> Result<Self> {
        let candidate = TreeCandidate {
            edge_names: default_names(n_edges),
            outputs: vertices.iter().map(|v| v.output).collect(),
            flags: vertices
                .iter()
                .enumerate()
                .flat_map(|(v, vx)| vx.inputs.iter().map(move |&e| (e, v)))
                .collect(),
        };
        PolyTree::validate(candidate)
            .map_err(|(c, msg)| Error::invalid("tree", format!("{c}: {msg}")))
    }

    /// The trivial tree: one edge, no vertices.
    pub fn eta() -> Self {
        PolyTree::from_vertices(1, Vec::new()).unwrap()
    }

    /// The corolla with `n` leaves: root edge `0`, leaves `1..=n`.
    pub fn corolla(n: usize) -> Self {
        PolyTree::from_vertices(
            n + 1,
            vec![Vertex {
                output: 0,
                inputs: (1..=n).collect(),
            }],
        )
        .unwrap()
    }

    /// `n` unary vertices stacked; edge `0` is the root.
    pub fn linear(n: usize) -> Self {
        PolyTree::from_vertices(
            n + 1,
            (0..n)
                .map(|v| Vertex {
                    output: v,
                    inputs: vec![v + 1],
                })
                .collect(),
        )
        .unwrap()
    }

    /// Parse a nested code such as `(|(||))`: `|` is a leaf edge and
    /// `( .. )` a vertex with the listed inputs. Edges are numbered in
    /// preorder from the root.
    pub fn from_code(code: &str) -> Result<Self> {
        let chars: Vec<char> = code.chars().filter(|c| !c.is_whitespace()).collect();
        let mut vertices = Vec::new();
        let mut n_edges = 0;
        let mut pos = 0;
        fn parse(
            chars: &[char],
            pos: &mut usize,
            n_edges: &mut usize,
            vertices: &mut Vec<Vertex>,
        ) -> Result<EdgeId> {
            let edge = *n_edges;
            *n_edges += 1;
            match chars.get(*pos) {
                Some('|') => {
                    *pos += 1;
                    Ok(edge)
                }
                Some('(') => {
                    *pos += 1;
                    let v = vertices.len();
                    vertices.push(Vertex {
                        output: edge,
                        inputs: Vec::new(),
                    });
                    while chars.get(*pos) != Some(&')') {
                        if *pos >= chars.len() {
                            return Err(Error::Parse("unbalanced tree code".into()));
                        }
                        let child = parse(chars, pos, n_edges, vertices)?;
                        vertices[v].inputs.push(child);
                    }
                    *pos += 1;
                    Ok(edge)
                }
                other => Err(Error::Parse(format!("unexpected {other:?} in tree code"))),
            }
        }
        parse(&chars, &mut pos, &mut n_edges, &mut vertices)?;
        if pos != chars.len() {
            return Err(Error::Parse(format!("trailing input in tree code {code:?}")));
        }
        PolyTree::from_vertices(n_edges, vertices)
    }

    /// Accepts `eta`, `C<n>`, `L<n>` or a nested code.
    pub fn parse_key(key: &str) -> Result<Self> {
        let key = key.trim();
        if key == "eta" {
            return Ok(PolyTree::eta());
        }
        if let Some(n) = key.strip_prefix('C').and_then(|d| d.parse().ok()) {
            return Ok(PolyTree::corolla(n));
        }
        if let Some(n) = key.strip_prefix('L').and_then(|d| d.parse().ok()) {
            return Ok(PolyTree::linear(n));
        }
        PolyTree::from_code(key)
    }

    pub fn with_edge_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.edge_count() {
            return Err(Error::Structural("wrong number of edge names".into()));
        }
        self.edge_names = names;
        Ok(self)
    }

    pub fn edge_count(&self) -> usize {
        self.edge_names.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_names(&self) -> &[String] {
        &self.edge_names
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, v: VertexId) -> &Vertex {
        &self.vertices[v]
    }

    pub fn root(&self) -> EdgeId {
        self.root
    }

    pub fn root_vertex(&self) -> Option<VertexId> {
        self.producer[self.root]
    }

    /// `t⁻¹`: the vertex whose output is `e`.
    pub fn producer(&self, e: EdgeId) -> Option<VertexId> {
        self.producer[e]
    }

    /// The vertex that has `e` as an input.
    pub fn consumer(&self, e: EdgeId) -> Option<VertexId> {
        self.consumer[e]
    }

    pub fn successor(&self, e: EdgeId) -> EdgeId {
        self.successor[e]
    }

    pub fn arity(&self, v: VertexId) -> usize {
        self.vertices[v].inputs.len()
    }

    pub fn max_arity(&self) -> usize {
        self.vertices.iter().map(|v| v.inputs.len()).max().unwrap_or(0)
    }

    /// `X2` as `(vertex, input edge)` pairs, in vertex then input order.
    pub fn flags(&self) -> Vec<(VertexId, EdgeId)> {
        self.vertices
            .iter()
            .enumerate()
            .flat_map(|(v, vx)| vx.inputs.iter().map(move |&e| (v, e)))
            .collect()
    }

    /// Edges outside the image of `t`.
    pub fn leaves(&self) -> Vec<EdgeId> {
        (0..self.edge_count()).filter(|&e| self.producer[e].is_none()).collect()
    }

    pub fn is_linear(&self) -> bool {
        self.vertices.iter().all(|v| v.inputs.len() == 1)
    }

    /// Whether `below` lies on the path from `e` down to the root.
    pub fn is_above_or_equal(&self, e: EdgeId, below: EdgeId) -> bool {
        let mut cur = e;
        loop {
            if cur == below {
                return true;
            }
            if cur == self.root {
                return false;
            }
            cur = self.successor[cur];
        }
    }

    pub fn whole(&self) -> Subtree {
        Subtree {
            root: self.root,
            vertices: (0..self.vertex_count()).collect(),
        }
    }

    pub fn subtree_leaves(&self, s: &Subtree) -> Vec<EdgeId> {
        if s.vertices.is_empty() {
            return vec![s.root];
        }
        let mut out: Vec<EdgeId> = s
            .vertices
            .iter()
            .flat_map(|&v| self.vertices[v].inputs.iter().copied())
            .filter(|&e| match self.producer[e] {
                Some(w) => s.vertices.binary_search(&w).is_err(),
                None => true,
            })
            .collect();
        out.sort_unstable();
        out
    }

    pub fn subtree_edges(&self, s: &Subtree) -> Vec<EdgeId> {
        let mut out: Vec<EdgeId> = std::iter::once(s.root)
            .chain(
                s.vertices
                    .iter()
                    .flat_map(|&v| self.vertices[v].inputs.iter().copied()),
            )
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Every subtree with the given root edge, in canonical order.
    pub fn subtrees_rooted_at(&self, r: EdgeId) -> Vec<Subtree> {
        let mut sets: Vec<Vec<VertexId>> = vec![Vec::new()];
        if let Some(p) = self.producer[r] {
            let mut partial: Vec<Vec<VertexId>> = vec![vec![p]];
            for &input in &self.vertices[p].inputs {
                let options = self.subtrees_rooted_at(input);
                let mut next = Vec::with_capacity(partial.len() * options.len());
                for base in &partial {
                    for opt in &options {
                        let mut merged = base.clone();
                        merged.extend_from_slice(&opt.vertices);
                        next.push(merged);
                    }
                }
                partial = next;
            }
            sets.extend(partial);
        }
        let mut out: Vec<Subtree> = sets
            .into_iter()
            .map(|mut vertices| {
                vertices.sort_unstable();
                Subtree { root: r, vertices }
            })
            .collect();
        out.sort();
        out
    }

    /// `sub(T)`, sorted by root and then vertex set.
    pub fn subtrees(&self) -> Vec<Subtree> {
        (0..self.edge_count())
            .flat_map(|r| self.subtrees_rooted_at(r))
            .collect()
    }

    /// `sub'(T)`: subtrees with a marked leaf.
    pub fn marked_subtrees(&self) -> Vec<(Subtree, EdgeId)> {
        self.subtrees()
            .into_iter()
            .flat_map(|s| {
                self.subtree_leaves(&s)
                    .into_iter()
                    .map(move |l| (s.clone(), l))
            })
            .collect()
    }

    /// The unique subtree with root `r` and leaf set `leaves`, if any.
    pub fn subtree_with_boundary(&self, r: EdgeId, leaves: &[EdgeId]) -> Option<Subtree> {
        if leaves.contains(&r) {
            return (leaves.len() == 1).then(|| Subtree::trivial(r));
        }
        let vertices: Vec<VertexId> = (0..self.vertex_count())
            .filter(|&v| {
                let out = self.vertices[v].output;
                self.is_above_or_equal(out, r)
                    && !leaves.iter().any(|&l| self.is_above_or_equal(out, l))
            })
            .collect();
        let candidate = Subtree { root: r, vertices };
        let mut want = leaves.to_vec();
        want.sort_unstable();
        (self.subtree_leaves(&candidate) == want).then_some(candidate)
    }

    /// A subtree as a tree in its own right, with the inclusions of its edges
    /// and vertices (both in increasing order of the ambient ids).
    pub fn extract(&self, s: &Subtree) -> (PolyTree, Vec<EdgeId>) {
        let edges = self.subtree_edges(s);
        let local = |e: EdgeId| edges.binary_search(&e).unwrap();
        let vertices = s
            .vertices
            .iter()
            .map(|&v| Vertex {
                output: local(self.vertices[v].output),
                inputs: self.vertices[v].inputs.iter().map(|&e| local(e)).collect(),
            })
            .collect();
        let names = edges.iter().map(|&e| self.edge_names[e].clone()).collect();
        let tree = PolyTree::from_vertices(edges.len(), vertices)
            .expect("a subtree is a tree")
            .with_edge_names(names)
            .unwrap();
        (tree, edges)
    }

    fn edge_code(&self, e: EdgeId, memo: &mut [Option<String>]) -> String {
        if let Some(c) = &memo[e] {
            return c.clone();
        }
        let code = match self.producer[e] {
            None => "|".to_string(),
            Some(v) => {
                let mut kids: Vec<String> = self.vertices[v]
                    .inputs
                    .iter()
                    .map(|&i| self.edge_code(i, memo))
                    .collect();
                kids.sort();
                format!("({})", kids.concat())
            }
        };
        memo[e] = Some(code.clone());
        code
    }

    /// Canonical code of the isomorphism class (children sorted recursively).
    pub fn code(&self) -> String {
        let mut memo = vec![None; self.edge_count()];
        self.edge_code(self.root, &mut memo)
    }

    pub fn key(&self) -> String {
        if self.vertex_count() == 0 {
            return "eta".into();
        }
        if self.vertex_count() == 1 {
            return format!("C{}", self.arity(0));
        }
        self.code()
    }

    /// Canonical representative and an isomorphism from it onto `self`.
    pub fn canonical_form(self: &Arc<Self>) -> (Arc<PolyTree>, OmegaMorphism) {
        let mut memo = vec![None; self.edge_count()];
        let mut order = Vec::with_capacity(self.edge_count());
        let mut vertices = Vec::with_capacity(self.vertex_count());
        // preorder walk, children sorted by code
        fn walk(
            t: &PolyTree,
            e: EdgeId,
            memo: &mut [Option<String>],
            order: &mut Vec<EdgeId>,
            vertices: &mut Vec<(VertexId, EdgeId, Vec<EdgeId>)>,
        ) {
            order.push(e);
            if let Some(v) = t.producer[e] {
                let mut kids: Vec<(String, EdgeId)> = t.vertices[v]
                    .inputs
                    .iter()
                    .map(|&i| (t.edge_code(i, memo), i))
                    .collect();
                kids.sort();
                let slot = vertices.len();
                vertices.push((v, e, Vec::new()));
                for (_, k) in kids {
                    vertices[slot].2.push(k);
                    walk(t, k, memo, order, vertices);
                }
            }
        }
        walk(self, self.root, &mut memo, &mut order, &mut vertices);
        let mut new_id = vec![0; self.edge_count()];
        for (i, &e) in order.iter().enumerate() {
            new_id[e] = i;
        }
        let canon_vertices = vertices
            .iter()
            .map(|(_, out, ins)| Vertex {
                output: new_id[*out],
                inputs: ins.iter().map(|&e| new_id[e]).collect(),
            })
            .collect();
        let canon = Arc::new(PolyTree::from_vertices(self.edge_count(), canon_vertices).unwrap());
        let iso = OmegaMorphism::from_edge_map(&canon, self, order)
            .expect("canonical relabelling is an isomorphism");
        (canon, iso)
    }

    /// Graphviz rendering with the root at the bottom.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph tree {\n  rankdir=BT;\n  node [shape=circle];\n");
        for v in 0..self.vertex_count() {
            s.push_str(&format!("  v{v} [label=\"\"];\n"));
        }
        for e in 0..self.edge_count() {
            let name = &self.edge_names[e];
            let upper = match self.producer[e] {
                Some(v) => format!("v{v}"),
                None => {
                    s.push_str(&format!("  top{e} [shape=point];\n"));
                    format!("top{e}")
                }
            };
            let lower = match self.consumer[e] {
                Some(v) => format!("v{v}"),
                None => {
                    s.push_str(&format!("  bottom{e} [shape=point];\n"));
                    format!("bottom{e}")
                }
            };
            s.push_str(&format!(
                "  {upper} -> {lower} [dir=none, label=\"{name}\"];\n"
            ));
        }
        s.push_str("}\n");
        s
    }
}

impl fmt::Display for PolyTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

/// A subtree, stored as its root edge and (sorted) vertex set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Subtree {
    pub root: EdgeId,
    pub vertices: Vec<VertexId>,
}

impl Subtree {
    pub fn trivial(root: EdgeId) -> Self {
        Subtree {
            root,
            vertices: Vec::new(),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// The free polynomial monad `X0 <- sub'(T) -> sub(T) -> X0`.
#[derive(Debug, Clone)]
pub struct FreeMonad {
    pub edges: usize,
    pub subtrees: Vec<Subtree>,
    pub marked: Vec<(usize, EdgeId)>,
}

impl FreeMonad {
    pub fn new(t: &PolyTree) -> Self {
        let subtrees = t.subtrees();
        let marked = subtrees
            .iter()
            .enumerate()
            .flat_map(|(i, s)| t.subtree_leaves(s).into_iter().map(move |l| (i, l)))
            .collect();
        FreeMonad {
            edges: t.edge_count(),
            subtrees,
            marked,
        }
    }

    /// `s`: a marked subtree goes to its marked leaf.
    pub fn source_map(&self) -> Vec<EdgeId> {
        self.marked.iter().map(|&(_, l)| l).collect()
    }

    /// `p`: a marked subtree goes to its underlying subtree.
    pub fn projection(&self) -> Vec<usize> {
        self.marked.iter().map(|&(s, _)| s).collect()
    }

    /// `t`: a subtree goes to its root.
    pub fn root_map(&self) -> Vec<EdgeId> {
        self.subtrees.iter().map(|s| s.root).collect()
    }
}

pub fn free_monad(t: &PolyTree) -> FreeMonad {
    FreeMonad::new(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct OmegaClass {
    pub injective: bool,
    pub surjective: bool,
    pub inert: bool,
    pub active: bool,
}

#[derive(Debug, Clone)]
pub struct OmegaMorphism {
    source: Arc<PolyTree>,
    target: Arc<PolyTree>,
    edge_map: Vec<EdgeId>,
    vertex_map: Vec<Subtree>,
}

impl PartialEq for OmegaMorphism {
    fn eq(&self, other: &Self) -> bool {
        self.edge_map == other.edge_map
            && (Arc::ptr_eq(&self.source, &other.source) || self.source == other.source)
            && (Arc::ptr_eq(&self.target, &other.target) || self.target == other.target)
    }
}

impl Eq for OmegaMorphism {}

impl std::hash::Hash for OmegaMorphism {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.edge_map.hash(state);
    }
}

impl OmegaMorphism {
    /// Reconstruct a morphism from its edge map, or name the first vertex
    /// that admits no image subtree.
    pub fn from_edge_map(
        source: &Arc<PolyTree>,
        target: &Arc<PolyTree>,
        edge_map: Vec<EdgeId>,
    ) -> Result<Self> {
        if edge_map.len() != source.edge_count() {
            return Err(Error::Structural(format!(
                "edge map has {} entries for {} edges",
                edge_map.len(),
                source.edge_count()
            )));
        }
        if let Some(&e) = edge_map.iter().find(|&&e| e >= target.edge_count()) {
            return Err(Error::Structural(format!("edge {e} is not an edge of the target")));
        }
        let mut vertex_map = Vec::with_capacity(source.vertex_count());
        for (v, vx) in source.vertices.iter().enumerate() {
            let images: Vec<EdgeId> = vx.inputs.iter().map(|&e| edge_map[e]).collect();
            let distinct: BTreeSet<EdgeId> = images.iter().copied().collect();
            let sub = (distinct.len() == images.len())
                .then(|| target.subtree_with_boundary(edge_map[vx.output], &images))
                .flatten();
            match sub {
                Some(s) => vertex_map.push(s),
                None => {
                    return Err(Error::invalid(
                        "tree morphism",
                        format!("vertex {v} has no image subtree"),
                    ))
                }
            }
        }
        Ok(OmegaMorphism {
            source: source.clone(),
            target: target.clone(),
            edge_map,
            vertex_map,
        })
    }

    /// Build from explicit vertex assignments, checking the polynomial-map
    /// conditions: each vertex goes to a subtree rooted at the image of its
    /// output whose leaves are the images of its inputs, bijectively.
    pub fn from_assignments(
        source: &Arc<PolyTree>,
        target: &Arc<PolyTree>,
        edge_map: Vec<EdgeId>,
        vertex_map: Vec<Subtree>,
    ) -> Result<Self> {
        if edge_map.len() != source.edge_count() || vertex_map.len() != source.vertex_count() {
            return Err(Error::Structural("assignment sizes do not match the source".into()));
        }
        for (v, vx) in source.vertices.iter().enumerate() {
            let sub = &vertex_map[v];
            if sub.root != edge_map[vx.output] {
                return Err(Error::invalid(
                    "tree morphism",
                    format!("vertex {v}: subtree root does not match its output"),
                ));
            }
            let mut images: Vec<EdgeId> = vx.inputs.iter().map(|&e| edge_map[e]).collect();
            images.sort_unstable();
            if images != target.subtree_leaves(sub) {
                return Err(Error::invalid(
                    "tree morphism",
                    format!("vertex {v}: inputs do not biject onto the subtree leaves"),
                ));
            }
        }
        Ok(OmegaMorphism {
            source: source.clone(),
            target: target.clone(),
            edge_map,
            vertex_map,
        })
    }

    pub fn identity(t: &Arc<PolyTree>) -> Self {
        OmegaMorphism {
            source: t.clone(),
            target: t.clone(),
            edge_map: (0..t.edge_count()).collect(),
            vertex_map: t
                .vertices
                .iter()
                .enumerate()
                .map(|(v, vx)| Subtree {
                    root: vx.output,
                    vertices: vec![v],
                })
                .collect(),
        }
    }

    pub fn source(&self) -> &Arc<PolyTree> {
        &self.source
    }

    pub fn target(&self) -> &Arc<PolyTree> {
        &self.target
    }

    pub fn edge_map(&self) -> &[EdgeId] {
        &self.edge_map
    }

    pub fn vertex_map(&self) -> &[Subtree] {
        &self.vertex_map
    }

    /// `X2 -> sub'(T)`: each flag goes to the image subtree of its vertex,
    /// marked at the image of its edge.
    pub fn flag_map(&self) -> Vec<(Subtree, EdgeId)> {
        self.source
            .flags()
            .into_iter()
            .map(|(v, e)| (self.vertex_map[v].clone(), self.edge_map[e]))
            .collect()
    }

    /// Image of a subtree of the source.
    pub fn image_of(&self, s: &Subtree) -> Subtree {
        let mut vertices: Vec<VertexId> = s
            .vertices
            .iter()
            .flat_map(|&v| self.vertex_map[v].vertices.iter().copied())
            .collect();
        vertices.sort_unstable();
        vertices.dedup();
        Subtree {
            root: self.edge_map[s.root],
            vertices,
        }
    }

    /// `self ∘ first`, computed by pushing vertex assignments forward.
    pub fn after(&self, first: &OmegaMorphism) -> Result<OmegaMorphism> {
        if *first.target != *self.source {
            return Err(Error::Structural(format!(
                "cannot compose {} -> {} with {} -> {}",
                first.source, first.target, self.source, self.target
            )));
        }
        Ok(OmegaMorphism {
            source: first.source.clone(),
            target: self.target.clone(),
            edge_map: first.edge_map.iter().map(|&e| self.edge_map[e]).collect(),
            vertex_map: first.vertex_map.iter().map(|s| self.image_of(s)).collect(),
        })
    }

    pub fn is_inert(&self) -> bool {
        is_injective(&self.edge_map) && self.vertex_map.iter().all(|s| s.vertices.len() == 1)
    }

    /// Inertness straight from the definition: the map comes from a morphism
    /// of polynomial endofunctors `S -> T` with cartesian middle square.
    pub fn is_inert_by_definition(&self) -> bool {
        let s = &self.source;
        let t = &self.target;
        let mut f1 = Vec::with_capacity(s.vertex_count());
        for vx in &s.vertices {
            match t.producer(self.edge_map[vx.output]) {
                Some(w) => f1.push(w),
                None => return false,
            }
        }
        // f2 on flags, then the middle square must be a pullback: flags over
        // v biject with flags over f1(v).
        for (v, vx) in s.vertices.iter().enumerate() {
            let target_inputs = &t.vertices[f1[v]].inputs;
            if target_inputs.len() != vx.inputs.len() {
                return false;
            }
            let mut hit = vec![false; target_inputs.len()];
            for &e in &vx.inputs {
                match target_inputs.iter().position(|&x| x == self.edge_map[e]) {
                    Some(k) if !hit[k] => hit[k] = true,
                    _ => return false,
                }
            }
        }
        true
    }

    pub fn is_active(&self) -> bool {
        if self.edge_map[self.source.root] != self.target.root {
            return false;
        }
        let mut images: Vec<EdgeId> = self
            .source
            .leaves()
            .iter()
            .map(|&l| self.edge_map[l])
            .collect();
        images.sort_unstable();
        let before = images.len();
        images.dedup();
        before == images.len() && images == self.target.leaves()
    }

    /// Active in the sense of sending the whole source onto the whole target.
    pub fn is_active_by_image(&self) -> bool {
        self.image_of(&self.source.whole()) == self.target.whole()
    }

    pub fn classify(&self) -> OmegaClass {
        OmegaClass {
            injective: is_injective(&self.edge_map),
            surjective: {
                let mut seen = vec![false; self.target.edge_count()];
                for &e in &self.edge_map {
                    seen[e] = true;
                }
                seen.into_iter().all(|b| b)
            },
            inert: self.is_inert(),
            active: self.is_active(),
        }
    }

    pub fn is_iso(&self) -> bool {
        self.source.edge_count() == self.target.edge_count()
            && self.source.vertex_count() == self.target.vertex_count()
            && self.is_inert()
    }

    /// Active map onto the image subtree followed by its embedding.
    pub fn factorize(&self) -> (OmegaMorphism, OmegaMorphism) {
        let image = self.image_of(&self.source.whole());
        let (middle, inclusion) = self.target.extract(&image);
        let middle = Arc::new(middle);
        let local = |e: EdgeId| inclusion.binary_search(&e).unwrap();
        let first = OmegaMorphism::from_edge_map(
            &self.source,
            &middle,
            self.edge_map.iter().map(|&e| local(e)).collect(),
        )
        .expect("corestriction to the image is a morphism");
        let second = OmegaMorphism::from_edge_map(&middle, &self.target, inclusion)
            .expect("subtree embedding is a morphism");
        (first, second)
    }

    pub fn key(&self) -> String {
        format!(
            "{}->{}@{}",
            self.source.key(),
            self.target.key(),
            self.edge_map
                .iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(",")
        )
    }
}

fn is_injective(values: &[usize]) -> bool {
    let mut seen = BTreeSet::new();
    values.iter().all(|v| seen.insert(*v))
}

/// Raw data of a map of polynomial endofunctors `S -> T̄`: a subtree for
/// every vertex and a leaf for every flag, with the induced edge map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolynomialMap {
    pub edge_map: Vec<EdgeId>,
    pub vertex_map: Vec<Subtree>,
    pub flag_map: Vec<EdgeId>,
}

/// Every map of polynomial endofunctors `S -> T̄`, generated vertex by vertex
/// from the root: a vertex whose output is already placed picks any subtree
/// with that root and the right number of leaves, then a bijection from its
/// flags onto those leaves.
pub fn enumerate_polynomial_maps(
    s: &PolyTree,
    t: &PolyTree,
    guard: usize,
) -> Result<Vec<PolynomialMap>> {
    let mut by_root_and_arity: HashMap<(EdgeId, usize), Vec<(Subtree, Vec<EdgeId>)>> =
        HashMap::new();
    for sub in t.subtrees() {
        let leaves = t.subtree_leaves(&sub);
        by_root_and_arity
            .entry((sub.root, leaves.len()))
            .or_default()
            .push((sub, leaves));
    }
    // vertices in breadth-first order from the root
    let mut order = Vec::new();
    if let Some(v) = s.root_vertex() {
        order.push(v);
        let mut i = 0;
        while i < order.len() {
            for &e in &s.vertices[order[i]].inputs {
                if let Some(w) = s.producer(e) {
                    order.push(w);
                }
            }
            i += 1;
        }
    }
    let flag_index: HashMap<(VertexId, EdgeId), usize> = s
        .flags()
        .into_iter()
        .enumerate()
        .map(|(i, f)| (f, i))
        .collect();
    let perms: Vec<Vec<Vec<usize>>> = (0..=s.max_arity()).map(permutations).collect();
    let mut out = Vec::new();
    let empty = Vec::new();
    struct State {
        edge_map: Vec<Option<EdgeId>>,
        vertex_map: Vec<Option<Subtree>>,
        flag_map: Vec<Option<EdgeId>>,
    }
    #[allow(clippy::too_many_arguments)]
    fn go(
        k: usize,
        order: &[VertexId],
        s: &PolyTree,
        table: &HashMap<(EdgeId, usize), Vec<(Subtree, Vec<EdgeId>)>>,
        empty: &Vec<(Subtree, Vec<EdgeId>)>,
        perms: &[Vec<Vec<usize>>],
        flag_index: &HashMap<(VertexId, EdgeId), usize>,
        st: &mut State,
        out: &mut Vec<PolynomialMap>,
        guard: usize,
    ) -> Result<()> {
        if k == order.len() {
            out.push(PolynomialMap {
                edge_map: st.edge_map.iter().map(|e| e.unwrap()).collect(),
                vertex_map: st.vertex_map.iter().map(|v| v.clone().unwrap()).collect(),
                flag_map: st.flag_map.iter().map(|f| f.unwrap()).collect(),
            });
            if out.len() > guard {
                return Err(Error::Resource(format!("hom-set exceeds the guard of {guard}")));
            }
            return Ok(());
        }
        let v = order[k];
        let vx = &s.vertices[v];
        let r = st.edge_map[vx.output].expect("outputs are placed before their vertex");
        for (sub, leaves) in table.get(&(r, vx.inputs.len())).unwrap_or(empty) {
            for perm in &perms[vx.inputs.len()] {
                for (slot, &e) in vx.inputs.iter().enumerate() {
                    let image = leaves[perm[slot]];
                    st.edge_map[e] = Some(image);
                    st.flag_map[flag_index[&(v, e)]] = Some(image);
                }
                st.vertex_map[v] = Some(sub.clone());
                go(k + 1, order, s, table, empty, perms, flag_index, st, out, guard)?;
            }
        }
        for &e in &vx.inputs {
            st.edge_map[e] = None;
            st.flag_map[flag_index[&(v, e)]] = None;
        }
        st.vertex_map[v] = None;
        Ok(())
    }
    for r in 0..t.edge_count() {
        let mut st = State {
            edge_map: vec![None; s.edge_count()],
            vertex_map: vec![None; s.vertex_count()],
            flag_map: vec![None; s.flags().len()],
        };
        st.edge_map[s.root()] = Some(r);
        go(
            0,
            &order,
            s,
            &by_root_and_arity,
            &empty,
            &perms,
            &flag_index,
            &mut st,
            &mut out,
            guard,
        )?;
    }
    Ok(out)
}

/// `Hom(S, T)` in canonical order (lexicographic in the edge map).
pub fn enumerate_hom_omega(
    s: &Arc<PolyTree>,
    t: &Arc<PolyTree>,
    guard: usize,
) -> Result<Vec<OmegaMorphism>> {
    let mut maps = enumerate_polynomial_maps(s, t, guard)?;
    maps.sort_by(|a, b| a.edge_map.cmp(&b.edge_map));
    Ok(maps
        .into_iter()
        .map(|m| OmegaMorphism {
            source: s.clone(),
            target: t.clone(),
            edge_map: m.edge_map,
            vertex_map: m.vertex_map,
        })
        .collect())
}

/// Canonical representatives of all trees with at most `max_vertices`
/// vertices of arity at most `max_arity`, sorted by vertex count, edge count
/// and code.
pub fn enumerate_trees(max_vertices: usize, max_arity: usize) -> Vec<Arc<PolyTree>> {
    // codes[v]: canonical edge codes using exactly v vertices
    let mut codes: Vec<Vec<String>> = vec![vec!["|".to_string()]];
    for v in 1..=max_vertices {
        let mut found = BTreeSet::new();
        for arity in 0..=max_arity {
            // multisets of `arity` child codes with total v - 1 vertices
            let mut pool: Vec<(usize, &String)> = Vec::new();
            for (count, list) in codes.iter().enumerate() {
                for c in list {
                    pool.push((count, c));
                }
            }
            pool.sort_by(|a, b| a.1.cmp(b.1));
            let mut chosen: Vec<usize> = Vec::new();
            fn pick(
                pool: &[(usize, &String)],
                arity: usize,
                remaining: usize,
                start: usize,
                chosen: &mut Vec<usize>,
                found: &mut BTreeSet<String>,
            ) {
                if chosen.len() == arity {
                    if remaining == 0 {
                        let kids: Vec<&str> = chosen.iter().map(|&i| pool[i].1.as_str()).collect();
                        found.insert(format!("({})", kids.concat()));
                    }
                    return;
                }
                for i in start..pool.len() {
                    if pool[i].0 <= remaining {
                        chosen.push(i);
                        pick(pool, arity, remaining - pool[i].0, i, chosen, found);
                        chosen.pop();
                    }
                }
            }
            pick(&pool, arity, v - 1, 0, &mut chosen, &mut found);
        }
        codes.push(found.into_iter().collect());
    }
    let mut trees: Vec<Arc<PolyTree>> = codes
        .iter()
        .flatten()
        .map(|c| {
            let t = Arc::new(PolyTree::from_code(c).unwrap());
            t.canonical_form().0
        })
        .collect();
    trees.sort_by_cached_key(|t| (t.vertex_count(), t.edge_count(), t.code()));
    trees
}

/// JSON form: named edges, vertices by output and inputs; `root` is
/// inferred on input and echoed on output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeJson {
    pub edges: Vec<String>,
    pub vertices: Vec<VertexJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VertexJson {
    pub out: String,
    #[serde(rename = "in")]
    pub inputs: Vec<String>,
}

impl From<&PolyTree> for TreeJson {
    fn from(t: &PolyTree) -> Self {
        TreeJson {
            edges: t.edge_names.clone(),
            vertices: t
                .vertices
                .iter()
                .map(|v| VertexJson {
                    out: t.edge_names[v.output].clone(),
                    inputs: v.inputs.iter().map(|&e| t.edge_names[e].clone()).collect(),
                })
                .collect(),
            root: Some(t.edge_names[t.root].clone()),
        }
    }
}

impl TryFrom<&TreeJson> for PolyTree {
    type Error = Error;

    fn try_from(j: &TreeJson) -> Result<Self> {
        let index: BTreeMap<&str, usize> = j
            .edges
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        if index.len() != j.edges.len() {
            return Err(Error::invalid("tree", "duplicate edge names"));
        }
        let lookup = |n: &str| {
            index
                .get(n)
                .copied()
                .ok_or_else(|| Error::invalid("tree", format!("unknown edge {n:?}")))
        };
        let mut outputs = Vec::new();
        let mut flags = Vec::new();
        for (v, vx) in j.vertices.iter().enumerate() {
            outputs.push(lookup(&vx.out)?);
            for e in &vx.inputs {
                flags.push((lookup(e)?, v));
            }
        }
        let tree = PolyTree::validate(TreeCandidate {
            edge_names: j.edges.clone(),
            outputs,
            flags,
        })
        .map_err(|(c, msg)| Error::invalid("tree", format!("{c}: {msg}")))?;
        if let Some(r) = &j.root {
            if *r != j.edges[tree.root] {
                return Err(Error::invalid(
                    "tree",
                    format!("declared root {r:?} but the root is {:?}", j.edges[tree.root]),
                ));
            }
        }
        Ok(tree)
    }
}

/// JSON form of a morphism: both trees and the edge map by name.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OmegaMorphismJson {
    pub source: TreeJson,
    pub target: TreeJson,
    pub edge_map: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vertex_map: Vec<SubtreeJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubtreeJson {
    pub root: String,
    pub leaves: Vec<String>,
    pub vertices: usize,
}

impl From<&OmegaMorphism> for OmegaMorphismJson {
    fn from(m: &OmegaMorphism) -> Self {
        let sn = m.source.edge_names();
        let tn = m.target.edge_names();
        OmegaMorphismJson {
            source: m.source.as_ref().into(),
            target: m.target.as_ref().into(),
            edge_map: m
                .edge_map
                .iter()
                .enumerate()
                .map(|(e, &img)| (sn[e].clone(), tn[img].clone()))
                .collect(),
            vertex_map: m
                .vertex_map
                .iter()
                .map(|s| SubtreeJson {
                    root: tn[s.root].clone(),
                    leaves: m
                        .target
                        .subtree_leaves(s)
                        .into_iter()
                        .map(|l| tn[l].clone())
                        .collect(),
                    vertices: s.vertices.len(),
                })
                .collect(),
        }
    }
}

impl TryFrom<&OmegaMorphismJson> for OmegaMorphism {
    type Error = Error;

    fn try_from(j: &OmegaMorphismJson) -> Result<Self> {
        let s = Arc::new(PolyTree::try_from(&j.source)?);
        let t = Arc::new(PolyTree::try_from(&j.target)?);
        let edge_map = s
            .edge_names()
            .iter()
            .map(|n| {
                let img = j
                    .edge_map
                    .get(n)
                    .ok_or_else(|| Error::invalid("tree morphism", format!("edge {n:?} unmapped")))?;
                t.edge_names()
                    .iter()
                    .position(|x| x == img)
                    .ok_or_else(|| Error::invalid("tree morphism", format!("unknown target edge {img:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        OmegaMorphism::from_edge_map(&s, &t, edge_map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arc(t: PolyTree) -> Arc<PolyTree> {
        Arc::new(t)
    }

    fn brute_force_hom(s: &Arc<PolyTree>, t: &Arc<PolyTree>) -> Vec<Vec<EdgeId>> {
        let n = s.edge_count();
        let m = t.edge_count();
        let mut out = Vec::new();
        let mut map = vec![0; n];
        loop {
            if OmegaMorphism::from_edge_map(s, t, map.clone()).is_ok() {
                out.push(map.clone());
            }
            let mut i = n;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                map[i] += 1;
                if map[i] < m {
                    break;
                }
                map[i] = 0;
            }
        }
    }

    #[test]
    fn validation_names_the_condition() {
        let names = default_names(3);
        let two_producers = TreeCandidate {
            edge_names: names.clone(),
            outputs: vec![0, 0],
            flags: vec![(1, 0), (2, 1)],
        };
        assert_eq!(
            PolyTree::validate(two_producers).unwrap_err().0,
            TreeCondition::OutputsInjective
        );
        let two_roots = TreeCandidate {
            edge_names: names.clone(),
            outputs: vec![0],
            flags: vec![(1, 0)],
        };
        assert_eq!(PolyTree::validate(two_roots).unwrap_err().0, TreeCondition::UniqueRoot);
        // a loop: 1 -> 2 -> 1 disconnected from the root 0
        let cycle = TreeCandidate {
            edge_names: names,
            outputs: vec![1, 2],
            flags: vec![(2, 0), (1, 1)],
        };
        assert!(PolyTree::validate(cycle).is_err());
        let cycle = TreeCandidate {
            edge_names: default_names(3),
            outputs: vec![1, 2],
            flags: vec![(2, 0), (1, 1)],
        };
        let err = PolyTree::validate(cycle).unwrap_err().0;
        assert!(matches!(
            err,
            TreeCondition::UniqueRoot | TreeCondition::SuccessorReachesRoot
        ));
        let mut self_loop = TreeCandidate {
            edge_names: default_names(2),
            outputs: vec![1],
            flags: vec![(1, 0)],
        };
        assert_eq!(
            PolyTree::validate(self_loop.clone()).unwrap_err().0,
            TreeCondition::SuccessorReachesRoot
        );
        self_loop.flags.push((7, 0));
        assert_eq!(PolyTree::validate(self_loop).unwrap_err().0, TreeCondition::WellFormed);
    }

    #[test]
    fn subtree_counts() {
        for n in 0..6 {
            let c = PolyTree::corolla(n);
            assert_eq!(c.subtrees().len(), n + 2);
            assert_eq!(c.marked_subtrees().len(), 2 * n + 1);
        }
        assert_eq!(PolyTree::linear(2).subtrees().len(), 6);
        assert_eq!(PolyTree::eta().subtrees().len(), 1);
    }

    #[test]
    fn free_monad_structure_maps() {
        let t = PolyTree::from_code("((||)|)").unwrap();
        let fm = free_monad(&t);
        assert_eq!(fm.subtrees.len(), t.subtrees().len());
        for (i, &(s, l)) in fm.marked.iter().enumerate() {
            assert_eq!(fm.projection()[i], s);
            assert_eq!(fm.source_map()[i], l);
            assert!(t.subtree_leaves(&fm.subtrees[s]).contains(&l));
        }
        assert_eq!(fm.root_map()[0], fm.subtrees[0].root);
    }

    #[test]
    fn hom_examples() {
        let c2 = arc(PolyTree::corolla(2));
        let eta = arc(PolyTree::eta());
        assert_eq!(enumerate_hom_omega(&c2, &c2, DEFAULT_HOM_GUARD).unwrap().len(), 2);
        assert!(enumerate_hom_omega(&c2, &eta, DEFAULT_HOM_GUARD).unwrap().is_empty());
        for code in ["|", "(|)", "(||)", "((||)|)", "(()(|)|)"] {
            let t = arc(PolyTree::from_code(code).unwrap());
            let homs = enumerate_hom_omega(&eta, &t, DEFAULT_HOM_GUARD).unwrap();
            assert_eq!(homs.len(), t.edge_count());
        }
        let c1 = arc(PolyTree::corolla(1));
        let homs = enumerate_hom_omega(&c1, &eta, DEFAULT_HOM_GUARD).unwrap();
        assert_eq!(homs.len(), 1);
        assert!(homs[0].is_active());
        assert!(!homs[0].is_inert());
    }

    #[test]
    fn invalid_edge_map_is_rejected() {
        let c2 = arc(PolyTree::corolla(2));
        let l2 = arc(PolyTree::linear(2));
        // both leaves onto the same edge
        assert!(OmegaMorphism::from_edge_map(&c2, &c2, vec![0, 1, 1]).is_err());
        // leaves that are not above the root image
        assert!(OmegaMorphism::from_edge_map(&c2, &l2, vec![1, 0, 2]).is_err());
        assert!(OmegaMorphism::from_edge_map(&c2, &c2, vec![0, 1]).is_err());
    }

    #[test]
    fn hom_guard_trips() {
        let t = arc(PolyTree::from_code("((||)(||))").unwrap());
        let eta = arc(PolyTree::eta());
        assert!(matches!(
            enumerate_hom_omega(&eta, &t, 3),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_trees(2, 2).len(), 10);
        let keys: Vec<String> = enumerate_trees(1, 2).iter().map(|t| t.key()).collect();
        assert_eq!(keys, ["eta", "C0", "C1", "C2"]);
        for t in enumerate_trees(4, 3) {
            assert_eq!(t.canonical_form().0.as_ref(), t.as_ref());
        }
    }

    #[test]
    fn hom_matches_brute_force() {
        let trees = enumerate_trees(3, 2);
        let mut checked = 0;
        for s in &trees {
            for t in &trees {
                let fast: Vec<Vec<EdgeId>> = enumerate_hom_omega(s, t, DEFAULT_HOM_GUARD)
                    .unwrap()
                    .into_iter()
                    .map(|m| m.edge_map)
                    .collect();
                assert_eq!(fast, brute_force_hom(s, t), "{s} -> {t}");
                checked += 1;
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn polynomial_maps_are_determined_by_edges() {
        let trees = enumerate_trees(3, 3);
        for s in &trees {
            for t in &trees {
                let maps = enumerate_polynomial_maps(s, t, DEFAULT_HOM_GUARD).unwrap();
                let edges: BTreeSet<Vec<EdgeId>> = maps.iter().map(|m| m.edge_map.clone()).collect();
                assert_eq!(edges.len(), maps.len(), "{s} -> {t}");
                for m in &maps {
                    let rebuilt = OmegaMorphism::from_edge_map(s, t, m.edge_map.clone()).unwrap();
                    assert_eq!(rebuilt.vertex_map(), &m.vertex_map[..]);
                }
            }
        }
    }

    #[test]
    fn composition_laws() {
        let trees = enumerate_trees(2, 2);
        for a in &trees {
            for b in &trees {
                for f in enumerate_hom_omega(a, b, DEFAULT_HOM_GUARD).unwrap() {
                    assert_eq!(f.after(&OmegaMorphism::identity(a)).unwrap(), f);
                    assert_eq!(OmegaMorphism::identity(b).after(&f).unwrap(), f);
                    for c in &trees {
                        for g in enumerate_hom_omega(b, c, DEFAULT_HOM_GUARD).unwrap() {
                            let gf = g.after(&f).unwrap();
                            let rebuilt =
                                OmegaMorphism::from_edge_map(a, c, gf.edge_map.clone()).unwrap();
                            assert_eq!(rebuilt.vertex_map(), gf.vertex_map());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn classification_agrees_with_definitions() {
        let trees = enumerate_trees(3, 2);
        for s in &trees {
            for t in &trees {
                for m in enumerate_hom_omega(s, t, DEFAULT_HOM_GUARD).unwrap() {
                    assert_eq!(m.is_inert(), m.is_inert_by_definition(), "{}", m.key());
                    assert_eq!(m.is_active(), m.is_active_by_image(), "{}", m.key());
                }
            }
        }
    }

    #[test]
    fn factorization_is_active_then_inert_and_unique() {
        let trees = enumerate_trees(3, 2);
        for s in &trees {
            for t in &trees {
                for m in enumerate_hom_omega(s, t, DEFAULT_HOM_GUARD).unwrap() {
                    let (a, i) = m.factorize();
                    assert!(a.is_active() && i.is_inert(), "{}", m.key());
                    assert_eq!(i.after(&a).unwrap(), m);
                    // exactly one subtree carries an active-inert factorization
                    let through = t
                        .subtrees()
                        .into_iter()
                        .filter(|u| {
                            let edges = t.subtree_edges(u);
                            m.edge_map.iter().all(|e| edges.binary_search(e).is_ok()) && {
                                let (mid, incl) = t.extract(u);
                                let mid = Arc::new(mid);
                                let local: Vec<EdgeId> = m
                                    .edge_map
                                    .iter()
                                    .map(|e| incl.binary_search(e).unwrap())
                                    .collect();
                                OmegaMorphism::from_edge_map(s, &mid, local)
                                    .map(|f| f.is_active())
                                    .unwrap_or(false)
                            }
                        })
                        .count();
                    assert_eq!(through, 1, "{}", m.key());
                }
            }
        }
    }

    #[test]
    fn canonical_form_is_an_isomorphism() {
        let t = arc(PolyTree::from_code("(|(||)(|))").unwrap());
        let (canon, iso) = t.canonical_form();
        assert!(iso.is_iso());
        assert_eq!(iso.source(), &canon);
        assert_eq!(canon.code(), t.code());
    }

    #[test]
    fn keys_round_trip() {
        for t in enumerate_trees(3, 3) {
            let parsed = Arc::new(PolyTree::parse_key(&t.key()).unwrap());
            assert_eq!(parsed.canonical_form().0, t);
        }
        assert_eq!(PolyTree::parse_key("L3").unwrap(), PolyTree::linear(3));
        assert!(PolyTree::parse_key("(|").is_err());
    }

    #[test]
    fn json_round_trip_and_root_check() {
        let t = PolyTree::from_code("((||)|)").unwrap();
        let j = TreeJson::from(&t);
        let text = serde_json::to_string(&j).unwrap();
        let back: TreeJson = serde_json::from_str(&text).unwrap();
        assert_eq!(PolyTree::try_from(&back).unwrap(), t);
        let mut wrong = back.clone();
        wrong.root = Some("e1".into());
        assert!(PolyTree::try_from(&wrong).is_err());
        let s = arc(PolyTree::corolla(2));
        let tt = arc(t);
        let m = &enumerate_hom_omega(&s, &tt, DEFAULT_HOM_GUARD).unwrap()[0];
        let mj = OmegaMorphismJson::from(m);
        let mj: OmegaMorphismJson =
            serde_json::from_str(&serde_json::to_string(&mj).unwrap()).unwrap();
        assert_eq!(&OmegaMorphism::try_from(&mj).unwrap(), m);
    }

    #[test]
    fn dot_export_mentions_every_edge() {
        let t = PolyTree::from_code("((||)|)").unwrap();
        let dot = t.to_dot();
        assert!(dot.contains("rankdir=BT"));
        for name in t.edge_names() {
            assert!(dot.contains(&format!("label=\"{name}\"")));
        }
    }
}
