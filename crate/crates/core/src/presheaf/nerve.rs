use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::deltaf::{DeltaFMorphism, DeltaFObject};
use crate::error::{Error, Result};
use crate::finset::permutations;
use crate::omega::{OmegaMorphism, PolyTree, Vertex};
use crate::tau::{tau_morphism_between, tau_object};

use super::operad::{ColouredOperad, Operation, OperadMorphism};
use super::{Flavor, IndexTruncation, Morphism, Object, PresheafMap, SetPresheaf};

/// Cap on the number of cells over a single object.
pub const CELL_GUARD: usize = 1_000_000;

/// A cell of a nerve over some shape: a colour per edge and an operation
/// per vertex, with matching profiles.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub colours: Vec<usize>,
    pub ops: Vec<usize>,
}

/// Edges and vertices of a tree or forest. Forest edges are numbered level
/// by level, and vertex `(i, x)` for `i >= 1` takes the fibre over `x` as
/// inputs in ascending order, which is also how `τ` numbers things.
#[derive(Debug, Clone)]
pub(crate) struct Shape {
    edges: usize,
    vertices: Vec<Vertex>,
    producer: Vec<Option<usize>>,
    consumer: Vec<Option<usize>>,
}

impl Shape {
    fn new(edges: usize, vertices: Vec<Vertex>) -> Self {
        let mut producer = vec![None; edges];
        let mut consumer = vec![None; edges];
        for (v, vx) in vertices.iter().enumerate() {
            producer[vx.output] = Some(v);
            for &e in &vx.inputs {
                consumer[e] = Some(v);
            }
        }
        Shape {
            edges,
            vertices,
            producer,
            consumer,
        }
    }

    fn of_tree(t: &PolyTree) -> Self {
        Shape::new(t.edge_count(), t.vertices().to_vec())
    }

    fn of_forest(x: &DeltaFObject) -> Self {
        let offsets = forest_offsets(x);
        let mut vertices = Vec::new();
        for i in 1..=x.length() {
            for y in 0..x.level(i) {
                vertices.push(Vertex {
                    output: offsets[i] + y,
                    inputs: x.fibre_over(i - 1, i, y).into_iter().map(|z| offsets[i - 1] + z).collect(),
                });
            }
        }
        Shape::new(x.total_size(), vertices)
    }

    fn of_object(obj: &Object) -> Self {
        match obj {
            Object::Tree(t) => Shape::of_tree(t),
            Object::Forest(x) => Shape::of_forest(x),
        }
    }
}

fn forest_offsets(x: &DeltaFObject) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(x.length() + 2);
    let mut acc = 0;
    for &l in x.levels() {
        offsets.push(acc);
        acc += l;
    }
    offsets.push(acc);
    offsets
}

/// Where a source vertex goes: an edge (collapsed to a unit) or a piece of
/// the target with the given root vertex and membership.
#[derive(Debug, Clone)]
enum Piece {
    Unit,
    Sub { root: usize, members: Vec<bool> },
}

/// What a morphism `S -> T` does to shapes, enough to pull cells back.
#[derive(Debug, Clone)]
struct Pull {
    edge_img: Vec<usize>,
    pieces: Vec<Piece>,
    source: Shape,
}

impl Pull {
    fn of_tree(m: &OmegaMorphism, target: &Shape) -> Self {
        let pieces = m
            .vertex_map()
            .iter()
            .map(|s| {
                if s.is_trivial() {
                    Piece::Unit
                } else {
                    let mut members = vec![false; target.vertices.len()];
                    for &v in &s.vertices {
                        members[v] = true;
                    }
                    Piece::Sub {
                        root: target.producer[s.root].expect("subtree root is produced"),
                        members,
                    }
                }
            })
            .collect();
        Pull {
            edge_img: m.edge_map().to_vec(),
            pieces,
            source: Shape::of_tree(m.source()),
        }
    }

    fn of_forest(m: &DeltaFMorphism) -> Self {
        let (x, y) = (m.source(), m.target());
        let oy = forest_offsets(y);
        let phi = m.phi();
        let mut edge_img = Vec::with_capacity(x.total_size());
        for i in 0..=x.length() {
            for e in 0..x.level(i) {
                edge_img.push(oy[phi[i]] + m.eta_at(i).apply(e));
            }
        }
        let y0 = y.level(0);
        let mut pieces = Vec::new();
        for i in 1..=x.length() {
            for e in 0..x.level(i) {
                if phi[i - 1] == phi[i] {
                    pieces.push(Piece::Unit);
                    continue;
                }
                let top = phi[i];
                let r = m.eta_at(i).apply(e);
                let mut members = vec![false; y.total_size() - y0];
                for j in phi[i - 1] + 1..=top {
                    for z in y.fibre_over(j, top, r) {
                        members[oy[j] + z - y0] = true;
                    }
                }
                pieces.push(Piece::Sub {
                    root: oy[top] + r - y0,
                    members,
                });
            }
        }
        Pull {
            edge_img,
            pieces,
            source: Shape::of_forest(x),
        }
    }

    fn of_morphism(m: &Morphism, target: &Shape) -> Self {
        match m {
            Morphism::Tree(m) => Pull::of_tree(m, target),
            Morphism::Forest(m) => Pull::of_forest(m),
        }
    }

    /// The cell over the source induced by `cell` over `target`.
    fn apply(&self, o: &ColouredOperad, target: &Shape, cell: &Cell) -> Result<Cell> {
        let colours: Vec<usize> = self.edge_img.iter().map(|&e| cell.colours[e]).collect();
        let mut ops = Vec::with_capacity(self.pieces.len());
        for (v, piece) in self.pieces.iter().enumerate() {
            let vx = &self.source.vertices[v];
            match piece {
                Piece::Unit => ops.push(o.unit(colours[vx.output])),
                Piece::Sub { root, members } => {
                    let (op, leaves) = evaluate(o, target, cell, members, *root)?;
                    let sigma: Vec<usize> = vx
                        .inputs
                        .iter()
                        .map(|&e| {
                            let want = self.edge_img[e];
                            leaves.iter().position(|&l| l == want).ok_or_else(|| {
                                Error::Structural(format!("edge {want} is not a leaf of the image piece"))
                            })
                        })
                        .collect::<Result<_>>()?;
                    if sigma.len() != leaves.len() {
                        return Err(Error::Structural("image piece has the wrong arity".into()));
                    }
                    ops.push(o.act(op, &sigma));
                }
            }
        }
        Ok(Cell { colours, ops })
    }
}

/// Compose the operations of a piece bottom-up. Children are substituted
/// smallest first so partial composites stay inside the arity bound.
fn evaluate(
    o: &ColouredOperad,
    shape: &Shape,
    cell: &Cell,
    members: &[bool],
    w: usize,
) -> Result<(usize, Vec<usize>)> {
    let vx = &shape.vertices[w];
    let mut op = cell.ops[w];
    let mut parts: Vec<Vec<usize>> = vx.inputs.iter().map(|&e| vec![e]).collect();
    let mut pending = Vec::new();
    for (k, &e) in vx.inputs.iter().enumerate() {
        if let Some(u) = shape.producer[e].filter(|&u| members[u]) {
            let (q, leaves) = evaluate(o, shape, cell, members, u)?;
            pending.push((leaves.len(), k, q, leaves));
        }
    }
    pending.sort_by_key(|p| (p.0, p.1));
    for (_, k, q, leaves) in pending {
        let pos: usize = parts[..k].iter().map(Vec::len).sum();
        op = o.compose(op, pos, q).ok_or_else(|| {
            Error::Resource(format!(
                "{} ∘_{pos} {} exceeds the arity bound of the operad",
                o.op(op).name,
                o.op(q).name
            ))
        })?;
        parts[k] = leaves;
    }
    Ok((op, parts.concat()))
}

/// All cells over a shape, sorted.
fn cells_over(o: &ColouredOperad, shape: &Shape) -> Result<Vec<Cell>> {
    // a vertex is visited after the vertex consuming its output
    let mut order = Vec::with_capacity(shape.vertices.len());
    let mut stack: Vec<usize> = (0..shape.vertices.len())
        .filter(|&v| shape.consumer[shape.vertices[v].output].is_none())
        .collect();
    while let Some(v) = stack.pop() {
        order.push(v);
        for &e in &shape.vertices[v].inputs {
            if let Some(u) = shape.producer[e] {
                stack.push(u);
            }
        }
    }
    let free: Vec<usize> = (0..shape.edges)
        .filter(|&e| shape.producer[e].is_none() && shape.consumer[e].is_none())
        .collect();
    let mut out = Vec::new();
    let mut cell = Cell {
        colours: vec![usize::MAX; shape.edges],
        ops: vec![usize::MAX; shape.vertices.len()],
    };
    fill(o, shape, &order, &free, 0, &mut cell, &mut out)?;
    out.sort();
    Ok(out)
}

fn fill(
    o: &ColouredOperad,
    shape: &Shape,
    order: &[usize],
    free: &[usize],
    pos: usize,
    cell: &mut Cell,
    out: &mut Vec<Cell>,
) -> Result<()> {
    if pos == order.len() + free.len() {
        if out.len() >= CELL_GUARD {
            return Err(Error::Resource(format!("more than {CELL_GUARD} cells over one object")));
        }
        out.push(cell.clone());
        return Ok(());
    }
    let ncol = o.colours().len();
    if pos >= order.len() {
        let e = free[pos - order.len()];
        for c in 0..ncol {
            cell.colours[e] = c;
            fill(o, shape, order, free, pos + 1, cell, out)?;
        }
        cell.colours[e] = usize::MAX;
        return Ok(());
    }
    let v = order[pos];
    let vx = &shape.vertices[v];
    let out_set = cell.colours[vx.output] != usize::MAX;
    let outputs: Vec<usize> = if out_set { vec![cell.colours[vx.output]] } else { (0..ncol).collect() };
    for c in outputs {
        for &p in o.ops_with(c, vx.inputs.len()) {
            cell.colours[vx.output] = c;
            cell.ops[v] = p;
            for (&e, &ce) in vx.inputs.iter().zip(&o.op(p).inputs) {
                cell.colours[e] = ce;
            }
            fill(o, shape, order, free, pos + 1, cell, out)?;
        }
    }
    cell.ops[v] = usize::MAX;
    for &e in &vx.inputs {
        cell.colours[e] = usize::MAX;
    }
    if !out_set {
        cell.colours[vx.output] = usize::MAX;
    }
    Ok(())
}

fn cell_label(o: &ColouredOperad, c: &Cell) -> String {
    let colours: Vec<&str> = c.colours.iter().map(|&x| o.colours()[x].as_str()).collect();
    let ops: Vec<&str> = c.ops.iter().map(|&p| o.op(p).name.as_str()).collect();
    format!("{}|{}", colours.join(","), ops.join(","))
}

/// The nerve of an operad on a truncation, with its cells.
#[derive(Debug, Clone)]
pub struct Nerve {
    operad: Arc<ColouredOperad>,
    presheaf: SetPresheaf,
    cells: Vec<Vec<Cell>>,
    index: Vec<HashMap<Cell, u32>>,
}

impl Nerve {
    pub fn operad(&self) -> &Arc<ColouredOperad> {
        &self.operad
    }

    pub fn presheaf(&self) -> &SetPresheaf {
        &self.presheaf
    }

    pub fn into_presheaf(self) -> SetPresheaf {
        self.presheaf
    }

    pub fn cells(&self, a: usize) -> &[Cell] {
        &self.cells[a]
    }

    pub fn find(&self, a: usize, cell: &Cell) -> Option<usize> {
        self.index[a].get(cell).map(|&i| i as usize)
    }
}

/// The nerve on any of the three flavors. Functoriality is checked.
pub fn nerve(o: &Arc<ColouredOperad>, trunc: &Arc<IndexTruncation>) -> Result<Nerve> {
    let shapes: Vec<Shape> = trunc.objects().iter().map(Shape::of_object).collect();
    let cells = shapes
        .par_iter()
        .map(|s| cells_over(o, s))
        .collect::<Result<Vec<_>>>()?;
    let index: Vec<HashMap<Cell, u32>> = cells
        .iter()
        .map(|cs| cs.iter().enumerate().map(|(i, c)| (c.clone(), i as u32)).collect())
        .collect();
    let labels = cells.iter().map(|cs| cs.iter().map(|c| cell_label(o, c)).collect()).collect();
    let k = trunc.len();
    let actions = (0..k)
        .into_par_iter()
        .map(|a| {
            (0..k)
                .map(|b| {
                    trunc
                        .homs(a, b)
                        .iter()
                        .map(|m| {
                            let pull = Pull::of_morphism(m, &shapes[b]);
                            cells[b]
                                .iter()
                                .map(|c| {
                                    let d = pull.apply(o, &shapes[b], c)?;
                                    index[a].get(&d).copied().ok_or_else(|| {
                                        Error::Structural(format!("pulled-back cell missing over {}", trunc.key(a)))
                                    })
                                })
                                .collect::<Result<Vec<u32>>>()
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let presheaf = SetPresheaf::new(trunc.clone(), labels, actions)?;
    Ok(Nerve {
        operad: o.clone(),
        presheaf,
        cells,
        index,
    })
}

pub fn nerve_omega(o: &Arc<ColouredOperad>, trunc: &Arc<IndexTruncation>) -> Result<Nerve> {
    if trunc.flavor() != Flavor::Omega {
        return Err(Error::Domain("expected a truncation of trees".into()));
    }
    nerve(o, trunc)
}

/// The nerve on level forests or level trees.
pub fn nerve_deltaf(o: &Arc<ColouredOperad>, trunc: &Arc<IndexTruncation>) -> Result<Nerve> {
    if trunc.flavor() == Flavor::Omega {
        return Err(Error::Domain("expected a truncation of level forests".into()));
    }
    nerve(o, trunc)
}

/// The map of nerves induced by an operad morphism.
pub fn nerve_map(phi: &OperadMorphism, src: &Nerve, tgt: &Nerve) -> Result<PresheafMap> {
    if !super::same_truncation(src.presheaf.trunc(), tgt.presheaf.trunc()) {
        return Err(Error::Domain("nerves over different truncations".into()));
    }
    phi.validate(&src.operad, &tgt.operad)?;
    let components = src
        .cells
        .iter()
        .enumerate()
        .map(|(a, cs)| {
            cs.iter()
                .map(|c| {
                    let d = Cell {
                        colours: c.colours.iter().map(|&x| phi.colour_map[x]).collect(),
                        ops: c.ops.iter().map(|&p| phi.op_map[p]).collect(),
                    };
                    tgt.find(a, &d)
                        .map(|i| i as u32)
                        .ok_or_else(|| Error::Structural("image cell missing".into()))
                })
                .collect::<Result<Vec<u32>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PresheafMap { components })
}

/// `F(m)` for an explicit tree morphism, located in the truncation.
fn act_tree(f: &SetPresheaf, m: OmegaMorphism, x: usize) -> Result<usize> {
    let (a, b, i) = f.trunc().transport(&Morphism::Tree(m))?;
    debug_assert!(x < f.size(b));
    Ok(f.act(a, b, i, x))
}

fn locate(t: &IndexTruncation, tree: &Arc<PolyTree>) -> Result<usize> {
    t.find(&Object::Tree(tree.clone()))
        .map(|(a, _)| a)
        .ok_or_else(|| Error::Domain(format!("{} is outside the truncation", tree.key())))
}

fn distinct_or(labels: &[String], fallback: impl Fn(usize) -> String) -> Vec<String> {
    let mut sorted = labels.to_vec();
    sorted.sort();
    sorted.dedup();
    if sorted.len() == labels.len() {
        labels.to_vec()
    } else {
        (0..labels.len()).map(fallback).collect()
    }
}

/// Read off a coloured operad from a Segal presheaf on trees: colours are
/// the values on the edge, operations the values on corollas, and
/// composition goes through trees with two vertices. The arity bound is that
/// of the truncation.
pub fn operad_from_segal(f: &SetPresheaf) -> Result<ColouredOperad> {
    let t = f.trunc();
    let (Flavor::Omega, Some(arity), Some(verts)) = (t.flavor(), t.bound().max_arity, t.bound().max_vertices) else {
        return Err(Error::Domain("expected a presheaf on trees".into()));
    };
    if verts < 2 {
        return Err(Error::Domain("composition needs trees with two vertices".into()));
    }
    let segal = super::check_segal_omega(f)?;
    if !segal.passed() {
        return Err(Error::invalid(
            "Segal presheaf",
            segal.failures.first().cloned().unwrap_or_default(),
        ));
    }
    let eta = Arc::new(PolyTree::eta());
    let corollas: Vec<Arc<PolyTree>> = (0..=arity).map(|n| Arc::new(PolyTree::corolla(n))).collect();
    let e = locate(t, &eta)?;
    let colours = distinct_or(f.labels(e), |c| format!("c{c}"));
    let mut offsets = vec![0];
    let mut ops = Vec::new();
    let mut op_labels = Vec::new();
    for (n, cn) in corollas.iter().enumerate() {
        let b = locate(t, cn)?;
        for x in 0..f.size(b) {
            let output = act_tree(f, OmegaMorphism::from_edge_map(&eta, cn, vec![0])?, x)?;
            let inputs = (1..=n)
                .map(|k| act_tree(f, OmegaMorphism::from_edge_map(&eta, cn, vec![k])?, x))
                .collect::<Result<Vec<_>>>()?;
            ops.push(Operation {
                name: String::new(),
                inputs,
                output,
            });
            op_labels.push(f.labels(b)[x].clone());
        }
        offsets.push(ops.len());
    }
    let names = distinct_or(&op_labels, |p| format!("op{p}"));
    for (op, name) in ops.iter_mut().zip(names) {
        op.name = name;
    }
    let arity_of = |p: usize| ops[p].arity();
    let local = |p: usize| p - offsets[arity_of(p)];

    let units = {
        let s = OmegaMorphism::from_edge_map(&corollas[1], &eta, vec![0, 0])?;
        (0..colours.len())
            .map(|c| Ok(offsets[1] + act_tree(f, s.clone(), c)?))
            .collect::<Result<Vec<_>>>()?
    };
    let mut actions = Vec::with_capacity(ops.len());
    for p in 0..ops.len() {
        let n = arity_of(p);
        let row = permutations(n)
            .iter()
            .map(|sigma| {
                let mut map = vec![0];
                map.extend(sigma.iter().map(|&s| s + 1));
                let alpha = OmegaMorphism::from_edge_map(&corollas[n], &corollas[n], map)?;
                Ok(offsets[n] + act_tree(f, alpha, local(p))?)
            })
            .collect::<Result<Vec<_>>>()?;
        actions.push(row);
    }

    let mut composition = std::collections::BTreeMap::new();
    for a in 1..=arity {
        for i in 0..a {
            for b in 0..=arity + 1 - a {
                let mut vertices = vec![
                    Vertex {
                        output: 0,
                        inputs: (1..=a).collect(),
                    },
                    Vertex {
                        output: i + 1,
                        inputs: (a + 1..=a + b).collect(),
                    },
                ];
                vertices.sort_by_key(|v| v.output);
                let tree = Arc::new(PolyTree::from_vertices(a + b + 1, vertices)?);
                let inner_p = OmegaMorphism::from_edge_map(&corollas[a], &tree, (0..=a).collect())?;
                let mut qmap = vec![i + 1];
                qmap.extend(a + 1..=a + b);
                let inner_q = OmegaMorphism::from_edge_map(&corollas[b], &tree, qmap)?;
                let mut dmap = vec![0];
                dmap.extend(1..=i);
                dmap.extend(a + 1..=a + b);
                dmap.extend(i + 2..=a);
                let delta = OmegaMorphism::from_edge_map(&corollas[a + b - 1], &tree, dmap)?;
                let (tp, tq, td) = (
                    t.transport(&Morphism::Tree(inner_p))?,
                    t.transport(&Morphism::Tree(inner_q))?,
                    t.transport(&Morphism::Tree(delta))?,
                );
                let mut found: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
                for w in 0..f.size(tp.1) {
                    found
                        .entry((f.act(tp.0, tp.1, tp.2, w), f.act(tq.0, tq.1, tq.2, w)))
                        .or_default()
                        .push(w);
                }
                for p in offsets[a]..offsets[a + 1] {
                    for q in offsets[b]..offsets[b + 1] {
                        if ops[q].output != ops[p].inputs[i] {
                            continue;
                        }
                        match found.get(&(local(p), local(q))).map(Vec::as_slice) {
                            Some(&[w]) => {
                                let r = offsets[a + b - 1] + f.act(td.0, td.1, td.2, w);
                                composition.insert((p, i, q), r);
                            }
                            other => {
                                return Err(Error::invalid(
                                    "Segal presheaf",
                                    format!(
                                        "{} grafted onto input {i} of {} has {} fillers",
                                        ops[q].name,
                                        ops[p].name,
                                        other.map_or(0, <[usize]>::len)
                                    ),
                                ))
                            }
                        }
                    }
                }
            }
        }
    }
    ColouredOperad::new(colours, ops, units, actions, composition, arity)
}

/// The comparison between an operad truncated to the arity bound of `n` and
/// the operad read back off its nerve.
#[derive(Debug, Clone)]
pub struct RoundTrip {
    pub truncated: ColouredOperad,
    pub recovered: ColouredOperad,
    pub morphism: OperadMorphism,
}

pub fn segal_round_trip(n: &Nerve) -> Result<RoundTrip> {
    let t = n.presheaf.trunc();
    let o = &n.operad;
    let mut recovered = operad_from_segal(&n.presheaf)?;
    // an operad with a smaller arity bound comes back with that of the
    // truncation; relabel only if nothing lives above its own bound
    if o.max_arity() < recovered.max_arity() && recovered.ops().iter().all(|op| op.arity() <= o.max_arity()) {
        recovered = recovered.truncate(o.max_arity())?;
    }
    let arity = recovered.max_arity();
    let truncated = o.truncate(arity)?;
    let eta = Arc::new(PolyTree::eta());
    let e = locate(t, &eta)?;
    let colour_map = (0..o.colours().len())
        .map(|c| {
            n.find(e, &Cell { colours: vec![c], ops: vec![] })
                .ok_or_else(|| Error::Structural("colour cell missing".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut offsets = vec![0];
    for k in 0..=arity {
        let b = locate(t, &Arc::new(PolyTree::corolla(k)))?;
        offsets.push(offsets[k] + n.presheaf.size(b));
    }
    let op_map = truncated
        .ops()
        .iter()
        .map(|op| {
            let p = o.op_index(&op.name).expect("truncation keeps names");
            let k = op.arity();
            let corolla = Arc::new(PolyTree::corolla(k));
            let (b, iso) = t.find(&Object::Tree(corolla.clone())).expect("corolla located");
            let mut colours = vec![op.output];
            colours.extend(&op.inputs);
            let cell = Cell { colours, ops: vec![p] };
            let stored = Pull::of_morphism(&iso, &Shape::of_tree(&corolla)).apply(o, &Shape::of_tree(&corolla), &cell)?;
            n.find(b, &stored)
                .map(|x| offsets[k] + x)
                .ok_or_else(|| Error::Structural("operation cell missing".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RoundTrip {
        truncated,
        recovered,
        morphism: OperadMorphism { colour_map, op_map },
    })
}

/// `τ*F` on level trees: `(τ*F)(X) = F(τX)`.
pub fn tau_pullback(f: &SetPresheaf, trunc: &Arc<IndexTruncation>) -> Result<SetPresheaf> {
    let omega = f.trunc();
    if omega.flavor() != Flavor::Omega || trunc.flavor() != Flavor::Deltaf1 {
        return Err(Error::Domain("pull back from trees to level trees".into()));
    }
    let images = trunc
        .objects()
        .iter()
        .map(|x| tau_object(x.as_forest().expect("level tree")))
        .collect::<Result<Vec<_>>>()?;
    let at = images
        .iter()
        .map(|im| locate(omega, im.tree()))
        .collect::<Result<Vec<_>>>()?;
    let labels = at.iter().map(|&a| f.labels(a).to_vec()).collect();
    let k = trunc.len();
    let actions = (0..k)
        .into_par_iter()
        .map(|a| {
            (0..k)
                .map(|b| {
                    trunc
                        .homs(a, b)
                        .iter()
                        .map(|m| {
                            let tm = tau_morphism_between(m.as_forest().unwrap(), &images[a], &images[b])?;
                            let (p, q, i) = omega.transport(&Morphism::Tree(tm))?;
                            Ok(f.action(p, q, i).to_vec())
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    SetPresheaf::new(trunc.clone(), labels, actions)
}

/// The comparison `N(O) -> τ*N(O)` on level trees, sending a cell over `X`
/// to the same cell over `τX`. Returns `τ*N(O)` and the map.
pub fn tau_pullback_comparison(level: &Nerve, trees: &Nerve) -> Result<(SetPresheaf, PresheafMap)> {
    if !Arc::ptr_eq(&level.operad, &trees.operad) && level.operad != trees.operad {
        return Err(Error::Domain("nerves of different operads".into()));
    }
    let lt = level.presheaf.trunc();
    let omega = trees.presheaf.trunc();
    let pulled = tau_pullback(&trees.presheaf, lt)?;
    let o = &level.operad;
    let components = lt
        .objects()
        .iter()
        .enumerate()
        .map(|(a, x)| {
            let image = tau_object(x.as_forest().expect("level tree"))?;
            let shape = Shape::of_tree(image.tree());
            let (b, iso) = omega
                .find(&Object::Tree(image.tree().clone()))
                .ok_or_else(|| Error::Domain(format!("τ of {} is outside the truncation", lt.key(a))))?;
            let pull = Pull::of_morphism(&iso, &shape);
            level.cells[a]
                .iter()
                .map(|c| {
                    let d = pull.apply(o, &shape, c)?;
                    trees
                        .find(b, &d)
                        .map(|i| i as u32)
                        .ok_or_else(|| Error::Structural("comparison cell missing".into()))
                })
                .collect::<Result<Vec<u32>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((pulled, PresheafMap { components }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presheaf::operad::{associative, commutative, free, iso_pair, trivial};
    use crate::presheaf::{check_segal, Bound};

    fn omega(v: usize, a: usize) -> Arc<IndexTruncation> {
        Arc::new(IndexTruncation::new(Flavor::Omega, Bound::trees(v, a)).unwrap())
    }

    #[test]
    fn nerve_of_trivial_is_terminal_on_trees() {
        let t = omega(3, 2);
        let n = nerve_omega(&Arc::new(trivial()), &t).unwrap();
        for a in 0..t.len() {
            let linear = t.object(a).as_tree().unwrap().vertices().iter().all(|v| v.inputs.len() == 1);
            assert_eq!(n.presheaf().size(a), usize::from(linear), "{}", t.key(a));
        }
    }

    #[test]
    fn commutative_nerve_counts_one_cell_per_tree() {
        let t = omega(3, 2);
        let n = nerve_omega(&Arc::new(commutative(2)), &t).unwrap();
        assert!(n.presheaf().sizes().iter().all(|&s| s == 1));
    }

    #[test]
    fn associative_nerve_counts_orderings() {
        // cells over a tree are a choice of ordering at each vertex
        let t = omega(3, 2);
        let n = nerve_omega(&Arc::new(associative(2)), &t).unwrap();
        for a in 0..t.len() {
            let tree = t.object(a).as_tree().unwrap();
            let expect: usize = tree.vertices().iter().map(|v| (1..=v.inputs.len()).product::<usize>()).product();
            assert_eq!(n.presheaf().size(a), expect, "{}", t.key(a));
        }
    }

    #[test]
    fn nerves_are_segal_and_round_trip() {
        let tree = Arc::new(PolyTree::from_code("((||)|)").unwrap());
        for o in [trivial(), commutative(2), associative(2), iso_pair(), free(&tree).unwrap()] {
            let t = omega(3, 2);
            let o = Arc::new(o);
            let n = nerve_omega(&o, &t).unwrap();
            let r = check_segal(n.presheaf()).unwrap();
            assert!(r.passed(), "{:?}", r.failures);
            let rt = segal_round_trip(&n).unwrap();
            assert!(rt.morphism.is_iso(&rt.truncated, &rt.recovered));
        }
    }

    #[test]
    fn nerve_of_free_operad_is_representable() {
        let t = omega(3, 2);
        for x in 0..t.len() {
            let tree = t.object(x).as_tree().unwrap();
            let n = nerve_omega(&Arc::new(free(tree).unwrap()), &t).unwrap();
            let y = SetPresheaf::representable(&t, x).unwrap();
            assert_eq!(n.presheaf().sizes(), y.sizes(), "{}", t.key(x));
        }
    }

    #[test]
    fn nerves_on_level_forests_are_segal() {
        let t = Arc::new(IndexTruncation::new(Flavor::Deltaf, Bound::forests(4)).unwrap());
        for o in [commutative(4), associative(4)] {
            let n = nerve_deltaf(&Arc::new(o), &t).unwrap();
            let r = check_segal(n.presheaf()).unwrap();
            assert!(r.passed(), "{:?}", r.failures);
        }
    }

    #[test]
    fn level_tree_nerve_is_pulled_back_from_trees() {
        let lt = Arc::new(IndexTruncation::new(Flavor::Deltaf1, Bound::level_trees(5, 3, 2)).unwrap());
        let t = omega(3, 2);
        let o = Arc::new(associative(2));
        let nl = nerve_deltaf(&o, &lt).unwrap();
        let nt = nerve_omega(&o, &t).unwrap();
        let (pulled, map) = tau_pullback_comparison(&nl, &nt).unwrap();
        map.validate(nl.presheaf(), &pulled).unwrap();
        assert!(map.is_iso(&pulled.sizes()));
    }

    #[test]
    fn reading_an_operad_off_a_non_segal_presheaf_fails() {
        let t = omega(2, 2);
        let x = t.find_key("(|(|))").unwrap();
        let (core, _) = crate::presheaf::segal_core(&t, x).unwrap();
        assert!(matches!(operad_from_segal(&core), Err(Error::Invalid { .. })));
        let o = operad_from_segal(&SetPresheaf::terminal(&t)).unwrap();
        assert_eq!(o.colours().len(), 1);
        assert_eq!(o.ops().len(), 3);
    }

    #[test]
    fn nerve_map_of_collapse() {
        let t = omega(2, 1);
        let src = nerve_omega(&Arc::new(iso_pair()), &t).unwrap();
        let tgt = nerve_omega(&Arc::new(trivial()), &t).unwrap();
        let phi = OperadMorphism {
            colour_map: vec![0, 0],
            op_map: vec![0; iso_pair().ops().len()],
        };
        let m = nerve_map(&phi, &src, &tgt).unwrap();
        m.validate(src.presheaf(), tgt.presheaf()).unwrap();
        assert!(!m.is_injective());
    }
}
