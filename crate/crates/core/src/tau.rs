//! The functor `τ` from level trees to trees, and exhaustive checks of its
//! properties over bounded families of objects.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::deltaf::{
    self, degeneracies, elementary_objects_over, enumerate_hom, enumerate_level_trees,
    enumerate_objects, restrict_to_fibre, DeltaFMorphism, DeltaFObject, FactorizationSystem,
};
use crate::error::{Error, Result};
use crate::omega::{
    enumerate_hom_omega, enumerate_trees, EdgeId, OmegaMorphism, PolyTree, Subtree, Vertex,
    VertexId,
};
use crate::report::{CheckReport, Tally};

const GUARD: usize = deltaf::DEFAULT_HOM_GUARD;

/// `τX` together with the bookkeeping that identifies its edges with the
/// elements of the levels of `X`.
#[derive(Debug, Clone)]
pub struct TauImage {
    source: Arc<DeltaFObject>,
    tree: Arc<PolyTree>,
    offsets: Vec<usize>,
    edge_index: Vec<(usize, usize)>,
}

impl TauImage {
    pub fn source(&self) -> &Arc<DeltaFObject> {
        &self.source
    }

    pub fn tree(&self) -> &Arc<PolyTree> {
        &self.tree
    }

    /// The edge for `x ∈ f(level)`.
    pub fn edge(&self, level: usize, x: usize) -> EdgeId {
        self.offsets[level] + x
    }

    /// The vertex for `x ∈ f(level)`, `level >= 1`.
    pub fn vertex(&self, level: usize, x: usize) -> VertexId {
        debug_assert!(level >= 1);
        self.offsets[level] + x - self.source.level(0)
    }

    /// `(level, element)` for every edge.
    pub fn edge_index(&self) -> &[(usize, usize)] {
        &self.edge_index
    }

    /// The vertex coming from the single element of the top level.
    pub fn root_vertex(&self) -> Option<VertexId> {
        let n = self.source.length();
        (n >= 1).then(|| self.vertex(n, 0))
    }
}

pub fn tau_object(x: &Arc<DeltaFObject>) -> Result<TauImage> {
    if !x.is_level_tree() {
        return Err(Error::Domain(format!("{x} is not a level tree")));
    }
    let n = x.length();
    let mut offsets = Vec::with_capacity(n + 1);
    let mut edge_index = Vec::new();
    for i in 0..=n {
        offsets.push(edge_index.len());
        edge_index.extend((0..x.level(i)).map(|e| (i, e)));
    }
    let vertices = (1..=n)
        .flat_map(|i| {
            let fibres = x.step(i - 1).fibres();
            let offsets = &offsets;
            fibres.into_iter().enumerate().map(move |(e, fibre)| Vertex {
                output: offsets[i] + e,
                inputs: fibre.into_iter().map(|y| offsets[i - 1] + y).collect(),
            })
        })
        .collect();
    let names = edge_index
        .iter()
        .map(|&(i, e)| format!("{i}.{}", e + 1))
        .collect();
    let tree = PolyTree::from_vertices(edge_index.len(), vertices)?.with_edge_names(names)?;
    Ok(TauImage {
        source: x.clone(),
        tree: Arc::new(tree),
        offsets,
        edge_index,
    })
}

pub fn tau_morphism(m: &DeltaFMorphism) -> Result<OmegaMorphism> {
    let src = tau_object(m.source())?;
    let tgt = tau_object(m.target())?;
    tau_morphism_between(m, &src, &tgt)
}

/// `τ(m)` with the images of source and target supplied.
///
/// The three components are built directly from `(φ, η)`; the edge component
/// alone is then used to reconstruct the morphism, and the two must agree.
pub fn tau_morphism_between(
    m: &DeltaFMorphism,
    src: &TauImage,
    tgt: &TauImage,
) -> Result<OmegaMorphism> {
    if src.source.as_ref() != m.source().as_ref() || tgt.source.as_ref() != m.target().as_ref() {
        return Err(Error::Structural("τ images do not match the morphism".into()));
    }
    let x = m.source();
    let y = m.target();
    let n = x.length();
    let phi = m.phi();
    let edge_map: Vec<EdgeId> = src
        .edge_index
        .iter()
        .map(|&(i, e)| tgt.edge(phi[i], m.eta_at(i).apply(e)))
        .collect();
    // the level-tree subtree of the target with root `r ∈ g(top)` cut at `bottom`
    let subtree = |r: usize, top: usize, bottom: usize| Subtree {
        root: tgt.edge(top, r),
        vertices: {
            let mut v: Vec<VertexId> = (bottom + 1..=top)
                .flat_map(|k| {
                    y.fibre_over(k, top, r)
                        .into_iter()
                        .map(move |z| tgt.vertex(k, z))
                })
                .collect();
            v.sort_unstable();
            v
        },
    };
    let vertex_map: Vec<Subtree> = (1..=n)
        .flat_map(|i| (0..x.level(i)).map(move |e| (i, e)))
        .map(|(i, e)| subtree(m.eta_at(i).apply(e), phi[i], phi[i - 1]))
        .collect();
    let explicit = OmegaMorphism::from_assignments(src.tree(), tgt.tree(), edge_map.clone(), vertex_map)?;
    // flag component: x ∈ f(i), i < n
    let mut flags: BTreeMap<(VertexId, EdgeId), (Subtree, EdgeId)> = BTreeMap::new();
    for i in 0..n {
        for e in 0..x.level(i) {
            let up = x.step(i).apply(e);
            let marked = subtree(m.eta_at(i + 1).apply(up), phi[i + 1], phi[i]);
            flags.insert(
                (src.vertex(i + 1, up), src.edge(i, e)),
                (marked, tgt.edge(phi[i], m.eta_at(i).apply(e))),
            );
        }
    }
    let induced: BTreeMap<(VertexId, EdgeId), (Subtree, EdgeId)> = src
        .tree()
        .flags()
        .into_iter()
        .zip(explicit.flag_map())
        .collect();
    if induced != flags {
        return Err(Error::Structural(format!(
            "internal: flag component of τ({}) disagrees with its vertex component",
            m.key()
        )));
    }
    let rebuilt = OmegaMorphism::from_edge_map(src.tree(), tgt.tree(), edge_map)?;
    if rebuilt.vertex_map() != explicit.vertex_map() {
        return Err(Error::Structural(format!(
            "internal: τ({}) disagrees with its edge-map reconstruction",
            m.key()
        )));
    }
    Ok(explicit)
}

/// Objects, their images and all hom-sets of the level trees within a
/// weight bound.
struct Universe {
    objects: Vec<Arc<DeltaFObject>>,
    images: Vec<TauImage>,
    homs: Vec<Vec<Vec<DeltaFMorphism>>>,
}

impl Universe {
    fn new(max_weight: usize) -> Result<Self> {
        let objects = enumerate_objects(max_weight, true);
        let images = objects.iter().map(tau_object).collect::<Result<Vec<_>>>()?;
        let homs = objects
            .par_iter()
            .map(|a| {
                objects
                    .iter()
                    .map(|b| enumerate_hom(a, b, GUARD))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Universe {
            objects,
            images,
            homs,
        })
    }

    fn tau(&self, a: usize, b: usize, m: &DeltaFMorphism) -> Result<OmegaMorphism> {
        tau_morphism_between(m, &self.images[a], &self.images[b])
    }
}

fn err_tally(e: Error) -> Tally {
    let mut t = Tally::default();
    t.check(false, || e.to_string());
    t
}

/// `τ(g∘f) = τ(g)∘τ(f)` for every composable pair of level trees of weight
/// at most `max_weight`.
pub fn check_tau_functor(max_weight: usize) -> CheckReport {
    let report = CheckReport::new("functor", &[("max_weight", max_weight)]);
    let u = match Universe::new(max_weight) {
        Ok(u) => u,
        Err(e) => return report.absorb_all([err_tally(e)]),
    };
    let k = u.objects.len();
    let tallies: Vec<Tally> = (0..k)
        .into_par_iter()
        .map(|b| {
            let mut t = Tally::default();
            for a in 0..k {
                for f in &u.homs[a][b] {
                    let tf = match u.tau(a, b, f) {
                        Ok(x) => x,
                        Err(e) => {
                            t.check(false, || e.to_string());
                            continue;
                        }
                    };
                    for c in 0..k {
                        for g in &u.homs[b][c] {
                            let outcome = (|| -> Result<bool> {
                                let gf = g.after(f)?;
                                let lhs = u.tau(a, c, &gf)?;
                                let rhs = u.tau(b, c, g)?.after(&tf)?;
                                Ok(lhs == rhs && lhs.vertex_map() == rhs.vertex_map())
                            })();
                            t.check(matches!(outcome, Ok(true)), || {
                                format!("{} then {}: {outcome:?}", f.key(), g.key())
                            });
                        }
                    }
                }
            }
            t
        })
        .collect();
    report.absorb_all(tallies)
}

/// Class flags are carried along by `τ`, and the factorizations of `m` in
/// both systems are sent to the corresponding factorizations of `τ(m)`.
pub fn check_tau_factorization(max_weight: usize) -> CheckReport {
    let report = CheckReport::new("factorization_tau", &[("max_weight", max_weight)]);
    let u = match Universe::new(max_weight) {
        Ok(u) => u,
        Err(e) => return report.absorb_all([err_tally(e)]),
    };
    let k = u.objects.len();
    let tallies: Vec<Tally> = (0..k)
        .into_par_iter()
        .map(|a| {
            let mut t = Tally::default();
            for b in 0..k {
                for m in &u.homs[a][b] {
                    let outcome = factorization_preserved(&u, a, b, m);
                    t.check(matches!(outcome, Ok(true)), || {
                        format!("{}: {outcome:?}", m.key())
                    });
                }
            }
            t
        })
        .collect();
    report.absorb_all(tallies)
}

fn factorization_preserved(u: &Universe, a: usize, b: usize, m: &DeltaFMorphism) -> Result<bool> {
    let tm = u.tau(a, b, m)?;
    let before = m.classify();
    let after = tm.classify();
    let implied = (!before.inert || after.inert)
        && (!before.active || after.active)
        && (!before.surjective || after.surjective)
        && (!before.injective || after.injective);
    if !implied {
        return Ok(false);
    }
    for system in [FactorizationSystem::ActiveInert, FactorizationSystem::SurjectiveInjective] {
        let (first, second) = m.factorize(system);
        let first_t = tau_morphism(&first)?;
        let second_t = tau_morphism(&second)?;
        if second_t.after(&first_t)? != tm {
            return Ok(false);
        }
        let (c1, c2) = (first_t.classify(), second_t.classify());
        let ok = match system {
            FactorizationSystem::ActiveInert => {
                // the middle object is the image subtree
                let (_, omega_inert) = tm.factorize();
                c1.active && c2.inert && omega_inert.source().code() == first_t.target().code()
            }
            FactorizationSystem::SurjectiveInjective => c1.surjective && c2.injective,
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The elementary slice over `X` and the elementary slice over `τX`:
/// objects and morphisms correspond under `τ`.
pub fn check_elementary_equivalence(x: &Arc<DeltaFObject>) -> CheckReport {
    let mut report = CheckReport::new("elementary", &[("weight", x.weight())]);
    let mut t = Tally::default();
    if let Err(e) = elementary_equivalence(x, &mut t) {
        t.check(false, || e.to_string());
    }
    report.absorb(t);
    report
}

fn elementary_equivalence(x: &Arc<DeltaFObject>, t: &mut Tally) -> Result<()> {
    let img = tau_object(x)?;
    let tree = img.tree().clone();
    let over_x = elementary_objects_over(x);
    // the elementary slice over the tree: one edge per edge, one corolla per vertex
    let mut over_t: Vec<OmegaMorphism> = Vec::new();
    let eta = Arc::new(PolyTree::eta());
    for e in 0..tree.edge_count() {
        over_t.push(OmegaMorphism::from_edge_map(&eta, &tree, vec![e])?);
    }
    for v in tree.vertices() {
        let c = Arc::new(PolyTree::corolla(v.inputs.len()));
        let mut edges = vec![v.output];
        edges.extend_from_slice(&v.inputs);
        over_t.push(OmegaMorphism::from_edge_map(&c, &tree, edges)?);
    }
    let images: Vec<OmegaMorphism> = over_x
        .iter()
        .map(|el| tau_morphism_between(&el.map, &tau_object(&el.object)?, &img))
        .collect::<Result<_>>()?;
    // objects: each image is isomorphic over the tree to exactly one object
    let mut hit = vec![0usize; over_t.len()];
    let mut partner = Vec::with_capacity(images.len());
    for (i, im) in images.iter().enumerate() {
        let matches: Vec<usize> = over_t
            .iter()
            .enumerate()
            .filter(|(_, o)| iso_over(im, o))
            .map(|(j, _)| j)
            .collect();
        t.check(matches.len() == 1, || {
            format!("{x}: elementary {i} matches {} objects over τX", matches.len())
        });
        for &j in &matches {
            hit[j] += 1;
        }
        partner.push(matches.first().copied());
    }
    t.check(hit.iter().all(|&h| h == 1), || {
        format!("{x}: objects over τX hit {hit:?} times")
    });
    // morphisms
    for (i, p) in over_x.iter().enumerate() {
        for (j, q) in over_x.iter().enumerate() {
            let delta: Vec<DeltaFMorphism> = enumerate_hom(&p.object, &q.object, GUARD)?
                .into_iter()
                .filter(|h| h.classify().inert && q.map.after(h).map(|c| c == p.map).unwrap_or(false))
                .collect();
            let tau_edges: BTreeSet<Vec<EdgeId>> = delta
                .iter()
                .map(|h| tau_morphism(h).map(|m| m.edge_map().to_vec()))
                .collect::<Result<_>>()?;
            let (Some(pi), Some(qj)) = (partner[i], partner[j]) else {
                continue;
            };
            let omega = slice_hom(&over_t[pi], &over_t[qj])?;
            let direct = slice_hom(&images[i], &images[j])?;
            t.check(
                tau_edges.len() == delta.len() && delta.len() == omega && omega == direct,
                || {
                    format!(
                        "{x}: hom({i},{j}) has {} maps, τ-images {}, {omega} over τX",
                        delta.len(),
                        tau_edges.len()
                    )
                },
            );
        }
    }
    Ok(())
}

fn iso_over(a: &OmegaMorphism, b: &OmegaMorphism) -> bool {
    if a.source().code() != b.source().code() {
        return false;
    }
    enumerate_hom_omega(a.source(), b.source(), GUARD)
        .map(|homs| {
            homs.iter()
                .any(|h| h.is_iso() && b.after(h).map(|c| c == *a).unwrap_or(false))
        })
        .unwrap_or(false)
}

fn slice_hom(a: &OmegaMorphism, b: &OmegaMorphism) -> Result<usize> {
    Ok(enumerate_hom_omega(a.source(), b.source(), GUARD)?
        .iter()
        .filter(|h| h.is_inert() && b.after(h).map(|c| c == *a).unwrap_or(false))
        .count())
}

/// Elementary equivalence for every level tree of weight at most `max_weight`.
pub fn check_elementary_equivalence_all(max_weight: usize) -> CheckReport {
    let report = CheckReport::new("elementary", &[("max_weight", max_weight)]);
    let tallies: Vec<Tally> = enumerate_objects(max_weight, true)
        .par_iter()
        .map(|x| {
            let mut t = Tally::default();
            if let Err(e) = elementary_equivalence(x, &mut t) {
                t.check(false, || e.to_string());
            }
            t
        })
        .collect();
    report.absorb_all(tallies)
}

/// `Hom(X, E) -> Hom(τX, τE)` is a bijection for the elementary `E` and all
/// level trees `X` of weight at most `max_weight`.
pub fn check_unit_elementary(e: &Arc<DeltaFObject>, max_weight: usize) -> CheckReport {
    let report = CheckReport::new("unit", &[("max_weight", max_weight), ("weight_of_e", e.weight())]);
    let elementary = e.is_level_tree()
        && (e.length() == 0 && e.level(0) == 1 || e.length() == 1);
    if !elementary {
        return report.absorb_all([err_tally(Error::Domain(format!("{e} is not elementary")))]);
    }
    let tallies: Vec<Tally> = enumerate_objects(max_weight, true)
        .par_iter()
        .map(|x| {
            let mut t = Tally::default();
            let outcome = unit_bijection(x, e);
            t.check(matches!(outcome, Ok(true)), || {
                format!("{x} -> {e}: {outcome:?}")
            });
            t
        })
        .collect();
    report.absorb_all(tallies)
}

fn unit_bijection(x: &Arc<DeltaFObject>, e: &Arc<DeltaFObject>) -> Result<bool> {
    let sx = tau_object(x)?;
    let se = tau_object(e)?;
    let delta = enumerate_hom(x, e, GUARD)?;
    let images: BTreeSet<Vec<EdgeId>> = delta
        .iter()
        .map(|m| tau_morphism_between(m, &sx, &se).map(|t| t.edge_map().to_vec()))
        .collect::<Result<_>>()?;
    let omega = enumerate_hom_omega(sx.tree(), se.tree(), GUARD)?;
    Ok(images.len() == delta.len() && omega.len() == delta.len())
}

/// Unit bijection for `([0], 1)` and `([1], k -> 1)` with `k <= max_arity`.
pub fn check_unit_all(max_arity: usize, max_weight: usize) -> CheckReport {
    let mut report = CheckReport::new("unit", &[("max_weight", max_weight), ("max_arity", max_arity)]);
    let mut elementaries = vec![Arc::new(DeltaFObject::edge())];
    elementaries.extend((0..=max_arity).map(|k| Arc::new(DeltaFObject::corolla(k))));
    for e in &elementaries {
        let r = check_unit_elementary(e, max_weight);
        report.absorb(Tally {
            instances: r.instances,
            failure_count: r.failure_count,
            failures: r.failures,
        });
    }
    report
}

/// How a map `τX -> T` sits relative to degeneracies, the external boundary
/// and the root vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapToTree {
    pub degenerate: bool,
    pub boundary_factoring: bool,
    pub admissible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    Degenerate,
    BoundaryFactoring,
    Admissible,
    InadmissibleNondegenerate,
}

impl MapToTree {
    /// A single label, with degenerate taking precedence over admissible and
    /// admissible over boundary-factoring.
    pub fn kind(&self) -> MapKind {
        if self.degenerate {
            MapKind::Degenerate
        } else if self.admissible {
            MapKind::Admissible
        } else if self.boundary_factoring {
            MapKind::BoundaryFactoring
        } else {
            MapKind::InadmissibleNondegenerate
        }
    }
}

pub fn classify_map_to_tree(x: &TauImage, m: &OmegaMorphism) -> Result<MapToTree> {
    if m.source().as_ref() != x.tree().as_ref() {
        return Err(Error::Domain("the source of the map is not the given τ-image".into()));
    }
    let t = m.target();
    let mut degenerate = false;
    for psi in degeneracies(x.source()) {
        let ty = tau_object(psi.target())?;
        let tpsi = tau_morphism_between(&psi, x, &ty)?;
        let mut induced: Vec<Option<EdgeId>> = vec![None; ty.tree().edge_count()];
        let mut consistent = true;
        for (e, &img) in tpsi.edge_map().iter().enumerate() {
            match induced[img] {
                Some(prev) if prev != m.edge_map()[e] => consistent = false,
                _ => induced[img] = Some(m.edge_map()[e]),
            }
        }
        if consistent {
            let edges: Vec<EdgeId> = induced.into_iter().map(|e| e.expect("τψ is onto")).collect();
            if OmegaMorphism::from_edge_map(ty.tree(), t, edges).is_ok() {
                degenerate = true;
                break;
            }
        }
    }
    let boundary_factoring =
        t.vertex_count() >= 2 && m.image_of(&x.tree().whole()) != t.whole();
    let root_corolla = t.root_vertex().map(|v| Subtree {
        root: t.root(),
        vertices: vec![v],
    });
    let admissible = !degenerate
        && match (x.root_vertex(), root_corolla) {
            (Some(v), Some(rc)) => m.vertex_map()[v] == rc,
            _ => false,
        };
    Ok(MapToTree {
        degenerate,
        boundary_factoring,
        admissible,
    })
}

/// A non-degenerate map `τX -> T` with `X` canonical.
#[derive(Debug, Clone)]
pub struct NondegenerateMap {
    pub image: Arc<TauImage>,
    pub map: OmegaMorphism,
    pub class: MapToTree,
}

/// The largest set of pairwise incomparable edges of `t`.
pub fn max_antichain(t: &PolyTree) -> usize {
    fn width(t: &PolyTree, e: EdgeId) -> usize {
        match t.producer(e) {
            None => 1,
            Some(v) => {
                let below: usize = t.vertex(v).inputs.iter().map(|&i| width(t, i)).sum();
                below.max(1)
            }
        }
    }
    width(t, t.root())
}

/// Every non-degenerate map into `t` from a canonical level tree, searched
/// over level trees one longer and one wider than any such map can be;
/// reports an error if a map is found at the search boundary.
pub fn nondegenerate_maps_into(t: &Arc<PolyTree>) -> Result<Vec<NondegenerateMap>> {
    let max_length = t.vertex_count() + 1;
    let max_width = max_antichain(t) + 1;
    let objects = enumerate_level_trees(max_length, max_width);
    let found: Vec<Vec<NondegenerateMap>> = objects
        .par_iter()
        .map(|x| -> Result<Vec<NondegenerateMap>> {
            let img = Arc::new(tau_object(x)?);
            let mut out = Vec::new();
            for m in enumerate_hom_omega(img.tree(), t, GUARD)? {
                let class = classify_map_to_tree(&img, &m)?;
                if !class.degenerate {
                    out.push(NondegenerateMap {
                        image: img.clone(),
                        map: m,
                        class,
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let all: Vec<NondegenerateMap> = found.into_iter().flatten().collect();
    if let Some(bad) = all.iter().find(|d| {
        let x = d.image.source();
        x.length() == max_length || x.levels().iter().any(|&k| k == max_width)
    }) {
        return Err(Error::Resource(format!(
            "search bound reached by a non-degenerate map {}",
            bad.map.key()
        )));
    }
    Ok(all)
}

/// Orbit key of a map `τX -> T` under automorphisms of `X`.
fn orbit_key(x: &Arc<DeltaFObject>, img: &TauImage, m: &OmegaMorphism) -> Result<(String, Vec<EdgeId>)> {
    let (canon, iso) = x.canonical_form();
    let canon_img = tau_object(&canon)?;
    let moved = m.after(&tau_morphism_between(&iso, &canon_img, img)?)?;
    let mut best: Option<Vec<EdgeId>> = None;
    for a in enumerate_hom(&canon, &canon, GUARD)? {
        if !a.is_iso() {
            continue;
        }
        let edges = moved
            .after(&tau_morphism_between(&a, &canon_img, &canon_img)?)?
            .edge_map()
            .to_vec();
        if best.as_ref().is_none_or(|b| edges < *b) {
            best = Some(edges);
        }
    }
    Ok((canon.key(), best.expect("the identity is an automorphism")))
}

/// `m ∘ τ(face)` for a face inclusion into the source of `m`.
fn restrict_along(
    m: &OmegaMorphism,
    img: &TauImage,
    inclusion: &DeltaFMorphism,
) -> Result<(TauImage, OmegaMorphism)> {
    let sub = tau_object(inclusion.source())?;
    let composite = m.after(&tau_morphism_between(inclusion, &sub, img)?)?;
    Ok((sub, composite))
}

/// The face bullets for admissible maps of length `n` into trees with at
/// least two vertices: `d_0` and `d_n` factor through the external boundary,
/// `d_i` for `0 < i < n-1` are admissible, and `d_{n-1}` is not.
pub fn check_admissible_faces(max_vertices: usize, max_arity: usize) -> CheckReport {
    let report = CheckReport::new(
        "admissible_faces",
        &[("max_vertices", max_vertices), ("max_arity", max_arity)],
    );
    let trees: Vec<Arc<PolyTree>> = enumerate_trees(max_vertices, max_arity)
        .into_iter()
        .filter(|t| t.vertex_count() >= 2)
        .collect();
    let tallies: Vec<Tally> = trees
        .par_iter()
        .map(|t| {
            let mut tally = Tally::default();
            match nondegenerate_maps_into(t) {
                Err(e) => tally.check(false, || format!("{t}: {e}")),
                Ok(maps) => {
                    for d in maps.iter().filter(|d| d.class.admissible) {
                        let outcome = faces_behave(d);
                        tally.check(matches!(outcome, Ok(true)), || {
                            format!("{}: {outcome:?}", d.map.key())
                        });
                    }
                }
            }
            tally
        })
        .collect();
    report.absorb_all(tallies)
}

fn faces_behave(d: &NondegenerateMap) -> Result<bool> {
    let x = d.image.source();
    let n = x.length();
    // d_0
    let (sub, m0) = restrict_along(&d.map, &d.image, &deltaf::face(x, 0)?)?;
    if !classify_map_to_tree(&sub, &m0)?.boundary_factoring {
        return Ok(false);
    }
    // d_n lands in a forest: each component must factor through the boundary
    let top = deltaf::face(x, n)?;
    let forest = top.source();
    for r in 0..forest.level(forest.length()) {
        let (component, into_forest) = restrict_to_fibre(forest, r)?;
        let inclusion = top.after(&into_forest)?;
        debug_assert_eq!(inclusion.source(), &component);
        let (sub, mr) = restrict_along(&d.map, &d.image, &inclusion)?;
        if !classify_map_to_tree(&sub, &mr)?.boundary_factoring {
            return Ok(false);
        }
    }
    for i in 1..n.saturating_sub(1) {
        let (sub, mi) = restrict_along(&d.map, &d.image, &deltaf::face(x, i)?)?;
        if !classify_map_to_tree(&sub, &mi)?.admissible {
            return Ok(false);
        }
    }
    let (sub, last) = restrict_along(&d.map, &d.image, &deltaf::face(x, n - 1)?)?;
    Ok(!classify_map_to_tree(&sub, &last)?.admissible)
}

/// Every non-degenerate map that neither factors through the external
/// boundary nor is admissible is, up to isomorphism, the `d_{n-1}` face of
/// exactly one admissible map of length one more.
pub fn check_admissible_extension(max_vertices: usize, max_arity: usize) -> CheckReport {
    let report = CheckReport::new(
        "admissible_extension",
        &[("max_vertices", max_vertices), ("max_arity", max_arity)],
    );
    let trees: Vec<Arc<PolyTree>> = enumerate_trees(max_vertices, max_arity)
        .into_iter()
        .filter(|t| t.vertex_count() >= 2)
        .collect();
    let tallies: Vec<Tally> = trees
        .par_iter()
        .map(|t| {
            let mut tally = Tally::default();
            if let Err(e) = extensions_unique(t, &mut tally) {
                tally.check(false, || format!("{t}: {e}"));
            }
            tally
        })
        .collect();
    report.absorb_all(tallies)
}

fn extensions_unique(t: &Arc<PolyTree>, tally: &mut Tally) -> Result<()> {
    let maps = nondegenerate_maps_into(t)?;
    // admissible orbits keyed by the orbit of their d_{n-1} face
    let mut admissible_orbits: BTreeSet<(String, Vec<EdgeId>)> = BTreeSet::new();
    let mut by_face: HashMap<(String, Vec<EdgeId>), usize> = HashMap::new();
    for d in maps.iter().filter(|d| d.class.admissible) {
        let x = d.image.source();
        if !admissible_orbits.insert(orbit_key(x, &d.image, &d.map)?) {
            continue;
        }
        let inclusion = deltaf::face(x, x.length() - 1)?;
        let (sub, face) = restrict_along(&d.map, &d.image, &inclusion)?;
        *by_face
            .entry(orbit_key(inclusion.source(), &sub, &face)?)
            .or_default() += 1;
    }
    let mut seen = BTreeSet::new();
    for d in &maps {
        if d.class.admissible || d.class.boundary_factoring {
            continue;
        }
        let key = orbit_key(d.image.source(), &d.image, &d.map)?;
        if !seen.insert(key.clone()) {
            continue;
        }
        let count = by_face.get(&key).copied().unwrap_or(0);
        tally.check(count == 1, || {
            format!("{}: {count} admissible extensions", d.map.key())
        });
    }
    Ok(())
}

/// Report on object counts for the acceptance runner and the CLI.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TauJson {
    pub source: crate::deltaf::DeltaFObjectJson,
    pub tree: crate::omega::TreeJson,
}

impl From<&TauImage> for TauJson {
    fn from(t: &TauImage) -> Self {
        TauJson {
            source: t.source.as_ref().into(),
            tree: t.tree.as_ref().into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obj(key: &str) -> Arc<DeltaFObject> {
        Arc::new(DeltaFObject::parse_key(key).unwrap())
    }

    #[test]
    fn object_examples() {
        assert_eq!(tau_object(&obj("[1]")).unwrap().tree().key(), "eta");
        for k in 0..5 {
            let c = tau_object(&Arc::new(DeltaFObject::corolla(k))).unwrap();
            assert_eq!(c.tree().key(), format!("C{k}"));
        }
        let x = tau_object(&obj("[2,1,1]")).unwrap();
        assert_eq!(x.tree().edge_count(), 4);
        assert_eq!(x.tree().vertex_count(), 2);
        assert_eq!(x.tree().code(), "((||))");
        assert!(tau_object(&obj("[2]")).is_err());
    }

    #[test]
    fn image_counts_and_successor() {
        for x in enumerate_objects(6, true) {
            let img = tau_object(&x).unwrap();
            let t = img.tree();
            assert_eq!(t.edge_count(), x.total_size());
            assert_eq!(t.vertex_count(), x.total_size() - x.level(0));
            for (e, &(i, y)) in img.edge_index().iter().enumerate() {
                if i < x.length() {
                    assert_eq!(t.successor(e), img.edge(i + 1, x.step(i).apply(y)));
                } else {
                    assert_eq!(t.root(), e);
                }
            }
        }
    }

    #[test]
    fn morphism_examples() {
        let x = obj("[1,1]");
        let pt = obj("[1]");
        let homs = enumerate_hom(&x, &pt, GUARD).unwrap();
        assert_eq!(homs.len(), 1);
        let t = tau_morphism(&homs[0]).unwrap();
        assert_eq!(t.source().key(), "C1");
        assert_eq!(t.target().key(), "eta");
        assert!(t.is_active() && !t.is_inert());
        let c3 = Arc::new(DeltaFObject::corolla(3));
        for m in enumerate_hom(&pt, &c3, GUARD).unwrap() {
            let t = tau_morphism(&m).unwrap();
            assert!(t.is_inert());
        }
        let id = DeltaFMorphism::identity(&c3);
        let tid = tau_morphism(&id).unwrap();
        assert_eq!(tid, OmegaMorphism::identity(tid.source()));
    }

    #[test]
    fn functor_small() {
        let r = check_tau_functor(4);
        assert!(r.passed(), "{r:?}");
        assert!(r.instances > 100);
    }

    #[test]
    fn factorization_small() {
        let r = check_tau_factorization(4);
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn elementary_examples() {
        for (key, edges, corollas) in [("[1]", 1, 0), ("[3,1]", 4, 1), ("[2,1,1]", 4, 2)] {
            let x = obj(key);
            let els = elementary_objects_over(&x);
            let tree = tau_object(&x).unwrap();
            assert_eq!(els.len(), edges + corollas);
            assert_eq!(tree.tree().edge_count(), edges);
            assert_eq!(tree.tree().vertex_count(), corollas);
            let r = check_elementary_equivalence(&x);
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn unit_examples() {
        let edge = Arc::new(DeltaFObject::edge());
        let c2 = Arc::new(DeltaFObject::corolla(2));
        assert!(unit_bijection(&Arc::new(DeltaFObject::linear(3)), &edge).unwrap());
        assert_eq!(enumerate_hom(&c2, &edge, GUARD).unwrap().len(), 0);
        assert!(unit_bijection(&c2, &edge).unwrap());
        assert_eq!(enumerate_hom(&c2, &c2, GUARD).unwrap().len(), 2);
        assert!(unit_bijection(&c2, &c2).unwrap());
        let r = check_unit_all(2, 4);
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn classification_examples() {
        let c2 = Arc::new(DeltaFObject::corolla(2));
        let img = tau_object(&c2).unwrap();
        let id = OmegaMorphism::identity(img.tree());
        assert_eq!(classify_map_to_tree(&img, &id).unwrap().kind(), MapKind::Admissible);

        let x = obj("[1,1]");
        let ximg = tau_object(&x).unwrap();
        let collapse = tau_morphism(&enumerate_hom(&x, &obj("[1]"), GUARD).unwrap()[0]).unwrap();
        let t = Arc::new(PolyTree::from_code("((||)|)").unwrap());
        for into in enumerate_hom_omega(collapse.target(), &t, GUARD).unwrap() {
            let m = into.after(&collapse).unwrap();
            assert_eq!(classify_map_to_tree(&ximg, &m).unwrap().kind(), MapKind::Degenerate);
        }
        let wrong = OmegaMorphism::identity(&Arc::new(PolyTree::corolla(3)));
        assert!(classify_map_to_tree(&img, &wrong).is_err());
    }

    #[test]
    fn two_vertex_tree_admissible_maps() {
        let t = Arc::new(PolyTree::from_code("((||)|)").unwrap());
        let maps = nondegenerate_maps_into(&t).unwrap();
        let admissible: Vec<_> = maps.iter().filter(|d| d.class.admissible).collect();
        assert!(!admissible.is_empty());
        // some admissible map has length 2 and covers the whole tree
        assert!(admissible
            .iter()
            .any(|d| d.image.source().length() == 2 && !d.class.boundary_factoring));
    }

    #[test]
    fn admissibility_small() {
        let r = check_admissible_faces(2, 2);
        assert!(r.passed() && r.instances > 0, "{r:?}");
        let r = check_admissible_extension(2, 2);
        assert!(r.passed() && r.instances > 0, "{r:?}");
    }
}
