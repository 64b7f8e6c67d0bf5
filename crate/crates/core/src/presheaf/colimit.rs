use std::collections::BTreeMap;
use std::sync::Arc;

use crate::deltaf::{self, coface};
use crate::error::{Error, Result};

use super::{IndexTruncation, Morphism, PresheafMap, SetPresheaf};

/// A colimit with its coprojections.
#[derive(Debug, Clone)]
pub struct Cocone {
    pub apex: SetPresheaf,
    pub legs: Vec<PresheafMap>,
}

impl Cocone {
    /// The map out of the colimit induced by compatible maps out of each node.
    pub fn induced(&self, legs: &[PresheafMap]) -> Result<PresheafMap> {
        let t = self.apex.trunc();
        let mut components = Vec::with_capacity(t.len());
        for a in 0..t.len() {
            let mut comp = vec![u32::MAX; self.apex.size(a)];
            for (leg, out) in self.legs.iter().zip(legs) {
                for (x, &c) in leg.components[a].iter().enumerate() {
                    let y = out.components[a][x];
                    let slot = &mut comp[c as usize];
                    if *slot == u32::MAX {
                        *slot = y;
                    } else if *slot != y {
                        return Err(Error::Structural(format!(
                            "maps out of the diagram disagree at {}",
                            t.key(a)
                        )));
                    }
                }
            }
            components.push(comp);
        }
        Ok(PresheafMap { components })
    }
}

/// Colimit of a finite diagram: the objectwise disjoint union modulo the
/// equivalence relation generated by the arrows `(p, q, f: P_p -> P_q)`.
pub fn colimit(
    trunc: &Arc<IndexTruncation>,
    nodes: &[&SetPresheaf],
    arrows: &[(usize, usize, &PresheafMap)],
) -> Result<Cocone> {
    let k = trunc.len();
    if nodes.iter().any(|p| !super::same_truncation(p.trunc(), trunc)) {
        return Err(Error::Domain("diagram over a different truncation".into()));
    }
    let mut labels = Vec::with_capacity(k);
    // class[a][p][x]: the class of element x of node p at object a
    let mut class: Vec<Vec<Vec<u32>>> = Vec::with_capacity(k);
    // a representative (node, element) per class
    let mut reps: Vec<Vec<(usize, usize)>> = Vec::with_capacity(k);
    for a in 0..k {
        let mut offsets = Vec::with_capacity(nodes.len());
        let mut total = 0;
        for p in nodes {
            offsets.push(total);
            total += p.size(a);
        }
        let mut parent: Vec<usize> = (0..total).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(p, q, f) in arrows {
            for (x, &y) in f.components[a].iter().enumerate() {
                let u = find(&mut parent, offsets[p] + x);
                let v = find(&mut parent, offsets[q] + y as usize);
                if u != v {
                    let (lo, hi) = if u < v { (u, v) } else { (v, u) };
                    parent[hi] = lo;
                }
            }
        }
        let mut ids = BTreeMap::new();
        let mut obj_reps = Vec::new();
        let mut obj_labels = Vec::new();
        let mut obj_class = Vec::with_capacity(nodes.len());
        for (p, node) in nodes.iter().enumerate() {
            let mut cl = Vec::with_capacity(node.size(a));
            for x in 0..node.size(a) {
                let r = find(&mut parent, offsets[p] + x);
                let next = ids.len() as u32;
                let id = *ids.entry(r).or_insert(next);
                if id == next {
                    obj_reps.push((p, x));
                    obj_labels.push(format!("{p}:{}", node.labels(a)[x]));
                }
                cl.push(id);
            }
            obj_class.push(cl);
        }
        labels.push(obj_labels);
        class.push(obj_class);
        reps.push(obj_reps);
    }
    let actions = (0..k)
        .map(|a| {
            (0..k)
                .map(|b| {
                    (0..trunc.homs(a, b).len())
                        .map(|i| {
                            reps[b]
                                .iter()
                                .map(|&(p, x)| class[a][p][nodes[p].act(a, b, i, x)])
                                .collect()
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let apex = SetPresheaf::from_parts_unchecked(trunc.clone(), labels, actions);
    let legs = (0..nodes.len())
        .map(|p| PresheafMap {
            components: (0..k).map(|a| class[a][p].clone()).collect(),
        })
        .collect();
    Ok(Cocone { apex, legs })
}

/// `y(f): y(a) -> y(b)` for `f = homs[a][b][j]`, by postcomposition.
pub fn yoneda_map(trunc: &IndexTruncation, a: usize, b: usize, j: usize) -> PresheafMap {
    PresheafMap {
        components: (0..trunc.len())
            .map(|c| {
                (0..trunc.homs(c, a).len())
                    .map(|h| trunc.compose(c, a, b, h, j) as u32)
                    .collect()
            })
            .collect(),
    }
}

/// Colimit of representables `y(a_p)` along `y(j)` for arrows `(p, q, j)`.
pub fn representable_diagram(
    trunc: &Arc<IndexTruncation>,
    objects: &[usize],
    arrows: &[(usize, usize, usize)],
) -> Result<Cocone> {
    let mut cache: BTreeMap<usize, SetPresheaf> = BTreeMap::new();
    for &a in objects {
        if let std::collections::btree_map::Entry::Vacant(e) = cache.entry(a) {
            e.insert(SetPresheaf::representable(trunc, a)?);
        }
    }
    let nodes: Vec<&SetPresheaf> = objects.iter().map(|a| &cache[a]).collect();
    let maps: Vec<PresheafMap> = arrows
        .iter()
        .map(|&(p, q, j)| yoneda_map(trunc, objects[p], objects[q], j))
        .collect();
    let arrow_refs: Vec<(usize, usize, &PresheafMap)> = arrows
        .iter()
        .zip(&maps)
        .map(|(&(p, q, _), m)| (p, q, m))
        .collect();
    colimit(trunc, &nodes, &arrow_refs)
}

/// Colimit of `y(a)` over a full subcategory of the slice over `x`, with
/// the induced map to `y(x)`.
pub fn slice_colimit(
    trunc: &Arc<IndexTruncation>,
    x: usize,
    nodes: &[(usize, usize)],
    inert_only: bool,
) -> Result<(SetPresheaf, PresheafMap)> {
    let arrows = trunc.slice_arrows(x, nodes, inert_only);
    let objects: Vec<usize> = nodes.iter().map(|&(a, _)| a).collect();
    let cocone = representable_diagram(trunc, &objects, &arrows)?;
    let legs: Vec<PresheafMap> = nodes
        .iter()
        .map(|&(a, i)| yoneda_map(trunc, a, x, i))
        .collect();
    let to_x = cocone.induced(&legs)?;
    Ok((cocone.apex, to_x))
}

/// The Segal core of `x`: the colimit of the elementary objects over it.
pub fn segal_core(trunc: &Arc<IndexTruncation>, x: usize) -> Result<(SetPresheaf, PresheafMap)> {
    slice_colimit(trunc, x, &trunc.elementary_over(x), true)
}

/// Proper subtrees of `t` as inert non-invertible maps into it.
fn proper_subtrees(trunc: &IndexTruncation, t: usize) -> Result<Vec<(usize, usize)>> {
    let tree = trunc
        .object(t)
        .as_tree()
        .ok_or_else(|| Error::Domain("external boundaries are defined for trees".into()))?;
    if tree.vertex_count() < 2 {
        return Err(Error::Domain(format!(
            "{} has fewer than two vertices",
            trunc.key(t)
        )));
    }
    let mut nodes = Vec::new();
    for a in 0..trunc.len() {
        for (i, m) in trunc.homs(a, t).iter().enumerate() {
            if m.is_inert() && !m.is_iso() {
                nodes.push((a, i));
            }
        }
    }
    Ok(nodes)
}

/// The external boundary of a tree with at least two vertices: the
/// colimit of its proper subtrees.
pub fn external_boundary(trunc: &Arc<IndexTruncation>, t: usize) -> Result<(SetPresheaf, PresheafMap)> {
    let nodes = proper_subtrees(trunc, t)?;
    slice_colimit(trunc, t, &nodes, true)
}

/// The colimit of the Segal cores of the proper subtrees of `t`, with its
/// comparison map to the Segal core of `t`.
pub fn subtree_segal_core(
    trunc: &Arc<IndexTruncation>,
    t: usize,
) -> Result<(SetPresheaf, PresheafMap, SetPresheaf)> {
    let subs = proper_subtrees(trunc, t)?;
    let el = trunc.elementary_over(t);
    let el_index: BTreeMap<(usize, usize), usize> =
        el.iter().enumerate().map(|(n, &e)| (e, n)).collect();
    // nodes (S, E -> S), recorded with the composite E -> t
    let mut nodes: Vec<(usize, usize, usize)> = Vec::new();
    let mut composite: Vec<(usize, usize)> = Vec::new();
    for (s, &(a, i)) in subs.iter().enumerate() {
        for (e, j) in trunc.elementary_over(a) {
            nodes.push((s, e, j));
            composite.push((e, trunc.compose(e, a, t, j, i)));
        }
    }
    let sub_arrows = trunc.slice_arrows(t, &subs, true);
    let mut below = vec![vec![false; subs.len()]; subs.len()];
    for &(p, q, _) in &sub_arrows {
        below[p][q] = true;
    }
    let mut arrows = Vec::new();
    for (p, &(sp, ep, _)) in nodes.iter().enumerate() {
        for (q, &(sq, eq, _)) in nodes.iter().enumerate() {
            if !below[sp][sq] {
                continue;
            }
            let (_, ip) = composite[p];
            let (_, iq) = composite[q];
            for (w, m) in trunc.homs(ep, eq).iter().enumerate() {
                if m.is_inert() && trunc.compose(ep, eq, t, w, iq) == ip {
                    arrows.push((p, q, w));
                }
            }
        }
    }
    let objects: Vec<usize> = nodes.iter().map(|&(_, e, _)| e).collect();
    let cocone = representable_diagram(trunc, &objects, &arrows)?;
    let core_arrows = trunc.slice_arrows(t, &el, true);
    let el_objects: Vec<usize> = el.iter().map(|&(e, _)| e).collect();
    let core = representable_diagram(trunc, &el_objects, &core_arrows)?;
    let legs: Vec<PresheafMap> = composite
        .iter()
        .map(|c| core.legs[el_index[c]].clone())
        .collect();
    let comparison = cocone.induced(&legs)?;
    Ok((cocone.apex, comparison, core.apex))
}

/// The horn `Λⁿ_i x` of a level forest of length `n ≥ 2`: the colimit of
/// the pullbacks of `x` along all faces except the top one and the one
/// missing `i`.
pub fn horn(trunc: &Arc<IndexTruncation>, x: usize, i: usize) -> Result<(SetPresheaf, PresheafMap)> {
    let obj = trunc
        .object(x)
        .as_forest()
        .ok_or_else(|| Error::Domain("horns are defined for level forests".into()))?;
    let n = obj.length();
    if n < 2 {
        return Err(Error::Domain(format!("{obj} has length {n} < 2")));
    }
    if i > n {
        return Err(Error::Domain(format!("horn index {i} exceeds {n}")));
    }
    let skipped = coface(n, i);
    let mut nodes = Vec::new();
    for mask in 1u32..(1 << (n + 1)) {
        let phi: Vec<usize> = (0..=n).filter(|&j| mask & (1 << j) != 0).collect();
        if phi.len() == n + 1 || phi == skipped {
            continue;
        }
        let lift = deltaf::cartesian_lift(obj, &phi)?;
        let (a, b, idx) = trunc.transport(&Morphism::Forest(lift))?;
        debug_assert_eq!(b, x);
        nodes.push((a, idx));
    }
    slice_colimit(trunc, x, &nodes, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presheaf::{Bound, Flavor};

    fn omega(v: usize, a: usize) -> Arc<IndexTruncation> {
        Arc::new(IndexTruncation::new(Flavor::Omega, Bound::trees(v, a)).unwrap())
    }

    #[test]
    fn colimit_of_single_node_is_itself() {
        let t = omega(2, 2);
        let c2 = t.find_key("C2").unwrap();
        let y = SetPresheaf::representable(&t, c2).unwrap();
        let c = colimit(&t, &[&y], &[]).unwrap();
        assert_eq!(c.apex.sizes(), y.sizes());
        c.apex.check().unwrap();
    }

    #[test]
    fn coproduct_of_two_edges() {
        let t = omega(2, 2);
        let eta = t.find_key("eta").unwrap();
        let y = SetPresheaf::representable(&t, eta).unwrap();
        let empty = SetPresheaf::empty(&t);
        let to_y = PresheafMap {
            components: vec![Vec::new(); t.len()],
        };
        let c = colimit(&t, &[&empty, &y, &y], &[(0, 1, &to_y), (0, 2, &to_y)]).unwrap();
        assert_eq!(c.apex.size(eta), 2);
    }

    #[test]
    fn segal_cores_of_elementary_objects_are_representable() {
        let t = omega(2, 2);
        for key in ["eta", "C0", "C1", "C2"] {
            let x = t.find_key(key).unwrap();
            let (core, to_x) = segal_core(&t, x).unwrap();
            core.check().unwrap();
            assert!(to_x.is_iso(&SetPresheaf::representable(&t, x).unwrap().sizes()), "{key}");
        }
    }

    #[test]
    fn segal_core_of_two_vertex_tree() {
        let t = omega(2, 2);
        let x = t.find_key("((||)|)").unwrap();
        let (core, to_x) = segal_core(&t, x).unwrap();
        core.check().unwrap();
        let y = SetPresheaf::representable(&t, x).unwrap();
        to_x.validate(&core, &y).unwrap();
        let eta = t.find_key("eta").unwrap();
        assert_eq!(core.size(eta), 5);
        assert!(to_x.is_injective());
        // no degeneracies out of a tree without unary vertices
        assert_eq!(core.size(x), 0);
        let l2 = t.find_key("((|))").unwrap();
        let (core, to_x) = segal_core(&t, l2).unwrap();
        assert_eq!(core.size(eta), 3);
        let id = t.identity(l2) as u32;
        assert!(!to_x.components[l2].contains(&id));
    }

    #[test]
    fn segal_core_agrees_with_union_of_images() {
        let t = omega(3, 2);
        for x in 0..t.len() {
            let (core, to_x) = segal_core(&t, x).unwrap();
            assert!(to_x.is_injective(), "{}", t.key(x));
            // union of images of the elementary inclusions
            for a in 0..t.len() {
                let mut union = std::collections::BTreeSet::new();
                for (e, i) in t.elementary_over(x) {
                    for h in 0..t.homs(a, e).len() {
                        union.insert(t.compose(a, e, x, h, i) as u32);
                    }
                }
                let image: std::collections::BTreeSet<u32> = to_x.components[a].iter().copied().collect();
                assert_eq!(union, image);
                assert_eq!(core.size(a), image.len());
            }
        }
    }

    #[test]
    fn external_boundary_of_linear_tree() {
        let t = omega(2, 2);
        let l2 = t.find_key("((|))").unwrap();
        let (b, to_t) = external_boundary(&t, l2).unwrap();
        b.check().unwrap();
        assert!(to_t.is_injective());
        assert_eq!(b.size(t.find_key("eta").unwrap()), 3);
        assert_eq!(b.size(t.find_key("C1").unwrap()), 2 + 3);
        assert!(!to_t.components[l2].contains(&(t.identity(l2) as u32)));
        let c2 = t.find_key("C2").unwrap();
        assert!(matches!(external_boundary(&t, c2), Err(Error::Domain(_))));
    }

    #[test]
    fn boundary_segal_core_matches_segal_core() {
        let t = omega(3, 2);
        for x in 0..t.len() {
            if t.object(x).size() < 2 {
                continue;
            }
            let (b, cmp, core) = subtree_segal_core(&t, x).unwrap();
            b.check().unwrap();
            cmp.validate(&b, &core).unwrap();
            assert!(cmp.is_iso(&core.sizes()), "{}", t.key(x));
        }
    }

    #[test]
    fn inner_horn_of_the_two_simplex() {
        let t = Arc::new(IndexTruncation::new(Flavor::Deltaf1, Bound::forests(3)).unwrap());
        let x = t.find_key("[1,1,1]").unwrap();
        let (h, to_x) = horn(&t, x, 1).unwrap();
        h.check().unwrap();
        assert!(to_x.is_injective());
        let point = t.find_key("[1]").unwrap();
        let arrow = t.find_key("[1,1]").unwrap();
        assert_eq!(h.size(point), 3);
        // the two edges of the horn plus the three degenerate arrows
        assert_eq!(h.size(arrow), 5);
        assert!(!to_x.components[x].contains(&(t.identity(x) as u32)));
        assert!(horn(&t, arrow, 0).is_err());
    }
}
