use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::deltaf::{self, DeltaFMorphism, DeltaFObject};
use crate::error::{Error, Result};
use crate::finset::FinSetMap;
use crate::omega::{self, OmegaMorphism, PolyTree};
use crate::tau;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Omega,
    Deltaf,
    Deltaf1,
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flavor::Omega => "omega",
            Flavor::Deltaf => "deltaf",
            Flavor::Deltaf1 => "deltaf1",
        })
    }
}

impl std::str::FromStr for Flavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "omega" => Ok(Flavor::Omega),
            "deltaf" => Ok(Flavor::Deltaf),
            "deltaf1" => Ok(Flavor::Deltaf1),
            _ => Err(Error::Parse(format!("unknown category `{s}`"))),
        }
    }
}

/// Size limits of a truncation. Trees are bounded by vertices and arity,
/// level forests by weight; a level-tree truncation may also carry tree
/// limits, keeping only objects whose underlying tree satisfies them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Bound {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_weight: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_vertices: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_arity: Option<usize>,
}

impl Bound {
    pub fn trees(max_vertices: usize, max_arity: usize) -> Self {
        Bound {
            max_vertices: Some(max_vertices),
            max_arity: Some(max_arity),
            ..Bound::default()
        }
    }

    pub fn forests(max_weight: usize) -> Self {
        Bound {
            max_weight: Some(max_weight),
            ..Bound::default()
        }
    }

    /// Level trees of bounded weight whose trees also fit the given limits.
    pub fn level_trees(max_weight: usize, max_vertices: usize, max_arity: usize) -> Self {
        Bound {
            max_weight: Some(max_weight),
            max_vertices: Some(max_vertices),
            max_arity: Some(max_arity),
        }
    }

    pub fn entries(&self) -> Vec<(&'static str, usize)> {
        let mut out = Vec::new();
        if let Some(w) = self.max_weight {
            out.push(("max_weight", w));
        }
        if let Some(v) = self.max_vertices {
            out.push(("max_vertices", v));
        }
        if let Some(a) = self.max_arity {
            out.push(("max_arity", a));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Object {
    Forest(Arc<DeltaFObject>),
    Tree(Arc<PolyTree>),
}

impl Object {
    pub fn key(&self) -> String {
        match self {
            Object::Forest(x) => x.key(),
            Object::Tree(t) => t.key(),
        }
    }

    /// Vertex count for trees, weight for forests.
    pub fn size(&self) -> usize {
        match self {
            Object::Forest(x) => x.weight(),
            Object::Tree(t) => t.vertex_count(),
        }
    }

    pub fn as_forest(&self) -> Option<&Arc<DeltaFObject>> {
        match self {
            Object::Forest(x) => Some(x),
            Object::Tree(_) => None,
        }
    }

    pub fn as_tree(&self) -> Option<&Arc<PolyTree>> {
        match self {
            Object::Tree(t) => Some(t),
            Object::Forest(_) => None,
        }
    }

    /// The edge, the corollas, and the one-step level trees.
    pub fn is_elementary(&self) -> bool {
        match self {
            Object::Tree(t) => t.vertex_count() <= 1,
            Object::Forest(x) => {
                (x.length() == 0 && x.level(0) == 1) || (x.length() == 1 && x.level(1) == 1)
            }
        }
    }
}

impl fmt::Display for Object {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Morphism {
    Forest(DeltaFMorphism),
    Tree(OmegaMorphism),
}

impl Morphism {
    pub fn key(&self) -> String {
        match self {
            Morphism::Forest(m) => m.key(),
            Morphism::Tree(m) => m.key(),
        }
    }

    /// Flat data identifying the morphism between fixed endpoints.
    pub fn data(&self) -> Vec<usize> {
        match self {
            Morphism::Tree(m) => m.edge_map().to_vec(),
            Morphism::Forest(m) => {
                let mut d = m.phi().to_vec();
                for e in m.eta() {
                    d.extend_from_slice(e.values());
                }
                d
            }
        }
    }

    pub fn is_inert(&self) -> bool {
        match self {
            Morphism::Forest(m) => m.classify().inert,
            Morphism::Tree(m) => m.is_inert(),
        }
    }

    pub fn is_iso(&self) -> bool {
        match self {
            Morphism::Forest(m) => m.is_iso(),
            Morphism::Tree(m) => m.is_iso(),
        }
    }

    pub fn is_active(&self) -> bool {
        match self {
            Morphism::Forest(m) => m.classify().active,
            Morphism::Tree(m) => m.is_active(),
        }
    }

    pub fn source(&self) -> Object {
        match self {
            Morphism::Forest(m) => Object::Forest(m.source().clone()),
            Morphism::Tree(m) => Object::Tree(m.source().clone()),
        }
    }

    pub fn target(&self) -> Object {
        match self {
            Morphism::Forest(m) => Object::Forest(m.target().clone()),
            Morphism::Tree(m) => Object::Tree(m.target().clone()),
        }
    }

    pub fn as_tree(&self) -> Option<&OmegaMorphism> {
        match self {
            Morphism::Tree(m) => Some(m),
            Morphism::Forest(_) => None,
        }
    }

    pub fn as_forest(&self) -> Option<&DeltaFMorphism> {
        match self {
            Morphism::Forest(m) => Some(m),
            Morphism::Tree(_) => None,
        }
    }
}

/// `second ∘ first` on flat data, without revalidation.
fn compose_data(first: &Morphism, second: &Morphism) -> Vec<usize> {
    match (first, second) {
        (Morphism::Tree(f), Morphism::Tree(g)) => {
            f.edge_map().iter().map(|&e| g.edge_map()[e]).collect()
        }
        (Morphism::Forest(f), Morphism::Forest(g)) => {
            let mut d: Vec<usize> = f.phi().iter().map(|&i| g.phi()[i]).collect();
            for (i, e) in f.eta().iter().enumerate() {
                let ge = g.eta_at(f.phi()[i]);
                d.extend(e.values().iter().map(|&x| ge.apply(x)));
            }
            d
        }
        _ => unreachable!("mixed morphism kinds in one truncation"),
    }
}

/// A finite full subcategory of one of the index categories: canonical
/// objects within a bound, every morphism between them, and lazily built
/// composition tables.
pub struct IndexTruncation {
    flavor: Flavor,
    bound: Bound,
    objects: Vec<Object>,
    keys: Vec<String>,
    by_key: BTreeMap<String, usize>,
    homs: Vec<Vec<Vec<Morphism>>>,
    hom_index: Vec<Vec<HashMap<Vec<usize>, u32>>>,
    identities: Vec<usize>,
    tables: Vec<OnceLock<Vec<u32>>>,
}

impl fmt::Debug for IndexTruncation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IndexTruncation")
            .field("flavor", &self.flavor)
            .field("bound", &self.bound)
            .field("objects", &self.keys)
            .finish()
    }
}

impl IndexTruncation {
    pub fn new(flavor: Flavor, bound: Bound) -> Result<Self> {
        let objects: Vec<Object> = match flavor {
            Flavor::Omega => {
                let (Some(v), Some(a)) = (bound.max_vertices, bound.max_arity) else {
                    return Err(Error::invalid("truncation", "trees need max_vertices and max_arity"));
                };
                if bound.max_weight.is_some() {
                    return Err(Error::invalid("truncation", "trees are not bounded by weight"));
                }
                omega::enumerate_trees(v, a).into_iter().map(Object::Tree).collect()
            }
            Flavor::Deltaf => {
                let Some(w) = bound.max_weight else {
                    return Err(Error::invalid("truncation", "level forests need max_weight"));
                };
                if bound.max_vertices.is_some() || bound.max_arity.is_some() {
                    return Err(Error::invalid("truncation", "level forests are bounded by weight only"));
                }
                deltaf::enumerate_objects(w, false).into_iter().map(Object::Forest).collect()
            }
            Flavor::Deltaf1 => {
                let Some(w) = bound.max_weight else {
                    return Err(Error::invalid("truncation", "level trees need max_weight"));
                };
                let mut out = Vec::new();
                for x in deltaf::enumerate_objects(w, true) {
                    let t = tau::tau_object(&x)?;
                    let fits = bound.max_vertices.is_none_or(|v| t.tree().vertex_count() <= v)
                        && bound.max_arity.is_none_or(|a| t.tree().max_arity() <= a);
                    if fits {
                        out.push(Object::Forest(x));
                    }
                }
                out
            }
        };
        Self::from_objects(flavor, bound, objects)
    }

    fn from_objects(flavor: Flavor, bound: Bound, objects: Vec<Object>) -> Result<Self> {
        let k = objects.len();
        let keys: Vec<String> = objects.iter().map(Object::key).collect();
        let by_key = keys.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let homs: Vec<Vec<Vec<Morphism>>> = objects
            .par_iter()
            .map(|a| {
                objects
                    .iter()
                    .map(|b| -> Result<Vec<Morphism>> {
                        Ok(match (a, b) {
                            (Object::Tree(s), Object::Tree(t)) => {
                                omega::enumerate_hom_omega(s, t, omega::DEFAULT_HOM_GUARD)?
                                    .into_iter()
                                    .map(Morphism::Tree)
                                    .collect()
                            }
                            (Object::Forest(x), Object::Forest(y)) => {
                                deltaf::enumerate_hom(x, y, deltaf::DEFAULT_HOM_GUARD)?
                                    .into_iter()
                                    .map(Morphism::Forest)
                                    .collect()
                            }
                            _ => unreachable!(),
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let hom_index: Vec<Vec<HashMap<Vec<usize>, u32>>> = homs
            .iter()
            .map(|row| {
                row.iter()
                    .map(|ms| ms.iter().enumerate().map(|(i, m)| (m.data(), i as u32)).collect())
                    .collect()
            })
            .collect();
        let mut identities = Vec::with_capacity(k);
        for (a, obj) in objects.iter().enumerate() {
            let id = match obj {
                Object::Tree(t) => Morphism::Tree(OmegaMorphism::identity(t)),
                Object::Forest(x) => Morphism::Forest(DeltaFMorphism::identity(x)),
            };
            let i = hom_index[a][a]
                .get(&id.data())
                .ok_or_else(|| Error::Structural(format!("no identity at {}", keys[a])))?;
            identities.push(*i as usize);
        }
        Ok(IndexTruncation {
            flavor,
            bound,
            objects,
            keys,
            by_key,
            homs,
            hom_index,
            identities,
            tables: (0..k * k * k).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn bound(&self) -> Bound {
        self.bound
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn objects(&self) -> &[Object] {
        &self.objects
    }

    pub fn object(&self, a: usize) -> &Object {
        &self.objects[a]
    }

    pub fn key(&self, a: usize) -> String {
        self.keys[a].clone()
    }

    pub fn index_of_key(&self, key: &str) -> Option<usize> {
        self.by_key.get(key).copied()
    }

    pub fn homs(&self, a: usize, b: usize) -> &[Morphism] {
        &self.homs[a][b]
    }

    pub fn hom(&self, a: usize, b: usize, i: usize) -> &Morphism {
        &self.homs[a][b][i]
    }

    pub fn hom_key(&self, a: usize, b: usize, i: usize) -> String {
        self.homs[a][b][i].key()
    }

    pub fn identity(&self, a: usize) -> usize {
        self.identities[a]
    }

    pub fn hom_count(&self) -> usize {
        self.homs.iter().flatten().map(Vec::len).sum()
    }

    /// Index of the morphism `a -> b` with the given flat data.
    pub fn find_hom(&self, a: usize, b: usize, data: &[usize]) -> Option<usize> {
        self.hom_index[a][b].get(data).map(|&i| i as usize)
    }

    /// `compose_table(a, b, c)[i * |Hom(b,c)| + j]` is the index of
    /// `homs[b][c][j] ∘ homs[a][b][i]` in `homs[a][c]`.
    pub fn compose_table(&self, a: usize, b: usize, c: usize) -> &[u32] {
        let k = self.len();
        self.tables[(a * k + b) * k + c].get_or_init(|| {
            let mut out = Vec::with_capacity(self.homs[a][b].len() * self.homs[b][c].len());
            for f in &self.homs[a][b] {
                for g in &self.homs[b][c] {
                    let d = compose_data(f, g);
                    let idx = self.hom_index[a][c]
                        .get(&d)
                        .expect("composite of in-bound morphisms is in bound");
                    out.push(*idx);
                }
            }
            out
        })
    }

    /// Index of `homs[b][c][j] ∘ homs[a][b][i]`.
    pub fn compose(&self, a: usize, b: usize, c: usize, i: usize, j: usize) -> usize {
        self.compose_table(a, b, c)[i * self.homs[b][c].len() + j] as usize
    }

    /// Locate an object up to isomorphism: its index and an isomorphism
    /// from the stored object onto it.
    pub fn find(&self, obj: &Object) -> Option<(usize, Morphism)> {
        let (canon_key, iso) = match obj {
            Object::Tree(t) => {
                let (c, iso) = t.canonical_form();
                (c.key(), Morphism::Tree(iso))
            }
            Object::Forest(x) => {
                let (c, iso) = x.canonical_form();
                (c.key(), Morphism::Forest(iso))
            }
        };
        let a = self.index_of_key(&canon_key)?;
        Some((a, iso))
    }

    /// Locate a morphism between arbitrary in-bound objects: the indices of
    /// its endpoints and of the morphism between the stored representatives
    /// obtained by conjugating with the canonical isomorphisms.
    pub fn transport(&self, m: &Morphism) -> Result<(usize, usize, usize)> {
        let missing = |o: Object| Error::Domain(format!("{o} is outside the truncation"));
        let (a, src_iso) = self.find(&m.source()).ok_or_else(|| missing(m.source()))?;
        let (b, tgt_iso) = self.find(&m.target()).ok_or_else(|| missing(m.target()))?;
        let data = match (&src_iso, m, &tgt_iso) {
            (Morphism::Tree(s), Morphism::Tree(m), Morphism::Tree(t)) => {
                let mut inv = vec![0; t.edge_map().len()];
                for (e, &x) in t.edge_map().iter().enumerate() {
                    inv[x] = e;
                }
                s.edge_map().iter().map(|&e| inv[m.edge_map()[e]]).collect::<Vec<_>>()
            }
            (Morphism::Forest(s), Morphism::Forest(m), Morphism::Forest(t)) => {
                let inv: Vec<FinSetMap> = t
                    .eta()
                    .iter()
                    .map(|e| e.inverse().expect("canonical isomorphism"))
                    .collect();
                let mut d: Vec<usize> = m.phi().to_vec();
                for (i, e) in s.eta().iter().enumerate() {
                    let mi = m.eta_at(i);
                    let ti = &inv[m.phi()[i]];
                    d.extend(e.values().iter().map(|&x| ti.apply(mi.apply(x))));
                }
                d
            }
            _ => return Err(Error::Domain("morphism of the wrong kind for this truncation".into())),
        };
        let i = self
            .find_hom(a, b, &data)
            .ok_or_else(|| Error::Structural(format!("internal: {} not found after transport", m.key())))?;
        Ok((a, b, i))
    }

    /// Parse an object key and locate it.
    pub fn find_key(&self, key: &str) -> Result<usize> {
        let obj = match self.flavor {
            Flavor::Omega => Object::Tree(Arc::new(PolyTree::parse_key(key)?)),
            _ => Object::Forest(Arc::new(DeltaFObject::parse_key(key)?)),
        };
        self.find(&obj)
            .map(|(a, _)| a)
            .ok_or_else(|| Error::Domain(format!("{key} is outside the truncation")))
    }

    /// The elementary objects of the truncation.
    pub fn elementary(&self) -> Vec<usize> {
        (0..self.len()).filter(|&a| self.objects[a].is_elementary()).collect()
    }

    /// Inert maps from elementary objects into `x`, as `(object, hom index)`.
    pub fn elementary_over(&self, x: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for e in self.elementary() {
            for (i, m) in self.homs[e][x].iter().enumerate() {
                if m.is_inert() {
                    out.push((e, i));
                }
            }
        }
        out
    }

    /// Arrows of the full subcategory of the slice over `x` on `nodes`:
    /// `(p, q, j)` with `homs[a_q][x][i_q] ∘ homs[a_p][a_q][j] = homs[a_p][x][i_p]`.
    pub fn slice_arrows(&self, x: usize, nodes: &[(usize, usize)], inert_only: bool) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for (p, &(ap, ip)) in nodes.iter().enumerate() {
            for (q, &(aq, iq)) in nodes.iter().enumerate() {
                let nqx = self.homs[aq][x].len();
                let table = self.compose_table(ap, aq, x);
                for j in 0..self.homs[ap][aq].len() {
                    if table[j * nqx + iq] as usize == ip
                        && (!inert_only || self.homs[ap][aq][j].is_inert())
                    {
                        out.push((p, q, j));
                    }
                }
            }
        }
        out
    }

    /// Check identities and associativity of the composition tables.
    pub fn check_category(&self) -> Result<()> {
        let k = self.len();
        for a in 0..k {
            for b in 0..k {
                for i in 0..self.homs[a][b].len() {
                    if self.compose(a, a, b, self.identities[a], i) != i
                        || self.compose(a, b, b, i, self.identities[b]) != i
                    {
                        return Err(Error::Structural(format!(
                            "identity law fails for {}",
                            self.hom_key(a, b, i)
                        )));
                    }
                }
            }
        }
        let bad = (0..k).into_par_iter().find_map_any(|a| {
            for b in 0..k {
                for c in 0..k {
                    for d in 0..k {
                        for i in 0..self.homs[a][b].len() {
                            for j in 0..self.homs[b][c].len() {
                                let ij = self.compose(a, b, c, i, j);
                                for l in 0..self.homs[c][d].len() {
                                    let left = self.compose(a, c, d, ij, l);
                                    let jl = self.compose(b, c, d, j, l);
                                    if left != self.compose(a, b, d, i, jl) {
                                        return Some(format!(
                                            "composition is not associative at {}, {}, {}",
                                            self.hom_key(a, b, i),
                                            self.hom_key(b, c, j),
                                            self.hom_key(c, d, l)
                                        ));
                                    }
                                }
                            }
                        }
                    }
                }
            }
            None
        });
        match bad {
            Some(msg) => Err(Error::Structural(msg)),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_truncation_contents() {
        let t = IndexTruncation::new(Flavor::Omega, Bound::trees(2, 2)).unwrap();
        assert_eq!(t.len(), 10);
        let eta = t.find_key("eta").unwrap();
        let c2 = t.find_key("C2").unwrap();
        assert_eq!(t.homs(eta, c2).len(), 3);
        assert_eq!(t.homs(c2, c2).len(), 2);
        t.check_category().unwrap();
    }

    #[test]
    fn forest_truncations_are_categories() {
        IndexTruncation::new(Flavor::Deltaf, Bound::forests(3))
            .unwrap()
            .check_category()
            .unwrap();
        let t = IndexTruncation::new(Flavor::Deltaf1, Bound::level_trees(4, 2, 2)).unwrap();
        t.check_category().unwrap();
        for obj in t.objects() {
            let tree = tau::tau_object(obj.as_forest().unwrap()).unwrap();
            assert!(tree.tree().vertex_count() <= 2 && tree.tree().max_arity() <= 2);
        }
    }

    #[test]
    fn transport_of_non_canonical_morphisms() {
        let t = IndexTruncation::new(Flavor::Omega, Bound::trees(2, 2)).unwrap();
        let tree = Arc::new(PolyTree::from_code("((||)|)").unwrap());
        let (_, iso) = tree.canonical_form();
        let (a, b, i) = t.transport(&Morphism::Tree(iso)).unwrap();
        assert_eq!(a, b);
        assert_eq!(i, t.identity(a));
        let eta = Arc::new(PolyTree::eta());
        let m = OmegaMorphism::from_edge_map(&eta, &tree, vec![2]).unwrap();
        let (a, b, _) = t.transport(&Morphism::Tree(m)).unwrap();
        assert_eq!(t.key(a), "eta");
        assert_eq!(t.object(b).size(), 2);
    }

    #[test]
    fn elementary_objects_over_trees() {
        let t = IndexTruncation::new(Flavor::Omega, Bound::trees(2, 2)).unwrap();
        let c2 = t.find_key("C2").unwrap();
        // three edges and the two orderings of the corolla
        assert_eq!(t.elementary_over(c2).len(), 5);
    }
}
