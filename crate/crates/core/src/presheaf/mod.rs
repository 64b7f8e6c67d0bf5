//! Finite set-valued presheaves on bounded pieces of the three index
//! categories.

mod colimit;
mod completeness;
mod maps;
mod nerve;
pub mod operad;
mod segal;
mod truncation;

pub use colimit::{colimit, external_boundary, horn, segal_core, subtree_segal_core, Cocone};
pub use completeness::{check_complete_discrete, check_ff_eso, underlying_category, FfEso, UnderlyingCategory};
pub use maps::{enumerate_maps, is_local, PresheafMap};
pub use nerve::{
    nerve, nerve_deltaf, nerve_map, nerve_omega, operad_from_segal, segal_round_trip, tau_pullback, tau_pullback_comparison, Cell,
    Nerve, RoundTrip,
};
pub use operad::{ColouredOperad, OperadMorphism};
pub use segal::{check_segal, check_segal_deltaf, check_segal_omega, istar_product_check, segal_conditions_deltaf, SegalReport};
pub use truncation::{Bound, Flavor, IndexTruncation, Morphism, Object};

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A presheaf of finite sets on a truncation: a value set per object and
/// an action per morphism, stored contravariantly.
#[derive(Debug, Clone)]
pub struct SetPresheaf {
    trunc: Arc<IndexTruncation>,
    labels: Vec<Vec<String>>,
    /// `actions[a][b][i]` is `F(m): F(b) -> F(a)` for `m = homs[a][b][i]`.
    actions: Vec<Vec<Vec<Vec<u32>>>>,
}

impl SetPresheaf {
    /// Build and check functoriality exhaustively.
    pub fn new(
        trunc: Arc<IndexTruncation>,
        labels: Vec<Vec<String>>,
        actions: Vec<Vec<Vec<Vec<u32>>>>,
    ) -> Result<Self> {
        let p = SetPresheaf {
            trunc,
            labels,
            actions,
        };
        p.validate()?;
        Ok(p)
    }

    /// Build from an action function without storing anything first.
    pub fn from_fn(
        trunc: Arc<IndexTruncation>,
        labels: Vec<Vec<String>>,
        act: impl Fn(usize, usize, usize, usize) -> Result<u32> + Sync,
    ) -> Result<Self> {
        let k = trunc.len();
        let actions = (0..k)
            .into_par_iter()
            .map(|a| {
                (0..k)
                    .map(|b| {
                        (0..trunc.homs(a, b).len())
                            .map(|i| (0..labels[b].len()).map(|x| act(a, b, i, x)).collect())
                            .collect()
                    })
                    .collect::<Result<Vec<Vec<Vec<u32>>>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        SetPresheaf::new(trunc, labels, actions)
    }

    /// Assemble a presheaf whose functoriality holds by construction.
    pub(crate) fn from_parts_unchecked(
        trunc: Arc<IndexTruncation>,
        labels: Vec<Vec<String>>,
        actions: Vec<Vec<Vec<Vec<u32>>>>,
    ) -> Self {
        SetPresheaf {
            trunc,
            labels,
            actions,
        }
    }

    /// Rerun the construction-time checks.
    pub fn check(&self) -> Result<()> {
        self.validate()
    }

    fn validate(&self) -> Result<()> {
        let t = &self.trunc;
        let k = t.len();
        if self.labels.len() != k || self.actions.len() != k {
            return Err(Error::Structural("presheaf does not cover the truncation".into()));
        }
        for a in 0..k {
            if self.actions[a].len() != k {
                return Err(Error::Structural("presheaf action table has the wrong shape".into()));
            }
            for b in 0..k {
                let acts = &self.actions[a][b];
                if acts.len() != t.homs(a, b).len() {
                    return Err(Error::Structural(format!(
                        "presheaf lists {} actions for {} morphisms {} -> {}",
                        acts.len(),
                        t.homs(a, b).len(),
                        t.key(a),
                        t.key(b)
                    )));
                }
                for act in acts {
                    if act.len() != self.size(b) || act.iter().any(|&x| x as usize >= self.size(a)) {
                        return Err(Error::Structural(format!(
                            "an action {} -> {} has the wrong shape",
                            t.key(b),
                            t.key(a)
                        )));
                    }
                }
            }
            let id = &self.actions[a][a][t.identity(a)];
            if id.iter().enumerate().any(|(x, &y)| x != y as usize) {
                return Err(Error::invalid(
                    "presheaf",
                    format!("the identity of {} acts non-trivially", t.key(a)),
                ));
            }
        }
        // F(g∘f) = F(f)∘F(g) for f: a -> b, g: b -> c
        let bad = (0..k).into_par_iter().find_map_any(|b| {
            for a in 0..k {
                for c in 0..k {
                    let table = t.compose_table(a, b, c);
                    let nbc = t.homs(b, c).len();
                    for (i, f_act) in self.actions[a][b].iter().enumerate() {
                        for (j, g_act) in self.actions[b][c].iter().enumerate() {
                            let gf = table[i * nbc + j] as usize;
                            let gf_act = &self.actions[a][c][gf];
                            for z in 0..self.size(c) {
                                if gf_act[z] != f_act[g_act[z] as usize] {
                                    return Some(format!(
                                        "action of {} is not the composite of the actions of {} and {}",
                                        t.hom_key(a, c, gf),
                                        t.hom_key(a, b, i),
                                        t.hom_key(b, c, j)
                                    ));
                                }
                            }
                        }
                    }
                }
            }
            None
        });
        match bad {
            Some(msg) => Err(Error::invalid("presheaf", msg)),
            None => Ok(()),
        }
    }

    pub fn trunc(&self) -> &Arc<IndexTruncation> {
        &self.trunc
    }

    pub fn size(&self, a: usize) -> usize {
        self.labels[a].len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        (0..self.trunc.len()).map(|a| self.size(a)).collect()
    }

    pub fn labels(&self, a: usize) -> &[String] {
        &self.labels[a]
    }

    /// `F(m)` for `m = homs[a][b][i]`.
    pub fn action(&self, a: usize, b: usize, i: usize) -> &[u32] {
        &self.actions[a][b][i]
    }

    pub fn act(&self, a: usize, b: usize, i: usize, x: usize) -> usize {
        self.actions[a][b][i][x] as usize
    }

    /// The presheaf with one element everywhere.
    pub fn terminal(trunc: &Arc<IndexTruncation>) -> Self {
        let k = trunc.len();
        let labels = vec![vec!["*".to_string()]; k];
        let actions = (0..k)
            .map(|a| (0..k).map(|b| vec![vec![0]; trunc.homs(a, b).len()]).collect())
            .collect();
        SetPresheaf {
            trunc: trunc.clone(),
            labels,
            actions,
        }
    }

    /// The empty presheaf.
    pub fn empty(trunc: &Arc<IndexTruncation>) -> Self {
        let k = trunc.len();
        let actions = (0..k)
            .map(|a| (0..k).map(|b| vec![Vec::new(); trunc.homs(a, b).len()]).collect())
            .collect();
        SetPresheaf {
            trunc: trunc.clone(),
            labels: vec![Vec::new(); k],
            actions,
        }
    }

    /// The Yoneda presheaf `Hom(-, x)` with precomposition actions.
    pub fn representable(trunc: &Arc<IndexTruncation>, x: usize) -> Result<Self> {
        let k = trunc.len();
        let labels = (0..k)
            .map(|a| (0..trunc.homs(a, x).len()).map(|i| trunc.hom_key(a, x, i)).collect())
            .collect();
        let actions = (0..k)
            .into_par_iter()
            .map(|a| {
                (0..k)
                    .map(|b| {
                        let table = trunc.compose_table(a, b, x);
                        let nbx = trunc.homs(b, x).len();
                        (0..trunc.homs(a, b).len())
                            .map(|i| (0..nbx).map(|h| table[i * nbx + h]).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        SetPresheaf::new(trunc.clone(), labels, actions)
    }

    /// Whether every component of the presheaf agrees with `other`.
    pub fn same_as(&self, other: &SetPresheaf) -> bool {
        self.sizes() == other.sizes() && self.actions == other.actions
    }

    pub fn to_json(&self) -> PresheafJson {
        let t = &self.trunc;
        let k = t.len();
        let mut values = BTreeMap::new();
        let mut actions = BTreeMap::new();
        for a in 0..k {
            values.insert(t.key(a), self.labels[a].clone());
            for b in 0..k {
                for i in 0..t.homs(a, b).len() {
                    actions.insert(t.hom_key(a, b, i), self.actions[a][b][i].clone());
                }
            }
        }
        PresheafJson {
            flavor: t.flavor(),
            bound: t.bound(),
            values,
            actions,
        }
    }

    pub fn from_json(j: &PresheafJson) -> Result<Self> {
        let trunc = Arc::new(IndexTruncation::new(j.flavor, j.bound)?);
        SetPresheaf::from_json_over(&trunc, j)
    }

    pub fn from_json_over(trunc: &Arc<IndexTruncation>, j: &PresheafJson) -> Result<Self> {
        if j.flavor != trunc.flavor() || j.bound != trunc.bound() {
            return Err(Error::Structural("presheaf document is over a different truncation".into()));
        }
        let k = trunc.len();
        let mut labels = Vec::with_capacity(k);
        for a in 0..k {
            let key = trunc.key(a);
            labels.push(
                j.values
                    .get(&key)
                    .cloned()
                    .ok_or_else(|| Error::invalid("presheaf", format!("no value at {key}")))?,
            );
        }
        let mut actions = Vec::with_capacity(k);
        for a in 0..k {
            let mut row = Vec::with_capacity(k);
            for b in 0..k {
                let mut acts = Vec::new();
                for i in 0..trunc.homs(a, b).len() {
                    let key = trunc.hom_key(a, b, i);
                    acts.push(
                        j.actions
                            .get(&key)
                            .cloned()
                            .ok_or_else(|| Error::invalid("presheaf", format!("no action for {key}")))?,
                    );
                }
                row.push(acts);
            }
            actions.push(row);
        }
        if j.values.len() != k {
            return Err(Error::invalid("presheaf", "values at objects outside the truncation"));
        }
        SetPresheaf::new(trunc.clone(), labels, actions)
    }
}

/// `{"flavor", "bound", "values": {object: [labels]}, "actions": {morphism: [indices]}}`.
/// Action arrays are 0-based indices into the value list of the source.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PresheafJson {
    pub flavor: Flavor,
    pub bound: Bound,
    pub values: BTreeMap<String, Vec<String>>,
    pub actions: BTreeMap<String, Vec<u32>>,
}

pub(crate) fn same_truncation(a: &Arc<IndexTruncation>, b: &Arc<IndexTruncation>) -> bool {
    Arc::ptr_eq(a, b) || (a.flavor() == b.flavor() && a.bound() == b.bound())
}
