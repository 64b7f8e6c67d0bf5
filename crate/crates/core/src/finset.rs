//! Skeletal finite sets `{0, .., k-1}` and the maps between them.
//!
//! Elements are 0-based in memory. The JSON encoding is 1-based, matching
//! the usual `{1, .., k}` notation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A map of skeletal finite sets `dom -> cod`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FinSetMap {
    codomain: usize,
    values: Vec<usize>,
}

impl FinSetMap {
    pub fn new(codomain: usize, values: Vec<usize>) -> Result<Self> {
        if let Some((x, &v)) = values.iter().enumerate().find(|(_, &v)| v >= codomain) {
            return Err(Error::Domain(format!(
                "value {v} at position {x} is outside a codomain of size {codomain}"
            )));
        }
        Ok(FinSetMap { codomain, values })
    }

    /// Construct without checking; callers guarantee every value is in range.
    pub(crate) fn from_raw(codomain: usize, values: Vec<usize>) -> Self {
        debug_assert!(values.iter().all(|&v| v < codomain));
        FinSetMap { codomain, values }
    }

    pub fn identity(k: usize) -> Self {
        FinSetMap::from_raw(k, (0..k).collect())
    }

    /// The unique map `k -> 1`.
    pub fn terminal(k: usize) -> Self {
        FinSetMap::from_raw(1, vec![0; k])
    }

    /// The empty map `0 -> l`.
    pub fn empty(l: usize) -> Self {
        FinSetMap::from_raw(l, Vec::new())
    }

    pub fn domain_size(&self) -> usize {
        self.values.len()
    }

    pub fn codomain_size(&self) -> usize {
        self.codomain
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.values[x]
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &FinSetMap) -> Result<FinSetMap> {
        if first.codomain != self.domain_size() {
            return Err(Error::Structural(format!(
                "cannot compose: codomain {} vs domain {}",
                first.codomain,
                self.domain_size()
            )));
        }
        Ok(FinSetMap::from_raw(
            self.codomain,
            first.values.iter().map(|&x| self.values[x]).collect(),
        ))
    }

    /// Elements of the domain lying over `j`, in increasing order.
    pub fn fibre(&self, j: usize) -> Result<Vec<usize>> {
        if j >= self.codomain {
            return Err(Error::Domain(format!(
                "fibre over {j} requested for a codomain of size {}",
                self.codomain
            )));
        }
        Ok(self.fibre_unchecked(j))
    }

    pub(crate) fn fibre_unchecked(&self, j: usize) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == j)
            .map(|(x, _)| x)
            .collect()
    }

    /// All fibres, indexed by codomain element.
    pub fn fibres(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.codomain];
        for (x, &v) in self.values.iter().enumerate() {
            out[v].push(x);
        }
        out
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.codomain];
        self.values.iter().all(|&v| !std::mem::replace(&mut seen[v], true))
    }

    pub fn is_surjective(&self) -> bool {
        let mut seen = vec![false; self.codomain];
        for &v in &self.values {
            seen[v] = true;
        }
        seen.into_iter().all(|s| s)
    }

    pub fn is_bijective(&self) -> bool {
        self.domain_size() == self.codomain && self.is_injective()
    }

    /// The image, sorted.
    pub fn image(&self) -> Vec<usize> {
        let mut img = self.values.clone();
        img.sort_unstable();
        img.dedup();
        img
    }

    /// Inverse of a bijection.
    pub fn inverse(&self) -> Option<FinSetMap> {
        if !self.is_bijective() {
            return None;
        }
        let mut inv = vec![0; self.codomain];
        for (x, &v) in self.values.iter().enumerate() {
            inv[v] = x;
        }
        Some(FinSetMap::from_raw(self.domain_size(), inv))
    }

    /// Every map `k -> l`, lexicographic in the value sequence.
    pub fn all_maps(k: usize, l: usize) -> impl Iterator<Item = FinSetMap> {
        let total = if k == 0 {
            1
        } else if l == 0 {
            0
        } else {
            l.checked_pow(k as u32).unwrap_or(usize::MAX)
        };
        (0..total).map(move |mut code| {
            let mut values = vec![0; k];
            for slot in values.iter_mut().rev() {
                *slot = code % l.max(1);
                code /= l.max(1);
            }
            FinSetMap::from_raw(l, values)
        })
    }

    /// Every injection `k -> l`, lexicographic in the value sequence.
    pub fn injections(k: usize, l: usize) -> Vec<FinSetMap> {
        let mut out = Vec::new();
        let mut current = Vec::with_capacity(k);
        let mut used = vec![false; l];
        fn go(
            k: usize,
            l: usize,
            current: &mut Vec<usize>,
            used: &mut [bool],
            out: &mut Vec<FinSetMap>,
        ) {
            if current.len() == k {
                out.push(FinSetMap::from_raw(l, current.clone()));
                return;
            }
            for v in 0..l {
                if !used[v] {
                    used[v] = true;
                    current.push(v);
                    go(k, l, current, used, out);
                    current.pop();
                    used[v] = false;
                }
            }
        }
        go(k, l, &mut current, &mut used, &mut out);
        out
    }

    /// Every bijection `source -> target` between two lists of equal length,
    /// expressed as lists of target elements.
    pub(crate) fn bijections_between(target: &[usize]) -> Vec<Vec<usize>> {
        permutations(target.len())
            .into_iter()
            .map(|p| p.into_iter().map(|i| target[i]).collect())
            .collect()
    }
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        out.push(perm.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| perm[i - 1] < perm[i]) else {
            break;
        };
        let j = (i..n).rev().find(|&j| perm[j] > perm[i - 1]).unwrap();
        perm.swap(i - 1, j);
        perm[i..].reverse();
    }
    out
}

/// Decide whether the commuting square
///
/// ```text
///   A --top--> B
///   |          |
///  left      right
///   v          v
///   C --bot--> D
/// ```
///
/// is a pullback, i.e. whether `A -> B ×_D C` is a bijection.
pub fn is_pullback_square(
    top: &FinSetMap,
    left: &FinSetMap,
    right: &FinSetMap,
    bottom: &FinSetMap,
) -> Result<bool> {
    if top.domain_size() != left.domain_size()
        || top.codomain_size() != right.domain_size()
        || left.codomain_size() != bottom.domain_size()
        || right.codomain_size() != bottom.codomain_size()
    {
        return Err(Error::Structural(
            "square legs have mismatched domains or codomains".into(),
        ));
    }
    for a in 0..top.domain_size() {
        if right.apply(top.apply(a)) != bottom.apply(left.apply(a)) {
            return Err(Error::Structural(format!(
                "square does not commute at element {a}"
            )));
        }
    }
    // Count the fibre product fibrewise over D and check that the comparison
    // map is injective.
    let right_fibres = right.fibres();
    let fibre_product_size: usize = (0..bottom.domain_size())
        .map(|c| right_fibres[bottom.apply(c)].len())
        .sum();
    if fibre_product_size != top.domain_size() {
        return Ok(false);
    }
    let mut seen = std::collections::HashSet::with_capacity(top.domain_size());
    Ok((0..top.domain_size()).all(|a| seen.insert((top.apply(a), left.apply(a)))))
}

#[derive(Serialize, Deserialize)]
struct FinSetMapJson {
    dom: usize,
    cod: usize,
    values: Vec<usize>,
}

impl Serialize for FinSetMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FinSetMapJson {
            dom: self.domain_size(),
            cod: self.codomain,
            values: self.values.iter().map(|v| v + 1).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FinSetMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = FinSetMapJson::deserialize(d)?;
        if raw.values.len() != raw.dom {
            return Err(D::Error::custom(format!(
                "map declares dom {} but lists {} values",
                raw.dom,
                raw.values.len()
            )));
        }
        let values = raw
            .values
            .iter()
            .map(|&v| {
                v.checked_sub(1)
                    .ok_or_else(|| D::Error::custom("map values are 1-based"))
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        FinSetMap::new(raw.cod, values).map_err(D::Error::custom)
    }
}
