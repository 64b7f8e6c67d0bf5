//! Level forests `([n], f)` and the category they form.
//!
//! An object is a string of finite-set maps `f(0) -> f(1) -> .. -> f(n)`.
//! A morphism `([n], f) -> ([m], g)` is a monotone `phi: [n] -> [m]` together
//! with injections `eta_i: f(i) -> g(phi(i))` whose naturality squares are
//! pullbacks. Objects with `f(n) = 1` are level trees and span the full
//! subcategory used by the tree comparison.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finset::{is_pullback_square, FinSetMap};

/// Default cap on the size of a single enumerated hom-set.
pub const DEFAULT_HOM_GUARD: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DeltaFObject {
    levels: Vec<usize>,
    steps: Vec<FinSetMap>,
}

impl DeltaFObject {
    /// Build from the bottom level size and the step maps; validates that
    /// consecutive steps compose.
    pub fn new(bottom: usize, steps: Vec<FinSetMap>) -> Result<Self> {
        let mut levels = vec![bottom];
        for (i, step) in steps.iter().enumerate() {
            if step.domain_size() != *levels.last().unwrap() {
                return Err(Error::invalid(
                    "level forest",
                    format!(
                        "step {} has domain {} but level {} has {} elements",
                        i + 1,
                        step.domain_size(),
                        i,
                        levels[i]
                    ),
                ));
            }
            levels.push(step.codomain_size());
        }
        Ok(DeltaFObject { levels, steps })
    }

    /// Validate a candidate given as explicit level sizes plus steps.
    pub fn validate(levels: Vec<usize>, steps: Vec<FinSetMap>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::invalid("level forest", "no levels"));
        }
        if steps.len() + 1 != levels.len() {
            return Err(Error::invalid(
                "level forest",
                format!("{} levels need {} steps, got {}", levels.len(), levels.len() - 1, steps.len()),
            ));
        }
        for (i, step) in steps.iter().enumerate() {
            if step.domain_size() != levels[i] || step.codomain_size() != levels[i + 1] {
                return Err(Error::invalid(
                    "level forest",
                    format!(
                        "step {} is a map {} -> {} but the levels are {} -> {}",
                        i + 1,
                        step.domain_size(),
                        step.codomain_size(),
                        levels[i],
                        levels[i + 1]
                    ),
                ));
            }
        }
        Ok(DeltaFObject { levels, steps })
    }

    /// `([0], 1)`, the single edge.
    pub fn edge() -> Self {
        DeltaFObject { levels: vec![1], steps: vec![] }
    }

    /// `([0], k)`, a forest of `k` edges.
    pub fn edges(k: usize) -> Self {
        DeltaFObject { levels: vec![k], steps: vec![] }
    }

    /// `([1], k -> 1)`, the corolla with `k` inputs.
    pub fn corolla(k: usize) -> Self {
        DeltaFObject {
            levels: vec![k, 1],
            steps: vec![FinSetMap::terminal(k)],
        }
    }

    /// `([n], 1 = 1 = .. = 1)`.
    pub fn linear(n: usize) -> Self {
        DeltaFObject {
            levels: vec![1; n + 1],
            steps: vec![FinSetMap::identity(1); n],
        }
    }

    pub fn length(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn level(&self, i: usize) -> usize {
        self.levels[i]
    }

    /// `f^{i+1}: f(i) -> f(i+1)`, indexed by `i`.
    pub fn step(&self, i: usize) -> &FinSetMap {
        &self.steps[i]
    }

    pub fn steps(&self) -> &[FinSetMap] {
        &self.steps
    }

    /// Where `x ∈ f(i)` lands in `f(j)` for `i <= j`.
    pub fn carry(&self, i: usize, j: usize, mut x: usize) -> usize {
        for k in i..j {
            x = self.steps[k].apply(x);
        }
        x
    }

    /// The composite `f^{ij}`.
    pub fn composite(&self, i: usize, j: usize) -> FinSetMap {
        assert!(i <= j && j <= self.length());
        FinSetMap::from_raw(
            self.levels[j],
            (0..self.levels[i]).map(|x| self.carry(i, j, x)).collect(),
        )
    }

    /// Elements of `f(i)` lying over `x ∈ f(j)`.
    pub fn fibre_over(&self, i: usize, j: usize, x: usize) -> Vec<usize> {
        (0..self.levels[i]).filter(|&y| self.carry(i, j, y) == x).collect()
    }

    pub fn is_level_tree(&self) -> bool {
        self.levels[self.length()] == 1
    }

    pub fn total_size(&self) -> usize {
        self.levels.iter().sum()
    }

    /// Size measure used for truncations: every level counts at least once,
    /// so that a bound on the weight also bounds the length.
    pub fn weight(&self) -> usize {
        self.levels.iter().map(|&k| k.max(1)).sum()
    }

    /// A short textual key. Steps are listed (1-based) only when some step
    /// is not forced by the level sizes.
    pub fn key(&self) -> String {
        let levels = join(self.levels.iter());
        let forced = self
            .steps
            .iter()
            .all(|s| s.codomain_size() <= 1 || s.domain_size() == 0);
        if forced {
            format!("[{levels}]")
        } else {
            let steps: Vec<String> = self
                .steps
                .iter()
                .map(|s| join(s.values().iter().map(|v| v + 1)))
                .collect();
            format!("[{levels}|{}]", steps.join(";"))
        }
    }

    pub fn parse_key(key: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("not a level-forest key: {key:?}"));
        let inner = key
            .trim()
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(bad)?;
        let (levels_txt, steps_txt) = match inner.split_once('|') {
            Some((l, s)) => (l, Some(s)),
            None => (inner, None),
        };
        let levels = parse_list(levels_txt).map_err(|_| bad())?;
        if levels.is_empty() {
            return Err(bad());
        }
        let steps = match steps_txt {
            None => {
                let mut steps = Vec::new();
                for w in levels.windows(2) {
                    match (w[0], w[1]) {
                        (0, l) => steps.push(FinSetMap::empty(l)),
                        (k, 1) => steps.push(FinSetMap::terminal(k)),
                        (k, l) => {
                            return Err(Error::Parse(format!(
                                "step {k} -> {l} in {key:?} is not determined by the sizes; list it after '|'"
                            )))
                        }
                    }
                }
                steps
            }
            Some(txt) => {
                let blocks: Vec<&str> = txt.split(';').collect();
                if blocks.len() + 1 != levels.len() {
                    return Err(bad());
                }
                blocks
                    .iter()
                    .enumerate()
                    .map(|(i, b)| {
                        let vals = parse_list(b).map_err(|_| bad())?;
                        let vals = vals
                            .into_iter()
                            .map(|v| v.checked_sub(1).ok_or_else(bad))
                            .collect::<Result<Vec<_>>>()?;
                        FinSetMap::new(levels[i + 1], vals)
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };
        DeltaFObject::validate(levels, steps)
    }

    /// Canonical representative of the isomorphism class together with an
    /// isomorphism from it onto `self`.
    pub fn canonical_form(self: &Arc<Self>) -> (Arc<DeltaFObject>, DeltaFMorphism) {
        let n = self.length();
        // class[i][x]: isomorphism class of the subtree under x ∈ f(i)
        let mut class: Vec<Vec<usize>> = vec![vec![0; self.levels[0]]];
        let mut child_lists: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); self.levels[0]]];
        for i in 1..=n {
            let fibres = self.steps[i - 1].fibres();
            let codes: Vec<Vec<usize>> = fibres
                .iter()
                .map(|fib| {
                    let mut c: Vec<usize> = fib.iter().map(|&y| class[i - 1][y]).collect();
                    c.sort_unstable();
                    c
                })
                .collect();
            let distinct: BTreeSet<&Vec<usize>> = codes.iter().collect();
            let distinct: Vec<&Vec<usize>> = distinct.into_iter().collect();
            class.push(
                codes
                    .iter()
                    .map(|c| distinct.binary_search(&c).unwrap())
                    .collect(),
            );
            child_lists.push(fibres);
        }
        // order[i]: old elements of level i listed in canonical order
        let mut order: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
        let mut top: Vec<usize> = (0..self.levels[n]).collect();
        top.sort_by_key(|&x| class[n][x]);
        order[n] = top;
        for i in (1..=n).rev() {
            let mut next = Vec::with_capacity(self.levels[i - 1]);
            for &x in &order[i] {
                let mut kids = child_lists[i][x].clone();
                kids.sort_by_key(|&y| class[i - 1][y]);
                next.extend(kids);
            }
            order[i - 1] = next;
        }
        let mut new_index: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
        for i in 0..=n {
            new_index[i] = vec![0; self.levels[i]];
            for (new, &old) in order[i].iter().enumerate() {
                new_index[i][old] = new;
            }
        }
        let steps = (0..n)
            .map(|i| {
                FinSetMap::from_raw(
                    self.levels[i + 1],
                    order[i]
                        .iter()
                        .map(|&old| new_index[i + 1][self.steps[i].apply(old)])
                        .collect(),
                )
            })
            .collect();
        let canon = Arc::new(DeltaFObject {
            levels: self.levels.clone(),
            steps,
        });
        let eta = (0..=n)
            .map(|i| FinSetMap::from_raw(self.levels[i], order[i].clone()))
            .collect();
        let iso = DeltaFMorphism {
            source: canon.clone(),
            target: self.clone(),
            phi: (0..=n).collect(),
            eta,
        };
        (canon, iso)
    }

    pub fn is_canonical(self: &Arc<Self>) -> bool {
        *self.canonical_form().0 == **self
    }
}

impl PartialOrd for DeltaFObject {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Truncation order: weight, then length, then the raw data.
impl Ord for DeltaFObject {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.weight(), self.length(), &self.levels, &self.steps).cmp(&(
            other.weight(),
            other.length(),
            &other.levels,
            &other.steps,
        ))
    }
}

impl fmt::Display for DeltaFObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

fn join<T: ToString>(items: impl Iterator<Item = T>) -> String {
    items.map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_list(txt: &str) -> std::result::Result<Vec<usize>, std::num::ParseIntError> {
    if txt.trim().is_empty() {
        return Ok(Vec::new());
    }
    txt.split(',').map(|t| t.trim().parse()).collect()
}

/// Monotone maps `[n] -> [m]` in lexicographic order.
pub fn monotone_maps(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(n + 1);
    fn go(n: usize, m: usize, lo: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == n + 1 {
            out.push(current.clone());
            return;
        }
        for v in lo..=m {
            current.push(v);
            go(n, m, v, current, out);
            current.pop();
        }
    }
    go(n, m, 0, &mut current, &mut out);
    out
}

pub fn is_inert_delta(phi: &[usize]) -> bool {
    phi.iter().enumerate().all(|(i, &v)| v == phi[0] + i)
}

pub fn is_active_delta(phi: &[usize], m: usize) -> bool {
    phi[0] == 0 && *phi.last().unwrap() == m
}

/// Which defining condition a candidate morphism fails, and where.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MorphismDefect {
    Phi(String),
    Shape { level: usize, reason: String },
    NotInjective { level: usize },
    NotNatural { from: usize, to: usize },
    NotPullback { from: usize, to: usize },
}

impl fmt::Display for MorphismDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MorphismDefect::Phi(r) => write!(f, "phi: {r}"),
            MorphismDefect::Shape { level, reason } => write!(f, "eta_{level}: {reason}"),
            MorphismDefect::NotInjective { level } => write!(f, "eta_{level} is not injective"),
            MorphismDefect::NotNatural { from, to } => {
                write!(f, "square ({from},{to}) does not commute")
            }
            MorphismDefect::NotPullback { from, to } => {
                write!(f, "square ({from},{to}) is not a pullback")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct MorphismClass {
    pub injective: bool,
    pub surjective: bool,
    pub inert: bool,
    pub active: bool,
    pub cartesian: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorizationSystem {
    ActiveInert,
    SurjectiveInjective,
}

#[derive(Debug, Clone)]
pub struct DeltaFMorphism {
    source: Arc<DeltaFObject>,
    target: Arc<DeltaFObject>,
    phi: Vec<usize>,
    eta: Vec<FinSetMap>,
}

impl PartialEq for DeltaFMorphism {
    fn eq(&self, other: &Self) -> bool {
        self.phi == other.phi
            && self.eta == other.eta
            && (Arc::ptr_eq(&self.source, &other.source) || self.source == other.source)
            && (Arc::ptr_eq(&self.target, &other.target) || self.target == other.target)
    }
}

impl Eq for DeltaFMorphism {}

impl std::hash::Hash for DeltaFMorphism {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.phi.hash(state);
        self.eta.hash(state);
    }
}

impl DeltaFMorphism {
    /// Check every defining condition, looking at consecutive squares only.
    pub fn find_defect(
        source: &DeltaFObject,
        target: &DeltaFObject,
        phi: &[usize],
        eta: &[FinSetMap],
    ) -> Option<MorphismDefect> {
        if let Some(d) = shape_defect(source, target, phi, eta) {
            return Some(d);
        }
        let n = source.length();
        for i in 0..n {
            let right = target.composite(phi[i], phi[i + 1]);
            match is_pullback_square(&eta[i], source.step(i), &right, &eta[i + 1]) {
                Err(_) => return Some(MorphismDefect::NotNatural { from: i, to: i + 1 }),
                Ok(false) => return Some(MorphismDefect::NotPullback { from: i, to: i + 1 }),
                Ok(true) => {}
            }
        }
        None
    }

    /// Same as [`find_defect`](Self::find_defect) but checks the square for
    /// every pair `i <= j`.
    pub fn find_defect_all_pairs(
        source: &DeltaFObject,
        target: &DeltaFObject,
        phi: &[usize],
        eta: &[FinSetMap],
    ) -> Option<MorphismDefect> {
        if let Some(d) = shape_defect(source, target, phi, eta) {
            return Some(d);
        }
        let n = source.length();
        for i in 0..=n {
            for j in i..=n {
                let right = target.composite(phi[i], phi[j]);
                match is_pullback_square(&eta[i], &source.composite(i, j), &right, &eta[j]) {
                    Err(_) => return Some(MorphismDefect::NotNatural { from: i, to: j }),
                    Ok(false) => return Some(MorphismDefect::NotPullback { from: i, to: j }),
                    Ok(true) => {}
                }
            }
        }
        None
    }

    pub fn validate(
        source: Arc<DeltaFObject>,
        target: Arc<DeltaFObject>,
        phi: Vec<usize>,
        eta: Vec<FinSetMap>,
    ) -> Result<Self> {
        if let Some(d) = Self::find_defect(&source, &target, &phi, &eta) {
            return Err(Error::invalid("level-forest morphism", d.to_string()));
        }
        Ok(DeltaFMorphism { source, target, phi, eta })
    }

    pub(crate) fn from_parts_unchecked(
        source: Arc<DeltaFObject>,
        target: Arc<DeltaFObject>,
        phi: Vec<usize>,
        eta: Vec<FinSetMap>,
    ) -> Self {
        debug_assert!(
            Self::find_defect(&source, &target, &phi, &eta).is_none(),
            "{:?}",
            Self::find_defect(&source, &target, &phi, &eta)
        );
        DeltaFMorphism { source, target, phi, eta }
    }

    pub fn identity(x: &Arc<DeltaFObject>) -> Self {
        DeltaFMorphism {
            source: x.clone(),
            target: x.clone(),
            phi: (0..=x.length()).collect(),
            eta: x.levels.iter().map(|&k| FinSetMap::identity(k)).collect(),
        }
    }

    pub fn source(&self) -> &Arc<DeltaFObject> {
        &self.source
    }

    pub fn target(&self) -> &Arc<DeltaFObject> {
        &self.target
    }

    pub fn phi(&self) -> &[usize] {
        &self.phi
    }

    pub fn eta(&self) -> &[FinSetMap] {
        &self.eta
    }

    pub fn eta_at(&self, i: usize) -> &FinSetMap {
        &self.eta[i]
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &DeltaFMorphism) -> Result<DeltaFMorphism> {
        if *first.target != *self.source {
            return Err(Error::Structural(format!(
                "cannot compose {} -> {} with {} -> {}",
                first.source, first.target, self.source, self.target
            )));
        }
        let phi: Vec<usize> = first.phi.iter().map(|&i| self.phi[i]).collect();
        let eta = first
            .eta
            .iter()
            .enumerate()
            .map(|(i, e)| self.eta[first.phi[i]].after(e))
            .collect::<Result<Vec<_>>>()?;
        let composite = DeltaFMorphism {
            source: first.source.clone(),
            target: self.target.clone(),
            phi,
            eta,
        };
        if let Some(d) =
            Self::find_defect(&composite.source, &composite.target, &composite.phi, &composite.eta)
        {
            return Err(Error::Structural(format!("composite is not a morphism: {d}")));
        }
        Ok(composite)
    }

    pub fn classify(&self) -> MorphismClass {
        let m = self.target.length();
        let cartesian = self.eta.iter().all(FinSetMap::is_bijective);
        let injective = self.phi.windows(2).all(|w| w[0] < w[1]);
        let phi_surjective = self.phi[0] == 0
            && *self.phi.last().unwrap() == m
            && self.phi.windows(2).all(|w| w[1] <= w[0] + 1);
        MorphismClass {
            injective,
            surjective: phi_surjective && cartesian,
            inert: is_inert_delta(&self.phi),
            active: is_active_delta(&self.phi, m) && cartesian,
            cartesian,
        }
    }

    pub fn is_iso(&self) -> bool {
        self.source.length() == self.target.length()
            && self.phi.iter().enumerate().all(|(i, &v)| i == v)
            && self.eta.iter().all(FinSetMap::is_bijective)
    }

    /// Compact canonical key for hashing and presheaf documents.
    pub fn data_key(&self) -> String {
        let eta: Vec<String> = self
            .eta
            .iter()
            .map(|e| join(e.values().iter().map(|v| v + 1)))
            .collect();
        format!("{}:{}", join(self.phi.iter()), eta.join(";"))
    }

    pub fn key(&self) -> String {
        format!("{}->{}@{}", self.source.key(), self.target.key(), self.data_key())
    }

    /// Sort key realizing the canonical order on a hom-set.
    fn order_key(&self) -> (Vec<usize>, Vec<usize>) {
        (
            self.phi.clone(),
            self.eta.iter().flat_map(|e| e.values().iter().copied()).collect(),
        )
    }

    /// Factor into a first map followed by a second map of the given system.
    pub fn factorize(&self, system: FactorizationSystem) -> (DeltaFMorphism, DeltaFMorphism) {
        let class = self.classify();
        match system {
            FactorizationSystem::ActiveInert => {
                if class.inert {
                    return (DeltaFMorphism::identity(&self.source), self.clone());
                }
                if class.active {
                    return (self.clone(), DeltaFMorphism::identity(&self.target));
                }
                let n = self.source.length();
                let start = self.phi[0];
                let len = self.phi[n] - start;
                let top: Vec<usize> = self.eta[n].image();
                let levels: Vec<Vec<usize>> = (0..=len)
                    .map(|j| {
                        let lvl = start + j;
                        (0..self.target.levels[lvl])
                            .filter(|&y| {
                                top.binary_search(&self.target.carry(lvl, self.phi[n], y)).is_ok()
                            })
                            .collect()
                    })
                    .collect();
                let middle_phi: Vec<usize> = self.phi.iter().map(|&p| p - start).collect();
                let inclusion_phi: Vec<usize> = (0..=len).map(|j| j + start).collect();
                self.split_through(levels, middle_phi, inclusion_phi)
            }
            FactorizationSystem::SurjectiveInjective => {
                if class.injective {
                    return (DeltaFMorphism::identity(&self.source), self.clone());
                }
                if class.surjective {
                    return (self.clone(), DeltaFMorphism::identity(&self.target));
                }
                let mut image: Vec<usize> = self.phi.clone();
                image.dedup();
                let middle_phi: Vec<usize> = self
                    .phi
                    .iter()
                    .map(|p| image.binary_search(p).unwrap())
                    .collect();
                let levels: Vec<Vec<usize>> = (0..image.len())
                    .map(|j| {
                        let i = middle_phi.iter().position(|&q| q == j).unwrap();
                        self.eta[i].image()
                    })
                    .collect();
                self.split_through(levels, middle_phi, image)
            }
        }
    }

    /// Factor through the sub-forest of the target with the given (sorted)
    /// level subsets, sitting over `inclusion_phi`.
    fn split_through(
        &self,
        levels: Vec<Vec<usize>>,
        first_phi: Vec<usize>,
        inclusion_phi: Vec<usize>,
    ) -> (DeltaFMorphism, DeltaFMorphism) {
        let k = levels.len() - 1;
        let position = |j: usize, y: usize| levels[j].binary_search(&y).unwrap();
        let steps: Vec<FinSetMap> = (0..k)
            .map(|j| {
                FinSetMap::from_raw(
                    levels[j + 1].len(),
                    levels[j]
                        .iter()
                        .map(|&y| {
                            position(
                                j + 1,
                                self.target.carry(inclusion_phi[j], inclusion_phi[j + 1], y),
                            )
                        })
                        .collect(),
                )
            })
            .collect();
        let middle = Arc::new(DeltaFObject {
            levels: levels.iter().map(Vec::len).collect(),
            steps,
        });
        let second_eta: Vec<FinSetMap> = levels
            .iter()
            .enumerate()
            .map(|(j, lv)| FinSetMap::from_raw(self.target.levels[inclusion_phi[j]], lv.clone()))
            .collect();
        let first_eta: Vec<FinSetMap> = self
            .eta
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let j = first_phi[i];
                FinSetMap::from_raw(
                    levels[j].len(),
                    e.values().iter().map(|&y| position(j, y)).collect(),
                )
            })
            .collect();
        let first = DeltaFMorphism::from_parts_unchecked(
            self.source.clone(),
            middle.clone(),
            first_phi,
            first_eta,
        );
        let second =
            DeltaFMorphism::from_parts_unchecked(middle, self.target.clone(), inclusion_phi, second_eta);
        (first, second)
    }
}

fn shape_defect(
    source: &DeltaFObject,
    target: &DeltaFObject,
    phi: &[usize],
    eta: &[FinSetMap],
) -> Option<MorphismDefect> {
    let n = source.length();
    let m = target.length();
    if phi.len() != n + 1 {
        return Some(MorphismDefect::Phi(format!(
            "has {} entries for a source of length {n}",
            phi.len()
        )));
    }
    if let Some(&v) = phi.iter().find(|&&v| v > m) {
        return Some(MorphismDefect::Phi(format!("value {v} exceeds target length {m}")));
    }
    if phi.windows(2).any(|w| w[0] > w[1]) {
        return Some(MorphismDefect::Phi("not monotone".into()));
    }
    if eta.len() != n + 1 {
        return Some(MorphismDefect::Shape {
            level: eta.len().min(n + 1),
            reason: format!("expected {} components, got {}", n + 1, eta.len()),
        });
    }
    for i in 0..=n {
        if eta[i].domain_size() != source.level(i) || eta[i].codomain_size() != target.level(phi[i])
        {
            return Some(MorphismDefect::Shape {
                level: i,
                reason: format!(
                    "is {} -> {} but should be {} -> {}",
                    eta[i].domain_size(),
                    eta[i].codomain_size(),
                    source.level(i),
                    target.level(phi[i])
                ),
            });
        }
        if !eta[i].is_injective() {
            return Some(MorphismDefect::NotInjective { level: i });
        }
    }
    None
}

/// All morphisms `x -> y` in canonical order: lexicographic in `phi`, then
/// in the flattened `eta` values.
pub fn enumerate_hom(
    x: &Arc<DeltaFObject>,
    y: &Arc<DeltaFObject>,
    guard: usize,
) -> Result<Vec<DeltaFMorphism>> {
    let n = x.length();
    let m = y.length();
    let source_fibres: Vec<Vec<Vec<usize>>> = x.steps.iter().map(FinSetMap::fibres).collect();
    let mut out = Vec::new();
    for phi in monotone_maps(n, m) {
        if (0..=n).any(|i| x.level(i) > y.level(phi[i])) {
            continue;
        }
        let target_fibres: Vec<Vec<Vec<usize>>> = (0..n)
            .map(|i| y.composite(phi[i], phi[i + 1]).fibres())
            .collect();
        let mut group = Vec::new();
        for top in FinSetMap::injections(x.level(n), y.level(phi[n])) {
            let mut etas: Vec<FinSetMap> = vec![FinSetMap::empty(0); n + 1];
            etas[n] = top;
            descend(
                n,
                &phi,
                &source_fibres,
                &target_fibres,
                x,
                y,
                &mut etas,
                &mut group,
                guard,
            )?;
        }
        group.sort_by_cached_key(DeltaFMorphism::order_key);
        out.append(&mut group);
        if out.len() > guard {
            return Err(Error::Resource(format!(
                "Hom({x}, {y}) exceeds the guard of {guard} morphisms"
            )));
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn descend(
    level: usize,
    phi: &[usize],
    source_fibres: &[Vec<Vec<usize>>],
    target_fibres: &[Vec<Vec<usize>>],
    x: &Arc<DeltaFObject>,
    y: &Arc<DeltaFObject>,
    etas: &mut Vec<FinSetMap>,
    out: &mut Vec<DeltaFMorphism>,
    guard: usize,
) -> Result<()> {
    if level == 0 {
        out.push(DeltaFMorphism::from_parts_unchecked(
            x.clone(),
            y.clone(),
            phi.to_vec(),
            etas.clone(),
        ));
        if out.len() > guard {
            return Err(Error::Resource(format!(
                "Hom({x}, {y}) exceeds the guard of {guard} morphisms"
            )));
        }
        return Ok(());
    }
    let i = level - 1;
    let above = &etas[level];
    // For each element over which a fibre sits, the matching target fibre.
    let pairs: Vec<(&Vec<usize>, &Vec<usize>)> = source_fibres[i]
        .iter()
        .enumerate()
        .map(|(z, fib)| (fib, &target_fibres[i][above.apply(z)]))
        .collect();
    if pairs.iter().any(|(s, t)| s.len() != t.len()) {
        return Ok(());
    }
    let choices: Vec<Vec<Vec<usize>>> = pairs
        .iter()
        .map(|(_, t)| FinSetMap::bijections_between(t))
        .collect();
    let mut values = vec![0usize; x.level(i)];
    let codomain = y.level(phi[i]);
    let mut index = vec![0usize; choices.len()];
    loop {
        for (slot, (src, _)) in pairs.iter().enumerate() {
            for (pos, &a) in src.iter().enumerate() {
                values[a] = choices[slot][index[slot]][pos];
            }
        }
        etas[i] = FinSetMap::from_raw(codomain, values.clone());
        descend(i, phi, source_fibres, target_fibres, x, y, etas, out, guard)?;
        // odometer over the per-fibre bijections
        let mut k = 0;
        loop {
            if k == index.len() {
                return Ok(());
            }
            index[k] += 1;
            if index[k] < choices[k].len() {
                break;
            }
            index[k] = 0;
            k += 1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementaryKind {
    Edge,
    Corolla { arity: usize },
}

/// An elementary object mapping inertly into a level forest.
#[derive(Debug, Clone)]
pub struct ElementaryOver {
    pub kind: ElementaryKind,
    pub level: usize,
    pub element: usize,
    pub object: Arc<DeltaFObject>,
    pub map: DeltaFMorphism,
}

/// One edge per `(i, x ∈ f(i))` and one corolla per `(i >= 1, x ∈ f(i))`,
/// each with its inert map into `x`.
pub fn elementary_objects_over(x: &Arc<DeltaFObject>) -> Vec<ElementaryOver> {
    let mut out = Vec::new();
    let edge = Arc::new(DeltaFObject::edge());
    for i in 0..=x.length() {
        for e in 0..x.level(i) {
            out.push(ElementaryOver {
                kind: ElementaryKind::Edge,
                level: i,
                element: e,
                object: edge.clone(),
                map: DeltaFMorphism::from_parts_unchecked(
                    edge.clone(),
                    x.clone(),
                    vec![i],
                    vec![FinSetMap::from_raw(x.level(i), vec![e])],
                ),
            });
        }
    }
    for i in 1..=x.length() {
        let fibres = x.step(i - 1).fibres();
        for (v, fibre) in fibres.into_iter().enumerate() {
            let arity = fibre.len();
            let corolla = Arc::new(DeltaFObject::corolla(arity));
            out.push(ElementaryOver {
                kind: ElementaryKind::Corolla { arity },
                level: i,
                element: v,
                object: corolla.clone(),
                map: DeltaFMorphism::from_parts_unchecked(
                    corolla,
                    x.clone(),
                    vec![i - 1, i],
                    vec![
                        FinSetMap::from_raw(x.level(i - 1), fibre),
                        FinSetMap::from_raw(x.level(i), vec![v]),
                    ],
                ),
            });
        }
    }
    out
}

/// The level tree sitting over `root ∈ f(n)`, with its map into `x` over the
/// identity of `[n]`.
pub fn restrict_to_fibre(
    x: &Arc<DeltaFObject>,
    root: usize,
) -> Result<(Arc<DeltaFObject>, DeltaFMorphism)> {
    let n = x.length();
    if root >= x.level(n) {
        return Err(Error::Domain(format!(
            "element {root} is outside the top level of size {}",
            x.level(n)
        )));
    }
    let levels: Vec<Vec<usize>> = (0..=n).map(|j| x.fibre_over(j, n, root)).collect();
    let steps = (0..n)
        .map(|j| {
            FinSetMap::from_raw(
                levels[j + 1].len(),
                levels[j]
                    .iter()
                    .map(|&a| levels[j + 1].binary_search(&x.step(j).apply(a)).unwrap())
                    .collect(),
            )
        })
        .collect();
    let sub = Arc::new(DeltaFObject {
        levels: levels.iter().map(Vec::len).collect(),
        steps,
    });
    let eta = levels
        .into_iter()
        .enumerate()
        .map(|(j, lv)| FinSetMap::from_raw(x.level(j), lv))
        .collect();
    let map =
        DeltaFMorphism::from_parts_unchecked(sub.clone(), x.clone(), (0..=n).collect(), eta);
    Ok((sub, map))
}

/// The cartesian lift `phi^* x -> x` of a monotone `phi: [m] -> [n]`.
pub fn cartesian_lift(x: &Arc<DeltaFObject>, phi: &[usize]) -> Result<DeltaFMorphism> {
    let n = x.length();
    if phi.is_empty() || phi.iter().any(|&v| v > n) || phi.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Domain(format!(
            "{phi:?} is not a monotone map into [{n}]"
        )));
    }
    let levels: Vec<usize> = phi.iter().map(|&i| x.level(i)).collect();
    let steps = phi.windows(2).map(|w| x.composite(w[0], w[1])).collect();
    let lifted = Arc::new(DeltaFObject { levels, steps });
    let eta = phi.iter().map(|&i| FinSetMap::identity(x.level(i))).collect();
    Ok(DeltaFMorphism::from_parts_unchecked(
        lifted,
        x.clone(),
        phi.to_vec(),
        eta,
    ))
}

/// The face map `d_i: [n-1] -> [n]` skipping `i`.
pub fn coface(n: usize, skip: usize) -> Vec<usize> {
    (0..=n).filter(|&j| j != skip).collect()
}

/// The face inclusion `d_i^* x -> x` over the coface skipping `i`.
pub fn face(x: &Arc<DeltaFObject>, skip: usize) -> Result<DeltaFMorphism> {
    let n = x.length();
    if n == 0 || skip > n {
        return Err(Error::Domain(format!("no face d_{skip} of an object of length {n}")));
    }
    cartesian_lift(x, &coface(n, skip))
}

/// One representative of every non-invertible surjection out of `x`, one
/// per collapsible set of levels.
pub fn degeneracies(x: &Arc<DeltaFObject>) -> Vec<DeltaFMorphism> {
    let n = x.length();
    let collapsible: Vec<usize> = (0..n).filter(|&i| x.step(i).is_bijective()).collect();
    let mut out = Vec::new();
    for mask in 1u64..(1u64 << collapsible.len()) {
        let collapsed: Vec<bool> = {
            let mut c = vec![false; n];
            for (bit, &i) in collapsible.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    c[i] = true;
                }
            }
            c
        };
        let mut phi = vec![0usize; n + 1];
        for i in 1..=n {
            phi[i] = phi[i - 1] + usize::from(!collapsed[i - 1]);
        }
        let k = phi[n];
        let last: Vec<usize> = (0..=k)
            .map(|j| (0..=n).rev().find(|&i| phi[i] == j).unwrap())
            .collect();
        let levels: Vec<usize> = last.iter().map(|&i| x.level(i)).collect();
        let steps = last.windows(2).map(|w| x.composite(w[0], w[1])).collect();
        let target = Arc::new(DeltaFObject { levels, steps });
        let eta = (0..=n).map(|i| x.composite(i, last[phi[i]])).collect();
        out.push(DeltaFMorphism::from_parts_unchecked(x.clone(), target, phi, eta));
    }
    out
}

/// Canonical representatives of every isomorphism class of weight at most
/// `max_weight`, sorted by weight, length and data.
pub fn enumerate_objects(max_weight: usize, level_trees_only: bool) -> Vec<Arc<DeltaFObject>> {
    let mut found = BTreeSet::new();
    let mut sizes = Vec::new();
    level_sequences(max_weight, level_trees_only, &mut sizes, &mut |levels| {
        let mut steps: Vec<FinSetMap> = Vec::with_capacity(levels.len());
        all_steps(levels, &mut steps, &mut |steps| {
            let x = Arc::new(DeltaFObject {
                levels: levels.to_vec(),
                steps: steps.to_vec(),
            });
            let (canon, _) = x.canonical_form();
            found.insert(Arc::unwrap_or_clone(canon));
        });
    });
    found.into_iter().map(Arc::new).collect()
}

fn level_sequences(
    budget: usize,
    level_trees_only: bool,
    current: &mut Vec<usize>,
    emit: &mut dyn FnMut(&[usize]),
) {
    if !current.is_empty() && (!level_trees_only || *current.last().unwrap() == 1) {
        emit(current);
    }
    let used: usize = current.iter().map(|&k| k.max(1)).sum();
    if used >= budget {
        return;
    }
    let floor = match current.last() {
        Some(&k) if k > 0 => 1,
        _ => 0,
    };
    for k in floor..=(budget - used) {
        current.push(k);
        level_sequences(budget, level_trees_only, current, emit);
        current.pop();
    }
}

fn all_steps(levels: &[usize], steps: &mut Vec<FinSetMap>, emit: &mut dyn FnMut(&[FinSetMap])) {
    let i = steps.len();
    if i + 1 == levels.len() {
        emit(steps);
        return;
    }
    for s in FinSetMap::all_maps(levels[i], levels[i + 1]) {
        steps.push(s);
        all_steps(levels, steps, emit);
        steps.pop();
    }
}

/// Canonical level trees of length at most `max_length` in which every level
/// has at most `max_width` elements, sorted like [`enumerate_objects`].
///
/// Generated as nested multisets, so no step maps are enumerated.
pub fn enumerate_level_trees(max_length: usize, max_width: usize) -> Vec<Arc<DeltaFObject>> {
    // nodes[h]: (code, widths) for a single element with h levels below it
    let mut nodes: Vec<Vec<(String, Vec<usize>)>> = vec![vec![(".".to_string(), vec![1])]];
    for h in 1..=max_length {
        let below = &nodes[h - 1];
        let mut found = Vec::new();
        let mut chosen = Vec::new();
        fn pick(
            below: &[(String, Vec<usize>)],
            start: usize,
            sum: &mut Vec<usize>,
            chosen: &mut Vec<usize>,
            max_width: usize,
            found: &mut Vec<(String, Vec<usize>)>,
        ) {
            let code: String = chosen.iter().map(|&i| below[i].0.as_str()).collect();
            let mut widths = vec![1];
            widths.extend_from_slice(sum);
            found.push((format!("({code})"), widths));
            for i in start..below.len() {
                let w = &below[i].1;
                if sum.iter().zip(w).all(|(a, b)| a + b <= max_width) {
                    for (a, b) in sum.iter_mut().zip(w) {
                        *a += b;
                    }
                    chosen.push(i);
                    pick(below, i, sum, chosen, max_width, found);
                    chosen.pop();
                    for (a, b) in sum.iter_mut().zip(w) {
                        *a -= b;
                    }
                }
            }
        }
        let mut sum = vec![0; h];
        pick(below, 0, &mut sum, &mut chosen, max_width, &mut found);
        nodes.push(found);
    }
    let mut out: Vec<Arc<DeltaFObject>> = nodes
        .iter()
        .enumerate()
        .flat_map(|(h, list)| list.iter().map(move |(code, _)| (h, code)))
        .map(|(h, code)| {
            let x = Arc::new(level_tree_from_code(h, code));
            x.canonical_form().0
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Decode a nested code of height `h` (`.` is an element of level 0,
/// `(..)` an element whose fibre is the listed children).
fn level_tree_from_code(h: usize, code: &str) -> DeltaFObject {
    let bytes = code.as_bytes();
    // parents[level] lists, for each element of that level, its image one level up
    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); h + 1];
    fn walk(bytes: &[u8], pos: &mut usize, level: usize, parent: usize, parents: &mut [Vec<usize>]) {
        let id = parents[level].len();
        parents[level].push(parent);
        if bytes[*pos] == b'.' {
            *pos += 1;
            return;
        }
        *pos += 1;
        while bytes[*pos] != b')' {
            walk(bytes, pos, level - 1, id, parents);
        }
        *pos += 1;
    }
    let mut pos = 0;
    walk(bytes, &mut pos, h, 0, &mut parents);
    let levels: Vec<usize> = parents.iter().map(Vec::len).collect();
    let steps = (0..h)
        .map(|i| FinSetMap::from_raw(levels[i + 1], parents[i].clone()))
        .collect();
    DeltaFObject { levels, steps }
}

/// JSON form of a level forest: level sizes plus 1-based step values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeltaFObjectJson {
    pub levels: Vec<usize>,
    pub steps: Vec<Vec<usize>>,
}

/// JSON form of a morphism. `phi` is 0-based over `[n]`; `eta` is 1-based.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeltaFMorphismJson {
    pub source: DeltaFObjectJson,
    pub target: DeltaFObjectJson,
    pub phi: Vec<usize>,
    pub eta: Vec<Vec<usize>>,
}

impl From<&DeltaFObject> for DeltaFObjectJson {
    fn from(x: &DeltaFObject) -> Self {
        DeltaFObjectJson {
            levels: x.levels.clone(),
            steps: x
                .steps
                .iter()
                .map(|s| s.values().iter().map(|v| v + 1).collect())
                .collect(),
        }
    }
}

fn one_based(codomain: usize, values: &[usize]) -> Result<FinSetMap> {
    let vals = values
        .iter()
        .map(|&v| {
            v.checked_sub(1)
                .ok_or_else(|| Error::Parse("map values are 1-based".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    FinSetMap::new(codomain, vals)
}

impl TryFrom<&DeltaFObjectJson> for DeltaFObject {
    type Error = Error;

    fn try_from(j: &DeltaFObjectJson) -> Result<Self> {
        if j.levels.is_empty() || j.steps.len() + 1 != j.levels.len() {
            return Err(Error::invalid(
                "level forest",
                format!("{} levels with {} steps", j.levels.len(), j.steps.len()),
            ));
        }
        let steps = j
            .steps
            .iter()
            .enumerate()
            .map(|(i, s)| {
                if s.len() != j.levels[i] {
                    return Err(Error::invalid(
                        "level forest",
                        format!("step {} lists {} values for a level of size {}", i + 1, s.len(), j.levels[i]),
                    ));
                }
                one_based(j.levels[i + 1], s)
            })
            .collect::<Result<Vec<_>>>()?;
        DeltaFObject::validate(j.levels.clone(), steps)
    }
}

impl From<&DeltaFMorphism> for DeltaFMorphismJson {
    fn from(m: &DeltaFMorphism) -> Self {
        DeltaFMorphismJson {
            source: m.source.as_ref().into(),
            target: m.target.as_ref().into(),
            phi: m.phi.clone(),
            eta: m
                .eta
                .iter()
                .map(|e| e.values().iter().map(|v| v + 1).collect())
                .collect(),
        }
    }
}

impl TryFrom<&DeltaFMorphismJson> for DeltaFMorphism {
    type Error = Error;

    fn try_from(j: &DeltaFMorphismJson) -> Result<Self> {
        let source = Arc::new(DeltaFObject::try_from(&j.source)?);
        let target = Arc::new(DeltaFObject::try_from(&j.target)?);
        if j.phi.len() != source.length() + 1 || j.eta.len() != source.length() + 1 {
            return Err(Error::invalid(
                "level-forest morphism",
                "phi and eta need one entry per source level",
            ));
        }
        let eta = j
            .eta
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let cod = *j
                    .phi
                    .get(i)
                    .and_then(|&p| target.levels.get(p))
                    .ok_or_else(|| Error::invalid("level-forest morphism", "phi out of range"))?;
                one_based(cod, e)
            })
            .collect::<Result<Vec<_>>>()?;
        DeltaFMorphism::validate(source, target, j.phi.clone(), eta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounded_level_trees_match_weight_enumeration() {
        let by_weight = enumerate_objects(7, true);
        for (len, width) in [(1, 3), (2, 2), (3, 2), (2, 3)] {
            let fast = enumerate_level_trees(len, width);
            let slow: Vec<_> = by_weight
                .iter()
                .filter(|x| x.length() <= len && x.levels().iter().all(|&k| k <= width))
                .cloned()
                .collect();
            // every bounded tree with weight <= 7 is found, and nothing else of that weight
            let fast_small: Vec<_> = fast.iter().filter(|x| x.weight() <= 7).cloned().collect();
            assert_eq!(fast_small, slow, "length {len}, width {width}");
        }
        assert_eq!(enumerate_level_trees(0, 5).len(), 1);
    }

    #[test]
    fn faces_are_cartesian_lifts_of_cofaces() {
        let x = Arc::new(DeltaFObject::parse_key("[2,2,1|1,2;1,1]").unwrap());
        for i in 0..=2 {
            let d = face(&x, i).unwrap();
            assert_eq!(d.phi(), &coface(2, i)[..]);
            assert!(d.classify().injective);
            assert!(DeltaFMorphism::validate(
                d.source().clone(),
                d.target().clone(),
                d.phi().to_vec(),
                d.eta().to_vec()
            )
            .is_ok());
        }
        assert!(face(&Arc::new(DeltaFObject::edge()), 0).is_err());
    }


    fn obj(key: &str) -> Arc<DeltaFObject> {
        Arc::new(DeltaFObject::parse_key(key).unwrap())
    }

    fn fmap(cod: usize, v: &[usize]) -> FinSetMap {
        FinSetMap::new(cod, v.to_vec()).unwrap()
    }

    /// Independent oracle: every monotone phi and every family of functions
    /// eta_i, filtered by the all-pairs definition.
    fn brute_force_hom(x: &Arc<DeltaFObject>, y: &Arc<DeltaFObject>) -> Vec<DeltaFMorphism> {
        let n = x.length();
        let mut out = Vec::new();
        for phi in monotone_maps(n, y.length()) {
            let options: Vec<Vec<FinSetMap>> = (0..=n)
                .map(|i| FinSetMap::all_maps(x.level(i), y.level(phi[i])).collect())
                .collect();
            if options.iter().any(Vec::is_empty) {
                continue;
            }
            let mut idx = vec![0; n + 1];
            'outer: loop {
                let eta: Vec<FinSetMap> = (0..=n).map(|i| options[i][idx[i]].clone()).collect();
                if DeltaFMorphism::find_defect_all_pairs(x, y, &phi, &eta).is_none() {
                    out.push(DeltaFMorphism::from_parts_unchecked(
                        x.clone(),
                        y.clone(),
                        phi.clone(),
                        eta,
                    ));
                }
                let mut k = 0;
                loop {
                    if k > n {
                        break 'outer;
                    }
                    idx[k] += 1;
                    if idx[k] < options[k].len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
            }
        }
        out.sort_by_cached_key(DeltaFMorphism::order_key);
        out
    }

    #[test]
    fn validation_examples() {
        let e = obj("[1]");
        assert!(DeltaFMorphism::find_defect(&e, &e, &[0], &[FinSetMap::identity(1)]).is_none());

        let c2 = obj("[2,1]");
        assert!(DeltaFMorphism::validate(e.clone(), c2.clone(), vec![1], vec![fmap(1, &[0])]).is_ok());

        let l1 = obj("[1,1]");
        let defect = DeltaFMorphism::find_defect(
            &l1,
            &c2,
            &[0, 1],
            &[fmap(2, &[0]), FinSetMap::identity(1)],
        );
        assert_eq!(defect, Some(MorphismDefect::NotPullback { from: 0, to: 1 }));
        // the fibre of 2 -> 1 over its point has two elements, not one
        assert!(!is_pullback_square(&fmap(2, &[0]), l1.step(0), c2.step(0), &FinSetMap::identity(1)).unwrap());
    }

    #[test]
    fn validation_reports_shape_and_injectivity() {
        let e = obj("[2]");
        let f = obj("[2]");
        assert_eq!(
            DeltaFMorphism::find_defect(&e, &f, &[0], &[fmap(2, &[1, 1])]),
            Some(MorphismDefect::NotInjective { level: 0 })
        );
        assert!(matches!(
            DeltaFMorphism::find_defect(&e, &f, &[1], &[fmap(2, &[0, 1])]),
            Some(MorphismDefect::Phi(_))
        ));
        let x = obj("[1,1]");
        let y = obj("[2,2|1,2]");
        // eta_1 ∘ f = g ∘ eta_0 fails
        assert_eq!(
            DeltaFMorphism::find_defect(&x, &y, &[0, 1], &[fmap(2, &[0]), fmap(2, &[1])]),
            Some(MorphismDefect::NotNatural { from: 0, to: 1 })
        );
    }

    #[test]
    fn classification_examples() {
        let e = obj("[1]");
        let c2 = obj("[2,1]");
        let id = DeltaFMorphism::identity(&c2).classify();
        assert!(id.injective && id.surjective && id.inert && id.active && id.cartesian);

        let edge_in = DeltaFMorphism::validate(e.clone(), c2.clone(), vec![0], vec![fmap(2, &[0])]).unwrap();
        let c = edge_in.classify();
        assert!(c.injective && c.inert && !c.active && !c.surjective && !c.cartesian);

        let l1 = obj("[1,1]");
        let hom = enumerate_hom(&l1, &e, DEFAULT_HOM_GUARD).unwrap();
        assert_eq!(hom.len(), 1);
        let c = hom[0].classify();
        assert!(c.surjective && c.active && c.cartesian && !c.inert && !c.injective);
    }

    #[test]
    fn hom_examples() {
        let e = obj("[1]");
        let c2 = obj("[2,1]");
        let id_only = enumerate_hom(&e, &e, DEFAULT_HOM_GUARD).unwrap();
        assert_eq!(id_only, vec![DeltaFMorphism::identity(&e)]);
        assert_eq!(enumerate_hom(&e, &c2, DEFAULT_HOM_GUARD).unwrap().len(), 3);
        let auts = enumerate_hom(&c2, &c2, DEFAULT_HOM_GUARD).unwrap();
        assert_eq!(auts.len(), 2);
        assert!(auts.iter().all(DeltaFMorphism::is_iso));
    }

    #[test]
    fn hom_guard_trips() {
        let x = obj("[3]");
        let y = obj("[4]");
        assert!(matches!(enumerate_hom(&x, &y, 5), Err(Error::Resource(_))));
        assert_eq!(enumerate_hom(&x, &y, 24).unwrap().len(), 24);
    }

    #[test]
    fn hom_matches_brute_force_up_to_weight_four() {
        let objs = enumerate_objects(4, false);
        for x in &objs {
            for y in &objs {
                let fast = enumerate_hom(x, y, DEFAULT_HOM_GUARD).unwrap();
                assert_eq!(fast, brute_force_hom(x, y), "{x} -> {y}");
            }
        }
    }

    #[test]
    fn consecutive_pullbacks_imply_all_pairs_up_to_weight_five() {
        let objs = enumerate_objects(5, false);
        let mut candidates = 0usize;
        for x in &objs {
            for y in &objs {
                let n = x.length();
                for phi in monotone_maps(n, y.length()) {
                    let options: Vec<Vec<FinSetMap>> = (0..=n)
                        .map(|i| FinSetMap::injections(x.level(i), y.level(phi[i])))
                        .collect();
                    if options.iter().any(Vec::is_empty) {
                        continue;
                    }
                    let mut idx = vec![0; n + 1];
                    'outer: loop {
                        let eta: Vec<FinSetMap> =
                            (0..=n).map(|i| options[i][idx[i]].clone()).collect();
                        candidates += 1;
                        assert_eq!(
                            DeltaFMorphism::find_defect(x, y, &phi, &eta).is_none(),
                            DeltaFMorphism::find_defect_all_pairs(x, y, &phi, &eta).is_none()
                        );
                        let mut k = 0;
                        loop {
                            if k > n {
                                break 'outer;
                            }
                            idx[k] += 1;
                            if idx[k] < options[k].len() {
                                break;
                            }
                            idx[k] = 0;
                            k += 1;
                        }
                    }
                }
            }
        }
        assert!(candidates > 10_000);
    }

    #[test]
    fn composition_unit_law_and_inert_closure() {
        let e = obj("[1]");
        let c2 = obj("[2,1]");
        let big = obj("[2,1,1]");
        let f = DeltaFMorphism::validate(e.clone(), c2.clone(), vec![1], vec![fmap(1, &[0])]).unwrap();
        assert_eq!(DeltaFMorphism::identity(&c2).after(&f).unwrap(), f);
        assert_eq!(f.after(&DeltaFMorphism::identity(&e)).unwrap(), f);
        let g = DeltaFMorphism::validate(
            c2.clone(),
            big.clone(),
            vec![0, 1],
            vec![FinSetMap::identity(2), FinSetMap::identity(1)],
        )
        .unwrap();
        assert!(f.classify().inert && g.classify().inert);
        assert!(g.after(&f).unwrap().classify().inert);
        assert!(f.after(&g).is_err());
    }

    #[test]
    fn factorize_trivial_cases() {
        let e = obj("[1]");
        let c2 = obj("[2,1]");
        let inert = DeltaFMorphism::validate(e.clone(), c2.clone(), vec![0], vec![fmap(2, &[1])]).unwrap();
        let (a, b) = inert.factorize(FactorizationSystem::ActiveInert);
        assert_eq!(a, DeltaFMorphism::identity(&e));
        assert_eq!(b, inert);

        let l1 = obj("[1,1]");
        let active = enumerate_hom(&l1, &e, DEFAULT_HOM_GUARD).unwrap().remove(0);
        let (a, b) = active.factorize(FactorizationSystem::ActiveInert);
        assert_eq!(a, active);
        assert_eq!(b, DeltaFMorphism::identity(&e));
    }

    #[test]
    fn factorization_recomposes_and_lands_in_the_right_classes() {
        let objs = enumerate_objects(5, false);
        for x in &objs {
            for y in &objs {
                for m in enumerate_hom(x, y, DEFAULT_HOM_GUARD).unwrap() {
                    let (a, i) = m.factorize(FactorizationSystem::ActiveInert);
                    assert!(a.classify().active && i.classify().inert);
                    assert_eq!(i.after(&a).unwrap(), m);
                    let (s, j) = m.factorize(FactorizationSystem::SurjectiveInjective);
                    assert!(s.classify().surjective && j.classify().injective);
                    assert_eq!(j.after(&s).unwrap(), m);
                }
            }
        }
    }

    #[test]
    fn classification_coherence() {
        let objs = enumerate_objects(5, false);
        for x in &objs {
            for y in &objs {
                for m in enumerate_hom(x, y, DEFAULT_HOM_GUARD).unwrap() {
                    let c = m.classify();
                    if (c.active && c.inert) || (c.surjective && c.injective) {
                        assert!(m.is_iso());
                    }
                }
            }
        }
    }

    #[test]
    fn elementary_examples() {
        let count = |key: &str| {
            let els = elementary_objects_over(&obj(key));
            let edges = els.iter().filter(|e| e.kind == ElementaryKind::Edge).count();
            let corollas: Vec<usize> = els
                .iter()
                .filter_map(|e| match e.kind {
                    ElementaryKind::Corolla { arity } => Some(arity),
                    _ => None,
                })
                .collect();
            for e in &els {
                assert!(e.map.classify().inert);
            }
            (edges, corollas)
        };
        assert_eq!(count("[1]"), (1, vec![]));
        assert_eq!(count("[3,1]"), (4, vec![3]));
        assert_eq!(count("[2,1,1]"), (4, vec![2, 1]));
    }

    #[test]
    fn restrict_to_fibre_examples() {
        let x = obj("[2,1,1]");
        let (sub, map) = restrict_to_fibre(&x, 0).unwrap();
        assert_eq!(*sub, *x);
        assert_eq!(map, DeltaFMorphism::identity(&x));

        let x = obj("[3]");
        let (sub, map) = restrict_to_fibre(&x, 2).unwrap();
        assert_eq!(*sub, DeltaFObject::edge());
        assert_eq!(map.eta_at(0).values(), &[2]);

        let x = obj("[3,2|1,1,2]");
        let (sub, _) = restrict_to_fibre(&x, 0).unwrap();
        assert_eq!(*sub, DeltaFObject::corolla(2));
        assert!(matches!(restrict_to_fibre(&x, 2), Err(Error::Domain(_))));
    }

    #[test]
    fn cartesian_lifts_are_universal_up_to_weight_five() {
        let objs = enumerate_objects(5, false);
        for x in &objs {
            for z in &objs {
                let hom = enumerate_hom(z, x, DEFAULT_HOM_GUARD).unwrap();
                for phi in monotone_maps(z.length(), x.length()) {
                    let lift = cartesian_lift(x, &phi).unwrap();
                    assert!(lift.classify().cartesian);
                    let over_phi: Vec<&DeltaFMorphism> =
                        hom.iter().filter(|m| m.phi() == phi.as_slice()).collect();
                    let over_id: Vec<DeltaFMorphism> =
                        enumerate_hom(z, lift.source(), DEFAULT_HOM_GUARD)
                            .unwrap()
                            .into_iter()
                            .filter(|m| m.phi().iter().enumerate().all(|(i, &v)| i == v))
                            .collect();
                    assert_eq!(over_phi.len(), over_id.len());
                    let mut images: Vec<DeltaFMorphism> =
                        over_id.iter().map(|u| lift.after(u).unwrap()).collect();
                    images.sort_by_cached_key(DeltaFMorphism::order_key);
                    let expected: Vec<DeltaFMorphism> = over_phi.into_iter().cloned().collect();
                    assert_eq!(images, expected);
                }
            }
        }
    }

    #[test]
    fn hom_counts_invariant_under_relabelling() {
        let objs = enumerate_objects(4, false);
        for x in &objs {
            // reverse every level to get an isomorphic, usually non-canonical copy
            let n = x.length();
            let rev = |i: usize| -> Vec<usize> { (0..x.level(i)).rev().collect() };
            let steps: Vec<FinSetMap> = (0..n)
                .map(|i| {
                    let r_in = rev(i);
                    let r_out = rev(i + 1);
                    FinSetMap::from_raw(
                        x.level(i + 1),
                        r_in.iter().map(|&a| r_out[x.step(i).apply(a)]).collect(),
                    )
                })
                .collect();
            let copy = Arc::new(DeltaFObject::validate(x.levels().to_vec(), steps).unwrap());
            assert_eq!(copy.canonical_form().0, *x);
            for y in &objs {
                assert_eq!(
                    enumerate_hom(x, y, DEFAULT_HOM_GUARD).unwrap().len(),
                    enumerate_hom(&copy, y, DEFAULT_HOM_GUARD).unwrap().len()
                );
                assert_eq!(
                    enumerate_hom(y, x, DEFAULT_HOM_GUARD).unwrap().len(),
                    enumerate_hom(y, &copy, DEFAULT_HOM_GUARD).unwrap().len()
                );
            }
        }
    }

    #[test]
    fn canonical_form_iso_is_valid() {
        for x in enumerate_objects(6, false) {
            let (canon, iso) = x.canonical_form();
            assert_eq!(*canon, *x);
            assert!(iso.is_iso());
        }
    }

    #[test]
    fn keys_round_trip() {
        for x in enumerate_objects(6, false) {
            assert_eq!(DeltaFObject::parse_key(&x.key()).unwrap(), *x);
        }
        assert!(DeltaFObject::parse_key("[3,2]").is_err());
        assert!(DeltaFObject::parse_key("[2,2|1,3]").is_err());
    }

    #[test]
    fn degeneracies_are_non_invertible_surjections() {
        let x = obj("[1,1,1]");
        let d = degeneracies(&x);
        assert_eq!(d.len(), 3);
        for s in &d {
            assert!(s.classify().surjective && !s.is_iso());
        }
        assert!(degeneracies(&obj("[2,1]")).is_empty());
    }

    #[test]
    fn json_round_trip() {
        let m = enumerate_hom(&obj("[1]"), &obj("[3,2|1,1,2]"), DEFAULT_HOM_GUARD).unwrap();
        for mor in m {
            let j = DeltaFMorphismJson::from(&mor);
            let text = serde_json::to_string(&j).unwrap();
            let back: DeltaFMorphismJson = serde_json::from_str(&text).unwrap();
            assert_eq!(DeltaFMorphism::try_from(&back).unwrap(), mor);
        }
    }
}
