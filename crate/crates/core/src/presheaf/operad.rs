//! Finite coloured operads with symmetric actions, truncated at a maximal
//! arity, and a small corpus of examples.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finset::permutations;
use crate::omega::{PolyTree, Subtree};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Operation {
    pub name: String,
    pub inputs: Vec<usize>,
    pub output: usize,
}

impl Operation {
    pub fn arity(&self) -> usize {
        self.inputs.len()
    }
}

/// A coloured operad whose operations have arity at most `max_arity`.
/// Partial composites `p ∘_i q` are recorded whenever the result fits.
/// The symmetric action is on the right: input `k` of `p·σ` is input
/// `σ[k]` of `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColouredOperad {
    colours: Vec<String>,
    ops: Vec<Operation>,
    max_arity: usize,
    units: Vec<usize>,
    perms: Vec<Vec<Vec<usize>>>,
    perm_index: Vec<BTreeMap<Vec<usize>, usize>>,
    /// `actions[p][s]` is `p·σ` for `σ = perms[arity][s]`.
    actions: Vec<Vec<usize>>,
    composition: BTreeMap<(usize, usize, usize), usize>,
    by_profile: BTreeMap<(usize, usize), Vec<usize>>,
}

fn splice(p: &[usize], i: usize, q: &[usize]) -> Vec<usize> {
    let mut out = p[..i].to_vec();
    out.extend_from_slice(q);
    out.extend_from_slice(&p[i + 1..]);
    out
}

impl ColouredOperad {
    /// Build from tables and check every law within the arity bound.
    pub fn new(
        colours: Vec<String>,
        ops: Vec<Operation>,
        units: Vec<usize>,
        actions: Vec<Vec<usize>>,
        composition: BTreeMap<(usize, usize, usize), usize>,
        max_arity: usize,
    ) -> Result<Self> {
        let perms: Vec<Vec<Vec<usize>>> = (0..=max_arity).map(permutations).collect();
        let perm_index = perms
            .iter()
            .map(|ps| ps.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect())
            .collect();
        let mut by_profile: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (i, op) in ops.iter().enumerate() {
            by_profile.entry((op.output, op.arity())).or_default().push(i);
        }
        let o = ColouredOperad {
            colours,
            ops,
            max_arity,
            units,
            perms,
            perm_index,
            actions,
            composition,
            by_profile,
        };
        o.validate()?;
        Ok(o)
    }

    /// Build from closed-form action and composition.
    pub fn from_fns(
        colours: Vec<String>,
        ops: Vec<Operation>,
        units: Vec<usize>,
        max_arity: usize,
        act: impl Fn(usize, &[usize]) -> Result<usize>,
        compose: impl Fn(usize, usize, usize) -> Result<usize>,
    ) -> Result<Self> {
        let mut actions = Vec::with_capacity(ops.len());
        for (p, op) in ops.iter().enumerate() {
            if op.arity() > max_arity {
                return Err(Error::invalid("operad", format!("{} exceeds the arity bound", op.name)));
            }
            actions.push(
                permutations(op.arity())
                    .iter()
                    .map(|s| act(p, s))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        let mut composition = BTreeMap::new();
        for (p, op) in ops.iter().enumerate() {
            for (i, &c) in op.inputs.iter().enumerate() {
                for (q, oq) in ops.iter().enumerate() {
                    if oq.output == c && op.arity() + oq.arity() - 1 <= max_arity {
                        composition.insert((p, i, q), compose(p, i, q)?);
                    }
                }
            }
        }
        ColouredOperad::new(colours, ops, units, actions, composition, max_arity)
    }

    fn fail(&self, reason: String) -> Error {
        Error::invalid("operad", reason)
    }

    fn validate(&self) -> Result<()> {
        let nc = self.colours.len();
        let names: BTreeSet<&str> = self.ops.iter().map(|o| o.name.as_str()).collect();
        if names.len() != self.ops.len() {
            return Err(self.fail("operation names are not distinct".into()));
        }
        let colour_names: BTreeSet<&str> = self.colours.iter().map(String::as_str).collect();
        if colour_names.len() != nc {
            return Err(self.fail("colour names are not distinct".into()));
        }
        for op in &self.ops {
            if op.output >= nc || op.inputs.iter().any(|&c| c >= nc) {
                return Err(self.fail(format!("{} has a colour out of range", op.name)));
            }
            if op.arity() > self.max_arity {
                return Err(self.fail(format!("{} exceeds the arity bound", op.name)));
            }
        }
        if self.units.len() != nc {
            return Err(self.fail("one unit per colour is required".into()));
        }
        for (c, &u) in self.units.iter().enumerate() {
            let op = self.ops.get(u).ok_or_else(|| self.fail(format!("unit of colour {c} out of range")))?;
            if op.inputs != [c] || op.output != c {
                return Err(self.fail(format!("{} is not a unary operation on {}", op.name, self.colours[c])));
            }
        }
        // actions
        if self.actions.len() != self.ops.len() {
            return Err(self.fail("action table has the wrong length".into()));
        }
        for (p, op) in self.ops.iter().enumerate() {
            if self.actions[p].len() != self.perms[op.arity()].len() {
                return Err(self.fail(format!("{} has the wrong number of actions", op.name)));
            }
            if self.actions[p].iter().any(|&r| r >= self.ops.len()) {
                return Err(self.fail(format!("an action on {} is out of range", op.name)));
            }
        }
        for (p, op) in self.ops.iter().enumerate() {
            let perms = &self.perms[op.arity()];
            for (s, sigma) in perms.iter().enumerate() {
                let r = self.actions[p][s];
                let res = &self.ops[r];
                let expected: Vec<usize> = sigma.iter().map(|&k| op.inputs[k]).collect();
                if res.output != op.output || res.inputs != expected {
                    return Err(self.fail(format!("{}·{:?} has the wrong profile", op.name, sigma)));
                }
                if s == 0 && r != p {
                    return Err(self.fail(format!("the identity permutation moves {}", op.name)));
                }
                for tau in perms {
                    let st: Vec<usize> = tau.iter().map(|&k| sigma[k]).collect();
                    if self.act(r, tau) != self.act(p, &st) {
                        return Err(self.fail(format!("the action on {} is not a right action", op.name)));
                    }
                }
            }
        }
        // composition: domain and profiles
        for (&(p, i, q), &r) in &self.composition {
            if p >= self.ops.len() || q >= self.ops.len() {
                return Err(self.fail("composition entry out of range".into()));
            }
            let (op, oq) = (&self.ops[p], &self.ops[q]);
            if i >= op.arity() || op.inputs[i] != oq.output {
                return Err(self.fail(format!("{} ∘_{} {} is not composable", op.name, i, oq.name)));
            }
            let res = self.ops.get(r).ok_or_else(|| self.fail("composite out of range".into()))?;
            if res.output != op.output || res.inputs != splice(&op.inputs, i, &oq.inputs) {
                return Err(self.fail(format!("{} ∘_{} {} has the wrong profile", op.name, i, oq.name)));
            }
        }
        for (p, op) in self.ops.iter().enumerate() {
            for (i, &c) in op.inputs.iter().enumerate() {
                for (q, oq) in self.ops.iter().enumerate() {
                    if oq.output == c
                        && op.arity() + oq.arity() - 1 <= self.max_arity
                        && !self.composition.contains_key(&(p, i, q))
                    {
                        return Err(self.fail(format!("{} ∘_{} {} is missing", op.name, i, oq.name)));
                    }
                }
            }
        }
        // units
        for (p, op) in self.ops.iter().enumerate() {
            if self.compose(self.units[op.output], 0, p) != Some(p) {
                return Err(self.fail(format!("the unit does not act trivially on {} from above", op.name)));
            }
            for (i, &c) in op.inputs.iter().enumerate() {
                if self.compose(p, i, self.units[c]) != Some(p) {
                    return Err(self.fail(format!("the unit does not act trivially on {} at {i}", op.name)));
                }
            }
        }
        self.check_associativity()?;
        self.check_equivariance()
    }

    fn check_associativity(&self) -> Result<()> {
        for (&(p, i, q), &pq) in &self.composition {
            let (ap, aq) = (self.ops[p].arity(), self.ops[q].arity());
            for (r, or) in self.ops.iter().enumerate() {
                // r grafted into q
                for j in 0..aq {
                    if self.ops[q].inputs[j] != or.output {
                        continue;
                    }
                    let left = self.compose(pq, i + j, r);
                    let right = self.compose(q, j, r).and_then(|qr| self.compose(p, i, qr));
                    if let (Some(l), Some(rt)) = (left, right) {
                        if l != rt {
                            return Err(self.fail(format!(
                                "composition of {}, {}, {} is not associative",
                                self.ops[p].name, self.ops[q].name, or.name
                            )));
                        }
                    }
                }
                // r grafted into p beside q
                for j in 0..ap {
                    if j == i || self.ops[p].inputs[j] != or.output {
                        continue;
                    }
                    let shifted = if j > i { j + aq - 1 } else { j };
                    let left = self.compose(pq, shifted, r);
                    let moved = if j < i { i + or.arity() - 1 } else { i };
                    let right = self.compose(p, j, r).and_then(|pr| self.compose(pr, moved, q));
                    if let (Some(l), Some(rt)) = (left, right) {
                        if l != rt {
                            return Err(self.fail(format!(
                                "parallel composition of {}, {}, {} is not associative",
                                self.ops[p].name, self.ops[q].name, or.name
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn check_equivariance(&self) -> Result<()> {
        for (&(p, i, q), &pq) in &self.composition {
            let (ap, aq) = (self.ops[p].arity(), self.ops[q].arity());
            // (p·σ) ∘_i q = (p ∘_{σ[i]} q)·ρ
            for sigma in &self.perms[ap] {
                let ps = self.act(p, sigma);
                let Some(left) = self.compose(ps, i, q) else { continue };
                let si = sigma[i];
                let Some(base) = self.compose(p, si, q) else { continue };
                let mut rho = Vec::with_capacity(ap + aq - 1);
                let shift = |s: usize| if s < si { s } else { s + aq - 1 };
                for &s in &sigma[..i] {
                    rho.push(shift(s));
                }
                rho.extend(si..si + aq);
                for &s in &sigma[i + 1..] {
                    rho.push(shift(s));
                }
                if self.act(base, &rho) != left {
                    return Err(self.fail(format!(
                        "composition is not equivariant in {} at {i}",
                        self.ops[p].name
                    )));
                }
            }
            // p ∘_i (q·τ) = (p ∘_i q)·(id ⊕ τ ⊕ id)
            for tau in &self.perms[aq] {
                let qt = self.act(q, tau);
                let Some(left) = self.compose(p, i, qt) else { continue };
                let mut rho: Vec<usize> = (0..i).collect();
                rho.extend(tau.iter().map(|&t| i + t));
                rho.extend(i + aq..ap + aq - 1);
                if self.act(pq, &rho) != left {
                    return Err(self.fail(format!(
                        "composition is not equivariant in {} at {i}",
                        self.ops[q].name
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn colours(&self) -> &[String] {
        &self.colours
    }

    pub fn ops(&self) -> &[Operation] {
        &self.ops
    }

    pub fn op(&self, p: usize) -> &Operation {
        &self.ops[p]
    }

    pub fn max_arity(&self) -> usize {
        self.max_arity
    }

    pub fn unit(&self, c: usize) -> usize {
        self.units[c]
    }

    pub fn units(&self) -> &[usize] {
        &self.units
    }

    /// Operations with the given output colour and arity.
    pub fn ops_with(&self, output: usize, arity: usize) -> &[usize] {
        self.by_profile.get(&(output, arity)).map_or(&[], Vec::as_slice)
    }

    /// `p·σ`.
    pub fn act(&self, p: usize, sigma: &[usize]) -> usize {
        self.actions[p][self.perm_index[sigma.len()][sigma]]
    }

    /// `p ∘_i q`, if recorded.
    pub fn compose(&self, p: usize, i: usize, q: usize) -> Option<usize> {
        self.composition.get(&(p, i, q)).copied()
    }

    pub fn composition(&self) -> &BTreeMap<(usize, usize, usize), usize> {
        &self.composition
    }

    pub fn op_index(&self, name: &str) -> Option<usize> {
        self.ops.iter().position(|o| o.name == name)
    }

    /// The operations of arity at most `arity`, with the composites among
    /// them that stay within it.
    pub fn truncate(&self, arity: usize) -> Result<ColouredOperad> {
        let arity = arity.min(self.max_arity);
        let keep: Vec<usize> = (0..self.ops.len()).filter(|&p| self.ops[p].arity() <= arity).collect();
        let mut new_index = vec![usize::MAX; self.ops.len()];
        for (n, &p) in keep.iter().enumerate() {
            new_index[p] = n;
        }
        let ops = keep.iter().map(|&p| self.ops[p].clone()).collect();
        let actions = keep
            .iter()
            .map(|&p| self.actions[p].iter().map(|&r| new_index[r]).collect())
            .collect();
        let composition = self
            .composition
            .iter()
            .filter(|(&(p, _, q), &r)| {
                new_index[p] != usize::MAX && new_index[q] != usize::MAX && new_index[r] != usize::MAX
            })
            .map(|(&(p, i, q), &r)| ((new_index[p], i, new_index[q]), new_index[r]))
            .collect();
        let units = self.units.iter().map(|&u| new_index[u]).collect();
        ColouredOperad::new(self.colours.clone(), ops, units, actions, composition, arity)
    }

    pub fn to_json(&self) -> OperadJson {
        let name = |p: usize| self.ops[p].name.clone();
        let mut ops: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for op in &self.ops {
            let ins: Vec<&str> = op.inputs.iter().map(|&c| self.colours[c].as_str()).collect();
            let key = format!("{}->{}", ins.join(","), self.colours[op.output]);
            ops.entry(key).or_default().push(op.name.clone());
        }
        OperadJson {
            colours: self.colours.clone(),
            max_arity: self.max_arity,
            ops,
            units: self
                .units
                .iter()
                .enumerate()
                .map(|(c, &u)| (self.colours[c].clone(), name(u)))
                .collect(),
            actions: self
                .actions
                .iter()
                .enumerate()
                .filter(|(p, _)| self.ops[*p].arity() >= 2)
                .map(|(p, acts)| (name(p), acts.iter().map(|&r| name(r)).collect()))
                .collect(),
            composition: {
                let mut c: Vec<_> = self
                    .composition
                    .iter()
                    .map(|(&(p, i, q), &r)| (name(p), i, name(q), name(r)))
                    .collect();
                c.sort();
                c
            },
        }
    }

    pub fn from_json(j: &OperadJson) -> Result<Self> {
        let colour_index: BTreeMap<&str, usize> =
            j.colours.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
        let colour = |c: &str| {
            colour_index
                .get(c)
                .copied()
                .ok_or_else(|| Error::invalid("operad", format!("unknown colour `{c}`")))
        };
        let mut ops = Vec::new();
        for (profile, names) in &j.ops {
            let (ins, out) = profile
                .split_once("->")
                .ok_or_else(|| Error::Parse(format!("profile `{profile}` lacks `->`")))?;
            let inputs = if ins.is_empty() {
                Vec::new()
            } else {
                ins.split(',').map(colour).collect::<Result<Vec<_>>>()?
            };
            let output = colour(out)?;
            for n in names {
                ops.push(Operation {
                    name: n.clone(),
                    inputs: inputs.clone(),
                    output,
                });
            }
        }
        let op_index: BTreeMap<&str, usize> =
            ops.iter().enumerate().map(|(i, o)| (o.name.as_str(), i)).collect();
        let op = |n: &str| {
            op_index
                .get(n)
                .copied()
                .ok_or_else(|| Error::invalid("operad", format!("unknown operation `{n}`")))
        };
        let mut units = Vec::with_capacity(j.colours.len());
        for c in &j.colours {
            let u = j
                .units
                .get(c)
                .ok_or_else(|| Error::invalid("operad", format!("no unit for `{c}`")))?;
            units.push(op(u)?);
        }
        let mut actions = Vec::with_capacity(ops.len());
        for (p, o) in ops.iter().enumerate() {
            if o.arity() < 2 {
                actions.push(vec![p]);
                continue;
            }
            let acts = j
                .actions
                .get(&o.name)
                .ok_or_else(|| Error::invalid("operad", format!("no action for `{}`", o.name)))?;
            actions.push(acts.iter().map(|n| op(n)).collect::<Result<Vec<_>>>()?);
        }
        let mut composition = BTreeMap::new();
        for (p, i, q, r) in &j.composition {
            composition.insert((op(p)?, *i, op(q)?), op(r)?);
        }
        ColouredOperad::new(j.colours.clone(), ops, units, actions, composition, j.max_arity)
    }
}

/// Operations grouped by profile `in1,in2->out`; actions list `p·σ` over
/// the permutations in lexicographic order (only for arity ≥ 2);
/// composition entries are `[p, i, q, p ∘_i q]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperadJson {
    pub colours: Vec<String>,
    pub max_arity: usize,
    pub ops: BTreeMap<String, Vec<String>>,
    pub units: BTreeMap<String, String>,
    pub actions: BTreeMap<String, Vec<String>>,
    pub composition: Vec<(String, usize, String, String)>,
}

/// A colour map and an operation map preserving profiles, units, actions
/// and composition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperadMorphism {
    pub colour_map: Vec<usize>,
    pub op_map: Vec<usize>,
}

impl OperadMorphism {
    pub fn validate(&self, src: &ColouredOperad, tgt: &ColouredOperad) -> Result<()> {
        let fail = |r: String| Err(Error::invalid("operad morphism", r));
        if self.colour_map.len() != src.colours.len() || self.op_map.len() != src.ops.len() {
            return fail("maps do not cover the source".into());
        }
        if self.colour_map.iter().any(|&c| c >= tgt.colours.len()) || self.op_map.iter().any(|&p| p >= tgt.ops.len()) {
            return fail("maps leave the target".into());
        }
        for (p, op) in src.ops.iter().enumerate() {
            let img = &tgt.ops[self.op_map[p]];
            let ins: Vec<usize> = op.inputs.iter().map(|&c| self.colour_map[c]).collect();
            if img.inputs != ins || img.output != self.colour_map[op.output] {
                return fail(format!("{} changes profile", op.name));
            }
            for sigma in &src.perms[op.arity()] {
                if self.op_map[src.act(p, sigma)] != tgt.act(self.op_map[p], sigma) {
                    return fail(format!("{} does not commute with the action", op.name));
                }
            }
        }
        for (c, &u) in src.units.iter().enumerate() {
            if self.op_map[u] != tgt.units[self.colour_map[c]] {
                return fail(format!("the unit of {} is not preserved", src.colours[c]));
            }
        }
        for (&(p, i, q), &r) in &src.composition {
            match tgt.compose(self.op_map[p], i, self.op_map[q]) {
                Some(s) if s == self.op_map[r] => {}
                _ => {
                    return fail(format!(
                        "{} ∘_{i} {} is not preserved",
                        src.ops[p].name, src.ops[q].name
                    ))
                }
            }
        }
        Ok(())
    }

    pub fn is_bijective(&self, tgt: &ColouredOperad) -> bool {
        let cs: BTreeSet<usize> = self.colour_map.iter().copied().collect();
        let ps: BTreeSet<usize> = self.op_map.iter().copied().collect();
        cs.len() == self.colour_map.len()
            && cs.len() == tgt.colours.len()
            && ps.len() == self.op_map.len()
            && ps.len() == tgt.ops.len()
    }

    /// A valid bijective morphism whose inverse is then automatically one.
    pub fn is_iso(&self, src: &ColouredOperad, tgt: &ColouredOperad) -> bool {
        self.is_bijective(tgt) && self.validate(src, tgt).is_ok() && src.max_arity == tgt.max_arity
    }
}

/// One colour and only its identity.
pub fn trivial() -> ColouredOperad {
    ColouredOperad::from_fns(
        vec!["*".into()],
        vec![Operation {
            name: "id".into(),
            inputs: vec![0],
            output: 0,
        }],
        vec![0],
        1,
        |p, _| Ok(p),
        |_, _, _| Ok(0),
    )
    .expect("trivial operad")
}

/// One colour and a single operation of each arity up to `max_arity`.
pub fn commutative(max_arity: usize) -> ColouredOperad {
    let ops = (0..=max_arity)
        .map(|n| Operation {
            name: format!("m{n}"),
            inputs: vec![0; n],
            output: 0,
        })
        .collect();
    ColouredOperad::from_fns(
        vec!["*".into()],
        ops,
        vec![1],
        max_arity,
        |p, _| Ok(p),
        |p, _, q| Ok(p + q - 1),
    )
    .expect("commutative operad")
}

/// One colour; the operations of arity `n` are the orders in which `n`
/// inputs can be multiplied, written as words in the input positions.
pub fn associative(max_arity: usize) -> ColouredOperad {
    let mut words: Vec<Vec<usize>> = Vec::new();
    for n in 0..=max_arity {
        words.extend(permutations(n));
    }
    let index: BTreeMap<Vec<usize>, usize> =
        words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
    let ops = words
        .iter()
        .map(|w| Operation {
            name: format!("w{}", w.iter().map(|d| d.to_string()).collect::<String>()),
            inputs: vec![0; w.len()],
            output: 0,
        })
        .collect();
    let unit = index[&vec![0]];
    let act = |p: usize, sigma: &[usize]| {
        let mut inv = vec![0; sigma.len()];
        for (k, &s) in sigma.iter().enumerate() {
            inv[s] = k;
        }
        Ok(index[&words[p].iter().map(|&j| inv[j]).collect::<Vec<_>>()])
    };
    let compose = |p: usize, i: usize, q: usize| {
        let (w, v) = (&words[p], &words[q]);
        let shift = |j: usize| if j < i { j } else { j + v.len() - 1 };
        let mut out = Vec::with_capacity(w.len() + v.len() - 1);
        for &j in w {
            if j == i {
                out.extend(v.iter().map(|&l| i + l));
            } else {
                out.push(shift(j));
            }
        }
        Ok(index[&out])
    };
    ColouredOperad::from_fns(vec!["*".into()], ops, vec![unit], max_arity, act, compose)
        .expect("associative operad")
}

/// Two colours with mutually inverse unary operations between them.
pub fn iso_pair() -> ColouredOperad {
    let op = |name: &str, i: usize, o: usize| Operation {
        name: name.into(),
        inputs: vec![i],
        output: o,
    };
    let ops = vec![op("id_a", 0, 0), op("id_b", 1, 1), op("f", 0, 1), op("g", 1, 0)];
    let compose = |p: usize, _: usize, q: usize| {
        let r = match (p, q) {
            (0, 0) | (0, 3) | (1, 1) | (1, 2) => q,
            (2, 0) | (3, 1) => p,
            (2, 3) => 1,
            (3, 2) => 0,
            _ => return Err(Error::Structural("not composable".into())),
        };
        Ok(r)
    };
    ColouredOperad::from_fns(
        vec!["a".into(), "b".into()],
        ops,
        vec![0, 1],
        1,
        |p, _| Ok(p),
        compose,
    )
    .expect("iso operad")
}

/// The free operad on a tree: colours are its edges, operations are its
/// subtrees with an ordering of their leaves.
pub fn free(tree: &Arc<PolyTree>) -> Result<ColouredOperad> {
    let colours = tree.edge_names().to_vec();
    let mut shapes: Vec<(Subtree, Vec<usize>)> = Vec::new();
    for s in tree.subtrees() {
        let leaves = tree.subtree_leaves(&s);
        for order in permutations(leaves.len()) {
            shapes.push((s.clone(), order.iter().map(|&k| leaves[k]).collect()));
        }
    }
    shapes.sort_by(|a, b| (a.1.len(), &a.0, &a.1).cmp(&(b.1.len(), &b.0, &b.1)));
    let index: BTreeMap<(Subtree, Vec<usize>), usize> =
        shapes.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    let max_arity = shapes.iter().map(|s| s.1.len()).max().unwrap_or(1).max(1);
    let ops = shapes
        .iter()
        .map(|(s, leaves)| {
            let vs: Vec<String> = s.vertices.iter().map(|v| v.to_string()).collect();
            let ls: Vec<&str> = leaves.iter().map(|&e| colours[e].as_str()).collect();
            Operation {
                name: format!("{}{{{}}}[{}]", colours[s.root], vs.join(","), ls.join(",")),
                inputs: leaves.clone(),
                output: s.root,
            }
        })
        .collect();
    let units = (0..tree.edge_count())
        .map(|e| index[&(Subtree::trivial(e), vec![e])])
        .collect();
    let act = |p: usize, sigma: &[usize]| {
        let (s, leaves) = &shapes[p];
        Ok(index[&(s.clone(), sigma.iter().map(|&k| leaves[k]).collect())])
    };
    let compose = |p: usize, i: usize, q: usize| {
        let (s, l) = &shapes[p];
        let (t, m) = &shapes[q];
        let mut vertices: Vec<usize> = s.vertices.iter().chain(&t.vertices).copied().collect();
        vertices.sort_unstable();
        let sub = Subtree {
            root: s.root,
            vertices,
        };
        index
            .get(&(sub, splice(l, i, m)))
            .copied()
            .ok_or_else(|| Error::Structural("grafted subtree missing".into()))
    };
    ColouredOperad::from_fns(colours, ops, units, max_arity, act, compose)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::omega::enumerate_trees;

    #[test]
    fn corpus_operads_satisfy_the_laws() {
        assert_eq!(trivial().ops().len(), 1);
        assert_eq!(commutative(4).ops().len(), 5);
        assert_eq!(associative(4).ops().len(), 1 + 1 + 2 + 6 + 24);
        assert_eq!(iso_pair().ops().len(), 4);
        for t in enumerate_trees(3, 2) {
            free(&t).unwrap();
        }
    }

    #[test]
    fn associative_composition_concatenates_words() {
        let o = associative(3);
        let p = o.op_index("w10").unwrap();
        let q = o.op_index("w01").unwrap();
        let r = o.compose(p, 0, q).unwrap();
        assert_eq!(o.op(r).name, "w201");
        let swapped = o.act(p, &[1, 0]);
        assert_eq!(o.op(swapped).name, "w01");
    }

    #[test]
    fn broken_tables_are_rejected() {
        let o = commutative(2);
        let mut j = o.to_json();
        let last = j.composition.len() - 1;
        j.composition[last].3 = "m0".into();
        assert!(ColouredOperad::from_json(&j).is_err());
        let mut j = associative(2).to_json();
        j.actions.insert("w01".into(), vec!["w01".into(), "w01".into()]);
        assert!(ColouredOperad::from_json(&j).is_err());
    }

    #[test]
    fn json_round_trip() {
        for o in [trivial(), commutative(3), associative(3), iso_pair()] {
            let j = o.to_json();
            let text = serde_json::to_string(&j).unwrap();
            let back = ColouredOperad::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
            assert_eq!(back.to_json(), j);
        }
    }

    #[test]
    fn truncation_and_morphisms() {
        let o = associative(4);
        let t = o.truncate(2).unwrap();
        assert_eq!(t.ops().len(), 4);
        let inclusion = OperadMorphism {
            colour_map: vec![0],
            op_map: (0..4).map(|p| o.op_index(&t.op(p).name).unwrap()).collect(),
        };
        inclusion.validate(&t, &o).unwrap();
        assert!(!inclusion.is_bijective(&o));
        let collapse = OperadMorphism {
            colour_map: vec![0, 0],
            op_map: vec![0; 4],
        };
        collapse.validate(&iso_pair(), &trivial()).unwrap();
        assert!(!collapse.is_iso(&iso_pair(), &trivial()));
        let to_comm = OperadMorphism {
            colour_map: vec![0],
            op_map: (0..o.ops().len()).map(|p| o.op(p).arity()).collect(),
        };
        to_comm.validate(&o, &commutative(4)).unwrap();
    }
}
