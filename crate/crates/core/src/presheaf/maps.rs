use std::collections::BTreeMap;

use crate::error::{Error, Result};

use super::SetPresheaf;

/// A natural transformation between presheaves on the same truncation,
/// one function per object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PresheafMap {
    pub components: Vec<Vec<u32>>,
}

impl PresheafMap {
    pub fn identity(p: &SetPresheaf) -> Self {
        PresheafMap {
            components: p.sizes().into_iter().map(|n| (0..n as u32).collect()).collect(),
        }
    }

    /// Check shapes and naturality: `φ_a ∘ P(m) = Q(m) ∘ φ_b` for `m: a -> b`.
    pub fn validate(&self, p: &SetPresheaf, q: &SetPresheaf) -> Result<()> {
        let t = p.trunc();
        if self.components.len() != t.len() {
            return Err(Error::Structural("map does not cover the truncation".into()));
        }
        for a in 0..t.len() {
            let c = &self.components[a];
            if c.len() != p.size(a) || c.iter().any(|&y| y as usize >= q.size(a)) {
                return Err(Error::Structural(format!("component at {} has the wrong shape", t.key(a))));
            }
        }
        for a in 0..t.len() {
            for b in 0..t.len() {
                for i in 0..t.homs(a, b).len() {
                    let pm = p.action(a, b, i);
                    let qm = q.action(a, b, i);
                    for x in 0..p.size(b) {
                        let left = self.components[a][pm[x] as usize];
                        let right = qm[self.components[b][x] as usize];
                        if left != right {
                            return Err(Error::invalid(
                                "presheaf map",
                                format!("not natural along {}", t.hom_key(a, b, i)),
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn after(&self, first: &PresheafMap) -> PresheafMap {
        PresheafMap {
            components: first
                .components
                .iter()
                .zip(&self.components)
                .map(|(f, g)| f.iter().map(|&x| g[x as usize]).collect())
                .collect(),
        }
    }

    pub fn is_injective(&self) -> bool {
        self.components.iter().all(|c| {
            let mut seen = c.clone();
            seen.sort_unstable();
            seen.windows(2).all(|w| w[0] != w[1])
        })
    }

    /// Objectwise bijective, given the sizes of the target.
    pub fn is_iso(&self, target_sizes: &[usize]) -> bool {
        self.is_injective()
            && self
                .components
                .iter()
                .zip(target_sizes)
                .all(|(c, &n)| c.len() == n)
    }
}

/// Backtracking state: partial components and an undo trail.
struct Search<'a> {
    p: &'a SetPresheaf,
    q: &'a SetPresheaf,
    assigned: Vec<Vec<u32>>,
    trail: Vec<(usize, usize)>,
}

const UNSET: u32 = u32::MAX;

impl Search<'_> {
    /// Assign `x ↦ y` at `b` and everything it forces along morphisms into
    /// `b`; returns false on a conflict.
    fn assign(&mut self, b: usize, x: usize, y: u32) -> bool {
        let t = self.p.trunc().clone();
        let mut stack = vec![(b, x, y)];
        while let Some((b, x, y)) = stack.pop() {
            let cur = self.assigned[b][x];
            if cur != UNSET {
                if cur != y {
                    return false;
                }
                continue;
            }
            self.assigned[b][x] = y;
            self.trail.push((b, x));
            for a in 0..t.len() {
                for i in 0..t.homs(a, b).len() {
                    let x2 = self.p.act(a, b, i, x);
                    let y2 = self.q.action(a, b, i)[y as usize];
                    let cur = self.assigned[a][x2];
                    if cur == UNSET {
                        stack.push((a, x2, y2));
                    } else if cur != y2 {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let (b, x) = self.trail.pop().unwrap();
            self.assigned[b][x] = UNSET;
        }
    }
}

/// All natural maps `P -> Q`, in lexicographic order of their components.
/// Elements are assigned from the largest objects down, and each choice is
/// pushed along every morphism into its object, so elements in the image
/// of an earlier choice are never branched on.
pub fn enumerate_maps(p: &SetPresheaf, q: &SetPresheaf, guard: usize) -> Result<Vec<PresheafMap>> {
    let t = p.trunc();
    if !super::same_truncation(t, q.trunc()) {
        return Err(Error::Domain("presheaves over different truncations".into()));
    }
    let mut objs: Vec<usize> = (0..t.len()).collect();
    objs.sort_by_key(|&a| (std::cmp::Reverse(t.object(a).size()), a));
    let order: Vec<(usize, usize)> = objs
        .iter()
        .flat_map(|&a| (0..p.size(a)).map(move |x| (a, x)))
        .collect();
    let mut s = Search {
        p,
        q,
        assigned: p.sizes().into_iter().map(|n| vec![UNSET; n]).collect(),
        trail: Vec::new(),
    };
    let mut found = Vec::new();
    search(&mut s, &order, 0, &mut found, guard)?;
    found.sort_by(|a, b| a.components.cmp(&b.components));
    Ok(found)
}

fn search(
    s: &mut Search<'_>,
    order: &[(usize, usize)],
    mut pos: usize,
    found: &mut Vec<PresheafMap>,
    guard: usize,
) -> Result<()> {
    while pos < order.len() && s.assigned[order[pos].0][order[pos].1] != UNSET {
        pos += 1;
    }
    if pos == order.len() {
        if found.len() >= guard {
            return Err(Error::Resource(format!("more than {guard} presheaf maps")));
        }
        found.push(PresheafMap {
            components: s.assigned.clone(),
        });
        return Ok(());
    }
    let (b, x) = order[pos];
    for y in 0..s.q.size(b) as u32 {
        let mark = s.trail.len();
        if s.assign(b, x, y) {
            search(s, order, pos + 1, found, guard)?;
        }
        s.undo(mark);
    }
    Ok(())
}

/// Whether `F` is local for `f: P -> Q`: precomposition with `f` is a
/// bijection `Hom(Q, F) -> Hom(P, F)`. Returns both hom-set sizes too.
pub fn is_local(
    f: &PresheafMap,
    p: &SetPresheaf,
    q: &SetPresheaf,
    target: &SetPresheaf,
    guard: usize,
) -> Result<(bool, usize, usize)> {
    let from_q = enumerate_maps(q, target, guard)?;
    let from_p = enumerate_maps(p, target, guard)?;
    let mut image = BTreeMap::new();
    for g in &from_q {
        image.insert(g.after(f).components, ());
    }
    let ok = image.len() == from_q.len() && image.len() == from_p.len();
    Ok((ok, from_q.len(), from_p.len()))
}
