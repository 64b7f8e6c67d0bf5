use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::deltaf::{self, restrict_to_fibre};
use crate::error::{Error, Result};
use crate::report::{CheckReport, Tally};

use super::{Flavor, Morphism, SetPresheaf};

/// Cap on the number of compatible families counted for one limit.
pub const LIMIT_GUARD: usize = 10_000_000;

/// Outcome of comparing `F(x)` with a limit over part of the slice over `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegalReport {
    pub value: usize,
    pub limit: usize,
    pub injective: bool,
}

impl SegalReport {
    pub fn bijective(&self) -> bool {
        self.injective && self.value == self.limit
    }
}

/// Compare `F(x)` with the limit of `F` over the full subcategory of the
/// slice over `x` spanned by `nodes`.
pub fn compare_with_limit(
    f: &SetPresheaf,
    x: usize,
    nodes: &[(usize, usize)],
    inert_only: bool,
) -> Result<SegalReport> {
    let t = f.trunc();
    let arrows = t.slice_arrows(x, nodes, inert_only);
    // assign larger objects first so smaller ones are forced
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by_key(|&p| (std::cmp::Reverse(t.object(nodes[p].0).size()), p));
    let mut values = vec![usize::MAX; nodes.len()];
    let mut count = 0usize;
    count_families(f, nodes, &arrows, &order, 0, &mut values, &mut count)?;
    let mut seen = BTreeSet::new();
    for v in 0..f.size(x) {
        let tuple: Vec<usize> = nodes.iter().map(|&(a, i)| f.act(a, x, i, v)).collect();
        seen.insert(tuple);
    }
    Ok(SegalReport {
        value: f.size(x),
        limit: count,
        injective: seen.len() == f.size(x),
    })
}

fn count_families(
    f: &SetPresheaf,
    nodes: &[(usize, usize)],
    arrows: &[(usize, usize, usize)],
    order: &[usize],
    pos: usize,
    values: &mut [usize],
    count: &mut usize,
) -> Result<()> {
    if pos == order.len() {
        *count += 1;
        if *count > LIMIT_GUARD {
            return Err(Error::Resource(format!("limit has more than {LIMIT_GUARD} elements")));
        }
        return Ok(());
    }
    let p = order[pos];
    let a = nodes[p].0;
    let forced = arrows
        .iter()
        .find(|&&(src, tgt, _)| src == p && values[tgt] != usize::MAX)
        .map(|&(_, tgt, j)| f.act(a, nodes[tgt].0, j, values[tgt]));
    let candidates: Vec<usize> = match forced {
        Some(v) => vec![v],
        None => (0..f.size(a)).collect(),
    };
    for v in candidates {
        values[p] = v;
        let consistent = arrows.iter().all(|&(src, tgt, j)| {
            if src != p && tgt != p {
                return true;
            }
            let (vs, vt) = (values[src], values[tgt]);
            vs == usize::MAX || vt == usize::MAX || f.act(nodes[src].0, nodes[tgt].0, j, vt) == vs
        });
        if consistent {
            count_families(f, nodes, arrows, order, pos + 1, values, count)?;
        }
    }
    values[p] = usize::MAX;
    Ok(())
}

/// Check the elementary limit condition at every object: `F(x)` is the
/// limit of `F` over the elementary objects over `x`. This is the Segal
/// condition for trees and for level trees.
pub fn check_segal_limit(f: &SetPresheaf) -> Result<CheckReport> {
    let t = f.trunc();
    let name = format!("segal-{}", t.flavor());
    let tallies = (0..t.len())
        .into_par_iter()
        .map(|x| -> Result<Tally> {
            let mut tally = Tally::default();
            let r = compare_with_limit(f, x, &t.elementary_over(x), true)?;
            tally.check(r.bijective(), || {
                format!("{}: {} values against a limit of {}{}", t.key(x), r.value, r.limit, injectivity(&r))
            });
            Ok(tally)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CheckReport::new(name, &t.bound().entries()).absorb_all(tallies))
}

fn injectivity(r: &SegalReport) -> &'static str {
    if r.injective {
        ""
    } else {
        " (not injective)"
    }
}

pub fn check_segal_omega(f: &SetPresheaf) -> Result<CheckReport> {
    if f.trunc().flavor() != Flavor::Omega {
        return Err(Error::Domain("expected a presheaf on trees".into()));
    }
    check_segal_limit(f)
}

/// Pieces of `x` along faces of `[n]`, as nodes over `x`.
fn lifts(f: &SetPresheaf, x: usize, faces: &[Vec<usize>]) -> Result<Vec<(usize, usize)>> {
    let t = f.trunc();
    let obj = t.object(x).as_forest().expect("forest truncation");
    faces
        .iter()
        .map(|phi| {
            let m = deltaf::cartesian_lift(obj, phi)?;
            let (a, _, i) = t.transport(&Morphism::Forest(m))?;
            Ok((a, i))
        })
        .collect()
}

/// The three conditions for level forests, each as a comparison with a
/// limit; `None` where a condition says nothing about `x`.
pub fn segal_conditions_deltaf(f: &SetPresheaf, x: usize) -> Result<[Option<SegalReport>; 3]> {
    let t = f.trunc();
    let obj = t.object(x).as_forest().expect("forest truncation").clone();
    let n = obj.length();
    let mut out = [None, None, None];
    if n >= 2 {
        let mut faces: Vec<Vec<usize>> = (1..=n).map(|i| vec![i - 1, i]).collect();
        faces.extend((1..n).map(|i| vec![i]));
        let nodes = lifts(f, x, &faces)?;
        out[0] = Some(compare_with_limit(f, x, &nodes, false)?);
    }
    if n == 1 {
        let mut nodes = Vec::new();
        for r in 0..obj.level(1) {
            let (_, m) = restrict_to_fibre(&obj, r)?;
            let (a, _, i) = t.transport(&Morphism::Forest(m))?;
            nodes.push((a, i));
        }
        out[1] = Some(compare_with_limit(f, x, &nodes, false)?);
    }
    if n == 0 {
        out[2] = Some(compare_with_limit(f, x, &t.elementary_over(x), false)?);
    }
    Ok(out)
}

/// Conditions (1)-(3) and the elementary limit form, at every object.
pub fn check_segal_deltaf(f: &SetPresheaf) -> Result<CheckReport> {
    let t = f.trunc();
    match t.flavor() {
        Flavor::Deltaf => {}
        Flavor::Deltaf1 => return check_segal_limit(f),
        Flavor::Omega => return Err(Error::Domain("expected a presheaf on level forests".into())),
    }
    let tallies = (0..t.len())
        .into_par_iter()
        .map(|x| -> Result<Tally> {
            let mut tally = Tally::default();
            for (c, r) in segal_conditions_deltaf(f, x)?.iter().enumerate() {
                if let Some(r) = r {
                    tally.check(r.bijective(), || {
                        format!(
                            "{}: condition ({}) compares {} values with {}{}",
                            t.key(x),
                            c + 1,
                            r.value,
                            r.limit,
                            injectivity(r)
                        )
                    });
                }
            }
            let r = compare_with_limit(f, x, &t.elementary_over(x), true)?;
            tally.check(r.bijective(), || {
                format!("{}: {} values against an elementary limit of {}{}", t.key(x), r.value, r.limit, injectivity(&r))
            });
            Ok(tally)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CheckReport::new("segal-deltaf", &t.bound().entries()).absorb_all(tallies))
}

/// Dispatch on the flavor of the truncation.
pub fn check_segal(f: &SetPresheaf) -> Result<CheckReport> {
    match f.trunc().flavor() {
        Flavor::Omega => check_segal_omega(f),
        _ => check_segal_deltaf(f),
    }
}

/// `F([n], f) -> ∏ F([n], f_i)` over the trees of the forest is bijective.
pub fn istar_product_check(f: &SetPresheaf) -> Result<CheckReport> {
    let t = f.trunc();
    if t.flavor() == Flavor::Omega {
        return Err(Error::Domain("expected a presheaf on level forests".into()));
    }
    let mut report = CheckReport::new("istar-product", &t.bound().entries());
    for x in 0..t.len() {
        let obj = t.object(x).as_forest().unwrap().clone();
        let mut nodes = Vec::new();
        for r in 0..obj.level(obj.length()) {
            let (_, m) = restrict_to_fibre(&obj, r)?;
            let (a, _, i) = t.transport(&Morphism::Forest(m))?;
            nodes.push((a, i));
        }
        let r = compare_with_limit(f, x, &nodes, false)?;
        let mut tally = Tally::default();
        tally.check(r.bijective(), || {
            format!("{}: {} values against a product of {}{}", t.key(x), r.value, r.limit, injectivity(&r))
        });
        report.absorb(tally);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::presheaf::{Bound, IndexTruncation};

    #[test]
    fn terminal_presheaves_are_segal() {
        for (flavor, bound) in [
            (Flavor::Omega, Bound::trees(3, 2)),
            (Flavor::Deltaf, Bound::forests(4)),
            (Flavor::Deltaf1, Bound::forests(4)),
        ] {
            let t = Arc::new(IndexTruncation::new(flavor, bound).unwrap());
            let r = check_segal(&SetPresheaf::terminal(&t)).unwrap();
            assert!(r.passed(), "{flavor}: {:?}", r.failures);
            assert!(r.instances as usize >= t.len());
        }
    }

    #[test]
    fn representables_of_trees_are_segal() {
        // a representable is the nerve of the free operad on its tree
        let t = Arc::new(IndexTruncation::new(Flavor::Omega, Bound::trees(3, 2)).unwrap());
        for x in 0..t.len() {
            let y = SetPresheaf::representable(&t, x).unwrap();
            let r = check_segal_omega(&y).unwrap();
            assert!(r.passed(), "{}: {:?}", t.key(x), r.failures);
        }
    }

    #[test]
    fn empty_presheaf_and_the_empty_forest() {
        let t = Arc::new(IndexTruncation::new(Flavor::Omega, Bound::trees(2, 2)).unwrap());
        assert!(check_segal_omega(&SetPresheaf::empty(&t)).unwrap().passed());
        // the limit over the empty forest is a point
        let t = Arc::new(IndexTruncation::new(Flavor::Deltaf, Bound::forests(3)).unwrap());
        let r = check_segal_deltaf(&SetPresheaf::empty(&t)).unwrap();
        assert!(!r.passed());
        // only the empty forests fail
        let empty = |f: &String| f.split(':').next().unwrap().trim_matches(['[', ']']).split(',').all(|l| l == "0");
        assert!(r.failures.iter().all(empty), "{:?}", r.failures);
    }
}
