use std::collections::HashMap;
use std::sync::Arc;

use crate::deltaf::{DeltaFMorphism, DeltaFObject};
use crate::error::{Error, Result};
use crate::finset::{is_pullback_square, FinSetMap};
use crate::omega::{OmegaMorphism, PolyTree};
use crate::report::{CheckReport, Tally};

use super::{Flavor, Morphism, Object, PresheafMap, SetPresheaf};

/// Largest tuple space encoded when checking a profile square.
const PROFILE_GUARD: usize = 10_000_000;

/// The underlying category of a Segal presheaf: objects `F(η)`, arrows the
/// values on the unary corolla, composition through the linear tree with
/// two vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnderlyingCategory {
    pub objects: usize,
    /// `(source, target)` of each arrow.
    pub arrows: Vec<(usize, usize)>,
    pub identities: Vec<usize>,
    /// `(f, g) -> g ∘ f`.
    pub compose: HashMap<(usize, usize), usize>,
}

impl UnderlyingCategory {
    /// Arrows with a two-sided inverse.
    pub fn is_iso(&self, f: usize) -> bool {
        let (a, b) = self.arrows[f];
        (0..self.arrows.len()).any(|g| {
            self.compose.get(&(f, g)) == Some(&self.identities[a]) && self.compose.get(&(g, f)) == Some(&self.identities[b])
        })
    }

    pub fn isomorphic(&self, a: usize, b: usize) -> bool {
        a == b || (0..self.arrows.len()).any(|f| self.arrows[f] == (a, b) && self.is_iso(f))
    }
}

/// The small pieces `point`, `arrow` and `two arrows` in either flavor, with
/// the maps between them.
struct Pieces {
    point: Object,
    source: Morphism,
    target: Morphism,
    degeneracy: Morphism,
    first: Morphism,
    second: Morphism,
    composite: Morphism,
}

fn pieces(flavor: Flavor) -> Result<Pieces> {
    Ok(match flavor {
        Flavor::Omega => {
            let p = Arc::new(PolyTree::eta());
            let l1 = Arc::new(PolyTree::linear(1));
            let l2 = Arc::new(PolyTree::linear(2));
            let m = |s: &Arc<PolyTree>, t: &Arc<PolyTree>, e: Vec<usize>| -> Result<Morphism> {
                Ok(Morphism::Tree(OmegaMorphism::from_edge_map(s, t, e)?))
            };
            Pieces {
                point: Object::Tree(p.clone()),
                source: m(&p, &l1, vec![1])?,
                target: m(&p, &l1, vec![0])?,
                degeneracy: m(&l1, &p, vec![0, 0])?,
                first: m(&l1, &l2, vec![1, 2])?,
                second: m(&l1, &l2, vec![0, 1])?,
                composite: m(&l1, &l2, vec![0, 2])?,
            }
        }
        _ => {
            let l = |n| Arc::new(DeltaFObject::linear(n));
            let (p, l1, l2) = (l(0), l(1), l(2));
            let m = |s: &Arc<DeltaFObject>, t: &Arc<DeltaFObject>, phi: Vec<usize>| -> Result<Morphism> {
                let eta = vec![FinSetMap::identity(1); phi.len()];
                Ok(Morphism::Forest(DeltaFMorphism::validate(s.clone(), t.clone(), phi, eta)?))
            };
            Pieces {
                point: Object::Forest(p.clone()),
                source: m(&p, &l1, vec![0])?,
                target: m(&p, &l1, vec![1])?,
                degeneracy: m(&l1, &p, vec![0, 0])?,
                first: m(&l1, &l2, vec![0, 1])?,
                second: m(&l1, &l2, vec![1, 2])?,
                composite: m(&l1, &l2, vec![0, 2])?,
            }
        }
    })
}

/// `F(m)` as a table, for an explicit morphism located in the truncation.
fn action_of(f: &SetPresheaf, m: &Morphism) -> Result<Vec<usize>> {
    let (a, b, i) = f.trunc().transport(m)?;
    Ok(f.action(a, b, i).iter().map(|&x| x as usize).collect())
}

fn index_of(f: &SetPresheaf, obj: &Object) -> Result<usize> {
    f.trunc()
        .find(obj)
        .map(|(a, _)| a)
        .ok_or_else(|| Error::Domain(format!("{obj} is outside the truncation")))
}

pub fn underlying_category(f: &SetPresheaf) -> Result<UnderlyingCategory> {
    let p = pieces(f.trunc().flavor())?;
    let s = action_of(f, &p.source)?;
    let t = action_of(f, &p.target)?;
    let objects = f.size(index_of(f, &p.point)?);
    let arrows: Vec<(usize, usize)> = s.iter().zip(&t).map(|(&a, &b)| (a, b)).collect();
    let identities = action_of(f, &p.degeneracy)?;
    let first = action_of(f, &p.first)?;
    let second = action_of(f, &p.second)?;
    let composite = action_of(f, &p.composite)?;
    let mut fillers: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for w in 0..first.len() {
        fillers.entry((first[w], second[w])).or_default().push(w);
    }
    let mut compose = HashMap::new();
    for (fa, &(_, b)) in arrows.iter().enumerate() {
        for (g, &(b2, _)) in arrows.iter().enumerate() {
            if b != b2 {
                continue;
            }
            match fillers.get(&(fa, g)).map(Vec::as_slice) {
                Some(&[w]) => {
                    compose.insert((fa, g), composite[w]);
                }
                other => {
                    return Err(Error::invalid(
                        "Segal presheaf",
                        format!("arrows {fa} and {g} have {} composites", other.map_or(0, <[usize]>::len)),
                    ))
                }
            }
        }
    }
    Ok(UnderlyingCategory {
        objects,
        arrows,
        identities,
        compose,
    })
}

/// Complete means the only isomorphisms of the underlying category are
/// identities. Failures name the offending arrows.
pub fn check_complete_discrete(f: &SetPresheaf) -> Result<CheckReport> {
    let cat = underlying_category(f)?;
    let t = f.trunc();
    let a1 = index_of(f, &pieces(t.flavor())?.source.target())?;
    let mut tally = Tally::default();
    for g in 0..cat.arrows.len() {
        let (a, b) = cat.arrows[g];
        let trivial = cat.identities[a] == g;
        tally.check(trivial || !cat.is_iso(g), || {
            format!("{} is an isomorphism {} -> {}", f.labels(a1)[g], a, b)
        });
    }
    let mut report = CheckReport::new("complete", &t.bound().entries());
    report.absorb(tally);
    Ok(report)
}

/// Whether a map of Segal presheaves is fully faithful and essentially
/// surjective.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FfEso {
    pub fully_faithful: bool,
    pub essentially_surjective: bool,
    pub failures: Vec<String>,
}

impl FfEso {
    pub fn holds(&self) -> bool {
        self.fully_faithful && self.essentially_surjective
    }
}

/// The corollas of the truncation with their profile maps (root first).
fn corollas(f: &SetPresheaf) -> Result<Vec<(usize, Vec<Morphism>)>> {
    let t = f.trunc();
    let mut out = Vec::new();
    match t.flavor() {
        Flavor::Omega => {
            let eta = Arc::new(PolyTree::eta());
            for n in 0..=t.bound().max_arity.unwrap_or(0) {
                let c = Arc::new(PolyTree::corolla(n));
                let Some((a, _)) = t.find(&Object::Tree(c.clone())) else { continue };
                let maps = (0..=n)
                    .map(|e| Ok(Morphism::Tree(OmegaMorphism::from_edge_map(&eta, &c, vec![e])?)))
                    .collect::<Result<Vec<_>>>()?;
                out.push((a, maps));
            }
        }
        _ => {
            let p = Arc::new(DeltaFObject::linear(0));
            for n in 0..t.bound().max_weight.unwrap_or(0) {
                let c = Arc::new(DeltaFObject::corolla(n));
                let Some((a, _)) = t.find(&Object::Forest(c.clone())) else { continue };
                let mut maps = vec![Morphism::Forest(DeltaFMorphism::validate(
                    p.clone(),
                    c.clone(),
                    vec![1],
                    vec![FinSetMap::identity(1)],
                )?)];
                for k in 0..n {
                    maps.push(Morphism::Forest(DeltaFMorphism::validate(
                        p.clone(),
                        c.clone(),
                        vec![0],
                        vec![FinSetMap::new(n, vec![k])?],
                    )?));
                }
                out.push((a, maps));
            }
        }
    }
    Ok(out)
}

/// Encode the profile of each element as a tuple in mixed radix.
fn profile_map(f: &SetPresheaf, maps: &[Morphism], colours: usize) -> Result<FinSetMap> {
    let tables = maps.iter().map(|m| action_of(f, m)).collect::<Result<Vec<_>>>()?;
    let space = colours
        .checked_pow(maps.len() as u32)
        .filter(|&s| s <= PROFILE_GUARD)
        .ok_or_else(|| Error::Resource("profile space too large".into()))?;
    let n = tables.first().map_or(0, Vec::len);
    let values = (0..n)
        .map(|x| tables.iter().fold(0, |acc, t| acc * colours + t[x]))
        .collect();
    FinSetMap::new(space, values)
}

fn power_map(phi: &[u32], cod: usize, k: usize) -> Result<FinSetMap> {
    let dom = phi.len();
    let space = dom.checked_pow(k as u32).filter(|&s| s <= PROFILE_GUARD);
    let space = space.ok_or_else(|| Error::Resource("profile space too large".into()))?;
    let values = (0..space)
        .map(|mut x| {
            let mut digits = vec![0; k];
            for d in digits.iter_mut().rev() {
                *d = x % dom;
                x /= dom;
            }
            digits.iter().fold(0, |acc, &d| acc * cod + phi[d] as usize)
        })
        .collect();
    FinSetMap::new(cod.pow(k as u32), values)
}

/// Fully faithful: each corolla square from values to profiles is a
/// pullback. Essentially surjective: every object of the target category is
/// isomorphic to one in the image.
pub fn check_ff_eso(phi: &PresheafMap, f: &SetPresheaf, g: &SetPresheaf) -> Result<FfEso> {
    if !super::same_truncation(f.trunc(), g.trunc()) {
        return Err(Error::Domain("presheaves over different truncations".into()));
    }
    phi.validate(f, g)?;
    let p = pieces(f.trunc().flavor())?;
    let e = index_of(f, &p.point)?;
    let (cf, cg) = (f.size(e), g.size(e));
    let mut failures = Vec::new();
    let mut ff = true;
    for (a, maps) in corollas(f)? {
        let top = FinSetMap::new(g.size(a), phi.components[a].iter().map(|&x| x as usize).collect())?;
        let left = profile_map(f, &maps, cf)?;
        let right = profile_map(g, &maps, cg)?;
        let bottom = power_map(&phi.components[e], cg, maps.len())?;
        if !is_pullback_square(&top, &left, &right, &bottom)? {
            ff = false;
            failures.push(format!("not fully faithful at {}", f.trunc().key(a)));
        }
    }
    let cat = underlying_category(g)?;
    let mut eso = true;
    for b in 0..cg {
        if !phi.components[e].iter().any(|&x| cat.isomorphic(x as usize, b)) {
            eso = false;
            failures.push(format!("{} is not in the essential image", g.labels(e)[b]));
        }
    }
    Ok(FfEso {
        fully_faithful: ff,
        essentially_surjective: eso,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presheaf::nerve::nerve;
    use crate::presheaf::operad::{associative, commutative, iso_pair, trivial};
    use crate::presheaf::{Bound, IndexTruncation, OperadMorphism};

    fn truncations() -> Vec<Arc<IndexTruncation>> {
        vec![
            Arc::new(IndexTruncation::new(Flavor::Omega, Bound::trees(3, 1)).unwrap()),
            Arc::new(IndexTruncation::new(Flavor::Deltaf1, Bound::forests(3)).unwrap()),
        ]
    }

    #[test]
    fn underlying_category_of_iso_pair() {
        for t in truncations() {
            let n = nerve(&Arc::new(iso_pair()), &t).unwrap();
            let cat = underlying_category(n.presheaf()).unwrap();
            assert_eq!(cat.objects, 2);
            assert_eq!(cat.arrows.len(), 4);
            assert!((0..4).all(|f| cat.is_iso(f)));
            assert!(cat.isomorphic(0, 1));
            assert!(!check_complete_discrete(n.presheaf()).unwrap().passed());
        }
    }

    #[test]
    fn one_colour_nerves_are_complete() {
        for t in truncations() {
            for o in [trivial(), commutative(1), associative(1)] {
                let n = nerve(&Arc::new(o), &t).unwrap();
                assert!(check_complete_discrete(n.presheaf()).unwrap().passed());
            }
        }
    }

    #[test]
    fn collapse_of_iso_pair_is_ff_and_eso() {
        for t in truncations() {
            let src = nerve(&Arc::new(iso_pair()), &t).unwrap();
            let tgt = nerve(&Arc::new(trivial()), &t).unwrap();
            let phi = OperadMorphism {
                colour_map: vec![0, 0],
                op_map: vec![0; 4],
            };
            let m = crate::presheaf::nerve_map(&phi, &src, &tgt).unwrap();
            let r = check_ff_eso(&m, src.presheaf(), tgt.presheaf()).unwrap();
            assert!(r.holds(), "{:?}", r.failures);
            // but not an isomorphism
            assert!(!m.is_iso(&tgt.presheaf().sizes()));
        }
    }

    #[test]
    fn inclusion_of_one_colour_is_ff_not_eso() {
        let t = Arc::new(IndexTruncation::new(Flavor::Omega, Bound::trees(2, 1)).unwrap());
        let two = crate::presheaf::ColouredOperad::from_fns(
            vec!["a".into(), "b".into()],
            vec![
                crate::presheaf::operad::Operation { name: "id_a".into(), inputs: vec![0], output: 0 },
                crate::presheaf::operad::Operation { name: "id_b".into(), inputs: vec![1], output: 1 },
            ],
            vec![0, 1],
            1,
            |p, _| Ok(p),
            |p, _, _| Ok(p),
        )
        .unwrap();
        let src = nerve(&Arc::new(trivial()), &t).unwrap();
        let tgt = nerve(&Arc::new(two), &t).unwrap();
        let phi = OperadMorphism {
            colour_map: vec![0],
            op_map: vec![0],
        };
        let m = crate::presheaf::nerve_map(&phi, &src, &tgt).unwrap();
        let r = check_ff_eso(&m, src.presheaf(), tgt.presheaf()).unwrap();
        assert!(r.fully_faithful);
        assert!(!r.essentially_surjective);
    }
}
