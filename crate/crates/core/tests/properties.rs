use std::sync::{Arc, OnceLock};

use proptest::prelude::*;

use treeseg::deltaf::{enumerate_hom, enumerate_objects, DeltaFMorphism, DeltaFObject, FactorizationSystem};
use treeseg::omega::{enumerate_hom_omega, enumerate_trees, OmegaMorphism, PolyTree};
use treeseg::tau::{tau_morphism, tau_object};

const GUARD: usize = 1_000_000;

fn forests() -> &'static Vec<Arc<DeltaFObject>> {
    static CELL: OnceLock<Vec<Arc<DeltaFObject>>> = OnceLock::new();
    CELL.get_or_init(|| enumerate_objects(4, false))
}

fn level_trees() -> &'static Vec<Arc<DeltaFObject>> {
    static CELL: OnceLock<Vec<Arc<DeltaFObject>>> = OnceLock::new();
    CELL.get_or_init(|| enumerate_objects(4, true))
}

fn trees() -> &'static Vec<Arc<PolyTree>> {
    static CELL: OnceLock<Vec<Arc<PolyTree>>> = OnceLock::new();
    CELL.get_or_init(|| enumerate_trees(3, 2))
}

/// Pick the `k`-th morphism (mod the hom-set size) of a nonempty hom-set.
fn pick<T: Clone>(homs: &[T], k: usize) -> Option<T> {
    (!homs.is_empty()).then(|| homs[k % homs.len()].clone())
}

/// A chain of composable morphisms starting at `objs[start]`, each step
/// picked among all morphisms out of the current object.
fn forest_chain(objs: &[Arc<DeltaFObject>], start: usize, picks: &[usize]) -> Vec<DeltaFMorphism> {
    let mut at = objs[start % objs.len()].clone();
    let mut out = Vec::new();
    for &k in picks {
        let outgoing: Vec<DeltaFMorphism> = objs
            .iter()
            .flat_map(|y| enumerate_hom(&at, y, GUARD).unwrap())
            .collect();
        let m = pick(&outgoing, k).expect("identities exist");
        at = m.target().clone();
        out.push(m);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn forest_composition_is_associative_and_unital(
        start in 0usize..1000,
        picks in proptest::collection::vec(0usize..1000, 3),
    ) {
        {
            let ms = forest_chain(forests(), start, &picks);
            let (f, g, h) = (&ms[0], &ms[1], &ms[2]);
            let left = h.after(&g.after(f).unwrap()).unwrap();
            let right = h.after(g).unwrap().after(f).unwrap();
            prop_assert_eq!(&left, &right);
            prop_assert_eq!(&DeltaFMorphism::identity(f.target()).after(f).unwrap(), f);
            prop_assert_eq!(&f.after(&DeltaFMorphism::identity(f.source())).unwrap(), f);
        }
    }

    #[test]
    fn forest_factorizations_compose_back(
        start in 0usize..1000,
        picks in proptest::collection::vec(0usize..1000, 1),
    ) {
        {
            let ms = forest_chain(forests(), start, &picks);
            let m = &ms[0];
            let (a, i) = m.factorize(FactorizationSystem::ActiveInert);
            prop_assert_eq!(&i.after(&a).unwrap(), m);
            prop_assert!(a.classify().active && i.classify().inert);
            let (s, j) = m.factorize(FactorizationSystem::SurjectiveInjective);
            prop_assert_eq!(&j.after(&s).unwrap(), m);
            prop_assert!(s.classify().surjective && j.classify().injective);
        }
    }

    #[test]
    fn tau_preserves_composition(
        start in 0usize..1000,
        picks in proptest::collection::vec(0usize..1000, 2),
    ) {
        {
            let ms = forest_chain(level_trees(), start, &picks);
            let (f, g) = (&ms[0], &ms[1]);
            let composite = tau_morphism(&g.after(f).unwrap()).unwrap();
            let pieces = tau_morphism(g).unwrap().after(&tau_morphism(f).unwrap()).unwrap();
            prop_assert_eq!(composite.edge_map(), pieces.edge_map());
            let (before, after) = (f.classify(), tau_morphism(f).unwrap().classify());
            prop_assert!(!before.inert || after.inert);
            prop_assert!(!before.active || after.active);
            prop_assert!(!before.injective || after.injective);
            prop_assert!(!before.surjective || after.surjective);
        }
    }

    #[test]
    fn tau_counts_edges_and_vertices(i in 0usize..1000) {
        let x = &level_trees()[i % level_trees().len()];
        let t = tau_object(x).unwrap();
        let edges: usize = x.levels().iter().sum();
        let vertices: usize = x.levels()[1..].iter().sum();
        prop_assert_eq!(t.tree().edge_count(), edges);
        prop_assert_eq!(t.tree().vertex_count(), vertices);
    }

    #[test]
    fn tree_factorization_composes_back(i in 0usize..1000, j in 0usize..1000, k in 0usize..1000) {
        let ts = trees();
        let (s, t) = (&ts[i % ts.len()], &ts[j % ts.len()]);
        if let Some(m) = pick(&enumerate_hom_omega(s, t, GUARD).unwrap(), k) {
            let (a, inert) = m.factorize();
            prop_assert!(a.is_active() && inert.is_inert());
            prop_assert_eq!(&inert.after(&a).unwrap(), &m);
        }
    }

    #[test]
    fn tree_identities_are_units(i in 0usize..1000, j in 0usize..1000, k in 0usize..1000) {
        let ts = trees();
        let (s, t) = (&ts[i % ts.len()], &ts[j % ts.len()]);
        if let Some(m) = pick(&enumerate_hom_omega(s, t, GUARD).unwrap(), k) {
            prop_assert_eq!(&OmegaMorphism::identity(t).after(&m).unwrap(), &m);
            prop_assert_eq!(&m.after(&OmegaMorphism::identity(s)).unwrap(), &m);
        }
    }

    #[test]
    fn canonical_forms_are_isomorphic_and_stable(i in 0usize..1000) {
        let x = &forests()[i % forests().len()];
        let (c, iso) = x.canonical_form();
        prop_assert!(iso.is_iso());
        prop_assert_eq!(&c.canonical_form().0, &c);
        let t = &trees()[i % trees().len()];
        let (ct, iso) = t.canonical_form();
        prop_assert!(iso.is_iso());
        prop_assert_eq!(ct.key(), t.key());
    }

    #[test]
    fn tree_keys_round_trip(i in 0usize..1000) {
        let t = &trees()[i % trees().len()];
        prop_assert_eq!(PolyTree::parse_key(&t.key()).unwrap().key(), t.key());
        let x = &forests()[i % forests().len()];
        prop_assert_eq!(&DeltaFObject::parse_key(&x.key()).unwrap(), x.as_ref());
    }
}
