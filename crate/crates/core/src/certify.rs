//! Exhaustive certification suites and the bounded runner behind
//! `treeseg certify`.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::deltaf::{self, enumerate_hom, enumerate_objects, DeltaFMorphism, FactorizationSystem};
use crate::error::{Error, Result};
use crate::omega::{self, enumerate_hom_omega, enumerate_polynomial_maps, enumerate_trees, free_monad, OmegaMorphism, PolyTree};
use crate::presheaf::operad::{self, ColouredOperad, OperadMorphism};
use crate::presheaf::{
    check_complete_discrete, check_ff_eso, check_segal, horn, is_local, nerve, nerve_map, segal_core, segal_round_trip,
    subtree_segal_core, tau_pullback_comparison, Bound, Flavor, IndexTruncation, PresheafMap, SetPresheaf,
};
use crate::report::{CheckReport, Tally};
use crate::tau;

const GUARD: usize = omega::DEFAULT_HOM_GUARD;

/// Cap on presheaf maps enumerated by a locality check.
pub const MAP_GUARD: usize = 100_000;

fn err_tally(e: &Error) -> Tally {
    let mut t = Tally::default();
    t.check(false, || e.to_string());
    t
}

/// A morphism of trees is determined by its edge map: distinct polynomial
/// maps `S -> T̄` have distinct edge maps, and the edge map rebuilds the
/// vertex assignment.
pub fn check_edge_determination(max_vertices: usize, max_arity: usize) -> CheckReport {
    let report = CheckReport::new("determination", &[("max_vertices", max_vertices), ("max_arity", max_arity)]);
    let trees = enumerate_trees(max_vertices, max_arity);
    let tallies: Vec<Tally> = trees
        .par_iter()
        .map(|s| {
            let mut t = Tally::default();
            for target in &trees {
                let maps = match enumerate_polynomial_maps(s, target, GUARD) {
                    Ok(m) => m,
                    Err(e) => return err_tally(&e),
                };
                let mut seen = HashMap::with_capacity(maps.len());
                for m in &maps {
                    let fresh = seen.insert(m.edge_map.clone(), ()).is_none();
                    let rebuilt = OmegaMorphism::from_edge_map(s, target, m.edge_map.clone());
                    let same = matches!(&rebuilt, Ok(r) if r.vertex_map() == m.vertex_map.as_slice());
                    t.check(fresh && same, || {
                        format!("{} -> {} with edge map {:?}", s.key(), target.key(), m.edge_map)
                    });
                }
            }
            t
        })
        .collect();
    report.absorb_all(tallies)
}

/// Counts, per morphism, of its factorizations through each middle object,
/// plus the automorphism counts of the middles.
struct FactorCounts {
    counts: Vec<HashMap<usize, usize>>,
}

/// Every morphism of trees factors as an active map followed by an inert
/// one; the factorizations through a fixed middle tree are exactly its
/// automorphisms' worth, and only the image subtree occurs as a middle.
pub fn check_omega_factorization(max_vertices: usize, max_arity: usize) -> CheckReport {
    let report = CheckReport::new("factorization_omega", &[("max_vertices", max_vertices), ("max_arity", max_arity)]);
    let trees = enumerate_trees(max_vertices, max_arity);
    let k = trees.len();
    let homs: Vec<Vec<Vec<OmegaMorphism>>> = match trees
        .par_iter()
        .map(|s| trees.iter().map(|t| enumerate_hom_omega(s, t, GUARD)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()
    {
        Ok(h) => h,
        Err(e) => return report.absorb_all([err_tally(&e)]),
    };
    let by_key: HashMap<String, usize> = trees.iter().enumerate().map(|(i, t)| (t.code(), i)).collect();
    let aut: Vec<usize> = (0..k).map(|u| homs[u][u].iter().filter(|m| m.is_iso()).count()).collect();
    let tallies: Vec<Tally> = (0..k)
        .into_par_iter()
        .map(|s| {
            let mut tally = Tally::default();
            for t in 0..k {
                let index: HashMap<&[usize], usize> =
                    homs[s][t].iter().enumerate().map(|(i, m)| (m.edge_map(), i)).collect();
                let mut fc = FactorCounts {
                    counts: vec![HashMap::new(); homs[s][t].len()],
                };
                for u in 0..k {
                    for a in homs[s][u].iter().filter(|m| m.is_active()) {
                        for i in homs[u][t].iter().filter(|m| m.is_inert()) {
                            let composite: Vec<usize> = a.edge_map().iter().map(|&e| i.edge_map()[e]).collect();
                            let idx = index[composite.as_slice()];
                            *fc.counts[idx].entry(u).or_insert(0) += 1;
                        }
                    }
                }
                for (idx, m) in homs[s][t].iter().enumerate() {
                    let (first, second) = m.factorize();
                    let middle = by_key.get(&first.target().canonical_form().0.code()).copied();
                    let composite_ok = second.after(&first).map(|c| c == *m).unwrap_or(false);
                    let counts = &fc.counts[idx];
                    let ok = composite_ok
                        && first.is_active()
                        && second.is_inert()
                        && middle.is_some_and(|u| counts.len() == 1 && counts.get(&u) == Some(&aut[u]));
                    tally.check(ok, || format!("{}: factorizations {:?}", m.key(), counts));
                }
            }
            tally
        })
        .collect();
    report.absorb_all(tallies)
}

fn compose_data(f: &DeltaFMorphism, g: &DeltaFMorphism) -> Vec<usize> {
    let mut d: Vec<usize> = f.phi().iter().map(|&p| g.phi()[p]).collect();
    for (i, e) in f.eta().iter().enumerate() {
        let ge = g.eta_at(f.phi()[i]);
        d.extend(e.values().iter().map(|&x| ge.apply(x)));
    }
    d
}

fn data(m: &DeltaFMorphism) -> Vec<usize> {
    let mut d = m.phi().to_vec();
    for e in m.eta() {
        d.extend_from_slice(e.values());
    }
    d
}

/// Both factorization systems on level forests: existence of the
/// factorization and uniqueness up to unique isomorphism, counted as above.
pub fn check_deltaf_factorization(max_weight: usize) -> CheckReport {
    let report = CheckReport::new("factorization_deltaf", &[("max_weight", max_weight)]);
    let objects = enumerate_objects(max_weight, false);
    let k = objects.len();
    let homs: Vec<Vec<Vec<DeltaFMorphism>>> = match objects
        .par_iter()
        .map(|x| objects.iter().map(|y| enumerate_hom(x, y, deltaf::DEFAULT_HOM_GUARD)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()
    {
        Ok(h) => h,
        Err(e) => return report.absorb_all([err_tally(&e)]),
    };
    let by_key: HashMap<String, usize> = objects.iter().enumerate().map(|(i, x)| (x.key(), i)).collect();
    let aut: Vec<usize> = (0..k).map(|u| homs[u][u].iter().filter(|m| m.is_iso()).count()).collect();
    let classes: Vec<Vec<Vec<deltaf::MorphismClass>>> =
        homs.iter().map(|row| row.iter().map(|ms| ms.iter().map(|m| m.classify()).collect()).collect()).collect();
    let tallies: Vec<Tally> = (0..k)
        .into_par_iter()
        .map(|s| {
            let mut tally = Tally::default();
            for system in [FactorizationSystem::ActiveInert, FactorizationSystem::SurjectiveInjective] {
                let (left, right): (fn(&deltaf::MorphismClass) -> bool, fn(&deltaf::MorphismClass) -> bool) = match system {
                    FactorizationSystem::ActiveInert => (|c| c.active, |c| c.inert),
                    FactorizationSystem::SurjectiveInjective => (|c| c.surjective, |c| c.injective),
                };
                for t in 0..k {
                    let index: HashMap<Vec<usize>, usize> =
                        homs[s][t].iter().enumerate().map(|(i, m)| (data(m), i)).collect();
                    let mut counts = vec![HashMap::<usize, usize>::new(); homs[s][t].len()];
                    for u in 0..k {
                        for (a, ca) in homs[s][u].iter().zip(&classes[s][u]) {
                            if !left(ca) {
                                continue;
                            }
                            for (i, ci) in homs[u][t].iter().zip(&classes[u][t]) {
                                if right(ci) {
                                    let idx = index[&compose_data(a, i)];
                                    *counts[idx].entry(u).or_insert(0) += 1;
                                }
                            }
                        }
                    }
                    for (idx, m) in homs[s][t].iter().enumerate() {
                        let (first, second) = m.factorize(system);
                        let middle = by_key.get(&first.target().canonical_form().0.key()).copied();
                        let composite_ok = second.after(&first).map(|c| c == *m).unwrap_or(false);
                        let c = &counts[idx];
                        let ok = composite_ok
                            && left(&first.classify())
                            && right(&second.classify())
                            && middle.is_some_and(|u| c.len() == 1 && c.get(&u) == Some(&aut[u]));
                        tally.check(ok, || format!("{} ({system:?}): factorizations {:?}", m.key(), c));
                    }
                }
            }
            tally
        })
        .collect();
    report.absorb_all(tallies)
}

/// `|Hom(η, T)| = |T₀|` for every tree in bound, the sizes of `sub(C_n)`
/// and `sub'(C_n)`, and the number of small trees.
pub fn check_counting(max_vertices: usize, max_arity: usize, max_corolla: usize) -> CheckReport {
    let report = CheckReport::new(
        "counting",
        &[("max_vertices", max_vertices), ("max_arity", max_arity), ("max_corolla", max_corolla)],
    );
    let mut t = Tally::default();
    let eta = Arc::new(PolyTree::eta());
    for tree in enumerate_trees(max_vertices, max_arity) {
        let n = enumerate_hom_omega(&eta, &tree, GUARD).map(|h| h.len());
        t.check(n.as_ref().ok() == Some(&tree.edge_count()), || format!("Hom(eta, {}) = {n:?}", tree.key()));
    }
    for n in 0..=max_corolla {
        let fm = free_monad(&PolyTree::corolla(n));
        t.check(fm.subtrees.len() == n + 2, || format!("sub(C{n}) = {}", fm.subtrees.len()));
        t.check(fm.marked.len() == 2 * n + 1, || format!("sub'(C{n}) = {}", fm.marked.len()));
    }
    let small = enumerate_trees(2, 2).len();
    t.check(small == 10, || format!("{small} trees with at most two binary vertices"));
    report.absorb_all([t])
}

/// The operads tested against: the trivial operad, commutative and
/// associative truncations, the two-colour operad with an isomorphism, and
/// the free operad on each tree in `trees`.
pub fn corpus(max_arity: usize, trees: &[Arc<PolyTree>]) -> Result<Vec<(String, Arc<ColouredOperad>)>> {
    let mut out = vec![
        ("trivial".to_string(), Arc::new(operad::trivial())),
        (format!("commutative{max_arity}"), Arc::new(operad::commutative(max_arity))),
        (format!("associative{max_arity}"), Arc::new(operad::associative(max_arity))),
        ("iso_pair".to_string(), Arc::new(operad::iso_pair())),
    ];
    for t in trees {
        out.push((format!("free{}", t.key()), Arc::new(operad::free(t)?)));
    }
    Ok(out)
}

/// Bounds used by the presheaf suites at a given size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresheafBounds {
    pub tree_vertices: usize,
    pub tree_arity: usize,
    pub forest_weight: usize,
    pub level_weight: usize,
}

impl PresheafBounds {
    pub fn for_size(n: usize) -> Self {
        PresheafBounds {
            tree_vertices: n.saturating_sub(1).clamp(2, 3),
            tree_arity: 2,
            forest_weight: n.min(4),
            level_weight: n,
        }
    }

    fn entries(&self) -> Vec<(&'static str, usize)> {
        vec![
            ("tree_vertices", self.tree_vertices),
            ("tree_arity", self.tree_arity),
            ("forest_weight", self.forest_weight),
            ("level_weight", self.level_weight),
        ]
    }
}

struct Truncations {
    trees: Arc<IndexTruncation>,
    forests: Arc<IndexTruncation>,
    levels: Arc<IndexTruncation>,
}

impl Truncations {
    fn new(b: PresheafBounds) -> Result<Self> {
        Ok(Truncations {
            trees: Arc::new(IndexTruncation::new(Flavor::Omega, Bound::trees(b.tree_vertices, b.tree_arity))?),
            forests: Arc::new(IndexTruncation::new(Flavor::Deltaf, Bound::forests(b.forest_weight))?),
            levels: Arc::new(IndexTruncation::new(
                Flavor::Deltaf1,
                Bound::level_trees(b.level_weight, b.tree_vertices, b.tree_arity),
            )?),
        })
    }

    fn corpus(&self, b: PresheafBounds) -> Result<Vec<(String, Arc<ColouredOperad>)>> {
        let trees: Vec<Arc<PolyTree>> = enumerate_trees(b.tree_vertices, b.tree_arity);
        corpus(b.forest_weight.max(b.tree_arity), &trees)
    }
}

fn absorb(report: &mut CheckReport, name: &str, r: Result<CheckReport>) {
    let mut t = Tally::default();
    match r {
        Ok(r) => {
            t.instances = r.instances;
            t.failure_count = r.failure_count;
            t.failures = r.failures.into_iter().map(|f| format!("{name}: {f}")).collect();
        }
        Err(e) => t.check(false, || format!("{name}: {e}")),
    }
    report.absorb(t);
}

/// Nerves of the corpus on trees, level forests and level trees are Segal.
pub fn check_nerves_segal(b: PresheafBounds) -> CheckReport {
    let mut report = CheckReport::new("segal", &b.entries());
    let tr = match Truncations::new(b) {
        Ok(t) => t,
        Err(e) => return report.absorb_all([err_tally(&e)]),
    };
    let corpus = match tr.corpus(b) {
        Ok(c) => c,
        Err(e) => return report.absorb_all([err_tally(&e)]),
    };
    for (name, o) in &corpus {
        for (flavor, t) in [("omega", &tr.trees), ("deltaf", &tr.forests), ("deltaf1", &tr.levels)] {
            let r = nerve(o, t).and_then(|n| {
                let mut r = check_segal(n.presheaf())?;
                if flavor == "deltaf" {
                    let p = crate::presheaf::istar_product_check(n.presheaf())?;
                    r.instances += p.instances;
                    r.failure_count += p.failure_count;
                    r.failures.extend(p.failures);
                }
                Ok(r)
            });
            absorb(&mut report, &format!("{name} on {flavor}"), r);
        }
    }
    report
}

/// Reading an operad back off its nerve gives an isomorphic operad, and the
/// nerve on level trees is the pullback of the nerve on trees along `τ`.
pub fn check_roundtrip(b: PresheafBounds) -> CheckReport {
    let mut report = CheckReport::new("roundtrip", &b.entries());
    let tr = match Truncations::new(b) {
        Ok(t) => t,
        Err(e) => return report.absorb_all([err_tally(&e)]),
    };
    let corpus = match tr.corpus(b) {
        Ok(c) => c,
        Err(e) => return report.absorb_all([err_tally(&e)]),
    };
    for (name, o) in &corpus {
        let r = (|| -> Result<CheckReport> {
            let mut t = Tally::default();
            let nt = nerve(o, &tr.trees)?;
            let rt = segal_round_trip(&nt)?;
            t.check(rt.morphism.is_iso(&rt.truncated, &rt.recovered), || "operad round trip is not an isomorphism".into());
            let back = nerve(&Arc::new(rt.recovered.clone()), &tr.trees)?;
            let trunc_nerve = nerve(&Arc::new(rt.truncated.clone()), &tr.trees)?;
            let m = nerve_map(&rt.morphism, &trunc_nerve, &back)?;
            t.check(m.is_iso(&back.presheaf().sizes()), || "nerve of the recovered operad differs".into());
            let nl = nerve(o, &tr.levels)?;
            let (pulled, cmp) = tau_pullback_comparison(&nl, &nt)?;
            t.check(cmp.validate(nl.presheaf(), &pulled).is_ok(), || "comparison with the pullback is not natural".into());
            t.check(cmp.is_iso(&pulled.sizes()), || "comparison with the pullback is not bijective".into());
            let seg = check_segal(&pulled)?;
            t.check(seg.passed(), || "pullback along tau is not Segal".into());
            let mut r = CheckReport::new("", &[]);
            r.absorb(t);
            Ok(r)
        })();
        absorb(&mut report, name, r);
    }
    report
}

fn local_for(f: &PresheafMap, p: &SetPresheaf, q: &SetPresheaf, target: &SetPresheaf, what: String) -> Result<Tally> {
    let (ok, nq, np) = is_local(f, p, q, target, MAP_GUARD)?;
    let mut t = Tally::default();
    t.check(ok, || format!("{what}: {nq} maps from the target, {np} from the source"));
    Ok(t)
}

/// Segal nerves are local for Segal cores and inner horns, and the Segal core
/// of the external boundary of a tree is that of the tree.
pub fn check_locality(b: PresheafBounds) -> CheckReport {
    let mut report = CheckReport::new("locality", &b.entries());
    let tr = match Truncations::new(b) {
        Ok(t) => t,
        Err(e) => return report.absorb_all([err_tally(&e)]),
    };
    let corpus = match tr.corpus(b) {
        Ok(c) => c,
        Err(e) => return report.absorb_all([err_tally(&e)]),
    };
    // (∂T)_Seg -> T_Seg
    let mut t = Tally::default();
    for x in 0..tr.trees.len() {
        if tr.trees.object(x).size() < 2 {
            continue;
        }
        match subtree_segal_core(&tr.trees, x) {
            Ok((_, map, core)) => t.check(map.is_iso(&core.sizes()), || format!("boundary core of {}", tr.trees.key(x))),
            Err(e) => t.check(false, || format!("{}: {e}", tr.trees.key(x))),
        }
    }
    report.absorb(t);
    for (name, o) in &corpus {
        for (flavor, trunc) in [("omega", &tr.trees), ("deltaf", &tr.forests), ("deltaf1", &tr.levels)] {
            let r = (|| -> Result<CheckReport> {
                let f = nerve(o, trunc)?.into_presheaf();
                let mut r = CheckReport::new("", &[]);
                for x in 0..trunc.len() {
                    let y = SetPresheaf::representable(trunc, x)?;
                    let (core, map) = segal_core(trunc, x)?;
                    r.absorb(local_for(&map, &core, &y, &f, format!("core of {}", trunc.key(x)))?);
                    // faces of level trees leave the level trees, so horns
                    // are taken among level forests
                    if flavor != "deltaf" {
                        continue;
                    }
                    let n = trunc.object(x).as_forest().expect("forest").length();
                    if (2..=3).contains(&n) {
                        let (h, map) = horn(trunc, x, n - 1)?;
                        r.absorb(local_for(&map, &h, &y, &f, format!("horn of {}", trunc.key(x)))?);
                    }
                }
                Ok(r)
            })();
            absorb(&mut report, &format!("{name} on {flavor}"), r);
        }
    }
    report
}

/// Free-operad nerves are complete, the two-colour iso operad's is not,
/// identities are fully faithful and essentially surjective, and so is the
/// collapse of the iso operad onto the trivial one, which is not an
/// isomorphism.
pub fn check_completeness(b: PresheafBounds) -> CheckReport {
    let mut report = CheckReport::new("completeness", &b.entries());
    let tr = match Truncations::new(b) {
        Ok(t) => t,
        Err(e) => return report.absorb_all([err_tally(&e)]),
    };
    let corpus = match tr.corpus(b) {
        Ok(c) => c,
        Err(e) => return report.absorb_all([err_tally(&e)]),
    };
    for (flavor, trunc) in [("omega", &tr.trees), ("deltaf1", &tr.levels)] {
        for (name, o) in &corpus {
            let r = (|| -> Result<CheckReport> {
                let n = nerve(o, trunc)?;
                let complete = check_complete_discrete(n.presheaf())?.passed();
                let mut t = Tally::default();
                let expect = name != "iso_pair";
                t.check(complete == expect, || format!("complete = {complete}"));
                let id = PresheafMap::identity(n.presheaf());
                let ffe = check_ff_eso(&id, n.presheaf(), n.presheaf())?;
                t.check(ffe.holds(), || format!("identity: {:?}", ffe.failures));
                let mut r = CheckReport::new("", &[]);
                r.absorb(t);
                Ok(r)
            })();
            absorb(&mut report, &format!("{name} on {flavor}"), r);
        }
        let r = (|| -> Result<CheckReport> {
            let pair = Arc::new(operad::iso_pair());
            let skeleton = Arc::new(operad::trivial());
            let src = nerve(&pair, trunc)?;
            let tgt = nerve(&skeleton, trunc)?;
            let phi = OperadMorphism {
                colour_map: vec![0; pair.colours().len()],
                op_map: vec![0; pair.ops().len()],
            };
            let m = nerve_map(&phi, &src, &tgt)?;
            let ffe = check_ff_eso(&m, src.presheaf(), tgt.presheaf())?;
            let mut t = Tally::default();
            t.check(ffe.holds(), || format!("collapse: {:?}", ffe.failures));
            t.check(!m.is_iso(&tgt.presheaf().sizes()), || "collapse is an isomorphism".into());
            // ff + eso between complete nerves: the induced operad map is an iso
            for (name, o) in corpus.iter().filter(|(n, _)| n != "iso_pair") {
                let n = nerve(o, trunc)?;
                if flavor == "omega" {
                    let rt = segal_round_trip(&n)?;
                    let ffe = check_ff_eso(&PresheafMap::identity(n.presheaf()), n.presheaf(), n.presheaf())?;
                    t.check(!ffe.holds() || rt.morphism.is_iso(&rt.truncated, &rt.recovered), || {
                        format!("{name}: equivalence without an operad isomorphism")
                    });
                }
            }
            let mut r = CheckReport::new("", &[]);
            r.absorb(t);
            Ok(r)
        })();
        absorb(&mut report, &format!("collapse on {flavor}"), r);
    }
    report
}

/// The suites `treeseg certify` knows about, in the order `all` runs them.
pub const SUITES: [&str; 11] = [
    "functor",
    "determination",
    "factorization",
    "elementary",
    "unit",
    "counting",
    "admissibility",
    "segal",
    "roundtrip",
    "locality",
    "completeness",
];

/// Machine-readable outcome of a certification run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertReport {
    pub suite: String,
    pub max_size: usize,
    pub passed: bool,
    pub instances: u64,
    pub failure_count: u64,
    pub reports: Vec<CheckReport>,
}

/// Tree bounds at a given size: up to `n - 1` vertices of arity up to
/// `min(3, n - 1)`.
pub fn tree_bounds(n: usize) -> (usize, usize) {
    let v = n.saturating_sub(1).max(1);
    (v, v.min(3))
}

pub fn run_suite(name: &str, n: usize) -> Result<Vec<CheckReport>> {
    let (v, a) = tree_bounds(n);
    let small = (v.min(3), 2);
    let pb = PresheafBounds::for_size(n);
    Ok(match name {
        "functor" => vec![tau::check_tau_functor(n)],
        "determination" => vec![check_edge_determination(v, a)],
        "factorization" => vec![
            check_omega_factorization(v, a),
            check_deltaf_factorization(n),
            tau::check_tau_factorization(n),
        ],
        "elementary" => vec![tau::check_elementary_equivalence_all(n)],
        "unit" => vec![tau::check_unit_all(n.saturating_sub(1), n)],
        "counting" => vec![check_counting(v, a, n)],
        "admissibility" => vec![
            tau::check_admissible_faces(small.0, small.1),
            tau::check_admissible_extension(small.0, small.1),
        ],
        "segal" => vec![check_nerves_segal(pb)],
        "roundtrip" => vec![check_roundtrip(pb)],
        "locality" => vec![check_locality(pb)],
        "completeness" => vec![check_completeness(pb)],
        _ => return Err(Error::Domain(format!("unknown suite `{name}`"))),
    })
}

/// Run one suite or `all`, in canonical order.
pub fn certify(suite: &str, max_size: usize) -> Result<CertReport> {
    let names: Vec<&str> = if suite == "all" { SUITES.to_vec() } else { vec![suite] };
    let mut reports = Vec::new();
    for name in names {
        reports.extend(run_suite(name, max_size)?);
    }
    let instances = reports.iter().map(|r| r.instances).sum();
    let failure_count = reports.iter().map(|r| r.failure_count).sum();
    Ok(CertReport {
        suite: suite.to_string(),
        max_size,
        passed: failure_count == 0 && reports.iter().all(|r| r.instances > 0),
        instances,
        failure_count,
        reports,
    })
}

/// Bound parameters of every report, keyed by suite name.
pub fn bounds(report: &CertReport) -> BTreeMap<String, BTreeMap<String, usize>> {
    report.reports.iter().map(|r| (r.suite.clone(), r.bound.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        for (name, n) in [("determination", 3), ("factorization", 3), ("counting", 3)] {
            for r in run_suite(name, n).unwrap() {
                assert!(r.passed(), "{}: {:?}", r.suite, r.failures);
                assert!(r.instances > 0, "{}", r.suite);
            }
        }
    }

    #[test]
    fn unknown_suite_is_a_domain_error() {
        assert!(matches!(certify("nope", 3), Err(Error::Domain(_))));
    }
}
