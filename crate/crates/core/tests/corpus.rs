use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use treeseg::certify::corpus;
use treeseg::omega::enumerate_trees;
use treeseg::presheaf::operad::OperadJson;
use treeseg::presheaf::{nerve, operad_from_segal, Bound, ColouredOperad, Flavor, IndexTruncation, SetPresheaf};

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn load(file: &str) -> OperadJson {
    let text = std::fs::read_to_string(corpus_dir().join(file)).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn corpus_files_match_the_constructors() {
    let manifest: BTreeMap<String, String> =
        serde_json::from_str(&std::fs::read_to_string(corpus_dir().join("manifest.json")).unwrap()).unwrap();
    let built = corpus(4, &enumerate_trees(3, 2)).unwrap();
    assert_eq!(manifest.len(), built.len());
    for (name, o) in built {
        let label = match name.strip_prefix("free") {
            Some(key) => format!("free {key}"),
            None => name.clone(),
        };
        let file = manifest
            .iter()
            .find(|(_, l)| **l == label)
            .map(|(f, _)| f.clone())
            .unwrap_or_else(|| panic!("{label} is missing from the manifest"));
        assert_eq!(load(&file), o.to_json(), "{file}");
    }
}

#[test]
fn corpus_nerves_survive_json_and_give_back_their_operads() {
    let trunc = Arc::new(IndexTruncation::new(Flavor::Omega, Bound::trees(3, 2)).unwrap());
    for file in ["trivial.json", "commutative4.json", "associative4.json", "iso_pair.json", "free-09.json"] {
        let o = Arc::new(ColouredOperad::from_json(&load(file)).unwrap());
        let n = nerve(&o, &trunc).unwrap();
        let text = serde_json::to_string(&n.presheaf().to_json()).unwrap();
        let back = SetPresheaf::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert!(back.same_as(n.presheaf()), "{file}");
        let rec = operad_from_segal(&back).unwrap();
        assert_eq!(rec.colours().len(), o.colours().len(), "{file}");
        for arity in 0..=2 {
            let count = |p: &ColouredOperad| p.ops().iter().filter(|op| op.arity() == arity).count();
            assert_eq!(count(&rec), count(&o), "{file} arity {arity}");
        }
    }
}
