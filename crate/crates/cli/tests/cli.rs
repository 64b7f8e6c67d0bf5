use std::path::PathBuf;
use std::process::{Command, Output};

fn treeseg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treeseg"))
        .args(args)
        .output()
        .expect("run treeseg")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn corpus(file: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(file)
        .to_string_lossy()
        .into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn ten_small_trees() {
    let o = treeseg(&["trees", "--max-vertices", "2", "--max-arity", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 10);
    let j = treeseg(&["trees", "--max-vertices", "2", "--max-arity", "2", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&j.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 10);
}

#[test]
fn three_maps_from_the_edge_into_the_binary_corolla() {
    let o = treeseg(&["hom", "--cat", "omega", "eta", "C2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "eta->C2@0\neta->C2@1\neta->C2@2\n");
    let j = treeseg(&["hom", "--cat", "omega", "eta", "C2", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&j.stdout).unwrap();
    assert_eq!(v["count"], 3);
}

#[test]
fn hom_keys_parse_back() {
    let o = treeseg(&["hom", "--cat", "deltaf", "[1,1]", "[2,1]"]);
    for key in stdout(&o).lines() {
        let f = treeseg(&["factorize", "--system", "si", key]);
        assert_eq!(f.status.code(), Some(0), "{key}");
        let f = treeseg(&["factorize", "--system", "ai", key, "--json"]);
        let v: serde_json::Value = serde_json::from_slice(&f.stdout).unwrap();
        assert!(v["first"].as_str().unwrap().contains("->"));
    }
}

#[test]
fn tree_keys_parse_back() {
    let o = treeseg(&["hom", "--cat", "omega", "C2", "((||)|)"]);
    let keys = stdout(&o);
    assert_eq!(keys.lines().count(), 4);
    for key in keys.lines() {
        let f = treeseg(&["factorize", "--system", "ai", key, "--json"]);
        assert_eq!(f.status.code(), Some(0), "{key}");
        let v: serde_json::Value = serde_json::from_slice(&f.stdout).unwrap();
        for part in ["first", "second"] {
            let k = v[part].as_str().unwrap();
            let again = treeseg(&["factorize", "--system", "ai", k, "--json"]);
            assert_eq!(again.status.code(), Some(0), "{k}");
        }
    }
}

#[test]
fn tau_of_objects_and_maps() {
    assert_eq!(stdout(&treeseg(&["tau", "[2,1]"])), "C2\n");
    assert_eq!(stdout(&treeseg(&["tau", "[1]"])), "eta\n");
    let o = treeseg(&["tau", "[1]->[2,1]@1:1"]);
    assert_eq!(o.status.code(), Some(0));
    let key = stdout(&o);
    assert_eq!(key, "eta->C2@0\n");
    assert!(stdout(&treeseg(&["hom", "--cat", "omega", "eta", "C2"])).lines().any(|l| l == key.trim()));
    let j = treeseg(&["tau", "[2,1]", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&j.stdout).unwrap();
    assert_eq!(v["tree"]["vertices"].as_array().unwrap().len(), 1);
}

#[test]
fn output_is_deterministic_and_thread_independent() {
    let args = ["hom", "--cat", "deltaf1", "[2,1]", "[2,2,1|1,2;1,1]", "--json"];
    let a = treeseg(&args);
    let b = treeseg(&args);
    let mut one = args.to_vec();
    one.extend(["--threads", "1"]);
    let c = treeseg(&one);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn nerve_check_and_reconstruct() {
    let path = scratch("assoc.json");
    let o = treeseg(&["nerve", "--operad", &corpus("associative4.json"), "--cat", "omega", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    std::fs::write(&path, &o.stdout).unwrap();
    let p = path.to_str().unwrap();
    let s = treeseg(&["check-segal", p, "--json"]);
    assert_eq!(s.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&s.stdout).unwrap();
    assert_eq!(v["failure_count"], 0);
    let r = treeseg(&["reconstruct", p, "--json"]);
    assert_eq!(r.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
    assert_eq!(v["colours"].as_array().unwrap().len(), 1);
    assert_eq!(v["ops"]["*|,*|->*|"].as_array().unwrap().len(), 2);

    let d = treeseg(&["nerve", "--operad", &corpus("iso_pair.json"), "--cat", "deltaf", "--max-weight", "3"]);
    assert_eq!(d.status.code(), Some(0));
    assert!(stdout(&d).lines().all(|l| l.contains('\t')));
}

#[test]
fn an_empty_presheaf_on_level_forests_is_a_counterexample() {
    let o = treeseg(&["nerve", "--operad", &corpus("trivial.json"), "--cat", "deltaf", "--max-weight", "2", "--json"]);
    let mut doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for (_, v) in doc["values"].as_object_mut().unwrap() {
        *v = serde_json::json!([]);
    }
    for (_, v) in doc["actions"].as_object_mut().unwrap() {
        *v = serde_json::json!([]);
    }
    let path = scratch("empty.json");
    std::fs::write(&path, serde_json::to_vec(&doc).unwrap()).unwrap();
    let s = treeseg(&["check-segal", path.to_str().unwrap()]);
    assert_eq!(s.status.code(), Some(1));
    assert!(stdout(&s).contains("FAIL"));
}

#[test]
fn exit_codes() {
    assert_eq!(treeseg(&["hom", "--cat", "omega", "xx", "C2"]).status.code(), Some(2));
    assert_eq!(treeseg(&["factorize", "--system", "si", "eta->C2@0"]).status.code(), Some(2));
    assert_eq!(treeseg(&["tau", "[1,1,2]"]).status.code(), Some(2));
    assert_eq!(treeseg(&["certify", "--suite", "nope", "--max-size", "3"]).status.code(), Some(2));
    assert_eq!(treeseg(&["hom", "--cat", "deltaf", "[10]", "[10]"]).status.code(), Some(3));
}

#[test]
fn certify_reports_json() {
    let o = treeseg(&["certify", "--suite", "counting", "--max-size", "3", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["suite"], "counting");
    assert_eq!(v["passed"], true);
    assert!(v["instances"].as_u64().unwrap() > 0);
    assert!(String::from_utf8(o.stderr).unwrap().contains("wall time"));
}

#[test]
fn dot_output() {
    let o = treeseg(&["dot", "((||)|)"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.starts_with("digraph tree {"));
    assert_eq!(s.matches("[label=\"\"]").count(), 2);
}
