mod input;

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use input::{AnyMorphism, ForestOrMorphism};
use treeseg::deltaf::{self, DeltaFMorphismJson, DeltaFObject, FactorizationSystem};
use treeseg::omega::{self, OmegaMorphism, OmegaMorphismJson, TreeJson};
use treeseg::presheaf::operad::OperadJson;
use treeseg::presheaf::{self, Bound, ColouredOperad, Flavor, IndexTruncation, PresheafJson, SetPresheaf};
use treeseg::tau::{self, TauJson};
use treeseg::{certify, Error};

const HOM_GUARD: usize = 1_000_000;

const KEYS_HELP: &str = "\
Object keys:
  trees          eta, C<n> (corolla), L<n> (linear, n vertices) or a nested
                 code such as ((||)|), where | is a leaf and (..) a vertex
  level forests  [l0,l1,..] for the level sizes from the leaves down to the
                 roots, with each step the unique map to the next level, or
                 [l0,..|s1;s2;..] with every step listed as 1-based values,
                 e.g. [2,1] for the corolla C2 or [2,2,1|1,2;1,1]
Morphism keys:
  trees          SRC->TGT@e0,e1,.. listing the image of every source edge in
                 preorder numbering, e.g. eta->C2@1
  level forests  SRC->TGT@phi:eta0;eta1;.. with phi 0-based on levels and
                 each eta block 1-based, e.g. [1]->[2,1]@1:1
Any key argument may instead be a JSON file, or - for stdin.

JSON output (--json):
  trees        [{key, tree}]
  hom          {source, target, count, morphisms: [{key, morphism}]}
  factorize    {system, first, second, middle} with morphism keys
  tau          {source, tree} for objects, {key, morphism} for morphisms
  nerve        presheaf document {flavor, bound, values, actions}
  check-segal  {suite, bound, instances, failure_count, failures}
  reconstruct  operad document {colours, max_arity, ops, units, actions, composition}
  certify      {suite, max_size, passed, instances, failure_count, reports}
  dot          {key, dot}

Exit codes: 0 clean, 1 counterexample found, 2 input or validation error,
3 resource guard tripped.";

#[derive(Parser)]
#[command(name = "treeseg", version, about = "Exact combinatorics of level forests, trees and Segal presheaves", after_help = KEYS_HELP)]
struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Cat {
    Omega,
    Deltaf,
    Deltaf1,
}

#[derive(Clone, Copy, ValueEnum)]
enum System {
    /// active then inert
    Ai,
    /// surjective then injective
    Si,
}

#[derive(Subcommand)]
enum Command {
    /// List canonical trees.
    Trees {
        #[arg(long)]
        max_vertices: usize,
        #[arg(long)]
        max_arity: usize,
    },
    /// Enumerate a hom-set in canonical order.
    Hom {
        #[arg(long, value_enum)]
        cat: Cat,
        src: String,
        tgt: String,
    },
    /// Factor a morphism in a factorization system.
    Factorize {
        #[arg(long, value_enum)]
        system: System,
        mor: String,
    },
    /// Image of a level tree or a map of level trees under tau.
    Tau { arg: String },
    /// Nerve of an operad as a truncated presheaf.
    Nerve {
        #[arg(long)]
        operad: String,
        #[arg(long, value_enum)]
        cat: Cat,
        #[arg(long, default_value_t = 3)]
        max_vertices: usize,
        #[arg(long, default_value_t = 2)]
        max_arity: usize,
        #[arg(long, default_value_t = 3)]
        max_weight: usize,
    },
    /// Check the Segal condition of a presheaf document.
    CheckSegal { file: String },
    /// Recover an operad from a Segal presheaf on trees.
    Reconstruct { file: String },
    /// Run a certification suite.
    Certify {
        #[arg(long, value_parser = suite_names())]
        suite: String,
        #[arg(long)]
        max_size: usize,
    },
    /// Graphviz rendering of a tree.
    Dot { tree: String },
}

fn suite_names() -> Vec<&'static str> {
    let mut v = vec!["all"];
    v.extend(certify::SUITES);
    v
}

enum Outcome {
    Clean,
    Counterexample,
}

struct Out {
    json: bool,
    text: String,
}

impl Out {
    fn doc(&mut self, v: &impl serde::Serialize) -> treeseg::Result<()> {
        self.text.push_str(&serde_json::to_string_pretty(v)?);
        self.text.push('\n');
        Ok(())
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Resource(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let mut out = Out {
        json: cli.json,
        text: String::new(),
    };
    match run(cli.command, &mut out) {
        Ok(outcome) => {
            print!("{}", out.text);
            match outcome {
                Outcome::Clean => ExitCode::SUCCESS,
                Outcome::Counterexample => ExitCode::from(1),
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cmd: Command, out: &mut Out) -> treeseg::Result<Outcome> {
    match cmd {
        Command::Trees {
            max_vertices,
            max_arity,
        } => trees(out, max_vertices, max_arity),
        Command::Hom { cat, src, tgt } => hom(out, cat, &src, &tgt),
        Command::Factorize { system, mor } => factorize(out, system, &mor),
        Command::Tau { arg } => tau_verb(out, &arg),
        Command::Nerve {
            operad,
            cat,
            max_vertices,
            max_arity,
            max_weight,
        } => nerve(out, &operad, cat, max_vertices, max_arity, max_weight),
        Command::CheckSegal { file } => check_segal(out, &file),
        Command::Reconstruct { file } => reconstruct(out, &file),
        Command::Certify { suite, max_size } => certify_verb(out, &suite, max_size),
        Command::Dot { tree } => dot(out, &tree),
    }
}

fn trees(out: &mut Out, v: usize, a: usize) -> treeseg::Result<Outcome> {
    let ts = omega::enumerate_trees(v, a);
    if out.json {
        let docs: Vec<_> = ts
            .iter()
            .map(|t| json!({"key": t.key(), "tree": TreeJson::from(t.as_ref())}))
            .collect();
        out.doc(&docs)?;
    } else {
        for t in &ts {
            out.line(t.key());
        }
    }
    Ok(Outcome::Clean)
}

fn level_tree(arg: &str) -> treeseg::Result<Arc<DeltaFObject>> {
    let x = input::forest(arg)?;
    if !x.is_level_tree() {
        return Err(Error::Domain(format!("{} is not a level tree", x.key())));
    }
    Ok(x)
}

fn hom(out: &mut Out, cat: Cat, src: &str, tgt: &str) -> treeseg::Result<Outcome> {
    let (source, target, rows): (String, String, Vec<(String, serde_json::Value)>) = match cat {
        Cat::Omega => {
            let s = input::tree(src)?;
            let t = input::tree(tgt)?;
            let ms = omega::enumerate_hom_omega(&s, &t, HOM_GUARD)?;
            let rows = ms
                .iter()
                .map(|m| Ok((tree_key(m)?, serde_json::to_value(OmegaMorphismJson::from(m))?)))
                .collect::<treeseg::Result<_>>()?;
            (s.key(), t.key(), rows)
        }
        Cat::Deltaf | Cat::Deltaf1 => {
            let (s, t) = match cat {
                Cat::Deltaf1 => (level_tree(src)?, level_tree(tgt)?),
                _ => (input::forest(src)?, input::forest(tgt)?),
            };
            let ms = deltaf::enumerate_hom(&s, &t, HOM_GUARD)?;
            let rows = ms
                .iter()
                .map(|m| Ok((m.key(), serde_json::to_value(DeltaFMorphismJson::from(m))?)))
                .collect::<treeseg::Result<_>>()?;
            (s.key(), t.key(), rows)
        }
    };
    if out.json {
        let morphisms: Vec<_> = rows
            .iter()
            .map(|(k, m)| json!({"key": k, "morphism": m}))
            .collect();
        out.doc(&json!({
            "source": source,
            "target": target,
            "count": rows.len(),
            "morphisms": morphisms,
        }))?;
    } else {
        for (k, _) in &rows {
            out.line(k);
        }
    }
    Ok(Outcome::Clean)
}

/// Key of `m` transported onto the canonical numbering of its endpoints,
/// so that it parses back to the same map.
fn tree_key(m: &OmegaMorphism) -> treeseg::Result<String> {
    let (cs, iso_s) = m.source().canonical_form();
    let (ct, iso_t) = m.target().canonical_form();
    let mut back = vec![0; ct.edge_count()];
    for (e, &img) in iso_t.edge_map().iter().enumerate() {
        back[img] = e;
    }
    let edges = iso_s.edge_map().iter().map(|&e| back[m.edge_map()[e]]).collect();
    Ok(OmegaMorphism::from_edge_map(&cs, &ct, edges)?.key())
}

fn factorize(out: &mut Out, system: System, mor: &str) -> treeseg::Result<Outcome> {
    let (first, second, middle) = match (input::morphism(mor)?, system) {
        (AnyMorphism::Tree(m), System::Ai) => {
            let (f, s) = m.factorize();
            (tree_key(&f)?, tree_key(&s)?, f.target().key())
        }
        (AnyMorphism::Tree(_), System::Si) => {
            return Err(Error::Domain(
                "the surjective-injective system is defined on level forests only".into(),
            ))
        }
        (AnyMorphism::Forest(m), sys) => {
            let sys = match sys {
                System::Ai => FactorizationSystem::ActiveInert,
                System::Si => FactorizationSystem::SurjectiveInjective,
            };
            let (f, s) = m.factorize(sys);
            (f.key(), s.key(), f.target().key())
        }
    };
    if out.json {
        let name = match system {
            System::Ai => "ai",
            System::Si => "si",
        };
        out.doc(&json!({"system": name, "first": first, "second": second, "middle": middle}))?;
    } else {
        out.line(format!("first: {first}"));
        out.line(format!("second: {second}"));
    }
    Ok(Outcome::Clean)
}

fn tau_verb(out: &mut Out, arg: &str) -> treeseg::Result<Outcome> {
    match input::forest_or_morphism(arg)? {
        ForestOrMorphism::Object(x) => {
            let img = tau::tau_object(&x)?;
            if out.json {
                out.doc(&TauJson::from(&img))?;
            } else {
                out.line(img.tree().key());
            }
        }
        ForestOrMorphism::Morphism(AnyMorphism::Forest(m)) => {
            let img = tau::tau_morphism(&m)?;
            if out.json {
                out.doc(&json!({"key": tree_key(&img)?, "morphism": OmegaMorphismJson::from(&img)}))?;
            } else {
                out.line(tree_key(&img)?);
            }
        }
        ForestOrMorphism::Morphism(AnyMorphism::Tree(_)) => {
            return Err(Error::Domain("tau takes a level tree or a map of level trees".into()))
        }
    }
    Ok(Outcome::Clean)
}

fn nerve(
    out: &mut Out,
    file: &str,
    cat: Cat,
    max_vertices: usize,
    max_arity: usize,
    max_weight: usize,
) -> treeseg::Result<Outcome> {
    let doc: OperadJson = serde_json::from_str(&input::read_document(file)?)?;
    let o = Arc::new(ColouredOperad::from_json(&doc)?);
    let (flavor, bound) = match cat {
        Cat::Omega => (Flavor::Omega, Bound::trees(max_vertices, max_arity)),
        Cat::Deltaf => (Flavor::Deltaf, Bound::forests(max_weight)),
        Cat::Deltaf1 => (
            Flavor::Deltaf1,
            Bound::level_trees(max_weight, max_vertices, max_arity),
        ),
    };
    let trunc = Arc::new(IndexTruncation::new(flavor, bound)?);
    let n = presheaf::nerve(&o, &trunc)?;
    let f = n.presheaf();
    if out.json {
        out.doc(&f.to_json())?;
    } else {
        for a in 0..trunc.len() {
            out.line(format!("{}\t{}", trunc.key(a), f.size(a)));
        }
    }
    Ok(Outcome::Clean)
}

fn load_presheaf(file: &str) -> treeseg::Result<SetPresheaf> {
    let doc: PresheafJson = serde_json::from_str(&input::read_document(file)?)?;
    SetPresheaf::from_json(&doc)
}

fn report(out: &mut Out, r: &treeseg::CheckReport) -> treeseg::Result<()> {
    if out.json {
        out.doc(r)?;
    } else {
        out.line(format!(
            "{}: {} ({} instances, {} failures)",
            r.suite,
            if r.passed() { "pass" } else { "FAIL" },
            r.instances,
            r.failure_count
        ));
        for f in &r.failures {
            out.line(format!("  {f}"));
        }
    }
    Ok(())
}

fn check_segal(out: &mut Out, file: &str) -> treeseg::Result<Outcome> {
    let f = load_presheaf(file)?;
    let r = presheaf::check_segal(&f)?;
    report(out, &r)?;
    Ok(if r.passed() {
        Outcome::Clean
    } else {
        Outcome::Counterexample
    })
}

fn reconstruct(out: &mut Out, file: &str) -> treeseg::Result<Outcome> {
    let f = load_presheaf(file)?;
    if f.trunc().flavor() != Flavor::Omega {
        return Err(Error::Domain("reconstruct takes a presheaf on trees".into()));
    }
    let r = presheaf::check_segal(&f)?;
    if !r.passed() {
        report(out, &r)?;
        return Ok(Outcome::Counterexample);
    }
    let o = presheaf::operad_from_segal(&f)?;
    let doc = o.to_json();
    if out.json {
        out.doc(&doc)?;
    } else {
        out.line(format!("colours: {}", doc.colours.join(" ")));
        for (profile, ops) in &doc.ops {
            out.line(format!("{profile}: {}", ops.join(" ")));
        }
    }
    Ok(Outcome::Clean)
}

fn certify_verb(out: &mut Out, suite: &str, max_size: usize) -> treeseg::Result<Outcome> {
    let start = Instant::now();
    let rep = certify::certify(suite, max_size)?;
    eprintln!("wall time: {:.3} s", start.elapsed().as_secs_f64());
    if out.json {
        out.doc(&rep)?;
    } else {
        for r in &rep.reports {
            report(out, r)?;
        }
        out.line(format!(
            "{}: {} ({} instances, {} failures)",
            rep.suite,
            if rep.passed { "pass" } else { "FAIL" },
            rep.instances,
            rep.failure_count
        ));
    }
    Ok(if rep.passed {
        Outcome::Clean
    } else {
        Outcome::Counterexample
    })
}

fn dot(out: &mut Out, arg: &str) -> treeseg::Result<Outcome> {
    let t = input::tree(arg)?;
    let d = t.to_dot();
    if out.json {
        out.doc(&json!({"key": t.key(), "dot": d}))?;
    } else {
        out.text.push_str(&d);
    }
    Ok(Outcome::Clean)
}
