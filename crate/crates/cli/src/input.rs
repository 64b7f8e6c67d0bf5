//! Command-line arguments that name objects and morphisms.
//!
//! An argument is read as a JSON document when it is `-` (stdin) or the path
//! of an existing file, and as a canonical key otherwise.

use std::fs;
use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use treeseg::deltaf::{DeltaFMorphism, DeltaFMorphismJson, DeltaFObject, DeltaFObjectJson};
use treeseg::finset::FinSetMap;
use treeseg::omega::{OmegaMorphism, OmegaMorphismJson, PolyTree, TreeJson};
use treeseg::{Error, Result};

pub enum Source {
    Key(String),
    Document(String),
}

pub fn read_document(arg: &str) -> Result<String> {
    if arg == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Error::Parse(format!("stdin: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(arg).map_err(|e| Error::Parse(format!("{arg}: {e}")))
}

pub fn classify(arg: &str) -> Result<Source> {
    if arg == "-" || Path::new(arg).is_file() {
        Ok(Source::Document(read_document(arg)?))
    } else {
        Ok(Source::Key(arg.to_string()))
    }
}

pub fn tree(arg: &str) -> Result<Arc<PolyTree>> {
    match classify(arg)? {
        Source::Key(k) => Ok(Arc::new(PolyTree::parse_key(&k)?)),
        Source::Document(d) => {
            let j: TreeJson = serde_json::from_str(&d)?;
            Ok(Arc::new(PolyTree::try_from(&j)?))
        }
    }
}

pub fn forest(arg: &str) -> Result<Arc<DeltaFObject>> {
    match classify(arg)? {
        Source::Key(k) => Ok(Arc::new(DeltaFObject::parse_key(&k)?)),
        Source::Document(d) => {
            let j: DeltaFObjectJson = serde_json::from_str(&d)?;
            Ok(Arc::new(DeltaFObject::try_from(&j)?))
        }
    }
}

pub enum AnyMorphism {
    Tree(OmegaMorphism),
    Forest(DeltaFMorphism),
}

fn split_morphism_key(key: &str) -> Result<(&str, &str, &str)> {
    let bad = || Error::Parse(format!("`{key}` is not a morphism key SRC->TGT@DATA"));
    let (src, rest) = key.split_once("->").ok_or_else(bad)?;
    let (tgt, data) = rest.split_once('@').ok_or_else(bad)?;
    Ok((src.trim(), tgt.trim(), data.trim()))
}

fn parse_list(txt: &str) -> Result<Vec<usize>> {
    if txt.trim().is_empty() {
        return Ok(Vec::new());
    }
    txt.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("`{t}` is not a natural number")))
        })
        .collect()
}

/// `S->T@e0,e1,..` for trees; `[..]->[..]@phi:eta;eta;..` for level
/// forests, with `eta` values 1-based.
pub fn parse_morphism_key(key: &str) -> Result<AnyMorphism> {
    let (src, tgt, data) = split_morphism_key(key)?;
    if src.starts_with('[') {
        let s = Arc::new(DeltaFObject::parse_key(src)?);
        let t = Arc::new(DeltaFObject::parse_key(tgt)?);
        let (phi, eta) = data
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("`{data}` lacks the `phi:eta` separator")))?;
        let phi = parse_list(phi)?;
        if phi.len() != s.levels().len() {
            return Err(Error::Parse(format!(
                "phi has {} entries for {} levels",
                phi.len(),
                s.levels().len()
            )));
        }
        let blocks: Vec<&str> = eta.split(';').collect();
        if blocks.len() != phi.len() {
            return Err(Error::Parse(format!(
                "eta has {} blocks for {} levels",
                blocks.len(),
                phi.len()
            )));
        }
        let mut maps = Vec::with_capacity(blocks.len());
        for (i, b) in blocks.iter().enumerate() {
            let values = parse_list(b)?
                .into_iter()
                .map(|v| v.checked_sub(1).ok_or_else(|| Error::Parse("eta values are 1-based".into())))
                .collect::<Result<Vec<_>>>()?;
            let codomain = *t.levels().get(phi[i]).ok_or_else(|| {
                Error::Domain(format!("phi({i}) = {} is not a target level", phi[i]))
            })?;
            maps.push(FinSetMap::new(codomain, values)?);
        }
        Ok(AnyMorphism::Forest(DeltaFMorphism::validate(s, t, phi, maps)?))
    } else {
        let s = Arc::new(PolyTree::parse_key(src)?);
        let t = Arc::new(PolyTree::parse_key(tgt)?);
        let edges = parse_list(data)?;
        Ok(AnyMorphism::Tree(OmegaMorphism::from_edge_map(&s, &t, edges)?))
    }
}

pub fn morphism(arg: &str) -> Result<AnyMorphism> {
    match classify(arg)? {
        Source::Key(k) => parse_morphism_key(&k),
        Source::Document(d) => {
            let v: serde_json::Value = serde_json::from_str(&d)?;
            if v.get("edge_map").is_some() {
                let j: OmegaMorphismJson = serde_json::from_value(v)?;
                Ok(AnyMorphism::Tree(OmegaMorphism::try_from(&j)?))
            } else {
                let j: DeltaFMorphismJson = serde_json::from_value(v)?;
                Ok(AnyMorphism::Forest(DeltaFMorphism::try_from(&j)?))
            }
        }
    }
}

pub enum ForestOrMorphism {
    Object(Arc<DeltaFObject>),
    Morphism(AnyMorphism),
}

pub fn forest_or_morphism(arg: &str) -> Result<ForestOrMorphism> {
    match classify(arg)? {
        Source::Key(k) if k.contains("->") => Ok(ForestOrMorphism::Morphism(parse_morphism_key(&k)?)),
        Source::Key(k) => Ok(ForestOrMorphism::Object(Arc::new(DeltaFObject::parse_key(&k)?))),
        Source::Document(d) => {
            let v: serde_json::Value = serde_json::from_str(&d)?;
            if v.get("source").is_some() {
                let j: DeltaFMorphismJson = serde_json::from_value(v)?;
                Ok(ForestOrMorphism::Morphism(AnyMorphism::Forest(DeltaFMorphism::try_from(&j)?)))
            } else {
                let j: DeltaFObjectJson = serde_json::from_value(v)?;
                Ok(ForestOrMorphism::Object(Arc::new(DeltaFObject::try_from(&j)?)))
            }
        }
    }
}
