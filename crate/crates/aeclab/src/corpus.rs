//! The structure corpus file format, locator selectors, and oracle scripts.
//!
//! A corpus file is a stream of JSON documents, one per structure:
//!
//! ```text
//! {"vocab": {"relations": [["E", 2]], "functions": [["s", 1]]},
//!  "size": 3,
//!  "rels": {"E": [[0, 1], [1, 0]]},
//!  "funs": {"s": [[0, 1], [1, 2], [2, 2]]}}
//! ```
//!
//! Function rows are `[args.., value]` and must cover every argument tuple
//! exactly once; tuples are 0-based indices into the universe. Parsing
//! rejects non-total function tables, out-of-range indices, and unknown
//! symbol names, with the document index and position in the message.

use crate::error::{Error, Result};
use crate::structure::{table_len, FiniteStructure};
use crate::vocab::Vocabulary;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct VocabDoc {
    #[serde(default)]
    relations: Vec<(String, usize)>,
    #[serde(default)]
    functions: Vec<(String, usize)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct StructureDoc {
    vocab: VocabDoc,
    size: usize,
    #[serde(default)]
    rels: BTreeMap<String, Vec<Vec<usize>>>,
    #[serde(default)]
    funs: BTreeMap<String, Vec<Vec<usize>>>,
}

fn corpus_err(path: &str, doc: usize, message: impl Into<String>) -> Error {
    Error::Corpus {
        path: path.into(),
        doc,
        message: message.into(),
    }
}

fn doc_to_structure(doc: &StructureDoc, path: &str, index: usize) -> Result<FiniteStructure> {
    let vocab = Arc::new(
        Vocabulary::new(doc.vocab.relations.clone(), doc.vocab.functions.clone())
            .map_err(|e| corpus_err(path, index, e.to_string()))?,
    );
    for name in doc.rels.keys() {
        if vocab.relation_index(name).is_none() {
            return Err(corpus_err(path, index, format!("unknown relation `{name}`")));
        }
    }
    for name in doc.funs.keys() {
        if vocab.function_index(name).is_none() {
            return Err(corpus_err(path, index, format!("unknown function `{name}`")));
        }
    }
    let mut rels: Vec<BTreeSet<Vec<usize>>> = Vec::new();
    for (name, arity) in vocab.relations() {
        let mut table = BTreeSet::new();
        for tuple in doc.rels.get(name).into_iter().flatten() {
            if tuple.len() != *arity {
                return Err(corpus_err(
                    path,
                    index,
                    format!("relation `{name}` expects arity {arity}, got {tuple:?}"),
                ));
            }
            if tuple.iter().any(|&x| x >= doc.size) {
                return Err(corpus_err(
                    path,
                    index,
                    format!("tuple {tuple:?} outside universe of size {}", doc.size),
                ));
            }
            table.insert(tuple.clone());
        }
        rels.push(table);
    }
    let mut funs: Vec<Vec<usize>> = Vec::new();
    for (name, arity) in vocab.functions() {
        let rows = doc.funs.get(name).cloned().unwrap_or_default();
        let slots = table_len(doc.size, *arity);
        let mut table: Vec<Option<usize>> = vec![None; slots];
        for row in &rows {
            if row.len() != arity + 1 {
                return Err(corpus_err(
                    path,
                    index,
                    format!("function `{name}` rows need {arity} arguments plus a value"),
                ));
            }
            let (args, value) = row.split_at(*arity);
            if args.iter().any(|&x| x >= doc.size) || value[0] >= doc.size {
                return Err(corpus_err(
                    path,
                    index,
                    format!("function `{name}` row {row:?} outside the universe"),
                ));
            }
            let slot = crate::structure::encode_args(args, doc.size);
            if table[slot].replace(value[0]).is_some() {
                return Err(corpus_err(
                    path,
                    index,
                    format!("function `{name}` defines {args:?} twice"),
                ));
            }
        }
        let total: Option<Vec<usize>> = table.into_iter().collect();
        match total {
            Some(t) => funs.push(t),
            None => {
                return Err(corpus_err(
                    path,
                    index,
                    format!(
                        "function `{name}` is not total: {} of {slots} rows given",
                        rows.len()
                    ),
                ))
            }
        }
    }
    FiniteStructure::new(vocab, doc.size, rels, funs)
        .map_err(|e| corpus_err(path, index, e.to_string()))
}

fn structure_to_doc(s: &FiniteStructure) -> StructureDoc {
    let mut rels = BTreeMap::new();
    for (r, (name, _)) in s.vocab().relations().iter().enumerate() {
        rels.insert(
            name.clone(),
            s.rel_table(r).iter().cloned().collect::<Vec<_>>(),
        );
    }
    let mut funs = BTreeMap::new();
    let mut args = Vec::new();
    for (f, (name, arity)) in s.vocab().functions().iter().enumerate() {
        let mut rows = Vec::new();
        for idx in 0..table_len(s.size(), *arity) {
            crate::structure::decode_args(idx, s.size(), *arity, &mut args);
            let mut row = args.clone();
            row.push(s.fn_table(f)[idx]);
            rows.push(row);
        }
        funs.insert(name.clone(), rows);
    }
    StructureDoc {
        vocab: VocabDoc {
            relations: s.vocab().relations().to_vec(),
            functions: s.vocab().functions().to_vec(),
        },
        size: s.size(),
        rels,
        funs,
    }
}

/// Parses a corpus from text: a stream of whitespace-separated JSON
/// documents. `path` labels error messages only.
pub fn parse_corpus_str(text: &str, path: &str) -> Result<Vec<FiniteStructure>> {
    let mut out = Vec::new();
    let stream = serde_json::Deserializer::from_str(text).into_iter::<StructureDoc>();
    for (index, doc) in stream.enumerate() {
        let doc = doc.map_err(|e| {
            corpus_err(
                path,
                index,
                format!("line {} column {}: {e}", e.line(), e.column()),
            )
        })?;
        out.push(doc_to_structure(&doc, path, index)?);
    }
    Ok(out)
}

/// Serializes structures one JSON document per line. `parse` of the result
/// reproduces the input field-for-field.
pub fn emit_corpus(structures: &[FiniteStructure]) -> String {
    let mut out = String::new();
    for s in structures {
        out.push_str(
            &serde_json::to_string(&structure_to_doc(s))
                .expect("corpus documents serialize infallibly"),
        );
        out.push('\n');
    }
    out
}

pub fn parse_corpus(path: &Path) -> Result<Vec<FiniteStructure>> {
    let text = std::fs::read_to_string(path)?;
    parse_corpus_str(&text, &path.display().to_string())
}

pub fn write_corpus(structures: &[FiniteStructure], path: &Path) -> Result<()> {
    std::fs::write(path, emit_corpus(structures))?;
    Ok(())
}

/// Loads every `.json` corpus file under a directory, sorted by file name,
/// with ids `file-stem#index`.
pub fn load_corpus_dir(dir: &Path) -> Result<Vec<(String, FiniteStructure)>> {
    let mut files: Vec<std::path::PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let mut out = Vec::new();
    for file in files {
        let stem = file
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        for (i, s) in parse_corpus(&file)?.into_iter().enumerate() {
            out.push((format!("{stem}#{i}"), s));
        }
    }
    Ok(out)
}

/// A `path[@doc]#i,j,..` reference to a tuple inside a corpus document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selector {
    pub path: String,
    pub doc: usize,
    pub tuple: Vec<usize>,
}

/// Parses a locator selector. The tuple part may be empty (`file#`), and the
/// document index defaults to 0.
pub fn parse_selector(text: &str) -> Result<Selector> {
    let (head, tuple_part) = text.rsplit_once('#').ok_or_else(|| {
        Error::Precondition(format!("selector `{text}` needs a `#tuple` part"))
    })?;
    let (path, doc) = match head.rsplit_once('@') {
        Some((p, d)) if !p.is_empty() => {
            let doc = d.parse::<usize>().map_err(|_| {
                Error::Precondition(format!("selector `{text}` has a bad document index"))
            })?;
            (p.to_string(), doc)
        }
        _ => (head.to_string(), 0),
    };
    if path.is_empty() {
        return Err(Error::Precondition(format!(
            "selector `{text}` has an empty path"
        )));
    }
    let tuple = tuple_part
        .split(',')
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.trim().parse::<usize>().map_err(|_| {
                Error::Precondition(format!("selector `{text}` has a bad tuple index `{p}`"))
            })
        })
        .collect::<Result<Vec<usize>>>()?;
    Ok(Selector {
        path,
        doc,
        tuple,
    })
}

/// One record of a chain oracle script: the index set, the witness corpus
/// file (relative to the script), the document index, and the tuple.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleRecord {
    pub indices: Vec<usize>,
    pub witness: String,
    #[serde(default)]
    pub doc: usize,
    pub tuple: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleScript {
    pub witnesses: Vec<OracleRecord>,
}

/// Parses an oracle script from JSON text.
pub fn parse_oracle_script(text: &str, path: &str) -> Result<OracleScript> {
    serde_json::from_str(text).map_err(|e| {
        corpus_err(
            path,
            0,
            format!("line {} column {}: {e}", e.line(), e.column()),
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn four_cycle_round_trips() {
        let c4 = catalog::graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let text = emit_corpus(&[c4.clone()]);
        let parsed = parse_corpus_str(&text, "mem").unwrap();
        assert_eq!(parsed, vec![c4]);
    }

    #[test]
    fn functions_round_trip() {
        let s = catalog::unary(3, &[1, 2, 2]);
        let text = emit_corpus(&[s.clone()]);
        let parsed = parse_corpus_str(&text, "mem").unwrap();
        assert_eq!(parsed, vec![s]);
    }

    #[test]
    fn missing_function_row_is_rejected() {
        let text = r#"{"vocab": {"functions": [["s", 1]]}, "size": 2,
                       "funs": {"s": [[0, 1]]}}"#;
        let err = parse_corpus_str(text, "t").unwrap_err();
        assert!(err.to_string().contains("not total"), "{err}");
    }

    #[test]
    fn out_of_range_tuple_is_rejected() {
        let text = r#"{"vocab": {"relations": [["E", 2]]}, "size": 2,
                       "rels": {"E": [[0, 2]]}}"#;
        let err = parse_corpus_str(text, "t").unwrap_err();
        assert!(err.to_string().contains("outside universe"), "{err}");
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_corpus_str("{\"vocab\": {", "t").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line"), "{msg}");
    }

    #[test]
    fn duplicate_function_rows_are_rejected() {
        let text = r#"{"vocab": {"functions": [["s", 1]]}, "size": 2,
                       "funs": {"s": [[0, 1], [0, 0], [1, 1]]}}"#;
        assert!(parse_corpus_str(text, "t").is_err());
    }

    #[test]
    fn multi_document_streams_parse() {
        let a = catalog::graph(2, &[(0, 1)]);
        let b = catalog::graph(1, &[]);
        let text = emit_corpus(&[a.clone(), b.clone()]);
        assert_eq!(parse_corpus_str(&text, "mem").unwrap(), vec![a, b]);
    }

    #[test]
    fn selector_grammar() {
        assert_eq!(
            parse_selector("models.json#0,1").unwrap(),
            Selector {
                path: "models.json".into(),
                doc: 0,
                tuple: vec![0, 1],
            }
        );
        assert_eq!(
            parse_selector("dir/m.json@2#3").unwrap(),
            Selector {
                path: "dir/m.json".into(),
                doc: 2,
                tuple: vec![3],
            }
        );
        assert_eq!(parse_selector("m.json#").unwrap().tuple, Vec::<usize>::new());
        assert!(parse_selector("no-tuple-part").is_err());
        assert!(parse_selector("m.json@x#1").is_err());
    }

    #[test]
    fn oracle_script_parses() {
        let text = r#"{"witnesses": [
            {"indices": [0], "witness": "w1.json", "tuple": [0]},
            {"indices": [0, 1], "witness": "w2.json", "doc": 1, "tuple": [0, 2]}
        ]}"#;
        let script = parse_oracle_script(text, "script").unwrap();
        assert_eq!(script.witnesses.len(), 2);
        assert_eq!(script.witnesses[1].doc, 1);
    }
}
