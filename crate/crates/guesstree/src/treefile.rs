//! Explicit trees and function tables as JSON documents.
//!
//! Catalog programs are code, but small hand-written trees are easier to
//! keep as data. A tree document lists internal states (query index, blocks,
//! colors, child ids) and leaves (output labels); a function table lists
//! input/label pairs. Both load into the same [`TreeProgram`] /
//! [`FunctionSpec`] types the rest of the crate works with.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::model::{
    Block, Color, FunctionSpec, Label, Partition, QuerySink, SpecError, Symbol, TreeError,
    TreeProgram,
};

/// On-disk form of one internal state.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateDoc {
    pub id: String,
    /// Coordinate queried at this state (0-based).
    #[serde(rename = "query_index")]
    pub query: usize,
    /// Alphabet blocks, one child per block.
    pub blocks: Vec<Vec<Symbol>>,
    pub colors: Vec<Color>,
    /// Ids of the states or leaves reached per block.
    pub children: Vec<String>,
}

/// On-disk form of one leaf.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LeafDoc {
    pub id: String,
    pub label: Label,
}

/// A complete explicit tree document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TreeDoc {
    pub arity: usize,
    pub alphabet: usize,
    pub root: String,
    pub states: Vec<StateDoc>,
    pub leaves: Vec<LeafDoc>,
}

/// One row of a function table document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableRow {
    pub input: Vec<Symbol>,
    pub label: Label,
}

/// A total function given by explicit enumeration.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableDoc {
    pub n: usize,
    pub alphabet: usize,
    pub labels: usize,
    #[serde(default)]
    pub label_names: Vec<String>,
    pub entries: Vec<TableRow>,
}

#[derive(Debug, thiserror::Error)]
pub enum TreeFileError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("duplicate node id {0:?}")]
    DuplicateId(String),
    #[error("unknown node id {0:?}")]
    UnknownId(String),
    #[error("state {0:?} has {1} blocks but {2} children")]
    ChildCountMismatch(String, usize, usize),
    #[error("state {0:?}: {1}")]
    BadPartition(String, crate::model::PartitionFault),
    #[error("state {0:?} queries coordinate {1} twice on one path")]
    RepeatOnPath(String, usize),
    #[error("state {0:?} is part of a cycle")]
    Cycle(String),
    #[error("state {0:?} queries coordinate {1}, arity is {2}")]
    QueryOutOfRange(String, usize, usize),
    #[error("tree has no states or leaves")]
    Empty,
    #[error("table: {0}")]
    Table(#[from] SpecError),
}

#[derive(Clone, Debug)]
enum Node {
    Inner {
        query: usize,
        partition: Partition,
        children: Vec<usize>,
    },
    Leaf {
        label: Label,
    },
}

/// A loaded explicit tree; walks its states to answer `run`.
#[derive(Clone, Debug)]
pub struct ExplicitTree {
    arity: usize,
    alphabet: usize,
    root: usize,
    nodes: Vec<Node>,
    ids: Vec<String>,
}

impl ExplicitTree {
    pub fn from_doc(doc: &TreeDoc) -> Result<Self, TreeFileError> {
        if doc.states.is_empty() && doc.leaves.is_empty() {
            return Err(TreeFileError::Empty);
        }
        let mut ids = Vec::new();
        let mut index: HashMap<&str, usize> = HashMap::new();
        for s in &doc.states {
            if index.insert(&s.id, ids.len()).is_some() {
                return Err(TreeFileError::DuplicateId(s.id.clone()));
            }
            ids.push(s.id.clone());
        }
        for l in &doc.leaves {
            if index.insert(&l.id, ids.len()).is_some() {
                return Err(TreeFileError::DuplicateId(l.id.clone()));
            }
            ids.push(l.id.clone());
        }
        let mut nodes = Vec::with_capacity(ids.len());
        for s in &doc.states {
            if s.query >= doc.arity {
                return Err(TreeFileError::QueryOutOfRange(
                    s.id.clone(),
                    s.query,
                    doc.arity,
                ));
            }
            if s.blocks.len() != s.children.len() {
                return Err(TreeFileError::ChildCountMismatch(
                    s.id.clone(),
                    s.blocks.len(),
                    s.children.len(),
                ));
            }
            let partition = Partition {
                blocks: s.blocks.iter().map(|b| Block::new(b.clone())).collect(),
                colors: s.colors.clone(),
            };
            partition
                .check(doc.alphabet)
                .map_err(|f| TreeFileError::BadPartition(s.id.clone(), f))?;
            let children = s
                .children
                .iter()
                .map(|c| {
                    index
                        .get(c.as_str())
                        .copied()
                        .ok_or_else(|| TreeFileError::UnknownId(c.clone()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            nodes.push(Node::Inner {
                query: s.query,
                partition,
                children,
            });
        }
        for l in &doc.leaves {
            nodes.push(Node::Leaf { label: l.label });
        }
        let root = *index
            .get(doc.root.as_str())
            .ok_or_else(|| TreeFileError::UnknownId(doc.root.clone()))?;
        let tree = ExplicitTree {
            arity: doc.arity,
            alphabet: doc.alphabet,
            root,
            nodes,
            ids,
        };
        tree.check_paths()?;
        Ok(tree)
    }

    pub fn from_json(text: &str) -> Result<Self, TreeFileError> {
        let doc: TreeDoc = serde_json::from_str(text)?;
        Self::from_doc(&doc)
    }

    /// Walks every root-to-leaf path, rejecting cycles and repeated queries.
    /// Paths are bounded by the arity, so this terminates even on bad input.
    fn check_paths(&self) -> Result<(), TreeFileError> {
        let mut path_queries: Vec<usize> = Vec::new();
        // (node, next child to visit); path_queries mirrors the Inner nodes
        // currently on the stack.
        let mut stack: Vec<(usize, usize)> = vec![(self.root, 0)];
        while let Some(top) = stack.len().checked_sub(1) {
            let (node, next_child) = stack[top];
            match &self.nodes[node] {
                Node::Leaf { .. } => {
                    stack.pop();
                }
                Node::Inner {
                    query, children, ..
                } => {
                    if next_child == 0 {
                        if path_queries.contains(query) {
                            return Err(TreeFileError::RepeatOnPath(
                                self.ids[node].clone(),
                                *query,
                            ));
                        }
                        if path_queries.len() >= self.arity {
                            return Err(TreeFileError::Cycle(self.ids[node].clone()));
                        }
                        path_queries.push(*query);
                    }
                    if next_child < children.len() {
                        stack[top].1 += 1;
                        stack.push((children[next_child], 0));
                    } else {
                        path_queries.pop();
                        stack.pop();
                    }
                }
            }
        }
        Ok(())
    }
}

impl TreeProgram for ExplicitTree {
    fn arity(&self) -> usize {
        self.arity
    }

    fn alphabet(&self) -> usize {
        self.alphabet
    }

    fn run(&self, q: &mut dyn QuerySink) -> Result<Label, TreeError> {
        let mut at = self.root;
        loop {
            match &self.nodes[at] {
                Node::Leaf { label } => return Ok(*label),
                Node::Inner {
                    query,
                    partition,
                    children,
                } => {
                    let picked = q.query(*query, partition.clone())?;
                    at = children[picked];
                }
            }
        }
    }
}

/// Loads a function table document into a [`FunctionSpec`].
pub fn table_from_doc(doc: &TableDoc) -> Result<FunctionSpec, TreeFileError> {
    let inputs: Vec<Vec<Symbol>> = doc.entries.iter().map(|r| r.input.clone()).collect();
    let labels: Vec<Label> = doc.entries.iter().map(|r| r.label).collect();
    let names = if doc.label_names.len() == doc.labels {
        doc.label_names.clone()
    } else {
        (0..doc.labels).map(|l| l.to_string()).collect()
    };
    Ok(FunctionSpec::with_label_names(
        doc.n,
        doc.alphabet,
        doc.labels,
        inputs,
        labels,
        names,
    )?)
}

pub fn table_from_json(text: &str) -> Result<FunctionSpec, TreeFileError> {
    let doc: TableDoc = serde_json::from_str(text)?;
    table_from_doc(&doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{all_strings, evaluate_path, validate};

    /// Two-bit OR with a "both bits are 0" guess.
    fn or_doc() -> TreeDoc {
        serde_json::from_value(serde_json::json!({
            "arity": 2,
            "alphabet": 2,
            "root": "q0",
            "states": [
                {"id": "q0", "query_index": 0,
                 "blocks": [[0], [1]], "colors": ["black", "red"],
                 "children": ["q1", "one"]},
                {"id": "q1", "query_index": 1,
                 "blocks": [[0], [1]], "colors": ["black", "red"],
                 "children": ["zero", "one"]}
            ],
            "leaves": [
                {"id": "zero", "label": 0},
                {"id": "one", "label": 1}
            ]
        }))
        .unwrap()
    }

    #[test]
    fn loads_and_decides_or() {
        let tree = ExplicitTree::from_doc(&or_doc()).unwrap();
        let spec = FunctionSpec::from_outputs(
            2,
            2,
            all_strings(2, 2),
            |x| usize::from(x.iter().any(|&b| b == 1)),
            |o| o.to_string(),
        )
        .unwrap();
        let report = validate(&tree, &spec);
        assert!(report.is_valid(), "{:?}", report.issues);
        let t = evaluate_path(&tree, &[0, 1]).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.label, 1);
    }

    #[test]
    fn rejects_cycles() {
        let mut doc = or_doc();
        doc.states[1].children[0] = "q0".into();
        let err = ExplicitTree::from_doc(&doc).unwrap_err();
        assert!(matches!(
            err,
            TreeFileError::RepeatOnPath(..) | TreeFileError::Cycle(..)
        ));
    }

    #[test]
    fn rejects_repeated_query_on_a_path() {
        let mut doc = or_doc();
        doc.states[1].query = 0;
        let err = ExplicitTree::from_doc(&doc).unwrap_err();
        assert!(matches!(err, TreeFileError::RepeatOnPath(id, 0) if id == "q1"));
    }

    #[test]
    fn rejects_unknown_child_ids() {
        let mut doc = or_doc();
        doc.states[0].children[1] = "nowhere".into();
        assert!(matches!(
            ExplicitTree::from_doc(&doc).unwrap_err(),
            TreeFileError::UnknownId(id) if id == "nowhere"
        ));
    }

    #[test]
    fn table_round_trip() {
        let doc: TableDoc = serde_json::from_value(serde_json::json!({
            "n": 1, "alphabet": 2, "labels": 2,
            "label_names": ["no", "yes"],
            "entries": [
                {"input": [0], "label": 0},
                {"input": [1], "label": 1}
            ]
        }))
        .unwrap();
        let spec = table_from_doc(&doc).unwrap();
        assert_eq!(spec.value(&[1]), Some(1));
        assert_eq!(spec.label_name(1), "yes");
    }
}
