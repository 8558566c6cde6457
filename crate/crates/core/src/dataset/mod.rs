//! Dataset loading, validation, input costs and page-text preprocessing.
//!
//! The on-disk format is a single JSON document:
//!
//! ```json
//! {"inputs":[{"id":1,
//!             "actions":[{"method":"GET","url":"http://host/login",
//!                         "params":[{"name":"user","type":"str","value":"bob"}]}],
//!             "outputs":["<html>...</html>"],
//!             "mr_action_counts":{"MR1":3}}],
//!  "vulnerabilities":[{"id":"CVE-1","detecting_groups":[[1],[2,3]]}]}
//! ```

mod stopwords;
mod text;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::{CostMap, InputId, Method};

pub use stopwords::{Stopwords, DEFAULT_STOPWORDS};
pub use text::{
    build_shared_filter, preprocess_output, tokenize, SharedFilter, TextPipeline, TokenDoc,
};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read dataset: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed dataset: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid dataset: {0}")]
    Invalid(String),
    #[error("cannot build shared-token filter from an empty document list")]
    NoDocuments,
    #[error("document frequency threshold must lie in (0, 1], got {0}")]
    BadThreshold(f64),
}

fn invalid(msg: impl Into<String>) -> DatasetError {
    DatasetError::Invalid(msg.into())
}

/// Value of a residual action parameter.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ParamValue {
    Text(String),
    Int(i64),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Param {
    pub name: String,
    pub value: ParamValue,
}

impl Param {
    pub fn text(name: impl Into<String>, value: impl Into<String>) -> Self {
        Param { name: name.into(), value: ParamValue::Text(value.into()) }
    }

    pub fn int(name: impl Into<String>, value: i64) -> Self {
        Param { name: name.into(), value: ParamValue::Int(value) }
    }
}

/// A URL as a sequence of words: the scheme, then the `/`-separated path
/// segments after `://`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Url {
    words: Vec<String>,
}

impl Url {
    /// Splits once on `://`, then on `/`. Empty segments are skipped.
    pub fn parse(raw: &str) -> Result<Url, DatasetError> {
        let (scheme, rest) = raw
            .split_once("://")
            .ok_or_else(|| invalid(format!("url {raw:?} has no scheme separator")))?;
        if scheme.is_empty() || scheme.contains('/') {
            return Err(invalid(format!("url {raw:?} has an empty or malformed scheme")));
        }
        let mut words = vec![scheme.to_string()];
        words.extend(rest.split('/').filter(|w| !w.is_empty()).map(str::to_string));
        if words.len() < 2 {
            return Err(invalid(format!("url {raw:?} has fewer than two words")));
        }
        Ok(Url { words })
    }

    pub fn from_words<I, S>(words: I) -> Result<Url, DatasetError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let words: Vec<String> = words.into_iter().map(Into::into).collect();
        if words.len() < 2 {
            return Err(invalid("url needs at least two words"));
        }
        if words.iter().any(|w| w.is_empty() || w.contains('/')) {
            return Err(invalid("url words must be non-empty and contain no '/'"));
        }
        Ok(Url { words })
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

impl fmt::Display for Url {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}://{}", self.words[0], self.words[1..].join("/"))
    }
}

/// One HTTP interaction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Action {
    pub method: Method,
    pub url: Url,
    pub params: Vec<Param>,
}

impl Action {
    pub fn new(method: Method, url: &str, params: Vec<Param>) -> Result<Action, DatasetError> {
        Ok(Action { method, url: Url::parse(url)?, params })
    }
}

/// A recorded input: its actions, the page text each action produced, and
/// how many actions each metamorphic relation would execute on it.
#[derive(Debug, Clone, PartialEq)]
pub struct InputRecord {
    pub id: InputId,
    pub actions: Vec<Action>,
    pub outputs: Vec<String>,
    pub mr_action_counts: BTreeMap<String, u64>,
}

impl InputRecord {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn cost(&self) -> u64 {
        compute_cost(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vulnerability {
    pub id: String,
    /// The vulnerability is exercised when every member of at least one
    /// group is selected.
    pub detecting_groups: Vec<BTreeSet<InputId>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub inputs: Vec<InputRecord>,
    pub vulnerabilities: Option<Vec<Vulnerability>>,
    /// Inputs removed at load time because their cost was zero.
    pub dropped: Vec<InputId>,
}

impl Dataset {
    /// Validates records and drops zero-cost inputs.
    pub fn new(
        inputs: Vec<InputRecord>,
        vulnerabilities: Option<Vec<Vulnerability>>,
    ) -> Result<Dataset, DatasetError> {
        let mut seen = BTreeSet::new();
        for input in &inputs {
            if input.id.0 == 0 {
                return Err(invalid("input ids must be positive"));
            }
            if !seen.insert(input.id) {
                return Err(invalid(format!("duplicate input id {}", input.id.0)));
            }
            if input.actions.is_empty() {
                return Err(invalid(format!("input {} has no actions", input.id.0)));
            }
            if input.outputs.len() != input.actions.len() {
                return Err(invalid(format!(
                    "input {} has {} actions but {} outputs",
                    input.id.0,
                    input.actions.len(),
                    input.outputs.len()
                )));
            }
        }
        for vuln in vulnerabilities.iter().flatten() {
            for member in vuln.detecting_groups.iter().flatten() {
                if !seen.contains(member) {
                    return Err(invalid(format!(
                        "vulnerability {:?} refers to unknown input {}",
                        vuln.id, member.0
                    )));
                }
            }
        }

        let (kept, zero): (Vec<_>, Vec<_>) = inputs.into_iter().partition(|i| i.cost() > 0);
        let dropped: Vec<InputId> = zero.iter().map(|i| i.id).collect();
        if !dropped.is_empty() {
            log::warn!(
                "dropped {} zero-cost input(s): {:?}",
                dropped.len(),
                dropped.iter().map(|i| i.0).collect::<Vec<_>>()
            );
        }
        Ok(Dataset { inputs: kept, vulnerabilities, dropped })
    }

    pub fn ids(&self) -> BTreeSet<InputId> {
        self.inputs.iter().map(|i| i.id).collect()
    }

    pub fn costs(&self) -> CostMap {
        self.inputs.iter().map(|i| (i.id, i.cost())).collect()
    }

    pub fn get(&self, id: InputId) -> Option<&InputRecord> {
        self.inputs.iter().find(|i| i.id == id)
    }

    /// Every page text of the dataset, in (input, position) order.
    pub fn all_outputs(&self) -> impl Iterator<Item = &str> {
        self.inputs.iter().flat_map(|i| i.outputs.iter().map(String::as_str))
    }

    pub fn to_json(&self) -> String {
        let raw = RawDataset::from(self);
        serde_json::to_string_pretty(&raw).expect("dataset serialization cannot fail")
    }
}

/// Sum of the per-relation action counts. Saturates instead of overflowing.
pub fn compute_cost(input: &InputRecord) -> u64 {
    input.mr_action_counts.values().fold(0u64, |acc, &c| acc.saturating_add(c))
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset, DatasetError> {
    let text = std::fs::read_to_string(path)?;
    parse_dataset(&text)
}

/// Parses and validates a dataset document held in memory.
pub fn parse_dataset(text: &str) -> Result<Dataset, DatasetError> {
    let raw: RawDataset = serde_json::from_str(text)?;
    raw.into_dataset()
}

// ---- wire format ----------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct RawDataset {
    inputs: Vec<RawInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vulnerabilities: Option<Vec<RawVulnerability>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawInput {
    id: u64,
    actions: Vec<RawAction>,
    outputs: Vec<String>,
    #[serde(default)]
    mr_action_counts: BTreeMap<String, u64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawAction {
    method: Method,
    url: String,
    #[serde(default)]
    params: Vec<RawParam>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawParamKind {
    Str,
    Int,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawParam {
    name: String,
    #[serde(rename = "type")]
    kind: RawParamKind,
    value: serde_json::Value,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawVulnerability {
    id: String,
    detecting_groups: Vec<Vec<u64>>,
}

impl RawDataset {
    fn into_dataset(self) -> Result<Dataset, DatasetError> {
        let mut inputs = Vec::with_capacity(self.inputs.len());
        for raw in self.inputs {
            let mut actions = Vec::with_capacity(raw.actions.len());
            for a in raw.actions {
                let mut params = Vec::with_capacity(a.params.len());
                for p in a.params {
                    let value = match (p.kind, p.value) {
                        (RawParamKind::Str, serde_json::Value::String(s)) => ParamValue::Text(s),
                        (RawParamKind::Int, serde_json::Value::Number(n)) => match n.as_i64() {
                            Some(v) => ParamValue::Int(v),
                            None => {
                                return Err(invalid(format!(
                                    "parameter {:?} of input {} is not a 64-bit integer",
                                    p.name, raw.id
                                )))
                            }
                        },
                        (kind, v) => {
                            return Err(invalid(format!(
                                "parameter {:?} of input {} declared {:?} but holds {v}",
                                p.name, raw.id, kind
                            )))
                        }
                    };
                    params.push(Param { name: p.name, value });
                }
                actions.push(Action { method: a.method, url: Url::parse(&a.url)?, params });
            }
            inputs.push(InputRecord {
                id: InputId(raw.id),
                actions,
                outputs: raw.outputs,
                mr_action_counts: raw.mr_action_counts,
            });
        }
        let vulnerabilities = self.vulnerabilities.map(|vs| {
            vs.into_iter()
                .map(|v| Vulnerability {
                    id: v.id,
                    detecting_groups: v
                        .detecting_groups
                        .into_iter()
                        .map(|g| g.into_iter().map(InputId).collect())
                        .collect(),
                })
                .collect()
        });
        Dataset::new(inputs, vulnerabilities)
    }
}

impl From<&Dataset> for RawDataset {
    fn from(d: &Dataset) -> Self {
        RawDataset {
            inputs: d
                .inputs
                .iter()
                .map(|i| RawInput {
                    id: i.id.0,
                    actions: i
                        .actions
                        .iter()
                        .map(|a| RawAction {
                            method: a.method,
                            url: a.url.to_string(),
                            params: a
                                .params
                                .iter()
                                .map(|p| match &p.value {
                                    ParamValue::Text(s) => RawParam {
                                        name: p.name.clone(),
                                        kind: RawParamKind::Str,
                                        value: serde_json::Value::String(s.clone()),
                                    },
                                    ParamValue::Int(v) => RawParam {
                                        name: p.name.clone(),
                                        kind: RawParamKind::Int,
                                        value: serde_json::Value::from(*v),
                                    },
                                })
                                .collect(),
                        })
                        .collect(),
                    outputs: i.outputs.clone(),
                    mr_action_counts: i.mr_action_counts.clone(),
                })
                .collect(),
            vulnerabilities: d.vulnerabilities.as_ref().map(|vs| {
                vs.iter()
                    .map(|v| RawVulnerability {
                        id: v.id.clone(),
                        detecting_groups: v
                            .detecting_groups
                            .iter()
                            .map(|g| g.iter().map(|i| i.0).collect())
                            .collect(),
                    })
                    .collect()
            }),
        }
    }
}
