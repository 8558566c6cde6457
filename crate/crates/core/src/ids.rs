use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Identifier of an input, unique within a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InputId(pub u64);

impl fmt::Display for InputId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "in{}", self.0)
    }
}

impl From<u64> for InputId {
    fn from(v: u64) -> Self {
        InputId(v)
    }
}

/// HTTP request method of an action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Method {
    Get,
    Post,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Get => f.write_str("GET"),
            Method::Post => f.write_str("POST"),
        }
    }
}

/// Cost of every input, keyed by id.
pub type CostMap = BTreeMap<InputId, u64>;

/// Total cost of a set of inputs. Unknown ids count as zero.
pub fn total_cost<'a>(costs: &CostMap, ids: impl IntoIterator<Item = &'a InputId>) -> u64 {
    ids.into_iter().map(|id| costs.get(id).copied().unwrap_or(0)).sum()
}
