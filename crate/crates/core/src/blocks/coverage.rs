use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::BlocksError;
use crate::ids::{InputId, Method};

/// Index of an output class (a cluster of page texts).
pub type OutputClassId = usize;

/// An action subclass: the actions of one output class and method that were
/// clustered together.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BlockId {
    pub output_class: OutputClassId,
    pub method: Method,
    #[serde(rename = "subclass")]
    pub subclass_index: usize,
}

impl BlockId {
    pub fn new(output_class: OutputClassId, method: Method, subclass_index: usize) -> Self {
        BlockId { output_class, method, subclass_index }
    }

    /// Convenience for hand-written instances where only distinctness
    /// matters: `simple(n)` is `(n, GET, 0)`.
    pub fn simple(n: usize) -> Self {
        BlockId::new(n, Method::Get, 0)
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.output_class, self.method, self.subclass_index)
    }
}

/// `Cover(in)` for every input and its inverse `Inputs(bl)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CoverageMap {
    cover: BTreeMap<InputId, BTreeSet<BlockId>>,
    inputs_of: BTreeMap<BlockId, BTreeSet<InputId>>,
}

static EMPTY_BLOCKS: BTreeSet<BlockId> = BTreeSet::new();
static EMPTY_INPUTS: BTreeSet<InputId> = BTreeSet::new();

impl CoverageMap {
    /// Builds both directions from `Cover(in)`. Every input must cover at
    /// least one block.
    pub fn from_cover(cover: BTreeMap<InputId, BTreeSet<BlockId>>) -> Result<Self, BlocksError> {
        let mut inputs_of: BTreeMap<BlockId, BTreeSet<InputId>> = BTreeMap::new();
        for (input, blocks) in &cover {
            if blocks.is_empty() {
                return Err(BlocksError::Invalid(format!("input {} covers no block", input.0)));
            }
            for bl in blocks {
                inputs_of.entry(*bl).or_default().insert(*input);
            }
        }
        Ok(CoverageMap { cover, inputs_of })
    }

    /// Shorthand for tests and fixtures: `(input id, [block numbers])`, with
    /// blocks built by [`BlockId::simple`].
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (u64, &'a [usize])>) -> Result<Self, BlocksError> {
        let cover = pairs
            .into_iter()
            .map(|(i, bls)| (InputId(i), bls.iter().map(|&b| BlockId::simple(b)).collect()))
            .collect();
        Self::from_cover(cover)
    }

    pub fn cover(&self, input: InputId) -> &BTreeSet<BlockId> {
        self.cover.get(&input).unwrap_or(&EMPTY_BLOCKS)
    }

    pub fn inputs_of(&self, block: &BlockId) -> &BTreeSet<InputId> {
        self.inputs_of.get(block).unwrap_or(&EMPTY_INPUTS)
    }

    pub fn inputs(&self) -> impl Iterator<Item = InputId> + '_ {
        self.cover.keys().copied()
    }

    pub fn blocks(&self) -> impl Iterator<Item = &BlockId> + '_ {
        self.inputs_of.keys()
    }

    pub fn num_inputs(&self) -> usize {
        self.cover.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.inputs_of.len()
    }

    pub fn contains_input(&self, input: InputId) -> bool {
        self.cover.contains_key(&input)
    }

    /// `Cover(I) = ⋃ Cover(in)`.
    pub fn cover_of<'a>(&self, inputs: impl IntoIterator<Item = &'a InputId>) -> BTreeSet<BlockId> {
        inputs.into_iter().flat_map(|i| self.cover(*i).iter().copied()).collect()
    }

    pub fn all_blocks(&self) -> BTreeSet<BlockId> {
        self.inputs_of.keys().copied().collect()
    }

    /// The map restricted to `inputs`; blocks no longer covered disappear.
    pub fn restrict(&self, inputs: &BTreeSet<InputId>) -> CoverageMap {
        let cover = self
            .cover
            .iter()
            .filter(|(i, _)| inputs.contains(i))
            .map(|(i, b)| (*i, b.clone()))
            .collect();
        Self::from_cover(cover).expect("restriction keeps non-empty covers")
    }

    /// Serializes as
    /// `{"blocks":[{"id","output_class","method","subclass"}],"cover":{"<input>":[ids]}}`
    /// with block ids numbered in block order.
    pub fn to_json(&self) -> String {
        let index: BTreeMap<BlockId, usize> =
            self.inputs_of.keys().enumerate().map(|(i, b)| (*b, i)).collect();
        let file = CoverageFile {
            blocks: index
                .iter()
                .map(|(b, &id)| BlockEntry {
                    id,
                    output_class: b.output_class,
                    method: b.method,
                    subclass: b.subclass_index,
                })
                .collect(),
            cover: self
                .cover
                .iter()
                .map(|(i, bls)| (i.0.to_string(), bls.iter().map(|b| index[b]).collect()))
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("coverage serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, BlocksError> {
        let file: CoverageFile = serde_json::from_str(text)?;
        let mut by_id = BTreeMap::new();
        for e in &file.blocks {
            let bl = BlockId::new(e.output_class, e.method, e.subclass);
            if by_id.insert(e.id, bl).is_some() {
                return Err(BlocksError::Invalid(format!("duplicate block id {}", e.id)));
            }
        }
        if by_id.values().collect::<BTreeSet<_>>().len() != by_id.len() {
            return Err(BlocksError::Invalid("two block ids name the same block".into()));
        }
        let mut cover = BTreeMap::new();
        for (key, ids) in &file.cover {
            let input: u64 = key
                .parse()
                .map_err(|_| BlocksError::Invalid(format!("bad input id {key:?}")))?;
            let blocks = ids
                .iter()
                .map(|id| {
                    by_id
                        .get(id)
                        .copied()
                        .ok_or_else(|| BlocksError::Invalid(format!("unknown block id {id}")))
                })
                .collect::<Result<BTreeSet<_>, _>>()?;
            cover.insert(InputId(input), blocks);
        }
        let map = Self::from_cover(cover)?;
        if map.num_blocks() != by_id.len() {
            return Err(BlocksError::Invalid("some listed blocks are covered by no input".into()));
        }
        Ok(map)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoverageFile {
    blocks: Vec<BlockEntry>,
    cover: BTreeMap<String, Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockEntry {
    id: usize,
    output_class: usize,
    method: Method,
    #[serde(default)]
    subclass: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CoverageMap {
        CoverageMap::from_pairs([(1, &[0, 1][..]), (2, &[1, 2][..]), (5, &[2][..])]).unwrap()
    }

    #[test]
    fn both_directions_agree() {
        let cm = sample();
        for input in cm.inputs() {
            for bl in cm.cover(input) {
                assert!(cm.inputs_of(bl).contains(&input));
            }
        }
        for bl in cm.blocks() {
            for input in cm.inputs_of(bl) {
                assert!(cm.cover(*input).contains(bl));
            }
        }
        assert_eq!(cm.inputs_of(&BlockId::simple(1)).len(), 2);
    }

    #[test]
    fn json_round_trip() {
        let cm = sample();
        let text = cm.to_json();
        assert_eq!(CoverageMap::from_json(&text).unwrap(), cm);
    }

    #[test]
    fn rejects_empty_cover_and_dangling_ids() {
        assert!(CoverageMap::from_pairs([(1, &[][..])]).is_err());
        let bad = r#"{"blocks":[{"id":0,"output_class":0,"method":"GET"}],"cover":{"1":[3]}}"#;
        assert!(CoverageMap::from_json(bad).is_err());
        let unused = r#"{"blocks":[{"id":0,"output_class":0,"method":"GET"},{"id":1,"output_class":1,"method":"GET"}],"cover":{"1":[0]}}"#;
        assert!(CoverageMap::from_json(unused).is_err());
    }

    #[test]
    fn cover_of_is_union() {
        let cm = sample();
        let a = [InputId(1)];
        let b = [InputId(5)];
        let both = [InputId(1), InputId(5)];
        let mut union = cm.cover_of(&a);
        union.extend(cm.cover_of(&b));
        assert_eq!(cm.cover_of(&both), union);
    }
}
