//! A small generated dataset with a known optimum.
//!
//! Every page type has its own twelve content words, so two pages are either
//! identical after preprocessing or twelve tokens apart, which keeps the
//! clustering unambiguous. Two groups of inputs form the planted components:
//!
//! * a 4-cycle over blocks A1..A4 (optimum 6), plus a duplicate and two
//!   dominated inputs that the reduction must discard;
//! * a 5-cycle over blocks B1..B5 (optimum 7), plus one dominated input.
//!
//! The rest are necessary inputs (one page type reached by both GET and POST,
//! one reached through two unrelated URLs), one input made redundant by them,
//! fillers with private pages, and a zero-cost input dropped at load.

use std::collections::BTreeSet;

use serde_json::{json, Value};

use crate::dataset::{parse_dataset, Dataset};
use crate::ids::InputId;

/// Path of the bundled copy, relative to the crate root.
pub const BUNDLED_PATH: &str = "data/synthetic.json";

/// Cost of the necessary inputs plus both component optima.
pub const PLANTED_OPTIMUM: u64 = NECESSARY_COST + 6 + 7;

const NECESSARY_COST: u64 = 21 + FILLER_COST;
const FILLERS: u64 = 22;
// Σ 1 + k % 4 for k in 0..22
const FILLER_COST: u64 = 22 + 5 * 6 + 1;

fn page(kind: &str) -> String {
    let words: Vec<String> = (0..12).map(|j| format!("{kind}w{j}")).collect();
    format!(
        "<html><body><nav>Home | Login | Logout</nav><h1>{}</h1><p>The {} and the {}.</p><footer>2024</footer></body></html>",
        words[..4].join(" "),
        words[4..8].join(" "),
        words[8..].join(" ")
    )
}

fn get(kind: &str) -> (Value, String) {
    (json!({"method": "GET", "url": format!("http://shop.test/app/{kind}/view")}), page(kind))
}

fn input(id: u64, cost: u64, steps: Vec<(Value, String)>) -> Value {
    let (actions, outputs): (Vec<Value>, Vec<String>) = steps.into_iter().unzip();
    json!({
        "id": id,
        "actions": actions,
        "outputs": outputs,
        "mr_action_counts": {"MR1": cost - cost / 2, "MR2": cost / 2},
    })
}

fn cycle(prefix: &str, a: usize, b: usize) -> Vec<(Value, String)> {
    vec![get(&format!("{prefix}{a}")), get(&format!("{prefix}{b}"))]
}

/// The dataset document. Stable across calls.
pub fn synthetic_json() -> String {
    let mut inputs = Vec::new();
    // necessary inputs 1..=7: costs 2 3 4 2 5 3 2
    inputs.push(input(1, 2, vec![get("pc1"), get("pc5")]));
    inputs.push(input(2, 3, vec![get("pc3"), get("pc6")]));
    inputs.push(input(3, 4, vec![get("pc2")]));
    let form = page("pcform");
    let param = json!([{"name": "user", "type": "str", "value": "alice"}]);
    inputs.push(input(4, 2, vec![(json!({"method": "GET", "url": "http://shop.test/app/form", "params": param}), form.clone())]));
    inputs.push(input(5, 5, vec![(json!({"method": "POST", "url": "http://shop.test/app/form", "params": param}), form)]));
    let far = page("pcfar");
    inputs.push(input(6, 3, vec![(json!({"method": "GET", "url": "http://shop.test/alpha/one/two/three/four/five/six"}), far.clone())]));
    inputs.push(input(7, 2, vec![(json!({"method": "GET", "url": "http://shop.test/beta/seven/eight/nine/ten/eleven/twelve"}), far)]));
    // redundant once 1 and 2 are necessary
    inputs.push(input(8, 1, vec![get("pc1"), get("pc3")]));

    // 4-cycle: 9..=12, then a duplicate of 9 and two dominated inputs
    for (k, cost) in [3, 4, 3, 4].into_iter().enumerate() {
        inputs.push(input(9 + k as u64, cost, cycle("pa", k + 1, (k + 1) % 4 + 1)));
    }
    inputs.push(input(13, 3, cycle("pa", 1, 2)));
    inputs.push(input(14, 5, vec![get("pa1")]));
    inputs.push(input(15, 7, vec![get("pa2"), get("pa3"), get("pa4")]));

    // 5-cycle: 16..=20, then a dominated copy of 16
    for (k, cost) in [2, 3, 2, 3, 4].into_iter().enumerate() {
        inputs.push(input(16 + k as u64, cost, cycle("pb", k + 1, (k + 1) % 5 + 1)));
    }
    inputs.push(input(21, 9, cycle("pb", 1, 2)));

    for k in 0..FILLERS {
        let mut steps = vec![get(&format!("pf{k}"))];
        if k % 2 == 1 {
            steps.push(get(&format!("pg{k}")));
        }
        inputs.push(input(22 + k, 1 + k % 4, steps));
    }
    let zero = get("pzero");
    inputs.push(json!({
        "id": 22 + FILLERS,
        "actions": [zero.0],
        "outputs": [zero.1],
        "mr_action_counts": {"MR1": 0},
    }));

    let doc = json!({
        "inputs": inputs,
        "vulnerabilities": [
            {"id": "V1", "detecting_groups": [[1]]},
            {"id": "V2", "detecting_groups": [[9, 11]]},
            {"id": "V3", "detecting_groups": [[14]]},
            {"id": "V4", "detecting_groups": [[16], [20]]},
        ],
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("json value serializes");
    text.push('\n');
    text
}

pub fn synthetic_dataset() -> Dataset {
    parse_dataset(&synthetic_json()).expect("generated dataset is valid")
}

/// Inputs of the two planted components.
pub fn planted_components() -> [BTreeSet<InputId>; 2] {
    [(9..=12).map(InputId).collect(), (16..=20).map(InputId).collect()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::total_cost;

    #[test]
    fn bundled_copy_is_current() {
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join(BUNDLED_PATH);
        let generated = synthetic_json();
        if std::env::var_os("COVMIN_REGENERATE").is_some() {
            std::fs::write(&path, &generated).unwrap();
        }
        let bundled = std::fs::read_to_string(&path).unwrap();
        assert_eq!(bundled, generated, "run with COVMIN_REGENERATE=1 to refresh {BUNDLED_PATH}");
    }

    #[test]
    fn shape() {
        let d = synthetic_dataset();
        assert_eq!(d.inputs.len(), 43);
        assert_eq!(d.dropped, vec![InputId(44)]);
        let costs = d.costs();
        let necessary: BTreeSet<InputId> = (1..=7).chain(22..44).map(InputId).collect();
        assert_eq!(total_cost(&costs, &necessary), NECESSARY_COST);
    }

    #[test]
    fn pipeline_recovers_planted_structure() {
        let d = synthetic_dataset();
        let run = crate::harness::run_pipeline(&d, &crate::harness::RunConfig::default(), 1).unwrap();
        let found: Vec<BTreeSet<InputId>> = run.reduction.components.iter().map(|c| c.inputs.clone()).collect();
        assert_eq!(found, planted_components().to_vec());
        let necessary: BTreeSet<InputId> = (1..=7).chain(22..44).map(InputId).collect();
        assert_eq!(run.reduction.necessary, necessary);
        assert_eq!(run.result.total_cost, PLANTED_OPTIMUM);
        assert_eq!(run.result.vdr, Some(0.75));
    }
}
