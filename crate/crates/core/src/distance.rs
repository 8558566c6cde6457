//! Dissimilarity functions over outputs, URLs, parameters and actions.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::dataset::{Action, Param, ParamValue, TokenDoc, Url};

/// Maps `[0, ∞)` onto `[0, 1)` as `x / (x + 1)`, preserving order.
///
/// Returns `None` for negative or NaN input.
pub fn normalize(x: f64) -> Option<f64> {
    if x >= 0.0 {
        Some(if x.is_infinite() { 1.0 - f64::EPSILON } else { x / (x + 1.0) })
    } else {
        None
    }
}

fn norm(x: f64) -> f64 {
    x / (x + 1.0)
}

/// Unit-cost insert/delete/substitute edit distance.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Character-level edit distance between two strings.
pub fn levenshtein_str(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein(&a, &b)
}

/// Bag (multiset) distance: `max(|A − B|, |B − A|)`. A lower bound of
/// [`levenshtein`], computed in linear time.
pub fn bag_distance<T: Eq + Hash>(a: &[T], b: &[T]) -> usize {
    let mut balance: HashMap<&T, isize> = HashMap::with_capacity(a.len() + b.len());
    for x in a {
        *balance.entry(x).or_default() += 1;
    }
    for y in b {
        *balance.entry(y).or_default() -= 1;
    }
    let (mut only_a, mut only_b) = (0usize, 0usize);
    for v in balance.values() {
        if *v > 0 {
            only_a += *v as usize;
        } else {
            only_b += (-*v) as usize;
        }
    }
    only_a.max(only_b)
}

/// Number of words separating two URLs from their longest common prefix.
pub fn url_distance(u1: &Url, u2: &Url) -> usize {
    let common = u1.words().iter().zip(u2.words()).take_while(|(a, b)| a == b).count();
    u1.len() + u2.len() - 2 * common
}

/// Distance between two parameter values; `None` when kinds differ.
pub fn param_value_distance(v1: &ParamValue, v2: &ParamValue) -> Option<u64> {
    match (v1, v2) {
        (ParamValue::Text(a), ParamValue::Text(b)) => Some(levenshtein_str(a, b) as u64),
        (ParamValue::Int(a), ParamValue::Int(b)) => Some(a.abs_diff(*b)),
        _ => None,
    }
}

/// Distance between residual parameter lists, in `[0, 1]`.
///
/// Lists match when they have the same length and the same kind at every
/// position (names are ignored). Matching lists yield
/// `normalize(Σ normalize(value distance))` which stays below 1; anything
/// else yields exactly 1.
pub fn param_distance(p1: &[Param], p2: &[Param]) -> f64 {
    if p1.len() != p2.len() {
        return 1.0;
    }
    let mut sum = 0.0;
    for (a, b) in p1.iter().zip(p2) {
        match param_value_distance(&a.value, &b.value) {
            Some(d) => sum += norm(d as f64),
            None => return 1.0,
        }
    }
    norm(sum)
}

/// Action dissimilarity: integral part from URLs, fractional part from
/// residual parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionDistance {
    pub value: f64,
    pub url_part: usize,
    pub param_part: f64,
}

pub fn action_distance(a1: &Action, a2: &Action) -> ActionDistance {
    let url_part = url_distance(&a1.url, &a2.url);
    let param_part = param_distance(&a1.params, &a2.params);
    ActionDistance { value: url_part as f64 + param_part, url_part, param_part }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputMetric {
    #[default]
    #[serde(alias = "levenshtein")]
    Lev,
    Bag,
}

/// Word-level distance between two token documents.
pub fn output_distance(d1: &TokenDoc, d2: &TokenDoc, metric: OutputMetric) -> usize {
    match metric {
        OutputMetric::Lev => levenshtein(&d1.tokens, &d2.tokens),
        OutputMetric::Bag => bag_distance(&d1.tokens, &d2.tokens),
    }
}
