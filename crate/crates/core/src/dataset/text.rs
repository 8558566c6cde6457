//! Page text to token documents.

use std::collections::{BTreeSet, HashSet};

use rust_stemmers::{Algorithm, Stemmer};

use super::{DatasetError, Stopwords};

/// Preprocessed page text: lowercase stemmed word tokens in page order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct TokenDoc {
    pub tokens: Vec<String>,
}

impl TokenDoc {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Tokens shared by so many pages that they cannot characterize any of them
/// (menus, footers, version banners).
#[derive(Debug, Clone, PartialEq)]
pub struct SharedFilter {
    pub shared_tokens: BTreeSet<String>,
    pub document_frequency_threshold: f64,
}

impl SharedFilter {
    pub fn empty() -> Self {
        SharedFilter { shared_tokens: BTreeSet::new(), document_frequency_threshold: 1.0 }
    }

    pub fn contains(&self, token: &str) -> bool {
        self.shared_tokens.contains(token)
    }
}

/// Drops markup, lowercases, and splits on non-alphanumeric characters.
///
/// Everything between `<` and the next `>` is discarded; an unclosed `<`
/// discards the rest of the page.
pub fn tokenize(raw: &str) -> Vec<String> {
    let mut text = String::with_capacity(raw.len());
    let mut in_tag = false;
    for c in raw.chars() {
        match (in_tag, c) {
            (false, '<') => {
                in_tag = true;
                text.push(' ');
            }
            (true, '>') => in_tag = false,
            (false, c) => text.extend(c.to_lowercase()),
            (true, _) => {}
        }
    }
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Collects the tokens whose document frequency reaches `threshold`.
pub fn build_shared_filter<'a, I>(docs: I, threshold: f64) -> Result<SharedFilter, DatasetError>
where
    I: IntoIterator<Item = &'a str>,
{
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(DatasetError::BadThreshold(threshold));
    }
    let mut doc_count = 0usize;
    let mut frequency: std::collections::HashMap<String, usize> = Default::default();
    for doc in docs {
        doc_count += 1;
        let distinct: HashSet<String> = tokenize(doc).into_iter().collect();
        for t in distinct {
            *frequency.entry(t).or_default() += 1;
        }
    }
    if doc_count == 0 {
        return Err(DatasetError::NoDocuments);
    }
    let shared_tokens = frequency
        .into_iter()
        .filter(|(_, n)| *n as f64 / doc_count as f64 >= threshold)
        .map(|(t, _)| t)
        .collect();
    Ok(SharedFilter { shared_tokens, document_frequency_threshold: threshold })
}

/// Shared-token filter, stopword list and stemmer bundled together.
pub struct TextPipeline {
    filter: SharedFilter,
    stopwords: Stopwords,
    stemmer: Stemmer,
}

impl TextPipeline {
    pub fn new(filter: SharedFilter, stopwords: Stopwords) -> Self {
        TextPipeline { filter, stopwords, stemmer: Stemmer::create(Algorithm::English) }
    }

    pub fn filter(&self) -> &SharedFilter {
        &self.filter
    }

    pub fn process(&self, raw: &str) -> TokenDoc {
        let tokens = tokenize(raw)
            .into_iter()
            .filter(|t| !self.filter.contains(t))
            .filter(|t| !self.stopwords.contains(t))
            .filter(|t| !t.chars().all(|c| c.is_numeric()))
            .map(|t| self.stemmer.stem(&t).into_owned())
            .filter(|t| !t.is_empty())
            .collect();
        TokenDoc { tokens }
    }
}

/// Runs the full pipeline with the default stopword list.
pub fn preprocess_output(raw: &str, filter: &SharedFilter) -> TokenDoc {
    TextPipeline::new(filter.clone(), Stopwords::default()).process(raw)
}
