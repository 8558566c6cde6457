#![no_main]
use libfuzzer_sys::fuzz_target;

use covmin::dataset::{build_shared_filter, Stopwords, TextPipeline};

// one page per line
fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    let pages: Vec<&str> = text.split('\n').collect();
    let filter = build_shared_filter(pages.iter().copied(), 0.8).expect("non-empty page list");
    let pipeline = TextPipeline::new(filter, Stopwords::default());
    for page in &pages {
        let doc = pipeline.process(page);
        assert!(doc.tokens.iter().all(|t| !t.is_empty()));
    }
});
