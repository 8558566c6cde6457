#![no_main]
use libfuzzer_sys::fuzz_target;

use covmin::dataset::Url;
use covmin::distance::url_distance;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(u) = Url::parse(text) {
        assert!(u.len() >= 2);
        let again = Url::parse(&u.to_string()).expect("display output parses");
        assert_eq!(again, u);
        assert_eq!(url_distance(&u, &again), 0);
    }
});
