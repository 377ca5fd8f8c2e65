use std::time::Instant;

use tizx::ser_bound::{derive_region_table, published_region_table};
use tizx::zx_modem::ZxCodebook;

#[test]
fn enumeration_reproduces_published_patterns() {
    let start = Instant::now();
    for m_rx in [2, 3] {
        let derived = derive_region_table(&ZxCodebook::for_m_rx(m_rx).unwrap()).unwrap();
        let published = published_region_table(m_rx).unwrap();
        assert_eq!(derived.mu_signs, published.mu_signs);
        assert_eq!(derived.pattern_set(), published.pattern_set());
        assert_eq!(derived.rows.len(), 1 << (derived.dim - 1));
    }
    assert!(start.elapsed().as_secs_f64() < 1.0);
}

#[test]
fn published_regions_differ_in_one_row_only() {
    let derived = derive_region_table(&ZxCodebook::for_m_rx(3).unwrap()).unwrap();
    assert_eq!(derived.region_set(), published_region_table(3).unwrap().region_set());

    // the printed table integrates +-+-+ for the b7 pattern +--+-
    let derived = derive_region_table(&ZxCodebook::for_m_rx(2).unwrap()).unwrap();
    let published = published_region_table(2).unwrap();
    let diff: Vec<_> = published.region_set().symmetric_difference(&derived.region_set()).cloned().collect();
    assert_eq!(diff, vec![(6, vec![1, -1, -1, 1, -1]), (6, vec![1, -1, 1, -1, 1])]);
}
