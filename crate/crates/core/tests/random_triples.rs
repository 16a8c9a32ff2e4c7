mod common;

use motherbody::quaddiff::build_theta;
use motherbody::verify::DEFAULT_SEED;

#[test]
fn invariants_on_random_triples() {
    let mut realised = 0;
    for [p, q, r] in common::random_triples(DEFAULT_SEED, 20) {
        let Ok(qd) = build_theta(&p, &q, &r) else { continue };
        if let Ok(inv) = common::invariants(&qd) {
            assert!(inv.holds(), "{:?} {:?} {:?}: {inv:?}", p.coeffs(), q.coeffs(), r.coeffs());
            realised += inv.realised;
        }
    }
    assert!(realised > 0);
}
