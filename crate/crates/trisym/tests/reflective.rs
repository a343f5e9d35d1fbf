//! Reflective decomposition over the census.

use trisym::automorphism::{rooted_group_of, GroupType};
use trisym::census::generate_all;
use trisym::girdle::{compose_reflective, decompose_reflective_both};
use trisym::triangulation::RootedTriangulation;

#[test]
fn reflective_roundtrip_and_orientation_count() {
    let entries = generate_all(8).unwrap();
    let mut triples = 0;
    for e in &entries {
        for c0 in e.map().cells() {
            let g = rooted_group_of(e.map(), c0).unwrap();
            let t = RootedTriangulation::new(e.tri.clone(), c0).unwrap();
            for phi in g.reflections() {
                triples += 1;
                let both = decompose_reflective_both(&t, phi).unwrap();
                for (gd, n) in &both {
                    assert_eq!(compose_reflective(gd, n).unwrap().code(), t.code());
                }
                let same =
                    (both[0].0.code(), both[0].1.code()) == (both[1].0.code(), both[1].1.code());
                match g.group_type {
                    GroupType::Dih(n) if n % 2 == 0 => assert!(same),
                    _ => assert!(!same, "{:?}", g.group_type),
                }
            }
        }
    }
    assert!(triples > 0);
}
