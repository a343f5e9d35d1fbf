//! Rotative decomposition over the census, with an independent derivation
//! of the fyke net edge set from the levels and liaisons.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trisym::automorphism::{cyclic_subgroups, fixed_cells, rooted_elements};
use trisym::census::generate_all;
use trisym::core_map::{parse_rs1, Cell};
use trisym::fixtures;
use trisym::fykenet::{
    analyse, build_fyke_net, compose_rotative, construct_fyke_net, decompose_rotative,
    default_fillings, fyke_params, near_from_triangles, rotation_subgroup, FaceClass,
};
use trisym::triangulation::{validate_triangulation, RootedTriangulation};

mod common;

use common::predicted_net_edges;

#[test]
fn census_rotative_roundtrip_and_net_edges() {
    let entries = generate_all(8).unwrap();
    let mut instances = 0;
    let mut kinds = BTreeSet::new();
    let mut depth_zero = 0;
    for e in &entries {
        for c0 in e.map().cells() {
            let els = rooted_elements(e.map(), c0);
            let t = RootedTriangulation::new(e.tri.clone(), c0).unwrap();
            for h in cyclic_subgroups(&els) {
                instances += 1;
                let an = analyse(t.map(), c0, &h).unwrap();
                let m = h.len();
                for g in h.iter().filter(|g| !g.is_identity()) {
                    let fixed: BTreeSet<Cell> = fixed_cells(t.map(), g).into_iter().collect();
                    assert_eq!(fixed, BTreeSet::from([c0, an.rotation.c1]));
                }
                assert_eq!(an.net_edges, predicted_net_edges(t.map(), &an));
                let dec = decompose_rotative(&t, &h).unwrap();
                for faces in dec.net.filled_orbits().values() {
                    assert_eq!(faces.len(), m);
                }
                let back = compose_rotative(&dec.net, &dec.fillings).unwrap();
                assert_eq!(back.code(), t.code());
                kinds.insert(format!("{:?}", dec.net.south_kind));
                if dec.net.depth() == 0 {
                    depth_zero += 1;
                }
            }
        }
    }
    assert!(instances > 100);
    assert!(depth_zero > 0);
    assert_eq!(kinds.len(), 2);
}

fn fixture(text: &str, root: &str) -> RootedTriangulation {
    let map = parse_rs1(text).unwrap();
    let c0 = map.parse_cell(root).unwrap();
    RootedTriangulation::new(validate_triangulation(map).unwrap(), c0).unwrap()
}

#[test]
fn fyke_net_code_survives_relabeling() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (text, root) in [
        (fixtures::OCT6, "v:1"),
        (fixtures::THREE_LEVELS, "f:1-2-3"),
        (fixtures::EDGE_POLE, "v:1"),
        (fixtures::NESTED_HEXAGON, "f:1-2-3"),
    ] {
        let t = fixture(text, root);
        let h = rotation_subgroup(t.map(), t.c0, None).unwrap();
        let code = build_fyke_net(&t, &h).unwrap().code();
        for _ in 0..50 {
            let mut perm: Vec<usize> = (0..t.map().num_vertices()).collect();
            perm.shuffle(&mut rng);
            let map = t.map().relabel(&perm);
            let c0 = t.map().relabel_cell(&map, &perm, t.c0);
            let t2 = RootedTriangulation::new(validate_triangulation(map).unwrap(), c0).unwrap();
            let h2 = rotation_subgroup(t2.map(), c0, None).unwrap();
            assert_eq!(build_fyke_net(&t2, &h2).unwrap().code(), code);
        }
    }
}

#[test]
fn nested_fixture_has_leaves() {
    let t = fixture(fixtures::THREE_LEVELS, "f:1-2-3");
    let h = rotation_subgroup(t.map(), t.c0, None).unwrap();
    let net = build_fyke_net(&t, &h).unwrap();
    assert_eq!(net.faces_of(FaceClass::Leaf).len(), 3);
    assert_eq!(net.faces_of(FaceClass::South).len(), 1);
}

#[test]
fn census_nets_rebuilt_from_parameters() {
    let entries = generate_all(8).unwrap();
    let mut realised = 0;
    let mut failures = BTreeMap::new();
    for e in &entries {
        for c0 in e.map().cells() {
            let els = rooted_elements(e.map(), c0);
            for h in cyclic_subgroups(&els) {
                let an = analyse(e.map(), c0, &h).unwrap();
                let p = fyke_params(e.map(), &an).unwrap();
                let net = construct_fyke_net(&p).unwrap_or_else(|err| panic!("{}: {:?}", err, p));
                assert_eq!(net.code(), an.net.code());
                match compose_rotative(&net, &default_fillings(&net).unwrap()) {
                    Ok(t) => {
                        let h2 = rotation_subgroup(t.map(), t.c0, Some(h.len())).unwrap();
                        assert_eq!(build_fyke_net(&t, &h2).unwrap().code(), net.code());
                        realised += 1;
                    }
                    Err(err) => *failures.entry(err.to_string()).or_insert(0) += 1,
                }
            }
        }
    }
    assert!(failures.is_empty(), "{:?}", failures);
    assert!(realised > 100);
}

#[test]
fn vertex_north_face_south_regression() {
    let t = fixture(fixtures::FACE_POLE, "v:1");
    let h = rotation_subgroup(t.map(), t.c0, None).unwrap();
    assert_eq!(h.len(), 3);
    assert_eq!(rooted_elements(t.map(), t.c0).len(), 3);
    let net = build_fyke_net(&t, &h).unwrap();
    let frozen = parse_rs1(fixtures::FACE_POLE_NET).unwrap();
    assert_eq!(net.map.canonical_code(), frozen.canonical_code());
    assert!(matches!(net.north, Cell::Vertex(_)));
    assert!(matches!(net.south, Cell::Face(_)));
    let counts: Vec<usize> = [
        FaceClass::North,
        FaceClass::Leaf,
        FaceClass::Segment,
        FaceClass::PseudoAntarctic,
        FaceClass::South,
    ]
    .iter()
    .map(|&c| net.faces_of(c).len())
    .collect();
    assert_eq!(counts, vec![6, 3, 12, 0, 1]);
}

/// Segment fillings fanned from the western source contain the edge
/// between the two sources.
#[test]
fn order_two_edge_between_sources_rejected() {
    let entries = generate_all(8).unwrap();
    let mut seen = 0;
    for e in &entries {
        for c0 in e.map().cells() {
            let els = rooted_elements(e.map(), c0);
            for h in cyclic_subgroups(&els).into_iter().filter(|h| h.len() == 2) {
                let t = RootedTriangulation::new(e.tri.clone(), c0).unwrap();
                let dec = decompose_rotative(&t, &h).unwrap();
                let Some((orbit, mk, len)) =
                    dec.net.filled_orbits().into_iter().find_map(|(o, fs)| {
                        let mk = dec.net.faces[fs[0]].markers?;
                        mk.order2.then(|| (o, mk, dec.net.map.face_len(fs[0])))
                    })
                else {
                    continue;
                };
                let fan: Vec<[usize; 3]> = (1..len - 1).map(|b| [0, b, b + 1]).collect();
                let n = near_from_triangles(len, 0, &fan).unwrap();
                assert!(n.map().has_edge(n.outer()[0], n.outer()[mk.w2 + 1]));
                let mut fillings = dec.fillings.clone();
                fillings.insert(orbit, n);
                assert!(matches!(
                    compose_rotative(&dec.net, &fillings),
                    Err(trisym::error::Error::TwoLayeredViolation(_))
                ));
                seen += 1;
            }
        }
    }
    assert!(seen > 0);
}
