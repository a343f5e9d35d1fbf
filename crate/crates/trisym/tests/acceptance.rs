//! Acceptance criteria 1-9, one PASS/FAIL line each.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trisym::automorphism::{
    cyclic_subgroups, dihedral_subgroups, fixed_cells, rooted_elements, rooted_group_of, GroupType,
};
use trisym::census::{
    code_set, counts_per_v, generate_with, roundtrip_suite_from, verify_rooted_counts_from,
    CensusEntry, Schedule, FAULT_CHORD, FAULT_DOUBLE_EDGE, FAULT_LENGTH,
};
use trisym::core_map::{parse_rs1, Cell};
use trisym::fixtures;
use trisym::fykenet::{analyse, build_fyke_net, find_spindle, rotation_subgroup, TieBreak};
use trisym::girdle::{compose_reflective, decompose_reflective_both, RootDim};
use trisym::skeleton::{decompose_dihedral_both, PoleCase, Skeleton};
use trisym::triangulation::{count_rooted, validate_triangulation, CountParams, RootedTriangulation};

mod common;

const V_MAX: usize = 9;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rooted(e: &CensusEntry, c0: Cell) -> RootedTriangulation {
    RootedTriangulation::new(e.tri.clone(), c0).unwrap()
}

/// `2 (2m+3)! (4n+2m+1)! / ((m+2)! m! n! (3n+2m+3)!)` by plain factorials.
fn formula_oracle(n: u64, m: u64) -> BigUint {
    let f = |k: u64| (1..=k).fold(BigUint::from(1u32), |a, x| a * x);
    let num = BigUint::from(2u32) * f(2 * m + 3) * f(4 * n + 2 * m + 1);
    let den = f(m + 2) * f(m) * f(n) * f(3 * n + 2 * m + 3);
    assert_eq!(&num % &den, BigUint::from(0u32));
    num / den
}

fn criterion_1(census: &[CensusEntry]) -> Outcome {
    let want = [1u32, 1, 3, 13, 68, 399, 2530];
    for (n, &w) in want.iter().enumerate() {
        let got = count_rooted(CountParams { n: n as u64, m: 0 });
        ensure(got == BigUint::from(w), || format!("A({},0) = {}, want {}", n, got, w))?;
        ensure(got == formula_oracle(n as u64, 0), || format!("A({},0) differs from factorials", n))?;
    }
    // census side: sum over T of 4E/|Aut T| per vertex count
    let mut sums: BTreeMap<usize, BigUint> = BTreeMap::new();
    for e in census {
        let aut = trisym::automorphism::full_group(e.map()).len();
        *sums.entry(e.v).or_default() += BigUint::from(4 * e.e / aut);
        ensure((4 * e.e) % aut == 0, || "4E not divisible by |Aut|".into())?;
    }
    for (v, s) in &sums {
        let f = count_rooted(CountParams { n: *v as u64 - 3, m: 0 });
        ensure(*s == f, || format!("V={}: census {} != formula {}", v, s, f))?;
    }
    ensure(verify_rooted_counts_from(census).iter().all(|r| r.equal), || "report disagrees".into())?;
    let row: Vec<String> = sums.iter().map(|(v, s)| format!("V{}={}", v, s)).collect();
    Ok(format!("A(n,0) n=0..6 = {:?}; census sums {}", want, row.join(" ")))
}

fn criterion_2(census: &[CensusEntry]) -> Outcome {
    let other = generate_with(V_MAX, Schedule::ParallelReversed).map_err(|e| e.to_string())?;
    let a: Vec<usize> = counts_per_v(census).values().copied().collect();
    let b: Vec<usize> = counts_per_v(&other).values().copied().collect();
    ensure(a == vec![1, 2, 5, 14, 50], || format!("counts {:?}", a))?;
    ensure(a == b, || format!("schedules differ: {:?} vs {:?}", a, b))?;
    ensure(code_set(census) == code_set(&other), || "code sets differ".into())?;
    for e in census {
        ensure(e.e == 3 * e.v - 6 && e.f == 2 * e.v - 4, || "Euler counts".into())?;
    }
    Ok(format!("per-V counts {:?} under both schedules", a))
}

fn criterion_3(census: &[CensusEntry]) -> Outcome {
    let mut roots = 0;
    let mut tally: BTreeMap<String, usize> = BTreeMap::new();
    for e in census {
        let m = e.map();
        for c0 in m.cells() {
            roots += 1;
            let d = m.degree(c0).unwrap();
            let els = rooted_elements(m, c0);
            let refl = els.iter().filter(|g| g.is_reflection()).count();
            let rot = els.len() - refl;
            let gt = rooted_group_of(m, c0).map_err(|e| e.to_string())?.group_type;
            // independent reading from the element counts
            let ok = match gt {
                GroupType::Trivial => els.len() == 1,
                GroupType::Z2Reflection => rot == 1 && refl == 1,
                GroupType::Z(k) => refl == 0 && rot == k && k >= 2 && d % k == 0,
                GroupType::Dih(n) => refl == n && rot == n && n >= 2 && d % n == 0,
            };
            ensure(ok, || format!("{} at {}: {} with {} rotations, {} reflections", code_hex(e), m.cell_label(c0), gt, rot, refl))?;
            *tally.entry(gt.to_string()).or_default() += 1;
        }
    }
    Ok(format!("{} roots, no violations; {:?}", roots, tally))
}

fn code_hex(e: &CensusEntry) -> String {
    trisym::core_map::code_hex(&e.code)
}

fn criterion_4(census: &[CensusEntry]) -> Outcome {
    let mut checked = 0;
    for e in census {
        let m = e.map();
        for c0 in m.cells() {
            let inc = m.incident_cells_cyclic(c0).unwrap();
            for g in rooted_elements(m, c0).iter().filter(|g| !g.is_identity()) {
                checked += 1;
                let fixed = fixed_cells(m, g);
                ensure(fixed.iter().any(|&c| c != c0), || format!("{} at {} fixes only the root", code_hex(e), m.cell_label(c0)))?;
                if g.is_reflection() {
                    let pos: Vec<usize> = (0..inc.len()).filter(|&i| g.fixes(m, inc[i])).collect();
                    ensure(pos.len() == 2 && pos[1] - pos[0] == inc.len() / 2, || {
                        format!("{} at {}: reflection fixes incident positions {:?} of {}", code_hex(e), m.cell_label(c0), pos, inc.len())
                    })?;
                }
            }
        }
    }
    Ok(format!("{} non-identity rooted automorphisms", checked))
}

fn criterion_5(census: &[CensusEntry]) -> Outcome {
    let mut triples = 0;
    for e in census {
        for c0 in e.map().cells() {
            let g = rooted_group_of(e.map(), c0).unwrap();
            let t = rooted(e, c0);
            for phi in g.reflections() {
                triples += 1;
                let both = decompose_reflective_both(&t, phi).map_err(|x| x.to_string())?;
                for (gd, n) in &both {
                    let back = compose_reflective(gd, n).map_err(|x| x.to_string())?;
                    ensure(back.code() == t.code(), || "reflective roundtrip differs".into())?;
                }
                let same = (both[0].0.code(), both[0].1.code()) == (both[1].0.code(), both[1].1.code());
                let want_same = matches!(g.group_type, GroupType::Dih(n) if n % 2 == 0);
                ensure(same == want_same, || format!("{}: decompositions coincide = {}", g.group_type, same))?;
            }
        }
    }
    Ok(format!("{} (T, c0, reflection) triples", triples))
}

fn fixture(text: &str, root: &str) -> RootedTriangulation {
    let map = parse_rs1(text).unwrap();
    let c0 = map.parse_cell(root).unwrap();
    RootedTriangulation::new(validate_triangulation(map).unwrap(), c0).unwrap()
}

fn criterion_6(census: &[CensusEntry], rt: &trisym::census::RoundtripReport) -> Outcome {
    ensure(rt.rotative.failures.is_empty(), || format!("{:?}", &rt.rotative.failures[..rt.rotative.failures.len().min(5)]))?;
    let expected: usize = census
        .iter()
        .map(|e| {
            e.map()
                .cells()
                .into_iter()
                .map(|c| cyclic_subgroups(&rooted_elements(e.map(), c)).len())
                .sum::<usize>()
        })
        .sum();
    ensure(rt.rotative.instances == expected && expected > 0, || "not every cyclic subgroup was run".into())?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let fx = [
        (fixtures::OCT6, "v:1"),
        (fixtures::THREE_LEVELS, "f:1-2-3"),
        (fixtures::EDGE_POLE, "v:1"),
        (fixtures::NESTED_HEXAGON, "f:1-2-3"),
        (fixtures::FACE_POLE, "v:1"),
    ];
    for (text, root) in fx {
        let t = fixture(text, root);
        let h = rotation_subgroup(t.map(), t.c0, None).map_err(|e| e.to_string())?;
        let code = build_fyke_net(&t, &h).map_err(|e| e.to_string())?.code();
        for _ in 0..50 {
            let mut perm: Vec<usize> = (0..t.map().num_vertices()).collect();
            perm.shuffle(&mut rng);
            let map = t.map().relabel(&perm);
            let c0 = t.map().relabel_cell(&map, &perm, t.c0);
            let t2 = RootedTriangulation::new(validate_triangulation(map).unwrap(), c0).unwrap();
            let h2 = rotation_subgroup(t2.map(), c0, None).unwrap();
            ensure(build_fyke_net(&t2, &h2).unwrap().code() == code, || "fyke net code changed under relabelling".into())?;
        }
    }
    let t = fixture(fixtures::NESTED_HEXAGON, "f:1-2-3");
    let h = rotation_subgroup(t.map(), t.c0, Some(3)).unwrap();
    let a = find_spindle(&t, &h, TieBreak::Smallest).map_err(|e| e.to_string())?;
    let b = find_spindle(&t, &h, TieBreak::Largest).map_err(|e| e.to_string())?;
    ensure(a.segment_codes() != b.segment_codes(), || "the two spindles have isomorphic fillings".into())?;
    ensure(a.paths != b.paths, || "spindles coincide".into())?;
    Ok(format!(
        "{} cyclic instances; 5 fixtures x 50 relabellings; two spindles on the three-fold fixture",
        rt.rotative.instances
    ))
}

fn criterion_7(census: &[CensusEntry]) -> Outcome {
    let mut n = 0;
    for e in census {
        for c0 in e.map().cells() {
            for h in cyclic_subgroups(&rooted_elements(e.map(), c0)) {
                n += 1;
                let an = analyse(e.map(), c0, &h).map_err(|x| x.to_string())?;
                ensure(an.net_edges == common::predicted_net_edges(e.map(), &an), || {
                    format!("{} at {}: fyke net edges differ", code_hex(e), e.map().cell_label(c0))
                })?;
            }
        }
    }
    Ok(format!("{} rotative instances", n))
}

/// Component sizes (in edges) of the edges shared by the closures of two
/// adjacent meridians, pole edges left out, computed on the host map.
fn shared_components(t: &RootedTriangulation, sk: &Skeleton, i: usize) -> Vec<usize> {
    let m = t.map();
    let closure = |j: usize| -> BTreeSet<(usize, usize)> {
        let mut out = BTreeSet::new();
        for &c in &sk.meridians[j].central {
            for e in sk.map.cell_edges(c) {
                let (a, b) = sk.map.edge_ends(e);
                let (a, b) = (sk.origin[a], sk.origin[b]);
                out.insert((a.min(b), a.max(b)));
            }
        }
        out
    };
    let mut poles = BTreeSet::new();
    for c in [sk.north, sk.south] {
        for e in sk.map.cell_edges(c) {
            let (a, b) = sk.map.edge_ends(e);
            let (a, b) = (sk.origin[a], sk.origin[b]);
            poles.insert((a.min(b), a.max(b)));
        }
    }
    let m2 = 2 * sk.n;
    let shared: Vec<(usize, usize)> = closure(i)
        .intersection(&closure((i + 1) % m2))
        .filter(|e| !poles.contains(e))
        .copied()
        .collect();
    let mut parent: Vec<usize> = (0..m.num_vertices()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for &(a, b) in &shared {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra] = rb;
    }
    let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for &(a, _) in &shared {
        *sizes.entry(find(&mut parent, a)).or_default() += 1;
    }
    let mut v: Vec<usize> = sizes.into_values().collect();
    v.sort();
    v
}

fn criterion_8(census: &[CensusEntry], rt: &trisym::census::RoundtripReport) -> Outcome {
    ensure(rt.dihedral.failures.is_empty(), || format!("{:?}", &rt.dihedral.failures[..rt.dihedral.failures.len().min(5)]))?;
    let mut n = 0;
    let mut cases: BTreeSet<String> = BTreeSet::new();
    for e in census {
        for c0 in e.map().cells() {
            let t = rooted(e, c0);
            for h in dihedral_subgroups(&rooted_elements(e.map(), c0)) {
                n += 1;
                for (sk, _) in decompose_dihedral_both(&t, &h).map_err(|x| x.to_string())? {
                    for (case, pole) in [(sk.north_case, sk.north), (sk.south_case, sk.south)] {
                        let dim = RootDim::of(pole);
                        let ok = match case {
                            PoleCase::VertexDisjoint | PoleCase::VertexShared(_) => dim == RootDim::Vertex,
                            PoleCase::Edge => dim == RootDim::Edge && sk.n == 2,
                            PoleCase::FaceDisjoint | PoleCase::FaceShared(_) => dim == RootDim::Face && sk.n == 3,
                        };
                        ensure(ok, || format!("pole case {:?} at a {:?} pole with n = {}", case, dim, sk.n))?;
                        ensure(!matches!(case, PoleCase::VertexShared(0) | PoleCase::FaceShared(0)), || "shared length 0".into())?;
                        cases.insert(format!("{:?}", case));
                    }
                    let first = shared_components(&t, &sk, 0);
                    for i in 1..2 * sk.n {
                        ensure(shared_components(&t, &sk, i) == first, || "adjacent meridian pairs touch differently".into())?;
                    }
                    // touching paths are among the shared components
                    for &k in sk.touching_lengths() {
                        ensure(k == 0 || first.contains(&k), || format!("touching length {} not found", k))?;
                    }
                }
            }
        }
    }
    ensure(rt.dihedral.instances == n && n > 0, || "not every dihedral subgroup was run".into())?;
    Ok(format!("{} dihedral instances; pole cases {:?}", n, cases))
}

fn criterion_9(rt: &trisym::census::RoundtripReport) -> Outcome {
    let f = &rt.faults;
    ensure(f.unexpected.is_empty(), || format!("{:?}", &f.unexpected[..f.unexpected.len().min(5)]))?;
    let chord = f.count(FAULT_CHORD, "ChordViolation") + f.count(FAULT_CHORD, "TwoLayeredViolation");
    let length = f.count(FAULT_LENGTH, "LengthMismatch");
    let double = f.count(FAULT_DOUBLE_EDGE, "DoubleEdgeCreated");
    ensure(
        f.count(FAULT_CHORD, "ChordViolation") > 0 && f.count(FAULT_CHORD, "TwoLayeredViolation") > 0,
        || "chord faults not exercised in every mode".into(),
    )?;
    ensure(length > 0 && double > 0, || "fault kind not exercised".into())?;
    Ok(format!(
        "same-side chord {} rejected, off-by-one length {} rejected, double edge {} rejected; no panics",
        chord, length, double
    ))
}

fn main() {
    let start = Instant::now();
    let census = trisym::census::generate_all(V_MAX).expect("census");
    let rt = roundtrip_suite_from(&census);
    let results: Vec<(usize, &str, Outcome)> = vec![
        (1, "formula reproduction", criterion_1(&census)),
        (2, "census stability", criterion_2(&census)),
        (3, "group taxonomy", criterion_3(&census)),
        (4, "reflections fix opposite cells", criterion_4(&census)),
        (5, "reflective roundtrip", criterion_5(&census)),
        (6, "rotative roundtrip and uniqueness", criterion_6(&census, &rt)),
        (7, "fyke net edge conformance", criterion_7(&census)),
        (8, "dihedral roundtrip", criterion_8(&census, &rt)),
        (9, "guard completeness", criterion_9(&rt)),
    ];
    let mut failed = 0;
    for (i, name, r) in &results {
        match r {
            Ok(detail) => println!("PASS {} {}: {}", i, name, detail),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {}: {}", i, name, why);
            }
        }
    }
    println!("acceptance: {} of 9 passed in {:.1?} (V <= {})", 9 - failed, start.elapsed(), V_MAX);
    if failed > 0 {
        std::process::exit(1);
    }
}
