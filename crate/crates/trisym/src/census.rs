//! Exhaustive generation of small sphere triangulations by vertex splitting,
//! plus the counting and symmetry scans built on top of it.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;

use crate::automorphism::{
    cyclic_subgroups, dihedral_subgroups, full_group, rooted_elements, rooted_group_of, GroupType,
};
use crate::fykenet::{compose_rotative, decompose_rotative, is_two_layered, near_from_triangles};
use crate::girdle::{compose_reflective, decompose_reflective, decompose_reflective_both};
use crate::skeleton::{compose_dihedral, decompose_dihedral, decompose_dihedral_both, is_two_sided_chordless};
use crate::core_map::{build_map, code_hex, serialize_rs1, Cell, Code, PlanarMap};
use crate::error::{Error, Result};
use crate::triangulation::{
    count_rooted, insert_many, validate_triangulation, wheel_near, CountParams, Insertion,
    NearTriangulation, RootedTriangulation, Triangulation,
};

/// Default upper bound for `v_max`; `TRISYM_VMAX_CAP` overrides it.
pub const DEFAULT_VMAX_CAP: usize = 10;

pub fn vmax_cap() -> usize {
    std::env::var("TRISYM_VMAX_CAP")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_VMAX_CAP)
}

/// One triangulation of the census.
#[derive(Debug, Clone)]
pub struct CensusEntry {
    pub tri: Triangulation,
    pub code: Code,
    pub v: usize,
    pub e: usize,
    pub f: usize,
    pub aut_order: usize,
}

impl CensusEntry {
    fn new(tri: Triangulation, code: Code) -> Self {
        let m = tri.map();
        let (v, e, f) = (m.num_vertices(), m.num_edges(), m.num_faces());
        let aut_order = full_group(m).len();
        CensusEntry {
            tri,
            code,
            v,
            e,
            f,
            aut_order,
        }
    }

    pub fn map(&self) -> &PlanarMap {
        self.tri.map()
    }

    /// Rooted group type at every cell.
    pub fn root_types(&self) -> Result<Vec<(Cell, GroupType)>> {
        let m = self.map();
        m.cells()
            .into_iter()
            .map(|c| Ok((c, rooted_group_of(m, c)?.group_type)))
            .collect()
    }
}

/// Expansion order used by [`generate_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    /// Parents in code order, split positions ascending, single thread.
    Sequential,
    /// Parents relabelled by reversing vertex ids, split positions
    /// descending, expanded on the rayon pool.
    ParallelReversed,
}

/// All splits of vertex `v`: pick two distinct neighbours that become the
/// common neighbours of `v` and the new vertex.
pub fn vertex_splits(map: &PlanarMap, v: usize) -> Vec<PlanarMap> {
    let rot = map.rotation(v).to_vec();
    let k = rot.len();
    let w = map.num_vertices();
    let mut out = Vec::new();
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            if let Some(m) = split(map, v, &rot, i, j, w) {
                out.push(m);
            }
        }
    }
    out
}

fn split(
    map: &PlanarMap,
    v: usize,
    rot: &[usize],
    i: usize,
    j: usize,
    w: usize,
) -> Option<PlanarMap> {
    let k = rot.len();
    let mut keep = Vec::new();
    let mut t = i;
    loop {
        keep.push(rot[t]);
        if t == j {
            break;
        }
        t = (t + 1) % k;
    }
    let mut moved = Vec::new();
    let mut t = j;
    loop {
        moved.push(rot[t]);
        if t == i {
            break;
        }
        t = (t + 1) % k;
    }
    let (ni, nj) = (rot[i], rot[j]);
    let mut rows: Vec<Vec<usize>> = map.rotations().to_vec();
    let mut vrow = keep.clone();
    vrow.push(w);
    let mut wrow = moved.clone();
    wrow.push(v);
    rows[v] = vrow;
    rows.push(wrow);
    for &x in &moved[1..moved.len() - 1] {
        for y in rows[x].iter_mut() {
            if *y == v {
                *y = w;
            }
        }
    }
    let pos = rows[ni].iter().position(|&y| y == v)?;
    rows[ni].insert(pos + 1, w);
    let pos = rows[nj].iter().position(|&y| y == v)?;
    rows[nj].insert(pos, w);
    build_map(rows).ok()
}

fn k4() -> PlanarMap {
    build_map(vec![
        vec![1, 2, 3],
        vec![0, 3, 2],
        vec![0, 1, 3],
        vec![0, 2, 1],
    ])
    .unwrap()
}

fn reverse_labels(map: &PlanarMap) -> PlanarMap {
    let n = map.num_vertices();
    let perm: Vec<usize> = (0..n).map(|v| n - 1 - v).collect();
    map.relabel(&perm)
}

fn children(map: &PlanarMap, schedule: Schedule) -> Vec<(Code, PlanarMap)> {
    let mut out = Vec::new();
    match schedule {
        Schedule::Sequential => {
            for v in 0..map.num_vertices() {
                for c in vertex_splits(map, v) {
                    out.push((c.canonical_code(), c));
                }
            }
        }
        Schedule::ParallelReversed => {
            let m = reverse_labels(map);
            for v in (0..m.num_vertices()).rev() {
                let mut cs = vertex_splits(&m, v);
                cs.reverse();
                for c in cs {
                    out.push((c.canonical_code(), c));
                }
            }
        }
    }
    out
}

/// Non-isomorphic triangulations per vertex count, seeded from K4. Level
/// `V = 4` holds K4 only.
pub fn generate_levels(
    v_max: usize,
    schedule: Schedule,
) -> Result<BTreeMap<usize, Vec<(Code, PlanarMap)>>> {
    check_bound(v_max)?;
    let mut levels: BTreeMap<usize, Vec<(Code, PlanarMap)>> = BTreeMap::new();
    let seed = k4();
    levels.insert(4, vec![(seed.canonical_code(), seed)]);
    for v in 5..=v_max {
        let parents = &levels[&(v - 1)];
        let all: Vec<Vec<(Code, PlanarMap)>> = match schedule {
            Schedule::Sequential => parents.iter().map(|(_, p)| children(p, schedule)).collect(),
            Schedule::ParallelReversed => parents
                .par_iter()
                .rev()
                .map(|(_, p)| children(p, schedule))
                .collect(),
        };
        // single merge point
        let mut uniq: BTreeMap<Code, PlanarMap> = BTreeMap::new();
        for batch in all {
            for (code, m) in batch {
                uniq.entry(code).or_insert(m);
            }
        }
        levels.insert(v, uniq.into_iter().collect());
    }
    Ok(levels)
}

fn check_bound(v_max: usize) -> Result<()> {
    let cap = vmax_cap();
    if v_max > cap {
        return Err(Error::BoundTooLarge {
            requested: v_max,
            cap,
        });
    }
    if v_max < 5 {
        return Err(Error::BadParams(format!(
            "v_max must be at least 5, got {}",
            v_max
        )));
    }
    Ok(())
}

/// Every triangulation with `5 <= V <= v_max`, sorted by `(V, code)`.
pub fn generate_with(v_max: usize, schedule: Schedule) -> Result<Vec<CensusEntry>> {
    let levels = generate_levels(v_max, schedule)?;
    let items: Vec<(Code, PlanarMap)> = levels
        .into_iter()
        .filter(|(v, _)| *v >= 5)
        .flat_map(|(_, l)| l)
        .collect();
    items
        .into_par_iter()
        .map(|(code, m)| Ok(CensusEntry::new(validate_triangulation(m)?, code)))
        .collect()
}

pub fn generate_all(v_max: usize) -> Result<Vec<CensusEntry>> {
    generate_with(v_max, Schedule::Sequential)
}

/// Number of entries per vertex count.
pub fn counts_per_v(entries: &[CensusEntry]) -> BTreeMap<usize, usize> {
    let mut out = BTreeMap::new();
    for e in entries {
        *out.entry(e.v).or_insert(0) += 1;
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct RootedCountRow {
    pub v: usize,
    pub entries: usize,
    pub census_sum: String,
    pub formula: String,
    pub equal: bool,
}

/// Compare the census sum of `4E/|Aut|` with the closed form `A(V-3, 0)`.
pub fn verify_rooted_counts_from(entries: &[CensusEntry]) -> Vec<RootedCountRow> {
    let mut by_v: BTreeMap<usize, (usize, BigUint)> = BTreeMap::new();
    for e in entries {
        let slot = by_v.entry(e.v).or_insert((0, BigUint::from(0u32)));
        slot.0 += 1;
        slot.1 += BigUint::from(4 * e.e / e.aut_order);
    }
    by_v.into_iter()
        .map(|(v, (n, sum))| {
            let f = count_rooted(CountParams {
                n: v as u64 - 3,
                m: 0,
            });
            RootedCountRow {
                v,
                entries: n,
                equal: sum == f,
                census_sum: sum.to_string(),
                formula: f.to_string(),
            }
        })
        .collect()
}

pub fn verify_rooted_counts(v_max: usize) -> Result<Vec<RootedCountRow>> {
    Ok(verify_rooted_counts_from(&generate_all(v_max)?))
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SymmetryStats {
    /// Per vertex count, tally of rooted group types over all root cells.
    pub tally: BTreeMap<usize, BTreeMap<String, usize>>,
    pub roots_checked: usize,
    pub violations: Vec<String>,
}

/// Scan every root cell of every entry and check the group type against
/// the divisor condition on the root degree.
pub fn symmetry_statistics_from(entries: &[CensusEntry]) -> SymmetryStats {
    let per: Vec<(usize, Vec<(String, bool, String)>)> = entries
        .par_iter()
        .map(|e| {
            let m = e.map();
            let mut rows = Vec::new();
            for c in m.cells() {
                let d = m.degree(c).unwrap();
                let what = format!("V={} {} at {}", e.v, code_hex(&e.code), m.cell_label(c));
                match rooted_group_of(m, c) {
                    Ok(g) => {
                        let ok = match g.group_type {
                            GroupType::Trivial | GroupType::Z2Reflection => true,
                            GroupType::Z(k) => k >= 2 && d % k == 0,
                            GroupType::Dih(n) => n >= 2 && d % n == 0,
                        };
                        rows.push((g.group_type.to_string(), ok, what));
                    }
                    Err(err) => rows.push((err.name().to_string(), false, what)),
                }
            }
            (e.v, rows)
        })
        .collect();
    let mut st = SymmetryStats::default();
    for (v, rows) in per {
        for (name, ok, what) in rows {
            st.roots_checked += 1;
            *st.tally
                .entry(v)
                .or_default()
                .entry(name.clone())
                .or_insert(0) += 1;
            if !ok {
                st.violations.push(format!("{}: {}", what, name));
            }
        }
    }
    st
}

pub fn symmetry_statistics(v_max: usize) -> Result<SymmetryStats> {
    Ok(symmetry_statistics_from(&generate_all(v_max)?))
}

/// Write one RS1 file per entry and a `census-<V>.idx` listing per vertex
/// count. Returns the number of files written.
pub fn write_census(dir: &Path, entries: &[CensusEntry]) -> std::io::Result<usize> {
    fs::create_dir_all(dir)?;
    let mut idx: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    let mut written = 0;
    for e in entries {
        let list = idx.entry(e.v).or_default();
        let name = format!("v{}-{:04}.rs1", e.v, list.len() + 1);
        fs::write(dir.join(&name), serialize_rs1(e.map()))?;
        list.push(format!("{} {}", name, code_hex(&e.code)));
        written += 1;
    }
    for (v, lines) in idx {
        let mut body = lines.join("\n");
        body.push('\n');
        fs::write(dir.join(format!("census-{}.idx", v)), body)?;
        written += 1;
    }
    Ok(written)
}

/// Canonical codes of all entries, for schedule comparisons.
pub fn code_set(entries: &[CensusEntry]) -> BTreeSet<Code> {
    entries.iter().map(|e| e.code.clone()).collect()
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ModeReport {
    pub instances: usize,
    pub passed: usize,
    pub failures: Vec<String>,
}

impl ModeReport {
    fn merge(&mut self, o: ModeReport) {
        self.instances += o.instances;
        self.passed += o.passed;
        self.failures.extend(o.failures);
    }

    fn record(&mut self, what: impl FnOnce() -> String, r: std::thread::Result<Result<()>>) {
        self.instances += 1;
        match r {
            Ok(Ok(())) => self.passed += 1,
            Ok(Err(e)) => self.failures.push(format!("{}: {}", what(), e)),
            Err(_) => self.failures.push(format!("{}: panic", what())),
        }
    }
}

/// Outcome of `decompose` then `compose` for every applicable rooted group,
/// plus the fault-injection tallies.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RoundtripReport {
    pub reflective: ModeReport,
    pub rotative: ModeReport,
    pub dihedral: ModeReport,
    pub faults: FaultReport,
}

impl RoundtripReport {
    pub fn failures(&self) -> usize {
        self.reflective.failures.len()
            + self.rotative.failures.len()
            + self.dihedral.failures.len()
            + self.faults.unexpected.len()
    }

    fn merge(&mut self, o: RoundtripReport) {
        self.reflective.merge(o.reflective);
        self.rotative.merge(o.rotative);
        self.dihedral.merge(o.dihedral);
        self.faults.merge(o.faults);
    }
}

/// Injected faults: per fault kind, the error names observed.
#[derive(Debug, Clone, Default, Serialize)]
pub struct FaultReport {
    pub observed: BTreeMap<String, BTreeMap<String, usize>>,
    pub unexpected: Vec<String>,
}

impl FaultReport {
    fn merge(&mut self, o: FaultReport) {
        for (k, m) in o.observed {
            let slot = self.observed.entry(k).or_default();
            for (n, c) in m {
                *slot.entry(n).or_insert(0) += c;
            }
        }
        self.unexpected.extend(o.unexpected);
    }

    /// Record `r` under `fault`; anything but the `want`ed error is unexpected.
    fn expect<T>(&mut self, fault: &str, want: &str, what: impl FnOnce() -> String, r: std::thread::Result<Result<T>>) {
        let name = match &r {
            Ok(Ok(_)) => "accepted".to_string(),
            Ok(Err(e)) => e.name().to_string(),
            Err(_) => "panic".to_string(),
        };
        *self
            .observed
            .entry(fault.to_string())
            .or_default()
            .entry(name.clone())
            .or_insert(0) += 1;
        if name != want {
            self.unexpected.push(format!("{} {}: expected {}, got {}", fault, what(), want, name));
        }
    }

    /// Number of injections of `fault` that produced `name`.
    pub fn count(&self, fault: &str, name: &str) -> usize {
        self.observed
            .get(fault)
            .and_then(|m| m.get(name))
            .copied()
            .unwrap_or(0)
    }
}

fn guarded<T>(f: impl FnOnce() -> T) -> std::thread::Result<T> {
    std::panic::catch_unwind(std::panic::AssertUnwindSafe(f))
}

/// Fans of a `k`-gon from every outer position.
fn fans(k: usize) -> Vec<NearTriangulation> {
    (0..k)
        .filter_map(|p| {
            let tris: Vec<[usize; 3]> = (1..k - 1)
                .map(|b| [p, (p + b) % k, (p + b + 1) % k])
                .collect();
            near_from_triangles(k, 0, &tris).ok()
        })
        .collect()
}

pub const FAULT_CHORD: &str = "same-side chord";
pub const FAULT_LENGTH: &str = "boundary length off by one";
pub const FAULT_DOUBLE_EDGE: &str = "double-edge-inducing filling";

fn roundtrip_entry(e: &CensusEntry) -> RoundtripReport {
    let mut rep = RoundtripReport::default();
    let m = e.map();
    let tag = |c: Cell, what: &str| format!("V={} {} at {} {}", e.v, code_hex(&e.code), m.cell_label(c), what);
    for c0 in m.cells() {
        let t = match RootedTriangulation::new(e.tri.clone(), c0) {
            Ok(t) => t,
            Err(err) => {
                rep.reflective.failures.push(format!("{}: {}", tag(c0, "root"), err));
                continue;
            }
        };
        let els = rooted_elements(m, c0);
        for phi in els.iter().filter(|g| g.is_reflection()) {
            let r = guarded(|| -> Result<()> {
                for (g, n) in decompose_reflective_both(&t, phi)? {
                    if compose_reflective(&g, &n)?.code() != t.code() {
                        return Err(Error::InvariantViolation("reflective roundtrip differs".into()));
                    }
                }
                Ok(())
            });
            rep.reflective.record(|| tag(c0, "reflective"), r);
            if let Ok(Ok((g, n))) = guarded(|| decompose_reflective(&t, phi)) {
                let d = g.d_positions();
                for f in fans(n.outer_len()) {
                    if f.chordless_outside(&d) {
                        continue;
                    }
                    rep.faults.expect(FAULT_CHORD, "ChordViolation", || tag(c0, "reflective"), guarded(|| compose_reflective(&g, &f)));
                    let raw = guarded(|| {
                        insert_many(
                            &g.map,
                            &[0, 1].map(|i| Insertion {
                                face: g.sides[i],
                                vertex: g.v[i],
                                edge: g.e[i],
                                near: &f,
                            }),
                        )
                    });
                    rep.faults.expect(FAULT_DOUBLE_EDGE, "DoubleEdgeCreated", || tag(c0, "reflective"), raw);
                }
                let long = wheel_near(n.outer_len() + 1);
                rep.faults.expect(FAULT_LENGTH, "LengthMismatch", || tag(c0, "reflective"), guarded(|| compose_reflective(&g, &long)));
            }
        }
        for h in cyclic_subgroups(&els) {
            let r = guarded(|| -> Result<()> {
                let d = decompose_rotative(&t, &h)?;
                if compose_rotative(&d.net, &d.fillings)?.code() != t.code() {
                    return Err(Error::InvariantViolation("rotative roundtrip differs".into()));
                }
                Ok(())
            });
            rep.rotative.record(|| tag(c0, &format!("rotative Z{}", h.len())), r);
            if let Ok(Ok(d)) = guarded(|| decompose_rotative(&t, &h)) {
                for (orbit, faces) in d.net.filled_orbits() {
                    let n = &d.fillings[&orbit];
                    if let Some(mk) = d.net.faces[faces[0]].markers {
                        for f in fans(n.outer_len()) {
                            if is_two_layered(&f, &mk) {
                                continue;
                            }
                            let mut fl = d.fillings.clone();
                            fl.insert(orbit, f);
                            rep.faults.expect(FAULT_CHORD, "TwoLayeredViolation", || tag(c0, "rotative"), guarded(|| compose_rotative(&d.net, &fl)));
                        }
                    }
                    let mut fl = d.fillings.clone();
                    fl.insert(orbit, wheel_near(n.outer_len() + 1));
                    rep.faults.expect(FAULT_LENGTH, "LengthMismatch", || tag(c0, "rotative"), guarded(|| compose_rotative(&d.net, &fl)));
                }
            }
        }
        for h in dihedral_subgroups(&els) {
            let r = guarded(|| -> Result<()> {
                for (sk, fill) in decompose_dihedral_both(&t, &h)? {
                    if compose_dihedral(&sk, &fill)?.code() != t.code() {
                        return Err(Error::InvariantViolation("dihedral roundtrip differs".into()));
                    }
                }
                Ok(())
            });
            rep.dihedral.record(|| tag(c0, &format!("dihedral D{}", h.len() / 2)), r);
            if let Ok(Ok((sk, fill))) = guarded(|| decompose_dihedral(&t, &h)) {
                for (j, n) in fill.iter().enumerate() {
                    let sg = &sk.segments[0][j];
                    for f in fans(n.outer_len()) {
                        if is_two_sided_chordless(&f, sg.w_pos, &sg.d_left, &sg.d_right) {
                            continue;
                        }
                        let mut fl = fill.clone();
                        fl[j] = f.clone();
                        rep.faults.expect(FAULT_CHORD, "ChordViolation", || tag(c0, "dihedral"), guarded(|| compose_dihedral(&sk, &fl)));
                        let items: Vec<Insertion> = sk
                            .segments
                            .iter()
                            .flat_map(|row| {
                                row.iter().zip(&fl).map(|(sg, nt)| Insertion {
                                    face: sg.face,
                                    vertex: sg.v,
                                    edge: sg.e,
                                    near: nt,
                                })
                            })
                            .collect();
                        rep.faults.expect(FAULT_DOUBLE_EDGE, "DoubleEdgeCreated", || tag(c0, "dihedral"), guarded(|| insert_many(&sk.map, &items)));
                    }
                    let mut fl = fill.clone();
                    fl[j] = wheel_near(n.outer_len() + 1);
                    rep.faults.expect(FAULT_LENGTH, "LengthMismatch", || tag(c0, "dihedral"), guarded(|| compose_dihedral(&sk, &fl)));
                }
            }
        }
    }
    rep
}

/// Decompose and recompose every rooted symmetric triangulation up to
/// `v_max` vertices in all three modes, and inject faults into the fillings.
pub fn roundtrip_suite_from(entries: &[CensusEntry]) -> RoundtripReport {
    entries
        .par_iter()
        .map(roundtrip_entry)
        .collect::<Vec<_>>()
        .into_iter()
        .fold(RoundtripReport::default(), |mut acc, r| {
            acc.merge(r);
            acc
        })
}

pub fn roundtrip_suite(v_max: usize) -> Result<RoundtripReport> {
    Ok(roundtrip_suite_from(&generate_all(v_max)?))
}
