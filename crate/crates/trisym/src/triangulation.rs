//! Triangulations, near-triangulations, insertion into faces and the rooted
//! near-triangulation count.

use std::collections::{BTreeSet, HashMap, VecDeque};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::core_map::{build_map, parse_rs1_with_extra, serialize_rs1, Cell, Code, PlanarMap};
use crate::error::{Error, Result};

/// A simple sphere triangulation with at least five vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triangulation {
    map: PlanarMap,
}

impl Triangulation {
    pub fn map(&self) -> &PlanarMap {
        &self.map
    }

    pub fn into_map(self) -> PlanarMap {
        self.map
    }
}

/// Check that every face is a triangle and the map is not trivial.
pub fn validate_triangulation(map: PlanarMap) -> Result<Triangulation> {
    for f in 0..map.num_faces() {
        if map.face_len(f) != 3 {
            return Err(Error::NonTriangularFace(map.face_code(f)));
        }
    }
    if map.num_vertices() <= 4 {
        return Err(Error::Trivial(map.num_vertices()));
    }
    Ok(Triangulation { map })
}

/// A triangulation with a root cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedTriangulation {
    pub tri: Triangulation,
    pub c0: Cell,
}

impl RootedTriangulation {
    pub fn new(tri: Triangulation, c0: Cell) -> Result<Self> {
        if !tri.map().contains_cell(c0) {
            return Err(Error::UnknownCell(format!("{:?}", c0)));
        }
        Ok(RootedTriangulation { tri, c0 })
    }

    pub fn map(&self) -> &PlanarMap {
        self.tri.map()
    }

    /// Isomorphism-invariant code of the rooted map.
    pub fn code(&self) -> Code {
        self.map().rooted_code(self.c0)
    }
}

/// Root face, edge and vertex of a near-triangulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StrongRooting {
    pub face: usize,
    pub edge: usize,
    pub vertex: usize,
}

/// A strongly rooted map whose root face is bounded by a cycle and whose
/// other faces are triangles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NearTriangulation {
    map: PlanarMap,
    root: StrongRooting,
    outer: Vec<usize>,
}

/// Validate a strongly rooted map as a near-triangulation.
pub fn validate_near_triangulation(
    map: PlanarMap,
    rooting: StrongRooting,
) -> Result<NearTriangulation> {
    let StrongRooting { face, edge, vertex } = rooting;
    if face >= map.num_faces() || edge >= map.num_edges() || vertex >= map.num_vertices() {
        return Err(Error::RootNotIncident);
    }
    let (a, b) = map.edge_ends(edge);
    if a != vertex && b != vertex {
        return Err(Error::RootNotIncident);
    }
    if !map.cell_edges(Cell::Face(face)).contains(&edge) {
        return Err(Error::RootNotIncident);
    }
    let fv = map.face_vertices(face);
    let distinct: BTreeSet<usize> = fv.iter().copied().collect();
    if fv.len() < 3 || distinct.len() != fv.len() {
        return Err(Error::OuterNotCycle);
    }
    for f in 0..map.num_faces() {
        if f != face && map.face_len(f) != 3 {
            return Err(Error::InnerFaceNotTriangle(map.face_code(f)));
        }
    }
    let other = if a == vertex { b } else { a };
    let k = fv.len();
    let p = fv.iter().position(|&x| x == vertex).unwrap();
    let step = if fv[(p + 1) % k] == other { 1 } else { k - 1 };
    let outer = (0..k).map(|i| fv[(p + i * step) % k]).collect();
    Ok(NearTriangulation {
        map,
        root: rooting,
        outer,
    })
}

impl NearTriangulation {
    pub fn map(&self) -> &PlanarMap {
        &self.map
    }

    pub fn root(&self) -> StrongRooting {
        self.root
    }

    /// Outer cycle starting at the root vertex, continuing along the root edge.
    pub fn outer(&self) -> &[usize] {
        &self.outer
    }

    pub fn outer_len(&self) -> usize {
        self.outer.len()
    }

    /// Number of outer vertices minus three.
    pub fn m(&self) -> usize {
        self.outer.len() - 3
    }

    /// Number of inner vertices.
    pub fn n(&self) -> usize {
        self.map.num_vertices() - self.outer.len()
    }

    pub fn is_outer_vertex(&self, v: usize) -> bool {
        self.outer.contains(&v)
    }

    fn outer_edges(&self) -> BTreeSet<usize> {
        self.map
            .cell_edges(Cell::Face(self.root.face))
            .into_iter()
            .collect()
    }

    /// Inner edges joining two outer vertices.
    pub fn chords(&self) -> Vec<usize> {
        let outer_e = self.outer_edges();
        (0..self.map.num_edges())
            .filter(|e| !outer_e.contains(e))
            .filter(|&e| {
                let (u, v) = self.map.edge_ends(e);
                self.is_outer_vertex(u) && self.is_outer_vertex(v)
            })
            .collect()
    }

    /// Chords as pairs of positions on the outer cycle.
    pub fn chord_positions(&self) -> Vec<(usize, usize)> {
        let pos: HashMap<usize, usize> = self
            .outer
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, i))
            .collect();
        self.chords()
            .into_iter()
            .map(|e| {
                let (u, v) = self.map.edge_ends(e);
                let (a, b) = (pos[&u], pos[&v]);
                (a.min(b), a.max(b))
            })
            .collect()
    }

    /// True iff every chord has an end among the outer positions in `d`.
    pub fn chordless_outside(&self, d: &BTreeSet<usize>) -> bool {
        self.chord_positions()
            .into_iter()
            .all(|(a, b)| d.contains(&a) || d.contains(&b))
    }

    /// Flag index of the strong rooting.
    pub fn root_flag(&self) -> usize {
        self.map
            .flag_index(crate::core_map::Flag {
                vertex: self.root.vertex,
                edge: self.root.edge,
                face: self.root.face,
            })
            .expect("root is a flag")
    }

    /// Complete isomorphism invariant of the strongly rooted map.
    pub fn code(&self) -> Code {
        self.map.flag_code(self.root_flag())
    }

    /// RS1 text followed by the root line.
    pub fn to_rs1(&self) -> String {
        let (u, v) = self.map.edge_ends(self.root.edge);
        let (u, v) = if u == self.root.vertex {
            (u, v)
        } else {
            (v, u)
        };
        format!(
            "{}root: f={} e={}-{} v={}\n",
            serialize_rs1(&self.map),
            self.map.face_code(self.root.face),
            u + 1,
            v + 1,
            self.root.vertex + 1
        )
    }

    /// The same near-triangulation with the opposite orientation.
    pub fn mirror(&self) -> NearTriangulation {
        let m = self.map.mirror();
        let rev_outer: Vec<usize> = self.outer.iter().rev().copied().collect();
        let face = outer_face_of(&m, &rev_outer).unwrap_or(self.root.face);
        validate_near_triangulation(
            m,
            StrongRooting {
                face,
                edge: self.root.edge,
                vertex: self.root.vertex,
            },
        )
        .expect("mirror of a near-triangulation is one")
    }

    /// Re-root at another outer flag, given by the vertex position on the
    /// outer cycle and a direction (+1 along the cycle order, -1 against).
    pub fn reroot(&self, pos: usize, forward: bool) -> NearTriangulation {
        let k = self.outer.len();
        let v = self.outer[pos % k];
        let w = if forward {
            self.outer[(pos + 1) % k]
        } else {
            self.outer[(pos + k - 1) % k]
        };
        let edge = self.map.edge_between(v, w).unwrap();
        validate_near_triangulation(
            self.map.clone(),
            StrongRooting {
                face: self.root.face,
                edge,
                vertex: v,
            },
        )
        .unwrap()
    }
}

/// Face of `map` whose trace visits `cycle` in the given cyclic order.
fn outer_face_of(map: &PlanarMap, cycle: &[usize]) -> Option<usize> {
    let d = map.dart(cycle[0], cycle[1])?;
    Some(map.face_of(d))
}

/// Parse RS1 text with a `root:` line.
pub fn parse_near_rs1(text: &str) -> Result<NearTriangulation> {
    let (map, extra) = parse_rs1_with_extra(text)?;
    let perr = |line: usize, message: &str| Error::ParseError {
        line,
        column: 1,
        message: message.to_string(),
    };
    let (line, root) = extra
        .iter()
        .find(|(_, s)| s.starts_with("root"))
        .ok_or_else(|| perr(text.lines().count().max(1), "missing root line"))?;
    let mut face = None;
    let mut edge = None;
    let mut vertex = None;
    for tok in root["root:".len()..].split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| perr(*line, "bad root token"))?;
        match k {
            "f" => {
                face = Some(match map.parse_cell(&format!("f:{}", v)) {
                    Ok(Cell::Face(f)) => f,
                    _ => return Err(perr(*line, "unknown root face")),
                })
            }
            "e" => {
                edge = Some(match map.parse_cell(&format!("e:{}", v)) {
                    Ok(Cell::Edge(e)) => e,
                    _ => return Err(perr(*line, "unknown root edge")),
                })
            }
            "v" => {
                vertex = Some(match map.parse_cell(&format!("v:{}", v)) {
                    Ok(Cell::Vertex(x)) => x,
                    _ => return Err(perr(*line, "unknown root vertex")),
                })
            }
            _ => return Err(perr(*line, "unknown root key")),
        }
    }
    let rooting = StrongRooting {
        face: face.ok_or_else(|| perr(*line, "root face missing"))?,
        edge: edge.ok_or_else(|| perr(*line, "root edge missing"))?,
        vertex: vertex.ok_or_else(|| perr(*line, "root vertex missing"))?,
    };
    validate_near_triangulation(map, rooting)
}

/// The near-triangulation consisting of a single triangle.
pub fn triangle_near() -> NearTriangulation {
    let map = build_map(vec![vec![1, 2], vec![2, 0], vec![0, 1]]).unwrap();
    let face = map.face_of(map.dart(1, 0).unwrap());
    let edge = map.edge_between(0, 1).unwrap();
    validate_near_triangulation(
        map,
        StrongRooting {
            face,
            edge,
            vertex: 0,
        },
    )
    .unwrap()
}

/// Wheel with `k` outer vertices around one inner vertex.
pub fn wheel_near(k: usize) -> NearTriangulation {
    let mut rot: Vec<Vec<usize>> = (0..k)
        .map(|i| vec![(i + 1) % k, k, (i + k - 1) % k])
        .collect();
    rot.push((0..k).collect());
    let map = build_map(rot).unwrap();
    let face = map.face_of(map.dart(0, 1).unwrap());
    let edge = map.edge_between(0, 1).unwrap();
    validate_near_triangulation(
        map,
        StrongRooting {
            face,
            edge,
            vertex: 0,
        },
    )
    .unwrap()
}

/// One filling request for [`insert_many`].
#[derive(Debug, Clone)]
pub struct Insertion<'a> {
    pub face: usize,
    pub vertex: usize,
    pub edge: usize,
    pub near: &'a NearTriangulation,
}

/// Insert `n` into face `f` of `g` at vertex `v` and edge `e`.
pub fn insert(
    n: &NearTriangulation,
    g: &PlanarMap,
    f: usize,
    v: usize,
    e: usize,
) -> Result<PlanarMap> {
    insert_many(
        g,
        &[Insertion {
            face: f,
            vertex: v,
            edge: e,
            near: n,
        }],
    )
}

/// Face boundary of `g` walked from `v` along `e`.
fn walk_face(g: &PlanarMap, f: usize, v: usize, e: usize) -> Result<Vec<usize>> {
    if f >= g.num_faces() || e >= g.num_edges() || v >= g.num_vertices() {
        return Err(Error::RootNotIncident);
    }
    let fv = g.face_vertices(f);
    let k = fv.len();
    let distinct: BTreeSet<usize> = fv.iter().copied().collect();
    if distinct.len() != k || k < 3 {
        return Err(Error::NotADiscBoundary);
    }
    let (a, b) = g.edge_ends(e);
    let w = if a == v {
        b
    } else if b == v {
        a
    } else {
        return Err(Error::RootNotIncident);
    };
    let p = fv
        .iter()
        .position(|&x| x == v)
        .ok_or(Error::RootNotIncident)?;
    let step = if fv[(p + 1) % k] == w {
        1
    } else if fv[(p + k - 1) % k] == w {
        k - 1
    } else {
        return Err(Error::RootNotIncident);
    };
    Ok((0..k).map(|i| fv[(p + i * step) % k]).collect())
}

/// Insert several near-triangulations into distinct faces of `g` at once.
pub fn insert_many(g: &PlanarMap, items: &[Insertion<'_>]) -> Result<PlanarMap> {
    let nv = g.num_vertices();
    let mut next_id = nv;
    let mut extra_rot: Vec<Vec<usize>> = Vec::new();
    // arc to splice in front of the head of a dart
    let mut arcs: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut used_faces = BTreeSet::new();

    for it in items {
        if !used_faces.insert(it.face) {
            return Err(Error::BadParams(format!(
                "face {} filled twice",
                g.face_code(it.face)
            )));
        }
        let walk_g = walk_face(g, it.face, it.vertex, it.edge)?;
        let nt = it.near;
        let k = walk_g.len();
        if nt.outer_len() != k {
            return Err(Error::BoundaryLengthMismatch {
                face: k,
                near: nt.outer_len(),
            });
        }
        let nm = nt.map();
        let outer_n = nt.outer();
        // sigma: N vertex -> G vertex
        let mut sigma: HashMap<usize, usize> = HashMap::new();
        for i in 0..k {
            sigma.insert(outer_n[i], walk_g[i]);
        }
        let mut inv: HashMap<usize, usize> = HashMap::new();
        for i in 0..k {
            inv.insert(walk_g[i], outer_n[i]);
        }
        for x in 0..nm.num_vertices() {
            if !sigma.contains_key(&x) {
                sigma.insert(x, next_id);
                next_id += 1;
            }
        }
        // decide the orientation of N at the first outer vertex of degree >= 3
        let fg: Vec<usize> = g.face_vertices(it.face);
        let kk = fg.len();
        let gprev = |x: usize| {
            let p = fg.iter().position(|&y| y == x).unwrap();
            fg[(p + kk - 1) % kk]
        };
        let gnext = |x: usize| {
            let p = fg.iter().position(|&y| y == x).unwrap();
            fg[(p + 1) % kk]
        };
        let mut reversed = false;
        for &y in outer_n {
            if nm.vertex_degree(y) >= 3 {
                let x = sigma[&y];
                let pn = inv[&gnext(x)];
                let nn = inv[&gprev(x)];
                let rot = nm.rotation(y);
                let i = rot.iter().position(|&z| z == pn).unwrap();
                let deg = rot.len();
                if rot[(i + 1) % deg] == nn {
                    reversed = false;
                } else if rot[(i + deg - 1) % deg] == nn {
                    reversed = true;
                } else {
                    return Err(Error::InvariantViolation(
                        "outer neighbours not consecutive".into(),
                    ));
                }
                break;
            }
        }
        let oriented = |y: usize| -> Vec<usize> {
            let r = nm.rotation(y);
            if reversed {
                r.iter().rev().copied().collect()
            } else {
                r.to_vec()
            }
        };
        for &y in outer_n {
            let x = sigma[&y];
            let u = gprev(x);
            let w = gnext(x);
            let nn = inv[&u];
            let pn = inv[&w];
            let r = oriented(y);
            let deg = r.len();
            let i = r.iter().position(|&z| z == nn).unwrap();
            let mut arc = Vec::new();
            let mut j = (i + 1) % deg;
            while r[j] != pn {
                arc.push(sigma[&r[j]]);
                j = (j + 1) % deg;
            }
            let d = g.dart(x, w).unwrap();
            arcs.insert(d, arc);
        }
        let mut inner: Vec<usize> = (0..nm.num_vertices())
            .filter(|x| !nt.is_outer_vertex(*x))
            .collect();
        inner.sort_by_key(|x| sigma[x]);
        for z in inner {
            debug_assert_eq!(sigma[&z], nv + extra_rot.len());
            extra_rot.push(oriented(z).into_iter().map(|y| sigma[&y]).collect());
        }
    }

    let mut rot: Vec<Vec<usize>> = Vec::with_capacity(next_id);
    for x in 0..nv {
        let mut r = Vec::new();
        for d in g.darts_out(x) {
            if let Some(arc) = arcs.get(&d) {
                r.extend(arc.iter().copied());
            }
            r.push(g.head(d));
        }
        rot.push(r);
    }
    rot.extend(extra_rot);
    for (x, r) in rot.iter().enumerate() {
        let mut seen = BTreeSet::new();
        for &y in r {
            if !seen.insert(y) {
                return Err(Error::DoubleEdgeCreated(x.min(y), x.max(y)));
            }
        }
    }
    build_map(rot)
}

/// The near-triangulation inside `cycle` (disc on the left of the walk),
/// rooted at the outer face, the edge `e` and its end `v`. Returns the
/// map together with the original vertex of every new vertex.
pub fn induced_near_triangulation_with_origin(
    t: &PlanarMap,
    cycle: &[usize],
    v: usize,
    e: (usize, usize),
) -> Result<(NearTriangulation, Vec<usize>)> {
    let k = cycle.len();
    let on_cycle: BTreeSet<usize> = cycle.iter().copied().collect();
    if k < 3 || on_cycle.len() != k {
        return Err(Error::NotADiscBoundary);
    }
    for i in 0..k {
        if !t.has_edge(cycle[i], cycle[(i + 1) % k]) {
            return Err(Error::NotADiscBoundary);
        }
    }
    let w = if e.0 == v {
        e.1
    } else if e.1 == v {
        e.0
    } else {
        return Err(Error::RootNotIncident);
    };
    let p = cycle
        .iter()
        .position(|&x| x == v)
        .ok_or(Error::RootNotIncident)?;
    let forward = if cycle[(p + 1) % k] == w {
        true
    } else if cycle[(p + k - 1) % k] == w {
        false
    } else {
        return Err(Error::RootNotIncident);
    };

    // arcs at the cycle vertices and the interior
    let mut local_rot: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut interior: Vec<usize> = Vec::new();
    let mut seen: BTreeSet<usize> = on_cycle.clone();
    let mut queue = VecDeque::new();
    for i in 0..k {
        let x = cycle[i];
        let u = cycle[(i + k - 1) % k];
        let wn = cycle[(i + 1) % k];
        let r = t.rotation(x);
        let deg = r.len();
        let s = r.iter().position(|&y| y == u).unwrap();
        let mut arc = vec![u];
        let mut j = (s + 1) % deg;
        while r[j] != wn {
            if j == s {
                return Err(Error::NotADiscBoundary);
            }
            arc.push(r[j]);
            if seen.insert(r[j]) {
                interior.push(r[j]);
                queue.push_back(r[j]);
            }
            j = (j + 1) % deg;
        }
        arc.push(wn);
        local_rot.insert(x, arc);
    }
    while let Some(z) = queue.pop_front() {
        for &y in t.rotation(z) {
            if seen.insert(y) {
                interior.push(y);
                queue.push_back(y);
            }
        }
    }
    for &z in &interior {
        local_rot.insert(z, t.rotation(z).to_vec());
    }

    // labels: outer cycle from v along e, then interior
    let mut order: Vec<usize> = (0..k)
        .map(|i| {
            if forward {
                cycle[(p + i) % k]
            } else {
                cycle[(p + k - i) % k]
            }
        })
        .collect();
    order.extend(interior.iter().copied());
    let label: HashMap<usize, usize> = order.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let mut rot = vec![Vec::new(); order.len()];
    for (&x, r) in &local_rot {
        let mut out = Vec::with_capacity(r.len());
        for y in r {
            match label.get(y) {
                Some(&l) => out.push(l),
                None => return Err(Error::NotADiscBoundary),
            }
        }
        rot[label[&x]] = out;
    }
    let map = build_map(rot).map_err(|_| Error::NotADiscBoundary)?;
    let (lv, lw) = (label[&v], label[&w]);
    let prev_on_cycle = label[&cycle[(p + k - 1) % k]];
    // the outer face runs against the cycle direction
    let face = map.face_of(map.dart(lv, prev_on_cycle).unwrap());
    let edge = map.edge_between(lv, lw).unwrap();
    let nt = validate_near_triangulation(
        map,
        StrongRooting {
            face,
            edge,
            vertex: lv,
        },
    )?;
    Ok((nt, order))
}

/// See [`induced_near_triangulation_with_origin`].
pub fn induced_near_triangulation(
    t: &PlanarMap,
    cycle: &[usize],
    v: usize,
    e: (usize, usize),
) -> Result<NearTriangulation> {
    Ok(induced_near_triangulation_with_origin(t, cycle, v, e)?.0)
}

/// Parameters of the rooted near-triangulation count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountParams {
    pub n: u64,
    pub m: u64,
}

fn range_product(lo: u64, hi: u64) -> BigUint {
    let mut p = BigUint::one();
    let mut i = lo;
    while i <= hi {
        p *= BigUint::from(i);
        i += 1;
    }
    p
}

/// Number of strongly rooted near-triangulations with `m+3` outer and `n`
/// inner vertices.
pub fn count_rooted(p: CountParams) -> BigUint {
    let CountParams { n, m } = p;
    // (2m+3)!/(m+2)! and (4n+2m+1)!/(3n+2m+3)! as ranges, remaining factors divided
    let a = range_product(m + 3, 2 * m + 3);
    let (num_b, den_b) = if 4 * n + 2 * m + 1 >= 3 * n + 2 * m + 3 {
        (
            range_product(3 * n + 2 * m + 4, 4 * n + 2 * m + 1),
            BigUint::one(),
        )
    } else {
        (
            BigUint::one(),
            range_product(4 * n + 2 * m + 2, 3 * n + 2 * m + 3),
        )
    };
    let num = BigUint::from(2u32) * a * num_b;
    let den = range_product(1, m) * range_product(1, n) * den_b;
    debug_assert!((&num % &den).is_zero());
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_map::parse_rs1;
    use crate::fixtures;

    fn fact(k: u128) -> u128 {
        (1..=k).product()
    }

    #[test]
    fn count_matches_direct_factorials() {
        for n in 0..6u64 {
            for m in 0..4u64 {
                let (nn, mm) = (n as u128, m as u128);
                let num = 2 * fact(2 * mm + 3) * fact(4 * nn + 2 * mm + 1);
                let den = fact(mm + 2) * fact(mm) * fact(nn) * fact(3 * nn + 2 * mm + 3);
                assert_eq!(num % den, 0);
                assert_eq!(
                    count_rooted(CountParams { n, m }),
                    BigUint::from(num / den),
                    "n={n} m={m}"
                );
            }
        }
    }

    #[test]
    fn count_known_values() {
        let vals: Vec<u64> = (0..=6)
            .map(|n| count_rooted(CountParams { n, m: 0 }).try_into().unwrap())
            .collect();
        assert_eq!(vals, vec![1, 1, 3, 13, 68, 399, 2530]);
        assert_eq!(
            count_rooted(CountParams { n: 0, m: 1 }),
            BigUint::from(2u32)
        );
    }

    #[test]
    fn validate_fixtures() {
        let k4 = parse_rs1(fixtures::K4).unwrap();
        assert!(matches!(validate_triangulation(k4), Err(Error::Trivial(4))));
        let b = validate_triangulation(parse_rs1(fixtures::BIPYR5).unwrap()).unwrap();
        let m = b.map();
        assert_eq!((m.num_vertices(), m.num_edges(), m.num_faces()), (5, 9, 6));
        let quad = build_map(vec![vec![1, 3], vec![2, 0], vec![3, 1], vec![0, 2]]).unwrap();
        assert!(matches!(
            validate_triangulation(quad),
            Err(Error::NonTriangularFace(_))
        ));
    }

    fn quad_with_chord() -> NearTriangulation {
        // 4-cycle 0-1-2-3 with chord 0-2
        let map = build_map(vec![vec![1, 2, 3], vec![2, 0], vec![3, 0, 1], vec![0, 2]]).unwrap();
        let face = (0..map.num_faces())
            .find(|&f| map.face_len(f) == 4)
            .unwrap();
        let edge = map.edge_between(0, 1).unwrap();
        validate_near_triangulation(
            map,
            StrongRooting {
                face,
                edge,
                vertex: 0,
            },
        )
        .unwrap()
    }

    #[test]
    fn near_triangulation_basics() {
        let t = triangle_near();
        assert_eq!((t.m(), t.n()), (0, 0));
        assert!(t.chords().is_empty());
        let q = quad_with_chord();
        assert_eq!((q.m(), q.n()), (1, 0));
        assert_eq!(q.chords().len(), 1);
        assert_eq!(q.chord_positions(), vec![(0, 2)]);
        assert!(q.chordless_outside(&BTreeSet::from([0])));
        assert!(!q.chordless_outside(&BTreeSet::new()));
        let oct = parse_rs1(fixtures::OCT6).unwrap();
        let r = validate_near_triangulation(
            oct.clone(),
            StrongRooting {
                face: 0,
                edge: oct.cell_edges(Cell::Face(0))[0],
                vertex: oct.face_vertices(0)[0],
            },
        );
        assert!(r.is_ok());
        let nontri = build_map(vec![vec![1, 3], vec![2, 0], vec![3, 1], vec![0, 2]]).unwrap();
        let e = nontri.edge_between(0, 1).unwrap();
        assert!(matches!(
            validate_near_triangulation(
                nontri,
                StrongRooting {
                    face: 0,
                    edge: e,
                    vertex: 0
                }
            ),
            Err(Error::InnerFaceNotTriangle(_))
        ));
    }

    #[test]
    fn near_rs1_roundtrip() {
        let q = quad_with_chord();
        let txt = q.to_rs1();
        let q2 = parse_near_rs1(&txt).unwrap();
        assert_eq!(q2.to_rs1(), txt);
        assert_eq!(q2.code(), q.code());
    }

    #[test]
    fn two_rootings_of_quad_with_chord() {
        // A(0,1) = 2: all strong rootings of the quadrilateral with a chord
        let q = quad_with_chord();
        let mut codes = BTreeSet::new();
        for pos in 0..4 {
            for fw in [true, false] {
                codes.insert(q.reroot(pos, fw).code());
            }
        }
        assert_eq!(codes.len(), 2);
    }

    #[test]
    fn insert_triangle_is_noop() {
        let k4 = parse_rs1(fixtures::K4).unwrap();
        let tri = triangle_near();
        for f in 0..k4.num_faces() {
            let fv = k4.face_vertices(f);
            let e = k4.edge_between(fv[0], fv[1]).unwrap();
            let h = insert(&tri, &k4, f, fv[1], e).unwrap();
            assert_eq!(h, k4);
        }
        let bip = parse_rs1(fixtures::BIPYR5).unwrap();
        let cyc = bip.face_vertices(0);
        let nt = induced_near_triangulation(&bip, &cyc, cyc[0], (cyc[0], cyc[1])).unwrap();
        assert_eq!((nt.n(), nt.outer_len()), (0, 3));
        assert_eq!(nt.code(), tri.code());
    }

    #[test]
    fn induced_and_insert_are_inverse_on_bipyramid() {
        let b = parse_rs1(fixtures::BIPYR5).unwrap();
        // 4-cycle apex1(0), 2, apex2(1), 3 (0-based ids)
        let cycle_a = vec![0, 2, 1, 3];
        let cycle_b = vec![0, 3, 1, 2];
        let mut hits = 0;
        for cyc in [cycle_a, cycle_b] {
            if let Ok((nt, origin)) = induced_near_triangulation_with_origin(&b, &cyc, 0, (0, 2)) {
                if nt.n() == 0 {
                    assert_eq!(nt.chords().len(), 1);
                    let (cu, cv) = nt.map().edge_ends(nt.chords()[0]);
                    let mut pair = [origin[cu], origin[cv]];
                    pair.sort();
                    assert_eq!(pair, [2, 3]);
                    hits += 1;
                }
            }
        }
        assert_eq!(hits, 1);
    }

    #[test]
    fn insert_rejects_mismatch_and_double_edge() {
        let oct = parse_rs1(fixtures::OCT6).unwrap();
        // remove vertex 1 (0-based 0): the remaining map has a 4-face 2,3,4,5
        let g = remove_vertex(&oct, 0);
        let f = (0..g.num_faces()).find(|&f| g.face_len(f) == 4).unwrap();
        let fv = g.face_vertices(f);
        let e = g.edge_between(fv[0], fv[1]).unwrap();
        let tri = triangle_near();
        assert!(matches!(
            insert(&tri, &g, f, fv[0], e),
            Err(Error::BoundaryLengthMismatch { face: 4, near: 3 })
        ));
        // a chord across the 4-face is fine once, the same pair is not an edge yet
        let q = quad_with_chord();
        let h = insert(&q, &g, f, fv[0], e).unwrap();
        assert_eq!(h.num_edges(), g.num_edges() + 1);
    }

    #[test]
    fn double_edge_detected() {
        // two quadrilateral faces sharing the diagonal pair receive chords joining the same vertices
        // square 0-1-2-3 drawn as a sphere with two 4-faces
        let g = build_map(vec![vec![1, 3], vec![2, 0], vec![3, 1], vec![0, 2]]).unwrap();
        let q = quad_with_chord();
        let e = g.edge_between(0, 1).unwrap();
        let ins = vec![
            Insertion {
                face: 0,
                vertex: 0,
                edge: e,
                near: &q,
            },
            Insertion {
                face: 1,
                vertex: 0,
                edge: e,
                near: &q,
            },
        ];
        assert!(matches!(
            insert_many(&g, &ins),
            Err(Error::DoubleEdgeCreated(..))
        ));
    }

    pub(crate) fn remove_vertex(m: &PlanarMap, x: usize) -> PlanarMap {
        let keep: Vec<usize> = (0..m.num_vertices()).filter(|&v| v != x).collect();
        let idx: HashMap<usize, usize> = keep.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let rot = keep
            .iter()
            .map(|&v| {
                m.rotation(v)
                    .iter()
                    .filter(|&&u| u != x)
                    .map(|u| idx[u])
                    .collect()
            })
            .collect();
        build_map(rot).unwrap()
    }

    #[test]
    fn remove_then_reinsert_reproduces() {
        for src in [fixtures::BIPYR5, fixtures::OCT6, fixtures::NESTED_HEXAGON] {
            let t = parse_rs1(src).unwrap();
            for x in 0..t.num_vertices() {
                // the link of x bounds a disc containing x
                let g = remove_vertex(&t, x);
                let down = |v: usize| if v > x { v - 1 } else { v };
                let r = t.rotation(x);
                let hole = g.face_of(g.dart(down(r[1]), down(r[0])).unwrap());
                assert_eq!(g.face_len(hole), r.len());
                let fv = g.face_vertices(hole);
                let e = (fv[0], fv[1]);
                // map back to t ids: ids above x shift by one
                let back = |v: usize| if v >= x { v + 1 } else { v };
                let cyc: Vec<usize> = fv.iter().map(|&v| back(v)).collect();
                let nt =
                    induced_near_triangulation(&t, &cyc, cyc[0], (back(e.0), back(e.1))).unwrap();
                assert_eq!(nt.n(), 1, "x={x} cyc={cyc:?} nv={}", t.num_vertices());
                let ge = g.edge_between(e.0, e.1).unwrap();
                let h = insert(&nt, &g, hole, fv[0], ge).unwrap();
                assert_eq!(h.canonical_code(), t.canonical_code());
            }
        }
    }
}
