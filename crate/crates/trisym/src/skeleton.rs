//! Dihedral decomposition.
//!
//! Every reflection of a dihedral rooted group has a girdle. Its central
//! sequence splits at the two poles into two meridians, and the union of all
//! meridians is the skeleton. Faces of the skeleton that are not central in
//! any meridian are segments; each orbit of segments is filled with copies of
//! one near-triangulation.
//!
//! Conventions: meridians are numbered clockwise around the north pole,
//! starting from the anchor cell `a_0`. The sector `i` lies between meridian
//! `i` and meridian `i + 1`; walking a meridian from north to south, its
//! sector is on the right ("east") and the previous one on the left.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::automorphism::{fixed_cells, MapAutomorphism};
use crate::core_map::{build_map, map_from_faces, parse_rs1, serialize_rs1, Cell, Code, Flag, PlanarMap};
use crate::error::{Error, Result};
use crate::girdle::{build_girdle, carry_cell, invariant_cycle_in, Girdle, RootDim};
use crate::triangulation::{
    induced_near_triangulation, insert_many, validate_triangulation, Insertion, NearTriangulation,
    RootedTriangulation,
};

fn bad(m: impl Into<String>) -> Error {
    Error::InvariantViolation(format!("skeleton: {}", m.into()))
}

fn bad_params(m: impl Into<String>) -> Error {
    Error::BadParams(m.into())
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let nx = self.0[y];
            self.0[y] = r;
            y = nx;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Reflections and rotations of `h`, checked to form a dihedral group of
/// order at least four fixing `c0`.
fn split_dihedral<'a>(
    map: &PlanarMap,
    c0: Cell,
    h: &'a [MapAutomorphism],
) -> Result<(Vec<&'a MapAutomorphism>, Vec<&'a MapAutomorphism>)> {
    if h.iter().any(|g| !g.fixes(map, c0)) {
        return Err(Error::NotDihedral);
    }
    let keys: BTreeSet<&[usize]> = h.iter().map(|g| g.dart_image()).collect();
    if keys.len() != h.len() {
        return Err(Error::NotDihedral);
    }
    let refl: Vec<&MapAutomorphism> = h.iter().filter(|g| g.is_reflection()).collect();
    let rot: Vec<&MapAutomorphism> = h.iter().filter(|g| !g.is_reflection()).collect();
    if refl.len() < 2 || rot.len() != refl.len() || !rot.iter().any(|g| g.is_identity()) {
        return Err(Error::NotDihedral);
    }
    for a in h {
        for b in h {
            if !keys.contains(a.compose(b).dart_image()) {
                return Err(Error::NotDihedral);
            }
        }
    }
    Ok((refl, rot))
}

/// Girdles of all reflections of a dihedral group and their meridians.
#[derive(Debug, Clone)]
pub struct MeridianSet {
    pub n: usize,
    pub north: Cell,
    pub south: Cell,
    /// Invariant cells around the north pole, clockwise.
    pub a: Vec<Cell>,
    /// `reflections[i]` fixes `a[i]` and `a[n + i]`.
    pub reflections: Vec<MapAutomorphism>,
    /// `rotations[k]` maps `a[j]` to `a[j + 2k]`.
    pub rotations: Vec<MapAutomorphism>,
    pub girdles: Vec<Girdle>,
    /// Central cells of every meridian, from the north to the south pole.
    pub meridians: Vec<Vec<Cell>>,
}

impl MeridianSet {
    fn central_of_girdle(&self, i: usize) -> BTreeSet<Cell> {
        self.meridians[i]
            .iter()
            .chain(self.meridians[self.n + i].iter())
            .copied()
            .collect()
    }

    fn check(&self, map: &PlanarMap) -> Result<()> {
        let n = self.n;
        let m2 = 2 * n;
        let poles = BTreeSet::from([self.north, self.south]);
        for i in 0..n {
            for j in i + 1..n {
                let a = self.central_of_girdle(i);
                let b = self.central_of_girdle(j);
                let shared: BTreeSet<Cell> = a.intersection(&b).copied().collect();
                if shared != poles {
                    return Err(bad(format!("girdles {} and {} share other central cells", i, j)));
                }
            }
        }
        let image = |g: &MapAutomorphism, seq: &[Cell]| -> Vec<Cell> {
            seq.iter().map(|&c| g.apply(map, c)).collect()
        };
        for (i, phi) in self.reflections.iter().enumerate() {
            for j in 0..m2 {
                let from = &self.meridians[(i + m2 - j) % m2];
                if image(phi, from) != self.meridians[(i + j) % m2] {
                    return Err(bad(format!("reflection {} does not swap meridians", i)));
                }
            }
        }
        for (k, rho) in self.rotations.iter().enumerate() {
            for j in 0..m2 {
                if image(rho, &self.meridians[j]) != self.meridians[(j + 2 * k) % m2] {
                    return Err(bad(format!("rotation {} does not shift meridians", k)));
                }
            }
        }
        Ok(())
    }
}

/// Girdles and meridians of `t` for the dihedral group `h`, numbered from
/// the first invariant cell in the clockwise incidence list of the root.
pub fn all_girdles(t: &RootedTriangulation, h: &[MapAutomorphism]) -> Result<MeridianSet> {
    meridian_set(t, h, 0)
}

fn meridian_set(t: &RootedTriangulation, h: &[MapAutomorphism], shift: usize) -> Result<MeridianSet> {
    let map = t.map();
    let c0 = t.c0;
    let (refl, rot) = split_dihedral(map, c0, h)?;
    let n = refl.len();
    let m2 = 2 * n;
    let inc = map.incident_cells_cyclic(c0)?;
    let inv: Vec<Cell> = inc
        .iter()
        .copied()
        .filter(|&c| refl.iter().any(|r| r.fixes(map, c)))
        .collect();
    if inv.len() != m2 {
        return Err(bad(format!("{} invariant cells at the root, expected {}", inv.len(), m2)));
    }
    let a: Vec<Cell> = (0..m2).map(|i| inv[(i + shift) % m2]).collect();
    let mut reflections = Vec::with_capacity(n);
    for i in 0..n {
        let r = refl
            .iter()
            .find(|r| r.fixes(map, a[i]))
            .ok_or_else(|| bad("invariant cell without reflection"))?;
        if !r.fixes(map, a[n + i]) {
            return Err(bad("reflection does not fix opposite cells"));
        }
        reflections.push((*r).clone());
    }
    let rho = rot
        .iter()
        .find(|g| g.apply(map, a[0]) == a[2 % m2])
        .ok_or_else(|| bad("no rotation by two invariant cells"))?;
    let rotations: Vec<MapAutomorphism> = (0..n).map(|k| rho.pow(k)).collect();
    let south: Vec<Cell> = fixed_cells(map, rho)
        .into_iter()
        .filter(|&c| c != c0)
        .collect();
    if south.len() != 1 {
        return Err(bad(format!("{} south pole candidates", south.len())));
    }
    let south = south[0];
    let mut meridians = vec![Vec::new(); m2];
    for i in 0..n {
        let cyc = invariant_cycle_in(map, &reflections[i], c0)?.cells;
        let k = cyc
            .iter()
            .position(|&c| c == south)
            .ok_or_else(|| bad("south pole is not central"))?;
        let first = cyc[..=k].to_vec();
        let mut second = vec![c0];
        second.extend(cyc[k..].iter().rev());
        let (p, q) = if first[1] == a[i] {
            (first, second)
        } else if second[1] == a[i] {
            (second, first)
        } else {
            return Err(bad("girdle misses its invariant cell"));
        };
        meridians[i] = p;
        meridians[n + i] = q;
    }
    let girdles = reflections
        .iter()
        .map(|r| build_girdle(t, r))
        .collect::<Result<Vec<_>>>()?;
    let set = MeridianSet {
        n,
        north: c0,
        south,
        a,
        reflections,
        rotations,
        girdles,
        meridians,
    };
    set.check(map)?;
    Ok(set)
}

/// Structure of the skeleton at a pole.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PoleCase {
    /// Vertex pole; no two meridians share a cell at it.
    VertexDisjoint,
    /// Vertex pole; adjacent meridians share their first `k` edges.
    VertexShared(usize),
    /// Edge pole; two meridians through its ends, two through its faces.
    Edge,
    /// Face pole; no two meridians share a cell at exactly one corner.
    FaceDisjoint,
    /// Face pole; adjacent meridians share their first `k` edges.
    FaceShared(usize),
}

impl PoleCase {
    pub fn k(&self) -> usize {
        match *self {
            PoleCase::VertexShared(k) | PoleCase::FaceShared(k) => k,
            _ => 0,
        }
    }

    pub fn dim(&self) -> RootDim {
        match self {
            PoleCase::VertexDisjoint | PoleCase::VertexShared(_) => RootDim::Vertex,
            PoleCase::Edge => RootDim::Edge,
            PoleCase::FaceDisjoint | PoleCase::FaceShared(_) => RootDim::Face,
        }
    }
}

/// Kind of a central cell of a meridian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CentralClass {
    Pole,
    PoleBoundary,
    Lone,
    Touching,
}

#[derive(Debug, Clone)]
pub struct Meridian {
    pub central: Vec<Cell>,
    /// Central cells and their boundaries.
    pub cells: BTreeSet<Cell>,
    /// Side paths from north to south facing the next and the previous
    /// meridian.
    pub east: Vec<usize>,
    pub west: Vec<usize>,
}

impl Meridian {
    pub fn is_central_vertex(&self, v: usize) -> bool {
        self.central.contains(&Cell::Vertex(v))
    }
}

/// A segment of the skeleton with its insertion rooting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub face: usize,
    pub v: usize,
    pub w: usize,
    pub e: usize,
    /// Boundary walked from `v` along `e`.
    pub walk: Vec<usize>,
    /// Position of `w` on `walk`.
    pub w_pos: usize,
    /// Positions on the side through `e` that are outer in its meridian.
    pub d_right: BTreeSet<usize>,
    /// Positions on the other side that are outer in its meridian.
    pub d_left: BTreeSet<usize>,
}

#[derive(Debug, Clone)]
pub struct Skeleton {
    pub map: PlanarMap,
    /// Host vertex of every skeleton vertex.
    pub origin: Vec<usize>,
    pub n: usize,
    pub north: Cell,
    pub south: Cell,
    pub meridians: Vec<Meridian>,
    /// `segments[i][j]`: segment `j` of sector `i`, ordered north to south.
    pub segments: Vec<Vec<Segment>>,
    pub north_case: PoleCase,
    pub south_case: PoleCase,
    /// `k_1 .. k_{s-1}`.
    pub touching: Vec<usize>,
}

fn flag_of(map: &PlanarMap, cells: [Cell; 3]) -> Option<usize> {
    let (mut v, mut e, mut f) = (None, None, None);
    for c in cells {
        match c {
            Cell::Vertex(x) => v = Some(x),
            Cell::Edge(x) => e = Some(x),
            Cell::Face(x) => f = Some(x),
        }
    }
    map.flag_index(Flag {
        vertex: v?,
        edge: e?,
        face: f?,
    })
}

fn side_key(a: Cell, b: Cell) -> (Cell, Cell) {
    (a.min(b), a.max(b))
}

/// Boundary of face `f` walked from `v` towards the other end of `e`.
fn walk_from(map: &PlanarMap, f: usize, v: usize, e: usize) -> Option<Vec<usize>> {
    let fv = map.face_vertices(f);
    let k = fv.len();
    let (a, b) = map.edge_ends(e);
    let w = if a == v { b } else { a };
    let p = fv.iter().position(|&x| x == v)?;
    let step = if fv[(p + 1) % k] == w {
        1
    } else if fv[(p + k - 1) % k] == w {
        k - 1
    } else {
        return None;
    };
    Some((0..k).map(|i| fv[(p + i * step) % k]).collect())
}

/// Length of the common prefix of two vertex paths, in edges.
fn common_prefix(a: &[usize], b: &[usize]) -> Option<usize> {
    if a.first()? != b.first()? {
        return None;
    }
    Some(a.iter().zip(b).take_while(|(x, y)| x == y).count() - 1)
}

impl Skeleton {
    /// Analyse a map together with the central sequences of its meridians.
    pub fn from_meridians(
        map: PlanarMap,
        origin: Vec<usize>,
        north: Cell,
        south: Cell,
        central: Vec<Vec<Cell>>,
    ) -> Result<Skeleton> {
        let m2 = central.len();
        if m2 < 4 || m2 % 2 != 0 {
            return Err(bad(format!("{} meridians", m2)));
        }
        let n = m2 / 2;
        for seq in &central {
            if seq.len() < 2 || seq[0] != north || *seq.last().unwrap() != south {
                return Err(bad("meridian does not run from pole to pole"));
            }
            if seq.iter().any(|&c| !map.contains_cell(c)) {
                return Err(bad("meridian leaves the map"));
            }
            if seq.windows(2).any(|w| !map.is_incident(w[0], w[1])) {
                return Err(bad("consecutive central cells are not incident"));
            }
            if seq.iter().collect::<BTreeSet<_>>().len() != seq.len() {
                return Err(bad("meridian repeats a cell"));
            }
        }
        let central_sets: Vec<BTreeSet<Cell>> =
            central.iter().map(|s| s.iter().copied().collect()).collect();
        let cells: Vec<BTreeSet<Cell>> = central
            .iter()
            .map(|seq| {
                let mut out = BTreeSet::new();
                for &c in seq {
                    out.insert(c);
                    out.extend(map.cell_vertices(c).into_iter().map(Cell::Vertex));
                    out.extend(map.cell_edges(c).into_iter().map(Cell::Edge));
                }
                out
            })
            .collect();
        let poles = BTreeSet::from([north, south]);
        for i in 0..m2 {
            for j in i + 1..m2 {
                if central_sets[i].intersection(&central_sets[j]).any(|c| !poles.contains(c)) {
                    return Err(bad(format!("meridians {} and {} share a central cell", i, j)));
                }
            }
        }
        for e in 0..map.num_edges() {
            if !cells.iter().any(|c| c.contains(&Cell::Edge(e))) {
                return Err(bad("edge outside every meridian"));
            }
        }

        // sectors: flag components cut along the meridians
        let arcs: BTreeSet<(Cell, Cell)> = central
            .iter()
            .flat_map(|s| s.windows(2).map(|w| side_key(w[0], w[1])))
            .collect();
        let nf = map.num_flags();
        let mut dsu = Dsu::new(nf);
        for i in 0..nf {
            let fl = map.flag(i);
            let (cv, ce, cf) = (
                Cell::Vertex(fl.vertex),
                Cell::Edge(fl.edge),
                Cell::Face(fl.face),
            );
            let d = i / 2;
            let across_v = if i % 2 == 0 {
                2 * map.rev(d) + 1
            } else {
                2 * map.rev(d)
            };
            let across_e = if i % 2 == 0 {
                2 * map.rev(map.face_prev(d)) + 1
            } else {
                2 * map.face_next(map.rev(d))
            };
            if !arcs.contains(&side_key(ce, cf)) {
                dsu.union(i, across_v);
            }
            if !arcs.contains(&side_key(cv, ce)) {
                dsu.union(i, i ^ 1);
            }
            if !arcs.contains(&side_key(cv, cf)) {
                dsu.union(i, across_e);
            }
        }
        let inc = map.incident_cells_cyclic(north)?;
        let mut sector_of: BTreeMap<usize, usize> = BTreeMap::new();
        for (i, seq) in central.iter().enumerate() {
            let p = inc
                .iter()
                .position(|&c| c == seq[1])
                .ok_or_else(|| bad("meridian does not leave the north pole"))?;
            let fl = flag_of(&map, [north, seq[1], inc[(p + 1) % inc.len()]])
                .ok_or_else(|| bad("no flag at the north pole"))?;
            if sector_of.insert(dsu.find(fl), i).is_some() {
                return Err(bad("meridians do not separate the sectors"));
            }
        }
        let mut sector = vec![0usize; nf];
        for (i, s) in sector.iter_mut().enumerate() {
            *s = *sector_of
                .get(&dsu.find(i))
                .ok_or_else(|| bad("region outside every sector"))?;
        }
        let sector_at = |x: usize, f: usize| -> Option<usize> {
            map.darts_out(x)
                .find(|&d| map.face_of(d) == f)
                .map(|d| sector[2 * d])
        };

        // side paths
        let side_path = |i: usize, toward: usize| -> Result<Vec<usize>> {
            let seq = &central[i];
            let mut out: Vec<usize> = Vec::new();
            for (t, &c) in seq.iter().enumerate() {
                let pole = t == 0 || t + 1 == seq.len();
                let x = match c {
                    Cell::Vertex(x) => x,
                    Cell::Edge(_) => continue,
                    Cell::Face(_) if pole => continue,
                    Cell::Face(f) => {
                        let picks: Vec<usize> = map
                            .face_vertices(f)
                            .into_iter()
                            .filter(|&x| !central_sets[i].contains(&Cell::Vertex(x)))
                            .filter(|&x| sector_at(x, f) == Some(toward))
                            .collect();
                        if picks.len() != 1 {
                            return Err(bad("central face without a side corner"));
                        }
                        picks[0]
                    }
                };
                if out.last() != Some(&x) {
                    if let Some(&y) = out.last() {
                        if !map.has_edge(x, y) {
                            return Err(bad("side path is not a path"));
                        }
                    }
                    out.push(x);
                }
            }
            if out.iter().collect::<BTreeSet<_>>().len() != out.len() {
                return Err(bad("side path repeats a vertex"));
            }
            Ok(out)
        };
        let mut meridians = Vec::with_capacity(m2);
        for i in 0..m2 {
            meridians.push(Meridian {
                central: central[i].clone(),
                cells: cells[i].clone(),
                east: side_path(i, i)?,
                west: side_path(i, (i + m2 - 1) % m2)?,
            });
        }

        // segments
        let central_faces: BTreeSet<usize> = central
            .iter()
            .flatten()
            .filter_map(|c| match c {
                Cell::Face(f) => Some(*f),
                _ => None,
            })
            .collect();
        let mut segments: Vec<Vec<(usize, Segment)>> = vec![Vec::new(); m2];
        for f in 0..map.num_faces() {
            if central_faces.contains(&f) {
                continue;
            }
            let trace = map.face_darts(f).to_vec();
            let i = sector[2 * trace[0]];
            let i1 = (i + 1) % m2;
            let mut owner = Vec::with_capacity(trace.len());
            for &d in &trace {
                let e = Cell::Edge(map.edge_of(d));
                let across = Cell::Face(map.face_of(map.rev(d)));
                let o = [i, i1]
                    .into_iter()
                    .find(|&j| central_sets[j].contains(&e))
                    .or_else(|| [i, i1].into_iter().find(|&j| central_sets[j].contains(&across)))
                    .ok_or_else(|| bad("segment edge owned by no adjacent meridian"))?;
                owner.push(o);
            }
            let k = trace.len();
            let to_east: Vec<usize> = (0..k)
                .filter(|&t| owner[t] == i && owner[(t + 1) % k] == i1)
                .collect();
            let to_west: Vec<usize> = (0..k)
                .filter(|&t| owner[t] == i1 && owner[(t + 1) % k] == i)
                .collect();
            if to_east.len() != 1 || to_west.len() != 1 {
                return Err(bad("segment boundary is not two meridian paths"));
            }
            let (tv, tw) = (to_east[0], to_west[0]);
            let v = map.head(trace[tv]);
            let w = map.head(trace[tw]);
            let e = if i % 2 == 0 {
                map.edge_of(trace[tv])
            } else {
                map.edge_of(trace[(tv + 1) % k])
            };
            let walk = walk_from(&map, f, v, e).ok_or_else(|| bad("segment walk"))?;
            let w_pos = walk.iter().position(|&x| x == w).unwrap();
            let (rm, lm) = if i % 2 == 0 { (i, i1) } else { (i1, i) };
            let d_right = (0..=w_pos)
                .filter(|&p| !central_sets[rm].contains(&Cell::Vertex(walk[p])))
                .collect();
            let d_left = std::iter::once(0)
                .chain(w_pos..walk.len())
                .filter(|&p| !central_sets[lm].contains(&Cell::Vertex(walk[p])))
                .collect();
            // both sides lie on the side paths, north to south
            let east = &meridians[i].east;
            let west = &meridians[i1].west;
            let pos = |path: &[usize], x: usize| path.iter().position(|&y| y == x);
            let (Some(ev), Some(ew), Some(wv), Some(ww)) =
                (pos(east, v), pos(east, w), pos(west, v), pos(west, w))
            else {
                return Err(bad("segment corners off the side paths"));
            };
            if ev >= ew || wv >= ww {
                return Err(bad("segment corners in the wrong order"));
            }
            let fv = map.face_vertices(f);
            let pv = fv.iter().position(|&x| x == v).unwrap();
            let along: Vec<usize> = (0..k).map(|t| fv[(pv + t) % k]).collect();
            let mut expect: Vec<usize> = west[wv..ww].to_vec();
            expect.extend(east[ev + 1..=ew].iter().rev());
            if along != expect {
                return Err(bad("segment boundary differs from the side paths"));
            }
            segments[i].push((
                ev,
                Segment {
                    face: f,
                    v,
                    w,
                    e,
                    walk,
                    w_pos,
                    d_right,
                    d_left,
                },
            ));
        }
        let segments: Vec<Vec<Segment>> = segments
            .into_iter()
            .map(|mut v| {
                v.sort_by_key(|(p, _)| *p);
                v.into_iter().map(|(_, s)| s).collect()
            })
            .collect();
        let s = segments[0].len();
        if segments.iter().any(|v| v.len() != s) {
            return Err(bad("sectors hold different numbers of segments"));
        }

        // touching lengths along every sector
        let mut pole_k: Option<(usize, usize)> = None;
        let mut touching: Option<Vec<usize>> = None;
        for i in 0..m2 {
            let east = &meridians[i].east;
            let west = &meridians[(i + 1) % m2].west;
            let pos = |path: &[usize], x: usize| path.iter().position(|&y| y == x).unwrap();
            let kn = common_prefix(east, west).ok_or_else(|| bad("sides start apart"))?;
            let ks = {
                let re: Vec<usize> = east.iter().rev().copied().collect();
                let rw: Vec<usize> = west.iter().rev().copied().collect();
                common_prefix(&re, &rw).ok_or_else(|| bad("sides end apart"))?
            };
            let mut ks_list = Vec::new();
            if s == 0 {
                if east != west {
                    return Err(bad("sides differ in a sector without segments"));
                }
            } else {
                let segs = &segments[i];
                if pos(east, segs[0].v) != kn || pos(west, segs[0].v) != kn {
                    return Err(bad("first segment does not start where the sides part"));
                }
                let last = &segs[s - 1];
                if east.len() - 1 - pos(east, last.w) != ks || west.len() - 1 - pos(west, last.w) != ks {
                    return Err(bad("last segment does not end where the sides meet"));
                }
                for j in 0..s - 1 {
                    let (a, b) = (segs[j].w, segs[j + 1].v);
                    let (ae, be) = (pos(east, a), pos(east, b));
                    let (aw, bw) = (pos(west, a), pos(west, b));
                    if be < ae || bw < aw || east[ae..=be] != west[aw..=bw] {
                        return Err(bad("sides do not touch between segments"));
                    }
                    ks_list.push(be - ae);
                }
            }
            if *pole_k.get_or_insert((kn, ks)) != (kn, ks) {
                return Err(bad("pole structure differs between sectors"));
            }
            if *touching.get_or_insert(ks_list.clone()) != ks_list {
                return Err(bad("touching lengths differ between sectors"));
            }
        }
        let (kn, ks) = pole_k.unwrap();
        let touching = touching.unwrap();

        let mut sk = Skeleton {
            map,
            origin,
            n,
            north,
            south,
            meridians,
            segments,
            north_case: PoleCase::Edge,
            south_case: PoleCase::Edge,
            touching,
        };
        sk.check_touching_components()?;
        sk.north_case = sk.classify_pole(true, kn)?;
        sk.south_case = sk.classify_pole(false, ks)?;
        for i in 0..m2 {
            for &c in &sk.meridians[i].central {
                sk.central_class(i, c)?;
            }
        }
        Ok(sk)
    }

    pub fn s(&self) -> usize {
        self.segments[0].len()
    }

    fn pole_boundary(&self, pole: Cell) -> BTreeSet<Cell> {
        let mut out: BTreeSet<Cell> = self
            .map
            .cell_vertices(pole)
            .into_iter()
            .map(Cell::Vertex)
            .collect();
        out.extend(self.map.cell_edges(pole).into_iter().map(Cell::Edge));
        out.remove(&pole);
        out
    }

    /// Class of the central cell `c` of meridian `i`; the first that applies.
    pub fn central_class(&self, i: usize, c: Cell) -> Result<CentralClass> {
        let m2 = 2 * self.n;
        if !self.meridians[i].central.contains(&c) {
            return Err(bad("not a central cell"));
        }
        if c == self.north || c == self.south {
            return Ok(CentralClass::Pole);
        }
        if self.pole_boundary(self.north).contains(&c) || self.pole_boundary(self.south).contains(&c) {
            return Ok(CentralClass::PoleBoundary);
        }
        let others: BTreeSet<usize> = (0..m2)
            .filter(|&j| j != i && self.meridians[j].cells.contains(&c))
            .collect();
        if others.is_empty() {
            return Ok(CentralClass::Lone);
        }
        let adj = BTreeSet::from([(i + 1) % m2, (i + m2 - 1) % m2]);
        if others == adj && adj.iter().all(|&j| !self.meridians[j].central.contains(&c)) {
            return Ok(CentralClass::Touching);
        }
        Err(bad(format!(
            "central cell {} of meridian {} fits no class",
            self.map.cell_label(c),
            i
        )))
    }

    fn common_edges(&self, i: usize, j: usize) -> BTreeSet<usize> {
        let skip: BTreeSet<usize> = self
            .map
            .cell_edges(self.north)
            .into_iter()
            .chain(self.map.cell_edges(self.south))
            .collect();
        self.meridians[i]
            .cells
            .intersection(&self.meridians[j].cells)
            .filter_map(|c| match c {
                Cell::Edge(e) if !skip.contains(e) => Some(*e),
                _ => None,
            })
            .collect()
    }

    /// Edges of the component of `x` in the graph of `edges`, if it is a path
    /// starting at `x`.
    fn path_component(&self, edges: &BTreeSet<usize>, x: usize) -> Option<usize> {
        let mut seen_v = BTreeSet::from([x]);
        let mut stack = vec![x];
        let mut count = 0;
        while let Some(y) = stack.pop() {
            let next: Vec<usize> = edges
                .iter()
                .filter_map(|&e| {
                    let (a, b) = self.map.edge_ends(e);
                    if a == y {
                        Some(b)
                    } else if b == y {
                        Some(a)
                    } else {
                        None
                    }
                })
                .filter(|z| !seen_v.contains(z))
                .collect();
            if next.len() > 1 {
                return None;
            }
            for z in next {
                seen_v.insert(z);
                count += 1;
                stack.push(z);
            }
        }
        Some(count)
    }

    /// Adjacent meridians meet along the touching paths and nowhere else
    /// between two segments.
    fn check_touching_components(&self) -> Result<()> {
        let m2 = 2 * self.n;
        for i in 0..m2 {
            let common = self.common_edges(i, (i + 1) % m2);
            let segs = &self.segments[i];
            for j in 0..segs.len().saturating_sub(1) {
                let k = self
                    .path_component(&common, segs[j].w)
                    .ok_or_else(|| bad("meridians meet in more than a path"))?;
                if k != self.touching[j] {
                    return Err(bad("touching component has the wrong length"));
                }
            }
        }
        Ok(())
    }

    fn classify_pole(&self, north: bool, k_side: usize) -> Result<PoleCase> {
        let m2 = 2 * self.n;
        let pole = if north { self.north } else { self.south };
        let next: Vec<Cell> = self
            .meridians
            .iter()
            .map(|m| {
                if north {
                    m.central[1]
                } else {
                    m.central[m.central.len() - 2]
                }
            })
            .collect();
        let start: Vec<usize> = self
            .meridians
            .iter()
            .map(|m| {
                if north {
                    m.east[0]
                } else {
                    *m.east.last().unwrap()
                }
            })
            .collect();
        let pv: BTreeSet<usize> = self.map.cell_vertices(pole).into_iter().collect();
        // edges incident with exactly one pole vertex
        let spokes: Vec<usize> = (0..self.map.num_edges())
            .filter(|&e| {
                let (a, b) = self.map.edge_ends(e);
                pv.contains(&a) != pv.contains(&b)
            })
            .collect();
        let spoke_shared = || {
            spokes.iter().any(|&e| {
                self.meridians
                    .iter()
                    .filter(|m| m.cells.contains(&Cell::Edge(e)))
                    .count()
                    > 1
            })
        };
        // component lengths at the pole per adjacent pair
        let mut ks = BTreeSet::new();
        for i in 0..m2 {
            let i1 = (i + 1) % m2;
            let x = if self.meridians[i].east.len() > 1 || !north {
                start[i]
            } else {
                start[i]
            };
            let common = self.common_edges(i, i1);
            let k = if north {
                self.path_component(&common, x)
            } else {
                self.path_component(&common, *self.meridians[i].east.last().unwrap())
            }
            .ok_or_else(|| bad("meridians meet in more than a path at a pole"))?;
            ks.insert(k);
        }
        if ks.len() != 1 {
            return Err(bad("adjacent meridians meet differently at a pole"));
        }
        let k = *ks.iter().next().unwrap();
        if k != k_side {
            return Err(bad("shared pole prefix differs from the side paths"));
        }
        let alternating = |want: fn(&Cell) -> bool, other: fn(&Cell) -> bool| -> bool {
            let p0 = (0..2).all(|i| (0..self.n).all(|t| {
                let c = &next[(i + 2 * t) % m2];
                if i == 0 { want(c) } else { other(c) }
            }));
            let p1 = (0..2).all(|i| (0..self.n).all(|t| {
                let c = &next[(i + 2 * t) % m2];
                if i == 0 { other(c) } else { want(c) }
            }));
            p0 || p1
        };
        match pole {
            Cell::Vertex(_) => {
                if k == 0 {
                    if spoke_shared() {
                        return Err(bad("meridians meet at a vertex pole"));
                    }
                    Ok(PoleCase::VertexDisjoint)
                } else {
                    Ok(PoleCase::VertexShared(k))
                }
            }
            Cell::Edge(_) => {
                if self.n != 2 || k != 0 || !alternating(Cell::is_vertex, Cell::is_face) {
                    return Err(bad("edge pole structure"));
                }
                if spoke_shared() {
                    return Err(bad("meridians meet in an edge at an edge pole"));
                }
                Ok(PoleCase::Edge)
            }
            Cell::Face(_) => {
                if self.n != 3 || !alternating(Cell::is_vertex, Cell::is_edge) {
                    return Err(bad("face pole structure"));
                }
                if k == 0 {
                    if spoke_shared() {
                        return Err(bad("meridians meet at a face pole"));
                    }
                    Ok(PoleCase::FaceDisjoint)
                } else {
                    Ok(PoleCase::FaceShared(k))
                }
            }
        }
    }

    /// Isomorphism-invariant code with the north pole and the first two
    /// meridians marked.
    pub fn code(&self) -> Code {
        self.map.canonical_code_marked(&[
            vec![self.north],
            self.meridians[0].central.clone(),
            self.meridians[1].central.clone(),
        ])
    }

    /// Structure of the skeleton at the north or the south pole.
    pub fn pole_structure(&self, north: bool) -> PoleCase {
        if north {
            self.north_case
        } else {
            self.south_case
        }
    }

    pub fn touching_lengths(&self) -> &[usize] {
        &self.touching
    }

    fn profile(&self, i: usize) -> Result<MeridianProfile> {
        let seq = &self.meridians[i].central;
        let end = |pole: Cell, next: Cell| match (pole, next) {
            (Cell::Vertex(_), _) => PoleEnd::Pole,
            (_, Cell::Vertex(_)) => PoleEnd::Through,
            _ => PoleEnd::Half,
        };
        let north = end(self.north, seq[1]);
        let south = end(self.south, seq[seq.len() - 2]);
        let at: Vec<usize> = (0..seq.len()).filter(|&t| seq[t].is_vertex()).collect();
        let mut links = Vec::new();
        for w in at.windows(2) {
            links.push(match w[1] - w[0] {
                2 => Link::Edge,
                4 => Link::Diamond,
                _ => return Err(bad("central vertices too far apart")),
            });
        }
        Ok(MeridianProfile {
            north,
            links,
            south,
        })
    }

    /// Parameters that rebuild this skeleton.
    pub fn params(&self) -> Result<SkeletonParams> {
        let east = &self.meridians[0].east;
        let west = &self.meridians[1].west;
        let pos = |path: &[usize], x: usize| path.iter().position(|&y| y == x).unwrap() as i64;
        Ok(SkeletonParams {
            n: self.n,
            s: self.s(),
            north: PoleParams {
                dim: self.north_case.dim(),
                k: self.north_case.k() as i64,
            },
            south: PoleParams {
                dim: self.south_case.dim(),
                k: self.south_case.k() as i64,
            },
            touching: self.touching.iter().map(|&k| k as i64).collect(),
            even: self.profile(0)?,
            odd: self.profile(1)?,
            segments: self.segments[0]
                .iter()
                .map(|sg| SegmentParams {
                    v: [pos(east, sg.v), pos(west, sg.v)],
                    w: [pos(east, sg.w), pos(west, sg.w)],
                })
                .collect(),
        })
    }

    pub fn report(&self) -> Result<SkeletonFile> {
        let label = |c: Cell| self.map.cell_label(c);
        let mut segments = Vec::new();
        for (i, row) in self.segments.iter().enumerate() {
            for (j, sg) in row.iter().enumerate() {
                segments.push(SegmentFile {
                    sector: i,
                    index: j + 1,
                    face: label(Cell::Face(sg.face)),
                    length: sg.walk.len(),
                    v: sg.v + 1,
                    w: sg.w + 1,
                    e: label(Cell::Edge(sg.e)),
                });
            }
        }
        Ok(SkeletonFile {
            schema: 1,
            kind: "skeleton".into(),
            map: serialize_rs1(&self.map),
            north: label(self.north),
            south: label(self.south),
            meridians: self
                .meridians
                .iter()
                .map(|m| m.central.iter().map(|&c| label(c)).collect())
                .collect(),
            n: self.n,
            s: self.s(),
            north_case: self.north_case,
            south_case: self.south_case,
            touching: self.touching.clone(),
            params: self.params()?,
            segments,
        })
    }
}

/// Serialised skeleton; the map and the meridians are enough to rebuild it,
/// the other fields are checked against the rebuilt one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkeletonFile {
    pub schema: u32,
    pub kind: String,
    pub map: String,
    pub north: String,
    pub south: String,
    pub meridians: Vec<Vec<String>>,
    pub n: usize,
    pub s: usize,
    pub north_case: PoleCase,
    pub south_case: PoleCase,
    pub touching: Vec<usize>,
    pub params: SkeletonParams,
    pub segments: Vec<SegmentFile>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentFile {
    pub sector: usize,
    pub index: usize,
    pub face: String,
    pub length: usize,
    pub v: usize,
    pub w: usize,
    pub e: String,
}

impl SkeletonFile {
    pub fn to_skeleton(&self) -> Result<Skeleton> {
        if self.schema != 1 || self.kind != "skeleton" {
            return Err(bad_params("not a skeleton file"));
        }
        let map = parse_rs1(&self.map)?;
        let north = map.parse_cell(&self.north)?;
        let south = map.parse_cell(&self.south)?;
        let central = self
            .meridians
            .iter()
            .map(|m| m.iter().map(|s| map.parse_cell(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let origin = (0..map.num_vertices()).collect();
        let sk = Skeleton::from_meridians(map, origin, north, south, central)?;
        if sk.report()? != *self {
            return Err(bad_params("skeleton fields do not match its meridians"));
        }
        Ok(sk)
    }
}

/// How a meridian leaves or reaches a pole.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PoleEnd {
    /// The pole is a vertex and the meridian starts at it.
    Pole,
    /// The meridian runs through a vertex of the pole.
    Through,
    /// The meridian runs through a face (or edge and face) at the pole.
    Half,
}

/// Step between consecutive central vertices of a meridian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Link {
    Edge,
    Diamond,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeridianProfile {
    pub north: PoleEnd,
    pub links: Vec<Link>,
    pub south: PoleEnd,
}

impl MeridianProfile {
    /// Length of either side path, in edges.
    pub fn side_len(&self) -> usize {
        let half = |e: PoleEnd| usize::from(e == PoleEnd::Half);
        half(self.north)
            + half(self.south)
            + self
                .links
                .iter()
                .map(|l| match l {
                    Link::Edge => 1,
                    Link::Diamond => 2,
                })
                .sum::<usize>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoleParams {
    pub dim: RootDim,
    /// Shared prefix of adjacent meridians; 0 when they part at once.
    pub k: i64,
}

/// Corners of a segment of sector 0 as positions on the east side of
/// meridian 0 and the west side of meridian 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentParams {
    pub v: [i64; 2],
    pub w: [i64; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkeletonParams {
    pub n: usize,
    pub s: usize,
    pub north: PoleParams,
    pub south: PoleParams,
    pub touching: Vec<i64>,
    /// Meridians with even and odd index.
    pub even: MeridianProfile,
    pub odd: MeridianProfile,
    pub segments: Vec<SegmentParams>,
}

fn check_pole(p: &PoleParams, n: usize, ends: [PoleEnd; 2], name: &str) -> Result<()> {
    if p.k < 0 {
        return Err(bad_params(format!("negative shared length at the {} pole", name)));
    }
    match p.dim {
        RootDim::Vertex => {
            if ends != [PoleEnd::Pole; 2] {
                return Err(bad_params(format!("meridians must start at the {} vertex", name)));
            }
        }
        RootDim::Edge | RootDim::Face => {
            if p.dim == RootDim::Edge && n != 2 {
                return Err(bad_params(format!("an edge {} pole needs n = 2", name)));
            }
            if p.dim == RootDim::Face && n != 3 {
                return Err(bad_params(format!("a face {} pole needs n = 3", name)));
            }
            if p.dim == RootDim::Edge && p.k != 0 {
                return Err(bad_params("meridians cannot share an edge at an edge pole"));
            }
            let mut e = ends;
            e.sort_by_key(|x| *x as u8);
            if e != [PoleEnd::Through, PoleEnd::Half] {
                return Err(bad_params(format!(
                    "at the {} pole one parity runs through its vertices, the other through its faces",
                    name
                )));
            }
        }
    }
    Ok(())
}

/// Side vertex stretches glued in a sector: (east start, west start, length).
fn stretches(p: &SkeletonParams, flip: bool) -> Result<Vec<(usize, usize, usize)>> {
    let (le, lw) = if flip {
        (p.odd.side_len(), p.even.side_len())
    } else {
        (p.even.side_len(), p.odd.side_len())
    };
    let pick = |x: [i64; 2]| if flip { (x[1], x[0]) } else { (x[0], x[1]) };
    let (kn, ks) = (p.north.k, p.south.k);
    let mut out = Vec::new();
    if p.s == 0 {
        if kn != ks || kn as usize != le || le != lw {
            return Err(bad_params(
                "without segments adjacent meridians coincide from pole to pole",
            ));
        }
        out.push((0, 0, le));
        return Ok(out);
    }
    let mut at = (0i64, 0i64);
    let mut len = kn;
    for (j, sg) in p.segments.iter().enumerate() {
        let (ve, vw) = pick(sg.v);
        let (we, ww) = pick(sg.w);
        if ve != at.0 + len || vw != at.1 + len {
            return Err(bad_params(format!("segment {} does not start after the shared path", j + 1)));
        }
        out.push((at.0 as usize, at.1 as usize, len as usize));
        if we <= ve || ww <= vw || (we - ve) + (ww - vw) < 3 {
            return Err(bad_params(format!("segment {} is too short", j + 1)));
        }
        at = (we, ww);
        len = if j + 1 < p.s { p.touching[j] } else { ks };
    }
    if at.0 + len != le as i64 || at.1 + len != lw as i64 {
        return Err(bad_params("last segment does not end at the south shared path"));
    }
    out.push((at.0 as usize, at.1 as usize, len as usize));
    Ok(out)
}

fn validate(p: &SkeletonParams) -> Result<()> {
    if p.n < 2 {
        return Err(bad_params("n must be at least 2"));
    }
    check_pole(&p.north, p.n, [p.even.north, p.odd.north], "north")?;
    check_pole(&p.south, p.n, [p.even.south, p.odd.south], "south")?;
    if p.segments.len() != p.s {
        return Err(bad_params("s differs from the number of segments"));
    }
    if p.touching.len() != p.s.saturating_sub(1) {
        return Err(bad_params("need s - 1 touching lengths"));
    }
    if p.touching.iter().any(|&k| k < 0) {
        return Err(bad_params("negative touching length"));
    }
    if p
        .segments
        .iter()
        .any(|sg| sg.v.iter().chain(&sg.w).any(|&x| x < 0))
    {
        return Err(bad_params("negative segment position"));
    }
    for m in [&p.even, &p.odd] {
        let ends = [m.north, m.south];
        if m.links.is_empty() && ends.iter().all(|&e| e == PoleEnd::Pole) {
            return Err(bad_params("a meridian needs a link between vertex poles"));
        }
    }
    stretches(p, false)?;
    Ok(())
}

/// Skeleton described by `p`.
pub fn construct_skeleton(p: &SkeletonParams) -> Result<Skeleton> {
    validate(p)?;
    let n = p.n;
    let m2 = 2 * n;
    let prof = |i: usize| if i % 2 == 0 { &p.even } else { &p.odd };
    let mut nv = 0usize;
    let mut fresh = || {
        nv += 1;
        nv - 1
    };
    let c0 = fresh();
    let c1 = fresh();
    let mut pn = vec![usize::MAX; m2];
    let mut ps = vec![usize::MAX; m2];
    for i in 0..m2 {
        if prof(i).north == PoleEnd::Through {
            pn[i] = fresh();
        }
        if prof(i).south == PoleEnd::Through {
            ps[i] = fresh();
        }
    }
    let mut unions: Vec<(usize, usize)> = Vec::new();
    // central vertices and tips (east, west) of every meridian
    let mut xs: Vec<Vec<usize>> = Vec::with_capacity(m2);
    let mut tips: Vec<Vec<Option<(usize, usize)>>> = Vec::with_capacity(m2);
    for i in 0..m2 {
        let pr = prof(i);
        let mut x = vec![match pr.north {
            PoleEnd::Pole => c0,
            PoleEnd::Through => pn[i],
            PoleEnd::Half => fresh(),
        }];
        let mut t = Vec::new();
        for link in &pr.links {
            t.push(match link {
                Link::Edge => None,
                Link::Diamond => Some((fresh(), fresh())),
            });
            x.push(fresh());
        }
        let last = *x.last().unwrap();
        match pr.south {
            PoleEnd::Pole => unions.push((last, c1)),
            PoleEnd::Through => unions.push((last, ps[i])),
            PoleEnd::Half => {}
        }
        xs.push(x);
        tips.push(t);
    }
    let side = |i: usize, east: bool| -> Vec<usize> {
        let pr = prof(i);
        let nb = if east { (i + 1) % m2 } else { (i + m2 - 1) % m2 };
        let mut out = Vec::new();
        if pr.north == PoleEnd::Half {
            out.push(pn[nb]);
        }
        out.push(xs[i][0]);
        for (l, t) in tips[i].iter().enumerate() {
            if let Some((te, tw)) = t {
                out.push(if east { *te } else { *tw });
            }
            out.push(xs[i][l + 1]);
        }
        if pr.south == PoleEnd::Half {
            out.push(ps[nb]);
        }
        out
    };
    let mut faces: Vec<Vec<usize>> = Vec::new();
    for i in 0..m2 {
        let pr = prof(i);
        let x = &xs[i];
        for (l, t) in tips[i].iter().enumerate() {
            if let Some((te, tw)) = *t {
                faces.push(vec![x[l], te, tw]);
                faces.push(vec![te, x[l + 1], tw]);
            }
        }
        let (e, w) = ((i + 1) % m2, (i + m2 - 1) % m2);
        if pr.north == PoleEnd::Half {
            faces.push(vec![pn[e], x[0], pn[w]]);
        }
        if pr.south == PoleEnd::Half {
            faces.push(vec![*x.last().unwrap(), ps[e], ps[w]]);
        }
    }
    let through = |ends: &[usize]| -> usize { (0..m2).find(|&i| ends[i] != usize::MAX).unwrap() };
    if p.north.dim == RootDim::Face {
        let t = through(&pn);
        faces.push(vec![pn[(t + 4) % m2], pn[(t + 2) % m2], pn[t]]);
    }
    if p.south.dim == RootDim::Face {
        let t = through(&ps);
        faces.push(vec![ps[t], ps[(t + 2) % m2], ps[(t + 4) % m2]]);
    }
    for i in 0..m2 {
        let flip = i % 2 == 1;
        let east = side(i, true);
        let west = side((i + 1) % m2, false);
        for &(a, b, len) in &stretches(p, flip)? {
            for t in 0..=len {
                unions.push((east[a + t], west[b + t]));
            }
        }
        for sg in &p.segments {
            let (ve, vw, we, ww) = if flip {
                (sg.v[1], sg.v[0], sg.w[1], sg.w[0])
            } else {
                (sg.v[0], sg.v[1], sg.w[0], sg.w[1])
            };
            let (ve, vw, we, ww) = (ve as usize, vw as usize, we as usize, ww as usize);
            let mut f: Vec<usize> = east[ve..=we].iter().rev().copied().collect();
            f.extend(&west[vw + 1..ww]);
            faces.push(f);
        }
    }
    let mut dsu = Dsu::new(nv);
    for (a, b) in unions {
        dsu.union(a, b);
    }
    let mut label: BTreeMap<usize, usize> = BTreeMap::new();
    for f in &faces {
        for &x in f {
            let r = dsu.find(x);
            let k = label.len();
            label.entry(r).or_insert(k);
        }
    }
    let mut lab = |x: usize| label[&dsu.find(x)];
    let faces: Vec<Vec<usize>> = faces
        .iter()
        .map(|f| f.iter().map(|&x| lab(x)).collect())
        .collect();
    for f in &faces {
        if f.iter().collect::<BTreeSet<_>>().len() != f.len() {
            return Err(bad_params("a face of the skeleton would repeat a vertex"));
        }
    }
    let nl = label.len();
    let map = map_from_faces(nl, &faces)
        .map_err(|e| bad_params(format!("parameters give no plane skeleton: {}", e)))?;
    let edge = |a: usize, b: usize| -> Result<Cell> {
        map.edge_between(a, b)
            .map(Cell::Edge)
            .ok_or_else(|| bad_params("missing skeleton edge"))
    };
    let face = |a: usize, b: usize| -> Result<Cell> {
        map.dart(a, b)
            .map(|d| Cell::Face(map.face_of(d)))
            .ok_or_else(|| bad_params("missing skeleton face"))
    };
    let north = match p.north.dim {
        RootDim::Vertex => Cell::Vertex(lab(c0)),
        RootDim::Edge => {
            let t = through(&pn);
            edge(lab(pn[t]), lab(pn[(t + 2) % m2]))?
        }
        RootDim::Face => {
            let t = through(&pn);
            face(lab(pn[(t + 4) % m2]), lab(pn[(t + 2) % m2]))?
        }
    };
    let south = match p.south.dim {
        RootDim::Vertex => Cell::Vertex(lab(c1)),
        RootDim::Edge => {
            let t = through(&ps);
            edge(lab(ps[t]), lab(ps[(t + 2) % m2]))?
        }
        RootDim::Face => {
            let t = through(&ps);
            face(lab(ps[t]), lab(ps[(t + 2) % m2]))?
        }
    };
    let mut central = Vec::with_capacity(m2);
    for i in 0..m2 {
        let pr = prof(i);
        let x: Vec<usize> = xs[i].iter().map(|&v| lab(v)).collect();
        let (e, w) = ((i + 1) % m2, (i + m2 - 1) % m2);
        let mut seq = Vec::new();
        match pr.north {
            PoleEnd::Pole => {}
            PoleEnd::Through => seq.push(north),
            PoleEnd::Half => {
                seq.push(north);
                if p.north.dim == RootDim::Face {
                    seq.push(edge(lab(pn[w]), lab(pn[e]))?);
                }
                seq.push(face(lab(pn[e]), x[0])?);
            }
        }
        seq.push(Cell::Vertex(x[0]));
        for (l, t) in tips[i].iter().enumerate() {
            let (a, b) = (x[l], x[l + 1]);
            match *t {
                None => seq.push(edge(a, b)?),
                Some((te, tw)) => {
                    let (te, tw) = (lab(te), lab(tw));
                    seq.push(face(a, te)?);
                    seq.push(edge(te, tw)?);
                    seq.push(face(te, b)?);
                }
            }
            seq.push(Cell::Vertex(b));
        }
        let last = *x.last().unwrap();
        match pr.south {
            PoleEnd::Pole => {}
            PoleEnd::Through => seq.push(south),
            PoleEnd::Half => {
                seq.push(face(last, lab(ps[e]))?);
                if p.south.dim == RootDim::Face {
                    seq.push(edge(lab(ps[w]), lab(ps[e]))?);
                }
                seq.push(south);
            }
        }
        central.push(seq);
    }
    let origin = (0..nl).collect();
    let sk = Skeleton::from_meridians(map, origin, north, south, central)
        .map_err(|e| bad_params(format!("parameters give no skeleton: {}", e)))?;
    let got = sk.params()?;
    if got != *p {
        return Err(bad_params(format!(
            "parameters are not realised as given (the skeleton reads back as {:?})",
            got
        )));
    }
    Ok(sk)
}

/// Whether every chord of `n` with both ends on one side has an end in that
/// side's set. Positions are taken on the outer cycle from the root; the
/// right side runs from position 0 to `w`, the left one from `w` back to 0.
pub fn is_two_sided_chordless(
    n: &NearTriangulation,
    w: usize,
    d_left: &BTreeSet<usize>,
    d_right: &BTreeSet<usize>,
) -> bool {
    let k = n.outer_len();
    if w == 0 || w >= k {
        return false;
    }
    let on_right = |x: usize| x <= w;
    let on_left = |x: usize| x == 0 || x >= w;
    n.chord_positions().into_iter().all(|(a, b)| {
        let right_ok = !(on_right(a) && on_right(b)) || d_right.contains(&a) || d_right.contains(&b);
        let left_ok = !(on_left(a) && on_left(b)) || d_left.contains(&a) || d_left.contains(&b);
        right_ok && left_ok
    })
}

/// Skeleton of `t` as a map of its own, for the meridians of `set`.
fn skeleton_of(t: &RootedTriangulation, set: &MeridianSet) -> Result<Skeleton> {
    let map = t.map();
    let mut verts = BTreeSet::new();
    let mut edges = BTreeSet::new();
    for m in &set.meridians {
        for &c in m {
            verts.extend(map.cell_vertices(c));
            edges.extend(map.cell_edges(c));
        }
    }
    let origin: Vec<usize> = verts.into_iter().collect();
    let label: BTreeMap<usize, usize> = origin.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let rot: Vec<Vec<usize>> = origin
        .iter()
        .map(|&x| {
            map.rotation(x)
                .iter()
                .filter(|&&y| map.edge_between(x, y).is_some_and(|e| edges.contains(&e)))
                .map(|y| label[y])
                .collect()
        })
        .collect();
    let s = build_map(rot)?;
    let cell = |c: Cell| -> Cell {
        match c {
            Cell::Vertex(v) => Cell::Vertex(label[&v]),
            Cell::Edge(e) => {
                let (a, b) = map.edge_ends(e);
                Cell::Edge(s.edge_between(label[&a], label[&b]).unwrap())
            }
            Cell::Face(f) => {
                let d = map.face_darts(f)[0];
                Cell::Face(s.face_of(s.dart(label[&map.tail(d)], label[&map.head(d)]).unwrap()))
            }
        }
    };
    let central = set
        .meridians
        .iter()
        .map(|m| m.iter().map(|&c| cell(c)).collect())
        .collect();
    let (north, south) = (cell(set.north), cell(set.south));
    Skeleton::from_meridians(s, origin, north, south, central)
}

/// Skeleton of `t` for the dihedral group `h` (see [`decompose_dihedral`]).
pub fn build_skeleton(t: &RootedTriangulation, h: &[MapAutomorphism]) -> Result<Skeleton> {
    Ok(decompose_dihedral(t, h)?.0)
}

fn decompose_at(
    t: &RootedTriangulation,
    h: &[MapAutomorphism],
    shift: usize,
) -> Result<(Skeleton, Vec<NearTriangulation>)> {
    let set = meridian_set(t, h, shift)?;
    let sk = skeleton_of(t, &set)?;
    let mut fillings = Vec::with_capacity(sk.s());
    for j in 0..sk.s() {
        let mut first: Option<Code> = None;
        for (i, row) in sk.segments.iter().enumerate() {
            let sg = &row[j];
            let cycle: Vec<usize> = sk
                .map
                .face_vertices(sg.face)
                .iter()
                .map(|&x| sk.origin[x])
                .collect();
            let (a, b) = sk.map.edge_ends(sg.e);
            let nt = induced_near_triangulation(
                t.map(),
                &cycle,
                sk.origin[sg.v],
                (sk.origin[a], sk.origin[b]),
            )?;
            let code = nt.code();
            match &first {
                None => first = Some(code),
                Some(c) if *c != code => {
                    return Err(bad(format!("segment {} of sector {} has another filling", j + 1, i)))
                }
                _ => {}
            }
            if i == 0 {
                if !is_two_sided_chordless(&nt, sg.w_pos, &sg.d_left, &sg.d_right) {
                    return Err(bad("segment filling has a chord between central vertices"));
                }
                fillings.push(nt);
            }
        }
    }
    Ok((sk, fillings))
}

fn decomposition_key(d: &(Skeleton, Vec<NearTriangulation>)) -> (Code, Vec<Code>) {
    (d.0.code(), d.1.iter().map(|n| n.code()).collect())
}

/// Both decompositions of `t`: meridians numbered from an invariant cell of
/// either parity. The first entry has the smaller code.
pub fn decompose_dihedral_both(
    t: &RootedTriangulation,
    h: &[MapAutomorphism],
) -> Result<[(Skeleton, Vec<NearTriangulation>); 2]> {
    let mut a = decompose_at(t, h, 0)?;
    let mut b = decompose_at(t, h, 1)?;
    if decomposition_key(&b) < decomposition_key(&a) {
        std::mem::swap(&mut a, &mut b);
    }
    Ok([a, b])
}

/// Skeleton and one filling per segment orbit, for the dihedral group `h`.
pub fn decompose_dihedral(
    t: &RootedTriangulation,
    h: &[MapAutomorphism],
) -> Result<(Skeleton, Vec<NearTriangulation>)> {
    let [a, _] = decompose_dihedral_both(t, h)?;
    Ok(a)
}

/// Insert `fillings[j]` into every segment `j` of `sk`.
pub fn compose_dihedral(sk: &Skeleton, fillings: &[NearTriangulation]) -> Result<RootedTriangulation> {
    if fillings.len() != sk.s() {
        return Err(Error::LengthMismatch {
            expected: sk.s(),
            got: fillings.len(),
        });
    }
    for (j, nt) in fillings.iter().enumerate() {
        let sg = &sk.segments[0][j];
        if nt.outer_len() != sg.walk.len() {
            return Err(Error::LengthMismatch {
                expected: sg.walk.len(),
                got: nt.outer_len(),
            });
        }
        if !is_two_sided_chordless(nt, sg.w_pos, &sg.d_left, &sg.d_right) {
            return Err(Error::ChordViolation(format!(
                "filling {} joins two central vertices of one meridian",
                j + 1
            )));
        }
    }
    let items: Vec<Insertion> = sk
        .segments
        .iter()
        .flat_map(|row| {
            row.iter().zip(fillings).map(|(sg, nt)| Insertion {
                face: sg.face,
                vertex: sg.v,
                edge: sg.e,
                near: nt,
            })
        })
        .collect();
    let h = insert_many(&sk.map, &items)?;
    let c0 = carry_cell(&sk.map, &h, sk.north);
    RootedTriangulation::new(validate_triangulation(h)?, c0)
}
