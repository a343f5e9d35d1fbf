//! Rotative decomposition.
//!
//! For a root `c0` and a cyclic group `H` of rotations fixing it, the cells
//! between the two poles are organised in levels (plane symmetric cacti),
//! connected by liaison edges. Their union, cut down to its block containing
//! both poles, is the fyke net; its leaves, segments and pseudo-antarctic
//! faces carry the near-triangulations that make up the rest of `T`.
//!
//! Orientation: "clockwise around the north pole" along an invariant cycle
//! means walking it with the south side on the left.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::automorphism::{fixed_cells, rooted_elements, rotation_generator, MapAutomorphism};
use crate::core_map::{build_map, parse_rs1, serialize_rs1, Cell, Code, PlanarMap};
use crate::error::{Error, Result};
use crate::girdle::carry_cell;
use crate::triangulation::{
    induced_near_triangulation, insert_many, parse_near_rs1, validate_triangulation, Insertion,
    NearTriangulation, RootedTriangulation,
};

mod construct;
pub use construct::{
    construct_fyke_net, default_fillings, fyke_params, near_from_triangles, segment_filler,
    BranchParams, FykeParams, LevelParams, SouthParams,
};

pub(crate) type Edge = (usize, usize);

pub(crate) fn ek(a: usize, b: usize) -> Edge {
    (a.min(b), a.max(b))
}

fn broken(msg: impl Into<String>) -> Error {
    Error::InvariantViolation(msg.into())
}

/// A rotation `phi` of order `m` fixing exactly the two poles.
#[derive(Debug, Clone)]
pub struct PoleRotation {
    pub phi: MapAutomorphism,
    pub m: usize,
    pub c0: Cell,
    pub c1: Cell,
}

/// Rotations at `c0` forming the cyclic group of the given order, or all of
/// them when `order` is `None`.
pub fn rotation_subgroup(
    map: &PlanarMap,
    c0: Cell,
    order: Option<usize>,
) -> Result<Vec<MapAutomorphism>> {
    let rot: Vec<MapAutomorphism> = rooted_elements(map, c0)
        .into_iter()
        .filter(|a| !a.is_reflection())
        .collect();
    let sub: Vec<MapAutomorphism> = match order {
        None => rot,
        Some(k) => rot.into_iter().filter(|a| k % a.order() == 0).collect(),
    };
    if sub.len() < 2 || order.map_or(false, |k| k != sub.len()) {
        return Err(Error::NoRotation);
    }
    Ok(sub)
}

/// Generator, order and south pole of a rotation group at `c0`.
pub fn pole_rotation(map: &PlanarMap, c0: Cell, h: &[MapAutomorphism]) -> Result<PoleRotation> {
    if h.iter().any(|a| a.is_reflection()) {
        return Err(Error::BadParams("group contains a reflection".into()));
    }
    if !h.iter().all(|a| a.fixes(map, c0)) {
        return Err(Error::NoRotation);
    }
    let phi = rotation_generator(map, h, c0).ok_or(Error::NoRotation)?;
    let m = h.len();
    if phi.order() != m {
        return Err(Error::BadParams("rotation group is not cyclic".into()));
    }
    let others: Vec<Cell> = fixed_cells(map, &phi)
        .into_iter()
        .filter(|&c| c != c0)
        .collect();
    if others.len() != 1 {
        return Err(broken(format!(
            "rotation fixes {} cells besides the root",
            others.len()
        )));
    }
    Ok(PoleRotation {
        phi,
        m,
        c0,
        c1: others[0],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LevelKind {
    Ordinary,
    Antarctic,
    PseudoAntarctic,
}

/// One level: a plane symmetric cactus with its centre and branches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Level {
    pub vertices: BTreeSet<usize>,
    pub edges: BTreeSet<Edge>,
    /// Centre vertices, clockwise around the north pole.
    pub centre: Vec<usize>,
    pub centre_edges: BTreeSet<Edge>,
    /// Base of the branch containing each vertex.
    pub base_of: BTreeMap<usize, usize>,
    pub kind: LevelKind,
}

impl Level {
    pub fn is_terminal(&self) -> bool {
        self.kind != LevelKind::Ordinary
    }
}

fn start_face(map: &PlanarMap, c: Cell) -> usize {
    match c {
        Cell::Vertex(v) => map.face_of(map.darts_out(v).start),
        Cell::Edge(e) => map.face_of(map.edge_dart(e)),
        Cell::Face(f) => f,
    }
}

/// Faces reachable from `start` without crossing an edge of `barrier`.
fn flood(map: &PlanarMap, start: usize, barrier: &BTreeSet<Edge>) -> BTreeSet<usize> {
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(f) = queue.pop_front() {
        for &d in map.face_darts(f) {
            if barrier.contains(&ek(map.tail(d), map.head(d))) {
                continue;
            }
            let g = map.face_of(map.rev(d));
            if seen.insert(g) {
                queue.push_back(g);
            }
        }
    }
    seen
}

/// Boundary of a face region as a cycle, walked with the region on the left.
fn region_boundary(
    map: &PlanarMap,
    region: &BTreeSet<usize>,
    edges: &BTreeSet<Edge>,
) -> Result<Vec<usize>> {
    let mut next: BTreeMap<usize, usize> = BTreeMap::new();
    for d in 0..map.num_darts() {
        let (x, y) = (map.tail(d), map.head(d));
        if edges.contains(&ek(x, y))
            && region.contains(&map.face_of(d))
            && !region.contains(&map.face_of(map.rev(d)))
        {
            if next.insert(x, y).is_some() {
                return Err(broken("region boundary is not a cycle"));
            }
        }
    }
    let first = *next
        .keys()
        .next()
        .ok_or_else(|| broken("empty region boundary"))?;
    let mut cyc = vec![first];
    let mut x = next[&first];
    while x != first {
        cyc.push(x);
        x = *next.get(&x).ok_or_else(|| broken("open region boundary"))?;
        if cyc.len() > next.len() {
            return Err(broken("region boundary revisits a vertex"));
        }
    }
    if cyc.len() != next.len() {
        return Err(broken("region boundary has several cycles"));
    }
    Ok(cyc)
}

fn closure_edges(map: &PlanarMap, c: Cell) -> BTreeSet<Edge> {
    map.cell_edges(c)
        .into_iter()
        .map(|e| {
            let (a, b) = map.edge_ends(e);
            ek(a, b)
        })
        .collect()
}

fn contains_closure(
    map: &PlanarMap,
    c: Cell,
    verts: &BTreeSet<usize>,
    edges: &BTreeSet<Edge>,
) -> bool {
    map.cell_vertices(c).iter().all(|v| verts.contains(v)) && closure_edges(map, c).is_subset(edges)
}

/// Connected components of a graph given by vertices and edges.
fn components(verts: &BTreeSet<usize>, edges: &BTreeSet<Edge>) -> Vec<BTreeSet<usize>> {
    let mut adj: BTreeMap<usize, Vec<usize>> = verts.iter().map(|&v| (v, Vec::new())).collect();
    for &(a, b) in edges {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &s in adj.keys() {
        if seen.contains(&s) {
            continue;
        }
        let mut comp = BTreeSet::from([s]);
        seen.insert(s);
        let mut stack = vec![s];
        while let Some(x) = stack.pop() {
            for &y in &adj[&x] {
                if seen.insert(y) {
                    comp.insert(y);
                    stack.push(y);
                }
            }
        }
        out.push(comp);
    }
    out
}

/// Centre, kind and branch bases of a cactus known to contain or surround `c1`.
fn level_from_cactus(
    map: &PlanarMap,
    c1: Cell,
    vertices: BTreeSet<usize>,
    edges: BTreeSet<Edge>,
) -> Result<Level> {
    let (centre, centre_edges, kind) = if contains_closure(map, c1, &vertices, &edges) {
        let centre = match c1 {
            Cell::Vertex(v) => vec![v],
            Cell::Edge(e) => {
                let (a, b) = map.edge_ends(e);
                vec![a, b]
            }
            Cell::Face(f) => map.face_vertices(f),
        };
        (centre, closure_edges(map, c1), LevelKind::Antarctic)
    } else {
        let region = flood(map, start_face(map, c1), &edges);
        let centre = region_boundary(map, &region, &edges)?;
        let k = centre.len();
        let ce: BTreeSet<Edge> = (0..k).map(|i| ek(centre[i], centre[(i + 1) % k])).collect();
        let touches = map.cell_vertices(c1).iter().any(|v| centre.contains(v));
        let kind = if !c1.is_vertex() && touches {
            LevelKind::PseudoAntarctic
        } else {
            LevelKind::Ordinary
        };
        (centre, ce, kind)
    };
    let rest: BTreeSet<Edge> = edges.difference(&centre_edges).copied().collect();
    let mut base_of = BTreeMap::new();
    for comp in components(&vertices, &rest) {
        let bases: Vec<usize> = centre
            .iter()
            .copied()
            .filter(|v| comp.contains(v))
            .collect();
        if bases.len() != 1 {
            return Err(broken(format!(
                "branch meets the centre in {} vertices",
                bases.len()
            )));
        }
        for v in comp {
            base_of.insert(v, bases[0]);
        }
    }
    Ok(Level {
        vertices,
        edges,
        centre,
        centre_edges,
        base_of,
        kind,
    })
}

/// The first level: the cycle around the north pole.
pub fn first_level(map: &PlanarMap, c0: Cell, c1: Cell) -> Result<Level> {
    let cycle: Vec<usize> = match c0 {
        Cell::Vertex(v) => map.rotation(v).to_vec(),
        Cell::Edge(e) => {
            let (a, b) = map.edge_ends(e);
            let apex = |d: usize| {
                let f = map.face_of(d);
                *map.face_vertices(f)
                    .iter()
                    .find(|&&x| x != a && x != b)
                    .unwrap()
            };
            vec![
                a,
                apex(map.dart(a, b).unwrap()),
                b,
                apex(map.dart(b, a).unwrap()),
            ]
        }
        Cell::Face(f) => map.face_vertices(f),
    };
    let k = cycle.len();
    let vertices: BTreeSet<usize> = cycle.iter().copied().collect();
    let edges: BTreeSet<Edge> = (0..k).map(|i| ek(cycle[i], cycle[(i + 1) % k])).collect();
    level_from_cactus(map, c1, vertices, edges)
}

/// The level following a non-terminal one.
pub fn next_level(map: &PlanarMap, c1: Cell, level: &Level) -> Result<Level> {
    if level.is_terminal() {
        return Err(Error::AlreadyTerminal);
    }
    let on_c: BTreeSet<usize> = level.centre.iter().copied().collect();
    let region = flood(map, start_face(map, c1), &level.centre_edges);
    let mut fv = BTreeSet::new();
    let mut fe = BTreeSet::new();
    for &f in &region {
        let verts = map.face_vertices(f);
        if !verts.iter().any(|v| on_c.contains(v)) {
            continue;
        }
        for &d in map.face_darts(f) {
            let (x, y) = (map.tail(d), map.head(d));
            if !on_c.contains(&x) {
                fv.insert(x);
                if !on_c.contains(&y) {
                    fe.insert(ek(x, y));
                }
            }
        }
    }
    let start = start_face(map, c1);
    let mut chosen = Vec::new();
    for comp in components(&fv, &fe) {
        let ce: BTreeSet<Edge> = fe
            .iter()
            .copied()
            .filter(|(a, _)| comp.contains(a))
            .collect();
        let holds = contains_closure(map, c1, &comp, &ce)
            || flood(map, start, &ce)
                .iter()
                .all(|&f| map.face_vertices(f).iter().all(|v| !on_c.contains(v)));
        if holds {
            chosen.push((comp, ce));
        }
    }
    if chosen.len() != 1 {
        return Err(broken(format!(
            "{} candidate components for the next level",
            chosen.len()
        )));
    }
    let (comp, ce) = chosen.pop().unwrap();
    level_from_cactus(map, c1, comp, ce)
}

/// All levels from the north pole down to the terminal one.
pub fn levels(map: &PlanarMap, c0: Cell, c1: Cell) -> Result<Vec<Level>> {
    let mut out = vec![first_level(map, c0, c1)?];
    while !out.last().unwrap().is_terminal() {
        if out.len() > map.num_vertices() {
            return Err(broken("levels do not terminate"));
        }
        let next = next_level(map, c1, out.last().unwrap())?;
        out.push(next);
    }
    Ok(out)
}

/// Bases, sources and targets of the liaisons, `a * m` per level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiaisonTable {
    pub a: usize,
    pub m: usize,
    /// `bases[i][j]`, for every level `i`.
    pub bases: Vec<Vec<usize>>,
    /// `sources[i][j]` on the centre of level `i`, for `i < k`.
    pub sources: Vec<Vec<usize>>,
    /// `targets[i][j]` in level `i + 1`, for `i < k`.
    pub targets: Vec<Vec<usize>>,
}

impl LiaisonTable {
    /// Number of liaison steps `k`.
    pub fn depth(&self) -> usize {
        self.sources.len()
    }

    /// Distinct liaison edges with their level.
    pub fn edges(&self) -> BTreeSet<(usize, Edge)> {
        let mut out = BTreeSet::new();
        for i in 0..self.depth() {
            for (s, t) in self.sources[i].iter().zip(&self.targets[i]) {
                out.insert((i, ek(*s, *t)));
            }
        }
        out
    }

    fn relabel(&self, f: impl Fn(usize) -> usize) -> LiaisonTable {
        let g = |rows: &Vec<Vec<usize>>| {
            rows.iter()
                .map(|r| r.iter().map(|&x| f(x)).collect())
                .collect()
        };
        LiaisonTable {
            a: self.a,
            m: self.m,
            bases: g(&self.bases),
            sources: g(&self.sources),
            targets: g(&self.targets),
        }
    }
}

/// Starting points on the first level, clockwise around the north pole.
fn initial_bases(
    map: &PlanarMap,
    c0: Cell,
    first: &Level,
    m: usize,
) -> Result<(usize, Vec<usize>)> {
    match c0 {
        Cell::Vertex(v) => {
            let r = map.rotation(v).to_vec();
            if r.len() % m != 0 {
                return Err(broken("rotation order does not divide the root degree"));
            }
            Ok((r.len() / m, r))
        }
        Cell::Edge(e) => {
            let (a, b) = map.edge_ends(e);
            Ok((
                1,
                first
                    .centre
                    .iter()
                    .copied()
                    .filter(|&x| x != a && x != b)
                    .collect(),
            ))
        }
        Cell::Face(_) => Ok((1, first.centre.clone())),
    }
}

/// The liaison construction.
pub fn liaisons(map: &PlanarMap, rot: &PoleRotation, levels: &[Level]) -> Result<LiaisonTable> {
    let (a, b0) = initial_bases(map, rot.c0, &levels[0], rot.m)?;
    let n = a * rot.m;
    if b0.len() != n {
        return Err(broken("starting points do not match the rotation order"));
    }
    let mut bases = vec![b0];
    let mut sources = Vec::new();
    let mut targets = Vec::new();
    for i in 0..levels.len() - 1 {
        let c = &levels[i].centre;
        let l = c.len();
        let next = &levels[i + 1];
        let mut src = Vec::with_capacity(n);
        let mut tgt = Vec::with_capacity(n);
        let mut bs = Vec::with_capacity(n);
        for &u in &bases[i] {
            let p = c
                .iter()
                .position(|&x| x == u)
                .ok_or_else(|| broken("base off the centre"))?;
            let v = (0..l)
                .map(|t| c[(p + t) % l])
                .find(|&x| map.rotation(x).iter().any(|y| next.vertices.contains(y)))
                .ok_or_else(|| broken("no vertex of the centre sees the next level"))?;
            let pv = c.iter().position(|&x| x == v).unwrap();
            let r = map.rotation(v);
            let deg = r.len();
            let s = r.iter().position(|&y| y == c[(pv + 1) % l]).unwrap();
            let w = (1..=deg)
                .map(|t| r[(s + t) % deg])
                .find(|y| next.vertices.contains(y))
                .unwrap();
            src.push(v);
            tgt.push(w);
            bs.push(next.base_of[&w]);
        }
        sources.push(src);
        targets.push(tgt);
        bases.push(bs);
    }
    let table = LiaisonTable {
        a,
        m: rot.m,
        bases,
        sources,
        targets,
    };
    let phi_v = rot.phi.vertex_permutation(map);
    for rows in [&table.bases, &table.sources, &table.targets] {
        for row in rows {
            for j in 0..n {
                if phi_v[row[j]] != row[(j + a) % n] {
                    return Err(broken("liaisons are not rotation invariant"));
                }
            }
        }
    }
    Ok(table)
}

/// Edge sets of the blocks of a graph.
fn blocks(edges: &BTreeSet<Edge>) -> Vec<BTreeSet<Edge>> {
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(a, b) in edges {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let mut disc: BTreeMap<usize, usize> = BTreeMap::new();
    let mut low: BTreeMap<usize, usize> = BTreeMap::new();
    let mut stack: Vec<Edge> = Vec::new();
    let mut out = Vec::new();
    let mut time = 0;
    let roots: Vec<usize> = adj.keys().copied().collect();
    for r in roots {
        if disc.contains_key(&r) {
            continue;
        }
        disc.insert(r, time);
        low.insert(r, time);
        time += 1;
        // (vertex, parent, next neighbour index)
        let mut work: Vec<(usize, Option<usize>, usize)> = vec![(r, None, 0)];
        while let Some(&mut (x, parent, ref mut idx)) = work.last_mut() {
            if *idx < adj[&x].len() {
                let y = adj[&x][*idx];
                *idx += 1;
                if Some(y) == parent {
                    continue;
                }
                if let Some(&dy) = disc.get(&y) {
                    if dy < disc[&x] {
                        stack.push(ek(x, y));
                        let l = low[&x].min(dy);
                        low.insert(x, l);
                    }
                } else {
                    stack.push(ek(x, y));
                    disc.insert(y, time);
                    low.insert(y, time);
                    time += 1;
                    work.push((y, Some(x), 0));
                }
            } else {
                work.pop();
                if let Some(p) = parent {
                    let l = low[&p].min(low[&x]);
                    low.insert(p, l);
                    if low[&x] >= disc[&p] {
                        let mut block = BTreeSet::new();
                        while let Some(e) = stack.pop() {
                            block.insert(e);
                            if e == ek(p, x) {
                                break;
                            }
                        }
                        out.push(block);
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FaceClass {
    North,
    Leaf,
    Segment,
    PseudoAntarctic,
    South,
}

impl FaceClass {
    pub fn is_filled(self) -> bool {
        matches!(
            self,
            FaceClass::Leaf | FaceClass::Segment | FaceClass::PseudoAntarctic
        )
    }

    fn name(self) -> &'static str {
        match self {
            FaceClass::North => "north",
            FaceClass::Leaf => "leaf",
            FaceClass::Segment => "segment",
            FaceClass::PseudoAntarctic => "pseudo-antarctic",
            FaceClass::South => "south",
        }
    }

    fn parse(s: &str) -> Option<FaceClass> {
        [
            FaceClass::North,
            FaceClass::Leaf,
            FaceClass::Segment,
            FaceClass::PseudoAntarctic,
            FaceClass::South,
        ]
        .into_iter()
        .find(|c| c.name() == s)
    }
}

/// Positions on the outer cycle of a segment filling, walked from `v_j`
/// along the liaison to `w_j`: `w2` is the position of `w_{j+1}` (so
/// `v_{j+1}` sits at `w2 + 1`) and `u` that of the base `u_{j+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentMarkers {
    pub w2: usize,
    pub u: usize,
    /// Order two with `v_{j+1}` the image of `v_j`.
    pub order2: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FykeFace {
    pub class: FaceClass,
    /// Root vertex and root edge of the face, for filled classes.
    pub root: Option<(usize, usize)>,
    pub orbit: usize,
    pub markers: Option<SegmentMarkers>,
    /// Level and liaison index of a segment.
    pub segment: Option<(usize, usize)>,
}

/// The fyke net of a rooted triangulation with respect to a rotation group.
#[derive(Debug, Clone)]
pub struct FykeNet {
    pub map: PlanarMap,
    /// Vertex of the triangulation each vertex came from.
    pub origin: Vec<usize>,
    pub m: usize,
    pub north: Cell,
    pub south: Cell,
    pub south_kind: LevelKind,
    pub faces: Vec<FykeFace>,
    /// Vertex sets of the layers.
    pub layers: Vec<BTreeSet<usize>>,
    pub liaisons: LiaisonTable,
}

/// Everything the classification of fyke net faces needs, in net ids.
pub(crate) struct NetData {
    pub map: PlanarMap,
    pub origin: Vec<usize>,
    pub phi_vertex: Vec<usize>,
    pub m: usize,
    pub north: Cell,
    pub south: Cell,
    pub south_kind: LevelKind,
    pub level_vertices: Vec<BTreeSet<usize>>,
    pub level_edges: Vec<BTreeSet<Edge>>,
    pub base_of: Vec<BTreeMap<usize, usize>>,
    pub liaisons: LiaisonTable,
}

fn face_edges(map: &PlanarMap, f: usize) -> Vec<Edge> {
    map.face_darts(f)
        .iter()
        .map(|&d| ek(map.tail(d), map.head(d)))
        .collect()
}

fn cell_face_image(map: &PlanarMap, phi_vertex: &[usize], f: usize) -> Result<usize> {
    let d = map.face_darts(f)[0];
    let d2 = map
        .dart(phi_vertex[map.tail(d)], phi_vertex[map.head(d)])
        .ok_or_else(|| broken("rotation does not preserve the net"))?;
    Ok(map.face_of(d2))
}

impl NetData {
    fn is_north(&self, f: usize) -> bool {
        match self.north {
            Cell::Vertex(v) => self.map.face_vertices(f).contains(&v),
            Cell::Edge(e) => self
                .map
                .face_darts(f)
                .iter()
                .any(|&d| self.map.edge_of(d) == e),
            Cell::Face(g) => f == g,
        }
    }

    fn south_edge_on(&self, f: usize) -> Option<usize> {
        let se: BTreeSet<usize> = self.map.cell_edges(self.south).into_iter().collect();
        let hits: Vec<usize> = self
            .map
            .face_darts(f)
            .iter()
            .copied()
            .filter(|&d| se.contains(&self.map.edge_of(d)))
            .collect();
        if hits.len() == 1 {
            Some(hits[0])
        } else {
            None
        }
    }

    fn leaf_root(&self, f: usize, i: usize) -> Result<(usize, usize)> {
        let map = &self.map;
        let fv = map.face_vertices(f);
        let base = self.base_of[i][&fv[0]];
        let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &(a, b) in &self.level_edges[i] {
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
        let mut dist = BTreeMap::from([(base, 0usize)]);
        let mut queue = VecDeque::from([base]);
        while let Some(x) = queue.pop_front() {
            for &y in adj.get(&x).map(|v| v.as_slice()).unwrap_or(&[]) {
                if !dist.contains_key(&y) {
                    dist.insert(y, dist[&x] + 1);
                    queue.push_back(y);
                }
            }
        }
        let best = fv.iter().map(|v| dist[v]).min().unwrap();
        let closest: Vec<usize> = (0..fv.len()).filter(|&p| dist[&fv[p]] == best).collect();
        if closest.len() != 1 {
            return Err(broken("leaf has no unique vertex closest to its base"));
        }
        let p = closest[0];
        let k = fv.len();
        let v = fv[p];
        let e = map.edge_between(v, fv[(p + k - 1) % k]).unwrap();
        Ok((v, e))
    }

    /// Liaison groups: edge -> (level, indices).
    fn liaison_groups(&self) -> BTreeMap<Edge, (usize, Vec<usize>)> {
        let mut out: BTreeMap<Edge, (usize, Vec<usize>)> = BTreeMap::new();
        let t = &self.liaisons;
        for i in 0..t.depth() {
            for j in 0..t.sources[i].len() {
                out.entry(ek(t.sources[i][j], t.targets[i][j]))
                    .or_insert((i, Vec::new()))
                    .1
                    .push(j);
            }
        }
        out
    }

    fn segment_data(
        &self,
        f: usize,
        groups: &BTreeMap<Edge, (usize, Vec<usize>)>,
    ) -> Result<((usize, usize), SegmentMarkers, (usize, usize))> {
        let map = &self.map;
        let t = &self.liaisons;
        let n = t.a * t.m;
        let fv = map.face_vertices(f);
        let k = fv.len();
        if fv.iter().collect::<BTreeSet<_>>().len() != k {
            return Err(broken("segment is not bounded by a cycle"));
        }
        let mut west = None;
        let mut east = None;
        for p in 0..k {
            let (x, y) = (fv[p], fv[(p + 1) % k]);
            if let Some((i, js)) = groups.get(&ek(x, y)) {
                let j0 = js[0];
                if x == t.targets[*i][j0] {
                    if west.replace((*i, js.clone(), p)).is_some() {
                        return Err(broken("segment with several western liaisons"));
                    }
                } else if east.replace((*i, js.clone(), p)).is_some() {
                    return Err(broken("segment with several eastern liaisons"));
                }
            }
        }
        let (i, wj, pw) = west.ok_or_else(|| broken("segment without western liaison"))?;
        let (i2, ej, _) = east.ok_or_else(|| broken("segment without eastern liaison"))?;
        let last = *wj
            .iter()
            .find(|&&j| !wj.contains(&((j + 1) % n)))
            .ok_or_else(|| broken("liaison group covers every index"))?;
        let first = (last + 1) % n;
        if i != i2 || !ej.contains(&first) {
            return Err(broken("segment liaisons are not consecutive"));
        }
        // walk against the face trace, starting at v_j then w_j
        let vj = fv[(pw + 1) % k];
        let start = (pw + 1) % k;
        let walk: Vec<usize> = (0..k).map(|s| fv[(start + k - s) % k]).collect();
        let w2 = walk
            .iter()
            .position(|&x| x == t.targets[i][first])
            .ok_or_else(|| broken("eastern target missing"))?;
        if w2 + 1 >= k || walk[w2 + 1] != t.sources[i][first] {
            return Err(broken("eastern liaison out of place"));
        }
        let u = walk
            .iter()
            .position(|&x| x == t.bases[i][first])
            .ok_or_else(|| broken("base of the next liaison is off the segment"))?;
        if u <= w2 {
            return Err(broken("base of the next liaison is off the lower path"));
        }
        let order2 = self.m == 2 && self.phi_vertex[vj] == walk[w2 + 1];
        let e = map.edge_between(vj, walk[1]).unwrap();
        Ok(((vj, e), SegmentMarkers { w2, u, order2 }, (i, last)))
    }

    /// Classify the faces and finish the net.
    pub(crate) fn finish(self) -> Result<FykeNet> {
        let map = &self.map;
        let nf = map.num_faces();
        let groups = self.liaison_groups();
        let mut faces = Vec::with_capacity(nf);
        for f in 0..nf {
            let mut face = FykeFace {
                class: FaceClass::Segment,
                root: None,
                orbit: 0,
                markers: None,
                segment: None,
            };
            let fe = face_edges(map, f);
            if self.is_north(f) {
                face.class = FaceClass::North;
            } else if self.south == Cell::Face(f) {
                face.class = FaceClass::South;
            } else if self.south_kind == LevelKind::PseudoAntarctic
                && self.south_edge_on(f).is_some()
            {
                let d = self.south_edge_on(f).unwrap();
                face.class = FaceClass::PseudoAntarctic;
                face.root = Some((map.tail(d), map.edge_of(d)));
            } else if let Some(i) = (0..self.level_edges.len())
                .find(|&i| fe.iter().all(|e| self.level_edges[i].contains(e)))
            {
                face.class = FaceClass::Leaf;
                face.root = Some(self.leaf_root(f, i)?);
            } else {
                let (root, markers, seg) = self.segment_data(f, &groups)?;
                face.root = Some(root);
                face.markers = Some(markers);
                face.segment = Some(seg);
            }
            faces.push(face);
        }
        let mut orbit_of = vec![usize::MAX; nf];
        let mut next_orbit = 0;
        for f in 0..nf {
            if orbit_of[f] != usize::MAX {
                continue;
            }
            let mut g = f;
            loop {
                orbit_of[g] = next_orbit;
                g = cell_face_image(map, &self.phi_vertex, g)?;
                if g == f {
                    break;
                }
                if faces[g].class != faces[f].class {
                    return Err(broken("rotation mixes face classes"));
                }
            }
            next_orbit += 1;
        }
        for (f, face) in faces.iter_mut().enumerate() {
            face.orbit = orbit_of[f];
        }
        let layers = self
            .level_vertices
            .iter()
            .map(|s| {
                s.iter()
                    .copied()
                    .filter(|&v| v < map.num_vertices())
                    .collect()
            })
            .collect();
        Ok(FykeNet {
            map: self.map,
            origin: self.origin,
            m: self.m,
            north: self.north,
            south: self.south,
            south_kind: self.south_kind,
            faces,
            layers,
            liaisons: self.liaisons,
        })
    }
}

/// Intermediate objects of the rotative decomposition, in triangulation ids.
#[derive(Debug, Clone)]
pub struct FykeAnalysis {
    pub rotation: PoleRotation,
    pub levels: Vec<Level>,
    pub liaisons: LiaisonTable,
    /// Edges of the union before cutting down to one block.
    pub tilde_edges: BTreeSet<Edge>,
    /// Edges of the fyke net.
    pub net_edges: BTreeSet<Edge>,
    pub net: FykeNet,
}

fn cell_in(
    map: &PlanarMap,
    sub: &PlanarMap,
    index: &BTreeMap<usize, usize>,
    c: Cell,
) -> Result<Cell> {
    let lost = || broken("pole missing from the fyke net");
    Ok(match c {
        Cell::Vertex(v) => Cell::Vertex(*index.get(&v).ok_or_else(lost)?),
        Cell::Edge(e) => {
            let (a, b) = map.edge_ends(e);
            let (x, y) = (
                *index.get(&a).ok_or_else(lost)?,
                *index.get(&b).ok_or_else(lost)?,
            );
            Cell::Edge(sub.edge_between(x, y).ok_or_else(lost)?)
        }
        Cell::Face(f) => {
            let d = map.face_darts(f)[0];
            let (x, y) = (
                *index.get(&map.tail(d)).ok_or_else(lost)?,
                *index.get(&map.head(d)).ok_or_else(lost)?,
            );
            let g = sub.face_of(sub.dart(x, y).ok_or_else(lost)?);
            if sub.face_len(g) != map.face_len(f) {
                return Err(broken("pole face is subdivided in the fyke net"));
            }
            Cell::Face(g)
        }
    })
}

/// Restriction of `map` to an edge set.
pub(crate) fn submap(
    map: &PlanarMap,
    edges: &BTreeSet<Edge>,
) -> Result<(PlanarMap, Vec<usize>, BTreeMap<usize, usize>)> {
    let verts: BTreeSet<usize> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
    let origin: Vec<usize> = verts.into_iter().collect();
    let index: BTreeMap<usize, usize> = origin.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let rot = origin
        .iter()
        .map(|&x| {
            map.rotation(x)
                .iter()
                .filter(|&&y| edges.contains(&ek(x, y)))
                .map(|y| index[y])
                .collect()
        })
        .collect();
    Ok((build_map(rot)?, origin, index))
}

/// Levels, liaisons and fyke net of `map` rooted at `c0` for the group `h`.
pub fn analyse(map: &PlanarMap, c0: Cell, h: &[MapAutomorphism]) -> Result<FykeAnalysis> {
    let rot = pole_rotation(map, c0, h)?;
    let lv = levels(map, c0, rot.c1)?;
    let table = liaisons(map, &rot, &lv)?;
    let south_kind = lv.last().unwrap().kind;

    let mut tilde: BTreeSet<Edge> = BTreeSet::new();
    for l in &lv {
        tilde.extend(l.edges.iter().copied());
    }
    tilde.extend(table.edges().into_iter().map(|(_, e)| e));
    if let Cell::Vertex(v) = c0 {
        tilde.extend(map.rotation(v).iter().map(|&y| ek(v, y)));
    }
    tilde.extend(closure_edges(map, c0));
    if south_kind == LevelKind::PseudoAntarctic {
        tilde.extend(closure_edges(map, rot.c1));
    }
    let anchor = match c0 {
        Cell::Vertex(v) => ek(v, table.bases[0][0]),
        _ => *closure_edges(map, c0).iter().next().unwrap(),
    };
    let net_edges = blocks(&tilde)
        .into_iter()
        .find(|b| b.contains(&anchor))
        .ok_or_else(|| broken("no block at the north pole"))?;

    let (sub, origin, index) = submap(map, &net_edges)?;
    let north = cell_in(map, &sub, &index, c0)?;
    let south = cell_in(map, &sub, &index, rot.c1)?;
    let phi_t = rot.phi.vertex_permutation(map);
    let phi_vertex: Vec<usize> = origin
        .iter()
        .map(|&x| {
            index
                .get(&phi_t[x])
                .copied()
                .ok_or_else(|| broken("net is not invariant"))
        })
        .collect::<Result<_>>()?;
    let to_net = |x: usize| index.get(&x).copied().unwrap_or(usize::MAX);
    let level_vertices = lv
        .iter()
        .map(|l| {
            l.vertices
                .iter()
                .filter_map(|v| index.get(v).copied())
                .collect()
        })
        .collect();
    let level_edges = lv
        .iter()
        .map(|l| {
            l.edges
                .iter()
                .filter(|e| net_edges.contains(e))
                .map(|&(a, b)| ek(index[&a], index[&b]))
                .collect()
        })
        .collect();
    let base_of = lv
        .iter()
        .map(|l| {
            l.base_of
                .iter()
                .filter_map(|(v, b)| Some((*index.get(v)?, *index.get(b)?)))
                .collect()
        })
        .collect();
    let data = NetData {
        map: sub,
        origin,
        phi_vertex,
        m: rot.m,
        north,
        south,
        south_kind,
        level_vertices,
        level_edges,
        base_of,
        liaisons: table.relabel(to_net),
    };
    let net = data.finish()?;
    Ok(FykeAnalysis {
        rotation: rot,
        levels: lv,
        liaisons: table,
        tilde_edges: tilde,
        net_edges,
        net,
    })
}

/// Fyke net of a rooted triangulation for the rotation group `h`.
pub fn build_fyke_net(t: &RootedTriangulation, h: &[MapAutomorphism]) -> Result<FykeNet> {
    Ok(analyse(t.map(), t.c0, h)?.net)
}

impl FykeNet {
    /// Number of liaison steps `k`.
    pub fn depth(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn faces_of(&self, class: FaceClass) -> Vec<usize> {
        (0..self.faces.len())
            .filter(|&f| self.faces[f].class == class)
            .collect()
    }

    pub fn num_orbits(&self) -> usize {
        self.faces.iter().map(|f| f.orbit + 1).max().unwrap_or(0)
    }

    /// Orbits of faces that receive fillings, each with its faces.
    pub fn filled_orbits(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (f, face) in self.faces.iter().enumerate() {
            if face.class.is_filled() {
                out.entry(face.orbit).or_default().push(f);
            }
        }
        out
    }

    /// Isomorphism invariant of the net with its poles and face classes.
    pub fn code(&self) -> Code {
        let mut marks = vec![vec![self.north], vec![self.south]];
        for class in [
            FaceClass::Leaf,
            FaceClass::Segment,
            FaceClass::PseudoAntarctic,
        ] {
            marks.push(self.faces_of(class).into_iter().map(Cell::Face).collect());
        }
        self.map.canonical_code_marked(&marks)
    }

    /// Boundary of face `f` walked from its root vertex along its root edge.
    pub fn rooted_walk(&self, f: usize) -> Option<Vec<usize>> {
        let (v, e) = self.faces[f].root?;
        let fv = self.map.face_vertices(f);
        let k = fv.len();
        let (a, b) = self.map.edge_ends(e);
        let w = if a == v { b } else { a };
        let p = fv.iter().position(|&x| x == v)?;
        let step = if fv[(p + 1) % k] == w { 1 } else { k - 1 };
        Some((0..k).map(|i| fv[(p + i * step) % k]).collect())
    }

    pub fn report(&self) -> FykeFile {
        let map = &self.map;
        let one = |rows: &Vec<Vec<usize>>| -> Vec<Vec<usize>> {
            rows.iter()
                .map(|r| r.iter().map(|x| x + 1).collect())
                .collect()
        };
        FykeFile {
            schema: 1,
            kind: "fyke-net".into(),
            map: serialize_rs1(map),
            m: self.m,
            a: self.liaisons.a,
            north: map.cell_label(self.north),
            south: map.cell_label(self.south),
            south_kind: self.south_kind,
            faces: self
                .faces
                .iter()
                .enumerate()
                .map(|(f, face)| FykeFaceFile {
                    face: format!("f:{}", map.face_code(f)),
                    class: face.class.name().into(),
                    root_vertex: face.root.map(|(v, _)| v + 1),
                    root_edge: face.root.map(|(_, e)| map.cell_label(Cell::Edge(e))),
                    orbit: face.orbit,
                    markers: face.markers,
                    segment: face.segment,
                })
                .collect(),
            layers: self
                .layers
                .iter()
                .map(|s| s.iter().map(|x| x + 1).collect())
                .collect(),
            bases: one(&self.liaisons.bases),
            sources: one(&self.liaisons.sources),
            targets: one(&self.liaisons.targets),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FykeFaceFile {
    pub face: String,
    pub class: String,
    pub root_vertex: Option<usize>,
    pub root_edge: Option<String>,
    pub orbit: usize,
    pub markers: Option<SegmentMarkers>,
    pub segment: Option<(usize, usize)>,
}

/// Serialised fyke net; vertex ids are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FykeFile {
    pub schema: u32,
    pub kind: String,
    pub map: String,
    pub m: usize,
    pub a: usize,
    pub north: String,
    pub south: String,
    pub south_kind: LevelKind,
    pub faces: Vec<FykeFaceFile>,
    pub layers: Vec<Vec<usize>>,
    pub bases: Vec<Vec<usize>>,
    pub sources: Vec<Vec<usize>>,
    pub targets: Vec<Vec<usize>>,
}

impl FykeFile {
    pub fn to_fyke_net(&self) -> Result<FykeNet> {
        if self.schema != 1 || self.kind != "fyke-net" {
            return Err(Error::BadParams("not a fyke net file".into()));
        }
        let map = parse_rs1(&self.map)?;
        let bad = |m: &str| Error::BadParams(format!("fyke net file: {}", m));
        let vert = |x: usize| {
            if x == 0 || x > map.num_vertices() {
                Err(bad("vertex out of range"))
            } else {
                Ok(x - 1)
            }
        };
        let rows = |r: &Vec<Vec<usize>>| -> Result<Vec<Vec<usize>>> {
            r.iter()
                .map(|row| row.iter().map(|&x| vert(x)).collect())
                .collect()
        };
        if self.faces.len() != map.num_faces() {
            return Err(bad("face count"));
        }
        let mut faces = vec![None; map.num_faces()];
        for ff in &self.faces {
            let f = match map.parse_cell(&ff.face)? {
                Cell::Face(f) => f,
                _ => return Err(bad("face entry is not a face")),
            };
            let class = FaceClass::parse(&ff.class).ok_or_else(|| bad("unknown face class"))?;
            let root = match (ff.root_vertex, &ff.root_edge) {
                (Some(v), Some(e)) => match map.parse_cell(e)? {
                    Cell::Edge(e) => Some((vert(v)?, e)),
                    _ => return Err(bad("root edge is not an edge")),
                },
                (None, None) => None,
                _ => return Err(bad("incomplete face root")),
            };
            if class.is_filled() != root.is_some()
                || (class == FaceClass::Segment) != ff.markers.is_some()
            {
                return Err(bad("face data does not match its class"));
            }
            faces[f] = Some(FykeFace {
                class,
                root,
                orbit: ff.orbit,
                markers: ff.markers,
                segment: ff.segment,
            });
        }
        let faces: Vec<FykeFace> = faces
            .into_iter()
            .collect::<Option<_>>()
            .ok_or_else(|| bad("repeated face"))?;
        let net = FykeNet {
            north: map.parse_cell(&self.north)?,
            south: map.parse_cell(&self.south)?,
            origin: (0..map.num_vertices()).collect(),
            m: self.m,
            south_kind: self.south_kind,
            faces,
            layers: self
                .layers
                .iter()
                .map(|l| l.iter().map(|&x| vert(x)).collect())
                .collect::<Result<_>>()?,
            liaisons: LiaisonTable {
                a: self.a,
                m: self.m,
                bases: rows(&self.bases)?,
                sources: rows(&self.sources)?,
                targets: rows(&self.targets)?,
            },
            map,
        };
        for f in 0..net.faces.len() {
            if net.faces[f].root.is_some() && net.rooted_walk(f).is_none() {
                return Err(bad("face root is not on the face"));
            }
        }
        Ok(net)
    }
}

/// Check the two-layered conditions for a segment filling.
///
/// The outer cycle of `n`, walked from its root, reads `v_j, w_j, ...,
/// w_{j+1}, v_{j+1}, ..., v_j`; `markers` locates `w_{j+1}` and `u_{j+1}`.
pub fn is_two_layered(n: &NearTriangulation, markers: &SegmentMarkers) -> bool {
    two_layered_failure(n, markers).is_none()
}

/// [`is_two_layered`] with the markers given as vertices of `n`: the
/// sources `v1, v2`, the targets `w1, w2` and the base `u`.
pub fn is_two_layered_at(
    n: &NearTriangulation,
    v1: usize,
    v2: usize,
    w1: usize,
    w2: usize,
    u: usize,
    order2: bool,
) -> bool {
    let o = n.outer();
    let at = |x: usize| o.iter().position(|&y| y == x);
    match (at(v1), at(v2), at(w1), at(w2), at(u)) {
        (Some(0), Some(p2), Some(1), Some(q2), Some(pu)) if p2 == q2 + 1 => is_two_layered(
            n,
            &SegmentMarkers {
                w2: q2,
                u: pu,
                order2,
            },
        ),
        _ => false,
    }
}

/// The first violated condition, if any.
pub fn two_layered_failure(n: &NearTriangulation, markers: &SegmentMarkers) -> Option<String> {
    let o = n.outer();
    let k = o.len();
    let SegmentMarkers { w2, u, order2 } = *markers;
    if w2 == 0 || w2 + 1 >= k || u <= w2 || u >= k {
        return Some("markers out of range".into());
    }
    let map = n.map();
    let outer_face = n.root().face;
    let upper: BTreeSet<usize> = o[1..=w2].iter().copied().collect();
    let lower: BTreeSet<usize> = std::iter::once(o[0])
        .chain(o[w2 + 1..].iter().copied())
        .collect();
    let third = |x: usize, y: usize| -> Option<usize> {
        let d = map.dart(x, y)?;
        let f = if map.face_of(d) == outer_face {
            map.face_of(map.rev(d))
        } else {
            map.face_of(d)
        };
        map.face_vertices(f).into_iter().find(|&z| z != x && z != y)
    };
    // lower path from v_j up to, not including, u_{j+1}
    let before_u: BTreeSet<usize> = std::iter::once(o[0])
        .chain(o[u + 1..].iter().copied())
        .collect();
    match third(o[w2], o[w2 + 1]) {
        Some(z) if before_u.contains(&z) => {}
        _ => {
            return Some(
                "face on the eastern liaison has its apex outside the lower path before the base"
                    .into(),
            )
        }
    }
    for b in 1..w2 {
        match third(o[b], o[b + 1]) {
            Some(z) if lower.contains(&z) => {}
            _ => return Some(format!("upper edge {} has its apex off the lower path", b)),
        }
    }
    for e in n.chords() {
        let (x, y) = map.edge_ends(e);
        if upper.contains(&x) && upper.contains(&y) {
            return Some("chord between upper vertices".into());
        }
    }
    if order2 && map.has_edge(o[0], o[w2 + 1]) {
        return Some("edge between the two sources".into());
    }
    None
}

/// Fyke net and one filling per orbit of filled faces.
#[derive(Debug, Clone)]
pub struct RotativeDecomposition {
    pub net: FykeNet,
    pub fillings: BTreeMap<usize, NearTriangulation>,
}

/// Near-triangulation that `t` induces on face `f` of the net.
fn face_filling(map: &PlanarMap, net: &FykeNet, f: usize) -> Result<NearTriangulation> {
    let (v, e) = net.faces[f]
        .root
        .ok_or_else(|| broken("face without root"))?;
    let cycle: Vec<usize> = net
        .map
        .face_vertices(f)
        .iter()
        .map(|&x| net.origin[x])
        .collect();
    let (a, b) = net.map.edge_ends(e);
    induced_near_triangulation(map, &cycle, net.origin[v], (net.origin[a], net.origin[b]))
}

/// Rotative decomposition of `t` for the rotation group `h`.
pub fn decompose_rotative(
    t: &RootedTriangulation,
    h: &[MapAutomorphism],
) -> Result<RotativeDecomposition> {
    let net = build_fyke_net(t, h)?;
    let mut fillings = BTreeMap::new();
    for (orbit, faces) in net.filled_orbits() {
        let rep = face_filling(t.map(), &net, faces[0])?;
        for &f in &faces[1..] {
            if face_filling(t.map(), &net, f)?.code() != rep.code() {
                return Err(broken("faces of one orbit carry different fillings"));
            }
        }
        if let Some(mk) = net.faces[faces[0]].markers {
            if let Some(why) = two_layered_failure(&rep, &mk) {
                return Err(broken(format!(
                    "segment filling is not two-layered: {}",
                    why
                )));
            }
        }
        fillings.insert(orbit, rep);
    }
    Ok(RotativeDecomposition { net, fillings })
}

/// Check lengths and the two-layered property of the fillings.
pub fn check_rotative_fillings(
    net: &FykeNet,
    fillings: &BTreeMap<usize, NearTriangulation>,
) -> Result<()> {
    for (orbit, faces) in net.filled_orbits() {
        let n = fillings
            .get(&orbit)
            .ok_or_else(|| Error::BadParams(format!("no filling for orbit {}", orbit)))?;
        let f = faces[0];
        let len = net.map.face_len(f);
        if n.outer_len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                got: n.outer_len(),
            });
        }
        if let Some(mk) = net.faces[f].markers {
            if let Some(why) = two_layered_failure(n, &mk) {
                return Err(Error::TwoLayeredViolation(why));
            }
        }
    }
    if let Some(o) = fillings
        .keys()
        .find(|o| !net.filled_orbits().contains_key(o))
    {
        return Err(Error::BadParams(format!("orbit {} takes no filling", o)));
    }
    Ok(())
}

/// Insert the fillings into every face of their orbits.
pub fn compose_rotative(
    net: &FykeNet,
    fillings: &BTreeMap<usize, NearTriangulation>,
) -> Result<RootedTriangulation> {
    check_rotative_fillings(net, fillings)?;
    let mut items = Vec::new();
    for (orbit, faces) in net.filled_orbits() {
        for f in faces {
            let (vertex, edge) = net.faces[f].root.unwrap();
            items.push(Insertion {
                face: f,
                vertex,
                edge,
                near: &fillings[&orbit],
            });
        }
    }
    let h = insert_many(&net.map, &items)?;
    let c0 = carry_cell(&net.map, &h, net.north);
    let tri = validate_triangulation(h)?;
    RootedTriangulation::new(tri, c0)
}

/// Fillings file: one near-triangulation per orbit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FillingsFile {
    pub schema: u32,
    pub kind: String,
    pub fillings: BTreeMap<usize, String>,
}

impl FillingsFile {
    pub fn new(fillings: &BTreeMap<usize, NearTriangulation>) -> FillingsFile {
        FillingsFile {
            schema: 1,
            kind: "fillings".into(),
            fillings: fillings.iter().map(|(&o, n)| (o, n.to_rs1())).collect(),
        }
    }

    pub fn parse(&self) -> Result<BTreeMap<usize, NearTriangulation>> {
        if self.schema != 1 || self.kind != "fillings" {
            return Err(Error::BadParams("not a fillings file".into()));
        }
        self.fillings
            .iter()
            .map(|(&o, s)| Ok((o, parse_near_rs1(s)?)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TieBreak {
    Smallest,
    Largest,
}

/// The `m` rotated copies of a shortest path between the poles, and the
/// near-triangulations between consecutive copies.
#[derive(Debug, Clone)]
pub struct Spindle {
    pub paths: Vec<Vec<usize>>,
    pub segments: Vec<NearTriangulation>,
}

impl Spindle {
    /// Unrooted codes of the segment fillings, sorted.
    pub fn segment_codes(&self) -> Vec<Code> {
        let mut out: Vec<Code> = self
            .segments
            .iter()
            .map(|n| {
                n.map()
                    .canonical_code_marked(&[vec![Cell::Face(n.root().face)]])
            })
            .collect();
        out.sort();
        out
    }
}

fn bfs_from(map: &PlanarMap, sources: &[usize]) -> Vec<usize> {
    let mut dist = vec![usize::MAX; map.num_vertices()];
    let mut queue = VecDeque::new();
    for &s in sources {
        dist[s] = 0;
        queue.push_back(s);
    }
    while let Some(x) = queue.pop_front() {
        for &y in map.rotation(x) {
            if dist[y] == usize::MAX {
                dist[y] = dist[x] + 1;
                queue.push_back(y);
            }
        }
    }
    dist
}

/// A spindle built from the lexicographically extreme shortest path.
pub fn find_spindle(
    t: &RootedTriangulation,
    h: &[MapAutomorphism],
    tie: TieBreak,
) -> Result<Spindle> {
    let map = t.map();
    let rot = pole_rotation(map, t.c0, h)?;
    let from = map.cell_vertices(rot.c0);
    let to = map.cell_vertices(rot.c1);
    let ds = bfs_from(map, &from);
    let dt = bfs_from(map, &to);
    let total = to.iter().map(|&v| ds[v]).min().unwrap();
    let pick = |cands: Vec<usize>| match tie {
        TieBreak::Smallest => cands.into_iter().min(),
        TieBreak::Largest => cands.into_iter().max(),
    };
    let mut x = pick(from.iter().copied().filter(|&v| dt[v] == total).collect()).unwrap();
    let mut path = vec![x];
    while dt[x] > 0 {
        x = pick(
            map.rotation(x)
                .iter()
                .copied()
                .filter(|&y| ds[y] == ds[x] + 1 && dt[y] + 1 == dt[x])
                .collect(),
        )
        .ok_or_else(|| broken("shortest path breaks off"))?;
        path.push(x);
    }
    let phi_v = rot.phi.vertex_permutation(map);
    let mut paths = vec![path];
    for _ in 1..rot.m {
        let p = paths.last().unwrap().iter().map(|&v| phi_v[v]).collect();
        paths.push(p);
    }
    let mut edges: BTreeSet<Edge> = closure_edges(map, rot.c0);
    edges.extend(closure_edges(map, rot.c1));
    for p in &paths {
        edges.extend(p.windows(2).map(|w| ek(w[0], w[1])));
    }
    let (sub, origin, index) = submap(map, &edges)?;
    let skip: Vec<Cell> = [rot.c0, rot.c1]
        .iter()
        .filter(|c| c.is_face())
        .map(|&c| cell_in(map, &sub, &index, c))
        .collect::<Result<_>>()?;
    let mut segments = Vec::new();
    for f in 0..sub.num_faces() {
        if skip.contains(&Cell::Face(f)) {
            continue;
        }
        let cycle: Vec<usize> = sub.face_vertices(f).iter().map(|&x| origin[x]).collect();
        let k = cycle.len();
        let p = cycle
            .iter()
            .position(|v| from.contains(v))
            .ok_or_else(|| broken("spindle segment misses the north pole"))?;
        let v = cycle[p];
        let w = cycle[(p + 1) % k];
        segments.push(induced_near_triangulation(map, &cycle, v, (v, w))?);
    }
    Ok(Spindle { paths, segments })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_map::parse_rs1;
    use crate::fixtures;
    use crate::triangulation::validate_triangulation;

    fn rooted(text: &str, root: &str) -> RootedTriangulation {
        let map = parse_rs1(text).unwrap();
        let c0 = map.parse_cell(root).unwrap();
        RootedTriangulation::new(validate_triangulation(map).unwrap(), c0).unwrap()
    }

    fn roundtrip(t: &RootedTriangulation, h: &[MapAutomorphism]) -> RotativeDecomposition {
        let dec = decompose_rotative(t, h).unwrap();
        let back = compose_rotative(&dec.net, &dec.fillings).unwrap();
        assert_eq!(back.code(), t.code());
        dec
    }

    #[test]
    fn octahedron_order_four() {
        let t = rooted(fixtures::OCT6, "v:1");
        let h = rotation_subgroup(t.map(), t.c0, Some(4)).unwrap();
        let dec = roundtrip(&t, &h);
        let net = &dec.net;
        assert_eq!(net.depth(), 1);
        assert_eq!(net.liaisons.a, 1);
        assert_eq!(net.faces_of(FaceClass::North).len(), 4);
        assert_eq!(net.faces_of(FaceClass::Segment).len(), 4);
        assert_eq!(net.faces.len(), 8);
    }

    #[test]
    fn nested_levels() {
        let t = rooted(fixtures::THREE_LEVELS, "f:1-2-3");
        let h = rotation_subgroup(t.map(), t.c0, Some(3)).unwrap();
        let dec = roundtrip(&t, &h);
        assert_eq!(dec.net.depth(), 2);
        assert_eq!(dec.net.south_kind, LevelKind::Antarctic);
    }

    #[test]
    fn pseudo_antarctic_south() {
        let t = rooted(fixtures::EDGE_POLE, "v:1");
        let h = rotation_subgroup(t.map(), t.c0, Some(2)).unwrap();
        let dec = roundtrip(&t, &h);
        assert_eq!(dec.net.south_kind, LevelKind::PseudoAntarctic);
        assert_eq!(dec.net.faces_of(FaceClass::PseudoAntarctic).len(), 2);
    }

    #[test]
    fn spindle_tie_breaks_differ() {
        let t = rooted(fixtures::NESTED_HEXAGON, "f:1-2-3");
        let h = rotation_subgroup(t.map(), t.c0, Some(3)).unwrap();
        let a = find_spindle(&t, &h, TieBreak::Smallest).unwrap();
        let b = find_spindle(&t, &h, TieBreak::Largest).unwrap();
        assert_eq!(a.segments.len(), 3);
        assert_eq!(b.segments.len(), 3);
        assert_ne!(a.segment_codes(), b.segment_codes());
    }

    #[test]
    fn blocks_of_two_triangles_and_a_bridge() {
        let edges: BTreeSet<Edge> = [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (3, 5)]
            .into_iter()
            .collect();
        let mut sizes: Vec<usize> = blocks(&edges).iter().map(|b| b.len()).collect();
        sizes.sort();
        assert_eq!(sizes, vec![1, 3, 3]);
    }

    #[test]
    fn single_triangle_segment_is_two_layered() {
        let n = crate::triangulation::triangle_near();
        let o = n.outer().to_vec();
        assert!(is_two_layered(
            &n,
            &SegmentMarkers {
                w2: 1,
                u: 2,
                order2: false
            }
        ));
        assert!(is_two_layered_at(&n, o[0], o[2], o[1], o[1], o[2], false));
    }

    #[test]
    fn upper_chord_breaks_two_layers() {
        // upper path 1..=3 with the chord 1-3
        let n = near_from_triangles(6, 0, &[[1, 2, 3], [0, 1, 3], [0, 3, 4], [0, 4, 5]]).unwrap();
        let mk = SegmentMarkers {
            w2: 3,
            u: 4,
            order2: false,
        };
        assert!(n.chord_positions().contains(&(1, 3)));
        assert!(!is_two_layered(&n, &mk));
    }

    #[test]
    fn eastern_apex_past_the_base() {
        let n = near_from_triangles(6, 0, &[[0, 1, 2], [2, 3, 4], [0, 2, 4], [0, 4, 5]]).unwrap();
        // apex 4 of the face on 2-3 precedes a base at 3 but not one at 4
        assert!(is_two_layered(
            &n,
            &SegmentMarkers {
                w2: 2,
                u: 3,
                order2: false
            }
        ));
        assert!(!is_two_layered(
            &n,
            &SegmentMarkers {
                w2: 2,
                u: 4,
                order2: false
            }
        ));
        let o = n.outer().to_vec();
        assert!(!is_two_layered_at(&n, o[0], o[3], o[1], o[2], o[4], false));
    }
}
