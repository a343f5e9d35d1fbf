//! Fyke nets assembled from parameters, and fillings that realise them.
//!
//! Positions on a centre count clockwise around the north pole from the
//! anchor `u_0` of its level. A branch is given as an RS1 cactus whose
//! vertex 1 is the base; the corner of the base between its last and first
//! listed neighbours is where the centre passes. Targets are corner indices
//! along the clockwise walk around the cactus, starting at the western
//! corner of the base.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{
    blocks, ek, Edge, FykeAnalysis, FykeNet, LevelKind, LiaisonTable, NetData, SegmentMarkers,
};
use crate::automorphism::extend_from_dart;
use crate::core_map::{build_map, parse_rs1, Cell, Chirality, PlanarMap};
use crate::error::{Error, Result};
use crate::girdle::RootDim;
use crate::triangulation::{
    validate_near_triangulation, wheel_near, NearTriangulation, StrongRooting,
};

fn bad(msg: impl Into<String>) -> Error {
    Error::BadParams(msg.into())
}

/// The south pole and the centre of the last level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SouthParams {
    pub dim: RootDim,
    /// Length of `C_k`: 1, 2 or 3 when `c1` is its own closure, else the
    /// pseudo-antarctic cycle length.
    pub length: usize,
    /// Position of the first vertex of `c1` on a pseudo-antarctic `C_k`.
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchParams {
    /// Position of the base on the next centre.
    pub base: usize,
    /// RS1 cactus rooted at vertex 1; `None` for a bare base.
    pub cactus: Option<String>,
    /// Corner of each liaison ending in this branch, in liaison order.
    pub targets: Vec<usize>,
}

/// Liaisons from centre `C_i` to level `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelParams {
    /// Positions of `v_0 .. v_{a-1}` on `C_i`.
    pub sources: Vec<usize>,
    /// Positions of `u_0 .. u_{a-1}` on `C_{i+1}`.
    pub bases: Vec<usize>,
    /// One entry per distinct base.
    pub branches: Vec<BranchParams>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FykeParams {
    pub m: usize,
    pub north: RootDim,
    /// Liaisons per rotation step; the root degree over `m` for a vertex.
    pub a: usize,
    pub south: SouthParams,
    /// Lengths of `C_1 .. C_{k-1}`.
    pub centre_lengths: Vec<usize>,
    /// `k` entries.
    pub levels: Vec<LevelParams>,
}

/// A branch cactus in local ids, base 0.
#[derive(Debug, Clone)]
struct Cactus {
    rot: Vec<Vec<usize>>,
    /// Clockwise corners: vertex and the neighbour after which a liaison
    /// enters; `None` marks the corner after the next centre vertex.
    corners: Vec<(usize, Option<usize>)>,
    /// Private vertices of each maximal block.
    maximal: Vec<BTreeSet<usize>>,
}

impl Cactus {
    fn bare() -> Cactus {
        Cactus {
            rot: vec![Vec::new()],
            corners: vec![(0, None)],
            maximal: Vec::new(),
        }
    }

    fn is_bare(&self) -> bool {
        self.rot.len() == 1
    }

    fn edges(&self) -> BTreeSet<Edge> {
        let mut out = BTreeSet::new();
        for (x, r) in self.rot.iter().enumerate() {
            out.extend(r.iter().map(|&y| ek(x, y)));
        }
        out
    }

    fn from_rotation(rot: Vec<Vec<usize>>) -> Result<Cactus> {
        if rot.len() == 1 {
            return Ok(Cactus::bare());
        }
        if rot[0].is_empty() {
            return Err(bad("cactus base has no edges"));
        }
        let map =
            build_map(rot.clone()).map_err(|e| bad(format!("cactus is not a plane map: {}", e)))?;
        let n = rot.len();
        let edges: BTreeSet<Edge> = (0..map.num_edges())
            .map(|e| {
                let (a, b) = map.edge_ends(e);
                ek(a, b)
            })
            .collect();
        let bl = blocks(&edges);
        let mut count = vec![0usize; n];
        let mut cycles = 0;
        let mut block_verts = Vec::new();
        for b in &bl {
            let vs: BTreeSet<usize> = b.iter().flat_map(|&(x, y)| [x, y]).collect();
            if b.len() > 1 {
                let deg_two = vs
                    .iter()
                    .all(|&v| b.iter().filter(|&&(x, y)| x == v || y == v).count() == 2);
                if b.len() != vs.len() || !deg_two {
                    return Err(bad(
                        "cactus has a block that is neither an edge nor a cycle",
                    ));
                }
                cycles += 1;
            }
            for &v in &vs {
                count[v] += 1;
            }
            block_verts.push(vs);
        }
        if map.num_faces() != cycles + 1 {
            return Err(bad("cactus cycle does not bound a face"));
        }
        let outer = map.face_of(map.dart(0, rot[0][0]).unwrap());
        if map
            .face_vertices(outer)
            .into_iter()
            .collect::<BTreeSet<_>>()
            .len()
            != n
        {
            return Err(bad("cactus vertex off the outer face"));
        }
        let dist = {
            let mut d = vec![usize::MAX; n];
            d[0] = 0;
            let mut queue = std::collections::VecDeque::from([0]);
            while let Some(x) = queue.pop_front() {
                for &y in &rot[x] {
                    if d[y] == usize::MAX {
                        d[y] = d[x] + 1;
                        queue.push_back(y);
                    }
                }
            }
            d
        };
        let mut maximal = Vec::new();
        for vs in &block_verts {
            let root = *vs.iter().min_by_key(|&&v| dist[v]).unwrap();
            if vs.iter().all(|&v| v == root || count[v] == 1) {
                maximal.push(vs.iter().copied().filter(|&v| v != root).collect());
            }
        }
        let pred = |y: usize, x: usize| {
            let r = &rot[y];
            let p = r.iter().position(|&t| t == x).unwrap();
            r[(p + r.len() - 1) % r.len()]
        };
        let n1 = rot[0][0];
        let nr = *rot[0].last().unwrap();
        let mut corners = vec![(0, Some(nr))];
        let (mut x, mut y) = (0, nr);
        loop {
            if y == 0 && x == n1 {
                corners.push((0, None));
                break;
            }
            let z = pred(y, x);
            corners.push((y, Some(z)));
            x = y;
            y = z;
        }
        Ok(Cactus {
            rot,
            corners,
            maximal,
        })
    }

    fn parse(text: Option<&str>) -> Result<Cactus> {
        match text {
            None => Ok(Cactus::bare()),
            Some(t) => {
                let map = parse_rs1(t)?;
                Cactus::from_rotation(
                    (0..map.num_vertices())
                        .map(|v| map.rotation(v).to_vec())
                        .collect(),
                )
            }
        }
    }

    /// Corners per sector around a lone south vertex.
    fn sector_len(&self) -> usize {
        if self.is_bare() {
            1
        } else {
            self.corners.len() - 1
        }
    }
}

/// RS1 text keeping the listed rotation order.
fn rs1_text(rot: &[Vec<usize>]) -> String {
    let mut s = format!("RS1 {}\n", rot.len());
    for (v, r) in rot.iter().enumerate() {
        s.push_str(&format!("{}:", v + 1));
        for &y in r {
            s.push_str(&format!(" {}", y + 1));
        }
        s.push('\n');
    }
    s
}

/// Indices of a cyclic run, from its first element.
fn cyclic_run(mut js: Vec<usize>, n: usize) -> Vec<usize> {
    js.sort_unstable();
    js.dedup();
    let set: BTreeSet<usize> = js.iter().copied().collect();
    let start = js
        .iter()
        .position(|&j| !set.contains(&((j + n - 1) % n)))
        .unwrap_or(0);
    js.rotate_left(start);
    js
}

fn pole_size(dim: RootDim) -> usize {
    match dim {
        RootDim::Vertex => 1,
        RootDim::Edge => 2,
        RootDim::Face => 3,
    }
}

/// Assemble and classify the fyke net described by `p`.
pub fn construct_fyke_net(p: &FykeParams) -> Result<FykeNet> {
    let (m, a) = (p.m, p.a);
    if m < 2 {
        return Err(bad("rotation order below 2"));
    }
    if a == 0 {
        return Err(bad("no liaisons per rotation step"));
    }
    let l0 = match p.north {
        RootDim::Vertex if a * m >= 3 => a * m,
        RootDim::Edge if m == 2 && a == 1 => 4,
        RootDim::Face if m == 3 && a == 1 => 3,
        _ => return Err(bad("north pole does not fit the rotation order")),
    };
    let south = &p.south;
    let lk = south.length;
    match south.dim {
        RootDim::Vertex if lk != 1 => return Err(bad("a south vertex is its own centre")),
        RootDim::Edge if m != 2 => return Err(bad("a south edge needs order 2")),
        RootDim::Edge if lk != 2 && (lk % 2 != 0 || lk < 4) => {
            return Err(bad("a south edge needs an even centre or the edge itself"))
        }
        RootDim::Face if m != 3 => return Err(bad("a south face needs order 3")),
        RootDim::Face if lk % 3 != 0 => {
            return Err(bad("a south face needs a centre length divisible by 3"))
        }
        _ => {}
    }
    let pseudo = lk > pole_size(south.dim);
    if pseudo && south.offset >= lk / m {
        return Err(bad("south offset beyond one rotation step"));
    }
    let k = p.levels.len();
    let mut lens = vec![l0];
    if k == 0 {
        if !p.centre_lengths.is_empty() || !pseudo || lk != l0 {
            return Err(bad(
                "a net without liaisons needs a pseudo-antarctic first centre",
            ));
        }
    } else {
        if p.centre_lengths.len() + 1 != k {
            return Err(bad("need one centre length per intermediate level"));
        }
        for &l in &p.centre_lengths {
            if l < 3 || l % m != 0 {
                return Err(bad(format!(
                    "centre length {} is not a multiple of {} of at least 3",
                    l, m
                )));
            }
        }
        lens.extend(p.centre_lengths.iter().copied());
        lens.push(lk);
    }
    let n = a * m;

    let mut rot: Vec<Vec<usize>> = Vec::new();
    let north_v = if p.north == RootDim::Vertex {
        rot.push(Vec::new());
        Some(0)
    } else {
        None
    };
    let mut cstart = Vec::new();
    for &l in &lens {
        cstart.push(rot.len());
        rot.extend(vec![Vec::new(); l]);
    }
    let cv = |i: usize, q: usize| cstart[i] + q % lens[i];
    for i in 0..lens.len() {
        let l = lens[i];
        for q in 0..l {
            rot[cv(i, q)] = match l {
                1 => Vec::new(),
                2 => vec![cv(i, q + 1)],
                _ => vec![cv(i, q + l - 1), cv(i, q + 1)],
            };
        }
    }
    match p.north {
        RootDim::Vertex => {
            let c = north_v.unwrap();
            rot[c] = (0..l0).map(|q| cv(0, q)).collect();
            for q in 0..l0 {
                rot[cv(0, q)].push(c);
            }
        }
        RootDim::Edge => {
            let (x, y) = (cv(0, 1), cv(0, 3));
            rot[x].push(y);
            rot[y].push(x);
        }
        RootDim::Face => {}
    }

    // lists to splice in after an existing neighbour
    let mut after: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    let mut lone: Vec<usize> = Vec::new();
    if pseudo {
        let step = lk / m;
        let t: Vec<usize> = (0..m).map(|s| cv(k, south.offset + s * step)).collect();
        for s in 0..m {
            let prev = cv(k, south.offset + s * step + lk - 1);
            let list = if m == 2 {
                vec![t[1 - s]]
            } else {
                vec![t[(s + m - 1) % m], t[(s + 1) % m]]
            };
            after.insert((t[s], prev), list);
        }
    }

    let mut bpos: Vec<Vec<usize>> = vec![match p.north {
        RootDim::Vertex | RootDim::Face => (0..n).collect(),
        RootDim::Edge => vec![0, 2],
    }];
    let mut level_vertices: Vec<BTreeSet<usize>> = Vec::new();
    let mut level_edges: Vec<BTreeSet<Edge>> = Vec::new();
    let mut base_of: Vec<BTreeMap<usize, usize>> = Vec::new();
    for i in 0..lens.len() {
        let l = lens[i];
        let vs: BTreeSet<usize> = (0..l).map(|q| cv(i, q)).collect();
        let mut es = BTreeSet::new();
        if l >= 2 {
            for q in 0..l {
                es.insert(ek(cv(i, q), cv(i, q + 1)));
            }
        }
        base_of.push(vs.iter().map(|&v| (v, v)).collect());
        level_vertices.push(vs);
        level_edges.push(es);
    }
    let mut table = LiaisonTable {
        a,
        m,
        bases: vec![bpos[0].iter().map(|&q| cv(0, q)).collect()],
        sources: Vec::new(),
        targets: Vec::new(),
    };
    let mut target_at: BTreeMap<(usize, Option<usize>), Vec<(usize, usize)>> = BTreeMap::new();

    for i in 0..k {
        let lp = &p.levels[i];
        let (l, l2) = (lens[i], lens[i + 1]);
        let (sec, sec2) = (l / m, l2 / m);
        if lp.sources.len() != a || lp.bases.len() != a {
            return Err(bad(format!("level {} needs {} sources and bases", i, a)));
        }
        if lp.sources.iter().any(|&q| q >= l) {
            return Err(bad(format!(
                "source position off the centre of level {}",
                i
            )));
        }
        let src: Vec<usize> = (0..n)
            .map(|j| (lp.sources[j % a] + (j / a) * sec) % l)
            .collect();
        let sset: BTreeSet<usize> = src.iter().copied().collect();
        for j in 0..n {
            let u = bpos[i][j];
            let first = (0..l)
                .map(|t| (u + t) % l)
                .find(|q| sset.contains(q))
                .unwrap();
            if first != src[j] {
                return Err(bad(format!(
                    "source {} on level {} is not the first after its base",
                    j, i
                )));
            }
        }
        let b = &lp.bases;
        if l2 == 1 {
            if b.iter().any(|&q| q != 0) {
                return Err(bad("a lone south vertex is the only base"));
            }
        } else if b.iter().any(|&q| q >= l2)
            || b.windows(2).any(|w| w[0] > w[1])
            || b[a - 1] - b[0] > sec2
        {
            return Err(bad(format!(
                "bases of level {} are not clockwise within one rotation step",
                i + 1
            )));
        }
        let next_b: Vec<usize> = (0..n)
            .map(|j| {
                if l2 == 1 {
                    0
                } else {
                    (b[j % a] + (j / a) * sec2) % l2
                }
            })
            .collect();
        if m == 2 {
            for j in 0..n {
                let j1 = (j + 1) % n;
                if src[j1] == (src[j] + sec) % l
                    && bpos[i][j1] == (src[j] + 1) % l
                    && src[j1] != src[j]
                {
                    return Err(bad(format!(
                        "segment {} on level {} admits no two-layered filling",
                        j, i
                    )));
                }
            }
        }

        // a base at the image of u_0 belongs to the branch of u_0, one sector on
        let shift: Vec<usize> = (0..a)
            .map(|j| usize::from(l2 >= 2 && b[j] == b[0] + sec2))
            .collect();
        let mut reps: Vec<usize> = (0..a).filter(|&j| shift[j] == 0).map(|j| b[j]).collect();
        reps.dedup();
        if lp.branches.len() != reps.len()
            || lp.branches.iter().zip(&reps).any(|(br, &q)| br.base != q)
        {
            return Err(bad(format!(
                "level {} needs one branch per distinct base, in order",
                i + 1
            )));
        }
        let mut branch_of = vec![0usize; a];
        for j in 0..a {
            branch_of[j] = reps
                .iter()
                .position(|&q| q + shift[j] * sec2 == b[j])
                .unwrap();
        }
        // (cactus, copies[sector][local] -> net id, liaisons in this branch)
        let mut cacti = Vec::new();
        for (bi, br) in lp.branches.iter().enumerate() {
            let c = Cactus::parse(br.cactus.as_deref())?;
            let js: Vec<usize> = (0..a).filter(|&j| branch_of[j] == bi).collect();
            if br.targets.len() != js.len() {
                return Err(bad(format!(
                    "branch at {} needs {} targets",
                    br.base,
                    js.len()
                )));
            }
            let t = &br.targets;
            let mut clockwise: Vec<(isize, usize)> = js
                .iter()
                .zip(t)
                .map(|(&j, &x)| (j as isize - (shift[j] * a) as isize, x))
                .collect();
            clockwise.sort_unstable();
            if clockwise.windows(2).any(|w| w[0].1 > w[1].1) {
                return Err(bad("targets are not in clockwise order"));
            }
            let local = |x: usize| -> usize {
                if l2 == 1 {
                    x % c.sector_len()
                } else {
                    x
                }
            };
            if l2 == 1 {
                let mlen = c.sector_len();
                if t[0] >= mlen || t[t.len() - 1] > t[0] + mlen {
                    return Err(bad(
                        "targets around the south vertex span more than one sector",
                    ));
                }
            } else if t.iter().any(|&x| x >= c.corners.len()) {
                return Err(bad("target corner beyond the cactus"));
            }
            let preimages: BTreeSet<usize> = js
                .iter()
                .map(|&j| (src[j] + l - shift[j] * sec) % l)
                .collect();
            if c.maximal.len() > preimages.len() {
                return Err(bad(format!(
                    "cactus at {} has {} maximal blocks but {} preimages",
                    br.base,
                    c.maximal.len(),
                    preimages.len()
                )));
            }
            let hit: BTreeSet<usize> = t.iter().map(|&x| c.corners[local(x)].0).collect();
            if c.maximal.iter().any(|priv_| priv_.is_disjoint(&hit)) {
                return Err(bad(format!("a maximal block at {} has no target", br.base)));
            }
            let mut copies = Vec::new();
            for s in 0..m {
                let base_v = if l2 == 1 {
                    cv(i + 1, 0)
                } else {
                    cv(i + 1, br.base + s * sec2)
                };
                let mut ids = vec![base_v];
                for _ in 1..c.rot.len() {
                    ids.push(rot.len());
                    rot.push(Vec::new());
                }
                for x in 1..c.rot.len() {
                    rot[ids[x]] = c.rot[x].iter().map(|&y| ids[y]).collect();
                }
                for &(x, y) in &c.edges() {
                    level_edges[i + 1].insert(ek(ids[x], ids[y]));
                }
                for &v in &ids {
                    level_vertices[i + 1].insert(v);
                    base_of[i + 1].insert(v, base_v);
                }
                copies.push(ids);
            }
            if l2 == 1 {
                let c1 = cv(i + 1, 0);
                rot[c1] = (0..m)
                    .rev()
                    .flat_map(|s| c.rot[0].iter().map(|&y| copies[s][y]).collect::<Vec<_>>())
                    .collect();
            } else {
                for s in 0..m {
                    let ext: Vec<usize> = c.rot[0].iter().map(|&y| copies[s][y]).collect();
                    rot[copies[s][0]].extend(ext);
                }
            }
            cacti.push((c, copies, js));
        }

        let mut by_src: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        let mut srow = Vec::with_capacity(n);
        let mut trow = Vec::with_capacity(n);
        let mut brow = Vec::with_capacity(n);
        for j in 0..n {
            let (jj, t) = (j % a, j / a);
            let (c, copies, js) = &cacti[branch_of[jj]];
            let corner =
                lp.branches[branch_of[jj]].targets[js.iter().position(|&x| x == jj).unwrap()];
            let (sector, local) = if l2 == 1 {
                ((corner / c.sector_len() + t) % m, corner % c.sector_len())
            } else {
                ((t + shift[jj]) % m, corner)
            };
            let ids = &copies[sector];
            let (y, z) = c.corners[local];
            let yv = ids[y];
            let anchor = match z {
                Some(z) => Some(ids[z]),
                None if l2 == 1 => None,
                None => Some(cv(i + 1, next_b[j] + 1)),
            };
            let s = cv(i, src[j]);
            srow.push(s);
            trow.push(yv);
            brow.push(ids[0]);
            by_src.entry(s).or_default().push((j, yv));
            target_at.entry((yv, anchor)).or_default().push((j, s));
        }
        for j in 0..n {
            let j1 = (j + 1) % n;
            if srow[j] == srow[j1] && (trow[j] != trow[j1] || brow[j] != brow[j1]) {
                return Err(bad(format!(
                    "liaisons {} and {} share a source but not a target",
                    j, j1
                )));
            }
        }
        // source side, west to east after the previous centre vertex
        for (s, list) in by_src {
            let q = (s - cstart[i] + l - 1) % l;
            let order = cyclic_run(list.iter().map(|&(j, _)| j).collect(), n);
            let mut ys: Vec<usize> = Vec::new();
            for j in order {
                let y = list.iter().find(|&&(jj, _)| jj == j).unwrap().1;
                if ys.last() != Some(&y) {
                    ys.push(y);
                }
            }
            if ys.len() > 1 && ys.first() == ys.last() {
                ys.pop();
            }
            after.insert((s, cv(i, q)), ys);
        }
        table.sources.push(srow);
        table.targets.push(trow);
        table.bases.push(brow);
        bpos.push(next_b);
    }
    // target side, east to west
    for ((y, anchor), list) in target_at {
        let order = cyclic_run(list.iter().map(|&(j, _)| j).collect(), n);
        let mut ss: Vec<usize> = Vec::new();
        for j in order.into_iter().rev() {
            let s = list.iter().find(|&&(jj, _)| jj == j).unwrap().1;
            if ss.last() != Some(&s) {
                ss.push(s);
            }
        }
        if ss.len() > 1 && ss.first() == ss.last() {
            ss.pop();
        }
        match anchor {
            Some(z) => after.entry((y, z)).or_default().extend(ss),
            None => lone = ss,
        }
    }
    for (x, r) in rot.iter_mut().enumerate() {
        if r.is_empty() && x == cstart[k] && lens[k] == 1 {
            *r = lone.clone();
            continue;
        }
        let mut out = Vec::with_capacity(r.len());
        for &y in r.iter() {
            out.push(y);
            if let Some(list) = after.get(&(x, y)) {
                out.extend(list.iter().copied());
            }
        }
        *r = out;
    }

    let map = build_map(rot).map_err(|e| bad(format!("parameters give no plane map: {}", e)))?;
    let all: BTreeSet<Edge> = (0..map.num_edges())
        .map(|e| {
            let (x, y) = map.edge_ends(e);
            ek(x, y)
        })
        .collect();
    if blocks(&all).len() != 1 {
        return Err(bad("parameters give a net that is not 2-connected"));
    }
    let sec0 = l0 / m;
    let aut = extend_from_dart(
        &map,
        map.dart(cv(0, 0), cv(0, 1)).unwrap(),
        map.dart(cv(0, sec0), cv(0, sec0 + 1)).unwrap(),
        Chirality::Preserving,
    )
    .ok_or_else(|| bad("parameters give a net without the rotation"))?;
    let north = match p.north {
        RootDim::Vertex => Cell::Vertex(north_v.unwrap()),
        RootDim::Edge => Cell::Edge(map.edge_between(cv(0, 1), cv(0, 3)).unwrap()),
        RootDim::Face => Cell::Face(map.face_of(map.dart(cv(0, 0), cv(0, l0 - 1)).unwrap())),
    };
    let south_cell = match south.dim {
        RootDim::Vertex => Cell::Vertex(cv(k, 0)),
        RootDim::Edge => {
            let q = if pseudo { south.offset } else { 0 };
            Cell::Edge(map.edge_between(cv(k, q), cv(k, q + lk / 2)).unwrap())
        }
        RootDim::Face => {
            let q = if pseudo { south.offset } else { 0 };
            Cell::Face(map.face_of(map.dart(cv(k, q), cv(k, q + lk / 3)).unwrap()))
        }
    };
    let data = NetData {
        origin: (0..map.num_vertices()).collect(),
        phi_vertex: aut.vertex_permutation(&map),
        map,
        m,
        north,
        south: south_cell,
        south_kind: if pseudo {
            LevelKind::PseudoAntarctic
        } else {
            LevelKind::Antarctic
        },
        level_vertices,
        level_edges,
        base_of,
        liaisons: table,
    };
    data.finish()
        .map_err(|e| bad(format!("parameters give an inconsistent net: {}", e)))
}

/// Record a branch; one based at the image of `u_0` joins the branch of `u_0`.
fn add_branch(branches: &mut Vec<BranchParams>, wrapped: bool, br: BranchParams) {
    if wrapped {
        branches[0].targets.extend(br.targets);
    } else {
        branches.push(br);
    }
}

/// Parameters that reproduce the fyke net of an analysed triangulation.
pub fn fyke_params(map: &PlanarMap, an: &FykeAnalysis) -> Result<FykeParams> {
    let lv = &an.levels;
    let tb = &an.liaisons;
    let k = lv.len() - 1;
    let (m, a) = (tb.m, tb.a);
    let lost = || Error::InvariantViolation("analysis does not describe a fyke net".into());
    let pos: Vec<BTreeMap<usize, usize>> = lv
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let c = &l.centre;
            let anchor = c
                .iter()
                .position(|&x| x == tb.bases[i][0])
                .ok_or_else(lost)?;
            Ok(c.iter()
                .enumerate()
                .map(|(t, &x)| (x, (t + c.len() - anchor) % c.len()))
                .collect())
        })
        .collect::<Result<_>>()?;
    let c1 = an.rotation.c1;
    let lk = lv[k].centre.len();
    let dim = RootDim::of(c1);
    let offset = if lk > pole_size(dim) {
        let (x, _) = match c1 {
            Cell::Edge(e) => map.edge_ends(e),
            Cell::Face(f) => (map.face_vertices(f)[0], 0),
            Cell::Vertex(_) => return Err(lost()),
        };
        pos[k][&x] % (lk / m)
    } else {
        0
    };
    let mut levels = Vec::new();
    for i in 0..k {
        let next = &lv[i + 1];
        let l2 = next.centre.len();
        let sources: Vec<usize> = (0..a).map(|j| pos[i][&tb.sources[i][j]]).collect();
        let bases: Vec<usize> = (0..a).map(|j| pos[i + 1][&tb.bases[i + 1][j]]).collect();
        let mut reps = bases.clone();
        reps.dedup();
        let mut branches: Vec<BranchParams> = Vec::new();
        let wrapped = |q: usize| l2 >= 2 && q == l2 / m && q != 0;
        for &q in &reps {
            let u = next.centre[(q + next
                .centre
                .iter()
                .position(|&x| x == tb.bases[i + 1][0])
                .unwrap())
                % l2];
            let bedges: BTreeSet<Edge> = next
                .edges
                .iter()
                .copied()
                .filter(|e| {
                    an.net_edges.contains(e)
                        && !next.centre_edges.contains(e)
                        && next.base_of[&e.0] == u
                        && next.base_of[&e.1] == u
                })
                .collect();
            let brot = |x: usize| -> Vec<usize> {
                map.rotation(x)
                    .iter()
                    .copied()
                    .filter(|&y| bedges.contains(&ek(x, y)))
                    .collect()
            };
            let js: Vec<usize> = (0..a).filter(|&j| bases[j] == q).collect();
            if bedges.is_empty() {
                add_branch(
                    &mut branches,
                    wrapped(q),
                    BranchParams {
                        base: q,
                        cactus: None,
                        targets: vec![0; js.len()],
                    },
                );
                continue;
            }
            // gap after `z` at `y` in the triangulation, up to the next cactus or centre neighbour
            let gap = |y: usize, z: usize| -> Vec<usize> {
                let r = map.rotation(y);
                let p = r.iter().position(|&t| t == z).unwrap();
                (1..r.len())
                    .map(|t| r[(p + t) % r.len()])
                    .take_while(|&t| {
                        !bedges.contains(&ek(y, t)) && !next.centre_edges.contains(&ek(y, t))
                    })
                    .collect()
            };
            let corner_of = |corners: &[(usize, usize)], j: usize| -> Result<usize> {
                let (s, w) = (tb.sources[i][j], tb.targets[i][j]);
                corners
                    .iter()
                    .position(|&(y, z)| y == w && gap(y, z).contains(&s))
                    .ok_or_else(lost)
            };
            if l2 >= 2 {
                let pu = next.centre.iter().position(|&x| x == u).unwrap();
                let nxt = next.centre[(pu + 1) % l2];
                let r = map.rotation(u);
                let p0 = r.iter().position(|&t| t == nxt).unwrap();
                let base_rot: Vec<usize> = (1..=r.len())
                    .map(|t| r[(p0 + t) % r.len()])
                    .filter(|&y| bedges.contains(&ek(u, y)))
                    .collect();
                let mut ids = vec![u];
                ids.extend(
                    bedges
                        .iter()
                        .flat_map(|&(x, y)| [x, y])
                        .filter(|&x| x != u)
                        .collect::<BTreeSet<_>>(),
                );
                let index: BTreeMap<usize, usize> =
                    ids.iter().enumerate().map(|(t, &x)| (x, t)).collect();
                let mut lrot = vec![base_rot.iter().map(|y| index[y]).collect::<Vec<_>>()];
                for &x in &ids[1..] {
                    lrot.push(brot(x).iter().map(|y| index[y]).collect());
                }
                let c = Cactus::from_rotation(lrot.clone())?;
                let corners: Vec<(usize, usize)> = c
                    .corners
                    .iter()
                    .map(|&(y, z)| (ids[y], z.map(|z| ids[z]).unwrap_or(nxt)))
                    .collect();
                let targets = js
                    .iter()
                    .map(|&j| corner_of(&corners, j))
                    .collect::<Result<_>>()?;
                add_branch(
                    &mut branches,
                    wrapped(q),
                    BranchParams {
                        base: q,
                        cactus: Some(rs1_text(&lrot)),
                        targets,
                    },
                );
            } else {
                let (sub, origin, _) = super::submap(map, &bedges)?;
                let outer = (0..sub.num_faces())
                    .max_by_key(|&f| sub.face_len(f))
                    .unwrap();
                let trace = sub.face_darts(outer);
                let nd = trace.len();
                // clockwise walk: reversed trace
                let walk: Vec<(usize, usize)> = (0..nd)
                    .map(|t| {
                        let d = trace[nd - 1 - t];
                        (origin[sub.head(d)], origin[sub.tail(d)])
                    })
                    .collect();
                if nd % m != 0 {
                    return Err(lost());
                }
                let mlen = nd / m;
                let cj: Vec<usize> = (0..a).map(|j| corner_of(&walk, j)).collect::<Result<_>>()?;
                let g = (0..nd)
                    .map(|t| (cj[0] + nd - t) % nd)
                    .find(|&t| walk[t].0 == u)
                    .ok_or_else(lost)?;
                let nr = walk[g].1;
                let n1 = walk[(g + mlen - 1) % nd].0;
                let full = brot(u);
                let p1 = full.iter().position(|&y| y == n1).unwrap();
                let mut base_rot = Vec::new();
                for t in 0..full.len() {
                    let y = full[(p1 + t) % full.len()];
                    base_rot.push(y);
                    if y == nr {
                        break;
                    }
                }
                let mut sector: BTreeSet<usize> = BTreeSet::new();
                for t in 0..mlen {
                    let (x, y) = walk[(g + t) % nd];
                    sector.insert(x);
                    sector.insert(y);
                }
                sector.remove(&u);
                let mut ids = vec![u];
                ids.extend(sector.iter().copied());
                let lindex: BTreeMap<usize, usize> =
                    ids.iter().enumerate().map(|(t, &x)| (x, t)).collect();
                let mut lrot = vec![base_rot.iter().map(|y| lindex[y]).collect::<Vec<_>>()];
                for &x in &ids[1..] {
                    lrot.push(brot(x).iter().map(|y| lindex[y]).collect());
                }
                let targets = js.iter().map(|&j| (cj[j] + nd - g) % nd).collect();
                add_branch(
                    &mut branches,
                    wrapped(q),
                    BranchParams {
                        base: q,
                        cactus: Some(rs1_text(&lrot)),
                        targets,
                    },
                );
            }
        }
        levels.push(LevelParams {
            sources,
            bases,
            branches,
        });
    }
    Ok(FykeParams {
        m,
        north: RootDim::of(an.rotation.c0),
        a,
        south: SouthParams {
            dim,
            length: lk,
            offset,
        },
        centre_lengths: lv[1..k.max(1)].iter().map(|l| l.centre.len()).collect(),
        levels,
    })
}

/// Near-triangulation on outer vertices `0..k` (counterclockwise) plus
/// `extra` inner vertices, from its counterclockwise inner triangles.
pub fn near_from_triangles(
    k: usize,
    extra: usize,
    tris: &[[usize; 3]],
) -> Result<NearTriangulation> {
    let nv = k + extra;
    let mut succ: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); nv];
    for &[x, y, z] in tris {
        succ[x].insert(z, y);
        succ[y].insert(x, z);
        succ[z].insert(y, x);
    }
    for i in 0..k {
        succ[i].insert((i + 1) % k, (i + k - 1) % k);
    }
    let mut rot = Vec::with_capacity(nv);
    for s in &succ {
        let (&start, _) = s
            .iter()
            .next()
            .ok_or_else(|| Error::InvariantViolation("isolated filler vertex".into()))?;
        let mut r = vec![start];
        let mut y = s[&start];
        while y != start {
            r.push(y);
            y = *s
                .get(&y)
                .ok_or_else(|| Error::InvariantViolation("filler is not a disc".into()))?;
        }
        if r.len() != s.len() {
            return Err(Error::InvariantViolation("filler is not a disc".into()));
        }
        rot.push(r);
    }
    let map = build_map(rot)?;
    let face = map.face_of(map.dart(0, k - 1).unwrap());
    let edge = map.edge_between(0, 1).unwrap();
    validate_near_triangulation(
        map,
        StrongRooting {
            face,
            edge,
            vertex: 0,
        },
    )
}

/// A two-layered filling of a segment with `len` outer vertices.
///
/// The eastern face takes the vertex before the base, the remaining lower
/// polygon gets a wheel.
pub fn segment_filler(len: usize, markers: &SegmentMarkers) -> Result<NearTriangulation> {
    let SegmentMarkers { w2: p, u, order2 } = *markers;
    let k = len;
    if p == 0 || p + 1 >= k || u <= p || u >= k {
        return Err(bad("segment markers out of range"));
    }
    let c = if u == k - 1 { 0 } else { u + 1 };
    if order2 && c == 0 {
        return Err(Error::TwoLayeredViolation(
            "the eastern face must reach the western source, which order two forbids".into(),
        ));
    }
    let mut tris: Vec<[usize; 3]> = (1..p).map(|b| [0, b, b + 1]).collect();
    let poly_b: Vec<usize> = if c == 0 {
        tris.push([0, p, p + 1]);
        (p + 1..k).chain([0]).collect()
    } else {
        tris.push([p, p + 1, c]);
        for x in c..k - 1 {
            tris.push([p, x, x + 1]);
        }
        tris.push([p, k - 1, 0]);
        (p + 1..=c).collect()
    };
    let mut extra = 0;
    if poly_b.len() >= 3 {
        let z = k;
        extra = 1;
        for t in 0..poly_b.len() {
            tris.push([poly_b[t], poly_b[(t + 1) % poly_b.len()], z]);
        }
    }
    near_from_triangles(k, extra, &tris)
}

/// A filling for every orbit: segment fillers and wheels.
pub fn default_fillings(net: &FykeNet) -> Result<BTreeMap<usize, NearTriangulation>> {
    let mut out = BTreeMap::new();
    for (orbit, faces) in net.filled_orbits() {
        let f = faces[0];
        let len = net.map.face_len(f);
        let n = match net.faces[f].markers {
            Some(mk) => segment_filler(len, &mk)?,
            None => wheel_near(len),
        };
        out.insert(orbit, n);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fykenet::{compose_rotative, is_two_layered, two_layered_failure};
    use crate::triangulation::triangle_near;

    fn oct6_params() -> FykeParams {
        FykeParams {
            m: 4,
            north: RootDim::Vertex,
            a: 1,
            south: SouthParams {
                dim: RootDim::Vertex,
                length: 1,
                offset: 0,
            },
            centre_lengths: vec![],
            levels: vec![LevelParams {
                sources: vec![0],
                bases: vec![0],
                branches: vec![BranchParams {
                    base: 0,
                    cactus: None,
                    targets: vec![0],
                }],
            }],
        }
    }

    #[test]
    fn segment_filler_is_two_layered() {
        for k in 3..10 {
            for p in 1..k - 1 {
                for u in p + 1..k {
                    for order2 in [false, true] {
                        let mk = SegmentMarkers { w2: p, u, order2 };
                        match segment_filler(k, &mk) {
                            Ok(n) => {
                                assert_eq!(n.outer_len(), k);
                                assert_eq!(
                                    two_layered_failure(&n, &mk),
                                    None,
                                    "k={} p={} u={}",
                                    k,
                                    p,
                                    u
                                );
                            }
                            Err(Error::TwoLayeredViolation(_)) => assert!(order2 && u == k - 1),
                            Err(e) => panic!("{}", e),
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn oct6_params_compose_to_octahedron() {
        let net = construct_fyke_net(&oct6_params()).unwrap();
        assert_eq!(net.map.num_vertices(), 6);
        let t = compose_rotative(&net, &default_fillings(&net).unwrap()).unwrap();
        assert_eq!(t.map().num_vertices(), 6);
        let f = net.filled_orbits();
        assert!(f.values().all(|fs| fs.len() == 4));
        let mk = net.faces[f.values().next().unwrap()[0]].markers.unwrap();
        assert!(is_two_layered(&triangle_near(), &mk));
    }

    #[test]
    fn south_face_length_five_rejected() {
        let mut p = oct6_params();
        p.m = 3;
        p.a = 1;
        p.north = RootDim::Face;
        p.south = SouthParams {
            dim: RootDim::Face,
            length: 5,
            offset: 0,
        };
        match construct_fyke_net(&p) {
            Err(Error::BadParams(msg)) => assert!(msg.contains("divisible by 3")),
            other => panic!("{:?}", other.map(|n| n.map.num_vertices())),
        }
    }

    #[test]
    fn too_many_maximal_blocks_rejected() {
        let mut p = oct6_params();
        // two pendant edges at the south vertex per sector, one preimage
        p.levels[0].branches[0].cactus = Some("RS1 3\n1: 2 3\n2: 1\n3: 1\n".into());
        p.levels[0].branches[0].targets = vec![1];
        match construct_fyke_net(&p) {
            Err(Error::BadParams(msg)) => assert!(msg.contains("maximal blocks"), "{}", msg),
            other => panic!("{:?}", other.map(|n| n.map.num_vertices())),
        }
    }

    #[test]
    fn untargeted_maximal_block_rejected() {
        let mut p = oct6_params();
        p.a = 2;
        p.levels[0].sources = vec![0, 1];
        p.levels[0].bases = vec![0, 0];
        p.levels[0].branches[0].cactus = Some("RS1 3\n1: 2 3\n2: 1\n3: 1\n".into());
        p.levels[0].branches[0].targets = vec![1, 1];
        assert!(matches!(construct_fyke_net(&p), Err(Error::BadParams(_))));
        p.levels[0].branches[0].targets = vec![1, 3];
        let net = construct_fyke_net(&p).unwrap();
        compose_rotative(&net, &default_fillings(&net).unwrap()).unwrap();
    }
}
