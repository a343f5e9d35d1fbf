//! Rotation-system representation of maps on the sphere.
//!
//! Vertices are `0..V` internally and `1..=V` in RS1 text. Every vertex stores
//! its neighbours in clockwise order. Darts are numbered so that the darts
//! leaving `v` occupy `offset[v]..offset[v+1]` in rotation order.
//!
//! Faces are traced by `next(u->v) = (v->w)` where `w` follows `u` in the
//! clockwise rotation at `v`. With that rule every face lies on the left of
//! each of its darts.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A vertex, edge or face of a map, referenced by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Cell {
    Vertex(usize),
    Edge(usize),
    Face(usize),
}

impl Cell {
    pub fn dimension(&self) -> u8 {
        match self {
            Cell::Vertex(_) => 0,
            Cell::Edge(_) => 1,
            Cell::Face(_) => 2,
        }
    }

    pub fn is_vertex(&self) -> bool {
        matches!(self, Cell::Vertex(_))
    }

    pub fn is_edge(&self) -> bool {
        matches!(self, Cell::Edge(_))
    }

    pub fn is_face(&self) -> bool {
        matches!(self, Cell::Face(_))
    }
}

/// Orientation behaviour of a map isomorphism.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Chirality {
    Preserving,
    Reversing,
}

impl Chirality {
    pub fn compose(self, other: Chirality) -> Chirality {
        if self == other {
            Chirality::Preserving
        } else {
            Chirality::Reversing
        }
    }
}

/// Mutually incident vertex, edge and face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Flag {
    pub vertex: usize,
    pub edge: usize,
    pub face: usize,
}

/// Canonical code: lexicographically comparable sequence of labels.
pub type Code = Vec<u32>;

const SEP: u32 = u32::MAX;

/// Render a code as a compact hex string (for index files).
pub fn code_hex(code: &[u32]) -> String {
    let mut s = String::with_capacity(code.len() * 2);
    for &x in code {
        if x == SEP {
            s.push('.');
        } else {
            s.push_str(&format!("{:x}", x));
            s.push(',');
        }
    }
    s
}

#[derive(Clone)]
pub struct PlanarMap {
    rotation: Vec<Vec<usize>>,
    offset: Vec<usize>,
    tail: Vec<usize>,
    head: Vec<usize>,
    rev: Vec<usize>,
    dart_edge: Vec<usize>,
    edges: Vec<(usize, usize)>,
    edge_dart: Vec<usize>,
    faces: Vec<Vec<usize>>,
    dart_face: Vec<usize>,
}

impl fmt::Debug for PlanarMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "PlanarMap(V={}, E={}, F={}) ",
            self.num_vertices(),
            self.num_edges(),
            self.num_faces()
        )?;
        f.debug_list().entries(self.rotation.iter()).finish()
    }
}

impl PartialEq for PlanarMap {
    fn eq(&self, other: &Self) -> bool {
        self.rotation == other.rotation
    }
}

impl Eq for PlanarMap {}

/// Build and validate a map from clockwise neighbour lists (0-based ids).
pub fn build_map(rotation: Vec<Vec<usize>>) -> Result<PlanarMap> {
    let n = rotation.len();
    if n == 0 {
        return Err(Error::EmptyMap);
    }
    for (v, nb) in rotation.iter().enumerate() {
        let mut seen = BTreeSet::new();
        for &u in nb {
            if u >= n {
                return Err(Error::UnknownVertex(u));
            }
            if u == v {
                return Err(Error::LoopEdge(v));
            }
            if !seen.insert(u) {
                return Err(Error::ParallelEdge(v, u));
            }
        }
    }
    for (v, nb) in rotation.iter().enumerate() {
        for &u in nb {
            if !rotation[u].contains(&v) {
                return Err(Error::InconsistentRotation(v, u));
            }
        }
    }

    let mut offset = Vec::with_capacity(n + 1);
    offset.push(0);
    for nb in &rotation {
        offset.push(offset.last().unwrap() + nb.len());
    }
    let nd = offset[n];
    let mut tail = vec![0; nd];
    let mut head = vec![0; nd];
    for v in 0..n {
        for (i, &u) in rotation[v].iter().enumerate() {
            tail[offset[v] + i] = v;
            head[offset[v] + i] = u;
        }
    }
    let mut rev = vec![0; nd];
    for d in 0..nd {
        let (u, v) = (tail[d], head[d]);
        let j = rotation[v].iter().position(|&x| x == u).unwrap();
        rev[d] = offset[v] + j;
    }

    // connectivity
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        for &u in &rotation[v] {
            if !seen[u] {
                seen[u] = true;
                queue.push_back(u);
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::NotConnected);
    }

    let mut edges: Vec<(usize, usize)> = (0..nd)
        .filter(|&d| tail[d] < head[d])
        .map(|d| (tail[d], head[d]))
        .collect();
    edges.sort_unstable();
    let mut edge_dart = vec![0; edges.len()];
    let mut dart_edge = vec![0; nd];
    for (e, &(u, v)) in edges.iter().enumerate() {
        let d = offset[u] + rotation[u].iter().position(|&x| x == v).unwrap();
        edge_dart[e] = d;
        dart_edge[d] = e;
        dart_edge[rev[d]] = e;
    }

    let succ = |d: usize| -> usize {
        let v = tail[d];
        let i = d - offset[v];
        offset[v] + (i + 1) % rotation[v].len()
    };

    let mut traced = vec![usize::MAX; nd];
    let mut raw_faces: Vec<Vec<usize>> = Vec::new();
    for d0 in 0..nd {
        if traced[d0] != usize::MAX {
            continue;
        }
        let mut cyc = Vec::new();
        let mut d = d0;
        loop {
            traced[d] = raw_faces.len();
            cyc.push(d);
            d = succ(rev[d]);
            if d == d0 {
                break;
            }
        }
        raw_faces.push(cyc);
    }
    if nd == 0 {
        raw_faces.push(Vec::new());
    }
    let euler = n as i64 - edges.len() as i64 + raw_faces.len() as i64;
    if euler != 2 {
        return Err(Error::EulerViolation(euler));
    }

    // normalise each face to its lexicographically minimal rotation
    let mut keyed: Vec<(Vec<usize>, Vec<usize>)> = raw_faces
        .into_iter()
        .map(|cyc| {
            let k = cyc.len();
            let verts: Vec<usize> = cyc.iter().map(|&d| tail[d]).collect();
            let best = (0..k.max(1))
                .min_by(|&a, &b| {
                    (0..k)
                        .map(|i| verts[(a + i) % k])
                        .cmp((0..k).map(|i| verts[(b + i) % k]))
                })
                .unwrap_or(0);
            let cyc: Vec<usize> = (0..k).map(|i| cyc[(best + i) % k]).collect();
            let key: Vec<usize> = cyc.iter().map(|&d| tail[d]).collect();
            (key, cyc)
        })
        .collect();
    keyed.sort();
    let faces: Vec<Vec<usize>> = keyed.into_iter().map(|(_, c)| c).collect();
    let mut dart_face = vec![0; nd];
    for (f, cyc) in faces.iter().enumerate() {
        for &d in cyc {
            dart_face[d] = f;
        }
    }

    Ok(PlanarMap {
        rotation,
        offset,
        tail,
        head,
        rev,
        dart_edge,
        edges,
        edge_dart,
        faces,
        dart_face,
    })
}

impl PlanarMap {
    pub fn num_vertices(&self) -> usize {
        self.rotation.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn num_darts(&self) -> usize {
        self.tail.len()
    }

    pub fn num_flags(&self) -> usize {
        2 * self.num_darts()
    }

    pub fn rotation(&self, v: usize) -> &[usize] {
        &self.rotation[v]
    }

    pub fn rotations(&self) -> &[Vec<usize>] {
        &self.rotation
    }

    pub fn vertex_degree(&self, v: usize) -> usize {
        self.rotation[v].len()
    }

    pub fn tail(&self, d: usize) -> usize {
        self.tail[d]
    }

    pub fn head(&self, d: usize) -> usize {
        self.head[d]
    }

    pub fn rev(&self, d: usize) -> usize {
        self.rev[d]
    }

    /// Darts leaving `v`, in clockwise order.
    pub fn darts_out(&self, v: usize) -> std::ops::Range<usize> {
        self.offset[v]..self.offset[v + 1]
    }

    /// Next dart clockwise around the tail.
    pub fn succ(&self, d: usize) -> usize {
        let v = self.tail[d];
        let i = d - self.offset[v];
        self.offset[v] + (i + 1) % self.rotation[v].len()
    }

    /// Next dart counter-clockwise around the tail.
    pub fn pred(&self, d: usize) -> usize {
        let v = self.tail[d];
        let k = self.rotation[v].len();
        let i = d - self.offset[v];
        self.offset[v] + (i + k - 1) % k
    }

    pub fn face_next(&self, d: usize) -> usize {
        self.succ(self.rev[d])
    }

    pub fn face_prev(&self, d: usize) -> usize {
        self.rev[self.pred(d)]
    }

    pub fn dart(&self, u: usize, v: usize) -> Option<usize> {
        if u >= self.num_vertices() {
            return None;
        }
        self.rotation[u]
            .iter()
            .position(|&x| x == v)
            .map(|i| self.offset[u] + i)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.dart(u, v).is_some()
    }

    pub fn edge_of(&self, d: usize) -> usize {
        self.dart_edge[d]
    }

    pub fn face_of(&self, d: usize) -> usize {
        self.dart_face[d]
    }

    pub fn edge_ends(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    /// Dart of edge `e` pointing from the smaller to the larger end.
    pub fn edge_dart(&self, e: usize) -> usize {
        self.edge_dart[e]
    }

    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        self.dart(u, v).map(|d| self.dart_edge[d])
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Darts of face `f` in tracing order.
    pub fn face_darts(&self, f: usize) -> &[usize] {
        &self.faces[f]
    }

    /// Vertices of face `f` in tracing order (starting at the minimal id).
    pub fn face_vertices(&self, f: usize) -> Vec<usize> {
        self.faces[f].iter().map(|&d| self.tail[d]).collect()
    }

    pub fn face_len(&self, f: usize) -> usize {
        self.faces[f].len()
    }

    /// Face id in text form, 1-based vertex ids joined by `-`.
    pub fn face_code(&self, f: usize) -> String {
        self.face_vertices(f)
            .iter()
            .map(|v| (v + 1).to_string())
            .collect::<Vec<_>>()
            .join("-")
    }

    pub fn face_by_code(&self, code: &str) -> Option<usize> {
        (0..self.num_faces()).find(|&f| self.face_code(f) == code)
    }

    /// Face whose boundary is exactly the given vertex triple or cycle, if any.
    pub fn face_with_vertices(&self, verts: &[usize]) -> Option<usize> {
        let mut want = verts.to_vec();
        want.sort_unstable();
        (0..self.num_faces()).find(|&f| {
            let mut fv = self.face_vertices(f);
            fv.sort_unstable();
            fv == want
        })
    }

    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::with_capacity(self.num_vertices() + self.num_edges() + self.num_faces());
        out.extend((0..self.num_vertices()).map(Cell::Vertex));
        out.extend((0..self.num_edges()).map(Cell::Edge));
        out.extend((0..self.num_faces()).map(Cell::Face));
        out
    }

    pub fn contains_cell(&self, c: Cell) -> bool {
        match c {
            Cell::Vertex(v) => v < self.num_vertices(),
            Cell::Edge(e) => e < self.num_edges(),
            Cell::Face(f) => f < self.num_faces(),
        }
    }

    fn check_cell(&self, c: Cell) -> Result<()> {
        if self.contains_cell(c) {
            Ok(())
        } else {
            Err(Error::UnknownCell(format!("{:?}", c)))
        }
    }

    /// Vertices on the closure of a cell.
    pub fn cell_vertices(&self, c: Cell) -> Vec<usize> {
        match c {
            Cell::Vertex(v) => vec![v],
            Cell::Edge(e) => {
                let (u, v) = self.edges[e];
                vec![u, v]
            }
            Cell::Face(f) => self.face_vertices(f),
        }
    }

    /// Edges on the closure of a cell.
    pub fn cell_edges(&self, c: Cell) -> Vec<usize> {
        match c {
            Cell::Vertex(_) => vec![],
            Cell::Edge(e) => vec![e],
            Cell::Face(f) => self.faces[f].iter().map(|&d| self.dart_edge[d]).collect(),
        }
    }

    pub fn cell_label(&self, c: Cell) -> String {
        match c {
            Cell::Vertex(v) => format!("v:{}", v + 1),
            Cell::Edge(e) => {
                let (u, v) = self.edges[e];
                format!("e:{}-{}", u + 1, v + 1)
            }
            Cell::Face(f) => format!("f:{}", self.face_code(f)),
        }
    }

    /// Parse a root cell `v:<id>`, `e:<u>-<v>` or `f:<face-code>` (1-based).
    pub fn parse_cell(&self, text: &str) -> Result<Cell> {
        let bad = || Error::UnknownCell(text.to_string());
        let (kind, rest) = text.split_once(':').ok_or_else(bad)?;
        match kind {
            "v" => {
                let v: usize = rest.trim().parse().map_err(|_| bad())?;
                if v == 0 || v > self.num_vertices() {
                    return Err(bad());
                }
                Ok(Cell::Vertex(v - 1))
            }
            "e" => {
                let (a, b) = rest.split_once('-').ok_or_else(bad)?;
                let a: usize = a.trim().parse().map_err(|_| bad())?;
                let b: usize = b.trim().parse().map_err(|_| bad())?;
                if a == 0 || b == 0 {
                    return Err(bad());
                }
                self.edge_between(a - 1, b - 1)
                    .map(Cell::Edge)
                    .ok_or_else(bad)
            }
            "f" => {
                if let Some(f) = self.face_by_code(rest.trim()) {
                    return Ok(Cell::Face(f));
                }
                let verts: Vec<usize> = rest
                    .split('-')
                    .map(|t| t.trim().parse::<usize>().map_err(|_| bad()))
                    .collect::<Result<Vec<_>>>()?;
                if verts.iter().any(|&v| v == 0) {
                    return Err(bad());
                }
                let verts: Vec<usize> = verts.into_iter().map(|v| v - 1).collect();
                self.face_with_vertices(&verts)
                    .map(Cell::Face)
                    .ok_or_else(bad)
            }
            _ => Err(bad()),
        }
    }

    /// Cells incident with `c`, clockwise, alternating in dimension.
    pub fn incident_cells_cyclic(&self, c: Cell) -> Result<Vec<Cell>> {
        self.check_cell(c)?;
        Ok(self.incident_unchecked(c))
    }

    pub(crate) fn incident_unchecked(&self, c: Cell) -> Vec<Cell> {
        match c {
            Cell::Vertex(v) => {
                let ds: Vec<usize> = self.darts_out(v).collect();
                let k = ds.len();
                let mut out = Vec::with_capacity(2 * k);
                for i in 0..k {
                    out.push(Cell::Edge(self.dart_edge[ds[i]]));
                    out.push(Cell::Face(self.dart_face[ds[(i + 1) % k]]));
                }
                out
            }
            Cell::Edge(e) => {
                let d = self.edge_dart[e];
                vec![
                    Cell::Vertex(self.tail[d]),
                    Cell::Face(self.dart_face[d]),
                    Cell::Vertex(self.head[d]),
                    Cell::Face(self.dart_face[self.rev[d]]),
                ]
            }
            Cell::Face(f) => {
                let ds = &self.faces[f];
                let k = ds.len();
                let mut out = Vec::with_capacity(2 * k);
                for i in 0..k {
                    let x = ds[(k - i) % k];
                    out.push(Cell::Vertex(self.tail[x]));
                    out.push(Cell::Edge(self.dart_edge[ds[(2 * k - i - 1) % k]]));
                }
                out
            }
        }
    }

    pub fn degree(&self, c: Cell) -> Result<usize> {
        Ok(self.incident_cells_cyclic(c)?.len() / 2)
    }

    pub fn is_incident(&self, a: Cell, b: Cell) -> bool {
        self.contains_cell(a) && self.incident_unchecked(a).contains(&b)
    }

    /// The cell lying opposite to `x` at `c`.
    pub fn opposite_cell(&self, c: Cell, x: Cell) -> Result<Option<Cell>> {
        let seq = self.incident_cells_cyclic(c)?;
        let i = seq.iter().position(|&y| y == x).ok_or(Error::NotIncident)?;
        if seq.is_empty() {
            return Ok(None);
        }
        let d = seq.len() / 2;
        Ok(Some(seq[(i + d) % seq.len()]))
    }

    /// Length of a shortest chain of incident cells from `a` to `b`.
    pub fn cell_distance(&self, a: Cell, b: Cell) -> Result<usize> {
        self.check_cell(a)?;
        self.check_cell(b)?;
        let dist = self.cell_distances_from(a);
        Ok(dist[&b])
    }

    /// Incidence-graph distances from one cell to every cell.
    pub fn cell_distances_from(&self, a: Cell) -> std::collections::HashMap<Cell, usize> {
        let mut dist = std::collections::HashMap::new();
        dist.insert(a, 0usize);
        let mut queue = VecDeque::from([a]);
        while let Some(c) = queue.pop_front() {
            let dc = dist[&c];
            for x in self.incident_unchecked(c) {
                if !dist.contains_key(&x) {
                    dist.insert(x, dc + 1);
                    queue.push_back(x);
                }
            }
        }
        dist
    }

    /// The flag with index `i`: dart `i / 2`, face on the left (`i` even) or right.
    pub fn flag(&self, i: usize) -> Flag {
        let d = i / 2;
        let face = if i % 2 == 0 {
            self.dart_face[d]
        } else {
            self.dart_face[self.rev[d]]
        };
        Flag {
            vertex: self.tail[d],
            edge: self.dart_edge[d],
            face,
        }
    }

    pub fn flag_index(&self, fl: Flag) -> Option<usize> {
        let (u, v) = *self.edges.get(fl.edge)?;
        let other = if fl.vertex == u {
            v
        } else if fl.vertex == v {
            u
        } else {
            return None;
        };
        let d = self.dart(fl.vertex, other)?;
        if self.dart_face[d] == fl.face {
            Some(2 * d)
        } else if self.dart_face[self.rev[d]] == fl.face {
            Some(2 * d + 1)
        } else {
            None
        }
    }

    pub fn flags_containing(&self, c: Cell) -> Vec<usize> {
        (0..self.num_flags())
            .filter(|&i| {
                let fl = self.flag(i);
                match c {
                    Cell::Vertex(v) => fl.vertex == v,
                    Cell::Edge(e) => fl.edge == e,
                    Cell::Face(f) => fl.face == f,
                }
            })
            .collect()
    }

    /// Same map with every rotation reversed.
    pub fn mirror(&self) -> PlanarMap {
        let rot = self
            .rotation
            .iter()
            .map(|nb| nb.iter().rev().copied().collect())
            .collect();
        build_map(rot).expect("mirror of a valid map is valid")
    }

    /// Relabel vertices: old vertex `v` becomes `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> PlanarMap {
        let n = self.num_vertices();
        let mut rot = vec![Vec::new(); n];
        for v in 0..n {
            rot[perm[v]] = self.rotation[v].iter().map(|&u| perm[u]).collect();
        }
        build_map(rot).expect("relabelling a valid map is valid")
    }

    /// Image of a cell under a vertex relabelling produced by [`relabel`].
    pub fn relabel_cell(&self, other: &PlanarMap, perm: &[usize], c: Cell) -> Cell {
        match c {
            Cell::Vertex(v) => Cell::Vertex(perm[v]),
            Cell::Edge(e) => {
                let (u, v) = self.edges[e];
                Cell::Edge(other.edge_between(perm[u], perm[v]).unwrap())
            }
            Cell::Face(f) => {
                let d = self.faces[f][0];
                let d2 = other.dart(perm[self.tail[d]], perm[self.head[d]]).unwrap();
                Cell::Face(other.dart_face[d2])
            }
        }
    }

    /// Dual map; fails when the dual has loops or parallel edges.
    pub fn dual(&self) -> Result<PlanarMap> {
        let mut rot = Vec::with_capacity(self.num_faces());
        for f in 0..self.num_faces() {
            let ds = &self.faces[f];
            let nb: Vec<usize> = ds
                .iter()
                .rev()
                .map(|&d| self.dart_face[self.rev[d]])
                .collect();
            let mut seen = BTreeSet::new();
            for &g in &nb {
                if g == f || !seen.insert(g) {
                    return Err(Error::DualNotSimple);
                }
            }
            rot.push(nb);
        }
        build_map(rot)
    }

    /// Breadth-first encoding starting at dart `start`; `reverse` walks
    /// rotations counter-clockwise. Aborts with `None` once the encoding is
    /// known to exceed `bound`.
    fn encode(
        &self,
        start: usize,
        reverse: bool,
        bound: Option<&[u32]>,
        labels: &mut Vec<u32>,
    ) -> Option<Vec<u32>> {
        let n = self.num_vertices();
        labels.clear();
        labels.resize(n, u32::MAX);
        let mut first = vec![usize::MAX; n];
        let mut order = Vec::with_capacity(n);
        let mut out: Vec<u32> = Vec::with_capacity(self.num_darts() + n + 1);
        let mut tight = bound.is_some();
        let push = |out: &mut Vec<u32>, x: u32, tight: &mut bool| -> bool {
            if *tight {
                let b = bound.unwrap();
                let i = out.len();
                if i < b.len() {
                    if x > b[i] {
                        return false;
                    }
                    if x < b[i] {
                        *tight = false;
                    }
                }
            }
            out.push(x);
            true
        };
        if !push(&mut out, n as u32, &mut tight) {
            return None;
        }
        let v0 = self.tail[start];
        labels[v0] = 0;
        first[v0] = start;
        order.push(v0);
        let mut qi = 0;
        while qi < order.len() {
            let x = order[qi];
            qi += 1;
            let mut d = first[x];
            for _ in 0..self.rotation[x].len() {
                let y = self.head[d];
                if labels[y] == u32::MAX {
                    labels[y] = order.len() as u32;
                    first[y] = self.rev[d];
                    order.push(y);
                }
                if !push(&mut out, labels[y], &mut tight) {
                    return None;
                }
                d = if reverse { self.pred(d) } else { self.succ(d) };
            }
            if !push(&mut out, SEP, &mut tight) {
                return None;
            }
        }
        Some(out)
    }

    fn encode_cell(&self, c: Cell, labels: &[u32]) -> Vec<u32> {
        match c {
            Cell::Vertex(v) => vec![0, labels[v]],
            Cell::Edge(e) => {
                let (u, v) = self.edges[e];
                let (a, b) = (labels[u], labels[v]);
                vec![1, a.min(b), a.max(b)]
            }
            Cell::Face(f) => {
                let mut pairs: Vec<(u32, u32)> = self.faces[f]
                    .iter()
                    .map(|&d| {
                        let (a, b) = (labels[self.tail[d]], labels[self.head[d]]);
                        (a.min(b), a.max(b))
                    })
                    .collect();
                pairs.sort_unstable();
                let mut out = vec![2, pairs.len() as u32];
                for (a, b) in pairs {
                    out.push(a);
                    out.push(b);
                }
                out
            }
        }
    }

    fn encode_marks(&self, marks: &[Vec<Cell>], labels: &[u32]) -> Vec<u32> {
        let mut out = Vec::new();
        for m in marks {
            let mut enc: Vec<Vec<u32>> = m.iter().map(|&c| self.encode_cell(c, labels)).collect();
            enc.sort();
            out.push(SEP - 1);
            out.push(enc.len() as u32);
            for e in enc {
                out.extend(e);
            }
        }
        out
    }

    /// Isomorphism-invariant code over both chiralities.
    pub fn canonical_code(&self) -> Code {
        self.canonical_code_marked(&[])
    }

    /// Canonical code of the map together with marked cell sets. Two
    /// (map, marks) pairs get the same code iff some isomorphism, possibly
    /// orientation reversing, maps each mark set onto the corresponding one.
    pub fn canonical_code_marked(&self, marks: &[Vec<Cell>]) -> Code {
        if self.num_darts() == 0 {
            let mut out = vec![self.num_vertices() as u32, SEP];
            let labels = vec![0u32; self.num_vertices()];
            out.extend(self.encode_marks(marks, &labels));
            return out;
        }
        let mut best: Option<Vec<u32>> = None;
        let mut labels = Vec::new();
        for d in 0..self.num_darts() {
            for &reverse in &[false, true] {
                if let Some(mut enc) = self.encode(d, reverse, best.as_deref(), &mut labels) {
                    enc.extend(self.encode_marks(marks, &labels));
                    if best.as_ref().map_or(true, |b| enc < *b) {
                        best = Some(enc);
                    }
                }
            }
        }
        best.unwrap()
    }

    /// Canonical code of the map rooted at a single cell.
    pub fn rooted_code(&self, c0: Cell) -> Code {
        self.canonical_code_marked(&[vec![c0]])
    }

    /// Relabelled copy in canonical position for the root `c0`: the
    /// labelling (and chirality) that attains the rooted code. Isomorphic
    /// rooted maps give identical RS1 text.
    pub fn normal_form(&self, c0: Cell) -> (PlanarMap, Cell) {
        let marks = [vec![c0]];
        let mut best: Option<(Vec<u32>, Vec<u32>, bool)> = None;
        let mut labels = Vec::new();
        for d in 0..self.num_darts() {
            for &reverse in &[false, true] {
                if let Some(mut enc) = self.encode(d, reverse, None, &mut labels) {
                    enc.extend(self.encode_marks(&marks, &labels));
                    if best.as_ref().map_or(true, |b| enc < b.0) {
                        best = Some((enc, labels.clone(), reverse));
                    }
                }
            }
        }
        let Some((_, labels, reverse)) = best else {
            return (self.clone(), c0);
        };
        let perm: Vec<usize> = labels.iter().map(|&l| l as usize).collect();
        let relabelled = self.relabel(&perm);
        let c = self.relabel_cell(&relabelled, &perm, c0);
        if !reverse {
            return (relabelled, c);
        }
        let m = relabelled.mirror();
        let c = match c {
            Cell::Face(f) => {
                let d = relabelled.faces[f][0];
                let d2 = m.dart(relabelled.head[d], relabelled.tail[d]).unwrap();
                Cell::Face(m.dart_face[d2])
            }
            Cell::Edge(e) => {
                let (u, v) = relabelled.edges[e];
                Cell::Edge(m.edge_between(u, v).unwrap())
            }
            v => v,
        };
        (m, c)
    }

    /// Code of the map with a distinguished flag. Orientation reversing
    /// isomorphisms are allowed, so the flag's side picks the walk direction.
    pub fn flag_code(&self, flag_index: usize) -> Code {
        let d = flag_index / 2;
        let reverse = flag_index % 2 == 1;
        let mut labels = Vec::new();
        self.encode(d, reverse, None, &mut labels).unwrap()
    }
}

/// Parse RS1 text into a map.
pub fn parse_rs1(text: &str) -> Result<PlanarMap> {
    let (map, _) = parse_rs1_with_extra(text)?;
    Ok(map)
}

/// Parse RS1, returning also non-vertex keyed lines (such as `root:`) with their line numbers.
pub fn parse_rs1_with_extra(text: &str) -> Result<(PlanarMap, Vec<(usize, String)>)> {
    let err = |line: usize, column: usize, message: &str| Error::ParseError {
        line,
        column,
        message: message.to_string(),
    };
    let mut header: Option<usize> = None;
    let mut rot: Vec<Option<Vec<usize>>> = Vec::new();
    let mut extra = Vec::new();
    for (li, raw) in text.lines().enumerate() {
        let line_no = li + 1;
        let content = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        if content.trim().is_empty() {
            continue;
        }
        let lead = content.len() - content.trim_start().len();
        let content_t = content.trim();
        match header {
            None => {
                let mut parts = content_t.split_whitespace();
                if parts.next() != Some("RS1") {
                    return Err(err(line_no, lead + 1, "expected header `RS1 <V>`"));
                }
                let vs = parts
                    .next()
                    .ok_or_else(|| err(line_no, lead + 4, "missing vertex count"))?;
                let n: usize = vs
                    .parse()
                    .map_err(|_| err(line_no, lead + 5, "vertex count is not a number"))?;
                if parts.next().is_some() {
                    return Err(err(
                        line_no,
                        lead + 5 + vs.len(),
                        "trailing tokens after vertex count",
                    ));
                }
                if n == 0 {
                    return Err(err(line_no, lead + 5, "vertex count must be positive"));
                }
                header = Some(n);
                rot = vec![None; n];
            }
            Some(n) => {
                let colon = content_t
                    .find(':')
                    .ok_or_else(|| err(line_no, lead + 1, "expected `<id>:`"))?;
                let key = content_t[..colon].trim();
                let rest = &content_t[colon + 1..];
                let id: usize = match key.parse() {
                    Ok(id) => id,
                    Err(_) => {
                        if key.chars().all(|c| c.is_ascii_alphabetic()) && !key.is_empty() {
                            extra.push((line_no, content_t.to_string()));
                            continue;
                        }
                        return Err(err(line_no, lead + 1, "vertex id is not a number"));
                    }
                };
                if id == 0 || id > n {
                    return Err(err(line_no, lead + 1, "vertex id out of range"));
                }
                if rot[id - 1].is_some() {
                    return Err(err(line_no, lead + 1, "vertex listed twice"));
                }
                let mut nbs = Vec::new();
                let base = lead + colon + 2;
                let mut col = 0usize;
                for tok in rest.split(' ') {
                    let here = base + col;
                    col += tok.len() + 1;
                    let tok = tok.trim();
                    if tok.is_empty() {
                        continue;
                    }
                    let x: usize = tok
                        .parse()
                        .map_err(|_| err(line_no, here, "neighbour is not a number"))?;
                    if x == 0 || x > n {
                        return Err(err(line_no, here, "neighbour id out of range"));
                    }
                    nbs.push(x - 1);
                }
                rot[id - 1] = Some(nbs);
            }
        }
    }
    let n = header.ok_or_else(|| err(1, 1, "missing header"))?;
    let mut out = Vec::with_capacity(n);
    for (i, r) in rot.into_iter().enumerate() {
        match r {
            Some(r) => out.push(r),
            None => {
                return Err(err(
                    text.lines().count().max(1),
                    1,
                    &format!("vertex {} has no rotation line", i + 1),
                ))
            }
        }
    }
    Ok((build_map(out)?, extra))
}

/// Map on `nv` vertices from its face traces, each listed with the face on
/// the left. Every dart has to occur in exactly one trace.
pub fn map_from_faces(nv: usize, faces: &[Vec<usize>]) -> Result<PlanarMap> {
    let mut succ: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); nv];
    let mut darts = BTreeSet::new();
    for f in faces {
        let k = f.len();
        for i in 0..k {
            let (a, b, c) = (f[i], f[(i + 1) % k], f[(i + 2) % k]);
            if a >= nv || b >= nv || c >= nv {
                return Err(Error::UnknownVertex(a.max(b).max(c)));
            }
            if !darts.insert((a, b)) {
                return Err(Error::ParallelEdge(a.min(b), a.max(b)));
            }
            succ[b].insert(a, c);
        }
    }
    if let Some(&(a, b)) = darts.iter().find(|&&(a, b)| !darts.contains(&(b, a))) {
        return Err(Error::InconsistentRotation(a, b));
    }
    let mut rot = Vec::with_capacity(nv);
    for (v, s) in succ.iter().enumerate() {
        let Some((&start, _)) = s.iter().next() else {
            return Err(Error::NotConnected);
        };
        let mut r = vec![start];
        let mut y = s[&start];
        while y != start {
            if r.len() > s.len() {
                return Err(Error::InconsistentRotation(v, y));
            }
            r.push(y);
            y = *s.get(&y).ok_or(Error::InconsistentRotation(v, y))?;
        }
        if r.len() != s.len() {
            return Err(Error::InconsistentRotation(v, r[0]));
        }
        rot.push(r);
    }
    build_map(rot)
}

/// Normalised RS1 text.
pub fn serialize_rs1(map: &PlanarMap) -> String {
    let mut s = format!("RS1 {}\n", map.num_vertices());
    for v in 0..map.num_vertices() {
        let nb = map.rotation(v);
        s.push_str(&format!("{}:", v + 1));
        if let Some(start) = (0..nb.len()).min_by_key(|&i| nb[i]) {
            for i in 0..nb.len() {
                s.push_str(&format!(" {}", nb[(start + i) % nb.len()] + 1));
            }
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const K4: &str = "RS1 4\n1: 2 3 4\n2: 1 4 3\n3: 1 2 4\n4: 1 3 2\n";

    fn k4() -> PlanarMap {
        parse_rs1(K4).unwrap()
    }

    #[test]
    fn normal_form_is_label_free() {
        let m = k4();
        let (a, ca) = m.normal_form(Cell::Vertex(2));
        let perm = vec![3, 1, 0, 2];
        let r = m.relabel(&perm).mirror();
        let (b, cb) = r.normal_form(Cell::Vertex(perm[2]));
        assert_eq!(serialize_rs1(&a), serialize_rs1(&b));
        assert_eq!(ca, cb);
        assert_eq!(a.rooted_code(ca), m.rooted_code(Cell::Vertex(2)));
    }

    #[test]
    fn k4_counts() {
        let m = k4();
        assert_eq!((m.num_vertices(), m.num_edges(), m.num_faces()), (4, 6, 4));
        for f in 0..4 {
            assert_eq!(m.face_len(f), 3);
        }
        assert_eq!(m.num_flags(), 24);
    }

    #[test]
    fn triangle_counts() {
        let m = build_map(vec![vec![1, 2], vec![2, 0], vec![0, 1]]).unwrap();
        assert_eq!((m.num_vertices(), m.num_edges(), m.num_faces()), (3, 3, 2));
    }

    #[test]
    fn inconsistent_rotation() {
        let r = build_map(vec![vec![1, 2], vec![2], vec![0, 1]]);
        assert!(matches!(r, Err(Error::InconsistentRotation(0, 1))));
    }

    #[test]
    fn loops_and_parallels() {
        assert!(matches!(build_map(vec![vec![0]]), Err(Error::LoopEdge(0))));
        assert!(matches!(
            build_map(vec![vec![1, 1], vec![0, 0]]),
            Err(Error::ParallelEdge(0, 1))
        ));
        assert!(matches!(
            build_map(vec![vec![1], vec![0], vec![3], vec![2]]),
            Err(Error::NotConnected)
        ));
    }

    #[test]
    fn torus_embedding_rejected() {
        // K4 with one rotation flipped is not spherical
        let r = build_map(vec![
            vec![1, 2, 3],
            vec![0, 2, 3],
            vec![0, 1, 3],
            vec![0, 2, 1],
        ]);
        assert!(matches!(r, Err(Error::EulerViolation(_))));
    }

    #[test]
    fn incident_cells_at_vertex_and_edge() {
        let m = k4();
        let seq = m.incident_cells_cyclic(Cell::Vertex(0)).unwrap();
        assert_eq!(seq.len(), 6);
        for (i, c) in seq.iter().enumerate() {
            assert_eq!(c.dimension(), if i % 2 == 0 { 1 } else { 2 });
            let nxt = seq[(i + 1) % seq.len()];
            assert!(m.is_incident(*c, nxt));
        }
        let e = m.edge_between(0, 1).unwrap();
        let seq = m.incident_cells_cyclic(Cell::Edge(e)).unwrap();
        assert_eq!(seq.len(), 4);
        assert_eq!(seq[0], Cell::Vertex(0));
        assert_eq!(seq[2], Cell::Vertex(1));
        assert_eq!(m.degree(Cell::Vertex(0)).unwrap(), 3);
        assert_eq!(m.degree(Cell::Edge(e)).unwrap(), 2);
        assert_eq!(m.degree(Cell::Face(0)).unwrap(), 3);
    }

    #[test]
    fn opposite_cells() {
        let m = k4();
        let f = 0;
        let verts = m.face_vertices(f);
        let v = verts[0];
        let opp = m
            .opposite_cell(Cell::Face(f), Cell::Vertex(v))
            .unwrap()
            .unwrap();
        let Cell::Edge(e) = opp else { panic!() };
        let (a, b) = m.edge_ends(e);
        assert!(a != v && b != v);
        let e01 = m.edge_between(0, 1).unwrap();
        assert_eq!(
            m.opposite_cell(Cell::Edge(e01), Cell::Vertex(0)).unwrap(),
            Some(Cell::Vertex(1))
        );
        // odd degree: an edge lies opposite a face
        let x = m
            .opposite_cell(Cell::Vertex(0), Cell::Edge(e01))
            .unwrap()
            .unwrap();
        assert!(x.is_face());
        assert!(matches!(
            m.opposite_cell(Cell::Vertex(0), Cell::Vertex(1)),
            Err(Error::NotIncident)
        ));
    }

    #[test]
    fn distances() {
        let m = k4();
        assert_eq!(
            m.cell_distance(Cell::Vertex(0), Cell::Vertex(0)).unwrap(),
            0
        );
        let e = m.edge_between(0, 1).unwrap();
        assert_eq!(m.cell_distance(Cell::Vertex(0), Cell::Edge(e)).unwrap(), 1);
        assert_eq!(
            m.cell_distance(Cell::Vertex(0), Cell::Vertex(1)).unwrap(),
            2
        );
    }

    #[test]
    fn dual_of_k4_and_triangle() {
        let m = k4();
        let d = m.dual().unwrap();
        assert_eq!(d.canonical_code(), m.canonical_code());
        let t = build_map(vec![vec![1, 2], vec![2, 0], vec![0, 1]]).unwrap();
        assert!(matches!(t.dual(), Err(Error::DualNotSimple)));
    }

    #[test]
    fn rs1_roundtrip_and_degenerate() {
        let m = k4();
        assert_eq!(serialize_rs1(&m), K4);
        let txt = "# comment\nRS1 4\n1: 3 4 2\n2: 4 3 1 # tail\n3: 1 2 4\n4: 1 3 2\n";
        let m2 = parse_rs1(txt).unwrap();
        assert_eq!(serialize_rs1(&m2), K4);
        let e = parse_rs1("RS1 2\n1: 2\n2: 1\n").unwrap();
        assert_eq!((e.num_edges(), e.num_faces()), (1, 1));
    }

    #[test]
    fn rs1_parse_errors() {
        let r = parse_rs1("RS1 2\n1: 2\n2: x\n");
        assert!(
            matches!(
                r,
                Err(Error::ParseError {
                    line: 3,
                    column: 4,
                    ..
                })
            ),
            "{:?}",
            r
        );
        assert!(matches!(
            parse_rs1("RS2 1\n"),
            Err(Error::ParseError { line: 1, .. })
        ));
        assert!(matches!(
            parse_rs1("RS1 2\n1: 2\n"),
            Err(Error::ParseError { .. })
        ));
    }

    #[test]
    fn code_invariance_under_relabel_and_mirror() {
        let m = k4();
        let c = m.canonical_code();
        let r = m.relabel(&[2, 0, 3, 1]);
        assert_eq!(r.canonical_code(), c);
        assert_eq!(m.mirror().canonical_code(), c);
    }

    #[test]
    fn flags_are_mutually_incident() {
        let m = k4();
        for i in 0..m.num_flags() {
            let fl = m.flag(i);
            assert!(m.is_incident(Cell::Vertex(fl.vertex), Cell::Edge(fl.edge)));
            assert!(m.is_incident(Cell::Edge(fl.edge), Cell::Face(fl.face)));
            assert!(m.is_incident(Cell::Vertex(fl.vertex), Cell::Face(fl.face)));
            assert_eq!(m.flag_index(fl), Some(i));
        }
    }
}
