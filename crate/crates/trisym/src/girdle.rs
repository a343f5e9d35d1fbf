//! Reflective decomposition: invariant cell cycle, girdle, the two sides and
//! the near-triangulation inserted into both of them.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::automorphism::{classify_at, fixed_cells, AutClass, MapAutomorphism};
use crate::core_map::{build_map, parse_rs1, serialize_rs1, Cell, Code, PlanarMap};
use crate::error::{Error, Result};
use crate::triangulation::{
    induced_near_triangulation, insert_many, validate_triangulation, Insertion, NearTriangulation,
    RootedTriangulation,
};

/// Cyclic sequence of invariant cells through the root, starting at it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantCycle {
    pub cells: Vec<Cell>,
}

impl InvariantCycle {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Same cycle walked the other way, still starting at the root.
    pub fn reversed(&self) -> InvariantCycle {
        let mut cells = vec![self.cells[0]];
        cells.extend(self.cells[1..].iter().rev().copied());
        InvariantCycle { cells }
    }
}

fn require_reflective(map: &PlanarMap, phi: &MapAutomorphism, c0: Cell) -> Result<()> {
    match classify_at(map, phi, c0) {
        Ok(AutClass::ReflectiveAt(_)) => Ok(()),
        Ok(_) => Err(Error::NotReflective),
        Err(_) if phi.apply(map, c0) != c0 => Err(Error::NotReflective),
        Err(e) => Err(e),
    }
}

/// The cycle of invariant cells through `c0` in the incidence graph on the
/// cells fixed by `phi`. Of the two directions the one through the fixed
/// incident cell that comes first clockwise at `c0` is returned.
pub fn invariant_cycle(t: &RootedTriangulation, phi: &MapAutomorphism) -> Result<InvariantCycle> {
    invariant_cycle_in(t.map(), phi, t.c0)
}

pub fn invariant_cycle_in(
    map: &PlanarMap,
    phi: &MapAutomorphism,
    c0: Cell,
) -> Result<InvariantCycle> {
    require_reflective(map, phi, c0)?;
    let fixed: BTreeSet<Cell> = fixed_cells(map, phi).into_iter().collect();
    let next_fixed = |c: Cell, prev: Option<Cell>| -> Result<Cell> {
        let inc: Vec<Cell> = map
            .incident_unchecked(c)
            .into_iter()
            .filter(|x| fixed.contains(x))
            .collect();
        if inc.len() != 2 {
            return Err(Error::InvariantViolation(format!(
                "{} invariant cells incident with {}",
                inc.len(),
                map.cell_label(c)
            )));
        }
        Ok(match prev {
            None => inc[0],
            Some(p) if inc[0] == p => inc[1],
            Some(_) => inc[0],
        })
    };
    let mut cells = vec![c0];
    let mut prev = c0;
    let mut cur = next_fixed(c0, None)?;
    while cur != c0 {
        if cells.len() > fixed.len() {
            return Err(Error::InvariantViolation(
                "invariant cycle does not close".into(),
            ));
        }
        cells.push(cur);
        let nxt = next_fixed(cur, Some(prev))?;
        prev = cur;
        cur = nxt;
    }
    Ok(InvariantCycle { cells })
}

/// A girdle as a map of its own, with its central cell sequence starting at
/// the root and the markers of the two sides.
#[derive(Debug, Clone)]
pub struct Girdle {
    pub map: PlanarMap,
    /// Vertex of the host triangulation for every girdle vertex.
    pub origin: Vec<usize>,
    /// Central cells in sequence order; `central[0]` is the root.
    pub central: Vec<Cell>,
    pub outer_cells: Vec<Cell>,
    /// Face pairs sharing a central edge.
    pub diamonds: Vec<(usize, usize)>,
    /// `f_1`, `f_2`; `f_1` lies on the left of the sequence direction.
    pub sides: [usize; 2],
    /// Index of the first central vertex.
    pub j: usize,
    pub v: [usize; 2],
    pub e: [usize; 2],
    /// Outer vertices of the girdle on the boundary of `f_1`.
    pub d_outer: Vec<usize>,
}

impl Girdle {
    pub fn root(&self) -> Cell {
        self.central[0]
    }

    /// Length of each side cycle.
    pub fn length(&self) -> usize {
        self.map.face_len(self.sides[0])
    }

    pub fn num_diamonds(&self) -> usize {
        self.diamonds.len()
    }

    /// Boundary of side `i` walked from `v_i` along `e_i`.
    pub fn side_walk(&self, i: usize) -> Vec<usize> {
        let f = self.sides[i];
        let fv = self.map.face_vertices(f);
        let k = fv.len();
        let (a, b) = self.map.edge_ends(self.e[i]);
        let w = if a == self.v[i] { b } else { a };
        let p = fv.iter().position(|&x| x == self.v[i]).unwrap();
        let step = if fv[(p + 1) % k] == w { 1 } else { k - 1 };
        (0..k).map(|s| fv[(p + s * step) % k]).collect()
    }

    /// Positions of `D_G` along the walk of side `f_1`.
    pub fn d_positions(&self) -> BTreeSet<usize> {
        let walk = self.side_walk(0);
        let d: BTreeSet<usize> = self.d_outer.iter().copied().collect();
        walk.iter()
            .enumerate()
            .filter(|(_, x)| d.contains(x))
            .map(|(i, _)| i)
            .collect()
    }

    /// Isomorphism-invariant code of the girdle with root, direction, central
    /// cells and first side marked.
    pub fn code(&self) -> Code {
        self.map.canonical_code_marked(&[
            vec![self.central[0]],
            vec![self.central[1]],
            self.central.clone(),
            vec![Cell::Face(self.sides[0])],
        ])
    }

    /// Same girdle with the central sequence walked the other way.
    pub fn reversed(&self) -> Result<Girdle> {
        let seq = InvariantCycle {
            cells: self.central.clone(),
        }
        .reversed();
        girdle_from_sequence(self.map.clone(), self.origin.clone(), seq.cells)
    }

    pub fn report(&self) -> GirdleFile {
        GirdleFile {
            schema: 1,
            kind: "girdle".into(),
            map: serialize_rs1(&self.map),
            central: self
                .central
                .iter()
                .map(|&c| self.map.cell_label(c))
                .collect(),
            diamonds: self.diamonds.len(),
            side_lengths: [
                self.map.face_len(self.sides[0]),
                self.map.face_len(self.sides[1]),
            ],
            sides: [
                format!("f:{}", self.map.face_code(self.sides[0])),
                format!("f:{}", self.map.face_code(self.sides[1])),
            ],
            j: self.j,
            v: [self.v[0] + 1, self.v[1] + 1],
            e: [
                self.map.cell_label(Cell::Edge(self.e[0])),
                self.map.cell_label(Cell::Edge(self.e[1])),
            ],
            d_g: self.d_outer.iter().map(|x| x + 1).collect(),
        }
    }
}

/// Serialised girdle; enough to rebuild it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GirdleFile {
    pub schema: u32,
    pub kind: String,
    pub map: String,
    pub central: Vec<String>,
    pub diamonds: usize,
    pub side_lengths: [usize; 2],
    pub sides: [String; 2],
    pub j: usize,
    pub v: [usize; 2],
    pub e: [String; 2],
    pub d_g: Vec<usize>,
}

impl GirdleFile {
    pub fn to_girdle(&self) -> Result<Girdle> {
        if self.schema != 1 || self.kind != "girdle" {
            return Err(Error::BadParams("not a girdle file".into()));
        }
        let map = parse_rs1(&self.map)?;
        let central = self
            .central
            .iter()
            .map(|s| map.parse_cell(s))
            .collect::<Result<Vec<_>>>()?;
        let origin = (0..map.num_vertices()).collect();
        let g = girdle_from_sequence(map, origin, central)?;
        if g.report().sides != self.sides || g.j != self.j {
            return Err(Error::BadParams(
                "girdle markers do not match its central cells".into(),
            ));
        }
        Ok(g)
    }
}

/// Complete the girdle data for a map and its central sequence.
pub fn girdle_from_sequence(
    map: PlanarMap,
    origin: Vec<usize>,
    central: Vec<Cell>,
) -> Result<Girdle> {
    let bad = |m: &str| Error::InvariantViolation(format!("girdle: {}", m));
    let n = central.len();
    if n < 4 {
        return Err(bad("central sequence too short"));
    }
    let central_set: BTreeSet<Cell> = central.iter().copied().collect();
    let mut diamonds = Vec::new();
    let mut diamond_faces = BTreeSet::new();
    for i in 0..n {
        if let Cell::Edge(e) = central[i] {
            let (p, q) = (central[(i + n - 1) % n], central[(i + 1) % n]);
            if let (Cell::Face(a), Cell::Face(b)) = (p, q) {
                diamonds.push((a.min(b), a.max(b)));
                diamond_faces.insert(a);
                diamond_faces.insert(b);
            } else if !(p.is_vertex() && q.is_vertex()) {
                return Err(bad(&format!(
                    "edge {} has mixed neighbours",
                    map.cell_label(Cell::Edge(e))
                )));
            }
        }
    }
    let sides_all: Vec<usize> = (0..map.num_faces())
        .filter(|f| !diamond_faces.contains(f))
        .collect();
    if sides_all.len() != 2 {
        return Err(bad(&format!("{} sides", sides_all.len())));
    }
    let j = central
        .iter()
        .position(|c| c.is_vertex())
        .ok_or_else(|| bad("no central vertex"))?;
    let v = match central[j] {
        Cell::Vertex(v) => v,
        _ => unreachable!(),
    };
    let (f1, f2, e1, e2) = match central[(j + 1) % n] {
        Cell::Edge(e) => {
            let (a, b) = map.edge_ends(e);
            let x = if a == v { b } else { a };
            (
                map.face_of(map.dart(v, x).unwrap()),
                map.face_of(map.dart(x, v).unwrap()),
                e,
                e,
            )
        }
        Cell::Face(t) => {
            let tv = map.face_vertices(t);
            let others: Vec<usize> = tv.iter().copied().filter(|&x| x != v).collect();
            if others.len() != 2 {
                return Err(bad("central face is not a triangle"));
            }
            let (a, b) = if map.face_of(map.dart(v, others[0]).unwrap()) == t {
                (others[0], others[1])
            } else {
                (others[1], others[0])
            };
            (
                map.face_of(map.dart(v, b).unwrap()),
                map.face_of(map.dart(a, v).unwrap()),
                map.edge_between(v, b).unwrap(),
                map.edge_between(v, a).unwrap(),
            )
        }
        Cell::Vertex(_) => return Err(bad("consecutive central vertices")),
    };
    if f1 == f2 || !sides_all.contains(&f1) || !sides_all.contains(&f2) {
        return Err(bad("markers do not lie on distinct sides"));
    }
    let outer_cells: Vec<Cell> = map
        .cells()
        .into_iter()
        .filter(|c| {
            !central_set.contains(c) && !matches!(c, Cell::Face(f) if sides_all.contains(f))
        })
        .collect();
    let d_outer: Vec<usize> = map
        .face_vertices(f1)
        .into_iter()
        .filter(|&x| !central_set.contains(&Cell::Vertex(x)))
        .collect();
    Ok(Girdle {
        map,
        origin,
        central,
        outer_cells,
        diamonds,
        sides: [f1, f2],
        j,
        v: [v, v],
        e: [e1, e2],
        d_outer,
    })
}

/// Girdle of `t` with respect to the reflection `phi`, with the central
/// sequence walked in the given direction.
fn girdle_in_direction(map: &PlanarMap, seq: &InvariantCycle) -> Result<Girdle> {
    let mut verts: BTreeSet<usize> = BTreeSet::new();
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for &c in &seq.cells {
        verts.extend(map.cell_vertices(c));
        for e in map.cell_edges(c) {
            edges.insert(map.edge_ends(e));
        }
    }
    let origin: Vec<usize> = verts.iter().copied().collect();
    let label: BTreeMap<usize, usize> = origin.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let rot: Vec<Vec<usize>> = origin
        .iter()
        .map(|&x| {
            map.rotation(x)
                .iter()
                .filter(|&&y| edges.contains(&(x.min(y), x.max(y))))
                .map(|y| label[y])
                .collect()
        })
        .collect();
    let g = build_map(rot)?;
    let central = seq
        .cells
        .iter()
        .map(|&c| match c {
            Cell::Vertex(v) => Cell::Vertex(label[&v]),
            Cell::Edge(e) => {
                let (a, b) = map.edge_ends(e);
                Cell::Edge(g.edge_between(label[&a], label[&b]).unwrap())
            }
            Cell::Face(f) => {
                let d = map.face_darts(f)[0];
                Cell::Face(g.face_of(g.dart(label[&map.tail(d)], label[&map.head(d)]).unwrap()))
            }
        })
        .collect();
    girdle_from_sequence(g, origin, central)
}

/// Girdle in the canonical orientation (see [`decompose_reflective`]).
pub fn build_girdle(t: &RootedTriangulation, phi: &MapAutomorphism) -> Result<Girdle> {
    Ok(decompose_reflective(t, phi)?.0)
}

/// The near-triangulation that `t` induces on side `f_1` of `g`.
fn side_filling(map: &PlanarMap, g: &Girdle) -> Result<NearTriangulation> {
    let cycle: Vec<usize> = g
        .map
        .face_vertices(g.sides[0])
        .iter()
        .map(|&x| g.origin[x])
        .collect();
    let (a, b) = g.map.edge_ends(g.e[0]);
    induced_near_triangulation(map, &cycle, g.origin[g.v[0]], (g.origin[a], g.origin[b]))
}

fn side_filling_2(map: &PlanarMap, g: &Girdle) -> Result<NearTriangulation> {
    let cycle: Vec<usize> = g
        .map
        .face_vertices(g.sides[1])
        .iter()
        .map(|&x| g.origin[x])
        .collect();
    let (a, b) = g.map.edge_ends(g.e[1]);
    induced_near_triangulation(map, &cycle, g.origin[g.v[1]], (g.origin[a], g.origin[b]))
}

/// Both orientations of the decomposition, each checked against the
/// properties of the sides. The first entry is the canonical one.
pub fn decompose_reflective_both(
    t: &RootedTriangulation,
    phi: &MapAutomorphism,
) -> Result<[(Girdle, NearTriangulation); 2]> {
    let map = t.map();
    let seq = invariant_cycle(t, phi)?;
    let fixed: BTreeSet<Cell> = fixed_cells(map, phi).into_iter().collect();
    let seq_set: BTreeSet<Cell> = seq.cells.iter().copied().collect();
    if fixed != seq_set {
        return Err(Error::InvariantViolation(
            "central cells differ from the invariant cells".into(),
        ));
    }
    let mut out = Vec::with_capacity(2);
    for s in [seq.clone(), seq.reversed()] {
        let g = girdle_in_direction(map, &s)?;
        let n1 = side_filling(map, &g)?;
        let n2 = side_filling_2(map, &g)?;
        if n1.code() != n2.code() {
            return Err(Error::InvariantViolation(
                "the two sides carry different fillings".into(),
            ));
        }
        if !n1.chordless_outside(&g.d_positions()) {
            return Err(Error::InvariantViolation(
                "filling has a chord between central vertices".into(),
            ));
        }
        out.push((g, n1));
    }
    let mut b = out.pop().unwrap();
    let mut a = out.pop().unwrap();
    if (b.0.code(), b.1.code()) < (a.0.code(), a.1.code()) {
        std::mem::swap(&mut a, &mut b);
    }
    Ok([a, b])
}

/// Girdle and side filling of `t` with respect to the reflection `phi`. Of
/// the two orientations the one with the smaller code is returned.
pub fn decompose_reflective(
    t: &RootedTriangulation,
    phi: &MapAutomorphism,
) -> Result<(Girdle, NearTriangulation)> {
    let [a, _] = decompose_reflective_both(t, phi)?;
    Ok(a)
}

/// Check the guards for filling both sides of `g` with `n`.
pub fn check_reflective_filling(g: &Girdle, n: &NearTriangulation) -> Result<()> {
    if n.outer_len() != g.length() {
        return Err(Error::LengthMismatch {
            expected: g.length(),
            got: n.outer_len(),
        });
    }
    if !n.chordless_outside(&g.d_positions()) {
        return Err(Error::ChordViolation(
            "chord with both ends on central vertices of the girdle".into(),
        ));
    }
    Ok(())
}

/// Insert `n` into both sides of `g`.
pub fn compose_reflective(g: &Girdle, n: &NearTriangulation) -> Result<RootedTriangulation> {
    check_reflective_filling(g, n)?;
    let h = insert_many(
        &g.map,
        &[
            Insertion {
                face: g.sides[0],
                vertex: g.v[0],
                edge: g.e[0],
                near: n,
            },
            Insertion {
                face: g.sides[1],
                vertex: g.v[1],
                edge: g.e[1],
                near: n,
            },
        ],
    )?;
    let c0 = carry_cell(&g.map, &h, g.root());
    let tri = validate_triangulation(h)?;
    RootedTriangulation::new(tri, c0)
}

/// A cell of `g` as a cell of a map obtained by inserting into faces of `g`
/// other than the one containing `c`.
pub(crate) fn carry_cell(g: &PlanarMap, h: &PlanarMap, c: Cell) -> Cell {
    match c {
        Cell::Vertex(v) => Cell::Vertex(v),
        Cell::Edge(e) => {
            let (a, b) = g.edge_ends(e);
            Cell::Edge(h.edge_between(a, b).unwrap())
        }
        Cell::Face(f) => {
            let d = g.face_darts(f)[0];
            Cell::Face(h.face_of(h.dart(g.tail(d), g.head(d)).unwrap()))
        }
    }
}

/// Dimension of a root cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RootDim {
    Vertex,
    Edge,
    Face,
}

impl RootDim {
    pub fn of(c: Cell) -> RootDim {
        match c {
            Cell::Vertex(_) => RootDim::Vertex,
            Cell::Edge(_) => RootDim::Edge,
            Cell::Face(_) => RootDim::Face,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GirdleParams {
    pub length: usize,
    pub diamonds: usize,
    pub root: RootDim,
}

/// Girdle map and central sequence for a cyclic pattern of slots, `true`
/// meaning a diamond and `false` a single central edge.
fn girdle_from_pattern(pattern: &[bool]) -> Result<(PlanarMap, Vec<Cell>)> {
    let s = pattern.len();
    let mut rot: Vec<Vec<usize>> = vec![Vec::new(); s];
    // outer vertex pair of each diamond slot
    let mut ab: Vec<Option<(usize, usize)>> = vec![None; s];
    for i in 0..s {
        if pattern[i] {
            let a = rot.len();
            rot.push(Vec::new());
            rot.push(Vec::new());
            ab[i] = Some((a, a + 1));
        }
    }
    for i in 0..s {
        let nx = (i + 1) % s;
        let pv = (i + s - 1) % s;
        // clockwise from the top: outgoing slot then incoming slot
        rot[i] = match (ab[i], ab[pv]) {
            (Some((a, b)), Some((pa, pb))) => vec![a, b, pb, pa],
            (Some((a, b)), None) => vec![a, b, pv],
            (None, Some((pa, pb))) => vec![nx, pb, pa],
            (None, None) => vec![nx, pv],
        };
        if let Some((a, b)) = ab[i] {
            rot[a] = vec![nx, b, i];
            rot[b] = vec![a, nx, i];
        }
    }
    let map = build_map(rot)?;
    let mut seq = Vec::new();
    for i in 0..s {
        let nx = (i + 1) % s;
        seq.push(Cell::Vertex(i));
        match ab[i] {
            Some((a, b)) => {
                seq.push(Cell::Face(map.face_with_vertices(&[i, a, b]).unwrap()));
                seq.push(Cell::Edge(map.edge_between(a, b).unwrap()));
                seq.push(Cell::Face(map.face_with_vertices(&[nx, a, b]).unwrap()));
            }
            None => seq.push(Cell::Edge(map.edge_between(i, nx).unwrap())),
        }
    }
    Ok((map, seq))
}

/// All oriented girdles with the given side length, number of diamonds and
/// root dimension, up to isomorphism.
pub fn enumerate_girdles(p: GirdleParams) -> Result<Vec<Girdle>> {
    let GirdleParams {
        length,
        diamonds: d,
        root,
    } = p;
    if length < 3 {
        return Err(Error::BadParams(format!(
            "girdle length {} below 3",
            length
        )));
    }
    if 2 * d > length {
        return Err(Error::BadParams(format!(
            "{} diamonds exceed half the length {}",
            d, length
        )));
    }
    if root == RootDim::Face && d == 0 {
        return Err(Error::BadParams(
            "a face root needs at least one diamond".into(),
        ));
    }
    let edges = length - 2 * d;
    let s = edges + d;
    let mut seen: BTreeSet<Code> = BTreeSet::new();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << s) {
        if mask.count_ones() as usize != d {
            continue;
        }
        let pattern: Vec<bool> = (0..s).map(|i| mask >> i & 1 == 1).collect();
        let Ok((map, seq)) = girdle_from_pattern(&pattern) else {
            continue;
        };
        let origin: Vec<usize> = (0..map.num_vertices()).collect();
        let n = seq.len();
        for start in 0..n {
            if RootDim::of(seq[start]) != root {
                continue;
            }
            for reverse in [false, true] {
                let mut cells: Vec<Cell> = (0..n).map(|i| seq[(start + i) % n]).collect();
                if reverse {
                    cells = InvariantCycle { cells }.reversed().cells;
                }
                let g = girdle_from_sequence(map.clone(), origin.clone(), cells)?;
                if seen.insert(g.code()) {
                    out.push(g);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automorphism::rooted_group_of;
    use crate::core_map::parse_rs1;
    use crate::fixtures;
    use crate::triangulation::{triangle_near, wheel_near};

    fn rooted(src: &str, c0: Cell) -> RootedTriangulation {
        RootedTriangulation::new(validate_triangulation(parse_rs1(src).unwrap()).unwrap(), c0)
            .unwrap()
    }

    #[test]
    fn bipyramid_apex_reflection() {
        let t = rooted(fixtures::BIPYR5, Cell::Vertex(0));
        let g = rooted_group_of(t.map(), t.c0).unwrap();
        for phi in g.reflections() {
            let cyc = invariant_cycle(&t, phi).unwrap();
            assert_eq!(cyc.len(), 8);
            let (gd, n) = decompose_reflective(&t, phi).unwrap();
            assert_eq!(gd.map.num_vertices(), 5);
            assert_eq!(gd.map.num_edges(), 7);
            assert_eq!(gd.num_diamonds(), 1);
            assert_eq!(gd.length(), 4);
            assert_eq!((n.outer_len(), n.n(), n.chords().len()), (4, 0, 1));
            let back = compose_reflective(&gd, &n).unwrap();
            assert_eq!(back.code(), t.code());
        }
    }

    #[test]
    fn octahedron_vertex_reflections() {
        let t = rooted(fixtures::OCT6, Cell::Vertex(0));
        let g = rooted_group_of(t.map(), t.c0).unwrap();
        let mut diamonds = Vec::new();
        for phi in g.reflections() {
            let cyc = invariant_cycle(&t, phi).unwrap();
            assert_eq!(cyc.len(), 8);
            let faces = cyc.cells.iter().filter(|c| c.is_face()).count();
            let (gd, n) = decompose_reflective(&t, phi).unwrap();
            diamonds.push((faces, gd.num_diamonds(), gd.length()));
            assert!(n.chordless_outside(&gd.d_positions()));
            assert_eq!(compose_reflective(&gd, &n).unwrap().code(), t.code());
        }
        diamonds.sort();
        assert_eq!(diamonds, vec![(0, 0, 4), (0, 0, 4), (4, 2, 4), (4, 2, 4)]);
    }

    #[test]
    fn rotation_is_not_reflective() {
        let t = rooted(fixtures::OCT6, Cell::Vertex(0));
        let g = rooted_group_of(t.map(), t.c0).unwrap();
        let rot = g
            .rotations()
            .into_iter()
            .find(|a| !a.is_identity())
            .unwrap()
            .clone();
        assert_eq!(
            decompose_reflective(&t, &rot).unwrap_err(),
            Error::NotReflective
        );
    }

    #[test]
    fn enumeration_guards_and_counts() {
        let bad = |l, d, root| {
            enumerate_girdles(GirdleParams {
                length: l,
                diamonds: d,
                root,
            })
        };
        assert!(matches!(bad(3, 0, RootDim::Face), Err(Error::BadParams(_))));
        assert!(matches!(
            bad(4, 3, RootDim::Vertex),
            Err(Error::BadParams(_))
        ));
        let gs = bad(4, 1, RootDim::Vertex).unwrap();
        assert!(!gs.is_empty());
        for g in &gs {
            assert_eq!(g.length(), 4);
            assert_eq!(g.num_diamonds(), 1);
        }
    }

    #[test]
    fn smallest_face_rooted_girdle() {
        let gs = enumerate_girdles(GirdleParams {
            length: 3,
            diamonds: 1,
            root: RootDim::Face,
        })
        .unwrap();
        // root on either diamond face, walked towards the central edge or away
        assert_eq!(gs.len(), 2);
        for g in &gs {
            // bare triangles close the girdle up to K4
            assert_eq!(
                compose_reflective(g, &triangle_near()).unwrap_err(),
                Error::Trivial(4)
            );
            let t = compose_reflective(g, &wheel_near(3)).unwrap();
            assert_eq!((t.map().num_vertices(), t.map().num_faces()), (6, 8));
            assert!(t.c0.is_face());
        }
    }

    #[test]
    fn girdle_file_roundtrip() {
        let t = rooted(fixtures::BIPYR5, Cell::Vertex(0));
        let g = rooted_group_of(t.map(), t.c0).unwrap();
        let (gd, _) = decompose_reflective(&t, g.reflections()[0]).unwrap();
        let file = gd.report();
        let back = file.to_girdle().unwrap();
        assert_eq!(back.code(), gd.code());
        assert_eq!(back.report(), file);
    }
}
