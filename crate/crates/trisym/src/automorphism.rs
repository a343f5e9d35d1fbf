//! Map automorphisms via flag propagation, rooted groups and their types.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::core_map::{Cell, Chirality, PlanarMap};
use crate::error::{Error, Result};
use crate::triangulation::RootedTriangulation;

/// An automorphism as a permutation of darts together with its chirality.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MapAutomorphism {
    dart_image: Vec<usize>,
    chirality: Chirality,
}

impl MapAutomorphism {
    pub fn identity(map: &PlanarMap) -> Self {
        MapAutomorphism {
            dart_image: (0..map.num_darts()).collect(),
            chirality: Chirality::Preserving,
        }
    }

    pub fn chirality(&self) -> Chirality {
        self.chirality
    }

    pub fn is_reflection(&self) -> bool {
        self.chirality == Chirality::Reversing
    }

    pub fn dart_image(&self) -> &[usize] {
        &self.dart_image
    }

    pub fn is_identity(&self) -> bool {
        self.dart_image.iter().enumerate().all(|(i, &j)| i == j)
    }

    pub fn apply_dart(&self, d: usize) -> usize {
        self.dart_image[d]
    }

    pub fn apply_vertex(&self, map: &PlanarMap, v: usize) -> usize {
        match map.darts_out(v).next() {
            Some(d) => map.tail(self.dart_image[d]),
            None => v,
        }
    }

    pub fn apply_edge(&self, map: &PlanarMap, e: usize) -> usize {
        map.edge_of(self.dart_image[map.edge_dart(e)])
    }

    pub fn apply_face(&self, map: &PlanarMap, f: usize) -> usize {
        let ds = map.face_darts(f);
        if ds.is_empty() {
            return f;
        }
        let d = self.dart_image[ds[0]];
        match self.chirality {
            Chirality::Preserving => map.face_of(d),
            Chirality::Reversing => map.face_of(map.rev(d)),
        }
    }

    pub fn apply(&self, map: &PlanarMap, c: Cell) -> Cell {
        match c {
            Cell::Vertex(v) => Cell::Vertex(self.apply_vertex(map, v)),
            Cell::Edge(e) => Cell::Edge(self.apply_edge(map, e)),
            Cell::Face(f) => Cell::Face(self.apply_face(map, f)),
        }
    }

    pub fn fixes(&self, map: &PlanarMap, c: Cell) -> bool {
        self.apply(map, c) == c
    }

    /// `self` after `other`.
    pub fn compose(&self, other: &MapAutomorphism) -> MapAutomorphism {
        MapAutomorphism {
            dart_image: other
                .dart_image
                .iter()
                .map(|&d| self.dart_image[d])
                .collect(),
            chirality: self.chirality.compose(other.chirality),
        }
    }

    pub fn inverse(&self) -> MapAutomorphism {
        let mut inv = vec![0; self.dart_image.len()];
        for (i, &j) in self.dart_image.iter().enumerate() {
            inv[j] = i;
        }
        MapAutomorphism {
            dart_image: inv,
            chirality: self.chirality,
        }
    }

    pub fn pow(&self, k: usize) -> MapAutomorphism {
        let mut out = MapAutomorphism {
            dart_image: (0..self.dart_image.len()).collect(),
            chirality: Chirality::Preserving,
        };
        for _ in 0..k {
            out = self.compose(&out);
        }
        out
    }

    pub fn order(&self) -> usize {
        let mut k = 1;
        let mut p = self.clone();
        while !p.is_identity() {
            p = self.compose(&p);
            k += 1;
        }
        k
    }

    /// Vertex permutation induced on the map.
    pub fn vertex_permutation(&self, map: &PlanarMap) -> Vec<usize> {
        (0..map.num_vertices())
            .map(|v| self.apply_vertex(map, v))
            .collect()
    }
}

/// The unique automorphism sending dart `d` to `d2` with the given
/// chirality, if one exists.
pub fn extend_from_dart(
    map: &PlanarMap,
    d: usize,
    d2: usize,
    chi: Chirality,
) -> Option<MapAutomorphism> {
    let nd = map.num_darts();
    let mut img = vec![usize::MAX; nd];
    img[d] = d2;
    let mut stack = vec![d];
    while let Some(x) = stack.pop() {
        let y = img[x];
        let around = match chi {
            Chirality::Preserving => map.succ(y),
            Chirality::Reversing => map.pred(y),
        };
        for (a, b) in [(map.rev(x), map.rev(y)), (map.succ(x), around)] {
            if img[a] == usize::MAX {
                img[a] = b;
                stack.push(a);
            } else if img[a] != b {
                return None;
            }
        }
    }
    let mut hit = vec![false; nd];
    for &y in &img {
        if y == usize::MAX || hit[y] {
            return None;
        }
        hit[y] = true;
    }
    Some(MapAutomorphism {
        dart_image: img,
        chirality: chi,
    })
}

/// Propagate a flag image through the map. The chirality must agree with
/// the sides of the two flags, otherwise no automorphism exists.
pub fn extend_from_flag(
    map: &PlanarMap,
    src: usize,
    dst: usize,
    chi: Chirality,
) -> Option<MapAutomorphism> {
    let same_side = src % 2 == dst % 2;
    let needed = if same_side {
        Chirality::Preserving
    } else {
        Chirality::Reversing
    };
    if needed != chi {
        return None;
    }
    extend_from_dart(map, src / 2, dst / 2, chi)
}

/// All automorphisms of the map.
pub fn full_group(map: &PlanarMap) -> Vec<MapAutomorphism> {
    if map.num_flags() == 0 {
        return vec![MapAutomorphism::identity(map)];
    }
    let mut out = Vec::new();
    for dst in 0..map.num_flags() {
        for chi in [Chirality::Preserving, Chirality::Reversing] {
            if let Some(a) = extend_from_flag(map, 0, dst, chi) {
                out.push(a);
            }
        }
    }
    out
}

/// Automorphisms fixing a root cell.
#[derive(Debug, Clone)]
pub struct RootedGroup {
    pub c0: Cell,
    pub elements: Vec<MapAutomorphism>,
    pub group_type: GroupType,
}

impl RootedGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn rotations(&self) -> Vec<&MapAutomorphism> {
        self.elements
            .iter()
            .filter(|a| !a.is_reflection())
            .collect()
    }

    pub fn reflections(&self) -> Vec<&MapAutomorphism> {
        self.elements.iter().filter(|a| a.is_reflection()).collect()
    }
}

/// Stabiliser of `c0` in the automorphism group of `map`.
pub fn rooted_elements(map: &PlanarMap, c0: Cell) -> Vec<MapAutomorphism> {
    let flags = map.flags_containing(c0);
    let Some(&src) = flags.first() else {
        return vec![MapAutomorphism::identity(map)];
    };
    let mut out = Vec::new();
    for &dst in &flags {
        for chi in [Chirality::Preserving, Chirality::Reversing] {
            if let Some(a) = extend_from_flag(map, src, dst, chi) {
                out.push(a);
            }
        }
    }
    out
}

pub fn rooted_group_of(map: &PlanarMap, c0: Cell) -> Result<RootedGroup> {
    let elements = rooted_elements(map, c0);
    let group_type = group_type(map, c0, &elements)?;
    Ok(RootedGroup {
        c0,
        elements,
        group_type,
    })
}

pub fn rooted_group(t: &RootedTriangulation) -> Result<RootedGroup> {
    rooted_group_of(t.map(), t.c0)
}

/// Abstract type of a rooted automorphism group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GroupType {
    Trivial,
    /// Two elements, the non-identity one a reflection.
    Z2Reflection,
    /// Cyclic group of rotations of the given order.
    Z(usize),
    /// Dihedral group with the given number of reflections.
    Dih(usize),
}

impl GroupType {
    pub fn order(&self) -> usize {
        match *self {
            GroupType::Trivial => 1,
            GroupType::Z2Reflection => 2,
            GroupType::Z(k) => k,
            GroupType::Dih(n) => 2 * n,
        }
    }

    /// Parse `Z<k>` or `D<n>` (and `Z2r` for a single reflection).
    pub fn parse(s: &str) -> Option<GroupType> {
        let s = s.trim();
        if s == "1" || s.eq_ignore_ascii_case("trivial") {
            return Some(GroupType::Trivial);
        }
        if s.eq_ignore_ascii_case("z2r") {
            return Some(GroupType::Z2Reflection);
        }
        if let Some(k) = s.strip_prefix('Z') {
            return k.parse().ok().map(GroupType::Z);
        }
        if let Some(n) = s.strip_prefix('D') {
            return n.parse().ok().map(GroupType::Dih);
        }
        None
    }
}

impl fmt::Display for GroupType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupType::Trivial => write!(f, "Trivial"),
            GroupType::Z2Reflection => write!(f, "Z(2) reflective"),
            GroupType::Z(k) => write!(f, "Z({})", k),
            GroupType::Dih(n) => write!(f, "Dih({})", n),
        }
    }
}

/// Classify a set of automorphisms fixing `c0`.
pub fn group_type(map: &PlanarMap, c0: Cell, elements: &[MapAutomorphism]) -> Result<GroupType> {
    let order = elements.len();
    let rot: Vec<&MapAutomorphism> = elements.iter().filter(|a| !a.is_reflection()).collect();
    let nrefl = order - rot.len();
    for a in elements {
        if a.apply(map, c0) != c0 {
            return Err(Error::InvariantViolation(
                "element does not fix the root".into(),
            ));
        }
    }
    let cyclic = rot.iter().any(|a| a.order() == rot.len());
    if !cyclic {
        return Err(Error::InvariantViolation(
            "rotation subgroup is not cyclic".into(),
        ));
    }
    match (rot.len(), nrefl) {
        (1, 0) => Ok(GroupType::Trivial),
        (1, 1) => Ok(GroupType::Z2Reflection),
        (k, 0) => Ok(GroupType::Z(k)),
        (k, r) if r == k => Ok(GroupType::Dih(k)),
        _ => Err(Error::InvariantViolation(format!(
            "{} rotations and {} reflections",
            rot.len(),
            nrefl
        ))),
    }
}

/// Kind of a non-trivial automorphism relative to a fixed cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AutClass {
    Identity,
    ReflectiveAt(Cell),
    RotativeAt(Cell),
}

/// Classify `phi` at a cell it fixes, by the incident cells it fixes.
pub fn classify_at(map: &PlanarMap, phi: &MapAutomorphism, c0: Cell) -> Result<AutClass> {
    if phi.apply(map, c0) != c0 {
        return Err(Error::InvariantViolation("root not fixed".into()));
    }
    let inc = map.incident_cells_cyclic(c0)?;
    let fixed: Vec<usize> = (0..inc.len()).filter(|&i| phi.fixes(map, inc[i])).collect();
    if fixed.len() == inc.len() {
        if phi.is_identity() {
            return Ok(AutClass::Identity);
        }
        return Err(Error::InvariantViolation(
            "non-identity automorphism fixes all incident cells".into(),
        ));
    }
    match fixed.len() {
        0 => {
            if phi.is_reflection() {
                return Err(Error::InvariantViolation(
                    "reflection fixes no incident cell".into(),
                ));
            }
            Ok(AutClass::RotativeAt(c0))
        }
        2 => {
            let d = inc.len() / 2;
            if (fixed[1] - fixed[0]) != d {
                return Err(Error::InvariantViolation(
                    "fixed incident cells are not opposite".into(),
                ));
            }
            if !phi.is_reflection() {
                return Err(Error::InvariantViolation(
                    "rotation fixes incident cells".into(),
                ));
            }
            Ok(AutClass::ReflectiveAt(c0))
        }
        k => Err(Error::InvariantViolation(format!(
            "{} fixed incident cells",
            k
        ))),
    }
}

/// All cells fixed by `phi`.
pub fn fixed_cells(map: &PlanarMap, phi: &MapAutomorphism) -> Vec<Cell> {
    map.cells()
        .into_iter()
        .filter(|&c| phi.fixes(map, c))
        .collect()
}

/// Clockwise shift of a rotation fixing `c0`: the image of the first incident
/// cell sits this many positions further along the clockwise order.
pub fn clockwise_shift(map: &PlanarMap, phi: &MapAutomorphism, c0: Cell) -> usize {
    let inc = map.incident_unchecked(c0);
    let img = phi.apply(map, inc[0]);
    inc.iter().position(|&c| c == img).unwrap()
}

/// Generator of the rotation subgroup that advances incident cells by the
/// smallest clockwise step.
pub fn rotation_generator(
    map: &PlanarMap,
    elements: &[MapAutomorphism],
    c0: Cell,
) -> Option<MapAutomorphism> {
    elements
        .iter()
        .filter(|a| !a.is_reflection() && !a.is_identity())
        .min_by_key(|a| clockwise_shift(map, a, c0))
        .cloned()
}

/// All subgroups generated by rotations, each as its element list: one
/// cyclic subgroup per divisor of the rotation subgroup's order.
pub fn cyclic_subgroups(elements: &[MapAutomorphism]) -> Vec<Vec<MapAutomorphism>> {
    let rot: Vec<&MapAutomorphism> = elements.iter().filter(|a| !a.is_reflection()).collect();
    let mut seen: BTreeSet<Vec<Vec<usize>>> = BTreeSet::new();
    let mut out = Vec::new();
    for g in &rot {
        if g.is_identity() {
            continue;
        }
        let k = g.order();
        let mut sub: Vec<MapAutomorphism> = (0..k).map(|i| g.pow(i)).collect();
        sub.sort();
        let key: Vec<Vec<usize>> = sub.iter().map(|a| a.dart_image.clone()).collect();
        if seen.insert(key) {
            out.push(sub);
        }
    }
    out
}

/// Dihedral subgroups: for every non-trivial cyclic rotation subgroup and
/// every reflection, the group they generate.
pub fn dihedral_subgroups(elements: &[MapAutomorphism]) -> Vec<Vec<MapAutomorphism>> {
    let mut seen: BTreeSet<Vec<Vec<usize>>> = BTreeSet::new();
    let mut out = Vec::new();
    for sub in cyclic_subgroups(elements) {
        for r in elements.iter().filter(|a| a.is_reflection()) {
            let mut all: Vec<MapAutomorphism> = sub.clone();
            all.extend(sub.iter().map(|g| g.compose(r)));
            all.sort();
            all.dedup();
            let key: Vec<Vec<usize>> = all.iter().map(|a| a.dart_image.clone()).collect();
            if seen.insert(key) {
                out.push(all);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_map::parse_rs1;
    use crate::fixtures;

    /// Vertex permutations preserving all rotations, or reversing all of them.
    fn brute_force_order(map: &PlanarMap) -> usize {
        let n = map.num_vertices();
        let mut count = 0;
        let mut perm: Vec<usize> = (0..n).collect();
        fn permutations(k: usize, perm: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if k == perm.len() {
                out.push(perm.clone());
                return;
            }
            for i in k..perm.len() {
                perm.swap(k, i);
                permutations(k + 1, perm, out);
                perm.swap(k, i);
            }
        }
        let mut all = Vec::new();
        permutations(0, &mut perm, &mut all);
        for p in all {
            for reverse in [false, true] {
                let ok = (0..n).all(|v| {
                    let img: Vec<usize> = map.rotation(v).iter().map(|&u| p[u]).collect();
                    let mut tgt: Vec<usize> = map.rotation(p[v]).to_vec();
                    if reverse {
                        tgt.reverse();
                    }
                    img.len() == tgt.len()
                        && (0..tgt.len().max(1))
                            .any(|s| (0..img.len()).all(|i| img[i] == tgt[(i + s) % tgt.len()]))
                });
                if ok {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn full_group_orders_match_brute_force() {
        for (src, want) in [
            (fixtures::K4, 24),
            (fixtures::BIPYR5, 12),
            (fixtures::OCT6, 48),
        ] {
            let m = parse_rs1(src).unwrap();
            assert_eq!(full_group(&m).len(), want);
            assert_eq!(brute_force_order(&m), want);
        }
    }

    #[test]
    fn extend_identity() {
        let m = parse_rs1(fixtures::OCT6).unwrap();
        let a = extend_from_flag(&m, 5, 5, Chirality::Preserving).unwrap();
        assert!(a.is_identity());
        assert!(extend_from_flag(&m, 4, 5, Chirality::Preserving).is_none());
        // octahedron and K4 are flag-regular
        for src in [fixtures::K4, fixtures::OCT6] {
            let m = parse_rs1(src).unwrap();
            let ok = (0..m.num_flags())
                .filter(|&d| {
                    let chi = if d % 2 == 0 {
                        Chirality::Preserving
                    } else {
                        Chirality::Reversing
                    };
                    extend_from_flag(&m, 0, d, chi).is_some()
                })
                .count();
            assert_eq!(ok, m.num_flags());
        }
    }

    #[test]
    fn rooted_groups_of_fixtures() {
        let oct = parse_rs1(fixtures::OCT6).unwrap();
        let g = rooted_group_of(&oct, Cell::Vertex(0)).unwrap();
        assert_eq!((g.order(), g.group_type), (8, GroupType::Dih(4)));
        let e = oct.edge_between(0, 2).unwrap();
        assert_eq!(
            rooted_group_of(&oct, Cell::Edge(e)).unwrap().group_type,
            GroupType::Dih(2)
        );
        assert_eq!(
            rooted_group_of(&oct, Cell::Face(0)).unwrap().group_type,
            GroupType::Dih(3)
        );
        let b = parse_rs1(fixtures::BIPYR5).unwrap();
        let g = rooted_group_of(&b, Cell::Vertex(0)).unwrap();
        assert_eq!((g.order(), g.group_type), (6, GroupType::Dih(3)));
        let g = rooted_group_of(&b, Cell::Vertex(2)).unwrap();
        assert_eq!((g.order(), g.group_type), (4, GroupType::Dih(2)));
    }

    #[test]
    fn classification_and_fixed_cells() {
        let oct = parse_rs1(fixtures::OCT6).unwrap();
        let c0 = Cell::Vertex(0);
        let g = rooted_group_of(&oct, c0).unwrap();
        for a in &g.elements {
            let cls = classify_at(&oct, a, c0).unwrap();
            match cls {
                AutClass::Identity => {
                    assert!(a.is_identity());
                    assert_eq!(fixed_cells(&oct, a).len(), 26);
                }
                AutClass::RotativeAt(_) => {
                    assert!(!a.is_reflection());
                    if a.order() == 4 {
                        assert_eq!(fixed_cells(&oct, a), vec![Cell::Vertex(0), Cell::Vertex(1)]);
                    }
                }
                AutClass::ReflectiveAt(_) => assert!(a.is_reflection()),
            }
        }
        let b = parse_rs1(fixtures::BIPYR5).unwrap();
        let g = rooted_group_of(&b, c0).unwrap();
        for a in g.reflections() {
            assert_eq!(fixed_cells(&b, a).len(), 8);
            for c in fixed_cells(&b, a) {
                assert!(matches!(
                    classify_at(&b, a, c).unwrap(),
                    AutClass::ReflectiveAt(_)
                ));
            }
        }
    }

    #[test]
    fn generator_is_minimal_clockwise_step() {
        let oct = parse_rs1(fixtures::OCT6).unwrap();
        let c0 = Cell::Vertex(0);
        let els = rooted_elements(&oct, c0);
        let g = rotation_generator(&oct, &els, c0).unwrap();
        assert_eq!(clockwise_shift(&oct, &g, c0), 2);
        assert_eq!(g.order(), 4);
        assert_eq!(cyclic_subgroups(&els).len(), 2);
        assert_eq!(dihedral_subgroups(&els).len(), 3);
    }
}
