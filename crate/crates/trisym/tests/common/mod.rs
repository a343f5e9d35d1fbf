//! Oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use trisym::core_map::{Cell, PlanarMap};
use trisym::fykenet::{FykeAnalysis, LevelKind};

pub type Edge = (usize, usize);

pub fn ek(a: usize, b: usize) -> Edge {
    (a.min(b), a.max(b))
}

/// Every edge on some simple path from `from` to `to`.
fn path_edges(adj: &BTreeMap<usize, Vec<usize>>, from: usize, to: usize) -> BTreeSet<Edge> {
    fn dfs(
        adj: &BTreeMap<usize, Vec<usize>>,
        x: usize,
        to: usize,
        path: &mut Vec<usize>,
        out: &mut BTreeSet<Edge>,
    ) {
        if x == to {
            out.extend(path.windows(2).map(|w| ek(w[0], w[1])));
            return;
        }
        for &y in adj.get(&x).map(|v| v.as_slice()).unwrap_or(&[]) {
            if !path.contains(&y) {
                path.push(y);
                dfs(adj, y, to, path, out);
                path.pop();
            }
        }
    }
    let mut out = BTreeSet::new();
    dfs(adj, from, to, &mut vec![from], &mut out);
    out
}

/// Liaisons, centres, and branch edges between targets and bases, plus the
/// edges at the poles.
pub fn predicted_net_edges(map: &PlanarMap, an: &FykeAnalysis) -> BTreeSet<Edge> {
    let mut out: BTreeSet<Edge> = an.liaisons.edges().into_iter().map(|(_, e)| e).collect();
    for l in &an.levels {
        out.extend(l.centre_edges.iter().copied());
    }
    for i in 1..an.levels.len() {
        let l = &an.levels[i];
        for &w in &an.liaisons.targets[i - 1] {
            let u = l.base_of[&w];
            let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for &(a, b) in &l.edges {
                if l.base_of[&a] == u && l.base_of[&b] == u && !l.centre_edges.contains(&ek(a, b)) {
                    adj.entry(a).or_default().push(b);
                    adj.entry(b).or_default().push(a);
                }
            }
            out.extend(path_edges(&adj, w, u));
        }
    }
    let pole_edges = |c: Cell| -> Vec<Edge> {
        map.cell_edges(c)
            .into_iter()
            .map(|e| {
                let (a, b) = map.edge_ends(e);
                ek(a, b)
            })
            .collect()
    };
    let c0 = an.rotation.c0;
    if let Cell::Vertex(v) = c0 {
        out.extend(map.rotation(v).iter().map(|&y| ek(v, y)));
    }
    out.extend(pole_edges(c0));
    if an.levels.last().unwrap().kind == LevelKind::PseudoAntarctic {
        out.extend(pole_edges(an.rotation.c1));
    }
    out
}
