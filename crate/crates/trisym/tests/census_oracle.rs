//! Census against an independent brute-force search over rotation systems.

use std::collections::BTreeSet;
use std::time::Instant;

use trisym::census::{counts_per_v, generate_with, Schedule};
use trisym::core_map::build_map;

/// Rotation tables up to vertex relabelling and mirroring, minimised over all
/// permutations of the vertex set.
fn normal_form(rot: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = rot.len();
    let mut best: Option<Vec<Vec<usize>>> = None;
    let mut perm: Vec<usize> = (0..n).collect();
    permute(0, &mut perm, &mut |p| {
        for rev in [false, true] {
            let mut table = vec![Vec::new(); n];
            for v in 0..n {
                let mut r: Vec<usize> = rot[v].iter().map(|&u| p[u]).collect();
                if rev {
                    r.reverse();
                }
                let s = (0..r.len()).min_by_key(|&i| r[i]).unwrap();
                r.rotate_left(s);
                table[p[v]] = r;
            }
            if best.as_ref().map_or(true, |b| table < *b) {
                best = Some(table);
            }
        }
    });
    best.unwrap()
}

fn permute(k: usize, perm: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if k == perm.len() {
        f(perm);
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        permute(k + 1, perm, f);
        perm.swap(k, i);
    }
}

/// Cyclic orders of `nbrs` in which consecutive entries are adjacent, with
/// the first entry fixed.
fn link_cycles(nbrs: &[usize], adj: &[Vec<bool>]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![nbrs[0]];
    let mut used = vec![false; nbrs.len()];
    used[0] = true;
    fn rec(
        nbrs: &[usize],
        adj: &[Vec<bool>],
        cur: &mut Vec<usize>,
        used: &mut [bool],
        out: &mut Vec<Vec<usize>>,
    ) {
        if cur.len() == nbrs.len() {
            if adj[*cur.last().unwrap()][cur[0]] {
                out.push(cur.clone());
            }
            return;
        }
        for i in 0..nbrs.len() {
            if !used[i] && adj[*cur.last().unwrap()][nbrs[i]] {
                used[i] = true;
                cur.push(nbrs[i]);
                rec(nbrs, adj, cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    rec(nbrs, adj, &mut cur, &mut used, &mut out);
    out
}

/// All triangulations on `n` vertices found by choosing `3n-6` edges and a
/// link cycle at every vertex.
fn brute_force(n: usize) -> usize {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    let want = 3 * n - 6;
    let mut found: BTreeSet<Vec<Vec<usize>>> = BTreeSet::new();
    let np = pairs.len();
    for mask in 0u32..(1 << np) {
        if mask.count_ones() as usize != want {
            continue;
        }
        let mut adj = vec![vec![false; n]; n];
        for (i, &(a, b)) in pairs.iter().enumerate() {
            if mask >> i & 1 == 1 {
                adj[a][b] = true;
                adj[b][a] = true;
            }
        }
        let nbrs: Vec<Vec<usize>> = (0..n)
            .map(|v| (0..n).filter(|&u| adj[v][u]).collect())
            .collect();
        if nbrs.iter().any(|l| l.len() < 3) {
            continue;
        }
        let options: Vec<Vec<Vec<usize>>> = nbrs.iter().map(|l| link_cycles(l, &adj)).collect();
        if options.iter().any(|o| o.is_empty()) {
            continue;
        }
        let mut idx = vec![0; n];
        loop {
            let rot: Vec<Vec<usize>> = (0..n).map(|v| options[v][idx[v]].clone()).collect();
            if let Ok(m) = build_map(rot.clone()) {
                if (0..m.num_faces()).all(|f| m.face_len(f) == 3) {
                    found.insert(normal_form(&rot));
                }
            }
            let mut v = 0;
            while v < n {
                idx[v] += 1;
                if idx[v] < options[v].len() {
                    break;
                }
                idx[v] = 0;
                v += 1;
            }
            if v == n {
                break;
            }
        }
    }
    found.len()
}

#[test]
fn census_matches_brute_force_at_five_and_six() {
    let t = Instant::now();
    let c = counts_per_v(&generate_with(6, Schedule::Sequential).unwrap());
    assert_eq!(brute_force(5), c[&5]);
    assert_eq!(brute_force(6), c[&6]);
    assert_eq!((c[&5], c[&6]), (1, 2));
    eprintln!("brute force oracle took {:?}", t.elapsed());
}
