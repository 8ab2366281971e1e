//! Skeletons of one-face maps, node openings, and the three-way split of
//! maps rooted at a skeleton edge leaving a non-intertwined node.

use std::collections::VecDeque;

use serde::Serialize;

use super::enumerate::{brute_force_l, count_labellings, for_each_unicellular};
use super::CombMap;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SkeletonInfo {
    /// Per half-edge.
    pub in_skeleton: Vec<bool>,
    /// Skeleton degree per vertex.
    pub degree: Vec<usize>,
    /// `(vertex, skeleton degree)` for every vertex of skeleton degree >= 3.
    pub nodes: Vec<(usize, usize)>,
    pub dominant: bool,
}

/// Prunes degree-one vertices until none remain.
pub fn skeleton(map: &CombMap) -> SkeletonInfo {
    let nh = map.n_half_edges();
    let nv = map.n_vertices();
    let mut alive = vec![true; nh];
    let mut degree = vec![0usize; nv];
    for h in 0..nh {
        degree[map.vertex(h)] += 1;
    }
    let rotations = if nh == 0 { vec![Vec::new()] } else { map.vertex_rotations() };
    let mut queue: VecDeque<usize> = (0..nv).filter(|&v| degree[v] == 1).collect();
    while let Some(v) = queue.pop_front() {
        if degree[v] != 1 {
            continue;
        }
        let Some(&h) = rotations[v].iter().find(|&&h| alive[h]) else {
            continue;
        };
        let a = map.alpha(h);
        alive[h] = false;
        alive[a] = false;
        degree[v] -= 1;
        let w = map.vertex(a);
        degree[w] -= 1;
        if degree[w] == 1 {
            queue.push_back(w);
        }
    }
    let nodes: Vec<(usize, usize)> = (0..nv)
        .filter(|&v| degree[v] >= 3)
        .map(|v| (v, degree[v]))
        .collect();
    let dominant = nodes.iter().all(|&(_, d)| d == 3);
    SkeletonInfo {
        in_skeleton: alive,
        degree,
        nodes,
        dominant,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum NodeKind {
    /// Opening leaves one face.
    Intertwined,
    /// Opening leaves three faces.
    NonIntertwined,
}

#[derive(Clone, Debug)]
pub struct Opening {
    pub map: CombMap,
    pub kind: NodeKind,
    pub components: usize,
    pub faces: usize,
    pub genus: u32,
    /// Vertices of the opened map that replace the node, one per skeleton edge.
    pub new_vertices: [usize; 3],
}

/// Splits the rotation at a 3-node into three vertices, each holding one
/// skeleton half-edge followed by the non-skeleton half-edges after it.
pub fn open_node(map: &CombMap, node: usize) -> Result<Opening> {
    let info = skeleton(map);
    open_with(map, &info, node)
}

fn open_with(map: &CombMap, info: &SkeletonInfo, node: usize) -> Result<Opening> {
    if node >= map.n_vertices() || info.degree[node] != 3 {
        return Err(Error::NotThreeNode(node));
    }
    let start = (0..map.n_half_edges())
        .find(|&h| map.vertex(h) == node && info.in_skeleton[h])
        .ok_or(Error::NotThreeNode(node))?;
    let mut rotation = vec![start];
    let mut h = map.sigma(start);
    while h != start {
        rotation.push(h);
        h = map.sigma(h);
    }
    let cuts: Vec<usize> = rotation
        .iter()
        .enumerate()
        .filter(|(_, &h)| info.in_skeleton[h])
        .map(|(i, _)| i)
        .collect();
    debug_assert_eq!(cuts.len(), 3);
    let mut sigma = map.sigmas().to_vec();
    let mut heads = [0usize; 3];
    for (j, &c) in cuts.iter().enumerate() {
        let end = cuts.get(j + 1).copied().unwrap_or(rotation.len());
        let seg = &rotation[c..end];
        for w in 0..seg.len() {
            sigma[seg[w]] = seg[(w + 1) % seg.len()];
        }
        heads[j] = seg[0];
    }
    let opened = map.with_sigma(sigma)?;
    let components = opened.components().1;
    let faces = opened.n_faces();
    let genus = opened.genus_sum()?;
    let g = map.genus()?;
    // With c components and three faces the additive genus is g - 3 + c.
    let kind = match faces {
        1 if components == 1 && genus + 1 == g => NodeKind::Intertwined,
        3 if genus as usize + 3 == g as usize + components => NodeKind::NonIntertwined,
        _ => {
            return Err(Error::InvalidMap(format!(
                "opening node {node} gave {faces} faces, {components} components, genus {genus}"
            )))
        }
    };
    let new_vertices = heads.map(|h| opened.vertex(h));
    Ok(Opening {
        map: opened,
        kind,
        components,
        faces,
        genus,
        new_vertices,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TrisectionReport {
    pub genus: u32,
    pub max_edges: usize,
    /// Rooted dominant maps examined.
    pub dominant_maps: u64,
    pub rooted_maps: u64,
    pub violations: u64,
}

impl TrisectionReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Every dominant one-face map of genus `g` with at most `n_max` edges has
/// `4g - 2` nodes of which exactly `2g` are intertwined.
pub fn trisection_check(n_max: usize, g: u32) -> Result<TrisectionReport> {
    let mut rep = TrisectionReport {
        genus: g,
        max_edges: n_max,
        ..Default::default()
    };
    let mut err = None;
    for n in 1..=n_max {
        for_each_unicellular(n, g, |m| {
            rep.rooted_maps += 1;
            let info = skeleton(m);
            if !info.dominant || info.nodes.is_empty() {
                return;
            }
            rep.dominant_maps += 1;
            let mut intertwined = 0;
            for &(v, _) in &info.nodes {
                match open_with(m, &info, v) {
                    Ok(o) if o.kind == NodeKind::Intertwined => intertwined += 1,
                    Ok(_) => {}
                    Err(e) => err = Some(e),
                }
            }
            if info.nodes.len() != 4 * g as usize - 2 || intertwined != 2 * g as usize {
                rep.violations += 1;
            }
        })?;
    }
    err.map_or(Ok(rep), Err)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CaseRow {
    pub edges: usize,
    /// Labelled genus-2 maps rooted at a skeleton edge leaving a
    /// non-intertwined 3-node.
    pub admissible_rooted: u64,
    /// Sum over rooted labelled maps of their number of admissible root choices.
    pub admissible_choices: u64,
    pub rerooting_holds: bool,
    pub three_components: u64,
    pub two_components: u64,
    pub one_component: u64,
    pub dominant_two_components: u64,
    pub three_components_formula: i128,
    /// Product formula with the non-isthmic rooted series.
    pub two_components_formula: i128,
    /// Product formula restricted to roots whose origin has skeleton degree 2.
    pub two_components_exact: i128,
    pub non_isthmic_formula: i128,
    pub non_isthmic_direct: i128,
    pub non_isthmic_degree_two: i128,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CaseReport {
    pub max_edges: usize,
    pub rows: Vec<CaseRow>,
    pub three_components_hold: bool,
    pub two_components_formula_holds: bool,
    pub two_components_exact_holds: bool,
    pub non_isthmic_holds: bool,
    pub rerooting_holds: bool,
    /// Smallest edge count where the product formula disagrees with the direct count.
    pub first_formula_mismatch: Option<usize>,
}

fn catalan_times_three(n: usize) -> i128 {
    let mut c: i128 = 1;
    for k in 0..n as i128 {
        c = c * 2 * (2 * k + 1) / (k + 2);
    }
    c * 3i128.pow(n as u32)
}

/// Root edge is non-isthmic; with `degree_two`, its origin also has skeleton degree 2.
fn non_isthmic_root(m: &CombMap, info: &SkeletonInfo, degree_two: bool) -> bool {
    if m.n_half_edges() == 0 || !info.in_skeleton[0] {
        return false;
    }
    if degree_two && info.degree[m.vertex(0)] != 2 {
        return false;
    }
    // connectivity without the root edge
    let nv = m.n_vertices();
    let adj = {
        let mut adj = vec![Vec::new(); nv];
        for h in 0..m.n_half_edges() {
            if h == 0 || h == m.alpha(0) {
                continue;
            }
            adj[m.vertex(h)].push(m.vertex(m.alpha(h)));
        }
        adj
    };
    super::bfs(&adj, m.vertex(0)).iter().all(|&d| d != u32::MAX)
}

fn non_isthmic_count(n: usize, g: u32, degree_two: bool) -> Result<i128> {
    let mut total = 0i128;
    for_each_unicellular(n, g, |m| {
        let info = skeleton(m);
        if non_isthmic_root(m, &info, degree_two) {
            total += count_labellings(m) as i128;
        }
    })?;
    Ok(total)
}

/// Splits labelled genus-2 one-face maps rooted at a skeleton edge leaving a
/// non-intertwined 3-node by the number of components left after opening
/// that node, and compares each part with its product formula.
pub fn verify_case_decomposition(n_max: usize) -> Result<CaseReport> {
    const GENUS: u32 = 2;
    let l0: Vec<i128> = (0..=n_max).map(catalan_times_three).collect();
    let l1: Vec<i128> = (0..=n_max)
        .map(|n| brute_force_l(n, 1).map(i128::from))
        .collect::<Result<_>>()?;
    let s_formula: Vec<i128> = (0..=n_max)
        .map(|c| {
            let conv: i128 = if c == 0 {
                0
            } else {
                (0..c).map(|a| l0[a] * l1[c - 1 - a]).sum()
            };
            l1[c] - 6 * conv
        })
        .collect();
    let s_direct: Vec<i128> = (0..=n_max)
        .map(|c| non_isthmic_count(c, 1, false))
        .collect::<Result<_>>()?;
    let s_prime: Vec<i128> = (0..=n_max)
        .map(|c| non_isthmic_count(c, 1, true))
        .collect::<Result<_>>()?;
    let triple = |n: usize, s: &[i128]| -> i128 {
        if n == 0 {
            return 0;
        }
        let mut acc = 0;
        for a in 0..n {
            for b in 0..n - a {
                let c = n - 1 - a - b;
                acc += l0[a] * l1[b] * s[c];
            }
        }
        9 * acc
    };

    let mut rows = Vec::new();
    for n in 1..=n_max {
        let mut row = CaseRow {
            edges: n,
            // positive genera g1 + g2 + g3 = 2 do not exist
            three_components_formula: 0,
            two_components_formula: triple(n, &s_formula),
            two_components_exact: triple(n, &s_prime),
            non_isthmic_formula: s_formula[n],
            non_isthmic_direct: s_direct[n],
            non_isthmic_degree_two: s_prime[n],
            ..Default::default()
        };
        let mut err = None;
        for_each_unicellular(n, GENUS, |m| {
            let info = skeleton(m);
            let mut kinds = vec![None; m.n_vertices()];
            for &(v, d) in &info.nodes {
                if d == 3 {
                    match open_with(m, &info, v) {
                        Ok(o) => kinds[v] = Some((o.kind, o.components)),
                        Err(e) => err = Some(e),
                    }
                }
            }
            let admissible = |h: usize| {
                info.in_skeleton[h]
                    && matches!(kinds[m.vertex(h)], Some((NodeKind::NonIntertwined, _)))
            };
            let labellings = count_labellings(m);
            let choices = (0..m.n_half_edges()).filter(|&h| admissible(h)).count() as u64;
            row.admissible_choices += labellings * choices;
            if !admissible(0) {
                return;
            }
            row.admissible_rooted += labellings;
            match kinds[m.vertex(0)].map(|k| k.1) {
                Some(3) => row.three_components += labellings,
                Some(2) => {
                    row.two_components += labellings;
                    if info.dominant {
                        row.dominant_two_components += labellings;
                    }
                }
                _ => row.one_component += labellings,
            }
        })?;
        if let Some(e) = err {
            return Err(e);
        }
        row.rerooting_holds = row.admissible_choices == 2 * n as u64 * row.admissible_rooted;
        rows.push(row);
    }
    let first_formula_mismatch = rows
        .iter()
        .find(|r| r.two_components as i128 != r.two_components_formula)
        .map(|r| r.edges);
    Ok(CaseReport {
        max_edges: n_max,
        three_components_hold: rows
            .iter()
            .all(|r| r.three_components as i128 == r.three_components_formula),
        two_components_formula_holds: first_formula_mismatch.is_none(),
        two_components_exact_holds: rows
            .iter()
            .all(|r| r.two_components as i128 == r.two_components_exact),
        non_isthmic_holds: rows
            .iter()
            .all(|r| r.non_isthmic_direct == r.non_isthmic_formula),
        rerooting_holds: rows.iter().all(|r| r.rerooting_holds),
        first_formula_mismatch,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::enumerate_unicellular;

    #[test]
    fn skeleton_of_tree_is_empty() {
        for m in enumerate_unicellular(4, 0).unwrap() {
            let s = skeleton(&m);
            assert!(s.in_skeleton.iter().all(|&x| !x));
            assert!(s.nodes.is_empty());
        }
    }

    #[test]
    fn double_loop_skeleton() {
        let m = CombMap::from_polygon_pairing(&[2, 3, 0, 1]).unwrap();
        let s = skeleton(&m);
        assert!(s.in_skeleton.iter().all(|&x| x));
        assert_eq!(s.nodes, vec![(0, 4)]);
        assert!(!s.dominant);
        assert_eq!(open_node(&m, 0).unwrap_err(), Error::NotThreeNode(0));
    }

    #[test]
    fn genus_one_dominant_nodes_are_intertwined() {
        let mut seen = 0;
        for m in enumerate_unicellular(3, 1).unwrap() {
            let s = skeleton(&m);
            if !s.dominant || s.nodes.is_empty() {
                continue;
            }
            seen += 1;
            assert_eq!(s.nodes.len(), 2);
            for &(v, _) in &s.nodes {
                let o = open_node(&m, v).unwrap();
                assert_eq!(o.kind, NodeKind::Intertwined);
                assert_eq!(o.components, 1);
                assert_eq!(o.map.genus().unwrap(), 0);
                assert_eq!(o.map.n_vertices(), m.n_vertices() + 2);
            }
        }
        assert!(seen > 0);
    }

    #[test]
    fn trisection_small() {
        let r1 = trisection_check(5, 1).unwrap();
        assert!(r1.passed(), "{r1:?}");
        assert!(r1.dominant_maps > 0);
        // six trivalent nodes need nine skeleton edges
        let r2 = trisection_check(6, 2).unwrap();
        assert!(r2.passed());
        assert_eq!(r2.dominant_maps, 0);
    }

    #[test]
    fn non_isthmic_roots_of_the_double_loop() {
        // both edges of the interleaved double loop lie on cycles
        assert_eq!(non_isthmic_count(2, 1, false).unwrap(), 1);
        // its single vertex has skeleton degree 4
        assert_eq!(non_isthmic_count(2, 1, true).unwrap(), 0);
    }

    #[test]
    fn case_split_small() {
        let r = verify_case_decomposition(5).unwrap();
        assert!(r.three_components_hold);
        assert!(r.non_isthmic_holds);
        assert!(r.rerooting_holds);
        assert!(r.two_components_exact_holds, "{:?}", r.rows);
    }
}
