//! Combinatorial maps as rotation systems on half-edges.
//!
//! `alpha` pairs the two half-edges of an edge and `sigma` turns
//! counterclockwise around a vertex. Faces are the orbits of
//! `phi = sigma . alpha`. A corner is identified with the half-edge that
//! follows it counterclockwise: `corner(h)` sits at the origin of `h`, between
//! `sigma^-1(h)` and `h`, so the corners of a face come in `phi`-orbit order.

mod enumerate;
mod skeleton;
mod tutte;

pub use enumerate::{
    brute_force_a, brute_force_l, count_labellings, enumerate_rooted_maps,
    enumerate_rooted_maps_bounded, enumerate_unicellular, enumerate_unicellular_bounded,
    distinct_rooted_codes, for_each_labelling, for_each_pairing, for_each_two_face, for_each_unicellular,
    unicellular_genus_counts, EpsFilter, RootedMapCounts, TwoFaceCounts, ROOTED_MAX_EDGES,
    UNICELLULAR_MAX_EDGES,
};
pub use skeleton::{
    open_node, skeleton, trisection_check, verify_case_decomposition, CaseReport, CaseRow,
    NodeKind, Opening, SkeletonInfo, TrisectionReport,
};
pub use tutte::{verify_tutte_equation, TutteReport, TutteRow};

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CombMap {
    alpha: Vec<usize>,
    sigma: Vec<usize>,
    sigma_inv: Vec<usize>,
    root: Option<usize>,
    vertex_of: Vec<usize>,
    n_vertices: usize,
    face_of: Vec<usize>,
    n_faces: usize,
}

fn orbits(n: usize, step: impl Fn(usize) -> usize) -> (Vec<usize>, usize) {
    let mut id = vec![usize::MAX; n];
    let mut count = 0;
    for start in 0..n {
        if id[start] != usize::MAX {
            continue;
        }
        let mut h = start;
        while id[h] == usize::MAX {
            id[h] = count;
            h = step(h);
        }
        count += 1;
    }
    (id, count)
}

impl CombMap {
    /// Builds a map, checking that `alpha` is a fixed-point-free involution
    /// and `sigma` a permutation. Connectivity is not required.
    pub fn new(alpha: Vec<usize>, sigma: Vec<usize>, root: Option<usize>) -> Result<Self> {
        let n = alpha.len();
        if sigma.len() != n {
            return Err(Error::InvalidMap("alpha and sigma differ in length".into()));
        }
        if !n.is_multiple_of(2) {
            return Err(Error::InvalidMap("odd number of half-edges".into()));
        }
        for (h, &a) in alpha.iter().enumerate() {
            if a >= n || a == h || alpha[a] != h {
                return Err(Error::InvalidMap(format!("alpha is not an involution at {h}")));
            }
        }
        let mut sigma_inv = vec![usize::MAX; n];
        for (h, &s) in sigma.iter().enumerate() {
            if s >= n || sigma_inv[s] != usize::MAX {
                return Err(Error::InvalidMap(format!("sigma is not a permutation at {h}")));
            }
            sigma_inv[s] = h;
        }
        if let Some(r) = root {
            if r >= n {
                return Err(Error::InvalidMap(format!("root {r} out of range")));
            }
        }
        Ok(Self::assemble(alpha, sigma, sigma_inv, root))
    }

    fn assemble(
        alpha: Vec<usize>,
        sigma: Vec<usize>,
        sigma_inv: Vec<usize>,
        root: Option<usize>,
    ) -> Self {
        let n = alpha.len();
        let (vertex_of, n_vertices) = orbits(n, |h| sigma[h]);
        let (face_of, n_faces) = orbits(n, |h| sigma[alpha[h]]);
        let (n_vertices, n_faces) = if n == 0 { (1, 1) } else { (n_vertices, n_faces) };
        CombMap {
            alpha,
            sigma,
            sigma_inv,
            root,
            vertex_of,
            n_vertices,
            face_of,
            n_faces,
        }
    }

    /// The map with one vertex and no edges.
    pub fn vertex_map() -> Self {
        Self::assemble(Vec::new(), Vec::new(), Vec::new(), None)
    }

    /// One-face map obtained by gluing the sides of a `2n`-gon, rooted at side 0.
    /// `pairing[h]` is the side glued to side `h`.
    pub fn from_polygon_pairing(pairing: &[usize]) -> Result<Self> {
        let n = pairing.len();
        let sigma = (0..n).map(|h| (pairing[h] + 1) % n).collect();
        Self::new(pairing.to_vec(), sigma, if n > 0 { Some(0) } else { None })
    }

    /// Map whose faces are the polygons with the given side counts, glued by
    /// `pairing`. Sides are numbered polygon by polygon; root is side 0.
    pub fn from_polygons(degrees: &[usize], pairing: &[usize]) -> Result<Self> {
        let n = pairing.len();
        if degrees.iter().sum::<usize>() != n {
            return Err(Error::InvalidMap("polygon degrees do not match pairing".into()));
        }
        let mut next = vec![0; n];
        let mut start = 0;
        for &d in degrees {
            for i in 0..d {
                next[start + i] = start + (i + 1) % d;
            }
            start += d;
        }
        if pairing.iter().any(|&p| p >= n) {
            return Err(Error::InvalidMap("pairing out of range".into()));
        }
        let sigma = (0..n).map(|h| next[pairing[h]]).collect();
        Self::new(pairing.to_vec(), sigma, if n > 0 { Some(0) } else { None })
    }

    pub fn n_half_edges(&self) -> usize {
        self.alpha.len()
    }

    pub fn n_edges(&self) -> usize {
        self.alpha.len() / 2
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_faces(&self) -> usize {
        self.n_faces
    }

    pub fn root(&self) -> Option<usize> {
        self.root
    }

    pub fn with_root(mut self, root: Option<usize>) -> Self {
        self.root = root;
        self
    }

    #[inline]
    pub fn alpha(&self, h: usize) -> usize {
        self.alpha[h]
    }

    #[inline]
    pub fn sigma(&self, h: usize) -> usize {
        self.sigma[h]
    }

    #[inline]
    pub fn sigma_inv(&self, h: usize) -> usize {
        self.sigma_inv[h]
    }

    #[inline]
    pub fn phi(&self, h: usize) -> usize {
        self.sigma[self.alpha[h]]
    }

    #[inline]
    pub fn vertex(&self, h: usize) -> usize {
        self.vertex_of[h]
    }

    #[inline]
    pub fn face(&self, h: usize) -> usize {
        self.face_of[h]
    }

    pub fn alphas(&self) -> &[usize] {
        &self.alpha
    }

    pub fn sigmas(&self) -> &[usize] {
        &self.sigma
    }

    /// Half-edges of each vertex in counterclockwise order.
    pub fn vertex_rotations(&self) -> Vec<Vec<usize>> {
        self.cycles(self.n_vertices, &self.vertex_of, |h| self.sigma[h])
    }

    /// Corners of each face in contour order.
    pub fn face_contours(&self) -> Vec<Vec<usize>> {
        self.cycles(self.n_faces, &self.face_of, |h| self.phi(h))
    }

    fn cycles(&self, count: usize, id: &[usize], step: impl Fn(usize) -> usize) -> Vec<Vec<usize>> {
        if self.alpha.is_empty() {
            return vec![Vec::new()];
        }
        let mut out = vec![Vec::new(); count];
        let mut seen = vec![false; self.alpha.len()];
        for start in 0..self.alpha.len() {
            if seen[start] {
                continue;
            }
            let c = &mut out[id[start]];
            let mut h = start;
            while !seen[h] {
                seen[h] = true;
                c.push(h);
                h = step(h);
            }
        }
        out
    }

    /// Contour of the face containing `h`, starting at `h`.
    pub fn contour_from(&self, h: usize) -> Vec<usize> {
        let mut out = vec![h];
        let mut x = self.phi(h);
        while x != h {
            out.push(x);
            x = self.phi(x);
        }
        out
    }

    pub fn vertex_degree(&self, v: usize) -> usize {
        self.vertex_of.iter().filter(|&&x| x == v).count()
    }

    /// Component index of every half-edge, and the number of components.
    pub fn components(&self) -> (Vec<usize>, usize) {
        let n = self.alpha.len();
        let mut comp = vec![usize::MAX; n];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = count;
            queue.push_back(s);
            while let Some(h) = queue.pop_front() {
                for x in [self.alpha[h], self.sigma[h]] {
                    if comp[x] == usize::MAX {
                        comp[x] = count;
                        queue.push_back(x);
                    }
                }
            }
            count += 1;
        }
        (comp, count.max(1))
    }

    pub fn is_connected(&self) -> bool {
        self.components().1 == 1
    }

    /// Euler genus `(2 - V + E - F) / 2` of a connected map.
    pub fn genus(&self) -> Result<u32> {
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        self.genus_sum()
    }

    /// Sum of the genera of the connected components.
    pub fn genus_sum(&self) -> Result<u32> {
        let c = self.components().1 as i64;
        let chi = self.n_vertices as i64 - self.n_edges() as i64 + self.n_faces as i64;
        let twice = 2 * c - chi;
        if twice < 0 || twice % 2 != 0 {
            return Err(Error::InvalidMap(format!("Euler characteristic {chi} for {c} components")));
        }
        Ok((twice / 2) as u32)
    }

    /// Relabels the half-edges reachable from `root` in breadth-first order
    /// and lists `(sigma, alpha)` of each. Equal codes mean isomorphic rooted maps.
    pub fn canonical_code(&self, root: usize) -> Vec<u32> {
        let (order, label) = self.canonical_order(root);
        let mut code = Vec::with_capacity(2 * order.len());
        for &h in &order {
            code.push(label[self.sigma[h]]);
            code.push(label[self.alpha[h]]);
        }
        code
    }

    /// Breadth-first order from `root` and the inverse numbering.
    pub fn canonical_order(&self, root: usize) -> (Vec<usize>, Vec<u32>) {
        let n = self.alpha.len();
        let mut label = vec![u32::MAX; n];
        let mut order = Vec::with_capacity(n);
        label[root] = 0;
        order.push(root);
        let mut i = 0;
        while i < order.len() {
            let h = order[i];
            for x in [self.sigma[h], self.alpha[h]] {
                if label[x] == u32::MAX {
                    label[x] = order.len() as u32;
                    order.push(x);
                }
            }
            i += 1;
        }
        (order, label)
    }

    /// Copy with the rotation replaced; vertex and face data are recomputed.
    pub fn with_sigma(&self, sigma: Vec<usize>) -> Result<Self> {
        CombMap::new(self.alpha.clone(), sigma, self.root)
    }

    /// Neighbouring vertex lists, one entry per half-edge.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_vertices];
        for h in 0..self.alpha.len() {
            adj[self.vertex_of[h]].push(self.vertex_of[self.alpha[h]]);
        }
        adj
    }

    /// Graph distances from `source`; `u32::MAX` where unreachable.
    pub fn distances_from(&self, source: usize) -> Vec<u32> {
        let adj = self.adjacency();
        bfs(&adj, source)
    }
}

pub(crate) fn bfs(adj: &[Vec<usize>], source: usize) -> Vec<u32> {
    let mut dist = vec![u32::MAX; adj.len()];
    let mut queue = VecDeque::new();
    dist[source] = 0;
    queue.push_back(source);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if dist[w] == u32::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// A map with integer vertex labels changing by at most one along each edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelledMap {
    pub map: CombMap,
    pub labels: Vec<i64>,
}

impl LabelledMap {
    pub fn new(map: CombMap, labels: Vec<i64>) -> Result<Self> {
        if labels.len() != map.n_vertices() {
            return Err(Error::InvalidLabels(format!(
                "{} labels for {} vertices",
                labels.len(),
                map.n_vertices()
            )));
        }
        for h in 0..map.n_half_edges() {
            let d = labels[map.vertex(h)] - labels[map.vertex(map.alpha(h))];
            if d.abs() > 1 {
                return Err(Error::InvalidLabels(format!("increment {d} on half-edge {h}")));
            }
        }
        Ok(LabelledMap { map, labels })
    }

    /// Label at the corner of `h`.
    pub fn corner_label(&self, h: usize) -> i64 {
        self.labels[self.map.vertex(h)]
    }

    /// Translates labels so that the root vertex (or vertex 0) carries 0.
    pub fn normalized(mut self) -> Self {
        let base = match self.map.root() {
            Some(r) => self.labels[self.map.vertex(r)],
            None => self.labels.first().copied().unwrap_or(0),
        };
        for l in &mut self.labels {
            *l -= base;
        }
        self
    }

    /// Labels read off half-edge origins, a representation independent of
    /// vertex numbering.
    pub fn side_labels(&self) -> Vec<i64> {
        (0..self.map.n_half_edges()).map(|h| self.corner_label(h)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MapSummary {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub genus: u32,
}

impl CombMap {
    pub fn summary(&self) -> Result<MapSummary> {
        Ok(MapSummary {
            vertices: self.n_vertices,
            edges: self.n_edges(),
            faces: self.n_faces,
            genus: self.genus()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge() {
        let m = CombMap::from_polygon_pairing(&[1, 0]).unwrap();
        assert_eq!((m.n_vertices(), m.n_faces()), (2, 1));
        assert_eq!(m.genus().unwrap(), 0);
    }

    #[test]
    fn crossed_double_loop_has_genus_one() {
        let m = CombMap::from_polygon_pairing(&[2, 3, 0, 1]).unwrap();
        assert_eq!((m.n_vertices(), m.n_edges(), m.n_faces()), (1, 2, 1));
        assert_eq!(m.genus().unwrap(), 1);
    }

    #[test]
    fn path_of_two_edges() {
        // a b b a
        let m = CombMap::from_polygon_pairing(&[3, 2, 1, 0]).unwrap();
        assert_eq!((m.n_vertices(), m.n_faces()), (3, 1));
        assert_eq!(m.genus().unwrap(), 0);
    }

    #[test]
    fn vertex_map_is_a_sphere() {
        let m = CombMap::vertex_map();
        assert_eq!((m.n_vertices(), m.n_edges(), m.n_faces()), (1, 0, 1));
        assert_eq!(m.genus().unwrap(), 0);
    }

    #[test]
    fn disconnected_genus_is_an_error() {
        let m = CombMap::new(vec![1, 0, 3, 2], vec![0, 1, 2, 3], None).unwrap();
        assert_eq!(m.genus(), Err(Error::Disconnected));
        assert_eq!(m.genus_sum().unwrap(), 0);
    }

    #[test]
    fn rejects_bad_permutations() {
        assert!(CombMap::new(vec![0, 1], vec![0, 1], None).is_err());
        assert!(CombMap::new(vec![1, 0], vec![0, 0], None).is_err());
    }

    #[test]
    fn loop_has_two_faces() {
        let m = CombMap::from_polygons(&[1, 1], &[1, 0]).unwrap();
        assert_eq!((m.n_vertices(), m.n_faces()), (1, 2));
        assert_eq!(m.genus().unwrap(), 0);
    }

    #[test]
    fn canonical_code_ignores_relabelling() {
        let a = CombMap::from_polygon_pairing(&[5, 2, 1, 4, 3, 0]).unwrap();
        // conjugate by a permutation of half-edges
        let p = [3, 0, 5, 1, 2, 4];
        let n = 6;
        let mut alpha = vec![0; n];
        let mut sigma = vec![0; n];
        for h in 0..n {
            alpha[p[h]] = p[a.alpha(h)];
            sigma[p[h]] = p[a.sigma(h)];
        }
        let b = CombMap::new(alpha, sigma, Some(p[0])).unwrap();
        assert_eq!(a.canonical_code(0), b.canonical_code(p[0]));
        assert_ne!(a.canonical_code(0), a.canonical_code(1));
    }

    #[test]
    fn labels_are_validated() {
        let m = CombMap::from_polygon_pairing(&[1, 0]).unwrap();
        assert!(LabelledMap::new(m.clone(), vec![0, 1]).is_ok());
        assert!(LabelledMap::new(m, vec![0, 2]).is_err());
    }
}
