//! Exhaustive enumeration of small maps.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::Serialize;

use super::CombMap;
use crate::error::{Error, Result};

pub const UNICELLULAR_MAX_EDGES: usize = 9;
pub const ROOTED_MAX_EDGES: usize = 4;
pub const TWO_FACE_MAX_EDGES: usize = 6;

fn check_bound(what: &'static str, value: usize, bound: usize) -> Result<()> {
    if value > bound {
        return Err(Error::BoundExceeded { what, value, bound });
    }
    Ok(())
}

/// Calls `f` on every fixed-point-free involution of `0..n_sides`.
pub fn for_each_pairing(n_sides: usize, mut f: impl FnMut(&[usize])) {
    fn rec(p: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        let Some(i) = p.iter().position(|&x| x == usize::MAX) else {
            f(p);
            return;
        };
        for j in i + 1..p.len() {
            if p[j] != usize::MAX {
                continue;
            }
            p[i] = j;
            p[j] = i;
            rec(p, f);
            p[i] = usize::MAX;
            p[j] = usize::MAX;
        }
    }
    if !n_sides.is_multiple_of(2) {
        return;
    }
    let mut p = vec![usize::MAX; n_sides];
    rec(&mut p, &mut f);
}

/// Vertex count of the one-face map glued from a polygon pairing.
fn polygon_vertices(p: &[usize]) -> usize {
    let n = p.len();
    if n == 0 {
        return 1;
    }
    debug_assert!(n <= 64);
    let mut seen: u64 = 0;
    let mut count = 0;
    for s in 0..n {
        if seen >> s & 1 == 1 {
            continue;
        }
        count += 1;
        let mut h = s;
        while seen >> h & 1 == 0 {
            seen |= 1 << h;
            h = p[h] + 1;
            if h == n {
                h = 0;
            }
        }
    }
    count
}

/// Number of rooted one-face maps with `n` edges, indexed by genus.
pub fn unicellular_genus_counts(n: usize) -> Result<Vec<u64>> {
    unicellular_genus_counts_bounded(n, UNICELLULAR_MAX_EDGES)
}

pub fn unicellular_genus_counts_bounded(n: usize, bound: usize) -> Result<Vec<u64>> {
    check_bound("unicellular edges", n, bound.min(32))?;
    let mut counts = vec![0u64; n / 2 + 1];
    for_each_pairing(2 * n, |p| {
        let v = polygon_vertices(p);
        counts[(n + 1 - v) / 2] += 1;
    });
    Ok(counts)
}

/// Visits every rooted one-face map of genus `g` with `n` edges.
pub fn for_each_unicellular(n: usize, g: u32, mut f: impl FnMut(&CombMap)) -> Result<()> {
    check_bound("unicellular edges", n, UNICELLULAR_MAX_EDGES)?;
    if n == 0 {
        if g == 0 {
            f(&CombMap::vertex_map());
        }
        return Ok(());
    }
    if 2 * g as usize > n {
        return Ok(());
    }
    let target = n + 1 - 2 * g as usize;
    let mut err = None;
    for_each_pairing(2 * n, |p| {
        if err.is_some() || polygon_vertices(p) != target {
            return;
        }
        match CombMap::from_polygon_pairing(p) {
            Ok(m) => f(&m),
            Err(e) => err = Some(e),
        }
    });
    err.map_or(Ok(()), Err)
}

pub fn enumerate_unicellular(n: usize, g: u32) -> Result<Vec<CombMap>> {
    enumerate_unicellular_bounded(n, g, UNICELLULAR_MAX_EDGES)
}

pub fn enumerate_unicellular_bounded(n: usize, g: u32, bound: usize) -> Result<Vec<CombMap>> {
    check_bound("unicellular edges", n, bound)?;
    let mut out = Vec::new();
    for_each_unicellular(n, g, |m| out.push(m.clone()))?;
    Ok(out)
}

/// Visits every label function with root vertex labelled 0, as a slice
/// indexed by vertex. Labels of the root vertex come from `map.root()` or
/// half-edge 0.
pub fn for_each_labelling(map: &CombMap, mut f: impl FnMut(&[i64])) {
    let n_v = map.n_vertices();
    if map.n_half_edges() == 0 {
        f(&[0]);
        return;
    }
    let adj = map.adjacency();
    let root = map.vertex(map.root().unwrap_or(0));
    let mut pos = vec![usize::MAX; n_v];
    let mut order = vec![root];
    let mut parent = vec![usize::MAX; n_v];
    pos[root] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if pos[w] == usize::MAX {
                pos[w] = order.len();
                parent[w] = v;
                order.push(w);
                queue.push_back(w);
            }
        }
    }
    // earlier neighbours of each vertex besides the parent
    let checks: Vec<Vec<usize>> = order
        .iter()
        .map(|&v| {
            let mut c: Vec<usize> = adj[v]
                .iter()
                .copied()
                .filter(|&w| pos[w] < pos[v] && w != parent[v])
                .collect();
            c.sort_unstable();
            c.dedup();
            c
        })
        .collect();

    fn rec(
        i: usize,
        order: &[usize],
        parent: &[usize],
        checks: &[Vec<usize>],
        labels: &mut [i64],
        f: &mut dyn FnMut(&[i64]),
    ) {
        if i == order.len() {
            f(labels);
            return;
        }
        let v = order[i];
        let base = labels[parent[v]];
        for d in -1..=1 {
            let l = base + d;
            if checks[i].iter().all(|&w| (labels[w] - l).abs() <= 1) {
                labels[v] = l;
                rec(i + 1, order, parent, checks, labels, f);
            }
        }
    }

    let mut labels = vec![0i64; n_v];
    if order.len() != n_v {
        return;
    }
    rec(1, &order, &parent, &checks, &mut labels, &mut f);
}

pub fn count_labellings(map: &CombMap) -> u64 {
    let mut c = 0;
    for_each_labelling(map, |_| c += 1);
    c
}

/// `[z^n] L_g`: labelled rooted one-face maps.
pub fn brute_force_l(n: usize, g: u32) -> Result<u64> {
    let mut total = 0;
    for_each_unicellular(n, g, |m| total += count_labellings(m))?;
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RootedMapCounts {
    pub edges: usize,
    pub by_genus: Vec<u64>,
}

impl RootedMapCounts {
    pub fn get(&self, g: u32) -> u64 {
        self.by_genus.get(g as usize).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.by_genus.iter().sum()
    }
}

pub fn enumerate_rooted_maps(n: usize) -> Result<RootedMapCounts> {
    enumerate_rooted_maps_bounded(n, ROOTED_MAX_EDGES)
}

/// Counts rooted maps with `n` edges by genus. The edge pairing is fixed to
/// `(2i, 2i+1)` and every rotation is tried; rooted maps are deduplicated by
/// canonical code from half-edge 0.
pub fn enumerate_rooted_maps_bounded(n: usize, bound: usize) -> Result<RootedMapCounts> {
    check_bound("rooted map edges", n, bound.min(6))?;
    if n == 0 {
        return Ok(RootedMapCounts { edges: 0, by_genus: vec![1] });
    }
    let m = 2 * n;
    let alpha: Vec<usize> = (0..m).map(|h| h ^ 1).collect();
    let mut seen: Vec<HashSet<Vec<u32>>> = vec![HashSet::new(); n / 2 + 1];
    let mut sigma: Vec<usize> = (0..m).collect();
    let mut visit = |sigma: &[usize]| {
        if !transitive(&alpha, sigma) {
            return;
        }
        let v = cycle_count(m, |h| sigma[h]);
        let f = cycle_count(m, |h| sigma[alpha[h]]);
        let g = (2 + n - v - f) / 2;
        seen[g].insert(raw_code(&alpha, sigma));
    };
    // Heap's algorithm
    let mut c = vec![0usize; m];
    visit(&sigma);
    let mut i = 1;
    while i < m {
        if c[i] < i {
            if i % 2 == 0 {
                sigma.swap(0, i);
            } else {
                sigma.swap(c[i], i);
            }
            visit(&sigma);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(RootedMapCounts {
        edges: n,
        by_genus: seen.iter().map(|s| s.len() as u64).collect(),
    })
}

fn transitive(alpha: &[usize], sigma: &[usize]) -> bool {
    let m = alpha.len();
    let mut seen: u64 = 1;
    let mut stack = vec![0usize];
    while let Some(h) = stack.pop() {
        for x in [alpha[h], sigma[h]] {
            if seen >> x & 1 == 0 {
                seen |= 1 << x;
                stack.push(x);
            }
        }
    }
    seen.count_ones() as usize == m
}

fn cycle_count(m: usize, step: impl Fn(usize) -> usize) -> usize {
    let mut seen: u64 = 0;
    let mut count = 0;
    for s in 0..m {
        if seen >> s & 1 == 1 {
            continue;
        }
        count += 1;
        let mut h = s;
        while seen >> h & 1 == 0 {
            seen |= 1 << h;
            h = step(h);
        }
    }
    count
}

fn raw_code(alpha: &[usize], sigma: &[usize]) -> Vec<u32> {
    let m = alpha.len();
    let mut label = vec![u32::MAX; m];
    let mut order = Vec::with_capacity(m);
    label[0] = 0;
    order.push(0);
    let mut i = 0;
    while i < order.len() {
        let h = order[i];
        for x in [sigma[h], alpha[h]] {
            if label[x] == u32::MAX {
                label[x] = order.len() as u32;
                order.push(x);
            }
        }
        i += 1;
    }
    order
        .iter()
        .flat_map(|&h| [label[sigma[h]], label[alpha[h]]])
        .collect()
}

/// Which label differences `l(c2) - l(c1)` to count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EpsFilter {
    Minus,
    Zero,
    Plus,
    All,
}

impl EpsFilter {
    pub fn from_value(eps: i64) -> Option<Self> {
        match eps {
            -1 => Some(EpsFilter::Minus),
            0 => Some(EpsFilter::Zero),
            1 => Some(EpsFilter::Plus),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TwoFaceCounts {
    pub minus: u64,
    pub zero: u64,
    pub plus: u64,
}

impl TwoFaceCounts {
    pub fn get(&self, which: EpsFilter) -> u64 {
        match which {
            EpsFilter::Minus => self.minus,
            EpsFilter::Zero => self.zero,
            EpsFilter::Plus => self.plus,
            EpsFilter::All => self.minus + self.zero + self.plus,
        }
    }

    fn bump(&mut self, eps: i64) {
        match eps {
            -1 => self.minus += 1,
            0 => self.zero += 1,
            1 => self.plus += 1,
            _ => {}
        }
    }
}

/// Visits every connected two-face map of genus `g` with `n` edges, with
/// numbered faces and a marked corner in each. The map's faces are the
/// polygons `0..d1` and `d1..2n`; the marked corners are sides `0` and `d1`.
pub fn for_each_two_face(
    n: usize,
    g: u32,
    mut f: impl FnMut(&CombMap, usize),
) -> Result<()> {
    check_bound("two-face edges", n, TWO_FACE_MAX_EDGES)?;
    if n == 0 || 2 * g as usize > n {
        return Ok(());
    }
    let target_v = n - 2 * g as usize;
    let mut err = None;
    for d1 in 1..2 * n {
        for_each_pairing(2 * n, |p| {
            if err.is_some() {
                return;
            }
            match CombMap::from_polygons(&[d1, 2 * n - d1], p) {
                Ok(m) => {
                    if m.n_vertices() == target_v && m.is_connected() {
                        f(&m, d1);
                    }
                }
                Err(e) => err = Some(e),
            }
        });
    }
    err.map_or(Ok(()), Err)
}

/// `[z^n] A_g^eps` for every `eps` at once.
pub fn brute_force_a(n: usize, g: u32) -> Result<TwoFaceCounts> {
    let mut counts = TwoFaceCounts::default();
    for_each_two_face(n, g, |m, d1| {
        for_each_labelling(m, |lab| {
            counts.bump(lab[m.vertex(d1)] - lab[m.vertex(0)]);
        });
    })?;
    Ok(counts)
}

/// Number of pairings grouped by canonical code, used to confirm that
/// polygon gluings rooted at side 0 are pairwise non-isomorphic.
pub fn distinct_rooted_codes(maps: &[CombMap]) -> usize {
    let mut seen: HashMap<Vec<u32>, usize> = HashMap::new();
    for m in maps {
        *seen.entry(m.canonical_code(0)).or_default() += 1;
    }
    seen.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn double_factorial_odd(n: usize) -> u64 {
        (1..=n as u64).map(|k| 2 * k - 1).product()
    }

    fn catalan(n: u64) -> u64 {
        let mut c = 1u64;
        for k in 0..n {
            c = c * 2 * (2 * k + 1) / (k + 2);
        }
        c
    }

    /// Genus-refined gluing counts from the three-term recurrence
    /// `(n+1) e_g(n) = 2(2n-1) e_g(n-1) + (n-1)(2n-1)(2n-3) e_{g-1}(n-2)`.
    fn gluing_table(n_max: usize) -> Vec<Vec<u64>> {
        let mut e = vec![vec![0u64; n_max / 2 + 2]; n_max + 1];
        e[0][0] = 1;
        for n in 1..=n_max {
            for g in 0..=n / 2 {
                let mut acc = 2 * (2 * n as u64 - 1) * e[n - 1][g];
                if g > 0 && n >= 2 {
                    acc += (n as u64 - 1)
                        * (2 * n as u64 - 1)
                        * (2 * n as u64).saturating_sub(3)
                        * e[n - 2][g - 1];
                }
                e[n][g] = acc / (n as u64 + 1);
            }
        }
        e
    }

    #[test]
    fn recurrence_reproduces_known_values() {
        let e = gluing_table(6);
        assert_eq!(e[3][1], 10);
        assert_eq!(e[4][2], 21);
        assert_eq!(e[5][2], 483);
        assert_eq!(e[6][2], 6468);
    }

    #[test]
    fn unicellular_small_cases() {
        assert_eq!(enumerate_unicellular(1, 0).unwrap().len(), 1);
        assert_eq!(enumerate_unicellular(2, 1).unwrap().len(), 1);
        assert_eq!(enumerate_unicellular(2, 0).unwrap().len(), 2);
        assert_eq!(enumerate_unicellular(3, 1).unwrap().len(), 10);
        assert_eq!(enumerate_unicellular(0, 0).unwrap().len(), 1);
    }

    #[test]
    fn unicellular_counts_match_recurrence() {
        let e = gluing_table(8);
        for n in 1..=8 {
            let counts = unicellular_genus_counts(n).unwrap();
            for (g, &c) in counts.iter().enumerate() {
                assert_eq!(c, e[n][g], "n={n} g={g}");
            }
            assert_eq!(counts.iter().sum::<u64>(), double_factorial_odd(n));
            assert_eq!(counts[0], catalan(n as u64));
        }
    }

    #[test]
    fn bounds_are_enforced() {
        assert!(matches!(
            enumerate_unicellular(10, 0),
            Err(Error::BoundExceeded { .. })
        ));
        assert!(matches!(
            enumerate_rooted_maps(5),
            Err(Error::BoundExceeded { .. })
        ));
    }

    #[test]
    fn gluings_rooted_at_side_zero_are_distinct() {
        let maps = enumerate_unicellular(4, 1).unwrap();
        assert_eq!(distinct_rooted_codes(&maps), maps.len());
    }

    #[test]
    fn labellings_of_trees_and_bouquets() {
        for m in enumerate_unicellular(4, 0).unwrap() {
            assert_eq!(count_labellings(&m), 81);
        }
        for m in enumerate_unicellular(4, 2).unwrap() {
            assert_eq!(count_labellings(&m), 1);
        }
        // triangle: 9 label pairs for the two free vertices, minus (-1, 1) and (1, -1)
        let m = CombMap::from_polygons(&[3, 3], &[5, 4, 3, 2, 1, 0]).unwrap();
        assert_eq!(m.n_vertices(), 3);
        assert_eq!(count_labellings(&m), 7);
    }

    /// `m_0(n) = 2 3^n (2n)! / (n! (n+2)! )`.
    fn planar_rooted(n: u64) -> u64 {
        let binom = (0..n).fold(1u64, |acc, k| acc * (2 * n - k) / (k + 1));
        2 * 3u64.pow(n as u32) * binom / ((n + 2) * (n + 1))
    }

    #[test]
    fn rooted_map_counts() {
        let expect = [vec![2], vec![9, 1], vec![54, 20], vec![378, 307, 21]];
        for n in 1..=4 {
            let c = enumerate_rooted_maps(n).unwrap();
            assert_eq!(c.get(0), planar_rooted(n as u64));
            for (g, &v) in expect[n - 1].iter().enumerate() {
                assert_eq!(c.get(g as u32), v, "n={n} g={g}");
            }
        }
        assert_eq!(enumerate_rooted_maps(4).unwrap().total(), 706);
    }

    #[test]
    fn labelled_count_matches_pointed_rooted_maps() {
        assert_eq!(brute_force_l(1, 0).unwrap(), 3);
        assert_eq!(brute_force_l(2, 1).unwrap(), 1);
        assert_eq!(brute_force_l(2, 0).unwrap(), 18);
        for n in 1..=4usize {
            let m = enumerate_rooted_maps(n).unwrap();
            for g in 0..=(n / 2) as u32 {
                let l = brute_force_l(n, g).unwrap();
                assert_eq!(2 * l, (n as u64 + 2 - 2 * g as u64) * m.get(g), "n={n} g={g}");
            }
        }
    }

    #[test]
    fn two_face_counts() {
        let a = brute_force_a(1, 0).unwrap();
        assert_eq!(a, TwoFaceCounts { minus: 0, zero: 1, plus: 0 });
        let a2 = brute_force_a(2, 0).unwrap();
        assert_eq!(a2.get(EpsFilter::All), a2.minus + a2.zero + a2.plus);
        assert_eq!(a2.minus, a2.plus);
        assert!(brute_force_a(7, 0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn random_gluings_have_integer_genus(seed in any::<u64>(), n in 1usize..12) {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut sides: Vec<usize> = (0..2 * n).collect();
            sides.shuffle(&mut rng);
            let mut p = vec![0; 2 * n];
            for pair in sides.chunks(2) {
                p[pair[0]] = pair[1];
                p[pair[1]] = pair[0];
            }
            let m = CombMap::from_polygon_pairing(&p).unwrap();
            prop_assert_eq!(m.n_faces(), 1);
            let g = m.genus().unwrap();
            prop_assert_eq!(m.n_vertices() + 2 * g as usize, n + 1);
        }
    }
}
