//! Random quadrangulations and Voronoi cell masses.
//!
//! Genus 0 goes through a uniform plane tree (cycle lemma on a random
//! +1/-1 word), uniform label increments and the one-face closure. At large
//! sizes only the edge list of the quadrangulation is built. Genus 1 and 2
//! use rejection over polygon gluings and are limited to small sizes.
//!
//! Randomness: every trial gets its own `ChaCha8Rng` seeded with the run
//! seed and switched to stream `trial_index`, so results do not depend on
//! scheduling or thread count.

use std::time::Instant;

use num_bigint::BigInt;
use num_traits::One;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bijections::{classify_tuple, contour_successors, marcus_schaeffer_forward, PointedQuadrangulation, Sign, DERIVED_SLACK};
use crate::error::{Error, Result};
use crate::maps::{CombMap, LabelledMap};
use crate::rational::{factorial, Rational};

/// Largest edge count accepted by the rejection samplers.
pub const SMALL_MAX_EDGES: usize = 12;
/// Largest number of marked points (one bit per point in a byte mask).
pub const MAX_POINTS: usize = 8;

/// Generator for one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Rooted plane tree as a contour word: `true` is a step away from the root.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PlaneTree {
    pub n: usize,
    pub contour: Vec<bool>,
}

impl PlaneTree {
    pub fn new(contour: Vec<bool>) -> Result<Self> {
        let mut h = 0i64;
        for &up in &contour {
            h += if up { 1 } else { -1 };
            if h < 0 {
                return Err(Error::InvalidMap("contour word goes below zero".into()));
            }
        }
        if h != 0 {
            return Err(Error::InvalidMap("contour word is not balanced".into()));
        }
        Ok(PlaneTree {
            n: contour.len() / 2,
            contour,
        })
    }

    /// Vertex at each contour position, vertices numbered in preorder
    /// with the root as 0.
    pub fn corner_vertices(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(2 * self.n);
        let mut stack = vec![0u32];
        let mut next = 1u32;
        for &up in &self.contour {
            out.push(*stack.last().unwrap());
            if up {
                stack.push(next);
                next += 1;
            } else {
                stack.pop();
            }
        }
        out
    }

    /// Parent of each vertex in preorder numbering; the root is its own parent.
    pub fn parents(&self) -> Vec<u32> {
        let mut parent = vec![0u32; self.n + 1];
        let mut stack = vec![0u32];
        let mut next = 1u32;
        for &up in &self.contour {
            if up {
                parent[next as usize] = *stack.last().unwrap();
                stack.push(next);
                next += 1;
            } else {
                stack.pop();
            }
        }
        parent
    }

    /// The tree as a one-face map glued from a `2n`-gon, rooted at side 0.
    /// Side `i` starts at contour position `i`.
    pub fn to_map(&self) -> Result<CombMap> {
        if self.n == 0 {
            return Ok(CombMap::vertex_map());
        }
        let mut pairing = vec![0; 2 * self.n];
        let mut open = Vec::new();
        for (i, &up) in self.contour.iter().enumerate() {
            if up {
                open.push(i);
            } else {
                let j = open.pop().unwrap();
                pairing[i] = j;
                pairing[j] = i;
            }
        }
        CombMap::from_polygon_pairing(&pairing)
    }
}

/// Uniform rooted plane tree with `n` edges.
pub fn sample_plane_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PlaneTree {
    let mut word: Vec<bool> = (0..2 * n + 1).map(|i| i < n).collect();
    word.shuffle(rng);
    // start right after the first minimum of the partial sums
    let (mut h, mut min, mut at) = (0i64, 0i64, 0usize);
    for (i, &up) in word.iter().enumerate() {
        h += if up { 1 } else { -1 };
        if h < min {
            min = h;
            at = i + 1;
        }
    }
    let contour: Vec<bool> = (0..2 * n).map(|t| word[(at + t) % (2 * n + 1)]).collect();
    PlaneTree { n, contour }
}

/// Labels in preorder numbering: root 0, uniform increments along edges.
pub fn sample_tree_labels<R: Rng + ?Sized>(tree: &PlaneTree, rng: &mut R) -> Vec<i64> {
    let parent = tree.parents();
    let mut labels = vec![0i64; tree.n + 1];
    for v in 1..=tree.n {
        labels[v] = labels[parent[v] as usize] + rng.random_range(-1..=1);
    }
    labels
}

/// Compressed adjacency lists.
#[derive(Clone, Debug)]
pub struct Csr {
    offsets: Vec<u32>,
    targets: Vec<u32>,
}

impl Csr {
    pub fn from_edges(n_vertices: usize, edges: &[(u32, u32)]) -> Self {
        let mut offsets = vec![0u32; n_vertices + 1];
        for &(a, b) in edges {
            offsets[a as usize + 1] += 1;
            offsets[b as usize + 1] += 1;
        }
        for v in 0..n_vertices {
            offsets[v + 1] += offsets[v];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0u32; 2 * edges.len()];
        for &(a, b) in edges {
            targets[fill[a as usize] as usize] = b;
            fill[a as usize] += 1;
            targets[fill[b as usize] as usize] = a;
            fill[b as usize] += 1;
        }
        Csr { offsets, targets }
    }

    pub fn from_map(map: &CombMap) -> Self {
        let edges: Vec<(u32, u32)> = (0..map.n_half_edges())
            .filter(|&h| h < map.alpha(h))
            .map(|h| (map.vertex(h) as u32, map.vertex(map.alpha(h)) as u32))
            .collect();
        Csr::from_edges(map.n_vertices(), &edges)
    }

    pub fn n_vertices(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn neighbours(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }

    /// Breadth-first distances from `source`; unreachable vertices get `u32::MAX`.
    pub fn bfs_into(&self, source: usize, dist: &mut [u32], queue: &mut Vec<u32>) {
        dist.fill(u32::MAX);
        queue.clear();
        dist[source] = 0;
        queue.push(source as u32);
        let mut head = 0;
        while head < queue.len() {
            let v = queue[head] as usize;
            head += 1;
            let d = dist[v] + 1;
            for &w in self.neighbours(v) {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = d;
                    queue.push(w);
                }
            }
        }
    }
}

/// Edge list of the genus-0 quadrangulation of a labelled tree, with the
/// extra vertex numbered `n + 1`. Same edges as the one-face closure.
pub fn tree_quadrangulation_edges(tree: &PlaneTree, labels: &[i64]) -> Vec<(u32, u32)> {
    let corners = tree.corner_vertices();
    let corner_labels: Vec<i64> = corners.iter().map(|&v| labels[v as usize]).collect();
    let apex = tree.n as u32 + 1;
    contour_successors(&corner_labels)
        .into_iter()
        .zip(&corners)
        .map(|(s, &v)| (v, s.map_or(apex, |j| corners[j])))
        .collect()
}

/// Uniform pointed rooted quadrangulation of the sphere with `n` faces,
/// built as a full map.
pub fn sample_quadrangulation_g0<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PointedQuadrangulation> {
    if n == 0 {
        return Err(Error::Parameter("at least one face is needed".into()));
    }
    let tree = sample_plane_tree(n, rng);
    let labels = sample_tree_labels(&tree, rng);
    let map = tree.to_map()?;
    let corners = tree.corner_vertices();
    let mut map_labels = vec![0i64; map.n_vertices()];
    for (h, &v) in corners.iter().enumerate() {
        map_labels[map.vertex(h)] = labels[v as usize];
    }
    let sign = if rng.random_bool(0.5) { Sign::Up } else { Sign::Down };
    marcus_schaeffer_forward(&LabelledMap::new(map, map_labels)?, sign)
}

fn check_small(n: usize, g: u32) -> Result<()> {
    if n > SMALL_MAX_EDGES {
        return Err(Error::BoundExceeded {
            what: "edges for rejection sampling",
            value: n,
            bound: SMALL_MAX_EDGES,
        });
    }
    if !(1..=2).contains(&g) {
        return Err(Error::Parameter(format!("rejection sampler supports genus 1 and 2, got {g}")));
    }
    if 2 * g as usize > n {
        return Err(Error::Parameter(format!("no one-face map of genus {g} with {n} edges")));
    }
    Ok(())
}

/// Uniform one-face map of genus 1 or 2 with `n <= 12` edges, by
/// rejection over uniform gluings of a `2n`-gon.
pub fn sample_unicellular_small<R: Rng + ?Sized>(n: usize, g: u32, rng: &mut R) -> Result<CombMap> {
    check_small(n, g)?;
    let mut sides: Vec<usize> = (0..2 * n).collect();
    let mut pairing = vec![0; 2 * n];
    loop {
        sides.shuffle(rng);
        for p in sides.chunks(2) {
            pairing[p[0]] = p[1];
            pairing[p[1]] = p[0];
        }
        let map = CombMap::from_polygon_pairing(&pairing)?;
        if map.n_vertices() + 2 * g as usize == n + 1 {
            return Ok(map);
        }
    }
}

/// Uniform labelled one-face map of genus 1 or 2: a uniform map and uniform
/// increments along a spanning tree, both redrawn until the labelling is
/// valid on every edge.
pub fn sample_labelled_unicellular_small<R: Rng + ?Sized>(
    n: usize,
    g: u32,
    rng: &mut R,
) -> Result<LabelledMap> {
    check_small(n, g)?;
    loop {
        let map = sample_unicellular_small(n, g, rng)?;
        let labels = spanning_tree_labels(&map, rng);
        let valid = (0..map.n_half_edges())
            .all(|h| (labels[map.vertex(h)] - labels[map.vertex(map.alpha(h))]).abs() <= 1);
        if valid {
            return LabelledMap::new(map, labels);
        }
    }
}

fn spanning_tree_labels<R: Rng + ?Sized>(map: &CombMap, rng: &mut R) -> Vec<i64> {
    let adj = map.adjacency();
    let mut labels = vec![i64::MIN; map.n_vertices()];
    let start = map.vertex(map.root().unwrap_or(0));
    labels[start] = 0;
    let mut queue = vec![start];
    let mut head = 0;
    while head < queue.len() {
        let v = queue[head];
        head += 1;
        for &w in &adj[v] {
            if labels[w] == i64::MIN {
                labels[w] = labels[v] + rng.random_range(-1..=1);
                queue.push(w);
            }
        }
    }
    labels
}

/// Exact vertex tallies of the cells of `k` marked vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CellCounts {
    pub vertices: u64,
    /// Vertices strictly closer to point `i` than to every other point.
    pub counts: Vec<u64>,
    /// Vertices with at least two closest points.
    pub ties: u64,
    /// Cell sizes with tied vertices shared equally, scaled by `split_scale`.
    pub split: Vec<u64>,
    /// `lcm(1..=k)`.
    pub split_scale: u64,
    /// Distances between marked points, pairs `(i, j)` with `i < j` in
    /// lexicographic order.
    pub distances: Vec<u32>,
}

fn lcm_upto(k: usize) -> u64 {
    (1..=k as u64).fold(1, |l, m| l / gcd(l, m) * m)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Runs one breadth-first sweep per marked vertex and tallies the cells.
pub fn cell_counts(graph: &Csr, marked: &[usize]) -> Result<CellCounts> {
    let k = marked.len();
    if !(2..=MAX_POINTS).contains(&k) {
        return Err(Error::Parameter(format!("point count must be in 2..={MAX_POINTS}, got {k}")));
    }
    let nv = graph.n_vertices();
    let mut best = vec![u32::MAX; nv];
    let mut mask = vec![0u8; nv];
    let mut dist = vec![0u32; nv];
    let mut queue = Vec::with_capacity(nv);
    let mut distances = Vec::new();
    let mut to_marked = vec![vec![0u32; k]; k];
    for (i, &p) in marked.iter().enumerate() {
        graph.bfs_into(p, &mut dist, &mut queue);
        if queue.len() != nv {
            return Err(Error::Disconnected);
        }
        for (j, &q) in marked.iter().enumerate() {
            to_marked[i][j] = dist[q];
        }
        let bit = 1u8 << i;
        for v in 0..nv {
            let d = dist[v];
            if d < best[v] {
                best[v] = d;
                mask[v] = bit;
            } else if d == best[v] {
                mask[v] |= bit;
            }
        }
    }
    for (i, row) in to_marked.iter().enumerate() {
        distances.extend_from_slice(&row[i + 1..k]);
    }
    let scale = lcm_upto(k);
    let mut counts = vec![0u64; k];
    let mut split = vec![0u64; k];
    let mut ties = 0u64;
    for &m in &mask {
        let c = m.count_ones() as u64;
        if c == 1 {
            counts[m.trailing_zeros() as usize] += 1;
        } else {
            ties += 1;
        }
        let share = scale / c;
        for (i, s) in split.iter_mut().enumerate() {
            if m >> i & 1 == 1 {
                *s += share;
            }
        }
    }
    Ok(CellCounts {
        vertices: nv as u64,
        counts,
        ties,
        split,
        split_scale: scale,
        distances,
    })
}

/// `k` distinct vertices, drawn with replacement and redrawn on coincidence.
pub fn draw_points<R: Rng + ?Sized>(n_vertices: usize, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    if k > n_vertices {
        return Err(Error::Parameter(format!("{k} distinct points among {n_vertices} vertices")));
    }
    loop {
        let pts: Vec<usize> = (0..k).map(|_| rng.random_range(0..n_vertices)).collect();
        let distinct = (0..k).all(|i| (0..i).all(|j| pts[i] != pts[j]));
        if distinct {
            return Ok(pts);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellReport {
    pub k: usize,
    pub faces: usize,
    pub genus: u32,
    pub marked: Vec<usize>,
    pub cells: CellCounts,
    pub masses: Vec<f64>,
    pub tie_mass: f64,
}

impl CellReport {
    fn from_counts(faces: usize, genus: u32, marked: Vec<usize>, cells: CellCounts) -> Self {
        let v = cells.vertices as f64;
        CellReport {
            k: marked.len(),
            faces,
            genus,
            masses: cells.counts.iter().map(|&c| c as f64 / v).collect(),
            tie_mass: cells.ties as f64 / v,
            marked,
            cells,
        }
    }

    /// Exact mass of cell `i`.
    pub fn exact_mass(&self, i: usize) -> Rational {
        Rational::new(BigInt::from(self.cells.counts[i]), BigInt::from(self.cells.vertices))
    }

    pub fn exact_tie_mass(&self) -> Rational {
        Rational::new(BigInt::from(self.cells.ties), BigInt::from(self.cells.vertices))
    }
}

/// Cell masses of `k` uniform distinct vertices of `q`, over all vertices.
pub fn voronoi_masses<R: Rng + ?Sized>(q: &PointedQuadrangulation, k: usize, rng: &mut R) -> Result<CellReport> {
    voronoi_masses_at(q, draw_points(q.map.n_vertices(), k, rng)?)
}

/// Cell masses for given marked vertices.
pub fn voronoi_masses_at(q: &PointedQuadrangulation, marked: Vec<usize>) -> Result<CellReport> {
    let cells = cell_counts(&Csr::from_map(&q.map), &marked)?;
    Ok(CellReport::from_counts(q.n_faces(), q.map.genus()?, marked, cells))
}

/// `E[prod Y_i^a_i]` for the spacings of `k - 1` uniform points in [0, 1].
pub fn dirichlet_moment(k: usize, exponents: &[u32]) -> Result<Rational> {
    if k < 2 || exponents.len() != k {
        return Err(Error::Parameter(format!(
            "need k >= 2 and k exponents, got k = {k} with {} exponents",
            exponents.len()
        )));
    }
    let total: u64 = exponents.iter().map(|&a| u64::from(a)).sum();
    let num = exponents
        .iter()
        .fold(factorial(k as u64 - 1), |acc, &a| acc * factorial(u64::from(a)));
    Ok(Rational::new(num, factorial(k as u64 - 1 + total)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MomentParams {
    pub genus: u32,
    pub faces: usize,
    pub points: usize,
    pub trials: usize,
    pub seed: u64,
}

/// Outcome of one trial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub cells: CellCounts,
}

impl TrialRecord {
    pub fn mass(&self, i: usize) -> f64 {
        self.cells.counts[i] as f64 / self.cells.vertices as f64
    }

    pub fn split_mass(&self, i: usize) -> f64 {
        self.cells.split[i] as f64 / (self.cells.vertices * self.cells.split_scale) as f64
    }

    pub fn tie_mass(&self) -> f64 {
        self.cells.ties as f64 / self.cells.vertices as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Moment {
    pub name: String,
    pub estimate: f64,
    pub stderr: f64,
    pub trials: usize,
    #[serde(with = "crate::rational::pq")]
    pub reference: Rational,
}

impl Moment {
    /// Distance to the reference in standard errors.
    pub fn z_score(&self) -> f64 {
        let r = rational_to_f64(&self.reference);
        if self.stderr > 0.0 {
            (self.estimate - r) / self.stderr
        } else if self.estimate == r {
            0.0
        } else {
            f64::INFINITY
        }
    }

    pub fn error(&self) -> f64 {
        (self.estimate - rational_to_f64(&self.reference)).abs()
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Quantiles {
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TieRate {
    pub mean: f64,
    pub by_trial_quantiles: Quantiles,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub params: MomentParams,
    pub seed: u64,
    pub trials: usize,
    /// Strict cells, ties left out.
    pub moments: Vec<Moment>,
    /// Ties shared equally between the closest points.
    pub moments_ties_split: Vec<Moment>,
    pub tie_rate: TieRate,
    /// Fraction of trials whose first two points are at even distance.
    pub even_distance_fraction: f64,
    pub threads: usize,
    pub runtime_seconds: f64,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

impl MomentReport {
    pub fn moment(&self, name: &str) -> Option<&Moment> {
        self.moments.iter().find(|m| m.name == name)
    }

    /// Copy with the thread count and timing zeroed; reports of the same
    /// run then serialize identically.
    pub fn without_runtime(&self) -> Self {
        MomentReport {
            threads: 0,
            runtime_seconds: 0.0,
            ..self.clone()
        }
    }

    /// One row per trial: masses, tie mass and vertex count.
    pub fn to_csv(&self) -> String {
        let k = self.params.points;
        let mut out = String::from("trial");
        for i in 1..=k {
            out.push_str(&format!(",mass_{i}"));
        }
        out.push_str(",tie_mass,vertices\n");
        for r in &self.records {
            out.push_str(&r.trial.to_string());
            for i in 0..k {
                out.push_str(&format!(",{}", r.mass(i)));
            }
            out.push_str(&format!(",{},{}\n", r.tie_mass(), r.cells.vertices));
        }
        out
    }
}

/// Cells of one trial.
pub fn run_trial(params: &MomentParams, trial: usize) -> Result<TrialRecord> {
    let mut rng = trial_rng(params.seed, trial as u64);
    let cells = match params.genus {
        0 => {
            let tree = sample_plane_tree(params.faces, &mut rng);
            let labels = sample_tree_labels(&tree, &mut rng);
            let edges = tree_quadrangulation_edges(&tree, &labels);
            let graph = Csr::from_edges(params.faces + 2, &edges);
            drop(edges);
            let pts = draw_points(graph.n_vertices(), params.points, &mut rng)?;
            cell_counts(&graph, &pts)?
        }
        g => {
            let lm = sample_labelled_unicellular_small(params.faces, g, &mut rng)?;
            let sign = if rng.random_bool(0.5) { Sign::Up } else { Sign::Down };
            let q = marcus_schaeffer_forward(&lm, sign)?;
            let graph = Csr::from_map(&q.map);
            let pts = draw_points(graph.n_vertices(), params.points, &mut rng)?;
            cell_counts(&graph, &pts)?
        }
    };
    Ok(TrialRecord { trial, cells })
}

fn check_params(p: &MomentParams, threads: usize) -> Result<()> {
    if threads == 0 {
        return Err(Error::Parameter("thread count must be positive".into()));
    }
    if p.trials < 2 {
        return Err(Error::Parameter("at least two trials are needed".into()));
    }
    if p.faces == 0 {
        return Err(Error::Parameter("at least one face is needed".into()));
    }
    if !(2..=MAX_POINTS).contains(&p.points) {
        return Err(Error::Parameter(format!("point count must be in 2..={MAX_POINTS}")));
    }
    if p.faces + 2 > u32::MAX as usize / 4 {
        return Err(Error::Parameter("face count too large for 32-bit vertex ids".into()));
    }
    if p.genus > 0 {
        check_small(p.faces, p.genus)?;
    }
    Ok(())
}

/// Monte-Carlo moment estimates of the cell masses.
pub fn estimate_moments(params: MomentParams, threads: usize) -> Result<MomentReport> {
    check_params(&params, threads)?;
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Parameter(format!("thread pool: {e}")))?;
    let records: Vec<TrialRecord> = pool.install(|| {
        (0..params.trials)
            .into_par_iter()
            .map(|t| run_trial(&params, t))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut report = summarize(params, records);
    report.threads = threads;
    report.runtime_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Moment names with their exponent vectors.
pub fn moment_specs(k: usize) -> Vec<(String, Vec<u32>)> {
    let unit = |i: usize, a: u32| {
        let mut e = vec![0; k];
        e[i] = a;
        e
    };
    let mut specs = Vec::new();
    if k == 2 {
        specs.push(("E[X]".to_string(), vec![1, 0]));
        specs.push(("E[X^2]".to_string(), vec![2, 0]));
        specs.push(("E[X(1-X)]".to_string(), vec![1, 1]));
        specs.push(("E[Y2]".to_string(), vec![0, 1]));
        specs.push(("E[Y2^2]".to_string(), vec![0, 2]));
    } else {
        let prod: Vec<String> = (1..=k).map(|i| format!("Y{i}")).collect();
        specs.push((format!("E[{}]", prod.join("*")), vec![1; k]));
        for i in 0..k {
            specs.push((format!("E[Y{}]", i + 1), unit(i, 1)));
            specs.push((format!("E[Y{}^2]", i + 1), unit(i, 2)));
        }
    }
    specs
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn moments_with(
    records: &[TrialRecord],
    k: usize,
    mass: impl Fn(&TrialRecord, usize) -> f64,
) -> Vec<Moment> {
    moment_specs(k)
        .into_iter()
        .map(|(name, exps)| {
            let values: Vec<f64> = records
                .iter()
                .map(|r| {
                    if name == "E[X(1-X)]" {
                        let x = mass(r, 0);
                        x * (1.0 - x)
                    } else {
                        exps.iter()
                            .enumerate()
                            .map(|(i, &a)| mass(r, i).powi(a as i32))
                            .product()
                    }
                })
                .collect();
            let (estimate, stderr) = mean_and_stderr(&values);
            Moment {
                name,
                estimate,
                stderr,
                trials: records.len(),
                reference: dirichlet_moment(k, &exps).expect("k >= 2"),
            }
        })
        .collect()
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx]
}

/// Aggregates trial records in trial order.
pub fn summarize(params: MomentParams, records: Vec<TrialRecord>) -> MomentReport {
    let k = params.points;
    let moments = moments_with(&records, k, TrialRecord::mass);
    let moments_ties_split = moments_with(&records, k, TrialRecord::split_mass);
    let ties: Vec<f64> = records.iter().map(TrialRecord::tie_mass).collect();
    let mut sorted = ties.clone();
    sorted.sort_by(f64::total_cmp);
    let tie_rate = TieRate {
        mean: ties.iter().sum::<f64>() / ties.len() as f64,
        by_trial_quantiles: Quantiles {
            min: quantile(&sorted, 0.0),
            q25: quantile(&sorted, 0.25),
            median: quantile(&sorted, 0.5),
            q75: quantile(&sorted, 0.75),
            max: quantile(&sorted, 1.0),
        },
    };
    let even = records.iter().filter(|r| r.cells.distances[0] % 2 == 0).count();
    MomentReport {
        params,
        seed: params.seed,
        trials: records.len(),
        moments,
        moments_ties_split,
        tie_rate,
        even_distance_fraction: even as f64 / records.len() as f64,
        threads: 0,
        runtime_seconds: 0.0,
        records,
    }
}

/// Tallies of the distance-separation audit on sampled tuples.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SampledAuditReport {
    pub faces: usize,
    pub seed: u64,
    pub tuples: u64,
    pub parity_tuples: u64,
    pub separated_tuples: u64,
    /// Separated tuples violating the geodesic property (hard failures).
    pub separated_without_geodesic: u64,
    pub geodesic_tuples: u64,
    /// Geodesic tuples that are not separated.
    pub deficit: u64,
    pub deficit_outside_slack: u64,
    pub deficit_outside_derived_slack: u64,
    pub max_deficit_slack: i64,
    pub passed: bool,
}

/// Draws `tuples` random tuples `(Q, s1, s2, e1, e2, eps)` on uniform
/// genus-0 quadrangulations with `faces` faces and audits them like the
/// exhaustive audit.
pub fn sampled_separation_audit(faces: usize, tuples: u64, seed: u64) -> Result<SampledAuditReport> {
    let mut rep = SampledAuditReport {
        faces,
        seed,
        ..Default::default()
    };
    for t in 0..tuples {
        let mut rng = trial_rng(seed, t);
        let q = sample_quadrangulation_g0(faces, &mut rng)?;
        let map = &q.map;
        let pts = draw_points(map.n_vertices(), 2, &mut rng)?;
        let (s1, s2) = (pts[0], pts[1]);
        let nh = map.n_half_edges();
        let e1 = rng.random_range(0..nh);
        let e2 = loop {
            let e = rng.random_range(0..nh);
            if e != e1 && e != map.alpha(e1) {
                break e;
            }
        };
        let eps = rng.random_range(-1..=1i64);
        let (d1, d2) = (map.distances_from(s1), map.distances_from(s2));
        let c = classify_tuple(map, &d1, &d2, s1, s2, e1, e2, eps);
        rep.tuples += 1;
        if !c.parity {
            continue;
        }
        rep.parity_tuples += 1;
        if c.geodesic {
            rep.geodesic_tuples += 1;
        }
        if c.separated {
            rep.separated_tuples += 1;
            if !c.geodesic {
                rep.separated_without_geodesic += 1;
            }
        } else if c.geodesic {
            rep.deficit += 1;
            rep.max_deficit_slack = rep.max_deficit_slack.max(c.slack);
            if c.slack > 2 {
                rep.deficit_outside_slack += 1;
            }
            if c.slack > DERIVED_SLACK {
                rep.deficit_outside_derived_slack += 1;
            }
        }
    }
    rep.passed = rep.separated_without_geodesic == 0 && rep.deficit_outside_slack == 0;
    Ok(rep)
}

/// Catalan number, exact.
pub fn catalan(n: u64) -> BigInt {
    let mut c = BigInt::one();
    for i in 0..n {
        c = c * BigInt::from(2 * (2 * i + 1)) / BigInt::from(i + 2);
    }
    c
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use proptest::prelude::*;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    use super::*;
    use crate::bijections::{check_quadrangulation, closure, ms_count_check};
    use crate::maps::enumerate_unicellular;

    /// Pearson statistic of `counts` against the uniform law on `cells` cells.
    fn chi_square_p(counts: &HashMap<Vec<u32>, u64>, cells: usize) -> f64 {
        let total: u64 = counts.values().sum();
        let expected = total as f64 / cells as f64;
        let seen: f64 = counts
            .values()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        let unseen = (cells - counts.len()) as f64 * expected;
        let stat = seen + unseen;
        1.0 - ChiSquared::new((cells - 1) as f64).unwrap().cdf(stat)
    }

    fn tree_key(t: &PlaneTree) -> Vec<u32> {
        t.contour.iter().map(|&b| b as u32).collect()
    }

    #[test]
    fn single_edge_tree_always() {
        let mut rng = trial_rng(1, 0);
        for _ in 0..100 {
            assert_eq!(sample_plane_tree(1, &mut rng).contour, vec![true, false]);
        }
    }

    #[test]
    fn two_edge_trees_balanced() {
        let mut rng = trial_rng(2, 0);
        let draws = 100_000u64;
        let mut ups = 0u64;
        for _ in 0..draws {
            // the two trees: path (up up down down) and cherry (up down up down)
            if sample_plane_tree(2, &mut rng).contour[1] {
                ups += 1;
            }
        }
        let sigma = (draws as f64 * 0.25).sqrt();
        assert!((ups as f64 - draws as f64 / 2.0).abs() < 3.0 * sigma, "{ups}");
    }

    #[test]
    fn three_edge_trees_uniform() {
        let mut rng = trial_rng(3, 0);
        let mut counts = HashMap::new();
        for _ in 0..100_000 {
            *counts.entry(tree_key(&sample_plane_tree(3, &mut rng))).or_insert(0) += 1;
        }
        assert_eq!(counts.len(), 5);
        assert!(chi_square_p(&counts, 5) > 0.001);
    }

    #[test]
    fn catalan_values() {
        let c: Vec<BigInt> = (0..8).map(catalan).collect();
        let expected: Vec<BigInt> = [1, 1, 2, 5, 14, 42, 132, 429].iter().map(|&x| BigInt::from(x)).collect();
        assert_eq!(c, expected);
    }

    fn quad_distribution(n: usize, draws: usize, seed: u64) -> HashMap<Vec<u32>, u64> {
        let mut rng = trial_rng(seed, 0);
        let mut counts = HashMap::new();
        for _ in 0..draws {
            let q = sample_quadrangulation_g0(n, &mut rng).unwrap();
            *counts.entry(q.rooted_pointed_key()).or_insert(0) += 1;
        }
        counts
    }

    #[test]
    fn one_face_quadrangulations_uniform() {
        let expected = ms_count_check(1, 0).unwrap().expected as usize;
        let counts = quad_distribution(1, 100_000, 4);
        assert_eq!(counts.len(), expected);
        assert!(chi_square_p(&counts, expected) > 0.001);
    }

    #[test]
    fn two_face_quadrangulations_uniform() {
        let expected = ms_count_check(2, 0).unwrap().expected as usize;
        assert_eq!(expected, 36);
        let counts = quad_distribution(2, 100_000, 5);
        assert_eq!(counts.len(), expected);
        assert!(chi_square_p(&counts, expected) > 0.001);
    }

    #[test]
    fn fast_edges_match_the_closure() {
        let mut rng = trial_rng(6, 0);
        for n in 1..40 {
            let tree = sample_plane_tree(n, &mut rng);
            let labels = sample_tree_labels(&tree, &mut rng);
            let fast = tree_quadrangulation_edges(&tree, &labels);
            let map = tree.to_map().unwrap();
            let corners = tree.corner_vertices();
            let mut map_labels = vec![0; map.n_vertices()];
            let mut tree_id = vec![0u32; map.n_vertices()];
            for (h, &v) in corners.iter().enumerate() {
                map_labels[map.vertex(h)] = labels[v as usize];
                tree_id[map.vertex(h)] = v;
            }
            let c = closure(&LabelledMap::new(map.clone(), map_labels).unwrap()).unwrap();
            let mut id = vec![0u32; c.map.n_vertices()];
            for (v, &qv) in c.vertex_image.iter().enumerate() {
                id[qv] = tree_id[v];
            }
            id[c.sources[0]] = n as u32 + 1;
            let norm = |(a, b): (u32, u32)| (a.min(b), a.max(b));
            let mut slow: Vec<(u32, u32)> = (0..c.map.n_half_edges())
                .filter(|&h| h % 2 == 0)
                .map(|h| norm((id[c.map.vertex(h)], id[c.map.vertex(h + 1)])))
                .collect();
            let mut fast: Vec<(u32, u32)> = fast.into_iter().map(norm).collect();
            slow.sort_unstable();
            fast.sort_unstable();
            assert_eq!(slow, fast, "n = {n}");
        }
    }

    #[test]
    fn sampled_quadrangulations_are_valid() {
        let mut rng = trial_rng(7, 0);
        for n in [1, 2, 5, 30, 200] {
            let q = sample_quadrangulation_g0(n, &mut rng).unwrap();
            check_quadrangulation(&q.map).unwrap();
            assert_eq!(q.map.genus().unwrap(), 0);
            assert_eq!(q.n_faces(), n);
            assert_eq!(q.map.n_vertices(), n + 2);
        }
    }

    #[test]
    fn double_loop_is_the_only_genus_one_map_with_two_edges() {
        let mut rng = trial_rng(8, 0);
        let expected = enumerate_unicellular(2, 1).unwrap();
        assert_eq!(expected.len(), 1);
        for _ in 0..50 {
            let m = sample_unicellular_small(2, 1, &mut rng).unwrap();
            assert_eq!(m.canonical_code(0), expected[0].canonical_code(0));
        }
    }

    fn unicellular_uniform(n: usize, g: u32, draws: usize, seed: u64) {
        let all = enumerate_unicellular(n, g).unwrap();
        let codes: Vec<Vec<u32>> = all.iter().map(|m| m.canonical_code(m.root().unwrap_or(0))).collect();
        let mut rng = trial_rng(seed, 0);
        let mut counts = HashMap::new();
        for _ in 0..draws {
            let m = sample_unicellular_small(n, g, &mut rng).unwrap();
            let code = m.canonical_code(m.root().unwrap_or(0));
            assert!(codes.contains(&code));
            *counts.entry(code).or_insert(0) += 1;
        }
        assert!(chi_square_p(&counts, codes.len()) > 0.001);
    }

    #[test]
    fn genus_one_three_edges_uniform() {
        assert_eq!(enumerate_unicellular(3, 1).unwrap().len(), 10);
        unicellular_uniform(3, 1, 10_000, 9);
    }

    #[test]
    fn genus_two_four_edges_uniform() {
        unicellular_uniform(4, 2, 20_000, 10);
    }

    #[test]
    fn rejection_sampler_bounds() {
        let mut rng = trial_rng(11, 0);
        assert!(matches!(
            sample_unicellular_small(13, 1, &mut rng),
            Err(Error::BoundExceeded { .. })
        ));
        assert!(sample_unicellular_small(5, 0, &mut rng).is_err());
        assert!(sample_unicellular_small(3, 2, &mut rng).is_err());
    }

    #[test]
    fn labelled_genus_one_pipeline() {
        let mut rng = trial_rng(12, 0);
        for n in [2, 4, 8] {
            let lm = sample_labelled_unicellular_small(n, 1, &mut rng).unwrap();
            let q = marcus_schaeffer_forward(&lm, Sign::Up).unwrap();
            check_quadrangulation(&q.map).unwrap();
            assert_eq!(q.map.genus().unwrap(), 1);
            assert_eq!(q.n_faces(), n);
        }
    }

    #[test]
    fn one_face_path_masses() {
        // one face: s - v - s' plus the doubled edge; the two ends marked
        let mut rng = trial_rng(13, 0);
        let q = sample_quadrangulation_g0(1, &mut rng).unwrap();
        let map = &q.map;
        let degree: Vec<usize> = (0..map.n_vertices()).map(|v| map.vertex_degree(v)).collect();
        let ends: Vec<usize> = (0..map.n_vertices()).filter(|&v| degree[v] == 1).collect();
        assert_eq!(ends.len(), 2);
        let rep = voronoi_masses_at(&q, ends).unwrap();
        let third = Rational::new(BigInt::from(1), BigInt::from(3));
        assert_eq!(rep.exact_mass(0), third);
        assert_eq!(rep.exact_mass(1), third);
        assert_eq!(rep.exact_tie_mass(), third);
    }

    #[test]
    fn dirichlet_references() {
        let r = |p: i64, q: i64| Rational::new(BigInt::from(p), BigInt::from(q));
        assert_eq!(dirichlet_moment(3, &[1, 1, 1]).unwrap(), r(1, 60));
        assert_eq!(dirichlet_moment(2, &[2, 0]).unwrap(), r(1, 3));
        assert_eq!(dirichlet_moment(2, &[1, 1]).unwrap(), r(1, 6));
        assert_eq!(dirichlet_moment(2, &[1, 0]).unwrap(), r(1, 2));
        assert!(dirichlet_moment(1, &[1]).is_err());
        assert!(dirichlet_moment(3, &[1, 1]).is_err());
    }

    /// Independent check: moments of spacings of uniform order statistics
    /// by exact integration of monomials over the simplex, here for k = 3
    /// by summing `x^a y^b (1-x-y)^c` term by term.
    #[test]
    fn dirichlet_matches_simplex_integral() {
        let r = |p: i64, q: i64| Rational::new(BigInt::from(p), BigInt::from(q));
        // (k-1)! times the integral over the simplex of x^a y^b z^c
        let integral = |a: u32, b: u32, c: u32| {
            // expand z^c = (1 - x - y)^c and integrate x^i y^j over the simplex:
            // i! j! / (i + j + 2)!
            let mut total = r(0, 1);
            for p in 0..=c {
                for q in 0..=c - p {
                    // multinomial coefficient of 1^(c-p-q) (-x)^p (-y)^q
                    let coef = factorial(u64::from(c))
                        / (factorial(u64::from(p)) * factorial(u64::from(q)) * factorial(u64::from(c - p - q)));
                    let sign = if (p + q) % 2 == 0 { 1 } else { -1 };
                    let i = u64::from(a + p);
                    let j = u64::from(b + q);
                    let term = Rational::new(coef * factorial(i) * factorial(j) * sign, factorial(i + j + 2));
                    total += term;
                }
            }
            total * r(2, 1)
        };
        for (a, b, c) in [(1, 1, 1), (2, 0, 0), (0, 2, 1), (3, 1, 0), (2, 2, 2)] {
            assert_eq!(dirichlet_moment(3, &[a, b, c]).unwrap(), integral(a, b, c), "{a} {b} {c}");
        }
    }

    #[test]
    fn lcm_values() {
        assert_eq!(lcm_upto(2), 2);
        assert_eq!(lcm_upto(4), 12);
        assert_eq!(lcm_upto(8), 840);
    }

    #[test]
    fn moments_do_not_depend_on_threads() {
        let p = MomentParams {
            genus: 0,
            faces: 300,
            points: 3,
            trials: 24,
            seed: 99,
        };
        let a = estimate_moments(p, 1).unwrap().without_runtime();
        let b = estimate_moments(p, 4).unwrap().without_runtime();
        assert_eq!(a, b);
    }

    #[test]
    fn genus_one_estimates_run() {
        let p = MomentParams {
            genus: 1,
            faces: 8,
            points: 2,
            trials: 50,
            seed: 5,
        };
        let rep = estimate_moments(p, 2).unwrap();
        assert_eq!(rep.trials, 50);
        assert_eq!(rep.moments[0].name, "E[X]");
        let rep_big = estimate_moments(MomentParams { faces: 13, ..p }, 1);
        assert!(rep_big.is_err());
    }

    #[test]
    fn standard_error_definition() {
        let (m, se) = mean_and_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        // sample variance 5/3
        assert!((se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn csv_has_one_row_per_trial() {
        let p = MomentParams {
            genus: 0,
            faces: 50,
            points: 2,
            trials: 5,
            seed: 1,
        };
        let csv = estimate_moments(p, 1).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[0], "trial,mass_1,mass_2,tie_mass,vertices");
    }

    #[test]
    fn sampled_audit_small() {
        let rep = sampled_separation_audit(200, 60, 3).unwrap();
        assert_eq!(rep.tuples, 60);
        assert_eq!(rep.separated_without_geodesic, 0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn cells_partition_the_vertices(n in 1usize..200, k in 2usize..=5, seed in any::<u64>()) {
            let mut rng = trial_rng(seed, 0);
            let tree = sample_plane_tree(n, &mut rng);
            prop_assert!(PlaneTree::new(tree.contour.clone()).is_ok());
            let labels = sample_tree_labels(&tree, &mut rng);
            let graph = Csr::from_edges(n + 2, &tree_quadrangulation_edges(&tree, &labels));
            let k = k.min(n + 2);
            let pts = draw_points(graph.n_vertices(), k, &mut rng).unwrap();
            let c = cell_counts(&graph, &pts).unwrap();
            prop_assert_eq!(c.counts.iter().sum::<u64>() + c.ties, c.vertices);
            prop_assert_eq!(c.split.iter().sum::<u64>(), c.vertices * c.split_scale);
            // relabelling the points permutes the cells
            let mut rev = pts.clone();
            rev.reverse();
            let r = cell_counts(&graph, &rev).unwrap();
            let mut back = r.counts.clone();
            back.reverse();
            prop_assert_eq!(back, c.counts);
            prop_assert_eq!(r.ties, c.ties);
        }

        #[test]
        fn tree_labels_step_by_at_most_one(n in 1usize..300, seed in any::<u64>()) {
            let mut rng = trial_rng(seed, 1);
            let tree = sample_plane_tree(n, &mut rng);
            let labels = sample_tree_labels(&tree, &mut rng);
            let parent = tree.parents();
            prop_assert_eq!(labels[0], 0);
            for v in 1..=n {
                prop_assert!((labels[v] - labels[parent[v] as usize]).abs() <= 1);
            }
            prop_assert_eq!(tree.corner_vertices().len(), 2 * n);
        }
    }
}
