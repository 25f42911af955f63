//! Cluster decomposition and single-cluster exploration.

use std::collections::VecDeque;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{PercError, Result};
use crate::lattice::{step, Coords, TorusSpec, VertexZ};
use crate::rng::RandomStream;
use crate::union_find::DisjointSets;

/// Dense tables for one torus: vertex coordinates in lexicographic index
/// order and, per vertex, every incident bond.
#[derive(Debug, Clone)]
pub struct Torus {
    spec: TorusSpec,
    volume: usize,
    coords: Vec<i32>,
    /// `volume * degree` entries: (neighbor index, bond index, wraps around).
    incident: Vec<Incidence>,
    /// `volume * forward_count` entries: index of `x + delta` for each forward offset.
    forward_neighbor: Vec<u32>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Incidence {
    pub(crate) neighbor: u32,
    pub(crate) bond: u32,
    pub(crate) wraps: bool,
}

const MAX_DENSE_VOLUME: u64 = 1 << 28;

impl Torus {
    pub fn new(spec: TorusSpec) -> Result<Self> {
        let volume = spec.volume();
        if volume > MAX_DENSE_VOLUME || spec.bond_count() > u32::MAX as u64 {
            return Err(PercError::InvalidSpec(format!(
                "torus volume {volume} too large for dense storage"
            )));
        }
        let volume = volume as usize;
        let d = spec.dim();
        let h = spec.domain_low();
        let r = spec.side() as i32;

        let mut coords = Vec::with_capacity(volume * d);
        let mut c = vec![-h; d];
        for _ in 0..volume {
            coords.extend_from_slice(&c);
            for i in (0..d).rev() {
                c[i] += 1;
                if c[i] < r - h {
                    break;
                }
                c[i] = -h;
            }
        }

        let mut torus = Torus {
            spec,
            volume,
            coords,
            incident: Vec::new(),
            forward_neighbor: Vec::new(),
        };
        let f_count = torus.spec.forward_count();
        // forward offset -> its position among forward offsets
        let forward_pos: Vec<Option<usize>> = {
            let mut pos = vec![None; torus.spec.degree()];
            let fw: Vec<&Coords> = torus.spec.forward_offsets().collect();
            for (k, o) in torus.spec.offsets().iter().enumerate() {
                pos[k] = fw.iter().position(|f| *f == o);
            }
            pos
        };
        let neg: Vec<usize> = torus
            .spec
            .offsets()
            .iter()
            .map(|o| {
                let m: Coords = o.iter().map(|&x| -x).collect();
                torus.spec.offsets().iter().position(|q| *q == m).unwrap()
            })
            .collect();

        let mut incident = Vec::with_capacity(volume * torus.spec.degree());
        let mut forward_neighbor = vec![0u32; volume * f_count];
        for v in 0..volume {
            let x = torus.coords_of(v).to_vec();
            for (k, o) in torus.spec.offsets().iter().enumerate() {
                let y: Vec<i32> = x.iter().zip(o).map(|(&a, &b)| a + b).collect();
                let wraps = !torus.spec.in_domain(&y);
                let yw: Vec<i32> = y.iter().map(|&c| torus.spec.wrap_coord(c as i64)).collect();
                let w = torus.index_of(&yw);
                let bond = match forward_pos[k] {
                    Some(f) => {
                        forward_neighbor[v * f_count + f] = w as u32;
                        v * f_count + f
                    }
                    None => w * f_count + forward_pos[neg[k]].unwrap(),
                };
                incident.push(Incidence {
                    neighbor: w as u32,
                    bond: bond as u32,
                    wraps,
                });
            }
        }
        torus.incident = incident;
        torus.forward_neighbor = forward_neighbor;
        Ok(torus)
    }

    pub fn spec(&self) -> &TorusSpec {
        &self.spec
    }

    pub fn volume(&self) -> usize {
        self.volume
    }

    pub fn bond_count(&self) -> usize {
        self.volume * self.spec.forward_count()
    }

    #[inline]
    pub fn coords_of(&self, v: usize) -> &[i32] {
        let d = self.spec.dim();
        &self.coords[v * d..(v + 1) * d]
    }

    /// Index of a vertex given in fundamental-domain coordinates.
    #[inline]
    pub fn index_of(&self, c: &[i32]) -> usize {
        let h = self.spec.domain_low() as i64;
        let r = self.spec.side() as i64;
        c.iter().fold(0i64, |acc, &x| acc * r + (x as i64 + h)) as usize
    }

    /// Index of the class of an arbitrary lattice point.
    pub fn class_index(&self, c: &[i32]) -> usize {
        let h = self.spec.domain_low() as i64;
        let r = self.spec.side() as i64;
        c.iter()
            .fold(0i64, |acc, &x| acc * r + (x as i64 + h).rem_euclid(r)) as usize
    }

    pub fn origin_index(&self) -> usize {
        self.index_of(&vec![0; self.spec.dim()])
    }

    #[inline]
    pub(crate) fn incident(&self, v: usize) -> &[Incidence] {
        let k = self.spec.degree();
        &self.incident[v * k..(v + 1) * k]
    }

    /// Endpoints (lower in the domain, upper possibly outside) of a torus bond's
    /// canonical lattice lift.
    pub fn bond_lift(&self, bond: usize) -> (Coords, Coords) {
        let f_count = self.spec.forward_count();
        let v = bond / f_count;
        let o = self.spec.forward_offsets().nth(bond % f_count).unwrap();
        let lo = Coords::from_slice(self.coords_of(v));
        let hi = lo.iter().zip(o).map(|(&a, &b)| a + b).collect();
        (lo, hi)
    }

    /// Torus endpoints of a bond, lower endpoint first.
    pub fn bond_endpoints(&self, bond: usize) -> (usize, usize) {
        let f_count = self.spec.forward_count();
        (bond / f_count, self.forward_neighbor[bond] as usize)
    }

    /// Uniform of a torus bond, read from its canonical lattice lift.
    #[inline]
    pub fn bond_uniform(&self, stream: &RandomStream, bond: usize) -> f64 {
        let (lo, hi) = self.bond_lift(bond);
        stream.bond_uniform_coords(&lo, &hi)
    }

    /// Reveals every bond and merges occupied ones.
    pub fn decompose(&self, p: f64, stream: &RandomStream) -> TorusConfiguration {
        let mut sets = DisjointSets::new(self.volume);
        self.decompose_into(p, stream, &mut sets, false);
        TorusConfiguration { sets }
    }

    pub(crate) fn decompose_into(
        &self,
        p: f64,
        stream: &RandomStream,
        sets: &mut DisjointSets,
        free_boundary: bool,
    ) {
        if p <= 0.0 {
            return;
        }
        let d = self.spec.dim();
        let f_count = self.spec.forward_count();
        let forward: Vec<&Coords> = self.spec.forward_offsets().collect();
        let mut hi = vec![0i32; d];
        for v in 0..self.volume {
            let x = self.coords_of(v);
            let prefix = stream.bond_prefix(x);
            let nbr = &self.forward_neighbor[v * f_count..(v + 1) * f_count];
            for (f, o) in forward.iter().enumerate() {
                for i in 0..d {
                    hi[i] = x[i] + o[i];
                }
                if free_boundary && !self.spec.in_domain(&hi) {
                    continue;
                }
                let mut h = prefix;
                h.push_coords(&hi);
                if h.finish_unit() < p {
                    sets.union(v, nbr[f] as usize);
                }
            }
        }
    }
}

/// A fully revealed torus configuration.
#[derive(Debug, Clone)]
pub struct TorusConfiguration {
    pub(crate) sets: DisjointSets,
}

impl TorusConfiguration {
    pub fn connected(&mut self, a: usize, b: usize) -> bool {
        self.sets.connected(a, b)
    }

    pub fn cluster_size(&mut self, v: usize) -> u64 {
        self.sets.set_size(v) as u64
    }

    pub fn cluster_sizes(&self) -> Vec<u64> {
        self.sets.set_sizes().collect()
    }

    pub fn stats(&self) -> ClusterStats {
        ClusterStats::from_sizes(self.cluster_sizes())
    }
}

/// Partition summary of one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterStats {
    pub sizes: Vec<u64>,
    pub max_size: u64,
    /// `sum_i |C_i|^2 / V`; its expectation is the susceptibility.
    pub sum_sq_over_v: f64,
}

impl ClusterStats {
    pub fn from_sizes(sizes: Vec<u64>) -> Self {
        let volume: u64 = sizes.iter().sum();
        let max_size = sizes.iter().copied().max().unwrap_or(0);
        let sq: f64 = sizes.iter().map(|&s| (s as f64) * (s as f64)).sum();
        ClusterStats {
            sizes,
            max_size,
            sum_sq_over_v: sq / volume.max(1) as f64,
        }
    }

    pub fn volume(&self) -> u64 {
        self.sizes.iter().sum()
    }
}

pub fn decompose_torus(spec: &TorusSpec, p: f64, stream: &RandomStream) -> Result<ClusterStats> {
    let torus = Torus::new(spec.clone())?;
    Ok(torus.decompose(p, stream).stats())
}

/// Order in which active vertices are processed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Schedule {
    #[default]
    Fifo,
    Lifo,
}

/// Graph on which a single cluster is explored.
#[derive(Debug, Clone, Copy)]
pub enum Graph<'a> {
    Torus(&'a Torus),
    /// The box with free boundary conditions: only bonds inside the box.
    FreeBox(&'a Torus),
    Lattice(&'a TorusSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExploreOptions {
    pub cap: u64,
    pub schedule: Schedule,
    /// Stop as soon as this vertex joins the cluster.
    pub target: Option<VertexZ>,
}

impl ExploreOptions {
    pub fn with_cap(cap: u64) -> Self {
        ExploreOptions {
            cap,
            schedule: Schedule::Fifo,
            target: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExplorationResult {
    /// Cluster vertices in order of discovery, origin first.
    pub cluster: Vec<VertexZ>,
    pub censored: bool,
    pub revealed_bonds: u64,
    pub reached_target: bool,
}

impl ExplorationResult {
    pub fn size(&self) -> u64 {
        self.cluster.len() as u64
    }
}

pub fn explore_cluster(
    graph: Graph<'_>,
    origin: &VertexZ,
    p: f64,
    stream: &RandomStream,
    cap: u64,
) -> Result<ExplorationResult> {
    explore_cluster_with(graph, origin, p, stream, &ExploreOptions::with_cap(cap))
}

pub fn explore_cluster_with(
    graph: Graph<'_>,
    origin: &VertexZ,
    p: f64,
    stream: &RandomStream,
    opts: &ExploreOptions,
) -> Result<ExplorationResult> {
    if opts.cap == 0 {
        return Err(PercError::InvalidArgument(
            "exploration cap must be at least 1".into(),
        ));
    }
    match graph {
        Graph::Lattice(spec) => {
            if origin.dim() != spec.dim() {
                return Err(PercError::InvalidArgument(
                    "origin dimension mismatch".into(),
                ));
            }
            explore_lattice(spec, origin, p, stream, opts)
        }
        Graph::Torus(t) => explore_dense(t, false, origin, p, stream, opts),
        Graph::FreeBox(t) => explore_dense(t, true, origin, p, stream, opts),
    }
}

fn explore_dense(
    torus: &Torus,
    free: bool,
    origin: &VertexZ,
    p: f64,
    stream: &RandomStream,
    opts: &ExploreOptions,
) -> Result<ExplorationResult> {
    if !torus.spec.in_domain(origin.coords()) {
        return Err(PercError::InvalidArgument(format!(
            "origin {origin} outside the fundamental domain"
        )));
    }
    let target = match &opts.target {
        Some(t) if torus.spec.in_domain(t.coords()) => Some(torus.index_of(t.coords())),
        Some(_) => None,
        None => None,
    };
    // 0 = unseen, 1 = in cluster, 2 = processed
    let mut state = vec![0u8; torus.volume];
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    let o = torus.index_of(origin.coords());
    state[o] = 1;
    order.push(o);
    queue.push_back(o);
    let mut revealed = 0u64;
    let mut censored = false;
    let mut reached = target == Some(o);
    let full = torus.volume as u64;

    if !reached && opts.cap <= 1 && full > 1 {
        censored = true;
    }
    'outer: while !reached && !censored {
        let v = match opts.schedule {
            Schedule::Fifo => queue.pop_front(),
            Schedule::Lifo => queue.pop_back(),
        };
        let Some(v) = v else { break };
        for e in torus.incident(v) {
            let w = e.neighbor as usize;
            if state[w] == 2 || (free && e.wraps) {
                continue;
            }
            revealed += 1;
            if torus.bond_uniform(stream, e.bond as usize) < p && state[w] == 0 {
                state[w] = 1;
                order.push(w);
                queue.push_back(w);
                if Some(w) == target {
                    reached = true;
                    break 'outer;
                }
                let size = order.len() as u64;
                if size >= opts.cap && size < full {
                    censored = true;
                    break 'outer;
                }
            }
        }
        state[v] = 2;
    }
    Ok(ExplorationResult {
        cluster: order
            .into_iter()
            .map(|i| VertexZ::new(torus.coords_of(i)))
            .collect(),
        censored,
        revealed_bonds: revealed,
        reached_target: reached,
    })
}

fn explore_lattice(
    spec: &TorusSpec,
    origin: &VertexZ,
    p: f64,
    stream: &RandomStream,
    opts: &ExploreOptions,
) -> Result<ExplorationResult> {
    let mut processed: FxHashMap<Coords, bool> = FxHashMap::default();
    let mut order: Vec<Coords> = Vec::new();
    let mut queue: VecDeque<Coords> = VecDeque::new();
    processed.insert(origin.0.clone(), false);
    order.push(origin.0.clone());
    queue.push_back(origin.0.clone());
    let target = opts.target.as_ref().map(|t| &t.0);
    let mut reached = target == Some(&origin.0);
    let mut censored = !reached && opts.cap <= 1;
    let mut revealed = 0u64;

    'outer: while !reached && !censored {
        let v = match opts.schedule {
            Schedule::Fifo => queue.pop_front(),
            Schedule::Lifo => queue.pop_back(),
        };
        let Some(v) = v else { break };
        for o in spec.offsets() {
            let w = step(&v, o)?;
            let seen = processed.get(&w).copied();
            if seen == Some(true) {
                continue;
            }
            revealed += 1;
            let u = if v < w {
                stream.bond_uniform_coords(&v, &w)
            } else {
                stream.bond_uniform_coords(&w, &v)
            };
            if u < p && seen.is_none() {
                processed.insert(w.clone(), false);
                order.push(w.clone());
                if target == Some(&w) {
                    reached = true;
                    break 'outer;
                }
                queue.push_back(w);
                if order.len() as u64 >= opts.cap {
                    censored = true;
                    break 'outer;
                }
            }
        }
        processed.insert(v, true);
    }
    Ok(ExplorationResult {
        cluster: order.into_iter().map(VertexZ).collect(),
        censored,
        revealed_bonds: revealed,
        reached_target: reached,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{BTreeSet, HashSet};

    fn line3() -> Torus {
        Torus::new(TorusSpec::nearest_neighbor(1, 3).unwrap()).unwrap()
    }

    #[test]
    fn torus_tables() {
        let t = Torus::new(TorusSpec::nearest_neighbor(2, 4).unwrap()).unwrap();
        assert_eq!(t.volume(), 16);
        assert_eq!(t.bond_count(), 32);
        for v in 0..t.volume() {
            assert_eq!(t.index_of(t.coords_of(v)), v);
            assert_eq!(t.incident(v).len(), 4);
        }
        let mut seen = vec![0; t.bond_count()];
        for v in 0..t.volume() {
            for e in t.incident(v) {
                seen[e.bond as usize] += 1;
                // the other endpoint lists the same bond
                assert!(t
                    .incident(e.neighbor as usize)
                    .iter()
                    .any(|f| f.bond == e.bond));
            }
        }
        assert!(seen.iter().all(|&c| c == 2));
        assert_eq!(t.coords_of(0), &[-2, -2]);
        assert_eq!(t.origin_index(), t.index_of(&[0, 0]));
        assert_eq!(t.class_index(&[5, -3]), t.index_of(&[1, 1]));
    }

    #[test]
    fn bond_lift_is_canonical() {
        let t = Torus::new(TorusSpec::spread_out(2, 5, 2).unwrap()).unwrap();
        for b in 0..t.bond_count() {
            let (lo, hi) = t.bond_lift(b);
            let key = crate::lattice::BondKey::from_coords(&lo, &hi);
            assert_eq!(t.spec().bond_canonical(&key), key);
        }
    }

    #[test]
    fn decompose_extremes() {
        let t = Torus::new(TorusSpec::nearest_neighbor(2, 5).unwrap()).unwrap();
        let s = RandomStream::new(1, 1);
        let st = t.decompose(0.0, &s).stats();
        assert_eq!(st.max_size, 1);
        assert_eq!(st.sum_sq_over_v, 1.0);
        let st = t.decompose(1.0, &s).stats();
        assert_eq!(st.max_size, 25);
        assert_eq!(st.sum_sq_over_v, 25.0);
        assert_eq!(st.volume(), 25);
    }

    #[test]
    fn explore_extremes() {
        let spec = TorusSpec::nearest_neighbor(3, 3).unwrap();
        let s = RandomStream::new(4, 0);
        let o = VertexZ::origin(3);
        let r = explore_cluster(Graph::Lattice(&spec), &o, 0.0, &s, 10).unwrap();
        assert_eq!(r.cluster, vec![o.clone()]);
        assert!(!r.censored);
        assert_eq!(r.revealed_bonds, 6);
        let r = explore_cluster(Graph::Lattice(&spec), &o, 1.0, &s, 100).unwrap();
        assert!(r.censored);
        assert!(r.size() >= 100);
        let t = Torus::new(spec).unwrap();
        let r = explore_cluster(Graph::Torus(&t), &o, 1.0, &s, 27).unwrap();
        assert!(!r.censored);
        assert_eq!(r.size(), 27);
    }

    #[test]
    fn explore_rejects_zero_cap_and_foreign_origin() {
        let t = line3();
        let s = RandomStream::new(0, 0);
        assert!(explore_cluster(Graph::Torus(&t), &VertexZ::new(&[0]), 0.5, &s, 0).is_err());
        assert!(explore_cluster(Graph::Torus(&t), &VertexZ::new(&[4]), 0.5, &s, 3).is_err());
    }

    #[test]
    fn each_bond_revealed_once_on_torus() {
        // p = 1 on the triangle: every one of the 3 bonds is revealed exactly once
        let t = line3();
        let s = RandomStream::new(0, 0);
        let r = explore_cluster(Graph::Torus(&t), &VertexZ::new(&[0]), 1.0, &s, 3).unwrap();
        assert_eq!(r.revealed_bonds, 3);
    }

    #[test]
    fn torus_exploration_matches_decomposition() {
        for spec in [
            TorusSpec::nearest_neighbor(2, 4).unwrap(),
            TorusSpec::nearest_neighbor(3, 3).unwrap(),
            TorusSpec::spread_out(2, 5, 2).unwrap(),
        ] {
            let t = Torus::new(spec).unwrap();
            let o = VertexZ::origin(t.spec().dim());
            for id in 0..300 {
                let s = RandomStream::new(11, id);
                let p = 0.05 + 0.003 * id as f64;
                let mut conf = t.decompose(p, &s);
                let r = explore_cluster(Graph::Torus(&t), &o, p, &s, t.volume() as u64).unwrap();
                assert!(!r.censored);
                assert_eq!(r.size(), conf.cluster_size(t.origin_index()));
                for v in &r.cluster {
                    assert!(conf.connected(t.origin_index(), t.index_of(v.coords())));
                }
            }
        }
    }

    #[test]
    fn schedule_does_not_change_cluster() {
        let spec = TorusSpec::nearest_neighbor(2, 5).unwrap();
        let t = Torus::new(spec.clone()).unwrap();
        let o = VertexZ::origin(2);
        for id in 0..200 {
            let s = RandomStream::new(5, id);
            for graph in [Graph::Lattice(&spec), Graph::Torus(&t), Graph::FreeBox(&t)] {
                let mut fifo = ExploreOptions::with_cap(1_000_000);
                let a = explore_cluster_with(graph, &o, 0.45, &s, &fifo).unwrap();
                fifo.schedule = Schedule::Lifo;
                let b = explore_cluster_with(graph, &o, 0.45, &s, &fifo).unwrap();
                let sa: HashSet<_> = a.cluster.iter().collect();
                let sb: HashSet<_> = b.cluster.iter().collect();
                assert_eq!(sa, sb);
                assert_eq!(a.revealed_bonds, b.revealed_bonds);
            }
        }
    }

    #[test]
    fn free_box_cluster_inside_lattice_and_torus_clusters() {
        let spec = TorusSpec::nearest_neighbor(2, 4).unwrap();
        let t = Torus::new(spec.clone()).unwrap();
        let o = VertexZ::origin(2);
        for id in 0..300 {
            let s = RandomStream::new(8, id);
            let free: BTreeSet<_> = explore_cluster(Graph::FreeBox(&t), &o, 0.5, &s, 1 << 20)
                .unwrap()
                .cluster
                .into_iter()
                .collect();
            let bulk: BTreeSet<_> = explore_cluster(Graph::Lattice(&spec), &o, 0.5, &s, 1 << 20)
                .unwrap()
                .cluster
                .into_iter()
                .filter(|v| spec.in_domain(v.coords()))
                .collect();
            let periodic: BTreeSet<_> = explore_cluster(Graph::Torus(&t), &o, 0.5, &s, 1 << 20)
                .unwrap()
                .cluster
                .into_iter()
                .collect();
            assert!(free.is_subset(&bulk));
            assert!(free.is_subset(&periodic));
        }
    }

    #[test]
    fn target_stops_early() {
        let spec = TorusSpec::nearest_neighbor(1, 3).unwrap();
        let s = RandomStream::new(0, 0);
        let opts = ExploreOptions {
            cap: 1000,
            schedule: Schedule::Fifo,
            target: Some(VertexZ::new(&[3])),
        };
        let r = explore_cluster_with(Graph::Lattice(&spec), &VertexZ::new(&[0]), 1.0, &s, &opts)
            .unwrap();
        assert!(r.reached_target);
        assert!(!r.censored);
        assert!(r.size() <= 7);
    }

    #[test]
    fn monotone_in_p_under_common_randomness() {
        let t = Torus::new(TorusSpec::nearest_neighbor(2, 6).unwrap()).unwrap();
        for id in 0..50 {
            let s = RandomStream::new(3, id);
            let mut prev = t.decompose(0.0, &s).stats();
            for k in 1..=20 {
                let st = t.decompose(k as f64 / 20.0, &s).stats();
                assert!(st.max_size >= prev.max_size);
                assert!(st.sum_sq_over_v >= prev.sum_sq_over_v);
                prev = st;
            }
        }
    }
}
