//! Joint construction of the torus cluster and the lattice cluster of the
//! origin from one source of lattice randomness.
//!
//! Stage 1 explores `Z^d` but treats r-equivalent bonds as one torus bond:
//! the first representative of a class to be met is revealed (black or
//! white) and every later representative is gray and left alone. The classes
//! of the stage-1 cluster form the torus cluster. Stage 2 reveals the gray
//! bonds on their own and continues plain lattice exploration, which yields
//! the lattice cluster.

use std::collections::VecDeque;

use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use crate::error::{PercError, Result};
use crate::lattice::{step, BondKey, Coords, TorusSpec, VertexT, VertexZ};
use crate::rng::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Color {
    Black,
    White,
    Gray,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ColorLedger {
    /// Status of each torus bond, keyed by its canonical lift.
    pub torus: FxHashMap<BondKey, Color>,
    /// Colors of lattice bonds at the end of stage 1, including gray ones.
    pub stage1: FxHashMap<BondKey, Color>,
    /// Colors of every lattice bond revealed in either stage.
    pub lattice: FxHashMap<BondKey, Color>,
}

impl ColorLedger {
    pub fn stage1_black(&self) -> impl Iterator<Item = &BondKey> + '_ {
        self.stage1
            .iter()
            .filter(|(_, &c)| c == Color::Black)
            .map(|(b, _)| b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub stage: u8,
    pub bond: BondKey,
    pub color: Color,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoupledResult {
    pub spec: TorusSpec,
    /// Torus cluster of the origin, sorted.
    pub torus_cluster: Vec<VertexT>,
    /// Lattice cluster of the origin in discovery order.
    pub lattice_cluster: Vec<VertexZ>,
    /// Number of lattice vertices reached in stage 1.
    pub stage1_size: usize,
    pub ledger: ColorLedger,
    pub censored: bool,
    /// Stage-2 black bonds whose torus class had been revealed white.
    pub stage2_black_with_white_rep: u64,
    pub trace: Vec<TraceEvent>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoupledOptions {
    pub cap: u64,
    pub trace: bool,
}

pub fn coupled_explore(
    spec: &TorusSpec,
    p: f64,
    stream: &RandomStream,
    cap: u64,
) -> Result<CoupledResult> {
    coupled_explore_with(spec, p, stream, CoupledOptions { cap, trace: false })
}

pub fn coupled_explore_with(
    spec: &TorusSpec,
    p: f64,
    stream: &RandomStream,
    opts: CoupledOptions,
) -> Result<CoupledResult> {
    if opts.cap == 0 {
        return Err(PercError::InvalidArgument(
            "exploration cap must be at least 1".into(),
        ));
    }
    let mut ledger = ColorLedger::default();
    let mut trace = Vec::new();
    let record = |trace: &mut Vec<TraceEvent>, stage: u8, bond: &BondKey, color: Color| {
        if opts.trace {
            trace.push(TraceEvent {
                stage,
                bond: bond.clone(),
                color,
            });
        }
    };

    let origin: Coords = smallvec::smallvec![0; spec.dim()];
    let mut in_cluster: FxHashSet<Coords> = FxHashSet::default();
    let mut processed: FxHashSet<Coords> = FxHashSet::default();
    let mut order: Vec<Coords> = vec![origin.clone()];
    in_cluster.insert(origin.clone());
    let mut queue: VecDeque<Coords> = VecDeque::from([origin]);
    let mut gray: Vec<BondKey> = Vec::new();

    // stage 1
    while let Some(v) = queue.pop_front() {
        for o in spec.offsets() {
            let w = step(&v, o)?;
            if processed.contains(&w) {
                continue;
            }
            let key = BondKey::from_coords(&v, &w);
            let canon = spec.bond_canonical(&key);
            if ledger.torus.contains_key(&canon) {
                record(&mut trace, 1, &key, Color::Gray);
                ledger.stage1.insert(key.clone(), Color::Gray);
                gray.push(key);
                continue;
            }
            let color = if stream.is_occupied(&key, p) {
                Color::Black
            } else {
                Color::White
            };
            record(&mut trace, 1, &key, color);
            ledger.torus.insert(canon, color);
            ledger.stage1.insert(key.clone(), color);
            ledger.lattice.insert(key, color);
            if color == Color::Black && in_cluster.insert(w.clone()) {
                order.push(w.clone());
                queue.push_back(w);
            }
        }
        processed.insert(v);
    }

    let mut torus_cluster: Vec<VertexT> = order
        .iter()
        .map(|c| spec.canonical_class(&VertexZ(c.clone())))
        .collect();
    torus_cluster.sort();
    torus_cluster.dedup();
    let stage1_size = order.len();

    // stage 2
    let mut censored = false;
    let mut white_rep = 0u64;
    let mut queue: VecDeque<Coords> = VecDeque::new();
    let cap = opts.cap as usize;
    if !gray.is_empty() && order.len() >= cap {
        censored = true;
    }
    if !censored {
        'gray: for g in &gray {
            let color = if stream.is_occupied(g, p) {
                Color::Black
            } else {
                Color::White
            };
            record(&mut trace, 2, g, color);
            ledger.lattice.insert(g.clone(), color);
            if color != Color::Black {
                continue;
            }
            if ledger.torus.get(&spec.bond_canonical(g)) == Some(&Color::White) {
                white_rep += 1;
            }
            for end in [g.lo(), g.hi()] {
                if in_cluster.insert(Coords::from_slice(end)) {
                    order.push(Coords::from_slice(end));
                    queue.push_back(Coords::from_slice(end));
                    if order.len() >= cap {
                        censored = true;
                        break 'gray;
                    }
                }
            }
        }
    }
    if !censored {
        'bfs: while let Some(v) = queue.pop_front() {
            for o in spec.offsets() {
                let w = step(&v, o)?;
                if processed.contains(&w) {
                    continue;
                }
                let key = BondKey::from_coords(&v, &w);
                let color = if stream.is_occupied(&key, p) {
                    Color::Black
                } else {
                    Color::White
                };
                record(&mut trace, 2, &key, color);
                if color == Color::Black
                    && ledger.torus.get(&spec.bond_canonical(&key)) == Some(&Color::White)
                {
                    white_rep += 1;
                }
                ledger.lattice.insert(key, color);
                if color == Color::Black && in_cluster.insert(w.clone()) {
                    order.push(w.clone());
                    queue.push_back(w);
                    if order.len() >= cap {
                        censored = true;
                        break 'bfs;
                    }
                }
            }
            processed.insert(v);
        }
    }

    Ok(CoupledResult {
        spec: spec.clone(),
        torus_cluster,
        lattice_cluster: order.into_iter().map(VertexZ).collect(),
        stage1_size,
        ledger,
        censored,
        stage2_black_with_white_rep: white_rep,
        trace,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// The torus cluster is larger than the lattice cluster.
    SizeDomination { torus: usize, lattice: usize },
    /// A torus-cluster vertex without any representative in the lattice cluster.
    MissingRepresentative { vertex: Vec<i32> },
    /// A lattice vertex whose class is outside the torus cluster although no
    /// stage-2 black bond had a white representative.
    UnexplainedLatticeVertex { vertex: Vec<i32> },
    /// A stage-1 black bond that is not black in the final coloring.
    Stage1BlackLost { bond: BondKey },
    /// Two stage-1 revealed bonds in the same class.
    DuplicateClass { bond: BondKey },
}

/// Lists every broken guarantee of the coupling in `result`.
pub fn verify_coupling_invariants(result: &CoupledResult) -> Vec<Violation> {
    let spec = &result.spec;
    let mut out = Vec::new();
    if result.torus_cluster.len() > result.lattice_cluster.len() {
        out.push(Violation::SizeDomination {
            torus: result.torus_cluster.len(),
            lattice: result.lattice_cluster.len(),
        });
    }
    let lattice_classes: FxHashSet<VertexT> = result
        .lattice_cluster
        .iter()
        .map(|y| spec.canonical_class(y))
        .collect();
    for x in &result.torus_cluster {
        if !lattice_classes.contains(x) {
            out.push(Violation::MissingRepresentative {
                vertex: x.coords().to_vec(),
            });
        }
    }
    if result.stage2_black_with_white_rep == 0 {
        let torus: FxHashSet<&VertexT> = result.torus_cluster.iter().collect();
        if let Some(y) = result
            .lattice_cluster
            .iter()
            .find(|y| !torus.contains(&spec.canonical_class(y)))
        {
            out.push(Violation::UnexplainedLatticeVertex {
                vertex: y.coords().to_vec(),
            });
        }
    }
    for b in result.ledger.stage1_black() {
        if result.ledger.lattice.get(b) != Some(&Color::Black) {
            out.push(Violation::Stage1BlackLost { bond: b.clone() });
        }
    }
    let mut classes = FxHashSet::default();
    for (b, c) in &result.ledger.stage1 {
        if *c != Color::Gray && !classes.insert(spec.bond_canonical(b)) {
            out.push(Violation::DuplicateClass { bond: b.clone() });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::{explore_cluster, Graph, Torus};
    use std::collections::HashSet;

    #[test]
    fn p_zero_is_trivial() {
        let spec = TorusSpec::nearest_neighbor(2, 3).unwrap();
        let r = coupled_explore(&spec, 0.0, &RandomStream::new(0, 0), 10).unwrap();
        assert_eq!(r.torus_cluster, vec![spec.torus_origin()]);
        assert_eq!(r.lattice_cluster, vec![VertexZ::origin(2)]);
        assert_eq!(r.ledger.stage1_black().count(), 0);
        assert!(!r.censored);
        assert!(verify_coupling_invariants(&r).is_empty());
    }

    #[test]
    fn p_one_on_the_triangle() {
        let spec = TorusSpec::nearest_neighbor(1, 3).unwrap();
        let r = coupled_explore(&spec, 1.0, &RandomStream::new(0, 0), 100).unwrap();
        assert_eq!(r.torus_cluster.len(), 3);
        assert!(r.censored);
        assert!(r.lattice_cluster.len() >= 100);
        assert!(verify_coupling_invariants(&r).is_empty());
    }

    #[test]
    fn stage_one_reveals_each_class_once_and_stays_black() {
        let spec = TorusSpec::nearest_neighbor(2, 3).unwrap();
        for id in 0..2000 {
            let r = coupled_explore(&spec, 0.45, &RandomStream::new(1, id), 10_000).unwrap();
            assert!(verify_coupling_invariants(&r).is_empty(), "{id}");
            let revealed = r
                .ledger
                .stage1
                .values()
                .filter(|&&c| c != Color::Gray)
                .count();
            assert_eq!(revealed, r.ledger.torus.len());
            assert!(revealed as u64 <= spec.bond_count());
        }
    }

    #[test]
    fn lattice_cluster_matches_plain_exploration() {
        let spec = TorusSpec::nearest_neighbor(2, 3).unwrap();
        for id in 0..1000 {
            let s = RandomStream::new(2, id);
            let r = coupled_explore(&spec, 0.4, &s, 1 << 20).unwrap();
            let e = explore_cluster(Graph::Lattice(&spec), &VertexZ::origin(2), 0.4, &s, 1 << 20)
                .unwrap();
            let a: HashSet<_> = r.lattice_cluster.iter().collect();
            let b: HashSet<_> = e.cluster.iter().collect();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn torus_cluster_is_closed_under_the_ledger() {
        // every torus bond touching the torus cluster has been revealed, and
        // the torus cluster is exactly what its black bonds connect
        let spec = TorusSpec::nearest_neighbor(2, 4).unwrap();
        let torus = Torus::new(spec.clone()).unwrap();
        for id in 0..500 {
            let r = coupled_explore(&spec, 0.35, &RandomStream::new(3, id), 1 << 16).unwrap();
            let members: HashSet<usize> = r
                .torus_cluster
                .iter()
                .map(|v| torus.index_of(v.coords()))
                .collect();
            let mut ds = crate::union_find::DisjointSets::new(torus.volume());
            for v in &members {
                for e in torus.incident(*v) {
                    let (lo, hi) = torus.bond_lift(e.bond as usize);
                    let key = BondKey::from_coords(&lo, &hi);
                    let c = r.ledger.torus.get(&key).expect("revealed");
                    if *c == Color::Black {
                        ds.union(*v, e.neighbor as usize);
                    }
                }
            }
            let o = torus.origin_index();
            assert_eq!(ds.set_size(o), members.len());
        }
    }

    #[test]
    fn censoring_keeps_stage_one() {
        let spec = TorusSpec::nearest_neighbor(2, 3).unwrap();
        let r = coupled_explore(&spec, 0.9, &RandomStream::new(0, 5), 2).unwrap();
        assert!(r.censored);
        assert!(r.lattice_cluster.len() >= r.stage1_size);
        assert!(verify_coupling_invariants(&r).is_empty());
    }

    #[test]
    fn checker_flags_synthetic_violations() {
        let spec = TorusSpec::nearest_neighbor(1, 3).unwrap();
        let mut r = coupled_explore(&spec, 0.0, &RandomStream::new(0, 0), 10).unwrap();
        r.lattice_cluster.push(VertexZ::new(&[1]));
        let v = verify_coupling_invariants(&r);
        assert!(matches!(
            v.as_slice(),
            [Violation::UnexplainedLatticeVertex { .. }]
        ));

        let mut r = coupled_explore(&spec, 0.0, &RandomStream::new(0, 0), 10).unwrap();
        r.torus_cluster.push(spec.torus_vertex(&[1]).unwrap());
        let v = verify_coupling_invariants(&r);
        assert!(v
            .iter()
            .any(|x| matches!(x, Violation::MissingRepresentative { .. })));
        assert!(v
            .iter()
            .any(|x| matches!(x, Violation::SizeDomination { .. })));
    }

    #[test]
    fn trace_replays_the_ledger() {
        let spec = TorusSpec::nearest_neighbor(2, 3).unwrap();
        let s = RandomStream::new(9, 9);
        let r = coupled_explore_with(
            &spec,
            0.5,
            &s,
            CoupledOptions {
                cap: 1000,
                trace: true,
            },
        )
        .unwrap();
        assert!(!r.trace.is_empty());
        for ev in &r.trace {
            match (ev.stage, ev.color) {
                (1, c) => assert_eq!(r.ledger.stage1.get(&ev.bond), Some(&c)),
                (2, c) => {
                    assert_eq!(r.ledger.lattice.get(&ev.bond), Some(&c));
                    assert_eq!(s.is_occupied(&ev.bond, 0.5), c == Color::Black);
                }
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn rejects_zero_cap() {
        let spec = TorusSpec::nearest_neighbor(1, 3).unwrap();
        assert!(coupled_explore(&spec, 0.5, &RandomStream::new(0, 0), 0).is_err());
    }
}
