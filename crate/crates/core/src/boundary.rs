//! Periodic, free and bulk boundary conditions on the box of a torus:
//! four-point connectivity, restricted third moments and long lattice paths.

use serde::{Deserialize, Serialize};

use crate::cluster::{explore_cluster, Graph, Torus};
use crate::coupling::coupled_explore;
use crate::critical::{exponent_fit, PowerFit};
use crate::error::{PercError, Result};
use crate::estimators::{check_p, cluster_moment_bulk};
use crate::lattice::TorusSpec;
use crate::parallel::try_map_samples;
use crate::rng::{tags, RandomStream};
use crate::stats::{ratio_estimate, Estimate};
use crate::union_find::DisjointSets;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    /// The torus.
    Periodic,
    /// Only bonds with both endpoints in the box.
    Free,
    /// Clusters of the whole lattice intersected with the box.
    Bulk,
}

impl std::str::FromStr for BoundaryCondition {
    type Err = PercError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(Self::Periodic),
            "free" => Ok(Self::Free),
            "bulk" => Ok(Self::Bulk),
            _ => Err(PercError::InvalidArgument(format!(
                "unknown boundary condition {s:?}"
            ))),
        }
    }
}

/// Partition of the box into clusters under a boundary condition. Returns
/// one label per box vertex and whether any bulk exploration hit the cap.
pub fn box_partition(
    torus: &Torus,
    bc: BoundaryCondition,
    p: f64,
    stream: &RandomStream,
    cap: u64,
) -> Result<(Vec<u32>, bool)> {
    let v = torus.volume();
    let mut ds = DisjointSets::new(v);
    let mut censored = false;
    match bc {
        BoundaryCondition::Periodic => torus.decompose_into(p, stream, &mut ds, false),
        BoundaryCondition::Free => torus.decompose_into(p, stream, &mut ds, true),
        BoundaryCondition::Bulk => {
            let spec = torus.spec();
            let mut done = vec![false; v];
            for x in 0..v {
                if done[x] {
                    continue;
                }
                let start = crate::lattice::VertexZ::new(torus.coords_of(x));
                let r = explore_cluster(Graph::Lattice(spec), &start, p, stream, cap)?;
                censored |= r.censored;
                for y in r.cluster.iter().filter(|y| spec.in_domain(y.coords())) {
                    let yi = torus.index_of(y.coords());
                    done[yi] = true;
                    ds.union(x, yi);
                }
                done[x] = true;
            }
        }
    }
    Ok(((0..v).map(|x| ds.find(x) as u32).collect(), censored))
}

fn cluster_sizes(labels: &[u32]) -> Vec<u64> {
    let mut counts = vec![0u64; labels.len()];
    for &l in labels {
        counts[l as usize] += 1;
    }
    counts.into_iter().filter(|&c| c > 0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourPointResult {
    pub bc: BoundaryCondition,
    /// `P(X1 <-> X3 | X1 <-> X2, X3 <-> X4)`
    pub conditional: Estimate,
    /// `P(X1, X2, X3, X4 all connected)`
    pub joint4: Estimate,
    /// `P(X1 <-> X2, X3 <-> X4)`
    pub pair2: Estimate,
    /// Replicates whose drawn points satisfied the conditioning event.
    pub conditioning_count: u64,
    /// Of those, replicates where all four drawn points were connected.
    pub target_count: u64,
    pub censored_fraction: f64,
}

/// Four uniform points of the box and the conditional probability that the
/// two pairs are joined. Probabilities are averaged exactly over the points
/// given each configuration: with cluster sizes `s_i`, the pair event has
/// probability `(sum s_i^2 / V^2)^2` and the joint event `sum s_i^4 / V^4`.
/// The drawn points are also counted directly.
pub fn four_point_experiment(
    bc: BoundaryCondition,
    spec: &TorusSpec,
    p: f64,
    n: u64,
    cap: u64,
    seed: u64,
) -> Result<FourPointResult> {
    check_p(p)?;
    if n < 2 {
        return Err(PercError::InvalidArgument(
            "need at least 2 replicates".into(),
        ));
    }
    let torus = Torus::new(spec.clone())?;
    let v = torus.volume() as f64;
    let per = try_map_samples(n, |i| {
        let stream = RandomStream::new(seed, i);
        let (labels, censored) = box_partition(&torus, bc, p, &stream, cap)?;
        let sizes = cluster_sizes(&labels);
        let s2: f64 = sizes.iter().map(|&s| (s as f64 / v).powi(2)).sum();
        let s4: f64 = sizes.iter().map(|&s| (s as f64 / v).powi(4)).sum();
        let pts: Vec<u32> = (0..4)
            .map(|k| labels[stream.aux_index(tags::POINT, &[k], torus.volume() as u64) as usize])
            .collect();
        let cond = pts[0] == pts[1] && pts[2] == pts[3];
        let target = cond && pts[0] == pts[2];
        Ok::<_, PercError>((s2 * s2, s4, cond, target, censored))
    })?;
    let pair: Vec<f64> = per.iter().map(|x| x.0).collect();
    let joint: Vec<f64> = per.iter().map(|x| x.1).collect();
    let pair2 = Estimate::from_values(&pair);
    if !(pair2.mean > 0.0) {
        return Err(PercError::EmptyConditioning { samples: n });
    }
    let censored = per.iter().filter(|x| x.4).count() as f64 / n as f64;
    Ok(FourPointResult {
        bc,
        conditional: Estimate {
            censored_fraction: censored,
            ..ratio_estimate(&joint, &pair)
        },
        joint4: Estimate {
            censored_fraction: censored,
            ..Estimate::from_values(&joint)
        },
        pair2: Estimate {
            censored_fraction: censored,
            ..pair2
        },
        conditioning_count: per.iter().filter(|x| x.2).count() as u64,
        target_count: per.iter().filter(|x| x.3).count() as u64,
        censored_fraction: censored,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThirdMomentGrowth {
    pub points: Vec<(u32, Estimate)>,
    pub fit: PowerFit,
    /// Whether the fitted exponent is at most `10 + tolerance`.
    pub within_bound: bool,
}

/// `E |C_Z(0) ∩ B_r|^3` for each side length, with its growth exponent in `r`.
pub fn third_moment_growth(
    dim: usize,
    r_list: &[u32],
    p: f64,
    n: u64,
    cap: u64,
    tolerance: f64,
    seed: u64,
) -> Result<ThirdMomentGrowth> {
    if r_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(PercError::InvalidArgument(
            "side lengths must increase".into(),
        ));
    }
    let mut points = Vec::with_capacity(r_list.len());
    for &r in r_list {
        let spec = TorusSpec::nearest_neighbor(dim, r)?;
        let e = cluster_moment_bulk(&spec, &spec.torus_origin(), 3, p, n, cap, seed)?;
        points.push((r, e));
    }
    let weighted = points.iter().all(|(_, e)| e.stderr > 0.0);
    let fit = exponent_fit(
        &points
            .iter()
            .map(|(r, e)| {
                let w = if weighted {
                    (e.mean / e.stderr).powi(2)
                } else {
                    1.0
                };
                (*r as f64, e.mean, w)
            })
            .collect::<Vec<_>>(),
    )?;
    Ok(ThirdMomentGrowth {
        within_bound: fit.slope <= 10.0 + tolerance,
        points,
        fit,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongPathPoint {
    pub epsilon: f64,
    /// Euclidean radius `eps V^{1/6}`.
    pub radius: f64,
    pub estimate: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongPathResult {
    pub points: Vec<LongPathPoint>,
    /// `E |C_T(0)| / V`, the probability of the conditioning event.
    pub conditioning: Estimate,
    pub censored_fraction: f64,
    /// Slope of the estimates against `eps` on log scales, when at least three are positive.
    pub fit: Option<PowerFit>,
}

/// For `X` uniform on the torus and conditionally on `0 <-> X` there, the
/// probability that some lattice representative `y != 0` of `X` with
/// `|y| <= eps V^{1/6}` is joined to the origin on the lattice.
pub fn long_path_experiment(
    spec: &TorusSpec,
    p: f64,
    epsilon_list: &[f64],
    n: u64,
    cap: u64,
    seed: u64,
) -> Result<LongPathResult> {
    check_p(p)?;
    if n < 2 {
        return Err(PercError::InvalidArgument(
            "need at least 2 replicates".into(),
        ));
    }
    if epsilon_list.iter().any(|&e| !(e >= 0.0)) {
        return Err(PercError::InvalidArgument(
            "eps must be non-negative".into(),
        ));
    }
    let torus = Torus::new(spec.clone())?;
    let v = torus.volume() as f64;
    let radii: Vec<f64> = epsilon_list.iter().map(|e| e * v.powf(1.0 / 6.0)).collect();
    let per = try_map_samples(n, |i| {
        let r = coupled_explore(spec, p, &RandomStream::new(seed, i), cap)?;
        let mut in_torus = vec![false; torus.volume()];
        for x in &r.torus_cluster {
            in_torus[torus.index_of(x.coords())] = true;
        }
        // smallest radius at which each class is reached by a lattice representative
        let mut reach = vec![f64::INFINITY; torus.volume()];
        for y in &r.lattice_cluster {
            if y.coords().iter().all(|&c| c == 0) {
                continue;
            }
            let c = torus.class_index(y.coords());
            if in_torus[c] {
                reach[c] = reach[c].min(y.euclidean_norm());
            }
        }
        let counts: Vec<f64> = radii
            .iter()
            .map(|&rad| reach.iter().filter(|&&d| d <= rad).count() as f64 / v)
            .collect();
        Ok::<_, PercError>((counts, r.torus_cluster.len() as f64 / v, r.censored))
    })?;
    let den: Vec<f64> = per.iter().map(|x| x.1).collect();
    let censored = per.iter().filter(|x| x.2).count() as f64 / n as f64;
    let points: Vec<LongPathPoint> = epsilon_list
        .iter()
        .zip(&radii)
        .enumerate()
        .map(|(k, (&eps, &radius))| {
            let num: Vec<f64> = per.iter().map(|x| x.0[k]).collect();
            LongPathPoint {
                epsilon: eps,
                radius,
                estimate: Estimate {
                    censored_fraction: censored,
                    ..ratio_estimate(&num, &den)
                },
            }
        })
        .collect();
    let positive: Vec<(f64, f64, f64)> = points
        .iter()
        .filter(|pt| pt.epsilon > 0.0 && pt.estimate.mean > 0.0)
        .map(|pt| (pt.epsilon, pt.estimate.mean, 1.0))
        .collect();
    Ok(LongPathResult {
        fit: exponent_fit(&positive).ok(),
        points,
        conditioning: Estimate::from_values(&den),
        censored_fraction: censored,
    })
}
