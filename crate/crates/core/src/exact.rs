//! Exact enumeration over every bond configuration of a small torus, and
//! exact checks of the FKG, BK and tree-graph inequalities.
//!
//! Configurations are tallied by their number of occupied bonds, so a single
//! enumeration yields every quantity as a polynomial in `p`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::Torus;
use crate::error::{PercError, Result};
use crate::estimators::{
    check_p, estimate_chi_lattice, estimate_chi_torus, estimate_tilde_chi, TildeChiOptions,
};
use crate::lattice::{SpecFields, TorusSpec};
use crate::stats::{compensated_sum, Estimate};
use crate::union_find::DisjointSets;

pub const MAX_ENUMERATION_BONDS: usize = 24;

fn enumerable_torus(spec: &TorusSpec) -> Result<Torus> {
    let bonds = spec.bond_count();
    if bonds > MAX_ENUMERATION_BONDS as u64 {
        return Err(PercError::TooLarge {
            bonds: bonds.min(usize::MAX as u64) as usize,
            limit: MAX_ENUMERATION_BONDS,
        });
    }
    Torus::new(spec.clone())
}

/// Weights `p^k (1-p)^(B-k)` for `k = 0..=B`.
fn popcount_weights(p: f64, bonds: usize) -> Vec<f64> {
    (0..=bonds)
        .map(|k| p.powi(k as i32) * (1.0 - p).powi((bonds - k) as i32))
        .collect()
}

/// `sum_k counts[k] * w[k]` for a per-popcount tally.
fn evaluate(counts: impl Iterator<Item = u64>, w: &[f64]) -> f64 {
    compensated_sum(counts.zip(w).map(|(c, &w)| c as f64 * w))
}

const BLOCK_BITS: u32 = 12;

/// Runs `visit` over all configurations in parallel blocks of bitmasks and
/// sums the per-block tallies.
fn enumerate_blocks<T, F>(
    bonds: usize,
    init: impl Fn() -> T + Sync + Send,
    visit: F,
    add: impl Fn(&mut T, &T) + Sync + Send,
) -> T
where
    T: Send,
    F: Fn(&mut T, &mut DisjointSets, u32) + Sync + Send,
{
    let total: u64 = 1u64 << bonds;
    let block = 1u64 << BLOCK_BITS.min(bonds as u32);
    let blocks = total / block;
    (0..blocks)
        .into_par_iter()
        .fold(
            || (init(), None::<DisjointSets>),
            |(mut acc, mut ds), b| {
                for m in b * block..(b + 1) * block {
                    let d = ds.get_or_insert_with(|| DisjointSets::new(0));
                    visit(&mut acc, d, m as u32);
                }
                (acc, ds)
            },
        )
        .map(|(acc, _)| acc)
        .reduce(&init, |mut a, b| {
            add(&mut a, &b);
            a
        })
}

fn add_counts(a: &mut Vec<u64>, b: &Vec<u64>) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += *y;
    }
}

fn configure(torus: &Torus, ds: &mut DisjointSets, mask: u32) {
    if ds.len() != torus.volume() {
        *ds = DisjointSets::new(torus.volume());
    } else {
        ds.reset();
    }
    let mut m = mask;
    while m != 0 {
        let b = m.trailing_zeros() as usize;
        let (x, y) = torus.bond_endpoints(b);
        ds.union(x, y);
        m &= m - 1;
    }
}

/// Per-popcount connection tallies of a small torus.
#[derive(Debug, Clone)]
pub struct ExactCounts {
    torus: Torus,
    bonds: usize,
    /// `[k][x * V + y]`: configurations with `k` bonds where `x <-> y`.
    pair: Vec<u64>,
    /// `[k][x * V + y]`: configurations with `k` bonds where the origin reaches both.
    three: Vec<u64>,
    /// `[k][s]`: configurations with `k` bonds whose largest cluster has size `s`.
    cmax: Vec<u64>,
}

impl ExactCounts {
    pub fn enumerate(spec: &TorusSpec) -> Result<Self> {
        let torus = enumerable_torus(spec)?;
        let v = torus.volume();
        let bonds = torus.bond_count();
        let o = torus.origin_index();
        let vv = v * v;
        let stride = 2 * vv + v + 1;
        let counts = enumerate_blocks(
            bonds,
            || vec![0u64; (bonds + 1) * stride],
            |acc, ds, mask| {
                configure(&torus, ds, mask);
                let k = mask.count_ones() as usize;
                let base = k * stride;
                let labels: Vec<usize> = (0..v).map(|x| ds.find(x)).collect();
                let lo = labels[o];
                for x in 0..v {
                    for y in 0..v {
                        if labels[x] == labels[y] {
                            acc[base + x * v + y] += 1;
                            if labels[x] == lo {
                                acc[base + vv + x * v + y] += 1;
                            }
                        }
                    }
                }
                let cmax = ds.set_sizes().max().unwrap_or(0) as usize;
                acc[base + 2 * vv + cmax] += 1;
            },
            add_counts,
        );
        let mut pair = Vec::with_capacity((bonds + 1) * vv);
        let mut three = Vec::with_capacity((bonds + 1) * vv);
        let mut cmax = Vec::with_capacity((bonds + 1) * (v + 1));
        for k in 0..=bonds {
            let base = k * stride;
            pair.extend_from_slice(&counts[base..base + vv]);
            three.extend_from_slice(&counts[base + vv..base + 2 * vv]);
            cmax.extend_from_slice(&counts[base + 2 * vv..base + stride]);
        }
        Ok(ExactCounts {
            torus,
            bonds,
            pair,
            three,
            cmax,
        })
    }

    pub fn torus(&self) -> &Torus {
        &self.torus
    }

    pub fn measure(&self, p: f64) -> Result<ExactMeasure> {
        check_p(p)?;
        let v = self.torus.volume();
        let vv = v * v;
        let w = popcount_weights(p, self.bonds);
        let column = |table: &[u64], stride: usize, i: usize| {
            evaluate((0..=self.bonds).map(|k| table[k * stride + i]), &w)
        };
        let tau: Vec<f64> = (0..vv).map(|i| column(&self.pair, vv, i)).collect();
        let connected3: Vec<f64> = (0..vv).map(|i| column(&self.three, vv, i)).collect();
        let cmax_law: Vec<(u64, f64)> = (1..=v)
            .map(|s| (s as u64, column(&self.cmax, v + 1, s)))
            .filter(|&(_, q)| q > 0.0)
            .collect();
        let o = self.torus.origin_index();
        let binom = |k: usize| -> f64 {
            (0..k).fold(1.0, |acc, i| acc * (self.bonds - i) as f64 / (i + 1) as f64)
        };
        Ok(ExactMeasure {
            spec: self.torus.spec().fields(),
            p,
            volume: v,
            chi: compensated_sum((0..v).map(|x| tau[o * v + x])),
            e_cmax: compensated_sum(cmax_law.iter().map(|&(s, q)| s as f64 * q)),
            total_mass: compensated_sum((0..=self.bonds).map(|k| binom(k) * w[k])),
            tau,
            connected3,
            cmax_law,
            origin: o,
        })
    }
}

/// Exact law of a small torus at one `p`. Vertices are indexed in the
/// lexicographic order of the fundamental domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactMeasure {
    pub spec: SpecFields,
    pub p: f64,
    pub volume: usize,
    /// `volume * volume` matrix of `P(x <-> y)`.
    pub tau: Vec<f64>,
    pub chi: f64,
    pub e_cmax: f64,
    /// `(size, probability)` for every attainable largest-cluster size.
    pub cmax_law: Vec<(u64, f64)>,
    /// `volume * volume` matrix of `P(0 <-> x, 0 <-> y)`.
    pub connected3: Vec<f64>,
    /// Total probability of all configurations; 1 up to rounding.
    pub total_mass: f64,
    origin: usize,
}

impl ExactMeasure {
    pub fn tau_index(&self, x: usize, y: usize) -> f64 {
        self.tau[x * self.volume + y]
    }

    /// `P(0 <-> x)`
    pub fn tau_origin(&self, x: usize) -> f64 {
        self.tau_index(self.origin, x)
    }

    pub fn connected3_index(&self, x: usize, y: usize) -> f64 {
        self.connected3[x * self.volume + y]
    }

    pub fn cmax_probability(&self, size: u64) -> f64 {
        self.cmax_law
            .iter()
            .find(|&&(s, _)| s == size)
            .map_or(0.0, |&(_, q)| q)
    }
}

pub fn enumerate_measure(spec: &TorusSpec, p: f64) -> Result<ExactMeasure> {
    ExactCounts::enumerate(spec)?.measure(p)
}

/// A connection event `{a <-> b}` between two fundamental-domain vertices.
pub type Connection = (Vec<i32>, Vec<i32>);

fn indices(torus: &Torus, ev: &Connection) -> Result<(usize, usize)> {
    let spec = torus.spec();
    for c in [&ev.0, &ev.1] {
        if !spec.in_domain(c) {
            return Err(PercError::InvalidArgument(format!(
                "{c:?} is not a vertex of the fundamental domain"
            )));
        }
    }
    Ok((torus.index_of(&ev.0), torus.index_of(&ev.1)))
}

/// Exact probabilities of `K` events evaluated on the union-find of each configuration.
fn event_probabilities<const K: usize>(
    torus: &Torus,
    p: f64,
    events: impl Fn(&mut DisjointSets) -> [bool; K] + Sync + Send,
) -> [f64; K] {
    let bonds = torus.bond_count();
    let counts = enumerate_blocks(
        bonds,
        || vec![0u64; (bonds + 1) * K],
        |acc, ds, mask| {
            configure(torus, ds, mask);
            let k = mask.count_ones() as usize;
            for (i, hit) in events(ds).into_iter().enumerate() {
                acc[k * K + i] += hit as u64;
            }
        },
        add_counts,
    );
    let w = popcount_weights(p, bonds);
    std::array::from_fn(|i| evaluate((0..=bonds).map(|k| counts[k * K + i]), &w))
}

/// `P(A and B) - P(A) P(B)` for two connection events; FKG says it is non-negative.
pub fn check_fkg(spec: &TorusSpec, p: f64, a: &Connection, b: &Connection) -> Result<f64> {
    check_p(p)?;
    let torus = enumerable_torus(spec)?;
    let (u, v) = indices(&torus, a)?;
    let (s, t) = indices(&torus, b)?;
    let [pa, pb, pab] = event_probabilities(&torus, p, |ds| {
        let ea = ds.connected(u, v);
        let eb = ds.connected(s, t);
        [ea, eb, ea && eb]
    });
    Ok(pab - pa * pb)
}

/// Bond sets of all simple paths from `from` to `to`; the empty set when
/// they coincide.
fn simple_paths(torus: &Torus, from: usize, to: usize) -> Vec<u32> {
    if from == to {
        return vec![0];
    }
    let v = torus.volume();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); v];
    for b in 0..torus.bond_count() {
        let (x, y) = torus.bond_endpoints(b);
        adj[x].push((y, b));
        adj[y].push((x, b));
    }
    let mut out = Vec::new();
    let mut visited = vec![false; v];
    fn dfs(
        x: usize,
        to: usize,
        mask: u32,
        adj: &[Vec<(usize, usize)>],
        visited: &mut [bool],
        out: &mut Vec<u32>,
    ) {
        if x == to {
            out.push(mask);
            return;
        }
        visited[x] = true;
        for &(y, b) in &adj[x] {
            if !visited[y] {
                dfs(y, to, mask | 1 << b, adj, visited, out);
            }
        }
        visited[x] = false;
    }
    dfs(from, to, 0, &adj, &mut visited, &mut out);
    out
}

/// `P(A) P(B) - P(A o B)`, where `A o B` asks for bond-disjoint occupied
/// witnesses of both connections; BK says it is non-negative.
///
/// Every pair of disjoint simple paths marks its union, and the marks are
/// closed upwards over all configurations.
pub fn check_bk(spec: &TorusSpec, p: f64, a: &Connection, b: &Connection) -> Result<f64> {
    check_p(p)?;
    let torus = enumerable_torus(spec)?;
    let (u, v) = indices(&torus, a)?;
    let (s, t) = indices(&torus, b)?;
    let bonds = torus.bond_count();
    let pa_paths = simple_paths(&torus, u, v);
    let pb_paths = simple_paths(&torus, s, t);
    let mut good = vec![false; 1usize << bonds];
    for &x in &pa_paths {
        for &y in &pb_paths {
            if x & y == 0 {
                good[(x | y) as usize] = true;
            }
        }
    }
    for i in 0..bonds {
        let bit = 1usize << i;
        for m in 0..good.len() {
            if m & bit != 0 && good[m ^ bit] {
                good[m] = true;
            }
        }
    }
    let mut counts = vec![0u64; bonds + 1];
    for (m, &g) in good.iter().enumerate() {
        counts[m.count_ones() as usize] += g as u64;
    }
    let w = popcount_weights(p, bonds);
    let p_disjoint = evaluate(counts.into_iter(), &w);
    let [pa, pb] = event_probabilities(&torus, p, |ds| [ds.connected(u, v), ds.connected(s, t)]);
    Ok(pa * pb - p_disjoint)
}

/// `sum_z tau(z) tau(x - z) tau(y - z) - P(0 <-> x, 0 <-> y)`, non-negative by
/// the tree-graph inequality.
pub fn tree_graph_margin(m: &ExactMeasure, x: usize, y: usize) -> f64 {
    let rhs = compensated_sum(
        (0..m.volume).map(|z| m.tau_origin(z) * m.tau_index(z, x) * m.tau_index(z, y)),
    );
    rhs - m.connected3_index(x, y)
}

pub fn check_tree_graph(spec: &TorusSpec, p: f64, x: &[i32], y: &[i32]) -> Result<f64> {
    let counts = ExactCounts::enumerate(spec)?;
    let m = counts.measure(p)?;
    let (xi, yi) = indices(counts.torus(), &(x.to_vec(), y.to_vec()))?;
    Ok(tree_graph_margin(&m, xi, yi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma51Record {
    pub spec: SpecFields,
    pub p: f64,
    pub chi_torus: Estimate,
    pub chi_torus_exact: bool,
    pub chi_lattice: Estimate,
    pub tilde_chi: Estimate,
    pub radius_max: u32,
    pub degree: usize,
    /// `chi_Z (1 - chi_Z tilde_chi - p Omega^2 chi_Z^2 tilde_chi)`
    pub lower_bound: f64,
    pub lower_bound_stderr: f64,
    /// `chi_T - lower_bound`
    pub margin: f64,
    pub margin_stderr: f64,
    /// `margin >= -3 margin_stderr`
    pub holds: bool,
}

/// Checks `chi_T >= chi_Z (1 - chi_Z tilde_chi - p Omega^2 chi_Z^2 tilde_chi)`,
/// using the exact torus susceptibility when the torus is enumerable.
pub fn lemma51_check(
    spec: &TorusSpec,
    p: f64,
    n: u64,
    cap: u64,
    radius_max: u32,
    seed: u64,
) -> Result<Lemma51Record> {
    check_p(p)?;
    let (chi_t, exact) = if spec.bond_count() <= MAX_ENUMERATION_BONDS as u64 {
        (Estimate::exact(enumerate_measure(spec, p)?.chi), true)
    } else {
        (estimate_chi_torus(spec, p, n, seed)?, false)
    };
    let chi_z = estimate_chi_lattice(spec, p, n, cap, seed.wrapping_add(1))?;
    let tc = estimate_tilde_chi(
        spec,
        p,
        n,
        cap,
        TildeChiOptions {
            radius_max: Some(radius_max),
            xi_points: 6,
            ..Default::default()
        },
        seed.wrapping_add(2),
    )?;
    let omega = spec.degree() as f64;
    let (z, t) = (chi_z.mean, tc.estimate.mean);
    let c = p * omega * omega;
    let bound = z * (1.0 - z * t - c * z * z * t);
    let d_z = 1.0 - 2.0 * z * t - 3.0 * c * z * z * t;
    let d_t = -z * z - c * z * z * z;
    let bound_se = ((d_z * chi_z.stderr).powi(2) + (d_t * tc.estimate.stderr).powi(2)).sqrt();
    let margin = chi_t.mean - bound;
    let margin_se = (chi_t.stderr.powi(2) + bound_se.powi(2)).sqrt();
    Ok(Lemma51Record {
        spec: spec.fields(),
        p,
        chi_torus: chi_t,
        chi_torus_exact: exact,
        chi_lattice: chi_z,
        tilde_chi: tc.estimate,
        radius_max: tc.radius_max,
        degree: spec.degree(),
        lower_bound: bound,
        lower_bound_stderr: bound_se,
        margin,
        margin_stderr: margin_se,
        holds: margin >= -3.0 * margin_se,
    })
}
