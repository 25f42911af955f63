//! Monte Carlo estimators of susceptibilities, two-point functions, the
//! correlation length, the wrap-around mass, the largest cluster and
//! restricted cluster moments.
//!
//! Replicate `i` of an estimator seeded with `seed` always uses
//! `RandomStream::new(seed, i)`, so estimates at different `p` share their
//! randomness.

use serde::{Deserialize, Serialize};

use crate::cluster::{explore_cluster, explore_cluster_with, ExploreOptions, Graph, Torus};
use crate::error::{PercError, Result};
use crate::lattice::{TorusSpec, VertexT, VertexZ};
use crate::parallel::{map_samples, try_map_samples};
use crate::rng::RandomStream;
use crate::stats::{
    fit_line, Accumulator, Estimate, QuantileAccumulator, QuantileSummary, DEFAULT_PROBS,
};

pub(crate) fn check_p(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(PercError::InvalidArgument(format!(
            "p = {p} is not a probability"
        )))
    }
}

fn check_n(n: u64) -> Result<()> {
    if n < 2 {
        return Err(PercError::InvalidArgument(format!(
            "need at least 2 replicates, got {n}"
        )));
    }
    Ok(())
}

fn check_cap(cap: u64) -> Result<()> {
    if cap == 0 {
        return Err(PercError::InvalidArgument(
            "exploration cap must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Per-replicate summary of a full torus decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusSample {
    pub sum_sq_over_v: f64,
    pub max_size: u64,
    pub origin_size: u64,
}

/// Decomposes `n` replicates of `torus` at density `p`.
pub fn sample_torus(torus: &Torus, p: f64, n: u64, seed: u64) -> Vec<TorusSample> {
    let o = torus.origin_index();
    map_samples(n, |i| {
        let mut conf = torus.decompose(p, &RandomStream::new(seed, i));
        let st = conf.stats();
        TorusSample {
            sum_sq_over_v: st.sum_sq_over_v,
            max_size: st.max_size,
            origin_size: conf.cluster_size(o),
        }
    })
}

pub(crate) fn chi_from_samples(samples: &[TorusSample]) -> Estimate {
    let mut acc = Accumulator::new();
    samples.iter().for_each(|s| acc.push(s.sum_sq_over_v));
    acc.estimate()
}

/// Susceptibility of the torus from the size-biased identity
/// `E sum_i |C_i|^2 / V = E|C(0)|`.
pub fn estimate_chi_torus(spec: &TorusSpec, p: f64, n: u64, seed: u64) -> Result<Estimate> {
    check_p(p)?;
    check_n(n)?;
    let torus = Torus::new(spec.clone())?;
    Ok(chi_from_samples(&sample_torus(&torus, p, n, seed)))
}

/// Mean lattice cluster size; censored replicates contribute `cap`, so the
/// result is a lower bound whenever `censored_fraction > 0`.
pub fn estimate_chi_lattice(
    spec: &TorusSpec,
    p: f64,
    n: u64,
    cap: u64,
    seed: u64,
) -> Result<Estimate> {
    check_p(p)?;
    check_n(n)?;
    check_cap(cap)?;
    let o = VertexZ::origin(spec.dim());
    let sizes = try_map_samples(n, |i| {
        let r = explore_cluster(
            Graph::Lattice(spec),
            &o,
            p,
            &RandomStream::new(seed, i),
            cap,
        )?;
        Ok::<_, PercError>((r.size().min(cap), r.censored))
    })?;
    let mut acc = Accumulator::new();
    sizes
        .iter()
        .for_each(|&(s, c)| acc.push_censored(s as f64, c));
    Ok(acc.estimate())
}

/// Graph selector for two-point estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    Torus,
    Lattice,
}

/// Connection probability from the origin to `x`. On the torus `x` is
/// reduced to its class. Censored explorations that did not reach `x`
/// count as misses and raise `censored_fraction`.
pub fn estimate_tau(
    kind: GraphKind,
    spec: &TorusSpec,
    x: &VertexZ,
    p: f64,
    n: u64,
    cap: u64,
    seed: u64,
) -> Result<Estimate> {
    check_p(p)?;
    check_n(n)?;
    check_cap(cap)?;
    if x.dim() != spec.dim() {
        return Err(PercError::InvalidArgument(
            "point dimension mismatch".into(),
        ));
    }
    let o = VertexZ::origin(spec.dim());
    let torus = match kind {
        GraphKind::Torus => Some(Torus::new(spec.clone())?),
        GraphKind::Lattice => None,
    };
    let target = match kind {
        GraphKind::Torus => spec.canonical_class(x).to_lattice(),
        GraphKind::Lattice => x.clone(),
    };
    let opts = ExploreOptions {
        cap,
        schedule: Default::default(),
        target: Some(target),
    };
    let hits = try_map_samples(n, |i| {
        let graph = match &torus {
            Some(t) => Graph::Torus(t),
            None => Graph::Lattice(spec),
        };
        let r = explore_cluster_with(graph, &o, p, &RandomStream::new(seed, i), &opts)?;
        Ok::<_, PercError>((r.reached_target, r.censored))
    })?;
    let mut acc = Accumulator::new();
    hits.iter()
        .for_each(|&(h, c)| acc.push_censored(h as u8 as f64, c && !h));
    Ok(acc.estimate())
}

/// Two-point estimates along the first axis at distances `1..=n_points`,
/// all read from the same lattice explorations.
pub fn axis_profile(
    spec: &TorusSpec,
    p: f64,
    n_points: usize,
    n: u64,
    cap: u64,
    seed: u64,
) -> Result<Vec<Estimate>> {
    check_p(p)?;
    check_n(n)?;
    check_cap(cap)?;
    let d = spec.dim();
    let o = VertexZ::origin(d);
    let hits = try_map_samples(n, |i| {
        let r = explore_cluster(
            Graph::Lattice(spec),
            &o,
            p,
            &RandomStream::new(seed, i),
            cap,
        )?;
        let mut h = vec![false; n_points];
        for v in &r.cluster {
            let c = v.coords();
            if c[0] >= 1 && (c[0] as usize) <= n_points && c[1..].iter().all(|&z| z == 0) {
                h[c[0] as usize - 1] = true;
            }
        }
        Ok::<_, PercError>((h, r.censored))
    })?;
    Ok((0..n_points)
        .map(|k| {
            let mut acc = Accumulator::new();
            hits.iter()
                .for_each(|(h, c)| acc.push_censored(h[k] as u8 as f64, *c && !h[k]));
            acc.estimate()
        })
        .collect())
}

/// Correlation length from a two-point profile `tau[k-1] ~ exp(-k / xi)`:
/// ordinary least squares of `-log tau` on `k`, with the slope's variance
/// propagated from the per-point standard errors.
pub fn xi_from_profile(tau: &[Estimate]) -> Result<Estimate> {
    if tau.len() < 2 {
        return Err(PercError::DegenerateFit(
            "need at least two distances".into(),
        ));
    }
    if let Some(k) = tau.iter().position(|t| !(t.mean > 0.0)) {
        return Err(PercError::DegenerateFit(format!(
            "two-point estimate is zero at distance {}",
            k + 1
        )));
    }
    let xs: Vec<f64> = (1..=tau.len()).map(|k| k as f64).collect();
    let ys: Vec<f64> = tau.iter().map(|t| -t.mean.ln()).collect();
    let fit = fit_line(&xs, &ys, &vec![1.0; xs.len()]).expect("distinct distances");
    if !(fit.slope > 0.0) {
        return Err(PercError::DegenerateFit(format!(
            "two-point function does not decay (slope {})",
            fit.slope
        )));
    }
    let var_slope: f64 = xs
        .iter()
        .zip(tau)
        .map(|(x, t)| {
            let c = (x - fit.xbar) / fit.sxx;
            c * c * (t.stderr / t.mean).powi(2)
        })
        .sum();
    let n = tau.iter().map(|t| t.n).min().unwrap_or(0);
    Ok(Estimate {
        mean: 1.0 / fit.slope,
        stderr: var_slope.sqrt() / (fit.slope * fit.slope),
        n,
        censored_fraction: tau.iter().map(|t| t.censored_fraction).fold(0.0, f64::max),
    })
}

pub fn estimate_xi(
    spec: &TorusSpec,
    p: f64,
    n_points: usize,
    n: u64,
    cap: u64,
    seed: u64,
) -> Result<Estimate> {
    xi_from_profile(&axis_profile(spec, p, n_points, n, cap, seed)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TildeChiEstimate {
    pub estimate: Estimate,
    /// Class achieving the supremum.
    pub argmax: Vec<i32>,
    pub radius_max: u32,
    /// Upper bound on the neglected mass beyond `radius_max` from
    /// `tau(z) <= exp(-||z|| / xi)`, when a correlation length was available.
    pub tail_bound: Option<f64>,
    pub xi: Option<f64>,
    /// `estimate * V^{2/3}`, the constant a bound `tilde_chi <= C V^{-2/3}` would need here.
    pub implied_constant: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TildeChiOptions {
    /// Largest sup-norm included; defaults to `r/2 + 8 xi`.
    pub radius_max: Option<u32>,
    /// Correlation length to use instead of estimating one.
    pub xi: Option<f64>,
    /// Axis distances used when the correlation length is estimated.
    pub xi_points: usize,
}

const XI_SEED_SALT: u64 = 0x5851_f42d_4c95_7f2d;

/// Upper bound on `sum_{z ~ y, ||z|| > radius} exp(-||z|| / xi)` for any class.
pub fn tail_mass_bound(spec: &TorusSpec, radius: u32, xi: f64) -> f64 {
    let r = spec.side() as f64;
    let d = spec.dim() as i32;
    let mut total = 0.0;
    let mut m = radius as f64 + 1.0;
    loop {
        // representatives of a class with sup-norm at most m
        let count = ((2.0 * m / r).floor() + 2.0).powi(d);
        let term = count * (-m / xi).exp();
        total += term;
        if term < 1e-18 * total.max(1e-300) || m > radius as f64 + 1e6 {
            break;
        }
        m += 1.0;
    }
    total
}

/// `sup_y sum_{z ~ y, r/2 <= ||z|| <= radius_max} tau(z)` on the lattice.
pub fn estimate_tilde_chi(
    spec: &TorusSpec,
    p: f64,
    n: u64,
    cap: u64,
    opts: TildeChiOptions,
    seed: u64,
) -> Result<TildeChiEstimate> {
    check_p(p)?;
    check_n(n)?;
    check_cap(cap)?;
    let side = spec.side();
    let half = side.div_ceil(2);
    let xi = match (opts.xi, opts.radius_max) {
        (Some(x), _) => Some(x),
        _ if p == 0.0 => None,
        (None, None) => {
            Some(estimate_xi(spec, p, opts.xi_points.max(2), n, cap, seed ^ XI_SEED_SALT)?.mean)
        }
        (None, Some(_)) => estimate_xi(spec, p, opts.xi_points.max(2), n, cap, seed ^ XI_SEED_SALT)
            .ok()
            .map(|e| e.mean),
    };
    let radius_max = match opts.radius_max {
        Some(rm) => rm,
        None => half + (8.0 * xi.unwrap_or(0.0)).ceil() as u32,
    };
    if radius_max < half {
        return Err(PercError::InvalidArgument(format!(
            "radius_max {radius_max} is below r/2"
        )));
    }
    let torus = Torus::new(spec.clone())?;
    let v = torus.volume();
    let o = VertexZ::origin(spec.dim());
    let per = try_map_samples(n, |i| {
        let r = explore_cluster(
            Graph::Lattice(spec),
            &o,
            p,
            &RandomStream::new(seed, i),
            cap,
        )?;
        let mut counts: Vec<(u32, u32)> = Vec::new();
        let mut idx: Vec<u32> = r
            .cluster
            .iter()
            .filter(|z| {
                let s = z.sup_norm();
                2 * s >= side && s <= radius_max
            })
            .map(|z| torus.class_index(z.coords()) as u32)
            .collect();
        idx.sort_unstable();
        for c in idx {
            match counts.last_mut() {
                Some((k, m)) if *k == c => *m += 1,
                _ => counts.push((c, 1)),
            }
        }
        Ok::<_, PercError>((counts, r.censored))
    })?;
    let mut sum = vec![0.0f64; v];
    let mut sumsq = vec![0.0f64; v];
    let mut censored = 0u64;
    for (counts, c) in &per {
        censored += *c as u64;
        for &(k, m) in counts {
            sum[k as usize] += m as f64;
            sumsq[k as usize] += (m as f64) * (m as f64);
        }
    }
    let nf = n as f64;
    let (best, _) = sum
        .iter()
        .enumerate()
        .fold((0usize, f64::NEG_INFINITY), |acc, (i, &s)| {
            if s > acc.1 {
                (i, s)
            } else {
                acc
            }
        });
    let mean = sum[best] / nf;
    let var = ((sumsq[best] - nf * mean * mean) / (nf - 1.0)).max(0.0);
    Ok(TildeChiEstimate {
        estimate: Estimate {
            mean,
            stderr: (var / nf).sqrt(),
            n,
            censored_fraction: censored as f64 / nf,
        },
        argmax: torus.coords_of(best).to_vec(),
        radius_max,
        implied_constant: mean * (v as f64).powf(2.0 / 3.0),
        tail_bound: if p == 0.0 {
            Some(0.0)
        } else {
            xi.map(|x| tail_mass_bound(spec, radius_max, x))
        },
        xi,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmaxSummary {
    pub cmax: QuantileSummary,
    /// Quantiles of `|C_max| V^{-2/3}`.
    pub scaled: QuantileSummary,
    pub mean: Estimate,
    pub chi: Estimate,
}

pub(crate) fn cmax_from_samples(samples: &[TorusSample], volume: f64) -> CmaxSummary {
    let mut q = QuantileAccumulator::new();
    let mut qs = QuantileAccumulator::new();
    let mut acc = Accumulator::new();
    let scale = volume.powf(-2.0 / 3.0);
    for s in samples {
        q.push(s.max_size as f64);
        qs.push(s.max_size as f64 * scale);
        acc.push(s.max_size as f64);
    }
    CmaxSummary {
        cmax: q.summary(&DEFAULT_PROBS),
        scaled: qs.summary(&DEFAULT_PROBS),
        mean: acc.estimate(),
        chi: chi_from_samples(samples),
    }
}

pub fn cmax_distribution(spec: &TorusSpec, p: f64, n: u64, seed: u64) -> Result<CmaxSummary> {
    check_p(p)?;
    check_n(n)?;
    let torus = Torus::new(spec.clone())?;
    Ok(cmax_from_samples(
        &sample_torus(&torus, p, n, seed),
        torus.volume() as f64,
    ))
}

/// `E |C_Z(x) ∩ B|^k` for the box `B` of the torus, with clusters taken on
/// the whole lattice.
pub fn cluster_moment_bulk(
    spec: &TorusSpec,
    x: &VertexT,
    k: u32,
    p: f64,
    n: u64,
    cap: u64,
    seed: u64,
) -> Result<Estimate> {
    check_p(p)?;
    check_n(n)?;
    check_cap(cap)?;
    if !(1..=3).contains(&k) {
        return Err(PercError::InvalidArgument(format!(
            "moment order {k} not in 1..=3"
        )));
    }
    let start = x.to_lattice();
    let vals = try_map_samples(n, |i| {
        let r = explore_cluster(
            Graph::Lattice(spec),
            &start,
            p,
            &RandomStream::new(seed, i),
            cap,
        )?;
        let inside = r
            .cluster
            .iter()
            .filter(|v| spec.in_domain(v.coords()))
            .count();
        Ok::<_, PercError>(((inside as f64).powi(k as i32), r.censored))
    })?;
    let mut acc = Accumulator::new();
    vals.iter().for_each(|&(v, c)| acc.push_censored(v, c));
    Ok(acc.estimate())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(r: u32) -> TorusSpec {
        TorusSpec::nearest_neighbor(1, r).unwrap()
    }

    #[test]
    fn chi_torus_closed_forms() {
        let s = line(3);
        let e = estimate_chi_torus(&s, 0.0, 100, 1).unwrap();
        assert_eq!((e.mean, e.stderr), (1.0, 0.0));
        let e = estimate_chi_torus(&s, 1.0, 100, 1).unwrap();
        assert_eq!((e.mean, e.stderr), (3.0, 0.0));
        let e = estimate_chi_torus(&s, 0.5, 100_000, 7).unwrap();
        assert!(e.within(2.25, 3.0), "{e:?}");
        assert_eq!(e.censored_fraction, 0.0);
    }

    #[test]
    fn chi_torus_requires_two_replicates() {
        assert!(estimate_chi_torus(&line(3), 0.5, 1, 1).is_err());
        assert!(estimate_chi_torus(&line(3), 1.5, 10, 1).is_err());
    }

    #[test]
    fn chi_torus_is_monotone_per_replicate() {
        let t = Torus::new(TorusSpec::nearest_neighbor(2, 5).unwrap()).unwrap();
        let a = sample_torus(&t, 0.3, 500, 4);
        let b = sample_torus(&t, 0.45, 500, 4);
        for (x, y) in a.iter().zip(&b) {
            assert!(x.sum_sq_over_v <= y.sum_sq_over_v);
            assert!(x.max_size <= y.max_size);
        }
    }

    #[test]
    fn chi_lattice_line() {
        let s = line(3);
        assert_eq!(estimate_chi_lattice(&s, 0.0, 10, 10, 0).unwrap().mean, 1.0);
        let e = estimate_chi_lattice(&s, 0.5, 100_000, 10_000, 3).unwrap();
        assert!(e.within(3.0, 3.0), "{e:?}");
        let e = estimate_chi_lattice(&s, 0.9, 100_000, 10_000, 3).unwrap();
        assert!(e.within(19.0, 3.0), "{e:?}");
        assert_eq!(e.censored_fraction, 0.0);
    }

    #[test]
    fn chi_lattice_flags_censoring() {
        let s = line(3);
        let e = estimate_chi_lattice(&s, 1.0, 10, 50, 0).unwrap();
        assert_eq!(e.censored_fraction, 1.0);
        assert_eq!(e.mean, 50.0);
    }

    #[test]
    fn tau_examples() {
        let s = line(3);
        let o = VertexZ::origin(1);
        let e = estimate_tau(GraphKind::Torus, &s, &o, 0.3, 10, 10, 0).unwrap();
        assert_eq!((e.mean, e.stderr), (1.0, 0.0));
        let x = VertexZ::new(&[1]);
        let e = estimate_tau(GraphKind::Lattice, &s, &x, 0.0, 10, 10, 0).unwrap();
        assert_eq!(e.mean, 0.0);
        let e = estimate_tau(GraphKind::Torus, &s, &x, 0.5, 100_000, 10, 5).unwrap();
        assert!(e.within(0.625, 3.0), "{e:?}");
        // a lattice point and its class agree on the torus
        let far =
            estimate_tau(GraphKind::Torus, &s, &VertexZ::new(&[4]), 0.5, 1000, 10, 5).unwrap();
        let near = estimate_tau(GraphKind::Torus, &s, &x, 0.5, 1000, 10, 5).unwrap();
        assert_eq!(far, near);
    }

    #[test]
    fn tau_symmetry_on_torus() {
        let s = TorusSpec::nearest_neighbor(2, 5).unwrap();
        let a = estimate_tau(
            GraphKind::Torus,
            &s,
            &VertexZ::new(&[1, 2]),
            0.45,
            40_000,
            100,
            11,
        )
        .unwrap();
        let b = estimate_tau(
            GraphKind::Torus,
            &s,
            &VertexZ::new(&[-1, -2]),
            0.45,
            40_000,
            100,
            12,
        )
        .unwrap();
        let pooled = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
        assert!((a.mean - b.mean).abs() <= 4.0 * pooled);
    }

    #[test]
    fn xi_fit_recovers_synthetic_exponential() {
        let xi = 2.5f64;
        let tau: Vec<Estimate> = (1..=6)
            .map(|k| Estimate::exact((-(k as f64) / xi).exp()))
            .collect();
        let e = xi_from_profile(&tau).unwrap();
        assert!((e.mean - xi).abs() < 1e-12);
        assert_eq!(e.stderr, 0.0);
        let mut bad = tau.clone();
        bad[3] = Estimate::exact(0.0);
        assert!(matches!(
            xi_from_profile(&bad),
            Err(PercError::DegenerateFit(_))
        ));
    }

    #[test]
    fn xi_on_the_line() {
        let s = line(3);
        let e = estimate_xi(&s, 0.5, 6, 100_000, 100_000, 21).unwrap();
        let want = 1.0 / 2f64.ln();
        assert!((e.mean / want - 1.0).abs() < 0.05, "{e:?}");
        let e = estimate_xi(&s, 0.9, 8, 100_000, 100_000, 22).unwrap();
        let want = 1.0 / (10.0f64 / 9.0).ln();
        assert!((e.mean / want - 1.0).abs() < 0.05, "{e:?}");
    }

    #[test]
    fn tilde_chi_on_the_line() {
        let s4 = line(4);
        let opts = TildeChiOptions {
            radius_max: Some(40),
            ..Default::default()
        };
        let zero = estimate_tilde_chi(&s4, 0.0, 10, 100, opts, 0).unwrap();
        assert_eq!(zero.estimate.mean, 0.0);
        let e = estimate_tilde_chi(&s4, 0.5, 100_000, 100_000, opts, 2).unwrap();
        assert!(e.estimate.within(8.0 / 15.0, 3.0), "{e:?}");
        assert_eq!(
            e.argmax.iter().map(|c| c.rem_euclid(4)).collect::<Vec<_>>(),
            vec![2]
        );
        let e6 = estimate_tilde_chi(&line(6), 0.5, 100_000, 100_000, opts, 2).unwrap();
        assert!(e6.estimate.mean < e.estimate.mean);
        assert!(e.tail_bound.unwrap() < 1e-6);
    }

    #[test]
    fn tilde_chi_default_radius_uses_xi() {
        let e = estimate_tilde_chi(
            &line(4),
            0.5,
            20_000,
            100_000,
            TildeChiOptions {
                xi_points: 6,
                ..Default::default()
            },
            3,
        )
        .unwrap();
        let xi = e.xi.unwrap();
        assert_eq!(e.radius_max, 2 + (8.0 * xi).ceil() as u32);
    }

    #[test]
    fn tail_bound_dominates_exact_line_tail() {
        // class 0 on r = 4: representatives +-4k, tau = p^{4k}
        let s = line(4);
        let p: f64 = 0.5;
        let xi = -1.0 / p.ln();
        let radius = 10;
        let exact: f64 = (3..200).map(|k| 2.0 * p.powi(4 * k)).sum();
        assert!(tail_mass_bound(&s, radius, xi) >= exact);
    }

    #[test]
    fn cmax_law_on_triangle() {
        let s = line(3);
        let z = cmax_distribution(&s, 0.0, 10, 0).unwrap();
        assert!(z.cmax.quantiles.iter().all(|&q| q == 1.0));
        let o = cmax_distribution(&s, 1.0, 10, 0).unwrap();
        assert!(o.cmax.quantiles.iter().all(|&q| q == 3.0));
        let h = cmax_distribution(&s, 0.5, 100_000, 8).unwrap();
        assert!(h.mean.within(2.375, 3.0), "{h:?}");
        // P(C_max <= 2) is exactly 1/2, so the sample median sits on the edge
        let med = h.cmax.median().unwrap();
        assert!(med == 2.0 || med == 3.0);
        assert_eq!(h.cmax.quantile(0.99), Some(3.0));
        assert_eq!(h.cmax.quantile(0.01), Some(1.0));
    }

    #[test]
    fn bulk_moments_on_the_line() {
        let s = line(3);
        let x = s.torus_origin();
        for k in 1..=3 {
            let e = cluster_moment_bulk(&s, &x, k, 0.0, 10, 10, 0).unwrap();
            assert_eq!(e.mean, 1.0);
        }
        let e = cluster_moment_bulk(&s, &x, 3, 0.5, 100_000, 10_000, 4).unwrap();
        assert!(e.within(11.0, 3.0), "{e:?}");
        assert!(cluster_moment_bulk(&s, &x, 4, 0.5, 10, 10, 0).is_err());
    }
}
