//! The internal critical point of the torus, scaling-window experiments and
//! log-log exponent fits.

use serde::{Deserialize, Serialize};

use crate::cluster::Torus;
use crate::error::{PercError, Result};
use crate::estimators::{
    check_p, chi_from_samples, cmax_from_samples, estimate_chi_lattice, estimate_chi_torus,
    sample_torus,
};
use crate::lattice::{SpecFields, TorusSpec};
use crate::stats::{fit_line, Estimate, QuantileSummary};

/// Constant `b1 = 288 * 120^3` in the scaling-window probability bound.
pub const WINDOW_B1: f64 = 288.0 * 120.0 * 120.0 * 120.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CriticalConfig {
    /// Target susceptibility is `lambda * V^exponent`.
    pub lambda: f64,
    pub exponent: f64,
    /// Absolute tolerance on the susceptibility.
    pub tolerance: f64,
    pub n_per_eval: u64,
    pub seed: u64,
}

impl Default for CriticalConfig {
    fn default() -> Self {
        CriticalConfig {
            lambda: 0.1,
            exponent: 1.0 / 3.0,
            tolerance: 1e-3,
            n_per_eval: 1000,
            seed: 0,
        }
    }
}

impl CriticalConfig {
    pub fn target(&self, volume: f64) -> f64 {
        self.lambda * volume.powf(self.exponent)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcSolution {
    pub p_hat: f64,
    pub chi: Estimate,
    pub target: f64,
    /// Every `(p, chi)` evaluated, in bisection order.
    pub visited: Vec<(f64, f64)>,
    /// Whether the visited values are non-decreasing in `p`.
    pub monotone: bool,
}

const MIN_BRACKET: f64 = 1e-10;

/// Solves `chi(p) = target` by bisection on a monotone non-decreasing map
/// with `chi(0) <= target <= chi(1)`.
pub fn bisect_monotone(
    target: f64,
    tolerance: f64,
    mut f: impl FnMut(f64) -> Result<Estimate>,
) -> Result<PcSolution> {
    let mut visited = Vec::new();
    let mut eval = |p: f64, visited: &mut Vec<(f64, f64)>| -> Result<Estimate> {
        let e = f(p)?;
        visited.push((p, e.mean));
        Ok(e)
    };
    let finish = |p: f64, chi: Estimate, visited: Vec<(f64, f64)>| {
        let mut sorted = visited.clone();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let monotone = sorted.windows(2).all(|w| w[0].1 <= w[1].1);
        PcSolution {
            p_hat: p,
            chi,
            target,
            visited,
            monotone,
        }
    };
    let c0 = eval(0.0, &mut visited)?;
    if (c0.mean - target).abs() <= tolerance {
        return Ok(finish(0.0, c0, visited));
    }
    let c1 = eval(1.0, &mut visited)?;
    if (c1.mean - target).abs() <= tolerance {
        return Ok(finish(1.0, c1, visited));
    }
    if c0.mean > target || c1.mean < target {
        return Err(PercError::InfeasibleTarget {
            target,
            volume: c1.mean,
        });
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let (mut chi_lo, mut chi_hi) = (c0.mean, c1.mean);
    while hi - lo >= MIN_BRACKET {
        let mid = 0.5 * (lo + hi);
        let c = eval(mid, &mut visited)?;
        if (c.mean - target).abs() <= tolerance {
            return Ok(finish(mid, c, visited));
        }
        if c.mean < target {
            lo = mid;
            chi_lo = c.mean;
        } else {
            hi = mid;
            chi_hi = c.mean;
        }
    }
    Err(PercError::NonConvergence {
        tolerance,
        lo,
        hi,
        chi_lo,
        chi_hi,
    })
}

/// Internal critical point `p` with `chi_T(p) = lambda V^{1/3}`, solved on a
/// frozen set of replicates so that the empirical map is monotone.
pub fn solve_pc_torus(spec: &TorusSpec, config: &CriticalConfig) -> Result<PcSolution> {
    if !(config.lambda > 0.0) || !(config.tolerance > 0.0) {
        return Err(PercError::InvalidArgument(
            "lambda and tolerance must be positive".into(),
        ));
    }
    if config.n_per_eval < 2 {
        return Err(PercError::InvalidArgument(
            "need at least 2 replicates per evaluation".into(),
        ));
    }
    let volume = spec.volume() as f64;
    let target = config.target(volume);
    if target < 1.0 - config.tolerance || target > volume + config.tolerance {
        return Err(PercError::InfeasibleTarget { target, volume });
    }
    let torus = Torus::new(spec.clone())?;
    bisect_monotone(target, config.tolerance, |p| {
        Ok(chi_from_samples(&sample_torus(
            &torus,
            p,
            config.n_per_eval,
            config.seed,
        )))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubcriticalRecord {
    pub q: f64,
    pub p: f64,
    pub chi: Estimate,
    /// `2 / q`
    pub crude_bound: f64,
    pub crude_holds: bool,
    /// `(1/(lambda V^{1/3}) + q)^{-1}`
    pub bracket_lower: f64,
    /// `(1/(lambda V^{1/3}) + q/2)^{-1}`
    pub bracket_upper: f64,
    pub bracket_holds: bool,
}

/// Susceptibility below the critical point, `p = p_c - q / Omega`, against
/// `chi <= 2/q` and the two-sided bracket, each allowed `sigmas` standard errors.
pub fn subcritical_bound_check(
    spec: &TorusSpec,
    p_c_hat: f64,
    lambda: f64,
    q_grid: &[f64],
    n: u64,
    sigmas: f64,
    seed: u64,
) -> Result<Vec<SubcriticalRecord>> {
    let omega = spec.degree() as f64;
    let inv = 1.0 / (lambda * (spec.volume() as f64).cbrt());
    q_grid
        .iter()
        .map(|&q| {
            if !(q > 0.0) {
                return Err(PercError::InvalidArgument(format!(
                    "q = {q} must be positive"
                )));
            }
            let p = p_c_hat - q / omega;
            if p < 0.0 {
                return Err(PercError::InvalidArgument(format!(
                    "p_c - q/Omega = {p} is negative for q = {q}"
                )));
            }
            let chi = estimate_chi_torus(spec, p, n, seed)?;
            let lower = 1.0 / (inv + q);
            let upper = 1.0 / (inv + q / 2.0);
            Ok(SubcriticalRecord {
                q,
                p,
                chi,
                crude_bound: 2.0 / q,
                crude_holds: chi.lower(sigmas) <= 2.0 / q,
                bracket_lower: lower,
                bracket_upper: upper,
                bracket_holds: chi.upper(sigmas) >= lower && chi.lower(sigmas) <= upper,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
}

/// Weighted least squares of `log y` on `log x`; the slope's standard error
/// comes from the weighted residuals.
pub fn exponent_fit(points: &[(f64, f64, f64)]) -> Result<PowerFit> {
    if points.len() < 3 {
        return Err(PercError::DegenerateFit(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    if points
        .iter()
        .any(|&(x, y, w)| !(x > 0.0) || !(y > 0.0) || !(w > 0.0) || !w.is_finite())
    {
        return Err(PercError::DegenerateFit(
            "coordinates and weights must be positive and finite".into(),
        ));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let ws: Vec<f64> = points.iter().map(|p| p.2).collect();
    let fit = fit_line(&xs, &ys, &ws)
        .ok_or_else(|| PercError::DegenerateFit("x values coincide".into()))?;
    let dof = (points.len() - 2) as f64;
    Ok(PowerFit {
        slope: fit.slope,
        intercept: fit.intercept,
        stderr: (fit.rss / dof / fit.sxx).sqrt(),
    })
}

/// Inverse-variance weight of `log(mean)`, or 1 for every point when some
/// estimate carries no sampling error.
fn log_weights(estimates: &[Estimate]) -> Vec<f64> {
    if estimates.iter().all(|e| e.stderr > 0.0 && e.mean > 0.0) {
        estimates
            .iter()
            .map(|e| (e.mean / e.stderr).powi(2))
            .collect()
    } else {
        vec![1.0; estimates.len()]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaFit {
    /// Slope of `log chi` against `log eps`; mean-field theory predicts -1.
    pub exponent: Estimate,
    pub intercept: f64,
    pub points: Vec<(f64, Estimate)>,
    /// `min chi Omega eps` over the grid; at least 1 below the critical point.
    pub lower_constant: f64,
    /// `max chi Omega eps` over the grid.
    pub upper_constant: f64,
}

/// Lattice susceptibility at `p_c_ref - eps` for each `eps`, fitted as a power of `eps`.
pub fn gamma_fit(
    spec: &TorusSpec,
    p_c_ref: f64,
    eps_grid: &[f64],
    n: u64,
    cap: u64,
    seed: u64,
) -> Result<GammaFit> {
    check_p(p_c_ref)?;
    if eps_grid.iter().any(|&e| !(e > 0.0) || p_c_ref - e < 0.0) {
        return Err(PercError::InvalidArgument(
            "eps must be positive and at most p_c_ref".into(),
        ));
    }
    let omega = spec.degree() as f64;
    let mut points = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        points.push((
            eps,
            estimate_chi_lattice(spec, p_c_ref - eps, n, cap, seed)?,
        ));
    }
    let ests: Vec<Estimate> = points.iter().map(|p| p.1).collect();
    let w = log_weights(&ests);
    let fit = exponent_fit(
        &points
            .iter()
            .zip(&w)
            .map(|((e, c), &w)| (*e, c.mean, w))
            .collect::<Vec<_>>(),
    )?;
    let consts: Vec<f64> = points.iter().map(|(e, c)| c.mean * omega * e).collect();
    Ok(GammaFit {
        exponent: Estimate {
            mean: fit.slope,
            stderr: fit.stderr,
            n,
            censored_fraction: ests.iter().map(|e| e.censored_fraction).fold(0.0, f64::max),
        },
        intercept: fit.intercept,
        points,
        lower_constant: consts.iter().copied().fold(f64::INFINITY, f64::min),
        upper_constant: consts.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRecord {
    pub spec: SpecFields,
    pub p: f64,
    pub chi_hat: Estimate,
    pub cmax_quantiles: QuantileSummary,
    pub scaled_quantiles: QuantileSummary,
    pub cmax_mean: Estimate,
    pub omega1: f64,
    pub omega2: f64,
    /// `V^{2/3} (ln V)^{-4/3} / omega1`
    pub lower_barrier: f64,
    /// `omega2 V^{2/3}`
    pub upper_barrier: f64,
    /// Fraction of replicates with the largest cluster between the barriers.
    pub empirical_probability: f64,
    pub b1: f64,
    /// `1 - b1 / (omega1^{3/2} (ln V)^2)`; the omitted `b2/omega2` term only lowers it.
    pub reference_bound: f64,
    /// Median of the largest cluster at or above the lower barrier.
    pub lower_holds: bool,
    /// Median of the largest cluster at or below the upper barrier.
    pub upper_holds: bool,
}

/// Samples the largest cluster at each `(spec, p)` and records how often it
/// falls inside the scaling-window barriers.
pub fn window_experiment(
    points: &[(TorusSpec, f64)],
    omega1: f64,
    omega2: f64,
    n: u64,
    seed: u64,
) -> Result<Vec<WindowRecord>> {
    if !(omega1 >= 1.0 && omega2 >= 1.0) {
        return Err(PercError::InvalidArgument(
            "omega1 and omega2 must be at least 1".into(),
        ));
    }
    if n < 2 {
        return Err(PercError::InvalidArgument(
            "need at least 2 replicates".into(),
        ));
    }
    points
        .iter()
        .map(|(spec, p)| {
            check_p(*p)?;
            let torus = Torus::new(spec.clone())?;
            let v = torus.volume() as f64;
            let samples = sample_torus(&torus, *p, n, seed);
            let summary = cmax_from_samples(&samples, v);
            let log_v = v.ln();
            let lower = v.powf(2.0 / 3.0) * log_v.powf(-4.0 / 3.0) / omega1;
            let upper = omega2 * v.powf(2.0 / 3.0);
            let inside = samples
                .iter()
                .filter(|s| (s.max_size as f64) >= lower && (s.max_size as f64) <= upper)
                .count();
            let median = summary.cmax.median().unwrap_or(f64::NAN);
            Ok(WindowRecord {
                spec: spec.fields(),
                p: *p,
                chi_hat: summary.chi,
                cmax_mean: summary.mean,
                cmax_quantiles: summary.cmax,
                scaled_quantiles: summary.scaled,
                omega1,
                omega2,
                lower_barrier: lower,
                upper_barrier: upper,
                empirical_probability: inside as f64 / n as f64,
                b1: WINDOW_B1,
                reference_bound: 1.0 - WINDOW_B1 / (omega1.powf(1.5) * log_v * log_v),
                lower_holds: median >= lower,
                upper_holds: median <= upper,
            })
        })
        .collect()
}
