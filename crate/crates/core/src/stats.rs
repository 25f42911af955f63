//! Accumulators, estimates, quantiles and goodness-of-fit tests.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Mean, standard error and sample count of a Monte Carlo quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
    pub censored_fraction: f64,
}

impl Estimate {
    /// A value known without sampling error.
    pub fn exact(value: f64) -> Self {
        Estimate {
            mean: value,
            stderr: 0.0,
            n: 1,
            censored_fraction: 0.0,
        }
    }

    pub fn from_values(values: &[f64]) -> Self {
        let mut acc = Accumulator::new();
        values.iter().for_each(|&v| acc.push(v));
        acc.estimate()
    }

    /// Sample variance implied by `stderr` and `n`.
    pub fn variance(&self) -> f64 {
        self.stderr * self.stderr * self.n as f64
    }

    /// Pools two estimates as if their samples had been accumulated together.
    pub fn merge(&self, other: &Estimate) -> Estimate {
        let mut a = Accumulator::from_estimate(self);
        a.merge(&Accumulator::from_estimate(other));
        a.estimate()
    }

    /// Whether `value` lies within `k` standard errors of the mean; with zero
    /// standard error the comparison is up to rounding.
    pub fn within(&self, value: f64, k: f64) -> bool {
        let tol = (k * self.stderr).max(1e-12 * value.abs().max(1.0));
        (self.mean - value).abs() <= tol
    }

    /// `mean - k * stderr`
    pub fn lower(&self, k: f64) -> f64 {
        self.mean - k * self.stderr
    }

    /// `mean + k * stderr`
    pub fn upper(&self, k: f64) -> f64 {
        self.mean + k * self.stderr
    }
}

/// Streaming mean/variance (Welford) with exact pooled merges.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Accumulator {
    n: u64,
    mean: f64,
    m2: f64,
    censored: u64,
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    fn from_estimate(e: &Estimate) -> Self {
        let var = e.variance();
        Accumulator {
            n: e.n,
            mean: e.mean,
            m2: var * (e.n.saturating_sub(1)) as f64,
            censored: (e.censored_fraction * e.n as f64).round() as u64,
        }
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn push_censored(&mut self, x: f64, censored: bool) {
        self.push(x);
        self.censored += censored as u64;
    }

    pub fn merge(&mut self, other: &Accumulator) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        self.mean = mean;
        self.n = n;
        self.censored += other.censored;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn estimate(&self) -> Estimate {
        let n = self.n;
        let stderr = if n > 1 {
            (self.m2.max(0.0) / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        Estimate {
            mean: self.mean,
            stderr,
            n,
            censored_fraction: if n == 0 {
                0.0
            } else {
                self.censored as f64 / n as f64
            },
        }
    }
}

/// Ratio of means `E[num] / E[den]` with a delta-method standard error.
pub fn ratio_estimate(num: &[f64], den: &[f64]) -> Estimate {
    assert_eq!(num.len(), den.len());
    let n = num.len();
    let nf = n as f64;
    let mx = num.iter().sum::<f64>() / nf;
    let my = den.iter().sum::<f64>() / nf;
    let r = mx / my;
    let stderr = if n > 1 && my != 0.0 {
        let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
        for (&x, &y) in num.iter().zip(den) {
            sxx += (x - mx) * (x - mx);
            syy += (y - my) * (y - my);
            sxy += (x - mx) * (y - my);
        }
        let d = nf - 1.0;
        let var = (sxx / d - 2.0 * r * sxy / d + r * r * syy / d) / (my * my);
        (var.max(0.0) / nf).sqrt()
    } else {
        0.0
    };
    Estimate {
        mean: r,
        stderr,
        n: n as u64,
        censored_fraction: 0.0,
    }
}

/// Neumaier-compensated sum.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Probability points reported by default.
pub const DEFAULT_PROBS: [f64; 7] = [0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileSummary {
    pub probs: Vec<f64>,
    pub quantiles: Vec<f64>,
    pub n: u64,
    /// False once the sample outgrew exact storage and a sketch was used.
    pub exact: bool,
}

impl QuantileSummary {
    pub fn from_values(values: &[f64], probs: &[f64]) -> Self {
        let mut acc = QuantileAccumulator::new();
        values.iter().for_each(|&v| acc.push(v));
        acc.summary(probs)
    }

    pub fn quantile(&self, prob: f64) -> Option<f64> {
        self.probs
            .iter()
            .position(|&p| (p - prob).abs() < 1e-12)
            .map(|i| self.quantiles[i])
    }

    pub fn median(&self) -> Option<f64> {
        self.quantile(0.5)
    }
}

fn type1_index(prob: f64, total: f64) -> f64 {
    (prob * total - 1e-9).ceil().max(1.0)
}

const EXACT_LIMIT: usize = 1_000_000;
const SKETCH_K: usize = 4096;

/// Stores the full sample up to a million points, then a compacting sketch.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantileAccumulator {
    Exact(Vec<f64>),
    Sketch(QuantileSketch),
}

impl Default for QuantileAccumulator {
    fn default() -> Self {
        QuantileAccumulator::Exact(Vec::new())
    }
}

impl QuantileAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        match self {
            QuantileAccumulator::Exact(v) => {
                v.push(x);
                if v.len() > EXACT_LIMIT {
                    let mut s = QuantileSketch::new(SKETCH_K);
                    v.iter().for_each(|&y| s.push(y));
                    *self = QuantileAccumulator::Sketch(s);
                }
            }
            QuantileAccumulator::Sketch(s) => s.push(x),
        }
    }

    pub fn merge(&mut self, other: &QuantileAccumulator) {
        match other {
            QuantileAccumulator::Exact(v) => v.iter().for_each(|&x| self.push(x)),
            QuantileAccumulator::Sketch(o) => {
                let mut s = match std::mem::take(self) {
                    QuantileAccumulator::Exact(v) => {
                        let mut s = QuantileSketch::new(SKETCH_K);
                        v.iter().for_each(|&y| s.push(y));
                        s
                    }
                    QuantileAccumulator::Sketch(s) => s,
                };
                s.merge(o);
                *self = QuantileAccumulator::Sketch(s);
            }
        }
    }

    pub fn len(&self) -> u64 {
        match self {
            QuantileAccumulator::Exact(v) => v.len() as u64,
            QuantileAccumulator::Sketch(s) => s.n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Type-1 inverse empirical CDF at each probability point.
    pub fn summary(&self, probs: &[f64]) -> QuantileSummary {
        match self {
            QuantileAccumulator::Exact(v) => {
                let mut sorted = v.clone();
                sorted.sort_by(f64::total_cmp);
                let n = sorted.len();
                let quantiles = probs
                    .iter()
                    .map(|&p| {
                        if n == 0 {
                            f64::NAN
                        } else {
                            let k = type1_index(p, n as f64) as usize;
                            sorted[k.min(n) - 1]
                        }
                    })
                    .collect();
                QuantileSummary {
                    probs: probs.to_vec(),
                    quantiles,
                    n: n as u64,
                    exact: true,
                }
            }
            QuantileAccumulator::Sketch(s) => QuantileSummary {
                probs: probs.to_vec(),
                quantiles: probs.iter().map(|&p| s.quantile(p)).collect(),
                n: s.n,
                exact: false,
            },
        }
    }
}

/// Deterministic mergeable quantile sketch: level `l` holds items of weight
/// `2^l`; a full level is sorted and every other item is promoted.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileSketch {
    k: usize,
    levels: Vec<Vec<f64>>,
    flips: Vec<bool>,
    n: u64,
}

impl QuantileSketch {
    pub fn new(k: usize) -> Self {
        QuantileSketch {
            k: k.max(2),
            levels: vec![Vec::new()],
            flips: vec![false],
            n: 0,
        }
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.levels[0].push(x);
        self.compact_from(0);
    }

    pub fn merge(&mut self, other: &QuantileSketch) {
        self.n += other.n;
        for (l, items) in other.levels.iter().enumerate() {
            while self.levels.len() <= l {
                self.levels.push(Vec::new());
                self.flips.push(false);
            }
            self.levels[l].extend_from_slice(items);
        }
        for l in 0..self.levels.len() {
            self.compact_from(l);
        }
    }

    fn compact_from(&mut self, mut l: usize) {
        while self.levels[l].len() >= self.k {
            if self.levels.len() == l + 1 {
                self.levels.push(Vec::new());
                self.flips.push(false);
            }
            let mut items = std::mem::take(&mut self.levels[l]);
            items.sort_by(f64::total_cmp);
            if items.len() % 2 == 1 {
                self.levels[l].push(items.pop().unwrap());
            }
            let offset = self.flips[l] as usize;
            self.flips[l] = !self.flips[l];
            let promoted: Vec<f64> = items.iter().skip(offset).step_by(2).copied().collect();
            self.levels[l + 1].extend(promoted);
            l += 1;
        }
    }

    pub fn quantile(&self, prob: f64) -> f64 {
        let mut items: Vec<(f64, u64)> = self
            .levels
            .iter()
            .enumerate()
            .flat_map(|(l, v)| v.iter().map(move |&x| (x, 1u64 << l)))
            .collect();
        if items.is_empty() {
            return f64::NAN;
        }
        items.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: u64 = items.iter().map(|x| x.1).sum();
        let want = type1_index(prob, total as f64);
        let mut acc = 0u64;
        for &(x, w) in &items {
            acc += w;
            if acc as f64 >= want {
                return x;
            }
        }
        items.last().unwrap().0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

fn chi_square_p(statistic: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    1.0 - ChiSquared::new(dof as f64).unwrap().cdf(statistic)
}

/// Pools adjacent bins (from the right) until every pooled `weight` reaches `min`.
fn pool_bins(weights: &[f64], min: f64) -> Vec<std::ops::Range<usize>> {
    let mut groups = Vec::new();
    let mut start = 0;
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if acc >= min {
            groups.push(start..i + 1);
            start = i + 1;
            acc = 0.0;
        }
    }
    if start < weights.len() {
        match groups.last_mut() {
            Some(last) => last.end = weights.len(),
            None => groups.push(0..weights.len()),
        }
    }
    groups
}

/// Goodness of fit of observed counts to a probability vector; bins with
/// small expected counts are pooled.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> ChiSquareTest {
    assert_eq!(observed.len(), probs.len());
    let n: u64 = observed.iter().sum();
    let expected: Vec<f64> = probs.iter().map(|&p| p * n as f64).collect();
    let groups = pool_bins(&expected, 5.0);
    let mut stat = 0.0;
    for g in &groups {
        let o: f64 = observed[g.clone()].iter().map(|&x| x as f64).sum();
        let e: f64 = expected[g.clone()].iter().sum();
        if e > 0.0 {
            stat += (o - e) * (o - e) / e;
        } else if o > 0.0 {
            stat = f64::INFINITY;
        }
    }
    let dof = groups.len().saturating_sub(1);
    ChiSquareTest {
        statistic: stat,
        dof,
        p_value: chi_square_p(stat, dof),
    }
}

/// Homogeneity test of two histograms over the same bins.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> ChiSquareTest {
    let len = a.len().max(b.len());
    let get = |v: &[u64], i: usize| v.get(i).copied().unwrap_or(0) as f64;
    let na: f64 = a.iter().map(|&x| x as f64).sum();
    let nb: f64 = b.iter().map(|&x| x as f64).sum();
    let total = na + nb;
    let combined: Vec<f64> = (0..len).map(|i| get(a, i) + get(b, i)).collect();
    let min_share = na.min(nb) / total;
    let groups = pool_bins(&combined, 5.0 / min_share.max(1e-300));
    let mut stat = 0.0;
    for g in &groups {
        let oa: f64 = g.clone().map(|i| get(a, i)).sum();
        let ob: f64 = g.clone().map(|i| get(b, i)).sum();
        let c = oa + ob;
        if c == 0.0 {
            continue;
        }
        let ea = c * na / total;
        let eb = c * nb / total;
        stat += (oa - ea).powi(2) / ea + (ob - eb).powi(2) / eb;
    }
    let dof = groups.len().saturating_sub(1);
    ChiSquareTest {
        statistic: stat,
        dof,
        p_value: chi_square_p(stat, dof),
    }
}

/// Counts of each value in `0..=max`, with larger values in the last bin.
pub fn histogram(values: impl IntoIterator<Item = u64>, max: u64) -> Vec<u64> {
    let mut h = vec![0u64; max as usize + 1];
    for v in values {
        h[v.min(max) as usize] += 1;
    }
    h
}

/// Weighted least-squares line `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// `sum w (x - xbar)^2`
    pub sxx: f64,
    pub xbar: f64,
    /// Weighted residual sum of squares.
    pub rss: f64,
}

pub(crate) fn fit_line(xs: &[f64], ys: &[f64], ws: &[f64]) -> Option<LineFit> {
    let sw: f64 = ws.iter().sum();
    if !(sw > 0.0) || xs.len() < 2 {
        return None;
    }
    let xbar = xs.iter().zip(ws).map(|(x, w)| x * w).sum::<f64>() / sw;
    let ybar = ys.iter().zip(ws).map(|(y, w)| y * w).sum::<f64>() / sw;
    let sxx: f64 = xs.iter().zip(ws).map(|(x, w)| w * (x - xbar).powi(2)).sum();
    if !(sxx > 1e-300 * sw) {
        return None;
    }
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .zip(ws)
        .map(|((x, y), w)| w * (x - xbar) * (y - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let rss = xs
        .iter()
        .zip(ys)
        .zip(ws)
        .map(|((x, y), w)| w * (y - intercept - slope * x).powi(2))
        .sum();
    Some(LineFit {
        slope,
        intercept,
        sxx,
        xbar,
        rss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn estimate_of_constant_has_zero_error() {
        let e = Estimate::from_values(&[1.0; 50]);
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.stderr, 0.0);
        assert_eq!(e.n, 50);
    }

    #[test]
    fn estimate_matches_textbook_formula() {
        let v = [2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0];
        let e = Estimate::from_values(&v);
        assert!((e.mean - 5.0).abs() < 1e-15);
        // sample sd = sqrt(32/7)
        assert!((e.stderr - (32.0f64 / 7.0).sqrt() / 8f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn censored_fraction_is_tracked() {
        let mut a = Accumulator::new();
        a.push_censored(3.0, true);
        a.push_censored(1.0, false);
        a.push_censored(1.0, false);
        a.push_censored(1.0, false);
        assert_eq!(a.estimate().censored_fraction, 0.25);
    }

    proptest! {
        #[test]
        fn merge_reproduces_pooled_estimate(
            values in proptest::collection::vec(-1e3f64..1e3, 2..200),
            cut in 0usize..200,
        ) {
            let cut = cut % (values.len() - 1) + 1;
            let all = Estimate::from_values(&values);
            let merged = Estimate::from_values(&values[..cut]).merge(&Estimate::from_values(&values[cut..]));
            let scale = values.iter().map(|v| v.abs()).fold(1.0, f64::max);
            prop_assert!((all.mean - merged.mean).abs() <= 1e-12 * scale);
            prop_assert!((all.stderr - merged.stderr).abs() <= 1e-12 * scale);
            prop_assert_eq!(all.n, merged.n);
        }

        #[test]
        fn accumulator_merge_is_associative(
            a in proptest::collection::vec(-10f64..10.0, 0..50),
            b in proptest::collection::vec(-10f64..10.0, 0..50),
            c in proptest::collection::vec(-10f64..10.0, 1..50),
        ) {
            let acc = |v: &[f64]| { let mut x = Accumulator::new(); v.iter().for_each(|&y| x.push(y)); x };
            let mut left = acc(&a); left.merge(&acc(&b)); left.merge(&acc(&c));
            let mut bc = acc(&b); bc.merge(&acc(&c));
            let mut right = acc(&a); right.merge(&bc);
            let (l, r) = (left.estimate(), right.estimate());
            prop_assert!((l.mean - r.mean).abs() < 1e-12);
            prop_assert!((l.stderr - r.stderr).abs() < 1e-12);
        }

        #[test]
        fn quantiles_are_monotone(values in proptest::collection::vec(-1e6f64..1e6, 1..300)) {
            let s = QuantileSummary::from_values(&values, &DEFAULT_PROBS);
            prop_assert!(s.quantiles.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn type1_quantiles() {
        let v: Vec<f64> = (1..=10).map(|x| x as f64).collect();
        let s = QuantileSummary::from_values(&v, &[0.0, 0.1, 0.15, 0.5, 0.99, 1.0]);
        assert_eq!(s.quantiles, vec![1.0, 1.0, 2.0, 5.0, 10.0, 10.0]);
        assert_eq!(s.median(), Some(5.0));
    }

    #[test]
    fn sketch_quantiles_are_close() {
        let mut s = QuantileSketch::new(512);
        let n = 200_000u64;
        // a fixed permutation of 0..n
        for i in 0..n {
            s.push(((i * 7919) % n) as f64);
        }
        for p in DEFAULT_PROBS {
            let q = s.quantile(p);
            assert!((q / n as f64 - p).abs() < 0.01, "{p}: {q}");
        }
        let mut a = QuantileSketch::new(512);
        let mut b = QuantileSketch::new(512);
        for i in 0..n {
            let x = ((i * 7919) % n) as f64;
            if i % 2 == 0 {
                a.push(x)
            } else {
                b.push(x)
            }
        }
        a.merge(&b);
        assert_eq!(a.n, n);
        assert!((a.quantile(0.5) / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn accumulator_switches_to_sketch() {
        let mut acc = QuantileAccumulator::new();
        for i in 0..(EXACT_LIMIT as u64 + 10) {
            acc.push((i % 1000) as f64);
        }
        let s = acc.summary(&[0.5]);
        assert!(!s.exact);
        assert!((s.quantiles[0] - 500.0).abs() < 15.0);
    }

    #[test]
    fn ratio_estimate_of_proportional_data() {
        let num = [2.0, 4.0, 6.0];
        let den = [1.0, 2.0, 3.0];
        let r = ratio_estimate(&num, &den);
        assert!((r.mean - 2.0).abs() < 1e-15);
        assert!(r.stderr < 1e-12);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(v), 2.0);
    }

    #[test]
    fn gof_accepts_exact_counts_and_rejects_wrong_law() {
        let t = chi_square_gof(&[250, 250, 500], &[0.25, 0.25, 0.5]);
        assert_eq!(t.statistic, 0.0);
        assert_eq!(t.dof, 2);
        let t = chi_square_gof(&[500, 250, 250], &[0.25, 0.25, 0.5]);
        assert!(t.p_value < 1e-10);
    }

    #[test]
    fn two_sample_test() {
        let t = chi_square_two_sample(&[100, 200, 300], &[200, 400, 600]);
        assert!(t.statistic < 1e-12);
        let t = chi_square_two_sample(&[300, 200, 100], &[100, 200, 300]);
        assert!(t.p_value < 1e-10);
    }

    #[test]
    fn line_fit_exact() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let f = fit_line(&xs, &ys, &[1.0; 4]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-15);
        assert!((f.intercept - 1.0).abs() < 1e-15);
        assert!(fit_line(&[1.0, 1.0], &[1.0, 2.0], &[1.0, 1.0]).is_none());
    }
}
