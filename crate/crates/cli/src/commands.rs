//! One function per experiment subcommand.

use std::collections::BTreeMap;
use std::io::Write;

use perc_core::baseline::er_scaling_experiment;
use perc_core::boundary::{four_point_experiment, long_path_experiment, third_moment_growth};
use perc_core::cluster::{explore_cluster, Graph};
use perc_core::coupling::{coupled_explore_with, verify_coupling_invariants, CoupledOptions};
use perc_core::critical::{
    gamma_fit, solve_pc_torus, subcritical_bound_check, window_experiment, CriticalConfig,
};
use perc_core::estimators::{
    axis_profile, cmax_distribution, estimate_chi_lattice, estimate_chi_torus, estimate_tau,
    estimate_tilde_chi, sample_torus, xi_from_profile, TildeChiOptions,
};
use perc_core::exact::{check_bk, check_fkg, lemma51_check, tree_graph_margin, ExactCounts};
use perc_core::parallel::try_map_samples;
use perc_core::stats::{chi_square_two_sample, histogram, Accumulator};
use perc_core::{GraphKind, RandomStream, Torus, TorusSpec, VertexZ};
use serde::Serialize;
use serde_json::{json, Value};

use crate::params::{BcArg, BoundaryExperiment, GraphArg, IneqCheck, Params};
use crate::record::{Body, Recorder};
use crate::CliError;

type Out = Result<(), CliError>;

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

fn body(spec: &TorusSpec, samples: u64, censored: f64, results: Value) -> Body {
    Body {
        spec: Some(spec.fields()),
        samples: Some(samples),
        exact: false,
        censored_fraction: Some(censored),
        results,
    }
}

fn critical_config(params: &Params, seed: u64) -> CriticalConfig {
    let d = CriticalConfig::default();
    CriticalConfig {
        lambda: params.lambda.unwrap_or(d.lambda),
        exponent: d.exponent,
        tolerance: params.tolerance.unwrap_or(d.tolerance),
        n_per_eval: params.n(),
        seed,
    }
}

pub fn exact(params: &Params, rec: &mut Recorder) -> Out {
    let spec = params.spec()?;
    let p = params.p()?;
    let counts = ExactCounts::enumerate(&spec)?;
    let m = counts.measure(p)?;
    let torus = counts.torus();
    let tau: Vec<Value> = (0..m.volume)
        .map(|i| json!({ "x": torus.coords_of(i), "tau": m.tau_origin(i) }))
        .collect();
    rec.emit(Body {
        spec: Some(spec.fields()),
        samples: None,
        exact: true,
        censored_fraction: None,
        results: json!({
            "chi": m.chi,
            "e_cmax": m.e_cmax,
            "cmax_law": m.cmax_law,
            "total_mass": m.total_mass,
            "tau": tau,
        }),
    })
}

pub fn chi(params: &Params, rec: &mut Recorder) -> Out {
    let spec = params.spec()?;
    let (p, n) = (params.p()?, params.n());
    let est = match params.graph.unwrap_or(GraphArg::Torus) {
        GraphArg::Torus => estimate_chi_torus(&spec, p, n, rec.seed)?,
        GraphArg::Lattice => estimate_chi_lattice(&spec, p, n, params.cap(), rec.seed)?,
    };
    rec.emit(body(&spec, n, est.censored_fraction, to_value(est)))
}

pub fn tau(params: &Params, rec: &mut Recorder) -> Out {
    let spec = params.spec()?;
    let (p, n) = (params.p()?, params.n());
    let x = VertexZ::new(&Params::require(&params.x, "x")?);
    let kind: GraphKind = params.graph.unwrap_or(GraphArg::Torus).into();
    let est = estimate_tau(kind, &spec, &x, p, n, params.cap(), rec.seed)?;
    let results = json!({ "estimate": est, "x": x.coords(), "distance": x.euclidean_norm() });
    rec.emit(body(&spec, n, est.censored_fraction, results))
}

pub fn xi(params: &Params, rec: &mut Recorder) -> Out {
    let spec = params.spec()?;
    let (p, n) = (params.p()?, params.n());
    let profile = axis_profile(
        &spec,
        p,
        params.points.unwrap_or(6),
        n,
        params.cap(),
        rec.seed,
    )?;
    let xi = xi_from_profile(&profile)?;
    let censored = profile
        .iter()
        .map(|e| e.censored_fraction)
        .fold(0.0, f64::max);
    rec.emit(body(
        &spec,
        n,
        censored,
        json!({ "xi": xi, "profile": profile }),
    ))
}

pub fn tildechi(params: &Params, rec: &mut Recorder) -> Out {
    let spec = params.spec()?;
    let (p, n) = (params.p()?, params.n());
    let opts = TildeChiOptions {
        radius_max: params.radius_max,
        xi: params.xi,
        xi_points: params.points.unwrap_or(6),
    };
    let est = estimate_tilde_chi(&spec, p, n, params.cap(), opts, rec.seed)?;
    rec.emit(body(
        &spec,
        n,
        est.estimate.censored_fraction,
        to_value(est),
    ))
}

pub fn cmax(params: &Params, rec: &mut Recorder) -> Out {
    let spec = params.spec()?;
    let (p, n) = (params.p()?, params.n());
    let summary = cmax_distribution(&spec, p, n, rec.seed)?;
    rec.emit(body(&spec, n, 0.0, to_value(summary)))
}

pub fn pc(params: &Params, rec: &mut Recorder) -> Out {
    let spec = params.spec()?;
    let config = critical_config(params, rec.seed);
    let sol = solve_pc_torus(&spec, &config)?;
    let subcritical = match &params.q {
        Some(q) => Some(subcritical_bound_check(
            &spec,
            sol.p_hat,
            config.lambda,
            q,
            config.n_per_eval,
            3.0,
            rec.seed.wrapping_add(1),
        )?),
        None => None,
    };
    let results = json!({
        "solution": sol,
        "lambda": config.lambda,
        "lambda_is_default": params.lambda.is_none(),
        "tolerance": config.tolerance,
        "subcritical": subcritical,
    });
    rec.emit(body(&spec, config.n_per_eval, 0.0, results))
}

pub fn window(params: &Params, rec: &mut Recorder) -> Out {
    let sides = match (&params.sides, params.side) {
        (Some(s), _) => s.clone(),
        (None, Some(s)) => vec![s],
        (None, None) => {
            return Err(CliError::Validation(
                "missing required field `sides`".into(),
            ))
        }
    };
    let specs = sides
        .iter()
        .map(|&r| params.spec_with_side(r))
        .collect::<Result<Vec<_>, _>>()?;
    let n = params.n();
    // without explicit densities each torus is run at its own critical point
    let mut solved = Vec::new();
    let ps: Vec<f64> = match (&params.p_values, params.p) {
        (Some(v), _) if v.len() == specs.len() => v.clone(),
        (Some(v), _) => {
            return Err(CliError::Validation(format!(
                "field `p_values`: {} values for {} sides",
                v.len(),
                specs.len()
            )))
        }
        (None, Some(_)) => vec![params.p()?; specs.len()],
        (None, None) => {
            for s in &specs {
                solved.push(solve_pc_torus(s, &critical_config(params, rec.seed))?);
            }
            solved.iter().map(|s| s.p_hat).collect()
        }
    };
    let points: Vec<(TorusSpec, f64)> = specs.iter().cloned().zip(ps).collect();
    let records = window_experiment(
        &points,
        params.omega1.unwrap_or(10.0),
        params.omega2.unwrap_or(10.0),
        n,
        rec.seed.wrapping_add(1),
    )?;
    for (i, (r, (spec, _))) in records.into_iter().zip(&points).enumerate() {
        let mut results = to_value(r);
        if let Some(sol) = solved.get(i) {
            results["critical_point"] = to_value(sol);
        }
        rec.emit(body(spec, n, 0.0, results))?;
    }
    Ok(())
}

pub fn gamma(params: &Params, rec: &mut Recorder) -> Out {
    let spec = params.spec()?;
    let p_c_ref = Params::require(&params.p_c_ref, "p_c_ref")?;
    let eps = Params::require(&params.eps, "eps")?;
    let n = params.n();
    let fit = gamma_fit(&spec, p_c_ref, &eps, n, params.cap(), rec.seed)?;
    let censored = fit.exponent.censored_fraction;
    rec.emit(body(&spec, n, censored, to_value(fit)))
}

const DIRECT_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

fn violation_name(v: &impl std::fmt::Debug) -> String {
    let s = format!("{v:?}");
    s.split(|c: char| !c.is_alphanumeric())
        .next()
        .unwrap_or_default()
        .to_string()
}

/// Coupled replicates against the invariants and against direct samplers of
/// both marginals. With a trace sink, the bond reveals of replicate 0 are
/// written there, one JSON line per explored bond.
pub fn coupling_check(params: &Params, trace: Option<&mut dyn Write>, rec: &mut Recorder) -> Out {
    let spec = params.spec()?;
    let (p, n, cap) = (params.p()?, params.n(), params.cap());
    let seed = rec.seed;
    let tracing = trace.is_some();
    let per = try_map_samples(n, |i| {
        let opts = CoupledOptions {
            cap,
            trace: tracing && i == 0,
        };
        let r = coupled_explore_with(&spec, p, &RandomStream::new(seed, i), opts)?;
        let violations: Vec<String> = verify_coupling_invariants(&r)
            .iter()
            .map(violation_name)
            .collect();
        Ok::<_, perc_core::PercError>((
            r.torus_cluster.len() as u64,
            (r.lattice_cluster.len() as u64).min(cap),
            r.censored,
            r.stage2_black_with_white_rep,
            violations,
            r.trace,
        ))
    })?;
    if let (Some(sink), Some(first)) = (trace, per.first()) {
        for ev in &first.5 {
            let line = serde_json::to_string(ev).expect("trace serializes");
            writeln!(sink, "{line}").map_err(|e| CliError::Io(e.to_string()))?;
        }
        sink.flush().map_err(|e| CliError::Io(e.to_string()))?;
    }
    let mut by_kind = BTreeMap::<String, u64>::new();
    let (mut torus_size, mut lattice_size) = (Accumulator::new(), Accumulator::new());
    let mut white_reps = 0;
    for r in &per {
        torus_size.push(r.0 as f64);
        lattice_size.push_censored(r.1 as f64, r.2);
        white_reps += r.3;
        for v in &r.4 {
            *by_kind.entry(v.clone()).or_default() += 1;
        }
    }
    let v = spec.volume();
    let coupled = histogram(per.iter().map(|r| r.0), v);
    let torus = Torus::new(spec.clone())?;
    let direct = histogram(
        sample_torus(&torus, p, n, seed ^ DIRECT_SEED_SALT)
            .iter()
            .map(|s| s.origin_size),
        v,
    );
    let o = VertexZ::origin(spec.dim());
    let lattice = try_map_samples(n, |i| {
        let stream = RandomStream::new(seed ^ DIRECT_SEED_SALT, i);
        Ok::<_, perc_core::PercError>(
            explore_cluster(Graph::Lattice(&spec), &o, p, &stream, cap)?
                .size()
                .min(cap),
        )
    })?;
    let top = per
        .iter()
        .map(|r| r.1)
        .chain(lattice.iter().copied())
        .max()
        .unwrap_or(1);
    let lattice_test = chi_square_two_sample(
        &histogram(per.iter().map(|r| r.1), top),
        &histogram(lattice.iter().copied(), top),
    );
    let censored = per.iter().filter(|r| r.2).count() as f64 / n as f64;
    let results = json!({
        "violations": by_kind.values().sum::<u64>(),
        "violations_by_kind": by_kind,
        "torus_size": torus_size.estimate(),
        "lattice_size": lattice_size.estimate(),
        "stage2_black_with_white_rep": white_reps,
        "torus_size_histogram": coupled,
        "direct_torus_histogram": direct,
        "torus_chi_square": chi_square_two_sample(&coupled, &direct),
        "lattice_chi_square": lattice_test,
    });
    rec.emit(body(&spec, n, censored, results))
}

#[derive(Serialize)]
struct Margin {
    min: f64,
    count: u64,
    argmin: String,
}

impl Margin {
    fn new() -> Self {
        Margin {
            min: f64::INFINITY,
            count: 0,
            argmin: String::new(),
        }
    }

    fn note(&mut self, m: f64, at: impl FnOnce() -> String) {
        self.count += 1;
        if m < self.min {
            self.min = m;
            self.argmin = at();
        }
    }
}

pub fn ineq(params: &Params, rec: &mut Recorder) -> Out {
    let spec = params.spec()?;
    let p = params.p()?;
    match params.check.unwrap_or(IneqCheck::Exact) {
        IneqCheck::Exact => {
            let counts = ExactCounts::enumerate(&spec)?;
            let m = counts.measure(p)?;
            let torus = counts.torus();
            let v = torus.volume();
            let coords: Vec<Vec<i32>> = (0..v).map(|i| torus.coords_of(i).to_vec()).collect();
            let o = torus.origin_index();
            let (mut fkg, mut bk, mut tree) = (Margin::new(), Margin::new(), Margin::new());
            for x in 0..v {
                for y in 0..v {
                    tree.note(tree_graph_margin(&m, x, y), || {
                        format!("{:?} {:?}", coords[x], coords[y])
                    });
                }
            }
            for x in (0..v).filter(|&x| x != o) {
                let a = (coords[o].clone(), coords[x].clone());
                for s in 0..v {
                    for t in s + 1..v {
                        let b = (coords[s].clone(), coords[t].clone());
                        let at = || format!("{a:?} {b:?}");
                        fkg.note(check_fkg(&spec, p, &a, &b)?, at);
                        bk.note(check_bk(&spec, p, &a, &b)?, at);
                    }
                }
            }
            rec.emit(Body {
                spec: Some(spec.fields()),
                samples: None,
                exact: true,
                censored_fraction: None,
                results: json!({ "fkg": fkg, "bk": bk, "tree_graph": tree }),
            })
        }
        IneqCheck::Lemma => {
            let n = params.n();
            let radius = params.radius_max.unwrap_or(spec.side() / 2 + 20);
            let r = lemma51_check(&spec, p, n, params.cap(), radius, rec.seed)?;
            let censored = r
                .chi_lattice
                .censored_fraction
                .max(r.tilde_chi.censored_fraction);
            rec.emit(body(&spec, n, censored, to_value(r)))
        }
    }
}

pub fn er(params: &Params, rec: &mut Recorder) -> Out {
    let sizes = Params::require(&params.sizes, "sizes")?;
    let eps = match params.eps.as_deref() {
        None => 0.0,
        Some([e]) => *e,
        Some(_) => {
            return Err(CliError::Validation(
                "field `eps`: give a single value".into(),
            ))
        }
    };
    let n = params.n();
    for r in er_scaling_experiment(&sizes, eps, n, rec.seed)? {
        rec.emit(Body {
            spec: None,
            samples: Some(n),
            exact: false,
            censored_fraction: None,
            results: to_value(r),
        })?;
    }
    Ok(())
}

pub fn boundary(params: &Params, rec: &mut Recorder) -> Out {
    let (n, cap) = (params.n(), params.cap());
    match params.experiment.unwrap_or(BoundaryExperiment::FourPoint) {
        BoundaryExperiment::FourPoint => {
            let spec = params.spec()?;
            let p = params.p()?;
            for bc in params.bc.unwrap_or(BcArg::All).conditions() {
                let r = four_point_experiment(bc, &spec, p, n, cap, rec.seed)?;
                rec.emit(body(&spec, n, r.censored_fraction, to_value(r)))?;
            }
            Ok(())
        }
        BoundaryExperiment::ThirdMoment => {
            let dim = Params::require(&params.dim, "dim")?;
            let sides = Params::require(&params.sides, "sides")?;
            let p = params.p()?;
            let r = third_moment_growth(
                dim,
                &sides,
                p,
                n,
                cap,
                params.tolerance.unwrap_or(0.5),
                rec.seed,
            )?;
            let censored = r
                .points
                .iter()
                .map(|(_, e)| e.censored_fraction)
                .fold(0.0, f64::max);
            rec.emit(Body {
                spec: None,
                samples: Some(n),
                exact: false,
                censored_fraction: Some(censored),
                results: to_value(r),
            })
        }
        BoundaryExperiment::LongPath => {
            let spec = params.spec()?;
            let p = params.p()?;
            let eps = Params::require(&params.eps, "eps")?;
            let r = long_path_experiment(&spec, p, &eps, n, cap, rec.seed)?;
            rec.emit(body(&spec, n, r.censored_fraction, to_value(r)))
        }
    }
}
