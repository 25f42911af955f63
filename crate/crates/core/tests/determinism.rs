//! Results do not depend on the worker count.

use perc_core::boundary::four_point_experiment;
use perc_core::critical::{solve_pc_torus, CriticalConfig};
use perc_core::estimators::{
    cmax_distribution, estimate_chi_lattice, estimate_tilde_chi, TildeChiOptions,
};
use perc_core::exact::enumerate_measure;
use perc_core::parallel::with_workers;
use perc_core::{er_scaling_experiment, BoundaryCondition, TorusSpec};

fn run_all() -> String {
    let s = TorusSpec::nearest_neighbor(3, 5).unwrap();
    let line = TorusSpec::nearest_neighbor(1, 4).unwrap();
    let mut out = Vec::new();
    out.push(serde_json::to_string(&cmax_distribution(&s, 0.2, 3000, 1).unwrap()).unwrap());
    out.push(
        serde_json::to_string(&estimate_chi_lattice(&s, 0.15, 3000, 10_000, 2).unwrap()).unwrap(),
    );
    out.push(
        serde_json::to_string(
            &estimate_tilde_chi(&line, 0.5, 3000, 10_000, TildeChiOptions::default(), 3).unwrap(),
        )
        .unwrap(),
    );
    let cfg = CriticalConfig {
        lambda: 0.5,
        n_per_eval: 300,
        seed: 4,
        ..Default::default()
    };
    out.push(serde_json::to_string(&solve_pc_torus(&s, &cfg).unwrap()).unwrap());
    out.push(
        serde_json::to_string(
            &four_point_experiment(BoundaryCondition::Bulk, &s, 0.2, 300, 10_000, 5).unwrap(),
        )
        .unwrap(),
    );
    out.push(serde_json::to_string(&er_scaling_experiment(&[400], 0.0, 300, 6).unwrap()).unwrap());
    out.push(
        serde_json::to_string(
            &enumerate_measure(&TorusSpec::nearest_neighbor(2, 3).unwrap(), 0.3).unwrap(),
        )
        .unwrap(),
    );
    out.join("\n")
}

#[test]
fn identical_across_worker_counts() {
    let one = with_workers(1, run_all);
    for w in [2, 4, 16] {
        assert_eq!(one, with_workers(w, run_all), "{w} workers");
    }
    assert_eq!(one, run_all());
}
