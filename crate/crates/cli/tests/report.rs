//! The `report` subcommand and its golden output.

use std::process::Command;

use perc_core::critical::exponent_fit;
use serde_json::Value;

fn perc(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_perc"))
        .args(args)
        .env_remove("PERC_SEED")
        .output()
        .unwrap()
}

#[test]
fn empty_input_gives_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("empty.jsonl");
    std::fs::write(&input, "").unwrap();
    let csv = dir.path().join("out.csv");
    let out = perc(&[
        "report",
        input.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let body = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(body, "schema_version,command,spec.dim,spec.side,spec.model.kind,spec.model.range,parameters.p,seed,samples\n");
    for plot in ["cmax_vs_volume", "chi_vs_distance", "tau_vs_distance"] {
        assert_eq!(
            std::fs::read_to_string(dir.path().join(format!("{plot}.tsv"))).unwrap(),
            "x\ty\terr\tseries\n"
        );
    }
}

#[test]
fn mixed_schema_versions_are_unified() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("mixed.jsonl");
    std::fs::write(
        &input,
        concat!(
            r#"{"schema_version":0,"command":"chi","spec":{"dim":2,"side":5,"model":{"kind":"nearest_neighbor"}},"seed":1,"results":{"mean":1.5,"stderr":0.1},"old_field":"a"}"#,
            "\n",
            "this line is not json\n",
            r#"{"schema_version":1,"command":"er","spec":null,"seed":2,"samples":10,"parameters":{"sizes":[100,200]},"results":{"n":100,"cmax":{"probs":[0.5],"quantiles":[7.0]}}}"#,
            "\n",
            r#"{"note":"no schema"}"#,
            "\n"
        ),
    )
    .unwrap();
    let csv = dir.path().join("out.csv");
    let out = perc(&[
        "report",
        input.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("mixed.jsonl:2:"), "{stderr}");
    assert!(stderr.contains("mixed.jsonl:4:"), "{stderr}");
    let golden = "\
schema_version,command,spec.dim,spec.side,spec.model.kind,spec.model.range,parameters.p,seed,samples,old_field,parameters.sizes,results.cmax.probs,results.cmax.quantiles,results.mean,results.n,results.stderr,spec
0,chi,2,5,nearest_neighbor,,,1,,a,,,,1.5,,0.1,
1,er,,,,,,2,10,,100;200,0.5,7.0,,100,,
";
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), golden);
}

#[test]
fn gamma_plot_reproduces_the_recorded_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let rec = dir.path().join("gamma.jsonl");
    let out = perc(&[
        "gamma",
        "--dim",
        "1",
        "--side",
        "3",
        "--p-c-ref",
        "1",
        "--eps",
        "0.2,0.1,0.05,0.025",
        "--n",
        "4000",
        "--out",
        rec.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let record: Value =
        serde_json::from_str(std::fs::read_to_string(&rec).unwrap().trim()).unwrap();
    let plots = dir.path().join("plots");
    let out = perc(&[
        "report",
        rec.to_str().unwrap(),
        "--plots",
        plots.to_str().unwrap(),
        "--out",
        dir.path().join("s.csv").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let tsv = std::fs::read_to_string(plots.join("chi_vs_distance.tsv")).unwrap();
    let points: Vec<(f64, f64, f64)> = tsv
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<f64> = l.split('\t').take(3).map(|x| x.parse().unwrap()).collect();
            (f[0], f[1], (f[1] / f[2]).powi(2))
        })
        .collect();
    assert_eq!(points.len(), 4);
    let fit = exponent_fit(&points).unwrap();
    let recorded = record["results"]["exponent"]["mean"].as_f64().unwrap();
    assert!(
        (fit.slope - recorded).abs() < 1e-12,
        "{} vs {recorded}",
        fit.slope
    );
}
