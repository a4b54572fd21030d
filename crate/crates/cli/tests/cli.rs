use clap::Parser;
use linkage_cli::{run, Cli, CliError};
use linkage_core::inference::{bayes_factor_test, Posterior};
use linkage_core::model::{ContinuousPrior, CrossCount, MixturePrior};
use linkage_core::LinkageError;
use serde_json::Value;
use std::process::Command;

fn run_args(args: &[&str]) -> Result<String, CliError> {
    let cli = Cli::try_parse_from(std::iter::once("linkage").chain(args.iter().copied())).unwrap();
    let mut out = Vec::new();
    run(&cli, &mut out)?;
    Ok(String::from_utf8(out).unwrap())
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&run_args(args).unwrap()).unwrap()
}

fn exit_code(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_linkage"))
        .args(args)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap()
}

#[test]
fn approximate_marginal_for_primrose() {
    let v = json(&["marginal", "--n", "400", "--y", "160", "--method", "approx"]);
    let got = v["marginal"].as_f64().unwrap();
    assert!(((got - 1.0 / 2406.0) / (1.0 / 2406.0)).abs() <= 1e-12);
    assert_eq!(v["method"], "approximation");
}

#[test]
fn approximate_marginal_without_data() {
    let v = json(&["marginal", "--n", "0", "--y", "0", "--method", "approx"]);
    assert!((v["marginal"].as_f64().unwrap() - 1.0 / 6.0).abs() <= 1e-15);
}

#[test]
fn quadrature_marginal_matches_closed_form() {
    let exact = json(&["marginal", "--method", "exact"])["log_marginal"]
        .as_f64()
        .unwrap();
    let quad = json(&["marginal", "--method", "quadrature"])["log_marginal"]
        .as_f64()
        .unwrap();
    assert!((exact - quad).abs() <= 1e-10);
}

#[test]
fn bayes_factor_fields_round_trip() {
    let v = json(&[
        "bayes-factor",
        "--n",
        "400",
        "--y",
        "160",
        "--prior",
        r#"{"type":"flat"}"#,
        "--point-mass-weight",
        "0.9166666667",
    ]);
    for key in [
        "log_bf",
        "bf",
        "prior_odds",
        "posterior_odds",
        "posterior_prob_linked",
        "log_marginal_exact",
        "log_marginal_approx",
    ] {
        assert!(v[key].is_f64(), "{key}");
    }

    let defaults = json(&["bayes-factor"]);
    let lib = bayes_factor_test(&CrossCount::primrose(), &MixturePrior::primrose()).unwrap();
    assert_eq!(
        defaults["posterior_prob_linked"].as_f64().unwrap(),
        lib.posterior_prob_linked
    );
    assert_eq!(defaults["log_bf"].as_f64().unwrap(), lib.log_bayes_factor);
    assert_eq!(
        defaults["posterior_odds"].as_f64().unwrap(),
        lib.posterior_odds
    );
    assert_eq!(v["log_bf"], defaults["log_bf"]);
}

#[test]
fn bayes_factor_with_distance_prior_has_no_closed_forms() {
    let v = json(&[
        "bayes-factor",
        "--prior",
        r#"{"type":"haldane_distance","L":1}"#,
    ]);
    assert!(v["log_marginal_exact"].is_null());
    assert_eq!(v["linked_method"], "quadrature");
    assert!(v["posterior_prob_linked"].as_f64().unwrap() > 0.9);
}

#[test]
fn prior_density_grid_csv() {
    let text = run_args(&[
        "prior-density",
        "--prior",
        r#"{"type":"haldane_distance","L":1}"#,
        "--grid",
        "1000",
    ])
    .unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1001);
    assert_eq!(lines[0], "rho,density");
    assert_eq!(lines[1], "0,2");
    let prior = ContinuousPrior::haldane_distance(1.0).unwrap();
    for line in &lines[1..] {
        let (r, d) = line.split_once(',').unwrap();
        let (r, d): (f64, f64) = (r.parse().unwrap(), d.parse().unwrap());
        assert_eq!(prior.density(r), d);
    }
    assert_eq!(
        lines[1000]
            .split(',')
            .next()
            .unwrap()
            .parse::<f64>()
            .unwrap(),
        prior.support().1
    );
}

#[test]
fn posterior_density_round_trip() {
    let text = run_args(&[
        "posterior-density",
        "--grid",
        "50",
        "--prior",
        r#"{"type":"scaled_beta","alpha":2,"beta":3}"#,
    ])
    .unwrap();
    let prior = ContinuousPrior::scaled_beta(2.0, 3.0).unwrap();
    let post = Posterior::new(&CrossCount::primrose(), &prior).unwrap();
    for line in text.lines().skip(1) {
        let (r, d) = line.split_once(',').unwrap();
        assert_eq!(post.density(r.parse().unwrap()), d.parse::<f64>().unwrap());
    }
}

#[test]
fn likelihood_csv_record() {
    let text = run_args(&["likelihood", "--rho", "0.5", "--format", "csv"]).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,y,rho,log_likelihood,likelihood");
    assert!(lines[1].starts_with("400,160,0.5,"));
}

#[test]
fn figure1_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let code = exit_code(&[
            "figure1",
            "--n-samples",
            "1000000",
            "--bins",
            "50",
            "--seed",
            "42",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
    }
    let first = std::fs::read(&a).unwrap();
    assert_eq!(first, std::fs::read(&b).unwrap());
    let text = String::from_utf8(first).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "bin_lo,bin_hi,count,density,analytic_density"
    );
    assert_eq!(text.lines().count(), 51);
    let total: u64 = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse::<u64>().unwrap())
        .sum();
    assert_eq!(total, 1_000_000);

    let other = run_args(&["figure1", "--n-samples", "1000", "--seed", "43"]).unwrap();
    assert_ne!(
        other,
        run_args(&["figure1", "--n-samples", "1000", "--seed", "42"]).unwrap()
    );
}

#[test]
fn prior_sample_streams_differ() {
    let a = json(&["prior-sample", "--n-samples", "5", "--format", "json"]);
    let b = json(&[
        "prior-sample",
        "--n-samples",
        "5",
        "--format",
        "json",
        "--stream",
        "1",
    ]);
    assert_eq!(a["samples"].as_array().unwrap().len(), 5);
    assert_ne!(a["samples"], b["samples"]);
}

#[test]
fn exit_codes() {
    assert_eq!(exit_code(&["bayes-factor"]), 0);
    assert_eq!(exit_code(&["marginal", "--prior", "{not json"]), 2);
    assert_eq!(exit_code(&["marginal", "--prior", r#"{"type":"wide"}"#]), 2);
    assert_eq!(exit_code(&["marginal", "--n", "3", "--y", "4"]), 2);
    assert_eq!(
        exit_code(&[
            "bayes-factor",
            "--prior",
            r#"{"type":"improper_1_over_rho"}"#
        ]),
        2
    );
    assert_eq!(exit_code(&["likelihood"]), 2);
    assert_eq!(exit_code(&["no-such-command"]), 2);
    assert_eq!(exit_code(&["--help"]), 0);
}

#[test]
fn numerical_failures_map_to_three() {
    let err = CliError::from(LinkageError::Convergence {
        what: "quadrature",
        estimate: 1.0,
        error_estimate: 0.5,
    });
    assert_eq!(err.exit_code(), 3);
    assert_eq!(CliError::from(LinkageError::ImproperPrior).exit_code(), 2);
}
