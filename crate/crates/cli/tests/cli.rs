use std::path::Path;

use illdist::format::{load_polynomial, set_from_str};
use illdist_cli::{parse_invocation, run, Command};
use serde_json::Value;

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("illdist").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_diagonal(dir: &Path, n: u64) -> std::path::PathBuf {
    let path = dir.join("diag.pts");
    let mut text = format!("# illdist v1 d=2 N={n}\n");
    for i in 1..=n {
        text.push_str(&format!("{i},{i}\n"));
    }
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn invocations_parse_with_defaults_left_open() {
    let cli = parse_invocation(["illdist", "pipeline", "--n", "22026", "--d", "2", "--kappa", "1", "--input", "s.pts"])
        .unwrap();
    match cli.command {
        Command::Pipeline(a) => {
            assert_eq!(a.window.n, Some(22026));
            assert_eq!(a.window.kappa, Some(1.0));
            assert_eq!((a.eta, a.window.tau, a.seed), (None, None, None));
        }
        other => panic!("parsed as {other:?}"),
    }
    assert!(parse_invocation(["illdist", "gen", "--variant", "crt", "--n", "100", "--epsilon", "0.5", "--seed", "7"]).is_ok());
    assert!(parse_invocation(["illdist", "solve", "--degree", "-1"]).is_err());
    assert!(parse_invocation(["illdist", "solve", "--input", "a", "--bogus", "1"]).is_err());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let diag = write_diagonal(dir.path(), 50);

    let (code, _, err) = invoke(&["solve", "--degree", "-1", "--input", "x.pts"]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error[USAGE]"), "{err}");

    let (code, _, err) = invoke(&["profile", "--kappa", "1", "--input", path_str(&dir.path().join("missing.pts"))]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error[IO_NOT_FOUND]"), "{err}");

    let (code, _, err) = invoke(&["profile", "--kappa", "1", "--tau", "0.01", "--input", path_str(&diag)]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error[WINDOW_BELOW_TWO]"), "{err}");

    let (code, _, err) = invoke(&["pipeline", "--kappa", "1", "--n", "60", "--input", path_str(&diag)]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error[HEADER_MISMATCH]"), "{err}");

    let (code, _, err) = invoke(&["gen", "--n", "100"]);
    assert_eq!(code, 2, "{err}");

    let (code, _, err) = invoke(&["pipeline", "--kappa", "2", "--input", path_str(&diag)]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error[INVALID_PARAMETER]"), "{err}");
}

#[test]
fn pipeline_report_on_the_diagonal() {
    let dir = tempfile::tempdir().unwrap();
    let diag = write_diagonal(dir.path(), 200);
    let report = dir.path().join("report.json");
    let poly = dir.path().join("p.json");
    let (code, _, err) = invoke(&[
        "pipeline", "--n", "200", "--d", "2", "--kappa", "1", "--seed", "3",
        "--input", path_str(&diag), "--output", path_str(&report), "--poly", path_str(&poly),
    ]);
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(v["config"]["seed"], 3);
    assert_eq!(v["config"]["N"], 200);
    assert_eq!(v["result"]["proportion"], 1.0);
    assert_eq!(v["result"]["forced_violations"], 0);
    assert!(v["result"]["height"].is_string());
    for key in ["lower", "upper", "primes_count", "chebyshev_mass"] {
        assert!(v["window"].get(key).is_some(), "window.{key}");
    }
    for key in ["r", "trials", "good_primes", "s_prime_size", "coverage_min", "coverage_median"] {
        assert!(v["sampling"].get(key).is_some(), "sampling.{key}");
    }
    for key in ["D", "R", "log_height_bound", "height"] {
        assert!(v["siegel"].get(key).is_some(), "siegel.{key}");
    }
    assert_eq!(v["iterations"].as_array().unwrap().len(), 1);

    // the product polynomial round-trips and verifies
    let (p, n) = load_polynomial(std::fs::File::open(&poly).unwrap()).unwrap();
    assert_eq!(n, 200);
    assert!(p.degree() >= 1);
    let (code, out, _) = invoke(&["verify", "--input", path_str(&diag), "--poly", path_str(&poly)]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["vanishing_count"], 200);
}

#[test]
fn flags_override_the_configuration_file() {
    let dir = tempfile::tempdir().unwrap();
    let diag = write_diagonal(dir.path(), 100);
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "kappa = 1.0\nseed = 11\ntrials = 8\nc4 = 0.3\n").unwrap();
    let (code, out, err) = invoke(&["pipeline", "--config", path_str(&cfg), "--seed", "4", "--input", path_str(&diag)]);
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["config"]["seed"], 4);
    assert_eq!(v["config"]["trials"], 8);
    assert_eq!(v["config"]["c4"], 0.3);

    std::fs::write(&cfg, "kappa = 1.0\nsede = 11\n").unwrap();
    let (code, _, err) = invoke(&["pipeline", "--config", path_str(&cfg), "--input", path_str(&diag)]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error[CONFIG_PARSE_ERROR]") && err.contains(":2:"), "{err}");
}

#[test]
fn generated_sets_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let crt = dir.path().join("crt.pts");
    let (code, _, err) = invoke(&["gen", "--variant", "crt", "--n", "100", "--epsilon", "0.5", "--seed", "7", "--output", path_str(&crt)]);
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(&crt).unwrap();
    let set = set_from_str(&text).unwrap();
    assert_eq!(illdist::format::set_to_string(&set), text);
    assert_eq!(set.len(), 2);

    // same seed, same bytes
    let (_, again, _) = invoke(&["gen", "--variant", "crt", "--n", "100", "--epsilon", "0.5", "--seed", "7"]);
    assert_eq!(again, text);

    let (code, out, err) = invoke(&["gen", "--variant", "product", "--d", "2", "--input", path_str(&crt)]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(set_from_str(&out).unwrap().len(), 4);

    let (code, out, _) = invoke(&["gen", "--variant", "perturbed", "--n", "50", "--coeffs", "1,1", "--values", "1,2,3"]);
    assert_eq!(code, 0);
    assert!(set_from_str(&out).unwrap().dim() == 2);

    let (code, out, _) = invoke(&["gen", "--variant", "graph-shift", "--n", "100", "--rho", "0.5", "--m", "1", "--values", "1,2"]);
    assert_eq!(code, 0);
    assert!(set_from_str(&out).unwrap().len() >= 2);
}

#[test]
fn solve_profile_and_sample() {
    let dir = tempfile::tempdir().unwrap();
    let sigma = dir.path().join("sigma.pts");
    std::fs::write(&sigma, "# illdist v1 d=2 N=10\n1,1\n2,2\n").unwrap();
    let (code, out, err) = invoke(&["solve", "--degree", "1", "--input", path_str(&sigma)]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out, "{\"v\":1,\"d\":2,\"N\":10,\"terms\":[{\"e\":[0,1],\"c\":\"-1\"},{\"e\":[1,0],\"c\":\"1\"}]}\n");

    let diag = write_diagonal(dir.path(), 100);
    let (code, out, err) = invoke(&["profile", "--kappa", "1", "--input", path_str(&diag)]);
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["occupancy"]["passed"], true);

    let (code, out, err) = invoke(&["sample", "--kappa", "1", "--seed", "2", "--input", path_str(&diag)]);
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["config"]["seed"], 2);
    let r = v["sampling"]["r"].as_u64().unwrap() as usize;
    assert_eq!(v["sampling"]["tuple"].as_array().unwrap().len(), r);
}
