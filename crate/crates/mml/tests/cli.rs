use std::path::Path;
use std::process::{Command, Output};

fn mml(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mml"))
        .args(args)
        .env("MML_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn verify_mcshane_passes_at_4_4_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = mml(&[
        "verify-mcshane",
        "--coords",
        "4,4,4",
        "--tol",
        "1e-6",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let r = json(&out);
    assert!(r["residual"].as_f64().unwrap().abs() <= 1e-6);
    for key in [
        "target",
        "partial_sum",
        "n_max",
        "tail_bound",
        "m_hat",
        "kappa_hat",
        "h_partial_sum",
        "h_threshold_n",
    ] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    let bins = r["bins"].as_array().unwrap();
    for key in ["n", "count", "sum_d", "sum_deriv"] {
        assert!(bins[0].get(key).is_some(), "missing bins[].{key}");
    }
}

#[test]
fn parabolic_boundary_is_invalid_input() {
    let o = mml(&["verify-margulis", "--coords", "3,3,3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("boundary parabolic"));
}

#[test]
fn zero_deformation_has_zero_residual() {
    let o = mml(&["verify-margulis", "--coords", "4,4,4", "--deform", "zero"]);
    assert_eq!(o.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["residual"].as_f64(), Some(0.0));
}

#[test]
fn spec_file_matches_inline_coords() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("rep.json");
    std::fs::write(
        &spec,
        r#"{"x": 4, "y": 4, "z": 4, "deformation": {"kind": "path", "path_coeffs": [[1, 1, 1]], "h": 1e-4}}"#,
    )
    .unwrap();
    let a = mml(&["verify-margulis", "--spec", spec.to_str().unwrap()]);
    let b = mml(&["verify-margulis", "--coords", "4,4,4", "--deform", "path"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn bad_spec_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("rep.json");
    std::fs::write(&spec, "{\n  \"x\": 4,\n  \"y\": 4,\n  \"z\": four\n}\n").unwrap();
    let o = mml(&["verify-mcshane", "--spec", spec.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 4"), "{err}");
}

#[test]
fn non_convergence_exit_code() {
    let o = mml(&["verify-mcshane", "--coords", "4,4,4", "--n-ceiling", "8"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_are_invalid_input() {
    assert_eq!(mml(&["verify-mcshane", "--bogus"]).status.code(), Some(1));
    assert_eq!(
        mml(&["verify-mcshane", "--coords", "4,4"]).status.code(),
        Some(1)
    );
    assert_eq!(
        mml(&["verify-mcshane", "--coords", "4,4,4", "--tol", "0"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn census_is_deterministic_and_valid() {
    let a = mml(&["census", "--coords", "4,4,4", "--n-max", "20"]);
    let b = mml(&["census", "--coords", "4,4,4", "--n-max", "20"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let mut r = csv::Reader::from_reader(&a.stdout[..]);
    assert_eq!(
        r.headers().unwrap(),
        vec!["slope_p", "slope_q", "word", "trace", "length", "bin"]
    );
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    let (summary, curves) = rows.split_last().unwrap();
    assert_eq!(&summary[2], "m_hat");
    let m_hat: f64 = summary[3].parse().unwrap();
    let mut counts = [0usize; 21];
    for c in curves {
        assert!(c[3].parse::<f64>().unwrap().abs() > 2.0);
        counts[c[5].parse::<usize>().unwrap()] += 1;
    }
    for (n, &k) in counts.iter().enumerate() {
        let n1 = n as f64 + 1.0;
        assert!(k as f64 <= m_hat * n1 * n1 + 1e-12);
    }
}

#[test]
fn imported_torus_terms_pass() {
    use mml_core::representation::{attach_deformation, build_rep, PolynomialPath};
    use mml_core::{DeformationSpec, TraceCoords};
    let rep = build_rep(TraceCoords::new(4.0, 4.0, 4.0)).unwrap();
    let spec = DeformationSpec::Path {
        path: PolynomialPath::linear([1.0; 3]),
        h: 1e-4,
    };
    let rep = attach_deformation(&rep, &spec).unwrap();
    let b = rep.boundary_length().unwrap();
    let mut text = String::from("ell_gamma1,ell_gamma2,alpha_gamma1,alpha_gamma2\n");
    for c in mml_core::curves::enumerate_bins(&rep, 60)
        .unwrap()
        .iter()
        .flat_map(|b| b.members.iter())
    {
        text += &format!("{},{},{},{}\n", c.length, c.length, c.alpha, c.alpha);
    }
    let dir = tempfile::tempdir().unwrap();
    let terms = dir.path().join("terms.csv");
    std::fs::write(&terms, text).unwrap();
    let (lb, ab) = (b.re.to_string(), b.inf.to_string());
    let t = terms.to_str().unwrap();
    let o = mml(&[
        "verify-margulis",
        "--terms",
        t,
        "--ell-boundary",
        &lb,
        "--alpha-boundary",
        &ab,
        "--tol",
        "1e-5",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["tail_certification"], "none");
    assert_eq!(r["kind"], "margulis-imported");
    let o = mml(&["verify-mcshane", "--terms", t, "--ell-boundary", &lb]);
    assert_eq!(o.status.code(), Some(0));
    // a truncated list is caught
    let o = mml(&["verify-mcshane", "--terms", t, "--ell-boundary", "7.0"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn small_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    let o = mml(&[
        "sweep",
        "--grid",
        "1",
        "--seeds",
        "2",
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let r = json(&out);
    assert_eq!(r["total"], 4);
    assert_eq!(r["passed"], 4);
}
