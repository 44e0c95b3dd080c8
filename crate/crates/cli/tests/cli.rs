use std::fs;
use std::process::{Command, Output};

const REF: [&str; 8] =
    ["--theta", "1.5707963267948966", "--x", "0", "--y", "1", "--psi", "0.5773502691896258,0,0.816496580927726,0"];

fn cqi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cqi")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Value of `column` in the first data row of a CSV.
fn field(csv: &str, column: &str) -> String {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == column).unwrap();
    row[k].to_string()
}

fn pgm_pixels(text: &str) -> (usize, Vec<Vec<u32>>) {
    let lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(lines[0], "P2");
    let n: usize = lines[1].split(' ').next().unwrap().parse().unwrap();
    assert_eq!(lines[2], "65535");
    let rows = lines[3..].iter().map(|l| l.split(' ').map(|v| v.parse().unwrap()).collect()).collect();
    (n, rows)
}

#[test]
fn run_emits_header_and_estimate() {
    let o = cqi(&[&["run"], &REF[..], &["--shots", "100000", "--seed", "7"]].concat());
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("theta,x,y,psi_re0,psi_im0,psi_re1,psi_im1,shots,seed,p_mc,stderr,p_analytic\n"));
    let p_mc: f64 = field(&out, "p_mc").parse().unwrap();
    let se: f64 = field(&out, "stderr").parse().unwrap();
    // the simulated protocol succeeds with probability 1/2 at this point
    assert!((p_mc - 0.5).abs() <= 4.0 * se, "p_mc = {p_mc}");
    let analytic: f64 = field(&out, "p_analytic").parse().unwrap();
    assert!((analytic - 0.45).abs() < 1e-12);
}

#[test]
fn bound_violations_exit_two() {
    let o = cqi(&["run", "--theta", "1", "--x", "1.5", "--y", "0", "--psi", "1,0,0,0"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("x = 1.5") && err.contains("[0, 1]"), "{err}");
    assert_eq!(err.trim().lines().count(), 1);

    let o = cqi(&["exact", "--theta", "-0.1", "--x", "0", "--y", "0", "--psi", "1,0,0,0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("[0, pi/2]"));

    let o = cqi(&["run", "--theta", "0", "--x", "0", "--y", "0.5", "--psi", "1,0,0,0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("degenerate basis"));

    let o = cqi(&["run", "--theta", "1", "--x", "0", "--y", "0", "--psi", "1,0,0,0", "--shots", "0"]);
    assert_eq!(o.status.code(), Some(2));

    let o = cqi(&["heatmap", "--theta", "1", "--psi", "1,0,0,0", "--resolution", "1", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(2));

    let o = cqi(&["exact", "--theta", "1", "--x", "0", "--y", "0", "--psi", "1,0,0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn psi_is_normalized_with_warning() {
    let o = cqi(&["exact", "--theta", "1", "--x", "0.2", "--y", "0.3", "--psi", "-3,0,0,4"]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("warning"));
    assert_eq!(field(&stdout(&o), "psi_re0"), "-0.6");

    let o = cqi(&["exact", "--theta", "1", "--x", "0.2", "--y", "0.3", "--bloch", "3.141592653589793,0"]);
    assert!(o.status.success());
    assert!(stderr(&o).is_empty());
}

#[test]
fn exact_matches_run_analytic_column() {
    for args in [&REF[..], &["--theta", "0.8", "--x", "0.35", "--y", "0.9", "--bloch", "1.2,2.5"]] {
        let exact = stdout(&cqi(&[&["exact"], args].concat()));
        let run = stdout(&cqi(&[&["run"], args, &["--shots", "10"]].concat()));
        assert_eq!(field(&exact, "p_analytic"), field(&run, "p_analytic"));
    }
}

#[test]
fn heatmap_pixels_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("reference.pgm");
    let o = cqi(&[
        "heatmap",
        "--theta",
        "1.5707963267948966",
        "--psi",
        "0.5773502691896258,0,0.816496580927726,0",
        "--resolution",
        "101",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (n, rows) = pgm_pixels(&fs::read_to_string(&path).unwrap());
    assert_eq!(n, 101);
    assert_eq!(rows.len(), 101);
    // top-left is (x, y) = (0, 1)
    assert_eq!(rows[0][0], 29491);
    for k in 0..n {
        assert_eq!(rows[n - 1 - k][k], 65535);
    }

    let csv = fs::read_to_string(path.with_extension("csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,y,p_xy"));
    let mut cells = 0;
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        let (i, j) = ((v[1] * 100.0).round() as usize, (v[0] * 100.0).round() as usize);
        assert_eq!(rows[n - 1 - i][j], (v[2] * 65535.0).round() as u32);
        cells += 1;
    }
    assert_eq!(cells, n * n);
}

#[test]
fn two_by_two_heatmap() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("small.pgm");
    let psi = "0.5773502691896258,0,0.816496580927726,0";
    cqi(&[
        "heatmap",
        "--theta",
        "1.5707963267948966",
        "--psi",
        psi,
        "--resolution",
        "2",
        "--output",
        path.to_str().unwrap(),
    ]);
    let (_, rows) = pgm_pixels(&fs::read_to_string(&path).unwrap());
    // rows[0] is y = 1, rows[1] is y = 0
    assert_eq!(rows[0], vec![29491, 65535]);
    assert_eq!(rows[1][0], 65535);
    let exact = stdout(&cqi(&["exact", "--theta", "1.5707963267948966", "--x", "1", "--y", "0", "--psi", psi]));
    let p: f64 = field(&exact, "p_analytic").parse().unwrap();
    assert_eq!(rows[1][1], (p * 65535.0).round() as u32);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let run = |seed: &str| cqi(&[&["run"], &REF[..], &["--shots", "5000", "--seed", seed]].concat()).stdout;
    assert_eq!(run("11"), run("11"));
    assert_ne!(run("11"), run("12"));

    let dir = tempfile::tempdir().unwrap();
    let render = |name: &str| {
        let path = dir.path().join(name);
        cqi(&[
            "heatmap",
            "--theta",
            "0.9",
            "--bloch",
            "1,0.3",
            "--resolution",
            "17",
            "--output",
            path.to_str().unwrap(),
        ]);
        (fs::read(&path).unwrap(), fs::read(path.with_extension("csv")).unwrap())
    };
    assert_eq!(render("a.pgm"), render("b.pgm"));

    let sweep = || cqi(&["sweep", "--theta", "0.9", "--bloch", "1,0.3", "--resolution", "5"]).stdout;
    assert_eq!(sweep(), sweep());
}

#[test]
fn sweep_rows_follow_grid_order() {
    let out = stdout(&cqi(&["sweep", "--theta", "1.2", "--psi", "1,0,0,0", "--resolution", "3"]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "theta,x,y,p_s,p,p_uqsd,p_eqi_check,p_eqi_hat,p_xy,p_oracle");
    assert_eq!(lines.len(), 10);
    assert!(lines[1].starts_with("1.2,0,0,"));
    assert!(lines[2].starts_with("1.2,0.5,0,"));
    assert!(lines[4].starts_with("1.2,0,0.5,"));
}

#[test]
fn verify_reports_every_check_and_honors_the_hook() {
    let o = cqi(&["verify", "--seed", "12345"]);
    let out = stdout(&o);
    let failed = out.lines().filter(|l| l.starts_with("FAIL")).count();
    assert!(out.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).count() >= 20);
    assert_eq!(o.status.code(), Some(if failed == 0 { 0 } else { 1 }));

    let other = stdout(&cqi(&["verify", "--seed", "54321"]));
    let verdicts =
        |s: &str| s.lines().map(|l| l.split_whitespace().take(2).collect::<Vec<_>>().join(" ")).collect::<Vec<_>>();
    assert_eq!(verdicts(&out), verdicts(&other));

    let o = cqi(&["verify", "--tolerance-scale", "-1"]);
    assert_eq!(o.status.code(), Some(1));
}
