use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn drawpath(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_drawpath"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn sketch() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/sketch.png")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn version_and_help() {
    let out = drawpath(&["--version"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("drawpath "));
    let out = drawpath(&["--help"]);
    assert!(out.status.success());
    let help = String::from_utf8_lossy(&out.stdout);
    for cmd in ["contour", "trace", "plan", "render", "bench", "pipeline"] {
        assert!(help.contains(cmd), "{cmd}");
    }
}

#[test]
fn stage_by_stage() {
    let dir = tempfile::tempdir().unwrap();
    let contour = dir.path().join("c.png");
    let segs = dir.path().join("s.json");
    let plan = dir.path().join("p.json");
    let svg = dir.path().join("p.svg");
    assert!(drawpath(&["contour", s(&sketch()), "-o", s(&contour)]).status.success());
    assert!(drawpath(&["trace", s(&contour), "-o", s(&segs)]).status.success());
    let out = drawpath(&["plan", s(&segs), "-o", s(&plan), "--method", "greedy2opt", "--home", "-2,5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(drawpath(&["render", s(&plan), "-o", s(&svg)]).status.success());
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.contains("<polyline") && text.contains(r#"cx="-2" cy="5""#));
    let plan_text = std::fs::read_to_string(&plan).unwrap();
    assert!(plan_text.contains("\"pen\": \"down\""));
}

#[test]
fn pipeline_writes_all_outputs_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let run = drawpath(&[
            "pipeline",
            s(&sketch()),
            "-o",
            s(out),
            "--seed",
            "5",
            "--population-size",
            "30",
            "--max-generations",
            "20",
        ]);
        assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    }
    for f in ["contour.png", "segments.json", "path.json", "plan.svg", "report.json"] {
        assert!(a.join(f).exists(), "{f}");
    }
    for f in ["segments.json", "path.json", "plan.svg"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(&cfg, "method = \"greedy\"\ncost_lift = 10.0\n").unwrap();
    let segs = dir.path().join("s.json");
    std::fs::write(
        &segs,
        r#"{"width":20,"height":20,"segments":[{"id":0,"points":[[0,0],[1,0],[2,0]]},{"id":1,"points":[[9,9],[9,10],[9,11]]}]}"#,
    )
    .unwrap();
    let plan = dir.path().join("p.json");
    let out = drawpath(&["--config", s(&cfg), "plan", s(&segs), "-o", s(&plan)]);
    let stdout = String::from_utf8_lossy(&out.stdout).to_string();
    assert!(out.status.success());
    assert!(stdout.starts_with("greedy:"), "{stdout}");
    let text = std::fs::read_to_string(&plan).unwrap();
    assert!(text.contains("\"cost_lift\": 10.0"));

    let out = drawpath(&["--config", s(&cfg), "plan", s(&segs), "-o", s(&plan), "--method", "greedy2opt", "--cost-lift", "12"]);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("greedy2opt:"));
    assert!(std::fs::read_to_string(&plan).unwrap().contains("\"cost_lift\": 12.0"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.png");
    let out = drawpath(&["pipeline", s(&missing), "-o", s(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("load stage"));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "unknown_key = 3\n").unwrap();
    let out = drawpath(&["--config", s(&bad), "pipeline", s(&sketch()), "-o", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown_key"));

    let out = drawpath(&["contour", s(&sketch()), "-o", s(&dir.path().join("c.png")), "--rho", "0.5"]);
    assert_eq!(out.status.code(), Some(2));

    let out = drawpath(&["bench", "--methods", "simulated-annealing"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn blank_image_pipeline_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    // A 3x2 white PGM.
    let input = dir.path().join("blank.pgm");
    std::fs::write(&input, "P2\n3 2\n255\n255 255 255\n255 255 255\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = drawpath(&["pipeline", s(&input), "-o", s(&out_dir)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!out_dir.join("path.json").exists());
    assert!(out_dir.join("plan.svg").exists());
}

#[test]
fn bench_writes_table_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("b.csv");
    let out = drawpath(&[
        "bench",
        "--trials",
        "1",
        "--methods",
        "greedy,greedy2opt",
        "--csv",
        s(&csv),
        "--threads",
        "1",
    ]);
    assert!(out.status.success());
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.contains("Avg.") && table.contains("sketch5"));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 5 * 2);
    assert!(text.contains("sketch1,greedy,1,"));
}
