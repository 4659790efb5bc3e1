//! End-to-end tests of the installed binaries: the demo generator, the
//! evaluation pipeline, exit codes, and artifact determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

fn poseval() -> Command {
    Command::new(env!("CARGO_BIN_EXE_poseval"))
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// One shared demo dataset plus a completed evaluation over it.
struct DemoRun {
    root: PathBuf,
    out: PathBuf,
    _dir: tempfile::TempDir,
}

fn demo_run() -> &'static DemoRun {
    static RUN: OnceLock<DemoRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let dir = tempfile::tempdir().expect("tempdir");
        let root = dir.path().join("demo");
        let gen = run(Command::new(env!("CARGO_BIN_EXE_poseval-demo"))
            .args(["--out", root.to_str().unwrap(), "--seed", "7"]));
        assert!(gen.status.success(), "demo generation failed: {}", stderr(&gen));
        let out = dir.path().join("out");
        let eval = run(poseval()
            .args(["evaluate", "--config"])
            .arg(root.join("config.toml"))
            .arg("--output-dir")
            .arg(&out));
        assert!(eval.status.success(), "evaluate failed: {}", stderr(&eval));
        DemoRun { root, out, _dir: dir }
    })
}

fn read_tree(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_path_buf();
                files.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn evaluate_produces_expected_artifacts() {
    let demo = demo_run();
    for name in ["metrics.csv", "trials.csv", "summary.csv", "summary.json", "auc.csv", "auc.json", "manifest.json"] {
        assert!(demo.out.join(name).is_file(), "{name} missing");
    }
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(demo.out.join("manifest.json")).unwrap()).unwrap();
    assert!(manifest["content_hash"].as_str().unwrap().len() == 64);
    // The demo's loose estimator ships a detection with no ground truth
    // at all, and estimates whose ground truth fell below the visibility
    // threshold also count as spurious; none may be silently dropped.
    assert!(manifest["spurious_estimates"]["loose"].as_u64() >= Some(2));
    assert!(manifest["spurious_estimates"]["tight"].as_u64() >= Some(1));
    // Pooled failure curves exist per gripper and metric.
    assert!(demo.out.join("curves").join("parallel_mssd.csv").is_file());
    assert!(demo.out.join("curves").join("underactuated_rot.csv").is_file());

    // Visibility filtering shows up as per-group exclusions.
    let summary = std::fs::read_to_string(demo.out.join("summary.csv")).unwrap();
    let excluded_col = summary
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').nth(1).unwrap().parse::<u32>().unwrap())
        .sum::<u32>();
    assert!(excluded_col > 0, "expected some ground truth excluded for low visibility");
}

#[test]
fn reruns_are_byte_identical() {
    let demo = demo_run();
    let second = demo.root.parent().unwrap().join("out-rerun");
    let eval = run(poseval()
        .args(["evaluate", "--config"])
        .arg(demo.root.join("config.toml"))
        .arg("--output-dir")
        .arg(&second));
    assert!(eval.status.success(), "{}", stderr(&eval));
    assert_eq!(read_tree(&demo.out), read_tree(&second));
}

#[test]
fn validate_catalog_passes_on_demo() {
    let demo = demo_run();
    let out = run(poseval()
        .args(["validate-catalog", "--config"])
        .arg(demo.root.join("config.toml")));
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("not-applicable: object 10 with parallel gripper"), "{text}");
    assert!(text.contains("0 failed"), "{text}");
}

#[test]
fn inspect_reports_transform_chain() {
    let demo = demo_run();
    let out = run(poseval()
        .args(["inspect", "--config"])
        .arg(demo.root.join("config.toml"))
        .args(["--estimator", "tight", "--scene", "1", "--image", "1", "--object", "3"]));
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8_lossy(&out.stdout);
    for needle in ["ground truth pose", "deviation in object frame", "perturbed plan"] {
        assert!(text.contains(needle), "missing {needle:?} in:\n{text}");
    }
}

/// Rewrites the demo config's relative path values as absolute paths so a
/// patched copy can live in a different directory.
fn rebase_config(text: &str, root: &Path) -> String {
    const PATH_KEYS: [&str; 6] = [
        "dataset_root",
        "gripper_config",
        "grasp_catalog",
        "physical_sidecar",
        "output_dir",
        "path",
    ];
    text.lines()
        .map(|l| {
            if let Some((key, value)) = l.split_once(" = \"") {
                let value = value.trim_end_matches('"');
                if PATH_KEYS.contains(&key.trim()) && !value.starts_with('/') {
                    return format!("{key} = \"{}\"", root.join(value).display());
                }
            }
            l.to_string()
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn missing_config_exits_1() {
    let out = run(poseval().args(["evaluate", "--config", "/nonexistent/config.toml"]));
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
}

#[test]
fn invalid_config_field_exits_1() {
    let demo = demo_run();
    let dir = tempfile::tempdir().unwrap();
    let text = rebase_config(
        &std::fs::read_to_string(demo.root.join("config.toml")).unwrap(),
        &demo.root,
    )
    .replace("visibility_min = 0.5", "visibility_min = 1.5");
    let path = dir.path().join("config.toml");
    std::fs::write(&path, text).unwrap();
    let out = run(poseval().args(["evaluate", "--config"]).arg(&path));
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    assert!(stderr(&out).contains("visibility_min"), "{}", stderr(&out));
}

#[test]
fn malformed_result_file_exits_2() {
    let demo = demo_run();
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "1,1,1,not-a-score,1 0 0 0 1 0 0 0 1,0 0 0,0.1\n").unwrap();
    let mut text = rebase_config(
        &std::fs::read_to_string(demo.root.join("config.toml")).unwrap(),
        &demo.root,
    );
    // Point the first estimator at the malformed file.
    let first_path = text
        .lines()
        .find(|l| l.starts_with("path = "))
        .expect("config lists result files")
        .to_string();
    text = text.replacen(&first_path, &format!("path = \"{}\"", bad.display()), 1);
    let patched = dir.path().join("patched.toml");
    std::fs::write(&patched, text).unwrap();
    let out = run(poseval().args(["evaluate", "--config"]).arg(&patched));
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn corrupted_catalog_exits_3() {
    let demo = demo_run();
    let dir = tempfile::tempdir().unwrap();
    // Displace every reference hand pose far above the objects so the
    // zero-deviation validation trial cannot make contact.
    let mut catalog: serde_json::Value = serde_json::from_slice(
        &std::fs::read(demo.root.join("assets").join("catalog.json")).unwrap(),
    )
    .unwrap();
    for grasp in catalog["grasps"].as_array_mut().unwrap() {
        grasp["hand_translation"][2] =
            serde_json::json!(grasp["hand_translation"][2].as_f64().unwrap() + 500.0);
    }
    let bad_catalog = dir.path().join("catalog.json");
    std::fs::write(&bad_catalog, serde_json::to_vec(&catalog).unwrap()).unwrap();
    let mut text = rebase_config(
        &std::fs::read_to_string(demo.root.join("config.toml")).unwrap(),
        &demo.root,
    );
    let original = format!("grasp_catalog = \"{}\"", demo.root.join("assets/catalog.json").display());
    let replacement = format!("grasp_catalog = \"{}\"", bad_catalog.display());
    assert!(text.contains(&original), "unexpected config layout:\n{text}");
    text = text.replace(&original, &replacement);
    let path = dir.path().join("config.toml");
    std::fs::write(&path, text).unwrap();
    let out = run(poseval().args(["validate-catalog", "--config"]).arg(&path));
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn broken_external_adapter_exits_4() {
    let demo = demo_run();
    let dir = tempfile::tempdir().unwrap();
    let text = rebase_config(
        &std::fs::read_to_string(demo.root.join("config.toml")).unwrap(),
        &demo.root,
    )
    .replace(
        "visibility_min = 0.5",
        "visibility_min = 0.5\noutcome_model = \"external:cmd:/bin/cat /dev/null\"",
    );
    let path = dir.path().join("config.toml");
    std::fs::write(&path, text).unwrap();
    let out = run(poseval()
        .args(["evaluate", "--config"])
        .arg(&path)
        .arg("--output-dir")
        .arg(dir.path().join("out")));
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
}
