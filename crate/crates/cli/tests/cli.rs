use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use p2v_core::render::RenderStyle;
use p2v_core::sim::{default_scenario, ScenarioConfig};
use tempfile::TempDir;

fn p2v(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_p2v"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn run_default(dir: &TempDir, name: &str, extra: &[&str]) -> (Output, PathBuf) {
    let out = dir.path().join(name);
    let mut args = vec!["run", "--default", "--out", path_str(&out)];
    args.extend_from_slice(extra);
    (p2v(&args), out)
}

fn summary_field(summary: &str, key: &str) -> String {
    summary
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("{key} missing from {summary:?}"))
        .to_string()
}

#[test]
fn checked_in_default_matches_builtin() {
    let text = fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/scenarios/default.json"
    ))
    .unwrap();
    let file: ScenarioConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(file, default_scenario());
}

#[test]
fn run_default_orders_warnings() {
    let dir = TempDir::new().unwrap();
    let (o, trace) = run_default(&dir, "t.csv", &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    let yellow: usize = summary_field(&s, "yellow_first_tick").parse().unwrap();
    let orange: usize = summary_field(&s, "orange_first_tick").parse().unwrap();
    assert!(yellow < orange);
    assert_eq!(summary_field(&s, "red_first_tick"), "-");
    assert_eq!(summary_field(&s, "final_vehicle_speed"), "0.000");
    assert!(trace.exists());
    assert!(dir.path().join("t.scenario.json").exists());
}

#[test]
fn run_from_config_file_matches_default() {
    let dir = TempDir::new().unwrap();
    let (a, ta) = run_default(&dir, "a.csv", &[]);
    let tb = dir.path().join("b.csv");
    let b = p2v(&[
        "run",
        "--config",
        concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/default.json"),
        "--out",
        path_str(&tb),
    ]);
    assert!(b.status.success(), "{}", stderr(&b));
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(fs::read(ta).unwrap(), fs::read(tb).unwrap());
}

#[test]
fn missing_config_is_a_config_error() {
    let o = p2v(&["run", "--config", "/definitely/not/here.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!stderr(&o).is_empty());
}

#[test]
fn invalid_config_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let (o, _) = run_default(&dir, "t.csv", &["--override", "tick_ms=0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ConfigInvalid"), "{}", stderr(&o));
    let (o, _) = run_default(&dir, "t.csv", &["--override", "no_such_key=1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let o = p2v(&["run", "--default", "--out", "/definitely/not/here/t.csv"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn seed_override_changes_pattern_deterministically() {
    let dir = TempDir::new().unwrap();
    let (_, base) = run_default(&dir, "base.csv", &[]);
    let (o1, t1) = run_default(&dir, "s1.csv", &["--override", "channel.seed=7"]);
    let (o2, t2) = run_default(&dir, "s2.csv", &["--override", "channel.seed=7"]);
    assert!(o1.status.success() && o2.status.success());
    assert_eq!(stdout(&o1), stdout(&o2));
    let (b1, b2) = (fs::read(&t1).unwrap(), fs::read(&t2).unwrap());
    assert_eq!(b1, b2);
    let delivered = |bytes: &[u8]| -> Vec<String> {
        String::from_utf8_lossy(bytes)
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(7).unwrap().to_string())
            .collect()
    };
    assert_ne!(delivered(&b1), delivered(&fs::read(base).unwrap()));
}

#[test]
fn plot_default_trace_colors() {
    let dir = TempDir::new().unwrap();
    let (o, trace) = run_default(&dir, "t.csv", &[]);
    assert!(o.status.success());
    let svg_path = dir.path().join("t.svg");
    let p = p2v(&[
        "plot",
        "--trace",
        path_str(&trace),
        "--out",
        path_str(&svg_path),
    ]);
    assert!(p.status.success(), "{}", stderr(&p));

    let svg = fs::read_to_string(&svg_path).unwrap();
    let mut colors: Vec<String> = svg
        .lines()
        .filter(|l| l.starts_with("<circle"))
        .map(|l| {
            l.split("fill=\"")
                .nth(1)
                .unwrap()
                .split('"')
                .next()
                .unwrap()
                .to_string()
        })
        .collect();
    colors.sort();
    colors.dedup();
    let style = RenderStyle::default();
    let mut want = vec![
        style.pedestrian,
        style.vehicle_none,
        style.yellow,
        style.orange,
    ];
    want.sort();
    assert_eq!(colors, want);
    assert!(!svg.contains(&style.red));

    let ticks = fs::read_to_string(&trace).unwrap().lines().count() - 1;
    let gj: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("t.geojson")).unwrap()).unwrap();
    let n_obs = default_scenario().obstructions.len();
    assert_eq!(gj["features"].as_array().unwrap().len(), 2 * ticks + n_obs);
}

#[test]
fn plot_is_byte_stable() {
    let dir = TempDir::new().unwrap();
    let (_, trace) = run_default(&dir, "t.csv", &[]);
    let a = dir.path().join("a.svg");
    let b = dir.path().join("b.svg");
    for out in [&a, &b] {
        assert!(
            p2v(&["plot", "--trace", path_str(&trace), "--out", path_str(out)])
                .status
                .success()
        );
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(
        fs::read(a.with_extension("geojson")).unwrap(),
        fs::read(b.with_extension("geojson")).unwrap()
    );
}

#[test]
fn plot_rejects_empty_and_malformed_traces() {
    let dir = TempDir::new().unwrap();
    let empty = dir.path().join("empty.csv");
    fs::write(
        &empty,
        "t_ms,veh_e,veh_n,veh_v,ped_e,ped_n,ped_v,delivered,los,ttz_v,ttz_p,warning\n",
    )
    .unwrap();
    let out = dir.path().join("x.svg");
    let o = p2v(&["plot", "--trace", path_str(&empty), "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("empty"));

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "hello,world\n1,2\n").unwrap();
    let o = p2v(&["plot", "--trace", path_str(&bad), "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn codec_round_trip() {
    let fields = [
        "msg_count=42",
        "second_mark=12345",
        "latitude=400000000",
        "longitude=-830000000",
        "speed=70",
        "heading=7200",
        "basic_type=Pedestrian",
        "device_use_state=Typing",
        "cross_request=true",
        "cluster_size=0",
        "attachment=Stroller",
    ];
    let mut args = vec!["codec", "encode"];
    args.extend_from_slice(&fields);
    let e = p2v(&args);
    assert!(e.status.success(), "{}", stderr(&e));
    let hex = stdout(&e).trim().to_string();
    assert_eq!(hex.len(), 40);
    assert_eq!(&hex[10..18], "17d78400");

    let d = p2v(&["codec", "decode", &hex]);
    assert!(d.status.success(), "{}", stderr(&d));
    let lines: Vec<String> = stdout(&d).lines().map(str::to_string).collect();
    assert_eq!(lines, fields);
}

#[test]
fn codec_errors_are_named() {
    let o = p2v(&["codec", "decode", "2001"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("BadLength"));

    let o = p2v(&["codec", "decode", &"21".repeat(20)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("BadTag"));

    let o = p2v(&["codec", "encode", "speed=9000"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("speed"), "{}", stderr(&o));
}
