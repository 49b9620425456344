use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use vmkit_core::io;
use vmkit_core::{FlowField, GrayMap, ImageRgb, Plane, Vec2};

fn vmkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vmkit")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = vmkit(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn pattern(h: usize, w: usize, seed: usize) -> ImageRgb {
    Plane::from_fn(h, w, |x, y| {
        let v = ((x * (7 + seed) + y * 13 + x * y % 7) % 31) as f64 / 30.0;
        [v, 1.0 - v, 0.5]
    })
}

/// Two portraits and one 3-frame background clip, 128×128.
fn assets(root: &Path) -> (PathBuf, PathBuf) {
    let fg = root.join("fg");
    let bg = root.join("bg");
    fs::create_dir_all(&fg).unwrap();
    fs::create_dir_all(bg.join("street")).unwrap();
    for (k, id) in ["anna", "ben"].iter().enumerate() {
        io::write_rgb(&fg.join(format!("{id}.png")), &pattern(128, 128, k)).unwrap();
        let alpha: GrayMap = Plane::from_fn(128, 128, |x, y| {
            let d = ((x as f64 - 64.0).powi(2) + (y as f64 - 64.0).powi(2)).sqrt();
            (30.0 - d).clamp(0.0, 1.0)
        });
        io::write_gray16(&fg.join(format!("{id}_alpha.png")), &alpha).unwrap();
    }
    for t in 0..3 {
        io::write_rgb(&bg.join("street").join(format!("{t:03}.png")), &pattern(128, 128, 5 + t)).unwrap();
    }
    (fg, bg)
}

fn gen_args<'a>(fg: &'a Path, bg: &'a Path, out: &'a Path) -> Vec<&'a str> {
    vec!["gen", "--foregrounds", s(fg), "--backgrounds", s(bg), "--out", s(out), "--size", "128x128", "--frames", "2"]
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn zero_clips_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let (fg, bg) = assets(dir.path());
    let out = dir.path().join("out");
    let mut args = gen_args(&fg, &bg, &out);
    args.extend(["--clips", "0"]);
    ok(&args);
    assert!(!out.exists());
}

#[test]
fn generation_is_deterministic_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let (fg, bg) = assets(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let mut args = gen_args(&fg, &bg, &a);
    args.extend(["--clips", "3", "--seed", "42", "--jobs", "1"]);
    ok(&args);
    let mut args = gen_args(&fg, &bg, &b);
    args.extend(["--clips", "3", "--seed", "42", "--jobs", "3"]);
    ok(&args);
    let (ta, tb) = (tree(&a), tree(&b));
    assert_eq!(ta, tb);
    let names: Vec<&str> = ta.iter().map(|(n, _)| n.as_str()).filter(|n| n.ends_with("manifest.json")).collect();
    assert_eq!(names.len(), 3);
    assert!(ta.iter().any(|(n, _)| n == "clip_000002/flow_0001_to_0002.flo"));
    assert!(!ta.iter().any(|(n, _)| n.contains(".tmp")));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let (fg, bg) = assets(dir.path());
    let out = dir.path().join("out");
    let cfg = dir.path().join("run.json");
    let text = format!(
        r#"{{"foregrounds": {:?}, "backgrounds": {:?}, "out": {:?}, "size": "128x128", "frames": 3, "clips": 1, "seed": 7}}"#,
        s(&fg),
        s(&bg),
        s(&out)
    );
    fs::write(&cfg, text).unwrap();
    ok(&["gen", "--config", s(&cfg), "--frames", "2"]);
    let m: serde_json::Value = serde_json::from_slice(&fs::read(out.join("clip_000000/manifest.json")).unwrap()).unwrap();
    assert_eq!(m["frames"], 2);
    assert_eq!(m["seed"], vmkit_core::seed::mix64(7, 0));
}

#[test]
fn missing_alpha_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let (fg, bg) = assets(dir.path());
    fs::remove_file(fg.join("ben_alpha.png")).unwrap();
    let out = vmkit(&gen_args(&fg, &bg, &dir.path().join("out")));
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("ben_alpha.png"));
}

#[test]
fn static_video_flow_is_zero_and_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let frames = dir.path().join("frames");
    fs::create_dir_all(&frames).unwrap();
    for i in 1..=2 {
        io::write_rgb(&frames.join(format!("frame_{i:04}.png")), &pattern(40, 56, 1)).unwrap();
    }
    let out = dir.path().join("flows");
    ok(&["flow", "--input", s(&frames), "--out", s(&out)]);
    assert_eq!(io::read_flo(&out.join("forward_0002.flo")).unwrap(), FlowField::zeros(40, 56));
    assert_eq!(io::read_flo(&out.join("backward_0001.flo")).unwrap(), FlowField::zeros(40, 56));
    assert!(io::read_gray(&out.join("consistency_0002.png")).unwrap().data().iter().all(|&c| c == 1.0));
}

#[test]
fn single_frame_smoothing_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let probs = dir.path().join("probs");
    fs::create_dir_all(&probs).unwrap();
    let p: GrayMap = Plane::from_fn(9, 11, |x, y| ((x * 3 + y * 5) % 17) as f64 / 16.0);
    io::write_gray16(&probs.join("frame_0001.png"), &p).unwrap();
    let out = dir.path().join("smooth");
    ok(&["smooth", "--probs", s(&probs), "--flows", s(&dir.path().join("none")), "--out", s(&out)]);
    assert_eq!(fs::read(out.join("frame_0001.png")).unwrap(), fs::read(probs.join("frame_0001.png")).unwrap());
}

#[test]
fn smoothing_consumes_flow_output() {
    let dir = tempfile::tempdir().unwrap();
    let (frames, probs) = (dir.path().join("frames"), dir.path().join("probs"));
    fs::create_dir_all(&frames).unwrap();
    fs::create_dir_all(&probs).unwrap();
    for i in 1..=3 {
        io::write_rgb(&frames.join(format!("frame_{i:04}.png")), &pattern(48, 48, i)).unwrap();
        io::write_gray16(&probs.join(format!("frame_{i:04}.png")), &Plane::filled(48, 48, 1.0)).unwrap();
    }
    let flows = dir.path().join("flows");
    ok(&["flow", "--input", s(&frames), "--out", s(&flows), "--block-size", "8", "--search-radius", "4"]);
    let out = dir.path().join("smooth");
    ok(&["smooth", "--probs", s(&probs), "--flows", s(&flows), "--out", s(&out)]);
    for i in 1..=3 {
        let a = io::read_gray(&out.join(format!("frame_{i:04}.png"))).unwrap();
        assert!(a.data().iter().all(|&v| v == 1.0));
    }
    let tri = dir.path().join("tri");
    ok(&["trimap", "--probs", s(&out), "--out", s(&tri)]);
    let t = image_bytes(&tri.join("frame_0002.png"));
    assert!(t.iter().all(|&v| v == 255 || v == 128));
}

fn image_bytes(path: &Path) -> Vec<u8> {
    io::read_gray(path).unwrap().data().iter().map(|&v| io::quantize_u8(v)).collect()
}

#[test]
fn metrics_and_losses_against_ground_truth() {
    let dir = tempfile::tempdir().unwrap();
    let (fg, bg) = assets(dir.path());
    let out = dir.path().join("out");
    let mut args = gen_args(&fg, &bg, &out);
    args.extend(["--seed", "3"]);
    ok(&args);
    let clip = out.join("clip_000000");
    let report = ok(&["metrics", "--clip", s(&clip), "--pred", s(&clip)]);
    let m: serde_json::Value = serde_json::from_slice(&report.stdout).unwrap();
    for key in ["ssda", "dtssd", "messddt"] {
        assert_eq!(m[key], 0.0, "{key}");
    }
    let file = dir.path().join("losses.json");
    ok(&["losses", "--clip", s(&clip), "--pred", s(&clip), "--out", s(&file)]);
    let l: serde_json::Value = serde_json::from_slice(&fs::read(file).unwrap()).unwrap();
    assert_eq!(l["l_alpha"], 0.0);
    assert_eq!(l["l_foreground"], 0.0);
}

#[test]
fn malformed_flow_names_file_and_offset() {
    let dir = tempfile::tempdir().unwrap();
    let probs = dir.path().join("probs");
    let flows = dir.path().join("flows");
    fs::create_dir_all(&probs).unwrap();
    fs::create_dir_all(&flows).unwrap();
    for i in 1..=2 {
        io::write_gray16(&probs.join(format!("frame_{i:04}.png")), &Plane::filled(4, 4, 0.5)).unwrap();
    }
    let mut bytes = io::encode_flo(&FlowField::constant(4, 4, Vec2::new(1.0, 0.0)));
    bytes[0] = b'X';
    fs::write(flows.join("forward_0002.flo"), bytes).unwrap();
    io::write_gray16(&flows.join("consistency_0002.png"), &Plane::filled(4, 4, 1.0)).unwrap();
    let out = vmkit(&["smooth", "--probs", s(&probs), "--flows", s(&flows), "--out", s(&dir.path().join("o"))]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("forward_0002.flo") && err.contains("byte 0"), "{err}");
}

#[test]
fn missing_required_setting() {
    let out = vmkit(&["flow"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("input"));
}
