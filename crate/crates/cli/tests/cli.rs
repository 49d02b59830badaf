use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use wfaug::annotation::{read_label_track, write_label_track};
use wfaug::segment::SegmentDb;
use wfaug::{ClassCatalog, ClassId, LabelTrack};

const CATALOG: &str = r#"
[[tools]]
name = "a"
[[tools]]
name = "b"
[[tools]]
name = "c"
"#;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_wfaug"));
    c.env_remove("WFAUG_CONFIG");
    c
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = run(args, dir);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn track(id: &str, runs: &[(u32, usize)]) -> LabelTrack {
    LabelTrack::new(id, runs.iter().flat_map(|&(c, n)| std::iter::repeat_n(ClassId(c), n)).collect())
}

fn write_tracks(dir: &Path, tracks: &[LabelTrack]) {
    fs::create_dir_all(dir).unwrap();
    let cat = ClassCatalog::parse_toml(CATALOG).unwrap();
    for t in tracks {
        let mut buf = Vec::new();
        write_label_track(t, &cat, &mut buf).unwrap();
        fs::write(dir.join(format!("{}.csv", t.video_id)), buf).unwrap();
    }
}

/// Three small videos over classes a, b, c.
fn small_corpus() -> (tempfile::TempDir, Vec<LabelTrack>) {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("catalog.toml"), CATALOG).unwrap();
    let tracks = vec![
        track("v1", &[(1, 6), (2, 5), (3, 7)]),
        track("v2", &[(1, 4), (0, 2), (2, 6), (1, 3), (2, 4), (3, 5)]),
        track("v3", &[(1, 5), (3, 8)]),
    ];
    write_tracks(&dir.path().join("ann"), &tracks);
    (dir, tracks)
}

fn demo() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    ok(&["demo-corpus", "--out", "."], dir.path());
    dir
}

fn read_dir_sorted(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<_> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

#[test]
fn extract_lists_endpoints_and_empirical_weights_follow_counts() {
    let (dir, _) = small_corpus();
    let d = dir.path();
    let report = ok(&["--catalog", "catalog.toml", "extract-workflow", "ann", "--out", "g.json"], d);
    assert!(report.contains("starts:") && report.contains("finals:"));
    let g: serde_json::Value = serde_json::from_slice(&fs::read(d.join("g.json")).unwrap()).unwrap();
    assert_eq!(g["starts"][0]["class"], "a");
    assert_eq!(g["finals"][0]["class"], "c");

    ok(&["--catalog", "catalog.toml", "extract-workflow", "ann", "--out", "e.json", "--mode", "empirical"], d);
    let e: serde_json::Value = serde_json::from_slice(&fs::read(d.join("e.json")).unwrap()).unwrap();
    // a -> b occurs 3x, a -> c once; b -> c 2x, b -> a once.
    let mut w = BTreeMap::new();
    for edge in e["edges"].as_array().unwrap() {
        w.insert(
            (edge["from"].as_str().unwrap().to_string(), edge["to"].as_str().unwrap().to_string()),
            edge["weight"].as_f64().unwrap(),
        );
    }
    assert!((w[&("a".into(), "b".into())] - 0.75).abs() < 1e-12);
    assert!((w[&("a".into(), "c".into())] - 0.25).abs() < 1e-12);
    assert!((w[&("b".into(), "a".into())] - 1.0 / 3.0).abs() < 1e-12);
    assert_ne!(fs::read(d.join("g.json")).unwrap(), fs::read(d.join("e.json")).unwrap());
}

#[test]
fn empty_annotation_dir_is_a_data_error() {
    let (dir, _) = small_corpus();
    fs::create_dir(dir.path().join("empty")).unwrap();
    let out = run(&["--catalog", "catalog.toml", "extract-workflow", "empty", "--out", "g.json"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn missing_catalog_and_bad_flags_are_validation_errors() {
    let (dir, _) = small_corpus();
    let out = run(&["extract-workflow", "ann", "--out", "g.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["--catalog", "catalog.toml", "extract-workflow", "ann", "--out", "g.json", "--mode", "x"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["--catalog", "catalog.toml", "generate", "ann", "--out", "o", "--decay", "0"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn segments_round_trip_and_rerun_is_identical() {
    let (dir, tracks) = small_corpus();
    let d = dir.path();
    let report = ok(&["--catalog", "catalog.toml", "build-segments", "ann", "--out", "m.json"], d);
    let first = fs::read(d.join("m.json")).unwrap();
    ok(&["--catalog", "catalog.toml", "build-segments", "ann", "--out", "m.json"], d);
    assert_eq!(first, fs::read(d.join("m.json")).unwrap());

    let cat = ClassCatalog::parse_toml(CATALOG).unwrap();
    let db = SegmentDb::load(&d.join("m.json"), &cat).unwrap();
    for t in &tracks {
        let mut segs: Vec<_> = db.segments().iter().filter(|s| s.video_id == t.video_id).collect();
        segs.sort_by_key(|s| s.start);
        let joined: Vec<ClassId> = segs.iter().flat_map(|s| s.classes.iter().copied()).collect();
        assert_eq!(joined, t.frames);
    }

    // Segment lengths, quartiles by sorting.
    let mut lens: Vec<f64> = db.segments().iter().map(|s| s.len() as f64).collect();
    lens.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let h = p * (lens.len() - 1) as f64;
        let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
        lens[lo] + (h - lo as f64) * (lens[hi] - lens[lo])
    };
    let line = report.lines().find(|l| l.trim_start().starts_with("segment length")).unwrap();
    let nums: Vec<f64> = line.split_whitespace().skip(2).map(|x| x.parse().unwrap()).collect();
    assert_eq!(nums[1], (q(0.25) * 10.0).round() / 10.0);
    assert_eq!(nums[2], (q(0.5) * 10.0).round() / 10.0);
    assert_eq!(nums[3], (q(0.75) * 10.0).round() / 10.0);
}

#[test]
fn generate_is_reproducible() {
    let dir = demo();
    let d = dir.path();
    ok(&["--config", "wfaug.toml", "generate", "annotations", "--num", "5", "--seed", "11", "--out", "g1"], d);
    ok(&["--config", "wfaug.toml", "--jobs", "1", "generate", "annotations", "--num", "5", "--seed", "11", "--out", "g2"], d);
    let plans = read_dir_sorted(&d.join("g1/plans"));
    assert_eq!(plans.len(), 5);
    for p in &plans {
        let other = d.join("g2/plans").join(p.file_name().unwrap());
        assert_eq!(fs::read(p).unwrap(), fs::read(other).unwrap());
    }
    ok(&["--config", "wfaug.toml", "generate", "annotations", "--num", "5", "--seed", "12", "--out", "g3"], d);
    assert_ne!(fs::read(&plans[0]).unwrap(), fs::read(d.join("g3/plans/gen00000.edl.json")).unwrap());
}

#[test]
fn identity_render_reproduces_source_pixels() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["demo-corpus", "--out", ".", "--frames", "6x4"], d);
    ok(
        &[
            "--config", "wfaug.toml", "generate", "annotations", "--num", "2", "--seed", "1", "--out", "g",
            "--render", "frames", "--no-spatial", "--unit-speed", "--interpolator", "identity",
        ],
        d,
    );
    for id in ["gen00000", "gen00001"] {
        let plan = wfaug::assemble::AssemblyPlan::load(&d.join(format!("g/plans/{id}.edl.json"))).unwrap();
        let out = read_dir_sorted(&d.join("g/frames").join(id));
        assert_eq!(out.len(), plan.labels.len());
        let mut k = 0;
        for e in &plan.entries {
            for i in e.start..e.end {
                let src = d.join("frames").join(&e.video).join(format!("{i:06}.png"));
                assert_eq!(fs::read(&src).unwrap(), fs::read(&out[k]).unwrap(), "{id} frame {k}");
                k += 1;
            }
        }
    }
}

#[test]
fn uncovered_transition_fails_with_message() {
    let (dir, _) = small_corpus();
    let d = dir.path();
    // Every walk of this graph uses c -> b, which no segment covers.
    write_tracks(&d.join("other"), &[track("w", &[(1, 3), (3, 3), (2, 3)])]);
    ok(&["--catalog", "catalog.toml", "extract-workflow", "other", "--out", "other.json"], d);
    let out = run(
        &["--catalog", "catalog.toml", "generate", "ann", "--graph", "other.json", "--num", "3", "--out", "o"],
        d,
    );
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("#3") && err.contains("#2"), "{err}");
}

#[test]
fn split_baseline_counts() {
    let dir = demo();
    let d = dir.path();
    let msg = ok(&["--config", "wfaug.toml", "split-baseline", "annotations", "--k", "10", "--out", "s"], d);
    assert!(msg.contains("190 sub-videos"), "{msg}");
    assert_eq!(read_dir_sorted(&d.join("s/plans")).len(), 190);
    assert_eq!(read_dir_sorted(&d.join("s/labels")).len(), 190);

    ok(&["--config", "wfaug.toml", "split-baseline", "annotations", "--k", "1", "--out", "s1", "--no-spatial"], d);
    assert_eq!(
        fs::read(d.join("annotations/skewed01.csv")).unwrap(),
        fs::read(d.join("s1/labels/skewed01-split00.csv")).unwrap()
    );
    let out = run(&["--config", "wfaug.toml", "split-baseline", "annotations", "--k", "100000", "--out", "s2"], d);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stats_percentages_and_uplift() {
    let dir = demo();
    let d = dir.path();
    ok(&["--config", "wfaug.toml", "generate", "annotations", "--num", "40", "--seed", "2", "--out", "g"], d);
    let text = ok(&["--config", "wfaug.toml", "stats", "annotations", "--compare", "g/labels", "--json", "c.json"], d);
    assert!(text.contains("min-class uplift"));
    let c: serde_json::Value = serde_json::from_slice(&fs::read(d.join("c.json")).unwrap()).unwrap();
    for side in ["source", "generated"] {
        let sum: f64 = c[side]["classes"].as_array().unwrap().iter().map(|r| r["percent"].as_f64().unwrap()).sum();
        assert!((sum - 100.0).abs() < 0.01);
    }

    // Frequency oracle for the uplift.
    let cat = wfaug::synth::skewed_catalog();
    let count = |dir: &Path| {
        let mut n = vec![0usize; cat.class_count()];
        for p in read_dir_sorted(dir) {
            let t = read_label_track(fs::File::open(&p).unwrap(), &p, "x", &cat).unwrap();
            t.frames.iter().for_each(|c| n[c.index()] += 1);
        }
        n
    };
    let (s, g) = (count(&d.join("annotations")), count(&d.join("g/labels")));
    let share = |n: &[usize], i: usize| n[i] as f64 / n.iter().sum::<usize>() as f64;
    let rare = (1..s.len()).min_by(|&a, &b| share(&s, a).total_cmp(&share(&s, b))).unwrap();
    assert_eq!(c["rarest_class"], cat.class_name(ClassId(rare as u32)));
    let expect = share(&g, rare) / share(&s, rare);
    assert!((c["rarest_uplift"].as_f64().unwrap() - expect).abs() < 1e-9);

    // More orderings in the generated corpus than in any single source video.
    let gen_orderings = c["generated"]["orderings"].as_u64().unwrap();
    assert!(gen_orderings > c["source"]["max_orderings_per_video"].as_u64().unwrap());
}

#[test]
fn evaluate_perfect_shuffled_and_missing() {
    let (dir, tracks) = small_corpus();
    let d = dir.path();
    let text = ok(&["--catalog", "catalog.toml", "evaluate", "ann", "ann", "--stride", "1", "--out", "m"], d);
    assert!(text.contains("ACC"));
    let m: serde_json::Value = serde_json::from_slice(&fs::read(d.join("m/metrics.json")).unwrap()).unwrap();
    assert_eq!(m["overall"]["accuracy"], 1.0);

    // Rotate each track's labels to get imperfect predictions.
    let preds: Vec<LabelTrack> = tracks
        .iter()
        .map(|t| {
            let mut f = t.frames.clone();
            f.rotate_left(3);
            LabelTrack::new(t.video_id.clone(), f)
        })
        .collect();
    write_tracks(&d.join("pred"), &preds);
    ok(&["--catalog", "catalog.toml", "evaluate", "ann", "pred", "--stride", "2", "--out", "m2"], d);
    let m: serde_json::Value = serde_json::from_slice(&fs::read(d.join("m2/metrics.json")).unwrap()).unwrap();
    let (mut hit, mut total) = (0, 0);
    let mut tp = [0usize; 4];
    let mut row = [0usize; 4];
    for (t, p) in tracks.iter().zip(&preds) {
        for i in (0..t.len()).step_by(2) {
            total += 1;
            row[t.frames[i].index()] += 1;
            if t.frames[i] == p.frames[i] {
                hit += 1;
                tp[t.frames[i].index()] += 1;
            }
        }
    }
    assert!((m["overall"]["accuracy"].as_f64().unwrap() - hit as f64 / total as f64).abs() < 1e-12);
    let present: Vec<usize> = (0..4).filter(|&i| row[i] > 0).collect();
    let rec = present.iter().map(|&i| tp[i] as f64 / row[i] as f64).sum::<f64>() / present.len() as f64;
    assert!((m["overall"]["macro_recall"].as_f64().unwrap() - rec).abs() < 1e-12);

    fs::remove_file(d.join("pred/v2.csv")).unwrap();
    let out = run(&["--catalog", "catalog.toml", "evaluate", "ann", "pred"], d);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn config_from_env_and_flag_override() {
    let (dir, _) = small_corpus();
    let d = dir.path();
    fs::write(d.join("run.toml"), "catalog = \"catalog.toml\"\nseed = 5\nnum_videos = 2\noutput = \"out\"\n").unwrap();
    let out = bin().current_dir(d).env("WFAUG_CONFIG", "run.toml").args(["generate", "ann"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read_dir_sorted(&d.join("out/plans")).len(), 2);
    let plan = wfaug::assemble::AssemblyPlan::load(&d.join("out/plans/gen00000.edl.json")).unwrap();
    assert_eq!(plan.seed, wfaug::assemble::video_seed(5, 0));

    let out = bin()
        .current_dir(d)
        .env("WFAUG_CONFIG", "run.toml")
        .args(["generate", "ann", "--num", "3", "--out", "o2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(read_dir_sorted(&d.join("o2/plans")).len(), 3);

    fs::write(d.join("bad.toml"), "decay = \"x\"\n").unwrap();
    assert_eq!(run(&["--config", "bad.toml", "stats", "ann"], d).status.code(), Some(2));
}
