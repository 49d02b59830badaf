//! End-to-end runs through files on disk.

use std::fs;
use std::path::Path;

use wfaug::annotation::{expand_to_raw, load_track, write_raw_track};
use wfaug::assemble::{assemble, frame_file_name, render, AssembleConfig, AssemblyPlan, DirFrameSource, FrameSource, SyntheticFrameSource, TemporalConfig};
use wfaug::graph::{WeightMode, WorkflowGraph};
use wfaug::segment::SegmentDb;
use wfaug::spatial::SpatialRanges;
use wfaug::synth::{skewed_catalog, skewed_corpus};
use wfaug::temporal::{LinearInterpolator, StrideTable};
use wfaug::{ClassCatalog, LabelTrack};

fn write_corpus(dir: &Path, tracks: &[LabelTrack], catalog: &ClassCatalog) {
    fs::create_dir_all(dir).unwrap();
    for t in tracks {
        let f = fs::File::create(dir.join(format!("{}.csv", t.video_id))).unwrap();
        write_raw_track(&expand_to_raw(t, catalog), catalog, f).unwrap();
    }
}

#[test]
fn raw_files_to_rendered_video() {
    let dir = tempfile::tempdir().unwrap();
    let catalog = skewed_catalog();
    let source: Vec<LabelTrack> = skewed_corpus().into_iter().take(6).collect();
    write_corpus(&dir.path().join("ann"), &source, &catalog);

    let mut loaded = Vec::new();
    for t in &source {
        let back = load_track(&dir.path().join("ann").join(format!("{}.csv", t.video_id)), &catalog, 0.5).unwrap();
        assert_eq!(&back, t);
        loaded.push(back);
    }

    // Frames on disk for every source video.
    let synth = SyntheticFrameSource::new(6, 4);
    for t in &loaded {
        for i in 0..t.len() {
            let p = dir.path().join("frames").join(&t.video_id).join(frame_file_name(i));
            fs::create_dir_all(p.parent().unwrap()).unwrap();
            synth.frame(&t.video_id, i).unwrap().save_png(&p).unwrap();
        }
    }

    let graph = WorkflowGraph::<f64>::extract(&loaded, &catalog, WeightMode::Uniform).unwrap();
    let db = SegmentDb::from_tracks(&loaded, &catalog).unwrap();
    let cfg = AssembleConfig {
        spatial: Some(SpatialRanges::default()),
        temporal: Some(TemporalConfig::from_tracks(&loaded, StrideTable::canonical()).unwrap()),
        ..Default::default()
    };
    let plan = assemble(&graph, &db, 77, &cfg).unwrap();
    plan.validate(&db).unwrap();

    let plan_path = dir.path().join("plan.json");
    fs::write(&plan_path, plan.to_json()).unwrap();
    let reloaded = AssemblyPlan::load(&plan_path).unwrap();
    assert_eq!(reloaded, plan);

    let frames = DirFrameSource::new(dir.path().join("frames"));
    let (a, la) = render(&plan, &frames, &LinearInterpolator).unwrap();
    let (b, lb) = render(&reloaded, &frames, &LinearInterpolator).unwrap();
    assert_eq!(a, b);
    assert_eq!(la, lb);
    assert_eq!(a.len(), plan.output_len());
    assert_eq!(la.frames, plan.output_labels().unwrap());
}

#[test]
fn single_precision_graph_walks_like_double() {
    let catalog = skewed_catalog();
    let corpus = skewed_corpus();
    let g64 = WorkflowGraph::<f64>::extract(&corpus, &catalog, WeightMode::Empirical).unwrap();
    let g32 = WorkflowGraph::<f32>::extract(&corpus, &catalog, WeightMode::Empirical).unwrap();
    let db = SegmentDb::from_tracks(&corpus, &catalog).unwrap();
    let mut same = 0;
    for seed in 0..50 {
        let a = assemble(&g64, &db, seed, &AssembleConfig::default()).unwrap();
        let b = assemble(&g32, &db, seed, &AssembleConfig::default()).unwrap();
        b.validate(&db).unwrap();
        same += usize::from(a.sequence == b.sequence);
    }
    // Rounding may flip a rare draw, but the walks mostly agree.
    assert!(same >= 45, "{same}");
}

#[test]
fn missing_source_frame_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let catalog = skewed_catalog();
    let corpus = skewed_corpus();
    let graph = WorkflowGraph::<f64>::extract(&corpus, &catalog, WeightMode::Uniform).unwrap();
    let db = SegmentDb::from_tracks(&corpus, &catalog).unwrap();
    let plan = assemble(&graph, &db, 1, &AssembleConfig::default()).unwrap();
    let err = render(&plan, &DirFrameSource::new(dir.path()), &LinearInterpolator).unwrap_err();
    let first = &plan.entries[0];
    assert!(err.to_string().contains(&first.video), "{err}");
    assert!(err.to_string().contains(&format!("frame {}", first.start)), "{err}");
}
