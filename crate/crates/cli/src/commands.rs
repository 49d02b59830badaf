//! Subcommand implementations.

use std::path::{Path, PathBuf};

use anyhow::{Context as _, Result};
use rayon::prelude::*;
use wfaug::assemble::{
    assemble, frame_file_name, render, split_augment, video_seed, AssembleConfig, AssemblyPlan, DirFrameSource,
    FrameSource, SplitPlan, SyntheticFrameSource, TemporalConfig,
};
use wfaug::metrics::{confusion_for_catalog, ConfusionMatrix};
use wfaug::segment::SegmentDb;
use wfaug::spatial::PixelBuffer;
use wfaug::synth;
use wfaug::temporal::interpolator_by_name;
use wfaug::{ClassCatalog, Graph, LabelTrack, MetricsReport};

use crate::config::Config;
use crate::files::{csv_files, load_catalog, load_tracks, write_atomic, write_png, write_track};
use crate::report::{segment_report, Comparison, CorpusReport};
use crate::{Cli, Command, DemoArgs, EvaluateArgs, ExtractArgs, GenerateArgs, SegmentArgs, SplitArgs, StatsArgs, Usage};

pub fn run(cli: Cli) -> Result<()> {
    let mut cfg = Config::resolve(cli.config.as_deref())?;
    if let Some(c) = cli.catalog {
        cfg.catalog = Some(c);
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build()?;
    pool.install(|| match cli.command {
        Command::ExtractWorkflow(a) => extract_workflow(cfg, a),
        Command::BuildSegments(a) => build_segments(cfg, a),
        Command::Generate(a) => generate(cfg, a),
        Command::SplitBaseline(a) => split_baseline(cfg, a),
        Command::Stats(a) => stats(cfg, a),
        Command::Evaluate(a) => evaluate(cfg, a),
        Command::DemoCorpus(a) => demo_corpus(a),
    })
}

fn corpus(cfg: &Config, dir: &Path) -> Result<(ClassCatalog, Vec<LabelTrack>)> {
    let catalog = load_catalog(cfg.catalog.as_deref())?;
    let tracks = load_tracks(dir, &catalog, cfg.threshold)?;
    Ok((catalog, tracks))
}

fn output_dir(flag: Option<PathBuf>, cfg: &Config) -> Result<PathBuf> {
    flag.or_else(|| cfg.output.clone())
        .ok_or_else(|| Usage("no output directory given (use --out or set `output` in the config)".into()).into())
}

fn extract_workflow(mut cfg: Config, a: ExtractArgs) -> Result<()> {
    if let Some(m) = &a.mode {
        cfg.mode = m.parse()?;
    }
    cfg.validate()?;
    let (catalog, tracks) = corpus(&cfg, &a.annotations)?;
    let graph = Graph::extract(&tracks, &catalog, cfg.mode)?;
    write_atomic(&a.out, graph.to_json(&catalog).as_bytes())?;
    let report = graph.phase_report(&catalog);
    if let Some(p) = &a.report {
        write_atomic(p, report.as_bytes())?;
    }
    print!("{report}");
    Ok(())
}

fn build_segments(cfg: Config, a: SegmentArgs) -> Result<()> {
    cfg.validate()?;
    let (catalog, tracks) = corpus(&cfg, &a.annotations)?;
    let db = SegmentDb::from_tracks(&tracks, &catalog)?;
    write_atomic(&a.out, db.to_json(&catalog).as_bytes())?;
    let mut report = segment_report(&db, &catalog);
    report.push('\n');
    report.push_str(&CorpusReport::of(&tracks, &catalog).expect("corpus is not empty").to_text());
    if let Some(p) = &a.report {
        write_atomic(p, report.as_bytes())?;
    }
    print!("{report}");
    Ok(())
}

fn interpolator(cfg: &Config) -> Result<Box<dyn wfaug::temporal::Interpolator>> {
    Ok(interpolator_by_name(&cfg.interpolator)?)
}

fn write_frames(dir: &Path, frames: &[PixelBuffer]) -> Result<()> {
    frames.par_iter().enumerate().try_for_each(|(i, f)| write_png(&dir.join(frame_file_name(i)), f))
}

fn generate(mut cfg: Config, a: GenerateArgs) -> Result<()> {
    if let Some(v) = a.num {
        cfg.num_videos = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(m) = &a.mode {
        cfg.mode = m.parse()?;
    }
    if let Some(g) = a.graph {
        cfg.graph = Some(g);
    }
    if let Some(v) = a.decay {
        cfg.decay = v;
    }
    if let Some(v) = a.max_walk_len {
        cfg.max_walk_len = v;
    }
    if let Some(v) = a.interpolator {
        cfg.interpolator = v;
    }
    cfg.validate()?;
    let out = output_dir(a.out, &cfg)?;
    let (catalog, tracks) = corpus(&cfg, &a.annotations)?;
    let graph = match &cfg.graph {
        Some(p) => Graph::load(p, &catalog)?,
        None => Graph::extract(&tracks, &catalog, cfg.mode)?,
    };
    let db = SegmentDb::from_tracks(&tracks, &catalog)?;
    let acfg = AssembleConfig {
        walk: cfg.walk(),
        max_resamples: cfg.max_resamples,
        spatial: (!a.no_spatial).then(|| cfg.spatial.clone()),
        temporal: if a.unit_speed { None } else { Some(TemporalConfig::from_tracks(&tracks, cfg.stride_table()?)?) },
    };

    let plans: Vec<AssemblyPlan> = (0..cfg.num_videos)
        .into_par_iter()
        .map(|i| {
            let mut plan = assemble(&graph, &db, video_seed(cfg.seed, i), &acfg)
                .with_context(|| format!("assembling video {i}"))?;
            plan.plan_id = format!("gen{i:05}");
            Ok(plan)
        })
        .collect::<Result<_>>()?;

    plans.par_iter().try_for_each(|plan| -> Result<()> {
        write_atomic(&out.join("plans").join(format!("{}.edl.json", plan.plan_id)), plan.to_json().as_bytes())?;
        write_track(&out.join("labels").join(format!("{}.csv", plan.plan_id)), &plan.output_track()?, &catalog)
    })?;

    if let Some(frames_dir) = &a.render {
        let source = DirFrameSource::new(frames_dir);
        let interp = interpolator(&cfg)?;
        plans.par_iter().try_for_each(|plan| -> Result<()> {
            let (frames, _) = render(plan, &source, interp.as_ref())
                .with_context(|| format!("rendering {}", plan.plan_id))?;
            write_frames(&out.join("frames").join(&plan.plan_id), &frames)
        })?;
    }
    let frames: usize = plans.iter().map(AssemblyPlan::output_len).sum();
    println!("generated {} videos ({frames} frames) in {}", plans.len(), out.display());
    Ok(())
}

fn split_baseline(mut cfg: Config, a: SplitArgs) -> Result<()> {
    if let Some(k) = a.k {
        cfg.split_k = k;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    let out = output_dir(a.out, &cfg)?;
    let (catalog, tracks) = corpus(&cfg, &a.annotations)?;
    let ranges = (!a.no_spatial).then_some(&cfg.spatial);
    let mut plans: Vec<SplitPlan> = Vec::new();
    for t in &tracks {
        plans.extend(split_augment(t, cfg.split_k, cfg.seed, ranges)?);
    }
    plans.par_iter().try_for_each(|p| -> Result<()> {
        write_atomic(&out.join("plans").join(format!("{}.split.json", p.plan_id)), p.to_json().as_bytes())?;
        write_track(&out.join("labels").join(format!("{}.csv", p.plan_id)), &p.track(), &catalog)
    })?;
    if let Some(frames_dir) = &a.render {
        let source = DirFrameSource::new(frames_dir);
        plans.par_iter().try_for_each(|p| -> Result<()> {
            let (frames, _) = p.render(&source).with_context(|| format!("rendering {}", p.plan_id))?;
            write_frames(&out.join("frames").join(&p.plan_id), &frames)
        })?;
    }
    println!("wrote {} sub-videos from {} videos to {}", plans.len(), tracks.len(), out.display());
    Ok(())
}

fn stats(cfg: Config, a: StatsArgs) -> Result<()> {
    cfg.validate()?;
    let (catalog, tracks) = corpus(&cfg, &a.annotations)?;
    let source = CorpusReport::of(&tracks, &catalog).expect("corpus is not empty");
    let (text, json) = match &a.compare {
        Some(dir) => {
            let generated = load_tracks(dir, &catalog, cfg.threshold)?;
            let gen = CorpusReport::of(&generated, &catalog).expect("corpus is not empty");
            let c = Comparison::of(source, gen);
            (c.to_text(), serde_json::to_string_pretty(&c)?)
        }
        None => (source.to_text(), serde_json::to_string_pretty(&source)?),
    };
    if let Some(p) = &a.json {
        write_atomic(p, (json + "\n").as_bytes())?;
    }
    print!("{text}");
    Ok(())
}

fn evaluate(mut cfg: Config, a: EvaluateArgs) -> Result<()> {
    if let Some(s) = a.stride {
        cfg.eval_stride = s;
    }
    cfg.validate()?;
    let catalog = load_catalog(cfg.catalog.as_deref())?;
    let truth_files = csv_files(&a.truth)?;
    if truth_files.is_empty() {
        return Err(wfaug::Error::NoTracks).with_context(|| format!("no annotation files in {}", a.truth.display()));
    }
    let mut total = ConfusionMatrix::with_labels(catalog.classes().iter().map(|c| c.name.clone()).collect());
    let mut per_video = serde_json::Map::new();
    for path in &truth_files {
        let name = path.file_name().expect("listed file has a name");
        let pred_path = a.predictions.join(name);
        if !pred_path.is_file() {
            return Err(wfaug::Error::Io {
                path: pred_path,
                source: std::io::Error::new(std::io::ErrorKind::NotFound, "prediction file missing"),
            }
            .into());
        }
        let truth = wfaug::annotation::load_track(path, &catalog, cfg.threshold)?;
        let pred = wfaug::annotation::load_track(&pred_path, &catalog, cfg.threshold)?;
        let cm = confusion_for_catalog(&truth, &pred, cfg.eval_stride, &catalog)
            .with_context(|| format!("scoring {}", path.display()))?;
        total.merge(&cm)?;
        per_video.insert(truth.video_id.clone(), serde_json::to_value(MetricsReport::compute(&cm)?.overall)?);
    }
    let report = MetricsReport::compute(&total)?;
    let table = report.to_table();
    if let Some(out) = a.out.or(cfg.output.clone()) {
        write_atomic(&out.join("metrics.json"), report.to_json().as_bytes())?;
        write_atomic(&out.join("metrics.txt"), table.as_bytes())?;
        let pv = serde_json::to_string_pretty(&per_video)? + "\n";
        write_atomic(&out.join("per_video.json"), pv.as_bytes())?;
    }
    print!("{table}");
    Ok(())
}

fn parse_size(s: &str) -> Result<(usize, usize)> {
    let bad = || Usage(format!("frame size must look like 16x12, got {s:?}"));
    let (w, h) = s.split_once('x').ok_or_else(bad)?;
    let (w, h): (usize, usize) = (w.parse().map_err(|_| bad())?, h.parse().map_err(|_| bad())?);
    if w == 0 || h == 0 {
        return Err(bad().into());
    }
    Ok((w, h))
}

fn demo_corpus(a: DemoArgs) -> Result<()> {
    let size = a.frames.as_deref().map(parse_size).transpose()?;
    let catalog = synth::skewed_catalog();
    let tracks = synth::skewed_corpus();
    write_atomic(&a.out.join("catalog.toml"), synth::SKEWED_CATALOG.trim_start().as_bytes())?;
    write_atomic(&a.out.join("wfaug.toml"), b"catalog = \"catalog.toml\"\noutput = \"generated\"\n")?;
    tracks
        .par_iter()
        .try_for_each(|t| write_track(&a.out.join("annotations").join(format!("{}.csv", t.video_id)), t, &catalog))?;
    if let Some((w, h)) = size {
        let source = SyntheticFrameSource::new(w, h);
        tracks.par_iter().try_for_each(|t| -> Result<()> {
            let frames = (0..t.len()).map(|i| Ok(source.frame(&t.video_id, i)?)).collect::<Result<Vec<_>>>()?;
            write_frames(&a.out.join("frames").join(&t.video_id), &frames)
        })?;
    }
    let total: usize = tracks.iter().map(LabelTrack::len).sum();
    println!("wrote {} videos ({total} frames) to {}", tracks.len(), a.out.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_sizes() {
        assert_eq!(parse_size("16x12").unwrap(), (16, 12));
        assert!(parse_size("16").is_err());
        assert!(parse_size("0x4").is_err());
    }
}
