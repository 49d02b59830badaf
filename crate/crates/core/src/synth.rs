//! Synthetic annotation corpora for tests, demos and the acceptance suite.
//!
//! [`skewed_corpus`] mimics a cataract-surgery workflow with one dominant
//! class (about 60 % of frames) and one rare class (about 1 %).
//! [`random_track`] draws unstructured tracks with idle gaps.

use rand::Rng;

use crate::annotation::{ClassCatalog, ClassId, LabelTrack};
use crate::rng::{self, StreamRng};

/// Catalog of the skewed corpus.
pub const SKEWED_CATALOG: &str = r#"
phases = ["opening", "phaco", "closing"]
starts = ["knife"]
finals = ["injector"]

[[tools]]
name = "knife"
phase = "opening"

[[tools]]
name = "cannula"
phase = "opening"

[[tools]]
name = "phaco"
phase = "phaco"

[[tools]]
name = "micromanipulator"
phase = "phaco"

[[tools]]
name = "irrigation"
phase = "closing"

[[tools]]
name = "forceps"
phase = "closing"

[[tools]]
name = "injector"
phase = "closing"
"#;

pub const KNIFE: ClassId = ClassId(1);
pub const CANNULA: ClassId = ClassId(2);
pub const PHACO: ClassId = ClassId(3);
pub const MICRO: ClassId = ClassId(4);
pub const IRRIGATION: ClassId = ClassId(5);
/// The rare class of the skewed corpus.
pub const FORCEPS: ClassId = ClassId(6);
pub const INJECTOR: ClassId = ClassId(7);

/// Number of videos in [`skewed_corpus`].
pub const SKEWED_VIDEOS: usize = 19;

const SKEWED_SEED: u64 = 0x5eed_c0de;

pub fn skewed_catalog() -> ClassCatalog {
    ClassCatalog::parse_toml(SKEWED_CATALOG).expect("packaged catalog is valid")
}

fn push<R: Rng>(frames: &mut Vec<ClassId>, rng: &mut R, class: ClassId, len: (usize, usize)) {
    let n = rng.random_range(len.0..=len.1);
    frames.extend(std::iter::repeat_n(class, n));
}

fn maybe_idle<R: Rng>(frames: &mut Vec<ClassId>, rng: &mut R) {
    if rng.random_bool(0.3) {
        push(frames, rng, ClassId::IDLE, (3, 12));
    }
}

/// One video of the skewed corpus. The rare class appears in three videos.
pub fn skewed_video(index: usize) -> LabelTrack {
    let mut rng: StreamRng = rng::stream(SKEWED_SEED, "skewed-video", index as u64);
    let r = &mut rng;
    let mut f = Vec::new();
    push(&mut f, r, ClassId::IDLE, (5, 20));
    push(&mut f, r, KNIFE, (20, 40));
    maybe_idle(&mut f, r);
    push(&mut f, r, CANNULA, (15, 30));
    maybe_idle(&mut f, r);
    for _ in 0..r.random_range(0..=1) {
        push(&mut f, r, PHACO, (200, 320));
        maybe_idle(&mut f, r);
        let helper = if r.random_bool(0.25) { CANNULA } else { MICRO };
        push(&mut f, r, helper, (15, 30));
        maybe_idle(&mut f, r);
    }
    push(&mut f, r, PHACO, (80, 150));
    maybe_idle(&mut f, r);
    if index == 8 {
        push(&mut f, r, FORCEPS, (28, 38));
        push(&mut f, r, PHACO, (40, 80));
    }
    push(&mut f, r, IRRIGATION, (25, 50));
    match index % 3 {
        0 => {
            push(&mut f, r, PHACO, (30, 60));
            push(&mut f, r, IRRIGATION, (15, 30));
        }
        1 => {
            push(&mut f, r, MICRO, (10, 20));
            push(&mut f, r, IRRIGATION, (15, 30));
        }
        _ => {}
    }
    if index == 0 || index == 16 {
        maybe_idle(&mut f, r);
        push(&mut f, r, FORCEPS, (28, 38));
        if index == 0 {
            maybe_idle(&mut f, r);
            push(&mut f, r, IRRIGATION, (15, 30));
        }
    }
    maybe_idle(&mut f, r);
    push(&mut f, r, INJECTOR, (20, 40));
    push(&mut f, r, ClassId::IDLE, (5, 20));
    LabelTrack::new(format!("skewed{:02}", index + 1), f)
}

/// The packaged skewed corpus, identical on every call.
pub fn skewed_corpus() -> Vec<LabelTrack> {
    (0..SKEWED_VIDEOS).map(skewed_video).collect()
}

/// Random track over classes `1..=classes` of `len` frames. Active runs
/// never repeat the previous active class; idle runs are inserted with
/// probability `idle_prob` between them.
pub fn random_track<R: Rng>(rng: &mut R, id: &str, len: usize, classes: u32, idle_prob: f64) -> LabelTrack {
    assert!(classes >= 2, "need at least two classes");
    let mut frames = Vec::with_capacity(len);
    let mut prev = ClassId::IDLE;
    while frames.len() < len {
        let idle = prev != ClassId::IDLE && rng.random_bool(idle_prob);
        let class = if idle {
            ClassId::IDLE
        } else {
            loop {
                let c = ClassId(rng.random_range(1..=classes));
                if c != prev {
                    break c;
                }
            }
        };
        let run = rng.random_range(1..=(len / 4).clamp(1, 200));
        let n = run.min(len - frames.len());
        frames.extend(std::iter::repeat_n(class, n));
        if !idle {
            prev = class;
        }
    }
    LabelTrack::new(id, frames)
}
