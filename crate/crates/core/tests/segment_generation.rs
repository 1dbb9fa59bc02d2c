use vfr_core::avatar::{GarmentSpec, UserSpec};
use vfr_core::generation::{
    extract_digest, generate_segment, render_anchor, AnchorDigest, ConditionSet, GeneratedSegment,
    Prefix,
};
use vfr_core::motion::{
    make_anchor_track, make_casual_orbit_track, make_free_motion_track,
    make_interaction_template_track, MotionTrack,
};
use vfr_core::pipeline::VariantFlags;
use vfr_core::{Error, GenerationConfig, VideoSegment};

fn quiet() -> GenerationConfig {
    GenerationConfig {
        noise_amplitude: 0.0,
        ..Default::default()
    }
}

fn anchor_digest(
    user: &UserSpec,
    garment: &GarmentSpec,
    cfg: &GenerationConfig,
    seed: u64,
) -> AnchorDigest {
    let (video, track) = render_anchor(user, garment, cfg, seed).unwrap();
    extract_digest(&video, &track, garment, user, cfg).unwrap()
}

/// Runs segments back to back over `track`, each one conditioned per `flags`,
/// the way the pipeline's conditioned stitch does.
fn chain(
    track: &MotionTrack,
    flags: VariantFlags,
    digest: Option<&AnchorDigest>,
    cfg: &GenerationConfig,
    seed: u64,
    count: usize,
) -> Vec<(usize, GeneratedSegment)> {
    let (user, garment) = (UserSpec::default(), GarmentSpec::builtin("top").unwrap());
    let (l, k) = (cfg.segment_len_frames, cfg.overlap_frames);
    let mut out: Vec<(usize, GeneratedSegment)> = Vec::new();
    for idx in 0..count {
        let start = idx * (l - k);
        let slice = track.slice(start, l).unwrap();
        let prev = out.last().map(|(_, s)| s);
        let prefix = prev.filter(|_| flags.use_prefix).map(|s| Prefix {
            frames: &s.video.frames()[l - k..],
            state: &s.end_state,
        });
        let cond = ConditionSet {
            user: &user,
            garment: &garment,
            anchor: digest,
            prefix,
        };
        let seg = generate_segment(&cond, &slice, &flags, cfg, seed, idx as u64).unwrap();
        out.push((start, seg));
    }
    out
}

#[test]
fn locked_noise_free_segments_do_not_depend_on_index() {
    let cfg = GenerationConfig {
        drift_sigma: 0.0,
        ..quiet()
    };
    let (user, garment) = (UserSpec::default(), GarmentSpec::builtin("top").unwrap());
    let digest = anchor_digest(&user, &garment, &cfg, 7);
    let track = make_casual_orbit_track(30, &cfg);
    let slice = track.slice(64, 40).unwrap();
    let cond = ConditionSet {
        user: &user,
        garment: &garment,
        anchor: Some(&digest),
        prefix: None,
    };
    let flags = VariantFlags::NO_PREFIX;
    let a = generate_segment(&cond, &slice, &flags, &cfg, 7, 2).unwrap();
    let b = generate_segment(&cond, &slice, &flags, &cfg, 7, 5).unwrap();
    assert_eq!(a.video.frames(), b.video.frames());
}

#[test]
fn prefix_frames_are_copied_verbatim() {
    let cfg = GenerationConfig::default();
    let track = make_casual_orbit_track(30, &cfg);
    let segs = chain(&track, VariantFlags::NO_ANCHOR, None, &cfg, 3, 3);
    for pair in segs.windows(2) {
        let (prev, next) = (&pair[0].1, &pair[1].1);
        assert_eq!(&prev.video.frames()[32..], &next.video.frames()[..8]);
    }
}

#[test]
fn generation_is_pure() {
    let cfg = GenerationConfig::default();
    let track = make_casual_orbit_track(30, &cfg);
    let a = chain(&track, VariantFlags::NO_ANCHOR, None, &cfg, 11, 2);
    let b = chain(&track, VariantFlags::NO_ANCHOR, None, &cfg, 11, 2);
    for ((_, x), (_, y)) in a.iter().zip(&b) {
        assert_eq!(x.video.frames(), y.video.frames());
        assert_eq!(x.end_state, y.end_state);
    }
    let c = chain(&track, VariantFlags::NO_ANCHOR, None, &cfg, 12, 1);
    assert_ne!(a[0].1.video.frames(), c[0].1.video.frames());
}

#[test]
fn anchor_required_but_missing_is_an_error() {
    let cfg = quiet();
    let (user, garment) = (UserSpec::default(), GarmentSpec::builtin("top").unwrap());
    let track = make_anchor_track(&cfg);
    let cond = ConditionSet {
        user: &user,
        garment: &garment,
        anchor: None,
        prefix: None,
    };
    let err = generate_segment(&cond, &track, &VariantFlags::FULL, &cfg, 0, 0).unwrap_err();
    assert!(matches!(err, Error::InvalidArgument(_)));
}

#[test]
fn prefix_of_wrong_length_is_rejected() {
    let cfg = quiet();
    let track = make_casual_orbit_track(30, &cfg);
    let first = chain(&track, VariantFlags::NO_ANCHOR, None, &cfg, 0, 1)
        .remove(0)
        .1;
    let (user, garment) = (UserSpec::default(), GarmentSpec::builtin("top").unwrap());
    let cond = ConditionSet {
        user: &user,
        garment: &garment,
        anchor: None,
        prefix: Some(Prefix {
            frames: &first.video.frames()[35..],
            state: &first.end_state,
        }),
    };
    let slice = track.slice(32, 40).unwrap();
    assert!(generate_segment(&cond, &slice, &VariantFlags::NO_ANCHOR, &cfg, 0, 1).is_err());
}

#[test]
fn ignored_prefix_matches_unconditioned_output() {
    let cfg = quiet();
    let track = make_casual_orbit_track(30, &cfg);
    let first = chain(&track, VariantFlags::DRESS_AND_DANCE, None, &cfg, 0, 1)
        .remove(0)
        .1;
    let (user, garment) = (UserSpec::default(), GarmentSpec::builtin("top").unwrap());
    let slice = track.slice(32, 40).unwrap();
    let with = ConditionSet {
        user: &user,
        garment: &garment,
        anchor: None,
        prefix: Some(Prefix {
            frames: &first.video.frames()[32..],
            state: &first.end_state,
        }),
    };
    let without = ConditionSet {
        prefix: None,
        ..with
    };
    let flags = VariantFlags::DRESS_AND_DANCE;
    let a = generate_segment(&with, &slice, &flags, &cfg, 0, 1).unwrap();
    let b = generate_segment(&without, &slice, &flags, &cfg, 0, 1).unwrap();
    assert_eq!(a.video.frames(), b.video.frames());
}

fn digest_l2(a: &AnchorDigest, b: &AnchorDigest) -> f64 {
    let mut sum = 0.0;
    for (ba, bb) in a.bins.iter().zip(&b.bins) {
        for (ca, cb) in ba.cells.iter().zip(&bb.cells) {
            if ca.count > 0 && cb.count > 0 {
                sum += (0..3)
                    .map(|k| (ca.mean_rgb[k] - cb.mean_rgb[k]).powi(2))
                    .sum::<f64>();
            }
        }
    }
    sum.sqrt()
}

/// Eight segments over the same 40-frame slice of the anchor orbit, so any
/// change between the first and the last is appearance, not view. With
/// `carry` the walk state is handed on through a prefix.
fn repeated(flags: VariantFlags, digest: Option<&AnchorDigest>, cfg: &GenerationConfig) -> f64 {
    let (user, garment) = (UserSpec::default(), GarmentSpec::builtin("top").unwrap());
    let slice = make_anchor_track(cfg).slice(0, 40).unwrap();
    let mut segs: Vec<GeneratedSegment> = Vec::new();
    for idx in 0..8u64 {
        let cond = ConditionSet {
            user: &user,
            garment: &garment,
            anchor: digest,
            prefix: segs.last().filter(|_| flags.use_prefix).map(|p| Prefix {
                frames: &p.video.frames()[32..],
                state: &p.end_state,
            }),
        };
        segs.push(generate_segment(&cond, &slice, &flags, cfg, 5, idx).unwrap());
    }
    // only the frames each segment generated itself
    let fresh = slice.slice(8, 32).unwrap();
    let digest_of = |seg: &GeneratedSegment| {
        let video = VideoSegment::new(seg.video.frames()[8..].to_vec(), 8, 0).unwrap();
        extract_digest(&video, &fresh, &garment, &user, cfg).unwrap()
    };
    digest_l2(&digest_of(&segs[0]), &digest_of(&segs[7]))
}

#[test]
fn walk_drifts_away_while_locked_stays_put() {
    let cfg = quiet();
    let (user, garment) = (UserSpec::default(), GarmentSpec::builtin("top").unwrap());
    let digest = anchor_digest(&user, &garment, &cfg, 5);
    let walk = repeated(VariantFlags::NO_ANCHOR, None, &cfg);
    let locked = repeated(VariantFlags::FULL, Some(&digest), &cfg);
    assert!(locked < 1e-9, "locked distance {locked}");
    assert!(walk > 1.0, "walk distance {walk}");
}

/// Worst per-part mean-color gap (0..255) between the anchor digest and any
/// anchor-locked segment generated along `track`.
fn worst_anchor_gap(
    user: &UserSpec,
    garment: &GarmentSpec,
    track: &MotionTrack,
    cfg: &GenerationConfig,
    seed: u64,
) -> f64 {
    let digest = anchor_digest(user, garment, cfg, seed);
    let (l, k) = (cfg.segment_len_frames, cfg.overlap_frames);
    let mut worst: f64 = 0.0;
    let mut prev: Option<GeneratedSegment> = None;
    let (mut start, mut idx) = (0, 0u64);
    while start + l <= track.len() {
        let slice = track.slice(start, l).unwrap();
        let cond = ConditionSet {
            user,
            garment,
            anchor: Some(&digest),
            prefix: prev.as_ref().map(|p| Prefix {
                frames: &p.video.frames()[l - k..],
                state: &p.end_state,
            }),
        };
        let seg = generate_segment(&cond, &slice, &VariantFlags::FULL, cfg, seed, idx).unwrap();
        let got = extract_digest(&seg.video, &slice, garment, user, cfg).unwrap();
        for (bg, ba) in got.bins.iter().zip(&digest.bins) {
            for (cg, ca) in bg.cells.iter().zip(&ba.cells) {
                if cg.count > 0 {
                    for c in 0..3 {
                        worst = worst.max((cg.mean_rgb[c] - ca.mean_rgb[c]).abs());
                    }
                }
            }
        }
        prev = Some(seg);
        start += l - k;
        idx += 1;
    }
    worst
}

#[test]
fn anchor_locked_segments_reproduce_the_anchor_digest() {
    let cfg = quiet();
    let user = UserSpec::default();
    let tracks = [
        ("orbit", make_casual_orbit_track(30, &cfg)),
        ("template", make_interaction_template_track(30, &cfg)),
        ("free", make_free_motion_track(30, &cfg)),
    ];
    for name in GarmentSpec::BUILTIN_NAMES {
        let garment = GarmentSpec::builtin(name).unwrap();
        for (label, track) in &tracks {
            for seed in [9, 21] {
                let worst = worst_anchor_gap(&user, &garment, track, &cfg, seed);
                eprintln!("{name} {label} seed {seed}: worst {worst:.3}");
                assert!(worst <= 2.0, "{name} on {label}, seed {seed}: {worst}");
            }
        }
    }
}
