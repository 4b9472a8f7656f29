//! Background separation on constructed frame sequences.

use mompca_core::background::{
    frames_to_matrix, matrix_to_frames, separate, Frame, FrameSequence,
};
use mompca_core::mompca::FitConfig;

/// Static gradient scene with a bright square moving along the diagonal.
fn moving_square_video(
    side: usize,
    frames: usize,
    square: usize,
) -> (FrameSequence, Vec<bool>) {
    let mut covered = vec![false; side * side];
    let mut seq = Vec::with_capacity(frames);
    for t in 0..frames {
        let offset = (t * (side - square)) / (frames - 1);
        let mut pixels = vec![0u8; side * side];
        for y in 0..side {
            for x in 0..side {
                // background: smooth gradient, constant in time
                pixels[y * side + x] = (40 + (x * 120) / side + (y * 60) / side) as u8;
            }
        }
        for dy in 0..square {
            for dx in 0..square {
                let (y, x) = (offset + dy, offset + dx);
                pixels[y * side + x] = 255;
                covered[y * side + x] = true;
            }
        }
        seq.push(Frame::new(side, side, pixels).unwrap());
    }
    (FrameSequence::new(seq).unwrap(), covered)
}

#[test]
fn moving_square_lights_up_exactly_its_trajectory() {
    let side = 32;
    let (seq, covered) = moving_square_video(side, 50, 6);
    let mut cfg = FitConfig::<f64>::new(1, 40).with_seed(5);
    cfg.max_iter = 300;
    let sep = separate(&seq, &cfg).unwrap();

    let trajectory: Vec<usize> = (0..side * side).filter(|&i| covered[i]).collect();
    let k = trajectory.len();
    let mut order: Vec<usize> = (0..side * side).collect();
    order.sort_by(|&a, &b| sep.object_map[b].partial_cmp(&sep.object_map[a]).unwrap());
    let top: std::collections::HashSet<usize> = order[..k].iter().copied().collect();

    let hit = trajectory.iter().filter(|i| top.contains(i)).count();
    let coverage = hit as f64 / k as f64;
    assert!(coverage >= 0.9, "trajectory coverage {coverage}");

    let never: Vec<usize> = (0..side * side).filter(|&i| !covered[i]).collect();
    let false_hits = never.iter().filter(|i| top.contains(i)).count();
    let false_rate = false_hits as f64 / never.len() as f64;
    assert!(false_rate <= 0.05, "false coverage {false_rate}");
}

#[test]
fn rank_one_illumination_ramp_is_pure_background() {
    // frame t = ramp pattern times a time-varying gain, built from integer
    // products so the 8-bit frames are exactly rank one: pixel trajectories
    // span a single direction and d = 1 reconstructs them exactly
    let (w, h, f) = (12, 9, 15);
    let mut frames = Vec::with_capacity(f);
    for t in 0..f {
        let gain = (t + 1) as u16; // 1..=15
        let pixels = (0..w * h)
            .map(|i| ((i % 16) as u16 * gain).min(255) as u8)
            .collect();
        frames.push(Frame::new(w, h, pixels).unwrap());
    }
    let seq = FrameSequence::new(frames).unwrap();
    let cfg = FitConfig::<f64>::new(1, 10).with_seed(3);
    let sep = separate(&seq, &cfg).unwrap();

    let x = frames_to_matrix::<f64>(&seq);
    let back = frames_to_matrix::<f64>(&sep.background);
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, b) in x.values().iter().zip(back.values()) {
        num += (a - b) * (a - b);
        den += a * a;
    }
    let rel = (num / den).sqrt();
    assert!(rel < 1e-6, "background deviates from input: {rel}");
    let worst = sep
        .object_map
        .iter()
        .fold(0.0f64, |acc, &v| acc.max(v));
    assert!(worst < 1e-6, "object map not empty: {worst}");
}

#[test]
fn object_map_equals_the_dense_l1_residual_oracle() {
    let (seq, _) = moving_square_video(16, 12, 4);
    let cfg = FitConfig::<f64>::new(2, 8).with_seed(11);
    let sep = separate(&seq, &cfg).unwrap();

    let x = frames_to_matrix::<f64>(&seq);
    let recon = sep.model.reconstruct(&x).unwrap();
    for i in 0..x.n_rows() {
        let want: f64 = x
            .row(i)
            .iter()
            .zip(recon.row(i))
            .map(|(&a, &b)| (a - b).abs())
            .sum();
        assert!(
            (sep.object_map[i] - want).abs() <= 1e-10,
            "pixel {i}: {} vs {want}",
            sep.object_map[i]
        );
    }
}

#[test]
fn frames_matrix_round_trip_is_bit_exact() {
    let (seq, _) = moving_square_video(10, 8, 3);
    let x = frames_to_matrix::<f64>(&seq);
    let back = matrix_to_frames(&x, 10, 10).unwrap();
    assert_eq!(back, seq);
}
