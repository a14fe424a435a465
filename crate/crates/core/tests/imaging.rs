use boxdeconv::boxconv::apply2d;
use boxdeconv::imaging2d::{
    interleave, psnr, scan_frames, simulate_scan, tv_reconstruct, ScanConfig, TvConfig,
};
use boxdeconv::Image2D;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn interleaved_scan_equals_the_box_blur() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for h in 1..=32 {
        for w in 1..=32 {
            let t = Image2D::from_fn(h, w, |_, _| rng.random_range(0u8..=255) as f64).unwrap();
            for k in 1..=6.min(h).min(w) {
                let y = apply2d(&t, k).unwrap();
                let frames = scan_frames(&t, k).unwrap();
                assert_eq!(interleave(&frames, k, y.height(), y.width()).unwrap(), y);
            }
        }
    }
}

#[test]
fn noisy_pipeline_is_reproducible() {
    let t = Image2D::from_fn(20, 20, |i, j| if i > 6 && j < 12 { 0.9 } else { 0.2 }).unwrap();
    let cfg = ScanConfig { k: 3, noise_sigma: 0.01 };
    let tv = TvConfig { max_iters: 200, ..TvConfig::default() };
    let run = || {
        let y = simulate_scan(&t, &cfg, 77).unwrap();
        let out = tv_reconstruct(&y, 3, 20, 20, &tv).unwrap();
        (y, out)
    };
    let (y1, o1) = run();
    let (y2, o2) = run();
    assert_eq!(y1, y2);
    assert_eq!(o1, o2);
    let p = psnr(&o1.image, &t, 1.0).unwrap();
    assert!(p > 25.0, "psnr {p}");
}

#[test]
fn constant_target_reconstructs_to_infinite_psnr_up_to_rounding() {
    let t = Image2D::filled(16, 16, 0.5).unwrap();
    let y = simulate_scan(&t, &ScanConfig::noiseless(4), 0).unwrap();
    let out = tv_reconstruct(&y, 4, 16, 16, &TvConfig::default()).unwrap();
    assert!(out.image.as_slice().iter().all(|v| (v - 0.5).abs() <= 1e-12));
    assert!(psnr(&out.image, &t, 1.0).unwrap() > 200.0);
}
