//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits nonzero if any fails.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use boxdeconv::boxconv::{adjoint_apply2d, apply2d, kernel_basis};
use boxdeconv::imaging2d::{interleave, psnr, relative_error, scan_frames, simulate_scan, tv_objective, tv_reconstruct, ScanConfig, TvConfig};
use boxdeconv::linalg::{dot, max_abs_diff};
use boxdeconv::recovery::{l0_oracle, nullspace_property_check, tightness_pair, RecoveryConfig};
use boxdeconv::{BoxOperator, Image2D, Mode};
use boxdeconv_cli::phase::{run_phase, ExperimentSpec, TrialRecord};
use boxdeconv_cli::synth::rectangles_target;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

const MODES: [Mode; 2] = [Mode::Valid, Mode::Circular];

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn trials(n: usize, k: usize, sparsities: Vec<usize>, mode: Mode, seed: u64) -> Result<Vec<TrialRecord>, String> {
    let spec = ExperimentSpec {
        ns: vec![n],
        ks: vec![k],
        sparsities,
        trials: 100,
        seed,
        mode,
        adversarial: false,
        timing: false,
    };
    run_phase(&spec, &RecoveryConfig::default()).map_err(|e| e.to_string())
}

fn exact_recovery_below_bound() -> Outcome {
    let mut total = 0;
    for (n, k) in [(12, 3), (20, 4), (24, 4), (30, 5)] {
        for mode in MODES {
            let records = trials(n, k, (1..n / k).collect(), mode, 1)?;
            total += records.len();
            if let Some(r) = records.iter().find(|r| !r.recovered) {
                return Err(format!(
                    "n={n} k={k} {mode} s={} trial {}: error {} status {}",
                    r.sparsity, r.trial, r.error_inf, r.status
                ));
            }
        }
    }
    Ok(format!("{total}/{total} trials recovered to 1e-6"))
}

fn tightness() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_boxdeconv");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut runs = 0;
    for k in 2..=5 {
        let n = 3 * k;
        let pair = tightness_pair(k, n).map_err(|e| e.to_string())?;
        ensure(pair.x != pair.z, || format!("k={k}: pair is not distinct"))?;
        let l1 = |v: &[i64]| v.iter().map(|a| a.abs()).sum::<i64>();
        ensure(l1(&pair.x) == (n / k) as i64 && l1(&pair.z) == (n / k) as i64, || {
            format!("k={k}: l1 norms {} and {}, expected {}", l1(&pair.x), l1(&pair.z), n / k)
        })?;
        for mode in MODES {
            let op = BoxOperator::new(k, n, mode).map_err(|e| e.to_string())?;
            let ones = vec![1i64; op.output_len()];
            for v in [&pair.x, &pair.z] {
                ensure(op.apply_exact(v).map_err(|e| e.to_string())? == ones, || {
                    format!("k={k} {mode}: op(v) is not all ones")
                })?;
            }

            let path = dir.path().join(format!("ones_{k}_{mode}.txt"));
            fs::write(&path, "1\n".repeat(op.output_len())).map_err(|e| e.to_string())?;
            let out = Command::new(bin)
                .args(["recover", "--k", &k.to_string(), "--n", &n.to_string(), "--mode", &mode.to_string()])
                .arg("--input")
                .arg(&path)
                .output()
                .map_err(|e| e.to_string())?;
            let text = String::from_utf8_lossy(&out.stdout);
            ensure(out.status.success() && text.contains("verdict: TieDetected"), || {
                format!("k={k} n={n} {mode}: recover printed\n{text}{}", String::from_utf8_lossy(&out.stderr))
            })?;
            let objective: f64 = text
                .lines()
                .find_map(|l| l.strip_prefix("objective:"))
                .and_then(|v| v.trim().parse().ok())
                .ok_or("no objective line")?;
            ensure((objective - (n / k) as f64).abs() <= 1e-6, || {
                format!("k={k} {mode}: objective {objective}, expected {}", n / k)
            })?;
            runs += 1;
        }
    }
    Ok(format!("8 exact pairs; recover reported TieDetected in {runs}/8 runs"))
}

fn l0_limit() -> Outcome {
    let mut found = Vec::new();
    for (n, k) in [(6, 3), (8, 4)] {
        let op = BoxOperator::valid(k, n).map_err(|e| e.to_string())?;
        let sols = l0_oracle(&op, &vec![1.0; op.output_len()], n).map_err(|e| e.to_string())?;
        ensure(sols.support_size == Some(n / k), || {
            format!("n={n} k={k}: minimal support {:?}, expected {}", sols.support_size, n / k)
        })?;
        let distinct = sols
            .solutions
            .iter()
            .enumerate()
            .all(|(i, a)| sols.solutions[..i].iter().all(|b| max_abs_diff(&a.x, &b.x) > 1e-9));
        ensure(sols.solutions.len() >= 2 && distinct, || {
            format!("n={n} k={k}: {} solutions, distinct={distinct}", sols.solutions.len())
        })?;
        found.push(format!("(n={n},k={k}): {} solutions of size {}", sols.solutions.len(), n / k));
    }
    Ok(found.join("; "))
}

fn beats_coherence_bound() -> Outcome {
    let records = trials(24, 4, vec![4, 5], Mode::Valid, 4)?;
    let ok = records.iter().filter(|r| r.recovered).count();
    ensure(ok == records.len(), || format!("{ok}/{} recovered at sparsity 4..5", records.len()))?;
    Ok(format!("{ok}/{} recovered at sparsity 4 and 5 (threshold n/(2(k-1)) = 4)", records.len()))
}

fn exhaustive_gap(z: &[f64], s: usize) -> f64 {
    let total: f64 = z.iter().map(|v| v.abs()).sum();
    (0u32..1 << z.len())
        .filter(|mask| mask.count_ones() as usize <= s)
        .map(|mask| {
            let on: f64 = (0..z.len()).filter(|j| mask >> j & 1 == 1).map(|j| z[j].abs()).sum();
            2.0 * on - total
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn nullspace_property() -> Outcome {
    let (mut checks, mut compared) = (0, 0);
    for k in 2..=6 {
        for n in 2 * k..=36 {
            let basis = kernel_basis(k, n).map_err(|e| e.to_string())?;
            for z in basis.vectors() {
                for s in 1..=n / k {
                    let out = nullspace_property_check(k, n, s, z).map_err(|e| e.to_string())?;
                    if s < n / k {
                        checks += 1;
                        ensure(out.holds && out.gap < 0.0, || format!("k={k} n={n} s={s}: gap {}", out.gap))?;
                    }
                    if n <= 12 {
                        compared += 1;
                        let brute = exhaustive_gap(z, s);
                        ensure((brute - out.gap).abs() <= 1e-12 && (brute < 0.0) == out.holds, || {
                            format!("k={k} n={n} s={s}: shortcut gap {} vs exhaustive {brute}", out.gap)
                        })?;
                    }
                }
            }
        }
    }
    Ok(format!("{checks} strict inequalities; {compared} shortcut/exhaustive comparisons agree"))
}

fn operator_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for n in 1..=64 {
        for k in 1..=n {
            for mode in MODES {
                let op = BoxOperator::new(k, n, mode).map_err(|e| e.to_string())?;
                let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let dense = op.materialize().map_err(|e| e.to_string())?.mul_vec(&x);
                let d = max_abs_diff(&op.apply(&x).map_err(|e| e.to_string())?, &dense);
                worst = worst.max(d);
                ensure(d <= 1e-10, || format!("n={n} k={k} {mode}: recurrence differs by {d}"))?;
            }
        }
    }

    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1.0);
    let mut worst_adj: f64 = 0.0;
    for draw in 0..200 {
        let n = rng.random_range(1..=300);
        let k = rng.random_range(1..=n);
        let op = BoxOperator::new(k, n, MODES[draw % 2]).map_err(|e| e.to_string())?;
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..op.output_len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lhs = dot(&op.apply(&x).map_err(|e| e.to_string())?, &y);
        let rhs = dot(&x, &op.adjoint_apply(&y).map_err(|e| e.to_string())?);
        worst_adj = worst_adj.max(rel(lhs, rhs));

        let (h, w) = (rng.random_range(1..=40), rng.random_range(1..=40));
        let k = rng.random_range(1..=h.min(w));
        let img = Image2D::from_fn(h, w, |_, _| rng.random_range(-1.0..1.0)).map_err(|e| e.to_string())?;
        let ax = apply2d(&img, k).map_err(|e| e.to_string())?;
        let yy = Image2D::from_fn(ax.height(), ax.width(), |_, _| rng.random_range(-1.0..1.0))
            .map_err(|e| e.to_string())?;
        let aty = adjoint_apply2d(&yy, k, h, w).map_err(|e| e.to_string())?;
        worst_adj = worst_adj.max(rel(dot(ax.as_slice(), yy.as_slice()), dot(img.as_slice(), aty.as_slice())));
    }
    ensure(worst_adj <= 1e-10, || format!("adjoint identity off by {worst_adj}"))?;

    for n in 1..=48 {
        for k in 1..=n {
            let rank = BoxOperator::valid(k, n)
                .and_then(|op| op.materialize())
                .map_err(|e| e.to_string())?
                .rank(1e-10);
            ensure(rank == n - k + 1, || format!("n={n} k={k}: rank {rank}, expected {}", n - k + 1))?;
        }
    }
    Ok(format!(
        "recurrence max diff {worst:.1e}; 400 adjoint draws, worst relative {worst_adj:.1e}; ranks n-k+1 for n<=48"
    ))
}

fn desk_scale_reconstruction() -> Outcome {
    let (k, size) = (4, 64);
    let target = rectangles_target(size, size, 4, 2024).map_err(|e| e.to_string())?;
    let y = simulate_scan(&target, &ScanConfig::noiseless(k), 0).map_err(|e| e.to_string())?;
    ensure(y.dims() == (61, 61), || format!("measurement {:?}", y.dims()))?;

    let mut best: Option<(f64, f64, f64)> = None;
    for i in 0..8 {
        let lambda = 10f64.powf(-3.0 + 3.0 * i as f64 / 7.0);
        let cfg = TvConfig {
            lambda,
            ..TvConfig::default()
        };
        let out = tv_reconstruct(&y, k, size, size, &cfg).map_err(|e| e.to_string())?;
        let cps = &out.log.checkpoints;
        if let Some(w) = cps.windows(2).find(|w| w[1].objective > w[0].objective) {
            return Err(format!("lambda={lambda:.2e}: objective rose at iteration {}", w[1].iteration));
        }
        let (total, _, _) = tv_objective(&out.image, &y, k, lambda).map_err(|e| e.to_string())?;
        let logged = cps.last().map_or(f64::NAN, |c| c.objective);
        ensure((total - logged).abs() <= 1e-9 * total.max(1.0), || {
            format!("lambda={lambda:.2e}: returned image has objective {total}, log says {logged}")
        })?;
        let p = psnr(&out.image, &target, 1.0).map_err(|e| e.to_string())?;
        let rel = relative_error(&out.image, &target).map_err(|e| e.to_string())?;
        if best.is_none_or(|(bp, _, _)| p > bp) {
            best = Some((p, rel, lambda));
        }
    }
    let (p, rel, lambda) = best.ok_or("no reconstruction")?;
    ensure(p >= 30.0 && rel <= 5e-2, || format!("best PSNR {p:.2} dB, relative error {rel:.3e}"))?;
    Ok(format!("best lambda {lambda:.2e}: PSNR {p:.1} dB, relative error {rel:.2e}; 8 logs non-increasing"))
}

fn rearrangement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut cases = 0;
    for h in 1..=32 {
        for w in 1..=32 {
            for k in 1..=6.min(h).min(w) {
                let target = Image2D::from_fn(h, w, |_, _| f64::from(rng.random::<u8>())).map_err(|e| e.to_string())?;
                let frames = scan_frames(&target, k).map_err(|e| e.to_string())?;
                let y = interleave(&frames, k, h - k + 1, w - k + 1).map_err(|e| e.to_string())?;
                let direct = apply2d(&target, k).map_err(|e| e.to_string())?;
                ensure(y == direct, || format!("h={h} w={w} k={k}: interleaved frames differ"))?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} (h, w, k) cases bit-identical"))
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_boxdeconv");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |mode: &str, name: &str| -> Result<Vec<u8>, String> {
        let path = dir.path().join(name);
        let out = Command::new(bin)
            .args(["phase", "--n", "12,20,24", "--k", "3,4", "--sparsity", "0..6", "--trials", "10"])
            .args(["--seed", "99", "--mode", mode, "--out"])
            .arg(&path)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned())?;
        fs::read(Path::new(&path)).map_err(|e| e.to_string())
    };
    let mut rows = 0;
    for mode in ["valid", "circular"] {
        let a = run(mode, &format!("{mode}_a.csv"))?;
        let b = run(mode, &format!("{mode}_b.csv"))?;
        ensure(a == b, || format!("{mode}: CSV files differ"))?;
        rows += a.iter().filter(|&&c| c == b'\n').count() - 1;
    }
    Ok(format!("two runs per mode byte-identical ({rows} rows)"))
}

fn main() {
    let criteria: [(&str, Check); 9] = [
        ("exact recovery below floor(n/k)", exact_recovery_below_bound),
        ("tightness at n/k", tightness),
        ("l0 support size is not enough", l0_limit),
        ("beats the coherence threshold", beats_coherence_bound),
        ("nullspace property", nullspace_property),
        ("operator correctness", operator_correctness),
        ("64x64 TV reconstruction", desk_scale_reconstruction),
        ("scan re-arrangement", rearrangement),
        ("phase CSV determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {} {name} ({secs:.1}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name} ({secs:.1}s): {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
