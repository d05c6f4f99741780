//! Acceptance suite: one test per release criterion. Each prints a
//! `criterion N (...): PASS` line (visible with `--nocapture`); a failing
//! assertion marks the criterion red in the standard test output.
//!
//! Run with `cargo test -p asgpose-cli --test acceptance -- --nocapture`.

use asgpose_core::asg::{
    asg_kernel, decode_vector, encode, AsgParams, NormalizationMode, PoseDistribution,
};
use asgpose_core::bias::{bias_sweep, spherical_decode_angles};
use asgpose_core::lattice::SphereLattice;
use asgpose_core::loss::{finite_diff_check, GradCheckConfig};
use asgpose_core::metrics::{mae_euler, maev};
use asgpose_core::rotation::{
    axis_angle_to_matrix, euler_to_matrix, geodesic_distance_deg, matrix_to_axis_angle,
    matrix_to_euler, matrix_to_quat, project_to_so3, quat_to_matrix, random_rotation, wrap_degrees,
    EulerAngles, RotationMatrix,
};
use asgpose_core::train::{generate_dataset, run_ablation, write_ablation_csv, TrainConfig};
use asgpose_core::vec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::time::Instant;

fn max_entry_diff(a: &RotationMatrix, b: &RotationMatrix) -> f64 {
    let (ra, rb) = (a.rows(), b.rows());
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            worst = worst.max((ra[i][j] - rb[i][j]).abs());
        }
    }
    worst
}

#[test]
fn criterion_1_rotation_round_trips() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    for _ in 0..10_000 {
        // euler <-> matrix, middle angle kept outside the singular set
        let e = EulerAngles::new(
            rng.random_range(-180.0..180.0),
            rng.random_range(-85.0..85.0),
            rng.random_range(-180.0..180.0),
        );
        let dec = matrix_to_euler(&euler_to_matrix(&e).unwrap()).angles;
        assert!(wrap_degrees(dec.pitch - e.pitch).abs() <= 1e-8);
        assert!(wrap_degrees(dec.yaw - e.yaw).abs() <= 1e-8);
        assert!(wrap_degrees(dec.roll - e.roll).abs() <= 1e-8);

        // quat <-> matrix
        let r = random_rotation(&mut rng);
        let q = matrix_to_quat(&r);
        assert!(max_entry_diff(&quat_to_matrix(&q), &r) <= 1e-8);
        let q2 = matrix_to_quat(&quat_to_matrix(&q));
        assert!(
            (q.w - q2.w).abs() <= 1e-8
                && (q.x - q2.x).abs() <= 1e-8
                && (q.y - q2.y).abs() <= 1e-8
                && (q.z - q2.z).abs() <= 1e-8
        );

        // axis-angle <-> matrix
        let aa = matrix_to_axis_angle(&r);
        assert!(max_entry_diff(&axis_angle_to_matrix(&aa), &r) <= 1e-8);
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 5.0, "round trips took {elapsed:.2}s");
    println!("criterion 1 (rotation round trips, 1e4 draws, {elapsed:.2}s): PASS");
}

#[test]
fn criterion_2_so3_projection() {
    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    for _ in 0..1000 {
        let r = random_rotation(&mut rng);
        let mut a = r.rows();
        for row in a.iter_mut() {
            for v in row.iter_mut() {
                let n: f64 = StandardNormal.sample(&mut rng);
                *v += 0.05 * n;
            }
        }
        let p = project_to_so3(&a).unwrap();
        assert!(p.orthonormality_error() <= 1e-9);
        assert!((p.det() - 1.0).abs() <= 1e-9);

        let again = project_to_so3(&p.rows()).unwrap();
        assert!(max_entry_diff(&again, &p) <= 1e-12, "not idempotent");
    }
    // negative-determinant inputs (det(U V') = -1) must not yield reflections
    for _ in 0..100 {
        let r = random_rotation(&mut rng);
        let mut a = r.rows();
        for row in a.iter_mut() {
            row[2] *= -0.7;
        }
        let det_in = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
        assert!(det_in < 0.0);
        let p = project_to_so3(&a).unwrap();
        assert!(p.orthonormality_error() <= 1e-9);
        assert!((p.det() - 1.0).abs() <= 1e-9);
    }
    println!("criterion 2 (nearest-rotation projection): PASS");
}

#[test]
fn criterion_3_asg_normalization_and_symmetry() {
    let lat = SphereLattice::fibonacci(600).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    for _ in 0..1000 {
        let r = random_rotation(&mut rng);
        let head = rng.random_range(0..3usize);
        let params =
            AsgParams::new(rng.random_range(0.5..10.0), rng.random_range(0.5..10.0)).unwrap();
        for mode in [
            NormalizationMode::Softmax { scale: 1.0 },
            NormalizationMode::Linear,
        ] {
            let dist = encode(&r, head, &params, &lat, mode).unwrap();
            let sum: f64 = dist.probs().iter().sum();
            assert!((sum - 1.0).abs() <= 1e-12, "sum {sum}");
        }

        // axis-swap symmetry at the kernel level, 1e-10
        let v = loop {
            let cand = [
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ];
            if let Some(unit) = vec3::normalize(cand) {
                break unit;
            }
        };
        let (ci, cj, ck) = (
            r.column(head),
            r.column((head + 1) % 3),
            r.column((head + 2) % 3),
        );
        let swapped = vec3::add(
            vec3::scale(ci, vec3::dot(v, ci)),
            vec3::add(
                vec3::scale(cj, vec3::dot(v, ck)),
                vec3::scale(ck, vec3::dot(v, cj)),
            ),
        );
        let g = asg_kernel(v, &r, head, &params).unwrap();
        let g_swapped = asg_kernel(swapped, &r, head, &params.swapped()).unwrap();
        assert!((g - g_swapped).abs() <= 1e-10);
    }

    // isotropic ties: with lambda = eta, equal alignments give equal
    // probabilities; build a pose vector equidistant from two lattice points
    let mut rng = ChaCha8Rng::seed_from_u64(2003);
    for _ in 0..50 {
        let a_idx = rng.random_range(0..600usize);
        let b_idx = rng.random_range(0..600usize);
        if a_idx == b_idx {
            continue;
        }
        let mid = vec3::normalize(vec3::add(lat.points()[a_idx], lat.points()[b_idx])).unwrap();
        let helper = if mid[0].abs() < 0.9 {
            [1.0, 0.0, 0.0]
        } else {
            [0.0, 1.0, 0.0]
        };
        let rj = vec3::normalize(vec3::cross(mid, helper)).unwrap();
        let rk = vec3::cross(mid, rj);
        let rot = RotationMatrix::try_from_rows([
            [mid[0], rj[0], rk[0]],
            [mid[1], rj[1], rk[1]],
            [mid[2], rj[2], rk[2]],
        ])
        .unwrap();
        let lambda = rng.random_range(0.5..10.0);
        let params = AsgParams::new(lambda, lambda).unwrap();
        for mode in [
            NormalizationMode::Softmax { scale: 1.0 },
            NormalizationMode::Linear,
        ] {
            let dist = encode(&rot, 0, &params, &lat, mode).unwrap();
            assert!(
                (dist.probs()[a_idx] - dist.probs()[b_idx]).abs() <= 1e-12,
                "isotropic tie violated"
            );
        }
    }
    println!("criterion 3 (normalization, isotropy ties, axis-swap symmetry): PASS");
}

#[test]
fn criterion_4_unbiased_expectation() {
    let start = Instant::now();
    let params = AsgParams::new(5.0, 5.0).unwrap();
    let angles =
        spherical_decode_angles(600, &params, NormalizationMode::Linear, 1000, 1004).unwrap();
    let mean = angles.iter().sum::<f64>() / angles.len() as f64;
    let max = angles.iter().cloned().fold(0.0f64, f64::max);
    assert!(mean <= 1.0, "mean decode angle {mean}");
    assert!(max <= 2.5, "max decode angle {max}");

    // the bounded-range 1D construction degrades toward the boundary
    let sweep = bias_sweep(30.0, &[0.0, 60.0, 120.0, 175.0]).unwrap();
    for pair in sweep.windows(2) {
        assert!(
            pair[1].1.abs() > pair[0].1.abs(),
            "1d |bias| not strictly increasing: {sweep:?}"
        );
    }
    let at_175 = sweep[3].1.abs();
    assert!(at_175 > 0.5, "1d bias at 175 deg is only {at_175}");

    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "unbiasedness run took {elapsed:.2}s");
    println!(
        "criterion 4 (spherical mean {mean:.4} deg / max {max:.4} deg vs 1d bias {at_175:.2} deg, {elapsed:.2}s): PASS"
    );
}

#[test]
fn criterion_5_gradient_correctness() {
    let start = Instant::now();
    for mode in [
        NormalizationMode::Softmax { scale: 1.0 },
        NormalizationMode::Linear,
    ] {
        let report = finite_diff_check(
            &GradCheckConfig {
                m: 60,
                seeds: 20,
                alpha: 0.2,
                mode,
            },
            1e-5,
        )
        .unwrap();
        assert!(
            report.max_rel_err <= 1e-5,
            "{mode:?}: max rel err {}",
            report.max_rel_err
        );
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "gradient check took {elapsed:.2}s");
    println!("criterion 5 (analytic vs finite-difference gradients, {elapsed:.2}s): PASS");
}

#[test]
fn criterion_6_toy_learnability_and_ablation() {
    let start = Instant::now();
    let data = generate_dataset(2000, 0.0, 1006).unwrap();
    let cfg = TrainConfig {
        m: 100,
        alpha: 0.2,
        lr: 1e-4,
        epochs: 30,
        ..TrainConfig::default()
    };
    let (adaptive, frozen) = run_ablation(&cfg, &data, AsgParams::new(1.0, 1.0).unwrap()).unwrap();

    let first = adaptive.history.first().unwrap();
    let last = adaptive.history.last().unwrap();
    assert!(
        last.maev_deg <= 0.2 * first.maev_deg,
        "adaptive: epoch-0 maev {} -> final {}",
        first.maev_deg,
        last.maev_deg
    );

    // both arms converge
    for (name, result) in [("adaptive", &adaptive), ("fixed", &frozen)] {
        let first = result.history.first().unwrap();
        let last = result.history.last().unwrap();
        assert!(last.loss.is_finite() && last.maev_deg.is_finite());
        assert!(
            last.maev_deg < first.maev_deg,
            "{name} arm did not improve: {} -> {}",
            first.maev_deg,
            last.maev_deg
        );
    }

    // comparison table emitted
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("comparison.csv");
    write_ablation_csv(&table, &adaptive, &frozen).unwrap();
    let text = std::fs::read_to_string(&table).unwrap();
    assert_eq!(text.lines().count(), 3);

    let gap = frozen.history.last().unwrap().maev_deg - adaptive.history.last().unwrap().maev_deg;
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 300.0, "toy training took {elapsed:.2}s");
    println!(
        "criterion 6 (maev {:.2} -> {:.2} deg; adaptive-minus-fixed gap {:.3} deg, {elapsed:.1}s): PASS",
        first.maev_deg, last.maev_deg, -gap
    );
}

#[test]
fn criterion_7_metric_correctness() {
    // wraparound
    let wrap = mae_euler(
        &EulerAngles::new(0.0, 179.0, 0.0),
        &EulerAngles::new(0.0, -179.0, 0.0),
    );
    assert!((wrap.yaw_err - 2.0).abs() < 1e-12);

    // zero iff equal (up to the acos noise floor)
    let mut rng = ChaCha8Rng::seed_from_u64(1007);
    let r = random_rotation(&mut rng);
    assert!(maev(&r, &r).mean < 1e-6);
    let nudged = euler_to_matrix(&EulerAngles::new(0.01, 0.0, 0.0))
        .unwrap()
        .mul(&r);
    assert!(maev(&nudged, &r).mean > 1e-4);

    // per-column errors bounded by the geodesic distance
    for _ in 0..1000 {
        let a = random_rotation(&mut rng);
        let b = random_rotation(&mut rng);
        let geo = geodesic_distance_deg(&a, &b);
        let got = maev(&a, &b);
        for err in [got.left_err, got.down_err, got.front_err] {
            assert!(err <= geo + 1e-7);
        }
    }
    println!("criterion 7 (MAE wraparound, MAEV bounds): PASS");
}

mod determinism {
    use std::path::Path;
    use std::process::Command;

    fn run(dir: &Path, args: &[&str]) {
        let out = Command::new(env!("CARGO_BIN_EXE_asgpose"))
            .current_dir(dir)
            .args(args)
            .output()
            .expect("binary spawns");
        assert!(
            out.status.success(),
            "{:?} failed: {}",
            args,
            String::from_utf8_lossy(&out.stderr)
        );
    }

    fn write_fixtures(dir: &Path) {
        std::fs::write(
            dir.join("poses.csv"),
            "id,pitch,yaw,roll\na,10,20,30\nb,-75,5,120\nc,0,0,0\n",
        )
        .unwrap();
        std::fs::write(dir.join("gt.csv"), "id,pitch,yaw,roll\na,0,0,0\nb,10,0,0\n").unwrap();
        std::fs::write(
            dir.join("pred.csv"),
            "id,pitch,yaw,roll\na,0,10,0\nb,10,2,0\n",
        )
        .unwrap();
        std::fs::write(dir.join("rot.json"), "{\"matrix\":[1,0,0,0,1,0,0,0,1]}").unwrap();
    }

    /// Every subcommand, seeded identically, against relative paths.
    fn run_all(dir: &Path) {
        write_fixtures(dir);
        run(
            dir,
            &[
                "lattice",
                "--m",
                "64",
                "--out",
                "points.csv",
                "--curve",
                "16,32",
                "--curve-out",
                "curve.csv",
            ],
        );
        run(
            dir,
            &[
                "convert",
                "--from",
                "euler",
                "--to",
                "matrix",
                "--in",
                "poses.csv",
                "--out",
                "m.jsonl",
            ],
        );
        run(
            dir,
            &[
                "encode", "--matrix", "rot.json", "--head", "0", "--m", "64", "--mode", "linear",
                "--out", "d0.csv",
            ],
        );
        run(
            dir,
            &[
                "encode", "--matrix", "rot.json", "--head", "1", "--m", "64", "--mode", "linear",
                "--out", "d1.csv",
            ],
        );
        run(
            dir,
            &[
                "encode", "--matrix", "rot.json", "--head", "2", "--m", "64", "--mode", "linear",
                "--out", "d2.csv",
            ],
        );
        run(
            dir,
            &[
                "decode",
                "--dists",
                "d0.csv,d1.csv,d2.csv",
                "--out",
                "decoded.json",
            ],
        );
        run(
            dir,
            &[
                "eval",
                "--pred",
                "pred.csv",
                "--gt",
                "gt.csv",
                "--format",
                "euler",
                "--out",
                "report.csv",
            ],
        );
        run(
            dir,
            &[
                "gradcheck",
                "--m",
                "20",
                "--seeds",
                "2",
                "--out",
                "grad.json",
            ],
        );
        run(
            dir,
            &[
                "train-toy",
                "--m",
                "20",
                "--epochs",
                "2",
                "--batch",
                "8",
                "--n-samples",
                "24",
                "--seed",
                "3",
                "--ablation",
                "--out",
                "run",
            ],
        );
        run(
            dir,
            &[
                "bias-lab", "--m", "100", "--trials", "10", "--seed", "1", "--out", "lab",
            ],
        );
        run(
            dir,
            &["render", "--m", "64", "--pairs", "1,1;5,1", "--out", "fig"],
        );
    }

    fn collect_files(root: &Path) -> Vec<(String, Vec<u8>)> {
        let mut files = Vec::new();
        let mut stack = vec![root.to_path_buf()];
        while let Some(dir) = stack.pop() {
            for entry in std::fs::read_dir(&dir).unwrap() {
                let path = entry.unwrap().path();
                if path.is_dir() {
                    stack.push(path);
                } else {
                    let rel = path.strip_prefix(root).unwrap().display().to_string();
                    files.push((rel, std::fs::read(&path).unwrap()));
                }
            }
        }
        files.sort_by(|a, b| a.0.cmp(&b.0));
        files
    }

    #[test]
    fn criterion_8_deterministic_artifacts() {
        let base = tempfile::tempdir().unwrap();
        let dir_a = base.path().join("a");
        let dir_b = base.path().join("b");
        std::fs::create_dir_all(&dir_a).unwrap();
        std::fs::create_dir_all(&dir_b).unwrap();
        run_all(&dir_a);
        run_all(&dir_b);

        let files_a = collect_files(&dir_a);
        let files_b = collect_files(&dir_b);
        assert_eq!(
            files_a.iter().map(|f| &f.0).collect::<Vec<_>>(),
            files_b.iter().map(|f| &f.0).collect::<Vec<_>>()
        );
        assert!(files_a.iter().any(|f| f.0.ends_with("manifest.json")));
        for ((name_a, bytes_a), (_, bytes_b)) in files_a.iter().zip(&files_b) {
            assert_eq!(bytes_a, bytes_b, "{name_a} differs between identical runs");
        }
        println!(
            "criterion 8 (byte-identical artifacts across {} files): PASS",
            files_a.len()
        );
    }
}

#[test]
fn decode_distribution_sanity() {
    // guards the decode path the suite leans on: one-hot recovers the point
    let lat = SphereLattice::fibonacci(64).unwrap();
    let mut probs = vec![0.0; 64];
    probs[11] = 1.0;
    let p = PoseDistribution::new(probs, 64, 1).unwrap();
    assert_eq!(decode_vector(&p, &lat).unwrap(), lat.points()[11]);
}
