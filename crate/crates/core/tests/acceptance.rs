//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion and exits nonzero if any of them fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tvdd::decomposition::{local_divergence, local_divergence_adjoint, InterfaceMultiplier};
use tvdd::fidelity::threshold;
use tvdd::grid::{inner, inner_dual, norm2, norm2_dual, tv_maximizer};
use tvdd::harness::experiment::{prepare, write_trace, ExperimentConfig, Task};
use tvdd::harness::metrics::mismatch_fraction;
use tvdd::harness::noise::add_gaussian;
use tvdd::harness::synthetic::{phantom, two_disks};
use tvdd::oracle::{finite_difference_tv, jump_norm_squared, prox_agreement, reference_energy, rof_dd_lagrangian};
use tvdd::prelude::*;
use tvdd::solvers::{dd_solve_observed, relative_gap, ErgodicAverager};

const REFERENCE_ITERS: usize = 100_000;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_shape(r: &mut ChaCha8Rng, max: usize) -> GridShape {
    GridShape::new(r.random_range(1..=max), r.random_range(1..=max)).unwrap()
}

fn random_image(r: &mut ChaCha8Rng, shape: GridShape) -> ImageField {
    ImageField::from_fn(shape, |_, _| r.random_range(-1.0..1.0))
}

fn random_dual(r: &mut ChaCha8Rng, shape: GridShape) -> DualField {
    let dofs: Vec<f64> = (0..shape.edges()).map(|_| r.random_range(-1.0..1.0)).collect();
    DualField::from_dofs(shape, &dofs).unwrap()
}

fn operator_identities() -> Verdict {
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    for case in 0..200 {
        let shape = if case < 4 { GridShape::new(64, 64).unwrap() } else { random_shape(&mut r, 64) };
        let u = random_image(&mut r, shape);
        let p = random_dual(&mut r, shape);
        let scale = norm2(&u) * norm2_dual(&p);
        if scale > 0.0 {
            worst = worst.max((inner(&divergence(&p), &u) - inner_dual(&divergence_adjoint(&u), &p)).abs() / scale);
        }

        let nx = r.random_range(1..=shape.cols.min(6));
        let ny = r.random_range(1..=shape.rows.min(6));
        let part = Partition::uniform(shape, nx, ny).unwrap();
        let flat: Vec<f64> = (0..part.torn_dof_count()).map(|_| r.random_range(-1.0..1.0)).collect();
        let tp = part.torn_from_flat(&flat).unwrap();
        for (sub, block) in part.subdomains().iter().zip(tp.blocks()) {
            let us = part.restrict_image(&u, sub.id).unwrap();
            let scale = norm2(&us) * block.norm2();
            if scale > 0.0 {
                let lhs = inner(&local_divergence(block), &us);
                let rhs = block.inner(&local_divergence_adjoint(&us, sub.layout));
                worst = worst.max((lhs - rhs).abs() / scale);
            }
        }
        let lambda = InterfaceMultiplier::new((0..part.interface_len()).map(|_| r.random_range(-1.0..1.0)).collect());
        let scale = tp.norm2() * lambda.norm2();
        if scale > 0.0 {
            let lhs = part.jump(&tp).unwrap().inner(&lambda);
            let rhs = tp.inner(&part.jump_adjoint(&lambda).unwrap());
            worst = worst.max((lhs - rhs).abs() / scale);
        }
    }
    verdict(worst <= 1e-12, format!("worst relative adjoint defect {worst:.2e} over 200 cases"))
}

fn jump_norm() -> Verdict {
    let mut worst: f64 = 0.0;
    for (rows, cols) in [(64, 64), (40, 48), (17, 23)] {
        for (nx, ny) in [(2, 2), (4, 4), (3, 5)] {
            let part = Partition::uniform(GridShape::new(rows, cols).unwrap(), nx, ny).unwrap();
            let est = jump_norm_squared(&part, 50, 3).unwrap();
            worst = worst.max((est - 2.0).abs());
        }
    }
    verdict(worst <= 1e-9, format!("power iteration on BB*: max |estimate - 2| = {worst:.2e}"))
}

fn tv_equivalence() -> Verdict {
    let mut r = rng(3);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let shape = random_shape(&mut r, 64);
        let u = random_image(&mut r, shape);
        let max_form = inner(&u, &divergence(&tv_maximizer(&u)));
        let fd = finite_difference_tv(&u);
        worst = worst.max((max_form - fd).abs() / fd.max(1.0));
        worst = worst.max((total_variation(&u) - fd).abs() / fd.max(1.0));
    }
    verdict(worst <= 1e-12, format!("max relative difference {worst:.2e} over 100 images"))
}

fn prox_oracles() -> Verdict {
    let kinds = [
        FidelityKind::RofL2,
        FidelityKind::TvL1,
        FidelityKind::InpaintL2,
        FidelityKind::InpaintL1,
        FidelityKind::Segmentation,
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (k, kind) in kinds.into_iter().enumerate() {
        let w = prox_agreement(kind, 1000, 40 + k as u64).unwrap();
        ok &= w <= 1e-6;
        parts.push(format!("{kind:?} {w:.1e}"));
    }
    verdict(ok, format!("worst deviation per model: {}", parts.join(", ")))
}

/// One criterion-5 run, repeated with one and eight worker threads.
struct ProtocolRun {
    label: String,
    reference: f64,
    report: SolveReport,
    csv_one: Vec<u8>,
    csv_eight: Vec<u8>,
    wall: f64,
}

fn protocol_runs() -> Vec<ProtocolRun> {
    let dir = tempfile::tempdir().unwrap();
    let mut runs = Vec::new();
    for task in Task::SOLVE_TASKS {
        let config = ExperimentConfig::new(task);
        let problem = prepare(&config).unwrap();
        let reference = reference_energy(&problem.model, REFERENCE_ITERS).unwrap();
        let mut config = config;
        config.reference_energy = Some(reference.to_string());
        let outer = config.outer_params().unwrap();
        let inner = config.inner_params(&outer);
        for (nx, ny) in [(2, 2), (4, 4)] {
            let part = Partition::uniform(problem.model.shape(), nx, ny).unwrap();
            let mut traces = Vec::new();
            let mut report = None;
            let mut wall = 0.0;
            for threads in [1, 8] {
                let opts = DdOptions {
                    threads: Some(threads),
                    ground_truth: Some(&problem.clean),
                };
                let start = Instant::now();
                let sol = dd_solve(&problem.model, &part, &outer, &inner, &opts).unwrap();
                wall = f64::max(wall, start.elapsed().as_secs_f64());
                let path = dir.path().join(format!("{task}-{nx}x{ny}-{threads}.csv"));
                write_trace(&sol.report.trace, &path).unwrap();
                traces.push(std::fs::read(&path).unwrap());
                report = Some(sol.report);
            }
            runs.push(ProtocolRun {
                label: format!("{task} {nx}x{ny}"),
                reference,
                report: report.unwrap(),
                csv_eight: traces.pop().unwrap(),
                csv_one: traces.pop().unwrap(),
                wall,
            });
        }
    }
    runs
}

fn energy_equivalence(runs: &[ProtocolRun]) -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for run in runs {
        let gap = relative_gap(run.report.final_energy(), run.reference);
        let good = gap < 1e-4 && run.wall < 120.0;
        ok &= good;
        parts.push(format!("{} gap {gap:.1e} in {} iters ({:.2}s)", run.label, run.report.outer_iters, run.wall));
    }
    verdict(ok, parts.join("; "))
}

fn interface_consistency(runs: &[ProtocolRun]) -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for run in runs {
        let first = run.report.jump_trace[0];
        let last = *run.report.jump_trace.last().unwrap();
        let ratio = last / first;
        ok &= last < 1e-3 * first;
        parts.push(format!("{} {ratio:.1e}", run.label));
    }
    verdict(ok, format!("final/initial max |Bp| per run: {}", parts.join(", ")))
}

fn determinism(runs: &[ProtocolRun]) -> Verdict {
    let differing: Vec<&str> = runs
        .iter()
        .filter(|r| r.csv_one != r.csv_eight)
        .map(|r| r.label.as_str())
        .collect();
    verdict(
        differing.is_empty(),
        if differing.is_empty() {
            format!("{} runs with identical CSV traces under 1 and 8 threads", runs.len())
        } else {
            format!("traces differ for {}", differing.join(", "))
        },
    )
}

fn outer_monotonicity() -> Verdict {
    let config = ExperimentConfig::new(Task::DenoiseL1);
    let problem = prepare(&config).unwrap();
    let reference = reference_energy(&problem.model, REFERENCE_ITERS).unwrap();
    let outer = OuterParams::denoising().with_reference(Some(reference)).with_tol(1e-4);
    let inner = InnerParams::for_outer(&outer);
    let mut iters = Vec::new();
    let mut converged = true;
    for (nx, ny) in [(1, 1), (2, 2), (4, 4)] {
        let part = Partition::uniform(problem.model.shape(), nx, ny).unwrap();
        let r = dd_solve(&problem.model, &part, &outer, &inner, &DdOptions::default()).unwrap().report;
        converged &= r.converged;
        iters.push(r.outer_iters);
    }
    let monotone = iters.windows(2).all(|w| w[0] <= w[1]);
    verdict(
        monotone && converged,
        format!("outer iterations for 1x1, 2x2, 4x4: {iters:?}"),
    )
}

fn ergodic_gap() -> Verdict {
    let shape = GridShape::new(32, 32).unwrap();
    let model = FidelityModel::rof(10.0, add_gaussian(&phantom(shape), 0.0, 0.05, 3).unwrap()).unwrap();
    let part = Partition::uniform(shape, 2, 2).unwrap();

    let long = OuterParams::denoising().with_tol(0.0).with_max_outer(2000);
    let best = dd_solve(
        &model,
        &part,
        &long,
        &InnerParams::for_outer(&long).with_tol(1e-10),
        &DdOptions::default(),
    )
    .unwrap();

    let outer = OuterParams::denoising().with_tol(0.0).with_max_outer(500);
    let mut avg = ErgodicAverager::new();
    let mut scaled = Vec::new();
    dd_solve_observed(&model, &part, &outer, &InnerParams::for_outer(&outer), &DdOptions::default(), |s| {
        avg.push(s.p, s.lambda);
        if s.iter >= 10 {
            let (p, l) = avg.averages().unwrap();
            let gap = rof_dd_lagrangian(&model, &part, &p, &best.lambda).unwrap()
                - rof_dd_lagrangian(&model, &part, &best.p, &l).unwrap();
            scaled.push((s.iter as f64, s.iter as f64 * gap));
        }
    })
    .unwrap();

    let finite = scaled.len() == 491 && scaled.iter().all(|(_, g)| g.is_finite());
    let half = scaled.len() / 2;
    let early = scaled[..half].iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
    let late = scaled[half..].iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
    let n = scaled.len() as f64;
    let (mx, my) = scaled.iter().fold((0.0, 0.0), |a, x| (a.0 + x.0 / n, a.1 + x.1 / n));
    let slope = scaled.iter().map(|x| (x.0 - mx) * (x.1 - my)).sum::<f64>()
        / scaled.iter().map(|x| (x.0 - mx).powi(2)).sum::<f64>();
    verdict(
        finite && late <= early && slope <= 0.0,
        format!(
            "n*gap: max {early:.3} over n=10..{}, max {late:.3} after, trend slope {slope:.2e}",
            9 + half
        ),
    )
}

fn segmentation_accuracy() -> Verdict {
    let shape = GridShape::new(64, 64).unwrap();
    let (clean, truth) = two_disks(shape, 0.6, 0.1);
    let model = FidelityModel::segmentation(10.0, add_gaussian(&clean, 0.0, 0.01, 11).unwrap(), 0.6, 0.1).unwrap();
    let part = Partition::uniform(shape, 2, 2).unwrap();
    let outer = OuterParams::segmentation();
    let sol = dd_solve(&model, &part, &outer, &InnerParams::for_outer(&outer), &DdOptions::default()).unwrap();
    let miss = mismatch_fraction(&threshold(&sol.u, 0.5), &truth);
    verdict(miss <= 0.01, format!("{:.3}% of pixels mislabeled", 100.0 * miss))
}

fn main() -> ExitCode {
    let mut all = true;
    let mut report = |id: usize, name: &str, limit: Option<f64>, f: &mut dyn FnMut() -> Verdict| {
        let start = Instant::now();
        let v = f();
        let secs = start.elapsed().as_secs_f64();
        let in_time = limit.is_none_or(|l| secs < l);
        let passed = v.passed && in_time;
        all &= passed;
        let timing = match limit {
            Some(l) => format!("{secs:.2}s, limit {l:.0}s"),
            None => format!("{secs:.2}s"),
        };
        println!(
            "{} criterion {id:>2} {name}: {} ({timing})",
            if passed { "PASS" } else { "FAIL" },
            v.detail
        );
    };

    report(1, "operator identities", Some(10.0), &mut operator_identities);
    report(2, "jump norm", Some(5.0), &mut jump_norm);
    report(3, "TV equivalence", Some(5.0), &mut tv_equivalence);
    report(4, "prox oracles", Some(30.0), &mut prox_oracles);

    let runs = protocol_runs();
    report(5, "DD energy equivalence", None, &mut || energy_equivalence(&runs));
    report(6, "outer-iteration monotonicity", Some(180.0), &mut outer_monotonicity);
    report(7, "ergodic gap", Some(60.0), &mut ergodic_gap);
    report(8, "interface consistency", None, &mut || interface_consistency(&runs));
    report(9, "segmentation accuracy", Some(60.0), &mut segmentation_accuracy);
    report(10, "thread determinism", None, &mut || determinism(&runs));

    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
