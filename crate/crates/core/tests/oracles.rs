//! End-to-end checks of the public API against independent oracles.

use std::sync::Arc;

use duelsim::envgen::{generate, EnvKind, EnvSpec, EnvStream, SequenceFile};
use duelsim::policies::{PolicyConfig, PolicyKind, ScheduleKind};
use duelsim::prefmat::PreferenceMatrix;
use duelsim::regret::{dynamic_regret, lb_expected_rand_regret, per_interval_best, BenchmarkKind, RegretKind};
use duelsim::simulate::{run_episode, EnvSource, EpisodeOptions, RegretRequest};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn walk_step_size_matches_max_of_folded_normals() {
    let sigma: f64 = 0.002;
    let k = 10;
    let pairs = k * (k - 1) / 2;

    // oracle: E[max of 45 |N(0, sigma)|] by direct simulation
    let normal = Normal::new(0.0f64, sigma).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let draws: Vec<f64> = (0..200_000)
        .map(|_| (0..pairs).map(|_| normal.sample(&mut rng).abs()).fold(0.0, f64::max))
        .collect();
    let (oracle, oracle_se) = mean_and_se(&draws);

    let spec = EnvSpec::new(EnvKind::GaussianWalk, k, 1001, 3).with_sigma(sigma);
    let mut env = EnvStream::new(&spec).unwrap();
    let mut steps = Vec::with_capacity(1000);
    for _ in 0..1000 {
        let prev = env.current().clone();
        env.advance().unwrap();
        steps.push(env.current().max_abs_diff(&prev).unwrap());
    }
    let (mean, se) = mean_and_se(&steps);
    let se = (se * se + oracle_se * oracle_se).sqrt();
    assert!((mean - oracle).abs() < 4.0 * se, "mean {mean} oracle {oracle} se {se}");
}

#[test]
fn rand_on_lower_bound_matches_closed_form() {
    let spec = |seed| {
        EnvSpec::new(EnvKind::LowerBound, 3, 10_000, seed)
            .with_switches(1)
            .with_epsilon(0.1)
    };
    let req = [RegretRequest::new(RegretKind::Dynamic, BenchmarkKind::LbBenchmark)];
    let totals: Vec<f64> = (0..50)
        .map(|seed| {
            let r = run_episode(
                &EnvSource::Spec(spec(seed)),
                &PolicyConfig::new(PolicyKind::Rand),
                seed,
                &req,
                &EpisodeOptions::default(),
            )
            .unwrap();
            r.reports[0].report.total
        })
        .collect();
    let (mean, se) = mean_and_se(&totals);
    let expected = lb_expected_rand_regret(3, 0.1, 10_000).unwrap();
    assert!((expected - 2000.0 / 3.0).abs() < 1e-9);
    assert!((mean - expected).abs() < 4.0 * se, "mean {mean} expected {expected} se {se}");
}

#[test]
fn sequence_file_on_disk_reproduces_the_episode() {
    let spec = EnvSpec::new(EnvKind::ContinuousBudget, 4, 1500, 8).with_budget(3.0);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("seq.json");
    std::fs::write(&path, SequenceFile::from_spec(&spec, true).unwrap().to_json().unwrap()).unwrap();
    let file = SequenceFile::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let stored = Arc::new(file.to_sequence().unwrap());
    assert_eq!(*stored, generate(&spec).unwrap());

    let cfg = PolicyConfig::new(PolicyKind::Dex3S).with_schedule(ScheduleKind::Continuous);
    let req = [RegretRequest::new(RegretKind::Dynamic, BenchmarkKind::PerStep)];
    let opts = EpisodeOptions::default();
    let a = run_episode(&EnvSource::Spec(spec), &cfg, 4, &req, &opts).unwrap();
    let b = run_episode(&EnvSource::Sequence(stored), &cfg, 4, &req, &opts).unwrap();
    assert_eq!(a.trajectory, b.trajectory);
    assert_eq!(a.reports, b.reports);
}

#[test]
fn dex3s_tracks_switches_better_than_rand() {
    let req = [RegretRequest::new(RegretKind::Dynamic, BenchmarkKind::PerInterval)];
    let mut dex = 0.0;
    let mut rand = 0.0;
    for seed in 0..5 {
        let spec = EnvSpec::new(EnvKind::SwitchingWalk, 5, 20_000, seed).with_switches(4);
        let env = EnvSource::Spec(spec);
        let run = |kind| {
            run_episode(&env, &PolicyConfig::new(kind), seed, &req, &EpisodeOptions::default())
                .unwrap()
                .reports[0]
                .report
                .total
        };
        dex += run(PolicyKind::Dex3S);
        rand += run(PolicyKind::Rand);
    }
    assert!(dex < 0.75 * rand, "DEX3S {dex} RAND {rand}");
}

#[test]
fn coin_flip_environment_gives_zero_regret_for_any_learner() {
    let seq = Arc::new(
        duelsim::prefmat::PreferenceSequence::constant(PreferenceMatrix::uniform(5).unwrap(), 800).unwrap(),
    );
    let req = [
        RegretRequest::new(RegretKind::Static, BenchmarkKind::BestFixed),
        RegretRequest::new(RegretKind::Dynamic, BenchmarkKind::PerStep),
        RegretRequest::new(RegretKind::BordaDynamic, BenchmarkKind::PerStep),
    ];
    for kind in [PolicyKind::Dex3P, PolicyKind::Rex3, PolicyKind::Rand] {
        let r = run_episode(
            &EnvSource::Sequence(seq.clone()),
            &PolicyConfig::new(kind),
            1,
            &req,
            &EpisodeOptions::default(),
        )
        .unwrap();
        assert!(r.reports.iter().all(|b| b.report.total == 0.0), "{kind:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn online_per_interval_matches_offline(seed in any::<u64>(), k in 2usize..7, s in 2usize..6) {
        let spec = EnvSpec::new(EnvKind::SwitchingWalk, k, 600, seed).with_switches(s);
        let seq = generate(&spec).unwrap();
        let req = [RegretRequest::new(RegretKind::Dynamic, BenchmarkKind::PerInterval)];
        let cfg = PolicyConfig::new(PolicyKind::Dex3S).with_schedule(ScheduleKind::SwitchingUnknown);
        let r = run_episode(&EnvSource::Spec(spec), &cfg, seed, &req, &EpisodeOptions::default()).unwrap();
        let traj = r.trajectory.as_ref().unwrap();
        let bounds = seq.meta.boundaries.clone().unwrap();
        let bench = per_interval_best(&seq, traj, &bounds).unwrap();
        let offline = dynamic_regret(&seq, traj, &bench).unwrap();
        let online = &r.reports[0].report;
        prop_assert!((online.total - offline.total).abs() < 1e-9);
        prop_assert!((online.total - (online.row_part + online.column_part) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn realized_variation_never_exceeds_budget(seed in any::<u64>(), v in 0.0f64..20.0) {
        let spec = EnvSpec::new(EnvKind::ContinuousBudget, 4, 400, seed).with_budget(v);
        let mut env = EnvStream::new(&spec).unwrap();
        for _ in 1..400 {
            env.advance().unwrap();
        }
        prop_assert!((env.declared_step_total().unwrap() - v).abs() < 1e-9);
        prop_assert!(env.realized_variation() <= v + 1e-9);
    }

    #[test]
    fn policy_choice_never_changes_the_environment(seed in any::<u64>()) {
        let spec = EnvSpec::new(EnvKind::GaussianWalk, 4, 300, seed);
        let req = [RegretRequest::new(RegretKind::Dynamic, BenchmarkKind::PerStep)];
        let metas: Vec<_> = [PolicyKind::Dex3P, PolicyKind::Rand]
            .into_iter()
            .map(|k| run_episode(&EnvSource::Spec(spec.clone()), &PolicyConfig::new(k), seed ^ 1, &req, &EpisodeOptions::default()).unwrap().env)
            .collect();
        prop_assert_eq!(&metas[0], &metas[1]);
    }
}
