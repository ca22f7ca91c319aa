use proptest::prelude::*;

use pada::adapt::{ReplayBuffer, TransitionTriple};
use pada::common::{Environment, RngStream};
use pada::envs::{run_episode, scripted_source_policy, ContinuousEnv, EnvSpec, PerturbationConfig};
use pada::planner::{cem_minimize, ActionBox, CemConfig};
use pada::tabular::generate::{generate_instance, InstanceFamily};
use pada::tabular::model::greedy_policy_by;
use pada::tabular::{
    exact_trajectory_distribution, ftl_mle_update, greedy_adapted_policy, pada_tabular, CollectionMode,
    PadaTabularConfig, TabularDynamicsModel,
};

fn family() -> impl Strategy<Value = InstanceFamily> {
    prop_oneof![
        Just(InstanceFamily::PermutedActions),
        (0.0..0.5f64).prop_map(|beta| InstanceFamily::Mixed { beta }),
        Just(InstanceFamily::Random),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn trajectory_distribution_is_normalized(seed in any::<u64>(), n in 2usize..5, h in 1usize..5) {
        let inst = generate_instance(InstanceFamily::Random, n, 2, h, &mut RngStream::new(seed, "prop/traj"));
        let rho = exact_trajectory_distribution(&inst.source, &inst.source_policy).unwrap();
        prop_assert!((rho.probs().iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn greedy_choice_ignores_monotone_rescoring(seed in any::<u64>(), counts in 1usize..40) {
        let mut rng = RngStream::new(seed, "prop/greedy");
        let inst = generate_instance(InstanceFamily::Random, 4, 3, 3, &mut rng);
        let triples: Vec<(usize, usize, usize)> =
            (0..counts).map(|_| (rng.index(4), rng.index(3), rng.index(4))).collect();
        let model = ftl_mle_update(TabularDynamicsModel::new(4, 3, 0.1), &triples).unwrap();
        let plain = greedy_adapted_policy(&model, &inst.source, &inst.source_policy).unwrap();
        let squared = greedy_policy_by(&model, &inst.source, &inst.source_policy, |tv| tv * tv).unwrap();
        prop_assert_eq!(plain, squared);
    }

    #[test]
    fn gap_respects_floor_and_composition(seed in any::<u64>(), fam in family(), h in 1usize..5) {
        let inst = generate_instance(fam, 4, 3, h, &mut RngStream::new(seed, "prop/gap"));
        let cfg = PadaTabularConfig {
            iterations: 12,
            samples_per_iteration: 30,
            mode: CollectionMode::Sampled,
            seed,
            ..PadaTabularConfig::default()
        };
        let run = pada_tabular(&inst.source, &inst.source_policy, &inst.target, &cfg).unwrap();
        for r in &run.report.records {
            prop_assert!(r.one_step_gap >= r.eps_term - 1e-9, "{} < {}", r.one_step_gap, r.eps_term);
            let traj = r.trajectory_gap.unwrap();
            prop_assert!(traj <= h as f64 * r.one_step_gap + 1e-9, "{} > {} x {}", traj, h, r.one_step_gap);
        }
    }

    #[test]
    fn exact_mode_repeats_exactly(seed in any::<u64>(), fam in family()) {
        let inst = generate_instance(fam, 4, 2, 3, &mut RngStream::new(seed, "prop/exact"));
        let cfg = PadaTabularConfig { iterations: 10, seed, ..PadaTabularConfig::default() };
        let a = pada_tabular(&inst.source, &inst.source_policy, &inst.target, &cfg).unwrap();
        let b = pada_tabular(&inst.source, &inst.source_policy, &inst.target, &cfg).unwrap();
        prop_assert_eq!(a.report, b.report);
    }

    #[test]
    fn cem_stays_in_the_box(
        seed in any::<u64>(),
        d in 1usize..4,
        center in prop::collection::vec(-3.0..3.0f64, 3),
        init in prop::collection::vec(-5.0..5.0f64, 3),
        lo in 0.1..2.0f64,
    ) {
        let bounds = ActionBox::new(vec![-lo; d], vec![lo * 0.5; d]).unwrap();
        let c = center[..d].to_vec();
        let a = cem_minimize(
            |x: &[f64]| x.iter().zip(&c).map(|(x, c)| (x - c).abs().powf(1.5)).sum(),
            &bounds,
            &init[..d],
            &CemConfig::default(),
            &mut RngStream::new(seed, "prop/cem"),
        )
        .unwrap();
        prop_assert!(bounds.contains(&a), "{:?}", a);
    }

    #[test]
    fn buffer_prefix_survives_appends(seed in any::<u64>(), k in 1usize..20, extra in 1usize..50) {
        let mut rng = RngStream::new(seed, "prop/buffer");
        let mut triple = || {
            let s: Vec<f64> = (0..3).map(|_| rng.normal()).collect();
            TransitionTriple { s: s.clone(), a: vec![rng.uniform()], s_next: s.clone(), source_pred: s, explored: false }
        };
        let mut buf = ReplayBuffer::new();
        for _ in 0..k {
            buf.push(triple()).unwrap();
        }
        let before = buf.prefix_hash(k);
        for _ in 0..extra {
            buf.push(triple()).unwrap();
        }
        prop_assert_eq!(buf.len(), k + extra);
        prop_assert_eq!(before, buf.prefix_hash(k));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn noisy_rollouts_repeat_under_a_fixed_stream(seed in any::<u64>()) {
        let spec = EnvSpec::pendulum();
        let cfg = PerturbationConfig { motor_noise_std: 0.1, transition_noise_std: 0.01, ..PerturbationConfig::with_mass(1.5) };
        let env = ContinuousEnv::new(spec.clone(), cfg).unwrap();
        let pi = scripted_source_policy(&spec);
        let a = run_episode(&env, &pi, &mut RngStream::new(seed, "prop/rollout")).unwrap();
        let b = run_episode(&env, &pi, &mut RngStream::new(seed, "prop/rollout")).unwrap();
        prop_assert_eq!(a.states, b.states);
        prop_assert_eq!(a.rewards, b.rewards);
    }

    #[test]
    fn pendulum_step_is_lipschitz_in_action(theta in -3.1..3.1f64, omega in -6.0..6.0f64, a in -1.0..1.0f64, da in -0.5..0.5f64) {
        let env = ContinuousEnv::new(EnvSpec::pendulum(), PerturbationConfig::with_mass(1.5)).unwrap();
        let s = vec![theta.cos(), theta.sin(), omega];
        let b = (a + da).clamp(-1.0, 1.0);
        let x = env.step_mean(&s, &[a]).unwrap();
        let y = env.step_mean(&s, &[b]).unwrap();
        let ds = x.iter().zip(&y).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        // torque enters the velocity linearly; the position update then
        // moves at most dt times as far again
        let h = 1e-6;
        let lo = env.step_mean(&s, &[0.0]).unwrap();
        let hi = env.step_mean(&s, &[h]).unwrap();
        let slope = lo.iter().zip(&hi).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt() / h;
        prop_assert!(ds <= 1.01 * slope * (b - a).abs() + 1e-9, "{} vs {}", ds, slope);
    }

    #[test]
    fn reward_reads_only_the_state(theta in -3.1..3.1f64, omega in -6.0..6.0f64) {
        let env = ContinuousEnv::new(EnvSpec::pendulum(), PerturbationConfig::identity()).unwrap();
        let s = vec![theta.cos(), theta.sin(), omega];
        let r = Environment::reward(&env, &s);
        prop_assert_eq!(r.to_bits(), Environment::reward(&env, &s).to_bits());
        prop_assert!(r.is_finite());
    }
}
