use pada::adapt::{DeviationModel, MlpPolicy};
use pada::common::RngStream;
use pada::envs::{collect_transitions, scripted_source_policy, ContinuousEnv, EnvSpec, PerturbationConfig, Transition};
use pada::nn::pretrain::{fit_normalizer, one_step_mse};
use pada::nn::{
    finite_difference_check, grad, pretrain_source_model, sgd_step, Loss, Minibatch, Mlp, Normalizer, PretrainConfig,
    SgdSchedule,
};
use pada::planner::ActionBox;

fn random_batch(in_dim: usize, out_dim: usize, n: usize, rng: &mut RngStream) -> Minibatch {
    let x = (0..in_dim * n).map(|_| rng.normal()).collect();
    let y = (0..out_dim * n).map(|_| rng.normal()).collect();
    Minibatch::new(x, y, n).unwrap()
}

#[test]
fn golden_forward_values() {
    let net = Mlp::standard(4, 3, &mut RngStream::new(42, "golden"));
    let y = net.forward(&[0.1, -0.2, 0.3, 0.5]).unwrap();
    let frozen = [-0.06872097594232715, 0.11477617448143661, -0.05857932610805523];
    for (a, b) in y.iter().zip(frozen) {
        assert!((a - b).abs() < 1e-12, "{y:?}");
    }
}

#[test]
fn gradient_check_on_every_architecture() {
    let mut rng = RngStream::new(11, "arch");
    let norm4 = Normalizer::fit(&(0..400).map(|i| (i as f64 * 0.37).sin()).collect::<Vec<_>>(), 4);
    let deviation = DeviationModel::new(3, 1, norm4.clone(), &mut rng).net;
    let policy = MlpPolicy::new(norm4.prefix(3), ActionBox::symmetric(1), &mut rng).net;
    // inverse dynamics reads [s, s']
    let idm = Mlp::standard(6, 1, &mut rng);
    let source = Mlp::standard(4, 3, &mut rng).with_input_norm(norm4);
    for (name, net) in [("deviation", deviation), ("policy", policy), ("idm", idm), ("source", source)] {
        let batch = random_batch(net.input_dim(), net.output_dim(), 8, &mut rng);
        let check = finite_difference_check(&net, &batch, 200, 1e-5, &mut rng).unwrap();
        assert!(check.max_rel_error < 1e-4, "{name}: {}", check.max_rel_error);
    }
}

fn train(seed: u64) -> Mlp {
    let mut rng = RngStream::new(seed, "determinism");
    let mut net = Mlp::standard(3, 2, &mut rng);
    let sched = SgdSchedule::linear(0.05, 50);
    for t in 0..50 {
        let batch = random_batch(3, 2, 16, &mut rng);
        let (_, g) = grad(&net, &batch, Loss::Mse).unwrap();
        sgd_step(&mut net, &g, &sched, t);
    }
    net
}

#[test]
fn training_is_bitwise_deterministic() {
    let a = train(3);
    let b = train(3);
    assert_eq!(a.params_flat(), b.params_flat());
    assert_ne!(a.params_flat(), train(4).params_flat());
}

#[test]
fn small_steps_never_raise_frozen_batch_loss() {
    let mut rng = RngStream::new(8, "small-steps");
    let mut net = Mlp::standard(5, 2, &mut rng);
    let batch = random_batch(5, 2, 32, &mut rng);
    let sched = SgdSchedule::constant(1e-4);
    let mut prev = net.loss(&batch, Loss::Mse);
    for t in 0..10 {
        let (_, g) = grad(&net, &batch, Loss::Mse).unwrap();
        sgd_step(&mut net, &g, &sched, t);
        let now = net.loss(&batch, Loss::Mse);
        assert!(now <= prev, "step {t}: {prev} -> {now}");
        prev = now;
    }
}

fn pendulum_triples(n: usize, seed: u64) -> Vec<Transition> {
    let spec = EnvSpec::pendulum();
    let env = ContinuousEnv::new(spec.clone(), PerturbationConfig::identity()).unwrap();
    let pi = scripted_source_policy(&spec);
    collect_transitions(&env, &pi, n, 0.2, &mut RngStream::new(seed, "pretrain-data")).unwrap()
}

#[test]
fn pendulum_source_model_fits_held_out_triples() {
    let triples = pendulum_triples(50_000, 0);
    let (_, stats) = pretrain_source_model(&triples, &PretrainConfig::default(), &mut RngStream::new(0, "pretrain")).unwrap();
    // calibrated at 0.0171, frozen with headroom
    let rmse = stats.heldout_mse.sqrt();
    assert!(rmse <= 0.025, "held-out rmse {rmse}");
}

#[test]
fn duplicated_dataset_converges_to_the_same_loss() {
    let triples = pendulum_triples(10_000, 1);
    let doubled: Vec<Transition> = triples.iter().chain(&triples).cloned().collect();
    let cfg = PretrainConfig {
        steps: 6000,
        holdout_fraction: 0.0,
        ..PretrainConfig::default()
    };
    let (single, _) = pretrain_source_model(&triples, &cfg, &mut RngStream::new(2, "dup")).unwrap();
    let (double, _) = pretrain_source_model(&doubled, &cfg, &mut RngStream::new(2, "dup")).unwrap();
    let a = one_step_mse(&single, &triples).unwrap();
    let b = one_step_mse(&double, &triples).unwrap();
    // same empirical risk, same normalizer; only the minibatch draws differ
    let (na, nb) = (fit_normalizer(&triples), fit_normalizer(&doubled));
    for (x, y) in na.mean.iter().chain(&na.std).zip(nb.mean.iter().chain(&nb.std)) {
        assert!((x - y).abs() < 1e-9);
    }
    assert!((a - b).abs() <= 0.25 * a.max(b), "single {a} doubled {b}");
}
