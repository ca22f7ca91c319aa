//! Hand-written source controllers.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::envs::continuous::{pendulum, point_mass, ContinuousEnv, EnvKind, EnvSpec};
use crate::envs::perturbation::PerturbationConfig;

/// A deterministic state-feedback policy whose output lies in the action
/// box.
pub trait ControlPolicy: Send + Sync {
    fn action(&self, state: &[f64]) -> Vec<f64>;
}

impl<T: ControlPolicy + ?Sized> ControlPolicy for &T {
    fn action(&self, state: &[f64]) -> Vec<f64> {
        (**self).action(state)
    }
}

impl<T: ControlPolicy + ?Sized> ControlPolicy for Box<T> {
    fn action(&self, state: &[f64]) -> Vec<f64> {
        (**self).action(state)
    }
}

/// Zero action everywhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroPolicy {
    pub action_dim: usize,
}

impl ControlPolicy for ZeroPolicy {
    fn action(&self, _state: &[f64]) -> Vec<f64> {
        vec![0.0; self.action_dim]
    }
}

/// Largest torque fraction the pendulum controller uses, so a heavier
/// pendulum can still be driven with the same accelerations.
pub const PENDULUM_ACTION_LIMIT: f64 = 0.6;

#[derive(Debug, Clone, PartialEq)]
pub enum ScriptedController {
    /// Energy-shaping swing-up blended into PD balance.
    Pendulum,
    /// PD to the goal with slope feed-forward.
    PointMass,
    /// Discrete LQR about upright; `gain` acts on `[x, ẋ, θ, θ̇]`.
    CartpoleLite { gain: [f64; 4] },
}

pub fn scripted_source_policy(spec: &EnvSpec) -> ScriptedController {
    match spec.kind {
        EnvKind::Pendulum => ScriptedController::Pendulum,
        EnvKind::PointMass => ScriptedController::PointMass,
        EnvKind::CartpoleLite => ScriptedController::CartpoleLite {
            gain: cartpole_lqr_gain(),
        },
    }
}

fn pendulum_action(s: &[f64]) -> f64 {
    use pendulum::*;
    let k = GRAVITY / LENGTH;
    let theta = s[1].atan2(s[0]);
    let mut phi = theta - PI;
    if phi < -PI {
        phi += 2.0 * PI;
    }
    let omega = s[2];
    let energy = 0.5 * omega * omega + k * (1.0 - s[0]);
    let swing = PENDULUM_ACTION_LIMIT * (0.5 * (2.0 * k - energy) * omega).tanh();
    let torque = -20.0 * phi - 5.0 * omega;
    let balance = (torque / MAX_TORQUE).clamp(-PENDULUM_ACTION_LIMIT, PENDULUM_ACTION_LIMIT);
    // −cos θ is cos of the angle from upright
    let w = 1.0 / (1.0 + (-60.0 * (-s[0] - 0.4f64.cos())).exp());
    w * balance + (1.0 - w) * swing
}

fn point_mass_action(s: &[f64]) -> Vec<f64> {
    use point_mass::*;
    let feed_forward = [0.0, MASS * SLOPE_GRAVITY / MAX_FORCE];
    (0..2)
        .map(|i| {
            let u = (4.0 * (GOAL[i] - s[i]) - 3.0 * s[2 + i]) / MAX_FORCE;
            (u + feed_forward[i]).clamp(-1.0, 1.0)
        })
        .collect()
}

impl ControlPolicy for ScriptedController {
    fn action(&self, s: &[f64]) -> Vec<f64> {
        match self {
            Self::Pendulum => vec![pendulum_action(s)],
            Self::PointMass => point_mass_action(s),
            Self::CartpoleLite { gain } => {
                let z = [s[0], s[1], s[3].atan2(s[2]), s[4]];
                let u: f64 = -gain.iter().zip(&z).map(|(k, v)| k * v).sum::<f64>();
                vec![u.clamp(-1.0, 1.0)]
            }
        }
    }
}

/// Linearizes the nominal cart-pole step by central differences and
/// iterates the discrete Riccati equation.
pub fn cartpole_lqr_gain() -> [f64; 4] {
    let env = ContinuousEnv::new(EnvSpec::cartpole_lite(), PerturbationConfig::identity())
        .expect("identity config");
    let f = |z: &[f64], u: f64| -> [f64; 4] {
        let s = [z[0], z[1], z[2].cos(), z[2].sin(), z[3]];
        let n = env.step_mean(&s, &[u]).expect("finite near upright");
        [n[0], n[1], n[3].atan2(n[2]), n[4]]
    };
    let h = 1e-6;
    let mut a = DMatrix::<f64>::zeros(4, 4);
    for j in 0..4 {
        let mut zp = [0.0; 4];
        let mut zm = [0.0; 4];
        zp[j] = h;
        zm[j] = -h;
        let (p, m) = (f(&zp, 0.0), f(&zm, 0.0));
        for i in 0..4 {
            a[(i, j)] = (p[i] - m[i]) / (2.0 * h);
        }
    }
    let (p, m) = (f(&[0.0; 4], h), f(&[0.0; 4], -h));
    let b = DVector::from_iterator(4, (0..4).map(|i| (p[i] - m[i]) / (2.0 * h)));
    let q = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.1, 10.0, 0.5]));
    let r = 1.0;
    let mut pm = q.clone();
    let gain = |pm: &DMatrix<f64>| {
        let pb = pm * &b;
        (a.transpose() * &pb) / (r + b.dot(&pb))
    };
    // Joseph form keeps the iterate symmetric positive semidefinite.
    for _ in 0..20_000 {
        let k = gain(&pm);
        let closed = &a - &b * k.transpose();
        let next = &q + &k * k.transpose() * r + closed.transpose() * &pm * &closed;
        let done = (&next - &pm).amax() < 1e-10 * next.amax();
        pm = next;
        if done {
            break;
        }
    }
    let k = gain(&pm);
    [k[0], k[1], k[2], k[3]]
}
