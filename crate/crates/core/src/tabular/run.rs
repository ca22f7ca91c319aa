//! The adaptation loop on finite MDPs and its diagnostics.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::common::prob::{kl_divergence_slices, tv_distance_slices};
use crate::common::{DiscreteDistribution, RngStream};
use crate::error::{PadaError, Result};
use crate::tabular::exact::{
    adaptability_report, decision_distribution, exact_trajectory_distribution,
};
use crate::tabular::mdp::{TabularMdp, TabularPolicy};
use crate::tabular::model::{
    ftl_mle_update, greedy_adapted_policy, TabularDynamicsModel, DEFAULT_SMOOTHING,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CollectionMode {
    /// One sampled `(s, a, s')` per reset, `N` resets per iteration.
    Sampled,
    /// Absorbs the expected counts `N · d_π(s) · (1/A) · f(s'|s,a)`.
    ExactExpectation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PadaTabularConfig {
    pub iterations: usize,
    pub samples_per_iteration: usize,
    pub mode: CollectionMode,
    pub smoothing: f64,
    pub seed: u64,
    /// Model used at the first iteration; uniform rows when `None`.
    pub initial_model: Option<TabularDynamicsModel>,
}

impl Default for PadaTabularConfig {
    fn default() -> Self {
        Self {
            iterations: 50,
            samples_per_iteration: 100,
            mode: CollectionMode::ExactExpectation,
            smoothing: DEFAULT_SMOOTHING,
            seed: 0,
            initial_model: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// 1-based.
    pub iteration: usize,
    /// `E_{s∼d_π}[TV(f_target(·|s,π(s)), f_source(·|s,π_source(s)))]`.
    pub one_step_gap: f64,
    /// `‖ρ_π − ρ_source‖`; `None` when the horizon is too long to enumerate.
    pub trajectory_gap: Option<f64>,
    /// `E_{s∼d_π}[ε_{s, π_source(s)}]`, the irreducible part of the gap.
    pub eps_term: f64,
    /// `ℓ_e(f̂_e)`.
    pub learner_loss: f64,
    /// `Σ_{e'≤e} ℓ_{e'}(f̂_{e'})`.
    pub cumulative_loss: f64,
    /// `min_f Σ_{e'≤e} ℓ_{e'}(f)`.
    pub hindsight_loss: f64,
    /// `(cumulative_loss − hindsight_loss) / e`.
    pub avg_regret: f64,
}

/// What the regret computation needs after the run.
#[derive(Debug, Clone, PartialEq)]
pub struct FtlTrace {
    pub target: TabularMdp,
    /// Decision-state distribution `d_{π_e}` per iteration.
    pub decision_dists: Vec<Vec<f64>>,
    /// `ℓ_e(f̂_e)` per iteration.
    pub learner_losses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TabularRunReport {
    pub mode: CollectionMode,
    pub records: Vec<IterationRecord>,
    /// Index into `records` of the policy with the smallest one-step gap.
    pub best_index: usize,
    pub trace: FtlTrace,
}

impl TabularRunReport {
    pub fn best(&self) -> &IterationRecord {
        &self.records[self.best_index]
    }

    pub fn last(&self) -> &IterationRecord {
        self.records.last().expect("at least one iteration")
    }

    /// Columns: `iteration, one_step_gap, trajectory_gap, avg_regret, eps_term`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| PadaError::Io(e.to_string());
        out.write_record(["iteration", "one_step_gap", "trajectory_gap", "avg_regret", "eps_term"])
            .map_err(io)?;
        for r in &self.records {
            out.write_record([
                r.iteration.to_string(),
                r.one_step_gap.to_string(),
                r.trajectory_gap.map(|g| g.to_string()).unwrap_or_default(),
                r.avg_regret.to_string(),
                r.eps_term.to_string(),
            ])
            .map_err(io)?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TabularRun {
    pub report: TabularRunReport,
    /// `π_1 … π_T`.
    pub policies: Vec<TabularPolicy>,
}

impl TabularRun {
    pub fn best_policy(&self) -> &TabularPolicy {
        &self.policies[self.report.best_index]
    }
}

/// `Σ_s w(s) (1/A) Σ_a KL(f_target(·|s,a) ‖ predict(s,a))`.
fn weighted_model_loss(
    target: &TabularMdp,
    weights: &[f64],
    predict: impl Fn(usize, usize) -> Vec<f64>,
) -> f64 {
    let na = target.n_actions() as f64;
    let mut total = 0.0;
    for (s, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for a in 0..target.n_actions() {
            match kl_divergence_slices(target.next_dist(s, a), &predict(s, a)) {
                Ok(kl) => total += w / na * kl,
                Err(_) => return f64::INFINITY,
            }
        }
    }
    total
}

/// One-step gap of `policy` under its own decision distribution `d`.
fn one_step_gap(
    source: &TabularMdp,
    source_policy: &TabularPolicy,
    target: &TabularMdp,
    policy: &TabularPolicy,
    d: &[f64],
) -> Result<f64> {
    let mut gap = 0.0;
    for (s, &m) in d.iter().enumerate() {
        if m == 0.0 {
            continue;
        }
        gap += m * tv_distance_slices(
            target.next_dist(s, policy.action(s)),
            source.next_dist(s, source_policy.action(s)),
        )?;
    }
    Ok(gap)
}

fn collect_sampled(
    target: &TabularMdp,
    policy: &TabularPolicy,
    n: usize,
    rng: &mut RngStream,
) -> Vec<(usize, usize, usize)> {
    let mut triples = Vec::with_capacity(n);
    for _ in 0..n {
        let mut s = rng.categorical(target.initial());
        let h = rng.index(target.horizon());
        for _ in 0..h {
            s = rng.categorical(target.next_dist(s, policy.action(s)));
        }
        let a = rng.index(target.n_actions());
        let sp = rng.categorical(target.next_dist(s, a));
        triples.push((s, a, sp));
    }
    triples
}

/// Runs the data-aggregation adaptation loop for `cfg.iterations` rounds.
pub fn pada_tabular(
    source: &TabularMdp,
    source_policy: &TabularPolicy,
    target: &TabularMdp,
    cfg: &PadaTabularConfig,
) -> Result<TabularRun> {
    source.same_state_space(target)?;
    source_policy.check_for(source)?;
    if cfg.iterations == 0 {
        return Err(PadaError::InvalidConfig("iterations must be positive".into()));
    }
    let adaptability = adaptability_report(source, source_policy, target)?;
    let source_rho = match exact_trajectory_distribution(source, source_policy) {
        Ok(r) => Some(r),
        Err(PadaError::TooLargeToEnumerate { .. }) => {
            log::warn!("trajectory gap disabled: horizon too long to enumerate");
            None
        }
        Err(e) => return Err(e),
    };

    let mut model = cfg
        .initial_model
        .clone()
        .unwrap_or_else(|| TabularDynamicsModel::new(target.n_states(), target.n_actions(), cfg.smoothing));
    if model.n_states() != target.n_states() || model.n_actions() != target.n_actions() {
        return Err(PadaError::InvalidConfig("initial model shape differs from target".into()));
    }
    let mut rng = RngStream::new(cfg.seed, "tabular/collect");
    let mut policies = Vec::with_capacity(cfg.iterations);
    let mut records = Vec::with_capacity(cfg.iterations);
    let mut decision_dists = Vec::with_capacity(cfg.iterations);
    let mut learner_losses = Vec::with_capacity(cfg.iterations);

    for e in 1..=cfg.iterations {
        let policy = greedy_adapted_policy(&model, source, source_policy)?;
        let d = decision_distribution(target, &policy);
        let gap = one_step_gap(source, source_policy, target, &policy, &d)?;
        let trajectory_gap = match &source_rho {
            Some(rho_s) => {
                let rho = exact_trajectory_distribution(target, &policy)?;
                Some(tv_distance_slices(rho.probs(), rho_s.probs())?)
            }
            None => None,
        };
        let eps_term = adaptability.expected_eps(&d, source_policy);
        let learner_loss = weighted_model_loss(target, &d, |s, a| model.predict(s, a));

        match cfg.mode {
            CollectionMode::Sampled => {
                let triples = collect_sampled(target, &policy, cfg.samples_per_iteration, &mut rng);
                model = ftl_mle_update(model, &triples)?;
            }
            CollectionMode::ExactExpectation => {
                let scale = cfg.samples_per_iteration as f64 / target.n_actions() as f64;
                for (s, &m) in d.iter().enumerate() {
                    if m == 0.0 {
                        continue;
                    }
                    for a in 0..target.n_actions() {
                        model.absorb(s, a, scale * m, target.next_dist(s, a));
                    }
                }
            }
        }

        records.push(IterationRecord {
            iteration: e,
            one_step_gap: gap,
            trajectory_gap,
            eps_term,
            learner_loss,
            cumulative_loss: 0.0,
            hindsight_loss: 0.0,
            avg_regret: 0.0,
        });
        decision_dists.push(d);
        learner_losses.push(learner_loss);
        policies.push(policy);
    }

    let trace = FtlTrace {
        target: target.clone(),
        decision_dists,
        learner_losses,
    };
    for (r, point) in records.iter_mut().zip(regret_points(&trace)) {
        r.cumulative_loss = point.cumulative;
        r.hindsight_loss = point.hindsight;
        r.avg_regret = point.avg_regret;
    }
    let best_index = records
        .iter()
        .enumerate()
        .fold(0, |best, (i, r)| if r.one_step_gap < records[best].one_step_gap { i } else { best });

    Ok(TabularRun {
        report: TabularRunReport {
            mode: cfg.mode,
            records,
            best_index,
            trace,
        },
        policies,
    })
}

struct RegretPoint {
    cumulative: f64,
    hindsight: f64,
    avg_regret: f64,
}

fn regret_points(trace: &FtlTrace) -> Vec<RegretPoint> {
    let target = &trace.target;
    let (n, na) = (target.n_states(), target.n_actions());
    let mut weight = vec![0.0; n];
    let mut cumulative = 0.0;
    let mut out = Vec::with_capacity(trace.learner_losses.len());
    for (t, (d, loss)) in trace.decision_dists.iter().zip(&trace.learner_losses).enumerate() {
        cumulative += loss;
        for (w, m) in weight.iter_mut().zip(d) {
            *w += m;
        }
        // Hindsight minimizer: the MLE on the expected counts of every loss
        // so far, Σ_e d_e(s)/A · f(s'|s,a), normalized per (s, a).
        let mle = |s: usize, a: usize| -> Vec<f64> {
            let counts: Vec<f64> = target
                .next_dist(s, a)
                .iter()
                .map(|p| weight[s] / na as f64 * p)
                .collect();
            DiscreteDistribution::from_weights(&counts)
                .map(|d| d.into_vec())
                .unwrap_or_else(|_| vec![1.0 / n as f64; n])
        };
        let hindsight = weighted_model_loss(target, &weight, mle);
        let periods = (t + 1) as f64;
        out.push(RegretPoint {
            cumulative,
            hindsight,
            avg_regret: (cumulative - hindsight) / periods,
        });
    }
    out
}

/// Average FTL regret for every prefix length `T = 1..=iterations`.
pub fn ftl_regret_curve(report: &TabularRunReport) -> Vec<f64> {
    regret_points(&report.trace)
        .into_iter()
        .map(|p| p.avg_regret)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::generate::{permuted_target, random_mdp, random_policy};

    fn instance(seed: u64) -> (TabularMdp, TabularPolicy, TabularMdp) {
        let mut rng = RngStream::new(seed, "pada-unit");
        let source = random_mdp(4, 3, 3, &mut rng);
        let pi = random_policy(4, 3, &mut rng);
        let (target, _) = permuted_target(&source, &mut rng);
        (source, pi, target)
    }

    #[test]
    fn csv_columns() {
        let (s, pi, t) = instance(1);
        let run = pada_tabular(&s, &pi, &t, &PadaTabularConfig { iterations: 3, ..Default::default() }).unwrap();
        let mut buf = Vec::new();
        run.report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "iteration,one_step_gap,trajectory_gap,avg_regret,eps_term");
        assert_eq!(lines.count(), 3);
    }

    #[test]
    fn zero_iterations_rejected() {
        let (s, pi, t) = instance(2);
        let cfg = PadaTabularConfig { iterations: 0, ..Default::default() };
        assert!(pada_tabular(&s, &pi, &t, &cfg).is_err());
    }

    #[test]
    fn sampled_mode_is_seeded() {
        let (s, pi, t) = instance(3);
        let cfg = PadaTabularConfig {
            iterations: 5,
            samples_per_iteration: 20,
            mode: CollectionMode::Sampled,
            seed: 9,
            ..Default::default()
        };
        let a = pada_tabular(&s, &pi, &t, &cfg).unwrap();
        let b = pada_tabular(&s, &pi, &t, &cfg).unwrap();
        assert_eq!(a, b);
    }
}
