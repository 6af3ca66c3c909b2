//! Training loops: active randomization (sampler + discriminator), uniform
//! randomization, the fixed-reference baseline, and bootstrapping from a
//! saved sampler and discriminator.

mod config;

use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;

pub use config::{AgentProfile, DiscConfig, Mode, RunConfig, SEED_ENV_VAR};

use crate::ddpg::{DdpgAgent, ReplayBuffer, Source, UpdateOutcome};
use crate::disc::{Discriminator, Label, LabeledTrajectory};
use crate::envs::{EnvSpec, Transition};
use crate::error::{AdrError, Result};
use crate::eval::{evaluate_generalization, CurveRow, EvalGrid, GenRow, ProposalRow, RunMeta, RunReport};
use crate::policy::run_episode;
use crate::rng::{derive_indexed, derive_seed, seeded, stream, Rng as ChaCha};
use crate::space::RandConfig;
use crate::svpg::Ensemble;

/// Instrumentation of the per-iteration ordering.
#[derive(Clone, Debug, PartialEq)]
pub enum Event {
    Proposed { iteration: u64, count: usize },
    Scored { iteration: u64, trajectory: usize },
    AgentUpdated { iteration: u64, updates: usize },
    SamplerUpdated { iteration: u64 },
    DiscriminatorTrained { iteration: u64, steps: usize },
    /// Stores of randomized and reference trajectories, checked equal.
    StoresCleared { iteration: u64, randomized: usize, reference: usize },
    Evaluated { timestep: u64 },
}

/// Discriminator accuracy on the tuples of the iteration that triggered an
/// evaluation, measured before that iteration's training steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscAccuracy {
    pub timestep: u64,
    pub accuracy: f64,
}

/// Everything a finished run leaves behind.
#[derive(Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub events: Vec<Event>,
    pub agent: DdpgAgent,
    pub buffer: ReplayBuffer,
    pub ensemble: Option<Ensemble>,
    pub discriminator: Option<Discriminator>,
    /// Physical parameters of every training episode, in order.
    pub episode_params: Vec<Vec<f64>>,
    pub disc_accuracy: Vec<DiscAccuracy>,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// One progress line per evaluation on stderr.
    pub progress: bool,
    /// When set, the run stops at the next iteration boundary and fails with
    /// `Interrupted`, leaving a partial report behind.
    pub cancel: Option<Arc<AtomicBool>>,
}

/// Run whatever `config.mode` asks for.
pub fn run(config: &RunConfig, opts: RunOptions) -> Result<RunOutcome> {
    config.validate()?;
    let mut t = Trainer::new(config, opts)?;
    let result = match config.mode {
        Mode::Adr | Mode::Bootstrap => t.adr_loop(),
        Mode::Udr | Mode::Baseline => t.single_env_loop(),
    };
    match result.and_then(|_| t.finish()) {
        Ok(()) => {
            t.write_outputs()?;
            Ok(t.into_outcome())
        }
        Err(e) => {
            t.report.meta.completed = false;
            t.report.meta.error = Some(e.to_string());
            t.report.meta.timesteps = t.timestep;
            // Best effort: the original error matters more than a write failure.
            if let Some(dir) = &config.out_dir {
                let _ = t.report.write(dir);
            }
            Err(e)
        }
    }
}

pub fn run_adr(config: &RunConfig) -> Result<RunOutcome> {
    expect_mode(config, Mode::Adr)?;
    run(config, RunOptions::default())
}

pub fn run_udr(config: &RunConfig) -> Result<RunOutcome> {
    expect_mode(config, Mode::Udr)?;
    run(config, RunOptions::default())
}

pub fn run_baseline(config: &RunConfig) -> Result<RunOutcome> {
    expect_mode(config, Mode::Baseline)?;
    run(config, RunOptions::default())
}

pub fn run_bootstrap(config: &RunConfig) -> Result<RunOutcome> {
    expect_mode(config, Mode::Bootstrap)?;
    run(config, RunOptions::default())
}

fn expect_mode(config: &RunConfig, mode: Mode) -> Result<()> {
    if config.mode != mode {
        return Err(AdrError::Config(format!(
            "expected mode {}, config says {}",
            mode.name(),
            config.mode.name()
        )));
    }
    Ok(())
}

/// Save the trained agent, sampler and discriminator under `dir`.
pub fn save_checkpoints(outcome: &RunOutcome, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    outcome.agent.save(dir.join("agent"))?;
    if let Some(e) = &outcome.ensemble {
        e.save(dir.join("ensemble"))?;
    }
    if let Some(d) = &outcome.discriminator {
        d.save(dir.join("discriminator.json"))?;
    }
    Ok(())
}

struct Episode {
    params: Vec<f64>,
    transitions: Vec<Transition>,
}

struct Trainer<'a> {
    cfg: &'a RunConfig,
    opts: RunOptions,
    spec: EnvSpec,
    seed: u64,
    max_steps: u64,
    agent: DdpgAgent,
    buffer: ReplayBuffer,
    agent_rng: ChaCha,
    ensemble: Option<Ensemble>,
    disc: Option<Discriminator>,
    timestep: u64,
    episodes: u64,
    next_eval: u64,
    grid: EvalGrid,
    eval_seed: u64,
    report: RunReport,
    events: Vec<Event>,
    episode_params: Vec<Vec<f64>>,
    disc_accuracy: Vec<DiscAccuracy>,
}

impl<'a> Trainer<'a> {
    fn new(cfg: &'a RunConfig, opts: RunOptions) -> Result<Self> {
        let spec = cfg.spec()?;
        let seed = cfg.seed;
        let agent = DdpgAgent::new(
            spec.obs_dim,
            spec.act_dim,
            cfg.agent_config(),
            &mut stream(seed, "agent-init"),
        )?;
        let buffer = agent.new_buffer();
        let (ensemble, disc) = match cfg.mode {
            Mode::Adr => {
                let e = Ensemble::new(
                    spec.rand_space.clone(),
                    cfg.svpg_config(),
                    &mut stream(seed, "svpg-init"),
                )?;
                let mut d = Discriminator::new(
                    2 * spec.obs_dim + spec.act_dim,
                    &cfg.disc.hidden,
                    cfg.disc.lr,
                    cfg.disc.batch_size,
                    &mut stream(seed, "disc-init"),
                )?;
                if cfg.disc.frozen_uniform {
                    let last = d.net.layers_mut().last_mut().expect("discriminator has layers");
                    last.weight.map_inplace(|_| 0.0);
                    last.bias.map_inplace(|_| 0.0);
                }
                (Some(e), Some(d))
            }
            Mode::Bootstrap => {
                let e = Ensemble::load(cfg.ensemble_checkpoint.as_ref().expect("validated"))?;
                if e.space().len() != spec.rand_space.len() {
                    return Err(AdrError::Dimension {
                        what: "ensemble randomization dims".into(),
                        expected: spec.rand_space.len(),
                        found: e.space().len(),
                    });
                }
                let d = Discriminator::load(
                    cfg.discriminator_checkpoint.as_ref().expect("validated"),
                    cfg.disc.batch_size,
                )?;
                let want = 2 * spec.obs_dim + spec.act_dim;
                if d.tuple_dim() != want {
                    return Err(AdrError::Dimension {
                        what: "discriminator input".into(),
                        expected: want,
                        found: d.tuple_dim(),
                    });
                }
                (Some(e), Some(d))
            }
            Mode::Udr | Mode::Baseline => (None, None),
        };
        let grid = EvalGrid::for_env(&spec, cfg.eval_resets);
        let meta = RunMeta {
            mode: cfg.mode.name().into(),
            env: spec.name().into(),
            seed,
            config_hash: cfg.hash(),
            version: env!("CARGO_PKG_VERSION").into(),
            rand_space_used: cfg.mode != Mode::Baseline,
            dims: spec.rand_space.names().into_iter().map(String::from).collect(),
            max_timesteps: cfg.max_steps(),
            timesteps: 0,
            eval_every: cfg.eval_every,
            hist_bins: cfg.hist_bins,
            completed: false,
            error: None,
            // Without the output directory, so reruns elsewhere match byte for byte.
            config: serde_json::to_value(RunConfig {
                out_dir: None,
                ..cfg.clone()
            })?,
        };
        Ok(Self {
            cfg,
            opts,
            seed,
            max_steps: cfg.max_steps(),
            agent,
            buffer,
            agent_rng: stream(seed, "agent"),
            ensemble,
            disc,
            timestep: 0,
            episodes: 0,
            next_eval: 0,
            grid,
            eval_seed: derive_seed(seed, "eval"),
            report: RunReport {
                meta,
                learning_curve: Vec::new(),
                generalization: Vec::new(),
                proposals: Vec::new(),
            },
            events: Vec::new(),
            episode_params: Vec::new(),
            disc_accuracy: Vec::new(),
            spec,
        })
    }

    /// Roll out the agent with exploration noise on explicit physical
    /// parameters. Episodes run in parallel; each has its own env and noise
    /// stream keyed by its global episode index, so order is irrelevant.
    fn rollouts(&self, params: &[Vec<f64>], first_episode: u64, reference: bool) -> Result<Vec<Episode>> {
        let spec = &self.spec;
        let agent = &self.agent;
        let seed = self.seed;
        params
            .par_iter()
            .enumerate()
            .map(|(i, p)| {
                let idx = first_episode + i as u64;
                let mut env = spec.make_physical(p, derive_indexed(seed, "env", idx))?;
                let noise_stream = if reference { "reference-noise" } else { "noise" };
                let mut rng = seeded(derive_indexed(seed, noise_stream, idx));
                Ok(Episode {
                    params: p.clone(),
                    transitions: run_episode(env.as_mut(), agent, true, &mut rng),
                })
            })
            .collect()
    }

    fn store_randomized(&mut self, ep: &Episode) -> Result<()> {
        for t in &ep.transitions {
            self.buffer.push(t, Source::Randomized)?;
        }
        self.timestep += ep.transitions.len() as u64;
        self.episode_params.push(ep.params.clone());
        Ok(())
    }

    fn train_agent(&mut self, updates: usize) -> Result<usize> {
        let mut done = 0;
        for _ in 0..updates {
            if let UpdateOutcome::Trained(_) = self.agent.update(&self.buffer, &mut self.agent_rng)? {
                done += 1;
            }
        }
        Ok(done)
    }

    fn check_cancel(&self) -> Result<()> {
        match &self.opts.cancel {
            Some(flag) if flag.load(Ordering::Relaxed) => Err(AdrError::Interrupted(self.timestep)),
            _ => Ok(()),
        }
    }

    fn eval_due(&self) -> bool {
        self.timestep >= self.next_eval && self.next_eval <= self.max_steps
    }

    /// Evaluate once and label the result with every cadence point crossed.
    fn evaluate(&mut self) -> Result<()> {
        let results = evaluate_generalization(&self.agent, &self.spec, &self.grid, self.eval_seed)?;
        while self.eval_due() {
            let t = self.next_eval;
            for c in &results {
                self.report.learning_curve.push(CurveRow {
                    timestep: t,
                    seed: self.seed,
                    env_cell: c.cell.id.clone(),
                    mean_return: c.mean(),
                    std_return: c.std(),
                });
            }
            self.events.push(Event::Evaluated { timestep: t });
            if self.opts.progress {
                let mean = crate::stats::mean(&results.iter().map(|c| c.mean()).collect::<Vec<_>>());
                eprintln!(
                    "[{} {} seed {}] t={} grid mean return {:.2}",
                    self.cfg.mode.name(),
                    self.spec.name(),
                    self.seed,
                    t,
                    mean
                );
            }
            self.next_eval += self.cfg.eval_every;
        }
        Ok(())
    }

    fn adr_loop(&mut self) -> Result<()> {
        let mut svpg_rng = stream(self.seed, "svpg");
        let mut disc_rng = stream(self.seed, "disc");
        self.evaluate()?;
        let mut iteration = 0u64;
        while self.timestep < self.max_steps {
            self.check_cancel()?;
            let ensemble = self.ensemble.as_mut().expect("adr has a sampler");
            let proposals: Vec<RandConfig> = ensemble.propose(&mut svpg_rng)?;
            for (i, p) in proposals.iter().enumerate() {
                self.report.proposals.push(ProposalRow {
                    timestep: self.timestep,
                    particle: i,
                    values: p.values().to_vec(),
                });
            }
            self.events.push(Event::Proposed {
                iteration,
                count: proposals.len(),
            });

            let n = proposals.len();
            let params: Vec<Vec<f64>> = proposals.iter().map(|c| self.spec.rand_space.denormalize(c)).collect();
            let randomized = self.rollouts(&params, self.episodes, false)?;
            let ref_params = vec![self.spec.default_physical(); n];
            let reference = self.rollouts(&ref_params, self.episodes, true)?;
            self.episodes += n as u64;

            let mut rand_store = Vec::with_capacity(n);
            let mut ref_store = Vec::with_capacity(n);
            let mut steps = 0usize;
            for (ep, rf) in randomized.iter().zip(&reference) {
                self.store_randomized(ep)?;
                steps += ep.transitions.len();
                rand_store.push(LabeledTrajectory::from_transitions(Label::Randomized, &ep.transitions)?);
                ref_store.push(LabeledTrajectory::from_transitions(Label::Reference, &rf.transitions)?);
            }

            let disc = self.disc.as_mut().expect("adr has a discriminator");
            let mut rewards = Vec::with_capacity(n);
            for (i, traj) in rand_store.iter_mut().enumerate() {
                rewards.push(disc.score(traj)?);
                self.events.push(Event::Scored { iteration, trajectory: i });
            }
            let ensemble = self.ensemble.as_mut().expect("adr has a sampler");
            ensemble.assign_rewards(&rewards)?;

            let updates = self.train_agent(steps)?;
            self.events.push(Event::AgentUpdated { iteration, updates });

            self.ensemble.as_mut().expect("adr has a sampler").update()?;
            self.events.push(Event::SamplerUpdated { iteration });

            let eval_now = self.eval_due();
            let disc = self.disc.as_mut().expect("adr has a discriminator");
            if eval_now {
                let pos = stack_tuples(&rand_store)?;
                let neg = stack_tuples(&ref_store)?;
                self.disc_accuracy.push(DiscAccuracy {
                    timestep: self.timestep,
                    accuracy: disc.accuracy(&pos, &neg)?,
                });
            }
            if !self.cfg.disc.frozen_uniform {
                let k = self.cfg.disc.steps_per_iteration.unwrap_or(n);
                for _ in 0..k {
                    disc.train_step(&rand_store, &ref_store, &mut disc_rng)?;
                }
                self.events.push(Event::DiscriminatorTrained { iteration, steps: k });
            }

            if rand_store.len() != ref_store.len() {
                return Err(AdrError::Contract(format!(
                    "iteration {iteration}: {} randomized vs {} reference trajectories",
                    rand_store.len(),
                    ref_store.len()
                )));
            }
            self.events.push(Event::StoresCleared {
                iteration,
                randomized: rand_store.len(),
                reference: ref_store.len(),
            });

            if eval_now {
                self.evaluate()?;
            }
            iteration += 1;
        }
        Ok(())
    }

    /// UDR draws a fresh configuration per episode; the baseline always uses
    /// the reference parameters.
    fn single_env_loop(&mut self) -> Result<()> {
        let mut udr_rng = stream(self.seed, "udr");
        self.evaluate()?;
        while self.timestep < self.max_steps {
            self.check_cancel()?;
            let params = match self.cfg.mode {
                Mode::Udr => {
                    let cfg = self.spec.rand_space.sample_uniform(&mut udr_rng);
                    self.spec.rand_space.denormalize(&cfg)
                }
                _ => self.spec.default_physical(),
            };
            let mut eps = self.rollouts(&[params], self.episodes, false)?;
            self.episodes += 1;
            let ep = eps.pop().expect("one episode");
            self.store_randomized(&ep)?;
            self.train_agent(ep.transitions.len())?;
            if self.eval_due() {
                self.evaluate()?;
            }
        }
        Ok(())
    }

    fn finish(&mut self) -> Result<()> {
        let results = evaluate_generalization(&self.agent, &self.spec, &self.grid, self.eval_seed)?;
        self.report.generalization = results
            .iter()
            .map(|c| GenRow {
                cell: c.cell.id.clone(),
                params: c.cell.physical.clone(),
                mean: c.mean(),
                std: c.std(),
                n: c.returns.len(),
            })
            .collect();
        self.report.meta.timesteps = self.timestep;
        self.report.meta.completed = true;
        Ok(())
    }

    fn write_outputs(&self) -> Result<()> {
        if let Some(dir) = &self.cfg.out_dir {
            self.report.write(dir)?;
            if self.cfg.save_checkpoints {
                let ck = dir.join("checkpoints");
                self.agent.save(ck.join("agent"))?;
                if let Some(e) = &self.ensemble {
                    e.save(ck.join("ensemble"))?;
                }
                if let Some(d) = &self.disc {
                    d.save(ck.join("discriminator.json"))?;
                }
            }
        }
        Ok(())
    }

    fn into_outcome(self) -> RunOutcome {
        RunOutcome {
            report: self.report,
            events: self.events,
            agent: self.agent,
            buffer: self.buffer,
            ensemble: self.ensemble,
            discriminator: self.disc,
            episode_params: self.episode_params,
            disc_accuracy: self.disc_accuracy,
        }
    }
}

fn stack_tuples(trajs: &[LabeledTrajectory]) -> Result<crate::nn::Matrix> {
    let rows: Vec<&[f64]> = trajs
        .iter()
        .flat_map(|t| (0..t.tuples.rows()).map(move |r| t.tuples.row_slice(r)))
        .collect();
    crate::nn::Matrix::from_rows(&rows)
}

/// Draw a uniform configuration; exposed for the sampling checks.
pub fn sample_udr<R: Rng + ?Sized>(spec: &EnvSpec, rng: &mut R) -> RandConfig {
    spec.rand_space.sample_uniform(rng)
}
