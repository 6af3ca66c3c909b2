//! Planar puck pushing. The pusher is a velocity-controlled point; touching
//! the puck while moving towards it hands the pusher's velocity to the puck,
//! which then slides and decays as `v ← v·(1 − μ_f·dt)·(1 − μ_d·dt)`.
//! Lower friction/damping multipliers make the puck overshoot.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{clamp_action, Env, EnvSpec, Transition};
use crate::rng::{seeded, Rng as ChaCha};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PusherConstants {
    pub dt: f64,
    /// Pusher speed at full action, units per second.
    pub max_speed: f64,
    pub contact_radius: f64,
    pub friction_default: f64,
    pub damping_default: f64,
    pub table_half_size: f64,
    pub episode_limit: usize,
    pub train_low: f64,
    pub train_high: f64,
}

impl Default for PusherConstants {
    fn default() -> Self {
        Self {
            dt: 0.1,
            max_speed: 0.5,
            contact_radius: 0.06,
            friction_default: 2.0,
            damping_default: 2.0,
            table_half_size: 1.0,
            episode_limit: 100,
            train_low: 0.67,
            train_high: 1.0,
        }
    }
}

impl PusherConstants {
    pub(crate) fn reward_bound(&self) -> f64 {
        2.0 * std::f64::consts::SQRT_2 * self.table_half_size
    }
}

#[derive(Clone)]
pub struct PointPusher {
    spec: EnvSpec,
    c: PusherConstants,
    params: [f64; 2],
    rng: ChaCha,
    pusher: [f64; 2],
    puck: [f64; 2],
    puck_vel: [f64; 2],
    goal: [f64; 2],
    steps: usize,
}

impl PointPusher {
    pub fn new(spec: EnvSpec, c: PusherConstants, multipliers: [f64; 2], seed: u64) -> Self {
        Self {
            spec,
            c,
            params: multipliers,
            rng: seeded(seed),
            pusher: [0.0, -0.7],
            puck: [0.0, -0.2],
            puck_vel: [0.0; 2],
            goal: [0.0, 0.5],
            steps: 0,
        }
    }

    pub fn puck(&self) -> [f64; 2] {
        self.puck
    }

    pub fn puck_velocity(&self) -> [f64; 2] {
        self.puck_vel
    }

    pub fn goal(&self) -> [f64; 2] {
        self.goal
    }

    /// Place the pusher and give the puck a velocity directly.
    pub fn set_state(&mut self, pusher: [f64; 2], puck: [f64; 2], puck_vel: [f64; 2]) {
        self.pusher = pusher;
        self.puck = puck;
        self.puck_vel = puck_vel;
    }

    /// Per-step decay factor applied to the puck velocity.
    pub fn decay(&self) -> f64 {
        let mu_f = self.c.friction_default * self.params[0];
        let mu_d = self.c.damping_default * self.params[1];
        ((1.0 - mu_f * self.c.dt) * (1.0 - mu_d * self.c.dt)).clamp(0.0, 1.0)
    }

    fn distance_to_goal(&self) -> f64 {
        ((self.puck[0] - self.goal[0]).powi(2) + (self.puck[1] - self.goal[1]).powi(2)).sqrt()
    }

    fn observe(&self) -> Vec<f64> {
        vec![
            self.pusher[0],
            self.pusher[1],
            self.puck[0],
            self.puck[1],
            self.puck_vel[0] / self.c.max_speed,
            self.puck_vel[1] / self.c.max_speed,
            self.goal[0],
            self.goal[1],
        ]
    }
}

impl Env for PointPusher {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn physical_params(&self) -> &[f64] {
        &self.params
    }

    fn reset(&mut self) -> Vec<f64> {
        let r = &mut self.rng;
        self.pusher = [r.gen_range(-0.1..0.1), -0.7];
        self.puck = [r.gen_range(-0.3..0.3), r.gen_range(-0.35..-0.15)];
        self.puck_vel = [0.0; 2];
        self.goal = [r.gen_range(-0.5..0.5), r.gen_range(0.3..0.7)];
        self.steps = 0;
        self.observe()
    }

    fn step(&mut self, action: &[f64]) -> Transition {
        let a = clamp_action(action, 2);
        let s = self.observe();
        let (dt, half) = (self.c.dt, self.c.table_half_size);

        let vel = [a[0] * self.c.max_speed, a[1] * self.c.max_speed];
        // Approach direction is judged from where the pusher came from.
        let before = [self.puck[0] - self.pusher[0], self.puck[1] - self.pusher[1]];
        for i in 0..2 {
            self.pusher[i] = (self.pusher[i] + vel[i] * dt).clamp(-half, half);
        }
        let d = [self.puck[0] - self.pusher[0], self.puck[1] - self.pusher[1]];
        let dist = (d[0] * d[0] + d[1] * d[1]).sqrt();
        if dist < self.c.contact_radius && vel[0] * before[0] + vel[1] * before[1] > 0.0 {
            self.puck_vel = vel;
        }
        let decay = self.decay();
        for i in 0..2 {
            self.puck[i] += self.puck_vel[i] * dt;
            if self.puck[i].abs() > half {
                self.puck[i] = self.puck[i].clamp(-half, half);
                self.puck_vel[i] = 0.0;
            }
            self.puck_vel[i] *= decay;
        }

        self.steps += 1;
        let done = self.steps >= self.spec.episode_limit;
        Transition {
            s,
            a,
            r: -self.distance_to_goal(),
            s_next: self.observe(),
            done,
            terminal: false,
        }
    }

    fn steps(&self) -> usize {
        self.steps
    }
}
