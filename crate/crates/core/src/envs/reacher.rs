//! Planar four-joint arm in a vertical plane. Each joint is position
//! controlled by a torque-limited P controller and feels its own viscous
//! damping plus the static gravity load of everything distal to it.
//!
//! Default torque limits are half of the load of a fully extended horizontal
//! arm, so at 1× torque a drooping arm cannot lift itself back up.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{clamp_action, Env, EnvSpec, Transition};
use crate::rng::{seeded, Rng as ChaCha};

pub const JOINTS: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReacherConstants {
    pub dt: f64,
    pub substeps: usize,
    pub link_length: f64,
    pub link_mass: f64,
    pub gravity: f64,
    /// Default torque limit as a fraction of the horizontal gravity load.
    pub torque_fraction: f64,
    /// P gain per unit of default torque limit.
    pub gain_per_torque: f64,
    /// Default joint damping per unit of default torque limit.
    pub damping_per_torque: f64,
    pub episode_limit: usize,
    pub damping_low: f64,
    pub damping_high: f64,
    pub torque_low: f64,
    pub torque_high: f64,
    pub velocity_scale: f64,
}

impl Default for ReacherConstants {
    fn default() -> Self {
        Self {
            dt: 0.02,
            substeps: 5,
            link_length: 0.25,
            link_mass: 1.0,
            gravity: 9.81,
            torque_fraction: 0.5,
            gain_per_torque: 20.0,
            damping_per_torque: 0.5,
            episode_limit: 100,
            damping_low: 0.3,
            damping_high: 2.0,
            torque_low: 1.0,
            torque_high: 4.0,
            velocity_scale: 5.0,
        }
    }
}

impl ReacherConstants {
    pub(crate) fn reward_bound(&self) -> f64 {
        2.0 * JOINTS as f64 * self.link_length
    }

    /// Gravity torque at joint `i` when the whole arm is horizontal.
    pub fn horizontal_load(&self, i: usize) -> f64 {
        let l = self.link_length;
        (i..JOINTS)
            .map(|k| self.link_mass * self.gravity * ((k - i) as f64 * l + 0.5 * l))
            .sum()
    }

    pub fn default_max_torque(&self, i: usize) -> f64 {
        self.torque_fraction * self.horizontal_load(i)
    }
}

/// Joint limits: the base swings over the upper half plane, the others bend
/// ±90° relative to their parent link.
fn joint_limits(i: usize) -> (f64, f64) {
    if i == 0 {
        (0.0, PI)
    } else {
        (-FRAC_PI_2, FRAC_PI_2)
    }
}

#[derive(Clone)]
pub struct Reacher4 {
    spec: EnvSpec,
    c: ReacherConstants,
    params: [f64; 8],
    rng: ChaCha,
    q: [f64; JOINTS],
    qd: [f64; JOINTS],
    goal: [f64; 2],
    steps: usize,
}

impl Reacher4 {
    /// `params = [damping multipliers ×4, max-torque multipliers ×4]`.
    pub fn new(spec: EnvSpec, c: ReacherConstants, params: [f64; 8], seed: u64) -> Self {
        Self {
            spec,
            c,
            params,
            rng: seeded(seed),
            q: [FRAC_PI_2, 0.0, 0.0, 0.0],
            qd: [0.0; JOINTS],
            goal: [0.0, 0.8],
            steps: 0,
        }
    }

    pub fn joint_positions(&self) -> [f64; JOINTS] {
        self.q
    }

    pub fn set_state(&mut self, q: [f64; JOINTS], qd: [f64; JOINTS]) {
        self.q = q;
        self.qd = qd;
    }

    pub fn end_effector(&self) -> [f64; 2] {
        forward_kinematics(&self.q, self.c.link_length).0[JOINTS]
    }

    fn max_torque(&self, i: usize) -> f64 {
        self.params[JOINTS + i] * self.c.default_max_torque(i)
    }

    fn damping(&self, i: usize) -> f64 {
        self.params[i] * self.c.damping_per_torque * self.c.default_max_torque(i)
    }

    fn gain(&self, i: usize) -> f64 {
        self.c.gain_per_torque * self.c.default_max_torque(i)
    }

    fn substep(&mut self, target: &[f64; JOINTS]) {
        let l = self.c.link_length;
        let m = self.c.link_mass;
        let (joints, coms) = forward_kinematics(&self.q, l);
        let dt = self.c.dt;
        let mut qdd = [0.0; JOINTS];
        for i in 0..JOINTS {
            let mut gravity = 0.0;
            let mut inertia = 0.0;
            for k in i..JOINTS {
                let dx = coms[k][0] - joints[i][0];
                let dy = coms[k][1] - joints[i][1];
                gravity -= m * self.c.gravity * dx;
                inertia += m * (dx * dx + dy * dy) + m * l * l / 12.0;
            }
            let limit = self.max_torque(i);
            let motor = (self.gain(i) * (target[i] - self.q[i])).clamp(-limit, limit);
            qdd[i] = (motor + gravity - self.damping(i) * self.qd[i]) / inertia;
        }
        for i in 0..JOINTS {
            self.qd[i] += qdd[i] * dt;
            self.q[i] += self.qd[i] * dt;
            let (lo, hi) = joint_limits(i);
            if self.q[i] < lo || self.q[i] > hi {
                self.q[i] = self.q[i].clamp(lo, hi);
                self.qd[i] = 0.0;
            }
        }
    }

    fn observe(&self) -> Vec<f64> {
        let ee = self.end_effector();
        let mut obs = Vec::with_capacity(12);
        obs.push((self.q[0] - FRAC_PI_2) / FRAC_PI_2);
        for i in 1..JOINTS {
            obs.push(self.q[i] / FRAC_PI_2);
        }
        for i in 0..JOINTS {
            obs.push(self.qd[i] / self.c.velocity_scale);
        }
        obs.extend_from_slice(&ee);
        obs.extend_from_slice(&self.goal);
        obs
    }

    /// Map an action in `[-1, 1]^4` to joint targets spanning each range.
    fn targets(action: &[f64]) -> [f64; JOINTS] {
        let mut t = [0.0; JOINTS];
        for i in 0..JOINTS {
            let (lo, hi) = joint_limits(i);
            t[i] = lo + (action[i] + 1.0) * 0.5 * (hi - lo);
        }
        t
    }
}

/// Joint positions (`JOINTS + 1` points, the last is the end effector) and
/// link centres of mass.
fn forward_kinematics(q: &[f64; JOINTS], l: f64) -> ([[f64; 2]; JOINTS + 1], [[f64; 2]; JOINTS]) {
    let mut joints = [[0.0; 2]; JOINTS + 1];
    let mut coms = [[0.0; 2]; JOINTS];
    let mut angle = 0.0;
    for i in 0..JOINTS {
        angle += q[i];
        let (s, c) = angle.sin_cos();
        coms[i] = [joints[i][0] + 0.5 * l * c, joints[i][1] + 0.5 * l * s];
        joints[i + 1] = [joints[i][0] + l * c, joints[i][1] + l * s];
    }
    (joints, coms)
}

impl Env for Reacher4 {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn physical_params(&self) -> &[f64] {
        &self.params
    }

    fn reset(&mut self) -> Vec<f64> {
        let r = &mut self.rng;
        self.q = [FRAC_PI_2 + r.gen_range(-0.05..0.05), 0.0, 0.0, 0.0];
        for i in 1..JOINTS {
            self.q[i] = r.gen_range(-0.05..0.05);
        }
        self.qd = [0.0; JOINTS];
        let mut goal_q = [0.0; JOINTS];
        goal_q[0] = r.gen_range(FRAC_PI_4..3.0 * FRAC_PI_4);
        for g in goal_q.iter_mut().skip(1) {
            *g = r.gen_range(-FRAC_PI_4..FRAC_PI_4);
        }
        self.goal = forward_kinematics(&goal_q, self.c.link_length).0[JOINTS];
        self.steps = 0;
        self.observe()
    }

    fn step(&mut self, action: &[f64]) -> Transition {
        let a = clamp_action(action, JOINTS);
        let s = self.observe();
        let target = Self::targets(&a);
        for _ in 0..self.c.substeps {
            self.substep(&target);
        }
        let ee = self.end_effector();
        let dist = ((ee[0] - self.goal[0]).powi(2) + (ee[1] - self.goal[1]).powi(2)).sqrt();
        self.steps += 1;
        Transition {
            s,
            a,
            r: -dist,
            s_next: self.observe(),
            done: self.steps >= self.spec.episode_limit,
            terminal: false,
        }
    }

    fn steps(&self) -> usize {
        self.steps
    }
}
