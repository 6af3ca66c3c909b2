//! One-dimensional lander. The craft starts at rest at `start_height` and must
//! touch down with `|v| <= safe_speed`. Its only control is a main engine
//! whose acceleration is `mes · u`, `u = clip((a + 1) / 2, 0, 1)`, against
//! gravity `g = 7.5`. With `mes <= g` the engine cannot decelerate at all.

use serde::{Deserialize, Serialize};

use super::{clamp_action, Env, EnvSpec, Transition};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DroplanderConstants {
    pub dt: f64,
    pub gravity: f64,
    pub start_height: f64,
    /// Leaving through the ceiling ends the episode as a crash.
    pub ceiling: f64,
    pub safe_speed: f64,
    pub fuel_cost: f64,
    pub shaping_height: f64,
    pub shaping_coef: f64,
    pub landing_bonus: f64,
    pub crash_penalty: f64,
    pub episode_limit: usize,
    pub mes_low: f64,
    pub mes_high: f64,
    pub mes_default: f64,
    pub height_scale: f64,
    pub velocity_scale: f64,
}

impl Default for DroplanderConstants {
    fn default() -> Self {
        Self {
            dt: 0.05,
            gravity: 7.5,
            start_height: 10.0,
            ceiling: 20.0,
            safe_speed: 2.0,
            fuel_cost: 0.3,
            shaping_height: 2.0,
            shaping_coef: 0.1,
            landing_bonus: 100.0,
            crash_penalty: 100.0,
            episode_limit: 1000,
            mes_low: 8.0,
            mes_high: 20.0,
            mes_default: 13.0,
            height_scale: 10.0,
            velocity_scale: 10.0,
        }
    }
}

impl DroplanderConstants {
    /// Largest speed reachable below `shaping_height` for engines up to
    /// `mes_high`, bounded by energy from the ceiling.
    pub(crate) fn reward_bound(&self) -> f64 {
        let up = (self.mes_high - self.gravity).max(0.0);
        let v_max = (2.0 * (up + self.gravity) * self.ceiling).sqrt();
        self.landing_bonus.max(self.crash_penalty) + self.fuel_cost + self.shaping_coef * v_max
    }
}

#[derive(Clone)]
pub struct Droplander {
    spec: EnvSpec,
    c: DroplanderConstants,
    params: [f64; 1],
    height: f64,
    velocity: f64,
    steps: usize,
}

impl Droplander {
    pub fn new(spec: EnvSpec, c: DroplanderConstants, mes: f64, _seed: u64) -> Self {
        let height = c.start_height;
        Self {
            spec,
            c,
            params: [mes],
            height,
            velocity: 0.0,
            steps: 0,
        }
    }

    pub fn main_engine_strength(&self) -> f64 {
        self.params[0]
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn velocity(&self) -> f64 {
        self.velocity
    }

    fn observe(&self) -> Vec<f64> {
        vec![
            self.height / self.c.height_scale,
            self.velocity / self.c.velocity_scale,
        ]
    }
}

impl Env for Droplander {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn physical_params(&self) -> &[f64] {
        &self.params
    }

    fn reset(&mut self) -> Vec<f64> {
        self.height = self.c.start_height;
        self.velocity = 0.0;
        self.steps = 0;
        self.observe()
    }

    fn step(&mut self, action: &[f64]) -> Transition {
        let a = clamp_action(action, 1);
        let s = self.observe();
        let throttle = ((a[0] + 1.0) / 2.0).clamp(0.0, 1.0);
        let accel = self.params[0] * throttle - self.c.gravity;
        let dt = self.c.dt;

        // Exact constant-acceleration update over the step.
        let mut h = self.height + self.velocity * dt + 0.5 * accel * dt * dt;
        let mut v = self.velocity + accel * dt;
        let mut reward = -self.c.fuel_cost * throttle;
        let mut terminal = false;

        if h <= 0.0 {
            // Touchdown speed from energy over the remaining drop.
            v = -(self.velocity * self.velocity + 2.0 * accel * -self.height)
                .max(0.0)
                .sqrt();
            h = 0.0;
            terminal = true;
            reward += if v.abs() <= self.c.safe_speed {
                self.c.landing_bonus
            } else {
                -self.c.crash_penalty
            };
        } else if h >= self.c.ceiling {
            h = self.c.ceiling;
            terminal = true;
            reward -= self.c.crash_penalty;
        }
        if h < self.c.shaping_height {
            reward -= self.c.shaping_coef * v.abs();
        }

        self.height = h;
        self.velocity = v;
        self.steps += 1;
        let done = terminal || self.steps >= self.spec.episode_limit;
        Transition {
            s,
            a,
            r: reward,
            s_next: self.observe(),
            done,
            terminal,
        }
    }

    fn steps(&self) -> usize {
        self.steps
    }
}
