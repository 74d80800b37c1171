//! Planar biped tracking joint-angle targets with a PD controller.
//!
//! Reward components, in order: `gait`, `step`, `torque`, `height`,
//! `orientation`, `fall`.

pub mod dynamics;
pub mod gait;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EnvError, EnvSpec, Environment, RewardComponent, StepResult};
use dynamics::{BodyModel, BodyState, ContactModel, GenVec, JOINTS, PITCH, X, Z};
use gait::GaitDetector;

pub use dynamics::DOF;

pub const OBS_DIM: usize = 15;
pub const ACT_DIM: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct WalkerConfig {
    pub torso_mass: f64,
    pub thigh_mass: f64,
    pub shank_mass: f64,
    pub torso_length: f64,
    pub thigh_length: f64,
    pub shank_length: f64,
    pub gravity: f64,
    pub kp: f64,
    pub kd: f64,
    pub tau_max: f64,
    pub contact_stiffness: f64,
    pub contact_damping: f64,
    pub friction: f64,
    /// Tangential ground spring (N/m) and damper (N·s/m), capped by friction.
    pub tangential_stiffness: f64,
    pub tangential_damping: f64,
    pub dt_phys: f64,
    pub substeps: usize,
    pub max_steps: usize,
    pub hip_limit: f64,
    pub knee_max: f64,
    pub w_gait: f64,
    pub w_step: f64,
    pub w_torque: f64,
    pub w_height: f64,
    pub w_orientation: f64,
    pub fall_penalty: f64,
    pub fall_height_fraction: f64,
    pub fall_pitch: f64,
    /// Pelvis speed used to bound the per-step displacement reward.
    pub max_speed: f64,
    pub min_swing: f64,
    /// Initial hip angles are `+stance_split` (left) and `-stance_split`.
    pub stance_split: f64,
    pub init_noise: f64,
    pub energy_projection: bool,
}

impl Default for WalkerConfig {
    fn default() -> Self {
        Self {
            torso_mass: 3.0,
            thigh_mass: 0.5,
            shank_mass: 0.3,
            torso_length: 0.4,
            thigh_length: 0.25,
            shank_length: 0.25,
            gravity: 9.81,
            kp: 40.0,
            kd: 1.0,
            tau_max: 10.0,
            contact_stiffness: 1e4,
            contact_damping: 100.0,
            friction: 1.0,
            tangential_stiffness: 1e4,
            tangential_damping: 20.0,
            dt_phys: 0.002,
            substeps: 10,
            max_steps: 1000,
            hip_limit: 1.0,
            knee_max: 2.0,
            w_gait: 1.0,
            w_step: 1.0,
            w_torque: 0.001,
            w_height: 1.0,
            w_orientation: 1.0,
            fall_penalty: 50.0,
            fall_height_fraction: 0.5,
            fall_pitch: 1.0,
            max_speed: 5.0,
            min_swing: 0.01,
            stance_split: 0.25,
            init_noise: 0.02,
            energy_projection: true,
        }
    }
}

impl WalkerConfig {
    pub fn validate(&self) -> Result<(), EnvError> {
        let positive = [
            ("torso_mass", self.torso_mass),
            ("thigh_mass", self.thigh_mass),
            ("shank_mass", self.shank_mass),
            ("torso_length", self.torso_length),
            ("thigh_length", self.thigh_length),
            ("shank_length", self.shank_length),
            ("gravity", self.gravity),
            ("tau_max", self.tau_max),
            ("contact_stiffness", self.contact_stiffness),
            ("tangential_stiffness", self.tangential_stiffness),
            ("dt_phys", self.dt_phys),
            ("hip_limit", self.hip_limit),
            ("knee_max", self.knee_max),
            ("fall_height_fraction", self.fall_height_fraction),
            ("fall_pitch", self.fall_pitch),
            ("max_speed", self.max_speed),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(EnvError::InvalidConfig(format!(
                    "walker.{name} must be positive, got {v}"
                )));
            }
        }
        let non_negative = [
            ("kp", self.kp),
            ("kd", self.kd),
            ("contact_damping", self.contact_damping),
            ("friction", self.friction),
            ("tangential_damping", self.tangential_damping),
            ("w_gait", self.w_gait),
            ("w_step", self.w_step),
            ("w_torque", self.w_torque),
            ("w_height", self.w_height),
            ("w_orientation", self.w_orientation),
            ("fall_penalty", self.fall_penalty),
            ("min_swing", self.min_swing),
            ("init_noise", self.init_noise),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(EnvError::InvalidConfig(format!(
                    "walker.{name} must be non-negative, got {v}"
                )));
            }
        }
        if self.substeps == 0 || self.max_steps == 0 {
            return Err(EnvError::InvalidConfig(
                "walker.substeps and walker.max_steps must be positive".into(),
            ));
        }
        if self.stance_split.abs() > self.hip_limit {
            return Err(EnvError::InvalidConfig(
                "walker.stance_split exceeds walker.hip_limit".into(),
            ));
        }
        Ok(())
    }

    fn body(&self) -> BodyModel {
        BodyModel {
            torso_mass: self.torso_mass,
            thigh_mass: self.thigh_mass,
            shank_mass: self.shank_mass,
            torso_length: self.torso_length,
            thigh_length: self.thigh_length,
            shank_length: self.shank_length,
            gravity: self.gravity,
            contact: ContactModel {
                stiffness: self.contact_stiffness,
                damping: self.contact_damping,
                friction: self.friction,
                tangential_stiffness: self.tangential_stiffness,
                tangential_damping: self.tangential_damping,
            },
        }
    }

    pub fn control_dt(&self) -> f64 {
        self.dt_phys * self.substeps as f64
    }

    /// Standing pelvis height: legs straight.
    pub fn standing_height(&self) -> f64 {
        self.thigh_length + self.shank_length
    }

    fn spec(&self) -> EnvSpec {
        let leg = self.standing_height();
        let h0 = leg;
        let gait_max = self.w_gait * 2.0 * leg;
        let step_max = self.w_step * self.max_speed * self.control_dt();
        // Pelvis height stays within [0, leg + torso].
        let height_err = h0.max(leg + self.torso_length - h0);
        EnvSpec {
            name: "walker".into(),
            obs_dim: OBS_DIM,
            act_dim: ACT_DIM,
            action_low: vec![-self.hip_limit, 0.0, -self.hip_limit, 0.0],
            action_high: vec![self.hip_limit, self.knee_max, self.hip_limit, self.knee_max],
            components: vec![
                RewardComponent::new("gait", -gait_max, gait_max),
                RewardComponent::new("step", -step_max, step_max),
                RewardComponent::new("torque", -self.w_torque * 4.0 * self.tau_max, 0.0),
                RewardComponent::new("height", -self.w_height * height_err, 0.0),
                RewardComponent::new(
                    "orientation",
                    -self.w_orientation * std::f64::consts::PI,
                    0.0,
                ),
                RewardComponent::new("fall", -self.fall_penalty, 0.0),
            ],
            control_dt: self.control_dt(),
            max_steps: self.max_steps,
        }
    }

    /// Joint targets of the initial split stance, in action order.
    pub fn stance_targets(&self) -> [f64; ACT_DIM] {
        [self.stance_split, 0.0, -self.stance_split, 0.0]
    }
}

/// Horizontal pelvis force over a window of physics substeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct PushSchedule {
    pub start: u64,
    pub len: u64,
    pub force: f64,
}

/// Per-step quantities the reward terms are computed from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardInputs {
    pub gait_length: Option<f64>,
    pub pelvis_dx: f64,
    /// Mean over substeps of the summed absolute joint torques.
    pub torque_sum: f64,
    pub height: f64,
    pub pitch: f64,
    pub fell: bool,
}

pub fn walker_rewards(cfg: &WalkerConfig, r: &RewardInputs) -> [f64; 6] {
    let h0 = cfg.standing_height();
    [
        r.gait_length.map_or(0.0, |d| cfg.w_gait * d),
        cfg.w_step * r.pelvis_dx,
        -cfg.w_torque * r.torque_sum,
        -cfg.w_height * (r.height - h0).abs(),
        -cfg.w_orientation * r.pitch.abs(),
        if r.fell { -cfg.fall_penalty } else { 0.0 },
    ]
}

#[derive(Debug, Clone)]
pub struct PlanarWalker {
    cfg: WalkerConfig,
    body: BodyModel,
    spec: EnvSpec,
    state: BodyState,
    gait: GaitDetector,
    contacts: [bool; 2],
    steps: usize,
    substep: u64,
    push: Option<PushSchedule>,
    push_substeps: u64,
}

fn wrap_angle(a: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let w = (a + std::f64::consts::PI).rem_euclid(two_pi) - std::f64::consts::PI;
    if w.is_finite() {
        w
    } else {
        a
    }
}

impl PlanarWalker {
    pub fn new(cfg: WalkerConfig) -> Result<Self, EnvError> {
        cfg.validate()?;
        let body = cfg.body();
        let spec = cfg.spec();
        let gait = GaitDetector::new(cfg.min_swing);
        let mut w = Self {
            cfg,
            body,
            spec,
            state: BodyState::at_rest(GenVec::zeros()),
            gait,
            contacts: [false; 2],
            steps: 0,
            substep: 0,
            push: None,
            push_substeps: 0,
        };
        w.reset(0);
        Ok(w)
    }

    pub fn config(&self) -> &WalkerConfig {
        &self.cfg
    }

    pub fn state(&self) -> &BodyState {
        &self.state
    }

    /// Replaces the dynamic state; gait tracking restarts.
    pub fn set_state(&mut self, state: BodyState) {
        self.state = state;
        self.gait.reset();
        self.contacts = self.foot_contacts();
    }

    pub fn mechanical_energy(&self) -> f64 {
        self.body.mechanical_energy(&self.state)
    }

    pub fn foot_positions(&self) -> [(f64, f64); 2] {
        let f = self.body.foot_positions(&self.state.q);
        [(f[0].x, f[0].y), (f[1].x, f[1].y)]
    }

    pub(crate) fn set_push(&mut self, push: Option<PushSchedule>) {
        self.push = push;
    }

    /// Substeps so far this episode during which a push force acted.
    pub fn push_substeps(&self) -> u64 {
        self.push_substeps
    }

    fn foot_contacts(&self) -> [bool; 2] {
        let f = self.body.foot_positions(&self.state.q);
        [f[0].y < 0.0, f[1].y < 0.0]
    }

    fn observe(&self) -> Vec<f64> {
        let q = &self.state.q;
        let qd = &self.state.qd;
        let mut obs = Vec::with_capacity(OBS_DIM);
        obs.extend([wrap_angle(q[PITCH]), qd[PITCH], q[Z], qd[X], qd[Z]]);
        obs.extend(JOINTS.iter().map(|&j| q[j]));
        obs.extend(JOINTS.iter().map(|&j| qd[j]));
        obs.extend(self.contacts.iter().map(|&c| if c { 1.0 } else { 0.0 }));
        obs
    }

    fn push_force(&self) -> f64 {
        match self.push {
            Some(p) if self.substep >= p.start && self.substep < p.start + p.len => p.force,
            _ => 0.0,
        }
    }

    fn pd_torques(&self, targets: &[f64; ACT_DIM]) -> [f64; 4] {
        let mut tau = [0.0; 4];
        for (i, &j) in JOINTS.iter().enumerate() {
            let t = self.cfg.kp * (targets[i] - self.state.q[j]) - self.cfg.kd * self.state.qd[j];
            tau[i] = t.clamp(-self.cfg.tau_max, self.cfg.tau_max);
        }
        tau
    }

    fn diverged(&self, what: &str) -> EnvError {
        EnvError::Diverged(format!(
            "{what} at step {} substep {}: q={:?} qd={:?}",
            self.steps,
            self.substep,
            self.state.q.as_slice(),
            self.state.qd.as_slice()
        ))
    }

    /// Advances one physics substep with explicit joint torques and no PD
    /// control. Returns whether each foot was in contact.
    pub fn step_torques(&mut self, torques: &[f64; 4]) -> Result<[bool; 2], EnvError> {
        let push = self.push_force();
        if push != 0.0 {
            self.push_substeps += 1;
        }
        let feet = self
            .body
            .substep(
                &mut self.state,
                torques,
                push,
                self.cfg.dt_phys,
                self.cfg.energy_projection,
            )
            .ok_or_else(|| self.diverged("singular mass matrix"))?;
        self.substep += 1;
        if !self.state.is_finite() {
            return Err(self.diverged("non-finite state"));
        }
        Ok([feet[0].in_contact, feet[1].in_contact])
    }

    fn clamp_targets(&self, action: &[f64]) -> [f64; ACT_DIM] {
        let c = &self.cfg;
        [
            action[0].clamp(-c.hip_limit, c.hip_limit),
            action[1].clamp(0.0, c.knee_max),
            action[2].clamp(-c.hip_limit, c.hip_limit),
            action[3].clamp(0.0, c.knee_max),
        ]
    }
}

impl Environment for PlanarWalker {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.cfg.init_noise;
        let mut jitter = |lo: f64| if n > 0.0 { rng.gen_range(lo..=n) } else { 0.0 };
        let targets = self.cfg.stance_targets();
        let mut q = GenVec::zeros();
        q[JOINTS[0]] = targets[0] + jitter(-n);
        q[JOINTS[1]] = targets[1] + jitter(0.0);
        q[JOINTS[2]] = targets[2] + jitter(-n);
        q[JOINTS[3]] = targets[3] + jitter(0.0);
        let feet = self.body.foot_positions(&q);
        q[Z] = -feet[0].y.min(feet[1].y);
        self.state = BodyState::at_rest(q);
        self.gait.reset();
        self.contacts = self.foot_contacts();
        self.steps = 0;
        self.substep = 0;
        self.push_substeps = 0;
        self.observe()
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult, EnvError> {
        self.spec.check_action(action)?;
        let targets = self.clamp_targets(action);
        let x0 = self.state.q[X];
        let mut torque_sum = 0.0;
        let mut contacts = self.contacts;
        for _ in 0..self.cfg.substeps {
            let tau = self.pd_torques(&targets);
            torque_sum += tau.iter().map(|t| t.abs()).sum::<f64>();
            contacts = self.step_torques(&tau)?;
        }
        self.contacts = contacts;
        self.steps += 1;

        let feet = self.body.foot_positions(&self.state.q);
        let event = self.gait.update(contacts, [feet[0].x, feet[1].x]);
        let height = self.state.q[Z];
        let pitch = wrap_angle(self.state.q[PITCH]);
        let fell = height < self.cfg.fall_height_fraction * self.cfg.standing_height()
            || pitch.abs() > self.cfg.fall_pitch;
        let inputs = RewardInputs {
            gait_length: event.map(|e| e.length),
            pelvis_dx: self.state.q[X] - x0,
            torque_sum: torque_sum / self.cfg.substeps as f64,
            height,
            pitch,
            fell,
        };
        let reward = walker_rewards(&self.cfg, &inputs).to_vec();

        let mut info = BTreeMap::new();
        info.insert("fell", if fell { 1.0 } else { 0.0 });
        info.insert("gait_event", if event.is_some() { 1.0 } else { 0.0 });
        info.insert("distance", self.state.q[X]);
        info.insert("height", height);
        info.insert("push_substeps", self.push_substeps as f64);
        Ok(StepResult {
            obs: self.observe(),
            reward,
            done: fell,
            truncated: !fell && self.steps >= self.cfg.max_steps,
            info,
        })
    }
}
