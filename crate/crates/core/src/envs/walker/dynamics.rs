//! Planar five-link biped in generalized coordinates.
//!
//! `q = [x, z, pitch, hip_l, knee_l, hip_r, knee_r]` where `(x, z)` is the
//! pelvis (hip joint) position, `pitch` the torso angle and the rest relative
//! joint angles. Absolute link angles are linear in `q`:
//! thigh = pitch + hip, shank = pitch + hip - knee. A link at absolute angle
//! `a` points along `d(a) = (sin a, -cos a)`, so zero angles mean legs hanging
//! straight down and the torso straight up.
//!
//! Equations of motion `M(q) qdd = f(q, qd)` are assembled from per-link
//! point Jacobians (Kane's method), with the velocity-product terms coming
//! from the centripetal acceleration of each segment.

use nalgebra::{SMatrix, SVector, Vector2};

pub const DOF: usize = 7;
pub const X: usize = 0;
pub const Z: usize = 1;
pub const PITCH: usize = 2;
pub const HIP_L: usize = 3;
pub const KNEE_L: usize = 4;
pub const HIP_R: usize = 5;
pub const KNEE_R: usize = 6;
/// Actuated coordinates in action order.
pub const JOINTS: [usize; 4] = [HIP_L, KNEE_L, HIP_R, KNEE_R];

pub type GenVec = SVector<f64, DOF>;
pub type MassMatrix = SMatrix<f64, DOF, DOF>;
type PointJacobian = SMatrix<f64, 2, DOF>;

const TORSO: usize = 0;
const THIGH_L: usize = 1;
const SHANK_L: usize = 2;
const THIGH_R: usize = 3;
const SHANK_R: usize = 4;
const LINKS: usize = 5;

/// d(absolute link angle) / dq for each link.
const ANGLE_COEFF: [[f64; DOF]; LINKS] = [
    [0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 1.0, -1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0, 0.0, 0.0, 1.0, -1.0],
];

/// A point reached from the pelvis by up to two signed segment lengths.
#[derive(Debug, Clone, Copy)]
struct Chain {
    segs: [(f64, usize); 2],
    n: usize,
}

impl Chain {
    fn one(len: f64, link: usize) -> Self {
        Self {
            segs: [(len, link), (0.0, link)],
            n: 1,
        }
    }

    fn two(l0: f64, k0: usize, l1: f64, k1: usize) -> Self {
        Self {
            segs: [(l0, k0), (l1, k1)],
            n: 2,
        }
    }

    fn segments(&self) -> &[(f64, usize)] {
        &self.segs[..self.n]
    }
}

#[inline]
fn dir(a: f64) -> Vector2<f64> {
    Vector2::new(a.sin(), -a.cos())
}

#[inline]
fn dir_prime(a: f64) -> Vector2<f64> {
    Vector2::new(a.cos(), a.sin())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContactModel {
    pub stiffness: f64,
    pub damping: f64,
    pub friction: f64,
    /// Stiffness of the spring tying a grounded foot to its anchor point.
    pub tangential_stiffness: f64,
    pub tangential_damping: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BodyModel {
    pub torso_mass: f64,
    pub thigh_mass: f64,
    pub shank_mass: f64,
    pub torso_length: f64,
    pub thigh_length: f64,
    pub shank_length: f64,
    pub gravity: f64,
    pub contact: ContactModel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyState {
    pub q: GenVec,
    pub qd: GenVec,
    /// Ground anchor x of each foot while it stays in contact.
    pub anchors: [Option<f64>; 2],
}

impl BodyState {
    pub fn at_rest(q: GenVec) -> Self {
        Self {
            q,
            qd: GenVec::zeros(),
            anchors: [None; 2],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(self.qd.iter()).all(|v| v.is_finite())
    }
}

/// Everything the integrator needs at one configuration.
struct Eval {
    mass: MassMatrix,
    com_jac: [PointJacobian; LINKS],
    com_bias: [Vector2<f64>; LINKS],
    com_z: [f64; LINKS],
    foot_pos: [Vector2<f64>; 2],
    foot_jac: [PointJacobian; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FootContact {
    pub position: Vector2<f64>,
    pub velocity: Vector2<f64>,
    pub force: Vector2<f64>,
    pub in_contact: bool,
}

impl BodyModel {
    fn masses(&self) -> [f64; LINKS] {
        [
            self.torso_mass,
            self.thigh_mass,
            self.shank_mass,
            self.thigh_mass,
            self.shank_mass,
        ]
    }

    /// Uniform-rod inertias about each link's centre of mass.
    fn inertias(&self) -> [f64; LINKS] {
        let rod = |m: f64, l: f64| m * l * l / 12.0;
        [
            rod(self.torso_mass, self.torso_length),
            rod(self.thigh_mass, self.thigh_length),
            rod(self.shank_mass, self.shank_length),
            rod(self.thigh_mass, self.thigh_length),
            rod(self.shank_mass, self.shank_length),
        ]
    }

    fn com_chains(&self) -> [Chain; LINKS] {
        let (l1, l2) = (self.thigh_length, self.shank_length);
        [
            // Torso points up: negative length along the downward direction.
            Chain::one(-0.5 * self.torso_length, TORSO),
            Chain::one(0.5 * l1, THIGH_L),
            Chain::two(l1, THIGH_L, 0.5 * l2, SHANK_L),
            Chain::one(0.5 * l1, THIGH_R),
            Chain::two(l1, THIGH_R, 0.5 * l2, SHANK_R),
        ]
    }

    fn foot_chains(&self) -> [Chain; 2] {
        let (l1, l2) = (self.thigh_length, self.shank_length);
        [
            Chain::two(l1, THIGH_L, l2, SHANK_L),
            Chain::two(l1, THIGH_R, l2, SHANK_R),
        ]
    }

    pub fn leg_length(&self) -> f64 {
        self.thigh_length + self.shank_length
    }

    pub fn total_mass(&self) -> f64 {
        self.masses().iter().sum()
    }

    fn link_angles(q: &GenVec) -> [f64; LINKS] {
        let mut out = [0.0; LINKS];
        for (a, c) in out.iter_mut().zip(&ANGLE_COEFF) {
            *a = c.iter().zip(q.iter()).map(|(c, q)| c * q).sum();
        }
        out
    }

    fn position(q: &GenVec, angles: &[f64; LINKS], chain: &Chain) -> Vector2<f64> {
        let mut p = Vector2::new(q[X], q[Z]);
        for &(len, link) in chain.segments() {
            p += dir(angles[link]) * len;
        }
        p
    }

    fn jacobian(angles: &[f64; LINKS], chain: &Chain) -> PointJacobian {
        let mut j = PointJacobian::zeros();
        j[(0, X)] = 1.0;
        j[(1, Z)] = 1.0;
        for &(len, link) in chain.segments() {
            let dp = dir_prime(angles[link]) * len;
            for (col, &c) in ANGLE_COEFF[link].iter().enumerate().skip(PITCH) {
                if c != 0.0 {
                    j[(0, col)] += dp.x * c;
                    j[(1, col)] += dp.y * c;
                }
            }
        }
        j
    }

    /// `Jdot * qd` for a point: sum of segment centripetal accelerations.
    fn bias(angles: &[f64; LINKS], omegas: &[f64; LINKS], chain: &Chain) -> Vector2<f64> {
        let mut b = Vector2::zeros();
        for &(len, link) in chain.segments() {
            b -= dir(angles[link]) * (len * omegas[link] * omegas[link]);
        }
        b
    }

    fn evaluate(&self, s: &BodyState) -> Eval {
        let angles = Self::link_angles(&s.q);
        let omegas = Self::link_angles(&s.qd);
        let masses = self.masses();
        let inertias = self.inertias();
        let chains = self.com_chains();

        let mut mass = MassMatrix::zeros();
        let mut com_jac = [PointJacobian::zeros(); LINKS];
        let mut com_bias = [Vector2::zeros(); LINKS];
        let mut com_z = [0.0; LINKS];
        for i in 0..LINKS {
            let j = Self::jacobian(&angles, &chains[i]);
            mass += j.transpose() * j * masses[i];
            let c = SVector::<f64, DOF>::from_row_slice(&ANGLE_COEFF[i]);
            mass += c * c.transpose() * inertias[i];
            com_jac[i] = j;
            com_bias[i] = Self::bias(&angles, &omegas, &chains[i]);
            com_z[i] = Self::position(&s.q, &angles, &chains[i]).y;
        }
        let feet = self.foot_chains();
        Eval {
            mass,
            com_jac,
            com_bias,
            com_z,
            foot_pos: [
                Self::position(&s.q, &angles, &feet[0]),
                Self::position(&s.q, &angles, &feet[1]),
            ],
            foot_jac: [
                Self::jacobian(&angles, &feet[0]),
                Self::jacobian(&angles, &feet[1]),
            ],
        }
    }

    fn energy_of(&self, e: &Eval, s: &BodyState) -> f64 {
        let kinetic = 0.5 * s.qd.dot(&(e.mass * s.qd));
        let gravity: f64 = self
            .masses()
            .iter()
            .zip(&e.com_z)
            .map(|(m, z)| m * self.gravity * z)
            .sum();
        let c = &self.contact;
        let spring: f64 = e
            .foot_pos
            .iter()
            .zip(&s.anchors)
            .map(|(p, anchor)| {
                let pen = (-p.y).max(0.0);
                let slide = match anchor {
                    Some(x) if pen > 0.0 => p.x - x,
                    _ => 0.0,
                };
                0.5 * (c.stiffness * pen * pen + c.tangential_stiffness * slide * slide)
            })
            .sum();
        kinetic + gravity + spring
    }

    /// Kinetic + gravitational + contact-spring energy (normal and
    /// tangential).
    pub fn mechanical_energy(&self, s: &BodyState) -> f64 {
        self.energy_of(&self.evaluate(s), s)
    }

    pub fn kinetic_energy(&self, s: &BodyState) -> f64 {
        let e = self.evaluate(s);
        0.5 * s.qd.dot(&(e.mass * s.qd))
    }

    pub fn foot_positions(&self, q: &GenVec) -> [Vector2<f64>; 2] {
        let angles = Self::link_angles(q);
        let feet = self.foot_chains();
        [
            Self::position(q, &angles, &feet[0]),
            Self::position(q, &angles, &feet[1]),
        ]
    }

    pub fn center_of_mass(&self, q: &GenVec) -> Vector2<f64> {
        let angles = Self::link_angles(q);
        let masses = self.masses();
        let chains = self.com_chains();
        let total: f64 = masses.iter().sum();
        chains
            .iter()
            .zip(&masses)
            .map(|(c, m)| Self::position(q, &angles, c) * *m)
            .sum::<Vector2<f64>>()
            / total
    }

    /// Penalty normal force and stick-slip tangential force. The anchor is
    /// placed at touchdown and dragged along whenever the tangential force
    /// would exceed the friction cone.
    fn contact_force(
        &self,
        pos: Vector2<f64>,
        vel: Vector2<f64>,
        anchor: &mut Option<f64>,
    ) -> (Vector2<f64>, bool) {
        let pen = -pos.y;
        if pen <= 0.0 {
            *anchor = None;
            return (Vector2::zeros(), false);
        }
        let c = &self.contact;
        let normal = (c.stiffness * pen - c.damping * vel.y).max(0.0);
        let cap = c.friction * normal;
        let x0 = *anchor.get_or_insert(pos.x);
        let spring = -c.tangential_stiffness * (pos.x - x0);
        let spring = if spring.abs() > cap {
            let clipped = spring.signum() * cap;
            *anchor = Some(pos.x + clipped / c.tangential_stiffness);
            clipped
        } else {
            spring
        };
        let tangential = (spring - c.tangential_damping * vel.x).clamp(-cap, cap);
        (Vector2::new(tangential, normal), true)
    }

    /// Advances one semi-implicit Euler step.
    ///
    /// `joint_torques` act on [`JOINTS`]; `push` is a horizontal force on
    /// the pelvis. With `energy_projection`, velocities are scaled back
    /// whenever the step would end with more mechanical energy than it began
    /// with plus the work done by the joint torques and the push.
    pub fn substep(
        &self,
        s: &mut BodyState,
        joint_torques: &[f64; 4],
        push: f64,
        dt: f64,
        energy_projection: bool,
    ) -> Option<[FootContact; 2]> {
        let e = self.evaluate(s);
        let masses = self.masses();

        let g = Vector2::new(0.0, -self.gravity);
        let mut f = GenVec::zeros();
        for i in 0..LINKS {
            f += e.com_jac[i].transpose() * ((g - e.com_bias[i]) * masses[i]);
        }
        for (&j, &tau) in JOINTS.iter().zip(joint_torques) {
            f[j] += tau;
        }
        f[X] += push;

        let mut feet = [FootContact {
            position: Vector2::zeros(),
            velocity: Vector2::zeros(),
            force: Vector2::zeros(),
            in_contact: false,
        }; 2];
        for (k, foot) in feet.iter_mut().enumerate() {
            let vel = e.foot_jac[k] * s.qd;
            let (force, touching) = self.contact_force(e.foot_pos[k], vel, &mut s.anchors[k]);
            f += e.foot_jac[k].transpose() * force;
            *foot = FootContact {
                position: e.foot_pos[k],
                velocity: vel,
                force,
                in_contact: touching,
            };
        }

        let qdd = e.mass.cholesky()?.solve(&f);
        let q_old = s.q;
        let energy_old = if energy_projection {
            self.energy_of(&e, s)
        } else {
            0.0
        };

        s.qd += qdd * dt;
        s.q += s.qd * dt;

        if energy_projection {
            let work: f64 = JOINTS
                .iter()
                .zip(joint_torques)
                .map(|(&j, tau)| tau * (s.q[j] - q_old[j]))
                .sum::<f64>()
                + push * (s.q[X] - q_old[X]);
            let budget = energy_old + work;
            let e_new = self.evaluate(s);
            let total = self.energy_of(&e_new, s);
            if total > budget {
                let kinetic = 0.5 * s.qd.dot(&(e_new.mass * s.qd));
                let excess = total - budget;
                if kinetic > excess {
                    s.qd *= ((kinetic - excess) / kinetic).sqrt();
                } else {
                    s.qd = GenVec::zeros();
                }
            }
        }
        Some(feet)
    }
}
