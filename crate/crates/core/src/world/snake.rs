//! Planar dynamics of the wheeled snake.
//!
//! The chain is integrated in reduced coordinates
//! `q = [x_head, y_head, θ_head, φ_1 .. φ_8]`, where `φ_j` is the relative
//! angle between link `j-1` and link `j` (link 0 is the head). Revolute joints
//! therefore hold exactly by construction. Wheels are modelled as an
//! anisotropic viscous drag on every link.
//!
//! One substep:
//!
//! 1. implicit damping + implicit PD servo solve for the new velocity,
//!    saturated joints switched to a constant clamped torque;
//! 2. position update;
//! 3. Gauss-Seidel projection of contacts and the head-joint stop;
//! 4. re-projection of the pre-step link velocities onto the new
//!    configuration (non-expansive, so energy never grows);
//! 5. inelastic velocity projection on active contacts.

use std::collections::BTreeSet;

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::arena::{Arena, ArenaError, BodyId, Shape};
use super::geometry::{disc_vs_circle, disc_vs_rect, heading, perp, Vec2};
use crate::config::{config_keys, ConfigError};

pub const JOINTS: usize = 8;
pub const LINKS: usize = JOINTS + 1;
pub const DOF: usize = 3 + JOINTS;

type Mat = SMatrix<f64, DOF, DOF>;
type Vect = SVector<f64, DOF>;
type Row = SMatrix<f64, 1, DOF>;
type Jac = SMatrix<f64, 2, DOF>;

/// Contact enters at this gap and only leaves beyond `CONTACT_EXIT`.
pub const CONTACT_ENTER: f64 = 1e-4;
pub const CONTACT_EXIT: f64 = 5e-3;
const DISCS_PER_LINK: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobotSpec {
    pub link_length: f64,
    pub link_width: f64,
    pub link_mass: f64,
    pub wheel_radius: f64,
    pub wheel_mass: f64,
    pub yaw_limit_deg: f64,
}

impl Default for RobotSpec {
    fn default() -> Self {
        Self {
            link_length: 0.1,
            link_width: 0.05,
            link_mass: 0.3,
            wheel_radius: 0.03,
            wheel_mass: 0.01,
            yaw_limit_deg: 45.0,
        }
    }
}

config_keys!(RobotSpec { link_length, link_width, link_mass, wheel_radius, wheel_mass, yaw_limit_deg });

impl RobotSpec {
    pub fn yaw_limit(&self) -> f64 {
        self.yaw_limit_deg.to_radians()
    }

    /// Link body plus its wheel pair.
    pub fn mass(&self) -> f64 {
        self.link_mass + 2.0 * self.wheel_mass
    }

    pub fn inertia(&self) -> f64 {
        let (l, w) = (self.link_length, self.link_width);
        self.mass() * (l * l + w * w) / 12.0
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("link_length", self.link_length),
            ("link_width", self.link_width),
            ("link_mass", self.link_mass),
            ("yaw_limit_deg", self.yaw_limit_deg),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(key, v, "must be positive"));
            }
        }
        if !(self.wheel_mass >= 0.0 && self.wheel_radius >= 0.0) {
            return Err(invalid("wheel_mass", self.wheel_mass, "must be non-negative"));
        }
        if self.yaw_limit_deg > 180.0 {
            return Err(invalid("yaw_limit_deg", self.yaw_limit_deg, "must be at most 180"));
        }
        Ok(())
    }
}

pub(crate) fn invalid(key: &str, v: impl ToString, reason: &str) -> ConfigError {
    ConfigError::InvalidValue {
        key: key.to_string(),
        value: v.to_string(),
        reason: reason.to_string(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicsConfig {
    pub servo_kp: f64,
    pub servo_kd: f64,
    pub torque_limit: f64,
    pub friction_longitudinal: f64,
    pub friction_lateral: f64,
    pub substeps: usize,
    pub contact_iterations: usize,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self {
            servo_kp: 2.0,
            servo_kd: 0.1,
            torque_limit: 0.2,
            friction_longitudinal: 0.1,
            friction_lateral: 10.0,
            substeps: 8,
            contact_iterations: 4,
        }
    }
}

config_keys!(PhysicsConfig {
    servo_kp,
    servo_kd,
    torque_limit,
    friction_longitudinal,
    friction_lateral,
    substeps,
    contact_iterations,
});

impl PhysicsConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let non_negative = [
            ("servo_kp", self.servo_kp),
            ("servo_kd", self.servo_kd),
            ("torque_limit", self.torque_limit),
            ("friction_longitudinal", self.friction_longitudinal),
            ("friction_lateral", self.friction_lateral),
        ];
        for (key, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(key, v, "must be non-negative"));
            }
        }
        if self.substeps == 0 {
            return Err(invalid("substeps", 0, "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("non-finite state at t = {time:.4} s")]
    Diverged { time: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

/// Generalized state of the chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnakeState {
    pub q: [f64; DOF],
    pub qd: [f64; DOF],
    pub time: f64,
}

impl SnakeState {
    pub fn head_pose(&self) -> Pose {
        Pose { x: self.q[0], y: self.q[1], theta: self.q[2] }
    }

    pub fn joint_angles(&self) -> [f64; JOINTS] {
        std::array::from_fn(|j| self.q[3 + j])
    }

    pub fn joint_rates(&self) -> [f64; JOINTS] {
        std::array::from_fn(|j| self.qd[3 + j])
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(&self.qd).all(|v| v.is_finite())
    }
}

/// Forward kinematics of one configuration.
#[derive(Clone, Debug)]
pub struct Kinematics {
    pub theta: [f64; LINKS],
    /// Unit vector from tail end to head end of each link.
    pub dir: [Vec2; LINKS],
    pub center: [Vec2; LINKS],
    /// `anchor[j]` joins link `j-1` and link `j`; `anchor[0]` is unused.
    pub anchor: [Vec2; LINKS],
}

impl Kinematics {
    pub fn new(q: &[f64; DOF], half_length: f64) -> Self {
        let mut theta = [0.0; LINKS];
        let mut dir = [Vec2::zeros(); LINKS];
        let mut center = [Vec2::zeros(); LINKS];
        let mut anchor = [Vec2::zeros(); LINKS];
        theta[0] = q[2];
        dir[0] = heading(theta[0]);
        center[0] = Vec2::new(q[0], q[1]);
        for i in 1..LINKS {
            anchor[i] = center[i - 1] - dir[i - 1] * half_length;
            theta[i] = theta[i - 1] + q[2 + i];
            dir[i] = heading(theta[i]);
            center[i] = anchor[i] - dir[i] * half_length;
        }
        Self { theta, dir, center, anchor }
    }

    /// Velocity Jacobian of world point `r` rigidly attached to `link`.
    fn point_jacobian(&self, link: usize, r: Vec2) -> Jac {
        let mut j = Jac::zeros();
        j[(0, 0)] = 1.0;
        j[(1, 1)] = 1.0;
        let d = perp(r - self.center[0]);
        j[(0, 2)] = d.x;
        j[(1, 2)] = d.y;
        for k in 1..=link {
            let d = perp(r - self.anchor[k]);
            j[(0, 2 + k)] = d.x;
            j[(1, 2 + k)] = d.y;
        }
        j
    }

    fn columns(&self) -> Columns {
        let mut cols = [[Vec2::zeros(); DOF]; LINKS];
        for (i, col) in cols.iter_mut().enumerate() {
            let c = self.center[i];
            col[0] = Vec2::new(1.0, 0.0);
            col[1] = Vec2::new(0.0, 1.0);
            col[2] = perp(c - self.center[0]);
            for k in 1..=i {
                col[2 + k] = perp(c - self.anchor[k]);
            }
        }
        cols
    }

    /// Collision disc centres of `link`.
    fn discs(&self, link: usize, half_length: f64) -> [Vec2; DISCS_PER_LINK] {
        let e = self.dir[link];
        let s = half_length / 2.0;
        [self.center[link] + e * s, self.center[link], self.center[link] - e * s]
    }
}

/// Closest approach between one link and one body.
#[derive(Clone, Copy, Debug)]
struct Proximity {
    gap: f64,
    normal: Vec2,
    point: Vec2,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub collision_started: bool,
    /// `(link, body)` pairs whose contact began this step.
    pub new_contacts: Vec<(u8, BodyId)>,
    pub colliding_bodies: Vec<BodyId>,
    /// Mean servo torque over the substeps, N·m.
    pub joint_torques: [f64; JOINTS],
    pub head_pose: Pose,
}

/// One snake in one arena.
#[derive(Clone, Debug)]
pub struct World {
    pub arena: Arena,
    pub spec: RobotSpec,
    pub physics: PhysicsConfig,
    pub state: SnakeState,
    contacts: BTreeSet<(u8, BodyId)>,
    collision_count: usize,
    /// Bodies within reach of the snake during the current control step.
    nearby: Vec<BodyId>,
    /// Kinematics and mass matrix of the configuration they were computed for.
    cache: Option<([f64; DOF], Box<(Kinematics, Mat)>)>,
}

impl World {
    /// Straight chain along +y with the head centre on the arena spawn.
    pub fn spawn(arena: Arena, spec: RobotSpec, physics: PhysicsConfig) -> Result<Self, ArenaError> {
        let mut q = [0.0; DOF];
        q[0] = arena.spawn.x;
        q[1] = arena.spawn.y;
        q[2] = std::f64::consts::FRAC_PI_2;
        let mut world = Self {
            arena,
            spec,
            physics,
            state: SnakeState { q, qd: [0.0; DOF], time: 0.0 },
            contacts: BTreeSet::new(),
            collision_count: 0,
            nearby: Vec::new(),
            cache: None,
        };
        world.refresh_nearby(0.0);
        let kin = world.kinematics();
        for link in 0..LINKS {
            for (body, _) in world.candidates(&kin, link) {
                if world.proximity(&kin, link, body).gap <= CONTACT_ENTER {
                    return Err(ArenaError::SpawnBlocked(body));
                }
            }
        }
        Ok(world)
    }

    pub fn kinematics(&self) -> Kinematics {
        Kinematics::new(&self.state.q, self.half_length())
    }

    fn half_length(&self) -> f64 {
        self.spec.link_length / 2.0
    }

    fn disc_radius(&self) -> f64 {
        self.spec.link_width / 2.0
    }

    pub fn collision_count(&self) -> usize {
        self.collision_count
    }

    pub fn active_contacts(&self) -> impl Iterator<Item = &(u8, BodyId)> {
        self.contacts.iter()
    }

    /// Per-link world poses.
    pub fn link_poses(&self) -> [Pose; LINKS] {
        let k = self.kinematics();
        std::array::from_fn(|i| Pose { x: k.center[i].x, y: k.center[i].y, theta: k.theta[i] })
    }

    /// Per-link linear and angular velocity.
    pub fn link_velocities(&self) -> [(Vec2, f64); LINKS] {
        let kin = self.kinematics();
        link_velocities(&kin.columns(), &self.state.qd)
    }

    pub fn kinetic_energy(&self) -> f64 {
        let (m, inertia) = (self.spec.mass(), self.spec.inertia());
        self.link_velocities()
            .iter()
            .map(|(v, w)| 0.5 * m * v.norm_squared() + 0.5 * inertia * w * w)
            .sum()
    }

    fn mass_matrix(&self, cols: &Columns) -> Mat {
        let (m, inertia) = (self.spec.mass(), self.spec.inertia());
        let mut out = Mat::zeros();
        for (i, c) in cols.iter().enumerate() {
            let n = 3 + i;
            for a in 0..n {
                for b in a..n {
                    let rot = if a >= 2 { inertia } else { 0.0 };
                    out[(a, b)] += m * c[a].dot(&c[b]) + rot;
                }
            }
        }
        out.fill_lower_triangle_with_upper_triangle();
        out
    }

    fn damping_matrix(&self, kin: &Kinematics, cols: &Columns) -> Mat {
        let p = &self.physics;
        let l = self.spec.link_length;
        let rot = p.friction_lateral * l * l / 12.0;
        let mut out = Mat::zeros();
        for (i, c) in cols.iter().enumerate() {
            let n = 3 + i;
            let e = kin.dir[i];
            let t = perp(e);
            let along: [f64; DOF] = std::array::from_fn(|a| if a < n { e.dot(&c[a]) } else { 0.0 });
            let across: [f64; DOF] = std::array::from_fn(|a| if a < n { t.dot(&c[a]) } else { 0.0 });
            for a in 0..n {
                for b in a..n {
                    let spin = if a >= 2 { rot } else { 0.0 };
                    out[(a, b)] += p.friction_longitudinal * along[a] * along[b]
                        + p.friction_lateral * across[a] * across[b]
                        + spin;
                }
            }
        }
        out.fill_lower_triangle_with_upper_triangle();
        out
    }

    fn link_reach(&self) -> f64 {
        self.half_length() + self.disc_radius() + 2.0 * CONTACT_EXIT
    }

    /// Broad phase: bodies the snake could touch within `travel` metres of motion.
    /// The beacon is never included (it is not physical).
    fn refresh_nearby(&mut self, travel: f64) {
        let head = Vec2::new(self.state.q[0], self.state.q[1]);
        let reach = LINKS as f64 * self.spec.link_length + self.link_reach() + travel;
        let beacon = self.arena.beacon_id();
        self.nearby = self
            .arena
            .bodies()
            .filter(|(id, shape)| *id != beacon && shape_distance(shape, head) < reach)
            .map(|(id, _)| id)
            .collect();
    }

    /// Bodies within contact reach of `link`.
    fn candidates<'a>(&'a self, kin: &Kinematics, link: usize) -> impl Iterator<Item = (BodyId, Shape)> + 'a {
        let c = kin.center[link];
        let reach = self.link_reach();
        self.nearby.iter().filter_map(move |&id| {
            let shape = self.arena.shape(id);
            (shape_distance(&shape, c) < reach).then_some((id, shape))
        })
    }

    /// All `(link, body)` pairs within contact reach.
    fn near_pairs(&self, kin: &Kinematics) -> Vec<(usize, BodyId)> {
        let mut out = Vec::new();
        for link in 0..LINKS {
            out.extend(self.candidates(kin, link).map(|(b, _)| (link, b)));
        }
        out
    }

    fn proximity(&self, kin: &Kinematics, link: usize, body: BodyId) -> Proximity {
        let radius = self.disc_radius();
        let shape = self.arena.shape(body);
        kin.discs(link, self.half_length())
            .into_iter()
            .map(|p| {
                let pen = match shape {
                    Shape::Rect(r) => disc_vs_rect(p, radius, &r),
                    Shape::Circle(c) => disc_vs_circle(p, radius, &c),
                };
                Proximity { gap: pen.gap, normal: pen.normal, point: p - pen.normal * radius }
            })
            .min_by(|a, b| a.gap.total_cmp(&b.gap))
            .expect("discs")
    }

    fn contact_row(kin: &Kinematics, link: usize, prox: &Proximity) -> Row {
        prox.normal.transpose() * kin.point_jacobian(link, prox.point)
    }

    fn joint_row() -> Row {
        let mut r = Row::zeros();
        r[3] = 1.0;
        r
    }

    /// Advances one control period; `targets` are joint angle set-points.
    pub fn step(&mut self, targets: &[f64; JOINTS], dt: f64) -> Result<StepOutcome, SimError> {
        let n = self.physics.substeps;
        let h = dt / n as f64;
        let speed = self.state.qd[..2].iter().map(|v| v * v).sum::<f64>().sqrt();
        self.refresh_nearby(0.5 + 4.0 * speed * dt);
        let mut torque_sum = [0.0; JOINTS];
        let mut new_contacts = Vec::new();
        for _ in 0..n {
            let tau = self.substep(targets, h, &mut new_contacts);
            for (s, t) in torque_sum.iter_mut().zip(tau) {
                *s += t;
            }
            self.state.time += h;
            if !self.state.is_finite() {
                return Err(SimError::Diverged { time: self.state.time });
            }
        }
        self.collision_count += new_contacts.len();
        let mut colliding: Vec<BodyId> = self.contacts.iter().map(|&(_, b)| b).collect();
        colliding.sort();
        colliding.dedup();
        Ok(StepOutcome {
            collision_started: !new_contacts.is_empty(),
            new_contacts,
            colliding_bodies: colliding,
            joint_torques: torque_sum.map(|s| s / n as f64),
            head_pose: self.state.head_pose(),
        })
    }

    /// Implicit PD with an active set: joints whose torque would exceed the
    /// limit are re-solved with the clamped torque held constant.
    fn servo_solve(&self, base: &Mat, momentum: &Vect, targets: &[f64; JOINTS], h: f64) -> (Vect, [f64; JOINTS]) {
        let p = &self.physics;
        let mut saturated: [Option<f64>; JOINTS] = [None; JOINTS];
        loop {
            let mut a = *base;
            let mut rhs = *momentum;
            for j in 0..JOINTS {
                let k = 3 + j;
                match saturated[j] {
                    Some(t) => rhs[k] += h * t,
                    None => {
                        a[(k, k)] += h * (p.servo_kp * h + p.servo_kd);
                        rhs[k] += h * p.servo_kp * (targets[j] - self.state.q[k]);
                    }
                }
            }
            let Some(chol) = Factor::new(&a) else {
                return (Vect::from_element(f64::NAN), [0.0; JOINTS]);
            };
            let qd = chol.solve(&rhs);
            let mut tau = [0.0; JOINTS];
            let mut changed = false;
            for j in 0..JOINTS {
                let k = 3 + j;
                tau[j] = match saturated[j] {
                    Some(t) => t,
                    None => {
                        let t = p.servo_kp * (targets[j] - self.state.q[k] - h * qd[k]) - p.servo_kd * qd[k];
                        if t.abs() > p.torque_limit {
                            saturated[j] = Some(t.clamp(-p.torque_limit, p.torque_limit));
                            changed = true;
                        }
                        t
                    }
                };
            }
            if !changed {
                return (qd, tau);
            }
        }
    }

    fn substep(&mut self, targets: &[f64; JOINTS], h: f64, started: &mut Vec<(u8, BodyId)>) -> [f64; JOINTS] {
        let (kin, m) = match self.cache.take() {
            Some((q, kin_m)) if q == self.state.q => *kin_m,
            _ => {
                let kin = self.kinematics();
                let m = self.mass_matrix(&kin.columns());
                (kin, m)
            }
        };
        let cols = kin.columns();
        let base = m + self.damping_matrix(&kin, &cols) * h;
        let momentum = m * Vect::from_column_slice(&self.state.qd);
        let (qd, tau) = self.servo_solve(&base, &momentum, targets, h);

        // Link-space velocities before the configuration moves.
        let link_vel = link_velocities(&cols, qd.as_slice());

        for (q, v) in self.state.q.iter_mut().zip(qd.iter()) {
            *q += h * v;
        }
        if !self.state.is_finite() {
            self.state.qd.copy_from_slice(qd.as_slice());
            return tau;
        }

        let mut kin = self.kinematics();
        let mut near = self.near_pairs(&kin);
        let limit = self.spec.yaw_limit();
        if !near.is_empty() || self.state.q[3].abs() > limit {
            self.project_positions(&m, &near);
            kin = self.kinematics();
            near = self.near_pairs(&kin);
        }

        let cols = kin.columns();
        let m = self.mass_matrix(&cols);
        let (mass, inertia) = (self.spec.mass(), self.spec.inertia());
        let mut rhs = Vect::zeros();
        for (i, (c, (v, w))) in cols.iter().zip(&link_vel).enumerate() {
            for a in 0..3 + i {
                rhs[a] += mass * c[a].dot(v) + if a >= 2 { inertia * w } else { 0.0 };
            }
        }
        let Some(chol) = Factor::new(&m) else {
            self.state.qd = [f64::NAN; DOF];
            return tau;
        };
        let mut qd = chol.solve(&rhs);

        // Inelastic velocity projection on everything touching.
        let mut rows: Vec<Row> = Vec::new();
        if self.state.q[3].abs() >= limit - 1e-12 {
            rows.push(Self::joint_row() * -self.state.q[3].signum());
        }
        let mut touching: Vec<((u8, BodyId), f64)> = Vec::with_capacity(near.len());
        for &(link, body) in &near {
            let prox = self.proximity(&kin, link, body);
            touching.push(((link as u8, body), prox.gap));
            if prox.gap <= CONTACT_ENTER {
                rows.push(Self::contact_row(&kin, link, &prox));
            }
        }
        if !rows.is_empty() {
            let solved: Vec<(Row, Vect, f64)> = rows
                .into_iter()
                .map(|g| {
                    let w = chol.solve(&g.transpose());
                    let denom = (g * w)[0];
                    (g, w, denom)
                })
                .collect();
            for _ in 0..self.physics.contact_iterations.max(1) {
                for (g, w, denom) in &solved {
                    let vn = (g * qd)[0];
                    if vn < 0.0 && *denom > 0.0 {
                        qd += w * (-vn / denom);
                    }
                }
            }
        }
        self.state.qd.copy_from_slice(qd.as_slice());
        self.cache = Some((self.state.q, Box::new((kin, m))));

        // Debounced contact bookkeeping.
        self.contacts
            .retain(|key| touching.iter().any(|(k, gap)| k == key && *gap <= CONTACT_EXIT));
        for (key, gap) in touching {
            if gap <= CONTACT_ENTER && self.contacts.insert(key) {
                started.push(key);
            }
        }
        tau
    }

    /// Pushes links out of bodies and enforces the head-joint stop.
    fn project_positions(&mut self, m: &Mat, near: &[(usize, BodyId)]) {
        let Some(chol) = Factor::new(m) else { return };
        let limit = self.spec.yaw_limit();
        for _ in 0..self.physics.contact_iterations.max(1) {
            let mut moved = false;
            let over = self.state.q[3].abs() - limit;
            if over > 0.0 {
                let g = Self::joint_row() * -self.state.q[3].signum();
                self.apply_position_fix(&chol, &g, over);
                self.state.q[3] = self.state.q[3].clamp(-limit, limit);
                moved = true;
            }
            for &(link, body) in near {
                let kin = self.kinematics();
                let prox = self.proximity(&kin, link, body);
                if prox.gap < 0.0 {
                    let g = Self::contact_row(&kin, link, &prox);
                    self.apply_position_fix(&chol, &g, -prox.gap);
                    moved = true;
                }
            }
            if !moved {
                break;
            }
        }
    }

    fn apply_position_fix(&mut self, chol: &Factor, g: &Row, depth: f64) {
        let w = chol.solve(&g.transpose());
        let denom = (g * w)[0];
        if denom <= 0.0 {
            return;
        }
        let dq = w * (depth / denom);
        for (q, d) in self.state.q.iter_mut().zip(dq.iter()) {
            *q += d;
        }
    }
}

/// Cholesky factor of a small symmetric positive-definite matrix. Fixed
/// size and fully unrolled by the compiler; several times faster than the
/// generic decomposition at this dimension.
#[derive(Clone, Debug)]
struct Factor {
    l: [[f64; DOF]; DOF],
}

impl Factor {
    fn new(a: &Mat) -> Option<Self> {
        let mut l = [[0.0; DOF]; DOF];
        for j in 0..DOF {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[j][k] * l[j][k];
            }
            if !(d > 0.0) {
                return None;
            }
            let d = d.sqrt();
            l[j][j] = d;
            for i in j + 1..DOF {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[i][k] * l[j][k];
                }
                l[i][j] = s / d;
            }
        }
        Some(Self { l })
    }

    fn solve(&self, b: &Vect) -> Vect {
        let l = &self.l;
        let mut y = [0.0; DOF];
        for i in 0..DOF {
            let mut s = b[i];
            for k in 0..i {
                s -= l[i][k] * y[k];
            }
            y[i] = s / l[i][i];
        }
        for i in (0..DOF).rev() {
            let mut s = y[i];
            for k in i + 1..DOF {
                s -= l[k][i] * y[k];
            }
            y[i] = s / l[i][i];
        }
        Vect::from_column_slice(&y)
    }
}

fn shape_distance(shape: &Shape, p: Vec2) -> f64 {
    match shape {
        Shape::Rect(r) => r.distance(p),
        Shape::Circle(c) => (c.center - p).norm() - c.radius,
    }
}

/// `cols[i][a]`: velocity of link `i`'s centre per unit rate of coordinate `a`
/// (zero for joints beyond the link).
type Columns = [[Vec2; DOF]; LINKS];

fn link_velocities(cols: &Columns, qd: &[f64]) -> [(Vec2, f64); LINKS] {
    std::array::from_fn(|i| {
        let n = 3 + i;
        let v = (0..n).fold(Vec2::zeros(), |acc, a| acc + cols[i][a] * qd[a]);
        (v, qd[2..n].iter().sum())
    })
}
