//! Time-stepped simulation state: targets, UAVs, environment and the
//! seeded streams that drive them.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::config::{Arena, ClassMotion, MotionConfig, ScenarioConfig, UavConfig};
use crate::rng::{self, Fnv64, SimRng};
use crate::sensing::RadarState;
use crate::trajectory::{Point, Trajectory};
use crate::{Error, Result};

/// Number of predefined sensing paths.
pub const PATH_COUNT: usize = 3;

const PLACEMENT_STREAM: u64 = 1;
const MOTION_STREAM: u64 = 2;
const SCAN_STREAM_BASE: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TargetClass {
    Slow,
    Fast,
    Erratic,
}

impl TargetClass {
    pub fn name(&self) -> &'static str {
        match self {
            TargetClass::Slow => "SLOW",
            TargetClass::Fast => "FAST",
            TargetClass::Erratic => "ERRATIC",
        }
    }

    pub fn motion(&self, cfg: &MotionConfig) -> ClassMotion {
        match self {
            TargetClass::Slow => cfg.slow,
            TargetClass::Fast => cfg.fast,
            TargetClass::Erratic => cfg.erratic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Target {
    pub id: usize,
    pub class: TargetClass,
    pub position: Point,
    /// m/s
    pub velocity: (f64, f64),
    pub history: Trajectory,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Uav {
    pub id: usize,
    pub position: Point,
    /// joules
    pub battery: f64,
    pub assigned_path: usize,
    /// Index of the waypoint the UAV is flying towards.
    pub waypoint: usize,
    pub active: bool,
    pub radar: RadarState,
    pub history: Trajectory,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub arena: Arena,
    /// meters
    pub sensor_noise_sigma: f64,
    /// dB
    pub snr_base: f64,
    /// dB
    pub snr_weather_penalty: f64,
    pub seed: u64,
}

impl Environment {
    /// Effective SNR after weather losses, dB.
    pub fn snr(&self) -> f64 {
        self.snr_base - self.snr_weather_penalty
    }
}

/// Closed loop of waypoints flown at cruise speed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensingPath {
    pub waypoints: Vec<(f64, f64)>,
}

impl SensingPath {
    /// Index of the waypoint closest to `(x, y)`, lowest index on ties.
    pub fn nearest_waypoint(&self, x: f64, y: f64) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, &(wx, wy)) in self.waypoints.iter().enumerate() {
            let d = libm::hypot(wx - x, wy - y);
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }
}

/// Three rectangular patrol loops, one per vertical strip of the arena.
pub fn predefined_paths(arena: &Arena) -> Vec<SensingPath> {
    let w = arena.width / PATH_COUNT as f64;
    let (mx, my) = (w / 4.0, arena.height / 8.0);
    (0..PATH_COUNT)
        .map(|i| {
            let x0 = i as f64 * w + mx;
            let x1 = (i + 1) as f64 * w - mx;
            let (y0, y1) = (my, arena.height - my);
            SensingPath {
                waypoints: alloc::vec![(x0, y0), (x1, y0), (x1, y1), (x0, y1)],
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MotionCommand {
    Hold,
    FollowPath(usize),
}

#[derive(Debug, Clone)]
pub struct World {
    /// seconds
    pub time: f64,
    pub dt: f64,
    pub steps: usize,
    pub uavs: Vec<Uav>,
    pub targets: Vec<Target>,
    pub env: Environment,
    pub paths: Vec<SensingPath>,
    pub motion: MotionConfig,
    pub uav_cfg: UavConfig,
    /// Target-motion stream.
    pub rng: SimRng,
    /// One measurement-noise stream per UAV.
    pub scan_rngs: Vec<SimRng>,
}

/// Builds episode 0 of the scenario.
pub fn init_world(config: &ScenarioConfig) -> Result<World> {
    init_episode(config, 0)
}

/// Builds the world for `episode`. Target placement depends only on the
/// scenario seed; motion and measurement noise use per-episode streams.
pub fn init_episode(config: &ScenarioConfig, episode: u64) -> Result<World> {
    config.validate()?;
    let seed = config.seed;
    let arena = config.arena;
    let mut place = rng::substream(seed, PLACEMENT_STREAM);

    let margin = |extent: f64| (extent * 0.15).min(config.group_spread * 2.0);
    let centers: Vec<(f64, f64)> = (0..config.target_groups)
        .map(|_| {
            let (mx, my) = (margin(arena.width), margin(arena.height));
            (
                place.random_range(mx..=arena.width - mx),
                place.random_range(my..=arena.height - my),
            )
        })
        .collect();
    let mix = config.target_mix;
    let total = mix.slow + mix.fast + mix.erratic;
    let mut targets = Vec::with_capacity(config.target_count);
    for id in 0..config.target_count {
        let u: f64 = place.random::<f64>() * total;
        let class = if u < mix.slow {
            TargetClass::Slow
        } else if u < mix.slow + mix.fast {
            TargetClass::Fast
        } else {
            TargetClass::Erratic
        };
        let (cx, cy) = centers[id % centers.len()];
        let nx: f64 = StandardNormal.sample(&mut place);
        let ny: f64 = StandardNormal.sample(&mut place);
        let x = (cx + config.group_spread * nx).clamp(0.0, arena.width);
        let y = (cy + config.group_spread * ny).clamp(0.0, arena.height);
        let cap = class.motion(&config.motion).speed_cap;
        let heading = place.random::<f64>() * TAU;
        let speed = cap * place.random_range(0.5..=1.0);
        let position = Point::new(x, y, 0.0);
        targets.push(Target {
            id,
            class,
            position,
            velocity: (speed * libm::cos(heading), speed * libm::sin(heading)),
            history: Trajectory::from_points_unchecked(alloc::vec![position]),
        });
    }

    let paths = predefined_paths(&arena);
    let cols = libm::ceil(libm::sqrt(config.uav_count as f64)) as usize;
    let rows = config.uav_count.div_ceil(cols);
    let uavs = (0..config.uav_count)
        .map(|id| {
            let (c, r) = (id % cols, id / cols);
            let x = (c as f64 + 0.5) * arena.width / cols as f64;
            let y = (r as f64 + 0.5) * arena.height / rows as f64;
            let (path, waypoint) = nearest_path(&paths, x, y);
            let position = Point::new(x, y, 0.0);
            Uav {
                id,
                position,
                battery: config.uav.battery,
                assigned_path: path,
                waypoint,
                active: true,
                radar: RadarState::new(&config.radar),
                history: Trajectory::from_points_unchecked(alloc::vec![position]),
            }
        })
        .collect();

    let episode_seed = rng::mix_seed(seed, episode);
    Ok(World {
        time: 0.0,
        dt: config.dt,
        steps: 0,
        uavs,
        targets,
        env: Environment {
            arena,
            sensor_noise_sigma: config.environment.sensor_noise_sigma,
            snr_base: config.environment.snr_base,
            snr_weather_penalty: config.environment.snr_weather_penalty,
            seed,
        },
        paths,
        motion: config.motion,
        uav_cfg: config.uav,
        rng: rng::substream(episode_seed, MOTION_STREAM),
        scan_rngs: (0..config.uav_count)
            .map(|i| rng::substream(episode_seed, SCAN_STREAM_BASE + i as u64))
            .collect(),
    })
}

/// Path and waypoint nearest to `(x, y)`; ties go to the lowest path index.
pub fn nearest_path(paths: &[SensingPath], x: f64, y: f64) -> (usize, usize) {
    let mut best = (0, 0, f64::INFINITY);
    for (p, path) in paths.iter().enumerate() {
        let (w, d) = path.nearest_waypoint(x, y);
        if d < best.2 {
            best = (p, w, d);
        }
    }
    (best.0, best.1)
}

/// Reflects a coordinate and its velocity component off the walls `[0, hi]`.
fn reflect(pos: &mut f64, vel: &mut f64, hi: f64) {
    if *pos < 0.0 {
        *pos = -*pos;
        *vel = -*vel;
    } else if *pos > hi {
        *pos = 2.0 * hi - *pos;
        *vel = -*vel;
    }
    *pos = pos.clamp(0.0, hi);
}

/// Advances one target by one step of its class dynamics.
pub fn step_target<R: Rng + ?Sized>(target: &mut Target, motion: &MotionConfig, arena: &Arena, dt: f64, t_next: f64, rng: &mut R) {
    let m = target.class.motion(motion);
    let (mut vx, mut vy) = target.velocity;
    if m.heading_resample > 0.0 && rng.random::<f64>() < m.heading_resample {
        let speed = libm::hypot(vx, vy);
        let heading = rng.random::<f64>() * TAU;
        vx = speed * libm::cos(heading);
        vy = speed * libm::sin(heading);
    }
    let nx: f64 = StandardNormal.sample(rng);
    let ny: f64 = StandardNormal.sample(rng);
    vx += m.sigma * nx;
    vy += m.sigma * ny;
    let speed = libm::hypot(vx, vy);
    if speed > m.speed_cap {
        let k = m.speed_cap / speed;
        vx *= k;
        vy *= k;
    }
    let mut x = target.position.x + vx * dt;
    let mut y = target.position.y + vy * dt;
    reflect(&mut x, &mut vx, arena.width);
    reflect(&mut y, &mut vy, arena.height);
    target.velocity = (vx, vy);
    target.position = Point::new(x, y, t_next);
    target.history.points_mut().push(target.position);
}

/// Seconds of `[phase, phase + dt)` that fall inside the radar's active window.
pub(crate) fn active_overlap(phase: f64, dt: f64, pri: f64, active_fraction: f64) -> f64 {
    let window = active_fraction * pri;
    let (mut p, mut left, mut total) = (phase, dt, 0.0);
    while left > 0.0 {
        let seg = (pri - p).min(left);
        total += (window.min(p + seg) - p).max(0.0);
        left -= seg;
        p = 0.0;
    }
    total
}

impl World {
    pub fn snr(&self) -> f64 {
        self.env.snr()
    }

    /// Advances every target by one step and appends to their histories.
    pub fn step_targets(&mut self) {
        let t_next = (self.steps + 1) as f64 * self.dt;
        for target in &mut self.targets {
            step_target(target, &self.motion, &self.env.arena, self.dt, t_next, &mut self.rng);
        }
    }

    /// Moves UAV `i` for one step under `command` and charges flight and
    /// radar energy. Inactive UAVs stay put.
    pub fn step_uav(&mut self, i: usize, command: MotionCommand) -> Result<()> {
        let t_next = (self.steps + 1) as f64 * self.dt;
        let dt = self.dt;
        let cfg = self.uav_cfg;
        if let MotionCommand::FollowPath(p) = command {
            if p >= self.paths.len() {
                return Err(Error::InvalidAction(alloc::format!(
                    "UAV {i} asked for path {p}, only {} exist",
                    self.paths.len()
                )));
            }
        }
        let uav = self
            .uavs
            .get_mut(i)
            .ok_or_else(|| Error::InvalidAction(alloc::format!("no UAV {i}")))?;
        if uav.active {
            let flight = match command {
                MotionCommand::Hold => cfg.idle_power * dt,
                MotionCommand::FollowPath(p) => {
                    let path = &self.paths[p];
                    if p != uav.assigned_path {
                        uav.assigned_path = p;
                        uav.waypoint = path.nearest_waypoint(uav.position.x, uav.position.y).0;
                    }
                    let (x, y, w) = fly(path, uav.position.x, uav.position.y, uav.waypoint, cfg.cruise_speed * dt);
                    uav.position.x = x;
                    uav.position.y = y;
                    uav.waypoint = w;
                    cfg.cruise_power * dt
                }
            };
            let r = &uav.radar;
            let radar = cfg.radar_power * active_overlap(r.phase, dt, r.pri, r.active_fraction);
            uav.radar.advance(dt);
            uav.battery = (uav.battery - flight - radar).max(0.0);
            if uav.battery <= 0.0 {
                uav.active = false;
            }
        }
        uav.position.t = t_next;
        uav.history.points_mut().push(uav.position);
        Ok(())
    }

    /// One world step: targets move, then each UAV executes its command.
    pub fn advance(&mut self, commands: &[MotionCommand]) -> Result<()> {
        if commands.len() != self.uavs.len() {
            return Err(Error::InvalidAction(alloc::format!(
                "{} commands for {} UAVs",
                commands.len(),
                self.uavs.len()
            )));
        }
        self.step_targets();
        for (i, &c) in commands.iter().enumerate() {
            self.step_uav(i, c)?;
        }
        self.steps += 1;
        self.time = self.steps as f64 * self.dt;
        Ok(())
    }

    /// Charges `joules` of non-flight energy (e.g. transmission) to UAV `i`.
    pub fn drain(&mut self, i: usize, joules: f64) {
        let uav = &mut self.uavs[i];
        uav.battery = (uav.battery - joules).max(0.0);
        if uav.battery <= 0.0 {
            uav.active = false;
        }
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            time: self.time,
            uavs: self
                .uavs
                .iter()
                .map(|u| UavSnapshot {
                    id: u.id,
                    x: u.position.x,
                    y: u.position.y,
                    battery: u.battery,
                })
                .collect(),
            targets: self
                .targets
                .iter()
                .map(|t| TargetSnapshot {
                    id: t.id,
                    class: t.class,
                    x: t.position.x,
                    y: t.position.y,
                })
                .collect(),
        }
    }

    /// Hash of the full dynamic state, bit-exact over floats.
    pub fn state_hash(&self) -> u64 {
        let mut h = Fnv64::default();
        h.write_f64(self.time);
        h.write_u64(self.steps as u64);
        for u in &self.uavs {
            h.write_f64(u.position.x);
            h.write_f64(u.position.y);
            h.write_f64(u.battery);
            h.write_f64(u.radar.phase);
            h.write_u64(u.assigned_path as u64);
            h.write_u64(u.waypoint as u64);
            h.write_u64(u.active as u64);
            h.write_u64(u.history.len() as u64);
        }
        for t in &self.targets {
            h.write_f64(t.position.x);
            h.write_f64(t.position.y);
            h.write_f64(t.velocity.0);
            h.write_f64(t.velocity.1);
            h.write_u64(t.history.len() as u64);
        }
        h.finish()
    }
}

/// Flies `budget` meters along the closed loop starting towards `waypoint`.
fn fly(path: &SensingPath, mut x: f64, mut y: f64, mut waypoint: usize, mut budget: f64) -> (f64, f64, usize) {
    let n = path.waypoints.len();
    // A full lap of zero-length legs would otherwise spin forever.
    let mut idle_legs = 0;
    while budget > 0.0 && idle_legs <= n {
        let (wx, wy) = path.waypoints[waypoint];
        let d = libm::hypot(wx - x, wy - y);
        if d <= budget {
            budget -= d;
            x = wx;
            y = wy;
            waypoint = (waypoint + 1) % n;
            idle_legs = if d == 0.0 { idle_legs + 1 } else { 0 };
        } else {
            x += (wx - x) * budget / d;
            y += (wy - y) * budget / d;
            budget = 0.0;
        }
    }
    (x, y, waypoint)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UavSnapshot {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub battery: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetSnapshot {
    pub id: usize,
    pub class: TargetClass,
    pub x: f64,
    pub y: f64,
}

/// One line of the snapshot log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub time: f64,
    pub uavs: Vec<UavSnapshot>,
    pub targets: Vec<TargetSnapshot>,
}
