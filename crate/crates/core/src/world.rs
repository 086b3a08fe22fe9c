//! Square arena with a central box, and a two-wheeled robot with a ring of
//! proximity sensors.
//!
//! Kinematics only: wheels are either off or at a constant speed, motion is
//! an Euler step of the differential-drive model, and a step that would push
//! the robot's disc into a wall is cancelled (the rotation still happens).
//!
//! Sensor `i` looks along body angle `2 pi i / 24`. Its reading falls off
//! linearly with the surface distance `d` to the nearest wall along the ray:
//! `clamp(1 - d / sensor_range, 0, 1)`, so 1 means contact and 0 means
//! nothing within range.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bn::SENSOR_COUNT;
use crate::error::ConfigError;

/// Maximum rejected draws in [`random_free_pose`].
pub const MAX_POSE_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArenaGeometry {
    /// Outer square side, centred at the origin.
    pub side: f64,
    /// Central box side, centred at the origin.
    pub box_side: f64,
}

impl Default for ArenaGeometry {
    fn default() -> Self {
        Self {
            side: 4.0,
            box_side: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RobotParams {
    pub radius: f64,
    /// Wheel separation.
    pub axle: f64,
    /// Wheel surface speed when on, m/s.
    pub wheel_speed: f64,
    pub sensor_count: usize,
    pub sensor_range: f64,
    /// Seconds per control step.
    pub dt: f64,
}

impl Default for RobotParams {
    fn default() -> Self {
        Self {
            radius: 0.085,
            axle: 0.14,
            wheel_speed: 0.1,
            sensor_count: SENSOR_COUNT,
            sensor_range: 0.1,
            dt: 0.1,
        }
    }
}

impl RobotParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, value) in [
            ("radius", self.radius),
            ("axle", self.axle),
            ("wheel_speed", self.wheel_speed),
            ("sensor_range", self.sensor_range),
            ("dt", self.dt),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ConfigError::NonPositive { name, value });
            }
        }
        if self.sensor_count != SENSOR_COUNT {
            return Err(ConfigError::Invalid(format!(
                "sensor_count must be {SENSOR_COUNT}, got {}",
                self.sensor_count
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotPose {
    pub x: f64,
    pub y: f64,
    /// Radians in `[0, 2 pi)`.
    pub heading: f64,
}

impl RobotPose {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self {
            x,
            y,
            heading: wrap_angle(heading),
        }
    }
}

pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: (f64, f64),
    pub b: (f64, f64),
}

impl Segment {
    fn new(ax: f64, ay: f64, bx: f64, by: f64) -> Self {
        Self { a: (ax, ay), b: (bx, by) }
    }

    /// Euclidean distance from a point to the segment.
    pub fn distance(&self, px: f64, py: f64) -> f64 {
        let (ex, ey) = (self.b.0 - self.a.0, self.b.1 - self.a.1);
        let len2 = ex * ex + ey * ey;
        let t = (((px - self.a.0) * ex + (py - self.a.1) * ey) / len2).clamp(0.0, 1.0);
        let (cx, cy) = (self.a.0 + t * ex, self.a.1 + t * ey);
        ((px - cx).powi(2) + (py - cy).powi(2)).sqrt()
    }

    /// Distance along the unit ray `(ox, oy) + t (dx, dy)` to the segment, if hit.
    #[inline]
    pub fn ray_hit(&self, ox: f64, oy: f64, dx: f64, dy: f64) -> Option<f64> {
        let (ex, ey) = (self.b.0 - self.a.0, self.b.1 - self.a.1);
        let denom = dx * ey - dy * ex;
        if denom.abs() < 1e-15 {
            return None;
        }
        let (wx, wy) = (self.a.0 - ox, self.a.1 - oy);
        let t = (wx * ey - wy * ex) / denom;
        let s = (wx * dy - wy * dx) / denom;
        (t >= 0.0 && (0.0..=1.0).contains(&s)).then_some(t)
    }
}

impl ArenaGeometry {
    pub fn validate(&self, params: &RobotParams) -> Result<(), ConfigError> {
        if !(self.box_side > 0.0 && self.box_side < self.side) {
            return Err(ConfigError::Geometry(format!(
                "need 0 < box_side < side, got box_side = {}, side = {}",
                self.box_side, self.side
            )));
        }
        let corridor = (self.side - self.box_side) / 2.0;
        if corridor <= 2.0 * params.radius {
            return Err(ConfigError::Geometry(format!(
                "corridor width {corridor} does not fit a robot of radius {}",
                params.radius
            )));
        }
        Ok(())
    }

    /// Four outer walls followed by four box walls.
    pub fn walls(&self) -> [Segment; 8] {
        let h = self.side / 2.0;
        let b = self.box_side / 2.0;
        [
            Segment::new(-h, -h, h, -h),
            Segment::new(h, -h, h, h),
            Segment::new(h, h, -h, h),
            Segment::new(-h, h, -h, -h),
            Segment::new(-b, -b, b, -b),
            Segment::new(b, -b, b, b),
            Segment::new(b, b, -b, b),
            Segment::new(-b, b, -b, -b),
        ]
    }

    /// Whether a disc of `radius` centred at `(x, y)` lies in the corridor
    /// between the outer walls and the box, touching allowed.
    pub fn disc_fits(&self, x: f64, y: f64, radius: f64) -> bool {
        let h = self.side / 2.0 - radius;
        if x.abs() > h || y.abs() > h {
            return false;
        }
        // distance from the centre to the (solid) box
        let b = self.box_side / 2.0;
        let dx = (x.abs() - b).max(0.0);
        let dy = (y.abs() - b).max(0.0);
        dx * dx + dy * dy >= radius * radius
    }
}

/// Readings of the 24 sensors, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorReadings(pub [f64; SENSOR_COUNT]);

impl SensorReadings {
    pub fn p_max(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }
}

/// Body-frame unit vectors of the sensor rays.
fn sensor_directions() -> [(f64, f64); SENSOR_COUNT] {
    std::array::from_fn(|i| {
        let a = TAU * i as f64 / SENSOR_COUNT as f64;
        (a.cos(), a.sin())
    })
}

/// A robot in an arena. Owns its pose and the precomputed geometry.
#[derive(Debug, Clone)]
pub struct World {
    arena: ArenaGeometry,
    params: RobotParams,
    pose: RobotPose,
    walls: [Segment; 8],
    rays: [(f64, f64); SENSOR_COUNT],
}

impl World {
    pub fn new(arena: ArenaGeometry, params: RobotParams, pose: RobotPose) -> Result<Self, ConfigError> {
        params.validate()?;
        arena.validate(&params)?;
        if !arena.disc_fits(pose.x, pose.y, params.radius) {
            return Err(ConfigError::Geometry(format!("pose {pose:?} overlaps an obstacle")));
        }
        Ok(Self {
            arena,
            params,
            pose,
            walls: arena.walls(),
            rays: sensor_directions(),
        })
    }

    pub fn arena(&self) -> &ArenaGeometry {
        &self.arena
    }

    pub fn params(&self) -> &RobotParams {
        &self.params
    }

    pub fn pose(&self) -> RobotPose {
        self.pose
    }

    pub fn set_pose(&mut self, pose: RobotPose) {
        assert!(
            self.arena.disc_fits(pose.x, pose.y, self.params.radius),
            "pose {pose:?} overlaps an obstacle"
        );
        self.pose = pose;
    }

    pub fn sense(&self) -> SensorReadings {
        let RobotPose { x, y, heading } = self.pose;
        let reach = self.params.radius + self.params.sensor_range;
        let mut near = [Segment::new(0.0, 0.0, 0.0, 0.0); 8];
        let mut count = 0;
        for w in &self.walls {
            if w.distance(x, y) <= reach {
                near[count] = *w;
                count += 1;
            }
        }
        let mut values = [0.0; SENSOR_COUNT];
        if count == 0 {
            return SensorReadings(values);
        }
        let (s, c) = heading.sin_cos();
        for (value, &(bx, by)) in values.iter_mut().zip(&self.rays) {
            let (dx, dy) = (c * bx - s * by, s * bx + c * by);
            let hit = near[..count]
                .iter()
                .filter_map(|w| w.ray_hit(x, y, dx, dy))
                .fold(f64::INFINITY, f64::min);
            if hit <= reach {
                let d = hit - self.params.radius;
                *value = (1.0 - d / self.params.sensor_range).clamp(0.0, 1.0);
            }
        }
        SensorReadings(values)
    }

    /// Advances one control step with wheel bits `left`, `right`.
    pub fn drive(&mut self, left: bool, right: bool) {
        let p = &self.params;
        let (l, r) = (left as u8 as f64, right as u8 as f64);
        let v = p.wheel_speed * (l + r) / 2.0;
        let omega = p.wheel_speed * (r - l) / p.axle;
        let heading = wrap_angle(self.pose.heading + omega * p.dt);
        let (s, c) = heading.sin_cos();
        let x = self.pose.x + v * p.dt * c;
        let y = self.pose.y + v * p.dt * s;
        self.pose.heading = heading;
        if self.arena.disc_fits(x, y, p.radius) {
            self.pose.x = x;
            self.pose.y = y;
        }
    }
}

/// Readings for `pose` in `arena`.
pub fn sense(arena: &ArenaGeometry, pose: RobotPose, params: &RobotParams) -> SensorReadings {
    World {
        arena: *arena,
        params: *params,
        pose,
        walls: arena.walls(),
        rays: sensor_directions(),
    }
    .sense()
}

/// Pose after one control step.
pub fn drive(pose: RobotPose, left: bool, right: bool, params: &RobotParams, arena: &ArenaGeometry) -> RobotPose {
    let mut world = World {
        arena: *arena,
        params: *params,
        pose,
        walls: arena.walls(),
        rays: sensor_directions(),
    };
    world.drive(left, right);
    world.pose
}

/// Rejection-samples a uniformly random collision-free pose.
pub fn random_free_pose<R: Rng + ?Sized>(
    arena: &ArenaGeometry,
    params: &RobotParams,
    rng: &mut R,
) -> Result<RobotPose, ConfigError> {
    arena.validate(params)?;
    let h = arena.side / 2.0;
    for _ in 0..MAX_POSE_ATTEMPTS {
        let x = rng.random_range(-h..h);
        let y = rng.random_range(-h..h);
        let heading = rng.random_range(0.0..TAU);
        if arena.disc_fits(x, y, params.radius) {
            return Ok(RobotPose { x, y, heading });
        }
    }
    Err(ConfigError::NoFreePose {
        attempts: MAX_POSE_ATTEMPTS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_stream;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn defaults() -> (ArenaGeometry, RobotParams) {
        (ArenaGeometry::default(), RobotParams::default())
    }

    #[test]
    fn far_from_walls_reads_zero() {
        let (arena, params) = defaults();
        let r = sense(&arena, RobotPose::new(1.25, 0.0, 0.3), &params);
        assert!(r.0.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn perpendicular_wall_at_half_range() {
        let (arena, params) = defaults();
        // sensor 0 faces +x; right wall at x = 2
        let x = 2.0 - params.radius - params.sensor_range / 2.0;
        let r = sense(&arena, RobotPose::new(x, 1.0, 0.0), &params);
        assert!((r.0[0] - 0.5).abs() < 1e-12, "{}", r.0[0]);
        // the opposite sensor sees nothing
        assert_eq!(r.0[12], 0.0);
    }

    #[test]
    fn contact_reads_one() {
        let (arena, params) = defaults();
        let x = 2.0 - params.radius;
        let r = sense(&arena, RobotPose::new(x, 1.0, 0.0), &params);
        assert!((r.0[0] - 1.0).abs() < 1e-12);
        assert!((r.p_max() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn readings_in_unit_interval_everywhere() {
        let (arena, params) = defaults();
        let mut rng = seeded_stream(3, 0);
        for _ in 0..2000 {
            let pose = random_free_pose(&arena, &params, &mut rng).unwrap();
            let r = sense(&arena, pose, &params);
            assert!(r.0.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn quarter_turn_shifts_readings_by_six() {
        let (arena, params) = defaults();
        let mut rng = seeded_stream(8, 0);
        for _ in 0..200 {
            // pick poses near walls so readings are nonzero
            let pose = random_free_pose(&arena, &params, &mut rng).unwrap();
            let rotated = RobotPose::new(-pose.y, pose.x, pose.heading);
            let a = sense(&arena, pose, &params);
            let b = sense(&arena, rotated, &params);
            for i in 0..SENSOR_COUNT {
                assert!((b.0[(i + 6) % SENSOR_COUNT] - a.0[i]).abs() < 1e-9);
            }
            // rotating heading as well leaves the body-frame readings unchanged
            let both = RobotPose::new(-pose.y, pose.x, pose.heading + FRAC_PI_2);
            let c = sense(&arena, both, &params);
            for i in 0..SENSOR_COUNT {
                assert!((c.0[i] - a.0[i]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn approaching_a_wall_never_lowers_the_facing_reading() {
        let (arena, params) = defaults();
        let mut pose = RobotPose::new(1.5, -1.0, 0.0);
        let mut last = 0.0;
        for _ in 0..100 {
            pose = drive(pose, true, true, &params, &arena);
            let r = sense(&arena, pose, &params).0[0];
            assert!(r >= last);
            last = r;
        }
        assert!((last - 1.0).abs() < 0.1 + 1e-9);
    }

    #[test]
    fn wheels_off_keep_pose() {
        let (arena, params) = defaults();
        let pose = RobotPose::new(1.0, 1.0, 2.0);
        assert_eq!(drive(pose, false, false, &params, &arena), pose);
    }

    #[test]
    fn straight_step() {
        let (arena, params) = defaults();
        let pose = RobotPose::new(1.0, 1.0, 0.5);
        let next = drive(pose, true, true, &params, &arena);
        let moved = ((next.x - pose.x).powi(2) + (next.y - pose.y).powi(2)).sqrt();
        assert!((moved - 0.01).abs() < 1e-12);
        assert_eq!(next.heading, pose.heading);
    }

    #[test]
    fn pivot_on_right_wheel() {
        let (arena, params) = defaults();
        let pose = RobotPose::new(1.0, 1.0, 0.0);
        let next = drive(pose, false, true, &params, &arena);
        assert!((next.heading - 0.1 / 0.14 * 0.1).abs() < 1e-12);
        assert!((next.heading - 0.0714).abs() < 1e-4);
        let moved = ((next.x - pose.x).powi(2) + (next.y - pose.y).powi(2)).sqrt();
        assert!((moved - 0.005).abs() < 1e-12);
    }

    #[test]
    fn stalls_against_wall_but_turns() {
        let (arena, params) = defaults();
        let pose = RobotPose::new(2.0 - params.radius - 0.001, 0.0 + 1.0, 0.0);
        let next = drive(pose, true, true, &params, &arena);
        assert_eq!((next.x, next.y), (pose.x, pose.y));
        let turned = drive(pose, true, false, &params, &arena);
        assert!(turned.heading != pose.heading);
    }

    #[test]
    fn sampled_poses_clear_every_wall() {
        let (arena, params) = defaults();
        let mut rng = seeded_stream(12, 0);
        for _ in 0..1000 {
            let p = random_free_pose(&arena, &params, &mut rng).unwrap();
            for w in arena.walls() {
                assert!(w.distance(p.x, p.y) - params.radius >= 0.0);
            }
            assert!(p.x.abs() > 0.5 || p.y.abs() > 0.5, "inside the box");
            assert!((0.0..TAU).contains(&p.heading));
        }
    }

    #[test]
    fn random_pose_is_deterministic() {
        let (arena, params) = defaults();
        let a = random_free_pose(&arena, &params, &mut seeded_stream(5, 2)).unwrap();
        let b = random_free_pose(&arena, &params, &mut seeded_stream(5, 2)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn infeasible_geometry_rejected() {
        let params = RobotParams::default();
        assert!(ArenaGeometry { side: 1.0, box_side: 1.2 }.validate(&params).is_err());
        assert!(ArenaGeometry { side: 1.0, box_side: 0.7 }.validate(&params).is_err());
        assert!(random_free_pose(&ArenaGeometry { side: 1.0, box_side: 0.7 }, &params, &mut seeded_stream(0, 0)).is_err());
        let bad = RobotParams { dt: 0.0, ..RobotParams::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(-1e-300), 0.0);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn drive_never_penetrates(seed in any::<u64>(), bits in proptest::collection::vec(0u8..4, 1..400)) {
            let (arena, params) = defaults();
            let mut rng = seeded_stream(seed, 0);
            let mut pose = random_free_pose(&arena, &params, &mut rng).unwrap();
            for b in bits {
                pose = drive(pose, b & 1 == 1, b & 2 == 2, &params, &arena);
                prop_assert!(arena.disc_fits(pose.x, pose.y, params.radius));
                for w in arena.walls() {
                    prop_assert!(w.distance(pose.x, pose.y) >= params.radius - 1e-12);
                }
            }
        }
    }
}
