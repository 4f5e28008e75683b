//! Constrained random placement on a finite disk.
//!
//! Base stations and mobiles are each drawn from a binomial point process
//! with repulsion ("uniform clustering"): a fixed number of points, uniform on
//! the disk, with every pair at least an exclusion radius apart. The two
//! classes are independent of each other; a mobile may sit arbitrarily close
//! to a base station.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_MAX_ATTEMPTS_PER_POINT: usize = 1000;
pub const DEFAULT_MAX_REDRAWS: usize = 100;
pub const DEFAULT_RELAXATION_SWEEPS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    fn distance_sq(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

/// Disk centered at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Disk {
    radius: f64,
}

impl Disk {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::invalid(
                "r_net",
                format!("must be positive, got {radius}"),
            ));
        }
        Ok(Self { radius })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.radius * self.radius
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.norm() <= self.radius
    }

    /// Draws one point uniformly on the disk.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let r = self.radius * rng.random::<f64>().sqrt();
        let theta = std::f64::consts::TAU * rng.random::<f64>();
        Point::new(r * theta.cos(), r * theta.sin())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlacementSpec {
    pub count: usize,
    pub exclusion_radius: f64,
    pub max_attempts_per_point: usize,
    pub max_redraws: usize,
    /// Metropolis sweeps of the dense-packing fallback; 0 disables it.
    pub relaxation_sweeps: usize,
}

impl PlacementSpec {
    pub fn new(count: usize, exclusion_radius: f64) -> Self {
        Self {
            count,
            exclusion_radius,
            max_attempts_per_point: DEFAULT_MAX_ATTEMPTS_PER_POINT,
            max_redraws: DEFAULT_MAX_REDRAWS,
            relaxation_sweeps: DEFAULT_RELAXATION_SWEEPS,
        }
    }

    pub fn validate(&self, disk: &Disk) -> Result<()> {
        if self.count == 0 {
            return Err(Error::invalid("count", "at least one point is required"));
        }
        if !(self.exclusion_radius.is_finite() && self.exclusion_radius >= 0.0) {
            return Err(Error::invalid(
                "exclusion_radius",
                format!("must be non-negative, got {}", self.exclusion_radius),
            ));
        }
        if self.count >= 2 && self.exclusion_radius >= 2.0 * disk.radius() {
            return Err(Error::invalid(
                "exclusion_radius",
                format!(
                    "{} cannot separate {} points on a disk of radius {}",
                    self.exclusion_radius,
                    self.count,
                    disk.radius()
                ),
            ));
        }
        if self.max_attempts_per_point == 0 {
            return Err(Error::invalid("max_attempts_per_point", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkRealization {
    pub base_stations: Vec<Point>,
    pub mobiles: Vec<Point>,
    pub disk: Disk,
}

/// Places `spec.count` points by sequential rejection.
///
/// Each candidate is uniform on the disk and is rejected if it lands within
/// the exclusion radius of an accepted point. When one point exhausts its
/// attempts the whole set is discarded and redrawn, up to `max_redraws`
/// times.
///
/// Sequential rejection jams at roughly 55% area coverage. Past that, if
/// `relaxation_sweeps > 0`, the points are seeded on a randomly shifted and
/// rotated hexagonal lattice and shaken by hard-core Metropolis moves, whose
/// stationary law is the uniform distribution conditioned on the separation.
pub fn place_uniform_clustering<R: Rng + ?Sized>(
    disk: &Disk,
    spec: &PlacementSpec,
    rng: &mut R,
) -> Result<Vec<Point>> {
    spec.validate(disk)?;
    let min_sq = spec.exclusion_radius * spec.exclusion_radius;
    let mut points = Vec::with_capacity(spec.count);

    'redraw: for _ in 0..=spec.max_redraws {
        points.clear();
        while points.len() < spec.count {
            let accepted = (0..spec.max_attempts_per_point).find_map(|_| {
                let candidate = disk.sample(rng);
                points
                    .iter()
                    .all(|p: &Point| p.distance_sq(&candidate) >= min_sq)
                    .then_some(candidate)
            });
            match accepted {
                Some(p) => points.push(p),
                None => continue 'redraw,
            }
        }
        return Ok(points);
    }

    if spec.relaxation_sweeps > 0 {
        if let Some(points) = relaxed_lattice(disk, spec, rng) {
            return Ok(points);
        }
    }

    Err(Error::PlacementInfeasible {
        count: spec.count,
        exclusion_radius: spec.exclusion_radius,
        radius: disk.radius(),
        redraws: spec.max_redraws,
    })
}

fn relaxed_lattice<R: Rng + ?Sized>(
    disk: &Disk,
    spec: &PlacementSpec,
    rng: &mut R,
) -> Option<Vec<Point>> {
    let r = disk.radius();
    let spacing = spec.exclusion_radius * (1.0 + 1e-9);
    let min_sq = spec.exclusion_radius * spec.exclusion_radius;
    let row = spacing * 3f64.sqrt() / 2.0;
    let reach = (r / row).ceil() as i64 + 2;

    let mut sites = Vec::new();
    for _ in 0..=spec.max_redraws.max(1) {
        let (ox, oy) = (rng.random::<f64>() * spacing, rng.random::<f64>() * row);
        let (sin, cos) = (std::f64::consts::TAU * rng.random::<f64>()).sin_cos();
        sites.clear();
        for v in -reach..=reach {
            for u in -reach..=reach {
                let x = (u as f64 + 0.5 * (v & 1) as f64) * spacing + ox;
                let y = v as f64 * row + oy;
                let p = Point::new(x * cos - y * sin, x * sin + y * cos);
                if disk.contains(&p) {
                    sites.push(p);
                }
            }
        }
        if sites.len() >= spec.count {
            break;
        }
    }
    if sites.len() < spec.count {
        return None;
    }
    sites.shuffle(rng);
    sites.truncate(spec.count);

    let step = 0.5 * spec.exclusion_radius;
    for _ in 0..spec.relaxation_sweeps {
        for i in 0..sites.len() {
            let offset = Disk { radius: step }.sample(rng);
            let candidate = Point::new(sites[i].x + offset.x, sites[i].y + offset.y);
            let free = disk.contains(&candidate)
                && sites
                    .iter()
                    .enumerate()
                    .all(|(k, p)| k == i || p.distance_sq(&candidate) >= min_sq);
            if free {
                sites[i] = candidate;
            }
        }
    }
    Some(sites)
}

/// Draws base stations first, then mobiles, from the same stream.
pub fn draw_network<R: Rng + ?Sized>(
    disk: &Disk,
    bs_spec: &PlacementSpec,
    mobile_spec: &PlacementSpec,
    rng: &mut R,
) -> Result<NetworkRealization> {
    let base_stations = place_uniform_clustering(disk, bs_spec, rng)?;
    let mobiles = place_uniform_clustering(disk, mobile_spec, rng)?;
    Ok(NetworkRealization {
        base_stations,
        mobiles,
        disk: *disk,
    })
}

/// Smallest pairwise distance, or `None` for fewer than two points.
pub fn min_pairwise_distance(points: &[Point]) -> Option<f64> {
    let mut best = None::<f64>;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            let d = a.distance(b);
            best = Some(best.map_or(d, |m| m.min(d)));
        }
    }
    best
}
