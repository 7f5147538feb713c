//! 2D node geometry and beam-sector arithmetic shared by all simulators.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::Scalar;
use crate::rng::RngHandle;

#[derive(Debug, Error, PartialEq)]
pub enum GeomError {
    #[error("cannot build an empty world (n = 0)")]
    EmptyWorld,
    #[error("deployment side must be positive, got {0}")]
    NonPositiveSide(f64),
    #[error("bearing between coincident points is undefined")]
    UndefinedBearing,
    #[error("invalid radio geometry: {0}")]
    InvalidRadio(String),
}

/// Position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn distance_to(&self, other: &Point<T>) -> T {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }
}

/// Antenna/radio parameters every world is built against.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RadioGeometry<T> {
    pub comm_range_m: T,
    /// sense range = ratio x comm range (baseline 0.5).
    pub sense_to_comm_ratio: T,
    /// round(360 / beamwidth_deg); a 10-degree beam gives 36 sectors.
    pub sector_count: u32,
}

impl<T: Scalar> RadioGeometry<T> {
    // negated comparisons double as NaN rejection on config input
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), GeomError> {
        if !(self.comm_range_m > T::zero()) {
            return Err(GeomError::InvalidRadio("comm_range_m must be positive".into()));
        }
        if !(self.sense_to_comm_ratio > T::zero() && self.sense_to_comm_ratio <= T::one()) {
            return Err(GeomError::InvalidRadio(
                "sense_to_comm_ratio must be in (0, 1]".into(),
            ));
        }
        if self.sector_count < 2 {
            return Err(GeomError::InvalidRadio("sector_count must be at least 2".into()));
        }
        Ok(())
    }

    pub fn sense_range_m(&self) -> T {
        self.comm_range_m * self.sense_to_comm_ratio
    }

    /// Sector count for a given beamwidth in degrees.
    pub fn sectors_for_beamwidth(beamwidth_deg: f64) -> u32 {
        (360.0 / beamwidth_deg).round() as u32
    }
}

/// Static node deployment plus the radio geometry it was built with.
#[derive(Debug, Clone)]
pub struct NodeWorld<T> {
    pub positions: Vec<Point<T>>,
    pub comm_range_m: T,
    pub sense_range_m: T,
    pub sector_count: u32,
}

impl<T: Scalar> NodeWorld<T> {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// i.i.d. uniform positions over the square `[0, side_m]^2`.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn uniform_square_points<T: Scalar>(
    rng: RngHandle,
    n: usize,
    side_m: T,
) -> Result<Vec<Point<T>>, GeomError> {
    if n == 0 {
        return Err(GeomError::EmptyWorld);
    }
    if !(side_m > T::zero()) {
        return Err(GeomError::NonPositiveSide(side_m.widen()));
    }
    let mut r = rng.rng();
    Ok((0..n)
        .map(|_| {
            let x = r.uniform_scalar::<T>() * side_m;
            let y = r.uniform_scalar::<T>() * side_m;
            Point::new(x, y)
        })
        .collect())
}

/// Place `n` nodes i.i.d. uniform over the square `[0, side_m]^2`.
/// Deterministic per `(seed, stream_id)`.
pub fn place_nodes<T: Scalar>(
    rng: RngHandle,
    n: usize,
    side_m: T,
    radio: RadioGeometry<T>,
) -> Result<NodeWorld<T>, GeomError> {
    radio.validate()?;
    let positions = uniform_square_points(rng, n, side_m)?;
    Ok(NodeWorld {
        positions,
        comm_range_m: radio.comm_range_m,
        sense_range_m: radio.sense_range_m(),
        sector_count: radio.sector_count,
    })
}

/// Place a reference node at the origin plus `neighbor_count` neighbors
/// uniform over the disk of radius `placement_radius_m` around it. This is
/// the neighbor-discovery deployment; the square layout above is the general
/// one.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn place_neighbors_in_disk<T: Scalar>(
    rng: RngHandle,
    neighbor_count: usize,
    placement_radius_m: T,
    radio: RadioGeometry<T>,
) -> Result<NodeWorld<T>, GeomError> {
    radio.validate()?;
    if !(placement_radius_m > T::zero()) {
        return Err(GeomError::NonPositiveSide(placement_radius_m.widen()));
    }
    let mut r = rng.rng();
    let tau = T::of(std::f64::consts::TAU);
    let mut positions = Vec::with_capacity(neighbor_count + 1);
    positions.push(Point::new(T::zero(), T::zero()));
    for _ in 0..neighbor_count {
        let radius = placement_radius_m * r.uniform_scalar::<T>().sqrt();
        let angle = tau * r.uniform_scalar::<T>();
        positions.push(Point::new(radius * angle.cos(), radius * angle.sin()));
    }
    Ok(NodeWorld {
        positions,
        comm_range_m: radio.comm_range_m,
        sense_range_m: radio.sense_range_m(),
        sector_count: radio.sector_count,
    })
}

/// Beam sector containing the bearing from `from` to `to`.
///
/// Bearings are normalized to `[0, 360)` degrees measured counterclockwise
/// from +x; sector edges are half-open, so a bearing exactly on an edge lands
/// in the higher-index sector.
pub fn sector_of<T: Scalar>(
    from: Point<T>,
    to: Point<T>,
    sector_count: u32,
) -> Result<u32, GeomError> {
    let dx = to.x - from.x;
    let dy = to.y - from.y;
    if dx == T::zero() && dy == T::zero() {
        return Err(GeomError::UndefinedBearing);
    }
    let tau = T::of(std::f64::consts::TAU);
    let mut bearing = dy.atan2(dx);
    if bearing < T::zero() {
        bearing += tau;
    }
    let width = tau / T::of(sector_count as f64);
    let idx = (bearing / width).floor().widen() as u32;
    Ok(idx % sector_count)
}
