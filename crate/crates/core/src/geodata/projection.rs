use serde::{Deserialize, Serialize};

use super::GeodataError;
use crate::geom::Point;

pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

const MAX_ABS_LAT: f64 = 85.0;

/// Geographic coordinate in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LonLat {
    pub lon: f64,
    pub lat: f64,
}

impl LonLat {
    pub const fn new(lon: f64, lat: f64) -> Self {
        Self { lon, lat }
    }
}

/// Origin of the local equirectangular frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionConfig {
    pub origin: LonLat,
}

impl Default for ProjectionConfig {
    /// Center of the Czech Republic.
    fn default() -> Self {
        Self {
            origin: LonLat::new(15.5, 49.75),
        }
    }
}

impl ProjectionConfig {
    pub fn with_origin(lon: f64, lat: f64) -> Self {
        Self {
            origin: LonLat::new(lon, lat),
        }
    }
}

/// Local equirectangular projection to planar meters (x east, y north).
pub fn project(ll: LonLat, cfg: &ProjectionConfig) -> Result<Point, GeodataError> {
    if !(ll.lat.is_finite() && (-MAX_ABS_LAT..=MAX_ABS_LAT).contains(&ll.lat)) {
        return Err(GeodataError::OutOfRange { lat: ll.lat });
    }
    if !ll.lon.is_finite() {
        return Err(GeodataError::InvalidGeometry("non-finite longitude".into()));
    }
    let cos0 = cfg.origin.lat.to_radians().cos();
    Ok(Point::new(
        EARTH_RADIUS_M * (ll.lon - cfg.origin.lon).to_radians() * cos0,
        EARTH_RADIUS_M * (ll.lat - cfg.origin.lat).to_radians(),
    ))
}

pub fn unproject(p: Point, cfg: &ProjectionConfig) -> LonLat {
    let cos0 = cfg.origin.lat.to_radians().cos();
    LonLat::new(
        cfg.origin.lon + (p.x / (EARTH_RADIUS_M * cos0)).to_degrees(),
        cfg.origin.lat + (p.y / EARTH_RADIUS_M).to_degrees(),
    )
}
