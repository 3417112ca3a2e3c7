//! Enclosing ellipsoids, canonical position and ellipsoid recognition.

mod barrier;
mod canonical;
mod mvee;

pub use canonical::{
    body_mvee, canonicalize, ellipsoid_gap, is_ellipsoid, is_ellipsoid_with, normalizing_map,
    DEFAULT_TOL,
};
pub use mvee::{mvee, mvee_body, MveeResult, DEFAULT_EPS};
