//! Convex-body representations and the elementary geometric operators.

mod body;
mod ellipsoid;
mod flat;
mod ops;
mod sample;
pub mod shapes;

pub use body::{ConvexBody, Representation, Touching};
pub use ellipsoid::{unit_ball_volume, Ellipsoid, EllipsoidPiece};
pub use flat::{AffineMap, Line, Subspace};
pub use ops::{
    oblique_project, project, project_along, slice, support, support_distance, Section,
    SliceOptions,
};
pub use sample::{LocalFit, SupportSample};
