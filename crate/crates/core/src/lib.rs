//! Atomic measure extraction from truncated moment data.

pub mod linalg;
pub mod moment;
pub mod extraction;
pub mod hierarchy;
pub mod sdp;
pub mod interp;
