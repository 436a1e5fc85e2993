//! Grids, fields, transforms, derivatives and norms.

mod fields;
mod grid;
pub mod norms;
pub mod snapshot;
pub mod stencil;

pub use fields::{inner, ScalarField, VectorField};
pub use grid::{Grid, GridSpec};
pub use norms::{
    boundary_trace, gevrey_norm, l2_norm, linf_norm, lp_norm, strip_l2_norm, GevreyNorm, GevreyParams,
    TraceKind,
};
pub use snapshot::Snapshot;
