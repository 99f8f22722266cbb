//! Contrast-preserving HDR tone mapping.
//!
//! Compresses the dynamic range of a scene-referred image while matching
//! the local contrast of the original: the log-luminance of the output is
//! the solution of a regularized least-squares problem over adjacent-pixel
//! contrasts, constrained to the displayable range and solved by iterated
//! conditional modes. A locally adaptive logarithmic tone curve provides
//! the reduced-range reference image that anchors the regularizer and
//! initializes the solver, and per-pixel weight/bound ramps around strong
//! edges keep halos down.
//!
//! The typical pipeline is:
//!
//! 1. [`hdr_io::load_radiance_hdr`] / [`hdr_io::load_pfm`]
//! 2. [`hdr_io::extract_luminance`]
//! 3. [`solver::compress`]
//! 4. [`hdr_io::recombine_color`]
//! 5. [`hdr_io::write_display`]

pub mod contrast;
pub mod edge;
pub mod error;
pub mod hdr_io;
pub mod oracle;
pub mod plane;
pub mod reference;
pub mod solver;

pub use contrast::{build_contrast_system, build_contrast_system_with, objective, Connectivity, ContrastSystem};
pub use edge::{build_adaptation_maps, build_lambda_map, build_upper_bound, detect_strong_edges, AdaptationMaps, EdgeParams};
pub use error::{Error, Result};
pub use hdr_io::{
    encode_display_png, extract_luminance, load_pfm, load_radiance_hdr, recombine_color,
    write_display, write_pfm_color, write_pfm_gray, write_radiance_hdr, HdrImage, LdrImage,
    LuminanceField, DEFAULT_FLOOR_RATIO,
};
pub use plane::{Mask, Plane};
pub use reference::{
    default_window_radius, local_geometric_mean, reference_brightness, tro_map, tro_scalar,
    BrightnessField, TroParams,
};
pub use solver::{
    compress, icm_pixel_update, solve, CompressOutput, SolveReport, SolverConfig, TmoParams,
    UpdateScheme,
};
