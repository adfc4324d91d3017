pub mod dynamics;
pub mod environment;
pub mod error;
pub mod extended;
pub mod heom;
pub mod linalg;
pub mod plot;
pub mod pseudomode;
mod quad;
pub mod scenario;
pub mod spectral;
