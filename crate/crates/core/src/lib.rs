pub mod cli;
pub mod extalg4;
pub mod maps4d;
pub mod scene;
pub mod smooth1d;
pub mod verifier;
