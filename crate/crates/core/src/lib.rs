pub mod archive;
pub mod brics;
pub mod chem;
pub mod encoder;
pub mod hier;
pub mod smarts;
pub mod vq;
pub mod tokens;
pub mod datagen;
pub mod eval;
pub mod config;
pub mod cli;
