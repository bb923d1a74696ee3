pub mod cli;
pub mod dynamics;
pub mod experiments;
pub mod io;
pub mod model;
pub mod noise;
pub mod spectral;

#[cfg(test)]
pub(crate) mod testing;
