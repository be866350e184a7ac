pub mod error;
pub mod jets;
pub mod models;
pub mod spectral;
pub mod expansion;
pub mod oracle;
pub mod evaluate;
pub mod cli;
