pub mod boundary;
pub mod cli;
pub mod discretize;
pub mod linalg;
pub mod operator;
pub mod scenario;
pub mod spectralflow;
pub mod suite;
pub mod symbol;
pub mod topology;

pub use linalg::CMatrix;
