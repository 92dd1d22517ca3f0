pub mod analysis;
pub mod basis;
pub mod control;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod operators;
pub mod scenario;
pub mod units;
