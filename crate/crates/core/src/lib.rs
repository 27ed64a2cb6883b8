//! Kneading maps, cutting times, the cutting-time odometer, and rigorous
//! tent-map numerics on the Hofbauer tower.

pub mod certify;
pub mod checks;
pub mod config;
pub mod cutting;
pub mod error;
pub mod hofbauer;
pub mod interval;
pub mod map;
pub mod odometer;
pub mod report;
pub mod symbols;

pub use error::{Error, Result};
pub use map::{KneadingMap, Tail};
