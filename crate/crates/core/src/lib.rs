//! Neuroevolution of gait-modulating controllers for a planar snake robot.
//!
//! A NEAT population evolves feed-forward networks that read a down-sampled
//! LiDAR scan and set the frequency and steering offset of a serpenoid gait.

pub mod codec;
pub mod config;
pub mod episode;
pub mod evolution;
pub mod fitness;
pub mod gait;
pub mod genome;
pub mod network;
pub mod world;
pub mod svg;
pub mod trainer;
