//! Experiment test beds producing streams of [`Transition`](crate::Transition)s.

pub mod gridworld;
pub mod mountain_car;
pub mod nonstat;
pub mod policy;
pub mod tiles;

pub use gridworld::{gridworld_mrp, GridworldStream};
pub use mountain_car::{mountain_car_step, MountainCarState, MountainCarStream, Throttle};
pub use nonstat::{NonstatSpec, NonstatStream};
pub use policy::{train_sarsa_policy, train_sarsa_policy_with, Policy, SarsaSettings};
pub use tiles::{tile_code, TileCoderConfig, Tiling};
