//! Abelian sandpiles on the integer grid with uniform neighborhoods.

pub mod dynamics;
pub mod firing_graph;
pub mod geometry;
pub mod grid;
pub mod synthesis;
pub mod verify;

pub use dynamics::{stabilize, stabilize_sequential, DynamicsError, Odometer};
pub use grid::{Configuration, GridPoint, MovementVector, Neighborhood, Rect};
