pub mod analysis;
pub mod dd;
pub mod error;
pub mod fading;
pub mod link;
pub mod montecarlo;
pub mod selection;
