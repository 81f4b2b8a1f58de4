//! Selberg, Ihara and intermediate zeta functions of degenerating Schottky families.

pub mod cli;
pub mod freegroup;
pub mod graphzeta;
pub mod intermediate;
pub mod laurent;
pub mod numeric;
pub mod schottky;
pub mod selberg;
pub mod zeros;
