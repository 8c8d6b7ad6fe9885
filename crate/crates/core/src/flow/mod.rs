//! Reaction part of the curvature evolution: Hamilton's ODE on curvature
//! operators with the Laplacian dropped.
//!
//! Only the reaction ODE is integrated here. It is the object the maximum
//! principle reduces cone preservation to; nothing in this module solves the
//! PDE, so a preserved cone here says nothing by itself about a Ricci flow.

mod integrate;
mod rhs;

pub use integrate::{
    integrate3, integrate4, BlowUpTrigger, Controls, FlowState, FlowStatus, FlowSystem, ReactionTrajectory,
};
pub use rhs::{monitor_functionals, monitors3, reaction_rhs3, reaction_rhs4, sharp, Monitors, CHANNELS_3, CHANNELS_4};
