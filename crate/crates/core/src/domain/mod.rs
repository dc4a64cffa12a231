//! Shared vocabulary: dialog acts, slots, goals, tracked state and transcripts.
//!
//! Every type here is a plain value object (`Clone + Send + Sync`) with a
//! canonical JSON encoding through serde.

mod act;
mod dialog;
mod goal;
mod state;

pub use act::{Slot, SlotCategory, SlotMap, SystemAct, SystemActKind, UserAct, UserActKind};
pub use dialog::{read_transcripts, write_transcripts, Act, Dialog, NativeCategory, Speaker, Turn};
pub use goal::{Booking, ClockTime, Goal, PartialBooking, Restaurant, Subtask, Weekday};
pub use state::{goal_satisfied, BeliefSpan, DialogState, Outcome, MAX_TURNS};
