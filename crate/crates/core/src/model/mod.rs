//! Agents, outcomes, monotone orders, profiles and assignments.

mod assignment;
mod enumerate;
mod order;
mod profile;
mod threshold;

pub use assignment::{all_assignments, assignment_count, Assignment};
pub(crate) use enumerate::order_from_sequence;
pub use enumerate::{enumerate_monotone_orders, monotone_order_count, MonotoneOrders, DEFAULT_CAP};
pub use order::{validate_order, Alternative, OrderViolation, Outcome, PreferenceOrder};
pub use profile::{default_labels, induced_preference_over_assignments, Profile};
pub use threshold::{expand_threshold, ThresholdPreference};
