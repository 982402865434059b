//! Multiuser diversity in interweaved cognitive radio networks.
//!
//! A secondary network of `N` transmitters shares a primary user's band,
//! transmitting only when its (imperfect) spectrum sensing declares the band
//! free. Missed detections interfere with the primary, so each secondary
//! transmitter caps its power to keep the primary's packet departure rate
//! above a QoS floor `μ_min`. This crate provides:
//!
//! - [`specfun`]: Lambert W and exponential integral evaluations.
//! - [`model`]: parameters, outage/departure rates and the power control law.
//! - [`sched`]: the max-SNR, two-stage and genie selection rules.
//! - [`montecarlo`]: seeded, thread-count-independent slot simulation.
//! - [`closedform`]: the asymptotic capacity bounds and `k·log2(ln N)` constants.

pub mod closedform;
pub mod model;
pub mod montecarlo;
pub mod sched;
pub mod specfun;

pub use closedform::{BoundCurve, BoundTerms, ClosedFormError, UnsaturatedProbability};
pub use model::{ChannelDraw, ParamError, ParamSet, SystemParams};
pub use montecarlo::{CapacityBreakdown, CapacityEstimate, OccupancyMode, QueueReport, SlotOutcome};
pub use sched::{Branch, ScheduleDecision, Scheduler};
pub use specfun::{SpecialError, Tolerance};
