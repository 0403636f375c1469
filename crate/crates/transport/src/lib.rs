//! In-process message bus with per-party cost accounting.

pub mod bus;
mod error;
pub mod ledger;

pub use bus::{DeliveryOrder, Handler, Outbox, SimBus, SimClock, Transport, Wire, FRAME_HEADER_BYTES};
pub use error::TransportError;
pub use ledger::{CostLedger, Counters, LedgerRow, Primitive, Stage};

pub type PartyId = u16;
