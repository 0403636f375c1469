use std::any::Any;
use std::collections::{BTreeMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ledger::{CostLedger, Primitive, Stage};
use crate::{PartyId, TransportError};

/// `tag (1) ‖ sender (2) ‖ receiver (2) ‖ payload length (4)`.
pub const FRAME_HEADER_BYTES: usize = 9;

/// A message type that can cross the bus.
pub trait Wire: Sized {
    fn tag(&self) -> u8;
    fn encode_payload(&self, out: &mut Vec<u8>);
    fn decode_payload(tag: u8, payload: &[u8]) -> Result<Self, TransportError>;

    /// Whether this message may travel from `from` to `to`; checked on send.
    fn route_allowed(&self, _from: PartyId, _to: PartyId) -> bool {
        true
    }
}

pub fn encode_frame<M: Wire>(from: PartyId, to: PartyId, msg: &M) -> Vec<u8> {
    let mut payload = Vec::new();
    msg.encode_payload(&mut payload);
    let mut out = Vec::with_capacity(FRAME_HEADER_BYTES + payload.len());
    out.push(msg.tag());
    out.extend_from_slice(&from.to_be_bytes());
    out.extend_from_slice(&to.to_be_bytes());
    out.extend_from_slice(&(payload.len() as u32).to_be_bytes());
    out.extend_from_slice(&payload);
    out
}

pub fn decode_frame<M: Wire>(bytes: &[u8]) -> Result<(PartyId, PartyId, M), TransportError> {
    if bytes.len() < FRAME_HEADER_BYTES {
        return Err(TransportError::Decode(format!("{}-byte frame is shorter than its header", bytes.len())));
    }
    let tag = bytes[0];
    let from = u16::from_be_bytes([bytes[1], bytes[2]]);
    let to = u16::from_be_bytes([bytes[3], bytes[4]]);
    let len = u32::from_be_bytes([bytes[5], bytes[6], bytes[7], bytes[8]]) as usize;
    let payload = &bytes[FRAME_HEADER_BYTES..];
    if payload.len() != len {
        return Err(TransportError::Decode(format!("header says {len} payload bytes, frame has {}", payload.len())));
    }
    Ok((from, to, M::decode_payload(tag, payload)?))
}

/// Messages and primitive invocations produced while handling one message.
#[derive(Debug)]
pub struct Outbox<M> {
    me: PartyId,
    sends: Vec<(PartyId, M)>,
    ops: Vec<(Primitive, u64)>,
}

impl<M> Outbox<M> {
    pub fn new(me: PartyId) -> Self {
        Self { me, sends: Vec::new(), ops: Vec::new() }
    }

    pub fn me(&self) -> PartyId {
        self.me
    }

    pub fn send(&mut self, to: PartyId, msg: M) {
        self.sends.push((to, msg));
    }

    pub fn record(&mut self, op: Primitive) {
        self.record_n(op, 1);
    }

    pub fn record_n(&mut self, op: Primitive, n: u64) {
        self.ops.push((op, n));
    }
}

/// A party driven by incoming messages.
pub trait Handler<M, E>: Any {
    fn handle(&mut self, from: PartyId, msg: M, out: &mut Outbox<M>) -> Result<(), E>;
}

/// The interface protocol drivers use; a networked backend would implement
/// the same calls.
pub trait Transport<M> {
    type Error;

    fn send(&mut self, from: PartyId, to: PartyId, msg: M) -> Result<(), Self::Error>;
    /// Delivers until no messages are in flight; returns how many were delivered.
    fn run_until_quiet(&mut self) -> Result<usize, Self::Error>;
    /// Drains a mailbox endpoint.
    fn take(&mut self, party: PartyId) -> Vec<(PartyId, M)>;
    fn record_op(&mut self, party: PartyId, op: Primitive, count: u64);
    fn set_stage(&mut self, stage: Stage);
    fn ledger(&self) -> &CostLedger;
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimClock {
    step: u64,
}

impl SimClock {
    pub fn now(&self) -> u64 {
        self.step
    }

    fn tick(&mut self) {
        self.step += 1;
    }
}

/// Order in which one round's frames are delivered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeliveryOrder {
    /// Global send order.
    SendOrder,
    /// A seeded interleaving that keeps each (sender, receiver) pair FIFO.
    Interleaved { seed: u64 },
}

enum Endpoint<M, E> {
    Handler(Box<dyn Handler<M, E>>),
    Mailbox(VecDeque<(PartyId, M)>),
}

struct Frame {
    from: PartyId,
    to: PartyId,
    bytes: Vec<u8>,
}

/// Single-threaded deterministic bus. Every message is serialized on send
/// and decoded on delivery, so byte counts are those of the real encoding.
pub struct SimBus<M, E> {
    parties: BTreeMap<PartyId, Option<Endpoint<M, E>>>,
    queue: Vec<Frame>,
    ledger: CostLedger,
    stage: Stage,
    clock: SimClock,
    order: DeliveryOrder,
    rng: ChaCha8Rng,
    max_rounds: usize,
}

impl<M, E> SimBus<M, E>
where
    M: Wire + 'static,
    E: From<TransportError> + 'static,
{
    pub fn new(order: DeliveryOrder) -> Self {
        let seed = match order {
            DeliveryOrder::Interleaved { seed } => seed,
            DeliveryOrder::SendOrder => 0,
        };
        Self {
            parties: BTreeMap::new(),
            queue: Vec::new(),
            ledger: CostLedger::new(),
            stage: Stage::Construction,
            clock: SimClock::default(),
            order,
            rng: ChaCha8Rng::seed_from_u64(seed),
            max_rounds: 1_000_000,
        }
    }

    fn register(&mut self, id: PartyId, endpoint: Endpoint<M, E>) -> Result<(), TransportError> {
        if self.parties.contains_key(&id) {
            return Err(TransportError::DuplicateParty(id));
        }
        self.parties.insert(id, Some(endpoint));
        Ok(())
    }

    pub fn register_handler(&mut self, id: PartyId, handler: impl Handler<M, E>) -> Result<(), TransportError> {
        self.register(id, Endpoint::Handler(Box::new(handler)))
    }

    /// A passive endpoint whose messages are collected with [`Transport::take`].
    pub fn register_mailbox(&mut self, id: PartyId) -> Result<(), TransportError> {
        self.register(id, Endpoint::Mailbox(VecDeque::new()))
    }

    pub fn is_registered(&self, id: PartyId) -> bool {
        self.parties.contains_key(&id)
    }

    pub fn party<H: Handler<M, E>>(&self, id: PartyId) -> Option<&H> {
        match self.parties.get(&id)?.as_ref()? {
            Endpoint::Handler(h) => (h.as_ref() as &dyn Any).downcast_ref::<H>(),
            Endpoint::Mailbox(_) => None,
        }
    }

    pub fn party_mut<H: Handler<M, E>>(&mut self, id: PartyId) -> Option<&mut H> {
        match self.parties.get_mut(&id)?.as_mut()? {
            Endpoint::Handler(h) => (h.as_mut() as &mut dyn Any).downcast_mut::<H>(),
            Endpoint::Mailbox(_) => None,
        }
    }

    pub fn clock(&self) -> SimClock {
        self.clock
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn in_flight(&self) -> usize {
        self.queue.len()
    }

    pub fn ledger_mut(&mut self) -> &mut CostLedger {
        &mut self.ledger
    }

    fn enqueue(&mut self, from: PartyId, to: PartyId, msg: &M) -> Result<(), TransportError> {
        if !self.parties.contains_key(&to) {
            return Err(TransportError::UnknownParty(to));
        }
        if !self.parties.contains_key(&from) {
            return Err(TransportError::UnknownParty(from));
        }
        if !msg.route_allowed(from, to) {
            return Err(TransportError::RouteForbidden { tag: msg.tag(), from, to });
        }
        let bytes = encode_frame(from, to, msg);
        self.ledger.record_message(self.stage, from, bytes.len());
        self.queue.push(Frame { from, to, bytes });
        Ok(())
    }

    fn schedule(&mut self, frames: Vec<Frame>) -> Vec<Frame> {
        match self.order {
            DeliveryOrder::SendOrder => frames,
            DeliveryOrder::Interleaved { .. } => {
                let mut pairs: Vec<((PartyId, PartyId), VecDeque<Frame>)> = Vec::new();
                for f in frames {
                    let key = (f.from, f.to);
                    match pairs.iter_mut().find(|(k, _)| *k == key) {
                        Some((_, q)) => q.push_back(f),
                        None => pairs.push((key, VecDeque::from([f]))),
                    }
                }
                let mut out = Vec::new();
                while !pairs.is_empty() {
                    let i = self.rng.gen_range(0..pairs.len());
                    out.push(pairs[i].1.pop_front().expect("pairs are nonempty"));
                    if pairs[i].1.is_empty() {
                        pairs.remove(i);
                    }
                }
                out
            }
        }
    }

    /// Delivers every message queued before the call. Messages sent by
    /// handlers during the round wait for the next one.
    pub fn deliver_round(&mut self) -> Result<usize, E> {
        let frames = std::mem::take(&mut self.queue);
        let frames = self.schedule(frames);
        let count = frames.len();
        for frame in frames {
            self.clock.tick();
            let (from, to, msg) = decode_frame::<M>(&frame.bytes)?;
            debug_assert_eq!((from, to), (frame.from, frame.to));
            let slot = self.parties.get_mut(&to).ok_or(TransportError::UnknownParty(to))?;
            match slot.as_mut().expect("endpoint present between deliveries") {
                Endpoint::Mailbox(q) => q.push_back((from, msg)),
                Endpoint::Handler(_) => {
                    let Some(Endpoint::Handler(mut handler)) = slot.take() else { unreachable!() };
                    let mut out = Outbox::new(to);
                    let result = handler.handle(from, msg, &mut out);
                    self.parties.insert(to, Some(Endpoint::Handler(handler)));
                    result?;
                    for (op, n) in out.ops {
                        self.ledger.record_op(self.stage, to, op, n);
                    }
                    for (dest, m) in out.sends {
                        self.enqueue(to, dest, &m)?;
                    }
                }
            }
        }
        Ok(count)
    }
}

impl<M, E> Transport<M> for SimBus<M, E>
where
    M: Wire + 'static,
    E: From<TransportError> + 'static,
{
    type Error = E;

    fn send(&mut self, from: PartyId, to: PartyId, msg: M) -> Result<(), E> {
        Ok(self.enqueue(from, to, &msg)?)
    }

    fn run_until_quiet(&mut self) -> Result<usize, E> {
        let mut total = 0;
        for _ in 0..self.max_rounds {
            if self.queue.is_empty() {
                return Ok(total);
            }
            total += self.deliver_round()?;
        }
        Err(TransportError::NoQuiescence(self.max_rounds).into())
    }

    fn take(&mut self, party: PartyId) -> Vec<(PartyId, M)> {
        match self.parties.get_mut(&party) {
            Some(Some(Endpoint::Mailbox(q))) => q.drain(..).collect(),
            _ => Vec::new(),
        }
    }

    fn record_op(&mut self, party: PartyId, op: Primitive, count: u64) {
        self.ledger.record_op(self.stage, party, op, count);
    }

    fn set_stage(&mut self, stage: Stage) {
        self.stage = stage;
    }

    fn ledger(&self) -> &CostLedger {
        &self.ledger
    }
}
