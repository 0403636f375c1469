use revfrf_transport::bus::{decode_frame, encode_frame};
use revfrf_transport::{
    DeliveryOrder, Handler, Outbox, PartyId, Primitive, SimBus, Stage, Transport, TransportError, Wire,
    FRAME_HEADER_BYTES,
};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Msg {
    Ping(u32),
    Pong(u32),
    Secret,
}

impl Wire for Msg {
    fn tag(&self) -> u8 {
        match self {
            Msg::Ping(_) => 1,
            Msg::Pong(_) => 2,
            Msg::Secret => 3,
        }
    }

    fn encode_payload(&self, out: &mut Vec<u8>) {
        match self {
            Msg::Ping(n) | Msg::Pong(n) => out.extend_from_slice(&n.to_be_bytes()),
            Msg::Secret => {}
        }
    }

    fn decode_payload(tag: u8, p: &[u8]) -> Result<Self, TransportError> {
        let num = || -> Result<u32, TransportError> {
            Ok(u32::from_be_bytes(p.try_into().map_err(|_| TransportError::Decode("bad u32".into()))?))
        };
        match tag {
            1 => Ok(Msg::Ping(num()?)),
            2 => Ok(Msg::Pong(num()?)),
            3 if p.is_empty() => Ok(Msg::Secret),
            t => Err(TransportError::Decode(format!("tag {t}"))),
        }
    }

    fn route_allowed(&self, _from: PartyId, to: PartyId) -> bool {
        !matches!(self, Msg::Secret) || to != 0
    }
}

#[derive(Default)]
struct Echo {
    seen: Vec<(PartyId, u32)>,
}

impl Handler<Msg, TransportError> for Echo {
    fn handle(&mut self, from: PartyId, msg: Msg, out: &mut Outbox<Msg>) -> Result<(), TransportError> {
        if let Msg::Ping(n) = msg {
            self.seen.push((from, n));
            out.record(Primitive::HoEnc);
            out.send(from, Msg::Pong(n));
        }
        Ok(())
    }
}

type Bus = SimBus<Msg, TransportError>;

fn bus(order: DeliveryOrder) -> Bus {
    let mut b = Bus::new(order);
    b.register_mailbox(0).unwrap();
    b.register_mailbox(5).unwrap();
    b.register_handler(1, Echo::default()).unwrap();
    b.register_handler(2, Echo::default()).unwrap();
    b
}

#[test]
fn empty_queue_delivers_nothing() {
    let mut b = bus(DeliveryOrder::SendOrder);
    assert_eq!(b.run_until_quiet().unwrap(), 0);
    assert!(b.ledger().is_empty());
}

#[test]
fn one_round_trip() {
    let mut b = bus(DeliveryOrder::SendOrder);
    b.send(0, 1, Msg::Ping(9)).unwrap();
    assert_eq!(b.deliver_round().unwrap(), 1);
    assert_eq!(b.in_flight(), 1);
    assert_eq!(b.run_until_quiet().unwrap(), 1);
    assert_eq!(b.take(0), vec![(1, Msg::Pong(9))]);
    let frame = (FRAME_HEADER_BYTES + 4) as u64;
    let cs = b.ledger().get(Stage::Construction, 0);
    let echo = b.ledger().get(Stage::Construction, 1);
    assert_eq!((cs.messages_sent, cs.bytes_sent), (1, frame));
    assert_eq!((echo.messages_sent, echo.bytes_sent, echo.ops(Primitive::HoEnc)), (1, frame, 1));
    assert_eq!(b.clock().now(), 2);
}

#[test]
fn unknown_party_is_a_routing_error() {
    let mut b = bus(DeliveryOrder::SendOrder);
    assert_eq!(b.send(0, 7, Msg::Ping(1)), Err(TransportError::UnknownParty(7)));
    assert!(b.register_mailbox(1).is_err());
}

#[test]
fn forbidden_route_is_refused_before_sending() {
    let mut b = bus(DeliveryOrder::SendOrder);
    assert!(matches!(b.send(5, 0, Msg::Secret), Err(TransportError::RouteForbidden { tag: 3, from: 5, to: 0 })));
    assert!(b.ledger().is_empty());
    b.send(0, 5, Msg::Secret).unwrap();
    b.run_until_quiet().unwrap();
    assert_eq!(b.take(5), vec![(0, Msg::Secret)]);
}

fn run(order: DeliveryOrder) -> (Vec<(PartyId, u32)>, Vec<(PartyId, u32)>, String) {
    let mut b = bus(order);
    for n in 0..20 {
        b.send(0, 1 + (n % 2) as PartyId, Msg::Ping(n)).unwrap();
        b.send(5, 1, Msg::Ping(100 + n)).unwrap();
    }
    b.set_stage(Stage::Prediction);
    b.run_until_quiet().unwrap();
    let one = b.party::<Echo>(1).unwrap().seen.clone();
    let two = b.party::<Echo>(2).unwrap().seen.clone();
    (one, two, b.ledger().to_csv_string())
}

#[test]
fn interleaving_is_replayable_and_pairwise_fifo() {
    let order = DeliveryOrder::Interleaved { seed: 17 };
    let first = run(order);
    assert_eq!(first, run(order));
    let shuffled = run(DeliveryOrder::Interleaved { seed: 18 });
    assert_ne!(first.0, shuffled.0, "different seeds should interleave differently");
    assert_ne!(first.0, run(DeliveryOrder::SendOrder).0);
    for sender in [0, 5] {
        let from_sender: Vec<u32> = first.0.iter().filter(|(f, _)| *f == sender).map(|&(_, n)| n).collect();
        let mut sorted = from_sender.clone();
        sorted.sort_unstable();
        assert_eq!(from_sender, sorted);
    }
}

#[test]
fn frames_roundtrip_and_reject_truncation() {
    let bytes = encode_frame(3, 4, &Msg::Ping(77));
    assert_eq!(decode_frame::<Msg>(&bytes).unwrap(), (3, 4, Msg::Ping(77)));
    assert!(decode_frame::<Msg>(&bytes[..bytes.len() - 1]).is_err());
    assert!(decode_frame::<Msg>(&bytes[..4]).is_err());
}

#[test]
fn party_downcast() {
    let mut b = bus(DeliveryOrder::SendOrder);
    b.party_mut::<Echo>(2).unwrap().seen.push((0, 1));
    assert_eq!(b.party::<Echo>(2).unwrap().seen.len(), 1);
    assert!(b.party::<Echo>(0).is_none());
}
