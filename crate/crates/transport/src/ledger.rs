use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use crate::{PartyId, TransportError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    Construction,
    Prediction,
    Revocation,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::Construction, Stage::Prediction, Stage::Revocation];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Construction => "construction",
            Stage::Prediction => "prediction",
            Stage::Revocation => "revocation",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Primitive {
    HoEnc,
    HReEnc,
    HEncRef,
    ParHDec1,
    ParHDec2,
    HoAdd,
    HoLT,
}

impl Primitive {
    pub const ALL: [Primitive; 7] = [
        Primitive::HoEnc,
        Primitive::HReEnc,
        Primitive::HEncRef,
        Primitive::ParHDec1,
        Primitive::ParHDec2,
        Primitive::HoAdd,
        Primitive::HoLT,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Primitive::HoEnc => "HoEnc",
            Primitive::HReEnc => "HReEnc",
            Primitive::HEncRef => "HEncRef",
            Primitive::ParHDec1 => "ParHDec1",
            Primitive::ParHDec2 => "ParHDec2",
            Primitive::HoAdd => "HoAdd",
            Primitive::HoLT => "HoLT",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Counters for one party within one stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub messages_sent: u64,
    pub bytes_sent: u64,
    ops: [u64; 7],
}

impl Counters {
    pub fn ops(&self, p: Primitive) -> u64 {
        self.ops[p.index()]
    }

    pub fn total_ops(&self) -> u64 {
        self.ops.iter().sum()
    }

    fn absorb(&mut self, other: &Counters) {
        self.messages_sent += other.messages_sent;
        self.bytes_sent += other.bytes_sent;
        for (a, b) in self.ops.iter_mut().zip(other.ops) {
            *a += b;
        }
    }
}

/// One row of the exported table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerRow {
    pub stage: Stage,
    pub party: PartyId,
    pub metric: &'static str,
    pub value: u64,
}

/// Per-stage, per-party message, byte and primitive counts. Counters only
/// ever grow.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CostLedger {
    entries: BTreeMap<(Stage, PartyId), Counters>,
}

impl CostLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record_message(&mut self, stage: Stage, party: PartyId, bytes: usize) {
        let c = self.entries.entry((stage, party)).or_default();
        c.messages_sent += 1;
        c.bytes_sent += bytes as u64;
    }

    pub fn record_op(&mut self, stage: Stage, party: PartyId, op: Primitive, count: u64) {
        self.entries.entry((stage, party)).or_default().ops[op.index()] += count;
    }

    pub fn get(&self, stage: Stage, party: PartyId) -> Counters {
        self.entries.get(&(stage, party)).copied().unwrap_or_default()
    }

    /// Sum over every party in one stage.
    pub fn stage_total(&self, stage: Stage) -> Counters {
        let mut total = Counters::default();
        for ((s, _), c) in &self.entries {
            if *s == stage {
                total.absorb(c);
            }
        }
        total
    }

    pub fn parties(&self) -> Vec<PartyId> {
        let mut ids: Vec<PartyId> = self.entries.keys().map(|&(_, p)| p).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn is_empty(&self) -> bool {
        self.entries.values().all(|c| *c == Counters::default())
    }

    pub fn merge(&mut self, other: &CostLedger) {
        for (k, c) in &other.entries {
            self.entries.entry(*k).or_default().absorb(c);
        }
    }

    /// The difference `self − earlier`, for measuring one phase of a run.
    /// `earlier` must be a previous snapshot of this ledger.
    pub fn since(&self, earlier: &CostLedger) -> CostLedger {
        let mut out = CostLedger::new();
        for (k, c) in &self.entries {
            let e = earlier.entries.get(k).copied().unwrap_or_default();
            let mut d = Counters {
                messages_sent: c.messages_sent - e.messages_sent,
                bytes_sent: c.bytes_sent - e.bytes_sent,
                ops: [0; 7],
            };
            for i in 0..7 {
                d.ops[i] = c.ops[i] - e.ops[i];
            }
            out.entries.insert(*k, d);
        }
        out
    }

    /// Every counter of every party that appeared in the stage, in a fixed
    /// order: messages, bytes, then the primitives.
    pub fn report(&self) -> Vec<LedgerRow> {
        let mut rows = Vec::new();
        for (&(stage, party), c) in &self.entries {
            rows.push(LedgerRow { stage, party, metric: "messages_sent", value: c.messages_sent });
            rows.push(LedgerRow { stage, party, metric: "bytes_sent", value: c.bytes_sent });
            for p in Primitive::ALL {
                rows.push(LedgerRow { stage, party, metric: p.name(), value: c.ops(p) });
            }
        }
        rows
    }

    /// `stage,party,metric,value` CSV.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), TransportError> {
        let mut w = csv::Writer::from_writer(writer);
        let err = |e: csv::Error| TransportError::Export(e.to_string());
        w.write_record(["stage", "party", "metric", "value"]).map_err(err)?;
        for row in self.report() {
            w.write_record([row.stage.name(), &row.party.to_string(), row.metric, &row.value.to_string()])
                .map_err(err)?;
        }
        w.flush().map_err(|e| TransportError::Export(e.to_string()))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}
