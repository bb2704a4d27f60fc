//! Wire formats for branch leaves and sampled counts.

use serde::Serialize;

use crate::equivalence::fq_to_fock;
use crate::error::Result;
use crate::exec::{BranchOutcome, DetectorRecord, SampleCounts};
use crate::firstq::FirstQState;
use crate::fock::FockVector;

/// One serialized leaf: `{"record": {...}, "p": float, "state": [...]}`.
#[derive(Clone, Debug, Serialize)]
pub struct LeafRecord {
    pub record: DetectorRecord,
    pub p: f64,
    pub state: FockVector,
}

pub fn fock_leaves(leaves: &[BranchOutcome<FockVector>]) -> Vec<LeafRecord> {
    leaves
        .iter()
        .map(|l| LeafRecord {
            record: l.record.clone(),
            p: l.probability,
            state: l.state.clone(),
        })
        .collect()
}

/// First-quantized leaves mapped to the occupation basis so both engines
/// produce directly diffable output.
pub fn firstq_leaves(leaves: &[BranchOutcome<FirstQState>]) -> Result<Vec<LeafRecord>> {
    leaves
        .iter()
        .map(|l| {
            Ok(LeafRecord {
                record: l.record.clone(),
                p: l.probability,
                state: fq_to_fock(&l.state)?,
            })
        })
        .collect()
}

pub fn leaves_json(leaves: &[LeafRecord]) -> String {
    serde_json::to_string_pretty(leaves).expect("leaf serialization is infallible")
}

/// Tab-separated `record<TAB>probability` summary, one leaf per line.
pub fn leaves_tsv(leaves: &[LeafRecord]) -> String {
    let mut out = String::from("record\tp\n");
    for leaf in leaves {
        out.push_str(&format!("{}\t{:.12}\n", record_label(&leaf.record), leaf.p));
    }
    out
}

#[derive(Serialize)]
struct CountEntry<'a> {
    record: &'a DetectorRecord,
    count: u64,
}

#[derive(Serialize)]
struct CountsDoc<'a> {
    seed: u64,
    shots: u64,
    counts: Vec<CountEntry<'a>>,
}

pub fn counts_json(counts: &SampleCounts) -> String {
    let doc = CountsDoc {
        seed: counts.seed,
        shots: counts.shots,
        counts: counts
            .counts
            .iter()
            .map(|(record, count)| CountEntry {
                record,
                count: *count,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("count serialization is infallible")
}

pub fn counts_tsv(counts: &SampleCounts) -> String {
    let mut out = String::from("record\tcount\tfrequency\n");
    for (record, n) in &counts.counts {
        out.push_str(&format!(
            "{}\t{}\t{:.6}\n",
            record_label(record),
            n,
            *n as f64 / counts.shots as f64
        ));
    }
    out
}

/// `D1=2,D2=0`, or `-` for an empty record.
pub fn record_label(record: &DetectorRecord) -> String {
    if record.is_empty() {
        return "-".into();
    }
    record
        .iter()
        .map(|(id, k)| format!("{id}={k}"))
        .collect::<Vec<_>>()
        .join(",")
}
