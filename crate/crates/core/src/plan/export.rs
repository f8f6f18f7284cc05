use std::fmt::Write;

use super::{FramePlan, Link};

/// One row per (slot, transmitter) with the coherence block of every link.
///
/// Single-relay plans use `block_sr`/`block_rd`; with several relays the
/// columns are numbered `block_sr_1`, `block_rd_1`, and so on. Links that are
/// unused or never change report block 0.
pub fn plan_csv(p: &FramePlan) -> String {
    let k = p.activation.len();
    let mut columns = vec![Link::SourceDestination];
    let mut header = String::from("slot,transmitter,role,block_sd");
    for i in 0..k {
        columns.push(Link::SourceRelay(i));
        columns.push(Link::RelayDestination(i));
        if k == 1 {
            header.push_str(",block_sr,block_rd");
        } else {
            let _ = write!(header, ",block_sr_{0},block_rd_{0}", i + 1);
        }
    }
    let mut out = header;
    out.push('\n');
    for t in 0..p.super_interval {
        let blocks: Vec<String> = columns
            .iter()
            .map(|&l| p.link(l).map_or(0, |l| l.cyclic_block(t, p.super_interval)).to_string())
            .collect();
        let blocks = blocks.join(",");
        for (tx, role) in p.roles[t as usize].iter().enumerate() {
            let name = match tx {
                0 => "source".to_string(),
                _ if k == 1 => "relay".to_string(),
                _ => format!("relay_{tx}"),
            };
            let _ = writeln!(out, "{t},{name},{},{blocks}", role.name());
        }
    }
    out
}
