//! Locality audit of the frames that crossed each link.
//!
//! Every link audits its own traffic as it is sent, so a run of any length
//! costs a few counters and a bitset per link. Raw frames are kept only when
//! asked for (to dump them to a file).

use std::collections::hash_map::DefaultHasher;
use std::hash::Hasher;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::angle::Angle;

use super::transport::{Endpoint, LinkId};
use super::wire::{read_frame, Frame};
use super::StationId;

/// A frame as it crossed a link.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrafficEntry {
    pub link: LinkId,
    pub bytes: Vec<u8>,
}

/// What one link carried.
#[derive(Debug, Clone)]
pub struct LinkAudit {
    pub link: LinkId,
    pub frames: u64,
    pub emissions: u64,
    pub outcomes: u64,
    pub settings: Vec<(StationId, Angle)>,
    pub violations: Vec<String>,
    digest: DefaultHasher,
    seen: Vec<u64>,
    raw: Option<Vec<u8>>,
}

impl LinkAudit {
    pub fn new(link: LinkId, keep_frames: bool) -> Self {
        LinkAudit {
            link,
            frames: 0,
            emissions: 0,
            outcomes: 0,
            settings: Vec::new(),
            violations: Vec::new(),
            digest: DefaultHasher::new(),
            seen: Vec::new(),
            raw: keep_frames.then(Vec::new),
        }
    }

    fn violation(&mut self, msg: String) {
        // One bad link can produce a violation per frame; keep the first few.
        if self.violations.len() < 16 {
            self.violations.push(msg);
        }
    }

    pub fn observe(&mut self, bytes: &[u8]) {
        let k = self.frames;
        self.frames += 1;
        if let Some(raw) = &mut self.raw {
            raw.push(code(self.link.from));
            raw.push(code(self.link.to));
            raw.extend_from_slice(bytes);
        }
        let frame = match Frame::decode(bytes) {
            Ok(f) => f,
            Err(e) => return self.violation(format!("{:?} frame {k}: {e}", self.link)),
        };
        let (from, to) = (self.link.from, self.link.to);
        match (from, to, frame) {
            (Endpoint::Source, Endpoint::Station(_), Frame::Emission(_)) => {
                if bytes.len() != 29 {
                    self.violation(format!("{:?} frame {k}: emission of {} bytes", self.link, bytes.len()));
                }
                self.digest.write(bytes);
                self.emissions += 1;
            }
            (Endpoint::Source, Endpoint::Station(_), Frame::End { .. }) => {}
            (Endpoint::Operator, Endpoint::Station(s), Frame::Setting { station, angle }) => {
                if station != s {
                    self.violation(format!("frame {k}: {station:?}'s setting sent to {s:?}"));
                }
                self.settings.push((station, angle));
            }
            (Endpoint::Station(s), Endpoint::Coordinator, Frame::Outcome(o)) => {
                if o.station != s {
                    self.violation(format!("frame {k}: {s:?} reported as {:?}", o.station));
                }
                let (word, bit) = ((o.index / 64) as usize, o.index % 64);
                if word >= self.seen.len() {
                    self.seen.resize(word + 1, 0);
                }
                if self.seen[word] & (1 << bit) != 0 {
                    self.violation(format!("frame {k}: second outcome for trial {} from {s:?}", o.index));
                } else {
                    self.seen[word] |= 1 << bit;
                    self.outcomes += 1;
                }
            }
            (Endpoint::Station(_), Endpoint::Coordinator, Frame::End { .. }) => {}
            (from, to, f) => self.violation(format!("frame {k}: {f:?} on forbidden link {from:?} -> {to:?}")),
        }
    }
}

fn code(e: Endpoint) -> u8 {
    match e {
        Endpoint::Source => 0,
        Endpoint::Operator => 1,
        Endpoint::Station(s) => 2 + s as u8,
        Endpoint::Coordinator => 5,
    }
}

fn endpoint(c: u8) -> Option<Endpoint> {
    Some(match c {
        0 => Endpoint::Source,
        1 => Endpoint::Operator,
        2..=4 => Endpoint::Station(StationId::from_u8(c - 2).ok()?),
        5 => Endpoint::Coordinator,
        _ => return None,
    })
}

/// Collects the audits of every link that finished cleanly.
#[derive(Debug, Clone, Default)]
pub struct TrafficLog {
    links: Arc<Mutex<Vec<LinkAudit>>>,
    keep_frames: bool,
}

impl TrafficLog {
    pub fn new(keep_frames: bool) -> Self {
        TrafficLog {
            links: Arc::default(),
            keep_frames,
        }
    }

    pub fn audit_for(&self, link: LinkId) -> LinkAudit {
        LinkAudit::new(link, self.keep_frames)
    }

    pub fn submit(&self, audit: LinkAudit) {
        self.links.lock().expect("traffic log poisoned").push(audit);
    }

    fn sorted(&self) -> Vec<LinkAudit> {
        let mut v = self.links.lock().expect("traffic log poisoned").clone();
        v.sort_by_key(|a| (code(a.link.from), code(a.link.to)));
        v
    }

    pub fn audit(&self, settings: [Angle; 3]) -> TrafficAudit {
        merge(&self.sorted(), settings)
    }

    /// Recorded frames, grouped by link. Empty unless frames were kept.
    pub fn entries(&self) -> Vec<TrafficEntry> {
        let mut out = Vec::new();
        for a in self.sorted() {
            if let Some(raw) = &a.raw {
                out.extend(parse_dump(raw).expect("recorded frames are well formed"));
            }
        }
        out
    }

    /// Writes `[from: u8][to: u8][frame bytes]` per frame, links in a fixed
    /// order. Endpoint codes: 0 source, 1 operator, 2..4 stations A..C,
    /// 5 coordinator.
    pub fn dump(&self, path: &Path) -> std::io::Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        for a in self.sorted() {
            if let Some(raw) = &a.raw {
                w.write_all(raw)?;
            }
        }
        w.flush()
    }
}

/// Reads a file written by [`TrafficLog::dump`].
pub fn load_dump(path: &Path) -> std::io::Result<Vec<TrafficEntry>> {
    parse_dump(&std::fs::read(path)?)
}

fn parse_dump(data: &[u8]) -> std::io::Result<Vec<TrafficEntry>> {
    let bad = |m: &str| std::io::Error::new(std::io::ErrorKind::InvalidData, m.to_string());
    let mut cur = std::io::Cursor::new(data);
    let mut out = Vec::new();
    while (cur.position() as usize) < data.len() {
        let at = cur.position() as usize;
        if at + 2 > data.len() {
            return Err(bad("truncated link header"));
        }
        let from = endpoint(data[at]).ok_or_else(|| bad("bad endpoint"))?;
        let to = endpoint(data[at + 1]).ok_or_else(|| bad("bad endpoint"))?;
        cur.set_position(at as u64 + 2);
        let bytes = read_frame(&mut cur)?.ok_or_else(|| bad("truncated frame"))?;
        out.push(TrafficEntry {
            link: LinkId { from, to },
            bytes,
        });
    }
    Ok(out)
}

/// Result of checking traffic against the locality rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficAudit {
    pub passed: bool,
    pub frames: u64,
    pub emissions_per_station: [u64; 3],
    pub outcomes_per_station: [u64; 3],
    pub violations: Vec<String>,
}

/// Checks recorded traffic: only the allowed links exist, each carries only
/// its own kind of frame, every setting reaches its own station and no
/// other, every station sees byte-identical emissions, and each
/// `(trial, station)` pair has exactly one outcome.
pub fn audit_traffic(entries: &[TrafficEntry], settings: [Angle; 3]) -> TrafficAudit {
    let mut links: Vec<LinkAudit> = Vec::new();
    for e in entries {
        let a = match links.iter_mut().position(|a| a.link == e.link) {
            Some(i) => &mut links[i],
            None => {
                links.push(LinkAudit::new(e.link, false));
                links.last_mut().unwrap()
            }
        };
        a.observe(&e.bytes);
    }
    merge(&links, settings)
}

fn merge(links: &[LinkAudit], settings: [Angle; 3]) -> TrafficAudit {
    let mut violations: Vec<String> = links.iter().flat_map(|a| a.violations.iter().cloned()).collect();
    let mut emissions = [0u64; 3];
    let mut outcomes = [0u64; 3];
    let mut digests: [Option<u64>; 3] = [None; 3];
    let mut got_settings: [Vec<Angle>; 3] = Default::default();
    for a in links {
        match (a.link.from, a.link.to) {
            (Endpoint::Source, Endpoint::Station(s)) => {
                emissions[s as usize] += a.emissions;
                digests[s as usize] = Some(a.digest.finish());
            }
            (Endpoint::Operator, Endpoint::Station(s)) => {
                got_settings[s as usize].extend(a.settings.iter().map(|&(_, angle)| angle));
            }
            (Endpoint::Station(s), Endpoint::Coordinator) => outcomes[s as usize] += a.outcomes,
            (from, to) if a.frames > 0 => violations.push(format!("traffic on forbidden link {from:?} -> {to:?}")),
            _ => {}
        }
    }
    for s in StationId::ALL {
        let i = s as usize;
        match got_settings[i].as_slice() {
            [angle] if *angle == settings[i] => {}
            [angle] => violations.push(format!("{s:?} got setting {angle}, expected {}", settings[i])),
            other => violations.push(format!("{s:?} received {} settings", other.len())),
        }
        if outcomes[i] != emissions[i] {
            violations.push(format!("{s:?}: {} outcomes for {} emissions", outcomes[i], emissions[i]));
        }
    }
    if digests[0] != digests[1] || digests[0] != digests[2] || emissions[0] != emissions[1] || emissions[0] != emissions[2] {
        violations.push("stations saw different emission streams".into());
    }
    TrafficAudit {
        passed: violations.is_empty(),
        frames: links.iter().map(|a| a.frames).sum(),
        emissions_per_station: emissions,
        outcomes_per_station: outcomes,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_round_trip() {
        let log = TrafficLog::new(true);
        let link = LinkId {
            from: Endpoint::Station(StationId::C),
            to: Endpoint::Coordinator,
        };
        let mut a = log.audit_for(link);
        a.observe(&Frame::End { count: 7 }.encode());
        log.submit(a);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("traffic.bin");
        log.dump(&p).unwrap();
        let back = load_dump(&p).unwrap();
        assert_eq!(back, log.entries());
        assert_eq!(back.len(), 1);
    }

    #[test]
    fn flags_garbage_frames() {
        let link = LinkId {
            from: Endpoint::Source,
            to: Endpoint::Station(StationId::A),
        };
        let mut a = LinkAudit::new(link, false);
        a.observe(&[3, 0, 0, 0, 9, 9, 9]);
        assert_eq!(a.violations.len(), 1);
    }
}
