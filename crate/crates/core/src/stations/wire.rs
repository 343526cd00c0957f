//! Binary frame format shared by every transport.
//!
//! Each frame is a little-endian `u32` length (covering the tag byte and the
//! body), a one-byte tag, then the body:
//!
//! | tag | frame    | body                                               |
//! |-----|----------|----------------------------------------------------|
//! | 1   | Setting  | `station: u8`, `angle: f64`                        |
//! | 2   | Emission | `index: u64`, `omega: f64`, `eta: f64`             |
//! | 3   | Outcome  | `index: u64`, `station: u8`, `outcome: i8`         |
//! | 4   | End      | `count: u64`                                       |
//!
//! All integers and floats are little-endian. An emission carries no field
//! that could hold a setting.

use std::io::{self, Read, Write};

use crate::angle::Angle;
use crate::lhv::HiddenConfig;

use super::{EmissionMessage, StationError, StationId, StationOutcome};

pub const TAG_SETTING: u8 = 1;
pub const TAG_EMISSION: u8 = 2;
pub const TAG_OUTCOME: u8 = 3;
pub const TAG_END: u8 = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Frame {
    /// Operator to station: that station's own setting.
    Setting { station: StationId, angle: Angle },
    Emission(EmissionMessage),
    Outcome(StationOutcome),
    /// Closes a stream after `count` trials.
    End { count: u64 },
}

impl Frame {
    pub fn encode(&self) -> Vec<u8> {
        let mut body = Vec::with_capacity(26);
        match *self {
            Frame::Setting { station, angle } => {
                body.push(TAG_SETTING);
                body.push(station as u8);
                body.extend_from_slice(&angle.value().to_le_bytes());
            }
            Frame::Emission(e) => {
                body.push(TAG_EMISSION);
                body.extend_from_slice(&e.index.to_le_bytes());
                body.extend_from_slice(&e.hidden.omega.value().to_le_bytes());
                body.extend_from_slice(&e.hidden.eta.value().to_le_bytes());
            }
            Frame::Outcome(o) => {
                body.push(TAG_OUTCOME);
                body.extend_from_slice(&o.index.to_le_bytes());
                body.push(o.station as u8);
                body.push(o.outcome as u8);
            }
            Frame::End { count } => {
                body.push(TAG_END);
                body.extend_from_slice(&count.to_le_bytes());
            }
        }
        let mut out = Vec::with_capacity(body.len() + 4);
        out.extend_from_slice(&(body.len() as u32).to_le_bytes());
        out.extend_from_slice(&body);
        out
    }

    /// Decodes one frame from `bytes` (length prefix included).
    pub fn decode(bytes: &[u8]) -> Result<Frame, StationError> {
        if bytes.len() < 5 {
            return Err(StationError::Malformed("frame shorter than header".into()));
        }
        let len = u32::from_le_bytes(bytes[..4].try_into().unwrap()) as usize;
        if bytes.len() != len + 4 {
            return Err(StationError::Malformed(format!(
                "length prefix {len} does not match {} body bytes",
                bytes.len() - 4
            )));
        }
        decode_body(&bytes[4..])
    }
}

fn u64_at(b: &[u8], at: usize) -> u64 {
    u64::from_le_bytes(b[at..at + 8].try_into().unwrap())
}

fn f64_at(b: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(b[at..at + 8].try_into().unwrap())
}

fn canonical(x: f64, what: &str) -> Result<Angle, StationError> {
    let a = Angle::new(x).map_err(|e| StationError::Malformed(format!("{what}: {e}")))?;
    if a.value() != x {
        return Err(StationError::Malformed(format!("{what} {x} is not canonical")));
    }
    Ok(a)
}

fn decode_body(b: &[u8]) -> Result<Frame, StationError> {
    let want = |n: usize| {
        if b.len() == n {
            Ok(())
        } else {
            Err(StationError::Malformed(format!(
                "tag {} expects {n} bytes, got {}",
                b[0],
                b.len()
            )))
        }
    };
    match b[0] {
        TAG_SETTING => {
            want(10)?;
            Ok(Frame::Setting {
                station: StationId::from_u8(b[1])?,
                angle: canonical(f64_at(b, 2), "setting")?,
            })
        }
        TAG_EMISSION => {
            want(25)?;
            let omega = canonical(f64_at(b, 9), "omega")?;
            let eta = canonical(f64_at(b, 17), "eta")?;
            Ok(Frame::Emission(EmissionMessage {
                index: u64_at(b, 1),
                hidden: HiddenConfig::new(omega, eta),
            }))
        }
        TAG_OUTCOME => {
            want(11)?;
            let outcome = b[10] as i8;
            if outcome != 1 && outcome != -1 {
                return Err(StationError::Malformed(format!("outcome {outcome}")));
            }
            Ok(Frame::Outcome(StationOutcome {
                index: u64_at(b, 1),
                station: StationId::from_u8(b[9])?,
                outcome,
            }))
        }
        TAG_END => {
            want(9)?;
            Ok(Frame::End { count: u64_at(b, 1) })
        }
        t => Err(StationError::Malformed(format!("unknown tag {t}"))),
    }
}

/// Reads one length-prefixed frame; `Ok(None)` on a clean end of stream.
pub fn read_frame<R: Read>(r: &mut R) -> Result<Option<Vec<u8>>, io::Error> {
    let mut len = [0u8; 4];
    match r.read_exact(&mut len) {
        Ok(()) => {}
        Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e),
    }
    let n = u32::from_le_bytes(len) as usize;
    if n == 0 || n > 64 {
        return Err(io::Error::new(io::ErrorKind::InvalidData, format!("frame length {n}")));
    }
    let mut buf = vec![0u8; n + 4];
    buf[..4].copy_from_slice(&len);
    r.read_exact(&mut buf[4..])?;
    Ok(Some(buf))
}

pub fn write_frame<W: Write>(w: &mut W, bytes: &[u8]) -> io::Result<()> {
    w.write_all(bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn emission_layout_is_byte_exact() {
        let e = Frame::Emission(EmissionMessage {
            index: 0x0102,
            hidden: HiddenConfig::new(Angle::wrap(0.5), Angle::wrap(-1.0)),
        });
        let b = e.encode();
        assert_eq!(b.len(), 29);
        assert_eq!(&b[..4], &25u32.to_le_bytes());
        assert_eq!(b[4], TAG_EMISSION);
        assert_eq!(&b[5..13], &0x0102u64.to_le_bytes());
        assert_eq!(&b[13..21], &0.5f64.to_le_bytes());
        assert_eq!(&b[21..29], &(-1.0f64).to_le_bytes());
    }

    #[test]
    fn rejects_bad_frames() {
        assert!(Frame::decode(&[1, 0, 0, 0, 9]).is_err());
        let mut b = Frame::End { count: 3 }.encode();
        b.push(0);
        assert!(Frame::decode(&b).is_err());
        // non-canonical omega
        let mut e = Frame::Emission(EmissionMessage {
            index: 0,
            hidden: HiddenConfig::new(Angle::ZERO, Angle::ZERO),
        })
        .encode();
        e[13..21].copy_from_slice(&4.0f64.to_le_bytes());
        assert!(matches!(Frame::decode(&e), Err(StationError::Malformed(_))));
        // outcome must be ±1
        let mut o = Frame::Outcome(StationOutcome {
            index: 1,
            station: StationId::B,
            outcome: 1,
        })
        .encode();
        o[14] = 0;
        assert!(Frame::decode(&o).is_err());
    }

    proptest! {
        #[test]
        fn frames_survive_the_wire(
            index in any::<u64>(),
            w in -3.0f64..3.0,
            e in -3.0f64..3.0,
            st in 0u8..3,
            up in any::<bool>(),
        ) {
            let station = StationId::from_u8(st).unwrap();
            let frames = [
                Frame::Setting { station, angle: Angle::wrap(w) },
                Frame::Emission(EmissionMessage { index, hidden: HiddenConfig::new(Angle::wrap(w), Angle::wrap(e)) }),
                Frame::Outcome(StationOutcome { index, station, outcome: if up { 1 } else { -1 } }),
                Frame::End { count: index },
            ];
            for f in frames {
                let bytes = f.encode();
                prop_assert_eq!(Frame::decode(&bytes).unwrap(), f);
                let mut cur = std::io::Cursor::new(bytes.clone());
                prop_assert_eq!(read_frame(&mut cur).unwrap().unwrap(), bytes);
            }
        }
    }
}
