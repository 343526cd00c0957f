//! One-way frame links over in-process channels or loopback TCP.

use std::fmt;
use std::io::{BufReader, BufWriter, Write};
use std::net::{Ipv4Addr, TcpListener, TcpStream};
use std::str::FromStr;
use std::sync::mpsc::{sync_channel, Receiver, SyncSender};

use serde::{Deserialize, Serialize};

use super::audit::{LinkAudit, TrafficLog};
use super::wire::{read_frame, write_frame, Frame};
use super::{StationError, StationId};

const CHANNEL_BOUND: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transport {
    Channels,
    Sockets,
}

impl FromStr for Transport {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "channels" => Ok(Transport::Channels),
            "sockets" => Ok(Transport::Sockets),
            other => Err(format!("unknown transport {other:?} (channels|sockets)")),
        }
    }
}

impl fmt::Display for Transport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Transport::Channels => "channels",
            Transport::Sockets => "sockets",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Endpoint {
    Source,
    Operator,
    Station(StationId),
    Coordinator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LinkId {
    pub from: Endpoint,
    pub to: Endpoint,
}

enum TxInner {
    Chan(SyncSender<Vec<u8>>),
    Sock(BufWriter<TcpStream>),
}

enum RxInner {
    Chan(Receiver<Vec<u8>>),
    Sock(BufReader<TcpStream>),
}

/// Sending half of a link.
pub struct Tx {
    inner: TxInner,
    link: LinkId,
    tap: Option<(LinkAudit, TrafficLog)>,
}

/// Receiving half of a link.
pub struct Rx {
    inner: RxInner,
    link: LinkId,
}

impl Tx {
    pub fn link(&self) -> LinkId {
        self.link
    }

    pub fn send(&mut self, frame: &Frame) -> Result<(), StationError> {
        let bytes = frame.encode();
        if let Some((audit, _)) = &mut self.tap {
            audit.observe(&bytes);
        }
        match &mut self.inner {
            TxInner::Chan(s) => s
                .send(bytes)
                .map_err(|_| StationError::Io(format!("{:?}: receiver closed", self.link))),
            TxInner::Sock(w) => write_frame(w, &bytes).map_err(|e| StationError::Io(format!("{:?}: {e}", self.link))),
        }
    }

    /// Flushes and closes the link, handing its audit to the traffic log.
    pub fn finish(self) -> Result<(), StationError> {
        if let TxInner::Sock(mut w) = self.inner {
            w.flush().map_err(|e| StationError::Io(format!("{:?}: {e}", self.link)))?;
        }
        if let Some((audit, log)) = self.tap {
            log.submit(audit);
        }
        Ok(())
    }
}

impl Rx {
    pub fn link(&self) -> LinkId {
        self.link
    }

    /// Next frame, or `None` once the sender has gone away.
    pub fn recv(&mut self) -> Result<Option<Frame>, StationError> {
        let bytes = match &mut self.inner {
            RxInner::Chan(r) => match r.recv() {
                Ok(b) => b,
                Err(_) => return Ok(None),
            },
            RxInner::Sock(r) => match read_frame(r) {
                Ok(Some(b)) => b,
                Ok(None) => return Ok(None),
                Err(e) => return Err(StationError::Io(format!("{:?}: {e}", self.link))),
            },
        };
        Frame::decode(&bytes).map(Some)
    }
}

/// Opens a one-way link.
pub fn open_link(transport: Transport, link: LinkId, log: Option<&TrafficLog>) -> Result<(Tx, Rx), StationError> {
    let tap = log.map(|l| (l.audit_for(link), l.clone()));
    match transport {
        Transport::Channels => {
            let (s, r) = sync_channel(CHANNEL_BOUND);
            Ok((
                Tx {
                    inner: TxInner::Chan(s),
                    link,
                    tap,
                },
                Rx {
                    inner: RxInner::Chan(r),
                    link,
                },
            ))
        }
        Transport::Sockets => {
            let io = |e: std::io::Error| StationError::Io(format!("{link:?}: {e}"));
            let listener = TcpListener::bind((Ipv4Addr::LOCALHOST, 0)).map_err(io)?;
            let addr = listener.local_addr().map_err(io)?;
            let out = TcpStream::connect(addr).map_err(io)?;
            let (inc, _) = listener.accept().map_err(io)?;
            out.set_nodelay(true).map_err(io)?;
            Ok((
                Tx {
                    inner: TxInner::Sock(BufWriter::new(out)),
                    link,
                    tap,
                },
                Rx {
                    inner: RxInner::Sock(BufReader::new(inc)),
                    link,
                },
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transport_names() {
        assert_eq!("sockets".parse::<Transport>().unwrap(), Transport::Sockets);
        assert!("pigeons".parse::<Transport>().is_err());
        assert_eq!(Transport::Channels.to_string(), "channels");
    }

    #[test]
    fn both_transports_carry_frames() {
        for t in [Transport::Channels, Transport::Sockets] {
            let link = LinkId {
                from: Endpoint::Source,
                to: Endpoint::Station(StationId::A),
            };
            let log = TrafficLog::new(true);
            let (mut tx, mut rx) = open_link(t, link, Some(&log)).unwrap();
            let h = std::thread::spawn(move || {
                for k in 0..100 {
                    tx.send(&Frame::End { count: k }).unwrap();
                }
                tx.finish().unwrap();
            });
            let mut got = Vec::new();
            while let Some(f) = rx.recv().unwrap() {
                got.push(f);
            }
            h.join().unwrap();
            assert_eq!(got.len(), 100);
            assert_eq!(got[99], Frame::End { count: 99 });
            assert_eq!(log.entries().len(), 100);
        }
    }
}
