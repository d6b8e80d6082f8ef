// Copyright 2026 The ocbdc Authors
// SPDX-License-Identifier: Apache-2.0

//! The bank service over TCP, one thread per connection.

use std::io::{self, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::sync::Arc;
use std::sync::atomic::{AtomicBool, Ordering};
use std::thread;
use std::time::Duration;

use super::frame::{DEFAULT_MAX_FRAME, Message, read_message};
use super::{BankChannel, ChannelError, ChannelStats};
use crate::bank::CentralBank;
use crate::protocol::{BankRequest, BankResponse};

/// Accepts connections until `stop` is set.
pub fn serve(bank: Arc<CentralBank>, listener: TcpListener, stop: Arc<AtomicBool>) -> io::Result<()> {
    listener.set_nonblocking(true)?;
    let mut workers = Vec::new();
    while !stop.load(Ordering::Relaxed) {
        match listener.accept() {
            Ok((stream, _)) => {
                // peer address deliberately dropped here
                let bank = bank.clone();
                let stop = stop.clone();
                workers.push(thread::spawn(move || {
                    let _ = handle_connection(&bank, stream, &stop);
                }));
            }
            Err(e) if e.kind() == io::ErrorKind::WouldBlock => thread::sleep(Duration::from_millis(5)),
            Err(e) => return Err(e),
        }
        workers.retain(|w| !w.is_finished());
    }
    for w in workers {
        let _ = w.join();
    }
    Ok(())
}

fn handle_connection(bank: &CentralBank, mut stream: TcpStream, stop: &AtomicBool) -> io::Result<()> {
    stream.set_nonblocking(false)?;
    stream.set_nodelay(true)?;
    stream.set_read_timeout(Some(Duration::from_millis(200)))?;
    loop {
        if stop.load(Ordering::Relaxed) {
            return Ok(());
        }
        let msg = match read_message(&mut stream, DEFAULT_MAX_FRAME) {
            Ok(Some((m, _))) => m,
            Ok(None) => return Ok(()),
            Err(super::frame::ReadError::Io(e))
                if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) =>
            {
                continue;
            }
            Err(super::frame::ReadError::Io(e)) => return Err(e),
            Err(super::frame::ReadError::Frame(e)) => {
                let reply = Message::Response(BankResponse::Reject(format!("bad frame: {e}")));
                stream.write_all(&reply.encode())?;
                return Ok(());
            }
        };
        let reply = match msg {
            Message::Request(req) => bank.handle(req),
            _ => BankResponse::Reject("not a bank request".into()),
        };
        stream.write_all(&Message::Response(reply).encode())?;
    }
}

pub struct TcpChannel {
    stream: TcpStream,
    pub stats: ChannelStats,
}

impl TcpChannel {
    pub fn connect<A: ToSocketAddrs>(addr: A) -> io::Result<Self> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        Ok(Self { stream, stats: ChannelStats::default() })
    }
}

impl BankChannel for TcpChannel {
    fn call(&mut self, req: BankRequest) -> Result<BankResponse, ChannelError> {
        let up = Message::Request(req).encode();
        self.stream.write_all(&up)?;
        let (reply, n) = read_message(&mut self.stream, DEFAULT_MAX_FRAME)?
            .ok_or_else(|| io::Error::from(io::ErrorKind::UnexpectedEof))?;
        self.stats.requests += 1;
        self.stats.bytes_up += up.len() as u64;
        self.stats.bytes_down += n as u64;
        match reply {
            Message::Response(r) => Ok(r),
            _ => Err(ChannelError::Unexpected),
        }
    }
}
