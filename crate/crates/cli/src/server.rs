//! Transports for the line protocol: stdio and WebSocket.

use std::io::{BufRead, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;

use anyhow::{Context, Result};
use ifttpin_core::format::write_transcript;
use ifttpin_core::protocol::Connection;
use ifttpin_core::simulator::trial_seed;
use tungstenite::{Error as WsError, Message};

#[derive(Debug, Clone)]
pub struct ServeOptions {
    /// Connection `i` gets `trial_seed(base_seed, i)` as its default seed.
    pub base_seed: u64,
    pub record: Option<PathBuf>,
}

impl ServeOptions {
    pub fn connection_seed(&self, index: usize) -> u64 {
        trial_seed(self.base_seed, index)
    }
}

fn record(dir: &Path, conn: usize, connection: &Connection) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    for (i, t) in connection.transcripts().iter().enumerate() {
        let path = dir.join(format!("conn{conn:04}-session{i:02}.json"));
        write_transcript(&path, t)?;
        log::info!("recorded {}", path.display());
    }
    Ok(())
}

/// Serve one client over a reader/writer pair until end of input.
pub fn serve_lines(input: impl BufRead, mut output: impl Write, opts: &ServeOptions) -> Result<()> {
    let mut conn = Connection::new(opts.connection_seed(0));
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        for reply in conn.handle_line(&line) {
            writeln!(output, "{}", reply.to_line())?;
        }
        output.flush()?;
    }
    if let Some(dir) = &opts.record {
        record(dir, 0, &conn)?;
    }
    Ok(())
}

fn handle_client(stream: TcpStream, index: usize, opts: &ServeOptions) -> Result<()> {
    let peer = stream.peer_addr().ok();
    let mut ws = tungstenite::accept(stream).map_err(|e| anyhow::anyhow!("handshake failed: {e}"))?;
    log::info!("connection {index} from {peer:?}");
    let mut conn = Connection::new(opts.connection_seed(index));
    loop {
        let msg = match ws.read() {
            Ok(m) => m,
            Err(WsError::ConnectionClosed | WsError::AlreadyClosed) => break,
            Err(WsError::Protocol(e)) => {
                log::debug!("connection {index}: {e}");
                break;
            }
            Err(WsError::Io(e)) => {
                log::debug!("connection {index}: {e}");
                break;
            }
            Err(e) => return Err(e.into()),
        };
        let text = match msg {
            Message::Text(t) => t,
            Message::Binary(b) => String::from_utf8_lossy(&b).into_owned(),
            Message::Close(_) => break,
            _ => continue,
        };
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            for reply in conn.handle_line(line) {
                ws.send(Message::Text(reply.to_line()))?;
            }
        }
    }
    log::info!("connection {index} closed");
    if let Some(dir) = &opts.record {
        record(dir, index, &conn)?;
    }
    Ok(())
}

/// Accept WebSocket clients forever, one thread each.
pub fn serve_websocket(listener: TcpListener, opts: ServeOptions) -> Result<()> {
    let opts = Arc::new(opts);
    let counter = AtomicUsize::new(0);
    for stream in listener.incoming() {
        let stream = match stream {
            Ok(s) => s,
            Err(e) => {
                log::warn!("accept failed: {e}");
                continue;
            }
        };
        let index = counter.fetch_add(1, Ordering::Relaxed);
        let opts = Arc::clone(&opts);
        thread::spawn(move || {
            if let Err(e) = handle_client(stream, index, &opts) {
                log::warn!("connection {index}: {e:#}");
            }
        });
    }
    Ok(())
}
