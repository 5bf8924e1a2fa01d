//! Where frames come from: the simulator, a recorded session, or the
//! network.

use std::fmt;
use std::io::{self, Read};
use std::net::{SocketAddr, TcpListener, TcpStream, UdpSocket};
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::mpsc;
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use motionbrush::ingest::{decode_frame, sim_performance, Decoded, StreamDecoder, FRAME_LEN};
use motionbrush::motion::SensorFrame;

const POLL: Duration = Duration::from_millis(50);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    Sim,
    Udp(u16),
    Tcp(u16),
    Replay(PathBuf),
}

impl FromStr for Source {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let port = |p: &str| p.parse::<u16>().map_err(|_| format!("invalid port `{p}`"));
        match s.split_once(':') {
            None if s == "sim" => Ok(Source::Sim),
            Some(("udp", p)) => port(p).map(Source::Udp),
            Some(("tcp", p)) => port(p).map(Source::Tcp),
            Some(("replay", f)) if !f.is_empty() => Ok(Source::Replay(PathBuf::from(f))),
            _ => Err(format!("unknown source `{s}`; expected sim, udp:<port>, tcp:<port> or replay:<file>")),
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Sim => f.write_str("sim"),
            Source::Udp(p) => write!(f, "udp:{p}"),
            Source::Tcp(p) => write!(f, "tcp:{p}"),
            Source::Replay(path) => write!(f, "replay:{}", path.display()),
        }
    }
}

/// Endless simulated performance, generated a minute at a time. Stops
/// after `limit_us` of stream time when given.
pub fn sim_stream(seed: u64, rate_hz: f64, limit_us: Option<u64>) -> impl Iterator<Item = SensorFrame> {
    const CHUNK_S: f64 = 60.0;
    let chunk_us = (CHUNK_S * 1e6) as u64;
    (0u64..)
        .take_while(move |c| limit_us.is_none_or(|l| c * chunk_us <= l))
        .flat_map(move |c| {
            let seq_base = (c as f64 * CHUNK_S * rate_hz) as u32;
            sim_performance(seed.wrapping_add(c), CHUNK_S, rate_hz)
                .expect("simulator parameters are fixed and valid")
                .into_iter()
                .map(move |mut f| {
                    f.t_us += c * chunk_us;
                    f.seq = f.seq.wrapping_add(seq_base);
                    f
                })
        })
        .take_while(move |f| limit_us.is_none_or(|l| f.t_us <= l))
}

/// Counters shared with a network reader thread.
#[derive(Debug, Default)]
pub struct NetStats {
    pub frames: AtomicU64,
    pub rejected: AtomicU64,
    pub skipped_bytes: AtomicU64,
}

/// Frames arriving from a network reader thread.
pub struct LiveSource {
    pub frames: mpsc::Receiver<SensorFrame>,
    pub stats: Arc<NetStats>,
    pub local_addr: SocketAddr,
}

/// One frame per datagram.
pub fn spawn_udp(port: u16, stop: Arc<AtomicBool>) -> io::Result<LiveSource> {
    let socket = UdpSocket::bind(("0.0.0.0", port))?;
    socket.set_read_timeout(Some(POLL))?;
    let local_addr = socket.local_addr()?;
    let (tx, rx) = mpsc::channel();
    let stats = Arc::new(NetStats::default());
    let st = stats.clone();
    thread::Builder::new().name("udp-ingest".into()).spawn(move || {
        let mut buf = [0u8; 2048];
        while !stop.load(Ordering::Relaxed) {
            let n = match socket.recv(&mut buf) {
                Ok(n) => n,
                Err(e) if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => continue,
                Err(e) => {
                    log::error!("udp receive failed: {e}");
                    break;
                }
            };
            if n != FRAME_LEN {
                st.rejected.fetch_add(1, Ordering::Relaxed);
                log::debug!("dropping {n}-byte datagram");
                continue;
            }
            match decode_frame(&buf[..n]) {
                Ok(Decoded::Frame(f)) => {
                    st.frames.fetch_add(1, Ordering::Relaxed);
                    if tx.send(f).is_err() {
                        break;
                    }
                }
                Ok(Decoded::Incomplete { .. }) => unreachable!("length checked"),
                Err(e) => {
                    st.rejected.fetch_add(1, Ordering::Relaxed);
                    log::debug!("dropping datagram: {}", e.code());
                }
            }
        }
    })?;
    Ok(LiveSource { frames: rx, stats, local_addr })
}

/// Contiguous frames over any number of TCP connections.
pub fn spawn_tcp(port: u16, stop: Arc<AtomicBool>) -> io::Result<LiveSource> {
    let listener = TcpListener::bind(("0.0.0.0", port))?;
    listener.set_nonblocking(true)?;
    let local_addr = listener.local_addr()?;
    let (tx, rx) = mpsc::channel();
    let stats = Arc::new(NetStats::default());
    let st = stats.clone();
    thread::Builder::new().name("tcp-accept".into()).spawn(move || {
        while !stop.load(Ordering::Relaxed) {
            match listener.accept() {
                Ok((stream, peer)) => {
                    log::info!("tcp source connected from {peer}");
                    let (tx, st, stop) = (tx.clone(), st.clone(), stop.clone());
                    let _ = thread::Builder::new().name("tcp-ingest".into()).spawn(move || read_stream(stream, tx, &st, &stop));
                }
                Err(e) if e.kind() == io::ErrorKind::WouldBlock => thread::sleep(POLL),
                Err(e) => {
                    log::error!("tcp accept failed: {e}");
                    break;
                }
            }
        }
    })?;
    Ok(LiveSource { frames: rx, stats, local_addr })
}

fn read_stream(mut stream: TcpStream, tx: mpsc::Sender<SensorFrame>, stats: &NetStats, stop: &AtomicBool) {
    if stream.set_nonblocking(false).and_then(|_| stream.set_read_timeout(Some(POLL))).is_err() {
        return;
    }
    let mut decoder = StreamDecoder::new();
    let mut buf = [0u8; 4096];
    while !stop.load(Ordering::Relaxed) {
        match stream.read(&mut buf) {
            Ok(0) => break,
            Ok(n) => decoder.push(&buf[..n]),
            Err(e) if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => continue,
            Err(_) => break,
        }
        while let Some(r) = decoder.next_frame() {
            match r {
                Ok(f) => {
                    stats.frames.fetch_add(1, Ordering::Relaxed);
                    if tx.send(f).is_err() {
                        return;
                    }
                }
                Err(e) => {
                    stats.rejected.fetch_add(1, Ordering::Relaxed);
                    log::debug!("tcp frame rejected: {}", e.code());
                }
            }
        }
        stats.skipped_bytes.store(decoder.skipped_bytes(), Ordering::Relaxed);
    }
}
