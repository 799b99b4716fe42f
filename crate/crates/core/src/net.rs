//! TCP deployment: a worker-pool server answering QUERY frames and a client
//! that fans a retrieval out to all `k` servers.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc;
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use rand::RngCore;

use crate::compir::{self, AnswerBundle, CommitmentFile, RetrievalResult, Server, Verdict, WitnessMode};
use crate::datahash::Database;
use crate::error::{Error, Result};
use crate::lmc::PublicParams;
use crate::pir;
use crate::wire::{self, ErrorCode, Frame};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);
pub const TIMEOUT_ENV: &str = "COMPIR_TIMEOUT_MS";

#[derive(Clone, Debug)]
pub struct ServerConfig {
    pub listen: String,
    pub db_path: PathBuf,
    pub pp_path: PathBuf,
    pub workers: usize,
    pub max_frame: usize,
}

impl ServerConfig {
    pub fn new(listen: impl Into<String>, db_path: impl Into<PathBuf>, pp_path: impl Into<PathBuf>) -> Self {
        ServerConfig {
            listen: listen.into(),
            db_path: db_path.into(),
            pp_path: pp_path.into(),
            workers: thread::available_parallelism().map_or(4, |n| n.get().max(4)),
            max_frame: wire::MAX_FRAME,
        }
    }

    /// Loads db and pp, checks they agree, and hashes the database.
    pub fn load(&self) -> Result<Server> {
        let db = Database::read_from(BufReader::new(File::open(&self.db_path)?))?;
        let pp = PublicParams::read_from(BufReader::new(File::open(&self.pp_path)?))?;
        Server::new(pp, db)
    }
}

fn reply(stream: &TcpStream, frame: &Frame, max_frame: usize) -> Result<()> {
    wire::write_frame(BufWriter::new(stream), frame, max_frame)
}

fn error_frame(code: ErrorCode, msg: &str) -> Frame {
    Frame::new(wire::ERROR, wire::encode_error(code, msg))
}

/// Response to one request frame.
pub fn respond(server: &Server, frame: &Frame) -> Frame {
    if frame.kind != wire::QUERY {
        return error_frame(ErrorCode::Malformed, &format!("unexpected frame type {:#04x}", frame.kind));
    }
    let msg = match wire::decode_query(&frame.payload) {
        Ok(m) => m,
        Err(e) => return error_frame(ErrorCode::Malformed, &e.to_string()),
    };
    if let Err(e) = server.check_shape(&msg.params, msg.m) {
        return error_frame(ErrorCode::Dimension, &e.to_string());
    }
    let mode = WitnessMode::default_for(msg.params.scheme());
    match server.answer(&msg.params, &msg.query, mode) {
        Ok(b) => Frame::new(wire::ANSWER, wire::encode_answer(&b)),
        Err(e) => error_frame(ErrorCode::Malformed, &e.to_string()),
    }
}

fn handle_connection(stream: TcpStream, server: &Server, max_frame: usize) {
    let mut reader = BufReader::new(&stream);
    loop {
        match wire::read_frame(&mut reader, max_frame) {
            Ok(Some(frame)) => {
                if reply(&stream, &respond(server, &frame), max_frame).is_err() {
                    return;
                }
            }
            Ok(None) => return,
            Err(Error::FrameTooLarge(len)) => {
                let msg = format!("frame of {len} bytes exceeds {max_frame}");
                let _ = reply(&stream, &error_frame(ErrorCode::Oversize, &msg), max_frame);
                let _ = stream.shutdown(Shutdown::Both);
                return;
            }
            Err(Error::Malformed { reason, .. }) => {
                let _ = reply(&stream, &error_frame(ErrorCode::Malformed, &reason), max_frame);
                return;
            }
            Err(_) => return,
        }
    }
}

/// A running server; dropping it stops accepting and joins the workers.
pub struct ServeHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    acceptor: Option<JoinHandle<()>>,
}

impl ServeHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Blocks until the accept loop exits.
    pub fn wait(mut self) {
        if let Some(h) = self.acceptor.take() {
            let _ = h.join();
        }
    }
}

impl Drop for ServeHandle {
    fn drop(&mut self) {
        if let Some(h) = self.acceptor.take() {
            self.stop.store(true, Ordering::SeqCst);
            // Unblock accept().
            let _ = TcpStream::connect(self.addr);
            let _ = h.join();
        }
    }
}

/// Serves `server` on an already-bound listener with `workers` threads.
pub fn spawn(server: Arc<Server>, listener: TcpListener, workers: usize, max_frame: usize) -> Result<ServeHandle> {
    let addr = listener.local_addr()?;
    let stop = Arc::new(AtomicBool::new(false));
    let (tx, rx) = mpsc::channel::<TcpStream>();
    let rx = Arc::new(Mutex::new(rx));
    let pool: Vec<JoinHandle<()>> = (0..workers.max(1))
        .map(|_| {
            let rx = Arc::clone(&rx);
            let server = Arc::clone(&server);
            thread::spawn(move || loop {
                let next = rx.lock().expect("worker queue poisoned").recv();
                match next {
                    Ok(stream) => handle_connection(stream, &server, max_frame),
                    Err(_) => return,
                }
            })
        })
        .collect();
    let stop_flag = Arc::clone(&stop);
    let acceptor = thread::spawn(move || {
        for stream in listener.incoming() {
            if stop_flag.load(Ordering::SeqCst) {
                break;
            }
            if let Ok(s) = stream {
                let _ = s.set_nodelay(true);
                if tx.send(s).is_err() {
                    break;
                }
            }
        }
        drop(tx);
        for w in pool {
            let _ = w.join();
        }
    });
    Ok(ServeHandle {
        addr,
        stop,
        acceptor: Some(acceptor),
    })
}

/// Loads the configured files and serves until the process is killed.
pub fn serve(config: &ServerConfig) -> Result<()> {
    let server = Arc::new(config.load()?);
    let listener = TcpListener::bind(&config.listen)?;
    spawn(server, listener, config.workers, config.max_frame)?.wait();
    Ok(())
}

#[derive(Clone, Copy, Debug)]
pub struct ClientConfig {
    pub timeout: Duration,
    pub max_frame: usize,
}

impl Default for ClientConfig {
    /// 30 s timeout unless `COMPIR_TIMEOUT_MS` says otherwise.
    fn default() -> Self {
        let timeout = std::env::var(TIMEOUT_ENV)
            .ok()
            .and_then(|v| v.parse::<u64>().ok())
            .map_or(DEFAULT_TIMEOUT, Duration::from_millis);
        ClientConfig {
            timeout,
            max_frame: wire::MAX_FRAME,
        }
    }
}

/// Sends one request frame and returns the raw reply frame.
pub fn round_trip(addr: &str, request: &Frame, cfg: &ClientConfig) -> Result<Frame> {
    let target = addr
        .to_socket_addrs()?
        .next()
        .ok_or_else(|| Error::InvalidParams(format!("cannot resolve {addr}")))?;
    let stream = TcpStream::connect_timeout(&target, cfg.timeout)?;
    stream.set_read_timeout(Some(cfg.timeout))?;
    stream.set_write_timeout(Some(cfg.timeout))?;
    stream.set_nodelay(true)?;
    wire::write_frame(BufWriter::new(&stream), request, cfg.max_frame)?;
    let reply = wire::read_frame(BufReader::new(&stream), cfg.max_frame)?
        .ok_or_else(|| Error::Io(std::io::ErrorKind::UnexpectedEof.into()))?;
    let _ = stream.shutdown(Shutdown::Both);
    Ok(reply)
}

/// Sends a QUERY payload and decodes the ANSWER.
pub fn request(addr: &str, query_payload: Vec<u8>, m: usize, cfg: &ClientConfig) -> Result<AnswerBundle> {
    let reply = round_trip(addr, &Frame::new(wire::QUERY, query_payload), cfg)?;
    match reply.kind {
        wire::ANSWER => wire::decode_answer(&reply.payload, m),
        wire::ERROR => Err(wire::decode_error(&reply.payload)),
        other => Err(crate::error::malformed("reply", format!("unexpected frame type {other:#04x}"))),
    }
}

/// Retrieves item `i` from the `k` servers at `servers` (in server order).
pub fn fetch(
    pp: &PublicParams,
    com: &CommitmentFile,
    i: usize,
    servers: &[String],
    rng: &mut impl RngCore,
    cfg: &ClientConfig,
) -> Result<RetrievalResult> {
    let params = com.params;
    if servers.len() != params.k() {
        return Err(Error::InvalidParams(format!(
            "{} servers given, scheme needs {}",
            servers.len(),
            params.k()
        )));
    }
    let qs = pir::queries_gen(&params, i, rng)?;
    let payloads = qs
        .queries
        .iter()
        .enumerate()
        .map(|(j, q)| wire::encode_query(&params, j as u8, com.m, q))
        .collect::<Result<Vec<_>>>()?;
    let replies: Vec<std::result::Result<AnswerBundle, Verdict>> = thread::scope(|scope| {
        let handles: Vec<_> = servers
            .iter()
            .zip(payloads)
            .map(|(addr, payload)| {
                scope.spawn(move || match request(addr, payload, com.m, cfg) {
                    Ok(b) => Ok(b),
                    Err(Error::Remote { code, message }) => {
                        Err(Verdict::Rejected(format!("server error {code}: {message}")))
                    }
                    Err(Error::Malformed { what, reason }) => Err(Verdict::Rejected(format!("malformed {what}: {reason}"))),
                    Err(_) => Err(Verdict::Unreachable),
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("client thread panicked")).collect()
    });
    let bundles: Vec<Option<AnswerBundle>> = replies.iter().map(|r| r.as_ref().ok().cloned()).collect();
    let mut result = compir::extract(pp, &com.commitment, &params, com.m, i, &qs, &bundles);
    for (verdict, reply) in result.verdicts.iter_mut().zip(replies) {
        if let Err(v) = reply {
            *verdict = v;
        }
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pir::{Query, SchemeId, SchemeParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use std::io::Write;

    fn local_server(n: usize, m: usize, seed: u64) -> (Arc<Server>, ServeHandle) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let pp = PublicParams::setup(n, &mut rng).unwrap();
        let server = Arc::new(Server::new(pp, Database::random(m, n, &mut rng).unwrap()).unwrap());
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let handle = spawn(Arc::clone(&server), listener, 2, wire::MAX_FRAME).unwrap();
        (server, handle)
    }

    fn cfg() -> ClientConfig {
        ClientConfig {
            timeout: Duration::from_secs(10),
            max_frame: wire::MAX_FRAME,
        }
    }

    #[test]
    fn dimension_error_keeps_connection_open() {
        let (server, handle) = local_server(4, 2, 111);
        let stream = TcpStream::connect(handle.addr()).unwrap();
        let wrong = SchemeParams::new(SchemeId::Ckgs2, 2, 1, 5).unwrap();
        let payload = wire::encode_query(&wrong, 0, 2, &Query::Bits(vec![true; 5])).unwrap();
        wire::write_frame(&stream, &Frame::new(wire::QUERY, payload), wire::MAX_FRAME).unwrap();
        let reply = wire::read_frame(&stream, wire::MAX_FRAME).unwrap().unwrap();
        assert_eq!((reply.kind, reply.payload[0]), (wire::ERROR, 2));

        wire::write_frame(&stream, &Frame::new(0x33, vec![]), wire::MAX_FRAME).unwrap();
        let reply = wire::read_frame(&stream, wire::MAX_FRAME).unwrap().unwrap();
        assert_eq!((reply.kind, reply.payload[0]), (wire::ERROR, 1));

        let right = SchemeParams::new(SchemeId::Ckgs2, 2, 1, 4).unwrap();
        let q = Query::Bits(vec![true, false, false, true]);
        let payload = wire::encode_query(&right, 1, 2, &q).unwrap();
        wire::write_frame(&stream, &Frame::new(wire::QUERY, payload), wire::MAX_FRAME).unwrap();
        let reply = wire::read_frame(&stream, wire::MAX_FRAME).unwrap().unwrap();
        assert_eq!(reply.kind, wire::ANSWER);
        let expected = server.answer(&right, &q, WitnessMode::PerCombination).unwrap();
        assert_eq!(reply.payload, wire::encode_answer(&expected));
    }

    #[test]
    fn oversize_frame_gets_error_three() {
        let (_server, handle) = local_server(2, 1, 112);
        let mut stream = TcpStream::connect(handle.addr()).unwrap();
        stream.write_all(&(wire::MAX_FRAME as u32 + 1).to_be_bytes()).unwrap();
        let reply = wire::read_frame(&stream, wire::MAX_FRAME).unwrap().unwrap();
        assert_eq!((reply.kind, reply.payload[0]), (wire::ERROR, 3));
    }

    #[test]
    fn unreachable_server_is_flagged() {
        let mut rng = ChaCha20Rng::seed_from_u64(113);
        let (server, handle) = local_server(4, 2, 114);
        let dead = TcpListener::bind("127.0.0.1:0").unwrap();
        let dead_addr = dead.local_addr().unwrap().to_string();
        drop(dead);
        let params = SchemeParams::new(SchemeId::Ckgs2, 2, 1, 4).unwrap();
        let com = CommitmentFile {
            params,
            m: 2,
            commitment: server.commitment(),
        };
        let servers = vec![handle.addr().to_string(), dead_addr];
        let r = fetch(server.pp(), &com, 1, &servers, &mut rng, &cfg()).unwrap();
        assert!(r.is_bottom());
        assert_eq!(r.verdicts[1], Verdict::Unreachable);
        assert!(r.verdicts[0].is_accepted());
        assert!(fetch(server.pp(), &com, 1, &servers[..1], &mut rng, &cfg()).is_err());
    }
}
