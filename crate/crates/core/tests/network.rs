use std::net::{TcpListener, TcpStream};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use compir::compir::{CommitmentFile, Server, WitnessMode};
use compir::net::{self, ClientConfig};
use compir::pir::{self, SchemeId, SchemeParams};
use compir::wire::{self, Frame};
use compir::{Database, Outcome, PublicParams, Scalar, Verdict};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn cfg() -> ClientConfig {
    ClientConfig {
        timeout: Duration::from_secs(20),
        max_frame: wire::MAX_FRAME,
    }
}

struct Deployment {
    server: Arc<Server>,
    handles: Vec<net::ServeHandle>,
    com: CommitmentFile,
}

impl Deployment {
    fn new(params: SchemeParams, m: usize, seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let pp = PublicParams::setup(params.physical_cols(), &mut rng).unwrap();
        let db = Database::random(m, params.physical_cols(), &mut rng).unwrap();
        let server = Arc::new(Server::new(pp, db).unwrap());
        let handles = (0..params.k())
            .map(|_| {
                let listener = TcpListener::bind("127.0.0.1:0").unwrap();
                net::spawn(Arc::clone(&server), listener, 2, wire::MAX_FRAME).unwrap()
            })
            .collect();
        let com = CommitmentFile {
            params,
            m,
            commitment: server.commitment(),
        };
        Deployment { server, handles, com }
    }

    fn addrs(&self) -> Vec<String> {
        self.handles.iter().map(|h| h.addr().to_string()).collect()
    }
}

#[test]
fn honest_local_deployment_returns_item() {
    let params = SchemeParams::new(SchemeId::Ckgs2, 2, 1, 64).unwrap();
    let d = Deployment::new(params, 16, 1);
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    for i in [0, 17, 63] {
        let r = net::fetch(d.server.pp(), &d.com, i, &d.addrs(), &mut rng, &cfg()).unwrap();
        assert_eq!(r.outcome, Outcome::Item(vec![d.server.db().column(i).to_vec()]));
    }
}

#[test]
fn every_scheme_over_tcp() {
    for (scheme, k, t) in [(SchemeId::CkgsK, 3, 2), (SchemeId::Wy, 3, 1), (SchemeId::Be, 4, 2)] {
        let params = SchemeParams::new(scheme, k, t, 8).unwrap();
        let d = Deployment::new(params, 3, 3);
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let r = net::fetch(d.server.pp(), &d.com, 5, &d.addrs(), &mut rng, &cfg()).unwrap();
        let w = params.block_width();
        let want: Vec<Vec<Scalar>> = (0..w).map(|c| d.server.db().column(5 * w + c).to_vec()).collect();
        assert_eq!(r.outcome, Outcome::Item(want), "{scheme}");
    }
}

/// Forwards frames to `upstream` and bumps the first hash answer of every
/// ANSWER it relays.
fn tampering_proxy(upstream: String, m: usize) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(client) = stream else { continue };
            let upstream = upstream.clone();
            thread::spawn(move || {
                while let Ok(Some(req)) = wire::read_frame(&client, wire::MAX_FRAME) {
                    let mut reply = net::round_trip(&upstream, &req, &cfg()).unwrap();
                    if reply.kind == wire::ANSWER {
                        let mut b = wire::decode_answer(&reply.payload, m).unwrap();
                        b.hashes[0] += Scalar::ONE;
                        reply = Frame::new(wire::ANSWER, wire::encode_answer(&b));
                    }
                    wire::write_frame(&client, &reply, wire::MAX_FRAME).unwrap();
                }
            });
        }
    });
    addr
}

#[test]
fn tampering_proxy_is_flagged_like_in_process_tamper() {
    let params = SchemeParams::new(SchemeId::Ckgs2, 2, 1, 16).unwrap();
    let d = Deployment::new(params, 4, 5);
    let mut addrs = d.addrs();
    addrs[1] = tampering_proxy(addrs[1].clone(), 4);
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let r = net::fetch(d.server.pp(), &d.com, 3, &addrs, &mut rng, &cfg()).unwrap();
    assert_eq!(r.outcome, Outcome::Bottom);
    assert!(r.verdicts[0].is_accepted());
    assert!(matches!(r.verdicts[1], Verdict::Rejected(_)));

    // The same tamper applied in process gives the same verdicts.
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let qs = pir::queries_gen(&params, 3, &mut rng).unwrap();
    let mut bundles: Vec<_> = qs
        .queries
        .iter()
        .map(|q| Some(d.server.answer(&params, q, WitnessMode::PerCombination).unwrap()))
        .collect();
    bundles[1].as_mut().unwrap().hashes[0] += Scalar::ONE;
    let local = compir::compir::extract(d.server.pp(), &d.com.commitment, &params, 4, 3, &qs, &bundles);
    assert_eq!(local, r);
}

#[test]
fn one_server_down_gives_bottom_without_decoding() {
    let params = SchemeParams::new(SchemeId::CkgsK, 3, 2, 8).unwrap();
    let d = Deployment::new(params, 2, 7);
    let mut addrs = d.addrs();
    let dead = TcpListener::bind("127.0.0.1:0").unwrap();
    addrs[2] = dead.local_addr().unwrap().to_string();
    drop(dead);
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let r = net::fetch(d.server.pp(), &d.com, 1, &addrs, &mut rng, &cfg()).unwrap();
    assert_eq!(r.outcome, Outcome::Bottom);
    assert_eq!(r.verdicts[2], Verdict::Unreachable);
    assert_eq!(r.hash_check, None);
}

#[test]
fn silent_server_times_out() {
    let params = SchemeParams::new(SchemeId::Ckgs2, 2, 1, 4).unwrap();
    let d = Deployment::new(params, 1, 9);
    let silent = TcpListener::bind("127.0.0.1:0").unwrap();
    let mut addrs = d.addrs();
    addrs[0] = silent.local_addr().unwrap().to_string();
    let short = ClientConfig {
        timeout: Duration::from_millis(300),
        max_frame: wire::MAX_FRAME,
    };
    let mut rng = ChaCha20Rng::seed_from_u64(10);
    let r = net::fetch(d.server.pp(), &d.com, 0, &addrs, &mut rng, &short).unwrap();
    assert_eq!(r.verdicts[0], Verdict::Unreachable);
    assert_eq!(r.outcome, Outcome::Bottom);
    drop(silent);
}

#[test]
fn network_answers_equal_in_process_and_concurrent_equals_sequential() {
    let params = SchemeParams::new(SchemeId::Wy, 2, 1, 10).unwrap();
    let d = Deployment::new(params, 5, 11);
    let addr = d.addrs()[0].clone();
    let mut rng = ChaCha20Rng::seed_from_u64(12);
    let requests: Vec<Frame> = (0..6)
        .map(|i| {
            let qs = pir::queries_gen(&params, i, &mut rng).unwrap();
            Frame::new(wire::QUERY, wire::encode_query(&params, 0, 5, &qs.queries[0]).unwrap())
        })
        .collect();
    let sequential: Vec<Frame> = requests.iter().map(|f| net::respond(&d.server, f)).collect();
    for (req, want) in requests.iter().zip(&sequential) {
        let msg = wire::decode_query(&req.payload).unwrap();
        let local = d.server.answer(&params, &msg.query, WitnessMode::Batched).unwrap();
        assert_eq!(want.payload, wire::encode_answer(&local));
    }
    let concurrent: Vec<Frame> = thread::scope(|s| {
        let hs: Vec<_> = requests
            .iter()
            .map(|req| {
                let addr = addr.clone();
                s.spawn(move || net::round_trip(&addr, req, &cfg()).unwrap())
            })
            .collect();
        hs.into_iter().map(|h| h.join().unwrap()).collect()
    });
    assert_eq!(concurrent, sequential);
}

#[test]
fn server_survives_garbage() {
    use std::io::Write;
    let params = SchemeParams::new(SchemeId::Ckgs2, 2, 1, 4).unwrap();
    let d = Deployment::new(params, 1, 13);
    let addr = d.addrs()[0].clone();
    {
        let mut s = TcpStream::connect(&addr).unwrap();
        s.write_all(&[0, 0, 0, 3, 1, 0xde, 0xad]).unwrap();
        let reply = wire::read_frame(&s, wire::MAX_FRAME).unwrap().unwrap();
        assert_eq!((reply.kind, reply.payload[0]), (wire::ERROR, 1));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(14);
    let r = net::fetch(d.server.pp(), &d.com, 2, &d.addrs(), &mut rng, &cfg()).unwrap();
    assert!(matches!(r.outcome, Outcome::Item(_)));
}
