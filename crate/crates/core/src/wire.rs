//! Binary framing: `len u32 || type u8 || payload`, big-endian, where `len`
//! counts the type byte and the payload.

use std::io::{ErrorKind, Read, Write};

use crate::compir::{AnswerBundle, WitnessMode};
use crate::error::{check_len, malformed, Error, Result};
use crate::group::{Scalar, G2_BYTES, SCALAR_BYTES};
use crate::lmc::Witness;
use crate::pir::{Query, SchemeId, SchemeParams};

pub const MAX_FRAME: usize = 64 << 20;

pub const QUERY: u8 = 0x01;
pub const ANSWER: u8 = 0x02;
pub const ERROR: u8 = 0x7F;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum ErrorCode {
    Malformed = 1,
    Dimension = 2,
    Oversize = 3,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub kind: u8,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(kind: u8, payload: Vec<u8>) -> Self {
        Frame { kind, payload }
    }

    /// Wire length of the frame including its 4-byte length prefix.
    pub fn wire_len(&self) -> usize {
        5 + self.payload.len()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.wire_len());
        out.extend_from_slice(&(self.payload.len() as u32 + 1).to_be_bytes());
        out.push(self.kind);
        out.extend_from_slice(&self.payload);
        out
    }
}

pub fn write_frame(mut w: impl Write, frame: &Frame, max: usize) -> Result<()> {
    if frame.payload.len() + 1 > max {
        return Err(Error::FrameTooLarge(frame.payload.len() + 1));
    }
    w.write_all(&frame.to_bytes())?;
    w.flush()?;
    Ok(())
}

/// Reads one frame; `Ok(None)` on a clean end of stream before any byte.
/// An oversize length is reported without consuming the payload.
pub fn read_frame(mut r: impl Read, max: usize) -> Result<Option<Frame>> {
    let mut len = [0u8; 4];
    match r.read(&mut len[..1]) {
        Ok(0) => return Ok(None),
        Ok(_) => {}
        Err(e) if e.kind() == ErrorKind::Interrupted => return read_frame(r, max),
        Err(e) => return Err(e.into()),
    }
    r.read_exact(&mut len[1..])?;
    let len = u32::from_be_bytes(len) as usize;
    if len == 0 {
        return Err(malformed("frame", "zero length"));
    }
    if len > max {
        return Err(Error::FrameTooLarge(len));
    }
    let mut body = vec![0u8; len];
    r.read_exact(&mut body)?;
    let kind = body[0];
    body.remove(0);
    Ok(Some(Frame { kind, payload: body }))
}

/// A decoded QUERY payload.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryMsg {
    pub params: SchemeParams,
    pub server_index: u8,
    pub m: usize,
    pub query: Query,
}

const QUERY_HEADER: usize = 12;

pub fn pack_bits(bits: &[bool]) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    for (idx, _) in bits.iter().enumerate().filter(|(_, b)| **b) {
        out[idx / 8] |= 0x80 >> (idx % 8);
    }
    out
}

pub fn unpack_bits(bytes: &[u8], n: usize) -> Result<Vec<bool>> {
    check_len(n.div_ceil(8), bytes.len())?;
    let bits: Vec<bool> = (0..n).map(|idx| bytes[idx / 8] & (0x80 >> (idx % 8)) != 0).collect();
    if pack_bits(&bits) != bytes {
        return Err(malformed("query", "padding bits must be zero"));
    }
    Ok(bits)
}

fn scalars_to_bytes(out: &mut Vec<u8>, xs: &[Scalar]) {
    for x in xs {
        out.extend_from_slice(&x.to_bytes());
    }
}

fn scalars_from_bytes(bytes: &[u8]) -> Result<Vec<Scalar>> {
    bytes.chunks_exact(SCALAR_BYTES).map(Scalar::from_slice).collect()
}

pub fn encode_query(params: &SchemeParams, server_index: u8, m: usize, q: &Query) -> Result<Vec<u8>> {
    crate::pir::validate_query(params, q)?;
    let mut out = Vec::with_capacity(QUERY_HEADER + q.len() * SCALAR_BYTES);
    out.extend_from_slice(&[params.scheme() as u8, params.k() as u8, params.t() as u8, server_index]);
    out.extend_from_slice(&(params.n() as u32).to_be_bytes());
    out.extend_from_slice(&(m as u32).to_be_bytes());
    match q {
        Query::Bits(bits) => out.extend_from_slice(&pack_bits(bits)),
        Query::Field(xs) => scalars_to_bytes(&mut out, xs),
    }
    if out.len() + 1 > MAX_FRAME {
        return Err(Error::FrameTooLarge(out.len() + 1));
    }
    Ok(out)
}

pub fn decode_query(payload: &[u8]) -> Result<QueryMsg> {
    if payload.len() < QUERY_HEADER {
        return Err(malformed("query", "truncated header"));
    }
    let scheme = SchemeId::from_u8(payload[0])?;
    let (k, t, server_index) = (payload[1] as usize, payload[2] as usize, payload[3]);
    let n = u32::from_be_bytes(payload[4..8].try_into().unwrap()) as usize;
    let m = u32::from_be_bytes(payload[8..12].try_into().unwrap()) as usize;
    let params = SchemeParams::new(scheme, k, t, n)?;
    if server_index as usize >= k {
        return Err(malformed("query", "server index out of range"));
    }
    if m == 0 {
        return Err(malformed("query", "zero item size"));
    }
    let body = &payload[QUERY_HEADER..];
    let query = match scheme {
        SchemeId::Ckgs2 => Query::Bits(unpack_bits(body, n)?),
        _ => {
            check_len(params.query_len() * SCALAR_BYTES, body.len())?;
            Query::Field(scalars_from_bytes(body)?)
        }
    };
    Ok(QueryMsg {
        params,
        server_index,
        m,
        query,
    })
}

pub fn encode_answer(b: &AnswerBundle) -> Vec<u8> {
    let m = b.data.first().map_or(0, Vec::len);
    let l = b.data.len();
    let mut out = Vec::with_capacity(5 + (l * m + l) * SCALAR_BYTES + b.witnesses.len() * G2_BYTES);
    out.extend_from_slice(&(l as u32).to_be_bytes());
    for d in &b.data {
        scalars_to_bytes(&mut out, d);
    }
    scalars_to_bytes(&mut out, &b.hashes);
    out.push(b.mode as u8);
    for w in &b.witnesses {
        out.extend_from_slice(&w.to_bytes());
    }
    out
}

/// Decodes an ANSWER payload for items of `m` scalars.
pub fn decode_answer(payload: &[u8], m: usize) -> Result<AnswerBundle> {
    let bad = |reason: &str| malformed("answer", reason.to_string());
    if payload.len() < 4 {
        return Err(bad("truncated header"));
    }
    let l = u32::from_be_bytes(payload[..4].try_into().unwrap()) as usize;
    let data_len = l
        .checked_mul(m)
        .and_then(|x| x.checked_add(l))
        .and_then(|x| x.checked_mul(SCALAR_BYTES))
        .ok_or_else(|| bad("size overflow"))?;
    let rest = &payload[4..];
    if rest.len() < data_len + 1 {
        return Err(bad("truncated body"));
    }
    let scalars = scalars_from_bytes(&rest[..data_len])?;
    let (data, hashes) = scalars.split_at(l * m);
    let data = if m == 0 { vec![Vec::new(); l] } else { data.chunks_exact(m).map(<[Scalar]>::to_vec).collect() };
    let mode = WitnessMode::from_u8(rest[data_len])?;
    let wit_bytes = &rest[data_len + 1..];
    check_len(mode.witness_count(l) * G2_BYTES, wit_bytes.len())?;
    let witnesses = wit_bytes
        .chunks_exact(G2_BYTES)
        .map(|c| Witness::from_bytes(c.try_into().unwrap()))
        .collect::<Result<Vec<_>>>()?;
    Ok(AnswerBundle {
        data,
        hashes: hashes.to_vec(),
        mode,
        witnesses,
    })
}

pub fn encode_error(code: ErrorCode, message: &str) -> Vec<u8> {
    let mut out = vec![code as u8];
    out.extend_from_slice(message.as_bytes());
    out
}

pub fn decode_error(payload: &[u8]) -> Error {
    match payload.split_first() {
        Some((code, msg)) => Error::Remote {
            code: *code,
            message: String::from_utf8_lossy(msg).into_owned(),
        },
        None => malformed("error frame", "empty"),
    }
}
