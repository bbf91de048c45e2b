//! PPDN/1: binary request/response framing for out-of-process denoisers.
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! request  = "PPDN" | version u32 (=1) | channels u32 | height u32 | width u32
//!          | sigma f32 (σ/255) | channels·height·width f32, planar channel-major
//! response = "PPDR" | status u32
//!            status == 0: version u32 | channels u32 | height u32 | width u32
//!                         | sigma f32 | payload (same layout as the request)
//!            status != 0: msg_len u32 | msg_len bytes of UTF-8
//! ```

use std::io::{self, Read, Write};

use crate::tensor::Image;

pub const REQUEST_MAGIC: [u8; 4] = *b"PPDN";
pub const RESPONSE_MAGIC: [u8; 4] = *b"PPDR";
pub const VERSION: u32 = 1;

/// Upper bound on a single payload, in samples.
const MAX_SAMPLES: u64 = 1 << 30;

#[derive(Debug, thiserror::Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("{0}")]
    Malformed(String),
}

/// A decoded request or successful response body.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub sigma: f32,
    pub image: Image,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Response {
    Ok(Frame),
    Error { status: u32, message: String },
}

fn read_u32(r: &mut impl Read) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f32(r: &mut impl Read) -> io::Result<f32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(f32::from_le_bytes(b))
}

fn write_body(w: &mut impl Write, sigma: f32, img: &Image) -> io::Result<()> {
    let (c, h, wd) = img.shape();
    let mut buf = Vec::with_capacity(20 + 4 * img.len());
    buf.extend_from_slice(&VERSION.to_le_bytes());
    for d in [c, h, wd] {
        buf.extend_from_slice(&(d as u32).to_le_bytes());
    }
    buf.extend_from_slice(&sigma.to_le_bytes());
    for &v in img.data() {
        buf.extend_from_slice(&(v as f32).to_le_bytes());
    }
    w.write_all(&buf)
}

fn read_body(r: &mut impl Read) -> Result<Frame, ProtocolError> {
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(ProtocolError::Malformed(format!(
            "unsupported version {version}"
        )));
    }
    let c = read_u32(r)? as usize;
    let h = read_u32(r)? as usize;
    let w = read_u32(r)? as usize;
    let sigma = read_f32(r)?;
    let n = (c as u64) * (h as u64) * (w as u64);
    if n == 0 || n > MAX_SAMPLES {
        return Err(ProtocolError::Malformed(format!("bad dimensions {c}x{h}x{w}")));
    }
    let mut raw = vec![0u8; 4 * n as usize];
    r.read_exact(&mut raw)?;
    let data = raw
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
        .collect();
    let image = Image::new(c, h, w, data).map_err(|e| ProtocolError::Malformed(e.to_string()))?;
    Ok(Frame { sigma, image })
}

pub fn write_request(w: &mut impl Write, sigma: f32, img: &Image) -> io::Result<()> {
    w.write_all(&REQUEST_MAGIC)?;
    write_body(w, sigma, img)?;
    w.flush()
}

/// Reads one request. `Ok(None)` on a clean end of stream before the magic.
pub fn read_request(r: &mut impl Read) -> Result<Option<Frame>, ProtocolError> {
    let mut magic = [0u8; 4];
    let mut got = 0;
    while got < 4 {
        match r.read(&mut magic[got..])? {
            0 if got == 0 => return Ok(None),
            0 => return Err(ProtocolError::Malformed("truncated magic".into())),
            n => got += n,
        }
    }
    if magic != REQUEST_MAGIC {
        return Err(ProtocolError::Malformed(format!("bad request magic {magic:?}")));
    }
    read_body(r).map(Some)
}

pub fn write_response_ok(w: &mut impl Write, sigma: f32, img: &Image) -> io::Result<()> {
    w.write_all(&RESPONSE_MAGIC)?;
    w.write_all(&0u32.to_le_bytes())?;
    write_body(w, sigma, img)?;
    w.flush()
}

pub fn write_response_error(w: &mut impl Write, status: u32, message: &str) -> io::Result<()> {
    debug_assert!(status != 0);
    w.write_all(&RESPONSE_MAGIC)?;
    w.write_all(&status.to_le_bytes())?;
    w.write_all(&(message.len() as u32).to_le_bytes())?;
    w.write_all(message.as_bytes())?;
    w.flush()
}

pub fn read_response(r: &mut impl Read) -> Result<Response, ProtocolError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if magic != RESPONSE_MAGIC {
        return Err(ProtocolError::Malformed(format!(
            "bad response magic {magic:?}"
        )));
    }
    let status = read_u32(r)?;
    if status == 0 {
        return read_body(r).map(Response::Ok);
    }
    let len = read_u32(r)? as usize;
    if len > 1 << 20 {
        return Err(ProtocolError::Malformed(format!("error message of {len} bytes")));
    }
    let mut msg = vec![0u8; len];
    r.read_exact(&mut msg)?;
    Ok(Response::Error {
        status,
        message: String::from_utf8_lossy(&msg).into_owned(),
    })
}
