//! Versioned binary checkpoint: `OCKD` magic, the encoder config, named
//! parameter tensors as row-major 64-bit little-endian values, and a trailing
//! SHA-256 digest over header + payload. Loading verifies the digest and
//! reproduces every parameter bitwise.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::corpus::atomic_write;
use crate::error::{Error, Result};
use crate::models::{Encoder, EncoderConfig};
use crate::Scalar;

const MAGIC: &[u8; 4] = b"OCKD";
const VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Teacher,
    Student,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Teacher => "teacher",
            ModelKind::Student => "student",
        }
    }

    fn code(&self) -> u8 {
        match self {
            ModelKind::Teacher => 1,
            ModelKind::Student => 2,
        }
    }

    fn from_code(c: u8) -> Result<ModelKind> {
        match c {
            1 => Ok(ModelKind::Teacher),
            2 => Ok(ModelKind::Student),
            other => Err(Error::Checkpoint(format!("unknown model kind {other}"))),
        }
    }
}

fn push_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Checkpoint("unexpected end of file".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Serializes the encoder to `path` (atomically).
pub fn save<F: Scalar>(path: &Path, kind: ModelKind, encoder: &Encoder<F>) -> Result<()> {
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    push_u32(&mut buf, VERSION);
    buf.push(kind.code());

    let cfg = encoder.config();
    for v in [
        cfg.num_layers,
        cfg.d_model,
        cfg.n_heads,
        cfg.ff_dim,
        cfg.frontend_frame,
        cfg.frontend_stride,
        cfg.num_classes.unwrap_or(0),
    ] {
        push_u32(&mut buf, v as u32);
    }

    push_u32(&mut buf, encoder.params().len() as u32);
    for (name, tensor) in encoder.params() {
        push_u32(&mut buf, name.len() as u32);
        buf.extend_from_slice(name.as_bytes());
        let shape = tensor.shape();
        push_u32(&mut buf, shape.len() as u32);
        for d in &shape {
            push_u32(&mut buf, *d as u32);
        }
        for v in tensor.data() {
            let x = num_traits::ToPrimitive::to_f64(&v)
                .ok_or_else(|| Error::Checkpoint("parameter not representable as f64".into()))?;
            buf.extend_from_slice(&x.to_le_bytes());
        }
    }

    let digest = Sha256::digest(&buf);
    buf.extend_from_slice(&digest);
    atomic_write(path, &buf)
}

/// Reads a checkpoint back; parameters arrive frozen (no gradient
/// tracking).
pub fn load<F: Scalar>(path: &Path) -> Result<(ModelKind, Encoder<F>)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    if bytes.len() < 32 + 4 {
        return Err(Error::Checkpoint(format!(
            "{}: file too small",
            path.display()
        )));
    }
    let (body, stored_digest) = bytes.split_at(bytes.len() - 32);
    let digest = Sha256::digest(body);
    if digest.as_slice() != stored_digest {
        return Err(Error::Checkpoint(format!(
            "{}: digest mismatch (corrupt or tampered file)",
            path.display()
        )));
    }

    let mut r = Reader { bytes: body, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::Checkpoint(format!(
            "{}: bad magic, not a checkpoint",
            path.display()
        )));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!(
            "{}: unsupported format version {version}",
            path.display()
        )));
    }
    let kind = ModelKind::from_code(r.u8()?)?;
    let fields: Vec<usize> = (0..7)
        .map(|_| r.u32().map(|v| v as usize))
        .collect::<Result<_>>()?;
    let config = EncoderConfig {
        num_layers: fields[0],
        d_model: fields[1],
        n_heads: fields[2],
        ff_dim: fields[3],
        frontend_frame: fields[4],
        frontend_stride: fields[5],
        num_classes: if fields[6] == 0 { None } else { Some(fields[6]) },
    };

    let encoder = Encoder::<F>::new(config, 0)?;
    let num_tensors = r.u32()? as usize;
    if num_tensors != encoder.params().len() {
        return Err(Error::Checkpoint(format!(
            "{}: expected {} tensors for this config, found {num_tensors}",
            path.display(),
            encoder.params().len()
        )));
    }
    for (expected_name, param) in encoder.params() {
        let name_len = r.u32()? as usize;
        let name = std::str::from_utf8(r.take(name_len)?)
            .map_err(|_| Error::Checkpoint("tensor name is not utf-8".into()))?;
        if name != expected_name {
            return Err(Error::Checkpoint(format!(
                "{}: tensor `{name}` where `{expected_name}` was expected",
                path.display()
            )));
        }
        let ndim = r.u32()? as usize;
        let dims: Vec<usize> = (0..ndim)
            .map(|_| r.u32().map(|v| v as usize))
            .collect::<Result<_>>()?;
        if dims != param.shape() {
            return Err(Error::Checkpoint(format!(
                "{}: tensor `{name}` has shape {dims:?}, expected {:?}",
                path.display(),
                param.shape()
            )));
        }
        let numel: usize = dims.iter().product();
        let mut data = Vec::with_capacity(numel);
        for _ in 0..numel {
            let x = r.f64()?;
            data.push(F::from(x).ok_or_else(|| {
                Error::Checkpoint("parameter not representable in scalar type".into())
            })?);
        }
        param.set_data(data);
    }
    if r.pos != body.len() {
        return Err(Error::Checkpoint(format!(
            "{}: {} trailing bytes",
            path.display(),
            body.len() - r.pos
        )));
    }
    encoder.set_trainable(false);
    Ok((kind, encoder))
}

/// Hex form of the stored digest (the file's last 32 bytes); verifies the
/// content on the way.
pub fn digest_hex(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    if bytes.len() < 32 {
        return Err(Error::Checkpoint(format!(
            "{}: file too small",
            path.display()
        )));
    }
    let (body, stored) = bytes.split_at(bytes.len() - 32);
    if Sha256::digest(body).as_slice() != stored {
        return Err(Error::Checkpoint(format!(
            "{}: digest mismatch",
            path.display()
        )));
    }
    Ok(stored.iter().map(|b| format!("{b:02x}")).collect())
}
