//! Binary checkpoints for resuming long runs.
//!
//! Layout (all multi-byte values little-endian):
//!
//! ```text
//! magic    8 bytes  "DCESIMCK"
//! version  u32      1
//! frame    u8       0 = lab, 1 = rotating
//! n_fock   u32
//! t        f64
//! step     f64      last accepted step size
//! hash     32 bytes sha-256 of the resolved run configuration
//! state    (2·n_fock)² × (re f64, im f64), row-major
//! ```

use super::Frame;
use crate::hilbert::{CMat, QUBIT_DIM};
use ndarray::Array2;
use num_complex::Complex64 as C64;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use thiserror::Error;

const MAGIC: &[u8; 8] = b"DCESIMCK";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    BadVersion(u32),
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
}

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub frame: Frame,
    pub n_fock: usize,
    pub t: f64,
    pub step: f64,
    pub config_hash: [u8; 32],
    pub state: CMat,
}

/// Write atomically: a temp file in the same directory is renamed over the
/// target, so an interrupted write never clobbers the previous checkpoint.
pub fn write_checkpoint(path: &Path, cp: &Checkpoint) -> Result<(), CheckpointError> {
    let d = QUBIT_DIM * cp.n_fock;
    assert_eq!(cp.state.dim(), (d, d), "state size vs n_fock");
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&[match cp.frame {
            Frame::Lab => 0u8,
            Frame::Rotating => 1u8,
        }])?;
        w.write_all(&(cp.n_fock as u32).to_le_bytes())?;
        w.write_all(&cp.t.to_le_bytes())?;
        w.write_all(&cp.step.to_le_bytes())?;
        w.write_all(&cp.config_hash)?;
        for z in cp.state.iter() {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
        w.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint, CheckpointError> {
    let mut r = BufReader::new(File::open(path)?);

    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(CheckpointError::BadVersion(version));
    }
    let mut frame_byte = [0u8; 1];
    r.read_exact(&mut frame_byte)?;
    let frame = match frame_byte[0] {
        0 => Frame::Lab,
        1 => Frame::Rotating,
        other => return Err(CheckpointError::Corrupt(format!("frame tag {other}"))),
    };
    let n_fock = read_u32(&mut r)? as usize;
    if n_fock < 2 {
        return Err(CheckpointError::Corrupt(format!("n_fock = {n_fock}")));
    }
    let t = read_f64(&mut r)?;
    let step = read_f64(&mut r)?;
    let mut config_hash = [0u8; 32];
    r.read_exact(&mut config_hash)?;

    let d = QUBIT_DIM * n_fock;
    let mut data = Vec::with_capacity(d * d);
    for _ in 0..d * d {
        let re = read_f64(&mut r)?;
        let im = read_f64(&mut r)?;
        data.push(C64::new(re, im));
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(CheckpointError::Corrupt("trailing bytes".into()));
    }
    let state = Array2::from_shape_vec((d, d), data)
        .map_err(|e| CheckpointError::Corrupt(e.to_string()))?;
    Ok(Checkpoint {
        frame,
        n_fock,
        t,
        step,
        config_hash,
        state,
    })
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, CheckpointError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64, CheckpointError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_bit_exact() {
        let n_fock = 3;
        let d = 2 * n_fock;
        let state = Array2::from_shape_fn((d, d), |(i, j)| {
            C64::new(0.1 * i as f64 - 0.07 * j as f64, (i * j) as f64 * 1e-3)
        });
        let cp = Checkpoint {
            frame: Frame::Rotating,
            n_fock,
            t: 1234.5678,
            step: 0.031,
            config_hash: [7u8; 32],
            state,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.ckpt");
        write_checkpoint(&path, &cp).unwrap();
        let back = read_checkpoint(&path).unwrap();
        assert_eq!(back.frame, cp.frame);
        assert_eq!(back.n_fock, cp.n_fock);
        assert_eq!(back.t.to_bits(), cp.t.to_bits());
        assert_eq!(back.step.to_bits(), cp.step.to_bits());
        assert_eq!(back.config_hash, cp.config_hash);
        for (a, b) in back.state.iter().zip(cp.state.iter()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn rejects_foreign_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("not_a_checkpoint");
        std::fs::write(&path, b"definitely not binary state").unwrap();
        assert!(matches!(
            read_checkpoint(&path),
            Err(CheckpointError::BadMagic)
        ));
    }
}
