//! Binary velocity snapshots.
//!
//! Layout (little-endian): magic `IBND`, version `u32`, N `u64`, time `f64`,
//! seed `u64`, then 3N `f64` velocity components.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::vec3::Vec3;

pub const MAGIC: &[u8; 4] = b"IBND";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub seed: u64,
    pub velocities: Vec<Vec3<f64>>,
}

pub fn write_snapshot<W: Write>(mut w: W, s: &Snapshot) -> Result<()> {
    let mut buf = Vec::with_capacity(32 + 24 * s.velocities.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(s.velocities.len() as u64).to_le_bytes());
    buf.extend_from_slice(&s.time.to_le_bytes());
    buf.extend_from_slice(&s.seed.to_le_bytes());
    for v in &s.velocities {
        for c in v.to_array() {
            buf.extend_from_slice(&c.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<Snapshot> {
    let mut head = [0u8; 32];
    r.read_exact(&mut head)?;
    if &head[..4] != MAGIC {
        return Err(Error::Format("snapshot magic mismatch".into()));
    }
    let version = u32::from_le_bytes(head[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(Error::Format(format!("unsupported snapshot version {version}")));
    }
    let n = u64::from_le_bytes(head[8..16].try_into().unwrap()) as usize;
    let time = f64::from_le_bytes(head[16..24].try_into().unwrap());
    let seed = u64::from_le_bytes(head[24..32].try_into().unwrap());
    let mut body = vec![0u8; n.checked_mul(24).ok_or_else(|| Error::Format("snapshot size overflow".into()))?];
    r.read_exact(&mut body)?;
    let velocities = body
        .chunks_exact(24)
        .map(|c| {
            let f = |k: usize| f64::from_le_bytes(c[8 * k..8 * k + 8].try_into().unwrap());
            Vec3::new(f(0), f(1), f(2))
        })
        .collect();
    Ok(Snapshot { time, seed, velocities })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let s = Snapshot { time: 0.25, seed: 42, velocities: vec![Vec3::new(1.0, -2.0, 3.5), Vec3::new(0.0, 1e-300, -7.0)] };
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &s).unwrap();
        assert_eq!(&buf[..4], b"IBND");
        assert_eq!(buf.len(), 32 + 48);
        assert_eq!(read_snapshot(&buf[..]).unwrap(), s);
    }

    #[test]
    fn bad_magic_is_rejected() {
        let buf = [0u8; 40];
        assert!(matches!(read_snapshot(&buf[..]), Err(Error::Format(_))));
    }
}
