//! Little-endian binary dump of a realization.
//!
//! Layout: magic `LVNZ`, u32 version, u32 dim, f64 horizon, u64 master,
//! u64 particle, u64 replication, f64 outer radius, f64 base step, u64 node
//! count and the nodes, the step increments, the drift rate, u64 jump count
//! and `(time, size…)` records, then u64 position count followed by that
//! many positions (zero when no trajectory is attached).

use std::io::{Read, Write};
use std::sync::Arc;

use super::grid::TimeGrid;
use super::realization::NoiseRealization;
use super::sampler::BigJumpEvent;
use crate::error::{Error, Result};
use crate::rng::SeedLineage;

const MAGIC: &[u8; 4] = b"LVNZ";
const VERSION: u32 = 1;

fn put_f64s<W: Write>(w: &mut W, xs: &[f64]) -> Result<()> {
    for x in xs {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

/// Write `noise`, optionally followed by particle positions at each node.
pub fn write_event_log<W: Write>(w: &mut W, noise: &NoiseRealization, positions: Option<&[f64]>) -> Result<()> {
    let grid = noise.grid();
    let lin = noise.lineage();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(noise.dim() as u32).to_le_bytes())?;
    w.write_all(&grid.horizon().to_le_bytes())?;
    for v in [lin.master, lin.particle, lin.replication] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&noise.outer_radius().to_le_bytes())?;
    w.write_all(&grid.base_step().to_le_bytes())?;
    w.write_all(&(grid.nodes().len() as u64).to_le_bytes())?;
    put_f64s(w, grid.nodes())?;
    put_f64s(w, noise.small_increments())?;
    put_f64s(w, noise.drift_rate())?;
    w.write_all(&(noise.big_jumps().len() as u64).to_le_bytes())?;
    for e in noise.big_jumps() {
        w.write_all(&e.time.to_le_bytes())?;
        put_f64s(w, &e.size)?;
    }
    let pos = positions.unwrap_or(&[]);
    w.write_all(&(pos.len() as u64).to_le_bytes())?;
    put_f64s(w, pos)?;
    Ok(())
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut b = [0u8; N];
        self.inner
            .read_exact(&mut b)
            .map_err(|e| Error::EventLog(format!("truncated input: {e}")))?;
        Ok(b)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| self.f64()).collect()
    }
    fn len(&mut self) -> Result<usize> {
        let n = self.u64()?;
        if n > (1 << 40) {
            return Err(Error::EventLog(format!("implausible length {n}")));
        }
        Ok(n as usize)
    }
}

/// Read a log written by [`write_event_log`].
pub fn read_event_log<R: Read>(r: R) -> Result<(NoiseRealization, Option<Vec<f64>>)> {
    let mut r = Reader { inner: r };
    if &r.bytes::<4>()? != MAGIC {
        return Err(Error::EventLog("bad magic".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::EventLog(format!("unsupported version {version}")));
    }
    let dim = r.u32()? as usize;
    let _horizon = r.f64()?;
    let lineage = SeedLineage::new(r.u64()?, r.u64()?, r.u64()?);
    let outer = r.f64()?;
    let base_step = r.f64()?;
    let n_nodes = r.len()?;
    let nodes = r.f64s(n_nodes)?;
    let grid = TimeGrid::from_nodes(nodes).map_err(|e| Error::EventLog(e.to_string()))?;
    let grid = grid.with_base_step(base_step);
    let small = r.f64s(grid.steps() * dim)?;
    let drift = r.f64s(dim)?;
    let n_jumps = r.len()?;
    let mut jumps = Vec::with_capacity(n_jumps);
    for _ in 0..n_jumps {
        let time = r.f64()?;
        jumps.push(BigJumpEvent { time, size: r.f64s(dim)? });
    }
    let n_pos = r.len()?;
    let pos = r.f64s(n_pos)?;
    let noise = NoiseRealization::from_parts(Arc::new(grid), dim, small, drift, jumps, outer, lineage)
        .map_err(|e| Error::EventLog(e.to_string()))?;
    Ok((noise, if n_pos > 0 { Some(pos) } else { None }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_noise::LevyModel;

    #[test]
    fn round_trip() {
        let m = LevyModel::isotropic_stable(1.3, 2).unwrap();
        let g = TimeGrid::uniform(2.0, 16).unwrap();
        let n = NoiseRealization::generate(&m, &g, SeedLineage::new(5, 1, 2), true).unwrap();
        let pos: Vec<f64> = (0..n.grid().nodes().len() * 2).map(|i| i as f64).collect();
        let mut buf = Vec::new();
        write_event_log(&mut buf, &n, Some(&pos)).unwrap();
        let (back, p) = read_event_log(&buf[..]).unwrap();
        assert_eq!(back, n);
        assert_eq!(p.unwrap(), pos);
        assert!(read_event_log(&buf[..10]).is_err());
    }
}
