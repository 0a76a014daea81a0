//! Trajectory export.
//!
//! CSV: one row per (snapshot, cell) with header `t,j,A,P,R`; `j` is the
//! 1-based cell index.
//!
//! Binary (`.auxtraj`, version 1, all little-endian):
//!
//! | offset | type        | field                                              |
//! |--------|-------------|----------------------------------------------------|
//! | 0      | `[u8; 8]`   | magic `b"AUXTRAJ\0"`                               |
//! | 8      | `u32`       | format version (= 1)                               |
//! | 12     | `u32`       | number of cells N                                  |
//! | 16     | `u64`       | number of snapshots M                              |
//! | 24     | `f64`       | sample interval                                    |
//! | 32     | `[f64; 9]`  | t_act, t_diff, k_a, k_r, k_m, k_1, alpha, delta, k_2 |
//! | 104    | `u8`        | boundary tag: 0 PaperRow, 1 Periodic, 2 InfluxLeft |
//! | 105    | `[u8; 7]`   | zero padding                                       |
//! | 112    | `f64`       | boundary value (seed or influx rate, 0 if periodic)|
//! | 120    | records     | M x (t, A[N], P[N], R[N]) as `f64`                 |

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::model::ModelParams;

use super::{BoundaryCondition, LatticeState, Trajectory};

pub const MAGIC: &[u8; 8] = b"AUXTRAJ\0";
pub const FORMAT_VERSION: u32 = 1;

pub fn write_csv<W: Write>(traj: &Trajectory, mut out: W) -> std::io::Result<()> {
    writeln!(out, "t,j,A,P,R")?;
    for s in &traj.snapshots {
        for j in 0..s.len() {
            writeln!(out, "{},{},{},{},{}", s.t, j + 1, s.a[j], s.p[j], s.r[j])?;
        }
    }
    Ok(())
}

fn bc_encode(bc: &BoundaryCondition) -> (u8, f64) {
    match *bc {
        BoundaryCondition::PaperRow { a_left_init } => (0, a_left_init),
        BoundaryCondition::Periodic => (1, 0.0),
        BoundaryCondition::InfluxLeft { rate } => (2, rate),
    }
}

pub fn write_binary<W: Write>(traj: &Trajectory, mut out: W) -> std::io::Result<()> {
    let n = traj.n_cells();
    out.write_all(MAGIC)?;
    out.write_all(&FORMAT_VERSION.to_le_bytes())?;
    out.write_all(&(n as u32).to_le_bytes())?;
    out.write_all(&(traj.snapshots.len() as u64).to_le_bytes())?;
    out.write_all(&traj.sample_dt.to_le_bytes())?;
    let p = &traj.params;
    for v in [
        p.t_act, p.t_diff, p.k_a, p.k_r, p.k_m, p.k_1, p.alpha, p.delta, p.k_2,
    ] {
        out.write_all(&v.to_le_bytes())?;
    }
    let (tag, value) = bc_encode(&traj.bc);
    out.write_all(&[tag, 0, 0, 0, 0, 0, 0, 0])?;
    out.write_all(&value.to_le_bytes())?;
    for s in &traj.snapshots {
        out.write_all(&s.t.to_le_bytes())?;
        for v in s.a.iter().chain(&s.p).chain(&s.r) {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const K: usize>(&mut self) -> Result<[u8; K]> {
        let mut buf = [0u8; K];
        self.inner
            .read_exact(&mut buf)
            .map_err(|e| Error::Format(format!("truncated input: {e}")))?;
        Ok(buf)
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

    fn vec(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| self.f64()).collect()
    }
}

pub fn read_binary<R: Read>(input: R) -> Result<Trajectory> {
    let mut r = Reader { inner: input };
    if &r.bytes::<8>()? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let n = r.u32()? as usize;
    let m = r.u64()? as usize;
    let sample_dt = r.f64()?;
    let v = r.vec(9)?;
    let params = ModelParams {
        t_act: v[0],
        t_diff: v[1],
        k_a: v[2],
        k_r: v[3],
        k_m: v[4],
        k_1: v[5],
        alpha: v[6],
        delta: v[7],
        k_2: v[8],
    };
    let tag = r.bytes::<8>()?[0];
    let value = r.f64()?;
    let bc = match tag {
        0 => BoundaryCondition::PaperRow { a_left_init: value },
        1 => BoundaryCondition::Periodic,
        2 => BoundaryCondition::InfluxLeft { rate: value },
        other => return Err(Error::Format(format!("unknown boundary tag {other}"))),
    };
    let mut snapshots = Vec::with_capacity(m);
    for _ in 0..m {
        let t = r.f64()?;
        let a = r.vec(n)?;
        let p = r.vec(n)?;
        let rr = r.vec(n)?;
        snapshots.push(LatticeState { t, a, p, r: rr });
    }
    Ok(Trajectory {
        snapshots,
        sample_dt,
        params,
        bc,
    })
}
