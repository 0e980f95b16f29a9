//! Binary field snapshots.
//!
//! Layout (all little-endian): magic `b"SNSFIELD"`, `u32` resolution `N`,
//! `u32` flags (bit 0: divergence-free), then for every wavevector in
//! lexicographic order `k1, k2, k3 ∈ [-N/2, N/2)` (k1 slowest) the three
//! components as `(re, im)` pairs of `f64`.

use super::{flat_index, SpectralField};
use crate::{Error, Result};
use num_complex::Complex64;
use std::io::{Read, Write};

const MAGIC: &[u8; 8] = b"SNSFIELD";

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub field: SpectralField,
    pub divergence_free_flag: bool,
}

pub fn write_snapshot<W: Write>(field: &SpectralField, mut w: W) -> Result<()> {
    let n = field.n();
    w.write_all(MAGIC)?;
    w.write_all(&(n as u32).to_le_bytes())?;
    let flags: u32 = u32::from(field.is_divergence_free());
    w.write_all(&flags.to_le_bytes())?;
    let half = (n / 2) as i64;
    for k1 in -half..half {
        for k2 in -half..half {
            for k3 in -half..half {
                let idx = flat_index(n, [k1, k2, k3]);
                for c in 0..3 {
                    let z = field.coeffs(c)[idx];
                    w.write_all(&z.re.to_le_bytes())?;
                    w.write_all(&z.im.to_le_bytes())?;
                }
            }
        }
    }
    Ok(())
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<Snapshot> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::invalid("not a field snapshot"));
    }
    let mut word = [0u8; 4];
    r.read_exact(&mut word)?;
    let n = u32::from_le_bytes(word) as usize;
    r.read_exact(&mut word)?;
    let flags = u32::from_le_bytes(word);
    super::check_resolution(n)?;
    let len = n * n * n;
    let mut coeffs: [Vec<Complex64>; 3] = std::array::from_fn(|_| vec![Complex64::default(); len]);
    let half = (n / 2) as i64;
    let mut buf = [0u8; 8];
    let mut next = |r: &mut R| -> Result<f64> {
        r.read_exact(&mut buf)?;
        Ok(f64::from_le_bytes(buf))
    };
    for k1 in -half..half {
        for k2 in -half..half {
            for k3 in -half..half {
                let idx = flat_index(n, [k1, k2, k3]);
                for c in coeffs.iter_mut() {
                    let re = next(&mut r)?;
                    let im = next(&mut r)?;
                    c[idx] = Complex64::new(re, im);
                }
            }
        }
    }
    let mut field = SpectralField::from_coeffs(n, coeffs)?;
    let flag = flags & 1 == 1;
    field.set_divergence_free(flag && field.divergence_residual() <= 1e-12);
    Ok(Snapshot {
        field,
        divergence_free_flag: flag,
    })
}
