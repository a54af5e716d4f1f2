//! Parameter archive.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic    b"ORSLCKPT"
//! version  u32 = 1
//! count    u32
//! count x {
//!   name_len u32, name (UTF-8)
//!   ndim     u32, dims  u64 x ndim
//!   values   f64 x prod(dims), row-major
//! }
//! ```
//!
//! Values are stored as raw IEEE-754 bits, so a save/load round trip is
//! bit-exact.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;

use super::tensor::Module;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"ORSLCKPT";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Checkpoint {
    pub entries: Vec<CheckpointEntry>,
}

impl Checkpoint {
    pub fn from_module(m: &dyn Module) -> Self {
        let mut ck = Self::default();
        ck.extend(m, "");
        ck
    }

    /// Appends every parameter of `m`, prefixing names with `prefix`.
    pub fn extend(&mut self, m: &dyn Module, prefix: &str) {
        for p in m.params() {
            self.entries.push(CheckpointEntry {
                name: format!("{prefix}{}", p.name),
                shape: p.shape(),
                values: p.value.iter().copied().collect(),
            });
        }
    }

    /// Copies matching entries (by name, after `prefix`) into `m`. Every
    /// parameter of `m` must be present with the same shape.
    pub fn restore(&self, m: &mut dyn Module, prefix: &str) -> Result<()> {
        for p in m.params_mut() {
            let key = format!("{prefix}{}", p.name);
            let e = self
                .entries
                .iter()
                .find(|e| e.name == key)
                .ok_or_else(|| Error::Checkpoint(format!("missing `{key}`")))?;
            if e.shape != p.shape() {
                return Err(Error::Checkpoint(format!("`{key}` has shape {:?}, expected {:?}", e.shape, p.shape())));
            }
            p.value = Array2::from_shape_vec(p.value.raw_dim(), e.values.clone())
                .map_err(|err| Error::Checkpoint(err.to_string()))?;
        }
        Ok(())
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.entries.len() as u32).to_le_bytes())?;
        for e in &self.entries {
            w.write_all(&(e.name.len() as u32).to_le_bytes())?;
            w.write_all(e.name.as_bytes())?;
            w.write_all(&(e.shape.len() as u32).to_le_bytes())?;
            for &d in &e.shape {
                w.write_all(&(d as u64).to_le_bytes())?;
            }
            for v in &e.values {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Checkpoint("bad magic".into()));
        }
        let version = read_u32(r)?;
        if version != VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {version}")));
        }
        let count = read_u32(r)? as usize;
        let mut entries = Vec::with_capacity(count);
        for _ in 0..count {
            let len = read_u32(r)? as usize;
            let mut name = vec![0u8; len];
            r.read_exact(&mut name)?;
            let name = String::from_utf8(name).map_err(|e| Error::Checkpoint(e.to_string()))?;
            let ndim = read_u32(r)? as usize;
            let mut shape = Vec::with_capacity(ndim);
            for _ in 0..ndim {
                let mut b = [0u8; 8];
                r.read_exact(&mut b)?;
                shape.push(u64::from_le_bytes(b) as usize);
            }
            let n: usize = shape.iter().product();
            let mut values = Vec::with_capacity(n);
            for _ in 0..n {
                let mut b = [0u8; 8];
                r.read_exact(&mut b)?;
                values.push(f64::from_le_bytes(b));
            }
            entries.push(CheckpointEntry { name, shape, values });
        }
        Ok(Self { entries })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(&mut BufReader::new(File::open(path)?))
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Activation, Mlp, MlpSpec};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn net(seed: u64) -> Mlp {
        let spec = MlpSpec {
            input_dim: 3,
            layer_widths: vec![4, 2],
            hidden_activation: Activation::Tanh,
            output_activation: Activation::Identity,
        };
        Mlp::new("net", spec, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn restore_into_fresh_network() {
        let a = net(1);
        let mut b = net(2);
        let mut buf = Vec::new();
        Checkpoint::from_module(&a).write_to(&mut buf).unwrap();
        Checkpoint::read_from(&mut buf.as_slice()).unwrap().restore(&mut b, "").unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
    }

    #[test]
    fn truncated_archive_is_an_error() {
        let mut buf = Vec::new();
        Checkpoint::from_module(&net(1)).write_to(&mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(Checkpoint::read_from(&mut buf.as_slice()).is_err());
        assert!(Checkpoint::read_from(&mut &b"NOTACKPT"[..]).is_err());
    }

    #[test]
    fn missing_entry_is_reported() {
        let ck = Checkpoint::default();
        assert!(matches!(ck.restore(&mut net(1), ""), Err(Error::Checkpoint(_))));
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(values in proptest::collection::vec(any::<f64>(), 1..40), name in "[a-z.]{1,12}") {
            let ck = Checkpoint { entries: vec![CheckpointEntry { name, shape: vec![values.len()], values }] };
            let mut buf = Vec::new();
            ck.write_to(&mut buf).unwrap();
            let back = Checkpoint::read_from(&mut buf.as_slice()).unwrap();
            prop_assert_eq!(ck.entries.len(), back.entries.len());
            let bits = |c: &Checkpoint| c.entries[0].values.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(&ck), bits(&back));
            prop_assert_eq!(&ck.entries[0].name, &back.entries[0].name);
        }
    }
}
