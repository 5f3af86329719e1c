//! Tensor export format: one JSON header line `{n, p, k, beta_bar, seed}`
//! followed by the entries as little-endian 64-bit floats in row-major order
//! (first index slowest).

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::spin_glass::SpikedTensor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorHeader {
    pub n: usize,
    pub p: u32,
    pub k: usize,
    pub beta_bar: Vec<f64>,
    pub seed: u64,
}

pub fn write_tensor(w: &mut impl Write, header: &TensorHeader, entries: &[f64]) -> io::Result<()> {
    let expected = (header.n as u128).pow(header.p);
    if entries.len() as u128 != expected {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            format!("{} entries but n^p = {expected}", entries.len()),
        ));
    }
    serde_json::to_writer(&mut *w, header)?;
    w.write_all(b"\n")?;
    for &x in entries {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_tensor(r: &mut impl BufRead) -> io::Result<(TensorHeader, Vec<f64>)> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: TensorHeader = serde_json::from_str(line.trim_end())
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("bad header: {e}")))?;
    let count = (header.n as u128).pow(header.p);
    if count > usize::MAX as u128 {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "tensor too large"));
    }
    let mut entries = Vec::with_capacity(count as usize);
    let mut buf = [0u8; 8];
    for _ in 0..count {
        r.read_exact(&mut buf)?;
        entries.push(f64::from_le_bytes(buf));
    }
    Ok((header, entries))
}

impl SpikedTensor {
    pub fn header(&self) -> TensorHeader {
        TensorHeader {
            n: self.n(),
            p: self.p(),
            k: self.k(),
            beta_bar: self.beta_bar().to_vec(),
            seed: self.seed(),
        }
    }

    pub fn write_to(&self, w: &mut impl Write) -> io::Result<()> {
        write_tensor(w, &self.header(), self.entries())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prior::Prior;
    use crate::spin_glass::make_spiked_tensor;

    #[test]
    fn round_trip() {
        let t = make_spiked_tensor(4, 3, &[Prior::rademacher()], &[1.5], 21).unwrap();
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        let (header, entries) = read_tensor(&mut buf.as_slice()).unwrap();
        assert_eq!(header, t.header());
        assert_eq!(entries, t.entries());
    }

    #[test]
    fn rejects_wrong_entry_count() {
        let header = TensorHeader {
            n: 3,
            p: 2,
            k: 1,
            beta_bar: vec![1.0],
            seed: 0,
        };
        let mut buf = Vec::new();
        assert!(write_tensor(&mut buf, &header, &[0.0; 4]).is_err());
    }
}
