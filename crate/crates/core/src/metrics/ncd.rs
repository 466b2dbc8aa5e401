use std::io::Write;

use flate2::write::DeflateEncoder;
use flate2::Compression;

use crate::error::{Error, Result};

/// Deflate effort used for every compression distance.
pub const COMPRESSION_LEVEL: u32 = 9;

/// Size of the raw deflate stream at maximum effort.
pub fn compressed_len(data: &[u8]) -> usize {
    let mut enc = DeflateEncoder::new(Vec::new(), Compression::new(COMPRESSION_LEVEL));
    enc.write_all(data).expect("in-memory write");
    enc.finish().expect("in-memory write").len()
}

/// Normalized compression distance between two byte strings.
pub fn ncd(a: &[u8], b: &[u8]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("compression distance input"));
    }
    let ca = compressed_len(a);
    let cb = compressed_len(b);
    let mut ab = Vec::with_capacity(a.len() + b.len());
    ab.extend_from_slice(a);
    ab.extend_from_slice(b);
    let cab = compressed_len(&ab);
    Ok((cab as f64 - ca.min(cb) as f64) / ca.max(cb) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_distance_small() {
        let mut state = 12345u32;
        let x: Vec<u8> = (0..3600)
            .map(|_| {
                state = state.wrapping_mul(1_103_515_245).wrapping_add(12345);
                b"-----XHo?gT"[(state >> 16) as usize % 11]
            })
            .collect();
        assert!(ncd(&x, &x).unwrap() <= 0.05);
    }

    #[test]
    fn empty_rejected() {
        assert!(ncd(b"", b"abc").is_err());
    }
}
