//! Raw photocurrent dump: `"MCVORCL1"`, sample count (u64 LE), then the
//! samples as f64 LE.

use std::io::{Read, Write};

use crate::error::{Error, Result};

pub const DUMP_MAGIC: &[u8; 8] = b"MCVORCL1";
pub const DUMP_HEADER_LEN: usize = 16;

pub fn write_dump<W: Write>(mut w: W, samples: impl ExactSizeIterator<Item = f64>) -> Result<()> {
    w.write_all(DUMP_MAGIC)?;
    w.write_all(&(samples.len() as u64).to_le_bytes())?;
    for s in samples {
        w.write_all(&s.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn encode_dump(samples: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(DUMP_HEADER_LEN + 8 * samples.len());
    write_dump(&mut out, samples.iter().copied()).expect("writing to a Vec cannot fail");
    out
}

/// Parses a complete dump held in memory. Trailing bytes are an error.
pub fn decode_dump(bytes: &[u8]) -> Result<Vec<f64>> {
    if bytes.len() < DUMP_HEADER_LEN {
        return Err(Error::Dump(format!(
            "{} bytes is shorter than the {DUMP_HEADER_LEN}-byte header",
            bytes.len()
        )));
    }
    let (header, body) = bytes.split_at(DUMP_HEADER_LEN);
    if &header[..8] != DUMP_MAGIC {
        return Err(Error::Dump("bad magic".into()));
    }
    let count = u64::from_le_bytes(header[8..16].try_into().unwrap());
    let expected = count
        .checked_mul(8)
        .filter(|&n| n == body.len() as u64)
        .ok_or_else(|| {
            Error::Dump(format!(
                "header announces {count} samples but body holds {} bytes",
                body.len()
            ))
        })?;
    debug_assert_eq!(expected as usize, body.len());
    Ok(body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

pub fn read_dump<R: Read>(mut r: R) -> Result<Vec<f64>> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    decode_dump(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn layout_is_fixed() {
        let bytes = encode_dump(&[1.0, -2.5]);
        assert_eq!(&bytes[..8], b"MCVORCL1");
        assert_eq!(&bytes[8..16], &2u64.to_le_bytes());
        assert_eq!(&bytes[16..24], &1.0f64.to_le_bytes());
        assert_eq!(bytes.len(), 32);
    }

    #[test]
    fn rejects_malformed() {
        assert!(decode_dump(b"MCVORCL").is_err());
        assert!(decode_dump(b"MCVORCL2\0\0\0\0\0\0\0\0").is_err());
        let mut bytes = encode_dump(&[1.0, 2.0]);
        bytes.pop();
        assert!(decode_dump(&bytes).is_err());
        let mut huge = DUMP_MAGIC.to_vec();
        huge.extend_from_slice(&u64::MAX.to_le_bytes());
        assert!(decode_dump(&huge).is_err());
        assert_eq!(decode_dump(&encode_dump(&[])).unwrap(), Vec::<f64>::new());
    }

    proptest! {
        #[test]
        fn round_trip(xs in prop::collection::vec(any::<f64>(), 0..64)) {
            let back = decode_dump(&encode_dump(&xs)).unwrap();
            prop_assert_eq!(back.len(), xs.len());
            for (a, b) in back.iter().zip(&xs) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
