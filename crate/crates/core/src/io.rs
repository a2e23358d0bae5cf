//! Signal file formats.
//!
//! * Binary: little-endian `f32` pairs, interleaved `re, im, re, im, ...`.
//! * CSV: header `index,re,im`, one row per sample.
//!
//! Readers return raw sample vectors; wrap them in [`Signal`] where the
//! power-of-two invariant matters.
//!
//! [`Signal`]: crate::signal::Signal

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::ComplexSample;

pub fn encode_binary(samples: &[ComplexSample]) -> Vec<u8> {
    let mut out = Vec::with_capacity(samples.len() * 8);
    for s in samples {
        out.extend_from_slice(&s.re.to_le_bytes());
        out.extend_from_slice(&s.im.to_le_bytes());
    }
    out
}

pub fn decode_binary(bytes: &[u8]) -> std::result::Result<Vec<ComplexSample>, String> {
    if !bytes.len().is_multiple_of(8) {
        return Err(format!(
            "binary signal length {} is not a multiple of 8 bytes",
            bytes.len()
        ));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| {
            ComplexSample::new(
                f32::from_le_bytes([c[0], c[1], c[2], c[3]]),
                f32::from_le_bytes([c[4], c[5], c[6], c[7]]),
            )
        })
        .collect())
}

pub fn write_binary(path: impl AsRef<Path>, samples: &[ComplexSample]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_binary(samples)).map_err(|e| Error::io(path, e))
}

pub fn read_binary(path: impl AsRef<Path>) -> Result<Vec<ComplexSample>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_binary(&bytes).map_err(|m| Error::parse(path, m))
}

#[derive(Debug, Serialize, Deserialize)]
struct SampleRow {
    index: usize,
    re: f32,
    im: f32,
}

pub fn write_csv(path: impl AsRef<Path>, samples: &[ComplexSample]) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file);
    for (index, s) in samples.iter().enumerate() {
        w.serialize(SampleRow {
            index,
            re: s.re,
            im: s.im,
        })
        .map_err(|e| Error::parse(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Rows may come in any order but indexes must cover `0..len` exactly once.
pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<ComplexSample>> {
    let path = path.as_ref();
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::parse(path, e))?;
    let mut rows = Vec::new();
    for row in r.deserialize::<SampleRow>() {
        rows.push(row.map_err(|e| Error::parse(path, e))?);
    }
    let mut out = vec![None; rows.len()];
    for row in rows {
        match out.get_mut(row.index) {
            Some(slot @ None) => *slot = Some(ComplexSample::new(row.re, row.im)),
            Some(Some(_)) => return Err(Error::parse(path, format!("duplicate index {}", row.index))),
            None => return Err(Error::parse(path, format!("index {} out of range", row.index))),
        }
    }
    Ok(out.into_iter().map(|s| s.expect("all indexes covered")).collect())
}

/// Picks the format from the extension: `.csv` is CSV, anything else binary.
pub fn read_samples(path: impl AsRef<Path>) -> Result<Vec<ComplexSample>> {
    let path = path.as_ref();
    if is_csv(path) {
        read_csv(path)
    } else {
        read_binary(path)
    }
}

pub fn write_samples(path: impl AsRef<Path>, samples: &[ComplexSample]) -> Result<()> {
    let path = path.as_ref();
    if is_csv(path) {
        write_csv(path, samples)
    } else {
        write_binary(path, samples)
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn binary_layout_is_interleaved_le() {
        let s = [ComplexSample::new(1.0, -2.0)];
        let b = encode_binary(&s);
        assert_eq!(&b[..4], &1.0f32.to_le_bytes());
        assert_eq!(&b[4..], &(-2.0f32).to_le_bytes());
        assert!(decode_binary(&b[..7]).is_err());
    }

    #[test]
    fn csv_file_has_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        write_samples(&p, &[ComplexSample::new(0.5, 1.5), ComplexSample::new(-1.0, 0.0)]).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert_eq!(text, "index,re,im\n0,0.5,1.5\n1,-1.0,0.0\n");
        let back = read_samples(&p).unwrap();
        assert_eq!(back[0], ComplexSample::new(0.5, 1.5));
    }

    #[test]
    fn csv_rejects_gaps() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        fs::write(&p, "index,re,im\n0,1,1\n2,0,0\n").unwrap();
        assert!(read_csv(&p).is_err());
    }

    proptest! {
        #[test]
        fn file_round_trip(v in prop::collection::vec((-1e6f32..1e6, -1e6f32..1e6), 1..64), csv in any::<bool>()) {
            let samples: Vec<_> = v.into_iter().map(|(r, i)| ComplexSample::new(r, i)).collect();
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join(if csv { "x.csv" } else { "x.bin" });
            write_samples(&p, &samples).unwrap();
            prop_assert_eq!(read_samples(&p).unwrap(), samples);
        }
    }
}
