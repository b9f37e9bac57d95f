//! Minimal ZIP writer (deflate, fixed timestamps) and a reader for
//! checking archives.

use std::io::{Read, Write};

use flate2::read::DeflateDecoder;
use flate2::write::DeflateEncoder;
use flate2::Compression;
use thiserror::Error;

/// 1980-01-01 00:00:00 in DOS format.
const DOS_TIME: u16 = 0;
const DOS_DATE: u16 = (1 << 5) | 1;
/// Bit 11: names are UTF-8.
const FLAGS: u16 = 1 << 11;
const METHOD_STORED: u16 = 0;
const METHOD_DEFLATE: u16 = 8;

fn u16le(out: &mut Vec<u8>, v: u16) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn u32le(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

/// Builds a ZIP archive. Entries keep their order; output depends only on
/// names and contents.
pub fn write_zip(entries: &[(String, Vec<u8>)]) -> Vec<u8> {
    let mut out = Vec::new();
    let mut central = Vec::new();
    for (name, data) in entries {
        let crc = crc32fast::hash(data);
        let mut enc = DeflateEncoder::new(Vec::new(), Compression::default());
        enc.write_all(data).expect("in-memory deflate");
        let deflated = enc.finish().expect("in-memory deflate");
        let (method, body) = if deflated.len() < data.len() {
            (METHOD_DEFLATE, deflated)
        } else {
            (METHOD_STORED, data.clone())
        };
        let offset = out.len() as u32;

        u32le(&mut out, 0x0403_4b50);
        u16le(&mut out, 20);
        u16le(&mut out, FLAGS);
        u16le(&mut out, method);
        u16le(&mut out, DOS_TIME);
        u16le(&mut out, DOS_DATE);
        u32le(&mut out, crc);
        u32le(&mut out, body.len() as u32);
        u32le(&mut out, data.len() as u32);
        u16le(&mut out, name.len() as u16);
        u16le(&mut out, 0);
        out.extend_from_slice(name.as_bytes());
        out.extend_from_slice(&body);

        u32le(&mut central, 0x0201_4b50);
        u16le(&mut central, 20);
        u16le(&mut central, 20);
        u16le(&mut central, FLAGS);
        u16le(&mut central, method);
        u16le(&mut central, DOS_TIME);
        u16le(&mut central, DOS_DATE);
        u32le(&mut central, crc);
        u32le(&mut central, body.len() as u32);
        u32le(&mut central, data.len() as u32);
        u16le(&mut central, name.len() as u16);
        u16le(&mut central, 0);
        u16le(&mut central, 0);
        u16le(&mut central, 0);
        u16le(&mut central, 0);
        u32le(&mut central, 0);
        u32le(&mut central, offset);
        central.extend_from_slice(name.as_bytes());
    }
    let cd_offset = out.len() as u32;
    let cd_len = central.len() as u32;
    out.extend_from_slice(&central);
    u32le(&mut out, 0x0605_4b50);
    u16le(&mut out, 0);
    u16le(&mut out, 0);
    u16le(&mut out, entries.len() as u16);
    u16le(&mut out, entries.len() as u16);
    u32le(&mut out, cd_len);
    u32le(&mut out, cd_offset);
    u16le(&mut out, 0);
    out
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ZipError {
    #[error("truncated archive")]
    Truncated,
    #[error("bad signature at offset {0}")]
    Signature(usize),
    #[error("unsupported compression method {0}")]
    Method(u16),
    #[error("CRC mismatch in {0}")]
    Crc(String),
    #[error("corrupt deflate stream in {0}")]
    Deflate(String),
}

fn rd16(b: &[u8], at: usize) -> Result<u16, ZipError> {
    b.get(at..at + 2)
        .map(|s| u16::from_le_bytes([s[0], s[1]]))
        .ok_or(ZipError::Truncated)
}

fn rd32(b: &[u8], at: usize) -> Result<u32, ZipError> {
    b.get(at..at + 4)
        .map(|s| u32::from_le_bytes([s[0], s[1], s[2], s[3]]))
        .ok_or(ZipError::Truncated)
}

/// Reads the entries of an archive through its central directory,
/// checking every CRC.
pub fn read_zip(bytes: &[u8]) -> Result<Vec<(String, Vec<u8>)>, ZipError> {
    let eocd = (0..bytes.len().saturating_sub(21))
        .rev()
        .find(|&i| rd32(bytes, i) == Ok(0x0605_4b50))
        .ok_or(ZipError::Truncated)?;
    let count = rd16(bytes, eocd + 10)? as usize;
    let mut at = rd32(bytes, eocd + 16)? as usize;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        if rd32(bytes, at)? != 0x0201_4b50 {
            return Err(ZipError::Signature(at));
        }
        let method = rd16(bytes, at + 10)?;
        let crc = rd32(bytes, at + 16)?;
        let csize = rd32(bytes, at + 20)? as usize;
        let usize_ = rd32(bytes, at + 24)? as usize;
        let nlen = rd16(bytes, at + 28)? as usize;
        let elen = rd16(bytes, at + 30)? as usize;
        let clen = rd16(bytes, at + 32)? as usize;
        let local = rd32(bytes, at + 42)? as usize;
        let name = String::from_utf8_lossy(bytes.get(at + 46..at + 46 + nlen).ok_or(ZipError::Truncated)?)
            .into_owned();
        at += 46 + nlen + elen + clen;

        if rd32(bytes, local)? != 0x0403_4b50 {
            return Err(ZipError::Signature(local));
        }
        let start = local + 30 + rd16(bytes, local + 26)? as usize + rd16(bytes, local + 28)? as usize;
        let body = bytes.get(start..start + csize).ok_or(ZipError::Truncated)?;
        let data = match method {
            METHOD_STORED => body.to_vec(),
            METHOD_DEFLATE => {
                let mut d = Vec::with_capacity(usize_);
                DeflateDecoder::new(body)
                    .read_to_end(&mut d)
                    .map_err(|_| ZipError::Deflate(name.clone()))?;
                d
            }
            m => return Err(ZipError::Method(m)),
        };
        if crc32fast::hash(&data) != crc || data.len() != usize_ {
            return Err(ZipError::Crc(name));
        }
        out.push((name, data));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let entries = vec![
            ("a.txt".to_string(), b"hello hello hello hello".to_vec()),
            ("empty".to_string(), Vec::new()),
            ("bin.dat".to_string(), (0..=255u8).collect()),
            ("ž.txt".to_string(), "žluťoučký".as_bytes().to_vec()),
        ];
        let z = write_zip(&entries);
        assert_eq!(read_zip(&z).unwrap(), entries);
        assert_eq!(write_zip(&entries), z);
    }

    #[test]
    fn corrupted_crc_is_detected() {
        let z = write_zip(&[("x".into(), vec![7u8; 5])]);
        let mut bad = z.clone();
        // Stored body byte right after the 30-byte header and 1-byte name.
        bad[31] ^= 1;
        assert_eq!(read_zip(&bad), Err(ZipError::Crc("x".into())));
    }

    #[test]
    fn empty_archive() {
        let z = write_zip(&[]);
        assert_eq!(z.len(), 22);
        assert!(read_zip(&z).unwrap().is_empty());
    }
}
