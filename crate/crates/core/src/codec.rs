//! Framing shared by the certificate files: a magic tag selecting binary
//! or text encoding, a kind tag, a version, then a flat stream of
//! unsigned integers and floats.
//!
//! Binary streams are little-endian. Text streams are whitespace-separated
//! tokens with floats in shortest round-trip form, so both are lossless.

use std::fmt::Write as _;

use crate::error::CertFileError;

const BINARY_MAGIC: &[u8; 8] = b"CUTCERT\x01";
const TEXT_MAGIC: &str = "cutcert-text";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Encoding {
    #[default]
    Binary,
    Text,
}

pub(crate) struct Writer {
    encoding: Encoding,
    bytes: Vec<u8>,
    text: String,
}

impl Writer {
    pub fn new(encoding: Encoding, kind: &str, version: u32) -> Self {
        let mut w = Self { encoding, bytes: Vec::new(), text: String::new() };
        match encoding {
            Encoding::Binary => {
                w.bytes.extend_from_slice(BINARY_MAGIC);
                w.put_str(kind);
                w.bytes.extend_from_slice(&version.to_le_bytes());
            }
            Encoding::Text => {
                let _ = writeln!(w.text, "{TEXT_MAGIC} {kind} {version}");
            }
        }
        w
    }

    fn put_str(&mut self, s: &str) {
        self.bytes.extend_from_slice(&(s.len() as u32).to_le_bytes());
        self.bytes.extend_from_slice(s.as_bytes());
    }

    pub fn label(&mut self, name: &str) {
        if self.encoding == Encoding::Text {
            let _ = write!(self.text, "\n{name}\n");
        }
    }

    pub fn u64(&mut self, v: u64) {
        match self.encoding {
            Encoding::Binary => self.bytes.extend_from_slice(&v.to_le_bytes()),
            Encoding::Text => {
                let _ = writeln!(self.text, "{v}");
            }
        }
    }

    pub fn f64(&mut self, v: f64) {
        self.f64s(&[v]);
    }

    pub fn f64s(&mut self, vs: &[f64]) {
        match self.encoding {
            Encoding::Binary => {
                for v in vs {
                    self.bytes.extend_from_slice(&v.to_le_bytes());
                }
            }
            Encoding::Text => {
                for (i, v) in vs.iter().enumerate() {
                    let sep = if i + 1 == vs.len() { "\n" } else { " " };
                    let _ = write!(self.text, "{v:?}{sep}");
                }
            }
        }
    }

    pub fn finish(self) -> Vec<u8> {
        match self.encoding {
            Encoding::Binary => self.bytes,
            Encoding::Text => self.text.into_bytes(),
        }
    }
}

enum Source<'a> {
    Binary(&'a [u8]),
    Text(std::str::SplitAsciiWhitespace<'a>),
}

pub(crate) struct Reader<'a> {
    src: Source<'a>,
    pub version: u32,
}

fn corrupt(msg: impl Into<String>) -> CertFileError {
    CertFileError::Corrupt(msg.into())
}

impl<'a> Reader<'a> {
    pub fn new(data: &'a [u8], kind: &str, max_version: u32) -> Result<Self, CertFileError> {
        if data.starts_with(BINARY_MAGIC) {
            let mut r = Reader { src: Source::Binary(&data[BINARY_MAGIC.len()..]), version: 0 };
            let len = r.take_bytes(4)?;
            let len = u32::from_le_bytes(len.try_into().unwrap()) as usize;
            let got = r.take_bytes(len)?;
            if got != kind.as_bytes() {
                return Err(corrupt(format!("expected a {kind} file")));
            }
            let v = r.take_bytes(4)?;
            r.version = u32::from_le_bytes(v.try_into().unwrap());
            r.check_version(max_version)?;
            return Ok(r);
        }
        let text = std::str::from_utf8(data).map_err(|_| corrupt("unrecognized header"))?;
        let mut tokens = text.split_ascii_whitespace();
        if tokens.next() != Some(TEXT_MAGIC) {
            return Err(corrupt("unrecognized header"));
        }
        if tokens.next() != Some(kind) {
            return Err(corrupt(format!("expected a {kind} file")));
        }
        let version = tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| corrupt("missing version"))?;
        let r = Reader { src: Source::Text(tokens), version };
        r.check_version(max_version)?;
        Ok(r)
    }

    fn check_version(&self, max_version: u32) -> Result<(), CertFileError> {
        if self.version == 0 || self.version > max_version {
            Err(CertFileError::Version(self.version))
        } else {
            Ok(())
        }
    }

    fn take_bytes(&mut self, k: usize) -> Result<&'a [u8], CertFileError> {
        match &mut self.src {
            Source::Binary(rest) => {
                if rest.len() < k {
                    return Err(corrupt("unexpected end of file"));
                }
                let (head, tail) = rest.split_at(k);
                *rest = tail;
                Ok(head)
            }
            Source::Text(_) => unreachable!("byte access on a text stream"),
        }
    }

    fn token(&mut self) -> Result<&'a str, CertFileError> {
        match &mut self.src {
            Source::Text(tokens) => loop {
                let t = tokens.next().ok_or_else(|| corrupt("unexpected end of file"))?;
                // Section labels start with a letter; numbers never do
                // (`inf`/`NaN` are rejected separately).
                if !t.starts_with(|c: char| c.is_ascii_alphabetic()) || t == "inf" || t == "NaN" {
                    return Ok(t);
                }
            },
            Source::Binary(_) => unreachable!("token access on a binary stream"),
        }
    }

    pub fn u64(&mut self) -> Result<u64, CertFileError> {
        match self.src {
            Source::Binary(_) => Ok(u64::from_le_bytes(self.take_bytes(8)?.try_into().unwrap())),
            Source::Text(_) => {
                let t = self.token()?;
                t.parse().map_err(|_| corrupt(format!("bad integer `{t}`")))
            }
        }
    }

    /// A count that must fit comfortably in memory.
    pub fn len(&mut self, limit: usize) -> Result<usize, CertFileError> {
        let v = self.u64()?;
        if v > limit as u64 {
            return Err(corrupt(format!("dimension {v} exceeds {limit}")));
        }
        Ok(v as usize)
    }

    pub fn f64(&mut self) -> Result<f64, CertFileError> {
        let v = match self.src {
            Source::Binary(_) => f64::from_le_bytes(self.take_bytes(8)?.try_into().unwrap()),
            Source::Text(_) => {
                let t = self.token()?;
                t.parse().map_err(|_| corrupt(format!("bad float `{t}`")))?
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(corrupt("non-finite value"))
        }
    }

    pub fn f64s(&mut self, k: usize) -> Result<Vec<f64>, CertFileError> {
        (0..k).map(|_| self.f64()).collect()
    }

    pub fn finish(mut self) -> Result<(), CertFileError> {
        let trailing = match &mut self.src {
            Source::Binary(rest) => !rest.is_empty(),
            Source::Text(tokens) => tokens.next().is_some(),
        };
        if trailing {
            Err(corrupt("trailing data"))
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round_trip(enc: Encoding) {
        let vals = [0.1, -1e-300, 3.0, f64::MIN_POSITIVE, 1.0 / 3.0];
        let mut w = Writer::new(enc, "demo", 2);
        w.label("sizes");
        w.u64(5);
        w.label("values");
        w.f64s(&vals);
        let bytes = w.finish();
        let mut r = Reader::new(&bytes, "demo", 2).unwrap();
        assert_eq!(r.version, 2);
        assert_eq!(r.len(10).unwrap(), 5);
        let back = r.f64s(5).unwrap();
        for (a, b) in back.iter().zip(&vals) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        r.finish().unwrap();
    }

    #[test]
    fn binary_and_text_are_lossless() {
        round_trip(Encoding::Binary);
        round_trip(Encoding::Text);
    }

    #[test]
    fn rejects_bad_streams() {
        let mut w = Writer::new(Encoding::Binary, "demo", 1);
        w.f64(1.0);
        let bytes = w.finish();
        assert!(matches!(Reader::new(&bytes, "other", 1), Err(CertFileError::Corrupt(_))));
        assert!(matches!(Reader::new(&bytes, "demo", 0), Err(CertFileError::Version(1))));
        let mut r = Reader::new(&bytes[..bytes.len() - 1], "demo", 1).unwrap();
        assert!(r.f64().is_err());
        assert!(Reader::new(b"garbage", "demo", 1).is_err());
    }
}
