//! Binary tensor dump format.
//!
//! Layout, fixed so fixtures are portable across implementations:
//! magic `AMCT`, version u32 = 1, the u32 shape counts (layers, positions,
//! dim for hidden dumps; vocab, dim for unembeddings), the 32-bit floats
//! row-major, then one length-prefixed UTF-8 string per position label or
//! vocabulary entry. All integers and floats are little-endian.

use std::io::{Read, Write};
use std::path::Path;

use super::{HiddenDump, IntrospectError, Unembedding};

const MAGIC: &[u8; 4] = b"AMCT";
const VERSION: u32 = 1;

struct Reader<R: Read> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn u32(&mut self) -> Result<u32, IntrospectError> {
        let mut buf = [0u8; 4];
        self.inner.read_exact(&mut buf).map_err(truncated)?;
        Ok(u32::from_le_bytes(buf))
    }

    fn f32s(&mut self, count: usize) -> Result<Vec<f32>, IntrospectError> {
        let mut bytes = vec![0u8; count.checked_mul(4).ok_or_else(overflow)?];
        self.inner.read_exact(&mut bytes).map_err(truncated)?;
        Ok(bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect())
    }

    fn string(&mut self) -> Result<String, IntrospectError> {
        let len = self.u32()? as usize;
        let mut bytes = vec![0u8; len];
        self.inner.read_exact(&mut bytes).map_err(truncated)?;
        String::from_utf8(bytes).map_err(|e| IntrospectError::Format(format!("bad UTF-8 label: {e}")))
    }

    fn header(&mut self, expected_counts: usize) -> Result<Vec<usize>, IntrospectError> {
        let mut magic = [0u8; 4];
        self.inner.read_exact(&mut magic).map_err(truncated)?;
        if &magic != MAGIC {
            return Err(IntrospectError::Format(format!("bad magic {magic:?}")));
        }
        let version = self.u32()?;
        if version != VERSION {
            return Err(IntrospectError::Format(format!(
                "unsupported version {version}, expected {VERSION}"
            )));
        }
        (0..expected_counts).map(|_| Ok(self.u32()? as usize)).collect()
    }

    fn expect_eof(&mut self) -> Result<(), IntrospectError> {
        let mut probe = [0u8; 1];
        match self.inner.read(&mut probe) {
            Ok(0) => Ok(()),
            Ok(_) => Err(IntrospectError::Format("trailing bytes after payload".into())),
            Err(e) => Err(IntrospectError::Io(e)),
        }
    }
}

fn truncated(e: std::io::Error) -> IntrospectError {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        IntrospectError::Format("file is truncated".into())
    } else {
        IntrospectError::Io(e)
    }
}

fn overflow() -> IntrospectError {
    IntrospectError::Format("declared size overflows".into())
}

struct Writer<W: Write> {
    inner: W,
}

impl<W: Write> Writer<W> {
    fn u32(&mut self, v: u32) -> std::io::Result<()> {
        self.inner.write_all(&v.to_le_bytes())
    }

    fn header(&mut self, counts: &[usize]) -> std::io::Result<()> {
        self.inner.write_all(MAGIC)?;
        self.u32(VERSION)?;
        for &c in counts {
            self.u32(c as u32)?;
        }
        Ok(())
    }

    fn f32s(&mut self, values: &[f32]) -> std::io::Result<()> {
        for v in values {
            self.inner.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    fn string(&mut self, s: &str) -> std::io::Result<()> {
        self.u32(s.len() as u32)?;
        self.inner.write_all(s.as_bytes())
    }
}

pub fn save_hidden_dump(dump: &HiddenDump, path: &Path) -> Result<(), IntrospectError> {
    let mut buf = Vec::new();
    let mut w = Writer { inner: &mut buf };
    w.header(&[dump.layers, dump.positions, dump.dim])?;
    w.f32s(&dump.data)?;
    for label in &dump.position_labels {
        w.string(label)?;
    }
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn load_hidden_dump(path: &Path) -> Result<HiddenDump, IntrospectError> {
    let file = std::fs::File::open(path)?;
    let mut r = Reader { inner: std::io::BufReader::new(file) };
    let counts = r.header(3)?;
    let (layers, positions, dim) = (counts[0], counts[1], counts[2]);
    let total = layers
        .checked_mul(positions)
        .and_then(|n| n.checked_mul(dim))
        .ok_or_else(overflow)?;
    let data = r.f32s(total)?;
    let labels: Vec<String> = (0..positions).map(|_| r.string()).collect::<Result<_, _>>()?;
    r.expect_eof()?;
    HiddenDump::new(layers, positions, dim, data, labels)
}

pub fn save_unembedding(u: &Unembedding, path: &Path) -> Result<(), IntrospectError> {
    let mut buf = Vec::new();
    let mut w = Writer { inner: &mut buf };
    w.header(&[u.vocab, u.dim])?;
    w.f32s(&u.matrix)?;
    for s in &u.vocab_strings {
        w.string(s)?;
    }
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn load_unembedding(path: &Path) -> Result<Unembedding, IntrospectError> {
    let file = std::fs::File::open(path)?;
    let mut r = Reader { inner: std::io::BufReader::new(file) };
    let counts = r.header(2)?;
    let (vocab, dim) = (counts[0], counts[1]);
    let total = vocab.checked_mul(dim).ok_or_else(overflow)?;
    let matrix = r.f32s(total)?;
    let strings: Vec<String> = (0..vocab).map(|_| r.string()).collect::<Result<_, _>>()?;
    r.expect_eof()?;
    Unembedding::new(vocab, dim, matrix, strings)
}
