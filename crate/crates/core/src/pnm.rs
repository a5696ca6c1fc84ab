//! Portable GrayMap (P2 ASCII / P5 binary) reading and writing.
//! <https://netpbm.sourceforge.net/doc/pgm.html>

use std::io::Write;

/// Decoded grayscale image. Rows are stored top to bottom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub pixels: Vec<u16>,
}

/// Parse failure with the 1-based line on which it was detected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PnmError {
    pub line: usize,
    pub msg: String,
}

impl PnmError {
    fn new(line: usize, msg: impl Into<String>) -> Self {
        Self { line, msg: msg.into() }
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    line: usize,
    /// Line of the most recent token, reported for truncation at end of input.
    last_line: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            match b {
                b'#' => {
                    while let Some(&c) = self.bytes.get(self.pos) {
                        if c == b'\n' {
                            break;
                        }
                        self.pos += 1;
                    }
                }
                b'\n' => {
                    self.line += 1;
                    self.pos += 1;
                }
                b' ' | b'\t' | b'\r' | 0x0b | 0x0c => self.pos += 1,
                _ => break,
            }
        }
    }

    fn token(&mut self, what: &str) -> Result<&'a [u8], PnmError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() || b == b'#' {
                break;
            }
            self.pos += 1;
        }
        if start == self.pos {
            return Err(PnmError::new(self.last_line, format!("truncated: missing {what}")));
        }
        self.last_line = self.line;
        Ok(&self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<u64, PnmError> {
        let tok = self.token(what)?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<u64>().ok())
            .ok_or_else(|| PnmError::new(self.line, format!("malformed {what}: {:?}", String::from_utf8_lossy(tok))))
    }
}

pub fn parse_pgm(bytes: &[u8]) -> Result<Pgm, PnmError> {
    let mut cur = Cursor {
        bytes,
        pos: 0,
        line: 1,
        last_line: 1,
    };
    let binary = match bytes.get(..2) {
        Some(b"P2") => false,
        Some(b"P5") => true,
        Some(m) => {
            return Err(PnmError::new(1, format!("unsupported magic number {:?}", String::from_utf8_lossy(m))))
        }
        None => return Err(PnmError::new(1, "truncated: missing magic number")),
    };
    cur.pos = 2;
    if !matches!(bytes.get(2), Some(b) if b.is_ascii_whitespace() || *b == b'#') {
        return Err(PnmError::new(1, "malformed header after magic number"));
    }
    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(PnmError::new(cur.line, "image must have nonzero width and height"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(PnmError::new(cur.line, format!("maxval {maxval} outside 1..=65535")));
    }
    let maxval = maxval as u16;
    let count = width
        .checked_mul(height)
        .ok_or_else(|| PnmError::new(cur.line, "image dimensions overflow"))?;

    let mut pixels = Vec::with_capacity(count);
    if binary {
        // Exactly one whitespace byte separates the header from the raster.
        match bytes.get(cur.pos) {
            Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
            _ => return Err(PnmError::new(cur.line, "truncated: missing raster")),
        }
        let wide = maxval > 255;
        let need = count * if wide { 2 } else { 1 };
        let raster = bytes
            .get(cur.pos..cur.pos + need)
            .ok_or_else(|| PnmError::new(cur.line, format!("truncated raster: need {need} bytes, have {}", bytes.len() - cur.pos)))?;
        if wide {
            pixels.extend(raster.chunks_exact(2).map(|p| u16::from_be_bytes([p[0], p[1]])));
        } else {
            pixels.extend(raster.iter().map(|&b| b as u16));
        }
    } else {
        for k in 0..count {
            let v = cur.number(&format!("sample {k}"))?;
            if v > maxval as u64 {
                return Err(PnmError::new(cur.line, format!("sample {v} exceeds maxval {maxval}")));
            }
            pixels.push(v as u16);
        }
    }
    if let Some(k) = pixels.iter().position(|&p| p > maxval) {
        return Err(PnmError::new(cur.line, format!("sample {} at {k} exceeds maxval {maxval}", pixels[k])));
    }
    Ok(Pgm {
        width,
        height,
        maxval,
        pixels,
    })
}

/// Writes an 8-bit binary (P5) image. `pixels` holds rows top to bottom.
pub fn write_p5<W: Write>(mut w: W, width: usize, height: usize, pixels: &[u8]) -> std::io::Result<()> {
    assert_eq!(pixels.len(), width * height, "pixel count does not match dimensions");
    write!(w, "P5\n{width} {height}\n255\n")?;
    w.write_all(pixels)?;
    w.flush()
}

/// Writes an ASCII (P2) image with the given maxval.
pub fn write_p2<W: Write>(mut w: W, width: usize, height: usize, maxval: u16, pixels: &[u16]) -> std::io::Result<()> {
    assert_eq!(pixels.len(), width * height, "pixel count does not match dimensions");
    write!(w, "P2\n{width} {height}\n{maxval}\n")?;
    for row in pixels.chunks(width) {
        let line: Vec<String> = row.iter().map(|p| p.to_string()).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    w.flush()
}
