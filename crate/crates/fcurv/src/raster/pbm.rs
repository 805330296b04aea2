//! Portable bitmap (PBM) reader and writer, P1 (ASCII) and P4 (raw).
//!
//! PBM value 1 is black and is treated as foreground. P4 rows are padded to
//! byte boundaries, most significant bit first.

use super::BinaryImage;
use crate::error::{Error, Result};
use std::io::Write;
use std::path::Path;

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::PbmParse {
            offset: self.pos,
            msg: msg.into(),
        }
    }

    /// Skips whitespace and `#` comments (which run to end of line).
    fn skip_separators(&mut self) {
        while self.pos < self.data.len() {
            let b = self.data[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn read_uint(&mut self) -> Result<usize> {
        self.skip_separators();
        let start = self.pos;
        while self.pos < self.data.len() && self.data[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected unsigned integer"));
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|e| self.err(format!("bad integer: {e}")))
    }
}

/// Parses a PBM (P1 or P4) from raw bytes.
pub fn load_pbm_bytes(data: &[u8]) -> Result<BinaryImage> {
    let mut cur = Cursor { data, pos: 0 };
    cur.skip_separators();
    if data.len() < cur.pos + 2 {
        return Err(cur.err("truncated magic number"));
    }
    let magic = &data[cur.pos..cur.pos + 2];
    let raw = match magic {
        b"P1" => false,
        b"P4" => true,
        _ => return Err(cur.err(format!("unsupported magic {:?}", magic))),
    };
    cur.pos += 2;
    let width = cur.read_uint()?;
    let height = cur.read_uint()?;
    if width == 0 || height == 0 {
        return Err(cur.err("zero image dimension"));
    }
    let mut img = BinaryImage::new(width, height);
    if raw {
        // Exactly one whitespace byte separates the header from the payload.
        if cur.pos >= data.len() || !data[cur.pos].is_ascii_whitespace() {
            return Err(cur.err("expected single whitespace before P4 payload"));
        }
        cur.pos += 1;
        let row_bytes = (width + 7) / 8;
        if data.len() < cur.pos + row_bytes * height {
            cur.pos = data.len();
            return Err(cur.err(format!(
                "truncated P4 payload: need {} bytes",
                row_bytes * height
            )));
        }
        for y in 0..height {
            let row = &data[cur.pos + y * row_bytes..cur.pos + (y + 1) * row_bytes];
            for x in 0..width {
                let bit = (row[x / 8] >> (7 - x % 8)) & 1;
                if bit == 1 {
                    img.set(x, y, true);
                }
            }
        }
    } else {
        for y in 0..height {
            for x in 0..width {
                cur.skip_separators();
                if cur.pos >= data.len() {
                    return Err(cur.err("truncated P1 payload"));
                }
                match data[cur.pos] {
                    b'0' => {}
                    b'1' => img.set(x, y, true),
                    other => {
                        return Err(cur.err(format!("expected 0 or 1, got {:?}", other as char)))
                    }
                }
                cur.pos += 1;
            }
        }
    }
    Ok(img)
}

pub fn load_pbm(path: impl AsRef<Path>) -> Result<BinaryImage> {
    let path = path.as_ref();
    let data = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    load_pbm_bytes(&data)
}

fn encode_p4(img: &BinaryImage) -> Vec<u8> {
    let row_bytes = (img.width() + 7) / 8;
    let mut out = format!("P4\n{} {}\n", img.width(), img.height()).into_bytes();
    for y in 0..img.height() {
        let mut row = vec![0u8; row_bytes];
        for x in 0..img.width() {
            if img.get(x, y) {
                row[x / 8] |= 1 << (7 - x % 8);
            }
        }
        out.extend_from_slice(&row);
    }
    out
}

/// Writes the image as raw PBM (P4).
pub fn save_pbm(img: &BinaryImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_p4(img)).map_err(|e| Error::io(path, e))
}

/// Writes the image as ASCII PBM (P1), one row per line.
pub fn save_pbm_ascii(img: &BinaryImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    (|| -> std::io::Result<()> {
        writeln!(w, "P1")?;
        writeln!(w, "{} {}", img.width(), img.height())?;
        for y in 0..img.height() {
            let mut line = String::with_capacity(2 * img.width());
            for x in 0..img.width() {
                line.push(if img.get(x, y) { '1' } else { '0' });
                if x + 1 < img.width() {
                    line.push(' ');
                }
            }
            writeln!(w, "{line}")?;
        }
        w.flush()
    })()
    .map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn p1_minimal() {
        let img = load_pbm_bytes(b"P1 2 1 1 0").unwrap();
        assert_eq!((img.width(), img.height()), (2, 1));
        assert!(img.get(0, 0));
        assert!(!img.get(1, 0));
    }

    #[test]
    fn p1_with_comments() {
        let img = load_pbm_bytes(b"P1\n# comment line\n 3 # another\n2\n0 1 0\n1 1 1\n").unwrap();
        assert_eq!((img.width(), img.height()), (3, 2));
        assert_eq!(img.foreground_count(), 4);
    }

    fn random_image(w: usize, h: usize, seed: u64) -> BinaryImage {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut img = BinaryImage::new(w, h);
        for y in 0..h {
            for x in 0..w {
                if rng.gen_bool(0.5) {
                    img.set(x, y, true);
                }
            }
        }
        img
    }

    #[test]
    fn p4_roundtrip_64x64() {
        let img = random_image(64, 64, 1);
        let bytes = encode_p4(&img);
        let back = load_pbm_bytes(&bytes).unwrap();
        assert_eq!(img, back);
    }

    #[test]
    fn p4_padded_width_10_roundtrips_against_p1_writer() {
        // Oracle: an independent P1 encoding of the same pixels.
        let img = random_image(10, 7, 2);
        let mut p1 = String::from("P1\n10 7\n");
        for y in 0..7 {
            for x in 0..10 {
                p1.push(if img.get(x, y) { '1' } else { '0' });
                p1.push(' ');
            }
            p1.push('\n');
        }
        let from_p1 = load_pbm_bytes(p1.as_bytes()).unwrap();
        let from_p4 = load_pbm_bytes(&encode_p4(&img)).unwrap();
        assert_eq!(from_p1, from_p4);
        assert_eq!(from_p1, img);
    }

    #[test]
    fn file_roundtrip() {
        let dir = std::env::temp_dir().join("fcurv_pbm_test");
        std::fs::create_dir_all(&dir).unwrap();
        let img = random_image(37, 23, 3);
        let p4 = dir.join("a.pbm");
        let p1 = dir.join("a_ascii.pbm");
        save_pbm(&img, &p4).unwrap();
        save_pbm_ascii(&img, &p1).unwrap();
        assert_eq!(load_pbm(&p4).unwrap(), img);
        assert_eq!(load_pbm(&p1).unwrap(), img);
    }

    #[test]
    fn truncated_p4_reports_offset() {
        let err = load_pbm_bytes(b"P4\n16 2\n\x01").unwrap_err();
        match err {
            Error::PbmParse { offset, .. } => assert!(offset > 0),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn bad_magic_rejected() {
        assert!(load_pbm_bytes(b"P5 2 2 255 ....").is_err());
    }
}
