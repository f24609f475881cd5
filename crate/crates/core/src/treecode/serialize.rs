//! Plain-text code files.
//!
//! ```text
//! n k horizon affine
//! <n hex rows of G_1, space separated>
//! ...
//! <n hex rows of G_T, space separated>
//! <v_1>            (affine codes only, one line per depth)
//! ...
//! ```
//!
//! Rows are `k`-bit words (bit `j` = column `j`) printed as lowercase hex
//! padded to `⌈k/4⌉` digits; translation words are `n`-bit, padded to
//! `⌈n/4⌉` digits.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::bits::GeneratorBlock;
use super::code::LtiCode;
use crate::{Error, Result};

impl LtiCode {
    pub fn to_text(&self) -> String {
        let (n, k) = (self.n(), self.k());
        let kw = k.div_ceil(4);
        let nw = n.div_ceil(4);
        let mut out = format!("{n} {k} {} {}\n", self.horizon(), u8::from(self.is_affine()));
        for g in self.blocks() {
            let rows: Vec<String> = g.rows().iter().map(|r| format!("{r:0kw$x}")).collect();
            out.push_str(&rows.join(" "));
            out.push('\n');
        }
        if let Some(v) = self.translation() {
            for w in v {
                let _ = writeln!(out, "{w:0nw$x}");
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let (ln, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty file".into() })?;
        let fields: Vec<usize> = header
            .split_whitespace()
            .map(|f| f.parse().map_err(|_| parse_err(ln, format!("bad header field {f:?}"))))
            .collect::<Result<_>>()?;
        let [n, k, horizon, affine] = fields[..] else {
            return Err(parse_err(ln, "header must be `n k horizon affine`"));
        };
        if affine > 1 {
            return Err(parse_err(ln, "affine flag must be 0 or 1"));
        }
        let mut blocks = Vec::with_capacity(horizon);
        for t in 1..=horizon {
            let (ln, line) = lines.next().ok_or_else(|| parse_err(t + 1, "missing generator block"))?;
            let rows: Vec<u64> = line.split_whitespace().map(|h| parse_hex(ln, h)).collect::<Result<_>>()?;
            let g = GeneratorBlock::from_rows(n, k, &rows).map_err(|e| parse_err(ln, e.to_string()))?;
            blocks.push(g);
        }
        let translation = if affine == 1 {
            let mut v = Vec::with_capacity(horizon);
            for t in 1..=horizon {
                let (ln, line) = lines
                    .next()
                    .ok_or_else(|| parse_err(horizon + t + 1, "missing translation word"))?;
                v.push(parse_hex(ln, line)?);
            }
            Some(v)
        } else {
            None
        };
        if let Some((ln, extra)) = lines.find(|(_, l)| !l.is_empty()) {
            return Err(parse_err(ln, format!("trailing content {extra:?}")));
        }
        LtiCode::from_parts(n, k, blocks, translation)
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_hex(line: usize, s: &str) -> Result<u64> {
    u64::from_str_radix(s, 16).map_err(|_| parse_err(line, format!("bad hex word {s:?}")))
}

pub fn write_code(path: impl AsRef<Path>, code: &LtiCode) -> Result<()> {
    std::fs::write(path, code.to_text())?;
    Ok(())
}

pub fn read_code(path: impl AsRef<Path>) -> Result<LtiCode> {
    LtiCode::from_text(&std::fs::read_to_string(path)?)
}

/// Short content hash of the serialized code, for CSV metadata.
pub fn code_digest(code: &LtiCode) -> String {
    let digest = Sha256::digest(code.to_text().as_bytes());
    hex::encode(&digest[..8])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treecode::sample_lti;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn known_layout() {
        let g1 = GeneratorBlock::from_columns(2, vec![0b11]).unwrap();
        let g2 = GeneratorBlock::from_columns(2, vec![0b10]).unwrap();
        let code = LtiCode::from_parts(2, 1, vec![g1, g2], Some(vec![0b01, 0b10])).unwrap();
        assert_eq!(code.to_text(), "2 1 2 1\n1 1\n0 1\n1\n2\n");
    }

    #[test]
    fn malformed_inputs() {
        assert!(LtiCode::from_text("").is_err());
        assert!(LtiCode::from_text("2 1 1\n1 1\n").is_err());
        assert!(LtiCode::from_text("2 1 2 0\n1 1\n").is_err());
        assert!(LtiCode::from_text("2 1 1 0\n1 zz\n").is_err());
        // rank-deficient G_1
        assert!(LtiCode::from_text("2 1 1 0\n0 0\n").is_err());
        assert!(LtiCode::from_text("2 1 1 0\n1 1\nextra\n").is_err());
        assert!(LtiCode::from_text("2 1 1 2\n1 1\n").is_err());
    }

    #[test]
    fn digest_is_stable() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let code = sample_lti(4, 1, 5, false, &mut rng).unwrap();
        assert_eq!(code_digest(&code), code_digest(&code.clone()));
        assert_eq!(code_digest(&code).len(), 16);
    }

    proptest! {
        #[test]
        fn text_round_trip_is_bit_exact(
            seed in any::<u64>(),
            n in 2usize..=64,
            kfrac in 0.0f64..1.0,
            horizon in 1usize..20,
            affine in any::<bool>(),
        ) {
            let k = 1 + ((n - 1) as f64 * kfrac) as usize % (n - 1);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let code = sample_lti(n, k, horizon, affine, &mut rng).unwrap();
            let text = code.to_text();
            let back = LtiCode::from_text(&text).unwrap();
            prop_assert_eq!(&back, &code);
            prop_assert_eq!(back.to_text(), text);
        }
    }
}
