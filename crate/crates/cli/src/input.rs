//! Text input: one element per line, in the format written by `generate`.

use std::io::BufRead;

use anyhow::{bail, Context};
use hlll_core::datagen::{Dataset, InputKind};

pub fn read_dataset<R: BufRead>(reader: R, kind: InputKind, log2m: u8) -> anyhow::Result<Dataset> {
    let m = 1u64 << log2m;
    let lines = reader.lines().enumerate();
    Ok(match kind {
        InputKind::U64 => {
            let mut v = Vec::new();
            for (i, line) in lines {
                let line = line?;
                v.push(
                    line.trim()
                        .parse()
                        .with_context(|| format!("line {}: not a u64: {line:?}", i + 1))?,
                );
            }
            Dataset::U64(v)
        }
        InputKind::Ascii8 => {
            let mut v = Vec::new();
            for (i, line) in lines {
                let line = line?;
                let bytes: [u8; 8] = line.as_bytes().try_into().with_context(|| {
                    format!("line {}: expected 8 characters, got {line:?}", i + 1)
                })?;
                v.push(bytes);
            }
            Dataset::Ascii8(v)
        }
        InputKind::Pair => {
            let mut v = Vec::new();
            for (i, line) in lines {
                let line = line?;
                let mut parts = line.split_whitespace();
                let (Some(j), Some(r), None) = (parts.next(), parts.next(), parts.next()) else {
                    bail!("line {}: expected `j r`, got {line:?}", i + 1);
                };
                let j: u32 = j
                    .parse()
                    .with_context(|| format!("line {}: bad register index", i + 1))?;
                let r: u8 = r
                    .parse()
                    .with_context(|| format!("line {}: bad rank", i + 1))?;
                if j as u64 >= m || r == 0 {
                    bail!("line {}: pair ({j}, {r}) out of range for m={m}", i + 1);
                }
                v.push((j, r));
            }
            Dataset::Pair(v)
        }
    })
}
