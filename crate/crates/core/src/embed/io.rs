//! word2vec text vectors and the native `CIV1` model snapshot.
//!
//! Snapshot layout, little-endian:
//!
//! ```text
//! "CIV1" | u32 vocab | u32 dim | per token: u16 len, UTF-8 bytes,
//!                                 dim x f32 V_w, dim x f32 V'_w
//! ```

use std::collections::HashSet;
use std::io::{BufRead, Read, Write};

use super::{EmbedError, EmbeddingModel};

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"CIV1";

/// Writes the header line and one `token v1 v2 ... ` line per entry with six
/// decimals, as word2vec does with `-binary 0`.
pub fn write_word2vec_text<'a, W, I>(
    mut out: W,
    count: usize,
    dim: usize,
    entries: I,
) -> std::io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = (&'a str, Vec<f64>)>,
{
    writeln!(out, "{count} {dim}")?;
    for (token, v) in entries {
        write!(out, "{token} ")?;
        for x in v {
            write!(out, "{x:.6} ")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Token and vector pairs in file order.
pub type TextVectors = Vec<(String, Vec<f64>)>;

/// Parses word2vec text vectors into `(dim, entries)`.
pub fn read_word2vec_text<R: BufRead>(input: R) -> Result<(usize, TextVectors), EmbedError> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| EmbedError::Format("missing header".into()))??;
    let mut fields = header.split_whitespace();
    let parse = |f: Option<&str>| f.and_then(|s| s.parse::<usize>().ok());
    let (count, dim) = match (parse(fields.next()), parse(fields.next()), fields.next()) {
        (Some(c), Some(d), None) if d > 0 => (c, d),
        _ => return Err(EmbedError::Format(format!("malformed header {header:?}"))),
    };
    let mut seen = HashSet::new();
    let mut entries = Vec::with_capacity(count);
    for (n, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let line_no = n + 2;
        let mut fields = line.split_whitespace();
        let token = fields.next().expect("non-empty line").to_string();
        let values: Vec<f64> = fields
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| EmbedError::Format(format!("line {line_no}: bad number {f:?}")))
            })
            .collect::<Result<_, _>>()?;
        if values.len() != dim {
            return Err(EmbedError::Arity {
                line: line_no,
                expected: dim,
                found: values.len(),
            });
        }
        if !seen.insert(token.clone()) {
            return Err(EmbedError::DuplicateToken(token));
        }
        entries.push((token, values));
    }
    if entries.len() != count {
        return Err(EmbedError::Format(format!(
            "header announces {count} vectors, file has {}",
            entries.len()
        )));
    }
    Ok((dim, entries))
}

/// Model with the given input vectors, zero output vectors and zero counts.
pub fn load_text_vectors<R: BufRead>(input: R) -> Result<EmbeddingModel, EmbedError> {
    let (dim, entries) = read_word2vec_text(input)?;
    let mut model = EmbeddingModel::empty(dim);
    let zeros = vec![0.0; dim];
    for (token, v) in entries {
        model.push_token(&token, &v, &zeros, 0)?;
    }
    Ok(model)
}

pub fn save_text_vectors<W: Write>(model: &EmbeddingModel, out: W) -> std::io::Result<()> {
    write_word2vec_text(
        out,
        model.len(),
        model.dim(),
        (0..model.len()).map(|i| (model.vocab().token(i), model.input_vector(i).to_vec())),
    )
}

pub(crate) fn write_token<W: Write>(out: &mut W, token: &str) -> Result<(), EmbedError> {
    let len = u16::try_from(token.len())
        .map_err(|_| EmbedError::Format(format!("token too long: {token:?}")))?;
    out.write_all(&len.to_le_bytes())?;
    out.write_all(token.as_bytes())?;
    Ok(())
}

pub(crate) fn read_token<R: Read>(input: &mut R) -> Result<String, EmbedError> {
    let mut len = [0u8; 2];
    input.read_exact(&mut len)?;
    let mut buf = vec![0u8; u16::from_le_bytes(len) as usize];
    input.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|_| EmbedError::Format("token is not UTF-8".into()))
}

pub(crate) fn read_u32<R: Read>(input: &mut R) -> Result<u32, EmbedError> {
    let mut b = [0u8; 4];
    input.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub(crate) fn write_f32s<W: Write>(
    out: &mut W,
    values: impl IntoIterator<Item = f32>,
) -> std::io::Result<()> {
    for v in values {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub(crate) fn read_f32s<R: Read>(input: &mut R, n: usize) -> Result<Vec<f32>, EmbedError> {
    let mut buf = vec![0u8; n * 4];
    input.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

/// Writes a snapshot. Vectors are stored as `f32`.
pub fn write_snapshot<W: Write>(model: &EmbeddingModel, mut out: W) -> Result<(), EmbedError> {
    let len = |n: usize| u32::try_from(n).map_err(|_| EmbedError::Format("model too large".into()));
    out.write_all(SNAPSHOT_MAGIC)?;
    out.write_all(&len(model.len())?.to_le_bytes())?;
    out.write_all(&len(model.dim())?.to_le_bytes())?;
    for i in 0..model.len() {
        write_token(&mut out, model.vocab().token(i))?;
        write_f32s(&mut out, model.input_vector(i).iter().map(|&x| x as f32))?;
        write_f32s(&mut out, model.output_vector(i).iter().map(|&x| x as f32))?;
    }
    Ok(())
}

pub fn read_snapshot<R: Read>(mut input: R) -> Result<EmbeddingModel, EmbedError> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(EmbedError::Version { found: magic });
    }
    let count = read_u32(&mut input)? as usize;
    let dim = read_u32(&mut input)? as usize;
    let mut model = EmbeddingModel::empty(dim);
    for _ in 0..count {
        let token = read_token(&mut input)?;
        let inp: Vec<f64> = read_f32s(&mut input, dim)?
            .into_iter()
            .map(f64::from)
            .collect();
        let out: Vec<f64> = read_f32s(&mut input, dim)?
            .into_iter()
            .map(f64::from)
            .collect();
        model.push_token(&token, &inp, &out, 0)?;
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_single_vector() {
        let m = load_text_vectors("1 2\nfoo 0.5 -0.5\n".as_bytes()).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.vector("foo").unwrap(), &[0.5, -0.5]);
        assert!(m.output_vector(0).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn arity_mismatch() {
        assert!(matches!(
            load_text_vectors("1 3\nfoo 0.5 -0.5\n".as_bytes()),
            Err(EmbedError::Arity {
                line: 2,
                expected: 3,
                found: 2
            })
        ));
    }

    #[test]
    fn malformed_header_and_duplicates() {
        assert!(matches!(
            load_text_vectors("x y\n".as_bytes()),
            Err(EmbedError::Format(_))
        ));
        assert!(matches!(
            load_text_vectors("".as_bytes()),
            Err(EmbedError::Format(_))
        ));
        assert!(matches!(
            load_text_vectors("2 1\na 1\na 2\n".as_bytes()),
            Err(EmbedError::DuplicateToken(_))
        ));
    }

    #[test]
    fn text_output_matches_reference_layout() {
        let m = load_text_vectors("1 2\nfoo 0.5 -0.25\n".as_bytes()).unwrap();
        let mut buf = Vec::new();
        save_text_vectors(&m, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "1 2\nfoo 0.500000 -0.250000 \n"
        );
    }

    #[test]
    fn snapshot_keeps_vectors() {
        let mut m = EmbeddingModel::empty(2);
        m.push_token("a", &[0.5, -1.0], &[0.25, 2.0], 0).unwrap();
        m.push_token("b", &[1.5, 0.0], &[0.0, -0.5], 0).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&m, &mut buf).unwrap();
        assert_eq!(read_snapshot(buf.as_slice()).unwrap(), m);
    }

    #[test]
    fn bad_magic() {
        let err = read_snapshot(&b"XXXX\0\0\0\0\0\0\0\0"[..]).unwrap_err();
        assert!(matches!(err, EmbedError::Version { .. }));
    }
}
