use std::collections::HashSet;

use flate2::{Decompress, FlushDecompress, Status};

use super::{ElementClass, Endianness, MatError, MatFile, MatVariable};

const HEADER_LEN: usize = 128;
const TEXT_LEN: usize = 116;
const MAT5_VERSION: u16 = 0x0100;

// Data element type tags.
const MI_INT8: u32 = 1;
const MI_UINT8: u32 = 2;
const MI_INT16: u32 = 3;
const MI_UINT16: u32 = 4;
const MI_INT32: u32 = 5;
const MI_UINT32: u32 = 6;
const MI_SINGLE: u32 = 7;
const MI_DOUBLE: u32 = 9;
const MI_INT64: u32 = 12;
const MI_UINT64: u32 = 13;
const MI_MATRIX: u32 = 14;
const MI_COMPRESSED: u32 = 15;

// Array classes (low byte of the array-flags word).
const MX_DOUBLE: u32 = 6;
const MX_SINGLE: u32 = 7;
const MX_UINT8: u32 = 9;
const MX_INT16: u32 = 10;
const MX_INT32: u32 = 12;

const FLAG_COMPLEX: u32 = 0x0800;

// Upper bound on one inflated element; guards corrupt length fields.
const MAX_INFLATED: usize = 1 << 31;

/// Decodes a level-5 MAT file held in memory.
pub fn parse_mat(bytes: &[u8]) -> Result<MatFile, MatError> {
    if bytes.len() < HEADER_LEN {
        return Err(MatError::TruncatedFile {
            offset: 0,
            needed: HEADER_LEN,
            len: bytes.len(),
        });
    }
    let endianness = match &bytes[126..128] {
        b"IM" => Endianness::Little,
        b"MI" => Endianness::Big,
        other => {
            return Err(MatError::BadMagic {
                found: [other[0], other[1]],
            })
        }
    };
    let version = match endianness {
        Endianness::Little => u16::from_le_bytes([bytes[124], bytes[125]]),
        Endianness::Big => u16::from_be_bytes([bytes[124], bytes[125]]),
    };
    if version != MAT5_VERSION {
        return Err(MatError::BadVersion(version));
    }
    let header_text = String::from_utf8_lossy(&bytes[..TEXT_LEN])
        .trim_end_matches(['\0', ' '])
        .to_string();

    let top = Cursor {
        buf: bytes,
        endian: endianness,
        base: 0,
        inflated: false,
    };
    let mut variables = Vec::new();
    let mut pos = HEADER_LEN;
    while pos < bytes.len() {
        let tag = top.tag(pos)?;
        match tag.kind {
            MI_MATRIX => {
                variables.push(top.matrix(&tag, false)?);
                // The final element may omit its alignment padding.
                pos = tag.padded_end().min(bytes.len());
            }
            MI_COMPRESSED => {
                let inflated = inflate(top.slice(&tag), pos)?;
                variables.extend(parse_inflated(&inflated, endianness, pos)?);
                pos = tag.data_end();
            }
            other => {
                return Err(MatError::UnsupportedElement {
                    tag: other,
                    offset: pos,
                    detail: "top-level elements must be matrices or compressed matrices".into(),
                })
            }
        }
    }

    let mut seen = HashSet::new();
    for v in &variables {
        if !seen.insert(v.name.as_str()) {
            return Err(MatError::DuplicateName(v.name.clone()));
        }
    }

    Ok(MatFile {
        header_text,
        version,
        endianness,
        variables,
    })
}

fn parse_inflated(
    buf: &[u8],
    endian: Endianness,
    offset: usize,
) -> Result<Vec<MatVariable>, MatError> {
    let cur = Cursor {
        buf,
        endian,
        base: offset,
        inflated: true,
    };
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < buf.len() {
        let tag = cur.tag(pos)?;
        if tag.kind != MI_MATRIX {
            return Err(MatError::UnsupportedElement {
                tag: tag.kind,
                offset,
                detail: "compressed payload must hold a matrix".into(),
            });
        }
        out.push(cur.matrix(&tag, true)?);
        pos = tag.padded_end().min(buf.len());
    }
    if out.is_empty() {
        return Err(MatError::Malformed {
            offset,
            reason: "compressed element inflates to nothing".into(),
        });
    }
    Ok(out)
}

fn inflate(data: &[u8], offset: usize) -> Result<Vec<u8>, MatError> {
    let fail = |reason: String| MatError::DecompressFailure { offset, reason };
    let mut z = Decompress::new(true);
    let mut out = Vec::with_capacity(data.len().saturating_mul(4).min(MAX_INFLATED));
    loop {
        if out.len() == out.capacity() {
            if out.len() >= MAX_INFLATED {
                return Err(fail("inflated size exceeds limit".into()));
            }
            out.reserve(out.len().max(4096));
        }
        let consumed = z.total_in() as usize;
        let before = z.total_out();
        let status = z
            .decompress_vec(&data[consumed..], &mut out, FlushDecompress::None)
            .map_err(|e| fail(e.to_string()))?;
        match status {
            Status::StreamEnd => return Ok(out),
            Status::Ok | Status::BufError => {
                let stalled = z.total_out() == before && z.total_in() as usize == consumed;
                if stalled && out.len() < out.capacity() {
                    return Err(fail("stream ends before its end marker".into()));
                }
            }
        }
    }
}

struct Tag {
    kind: u32,
    offset: usize,
    data_start: usize,
    nbytes: usize,
    small: bool,
}

impl Tag {
    fn data_end(&self) -> usize {
        self.data_start + self.nbytes
    }

    fn padded_end(&self) -> usize {
        if self.small {
            self.offset + 8
        } else {
            self.data_start + self.nbytes.div_ceil(8) * 8
        }
    }
}

struct Cursor<'a> {
    buf: &'a [u8],
    endian: Endianness,
    base: usize,
    inflated: bool,
}

impl<'a> Cursor<'a> {
    fn abs(&self, pos: usize) -> usize {
        if self.inflated {
            self.base
        } else {
            pos
        }
    }

    fn short(&self, pos: usize, needed: usize) -> MatError {
        if self.inflated {
            MatError::Malformed {
                offset: self.base,
                reason: format!(
                    "compressed payload ends mid-element (inner offset {pos}, need {needed} bytes)"
                ),
            }
        } else {
            MatError::TruncatedFile {
                offset: pos,
                needed,
                len: self.buf.len(),
            }
        }
    }

    fn malformed(&self, pos: usize, reason: impl Into<String>) -> MatError {
        MatError::Malformed {
            offset: self.abs(pos),
            reason: reason.into(),
        }
    }

    fn u32_at(&self, pos: usize) -> Result<u32, MatError> {
        let b = self
            .buf
            .get(pos..pos + 4)
            .ok_or_else(|| self.short(pos, 4))?;
        let b = [b[0], b[1], b[2], b[3]];
        Ok(match self.endian {
            Endianness::Little => u32::from_le_bytes(b),
            Endianness::Big => u32::from_be_bytes(b),
        })
    }

    fn tag(&self, pos: usize) -> Result<Tag, MatError> {
        if self.buf.len().saturating_sub(pos) < 8 {
            return Err(self.short(pos, 8));
        }
        let first = self.u32_at(pos)?;
        let tag = if first >> 16 != 0 {
            let nbytes = (first >> 16) as usize;
            if nbytes > 4 {
                return Err(self.malformed(pos, format!("small element claims {nbytes} bytes")));
            }
            Tag {
                kind: first & 0xffff,
                offset: pos,
                data_start: pos + 4,
                nbytes,
                small: true,
            }
        } else {
            Tag {
                kind: first,
                offset: pos,
                data_start: pos + 8,
                nbytes: self.u32_at(pos + 4)? as usize,
                small: false,
            }
        };
        if tag.data_end() > self.buf.len() {
            return Err(self.short(pos, 8 + tag.nbytes));
        }
        Ok(tag)
    }

    fn slice(&self, tag: &Tag) -> &'a [u8] {
        &self.buf[tag.data_start..tag.data_end()]
    }

    /// Reads the sub-element starting at `pos` inside a matrix spanning up to `end`.
    fn sub(&self, pos: usize, end: usize, what: &str) -> Result<Tag, MatError> {
        if pos >= end {
            return Err(self.malformed(pos, format!("matrix ends before its {what}")));
        }
        let tag = self.tag(pos)?;
        if tag.data_end() > end {
            return Err(self.malformed(pos, format!("{what} overruns its matrix")));
        }
        Ok(tag)
    }

    fn matrix(&self, tag: &Tag, was_compressed: bool) -> Result<MatVariable, MatError> {
        let end = tag.data_end();
        let unsupported = |sub: u32, at: usize, detail: String| MatError::UnsupportedElement {
            tag: sub,
            offset: self.abs(at),
            detail,
        };

        // Array flags.
        let flags_tag = self.sub(tag.data_start, end, "array flags")?;
        if flags_tag.kind != MI_UINT32 || flags_tag.nbytes != 8 {
            return Err(self.malformed(flags_tag.offset, "array flags must be 8 bytes of uint32"));
        }
        let flags = self.u32_at(flags_tag.data_start)?;
        let class_code = flags & 0xff;
        let element_class = match class_code {
            MX_DOUBLE => ElementClass::Float64,
            MX_SINGLE => ElementClass::Float32,
            MX_INT32 => ElementClass::Int32,
            MX_INT16 => ElementClass::Int16,
            MX_UINT8 => ElementClass::Uint8,
            other => {
                return Err(unsupported(
                    MI_MATRIX,
                    flags_tag.offset,
                    format!(
                        "array class {} is not a supported numeric class",
                        class_name(other)
                    ),
                ))
            }
        };
        if flags & FLAG_COMPLEX != 0 {
            return Err(unsupported(
                MI_MATRIX,
                flags_tag.offset,
                "complex arrays are not supported".into(),
            ));
        }

        // Dimensions.
        let dims_tag = self.sub(flags_tag.padded_end(), end, "dimensions")?;
        if dims_tag.kind != MI_INT32 || dims_tag.nbytes % 4 != 0 || dims_tag.nbytes < 8 {
            return Err(self.malformed(
                dims_tag.offset,
                "dimensions must be at least two int32 values",
            ));
        }
        let mut dims = Vec::with_capacity(dims_tag.nbytes / 4);
        for i in 0..dims_tag.nbytes / 4 {
            let d = self.u32_at(dims_tag.data_start + 4 * i)? as i32;
            if d < 0 {
                return Err(self.malformed(dims_tag.offset, format!("negative dimension {d}")));
            }
            if d == 0 {
                return Err(unsupported(
                    MI_MATRIX,
                    dims_tag.offset,
                    "empty arrays are not supported".into(),
                ));
            }
            dims.push(d as usize);
        }
        let count = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| self.malformed(dims_tag.offset, "dimension product overflows"))?;

        // Name.
        let name_tag = self.sub(dims_tag.padded_end(), end, "name")?;
        if name_tag.kind != MI_INT8 && name_tag.kind != MI_UINT8 {
            return Err(self.malformed(
                name_tag.offset,
                format!("name has element type {}", name_tag.kind),
            ));
        }
        let raw_name = self.slice(&name_tag);
        if raw_name.is_empty() {
            return Err(self.malformed(name_tag.offset, "variable name is empty"));
        }
        if raw_name.contains(&0) {
            return Err(self.malformed(name_tag.offset, "variable name contains NUL"));
        }
        let name = std::str::from_utf8(raw_name)
            .map_err(|_| self.malformed(name_tag.offset, "variable name is not UTF-8"))?
            .to_string();

        // Real part.
        let real_tag = self.sub(name_tag.padded_end(), end, "real part")?;
        let width = storage_width(real_tag.kind).ok_or_else(|| {
            unsupported(
                real_tag.kind,
                real_tag.offset,
                "not a numeric storage type".into(),
            )
        })?;
        if real_tag.nbytes % width != 0 {
            return Err(self.malformed(
                real_tag.offset,
                "payload size is not a multiple of its element width",
            ));
        }
        let stored = real_tag.nbytes / width;
        if stored != count {
            return Err(self.malformed(
                real_tag.offset,
                format!("dimensions {dims:?} need {count} values, payload holds {stored}"),
            ));
        }
        let data = decode_numeric(self.slice(&real_tag), real_tag.kind, self.endian);

        Ok(MatVariable {
            name,
            element_class,
            dims,
            data,
            was_compressed,
        })
    }
}

fn storage_width(kind: u32) -> Option<usize> {
    match kind {
        MI_INT8 | MI_UINT8 => Some(1),
        MI_INT16 | MI_UINT16 => Some(2),
        MI_INT32 | MI_UINT32 | MI_SINGLE => Some(4),
        MI_DOUBLE | MI_INT64 | MI_UINT64 => Some(8),
        _ => None,
    }
}

fn decode_numeric(bytes: &[u8], kind: u32, endian: Endianness) -> Vec<f64> {
    macro_rules! decode {
        ($ty:ty, $n:expr) => {
            bytes
                .chunks_exact($n)
                .map(|c| {
                    let arr: [u8; $n] = c.try_into().expect("chunk width");
                    let v = match endian {
                        Endianness::Little => <$ty>::from_le_bytes(arr),
                        Endianness::Big => <$ty>::from_be_bytes(arr),
                    };
                    v as f64
                })
                .collect()
        };
    }
    match kind {
        MI_INT8 => decode!(i8, 1),
        MI_UINT8 => decode!(u8, 1),
        MI_INT16 => decode!(i16, 2),
        MI_UINT16 => decode!(u16, 2),
        MI_INT32 => decode!(i32, 4),
        MI_UINT32 => decode!(u32, 4),
        MI_SINGLE => decode!(f32, 4),
        MI_DOUBLE => decode!(f64, 8),
        MI_INT64 => decode!(i64, 8),
        MI_UINT64 => decode!(u64, 8),
        _ => unreachable!("storage_width admits only numeric tags"),
    }
}

fn class_name(code: u32) -> String {
    let name = match code {
        1 => "cell",
        2 => "struct",
        3 => "object",
        4 => "char",
        5 => "sparse",
        8 => "int8",
        11 => "uint16",
        13 => "uint32",
        14 => "int64",
        15 => "uint64",
        _ => return format!("code {code}"),
    };
    name.to_string()
}
