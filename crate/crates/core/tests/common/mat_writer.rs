//! Independent level-5 MAT writer used as a test oracle for the parser.

use std::io::Write;

use flate2::write::ZlibEncoder;
use flate2::Compression;

const MI_INT8: u32 = 1;
const MI_UINT8: u32 = 2;
const MI_INT16: u32 = 3;
const MI_INT32: u32 = 5;
const MI_UINT32: u32 = 6;
const MI_SINGLE: u32 = 7;
const MI_DOUBLE: u32 = 9;
const MI_MATRIX: u32 = 14;
const MI_COMPRESSED: u32 = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Storage {
    Double,
    Single,
    Int32,
    Int16,
    Uint8,
}

impl Storage {
    fn mx_class(self) -> u32 {
        match self {
            Storage::Double => 6,
            Storage::Single => 7,
            Storage::Uint8 => 9,
            Storage::Int16 => 10,
            Storage::Int32 => 12,
        }
    }

    fn mi_type(self) -> u32 {
        match self {
            Storage::Double => MI_DOUBLE,
            Storage::Single => MI_SINGLE,
            Storage::Int32 => MI_INT32,
            Storage::Int16 => MI_INT16,
            Storage::Uint8 => MI_UINT8,
        }
    }

    /// Rounds `v` to what this storage can represent exactly.
    pub fn quantize(self, v: f64) -> f64 {
        match self {
            Storage::Double => v,
            Storage::Single => v as f32 as f64,
            Storage::Int32 => v.round().clamp(i32::MIN as f64, i32::MAX as f64),
            Storage::Int16 => v.round().clamp(i16::MIN as f64, i16::MAX as f64),
            Storage::Uint8 => v.round().clamp(0.0, 255.0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Var {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    /// Column-major, already representable in `storage`.
    pub data: Vec<f64>,
    pub storage: Storage,
}

impl Var {
    pub fn column(name: &str, data: Vec<f64>) -> Self {
        Self {
            name: name.to_string(),
            rows: data.len(),
            cols: 1,
            data,
            storage: Storage::Double,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Options {
    pub big_endian: bool,
    pub compressed: bool,
}

struct Out {
    big: bool,
    bytes: Vec<u8>,
}

impl Out {
    fn u32(&mut self, v: u32) {
        let b = if self.big {
            v.to_be_bytes()
        } else {
            v.to_le_bytes()
        };
        self.bytes.extend_from_slice(&b);
    }

    fn pad8(&mut self) {
        while !self.bytes.len().is_multiple_of(8) {
            self.bytes.push(0);
        }
    }

    /// One data element; payloads of at most 4 bytes use the packed small form.
    fn element(&mut self, kind: u32, payload: &[u8]) {
        if payload.len() <= 4 && !payload.is_empty() {
            self.u32((payload.len() as u32) << 16 | kind);
            let mut word = [0u8; 4];
            word[..payload.len()].copy_from_slice(payload);
            self.bytes.extend_from_slice(&word);
        } else {
            self.u32(kind);
            self.u32(payload.len() as u32);
            self.bytes.extend_from_slice(payload);
            self.pad8();
        }
    }
}

fn numbers(big: bool, storage: Storage, data: &[f64]) -> Vec<u8> {
    let mut out = Vec::new();
    for &v in data {
        match storage {
            Storage::Double => out.extend(if big {
                v.to_be_bytes()
            } else {
                v.to_le_bytes()
            }),
            Storage::Single => {
                let f = v as f32;
                out.extend(if big {
                    f.to_be_bytes()
                } else {
                    f.to_le_bytes()
                })
            }
            Storage::Int32 => {
                let i = v as i32;
                out.extend(if big {
                    i.to_be_bytes()
                } else {
                    i.to_le_bytes()
                })
            }
            Storage::Int16 => {
                let i = v as i16;
                out.extend(if big {
                    i.to_be_bytes()
                } else {
                    i.to_le_bytes()
                })
            }
            Storage::Uint8 => out.push(v as u8),
        }
    }
    out
}

fn matrix_element(big: bool, var: &Var) -> Vec<u8> {
    let mut body = Out {
        big,
        bytes: Vec::new(),
    };
    let mut flags = Vec::new();
    for w in [var.storage.mx_class(), 0] {
        flags.extend(if big {
            w.to_be_bytes()
        } else {
            w.to_le_bytes()
        });
    }
    body.element(MI_UINT32, &flags);
    let mut dims = Vec::new();
    for d in [var.rows as i32, var.cols as i32] {
        dims.extend(if big {
            d.to_be_bytes()
        } else {
            d.to_le_bytes()
        });
    }
    body.element(MI_INT32, &dims);
    body.element(MI_INT8, var.name.as_bytes());
    body.element(var.storage.mi_type(), &numbers(big, var.storage, &var.data));

    let mut out = Out {
        big,
        bytes: Vec::new(),
    };
    out.u32(MI_MATRIX);
    out.u32(body.bytes.len() as u32);
    out.bytes.extend_from_slice(&body.bytes);
    out.bytes
}

pub fn header(big: bool) -> Vec<u8> {
    let mut h = b"MATLAB 5.0 MAT-file, written by the test oracle".to_vec();
    h.resize(116, b' ');
    h.extend_from_slice(&[0u8; 8]);
    if big {
        h.extend_from_slice(&0x0100u16.to_be_bytes());
        h.extend_from_slice(b"MI");
    } else {
        h.extend_from_slice(&0x0100u16.to_le_bytes());
        h.extend_from_slice(b"IM");
    }
    h
}

/// The file bytes plus the byte offset where each top-level element starts.
pub fn write_mat_with_offsets(vars: &[Var], opts: Options) -> (Vec<u8>, Vec<usize>) {
    let mut out = Out {
        big: opts.big_endian,
        bytes: header(opts.big_endian),
    };
    let mut offsets = Vec::new();
    for var in vars {
        offsets.push(out.bytes.len());
        let matrix = matrix_element(opts.big_endian, var);
        if opts.compressed {
            let mut z = ZlibEncoder::new(Vec::new(), Compression::default());
            z.write_all(&matrix).unwrap();
            let packed = z.finish().unwrap();
            out.u32(MI_COMPRESSED);
            out.u32(packed.len() as u32);
            out.bytes.extend_from_slice(&packed);
        } else {
            out.bytes.extend_from_slice(&matrix);
        }
    }
    (out.bytes, offsets)
}

pub fn write_mat(vars: &[Var], opts: Options) -> Vec<u8> {
    write_mat_with_offsets(vars, opts).0
}
