use std::io::Write;

use flate2::write::ZlibEncoder;
use flate2::Compression;

use super::SpectrogramImage;

const SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a];

/// Encodes an 8-bit grayscale or RGB PNG (no interlace, filter type 0 on every row).
pub fn encode_png(image: &SpectrogramImage) -> Vec<u8> {
    let color_type = match image.channels {
        1 => 0u8,
        3 => 2u8,
        n => panic!("unsupported channel count {n}"),
    };
    let mut out = SIGNATURE.to_vec();

    let mut ihdr = Vec::with_capacity(13);
    ihdr.extend_from_slice(&(image.width as u32).to_be_bytes());
    ihdr.extend_from_slice(&(image.height as u32).to_be_bytes());
    ihdr.extend_from_slice(&[8, color_type, 0, 0, 0]);
    chunk(&mut out, b"IHDR", &ihdr);

    let stride = image.width * image.channels;
    let mut z = ZlibEncoder::new(Vec::new(), Compression::default());
    for row in image.pixels.chunks_exact(stride.max(1)) {
        z.write_all(&[0]).expect("in-memory write");
        z.write_all(row).expect("in-memory write");
    }
    let idat = z.finish().expect("in-memory write");
    chunk(&mut out, b"IDAT", &idat);
    chunk(&mut out, b"IEND", &[]);
    out
}

fn chunk(out: &mut Vec<u8>, kind: &[u8; 4], data: &[u8]) {
    out.extend_from_slice(&(data.len() as u32).to_be_bytes());
    out.extend_from_slice(kind);
    out.extend_from_slice(data);
    let mut crc = crc32fast::Hasher::new();
    crc.update(kind);
    crc.update(data);
    out.extend_from_slice(&crc.finalize().to_be_bytes());
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_black_pixel_layout() {
        let img = SpectrogramImage::new(1, 1, 1, "x");
        let bytes = encode_png(&img);
        assert_eq!(&bytes[..8], &SIGNATURE);
        assert_eq!(&bytes[12..16], b"IHDR");
        assert_eq!(&bytes[16..20], &1u32.to_be_bytes());
        assert_eq!(&bytes[bytes.len() - 8..bytes.len() - 4], b"IEND");
        // CRC of an empty IEND chunk is a fixed constant.
        assert_eq!(&bytes[bytes.len() - 4..], &[0xae, 0x42, 0x60, 0x82]);
    }
}
