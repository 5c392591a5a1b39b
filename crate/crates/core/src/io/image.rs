//! Reading and writing label masks and saliency maps as 8-bit PNG files.
//!
//! Semantic masks are indexed-color PNGs whose palette indices are the
//! category indices (0 background, 1..=C foreground, 255 void), or plain
//! 8-bit grayscale images carrying the indices directly. Saliency maps are
//! 8-bit grayscale, mapped linearly onto `[0, 1]`.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mask::{BinaryMask, LabelMask, SaliencyMap, IGNORE_LABEL};

/// The conventional VOC indexed-color palette: each index's RGB is assembled
/// from its bits, three bits per round.
pub fn voc_palette() -> Vec<[u8; 3]> {
    (0..256usize)
        .map(|i| {
            let (mut r, mut g, mut b) = (0u8, 0u8, 0u8);
            let mut c = i;
            for shift in 0..8 {
                r |= ((c & 1) as u8) << (7 - shift);
                g |= (((c >> 1) & 1) as u8) << (7 - shift);
                b |= (((c >> 2) & 1) as u8) << (7 - shift);
                c >>= 3;
            }
            [r, g, b]
        })
        .collect()
}

fn image_error(path: &Path, detail: impl Into<String>) -> Error {
    Error::Image {
        path: path.display().to_string(),
        detail: detail.into(),
    }
}

fn decode_gray8(path: &Path) -> Result<(usize, usize, Vec<u8>, png::ColorType)> {
    let file = File::open(path).map_err(Error::Io)?;
    let decoder = png::Decoder::new(file);
    let mut reader = decoder
        .read_info()
        .map_err(|e| image_error(path, format!("png decode failed: {}", e)))?;
    let info = reader.info();
    let color = info.color_type;
    let depth = info.bit_depth;
    if depth != png::BitDepth::Eight {
        return Err(image_error(
            path,
            format!("expected 8-bit samples, found {:?}", depth),
        ));
    }
    let mut buf = vec![0u8; reader.output_buffer_size()];
    let frame = reader
        .next_frame(&mut buf)
        .map_err(|e| image_error(path, format!("png read failed: {}", e)))?;
    buf.truncate(frame.buffer_size());
    Ok((frame.width as usize, frame.height as usize, buf, color))
}

/// Loads a semantic mask. Palette indices above `num_categories` other than
/// the void index are reported, not mapped.
pub fn load_semantic_mask(path: &Path, num_categories: usize) -> Result<LabelMask> {
    let (w, h, buf, color) = decode_gray8(path)?;
    let indices = match color {
        png::ColorType::Indexed | png::ColorType::Grayscale => buf,
        other => {
            return Err(image_error(
                path,
                format!(
                    "expected an indexed-color or grayscale mask, found {:?}",
                    other
                ),
            ))
        }
    };
    let mut offending: Vec<u8> = indices
        .iter()
        .copied()
        .filter(|&v| v as usize > num_categories && v != IGNORE_LABEL)
        .collect();
    offending.sort_unstable();
    offending.dedup();
    if !offending.is_empty() {
        return Err(image_error(
            path,
            format!(
                "unknown label indices {:?} (valid: 0..={}, {} = void)",
                offending, num_categories, IGNORE_LABEL
            ),
        ));
    }
    LabelMask::new(w, h, indices, num_categories)
}

/// Loads a saliency map from a single-channel 8-bit image; values map onto
/// `[0, 1]` as `v / 255`.
pub fn load_saliency_map(path: &Path) -> Result<SaliencyMap> {
    let (w, h, buf, color) = decode_gray8(path)?;
    if color != png::ColorType::Grayscale {
        return Err(image_error(
            path,
            format!("expected a single-channel grayscale map, found {:?}", color),
        ));
    }
    let values = buf.iter().map(|&v| v as f64 / 255.0).collect();
    SaliencyMap::new(w, h, values)
}

/// Thresholds a saliency map into a binary mask; a bit is set iff its value
/// strictly exceeds the threshold.
pub fn binarize(sal: &SaliencyMap, threshold: f64) -> Result<BinaryMask> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::domain(format!(
            "binarization threshold {} outside [0, 1]",
            threshold
        )));
    }
    BinaryMask::new(
        sal.width(),
        sal.height(),
        sal.values().iter().map(|&v| v > threshold).collect(),
    )
}

/// Writes a semantic mask as an indexed-color PNG with the VOC palette.
pub fn write_semantic_mask(path: &Path, mask: &LabelMask) -> Result<()> {
    let file = File::create(path).map_err(Error::Io)?;
    let mut encoder = png::Encoder::new(
        BufWriter::new(file),
        mask.width() as u32,
        mask.height() as u32,
    );
    encoder.set_color(png::ColorType::Indexed);
    encoder.set_depth(png::BitDepth::Eight);
    let palette: Vec<u8> = voc_palette().into_iter().flatten().collect();
    encoder.set_palette(palette);
    let mut writer = encoder
        .write_header()
        .map_err(|e| image_error(path, format!("png write failed: {}", e)))?;
    writer
        .write_image_data(mask.labels())
        .map_err(|e| image_error(path, format!("png write failed: {}", e)))?;
    Ok(())
}

/// Writes a saliency map as 8-bit grayscale (`round(v * 255)`).
pub fn write_saliency_map(path: &Path, sal: &SaliencyMap) -> Result<()> {
    let file = File::create(path).map_err(Error::Io)?;
    let mut encoder = png::Encoder::new(
        BufWriter::new(file),
        sal.width() as u32,
        sal.height() as u32,
    );
    encoder.set_color(png::ColorType::Grayscale);
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder
        .write_header()
        .map_err(|e| image_error(path, format!("png write failed: {}", e)))?;
    let bytes: Vec<u8> = sal
        .values()
        .iter()
        .map(|&v| (v * 255.0).round() as u8)
        .collect();
    writer
        .write_image_data(&bytes)
        .map_err(|e| image_error(path, format!("png write failed: {}", e)))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn voc_palette_has_known_entries() {
        let p = voc_palette();
        assert_eq!(p[0], [0, 0, 0]); // background
        assert_eq!(p[1], [128, 0, 0]); // first category
        assert_eq!(p[15], [192, 128, 128]); // person
        assert_eq!(p[255], [224, 224, 192]); // void
    }

    #[test]
    fn semantic_mask_roundtrip_is_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mask.png");
        let mask = LabelMask::new(3, 2, vec![0, 15, 20, IGNORE_LABEL, 1, 0], 20).unwrap();
        write_semantic_mask(&path, &mask).unwrap();
        let back = load_semantic_mask(&path, 20).unwrap();
        assert_eq!(back, mask);
    }

    #[test]
    fn all_zero_mask_reads_as_background() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bg.png");
        write_semantic_mask(&path, &LabelMask::uniform(4, 4, 0, 20).unwrap()).unwrap();
        let back = load_semantic_mask(&path, 20).unwrap();
        assert!(back.labels().iter().all(|&l| l == 0));
        assert!(back.present_categories().is_empty());
    }

    #[test]
    fn saliency_map_roundtrip_at_8bit_quantization() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sal.png");
        let values: Vec<f64> = (0..=255).map(|v| v as f64 / 255.0).collect();
        let sal = SaliencyMap::new(16, 16, values).unwrap();
        write_saliency_map(&path, &sal).unwrap();
        let back = load_saliency_map(&path).unwrap();
        assert_eq!(back, sal);
    }

    #[test]
    fn all_zero_and_all_one_maps() {
        let dir = tempfile::tempdir().unwrap();
        let z = dir.path().join("zero.png");
        write_saliency_map(&z, &SaliencyMap::uniform(4, 4, 0.0).unwrap()).unwrap();
        assert!(load_saliency_map(&z).unwrap().values().iter().all(|&v| v == 0.0));
        let o = dir.path().join("one.png");
        write_saliency_map(&o, &SaliencyMap::uniform(4, 4, 1.0).unwrap()).unwrap();
        assert!(load_saliency_map(&o).unwrap().values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn mid_gray_maps_to_128_over_255() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mid.png");
        write_saliency_map(&path, &SaliencyMap::uniform(2, 2, 128.0 / 255.0).unwrap()).unwrap();
        let back = load_saliency_map(&path).unwrap();
        assert!((back.values()[0] - 128.0 / 255.0).abs() < 1e-15);
        assert!((back.values()[0] - 0.50196).abs() < 1e-4);
    }

    #[test]
    fn unknown_palette_index_lists_offenders() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.png");
        let mask = LabelMask::new(2, 1, vec![0, 19], 20).unwrap();
        write_semantic_mask(&path, &mask).unwrap();
        // reading back with a smaller taxonomy flags index 19
        let err = load_semantic_mask(&path, 10).unwrap_err();
        assert!(err.to_string().contains("19"), "{}", err);
    }

    #[test]
    fn truncated_file_is_an_image_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trunc.png");
        std::fs::write(&path, b"\x89PNG\r\n\x1a\n not actually a png").unwrap();
        match load_saliency_map(&path) {
            Err(Error::Image { .. }) => {}
            other => panic!("expected image error, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn multichannel_saliency_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rgb.png");
        let file = File::create(&path).unwrap();
        let mut enc = png::Encoder::new(BufWriter::new(file), 2, 1);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        enc.write_header()
            .unwrap()
            .write_image_data(&[0, 0, 0, 255, 255, 255])
            .unwrap();
        assert!(load_saliency_map(&path).is_err());
    }

    #[test]
    fn binarize_is_strict() {
        let sal = SaliencyMap::new(3, 1, vec![0.4, 0.5, 0.6]).unwrap();
        let b = binarize(&sal, 0.5).unwrap();
        assert_eq!(b.bits(), &[false, false, true]);
        let all = binarize(&SaliencyMap::new(2, 1, vec![0.1, 0.0]).unwrap(), 0.0).unwrap();
        assert_eq!(all.bits(), &[true, false]);
        let none = binarize(&sal, 1.0).unwrap();
        assert_eq!(none.area(), 0);
    }
}
