//! Single-channel indexed PNG I/O for masks and label annotations.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use crate::types::{BinaryMask, LabelGrid, MaskTrack};

use super::{io_err, DataError};

/// Palette entry for label `i`: background black, foreground white for masks,
/// and a fixed spread of colours for object labels.
fn palette() -> Vec<u8> {
    let mut p = Vec::with_capacity(256 * 3);
    for i in 0..=255u32 {
        let rgb = match i {
            0 => [0, 0, 0],
            1 => [255, 255, 255],
            _ => [(i * 67 % 256) as u8, (i * 131 % 256) as u8, (i * 199 % 256) as u8],
        };
        p.extend_from_slice(&rgb);
    }
    p
}

/// Writes `values` (row-major, one byte per pixel) as an 8-bit indexed PNG.
pub fn write_indexed_png(path: &Path, height: usize, width: usize, values: &[u8]) -> Result<(), DataError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), width as u32, height as u32);
    encoder.set_color(png::ColorType::Indexed);
    encoder.set_depth(png::BitDepth::Eight);
    encoder.set_palette(palette());
    let png_err = |e: png::EncodingError| DataError::Png {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut writer = encoder.write_header().map_err(png_err)?;
    writer.write_image_data(values).map_err(png_err)?;
    writer.finish().map_err(png_err)
}

/// Reads raw per-pixel values of an 8-bit indexed or grayscale PNG.
pub fn read_indexed_png(path: &Path) -> Result<(usize, usize, Vec<u8>), DataError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut decoder = png::Decoder::new(BufReader::new(file));
    decoder.set_transformations(png::Transformations::IDENTITY);
    let png_err = |message: String| DataError::Png {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = decoder.read_info().map_err(|e| png_err(e.to_string()))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| png_err("image too large".into()))?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf).map_err(|e| png_err(e.to_string()))?;
    if info.bit_depth != png::BitDepth::Eight
        || !matches!(info.color_type, png::ColorType::Indexed | png::ColorType::Grayscale)
    {
        return Err(png_err(format!(
            "expected 8-bit single-channel image, got {:?} {:?}",
            info.color_type, info.bit_depth
        )));
    }
    let (w, h) = (info.width as usize, info.height as usize);
    buf.truncate(info.buffer_size());
    // rows are tightly packed for 8-bit single channel
    debug_assert_eq!(buf.len(), w * h);
    Ok((h, w, buf))
}

pub fn write_labels(path: &Path, grid: &LabelGrid) -> Result<(), DataError> {
    let (h, w) = grid.dims();
    write_indexed_png(path, h, w, grid.labels())
}

pub fn read_labels(path: &Path) -> Result<LabelGrid, DataError> {
    let (h, w, values) = read_indexed_png(path)?;
    Ok(LabelGrid::new(h, w, values)?)
}

pub fn mask_file_name(frame: usize) -> String {
    format!("{frame:05}.png")
}

pub fn write_mask(path: &Path, mask: &BinaryMask) -> Result<(), DataError> {
    let values: Vec<u8> = mask.bits().iter().map(|&b| u8::from(b)).collect();
    write_indexed_png(path, mask.height(), mask.width(), &values)
}

pub fn read_mask(path: &Path) -> Result<BinaryMask, DataError> {
    let (h, w, values) = read_indexed_png(path)?;
    if let Some(&bad) = values.iter().find(|&&v| v > 1) {
        return Err(DataError::NonBinary {
            path: path.to_path_buf(),
            value: bad,
        });
    }
    Ok(BinaryMask::from_bits(h, w, values.iter().map(|&v| v == 1).collect())?)
}

/// Writes one indexed PNG per frame (`00000.png`, ...) into `dir`.
pub fn write_masks(track: &MaskTrack, dir: &Path) -> Result<(), DataError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    for (frame, mask) in track.iter() {
        write_mask(&dir.join(mask_file_name(frame)), mask)?;
    }
    Ok(())
}

/// PNG files in `dir` whose stem is a frame number, sorted by frame.
fn frame_files(dir: &Path) -> Result<Vec<(usize, PathBuf)>, DataError> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("png") {
            continue;
        }
        if let Some(frame) = path
            .file_stem()
            .and_then(|s| s.to_str())
            .and_then(|s| s.parse::<usize>().ok())
        {
            files.push((frame, path));
        }
    }
    files.sort();
    Ok(files)
}

/// Reads a directory written by [`write_masks`].
pub fn read_masks(dir: &Path, video_id: &str) -> Result<MaskTrack, DataError> {
    let files = frame_files(dir)?;
    if files.is_empty() {
        return Err(DataError::NoFrames {
            path: dir.to_path_buf(),
        });
    }
    let mut track = MaskTrack::new(video_id);
    for (frame, path) in files {
        let mask = read_mask(&path)?;
        if let Some(expected) = track.dims() {
            if expected != mask.dims() {
                return Err(DataError::Dimensions {
                    path,
                    expected,
                    actual: mask.dims(),
                });
            }
        }
        track.insert(frame, mask)?;
    }
    Ok(track)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    use crate::types::Seed;

    #[test]
    fn track_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = Seed(11).rng();
        let track = MaskTrack::from_entries(
            "v",
            (0..4).map(|i| {
                let m = BinaryMask::from_fn(5, 7, |_, _| rng.random_bool(0.4)).unwrap();
                (i, m)
            }),
        )
        .unwrap();
        write_masks(&track, dir.path()).unwrap();
        assert!(dir.path().join("00003.png").exists());
        assert_eq!(read_masks(dir.path(), "v").unwrap(), track);
    }

    #[test]
    fn empty_dir_has_no_frames() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(read_masks(dir.path(), "v"), Err(DataError::NoFrames { .. })));
    }

    #[test]
    fn non_binary_values_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write_indexed_png(&dir.path().join("00000.png"), 2, 2, &[0, 1, 3, 0]).unwrap();
        assert!(matches!(
            read_masks(dir.path(), "v"),
            Err(DataError::NonBinary { value: 3, .. })
        ));
    }

    #[test]
    fn labels_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = LabelGrid::new(2, 3, vec![0, 1, 2, 7, 255, 0]).unwrap();
        let p = dir.path().join("l.png");
        write_labels(&p, &g).unwrap();
        assert_eq!(read_labels(&p).unwrap(), g);
    }
}
