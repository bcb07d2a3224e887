//! Binary portable-graymap (P5) frame files.

use std::path::{Path, PathBuf};

use std::io::Write;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageEncoder};

use crate::error::{Error, Result};
use crate::field::Frame;

pub fn frame_file_name(index: usize) -> String {
    format!("frame_{index:05}.pgm")
}

pub fn read_pgm(path: &Path) -> Result<Frame> {
    let img = image::open(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let gray = img.into_luma8();
    let (w, h) = gray.dimensions();
    Frame::new(w as usize, h as usize, gray.into_raw())
}

pub fn write_pgm(path: &Path, frame: &Frame) -> Result<()> {
    let image_err = |message: String| Error::Image {
        path: path.to_path_buf(),
        message,
    };
    let file = std::fs::File::create(path)?;
    let mut out = std::io::BufWriter::new(file);
    PnmEncoder::new(&mut out)
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(
            frame.pixels(),
            frame.width() as u32,
            frame.height() as u32,
            ExtendedColorType::L8,
        )
        .map_err(|e| image_err(e.to_string()))?;
    out.flush()?;
    Ok(())
}

/// Sorted `.pgm` files in `dir`.
pub fn list_frames(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
        })
        .collect();
    paths.sort();
    Ok(paths)
}

pub fn read_dir_frames(dir: &Path) -> Result<Vec<Frame>> {
    list_frames(dir)?.iter().map(|p| read_pgm(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_graymap_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let pixels: Vec<u8> = (0..35).map(|i| (i * 7) as u8).collect();
        let frame = Frame::new(7, 5, pixels).unwrap();
        let path = dir.path().join(frame_file_name(3));
        write_pgm(&path, &frame).unwrap();
        let raw = std::fs::read(&path).unwrap();
        assert!(raw.starts_with(b"P5"));
        assert_eq!(read_pgm(&path).unwrap(), frame);
    }

    #[test]
    fn listing_is_sorted_and_filtered() {
        let dir = tempfile::tempdir().unwrap();
        let f = Frame::filled(3, 3, 9);
        for i in [2, 0, 1] {
            write_pgm(&dir.path().join(frame_file_name(i)), &f).unwrap();
        }
        std::fs::write(dir.path().join("manifest.txt"), "x").unwrap();
        let names: Vec<_> = list_frames(dir.path())
            .unwrap()
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert_eq!(names, ["frame_00000.pgm", "frame_00001.pgm", "frame_00002.pgm"]);
    }

    #[test]
    fn unreadable_file_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.pgm");
        std::fs::write(&path, b"not an image").unwrap();
        assert!(matches!(read_pgm(&path), Err(Error::Image { .. })));
    }
}
