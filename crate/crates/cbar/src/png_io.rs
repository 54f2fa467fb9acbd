//! 8-bit PNG decoding and encoding.
//!
//! Any 8- or 16-bit PNG is accepted on load: palettes are expanded,
//! 16-bit samples are truncated to their high byte, gray is replicated to
//! RGB and alpha is dropped. Images are always written as 8-bit RGB.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use cbar_core::ImageBuffer;

use crate::error::{CliError, Result};

pub fn load_png(path: &Path) -> Result<ImageBuffer> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut decoder = png::Decoder::new(BufReader::new(file));
    decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
    let bad = |e: png::DecodingError| CliError::Data(format!("{}: {e}", path.display()));
    let mut reader = decoder.read_info().map_err(bad)?;
    let mut buf = vec![0u8; reader.output_buffer_size()];
    let info = reader.next_frame(&mut buf).map_err(bad)?;
    let (w, h) = (info.width as usize, info.height as usize);
    let bytes = &buf[..info.buffer_size()];
    let rgb: Vec<u8> = match info.color_type {
        png::ColorType::Rgb => bytes.to_vec(),
        png::ColorType::Rgba => bytes
            .chunks_exact(4)
            .flat_map(|p| [p[0], p[1], p[2]])
            .collect(),
        png::ColorType::Grayscale => bytes.iter().flat_map(|&g| [g, g, g]).collect(),
        png::ColorType::GrayscaleAlpha => bytes
            .chunks_exact(2)
            .flat_map(|p| [p[0], p[0], p[0]])
            .collect(),
        png::ColorType::Indexed => {
            return Err(CliError::Data(format!(
                "{}: palette was not expanded",
                path.display()
            )))
        }
    };
    Ok(ImageBuffer::from_rgb8(h, w, &rgb)?)
}

pub fn save_png(path: &Path, img: &ImageBuffer) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut enc = png::Encoder::new(
        BufWriter::new(file),
        img.width() as u32,
        img.height() as u32,
    );
    enc.set_color(png::ColorType::Rgb);
    enc.set_depth(png::BitDepth::Eight);
    let bad = |e: png::EncodingError| CliError::Data(format!("{}: {e}", path.display()));
    let mut writer = enc.write_header().map_err(bad)?;
    writer.write_image_data(&img.to_rgb8()).map_err(bad)?;
    writer.finish().map_err(bad)?;
    Ok(())
}
