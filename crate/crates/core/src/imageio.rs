//! RGBA8 textures and PNG I/O.

use std::io::Cursor;

use image::{ImageEncoder, ImageFormat};
use thiserror::Error;

/// One 8-bit RGBA pixel.
pub type Rgba8 = [u8; 4];

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("PNG decode failed: {0}")]
    Decode(#[source] image::ImageError),
    #[error("PNG encode failed: {0}")]
    Encode(#[source] image::ImageError),
    #[error("texture dimensions must be non-zero, got {width}x{height}")]
    ZeroSize { width: u32, height: u32 },
    #[error("pixel buffer has {actual} bytes, expected {expected}")]
    BufferSize { expected: usize, actual: usize },
}

/// A W×H RGBA8 image stored row-major from the top row.
#[derive(Clone, PartialEq, Eq)]
pub struct Texture {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl std::fmt::Debug for Texture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Texture")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl Texture {
    /// Creates a texture filled with `fill`.
    pub fn new(width: u32, height: u32, fill: Rgba8) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::ZeroSize { width, height });
        }
        let pixels = fill.repeat(width as usize * height as usize);
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn from_rgba(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::ZeroSize { width, height });
        }
        let expected = width as usize * height as usize * 4;
        if pixels.len() != expected {
            return Err(ImageError::BufferSize {
                expected,
                actual: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Builds a texture by evaluating `f(x, y)` for every pixel.
    pub fn from_fn(
        width: u32,
        height: u32,
        mut f: impl FnMut(u32, u32) -> Rgba8,
    ) -> Result<Self, ImageError> {
        let mut tex = Self::new(width, height, [0; 4])?;
        for y in 0..height {
            for x in 0..width {
                tex.set(x, y, f(x, y));
            }
        }
        Ok(tex)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    fn offset(&self, x: u32, y: u32) -> usize {
        debug_assert!(x < self.width && y < self.height);
        (y as usize * self.width as usize + x as usize) * 4
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> Rgba8 {
        let i = self.offset(x, y);
        [
            self.pixels[i],
            self.pixels[i + 1],
            self.pixels[i + 2],
            self.pixels[i + 3],
        ]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, px: Rgba8) {
        let i = self.offset(x, y);
        self.pixels[i..i + 4].copy_from_slice(&px);
    }
}

/// Decodes a PNG of any standard color type into 8-bit RGBA.
///
/// Grayscale and RGB inputs are promoted with alpha 255; 16-bit channels are
/// reduced to 8 bits.
pub fn load_png(bytes: &[u8]) -> Result<Texture, ImageError> {
    let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)
        .map_err(ImageError::Decode)?
        .into_rgba8();
    let (w, h) = img.dimensions();
    Texture::from_rgba(w, h, img.into_raw())
}

/// Encodes a texture as an 8-bit RGBA PNG.
pub fn save_png(texture: &Texture) -> Vec<u8> {
    let mut out = Cursor::new(Vec::new());
    image::codecs::png::PngEncoder::new(&mut out)
        .write_image(
            texture.as_bytes(),
            texture.width,
            texture.height,
            image::ExtendedColorType::Rgba8,
        )
        .expect("in-memory PNG encoding of a validated RGBA8 buffer");
    out.into_inner()
}
