//! Raster types shared by the painting and photobash domains, plus
//! binary PPM (P6) and PBM (P4) codecs for storing them on disk.

use serde::{Deserialize, Serialize};
use std::fmt;

/// An 8-bit RGB color. Serialized as `[r, g, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[u8; 3]", into = "[u8; 3]")]
pub struct Color {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Color {
    pub const WHITE: Color = Color::new(255, 255, 255);
    pub const BLACK: Color = Color::new(0, 0, 0);

    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Color { r, g, b }
    }

    /// Sum of absolute channel differences, in `0..=765`.
    pub fn l1(self, other: Color) -> u32 {
        self.r.abs_diff(other.r) as u32
            + self.g.abs_diff(other.g) as u32
            + self.b.abs_diff(other.b) as u32
    }
}

impl From<[u8; 3]> for Color {
    fn from(c: [u8; 3]) -> Self {
        Color::new(c[0], c[1], c[2])
    }
}

impl From<Color> for [u8; 3] {
    fn from(c: Color) -> Self {
        [c.r, c.g, c.b]
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.r, self.g, self.b)
    }
}

/// Canvas width and height in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CanvasSize {
    pub width: u32,
    pub height: u32,
}

impl CanvasSize {
    pub const DEFAULT: CanvasSize = CanvasSize {
        width: 64,
        height: 64,
    };

    pub fn new(width: u32, height: u32) -> Self {
        CanvasSize { width, height }
    }

    pub fn area(self) -> usize {
        self.width as usize * self.height as usize
    }
}

impl Default for CanvasSize {
    fn default() -> Self {
        CanvasSize::DEFAULT
    }
}

impl fmt::Display for CanvasSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

impl std::str::FromStr for CanvasSize {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (w, h) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("expected WxH, got `{s}`"))?;
        let width: u32 = w.trim().parse().map_err(|_| format!("bad width `{w}`"))?;
        let height: u32 = h.trim().parse().map_err(|_| format!("bad height `{h}`"))?;
        if width < 2 || height < 2 {
            return Err("canvas must be at least 2x2".into());
        }
        Ok(CanvasSize { width, height })
    }
}

/// Maps a pixel index to a unit coordinate that maps back to it under
/// `floor(x * span)`, where `span` is the number of admissible offsets
/// minus one.
pub fn unit_coord_for(index: u32, span: u32) -> f64 {
    debug_assert!(index <= span);
    if span == 0 || index == span {
        return if span == 0 { 0.0 } else { 1.0 };
    }
    (index as f64 + 0.5) / span as f64
}

/// Inverse of [`unit_coord_for`]: `floor(x * span)` for `x` in `[0, 1]`.
pub fn index_for_unit(x: f64, span: u32) -> u32 {
    ((x * span as f64).floor() as u32).min(span)
}

/// An opaque RGB raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Canvas {
    width: u32,
    height: u32,
    pixels: Vec<Color>,
}

impl Canvas {
    /// A canvas filled with white.
    pub fn blank(size: CanvasSize) -> Self {
        Canvas::filled(size, Color::WHITE)
    }

    pub fn filled(size: CanvasSize, color: Color) -> Self {
        Canvas {
            width: size.width,
            height: size.height,
            pixels: vec![color; size.area()],
        }
    }

    pub fn from_pixels(size: CanvasSize, pixels: Vec<Color>) -> Self {
        assert_eq!(pixels.len(), size.area(), "pixel buffer does not match size");
        Canvas {
            width: size.width,
            height: size.height,
            pixels,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn size(&self) -> CanvasSize {
        CanvasSize::new(self.width, self.height)
    }

    pub fn pixels(&self) -> &[Color] {
        &self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> Color {
        self.pixels[(y * self.width + x) as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, c: Color) {
        self.pixels[(y * self.width + x) as usize] = c;
    }

    pub fn fill(&mut self, c: Color) {
        self.pixels.iter_mut().for_each(|p| *p = c);
    }

    /// Number of pixels that are not white.
    pub fn coverage(&self) -> usize {
        self.pixels.iter().filter(|&&p| p != Color::WHITE).count()
    }

    /// Writes the opaque pixels of `sprite` with its top-left at `(ox, oy)`.
    /// The sprite must fit.
    pub fn stamp(&mut self, sprite: &Sprite, ox: u32, oy: u32) {
        debug_assert!(ox + sprite.width() <= self.width && oy + sprite.height() <= self.height);
        for (x, y, c) in sprite.opaque_pixels() {
            self.set(ox + x, oy + y, c);
        }
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        encode_ppm(self.width, self.height, self.pixels.iter().copied())
    }

    pub fn from_ppm(bytes: &[u8]) -> Result<Self, String> {
        let (w, h, pixels) = decode_ppm(bytes)?;
        Ok(Canvas::from_pixels(CanvasSize::new(w, h), pixels))
    }
}

/// An RGB raster with a one-bit alpha channel.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sprite {
    width: u32,
    height: u32,
    pixels: Vec<Option<Color>>,
}

impl Sprite {
    pub fn transparent(width: u32, height: u32) -> Self {
        Sprite {
            width,
            height,
            pixels: vec![None; width as usize * height as usize],
        }
    }

    pub fn from_pixels(width: u32, height: u32, pixels: Vec<Option<Color>>) -> Self {
        assert_eq!(pixels.len(), width as usize * height as usize);
        Sprite {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn get(&self, x: u32, y: u32) -> Option<Color> {
        self.pixels[(y * self.width + x) as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, c: Option<Color>) {
        self.pixels[(y * self.width + x) as usize] = c;
    }

    pub fn opaque_count(&self) -> usize {
        self.pixels.iter().filter(|p| p.is_some()).count()
    }

    pub fn opaque_pixels(&self) -> impl Iterator<Item = (u32, u32, Color)> + '_ {
        let w = self.width;
        self.pixels
            .iter()
            .enumerate()
            .filter_map(move |(i, p)| p.map(|c| (i as u32 % w, i as u32 / w, c)))
    }

    /// Copies the opaque pixels of `other` onto `self` at `(dx, dy)`.
    pub fn overlay(&mut self, other: &Sprite, dx: u32, dy: u32) {
        for (x, y, c) in other.opaque_pixels() {
            self.set(dx + x, dy + y, Some(c));
        }
    }

    /// Rectangular sub-image. The rectangle must lie inside the sprite.
    pub fn sub_image(&self, x0: u32, y0: u32, w: u32, h: u32) -> Sprite {
        let mut out = Sprite::transparent(w, h);
        for y in 0..h {
            for x in 0..w {
                out.set(x, y, self.get(x0 + x, y0 + y));
            }
        }
        out
    }

    /// RGB plane with transparent pixels written as white.
    pub fn to_ppm(&self) -> Vec<u8> {
        encode_ppm(
            self.width,
            self.height,
            self.pixels.iter().map(|p| p.unwrap_or(Color::WHITE)),
        )
    }

    /// Alpha plane as PBM; a set bit marks an opaque pixel.
    pub fn mask_to_pbm(&self) -> Vec<u8> {
        let mut out = format!("P4\n{} {}\n", self.width, self.height).into_bytes();
        let row_bytes = (self.width as usize).div_ceil(8);
        for y in 0..self.height {
            let mut row = vec![0u8; row_bytes];
            for x in 0..self.width {
                if self.get(x, y).is_some() {
                    row[x as usize / 8] |= 0x80 >> (x % 8);
                }
            }
            out.extend_from_slice(&row);
        }
        out
    }

    pub fn from_ppm_and_pbm(ppm: &[u8], pbm: &[u8]) -> Result<Self, String> {
        let (w, h, rgb) = decode_ppm(ppm)?;
        let (mw, mh, mask) = decode_pbm(pbm)?;
        if (w, h) != (mw, mh) {
            return Err(format!("mask is {mw}x{mh} but image is {w}x{h}"));
        }
        let pixels = rgb
            .into_iter()
            .zip(mask)
            .map(|(c, opaque)| opaque.then_some(c))
            .collect();
        Ok(Sprite::from_pixels(w, h, pixels))
    }
}

fn encode_ppm(width: u32, height: u32, pixels: impl Iterator<Item = Color>) -> Vec<u8> {
    let mut out = format!("P6\n{width} {height}\n255\n").into_bytes();
    for c in pixels {
        out.extend_from_slice(&[c.r, c.g, c.b]);
    }
    out
}

/// Reads `count` whitespace-separated ASCII header fields after the magic,
/// skipping `#` comments. Returns the fields and the offset of the raster.
fn read_header(bytes: &[u8], magic: &[u8], count: usize) -> Result<(Vec<u32>, usize), String> {
    if !bytes.starts_with(magic) {
        return Err(format!("missing {} magic", String::from_utf8_lossy(magic)));
    }
    let mut pos = magic.len();
    let mut fields = Vec::with_capacity(count);
    while fields.len() < count {
        match bytes.get(pos) {
            None => return Err("truncated header".into()),
            Some(b'#') => {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            }
            Some(c) if c.is_ascii_whitespace() => pos += 1,
            Some(c) if c.is_ascii_digit() => {
                let start = pos;
                while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    pos += 1;
                }
                let text = std::str::from_utf8(&bytes[start..pos]).expect("ascii digits");
                fields.push(text.parse().map_err(|_| "header number overflow".to_string())?);
            }
            Some(c) => return Err(format!("unexpected header byte {c:#x}")),
        }
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(pos) {
        Some(c) if c.is_ascii_whitespace() => Ok((fields, pos + 1)),
        _ => Err("missing separator before raster".into()),
    }
}

fn decode_ppm(bytes: &[u8]) -> Result<(u32, u32, Vec<Color>), String> {
    let (fields, start) = read_header(bytes, b"P6", 3)?;
    let (w, h, maxval) = (fields[0], fields[1], fields[2]);
    if maxval != 255 {
        return Err(format!("only 8-bit PPM is supported, maxval {maxval}"));
    }
    let n = w as usize * h as usize;
    let raster = &bytes[start..];
    if raster.len() != n * 3 {
        return Err(format!("expected {} raster bytes, found {}", n * 3, raster.len()));
    }
    let pixels = raster
        .chunks_exact(3)
        .map(|c| Color::new(c[0], c[1], c[2]))
        .collect();
    Ok((w, h, pixels))
}

fn decode_pbm(bytes: &[u8]) -> Result<(u32, u32, Vec<bool>), String> {
    let (fields, start) = read_header(bytes, b"P4", 2)?;
    let (w, h) = (fields[0], fields[1]);
    let row_bytes = (w as usize).div_ceil(8);
    let raster = &bytes[start..];
    if raster.len() != row_bytes * h as usize {
        return Err(format!(
            "expected {} raster bytes, found {}",
            row_bytes * h as usize,
            raster.len()
        ));
    }
    let mut bits = Vec::with_capacity(w as usize * h as usize);
    for row in raster.chunks_exact(row_bytes) {
        for x in 0..w as usize {
            bits.push(row[x / 8] & (0x80 >> (x % 8)) != 0);
        }
    }
    Ok((w, h, bits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn unit_coords_round_trip_every_index() {
        for span in [0u32, 1, 7, 63, 100] {
            for i in 0..=span {
                let x = unit_coord_for(i, span);
                assert!((0.0..=1.0).contains(&x));
                assert_eq!(index_for_unit(x, span), i, "span {span} index {i}");
            }
        }
    }

    #[test]
    fn ppm_header_with_comment() {
        let mut bytes = b"P6\n# made by hand\n2 1\n255\n".to_vec();
        bytes.extend_from_slice(&[1, 2, 3, 4, 5, 6]);
        let c = Canvas::from_ppm(&bytes).unwrap();
        assert_eq!(c.get(1, 0), Color::new(4, 5, 6));
    }

    #[test]
    fn rejects_16_bit_ppm() {
        let bytes = b"P6\n1 1\n65535\n\0\0\0\0\0\0".to_vec();
        assert!(Canvas::from_ppm(&bytes).is_err());
    }

    #[test]
    fn size_parsing() {
        assert_eq!("32x48".parse::<CanvasSize>().unwrap(), CanvasSize::new(32, 48));
        assert!("32".parse::<CanvasSize>().is_err());
        assert!("1x9".parse::<CanvasSize>().is_err());
    }

    fn arb_sprite() -> impl Strategy<Value = Sprite> {
        (1u32..11, 1u32..11).prop_flat_map(|(w, h)| {
            proptest::collection::vec(
                proptest::option::of(any::<[u8; 3]>().prop_map(Color::from)),
                (w * h) as usize,
            )
            .prop_map(move |px| Sprite::from_pixels(w, h, px))
        })
    }

    proptest! {
        #[test]
        fn sprite_survives_ppm_pbm(s in arb_sprite()) {
            let back = Sprite::from_ppm_and_pbm(&s.to_ppm(), &s.mask_to_pbm()).unwrap();
            // Transparent pixels come back as `None`, opaque ones exactly.
            prop_assert_eq!(back, s);
        }
    }
}
