//! Pixel-color plot rendering: coverage grids to rasters, plus the color-code
//! legend. The reference output format is binary PPM (P6), which is trivially
//! byte-deterministic; PNG can be layered on top of the same raster.

use std::io::Write as _;
use std::path::Path;

use crate::grid::PixelGrid;
use crate::palette::{ColorBin, ColorCode};
use crate::{Error, Result};

const WHITE: [u8; 3] = [0xFF, 0xFF, 0xFF];
const BLACK: [u8; 3] = [0x00, 0x00, 0x00];

/// Rows appended below a grid raster when its legend strip is enabled.
const STRIP_SEPARATOR_ROWS: u32 = 2;
const STRIP_ROWS: u32 = 16;

/// An RGB raster, row-major with the top row first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlotImage {
    width: u32,
    height: u32,
    pixels: Vec<[u8; 3]>,
}

impl PlotImage {
    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Result<Self> {
        let len = u64::from(width) * u64::from(height);
        if width == 0 || height == 0 || len > 1 << 30 {
            return Err(Error::ImageTooLarge(u64::from(width), u64::from(height)));
        }
        Ok(Self {
            width,
            height,
            pixels: vec![rgb; len as usize],
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        self.pixels[(y * self.width + x) as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        self.pixels[(y * self.width + x) as usize] = rgb;
    }

    fn fill_rect(&mut self, x0: u32, y0: u32, x1: u32, y1: u32, rgb: [u8; 3]) {
        for y in y0..y1.min(self.height) {
            for x in x0..x1.min(self.width) {
                self.set(x, y, rgb);
            }
        }
    }

    /// Binary PPM bytes: `P6`, max value 255, top row first.
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.pixels.len() * 3 + 32);
        let _ = write!(out, "P6\n{} {}\n255\n", self.width, self.height);
        for px in &self.pixels {
            out.extend_from_slice(px);
        }
        out
    }

    pub fn write_ppm<P: AsRef<Path>>(&self, path: P) -> std::io::Result<()> {
        std::fs::write(path, self.to_ppm())
    }

    pub fn write_png<P: AsRef<Path>>(&self, path: P) -> image::ImageResult<()> {
        let raw: Vec<u8> = self.pixels.iter().flatten().copied().collect();
        let img = image::RgbImage::from_raw(self.width, self.height, raw)
            .expect("buffer sized to dimensions");
        img.save_with_format(path, image::ImageFormat::Png)
    }
}

/// Render one estimator's grid: `n` increases left to right, `p` increases
/// bottom to top, and every cell becomes a `scale x scale` block of its bin's
/// color. With `legend` set, an eight-color strip is appended below.
pub fn render_grid(grid: &PixelGrid, code: &ColorCode, scale: u32, legend: bool) -> PlotImage {
    let scale = scale.max(1);
    let n_count = grid.n_values().len() as u32;
    let p_count = grid.p_indices().len() as u32;
    let width = n_count * scale;
    let grid_height = p_count * scale;
    let height = grid_height
        + if legend {
            STRIP_SEPARATOR_ROWS + STRIP_ROWS
        } else {
            0
        };
    let mut img = PlotImage::filled(width, height, WHITE).expect("grid raster size");

    for (ni, _) in grid.n_values().iter().enumerate() {
        for (pi, _) in grid.p_indices().iter().enumerate() {
            let cell = &grid.cells()[ni * p_count as usize + pi];
            let rgb = code.rgb(code.classify_result(cell));
            let x0 = ni as u32 * scale;
            // p ascends bottom-to-top, so the largest p index is row zero.
            let y0 = (p_count - 1 - pi as u32) * scale;
            img.fill_rect(x0, y0, x0 + scale, y0 + scale, rgb);
        }
    }

    if legend {
        let y0 = grid_height + STRIP_SEPARATOR_ROWS;
        for (i, bin) in ColorBin::ALL.iter().enumerate() {
            let x0 = (i as u32 * width) / 8;
            let x1 = ((i as u32 + 1) * width) / 8;
            img.fill_rect(x0, y0, x1, y0 + STRIP_ROWS, code.rgb(*bin));
        }
    }

    img
}

const LEGEND_SEG_W: u32 = 64;
const LEGEND_BAND_H: u32 = 24;
const LEGEND_LABEL_H: u32 = 9;
const LEGEND_GAP: u32 = 6;
const LEGEND_MARGIN_X: u32 = 14;
const LEGEND_MARGIN_Y: u32 = 4;

/// Render the color-code legend: one horizontal band per code, eight
/// equal-width segments in ascending coverage order, with the nine boundary
/// values printed underneath.
pub fn render_legend(codes: &[ColorCode]) -> Result<PlotImage> {
    if codes.is_empty() {
        return Err(Error::EmptyLegend);
    }
    let band_w = 8 * LEGEND_SEG_W;
    let width = band_w + 2 * LEGEND_MARGIN_X;
    let block_h = LEGEND_BAND_H + LEGEND_LABEL_H;
    let height =
        2 * LEGEND_MARGIN_Y + codes.len() as u32 * block_h + (codes.len() as u32 - 1) * LEGEND_GAP;
    let mut img = PlotImage::filled(width, height, WHITE)?;

    for (ci, code) in codes.iter().enumerate() {
        let top = LEGEND_MARGIN_Y + ci as u32 * (block_h + LEGEND_GAP);
        for (i, bin) in ColorBin::ALL.iter().enumerate() {
            let x0 = LEGEND_MARGIN_X + i as u32 * LEGEND_SEG_W;
            img.fill_rect(x0, top, x0 + LEGEND_SEG_W, top + LEGEND_BAND_H, code.rgb(*bin));
        }
        let label_y = top + LEGEND_BAND_H + 2;
        for (k, boundary) in code.boundaries().iter().enumerate() {
            let text = format_boundary(*boundary);
            let text_w = text_width(&text);
            let center = LEGEND_MARGIN_X + k as u32 * LEGEND_SEG_W;
            let x = center.saturating_sub(text_w / 2).min(width - text_w);
            draw_text(&mut img, x, label_y, &text, BLACK);
        }
    }

    Ok(img)
}

/// Boundary label: integers bare, otherwise up to three decimals with
/// trailing zeros trimmed.
fn format_boundary(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if v == 1.0 {
        return "1".to_string();
    }
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// 3x5 glyphs for the digits and the decimal point, one row per byte,
/// most significant of the low three bits on the left.
fn glyph(c: char) -> [u8; 5] {
    match c {
        '0' => [0b111, 0b101, 0b101, 0b101, 0b111],
        '1' => [0b010, 0b110, 0b010, 0b010, 0b111],
        '2' => [0b111, 0b001, 0b111, 0b100, 0b111],
        '3' => [0b111, 0b001, 0b111, 0b001, 0b111],
        '4' => [0b101, 0b101, 0b111, 0b001, 0b001],
        '5' => [0b111, 0b100, 0b111, 0b001, 0b111],
        '6' => [0b111, 0b100, 0b111, 0b101, 0b111],
        '7' => [0b111, 0b001, 0b010, 0b010, 0b010],
        '8' => [0b111, 0b101, 0b111, 0b101, 0b111],
        '9' => [0b111, 0b101, 0b111, 0b001, 0b111],
        '.' => [0b000, 0b000, 0b000, 0b000, 0b010],
        _ => [0b000; 5],
    }
}

fn text_width(text: &str) -> u32 {
    (text.chars().count() as u32 * 4).saturating_sub(1)
}

fn draw_text(img: &mut PlotImage, x: u32, y: u32, text: &str, rgb: [u8; 3]) {
    let mut cx = x;
    for c in text.chars() {
        let g = glyph(c);
        for (row, bits) in g.iter().enumerate() {
            for col in 0..3u32 {
                if bits >> (2 - col) & 1 == 1 {
                    let px = cx + col;
                    let py = y + row as u32;
                    if px < img.width() && py < img.height() {
                        img.set(px, py, rgb);
                    }
                }
            }
        }
        cx += 4;
    }
}
