//! Tiling pictures: SVG 1.1 with one `rect` per leaf, and an optional PNG
//! raster of the same picture.

use anyhow::Result;
use lqg_core::boxes::{BoxTiling, Leaf};
use std::fmt::Write as _;

use crate::io::Provenance;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Style {
    /// Stroke width in pixels.
    pub stroke: f64,
    /// Fill leaves by depth instead of leaving them white.
    pub color_by_depth: bool,
    /// Picture width and height in pixels.
    pub size: u32,
}

impl Default for Style {
    fn default() -> Self {
        Self {
            stroke: 0.5,
            color_by_depth: false,
            size: 1024,
        }
    }
}

fn max_level(leaves: &[Leaf]) -> u8 {
    leaves.iter().map(|l| l.square.level).max().unwrap_or(0)
}

/// Blue for coarse boxes through red for the finest.
fn depth_rgb(level: u8, max: u8) -> [u8; 3] {
    let t = if max == 0 {
        0.0
    } else {
        level as f64 / max as f64
    };
    let r = (255.0 * t).round() as u8;
    let g = (255.0 * (1.0 - (2.0 * t - 1.0).abs()) * 0.8).round() as u8;
    let b = (255.0 * (1.0 - t)).round() as u8;
    [r, g, b]
}

fn fill_of(leaf: &Leaf, max: u8, style: &Style) -> [u8; 3] {
    if style.color_by_depth {
        depth_rgb(leaf.square.level, max)
    } else if leaf.forced {
        [255, 200, 200]
    } else {
        [255, 255, 255]
    }
}

/// Pixel rectangle `(x, y, w, h)` of a leaf, origin at the top left.
fn pixel_rect(leaf: &Leaf, side: f64, size: u32) -> (f64, f64, f64) {
    let scale = size as f64 / side;
    let c = leaf.square.corner(side);
    let s = leaf.square.size(side) * scale;
    (c.x * scale, size as f64 - c.y * scale - s, s)
}

pub fn tiling_svg(tiling: &BoxTiling, style: &Style, prov: &Provenance, title: &str) -> String {
    let size = style.size;
    let max = max_level(tiling.leaves());
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(out, "<!-- {} -->", prov.line());
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">"
    );
    let _ = writeln!(out, "<title>{}</title>", xml_escape(title));
    let _ = writeln!(
        out,
        "<g stroke=\"black\" stroke-width=\"{}\">",
        style.stroke
    );
    for leaf in tiling.leaves() {
        let (x, y, s) = pixel_rect(leaf, tiling.side(), size);
        let [r, g, b] = fill_of(leaf, max, style);
        let _ = writeln!(
            out,
            "<rect x=\"{x:.3}\" y=\"{y:.3}\" width=\"{s:.3}\" height=\"{s:.3}\" fill=\"#{r:02x}{g:02x}{b:02x}\"/>"
        );
    }
    out.push_str("</g>\n</svg>\n");
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// RGB raster of the tiling: leaf fills with one-pixel (or wider) edges.
pub fn tiling_raster(tiling: &BoxTiling, style: &Style) -> Vec<u8> {
    let size = style.size as usize;
    let max = max_level(tiling.leaves());
    let line = style.stroke.round().max(1.0) as usize;
    let mut px = vec![0u8; 3 * size * size];
    for leaf in tiling.leaves() {
        let (x, y, s) = pixel_rect(leaf, tiling.side(), style.size);
        let (x0, y0) = (x.round() as usize, y.round() as usize);
        let (x1, y1) = (
            ((x + s).round() as usize).min(size),
            ((y + s).round() as usize).min(size),
        );
        let fill = fill_of(leaf, max, style);
        for j in y0..y1 {
            for i in x0..x1 {
                let edge = i < x0 + line || j < y0 + line || i + line >= x1 || j + line >= y1;
                let rgb = if edge { [0, 0, 0] } else { fill };
                px[3 * (j * size + i)..3 * (j * size + i) + 3].copy_from_slice(&rgb);
            }
        }
    }
    px
}

/// Encodes an RGB PNG with the provenance in `tEXt` chunks.
pub fn encode_png(size: u32, rgb: &[u8], prov: &Provenance) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, size, size);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        enc.add_text_chunk("Software".into(), format!("lqg {}", prov.version))?;
        enc.add_text_chunk("Comment".into(), prov.line())?;
        let mut w = enc.write_header()?;
        w.write_image_data(rgb)?;
        w.finish()?;
    }
    Ok(out)
}
