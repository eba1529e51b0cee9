//! Raster snapshots and graph drawings over the habitat map.

use std::io::Cursor;
use std::path::Path;

use base64::Engine;
use image::{GrayImage, ImageFormat, Luma, Rgb, RgbImage};

use crate::citymap::{Cell, CitySet, HabitatMap};
use crate::error::{Error, Result};
use crate::graph::CityGraph;
use crate::graphlab::WeightedCityGraph;

const OUTSIDE: [u8; 3] = [70, 70, 70];
const OBSTACLE: [u8; 3] = [150, 150, 150];
const LAND: [u8; 3] = [255, 255, 255];
const PARTICLE: [u8; 3] = [200, 170, 20];
const CITY: [u8; 3] = [200, 30, 30];

/// Binary occupancy: occupied cells black, everything else white.
pub fn occupancy_image(habitat: &HabitatMap, occupied: &[bool]) -> GrayImage {
    let w = habitat.width();
    GrayImage::from_fn(w as u32, habitat.height() as u32, |x, y| {
        let o = occupied[y as usize * w + x as usize];
        Luma([if o { 0 } else { 255 }])
    })
}

/// Chemoattractant scaled linearly so the maximum maps to 255.
pub fn chemo_image(habitat: &HabitatMap, chemo: &[f64]) -> GrayImage {
    let max = chemo.iter().copied().fold(0.0, f64::max);
    let scale = if max > 0.0 { 255.0 / max } else { 0.0 };
    let w = habitat.width();
    GrayImage::from_fn(w as u32, habitat.height() as u32, |x, y| {
        let v = chemo[y as usize * w + x as usize] * scale;
        Luma([v.round().clamp(0.0, 255.0) as u8])
    })
}

/// Map colours with particles and city centres drawn on top.
pub fn map_image(habitat: &HabitatMap, occupied: Option<&[bool]>, cities: &CitySet) -> RgbImage {
    let w = habitat.width();
    let mut img = RgbImage::from_fn(w as u32, habitat.height() as u32, |x, y| {
        let i = y as usize * w + x as usize;
        if occupied.is_some_and(|o| o[i]) {
            return Rgb(PARTICLE);
        }
        Rgb(match habitat.cells()[i] {
            Cell::Habitable => LAND,
            Cell::Obstacle => OBSTACLE,
            Cell::Outside => OUTSIDE,
        })
    });
    for c in &cities.cities {
        for dy in -2i64..=2 {
            for dx in -2i64..=2 {
                let (x, y) = (c.x as i64 + dx, c.y as i64 + dy);
                if x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < habitat.height() {
                    img.put_pixel(x as u32, y as u32, Rgb(CITY));
                }
            }
        }
    }
    img
}

/// Side-by-side tiles with a 4 px gutter, wrapping after `per_row` tiles.
pub fn tile(images: &[RgbImage], per_row: usize) -> RgbImage {
    let Some(first) = images.first() else {
        return RgbImage::new(1, 1);
    };
    let (tw, th) = first.dimensions();
    let gap = 4;
    let cols = per_row.clamp(1, images.len()) as u32;
    let rows = images.len().div_ceil(cols as usize) as u32;
    let mut out = RgbImage::from_pixel(
        cols * tw + (cols - 1) * gap,
        rows * th + (rows - 1) * gap,
        Rgb([0, 0, 0]),
    );
    for (i, img) in images.iter().enumerate() {
        let (c, r) = (i as u32 % cols, i as u32 / cols);
        image::imageops::overlay(&mut out, img, (c * (tw + gap)) as i64, (r * (th + gap)) as i64);
    }
    out
}

/// Writes a greyscale image; the format follows the extension (`.pgm` or
/// `.png`).
pub fn save_gray(img: &GrayImage, path: &Path) -> Result<()> {
    let fmt = format_for(path)?;
    img.save_with_format(path, fmt).map_err(|e| image_error(path, e))
}

pub fn save_rgb(img: &RgbImage, path: &Path) -> Result<()> {
    let fmt = format_for(path)?;
    img.save_with_format(path, fmt).map_err(|e| image_error(path, e))
}

fn format_for(path: &Path) -> Result<ImageFormat> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("png") => Ok(ImageFormat::Png),
        Some("pgm") | Some("ppm") | Some("pnm") => Ok(ImageFormat::Pnm),
        _ => Err(Error::Format {
            path: path.into(),
            message: "expected a .png or .pgm extension".into(),
        }),
    }
}

fn image_error(path: &Path, e: image::ImageError) -> Error {
    match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Format {
            path: path.into(),
            message: other.to_string(),
        },
    }
}

fn png_base64(img: &RgbImage) -> String {
    let mut buf = Cursor::new(Vec::new());
    img.write_to(&mut buf, ImageFormat::Png)
        .expect("in-memory PNG encoding");
    base64::engine::general_purpose::STANDARD.encode(buf.into_inner())
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Straight-line drawing of `graph` over the map, as a standalone SVG with
/// the map embedded as a PNG. With `weights`, stroke width follows the
/// edge weight and each edge is labelled `count/k`.
pub fn graph_svg(
    habitat: &HabitatMap,
    cities: &CitySet,
    graph: &CityGraph,
    weights: Option<&WeightedCityGraph>,
    title: &str,
) -> String {
    let (w, h) = (habitat.width(), habitat.height());
    let pos = |name: &str| {
        cities
            .position(name)
            .map(|i| (cities.cities[i].x as f64 + 0.5, cities.cities[i].y as f64 + 0.5))
    };
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {w} {}\">\n",
        w * 2,
        (h + 16) * 2,
        h + 16
    ));
    out.push_str(&format!(
        "<image x=\"0\" y=\"16\" width=\"{w}\" height=\"{h}\" style=\"image-rendering:pixelated\" href=\"data:image/png;base64,{}\"/>\n",
        png_base64(&map_image(habitat, None, &CitySet::new(Vec::new(), 0)))
    ));
    out.push_str(&format!(
        "<text x=\"2\" y=\"12\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
        xml_escape(title)
    ));
    out.push_str("<g transform=\"translate(0,16)\">\n");
    for e in graph.edges() {
        let (Some((x1, y1)), Some((x2, y2))) = (pos(e.a()), pos(e.b())) else {
            continue;
        };
        let wt = weights.and_then(|p| p.weight(e.a(), e.b()));
        let stroke = wt.map_or(1.5, |f| 0.5 + 2.5 * f.to_f64());
        out.push_str(&format!(
            "<line x1=\"{x1}\" y1=\"{y1}\" x2=\"{x2}\" y2=\"{y2}\" stroke=\"#1f4e99\" stroke-width=\"{stroke:.2}\"/>\n"
        ));
        if let Some(f) = wt {
            out.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"6\" fill=\"#1f4e99\">{f}</text>\n",
                (x1 + x2) / 2.0,
                (y1 + y2) / 2.0
            ));
        }
    }
    for c in &cities.cities {
        let (x, y) = (c.x as f64 + 0.5, c.y as f64 + 0.5);
        out.push_str(&format!(
            "<circle cx=\"{x}\" cy=\"{y}\" r=\"3\" fill=\"#c81e1e\"/>\n<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"8\">{}</text>\n",
            x + 4.0,
            y - 3.0,
            xml_escape(&c.name)
        ));
    }
    out.push_str("</g>\n</svg>\n");
    out
}
