//! Color-fill rendering of a sheet and recovery of cell boxes from it.

use std::collections::VecDeque;
use std::io::Cursor;

use image::{ImageFormat, Rgb as Pixel, RgbImage};

use crate::geom::BBox;

use super::color::{ColorMap, Rgb, BACKGROUND};
use super::geometry::Geometry;
use super::WeakSupError;

/// Fills each logical cell with its color. No borders, no text.
///
/// Cells missing from `colors` are left white.
pub fn render_color_raster(geometry: &Geometry, colors: &ColorMap) -> RgbImage {
    let mut img = RgbImage::from_pixel(geometry.width(), geometry.height(), Pixel(BACKGROUND));
    for (anchor, bbox) in &geometry.cells {
        let Some(rgb) = colors.rgb(*anchor) else {
            continue;
        };
        for y in bbox.y..bbox.bottom() {
            for x in bbox.x..bbox.right() {
                img.put_pixel(x, y, Pixel(rgb));
            }
        }
    }
    img
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Region {
    pub rgb: Rgb,
    pub bbox: BBox,
}

/// Finds the 4-connected components of every non-background color.
///
/// Regions are reported in the row-major order of their top-left pixel.
/// Every region must fill its bounding box exactly.
pub fn recover_regions(img: &RgbImage) -> Result<Vec<Region>, WeakSupError> {
    let (w, h) = img.dimensions();
    let mut seen = vec![false; w as usize * h as usize];
    let idx = |x: u32, y: u32| (y as usize) * (w as usize) + x as usize;
    let mut regions = Vec::new();
    let mut queue = VecDeque::new();

    for y0 in 0..h {
        for x0 in 0..w {
            if seen[idx(x0, y0)] {
                continue;
            }
            let rgb = img.get_pixel(x0, y0).0;
            if rgb == BACKGROUND {
                continue;
            }
            seen[idx(x0, y0)] = true;
            queue.push_back((x0, y0));
            let (mut x_min, mut y_min, mut x_max, mut y_max) = (x0, y0, x0, y0);
            let mut pixels: u64 = 0;
            while let Some((x, y)) = queue.pop_front() {
                pixels += 1;
                x_min = x_min.min(x);
                x_max = x_max.max(x);
                y_min = y_min.min(y);
                y_max = y_max.max(y);
                let neighbors = [
                    (x.wrapping_sub(1), y),
                    (x + 1, y),
                    (x, y.wrapping_sub(1)),
                    (x, y + 1),
                ];
                for (nx, ny) in neighbors {
                    if nx < w && ny < h && !seen[idx(nx, ny)] && img.get_pixel(nx, ny).0 == rgb {
                        seen[idx(nx, ny)] = true;
                        queue.push_back((nx, ny));
                    }
                }
            }
            let bbox = BBox::from_edges(x_min, y_min, x_max + 1, y_max + 1).expect("non-empty");
            if pixels != bbox.area() {
                return Err(WeakSupError::NonRectangularRegion { rgb, bbox, pixels });
            }
            regions.push(Region { rgb, bbox });
        }
    }
    Ok(regions)
}

/// Lossless PNG encoding of a raster.
pub fn encode_png(img: &RgbImage) -> Vec<u8> {
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png)
        .expect("in-memory PNG encoding");
    out.into_inner()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weaksup::color::{assign_colors, PALETTE};
    use crate::weaksup::geometry::compute_geometry;
    use crate::weaksup::sheet::Sheet;

    #[test]
    fn single_cell_is_solid() {
        let s = Sheet::new(1, 1);
        let g = compute_geometry(&s, 96.0).unwrap();
        let img = render_color_raster(&g, &assign_colors(&s).unwrap());
        assert_eq!(img.dimensions(), (64, 20));
        assert!(img.pixels().all(|p| p.0 == PALETTE[0]));
    }

    #[test]
    fn two_rows_stack_at_exact_boundary() {
        let s = Sheet::new(2, 1);
        let g = compute_geometry(&s, 96.0).unwrap();
        let img = render_color_raster(&g, &assign_colors(&s).unwrap());
        assert_eq!(img.dimensions(), (64, 40));
        assert_eq!(img.get_pixel(10, 19).0, PALETTE[0]);
        assert_eq!(img.get_pixel(10, 20).0, PALETTE[1]);
    }

    #[test]
    fn blank_image_has_no_regions() {
        let img = RgbImage::from_pixel(8, 8, Pixel(BACKGROUND));
        assert!(recover_regions(&img).unwrap().is_empty());
    }

    #[test]
    fn l_shape_is_rejected() {
        let mut img = RgbImage::from_pixel(6, 6, Pixel(BACKGROUND));
        for y in 0..4 {
            img.put_pixel(1, y, Pixel(PALETTE[2]));
        }
        for x in 1..4 {
            img.put_pixel(x, 3, Pixel(PALETTE[2]));
        }
        let err = recover_regions(&img).unwrap_err();
        assert_eq!(
            err,
            WeakSupError::NonRectangularRegion {
                rgb: PALETTE[2],
                bbox: BBox::new(1, 0, 3, 4).unwrap(),
                pixels: 6
            }
        );
    }

    #[test]
    fn diagonal_touch_is_two_regions() {
        let mut img = RgbImage::from_pixel(2, 2, Pixel(BACKGROUND));
        img.put_pixel(0, 0, Pixel(PALETTE[0]));
        img.put_pixel(1, 1, Pixel(PALETTE[0]));
        assert_eq!(recover_regions(&img).unwrap().len(), 2);
    }

    #[test]
    fn png_is_lossless() {
        let s = Sheet::new(3, 2);
        let g = compute_geometry(&s, 96.0).unwrap();
        let img = render_color_raster(&g, &assign_colors(&s).unwrap());
        let back = image::load_from_memory(&encode_png(&img))
            .unwrap()
            .to_rgb8();
        assert_eq!(back, img);
    }
}
