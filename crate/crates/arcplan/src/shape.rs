//! Shape classification of pixel sets.

use serde::Serialize;

/// The shape attribute a node can take. Classification looks only at the
/// pixel set, so it is deterministic and order-independent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Shape {
    SinglePixel,
    Square,
    Rectangle,
    VerticalLine,
    HorizontalLine,
    /// A contiguous anti-diagonal: going down one row moves one column left.
    LeftDiagonalLine,
    /// A contiguous main diagonal: going down one row moves one column right.
    RightDiagonalLine,
    Unknown,
}

pub const ALL_SHAPES: [Shape; 8] = [
    Shape::SinglePixel,
    Shape::Square,
    Shape::Rectangle,
    Shape::VerticalLine,
    Shape::HorizontalLine,
    Shape::LeftDiagonalLine,
    Shape::RightDiagonalLine,
    Shape::Unknown,
];

impl Shape {
    pub fn name(self) -> &'static str {
        match self {
            Shape::SinglePixel => "single-pixel",
            Shape::Square => "square",
            Shape::Rectangle => "rectangle",
            Shape::VerticalLine => "vertical-line",
            Shape::HorizontalLine => "horizontal-line",
            Shape::LeftDiagonalLine => "left-diagonal-line",
            Shape::RightDiagonalLine => "right-diagonal-line",
            Shape::Unknown => "unknown",
        }
    }

    pub fn from_name(name: &str) -> Option<Shape> {
        ALL_SHAPES.iter().copied().find(|s| s.name() == name)
    }
}

pub fn bounding_box(pixels: &[(usize, usize)]) -> (usize, usize, usize, usize) {
    debug_assert!(!pixels.is_empty());
    let mut min_r = usize::MAX;
    let mut min_c = usize::MAX;
    let mut max_r = 0;
    let mut max_c = 0;
    for &(r, c) in pixels {
        min_r = min_r.min(r);
        min_c = min_c.min(c);
        max_r = max_r.max(r);
        max_c = max_c.max(c);
    }
    (min_r, min_c, max_r, max_c)
}

/// Classify a nonempty pixel set.
///
/// Rules, in priority order: a lone pixel; a fully filled bounding box of
/// side >= 2 (square when equal sides, rectangle otherwise); a fully filled
/// 1-wide or 1-tall box of length >= 2 (vertical/horizontal line); a
/// contiguous main or anti diagonal; otherwise unknown.
pub fn classify(pixels: &[(usize, usize)]) -> Shape {
    if pixels.len() == 1 {
        return Shape::SinglePixel;
    }
    let (min_r, min_c, max_r, max_c) = bounding_box(pixels);
    let h = max_r - min_r + 1;
    let w = max_c - min_c + 1;
    let full = pixels.len() == h * w;
    if full {
        if h >= 2 && w >= 2 {
            return if h == w { Shape::Square } else { Shape::Rectangle };
        }
        if w == 1 && h >= 2 {
            return Shape::VerticalLine;
        }
        if h == 1 && w >= 2 {
            return Shape::HorizontalLine;
        }
    }
    if h == w && pixels.len() == h {
        let main = (0..h).all(|i| pixels.contains(&(min_r + i, min_c + i)));
        if main {
            return Shape::RightDiagonalLine;
        }
        let anti = (0..h).all(|i| pixels.contains(&(min_r + i, max_c - i)));
        if anti {
            return Shape::LeftDiagonalLine;
        }
    }
    Shape::Unknown
}
