//! Relations between nodes: axis and diagonal spatial relations, color and
//! congruence pairs, containment, and the dominant relative position.
//!
//! Relations are recomputed from current pixel sets on demand, so action
//! effects are always reflected. They are undefined for the pixel and image
//! abstractions.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::abstraction::{AbstractGraph, AbstractionKind, Node};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum MDirection {
    Left,
    Right,
    Up,
    Down,
    LeftUp,
    LeftDown,
    RightUp,
    RightDown,
}

pub const ALL_MDIRECTIONS: [MDirection; 8] = [
    MDirection::Left,
    MDirection::Right,
    MDirection::Up,
    MDirection::Down,
    MDirection::LeftUp,
    MDirection::LeftDown,
    MDirection::RightUp,
    MDirection::RightDown,
];

impl MDirection {
    pub fn name(self) -> &'static str {
        match self {
            MDirection::Left => "left",
            MDirection::Right => "right",
            MDirection::Up => "up",
            MDirection::Down => "down",
            MDirection::LeftUp => "left-up",
            MDirection::LeftDown => "left-down",
            MDirection::RightUp => "right-up",
            MDirection::RightDown => "right-down",
        }
    }

    pub fn from_name(name: &str) -> Option<MDirection> {
        ALL_MDIRECTIONS.iter().copied().find(|d| d.name() == name)
    }

    pub fn opposite(self) -> MDirection {
        match self {
            MDirection::Left => MDirection::Right,
            MDirection::Right => MDirection::Left,
            MDirection::Up => MDirection::Down,
            MDirection::Down => MDirection::Up,
            MDirection::LeftUp => MDirection::RightDown,
            MDirection::RightDown => MDirection::LeftUp,
            MDirection::LeftDown => MDirection::RightUp,
            MDirection::RightUp => MDirection::LeftDown,
        }
    }

    /// Unit translation as (drow, dcol).
    pub fn delta(self) -> (isize, isize) {
        match self {
            MDirection::Left => (0, -1),
            MDirection::Right => (0, 1),
            MDirection::Up => (-1, 0),
            MDirection::Down => (1, 0),
            MDirection::LeftUp => (-1, -1),
            MDirection::LeftDown => (1, -1),
            MDirection::RightUp => (-1, 1),
            MDirection::RightDown => (1, 1),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RelationSet {
    /// (a, b, d): node a lies in direction d of node b.
    pub spatial: BTreeSet<(usize, usize, MDirection)>,
    pub diagonal: BTreeSet<(usize, usize)>,
    pub same_color: BTreeSet<(usize, usize)>,
    pub congruent: BTreeSet<(usize, usize)>,
    /// (a, b): a contains b.
    pub contains: BTreeSet<(usize, usize)>,
    pub partially_contains: BTreeSet<(usize, usize)>,
    /// (a, b, d): the dominant direction of a relative to b.
    pub relative_position: BTreeSet<(usize, usize, MDirection)>,
}

/// Occupancy mask of all active nodes, used for diagonal ray checks.
pub fn occupancy(nodes: &[Node], dims: (usize, usize)) -> Vec<bool> {
    let (h, w) = dims;
    let mut occ = vec![false; h * w];
    for node in nodes.iter().filter(|n| n.active) {
        for &(r, c, _) in &node.cells {
            occ[r * w + c] = true;
        }
    }
    occ
}

/// Axis directions in which `a` lies relative to `b`: left/right need a
/// shared row and disjoint column extents, up/down a shared column and
/// disjoint row extents.
pub fn axis_spatial(a: &Node, b: &Node) -> Vec<MDirection> {
    let mut dirs = Vec::new();
    let (a_min_r, a_min_c, a_max_r, a_max_c) = a.bbox();
    let (b_min_r, b_min_c, b_max_r, b_max_c) = b.bbox();
    let shares_row = a
        .cells
        .iter()
        .any(|&(r, _, _)| b.cells.iter().any(|&(br, _, _)| br == r));
    let shares_col = a
        .cells
        .iter()
        .any(|&(_, c, _)| b.cells.iter().any(|&(_, bc, _)| bc == c));
    if shares_row && a_max_c < b_min_c {
        dirs.push(MDirection::Left);
    }
    if shares_row && a_min_c > b_max_c {
        dirs.push(MDirection::Right);
    }
    if shares_col && a_max_r < b_min_r {
        dirs.push(MDirection::Up);
    }
    if shares_col && a_min_r > b_max_r {
        dirs.push(MDirection::Down);
    }
    dirs
}

fn ray_clear(
    from: (usize, usize),
    step: (isize, isize),
    len: usize,
    dims: (usize, usize),
    occupied: &[bool],
) -> bool {
    let (_, w) = dims;
    let (mut r, mut c) = (from.0 as isize, from.1 as isize);
    for _ in 1..len {
        r += step.0;
        c += step.1;
        if occupied[r as usize * w + c as usize] {
            return false;
        }
    }
    true
}

/// Diagonal directions in which `a` lies relative to `b`. Requires both
/// shapes known, bounding-box corners aligned on a shared diagonal axis and
/// an unobstructed ray between the aligned corners.
pub fn diagonal_spatial(
    a: &Node,
    b: &Node,
    dims: (usize, usize),
    occupied: &[bool],
) -> Vec<MDirection> {
    use crate::shape::Shape;
    if a.shape() == Shape::Unknown || b.shape() == Shape::Unknown {
        return Vec::new();
    }
    let (a_min_r, a_min_c, a_max_r, a_max_c) = a.bbox();
    let (b_min_r, b_min_c, b_max_r, b_max_c) = b.bbox();
    let mut dirs = Vec::new();
    // a below-right of b: b's bottom-right corner vs a's top-left corner.
    if b_max_r < a_min_r && b_max_c < a_min_c {
        let (gr, gc) = (a_min_r - b_max_r, a_min_c - b_max_c);
        if gr == gc && ray_clear((b_max_r, b_max_c), (1, 1), gr, dims, occupied) {
            dirs.push(MDirection::RightDown);
        }
    }
    // a below-left of b: b's bottom-left corner vs a's top-right corner.
    if b_max_r < a_min_r && a_max_c < b_min_c {
        let (gr, gc) = (a_min_r - b_max_r, b_min_c - a_max_c);
        if gr == gc && ray_clear((b_max_r, b_min_c), (1, -1), gr, dims, occupied) {
            dirs.push(MDirection::LeftDown);
        }
    }
    // a above-right of b: b's top-right corner vs a's bottom-left corner.
    if a_max_r < b_min_r && b_max_c < a_min_c {
        let (gr, gc) = (b_min_r - a_max_r, a_min_c - b_max_c);
        if gr == gc && ray_clear((b_min_r, b_max_c), (-1, 1), gr, dims, occupied) {
            dirs.push(MDirection::RightUp);
        }
    }
    // a above-left of b: b's top-left corner vs a's bottom-right corner.
    if a_max_r < b_min_r && a_max_c < b_min_c {
        let (gr, gc) = (b_min_r - a_max_r, b_min_c - a_max_c);
        if gr == gc && ray_clear((b_min_r, b_min_c), (-1, -1), gr, dims, occupied) {
            dirs.push(MDirection::LeftUp);
        }
    }
    dirs
}

/// All spatial directions of `a` relative to `b`, in canonical order.
pub fn spatial_dirs(
    a: &Node,
    b: &Node,
    dims: (usize, usize),
    occupied: &[bool],
) -> Vec<MDirection> {
    if a.id == b.id || !a.active || !b.active {
        return Vec::new();
    }
    let mut dirs = axis_spatial(a, b);
    dirs.extend(diagonal_spatial(a, b, dims, occupied));
    dirs.sort_by_key(|d| ALL_MDIRECTIONS.iter().position(|x| x == d).unwrap());
    dirs
}

pub fn same_color_pair(a: &Node, b: &Node) -> bool {
    a.id != b.id
        && a.active
        && b.active
        && a.color.is_some()
        && a.color == b.color
}

pub fn congruent_pair(a: &Node, b: &Node) -> bool {
    a.id != b.id && a.active && b.active && a.size() == b.size() && a.shape() == b.shape()
}

fn disjoint(a: &Node, b: &Node) -> bool {
    a.cells
        .iter()
        .all(|&(r, c, _)| !b.contains_pixel(r, c))
}

/// `a` contains `b`: all of b's pixels lie strictly inside a's bounding box
/// and on none of a's own pixels.
pub fn contains_pair(a: &Node, b: &Node) -> bool {
    if a.id == b.id || !a.active || !b.active || !disjoint(a, b) {
        return false;
    }
    let (min_r, min_c, max_r, max_c) = a.bbox();
    b.cells
        .iter()
        .all(|&(r, c, _)| r > min_r && r < max_r && c > min_c && c < max_c)
}

/// Partial containment: b sits inside a's bounding box (non-strictly) without
/// full containment, and b touches the image boundary.
pub fn partially_contains_pair(a: &Node, b: &Node, dims: (usize, usize)) -> bool {
    if a.id == b.id || !a.active || !b.active || !disjoint(a, b) {
        return false;
    }
    if contains_pair(a, b) {
        return false;
    }
    let (min_r, min_c, max_r, max_c) = a.bbox();
    let inside = b
        .cells
        .iter()
        .all(|&(r, c, _)| r >= min_r && r <= max_r && c >= min_c && c <= max_c);
    let (h, w) = dims;
    let touches = b
        .cells
        .iter()
        .any(|&(r, c, _)| r == 0 || c == 0 || r == h - 1 || c == w - 1);
    inside && touches
}

/// Dominant direction of `a` relative to `b`, from bounding-box centers
/// (doubled coordinates keep everything integral). Concentric pairs have no
/// relative position.
pub fn relative_position_dir(a: &Node, b: &Node) -> Option<MDirection> {
    if a.id == b.id || !a.active || !b.active {
        return None;
    }
    let (a_min_r, a_min_c, a_max_r, a_max_c) = a.bbox();
    let (b_min_r, b_min_c, b_max_r, b_max_c) = b.bbox();
    let dr = (a_min_r + a_max_r) as isize - (b_min_r + b_max_r) as isize;
    let dc = (a_min_c + a_max_c) as isize - (b_min_c + b_max_c) as isize;
    let dir = match (dr.signum(), dc.signum()) {
        (0, 0) => return None,
        (0, -1) => MDirection::Left,
        (0, 1) => MDirection::Right,
        (-1, 0) => MDirection::Up,
        (1, 0) => MDirection::Down,
        (-1, -1) => MDirection::LeftUp,
        (1, -1) => MDirection::LeftDown,
        (-1, 1) => MDirection::RightUp,
        (1, 1) => MDirection::RightDown,
        _ => unreachable!(),
    };
    Some(dir)
}

/// Compute the full relation set of a graph over its active nodes.
pub fn compute_relations(graph: &AbstractGraph) -> Result<RelationSet> {
    if matches!(graph.kind, AbstractionKind::Pixels | AbstractionKind::Image) {
        return Err(Error::UnsupportedAbstraction(graph.kind));
    }
    let occ = occupancy(&graph.nodes, graph.dims);
    let mut set = RelationSet::default();
    for a in graph.active_nodes() {
        for b in graph.active_nodes() {
            if a.id == b.id {
                continue;
            }
            for d in spatial_dirs(a, b, graph.dims, &occ) {
                set.spatial.insert((a.id, b.id, d));
                if !matches!(
                    d,
                    MDirection::Left | MDirection::Right | MDirection::Up | MDirection::Down
                ) {
                    set.diagonal.insert((a.id, b.id));
                }
            }
            if same_color_pair(a, b) {
                set.same_color.insert((a.id, b.id));
            }
            if congruent_pair(a, b) {
                set.congruent.insert((a.id, b.id));
            }
            if contains_pair(a, b) {
                set.contains.insert((a.id, b.id));
            }
            if partially_contains_pair(a, b, graph.dims) {
                set.partially_contains.insert((a.id, b.id));
            }
            if let Some(d) = relative_position_dir(a, b) {
                set.relative_position.insert((a.id, b.id, d));
            }
        }
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abstraction::abstract_grid;
    use crate::arc_io::Grid;

    fn grid(rows: &[&[u8]]) -> Grid {
        Grid::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn left_right_pair() {
        // A strictly left of B on a shared row.
        let g = grid(&[&[1, 0, 0, 2], &[0, 0, 0, 0]]);
        let graph = abstract_grid(&g, AbstractionKind::Cc4);
        let rel = compute_relations(&graph).unwrap();
        assert!(rel.spatial.contains(&(0, 1, MDirection::Left)));
        assert!(rel.spatial.contains(&(1, 0, MDirection::Right)));
        assert!(!rel.spatial.contains(&(0, 1, MDirection::Right)));
    }

    #[test]
    fn single_node_has_no_relations() {
        let g = grid(&[&[0, 0], &[0, 3]]);
        let graph = abstract_grid(&g, AbstractionKind::Cc4);
        let rel = compute_relations(&graph).unwrap();
        assert!(rel.congruent.is_empty());
        assert!(rel.spatial.is_empty());
        assert!(rel.same_color.is_empty());
    }

    #[test]
    fn diagonal_alignment_and_blocked_ray() {
        let g = grid(&[
            &[1, 0, 0, 0],
            &[0, 0, 0, 0],
            &[0, 0, 2, 2],
            &[0, 0, 2, 2],
        ]);
        let graph = abstract_grid(&g, AbstractionKind::Cc4);
        let rel = compute_relations(&graph).unwrap();
        assert!(rel.spatial.contains(&(0, 1, MDirection::LeftUp)));
        assert!(rel.spatial.contains(&(1, 0, MDirection::RightDown)));
        assert!(rel.diagonal.contains(&(0, 1)));

        // Same layout with a blocker on the ray.
        let g = grid(&[
            &[1, 0, 0, 0],
            &[0, 4, 0, 0],
            &[0, 0, 2, 2],
            &[0, 0, 2, 2],
        ]);
        let graph = abstract_grid(&g, AbstractionKind::Cc4);
        let rel = compute_relations(&graph).unwrap();
        assert!(!rel.diagonal.contains(&(0, 2)));
    }

    #[test]
    fn containment_strict_and_partial() {
        // Ring of 3s containing a dot of 5.
        let g = grid(&[
            &[3, 3, 3, 0],
            &[3, 5, 3, 0],
            &[3, 3, 3, 0],
            &[0, 0, 0, 0],
        ]);
        let graph = abstract_grid(&g, AbstractionKind::Cc4);
        let rel = compute_relations(&graph).unwrap();
        let ring = graph.nodes.iter().find(|n| n.color == Some(3)).unwrap().id;
        let dot = graph.nodes.iter().find(|n| n.color == Some(5)).unwrap().id;
        assert!(rel.contains.contains(&(ring, dot)));
        assert!(!rel.contains.contains(&(dot, ring)));
        assert!(!rel.partially_contains.contains(&(ring, dot)));

        // U-shape open to the top border; the dot touches the border.
        let g = grid(&[
            &[3, 5, 3, 0],
            &[3, 3, 3, 0],
            &[0, 0, 0, 0],
        ]);
        let graph = abstract_grid(&g, AbstractionKind::Cc4);
        let rel = compute_relations(&graph).unwrap();
        let ring = graph.nodes.iter().find(|n| n.color == Some(3)).unwrap().id;
        let dot = graph.nodes.iter().find(|n| n.color == Some(5)).unwrap().id;
        assert!(rel.partially_contains.contains(&(ring, dot)));
        assert!(!rel.contains.contains(&(ring, dot)));
    }

    #[test]
    fn congruent_and_same_color() {
        let g = grid(&[&[2, 0, 4], &[0, 0, 0], &[2, 0, 0]]);
        let graph = abstract_grid(&g, AbstractionKind::Cc4);
        let rel = compute_relations(&graph).unwrap();
        // all three are single pixels: congruent pairwise
        assert_eq!(rel.congruent.len(), 6);
        // the two 2s share a color
        assert_eq!(rel.same_color.len(), 2);
    }

    #[test]
    fn relative_position_is_dominant_direction() {
        let g = grid(&[&[1, 0, 0], &[0, 0, 0], &[0, 0, 2]]);
        let graph = abstract_grid(&g, AbstractionKind::Cc4);
        let rel = compute_relations(&graph).unwrap();
        assert!(rel.relative_position.contains(&(0, 1, MDirection::LeftUp)));
        assert!(rel.relative_position.contains(&(1, 0, MDirection::RightDown)));
    }

    #[test]
    fn spatial_axis_symmetry() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..40 {
            let cells: Vec<u8> = (0..49).map(|_| if rng.gen_bool(0.2) { rng.gen_range(1..5) } else { 0 }).collect();
            let g = Grid::new(7, 7, cells).unwrap();
            let graph = abstract_grid(&g, AbstractionKind::Cc4);
            let rel = compute_relations(&graph).unwrap();
            for &(a, b, d) in &rel.spatial {
                assert!(
                    rel.spatial.contains(&(b, a, d.opposite())),
                    "spatial({a},{b},{d:?}) lacks its mirror"
                );
            }
        }
    }

    #[test]
    fn pixels_and_image_are_unsupported() {
        let g = grid(&[&[1]]);
        for kind in [AbstractionKind::Pixels, AbstractionKind::Image] {
            let graph = abstract_grid(&g, kind);
            assert!(matches!(
                compute_relations(&graph),
                Err(crate::Error::UnsupportedAbstraction(_))
            ));
        }
    }
}
