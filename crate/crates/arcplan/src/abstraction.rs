//! Grid abstractions: segmenting a grid into nodes and computing node flags.
//!
//! Each [`AbstractionKind`] is a rule for carving a grid into pixel-set nodes.
//! Kinds are declared in scheduling order, cheapest interpretation first; the
//! spatial/congruent variants share node definitions with cc4/cc8 and differ
//! only in which predicates and action schemes their domains expose.

use std::collections::VecDeque;

use serde::Serialize;

use crate::arc_io::{Color, Grid};
use crate::shape::{self, Shape};
use crate::Task;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum AbstractionKind {
    Pixels,
    Image,
    Cc4,
    Cc4Black,
    Cc4All,
    Cc8,
    Cc8Black,
    Cc8All,
    SameColor,
    MultiColor4,
    MultiColor8,
    Vertical,
    Horizontal,
    MaxRect,
    BgRect,
    Cc4Spatial,
    Cc8Spatial,
    Cc4Congruent,
    Cc8Congruent,
}

pub const ALL_KINDS: [AbstractionKind; 19] = [
    AbstractionKind::Pixels,
    AbstractionKind::Image,
    AbstractionKind::Cc4,
    AbstractionKind::Cc4Black,
    AbstractionKind::Cc4All,
    AbstractionKind::Cc8,
    AbstractionKind::Cc8Black,
    AbstractionKind::Cc8All,
    AbstractionKind::SameColor,
    AbstractionKind::MultiColor4,
    AbstractionKind::MultiColor8,
    AbstractionKind::Vertical,
    AbstractionKind::Horizontal,
    AbstractionKind::MaxRect,
    AbstractionKind::BgRect,
    AbstractionKind::Cc4Spatial,
    AbstractionKind::Cc8Spatial,
    AbstractionKind::Cc4Congruent,
    AbstractionKind::Cc8Congruent,
];

/// Catalog family; duplicate removal compares abstractions within a family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Plain,
    Spatial,
    Congruent,
}

impl AbstractionKind {
    pub fn name(self) -> &'static str {
        match self {
            AbstractionKind::Pixels => "pixels",
            AbstractionKind::Image => "image",
            AbstractionKind::Cc4 => "cc4",
            AbstractionKind::Cc4Black => "cc4-b",
            AbstractionKind::Cc4All => "cc4-all",
            AbstractionKind::Cc8 => "cc8",
            AbstractionKind::Cc8Black => "cc8-b",
            AbstractionKind::Cc8All => "cc8-all",
            AbstractionKind::SameColor => "same-color",
            AbstractionKind::MultiColor4 => "multi-color-4",
            AbstractionKind::MultiColor8 => "multi-color-8",
            AbstractionKind::Vertical => "vertical",
            AbstractionKind::Horizontal => "horizontal",
            AbstractionKind::MaxRect => "max-rect",
            AbstractionKind::BgRect => "bg-rect",
            AbstractionKind::Cc4Spatial => "cc4-spa",
            AbstractionKind::Cc8Spatial => "cc8-spa",
            AbstractionKind::Cc4Congruent => "cc4-con",
            AbstractionKind::Cc8Congruent => "cc8-con",
        }
    }

    pub fn from_name(name: &str) -> Option<AbstractionKind> {
        ALL_KINDS.iter().copied().find(|k| k.name() == name)
    }

    pub fn family(self) -> Family {
        match self {
            AbstractionKind::Cc4Spatial | AbstractionKind::Cc8Spatial => Family::Spatial,
            AbstractionKind::Cc4Congruent | AbstractionKind::Cc8Congruent => Family::Congruent,
            _ => Family::Plain,
        }
    }

    /// Nodes of the spatial/congruent variants are those of cc4/cc8.
    pub fn node_source(self) -> AbstractionKind {
        match self {
            AbstractionKind::Cc4Spatial | AbstractionKind::Cc4Congruent => AbstractionKind::Cc4,
            AbstractionKind::Cc8Spatial | AbstractionKind::Cc8Congruent => AbstractionKind::Cc8,
            other => other,
        }
    }

    /// Nodes carry no single color under these kinds.
    pub fn multi_colored(self) -> bool {
        matches!(
            self,
            AbstractionKind::MultiColor4 | AbstractionKind::MultiColor8 | AbstractionKind::Image
        )
    }
}

/// A node: a set of colored cells with a stable id. `color` is the uniform
/// node color, absent for multi-colored node definitions. Deleted nodes stay
/// in the graph with `active` cleared so ids keep their meaning.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Node {
    pub id: usize,
    pub cells: Vec<(usize, usize, Color)>,
    pub color: Option<Color>,
    pub active: bool,
}

impl Node {
    pub fn new(id: usize, cells: Vec<(usize, usize, Color)>, color: Option<Color>) -> Self {
        Node { id, cells, color, active: true }
    }

    pub fn size(&self) -> usize {
        self.cells.len()
    }

    pub fn pixels(&self) -> Vec<(usize, usize)> {
        self.cells.iter().map(|&(r, c, _)| (r, c)).collect()
    }

    pub fn contains_pixel(&self, r: usize, c: usize) -> bool {
        self.cells.iter().any(|&(pr, pc, _)| pr == r && pc == c)
    }

    pub fn bbox(&self) -> (usize, usize, usize, usize) {
        shape::bounding_box(&self.pixels())
    }

    pub fn shape(&self) -> Shape {
        shape::classify(&self.pixels())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbstractGraph {
    pub kind: AbstractionKind,
    pub background: Color,
    pub dims: (usize, usize),
    pub nodes: Vec<Node>,
}

impl AbstractGraph {
    pub fn active_nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.active)
    }
}

/// Background color: black when black occurs anywhere, otherwise the most
/// frequent color, smallest index on ties.
pub fn background_of(grid: &Grid) -> Color {
    let mut counts = [0usize; 10];
    for (_, _, c) in grid.iter_cells() {
        counts[c as usize] += 1;
    }
    if counts[0] > 0 {
        return 0;
    }
    let mut best = 0u8;
    let mut best_count = 0usize;
    for (color, &count) in counts.iter().enumerate() {
        if count > best_count {
            best_count = count;
            best = color as u8;
        }
    }
    best
}

fn neighbors(conn: u8) -> &'static [(isize, isize)] {
    match conn {
        4 => &[(-1, 0), (1, 0), (0, -1), (0, 1)],
        _ => &[
            (-1, 0),
            (1, 0),
            (0, -1),
            (0, 1),
            (-1, -1),
            (-1, 1),
            (1, -1),
            (1, 1),
        ],
    }
}

/// Connected components over cells passing `eligible`, raster discovery
/// order. `color_blind` groups any eligible neighbors; otherwise neighbors
/// must share the seed color.
fn components(
    grid: &Grid,
    conn: u8,
    eligible: &dyn Fn(Color) -> bool,
    color_blind: bool,
) -> Vec<Vec<(usize, usize)>> {
    let (h, w) = grid.dims();
    let mut seen = vec![false; h * w];
    let mut out = Vec::new();
    for r0 in 0..h {
        for c0 in 0..w {
            if seen[r0 * w + c0] || !eligible(grid.get(r0, c0)) {
                continue;
            }
            let seed_color = grid.get(r0, c0);
            let mut comp = Vec::new();
            let mut queue = VecDeque::new();
            seen[r0 * w + c0] = true;
            queue.push_back((r0, c0));
            while let Some((r, c)) = queue.pop_front() {
                comp.push((r, c));
                for &(dr, dc) in neighbors(conn) {
                    let (nr, nc) = (r as isize + dr, c as isize + dc);
                    if nr < 0 || nc < 0 || nr as usize >= h || nc as usize >= w {
                        continue;
                    }
                    let (nr, nc) = (nr as usize, nc as usize);
                    if seen[nr * w + nc] {
                        continue;
                    }
                    let ncolor = grid.get(nr, nc);
                    if !eligible(ncolor) {
                        continue;
                    }
                    if !color_blind && ncolor != seed_color {
                        continue;
                    }
                    seen[nr * w + nc] = true;
                    queue.push_back((nr, nc));
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
    }
    out
}

/// Background regions: 4-connected background-colored components that reach
/// an image boundary.
fn background_regions(grid: &Grid, background: Color) -> Vec<Vec<(usize, usize)>> {
    let (h, w) = grid.dims();
    components(grid, 4, &|c| c == background, false)
        .into_iter()
        .filter(|comp| {
            comp.iter()
                .any(|&(r, c)| r == 0 || c == 0 || r == h - 1 || c == w - 1)
        })
        .collect()
}

/// Largest axis-aligned rectangle fully inside `cells`, by the row-histogram
/// method. Ties prefer the topmost, then leftmost, top-left corner. Returns
/// (top, left, bottom, right) inclusive.
pub fn max_inscribed_rectangle(cells: &[(usize, usize)]) -> (usize, usize, usize, usize) {
    debug_assert!(!cells.is_empty());
    let (min_r, min_c, max_r, max_c) = shape::bounding_box(cells);
    let h = max_r - min_r + 1;
    let w = max_c - min_c + 1;
    let mut mask = vec![false; h * w];
    for &(r, c) in cells {
        mask[(r - min_r) * w + (c - min_c)] = true;
    }
    let mut heights = vec![0usize; w];
    let mut best = (0usize, 0usize, 0usize, 0usize, 0usize); // area, top, left, bottom, right
    for r in 0..h {
        for c in 0..w {
            heights[c] = if mask[r * w + c] { heights[c] + 1 } else { 0 };
        }
        // Largest rectangle in histogram with a monotonic stack.
        let mut stack: Vec<usize> = Vec::new();
        for c in 0..=w {
            let cur = if c < w { heights[c] } else { 0 };
            while let Some(&top) = stack.last() {
                if heights[top] < cur {
                    break;
                }
                stack.pop();
                let height = heights[top];
                if height == 0 {
                    continue;
                }
                let left = stack.last().map_or(0, |&i| i + 1);
                let area = height * (c - left);
                let cand = (area, r + 1 - height, left, r, c - 1);
                if area > best.0
                    || (area == best.0 && (cand.1, cand.2) < (best.1, best.2) && area > 0)
                {
                    best = cand;
                }
            }
            stack.push(c);
        }
    }
    (
        best.1 + min_r,
        best.2 + min_c,
        best.3 + min_r,
        best.4 + min_c,
    )
}

fn rect_and_remainder(grid: &Grid, comp: &[(usize, usize)]) -> Vec<Vec<(usize, usize)>> {
    let (top, left, bottom, right) = max_inscribed_rectangle(comp);
    let mut rect = Vec::new();
    for r in top..=bottom {
        for c in left..=right {
            rect.push((r, c));
        }
    }
    let rest: Vec<(usize, usize)> = comp
        .iter()
        .copied()
        .filter(|&(r, c)| !(r >= top && r <= bottom && c >= left && c <= right))
        .collect();
    let mut parts = vec![rect];
    parts.extend(split_components(grid.dims(), &rest, 4));
    parts
}

/// 4/8-connected components of an explicit cell set.
fn split_components(
    dims: (usize, usize),
    cells: &[(usize, usize)],
    conn: u8,
) -> Vec<Vec<(usize, usize)>> {
    let (h, w) = dims;
    let mut in_set = vec![false; h * w];
    for &(r, c) in cells {
        in_set[r * w + c] = true;
    }
    let mut seen = vec![false; h * w];
    let mut out = Vec::new();
    let mut sorted = cells.to_vec();
    sorted.sort_unstable();
    for &(r0, c0) in &sorted {
        if seen[r0 * w + c0] {
            continue;
        }
        let mut comp = Vec::new();
        let mut queue = VecDeque::new();
        seen[r0 * w + c0] = true;
        queue.push_back((r0, c0));
        while let Some((r, c)) = queue.pop_front() {
            comp.push((r, c));
            for &(dr, dc) in neighbors(conn) {
                let (nr, nc) = (r as isize + dr, c as isize + dc);
                if nr < 0 || nc < 0 || nr as usize >= h || nc as usize >= w {
                    continue;
                }
                let (nr, nc) = (nr as usize, nc as usize);
                if !seen[nr * w + nc] && in_set[nr * w + nc] {
                    seen[nr * w + nc] = true;
                    queue.push_back((nr, nc));
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

fn pixel_sets_to_nodes(grid: &Grid, kind: AbstractionKind, sets: Vec<Vec<(usize, usize)>>) -> Vec<Node> {
    let mut sets = sets;
    sets.sort_by_key(|s| s.first().copied().unwrap_or((usize::MAX, usize::MAX)));
    sets.into_iter()
        .enumerate()
        .map(|(id, set)| {
            let cells: Vec<(usize, usize, Color)> =
                set.iter().map(|&(r, c)| (r, c, grid.get(r, c))).collect();
            let color = if kind.multi_colored() {
                None
            } else {
                let first = cells[0].2;
                debug_assert!(cells.iter().all(|&(_, _, col)| col == first));
                Some(first)
            };
            Node::new(id, cells, color)
        })
        .collect()
}

/// Segment a grid under the given abstraction.
pub fn abstract_grid(grid: &Grid, kind: AbstractionKind) -> AbstractGraph {
    let background = background_of(grid);
    let (h, w) = grid.dims();
    let sets: Vec<Vec<(usize, usize)>> = match kind.node_source() {
        AbstractionKind::Pixels => grid.iter_cells().map(|(r, c, _)| vec![(r, c)]).collect(),
        AbstractionKind::Image => {
            vec![grid.iter_cells().map(|(r, c, _)| (r, c)).collect()]
        }
        AbstractionKind::Cc4 => components(grid, 4, &|c| c != background, false),
        AbstractionKind::Cc8 => components(grid, 8, &|c| c != background, false),
        AbstractionKind::Cc4Black => components(grid, 4, &|c| c != 0, false),
        AbstractionKind::Cc8Black => components(grid, 8, &|c| c != 0, false),
        AbstractionKind::Cc4All => components(grid, 4, &|_| true, false),
        AbstractionKind::Cc8All => components(grid, 8, &|_| true, false),
        AbstractionKind::SameColor => {
            let mut per_color: Vec<Vec<(usize, usize)>> = Vec::new();
            let mut slot = [usize::MAX; 10];
            for (r, c, color) in grid.iter_cells() {
                if color == background {
                    continue;
                }
                if slot[color as usize] == usize::MAX {
                    slot[color as usize] = per_color.len();
                    per_color.push(Vec::new());
                }
                per_color[slot[color as usize]].push((r, c));
            }
            per_color
        }
        AbstractionKind::MultiColor4 => components(grid, 4, &|c| c != background, true),
        AbstractionKind::MultiColor8 => components(grid, 8, &|c| c != background, true),
        AbstractionKind::Vertical => {
            let mut runs = Vec::new();
            for c in 0..w {
                let mut r = 0;
                while r < h {
                    let color = grid.get(r, c);
                    if color == background {
                        r += 1;
                        continue;
                    }
                    let start = r;
                    while r < h && grid.get(r, c) == color {
                        r += 1;
                    }
                    runs.push((start..r).map(|rr| (rr, c)).collect());
                }
            }
            runs
        }
        AbstractionKind::Horizontal => {
            let mut runs = Vec::new();
            for r in 0..h {
                let mut c = 0;
                while c < w {
                    let color = grid.get(r, c);
                    if color == background {
                        c += 1;
                        continue;
                    }
                    let start = c;
                    while c < w && grid.get(r, c) == color {
                        c += 1;
                    }
                    runs.push((start..c).map(|cc| (r, cc)).collect());
                }
            }
            runs
        }
        AbstractionKind::MaxRect => {
            let mut sets = Vec::new();
            for comp in components(grid, 4, &|c| c != background, false) {
                sets.extend(rect_and_remainder(grid, &comp));
            }
            for region in background_regions(grid, background) {
                sets.extend(rect_and_remainder(grid, &region));
            }
            sets
        }
        AbstractionKind::BgRect => {
            let mut sets = Vec::new();
            for region in background_regions(grid, background) {
                sets.extend(rect_and_remainder(grid, &region));
            }
            sets
        }
        other => unreachable!("node_source resolved to {other:?}"),
    };
    let nodes = pixel_sets_to_nodes(grid, kind, sets);
    AbstractGraph { kind, background, dims: (h, w), nodes }
}

/// Per-node boolean flags plus the grid-level most/least frequent color.
/// Indexed parallel to the node slice; inactive nodes get all-false flags.
#[derive(Debug, Clone, Default, Serialize)]
pub struct GraphFlags {
    pub size_max: Vec<bool>,
    pub size_min: Vec<bool>,
    pub odd: Vec<bool>,
    pub even: Vec<bool>,
    pub color_max: Vec<bool>,
    pub color_min: Vec<bool>,
    pub up_border: Vec<bool>,
    pub down_border: Vec<bool>,
    pub left_border: Vec<bool>,
    pub right_border: Vec<bool>,
    pub left_diagonal: Vec<bool>,
    pub right_diagonal: Vec<bool>,
    pub horizontal_middle: Vec<bool>,
    pub vertical_middle: Vec<bool>,
    pub denoising: Vec<bool>,
    pub color_most: Option<Color>,
    pub color_least: Option<Color>,
}

/// Flags are recomputed from the current node set and rendered grid so that
/// action effects are reflected. Color frequency counts rendered cells that
/// are not the background color; ties go to the smallest color index.
pub fn compute_flags(
    nodes: &[Node],
    dims: (usize, usize),
    background: Color,
    rendered: &Grid,
) -> GraphFlags {
    let n = nodes.len();
    let mut flags = GraphFlags {
        size_max: vec![false; n],
        size_min: vec![false; n],
        odd: vec![false; n],
        even: vec![false; n],
        color_max: vec![false; n],
        color_min: vec![false; n],
        up_border: vec![false; n],
        down_border: vec![false; n],
        left_border: vec![false; n],
        right_border: vec![false; n],
        left_diagonal: vec![false; n],
        right_diagonal: vec![false; n],
        horizontal_middle: vec![false; n],
        vertical_middle: vec![false; n],
        denoising: vec![false; n],
        color_most: None,
        color_least: None,
    };

    let mut counts = [0usize; 10];
    for (_, _, c) in rendered.iter_cells() {
        if c != background {
            counts[c as usize] += 1;
        }
    }
    let mut most: Option<(Color, usize)> = None;
    let mut least: Option<(Color, usize)> = None;
    for color in 0..10u8 {
        let count = counts[color as usize];
        if count == 0 {
            continue;
        }
        if most.map_or(true, |(_, n)| count > n) {
            most = Some((color, count));
        }
        if least.map_or(true, |(_, n)| count < n) {
            least = Some((color, count));
        }
    }
    flags.color_most = most.map(|(c, _)| c);
    flags.color_least = least.map(|(c, _)| c);

    let sizes: Vec<Option<usize>> = nodes
        .iter()
        .map(|n| n.active.then_some(n.size()))
        .collect();
    let max_size = sizes.iter().flatten().max().copied();
    let min_size = sizes.iter().flatten().min().copied();

    // Noise detection: 1-pixel 4-connected non-background components of the
    // rendered grid.
    let (h, w) = dims;
    let lone: Vec<bool> = {
        let comps = components(rendered, 4, &|c| c != background, false);
        let mut lone = vec![false; h * w];
        for comp in comps {
            if comp.len() == 1 {
                let (r, c) = comp[0];
                lone[r * w + c] = true;
            }
        }
        lone
    };

    for (i, node) in nodes.iter().enumerate() {
        if !node.active {
            continue;
        }
        let size = node.size();
        flags.size_max[i] = Some(size) == max_size;
        flags.size_min[i] = Some(size) == min_size;
        flags.odd[i] = size % 2 == 1;
        flags.even[i] = size % 2 == 0;
        if let Some(color) = node.color {
            flags.color_max[i] = flags.color_most == Some(color);
            flags.color_min[i] = flags.color_least == Some(color);
        }
        for &(r, c, _) in &node.cells {
            if r == 0 {
                flags.up_border[i] = true;
            }
            if r == h - 1 {
                flags.down_border[i] = true;
            }
            if c == 0 {
                flags.left_border[i] = true;
            }
            if c == w - 1 {
                flags.right_border[i] = true;
            }
            if r + c == w - 1 {
                flags.left_diagonal[i] = true;
            }
            if r == c {
                flags.right_diagonal[i] = true;
            }
            if r == (h - 1) / 2 || r == h / 2 {
                flags.horizontal_middle[i] = true;
            }
            if c == (w - 1) / 2 || c == w / 2 {
                flags.vertical_middle[i] = true;
            }
        }
        if node.cells.len() == 1 {
            let (r, c, color) = node.cells[0];
            flags.denoising[i] = color != background && lone[r * w + c];
        }
    }
    flags
}

type NodeSignature = Vec<(usize, Option<Color>, Shape)>;

fn signature(graph: &AbstractGraph) -> NodeSignature {
    let mut sig: NodeSignature = graph
        .active_nodes()
        .map(|n| (n.size(), n.color, n.shape()))
        .collect();
    sig.sort();
    sig
}

/// Drop abstractions whose node representation matches an earlier-kept kind
/// of the same family on every training input, keeping input order.
pub fn dedupe_abstractions(task: &Task, kinds: &[AbstractionKind]) -> Vec<AbstractionKind> {
    let mut kept: Vec<(AbstractionKind, Vec<NodeSignature>)> = Vec::new();
    for &kind in kinds {
        let sigs: Vec<NodeSignature> = task
            .train
            .iter()
            .map(|pair| signature(&abstract_grid(&pair.input, kind)))
            .collect();
        let duplicate = kept.iter().any(|(prev, prev_sigs)| {
            prev.family() == kind.family() && *prev_sigs == sigs
        });
        if !duplicate {
            kept.push((kind, sigs));
        }
    }
    kept.into_iter().map(|(k, _)| k).collect()
}
