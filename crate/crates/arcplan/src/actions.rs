//! External-function semantics of the action schemes: preconditions, effects
//! and predicate interpretation over an [`AbstractState`].

use crate::arc_io::Color;
use crate::domain::{FDirection, ObjectVal, PredicateId, Rotation, SchemeId, StepKind};
use crate::relations::{self, MDirection};
use crate::shape::Shape;
use crate::state::AbstractState;

/// A scheme with every parameter bound to a concrete object.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroundAction {
    pub scheme: SchemeId,
    pub args: Vec<ObjectVal>,
}

type Cells = Vec<(usize, usize, Color)>;

fn node_arg(action: &GroundAction, i: usize) -> usize {
    match action.args[i] {
        ObjectVal::Node(n) => n,
        other => panic!("expected node argument, got {other:?}"),
    }
}

fn color_arg(action: &GroundAction, i: usize) -> Color {
    match action.args[i] {
        ObjectVal::Color(c) => c,
        other => panic!("expected color argument, got {other:?}"),
    }
}

fn translate(
    cells: &[(usize, usize, Color)],
    dims: (usize, usize),
    dir: (isize, isize),
    k: isize,
) -> Option<Cells> {
    let (h, w) = dims;
    cells
        .iter()
        .map(|&(r, c, color)| {
            let nr = r as isize + dir.0 * k;
            let nc = c as isize + dir.1 * k;
            if nr < 0 || nc < 0 || nr >= h as isize || nc >= w as isize {
                None
            } else {
                Some((nr as usize, nc as usize, color))
            }
        })
        .collect()
}

/// First spatial direction witnessing node-spatial(a, b, d), in canonical
/// direction order. Movement toward b then follows the opposite direction.
fn witness_direction(state: &AbstractState, a: usize, b: usize) -> Option<MDirection> {
    let occ = state.occupied_except(&[]);
    relations::spatial_dirs(&state.nodes[a], &state.nodes[b], state.dims, &occ)
        .first()
        .copied()
}

fn active(state: &AbstractState, idx: usize) -> bool {
    state.nodes.get(idx).is_some_and(|n| n.active)
}

/// Slide a node one step at a time along `dir` while the next placement stays
/// in bounds and collides with nothing; returns the step count.
fn free_distance(state: &AbstractState, idx: usize, dir: (isize, isize)) -> isize {
    let cells = &state.nodes[idx].cells;
    let mut k = 0;
    loop {
        match translate(cells, state.dims, dir, k + 1) {
            None => return k,
            Some(next) => {
                if !state.overlapping_nodes(&next, &[idx]).is_empty() {
                    return k;
                }
                k += 1;
            }
        }
    }
}

fn slide_max(state: &mut AbstractState, idx: usize, dir: (isize, isize)) {
    let k = free_distance(state, idx, dir);
    if k > 0 {
        let cells = translate(&state.nodes[idx].cells, state.dims, dir, k).unwrap();
        state.nodes[idx].cells = cells;
    }
}

/// Nodes lying in the sweep corridor of `idx` along `dir`, ordered furthest
/// along the direction first. `limit` bounds the sweep length.
fn corridor_blockers(
    state: &AbstractState,
    idx: usize,
    dir: (isize, isize),
    limit: Option<isize>,
    exclude: &[usize],
) -> Vec<usize> {
    let cells = state.nodes[idx].cells.clone();
    let mut blockers = Vec::new();
    let mut k = 1;
    loop {
        if limit.is_some_and(|l| k > l) {
            break;
        }
        let Some(step_cells) = translate(&cells, state.dims, dir, k) else {
            break;
        };
        for ov in state.overlapping_nodes(&step_cells, exclude) {
            if ov != idx && !blockers.contains(&ov) {
                blockers.push(ov);
            }
        }
        k += 1;
    }
    let proj = |i: usize| -> isize {
        state.nodes[i]
            .cells
            .iter()
            .map(|&(r, c, _)| r as isize * dir.0 + c as isize * dir.1)
            .max()
            .unwrap_or(isize::MIN)
    };
    blockers.sort_by_key(|&i| (std::cmp::Reverse(proj(i)), i));
    blockers
}

/// Border ring around a node: all in-bounds cells at Chebyshev distance one.
/// Returns None when the ring would leave the image, which makes the action
/// inapplicable.
fn outline_ring(state: &AbstractState, idx: usize, color: Color) -> Option<Cells> {
    let (h, w) = state.dims;
    let node = &state.nodes[idx];
    let mut ring: Vec<(usize, usize)> = Vec::new();
    for &(r, c, _) in &node.cells {
        for dr in -1isize..=1 {
            for dc in -1isize..=1 {
                if dr == 0 && dc == 0 {
                    continue;
                }
                let (nr, nc) = (r as isize + dr, c as isize + dc);
                if nr < 0 || nc < 0 || nr >= h as isize || nc >= w as isize {
                    return None;
                }
                let (nr, nc) = (nr as usize, nc as usize);
                if !node.contains_pixel(nr, nc) && !ring.contains(&(nr, nc)) {
                    ring.push((nr, nc));
                }
            }
        }
    }
    ring.sort_unstable();
    Some(ring.into_iter().map(|(r, c)| (r, c, color)).collect())
}

fn rotated_cells(node_cells: &[(usize, usize, Color)], rot: Rotation) -> Cells {
    let pixels: Vec<(usize, usize)> = node_cells.iter().map(|&(r, c, _)| (r, c)).collect();
    let (min_r, min_c, max_r, max_c) = crate::shape::bounding_box(&pixels);
    let (h, w) = (max_r - min_r + 1, max_c - min_c + 1);
    node_cells
        .iter()
        .map(|&(r, c, color)| {
            let (dr, dc) = (r - min_r, c - min_c);
            let (nr, nc) = match rot {
                Rotation::R90 => (dc, h - 1 - dr),
                Rotation::R180 => (h - 1 - dr, w - 1 - dc),
                Rotation::R270 => (w - 1 - dc, dr),
            };
            (min_r + nr, min_c + nc, color)
        })
        .collect()
}

fn flipped_cells(node_cells: &[(usize, usize, Color)], f: FDirection) -> Cells {
    let pixels: Vec<(usize, usize)> = node_cells.iter().map(|&(r, c, _)| (r, c)).collect();
    let (min_r, min_c, max_r, max_c) = crate::shape::bounding_box(&pixels);
    node_cells
        .iter()
        .map(|&(r, c, color)| match f {
            FDirection::Vertical => (r, min_c + max_c - c, color),
            FDirection::Horizontal => (min_r + max_r - r, c, color),
            // reflection across the main diagonal through the box top-left
            FDirection::RightDiagonal => (min_r + (c - min_c), min_c + (r - min_r), color),
            // reflection across the anti-diagonal
            FDirection::LeftDiagonal => (
                min_r + (max_c - c),
                min_c + (max_r - r),
                color,
            ),
        })
        .collect()
}

fn cells_in_bounds(cells: &Cells, dims: (usize, usize)) -> bool {
    let (h, w) = dims;
    cells.iter().all(|&(r, c, _)| r < h && c < w)
}

/// The precondition column of the scheme table. For geometry-producing
/// schemes this includes computing the resulting node and checking that it
/// fits the image without colliding with other nodes.
pub fn applicable(state: &AbstractState, action: &GroundAction) -> bool {
    use SchemeId::*;
    match action.scheme {
        UpdateColor => {
            let n = node_arg(action, 0);
            active(state, n) && state.nodes[n].color == Some(color_arg(action, 1))
        }
        SwapColor => {
            let (a, b) = (node_arg(action, 0), node_arg(action, 1));
            a != b
                && active(state, a)
                && active(state, b)
                && state.nodes[a].color.is_some()
                && state.nodes[b].color.is_some()
        }
        CopyColor => {
            let (a, b) = (node_arg(action, 0), node_arg(action, 1));
            a != b && active(state, a) && active(state, b) && state.nodes[a].color.is_some()
        }
        MoveNode1 | MoveNode2 | ExtendNode => {
            let (a, b) = (node_arg(action, 0), node_arg(action, 1));
            a != b
                && active(state, a)
                && active(state, b)
                && witness_direction(state, a, b).is_some()
        }
        MoveNodeDirection1 | MoveNodeDirection2 | ExtendNodeDirection => {
            active(state, node_arg(action, 0))
        }
        RotateNode => {
            let n = node_arg(action, 0);
            if !active(state, n) {
                return false;
            }
            let ObjectVal::Rotation(rot) = action.args[1] else {
                return false;
            };
            let cells = rotated_cells(&state.nodes[n].cells, rot);
            cells_in_bounds(&cells, state.dims)
                && state.overlapping_nodes(&cells, &[n]).is_empty()
        }
        HollowNode => {
            let n = node_arg(action, 0);
            active(state, n)
                && matches!(state.nodes[n].shape(), Shape::Square | Shape::Rectangle)
        }
        AddBorder => {
            let n = node_arg(action, 0);
            if !active(state, n) {
                return false;
            }
            match outline_ring(state, n, color_arg(action, 1)) {
                Some(ring) => state.overlapping_nodes(&ring, &[n]).is_empty(),
                None => false,
            }
        }
        MirrorNode => {
            let (a, b) = (node_arg(action, 0), node_arg(action, 1));
            if a == b || !active(state, a) || !active(state, b) {
                return false;
            }
            match mirrored_cells(state, a, b) {
                Some(cells) => state.overlapping_nodes(&cells, &[a]).is_empty(),
                None => false,
            }
        }
        FlipNode => {
            let n = node_arg(action, 0);
            if !active(state, n) {
                return false;
            }
            let ObjectVal::FDir(f) = action.args[1] else {
                return false;
            };
            let cells = flipped_cells(&state.nodes[n].cells, f);
            cells_in_bounds(&cells, state.dims)
                && state.overlapping_nodes(&cells, &[n]).is_empty()
        }
        InsertNode => {
            let (a, b) = (node_arg(action, 0), node_arg(action, 1));
            if a == b || !active(state, a) || !active(state, b) {
                return false;
            }
            match stamped_cells(state, a, b) {
                Some(cells) => state.overlapping_nodes(&cells, &[a, b]).is_empty(),
                None => false,
            }
        }
        FillNode => {
            let n = node_arg(action, 0);
            if !active(state, n) || state.nodes[n].shape() != Shape::Unknown {
                return false;
            }
            let completion = completion_cells(state, n, color_arg(action, 1));
            state.overlapping_nodes(&completion, &[n]).is_empty()
        }
    }
}

/// Reflection of node `a` across the axis through node `b`'s center. The axis
/// is vertical when the horizontal center offset dominates, horizontal
/// otherwise (ties horizontal). None when the image cannot hold the result.
fn mirrored_cells(state: &AbstractState, a: usize, b: usize) -> Option<Cells> {
    let (a_min_r, a_min_c, a_max_r, a_max_c) = state.nodes[a].bbox();
    let (b_min_r, b_min_c, b_max_r, b_max_c) = state.nodes[b].bbox();
    let dr = ((a_min_r + a_max_r) as isize - (b_min_r + b_max_r) as isize).abs();
    let dc = ((a_min_c + a_max_c) as isize - (b_min_c + b_max_c) as isize).abs();
    let (h, w) = state.dims;
    state.nodes[a]
        .cells
        .iter()
        .map(|&(r, c, color)| {
            let (nr, nc) = if dc > dr {
                (r as isize, (b_min_c + b_max_c) as isize - c as isize)
            } else {
                ((b_min_r + b_max_r) as isize - r as isize, c as isize)
            };
            if nr < 0 || nc < 0 || nr >= h as isize || nc >= w as isize {
                None
            } else {
                Some((nr as usize, nc as usize, color))
            }
        })
        .collect()
}

/// Copy of node `a`'s pattern translated so its box top-left lands on node
/// `b`'s box top-left.
fn stamped_cells(state: &AbstractState, a: usize, b: usize) -> Option<Cells> {
    let (a_min_r, a_min_c, _, _) = state.nodes[a].bbox();
    let (b_min_r, b_min_c, _, _) = state.nodes[b].bbox();
    let dr = b_min_r as isize - a_min_r as isize;
    let dc = b_min_c as isize - a_min_c as isize;
    let (h, w) = state.dims;
    state.nodes[a]
        .cells
        .iter()
        .map(|&(r, c, color)| {
            let (nr, nc) = (r as isize + dr, c as isize + dc);
            if nr < 0 || nc < 0 || nr >= h as isize || nc >= w as isize {
                None
            } else {
                Some((nr as usize, nc as usize, color))
            }
        })
        .collect()
}

fn completion_cells(state: &AbstractState, n: usize, color: Color) -> Cells {
    let (min_r, min_c, max_r, max_c) = state.nodes[n].bbox();
    let mut cells = Vec::new();
    for r in min_r..=max_r {
        for c in min_c..=max_c {
            if !state.nodes[n].contains_pixel(r, c) {
                cells.push((r, c, color));
            }
        }
    }
    cells
}

fn recolor(state: &mut AbstractState, idx: usize, color: Color) {
    let node = &mut state.nodes[idx];
    node.color = Some(color);
    for cell in &mut node.cells {
        cell.2 = color;
    }
}

/// Apply the action's effect. Returns false and leaves the state untouched
/// when the precondition fails or the effect would leave the image without a
/// stopping rule; the interpreter treats both as no-ops.
pub fn apply(state: &mut AbstractState, action: &GroundAction) -> bool {
    use SchemeId::*;
    if !applicable(state, action) {
        return false;
    }
    match action.scheme {
        UpdateColor => {
            let n = node_arg(action, 0);
            recolor(state, n, color_arg(action, 2));
            state.touch(n);
            true
        }
        SwapColor => {
            let (a, b) = (node_arg(action, 0), node_arg(action, 1));
            let (ca, cb) = (state.nodes[a].color.unwrap(), state.nodes[b].color.unwrap());
            recolor(state, a, cb);
            recolor(state, b, ca);
            state.touch_many(&[a, b]);
            true
        }
        CopyColor => {
            let (a, b) = (node_arg(action, 0), node_arg(action, 1));
            let color = state.nodes[a].color.unwrap();
            recolor(state, b, color);
            state.touch(b);
            true
        }
        MoveNode1 => {
            let (a, b) = (node_arg(action, 0), node_arg(action, 1));
            let dir = witness_direction(state, a, b).unwrap().opposite().delta();
            let mut k = 0isize;
            loop {
                match translate(&state.nodes[a].cells, state.dims, dir, k + 1) {
                    None => return false, // hit the boundary before node b
                    Some(next) => {
                        let hit = state.overlapping_nodes(&next, &[a]);
                        if hit.is_empty() {
                            k += 1;
                            continue;
                        }
                        if !hit.contains(&b) {
                            return false; // blocked by another node
                        }
                        break;
                    }
                }
            }
            if k > 0 {
                let cells = translate(&state.nodes[a].cells, state.dims, dir, k).unwrap();
                state.nodes[a].cells = cells;
            }
            state.touch(a);
            true
        }
        MoveNode2 => {
            let (a, b) = (node_arg(action, 0), node_arg(action, 1));
            let dir = witness_direction(state, a, b).unwrap().opposite().delta();
            // Sweep only up to first contact with b.
            let mut limit = None;
            let mut k = 1;
            while let Some(next) = translate(&state.nodes[a].cells, state.dims, dir, k) {
                if state.overlapping_nodes(&next, &[a]).contains(&b) {
                    limit = Some(k - 1);
                    break;
                }
                k += 1;
            }
            let blockers = corridor_blockers(state, a, dir, limit, &[a, b]);
            let mut moved = blockers.clone();
            for blocker in blockers {
                slide_max(state, blocker, dir);
            }
            slide_max(state, a, dir);
            moved.push(a);
            state.touch_many(&moved);
            true
        }
        MoveNodeDirection1 => {
            let n = node_arg(action, 0);
            let ObjectVal::MDir(d) = action.args[1] else {
                return false;
            };
            let dir = d.delta();
            let blockers = corridor_blockers(state, n, dir, None, &[n]);
            let mut moved = blockers.clone();
            for blocker in blockers {
                slide_max(state, blocker, dir);
            }
            slide_max(state, n, dir);
            moved.push(n);
            state.touch_many(&moved);
            true
        }
        MoveNodeDirection2 => {
            let n = node_arg(action, 0);
            let ObjectVal::MDir(d) = action.args[1] else {
                return false;
            };
            let ObjectVal::Step(step) = action.args[2] else {
                return false;
            };
            let dir = d.delta();
            match step {
                StepKind::One => {
                    match translate(&state.nodes[n].cells, state.dims, dir, 1) {
                        Some(next) if state.overlapping_nodes(&next, &[n]).is_empty() => {
                            state.nodes[n].cells = next;
                            state.touch(n);
                            true
                        }
                        _ => false,
                    }
                }
                StepKind::Max => {
                    slide_max(state, n, dir);
                    state.touch(n);
                    true
                }
            }
        }
        ExtendNode => {
            let (a, b) = (node_arg(action, 0), node_arg(action, 1));
            let dir = witness_direction(state, a, b).unwrap().opposite().delta();
            let base = state.nodes[a].cells.clone();
            let mut added: Cells = Vec::new();
            let mut k = 1isize;
            loop {
                match translate(&base, state.dims, dir, k) {
                    None => return false, // boundary reached before contact
                    Some(layer) => {
                        let hit = state.overlapping_nodes(&layer, &[a]);
                        if hit.contains(&b) {
                            break;
                        }
                        if !hit.is_empty() {
                            return false; // another node is in the way
                        }
                        added.extend(layer);
                        k += 1;
                    }
                }
            }
            extend_node_cells(state, a, added);
            state.touch(a);
            true
        }
        ExtendNodeDirection => {
            let n = node_arg(action, 0);
            let ObjectVal::MDir(d) = action.args[1] else {
                return false;
            };
            let dir = d.delta();
            let base = state.nodes[n].cells.clone();
            let mut added: Cells = Vec::new();
            let mut k = 1isize;
            while let Some(layer) = translate(&base, state.dims, dir, k) {
                if !state.overlapping_nodes(&layer, &[n]).is_empty() {
                    break;
                }
                added.extend(layer);
                k += 1;
            }
            extend_node_cells(state, n, added);
            state.touch(n);
            true
        }
        RotateNode => {
            let n = node_arg(action, 0);
            let ObjectVal::Rotation(rot) = action.args[1] else {
                return false;
            };
            let cells = rotated_cells(&state.nodes[n].cells, rot);
            let mut cells = cells;
            cells.sort_unstable();
            state.nodes[n].cells = cells;
            state.touch(n);
            true
        }
        HollowNode => {
            let n = node_arg(action, 0);
            let fill = color_arg(action, 1);
            let (min_r, min_c, max_r, max_c) = state.nodes[n].bbox();
            let (ring, interior): (Cells, Cells) = state.nodes[n]
                .cells
                .iter()
                .partition(|&&(r, c, _)| {
                    r == min_r || r == max_r || c == min_c || c == max_c
                });
            state.nodes[n].cells = ring;
            let mut touched = vec![n];
            if fill != state.background && !interior.is_empty() {
                let interior: Cells =
                    interior.into_iter().map(|(r, c, _)| (r, c, fill)).collect();
                let aux = state.push_aux_node(interior, Some(fill));
                touched.push(aux);
            }
            state.touch_many(&touched);
            true
        }
        AddBorder => {
            let n = node_arg(action, 0);
            let color = color_arg(action, 1);
            let ring = outline_ring(state, n, color).unwrap();
            let aux = state.push_aux_node(ring, Some(color));
            state.touch_many(&[n, aux]);
            true
        }
        MirrorNode => {
            let (a, b) = (node_arg(action, 0), node_arg(action, 1));
            let mut cells = mirrored_cells(state, a, b).unwrap();
            cells.sort_unstable();
            state.nodes[a].cells = cells;
            state.touch(a);
            true
        }
        FlipNode => {
            let n = node_arg(action, 0);
            let ObjectVal::FDir(f) = action.args[1] else {
                return false;
            };
            let mut cells = flipped_cells(&state.nodes[n].cells, f);
            cells.sort_unstable();
            state.nodes[n].cells = cells;
            state.touch(n);
            true
        }
        InsertNode => {
            let (a, b) = (node_arg(action, 0), node_arg(action, 1));
            let cells = stamped_cells(state, a, b).unwrap();
            let color = state.nodes[a].color;
            state.nodes[b].active = false;
            let aux = state.push_aux_node(cells, color);
            state.touch_many(&[b, aux]);
            true
        }
        FillNode => {
            let n = node_arg(action, 0);
            let color = color_arg(action, 1);
            let completion = completion_cells(state, n, color);
            let mut touched = vec![n];
            if state.nodes[n].color == Some(color) {
                extend_node_cells(state, n, completion);
            } else {
                let aux = state.push_aux_node(completion, Some(color));
                touched.push(aux);
            }
            state.touch_many(&touched);
            true
        }
    }
}

fn extend_node_cells(state: &mut AbstractState, idx: usize, added: Cells) {
    let node = &mut state.nodes[idx];
    for (r, c, color) in added {
        if !node.cells.iter().any(|&(er, ec, _)| er == r && ec == c) {
            node.cells.push((r, c, color));
        }
    }
    node.cells.sort_unstable();
}

/// Interpret a predicate over the current state. Arguments naming inactive
/// nodes satisfy nothing.
pub fn eval_predicate(state: &AbstractState, pred: PredicateId, args: &[ObjectVal]) -> bool {
    use PredicateId::*;
    let node = |i: usize| -> Option<&crate::abstraction::Node> {
        state.nodes.get(i).filter(|n| n.active)
    };
    let node_of = |v: ObjectVal| -> Option<usize> {
        match v {
            ObjectVal::Node(i) if active(state, i) => Some(i),
            _ => None,
        }
    };
    match pred {
        ColorMost => {
            let ObjectVal::Color(c) = args[0] else { return false };
            state.flags().color_most == Some(c)
        }
        ColorLeast => {
            let ObjectVal::Color(c) = args[0] else { return false };
            state.flags().color_least == Some(c)
        }
        Background => {
            let ObjectVal::Color(c) = args[0] else { return false };
            c == state.background
        }
        ColorMax | ColorMin | SizeMin | SizeMax | Odd | Even | UpBorder | DownBorder
        | LeftBorder | RightBorder | LeftDiagonal | RightDiagonal | HorizontalMiddle
        | VerticalMiddle => {
            let Some(i) = node_of(args[0]) else { return false };
            let flags = state.flags();
            match pred {
                ColorMax => flags.color_max[i],
                ColorMin => flags.color_min[i],
                SizeMin => flags.size_min[i],
                SizeMax => flags.size_max[i],
                Odd => flags.odd[i],
                Even => flags.even[i],
                UpBorder => flags.up_border[i],
                DownBorder => flags.down_border[i],
                LeftBorder => flags.left_border[i],
                RightBorder => flags.right_border[i],
                LeftDiagonal => flags.left_diagonal[i],
                RightDiagonal => flags.right_diagonal[i],
                HorizontalMiddle => flags.horizontal_middle[i],
                VerticalMiddle => flags.vertical_middle[i],
                _ => unreachable!(),
            }
        }
        NodeColor => {
            let (Some(i), ObjectVal::Color(c)) = (node_of(args[0]), args[1]) else {
                return false;
            };
            state.nodes[i].color == Some(c)
        }
        NodeShape => {
            let (Some(i), ObjectVal::Shape(s)) = (node_of(args[0]), args[1]) else {
                return false;
            };
            state.nodes[i].shape() == s
        }
        NodeSize => {
            let (Some(i), ObjectVal::Size(s)) = (node_of(args[0]), args[1]) else {
                return false;
            };
            state.nodes[i].size() == s
        }
        DenoisingColor => {
            let (Some(i), ObjectVal::Color(c)) = (node_of(args[0]), args[1]) else {
                return false;
            };
            state.flags().denoising[i] && state.nodes[i].color == Some(c)
        }
        NodeDiagonal => {
            let (Some(a), Some(b)) = (node_of(args[0]), node_of(args[1])) else {
                return false;
            };
            let occ = state.occupied_except(&[]);
            !relations::diagonal_spatial(&state.nodes[a], &state.nodes[b], state.dims, &occ)
                .is_empty()
        }
        SameColorPair => {
            let (Some(a), Some(b)) = (node_of(args[0]), node_of(args[1])) else {
                return false;
            };
            relations::same_color_pair(&state.nodes[a], &state.nodes[b])
        }
        Congruent => {
            let (Some(a), Some(b)) = (node_of(args[0]), node_of(args[1])) else {
                return false;
            };
            relations::congruent_pair(&state.nodes[a], &state.nodes[b])
        }
        ContainNode => {
            let (Some(a), Some(b)) = (node_of(args[0]), node_of(args[1])) else {
                return false;
            };
            relations::contains_pair(&state.nodes[a], &state.nodes[b])
        }
        PartiallyContainNode => {
            let (Some(a), Some(b)) = (node_of(args[0]), node_of(args[1])) else {
                return false;
            };
            relations::partially_contains_pair(&state.nodes[a], &state.nodes[b], state.dims)
        }
        RelativePosition => {
            let (Some(a), Some(b), ObjectVal::MDir(d)) =
                (node_of(args[0]), node_of(args[1]), args[2])
            else {
                return false;
            };
            relations::relative_position_dir(&state.nodes[a], &state.nodes[b]) == Some(d)
        }
        NodeSpatial => {
            let (Some(a), Some(b), ObjectVal::MDir(d)) =
                (node_of(args[0]), node_of(args[1]), args[2])
            else {
                return false;
            };
            let occ = state.occupied_except(&[]);
            relations::spatial_dirs(&state.nodes[a], &state.nodes[b], state.dims, &occ)
                .contains(&d)
        }
        PixelColor => {
            let (ObjectVal::Pixel(r, c), ObjectVal::Color(color)) = (args[0], args[1]) else {
                return false;
            };
            r < state.dims.0 && c < state.dims.1 && state.rendered().get(r, c) == color
        }
        ContainPixel => {
            let (ObjectVal::Pixel(r, c), Some(i)) = (args[1], node_of(args[0])) else {
                return false;
            };
            node(i).is_some_and(|n| n.contains_pixel(r, c))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abstraction::{abstract_grid, AbstractionKind};
    use crate::arc_io::{grids_equal, Grid};

    fn grid(rows: &[&[u8]]) -> Grid {
        Grid::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn state_of(g: &Grid, kind: AbstractionKind) -> AbstractState {
        AbstractState::from_graph(&abstract_grid(g, kind), g)
    }

    fn act(scheme: SchemeId, args: &[ObjectVal]) -> GroundAction {
        GroundAction { scheme, args: args.to_vec() }
    }

    fn node_by_color(state: &AbstractState, color: Color) -> usize {
        state
            .nodes
            .iter()
            .position(|n| n.color == Some(color))
            .expect("node with color")
    }

    #[test]
    fn update_color_precondition_and_effect() {
        let g = grid(&[&[2, 2, 0], &[0, 0, 0]]);
        let mut state = state_of(&g, AbstractionKind::Cc4);
        let wrong = act(
            SchemeId::UpdateColor,
            &[ObjectVal::Node(0), ObjectVal::Color(5), ObjectVal::Color(1)],
        );
        assert!(!applicable(&state, &wrong));
        assert!(!apply(&mut state, &wrong));
        assert!(grids_equal(state.rendered(), &g));

        let right = act(
            SchemeId::UpdateColor,
            &[ObjectVal::Node(0), ObjectVal::Color(2), ObjectVal::Color(4)],
        );
        let before_pixels = state.nodes[0].pixels();
        assert!(apply(&mut state, &right));
        assert_eq!(state.nodes[0].pixels(), before_pixels);
        assert_eq!(state.nodes[0].color, Some(4));
        assert_eq!(state.rendered().get(0, 0), 4);
        assert!(state.render_consistent());
    }

    #[test]
    fn swap_and_copy_color() {
        let g = grid(&[&[2, 0, 3], &[0, 0, 0]]);
        let mut state = state_of(&g, AbstractionKind::Cc4);
        let swap = act(SchemeId::SwapColor, &[ObjectVal::Node(0), ObjectVal::Node(1)]);
        assert!(apply(&mut state, &swap));
        assert_eq!(state.rendered().get(0, 0), 3);
        assert_eq!(state.rendered().get(0, 2), 2);
        // involution
        assert!(apply(&mut state, &swap));
        assert!(grids_equal(state.rendered(), &g));
        // self-swap is inapplicable
        assert!(!applicable(
            &state,
            &act(SchemeId::SwapColor, &[ObjectVal::Node(0), ObjectVal::Node(0)])
        ));

        let copy = act(SchemeId::CopyColor, &[ObjectVal::Node(0), ObjectVal::Node(1)]);
        assert!(apply(&mut state, &copy));
        assert_eq!(state.rendered().get(0, 2), 2);
    }

    #[test]
    fn move_node_to_border_of_target() {
        // dot left of a wall on the same row
        let g = grid(&[
            &[0, 0, 0, 0, 5],
            &[2, 0, 0, 0, 5],
            &[0, 0, 0, 0, 5],
        ]);
        let mut state = state_of(&g, AbstractionKind::Cc4);
        let dot = node_by_color(&state, 2);
        let wall = node_by_color(&state, 5);
        let mv = act(SchemeId::MoveNode1, &[ObjectVal::Node(dot), ObjectVal::Node(wall)]);
        assert!(apply(&mut state, &mv));
        assert_eq!(state.nodes[dot].pixels(), vec![(1, 3)]);
        assert!(state.render_consistent());
    }

    #[test]
    fn move_node_blocked_by_third_node_is_noop() {
        let g = grid(&[&[2, 0, 3, 0, 5], &[0, 0, 0, 0, 5]]);
        let mut state = state_of(&g, AbstractionKind::Cc4);
        let dot = node_by_color(&state, 2);
        let wall = node_by_color(&state, 5);
        let mv = act(SchemeId::MoveNode1, &[ObjectVal::Node(dot), ObjectVal::Node(wall)]);
        assert!(applicable(&state, &mv)); // spatial relation exists
        assert!(!apply(&mut state, &mv)); // but the path is blocked
        assert!(grids_equal(state.rendered(), &g));
    }

    #[test]
    fn move_node2_clears_the_corridor() {
        let g = grid(&[&[2, 0, 3, 0, 0, 5]]);
        let mut state = state_of(&g, AbstractionKind::Cc4);
        let a = node_by_color(&state, 2);
        let b = node_by_color(&state, 5);
        let mv = act(SchemeId::MoveNode2, &[ObjectVal::Node(a), ObjectVal::Node(b)]);
        assert!(apply(&mut state, &mv));
        let expect = grid(&[&[0, 0, 0, 2, 3, 5]]);
        assert!(grids_equal(state.rendered(), &expect));
    }

    #[test]
    fn move_direction1_pushes_blockers_to_the_wall() {
        let g = grid(&[&[2, 0, 3, 0, 0]]);
        let mut state = state_of(&g, AbstractionKind::Cc4);
        let a = node_by_color(&state, 2);
        let mv = act(
            SchemeId::MoveNodeDirection1,
            &[ObjectVal::Node(a), ObjectVal::MDir(MDirection::Right)],
        );
        assert!(apply(&mut state, &mv));
        let expect = grid(&[&[0, 0, 0, 2, 3]]);
        assert!(grids_equal(state.rendered(), &expect));
    }

    #[test]
    fn move_direction2_one_steps_compose_to_max() {
        let g = grid(&[&[2, 0, 0, 0, 0], &[0, 0, 0, 0, 0]]);
        let one = act(
            SchemeId::MoveNodeDirection2,
            &[
                ObjectVal::Node(0),
                ObjectVal::MDir(MDirection::Right),
                ObjectVal::Step(StepKind::One),
            ],
        );
        let max = act(
            SchemeId::MoveNodeDirection2,
            &[
                ObjectVal::Node(0),
                ObjectVal::MDir(MDirection::Right),
                ObjectVal::Step(StepKind::Max),
            ],
        );
        let mut by_steps = state_of(&g, AbstractionKind::Cc4);
        let mut hops = 0;
        while apply(&mut by_steps, &one) {
            hops += 1;
        }
        let mut by_max = state_of(&g, AbstractionKind::Cc4);
        assert!(apply(&mut by_max, &max));
        assert_eq!(hops, 4);
        assert!(grids_equal(by_steps.rendered(), by_max.rendered()));
        // moving further fails without changing anything
        let snapshot = by_max.rendered().clone();
        assert!(!apply(&mut by_max, &one));
        assert!(grids_equal(by_max.rendered(), &snapshot));
    }

    #[test]
    fn extend_node_until_contact() {
        let g = grid(&[&[2, 0, 0, 5], &[0, 0, 0, 5]]);
        let mut state = state_of(&g, AbstractionKind::Cc4);
        let a = node_by_color(&state, 2);
        let b = node_by_color(&state, 5);
        let ext = act(SchemeId::ExtendNode, &[ObjectVal::Node(a), ObjectVal::Node(b)]);
        assert!(apply(&mut state, &ext));
        let expect = grid(&[&[2, 2, 2, 5], &[0, 0, 0, 5]]);
        assert!(grids_equal(state.rendered(), &expect));
        assert_eq!(state.nodes[a].size(), 3);
    }

    #[test]
    fn extend_direction_until_boundary() {
        let g = grid(&[&[0, 2, 0], &[0, 0, 0], &[0, 0, 0]]);
        let mut state = state_of(&g, AbstractionKind::Cc4);
        let ext = act(
            SchemeId::ExtendNodeDirection,
            &[ObjectVal::Node(0), ObjectVal::MDir(MDirection::Down)],
        );
        assert!(apply(&mut state, &ext));
        let expect = grid(&[&[0, 2, 0], &[0, 2, 0], &[0, 2, 0]]);
        assert!(grids_equal(state.rendered(), &expect));
    }

    #[test]
    fn rotate_image_node() {
        let g = grid(&[&[1, 2], &[3, 4]]);
        let mut state = state_of(&g, AbstractionKind::Image);
        let rot = act(
            SchemeId::RotateNode,
            &[ObjectVal::Node(0), ObjectVal::Rotation(Rotation::R180)],
        );
        assert!(apply(&mut state, &rot));
        let expect = grid(&[&[4, 3], &[2, 1]]);
        assert!(grids_equal(state.rendered(), &expect));
        // 180 twice restores the original
        assert!(apply(&mut state, &rot));
        assert!(grids_equal(state.rendered(), &g));

        // 90-degree rotation of a non-square image cannot fit
        let g = grid(&[&[1, 2, 3], &[4, 5, 6]]);
        let state = state_of(&g, AbstractionKind::Image);
        let rot90 = act(
            SchemeId::RotateNode,
            &[ObjectVal::Node(0), ObjectVal::Rotation(Rotation::R90)],
        );
        assert!(!applicable(&state, &rot90));
    }

    #[test]
    fn flip_node_involutions() {
        let g = grid(&[&[1, 2], &[3, 4]]);
        for f in crate::domain::ALL_FDIRECTIONS {
            let mut state = state_of(&g, AbstractionKind::Image);
            let flip = act(SchemeId::FlipNode, &[ObjectVal::Node(0), ObjectVal::FDir(f)]);
            assert!(apply(&mut state, &flip), "{f:?}");
            assert!(apply(&mut state, &flip), "{f:?}");
            assert!(grids_equal(state.rendered(), &g), "{f:?}");
        }
        // one vertical flip mirrors left-right
        let mut state = state_of(&g, AbstractionKind::Image);
        let flip = act(
            SchemeId::FlipNode,
            &[ObjectVal::Node(0), ObjectVal::FDir(FDirection::Vertical)],
        );
        assert!(apply(&mut state, &flip));
        assert!(grids_equal(state.rendered(), &grid(&[&[2, 1], &[4, 3]])));
    }

    #[test]
    fn hollow_node_keeps_the_ring() {
        let g = grid(&[
            &[3, 3, 3, 3, 0],
            &[3, 3, 3, 3, 0],
            &[3, 3, 3, 3, 0],
        ]);
        let mut state = state_of(&g, AbstractionKind::Cc4);
        let hollow = act(
            SchemeId::HollowNode,
            &[ObjectVal::Node(0), ObjectVal::Color(0)],
        );
        assert!(apply(&mut state, &hollow));
        let expect = grid(&[
            &[3, 3, 3, 3, 0],
            &[3, 0, 0, 3, 0],
            &[3, 3, 3, 3, 0],
        ]);
        assert!(grids_equal(state.rendered(), &expect));

        // hollowing a single pixel is inapplicable
        let g = grid(&[&[2, 0], &[0, 0]]);
        let state = state_of(&g, AbstractionKind::Cc4);
        assert!(!applicable(
            &state,
            &act(SchemeId::HollowNode, &[ObjectVal::Node(0), ObjectVal::Color(0)])
        ));
    }

    #[test]
    fn hollow_with_visible_fill_creates_interior_node() {
        let g = grid(&[&[3, 3, 3, 0], &[3, 3, 3, 0], &[3, 3, 3, 0]]);
        let mut state = state_of(&g, AbstractionKind::Cc4);
        let hollow = act(
            SchemeId::HollowNode,
            &[ObjectVal::Node(0), ObjectVal::Color(6)],
        );
        assert!(apply(&mut state, &hollow));
        assert_eq!(state.rendered().get(1, 1), 6);
        assert_eq!(state.nodes.len(), 2);
    }

    #[test]
    fn add_border_draws_a_closed_ring() {
        let g = grid(&[
            &[0, 0, 0, 0],
            &[0, 2, 0, 0],
            &[0, 0, 0, 0],
        ]);
        let mut state = state_of(&g, AbstractionKind::Cc4);
        let border = act(SchemeId::AddBorder, &[ObjectVal::Node(0), ObjectVal::Color(4)]);
        assert!(apply(&mut state, &border));
        let expect = grid(&[
            &[4, 4, 4, 0],
            &[4, 2, 4, 0],
            &[4, 4, 4, 0],
        ]);
        assert!(grids_equal(state.rendered(), &expect));

        // a node on the image edge cannot take a closed border
        let g = grid(&[&[2, 0], &[0, 0]]);
        let state = state_of(&g, AbstractionKind::Cc4);
        assert!(!applicable(
            &state,
            &act(SchemeId::AddBorder, &[ObjectVal::Node(0), ObjectVal::Color(4)])
        ));
    }

    #[test]
    fn mirror_node_across_target_center() {
        // dot left of a block: vertical axis through the block center
        let g = grid(&[
            &[0, 2, 0, 5, 5, 0, 0],
            &[0, 0, 0, 5, 5, 0, 0],
        ]);
        let mut state = state_of(&g, AbstractionKind::Cc4);
        let dot = node_by_color(&state, 2);
        let block = node_by_color(&state, 5);
        let mirror = act(
            SchemeId::MirrorNode,
            &[ObjectVal::Node(dot), ObjectVal::Node(block)],
        );
        assert!(apply(&mut state, &mirror));
        // block cols 3..4, so the dot at col 1 reflects to col 3+4-1 = 6
        assert_eq!(state.nodes[dot].pixels(), vec![(0, 6)]);

        // a reflection that would leave the image is inapplicable
        let g = grid(&[&[2, 0, 0, 5, 5, 0]]);
        let state = state_of(&g, AbstractionKind::Cc4);
        let dot = node_by_color(&state, 2);
        let block = node_by_color(&state, 5);
        assert!(!applicable(
            &state,
            &act(
                SchemeId::MirrorNode,
                &[ObjectVal::Node(dot), ObjectVal::Node(block)]
            )
        ));
    }

    #[test]
    fn eval_predicate_basics() {
        let g = grid(&[&[2, 0, 3, 3], &[0, 0, 0, 0]]);
        let state = state_of(&g, AbstractionKind::Cc4);
        let dot = node_by_color(&state, 2);
        let line = node_by_color(&state, 3);
        assert!(eval_predicate(
            &state,
            PredicateId::NodeSize,
            &[ObjectVal::Node(dot), ObjectVal::Size(1)]
        ));
        assert!(!eval_predicate(
            &state,
            PredicateId::NodeSize,
            &[ObjectVal::Node(line), ObjectVal::Size(1)]
        ));
        assert!(eval_predicate(
            &state,
            PredicateId::NodeShape,
            &[ObjectVal::Node(line), ObjectVal::Shape(Shape::HorizontalLine)]
        ));
        assert!(eval_predicate(
            &state,
            PredicateId::Background,
            &[ObjectVal::Color(0)]
        ));
        assert!(eval_predicate(
            &state,
            PredicateId::NodeSpatial,
            &[
                ObjectVal::Node(dot),
                ObjectVal::Node(line),
                ObjectVal::MDir(MDirection::Left)
            ]
        ));
        assert!(eval_predicate(
            &state,
            PredicateId::PixelColor,
            &[ObjectVal::Pixel(0, 0), ObjectVal::Color(2)]
        ));
        assert!(eval_predicate(
            &state,
            PredicateId::ContainPixel,
            &[ObjectVal::Node(line), ObjectVal::Pixel(0, 2)]
        ));
    }

    #[test]
    fn inactive_nodes_satisfy_nothing() {
        let g = grid(&[&[2, 0, 3], &[0, 0, 0]]);
        let mut state = state_of(&g, AbstractionKind::Cc4);
        state.nodes[0].active = false;
        state.touch(0);
        assert!(!eval_predicate(
            &state,
            PredicateId::NodeSize,
            &[ObjectVal::Node(0), ObjectVal::Size(1)]
        ));
        assert!(!eval_predicate(
            &state,
            PredicateId::NodeColor,
            &[ObjectVal::Node(0), ObjectVal::Color(2)]
        ));
        // actions over deleted nodes are inapplicable
        assert!(!applicable(
            &state,
            &act(
                SchemeId::UpdateColor,
                &[ObjectVal::Node(0), ObjectVal::Color(2), ObjectVal::Color(4)]
            )
        ));
    }

    #[test]
    fn applicability_agrees_with_attribute_lookup() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..40 {
            let cells: Vec<u8> = (0..25)
                .map(|_| if rng.gen_bool(0.3) { rng.gen_range(1..5) } else { 0 })
                .collect();
            let g = Grid::new(5, 5, cells).unwrap();
            let state = state_of(&g, AbstractionKind::Cc4);
            for i in 0..state.nodes.len() {
                for c1 in 0u8..5 {
                    let action = act(
                        SchemeId::UpdateColor,
                        &[ObjectVal::Node(i), ObjectVal::Color(c1), ObjectVal::Color(7)],
                    );
                    let expected = state.nodes[i].color == Some(c1);
                    assert_eq!(applicable(&state, &action), expected);
                }
            }
        }
    }

    #[test]
    fn relative_position_matches_fresh_recomputation() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(37);
        for _ in 0..30 {
            let cells: Vec<u8> = (0..36)
                .map(|_| if rng.gen_bool(0.2) { rng.gen_range(1..4) } else { 0 })
                .collect();
            let g = Grid::new(6, 6, cells).unwrap();
            let state = state_of(&g, AbstractionKind::Cc4);
            for a in 0..state.nodes.len() {
                for b in 0..state.nodes.len() {
                    for d in crate::relations::ALL_MDIRECTIONS {
                        let via_pred = eval_predicate(
                            &state,
                            PredicateId::RelativePosition,
                            &[ObjectVal::Node(a), ObjectVal::Node(b), ObjectVal::MDir(d)],
                        );
                        let direct = crate::relations::relative_position_dir(
                            &state.nodes[a],
                            &state.nodes[b],
                        ) == Some(d);
                        assert_eq!(via_pred, direct);
                    }
                }
            }
        }
    }

    #[test]
    fn insert_node_stamps_pattern_and_deletes_target() {
        let g = grid(&[
            &[2, 2, 0, 0, 0],
            &[0, 2, 0, 3, 3],
            &[0, 0, 0, 3, 3],
        ]);
        let mut state = state_of(&g, AbstractionKind::Cc4);
        let a = node_by_color(&state, 2);
        let b = node_by_color(&state, 3);
        let insert = act(SchemeId::InsertNode, &[ObjectVal::Node(a), ObjectVal::Node(b)]);
        assert!(apply(&mut state, &insert));
        assert!(!state.nodes[b].active);
        let expect = grid(&[
            &[2, 2, 0, 0, 0],
            &[0, 2, 0, 2, 2],
            &[0, 0, 0, 0, 2],
        ]);
        assert!(grids_equal(state.rendered(), &expect));
    }

    #[test]
    fn fill_node_completes_the_bounding_box() {
        let g = grid(&[
            &[2, 2, 0, 0],
            &[2, 0, 0, 0],
            &[2, 2, 2, 0],
        ]);
        let mut state = state_of(&g, AbstractionKind::Cc4);
        assert_eq!(state.nodes[0].shape(), Shape::Unknown);
        let fill = act(SchemeId::FillNode, &[ObjectVal::Node(0), ObjectVal::Color(2)]);
        assert!(apply(&mut state, &fill));
        let expect = grid(&[
            &[2, 2, 2, 0],
            &[2, 2, 2, 0],
            &[2, 2, 2, 0],
        ]);
        assert!(grids_equal(state.rendered(), &expect));
        assert_eq!(state.nodes[0].shape(), Shape::Square);

        // filling a rectangle is inapplicable: shape is not unknown
        let fill_again = act(SchemeId::FillNode, &[ObjectVal::Node(0), ObjectVal::Color(4)]);
        assert!(!applicable(&state, &fill_again));
    }

    #[test]
    fn effects_never_change_dimensions_and_keep_render_consistent() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..20 {
            let cells: Vec<u8> = (0..30)
                .map(|_| if rng.gen_bool(0.25) { rng.gen_range(1..6) } else { 0 })
                .collect();
            let g = Grid::new(5, 6, cells).unwrap();
            let mut state = state_of(&g, AbstractionKind::Cc4);
            let n = state.nodes.len();
            if n == 0 {
                continue;
            }
            for _ in 0..10 {
                let i = rng.gen_range(0..n);
                let j = rng.gen_range(0..n);
                let action = match rng.gen_range(0..5) {
                    0 => act(
                        SchemeId::UpdateColor,
                        &[
                            ObjectVal::Node(i),
                            ObjectVal::Color(rng.gen_range(0..6)),
                            ObjectVal::Color(rng.gen_range(0..6)),
                        ],
                    ),
                    1 => act(SchemeId::MoveNode1, &[ObjectVal::Node(i), ObjectVal::Node(j)]),
                    2 => act(
                        SchemeId::MoveNodeDirection2,
                        &[
                            ObjectVal::Node(i),
                            ObjectVal::MDir(crate::relations::ALL_MDIRECTIONS[rng.gen_range(0..8)]),
                            ObjectVal::Step(StepKind::Max),
                        ],
                    ),
                    3 => act(SchemeId::AddBorder, &[ObjectVal::Node(i), ObjectVal::Color(7)]),
                    _ => act(SchemeId::ExtendNode, &[ObjectVal::Node(i), ObjectVal::Node(j)]),
                };
                let _ = apply(&mut state, &action);
                assert_eq!(state.rendered().dims(), g.dims());
                assert!(state.render_consistent());
            }
        }
    }
}
