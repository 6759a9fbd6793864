//! The mutable state a program executes over: the node graph plus a rendered
//! grid kept consistent with it.

use std::cell::RefCell;
use std::rc::Rc;

use crate::abstraction::{compute_flags, AbstractGraph, AbstractionKind, GraphFlags, Node};
use crate::arc_io::{Color, Grid};

/// Execution state: nodes are mutable in color, pixels and liveness; the
/// rendered grid is rebuilt from the canvas plus active nodes after every
/// effect. Auxiliary nodes created by effects are appended after the
/// pointer-indexable originals.
#[derive(Debug, Clone)]
pub struct AbstractState {
    pub kind: AbstractionKind,
    pub background: Color,
    pub dims: (usize, usize),
    /// Grid content never covered by an original node; vacated node cells
    /// expose the background.
    canvas: Grid,
    pub nodes: Vec<Node>,
    /// Number of original nodes; pointers only ever index below this.
    pub object_count: usize,
    zorder: Vec<u64>,
    zctr: u64,
    rendered: Grid,
    version: u64,
    flags_cache: RefCell<Option<(u64, Rc<GraphFlags>)>>,
}

impl AbstractState {
    pub fn from_graph(graph: &AbstractGraph, input: &Grid) -> Self {
        let (h, w) = graph.dims;
        let mut canvas = input.clone();
        for node in &graph.nodes {
            for &(r, c, _) in &node.cells {
                canvas.set(r, c, graph.background);
            }
        }
        let mut state = AbstractState {
            kind: graph.kind,
            background: graph.background,
            dims: (h, w),
            canvas,
            nodes: graph.nodes.clone(),
            object_count: graph.nodes.len(),
            zorder: vec![0; graph.nodes.len()],
            zctr: 0,
            rendered: input.clone(),
            version: 0,
            flags_cache: RefCell::new(None),
        };
        state.re_render();
        state
    }

    pub fn rendered(&self) -> &Grid {
        &self.rendered
    }

    /// Rebuild the grid from scratch: canvas first, then active nodes in
    /// z-order (least recently modified first, ids break ties).
    pub fn render_full(&self) -> Grid {
        let mut grid = self.canvas.clone();
        let mut order: Vec<usize> = (0..self.nodes.len())
            .filter(|&i| self.nodes[i].active)
            .collect();
        order.sort_by_key(|&i| (self.zorder[i], i));
        for i in order {
            for &(r, c, color) in &self.nodes[i].cells {
                grid.set(r, c, color);
            }
        }
        grid
    }

    fn re_render(&mut self) {
        self.rendered = self.render_full();
    }

    /// Mark a node as most recently modified and refresh the rendering.
    pub fn touch(&mut self, idx: usize) {
        self.zctr += 1;
        self.zorder[idx] = self.zctr;
        self.version += 1;
        self.re_render();
    }

    pub fn touch_many(&mut self, idxs: &[usize]) {
        for &idx in idxs {
            self.zctr += 1;
            self.zorder[idx] = self.zctr;
        }
        self.version += 1;
        self.re_render();
    }

    pub fn push_aux_node(&mut self, cells: Vec<(usize, usize, Color)>, color: Option<Color>) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node { id, cells, color, active: true });
        self.zorder.push(0);
        id
    }

    /// Node flags of the current state, recomputed when the state changed.
    pub fn flags(&self) -> Rc<GraphFlags> {
        let mut cache = self.flags_cache.borrow_mut();
        if let Some((version, flags)) = cache.as_ref() {
            if *version == self.version {
                return Rc::clone(flags);
            }
        }
        let flags = Rc::new(compute_flags(
            &self.nodes,
            self.dims,
            self.background,
            &self.rendered,
        ));
        *cache = Some((self.version, Rc::clone(&flags)));
        flags
    }

    /// Occupancy of active nodes, with some node indices masked out.
    pub fn occupied_except(&self, exclude: &[usize]) -> Vec<bool> {
        let (h, w) = self.dims;
        let mut occ = vec![false; h * w];
        for (i, node) in self.nodes.iter().enumerate() {
            if !node.active || exclude.contains(&i) {
                continue;
            }
            for &(r, c, _) in &node.cells {
                occ[r * w + c] = true;
            }
        }
        occ
    }

    /// Active node indices whose pixels intersect `cells`, minus exclusions.
    pub fn overlapping_nodes(&self, cells: &[(usize, usize, Color)], exclude: &[usize]) -> Vec<usize> {
        let (h, w) = self.dims;
        let mut mask = vec![false; h * w];
        for &(r, c, _) in cells {
            mask[r * w + c] = true;
        }
        (0..self.nodes.len())
            .filter(|&i| self.nodes[i].active && !exclude.contains(&i))
            .filter(|&i| self.nodes[i].cells.iter().any(|&(r, c, _)| mask[r * w + c]))
            .collect()
    }

    /// Invariant check used by tests: the stored rendering always equals a
    /// from-scratch rendering.
    pub fn render_consistent(&self) -> bool {
        crate::arc_io::grids_equal(&self.rendered, &self.render_full())
    }
}
