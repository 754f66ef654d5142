//! Cylinder lattice: periodic in x, smooth boundary at the bottom, rough
//! boundary (dangling vertical links) at the top.
//!
//! Layout, for width `Lx` and height `Ly`:
//!
//! * horizontal link `h(x, y)` joins vertices `(x, y)` and `(x+1 mod Lx, y)`
//!   for rows `y = 0..Ly`; row 0 is the smooth boundary;
//! * vertical link `v(x, y)` joins `(x, y)` and `(x, y+1)` for
//!   `y = 0..Ly-1`, and `v(x, Ly-1)` dangles above the top row;
//! * stars sit on vertices of rows `1..Ly` (four legs each); the row-0
//!   vertices carry three-leg boundary stars kept in a separate registry;
//! * plaquette `(x, y)` is the face with lower-left corner `(x, y)`; in the
//!   top row it is the half-plaquette `{h(x, Ly-1), v(x, Ly-1), v(x+1, Ly-1)}`.
//!
//! All registries are row-major with the column index running fastest. Link
//! `h(x, y)` has index `2·Lx·y + x` and `v(x, y)` has index `2·Lx·y + Lx + x`.

use std::fmt;

use crate::error::{Error, Result};
use crate::pauli::{Basis, PauliString};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    Bulk,
    RoughDangling,
    SmoothBoundary,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinkDescriptor {
    pub index: usize,
    pub orientation: Orientation,
    pub column: usize,
    pub row: usize,
    pub tag: BoundaryTag,
}

/// Indexed cylinder lattice. Immutable once built.
#[derive(Clone, Debug)]
pub struct LatticeGeometry {
    width: usize,
    height: usize,
    links: Vec<LinkDescriptor>,
    stars: Vec<Vec<usize>>,
    plaquettes: Vec<Vec<usize>>,
    boundary_stars: Vec<Vec<usize>>,
}

impl LatticeGeometry {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width < 2 || height < 2 {
            return Err(Error::InvalidGeometry { width, height });
        }
        let mut links = Vec::with_capacity(2 * width * height);
        for y in 0..height {
            for x in 0..width {
                links.push(LinkDescriptor {
                    index: links.len(),
                    orientation: Orientation::Horizontal,
                    column: x,
                    row: y,
                    tag: if y == 0 { BoundaryTag::SmoothBoundary } else { BoundaryTag::Bulk },
                });
            }
            for x in 0..width {
                links.push(LinkDescriptor {
                    index: links.len(),
                    orientation: Orientation::Vertical,
                    column: x,
                    row: y,
                    tag: if y + 1 == height { BoundaryTag::RoughDangling } else { BoundaryTag::Bulk },
                });
            }
        }

        let mut g =
            Self { width, height, links, stars: Vec::new(), plaquettes: Vec::new(), boundary_stars: Vec::new() };
        let left = |x: usize| (x + width - 1) % width;
        let right = |x: usize| (x + 1) % width;

        g.boundary_stars = (0..width).map(|x| vec![g.h(left(x), 0), g.h(x, 0), g.v(x, 0)]).collect();
        g.stars = (1..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| vec![g.h(left(x), y), g.h(x, y), g.v(x, y - 1), g.v(x, y)])
            .collect();
        g.plaquettes = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| {
                if y + 1 < height {
                    vec![g.h(x, y), g.v(x, y), g.v(right(x), y), g.h(x, y + 1)]
                } else {
                    vec![g.h(x, y), g.v(x, y), g.v(right(x), y)]
                }
            })
            .collect();
        Ok(g)
    }

    /// Index of horizontal link `h(x, y)`; `x` wraps, `y` must be in range.
    pub fn h(&self, x: usize, y: usize) -> usize {
        debug_assert!(y < self.height);
        2 * self.width * y + x % self.width
    }

    /// Index of vertical link `v(x, y)`; `x` wraps, `y` must be in range.
    pub fn v(&self, x: usize, y: usize) -> usize {
        debug_assert!(y < self.height);
        2 * self.width * y + self.width + x % self.width
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn num_qubits(&self) -> usize {
        self.links.len()
    }

    pub fn links(&self) -> &[LinkDescriptor] {
        &self.links
    }

    pub fn link(&self, index: usize) -> Result<&LinkDescriptor> {
        self.links.get(index).ok_or(Error::IndexOutOfRange { kind: "link", index, len: self.links.len() })
    }

    pub fn link_index(&self, orientation: Orientation, column: usize, row: usize) -> Option<usize> {
        if column >= self.width || row >= self.height {
            return None;
        }
        Some(match orientation {
            Orientation::Horizontal => self.h(column, row),
            Orientation::Vertical => self.v(column, row),
        })
    }

    pub fn num_stars(&self) -> usize {
        self.stars.len()
    }

    pub fn num_plaquettes(&self) -> usize {
        self.plaquettes.len()
    }

    pub fn star_links(&self) -> &[Vec<usize>] {
        &self.stars
    }

    pub fn plaquette_links(&self) -> &[Vec<usize>] {
        &self.plaquettes
    }

    pub fn boundary_star_links(&self) -> &[Vec<usize>] {
        &self.boundary_stars
    }

    /// Links tagged `tag`, in index order.
    pub fn links_tagged(&self, tag: BoundaryTag) -> Vec<usize> {
        self.links.iter().filter(|l| l.tag == tag).map(|l| l.index).collect()
    }

    /// The dangling links of the rough boundary, ordered by column.
    pub fn rough_links(&self) -> Vec<usize> {
        self.links_tagged(BoundaryTag::RoughDangling)
    }

    /// The horizontal links of the smooth boundary, ordered by column.
    pub fn smooth_links(&self) -> Vec<usize> {
        self.links_tagged(BoundaryTag::SmoothBoundary)
    }

    pub fn star_support(&self, id: usize) -> Result<PauliString> {
        let links =
            self.stars.get(id).ok_or(Error::IndexOutOfRange { kind: "star", index: id, len: self.stars.len() })?;
        Ok(PauliString::from_support(self.num_qubits(), Basis::X, links.iter().copied()))
    }

    pub fn plaquette_support(&self, id: usize) -> Result<PauliString> {
        let links = self.plaquettes.get(id).ok_or(Error::IndexOutOfRange {
            kind: "plaquette",
            index: id,
            len: self.plaquettes.len(),
        })?;
        Ok(PauliString::from_support(self.num_qubits(), Basis::Z, links.iter().copied()))
    }

    pub fn boundary_star_support(&self, column: usize) -> Result<PauliString> {
        let links = self.boundary_stars.get(column).ok_or(Error::IndexOutOfRange {
            kind: "boundary star",
            index: column,
            len: self.boundary_stars.len(),
        })?;
        Ok(PauliString::from_support(self.num_qubits(), Basis::X, links.iter().copied()))
    }

    /// Vertex ids `y·Lx + x` at the ends of a link. Dangling links have one.
    pub fn link_vertices(&self, index: usize) -> Vec<usize> {
        let l = &self.links[index];
        let (x, y) = (l.column, l.row);
        let vid = |x: usize, y: usize| y * self.width + x % self.width;
        match l.orientation {
            Orientation::Horizontal => vec![vid(x, y), vid(x + 1, y)],
            Orientation::Vertical if y + 1 < self.height => vec![vid(x, y), vid(x, y + 1)],
            Orientation::Vertical => vec![vid(x, y)],
        }
    }

    /// Plaquette ids adjacent to a link. Smooth-boundary links have one.
    pub fn link_faces(&self, index: usize) -> Vec<usize> {
        let l = &self.links[index];
        let (x, y) = (l.column, l.row);
        let pid = |x: usize, y: usize| y * self.width + x % self.width;
        match l.orientation {
            Orientation::Horizontal if y == 0 => vec![pid(x, 0)],
            Orientation::Horizontal => vec![pid(x, y - 1), pid(x, y)],
            Orientation::Vertical => vec![pid(x + self.width - 1, y), pid(x, y)],
        }
    }

    /// Image of a link under the electric-magnetic duality: the lattice is
    /// replaced by its dual and reflected top to bottom, which exchanges
    /// stars with plaquettes and the rough boundary with the smooth one.
    pub fn dual_link(&self, index: usize) -> usize {
        let l = &self.links[index];
        let y = self.height - 1 - l.row;
        match l.orientation {
            Orientation::Horizontal => self.v(l.column, y),
            Orientation::Vertical => self.h(l.column + self.width - 1, y),
        }
    }

    /// Image of a link under translation by one column.
    pub fn translate_link(&self, index: usize, dx: usize) -> usize {
        let l = &self.links[index];
        match l.orientation {
            Orientation::Horizontal => self.h(l.column + dx, l.row),
            Orientation::Vertical => self.v(l.column + dx, l.row),
        }
    }

    /// Plain-text listing, one line per link: `index orientation x y tag`.
    pub fn dump(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for LatticeGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.links {
            let o = match l.orientation {
                Orientation::Horizontal => "h",
                Orientation::Vertical => "v",
            };
            let t = match l.tag {
                BoundaryTag::Bulk => "bulk",
                BoundaryTag::RoughDangling => "rough",
                BoundaryTag::SmoothBoundary => "smooth",
            };
            writeln!(f, "{} {} {} {} {}", l.index, o, l.column, l.row, t)?;
        }
        Ok(())
    }
}
