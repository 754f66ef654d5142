//! Diagnostics evaluated on a stabilizer state: boundary spin-glass order,
//! ensemble summaries, topological entanglement entropy and string operators.
//!
//! Every expectation value is a squared one. In a stabilizer state
//! `⟨P⟩² ∈ {0, 1}`, equal to 1 exactly when `±P` is in the group, so all
//! correlators reduce to membership tests.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::lattice::{BoundaryTag, LatticeGeometry};
use crate::pauli::{Basis, PauliString};
use crate::tableau::{StabilizerBasis, StabilizerTableau};

fn boundary_links(geometry: &LatticeGeometry, basis: Basis) -> Vec<usize> {
    match basis {
        Basis::Z => geometry.rough_links(),
        Basis::X => geometry.smooth_links(),
    }
}

/// Edwards-Anderson pair correlator `⟨P P'⟩² − ⟨P⟩²⟨P'⟩²` for single-link
/// Paulis of `basis` on two distinct links of the matching boundary (rough
/// for Z, smooth for X).
pub fn sg_correlation(
    tableau: &StabilizerTableau,
    geometry: &LatticeGeometry,
    a: usize,
    b: usize,
    basis: Basis,
) -> Result<u8> {
    if a == b {
        return Err(Error::InvalidArgument(format!("correlator needs two distinct links, got {a} twice")));
    }
    let expected = match basis {
        Basis::Z => BoundaryTag::RoughDangling,
        Basis::X => BoundaryTag::SmoothBoundary,
    };
    for l in [a, b] {
        if geometry.link(l)?.tag != expected {
            return Err(Error::InvalidArgument(format!("link {l} is not on the {expected:?} boundary")));
        }
    }
    let group = tableau.basis();
    Ok(pair_correlation(&group, geometry.num_qubits(), a, b, basis))
}

fn pair_correlation(group: &StabilizerBasis, n: usize, a: usize, b: usize, basis: Basis) -> u8 {
    let single = |l| group.contains(&PauliString::single(n, basis, l));
    let pair = group.contains(&PauliString::from_support(n, basis, [a, b]));
    let value = pair as i8 - (single(a) && single(b)) as i8;
    debug_assert!(value >= 0, "pair membership is implied by both singles");
    value as u8
}

/// Number of ordered pairs `(ℓ, ℓ')`, `ℓ ≠ ℓ'`, on the boundary selected by
/// `basis` whose correlator is 1. The order parameter is this count over `L_x`.
pub fn sg_pairs(tableau: &StabilizerTableau, geometry: &LatticeGeometry, basis: Basis) -> usize {
    sg_pairs_with(&tableau.basis(), geometry, basis)
}

/// As [`sg_pairs`], reusing a precomputed group basis.
pub fn sg_pairs_with(group: &StabilizerBasis, geometry: &LatticeGeometry, basis: Basis) -> usize {
    let n = geometry.num_qubits();
    let links = boundary_links(geometry, basis);
    let single: Vec<bool> = links.iter().map(|&l| group.contains(&PauliString::single(n, basis, l))).collect();
    let mut count = 0;
    for i in 0..links.len() {
        for j in i + 1..links.len() {
            if single[i] && single[j] {
                continue;
            }
            if group.contains(&PauliString::from_support(n, basis, [links[i], links[j]])) {
                count += 2;
            }
        }
    }
    count
}

/// Spin-glass order `χ = (1/L_x) Σ_{ℓ≠ℓ'} C(ℓ, ℓ')`, in `[0, L_x − 1]`.
pub fn sg_order(tableau: &StabilizerTableau, geometry: &LatticeGeometry, basis: Basis) -> f64 {
    sg_pairs(tableau, geometry, basis) as f64 / geometry.width() as f64
}

/// Mean, unbiased sample variance, and variance divided by `L_x`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct EnsembleStats {
    pub mean: f64,
    pub variance: f64,
    pub variance_per_width: f64,
}

pub fn ensemble_stats(values: &[f64], width: usize) -> Result<EnsembleStats> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("ensemble statistics of an empty list".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let variance =
        if values.len() > 1 { values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    Ok(EnsembleStats { mean, variance, variance_per_width: variance / width as f64 })
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum PartitionKind {
    /// Contractible bulk block cut into three regions meeting at a point.
    KitaevPreskill,
    /// Non-contractible band around the cylinder cut into three arcs.
    LevinWen,
}

/// Placement of a partition on the vertex grid. Rows and columns are
/// inclusive vertex coordinates; a link belongs to the block when both of
/// its endpoints do.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum PartitionSpec {
    /// Block of vertex columns `x0..=x1` (no wrap) and rows `y0..=y1`. The
    /// upper half is split into left (A) and right (B) quadrants; the lower
    /// half is C.
    Block { x0: usize, x1: usize, y0: usize, y1: usize },
    /// Band of vertex rows `y0..=y1` around the whole cylinder, split into
    /// three arcs of near-equal width starting at column `offset`.
    Band { y0: usize, y1: usize, offset: usize },
}

/// Three disjoint bulk regions `A`, `B`, `C` of link indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub kind: PartitionKind,
    pub regions: [Vec<usize>; 3],
}

impl Partition {
    /// Default placement: for the block, the centered block with a two-row
    /// (and two-column) margin; for the band, rows `L_y/2 − 1 ..= L_y/2 + 1`.
    pub fn default_for(geometry: &LatticeGeometry, kind: PartitionKind) -> Result<Self> {
        let (w, h) = (geometry.width(), geometry.height());
        let spec = match kind {
            PartitionKind::KitaevPreskill => {
                if w < 6 || h < 6 {
                    return Err(Error::InvalidPartition(format!("no default block on a {w}x{h} lattice")));
                }
                PartitionSpec::Block { x0: 2, x1: w - 3, y0: 2, y1: h - 3 }
            }
            PartitionKind::LevinWen => {
                if w < 3 || h < 6 {
                    return Err(Error::InvalidPartition(format!("no default band on a {w}x{h} lattice")));
                }
                PartitionSpec::Band { y0: h / 2 - 1, y1: h / 2 + 1, offset: 0 }
            }
        };
        Self::build(geometry, spec)
    }

    pub fn build(geometry: &LatticeGeometry, spec: PartitionSpec) -> Result<Self> {
        let (w, h) = (geometry.width(), geometry.height());
        let rows_ok = |y0: usize, y1: usize| y0 >= 1 && y1 + 2 <= h && y0 < y1;
        match spec {
            PartitionSpec::Block { x0, x1, y0, y1 } => {
                if !rows_ok(y0, y1) {
                    return Err(Error::InvalidPartition(format!(
                        "block rows {y0}..={y1} must lie in 1..={} and span two rows",
                        h - 2
                    )));
                }
                if x1 <= x0 || x1 >= w || x1 - x0 + 1 > w - 2 {
                    return Err(Error::InvalidPartition(format!(
                        "block columns {x0}..={x1} must span two columns and leave two free on a width-{w} cylinder"
                    )));
                }
                // doubled coordinates: h(x, y) sits at (2x+1, 2y), v(x, y) at (2x, 2y+1)
                let (xmid, ymid) = (x0 + x1, y0 + y1);
                let mut regions: [Vec<usize>; 3] = Default::default();
                let mut place = |link: usize, dx: usize, dy: usize| {
                    let r = if dy < ymid {
                        2
                    } else if dx < xmid {
                        0
                    } else {
                        1
                    };
                    regions[r].push(link);
                };
                for y in y0..=y1 {
                    for x in x0..x1 {
                        place(geometry.h(x, y), 2 * x + 1, 2 * y);
                    }
                    if y < y1 {
                        for x in x0..=x1 {
                            place(geometry.v(x, y), 2 * x, 2 * y + 1);
                        }
                    }
                }
                Self::from_regions(geometry, PartitionKind::KitaevPreskill, regions)
            }
            PartitionSpec::Band { y0, y1, offset } => {
                if !rows_ok(y0, y1) {
                    return Err(Error::InvalidPartition(format!(
                        "band rows {y0}..={y1} must lie in 1..={} and span two rows",
                        h - 2
                    )));
                }
                if w < 3 {
                    return Err(Error::InvalidPartition("band needs at least three columns".into()));
                }
                let arc_of = arc_assignment(w);
                let mut regions: [Vec<usize>; 3] = Default::default();
                for y in y0..=y1 {
                    for x in 0..w {
                        let arc = arc_of[(x + w - offset % w) % w];
                        regions[arc].push(geometry.h(x, y));
                        if y < y1 {
                            regions[arc].push(geometry.v(x, y));
                        }
                    }
                }
                Self::from_regions(geometry, PartitionKind::LevinWen, regions)
            }
        }
    }

    /// Validate user-supplied regions: disjoint, in range, off both boundaries.
    pub fn from_regions(geometry: &LatticeGeometry, kind: PartitionKind, mut regions: [Vec<usize>; 3]) -> Result<Self> {
        let mut seen = HashSet::new();
        for r in regions.iter_mut() {
            if r.is_empty() {
                return Err(Error::InvalidPartition("empty region".into()));
            }
            r.sort_unstable();
            for &l in r.iter() {
                if geometry.link(l)?.tag != BoundaryTag::Bulk {
                    return Err(Error::InvalidPartition(format!("link {l} touches a boundary")));
                }
                if !seen.insert(l) {
                    return Err(Error::InvalidPartition(format!("link {l} in more than one region")));
                }
            }
        }
        Ok(Self { kind, regions })
    }

    /// The partition translated by `dx` columns around the cylinder.
    pub fn translated(&self, geometry: &LatticeGeometry, dx: usize) -> Self {
        let regions = self.regions.clone().map(|r| {
            let mut v: Vec<usize> = r.into_iter().map(|l| geometry.translate_link(l, dx)).collect();
            v.sort_unstable();
            v
        });
        Self { kind: self.kind, regions }
    }
}

/// Column-to-arc map splitting `w` columns into three contiguous arcs whose
/// widths differ by at most one (larger arcs first).
fn arc_assignment(w: usize) -> Vec<usize> {
    let base = w / 3;
    let extra = w % 3;
    let mut out = Vec::with_capacity(w);
    for arc in 0..3 {
        let len = base + usize::from(arc < extra);
        out.extend(std::iter::repeat_n(arc, len));
    }
    out
}

/// Topological entanglement entropy
/// `S_A + S_B + S_C − S_AB − S_BC − S_AC + S_ABC` in bits.
pub fn tee(tableau: &StabilizerTableau, partition: &Partition) -> Result<i64> {
    let [a, b, c] = &partition.regions;
    let union = |parts: &[&Vec<usize>]| -> Vec<usize> { parts.iter().flat_map(|p| p.iter().copied()).collect() };
    let s = |region: &[usize]| tableau.subsystem_entropy(region).map(|v| v as i64);
    Ok(s(a)? + s(b)? + s(c)? - s(&union(&[a, b]))? - s(&union(&[b, c]))? - s(&union(&[a, c]))? + s(&union(&[a, b, c]))?)
}

/// String operators whose group membership diagnoses one-form symmetry and
/// boundary order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StringOperator {
    /// Closed loop. `Basis::Z`: Z on a loop of lattice links (every vertex of
    /// even degree, no dangling links). `Basis::X`: X on the links crossed by
    /// a closed dual loop (every plaquette touched an even number of times,
    /// no smooth-boundary links).
    ClosedLoop { basis: Basis, links: Vec<usize> },
    /// Z string on lattice links ending on two rough dangling links.
    RoughOpen { links: Vec<usize> },
    /// X string on links crossed by a dual path ending on two smooth-boundary links.
    SmoothOpen { links: Vec<usize> },
    /// `Z_{r1} [∏_{Γ_b} Z] Z_{r2}`: two dangling links joined by a bulk string.
    Nlgio2 { ends: (usize, usize), bulk: Vec<usize> },
}

impl StringOperator {
    /// Check the path shape against the lattice and assemble the Pauli product.
    pub fn to_pauli(&self, geometry: &LatticeGeometry) -> Result<PauliString> {
        let n = geometry.num_qubits();
        let check_links = |links: &[usize]| -> Result<()> {
            if links.is_empty() {
                return Err(Error::MalformedPath("empty path".into()));
            }
            let mut seen = HashSet::new();
            for &l in links {
                geometry.link(l).map_err(|_| Error::MalformedPath(format!("link {l} out of range")))?;
                if !seen.insert(l) {
                    return Err(Error::MalformedPath(format!("link {l} repeated")));
                }
            }
            Ok(())
        };
        let vertex_parity_even = |links: &[usize]| {
            let mut deg = vec![0u8; geometry.width() * geometry.height()];
            for &l in links {
                for v in geometry.link_vertices(l) {
                    deg[v] ^= 1;
                }
            }
            deg.iter().all(|&d| d == 0)
        };
        let face_parity_even = |links: &[usize]| {
            let mut deg = vec![0u8; geometry.num_plaquettes()];
            for &l in links {
                for f in geometry.link_faces(l) {
                    deg[f] ^= 1;
                }
            }
            deg.iter().all(|&d| d == 0)
        };
        let count_tag =
            |links: &[usize], tag: BoundaryTag| links.iter().filter(|&&l| geometry.links()[l].tag == tag).count();

        match self {
            StringOperator::ClosedLoop { basis: Basis::Z, links } => {
                check_links(links)?;
                if count_tag(links, BoundaryTag::RoughDangling) != 0 || !vertex_parity_even(links) {
                    return Err(Error::MalformedPath("not a closed lattice loop".into()));
                }
                Ok(PauliString::from_support(n, Basis::Z, links.iter().copied()))
            }
            StringOperator::ClosedLoop { basis: Basis::X, links } => {
                check_links(links)?;
                if count_tag(links, BoundaryTag::SmoothBoundary) != 0 || !face_parity_even(links) {
                    return Err(Error::MalformedPath("not a closed dual loop".into()));
                }
                Ok(PauliString::from_support(n, Basis::X, links.iter().copied()))
            }
            StringOperator::RoughOpen { links } => {
                check_links(links)?;
                if count_tag(links, BoundaryTag::RoughDangling) != 2 || !vertex_parity_even(links) {
                    return Err(Error::MalformedPath("not a string between two rough dangling links".into()));
                }
                Ok(PauliString::from_support(n, Basis::Z, links.iter().copied()))
            }
            StringOperator::SmoothOpen { links } => {
                check_links(links)?;
                if count_tag(links, BoundaryTag::SmoothBoundary) != 2 || !face_parity_even(links) {
                    return Err(Error::MalformedPath("not a dual string between two smooth-boundary links".into()));
                }
                Ok(PauliString::from_support(n, Basis::X, links.iter().copied()))
            }
            StringOperator::Nlgio2 { ends, bulk } => {
                for e in [ends.0, ends.1] {
                    if !matches!(geometry.link(e).map(|l| l.tag), Ok(BoundaryTag::RoughDangling)) {
                        return Err(Error::MalformedPath(format!("endpoint {e} is not a rough dangling link")));
                    }
                }
                if bulk.iter().any(|&l| matches!(geometry.link(l).map(|d| d.tag), Ok(BoundaryTag::RoughDangling))) {
                    return Err(Error::MalformedPath("bulk string contains a dangling link".into()));
                }
                let mut all = bulk.clone();
                all.extend([ends.0, ends.1]);
                StringOperator::RoughOpen { links: all }.to_pauli(geometry)
            }
        }
    }
}

/// 1 if the string operator is in the stabilizer group (squared expectation 1), else 0.
pub fn string_order(tableau: &StabilizerTableau, geometry: &LatticeGeometry, op: &StringOperator) -> Result<u8> {
    let p = op.to_pauli(geometry)?;
    Ok(u8::from(tableau.contains(&p)))
}

/// Z string joining the dangling links of columns `x1 < x2`: down both
/// columns to vertex row `depth`, then along that row.
pub fn rough_string(geometry: &LatticeGeometry, x1: usize, x2: usize, depth: usize) -> Result<StringOperator> {
    let (w, h) = (geometry.width(), geometry.height());
    if !(x1 < x2 && x2 < w && depth < h) {
        return Err(Error::MalformedPath(format!("cannot route columns {x1}, {x2} at depth {depth}")));
    }
    let ends = (geometry.v(x1, h - 1), geometry.v(x2, h - 1));
    let mut bulk = Vec::new();
    for y in depth..h - 1 {
        bulk.push(geometry.v(x1, y));
        bulk.push(geometry.v(x2, y));
    }
    bulk.extend((x1..x2).map(|x| geometry.h(x, depth)));
    Ok(StringOperator::Nlgio2 { ends, bulk })
}

/// X dual string joining the smooth-boundary links of columns `x1 < x2`:
/// up through the faces of both columns to face row `height`, then across.
pub fn smooth_string(geometry: &LatticeGeometry, x1: usize, x2: usize, height: usize) -> Result<StringOperator> {
    let (w, h) = (geometry.width(), geometry.height());
    if !(x1 < x2 && x2 < w && height < h) {
        return Err(Error::MalformedPath(format!("cannot route columns {x1}, {x2} at height {height}")));
    }
    let mut links = Vec::new();
    for y in 0..=height {
        links.push(geometry.h(x1, y));
        links.push(geometry.h(x2, y));
    }
    links.extend((x1 + 1..=x2).map(|x| geometry.v(x, height)));
    Ok(StringOperator::SmoothOpen { links })
}
