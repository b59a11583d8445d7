//! Triangulations of the body, boundary partition and degree-of-freedom maps.
//!
//! Nodes carry P1 basis functions. Scalar unknowns (temperature, potential)
//! live on the nodes off the Dirichlet boundary; vector unknowns
//! (displacement, velocity) use two interleaved components per such node.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::assembly;
use crate::error::{Error, Result};
use crate::linalg::{self, PowerIterationOptions};

pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryTag {
    Dirichlet,
    Neumann,
    Contact,
}

impl BoundaryTag {
    pub fn letter(self) -> char {
        match self {
            BoundaryTag::Dirichlet => 'D',
            BoundaryTag::Neumann => 'N',
            BoundaryTag::Contact => 'C',
        }
    }
}

impl FromStr for BoundaryTag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "D" => Ok(BoundaryTag::Dirichlet),
            "N" => Ok(BoundaryTag::Neumann),
            "C" => Ok(BoundaryTag::Contact),
            other => Err(format!("unknown boundary tag `{other}` (expected D, N or C)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub tag: BoundaryTag,
    /// Outward unit normal.
    pub normal: Point,
    /// Owning triangle.
    pub triangle: usize,
}

impl BoundaryEdge {
    /// Unit tangent, the normal rotated a quarter turn counterclockwise.
    pub fn tangent(&self) -> Point {
        [-self.normal[1], self.normal[0]]
    }
}

/// Tags for the four sides of the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SideTags {
    pub left: BoundaryTag,
    pub right: BoundaryTag,
    pub bottom: BoundaryTag,
    pub top: BoundaryTag,
}

impl SideTags {
    pub fn uniform(tag: BoundaryTag) -> Self {
        SideTags {
            left: tag,
            right: tag,
            bottom: tag,
            top: tag,
        }
    }

    /// Electrodes (clamped, held at fixed potential) on the left and right,
    /// contact on the bottom, free surface on top.
    pub fn thermistor() -> Self {
        SideTags {
            left: BoundaryTag::Dirichlet,
            right: BoundaryTag::Dirichlet,
            bottom: BoundaryTag::Contact,
            top: BoundaryTag::Neumann,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<BoundaryEdge>,
}

fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl Mesh {
    /// Builds and validates a mesh. Triangles must be counterclockwise; the
    /// tagged edges must be exactly the boundary edges of the triangulation.
    pub fn new(
        nodes: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        tagged_edges: Vec<([usize; 2], BoundaryTag)>,
    ) -> Result<Mesh> {
        if let Some(i) = nodes.iter().position(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::InvalidMesh(format!("node {i} has non-finite coordinates")));
        }
        let n = nodes.len();
        let mut owners: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&i| i >= n) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t}: node index {bad} out of range ({n} nodes)"
                )));
            }
            if signed_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]) <= 0.0 {
                return Err(Error::Orientation(t));
            }
            for k in 0..3 {
                owners
                    .entry(edge_key(tri[k], tri[(k + 1) % 3]))
                    .or_default()
                    .push(t);
            }
        }
        if let Some((key, _)) = owners.iter().find(|(_, o)| o.len() > 2) {
            return Err(Error::InvalidMesh(format!(
                "edge {key:?} is shared by more than two triangles"
            )));
        }

        let mut seen = BTreeMap::new();
        let mut edges = Vec::with_capacity(tagged_edges.len());
        for (e, (pair, tag)) in tagged_edges.into_iter().enumerate() {
            if let Some(&bad) = pair.iter().find(|&&i| i >= n) {
                return Err(Error::InvalidMesh(format!(
                    "edge {e}: node index {bad} out of range ({n} nodes)"
                )));
            }
            let key = edge_key(pair[0], pair[1]);
            if seen.insert(key, e).is_some() {
                return Err(Error::InvalidMesh(format!("edge {e} is tagged twice")));
            }
            let triangle = match owners.get(&key).map(Vec::as_slice) {
                Some([t]) => *t,
                _ => {
                    return Err(Error::InvalidMesh(format!(
                        "edge {e} ({} {}) is not a boundary edge of the triangulation",
                        pair[0], pair[1]
                    )))
                }
            };
            let tri = triangles[triangle];
            let third = *tri
                .iter()
                .find(|&&i| i != pair[0] && i != pair[1])
                .expect("triangle has a vertex off the edge");
            let (a, b, c) = (nodes[pair[0]], nodes[pair[1]], nodes[third]);
            let d = [b[0] - a[0], b[1] - a[1]];
            let len = d[0].hypot(d[1]);
            let mut normal = [d[1] / len, -d[0] / len];
            if normal[0] * (c[0] - a[0]) + normal[1] * (c[1] - a[1]) > 0.0 {
                normal = [-normal[0], -normal[1]];
            }
            edges.push(BoundaryEdge {
                nodes: pair,
                tag,
                normal,
                triangle,
            });
        }
        if let Some((key, _)) = owners
            .iter()
            .find(|(key, o)| o.len() == 1 && !seen.contains_key(key))
        {
            return Err(Error::InvalidMesh(format!(
                "boundary edge {} {} carries no tag",
                key.0, key.1
            )));
        }
        if !edges.iter().any(|e| e.tag == BoundaryTag::Dirichlet) {
            return Err(Error::EmptyDirichlet);
        }
        Ok(Mesh {
            nodes,
            triangles,
            edges,
        })
    }

    /// Structured triangulation of `[0,1]²` with `n` cells per side, each cell
    /// split along its rising diagonal.
    pub fn unit_square(n: usize, tags: SideTags) -> Result<Mesh> {
        if n == 0 {
            return Err(Error::InvalidMesh("unit square needs n >= 1 subdivisions".into()));
        }
        let id = |i: usize, j: usize| j * (n + 1) + i;
        let nf = n as f64;
        let mut nodes = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                nodes.push([i as f64 / nf, j as f64 / nf]);
            }
        }
        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        let mut edges = Vec::with_capacity(4 * n);
        for i in 0..n {
            edges.push(([id(i, 0), id(i + 1, 0)], tags.bottom));
        }
        for j in 0..n {
            edges.push(([id(n, j), id(n, j + 1)], tags.right));
        }
        for i in (0..n).rev() {
            edges.push(([id(i + 1, n), id(i, n)], tags.top));
        }
        for j in (0..n).rev() {
            edges.push(([id(0, j + 1), id(0, j)], tags.left));
        }
        Mesh::new(nodes, triangles, edges)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Mesh> {
        let text = std::fs::read_to_string(path)?;
        Mesh::parse(&text)
    }

    /// Parses the plain-text mesh format:
    ///
    /// ```text
    /// nodes <N> triangles <T> edges <E>
    /// x y            (N lines)
    /// i j k          (T lines, 0-based, counterclockwise)
    /// i j TAG        (E lines, TAG one of D N C)
    /// ```
    ///
    /// `#` starts a comment.
    pub fn parse(text: &str) -> Result<Mesh> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let err = |line: usize, message: String| Error::MeshParse { line, message };

        let (hline, header) = lines
            .next()
            .ok_or_else(|| err(0, "missing header line".into()))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        let counts = match h.as_slice() {
            ["nodes", n, "triangles", t, "edges", e] => {
                let p = |s: &str| {
                    s.parse::<usize>()
                        .map_err(|_| err(hline, format!("bad count `{s}`")))
                };
                (p(n)?, p(t)?, p(e)?)
            }
            _ => {
                return Err(err(
                    hline,
                    "expected `nodes <N> triangles <T> edges <E>`".into(),
                ))
            }
        };
        let (nn, nt, ne) = counts;

        let mut next_fields = |what: &str, idx: usize, arity: usize| {
            let (line, l) = lines
                .next()
                .ok_or_else(|| err(0, format!("unexpected end of file reading {what} {idx}")))?;
            let f: Vec<String> = l.split_whitespace().map(str::to_owned).collect();
            if f.len() != arity {
                return Err(err(
                    line,
                    format!("{what} {idx}: expected {arity} fields, found {}", f.len()),
                ));
            }
            Ok((line, f))
        };

        let mut nodes = Vec::with_capacity(nn);
        for i in 0..nn {
            let (line, f) = next_fields("node", i, 2)?;
            let x: f64 = f[0]
                .parse()
                .map_err(|_| err(line, format!("node {i}: bad coordinate `{}`", f[0])))?;
            let y: f64 = f[1]
                .parse()
                .map_err(|_| err(line, format!("node {i}: bad coordinate `{}`", f[1])))?;
            nodes.push([x, y]);
        }
        let index = |line: usize, what: &str, idx: usize, s: &str| -> Result<usize> {
            let v: usize = s
                .parse()
                .map_err(|_| err(line, format!("{what} {idx}: bad node index `{s}`")))?;
            if v >= nn {
                return Err(err(
                    line,
                    format!("{what} {idx}: node index {v} out of range ({nn} nodes)"),
                ));
            }
            Ok(v)
        };
        let mut triangles = Vec::with_capacity(nt);
        let mut tri_lines = Vec::with_capacity(nt);
        for t in 0..nt {
            let (line, f) = next_fields("triangle", t, 3)?;
            triangles.push([
                index(line, "triangle", t, &f[0])?,
                index(line, "triangle", t, &f[1])?,
                index(line, "triangle", t, &f[2])?,
            ]);
            tri_lines.push(line);
        }
        let mut edges = Vec::with_capacity(ne);
        for e in 0..ne {
            let (line, f) = next_fields("edge", e, 3)?;
            let a = index(line, "edge", e, &f[0])?;
            let b = index(line, "edge", e, &f[1])?;
            let tag: BoundaryTag = f[2].parse().map_err(|m| err(line, format!("edge {e}: {m}")))?;
            edges.push(([a, b], tag));
        }
        if let Some((line, l)) = lines.next() {
            return Err(err(line, format!("trailing content `{l}`")));
        }
        Mesh::new(nodes, triangles, edges).map_err(|e| match e {
            Error::Orientation(t) => err(
                tri_lines[t],
                format!("triangle {t}: inconsistent orientation (non-positive signed area)"),
            ),
            other => other,
        })
    }

    /// Serializes into the format read by [`Mesh::parse`].
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "nodes {} triangles {} edges {}\n",
            self.nodes.len(),
            self.triangles.len(),
            self.edges.len()
        );
        for p in &self.nodes {
            let _ = writeln!(s, "{:e} {:e}", p[0], p[1]);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
        }
        for e in &self.edges {
            let _ = writeln!(s, "{} {} {}", e.nodes[0], e.nodes[1], e.tag.letter());
        }
        s
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.edges
    }

    pub fn edges_tagged(&self, tag: BoundaryTag) -> impl Iterator<Item = &BoundaryEdge> {
        self.edges.iter().filter(move |e| e.tag == tag)
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        signed_area(self.nodes[a], self.nodes[b], self.nodes[c])
    }

    pub fn edge_length(&self, e: &BoundaryEdge) -> f64 {
        let (a, b) = (self.nodes[e.nodes[0]], self.nodes[e.nodes[1]]);
        (b[0] - a[0]).hypot(b[1] - a[1])
    }

    /// Largest triangle diameter.
    pub fn mesh_size(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                (0..3)
                    .map(|k| {
                        let (a, b) = (self.nodes[t[k]], self.nodes[t[(k + 1) % 3]]);
                        (b[0] - a[0]).hypot(b[1] - a[1])
                    })
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

/// A node of the contact boundary carrying frictional unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactNode {
    pub node: usize,
    pub normal: Point,
    pub tangent: Point,
    /// Lumped boundary weight: half the length of the adjacent contact edges.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    dirichlet: Vec<bool>,
    scalar_index: Vec<Option<usize>>,
    free_nodes: Vec<usize>,
    contact: Vec<ContactNode>,
}

impl DofMap {
    /// Numbers the free nodes in node order. Nodes touching a Dirichlet edge
    /// are eliminated, including corners shared with the contact boundary.
    pub fn new(mesh: &Mesh) -> DofMap {
        let n = mesh.nodes().len();
        let mut dirichlet = vec![false; n];
        for e in mesh.edges_tagged(BoundaryTag::Dirichlet) {
            dirichlet[e.nodes[0]] = true;
            dirichlet[e.nodes[1]] = true;
        }
        let mut scalar_index = vec![None; n];
        let mut free_nodes = Vec::new();
        for (i, slot) in scalar_index.iter_mut().enumerate() {
            if !dirichlet[i] {
                *slot = Some(free_nodes.len());
                free_nodes.push(i);
            }
        }

        let mut acc: BTreeMap<usize, (Point, f64)> = BTreeMap::new();
        for e in mesh.edges_tagged(BoundaryTag::Contact) {
            let len = mesh.edge_length(e);
            for &node in &e.nodes {
                if dirichlet[node] {
                    continue;
                }
                let entry = acc.entry(node).or_insert(([0.0, 0.0], 0.0));
                entry.0[0] += e.normal[0];
                entry.0[1] += e.normal[1];
                entry.1 += 0.5 * len;
            }
        }
        let contact = acc
            .into_iter()
            .map(|(node, (nsum, weight))| {
                let len = nsum[0].hypot(nsum[1]);
                let normal = [nsum[0] / len, nsum[1] / len];
                ContactNode {
                    node,
                    normal,
                    tangent: [-normal[1], normal[0]],
                    weight,
                }
            })
            .collect();

        DofMap {
            dirichlet,
            scalar_index,
            free_nodes,
            contact,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.dirichlet.len()
    }

    pub fn n_scalar(&self) -> usize {
        self.free_nodes.len()
    }

    pub fn n_vector(&self) -> usize {
        2 * self.free_nodes.len()
    }

    pub fn is_dirichlet(&self, node: usize) -> bool {
        self.dirichlet[node]
    }

    pub fn dirichlet_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.dirichlet
            .iter()
            .enumerate()
            .filter(|(_, &d)| d)
            .map(|(i, _)| i)
    }

    pub fn free_nodes(&self) -> &[usize] {
        &self.free_nodes
    }

    pub fn scalar_dof(&self, node: usize) -> Option<usize> {
        self.scalar_index[node]
    }

    /// Interleaved `(x, y)` numbering.
    pub fn vector_dof(&self, node: usize, component: usize) -> Option<usize> {
        self.scalar_index[node].map(|s| 2 * s + component)
    }

    pub fn contact_nodes(&self) -> &[ContactNode] {
        &self.contact
    }

    /// Nodal values (zero on Dirichlet nodes) from free coefficients.
    pub fn expand_scalar(&self, free: &nalgebra::DVector<f64>) -> Vec<f64> {
        assert_eq!(free.len(), self.n_scalar(), "scalar field length mismatch");
        let mut out = vec![0.0; self.n_nodes()];
        for (k, &node) in self.free_nodes.iter().enumerate() {
            out[node] = free[k];
        }
        out
    }

    pub fn expand_vector(&self, free: &nalgebra::DVector<f64>) -> Vec<Point> {
        assert_eq!(free.len(), self.n_vector(), "vector field length mismatch");
        let mut out = vec![[0.0, 0.0]; self.n_nodes()];
        for (k, &node) in self.free_nodes.iter().enumerate() {
            out[node] = [free[2 * k], free[2 * k + 1]];
        }
        out
    }

    pub fn restrict_scalar(&self, nodal: &[f64]) -> nalgebra::DVector<f64> {
        nalgebra::DVector::from_iterator(
            self.n_scalar(),
            self.free_nodes.iter().map(|&n| nodal[n]),
        )
    }

    pub fn interpolate_scalar(&self, mesh: &Mesh, f: impl Fn(Point) -> f64) -> nalgebra::DVector<f64> {
        nalgebra::DVector::from_iterator(
            self.n_scalar(),
            self.free_nodes.iter().map(|&n| f(mesh.nodes()[n])),
        )
    }

    pub fn interpolate_vector(&self, mesh: &Mesh, f: impl Fn(Point) -> Point) -> nalgebra::DVector<f64> {
        nalgebra::DVector::from_iterator(
            self.n_vector(),
            self.free_nodes.iter().flat_map(|&n| f(mesh.nodes()[n])),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceNorm {
    pub norm: f64,
    pub eigenvalue: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// Discrete norm of `v ↦ v_τ|Γ_C` from the velocity space (norm `‖∇v‖`)
/// into `L²(Γ_C; ℝ²)`: the square root of the largest generalized
/// eigenvalue of the tangential contact mass against the vector stiffness.
pub fn estimate_trace_norm(mesh: &Mesh, dofs: &DofMap) -> Result<TraceNorm> {
    if mesh.edges_tagged(BoundaryTag::Contact).next().is_none() {
        return Err(Error::EmptyContact);
    }
    let stiffness = assembly::vector_stiffness(mesh, dofs);
    let mass = assembly::contact_tangential_mass(mesh, dofs);
    let eig = linalg::generalized_max_eigenvalue(&stiffness, &mass, PowerIterationOptions::default())?;
    Ok(TraceNorm {
        norm: eig.eigenvalue.max(0.0).sqrt(),
        eigenvalue: eig.eigenvalue,
        iterations: eig.iterations,
        residual: eig.residual,
    })
}

/// Discrete norm of the scalar trace `w ↦ w|Γ_N ∪ Γ_C` from `V_h` (norm
/// `‖∇w‖`) into `L²`. Zero when the whole boundary is Dirichlet.
pub fn estimate_scalar_trace_norm(mesh: &Mesh, dofs: &DofMap) -> Result<TraceNorm> {
    let tags = [BoundaryTag::Neumann, BoundaryTag::Contact];
    if dofs.n_scalar() == 0 || !mesh.boundary_edges().iter().any(|e| tags.contains(&e.tag)) {
        return Ok(TraceNorm {
            norm: 0.0,
            eigenvalue: 0.0,
            iterations: 0,
            residual: 0.0,
        });
    }
    let stiffness = assembly::laplace_stiffness(mesh, dofs);
    let mass = assembly::boundary_mass(mesh, dofs, &tags, |_| 1.0);
    let eig = linalg::generalized_max_eigenvalue(&stiffness, &mass, PowerIterationOptions::default())?;
    Ok(TraceNorm {
        norm: eig.eigenvalue.max(0.0).sqrt(),
        eigenvalue: eig.eigenvalue,
        iterations: eig.iterations,
        residual: eig.residual,
    })
}
