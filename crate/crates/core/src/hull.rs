//! Lower convex hulls with slope constraints, and subdifferential cells.
//!
//! `n = 1` uses a monotone chain. `n = 2` evaluates the constrained hull at
//! each node as the small linear program
//! `max_{p in P} min_i (u_i + p.(x_k - x_i))`, solved by constraint
//! generation; subdifferential cells are clipped polygons refined until
//! every vertex satisfies every supporting-plane constraint.

use rayon::prelude::*;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Relative tolerance used to keep nearly collinear points on a hull.
const COLLINEAR_EPS: f64 = 1e-13;
/// Values within this relative distance of the input snap back onto it.
const SNAP_EPS: f64 = 1e-12;

fn snap(f: f64, u: f64) -> f64 {
    if !u.is_finite() {
        return f;
    }
    if f >= u || (u - f) <= SNAP_EPS * (1.0 + u.abs()) {
        u
    } else {
        f
    }
}

/// Indices of the lower hull of `(x_i, y_i)` over the finite `y_i`.
/// Points within rounding of a hull edge are kept, so hulls are maximal.
pub fn lower_hull_1d(x: &[f64], y: &[f64]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::new();
    for i in 0..x.len() {
        if !y[i].is_finite() {
            continue;
        }
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let (dx1, dy1) = (x[b] - x[a], y[b] - y[a]);
            let (dx2, dy2) = (x[i] - x[a], y[i] - y[a]);
            let cross = dx1 * dy2 - dy1 * dx2;
            let scale = (dx1 * dy2).abs() + (dy1 * dx2).abs();
            if cross < -COLLINEAR_EPS * scale {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}

/// Largest function below `u` (entries may be `+inf`) that is convex
/// and piecewise linear on the grid with slopes in `[lo, hi]`.
pub fn envelope_1d(x: &[f64], u: &[f64], lo: f64, hi: f64) -> Result<Vec<f64>> {
    let hull = lower_hull_1d(x, u);
    if hull.is_empty() {
        return Err(Error::AllInfinite);
    }
    let slope = |a: usize, b: usize| (u[b] - u[a]) / (x[b] - x[a]);
    let tol_lo = 1e-12 * (1.0 + lo.abs());
    let tol_hi = 1e-12 * (1.0 + hi.abs());
    // First vertex whose outgoing slope reaches `lo`.
    let mut a = hull.len() - 1;
    for w in 0..hull.len() - 1 {
        if slope(hull[w], hull[w + 1]) >= lo - tol_lo {
            a = w;
            break;
        }
    }
    // Last vertex whose incoming slope stays below `hi`.
    let mut b = 0;
    for w in (1..hull.len()).rev() {
        if slope(hull[w - 1], hull[w]) <= hi + tol_hi {
            b = w;
            break;
        }
    }
    if b < a {
        // Only possible when the admissible slope band misses every hull edge.
        b = a;
    }
    let (va, vb) = (hull[a], hull[b]);
    let mut out = vec![0.0; x.len()];
    let mut seg = a;
    for i in 0..x.len() {
        let t = x[i];
        let f = if t <= x[va] {
            u[va] + lo * (t - x[va])
        } else if t >= x[vb] {
            u[vb] + hi * (t - x[vb])
        } else {
            while x[hull[seg + 1]] < t {
                seg += 1;
            }
            let (p, q) = (hull[seg], hull[seg + 1]);
            if t == x[q] {
                u[q]
            } else {
                u[p] + (u[q] - u[p]) * (t - x[p]) / (x[q] - x[p])
            }
        };
        out[i] = snap(f, u[i]);
    }
    Ok(out)
}

/// Signed area of a polygon (positive for counter-clockwise order).
pub fn polygon_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        s += a[0] * b[1] - a[1] * b[0];
    }
    0.5 * s
}

/// Clips a convex polygon against the half-plane `n.p <= c`.
pub fn clip_halfplane(poly: &[Point], n: Point, c: f64) -> Vec<Point> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    let len = poly.len();
    if len == 0 {
        return out;
    }
    let side = |p: &Point| n[0] * p[0] + n[1] * p[1] - c;
    for i in 0..len {
        let p = poly[i];
        let q = poly[(i + 1) % len];
        let sp = side(&p);
        let sq = side(&q);
        if sp <= 0.0 {
            out.push(p);
        }
        if (sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0) {
            let s = sp / (sp - sq);
            out.push([p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])]);
        }
    }
    out
}

/// Node geometry shared by the `n = 2` routines.
pub struct Grid2<'a> {
    pub axis: &'a [f64],
}

impl Grid2<'_> {
    fn n(&self) -> usize {
        self.axis.len()
    }

    fn coords(&self, k: usize) -> Point {
        [self.axis[k / self.n()], self.axis[k % self.n()]]
    }

    fn neighbors(&self, k: usize, radius: usize) -> Vec<usize> {
        let n = self.n();
        let (i, j) = (k / n, k % n);
        let mut out = Vec::new();
        for a in i.saturating_sub(radius)..=(i + radius).min(n - 1) {
            for b in j.saturating_sub(radius)..=(j + radius).min(n - 1) {
                out.push(a * n + b);
            }
        }
        out
    }
}

/// Subdifferential of the lower hull of `values` at node `k`, intersected
/// with the convex polygon `domain`. Empty when node `k` lies above the hull.
pub fn subdifferential_cell(grid: &Grid2<'_>, values: &[f64], k: usize, domain: &[Point]) -> Vec<Point> {
    Cells::new(grid, values).cell(k, domain)
}

/// All subdifferential cells of `values`, in node order.
pub fn subdifferential_cells(grid: &Grid2<'_>, values: &[f64], domain: &[Point]) -> Vec<Vec<Point>> {
    let cells = Cells::new(grid, values);
    (0..values.len()).into_par_iter().map(|k| cells.cell(k, domain)).collect()
}

const TILE_ROWS: usize = 8;
const TILE_COLS: usize = 8;

struct Tile {
    rows: std::ops::Range<usize>,
    cols: std::ops::Range<usize>,
    min_u: f64,
    /// `u_i >= base + slope . x_i` on the tile.
    slope: Point,
    base: f64,
}

/// Tiles of `TILE_ROWS x TILE_COLS` nodes with their minimum value, used to
/// skip tiles that cannot hold a violated constraint.
struct Cells<'a> {
    grid: &'a Grid2<'a>,
    values: &'a [f64],
    blocks: Vec<Tile>,
    reach: f64,
}

impl<'a> Cells<'a> {
    fn new(grid: &'a Grid2<'a>, values: &'a [f64]) -> Self {
        let n = grid.n();
        let mut blocks = Vec::new();
        for a0 in (0..n).step_by(TILE_ROWS) {
            for b0 in (0..n).step_by(TILE_COLS) {
                let rows = a0..(a0 + TILE_ROWS).min(n);
                let cols = b0..(b0 + TILE_COLS).min(n);
                let x = grid.axis;
                let (ra, ca) = (rows.start, cols.start);
                let (rb, cb) = (rows.end - 1, cols.end - 1);
                let u0 = values[ra * n + ca];
                let slope = [
                    if rb > ra { (values[rb * n + ca] - u0) / (x[rb] - x[ra]) } else { 0.0 },
                    if cb > ca { (values[ra * n + cb] - u0) / (x[cb] - x[ca]) } else { 0.0 },
                ];
                let mut min_u = f64::INFINITY;
                let mut base = f64::INFINITY;
                for a in rows.clone() {
                    for b in cols.clone() {
                        let u = values[a * n + b];
                        min_u = min_u.min(u);
                        base = base.min(u - slope[0] * x[a] - slope[1] * x[b]);
                    }
                }
                blocks.push(Tile {
                    rows,
                    cols,
                    min_u,
                    slope,
                    base,
                });
            }
        }
        let reach = grid.axis.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        Self {
            grid,
            values,
            blocks,
            reach,
        }
    }

    /// Lower bound of `u_i - v . x_i` over a tile.
    fn lower_bound(&self, t: &Tile, v: Point) -> f64 {
        let x = self.grid.axis;
        let (a0, a1) = (x[t.rows.start], x[t.rows.end - 1]);
        let (b0, b1) = (x[t.cols.start], x[t.cols.end - 1]);
        let flat = t.min_u - (v[0] * a0).max(v[0] * a1) - (v[1] * b0).max(v[1] * b1);
        let w = [t.slope[0] - v[0], t.slope[1] - v[1]];
        let tilted = t.base + (w[0] * a0).min(w[0] * a1) + (w[1] * b0).min(w[1] * b1);
        flat.max(tilted)
    }

    fn cell(&self, k: usize, domain: &[Point]) -> Vec<Point> {
        let grid = self.grid;
        let values = self.values;
        let xk = grid.coords(k);
        let uk = values[k];
        let mut poly = domain.to_vec();
        let constraint = |i: usize| {
            let xi = grid.coords(i);
            ([xi[0] - xk[0], xi[1] - xk[1]], values[i] - uk)
        };
        for i in grid.neighbors(k, 1) {
            if i != k {
                let (nrm, c) = constraint(i);
                poly = clip_halfplane(&poly, nrm, c);
            }
        }
        for _round in 0..64 {
            if poly.len() < 3 || polygon_area(&poly) <= 0.0 {
                return Vec::new();
            }
            let mut worst: Option<(usize, f64)> = None;
            for v in &poly {
                let thr = uk - v[0] * xk[0] - v[1] * xk[1];
                let margin = 1e-13 * (1.0 + thr.abs() + (v[0].abs() + v[1].abs()) * self.reach);
                let n = grid.n();
                for t in &self.blocks {
                    if self.lower_bound(t, *v) > thr + margin {
                        continue;
                    }
                    // Most violated supporting-plane constraint at this vertex.
                    for a in t.rows.clone() {
                        for i in a * n + t.cols.start..a * n + t.cols.end {
                            let (nrm, c) = constraint(i);
                            let viol = nrm[0] * v[0] + nrm[1] * v[1] - c;
                            let tol = 1e-12 * (1.0 + c.abs() + (nrm[0] * v[0]).abs() + (nrm[1] * v[1]).abs());
                            let better = worst.map_or(true, |(wi, w)| viol > w || (viol == w && i < wi));
                            if viol > tol && better {
                                worst = Some((i, viol));
                            }
                        }
                    }
                }
            }
            match worst {
                None => return poly,
                Some((i, _)) => {
                    let (nrm, c) = constraint(i);
                    poly = clip_halfplane(&poly, nrm, c);
                }
            }
        }
        poly
    }
}

#[derive(Clone, Copy)]
struct Plane {
    a: f64,
    b: Point,
}

impl Plane {
    fn eval(&self, p: Point) -> f64 {
        self.a + self.b[0] * p[0] + self.b[1] * p[1]
    }
}

fn inside(poly: &[Point], p: Point, scale: f64) -> bool {
    let n = poly.len();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
        if cross < -1e-12 * scale {
            return false;
        }
    }
    true
}

/// Exact maximum of `min_i plane_i` over a convex counter-clockwise polygon,
/// by enumeration of the vertices of the induced cell complex.
fn max_min_planes(planes: &[Plane], poly: &[Point]) -> (Point, f64) {
    let scale = poly
        .iter()
        .map(|p| p[0].abs().max(p[1].abs()))
        .fold(1.0, f64::max);
    let g = |p: Point| planes.iter().map(|pl| pl.eval(p)).fold(f64::INFINITY, f64::min);
    let mut best = (poly[0], f64::NEG_INFINITY);
    let mut consider = |p: Point| {
        if !inside(poly, p, scale * scale) {
            return;
        }
        let v = g(p);
        if v > best.1 || (v == best.1 && (p[0], p[1]) < (best.0[0], best.0[1])) {
            best = (p, v);
        }
    };
    for &v in poly {
        consider(v);
    }
    let m = planes.len();
    let line = |i: usize, j: usize| -> Option<(Point, f64)> {
        let n = [planes[i].b[0] - planes[j].b[0], planes[i].b[1] - planes[j].b[1]];
        if n[0] == 0.0 && n[1] == 0.0 {
            None
        } else {
            Some((n, planes[j].a - planes[i].a))
        }
    };
    let lines: Vec<Option<(Point, f64)>> = (0..m * m)
        .map(|ij| {
            let (i, j) = (ij / m, ij % m);
            if i < j {
                line(i, j)
            } else {
                None
            }
        })
        .collect();
    let np = poly.len();
    for i in 0..m {
        for j in i + 1..m {
            let Some((n, c)) = lines[i * m + j] else { continue };
            for e in 0..np {
                let a = poly[e];
                let b = poly[(e + 1) % np];
                let sa = n[0] * a[0] + n[1] * a[1] - c;
                let sb = n[0] * b[0] + n[1] * b[1] - c;
                if (sa <= 0.0 && sb >= 0.0) || (sa >= 0.0 && sb <= 0.0) {
                    if sa == sb {
                        continue;
                    }
                    let s = sa / (sa - sb);
                    consider([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
                }
            }
            for l in j + 1..m {
                let Some((n2, c2)) = lines[i * m + l] else { continue };
                let det = n[0] * n2[1] - n[1] * n2[0];
                if det == 0.0 {
                    continue;
                }
                let p = [(c * n2[1] - n[1] * c2) / det, (n[0] * c2 - c * n2[0]) / det];
                consider(p);
            }
        }
    }
    best
}

/// Constrained lower hull on a tensor grid: the largest function below `u`
/// that is the restriction of a convex function with gradients in `domain`.
pub fn envelope_2d(grid: &Grid2<'_>, u: &[f64], domain: &[Point]) -> Result<Vec<f64>> {
    let finite: Vec<usize> = (0..u.len()).filter(|&i| u[i].is_finite()).collect();
    if finite.is_empty() {
        return Err(Error::AllInfinite);
    }
    let coords: Vec<Point> = (0..u.len()).map(|k| grid.coords(k)).collect();
    let node = |k: usize| {
        let xk = coords[k];
        let plane = |i: usize| Plane {
            a: u[i],
            b: [xk[0] - coords[i][0], xk[1] - coords[i][1]],
        };
        let mut active: Vec<usize> = grid
            .neighbors(k, 1)
            .into_iter()
            .filter(|&i| u[i].is_finite())
            .collect();
        if active.is_empty() {
            let nearest = finite
                .iter()
                .copied()
                .min_by(|&a, &b| {
                    let da = (coords[a][0] - xk[0]).hypot(coords[a][1] - xk[1]);
                    let db = (coords[b][0] - xk[0]).hypot(coords[b][1] - xk[1]);
                    da.total_cmp(&db)
                })
                .unwrap();
            active.push(nearest);
        }
        let mut planes: Vec<Plane> = active.iter().map(|&i| plane(i)).collect();
        let mut value;
        let mut rounds = 0;
        loop {
            let (p, z) = max_min_planes(&planes, domain);
            value = z;
            let mut worst = (usize::MAX, z);
            for &i in &finite {
                let v = u[i] + p[0] * (xk[0] - coords[i][0]) + p[1] * (xk[1] - coords[i][1]);
                if v < worst.1 {
                    worst = (i, v);
                }
            }
            rounds += 1;
            if worst.0 == usize::MAX
                || z - worst.1 <= 1e-13 * (1.0 + z.abs())
                || active.contains(&worst.0)
                || rounds > 200
            {
                break;
            }
            active.push(worst.0);
            planes.push(plane(worst.0));
        }
        snap(value, u[k])
    };
    Ok((0..u.len()).into_par_iter().map(node).collect())
}
