//! Areas of intersections and unions of planar disks.

use std::f64::consts::{PI, TAU};

use crate::integrate::Estimate;

/// Separations within this of a critical value are treated as the limiting case.
const TANGENCY_EPS: f64 = 1e-12;

/// Relative tolerance of [`union_area`] for more than three disks.
const GRID_REL_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub center: Point,
    pub radius: f64,
}

impl Disk {
    pub fn new(x: f64, y: f64, radius: f64) -> Self {
        debug_assert!(radius >= 0.0);
        Disk {
            center: Point::new(x, y),
            radius,
        }
    }

    pub fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        let dx = x - self.center.x;
        let dy = y - self.center.y;
        dx * dx + dy * dy <= self.radius * self.radius
    }

    fn dist_to_rect(&self, x0: f64, y0: f64, x1: f64, y1: f64) -> f64 {
        let dx = (x0 - self.center.x).max(0.0).max(self.center.x - x1);
        let dy = (y0 - self.center.y).max(0.0).max(self.center.y - y1);
        dx.hypot(dy)
    }
}

/// Area of `d1 ∩ d2`.
pub fn lens_area(d1: Disk, d2: Disk) -> f64 {
    let (r1, r2) = (d1.radius, d2.radius);
    if r1 <= 0.0 || r2 <= 0.0 {
        return 0.0;
    }
    let d = d1.center.dist(d2.center);
    let scale = r1 + r2;
    if d >= r1 + r2 - TANGENCY_EPS * scale {
        return 0.0;
    }
    if d <= (r1 - r2).abs() + TANGENCY_EPS * scale {
        let r = r1.min(r2);
        return PI * r * r;
    }
    let a1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).clamp(-1.0, 1.0).acos();
    let a2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).clamp(-1.0, 1.0).acos();
    let kite = ((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2)).max(0.0).sqrt();
    r1 * r1 * a1 + r2 * r2 * a2 - 0.5 * kite
}

/// Sorted, disjoint angular intervals within `[0, 2pi]`.
type ArcSet = Vec<(f64, f64)>;

fn arc_interval(center: f64, half: f64) -> ArcSet {
    if half >= PI {
        return vec![(0.0, TAU)];
    }
    let lo = (center - half).rem_euclid(TAU);
    let hi = lo + 2.0 * half;
    if hi <= TAU {
        vec![(lo, hi)]
    } else {
        vec![(0.0, hi - TAU), (lo, TAU)]
    }
}

fn intersect_arcs(a: &ArcSet, b: &ArcSet) -> ArcSet {
    let mut out = Vec::new();
    for &(a0, a1) in a {
        for &(b0, b1) in b {
            let lo = a0.max(b0);
            let hi = a1.min(b1);
            if hi > lo {
                out.push((lo, hi));
            }
        }
    }
    out.sort_by(|p, q| p.0.total_cmp(&q.0));
    out
}

/// Angles on the boundary of disk `i` that lie inside disk `j`.
/// Identical circles keep the arc only on the lower index.
fn arcs_inside(ci: &Disk, i: usize, cj: &Disk, j: usize) -> ArcSet {
    let (ri, rj) = (ci.radius, cj.radius);
    let dx = cj.center.x - ci.center.x;
    let dy = cj.center.y - ci.center.y;
    let d = dx.hypot(dy);
    let scale = ri + rj;
    if d <= TANGENCY_EPS * scale {
        if (ri - rj).abs() <= TANGENCY_EPS * scale {
            return if i < j { vec![(0.0, TAU)] } else { Vec::new() };
        }
        return if ri < rj { vec![(0.0, TAU)] } else { Vec::new() };
    }
    let c = (ri * ri + d * d - rj * rj) / (2.0 * ri * d);
    if c <= -1.0 + TANGENCY_EPS {
        return vec![(0.0, TAU)];
    }
    if c >= 1.0 - TANGENCY_EPS {
        return Vec::new();
    }
    arc_interval(dy.atan2(dx), c.acos())
}

/// Exact area of the common intersection of all `disks`, from Green's theorem
/// along the boundary arcs of the intersection.
pub fn intersection_area(disks: &[Disk]) -> f64 {
    match disks.len() {
        0 => return 0.0,
        1 => return disks[0].area(),
        2 => return lens_area(disks[0], disks[1]),
        _ => {}
    }
    if disks.iter().any(|d| d.radius <= 0.0) {
        return 0.0;
    }
    let mut twice_area = 0.0;
    for (i, di) in disks.iter().enumerate() {
        let mut arcs: ArcSet = vec![(0.0, TAU)];
        for (j, dj) in disks.iter().enumerate() {
            if i == j {
                continue;
            }
            arcs = intersect_arcs(&arcs, &arcs_inside(di, i, dj, j));
            if arcs.is_empty() {
                break;
            }
        }
        let (cx, cy, r) = (di.center.x, di.center.y, di.radius);
        for (p1, p2) in arcs {
            twice_area += r * r * (p2 - p1) + r * (cx * (p2.sin() - p1.sin()) - cy * (p2.cos() - p1.cos()));
        }
    }
    (0.5 * twice_area).max(0.0)
}

/// Area of the union of `disks`: inclusion-exclusion for up to three disks,
/// otherwise the grid bound of [`union_area_grid`].
pub fn union_area(disks: &[Disk]) -> f64 {
    match disks.len() {
        0 => 0.0,
        1 => disks[0].area(),
        2 => disks[0].area() + disks[1].area() - lens_area(disks[0], disks[1]),
        3 => {
            let singles: f64 = disks.iter().map(Disk::area).sum();
            let pairs = lens_area(disks[0], disks[1]) + lens_area(disks[0], disks[2]) + lens_area(disks[1], disks[2]);
            let exact = singles - pairs + intersection_area(disks);
            let largest = disks.iter().map(Disk::area).fold(0.0, f64::max);
            exact.clamp(largest, singles)
        }
        _ => {
            let total: f64 = disks.iter().map(Disk::area).sum();
            union_area_grid(disks, GRID_REL_TOL * total).value
        }
    }
}

const GRID_MAX_CELLS: usize = 1 << 24;

/// Union area by recursive subdivision of the bounding box. Cells inside one disk
/// or outside all disks are resolved; boundary cells are refined until half their
/// total area is at most `abs_tol`. The returned `error` is a rigorous bound and
/// `converged` is false if the cell budget ran out first.
pub fn union_area_grid(disks: &[Disk], abs_tol: f64) -> Estimate {
    let live: Vec<Disk> = disks.iter().copied().filter(|d| d.radius > 0.0).collect();
    if live.is_empty() {
        return Estimate {
            value: 0.0,
            error: 0.0,
            evals: 0,
            converged: true,
        };
    }
    let x0 = live.iter().map(|d| d.center.x - d.radius).fold(f64::INFINITY, f64::min);
    let y0 = live.iter().map(|d| d.center.y - d.radius).fold(f64::INFINITY, f64::min);
    let x1 = live.iter().map(|d| d.center.x + d.radius).fold(f64::NEG_INFINITY, f64::max);
    let y1 = live.iter().map(|d| d.center.y + d.radius).fold(f64::NEG_INFINITY, f64::max);
    let mut h = (x1 - x0).max(y1 - y0);
    let mut cells = vec![(x0, y0)];
    let mut inside = 0.0;
    let mut evals = 0u64;
    loop {
        let mut boundary = Vec::new();
        for &(cx, cy) in &cells {
            evals += 1;
            let (ex, ey) = (cx + h, cy + h);
            let full = live.iter().any(|d| {
                d.contains(cx, cy) && d.contains(ex, cy) && d.contains(cx, ey) && d.contains(ex, ey)
            });
            if full {
                inside += h * h;
            } else if live.iter().any(|d| d.dist_to_rect(cx, cy, ex, ey) < d.radius) {
                boundary.push((cx, cy));
            }
        }
        let half_boundary = 0.5 * boundary.len() as f64 * h * h;
        let done = half_boundary <= abs_tol;
        if done || 4 * boundary.len() > GRID_MAX_CELLS {
            return Estimate {
                value: inside + half_boundary,
                error: half_boundary,
                evals,
                converged: done,
            };
        }
        h *= 0.5;
        cells = boundary
            .iter()
            .flat_map(|&(cx, cy)| [(cx, cy), (cx + h, cy), (cx, cy + h), (cx + h, cy + h)])
            .collect();
    }
}
