//! Construction of crossing configurations for scaled shapes.
//!
//! The construction follows the longest-vector argument: a signal travels
//! along a longest movement vector `h`, the other along a vector `v_e` that
//! sticks out furthest orthogonally to `h`, and the two meet in a small
//! gadget where a movement vector `v` jumps across `h`:
//!
//! * `H1` (2 cells, `p - 6` grains) both reach `h2` (`p - 2` grains);
//! * `V1` (4 cells, `p - 4` grains) all reach `v2` (`p - 4` grains) and none
//!   of them reaches `h2`.
//!
//! `H1` is fed by six cells `H0` behind it, themselves fed by a single cell.
//! `V1` is fed by stages of four cells along `-v_e` until the stages leave
//! the region within `|h|` of the gadget, then by a single cell. Single-cell
//! wires with `p - 1` grains connect everything to the borders. The result is
//! always checked with the crossing verifier before it is returned.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Signed;
use thiserror::Error;

use crate::geometry::{
    centroid, discretize, double_area, find_ratio_for_count, open_segments_intersect, quadrant_has_area,
    quadrant_pieces, rat, ratio, GeometryError, Point, Rational, Shape,
};
use crate::grid::{Configuration, GridPoint, MovementVector, Neighborhood};
use crate::verify::{verify_crossing, CrossingReport, CrossingSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthesisError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("the plan predicates fail for every tried epsilon")]
    PlanFailure,
    #[error("ratio {ratio} is too small: {reason} (proof bound {bound})")]
    RatioTooSmall { ratio: String, reason: String, bound: String },
    #[error("non-interference fails: {0}")]
    GeometryConflict(String),
    #[error("signals would run {0}; only west-to-east and north-to-south are supported")]
    Orientation(String),
    #[error("assembled configuration passed every local check but is not a crossing")]
    SynthesisBug(Box<CrossingReport>),
    #[error("no sampled ratio up to {0} gives a crossing")]
    NoRatioFound(String),
}

/// Which of the two placements of the crossing vector was used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlanCase {
    /// The shape has area in the quadrant spanned by `h` and `s2_y`; `v` is
    /// taken there and `v1 = -v_y / 2 + epsilon h`.
    QuadrantOne,
    /// `v = v_e` and `v1 = h / 2 - v_e / 2`.
    Orthogonal,
}

/// Continuous data of the construction, in shape coordinates (before
/// scaling by the ratio). `h1` is the origin and `h2 = h`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossingPlan {
    pub h: Point,
    pub v_e: Point,
    /// Projection of `v_e` on the direction orthogonal to `h`.
    pub s2_y: Point,
    pub case: PlanCase,
    pub v: Point,
    pub v1: Point,
    pub v2: Point,
    pub epsilon: Rational,
    /// Ratios above which the disks of radius `epsilon / 2` around the
    /// anchors hold enough lattice points: gadget, `H0`, vertical stages,
    /// escapes.
    pub stage_ratios: [Rational; 4],
}

impl CrossingPlan {
    pub fn proof_bound(&self) -> Rational {
        self.stage_ratios.iter().max().expect("four stage ratios").clone()
    }

    /// `v1` is outside `s-(h2)`, i.e. `h2` is not reachable from `v1`.
    pub fn v1_outside_inverse(&self, shape: &Shape) -> bool {
        !shape.contains(&self.h.sub(&self.v1))
    }

    /// `]v1, v2[` meets `]h1, h2[`.
    pub fn segments_cross(&self) -> bool {
        open_segments_intersect(&self.v1, &self.v2, &Point::zero(), &self.h)
    }
}

const EPSILON_HALVINGS: usize = 40;

/// Computes `h`, `v_e`, the crossing vector `v` and its anchor `v1`.
pub fn plan_crossing_vectors(shape: &Shape) -> Result<CrossingPlan, SynthesisError> {
    shape.non_flat_witness()?;
    let h = shape.longest_vector()?;
    let v_e = shape.max_orthogonal_vector(&h)?;
    let perp = h.perp();
    let s2_y = perp.scale(&(v_e.dot(&perp) / perp.norm2()));

    let (case, v, v1, epsilon) = if quadrant_has_area(shape, &h, &s2_y) {
        let v = quadrant_vector(shape, &h, &s2_y);
        let v_y = s2_y.scale(&(v.dot(&s2_y) / s2_y.norm2()));
        let mut epsilon = ratio(1, 8);
        let mut found = None;
        for _ in 0..=EPSILON_HALVINGS {
            let v1 = h.scale(&epsilon).sub(&v_y.scale(&ratio(1, 2)));
            let v2 = v1.add(&v);
            let outside = !shape.contains(&h.sub(&v1));
            if outside && open_segments_intersect(&v1, &v2, &Point::zero(), &h) {
                found = Some(v1);
                break;
            }
            epsilon = epsilon / rat(2);
        }
        let v1 = found.ok_or(SynthesisError::PlanFailure)?;
        (PlanCase::QuadrantOne, v, v1, epsilon)
    } else {
        let v1 = h.scale(&ratio(1, 2)).sub(&v_e.scale(&ratio(1, 2)));
        (PlanCase::Orthogonal, v_e.clone(), v1, ratio(1, 8))
    };
    let v2 = v1.add(&v);
    let plan_stub = CrossingPlan {
        h: h.clone(),
        v_e: v_e.clone(),
        s2_y,
        case,
        v,
        v1,
        v2,
        epsilon: epsilon.clone(),
        stage_ratios: [rat(0), rat(0), rat(0), rat(0)],
    };
    if !plan_stub.v1_outside_inverse(shape) || !plan_stub.segments_cross() {
        return Err(SynthesisError::PlanFailure);
    }
    let radius = &epsilon / rat(2);
    let stage = |center: &Point, k: usize| -> Result<Rational, SynthesisError> {
        Ok(find_ratio_for_count(&Shape::disk(center.clone(), radius.clone())?, k)?)
    };
    let r1 = stage(&Point::zero(), 2)?.max(stage(&plan_stub.v1, 4)?);
    let r2 = stage(&h.neg(), 6)?;
    let r3 = stage(&plan_stub.v1.sub(&v_e), 4)?;
    let r4 = stage(&h.scale(&rat(2)), 1)?.max(stage(&plan_stub.v2.add(&v_e), 1)?);
    Ok(CrossingPlan { stage_ratios: [r1, r2, r3, r4], ..plan_stub })
}

/// A point well inside the part of the shape lying in the open quadrant
/// `{p . h > 0, p . s2_y > 0}`: three quarters of the way from the centroid
/// of the largest piece to its vertex furthest along `s2_y`.
fn quadrant_vector(shape: &Shape, h: &Point, s2_y: &Point) -> Point {
    let pieces = quadrant_pieces(shape, h, s2_y);
    let piece = pieces
        .iter()
        .max_by(|a, b| double_area(a).cmp(&double_area(b)))
        .expect("quadrant has area");
    let c = centroid(piece);
    let top = piece
        .iter()
        .max_by(|a, b| a.dot(s2_y).cmp(&b.dot(s2_y)).then_with(|| a.lex_cmp(b)))
        .expect("non-empty piece");
    c.add(&top.sub(&c).scale(&ratio(3, 4)))
}

/// Grain levels of the gadget, as offsets below `p`.
pub const H1_DEFICIT: u64 = 6;
pub const H2_DEFICIT: u64 = 2;
pub const V1_DEFICIT: u64 = 4;
pub const V2_DEFICIT: u64 = 4;
/// Cells of the vertical stages fed by four cells.
pub const STAGE_DEFICIT: u64 = 4;

/// The crossing part, in lattice coordinates with `h1` at the origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gadget {
    pub h1: Vec<GridPoint>,
    pub h2: GridPoint,
    pub v1: Vec<GridPoint>,
    pub v2: GridPoint,
    /// Lattice versions of `h` and `v_e` used by the wires.
    pub h_step: MovementVector,
    pub v_step: MovementVector,
}

fn scaled(p: &Point, r: &Rational) -> Point {
    p.scale(r)
}

fn to_point(v: GridPoint) -> Point {
    Point::from_ints(v.x, v.y)
}

fn dist2_to(v: GridPoint, c: &Point) -> Rational {
    to_point(v).sub(c).norm2()
}

/// Lattice points within `radius` (Chebyshev) of the rounding of `center`,
/// sorted by distance to `center`, then lexicographically.
fn cells_near(center: &Point, radius: i64) -> Vec<GridPoint> {
    let (cx, cy) = center.round();
    let mut cells: Vec<(Rational, GridPoint)> = Vec::new();
    for x in cx - radius..=cx + radius {
        for y in cy - radius..=cy + radius {
            let v = GridPoint::new(x, y);
            cells.push((dist2_to(v, center), v));
        }
    }
    cells.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    cells.into_iter().map(|(_, v)| v).collect()
}

/// The movement vector of `nb` closest to `target`.
fn nearest_vector(nb: &Neighborhood, target: &Point) -> MovementVector {
    *nb.vectors()
        .iter()
        .min_by(|a, b| {
            let da = dist2_to(GridPoint::new(a.dx, a.dy), target);
            let db = dist2_to(GridPoint::new(b.dx, b.dy), target);
            da.cmp(&db).then_with(|| b.cmp(a))
        })
        .expect("neighborhoods are non-empty")
}

fn too_small(r: &Rational, plan: &CrossingPlan, reason: impl Into<String>) -> SynthesisError {
    SynthesisError::RatioTooSmall {
        ratio: crate::geometry::format_rational(r),
        reason: reason.into(),
        bound: crate::geometry::format_rational(&plan.proof_bound()),
    }
}

/// Picks the lattice cells of the crossing part at ratio `r`.
pub fn materialize_gadget(plan: &CrossingPlan, nb: &Neighborhood, r: &Rational) -> Result<Gadget, SynthesisError> {
    let p = nb.p();
    if p < H1_DEFICIT + 1 {
        return Err(too_small(r, plan, format!("p = {p} leaves no room for the gadget levels")));
    }
    let h_step = nearest_vector(nb, &scaled(&plan.h, r));
    let v_step = nearest_vector(nb, &scaled(&plan.v_e, r));
    let h1_anchor = GridPoint::ORIGIN;
    let h2 = h1_anchor + h_step;
    let side = to_point(GridPoint::new(0, 0)).sub(&plan.v1);

    // H1: the anchor plus its nearest cell reaching h2, preferring the side
    // away from V1.
    let mut h1 = vec![h1_anchor];
    let mut near: Vec<GridPoint> = cells_near(&Point::zero(), 2).into_iter().filter(|&u| u != h1_anchor).collect();
    near.sort_by(|a, b| {
        let key = |u: &GridPoint| (u.dist2(h1_anchor), -(to_point(*u).dot(&side)));
        key(a).cmp(&key(b)).then_with(|| a.cmp(b))
    });
    match near.into_iter().find(|&u| nb.reaches(u, h2) && u != h2) {
        Some(u) => h1.push(u),
        None => return Err(too_small(r, plan, "no second H1 cell reaches h2")),
    }

    let v2 = {
        let (x, y) = scaled(&plan.v2, r).round();
        GridPoint::new(x, y)
    };
    if h1.contains(&v2) || v2 == h2 {
        return Err(too_small(r, plan, "v2 collides with the horizontal gadget"));
    }
    let v1_center = scaled(&plan.v1, r);
    let window = (r * &plan.epsilon).ceil().to_integer().try_into().unwrap_or(i64::MAX).clamp(2, 64);
    let v1: Vec<GridPoint> = cells_near(&v1_center, window)
        .into_iter()
        .filter(|&u| !h1.contains(&u) && u != h2 && u != v2 && nb.reaches(u, v2) && !nb.reaches(u, h2))
        .take(4)
        .collect();
    if v1.len() < 4 {
        return Err(too_small(r, plan, "fewer than 4 V1 cells reach v2 without reaching h2"));
    }
    let gadget = Gadget { h1, h2, v1, v2, h_step, v_step };
    check_gadget(&gadget, nb).map_err(|e| too_small(r, plan, e))?;
    Ok(gadget)
}

/// The sufficient conditions on the crossing part, checked on lattice data.
fn check_gadget(g: &Gadget, nb: &Neighborhood) -> Result<(), String> {
    let count = |targets: &[GridPoint], to: GridPoint| targets.iter().filter(|&&u| nb.reaches(u, to)).count() as u64;
    if g.v1.iter().any(|&u| nb.reaches(u, g.h2)) {
        return Err("a V1 cell reaches h2".into());
    }
    if count(&g.h1, g.h2) != 2 || count(&g.v1, g.v2) != 4 {
        return Err("feeding arcs of the gadget are missing".into());
    }
    if 2 <= u64::from(nb.reaches(g.v2, g.h2)) {
        return Err("v2 alone fires h2".into());
    }
    let mut v_side = g.v1.clone();
    v_side.push(g.v2);
    let mut h_side = g.h1.clone();
    h_side.push(g.h2);
    for &u in &g.h1 {
        if count(&v_side, u) >= H1_DEFICIT {
            return Err(format!("H1 cell {u} fires from the vertical side"));
        }
    }
    for &u in g.v1.iter().chain([g.v2].iter()) {
        if count(&h_side, u) >= V1_DEFICIT.min(V2_DEFICIT) {
            return Err(format!("vertical cell {u} fires from the horizontal side"));
        }
    }
    Ok(())
}

/// A cell of the assembled configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    /// Part of the signal travelling along `h`.
    Horizontal,
    /// Part of the signal travelling along `v_e`.
    Vertical,
}

/// Cells of the feeding stages and wires, in lattice coordinates with `h1`
/// at the origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wires {
    pub h0: Vec<GridPoint>,
    pub h_minus1: GridPoint,
    /// Vertical stages, nearest to `V1` first.
    pub v_stages: Vec<Vec<GridPoint>>,
    pub v_feed: GridPoint,
    /// Single-cell wires, listed from the gadget outward.
    pub h_in: Vec<GridPoint>,
    pub v_in: Vec<GridPoint>,
    pub h_out: Vec<GridPoint>,
    pub v_out: Vec<GridPoint>,
}

struct Layout<'a> {
    nb: &'a Neighborhood,
    cells: BTreeMap<GridPoint, (Role, u64)>,
}

impl<'a> Layout<'a> {
    fn new(nb: &'a Neighborhood, g: &Gadget) -> Self {
        let p = nb.p();
        let mut layout = Layout { nb, cells: BTreeMap::new() };
        for &u in &g.h1 {
            layout.cells.insert(u, (Role::Horizontal, p - H1_DEFICIT));
        }
        layout.cells.insert(g.h2, (Role::Horizontal, p - H2_DEFICIT));
        for &u in &g.v1 {
            layout.cells.insert(u, (Role::Vertical, p - V1_DEFICIT));
        }
        layout.cells.insert(g.v2, (Role::Vertical, p - V2_DEFICIT));
        layout
    }

    fn free(&self, u: GridPoint) -> bool {
        !self.cells.contains_key(&u)
    }

    fn of(&self, role: Role) -> Vec<GridPoint> {
        self.cells.iter().filter(|(_, (r, _))| *r == role).map(|(&u, _)| u).collect()
    }

    /// `true` when a cell of `role` at `u` would not hand a grain to the
    /// other signal's cells.
    fn quiet_toward_other(&self, u: GridPoint, role: Role) -> bool {
        self.cells.iter().all(|(&w, (r, _))| *r == role || !self.nb.reaches(u, w))
    }

    /// `true` when no cell of the other signal reaches `u`.
    fn shielded_from_other(&self, u: GridPoint, role: Role) -> bool {
        self.cells.iter().all(|(&w, (r, _))| *r == role || !self.nb.reaches(w, u))
    }

    fn place(&mut self, u: GridPoint, role: Role, level: u64) {
        self.cells.insert(u, (role, level));
    }
}

/// Chooses `k` free cells near `center` that each reach every cell of
/// `targets` and stay away from the other signal.
fn pick_stage(
    layout: &Layout,
    center: &Point,
    window: i64,
    targets: &[GridPoint],
    role: Role,
    k: usize,
    sensitive: bool,
) -> Vec<GridPoint> {
    cells_near(center, window)
        .into_iter()
        .filter(|&u| {
            layout.free(u)
                && targets.iter().all(|&t| layout.nb.reaches(u, t))
                && layout.quiet_toward_other(u, role)
                && (!sensitive || layout.shielded_from_other(u, role))
        })
        .take(k)
        .collect()
}

/// Builds `H0`, `h_-1`, the vertical stages, their feed, and `straight`
/// single-cell steps along `h` and `v_e` on each of the four wires.
pub fn build_wires(
    plan: &CrossingPlan,
    gadget: &Gadget,
    nb: &Neighborhood,
    r: &Rational,
    straight: usize,
) -> Result<(Wires, Configuration), SynthesisError> {
    let p = nb.p();
    let mut layout = Layout::new(nb, gadget);
    let window = (r / rat(4)).ceil().to_integer().try_into().unwrap_or(i64::MAX).clamp(3, 48);
    let (hs, vs) = (gadget.h_step, gadget.v_step);
    let step_point = |m: MovementVector| Point::from_ints(m.dx, m.dy);

    // H0 and h_-1.
    let h0_center = step_point(-hs);
    let h0 = pick_stage(&layout, &h0_center, window, &gadget.h1, Role::Horizontal, 6, true);
    if h0.len() < 6 {
        return Err(too_small(r, plan, "fewer than 6 H0 cells feed both H1 cells"));
    }
    for &u in &h0 {
        layout.place(u, Role::Horizontal, p - 1);
    }
    let hm1_center = step_point(-hs).add(&step_point(-hs));
    let Some(&h_minus1) = pick_stage(&layout, &hm1_center, window, &h0, Role::Horizontal, 1, true).first() else {
        return Err(too_small(r, plan, "no single cell feeds all of H0"));
    };
    layout.place(h_minus1, Role::Horizontal, p - 1);

    // Vertical stages of four cells until the continuous anchor leaves both
    // disks of radius |h| around h1 and h2.
    let h_len2 = plan.h.norm2();
    let mut anchor = plan.v1.sub(&plan.v_e);
    let mut targets = gadget.v1.clone();
    let mut v_stages: Vec<Vec<GridPoint>> = Vec::new();
    loop {
        let stage = pick_stage(&layout, &scaled(&anchor, r), window, &targets, Role::Vertical, 4, false);
        if stage.len() < 4 {
            return Err(too_small(r, plan, format!("vertical stage {} has fewer than 4 cells", v_stages.len())));
        }
        for &u in &stage {
            layout.place(u, Role::Vertical, p - STAGE_DEFICIT);
        }
        v_stages.push(stage.clone());
        targets = stage;
        let outside = anchor.norm2() > h_len2 && anchor.sub(&plan.h).norm2() > h_len2;
        if outside {
            break;
        }
        if v_stages.len() > 64 {
            return Err(SynthesisError::GeometryConflict("vertical stages never leave the gadget region".into()));
        }
        anchor = anchor.sub(&plan.v_e);
    }
    // The last stage is fed by a single cell, so it holds p - 1 grains.
    for &u in v_stages.last().expect("at least one stage") {
        layout.place(u, Role::Vertical, p - 1);
    }
    let feed_center = scaled(&anchor.sub(&plan.v_e), r);
    let Some(&v_feed) = pick_stage(&layout, &feed_center, window, &targets, Role::Vertical, 1, true).first() else {
        return Err(too_small(r, plan, "no single cell feeds the last vertical stage"));
    };
    layout.place(v_feed, Role::Vertical, p - 1);

    let mut wires = Wires {
        h0,
        h_minus1,
        v_stages,
        v_feed,
        h_in: Vec::new(),
        v_in: Vec::new(),
        h_out: Vec::new(),
        v_out: Vec::new(),
    };
    for _ in 0..straight {
        let last = *wires.h_in.last().unwrap_or(&h_minus1);
        extend(&mut layout, &mut wires.h_in, last - hs, Role::Horizontal)?;
        let last = *wires.v_in.last().unwrap_or(&v_feed);
        extend(&mut layout, &mut wires.v_in, last - vs, Role::Vertical)?;
        let last = *wires.h_out.last().unwrap_or(&gadget.h2);
        extend(&mut layout, &mut wires.h_out, last + hs, Role::Horizontal)?;
        let last = *wires.v_out.last().unwrap_or(&gadget.v2);
        extend(&mut layout, &mut wires.v_out, last + vs, Role::Vertical)?;
    }
    let config = layout.cells.iter().map(|(&u, &(_, level))| (u, level)).collect();
    Ok((wires, config))
}

fn extend(layout: &mut Layout, wire: &mut Vec<GridPoint>, next: GridPoint, role: Role) -> Result<(), SynthesisError> {
    if !layout.free(next) || !layout.quiet_toward_other(next, role) || !layout.shielded_from_other(next, role) {
        return Err(SynthesisError::GeometryConflict(format!("wire cell {next} interferes with the other signal")));
    }
    layout.place(next, role, layout.nb.p() - 1);
    wire.push(next);
    Ok(())
}

/// A verified crossing and everything used to build it.
#[derive(Debug, Clone)]
pub struct Synthesis {
    pub ratio: Rational,
    pub neighborhood: Neighborhood,
    pub configuration: Configuration,
    pub spec: CrossingSpec,
    pub plan: CrossingPlan,
    pub gadget: Gadget,
    pub wires: Wires,
    /// Translation applied to the lattice layout to land in the square.
    pub offset: MovementVector,
    pub report: CrossingReport,
}

/// Builds a crossing for `discretize(shape, r)` and verifies it.
pub fn synthesize(shape: &Shape, r: &Rational) -> Result<Synthesis, SynthesisError> {
    let plan = plan_crossing_vectors(shape)?;
    synthesize_with_plan(shape, &plan, r)
}

/// As [`synthesize`], reusing a plan computed for the same shape.
pub fn synthesize_with_plan(shape: &Shape, plan: &CrossingPlan, r: &Rational) -> Result<Synthesis, SynthesisError> {
    let nb = discretize(shape, r)?;
    let gadget = materialize_gadget(plan, &nb, r)?;
    let mut last_err = None;
    for straight in 1..=3 {
        match assemble(plan, &gadget, &nb, r, straight) {
            Ok(s) => return Ok(s),
            Err(e @ SynthesisError::SynthesisBug(_)) => return Err(e),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

/// Which border pair each signal uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Axes {
    /// Unit direction of travel of the horizontal-role signal.
    h_axis: (i64, i64),
    v_axis: (i64, i64),
}

fn axes(g: &Gadget) -> Result<Axes, SynthesisError> {
    let (h, v) = (g.h_step, g.v_step);
    if h.dx > 0 && v.dy > 0 {
        Ok(Axes { h_axis: (1, 0), v_axis: (0, 1) })
    } else if h.dy > 0 && v.dx > 0 {
        Ok(Axes { h_axis: (0, 1), v_axis: (1, 0) })
    } else {
        Err(SynthesisError::Orientation(format!("along {:?} and {:?}", (h.dx, h.dy), (v.dx, v.dy))))
    }
}

fn along(u: GridPoint, axis: (i64, i64)) -> i64 {
    u.x * axis.0 + u.y * axis.1
}

/// Movement vectors ordered by progress along `axis`, then by small drift.
fn axis_vectors(nb: &Neighborhood, axis: (i64, i64)) -> Vec<MovementVector> {
    let mut vs: Vec<MovementVector> = nb
        .vectors()
        .iter()
        .copied()
        .filter(|m| m.dx * axis.0 + m.dy * axis.1 > 0)
        .collect();
    vs.sort_by_key(|m| {
        let progress = m.dx * axis.0 + m.dy * axis.1;
        let drift = (m.dx * axis.1 + m.dy * axis.0).abs();
        (-progress, drift, *m)
    });
    vs
}

/// Shortest sequence (at most 4 steps) of vectors from `vs` whose progress
/// along `axis` sums to exactly `target`, preferring small total drift.
fn exact_steps(vs: &[MovementVector], axis: (i64, i64), target: i64) -> Option<Vec<MovementVector>> {
    if target == 0 {
        return Some(Vec::new());
    }
    // by_progress: the least drifting vector for each progress value.
    let mut by_progress: BTreeMap<i64, MovementVector> = BTreeMap::new();
    for &m in vs {
        let prog = m.dx * axis.0 + m.dy * axis.1;
        let drift = (m.dx * axis.1 + m.dy * axis.0).abs();
        let better = by_progress.get(&prog).is_none_or(|o| (o.dx * axis.1 + o.dy * axis.0).abs() > drift);
        if better {
            by_progress.insert(prog, m);
        }
    }
    let mut layer: BTreeMap<i64, Vec<MovementVector>> = BTreeMap::from([(0, Vec::new())]);
    for _ in 0..4 {
        let mut next: BTreeMap<i64, Vec<MovementVector>> = BTreeMap::new();
        for (sum, path) in &layer {
            for (&prog, &m) in &by_progress {
                let s = sum + prog;
                if s > target {
                    continue;
                }
                let mut path = path.clone();
                path.push(m);
                if s == target {
                    return Some(path);
                }
                next.entry(s).or_insert(path);
            }
        }
        layer = next;
    }
    None
}

/// Adds cells one by one to `wire`, starting after `from`, each reachable
/// from its predecessor (`forward`) or reaching it (`!forward`).
fn push_steps(
    layout: &mut Layout,
    wire: &mut Vec<GridPoint>,
    from: GridPoint,
    steps: &[MovementVector],
    forward: bool,
    role: Role,
) -> Result<(), SynthesisError> {
    let mut cur = *wire.last().unwrap_or(&from);
    for &m in steps {
        cur = if forward { cur + m } else { cur - m };
        extend(layout, wire, cur, role)?;
    }
    Ok(())
}

fn assemble(
    plan: &CrossingPlan,
    gadget: &Gadget,
    nb: &Neighborhood,
    r: &Rational,
    straight: usize,
) -> Result<Synthesis, SynthesisError> {
    let ax = axes(gadget)?;
    let (mut wires, config) = build_wires(plan, gadget, nb, r, straight)?;
    let mut layout = Layout { nb, cells: BTreeMap::new() };
    for (u, level) in config.iter() {
        let role = role_of(gadget, &wires, u);
        layout.place(u, role, level);
    }
    let h_vecs = axis_vectors(nb, ax.h_axis);
    let v_vecs = axis_vectors(nb, ax.v_axis);
    if h_vecs.is_empty() || v_vecs.is_empty() {
        return Err(SynthesisError::Orientation("no movement vector points toward a border".into()));
    }
    let (h_fast, v_fast) = (h_vecs[0], v_vecs[0]);

    // Push every wire end beyond all other cells along its axis.
    let entry = |w: &Wires, role: Role| match role {
        Role::Horizontal => *w.h_in.last().unwrap_or(&w.h_minus1),
        Role::Vertical => *w.v_in.last().unwrap_or(&w.v_feed),
    };
    let exit = |w: &Wires, role: Role| match role {
        Role::Horizontal => *w.h_out.last().unwrap_or(&gadget.h2),
        Role::Vertical => *w.v_out.last().unwrap_or(&gadget.v2),
    };
    for _ in 0..10_000 {
        let others = |layout: &Layout, skip: GridPoint| -> Vec<GridPoint> {
            layout.cells.keys().copied().filter(|&u| u != skip).collect()
        };
        let he = entry(&wires, Role::Horizontal);
        let ve = entry(&wires, Role::Vertical);
        let hx = exit(&wires, Role::Horizontal);
        let vx = exit(&wires, Role::Vertical);
        let min_h = others(&layout, he).into_iter().map(|u| along(u, ax.h_axis)).min().unwrap();
        let min_v = others(&layout, ve).into_iter().map(|u| along(u, ax.v_axis)).min().unwrap();
        let max_h = others(&layout, hx).into_iter().map(|u| along(u, ax.h_axis)).max().unwrap();
        let max_v = others(&layout, vx).into_iter().map(|u| along(u, ax.v_axis)).max().unwrap();
        if along(he, ax.h_axis) >= min_h {
            push_steps(&mut layout, &mut wires.h_in, wires.h_minus1, &[h_fast], false, Role::Horizontal)?;
        } else if along(ve, ax.v_axis) >= min_v {
            push_steps(&mut layout, &mut wires.v_in, wires.v_feed, &[v_fast], false, Role::Vertical)?;
        } else if along(hx, ax.h_axis) <= max_h {
            push_steps(&mut layout, &mut wires.h_out, gadget.h2, &[h_fast], true, Role::Horizontal)?;
        } else if along(vx, ax.v_axis) <= max_v {
            push_steps(&mut layout, &mut wires.v_out, gadget.v2, &[v_fast], true, Role::Vertical)?;
        } else {
            break;
        }
    }

    // Equalize the two sides of the enclosing rectangle by lengthening the
    // exit wire of the shorter direction.
    let span = |layout: &Layout, axis: (i64, i64)| {
        let vals: Vec<i64> = layout.cells.keys().map(|&u| along(u, axis)).collect();
        vals.iter().max().unwrap() - vals.iter().min().unwrap() + 1
    };
    let (sh, sv) = (span(&layout, ax.h_axis), span(&layout, ax.v_axis));
    let mut done = false;
    for extra in 0..64 {
        let n = sh.max(sv) + extra;
        let dh = exact_steps(&h_vecs, ax.h_axis, n - sh);
        let dv = exact_steps(&v_vecs, ax.v_axis, n - sv);
        if let (Some(dh), Some(dv)) = (dh, dv) {
            push_steps(&mut layout, &mut wires.h_out, gadget.h2, &dh, true, Role::Horizontal)?;
            push_steps(&mut layout, &mut wires.v_out, gadget.v2, &dv, true, Role::Vertical)?;
            done = true;
            break;
        }
    }
    if !done {
        return Err(SynthesisError::GeometryConflict("cannot square the enclosing rectangle".into()));
    }

    local_checks(&layout, gadget, &wires)?;

    // Translate into the square.
    let min_x = layout.cells.keys().map(|u| u.x).min().unwrap();
    let min_y = layout.cells.keys().map(|u| u.y).min().unwrap();
    let offset = MovementVector::new(-min_x, -min_y);
    let configuration: Configuration = layout.cells.iter().map(|(&u, &(_, level))| (u + offset, level)).collect();
    let bbox = configuration.bounding_box().expect("non-empty");
    let n = bbox.width();
    if n != bbox.height() {
        return Err(SynthesisError::GeometryConflict("enclosing rectangle is not square".into()));
    }
    let at = |u: GridPoint| u + offset;
    let (he, ve) = (at(entry(&wires, Role::Horizontal)), at(entry(&wires, Role::Vertical)));
    let (hx, vx) = (at(exit(&wires, Role::Horizontal)), at(exit(&wires, Role::Vertical)));
    let spec = if ax.h_axis == (1, 0) {
        CrossingSpec::square(n, ve.x, hx.y, vx.x, he.y)
    } else {
        CrossingSpec::square(n, he.x, vx.y, hx.x, ve.y)
    }
    .map_err(|e| SynthesisError::GeometryConflict(e.to_string()))?;

    let report = verify_crossing(&configuration, nb, &spec);
    if !report.verdict {
        return Err(SynthesisError::SynthesisBug(Box::new(report)));
    }
    Ok(Synthesis {
        ratio: r.clone(),
        neighborhood: nb.clone(),
        configuration,
        spec,
        plan: plan.clone(),
        gadget: gadget.clone(),
        wires,
        offset,
        report,
    })
}

fn role_of(g: &Gadget, w: &Wires, u: GridPoint) -> Role {
    let vertical = g.v1.contains(&u)
        || g.v2 == u
        || w.v_stages.iter().any(|s| s.contains(&u))
        || w.v_feed == u
        || w.v_in.contains(&u)
        || w.v_out.contains(&u);
    if vertical {
        Role::Vertical
    } else {
        Role::Horizontal
    }
}

/// Grain accounting before the global check: no cell gets enough grains
/// from the other signal to fire, and each exit has a single feeder.
fn local_checks(layout: &Layout, g: &Gadget, w: &Wires) -> Result<(), SynthesisError> {
    let p = layout.nb.p();
    for role in [Role::Horizontal, Role::Vertical] {
        let mut received: BTreeMap<GridPoint, u64> = BTreeMap::new();
        for u in layout.of(role) {
            for t in layout.nb.out_neighbors(u) {
                *received.entry(t).or_insert(0) += 1;
            }
        }
        for (t, got) in received {
            match layout.cells.get(&t) {
                Some((r, _)) if *r == role => {}
                Some((_, level)) if got >= p - level => {
                    return Err(SynthesisError::GeometryConflict(format!("{t} would fire from {got} foreign grains")));
                }
                None if got >= p => {
                    return Err(SynthesisError::GeometryConflict(format!("empty cell {t} would fire")));
                }
                _ => {}
            }
        }
    }
    let own: BTreeSet<GridPoint> = layout.of(Role::Horizontal).into_iter().collect();
    let hx = *w.h_out.last().unwrap_or(&g.h2);
    let feeders = own.iter().filter(|&&u| layout.nb.reaches(u, hx)).count();
    if feeders != 1 {
        return Err(SynthesisError::GeometryConflict(format!("horizontal exit {hx} has {feeders} feeders")));
    }
    let own: BTreeSet<GridPoint> = layout.of(Role::Vertical).into_iter().collect();
    let vx = *w.v_out.last().unwrap_or(&g.v2);
    let feeders = own.iter().filter(|&&u| layout.nb.reaches(u, vx)).count();
    if feeders != 1 {
        return Err(SynthesisError::GeometryConflict(format!("vertical exit {vx} has {feeders} feeders")));
    }
    Ok(())
}

/// Smallest ratio on the grid `step, 2 step, ..., r_max` where synthesis
/// succeeds, together with the ratios re-checked above it.
#[derive(Debug, Clone)]
pub struct RatioSearch {
    pub ratio: Rational,
    pub synthesis: Synthesis,
    /// `(ratio, succeeded)` for the follow-up checks at larger ratios.
    pub follow_up: Vec<(Rational, bool)>,
    /// Ratios tried before success, with the reason each failed.
    pub failures: Vec<(Rational, String)>,
}

pub fn find_min_working_ratio(shape: &Shape, r_max: &Rational, step: &Rational) -> Result<RatioSearch, SynthesisError> {
    if !step.is_positive() || !r_max.is_positive() {
        return Err(GeometryError::NonPositiveRatio.into());
    }
    let plan = plan_crossing_vectors(shape)?;
    let grid = crate::geometry::ratio_grid(step, r_max);
    let mut failures = Vec::new();
    for (i, r) in grid.iter().enumerate() {
        match synthesize_with_plan(shape, &plan, r) {
            Ok(synthesis) => {
                let larger = &grid[i + 1..];
                let mut picks: Vec<Rational> = Vec::new();
                let double = (r * rat(2)).min(r_max.clone());
                if &double != r {
                    picks.push(double);
                }
                // Three more spread over the rest of the grid.
                if !larger.is_empty() {
                    for k in 1..=3 {
                        let idx = (larger.len() * k / 4).min(larger.len() - 1);
                        picks.push(larger[idx].clone());
                    }
                }
                picks.sort();
                picks.dedup();
                let follow_up = picks
                    .into_iter()
                    .map(|q| {
                        let ok = synthesize_with_plan(shape, &plan, &q).is_ok();
                        (q, ok)
                    })
                    .collect();
                return Ok(RatioSearch { ratio: r.clone(), synthesis, follow_up, failures });
            }
            Err(e @ SynthesisError::SynthesisBug(_)) => return Err(e),
            Err(e) => failures.push((r.clone(), e.to_string())),
        }
    }
    Err(SynthesisError::NoRatioFound(crate::geometry::format_rational(r_max)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    #[test]
    fn unit_disk_plan() {
        let disk = Shape::unit_disk();
        let plan = plan_crossing_vectors(&disk).unwrap();
        assert_eq!(plan.case, PlanCase::QuadrantOne);
        assert_eq!(plan.h, Point::from_ints(1, 0));
        assert_eq!(plan.v_e, Point::from_ints(0, 1));
        assert!(plan.v1_outside_inverse(&disk));
        assert!(plan.segments_cross());
        assert!(plan.v.x.is_positive() && plan.v.y.is_positive());
        assert!(disk.contains(&plan.v));
        assert!(!plan.epsilon.is_zero());
    }

    #[test]
    fn flat_shape_has_no_plan() {
        let seg = Shape::polygon(vec![Point::from_ints(0, 0), Point::from_ints(2, 0), Point::from_ints(1, 0)]).unwrap();
        assert!(matches!(plan_crossing_vectors(&seg), Err(SynthesisError::Geometry(GeometryError::FlatShape { .. }))));
    }

    #[test]
    fn exact_step_decomposition() {
        let nb = Neighborhood::von_neumann(2);
        let vs = axis_vectors(&nb, (1, 0));
        assert_eq!(vs[0], MovementVector::new(2, 0));
        let steps = exact_steps(&vs, (1, 0), 5).unwrap();
        assert_eq!(steps.iter().map(|m| m.dx).sum::<i64>(), 5);
        assert!(steps.iter().all(|m| m.dy == 0));
        assert_eq!(exact_steps(&vs, (1, 0), 0), Some(vec![]));
        assert_eq!(exact_steps(&vs, (1, 0), 9), None);
    }
}
