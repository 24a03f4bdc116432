//! Semantic-segmentation rendering from the agent's camera.
//!
//! Each pixel casts a pinhole ray. Buildings are vertical prisms of a fixed
//! height found by walking the ray through the cell grid; rays that reach
//! the ground take the class of the ground cell, with the guidance path
//! painted as a ribbon. Pedestrians and waypoint spheres are screen-aligned
//! billboards depth-tested against the scene.
//!
//! Camera frame: x right, y down, z forward along the optical axis. Pixel
//! `(row, col)` has its center at `(u, v) = (col, row)` and the principal
//! point sits at the image center `((w - 1) / 2, (h - 1) / 2)`. Depth is the
//! z coordinate in the camera frame.

use crate::geom::{distance_to_polyline, Point};
use crate::guidance::GuidanceGeometry;
use crate::world::{AgentState, CityMap, SemanticClass};
use serde::{Deserialize, Serialize};

pub const FRAME_ROWS: usize = 84;
pub const FRAME_COLS: usize = 180;
pub const FRAME_BYTES: usize = FRAME_ROWS * FRAME_COLS;
pub const STACK_DEPTH: usize = 3;
pub const STACK_BYTES: usize = STACK_DEPTH * FRAME_BYTES;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraModel {
    /// Meters above the ground.
    pub mount_height: f64,
    /// Degrees below the horizon.
    pub pitch_deg: f64,
    /// Horizontal field of view in degrees.
    pub hfov_deg: f64,
    pub image_width: usize,
    pub image_height: usize,
    /// Near clipping distance, meters.
    pub near: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self {
            mount_height: 1.5,
            pitch_deg: 10.0,
            hfov_deg: 90.0,
            image_width: FRAME_COLS,
            image_height: FRAME_ROWS,
            near: 0.3,
        }
    }
}

impl CameraModel {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.hfov_deg > 0.0 && self.hfov_deg < 180.0) {
            return Err("hfov_deg must be in (0, 180)".into());
        }
        if !(self.mount_height > 0.0) {
            return Err("mount_height must be > 0".into());
        }
        if !(self.near > 0.0) {
            return Err("near must be > 0".into());
        }
        if self.image_width == 0 || self.image_height == 0 {
            return Err("image dimensions must be positive".into());
        }
        if !self.pitch_deg.is_finite() || self.pitch_deg.abs() >= 90.0 {
            return Err("pitch_deg must be in (-90, 90)".into());
        }
        Ok(())
    }

    /// Focal length in pixels.
    pub fn focal(&self) -> f64 {
        (self.image_width as f64 / 2.0) / (self.hfov_deg.to_radians() / 2.0).tan()
    }

    pub fn principal_point(&self) -> (f64, f64) {
        (
            (self.image_width as f64 - 1.0) / 2.0,
            (self.image_height as f64 - 1.0) / 2.0,
        )
    }

    /// Same optics at `factor` times the resolution.
    pub fn scaled(&self, factor: usize) -> Self {
        Self {
            image_width: self.image_width * factor,
            image_height: self.image_height * factor,
            ..*self
        }
    }

    /// Continuous row of the horizon line.
    pub fn horizon_row(&self) -> f64 {
        let (_, cy) = self.principal_point();
        cy - self.focal() * self.pitch_deg.to_radians().tan()
    }
}

/// Projected image location. `row`/`col` are continuous pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelHit {
    pub row: f64,
    pub col: f64,
    pub depth: f64,
}

/// Camera placed on an agent: world basis plus intrinsics.
#[derive(Debug, Clone, Copy)]
struct CameraPose {
    origin: Point,
    mount: f64,
    forward: Point,
    right: Point,
    sin_p: f64,
    cos_p: f64,
    focal: f64,
    cx: f64,
    cy: f64,
}

impl CameraPose {
    fn new(cam: &CameraModel, agent: &AgentState) -> Self {
        let forward = Point::from_heading(agent.heading);
        let right = Point::new(forward.y, -forward.x);
        let pitch = cam.pitch_deg.to_radians();
        let (cx, cy) = cam.principal_point();
        Self {
            origin: agent.position,
            mount: cam.mount_height,
            forward,
            right,
            sin_p: pitch.sin(),
            cos_p: pitch.cos(),
            focal: cam.focal(),
            cx,
            cy,
        }
    }

    /// Camera-frame coordinates (x right, y down, z forward) of a world point.
    fn to_camera(&self, p: Point, elevation: f64) -> (f64, f64, f64) {
        let rel = p - self.origin;
        let fwd = rel.dot(self.forward);
        let side = rel.dot(self.right);
        let up = elevation - self.mount;
        let y = -self.sin_p * fwd - self.cos_p * up;
        let z = self.cos_p * fwd - self.sin_p * up;
        (side, y, z)
    }

    /// Ray through pixel offset `(du, dv)` from the principal point, as a
    /// horizontal world direction and vertical rate per unit depth.
    fn ray(&self, du: f64, dv: f64) -> (Point, f64) {
        let xn = du / self.focal;
        let yn = dv / self.focal;
        let fwd = self.cos_p - yn * self.sin_p;
        let up = -self.sin_p - yn * self.cos_p;
        (self.forward * fwd + self.right * xn, up)
    }
}

/// Projects a world point at `elevation` meters into the image. `None`
/// when it lies in front of the near plane or outside the frustum.
pub fn project(cam: &CameraModel, agent: &AgentState, p: Point, elevation: f64) -> Option<PixelHit> {
    let pose = CameraPose::new(cam, agent);
    let (x, y, z) = pose.to_camera(p, elevation);
    if z < cam.near {
        return None;
    }
    let col = pose.cx + pose.focal * x / z;
    let row = pose.cy + pose.focal * y / z;
    let inside = col >= -0.5
        && col < cam.image_width as f64 - 0.5
        && row >= -0.5
        && row < cam.image_height as f64 - 0.5;
    inside.then_some(PixelHit { row, col, depth: z })
}

/// Ground point seen at continuous pixel `(row, col)`; `None` at or above
/// the horizon.
pub fn ground_point(cam: &CameraModel, agent: &AgentState, row: f64, col: f64) -> Option<Point> {
    let pose = CameraPose::new(cam, agent);
    let (dir, up) = pose.ray(col - pose.cx, row - pose.cy);
    if up >= 0.0 {
        return None;
    }
    let t = pose.mount / -up;
    Some(pose.origin + dir * t)
}

/// Scene parameters that are not part of the camera.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderParams {
    pub building_height: f64,
    /// Width of the ground ribbon drawn for the guidance path, meters.
    pub ribbon_width: f64,
    pub pedestrian_width: f64,
    pub pedestrian_height: f64,
}

impl Default for RenderParams {
    fn default() -> Self {
        Self {
            building_height: 15.0,
            ribbon_width: 1.0,
            pedestrian_width: 0.6,
            pedestrian_height: 1.7,
        }
    }
}

/// Class-id raster of arbitrary size, row-major from the top row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl ClassImage {
    pub fn get(&self, row: usize, col: usize) -> SemanticClass {
        SemanticClass::from_id(self.pixels[row * self.width + col]).expect("valid class id")
    }
}

/// One 84x180 segmentation frame.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SegFrame {
    pixels: Vec<u8>,
}

impl SegFrame {
    pub fn filled(class: SemanticClass) -> Self {
        Self {
            pixels: vec![class.id(); FRAME_BYTES],
        }
    }

    pub fn from_bytes(bytes: &[u8]) -> Option<Self> {
        (bytes.len() == FRAME_BYTES && bytes.iter().all(|&b| SemanticClass::from_id(b).is_some()))
            .then(|| Self {
                pixels: bytes.to_vec(),
            })
    }

    fn from_image(img: ClassImage) -> Option<Self> {
        (img.width == FRAME_COLS && img.height == FRAME_ROWS).then_some(Self { pixels: img.pixels })
    }

    pub fn get(&self, row: usize, col: usize) -> SemanticClass {
        SemanticClass::from_id(self.pixels[row * FRAME_COLS + col]).expect("valid class id")
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.pixels
    }

    pub fn row(&self, row: usize) -> &[u8] {
        &self.pixels[row * FRAME_COLS..(row + 1) * FRAME_COLS]
    }

    pub fn count(&self, class: SemanticClass) -> usize {
        self.pixels.iter().filter(|&&p| p == class.id()).count()
    }

    pub fn contains(&self, class: SemanticClass) -> bool {
        self.pixels.contains(&class.id())
    }

    /// Column-reversed copy.
    pub fn mirrored(&self) -> Self {
        let mut pixels = Vec::with_capacity(FRAME_BYTES);
        for r in 0..FRAME_ROWS {
            pixels.extend(self.row(r).iter().rev());
        }
        Self { pixels }
    }

    /// Binary PPM (P6) through the class palette.
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{FRAME_COLS} {FRAME_ROWS}\n255\n").into_bytes();
        for &p in &self.pixels {
            out.extend_from_slice(&SemanticClass::from_id(p).expect("valid class id").color());
        }
        out
    }
}

/// The three most recent frames, oldest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationStack {
    frames: [SegFrame; STACK_DEPTH],
}

impl ObservationStack {
    /// Episode start: the first frame replicated.
    pub fn reset(frame: SegFrame) -> Self {
        Self {
            frames: [frame.clone(), frame.clone(), frame],
        }
    }

    /// Drops the oldest frame and appends `frame`.
    pub fn push_frame(&mut self, frame: SegFrame) {
        self.frames.rotate_left(1);
        self.frames[STACK_DEPTH - 1] = frame;
    }

    pub fn frames(&self) -> &[SegFrame; STACK_DEPTH] {
        &self.frames
    }

    pub fn latest(&self) -> &SegFrame {
        &self.frames[STACK_DEPTH - 1]
    }

    /// Concatenated raw class ids, oldest frame first.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(STACK_BYTES);
        for f in &self.frames {
            out.extend_from_slice(f.as_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Option<Self> {
        if bytes.len() != STACK_BYTES {
            return None;
        }
        let mut frames = bytes.chunks(FRAME_BYTES).map(SegFrame::from_bytes);
        Some(Self {
            frames: [frames.next()??, frames.next()??, frames.next()??],
        })
    }
}

/// Functional form of [`ObservationStack::push_frame`].
pub fn push_frame(mut stack: ObservationStack, frame: SegFrame) -> ObservationStack {
    stack.push_frame(frame);
    stack
}

/// Scene content that changes per step.
#[derive(Debug, Clone, Copy)]
pub struct Scene<'a> {
    pub map: &'a CityMap,
    /// Current pedestrian positions.
    pub pedestrians: &'a [Point],
    pub geometry: &'a GuidanceGeometry,
}

enum BillboardShape {
    Circle { radius: f64 },
    Rect { half_w: f64, half_h: f64 },
}

struct Billboard {
    depth: f64,
    du: f64,
    dv: f64,
    shape: BillboardShape,
    class: SemanticClass,
}

/// Renders at the camera's own resolution.
pub fn render_image(
    scene: &Scene<'_>,
    agent: &AgentState,
    cam: &CameraModel,
    params: &RenderParams,
) -> ClassImage {
    let pose = CameraPose::new(cam, agent);
    let (w, h) = (cam.image_width, cam.image_height);
    let mut pixels = vec![SemanticClass::Void.id(); w * h];
    let mut depth = vec![f64::INFINITY; w * h];
    let ribbon = scene
        .geometry
        .path
        .as_deref()
        .filter(|p| !p.is_empty())
        .map(|p| (p, params.ribbon_width / 2.0));

    for row in 0..h {
        let dv = row as f64 - pose.cy;
        for col in 0..w {
            let du = col as f64 - pose.cx;
            let (class, t) = cast(scene.map, &pose, du, dv, params, ribbon);
            pixels[row * w + col] = class.id();
            depth[row * w + col] = t;
        }
    }

    let mut boards = Vec::new();
    let add = |boards: &mut Vec<Billboard>, p: Point, elevation: f64, shape: BillboardShape, class| {
        let (x, y, z) = pose.to_camera(p, elevation);
        if z >= cam.near {
            boards.push(Billboard {
                depth: z,
                du: pose.focal * x / z,
                dv: pose.focal * y / z,
                shape,
                class,
            });
        }
    };
    for &p in scene.pedestrians {
        let half_h = params.pedestrian_height / 2.0;
        add(
            &mut boards,
            p,
            half_h,
            BillboardShape::Rect {
                half_w: params.pedestrian_width / 2.0,
                half_h,
            },
            SemanticClass::Pedestrian,
        );
    }
    for s in &scene.geometry.spheres {
        add(
            &mut boards,
            s.center,
            s.radius,
            BillboardShape::Circle { radius: s.radius },
            SemanticClass::WaypointMarker,
        );
    }
    // painter's order, far to near; stable sort keeps input order on ties
    boards.sort_by(|a, b| b.depth.total_cmp(&a.depth));
    for b in &boards {
        let scale = pose.focal / b.depth;
        let (half_u, half_v) = match b.shape {
            BillboardShape::Circle { radius } => (radius * scale, radius * scale),
            BillboardShape::Rect { half_w, half_h } => (half_w * scale, half_h * scale),
        };
        let col_lo = ((pose.cx + b.du - half_u).floor().max(0.0)) as usize;
        let col_hi = ((pose.cx + b.du + half_u).ceil().min(w as f64 - 1.0)).max(-1.0);
        let row_lo = ((pose.cy + b.dv - half_v).floor().max(0.0)) as usize;
        let row_hi = ((pose.cy + b.dv + half_v).ceil().min(h as f64 - 1.0)).max(-1.0);
        if col_hi < 0.0 || row_hi < 0.0 {
            continue;
        }
        for row in row_lo..=row_hi as usize {
            let ov = (row as f64 - pose.cy) - b.dv;
            for col in col_lo..=col_hi as usize {
                let ou = (col as f64 - pose.cx) - b.du;
                let covered = match b.shape {
                    BillboardShape::Circle { .. } => ou * ou + ov * ov <= half_u * half_u,
                    BillboardShape::Rect { .. } => ou.abs() <= half_u && ov.abs() <= half_v,
                };
                let i = row * w + col;
                if covered && b.depth < depth[i] {
                    pixels[i] = b.class.id();
                    depth[i] = b.depth;
                }
            }
        }
    }

    ClassImage {
        width: w,
        height: h,
        pixels,
    }
}

/// Class and depth seen along one pixel ray.
fn cast(
    map: &CityMap,
    pose: &CameraPose,
    du: f64,
    dv: f64,
    params: &RenderParams,
    ribbon: Option<(&[Point], f64)>,
) -> (SemanticClass, f64) {
    let (dir, up) = pose.ray(du, dv);
    let top = params.building_height;
    let t_ground = if up < 0.0 { pose.mount / -up } else { f64::INFINITY };
    let t_end = if up < 0.0 {
        t_ground
    } else if up > 0.0 {
        ((top - pose.mount) / up).max(0.0)
    } else if pose.mount <= top {
        f64::INFINITY
    } else {
        0.0
    };

    if let Some(t) = march_buildings(map, pose, dir, up, t_end, top) {
        return (SemanticClass::Building, t);
    }
    if up >= 0.0 {
        return (SemanticClass::Void, f64::INFINITY);
    }
    let g = pose.origin + dir * t_ground;
    let mut class = map.query_class(g);
    if let Some((path, half)) = ribbon {
        if matches!(class, SemanticClass::Road | SemanticClass::Sidewalk)
            && distance_to_polyline(path, g) <= half
        {
            class = SemanticClass::GuidancePath;
        }
    }
    (class, t_ground)
}

/// Grid walk from the camera; returns the depth of the first building
/// surface the ray meets before `t_end`.
fn march_buildings(
    map: &CityMap,
    pose: &CameraPose,
    dir: Point,
    up: f64,
    t_end: f64,
    top: f64,
) -> Option<f64> {
    let cs = map.cell_size();
    let origin = map.origin();
    let (w, h) = (map.width() as i64, map.height() as i64);
    let g0 = Point::new((pose.origin.x - origin.x) / cs, (pose.origin.y - origin.y) / cs);
    let dg = dir * (1.0 / cs);

    // ray parameter range that overlaps the grid rectangle
    let mut t_exit = t_end;
    for (p, d, n) in [(g0.x, dg.x, w as f64), (g0.y, dg.y, h as f64)] {
        if d > 0.0 {
            t_exit = t_exit.min((n - p) / d);
        } else if d < 0.0 {
            t_exit = t_exit.min(-p / d);
        } else if p < 0.0 || p >= n {
            return None;
        }
    }
    if t_exit <= 0.0 {
        return None;
    }

    let mut ix = g0.x.floor() as i64;
    let mut iy = g0.y.floor() as i64;
    let axis = |p: f64, i: i64, d: f64| -> (i64, f64, f64) {
        if d > 0.0 {
            (1, ((i + 1) as f64 - p) / d, 1.0 / d)
        } else if d < 0.0 {
            (-1, (p - i as f64) / -d, -1.0 / d)
        } else {
            (0, f64::INFINITY, f64::INFINITY)
        }
    };
    let (step_x, mut t_max_x, delta_x) = axis(g0.x, ix, dg.x);
    let (step_y, mut t_max_y, delta_y) = axis(g0.y, iy, dg.y);
    let mut t_in = 0.0f64;
    let height_at = |t: f64| pose.mount + t * up;

    while t_in < t_exit {
        let t_out = t_max_x.min(t_max_y).min(t_exit);
        let inside = ix >= 0 && iy >= 0 && ix < w && iy < h;
        if inside && t_out > t_in {
            let cell = crate::world::Cell {
                col: ix as usize,
                row: iy as usize,
            };
            if map.class_of_cell(cell) == SemanticClass::Building {
                if height_at(t_in) <= top {
                    return Some(t_in);
                }
                if up < 0.0 {
                    let t_roof = (top - pose.mount) / up;
                    if t_roof <= t_out {
                        return Some(t_roof.max(t_in));
                    }
                }
            }
        }
        if t_max_x < t_max_y {
            ix += step_x;
            t_in = t_max_x;
            t_max_x += delta_x;
        } else {
            iy += step_y;
            t_in = t_max_y;
            t_max_y += delta_y;
        }
    }
    None
}

/// Renders one observation frame.
///
/// # Panics
/// If `cam` is not 180x84 pixels.
pub fn render_frame(
    scene: &Scene<'_>,
    agent: &AgentState,
    cam: &CameraModel,
    params: &RenderParams,
) -> SegFrame {
    SegFrame::from_image(render_image(scene, agent, cam, params))
        .expect("observation camera must be 180x84")
}

/// Renders at `factor` times the resolution and reduces each block to its
/// most frequent class. Ties go to the block's top-left-of-center sample
/// when it is among the tied classes, otherwise to the smallest class id.
pub fn render_frame_supersampled(
    scene: &Scene<'_>,
    agent: &AgentState,
    cam: &CameraModel,
    params: &RenderParams,
    factor: usize,
) -> SegFrame {
    if factor <= 1 {
        return render_frame(scene, agent, cam, params);
    }
    let big = render_image(scene, agent, &cam.scaled(factor), params);
    let mut pixels = Vec::with_capacity(FRAME_BYTES);
    for row in 0..cam.image_height {
        for col in 0..cam.image_width {
            let mut counts = [0usize; SemanticClass::COUNT];
            for r in 0..factor {
                for c in 0..factor {
                    let id = big.pixels[(row * factor + r) * big.width + col * factor + c];
                    counts[id as usize] += 1;
                }
            }
            let center = big.pixels[(row * factor + (factor - 1) / 2) * big.width + col * factor + (factor - 1) / 2];
            let best = *counts.iter().max().expect("nonempty");
            let id = if counts[center as usize] == best {
                center
            } else {
                counts.iter().position(|&n| n == best).expect("max exists") as u8
            };
            pixels.push(id);
        }
    }
    SegFrame::from_image(ClassImage {
        width: cam.image_width,
        height: cam.image_height,
        pixels,
    })
    .expect("observation camera must be 180x84")
}
