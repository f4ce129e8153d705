//! Photobash: stamp knowledge-base sprites onto a blank canvas, invent
//! sprites by cropping and compositing, and score pixel by pixel.

use crate::error::{GenerationError, ProtocolError, SuiteError};
use crate::generate::{resample, GenParams, Generator};
use crate::image::{index_for_unit, unit_coord_for, Canvas, CanvasSize, Color, Sprite};
use crate::painting::score_canvas;
use crate::protocol::{AssetSource, Assets, Baseline, Domain, DomainKind, Kb, Persist, Problem, RefId, Step};
use crate::rng::Rng;
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

pub const LIBRARY_CREATURES: usize = 24;
/// Side of the placement lattice searched by the no-invention baseline.
pub const LATTICE: u32 = 16;
pub const MIN_CANVAS_SIDE: u32 = 16;
/// Largest allowed overlap between two parts, as a share of the smaller one.
pub const MAX_PART_OVERLAP: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Head,
    Torso,
    FrontLegs,
    BackLegs,
}

impl Role {
    pub const ALL: [Role; 4] = [Role::Head, Role::Torso, Role::FrontLegs, Role::BackLegs];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

/// Opaque pixels of a sprite must fit inside the canvas to be stamped.
fn check_fits(size: CanvasSize, s: &Sprite) -> Result<(), ProtocolError> {
    if s.width() > size.width || s.height() > size.height {
        return Err(ProtocolError::InvalidAction(format!(
            "{}x{} sprite does not fit a {size} canvas",
            s.width(),
            s.height()
        )));
    }
    Ok(())
}

/// Top-left pixel for a stamp: `(floor(x(W-w)), floor(y(H-h)))`.
pub fn stamp_offset(size: CanvasSize, sprite: &Sprite, x: f64, y: f64) -> Result<(u32, u32), ProtocolError> {
    check_fits(size, sprite)?;
    if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
        return Err(ProtocolError::InvalidAction(format!(
            "coordinates ({x}, {y}) outside [0, 1]"
        )));
    }
    Ok((
        index_for_unit(x, size.width - sprite.width()),
        index_for_unit(y, size.height - sprite.height()),
    ))
}

pub fn stamp(canvas: &mut Canvas, sprite: &Sprite, x: f64, y: f64) -> Result<(), ProtocolError> {
    let (ox, oy) = stamp_offset(canvas.size(), sprite, x, y)?;
    canvas.stamp(sprite, ox, oy);
    Ok(())
}

pub fn crop(source: &Sprite, r: Rect) -> Result<Sprite, ProtocolError> {
    if r.w == 0 || r.h == 0 {
        return Err(ProtocolError::InvalidCombination("crop rectangle is empty".into()));
    }
    if r.x.checked_add(r.w).is_none_or(|e| e > source.width())
        || r.y.checked_add(r.h).is_none_or(|e| e > source.height())
    {
        return Err(ProtocolError::InvalidCombination(format!(
            "crop {}x{}+{}+{} leaves the {}x{} image",
            r.w,
            r.h,
            r.x,
            r.y,
            source.width(),
            source.height()
        )));
    }
    let out = source.sub_image(r.x, r.y, r.w, r.h);
    if out.opaque_count() == 0 {
        return Err(ProtocolError::InvalidCombination("crop is fully transparent".into()));
    }
    Ok(out)
}

/// Parts drawn in order onto a transparent surface just large enough to
/// hold them all.
pub fn composite(size: CanvasSize, parts: &[(&Sprite, u32, u32)]) -> Result<Sprite, ProtocolError> {
    if !(2..=4).contains(&parts.len()) {
        return Err(ProtocolError::InvalidCombination(format!(
            "composite takes 2-4 parts, got {}",
            parts.len()
        )));
    }
    let extent = |f: fn(&(&Sprite, u32, u32)) -> u64| parts.iter().map(f).max().unwrap_or(0);
    let w = extent(|(s, dx, _)| *dx as u64 + s.width() as u64);
    let h = extent(|(s, _, dy)| *dy as u64 + s.height() as u64);
    if w > size.width as u64 || h > size.height as u64 {
        return Err(ProtocolError::InvalidCombination(format!(
            "composite is {w}x{h}, larger than the {size} canvas"
        )));
    }
    let mut out = Sprite::transparent(w as u32, h as u32);
    for (s, dx, dy) in parts {
        out.overlay(s, *dx, *dy);
    }
    Ok(out)
}

impl Persist for Sprite {
    fn store(&self, key: &str, assets: &mut Assets) -> serde_json::Value {
        let image = format!("{key}.ppm");
        let mask = format!("{key}.pbm");
        assets.insert(image.clone(), self.to_ppm());
        assets.insert(mask.clone(), self.mask_to_pbm());
        serde_json::json!({ "image": image, "mask": mask })
    }

    fn load(value: &serde_json::Value, assets: &dyn AssetSource) -> Result<Self, SuiteError> {
        let stored = StoredSprite::deserialize(value).map_err(|e| SuiteError::Format(e.to_string()))?;
        Sprite::from_ppm_and_pbm(&assets.read_asset(&stored.image)?, &assets.read_asset(&stored.mask)?)
            .map_err(|e| SuiteError::Format(format!("{}: {e}", stored.image)))
    }
}

#[derive(Deserialize)]
struct StoredSprite {
    image: String,
    mask: String,
}

/// One part of a goal chimera: where it was cut from and where it sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacedPart {
    pub role: Role,
    /// Index into the initial knowledge base.
    pub source: usize,
    pub rect: Rect,
    pub dx: u32,
    pub dy: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhotobashGoal {
    pub canvas: Canvas,
    /// Composite order.
    pub parts: Vec<PlacedPart>,
    /// Canvas pixel of the chimera's top-left corner.
    pub offset: (u32, u32),
}

#[derive(Serialize, Deserialize)]
struct StoredGoal {
    image: String,
    parts: Vec<PlacedPart>,
    offset: (u32, u32),
}

impl Persist for PhotobashGoal {
    fn store(&self, key: &str, assets: &mut Assets) -> serde_json::Value {
        let image = self.canvas.store(key, assets);
        serde_json::json!({ "image": image, "parts": self.parts, "offset": self.offset })
    }

    fn load(value: &serde_json::Value, assets: &dyn AssetSource) -> Result<Self, SuiteError> {
        let stored = StoredGoal::deserialize(value).map_err(|e| SuiteError::Format(e.to_string()))?;
        Ok(PhotobashGoal {
            canvas: Canvas::load(&serde_json::Value::String(stored.image), assets)?,
            parts: stored.parts,
            offset: stored.offset,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stamp {
    pub x: f64,
    pub y: f64,
    pub image: RefId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cut {
    Crop { image: RefId, rect: Rect },
    Composite { parts: Vec<(RefId, u32, u32)> },
}

/// Change in total L1 distance to `goal` if `sprite` were stamped at
/// `(ox, oy)`; negative is better.
fn stamp_delta(current: &Canvas, goal: &Canvas, sprite: &Sprite, ox: u32, oy: u32) -> i64 {
    sprite
        .opaque_pixels()
        .map(|(x, y, c)| {
            let g = goal.get(ox + x, oy + y);
            c.l1(g) as i64 - current.get(ox + x, oy + y).l1(g) as i64
        })
        .sum()
}

fn lattice_offsets(span: u32) -> Vec<u32> {
    let mut v: Vec<u32> = (0..LATTICE)
        .map(|i| index_for_unit(i as f64 / (LATTICE - 1) as f64, span))
        .collect();
    v.dedup();
    v
}

/// Greedy stamping of whole sprites on the placement lattice: take the
/// single best improving stamp until none improves. A lower bound on the
/// no-invention optimum.
pub fn uncreative_max_photobash<S: Scalar>(kb: &[Sprite], goal: &Canvas) -> S {
    let size = goal.size();
    let mut canvas = Canvas::blank(size);
    let candidates: Vec<(&Sprite, Vec<u32>, Vec<u32>)> = kb
        .iter()
        .filter(|s| s.width() <= size.width && s.height() <= size.height)
        .map(|s| (s, lattice_offsets(size.width - s.width()), lattice_offsets(size.height - s.height())))
        .collect();
    loop {
        let mut best: Option<(i64, &Sprite, u32, u32)> = None;
        for (s, xs, ys) in &candidates {
            for &oy in ys {
                for &ox in xs {
                    let d = stamp_delta(&canvas, goal, s, ox, oy);
                    if d < 0 && best.is_none_or(|b| d < b.0) {
                        best = Some((d, s, ox, oy));
                    }
                }
            }
        }
        match best {
            Some((_, s, ox, oy)) => canvas.stamp(s, ox, oy),
            None => break,
        }
    }
    score_canvas(&canvas, goal)
}

/// Whether `sprite` placed at `(ox, oy)` agrees with `goal` on every
/// opaque pixel.
fn matches_at(goal: &Canvas, sprite: &Sprite, ox: u32, oy: u32) -> bool {
    sprite.opaque_pixels().all(|(x, y, c)| goal.get(ox + x, oy + y) == c)
}

/// The last stamp of any exact reproduction lands unchanged in the goal,
/// so if no knowledge-base sprite matches the goal anywhere, whole-sprite
/// stamps alone cannot reach 1.0.
pub fn whole_stamp_match(kb: &[Sprite], goal: &Canvas) -> Option<(usize, u32, u32)> {
    let size = goal.size();
    for (i, s) in kb.iter().enumerate() {
        if s.width() > size.width || s.height() > size.height || s.opaque_count() == 0 {
            continue;
        }
        for oy in 0..=size.height - s.height() {
            for ox in 0..=size.width - s.width() {
                if matches_at(goal, s, ox, oy) {
                    return Some((i, ox, oy));
                }
            }
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Photobash;

impl Domain for Photobash {
    const KIND: DomainKind = DomainKind::Photobash;
    const KB_RANGE: (usize, usize) = (2, 9);

    type Setting = CanvasSize;
    type Element = Sprite;
    type Goal = PhotobashGoal;
    type Submission = Canvas;
    type Action = Stamp;
    type Combination = Cut;

    fn null_submission(size: &CanvasSize) -> Canvas {
        Canvas::blank(*size)
    }

    fn apply(_: &CanvasSize, _: &PhotobashGoal, current: &mut Canvas, kb: Kb<'_, Self>, a: &Stamp) -> Result<(), ProtocolError> {
        stamp(current, kb.get(a.image)?, a.x, a.y)
    }

    fn combine(size: &CanvasSize, kb: Kb<'_, Self>, c: &Cut) -> Result<Sprite, ProtocolError> {
        let get = |r: RefId| kb.get(r).map_err(|e| ProtocolError::InvalidCombination(e.to_string()));
        match c {
            Cut::Crop { image, rect } => crop(get(*image)?, *rect),
            Cut::Composite { parts } => {
                let parts = parts
                    .iter()
                    .map(|&(r, dx, dy)| get(r).map(|s| (s, dx, dy)))
                    .collect::<Result<Vec<_>, _>>()?;
                composite(*size, &parts)
            }
        }
    }

    fn score(_: &CanvasSize, current: &Canvas, goal: &PhotobashGoal) -> f64 {
        score_canvas(current, &goal.canvas)
    }

    fn summarize(s: &Sprite) -> String {
        format!("sprite {}x{} ({} opaque pixels)", s.width(), s.height(), s.opaque_count())
    }

    fn uncreative_max(problem: &Problem<Self>) -> Baseline {
        Baseline {
            value: uncreative_max_photobash(&problem.initial_kb, &problem.goal.canvas),
            exact: false,
        }
    }

    fn difficulty_key(problem: &Problem<Self>) -> u64 {
        let mut sources: Vec<usize> = problem.goal.parts.iter().map(|p| p.source).collect();
        sources.sort_unstable();
        sources.dedup();
        sources.len() as u64
    }

    fn necessity_witness(problem: &Problem<Self>) -> Result<(), String> {
        match whole_stamp_match(&problem.initial_kb, &problem.goal.canvas) {
            Some((i, x, y)) => Err(format!("knowledge-base sprite {i} matches the goal at ({x}, {y})")),
            None => Ok(()),
        }
    }
}

/// A whole creature and where each of its parts sits inside it.
#[derive(Debug, Clone, PartialEq)]
pub struct Creature {
    pub sprite: Sprite,
    /// Indexed like [`Role::ALL`].
    pub parts: [Rect; 4],
}

impl Creature {
    pub fn rect(&self, role: Role) -> Rect {
        self.parts[Role::ALL.iter().position(|&r| r == role).unwrap()]
    }

    pub fn part(&self, role: Role) -> Sprite {
        let r = self.rect(role);
        self.sprite.sub_image(r.x, r.y, r.w, r.h)
    }
}

fn dark_color(rng: &mut Rng) -> Color {
    Color::new(rng.range(0, 200) as u8, rng.range(0, 200) as u8, rng.range(0, 200) as u8)
}

fn scaled(rng: &mut Rng, lo: u32, hi: u32, side: u32) -> u32 {
    let v = rng.range(lo as usize, hi as usize) as f64 * side as f64 / 64.0;
    (v.round() as u32).max(3)
}

fn draw_head(w: u32, h: u32, base: Color, accent: Color, rng: &mut Rng) -> Sprite {
    let mut s = Sprite::from_pixels(w, h, vec![Some(base); (w * h) as usize]);
    // Rounded snout: trim the left corners.
    if rng.chance(0.5) {
        let cut = (h / 4).max(1);
        for i in 0..cut {
            for x in 0..cut - i {
                s.set(x, i, None);
                s.set(x, h - 1 - i, None);
            }
        }
    }
    let (ex, ey) = (w / 3, h / 3);
    for (x, y) in [(ex, ey), (ex + 1, ey), (ex, ey + 1), (ex + 1, ey + 1)] {
        if x < w && y < h {
            s.set(x, y, Some(accent));
        }
    }
    s
}

fn draw_torso(w: u32, h: u32, base: Color, accent: Color, rng: &mut Rng) -> Sprite {
    let mut s = Sprite::from_pixels(w, h, vec![Some(base); (w * h) as usize]);
    match rng.below(3) {
        0 => {
            for y in (1..h).step_by(3) {
                for x in 0..w {
                    s.set(x, y, Some(accent));
                }
            }
        }
        1 => {
            for _ in 0..(w * h / 12) {
                let (x, y) = (rng.below(w as usize) as u32, rng.below(h as usize) as u32);
                s.set(x, y, Some(accent));
            }
        }
        _ => {}
    }
    // Round the back: only the top corners go, so the left side and the
    // bottom row stay solid for the head and legs to attach to.
    if rng.chance(0.5) {
        for (x, y) in [(0, 0), (1, 0), (0, 1), (w - 1, 0), (w - 2, 0), (w - 1, 1)] {
            s.set(x, y, None);
        }
    }
    s
}

fn draw_legs(w: u32, h: u32, base: Color, hoof: Color) -> Sprite {
    let mut s = Sprite::transparent(w, h);
    let bar = (w / 4).max(1);
    for y in 0..h {
        for x in 0..w {
            let band = y < 2;
            let leg = x < bar || x >= w - bar;
            if band || leg {
                let c = if y == h - 1 { hoof } else { base };
                s.set(x, y, Some(c));
            }
        }
    }
    s
}

/// One creature: a head left of the torso, front and back legs under it.
pub fn draw_creature(size: CanvasSize, rng: &mut Rng) -> Creature {
    let (sw, sh) = (size.width, size.height);
    let hw = scaled(rng, 12, 18, sw);
    let hh = scaled(rng, 12, 18, sh);
    let tw = scaled(rng, 26, 36, sw).max(4);
    let th = scaled(rng, 16, 24, sh);
    let lh = scaled(rng, 10, 16, sh);
    let (body, accent, legs, hoof) = (dark_color(rng), dark_color(rng), dark_color(rng), dark_color(rng));
    let head = draw_head(hw, hh, body, accent, rng);
    let torso = draw_torso(tw, th, body, accent, rng);
    let fw = tw / 2;
    let front = draw_legs(fw, lh, legs, hoof);
    let back = draw_legs(tw - fw, lh, legs, hoof);
    let ty = hh / 2;
    let rects = [
        Rect { x: 0, y: 0, w: hw, h: hh },
        Rect { x: hw, y: ty, w: tw, h: th },
        Rect { x: hw, y: ty + th, w: fw, h: lh },
        Rect { x: hw + fw, y: ty + th, w: tw - fw, h: lh },
    ];
    let w = hw + tw;
    let h = hh.max(ty + th + lh);
    let mut sprite = Sprite::transparent(w, h);
    for (part, r) in [&head, &torso, &front, &back].into_iter().zip(&rects) {
        sprite.overlay(part, r.x, r.y);
    }
    Creature { sprite, parts: rects }
}

/// Where each part of a chimera goes, given the parts' sizes: head at the
/// origin, torso to its right, front legs under the torso's front edge and
/// back legs under its rear edge.
pub fn chimera_layout(head: Rect, torso: Rect, back: Rect) -> [(u32, u32); 4] {
    let ty = head.h / 2;
    let by = ty + torso.h;
    let tail = (head.w + torso.w).saturating_sub(back.w).max(head.w);
    [(0, 0), (head.w, ty), (head.w, by), (tail, by)]
}

/// Opaque-pixel overlap of two placed sprites.
fn overlap(a: &Sprite, (ax, ay): (u32, u32), b: &Sprite, (bx, by): (u32, u32)) -> usize {
    a.opaque_pixels()
        .filter(|&(x, y, _)| {
            let (gx, gy) = (ax + x, ay + y);
            gx >= bx && gy >= by && gx - bx < b.width() && gy - by < b.height() && b.get(gx - bx, gy - by).is_some()
        })
        .count()
}

fn four_connected(s: &Sprite) -> bool {
    let Some((sx, sy, _)) = s.opaque_pixels().next() else {
        return false;
    };
    let (w, h) = (s.width(), s.height());
    let mut seen = vec![false; (w * h) as usize];
    let mut stack = vec![(sx, sy)];
    seen[(sy * w + sx) as usize] = true;
    let mut count = 0;
    while let Some((x, y)) = stack.pop() {
        count += 1;
        let near = [
            (x.wrapping_sub(1), y),
            (x + 1, y),
            (x, y.wrapping_sub(1)),
            (x, y + 1),
        ];
        for (nx, ny) in near {
            if nx < w && ny < h && !seen[(ny * w + nx) as usize] && s.get(nx, ny).is_some() {
                seen[(ny * w + nx) as usize] = true;
                stack.push((nx, ny));
            }
        }
    }
    count == s.opaque_count()
}

/// Parts pairwise overlap by at most 10% of the smaller part, and the
/// assembled opaque region is one 4-connected piece.
pub fn coherent(parts: &[(&Sprite, u32, u32)], assembled: &Sprite) -> bool {
    for (i, a) in parts.iter().enumerate() {
        for b in &parts[i + 1..] {
            let shared = overlap(a.0, (a.1, a.2), b.0, (b.1, b.2));
            let smaller = a.0.opaque_count().min(b.0.opaque_count());
            if shared as f64 > MAX_PART_OVERLAP * smaller as f64 {
                return false;
            }
        }
    }
    four_connected(assembled)
}

pub struct CreatureLibrary {
    pub creatures: Vec<Creature>,
}

impl CreatureLibrary {
    pub fn part_count(&self) -> usize {
        self.creatures.len() * Role::ALL.len()
    }
}

struct Draft {
    kb: Vec<usize>,
    /// Creature index per role, in [`Role::ALL`] order.
    donors: [usize; 4],
    chimera: Sprite,
    layout: [(u32, u32); 4],
    offset: (u32, u32),
}

fn try_photobash(lib: &CreatureLibrary, size: CanvasSize, rng: &mut Rng) -> Option<Draft> {
    let n = lib.creatures.len();
    let sources = rng.range(2, 4);
    let picked = rng.sample_indices(n, sources);
    // Every source donates at least one part.
    let mut donors = [0usize; 4];
    let mut slots: Vec<usize> = (0..4).collect();
    rng.shuffle(&mut slots);
    for (i, &slot) in slots.iter().enumerate() {
        donors[slot] = if i < sources { picked[i] } else { *rng.choose(&picked) };
    }
    let rects: Vec<Rect> = Role::ALL
        .iter()
        .zip(donors)
        .map(|(&role, c)| lib.creatures[c].rect(role))
        .collect();
    let layout = chimera_layout(rects[0], rects[1], rects[3]);
    let sprites: Vec<Sprite> = Role::ALL
        .iter()
        .zip(donors)
        .map(|(&role, c)| lib.creatures[c].part(role))
        .collect();
    let placed: Vec<(&Sprite, u32, u32)> = sprites.iter().zip(layout).map(|(s, (x, y))| (s, x, y)).collect();
    let chimera = composite(size, &placed).ok()?;
    if !coherent(&placed, &chimera) {
        return None;
    }
    let total = rng.range(sources.max(2), 9);
    let mut kb = picked.clone();
    let rest: Vec<usize> = (0..n).filter(|i| !picked.contains(i)).collect();
    for j in rng.sample_indices(rest.len(), total - sources) {
        kb.push(rest[j]);
    }
    rng.shuffle(&mut kb);
    let offset = (
        rng.range(0, (size.width - chimera.width()) as usize) as u32,
        rng.range(0, (size.height - chimera.height()) as usize) as u32,
    );
    Some(Draft {
        kb,
        donors,
        chimera,
        layout,
        offset,
    })
}

impl Generator for Photobash {
    type Library = CreatureLibrary;

    fn build_library(seed: u64, params: &GenParams) -> Result<CreatureLibrary, GenerationError> {
        let size = params.canvas;
        if size.width < MIN_CANVAS_SIDE || size.height < MIN_CANVAS_SIDE {
            return Err(GenerationError::Input(format!(
                "photobash needs a canvas of at least {MIN_CANVAS_SIDE}x{MIN_CANVAS_SIDE}, got {size}"
            )));
        }
        let mut rng = Rng::new(seed);
        let creatures = (0..LIBRARY_CREATURES).map(|_| draw_creature(size, &mut rng)).collect();
        Ok(CreatureLibrary { creatures })
    }

    fn generate_one(lib: &CreatureLibrary, params: &GenParams, seed: u64) -> Result<Problem<Self>, GenerationError> {
        let size = params.canvas;
        let mut rng = Rng::new(seed);
        let (d, goal_canvas, initial) = resample(1_000, "coherent chimera", || {
            let d = try_photobash(lib, size, &mut rng)?;
            let mut goal = Canvas::blank(size);
            goal.stamp(&d.chimera, d.offset.0, d.offset.1);
            let kb: Vec<Sprite> = d.kb.iter().map(|&i| lib.creatures[i].sprite.clone()).collect();
            // Whole sprites alone must not be able to finish the picture.
            if whole_stamp_match(&kb, &goal).is_some() {
                return None;
            }
            Some((d, goal, kb))
        })?;
        let kb_pos = |c: usize| d.kb.iter().position(|&k| k == c).expect("donor in kb");
        let parts: Vec<PlacedPart> = Role::ALL
            .iter()
            .enumerate()
            .map(|(i, &role)| PlacedPart {
                role,
                source: kb_pos(d.donors[i]),
                rect: lib.creatures[d.donors[i]].rect(role),
                dx: d.layout[i].0,
                dy: d.layout[i].1,
            })
            .collect();
        let mut oracle: Vec<Step<Photobash>> = parts
            .iter()
            .map(|p| {
                Step::Combine(Cut::Crop {
                    image: RefId::new(p.source),
                    rect: p.rect,
                })
            })
            .collect();
        let base = initial.len();
        oracle.push(Step::Combine(Cut::Composite {
            parts: parts
                .iter()
                .enumerate()
                .map(|(i, p)| (RefId::new(base + i), p.dx, p.dy))
                .collect(),
        }));
        oracle.push(Step::Apply(Stamp {
            x: unit_coord_for(d.offset.0, size.width - d.chimera.width()),
            y: unit_coord_for(d.offset.1, size.height - d.chimera.height()),
            image: RefId::new(base + 4),
        }));
        let mut problem = Problem {
            id: String::new(),
            difficulty_rank: 0,
            gen_seed: seed,
            setting: size,
            initial_kb: initial,
            goal: PhotobashGoal {
                canvas: goal_canvas,
                parts,
                offset: d.offset,
            },
            oracle,
            baseline: Baseline { value: 0.0, exact: false },
        };
        problem.baseline = Photobash::uncreative_max(&problem);
        Ok(problem)
    }
}
