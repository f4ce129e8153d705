//! Painting: place knowledge-base colors on a blank canvas, invent new
//! colors by mixing, and score by per-pixel L1 distance to a hidden
//! goal painting.

use crate::error::{GenerationError, ProtocolError, SuiteError};
use crate::generate::{resample, GenParams, Generator};
use crate::image::{index_for_unit, unit_coord_for, Canvas, CanvasSize, Color};
use crate::protocol::{
    inline_persist, AssetSource, Assets, Baseline, Domain, DomainKind, Kb, Persist, Problem, RefId,
    Step,
};
use crate::rng::Rng;
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

/// The 12-hue RGB color wheel: primaries, secondaries and tertiaries.
pub const COLOR_WHEEL: [Color; 12] = [
    Color::new(255, 0, 0),     // red
    Color::new(255, 128, 0),   // orange
    Color::new(255, 255, 0),   // yellow
    Color::new(128, 255, 0),   // chartreuse
    Color::new(0, 255, 0),     // green
    Color::new(0, 255, 128),   // spring green
    Color::new(0, 255, 255),   // cyan
    Color::new(0, 128, 255),   // azure
    Color::new(0, 0, 255),     // blue
    Color::new(128, 0, 255),   // violet
    Color::new(255, 0, 255),   // magenta
    Color::new(255, 0, 128),   // rose
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixMode {
    Additive,
    Subtractive,
}

/// Additive: clamped channel sum. Subtractive: channel product over 255,
/// rounded half up.
pub fn mix(a: Color, b: Color, mode: MixMode) -> Color {
    let ch = |x: u8, y: u8| -> u8 {
        match mode {
            MixMode::Additive => x.saturating_add(y),
            MixMode::Subtractive => ((x as u32 * y as u32 * 2 + 255) / 510) as u8,
        }
    };
    Color::new(ch(a.r, b.r), ch(a.g, b.g), ch(a.b, b.b))
}

/// `1 - sum(|dr|+|dg|+|db|) / (W*H*3*255)`.
///
/// Panics if the canvases differ in size; sessions never produce that.
pub fn score_canvas<S: Scalar>(current: &Canvas, goal: &Canvas) -> S {
    assert_eq!(current.size(), goal.size(), "canvas size mismatch");
    let diff: u64 = current
        .pixels()
        .iter()
        .zip(goal.pixels())
        .map(|(a, b)| a.l1(*b) as u64)
        .sum();
    let den = goal.pixels().len() as u64 * 765;
    S::from_ratio(den - diff, den)
}

/// Maps unit coordinates to a pixel: `(floor(x(W-1)), floor(y(H-1)))`.
pub fn pixel_for(size: CanvasSize, x: f64, y: f64) -> Result<(u32, u32), ProtocolError> {
    if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
        return Err(ProtocolError::InvalidAction(format!(
            "coordinates ({x}, {y}) outside [0, 1]"
        )));
    }
    Ok((
        index_for_unit(x, size.width - 1),
        index_for_unit(y, size.height - 1),
    ))
}

/// Sets one pixel of `canvas` to a knowledge-base color.
pub fn paint(canvas: &mut Canvas, x: f64, y: f64, color: Color) -> Result<(), ProtocolError> {
    let (px, py) = pixel_for(canvas.size(), x, y)?;
    canvas.set(px, py, color);
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Rectangle,
    Circle,
    Triangle,
}

/// A filled shape inside a bounding box given in canvas fractions.
///
/// Rectangles fill the box, circles are the inscribed ellipse, triangles
/// have their apex at the top-center and their base on the bottom edge.
/// A pixel belongs to the footprint when its center does.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub fill: Color,
}

impl ShapeSpec {
    pub fn inside_canvas(&self) -> bool {
        self.x >= 0.0 && self.y >= 0.0 && self.w > 0.0 && self.h > 0.0
            && self.x + self.w <= 1.0
            && self.y + self.h <= 1.0
    }

    fn contains(&self, u: f64, v: f64) -> bool {
        if u < self.x || u >= self.x + self.w || v < self.y || v >= self.y + self.h {
            return false;
        }
        match self.kind {
            ShapeKind::Rectangle => true,
            ShapeKind::Circle => {
                let dx = (u - (self.x + self.w / 2.0)) / (self.w / 2.0);
                let dy = (v - (self.y + self.h / 2.0)) / (self.h / 2.0);
                dx * dx + dy * dy <= 1.0
            }
            ShapeKind::Triangle => {
                let half = (v - self.y) / self.h * self.w / 2.0;
                (u - (self.x + self.w / 2.0)).abs() <= half
            }
        }
    }

    /// Pixel coordinates covered on a canvas of `size`.
    pub fn footprint(&self, size: CanvasSize) -> Vec<(u32, u32)> {
        let (w, h) = (size.width as f64, size.height as f64);
        let x0 = (self.x * w).floor().max(0.0) as u32;
        let y0 = (self.y * h).floor().max(0.0) as u32;
        let x1 = ((self.x + self.w) * w).ceil().min(w) as u32;
        let y1 = ((self.y + self.h) * h).ceil().min(h) as u32;
        let mut out = Vec::new();
        for py in y0..y1 {
            for px in x0..x1 {
                if self.contains((px as f64 + 0.5) / w, (py as f64 + 0.5) / h) {
                    out.push((px, py));
                }
            }
        }
        out
    }
}

/// Renders shapes in order onto a white canvas.
pub fn render_shapes(size: CanvasSize, shapes: &[ShapeSpec]) -> Canvas {
    let mut canvas = Canvas::blank(size);
    for s in shapes {
        for (px, py) in s.footprint(size) {
            canvas.set(px, py, s.fill);
        }
    }
    canvas
}

#[derive(Debug, Clone, PartialEq)]
pub struct PaintingGoal {
    pub canvas: Canvas,
    /// The shapes the canvas was rendered from.
    pub shapes: Vec<ShapeSpec>,
}

#[derive(Serialize, Deserialize)]
struct StoredGoal {
    image: String,
    shapes: Vec<ShapeSpec>,
}

impl Persist for Canvas {
    fn store(&self, key: &str, assets: &mut Assets) -> serde_json::Value {
        let name = format!("{key}.ppm");
        assets.insert(name.clone(), self.to_ppm());
        serde_json::Value::String(name)
    }

    fn load(value: &serde_json::Value, assets: &dyn AssetSource) -> Result<Self, SuiteError> {
        let name = value
            .as_str()
            .ok_or_else(|| SuiteError::Format("canvas must be an asset name".into()))?;
        Canvas::from_ppm(&assets.read_asset(name)?)
            .map_err(|e| SuiteError::Format(format!("{name}: {e}")))
    }
}

impl Persist for PaintingGoal {
    fn store(&self, key: &str, assets: &mut Assets) -> serde_json::Value {
        let image = self.canvas.store(key, assets);
        serde_json::json!({ "image": image, "shapes": self.shapes })
    }

    fn load(value: &serde_json::Value, assets: &dyn AssetSource) -> Result<Self, SuiteError> {
        let stored = StoredGoal::deserialize(value).map_err(|e| SuiteError::Format(e.to_string()))?;
        let canvas = Canvas::load(&serde_json::Value::String(stored.image), assets)?;
        Ok(PaintingGoal {
            canvas,
            shapes: stored.shapes,
        })
    }
}

inline_persist!(Color);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Paint {
    pub x: f64,
    pub y: f64,
    pub color: RefId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mix {
    pub a: RefId,
    pub b: RefId,
    pub mode: MixMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Painting;

impl Domain for Painting {
    const KIND: DomainKind = DomainKind::Painting;
    const KB_RANGE: (usize, usize) = (2, 6);

    type Setting = CanvasSize;
    type Element = Color;
    type Goal = PaintingGoal;
    type Submission = Canvas;
    type Action = Paint;
    type Combination = Mix;

    fn null_submission(setting: &CanvasSize) -> Canvas {
        Canvas::blank(*setting)
    }

    fn apply(
        _setting: &CanvasSize,
        _goal: &PaintingGoal,
        canvas: &mut Canvas,
        kb: Kb<'_, Self>,
        action: &Paint,
    ) -> Result<(), ProtocolError> {
        let color = *kb.get(action.color)?;
        paint(canvas, action.x, action.y, color)
    }

    fn combine(_setting: &CanvasSize, kb: Kb<'_, Self>, m: &Mix) -> Result<Color, ProtocolError> {
        let invalid = |e: ProtocolError| ProtocolError::InvalidCombination(e.to_string());
        let a = *kb.get(m.a).map_err(invalid)?;
        let b = *kb.get(m.b).map_err(invalid)?;
        Ok(mix(a, b, m.mode))
    }

    fn score(_setting: &CanvasSize, canvas: &Canvas, goal: &PaintingGoal) -> f64 {
        score_canvas(canvas, &goal.canvas)
    }

    fn summarize(c: &Color) -> String {
        format!("color {c}")
    }

    fn uncreative_max(problem: &Problem<Self>) -> Baseline {
        Baseline {
            value: uncreative_max_painting::<f64>(&problem.initial_kb, &problem.goal.canvas),
            exact: true,
        }
    }

    fn difficulty_key(problem: &Problem<Self>) -> u64 {
        let invented = invented_colors(&problem.initial_kb, &problem.goal.shapes);
        (problem.initial_kb.len() + invented.len() + problem.goal.shapes.len()) as u64
    }
}

/// Exact no-invention optimum: pixels are independent, so each takes its
/// L1-nearest color among the palette and white.
pub fn uncreative_max_painting<S: Scalar>(palette: &[Color], goal: &Canvas) -> S {
    let diff: u64 = goal
        .pixels()
        .iter()
        .map(|&g| {
            palette
                .iter()
                .chain(std::iter::once(&Color::WHITE))
                .map(|&c| c.l1(g) as u64)
                .min()
                .unwrap_or(0)
        })
        .sum();
    let den = goal.pixels().len() as u64 * 765;
    S::from_ratio(den - diff, den)
}

/// Distinct shape colors absent from the palette, in first-use order.
fn invented_colors(palette: &[Color], shapes: &[ShapeSpec]) -> Vec<Color> {
    let mut out = Vec::new();
    for s in shapes {
        if !palette.contains(&s.fill) && !out.contains(&s.fill) {
            out.push(s.fill);
        }
    }
    out
}

/// Every distinct single-step mix of two palette colors that is neither
/// white nor already in the palette, with the first recipe producing it.
pub fn mix_targets(palette: &[Color]) -> Vec<(Color, usize, usize, MixMode)> {
    let mut out: Vec<(Color, usize, usize, MixMode)> = Vec::new();
    for i in 0..palette.len() {
        for j in i + 1..palette.len() {
            for mode in [MixMode::Additive, MixMode::Subtractive] {
                let c = mix(palette[i], palette[j], mode);
                if c != Color::WHITE && !palette.contains(&c) && !out.iter().any(|t| t.0 == c) {
                    out.push((c, i, j, mode));
                }
            }
        }
    }
    out
}

fn sample_shape(rng: &mut Rng, size: CanvasSize, area: f64, fill: Color) -> Option<ShapeSpec> {
    let kind = *rng.choose(&[ShapeKind::Rectangle, ShapeKind::Circle, ShapeKind::Triangle]);
    // Bounding-box area needed for the footprint to hit `area`.
    let box_area = match kind {
        ShapeKind::Rectangle => area,
        ShapeKind::Circle => area * 4.0 / std::f64::consts::PI,
        ShapeKind::Triangle => area * 2.0,
    };
    let aspect = if kind == ShapeKind::Circle {
        // Round in pixel space.
        size.height as f64 / size.width as f64
    } else {
        rng.range_f64(0.5, 2.0)
    };
    let w = (box_area * aspect).sqrt();
    let h = box_area / w;
    if w > 1.0 || h > 1.0 {
        return None;
    }
    let s = ShapeSpec {
        kind,
        x: rng.range_f64(0.0, 1.0 - w),
        y: rng.range_f64(0.0, 1.0 - h),
        w,
        h,
        fill,
    };
    (s.inside_canvas() && !s.footprint(size).is_empty()).then_some(s)
}

/// Null-state score of a goal, i.e. the all-white canvas against it.
pub fn null_score(goal: &Canvas) -> f64 {
    score_canvas(&Canvas::blank(goal.size()), goal)
}

fn try_painting(rng: &mut Rng, size: CanvasSize) -> Option<(Vec<Color>, Vec<(Color, usize, usize, MixMode)>, Vec<ShapeSpec>, Canvas)> {
    let k = rng.range(2, 6);
    let palette: Vec<Color> = rng
        .sample_indices(COLOR_WHEEL.len(), k)
        .into_iter()
        .map(|i| COLOR_WHEEL[i])
        .collect();
    let candidates = mix_targets(&palette);
    if candidates.is_empty() {
        return None;
    }
    let t = rng.range(1, candidates.len().min(3));
    let targets: Vec<_> = rng
        .sample_indices(candidates.len(), t)
        .into_iter()
        .map(|i| candidates[i])
        .collect();

    let n = rng.range(1, 8);
    let coverage = rng.range_f64(0.22, 0.38);
    let mut colors: Vec<Color> = palette.clone();
    colors.extend(targets.iter().map(|t| t.0));
    let forced = rng.below(n);
    let mut shapes = Vec::with_capacity(n);
    for i in 0..n {
        let fill = if i == forced {
            rng.choose(&targets).0
        } else {
            *rng.choose(&colors)
        };
        let area = coverage / n as f64 * rng.range_f64(0.6, 1.6);
        shapes.push(sample_shape(rng, size, area, fill)?);
    }
    let canvas = render_shapes(size, &shapes);

    let frac = canvas.coverage() as f64 / size.area() as f64;
    if !(0.20..=0.40).contains(&frac) {
        return None;
    }
    if !canvas
        .pixels()
        .iter()
        .any(|p| *p != Color::WHITE && !palette.contains(p))
    {
        return None;
    }
    if !(0.55..=0.95).contains(&null_score(&canvas)) {
        return None;
    }
    // Only keep targets that survived overdraw, so the difficulty key and
    // the oracle agree with what is visible.
    let used: Vec<_> = targets
        .into_iter()
        .filter(|t| shapes.iter().any(|s| s.fill == t.0))
        .collect();
    Some((palette, used, shapes, canvas))
}

/// Mixes for each target, then one paint per non-white goal pixel.
fn oracle_script(size: CanvasSize, palette: &[Color], targets: &[(Color, usize, usize, MixMode)], goal: &Canvas) -> Vec<Step<Painting>> {
    let mut script: Vec<Step<Painting>> = targets
        .iter()
        .map(|&(_, i, j, mode)| {
            Step::Combine(Mix {
                a: RefId::new(i),
                b: RefId::new(j),
                mode,
            })
        })
        .collect();
    for y in 0..size.height {
        for x in 0..size.width {
            let c = goal.get(x, y);
            if c == Color::WHITE {
                continue;
            }
            let color = match palette.iter().position(|&p| p == c) {
                Some(i) => RefId::new(i),
                None => {
                    let t = targets.iter().position(|t| t.0 == c).expect("goal colors come from palette or targets");
                    RefId::new(palette.len() + t)
                }
            };
            script.push(Step::Apply(Paint {
                x: unit_coord_for(x, size.width - 1),
                y: unit_coord_for(y, size.height - 1),
                color,
            }));
        }
    }
    script
}

impl Generator for Painting {
    type Library = ();

    fn build_library(_seed: u64, params: &GenParams) -> Result<(), GenerationError> {
        if params.canvas.width < 8 || params.canvas.height < 8 {
            return Err(GenerationError::Input("painting canvas must be at least 8x8".into()));
        }
        Ok(())
    }

    fn generate_one(_: &(), params: &GenParams, seed: u64) -> Result<Problem<Self>, GenerationError> {
        let mut rng = Rng::new(seed);
        let size = params.canvas;
        let (palette, targets, shapes, canvas) =
            resample(10_000, "painting shapes within coverage bounds", || try_painting(&mut rng, size))?;
        let oracle = oracle_script(size, &palette, &targets, &canvas);
        let mut problem = Problem {
            id: String::new(),
            difficulty_rank: 0,
            gen_seed: seed,
            setting: size,
            initial_kb: palette,
            goal: PaintingGoal { canvas, shapes },
            oracle,
            baseline: Baseline { value: 0.0, exact: true },
        };
        problem.baseline = Painting::uncreative_max(&problem);
        debug_assert!(problem.baseline.value < 1.0);
        Ok(problem)
    }
}
