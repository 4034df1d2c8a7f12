//! Bernoulli pipe dreams on shapes, crossing resolution, and SVG rendering.
//!
//! Tiles are kept in the canonical order of the (completed) shape, so a
//! pipe dream is a shape plus one tile per box in that order. Resolution is
//! the `tau` fold over the contents of the cross tiles: a cross at content
//! `c` swaps the pipes in lanes `c` and `c + 1` unless they already crossed.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Result};
use crate::hecke::{tau_in_place, Permutation, Word};
use crate::rng;
use crate::shapes::{order_convex_completion, LatticeBox, Shape};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Tile {
    Cross,
    Bump,
    GoldBump,
}

impl Tile {
    pub fn code(self) -> &'static str {
        match self {
            Tile::Cross => "C",
            Tile::Bump => "B",
            Tile::GoldBump => "G",
        }
    }

    pub fn from_code(s: &str) -> Result<Self> {
        match s {
            "C" => Ok(Tile::Cross),
            "B" => Ok(Tile::Bump),
            "G" => Ok(Tile::GoldBump),
            _ => arg(format!("unknown tile code {s:?}")),
        }
    }
}

/// A shape completed to order-convexity, remembering which boxes were added.
#[derive(Clone, Debug)]
pub struct CompletedShape {
    shape: Shape,
    gold: Vec<bool>,
}

impl CompletedShape {
    pub fn new(s: &Shape) -> Self {
        let (shape, added) = order_convex_completion(s);
        let gold = if added.is_empty() {
            vec![false; shape.len()]
        } else {
            let mut next = added.iter().peekable();
            shape
                .iter_canonical()
                .map(|b| {
                    let hit = next.peek() == Some(&&b);
                    if hit {
                        next.next();
                    }
                    hit
                })
                .collect()
        };
        Self { shape, gold }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn gold(&self) -> &[bool] {
        &self.gold
    }

    pub fn sample<R: Rng + ?Sized>(&self, p: f64, rng: &mut R) -> Result<PipeDream> {
        check_p(p)?;
        let tiles = self
            .gold
            .iter()
            .map(|&g| match g {
                true => Tile::GoldBump,
                false if rng.gen_bool(p) => Tile::Cross,
                false => Tile::Bump,
            })
            .collect();
        Ok(PipeDream { shape: self.shape.clone(), tiles })
    }

    /// Demazure product of a random subword, drawing tiles in the same order
    /// as [`CompletedShape::sample`] without storing them.
    pub fn demazure_sample<R: Rng + ?Sized>(&self, p: f64, rng: &mut R) -> Result<Permutation> {
        check_p(p)?;
        let n = self.shape.n();
        let mut w: Vec<u32> = (1..=n as u32).collect();
        for (c, &g) in self.shape.contents_canonical().zip(&self.gold) {
            if !g && rng.gen_bool(p) {
                tau_in_place(&mut w, c as usize);
            }
        }
        Ok(Permutation::from_values_unchecked(w))
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return arg(format!("probability {p} outside (0, 1]"));
    }
    Ok(())
}

/// Tile assignment over an order-convex shape, in canonical box order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PipeDream {
    shape: Shape,
    tiles: Vec<Tile>,
}

#[derive(Serialize, Deserialize)]
struct PipeDreamRepr {
    shape: Shape,
    tiles: Vec<(i64, i64, String)>,
}

impl Serialize for PipeDream {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PipeDreamRepr {
            shape: self.shape.clone(),
            tiles: self.iter().map(|(b, t)| (b.x, b.y, t.code().to_string())).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PipeDream {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = PipeDreamRepr::deserialize(d)?;
        let lookup: std::collections::HashMap<(i64, i64), &str> =
            repr.tiles.iter().map(|(x, y, t)| ((*x, *y), t.as_str())).collect();
        PipeDream::from_fn(&repr.shape, |b| match lookup.get(&(b.x, b.y)) {
            Some(code) => Tile::from_code(code),
            None => arg(format!("no tile for box ({},{})", b.x, b.y)),
        })
        .map_err(serde::de::Error::custom)
    }
}

impl PipeDream {
    /// Builds a pipe dream on an order-convex shape from per-box tiles.
    pub fn from_fn(shape: &Shape, mut f: impl FnMut(LatticeBox) -> Result<Tile>) -> Result<Self> {
        if !shape.is_order_convex() {
            return arg("pipe dreams need an order-convex shape; complete it first");
        }
        let tiles = shape.iter_canonical().map(&mut f).collect::<Result<Vec<_>>>()?;
        Ok(Self { shape: shape.clone(), tiles })
    }

    /// Cross tiles exactly on the boxes whose canonical index is in `mask`.
    pub fn from_mask(shape: &Shape, mask: u64) -> Result<Self> {
        let mut k = 0;
        Self::from_fn(shape, |_| {
            let t = if mask >> k & 1 == 1 { Tile::Cross } else { Tile::Bump };
            k += 1;
            Ok(t)
        })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn n(&self) -> usize {
        self.shape.n()
    }

    pub fn iter(&self) -> impl Iterator<Item = (LatticeBox, Tile)> + '_ {
        self.shape.iter_canonical().zip(self.tiles.iter().copied())
    }

    /// The subword of the shape's word kept by the cross tiles.
    pub fn subword(&self) -> Word {
        let letters = self.shape.contents_canonical().zip(&self.tiles).filter(|(_, t)| **t == Tile::Cross).map(|(c, _)| c).collect();
        Word::new(self.n(), letters).expect("contents lie in [1, n-1]")
    }
}

/// A pipe dream after crossing resolution.
#[derive(Clone, Debug)]
pub struct ResolvedPipeDream {
    base: PipeDream,
    resolved: Vec<bool>,
    entering: Vec<(u32, u32)>,
    exit_labels: Permutation,
}

impl ResolvedPipeDream {
    pub fn base(&self) -> &PipeDream {
        &self.base
    }

    /// Per-box flags in canonical order: cross tiles turned into bumps.
    pub fn resolved(&self) -> &[bool] {
        &self.resolved
    }

    pub fn resolved_boxes(&self) -> Vec<LatticeBox> {
        self.base.shape.iter_canonical().zip(&self.resolved).filter(|(_, r)| **r).map(|(b, _)| b).collect()
    }

    /// Labels of the pipes entering each box from the west and from the south.
    pub fn entering(&self) -> &[(u32, u32)] {
        &self.entering
    }

    pub fn exit_labels(&self) -> &Permutation {
        &self.exit_labels
    }
}

pub fn resolve(pd: &PipeDream) -> ResolvedPipeDream {
    let n = pd.n();
    let mut w: Vec<u32> = (1..=n as u32).collect();
    let mut resolved = Vec::with_capacity(pd.tiles.len());
    let mut entering = Vec::with_capacity(pd.tiles.len());
    for (c, &t) in pd.shape.contents_canonical().zip(&pd.tiles) {
        let c = c as usize;
        entering.push((w[c - 1], w[c]));
        let crossed = t == Tile::Cross && tau_in_place(&mut w, c);
        resolved.push(t == Tile::Cross && !crossed);
    }
    ResolvedPipeDream { base: pd.clone(), resolved, entering, exit_labels: Permutation::from_values_unchecked(w) }
}

pub fn sample_pipedream(s: &Shape, p: f64, seed: u64) -> Result<PipeDream> {
    CompletedShape::new(s).sample(p, &mut rng::seeded(seed))
}

pub fn demazure_sample(s: &Shape, p: f64, seed: u64) -> Result<Permutation> {
    CompletedShape::new(s).demazure_sample(p, &mut rng::seeded(seed))
}

/// Applies the `tau` operators of the shape's word to `v`, in canonical order.
pub fn apply_shape(v: &Permutation, s: &Shape) -> Result<Permutation> {
    if v.n() != s.n() {
        return arg(format!("shape has n = {} but the permutation has size {}", s.n(), v.n()));
    }
    if !s.is_order_convex() {
        return arg("shape is not order-convex");
    }
    let mut w = v.values().to_vec();
    for c in s.contents_canonical() {
        tau_in_place(&mut w, c as usize);
    }
    Ok(Permutation::from_values_unchecked(w))
}

#[derive(Clone, Debug)]
pub struct SvgOptions {
    /// Side length of one box (pipe dreams) or of the whole plot, in pixels.
    pub scale: f64,
    pub color_pipes: bool,
    pub title: Option<String>,
}

impl Default for SvgOptions {
    fn default() -> Self {
        Self { scale: 24.0, color_pipes: true, title: None }
    }
}

pub enum RenderTarget<'a> {
    Plot(&'a Permutation),
    PipeDream(&'a PipeDream),
    Resolved(&'a ResolvedPipeDream),
}

fn pipe_color(label: u32, n: usize) -> String {
    let hue = 360.0 * (label as f64 - 1.0) / n.max(1) as f64;
    format!("hsl({hue:.1},70%,42%)")
}

pub fn render_svg(target: RenderTarget<'_>, opts: &SvgOptions) -> String {
    match target {
        RenderTarget::Plot(u) => render_plot(u, opts),
        RenderTarget::PipeDream(pd) => render_tiles(pd, None, opts),
        RenderTarget::Resolved(r) => render_tiles(&r.base, Some(r), opts),
    }
}

fn svg_header(out: &mut String, w: f64, h: f64, title: &Option<String>) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.1}" height="{h:.1}" viewBox="0 0 {w:.1} {h:.1}">"#
    );
    if let Some(t) = title {
        let escaped = t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
        let _ = writeln!(out, "<title>{escaped}</title>");
    }
}

fn render_plot(u: &Permutation, opts: &SvgOptions) -> String {
    let side = opts.scale.max(64.0);
    let n = u.n() as f64;
    let r = (side / n / 3.0).clamp(0.4, 4.0);
    let mut out = String::new();
    svg_header(&mut out, side, side, &opts.title);
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{side:.1}" height="{side:.1}" fill="white" stroke="black"/>"#);
    for (i, &v) in u.values().iter().enumerate() {
        let cx = (i as f64 + 1.0) / n * side;
        let cy = (1.0 - v as f64 / n) * side;
        let _ = writeln!(out, r#"<circle class="dot" cx="{cx:.2}" cy="{cy:.2}" r="{r:.2}"/>"#);
    }
    out.push_str("</svg>\n");
    out
}

fn render_tiles(pd: &PipeDream, resolved: Option<&ResolvedPipeDream>, opts: &SvgOptions) -> String {
    let cell = opts.scale;
    let boxes = pd.shape.boxes();
    let xmin = boxes.iter().map(|b| b.x).min().unwrap_or(0);
    let xmax = boxes.iter().map(|b| b.x).max().unwrap_or(0);
    let ymin = boxes.iter().map(|b| b.y).min().unwrap_or(0);
    let ytop = boxes.iter().map(|b| b.y + 1).max().unwrap_or(1);
    let (w, h) = ((xmax - xmin + 1) as f64 * cell, (ytop - ymin) as f64 * cell);
    let mut out = String::new();
    svg_header(&mut out, w, h, &opts.title);
    let half = cell / 2.0;
    let n = pd.n();
    for (k, (b, t)) in pd.iter().enumerate() {
        let (x0, y0) = ((b.x - xmin) as f64 * cell, (ytop - b.y - 1) as f64 * cell);
        let is_resolved = resolved.is_some_and(|r| r.resolved[k]);
        let (class, fill) = match (t, is_resolved) {
            (Tile::GoldBump, _) => ("tile gold", "#f2d16b"),
            (Tile::Cross, true) => ("tile bump resolved", "#b8b8b8"),
            (Tile::Cross, false) => ("tile cross", "white"),
            (Tile::Bump, _) => ("tile bump", "white"),
        };
        let _ = writeln!(
            out,
            r##"<rect class="{class}" x="{x0:.2}" y="{y0:.2}" width="{cell:.2}" height="{cell:.2}" fill="{fill}" stroke="#444"/>"##
        );
        let crossing = t == Tile::Cross && !is_resolved;
        let (wc, sc) = match (resolved, opts.color_pipes) {
            (Some(r), true) => (pipe_color(r.entering[k].0, n), pipe_color(r.entering[k].1, n)),
            _ => ("black".to_string(), "black".to_string()),
        };
        if crossing {
            let _ = writeln!(
                out,
                r#"<path class="pipe" d="M{:.2},{:.2} H{:.2}" stroke="{wc}" fill="none"/>"#,
                x0,
                y0 + half,
                x0 + cell
            );
            let _ = writeln!(
                out,
                r#"<path class="pipe" d="M{:.2},{:.2} V{:.2}" stroke="{sc}" fill="none"/>"#,
                x0 + half,
                y0 + cell,
                y0
            );
        } else {
            let _ = writeln!(
                out,
                r#"<path class="pipe" d="M{:.2},{:.2} A{half:.2},{half:.2} 0 0 0 {:.2},{:.2}" stroke="{wc}" fill="none"/>"#,
                x0,
                y0 + half,
                x0 + half,
                y0
            );
            let _ = writeln!(
                out,
                r#"<path class="pipe" d="M{:.2},{:.2} A{half:.2},{half:.2} 0 0 1 {:.2},{:.2}" stroke="{sc}" fill="none"/>"#,
                x0 + half,
                y0 + cell,
                x0 + cell,
                y0 + half
            );
        }
    }
    out.push_str("</svg>\n");
    out
}
