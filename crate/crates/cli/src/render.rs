//! SVG and ASCII pictures of configurations and firing graphs.

use std::collections::BTreeSet;
use std::fmt::Write;

use sandcross::firing_graph::FiringGraph;
use sandcross::grid::{Configuration, GridPoint, Neighborhood, Rect};
use sandcross::verify::{Border, CrossingSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Layer {
    Grains,
    NeighborhoodOverlay,
    FiringGraphWe,
    FiringGraphNs,
    Borders,
}

impl Layer {
    pub const ALL: [Layer; 5] =
        [Layer::Grains, Layer::NeighborhoodOverlay, Layer::FiringGraphWe, Layer::FiringGraphNs, Layer::Borders];

    pub fn parse(name: &str) -> Option<Layer> {
        Some(match name {
            "grains" => Layer::Grains,
            "neighborhood-overlay" => Layer::NeighborhoodOverlay,
            "firing-graph-we" => Layer::FiringGraphWe,
            "firing-graph-ns" => Layer::FiringGraphNs,
            "borders" => Layer::Borders,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderSpec {
    pub cell_size: u32,
    pub layers: BTreeSet<Layer>,
    /// Threshold used to shade grain counts; the largest count is used when
    /// absent.
    pub p: Option<u64>,
    /// Neighborhood drawn around the west-to-east fired cells.
    pub overlay: Option<Neighborhood>,
    /// Area and border cells to mark.
    pub crossing: Option<CrossingSpec>,
}

impl Default for RenderSpec {
    fn default() -> Self {
        RenderSpec { cell_size: 12, layers: Layer::ALL.into_iter().collect(), p: None, overlay: None, crossing: None }
    }
}

const MARGIN: i64 = 8;
const FRAME: &str = "#202020";
const OVERLAY: &str = "#d9d9d9";
const WE_COLOR: &str = "#c0392b";
const NS_COLOR: &str = "#2166ac";
const BORDER_COLOR: &str = "#f1a340";

fn area(c: &Configuration, graphs: Option<(&FiringGraph, &FiringGraph)>, spec: &RenderSpec) -> Option<Rect> {
    if let Some(cs) = &spec.crossing {
        return Some(cs.rect_area());
    }
    let mut pts: Vec<GridPoint> = c.support().collect();
    if let Some((we, ns)) = graphs {
        pts.extend(we.fire_time.keys().chain(ns.fire_time.keys()));
    }
    let min = GridPoint::new(pts.iter().map(|v| v.x).min()?, pts.iter().map(|v| v.y).min()?);
    let max = GridPoint::new(pts.iter().map(|v| v.x).max()?, pts.iter().map(|v| v.y).max()?);
    Some(Rect { min, max })
}

/// Grey level for a grain count: white for 0, black for `p - 1`.
fn shade(grains: u64, p: u64) -> String {
    let top = p.saturating_sub(1).max(1);
    let level = 255 - (grains.min(top) * 255 / top);
    format!("#{level:02x}{level:02x}{level:02x}")
}

/// Renders to SVG text. Arcs are the only `<line>` elements.
pub fn render_svg(c: &Configuration, graphs: Option<(&FiringGraph, &FiringGraph)>, spec: &RenderSpec) -> String {
    let cs = i64::from(spec.cell_size.max(1));
    let rect = area(c, graphs, spec);
    let (w, h) = rect.map_or((0, 0), |r| (r.width(), r.height()));
    let (pw, ph) = (w * cs + 2 * MARGIN, h * cs + 2 * MARGIN);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{pw}" height="{ph}" viewBox="0 0 {pw} {ph}">"#
    );
    let _ = writeln!(
        out,
        r#"<defs><marker id="head" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="5" markerHeight="5" orient="auto"><path d="M0,0 L10,5 L0,10 z" fill="context-stroke"/></marker></defs>"#
    );
    let _ = writeln!(
        out,
        r#"<rect class="frame" x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="white" stroke="{FRAME}"/>"#,
        w * cs,
        h * cs
    );
    let Some(rect) = rect else {
        out.push_str("</svg>\n");
        return out;
    };
    let px = |v: GridPoint| ((v.x - rect.min.x) * cs + MARGIN, (v.y - rect.min.y) * cs + MARGIN);
    let cell = |out: &mut String, v: GridPoint, class: &str, fill: &str| {
        let (x, y) = px(v);
        let _ = writeln!(out, r#"<rect class="{class}" x="{x}" y="{y}" width="{cs}" height="{cs}" fill="{fill}"/>"#);
    };

    if spec.layers.contains(&Layer::NeighborhoodOverlay) {
        if let (Some(nb), Some((we, _))) = (&spec.overlay, graphs) {
            let shaded: BTreeSet<GridPoint> =
                we.fire_time.keys().flat_map(|&v| nb.out_neighbors(v)).filter(|&u| rect.contains(u)).collect();
            for v in shaded {
                cell(&mut out, v, "overlay", OVERLAY);
            }
        }
    }
    if spec.layers.contains(&Layer::Grains) {
        let p = spec.p.unwrap_or_else(|| c.iter().map(|(_, g)| g + 1).max().unwrap_or(1));
        for (v, g) in c.iter().filter(|&(v, _)| rect.contains(v)) {
            cell(&mut out, v, "grains", &shade(g, p));
        }
    }
    if spec.layers.contains(&Layer::Borders) {
        if let Some(crossing) = &spec.crossing {
            for b in [Border::North, Border::East, Border::South, Border::West] {
                let (x, y) = px(crossing.cell(b));
                let _ = writeln!(
                    out,
                    r#"<rect class="border" x="{x}" y="{y}" width="{cs}" height="{cs}" fill="none" stroke="{BORDER_COLOR}" stroke-width="2"/>"#
                );
            }
        }
    }
    let half = cs / 2;
    let mut arrows = |g: &FiringGraph, class: &str, color: &str| {
        for &(a, b) in &g.arcs {
            let ((x1, y1), (x2, y2)) = (px(a), px(b));
            let _ = writeln!(
                out,
                r#"<line class="{class}" x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="1" marker-end="url(#head)"/>"#,
                x1 + half,
                y1 + half,
                x2 + half,
                y2 + half
            );
        }
    };
    if let Some((we, ns)) = graphs {
        if spec.layers.contains(&Layer::FiringGraphWe) {
            arrows(we, "arc-we", WE_COLOR);
        }
        if spec.layers.contains(&Layer::FiringGraphNs) {
            arrows(ns, "arc-ns", NS_COLOR);
        }
    }
    out.push_str("</svg>\n");
    out
}

/// One character per cell: `W`/`N` for cells fired by the west or north
/// signal, `#` for `p - 1` grains, `+` for other non-empty cells, `.` for
/// empty cells.
pub fn render_ascii(c: &Configuration, graphs: Option<(&FiringGraph, &FiringGraph)>, spec: &RenderSpec) -> String {
    let Some(rect) = area(c, graphs, spec) else {
        return String::new();
    };
    let p = spec.p.unwrap_or_else(|| c.iter().map(|(_, g)| g + 1).max().unwrap_or(1));
    let mut out = String::new();
    for y in rect.min.y..=rect.max.y {
        for x in rect.min.x..=rect.max.x {
            let v = GridPoint::new(x, y);
            let ch = match graphs {
                Some((we, _)) if we.contains(v) => 'W',
                Some((_, ns)) if ns.contains(v) => 'N',
                _ => match c.get(v) {
                    0 => '.',
                    g if g + 1 == p => '#',
                    _ => '+',
                },
            };
            out.push(ch);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_is_frame_only() {
        let svg = render_svg(&Configuration::new(), None, &RenderSpec::default());
        assert_eq!(svg.matches("<rect").count(), 1);
        assert!(svg.contains(r#"class="frame""#));
        assert!(!svg.contains("<line"));
    }

    #[test]
    fn ascii_marks_levels() {
        let c = Configuration::from([((0, 0), 3), ((2, 0), 1)]);
        let spec = RenderSpec { p: Some(4), ..RenderSpec::default() };
        assert_eq!(render_ascii(&c, None, &spec), "#.+\n");
    }

    #[test]
    fn layer_names() {
        for l in Layer::ALL {
            let name = format!("{l:?}");
            assert!(Layer::ALL.contains(&l), "{name}");
        }
        assert_eq!(Layer::parse("firing-graph-ns"), Some(Layer::FiringGraphNs));
        assert_eq!(Layer::parse("arcs"), None);
    }
}
