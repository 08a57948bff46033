//! Hand-rolled SVG plots: a node-and-arc route map and an axis-ticked
//! polyline curve. No plotting dependencies; curves are plain polylines.

use swarmplan_core::{MissionInstance, RouteSet};

const PALETTE: [&str; 6] = ["#c0392b", "#2980b9", "#27ae60", "#8e44ad", "#d35400", "#16a085"];

fn header(w: u32, h: u32) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\" font-family=\"monospace\" font-size=\"12\">\n"
    )
}

/// Route map with nodes laid out on a circle (the instance format carries no
/// coordinates) and one color per drone.
pub fn route_plot(instance: &MissionInstance, routes: &RouteSet) -> String {
    let (w, h) = (560u32, 560u32);
    let (cx, cy, r) = (w as f64 / 2.0, h as f64 / 2.0, 210.0);
    let pos = |id: &str| -> (f64, f64) {
        let i = instance.node_index(id).unwrap_or(0);
        let a = std::f64::consts::TAU * i as f64 / instance.nodes.len().max(1) as f64;
        (cx + r * a.cos(), cy + r * a.sin())
    };
    let mut out = header(w, h);
    for route in &routes.routes {
        let color = PALETTE[route.drone % PALETTE.len()];
        for pair in route.nodes.windows(2) {
            let (x1, y1) = pos(&pair[0]);
            let (x2, y2) = pos(&pair[1]);
            out.push_str(&format!(
                "<line x1=\"{x1:.1}\" y1=\"{y1:.1}\" x2=\"{x2:.1}\" y2=\"{y2:.1}\" \
                 stroke=\"{color}\" stroke-width=\"2\"/>\n"
            ));
        }
    }
    for (i, n) in instance.nodes.iter().enumerate() {
        let (x, y) = pos(&n.id);
        out.push_str(&format!(
            "<circle cx=\"{x:.1}\" cy=\"{y:.1}\" r=\"5\" fill=\"#2c3e50\"/>\n\
             <text x=\"{:.1}\" y=\"{:.1}\">{}</text>\n",
            x + 8.0,
            y - 6.0 + 18.0 * ((i % 2) as f64),
            n.id
        ));
    }
    for route in &routes.routes {
        let color = PALETTE[route.drone % PALETTE.len()];
        out.push_str(&format!(
            "<text x=\"10\" y=\"{}\" fill=\"{color}\">drone {}</text>\n",
            20 + 16 * route.drone,
            route.drone
        ));
    }
    out.push_str(&format!(
        "<text x=\"10\" y=\"{}\">makespan {}</text>\n</svg>\n",
        h - 12,
        routes.makespan
    ));
    out
}

/// Polyline of `points` with 5 ticks per axis.
pub fn curve_plot(points: &[(f64, f64)], x_label: &str, y_label: &str) -> String {
    let (w, h) = (640u32, 420u32);
    let (ml, mr, mt, mb) = (70.0, 20.0, 20.0, 50.0);
    let (pw, ph) = (w as f64 - ml - mr, h as f64 - mt - mb);
    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
    }
    if points.is_empty() {
        x_lo = 0.0;
        x_hi = 1.0;
        y_lo = 0.0;
        y_hi = 1.0;
    }
    if x_hi - x_lo < 1e-12 {
        x_hi = x_lo + 1.0;
    }
    if y_hi - y_lo < 1e-12 {
        y_hi = y_lo + 1.0;
    }
    let px = |x: f64| ml + pw * (x - x_lo) / (x_hi - x_lo);
    let py = |y: f64| mt + ph * (1.0 - (y - y_lo) / (y_hi - y_lo));
    let mut out = header(w, h);
    out.push_str(&format!(
        "<rect x=\"{ml}\" y=\"{mt}\" width=\"{pw}\" height=\"{ph}\" \
         fill=\"none\" stroke=\"#7f8c8d\"/>\n"
    ));
    for k in 0..=5 {
        let x = x_lo + (x_hi - x_lo) * k as f64 / 5.0;
        let y = y_lo + (y_hi - y_lo) * k as f64 / 5.0;
        out.push_str(&format!(
            "<line x1=\"{0:.1}\" y1=\"{1:.1}\" x2=\"{0:.1}\" y2=\"{2:.1}\" stroke=\"#7f8c8d\"/>\n\
             <text x=\"{0:.1}\" y=\"{3:.1}\" text-anchor=\"middle\">{4:.2}</text>\n",
            px(x),
            mt + ph,
            mt + ph + 6.0,
            mt + ph + 22.0,
            x
        ));
        out.push_str(&format!(
            "<line x1=\"{0:.1}\" y1=\"{1:.1}\" x2=\"{2:.1}\" y2=\"{1:.1}\" stroke=\"#7f8c8d\"/>\n\
             <text x=\"{3:.1}\" y=\"{4:.1}\" text-anchor=\"end\">{5:.3}</text>\n",
            ml - 6.0,
            py(y),
            ml,
            ml - 10.0,
            py(y) + 4.0,
            y
        ));
    }
    let line: Vec<String> = points
        .iter()
        .map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y)))
        .collect();
    out.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#2980b9\" stroke-width=\"2\"/>\n",
        line.join(" ")
    ));
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{}\" text-anchor=\"middle\">{x_label}</text>\n\
         <text x=\"16\" y=\"{:.1}\" transform=\"rotate(-90 16 {:.1})\" \
         text-anchor=\"middle\">{y_label}</text>\n</svg>\n",
        ml + pw / 2.0,
        h - 8,
        mt + ph / 2.0,
        mt + ph / 2.0
    ));
    out
}
