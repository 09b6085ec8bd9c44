//! Static SVG scatter of a particle configuration.

use std::io::Write;

use dislo_core::analytic::{semicircle_density, SUPPORT_HALFWIDTH};
use dislo_core::Point;

const SIZE: f64 = 600.0;
const MARGIN: f64 = 40.0;

/// Particles as dots over `[-R, R]^2`, with the semicircle density drawn
/// sideways along the `x2`-axis for reference.
pub fn write_scatter<W: Write>(points: &[Point], mut w: W) -> std::io::Result<()> {
    let reach = points
        .iter()
        .map(|p| p.x1.abs().max(p.x2.abs()))
        .fold(1.6f64, f64::max)
        * 1.05;
    let scale = (SIZE - 2.0 * MARGIN) / (2.0 * reach);
    let sx = |x: f64| MARGIN + (x + reach) * scale;
    let sy = |y: f64| SIZE - MARGIN - (y + reach) * scale;

    writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    )?;
    writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#)?;
    writeln!(
        w,
        r##"<g stroke="#bbbbbb" stroke-width="1"><line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/><line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/></g>"##,
        sx(-reach), sy(0.0), sx(reach), sy(0.0), sx(0.0), sy(-reach), sx(0.0), sy(reach)
    )?;
    let samples = 200;
    let curve: Vec<String> = (0..=samples)
        .map(|k| {
            let t = -SUPPORT_HALFWIDTH + 2.0 * SUPPORT_HALFWIDTH * k as f64 / samples as f64;
            format!("{:.2},{:.2}", sx(semicircle_density(t)), sy(t))
        })
        .collect();
    writeln!(
        w,
        r##"<polyline fill="none" stroke="#d62728" stroke-width="1.5" points="{}"/>"##,
        curve.join(" ")
    )?;
    writeln!(w, r##"<g fill="#1f77b4">"##)?;
    for p in points {
        writeln!(w, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5"/>"#, sx(p.x1), sy(p.x2))?;
    }
    writeln!(w, "</g>")?;
    writeln!(
        w,
        r#"<text x="{MARGIN}" y="24" font-family="sans-serif" font-size="14">n = {}</text>"#,
        points.len()
    )?;
    writeln!(w, "</svg>")
}
