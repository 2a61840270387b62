//! Deterministic SVG of a scan: bounded arcs on the unit circle with gap
//! markers, and the Lyapunov estimate against angle.

use std::f64::consts::TAU;
use std::fmt::Write;

use cmvlab::tracemap::{OrbitStatus, ScanPoint};

use crate::output::SpectrumScanFile;

const WIDTH: f64 = 840.0;
const HEIGHT: f64 = 420.0;
const CX: f64 = 210.0;
const CY: f64 = 210.0;
const R: f64 = 160.0;

/// Maximal runs of consecutive bounded grid rows as `(from, to)` angles,
/// each row covering half a cell on either side. A run covering the whole
/// circle is returned as `(0, 2π)`.
pub fn bounded_arcs(rows: &[ScanPoint]) -> Vec<(f64, f64)> {
    let n = rows.len();
    if n == 0 {
        return Vec::new();
    }
    let bounded: Vec<bool> = rows.iter().map(|p| p.status == OrbitStatus::Bounded).collect();
    if bounded.iter().all(|&b| b) {
        return vec![(0.0, TAU)];
    }
    let h = TAU / n as f64;
    // start scanning just after an escaped row so runs never straddle the seam
    let first_gap = bounded.iter().position(|&b| !b).unwrap();
    let mut arcs = Vec::new();
    let mut run: Option<usize> = None;
    for step in 1..=n {
        let j = (first_gap + step) % n;
        match (bounded[j], run) {
            (true, None) => run = Some(step),
            (false, Some(s)) => {
                let from = ((first_gap + s) % n) as f64 * h - h / 2.0;
                let len = (step - s) as f64 * h;
                arcs.push((from.rem_euclid(TAU), (from + len).rem_euclid(TAU)));
                run = None;
            }
            _ => {}
        }
    }
    arcs.sort_by(|a, b| a.0.total_cmp(&b.0));
    arcs
}

fn point(theta: f64, r: f64) -> (f64, f64) {
    (CX + r * theta.cos(), CY - r * theta.sin())
}

fn arc_path(from: f64, to: f64) -> String {
    let sweep = (to - from).rem_euclid(TAU);
    let (x0, y0) = point(from, R);
    let (x1, y1) = point(to, R);
    let large = if sweep > TAU / 2.0 { 1 } else { 0 };
    format!("M {x0:.3} {y0:.3} A {R:.3} {R:.3} 0 {large} 0 {x1:.3} {y1:.3}")
}

pub fn render(file: &SpectrumScanFile) -> String {
    let rows = &file.rows;
    let h = &file.header;
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<text x="20" y="24" font-family="monospace" font-size="12">grid {} budget {} bounded measure {:.6}</text>"#,
        h.grid_size,
        h.budget,
        h.arc_measure.last().copied().unwrap_or(0.0)
    )
    .unwrap();
    writeln!(
        s,
        r##"<circle cx="{CX}" cy="{CY}" r="{R}" fill="none" stroke="#cccccc" stroke-width="1"/>"##
    )
    .unwrap();

    let arcs = bounded_arcs(rows);
    writeln!(s, r#"<g id="arcs" fill="none" stroke="black" stroke-width="4">"#).unwrap();
    for &(from, to) in &arcs {
        if to - from == TAU {
            writeln!(s, r#"<circle cx="{CX}" cy="{CY}" r="{R}"/>"#).unwrap();
        } else {
            writeln!(s, r#"<path d="{}"/>"#, arc_path(from, to)).unwrap();
        }
    }
    writeln!(s, "</g>").unwrap();

    // short radial ticks at both edges of every gap
    writeln!(s, r##"<g id="gaps" stroke="#c0392b" stroke-width="1">"##).unwrap();
    for &(from, to) in &arcs {
        if to - from == TAU {
            continue;
        }
        for edge in [from, to] {
            let (x0, y0) = point(edge, R + 4.0);
            let (x1, y1) = point(edge, R + 12.0);
            writeln!(s, r#"<line x1="{x0:.3}" y1="{y0:.3}" x2="{x1:.3}" y2="{y1:.3}"/>"#).unwrap();
        }
    }
    writeln!(s, "</g>").unwrap();

    // Lyapunov panel
    let (px, py, pw, ph) = (440.0, 50.0, 370.0, 320.0);
    writeln!(
        s,
        r#"<rect x="{px}" y="{py}" width="{pw}" height="{ph}" fill="none" stroke="black" stroke-width="1"/>"#
    )
    .unwrap();
    let top = rows
        .iter()
        .map(|p| p.lyapunov)
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max)
        .max(1e-12);
    writeln!(
        s,
        r#"<text x="{px}" y="{}" font-family="monospace" font-size="12">Lyapunov estimate, max {top:.6}</text>"#,
        py - 8.0
    )
    .unwrap();
    let pts: Vec<String> = rows
        .iter()
        .filter(|p| p.lyapunov.is_finite())
        .map(|p| {
            let x = px + pw * p.angle / TAU;
            let y = py + ph * (1.0 - p.lyapunov.max(0.0) / top);
            format!("{x:.3},{y:.3}")
        })
        .collect();
    writeln!(
        s,
        r##"<polyline fill="none" stroke="#1f5fa8" stroke-width="1" points="{}"/>"##,
        pts.join(" ")
    )
    .unwrap();
    writeln!(s, "</svg>").unwrap();
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(j: usize, n: usize, bounded: bool) -> ScanPoint {
        let angle = j as f64 * TAU / n as f64;
        ScanPoint {
            angle,
            zeta: [angle.cos(), angle.sin()],
            status: if bounded { OrbitStatus::Bounded } else { OrbitStatus::Escaped },
            escape_step: (!bounded).then_some(3),
            lyapunov: if bounded { 0.0 } else { 0.1 },
            invariant_drift: 0.0,
        }
    }

    #[test]
    fn arcs_from_runs() {
        let n = 8;
        let pattern = [true, true, false, false, true, false, true, true];
        let rows: Vec<ScanPoint> = (0..n).map(|j| row(j, n, pattern[j])).collect();
        let arcs = bounded_arcs(&rows);
        let h = TAU / n as f64;
        // rows 6, 7, 0, 1 form one run across the seam
        assert_eq!(arcs.len(), 2);
        assert!((arcs[0].0 - 3.5 * h).abs() < 1e-12 && (arcs[0].1 - 4.5 * h).abs() < 1e-12);
        assert!((arcs[1].0 - 5.5 * h).abs() < 1e-12 && (arcs[1].1 - 1.5 * h).abs() < 1e-12);

        assert!(bounded_arcs(&(0..n).map(|j| row(j, n, false)).collect::<Vec<_>>()).is_empty());
        assert_eq!(bounded_arcs(&(0..n).map(|j| row(j, n, true)).collect::<Vec<_>>()), vec![(0.0, TAU)]);
    }
}
