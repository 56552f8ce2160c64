//! Birth/death scatter as a fixed SVG template.

use std::fmt::Write;

use witness_tda::PersistenceDiagram;

const SIZE: f64 = 420.0;
const MARGIN: f64 = 40.0;
const COLORS: [&str; 3] = ["#1f77b4", "#d62728", "#2ca02c"];

/// Finite points are circles, essential ones are triangles on the top edge
/// (death drawn at the scale cap). The dashed line is the diagonal.
pub fn diagram_svg(dgm: &PersistenceDiagram, keep_zero: bool) -> String {
    let eps = dgm.eps_max();
    let span = SIZE - 2.0 * MARGIN;
    let x = |v: f64| MARGIN + span * v / eps;
    let y = |v: f64| SIZE - MARGIN - span * v / eps;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{span}" height="{span}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#888" stroke-dasharray="4 3"/>"##,
        x(0.0),
        y(0.0),
        x(eps),
        y(eps)
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">birth</text>"#,
        SIZE / 2.0,
        SIZE - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.2}" font-size="12" text-anchor="middle" transform="rotate(-90 14 {:.2})">death</text>"#,
        SIZE / 2.0,
        SIZE / 2.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end">{eps:.4}</text>"#,
        x(eps),
        SIZE - MARGIN + 14.0
    );

    for p in dgm.points() {
        if p.is_zero_persistence() && !keep_zero {
            continue;
        }
        let color = COLORS[p.dim.min(COLORS.len() - 1)];
        let (px, py) = (x(p.birth), y(p.death_or(eps)));
        if p.is_essential() {
            let _ = writeln!(
                s,
                r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{color}"/>"#,
                px,
                py - 5.0,
                px - 4.5,
                py + 3.5,
                px + 4.5,
                py + 3.5
            );
        } else {
            let _ = writeln!(
                s,
                r#"<circle cx="{px:.2}" cy="{py:.2}" r="3" fill="{color}" fill-opacity="0.8"/>"#
            );
        }
    }
    for (k, color) in COLORS.iter().enumerate().take(2) {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" fill="{color}">H{k}</text>"#,
            MARGIN + 8.0,
            MARGIN + 16.0 + 14.0 * k as f64
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use witness_tda::PersistencePoint;

    #[test]
    fn shapes_by_kind() {
        let dgm = PersistenceDiagram::new(
            vec![
                PersistencePoint {
                    dim: 0,
                    birth: 0.0,
                    death: None,
                },
                PersistencePoint {
                    dim: 1,
                    birth: 0.1,
                    death: Some(0.3),
                },
                PersistencePoint {
                    dim: 1,
                    birth: 0.2,
                    death: Some(0.2),
                },
            ],
            1.0,
        );
        let svg = diagram_svg(&dgm, false);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polygon").count(), 1);
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(svg.contains("stroke-dasharray"));
        assert_eq!(diagram_svg(&dgm, true).matches("<circle").count(), 2);
        assert_eq!(svg, diagram_svg(&dgm, false));
    }
}
