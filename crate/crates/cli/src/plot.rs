//! Self-contained SVG plots of sweep results: relative error against
//! level, one polyline per (frame, algorithm) series, log2 vertical
//! axis. No external renderer; the emitted file is plain SVG 1.1 text.

use crate::config::{CliError, CliResult};
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct PlotRow {
    pub frame: String,
    pub algorithm: String,
    pub level: i32,
    pub relative_error: f64,
}

/// Parse a sweep CSV, reporting malformed lines by number.
pub fn parse_csv(text: &str) -> CliResult<Vec<PlotRow>> {
    let mut rows = Vec::new();
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Err(CliError::Config("line 1: empty CSV".into()));
    };
    let columns: Vec<&str> = header.split(',').collect();
    let col = |name: &str| -> CliResult<usize> {
        columns
            .iter()
            .position(|c| *c == name)
            .ok_or_else(|| CliError::Config(format!("line 1: missing column `{name}`")))
    };
    let (c_frame, c_alg, c_level, c_err) = (
        col("frame")?,
        col("algorithm")?,
        col("j")?,
        col("relative_error")?,
    );
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns.len() {
            return Err(CliError::Config(format!(
                "line {}: expected {} fields, got {}",
                idx + 1,
                columns.len(),
                fields.len()
            )));
        }
        let level: i32 = fields[c_level].parse().map_err(|_| {
            CliError::Config(format!("line {}: bad level `{}`", idx + 1, fields[c_level]))
        })?;
        let relative_error: f64 = fields[c_err].parse().map_err(|_| {
            CliError::Config(format!(
                "line {}: bad relative_error `{}`",
                idx + 1,
                fields[c_err]
            ))
        })?;
        rows.push(PlotRow {
            frame: fields[c_frame].to_string(),
            algorithm: fields[c_alg].to_string(),
            level,
            relative_error,
        });
    }
    if rows.is_empty() {
        return Err(CliError::Config("CSV has a header but no data rows".into()));
    }
    Ok(rows)
}

const PALETTE: [&str; 6] = [
    "#1965b0", "#dc050c", "#4eb265", "#f7a600", "#882e72", "#777777",
];

/// Render the error-vs-level plot. Finite positive errors only; rows
/// with non-finite error are skipped.
pub fn render_svg(rows: &[PlotRow]) -> CliResult<String> {
    let mut series: Vec<(String, Vec<(i32, f64)>)> = Vec::new();
    for row in rows {
        if !(row.relative_error.is_finite() && row.relative_error > 0.0) {
            continue;
        }
        let key = format!("{} {}", row.frame, row.algorithm);
        match series.iter_mut().find(|(k, _)| *k == key) {
            Some((_, pts)) => pts.push((row.level, row.relative_error)),
            None => series.push((key, vec![(row.level, row.relative_error)])),
        }
    }
    if series.is_empty() {
        return Err(CliError::Config("no plottable rows".into()));
    }
    for (_, pts) in &mut series {
        pts.sort_unstable_by_key(|&(j, _)| j);
    }
    let levels: Vec<i32> = {
        let mut l: Vec<i32> = rows.iter().map(|r| r.level).collect();
        l.sort_unstable();
        l.dedup();
        l
    };
    let (jmin, jmax) = (levels[0], *levels.last().expect("nonempty"));
    let log_errs: Vec<f64> = series
        .iter()
        .flat_map(|(_, pts)| pts.iter().map(|&(_, e)| e.log2()))
        .collect();
    let ymin = log_errs.iter().cloned().fold(f64::INFINITY, f64::min).floor();
    let ymax = log_errs
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
        .ceil()
        .max(ymin + 1.0);

    let (width, height) = (640.0, 440.0);
    let (left, right, top, bottom) = (70.0, 180.0, 30.0, 50.0);
    let plot_w = width - left - right;
    let plot_h = height - top - bottom;
    let x_of = |j: i32| -> f64 {
        if jmax == jmin {
            left + plot_w / 2.0
        } else {
            left + plot_w * (j - jmin) as f64 / (jmax - jmin) as f64
        }
    };
    let y_of = |e: f64| -> f64 { top + plot_h * (ymax - e.log2()) / (ymax - ymin) };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black" stroke-width="1"/>"#
    );
    // Axis ticks: one per level on x, one per integer log2 on y.
    for &j in &levels {
        let x = x_of(j);
        let y = top + plot_h;
        let _ = writeln!(
            svg,
            r#"<line x1="{x}" y1="{y}" x2="{x}" y2="{}" stroke="black"/>"#,
            y + 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{x}" y="{}" font-size="12" text-anchor="middle">{j}</text>"#,
            y + 20.0
        );
    }
    let mut tick = ymin;
    while tick <= ymax + 1e-9 {
        let y = top + plot_h * (ymax - tick) / (ymax - ymin);
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{y}" x2="{left}" y2="{y}" stroke="black"/>"#,
            left - 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="12" text-anchor="end">2^{tick}</text>"#,
            left - 8.0,
            y + 4.0
        );
        tick += 1.0;
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">level j</text>"#,
        left + plot_w / 2.0,
        height - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{}" font-size="13" text-anchor="middle" transform="rotate(-90 18 {})">relative error (log2)</text>"#,
        top + plot_h / 2.0,
        top + plot_h / 2.0
    );
    for (s, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[s % PALETTE.len()];
        let coords: Vec<String> = pts
            .iter()
            .map(|&(j, e)| format!("{:.2},{:.2}", x_of(j), y_of(e)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            coords.join(" ")
        );
        for &(j, e) in pts {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                x_of(j),
                y_of(e)
            );
        }
        let ly = top + 16.0 * (s as f64 + 1.0);
        let lx = left + plot_w + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 18.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="12">{name}</text>"#,
            lx + 24.0,
            ly + 4.0
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn plot_sweep(csv_path: &Path, out_svg: &Path) -> CliResult<()> {
    let text = std::fs::read_to_string(csv_path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", csv_path.display())))?;
    let rows = parse_csv(&text)?;
    let svg = render_svg(&rows)?;
    std::fs::write(out_svg, svg)
        .map_err(|e| CliError::Io(format!("writing {}: {e}", out_svg.display())))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str =
        "frame,algorithm,j,h_j,relative_error,delta_j,mu_c,bound_l1,bound_thresh,converged,wall_time";

    #[test]
    fn single_row_gives_one_point() {
        let csv = format!("{HEADER}\nmeyer,one_step,3,0.01,0.5,1,0.1,2,3,true,0.5\n");
        let rows = parse_csv(&csv).unwrap();
        assert_eq!(rows.len(), 1);
        let svg = render_svg(&rows).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn two_series_three_levels() {
        let mut csv = String::from(HEADER);
        for (f, errs) in [("meyer", [0.5, 0.4, 0.3]), ("shearlet", [0.4, 0.2, 0.1])] {
            for (i, e) in errs.iter().enumerate() {
                csv.push_str(&format!(
                    "\n{f},one_step,{},0.01,{e},1,0.1,2,3,true,0.5",
                    3 + i as i32
                ));
            }
        }
        let rows = parse_csv(&csv).unwrap();
        let svg = render_svg(&rows).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        // each polyline has 3 vertices
        for part in svg.split("<polyline").skip(1) {
            let points = part.split("points=\"").nth(1).unwrap();
            let coords = points.split('"').next().unwrap();
            assert_eq!(coords.split(' ').count(), 3);
        }
        // ticks cover the level range
        for j in 3..=5 {
            assert!(svg.contains(&format!(">{j}</text>")), "missing tick {j}");
        }
        // log2 tick labels span the data: errors within [2^-4, 2^-1]
        assert!(svg.contains(">2^-1<") || svg.contains(">2^0<"));
        assert!(svg.contains(">2^-4<"));
    }

    #[test]
    fn malformed_rows_report_line_numbers() {
        let csv = format!("{HEADER}\nmeyer,one_step,3,0.01,0.5,1,0.1,2,3,true\n");
        match parse_csv(&csv) {
            Err(CliError::Config(m)) => assert!(m.contains("line 2"), "{m}"),
            other => panic!("expected config error, got {other:?}"),
        }
        let csv = format!("{HEADER}\nmeyer,one_step,x,0.01,0.5,1,0.1,2,3,true,0.5\n");
        assert!(parse_csv(&csv).is_err());
    }
}
