//! Minimal static SVG rendering of the λ-curve overlays. Data (the CSV
//! table) remains the primary figure output; this is a dependency-free
//! convenience view.

use copfit_core::kendall::CurveTable;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const MARGIN: f64 = 50.0;
const COLORS: [&str; 6] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn polyline(points: &[(f64, f64)], color: &str, width: f64, dash: Option<&str>) -> String {
    let coords: Vec<String> = points.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    let dash = dash.map(|d| format!(" stroke-dasharray=\"{d}\"")).unwrap_or_default();
    format!(
        "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"{width}\"{dash} points=\"{}\"/>\n",
        coords.join(" ")
    )
}

/// Renders λ̂(ν) (solid) with the candidate λ_α̂ overlays (dashed).
pub fn lambda_overlay_svg(table: &CurveTable) -> String {
    let min_lambda = table
        .lambda_hat
        .iter()
        .chain(table.candidates.iter().flat_map(|c| c.lambda.iter()))
        .fold(0.0f64, |acc, &v| acc.min(v))
        .min(-1e-6);
    let to_xy = |nu: f64, lambda: f64| -> (f64, f64) {
        let x = MARGIN + nu * (WIDTH - 2.0 * MARGIN);
        let y = MARGIN + (lambda / min_lambda) * (HEIGHT - 2.0 * MARGIN);
        (x, y)
    };
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    // Axes: λ = 0 on top, ν from 0 to 1.
    let (x0, y0) = to_xy(0.0, 0.0);
    let (x1, _) = to_xy(1.0, 0.0);
    let (_, y1) = to_xy(0.0, min_lambda);
    svg.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"#333\"/>\n<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"#333\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\">nu</text>\n<text x=\"8\" y=\"{}\" font-size=\"12\">lambda</text>\n",
        WIDTH - MARGIN,
        y0 - 6.0,
        MARGIN - 20.0,
    ));

    let empirical: Vec<(f64, f64)> = table
        .nu
        .iter()
        .zip(&table.lambda_hat)
        .map(|(&nu, &l)| to_xy(nu, l))
        .collect();
    svg.push_str(&polyline(&empirical, "#000000", 2.0, None));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\">empirical</text>\n",
        MARGIN + 6.0,
        MARGIN + 14.0
    ));
    for (i, cand) in table.candidates.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<(f64, f64)> = table
            .nu
            .iter()
            .zip(&cand.lambda)
            .map(|(&nu, &l)| to_xy(nu, l))
            .collect();
        svg.push_str(&polyline(&pts, color, 1.2, Some("6 3")));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{color}\">{}</text>\n",
            MARGIN + 6.0,
            MARGIN + 30.0 + 16.0 * i as f64,
            cand.family.name()
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
