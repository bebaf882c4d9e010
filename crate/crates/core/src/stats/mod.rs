//! Regression, ANOVA, power and response-surface analysis.

pub mod anova;
pub mod dist;
pub mod ols;
pub mod power;
pub mod special;
pub mod surface;

pub use anova::{anova_two_way, cohens_f, eta_squared, eta_squared_from_f, AnovaObservation, AnovaRow, AnovaTable};
pub use dist::{f_cdf, f_isf, f_quantile, f_sf, noncentral_f_cdf, noncentral_f_sf, t_cdf, t_two_sided_p};
pub use ols::{ols_fit, LinearFit};
pub use power::{anova_power_required_n, PowerSolution, PowerSpec};
pub use surface::{fit_quadratic_surface, BoxExtrema, Classification, QuadraticSurface, Rect, StationaryPoint};

/// Plain-text column alignment for analysis tables.
pub(crate) mod fmt_table {
    use crate::fmt::sig6;

    pub fn num(x: f64) -> String {
        sig6(x)
    }

    /// First column left-aligned, the rest right-aligned, two-space gutters.
    pub fn render(rows: &[Vec<String>]) -> String {
        let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
        let widths: Vec<usize> = (0..cols)
            .map(|c| {
                rows.iter()
                    .filter_map(|r| r.get(c))
                    .map(|s| s.chars().count())
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = String::new();
        for row in rows {
            let mut line = String::new();
            for (c, cell) in row.iter().enumerate() {
                if c == 0 {
                    line.push_str(&format!("{cell:<w$}", w = widths[0]));
                } else {
                    line.push_str(&format!("  {cell:>w$}", w = widths[c]));
                }
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }
}
