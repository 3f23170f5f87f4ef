//! Aligned plain-text tables.

/// Formats `x` with `digits` significant digits, without exponent notation
/// for ordinary magnitudes.
pub fn sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return format!("{:.*}", digits.saturating_sub(1), 0.0);
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-5..=15).contains(&magnitude) {
        return format!("{:.*e}", digits.saturating_sub(1), x);
    }
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // rounding may carry into a new digit (9.9996 -> 10.000)
    let rounded: f64 = s.parse().unwrap_or(x);
    if rounded != 0.0 && rounded.abs().log10().floor() as i32 > magnitude && decimals > 0 {
        return format!("{x:.*}", decimals - 1);
    }
    s
}

pub fn sig4(x: f64) -> String {
    sig(x, 4)
}

pub fn sig4_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), sig4)
}

/// Column-aligned table. The first column is left-aligned, the rest right-aligned.
#[derive(Debug, Default)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row<S: Into<String>>(&mut self, cells: impl IntoIterator<Item = S>) -> &mut Self {
        self.rows.push(cells.into_iter().map(Into::into).collect());
        self
    }

    pub fn render(&self) -> String {
        let ncol = self.header.len();
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.chars().count()).collect();
        for row in &self.rows {
            for (j, cell) in row.iter().enumerate().take(ncol) {
                widths[j] = widths[j].max(cell.chars().count());
            }
        }
        let line = |cells: &[String]| -> String {
            let parts: Vec<String> = (0..ncol)
                .map(|j| {
                    let cell = cells.get(j).map(String::as_str).unwrap_or("");
                    if j == 0 {
                        format!("{cell:<w$}", w = widths[j])
                    } else {
                        format!("{cell:>w$}", w = widths[j])
                    }
                })
                .collect();
            parts.join("  ").trim_end().to_string()
        };
        let mut out = line(&self.header);
        out.push('\n');
        let total: usize = widths.iter().sum::<usize>() + 2 * ncol.saturating_sub(1);
        out.push_str(&"-".repeat(total));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&line(row));
            out.push('\n');
        }
        out
    }
}
