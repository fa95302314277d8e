//! Heat map of a density over its grid. Decoration only; nothing reads it back.

use std::fmt::Write as _;
use transmod::domain::{CellStatus, QuotientGrid};
use transmod::modsolve::{cell_statuses, MassDistribution};

const PX: f64 = 600.0;

fn shade(t: f64) -> String {
    // White through orange to dark red.
    let t = t.clamp(0.0, 1.0);
    let r = 255.0 - 95.0 * t * t;
    let g = 255.0 * (1.0 - t);
    let b = 255.0 * (1.0 - t).powi(3);
    format!("#{:02x}{:02x}{:02x}", r as u8, g as u8, b as u8)
}

pub fn density_svg(grid: &QuotientGrid, rho: &MassDistribution) -> String {
    let scale = PX / (grid.nx.max(grid.ny) as f64);
    let (w, h) = (grid.nx as f64 * scale, grid.ny as f64 * scale);
    let top = rho
        .rho_cells
        .iter()
        .chain(&rho.rho_contracted)
        .fold(0.0f64, |m, &x| m.max(x))
        .max(f64::MIN_POSITIVE);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}">"#);
    for ((i, j), st) in cell_statuses(grid) {
        let fill = match st {
            CellStatus::Free => match grid.free_at(i, j) {
                Some(f) => shade(rho.rho_cells[f as usize] / top),
                None => continue,
            },
            CellStatus::Inside(k) => match rho.rho_contracted.get(k).copied().unwrap_or(0.0) {
                w if w > 0.0 => shade(w / top),
                _ => "#8fa8c8".to_string(),
            },
            CellStatus::OutsideAmbient => continue,
        };
        let y = (grid.ny - 1 - j) as f64 * scale;
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
            i as f64 * scale,
            scale + 0.05,
            scale + 0.05
        );
    }
    s.push_str("</svg>\n");
    s
}
