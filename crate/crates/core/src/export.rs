//! CSV and PGM writers. Reals use Rust's shortest round-trip formatting.

use std::io::{self, Write};

use crate::analytics::{Grid, ProbabilityReport};
use crate::states::ProtocolParams;

pub const PGM_MAX: u32 = 65535;

fn psi_fields(p: &ProtocolParams) -> String {
    let a = p.psi().amps();
    format!("{},{},{},{}", a[0].re, a[0].im, a[1].re, a[1].im)
}

pub fn write_run(
    out: &mut impl Write,
    p: &ProtocolParams,
    shots: u64,
    seed: u64,
    p_mc: f64,
    stderr: f64,
    p_analytic: f64,
) -> io::Result<()> {
    writeln!(out, "theta,x,y,psi_re0,psi_im0,psi_re1,psi_im1,shots,seed,p_mc,stderr,p_analytic")?;
    writeln!(out, "{},{},{},{},{shots},{seed},{p_mc},{stderr},{p_analytic}", p.theta(), p.x(), p.y(), psi_fields(p))
}

pub fn write_exact(out: &mut impl Write, p: &ProtocolParams, r: &ProbabilityReport, oracle: f64) -> io::Result<()> {
    writeln!(out, "theta,x,y,psi_re0,psi_im0,psi_re1,psi_im1,p_s,p,p_uqsd,p_eqi_check,p_eqi_hat,p_analytic,p_oracle")?;
    writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{},{oracle}",
        p.theta(),
        p.x(),
        p.y(),
        psi_fields(p),
        r.p_s,
        r.p,
        r.p_uqsd,
        r.p_eqi_check,
        r.p_eqi_hat,
        r.p_xy,
    )
}

/// `(x, y)` with the report and oracle value, absent where the basis degenerates.
pub type SweepRow = (f64, f64, Option<(ProbabilityReport, f64)>);

/// Rows in grid order; degenerate cells leave the probability columns empty.
pub fn write_sweep(out: &mut impl Write, theta: f64, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(out, "theta,x,y,p_s,p,p_uqsd,p_eqi_check,p_eqi_hat,p_xy,p_oracle")?;
    for (x, y, cell) in rows {
        match cell {
            Some((r, o)) => writeln!(
                out,
                "{theta},{x},{y},{},{},{},{},{},{},{o}",
                r.p_s, r.p, r.p_uqsd, r.p_eqi_check, r.p_eqi_hat, r.p_xy
            )?,
            None => writeln!(out, "{theta},{x},{y},,,,,,,")?,
        }
    }
    Ok(())
}

pub fn pixel(p: f64) -> u32 {
    (p.clamp(0.0, 1.0) * PGM_MAX as f64).round() as u32
}

/// Plain PGM, top row `y = 1`, left column `x = 0`. Absent cells are black.
pub fn write_pgm(out: &mut impl Write, grid: &Grid) -> io::Result<()> {
    let n = grid.resolution;
    writeln!(out, "P2")?;
    writeln!(out, "# p_xy; columns x = 0..1 left to right, rows y = 1..0 top to bottom")?;
    writeln!(out, "{n} {n}")?;
    writeln!(out, "{PGM_MAX}")?;
    for i in (0..n).rev() {
        let row: Vec<String> = (0..n).map(|j| pixel(grid.get(i, j).unwrap_or(0.0)).to_string()).collect();
        writeln!(out, "{}", row.join(" "))?;
    }
    Ok(())
}

/// `x,y,p_xy` sidecar in grid order (y outer, x inner).
pub fn write_grid_csv(out: &mut impl Write, grid: &Grid) -> io::Result<()> {
    writeln!(out, "x,y,p_xy")?;
    let n = grid.resolution;
    for i in 0..n {
        for j in 0..n {
            match grid.get(i, j) {
                Some(v) => writeln!(out, "{},{},{v}", grid.coord(j), grid.coord(i))?,
                None => writeln!(out, "{},{},", grid.coord(j), grid.coord(i))?,
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pixel_rounding() {
        assert_eq!(pixel(0.45), 29491);
        assert_eq!(pixel(1.0), 65535);
        assert_eq!(pixel(0.0), 0);
    }
}
