//! Closed-form three-way variance components for SkillRPS and parameter
//! sweeps over its grid.
//!
//! The closed forms assume both players draw their number uniformly from
//! `1..=n` and their move uniformly from {rock, paper, scissors}; they do not
//! generalize to other policies.

use crate::error::Error;
use crate::exact::ThreeWayReport;
use crate::exec;

/// Parameters of SkillRPS: number range `n >= 1`, rock-paper-scissors bonus
/// `c >= 0`, and coin-flip probability `alpha` in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SkillRpsParams {
    n: u32,
    c: u32,
    alpha: f64,
}

impl SkillRpsParams {
    pub fn new(n: u32, c: u32, alpha: f64) -> Result<Self, Error> {
        if n == 0 {
            return Err(Error::InvalidParameter("skill-rps: n must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!(
                "skill-rps: alpha must be in [0, 1], got {alpha}"
            )));
        }
        Ok(SkillRpsParams { n, c, alpha })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn c(&self) -> u32 {
        self.c
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// ψ(n, c): the variance of the score-conditional mean outcome when no coin
/// flip happens. Piecewise over the integer parameters:
///
/// * `c = 0`:      `1 - 1/n`
/// * `0 < c < n`:  `1 - 1/(3n) + (8c² + 2c - 16cn) / (9n²)`
/// * `c >= n`:     `(1 - 1/n) / 9`
pub fn psi(n: u32, c: u32) -> f64 {
    debug_assert!(n >= 1);
    let nf = n as f64;
    if c == 0 {
        1.0 - 1.0 / nf
    } else if c < n {
        let cf = c as f64;
        1.0 - 1.0 / (3.0 * nf) + (8.0 * cf * cf + 2.0 * cf - 16.0 * cf * nf) / (9.0 * nf * nf)
    } else {
        (1.0 - 1.0 / nf) / 9.0
    }
}

/// The three closed-form variance components:
///
/// * skill     = `(1 - α)² ψ(n, c)`
/// * chance    = `α + α(1 - α) ψ(n, c)`
/// * remaining = `0` for `c = 0`;
///   `(1 - α)(1 - 1/n + 2c/(3n²) - ψ)` for `0 < c < n`;
///   `(1 - α)(8/9 - 2/(9n))` for `c >= n`
pub fn analytic_threeway(params: &SkillRpsParams) -> ThreeWayReport {
    let n = params.n;
    let c = params.c;
    let alpha = params.alpha;
    let nf = n as f64;
    let p = psi(n, c);
    let skill = (1.0 - alpha) * (1.0 - alpha) * p;
    let chance = alpha + alpha * (1.0 - alpha) * p;
    let remaining = if c == 0 {
        0.0
    } else if c < n {
        let cf = c as f64;
        (1.0 - alpha) * (1.0 - 1.0 / nf + 2.0 * cf / (3.0 * nf * nf) - p)
    } else {
        (1.0 - alpha) * (8.0 / 9.0 - 2.0 / (9.0 * nf))
    };
    ThreeWayReport {
        skill,
        chance,
        remaining,
        total: skill + chance + remaining,
    }
}

/// A parameter grid for [`sweep`]. The default grid is
/// n ∈ {1,2,3,5} × c ∈ {0,1,2,5} × α ∈ {0, 0.1, …, 1}.
#[derive(Clone, Debug)]
pub struct SweepGrid {
    pub n: Vec<u32>,
    pub c: Vec<u32>,
    pub alpha: Vec<f64>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            n: vec![1, 2, 3, 5],
            c: vec![0, 1, 2, 5],
            alpha: (0..=10).map(|i| i as f64 / 10.0).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SweepRow {
    pub n: u32,
    pub c: u32,
    pub alpha: f64,
    pub skill: f64,
    pub chance: f64,
    pub remaining: f64,
    pub total: f64,
}

/// One row per grid cell, n-major then c then alpha.
pub fn sweep(grid: &SweepGrid) -> Result<Vec<SweepRow>, Error> {
    if grid.n.is_empty() || grid.c.is_empty() || grid.alpha.is_empty() {
        return Err(Error::InvalidParameter("sweep grid is empty".into()));
    }
    let mut cells = Vec::new();
    for &n in &grid.n {
        for &c in &grid.c {
            for &alpha in &grid.alpha {
                cells.push(SkillRpsParams::new(n, c, alpha)?);
            }
        }
    }
    Ok(exec::map_indexed(cells.len(), |i| {
        let p = cells[i];
        let r = analytic_threeway(&p);
        SweepRow {
            n: p.n,
            c: p.c,
            alpha: p.alpha,
            skill: r.skill,
            chance: r.chance,
            remaining: r.remaining,
            total: r.total,
        }
    }))
}

/// CSV with the fixed column order `n,c,alpha,skill,chance,remaining,total`
/// and a mandatory header row.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("n,c,alpha,skill,chance,remaining,total\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.n, r.c, r.alpha, r.skill, r.chance, r.remaining, r.total
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_spot_values() {
        assert_eq!(psi(2, 0), 0.5);
        assert_eq!(psi(1, 1), 0.0);
        assert!((psi(3, 1) - 34.0 / 81.0).abs() < 1e-15);
        assert!((psi(5, 2) - 86.0 / 225.0).abs() < 1e-15);
        assert!((psi(2, 2) - 1.0 / 18.0).abs() < 1e-15);
    }

    #[test]
    fn analytic_examples() {
        let r = analytic_threeway(&SkillRpsParams::new(2, 0, 0.0).unwrap());
        assert_eq!((r.skill, r.chance, r.remaining), (0.5, 0.0, 0.0));
        let r = analytic_threeway(&SkillRpsParams::new(1, 1, 0.0).unwrap());
        assert!(r.skill == 0.0 && r.chance == 0.0);
        assert!((r.remaining - 2.0 / 3.0).abs() < 1e-15);
        for n in [1, 2, 5] {
            for c in [0, 1, 3] {
                let r = analytic_threeway(&SkillRpsParams::new(n, c, 1.0).unwrap());
                assert_eq!((r.skill, r.chance, r.remaining), (0.0, 1.0, 0.0));
            }
        }
    }

    #[test]
    fn exact_zeroes_at_alpha_extremes() {
        for n in [1, 3] {
            for c in [0, 2] {
                let r0 = analytic_threeway(&SkillRpsParams::new(n, c, 0.0).unwrap());
                assert_eq!(r0.chance, 0.0);
                let r1 = analytic_threeway(&SkillRpsParams::new(n, c, 1.0).unwrap());
                assert_eq!(r1.skill, 0.0);
                assert_eq!(r1.remaining, 0.0);
            }
        }
    }

    #[test]
    fn sweep_shape_and_chance_column() {
        let grid = SweepGrid {
            n: vec![2],
            c: vec![0],
            alpha: vec![0.0, 0.5, 1.0],
        };
        let rows = sweep(&grid).unwrap();
        assert_eq!(rows.len(), 3);
        let chance: Vec<f64> = rows.iter().map(|r| r.chance).collect();
        assert_eq!(chance, vec![0.0, 0.625, 1.0]);

        let single = sweep(&SweepGrid {
            n: vec![1],
            c: vec![0],
            alpha: vec![0.25],
        })
        .unwrap();
        assert_eq!(single.len(), 1);

        assert_eq!(sweep(&SweepGrid::default()).unwrap().len(), 4 * 4 * 11);
    }

    #[test]
    fn csv_format() {
        let rows = sweep(&SweepGrid {
            n: vec![1],
            c: vec![0],
            alpha: vec![0.0],
        })
        .unwrap();
        let csv = sweep_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "n,c,alpha,skill,chance,remaining,total");
        assert_eq!(lines.next().unwrap(), "1,0,0,0,0,0,0");
    }

    #[test]
    fn params_validation() {
        assert!(SkillRpsParams::new(0, 1, 0.5).is_err());
        assert!(SkillRpsParams::new(1, 0, -0.1).is_err());
        assert!(SkillRpsParams::new(1, 0, 1.5).is_err());
        assert!(SkillRpsParams::new(1, 0, f64::NAN).is_err());
    }
}
