use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::fit::{fit_rate_excluding, spearman, RateFit};
use super::ledger::LedgerRow;
use super::runner::GapSeries;
use crate::criteria::rate_law;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct LpRate {
    pub p: f64,
    pub fit: Option<RateFit>,
    pub predicted: f64,
}

/// Measured against predicted gap exponents at one `beta`.
#[derive(Debug, Clone, Serialize)]
pub struct RateRow {
    pub beta: f64,
    pub l2: Option<RateFit>,
    /// Why `l2` is missing.
    pub l2_note: Option<String>,
    pub predicted_l2: f64,
    pub lp: Vec<LpRate>,
    pub matsui_bound: Option<RateFit>,
}

impl RateRow {
    pub fn slope(&self) -> Option<f64> {
        self.l2.as_ref().map(|f| f.slope)
    }
}

/// Gap and criteria along `eps` at one `(beta, kappa)`.
#[derive(Debug, Clone, Serialize)]
pub struct CoVanishing {
    pub beta: f64,
    pub kappa: f64,
    pub eps: Vec<f64>,
    pub gap: Vec<f64>,
    pub kato_b: Vec<f64>,
    pub matsui_abs: Vec<f64>,
    pub spearman_kato: Option<f64>,
    pub spearman_matsui: Option<f64>,
    /// Each step in `eps` that lowers the gap also lowers `kato_b` and `|matsui|`.
    pub co_decrease: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct KappaRow {
    pub beta: f64,
    pub eps: f64,
    pub kappa: f64,
    pub kato_b: f64,
    pub kato_original: f64,
    pub identity_closure: f64,
    pub limsup_lhs: f64,
    pub limsup_rhs: f64,
}

/// Order-of-limits diagnostic at one `beta`.
#[derive(Debug, Clone, Serialize)]
pub struct Permutation {
    pub beta: f64,
    pub eps_min: f64,
    /// `(T', sup_{t <= T'} gap)` at the smallest `eps`.
    pub shrinking_t: Vec<(f64, f64)>,
    pub t_min: f64,
    /// `(eps, sup_{t <= t_min} gap)`.
    pub shrinking_eps: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub rates: Vec<RateRow>,
    pub covanishing: Vec<CoVanishing>,
    pub kappa: Vec<KappaRow>,
    pub permutation: Vec<Permutation>,
    /// Measured `L^2` slopes are non-increasing in `beta`.
    pub monotone_degradation: Option<bool>,
    /// Runs with `|matsui| > matsui_navier_rhs`.
    pub matsui_bound_violations: Vec<String>,
    pub failed: Vec<String>,
    pub unresolved: Vec<String>,
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn fit_of(points: &[(f64, f64)], exclude: &[bool]) -> std::result::Result<RateFit, String> {
    fit_rate_excluding(points, exclude).map_err(|e| e.to_string())
}

/// Summary tables of a ledger. `series_dir` (the sweep output directory)
/// enables the order-of-limits diagnostic.
pub fn report(rows: &[LedgerRow], series_dir: Option<&Path>) -> Result<Report> {
    if rows.is_empty() {
        return Err(Error::Data("empty ledger".into()));
    }
    let ok: Vec<&LedgerRow> = rows.iter().filter(|r| r.is_ok()).collect();
    let mut failed: Vec<String> = rows.iter().filter(|r| !r.is_ok()).map(|r| r.run_id.clone()).collect();
    failed.dedup();
    let mut unresolved: Vec<String> = ok.iter().filter(|r| !r.resolved).map(|r| r.run_id.clone()).collect();
    unresolved.dedup();
    let betas = sorted_unique(rows.iter().map(|r| r.beta).collect());
    let kappas = sorted_unique(ok.iter().map(|r| r.kappa).collect());
    let mut ps: Vec<f64> = Vec::new();
    for r in &ok {
        for (p, _) in r.lp_gaps()? {
            if !ps.contains(&p) {
                ps.push(p);
            }
        }
    }

    // one row per run: gap quantities do not depend on kappa
    let per_run = |beta: f64| -> Vec<&LedgerRow> {
        let mut v: Vec<&LedgerRow> = Vec::new();
        for r in ok.iter().filter(|r| r.beta == beta) {
            if !v.iter().any(|q| q.run_id == r.run_id) {
                v.push(r);
            }
        }
        v.sort_by(|a, b| b.eps.total_cmp(&a.eps));
        v
    };

    let mut rates = Vec::new();
    for &beta in &betas {
        let runs = per_run(beta);
        let law = rate_law(beta.min(1.0), 2.0)?;
        let excl: Vec<bool> = runs.iter().map(|r| !r.resolved).collect();
        let l2pts: Vec<(f64, f64)> = runs.iter().map(|r| (r.eps, r.sup_l2_gap)).collect();
        let (l2, l2_note) = match fit_of(&l2pts, &excl) {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e)),
        };
        let lp = ps
            .iter()
            .map(|&p| {
                let pts: Vec<(f64, f64)> = runs.iter().map(|r| (r.eps, r.lp_gap(p).unwrap_or(f64::NAN))).collect();
                Ok(LpRate {
                    p,
                    fit: fit_of(&pts, &excl).ok(),
                    predicted: rate_law(beta.min(1.0), p)?.predicted_lp_exponent,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mb: Vec<(f64, f64)> = runs.iter().map(|r| (r.eps, r.matsui_navier_rhs)).collect();
        rates.push(RateRow {
            beta,
            l2,
            l2_note,
            predicted_l2: law.predicted_l2_exponent,
            lp,
            matsui_bound: fit_of(&mb, &excl).ok(),
        });
    }

    let mut covanishing = Vec::new();
    let mut kappa = Vec::new();
    for &beta in &betas {
        for &k in &kappas {
            let mut rs: Vec<&LedgerRow> = ok.iter().copied().filter(|r| r.beta == beta && r.kappa == k).collect();
            rs.sort_by(|a, b| b.eps.total_cmp(&a.eps));
            if rs.is_empty() {
                continue;
            }
            let gap: Vec<f64> = rs.iter().map(|r| r.sup_l2_gap).collect();
            let kb: Vec<f64> = rs.iter().map(|r| r.kato_b).collect();
            let ma: Vec<f64> = rs.iter().map(|r| r.matsui.abs()).collect();
            let co_decrease = (1..rs.len()).all(|i| !(gap[i] < gap[i - 1]) || (kb[i] < kb[i - 1] && ma[i] < ma[i - 1]));
            covanishing.push(CoVanishing {
                beta,
                kappa: k,
                eps: rs.iter().map(|r| r.eps).collect(),
                spearman_kato: spearman(&gap, &kb),
                spearman_matsui: spearman(&gap, &ma),
                gap,
                kato_b: kb,
                matsui_abs: ma,
                co_decrease,
            });
            for r in rs {
                kappa.push(KappaRow {
                    beta,
                    eps: r.eps,
                    kappa: k,
                    kato_b: r.kato_b,
                    kato_original: r.kato_original,
                    identity_closure: r.identity_closure,
                    limsup_lhs: r.limsup_lhs,
                    limsup_rhs: r.limsup_rhs,
                });
            }
        }
    }
    kappa.sort_by(|a, b| {
        a.beta
            .total_cmp(&b.beta)
            .then(b.eps.total_cmp(&a.eps))
            .then(b.kappa.total_cmp(&a.kappa))
    });

    let mut permutation = Vec::new();
    if let Some(dir) = series_dir {
        for &beta in &betas {
            let runs = per_run(beta);
            let series: Vec<(f64, GapSeries)> = runs
                .iter()
                .filter_map(|r| GapSeries::read(dir, &r.run_id).ok().map(|s| (r.eps, s)))
                .collect();
            let Some((eps_min, last)) = series.last() else { continue };
            let t_end = last.points.last().map(|p| p.0).unwrap_or(0.0);
            let ts: Vec<f64> = (0..4).map(|k| t_end / 2f64.powi(k)).collect();
            let t_min = ts[ts.len() - 1];
            permutation.push(Permutation {
                beta,
                eps_min: *eps_min,
                shrinking_t: ts.iter().map(|&t| (t, last.sup_until(t))).collect(),
                t_min,
                shrinking_eps: series.iter().map(|(e, s)| (*e, s.sup_until(t_min))).collect(),
            });
        }
    }

    let slopes: Vec<f64> = rates.iter().filter_map(|r| r.slope()).collect();
    let monotone_degradation = (slopes.len() >= 2).then(|| slopes.windows(2).all(|w| w[1] <= w[0]));
    let mut matsui_bound_violations: Vec<String> = ok
        .iter()
        .filter(|r| r.matsui.abs() > r.matsui_navier_rhs)
        .map(|r| r.run_id.clone())
        .collect();
    matsui_bound_violations.dedup();

    Ok(Report {
        rates,
        covanishing,
        kappa,
        permutation,
        monotone_degradation,
        matsui_bound_violations,
        failed,
        unresolved,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into())
}

impl Report {
    /// Human-readable tables.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "rates (sup-L2 gap ~ eps^s)");
        let _ = writeln!(s, "{:>8} {:>10} {:>10} {:>8} {:>8}", "beta", "measured", "predicted", "r2", "points");
        for r in &self.rates {
            let _ = writeln!(
                s,
                "{:>8.4} {:>10} {:>10.4} {:>8} {:>8}",
                r.beta,
                opt(r.slope()),
                r.predicted_l2,
                opt(r.l2.as_ref().map(|f| f.r2)),
                r.l2.as_ref().map(|f| f.points.len()).unwrap_or(0)
            );
            for l in &r.lp {
                let _ = writeln!(
                    s,
                    "{:>8} L^{:<3} {:>8} {:>10.4}",
                    "",
                    l.p,
                    opt(l.fit.as_ref().map(|f| f.slope)),
                    l.predicted
                );
            }
        }
        if let Some(m) = self.monotone_degradation {
            let _ = writeln!(s, "monotone degradation in beta: {}", if m { "yes" } else { "no" });
        }
        let _ = writeln!(s, "\nco-vanishing (Spearman of gap against criterion)");
        let _ = writeln!(s, "{:>8} {:>8} {:>10} {:>10} {:>12}", "beta", "kappa", "kato_b", "|matsui|", "co-decrease");
        for c in &self.covanishing {
            let _ = writeln!(
                s,
                "{:>8.4} {:>8.4} {:>10} {:>10} {:>12}",
                c.beta,
                c.kappa,
                opt(c.spearman_kato),
                opt(c.spearman_matsui),
                c.co_decrease
            );
        }
        if !self.permutation.is_empty() {
            let _ = writeln!(s, "\norder of limits");
            for p in &self.permutation {
                let t: Vec<String> = p.shrinking_t.iter().map(|(t, g)| format!("T={t:.3}:{g:.3e}")).collect();
                let e: Vec<String> = p.shrinking_eps.iter().map(|(e, g)| format!("eps={e:.2e}:{g:.3e}")).collect();
                let _ = writeln!(s, "beta {:.4}: eps_min {:.2e} -> {}", p.beta, p.eps_min, t.join(" "));
                let _ = writeln!(s, "beta {:.4}: T {:.3} -> {}", p.beta, p.t_min, e.join(" "));
            }
        }
        for (name, list) in [
            ("matsui bound violated", &self.matsui_bound_violations),
            ("failed", &self.failed),
            ("unresolved (excluded from fits)", &self.unresolved),
        ] {
            if !list.is_empty() {
                let _ = writeln!(s, "{name}: {}", list.join(", "));
            }
        }
        s
    }
}

/// Writes `summary.txt`, `report.json` and whitespace-columnar plot data.
pub fn write_report(report: &Report, rows: &[LedgerRow], dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("summary.txt"), report.summary())?;
    std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(report)?)?;

    let mut rates = String::from("# beta measured predicted r2\n");
    for r in &report.rates {
        let _ = writeln!(
            rates,
            "{} {} {} {}",
            r.beta,
            r.slope().unwrap_or(f64::NAN),
            r.predicted_l2,
            r.l2.as_ref().map(|f| f.r2).unwrap_or(f64::NAN)
        );
    }
    std::fs::write(dir.join("rates.dat"), rates)?;

    let mut gaps = String::from("# eps beta kappa sup_l2_gap kato_b kato_original matsui matsui_navier_rhs\n");
    for r in rows.iter().filter(|r| r.is_ok()) {
        let _ = writeln!(
            gaps,
            "{} {} {} {} {} {} {} {}",
            r.eps, r.beta, r.kappa, r.sup_l2_gap, r.kato_b, r.kato_original, r.matsui, r.matsui_navier_rhs
        );
    }
    std::fs::write(dir.join("gaps.dat"), gaps)?;

    let mut kap = String::from("# beta eps kappa kato_b kato_original identity_closure limsup_lhs limsup_rhs\n");
    for k in &report.kappa {
        let _ = writeln!(
            kap,
            "{} {} {} {} {} {} {} {}",
            k.beta, k.eps, k.kappa, k.kato_b, k.kato_original, k.identity_closure, k.limsup_lhs, k.limsup_rhs
        );
    }
    std::fs::write(dir.join("kappa.dat"), kap)?;

    let mut perm = String::from("# beta axis value sup_gap\n");
    for p in &report.permutation {
        for (t, g) in &p.shrinking_t {
            let _ = writeln!(perm, "{} T {} {}", p.beta, t, g);
        }
        for (e, g) in &p.shrinking_eps {
            let _ = writeln!(perm, "{} eps {} {}", p.beta, e, g);
        }
    }
    std::fs::write(dir.join("permutation.dat"), perm)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::ledger::STATUS_OK;

    fn row(eps: f64, beta: f64, kappa: f64, gap: f64) -> LedgerRow {
        let mut r = LedgerRow::failed(&crate::sweep::run_id(eps, beta), eps, beta, 1.0, kappa, 32, 64, "");
        r.status = STATUS_OK.into();
        r.resolved = true;
        r.sup_l2_gap = gap;
        r.kato_b = gap * 2.0;
        r.matsui = -gap * gap;
        r.matsui_navier_rhs = gap;
        r
    }

    #[test]
    fn single_run_gives_one_row_tables() {
        let rows = vec![row(1e-2, 0.5, 0.4, 0.1)];
        let r = report(&rows, None).unwrap();
        assert_eq!(r.rates.len(), 1);
        assert!(r.rates[0].l2.is_none() && r.rates[0].l2_note.is_some());
        assert_eq!(r.covanishing.len(), 1);
        assert_eq!(r.kappa.len(), 1);
        assert!(r.monotone_degradation.is_none());
        assert!(report(&[], None).is_err());
    }

    #[test]
    fn predicted_column_and_degradation_flag() {
        let eps = [1e-2, 1e-3, 1e-4];
        let mut rows = Vec::new();
        for (beta, s) in [(0.0, 0.5), (0.25, 0.375), (0.5, 0.25), (0.75, 0.125)] {
            for e in eps {
                rows.push(row(e, beta, 0.4, e.powf(s)));
            }
        }
        let r = report(&rows, None).unwrap();
        let pred: Vec<f64> = r.rates.iter().map(|r| r.predicted_l2).collect();
        assert_eq!(pred, vec![0.5, 0.375, 0.25, 0.125]);
        assert_eq!(r.monotone_degradation, Some(true));
        for c in &r.covanishing {
            assert_eq!(c.spearman_kato, Some(1.0));
            assert!(c.co_decrease);
        }
        assert!(r.summary().contains("monotone degradation in beta: yes"));
        rows.retain(|r| r.beta != 0.25);
        rows.iter_mut().filter(|r| r.beta == 0.5).for_each(|r| r.sup_l2_gap = r.eps.powf(0.6));
        assert_eq!(report(&rows, None).unwrap().monotone_degradation, Some(false));
    }

    #[test]
    fn unresolved_runs_are_excluded_from_fits() {
        let mut rows: Vec<LedgerRow> = [1e-2, 1e-3, 1e-4, 1e-5].iter().map(|&e| row(e, 0.5, 0.4, e.powf(0.25))).collect();
        rows[3].resolved = false;
        rows[3].sup_l2_gap = 1.0;
        let r = report(&rows, None).unwrap();
        let f = r.rates[0].l2.as_ref().unwrap();
        assert!((f.slope - 0.25).abs() < 1e-12);
        assert_eq!(f.excluded.len(), 1);
        assert_eq!(r.unresolved.len(), 1);
    }
}
