//! Convergence-report rows and the log-log rate fit shared by the
//! translation, Vitali and mollifier studies.

use serde::Serialize;

/// One row of a convergence report.
#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    /// Study step (truncation level, refinement index, ...).
    pub k: u32,
    /// Identifier of the probe vector or integrand.
    pub z_id: String,
    pub abs_error: f64,
    /// Least-squares order; None when the errors sit at machine level.
    pub fitted_rate: Option<f64>,
}

pub const CSV_HEADER: &str = "k,z_id,abs_error,fitted_rate";

impl ReportRow {
    pub fn csv_line(&self) -> String {
        match self.fitted_rate {
            Some(r) => format!("{},{},{:.16e},{:.6}", self.k, self.z_id, self.abs_error, r),
            None => format!("{},{},{:.16e},", self.k, self.z_id, self.abs_error),
        }
    }
}

pub fn write_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv_line());
        out.push('\n');
    }
    out
}

/// Least-squares slope of log(err) against log(x).
///
/// Points with err < 1e-15 are identities hit exactly and carry no rate
/// information; they are dropped. Returns None with fewer than two
/// informative points.
pub fn fit_loglog_slope(xs: &[f64], errs: &[f64]) -> Option<f64> {
    assert_eq!(xs.len(), errs.len());
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(errs)
        .filter(|&(&x, &e)| x > 0.0 && e >= 1e-15)
        .map(|(&x, &e)| (x.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    // denom collapses when all abscissae coincide; the comparison is
    // relative so cancellation noise does not masquerade as a spread
    let denom = n * sxx - sx * sx;
    if denom.abs() <= 1e-12 * (n * sxx).abs() + 1e-300 {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn slope_recovers_power_laws() {
        let xs: Vec<f64> = (1..=6).map(|k| 1.0 / k as f64).collect();
        let errs: Vec<f64> = xs.iter().map(|x| 3.0 * x * x).collect();
        assert_abs_diff_eq!(fit_loglog_slope(&xs, &errs).unwrap(), 2.0, epsilon = 1e-12);

        let ks: Vec<f64> = (1..=8).map(|k| k as f64).collect();
        let errs: Vec<f64> = ks.iter().map(|k| 0.5 / k).collect();
        assert_abs_diff_eq!(fit_loglog_slope(&ks, &errs).unwrap(), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn machine_level_errors_give_no_rate() {
        let xs = [1.0, 0.5, 0.25];
        let errs = [1e-16, 1e-17, 3e-16];
        assert!(fit_loglog_slope(&xs, &errs).is_none());
        // one informative point is still not enough
        assert!(fit_loglog_slope(&xs, &[1e-3, 1e-16, 1e-16]).is_none());
        // coincident abscissae carry no slope either
        assert!(fit_loglog_slope(&[0.9, 0.9, 0.9], &[0.1, 0.2, 0.1]).is_none());
    }

    #[test]
    fn csv_shape() {
        let rows = vec![
            ReportRow {
                k: 1,
                z_id: "z0".into(),
                abs_error: 0.5,
                fitted_rate: Some(1.0),
            },
            ReportRow {
                k: 2,
                z_id: "z0".into(),
                abs_error: 0.25,
                fitted_rate: None,
            },
        ];
        let text = write_csv(&rows);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(lines.next(), Some("1,z0,5.0000000000000000e-1,1.000000"));
        assert_eq!(lines.next(), Some("2,z0,2.5000000000000000e-1,"));
    }
}
