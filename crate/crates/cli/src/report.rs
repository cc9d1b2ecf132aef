//! Deterministic report files: `summary.csv` (profile rows), `verdicts.txt`
//! (one machine-readable line per instantiated condition), `profile_*.dat`
//! (plot-ready cutoff/distance series), and `membership.csv` when the
//! membership suite runs. Bodies are byte-stable for a fixed config and
//! seed; only the timestamp header line varies.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use taulab_core::seminorm::ConvergenceReport;
use taulab_core::spectral::DecayFamily;

/// 17 significant digits: round-trip exact for f64.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct ReportSink {
    out_dir: PathBuf,
    summary: Vec<String>,
    verdicts: Vec<String>,
    membership: Vec<String>,
    profiles: BTreeMap<String, Vec<(usize, f64)>>,
    failures: Vec<String>,
}

impl ReportSink {
    pub fn new(out_dir: PathBuf) -> Self {
        Self {
            out_dir,
            summary: Vec::new(),
            verdicts: Vec::new(),
            membership: Vec::new(),
            profiles: BTreeMap::new(),
            failures: Vec::new(),
        }
    }

    fn family_tag(f: DecayFamily) -> &'static str {
        match f {
            DecayFamily::Exp => "exp",
            DecayFamily::Gauss => "gauss",
        }
    }

    /// One summary row per cutoff pair of the report, plus the plot series
    /// of adjacent distances.
    pub fn add_report(&mut self, suite: &str, report: &ConvergenceReport) {
        let fam = Self::family_tag(report.seminorm.f.family);
        let gamma = report.seminorm.f.gamma;
        let k_col = report
            .seminorm
            .k
            .map(|k| k.to_string())
            .unwrap_or_default();
        for &(l, m, d) in &report.pairs {
            self.summary.push(format!(
                "{suite},{fam},{},{k_col},{l},{m},{},{}",
                fmt_float(gamma),
                fmt_float(d),
                report.verdict.as_str()
            ));
        }
        let profile_name = format!(
            "profile_{}_{fam}{}_k{}",
            suite.replace(['[', ']', '=', ','], "_"),
            gamma,
            if k_col.is_empty() { "w" } else { &k_col }
        );
        let series: Vec<(usize, f64)> = report
            .pairs
            .iter()
            .filter(|(l, m, _)| m.checked_sub(*l) == Some(1) || report.pairs.len() < 2)
            .map(|&(_, m, d)| (m, d))
            .collect();
        let series = if series.is_empty() {
            report.pairs.iter().map(|&(_, m, d)| (m, d)).collect()
        } else {
            series
        };
        self.profiles.insert(profile_name, series);
    }

    /// A condition verdict line: `id status witness worst`.
    pub fn add_verdict(
        &mut self,
        id: &str,
        status: &str,
        witness: Option<(usize, usize)>,
        worst: f64,
    ) {
        let w = witness
            .map(|(l, m)| format!("{l},{m}"))
            .unwrap_or_else(|| "-".into());
        self.verdicts
            .push(format!("id={id} status={status} witness={w} worst={}", fmt_float(worst)));
    }

    pub fn add_membership_row(
        &mut self,
        operator_id: &str,
        alpha_star: f64,
        theta_hat: f64,
        n_max: u32,
        bound: f64,
        passed: bool,
    ) {
        self.membership.push(format!(
            "{operator_id},{},{},{n_max},{},{passed}",
            fmt_float(alpha_star),
            fmt_float(theta_hat),
            fmt_float(bound)
        ));
    }

    /// Record a failed runtime invariant; the run exits 1 and the verdict
    /// file names the failure.
    pub fn fail(&mut self, invariant: &str, witness: String) {
        self.failures
            .push(format!("ASSERT id={invariant} status=failed witness={witness}"));
    }

    pub fn has_failures(&self) -> bool {
        !self.failures.is_empty()
    }

    pub fn failures(&self) -> &[String] {
        &self.failures
    }

    pub fn write_all(&self) -> io::Result<()> {
        fs::create_dir_all(&self.out_dir)?;
        let stamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);

        let mut summary = String::new();
        summary.push_str(&format!("# generated_at={stamp}\n"));
        summary.push_str("suite,seminorm_family,gamma,k,L,M,distance,verdict\n");
        for row in &self.summary {
            summary.push_str(row);
            summary.push('\n');
        }
        fs::write(self.out_dir.join("summary.csv"), summary)?;

        let mut verdicts = String::new();
        for row in &self.verdicts {
            verdicts.push_str(row);
            verdicts.push('\n');
        }
        for row in &self.failures {
            verdicts.push_str(row);
            verdicts.push('\n');
        }
        fs::write(self.out_dir.join("verdicts.txt"), verdicts)?;

        for (name, series) in &self.profiles {
            let mut body = String::new();
            for &(cut, d) in series {
                body.push_str(&format!("{cut} {}\n", fmt_float(d)));
            }
            fs::write(self.out_dir.join(format!("{name}.dat")), body)?;
        }

        if !self.membership.is_empty() {
            let mut body =
                String::from("operator_id,alpha_star,theta_hat,n_max,bound,passed\n");
            for row in &self.membership {
                body.push_str(row);
                body.push('\n');
            }
            fs::write(self.out_dir.join("membership.csv"), body)?;
        }
        Ok(())
    }
}
