//! Per-run statistics.
//!
//! Switch-count summaries and the CDF are taken over discovered users only;
//! unreachable users are reported separately as a fraction.

use crate::geometry::Point2D;
use crate::rendezvous::RendezvousResult;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserRecord {
    pub user_id: usize,
    pub nominal: Point2D,
    pub true_pos: Point2D,
    pub result: RendezvousResult,
    /// Database candidates proposed ahead of the regular sequence.
    pub candidates: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunStats {
    pub algorithm: String,
    pub seed: u64,
    pub records: Vec<UserRecord>,
}

/// Value at quantile `q` (nearest rank) of sorted data.
pub fn quantile(sorted: &[usize], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let rank = (q.clamp(0.0, 1.0) * sorted.len() as f64).ceil() as usize;
    Some(sorted[rank.saturating_sub(1)] as f64)
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

impl RunStats {
    pub fn users(&self) -> usize {
        self.records.len()
    }

    fn successes(&self) -> impl Iterator<Item = &UserRecord> {
        self.records.iter().filter(|r| r.result.success)
    }

    fn sorted<F: Fn(&RendezvousResult) -> usize>(&self, f: F) -> Vec<usize> {
        let mut v: Vec<usize> = self.successes().map(|r| f(&r.result)).collect();
        v.sort_unstable();
        v
    }

    pub fn mean_bs(&self) -> f64 {
        mean(self.successes().map(|r| r.result.bs_switches as f64))
    }

    pub fn mean_mt(&self) -> f64 {
        mean(self.successes().map(|r| r.result.mt_switches as f64))
    }

    pub fn bs_quantile(&self, q: f64) -> Option<f64> {
        quantile(&self.sorted(|r| r.bs_switches), q)
    }

    pub fn mt_quantile(&self, q: f64) -> Option<f64> {
        quantile(&self.sorted(|r| r.mt_switches), q)
    }

    pub fn unreachable_fraction(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.records.iter().filter(|r| !r.result.success).count() as f64 / self.records.len() as f64
    }

    /// Fraction of users discovered through a database candidate.
    pub fn db_hit_rate(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.records.iter().filter(|r| r.result.via_db).count() as f64 / self.records.len() as f64
    }

    /// Mean candidate count over users whose query returned any.
    pub fn mean_candidates(&self) -> f64 {
        mean(self.records.iter().filter(|r| r.candidates > 0).map(|r| r.candidates as f64))
    }

    /// `P(discovered via database | at least one candidate)`.
    pub fn db_success_given_candidates(&self) -> f64 {
        let with: Vec<_> = self.records.iter().filter(|r| r.candidates > 0).collect();
        if with.is_empty() {
            return f64::NAN;
        }
        with.iter().filter(|r| r.result.via_db).count() as f64 / with.len() as f64
    }

    /// Empirical CDF of MT switches over discovered users, as
    /// `(switches, fraction ≤ switches)` at every distinct value.
    pub fn mt_cdf(&self) -> Vec<(usize, f64)> {
        let v = self.sorted(|r| r.mt_switches);
        let n = v.len() as f64;
        let mut out: Vec<(usize, f64)> = Vec::new();
        for (i, &x) in v.iter().enumerate() {
            let f = (i + 1) as f64 / n;
            match out.last_mut() {
                Some(last) if last.0 == x => last.1 = f,
                _ => out.push((x, f)),
            }
        }
        out
    }

    pub fn summary(&self) -> Summary {
        Summary {
            algorithm: self.algorithm.clone(),
            users: self.users(),
            runs: 1,
            mean_bs: self.mean_bs(),
            mean_mt: self.mean_mt(),
            median_bs: self.bs_quantile(0.5).unwrap_or(f64::NAN),
            median_mt: self.mt_quantile(0.5).unwrap_or(f64::NAN),
            p90_mt: self.mt_quantile(0.9).unwrap_or(f64::NAN),
            unreachable: self.unreachable_fraction(),
            db_hit_rate: self.db_hit_rate(),
            mean_candidates: self.mean_candidates(),
            db_success_given_candidates: self.db_success_given_candidates(),
        }
    }
}

/// Scalar summary of one run, or the average over several seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub algorithm: String,
    pub users: usize,
    pub runs: usize,
    pub mean_bs: f64,
    pub mean_mt: f64,
    pub median_bs: f64,
    pub median_mt: f64,
    pub p90_mt: f64,
    pub unreachable: f64,
    pub db_hit_rate: f64,
    pub mean_candidates: f64,
    pub db_success_given_candidates: f64,
}

impl Summary {
    pub const HEADER: [&'static str; 12] = [
        "algorithm",
        "users",
        "runs",
        "mean_bs",
        "mean_mt",
        "median_bs",
        "median_mt",
        "p90_mt",
        "unreachable",
        "db_hit_rate",
        "mean_candidates",
        "db_success_given_candidates",
    ];

    pub fn fields(&self) -> Vec<String> {
        vec![
            self.algorithm.clone(),
            self.users.to_string(),
            self.runs.to_string(),
            self.mean_bs.to_string(),
            self.mean_mt.to_string(),
            self.median_bs.to_string(),
            self.median_mt.to_string(),
            self.p90_mt.to_string(),
            self.unreachable.to_string(),
            self.db_hit_rate.to_string(),
            self.mean_candidates.to_string(),
            self.db_success_given_candidates.to_string(),
        ]
    }

    /// Field-wise mean; NaN entries (undefined in a run) are skipped.
    pub fn average(runs: &[Summary]) -> Summary {
        let avg = |f: fn(&Summary) -> f64| mean(runs.iter().map(f).filter(|v| !v.is_nan()));
        Summary {
            algorithm: runs.first().map(|s| s.algorithm.clone()).unwrap_or_default(),
            users: runs.iter().map(|s| s.users).sum(),
            runs: runs.iter().map(|s| s.runs).sum(),
            mean_bs: avg(|s| s.mean_bs),
            mean_mt: avg(|s| s.mean_mt),
            median_bs: avg(|s| s.median_bs),
            median_mt: avg(|s| s.median_mt),
            p90_mt: avg(|s| s.p90_mt),
            unreachable: avg(|s| s.unreachable),
            db_hit_rate: avg(|s| s.db_hit_rate),
            mean_candidates: avg(|s| s.mean_candidates),
            db_success_given_candidates: avg(|s| s.db_success_given_candidates),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: usize, success: bool, bs: usize, mt: usize, via_db: bool, candidates: usize) -> UserRecord {
        UserRecord {
            user_id: id,
            nominal: Point2D::default(),
            true_pos: Point2D::default(),
            result: RendezvousResult {
                success,
                bs_switches: bs,
                mt_switches: mt,
                config: None,
                mt_beam: None,
                path_kind: None,
                via_db,
            },
            candidates,
        }
    }

    fn sample() -> RunStats {
        RunStats {
            algorithm: "dsls".into(),
            seed: 1,
            records: vec![
                rec(0, true, 1, 5, true, 2),
                rec(1, true, 2, 20, false, 1),
                rec(2, false, 280, 3360, false, 0),
                rec(3, true, 1, 5, false, 0),
            ],
        }
    }

    #[test]
    fn means_skip_unreachable() {
        let s = sample();
        assert_eq!(s.mean_mt(), 10.0);
        assert_eq!(s.mean_bs(), 4.0 / 3.0);
        assert_eq!(s.unreachable_fraction(), 0.25);
        assert_eq!(s.mt_quantile(0.5), Some(5.0));
        assert_eq!(s.mt_quantile(1.0), Some(20.0));
    }

    #[test]
    fn db_statistics() {
        let s = sample();
        assert_eq!(s.db_hit_rate(), 0.25);
        assert_eq!(s.mean_candidates(), 1.5);
        assert_eq!(s.db_success_given_candidates(), 0.5);
    }

    #[test]
    fn cdf_shape() {
        let cdf = sample().mt_cdf();
        assert_eq!(cdf, vec![(5, 2.0 / 3.0), (20, 1.0)]);
        let empty = RunStats {
            algorithm: String::new(),
            seed: 0,
            records: vec![],
        };
        assert!(empty.mt_cdf().is_empty());
        assert!(empty.mean_mt().is_nan());
    }

    #[test]
    fn average_of_summaries() {
        let a = sample().summary();
        let mut b = a.clone();
        b.mean_mt = 20.0;
        b.db_success_given_candidates = f64::NAN;
        let avg = Summary::average(&[a.clone(), b]);
        assert_eq!(avg.mean_mt, 15.0);
        assert_eq!(avg.runs, 2);
        assert_eq!(avg.db_success_given_candidates, a.db_success_given_candidates);
    }
}
