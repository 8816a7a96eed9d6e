//! Per-iteration training aggregates.

/// One row per training iteration, computed over the batch collected by the
/// policy of that iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    pub iteration: usize,
    pub avg_reward: f64,
    /// Fraction of steps whose commanded action was infeasible.
    pub avg_speed_violation: f64,
    /// Fraction of steps whose motion was clipped at the search limits.
    pub avg_boundary_violation: f64,
    /// Mean of `log10(sum_k rss_k / noise)`.
    pub avg_log_sum_rss_snr: f64,
    pub avg_speed: f64,
    pub avg_height: f64,
    pub avg_dist_to_cluster: f64,
    pub delta_r: f64,
}

impl MetricsRow {
    /// Column names in emission order.
    pub const COLUMNS: [&'static str; 9] = [
        "iteration",
        "avg_reward",
        "avg_speed_violation",
        "avg_boundary_violation",
        "avg_log_sum_rss_snr",
        "avg_speed",
        "avg_height",
        "avg_dist_to_cluster",
        "delta_r",
    ];

    /// Values after `iteration`, in column order.
    pub fn values(&self) -> [f64; 8] {
        [
            self.avg_reward,
            self.avg_speed_violation,
            self.avg_boundary_violation,
            self.avg_log_sum_rss_snr,
            self.avg_speed,
            self.avg_height,
            self.avg_dist_to_cluster,
            self.delta_r,
        ]
    }

    pub fn from_values(iteration: usize, v: [f64; 8]) -> Self {
        Self {
            iteration,
            avg_reward: v[0],
            avg_speed_violation: v[1],
            avg_boundary_violation: v[2],
            avg_log_sum_rss_snr: v[3],
            avg_speed: v[4],
            avg_height: v[5],
            avg_dist_to_cluster: v[6],
            delta_r: v[7],
        }
    }
}
