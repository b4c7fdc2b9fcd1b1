//! Trial metrics, the stability test, and CSV output.

use std::io::Write;

use thiserror::Error;

use crate::icn::Time;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("stability test needs at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("writing csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("writing csv: {0}")]
    Io(#[from] std::io::Error),
}

pub const MIN_STABILITY_SAMPLES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stability {
    pub stable: bool,
    /// Least-squares slope of response time (ms) per query index.
    pub slope: f64,
    pub theta: f64,
}

/// Least-squares trend over the trailing `window` fraction of `samples`.
/// Unstable iff the slope exceeds `theta` (default: mean / sample count,
/// i.e. the trend would add more than the mean over the whole trial).
pub fn stability_test(samples: &[f64], window: f64, theta: Option<f64>) -> Result<Stability, MetricsError> {
    let n = samples.len();
    if n < MIN_STABILITY_SAMPLES {
        return Err(MetricsError::TooFewSamples {
            needed: MIN_STABILITY_SAMPLES,
            got: n,
        });
    }
    let theta = theta.unwrap_or_else(|| samples.iter().sum::<f64>() / n as f64 / n as f64);
    let start = n - ((n as f64 * window).ceil() as usize).clamp(2, n);
    let xs = (start..n).map(|i| i as f64);
    let ys = &samples[start..];
    let m = ys.len() as f64;
    let mx = xs.clone().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    let slope = sxy / sxx;
    Ok(Stability {
        stable: slope <= theta,
        slope,
        theta,
    })
}

/// Mean and normal-approximation 95% confidence half-width.
pub fn mean_ci95(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, 1.96 * (var / n as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryRecord {
    pub id: usize,
    pub site: usize,
    pub submit: Time,
    pub resolve: Time,
    pub contacted: usize,
    pub objects: usize,
    pub complete: bool,
    pub timed_out: bool,
    pub misses: u32,
    /// Contacted sites that listed no object.
    pub false_positives: usize,
}

impl QueryRecord {
    pub fn response_ms(&self) -> f64 {
        (self.resolve - self.submit) as f64 / 1000.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkRecord {
    pub link: usize,
    pub from: usize,
    pub to: usize,
    pub bytes: u64,
    pub packets: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrialMetrics {
    /// One record per submitted query, by id.
    pub queries: Vec<QueryRecord>,
    /// Queries refused at the front end.
    pub rejected: u64,
    /// Database jobs dropped on a full waiting queue.
    pub db_rejections: u64,
    /// qInterests served plus local queries, per site.
    pub site_queries: Vec<u64>,
    pub cache_hits: u64,
    pub cache_misses: u64,
    pub packet_drops: u64,
    pub bad_signatures: u64,
    pub links: Vec<LinkRecord>,
    /// gData bytes carried by links.
    pub gdata_bytes: u64,
    /// Wire size of every site's current announcement.
    pub announcement_bytes: u64,
    pub advertised_tiles: usize,
    pub vinterests: u64,
    pub between_phase_misses: u64,
    pub end_time: Time,
}

impl TrialMetrics {
    pub fn response_times_ms(&self) -> Vec<f64> {
        self.queries.iter().map(QueryRecord::response_ms).collect()
    }

    pub fn timed_out(&self) -> usize {
        self.queries.iter().filter(|q| q.timed_out).count()
    }

    pub fn complete(&self) -> usize {
        self.queries.iter().filter(|q| q.complete).count()
    }

    pub fn false_positives(&self) -> usize {
        self.queries.iter().map(|q| q.false_positives).sum()
    }

    /// Mean fraction of submitted queries each site had to process.
    pub fn site_query_ratio(&self) -> f64 {
        if self.queries.is_empty() || self.site_queries.is_empty() {
            return 0.0;
        }
        let total: u64 = self.site_queries.iter().sum();
        total as f64 / self.site_queries.len() as f64 / self.queries.len() as f64
    }

    pub fn write_queries_csv<W: Write>(&self, w: W) -> Result<(), MetricsError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["query_id", "submit_ms", "resolve_ms", "contacted", "objects", "complete"])?;
        for q in &self.queries {
            out.write_record([
                q.id.to_string(),
                ms(q.submit),
                ms(q.resolve),
                q.contacted.to_string(),
                q.objects.to_string(),
                q.complete.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn summary(&self, window: f64, theta: Option<f64>) -> Vec<(String, String)> {
        let rt = self.response_times_ms();
        let (mean, ci) = mean_ci95(&rt);
        let mut rows: Vec<(String, String)> = vec![
            ("queries".into(), self.queries.len().to_string()),
            ("complete".into(), self.complete().to_string()),
            ("timed_out".into(), self.timed_out().to_string()),
            ("rejected".into(), self.rejected.to_string()),
            ("db_rejections".into(), self.db_rejections.to_string()),
            ("mean_response_ms".into(), format!("{mean:.3}")),
            ("ci95_ms".into(), format!("{ci:.3}")),
        ];
        match stability_test(&rt, window, theta) {
            Ok(s) => {
                rows.push(("stable".into(), (s.stable && self.timed_out() == 0).to_string()));
                rows.push(("slope_ms_per_query".into(), format!("{:.6}", s.slope)));
                rows.push(("theta".into(), format!("{:.6}", s.theta)));
            }
            Err(_) => rows.push(("stable".into(), "n/a".into())),
        }
        rows.extend([
            ("false_positives".into(), self.false_positives().to_string()),
            ("site_query_ratio".into(), format!("{:.4}", self.site_query_ratio())),
            ("cache_hits".into(), self.cache_hits.to_string()),
            ("cache_misses".into(), self.cache_misses.to_string()),
            ("packet_drops".into(), self.packet_drops.to_string()),
            ("bad_signatures".into(), self.bad_signatures.to_string()),
            ("between_phase_misses".into(), self.between_phase_misses.to_string()),
            ("gdata_bytes".into(), self.gdata_bytes.to_string()),
            ("announcement_bytes".into(), self.announcement_bytes.to_string()),
            ("advertised_tiles".into(), self.advertised_tiles.to_string()),
            ("vinterests".into(), self.vinterests.to_string()),
            ("end_ms".into(), ms(self.end_time)),
        ]);
        for (i, n) in self.site_queries.iter().enumerate() {
            rows.push((format!("site{i}_queries"), n.to_string()));
        }
        rows
    }

    pub fn write_summary_csv<W: Write>(&self, w: W, window: f64, theta: Option<f64>) -> Result<(), MetricsError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["metric", "value"])?;
        for (k, v) in self.summary(window, theta) {
            out.write_record([k, v])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_links_csv<W: Write>(&self, w: W) -> Result<(), MetricsError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["link", "from", "to", "bytes", "packets"])?;
        for l in &self.links {
            out.write_record([l.link, l.from, l.to].map(|x| x.to_string()).into_iter().chain([
                l.bytes.to_string(),
                l.packets.to_string(),
            ]))?;
        }
        out.flush()?;
        Ok(())
    }
}

fn ms(t: Time) -> String {
    format!("{}.{:03}", t / 1000, t % 1000)
}
