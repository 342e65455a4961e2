use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::CorpusRecord;
use crate::error::{Error, Result};
use crate::script_graph::TimeUnit;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_scripts: usize,
    pub by_split: BTreeMap<String, usize>,
    pub by_source: BTreeMap<String, usize>,
    /// `None` for an empty corpus.
    pub mean_events: Option<f64>,
    pub event_count_histogram: BTreeMap<usize, usize>,
    /// Maximum degree of the reduced primary annotation.
    pub degree_histogram: BTreeMap<usize, usize>,
    pub edge_count_histogram: BTreeMap<usize, usize>,
    /// Every bucket in increasing order, including empty ones.
    pub duration_histogram: Vec<(TimeUnit, usize)>,
    pub events_without_duration: usize,
}

/// Records whose primary annotation cannot be built are skipped.
pub fn corpus_stats(records: &[CorpusRecord]) -> CorpusStats {
    let mut s = CorpusStats::default();
    let mut durations: BTreeMap<TimeUnit, usize> = TimeUnit::ALL.iter().map(|&u| (u, 0)).collect();
    let mut total_events = 0;
    for r in records {
        let Ok(g) = r.script() else { continue };
        s.n_scripts += 1;
        *s.by_split.entry(r.split.as_str().into()).or_default() += 1;
        *s.by_source.entry(r.source.as_str().into()).or_default() += 1;
        total_events += g.len();
        *s.event_count_histogram.entry(g.len()).or_default() += 1;
        *s.degree_histogram.entry(g.max_degree()).or_default() += 1;
        *s.edge_count_histogram.entry(g.edges().len()).or_default() += 1;
        for ev in g.events() {
            match &ev.duration {
                Some(d) => *durations.entry(d.bucket).or_default() += 1,
                None => s.events_without_duration += 1,
            }
        }
    }
    s.mean_events = (s.n_scripts > 0).then(|| total_events as f64 / s.n_scripts as f64);
    s.duration_histogram = durations.into_iter().collect();
    s
}

impl CorpusStats {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("stats always serialize")
    }

    /// Long-format CSV with columns `statistic,key,value`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["statistic", "key", "value"])
            .map_err(csv_err)?;
        let mut row = |stat: &str, key: &str, value: String| {
            w.write_record([stat, key, &value]).map_err(csv_err)
        };
        row("n_scripts", "", self.n_scripts.to_string())?;
        row(
            "mean_events",
            "",
            self.mean_events
                .map(|m| format!("{m:.4}"))
                .unwrap_or_default(),
        )?;
        for (k, v) in &self.by_split {
            row("split", k, v.to_string())?;
        }
        for (k, v) in &self.by_source {
            row("source", k, v.to_string())?;
        }
        for (k, v) in &self.event_count_histogram {
            row("event_count", &k.to_string(), v.to_string())?;
        }
        for (k, v) in &self.degree_histogram {
            row("degree", &k.to_string(), v.to_string())?;
        }
        for (k, v) in &self.edge_count_histogram {
            row("edge_count", &k.to_string(), v.to_string())?;
        }
        for (k, v) in &self.duration_histogram {
            row("duration", k.as_str(), v.to_string())?;
        }
        row("duration", "none", self.events_without_duration.to_string())?;
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Source, Split};
    use crate::script_graph::{DurationBucket, EventNode};

    fn record(n: usize, edges: Vec<(usize, usize)>) -> CorpusRecord {
        CorpusRecord {
            id: format!("r{n}"),
            scenario: "s".into(),
            source: Source::Other,
            split: Split::Dev,
            events: (0..n).map(|i| EventNode::new(i, format!("e{i}"))).collect(),
            edges,
            alt_edges: None,
            parent_id: None,
            parent_edge: None,
        }
    }

    fn chain(n: usize) -> CorpusRecord {
        record(n, (1..n).map(|i| (i - 1, i)).collect())
    }

    #[test]
    fn two_chains() {
        let s = corpus_stats(&[chain(5), chain(6)]);
        assert_eq!(s.n_scripts, 2);
        assert_eq!(s.mean_events, Some(5.5));
        assert_eq!(s.degree_histogram, BTreeMap::from([(1, 2)]));
        assert_eq!(s.edge_count_histogram, BTreeMap::from([(4, 1), (5, 1)]));
        assert_eq!(s.by_split["dev"], 2);
    }

    #[test]
    fn diamond_has_degree_two() {
        let s = corpus_stats(&[chain(5), record(4, vec![(0, 1), (0, 2), (1, 3), (2, 3)])]);
        assert_eq!(s.degree_histogram, BTreeMap::from([(1, 1), (2, 1)]));
        assert_eq!(s.degree_histogram.values().sum::<usize>(), s.n_scripts);
    }

    #[test]
    fn empty_corpus() {
        let s = corpus_stats(&[]);
        assert_eq!((s.n_scripts, s.mean_events), (0, None));
        assert_eq!(s.duration_histogram.len(), TimeUnit::ALL.len());
    }

    #[test]
    fn durations_and_csv() {
        let mut r = chain(3);
        r.events[0] = r.events[0]
            .clone()
            .with_duration(DurationBucket::new(TimeUnit::Minutes));
        r.events[2] = r.events[2]
            .clone()
            .with_duration(DurationBucket::new(TimeUnit::Minutes));
        let s = corpus_stats(&[r]);
        assert!(s.duration_histogram.contains(&(TimeUnit::Minutes, 2)));
        assert_eq!(s.events_without_duration, 1);
        let csv = s.to_csv().unwrap();
        assert!(csv.starts_with("statistic,key,value\n"));
        assert!(csv.contains("duration,minutes,2\n"));
        assert!(csv.contains("mean_events,,3.0000\n"));
        let back: CorpusStats = serde_json::from_str(&s.to_json()).unwrap();
        assert_eq!(back, s);
    }
}
