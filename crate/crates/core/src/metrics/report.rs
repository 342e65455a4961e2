use serde::{Deserialize, Serialize};
use serde_json::json;

use super::ged::{ged, ged_breakdown, GedConfig};
use super::prf::{edge_prf, Convention, EventMatching};
use crate::error::{invalid, Error, Result};
use crate::script_graph::ScriptGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricSelection {
    Edges,
    Ged,
    #[default]
    Both,
}

impl MetricSelection {
    pub fn edges(self) -> bool {
        matches!(self, MetricSelection::Edges | MetricSelection::Both)
    }

    pub fn ged(self) -> bool {
        matches!(self, MetricSelection::Ged | MetricSelection::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ReportConfig {
    pub metric: MetricSelection,
    pub convention: Convention,
    pub matching: EventMatching,
    pub ged: GedConfig,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

/// One prediction with every gold script sharing its id.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalItem {
    pub id: String,
    pub pred: ScriptGraph,
    pub golds: Vec<ScriptGraph>,
}

/// Mean operation counts.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OpMeans {
    #[serde(rename = "V-Del")]
    pub v_del: f64,
    #[serde(rename = "V-Ins")]
    pub v_ins: f64,
    #[serde(rename = "V-Rep")]
    pub v_rep: f64,
    #[serde(rename = "E-Del")]
    pub e_del: f64,
    #[serde(rename = "E-Ins")]
    pub e_ins: f64,
    #[serde(rename = "E-Rep")]
    pub e_rep: f64,
}

impl OpMeans {
    fn as_array(&self) -> [f64; 6] {
        [
            self.v_del, self.v_ins, self.v_rep, self.e_del, self.e_ins, self.e_rep,
        ]
    }

    fn from_array(a: [f64; 6]) -> Self {
        OpMeans {
            v_del: a[0],
            v_ins: a[1],
            v_rep: a[2],
            e_del: a[3],
            e_ins: a[4],
            e_rep: a[5],
        }
    }

    fn mean<'a>(items: impl Iterator<Item = &'a OpMeans>) -> Option<OpMeans> {
        mean_arrays(items.map(OpMeans::as_array)).map(OpMeans::from_array)
    }
}

fn mean_arrays<const N: usize>(items: impl Iterator<Item = [f64; N]>) -> Option<[f64; N]> {
    let mut sum = [0.0; N];
    let mut count = 0usize;
    for a in items {
        sum.iter_mut().zip(a).for_each(|(s, x)| *s += x);
        count += 1;
    }
    (count > 0).then(|| sum.map(|s| s / count as f64))
}

/// Per-script scores; each value is a mean over the script's golds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptMetrics {
    pub id: String,
    pub n_golds: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub ged: Option<f64>,
    pub ops: Option<OpMeans>,
    /// False if any distance came from beam search.
    pub ged_exact: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MacroAverages {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub ged: Option<f64>,
    pub ops: Option<OpMeans>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub metric: MetricSelection,
    pub convention: Convention,
    pub scripts: Vec<ScriptMetrics>,
    /// `None` for an empty corpus.
    pub macro_avg: Option<MacroAverages>,
}

/// Table header shared by the TSV and JSON renderings.
pub const COLUMNS: [&str; 11] = [
    "id",
    "F1",
    "P",
    "R",
    "Edit Dist",
    "V-Del",
    "V-Ins",
    "V-Rep",
    "E-Del",
    "E-Ins",
    "E-Rep",
];

/// Row label used for the macro average.
pub const MACRO_ROW: &str = "macro";

fn score_one(item: &EvalItem, cfg: &ReportConfig) -> Result<ScriptMetrics> {
    if item.golds.is_empty() {
        return Err(invalid(format!("script `{}` has no gold", item.id)));
    }
    let context = |e: Error| match e {
        Error::InvalidArgument(m) => Error::InvalidArgument(format!("script `{}`: {m}", item.id)),
        other => other,
    };
    let mut prf = Vec::new();
    let mut dist = Vec::new();
    let mut ops = Vec::new();
    let mut exact = true;
    for gold in &item.golds {
        if cfg.metric.edges() {
            let s = edge_prf(&item.pred, gold, cfg.convention, cfg.matching).map_err(context)?;
            prf.push([s.precision, s.recall, s.f1]);
        }
        if cfg.metric.ged() {
            let r = ged(&item.pred, gold, &cfg.ged)?;
            let c = ged_breakdown(&r.script);
            exact &= r.exact;
            dist.push([r.cost as f64]);
            ops.push(OpMeans::from_array(
                [c.v_del, c.v_ins, c.v_rep, c.e_del, c.e_ins, c.e_rep].map(|x| x as f64),
            ));
        }
    }
    let prf = mean_arrays(prf.into_iter());
    Ok(ScriptMetrics {
        id: item.id.clone(),
        n_golds: item.golds.len(),
        precision: prf.map(|a| a[0]),
        recall: prf.map(|a| a[1]),
        f1: prf.map(|a| a[2]),
        ged: mean_arrays(dist.into_iter()).map(|a| a[0]),
        ops: OpMeans::mean(ops.iter()),
        ged_exact: exact,
    })
}

/// Score every item. Output order follows input order for any `jobs`.
pub fn corpus_report(items: &[EvalItem], cfg: &ReportConfig) -> Result<EvalReport> {
    use rayon::prelude::*;
    let run = || {
        items
            .par_iter()
            .map(|it| score_one(it, cfg))
            .collect::<Result<Vec<_>>>()
    };
    let scripts = match cfg.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| invalid(format!("cannot start worker pool: {e}")))?
            .install(run)?,
        None => run()?,
    };
    Ok(EvalReport::from_scripts(
        cfg.metric,
        cfg.convention,
        scripts,
    ))
}

impl EvalReport {
    pub fn from_scripts(
        metric: MetricSelection,
        convention: Convention,
        scripts: Vec<ScriptMetrics>,
    ) -> Self {
        let macro_avg = (!scripts.is_empty()).then(|| {
            let mean = |f: fn(&ScriptMetrics) -> Option<f64>| {
                mean_arrays(scripts.iter().filter_map(f).map(|x| [x])).map(|a| a[0])
            };
            MacroAverages {
                precision: mean(|s| s.precision),
                recall: mean(|s| s.recall),
                f1: mean(|s| s.f1),
                ged: mean(|s| s.ged),
                ops: OpMeans::mean(scripts.iter().filter_map(|s| s.ops.as_ref())),
            }
        });
        EvalReport {
            metric,
            convention,
            scripts,
            macro_avg,
        }
    }

    /// Rows as printed: P/R/F1 scaled by 100, everything rounded to two
    /// decimals. The macro row comes last.
    pub fn table(&self) -> Vec<(String, [Option<f64>; 10])> {
        let scale = |x: Option<f64>, k: f64| x.map(|v| round2(v * k));
        let row = |p: Option<f64>,
                   r: Option<f64>,
                   f: Option<f64>,
                   g: Option<f64>,
                   ops: Option<OpMeans>| {
            let o = ops.map(|o| o.as_array()).map(|a| a.map(round2));
            let mut cells = [None; 10];
            cells[0] = scale(f, 100.0);
            cells[1] = scale(p, 100.0);
            cells[2] = scale(r, 100.0);
            cells[3] = scale(g, 1.0);
            for k in 0..6 {
                cells[4 + k] = o.map(|a| a[k]);
            }
            cells
        };
        let mut rows: Vec<_> = self
            .scripts
            .iter()
            .map(|s| (s.id.clone(), row(s.precision, s.recall, s.f1, s.ged, s.ops)))
            .collect();
        if let Some(m) = &self.macro_avg {
            rows.push((
                MACRO_ROW.to_string(),
                row(m.precision, m.recall, m.f1, m.ged, m.ops),
            ));
        }
        rows
    }

    /// Tab-separated table; missing values are empty cells.
    pub fn to_tsv(&self) -> String {
        let mut out = COLUMNS.join("\t");
        out.push('\n');
        for (id, cells) in self.table() {
            out.push_str(&id.replace(['\t', '\n'], " "));
            for c in cells {
                out.push('\t');
                if let Some(v) = c {
                    out.push_str(&format!("{v:.2}"));
                }
            }
            out.push('\n');
        }
        out
    }

    /// JSON with the same rounded numbers as [`EvalReport::to_tsv`].
    pub fn to_json(&self) -> String {
        let rows: Vec<_> = self
            .table()
            .into_iter()
            .map(|(id, cells)| {
                let mut obj = serde_json::Map::new();
                obj.insert(COLUMNS[0].into(), json!(id));
                for (name, c) in COLUMNS[1..].iter().zip(cells) {
                    obj.insert((*name).into(), json!(c));
                }
                serde_json::Value::Object(obj)
            })
            .collect();
        let (scripts, total) = match rows.split_last() {
            Some((last, rest)) if self.macro_avg.is_some() => (rest.to_vec(), last.clone()),
            _ => (rows, serde_json::Value::Null),
        };
        let doc = json!({
            "metric": self.metric,
            "convention": self.convention,
            "n_scripts": self.scripts.len(),
            "columns": COLUMNS,
            "scripts": scripts,
            "macro": total,
        });
        serde_json::to_string_pretty(&doc).expect("report always serializes")
    }
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::script_graph::EventNode;

    fn graph(labels: &[&str], edges: &[(usize, usize)]) -> ScriptGraph {
        let events = labels
            .iter()
            .enumerate()
            .map(|(i, l)| EventNode::new(i, *l))
            .collect();
        ScriptGraph::from_parts("s", events, edges.iter().copied()).unwrap()
    }

    #[test]
    fn identical_pair() {
        let g = graph(&["a", "b", "c"], &[(0, 1), (1, 2)]);
        let items = vec![EvalItem {
            id: "x".into(),
            pred: g.clone(),
            golds: vec![g],
        }];
        let r = corpus_report(&items, &ReportConfig::default()).unwrap();
        let m = r.macro_avg.as_ref().unwrap();
        assert_eq!((m.f1, m.ged), (Some(1.0), Some(0.0)));
        assert_eq!(m.ops, Some(OpMeans::default()));
    }

    #[test]
    fn golds_are_averaged() {
        let pred = graph(&["a", "b", "c"], &[]);
        let g2 = graph(&["a", "b", "c"], &[(0, 1), (0, 2)]);
        let cfg = ReportConfig {
            metric: MetricSelection::Ged,
            ..Default::default()
        };
        let g_far = graph(&["x", "y", "c"], &[(0, 1), (0, 2)]);
        assert_eq!(ged(&pred, &g2, &cfg.ged).unwrap().cost, 2);
        assert_eq!(ged(&pred, &g_far, &cfg.ged).unwrap().cost, 4);
        let items = vec![EvalItem {
            id: "x".into(),
            pred,
            golds: vec![g2, g_far],
        }];
        let r = corpus_report(&items, &cfg).unwrap();
        assert_eq!(r.scripts[0].ged, Some(3.0));
        assert_eq!(r.scripts[0].f1, None);
        assert_eq!(r.scripts[0].ops.unwrap().v_rep, 1.0);
    }

    #[test]
    fn empty_corpus() {
        let r = corpus_report(&[], &ReportConfig::default()).unwrap();
        assert!(r.scripts.is_empty());
        assert_eq!(r.macro_avg, None);
        assert_eq!(r.to_tsv(), COLUMNS.join("\t") + "\n");
        assert!(r.to_json().contains("\"macro\": null"));
    }

    #[test]
    fn tsv_and_json_agree() {
        let pred = graph(&["a", "b", "c", "d"], &[(0, 1), (0, 2), (1, 3)]);
        let gold = graph(&["a", "b", "c", "d"], &[(0, 1), (1, 2), (1, 3)]);
        let items = vec![EvalItem {
            id: "x".into(),
            pred,
            golds: vec![gold],
        }];
        let r = corpus_report(&items, &ReportConfig::default()).unwrap();
        let tsv = r.to_tsv();
        let row: Vec<&str> = tsv.lines().nth(1).unwrap().split('\t').collect();
        assert_eq!(&row[..4], &["x", "66.67", "66.67", "66.67"]);
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["scripts"][0]["F1"], 66.67);
        assert_eq!(json["macro"]["P"], 66.67);
        assert_eq!(
            json["scripts"][0]["Edit Dist"].as_f64(),
            row[4].parse().ok()
        );
    }

    #[test]
    fn job_count_does_not_change_output() {
        let items: Vec<EvalItem> = (0..20)
            .map(|k| EvalItem {
                id: format!("s{k}"),
                pred: graph(&["a", "b", "c"], &[(k % 3, (k + 1) % 3)]),
                golds: vec![graph(&["a", "b", "c"], &[(0, 1), (1, 2)])],
            })
            .collect();
        let one = corpus_report(
            &items,
            &ReportConfig {
                jobs: Some(1),
                ..Default::default()
            },
        )
        .unwrap();
        let four = corpus_report(
            &items,
            &ReportConfig {
                jobs: Some(4),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(one.to_json(), four.to_json());
        assert_eq!(
            one.scripts
                .iter()
                .map(|s| s.id.as_str())
                .collect::<Vec<_>>()[..3],
            ["s0", "s1", "s2"]
        );
    }
}
