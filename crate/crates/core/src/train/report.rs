use super::{mean_std, EpochRecord, Evaluation, MeanStd, MetricsError};

/// Test-set metrics of one trained model.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub edit_distance: usize,
    pub history: Vec<EpochRecord>,
}

impl RunResult {
    pub fn new(eval: &Evaluation, history: Vec<EpochRecord>) -> Self {
        Self {
            accuracy: eval.accuracy,
            precision: eval.morphemes.precision,
            recall: eval.morphemes.recall,
            f1: eval.morphemes.f1,
            edit_distance: eval.edit_distance,
            history,
        }
    }

    pub fn metrics(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("accuracy", self.accuracy),
            ("precision", self.precision),
            ("recall", self.recall),
            ("f1", self.f1),
            ("edit_distance", self.edit_distance as f64),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub runs: usize,
    pub accuracy: MeanStd,
    pub f1: MeanStd,
    pub edit_distance: MeanStd,
}

pub fn aggregate_runs(results: &[RunResult]) -> Result<Aggregate, MetricsError> {
    let col = |f: fn(&RunResult) -> f64| mean_std(&results.iter().map(f).collect::<Vec<_>>());
    Ok(Aggregate {
        runs: results.len(),
        accuracy: col(|r| r.accuracy)?,
        f1: col(|r| r.f1)?,
        edit_distance: col(|r| r.edit_distance as f64)?,
    })
}

/// `key<TAB>value` lines with four decimals.
pub fn format_metrics<'a>(pairs: impl IntoIterator<Item = (&'a str, f64)>) -> String {
    pairs.into_iter().map(|(k, v)| format!("{k}\t{v:.4}\n")).collect()
}

pub fn parse_metrics(text: &str) -> Option<Vec<(String, f64)>> {
    text.lines()
        .filter(|l| !l.is_empty())
        .map(|l| {
            let (k, v) = l.split_once('\t')?;
            Some((k.to_owned(), v.parse().ok()?))
        })
        .collect()
}

/// `surface<TAB>gold<TAB>pred` lines.
pub fn write_predictions<'a>(rows: impl IntoIterator<Item = (&'a str, &'a str, &'a str)>) -> String {
    rows.into_iter().map(|(s, g, p)| format!("{s}\t{g}\t{p}\n")).collect()
}

pub fn read_predictions(text: &str) -> Option<Vec<(String, String, String)>> {
    text.lines()
        .filter(|l| !l.is_empty())
        .map(|l| {
            let mut it = l.split('\t');
            let row = (it.next()?.to_owned(), it.next()?.to_owned(), it.next()?.to_owned());
            it.next().is_none().then_some(row)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(acc: f64) -> RunResult {
        RunResult {
            accuracy: acc,
            precision: acc,
            recall: acc,
            f1: acc,
            edit_distance: 2,
            history: vec![],
        }
    }

    #[test]
    fn aggregate_three_runs() {
        let a = aggregate_runs(&[run(1.0), run(2.0), run(3.0)]).unwrap();
        assert_eq!((a.accuracy.mean, a.accuracy.std), (2.0, 1.0));
        assert_eq!(a.edit_distance.std, 0.0);
        assert!(aggregate_runs(&[run(0.5)]).unwrap().accuracy.single);
        assert!(aggregate_runs(&[]).is_err());
    }

    #[test]
    fn metrics_round_trip() {
        let text = format_metrics([("accuracy", 0.123456), ("edit_distance", 17.0)]);
        assert_eq!(text, "accuracy\t0.1235\nedit_distance\t17.0000\n");
        assert_eq!(parse_metrics(&text).unwrap(), [("accuracy".to_owned(), 0.1235), ("edit_distance".to_owned(), 17.0)]);
    }

    #[test]
    fn predictions_round_trip() {
        let text = write_predictions([("cats", "cat-s", "cat-s"), ("ran", "run-PST", "ran")]);
        let rows = read_predictions(&text).unwrap();
        assert_eq!(rows[1], ("ran".into(), "run-PST".into(), "ran".into()));
        assert!(read_predictions("a\tb").is_none());
    }
}
