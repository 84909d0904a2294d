use super::TrainError;
use std::fmt;
use std::str::FromStr;

/// How segment predictions are combined into a clip decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Voting {
    /// Average the probability vectors, then take the argmax.
    #[default]
    Mean,
    /// Each segment votes for its argmax; most votes wins.
    Count,
}

impl fmt::Display for Voting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Voting::Mean => "mean",
            Voting::Count => "count",
        })
    }
}

impl FromStr for Voting {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mean" => Ok(Voting::Mean),
            "count" => Ok(Voting::Count),
            other => Err(format!("unknown voting mode '{other}'")),
        }
    }
}

/// Index of the largest value; ties go to the lowest index.
fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Mean of the segment probability vectors, then argmax (lowest index on ties).
pub fn vote_clip(segment_probs: &[Vec<f64>]) -> Result<usize, TrainError> {
    vote_clip_with(segment_probs, Voting::Mean)
}

pub fn vote_clip_with(segment_probs: &[Vec<f64>], voting: Voting) -> Result<usize, TrainError> {
    let first = segment_probs.first().ok_or(TrainError::EmptyInput)?;
    let classes = first.len();
    if classes == 0 || segment_probs.iter().any(|p| p.len() != classes) {
        return Err(TrainError::ShapeMismatch("segment probability vectors differ in length".into()));
    }
    let mut tally = vec![0.0; classes];
    for p in segment_probs {
        match voting {
            Voting::Mean => tally.iter_mut().zip(p).for_each(|(t, &v)| *t += v),
            Voting::Count => tally[argmax(p)] += 1.0,
        }
    }
    if voting == Voting::Mean {
        let n = segment_probs.len() as f64;
        tally.iter_mut().for_each(|t| *t /= n);
    }
    Ok(argmax(&tally))
}

/// Row = true class, column = predicted class.
pub fn confusion_matrix(
    predictions: &[usize],
    labels: &[usize],
    class_count: usize,
) -> Result<Vec<Vec<usize>>, TrainError> {
    if predictions.len() != labels.len() {
        return Err(TrainError::LengthMismatch {
            predictions: predictions.len(),
            labels: labels.len(),
        });
    }
    let mut m = vec![vec![0; class_count]; class_count];
    for (&p, &l) in predictions.iter().zip(labels) {
        if p >= class_count || l >= class_count {
            return Err(TrainError::BadLabel {
                label: p.max(l),
                classes: class_count,
            });
        }
        m[l][p] += 1;
    }
    Ok(m)
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}
