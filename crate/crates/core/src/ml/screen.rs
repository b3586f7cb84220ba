use serde::{Deserialize, Serialize};

use super::MlError;
use crate::dsp::cosine_similarity;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Screening {
    pub names: Vec<String>,
    /// Pairwise cosine similarity of mean heatmaps.
    pub similarity: Vec<Vec<f64>>,
    /// Admitted gestures in admission order.
    pub selected: Vec<String>,
}

pub fn similarity_matrix(means: &[(String, Vec<f64>)]) -> Result<Vec<Vec<f64>>, MlError> {
    if let Some((name, _)) = means.iter().find(|(_, v)| v.iter().all(|&x| x == 0.0)) {
        return Err(MlError::ZeroHeatmap(name.clone()));
    }
    let n = means.len();
    let mut m = vec![vec![1.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let s = cosine_similarity(&means[i].1, &means[j].1).expect("nonzero vectors");
            m[i][j] = s;
            m[j][i] = s;
        }
    }
    Ok(m)
}

/// Greedy separability screening. The first entry seeds the admitted set;
/// then the candidate whose largest similarity to the admitted set is
/// smallest is admitted, until that value would exceed `threshold`.
/// Ties go to the earlier entry.
pub fn screen_gestures(means: &[(String, Vec<f64>)], threshold: f64) -> Result<Screening, MlError> {
    if means.len() < 2 {
        return Err(MlError::TooFewGestures(means.len()));
    }
    let sim = similarity_matrix(means)?;
    let mut admitted = vec![0usize];
    let mut remaining: Vec<usize> = (1..means.len()).collect();
    while !remaining.is_empty() {
        let score = |c: usize| {
            admitted
                .iter()
                .map(|&a| sim[c][a])
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let (pos, best) = remaining
            .iter()
            .enumerate()
            .map(|(pos, &c)| (pos, score(c)))
            .fold(
                (0, f64::INFINITY),
                |acc, x| if x.1 < acc.1 { x } else { acc },
            );
        if best > threshold {
            break;
        }
        admitted.push(remaining.remove(pos));
    }
    Ok(Screening {
        names: means.iter().map(|(n, _)| n.clone()).collect(),
        similarity: sim,
        selected: admitted.iter().map(|&i| means[i].0.clone()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn named(n: &str, v: Vec<f64>) -> (String, Vec<f64>) {
        (n.to_string(), v)
    }

    #[test]
    fn identical_and_disjoint() {
        let m = similarity_matrix(&[
            named("a", vec![1.0, 2.0, 0.0, 0.0]),
            named("b", vec![1.0, 2.0, 0.0, 0.0]),
            named("c", vec![0.0, 0.0, 3.0, 1.0]),
        ])
        .unwrap();
        assert!((m[0][1] - 1.0).abs() < 1e-12);
        assert_eq!(m[0][2], 0.0);
        for i in 0..3 {
            assert_eq!(m[i][i], 1.0);
            for j in 0..3 {
                assert_eq!(m[i][j], m[j][i]);
            }
        }
    }

    /// Unit vectors with prescribed pairwise dot products.
    fn three_with(ab: f64, ac: f64, bc: f64) -> Vec<(String, Vec<f64>)> {
        let a = vec![1.0, 0.0, 0.0];
        let b = vec![ab, (1.0 - ab * ab).sqrt(), 0.0];
        let c1 = (bc - ab * ac) / b[1];
        let c = vec![ac, c1, (1.0 - ac * ac - c1 * c1).sqrt()];
        vec![named("a", a), named("b", b), named("c", c)]
    }

    #[test]
    fn greedy_drops_one_of_the_close_pair() {
        let means = three_with(0.2, 0.3, 0.9);
        let s = screen_gestures(&means, 0.5).unwrap();
        assert!((s.similarity[1][2] - 0.9).abs() < 1e-12);
        assert_eq!(s.selected, vec!["a", "b"]);
        let s = screen_gestures(&three_with(0.2, 0.9, 0.3), 0.5).unwrap();
        assert_eq!(s.selected, vec!["a", "b"]);
    }

    #[test]
    fn zero_mean_is_an_error() {
        let err =
            screen_gestures(&[named("a", vec![1.0]), named("z", vec![0.0])], 0.5).unwrap_err();
        assert_eq!(err, MlError::ZeroHeatmap("z".into()));
        assert_eq!(
            screen_gestures(&[named("a", vec![1.0])], 0.5).unwrap_err(),
            MlError::TooFewGestures(1)
        );
    }
}
