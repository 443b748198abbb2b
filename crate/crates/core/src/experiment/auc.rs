/// Area under the ROC curve of `scores` for the binary `labels`, by the
/// Mann-Whitney statistic with midranks for ties. `None` unless both classes
/// are present.
pub fn auc(labels: &[bool], scores: &[f64]) -> Option<f64> {
    assert_eq!(labels.len(), scores.len(), "one score per label");
    let n = scores.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // 1-based ranks i+1..=j+1 share their mean
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = mid;
        }
        i = j + 1;
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = n - pos;
    if pos == 0 || neg == 0 {
        return None;
    }
    let rank_sum: f64 = labels
        .iter()
        .zip(&ranks)
        .filter(|(&l, _)| l)
        .map(|(_, r)| r)
        .sum();
    let u = rank_sum - (pos * (pos + 1)) as f64 / 2.0;
    Some(u / (pos as f64 * neg as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_and_inverted() {
        let labels = [true, true, false, false, false];
        assert_eq!(auc(&labels, &[5.0, 4.0, 3.0, 2.0, 1.0]), Some(1.0));
        assert_eq!(auc(&labels, &[1.0, 2.0, 3.0, 4.0, 5.0]), Some(0.0));
    }

    #[test]
    fn ties_count_half() {
        assert_eq!(auc(&[true, false], &[1.0, 1.0]), Some(0.5));
        assert_eq!(auc(&[true, false, false], &[2.0, 2.0, 1.0]), Some(0.75));
    }

    #[test]
    fn single_class_undefined() {
        assert_eq!(auc(&[true, true], &[1.0, 2.0]), None);
    }
}
