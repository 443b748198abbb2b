use serde::{Deserialize, Serialize};

use super::fit_mogen;
use crate::error::{Error, Result};
use crate::pathdata::PathDataset;

/// Fit summary of one candidate maximum order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderScore {
    pub order: usize,
    pub log_likelihood: f64,
    pub dof: usize,
    pub aic: f64,
}

/// AIC of every order in `1..=k_max`.
pub fn order_scores(ds: &PathDataset, k_max: usize) -> Result<Vec<OrderScore>> {
    if k_max < 1 {
        return Err(Error::InvalidArgument("maximum order must be at least 1".into()));
    }
    // orders beyond the longest path fit the same model
    let top = k_max.min(ds.max_len().max(1));
    (1..=top)
        .map(|k| {
            let m = fit_mogen(ds, k)?;
            let log_likelihood = m.log_likelihood(ds);
            let dof = m.degrees_of_freedom();
            Ok(OrderScore {
                order: k,
                log_likelihood,
                dof,
                aic: 2.0 * dof as f64 - 2.0 * log_likelihood,
            })
        })
        .collect()
}

/// The order in `1..=k_max` with the lowest AIC; the smaller order wins ties.
pub fn select_order(ds: &PathDataset, k_max: usize) -> Result<usize> {
    let scores = order_scores(ds, k_max)?;
    let best = scores
        .iter()
        .fold(None::<&OrderScore>, |best, s| match best {
            Some(b) if b.aic <= s.aic => Some(b),
            _ => Some(s),
        })
        .ok_or(Error::EmptyDataset)?;
    log::debug!("selected order {} (AIC {:.3})", best.order, best.aic);
    Ok(best.order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_max_one_returns_one() {
        let ds = PathDataset::from_labels([("A,B,C", 3)]).unwrap();
        assert_eq!(select_order(&ds, 1).unwrap(), 1);
    }

    #[test]
    fn planted_memory_is_detected() {
        let ds = PathDataset::from_labels([("A,C,D,E", 500), ("B,C,D,F", 500)]).unwrap();
        assert!(select_order(&ds, 4).unwrap() >= 2);
    }

    #[test]
    fn deterministic_paths_have_zero_dof_at_top() {
        let ds = PathDataset::from_labels([("A,B,C", 3)]).unwrap();
        let s = order_scores(&ds, 3).unwrap();
        assert!(s.iter().all(|o| o.dof == 0 && o.log_likelihood == 0.0));
        assert_eq!(select_order(&ds, 3).unwrap(), 1);
    }

    #[test]
    fn zero_order_rejected() {
        let ds = PathDataset::from_labels([("A", 1)]).unwrap();
        assert!(select_order(&ds, 0).is_err());
    }
}
