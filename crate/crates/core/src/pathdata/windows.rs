use serde::{Deserialize, Serialize};

use super::{Path, PathDataset};
use crate::error::{Error, Result};

/// Rolling window specification. `start` is the anchor of the first window;
/// `None` anchors at the earliest path start rounded down to a multiple of
/// `shift`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start: Option<i64>,
    pub length: i64,
    pub shift: i64,
}

impl TimeWindow {
    pub fn new(length: i64, shift: i64) -> Self {
        TimeWindow {
            start: None,
            length,
            shift,
        }
    }
}

const MAX_WINDOWS: usize = 100_000;

/// One emitted window `[start, end)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub index: usize,
    pub start: i64,
    pub end: i64,
    pub empty: bool,
}

impl Window {
    pub fn contains(&self, t: i64) -> bool {
        self.start <= t && t < self.end
    }
}

/// Assigns paths to half-open windows by their start time. Windows advance
/// by `shift` from the anchor while the window start does not exceed the
/// latest path start. Empty windows are emitted with `empty` set and no
/// dataset.
pub fn rolling_windows(
    ds: &PathDataset,
    win: &TimeWindow,
) -> Result<Vec<(Window, Option<PathDataset>)>> {
    if win.length <= 0 || win.shift <= 0 {
        return Err(Error::InvalidArgument(
            "window length and shift must be positive".into(),
        ));
    }
    let times = ds
        .paths()
        .iter()
        .map(|p| {
            p.start_time.ok_or_else(|| {
                Error::MissingTimestamp(ds.vocabulary().join(&p.nodes, ","))
            })
        })
        .collect::<Result<Vec<i64>>>()?;
    let min = *times.iter().min().ok_or(Error::EmptyDataset)?;
    let max = *times.iter().max().ok_or(Error::EmptyDataset)?;
    let anchor = win
        .start
        .unwrap_or_else(|| min.div_euclid(win.shift).saturating_mul(win.shift));

    let n_windows = (max as i128 - anchor as i128) / win.shift as i128 + 1;
    if n_windows > MAX_WINDOWS as i128 {
        return Err(Error::InvalidArgument(format!(
            "{n_windows} windows exceed the limit of {MAX_WINDOWS}; increase the shift"
        )));
    }

    let mut out = Vec::new();
    let mut start = anchor;
    while start <= max {
        let end = start.saturating_add(win.length);
        let window = Window {
            index: out.len(),
            start,
            end,
            empty: true,
        };
        let inside: Vec<Path> = ds
            .paths()
            .iter()
            .zip(&times)
            .filter(|(_, &t)| window.contains(t))
            .map(|(p, _)| p.clone())
            .collect();
        if inside.is_empty() {
            out.push((window, None));
        } else {
            let sub = PathDataset::from_parts(ds.vocabulary().clone(), inside)?;
            out.push((Window { empty: false, ..window }, Some(sub)));
        }
        match start.checked_add(win.shift) {
            Some(next) => start = next,
            None => break,
        }
    }
    Ok(out)
}
