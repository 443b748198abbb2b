//! Durations on the command line.

const MINUTE: i64 = 60;
const HOUR: i64 = 60 * MINUTE;
const DAY: i64 = 24 * HOUR;

/// Parses a non-negative duration into seconds: a bare integer counts
/// seconds, otherwise one unit suffix of `s`, `h`, `d`, `w`, `m` (30 days) or
/// `y` (365 days).
pub fn parse_duration(text: &str) -> Result<i64, String> {
    let text = text.trim();
    let split = text
        .find(|c: char| !c.is_ascii_digit())
        .unwrap_or(text.len());
    let (digits, unit) = text.split_at(split);
    if digits.is_empty() {
        return Err(format!("duration {text:?} must start with a number"));
    }
    let scale = match unit {
        "" | "s" => 1,
        "h" => HOUR,
        "d" => DAY,
        "w" => 7 * DAY,
        "m" => 30 * DAY,
        "y" => 365 * DAY,
        _ => return Err(format!("unknown duration unit {unit:?} (use s, h, d, w, m or y)")),
    };
    digits
        .parse::<i64>()
        .ok()
        .and_then(|n| n.checked_mul(scale))
        .ok_or_else(|| format!("duration {text:?} is too large"))
}
