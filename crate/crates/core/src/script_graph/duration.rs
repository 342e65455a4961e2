use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error};

/// Coarse log-scale duration classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeUnit {
    Seconds,
    Minutes,
    Hours,
    Days,
    Weeks,
    Months,
    Years,
}

impl TimeUnit {
    pub const ALL: [TimeUnit; 7] = [
        TimeUnit::Seconds,
        TimeUnit::Minutes,
        TimeUnit::Hours,
        TimeUnit::Days,
        TimeUnit::Weeks,
        TimeUnit::Months,
        TimeUnit::Years,
    ];

    /// Half-open range `[lo, hi)` in seconds; `hi` is `None` for years.
    pub fn range(self) -> (f64, Option<f64>) {
        match self {
            TimeUnit::Seconds => (1.0, Some(60.0)),
            TimeUnit::Minutes => (60.0, Some(3_600.0)),
            TimeUnit::Hours => (3_600.0, Some(86_400.0)),
            TimeUnit::Days => (86_400.0, Some(604_800.0)),
            TimeUnit::Weeks => (604_800.0, Some(2.63e6)),
            TimeUnit::Months => (2.63e6, Some(3.15e7)),
            TimeUnit::Years => (3.15e7, None),
        }
    }

    pub fn contains(self, seconds: f64) -> bool {
        let (lo, hi) = self.range();
        seconds >= lo && hi.is_none_or(|hi| seconds < hi)
    }

    /// Bucket holding `seconds`, if it is at least one second.
    pub fn classify(seconds: f64) -> Option<TimeUnit> {
        TimeUnit::ALL.into_iter().find(|u| u.contains(seconds))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TimeUnit::Seconds => "seconds",
            TimeUnit::Minutes => "minutes",
            TimeUnit::Hours => "hours",
            TimeUnit::Days => "days",
            TimeUnit::Weeks => "weeks",
            TimeUnit::Months => "months",
            TimeUnit::Years => "years",
        }
    }
}

impl fmt::Display for TimeUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TimeUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TimeUnit::ALL
            .into_iter()
            .find(|u| u.as_str() == s)
            .ok_or_else(|| invalid(format!("unknown duration bucket `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DurationBucket {
    pub bucket: TimeUnit,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seconds_estimate: Option<f64>,
}

impl DurationBucket {
    pub fn new(bucket: TimeUnit) -> Self {
        DurationBucket {
            bucket,
            seconds_estimate: None,
        }
    }

    pub fn with_estimate(bucket: TimeUnit, seconds: f64) -> Self {
        DurationBucket {
            bucket,
            seconds_estimate: Some(seconds),
        }
    }

    /// True when there is no estimate or the estimate lies in the bucket.
    pub fn is_consistent(&self) -> bool {
        self.seconds_estimate
            .is_none_or(|s| s.is_finite() && s > 0.0 && self.bucket.contains(s))
    }
}
