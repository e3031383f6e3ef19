use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use serde::Serialize;

use super::NewsMention;
use crate::error::{Error, Result};

/// One calendar day (UTC) of outlet activity, with trailing means.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MediaDay {
    pub date: NaiveDate,
    pub outlet_count: usize,
    pub total_visits: u64,
    pub mean_trust: Option<f64>,
    pub rolling_outlet_count: f64,
    pub rolling_total_visits: f64,
    pub rolling_mean_trust: Option<f64>,
}

#[derive(Default)]
struct DayAcc {
    outlets: BTreeMap<String, (Option<u64>, Option<f64>)>,
}

/// Daily distinct-outlet counts, visits and trust with a trailing mean over
/// `window_days`. Days without outlets count as zero; their trust is
/// undefined and left out of the trust mean. Near the start of the series
/// the mean covers the days available so far.
pub fn rolling_media_series(news: &[NewsMention], window_days: usize) -> Result<Vec<MediaDay>> {
    if window_days == 0 {
        return Err(Error::InvalidParameter("window_days must be >= 1".into()));
    }
    let mut days: BTreeMap<NaiveDate, DayAcc> = BTreeMap::new();
    for n in news {
        let acc = days.entry(n.timestamp.date_naive()).or_default();
        let entry = acc
            .outlets
            .entry(n.outlet_domain.clone())
            .or_insert((None, None));
        if entry.0.is_none() {
            entry.0 = n.daily_visits;
        }
        if entry.1.is_none() {
            entry.1 = n.trust_score;
        }
    }
    let (Some(&first), Some(&last)) = (days.keys().next(), days.keys().next_back()) else {
        return Ok(Vec::new());
    };

    let mut raw = Vec::new();
    let mut d = first;
    while d <= last {
        let (count, visits, trust) = match days.get(&d) {
            Some(acc) => {
                let scored: Vec<f64> = acc.outlets.values().filter_map(|v| v.1).collect();
                let trust =
                    (!scored.is_empty()).then(|| scored.iter().sum::<f64>() / scored.len() as f64);
                let visits = acc.outlets.values().map(|v| v.0.unwrap_or(0)).sum();
                let distinct: BTreeSet<&String> = acc.outlets.keys().collect();
                (distinct.len(), visits, trust)
            }
            None => (0, 0, None),
        };
        raw.push((d, count, visits, trust));
        d = d.succ_opt().expect("date in range");
    }

    Ok(raw
        .iter()
        .enumerate()
        .map(|(i, &(date, count, visits, trust))| {
            let lo = (i + 1).saturating_sub(window_days);
            let win = &raw[lo..=i];
            let len = win.len() as f64;
            let trusts: Vec<f64> = win.iter().filter_map(|r| r.3).collect();
            MediaDay {
                date,
                outlet_count: count,
                total_visits: visits,
                mean_trust: trust,
                rolling_outlet_count: win.iter().map(|r| r.1 as f64).sum::<f64>() / len,
                rolling_total_visits: win.iter().map(|r| r.2 as f64).sum::<f64>() / len,
                rolling_mean_trust: (!trusts.is_empty())
                    .then(|| trusts.iter().sum::<f64>() / trusts.len() as f64),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Timestamp;
    use chrono::Duration;

    fn on_day(day: i64, outlet: &str, trust: Option<f64>) -> NewsMention {
        let base: Timestamp = "2021-02-01T12:00:00Z".parse().unwrap();
        NewsMention {
            article_id: format!("{outlet}-{day}"),
            outlet_domain: outlet.into(),
            timestamp: base + Duration::days(day),
            title: "t".into(),
            dois: Default::default(),
            trust_score: trust,
            daily_visits: Some(100),
        }
    }

    #[test]
    fn constant_outlet_gives_constant_series() {
        let news: Vec<_> = (0..10).map(|d| on_day(d, "a.com", Some(0.8))).collect();
        let s = rolling_media_series(&news, 7).unwrap();
        assert_eq!(s.len(), 10);
        for day in &s {
            assert_eq!(day.rolling_outlet_count, 1.0);
            assert!((day.rolling_mean_trust.unwrap() - 0.8).abs() < 1e-12);
            assert_eq!(day.rolling_total_visits, 100.0);
        }
    }

    #[test]
    fn single_spike_then_empty_days() {
        // outlets on day 0 only; a later outlet bounds the series
        let news = vec![on_day(0, "a.com", Some(0.5)), on_day(9, "b.com", None)];
        let s = rolling_media_series(&news, 7).unwrap();
        assert!((s[6].rolling_outlet_count - 1.0 / 7.0).abs() < 1e-15);
        assert_eq!(s[3].outlet_count, 0);
        assert_eq!(s[3].mean_trust, None);
        assert_eq!(s[6].rolling_mean_trust, Some(0.5));
        assert_eq!(s[9].rolling_mean_trust, None);
    }

    #[test]
    fn distinct_outlets_per_day() {
        let mut a = on_day(0, "a.com", Some(1.0));
        let mut b = a.clone();
        b.article_id = "again".into();
        a.daily_visits = Some(5);
        b.daily_visits = Some(5);
        let s = rolling_media_series(&[a, b, on_day(0, "c.com", Some(0.0))], 7).unwrap();
        assert_eq!(s[0].outlet_count, 2);
        assert_eq!(s[0].total_visits, 105);
        assert_eq!(s[0].mean_trust, Some(0.5));
        assert!(rolling_media_series(&[], 7).unwrap().is_empty());
        assert!(rolling_media_series(&[], 0).is_err());
    }
}
