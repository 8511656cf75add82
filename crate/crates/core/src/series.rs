//! Dated price and log-return series, with `date,price` CSV input.

use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::TimeConvention;

/// Default minimum number of returns accepted for estimation.
pub const MIN_ESTIMATION_LENGTH: usize = 250;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    dates: Vec<NaiveDate>,
    prices: Vec<f64>,
}

impl PriceSeries {
    pub fn new(dates: Vec<NaiveDate>, prices: Vec<f64>) -> Result<Self> {
        if dates.len() != prices.len() {
            return Err(Error::invalid("prices", "dates and prices differ in length"));
        }
        for (i, p) in prices.iter().enumerate() {
            if !(p.is_finite() && *p > 0.0) {
                return Err(Error::invalid("prices", format!("price {p} at row {} is not positive", i + 1)));
            }
        }
        for (i, w) in dates.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(Error::invalid("dates", format!("date {} at row {} does not follow {}", w[1], i + 2, w[0])));
            }
        }
        Ok(Self { dates, prices })
    }

    /// Reads `date,price` CSV with ISO dates. Errors carry the file line number.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = csv.headers().map_err(|e| Error::Parse { line: 1, reason: e.to_string() })?;
        if header.iter().collect::<Vec<_>>() != ["date", "price"] {
            return Err(Error::Parse {
                line: 1,
                reason: format!("expected header `date,price`, got `{}`", header.iter().collect::<Vec<_>>().join(",")),
            });
        }
        let mut dates: Vec<NaiveDate> = Vec::new();
        let mut prices = Vec::new();
        for record in csv.records() {
            let record = record.map_err(|e| Error::Parse {
                line: e.position().map(|p| p.line()).unwrap_or(0),
                reason: e.to_string(),
            })?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            let fail = |reason: String| Error::Parse { line, reason };
            if record.len() != 2 {
                return Err(fail(format!("expected 2 fields, found {}", record.len())));
            }
            let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d")
                .map_err(|e| fail(format!("bad date `{}`: {e}", &record[0])))?;
            let price: f64 = record[1].parse().map_err(|_| fail(format!("bad price `{}`", &record[1])))?;
            if !(price.is_finite() && price > 0.0) {
                return Err(fail(format!("price must be positive, got {price}")));
            }
            if let Some(last) = dates.last() {
                if date <= *last {
                    return Err(fail(format!("date {date} does not follow {last}")));
                }
            }
            dates.push(date);
            prices.push(price);
        }
        Ok(Self { dates, prices })
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("date,price\n");
        for (d, p) in self.dates.iter().zip(&self.prices) {
            out.push_str(&format!("{d},{p}\n"));
        }
        out
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    /// Rows with `from <= date < to`.
    pub fn between(&self, from: NaiveDate, to: NaiveDate) -> Self {
        let lo = self.dates.partition_point(|d| *d < from);
        let hi = self.dates.partition_point(|d| *d < to);
        Self {
            dates: self.dates[lo..hi].to_vec(),
            prices: self.prices[lo..hi].to_vec(),
        }
    }

    /// Log differences of consecutive prices, dated at the later row.
    pub fn log_returns(&self, convention: TimeConvention) -> Result<ReturnSeries> {
        let returns = self.prices.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
        let dates = self.dates.iter().skip(1).copied().collect();
        ReturnSeries::dated(dates, returns, convention.day())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    dates: Option<Vec<NaiveDate>>,
    returns: Vec<f64>,
    /// Year fraction per observation.
    pub dt: f64,
}

impl ReturnSeries {
    pub fn new(returns: Vec<f64>, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid("dt", format!("must be positive, got {dt}")));
        }
        if let Some(i) = returns.iter().position(|r| !r.is_finite()) {
            return Err(Error::invalid("returns", format!("non-finite return at index {i}")));
        }
        Ok(Self { dates: None, returns, dt })
    }

    pub fn dated(dates: Vec<NaiveDate>, returns: Vec<f64>, dt: f64) -> Result<Self> {
        if dates.len() != returns.len() {
            return Err(Error::invalid("dates", "dates and returns differ in length"));
        }
        if let Some(w) = dates.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::invalid("dates", format!("date {} does not follow {}", w[1], w[0])));
        }
        let mut series = Self::new(returns, dt)?;
        series.dates = Some(dates);
        Ok(series)
    }

    /// Daily series under the default 252-day convention.
    pub fn daily(returns: Vec<f64>) -> Result<Self> {
        Self::new(returns, TimeConvention::default().day())
    }

    pub fn returns(&self) -> &[f64] {
        &self.returns
    }

    pub fn dates(&self) -> Option<&[NaiveDate]> {
        self.dates.as_deref()
    }

    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }

    pub fn require_length(&self, minimum: usize) -> Result<()> {
        if self.len() < minimum {
            return Err(Error::InsufficientData(format!("{} returns, need at least {minimum}", self.len())));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_reports_lines() {
        let ok = "date,price\n2020-01-02,100\n2020-01-03,101.5\n2020-01-06,99\n";
        let p = PriceSeries::from_csv_reader(ok.as_bytes()).unwrap();
        assert_eq!(p.len(), 3);
        let r = p.log_returns(TimeConvention::default()).unwrap();
        assert!((r.returns()[0] - (1.015f64).ln()).abs() < 1e-15);
        assert_eq!(r.dates().unwrap()[0], NaiveDate::from_ymd_opt(2020, 1, 3).unwrap());

        let back = "date,price\n2020-01-02,100\n2020-01-03,101\n2020-01-03,102\n";
        match PriceSeries::from_csv_reader(back.as_bytes()).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 4),
            e => panic!("{e}"),
        }
        let neg = "date,price\n2020-01-02,-1\n";
        assert!(matches!(PriceSeries::from_csv_reader(neg.as_bytes()), Err(Error::Parse { line: 2, .. })));
        let bad = "date,price\n2020-13-02,1\n";
        assert!(matches!(PriceSeries::from_csv_reader(bad.as_bytes()), Err(Error::Parse { line: 2, .. })));
        assert!(PriceSeries::from_csv_reader("day,close\n".as_bytes()).is_err());
    }

    #[test]
    fn csv_round_trip_and_slicing() {
        let d = |m, day| NaiveDate::from_ymd_opt(2021, m, day).unwrap();
        let p = PriceSeries::new(vec![d(1, 4), d(1, 5), d(2, 1), d(3, 1)], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(PriceSeries::from_csv_reader(p.to_csv().as_bytes()).unwrap(), p);
        let s = p.between(d(1, 5), d(3, 1));
        assert_eq!(s.prices(), &[2.0, 3.0]);
    }

    #[test]
    fn return_validation() {
        assert!(ReturnSeries::new(vec![0.1, f64::NAN], 0.01).is_err());
        assert!(ReturnSeries::new(vec![0.1], 0.0).is_err());
        assert!(ReturnSeries::daily(vec![0.0; 10]).unwrap().require_length(250).is_err());
    }
}
