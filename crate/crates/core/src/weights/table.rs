use std::path::Path;

use crate::error::{Error, Result};

/// Sampled weight: linear interpolation in `r`, constant beyond the samples.
#[derive(Clone, Debug)]
pub struct Table {
    r: Vec<f64>,
    w: Vec<f64>,
}

impl Table {
    pub fn new(r: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        if r.len() != w.len() || r.is_empty() {
            return Err(Error::domain("table needs equally many r and omega values, at least one"));
        }
        for (i, (&ri, &wi)) in r.iter().zip(&w).enumerate() {
            if !(0.0..1.0).contains(&ri) {
                return Err(Error::domain(format!("table row {i}: r = {ri} outside [0,1)")));
            }
            if !(wi >= 0.0) || !wi.is_finite() {
                return Err(Error::domain(format!("table row {i}: omega = {wi} is not a finite non-negative value")));
            }
            if i > 0 && ri <= r[i - 1] {
                return Err(Error::domain(format!("table row {i}: r values must increase strictly")));
            }
        }
        if *w.last().unwrap() <= 0.0 {
            return Err(Error::domain("table weight vanishes near the boundary, so its tail would be zero"));
        }
        Ok(Table { r, w })
    }

    /// Reads `r,omega` rows; a non-numeric first row is taken as a header.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_path(path)?;
        let mut r = Vec::new();
        let mut w = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() < 2 {
                return Err(Error::domain(format!("table row {i}: expected two columns")));
            }
            let (a, b) = (rec[0].parse::<f64>(), rec[1].parse::<f64>());
            match (a, b) {
                (Ok(a), Ok(b)) => {
                    r.push(a);
                    w.push(b);
                }
                _ if i == 0 => continue,
                _ => return Err(Error::domain(format!("table row {i}: not a number"))),
            }
        }
        Table::new(r, w)
    }

    pub fn ln_value(&self, r: f64) -> f64 {
        let n = self.r.len();
        if r <= self.r[0] {
            return self.w[0].ln();
        }
        if r >= self.r[n - 1] {
            return self.w[n - 1].ln();
        }
        let i = self.r.partition_point(|&x| x <= r);
        let (r0, r1) = (self.r[i - 1], self.r[i]);
        let t = (r - r0) / (r1 - r0);
        (self.w[i - 1] * (1.0 - t) + self.w[i] * t).ln()
    }

    pub fn deltas(&self) -> Vec<f64> {
        self.r.iter().map(|r| 1.0 - r).collect()
    }

    pub fn notes(&self) -> Vec<String> {
        vec![format!(
            "table weight extrapolated as the constant {} on ({}, 1)",
            self.w[self.w.len() - 1],
            self.r[self.r.len() - 1]
        )]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_and_extrapolation() {
        let t = Table::new(vec![0.0, 0.5, 0.9], vec![1.0, 3.0, 2.0]).unwrap();
        assert!((t.ln_value(0.25).exp() - 2.0).abs() < 1e-15);
        assert!((t.ln_value(0.99).exp() - 2.0).abs() < 1e-15);
        assert!(Table::new(vec![0.0, 0.5], vec![1.0, 0.0]).is_err());
        assert!(Table::new(vec![0.5, 0.5], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("w.csv");
        std::fs::write(&p, "r,omega\n0,1\n0.5,1\n0.75,1\n").unwrap();
        let t = Table::from_csv(&p).unwrap();
        assert_eq!(t.deltas().len(), 3);
        assert_eq!(t.ln_value(0.6), 0.0);
    }
}
