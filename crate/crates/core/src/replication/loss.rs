//! Data-loss probabilities for `n` groups of seven machines with independent
//! per-machine failure probability `p`.
//!
//! With `c_f` the survival coefficient of `x^f` and `N = 7n`,
//!
//! ```text
//! P_l = Σ_{f=3}^{5n} C(N,f) p^f (1−p)^{N−f} (1 − c_f / C(N,f))
//!     + Σ_{f=5n+1}^{N} C(N,f) p^f (1−p)^{N−f}
//! ```
//!
//! Because the groups are independent this collapses to
//! `1 − (1 − p³ − p⁴ + p⁷)^n`, which is kept as an independent check.

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{binomial, binomial_row, ln_biguint, ratio_to_f64, Dyadic};
use crate::replication::polynomial::{loss_polynomial, BASE_COEFFS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossMethod {
    ExactBigint,
    LogDomain,
    ClosedForm,
}

impl std::str::FromStr for LossMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact-bigint" => Ok(LossMethod::ExactBigint),
            "log-domain" => Ok(LossMethod::LogDomain),
            "closed-form" => Ok(LossMethod::ClosedForm),
            other => Err(Error::InvalidArgument(format!("unknown loss method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossResult {
    pub p_loss: f64,
    pub method: LossMethod,
    /// Loss contribution of exactly `f` failures, indexed by `f`.
    pub per_f_terms: Option<Vec<f64>>,
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("probability must lie in [0, 1], got {p}")))
    }
}

/// Loss model for `n` groups: node count, failure probability and the
/// survival coefficients of its generating polynomial.
#[derive(Debug, Clone)]
pub struct LossModel {
    pub n: usize,
    pub p: f64,
    pub a: [u64; 6],
    survivors: Vec<BigUint>,
    subsets: Vec<BigUint>,
}

impl LossModel {
    pub fn new(n: usize, p: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be >= 1".into()));
        }
        check_probability(p)?;
        Ok(Self {
            n,
            p,
            a: BASE_COEFFS,
            survivors: loss_polynomial(n),
            subsets: binomial_row(7 * n as u64),
        })
    }

    pub fn machines(&self) -> usize {
        7 * self.n
    }

    /// Coefficient of `x^f` (zero beyond degree `5n`).
    pub fn survivors(&self, f: usize) -> BigUint {
        self.survivors.get(f).cloned().unwrap_or_default()
    }

    /// Number of fatal `f`-subsets, `C(7n, f) − c_f`.
    fn fatal(&self, f: usize) -> BigUint {
        &self.subsets[f] - self.survivors(f)
    }

    fn check_failures(&self, f: usize) -> Result<()> {
        if f > self.machines() {
            Err(Error::InvalidArgument(format!(
                "f = {f} exceeds the {} machines",
                self.machines()
            )))
        } else {
            Ok(())
        }
    }

    /// Probability that `f` simultaneous failures lose no data.
    pub fn prob_no_loss(&self, f: usize) -> Result<f64> {
        self.check_failures(f)?;
        Ok(ratio_to_f64(&self.survivors(f), &self.subsets[f]))
    }

    /// `C(7n, f) p^f (1−p)^{7n−f}`, evaluated exactly and rounded once.
    pub fn prob_f_failures(&self, f: usize) -> Result<f64> {
        self.check_failures(f)?;
        let d = Dyadic::from_probability(self.p);
        let big_n = self.machines() as u32;
        let num = &self.subsets[f]
            * d.numerator.pow(f as u32)
            * d.complement_numerator().pow(big_n - f as u32);
        Ok(ratio_to_f64(&num, &(d.denominator().pow(big_n))))
    }

    pub fn prob_data_loss(&self, method: LossMethod) -> LossResult {
        match method {
            LossMethod::ExactBigint => self.exact(),
            LossMethod::LogDomain => self.log_domain(),
            LossMethod::ClosedForm => LossResult {
                p_loss: closed_form_loss(self.n, self.p),
                method,
                per_f_terms: None,
            },
        }
    }

    /// `p = m / 2^e` exactly, so every term is an integer over `2^{eN}`.
    fn exact(&self) -> LossResult {
        let big_n = self.machines();
        let d = Dyadic::from_probability(self.p);
        let q = d.complement_numerator();
        let denominator = d.denominator().pow(big_n as u32);

        let mut p_pow = Vec::with_capacity(big_n + 1);
        let mut q_pow = Vec::with_capacity(big_n + 1);
        p_pow.push(BigUint::from(1u32));
        q_pow.push(BigUint::from(1u32));
        for k in 0..big_n {
            p_pow.push(&p_pow[k] * &d.numerator);
            q_pow.push(&q_pow[k] * &q);
        }

        let numerators: Vec<BigUint> = (0..=big_n)
            .into_par_iter()
            .map(|f| self.fatal(f) * &p_pow[f] * &q_pow[big_n - f])
            .collect();
        let total: BigUint = numerators.iter().sum();
        LossResult {
            p_loss: ratio_to_f64(&total, &denominator),
            method: LossMethod::ExactBigint,
            per_f_terms: Some(
                numerators
                    .par_iter()
                    .map(|num| ratio_to_f64(num, &denominator))
                    .collect(),
            ),
        }
    }

    fn log_domain(&self) -> LossResult {
        let big_n = self.machines();
        let method = LossMethod::LogDomain;
        if self.p == 0.0 || self.p == 1.0 {
            let mut terms = vec![0.0; big_n + 1];
            let p_loss = if self.p == 1.0 { 1.0 } else { 0.0 };
            terms[if self.p == 1.0 { big_n } else { 0 }] = p_loss;
            return LossResult { p_loss, method, per_f_terms: Some(terms) };
        }
        let ln_p = self.p.ln();
        let ln_q = (-self.p).ln_1p();
        let logs: Vec<Option<f64>> = (0..=big_n)
            .map(|f| {
                let fatal = self.fatal(f);
                (fatal != BigUint::default())
                    .then(|| ln_biguint(&fatal) + f as f64 * ln_p + (big_n - f) as f64 * ln_q)
            })
            .collect();
        let Some(peak) = logs.iter().flatten().copied().reduce(f64::max) else {
            return LossResult { p_loss: 0.0, method, per_f_terms: Some(vec![0.0; big_n + 1]) };
        };
        let scaled = neumaier_sum(logs.iter().flatten().map(|l| (l - peak).exp()));
        LossResult {
            p_loss: (peak.exp() * scaled).min(1.0),
            method,
            per_f_terms: Some(logs.iter().map(|l| l.map_or(0.0, f64::exp)).collect()),
        }
    }
}

fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `1 − (1 − p³ − p⁴ + p⁷)^n`: one minus the chance that no group loses all
/// three user machines or all four owner machines.
pub fn closed_form_loss(n: usize, p: f64) -> f64 {
    let group_loss = p.powi(3) + p.powi(4) - p.powi(7);
    -(n as f64 * (-group_loss).ln_1p()).exp_m1()
}

pub fn prob_no_loss(n: usize, f: usize) -> Result<f64> {
    LossModel::new(n, 0.0)?.prob_no_loss(f)
}

pub fn prob_f_failures(n: usize, f: usize, p: f64) -> Result<f64> {
    LossModel::new(n, p)?.prob_f_failures(f)
}

pub fn prob_data_loss(n: usize, p: f64, method: LossMethod) -> Result<LossResult> {
    if method == LossMethod::ClosedForm {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be >= 1".into()));
        }
        check_probability(p)?;
        return Ok(LossResult {
            p_loss: closed_form_loss(n, p),
            method,
            per_f_terms: None,
        });
    }
    Ok(LossModel::new(n, p)?.prob_data_loss(method))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossCurveRow {
    pub n: usize,
    pub p: f64,
    pub p_loss_exact: f64,
    pub p_loss_closed_form: f64,
}

/// Exact and closed-form loss for each `n`, in input order.
pub fn loss_curve(n_list: &[usize], p: f64) -> Result<Vec<LossCurveRow>> {
    if n_list.is_empty() {
        return Err(Error::InvalidArgument("n_list must not be empty".into()));
    }
    check_probability(p)?;
    n_list
        .par_iter()
        .map(|&n| {
            Ok(LossCurveRow {
                n,
                p,
                p_loss_exact: prob_data_loss(n, p, LossMethod::ExactBigint)?.p_loss,
                p_loss_closed_form: closed_form_loss(n, p),
            })
        })
        .collect()
}

/// `C(7n, f)` as a float, for reporting.
pub fn subsets(n: usize, f: usize) -> f64 {
    ratio_to_f64(&binomial(7 * n as u64, f as u64), &BigUint::from(1u32))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        if a == b {
            0.0
        } else {
            (a - b).abs() / a.abs().max(b.abs())
        }
    }

    #[test]
    fn no_loss_for_one_or_two_failures() {
        for n in 1..=8 {
            assert_eq!(prob_no_loss(n, 1).unwrap(), 1.0);
            assert_eq!(prob_no_loss(n, 2).unwrap(), 1.0);
        }
    }

    #[test]
    fn no_loss_hand_values() {
        assert_eq!(prob_no_loss(3, 3).unwrap(), 1327.0 / 1330.0);
        assert_eq!(prob_no_loss(3, 0).unwrap(), 1.0);
        assert_eq!(prob_no_loss(3, 16).unwrap(), 0.0);
        assert_eq!(prob_no_loss(3, 21).unwrap(), 0.0);
        assert!(prob_no_loss(3, 22).is_err());
    }

    #[test]
    fn failure_count_probabilities() {
        assert_eq!(prob_f_failures(3, 0, 0.0).unwrap(), 1.0);
        assert_eq!(prob_f_failures(3, 4, 0.0).unwrap(), 0.0);
        assert_eq!(prob_f_failures(3, 0, 0.5).unwrap(), 0.5f64.powi(21));
        assert_eq!(prob_f_failures(3, 21, 1.0).unwrap(), 1.0);
        let total: f64 = (0..=70).map(|f| prob_f_failures(10, f, 0.01).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-14);
        assert!(prob_f_failures(3, 1, 1.5).is_err());
    }

    #[test]
    fn boundary_probabilities() {
        for method in [LossMethod::ExactBigint, LossMethod::LogDomain, LossMethod::ClosedForm] {
            for n in [1, 3, 10] {
                assert_eq!(prob_data_loss(n, 0.0, method).unwrap().p_loss, 0.0, "{method:?}");
                assert_eq!(prob_data_loss(n, 1.0, method).unwrap().p_loss, 1.0, "{method:?}");
            }
        }
    }

    #[test]
    fn terms_vanish_below_three_failures() {
        let r = prob_data_loss(10, 0.2, LossMethod::ExactBigint).unwrap();
        let terms = r.per_f_terms.unwrap();
        assert_eq!(terms.len(), 71);
        assert_eq!(&terms[..3], &[0.0, 0.0, 0.0]);
        assert!(terms[3] > 0.0);
        let sum: f64 = terms.iter().sum();
        assert!(rel(sum, r.p_loss) < 1e-13);
    }

    #[test]
    fn methods_agree() {
        for n in [1, 3, 10, 40] {
            for p in [0.01, 0.1, 0.37, 0.9] {
                let exact = prob_data_loss(n, p, LossMethod::ExactBigint).unwrap().p_loss;
                let closed = prob_data_loss(n, p, LossMethod::ClosedForm).unwrap().p_loss;
                let logd = prob_data_loss(n, p, LossMethod::LogDomain).unwrap().p_loss;
                assert!(rel(exact, closed) < 1e-12, "n={n} p={p}: {exact} vs {closed}");
                assert!(rel(exact, logd) < 1e-10, "n={n} p={p}: {exact} vs {logd}");
            }
        }
    }

    #[test]
    fn monotone_in_p() {
        for n in [3, 10] {
            let curve: Vec<f64> = (0..=100)
                .map(|k| prob_data_loss(n, k as f64 / 100.0, LossMethod::ExactBigint).unwrap().p_loss)
                .collect();
            assert!(curve.windows(2).all(|w| w[0] <= w[1]), "n={n}");
        }
    }

    #[test]
    fn curve_rows() {
        let rows = loss_curve(&[10, 20, 40], 0.01).unwrap();
        assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), [10, 20, 40]);
        assert!(rows.windows(2).all(|w| w[0].p_loss_exact <= w[1].p_loss_exact));
        let single = loss_curve(&[10], 0.01).unwrap();
        assert_eq!(single[0].p_loss_exact, prob_data_loss(10, 0.01, LossMethod::ExactBigint).unwrap().p_loss);
        assert!(loss_curve(&[10, 20], 0.0).unwrap().iter().all(|r| r.p_loss_exact == 0.0));
        assert!(loss_curve(&[], 0.01).is_err());
    }

    #[test]
    fn method_names() {
        assert_eq!("log-domain".parse::<LossMethod>().unwrap(), LossMethod::LogDomain);
        assert!("fast".parse::<LossMethod>().is_err());
    }
}
