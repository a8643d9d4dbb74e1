//! Symbolic evaluation of the closed-form ergodicity and attractiveness
//! conditions, producing a structured report.
//!
//! Every condition compares two rate expressions: a strict inequality
//! certifies exponential ergodicity, equality certifies ergodicity, and a
//! failed comparison is inconclusive (the conditions are sufficient, never
//! disproving ergodicity). Comparisons are exact on the user-supplied
//! rates; equalities such as `r_c^a = 0` are structural, so no tolerance
//! is applied.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::alphabet::AlphabetOrder;
#[cfg(test)]
use crate::alphabet::OrderId;
use crate::error::Error;
use crate::rates::{derived_constants, DerivedConstants, RnYprParams};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    /// The sufficient condition fails; nothing is disproved.
    Inconclusive,
    /// The condition holds with equality.
    Ergodic,
    /// The condition holds strictly.
    ExponentiallyErgodic,
}

/// Outcome of one condition: the compared sides and the resulting status.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    #[serde(rename = "name")]
    pub condition_name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub status: VerdictStatus,
}

impl Verdict {
    fn compare(name: &str, lhs: f64, rhs: f64) -> Verdict {
        let status = if lhs < rhs {
            VerdictStatus::ExponentiallyErgodic
        } else if lhs == rhs {
            VerdictStatus::Ergodic
        } else {
            VerdictStatus::Inconclusive
        };
        Verdict {
            condition_name: name.to_string(),
            lhs,
            rhs,
            status,
        }
    }

    fn inconclusive(name: &str, lhs: f64, rhs: f64) -> Verdict {
        Verdict {
            condition_name: name.to_string(),
            lhs,
            rhs,
            status: VerdictStatus::Inconclusive,
        }
    }

    pub fn holds(&self) -> bool {
        self.status != VerdictStatus::Inconclusive
    }
}

/// General single-generator condition: `(s - 1) * lambda_bar` against
/// `lambda_bar_0`, applicable only when the minimal substitution rate is
/// positive (`m_positive` supplied by the caller).
pub fn check_general(s: u32, lambda_bar: f64, lambda_bar_0: f64, m_positive: bool) -> Verdict {
    let lhs = (s.saturating_sub(1)) as f64 * lambda_bar;
    if !m_positive {
        return Verdict::inconclusive("general", lhs, lambda_bar_0);
    }
    Verdict::compare("general", lhs, lambda_bar_0)
}

/// Decomposed-generator condition: `sum_i (s_i - 1) * lambda_bar_i`
/// against the decomposed base rate `lambda_bar_0d`, which must be
/// positive for the condition to apply.
pub fn check_decomposed(parts: &[(u32, f64)], lambda_bar_0d: f64) -> Result<Verdict> {
    if parts.is_empty() {
        return Err(Error::InvalidParameter(
            "decomposed condition needs at least one part".into(),
        ));
    }
    let lhs: f64 = parts
        .iter()
        .map(|&(s, lb)| (s.saturating_sub(1)) as f64 * lb)
        .sum();
    if lambda_bar_0d <= 0.0 {
        return Ok(Verdict::inconclusive("decomposed", lhs, lambda_bar_0d));
    }
    Ok(Verdict::compare("decomposed", lhs, lambda_bar_0d))
}

/// RN+YpR condition: `max(cal_y U cal_r)` against `sum_x v_x`, requiring
/// every background rate positive. Coincides with the decomposed condition
/// applied to the model's two-part decomposition.
pub fn check_rnypr(params: &RnYprParams) -> Verdict {
    let d = derived_constants(params);
    let lhs = d.max_y_r();
    let rhs = d.lambda_bar_0;
    if d.m <= 0.0 {
        return Verdict::inconclusive("rnypr", lhs, rhs);
    }
    Verdict::compare("rnypr", lhs, rhs)
}

/// The three stronger conditions obtained from uniform-noise bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongVerdicts {
    /// `(s - 1)(K - m)` against `|A| m`.
    pub general: Verdict,
    /// `sum_i (s_i - 1)(K_i - m_i)` against `|A| sum_i m_i`.
    pub decomposed: Verdict,
    /// `max r_x^y` against `4 min_x v_x`.
    pub rnypr: Verdict,
}

pub fn check_strong_conditions(d: &DerivedConstants) -> StrongVerdicts {
    let alphabet = 4.0;
    let general = if d.m > 0.0 {
        Verdict::compare(
            "strong_general",
            (d.s - 1) as f64 * (d.k - d.m),
            alphabet * d.m,
        )
    } else {
        Verdict::inconclusive(
            "strong_general",
            (d.s - 1) as f64 * (d.k - d.m),
            alphabet * d.m,
        )
    };
    let m_sum: f64 = d.parts.iter().map(|p| p.m).sum();
    let lhs_dec: f64 = d
        .parts
        .iter()
        .map(|p| (p.s.saturating_sub(1)) as f64 * (p.k - p.m))
        .sum();
    let decomposed = if m_sum > 0.0 {
        Verdict::compare("strong_decomposed", lhs_dec, alphabet * m_sum)
    } else {
        Verdict::inconclusive("strong_decomposed", lhs_dec, alphabet * m_sum)
    };
    // the decomposition's part 1 supremum is the largest interaction rate
    let rnypr = if d.m > 0.0 {
        Verdict::compare("strong_rnypr", d.parts[0].k, alphabet * d.m)
    } else {
        Verdict::inconclusive("strong_rnypr", d.parts[0].k, alphabet * d.m)
    };
    StrongVerdicts {
        general,
        decomposed,
        rnypr,
    }
}

/// The eight interaction rates relabeled by rank under an order:
/// `slot(i, j)` is the rate toward the rank-`i` letter with the rank-`j`
/// context letter. Only slots pairing the low class `{1, 2}` with the high
/// class `{3, 4}` exist; the admissible orders never ask for others.
fn rank_slot(params: &RnYprParams, order: &AlphabetOrder, i: u8, j: u8) -> Result<f64> {
    let target = order.letter(i);
    let context = order.letter(j);
    params.ypr_rate(target, context).ok_or_else(|| {
        Error::Internal(format!(
            "order {} maps rank slot r_{i}^{j} to the undefined pair ({target}, {context})",
            order.id()
        ))
    })
}

/// Attractiveness of the substitution model with respect to an admissible
/// order, in rank labels: rates toward the extreme letters must vanish
/// (`r_1^3 = r_1^4 = 0`, `r_4^1 = r_4^2 = 0`) and the middle-letter rates
/// must be monotone (`r_2^3 <= r_2^4`, `r_3^1 >= r_3^2`).
pub fn check_attractiveness(params: &RnYprParams, order: &AlphabetOrder) -> Result<bool> {
    let r_1_3 = rank_slot(params, order, 1, 3)?;
    let r_1_4 = rank_slot(params, order, 1, 4)?;
    let r_2_3 = rank_slot(params, order, 2, 3)?;
    let r_2_4 = rank_slot(params, order, 2, 4)?;
    let r_3_1 = rank_slot(params, order, 3, 1)?;
    let r_3_2 = rank_slot(params, order, 3, 2)?;
    let r_4_1 = rank_slot(params, order, 4, 1)?;
    let r_4_2 = rank_slot(params, order, 4, 2)?;
    Ok(r_1_3 == 0.0
        && r_1_4 == 0.0
        && r_2_3 <= r_2_4
        && r_3_1 >= r_3_2
        && r_4_1 == 0.0
        && r_4_2 == 0.0)
}

/// Vanishing of the coupled measure on the extreme off-diagonal pairs,
/// assuming attractiveness under the order (precondition; violating it is
/// an error, not `false`).
///
/// In rank labels the disjunction reads: `r_3^1 = r_3^2`, or
/// `r_2^4 = r_2^3`, or one of
///
/// * both gaps non-positive: `(r_2^4 - r_2^3) - r_3^1 <= 0` and
///   `(r_3^1 - r_3^2) - r_2^4 <= 0`;
/// * `0 < (r_2^4 - r_2^3) - r_3^1 <= v_2 + v_1 + w_4 + w_3`;
/// * `0 < (r_3^1 - r_3^2) - r_2^4 <= w_2 + w_1 + v_4 + v_3`.
pub fn check_nu_diag(params: &RnYprParams, order: &AlphabetOrder) -> Result<bool> {
    if !check_attractiveness(params, order)? {
        return Err(Error::NotAttractive(order.id()));
    }
    let r_2_3 = rank_slot(params, order, 2, 3)?;
    let r_2_4 = rank_slot(params, order, 2, 4)?;
    let r_3_1 = rank_slot(params, order, 3, 1)?;
    let r_3_2 = rank_slot(params, order, 3, 2)?;
    let v = |rank: u8| params.v(order.letter(rank));
    let w = |rank: u8| params.w(order.letter(rank));

    let cond_a = r_3_1 == r_3_2;
    let cond_b = r_2_4 == r_2_3;
    let gap_low = (r_2_4 - r_2_3) - r_3_1;
    let gap_high = (r_3_1 - r_3_2) - r_2_4;
    let alpha = gap_low <= 0.0;
    let beta = 0.0 < gap_low && gap_low <= v(2) + v(1) + w(4) + w(3);
    let gamma = gap_high <= 0.0;
    let delta = 0.0 < gap_high && gap_high <= w(2) + w(1) + v(4) + v(3);
    let cond_c = (alpha && gamma) || beta || delta;
    Ok(cond_a || cond_b || cond_c)
}

/// Aggregated report over every condition and all eight orders.
/// Deterministic in the parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErgodicityReport {
    pub m_positive: bool,
    pub general: Verdict,
    pub decomposed: Verdict,
    pub rnypr: Verdict,
    pub strong_general: Verdict,
    pub strong_decomposed: Verdict,
    pub strong_rnypr: Verdict,
    pub attractive_orders: BTreeMap<String, bool>,
    /// Present only for orders under which the model is attractive.
    pub nu_diag: BTreeMap<String, bool>,
    pub constants: DerivedConstants,
}

pub fn ergodicity_report(params: &RnYprParams) -> Result<ErgodicityReport> {
    let d = derived_constants(params);
    let m_positive = d.m > 0.0;
    let general = check_general(d.s, d.lambda_bar, d.lambda_bar_0, m_positive);
    let parts: Vec<(u32, f64)> = d.parts.iter().map(|p| (p.s, p.lambda_bar)).collect();
    let decomposed = check_decomposed(&parts, d.lambda_bar_0d)?;
    let rnypr = check_rnypr(params);
    let strong = check_strong_conditions(&d);

    let mut attractive_orders = BTreeMap::new();
    let mut nu_diag = BTreeMap::new();
    for order in AlphabetOrder::all() {
        let attractive = check_attractiveness(params, &order)?;
        attractive_orders.insert(order.id().to_string(), attractive);
        if attractive {
            nu_diag.insert(order.id().to_string(), check_nu_diag(params, &order)?);
        }
    }
    Ok(ErgodicityReport {
        m_positive,
        general,
        decomposed,
        rnypr,
        strong_general: strong.general,
        strong_decomposed: strong.decomposed,
        strong_rnypr: strong.rnypr,
        attractive_orders,
        nu_diag,
        constants: d,
    })
}

impl ErgodicityReport {
    /// The condition records in a stable order.
    pub fn verdicts(&self) -> [&Verdict; 6] {
        [
            &self.general,
            &self.decomposed,
            &self.rnypr,
            &self.strong_general,
            &self.strong_decomposed,
            &self.strong_rnypr,
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rates::{specialize_jc, specialize_rnc, specialize_t92};

    fn order(id: OrderId) -> AlphabetOrder {
        AlphabetOrder::from_id(id)
    }

    #[test]
    fn general_condition_examples() {
        assert_eq!(
            check_general(2, 1.0, 3.0, true).status,
            VerdictStatus::ExponentiallyErgodic
        );
        assert_eq!(
            check_general(2, 3.0, 3.0, true).status,
            VerdictStatus::Ergodic
        );
        assert_eq!(
            check_general(1, 100.0, 0.1, true).status,
            VerdictStatus::ExponentiallyErgodic
        );
        assert_eq!(
            check_general(2, 1.0, 3.0, false).status,
            VerdictStatus::Inconclusive
        );
    }

    #[test]
    fn decomposed_condition_examples() {
        let v = 1.0;
        let r = 3.0;
        // the two-part decomposition applied to JC rates
        let verdict = check_decomposed(&[(2, r), (1, 123.0)], 4.0 * v).unwrap();
        assert_eq!(verdict.status, VerdictStatus::ExponentiallyErgodic);
        let verdict = check_decomposed(&[(1, 50.0)], 0.5).unwrap();
        assert_eq!(verdict.status, VerdictStatus::ExponentiallyErgodic);
        let verdict = check_decomposed(&[(2, 4.0 * v)], 4.0 * v).unwrap();
        assert_eq!(verdict.status, VerdictStatus::Ergodic);
        assert!(check_decomposed(&[], 1.0).is_err());
    }

    #[test]
    fn rnypr_condition_on_jc() {
        let v = 1.25;
        for (r, expected) in [
            (4.0 * v - 0.5, VerdictStatus::ExponentiallyErgodic),
            (4.0 * v, VerdictStatus::Ergodic),
            (4.0 * v + 0.5, VerdictStatus::Inconclusive),
        ] {
            let verdict = check_rnypr(&specialize_jc(v, r).unwrap());
            assert_eq!(verdict.status, expected, "r = {r}");
            assert_eq!(verdict.lhs, r);
            assert_eq!(verdict.rhs, 4.0 * v);
        }
        // a vanishing background rate blocks the conclusion
        let p = specialize_t92(0.0, 1.0, 1.0, 0.1).unwrap();
        assert_eq!(check_rnypr(&p).status, VerdictStatus::Inconclusive);
    }

    #[test]
    fn strong_conditions() {
        let flat = specialize_jc(1.0, 0.0).unwrap();
        let strong = check_strong_conditions(&derived_constants(&flat));
        assert_eq!(strong.general.status, VerdictStatus::ExponentiallyErgodic);
        assert_eq!(strong.general.lhs, 0.0);
        assert_eq!(strong.rnypr.rhs, 4.0);

        // strong form of the interaction condition on JC reads r < 4v
        let jc = specialize_jc(1.5, 2.0).unwrap();
        let strong = check_strong_conditions(&derived_constants(&jc));
        assert_eq!(strong.rnypr.lhs, 2.0);
        assert_eq!(strong.rnypr.rhs, 6.0);
        assert_eq!(strong.rnypr.status, VerdictStatus::ExponentiallyErgodic);
    }

    #[test]
    fn strong_fails_while_interaction_condition_passes() {
        // large within-class rates defeat the uniform-noise bound but not
        // the interaction condition
        let p =
            RnYprParams::new([1.0; 4], [10.0; 4], 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1).unwrap();
        let d = derived_constants(&p);
        let strong = check_strong_conditions(&d);
        assert_eq!(strong.general.status, VerdictStatus::Inconclusive);
        assert_eq!(check_rnypr(&p).status, VerdictStatus::ExponentiallyErgodic);
    }

    #[test]
    fn attractiveness_examples() {
        let t92 = specialize_t92(0.3, 1.0, 2.0, 5.0).unwrap();
        assert!(check_attractiveness(&t92, &order(OrderId::O1)).unwrap());
        assert!(check_attractiveness(&t92, &order(OrderId::O2)).unwrap());
        assert!(!check_attractiveness(&t92, &order(OrderId::O3)).unwrap());

        // pyrimidine-class interactions under the orders whose middle ranks
        // are {c, g}: the rate toward the middle pair must decrease upward
        let rnc = specialize_rnc(1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.7, 0.3).unwrap();
        assert!(check_attractiveness(&rnc, &order(OrderId::O4)).unwrap());
        assert!(check_attractiveness(&rnc, &order(OrderId::O6)).unwrap());
        assert!(!check_attractiveness(&rnc, &order(OrderId::O1)).unwrap());

        let mut bad = t92;
        bad.r_c_a = 0.5;
        assert!(!check_attractiveness(&bad, &order(OrderId::O1)).unwrap());
    }

    #[test]
    fn rank_slots_are_defined_for_all_orders() {
        let p = specialize_jc(1.0, 1.0).unwrap();
        for o in AlphabetOrder::all() {
            for (i, j) in [
                (1, 3),
                (1, 4),
                (2, 3),
                (2, 4),
                (3, 1),
                (3, 2),
                (4, 1),
                (4, 2),
            ] {
                assert!(rank_slot(&p, &o, i, j).is_ok(), "{:?} r_{i}^{j}", o.id());
            }
        }
    }

    #[test]
    fn nu_diag_examples() {
        let t92 = specialize_t92(0.3, 1.0, 2.0, 5.0).unwrap();
        assert!(check_nu_diag(&t92, &order(OrderId::O1)).unwrap());

        let rnc = specialize_rnc(1.0, 1.0, 1.0, 1.0, 0.2, 0.8, 0.0, 0.0).unwrap();
        assert!(check_attractiveness(&rnc, &order(OrderId::O1)).unwrap());
        assert!(check_nu_diag(&rnc, &order(OrderId::O1)).unwrap());

        // equality of the rank-3 slots triggers the first branch
        let p =
            RnYprParams::new([1.0; 4], [2.0; 4], 0.4, 0.4, 0.0, 0.9, 0.0, 0.0, 0.0, 0.0).unwrap();
        assert!(check_attractiveness(&p, &order(OrderId::O1)).unwrap());
        assert!(check_nu_diag(&p, &order(OrderId::O1)).unwrap());

        // precondition violation is an error, not false
        let mut bad = t92;
        bad.r_c_a = 1.0;
        assert!(matches!(
            check_nu_diag(&bad, &order(OrderId::O1)),
            Err(Error::NotAttractive(OrderId::O1))
        ));
    }

    #[test]
    fn report_on_jc() {
        let report = ergodicity_report(&specialize_jc(1.0, 1.0).unwrap()).unwrap();
        assert!(report.m_positive);
        assert_eq!(report.rnypr.status, VerdictStatus::ExponentiallyErgodic);
        for (name, attractive) in &report.attractive_orders {
            let expected = name == "O1" || name == "O2";
            assert_eq!(*attractive, expected, "{name}");
        }
        assert_eq!(report.nu_diag.len(), 2);
        assert!(report.nu_diag.values().all(|&b| b));
    }

    #[test]
    fn report_on_flat_model() {
        // no interactions, equal rates: every condition is satisfied
        let report = ergodicity_report(&specialize_jc(1.0, 0.0).unwrap()).unwrap();
        for verdict in report.verdicts() {
            assert!(verdict.holds(), "{}", verdict.condition_name);
        }
        assert!(report.attractive_orders.values().all(|&b| b));
        assert!(report.nu_diag.values().all(|&b| b));
    }

    #[test]
    fn checker_ignores_kernel() {
        // the report type has no kernel input at all; spot-check that the
        // verdict is a pure function of the parameters
        let p = specialize_t92(0.25, 1.0, 1.5, 0.5).unwrap();
        assert_eq!(
            ergodicity_report(&p).unwrap(),
            ergodicity_report(&p).unwrap()
        );
    }
}
