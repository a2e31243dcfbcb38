//! Operator-level verdicts: degree, tameness diagnostics and the
//! diffeomorphism / fold / cusp cascade for autonomous polynomials.

use serde::{Deserialize, Serialize};

use super::hull::{hull_origin_test, GammaCurve, HullVerdict, Verdict};
use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;
use crate::poly;

/// `(sgn_+ - sgn_-) / 2` from the uniform sign of `f(t, +-X)`.
pub fn degree(f: &Nonlinearity) -> Result<i32> {
    if let Some(p) = f.poly_coeffs() {
        let (plus, minus) = poly::limit_signs(&p);
        if plus == 0.0 || poly::degree(&p) == 0 {
            return Err(Error::PropernessUndetermined { end: "+" });
        }
        return Ok(((plus - minus) / 2.0) as i32);
    }
    let plus = uniform_sign(f, 1.0)?;
    let minus = uniform_sign(f, -1.0)?;
    Ok((plus - minus) / 2)
}

fn uniform_sign(f: &Nonlinearity, dir: f64) -> Result<i32> {
    let end = if dir > 0.0 { "+" } else { "-" };
    let mut sign = 0;
    for radius in [1e2, 1e3, 1e4] {
        let x = dir * radius;
        let signs: Vec<i32> = (0..64)
            .map(|i| {
                let v = f.at_time(i as f64 / 64.0).value(x);
                if v > 0.0 {
                    1
                } else if v < 0.0 {
                    -1
                } else {
                    0
                }
            })
            .collect();
        if signs.iter().any(|&s| s == 0 || s != signs[0]) {
            return Err(Error::PropernessUndetermined { end });
        }
        if sign != 0 && sign != signs[0] {
            return Err(Error::PropernessUndetermined { end });
        }
        sign = signs[0];
    }
    Ok(sign)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailBehavior {
    Converging,
    Diverging,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndReport {
    /// `int_0^S ds / max(1, sup_t f(t, +-s))`.
    pub integral_pos: f64,
    /// `int_0^S ds / max(1, sup_t -f(t, +-s))`.
    pub integral_neg: f64,
    pub tail_pos: TailBehavior,
    pub tail_neg: TailBehavior,
    pub wild_suspected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TamenessReport {
    pub plus: EndReport,
    pub minus: EndReport,
    pub tame: bool,
    pub s_max: f64,
}

/// Finite-range diagnostic for the two wildness integrals at each end.
pub fn tameness(f: &Nonlinearity, s_max: f64, probe_times: usize) -> Result<TamenessReport> {
    if !(s_max >= 10.0) {
        return Err(Error::InvalidInput(format!("S_max must be at least 10, got {s_max}")));
    }
    let times: Vec<f64> = if f.is_autonomous() {
        vec![0.0]
    } else {
        (0..probe_times.max(8)).map(|i| i as f64 / probe_times.max(8) as f64).collect()
    };
    let slices: Vec<_> = times.iter().map(|&t| f.at_time(t)).collect();
    let end = |dir: f64| -> EndReport {
        let m = 4000;
        let ss: Vec<f64> = (0..=m).map(|i| s_max * i as f64 / m as f64).collect();
        let sup = |x: f64, sgn: f64| {
            slices
                .iter()
                .map(|s| sgn * s.value(x))
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let integrand = |sgn: f64| -> Vec<f64> {
            ss.iter().map(|&s| 1.0 / sup(dir * s, sgn).max(1.0)).collect()
        };
        let (gp, gn) = (integrand(1.0), integrand(-1.0));
        let trap = |g: &[f64]| {
            let h = s_max / m as f64;
            h * (g.iter().sum::<f64>() - 0.5 * (g[0] + g[m]))
        };
        let (tail_pos, tail_neg) = (tail(&ss, &gp), tail(&ss, &gn));
        EndReport {
            integral_pos: trap(&gp),
            integral_neg: trap(&gn),
            tail_pos,
            tail_neg,
            wild_suspected: tail_pos == TailBehavior::Converging && tail_neg == TailBehavior::Converging,
        }
    };
    let plus = end(1.0);
    let minus = end(-1.0);
    let tame = f.is_autonomous() || !(plus.wild_suspected || minus.wild_suspected);
    Ok(TamenessReport {
        plus,
        minus,
        tame,
        s_max,
    })
}

/// Fits `log g` against `log s` on the last three quarters of the tail; a
/// decay faster than `s^-1.1` counts as convergent.
fn tail(ss: &[f64], g: &[f64]) -> TailBehavior {
    let n = ss.len();
    let start = n / 4;
    let pts: Vec<(f64, f64)> = (start..n)
        .filter(|&i| ss[i] > 0.0 && g[i] > 0.0)
        .map(|i| (ss[i].ln(), g[i].ln()))
        .collect();
    if pts.len() < 2 {
        return TailBehavior::Converging;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (num, den) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    let slope = num / den;
    if slope < -1.1 {
        TailBehavior::Converging
    } else {
        TailBehavior::Diverging
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorClass {
    Diffeomorphism,
    GlobalFold,
    GlobalCusp,
    HasHigherSingularities,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignClaim {
    Positive,
    Negative,
    NonNegative,
    NonPositive,
    BothSigns,
}

/// Checkable sign statement about a derivative of `f` on the whole line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignCertificate {
    pub function: String,
    /// Increasing-power coefficients of the polynomial the claim is about.
    pub coeffs: Vec<f64>,
    pub claim: SignClaim,
    /// Real roots (for definite claims) or the two sign witnesses.
    pub witness_points: Vec<f64>,
    /// Global extremum value backing a (semi)definite claim.
    pub extremum: Option<f64>,
}

impl SignCertificate {
    fn new(name: &str, p: &[f64]) -> Self {
        let p = poly::trim(p);
        let roots = poly::real_roots(&p);
        let scale = p.iter().fold(0.0f64, |m, c| m.max(c.abs())).max(1e-300);
        let (plus, _) = poly::limit_signs(&p);
        let deg = poly::degree(&p);
        let lo = poly::global_min(&p).map(|m| m.0);
        let hi = poly::global_min(&p.iter().map(|c| -c).collect::<Vec<_>>()).map(|m| -m.0);
        let tol = 1e-12 * scale;
        let (claim, witness, extremum) = if deg == 0 && p[0] > 0.0 || roots.is_empty() && plus > 0.0 {
            (SignClaim::Positive, roots, lo)
        } else if deg == 0 && p[0] < 0.0 || roots.is_empty() && plus < 0.0 {
            (SignClaim::Negative, roots, hi)
        } else if lo.is_some_and(|m| m >= -tol) {
            (SignClaim::NonNegative, roots, lo)
        } else if hi.is_some_and(|m| m <= tol) {
            (SignClaim::NonPositive, roots, hi)
        } else {
            // both signs: pick the global extremum side and a far point
            let far = 2.0 * poly::root_bound(&p).max(1.0);
            let pts = [far, -far]
                .into_iter()
                .chain(roots.iter().map(|r| r + 1e-3))
                .chain(roots.iter().map(|r| r - 1e-3))
                .collect::<Vec<_>>();
            let neg = pts.iter().copied().find(|&x| poly::eval(&p, x) < 0.0);
            let pos = pts.iter().copied().find(|&x| poly::eval(&p, x) > 0.0);
            (
                SignClaim::BothSigns,
                neg.into_iter().chain(pos).collect(),
                None,
            )
        };
        Self {
            function: name.to_string(),
            coeffs: p,
            claim,
            witness_points: witness,
            extremum,
        }
    }

    /// Recomputes the claim from the coefficients.
    pub fn verify(&self) -> bool {
        let p = &self.coeffs;
        let scale = p.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let tol = 1e-12 * scale;
        match self.claim {
            SignClaim::Positive => {
                poly::real_roots(p).is_empty() && poly::eval(p, 0.0) > 0.0
            }
            SignClaim::Negative => {
                poly::real_roots(p).is_empty() && poly::eval(p, 0.0) < 0.0
            }
            SignClaim::NonNegative => poly::global_min(p).is_some_and(|m| m.0 >= -tol),
            SignClaim::NonPositive => {
                let q: Vec<f64> = p.iter().map(|c| -c).collect();
                poly::global_min(&q).is_some_and(|m| m.0 >= -tol)
            }
            SignClaim::BothSigns => {
                self.witness_points.len() == 2
                    && poly::eval(p, self.witness_points[0]) < 0.0
                    && poly::eval(p, self.witness_points[1]) > 0.0
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullRecord {
    pub k: usize,
    pub good: bool,
    pub verdict: HullVerdict,
    pub certificate_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    /// The statement whose hypotheses were verified.
    pub criterion: String,
    pub x_range: (f64, f64),
    pub sign_certificates: Vec<SignCertificate>,
    pub hull_tests: Vec<HullRecord>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorReport {
    pub class: OperatorClass,
    pub evidence: Evidence,
}

/// `k`-good for a polynomial: degree at least `k` and `f', ..., f^(k)` share no real root.
pub fn is_k_good(p: &[f64], k: usize) -> bool {
    if poly::degree(p) < k {
        return false;
    }
    let d1 = poly::derivative(p);
    let roots = poly::real_roots(&d1);
    roots.iter().all(|&x| {
        (1..=k).any(|i| {
            let q = poly::nth_derivative(p, i);
            let scale = q.iter().fold(0.0f64, |m, c| m.max(c.abs())) * (1.0 + x.abs()).powi(poly::degree(&q) as i32);
            poly::eval(&q, x).abs() > 1e-10 * scale
        })
    })
}

/// Default sampling range: covers every real critical point of `f', f'', f'''`.
pub fn default_range(p: &[f64]) -> (f64, f64) {
    let mut r: f64 = 1.0;
    for i in 1..=4 {
        let q = poly::trim(&poly::nth_derivative(p, i));
        if poly::degree(&q) >= 1 {
            for x in poly::real_roots(&q) {
                r = r.max(x.abs());
            }
        }
    }
    (-2.0 * r - 1.0, 2.0 * r + 1.0)
}

const CURVE_SAMPLES: usize = 2001;

/// Decision cascade over the classical criteria for autonomous polynomials.
pub fn classify_operator(f: &Nonlinearity, x_range: Option<(f64, f64)>) -> Result<OperatorReport> {
    let undetermined = |why: &str, range| OperatorReport {
        class: OperatorClass::Undetermined,
        evidence: Evidence {
            criterion: "none".into(),
            x_range: range,
            sign_certificates: vec![],
            hull_tests: vec![],
            notes: vec![why.to_string()],
        },
    };
    let Some(p) = f.poly_coeffs().filter(|_| f.is_polynomial()) else {
        return Ok(undetermined("limit signs unverifiable: not an autonomous polynomial", (0.0, 0.0)));
    };
    let p = poly::trim(&p);
    let range = x_range.unwrap_or_else(|| default_range(&p));
    if poly::degree(&p) == 0 {
        return Ok(undetermined("constant nonlinearity is not proper", range));
    }
    let d1 = poly::derivative(&p);
    let d2 = poly::derivative(&d1);
    let d3 = poly::derivative(&d2);
    let c1 = SignCertificate::new("f'", &d1);
    let c2 = SignCertificate::new("f''", &d2);
    let c3 = SignCertificate::new("f'''", &d3);
    let mut ev = Evidence {
        criterion: String::new(),
        x_range: range,
        sign_certificates: vec![],
        hull_tests: vec![],
        notes: vec![],
    };

    if matches!(c1.claim, SignClaim::Positive | SignClaim::Negative) {
        ev.criterion = "proper f with f' of constant sign: diffeomorphism".into();
        if c1.claim == SignClaim::Negative {
            ev.notes.push("f' < 0 reduces to f' > 0 by time reversal".into());
        }
        ev.sign_certificates.push(c1);
        return Ok(OperatorReport {
            class: OperatorClass::Diffeomorphism,
            evidence: ev,
        });
    }
    if matches!(c2.claim, SignClaim::Positive | SignClaim::Negative) {
        ev.criterion = "proper f with f'' of constant sign: global fold".into();
        ev.sign_certificates.push(c2);
        return Ok(OperatorReport {
            class: OperatorClass::GlobalFold,
            evidence: ev,
        });
    }
    let hull = |k: usize| -> Result<HullRecord> {
        let curve = GammaCurve::sample(f, k, range.0, range.1, CURVE_SAMPLES)?;
        let verdict = hull_origin_test(&curve)?;
        Ok(HullRecord {
            k,
            good: is_k_good(&p, k),
            certificate_residual: verdict.certificate_residual(&curve),
            verdict,
        })
    };
    let cusp_hyp = matches!(c3.claim, SignClaim::NonNegative | SignClaim::NonPositive | SignClaim::Positive | SignClaim::Negative)
        && !poly::is_zero(&d3)
        && c1.claim == SignClaim::BothSigns;
    if cusp_hyp {
        ev.criterion = "proper f, f''' of one sign with isolated roots, f' of both signs: global cusp".into();
        ev.sign_certificates.extend([c3, c1]);
        ev.hull_tests.push(hull(2)?);
        return Ok(OperatorReport {
            class: OperatorClass::GlobalCusp,
            evidence: ev,
        });
    }

    let (plus, minus) = poly::limit_signs(&p);
    let good2 = is_k_good(&p, 2);
    let good3 = is_k_good(&p, 3);
    if plus == minus && good2 && good3 {
        let h2 = hull(2)?;
        ev.sign_certificates.extend([c1.clone(), c2.clone()]);
        if h2.verdict.verdict == Verdict::NotInterior {
            ev.criterion = "2,3-good with equal limits and origin outside the hull of gamma_2: global fold".into();
            ev.hull_tests.push(h2);
            return Ok(OperatorReport {
                class: OperatorClass::GlobalFold,
                evidence: ev,
            });
        }
        ev.hull_tests.push(h2);
        ev.notes.push("origin interior to the hull of gamma_2: the operator has cusps".into());
        for k in 3..=4 {
            let h = hull(k)?;
            let interior = h.good && h.verdict.verdict == Verdict::Interior;
            ev.hull_tests.push(h);
            if interior {
                ev.criterion = format!(
                    "{k}-good with origin interior to the hull of gamma_{k}: singularities of order {k} exist"
                );
                return Ok(OperatorReport {
                    class: OperatorClass::HasHigherSingularities,
                    evidence: ev,
                });
            }
        }
        ev.criterion = "cusps present; higher orders not decided by hull tests".into();
        ev.notes.push("order-4 points may still exist off the simplified strata; try the Gauss-Newton search".into());
        return Ok(OperatorReport {
            class: OperatorClass::Undetermined,
            evidence: ev,
        });
    }
    ev.criterion = "no criterion applies".into();
    ev.notes.push(format!("limits ({plus}, {minus}), 2-good {good2}, 3-good {good3}"));
    Ok(OperatorReport {
        class: OperatorClass::Undetermined,
        evidence: ev,
    })
}

/// `(b-a)(g'(a)+g'(b)) - 2(g(b)-g(a)) + int_a^b (t-a)(t-b) g'''(t) dt`,
/// the integral by composite Simpson.
pub fn integration_by_parts_residual(g: &[f64], a: f64, b: f64) -> f64 {
    let d1 = poly::derivative(g);
    let d3 = poly::nth_derivative(g, 3);
    let panels = 64;
    let h = (b - a) / (2 * panels) as f64;
    let integrand = |t: f64| (t - a) * (t - b) * poly::eval(&d3, t);
    let mut s = integrand(a) + integrand(b);
    for i in 1..2 * panels {
        s += integrand(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let integral = s * h / 3.0;
    (b - a) * (poly::eval(&d1, a) + poly::eval(&d1, b)) - 2.0 * (poly::eval(g, b) - poly::eval(g, a)) + integral
}
