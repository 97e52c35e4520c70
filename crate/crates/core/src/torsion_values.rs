//! Finite Δ-value sets attached to torsion: valuations of annihilator elements
//! and of solutions of m·q = n, assembled from a linear factorization.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::ore_poly::OrePoly;
use crate::rat::Rat;
use crate::series_field::SeriesElem;
use crate::solve::{factor_linear, solve_affine, Factorization, LinearFactor, SolveError, SolveOpts};
use crate::value_geometry::{tau_minus_one_inv, upsilon, DeltaPoint, ValueProfile};

/// Which linear factors have a nontrivial annihilator in the model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnnPattern {
    /// Every factor t − a with a ≠ 0 and every t·b − 1 (separably closed field, T_tor).
    All,
    /// Torsion-free modules.
    Trivial,
    /// Per linear factor, in factorization order.
    List(Vec<bool>),
}

impl AnnPattern {
    fn allows(&self, idx: usize) -> bool {
        match self {
            AnnPattern::All => true,
            AnnPattern::Trivial => false,
            AnnPattern::List(l) => l.get(idx).copied().unwrap_or(false),
        }
    }
}

/// Outcome of the one-factor case analysis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LinearDiv {
    /// Valuation of the distinguished solution m₀.
    pub upsilon: DeltaPoint,
    /// Valuation of every other solution, present when it differs from `upsilon`.
    pub ann: Option<DeltaPoint>,
    pub case: &'static str,
}

fn factor_val(f: &SeriesElem) -> Result<DeltaPoint, SolveError> {
    Ok(f.v()?)
}

fn factor_profile(fac: &LinearFactor) -> Result<Option<ValueProfile>, SolveError> {
    let p = fac.payload().p();
    Ok(match fac {
        LinearFactor::MonicRoot(a) => Some(ValueProfile::new(p, vec![factor_val(a)?.finite().cloned(), Some(Rat::zero())])),
        LinearFactor::UnitRoot(b) => Some(ValueProfile::new(p, vec![Some(Rat::zero()), factor_val(b)?.finite().cloned()])),
        LinearFactor::Constant(_) => None,
    })
}

/// The unique valuation of a nonzero annihilator element, if one can exist.
pub fn linear_ann_value(fac: &LinearFactor) -> Result<Option<DeltaPoint>, SolveError> {
    let p = fac.payload().p();
    Ok(match fac {
        LinearFactor::MonicRoot(a) => match factor_val(a)? {
            DeltaPoint::Fin(va) => Some(DeltaPoint::Fin(tau_minus_one_inv(p, &va))),
            DeltaPoint::Inf => None,
        },
        LinearFactor::UnitRoot(b) => match factor_val(b)? {
            DeltaPoint::Fin(vb) => Some(DeltaPoint::Fin(tau_minus_one_inv(p, &-vb))),
            DeltaPoint::Inf => None,
        },
        LinearFactor::Constant(_) => None,
    })
}

/// Case analysis for m·r = n with w(n) = δ and r linear.
pub fn linear_div_cases(fac: &LinearFactor, delta: &Rat) -> Result<LinearDiv, SolveError> {
    let d = DeltaPoint::Fin(delta.clone());
    let Some(prof) = factor_profile(fac)? else {
        let vc = factor_val(fac.payload())?;
        let up = match vc {
            DeltaPoint::Fin(c) => DeltaPoint::Fin(delta - &c),
            DeltaPoint::Inf => return Err(SolveError::Zero),
        };
        return Ok(LinearDiv { upsilon: up, ann: None, case: "const" });
    };
    let up = upsilon(&prof, &d).expect("linear profile is nonzero").0;
    let rho = linear_ann_value(fac)?;
    let Some(rho) = rho else {
        return Ok(LinearDiv { upsilon: up, ann: None, case: "t" });
    };
    let rho_r = rho.finite().unwrap().clone();
    let case = match fac {
        LinearFactor::UnitRoot(_) => match delta.cmp(&rho_r) {
            std::cmp::Ordering::Greater => "i",
            std::cmp::Ordering::Less => "ii",
            std::cmp::Ordering::Equal => "iii",
        },
        LinearFactor::MonicRoot(a) => {
            let va = factor_val(a)?.finite().unwrap().clone();
            let top = &rho_r + &va;
            if *delta < rho_r {
                "ii"
            } else if *delta == rho_r && va.is_positive() {
                "iii"
            } else if *delta < top {
                "ia"
            } else if *delta == top {
                "ic"
            } else {
                "ib"
            }
        }
        LinearFactor::Constant(_) => unreachable!(),
    };
    // other solutions differ by an annihilator element; it shows when strictly smaller
    let ann = if rho < up { Some(rho) } else { None };
    Ok(LinearDiv { upsilon: up, ann, case })
}

/// Valuations of all m with m·r = n, w(n) = δ.
pub fn linear_div_values(fac: &LinearFactor, delta: &Rat, ann_nontrivial: bool) -> Result<Vec<DeltaPoint>, SolveError> {
    let c = linear_div_cases(fac, delta)?;
    let mut out = vec![c.upsilon];
    if ann_nontrivial {
        out.extend(c.ann);
    }
    out.sort();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Step {
    pub factor: usize,
    pub case: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValueEntry {
    pub value: DeltaPoint,
    /// Factor indices and case labels, innermost first.
    pub chain: Vec<Step>,
    /// Linear factors whose annihilator must be nontrivial for this value to occur.
    pub requires: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValueSet {
    pub values: Vec<DeltaPoint>,
    /// Every conditional value, including those excluded by the pattern.
    pub entries: Vec<ValueEntry>,
    pub factors: Vec<String>,
    pub defect: Option<String>,
}

impl ValueSet {
    fn from_entries(entries: Vec<ValueEntry>, pattern: &AnnPattern, factors: &Factorization) -> ValueSet {
        let values: BTreeSet<DeltaPoint> =
            entries.iter().filter(|e| e.requires.iter().all(|&i| pattern.allows(i))).map(|e| e.value.clone()).collect();
        ValueSet {
            values: values.into_iter().collect(),
            entries,
            factors: factors.factors.iter().map(|f| f.to_string()).collect(),
            defect: None,
        }
    }

    fn defective(msg: String) -> ValueSet {
        ValueSet { values: vec![], entries: vec![], factors: vec![], defect: Some(msg) }
    }
}

fn partial(e: SolveError) -> Result<ValueSet, SolveError> {
    match e {
        SolveError::Defect(_) | SolveError::Stalled(_) | SolveError::FactorCheck(_) | SolveError::ExtensionCap(_) => {
            Ok(ValueSet::defective(e.to_string()))
        }
        e => Err(e),
    }
}

fn linear_count(fz: &Factorization) -> usize {
    fz.factors.iter().filter(|f| !matches!(f, LinearFactor::Constant(_))).count()
}

/// Entries for ann(f_i ⋯ f_k) from the factorization, with conditions.
fn ann_entries(fz: &Factorization, i: usize) -> Result<Vec<ValueEntry>, SolveError> {
    let k = linear_count(fz);
    if i >= k {
        return Ok(vec![]);
    }
    let fac = &fz.factors[i];
    let mut out = vec![];
    if let Some(rho) = linear_ann_value(fac)? {
        out.push(ValueEntry { value: rho, chain: vec![Step { factor: i, case: "ann" }], requires: vec![i] });
    }
    for inner in ann_entries(fz, i + 1)? {
        let Some(d) = inner.value.finite() else { continue };
        let c = linear_div_cases(fac, d)?;
        let mut chain = inner.chain.clone();
        chain.push(Step { factor: i, case: c.case });
        out.push(ValueEntry { value: c.upsilon.clone(), chain: chain.clone(), requires: inner.requires.clone() });
        if let Some(a) = c.ann {
            let mut req = inner.requires.clone();
            req.push(i);
            req.sort();
            req.dedup();
            out.push(ValueEntry { value: a, chain, requires: req });
        }
    }
    Ok(out)
}

/// Entries for solutions of m·(f_0 ⋯ f_{j−1}) = n' with w(n') = δ.
fn div_entries(fz: &Factorization, j: usize, delta: &Rat, chain: Vec<Step>, requires: Vec<usize>) -> Result<Vec<ValueEntry>, SolveError> {
    if j == 0 {
        return Ok(vec![ValueEntry { value: DeltaPoint::Fin(delta.clone()), chain, requires }]);
    }
    let fac = &fz.factors[j - 1];
    let c = linear_div_cases(fac, delta)?;
    let mut out = vec![];
    let mut ch = chain.clone();
    ch.push(Step { factor: j - 1, case: c.case });
    out.extend(div_entries(fz, j - 1, c.upsilon.finite().unwrap(), ch.clone(), requires.clone())?);
    if let Some(a) = c.ann {
        let mut req = requires;
        req.push(j - 1);
        req.sort();
        req.dedup();
        out.extend(div_entries(fz, j - 1, a.finite().unwrap(), ch, req)?);
    }
    Ok(out)
}

/// Possible valuations of nonzero elements of ann(q).
pub fn ann_value_set(q: &OrePoly, precision: &Rat, pattern: &AnnPattern) -> Result<ValueSet, SolveError> {
    let fz = match factor_linear(q, precision) {
        Ok(f) => f,
        Err(e) => return partial(e),
    };
    let vs = ValueSet::from_entries(ann_entries(&fz, 0)?, pattern, &fz);
    let d = linear_count(&fz);
    assert!(d == 0 || vs.values.len() <= 1 << (d - 1), "annihilator value bound violated");
    Ok(vs)
}

/// Possible valuations of m with m·q = n, given w(n) = δ.
pub fn div_value_set(q: &OrePoly, delta: &Rat, precision: &Rat, pattern: &AnnPattern) -> Result<ValueSet, SolveError> {
    let fz = match factor_linear(q, precision) {
        Ok(f) => f,
        Err(e) => return partial(e),
    };
    let k = linear_count(&fz);
    // the trailing unit constant shifts by v(c) = 0
    let cval = match fz.factors.last() {
        Some(LinearFactor::Constant(c)) => c.v()?.finite().cloned().unwrap_or_else(Rat::zero),
        _ => Rat::zero(),
    };
    let d0 = delta - &cval;
    let vs = ValueSet::from_entries(div_entries(&fz, k, &d0, vec![], vec![])?, pattern, &fz);
    assert!(vs.values.len() <= 1 << k, "division value bound violated");
    Ok(vs)
}

/// Valuations actually realized by solutions of m·q = n (n = 0 gives the nonzero
/// annihilator), found by enumerating all solutions to the given precision.
/// Returns None when some solution could not be isolated well enough.
pub fn observed_values(q: &OrePoly, n: &SeriesElem, precision: &Rat) -> Result<Option<Vec<(DeltaPoint, SeriesElem)>>, SolveError> {
    let rs = solve_affine(q, n, &SolveOpts::new(precision.clone()))?;
    let mut out: Vec<(DeltaPoint, SeriesElem)> = vec![];
    for b in &rs.balls {
        let v = b.center.v_lb();
        if b.mult == 1 && b.radius.is_inf() && v.is_inf() {
            continue; // the zero solution
        }
        if b.mult > 1 || b.radius <= v {
            return Ok(None);
        }
        if !out.iter().any(|(w, _)| *w == v) {
            out.push((v, b.root()));
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(Some(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff_field::FiniteField;
    use crate::series_field::Lattice;
    use crate::text::Ctx;

    fn ctx(p: u32, k: u32) -> Ctx {
        Ctx::new(FiniteField::get(p, k).unwrap(), Lattice::Full)
    }

    fn fin(s: &str) -> DeltaPoint {
        s.parse().unwrap()
    }

    /// Solution valuations. When exponents accumulate the solver returns one
    /// ball holding several solutions; a radius above the center's valuation
    /// still pins the valuation of everything inside.
    fn solution_values(q: &OrePoly, n: &SeriesElem, prec: i64) -> Vec<DeltaPoint> {
        if let Some(o) = observed_values(q, n, &Rat::int(prec)).unwrap() {
            return o.into_iter().map(|x| x.0).collect();
        }
        let rs = solve_affine(q, n, &SolveOpts::new(Rat::int(prec))).unwrap();
        let mut vs: Vec<DeltaPoint> = rs
            .balls
            .iter()
            .filter(|b| !(b.radius.is_inf() && b.center.is_zero()))
            .map(|b| {
                let v = b.center.v_lb();
                assert!(b.radius > v, "ball {} of radius {} does not fix the valuation", b.center, b.radius);
                v
            })
            .collect();
        vs.sort();
        vs.dedup();
        vs
    }

    #[test]
    fn linear_ann_examples() {
        let c = ctx(2, 1);
        let t = |s: &str| c.parse_series(s).unwrap();
        assert_eq!(linear_ann_value(&LinearFactor::MonicRoot(t("T"))).unwrap(), Some(fin("1")));
        assert_eq!(linear_ann_value(&LinearFactor::UnitRoot(t("T"))).unwrap(), Some(fin("-1")));
        let c3 = ctx(3, 1);
        assert_eq!(linear_ann_value(&LinearFactor::MonicRoot(c3.parse_series("1").unwrap())).unwrap(), Some(fin("0")));
    }

    #[test]
    fn linear_div_examples() {
        let c = ctx(2, 1);
        let b = LinearFactor::UnitRoot(c.parse_series("T").unwrap());
        assert_eq!(linear_div_values(&b, &Rat::zero(), true).unwrap(), vec![fin("-1"), fin("0")]);
        assert_eq!(linear_div_cases(&b, &Rat::zero()).unwrap().case, "i");
        assert_eq!(linear_div_values(&b, &Rat::int(-2), true).unwrap(), vec![fin("-3/2")]);
        let a = LinearFactor::MonicRoot(c.parse_series("T").unwrap());
        assert_eq!(linear_div_values(&a, &Rat::int(2), false).unwrap(), vec![fin("1")]);
        assert_eq!(linear_div_cases(&a, &Rat::int(2)).unwrap().case, "ic");
    }

    #[test]
    fn linear_div_matches_brute_force() {
        // every case label of both factor shapes, against all solutions
        let c = ctx(2, 1);
        for (poly, fac) in [("t*T - 1", LinearFactor::UnitRoot(c.parse_series("T").unwrap())), ("t - T^2", LinearFactor::MonicRoot(c.parse_series("T^2").unwrap()))] {
            let q = c.parse_ore(poly).unwrap();
            for d in ["-3", "-1", "-1/2", "1", "2", "3", "4", "5", "7"] {
                let delta: Rat = d.parse().unwrap();
                let n = SeriesElem::t_pow(&c.field, Lattice::Full, delta.clone());
                let obs = solution_values(&q, &n, 16);
                assert_eq!(linear_div_values(&fac, &delta, true).unwrap(), obs, "{} at {}", poly, d);
            }
        }
    }

    #[test]
    fn ann_sets() {
        let c = ctx(2, 1);
        let q = c.parse_ore("t - T").unwrap();
        assert_eq!(ann_value_set(&q, &Rat::int(8), &AnnPattern::All).unwrap().values, vec![fin("1")]);
        let c4 = ctx(2, 2);
        let q = c4.parse_ore("t^2 - 1").unwrap();
        assert_eq!(ann_value_set(&q, &Rat::int(8), &AnnPattern::All).unwrap().values, vec![fin("0")]);
        assert!(ann_value_set(&q, &Rat::int(8), &AnnPattern::Trivial).unwrap().values.is_empty());
    }

    #[test]
    fn mixed_degree_two_against_search() {
        let c = ctx(2, 2);
        let q = c.parse_ore("(t - T)*(t - T^3)").unwrap();
        let vs = ann_value_set(&q, &Rat::int(12), &AnnPattern::All).unwrap();
        assert!(vs.values.len() <= 2);
        let zero = SeriesElem::zero(&c.field, Lattice::Full);
        let obs = solution_values(&q, &zero, 12);
        assert_eq!(vs.values, obs);
        for d in ["-2", "0", "1", "3", "5", "9"] {
            let delta: Rat = d.parse().unwrap();
            let g = div_value_set(&q, &delta, &Rat::int(12), &AnnPattern::All).unwrap();
            let n = SeriesElem::t_pow(&c.field, Lattice::Full, delta.clone()).add(&SeriesElem::t_pow(&c.field, Lattice::Full, &delta + &Rat::new(1, 3)));
            let obs = solution_values(&q, &n, 14);
            assert_eq!(g.values, obs, "δ = {}", d);
        }
    }
}
