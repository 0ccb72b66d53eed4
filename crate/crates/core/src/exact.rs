//! Double-double evaluation of small rational expressions.
//!
//! Numerators and denominators of the form `a + b·c` are held exactly as
//! unevaluated sums, and the quotient is rounded once. Rounding is monotone,
//! so an inequality between two exact quotients survives in the results.

/// Unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct TwoFloat {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> TwoFloat {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    TwoFloat { hi: s, lo: err }
}

fn two_prod(a: f64, b: f64) -> TwoFloat {
    let p = a * b;
    TwoFloat {
        hi: p,
        lo: a.mul_add(b, -p),
    }
}

impl TwoFloat {
    /// `a + b·c`, exact up to a relative `2⁻¹⁰⁵`.
    pub(crate) fn affine(a: f64, b: f64, c: f64) -> Self {
        let p = two_prod(b, c);
        let s = two_sum(a, p.hi);
        two_sum(s.hi, s.lo + p.lo)
    }

    /// `num / den` rounded to the nearest double.
    pub(crate) fn ratio(num: Self, den: Self) -> f64 {
        let q1 = num.hi / den.hi;
        if !q1.is_finite() || q1 == 0.0 && num.hi == 0.0 && num.lo == 0.0 {
            return q1;
        }
        let t = two_prod(q1, den.hi);
        let r = ((num.hi - t.hi) - t.lo) + num.lo - q1 * den.lo;
        q1 + r / den.hi
    }
}

/// `(a + b·c)/(d + e·f)`, rounded once.
pub(crate) fn affine_ratio(a: f64, b: f64, c: f64, d: f64, e: f64, f: f64) -> f64 {
    TwoFloat::ratio(TwoFloat::affine(a, b, c), TwoFloat::affine(d, e, f))
}
