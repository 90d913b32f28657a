//! The conjugacy between the real-line model and the unit-interval model.
//!
//! `psi` sends `[n, n+1]` (n >= 0) affinely onto `[1 - 2^-n-1, 1 - 2^-n-2]`
//! and `[-n-1, -n]` onto `[2^-n-2, 2^-n-1]`.

use std::collections::BTreeSet;

use crate::pl::{Affine, PlMap};
use crate::rational::Rational;

use super::ThompsonError;

pub fn brown_forward(t: &Rational) -> Rational {
    let one = Rational::one();
    let two = Rational::from_int(2);
    if !t.is_negative() {
        let n = t.floor_i64();
        let u = t - &Rational::from_int(n);
        &one - &(&Rational::pow2(-n - 2) * &(&two - &u))
    } else {
        let n = (-t).floor_i64();
        &Rational::pow2(-n - 2) * &(&two + &(t + &Rational::from_int(n)))
    }
}

pub fn brown_backward(s: &Rational) -> Result<Rational, ThompsonError> {
    if !s.is_positive() || *s >= Rational::one() {
        return Err(ThompsonError::OutsideUnit(s.clone()));
    }
    Ok(psi_inv(s))
}

// caller guarantees 0 < s < 1
fn psi_inv(s: &Rational) -> Rational {
    let half = Rational::new(1, 2);
    if *s >= half {
        let r = &Rational::one() - s;
        let n = (-r.floor_log2() - 2).max(0);
        &Rational::from_int(n + 2) - &(&r * &Rational::pow2(n + 2))
    } else {
        let n = -s.floor_log2() - 2;
        &(s * &Rational::pow2(n + 2)) - &Rational::from_int(n + 2)
    }
}

fn integer_offset(a: &Affine) -> Option<i64> {
    if a.slope.is_one() && a.offset.is_integer() {
        a.offset.to_i64()
    } else {
        None
    }
}

/// `s -> psi(f(psi^-1(s)))` on `(0,1)`, identity elsewhere.
pub fn transport_to_unit(f: &PlMap) -> Result<PlMap, ThompsonError> {
    let kl = integer_offset(f.left())
        .ok_or_else(|| ThompsonError::NotThompson("left tail is not an integer translation".into()))?;
    let kr = integer_offset(f.right())
        .ok_or_else(|| ThompsonError::NotThompson("right tail is not an integer translation".into()))?;
    if f.is_identity() {
        return Ok(PlMap::identity());
    }
    let (lo, hi) = match (f.breaks().first(), f.breaks().last()) {
        (Some(a), Some(b)) => (a.0.floor_i64().min(a.1.floor_i64()).min(0), b.0.ceil_i64().max(b.1.ceil_i64()).max(0)),
        _ => (0, 0),
    };
    let bl = lo - kl.abs() - 1;
    let br = hi + kr.abs() + 1;
    let (bl_q, br_q) = (Rational::from_int(bl), Rational::from_int(br));
    let mut ts: BTreeSet<Rational> = (bl..=br).map(Rational::from_int).collect();
    ts.extend(f.breaks().iter().map(|p| p.0.clone()));
    for n in (bl + kl)..=(br + kr) {
        let t = f.eval_inverse(&Rational::from_int(n));
        if t >= bl_q && t <= br_q {
            ts.insert(t);
        }
    }
    let mut points = Vec::with_capacity(ts.len() + 2);
    points.push((Rational::zero(), Rational::zero()));
    points.extend(ts.iter().map(|t| (brown_forward(t), brown_forward(&f.eval(t)))));
    points.push((Rational::one(), Rational::one()));
    Ok(PlMap::from_points_fixing_outside(points)?)
}

/// Checks that `g` is the identity outside `[0,1]`.
pub(crate) fn check_unit_model(g: &PlMap) -> Result<(), ThompsonError> {
    let (zero, one) = (Rational::zero(), Rational::one());
    if !g.left().is_identity() || !g.right().is_identity() {
        return Err(ThompsonError::NotUnitModel("tails are not the identity".into()));
    }
    if let Some(p) = g.breaks().iter().find(|p| p.0 < zero || p.0 > one) {
        return Err(ThompsonError::NotUnitModel(format!("breakpoint at {} outside [0,1]", p.0)));
    }
    Ok(())
}

/// Inverse of [`transport_to_unit`].
pub fn transport_from_unit(g: &PlMap) -> Result<PlMap, ThompsonError> {
    check_unit_model(g)?;
    let (zero, one) = (Rational::zero(), Rational::one());
    let interior: Vec<&Rational> = g.breaks().iter().map(|p| &p.0).filter(|x| **x > zero && **x < one).collect();
    let (Some(&first), Some(&last)) = (interior.first(), interior.last()) else {
        return Ok(PlMap::identity());
    };
    let j = g
        .slope_after(&zero)
        .log2_exact()
        .ok_or_else(|| ThompsonError::NotThompson("slope at 0 is not a power of two".into()))?;
    let k = -g
        .slope_before(&one)
        .log2_exact()
        .ok_or_else(|| ThompsonError::NotThompson("slope at 1 is not a power of two".into()))?;
    let mut nl = j.max(1);
    while brown_forward(&Rational::from_int(-nl)) > *first {
        nl += 1;
    }
    let mut nr = (-k).max(1);
    while brown_forward(&Rational::from_int(nr)) < *last {
        nr += 1;
    }
    let (bl, br) = (-nl, nr);
    let (bl_q, br_q) = (Rational::from_int(bl), Rational::from_int(br));
    let mut ts: BTreeSet<Rational> = (bl..=br).map(Rational::from_int).collect();
    ts.extend(interior.iter().map(|x| psi_inv(x)));
    for n in (bl + j)..=(br + k) {
        let t = psi_inv(&g.eval_inverse(&brown_forward(&Rational::from_int(n))));
        if t >= bl_q && t <= br_q {
            ts.insert(t);
        }
    }
    let points = ts.iter().map(|t| (t.clone(), psi_inv(&g.eval(&brown_forward(t))))).collect();
    Ok(PlMap::new(points, Affine::translation(Rational::from_int(j)), Affine::translation(Rational::from_int(k)))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::thompson::{generator_f1, generator_f2};

    #[test]
    fn psi_at_integers() {
        assert_eq!(brown_forward(&q(0, 1)), q(1, 2));
        assert_eq!(brown_forward(&q(1, 1)), q(3, 4));
        assert_eq!(brown_forward(&q(-1, 1)), q(1, 4));
        assert_eq!(brown_forward(&q(2, 1)), q(7, 8));
        assert_eq!(brown_forward(&q(-3, 1)), q(1, 16));
        assert_eq!(brown_forward(&q(1, 2)), q(5, 8));
    }

    #[test]
    fn psi_inverse_roundtrip() {
        for num in -64..=64 {
            let t = q(num, 8);
            assert_eq!(brown_backward(&brown_forward(&t)).unwrap(), t);
        }
        assert!(brown_backward(&q(0, 1)).is_err());
        assert!(brown_backward(&q(1, 1)).is_err());
    }

    #[test]
    fn unit_model_generator_a() {
        let a = transport_to_unit(&generator_f1()).unwrap();
        let expect = PlMap::from_points_fixing_outside(vec![
            (q(0, 1), q(0, 1)),
            (q(1, 4), q(1, 2)),
            (q(1, 2), q(3, 4)),
            (q(1, 1), q(1, 1)),
        ])
        .unwrap();
        assert_eq!(a, expect);
        assert_eq!(a.support().components.len(), 1);
    }

    #[test]
    fn unit_model_generator_b() {
        let b = transport_to_unit(&generator_f2()).unwrap();
        let expect = PlMap::from_points_fixing_outside(vec![
            (q(1, 2), q(1, 2)),
            (q(5, 8), q(3, 4)),
            (q(3, 4), q(7, 8)),
            (q(1, 1), q(1, 1)),
        ])
        .unwrap();
        assert_eq!(b, expect);
    }

    #[test]
    fn transport_roundtrips() {
        assert!(transport_to_unit(&PlMap::identity()).unwrap().is_identity());
        for f in [generator_f1(), generator_f2(), generator_f1().pow(-3).then(&generator_f2().pow(2))] {
            let u = transport_to_unit(&f).unwrap();
            assert_eq!(transport_from_unit(&u).unwrap(), f);
        }
    }

    #[test]
    fn transport_rejects_bad_tails() {
        let scale = PlMap::affine(Affine::new(q(2, 1), q(0, 1)));
        assert!(matches!(transport_to_unit(&scale), Err(ThompsonError::NotThompson(_))));
        assert!(matches!(transport_from_unit(&generator_f1()), Err(ThompsonError::NotUnitModel(_))));
    }
}
