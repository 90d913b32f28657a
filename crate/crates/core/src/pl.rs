//! Orientation-preserving piecewise-linear homeomorphisms of the real line.
//!
//! A [`PlMap`] is a finite list of breakpoints together with affine tails on
//! the two unbounded ends. Every constructor canonicalizes: breakpoints at
//! which the incoming and outgoing slopes agree are dropped, so two maps are
//! equal as functions exactly when their representations are equal.
//!
//! Composition follows right-action order throughout the crate:
//! `compose(f, g)` is "apply `f`, then `g`".

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlError {
    #[error("breakpoint {index}: x-coordinates must be strictly increasing")]
    NonMonotoneX { index: usize },
    #[error("breakpoint {index}: y-coordinates must be strictly increasing")]
    NonMonotoneY { index: usize },
    #[error("{side} tail has non-positive slope")]
    NonPositiveSlope { side: &'static str },
    #[error("breakpoint {index}: tail does not pass through the breakpoint")]
    Discontinuous { index: usize },
    #[error("a map without breakpoints needs identical tails")]
    UnequalTails,
    #[error("affine carrier scale must be positive")]
    NonPositiveScale,
    #[error("map is not supported inside (0,1)")]
    SupportNotInUnit,
    #[error("malformed interval {0}")]
    BadInterval(String),
}

/// The affine map `x -> slope * x + offset`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Affine {
    pub slope: Rational,
    pub offset: Rational,
}

impl Affine {
    pub fn new(slope: Rational, offset: Rational) -> Self {
        Affine { slope, offset }
    }

    pub fn identity() -> Self {
        Affine::new(Rational::one(), Rational::zero())
    }

    pub fn translation(k: Rational) -> Self {
        Affine::new(Rational::one(), k)
    }

    pub fn apply(&self, x: &Rational) -> Rational {
        &(&self.slope * x) + &self.offset
    }

    pub fn apply_inverse(&self, y: &Rational) -> Rational {
        &(y - &self.offset) / &self.slope
    }

    pub fn inverse(&self) -> Affine {
        let inv = self.slope.recip();
        let offset = -(&self.offset * &inv);
        Affine::new(inv, offset)
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Affine) -> Affine {
        Affine::new(&self.slope * &next.slope, &(&self.offset * &next.slope) + &next.offset)
    }

    pub fn is_identity(&self) -> bool {
        self.slope.is_one() && self.offset.is_zero()
    }
}

/// An open interval whose endpoints may be infinite (`None`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OpenInterval {
    pub lo: Option<Rational>,
    pub hi: Option<Rational>,
}

impl OpenInterval {
    pub fn new(lo: Option<Rational>, hi: Option<Rational>) -> Self {
        OpenInterval { lo, hi }
    }

    pub fn bounded(lo: Rational, hi: Rational) -> Self {
        OpenInterval { lo: Some(lo), hi: Some(hi) }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.lo.as_ref().is_none_or(|lo| lo < x) && self.hi.as_ref().is_none_or(|hi| x < hi)
    }
}

impl fmt::Display for OpenInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lo = self.lo.as_ref().map_or("-inf".to_string(), |x| format!("{x:?}"));
        let hi = self.hi.as_ref().map_or("inf".to_string(), |x| format!("{x:?}"));
        write!(f, "({lo}, {hi})")
    }
}

/// Maximal open set moved by a map, as disjoint intervals listed left to right.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SupportSet {
    pub components: Vec<OpenInterval>,
}

impl SupportSet {
    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Image of every component under `g`.
    pub fn image(&self, g: &PlMap) -> SupportSet {
        SupportSet {
            components: self
                .components
                .iter()
                .map(|c| OpenInterval::new(c.lo.as_ref().map(|x| g.eval(x)), c.hi.as_ref().map(|x| g.eval(x))))
                .collect(),
        }
    }

    /// True iff every component lies inside `(lo, hi)`.
    pub fn within(&self, lo: &Rational, hi: &Rational) -> bool {
        self.components.iter().all(|c| matches!((&c.lo, &c.hi), (Some(a), Some(b)) if a >= lo && b <= hi))
    }

    /// The closure is a compact subset of the open interval `(lo, hi)`.
    pub fn compactly_within(&self, lo: &Rational, hi: &Rational) -> bool {
        self.components.iter().all(|c| matches!((&c.lo, &c.hi), (Some(a), Some(b)) if a > lo && b < hi))
    }

    /// Convex hull of the components meeting `(from, inf)`, clipped to it.
    pub fn hull_right_of(&self, from: &Rational) -> Option<(Rational, Rational)> {
        let parts: Vec<_> = self.components.iter().filter(|c| c.hi.as_ref().is_none_or(|hi| hi > from)).collect();
        let first = parts.first()?;
        let last = parts.last()?;
        let lo = match &first.lo {
            Some(lo) if lo > from => lo.clone(),
            _ => from.clone(),
        };
        let hi = last.hi.clone()?;
        Some((lo, hi))
    }
}

/// An orientation-preserving PL homeomorphism of the real line in canonical form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PlMap {
    breaks: Vec<(Rational, Rational)>,
    // slope of the piece between breaks[i] and breaks[i + 1]
    slopes: Vec<Rational>,
    left: Affine,
    right: Affine,
}

fn slope_between(a: &(Rational, Rational), b: &(Rational, Rational)) -> Rational {
    &(&b.1 - &a.1) / &(&b.0 - &a.0)
}

impl PlMap {
    /// Validates the data and returns the canonical form.
    pub fn new(breaks: Vec<(Rational, Rational)>, left: Affine, right: Affine) -> Result<Self, PlError> {
        if !left.slope.is_positive() {
            return Err(PlError::NonPositiveSlope { side: "left" });
        }
        if !right.slope.is_positive() {
            return Err(PlError::NonPositiveSlope { side: "right" });
        }
        for (i, w) in breaks.windows(2).enumerate() {
            if w[0].0 >= w[1].0 {
                return Err(PlError::NonMonotoneX { index: i + 1 });
            }
            if w[0].1 >= w[1].1 {
                return Err(PlError::NonMonotoneY { index: i + 1 });
            }
        }
        match (breaks.first(), breaks.last()) {
            (Some(first), Some(last)) => {
                if left.apply(&first.0) != first.1 {
                    return Err(PlError::Discontinuous { index: 0 });
                }
                if right.apply(&last.0) != last.1 {
                    return Err(PlError::Discontinuous { index: breaks.len() - 1 });
                }
            }
            _ => {
                if left != right {
                    return Err(PlError::UnequalTails);
                }
            }
        }
        Ok(Self::canonical(breaks, left, right))
    }

    /// Canonicalizes data already known to be monotone and continuous.
    pub(crate) fn canonical(points: Vec<(Rational, Rational)>, left: Affine, right: Affine) -> Self {
        let mut out: Vec<(Rational, Rational)> = Vec::with_capacity(points.len());
        let mut slopes: Vec<Rational> = Vec::with_capacity(points.len());
        for p in points {
            while let Some(last) = out.last() {
                let s = slope_between(last, &p);
                let incoming = slopes.last().unwrap_or(&left.slope);
                if *incoming == s {
                    out.pop();
                    slopes.pop();
                    continue;
                }
                slopes.push(s);
                break;
            }
            if out.is_empty() {
                slopes.clear();
            }
            out.push(p);
        }
        while !out.is_empty() {
            let incoming = slopes.last().unwrap_or(&left.slope);
            if *incoming != right.slope {
                break;
            }
            out.pop();
            slopes.pop();
        }
        if out.is_empty() {
            debug_assert_eq!(left, right);
            return PlMap { breaks: out, slopes: Vec::new(), left: left.clone(), right: left };
        }
        PlMap { breaks: out, slopes, left, right }
    }

    pub fn identity() -> Self {
        PlMap { breaks: Vec::new(), slopes: Vec::new(), left: Affine::identity(), right: Affine::identity() }
    }

    pub fn affine(a: Affine) -> Self {
        PlMap { breaks: Vec::new(), slopes: Vec::new(), left: a.clone(), right: a }
    }

    /// `t -> t + k`.
    pub fn translation(k: i64) -> Self {
        Self::affine(Affine::translation(Rational::from_int(k)))
    }

    /// Map that is the identity outside `[lo, hi]` and interpolates `points`
    /// (which must start at `(lo, lo)` and end at `(hi, hi)`).
    pub fn from_points_fixing_outside(points: Vec<(Rational, Rational)>) -> Result<Self, PlError> {
        Self::new(points, Affine::identity(), Affine::identity())
    }

    pub fn breaks(&self) -> &[(Rational, Rational)] {
        &self.breaks
    }

    pub fn left(&self) -> &Affine {
        &self.left
    }

    pub fn right(&self) -> &Affine {
        &self.right
    }

    pub fn breakpoint_count(&self) -> usize {
        self.breaks.len()
    }

    /// Slopes of the pieces from left to right, tails included.
    pub fn all_slopes(&self) -> impl Iterator<Item = &Rational> {
        std::iter::once(&self.left.slope).chain(self.slopes.iter()).chain(std::iter::once(&self.right.slope))
    }

    pub fn is_identity(&self) -> bool {
        self.breaks.is_empty() && self.left.is_identity()
    }

    fn piece_slope(&self, piece: usize) -> &Rational {
        if piece == 0 {
            &self.left.slope
        } else if piece == self.breaks.len() {
            &self.right.slope
        } else {
            &self.slopes[piece - 1]
        }
    }

    /// Slope of the piece just to the right of `x`.
    pub fn slope_after(&self, x: &Rational) -> &Rational {
        self.piece_slope(self.breaks.partition_point(|b| b.0 <= *x))
    }

    /// Slope of the piece just to the left of `x`.
    pub fn slope_before(&self, x: &Rational) -> &Rational {
        self.piece_slope(self.breaks.partition_point(|b| b.0 < *x))
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let n = self.breaks.len();
        if n == 0 || *x <= self.breaks[0].0 {
            return self.left.apply(x);
        }
        if *x >= self.breaks[n - 1].0 {
            return self.right.apply(x);
        }
        let i = self.breaks.partition_point(|p| p.0 <= *x) - 1;
        let (bx, by) = &self.breaks[i];
        by + &(&self.slopes[i] * &(x - bx))
    }

    pub fn eval_inverse(&self, y: &Rational) -> Rational {
        let n = self.breaks.len();
        if n == 0 || *y <= self.breaks[0].1 {
            return self.left.apply_inverse(y);
        }
        if *y >= self.breaks[n - 1].1 {
            return self.right.apply_inverse(y);
        }
        let i = self.breaks.partition_point(|p| p.1 <= *y) - 1;
        let (bx, by) = &self.breaks[i];
        bx + &(&(y - by) / &self.slopes[i])
    }

    // value at `y` given that `next` is the index of the first breakpoint with x > y
    fn eval_at_piece(&self, y: &Rational, next: usize) -> Rational {
        if next == 0 {
            self.left.apply(y)
        } else if next == self.breaks.len() {
            self.right.apply(y)
        } else {
            let (bx, by) = &self.breaks[next - 1];
            by + &(&self.slopes[next - 1] * &(y - bx))
        }
    }

    fn eval_inverse_at_piece(&self, u: &Rational, next: usize) -> Rational {
        if next == 0 {
            self.left.apply_inverse(u)
        } else if next == self.breaks.len() {
            self.right.apply_inverse(u)
        } else {
            let (bx, by) = &self.breaks[next - 1];
            bx + &(&(u - by) / &self.slopes[next - 1])
        }
    }

    /// "Apply `self`, then `g`".
    pub fn then(&self, g: &PlMap) -> PlMap {
        let fb = &self.breaks;
        let gb = &g.breaks;
        let (n, m) = (fb.len(), gb.len());
        let mut pts = Vec::with_capacity(n + m);
        let (mut i, mut j) = (0, 0);
        while i < n || j < m {
            let take_f = j == m || (i < n && fb[i].1 < gb[j].0);
            let take_g = i == n || (j < m && gb[j].0 < fb[i].1);
            if take_f {
                pts.push((fb[i].0.clone(), g.eval_at_piece(&fb[i].1, j)));
                i += 1;
            } else if take_g {
                pts.push((self.eval_inverse_at_piece(&gb[j].0, i), gb[j].1.clone()));
                j += 1;
            } else {
                pts.push((fb[i].0.clone(), gb[j].1.clone()));
                i += 1;
                j += 1;
            }
        }
        let left = self.left.then(&g.left);
        let right = self.right.then(&g.right);
        if pts.is_empty() {
            return PlMap::affine(left);
        }
        PlMap::canonical(pts, left, right)
    }

    pub fn inverse(&self) -> PlMap {
        PlMap {
            breaks: self.breaks.iter().map(|(x, y)| (y.clone(), x.clone())).collect(),
            slopes: self.slopes.iter().map(Rational::recip).collect(),
            left: self.left.inverse(),
            right: self.right.inverse(),
        }
    }

    /// `k`-th power in the group; negative `k` uses the inverse.
    pub fn pow(&self, k: i64) -> PlMap {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = PlMap::identity();
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.then(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.then(&sq);
            }
        }
        acc
    }

    // affine pieces as (lo, hi, map), lo/hi None for unbounded
    fn pieces(&self) -> Vec<(Option<Rational>, Option<Rational>, Affine)> {
        let n = self.breaks.len();
        if n == 0 {
            return vec![(None, None, self.left.clone())];
        }
        let mut out = Vec::with_capacity(n + 1);
        out.push((None, Some(self.breaks[0].0.clone()), self.left.clone()));
        for i in 0..n - 1 {
            let (x, y) = &self.breaks[i];
            let s = self.slopes[i].clone();
            let offset = y - &(&s * x);
            out.push((Some(x.clone()), Some(self.breaks[i + 1].0.clone()), Affine::new(s, offset)));
        }
        out.push((Some(self.breaks[n - 1].0.clone()), None, self.right.clone()));
        out
    }

    /// The maximal open set on which the map moves points.
    pub fn support(&self) -> SupportSet {
        // closed fixed segments, None = unbounded
        let mut fixed: Vec<(Option<Rational>, Option<Rational>)> = Vec::new();
        let mut push = |lo: Option<Rational>, hi: Option<Rational>| {
            if let Some(last) = fixed.last_mut() {
                if let (Some(prev_hi), Some(new_lo)) = (&last.1, &lo) {
                    if new_lo <= prev_hi {
                        let extend = match (&hi, &last.1) {
                            (None, _) => true,
                            (Some(h), Some(ph)) => h > ph,
                            (Some(_), None) => false,
                        };
                        if extend {
                            last.1 = hi;
                        }
                        return;
                    }
                }
            }
            fixed.push((lo, hi));
        };
        for (lo, hi, a) in self.pieces() {
            if a.is_identity() {
                push(lo, hi);
            } else if !a.slope.is_one() {
                let p = &a.offset / &(&Rational::one() - &a.slope);
                let inside = lo.as_ref().is_none_or(|l| *l <= p) && hi.as_ref().is_none_or(|h| p <= *h);
                if inside {
                    push(Some(p.clone()), Some(p));
                }
            }
        }
        let mut components = Vec::new();
        let mut cursor: Option<Option<Rational>> = Some(None);
        for (lo, hi) in fixed {
            if let Some(start) = cursor.take() {
                match (&start, &lo) {
                    (_, None) => {}
                    (Some(s), Some(l)) if s >= l => {}
                    _ => components.push(OpenInterval::new(start, lo.clone())),
                }
            }
            cursor = hi.map(Some);
        }
        if let Some(start) = cursor {
            components.push(OpenInterval::new(start, None));
        }
        SupportSet { components }
    }

    /// Finite fixed endpoints of support components.
    pub fn transition_points(&self) -> BTreeSet<Rational> {
        let mut out = BTreeSet::new();
        for c in self.support().components {
            out.extend(c.lo);
            out.extend(c.hi);
        }
        out
    }

    /// Fixes `(-inf, r1]` pointwise and moves every point of `(r2, inf)` up.
    pub fn is_special(&self, r1: &Rational, r2: &Rational) -> bool {
        let support = self.support();
        if !support.components.iter().all(|c| c.lo.as_ref().is_some_and(|lo| lo >= r1)) {
            return false;
        }
        let Some(last) = support.components.last() else { return false };
        let (Some(lo), None) = (&last.lo, &last.hi) else { return false };
        if lo > r2 {
            return false;
        }
        let probe = &(if lo > r2 { lo.clone() } else { r2.clone() }) + &Rational::one();
        self.eval(&probe) > probe
    }

    /// `g^-1 f g`; its support is the image of `supp(f)` under `g`.
    pub fn conjugate(&self, g: &PlMap) -> PlMap {
        g.inverse().then(self).then(g)
    }

    /// `f^-1 g^-1 f g`.
    pub fn commutator(&self, g: &PlMap) -> PlMap {
        self.inverse().then(&g.inverse()).then(self).then(g)
    }

    /// Conjugate by `t -> scale * t + shift`, moving a map supported in `(0,1)`
    /// onto `(shift, shift + scale)`.
    pub fn affine_conjugate_into(&self, scale: &Rational, shift: &Rational) -> Result<PlMap, PlError> {
        if !scale.is_positive() {
            return Err(PlError::NonPositiveScale);
        }
        if !self.support().within(&Rational::zero(), &Rational::one()) {
            return Err(PlError::SupportNotInUnit);
        }
        let phi = Affine::new(scale.clone(), shift.clone());
        let conj_tail = |a: &Affine| phi.inverse().then(a).then(&phi);
        Ok(PlMap {
            breaks: self.breaks.iter().map(|(x, y)| (phi.apply(x), phi.apply(y))).collect(),
            slopes: self.slopes.clone(),
            left: conj_tail(&self.left),
            right: conj_tail(&self.right),
        })
    }

    /// Dyadic breakpoints, power-of-two slopes and integer translation tails.
    pub fn is_thompson_element(&self) -> bool {
        let tail_ok = |a: &Affine| a.slope.is_one() && a.offset.is_integer();
        tail_ok(&self.left)
            && tail_ok(&self.right)
            && self.breaks.iter().all(|(x, y)| x.is_dyadic() && y.is_dyadic())
            && self.slopes.iter().all(|s| s.log2_exact().is_some())
    }

    /// Agreement of the two maps on the closed interval `[lo, hi]`.
    pub fn agrees_on(&self, other: &PlMap, lo: &Rational, hi: &Rational) -> bool {
        let inner = self.breaks.iter().chain(other.breaks.iter()).map(|p| &p.0).filter(|x| *x > lo && *x < hi);
        std::iter::once(lo).chain(std::iter::once(hi)).chain(inner).all(|x| self.eval(x) == other.eval(x))
    }

    /// The identity on `[lo, hi]`.
    pub fn fixes_interval(&self, lo: &Rational, hi: &Rational) -> bool {
        self.agrees_on(&PlMap::identity(), lo, hi)
    }

    /// Same map on `[lo, hi]`, identity elsewhere. Requires `lo`, `hi` fixed.
    pub fn restrict_to(&self, lo: &Rational, hi: &Rational) -> Result<PlMap, PlError> {
        if lo >= hi || self.eval(lo) != *lo || self.eval(hi) != *hi {
            return Err(PlError::BadInterval(format!("[{lo}, {hi}]")));
        }
        let mut pts = vec![(lo.clone(), lo.clone())];
        pts.extend(self.breaks.iter().filter(|p| p.0 > *lo && p.0 < *hi).cloned());
        pts.push((hi.clone(), hi.clone()));
        PlMap::from_points_fixing_outside(pts)
    }
}

/// "Apply `f`, then `g`".
pub fn compose(f: &PlMap, g: &PlMap) -> PlMap {
    f.then(g)
}

impl fmt::Debug for PlMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PlMap[{:?}*t+{:?} | ", self.left.slope, self.left.offset)?;
        for (x, y) in &self.breaks {
            write!(f, "({x:?},{y:?}) ")?;
        }
        write!(f, "| {:?}*t+{:?}]", self.right.slope, self.right.offset)
    }
}

#[derive(Serialize, Deserialize)]
struct PlMapJson {
    breaks: Vec<[Rational; 2]>,
    left: Affine,
    right: Affine,
}

impl Serialize for PlMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PlMapJson {
            breaks: self.breaks.iter().map(|(x, y)| [x.clone(), y.clone()]).collect(),
            left: self.left.clone(),
            right: self.right.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PlMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = PlMapJson::deserialize(d)?;
        let breaks = raw.breaks.into_iter().map(|[x, y]| (x, y)).collect();
        PlMap::new(breaks, raw.left, raw.right).map_err(serde::de::Error::custom)
    }
}
