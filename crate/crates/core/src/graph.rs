//! Maximal monotone graphs on the real line, given as subdifferentials of
//! convex potentials with an explicit domain `[m, M]` (infinite endpoints
//! allowed). The potential is normalized so that `j(0) = 0`, which pins the
//! Moreau envelope values.
//!
//! All operations are pure functions of the immutable graph description and
//! may be evaluated concurrently.

use crate::error::BuildError;

const BISECT_TOL: f64 = 1e-12;

/// Closed interval of subgradients `[j'_-(r), j'_+(r)]`; endpoints may be
/// infinite at the boundary of the domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubgradientSpan {
    pub lo: f64,
    pub hi: f64,
}

impl SubgradientSpan {
    pub fn contains(&self, w: f64) -> bool {
        w >= self.lo && w <= self.hi
    }

    /// Nearest point of the span to `w`.
    pub fn project(&self, w: f64) -> f64 {
        w.clamp(self.lo, self.hi)
    }
}

/// One distinct breakpoint of a piecewise-linear graph; `w_lo < w_hi` encodes
/// a vertical jump segment.
#[derive(Debug, Clone, Copy)]
struct Knot {
    x: f64,
    w_lo: f64,
    w_hi: f64,
}

#[derive(Debug, Clone)]
enum GraphKind {
    /// The trivial graph `r -> {0}` (flat potential).
    Zero,
    /// `r -> {r}`, potential `r^2/2`.
    Identity,
    /// `r -> {|r|^(q-1) r}`, potential `|r|^(q+1)/(q+1)`.
    Power { q: f64 },
    /// Subdifferential of the indicator of `[m, M]`.
    Indicator,
    /// Monotone piecewise-linear graph with jumps, constant outside the knots.
    Piecewise { knots: Vec<Knot> },
}

/// A maximal monotone graph `beta = dj` with domain `[dom_lo, dom_hi]`.
#[derive(Debug, Clone)]
pub struct MonotoneGraph {
    dom_lo: f64,
    dom_hi: f64,
    kind: GraphKind,
}

impl MonotoneGraph {
    pub fn zero() -> Self {
        MonotoneGraph {
            dom_lo: f64::NEG_INFINITY,
            dom_hi: f64::INFINITY,
            kind: GraphKind::Zero,
        }
    }

    pub fn identity() -> Self {
        MonotoneGraph {
            dom_lo: f64::NEG_INFINITY,
            dom_hi: f64::INFINITY,
            kind: GraphKind::Identity,
        }
    }

    /// `beta(r) = |r|^(q-1) r`; requires `q > 0`.
    pub fn power(q: f64) -> Result<Self, BuildError> {
        if q.is_nan() || q <= 0.0 || !q.is_finite() {
            return Err(BuildError::Graph(format!(
                "power exponent must be positive, got {q}"
            )));
        }
        Ok(MonotoneGraph {
            dom_lo: f64::NEG_INFINITY,
            dom_hi: f64::INFINITY,
            kind: GraphKind::Power { q },
        })
    }

    /// Subdifferential of the indicator of `[m, big]`; needs `m <= 0 <= big`.
    pub fn indicator(m: f64, big: f64) -> Result<Self, BuildError> {
        if !(m <= 0.0 && 0.0 <= big) || m >= big {
            return Err(BuildError::Graph(format!(
                "indicator domain [{m}, {big}] must contain 0 with m < M"
            )));
        }
        Ok(MonotoneGraph {
            dom_lo: m,
            dom_hi: big,
            kind: GraphKind::Indicator,
        })
    }

    /// Piecewise-linear monotone graph through `(x, w)` pairs. Repeated `x`
    /// with increasing `w` encodes a jump. Outside the knot range the graph
    /// continues with its end value. Requires monotone data and `0 in beta(0)`.
    pub fn piecewise_linear(points: &[(f64, f64)]) -> Result<Self, BuildError> {
        if points.is_empty() {
            return Err(BuildError::Graph(
                "piecewise graph needs at least one point".into(),
            ));
        }
        let mut knots: Vec<Knot> = Vec::new();
        let mut prev: Option<(f64, f64)> = None;
        for &(x, w) in points {
            if !x.is_finite() || !w.is_finite() {
                return Err(BuildError::Graph("piecewise points must be finite".into()));
            }
            if let Some((px, pw)) = prev {
                if x < px || (x == px && w < pw) {
                    return Err(BuildError::Graph(
                        "piecewise points must be nondecreasing in x and w".into(),
                    ));
                }
                if w < pw {
                    return Err(BuildError::Graph(
                        "piecewise w values must be nondecreasing".into(),
                    ));
                }
            }
            match knots.last_mut() {
                Some(k) if k.x == x => k.w_hi = w,
                _ => knots.push(Knot {
                    x,
                    w_lo: w,
                    w_hi: w,
                }),
            }
            prev = Some((x, w));
        }
        let g = MonotoneGraph {
            dom_lo: f64::NEG_INFINITY,
            dom_hi: f64::INFINITY,
            kind: GraphKind::Piecewise { knots },
        };
        let at_zero = g.subgradient_at(0.0).expect("0 is inside the domain");
        if !at_zero.contains(0.0) {
            return Err(BuildError::Graph(
                "0 in beta(0) fails for the given points".into(),
            ));
        }
        Ok(g)
    }

    /// Domain `[m, M]` as extended reals.
    pub fn dom(&self) -> (f64, f64) {
        (self.dom_lo, self.dom_hi)
    }

    pub fn dom_is_bounded(&self) -> bool {
        self.dom_lo.is_finite() && self.dom_hi.is_finite()
    }

    /// Convex potential `j`, normalized with `j(0) = 0`; infinite outside the
    /// domain.
    pub fn potential(&self, r: f64) -> f64 {
        if r < self.dom_lo || r > self.dom_hi {
            return f64::INFINITY;
        }
        match &self.kind {
            GraphKind::Zero => 0.0,
            GraphKind::Identity => 0.5 * r * r,
            GraphKind::Power { q } => r.abs().powf(q + 1.0) / (q + 1.0),
            GraphKind::Indicator => 0.0,
            GraphKind::Piecewise { knots } => pwl_integral(knots, r),
        }
    }

    /// `[j'_-(r), j'_+(r)]` for `r` in the domain, with one-sided conventions
    /// at finite endpoints; `None` outside the domain.
    pub fn subgradient_at(&self, r: f64) -> Option<SubgradientSpan> {
        if r < self.dom_lo || r > self.dom_hi || !r.is_finite() {
            return None;
        }
        let mut span = match &self.kind {
            GraphKind::Zero => SubgradientSpan { lo: 0.0, hi: 0.0 },
            GraphKind::Identity => SubgradientSpan { lo: r, hi: r },
            GraphKind::Power { q } => {
                let v = r.abs().powf(q - 1.0) * r;
                SubgradientSpan { lo: v, hi: v }
            }
            GraphKind::Indicator => SubgradientSpan { lo: 0.0, hi: 0.0 },
            GraphKind::Piecewise { knots } => pwl_span(knots, r),
        };
        if r == self.dom_lo {
            span.lo = f64::NEG_INFINITY;
        }
        if r == self.dom_hi {
            span.hi = f64::INFINITY;
        }
        Some(span)
    }

    /// Subgradient span at `r`, widened by the spans of jump knots within
    /// `tol` of `r`. A limit iterate plateauing at an interior jump sits an
    /// `O(eps)` whisker away from the knot, and its regular part must be
    /// clipped against the whole jump interval, not the one-sided value.
    pub fn section_near(&self, r: f64, tol: f64) -> Option<SubgradientSpan> {
        let mut span = self.subgradient_at(r)?;
        if let GraphKind::Piecewise { knots } = &self.kind {
            for k in knots {
                if k.w_hi > k.w_lo && (r - k.x).abs() <= tol {
                    span.lo = span.lo.min(k.w_lo);
                    span.hi = span.hi.max(k.w_hi);
                }
            }
        }
        Some(span)
    }

    /// Largest finite subgradient at the upper endpoint (`j'_-(M)`), when the
    /// domain is bounded above.
    pub fn upper_contact_value(&self) -> Option<f64> {
        if !self.dom_hi.is_finite() {
            return None;
        }
        self.subgradient_at(self.dom_hi).map(|s| s.lo)
    }

    /// Smallest finite subgradient at the lower endpoint (`j'_+(m)`).
    pub fn lower_contact_value(&self) -> Option<f64> {
        if !self.dom_lo.is_finite() {
            return None;
        }
        self.subgradient_at(self.dom_lo).map(|s| s.hi)
    }

    /// Resolvent `(I + eps*beta)^{-1}(s)`: the unique `r` with
    /// `r + eps*beta(r)` containing `s`.
    pub fn resolvent(&self, eps: f64, s: f64) -> f64 {
        assert!(eps > 0.0, "resolvent needs eps > 0");
        match &self.kind {
            GraphKind::Zero => s,
            GraphKind::Identity => s / (1.0 + eps),
            GraphKind::Indicator => s.clamp(self.dom_lo, self.dom_hi),
            GraphKind::Piecewise { knots } => pwl_resolvent(knots, eps, s),
            GraphKind::Power { q } => power_resolvent(*q, eps, s),
        }
    }

    /// Yosida regularization `beta_eps(s) = (s - resolvent(eps, s)) / eps`.
    pub fn yosida(&self, eps: f64, s: f64) -> f64 {
        (s - self.resolvent(eps, s)) / eps
    }

    /// Derivative of the Yosida map where it exists (`1/eps` across jumps and
    /// beyond finite endpoints); used by Newton linearizations.
    pub fn yosida_slope(&self, eps: f64, s: f64) -> f64 {
        let slope = match &self.kind {
            GraphKind::Zero => 0.0,
            GraphKind::Identity => 1.0 / (1.0 + eps),
            GraphKind::Indicator => {
                if s > self.dom_hi || s < self.dom_lo {
                    1.0 / eps
                } else {
                    0.0
                }
            }
            GraphKind::Power { q } => {
                let r = self.resolvent(eps, s);
                let b = q * r.abs().powf(q - 1.0);
                if b.is_finite() {
                    b / (1.0 + eps * b)
                } else {
                    1.0 / eps
                }
            }
            GraphKind::Piecewise { knots } => {
                let r = pwl_resolvent(knots, eps, s);
                let span = pwl_span(knots, r);
                if s > r + eps * span.lo && s < r + eps * span.hi {
                    // strictly inside a jump image: the resolvent is locally constant
                    1.0 / eps
                } else {
                    let b = pwl_local_slope(knots, r, s >= r + eps * span.hi);
                    b / (1.0 + eps * b)
                }
            }
        };
        slope.clamp(0.0, 1.0 / eps)
    }

    /// Moreau envelope `j_eps(s) = min_r { |s-r|^2/(2 eps) + j(r) }`, computed
    /// by direct golden-section minimization of the strictly convex objective.
    /// The resolvent-based identity is left to callers as a cross-check.
    pub fn moreau(&self, eps: f64, s: f64) -> f64 {
        assert!(eps > 0.0, "moreau needs eps > 0");
        let obj = |r: f64| (s - r) * (s - r) / (2.0 * eps) + self.potential(r);
        // the minimizer lies between 0 and s, intersected with the domain
        let mut lo = s.min(0.0).max(self.dom_lo);
        let mut hi = s.max(0.0).min(self.dom_hi);
        if lo >= hi {
            let r = lo.min(hi);
            return obj(r);
        }
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = hi - phi * (hi - lo);
        let mut x2 = lo + phi * (hi - lo);
        let mut f1 = obj(x1);
        let mut f2 = obj(x2);
        let tol = 1e-10 * (1.0 + s.abs());
        let mut best = f1.min(f2).min(obj(lo)).min(obj(hi));
        for _ in 0..200 {
            if hi - lo <= tol {
                break;
            }
            if f1 <= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - phi * (hi - lo);
                f1 = obj(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + phi * (hi - lo);
                f2 = obj(x2);
            }
            best = best.min(f1).min(f2);
        }
        best
    }

    /// Zero when `(r, w)` lies on the graph (one-sided conventions at finite
    /// endpoints), otherwise the Euclidean distance from `(r, w)` to it.
    pub fn membership_defect(&self, r: f64, w: f64) -> f64 {
        if let Some(span) = self.subgradient_at(r) {
            if span.contains(w) {
                return 0.0;
            }
        }
        self.distance_to_graph(r, w)
    }

    fn distance_to_graph(&self, r: f64, w: f64) -> f64 {
        let window = 2.0 * (1.0 + r.abs() + w.abs());
        let lo = (r - window).max(self.dom_lo);
        let hi = (r + window).min(self.dom_hi);
        let mut best = f64::INFINITY;

        // vertical rays at finite endpoints
        if self.dom_hi.is_finite() {
            let base = self.upper_contact_value().unwrap_or(0.0);
            let t = w.max(base);
            best = best.min(((r - self.dom_hi).powi(2) + (w - t).powi(2)).sqrt());
        }
        if self.dom_lo.is_finite() {
            let base = self.lower_contact_value().unwrap_or(0.0);
            let t = w.min(base);
            best = best.min(((r - self.dom_lo).powi(2) + (w - t).powi(2)).sqrt());
        }
        if lo > hi {
            return best;
        }

        // jump segments of piecewise graphs are exact point-to-segment distances
        if let GraphKind::Piecewise { knots } = &self.kind {
            for k in knots {
                if k.w_hi > k.w_lo {
                    let t = w.clamp(k.w_lo, k.w_hi);
                    best = best.min(((r - k.x).powi(2) + (w - t).powi(2)).sqrt());
                }
            }
        }

        let mid = |t: f64| {
            let s = self.subgradient_at(t).expect("t inside domain");
            if s.lo.is_finite() && s.hi.is_finite() {
                0.5 * (s.lo + s.hi)
            } else if s.lo.is_finite() {
                s.lo
            } else {
                s.hi
            }
        };
        let dist = |t: f64| ((t - r).powi(2) + (mid(t) - w).powi(2)).sqrt();

        let samples = 2048;
        let step = (hi - lo) / samples as f64;
        let mut best_t = lo;
        for i in 0..=samples {
            let t = lo + step * i as f64;
            let d = dist(t);
            if d < best {
                best = d;
                best_t = t;
            }
        }
        // local golden-section refinement around the best sampled parameter
        let mut a = (best_t - step).max(lo);
        let mut b = (best_t + step).min(hi);
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..80 {
            if b - a < 1e-13 * (1.0 + best_t.abs()) {
                break;
            }
            let x1 = b - phi * (b - a);
            let x2 = a + phi * (b - a);
            if dist(x1) <= dist(x2) {
                b = x2;
            } else {
                a = x1;
            }
        }
        best.min(dist(0.5 * (a + b)))
    }
}

fn power_resolvent(q: f64, eps: f64, s: f64) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    // solve t + eps t^q = |s| on [0, |s|], then restore the sign
    let target = s.abs();
    let f = |t: f64| t + eps * t.powf(q) - target;
    let mut lo = 0.0f64;
    let mut hi = target;
    for _ in 0..200 {
        if hi - lo <= BISECT_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut t = 0.5 * (lo + hi);
    // polish: the map is smooth and strictly increasing for t > 0
    for _ in 0..3 {
        let d = 1.0 + eps * q * t.powf(q - 1.0);
        if !d.is_finite() || d == 0.0 {
            break;
        }
        t = (t - f(t) / d).clamp(0.0, target);
    }
    t * s.signum()
}

fn pwl_span(knots: &[Knot], r: f64) -> SubgradientSpan {
    let first = &knots[0];
    let last = &knots[knots.len() - 1];
    if r < first.x {
        return SubgradientSpan {
            lo: first.w_lo,
            hi: first.w_lo,
        };
    }
    if r > last.x {
        return SubgradientSpan {
            lo: last.w_hi,
            hi: last.w_hi,
        };
    }
    for (i, k) in knots.iter().enumerate() {
        if r == k.x {
            return SubgradientSpan {
                lo: k.w_lo,
                hi: k.w_hi,
            };
        }
        if r < k.x {
            let p = &knots[i - 1];
            let t = (r - p.x) / (k.x - p.x);
            let v = p.w_hi + t * (k.w_lo - p.w_hi);
            return SubgradientSpan { lo: v, hi: v };
        }
    }
    unreachable!("r inside knot range")
}

fn pwl_local_slope(knots: &[Knot], r: f64, from_above: bool) -> f64 {
    let first = &knots[0];
    let last = &knots[knots.len() - 1];
    if r < first.x || (r == first.x && !from_above) || r > last.x || (r == last.x && from_above) {
        return 0.0;
    }
    for (i, k) in knots.iter().enumerate() {
        if r < k.x || (r == k.x && !from_above) {
            let p = &knots[i - 1];
            return (k.w_lo - p.w_hi) / (k.x - p.x);
        }
        if r == k.x && from_above {
            let n = &knots[i + 1];
            return (n.w_lo - k.w_hi) / (n.x - k.x);
        }
    }
    0.0
}

/// Exact piecewise resolvent: walk the increasing images of the linear and
/// jump pieces of `r + eps*beta(r)` until the one containing `s` is found.
fn pwl_resolvent(knots: &[Knot], eps: f64, s: f64) -> f64 {
    let first = &knots[0];
    if s <= first.x + eps * first.w_lo {
        return s - eps * first.w_lo;
    }
    for (i, k) in knots.iter().enumerate() {
        // jump image of this knot
        if s <= k.x + eps * k.w_hi {
            if s >= k.x + eps * k.w_lo {
                return k.x;
            }
            // linear piece between the previous knot and this one
            let p = &knots[i - 1];
            let b = (k.w_lo - p.w_hi) / (k.x - p.x);
            // r + eps*(p.w_hi + b (r - p.x)) = s
            return (s - eps * (p.w_hi - b * p.x)) / (1.0 + eps * b);
        }
    }
    let last = &knots[knots.len() - 1];
    s - eps * last.w_hi
}

/// Integral of the a.e. selection of the piecewise graph from 0 to `r`.
fn pwl_integral(knots: &[Knot], r: f64) -> f64 {
    let (a, b, sign) = if r >= 0.0 {
        (0.0, r, 1.0)
    } else {
        (r, 0.0, -1.0)
    };
    let mut acc = 0.0;
    // value of beta on the open segment (xs, xe)
    let seg = |xs: f64, xe: f64, ws: f64, we: f64| -> f64 {
        let lo = xs.max(a);
        let hi = xe.min(b);
        if hi <= lo {
            return 0.0;
        }
        let t0 = (lo - xs) / (xe - xs);
        let t1 = (hi - xs) / (xe - xs);
        let v0 = ws + t0 * (we - ws);
        let v1 = ws + t1 * (we - ws);
        0.5 * (v0 + v1) * (hi - lo)
    };
    let first = &knots[0];
    if a < first.x {
        let hi = b.min(first.x);
        acc += first.w_lo * (hi - a);
    }
    for i in 0..knots.len().saturating_sub(1) {
        let k = &knots[i];
        let n = &knots[i + 1];
        acc += seg(k.x, n.x, k.w_hi, n.w_lo);
    }
    let last = &knots[knots.len() - 1];
    if b > last.x {
        let lo = a.max(last.x);
        acc += last.w_hi * (b - lo);
    }
    sign * acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample_graphs() -> Vec<(&'static str, MonotoneGraph)> {
        vec![
            ("identity", MonotoneGraph::identity()),
            ("power3", MonotoneGraph::power(3.0).unwrap()),
            ("indicator", MonotoneGraph::indicator(-1.0, 1.0).unwrap()),
            (
                "asymmetric",
                MonotoneGraph::piecewise_linear(&[
                    (-0.5, -3.0),
                    (0.0, 0.0),
                    (1.0, 0.5),
                    (1.0, 2.5),
                ])
                .unwrap(),
            ),
        ]
    }

    #[test]
    fn resolvent_examples() {
        let id = MonotoneGraph::identity();
        assert!((id.resolvent(0.5, 3.0) - 2.0).abs() < 1e-12);
        let ind = MonotoneGraph::indicator(-1.0, 1.0).unwrap();
        assert_eq!(ind.resolvent(0.1, 5.0), 1.0);
        for (_, g) in sample_graphs() {
            for &eps in &[1.0, 0.1, 0.01] {
                assert_eq!(g.resolvent(eps, 0.0), 0.0, "resolvent must fix 0");
            }
        }
    }

    #[test]
    fn yosida_examples() {
        let id = MonotoneGraph::identity();
        assert!((id.yosida(0.5, 3.0) - 2.0).abs() < 1e-12);
        let ind = MonotoneGraph::indicator(-1.0, 1.0).unwrap();
        assert!((ind.yosida(0.1, 5.0) - 40.0).abs() < 1e-10);
        for (_, g) in sample_graphs() {
            assert_eq!(g.yosida(0.25, 0.0), 0.0);
        }
    }

    #[test]
    fn moreau_examples() {
        let id = MonotoneGraph::identity();
        assert!((id.moreau(1.0, 2.0) - 1.0).abs() < 1e-10);
        let ind = MonotoneGraph::indicator(-1.0, 1.0).unwrap();
        assert!((ind.moreau(0.1, 5.0) - 80.0).abs() < 1e-9);
        for (_, g) in sample_graphs() {
            assert_eq!(g.moreau(0.5, 0.0), 0.0);
        }
    }

    #[test]
    fn membership_defect_examples() {
        let id = MonotoneGraph::identity();
        assert_eq!(id.membership_defect(2.0, 2.0), 0.0);
        let ind = MonotoneGraph::indicator(-1.0, 1.0).unwrap();
        assert_eq!(ind.membership_defect(1.0, 7.0), 0.0, "vertical ray at M");
        // distance from (0,1) to the line w = r is 1/sqrt(2)
        let d = id.membership_defect(0.0, 1.0);
        assert!((d - 0.5f64.sqrt()).abs() < 1e-8, "got {d}");
    }

    #[test]
    fn membership_defect_against_brute_force() {
        let g =
            MonotoneGraph::piecewise_linear(&[(-0.5, -3.0), (0.0, 0.0), (1.0, 0.5), (1.0, 2.5)])
                .unwrap();
        for &(r, w) in &[(0.5, 2.0), (-2.0, 1.0), (1.5, 0.0), (-0.25, -4.0)] {
            let d = g.membership_defect(r, w);
            // dense sampling oracle; the knot abscissas are included exactly
            // so vertical jump segments are not missed between samples
            let mut brute = f64::INFINITY;
            let mut consider = |t: f64| {
                let span = g.subgradient_at(t).unwrap();
                let v = w.clamp(span.lo, span.hi);
                brute = brute.min(((t - r).powi(2) + (v - w).powi(2)).sqrt());
            };
            let n = 400_000;
            for i in 0..=n {
                consider(-6.0 + 12.0 * i as f64 / n as f64);
            }
            for t in [-0.5, 0.0, 1.0] {
                consider(t);
            }
            assert!(
                (d - brute).abs() < 1e-4,
                "r={r} w={w}: {d} vs brute {brute}"
            );
        }
    }

    #[test]
    fn moreau_identity_cross_check() {
        for (name, g) in sample_graphs() {
            for &eps in &[1.0, 0.1, 0.01] {
                for i in 0..50 {
                    let s = -8.0 + 16.0 * i as f64 / 49.0;
                    let direct = g.moreau(eps, s);
                    let r = g.resolvent(eps, s);
                    let y = g.yosida(eps, s);
                    let composed = 0.5 * eps * y * y + g.potential(r);
                    assert!(
                        (direct - composed).abs() <= 1e-10 * (1.0 + direct.abs()),
                        "{name} eps={eps} s={s}: {direct} vs {composed}"
                    );
                }
            }
        }
    }

    #[test]
    fn envelope_increases_to_potential() {
        for (name, g) in sample_graphs() {
            for i in 0..40 {
                let s = -5.0 + 10.0 * i as f64 / 39.0;
                let j1 = g.moreau(1.0, s);
                let j01 = g.moreau(0.1, s);
                let j = g.potential(s);
                assert!(j1 <= j01 + 1e-12, "{name} s={s}");
                assert!(j01 <= j + 1e-12 || j.is_infinite(), "{name} s={s}");
            }
        }
    }

    #[test]
    fn yosida_selection_lies_on_graph() {
        for (name, g) in sample_graphs() {
            for &eps in &[1.0, 0.1, 0.01] {
                for i in 0..60 {
                    let s = -6.0 + 12.0 * i as f64 / 59.0;
                    let r = g.resolvent(eps, s);
                    let y = g.yosida(eps, s);
                    let span = g.subgradient_at(r).expect("resolvent stays in the domain");
                    assert!(
                        y >= span.lo - 1e-9 && y <= span.hi + 1e-9,
                        "{name} eps={eps} s={s}: {y} not in [{}, {}]",
                        span.lo,
                        span.hi
                    );
                }
            }
        }
    }

    #[test]
    fn invalid_constructions_are_rejected() {
        assert!(MonotoneGraph::indicator(0.5, 1.0).is_err());
        assert!(MonotoneGraph::power(0.0).is_err());
        assert!(MonotoneGraph::piecewise_linear(&[(0.0, 1.0), (1.0, 0.0)]).is_err());
        assert!(
            MonotoneGraph::piecewise_linear(&[(-1.0, 2.0)]).is_err(),
            "0 in beta(0) fails"
        );
    }

    proptest! {
        #[test]
        fn yosida_monotone_and_lipschitz(s1 in -20.0f64..20.0, s2 in -20.0f64..20.0, eps_exp in -2i32..1) {
            let eps = 10f64.powi(eps_exp);
            for (_, g) in sample_graphs() {
                let y1 = g.yosida(eps, s1);
                let y2 = g.yosida(eps, s2);
                if s1 <= s2 {
                    prop_assert!(y1 <= y2 + 1e-9 / eps);
                } else {
                    prop_assert!(y2 <= y1 + 1e-9 / eps);
                }
                prop_assert!((y1 - y2).abs() <= (s1 - s2).abs() / eps + 1e-9 / eps);
            }
        }

        #[test]
        fn resolvent_nonexpansive(s1 in -20.0f64..20.0, s2 in -20.0f64..20.0, eps_exp in -2i32..1) {
            let eps = 10f64.powi(eps_exp);
            for (_, g) in sample_graphs() {
                let r1 = g.resolvent(eps, s1);
                let r2 = g.resolvent(eps, s2);
                prop_assert!((r1 - r2).abs() <= (s1 - s2).abs() + 1e-9);
            }
        }
    }
}
