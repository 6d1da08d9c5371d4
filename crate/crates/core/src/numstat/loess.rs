use super::StatError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degree {
    Constant,
    Linear,
}

impl Degree {
    pub fn as_usize(self) -> usize {
        match self {
            Degree::Constant => 0,
            Degree::Linear => 1,
        }
    }
}

impl TryFrom<usize> for Degree {
    type Error = StatError;
    fn try_from(d: usize) -> Result<Self, StatError> {
        match d {
            0 => Ok(Degree::Constant),
            1 => Ok(Degree::Linear),
            _ => Err(StatError::Domain(format!("loess degree must be 0 or 1, got {d}"))),
        }
    }
}

/// A LOESS smoother bound to one set of points.
///
/// The neighbourhood of a target is the `span` nearest points (a contiguous
/// run, since x is sorted). When `span` exceeds n the bandwidth is widened by
/// `(span - n) / 2` mean spacings beyond the farthest point.
#[derive(Debug, Clone)]
pub struct Loess<'a> {
    xs: &'a [f64],
    ys: &'a [f64],
    weights: Option<&'a [f64]>,
    span: usize,
    degree: Degree,
}

impl<'a> Loess<'a> {
    pub fn new(
        xs: &'a [f64],
        ys: &'a [f64],
        span: usize,
        degree: Degree,
        weights: Option<&'a [f64]>,
    ) -> Result<Self, StatError> {
        if xs.len() != ys.len() {
            return Err(StatError::LengthMismatch { left: xs.len(), right: ys.len() });
        }
        if xs.is_empty() {
            return Err(StatError::TooFewPoints { needed: 1, got: 0 });
        }
        if span < degree.as_usize() + 1 {
            return Err(StatError::SpanTooSmall { span, degree: degree.as_usize() });
        }
        if let Some(i) = xs.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(StatError::NonMonotoneX { index: i + 1 });
        }
        if xs.iter().chain(ys).any(|v| !v.is_finite()) {
            return Err(StatError::Domain("non-finite value in loess input".into()));
        }
        if let Some(w) = weights {
            if w.len() != xs.len() {
                return Err(StatError::BadWeights(format!("expected {} weights, got {}", xs.len(), w.len())));
            }
            if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(StatError::BadWeights("weights must be finite and non-negative".into()));
            }
        }
        Ok(Loess { xs, ys, weights, span, degree })
    }

    fn window(&self, x0: f64) -> (usize, usize) {
        let n = self.xs.len();
        let q = self.span.min(n);
        let p = self.xs.partition_point(|&x| x < x0);
        let (mut lo, mut hi) = (p, p);
        while hi - lo < q {
            if lo == 0 {
                hi += 1;
            } else if hi == n {
                lo -= 1;
            } else if x0 - self.xs[lo - 1] <= self.xs[hi] - x0 {
                lo -= 1;
            } else {
                hi += 1;
            }
        }
        (lo, hi)
    }

    fn bandwidth(&self, x0: f64, lo: usize, hi: usize) -> f64 {
        let n = self.xs.len();
        let mut h = (x0 - self.xs[lo]).max(self.xs[hi - 1] - x0);
        if self.span > n {
            let spacing = if n > 1 { (self.xs[n - 1] - self.xs[0]) / (n - 1) as f64 } else { 1.0 };
            h += ((self.span - n) / 2) as f64 * spacing;
        }
        h
    }

    /// Local fit at `x0`, or None when every neighbour carries zero weight.
    pub fn try_fit_at(&self, x0: f64) -> Option<f64> {
        let (lo, hi) = self.window(x0);
        let h = self.bandwidth(x0, lo, hi);
        let mut w = Vec::with_capacity(hi - lo);
        let mut total = 0.0;
        for j in lo..hi {
            let d = (self.xs[j] - x0).abs();
            let k = if h > 0.0 {
                let u = d / h;
                if u < 1.0 {
                    let t = 1.0 - u * u * u;
                    t * t * t
                } else {
                    0.0
                }
            } else if d == 0.0 {
                1.0
            } else {
                0.0
            };
            let r = self.weights.map_or(1.0, |rw| rw[j]);
            w.push(k * r);
            total += k * r;
        }
        if !(total > 0.0) {
            return None;
        }
        let xs = &self.xs[lo..hi];
        let ys = &self.ys[lo..hi];
        let mut xbar = 0.0;
        let mut ybar = 0.0;
        for ((wi, xi), yi) in w.iter().zip(xs).zip(ys) {
            xbar += wi * xi;
            ybar += wi * yi;
        }
        xbar /= total;
        ybar /= total;
        if self.degree == Degree::Constant {
            return Some(ybar);
        }
        let mut sxx = 0.0;
        let mut sxy = 0.0;
        for ((wi, xi), yi) in w.iter().zip(xs).zip(ys) {
            let dx = xi - xbar;
            sxx += wi * dx * dx;
            sxy += wi * dx * (yi - ybar);
        }
        let n = self.xs.len();
        let range = self.xs[n - 1] - self.xs[0];
        // slope only when the weighted spread is resolvable in floating point
        if (sxx / total).sqrt() > f64::EPSILON.sqrt() * range {
            Some(ybar + sxy / sxx * (x0 - xbar))
        } else {
            Some(ybar)
        }
    }

    /// Local fit at `x0`; falls back to the nearest observed y when the
    /// neighbourhood carries no weight.
    pub fn fit_at(&self, x0: f64) -> f64 {
        self.try_fit_at(x0).unwrap_or_else(|| {
            let (lo, hi) = self.window(x0);
            let nearest =
                (lo..hi).min_by(|&a, &b| (self.xs[a] - x0).abs().total_cmp(&(self.xs[b] - x0).abs())).unwrap_or(0);
            self.ys[nearest]
        })
    }

    /// Fitted values at every input point.
    pub fn smooth(&self) -> Vec<f64> {
        self.xs.iter().zip(self.ys).map(|(&x, &y)| self.try_fit_at(x).unwrap_or(y)).collect()
    }
}

/// Smooths `ys` at each of `xs`.
pub fn loess(
    xs: &[f64],
    ys: &[f64],
    span: usize,
    degree: usize,
    weights: Option<&[f64]>,
) -> Result<Vec<f64>, StatError> {
    Ok(Loess::new(xs, ys, span, Degree::try_from(degree)?, weights)?.smooth())
}
