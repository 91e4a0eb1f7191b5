use crate::error::{Error, Result};

/// Smallest ratio whose piecewise-linear quality reaches `floor`.
///
/// Anchors are `(ratio, quality)` pairs, strictly increasing in ratio.
pub fn estimate_threshold(anchors: &[(f64, f64)], floor: f64) -> Result<f64> {
    if anchors.is_empty() {
        return Err(Error::NoThreshold { floor });
    }
    if anchors.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::Domain("anchor ratios must be strictly increasing".into()));
    }
    let (r0, q0) = anchors[0];
    if q0 >= floor {
        return Ok(r0);
    }
    for w in anchors.windows(2) {
        let ((ra, qa), (rb, qb)) = (w[0], w[1]);
        if qb >= floor {
            // qa < floor <= qb, so the segment crosses the floor.
            return Ok(ra + (floor - qa) / (qb - qa) * (rb - ra));
        }
    }
    Err(Error::NoThreshold { floor })
}
