use serde::Serialize;

const EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParetoLabeling {
    pub points: Vec<(f64, f64)>,
    /// Not weakly dominated by any single other point.
    pub strict_pareto: Vec<bool>,
    /// On the upper concave envelope of the strict set.
    pub convex_pareto: Vec<bool>,
}

impl ParetoLabeling {
    pub fn convex_indices(&self) -> Vec<usize> {
        (0..self.points.len()).filter(|&i| self.convex_pareto[i]).collect()
    }

    pub fn strict_indices(&self) -> Vec<usize> {
        (0..self.points.len()).filter(|&i| self.strict_pareto[i]).collect()
    }
}

fn dominates(p: (f64, f64), q: (f64, f64)) -> bool {
    p.0 >= q.0 && p.1 >= q.1 && (p.0 > q.0 || p.1 > q.1)
}

/// Labels `(savings, quality)` points; both axes are maximised.
pub fn pareto_set(points: &[(f64, f64)]) -> ParetoLabeling {
    let strict: Vec<bool> = points
        .iter()
        .map(|&q| !points.iter().any(|&p| dominates(p, q)))
        .collect();

    let mut order: Vec<usize> = (0..points.len()).filter(|&i| strict[i]).collect();
    order.sort_by(|&i, &j| points[i].0.total_cmp(&points[j].0).then(points[j].1.total_cmp(&points[i].1)));
    // Monotone-chain upper hull; collinear points are kept.
    let mut hull: Vec<usize> = Vec::new();
    for i in order {
        while hull.len() >= 2 {
            let (o, a, b) = (points[hull[hull.len() - 2]], points[hull[hull.len() - 1]], points[i]);
            let cross = (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
            if cross > EPS {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut convex = vec![false; points.len()];
    for i in hull {
        convex[i] = true;
    }
    ParetoLabeling {
        points: points.to_vec(),
        strict_pareto: strict,
        convex_pareto: convex,
    }
}
