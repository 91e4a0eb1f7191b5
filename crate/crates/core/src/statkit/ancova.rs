use std::collections::BTreeSet;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AncovaObservation {
    pub quality: f64,
    pub task: String,
    pub compression: String,
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AncovaSource {
    Length,
    Task,
    Compression,
    Interaction,
    Residual,
}

impl AncovaSource {
    pub fn label(self) -> &'static str {
        match self {
            AncovaSource::Length => "length",
            AncovaSource::Task => "task",
            AncovaSource::Compression => "compression",
            AncovaSource::Interaction => "task:compression",
            AncovaSource::Residual => "residual",
        }
    }
}

impl fmt::Display for AncovaSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AncovaRow {
    pub source: AncovaSource,
    pub ss: f64,
    pub df: usize,
    pub ms: f64,
    pub f: Option<f64>,
    pub p: Option<f64>,
    pub partial_eta_sq: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AncovaTable {
    pub n: usize,
    pub rows: Vec<AncovaRow>,
}

impl AncovaTable {
    pub fn row(&self, source: AncovaSource) -> &AncovaRow {
        self.rows.iter().find(|r| r.source == source).expect("every source has a row")
    }

    pub fn residual_df(&self) -> usize {
        self.row(AncovaSource::Residual).df
    }
}

/// Column blocks of the dummy-coded design, in fitting order.
struct Design {
    y: DVector<f64>,
    intercept: Vec<f64>,
    blocks: Vec<(AncovaSource, Vec<Vec<f64>>)>,
}

fn levels<'a>(values: impl Iterator<Item = &'a str>) -> Vec<&'a str> {
    values.collect::<BTreeSet<_>>().into_iter().collect()
}

fn build_design(records: &[AncovaObservation]) -> Result<Design> {
    let tasks = levels(records.iter().map(|r| r.task.as_str()));
    let comps = levels(records.iter().map(|r| r.compression.as_str()));
    if tasks.len() < 2 {
        return Err(Error::Design { term: "task".into() });
    }
    if comps.len() < 2 {
        return Err(Error::Design { term: "compression".into() });
    }
    if let Some(r) = records.iter().find(|r| !r.quality.is_finite() || !r.length.is_finite()) {
        return Err(Error::Domain(format!("non-finite observation {r:?}")));
    }
    let n = records.len();
    let dummy = |lvls: &[&str], pick: fn(&AncovaObservation) -> &str| -> Vec<Vec<f64>> {
        lvls[1..]
            .iter()
            .map(|l| records.iter().map(|r| f64::from(u8::from(pick(r) == *l))).collect())
            .collect()
    };
    let task_cols = dummy(&tasks, |r| &r.task);
    let comp_cols = dummy(&comps, |r| &r.compression);
    let mut inter = Vec::new();
    for t in &task_cols {
        for c in &comp_cols {
            inter.push(t.iter().zip(c).map(|(a, b)| a * b).collect());
        }
    }
    Ok(Design {
        y: DVector::from_iterator(n, records.iter().map(|r| r.quality)),
        intercept: vec![1.0; n],
        blocks: vec![
            (AncovaSource::Length, vec![records.iter().map(|r| r.length).collect()]),
            (AncovaSource::Task, task_cols),
            (AncovaSource::Compression, comp_cols),
            (AncovaSource::Interaction, inter),
        ],
    })
}

impl Design {
    fn matrix(&self, include: &[AncovaSource]) -> DMatrix<f64> {
        let mut cols: Vec<&Vec<f64>> = vec![&self.intercept];
        for (src, block) in &self.blocks {
            if include.contains(src) {
                cols.extend(block.iter());
            }
        }
        DMatrix::from_fn(self.y.len(), cols.len(), |i, j| cols[j][i])
    }

    /// Residual sum of squares of the least-squares fit on `include`.
    fn rss(&self, include: &[AncovaSource]) -> f64 {
        let q = self.matrix(include).qr().q();
        let fitted = &q * (q.transpose() * &self.y);
        (&self.y - fitted).norm_squared()
    }

    /// Names the first term whose columns are linearly dependent on the
    /// columns fitted before it.
    fn check_rank(&self) -> Result<()> {
        let all = [
            AncovaSource::Length,
            AncovaSource::Task,
            AncovaSource::Compression,
            AncovaSource::Interaction,
        ];
        let x = self.matrix(&all);
        let r = x.clone().qr().r();
        let mut owner = vec!["intercept".to_string()];
        for (src, block) in &self.blocks {
            owner.extend(std::iter::repeat_n(src.label().to_string(), block.len()));
        }
        for j in 0..x.ncols() {
            let scale = x.column(j).norm();
            if scale == 0.0 || r[(j, j)].abs() <= 1e-9 * scale {
                return Err(Error::Design { term: owner[j].clone() });
            }
        }
        Ok(())
    }
}

/// Two-factor ANCOVA with one covariate, Type II sums of squares.
pub fn ancova(records: &[AncovaObservation]) -> Result<AncovaTable> {
    use AncovaSource::*;
    let design = build_design(records)?;
    let n = records.len();
    let p: usize = 1 + design.blocks.iter().map(|b| b.1.len()).sum::<usize>();
    if n <= p {
        return Err(Error::InsufficientData(format!("{n} observations for {p} model parameters")));
    }
    design.check_rank()?;

    let rss_full = design.rss(&[Length, Task, Compression, Interaction]);
    let mains = design.rss(&[Length, Task, Compression]);
    let type2 = |drop: AncovaSource| -> f64 {
        let others: Vec<AncovaSource> = [Length, Task, Compression].into_iter().filter(|s| *s != drop).collect();
        design.rss(&others) - mains
    };
    let ss_length = design.rss(&[Task, Compression, Interaction]) - rss_full;
    let df_res = n - p;
    let ms_res = rss_full / df_res as f64;
    let df_of = |src: AncovaSource| design.blocks.iter().find(|b| b.0 == src).map_or(0, |b| b.1.len());

    let mut rows = Vec::new();
    for (src, ss) in [
        (Length, ss_length),
        (Task, type2(Task)),
        (Compression, type2(Compression)),
        (Interaction, mains - rss_full),
    ] {
        let ss = ss.max(0.0);
        let df = df_of(src);
        let ms = ss / df as f64;
        let (f, pval) = if ms_res > 0.0 {
            let f = ms / ms_res;
            let dist = FisherSnedecor::new(df as f64, df_res as f64).map_err(|e| Error::Degenerate(e.to_string()))?;
            (Some(f), Some(dist.sf(f)))
        } else {
            (None, None)
        };
        let eta = (ss + rss_full > 0.0).then(|| ss / (ss + rss_full));
        rows.push(AncovaRow { source: src, ss, df, ms, f, p: pval, partial_eta_sq: eta });
    }
    rows.push(AncovaRow {
        source: Residual,
        ss: rss_full,
        df: df_res,
        ms: ms_res,
        f: None,
        p: None,
        partial_eta_sq: None,
    });
    Ok(AncovaTable { n, rows })
}
