use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{ssim_normalized, SsimConstants};
use crate::dataset::PairedSample;
use crate::model::{Direction, PerDirection, UniTacModel};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub label: String,
    pub samples: usize,
    pub nmae: PerDirection,
    pub ssim: PerDirection,
}

#[derive(Debug, Clone, Default)]
struct Acc {
    n: usize,
    nmae: [f64; 4],
    ssim: [f64; 4],
}

impl Acc {
    fn add(&mut self, other: &Acc) {
        self.n += other.n;
        for i in 0..4 {
            self.nmae[i] += other.nmae[i];
            self.ssim[i] += other.ssim[i];
        }
    }

    fn row(&self, label: &str) -> ReportRow {
        let n = self.n as f64;
        ReportRow {
            label: label.to_string(),
            samples: self.n,
            nmae: PerDirection(self.nmae.map(|v| v / n)),
            ssim: PerDirection(self.ssim.map(|v| v / n)),
        }
    }
}

/// Per-object NMAE / SSIM for the four reconstruction directions, plus
/// sample-weighted aggregates over seen and unseen objects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub objects: Vec<ReportRow>,
    pub all_seen: Option<ReportRow>,
    pub unseen: Option<ReportRow>,
}

pub fn build_eval_report(
    model: &UniTacModel,
    test: &[PairedSample],
    unseen: &BTreeSet<String>,
    consts: &SsimConstants,
) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(Error::Data(
            "cannot build a report from an empty test set".into(),
        ));
    }
    consts.validate()?;
    let mut per_object: BTreeMap<&str, Acc> = BTreeMap::new();
    for s in test {
        let pass = model.pass(s)?;
        let acc = per_object.entry(s.meta().object_id.as_str()).or_default();
        acc.n += 1;
        for d in Direction::ALL {
            let i = d.index();
            acc.nmae[i] += pass.nmae(d);
            acc.ssim[i] += ssim_normalized(&pass.recon[i], pass.target(d.to), consts)?;
        }
    }

    let (mut seen_acc, mut unseen_acc) = (Acc::default(), Acc::default());
    let mut objects = Vec::with_capacity(per_object.len());
    for (id, acc) in &per_object {
        if unseen.contains(*id) {
            unseen_acc.add(acc);
        } else {
            seen_acc.add(acc);
        }
        objects.push(acc.row(id));
    }
    Ok(EvalReport {
        objects,
        all_seen: (seen_acc.n > 0).then(|| seen_acc.row("All Seen")),
        unseen: (unseen_acc.n > 0).then(|| unseen_acc.row("Unseen")),
    })
}

impl EvalReport {
    pub fn rows(&self) -> impl Iterator<Item = (&ReportRow, bool)> {
        self.objects
            .iter()
            .map(|r| (r, false))
            .chain(self.all_seen.iter().map(|r| (r, true)))
            .chain(self.unseen.iter().map(|r| (r, true)))
    }

    /// Long format: one row per (object or aggregate) × direction.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("object,kind,direction,samples,nmae,ssim\n");
        for (row, aggregate) in self.rows() {
            let kind = if aggregate { "aggregate" } else { "object" };
            for d in Direction::ALL {
                let _ = writeln!(
                    out,
                    "{},{kind},{},{},{},{}",
                    row.label,
                    d.slug(),
                    row.samples,
                    row.nmae.get(d),
                    row.ssim.get(d)
                );
            }
        }
        out
    }

    /// Wide format: one row per object or aggregate, NMAE and SSIM columns per direction.
    pub fn to_table_csv(&self) -> String {
        let mut out = String::from("object,samples");
        for d in Direction::ALL {
            let _ = write!(out, ",{0}_nmae,{0}_ssim", d.slug());
        }
        out.push('\n');
        for (row, _) in self.rows() {
            let _ = write!(out, "{},{}", row.label, row.samples);
            for d in Direction::ALL {
                let _ = write!(out, ",{},{}", row.nmae.get(d), row.ssim.get(d));
            }
            out.push('\n');
        }
        out
    }

    /// Fixed-width "NMAE / SSIM" table grouped by source sensor.
    pub fn to_pretty(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<20}{:^34}{:^34}",
            "", "From uSkin", "From PapillArray"
        );
        let _ = writeln!(
            out,
            "{:<20}{:^17}{:^17}{:^17}{:^17}",
            "Object", "To uSkin", "To Papill", "To Papill", "To uSkin"
        );
        let _ = writeln!(out, "{}", "-".repeat(88));
        for (row, aggregate) in self.rows() {
            if aggregate {
                let _ = writeln!(out, "{}", "-".repeat(88));
            }
            let _ = write!(out, "{:<20}", row.label);
            for d in Direction::ALL {
                let cell = format!("{:.3} / {:.3}", row.nmae.get(d), row.ssim.get(d));
                let _ = write!(out, "{cell:^17}");
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::tiny_data;
    use crate::sim::{builtin_objects, generate_paired_dataset, PressGrid};

    #[test]
    fn aggregates_are_sample_weighted() {
        let mut data = tiny_data();
        let grid = PressGrid {
            angles_deg: vec![5.0],
            forces_n: vec![6.0],
        };
        data.extend(generate_paired_dataset(&builtin_objects()[6..], &grid, 5).unwrap());
        let model = UniTacModel::init(&data, 0.0, 2).unwrap();
        let unseen: BTreeSet<String> = ["irregular".to_string()].into();
        let report = build_eval_report(&model, &data, &unseen, &SsimConstants::default()).unwrap();

        let seen_rows: Vec<&ReportRow> = report
            .objects
            .iter()
            .filter(|r| r.label != "irregular")
            .collect();
        let all = report.all_seen.as_ref().unwrap();
        let n: usize = seen_rows.iter().map(|r| r.samples).sum();
        assert_eq!(all.samples, n);
        for d in Direction::ALL {
            let weighted: f64 = seen_rows
                .iter()
                .map(|r| r.nmae.get(d) * r.samples as f64)
                .sum::<f64>()
                / n as f64;
            assert!((weighted - all.nmae.get(d)).abs() < 1e-12);
        }
        let unseen_row = report.unseen.as_ref().unwrap();
        let irregular = report
            .objects
            .iter()
            .find(|r| r.label == "irregular")
            .unwrap();
        assert_eq!(unseen_row.samples, 4);
        assert_eq!(unseen_row.nmae, irregular.nmae);

        let csv = report.to_csv();
        assert_eq!(csv.lines().count(), 1 + 4 * (report.objects.len() + 2));
        let header = report.to_table_csv().lines().next().unwrap().to_string();
        assert_eq!(header.split(',').count(), 2 + 8);
        assert!(report.to_pretty().contains("All Seen"));
        for (row, _) in report.rows() {
            for v in row.ssim.0 {
                assert!((-1.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn empty_test_set_is_rejected() {
        let data = tiny_data();
        let model = UniTacModel::init(&data, 0.0, 2).unwrap();
        assert!(
            build_eval_report(&model, &[], &BTreeSet::new(), &SsimConstants::default()).is_err()
        );
    }
}
