use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::records::ResultRecord;
use crate::error::{Error, Result};
use crate::learners::LearnerKind;
use crate::metrics::{rpd, rpd_band};
use crate::mtr::Method;

fn ok_records(records: &[ResultRecord]) -> Vec<&ResultRecord> {
    records.iter().filter(|r| r.is_ok()).collect()
}

fn target_names(records: &[&ResultRecord]) -> Vec<String> {
    records
        .first()
        .and_then(|r| r.report.as_ref())
        .map(|rep| rep.per_target.iter().map(|m| m.target.clone()).collect())
        .unwrap_or_default()
}

/// Lays out `rows` as left-aligned, space-padded columns.
fn table(header: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &[String]| {
        let text: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c:<w$}"))
            .collect();
        let _ = writeln!(out, "{}", text.join("  ").trim_end());
    };
    line(header);
    line(&widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>());
    for row in rows {
        line(row);
    }
    out
}

/// RPT per target and its average for every non-ST record; the best
/// average of each learner is marked with `*` (all tied rows are marked).
pub fn render_rpt_table(records: &[ResultRecord]) -> Result<String> {
    let ok = ok_records(records);
    if ok.is_empty() {
        return Err(Error::EmptyTable("no successful records to tabulate".into()));
    }
    let learners: Vec<LearnerKind> = {
        let mut v: Vec<LearnerKind> = ok.iter().map(|r| r.learner).collect();
        v.dedup();
        v.sort();
        v.dedup();
        v
    };
    for l in &learners {
        if !ok.iter().any(|r| r.method == Method::St && r.learner == *l) {
            return Err(Error::InvalidParameter(format!("missing ST baseline for learner {l}")));
        }
    }
    let names = target_names(&ok);
    let mut rows = Vec::new();
    let mut averages = Vec::new();
    for r in ok.iter().filter(|r| r.method != Method::St) {
        let rep = r.report.as_ref().expect("filtered to successful records");
        let cells: Vec<f64> = rep
            .per_target
            .iter()
            .map(|m| {
                m.rpt
                    .ok_or_else(|| Error::InvalidParameter(format!("{}: RPT missing for target {}", r.label(), m.target)))
            })
            .collect::<Result<_>>()?;
        let avg = cells.iter().sum::<f64>() / cells.len() as f64;
        averages.push((r.learner, format!("{avg:.2}")));
        let mut row = vec![r.method.to_string(), r.learner.to_string()];
        row.extend(cells.iter().map(|v| format!("{v:.2}")));
        row.push(format!("{avg:.2}"));
        rows.push(row);
    }
    for (i, (learner, shown)) in averages.iter().enumerate() {
        let best = averages
            .iter()
            .filter(|(l, _)| l == learner)
            .map(|(_, s)| s.parse::<f64>().unwrap_or(f64::NEG_INFINITY))
            .fold(f64::NEG_INFINITY, f64::max);
        if shown.parse::<f64>().ok() == Some(best) {
            rows[i].last_mut().expect("average cell").push('*');
        }
    }
    let mut header = vec!["method".to_string(), "learner".to_string()];
    header.extend(names);
    header.push("average".into());
    Ok(table(&header, &rows))
}

/// Stub written in place of the RPT table when baselines are missing.
pub fn rpt_stub(reason: &str) -> String {
    format!("RPT table unavailable: {reason}\nAdd ST entries for every learner to the grid to enable it.\n")
}

/// `method,learner,arrmse` rows plus a final `ST_min` reference row holding
/// the lowest ST aRRMSE.
pub fn render_arrmse_chart_data(records: &[ResultRecord]) -> Result<String> {
    let ok = ok_records(records);
    if ok.is_empty() {
        return Err(Error::EmptyTable("no successful records to chart".into()));
    }
    let mut out = String::from("method,learner,arrmse\n");
    for r in &ok {
        let _ = writeln!(out, "{},{},{:.6}", r.method, r.learner, r.arrmse().expect("successful record"));
    }
    let best_st = ok
        .iter()
        .filter(|r| r.method == Method::St)
        .min_by(|a, b| a.arrmse().unwrap_or(f64::INFINITY).total_cmp(&b.arrmse().unwrap_or(f64::INFINITY)));
    match best_st {
        Some(r) => {
            let _ = writeln!(out, "ST_min,{},{:.6}", r.learner, r.arrmse().expect("successful record"));
        }
        None => log::warn!("no ST records; the reference row is omitted"),
    }
    Ok(out)
}

/// Groups tied records as `"MTSG (SVR_R, RF); DRS (RF)"`.
fn tie_label(tied: &[&ResultRecord], total: usize) -> String {
    if tied.len() == total && total > 1 {
        return "All models".into();
    }
    let mut groups: Vec<(Method, Vec<String>)> = Vec::new();
    for r in tied {
        match groups.iter_mut().find(|(m, _)| *m == r.method) {
            Some((_, ls)) => ls.push(r.learner.to_string()),
            None => groups.push((r.method, vec![r.learner.to_string()])),
        }
    }
    groups
        .into_iter()
        .map(|(m, ls)| format!("{m} ({})", ls.join(", ")))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Best model(s) per target by RMSE, with RPD and band computed from the
/// supplied reference SDs. Ties are decided on the displayed RMSE.
pub fn render_rpd_table(records: &[ResultRecord], reference_sds: &BTreeMap<String, f64>) -> Result<String> {
    let ok = ok_records(records);
    if ok.is_empty() {
        return Err(Error::EmptyTable("no successful records to tabulate".into()));
    }
    let names = target_names(&ok);
    let mut rows = Vec::new();
    for (t, name) in names.iter().enumerate() {
        let sd = *reference_sds
            .get(name)
            .ok_or_else(|| Error::InvalidParameter(format!("missing reference SD for target {name}")))?;
        let rmse_of = |r: &ResultRecord| r.report.as_ref().expect("successful record").per_target[t].rmse;
        let best = ok.iter().map(|r| rmse_of(r)).fold(f64::INFINITY, f64::min);
        let shown = format!("{best:.2}");
        let tied: Vec<&ResultRecord> = ok
            .iter()
            .copied()
            .filter(|r| format!("{:.2}", rmse_of(r)) == shown)
            .collect();
        let ratio = rpd(sd, best)?;
        rows.push(vec![
            name.clone(),
            tie_label(&tied, ok.len()),
            shown,
            format!("{ratio:.2}"),
            rpd_band(ratio)?.to_string(),
        ]);
    }
    let header = ["target", "best", "rmse", "rpd", "band"].map(String::from);
    Ok(table(&header, &rows))
}

/// Reference SDs recorded in the first successful record.
pub fn reference_sds(records: &[ResultRecord]) -> BTreeMap<String, f64> {
    records
        .iter()
        .find_map(|r| r.report.as_ref())
        .map(|rep| rep.per_target.iter().map(|m| (m.target.clone(), m.reference_sd)).collect())
        .unwrap_or_default()
}

/// Appendix-style aRRMSE grid: methods as rows, learners as columns.
pub fn render_arrmse_table(records: &[ResultRecord]) -> Result<String> {
    let ok = ok_records(records);
    if ok.is_empty() {
        return Err(Error::EmptyTable("no successful records to tabulate".into()));
    }
    let mut learners: Vec<LearnerKind> = ok.iter().map(|r| r.learner).collect();
    learners.sort();
    learners.dedup();
    let mut cells: BTreeMap<(Method, LearnerKind), f64> = BTreeMap::new();
    for r in &ok {
        cells.entry((r.method, r.learner)).or_insert(r.arrmse().expect("successful record"));
    }
    let mut header = vec!["method".to_string()];
    header.extend(learners.iter().map(|l| l.to_string()));
    let rows: Vec<Vec<String>> = Method::ALL
        .iter()
        .filter(|m| learners.iter().any(|l| cells.contains_key(&(**m, *l))))
        .map(|m| {
            let mut row = vec![m.to_string()];
            row.extend(learners.iter().map(|l| {
                cells
                    .get(&(*m, *l))
                    .map(|v| format!("{v:.4}"))
                    .unwrap_or_else(|| "-".into())
            }));
            row
        })
        .collect();
    Ok(table(&header, &rows))
}
