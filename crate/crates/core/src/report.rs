//! Report CSV, figure data, plot scripts and the run summary.
//!
//! `report.csv` columns, in order:
//!
//! ```text
//! method,size,mu_index,lambda,mu,metric,value,status
//! ```
//!
//! Basis-level metrics (`e_l2`, `e_l2_relative`, `o_v`, `s_v`, `actual_size`)
//! leave the parameter columns empty. Cell metrics are `rel_error`,
//! `drift_max` and `preserved` (1 or 0). Values are unclamped; failed cells
//! carry `nan` and the failure reason in `status`. Wall-clock times go to
//! `timings.csv` so the report itself is reproducible byte for byte.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::basis::BasisMethod;
use crate::io::{csv_error, format_f64, write_json};
use crate::rom::{CellRecord, EvaluationReport};
use crate::Result;

pub const REPORT_HEADER: [&str; 8] = [
    "method", "size", "mu_index", "lambda", "mu", "metric", "value", "status",
];

/// Quartiles by linear interpolation between order statistics
/// (`h = (n - 1) p`, the common "type 7" rule).
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxStats {
    pub count: usize,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    /// Most extreme values within 1.5 IQR of the box.
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

pub fn box_stats(values: &[f64]) -> BoxStats {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    v.sort_by(f64::total_cmp);
    let q1 = quantile(&v, 0.25);
    let median = quantile(&v, 0.5);
    let q3 = quantile(&v, 0.75);
    let iqr = q3 - q1;
    let (lo, hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside: Vec<f64> = v.iter().copied().filter(|x| *x >= lo && *x <= hi).collect();
    BoxStats {
        count: v.len(),
        q1,
        median,
        q3,
        whisker_low: inside.first().copied().unwrap_or(f64::NAN),
        whisker_high: inside.last().copied().unwrap_or(f64::NAN),
        outliers: v.iter().copied().filter(|x| *x < lo || *x > hi).collect(),
    }
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    csv::Writer::from_path(path).map_err(csv_error)
}

fn put<I, T>(w: &mut csv::Writer<fs::File>, row: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: AsRef<[u8]>,
{
    w.write_record(row).map_err(csv_error)
}

fn cell_prefix(c: &CellRecord) -> [String; 5] {
    [
        c.method.to_string(),
        c.size.to_string(),
        c.mu_index.to_string(),
        format_f64(c.param.lambda),
        format_f64(c.param.mu),
    ]
}

pub fn write_report_csv(path: &Path, report: &EvaluationReport) -> Result<()> {
    let mut w = writer(path)?;
    put(&mut w, REPORT_HEADER)?;
    let xnorm = report.snapshot_norm_sq;
    for b in &report.bases {
        let status = b.status.label();
        let metrics = [
            ("e_l2", b.e_l2),
            ("e_l2_relative", b.e_l2 / xnorm),
            ("o_v", b.orthonormality),
            ("s_v", b.symplecticity),
            ("actual_size", b.actual_size as f64),
        ];
        for (name, value) in metrics {
            put(
                &mut w,
                [
                    b.method.to_string(),
                    b.size.to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                    name.to_string(),
                    format_f64(value),
                    status.clone(),
                ],
            )?;
        }
    }
    for c in &report.cells {
        let status = c.status.label();
        let (drift, preserved) = match &c.drift {
            Some(d) => (d.max_relative, if d.preserved { 1.0 } else { 0.0 }),
            None => (f64::NAN, f64::NAN),
        };
        for (name, value) in [
            ("rel_error", c.relative_error),
            ("drift_max", drift),
            ("preserved", preserved),
        ] {
            let mut row = cell_prefix(c).to_vec();
            row.extend([name.to_string(), format_f64(value), status.clone()]);
            put(&mut w, row)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_timings_csv(path: &Path, report: &EvaluationReport) -> Result<()> {
    let mut w = writer(path)?;
    put(&mut w, ["method", "size", "mu_index", "seconds"])?;
    for b in &report.bases {
        put(
            &mut w,
            [
                b.method.to_string(),
                b.size.to_string(),
                String::new(),
                format!("{:.6}", b.seconds),
            ],
        )?;
    }
    for c in &report.cells {
        put(
            &mut w,
            [
                c.method.to_string(),
                c.size.to_string(),
                c.mu_index.to_string(),
                format!("{:.6}", c.seconds),
            ],
        )?;
    }
    w.flush()?;
    Ok(())
}

fn methods(report: &EvaluationReport) -> Vec<BasisMethod> {
    let mut m: Vec<BasisMethod> = report.bases.iter().map(|b| b.method).collect();
    m.dedup();
    m
}

fn sizes(report: &EvaluationReport) -> Vec<usize> {
    let mut s: Vec<usize> = report.bases.iter().map(|b| b.size).collect();
    s.sort_unstable();
    s.dedup();
    s
}

/// Per-size median of the successful relative errors.
pub fn median_errors(report: &EvaluationReport, method: BasisMethod) -> Vec<(usize, f64)> {
    sizes(report)
        .into_iter()
        .map(|s| (s, box_stats(&report.errors(method, s)).median))
        .collect()
}

const FIG_PROJECTION: &str = "fig_projection_error";
const FIG_SPECTRA: &str = "fig_spectra";
const FIG_PRESERVATION: &str = "fig_preservation";
const FIG_BOXPLOT: &str = "fig_relerr_boxplot";
const FIG_HAMILTONIAN: &str = "fig_hamiltonian";

/// Writes every figure CSV and its gnuplot script into `dir`; relative
/// errors above `clamp` are clamped here and nowhere else.
pub fn write_figures(dir: &Path, report: &EvaluationReport, clamp: f64) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let methods = methods(report);
    let mut written = Vec::new();

    let path = dir.join(format!("{FIG_PROJECTION}.csv"));
    let mut w = writer(&path)?;
    put(&mut w, ["method", "size", "e_l2", "e_l2_relative"])?;
    for b in report.bases.iter().filter(|b| b.status.is_ok()) {
        put(
            &mut w,
            [
                b.method.to_string(),
                b.size.to_string(),
                format_f64(b.e_l2),
                format_f64(b.e_l2 / report.snapshot_norm_sq),
            ],
        )?;
    }
    w.flush()?;
    written.push(path);

    let path = dir.join(format!("{FIG_SPECTRA}.csv"));
    let mut w = writer(&path)?;
    put(&mut w, ["index", "kind", "value", "normalized"])?;
    let mut weighted = report.spectra.weighted.clone();
    weighted.sort_by(|a, b| b.total_cmp(a));
    for (kind, values) in [
        ("singular", &report.spectra.singular),
        ("symplectic", &report.spectra.symplectic),
        ("weighted", &weighted),
    ] {
        let first = values.first().copied().unwrap_or(1.0);
        for (i, v) in values.iter().enumerate() {
            put(
                &mut w,
                [
                    (i + 1).to_string(),
                    kind.to_string(),
                    format_f64(*v),
                    format_f64(v / first),
                ],
            )?;
        }
    }
    w.flush()?;
    written.push(path);

    let path = dir.join(format!("{FIG_PRESERVATION}.csv"));
    let mut w = writer(&path)?;
    put(&mut w, ["method", "size", "preserved", "total"])?;
    let mut counts: BTreeMap<(BasisMethod, usize), (usize, usize)> = BTreeMap::new();
    for c in &report.cells {
        let e = counts.entry((c.method, c.size)).or_default();
        e.1 += 1;
        if c.status.is_ok() && c.drift.as_ref().is_some_and(|d| d.preserved) {
            e.0 += 1;
        }
    }
    for ((m, s), (p, t)) in &counts {
        put(&mut w, [m.to_string(), s.to_string(), p.to_string(), t.to_string()])?;
    }
    w.flush()?;
    written.push(path);

    let path = dir.join(format!("{FIG_BOXPLOT}.csv"));
    let out_path = dir.join(format!("{FIG_BOXPLOT}_outliers.csv"));
    let mut w = writer(&path)?;
    let mut wo = writer(&out_path)?;
    put(
        &mut w,
        [
            "method",
            "size",
            "count",
            "q1",
            "median",
            "q3",
            "whisker_low",
            "whisker_high",
            "outliers",
        ],
    )?;
    put(&mut wo, ["method", "size", "value"])?;
    for &m in &methods {
        for s in sizes(report) {
            let clamped: Vec<f64> = report.errors(m, s).iter().map(|e| e.min(clamp)).collect();
            if clamped.is_empty() {
                continue;
            }
            let st = box_stats(&clamped);
            put(
                &mut w,
                [
                    m.to_string(),
                    s.to_string(),
                    st.count.to_string(),
                    format_f64(st.q1),
                    format_f64(st.median),
                    format_f64(st.q3),
                    format_f64(st.whisker_low),
                    format_f64(st.whisker_high),
                    st.outliers.len().to_string(),
                ],
            )?;
            for o in &st.outliers {
                put(&mut wo, [m.to_string(), s.to_string(), format_f64(*o)])?;
            }
        }
    }
    w.flush()?;
    wo.flush()?;
    written.push(path);
    written.push(out_path);

    // Drift profile of the first test parameter for the non-symplectic methods.
    let path = dir.join(format!("{FIG_HAMILTONIAN}.csv"));
    let mut w = writer(&path)?;
    put(&mut w, ["method", "size", "step", "drift"])?;
    for c in report
        .cells
        .iter()
        .filter(|c| c.mu_index == 0 && !c.method.kind().is_symplectic())
    {
        if let Some(d) = &c.drift {
            for (i, v) in d.profile.iter().enumerate() {
                put(
                    &mut w,
                    [
                        c.method.to_string(),
                        c.size.to_string(),
                        i.to_string(),
                        format_f64(v.abs()),
                    ],
                )?;
            }
        }
    }
    w.flush()?;
    written.push(path);

    for (name, script) in [
        (FIG_PROJECTION, projection_script(&methods)),
        (FIG_SPECTRA, spectra_script()),
        (FIG_PRESERVATION, preservation_script()),
        (FIG_BOXPLOT, boxplot_script(&methods)),
        (FIG_HAMILTONIAN, hamiltonian_script()),
    ] {
        let p = dir.join(format!("{name}.gp"));
        fs::write(&p, script)?;
        written.push(p);
    }
    Ok(written)
}

fn header(name: &str, ylabel: &str, logy: bool) -> String {
    let mut s = format!(
        "set terminal pngcairo size 900,600\nset output '{name}.png'\nset datafile separator ','\nset key outside right\nset grid\nset ylabel '{ylabel}'\n"
    );
    if logy {
        s.push_str("set logscale y\nset format y '10^{%L}'\n");
    }
    s
}

fn projection_script(methods: &[BasisMethod]) -> String {
    let mut s = header(FIG_PROJECTION, "relative projection error", true);
    s.push_str("set xlabel 'basis size 2k'\nplot ");
    let lines: Vec<String> = methods
        .iter()
        .map(|m| format!("'{FIG_PROJECTION}.csv' using 2:(strcol(1) eq '{m}' ? $4 : 1/0) with linespoints title '{m}'"))
        .collect();
    s.push_str(&lines.join(", \\\n     "));
    s.push('\n');
    s
}

fn spectra_script() -> String {
    let mut s = header(FIG_SPECTRA, "normalized value", true);
    s.push_str("set xlabel 'index'\nplot ");
    let lines: Vec<String> = ["singular", "symplectic", "weighted"]
        .iter()
        .map(|k| format!("'{FIG_SPECTRA}.csv' using 1:(strcol(2) eq '{k}' ? $4 : 1/0) with points title '{k}'"))
        .collect();
    s.push_str(&lines.join(", \\\n     "));
    s.push('\n');
    s
}

fn preservation_script() -> String {
    let mut s = header(FIG_PRESERVATION, "method", false);
    s.push_str(
        "set xlabel 'basis size 2k'\nset cblabel 'preserved fraction'\nset cbrange [0:1]\n\
         methods = system(\"tail -n +2 fig_preservation.csv | cut -d, -f1 | uniq\")\n\
         idx(m) = sum [i=1:words(methods)] (word(methods, i) eq m ? i : 0)\n\
         set ytics ()\n\
         do for [i=1:words(methods)] { set ytics add (word(methods, i) i) }\n\
         plot 'fig_preservation.csv' every ::1 using 2:(idx(strcol(1))):($3/$4) with points pt 5 ps 3 palette notitle\n",
    );
    s
}

fn boxplot_script(methods: &[BasisMethod]) -> String {
    let mut s = header(FIG_BOXPLOT, "relative error (clamped)", true);
    s.push_str("set xlabel 'basis size 2k'\nset boxwidth 1.2\nplot ");
    let lines: Vec<String> = methods
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let off = i as f64 * 1.5 - 4.5;
            format!(
                "'{FIG_BOXPLOT}.csv' using ($2+{off}):(strcol(1) eq '{m}' ? $4 : 1/0):7:8:6 with candlesticks whiskerbars title '{m}'"
            )
        })
        .collect();
    s.push_str(&lines.join(", \\\n     "));
    s.push('\n');
    s
}

fn hamiltonian_script() -> String {
    let mut s = header(FIG_HAMILTONIAN, "|H(t) - H(0)| / H_rel", true);
    s.push_str(&format!(
        "set xlabel 'time step'\nplot '{FIG_HAMILTONIAN}.csv' every ::1 using 3:4 with lines lc variable notitle\n"
    ));
    s
}

#[derive(Debug, Serialize)]
struct MethodSummary {
    method: BasisMethod,
    preserved: usize,
    cells: usize,
    failed_cells: usize,
    sizes: Vec<SizeSummary>,
}

#[derive(Debug, Serialize)]
struct SizeSummary {
    size: usize,
    status: String,
    e_l2: f64,
    o_v: f64,
    s_v: f64,
    median_rel_error: f64,
    warnings: Vec<String>,
}

/// Non-finite values are written as `null`.
#[derive(Debug, Serialize)]
struct Summary {
    test_params: usize,
    snapshot_norm_sq: f64,
    methods: Vec<MethodSummary>,
}

pub fn write_summary(path: &Path, report: &EvaluationReport) -> Result<()> {
    let methods = methods(report)
        .into_iter()
        .map(|m| {
            let (preserved, cells) = report.preservation(m);
            let failed_cells = report
                .cells
                .iter()
                .filter(|c| c.method == m && !c.status.is_ok())
                .count();
            let sizes = report
                .bases
                .iter()
                .filter(|b| b.method == m)
                .map(|b| SizeSummary {
                    size: b.size,
                    status: b.status.label(),
                    e_l2: b.e_l2,
                    o_v: b.orthonormality,
                    s_v: b.symplecticity,
                    median_rel_error: box_stats(&report.errors(m, b.size)).median,
                    warnings: b.warnings.clone(),
                })
                .collect();
            MethodSummary {
                method: m,
                preserved,
                cells,
                failed_cells,
                sizes,
            }
        })
        .collect();
    write_json(
        path,
        &Summary {
            test_params: report.test_params.len(),
            snapshot_norm_sq: report.snapshot_norm_sq,
            methods,
        },
    )
}
