//! CSV tables and gnuplot scripts.
//!
//! Tables are UTF-8, comma separated, LF terminated, with a header row.
//! Numbers are written with 9 significant digits in base units (bits,
//! bits/s, seconds); `*_mbps` columns repeat rates in Mbps.

use std::collections::BTreeSet;
use std::io::{self, Write};

use crate::sim::SimStats;
use crate::sweep::{GridPoint, MonteCarloSummary, ProtocolComparison, SweepRow};
use crate::units::MBPS;

/// Formats `x` with 9 significant digits, trailing zeros trimmed.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..15).contains(&exp) {
        let rounded: f64 = sci.parse().expect("float");
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{rounded:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

/// A rectangular table of already formatted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("utf-8")
    }
}

const POINT_COLUMNS: [&str; 6] = ["file_mixture_id", "rtt_s", "p_p", "p", "r_t_bps", "r_t_mbps"];

fn point_cells(pt: &GridPoint) -> Vec<String> {
    vec![
        pt.file_mixture_id.clone(),
        fmt_num(pt.rtt),
        fmt_num(pt.p_p),
        fmt_num(pt.p),
        fmt_num(pt.r_t),
        fmt_num(pt.r_t / MBPS),
    ]
}

const MC_COLUMNS: [&str; 7] = [
    "mc_active_fraction",
    "mc_nbs_frac",
    "mc_nbs_required",
    "mc_nbs_frac_std",
    "mc_nbs_required_std",
    "mc_completed",
    "mc_mean_completion_s",
];

fn mc_cells(mc: &MonteCarloSummary) -> Vec<String> {
    vec![
        fmt_num(mc.mean_active_fraction),
        fmt_num(mc.mean_nbs_fractional),
        fmt_num(mc.nbs_required),
        fmt_num(mc.nbs_fractional_std),
        fmt_num(mc.nbs_required_std),
        mc.completed.to_string(),
        fmt_opt(mc.mean_completion_time),
    ]
}

/// One row per grid point: parameters, goodput, activity and station counts.
pub fn sweep_table(rows: &[SweepRow], kw_per_station: Option<f64>) -> Table {
    let with_mc = rows.iter().any(|r| r.monte_carlo.is_some());
    let mut header = vec!["protocol"];
    header.extend(POINT_COLUMNS);
    header.extend(["mu_f_bits", "r_g_bps", "r_g_mbps", "activity_prob", "nbs_frac", "nbs_ceil"]);
    if kw_per_station.is_some() {
        header.push("power_kw");
    }
    header.push("mode");
    if with_mc {
        header.extend(MC_COLUMNS);
    }
    let mut t = Table::new(&header);
    for r in rows {
        let mut cells = vec![r.point.protocol.to_string()];
        cells.extend(point_cells(&r.point));
        cells.extend([
            fmt_num(r.mu_f),
            fmt_num(r.r_g),
            fmt_num(r.r_g / MBPS),
            fmt_num(r.activity),
            fmt_num(r.nbs_fractional),
            r.nbs_ceil.to_string(),
        ]);
        if let Some(kw) = kw_per_station {
            cells.push(fmt_num(r.nbs_ceil as f64 * kw));
        }
        cells.push(r.mode.as_str().to_string());
        if with_mc {
            match &r.monte_carlo {
                Some(mc) => cells.extend(mc_cells(mc)),
                None => cells.extend(std::iter::repeat_n(String::new(), MC_COLUMNS.len())),
            }
        }
        t.rows.push(cells);
    }
    t
}

/// TCP/NC and TCP side by side per grid point.
pub fn comparison_table(rows: &[ProtocolComparison]) -> Table {
    let with_mc = rows.iter().any(|r| r.tcp_nc.monte_carlo.is_some());
    let mut header: Vec<&str> = POINT_COLUMNS.to_vec();
    header.extend([
        "mu_f_bits",
        "r_g_nc_bps",
        "r_g_tcp_bps",
        "nbs_nc_frac",
        "nbs_tcp_frac",
        "nbs_nc_ceil",
        "nbs_tcp_ceil",
        "delta_frac",
        "ratio",
    ]);
    if with_mc {
        header.extend(["mc_nbs_required_nc", "mc_nbs_required_tcp"]);
    }
    let mut t = Table::new(&header);
    for c in rows {
        let mut cells = point_cells(&c.tcp_nc.point);
        cells.extend([
            fmt_num(c.tcp_nc.mu_f),
            fmt_num(c.tcp_nc.r_g),
            fmt_num(c.tcp.r_g),
            fmt_num(c.tcp_nc.nbs_fractional),
            fmt_num(c.tcp.nbs_fractional),
            c.tcp_nc.nbs_ceil.to_string(),
            c.tcp.nbs_ceil.to_string(),
            fmt_num(c.delta),
            fmt_opt(c.ratio),
        ]);
        if with_mc {
            for row in [&c.tcp_nc, &c.tcp] {
                cells.push(fmt_opt(row.monte_carlo.as_ref().map(|m| m.nbs_required)));
            }
        }
        t.rows.push(cells);
    }
    t
}

/// Goodput per `(protocol, r_t, p_p, rtt)`.
pub fn goodput_table(rows: &[(GridPoint, f64)]) -> Table {
    let mut t = Table::new(&["protocol", "r_t_bps", "r_t_mbps", "p_p", "rtt_s", "r_g_bps", "r_g_mbps"]);
    for (pt, r_g) in rows {
        t.rows.push(vec![
            pt.protocol.to_string(),
            fmt_num(pt.r_t),
            fmt_num(pt.r_t / MBPS),
            fmt_num(pt.p_p),
            fmt_num(pt.rtt),
            fmt_num(*r_g),
            fmt_num(r_g / MBPS),
        ]);
    }
    t
}

/// Per-iteration rows of every simulated grid point.
pub fn iterations_table(runs: &[(GridPoint, u64, SimStats)]) -> Table {
    let mut header = vec!["protocol"];
    header.extend(POINT_COLUMNS);
    header.extend([
        "seed",
        "iteration",
        "active_fraction",
        "nbs_frac",
        "nbs_required",
        "peak_demand",
        "arrivals",
        "completed",
        "mean_completion_s",
    ]);
    let mut t = Table::new(&header);
    for (pt, seed, stats) in runs {
        for (i, it) in stats.per_iteration.iter().enumerate() {
            let mut cells = vec![pt.protocol.to_string()];
            cells.extend(point_cells(pt));
            cells.extend([
                seed.to_string(),
                i.to_string(),
                fmt_num(it.mean_active_fraction),
                fmt_num(it.mean_nbs_fractional),
                it.nbs_required.to_string(),
                fmt_num(it.peak_demand),
                it.arrivals.to_string(),
                it.completed.to_string(),
                fmt_opt(it.mean_completion_time),
            ]);
            t.rows.push(cells);
        }
    }
    t
}

fn gp_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// A gnuplot script drawing `series` against `r_t` in Mbps, one curve per
/// `p` (and per series), one panel per distinct (mixture, rtt, p_p, protocol).
///
/// Rows are selected by exact string match on the CSV cells, so the script
/// only depends on the CSV file sitting next to it.
pub fn plot_script(table: &Table, csv_name: &str, title: &str, series: &[(&str, &str)]) -> String {
    let col = |name: &str| table.column(name).map(|i| i + 1);
    let panel_cols: Vec<(&str, usize)> = ["file_mixture_id", "protocol", "rtt_s", "p_p"]
        .into_iter()
        .filter_map(|c| col(c).map(|i| (c, i)))
        .collect();
    let p_col = col("p");
    let x_col = col("r_t_mbps").expect("r_t_mbps column");

    let mut panels: Vec<Vec<String>> = Vec::new();
    let mut seen = BTreeSet::new();
    for row in &table.rows {
        let key: Vec<String> = panel_cols.iter().map(|(_, i)| row[i - 1].clone()).collect();
        if seen.insert(key.clone()) {
            panels.push(key);
        }
    }
    let mut ps: Vec<String> = Vec::new();
    if let Some(pc) = p_col {
        for row in &table.rows {
            if !ps.contains(&row[pc - 1]) {
                ps.push(row[pc - 1].clone());
            }
        }
    }

    let mut s = String::new();
    s.push_str(&format!("# {title}\n# Renders {csv_name}; run with: gnuplot <this file>\n"));
    s.push_str("set datafile separator \",\"\n");
    s.push_str(&format!(
        "set terminal pngcairo size 900,{}\n",
        420 * panels.len().max(1)
    ));
    let stem = csv_name.trim_end_matches(".csv");
    s.push_str(&format!("set output {}\n", gp_quote(&format!("{stem}.png"))));
    s.push_str("set xlabel \"r_t (Mbps)\"\nset ylabel \"n_bs\"\nset key outside right\nset grid\n");
    s.push_str(&format!("set multiplot layout {},1 title {}\n", panels.len().max(1), gp_quote(title)));
    for key in &panels {
        let label: Vec<String> =
            panel_cols.iter().zip(key).map(|((name, _), v)| format!("{name}={v}")).collect();
        s.push_str(&format!("set title {}\n", gp_quote(&label.join(" "))));
        let mut curves = Vec::new();
        let p_values: Vec<Option<&String>> =
            if ps.is_empty() { vec![None] } else { ps.iter().map(Some).collect() };
        for (y, y_label) in series {
            let Some(y_col) = col(y) else { continue };
            for p in &p_values {
                let mut conds: Vec<String> = panel_cols
                    .iter()
                    .zip(key)
                    .map(|((_, i), v)| format!("strcol({i}) eq {}", gp_quote(v)))
                    .collect();
                let mut name = y_label.to_string();
                if let (Some(p), Some(pc)) = (p, p_col) {
                    conds.push(format!("strcol({pc}) eq {}", gp_quote(p)));
                    name = format!("{y_label} p={p}");
                }
                curves.push(format!(
                    "{} every ::1 using ({} ? column({x_col}) : 1/0):(column({y_col})) with linespoints title {}",
                    gp_quote(csv_name),
                    conds.join(" && "),
                    gp_quote(&name)
                ));
            }
        }
        s.push_str(&format!("plot {}\n", curves.join(", \\\n     ")));
    }
    s.push_str("unset multiplot\n");
    s
}

/// Series plotted for a plain sweep table.
pub fn sweep_series(table: &Table) -> Vec<(&'static str, &'static str)> {
    let mut v = vec![("nbs_frac", "n_bs")];
    if table.column("mc_nbs_required").is_some() {
        v.push(("mc_nbs_required", "n_bs (simulated)"));
    }
    v
}

pub const COMPARISON_SERIES: [(&str, &str); 2] = [("nbs_nc_frac", "TCP/NC"), ("nbs_tcp_frac", "TCP")];
