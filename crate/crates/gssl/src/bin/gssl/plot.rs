//! Minimal self-contained SVG plots for the experiment figures. No runtime
//! dependencies: hand-assembled markup with fixed margins.

use gssl::experiments::ExperimentResult;

const W: f64 = 640.0;
const H: f64 = 420.0;
const ML: f64 = 70.0; // left margin
const MR: f64 = 20.0;
const MT: f64 = 30.0;
const MB: f64 = 55.0;

struct Frame {
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
}

impl Frame {
    fn from_ranges(xs: &[f64], ys: &[f64]) -> Self {
        let pad = |lo: f64, hi: f64| {
            let span = (hi - lo).max(1e-12);
            (lo - 0.05 * span, hi + 0.05 * span)
        };
        let (x_lo, x_hi) = pad(
            xs.iter().cloned().fold(f64::INFINITY, f64::min),
            xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        );
        let (y_lo, y_hi) = pad(
            ys.iter().cloned().fold(f64::INFINITY, f64::min).min(0.0),
            ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        );
        Frame { x_lo, x_hi, y_lo, y_hi }
    }

    fn px(&self, x: f64) -> f64 {
        ML + (x - self.x_lo) / (self.x_hi - self.x_lo) * (W - ML - MR)
    }

    fn py(&self, y: f64) -> f64 {
        H - MB - (y - self.y_lo) / (self.y_hi - self.y_lo) * (H - MT - MB)
    }
}

fn header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        W / 2.0,
        escape(title)
    )
}

fn axes(f: &Frame, xlabel: &str, ylabel: &str) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "<line x1=\"{ML}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n\
         <line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{0}\" stroke=\"black\"/>\n",
        H - MB,
        W - MR
    ));
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = f.x_lo + t * (f.x_hi - f.x_lo);
        let yv = f.y_lo + t * (f.y_hi - f.y_lo);
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
            f.px(xv),
            H - MB + 18.0,
            fmt_tick(xv)
        ));
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n",
            ML - 6.0,
            f.py(yv) + 4.0,
            fmt_tick(yv)
        ));
    }
    s.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
        (ML + W - MR) / 2.0,
        H - 12.0,
        escape(xlabel)
    ));
    s.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">{}</text>\n",
        (MT + H - MB) / 2.0,
        (MT + H - MB) / 2.0,
        escape(ylabel)
    ));
    s
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 0.01 && v.abs() < 10000.0 {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn polyline(f: &Frame, pts: &[(f64, f64)], color: &str, dashed: bool) -> String {
    let coords: Vec<String> = pts
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y)))
        .collect();
    let dash = if dashed { " stroke-dasharray=\"6,4\"" } else { "" };
    format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash}/>\n",
        coords.join(" ")
    )
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Bar-style chart of mean bandwidth per signal with +-1 std whiskers and a
/// reference marker per bar.
fn plot_bandwidth_bars(res: &ExperimentResult) -> String {
    let aggs = &res.aggregates;
    let ymax = aggs
        .iter()
        .map(|a| (a.mean + a.std).max(a.reference.unwrap_or(0.0)))
        .fold(0.0_f64, f64::max);
    let f = Frame { x_lo: 0.0, x_hi: aggs.len() as f64, y_lo: 0.0, y_hi: ymax * 1.1 };
    let mut s = header("Mean empirical bandwidth vs boundary density supremum");
    s.push_str(&axes(&f, "signal", "bandwidth"));
    for (i, a) in aggs.iter().enumerate() {
        let xc = i as f64 + 0.5;
        let (x0, x1) = (f.px(xc - 0.3), f.px(xc + 0.3));
        let y = f.py(a.mean);
        s.push_str(&format!(
            "<rect x=\"{x0:.1}\" y=\"{y:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"{}\" opacity=\"0.7\"/>\n",
            x1 - x0,
            f.py(0.0) - y,
            COLORS[i % COLORS.len()]
        ));
        // std whisker
        let (yl, yh) = (f.py(a.mean - a.std), f.py(a.mean + a.std));
        let xm = f.px(xc);
        s.push_str(&format!(
            "<line x1=\"{xm:.1}\" y1=\"{yl:.1}\" x2=\"{xm:.1}\" y2=\"{yh:.1}\" stroke=\"black\"/>\n"
        ));
        if let Some(r) = a.reference {
            let yr = f.py(r);
            s.push_str(&format!(
                "<line x1=\"{x0:.1}\" y1=\"{yr:.1}\" x2=\"{x1:.1}\" y2=\"{yr:.1}\" stroke=\"black\" stroke-dasharray=\"4,3\" stroke-width=\"2\"/>\n"
            ));
        }
        s.push_str(&format!(
            "<text x=\"{xm:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
            H - MB + 18.0,
            escape(&a.key)
        ));
    }
    s.push_str("</svg>\n");
    s
}

/// Std-vs-n trend lines, one per signal (sweep keys `{signal}/n={n}`).
fn plot_bandwidth_sweep(res: &ExperimentResult) -> String {
    // group by signal name
    let mut groups: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for a in &res.aggregates {
        let Some((sig, _)) = a.key.split_once("/n=") else { continue };
        let x = a.x.unwrap_or(0.0);
        match groups.iter_mut().find(|(name, _)| name == sig) {
            Some((_, pts)) => pts.push((x, a.std)),
            None => groups.push((sig.to_string(), vec![(x, a.std)])),
        }
    }
    let xs: Vec<f64> = groups.iter().flat_map(|(_, p)| p.iter().map(|q| q.0)).collect();
    let ys: Vec<f64> = groups.iter().flat_map(|(_, p)| p.iter().map(|q| q.1)).collect();
    let f = Frame::from_ranges(&xs, &ys);
    let mut s = header("Bandwidth standard deviation vs sample size");
    s.push_str(&axes(&f, "n", "std of empirical bandwidth"));
    for (i, (name, pts)) in groups.iter().enumerate() {
        let mut pts = pts.clone();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let color = COLORS[i % COLORS.len()];
        s.push_str(&polyline(&f, &pts, color, false));
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" fill=\"{color}\">{}</text>\n",
            W - MR - 60.0,
            MT + 16.0 * (i + 1) as f64,
            escape(name)
        ));
    }
    s.push_str("</svg>\n");
    s
}

/// Error-vs-fraction curve with a vertical line at the reference mass.
fn plot_reconstruction(res: &ExperimentResult) -> String {
    let mut pts: Vec<(f64, f64)> = res
        .aggregates
        .iter()
        .filter_map(|a| a.x.map(|x| (x, a.mean)))
        .collect();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let reference = res.aggregates.iter().find_map(|a| a.reference);
    let mut xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    if let Some(r) = reference {
        xs.push(r);
    }
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let f = Frame::from_ranges(&xs, &ys);
    let mut s = header("Mean reconstruction error vs labeled fraction");
    s.push_str(&axes(&f, "labeled fraction", "mean error on unlabeled set"));
    s.push_str(&polyline(&f, &pts, COLORS[0], false));
    if let Some(r) = reference {
        let x = f.px(r);
        s.push_str(&format!(
            "<line x1=\"{x:.1}\" y1=\"{MT}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"{}\" stroke-dasharray=\"6,4\" stroke-width=\"2\"/>\n",
            H - MB,
            COLORS[1]
        ));
    }
    s.push_str("</svg>\n");
    s
}

/// Normalized cut vs n with the overlap-integral limit.
fn plot_cut(res: &ExperimentResult) -> String {
    let mut pts: Vec<(f64, f64)> = res
        .aggregates
        .iter()
        .filter_map(|a| a.x.map(|x| (x, a.mean)))
        .collect();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let reference = res.aggregates.iter().find_map(|a| a.reference);
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let mut ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    if let Some(r) = reference {
        ys.push(r);
    }
    let f = Frame::from_ranges(&xs, &ys);
    let mut s = header("Normalized cut vs sample size");
    s.push_str(&axes(&f, "n", "Cut(A, A^c) / n^2"));
    s.push_str(&polyline(&f, &pts, COLORS[0], false));
    if let Some(r) = reference {
        let y = f.py(r);
        s.push_str(&format!(
            "<line x1=\"{ML}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"{}\" stroke-dasharray=\"6,4\" stroke-width=\"2\"/>\n",
            W - MR,
            COLORS[1]
        ));
    }
    s.push_str("</svg>\n");
    s
}

/// Empirical spectral distribution mean curve vs the sublevel-mass curve.
fn plot_esd(res: &ExperimentResult) -> String {
    let mut emp: Vec<(f64, f64)> = Vec::new();
    let mut limit: Vec<(f64, f64)> = Vec::new();
    for a in &res.aggregates {
        if let Some(x) = a.x {
            emp.push((x, a.mean));
            if let Some(r) = a.reference {
                limit.push((x, r));
            }
        }
    }
    emp.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    limit.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let xs: Vec<f64> = emp.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = emp.iter().map(|p| p.1).chain(limit.iter().map(|p| p.1)).collect();
    let f = Frame::from_ranges(&xs, &ys);
    let mut s = header("Empirical spectral distribution vs density sublevel mass");
    s.push_str(&axes(&f, "t", "fraction of eigenvalues <= t"));
    s.push_str(&polyline(&f, &emp, COLORS[0], false));
    s.push_str(&polyline(&f, &limit, COLORS[1], true));
    s.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" fill=\"{}\">empirical mean</text>\n\
         <text x=\"{:.1}\" y=\"{:.1}\" fill=\"{}\">P(p &lt;= t)</text>\n",
        ML + 10.0,
        MT + 16.0,
        COLORS[0],
        ML + 10.0,
        MT + 32.0,
        COLORS[1]
    ));
    s.push_str("</svg>\n");
    s
}

/// Dispatch on experiment kind; sweep-style bandwidth results get the trend
/// plot.
pub fn render(res: &ExperimentResult) -> String {
    match res.experiment.as_str() {
        "bandwidth" => {
            if res.aggregates.iter().any(|a| a.key.contains("/n=")) {
                plot_bandwidth_sweep(res)
            } else {
                plot_bandwidth_bars(res)
            }
        }
        "reconstruction" => plot_reconstruction(res),
        "cut" => plot_cut(res),
        "esd" => plot_esd(res),
        _ => header("unknown experiment") + "</svg>\n",
    }
}
