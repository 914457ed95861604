use std::fmt::Write as _;
use std::path::Path;

use ggbm_core::bounds::{bound_pair, lower_bound, lower_bound_asymptotic_n, upper_bound, BoundParams};
use ggbm_core::geometry::schema::parse_pair;
use ggbm_core::measure::QuadratureSpec;
use ggbm_core::verify::{bm_deficit, counterexample_search, CounterexampleGrid, CounterexampleWitness, DeficitReport};

use crate::plot::{Chart, Series};
use crate::{CliError, Status};

/// Values `a, a + step, …` up to `b` from `a:b:step`; a single number is a
/// one-point range.
pub fn parse_range(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = |why: &str| CliError::Usage(format!("range `{spec}`: {why}"));
    let parts: Vec<f64> = spec
        .split(':')
        .map(|s| s.trim().parse::<f64>().map_err(|_| bad("expected numbers a:b:step")))
        .collect::<Result<_, _>>()?;
    let (a, b, step) = match parts[..] {
        [a] => (a, a, 1.0),
        [a, b, step] => (a, b, step),
        _ => return Err(bad("expected a:b:step")),
    };
    if !(a.is_finite() && b.is_finite() && step > 0.0 && step.is_finite()) {
        return Err(bad("bounds must be finite and the step positive"));
    }
    if b < a {
        return Err(bad("empty range"));
    }
    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
    if count > 1_000_000 {
        return Err(bad("more than a million points"));
    }
    Ok((0..count).map(|k| a + k as f64 * step).collect())
}

pub fn parse_dims(spec: &str) -> Result<Vec<usize>, CliError> {
    parse_range(spec)?
        .into_iter()
        .map(|v| {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(CliError::Usage(format!("range `{spec}`: dimension {v} is not a positive integer")))
            }
        })
        .collect()
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn zero_sign(v: f64) -> f64 {
    v + 0.0
}

pub fn bounds(n: usize, p: f64) -> Result<Status, CliError> {
    let b = bound_pair(BoundParams::new(n, p)?)?;
    let (lo, hi) = b.rounded_enclosure(3);
    println!("n = {n}, p = {p} ({})", b.method.as_str());
    println!("lower    {:.6}", zero_sign(b.lower));
    println!("upper    {:.6}", zero_sign(b.upper));
    println!("interval [{:.6}, {:.6}]", zero_sign(b.lower), zero_sign(b.upper));
    println!("rounded  [{:.3}, {:.3}]", zero_sign(lo), zero_sign(hi));
    Ok(Status::Ok)
}

pub fn table(range: &str, ps: &[f64], out: Option<&Path>) -> Result<Status, CliError> {
    let dims = parse_dims(range)?;
    if ps.is_empty() {
        return Err(CliError::Usage("need at least one value of p".into()));
    }
    let mut csv = String::from("n,p,lower,upper,method\n");
    for &p in ps {
        for &n in &dims {
            let b = bound_pair(BoundParams::new(n, p)?)?;
            let _ = writeln!(csv, "{n},{p},{},{},{}", b.lower, b.upper, b.method.as_str());
        }
    }
    print!("{csv}");
    if let Some(dir) = out {
        write_file(&dir.join("table.csv"), &csv)?;
    }
    Ok(Status::Ok)
}

struct CurveRow {
    x: f64,
    lower: f64,
    upper: f64,
    ref_kl: f64,
    ref_ar: f64,
    ref_trivial: f64,
}

pub fn curve(vary_n: bool, n: usize, p: f64, range: &str, out: &Path, loglog: bool) -> Result<Status, CliError> {
    let xs = if vary_n { parse_dims(range)?.into_iter().map(|v| v as f64).collect() } else { parse_range(range)? };
    let mut rows = Vec::with_capacity(xs.len());
    for &x in &xs {
        let (nn, pp) = if vary_n { (x as usize, p) } else { (n, x) };
        let b = bound_pair(BoundParams::new(nn, pp)?)?;
        let nf = nn as f64;
        rows.push(CurveRow {
            x,
            lower: b.lower,
            upper: b.upper,
            ref_kl: 1.0 / (2.0 * nf),
            ref_ar: (pp - 1.0) / (pp * nf),
            ref_trivial: 1.0 / nf,
        });
    }
    let mut csv = String::from("x,lower,upper,ref_kl,ref_ar,ref_trivial\n");
    for r in &rows {
        let _ = writeln!(csv, "{},{},{},{},{},{}", r.x, r.lower, r.upper, r.ref_kl, r.ref_ar, r.ref_trivial);
    }
    let (stem, title, x_label) = if vary_n {
        ("curve_n", format!("Bounds for p = {p}"), "n")
    } else {
        ("curve_p", format!("Bounds for n = {n}"), "p")
    };
    let series = |label, f: fn(&CurveRow) -> f64, dashed| Series {
        label,
        points: rows.iter().map(|r| (r.x, f(r))).collect(),
        dashed,
    };
    let chart = Chart {
        title: &title,
        x_label,
        y_label: "exponent",
        log_log: loglog,
        series: vec![
            series("lower bound", |r| r.lower, false),
            series("upper bound", |r| r.upper, false),
            series("1/(2n)", |r| r.ref_kl, true),
            series("(p-1)/(pn)", |r| r.ref_ar, true),
            series("1/n", |r| r.ref_trivial, true),
        ],
    };
    let csv_path = out.join(format!("{stem}.csv"));
    let svg_path = out.join(format!("{stem}.svg"));
    write_file(&csv_path, &csv)?;
    write_file(&svg_path, &chart.render())?;
    println!("wrote {} ({} rows)", csv_path.display(), rows.len());
    println!("wrote {}", svg_path.display());
    Ok(Status::Ok)
}

fn sphere_spec(n: usize, samples: usize, seed: u64) -> QuadratureSpec {
    match n {
        2 | 3 => QuadratureSpec::for_dim(n),
        _ => QuadratureSpec::monte_carlo(samples, seed),
    }
}

#[allow(clippy::too_many_arguments)]
pub fn verify(
    bodies: &Path,
    n: usize,
    p: f64,
    lambdas: &[f64],
    alpha: Option<f64>,
    samples: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<Status, CliError> {
    let json = std::fs::read_to_string(bodies).map_err(|e| CliError::io(bodies, e))?;
    let (k, l) = parse_pair(&json)?;
    let params = BoundParams::new(n, p)?;
    let alpha = match alpha {
        Some(a) => a,
        None => lower_bound(params)?,
    };
    if lambdas.is_empty() {
        return Err(CliError::Usage("need at least one lambda".into()));
    }
    let spec = sphere_spec(n, samples, seed);
    let mut csv = format!("{}\n", DeficitReport::CSV_HEADER);
    let mut violated = false;
    for &lambda in lambdas {
        let r = bm_deficit(&k, &l, lambda, alpha, params, &spec)?;
        violated |= r.is_violation();
        let _ = writeln!(csv, "{}", r.csv_row());
    }
    print!("{csv}");
    if let Some(dir) = out {
        write_file(&dir.join("verify.csv"), &csv)?;
    }
    Ok(if violated { Status::Violation } else { Status::Ok })
}

pub fn counterexample(
    n: usize,
    p: f64,
    q: f64,
    alphas: Option<Vec<f64>>,
    eps: Option<Vec<f64>>,
    radius: Option<f64>,
    out: Option<&Path>,
) -> Result<Status, CliError> {
    let params = BoundParams::new(n, p)?;
    let mut grid = CounterexampleGrid::default();
    if let Some(a) = alphas {
        grid.alphas = a;
    }
    if let Some(e) = eps {
        grid.eps = e;
    }
    if let Some(r) = radius {
        grid.radius = r;
    }
    let found = counterexample_search(params, q, &grid)?;
    let mut csv = format!("{}\n", CounterexampleWitness::CSV_HEADER);
    if let Some(w) = &found {
        let _ = writeln!(csv, "{}", w.csv_row());
    }
    print!("{csv}");
    if let Some(dir) = out {
        write_file(&dir.join("counterexample.csv"), &csv)?;
    }
    match found {
        Some(_) => Ok(Status::Violation),
        None => {
            eprintln!("no violation on the grid");
            Ok(Status::Ok)
        }
    }
}

fn fitted_order(ns: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = ns.iter().zip(ys).filter(|(_, y)| **y > 0.0).map(|(n, y)| (n.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| -sxy / sxx)
}

pub fn asymptotics(p: f64, range: &str) -> Result<Status, CliError> {
    let dims = parse_dims(range)?;
    println!("n,f1,f2,leading,two_term,n2_res_f1,n2_res_f2");
    let mut ns = Vec::new();
    let mut remainders = Vec::new();
    for n in dims {
        let params = BoundParams::new(n, p)?;
        let (f1, f2) = (lower_bound(params)?, upper_bound(params)?);
        let nf = n as f64;
        let lead = (p - 1.0) / (p * nf);
        let two = lower_bound_asymptotic_n(params);
        println!(
            "{n},{},{},{},{},{},{}",
            zero_sign(f1),
            zero_sign(f2),
            zero_sign(lead),
            zero_sign(two),
            zero_sign(nf * nf * (f1 - lead)),
            zero_sign(nf * nf * (f2 - lead))
        );
        ns.push(nf);
        remainders.push((f1 - two).abs());
    }
    match fitted_order(&ns, &remainders) {
        Some(k) => println!("# |f1 - two_term| decays like n^-{k:.3}"),
        None => println!("# |f1 - two_term| is zero; no order to fit"),
    }
    Ok(Status::Ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("1:2:0.5").unwrap(), vec![1.0, 1.5, 2.0]);
        assert_eq!(parse_range("0.1:0.3:0.1").unwrap().len(), 3);
        assert_eq!(parse_range("7").unwrap(), vec![7.0]);
        assert!(parse_range("3:1:1").is_err());
        assert!(parse_range("1:3:0").is_err());
        assert!(parse_range("1:x:1").is_err());
        assert_eq!(parse_dims("2:10:4").unwrap(), vec![2, 6, 10]);
        assert!(parse_dims("1.5:3:1").is_err());
    }

    #[test]
    fn order_fit() {
        let ns = [10.0, 20.0, 40.0];
        let ys: Vec<f64> = ns.iter().map(|n: &f64| 5.0 * n.powi(-3)).collect();
        assert!((fitted_order(&ns, &ys).unwrap() - 3.0).abs() < 1e-12);
        assert!(fitted_order(&ns, &[0.0; 3]).is_none());
    }
}
