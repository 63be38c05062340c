//! Subcommand implementations.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use kernsel::estimators::{
    density_curve, numerator_curve, nw_curve, quotient_curve, Curve, Grid, Sample,
};
use kernsel::kernel::{Bandwidth, GaussianMixtureKernel};
use kernsel::numerics::interquantile_grid_from_values;
use kernsel::selection::{
    cv_select_numerator, gl_select_density, gl_select_numerator, loo_cv_select_nw,
    pco_select_density, pco_select_numerator, BandwidthGrid, SelectionResult,
};
use kernsel::simulation::{
    run_experiment_with_records, ExperimentConfig, KernelId, MISEReport, Method,
    ReplicationRecord,
};
use kernsel::QuantileSpec;

use crate::svg;
use crate::tables;
use crate::{EstimateArgs, MethodArg, PlotArgs, ReproduceArgs, RunArgs, TargetArg};

fn read_sample(path: &Path) -> Result<Sample> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() >= 2 {
            if let (Ok(a), Ok(b)) = (cols[0].parse::<f64>(), cols[1].parse::<f64>()) {
                x.push(a);
                y.push(b);
                continue;
            }
        }
        if idx == 0 {
            continue; // header row
        }
        bail!("{}: line {}: expected two numeric columns, got '{line}'", path.display(), idx + 1);
    }
    if x.is_empty() {
        bail!("{}: no observations", path.display());
    }
    Sample::new(x, y).map_err(Into::into)
}

fn parse_quantiles(raw: &str, points: usize) -> Result<QuantileSpec> {
    let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
    let [lo, hi] = parts.as_slice() else {
        bail!("--quantiles expects 'p_lo,p_hi', got '{raw}'");
    };
    let spec = QuantileSpec {
        p_lo: lo.parse().with_context(|| format!("invalid quantile '{lo}'"))?,
        p_hi: hi.parse().with_context(|| format!("invalid quantile '{hi}'"))?,
        m: points,
    };
    spec.validate()?;
    Ok(spec)
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<fs::File>) -> Result<()>) -> Result<()> {
    let file =
        fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut out = BufWriter::new(file);
    body(&mut out)?;
    out.flush()?;
    Ok(())
}

fn trace_path(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("curve");
    out.with_file_name(format!("{stem}{suffix}.csv"))
}

fn write_trace(out: &Path, suffix: &str, selection: &SelectionResult) -> Result<PathBuf> {
    let path = trace_path(out, suffix);
    write_file(&path, |w| selection.write_csv(w).map_err(Into::into))?;
    Ok(path)
}

enum Chosen {
    Auto,
    Fixed(Bandwidth),
}

fn parse_bandwidth(raw: &str) -> Result<Chosen> {
    if raw == "auto" {
        return Ok(Chosen::Auto);
    }
    let value: f64 = raw.parse().with_context(|| format!("invalid --bandwidth '{raw}'"))?;
    Ok(Chosen::Fixed(Bandwidth::new(value)?))
}

pub fn estimate(args: EstimateArgs) -> Result<()> {
    let sample = read_sample(&args.data)?;
    if args.target == TargetArg::Nw {
        if let Some(spec) = args.kernel.as_deref() {
            if spec != "gauss" {
                bail!("target nw always uses the Gaussian kernel; drop --kernel or pass gauss");
            }
        }
    }
    let kernel = GaussianMixtureKernel::parse_spec(args.kernel.as_deref().unwrap_or("order7"))?;
    let gauss = GaussianMixtureKernel::gaussian();
    let spec = parse_quantiles(&args.quantiles, args.points)?;
    let grid = interquantile_grid_from_values(sample.x(), &spec)?;
    let bws = BandwidthGrid::equispaced(args.grid_min, args.grid_max, args.grid_count)?;
    let chosen = parse_bandwidth(&args.bandwidth)?;

    if args.method == MethodArg::Oracle {
        bail!("method oracle needs the true curve; it is available in `reproduce` and `run`");
    }

    let mut traces: Vec<PathBuf> = Vec::new();
    let curve = match (args.target, &chosen) {
        (TargetArg::F, Chosen::Fixed(h)) => density_curve(&sample, &kernel, *h, &grid),
        (TargetArg::F, Chosen::Auto) => {
            let selection = match args.method {
                MethodArg::Pco => pco_select_density(&sample, &kernel, &bws, &grid)?,
                MethodArg::Gl => gl_select_density(&sample, &kernel, &bws, &grid, args.gl_constant)?,
                _ => bail!("target f supports methods pco and gl"),
            };
            println!("selected bandwidth: {}", selection.selected.value());
            traces.push(write_trace(&args.out, "_trace", &selection)?);
            density_curve(&sample, &kernel, selection.selected, &grid)
        }
        (TargetArg::Bf, Chosen::Fixed(h)) => numerator_curve(&sample, &kernel, *h, &grid),
        (TargetArg::Bf, Chosen::Auto) => {
            let (selection, used_kernel) = match args.method {
                MethodArg::Pco => (pco_select_numerator(&sample, &kernel, &bws, &grid)?, &kernel),
                MethodArg::Gl => {
                    (gl_select_numerator(&sample, &kernel, &bws, &grid, args.gl_constant)?, &kernel)
                }
                MethodArg::Cv => (cv_select_numerator(&sample, &bws)?, &gauss),
                _ => bail!("target bf supports methods pco, gl and cv"),
            };
            println!("selected bandwidth: {}", selection.selected.value());
            traces.push(write_trace(&args.out, "_trace", &selection)?);
            numerator_curve(&sample, used_kernel, selection.selected, &grid)
        }
        (TargetArg::B, Chosen::Fixed(h)) => {
            let num = numerator_curve(&sample, &kernel, *h, &grid);
            let den = density_curve(&sample, &kernel, *h, &grid);
            quotient_curve(&num, &den, None)?
        }
        (TargetArg::B, Chosen::Auto) => {
            let (sel_num, sel_den) = match args.method {
                MethodArg::Pco => (
                    pco_select_numerator(&sample, &kernel, &bws, &grid)?,
                    pco_select_density(&sample, &kernel, &bws, &grid)?,
                ),
                MethodArg::Gl => (
                    gl_select_numerator(&sample, &kernel, &bws, &grid, args.gl_constant)?,
                    gl_select_density(&sample, &kernel, &bws, &grid, args.gl_constant)?,
                ),
                _ => bail!("target b supports methods pco and gl"),
            };
            println!(
                "selected bandwidths: numerator {} denominator {}",
                sel_num.selected.value(),
                sel_den.selected.value()
            );
            traces.push(write_trace(&args.out, "_trace_num", &sel_num)?);
            traces.push(write_trace(&args.out, "_trace_den", &sel_den)?);
            let num = numerator_curve(&sample, &kernel, sel_num.selected, &grid);
            let den = density_curve(&sample, &kernel, sel_den.selected, &grid);
            quotient_curve(&num, &den, None)?
        }
        (TargetArg::Nw, Chosen::Fixed(h)) => nw_curve(&sample, &gauss, *h, &grid),
        (TargetArg::Nw, Chosen::Auto) => {
            if args.method != MethodArg::CvNw {
                bail!("target nw supports method cv-nw");
            }
            let selection = loo_cv_select_nw(&sample, &bws)?;
            println!("selected bandwidth: {}", selection.selected.value());
            traces.push(write_trace(&args.out, "_trace", &selection)?);
            nw_curve(&sample, &gauss, selection.selected, &grid)
        }
    };

    write_file(&args.out, |w| curve.write_csv(w).map_err(Into::into))?;
    println!("wrote {}", args.out.display());
    for trace in traces {
        println!("wrote {}", trace.display());
    }
    if let Some(path) = args.svg {
        write_file(&path, |w| {
            w.write_all(svg::render(None, std::slice::from_ref(&curve)).as_bytes())
                .map_err(Into::into)
        })?;
        println!("wrote {}", path.display());
    }
    if curve.flagged_count() > 0 {
        println!("note: {} flagged points (near-zero denominator)", curve.flagged_count());
    }
    Ok(())
}

const TABLE_CSV_HEADER: &str =
    "model,n,method,mise_x100,std_x100,mean_bandwidth,std_bandwidth,mean_bandwidth_den";

fn opt(field: Option<f64>) -> String {
    field.map(|v| v.to_string()).unwrap_or_default()
}

fn write_table_rows<W: Write>(out: &mut W, report: &MISEReport) -> Result<()> {
    for row in &report.rows {
        // the Gaussian-family oracle is an internal benchmark, not a table column
        if row.method == Method::Oracle && row.kernel == KernelId::Gauss {
            continue;
        }
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            report.model,
            report.n,
            row.method.name(),
            row.mise_x100,
            row.std_x100,
            opt(row.mean_bandwidth),
            opt(row.std_bandwidth),
            opt(row.mean_bandwidth_den),
        )?;
    }
    Ok(())
}

fn write_records(path: &Path, batches: &[(String, usize, Vec<ReplicationRecord>)]) -> Result<()> {
    write_file(path, |out| {
        for (model, n, records) in batches {
            for record in records {
                let mut value = serde_json::to_value(record)?;
                let map = value.as_object_mut().expect("records serialize to objects");
                map.insert("model".into(), serde_json::Value::String(model.clone()));
                map.insert("n".into(), serde_json::Value::Number((*n).into()));
                writeln!(out, "{value}")?;
            }
        }
        Ok(())
    })
}

pub fn reproduce(args: ReproduceArgs) -> Result<()> {
    let Some(preset) = tables::preset(&args.table) else {
        bail!("unknown table id '{}'; known ids: {}", args.table, tables::known_ids());
    };
    let configs = preset.configs(args.reps, args.seed);
    let mut batches = Vec::new();
    let mut reports = Vec::new();
    for config in &configs {
        let (report, records) = run_experiment_with_records(config)?;
        batches.push((report.model.clone(), report.n, records));
        reports.push(report);
    }
    write_file(&args.out, |out| {
        writeln!(out, "{TABLE_CSV_HEADER}")?;
        for report in &reports {
            write_table_rows(out, report)?;
        }
        Ok(())
    })?;
    println!("wrote {}", args.out.display());
    if let Some(path) = args.records {
        write_records(&path, &batches)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

pub fn plot(args: PlotArgs) -> Result<()> {
    let read_curve = |path: &Path| -> Result<Curve> {
        let text =
            fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        Curve::read_csv(text.as_bytes())
            .with_context(|| format!("cannot parse curve {}", path.display()))
    };
    let truth = args.truth.as_deref().map(read_curve).transpose()?;
    let estimates: Vec<Curve> =
        args.curves.iter().map(|p| read_curve(p)).collect::<Result<_>>()?;

    let mut grids: Vec<(&Path, &Grid)> = Vec::new();
    if let (Some(t), Some(path)) = (&truth, &args.truth) {
        grids.push((path, t.grid()));
    }
    for (path, curve) in args.curves.iter().zip(&estimates) {
        grids.push((path, curve.grid()));
    }
    for pair in grids.windows(2) {
        if pair[0].1 != pair[1].1 {
            bail!(
                "grid mismatch between {} and {}",
                pair[0].0.display(),
                pair[1].0.display()
            );
        }
    }

    write_file(&args.out, |w| {
        w.write_all(svg::render(truth.as_ref(), &estimates).as_bytes()).map_err(Into::into)
    })?;
    println!("wrote {}", args.out.display());
    Ok(())
}

const RUN_CSV_HEADER: &str = "model,x_law,sigma,n,reps,seed,method,target,kernel,mise_x100,\
                              std_x100,mean_bandwidth,std_bandwidth,mean_bandwidth_den,\
                              std_bandwidth_den,mean_flagged_points";

pub fn run(args: RunArgs) -> Result<()> {
    let text = fs::read_to_string(&args.config)
        .with_context(|| format!("cannot read {}", args.config.display()))?;
    let config = ExperimentConfig::from_ini(&text)
        .with_context(|| format!("in config {}", args.config.display()))?;
    let (report, records) = run_experiment_with_records(&config)?;
    write_file(&args.out, |out| {
        writeln!(out, "{RUN_CSV_HEADER}")?;
        for row in &report.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                report.model,
                report.x_law,
                report.sigma,
                report.n,
                report.reps,
                report.seed,
                row.method.name(),
                row.target.name(),
                row.kernel.name(),
                row.mise_x100,
                row.std_x100,
                opt(row.mean_bandwidth),
                opt(row.std_bandwidth),
                opt(row.mean_bandwidth_den),
                opt(row.std_bandwidth_den),
                row.mean_flagged_points,
            )?;
        }
        Ok(())
    })?;
    println!("wrote {}", args.out.display());
    if let Some(path) = args.records {
        write_file(&path, |out| {
            kernsel::simulation::write_records_jsonl(&records, out).map_err(Into::into)
        })?;
        println!("wrote {}", path.display());
    }
    for row in &report.rows {
        println!(
            "{} {} ({}): 100*MISE = {:.4} (std {:.4})",
            row.method.name(),
            row.target.name(),
            row.kernel.name(),
            row.mise_x100,
            row.std_x100
        );
    }
    Ok(())
}
